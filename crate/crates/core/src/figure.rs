//! Plot data for the single-exponential examples.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::output::{cxs, to_json, ArcDoc, Cx, ParamsDoc, SpectrumRow};
use crate::potential::{Potential, PotentialType, SingleExpParams, CLASSIFY_TOL};
use crate::singleexp::{self, figure_params};
use crate::spectra::{b_radius, locate_spectrum, DiscSpec, Kind, Spectrum};
use crate::zeroset::{zero_set_grid_with, ArcPolyline, ArcTracer, GammaStar, MAX_STEPS, ZEROSET_TOL};

/// Potential truncation used for the figure potentials.
pub const FIGURE_K: usize = 16;

#[derive(Clone, Copy, Debug)]
pub struct FigureOptions {
    pub n_max: usize,
    pub tol: f64,
    pub grid_steps: usize,
    /// Arc labels to trace.
    pub arc_label: i64,
}

impl Default for FigureOptions {
    fn default() -> Self {
        FigureOptions { n_max: 8, tol: 1e-12, grid_steps: 240, arc_label: -1 }
    }
}

pub struct TracedArc {
    pub arc: ArcPolyline,
    pub gamma_star: Option<GammaStar>,
    pub warnings: Vec<String>,
}

pub struct FigureDataset {
    pub id: String,
    pub params: SingleExpParams,
    pub spectrum: Spectrum,
    pub zero_set: Vec<C64>,
    pub window: f64,
    pub discs: Vec<(String, Vec<C64>)>,
    pub arcs: Vec<TracedArc>,
}

#[derive(Serialize)]
struct DiscDoc<'a> {
    label: &'a str,
    outline: Vec<Cx>,
}

#[derive(Serialize)]
struct FigureDoc<'a> {
    id: &'a str,
    params: ParamsDoc,
    minimal_n: usize,
    n_max: usize,
    eigenvalues: Vec<SpectrumRow>,
    window: [crate::output::Num; 2],
    zero_set: Vec<Cx>,
    discs: Vec<DiscDoc<'a>>,
    arcs: Vec<ArcDoc>,
}

pub fn figure_potential(id: &str) -> Result<(SingleExpParams, Potential)> {
    let p = figure_params(id).ok_or_else(|| Error::InvalidInput(format!("unknown figure '{id}'")))?;
    Ok((p, Potential::single_exp(p, FIGURE_K)?))
}

/// Periodic eigenvalues labelled `(1, n, -)` and `(1, n, +)`.
pub fn eigen_pair(s: &Spectrum, n: i64) -> Option<(C64, C64)> {
    let v: Vec<C64> = s.eigenvalues.iter().filter(|e| e.label.i == 1 && e.label.n == n).map(|e| e.value).collect();
    match v.as_slice() {
        [a, b] => Some((*a, *b)),
        _ => None,
    }
}

/// Traces the arc through the critical point labelled `n` and cuts out `gamma*`.
pub fn trace_with_gamma(psi: &Potential, spectrum: &Spectrum, n: i64, tol: f64) -> Result<TracedArc> {
    let tracer = ArcTracer::new(psi, ZEROSET_TOL)?;
    let arc = tracer.trace_arc(n, MAX_STEPS)?;
    let mut warnings = Vec::new();
    let gamma_star = match eigen_pair(spectrum, n) {
        Some(pair) => match tracer.extract_gamma_star(&arc, pair, tol) {
            Ok(g) => Some(g),
            Err(e) => {
                warnings.push(format!("gamma*: {e}"));
                None
            }
        },
        None => {
            warnings.push(format!("no eigenvalue pair labelled (1, {n})"));
            None
        }
    };
    Ok(TracedArc { arc, gamma_star, warnings })
}

pub fn figure_dataset(id: &str, opts: &FigureOptions) -> Result<FigureDataset> {
    let (params, psi) = figure_potential(id)?;
    let spectrum = locate_spectrum(Kind::Periodic, &psi, opts.n_max, opts.tol)?;
    let window = b_radius(spectrum.n.max(3));
    let zero_set = zero_set_grid_with(
        |z| Ok(singleexp::discriminant(&params, z).im),
        (-window, window),
        (-window, window),
        opts.grid_steps,
    )?;
    let mut discs = vec![(format!("B_{}", spectrum.n), DiscSpec::bn(spectrum.n).outline(128))];
    for m in spectrum.n as i64 + 1..=opts.n_max as i64 {
        for n in [-m, m] {
            for i in [1u8, 2] {
                discs.push((format!("D^{i}_{n}"), DiscSpec::dn(i, n).outline(64)));
            }
        }
    }
    let mut arcs = Vec::new();
    if psi.classify(CLASSIFY_TOL) != PotentialType::General {
        match trace_with_gamma(&psi, &spectrum, opts.arc_label, 1e-7) {
            Ok(a) => arcs.push(a),
            Err(e) => eprintln!("figure {id}: arc {} not traced: {e}", opts.arc_label),
        }
    }
    Ok(FigureDataset { id: id.to_string(), params, spectrum, zero_set, window, discs, arcs })
}

impl FigureDataset {
    pub fn to_json(&self) -> Result<String> {
        let doc = FigureDoc {
            id: &self.id,
            params: ParamsDoc::from(&self.params),
            minimal_n: self.spectrum.n,
            n_max: self.spectrum.n_max,
            eigenvalues: crate::output::spectrum_rows(&self.spectrum),
            window: [crate::output::Num(-self.window), crate::output::Num(self.window)],
            zero_set: cxs(&self.zero_set),
            discs: self.discs.iter().map(|(l, o)| DiscDoc { label: l, outline: cxs(o) }).collect(),
            arcs: self.arcs.iter().map(|a| ArcDoc::new(&a.arc, a.gamma_star.as_ref(), &a.warnings)).collect(),
        };
        to_json(&doc)
    }
}
