//! JSON and CSV serialization with fixed field order and `%.15e` floats.

use std::fmt::Write as _;

use serde::ser::Error as _;
use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

use crate::asymptotics::DecayReport;
use crate::error::Result;
use crate::linalg::C64;
use crate::potential::SingleExpParams;
use crate::spectra::{LabeledEigenvalue, Spectrum};
use crate::zeroset::{ArcPolyline, GammaStar};

pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.15e}")
    } else {
        "null".to_string()
    }
}

/// Float serialized as `%.15e`; non-finite values become `null`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Num(pub f64);

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let raw = RawValue::from_string(fmt_f64(self.0)).map_err(S::Error::custom)?;
        raw.serialize(s)
    }
}

/// Complex number as `[re, im]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cx(pub C64);

impl Serialize for Cx {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        [Num(self.0.re), Num(self.0.im)].serialize(s)
    }
}

pub fn cxs(v: &[C64]) -> Vec<Cx> {
    v.iter().map(|z| Cx(*z)).collect()
}

pub fn nums(v: &[f64]) -> Vec<Num> {
    v.iter().map(|x| Num(*x)).collect()
}

pub fn to_json<T: Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

#[derive(Serialize)]
pub struct SpectrumRow {
    pub kind: &'static str,
    pub i: u8,
    pub n: i64,
    pub sign: &'static str,
    pub value: Cx,
    pub mult: usize,
    pub residual: Num,
}

impl From<&LabeledEigenvalue> for SpectrumRow {
    fn from(e: &LabeledEigenvalue) -> Self {
        SpectrumRow {
            kind: e.kind.as_str(),
            i: e.label.i,
            n: e.label.n,
            sign: e.label.sign.as_str(),
            value: Cx(e.value),
            mult: e.multiplicity,
            residual: Num(e.residual),
        }
    }
}

pub fn spectrum_rows(s: &Spectrum) -> Vec<SpectrumRow> {
    s.eigenvalues.iter().map(SpectrumRow::from).collect()
}

pub fn spectrum_json(s: &Spectrum) -> Result<String> {
    to_json(&spectrum_rows(s))
}

pub fn spectrum_csv(s: &Spectrum) -> String {
    let mut out = String::from("kind,i,n,sign,re,im,mult,residual\n");
    for e in &s.eigenvalues {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            e.kind.as_str(),
            e.label.i,
            e.label.n,
            e.label.sign.as_str(),
            fmt_f64(e.value.re),
            fmt_f64(e.value.im),
            e.multiplicity,
            fmt_f64(e.residual)
        );
    }
    out
}

#[derive(Serialize)]
pub struct GammaStarDoc {
    pub lower: Cx,
    pub upper: Cx,
    pub real_segment: bool,
    pub endpoint_error: Num,
    pub samples: Vec<Cx>,
    pub delta: Vec<Num>,
}

impl From<&GammaStar> for GammaStarDoc {
    fn from(g: &GammaStar) -> Self {
        GammaStarDoc {
            lower: Cx(g.lower),
            upper: Cx(g.upper),
            real_segment: g.real_segment,
            endpoint_error: Num(g.endpoint_error),
            samples: cxs(&g.samples),
            delta: nums(&g.delta),
        }
    }
}

#[derive(Serialize)]
pub struct ArcDoc {
    pub n: i64,
    pub crossing: Cx,
    pub samples: Vec<Cx>,
    pub gamma_star: Option<GammaStarDoc>,
    pub max_im_delta: Num,
    pub warnings: Vec<String>,
}

impl ArcDoc {
    pub fn new(arc: &ArcPolyline, gamma: Option<&GammaStar>, extra_warnings: &[String]) -> Self {
        let mut warnings = arc.warnings.clone();
        warnings.extend_from_slice(extra_warnings);
        ArcDoc {
            n: arc.n,
            crossing: Cx(arc.crossing),
            samples: cxs(&arc.samples),
            gamma_star: gamma.map(GammaStarDoc::from),
            max_im_delta: Num(arc.max_im_delta),
            warnings,
        }
    }
}

#[derive(Serialize)]
pub struct ParamsDoc {
    pub sigma: Num,
    pub omega: Num,
    pub alpha: Cx,
    pub c: Cx,
}

impl From<&SingleExpParams> for ParamsDoc {
    fn from(p: &SingleExpParams) -> Self {
        ParamsDoc { sigma: Num(p.sigma), omega: Num(p.omega), alpha: Cx(p.alpha), c: Cx(p.c) }
    }
}

#[derive(Serialize)]
pub struct DecayRowDoc {
    pub lambda: Cx,
    pub residual: Num,
}

pub fn decay_rows(r: &DecayReport) -> Vec<DecayRowDoc> {
    r.rows.iter().map(|row| DecayRowDoc { lambda: Cx(row.lambda), residual: Num(row.residual) }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    #[test]
    fn floats_are_fixed_format() {
        let s = serde_json::to_string(&(Num(1.0), Cx(c(-0.5, 0.25)), Num(f64::NAN))).unwrap();
        assert_eq!(s, "[1.000000000000000e0,[-5.000000000000000e-1,2.500000000000000e-1],null]");
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v[0].as_f64(), Some(1.0));
    }
}
