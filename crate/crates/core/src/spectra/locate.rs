//! Minimal-N search, root refinement and labelling.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{c, C64};
use crate::potential::Potential;
use crate::singleexp::poly_roots;

use super::contour::{count_roots, wind_rect, Rect, Winding, QUAD_POINTS};
use super::discs::{b_radius, expected_in_b, expected_in_disc, DiscSpec};
use super::labels::{label_ball, label_disc, sort_by_label, LabeledEigenvalue, Slot};
use super::{Evaluator, Kind};

const MAX_DEPTH: usize = 16;
const LEX_EPS: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Root {
    pub value: C64,
    pub mult: usize,
    pub residual: f64,
}

#[derive(Clone, Debug)]
pub struct CountReport {
    /// Smallest `N` for which the counting lemma holds up to `n_max`.
    pub n: usize,
    pub ball_count: usize,
    /// `((i, n), winding)` for every disc with `1 <= |n| <= n_max`.
    pub discs: Vec<((u8, i64), Winding)>,
}

#[derive(Clone, Debug)]
pub struct Spectrum {
    pub kind: Kind,
    pub n: usize,
    pub n_max: usize,
    pub eigenvalues: Vec<LabeledEigenvalue>,
}

/// Power sums to the roots of the monic polynomial they determine.
fn roots_from_moments(w: &Winding) -> Vec<C64> {
    let m = w.count;
    if m == 0 {
        return vec![];
    }
    let p = &w.moments;
    let mut e = vec![c(1.0, 0.0)];
    for k in 1..=m {
        let mut s = c(0.0, 0.0);
        for i in 1..=k {
            let sign = if i % 2 == 1 { 1.0 } else { -1.0 };
            s += e[k - i] * p[i] * sign;
        }
        e.push(s / k as f64);
    }
    let coeffs: Vec<C64> = (0..=m).map(|k| if k % 2 == 0 { e[k] } else { -e[k] }).collect();
    poly_roots(&coeffs).into_iter().map(|r| r + w.center).collect()
}

fn newton(ev: &Evaluator, kind: Kind, z0: C64, tol: f64, inside: &dyn Fn(C64) -> bool) -> Result<Option<Root>> {
    let mut z = z0;
    for _ in 0..60 {
        let (f, fp) = ev.eval(kind, z)?;
        if fp.norm() == 0.0 || !fp.re.is_finite() {
            return Ok(None);
        }
        let step = f / fp;
        z -= step;
        if !inside(z) {
            return Ok(None);
        }
        if step.norm() <= tol * z.norm().max(1.0) {
            let (f, _) = ev.eval(kind, z)?;
            return Ok(Some(Root { value: z, mult: 1, residual: f.norm() / kind.scale(z) }));
        }
    }
    Ok(None)
}

/// Turns a winding with at most four roots into refined roots; `None` asks for
/// subdivision.
fn resolve(
    ev: &Evaluator,
    kind: Kind,
    w: &Winding,
    tol: f64,
    inside: &dyn Fn(C64) -> bool,
) -> Result<Option<Vec<Root>>> {
    let m = w.count;
    if m == 0 {
        return Ok(Some(vec![]));
    }
    if m > 4 {
        return Ok(None);
    }
    let est = roots_from_moments(w);
    let thr = tol.powf(1.0 / m as f64) * w.center.norm().max(1.0);
    let mut group: Vec<usize> = (0..m).collect();
    for a in 0..m {
        for b in a + 1..m {
            if (est[a] - est[b]).norm() < thr {
                let (ga, gb) = (group[a], group[b]);
                for g in group.iter_mut() {
                    if *g == gb {
                        *g = ga;
                    }
                }
            }
        }
    }
    let mut out = Vec::new();
    let mut ids: Vec<usize> = group.clone();
    ids.sort();
    ids.dedup();
    for g in ids {
        let members: Vec<C64> = (0..m).filter(|&k| group[k] == g).map(|k| est[k]).collect();
        if members.len() == 1 {
            match newton(ev, kind, members[0], tol, inside)? {
                Some(r) => out.push(r),
                None => return Ok(None),
            }
        } else {
            let centroid = members.iter().sum::<C64>() / members.len() as f64;
            if !inside(centroid) {
                return Ok(None);
            }
            let (f, _) = ev.eval(kind, centroid)?;
            out.push(Root { value: centroid, mult: members.len(), residual: f.norm() / kind.scale(centroid) });
        }
    }
    for a in 0..out.len() {
        for b in a + 1..out.len() {
            if (out[a].value - out[b].value).norm() < thr {
                return Ok(None);
            }
        }
    }
    Ok(Some(out))
}

fn quadtree(
    ev: &Evaluator,
    kind: Kind,
    r: Rect,
    w: Winding,
    tol: f64,
    depth: usize,
    out: &mut Vec<Root>,
) -> Result<()> {
    if w.count == 0 {
        return Ok(());
    }
    if let Some(rs) = resolve(ev, kind, &w, tol, &|z| r.contains(z))? {
        out.extend(rs);
        return Ok(());
    }
    if depth >= MAX_DEPTH {
        return Err(Error::NonConvergence { what: "root cluster subdivision", residual: r.diameter() });
    }
    let mut last_err = None;
    for attempt in 0..4 {
        let f = 0.5 + 0.0173 * (attempt as f64 + 1.0) * if depth % 2 == 0 { 1.0 } else { -1.0 };
        let xs = r.x0 + f * (r.x1 - r.x0);
        let ys = r.y0 + (1.0 - f) * (r.y1 - r.y0);
        let kids = [
            Rect { x0: r.x0, x1: xs, y0: r.y0, y1: ys },
            Rect { x0: xs, x1: r.x1, y0: r.y0, y1: ys },
            Rect { x0: r.x0, x1: xs, y0: ys, y1: r.y1 },
            Rect { x0: xs, x1: r.x1, y0: ys, y1: r.y1 },
        ];
        let winds: Result<Vec<Winding>> = kids.iter().map(|k| wind_rect(ev, kind, k)).collect();
        match winds {
            Ok(ws) if ws.iter().map(|x| x.count).sum::<usize>() == w.count => {
                for (k, kw) in kids.into_iter().zip(ws) {
                    quadtree(ev, kind, k, kw, tol, depth + 1, out)?;
                }
                return Ok(());
            }
            Ok(_) => {
                last_err = Some(Error::NonConvergence { what: "quadtree count consistency", residual: w.count as f64 })
            }
            Err(e @ (Error::ContourTooClose { .. } | Error::NonIntegerWinding { .. })) => last_err = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last_err.unwrap())
}

/// All roots inside a localization disc, from an existing winding.
fn roots_in_disc(ev: &Evaluator, kind: Kind, disc: &DiscSpec, w: &Winding, tol: f64) -> Result<Vec<Root>> {
    let d = *disc;
    if let Some(rs) = resolve(ev, kind, w, tol, &|z| d.dilated(3).contains(z))? {
        return Ok(rs);
    }
    let pts = d.dilated(3).outline(64);
    let (mut r, k) = pts.iter().fold(
        (Rect { x0: f64::INFINITY, x1: -f64::INFINITY, y0: f64::INFINITY, y1: -f64::INFINITY }, 0),
        |(r, k), z| (Rect { x0: r.x0.min(z.re), x1: r.x1.max(z.re), y0: r.y0.min(z.im), y1: r.y1.max(z.im) }, k),
    );
    let _ = k;
    let pad = 0.013 * r.diameter();
    r = Rect { x0: r.x0 - pad, x1: r.x1 + 1.1 * pad, y0: r.y0 - 0.9 * pad, y1: r.y1 + pad };
    let rw = wind_rect(ev, kind, &r)?;
    let mut all = Vec::new();
    quadtree(ev, kind, r, rw, tol, 0, &mut all)?;
    let inside: Vec<Root> =
        all.into_iter().filter(|x| d.dilated(0).contains(x.value) || w.count > 0 && d.contains(x.value)).collect();
    if inside.iter().map(|x| x.mult).sum::<usize>() != w.count {
        return Err(Error::NonConvergence { what: "root location in a localization disc", residual: w.count as f64 });
    }
    Ok(inside)
}

fn all_discs(n_max: usize) -> Vec<(u8, i64)> {
    let mut v = Vec::new();
    for n in 1..=n_max as i64 {
        for s in [-1, 1] {
            for i in [1u8, 2] {
                v.push((i, s * n));
            }
        }
    }
    v
}

/// Smallest `N <= n_max` such that `B_N` holds the lemma's number of roots and
/// every `D^i_n`, `N < |n| <= n_max`, holds its expected number.
pub fn minimal_n(ev: &Evaluator, kind: Kind, n_max: usize) -> Result<CountReport> {
    let discs: Result<Vec<((u8, i64), Winding)>> = all_discs(n_max)
        .into_par_iter()
        .map(|(i, n)| Ok(((i, n), count_roots(ev, kind, &DiscSpec::dn(i, n), QUAD_POINTS)?)))
        .collect();
    let discs = discs?;
    let want = expected_in_disc(kind);
    let start =
        discs.iter().filter(|(_, w)| w.count != want).map(|((_, n), _)| n.unsigned_abs() as usize).max().unwrap_or(0);
    for big_n in start..=n_max {
        let w = count_roots(ev, kind, &DiscSpec::bn(big_n), QUAD_POINTS)?;
        if w.count == expected_in_b(kind, big_n) {
            return Ok(CountReport { n: big_n, ball_count: w.count, discs });
        }
    }
    Err(Error::CountMismatch { n_max })
}

fn slots(roots: &[Root]) -> Vec<Slot> {
    roots.iter().flat_map(|r| std::iter::repeat((r.value, r.mult, r.residual)).take(r.mult)).collect()
}

/// Roots in `B_N`: first through the inner discs, falling back to a quadtree.
pub fn roots_in_ball(ev: &Evaluator, kind: Kind, big_n: usize, tol: f64) -> Result<Vec<Root>> {
    let expected = expected_in_b(kind, big_n);
    let mut parts: Vec<(DiscSpec, Winding)> = Vec::new();
    let d0 = DiscSpec::d0();
    if let Ok(w) = count_roots(ev, kind, &d0, QUAD_POINTS) {
        parts.push((d0, w));
        for (i, n) in all_discs(big_n) {
            let d = DiscSpec::dn(i, n);
            match count_roots(ev, kind, &d, QUAD_POINTS) {
                Ok(w) => parts.push((d, w)),
                Err(_) => break,
            }
        }
    }
    if parts.len() == 1 + 4 * big_n && parts.iter().map(|(_, w)| w.count).sum::<usize>() == expected {
        let mut out = Vec::new();
        let mut ok = true;
        for (d, w) in &parts {
            match roots_in_disc(ev, kind, d, w, tol) {
                Ok(rs) => out.extend(rs),
                Err(_) => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            return Ok(out);
        }
    }
    let rad = b_radius(big_n);
    let h = rad * 1.03;
    let off = 0.0117 * rad;
    let r = Rect { x0: -h + off, x1: h + off, y0: -h - 0.7 * off, y1: h - 0.7 * off };
    let w = wind_rect(ev, kind, &r)?;
    let mut all = Vec::new();
    quadtree(ev, kind, r, w, tol, 0, &mut all)?;
    let inside: Vec<Root> = all.into_iter().filter(|x| x.value.norm() < rad).collect();
    let found: usize = inside.iter().map(|x| x.mult).sum();
    if found != expected {
        return Err(Error::NonConvergence { what: "root location in B_N", residual: found as f64 });
    }
    Ok(inside)
}

pub fn locate_with(ev: &Evaluator, kind: Kind, n_max: usize, tol: f64) -> Result<Spectrum> {
    if n_max < 1 {
        return Err(Error::InvalidInput("N_max must be at least 1".into()));
    }
    let report = minimal_n(ev, kind, n_max)?;
    let big_n = report.n;
    let ball = roots_in_ball(ev, kind, big_n, tol)?;
    let mut eig = label_ball(kind, big_n, slots(&ball), LEX_EPS);
    for ((i, n), w) in &report.discs {
        if (n.unsigned_abs() as usize) <= big_n {
            continue;
        }
        let rs = roots_in_disc(ev, kind, &DiscSpec::dn(*i, *n), w, tol)?;
        eig.extend(label_disc(kind, *i, *n, slots(&rs), LEX_EPS));
    }
    sort_by_label(&mut eig);
    Ok(Spectrum { kind, n: big_n, n_max, eigenvalues: eig })
}

/// Locates and labels the spectrum of the given kind for `|n| <= n_max`.
pub fn locate_spectrum(kind: Kind, psi: &Potential, n_max: usize, tol: f64) -> Result<Spectrum> {
    let ev = Evaluator::new(psi);
    locate_with(&ev, kind, n_max, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::discs::zero_potential_eigenvalue;

    #[test]
    fn zero_potential_dirichlet_small() {
        let z = Potential::zero(1);
        let s = locate_spectrum(Kind::Dirichlet, &z, 2, 1e-12).unwrap();
        assert_eq!(s.n, 0);
        assert_eq!(s.eigenvalues.len(), 2 + 8);
        for e in &s.eigenvalues {
            let want = if e.label.n == 0 { c(0.0, 0.0) } else { zero_potential_eigenvalue(e.label.i, e.label.n) };
            assert!((e.value - want).norm() < 1e-10, "{:?} {}", e.label, e.value);
        }
    }
}
