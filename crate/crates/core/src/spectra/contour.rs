//! Argument-principle root counting on closed contours.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{c, gauss_legendre, C64};

use super::discs::DiscSpec;
use super::{Evaluator, Kind};

pub const QUAD_POINTS: usize = 256;
pub const MAX_QUAD_POINTS: usize = 16384;
pub const GUARD: f64 = 1e-9;
pub const DILATION_RETRIES: usize = 3;
const MOMENTS: usize = 5;

#[derive(Clone, Debug)]
pub struct Winding {
    pub count: usize,
    pub raw: C64,
    /// `(1/2 pi i) int (z - center)^p f'/f dz`, `p = 0..5`.
    pub moments: [C64; MOMENTS],
    pub center: C64,
    pub points: usize,
    /// Smallest scaled `|f|` on the contour relative to the largest.
    pub guard_ratio: f64,
}

/// Winding number of the kind's characteristic function along a contour given by
/// `nodes(p)`, doubling `p` from `p0` until two successive values agree.
///
/// With `nested`, the nodes for `p/2` are the even-indexed nodes for `p` (with
/// half the weight), so stability is first checked against that subset.
pub fn wind<F>(
    ev: &Evaluator,
    kind: Kind,
    nodes: F,
    center: C64,
    p0: usize,
    p_max: usize,
    nested: bool,
) -> Result<Winding>
where
    F: Fn(usize) -> Vec<(C64, C64)>,
{
    let mut p = p0;
    let mut prev: Option<C64> = None;
    loop {
        let pts = nodes(p);
        let zs: Vec<C64> = pts.iter().map(|x| x.0).collect();
        let vals = ev.eval_many(kind, &zs)?;
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for (z, (f, _)) in zs.iter().zip(&vals) {
            let s = f.norm() / kind.scale(*z);
            lo = lo.min(s);
            hi = hi.max(s);
        }
        let ratio = if hi > 0.0 { lo / hi } else { 0.0 };
        if !(ratio > GUARD) {
            return Err(Error::ContourTooClose { ratio });
        }
        let mut moments = [C64::new(0.0, 0.0); MOMENTS];
        for ((z, w), (f, fp)) in pts.iter().zip(&vals) {
            let g = fp / f * w;
            let mut zp = c(1.0, 0.0);
            for m in moments.iter_mut() {
                *m += g * zp;
                zp *= z - center;
            }
        }
        for m in moments.iter_mut() {
            *m /= c(0.0, 2.0 * PI);
        }
        let raw = moments[0];
        if nested && prev.is_none() {
            let half: C64 = pts.iter().zip(&vals).step_by(2).map(|((_, w), (f, fp))| fp / f * w * 2.0).sum();
            prev = Some(half / c(0.0, 2.0 * PI));
        }
        let stable = prev.map_or(false, |pr| (raw - pr).norm() < 1e-3);
        if stable || p * 2 > p_max {
            let r = raw.re.round();
            if (raw - r).norm() > 0.2 || r < 0.0 {
                return Err(Error::NonIntegerWinding { raw: raw.re });
            }
            return Ok(Winding { count: r as usize, raw, moments, center, points: p, guard_ratio: ratio });
        }
        prev = Some(raw);
        p *= 2;
    }
}

/// Counts roots inside a localization disc, dilating the contour by 1.05 (up to
/// three times) when it passes too close to a root.
pub fn count_roots(ev: &Evaluator, kind: Kind, disc: &DiscSpec, quad_points: usize) -> Result<Winding> {
    let mut last = Error::ContourTooClose { ratio: 0.0 };
    for k in 0..=DILATION_RETRIES {
        let d = disc.dilated(k);
        match wind(ev, kind, |p| d.boundary(p), d.center, quad_points, MAX_QUAD_POINTS, true) {
            Err(e @ Error::ContourTooClose { .. }) => last = e,
            other => return other,
        }
    }
    Err(last)
}

/// Axis-aligned rectangle `[x0, x1] x [y0, y1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub fn center(&self) -> C64 {
        c(0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1))
    }

    pub fn contains(&self, z: C64) -> bool {
        z.re > self.x0 && z.re < self.x1 && z.im > self.y0 && z.im < self.y1
    }

    pub fn diameter(&self) -> f64 {
        (self.x1 - self.x0).hypot(self.y1 - self.y0)
    }

    /// Gauss-Legendre nodes (`q` per edge) and weights, counterclockwise.
    pub fn nodes(&self, q: usize) -> Vec<(C64, C64)> {
        let (x, w) = gauss_legendre(q);
        let corners = [c(self.x0, self.y0), c(self.x1, self.y0), c(self.x1, self.y1), c(self.x0, self.y1)];
        let mut out = Vec::with_capacity(4 * q);
        for e in 0..4 {
            let a = corners[e];
            let b = corners[(e + 1) % 4];
            let half = (b - a) * 0.5;
            let mid = (a + b) * 0.5;
            for k in 0..q {
                out.push((mid + half * x[k], half * w[k]));
            }
        }
        out
    }
}

pub fn wind_rect(ev: &Evaluator, kind: Kind, r: &Rect) -> Result<Winding> {
    wind(ev, kind, |q| r.nodes(q), r.center(), 16, 1024, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::Potential;

    #[test]
    fn zero_potential_disc_counts() {
        let z = Potential::zero(1);
        let ev = Evaluator::new(&z);
        let w = count_roots(&ev, Kind::Periodic, &DiscSpec::dn(1, 1), QUAD_POINTS).unwrap();
        assert_eq!(w.count, 2);
        let w = count_roots(&ev, Kind::Dirichlet, &DiscSpec::d0(), QUAD_POINTS).unwrap();
        assert_eq!(w.count, 2);
        for n in 1..3 {
            let w = count_roots(&ev, Kind::Periodic, &DiscSpec::bn(n), QUAD_POINTS).unwrap();
            assert_eq!(w.count, 4 * (2 * n + 1));
        }
    }

    #[test]
    fn rect_count_matches_disc_count() {
        let z = Potential::zero(1);
        let ev = Evaluator::new(&z);
        let r = Rect { x0: 0.9, x1: 1.6, y0: -0.3, y1: 0.25 };
        assert_eq!(wind_rect(&ev, Kind::Dirichlet, &r).unwrap().count, 1);
        let r = Rect { x0: -0.31, x1: 0.29, y0: -0.28, y1: 0.33 };
        assert_eq!(wind_rect(&ev, Kind::Critical, &r).unwrap().count, 3);
    }
}
