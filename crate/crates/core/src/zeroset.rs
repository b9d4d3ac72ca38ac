//! Arcs of the zero set of `Im Delta` through the real critical points.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fundsol::{lambda_jet, Jet};
use crate::linalg::{c, gauss_legendre, C64};
use crate::potential::{Potential, PotentialType, CLASSIFY_TOL};

pub const ZEROSET_TOL: f64 = 1e-12;
pub const SMALL_Y: f64 = 1e-4;
pub const NORM_GUARD: f64 = 2.0;
pub const MAX_STEPS: usize = 4096;
/// Imaginary parts below this count as real when classifying `gamma*`.
const REAL_EPS: f64 = 1e-6;

/// `|Re lambda - x_n| < delta_n`, `|Im lambda| < eps_n`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Rectangle {
    pub center_x: f64,
    pub half_width: f64,
    pub half_height: f64,
}

impl Rectangle {
    pub fn for_label(n: i64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("arcs are defined for n != 0".into()));
        }
        let a = n.unsigned_abs() as f64;
        let e = (PI / 8.0) / (2.0 * a * PI).sqrt();
        Ok(Rectangle { center_x: n.signum() as f64 * (a * PI / 2.0).sqrt(), half_width: e, half_height: e })
    }

    pub fn contains(&self, z: C64) -> bool {
        (z.re - self.center_x).abs() < self.half_width && z.im.abs() < self.half_height
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ArcPolyline {
    pub n: i64,
    pub crossing: C64,
    /// Bottom to top; the lower half is the mirror image of the upper.
    pub samples: Vec<C64>,
    /// `Re Delta` at each sample.
    pub delta: Vec<f64>,
    /// Largest `|Im Delta|` over the computed (upper) samples.
    pub max_im_delta: f64,
    pub closed_under_conjugation: bool,
    /// The arc left its rectangle before `|Delta|` exceeded 2.
    pub left_rectangle: bool,
    /// Tracing stopped on `|Delta| > 2` rather than on the step budget.
    pub complete: bool,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct GammaStar {
    pub n: i64,
    pub lower: C64,
    pub upper: C64,
    /// Bottom to top (or left to right on the real axis).
    pub samples: Vec<C64>,
    pub delta: Vec<f64>,
    pub real_segment: bool,
    /// Distance of the endpoints from the supplied eigenvalues.
    pub endpoint_error: f64,
}

/// Discriminant evaluations for a real- or imaginary-type potential.
pub struct ArcTracer<'a> {
    pub psi: &'a Potential,
    pub tol: f64,
}

impl<'a> ArcTracer<'a> {
    pub fn new(psi: &'a Potential, tol: f64) -> Result<Self> {
        if psi.classify(CLASSIFY_TOL) == PotentialType::General {
            return Err(Error::InvalidInput("zero-set tracing needs a real- or imaginary-type potential".into()));
        }
        Ok(ArcTracer { psi, tol })
    }

    fn jet(&self, z: C64, order: usize) -> Result<Jet> {
        lambda_jet(self.psi, z, 1.0, order, self.tol)
    }

    pub fn delta(&self, z: C64) -> Result<C64> {
        Ok(self.jet(z, 0)?.m.trace())
    }

    /// `F(x, y) = Im Delta(x + iy) / y`, continued to small `|y|` by
    /// `int_0^1 Re Delta'(x + i s y) ds`.
    pub fn f(&self, x: f64, y: f64) -> Result<f64> {
        if y.abs() > SMALL_Y {
            return Ok(self.delta(c(x, y))?.im / y);
        }
        let (nodes, weights) = gauss_legendre(8);
        let mut s = 0.0;
        for (u, w) in nodes.iter().zip(&weights) {
            let t = 0.5 * (u + 1.0);
            s += 0.5 * w * self.jet(c(x, t * y), 1)?.dm.trace().re;
        }
        Ok(s)
    }

    /// `(F, dF/dx)` for `|y| > SMALL_Y`, using `d Delta / dx = Delta'`.
    fn f_dx(&self, x: f64, y: f64) -> Result<(f64, f64, C64)> {
        let j = self.jet(c(x, y), 1)?;
        Ok((j.m.trace().im / y, j.dm.trace().im / y, j.m.trace()))
    }

    /// Real critical point near `sgn(n) sqrt(|n| pi / 2)`: Newton on `Re Delta'`.
    pub fn crossing(&self, n: i64) -> Result<f64> {
        let rect = Rectangle::for_label(n)?;
        let mut x = rect.center_x;
        for _ in 0..50 {
            let j = self.jet(c(x, 0.0), 2)?;
            let g = j.dm.trace().re;
            let gp = j.ddm.trace().re;
            if gp == 0.0 || !gp.is_finite() {
                break;
            }
            let step = g / gp;
            x -= step;
            if (x - rect.center_x).abs() > rect.half_width {
                break;
            }
            if step.abs() < 1e-14 * x.abs().max(1.0) {
                return Ok(x);
            }
        }
        Err(Error::NoCrossingFound(n))
    }

    /// Solves `F(x, y) = 0` for `x` near `x0`.
    fn correct(&self, x0: f64, y: f64, max_move: f64) -> Result<Option<(f64, C64)>> {
        let mut x = x0;
        for _ in 0..30 {
            let (f, fx, d) = self.f_dx(x, y)?;
            if fx == 0.0 || !fx.is_finite() {
                return Ok(None);
            }
            let step = f / fx;
            x -= step;
            if (x - x0).abs() > max_move {
                return Ok(None);
            }
            if step.abs() < 1e-15 * x.abs().max(1.0) || (step.abs() < 1e-13 && (d.im).abs() < 1e-12) {
                let d = self.delta(c(x, y))?;
                return Ok(Some((x, d)));
            }
        }
        Ok(None)
    }

    /// Point on the arc at height `y`, corrected from the predictor `xp`.
    fn point_at(&self, xp: f64, y: f64, h: f64) -> Result<(f64, C64)> {
        self.correct(xp, y, 4.0 * h.max(1e-6))?.ok_or(Error::StepFailure { y })
    }

    /// Traces the arc through the real critical point with label `n` upward
    /// in `y` until `|Delta| > 2`, then mirrors it to `y < 0`.
    pub fn trace_arc(&self, n: i64, max_steps: usize) -> Result<ArcPolyline> {
        let rect = Rectangle::for_label(n)?;
        let mut warnings = Vec::new();
        if self.psi.l2_norm() > NORM_GUARD {
            warnings.push(format!("potential norm {:.3} exceeds {NORM_GUARD}", self.psi.l2_norm()));
        }
        let x0 = self.crossing(n)?;
        let d0 = self.delta(c(x0, 0.0))?;
        let base = rect.half_height / 64.0;
        let mut pts: Vec<(f64, f64, C64)> = vec![(x0, 0.0, d0)];
        let mut h = base;
        let mut left = false;
        let mut complete = d0.re.abs() > 2.0;
        let mut steps = 0;
        while !complete && steps < max_steps {
            steps += 1;
            let (xa, ya, _) = *pts.last().unwrap();
            let slope = if pts.len() >= 2 {
                let (xb, yb, _) = pts[pts.len() - 2];
                (xa - xb) / (ya - yb)
            } else {
                0.0
            };
            let y = ya + h;
            match self.correct(xa + slope * h, y, 4.0 * h) {
                Ok(Some((x, d))) => {
                    pts.push((x, y, d));
                    if !rect.contains(c(x, y)) && !left {
                        left = true;
                        warnings.push(format!("arc leaves the rectangle at {:.6}{:+.6}i", x, y));
                    }
                    complete = d.re.abs() > 2.0;
                    h = (h * 1.5).min(base);
                }
                Ok(None) | Err(Error::NonConvergence { .. }) => {
                    h *= 0.5;
                    if h < base / 1024.0 {
                        return Err(Error::StepFailure { y });
                    }
                }
                Err(e) => return Err(e),
            }
        }
        if !complete {
            warnings.push(format!("step budget {max_steps} exhausted before |Delta| > 2"));
        }
        let max_im = pts.iter().map(|p| p.2.im.abs()).fold(0.0, f64::max);
        let mut samples: Vec<C64> = pts.iter().rev().map(|p| c(p.0, -p.1)).collect();
        let mut delta: Vec<f64> = pts.iter().rev().map(|p| p.2.re).collect();
        samples.extend(pts.iter().skip(1).map(|p| c(p.0, p.1)));
        delta.extend(pts.iter().skip(1).map(|p| p.2.re));
        let closed = samples.iter().zip(samples.iter().rev()).all(|(a, b)| (a - b.conj()).norm() <= 1e-12);
        Ok(ArcPolyline {
            n,
            crossing: c(x0, 0.0),
            samples,
            delta,
            max_im_delta: max_im,
            closed_under_conjugation: closed,
            left_rectangle: left,
            complete,
            warnings,
        })
    }

    /// Cuts `gamma*_n` out of a traced arc given the located `lambda^{1,-}_n`
    /// and `lambda^{1,+}_n`.
    pub fn extract_gamma_star(&self, arc: &ArcPolyline, eig: (C64, C64), tol: f64) -> Result<GammaStar> {
        let n = arc.n;
        let target = if n.rem_euclid(2) == 0 { 2.0 } else { -2.0 };
        let x0 = arc.crossing.re;
        let (lo_e, hi_e) = if eig.0.im <= eig.1.im { eig } else { (eig.1, eig.0) };
        if lo_e.im.abs() <= REAL_EPS && hi_e.im.abs() <= REAL_EPS {
            return self.real_segment(n, x0, lo_e.re.min(hi_e.re), lo_e.re.max(hi_e.re), tol);
        }
        // upper half: from the crossing up to the first sample with |Delta| > 2
        let mid = arc.samples.len() / 2;
        let up: Vec<(C64, f64)> = arc.samples[mid..].iter().cloned().zip(arc.delta[mid..].iter().cloned()).collect();
        let k = up.iter().position(|p| p.1.abs() > 2.0).ok_or(Error::EndpointMismatch { distance: f64::INFINITY })?;
        if k == 0 {
            return Err(Error::EndpointMismatch { distance: (lo_e - hi_e).norm() });
        }
        let (a, b) = (up[k - 1], up[k]);
        let end = self.refine_endpoint(a, b, target)?;
        let mut half: Vec<(C64, f64)> = up[..k].to_vec();
        half.push((end, target));
        for (i, w) in half.windows(3).enumerate() {
            let d1 = w[1].1 - w[0].1;
            let d2 = w[2].1 - w[1].1;
            if d1 * d2 <= 0.0 {
                return Err(Error::MonotonicityViolation(i + 1));
            }
        }
        let err = (end - hi_e).norm().max((end.conj() - lo_e).norm());
        if err > 10.0 * tol {
            return Err(Error::EndpointMismatch { distance: err });
        }
        let mut samples: Vec<C64> = half.iter().rev().map(|p| p.0.conj()).collect();
        let mut delta: Vec<f64> = half.iter().rev().map(|p| p.1).collect();
        samples.extend(half.iter().skip(1).map(|p| p.0));
        delta.extend(half.iter().skip(1).map(|p| p.1));
        Ok(GammaStar { n, lower: end.conj(), upper: end, samples, delta, real_segment: false, endpoint_error: err })
    }

    /// Point on the arc between samples `a` and `b` where `Re Delta = target`.
    fn refine_endpoint(&self, a: (C64, f64), b: (C64, f64), target: f64) -> Result<C64> {
        let (mut ya, mut fa, mut xa) = (a.0.im, a.1 - target, a.0.re);
        let (mut yb, mut fb, mut xb) = (b.0.im, b.1 - target, b.0.re);
        if fa * fb > 0.0 {
            return Err(Error::EndpointMismatch { distance: fa.abs().min(fb.abs()) });
        }
        let h = (yb - ya).abs();
        let mut side = 0i32;
        for _ in 0..100 {
            let y = (ya * fb - yb * fa) / (fb - fa);
            let xp = xa + (xb - xa) * (y - ya) / (yb - ya);
            let (x, d) = self.point_at(xp, y, h)?;
            let f = d.re - target;
            if f == 0.0 || (yb - ya).abs() < 1e-14 {
                return Ok(c(x, y));
            }
            if f * fb < 0.0 {
                ya = yb;
                fa = fb;
                xa = xb;
                if side == -1 {
                    fa *= 0.5;
                }
                side = -1;
            } else {
                if side == 1 {
                    fa *= 0.5;
                }
                side = 1;
            }
            yb = y;
            fb = f;
            xb = x;
            if f.abs() < 1e-13 {
                return Ok(c(x, y));
            }
        }
        Err(Error::NonConvergence { what: "arc endpoint refinement", residual: fb.abs() })
    }

    fn real_segment(&self, n: i64, x0: f64, a: f64, b: f64, tol: f64) -> Result<GammaStar> {
        let target = if n.rem_euclid(2) == 0 { 2.0 } else { -2.0 };
        let pts = 33;
        let mut samples = Vec::with_capacity(2 * pts);
        let mut delta = Vec::with_capacity(2 * pts);
        if (b - a).abs() <= 10.0 * tol.max(1e-12) {
            samples.push(c(x0, 0.0));
            delta.push(self.delta(c(x0, 0.0))?.re);
        } else {
            if x0 < a - tol || x0 > b + tol {
                return Err(Error::EndpointMismatch { distance: (x0 - a).abs().min((x0 - b).abs()) });
            }
            for k in 0..pts {
                let x = a + (x0 - a) * k as f64 / (pts - 1) as f64;
                samples.push(c(x, 0.0));
            }
            for k in 1..pts {
                let x = x0 + (b - x0) * k as f64 / (pts - 1) as f64;
                samples.push(c(x, 0.0));
            }
            for z in &samples {
                delta.push(self.delta(*z)?.re);
            }
            let m = pts - 1;
            for (i, w) in delta[..=m].windows(2).enumerate() {
                if (w[1] - w[0]) * (delta[m] - target) <= 0.0 {
                    return Err(Error::MonotonicityViolation(i));
                }
            }
            for (i, w) in delta[m..].windows(2).enumerate() {
                if (w[0] - w[1]) * (delta[m] - target) <= 0.0 {
                    return Err(Error::MonotonicityViolation(m + i));
                }
            }
        }
        let endpoint_error = (delta[0] - target).abs().max((delta[delta.len() - 1] - target).abs());
        Ok(GammaStar { n, lower: c(a, 0.0), upper: c(b, 0.0), samples, delta, real_segment: true, endpoint_error })
    }
}

pub fn f_extension(psi: &Potential, x: f64, y: f64, tol: f64) -> Result<f64> {
    ArcTracer::new(psi, tol)?.f(x, y)
}

pub fn trace_arc(psi: &Potential, n: i64, tol: f64, max_steps: usize) -> Result<ArcPolyline> {
    ArcTracer::new(psi, tol)?.trace_arc(n, max_steps)
}

/// Sign changes of `Im Delta` on a grid of the window, for plotting the zero set.
pub fn zero_set_grid(psi: &Potential, x: (f64, f64), y: (f64, f64), steps: usize, tol: f64) -> Result<Vec<C64>> {
    zero_set_grid_with(|z| Ok(lambda_jet(psi, z, 1.0, 0, tol)?.m.trace().im), x, y, steps)
}

/// Sign changes of `g` on a `steps x steps` grid, linearly interpolated along edges.
pub fn zero_set_grid_with<G>(g: G, x: (f64, f64), y: (f64, f64), steps: usize) -> Result<Vec<C64>>
where
    G: Fn(C64) -> Result<f64> + Sync,
{
    use rayon::prelude::*;
    let hx = (x.1 - x.0) / steps as f64;
    let hy = (y.1 - y.0) / steps as f64;
    let rows: Result<Vec<Vec<f64>>> = (0..=steps)
        .into_par_iter()
        .map(|j| (0..=steps).map(|i| g(c(x.0 + i as f64 * hx, y.0 + j as f64 * hy))).collect())
        .collect();
    let g = rows?;
    let mut out = Vec::new();
    for j in 0..=steps {
        for i in 0..=steps {
            let v = g[j][i];
            if i < steps && v * g[j][i + 1] <= 0.0 {
                let t = v / (v - g[j][i + 1]);
                out.push(c(x.0 + (i as f64 + if t.is_finite() { t } else { 0.5 }) * hx, y.0 + j as f64 * hy));
            }
            if j < steps && v * g[j + 1][i] <= 0.0 {
                let t = v / (v - g[j + 1][i]);
                out.push(c(x.0 + i as f64 * hx, y.0 + (j as f64 + if t.is_finite() { t } else { 0.5 }) * hy));
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::singleexp::{discriminant, figure_params};

    #[test]
    fn f_extension_of_zero_potential() {
        let z = Potential::zero(1);
        for x in [0.4f64, 1.1, -0.9] {
            let want = -8.0 * x * (2.0 * x * x).sin();
            assert!((f_extension(&z, x, 0.0, 1e-12).unwrap() - want).abs() < 1e-8);
            let a = f_extension(&z, x, 1e-4 * 1.01, 1e-12).unwrap();
            let b = f_extension(&z, x, -1e-4 * 1.01, 1e-12).unwrap();
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn zero_potential_arc_degenerates() {
        let z = Potential::zero(1);
        let t = ArcTracer::new(&z, ZEROSET_TOL).unwrap();
        let arc = t.trace_arc(-1, 64).unwrap();
        assert!((arc.crossing.re + (PI / 2.0).sqrt()).abs() < 1e-12);
        let x = arc.crossing.re;
        let g = t.extract_gamma_star(&arc, (c(x, 0.0), c(x, 0.0)), 1e-8).unwrap();
        assert_eq!(g.samples.len(), 1);
    }

    #[test]
    fn figure_3b_arc_reaches_the_complex_pair() {
        let p = figure_params("3b").unwrap();
        let psi = Potential::single_exp(p, 2).unwrap();
        let t = ArcTracer::new(&psi, ZEROSET_TOL).unwrap();
        let arc = t.trace_arc(-1, MAX_STEPS).unwrap();
        assert!(arc.complete && arc.closed_under_conjugation);
        assert!(arc.max_im_delta < 1e-8);
        let top = arc.samples[arc.samples.len() - 1];
        assert!((discriminant(&p, top).im).abs() < 1e-8);
        let eig: Vec<C64> = crate::singleexp::periodic_eigenvalues(&p, 2.0)
            .into_iter()
            .filter(|(z, m)| *m == 1 && (z.re + 1.25).abs() < 0.2)
            .map(|x| x.0)
            .collect();
        assert_eq!(eig.len(), 2);
        let g = t.extract_gamma_star(&arc, (eig[0], eig[1]), 1e-7).unwrap();
        assert!(g.endpoint_error < 1e-6);
        assert!(g.delta.iter().all(|d| d.abs() <= 2.0 + 1e-9));
    }
}
