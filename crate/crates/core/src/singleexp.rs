//! Closed-form fundamental solution for single-exponential potentials.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{c, sqrt_toward, Mat2, C64, I};
use crate::potential::SingleExpParams;

/// `Omega^2 = 4 l^4 + 2 w l^2 + 4 s Im(conj(a) c) l + (w/2 + s |a|^2)^2 - s |c|^2`.
pub fn omega_sq(p: &SingleExpParams, lambda: C64) -> C64 {
    let l2 = lambda * lambda;
    let s = p.sigma;
    let im_ac = (p.alpha.conj() * p.c).im;
    let k = p.omega / 2.0 + s * p.alpha.norm_sqr();
    l2 * l2 * 4.0 + l2 * (2.0 * p.omega) + lambda * (4.0 * s * im_ac) + k * k - s * p.c.norm_sqr()
}

/// Coefficients (highest degree first) of `Omega^2(lambda) - shift`.
pub fn omega_sq_poly(p: &SingleExpParams, shift: f64) -> [C64; 5] {
    let im_ac = (p.alpha.conj() * p.c).im;
    let k = p.omega / 2.0 + p.sigma * p.alpha.norm_sqr();
    [
        c(4.0, 0.0),
        c(0.0, 0.0),
        c(2.0 * p.omega, 0.0),
        c(4.0 * p.sigma * im_ac, 0.0),
        c(k * k - p.sigma * p.c.norm_sqr() - shift, 0.0),
    ]
}

const BRANCH_RADIUS: f64 = 10.0;

/// The root of `Omega^2` nearer to `2 lambda^2 + omega / 2`.
pub fn omega(p: &SingleExpParams, lambda: C64) -> C64 {
    sqrt_toward(omega_sq(p, lambda), lambda * lambda * 2.0 + p.omega / 2.0)
}

/// `Omega(lambda)` on the branch fixed at `|lambda| >= 10` by `Omega ~ 2 lambda^2 + omega / 2`
/// and continued inward along the ray through `lambda`.
pub fn omega_branch(p: &SingleExpParams, lambda: C64) -> Result<C64> {
    let r = lambda.norm();
    if r >= BRANCH_RADIUS {
        return Ok(omega(p, lambda));
    }
    let u = if r > 0.0 { lambda / r } else { c(1.0, 0.0) };
    let mut s = BRANCH_RADIUS;
    let mut prev = omega(p, u * s);
    let mut h: f64 = 0.25;
    while s > r {
        let step = h.min(s - r);
        let next = if step == s - r { lambda } else { u * (s - step) };
        let cand = sqrt_toward(omega_sq(p, next), prev);
        if (cand - prev).norm() <= 0.25 * (cand + prev).norm() {
            s -= step;
            prev = cand;
            h = (h * 2.0).min(0.25);
        } else {
            h *= 0.5;
            if h < 1e-6 {
                return Err(Error::BranchTrackingFailed(next));
            }
        }
    }
    Ok(prev)
}

/// `(cos(Omega t), sin(Omega t) / Omega)`, both even in `Omega`.
fn cos_sinc(om2: C64, t: f64) -> (C64, C64) {
    let om = om2.sqrt();
    let x = om * t;
    if x.norm() < 1e-4 {
        let x2 = om2 * t * t;
        let cs = 1.0 - x2 / 2.0 + x2 * x2 / 24.0;
        let sn = (1.0 - x2 / 6.0 + x2 * x2 / 120.0) * t;
        (cs, sn)
    } else {
        (x.cos(), x.sin() / om)
    }
}

pub fn fundamental_matrix(p: &SingleExpParams, lambda: C64, t: f64) -> Mat2 {
    let (cs, sn) = cos_sinc(omega_sq(p, lambda), t);
    let l2 = lambda * lambda;
    let x = (l2 * 4.0 + 2.0 * p.sigma * p.alpha.norm_sqr() + p.omega) / c(0.0, 2.0);
    let inner = Mat2::new(
        cs + x * sn,
        (p.alpha * lambda * 2.0 + I * p.c) * sn,
        (p.alpha.conj() * lambda * 2.0 - I * p.c.conj()) * sn * p.sigma,
        cs - x * sn,
    );
    let ph = C64::from_polar(1.0, p.omega * t / 2.0);
    Mat2::diag(ph, ph.conj()) * inner
}

pub fn discriminant(p: &SingleExpParams, lambda: C64) -> C64 {
    fundamental_matrix(p, lambda, 1.0).trace()
}

/// Roots of a complex polynomial (coefficients highest degree first) by
/// Aberth iteration.
pub fn poly_roots(coeffs: &[C64]) -> Vec<C64> {
    let mut a: Vec<C64> = coeffs.to_vec();
    while a.len() > 1 && a[0] == c(0.0, 0.0) {
        a.remove(0);
    }
    let n = a.len() - 1;
    if n == 0 {
        return vec![];
    }
    let lead = a[0];
    let a: Vec<C64> = a.iter().map(|x| x / lead).collect();
    let bound = 1.0 + a[1..].iter().map(|x| x.norm()).fold(0.0, f64::max);
    let mut z: Vec<C64> = (0..n).map(|k| C64::from_polar(0.5 * bound, 2.0 * PI * k as f64 / n as f64 + 0.4)).collect();
    let eval = |x: C64| {
        let mut p = a[0];
        let mut d = c(0.0, 0.0);
        for co in &a[1..] {
            d = d * x + p;
            p = p * x + co;
        }
        (p, d)
    };
    for _ in 0..500 {
        let mut moved = 0.0f64;
        for i in 0..n {
            let (p, d) = eval(z[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / d;
            let s: C64 = (0..n).filter(|&j| j != i).map(|j| 1.0 / (z[i] - z[j])).sum();
            let w = ratio / (1.0 - ratio * s);
            z[i] -= w;
            moved = moved.max(w.norm() / z[i].norm().max(1.0));
        }
        if moved < 1e-16 {
            break;
        }
    }
    z
}

/// Periodic eigenvalues with `|lambda| < radius` when `omega` is a multiple of
/// `2 pi`: the roots of `Omega^2 = (k pi)^2`, simple for `k = 0` and double
/// otherwise.
pub fn periodic_eigenvalues(p: &SingleExpParams, radius: f64) -> Vec<(C64, usize)> {
    let mut out = Vec::new();
    let kmax = (2.0 * radius * radius / PI).ceil() as usize + 4;
    for k in 0..=kmax {
        let shift = (k as f64 * PI).powi(2);
        for r in poly_roots(&omega_sq_poly(p, shift)) {
            if r.norm() < radius {
                out.push((r, if k == 0 { 1 } else { 2 }));
            }
        }
    }
    out
}

/// Parameter sets of the plotted examples, keyed by figure label.
pub fn figure_params(id: &str) -> Option<SingleExpParams> {
    let w = -2.0 * PI;
    let family = |sigma: f64, a: f64| {
        let beta = (-sigma * 2.0 * a * a - w).sqrt();
        SingleExpParams::new(sigma, w, c(a, 0.0), c(0.0, a * beta))
    };
    match id {
        "1a" | "5" => Some(SingleExpParams::new(1.0, w, c(6.0 / 15.0, 11.0 / 4.0), c(0.1, 0.0))),
        "1b" | "3d" => Some(family(-1.0, 0.5)),
        "3a" => Some(family(1.0, 1.0 / 12.0)),
        "3b" => Some(family(-1.0, 1.0 / 12.0)),
        "3c" => Some(family(1.0, 0.5)),
        _ => None,
    }
}

pub const FIGURES: [&str; 7] = ["1a", "1b", "3a", "3b", "3c", "3d", "5"];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fundsol::{free_solution, ode_solution};
    use crate::potential::Potential;

    #[test]
    fn closed_form_matches_integration() {
        for id in ["3a", "3d", "5"] {
            let p = figure_params(id).unwrap();
            let pot = Potential::single_exp(p, 4).unwrap();
            for lam in [c(0.4, 0.1), c(-1.2, 0.5), c(2.0, -0.3)] {
                for t in [0.3, 1.0] {
                    let a = fundamental_matrix(&p, lam, t);
                    let b = ode_solution(&pot, lam, t, 1e-12).unwrap();
                    assert!((a - b).norm() / b.norm().max(1.0) < 1e-9, "{id} {lam} {t}");
                }
            }
        }
    }

    #[test]
    fn branch_is_continuous_and_squares_to_radicand() {
        let p = figure_params("1b").unwrap();
        let z = SingleExpParams::new(1.0, 0.0, c(0.0, 0.0), c(0.0, 0.0));
        for lam in [c(0.7, 0.2), c(-2.0, 1.5), c(3.0, -0.1), c(12.0, 1.0)] {
            let om = omega_branch(&p, lam).unwrap();
            assert!((om * om - omega_sq(&p, lam)).norm() < 1e-9 * omega_sq(&p, lam).norm().max(1.0));
            assert!((omega_branch(&z, lam).unwrap() - lam * lam * 2.0).norm() < 1e-12);
        }
        let big = c(40.0, 7.0);
        let om = omega_branch(&p, big).unwrap();
        assert!((om / (big * big * 2.0 + p.omega / 2.0) - 1.0).norm() < 1e-2);
        let u = c(0.6, 0.8);
        let mut last = omega_branch(&p, u * 9.0).unwrap();
        for k in 1..80 {
            let cur = omega_branch(&p, u * (9.0 - k as f64 * 0.1)).unwrap();
            assert!((cur - last).norm() < (cur + last).norm());
            last = cur;
        }
    }

    #[test]
    fn zero_amplitude_is_free() {
        let p = SingleExpParams::new(1.0, 0.0, c(0.0, 0.0), c(0.0, 0.0));
        let lam = c(0.9, 0.4);
        assert!((fundamental_matrix(&p, lam, 0.7) - free_solution(lam, 0.7)).norm() < 1e-13);
    }

    #[test]
    fn branch_is_asymptotic() {
        let p = figure_params("5").unwrap();
        let lam = c(30.0, 7.0);
        let om = omega(&p, lam);
        assert!((om - (lam * lam * 2.0 + p.omega / 2.0)).norm() / om.norm() < 1e-2);
    }

    #[test]
    fn discriminant_is_minus_two_cos() {
        let p = figure_params("3c").unwrap();
        let lam = c(0.7, 0.25);
        assert!((discriminant(&p, lam) + 2.0 * omega(&p, lam).cos()).norm() < 1e-12);
    }

    #[test]
    fn aberth_recovers_roots() {
        let r = [c(1.0, 2.0), c(-0.5, 0.0), c(0.0, -3.0), c(2.5, 0.5)];
        let mut co = vec![c(1.0, 0.0)];
        for z in r {
            let mut next = vec![c(0.0, 0.0); co.len() + 1];
            for (i, a) in co.iter().enumerate() {
                next[i] += a;
                next[i + 1] -= a * z;
            }
            co = next;
        }
        let found = poly_roots(&co);
        for z in r {
            assert!(found.iter().any(|f| (f - z).norm() < 1e-12));
        }
    }

    #[test]
    fn figure_five_has_28_periodic_roots_in_b3() {
        let p = figure_params("5").unwrap();
        let rad = (3.25 * PI / 2.0).sqrt();
        let e = periodic_eigenvalues(&p, rad);
        let total: usize = e.iter().map(|(_, m)| m).sum();
        assert_eq!(total, 28);
        assert_eq!(e.iter().filter(|(_, m)| *m == 1).count(), 4);
    }
}
