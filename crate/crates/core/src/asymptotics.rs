//! Large-`|lambda|` approximants of the fundamental solution.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fundsol::{free_solution, growth_scale, trajectory_jet};
use crate::linalg::{c, Mat2, C64, I, ZERO};
use crate::potential::{Potential, PotentialField, TrigPoly};

pub use crate::fundsol::free_solution as e_lambda;

pub const MIN_LAMBDA: f64 = 1e-8;
/// Largest `|Im lambda^2|` accepted by the decay validation.
pub const MAX_IM_THETA: f64 = 8.0;

/// `Gamma(t) = int_0^t (psi1 psi4 - psi2 psi3)`, exact for Fourier potentials.
pub fn gamma(psi: &Potential, t: f64) -> C64 {
    gamma_integrand(psi).integral_from_zero(t)
}

fn gamma_integrand(psi: &Potential) -> TrigPoly {
    let p: [TrigPoly; 4] = std::array::from_fn(|j| psi.component(j));
    p[0].mul(&p[3]).add(&p[1].mul(&p[2]).scale(c(-1.0, 0.0)))
}

/// Coefficient matrices of `M_p` at one time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AsymptoticCoefficients {
    pub z1: Mat2,
    pub z2od: Mat2,
    pub w1: Mat2,
    pub w2: Mat2,
    pub w3d: Mat2,
    pub gamma: C64,
}

impl AsymptoticCoefficients {
    /// Sparsity pattern of each coefficient holds exactly.
    pub fn is_well_formed(&self) -> bool {
        let z1d = self.z1.diagonal();
        self.z2od.diagonal() == Mat2::zero()
            && self.w1.diagonal() == Mat2::zero()
            && self.w3d.off_diagonal() == Mat2::zero()
            && z1d == Mat2::diag(self.gamma * 0.5, -self.gamma * 0.5)
    }
}

/// Precomputed data for evaluating the approximant of one potential.
pub struct Approximant {
    comps: [TrigPoly; 4],
    gamma: TrigPoly,
    psi0: [C64; 4],
}

impl Approximant {
    pub fn new(psi: &Potential) -> Self {
        Approximant {
            comps: std::array::from_fn(|j| psi.component(j)),
            gamma: gamma_integrand(psi),
            psi0: psi.eval(0.0),
        }
    }

    pub fn coefficients(&self, t: f64) -> AsymptoticCoefficients {
        let [p1, p2, p3, p4]: [C64; 4] = std::array::from_fn(|j| self.comps[j].eval(t));
        let [a1, a2, a3, a4] = self.psi0;
        let g = self.gamma.integral_from_zero(t);
        let mi2 = c(0.0, -0.5);
        let z1 = Mat2::new(g * 0.5, mi2 * p1, -mi2 * p2, -g * 0.5);
        let z2od = Mat2::new(ZERO, (p3 + I * p1 * g) * 0.25, (p4 + I * p2 * g) * 0.25, ZERO);
        let w1 = Mat2::new(ZERO, -mi2 * a1, mi2 * a2, ZERO);
        let w2 = Mat2::new(a2 * p1, -I * a1 * g + a3, -I * a2 * g + a4, a1 * p2) * -0.25;
        let w3d = Mat2::diag(-a2 * (p3 + I * p1 * g) + a4 * p1, a1 * (p4 + I * p2 * g) - a3 * p2) * c(0.0, 0.125);
        AsymptoticCoefficients { z1, z2od, w1, w2, w3d, gamma: g }
    }

    /// `M_p = Z_p e^{-i theta t sigma3} + W_p e^{i theta t sigma3}`, `theta = 2 lambda^2`.
    pub fn eval(&self, lambda: C64, t: f64) -> Result<Mat2> {
        if lambda.norm() < MIN_LAMBDA {
            return Err(Error::DegenerateLambda(lambda.norm()));
        }
        let k = self.coefficients(t);
        let il = 1.0 / lambda;
        let zp = Mat2::identity() + k.z1 * il + k.z2od * (il * il);
        let wp = k.w1 * il + k.w2 * (il * il) + k.w3d * (il * il * il);
        let e = free_solution(lambda, t);
        let einv = Mat2::diag(e.0[3], e.0[0]);
        Ok(zp * e + wp * einv)
    }
}

pub fn approximant(psi: &Potential, lambda: C64, t: f64) -> Result<Mat2> {
    Approximant::new(psi).eval(lambda, t)
}

/// `zeta^1_n = sqrt(n pi / 2)`.
pub fn zeta1(n: u32) -> C64 {
    c((n as f64 * PI / 2.0).sqrt(), 0.0)
}

/// `zeta^3_n = i sqrt(n pi / 2)`.
pub fn zeta3(n: u32) -> C64 {
    c(0.0, (n as f64 * PI / 2.0).sqrt())
}

#[derive(Clone, Debug, Serialize)]
pub struct DecayRow {
    pub lambda: C64,
    /// `sup_t |lambda| e^{-2|Im lambda^2| t} |M - E_lambda|`.
    pub residual: f64,
    /// `sup_t |M - E_lambda|`.
    pub sup_diff: f64,
    /// `sup_t e^{-2|Im lambda^2| t} |Mdot - Edot_lambda|`.
    pub deriv_residual: f64,
    /// `sup_t e^{-2|Im lambda^2| t} |M - M_p|`.
    pub approx_residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DecayReport {
    pub rows: Vec<DecayRow>,
    /// Every residual stays below twice the median.
    pub bounded: bool,
}

fn free_derivative(lambda: C64, t: f64) -> Mat2 {
    let e = free_solution(lambda, t);
    Mat2::diag(e.0[0] * c(0.0, -4.0) * lambda * t, e.0[3] * c(0.0, 4.0) * lambda * t)
}

/// Residuals of `M` against `E_lambda` (and `M_p`) over `t_grid` for every `lambda`.
pub fn validate_decay(psi: &Potential, lambdas: &[C64], t_grid: &[f64], tol: f64) -> Result<DecayReport> {
    if lambdas.is_empty() {
        return Err(Error::InvalidInput("empty lambda list".into()));
    }
    if let Some(l) = lambdas.iter().find(|l| (*l * *l).im.abs() > MAX_IM_THETA) {
        return Err(Error::InvalidInput(format!("|Im lambda^2| > {MAX_IM_THETA} at {l}")));
    }
    let ap = Approximant::new(psi);
    let rows: Result<Vec<DecayRow>> = lambdas
        .par_iter()
        .map(|&l| {
            let jets = trajectory_jet(psi, l, t_grid, 1, tol)?;
            let mut row =
                DecayRow { lambda: l, residual: 0.0, sup_diff: 0.0, deriv_residual: 0.0, approx_residual: 0.0 };
            for (&t, j) in t_grid.iter().zip(&jets) {
                let g = growth_scale(l, t);
                let d = (j.m - free_solution(l, t)).norm();
                row.sup_diff = row.sup_diff.max(d);
                row.residual = row.residual.max(l.norm() * d / g);
                row.deriv_residual = row.deriv_residual.max((j.dm - free_derivative(l, t)).norm() / g);
                if l.norm() >= MIN_LAMBDA {
                    row.approx_residual = row.approx_residual.max((j.m - ap.eval(l, t)?).norm() / g);
                }
            }
            Ok(row)
        })
        .collect();
    let rows = rows?;
    let mut r: Vec<f64> = rows.iter().map(|x| x.residual).collect();
    r.sort_by(f64::total_cmp);
    let median = r[r.len() / 2];
    let bounded = rows.iter().all(|x| x.residual <= 2.0 * median) || r[r.len() - 1] == 0.0;
    Ok(DecayReport { rows, bounded })
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Slope of `log sup_t |M - E|` against `log n` along `zeta(n)`, `n` in `ns`.
pub fn decay_slope(psi: &Potential, zeta: fn(u32) -> C64, ns: &[u32], t_grid: &[f64], tol: f64) -> Result<f64> {
    let lambdas: Vec<C64> = ns.iter().map(|&n| zeta(n)).collect();
    let rep = validate_decay(psi, &lambdas, t_grid, tol)?;
    let x: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
    let y: Vec<f64> = rep.rows.iter().map(|r| r.sup_diff).collect();
    Ok(loglog_slope(&x, &y))
}

pub fn uniform_grid(points: usize) -> Vec<f64> {
    (0..points).map(|k| k as f64 / (points - 1) as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{PotentialType, SingleExpParams};
    use crate::singleexp::{figure_params, fundamental_matrix};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn free_solution_examples() {
        assert_eq!(free_solution(c(0.0, 0.0), 0.4), Mat2::identity());
        let e = free_solution(c(1.0, 1.0), 0.5);
        assert!((e.0[0] - c(2f64.exp(), 0.0)).norm() < 1e-12);
        assert!((e.0[3] - c((-2f64).exp(), 0.0)).norm() < 1e-12);
    }

    #[test]
    fn gamma_of_single_exponential_is_linear() {
        let p = SingleExpParams::new(-1.0, -2.0 * PI, c(0.3, 0.2), c(-0.1, 0.7));
        let psi = Potential::single_exp(p, 2).unwrap();
        let want = c(0.0, -2.0 * p.sigma * (p.alpha.conj() * p.c).im);
        for t in [0.0, 0.3, 1.0] {
            assert!((gamma(&psi, t) - want * t).norm() < 1e-14);
        }
    }

    #[test]
    fn gamma_is_imaginary_for_symmetric_potentials() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for kind in [PotentialType::RealType, PotentialType::ImaginaryType] {
            let psi = Potential::random(&mut rng, 4, 4, 1.0, kind);
            assert!(gamma(&psi, 1.0).re.abs() < 1e-14);
        }
    }

    #[test]
    fn zero_potential_is_exact() {
        let z = Potential::zero(2);
        for l in [c(0.5, 0.1), c(3.0, -2.0)] {
            assert!((approximant(&z, l, 0.7).unwrap() - free_solution(l, 0.7)).norm() < 1e-14);
        }
        assert!(matches!(approximant(&z, c(1e-9, 0.0), 0.5), Err(Error::DegenerateLambda(_))));
    }

    #[test]
    fn coefficients_are_sparse_and_initial_value_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let psi = Potential::random(&mut rng, 3, 3, 1.0, PotentialType::General);
        let ap = Approximant::new(&psi);
        for t in [0.0, 0.4, 1.0] {
            assert!(ap.coefficients(t).is_well_formed());
        }
        assert_eq!(ap.coefficients(0.0).gamma, ZERO);
        let mut c2 = Vec::new();
        for l in [c(20.0, 3.0), c(40.0, 6.0)] {
            let d = (ap.eval(l, 0.0).unwrap() - Mat2::identity()).norm();
            c2.push(d * l.norm_sqr());
        }
        assert!(c2[1] < 2.0 * c2[0]);
    }

    #[test]
    fn approximant_error_is_second_order_for_single_exponential() {
        let p = figure_params("3d").unwrap();
        let psi = Potential::single_exp(p, 2).unwrap();
        let ap = Approximant::new(&psi);
        let mut cs = Vec::new();
        for r in [20.0, 40.0] {
            let l = C64::from_polar(r, 0.003);
            let mut sup: f64 = 0.0;
            for t in [0.1, 0.35, 0.6, 1.0] {
                let d = (fundamental_matrix(&p, l, t) - ap.eval(l, t).unwrap()).norm() / growth_scale(l, t);
                sup = sup.max(d);
            }
            cs.push(sup * r * r);
        }
        assert!(cs[1] < 1.5 * cs[0] && cs[1] > 0.0, "{cs:?}");
    }

    #[test]
    fn decay_is_half_order_along_real_sequence() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let psi = Potential::random(&mut rng, 3, 3, 1.0, PotentialType::General);
        let ns: Vec<u32> = (8..=64).step_by(8).collect();
        let s = decay_slope(&psi, zeta1, &ns, &uniform_grid(65), 1e-10).unwrap();
        assert!(s <= -0.4, "{s}");
    }
}
