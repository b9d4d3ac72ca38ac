//! Characteristic functions, root counting, refinement and labelling of the
//! Dirichlet, Neumann and periodic spectra and of the critical points.

use std::collections::HashMap;
use std::sync::Mutex;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fundsol::{growth_scale, lambda_jet, ode_solution, Jet};
use crate::linalg::{c, Mat2, C64};
use crate::potential::Potential;

pub mod contour;
pub mod discs;
pub mod labels;
pub mod locate;

pub use contour::{count_roots, Winding};
pub use discs::{b_radius, zero_potential_eigenvalue, DiscKind, DiscSpec};
pub use labels::{Label, LabeledEigenvalue, Sign};
pub use locate::{locate_spectrum, minimal_n, CountReport, Spectrum};

/// ODE tolerance behind every spectral evaluation.
pub const SPECTRAL_ODE_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Kind {
    Dirichlet,
    Neumann,
    Periodic,
    Critical,
}

impl Kind {
    pub const ALL: [Kind; 4] = [Kind::Dirichlet, Kind::Neumann, Kind::Periodic, Kind::Critical];

    pub fn as_str(&self) -> &'static str {
        match self {
            Kind::Dirichlet => "dirichlet",
            Kind::Neumann => "neumann",
            Kind::Periodic => "periodic",
            Kind::Critical => "critical",
        }
    }

    pub fn parse(s: &str) -> Result<Kind> {
        match s.to_ascii_lowercase().as_str() {
            "dirichlet" => Ok(Kind::Dirichlet),
            "neumann" => Ok(Kind::Neumann),
            "periodic" => Ok(Kind::Periodic),
            "critical" => Ok(Kind::Critical),
            _ => Err(Error::InvalidInput(format!("unknown spectrum kind '{s}'"))),
        }
    }

    fn order(&self) -> usize {
        if *self == Kind::Critical {
            2
        } else {
            1
        }
    }

    /// Typical size of the characteristic function at `z`, used to judge
    /// smallness independently of the exponential growth off the axes.
    pub fn scale(&self, z: C64) -> f64 {
        let g = growth_scale(z, 1.0);
        match self {
            Kind::Periodic => g * g,
            Kind::Critical => g * (1.0 + 8.0 * z.norm()),
            _ => g,
        }
    }
}

/// `(f, df/dlambda)` for the kind's characteristic function from a monodromy jet.
pub fn characteristic_from_jet(kind: Kind, j: &Jet) -> (C64, C64) {
    let two_i = c(0.0, 2.0);
    let d = |m: &Mat2| (m.0[3] + m.0[2] - m.0[1] - m.0[0]) / two_i;
    let n = |m: &Mat2| (m.0[3] - m.0[2] + m.0[1] - m.0[0]) / two_i;
    match kind {
        Kind::Dirichlet => (d(&j.m), d(&j.dm)),
        Kind::Neumann => (n(&j.m), n(&j.dm)),
        Kind::Periodic => {
            let delta = j.m.trace();
            (delta * delta - 4.0, delta * j.dm.trace() * 2.0)
        }
        Kind::Critical => (j.dm.trace(), j.ddm.trace()),
    }
}

/// Memoizing evaluator of monodromy jets for one potential.
pub struct Evaluator<'a> {
    pub psi: &'a Potential,
    pub ode_tol: f64,
    cache: Mutex<HashMap<(u64, u64), (usize, Jet)>>,
}

impl<'a> Evaluator<'a> {
    pub fn new(psi: &'a Potential) -> Self {
        Self::with_tol(psi, SPECTRAL_ODE_TOL)
    }

    pub fn with_tol(psi: &'a Potential, ode_tol: f64) -> Self {
        Evaluator { psi, ode_tol, cache: Mutex::new(HashMap::new()) }
    }

    pub fn jet(&self, z: C64, order: usize) -> Result<Jet> {
        let key = (z.re.to_bits(), z.im.to_bits());
        if let Some((o, j)) = self.cache.lock().unwrap().get(&key) {
            if *o >= order {
                return Ok(*j);
            }
        }
        let j = lambda_jet(self.psi, z, 1.0, order, self.ode_tol)?;
        self.cache.lock().unwrap().insert(key, (order, j));
        Ok(j)
    }

    pub fn eval(&self, kind: Kind, z: C64) -> Result<(C64, C64)> {
        Ok(characteristic_from_jet(kind, &self.jet(z, kind.order())?))
    }

    pub fn eval_many(&self, kind: Kind, zs: &[C64]) -> Result<Vec<(C64, C64)>> {
        zs.par_iter().map(|z| self.eval(kind, *z)).collect()
    }

    pub fn discriminant(&self, z: C64) -> Result<C64> {
        Ok(self.jet(z, 1)?.m.trace())
    }

    pub fn cache_len(&self) -> usize {
        self.cache.lock().unwrap().len()
    }
}

fn monodromy(psi: &Potential, lambda: C64, tol: f64) -> Result<Mat2> {
    if tol <= 0.0 {
        return Err(Error::InvalidInput("tol must be positive".into()));
    }
    ode_solution(psi, lambda, 1.0, tol)
}

/// `Delta = tr M(1)`.
pub fn discriminant(psi: &Potential, lambda: C64, tol: f64) -> Result<C64> {
    Ok(monodromy(psi, lambda, tol)?.trace())
}

/// `delta = m2(1) + m3(1)`.
pub fn anti_discriminant(psi: &Potential, lambda: C64, tol: f64) -> Result<C64> {
    let m = monodromy(psi, lambda, tol)?;
    Ok(m.0[1] + m.0[2])
}

pub fn discriminant_derivative(psi: &Potential, lambda: C64, tol: f64) -> Result<C64> {
    Ok(lambda_jet(psi, lambda, 1.0, 1, tol)?.dm.trace())
}

/// Value of `chi_D`, `chi_N`, `chi_P` or (for `Critical`) `dDelta/dlambda`.
pub fn characteristic(kind: Kind, psi: &Potential, lambda: C64, tol: f64) -> Result<C64> {
    if tol <= 0.0 {
        return Err(Error::InvalidInput("tol must be positive".into()));
    }
    Ok(characteristic_from_jet(kind, &lambda_jet(psi, lambda, 1.0, kind.order(), tol)?).0)
}

/// `|Delta^2(mu) - 4 - delta^2(mu)|` at a Dirichlet or Neumann eigenvalue.
pub fn verify_disc_identity(psi: &Potential, mu: C64, tol: f64) -> Result<f64> {
    let m = monodromy(psi, mu, tol)?;
    let d = m.trace();
    let a = m.0[1] + m.0[2];
    Ok((d * d - 4.0 - a * a).norm())
}

/// Checks `Delta(lambda) = 2 (-1)^n` at a periodic eigenvalue labelled `n`.
pub fn sign_at_periodic(psi: &Potential, lambda: C64, n: i64, tol: f64) -> Result<(f64, f64)> {
    let d = discriminant(psi, lambda, tol)?;
    let expected = if n.rem_euclid(2) == 0 { 2.0 } else { -2.0 };
    let residual = (d - expected).norm();
    if residual > 1e-6 {
        return Err(Error::SignMismatch { label: format!("n = {n}"), expected, found: d });
    }
    Ok((expected, residual))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::PotentialType;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    #[test]
    fn zero_potential_closed_forms() {
        let z = Potential::zero(2);
        for lam in [c(0.3, 0.2), c(1.1, -0.4), c(-0.7, 0.9)] {
            let s = (lam * lam * 2.0).sin();
            let co = (lam * lam * 2.0).cos();
            assert!((discriminant(&z, lam, 1e-12).unwrap() - co * 2.0).norm() < 1e-10);
            assert!((characteristic(Kind::Dirichlet, &z, lam, 1e-12).unwrap() - s).norm() < 1e-10);
            assert!((characteristic(Kind::Neumann, &z, lam, 1e-12).unwrap() - s).norm() < 1e-10);
            assert!((characteristic(Kind::Periodic, &z, lam, 1e-12).unwrap() + s * s * 4.0).norm() < 1e-10);
            let dd = discriminant_derivative(&z, lam, 1e-12).unwrap();
            assert!((dd + lam * s * 8.0).norm() < 1e-9);
            let ddd = lambda_jet(&z, lam, 1.0, 2, 1e-12).unwrap().ddm.trace();
            let want = -(s * 8.0 + lam * lam * co * 32.0);
            assert!((ddd - want).norm() < 1e-8);
        }
        assert!((discriminant(&z, c(0.0, 0.0), 1e-12).unwrap() - 2.0).norm() < 1e-14);
        let l = (PI / 4.0).sqrt();
        assert!((discriminant_derivative(&z, c(l, 0.0), 1e-12).unwrap() + 8.0 * l).norm() < 1e-9);
    }

    #[test]
    fn derivative_matches_differences_and_chi_p_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let p = Potential::random(&mut rng, 8, 5, 1.0, PotentialType::General);
        let lam = c(0.9, 0.35);
        let h = 1e-5;
        let fd = (discriminant(&p, lam + h, 1e-13).unwrap() - discriminant(&p, lam - h, 1e-13).unwrap()) / (2.0 * h);
        let d = discriminant_derivative(&p, lam, 1e-12).unwrap();
        assert!((fd - d).norm() / d.norm() < 1e-6);
        let delta = discriminant(&p, lam, 1e-12).unwrap();
        let chi = characteristic(Kind::Periodic, &p, lam, 1e-12).unwrap();
        assert!((chi - (delta * delta - 4.0)).norm() < 1e-10 * chi.norm().max(1.0));
    }

    #[test]
    fn sign_checks() {
        let z = Potential::zero(1);
        let l2 = PI.sqrt();
        assert_eq!(sign_at_periodic(&z, c(l2, 0.0), 2, 1e-12).unwrap().0, 2.0);
        let l1 = (PI / 2.0).sqrt();
        assert_eq!(sign_at_periodic(&z, c(l1, 0.0), 1, 1e-12).unwrap().0, -2.0);
        assert!(sign_at_periodic(&z, c(l1, 0.0), 2, 1e-12).is_err());
        assert!(verify_disc_identity(&z, c(l1, 0.0), 1e-12).unwrap() < 1e-10);
    }
}
