//! Gradients of `M`, `Delta` and `delta` with respect to the potential.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fundsol::trajectory;
use crate::linalg::{c, simpson_weights, Mat2, C64, I, ZERO};
use crate::potential::{Potential, PotentialField};

/// `a * b = (a2 b2, a1 b1)`.
pub fn star(a: [C64; 2], b: [C64; 2]) -> [C64; 2] {
    [a[1] * b[1], a[0] * b[0]]
}

/// `gamma(M) = m1 m4 + m2 m3`.
pub fn gamma_of(m: &Mat2) -> C64 {
    m.0[0] * m.0[3] + m.0[1] * m.0[2]
}

/// `det M^d - det M^od`.
pub fn gamma_by_blocks(m: &Mat2) -> C64 {
    m.diagonal().det() - m.off_diagonal().det()
}

/// Matrices `B_j(s)` with `(d_j M(t))(s) = M(t) B_j(s)`, from `M(s)` and `psi(s)`.
pub fn brackets(m: &Mat2, psi: [C64; 4], lambda: C64) -> [Mat2; 4] {
    let [m1, m2, m3, m4] = m.0;
    let col1 = [m1, m3];
    let col2 = [m2, m4];
    let s12 = star(col1, col2);
    let s11 = star(col1, col1);
    let s22 = star(col2, col2);
    let g = gamma_of(m);
    // sigma1 psi^{1,2} and sigma3 applied to star products
    let sp = [psi[1], psi[0]];
    let s3 = |v: [C64; 2]| [v[0], -v[1]];
    let (a12, a22, a11) = (s3(s12), s3(s22), s3(s11));
    let l2 = lambda * 2.0;
    let mut out = [Mat2::zero(); 4];
    for k in 0..2 {
        let b11 = -I * g * sp[k] + l2 * a12[k];
        let b12 = c(0.0, -2.0) * m2 * m4 * sp[k] + l2 * a22[k];
        let b21 = c(0.0, 2.0) * m1 * m3 * sp[k] - l2 * a11[k];
        out[k] = Mat2::new(b11, b12, b21, -b11);
    }
    for k in 0..2 {
        // i B = [[-M1*M2, -M2*M2], [M1*M1, M1*M2]]
        let ib = Mat2::new(-s12[k], -s22[k], s11[k], s12[k]);
        out[2 + k] = ib * -I;
    }
    out
}

/// `M(s)^{-1} dV/dpsi_j M(s)`, the unsimplified integrand.
pub fn brackets_direct(m: &Mat2, psi: [C64; 4], lambda: C64) -> [Mat2; 4] {
    let dv = [
        Mat2::new(-I * psi[1], lambda * 2.0, ZERO, I * psi[1]),
        Mat2::new(-I * psi[0], ZERO, lambda * 2.0, I * psi[0]),
        Mat2::new(ZERO, I, ZERO, ZERO),
        Mat2::new(ZERO, ZERO, -I, ZERO),
    ];
    let inv = m.wronskian_inverse();
    std::array::from_fn(|j| inv * dv[j] * *m)
}

/// Four complex functions of `s` sampled on a grid.
#[derive(Clone, Debug, Serialize)]
pub struct GradientField {
    pub s: Vec<f64>,
    pub components: [Vec<C64>; 4],
}

impl GradientField {
    /// `int_0^1 sum_j F_j(s) h_j(s) ds` by composite Simpson (uniform grid on `[0, 1]`).
    pub fn pair(&self, h: &dyn PotentialField) -> Result<C64> {
        let n = self.s.len() - 1;
        if n % 2 != 0 || (self.s[n] - 1.0).abs() > 1e-14 || self.s[0] != 0.0 {
            return Err(Error::InvalidInput(
                "pairing needs a uniform grid on [0, 1] with an even interval count".into(),
            ));
        }
        let w = simpson_weights(n, 1.0 / n as f64);
        let mut acc = ZERO;
        for (k, s) in self.s.iter().enumerate() {
            let hv = h.eval(*s);
            for j in 0..4 {
                acc += self.components[j][k] * hv[j] * w[k];
            }
        }
        Ok(acc)
    }

    pub fn sup(&self) -> f64 {
        self.components.iter().flat_map(|v| v.iter()).map(|z| z.norm()).fold(0.0, f64::max)
    }
}

pub fn uniform_s_grid(intervals: usize) -> Vec<f64> {
    let n = intervals + intervals % 2;
    (0..=n).map(|k| k as f64 / n as f64).collect()
}

fn check_grid(s: &[f64], t: f64) -> Result<()> {
    if s.is_empty() || s.windows(2).any(|w| w[1] < w[0]) || s[0] < 0.0 || s[s.len() - 1] > t + 1e-15 {
        return Err(Error::InvalidInput("s-grid must be ascending inside [0, t]".into()));
    }
    Ok(())
}

/// `(d_j M(t))(s)` for every `s` in the grid, `j = 1..4`.
pub fn grad_m(psi: &Potential, lambda: C64, t: f64, s_grid: &[f64], tol: f64) -> Result<Vec<[Mat2; 4]>> {
    check_grid(s_grid, t)?;
    let mut ts = s_grid.to_vec();
    ts.push(t);
    let ms = trajectory(psi, lambda, &ts, tol)?;
    let mt = ms[ms.len() - 1];
    Ok(s_grid.iter().zip(&ms).map(|(s, m)| brackets(m, psi.eval(*s), lambda).map(|b| mt * b)).collect())
}

/// `d_h M(t) = int_0^t sum_j (d_j M(t))(s) h_j(s) ds`, composite Simpson on `intervals` steps.
pub fn directional_derivative_m(
    psi: &Potential,
    lambda: C64,
    t: f64,
    h: &dyn PotentialField,
    intervals: usize,
    tol: f64,
) -> Result<Mat2> {
    let n = intervals + intervals % 2;
    let grid: Vec<f64> = (0..=n).map(|k| t * k as f64 / n as f64).collect();
    let g = grad_m(psi, lambda, t, &grid, tol)?;
    let w = simpson_weights(n, t / n as f64);
    let mut acc = Mat2::zero();
    for (k, s) in grid.iter().enumerate() {
        let hv = h.eval(*s);
        for j in 0..4 {
            acc += g[k][j] * (hv[j] * w[k]);
        }
    }
    Ok(acc)
}

fn monodromy_field<F>(psi: &Potential, lambda: C64, s_grid: &[f64], tol: f64, f: F) -> Result<GradientField>
where
    F: Fn(&Mat2) -> C64,
{
    check_grid(s_grid, 1.0)?;
    let mut ts = s_grid.to_vec();
    ts.push(1.0);
    let ms = trajectory(psi, lambda, &ts, tol)?;
    let mono = ms[ms.len() - 1];
    let mut comps: [Vec<C64>; 4] = std::array::from_fn(|_| Vec::with_capacity(s_grid.len()));
    for (s, m) in s_grid.iter().zip(&ms) {
        let b = brackets(m, psi.eval(*s), lambda);
        for j in 0..4 {
            comps[j].push(f(&(mono * b[j])));
        }
    }
    Ok(GradientField { s: s_grid.to_vec(), components: comps })
}

/// `d_j Delta(s) = tr(M(1) B_j(s))`.
pub fn grad_discriminant(psi: &Potential, lambda: C64, s_grid: &[f64], tol: f64) -> Result<GradientField> {
    monodromy_field(psi, lambda, s_grid, tol, |x| x.trace())
}

/// `d_j delta(s)`: off-diagonal sum of `M(1) B_j(s)`.
pub fn grad_antidiscriminant(psi: &Potential, lambda: C64, s_grid: &[f64], tol: f64) -> Result<GradientField> {
    monodromy_field(psi, lambda, s_grid, tol, |x| x.0[1] + x.0[2])
}

/// `e^+_n(t) = (0, e^{-2 pi i n t})`, `e^-_n(t) = (e^{2 pi i n t}, 0)`.
pub fn e_plus(n: i64, t: f64) -> [C64; 2] {
    [ZERO, C64::from_polar(1.0, -2.0 * std::f64::consts::PI * n as f64 * t)]
}

pub fn e_minus(n: i64, t: f64) -> [C64; 2] {
    [C64::from_polar(1.0, 2.0 * std::f64::consts::PI * n as f64 * t), ZERO]
}

/// Central difference `(F(psi + eps h) - F(psi - eps h)) / 2 eps`.
pub fn central_difference<F>(psi: &Potential, h: &Potential, eps: f64, f: F) -> Result<C64>
where
    F: Fn(&Potential) -> Result<C64>,
{
    let k = psi.k().max(h.k());
    let (a, hh) = (psi.with_k(k), h.with_k(k));
    let plus = f(&a.axpy(c(eps, 0.0), &hh))?;
    let minus = f(&a.axpy(c(-eps, 0.0), &hh))?;
    Ok((plus - minus) / (2.0 * eps))
}

/// Potential with a single Fourier mode `e^{2 pi i n t}` in component `j`.
pub fn unit_mode(k: usize, j: usize, n: i64, amp: C64) -> Result<Potential> {
    let mut coeffs: [Vec<C64>; 4] = std::array::from_fn(|_| vec![ZERO; 2 * k + 1]);
    if n.unsigned_abs() as usize > k {
        return Err(Error::InvalidInput(format!("mode {n} exceeds K = {k}")));
    }
    coeffs[j][(n + k as i64) as usize] = amp;
    Potential::from_coeffs(k, coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fundsol::{free_solution, ode_solution};
    use crate::potential::PotentialType;
    use crate::spectra::{anti_discriminant, discriminant};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn brackets_match_direct_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let psi = Potential::random(&mut rng, 4, 4, 1.0, PotentialType::General);
        let lam = c(0.8, -0.4);
        let m = ode_solution(&psi, lam, 0.37, 1e-12).unwrap();
        let a = brackets(&m, psi.eval(0.37), lam);
        let b = brackets_direct(&m, psi.eval(0.37), lam);
        for j in 0..4 {
            assert!((a[j] - b[j]).norm() < 1e-12 * (1.0 + b[j].norm()));
        }
        assert!((gamma_of(&m) - gamma_by_blocks(&m)).norm() < 1e-14);
    }

    #[test]
    fn zero_potential_gradients() {
        let z = Potential::zero(1);
        let lam = c(0.7, 0.2);
        let t = 0.8;
        let s = [0.0, 0.3, 0.55, 0.8];
        let g = grad_m(&z, lam, t, &s, 1e-12).unwrap();
        let l2 = lam * lam;
        for (k, sv) in s.iter().enumerate() {
            let up = (c(0.0, -2.0) * l2 * (t - 2.0 * sv)).exp();
            let dn = (c(0.0, 2.0) * l2 * (t - 2.0 * sv)).exp();
            assert!((g[k][0] - Mat2::new(ZERO, lam * 2.0 * up, ZERO, ZERO)).norm() < 1e-10);
            assert!((g[k][1] - Mat2::new(ZERO, ZERO, lam * 2.0 * dn, ZERO)).norm() < 1e-10);
            assert!((g[k][2] - Mat2::new(ZERO, I * up, ZERO, ZERO)).norm() < 1e-10);
            assert!((g[k][3] - Mat2::new(ZERO, ZERO, -I * dn, ZERO)).norm() < 1e-10);
        }
        let gd = grad_discriminant(&z, c(1.3, -0.6), &uniform_s_grid(16), 1e-12).unwrap();
        assert!(gd.sup() < 1e-10);
        assert_eq!(free_solution(lam, 0.0), Mat2::identity());
    }

    #[test]
    fn zero_potential_antidiscriminant_at_periodic_points() {
        let z = Potential::zero(1);
        let grid = uniform_s_grid(16);
        for (i, n) in [(1u8, 1i64), (1, 2), (1, -1), (2, 3), (2, -2)] {
            let lam = crate::spectra::zero_potential_eigenvalue(i, n);
            // lambda^2 = m pi / 2
            let n = if i == 1 { n.abs() } else { -n.abs() };
            let g = grad_antidiscriminant(&z, lam, &grid, 1e-12).unwrap();
            let sgn = if n % 2 == 0 { 1.0 } else { -1.0 };
            for (k, s) in grid.iter().enumerate() {
                let (ep, em) = (e_plus(n, *s), e_minus(n, *s));
                for q in 0..2 {
                    let want12 = lam * 2.0 * sgn * (ep[q] + em[q]);
                    let want34 = (ep[q] - em[q]) * sgn;
                    assert!(
                        (g.components[q][k] - want12).norm() < 1e-9,
                        "n={n} q={q} s={s} {} {}",
                        g.components[q][k],
                        want12
                    );
                    assert!((I * g.components[2 + q][k] - want34).norm() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn m_gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let psi = Potential::random(&mut rng, 3, 3, 1.0, PotentialType::General);
        let h = unit_mode(3, 2, 1, c(0.3, -0.2)).unwrap();
        let (lam, t) = (c(-0.6, 0.8), 0.7);
        let an = directional_derivative_m(&psi, lam, t, &h, 512, 1e-13).unwrap();
        let ode = |p: &Potential| ode_solution(p, lam, t, 1e-13);
        let (mp, mm) = (ode(&psi.axpy(c(1e-5, 0.0), &h)).unwrap(), ode(&psi.axpy(c(-1e-5, 0.0), &h)).unwrap());
        let fd = (mp - mm) * (1.0 / 2e-5);
        assert!((an - fd).norm() / fd.norm() < 1e-6);
    }

    #[test]
    fn discriminant_gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let psi = Potential::random(&mut rng, 3, 3, 1.0, PotentialType::General);
        let h = Potential::random(&mut rng, 3, 3, 1.0, PotentialType::General);
        let lam = c(0.9, 0.3);
        let grid = uniform_s_grid(512);
        let g = grad_discriminant(&psi, lam, &grid, 1e-13).unwrap();
        let an = g.pair(&h).unwrap();
        let fd = central_difference(&psi, &h, 1e-5, |p| discriminant(p, lam, 1e-13)).unwrap();
        assert!((an - fd).norm() / fd.norm() < 1e-6, "{an} {fd}");
        let g = grad_antidiscriminant(&psi, lam, &grid, 1e-13).unwrap();
        let an = g.pair(&h).unwrap();
        let fd = central_difference(&psi, &h, 1e-5, |p| anti_discriminant(p, lam, 1e-13)).unwrap();
        assert!((an - fd).norm() / fd.norm() < 1e-6, "{an} {fd}");
    }
}
