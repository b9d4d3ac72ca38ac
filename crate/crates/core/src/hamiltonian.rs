//! The NLS system as an evolution in `x`:
//! `(q, r, p, s)_x = (p, s, -i q_t + 2 q^2 r, i r_t + 2 r^2 q)`.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{c, C64, I, ONE, ZERO};
use crate::ode::{integrate, OdeOptions};
use crate::potential::{Potential, TrigPoly};

pub const BLOWUP_NORM: f64 = 1e6;
pub const MEAN_TOL: f64 = 1e-10;

/// `(q, r, p, s)` as functions of `t` sharing the truncation `K`.
#[derive(Clone, Debug, PartialEq)]
pub struct PhasePoint {
    pub q: TrigPoly,
    pub r: TrigPoly,
    pub p: TrigPoly,
    pub s: TrigPoly,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Functional {
    H0t,
    H1t,
    H2t,
}

impl Functional {
    pub const ALL: [Functional; 3] = [Functional::H0t, Functional::H1t, Functional::H2t];

    pub fn name(self) -> &'static str {
        match self {
            Functional::H0t => "H0t",
            Functional::H1t => "H1t",
            Functional::H2t => "H2t",
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct FunctionalValue {
    pub name: Functional,
    pub value: C64,
}

fn mul(a: &TrigPoly, b: &TrigPoly) -> TrigPoly {
    a.mul(b)
}

fn sum(parts: &[TrigPoly]) -> TrigPoly {
    parts.iter().skip(1).fold(parts[0].clone(), |acc, x| acc.add(x))
}

/// Zero-mean antiderivative.
pub fn dt_inverse(f: &TrigPoly, what: &'static str) -> Result<TrigPoly> {
    let m = f.mean().norm();
    if m > MEAN_TOL {
        return Err(Error::NonzeroMean { what, mean: m });
    }
    let k = f.k as i64;
    let a =
        f.a.iter()
            .enumerate()
            .map(|(i, z)| {
                let n = i as i64 - k;
                if n == 0 {
                    ZERO
                } else {
                    z / c(0.0, 2.0 * PI * n as f64)
                }
            })
            .collect();
    Ok(TrigPoly::new(f.k, a))
}

impl PhasePoint {
    pub fn new(q: TrigPoly, r: TrigPoly, p: TrigPoly, s: TrigPoly) -> Self {
        let k = q.k.max(r.k).max(p.k).max(s.k);
        PhasePoint { q: q.truncate(k), r: r.truncate(k), p: p.truncate(k), s: s.truncate(k) }
    }

    pub fn zero(k: usize) -> Self {
        let z = TrigPoly::zero(k);
        PhasePoint { q: z.clone(), r: z.clone(), p: z.clone(), s: z }
    }

    pub fn k(&self) -> usize {
        self.q.k
    }

    /// `psi = (q, r, p, s)(0, .)`.
    pub fn from_potential(psi: &Potential) -> Self {
        PhasePoint::new(psi.component(0), psi.component(1), psi.component(2), psi.component(3))
    }

    pub fn to_potential(&self) -> Result<Potential> {
        Potential::from_coeffs(self.k(), [self.q.a.clone(), self.r.a.clone(), self.p.a.clone(), self.s.a.clone()])
    }

    pub fn components(&self) -> [&TrigPoly; 4] {
        [&self.q, &self.r, &self.p, &self.s]
    }

    fn from_array(v: [TrigPoly; 4], k: usize) -> Self {
        let [q, r, p, s] = v;
        PhasePoint { q: q.truncate(k), r: r.truncate(k), p: p.truncate(k), s: s.truncate(k) }
    }

    pub fn truncate(&self, k: usize) -> Self {
        PhasePoint::from_array([self.q.clone(), self.r.clone(), self.p.clone(), self.s.clone()], k)
    }

    pub fn to_vec(&self) -> Vec<C64> {
        self.components().iter().flat_map(|x| x.a.iter().copied()).collect()
    }

    pub fn from_slice(k: usize, y: &[C64]) -> Self {
        let m = 2 * k + 1;
        let part = |j: usize| TrigPoly::new(k, y[j * m..(j + 1) * m].to_vec());
        PhasePoint { q: part(0), r: part(1), p: part(2), s: part(3) }
    }

    pub fn axpy(&self, eps: C64, h: &PhasePoint) -> Self {
        let k = self.k().max(h.k());
        let f = |a: &TrigPoly, b: &TrigPoly| a.add(&b.scale(eps)).truncate(k);
        PhasePoint { q: f(&self.q, &h.q), r: f(&self.r, &h.r), p: f(&self.p, &h.p), s: f(&self.s, &h.s) }
    }

    /// `sum_j int a_j b_j dt`.
    pub fn pair(&self, o: &PhasePoint) -> C64 {
        self.components().iter().zip(o.components()).map(|(a, b)| mul(a, b).mean()).sum()
    }

    pub fn coefficient_norm(&self) -> f64 {
        self.to_vec().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn sup_diff(&self, o: &PhasePoint) -> f64 {
        let k = self.k().max(o.k());
        let (a, b) = (self.truncate(k).to_vec(), o.truncate(k).to_vec());
        a.iter().zip(&b).map(|(x, y)| (x - y).norm()).sum::<f64>()
    }

    /// Random point with `modes` Fourier modes per component. With `analytic`,
    /// `q` and `r` only carry positive frequencies and `p`, `s` have zero mean.
    pub fn random<R: Rng>(rng: &mut R, k: usize, modes: usize, norm: f64, analytic: bool) -> Self {
        let m = modes.min(k) as i64;
        let mut comp = |positive: bool, zero_mean: bool| {
            let mut a = vec![ZERO; 2 * k + 1];
            for n in -m..=m {
                if (positive && n <= 0) || (zero_mean && n == 0) {
                    continue;
                }
                let amp = 1.0 / (1.0 + n.abs() as f64).powi(2);
                a[(n + k as i64) as usize] = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * amp;
            }
            TrigPoly::new(k, a)
        };
        let pt = PhasePoint {
            q: comp(analytic, false),
            r: comp(analytic, false),
            p: comp(false, analytic),
            s: comp(false, analytic),
        };
        let nrm = pt.coefficient_norm();
        if nrm == 0.0 {
            return pt;
        }
        pt.axpy(c(norm / nrm - 1.0, 0.0), &pt)
    }
}

pub fn functional(name: Functional, x: &PhasePoint) -> C64 {
    let PhasePoint { q, r, p, s } = x;
    match name {
        Functional::H0t => I * (mul(p, r).mean() - mul(q, s).mean()),
        Functional::H1t => {
            let q2 = mul(q, q);
            let r2 = mul(r, r);
            mul(p, s).mean() + I * mul(&q.derivative(), r).mean() - mul(&q2, &r2).mean()
        }
        Functional::H2t => mul(&q.derivative(), s).mean() - mul(&p.derivative(), r).mean(),
    }
}

pub fn functionals(x: &PhasePoint) -> [FunctionalValue; 3] {
    Functional::ALL.map(|name| FunctionalValue { name, value: functional(name, x) })
}

fn gradient_exact(name: Functional, x: &PhasePoint) -> [TrigPoly; 4] {
    let PhasePoint { q, r, p, s } = x;
    match name {
        Functional::H0t => [s.scale(-I), p.scale(I), r.scale(I), q.scale(-I)],
        Functional::H1t => {
            let r2q = mul(&mul(r, r), q);
            let q2r = mul(&mul(q, q), r);
            [
                r.derivative().scale(-I).add(&r2q.scale(c(-2.0, 0.0))),
                q.derivative().scale(I).add(&q2r.scale(c(-2.0, 0.0))),
                s.clone(),
                p.clone(),
            ]
        }
        Functional::H2t => [s.derivative().scale(-ONE), p.derivative().scale(-ONE), r.derivative(), q.derivative()],
    }
}

/// `dF` with `dF[h] = sum_j int (dF)_j h_j dt`, truncated to the modes of `x`.
pub fn gradient_functional(name: Functional, x: &PhasePoint) -> PhasePoint {
    PhasePoint::from_array(gradient_exact(name, x), x.k())
}

fn x_rhs_exact(x: &PhasePoint) -> [TrigPoly; 4] {
    let PhasePoint { q, r, p, s } = x;
    let q2r = mul(&mul(q, q), r);
    let r2q = mul(&mul(r, r), q);
    [
        p.clone(),
        s.clone(),
        q.derivative().scale(-I).add(&q2r.scale(c(2.0, 0.0))),
        r.derivative().scale(I).add(&r2q.scale(c(2.0, 0.0))),
    ]
}

/// Right-hand side of the `x`-evolution, truncated to the modes of `x`.
pub fn x_rhs(x: &PhasePoint) -> PhasePoint {
    PhasePoint::from_array(x_rhs_exact(x), x.k())
}

/// `D v = (v4, v3, -v2, -v1)`.
pub fn apply_d(v: &PhasePoint) -> PhasePoint {
    PhasePoint { q: v.s.clone(), r: v.p.clone(), p: v.r.scale(-ONE), s: v.q.scale(-ONE) }
}

/// `E_alpha v` at the point `x`; operators act right to left, `q D^{-1} r f = q D^{-1}(r f)`.
pub fn apply_e_alpha(x: &PhasePoint, v: &PhasePoint, alpha: C64) -> Result<PhasePoint> {
    let (q, r) = (&x.q, &x.r);
    let k = x.k().max(v.k());
    let one_m = (ONE - alpha) * 4.0;
    let mixed = dt_inverse(&mul(q, &v.p).add(&mul(r, &v.s)), "q v3 + r v4")?;
    let a3 = sum(&[
        mul(q, &mixed).scale(alpha * 2.0),
        v.s.scale(-I),
        mul(r, &dt_inverse(&mul(q, &v.s), "q v4")?).scale(one_m),
    ]);
    let a4 = sum(&[
        v.p.scale(I),
        mul(q, &dt_inverse(&mul(r, &v.p), "r v3")?).scale(one_m),
        mul(r, &mixed).scale(alpha * 2.0),
    ]);
    Ok(PhasePoint::from_array([dt_inverse(&v.r, "v2")?.scale(-ONE), dt_inverse(&v.q, "v1")?.scale(-ONE), a3, a4], k))
}

/// `E_alpha dH2(x)`.
pub fn e_alpha_rhs(x: &PhasePoint, alpha: C64) -> Result<PhasePoint> {
    let g = PhasePoint::from_array(gradient_exact(Functional::H2t, x), x.k());
    apply_e_alpha(x, &g, alpha)
}

/// Residuals of the differential conservation laws for `H0t`, `H1t`, `H2t`
/// (sum of absolute coefficient differences).
pub fn conservation_law_residuals(x: &PhasePoint) -> [f64; 3] {
    let PhasePoint { q, r, p, s } = x;
    let [_, _, px, sx] = x_rhs_exact(x);
    let (qx, rx) = (p, s);
    let (qt, pt) = (q.derivative(), p.derivative());
    let diff = |a: TrigPoly, b: TrigPoly| {
        let d = a.add(&b.scale(-ONE));
        d.a.iter().map(|z| z.norm()).sum::<f64>()
    };
    // i (pr - qs)_x = (qr)_t
    let l0 = sum(&[mul(&px, r), mul(p, rx), mul(qx, s).scale(-ONE), mul(q, &sx).scale(-ONE)]).scale(I);
    let r0 = mul(q, r).derivative();
    // (ps + i q_t r - q^2 r^2)_x = i (pr)_t
    let q2 = mul(q, q);
    let r2 = mul(r, r);
    let l1 = sum(&[
        mul(&px, s),
        mul(p, &sx),
        mul(&p.derivative(), r).scale(I),
        mul(&qt, rx).scale(I),
        mul(&mul(q, qx), &r2).scale(c(-2.0, 0.0)),
        mul(&q2, &mul(r, rx)).scale(c(-2.0, 0.0)),
    ]);
    let r1 = mul(p, r).derivative().scale(I);
    // (q_t s - p_t r)_x = (i q_t r - q^2 r^2)_t
    let l2 =
        sum(&[mul(&p.derivative(), s), mul(&qt, &sx), mul(&px.derivative(), r).scale(-ONE), mul(&pt, rx).scale(-ONE)]);
    let r2t = mul(&qt, r).scale(I).add(&mul(&q2, &r2).scale(-ONE)).derivative();
    [diff(l0, r0), diff(l1, r1), diff(l2, r2t)]
}

/// Plane wave `q = alpha e^{i beta x + i omega t}`, `r = sigma conj(q)`, with
/// `omega = 2 pi m` and `beta = sqrt(-omega - 2 sigma |alpha|^2)`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct PlaneWave {
    pub sigma: f64,
    pub alpha: C64,
    pub m: i64,
    pub beta: f64,
    pub omega: f64,
}

impl PlaneWave {
    pub fn new(sigma: f64, alpha: C64, m: i64) -> Result<Self> {
        if sigma != 1.0 && sigma != -1.0 {
            return Err(Error::InvalidInput(format!("sigma must be +1 or -1, got {sigma}")));
        }
        let omega = 2.0 * PI * m as f64;
        let b2 = -omega - 2.0 * sigma * alpha.norm_sqr();
        if b2 < 0.0 {
            return Err(Error::InvalidInput(format!("no real wavenumber for m = {m} (beta^2 = {b2:.3e})")));
        }
        Ok(PlaneWave { sigma, alpha, m, beta: b2.sqrt(), omega })
    }

    /// Largest frequency `m <= -1` giving a real wavenumber.
    pub fn default_mode(sigma: f64, alpha: C64) -> Result<Self> {
        let mut m = -1;
        while -2.0 * PI * (m as f64) - 2.0 * sigma * alpha.norm_sqr() < 0.0 {
            m -= 1;
        }
        PlaneWave::new(sigma, alpha, m)
    }

    pub fn at(&self, x: f64, k: usize) -> Result<PhasePoint> {
        if self.m.unsigned_abs() as usize > k {
            return Err(Error::InvalidInput(format!("mode {} exceeds K = {k}", self.m)));
        }
        let mode = |n: i64, z: C64| {
            let mut a = vec![ZERO; 2 * k + 1];
            a[(n + k as i64) as usize] = z;
            TrigPoly::new(k, a)
        };
        let qa = self.alpha * C64::from_polar(1.0, self.beta * x);
        let ra = qa.conj() * self.sigma;
        Ok(PhasePoint {
            q: mode(self.m, qa),
            r: mode(-self.m, ra),
            p: mode(self.m, qa * c(0.0, self.beta)),
            s: mode(-self.m, ra * c(0.0, -self.beta)),
        })
    }

    pub fn h0(&self) -> f64 {
        -2.0 * self.sigma * self.beta * self.alpha.norm_sqr()
    }

    pub fn h1(&self) -> f64 {
        let a2 = self.alpha.norm_sqr();
        self.sigma * self.beta * self.beta * a2 - self.sigma * self.omega * a2 - a2 * a2
    }
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub x: Vec<f64>,
    pub points: Vec<PhasePoint>,
}

/// Per-functional drift `max_x |H(x) - H(x_0)|`.
#[derive(Clone, Debug, Serialize)]
pub struct DriftReport {
    pub initial: [C64; 3],
    pub drift: [f64; 3],
}

impl Trajectory {
    pub fn drift(&self) -> DriftReport {
        let h: Vec<[C64; 3]> = self.points.iter().map(|p| functionals(p).map(|f| f.value)).collect();
        let mut drift = [0.0; 3];
        for row in &h {
            for j in 0..3 {
                drift[j] = f64::max(drift[j], (row[j] - h[0][j]).norm());
            }
        }
        DriftReport { initial: h[0], drift }
    }

    /// `x`, Re/Im of `H0t..H2t`, coefficient norm.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,re_H0t,im_H0t,re_H1t,im_H1t,re_H2t,im_H2t,coef_norm\n");
        for (x, p) in self.x.iter().zip(&self.points) {
            let _ = write!(out, "{x:.15e}");
            for f in functionals(p) {
                let _ = write!(out, ",{:.15e},{:.15e}", f.value.re, f.value.im);
            }
            let _ = writeln!(out, ",{:.15e}", p.coefficient_norm());
        }
        out
    }
}

/// Integrates the `x`-evolution in Fourier-coefficient space, sampling at `x_out`.
pub fn propagate_x(x0: &PhasePoint, x_out: &[f64], tol: f64) -> Result<Trajectory> {
    if x_out.iter().any(|x| *x < 0.0) || x_out.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidInput("x samples must be ascending and non-negative".into()));
    }
    let k = x0.k();
    let mut blown: Option<(f64, f64)> = None;
    let f = |x: f64, y: &[C64], dy: &mut [C64]| {
        let pt = PhasePoint::from_slice(k, y);
        let nrm = pt.coefficient_norm();
        if !(nrm <= BLOWUP_NORM) && blown.is_none() {
            blown = Some((x, nrm));
        }
        if blown.is_some() {
            dy.iter_mut().for_each(|z| *z = ZERO);
            return;
        }
        dy.copy_from_slice(&x_rhs(&pt).to_vec());
    };
    let ys = integrate(f, 0.0, &x0.to_vec(), x_out, &OdeOptions::with_tol(tol));
    if let Some((x, norm)) = blown {
        return Err(Error::BlowupDetected { x, norm });
    }
    let ys = ys?;
    Ok(Trajectory { x: x_out.to_vec(), points: ys.iter().map(|y| PhasePoint::from_slice(k, y)).collect() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn plane_wave_functionals_and_rhs() {
        let pw = PlaneWave::default_mode(1.0, c(0.5, 0.0)).unwrap();
        let x = pw.at(0.0, 3).unwrap();
        let h = functionals(&x);
        assert!((h[0].value - pw.h0()).norm() < 1e-13);
        assert!((h[1].value - pw.h1()).norm() < 1e-12);
        let d = pw.at(1e-6, 3).unwrap().axpy(c(-1.0, 0.0), &pw.at(-1e-6, 3).unwrap());
        let fd = PhasePoint::from_slice(3, &d.to_vec().iter().map(|z| z / 2e-6).collect::<Vec<_>>());
        assert!(x_rhs(&x).sup_diff(&fd) < 1e-7);
        assert!(functionals(&PhasePoint::zero(2)).iter().all(|f| f.value == ZERO));
    }

    #[test]
    fn hamiltonian_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let x = PhasePoint::random(&mut rng, 4, 4, 1.0, false);
        assert!(apply_d(&gradient_functional(Functional::H1t, &x)).sup_diff(&x_rhs(&x)) < 1e-12);
        let xa = PhasePoint::random(&mut rng, 4, 4, 1.0, true);
        for a in [0.0, 0.5, 1.0] {
            let e = e_alpha_rhs(&xa, c(a, 0.0)).unwrap();
            assert!(e.sup_diff(&x_rhs(&xa)) < 1e-12, "alpha {a}");
        }
        let h = PhasePoint::random(&mut rng, 4, 4, 1.0, false);
        for f in Functional::ALL {
            let g = gradient_functional(f, &x).pair(&h);
            let eps = 1e-5;
            let fd = (functional(f, &x.axpy(c(eps, 0.0), &h)) - functional(f, &x.axpy(c(-eps, 0.0), &h))) / (2.0 * eps);
            assert!((g - fd).norm() <= 1e-6 * fd.norm().max(1e-3), "{f:?}");
        }
    }

    #[test]
    fn dt_inverse_rejects_mean() {
        let f = TrigPoly::new(1, vec![ZERO, c(1.0, 0.0), ZERO]);
        assert!(matches!(dt_inverse(&f, "f"), Err(Error::NonzeroMean { .. })));
    }

    #[test]
    fn plane_wave_propagation_conserves() {
        let pw = PlaneWave::default_mode(1.0, c(0.5, 0.0)).unwrap();
        let xs: Vec<f64> = (0..=10).map(|i| 0.05 * i as f64).collect();
        let tr = propagate_x(&pw.at(0.0, 2).unwrap(), &xs, 1e-10).unwrap();
        for (x, p) in xs.iter().zip(&tr.points) {
            assert!(p.sup_diff(&pw.at(*x, 2).unwrap()) < 1e-8);
        }
        assert!(tr.drift().drift.iter().all(|d| *d < 1e-7));
        let last = tr.points.last().unwrap();
        assert!(conservation_law_residuals(last).iter().all(|r| *r < 1e-10));
    }
}
