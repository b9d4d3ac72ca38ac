//! Fundamental solution `M(t, lambda, psi)` of `DM = (R + V) M`, `M(0) = I`,
//! its lambda-derivatives and the inhomogeneous problem.

use crate::error::{Error, Result};
use crate::linalg::{c, Mat2, C64, I, ZERO};
use crate::ode::{integrate, OdeOptions};
use crate::potential::{Potential, PotentialField};
use crate::singleexp;

pub const DEFAULT_TOL: f64 = 1e-10;
pub const PICARD_GRID: usize = 512;
pub const PICARD_MAX_GRID: usize = 1 << 17;
/// Beyond this modulus the series is abandoned for direct integration.
pub const AUTO_SWITCH: f64 = 6.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Auto,
    Picard,
    Ode,
    ClosedForm,
}

#[derive(Clone, Copy, Debug)]
pub struct SolveOptions {
    pub method: Method,
    pub tol: f64,
    pub picard_grid: usize,
    pub picard_max_grid: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            method: Method::Auto,
            tol: DEFAULT_TOL,
            picard_grid: PICARD_GRID,
            picard_max_grid: PICARD_MAX_GRID,
        }
    }
}

impl SolveOptions {
    pub fn new(method: Method, tol: f64) -> Self {
        SolveOptions { method, tol, ..Default::default() }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Solution {
    pub m: Mat2,
    pub method: Method,
    /// Estimated error relative to `max(1, |M|)`.
    pub err_est: f64,
}

/// `M`, `dM/dlambda` and `d^2M/dlambda^2` at one time.
#[derive(Clone, Copy, Debug)]
pub struct Jet {
    pub m: Mat2,
    pub dm: Mat2,
    pub ddm: Mat2,
}

/// `R + V` at one instant.
#[inline]
pub fn coefficient(psi: [C64; 4], lambda: C64) -> Mat2 {
    let l2 = lambda * lambda;
    let p12 = psi[0] * psi[1];
    Mat2::new(
        c(0.0, -2.0) * l2 - I * p12,
        lambda * psi[0] * 2.0 + I * psi[2],
        lambda * psi[1] * 2.0 - I * psi[3],
        c(0.0, 2.0) * l2 + I * p12,
    )
}

/// `V = V0 + lambda V1`.
#[inline]
pub fn potential_matrix(psi: [C64; 4], lambda: C64) -> Mat2 {
    let p12 = psi[0] * psi[1];
    Mat2::new(-I * p12, lambda * psi[0] * 2.0 + I * psi[2], lambda * psi[1] * 2.0 - I * psi[3], I * p12)
}

/// `dV/dlambda`-part of `d(R+V)/dlambda`, i.e. `2 [[-2 lambda i, psi1], [psi2, 2 lambda i]]`.
#[inline]
pub fn lambda_coefficient(psi: [C64; 4], lambda: C64) -> Mat2 {
    Mat2::new(c(0.0, -4.0) * lambda, psi[0] * 2.0, psi[1] * 2.0, c(0.0, 4.0) * lambda)
}

/// Free solution `E_lambda(t) = diag(e^{-2 i lambda^2 t}, e^{2 i lambda^2 t})`.
pub fn free_solution(lambda: C64, t: f64) -> Mat2 {
    let th = c(0.0, -2.0) * lambda * lambda * t;
    Mat2::diag(th.exp(), (-th).exp())
}

/// Natural size of `M(t, lambda)`: `e^{2 |Im lambda^2| t}`.
pub fn growth_scale(lambda: C64, t: f64) -> f64 {
    (2.0 * (lambda * lambda).im.abs() * t).exp()
}

pub fn fundamental_solution(psi: &Potential, lambda: C64, t: f64, opts: &SolveOptions) -> Result<Solution> {
    check_lambda(lambda)?;
    let method = match opts.method {
        Method::Auto if lambda.norm() > AUTO_SWITCH => Method::Ode,
        Method::Auto => Method::Picard,
        m => m,
    };
    match method {
        Method::ClosedForm => {
            let p = psi
                .single_exp_params()
                .ok_or_else(|| Error::InvalidInput("closed form requires a single-exponential potential".into()))?;
            Ok(Solution { m: singleexp::fundamental_matrix(&p, lambda, t), method, err_est: 0.0 })
        }
        Method::Picard => {
            let (m, err_est) = picard(psi, lambda, t, opts.tol, opts.picard_grid, opts.picard_max_grid)?;
            Ok(Solution { m, method, err_est })
        }
        _ => {
            let m = ode_solution(psi, lambda, t, opts.tol)?;
            Ok(Solution { m, method: Method::Ode, err_est: opts.tol })
        }
    }
}

pub fn monodromy(psi: &Potential, lambda: C64, opts: &SolveOptions) -> Result<Mat2> {
    Ok(fundamental_solution(psi, lambda, 1.0, opts)?.m)
}

fn check_lambda(lambda: C64) -> Result<()> {
    if lambda.re.is_finite() && lambda.im.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("lambda = {lambda} is not finite")))
    }
}

fn ode_opts(tol: f64) -> OdeOptions {
    OdeOptions { rtol: tol * 1e-2, atol: tol * 1e-4, ..Default::default() }
}

fn mat(y: &[C64]) -> Mat2 {
    Mat2([y[0], y[1], y[2], y[3]])
}

fn put(dst: &mut [C64], m: Mat2) {
    dst[..4].copy_from_slice(&m.0);
}

fn jet_rhs<P: PotentialField + ?Sized>(psi: &P, lambda: C64, order: usize) -> impl FnMut(f64, &[C64], &mut [C64]) + '_ {
    move |t, y, dy| {
        let p = psi.eval(t);
        let a = coefficient(p, lambda);
        let m = mat(y);
        put(dy, a * m);
        if order >= 1 {
            let n = lambda_coefficient(p, lambda);
            let dm = mat(&y[4..]);
            put(&mut dy[4..], a * dm + n * m);
            if order >= 2 {
                let ddm = mat(&y[8..]);
                let nd = Mat2::diag(c(0.0, -4.0), c(0.0, 4.0));
                put(&mut dy[8..], a * ddm + (n * dm) * 2.0 + nd * m);
            }
        }
    }
}

/// `M(t)` by adaptive integration.
pub fn ode_solution<P: PotentialField + ?Sized>(psi: &P, lambda: C64, t: f64, tol: f64) -> Result<Mat2> {
    Ok(trajectory(psi, lambda, &[t], tol)?[0])
}

/// `M` sampled at the ascending times `ts`.
pub fn trajectory<P: PotentialField + ?Sized>(psi: &P, lambda: C64, ts: &[f64], tol: f64) -> Result<Vec<Mat2>> {
    Ok(trajectory_jet(psi, lambda, ts, 0, tol)?.into_iter().map(|j| j.m).collect())
}

/// `M` and its first `order <= 2` lambda-derivatives at the times `ts`, from
/// the variational equations `D M' = (R+V) M' + N M` and
/// `D M'' = (R+V) M'' + 2 N M' + N' M`.
pub fn trajectory_jet<P: PotentialField + ?Sized>(
    psi: &P,
    lambda: C64,
    ts: &[f64],
    order: usize,
    tol: f64,
) -> Result<Vec<Jet>> {
    check_lambda(lambda)?;
    let dim = 4 * (order + 1);
    let mut y0 = vec![ZERO; dim];
    y0[0] = c(1.0, 0.0);
    y0[3] = c(1.0, 0.0);
    let out = integrate(jet_rhs(psi, lambda, order), 0.0, &y0, ts, &ode_opts(tol))?;
    Ok(out
        .into_iter()
        .map(|y| Jet {
            m: mat(&y),
            dm: if order >= 1 { mat(&y[4..]) } else { Mat2::zero() },
            ddm: if order >= 2 { mat(&y[8..]) } else { Mat2::zero() },
        })
        .collect())
}

pub fn lambda_jet<P: PotentialField + ?Sized>(psi: &P, lambda: C64, t: f64, order: usize, tol: f64) -> Result<Jet> {
    Ok(trajectory_jet(psi, lambda, &[t], order, tol)?[0])
}

/// `(M(t), dM/dlambda(t))`.
pub fn lambda_derivative<P: PotentialField + ?Sized>(psi: &P, lambda: C64, t: f64, tol: f64) -> Result<(Mat2, Mat2)> {
    let j = lambda_jet(psi, lambda, t, 1, tol)?;
    Ok((j.m, j.dm))
}

/// `dM/dlambda(t) = M(t) int_0^t M^{-1} N M ds` evaluated by composite
/// Simpson on `n` intervals of a stored trajectory.
pub fn lambda_derivative_quadrature<P: PotentialField + ?Sized>(
    psi: &P,
    lambda: C64,
    t: f64,
    n: usize,
    tol: f64,
) -> Result<Mat2> {
    let n = n + n % 2;
    let ts: Vec<f64> = (0..=n).map(|j| t * j as f64 / n as f64).collect();
    let ms = trajectory(psi, lambda, &ts, tol)?;
    let w = crate::linalg::simpson_weights(n, t / n as f64);
    let mut acc = Mat2::zero();
    for j in 0..=n {
        let m = ms[j];
        let nn = lambda_coefficient(psi.eval(ts[j]), lambda);
        acc += (m.wronskian_inverse() * nn * m) * w[j];
    }
    Ok(ms[n] * acc)
}

/// Solves `f' = (R+V) f + g`, `f(0) = v0` through `f = M (v0 + int_0^t M^{-1} g)`.
pub fn solve_inhomogeneous<P, G>(
    psi: &P,
    lambda: C64,
    g: G,
    v0: [C64; 2],
    ts: &[f64],
    tol: f64,
) -> Result<Vec<[C64; 2]>>
where
    P: PotentialField + ?Sized,
    G: Fn(f64) -> [C64; 2],
{
    check_lambda(lambda)?;
    let mut y0 = vec![ZERO; 6];
    y0[0] = c(1.0, 0.0);
    y0[3] = c(1.0, 0.0);
    let rhs = |t: f64, y: &[C64], dy: &mut [C64]| {
        let a = coefficient(psi.eval(t), lambda);
        let m = mat(y);
        put(dy, a * m);
        let w = m.wronskian_inverse() * g(t);
        dy[4] = w[0];
        dy[5] = w[1];
    };
    let out = integrate(rhs, 0.0, &y0, ts, &ode_opts(tol))?;
    Ok(out.into_iter().map(|y| mat(&y) * [v0[0] + y[4], v0[1] + y[5]]).collect())
}

/// Picard series `M = sum_n M_n`, `M_{n+1}(t) = int_0^t E(t-s) V(s) M_n(s) ds`, on a
/// uniform grid that is doubled until two successive grids agree. Returns the
/// Richardson-combined value and its estimated scaled error.
pub fn picard<P: PotentialField + ?Sized>(
    psi: &P,
    lambda: C64,
    t: f64,
    tol: f64,
    n0: usize,
    n_max: usize,
) -> Result<(Mat2, f64)> {
    let mut n = n0.max(4);
    n += n % 2;
    let mut prev = picard_on_grid(psi, lambda, t, n, tol * 1e-2)?;
    let mut last = f64::INFINITY;
    while 2 * n <= n_max {
        n *= 2;
        let cur = picard_on_grid(psi, lambda, t, n, tol * 1e-2)?;
        let scale = cur.norm().max(1.0);
        let diff = (cur - prev).norm() / scale;
        let rich = (cur * 16.0 - prev) * (1.0 / 15.0);
        if diff <= 10.0 * tol {
            return Ok((rich, diff / 15.0));
        }
        last = diff;
        prev = cur;
    }
    Err(Error::NonConvergence { what: "picard series grid refinement", residual: last })
}

/// One pass of the series on `n` (even) intervals.
pub fn picard_on_grid<P: PotentialField + ?Sized>(psi: &P, lambda: C64, t: f64, n: usize, tol: f64) -> Result<Mat2> {
    assert!(n >= 2 && n % 2 == 0);
    let h = t / n as f64;
    let l2 = lambda * lambda;
    let cc = [c(0.0, -2.0) * l2, c(0.0, 2.0) * l2];
    let eh = cc.map(|x| (x * h).exp());
    let e2h = cc.map(|x| (x * 2.0 * h).exp());
    let emh = cc.map(|x| (-x * h).exp());
    let decay = 2.0 * l2.im.abs();
    let vs: Vec<Mat2> = (0..=n).map(|j| potential_matrix(psi.eval(j as f64 * h), lambda)).collect();
    let vn: Vec<f64> = vs.iter().map(|v| v.norm()).collect();
    let big_l = h * (vn.iter().sum::<f64>() - 0.5 * (vn[0] + vn[n])) + h * vn.iter().cloned().fold(0.0, f64::max);
    let s_scale = (decay * t).exp();
    let damp: Vec<f64> = (0..=n).map(|j| (-decay * j as f64 * h).exp()).collect();
    let mut cur: Vec<Mat2> = (0..=n).map(|j| free_solution(lambda, j as f64 * h)).collect();
    let mut next = vec![Mat2::zero(); n + 1];
    let mut y = vec![Mat2::zero(); n + 1];
    let mut sum = cur[n];
    let mut a_priori = 1.0f64;
    for term in 1..=5000usize {
        for j in 0..=n {
            y[j] = vs[j] * cur[j];
        }
        next[0] = Mat2::zero();
        for e in 0..4 {
            let a = e / 2;
            let mut prev = ZERO;
            let mut j = 0;
            while j < n {
                let (y0, y1, y2) = (y[j].0[e], y[j + 1].0[e], y[j + 2].0[e]);
                next[j + 1].0[e] = eh[a] * prev + (eh[a] * y0 * 5.0 + y1 * 8.0 - emh[a] * y2) * (h / 12.0);
                prev = e2h[a] * prev + (e2h[a] * y0 + eh[a] * y1 * 4.0 + y2) * (h / 3.0);
                next[j + 2].0[e] = prev;
                j += 2;
            }
        }
        std::mem::swap(&mut cur, &mut next);
        sum += cur[n];
        if !sum.is_finite() {
            return Err(Error::NonConvergence { what: "picard series (overflow)", residual: f64::INFINITY });
        }
        let sup = (0..=n).map(|j| cur[j].max_abs() * damp[j]).fold(0.0, f64::max) * 2.0;
        a_priori *= big_l / term as f64;
        let tail_post = s_scale * sup * big_l.exp_m1();
        let tail_prior = if (term + 1) as f64 > big_l {
            s_scale * a_priori * big_l / ((term + 1) as f64 - big_l)
        } else {
            f64::INFINITY
        };
        if tail_post.min(tail_prior) <= tol * sum.norm().max(1.0) {
            return Ok(sum);
        }
    }
    Err(Error::NonConvergence { what: "picard series (terms)", residual: f64::NAN })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::PotentialType;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rel(a: Mat2, b: Mat2) -> f64 {
        (a - b).norm() / b.norm().max(1.0)
    }

    #[test]
    fn zero_potential_gives_free_solution() {
        let z = Potential::zero(4);
        for lam in [c(0.7, 0.2), c(-1.5, 0.9), c(2.0, -2.0)] {
            let e = free_solution(lam, 1.0);
            for m in [Method::Picard, Method::Ode] {
                let s = fundamental_solution(&z, lam, 1.0, &SolveOptions::new(m, 1e-10)).unwrap();
                assert!(rel(s.m, e) < 1e-10, "{m:?} {lam}");
            }
        }
    }

    #[test]
    fn picard_matches_ode_on_random_potential() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let p = Potential::random(&mut rng, 8, 6, 1.5, PotentialType::General);
        for lam in [c(0.3, 0.1), c(1.7, -0.6), c(-2.5, 1.4)] {
            let a = fundamental_solution(&p, lam, 1.0, &SolveOptions::new(Method::Picard, 1e-10)).unwrap();
            let b = fundamental_solution(&p, lam, 1.0, &SolveOptions::new(Method::Ode, 1e-11)).unwrap();
            assert!(rel(a.m, b.m) < 1e-8, "{lam}: {}", rel(a.m, b.m));
            assert!((b.m.det() - 1.0).norm() < 1e-9 * b.m.norm().powi(2).max(1.0));
        }
    }

    #[test]
    fn derivative_matches_quadrature_formula_and_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let p = Potential::random(&mut rng, 6, 4, 1.0, PotentialType::General);
        let lam = c(0.8, 0.3);
        let jet = lambda_jet(&p, lam, 1.0, 2, 1e-12).unwrap();
        let q = lambda_derivative_quadrature(&p, lam, 1.0, 2000, 1e-12).unwrap();
        assert!(rel(q, jet.dm) < 1e-8);
        let h = 1e-4;
        let fd = (ode_solution(&p, lam + h, 1.0, 1e-13).unwrap() - ode_solution(&p, lam - h, 1.0, 1e-13).unwrap())
            * (0.5 / h);
        assert!(rel(fd, jet.dm) < 1e-7);
        let fd2 = (lambda_jet(&p, lam + h, 1.0, 1, 1e-13).unwrap().dm
            - lambda_jet(&p, lam - h, 1.0, 1, 1e-13).unwrap().dm)
            * (0.5 / h);
        assert!(rel(fd2, jet.ddm) < 1e-7);
    }

    #[test]
    fn inhomogeneous_matches_direct_integration() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let p = Potential::random(&mut rng, 4, 3, 1.0, PotentialType::General);
        let lam = c(1.1, -0.4);
        let g = |t: f64| [c(t.cos(), 0.5), c(0.0, t * t)];
        let v0 = [c(0.3, 0.1), c(-1.0, 0.2)];
        let ts = [0.25, 0.5, 1.0];
        let f = solve_inhomogeneous(&p, lam, g, v0, &ts, 1e-12).unwrap();
        let direct = integrate(
            |t, y, dy| {
                let a = coefficient(p.eval(t), lam);
                let r = a * [y[0], y[1]];
                let gg = g(t);
                dy[0] = r[0] + gg[0];
                dy[1] = r[1] + gg[1];
            },
            0.0,
            &v0,
            &ts,
            &OdeOptions::default(),
        )
        .unwrap();
        for (a, b) in f.iter().zip(&direct) {
            assert!((a[0] - b[0]).norm() + (a[1] - b[1]).norm() < 1e-9);
        }
    }
}
