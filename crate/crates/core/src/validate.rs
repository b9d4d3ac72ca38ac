//! Numerical invariant suites with a pass/fail report.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::asymptotics::{approximant, decay_slope, uniform_grid, zeta1};
use crate::error::{Error, Result};
use crate::figure::{eigen_pair, figure_potential, trace_with_gamma};
use crate::fundsol::{fundamental_solution, growth_scale, ode_solution, Method, SolveOptions};
use crate::gradients::{central_difference, gamma_by_blocks, gamma_of, grad_discriminant, uniform_s_grid};
use crate::hamiltonian::{
    apply_d, conservation_law_residuals, e_alpha_rhs, functional, gradient_functional, propagate_x, x_rhs, Functional,
    PhasePoint, PlaneWave,
};
use crate::linalg::{c, Mat2, C64};
use crate::output::Num;
use crate::potential::{Potential, PotentialType, CLASSIFY_TOL};
use crate::singleexp::{self, FIGURES};
use crate::spectra::{self, discriminant, locate_spectrum, zero_potential_eigenvalue, Kind};

pub const SUITES: [&str; 11] = [
    "potential",
    "wronskian",
    "methods",
    "symmetry",
    "cocycle",
    "singleexp",
    "spectra",
    "asymptotics",
    "zeroset",
    "gradients",
    "hamiltonian",
];

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub suite: &'static str,
    pub name: String,
    pub value: Num,
    pub threshold: Num,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
    pub passed: bool,
}

fn check(suite: &'static str, name: impl Into<String>, value: f64, threshold: f64) -> Check {
    Check { suite, name: name.into(), value: Num(value), threshold: Num(threshold), passed: value <= threshold }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn lambda_grid(n: usize, r: f64) -> Vec<C64> {
    let h = 2.0 * r / (n - 1) as f64;
    (0..n).flat_map(|i| (0..n).map(move |j| c(-r + i as f64 * h, -r + j as f64 * h))).collect()
}

fn max_of(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0, f64::max)
}

fn suite_potential() -> Result<Vec<Check>> {
    let mut r = rng(1);
    let mut inv = 0.0f64;
    let mut period = 0.0f64;
    let mut class = 0.0f64;
    for _ in 0..100 {
        let psi = Potential::random(&mut r, 4, 4, 1.0, PotentialType::General);
        let back = psi.star().star();
        for j in 0..4 {
            for n in -4..=4 {
                inv = inv.max((back.coeff(j, n) - psi.coeff(j, n)).norm());
            }
        }
        let t = 0.3137;
        use crate::potential::PotentialField;
        let (a, b) = (psi.eval(t), psi.eval(t + 1.0));
        period = period.max((0..4).map(|j| (a[j] - b[j]).norm()).fold(0.0, f64::max));
    }
    for kind in [PotentialType::RealType, PotentialType::ImaginaryType, PotentialType::General] {
        for _ in 0..10 {
            let psi = Potential::random(&mut r, 3, 3, 1.0, kind);
            let akns = psi.to_akns();
            let real = (0..64).all(|k| {
                let t = k as f64 / 64.0;
                [&akns.q0, &akns.p0, &akns.q1, &akns.p1].iter().all(|f| f.eval(t).im.abs() < 1e-12)
            });
            let is_real = psi.classify(CLASSIFY_TOL) == PotentialType::RealType;
            if real != is_real {
                class += 1.0;
            }
        }
    }
    Ok(vec![
        check("potential", "star involution", inv, 0.0),
        check("potential", "periodicity of evaluation", period, 1e-12),
        check("potential", "real type iff real AKNS coefficients (mismatches)", class, 0.0),
    ])
}

fn suite_wronskian_methods(methods: bool) -> Result<Vec<Check>> {
    let tol = 1e-10;
    let mut r = rng(2);
    let psis: Vec<Potential> = (0..4).map(|_| Potential::random(&mut r, 4, 4, 2.0, PotentialType::General)).collect();
    let grid = lambda_grid(5, 3.0);
    let rows: Result<Vec<(f64, f64)>> = psis
        .par_iter()
        .flat_map(|psi| grid.par_iter().map(move |l| (psi, *l)))
        .map(|(psi, l)| {
            let s = growth_scale(l, 1.0);
            let ode = fundamental_solution(psi, l, 1.0, &SolveOptions::new(Method::Ode, tol))?.m;
            let det = (ode.det() - 1.0).norm() / (s * s);
            let agree = if methods {
                let pic = fundamental_solution(psi, l, 1.0, &SolveOptions::new(Method::Picard, tol))?.m;
                (pic - ode).max_abs() / s
            } else {
                0.0
            };
            Ok((det, agree))
        })
        .collect();
    let rows = rows?;
    if methods {
        Ok(vec![check(
            "methods",
            "Picard vs ODE (scaled, max over grid)",
            max_of(rows.iter().map(|r| r.1)),
            10.0 * tol,
        )])
    } else {
        let zero = Potential::zero(1);
        let z = max_of(grid.iter().map(|l| {
            (ode_solution(&zero, *l, 1.0, tol).map(|m| m.det()).unwrap_or(c(f64::NAN, 0.0)) - 1.0).norm()
                / growth_scale(*l, 1.0).powi(2)
        }));
        Ok(vec![
            check("wronskian", "det M = 1 (scaled, random potentials)", max_of(rows.iter().map(|r| r.0)), 10.0 * tol),
            check("wronskian", "det M = 1 (zero potential)", z, 10.0 * tol),
        ])
    }
}

fn sigma1(m: &Mat2) -> Mat2 {
    Mat2::new(m.0[3], m.0[2], m.0[1], m.0[0])
}

fn suite_symmetry() -> Result<Vec<Check>> {
    let tol = 1e-11;
    let mut r = rng(3);
    let mut out = Vec::new();
    for (kind, name) in [(PotentialType::RealType, "real type"), (PotentialType::ImaginaryType, "imaginary type")] {
        let psi = Potential::random(&mut r, 3, 3, 1.0, kind);
        let mut worst = 0.0f64;
        let mut dconj = 0.0f64;
        for l in lambda_grid(4, 1.5) {
            let a = ode_solution(&psi, l.conj(), 0.7, tol)?;
            let b = ode_solution(&psi, l, 0.7, tol)?.conj();
            let want = if kind == PotentialType::RealType {
                sigma1(&b)
            } else {
                // sigma1 sigma3 X sigma3 sigma1
                let s = sigma1(&b);
                Mat2::new(s.0[0], -s.0[1], -s.0[2], s.0[3])
            };
            worst = worst.max((a - want).max_abs() / growth_scale(l, 0.7));
            let d1 = discriminant(&psi, l.conj(), tol)?;
            let d2 = discriminant(&psi, l, tol)?.conj();
            dconj = dconj.max((d1 - d2).norm() / growth_scale(l, 1.0));
        }
        out.push(check("symmetry", format!("M(conj lambda) symmetry, {name}"), worst, 10.0 * tol));
        out.push(check("symmetry", format!("Delta(conj lambda) = conj Delta, {name}"), dconj, 10.0 * tol));
    }
    Ok(out)
}

fn suite_cocycle() -> Result<Vec<Check>> {
    let tol = 1e-11;
    let mut r = rng(4);
    let psi = Potential::random(&mut r, 4, 4, 1.0, PotentialType::General);
    let mut worst = 0.0f64;
    for l in [c(0.7, 0.3), c(-1.2, 0.5), c(0.2, -1.1)] {
        let full = ode_solution(&psi, l, 1.0, tol)?;
        for s in [0.25, 0.5] {
            let head = ode_solution(&psi, l, s, tol)?;
            let tail = ode_solution(&psi.shifted(s), l, 1.0 - s, tol)?;
            worst = worst.max((tail * head - full).max_abs() / growth_scale(l, 1.0));
        }
    }
    let mut cont = Vec::new();
    let l = c(0.9, 0.4);
    let base = ode_solution(&psi, l, 1.0, tol)?;
    let h = Potential::random(&mut r, 4, 4, 1.0, PotentialType::General);
    for eps in [1e-1, 1e-2, 1e-3] {
        cont.push((ode_solution(&psi.axpy(c(eps, 0.0), &h), l, 1.0, tol)? - base).max_abs());
    }
    let decreasing = cont.windows(2).all(|w| w[1] < w[0]);
    Ok(vec![
        check("cocycle", "M(1) = M(1-s; shifted) M(s)", worst, 10.0 * tol),
        check(
            "cocycle",
            "continuity in the potential (last difference)",
            if decreasing { cont[2] } else { f64::INFINITY },
            1e-2,
        ),
    ])
}

fn suite_singleexp() -> Result<Vec<Check>> {
    let tol = 1e-10;
    let mut out = Vec::new();
    for id in FIGURES {
        let (p, psi) = figure_potential(id)?;
        let grid = lambda_grid(5, 3.0);
        let mut worst = 0.0f64;
        let mut trace = 0.0f64;
        for l in &grid {
            for t in [0.25, 0.5, 1.0] {
                let cf = singleexp::fundamental_matrix(&p, *l, t);
                let num = ode_solution(&psi, *l, t, tol)?;
                worst = worst.max((cf - num).max_abs() / growth_scale(*l, t));
            }
            let om = singleexp::omega(&p, *l);
            let d = singleexp::fundamental_matrix(&p, *l, 1.0).trace();
            trace = trace.max((d + om.cos() * 2.0).norm() / growth_scale(*l, 1.0));
        }
        out.push(check("singleexp", format!("closed form vs ODE, figure {id}"), worst, 1e-8));
        out.push(check("singleexp", format!("trace = -2 cos Omega, figure {id}"), trace, 1e-8));
        let real = max_of((0..40).map(|k| singleexp::discriminant(&p, c(-3.0 + 0.15 * k as f64, 0.0)).im.abs()));
        out.push(check("singleexp", format!("Delta real on the real axis, figure {id}"), real, 1e-8));
    }
    Ok(out)
}

fn suite_spectra() -> Result<Vec<Check>> {
    let tol = 1e-12;
    let zero = Potential::zero(1);
    let mut out = Vec::new();
    for kind in Kind::ALL {
        let s = locate_spectrum(kind, &zero, 4, tol)?;
        let err = max_of(s.eigenvalues.iter().map(|e| {
            if e.label.i == 0 {
                e.value.norm()
            } else {
                (e.value - zero_potential_eigenvalue(e.label.i, e.label.n)).norm()
            }
        }));
        out.push(check("spectra", format!("zero potential, {}", kind.as_str()), err, 1e-10));
    }
    let mut r = rng(5);
    let psi = Potential::random(&mut r, 3, 3, 0.5, PotentialType::RealType);
    let mut chi = 0.0f64;
    let mut conj = 0.0f64;
    for _ in 0..20 {
        use rand::Rng;
        let l = c(r.gen_range(-2.0..2.0), r.gen_range(-2.0..2.0));
        let d = discriminant(&psi, l, tol)?;
        let cp = spectra::characteristic(Kind::Periodic, &psi, l, tol)?;
        let g = growth_scale(l, 1.0).powi(2);
        chi = chi.max((cp - (d * d - 4.0)).norm() / g);
        conj = conj.max((discriminant(&psi, l.conj(), tol)? - d.conj()).norm() / g.sqrt());
    }
    out.push(check("spectra", "chi_P = Delta^2 - 4", chi, 1e-9));
    out.push(check("spectra", "Delta(conj lambda) = conj Delta", conj, 1e-9));
    let crit = locate_spectrum(Kind::Critical, &psi, 3, tol)?;
    let imag = max_of(crit.eigenvalues.iter().filter(|e| e.label.i == 1 && e.label.n != 0).map(|e| e.value.im.abs()));
    out.push(check("spectra", "critical points (i = 1, n != 0) real for small real-type potential", imag, 1e-8));
    let per = locate_spectrum(Kind::Periodic, &psi, 3, tol)?;
    let expected = crate::spectra::discs::expected_in_b(Kind::Periodic, per.n);
    let in_ball = per.eigenvalues.iter().filter(|e| e.value.norm() < crate::spectra::b_radius(per.n)).count();
    out.push(check("spectra", "periodic count in B_N (mismatch)", (in_ball as f64 - expected as f64).abs(), 0.0));
    let mut disc = 0.0f64;
    for kind in [Kind::Dirichlet, Kind::Neumann] {
        for e in locate_spectrum(kind, &psi, 3, tol)?.eigenvalues {
            disc = disc.max(spectra::verify_disc_identity(&psi, e.value, tol)? / growth_scale(e.value, 1.0).powi(2));
        }
    }
    out.push(check("spectra", "Delta^2 - 4 = delta^2 at Dirichlet/Neumann eigenvalues", disc, 1e-8));
    Ok(out)
}

fn suite_asymptotics() -> Result<Vec<Check>> {
    let mut r = rng(6);
    let psi = Potential::random(&mut r, 3, 3, 1.0, PotentialType::General);
    let ns = [8u32, 16, 32, 64];
    let slope = decay_slope(&psi, zeta1, &ns, &uniform_grid(9), 1e-11)?;
    let zero = Potential::zero(1);
    let exact = max_of(
        [c(1.3, 0.2), c(-2.0, 0.7)]
            .iter()
            .map(|l| (approximant(&zero, *l, 0.6).unwrap() - crate::fundsol::free_solution(*l, 0.6)).max_abs()),
    );
    Ok(vec![
        check("asymptotics", "decay slope along zeta^1 (<= -0.4)", slope, -0.4),
        check("asymptotics", "approximant exact at zero potential", exact, 1e-14),
    ])
}

fn suite_zeroset() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for id in ["3b", "3d"] {
        let (_, psi) = figure_potential(id)?;
        let per = locate_spectrum(Kind::Periodic, &psi, 3, 1e-12)?;
        let traced = trace_with_gamma(&psi, &per, -1, 1e-7)?;
        let g = traced.gamma_star.ok_or_else(|| Error::InvalidInput(format!("no gamma* for figure {id}")))?;
        let pair = eigen_pair(&per, -1).unwrap();
        let ends = (g.lower - pair.0)
            .norm()
            .min((g.lower - pair.1).norm())
            .max((g.upper - pair.0).norm().min((g.upper - pair.1).norm()));
        out.push(check("zeroset", format!("gamma* endpoints, figure {id}"), ends, 1e-6));
        out.push(check("zeroset", format!("|Im Delta| on arc, figure {id}"), traced.arc.max_im_delta, 1e-8));
        let outside = max_of(g.delta.iter().map(|d| (d.abs() - 2.0).max(0.0)));
        out.push(check("zeroset", format!("Delta in [-2, 2] on gamma*, figure {id}"), outside, 1e-9));
        let crit = locate_spectrum(Kind::Critical, &psi, 3, 1e-12)?;
        let dot = crit.eigenvalues.iter().find(|e| e.label.i == 1 && e.label.n == -1).map(|e| e.value);
        let d = dot.map(|v| (v - traced.arc.crossing).norm()).unwrap_or(f64::INFINITY);
        out.push(check("zeroset", format!("crossing = critical point, figure {id}"), d, 1e-7));
    }
    Ok(out)
}

fn suite_gradients() -> Result<Vec<Check>> {
    let mut r = rng(7);
    let grid = uniform_s_grid(256);
    let mut fd_worst = 0.0f64;
    let mut gamma_worst = 0.0f64;
    for k in 0..4 {
        use rand::Rng;
        let psi = Potential::random(&mut r, 3, 3, 1.0, PotentialType::General);
        let h = Potential::random(&mut r, 3, 3, 1.0, PotentialType::General);
        let l = c(r.gen_range(-1.5..1.5), r.gen_range(-1.0..1.0));
        let g = grad_discriminant(&psi, l, &grid, 1e-13)?;
        let an = g.pair(&h)?;
        let fd = central_difference(&psi, &h, 1e-5, |p| discriminant(p, l, 1e-13))?;
        fd_worst = fd_worst.max((an - fd).norm() / fd.norm().max(1e-8));
        let m = ode_solution(&psi, l, 0.3 + 0.1 * k as f64, 1e-12)?;
        gamma_worst = gamma_worst.max((gamma_of(&m) - gamma_by_blocks(&m)).norm());
    }
    let zero = grad_discriminant(&Potential::zero(1), c(1.1, 0.4), &grid, 1e-12)?.sup();
    Ok(vec![
        check("gradients", "d Delta vs central differences (relative)", fd_worst, 1e-5),
        check("gradients", "gamma = det M^d - det M^od", gamma_worst, 1e-12),
        check("gradients", "d Delta vanishes at zero potential", zero, 1e-10),
    ])
}

fn suite_hamiltonian() -> Result<Vec<Check>> {
    let mut r = rng(8);
    let mut ham = 0.0f64;
    let mut ealpha = 0.0f64;
    let mut skew = 0.0f64;
    for _ in 0..10 {
        let x = PhasePoint::random(&mut r, 6, 6, 1.0, false);
        ham = ham.max(apply_d(&gradient_functional(Functional::H1t, &x)).sup_diff(&x_rhs(&x)));
        let xa = PhasePoint::random(&mut r, 6, 6, 1.0, true);
        for a in [0.0, 0.5, 1.0] {
            ealpha = ealpha.max(e_alpha_rhs(&xa, c(a, 0.0))?.sup_diff(&x_rhs(&xa)));
        }
        for f in Functional::ALL {
            for g in Functional::ALL {
                let (df, dg) = (gradient_functional(f, &x), gradient_functional(g, &x));
                skew = skew.max((df.pair(&apply_d(&dg)) + dg.pair(&apply_d(&df))).norm());
            }
        }
    }
    let pw = PlaneWave::default_mode(1.0, c(0.5, 0.0))?;
    let xs: Vec<f64> = (0..=20).map(|i| 0.025 * i as f64).collect();
    let tol = 1e-10;
    let tr = propagate_x(&pw.at(0.0, 4)?, &xs, tol)?;
    let pw_drift = max_of(tr.drift().drift);
    let pw_exact = max_of(xs.iter().zip(&tr.points).map(|(x, p)| p.sup_diff(&pw.at(*x, 4).unwrap())));
    let pert = pw.at(0.0, 4)?.axpy(c(1.0, 0.0), &PhasePoint::random(&mut r, 4, 4, 1e-3, false));
    let tr2 = propagate_x(&pert, &xs, tol)?;
    let rel = |d: [f64; 3], h: [C64; 3]| max_of((0..3).map(|j| d[j] / h[j].norm().max(1.0)));
    let drift2 = tr2.drift();
    let laws = max_of(tr2.points.iter().flat_map(|p| conservation_law_residuals(p).into_iter().take(2)));
    let h_pw = [functional(Functional::H0t, &pw.at(0.0, 4)?), functional(Functional::H1t, &pw.at(0.0, 4)?)];
    let closed = (h_pw[0] - pw.h0()).norm().max((h_pw[1] - pw.h1()).norm());
    Ok(vec![
        check("hamiltonian", "D dH1 = x_rhs", ham, 1e-10),
        check("hamiltonian", "E_alpha dH2 = x_rhs, alpha in {0, 1/2, 1}", ealpha, 1e-8),
        check("hamiltonian", "skew-symmetry of the D bracket", skew, 1e-12),
        check("hamiltonian", "plane-wave functionals (closed form)", closed, 1e-12),
        check("hamiltonian", "plane-wave trajectory vs exact", pw_exact, 1e-7),
        check("hamiltonian", "plane-wave drift of H0t..H2t", pw_drift, 100.0 * tol),
        check("hamiltonian", "perturbed plane-wave drift (relative)", rel(drift2.drift, drift2.initial), 100.0 * tol),
        check("hamiltonian", "differential conservation laws H0t, H1t", laws, 1e-6),
    ])
}

pub fn run_suite(name: &str) -> Result<Vec<Check>> {
    match name {
        "potential" => suite_potential(),
        "wronskian" => suite_wronskian_methods(false),
        "methods" => suite_wronskian_methods(true),
        "symmetry" => suite_symmetry(),
        "cocycle" => suite_cocycle(),
        "singleexp" => suite_singleexp(),
        "spectra" => suite_spectra(),
        "asymptotics" => suite_asymptotics(),
        "zeroset" => suite_zeroset(),
        "gradients" => suite_gradients(),
        "hamiltonian" => suite_hamiltonian(),
        _ => Err(Error::InvalidInput(format!("unknown suite '{name}' (expected one of {})", SUITES.join(", ")))),
    }
}

/// Runs the named suites (all when `names` is empty). A suite that errors is
/// reported as one failed check.
pub fn validate(names: &[String]) -> Result<ValidationReport> {
    let list: Vec<String> =
        if names.is_empty() { SUITES.iter().map(|s| s.to_string()).collect() } else { names.to_vec() };
    let mut checks = Vec::new();
    for name in &list {
        let suite = SUITES.iter().find(|s| **s == name.as_str()).copied();
        let Some(suite) = suite else {
            return Err(Error::InvalidInput(format!("unknown suite '{name}' (expected one of {})", SUITES.join(", "))));
        };
        match run_suite(suite) {
            Ok(c) => checks.extend(c),
            Err(e) => checks.push(Check {
                suite,
                name: format!("error: {e}"),
                value: Num(f64::NAN),
                threshold: Num(0.0),
                passed: false,
            }),
        }
    }
    let passed = checks.iter().all(|c| c.passed);
    Ok(ValidationReport { checks, passed })
}

impl ValidationReport {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            s.push_str(&format!(
                "{} [{}] {}: {} (threshold {})\n",
                if c.passed { "PASS" } else { "FAIL" },
                c.suite,
                c.name,
                crate::output::fmt_f64(c.value.0),
                crate::output::fmt_f64(c.threshold.0)
            ));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quick_suites_pass() {
        let r = validate(&["potential".into(), "cocycle".into(), "gradients".into(), "hamiltonian".into()]).unwrap();
        assert!(r.passed, "{}", r.to_text());
    }

    #[test]
    fn unknown_suite_is_rejected() {
        assert!(validate(&["nope".into()]).is_err());
    }
}
