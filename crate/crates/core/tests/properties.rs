use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use zs_tspec::fundsol::{growth_scale, ode_solution};
use zs_tspec::gradients::{central_difference, grad_discriminant, uniform_s_grid};
use zs_tspec::hamiltonian::{apply_d, gradient_functional, Functional, PhasePoint};
use zs_tspec::potential::{SingleExpParams, CLASSIFY_TOL};
use zs_tspec::spectra::{characteristic, discriminant, Kind};
use zs_tspec::{c, singleexp, Mat2, Potential, PotentialField, PotentialType, C64};

const TOL: f64 = 1e-11;

fn potential(seed: u64, kind: PotentialType, norm: f64) -> Potential {
    Potential::random(&mut ChaCha8Rng::seed_from_u64(seed), 3, 3, norm, kind)
}

fn kind_strategy() -> impl Strategy<Value = PotentialType> {
    prop_oneof![Just(PotentialType::RealType), Just(PotentialType::ImaginaryType), Just(PotentialType::General)]
}

fn lambda() -> impl Strategy<Value = C64> {
    (-2.0..2.0f64, -1.2..1.2f64).prop_map(|(x, y)| c(x, y))
}

fn sigma1(m: &Mat2) -> Mat2 {
    Mat2::new(m.0[3], m.0[2], m.0[1], m.0[0])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn star_is_an_involution(seed in any::<u64>(), kind in kind_strategy()) {
        let psi = potential(seed, kind, 1.0);
        let back = psi.star().star();
        for j in 0..4 {
            for n in -3..=3 {
                prop_assert_eq!(back.coeff(j, n), psi.coeff(j, n));
            }
        }
    }

    #[test]
    fn generated_type_is_recovered(seed in any::<u64>(), kind in kind_strategy()) {
        let psi = potential(seed, kind, 1.0);
        let akns = psi.to_akns();
        let real = (0..32).all(|k| {
            let t = k as f64 / 32.0;
            [&akns.q0, &akns.p0, &akns.q1, &akns.p1].iter().all(|f| f.eval(t).im.abs() < 1e-12)
        });
        prop_assert_eq!(real, psi.classify(CLASSIFY_TOL) == PotentialType::RealType);
        if kind != PotentialType::General {
            prop_assert_eq!(psi.classify(CLASSIFY_TOL), kind);
        }
    }

    #[test]
    fn evaluation_has_period_one(seed in any::<u64>(), t in 0.0..1.0f64) {
        let psi = potential(seed, PotentialType::General, 1.0);
        let (a, b) = (psi.eval(t), psi.eval(t + 1.0));
        for j in 0..4 {
            prop_assert!((a[j] - b[j]).norm() < 1e-12);
        }
    }

    #[test]
    fn wronskian_is_one(seed in any::<u64>(), l in lambda(), t in 0.1..1.0f64) {
        let psi = potential(seed, PotentialType::General, 2.0);
        let m = ode_solution(&psi, l, t, TOL).unwrap();
        let g = growth_scale(l, t);
        prop_assert!((m.det() - 1.0).norm() / (g * g) < 1e-9);
    }

    #[test]
    fn cocycle_under_shift(seed in any::<u64>(), l in lambda(), s in 0.1..0.9f64) {
        let psi = potential(seed, PotentialType::General, 1.0);
        let full = ode_solution(&psi, l, 1.0, TOL).unwrap();
        let head = ode_solution(&psi, l, s, TOL).unwrap();
        let tail = ode_solution(&psi.shifted(s), l, 1.0 - s, TOL).unwrap();
        prop_assert!((tail * head - full).max_abs() / growth_scale(l, 1.0) < 1e-9);
    }

    #[test]
    fn conjugation_symmetry_of_real_type(seed in any::<u64>(), l in lambda()) {
        let psi = potential(seed, PotentialType::RealType, 1.0);
        let a = ode_solution(&psi, l.conj(), 1.0, TOL).unwrap();
        let b = sigma1(&ode_solution(&psi, l, 1.0, TOL).unwrap().conj());
        prop_assert!((a - b).max_abs() / growth_scale(l, 1.0) < 1e-9);
    }

    #[test]
    fn discriminant_commutes_with_conjugation(seed in any::<u64>(), real in any::<bool>(), l in lambda()) {
        let kind = if real { PotentialType::RealType } else { PotentialType::ImaginaryType };
        let psi = potential(seed, kind, 1.0);
        let d1 = discriminant(&psi, l.conj(), TOL).unwrap();
        let d2 = discriminant(&psi, l, TOL).unwrap().conj();
        prop_assert!((d1 - d2).norm() / growth_scale(l, 1.0) < 1e-9);
    }

    #[test]
    fn periodic_characteristic_is_delta_squared_minus_four(seed in any::<u64>(), l in lambda()) {
        let psi = potential(seed, PotentialType::General, 1.0);
        let d = discriminant(&psi, l, TOL).unwrap();
        let chi = characteristic(Kind::Periodic, &psi, l, TOL).unwrap();
        prop_assert!((chi - (d * d - 4.0)).norm() / growth_scale(l, 1.0).powi(2) < 1e-9);
    }

    #[test]
    fn single_exponential_closed_form_matches_ode(
        sigma in prop_oneof![Just(1.0), Just(-1.0)],
        m in -2i32..=2,
        (ar, ai, cr, ci) in (-0.6..0.6f64, -0.6..0.6f64, -0.6..0.6f64, -0.6..0.6f64),
        l in lambda(),
        t in 0.1..1.0f64,
    ) {
        let p = SingleExpParams::new(sigma, 2.0 * std::f64::consts::PI * m as f64, c(ar, ai), c(cr, ci));
        let psi = Potential::single_exp(p, 4).unwrap();
        let num = ode_solution(&psi, l, t, TOL).unwrap();
        prop_assert!((singleexp::fundamental_matrix(&p, l, t) - num).max_abs() / growth_scale(l, t) < 1e-8);
    }

    #[test]
    fn bracket_is_skew(seed in any::<u64>(), f in 0usize..3, g in 0usize..3) {
        let x = PhasePoint::random(&mut ChaCha8Rng::seed_from_u64(seed), 5, 5, 1.0, false);
        let (df, dg) = (gradient_functional(Functional::ALL[f], &x), gradient_functional(Functional::ALL[g], &x));
        prop_assert!((df.pair(&apply_d(&dg)) + dg.pair(&apply_d(&df))).norm() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn discriminant_gradient_matches_differences(seed in any::<u64>(), l in lambda()) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let psi = Potential::random(&mut r, 2, 2, 1.0, PotentialType::General);
        let h = Potential::random(&mut r, 2, 2, 1.0, PotentialType::General);
        let fd = central_difference(&psi, &h, 1e-5, |p| discriminant(p, l, 1e-13)).unwrap();
        let an = grad_discriminant(&psi, l, &uniform_s_grid(256), 1e-13).unwrap().pair(&h).unwrap();
        prop_assert!((an - fd).norm() <= 1e-5 * fd.norm().max(1e-3), "analytic {} vs fd {}", an, fd);
    }
}
