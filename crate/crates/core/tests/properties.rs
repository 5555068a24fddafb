use biham_core::cohomology::{classify_cocycle, coboundary_1, cocycle_residual_2, TwoCochain};
use biham_core::functionals::{poisson_bracket, PoissonStructure, RegularFunctional};
use biham_core::hierarchy::{gradients, hamiltonians};
use biham_core::lie_ops::{bracket, coadjoint, lie_poisson_apply};
use biham_core::{CocycleOperator, GridFunction, InertiaOperator};
use proptest::prelude::*;

const N: usize = 64;

/// Band-limited function: mean plus modes 1..6.
fn trig() -> impl Strategy<Value = GridFunction> {
    (-1.0..1.0f64, prop::collection::vec(-1.0..1.0f64, 12)).prop_map(|(c, ab)| {
        GridFunction::from_fn(N, |x| {
            c + (1..=6)
                .map(|k| ab[2 * k - 2] * (k as f64 * x).cos() + ab[2 * k - 1] * (k as f64 * x).sin())
                .sum::<f64>()
        })
    })
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

fn config() -> ProptestConfig {
    ProptestConfig::with_cases(24)
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn spectrum_round_trip(f in trig()) {
        prop_assert!((&f.spectrum().to_grid() - &f).max_abs() <= 1e-13);
    }

    #[test]
    fn derivative_has_zero_integral(f in trig()) {
        prop_assert!(f.derivative().integral().abs() <= 1e-12);
    }

    #[test]
    fn derivative_is_skew(f in trig(), g in trig()) {
        let lhs = f.derivative().l2_inner(&g).unwrap();
        let rhs = -f.l2_inner(&g.derivative()).unwrap();
        prop_assert!(close(lhs, rhs, 1e-12));
    }

    #[test]
    fn multiply_is_commutative_and_bilinear(f in trig(), g in trig(), h in trig(), s in -3.0..3.0f64) {
        let fg = f.multiply(&g).unwrap();
        prop_assert!((&fg - &g.multiply(&f).unwrap()).max_abs() <= 1e-13);
        let lhs = f.axpy(s, &h).unwrap().multiply(&g).unwrap();
        let rhs = fg.axpy(s, &h.multiply(&g).unwrap()).unwrap();
        prop_assert!((&lhs - &rhs).max_abs() <= 1e-12 * (1.0 + rhs.max_abs()));
    }

    #[test]
    fn bracket_is_antisymmetric(u in trig(), v in trig()) {
        let sum = &bracket(&u, &v).unwrap() + &bracket(&v, &u).unwrap();
        prop_assert!(sum.max_abs() <= 1e-12);
    }

    #[test]
    fn bracket_satisfies_jacobi(u in trig(), v in trig(), w in trig()) {
        let a = bracket(&u, &bracket(&v, &w).unwrap()).unwrap();
        let b = bracket(&v, &bracket(&w, &u).unwrap()).unwrap();
        let c = bracket(&w, &bracket(&u, &v).unwrap()).unwrap();
        let scale = a.max_abs().max(b.max_abs()).max(c.max_abs()).max(1.0);
        prop_assert!((&(&a + &b) + &c).max_abs() <= 1e-12 * scale);
    }

    #[test]
    fn coadjoint_pairs_with_bracket(u in trig(), v in trig(), m in trig()) {
        // ⟨ad*_u m, v⟩ = −⟨m, [u, v]⟩
        let lhs = coadjoint(&u, &m).unwrap().l2_inner(&v).unwrap();
        let rhs = -m.l2_inner(&bracket(&u, &v).unwrap()).unwrap();
        prop_assert!(close(lhs, rhs, 1e-11));
    }

    #[test]
    fn lie_poisson_is_skew(m in trig(), f in trig(), g in trig()) {
        let lhs = lie_poisson_apply(&m, &f).unwrap().l2_inner(&g).unwrap();
        let rhs = -f.l2_inner(&lie_poisson_apply(&m, &g).unwrap()).unwrap();
        prop_assert!(close(lhs, rhs, 1e-11));
    }

    #[test]
    fn inertia_is_symmetric_and_invertible(u in trig(), v in trig(), a in 0.5..3.0f64, b in -2.0..-0.1f64) {
        let op = InertiaOperator::ab(a, b);
        let lhs = op.apply(&u).l2_inner(&v).unwrap();
        let rhs = u.l2_inner(&op.apply(&v)).unwrap();
        prop_assert!(close(lhs, rhs, 1e-11));
        let back = op.invert(&op.apply(&u)).unwrap();
        prop_assert!((&back - &u).max_abs() <= 1e-12);
    }

    #[test]
    fn cocycle_operator_identity(u in trig(), v in trig(), m0 in -2.0..2.0f64, beta in -2.0..2.0f64) {
        // Q[u, v] = ad*_u Qv − ad*_v Qu
        let q = CocycleOperator::constant(m0, beta);
        let lhs = q.apply(&bracket(&u, &v).unwrap()).unwrap();
        let rhs = &coadjoint(&u, &q.apply(&v).unwrap()).unwrap() - &coadjoint(&v, &q.apply(&u).unwrap()).unwrap();
        prop_assert!((&lhs - &rhs).l2_norm() <= 1e-10 * (1.0 + lhs.l2_norm()));
    }

    #[test]
    fn poisson_bracket_is_antisymmetric(m in trig(), u in trig(), beta in -2.0..2.0f64) {
        let f = RegularFunctional::linear(u);
        let g = RegularFunctional::energy(InertiaOperator::camassa_holm());
        for s in [PoissonStructure::LiePoisson, PoissonStructure::Cocycle(CocycleOperator::constant(1.0, beta))] {
            let fg = poisson_bracket(&f, &g, &s, &m).unwrap();
            let gf = poisson_bracket(&g, &f, &s, &m).unwrap();
            prop_assert!(close(fg, -gf, 1e-11));
        }
    }

    #[test]
    fn coboundary_is_closed(m in trig()) {
        if let Some(gamma) = coboundary_1(&m) {
            prop_assert!(cocycle_residual_2(&gamma, 3).unwrap() <= 1e-9);
        }
    }

    #[test]
    fn lambda_ignores_coboundaries(lambda in -3.0..3.0f64, m in trig(), extra in trig()) {
        let base = TwoCochain::virasoro(N).scale(lambda).unwrap();
        let with = |g: &GridFunction| match coboundary_1(g) {
            Some(c) => base.add(&c).unwrap(),
            None => base.clone(),
        };
        let first = classify_cocycle(&with(&m)).unwrap().lambda;
        let second = classify_cocycle(&with(&(&m + &extra))).unwrap().lambda;
        prop_assert!((first - lambda).abs() <= 1e-8);
        prop_assert!((second - first).abs() <= 1e-8);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn ladder_levels_have_zero_mean_images(m in trig()) {
        let a = InertiaOperator::camassa_holm();
        for g in gradients(&a, &m, 4).unwrap() {
            let x = lie_poisson_apply(&m, &g).unwrap();
            prop_assert!(x.integral().abs() <= 1e-9 * (1.0 + x.max_abs()));
        }
    }

    #[test]
    fn burgers_hamiltonians_scale_homogeneously(m in trig(), lambda in 0.2..2.0f64) {
        let a = InertiaOperator::identity();
        let base = hamiltonians(&a, &m, 4).unwrap();
        let scaled = hamiltonians(&a, &m.scale(lambda), 4).unwrap();
        for (k, (h, hs)) in base.iter().zip(&scaled).enumerate() {
            let expected = lambda.powi(k as i32 + 1) * h;
            prop_assert!(close(*hs, expected, 1e-8));
        }
    }
}
