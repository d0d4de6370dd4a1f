//! Property tests over seeded random algebras, elements and maps.

use std::sync::Arc;

use proptest::prelude::*;

use nclp_core::algebra::{embed_matrix_block, minimal_central_projections, AlgebraSpec, Element};
use nclp_core::lp::{amplified_norm, check_optr_cb, lp_norm, AmplifiedElement, Exponent};
use nclp_core::map::LinearMap;
use nclp_core::random::{self, SeededRng};
use nclp_core::separating::{self, Orientation};
use nclp_core::suite;
use nclp_core::valued::{self, EstimateOptions, S1Options};

fn p(v: f64) -> Exponent {
    Exponent::new(v).unwrap()
}

fn small_spec(rng: &mut SeededRng) -> Arc<AlgebraSpec> {
    Arc::new(random::spec(rng, 3, 3, 2, 14))
}

fn exponent() -> impl Strategy<Value = f64> {
    prop_oneof![Just(1.0), Just(1.5), Just(2.0), Just(3.0), 1.0f64..4.0]
}

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(config(48))]

    #[test]
    fn trace_is_positive_and_faithful(seed in any::<u64>()) {
        let mut rng = random::rng(seed);
        let s = small_spec(&mut rng);
        let x = random::element(&mut rng, &s);
        let t = (&x.adjoint() * &x).trace();
        prop_assert!(t.re > 0.0 && t.im.abs() <= 1e-9 * t.re);
        let z = Element::zero(&s);
        prop_assert_eq!((&z.adjoint() * &z).trace().re, 0.0);
    }

    #[test]
    fn central_projections_partition_unity(seed in any::<u64>()) {
        let mut rng = random::rng(seed);
        let s = small_spec(&mut rng);
        let list = minimal_central_projections(&s);
        prop_assert!(list.is_valid());
        prop_assert!(list.sum().unwrap().approx_eq(&Element::identity(&s), 1e-12));
        for (i, a) in list.projections.iter().enumerate() {
            for b in &list.projections[i + 1..] {
                prop_assert!((a * b).max_abs() == 0.0);
            }
        }
    }

    #[test]
    fn op_iso_reverses_products(seed in any::<u64>()) {
        let mut rng = random::rng(seed);
        let s = small_spec(&mut rng);
        let x = random::element(&mut rng, &s);
        let y = random::element(&mut rng, &s);
        prop_assert!((&x * &y).op_iso().approx_eq(&(&y.op_iso() * &x.op_iso()), 1e-9));
        prop_assert_eq!(x.op_iso().op_iso(), x);
    }

    #[test]
    fn corner_embedding_is_isometric(seed in any::<u64>(), pv in exponent()) {
        let mut rng = random::rng(seed);
        let s = small_spec(&mut rng);
        let degree = s.subhomogeneous_degree();
        if degree >= 2 {
            let g = embed_matrix_block(&s, degree - 1, p(pv)).unwrap();
            let a = random::element(&mut rng, g.source());
            let (na, nga) = (lp_norm(&a, p(pv)), lp_norm(&g.apply(&a), p(pv)));
            prop_assert!((na - nga).abs() <= 1e-9 * na);
        }
        prop_assert!(embed_matrix_block(&s, degree, p(pv)).is_err());
    }

    #[test]
    fn schatten_norm_symmetries(seed in any::<u64>(), pv in exponent()) {
        let mut rng = random::rng(seed);
        let s = small_spec(&mut rng);
        let e = p(pv);
        let x = random::element(&mut rng, &s);
        let n = lp_norm(&x, e);
        prop_assert!((lp_norm(&x.adjoint(), e) - n).abs() <= 1e-9 * n);
        let u = random::unitary(&mut rng, &s);
        let v = random::unitary(&mut rng, &s);
        prop_assert!((lp_norm(&(&(&u * &x) * &v), e) - n).abs() <= 1e-9 * n);
    }

    #[test]
    fn holder_inequality(seed in any::<u64>(), pv in exponent()) {
        let mut rng = random::rng(seed);
        let s = small_spec(&mut rng);
        let x = random::element(&mut rng, &s);
        let y = random::element(&mut rng, &s);
        let lhs = lp_norm(&(&x * &y), p(pv));
        let rhs = lp_norm(&x, p(2.0 * pv)) * lp_norm(&y, p(2.0 * pv));
        prop_assert!(lhs <= rhs * (1.0 + 1e-9));
    }

    #[test]
    fn inner_and_outer_transposition_agree(seed in any::<u64>(), pv in exponent(), m in 1usize..4) {
        let mut rng = random::rng(seed);
        let s = Arc::new(random::spec(&mut rng, 2, 3, 2, 10));
        let x = random::amplified(&mut rng, &s, m);
        prop_assert!(check_optr_cb(&x, p(pv)).holds);
    }

    #[test]
    fn transposition_is_isometric_at_two(seed in any::<u64>(), m in 1usize..4) {
        let mut rng = random::rng(seed);
        let s = Arc::new(random::spec(&mut rng, 2, 3, 2, 10));
        let x = random::amplified(&mut rng, &s, m);
        let a = amplified_norm(&x, p(2.0));
        prop_assert!((amplified_norm(&x.transpose_outer(), p(2.0)) - a).abs() <= 1e-12 * a);
    }
}

proptest! {
    #![proptest_config(config(24))]

    #[test]
    fn s1_bracket_is_ordered(seed in any::<u64>(), pv in exponent(), m in 1usize..4) {
        let mut rng = random::rng(seed);
        let s = Arc::new(random::spec(&mut rng, 2, 2, 2, 8));
        let x = random::amplified(&mut rng, &s, m);
        let b = valued::s1_bracket(&x, p(pv), &S1Options::default(), None);
        prop_assert!(0.0 <= b.lower && b.lower <= b.upper);
        let f = b.factorization.unwrap();
        prop_assert!(f.residual(&x) <= 1e-8 * (1.0 + x.max_abs()));
    }

    #[test]
    fn s1_upper_is_a_norm(seed in any::<u64>(), pv in exponent(), m in 1usize..3) {
        let mut rng = random::rng(seed);
        let s = Arc::new(random::spec(&mut rng, 2, 2, 2, 8));
        let e = p(pv);
        let x = random::amplified(&mut rng, &s, m);
        let y = random::amplified(&mut rng, &s, m);
        let up = |z: &AmplifiedElement| valued::s1_norm_upper(z, e, 1, 2000).0;
        let (nx, ny) = (up(&x), up(&y));
        let sum = x.add(&y).unwrap();
        prop_assert!(up(&sum) <= (nx + ny) * (1.0 + 1e-6));
        let scaled = x.scale_re(-2.5);
        prop_assert!((up(&scaled) - 2.5 * nx).abs() <= 1e-6 * 2.5 * nx);
    }

    #[test]
    fn s1_trace_norm_oracle_at_one(seed in any::<u64>(), m in 1usize..4) {
        let mut rng = random::rng(seed);
        let s = Arc::new(random::spec(&mut rng, 2, 2, 2, 4));
        let x = random::amplified(&mut rng, &s, m);
        let exact = lp_norm(&x.assemble(), p(1.0));
        let (up, _) = valued::s1_norm_upper(&x, p(1.0), 1, 2000);
        prop_assert!((up - exact).abs() <= 1e-5 * exact);
    }

    #[test]
    fn opposite_realization_matches_outer_transpose_at_one(seed in any::<u64>(), m in 1usize..4) {
        let mut rng = random::rng(seed);
        let s = Arc::new(random::spec(&mut rng, 2, 2, 2, 4));
        let x = random::amplified(&mut rng, &s, m);
        let e = p(1.0);
        let over_op = valued::s1_norm_upper(&x.transpose_inner(), e, 1, 2000).0;
        let swapped = valued::s1_norm_upper(&x.transpose_outer(), e, 1, 2000).0;
        prop_assert!((over_op - swapped).abs() <= 1e-5 * swapped);
    }

    #[test]
    fn cb_estimates_grow_with_m(seed in any::<u64>(), pv in exponent()) {
        let mut rng = random::rng(seed);
        let s = Arc::new(random::spec(&mut rng, 2, 2, 1, 5));
        let t = LinearMap::from_fn(s.clone(), s.clone(), p(pv), |x| {
            Element::from_fn(&s, |i, _| if i % 2 == 0 { x.slot(i).transpose() } else { x.slot(i).clone() })
        }).unwrap();
        let mut last = 0.0;
        for m_max in 1..=3 {
            let est = valued::cb_norm_estimate(&t, p(pv), &EstimateOptions { m_max, restarts: 1, seed, max_iter: 100 });
            prop_assert!(est.lower >= last * (1.0 - 1e-12));
            if let Some(u) = est.upper {
                prop_assert!(est.lower <= u * (1.0 + 1e-9));
            }
            last = est.lower;
        }
    }
}

proptest! {
    #![proptest_config(config(24))]

    #[test]
    fn extraction_is_unique_and_round_trips(seed in any::<u64>(), pv in exponent(), anti in any::<bool>(), pad in 0usize..2) {
        let mut rng = random::rng(seed);
        let s = Arc::new(random::spec(&mut rng, 3, 3, 2, 12));
        let o = if anti { Orientation::AntiDirect } else { Orientation::Direct };
        let y = separating::sample_triple(&mut rng, &s, o, pad);
        let t = separating::build_yeadon_map(&y.w, &y.b, &y.j, p(pv)).unwrap();
        let a = separating::extract_yeadon(&t).unwrap();
        let b = separating::extract_yeadon(&t).unwrap();
        prop_assert!(separating::triple_distance(&a, &b) <= 1e-9);
        prop_assert!(separating::triple_distance(&y, &a) <= 1e-8);
        let split = separating::jordan_split(&a.j).unwrap();
        prop_assert!((&(&split.e + &split.f) - &a.j.image_of_identity()).max_abs() <= 1e-8);
        prop_assert!((&split.e * &split.f).max_abs() <= 1e-8);
        prop_assert!(split.pi.checked_add(&split.sigma).unwrap().approx_eq(&a.j, 1e-8));
    }

    #[test]
    fn bijective_maps_split_along_kernels(seed in any::<u64>(), pv in exponent(), deg in 2usize..4) {
        let mut rng = random::rng(seed);
        let direct = Arc::new(random::spec(&mut rng, 2, 3, 2, 10));
        let anti = Arc::new(AlgebraSpec::full_matrix(deg).unwrap());
        let (t, planted) = separating::sample_bijective(&mut rng, &direct, Some(&anti), p(pv));
        let d = separating::decompose_bijective(&t).unwrap();
        prop_assert_eq!(&d.alpha_slots, &planted);
        prop_assert!((&d.alpha * &d.beta).max_abs() == 0.0);
        prop_assert!((&d.alpha + &d.beta).approx_eq(&Element::identity(t.source()), 0.0));
        let y = &d.triple;
        let one = Element::identity(t.target());
        prop_assert!((&(&y.w.adjoint() * &y.w) - &one).max_abs() <= 1e-8);
        prop_assert!((&y.j.image_of_identity() - &one).max_abs() <= 1e-8);
        // ker(x ↦ T(βx)) is exactly L^p(M_1) and ker(x ↦ T(αx)) is L^p(M_2)
        let t1 = t.compose(&LinearMap::identity(t.source(), p(pv)).left_multiply(&d.alpha).unwrap()).unwrap();
        let t2 = t.compose(&LinearMap::identity(t.source(), p(pv)).left_multiply(&d.beta).unwrap()).unwrap();
        let dim1 = d.m1.as_ref().map_or(0, |s| s.dim());
        let dim2 = d.m2.as_ref().map_or(0, |s| s.dim());
        prop_assert_eq!(t2.kernel().len(), dim1);
        prop_assert_eq!(t1.kernel().len(), dim2);
        for k in t2.kernel() {
            prop_assert!((&d.beta * &k).max_abs() <= 1e-8);
        }
    }
}

#[test]
fn suites_are_deterministic() {
    let a = suite::suite_subhomogeneous_bounds(2, 3.0, 6, 11).unwrap();
    let b = suite::suite_subhomogeneous_bounds(2, 3.0, 6, 11).unwrap();
    assert_eq!(a, b);
    let o = suite::MapSuiteOptions { trials: 1, seed: 3, m_max: 2, restarts: 1 };
    assert_eq!(suite::suite_direct_maps(1.5, &o).unwrap(), suite::suite_direct_maps(1.5, &o).unwrap());
}
