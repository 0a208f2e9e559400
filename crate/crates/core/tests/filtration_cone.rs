use hypocalc::filtration::{check_hormander, fiber_dims, WeightedGenerators};
use hypocalc::hncone::{
    invariance_check, membership, relation_residual, sample_cone, InvarianceOptions, MembershipOptions, PairingMap,
    SampleOptions, Verdict,
};
use hypocalc::osculating::{osculating_at, DualElement};
use hypocalc::polyfield::{parse_field, parse_poly};
use hypocalc::scalar::{int, rat};
use hypocalc::Rational;
use proptest::prelude::*;

fn generators(fields: &[&str], weights: &[u32], dim: usize, depth: u32) -> WeightedGenerators {
    let f = fields.iter().map(|s| parse_field(s, dim).unwrap()).collect();
    WeightedGenerators::new(f, weights.to_vec(), depth).unwrap()
}

fn foliation() -> WeightedGenerators {
    generators(&["dx", "x*dy"], &[1, 2], 2, 3)
}

fn nonzero_rational() -> impl Strategy<Value = Rational> {
    (1i64..=9, 1i64..=5, any::<bool>()).prop_map(|(n, d, neg)| rat(if neg { -n } else { n }, d))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn foliation_fibers_off_the_axis(a in nonzero_rational(), b in nonzero_rational()) {
        let r = fiber_dims(&foliation(), &[a, b], None, 0.0).unwrap();
        prop_assert_eq!(r.dims, vec![1, 1, 0]);
        prop_assert!(r.stable);
    }

    #[test]
    fn foliation_is_heisenberg_on_the_axis(b in nonzero_rational()) {
        let o = osculating_at(&foliation(), &[int(0), b], None).unwrap();
        prop_assert_eq!(o.analysis.report(o.stable).dims, vec![1, 1, 1]);
        prop_assert!(o.algebra.is_heisenberg());
        prop_assert_eq!(o.algebra.entries(), vec![(0, 1, 2, int(1))]);
    }

    #[test]
    fn fiber_dims_agree_in_floating_point(a in nonzero_rational(), b in nonzero_rational()) {
        let p = [hypocalc::Real::to_f64(&a), hypocalc::Real::to_f64(&b)];
        prop_assert_eq!(fiber_dims(&foliation(), &p, None, 1e-10).unwrap().dims, vec![1, 1, 0]);
    }
}

#[test]
fn hormander_holds_everywhere_on_the_foliation() {
    for p in [[int(0), int(0)], [int(1), int(-3)]] {
        assert!(check_hormander(&foliation(), &p, 0.0).unwrap().holds);
    }
    let degenerate = generators(&["x*dx"], &[1], 1, 2);
    assert!(!check_hormander(&degenerate, &[int(0)], 0.0).unwrap().holds);
}

fn parabola_cone() -> (PairingMap, hypocalc::osculating::Osculating) {
    let g = generators(&["x^2*dx", "x*dx"], &[1, 2], 1, 3).with_declared_full(true);
    let o = osculating_at(&g, &[int(0)], None).unwrap();
    (PairingMap::from_osculating(&o).unwrap(), o)
}

#[test]
fn parabola_cone_relation_membership_and_invariance() {
    let (phi, o) = parabola_cone();
    assert_eq!(o.algebra.dim(), 3);
    let sample = sample_cone(&phi, &SampleOptions { seed: 3, ..Default::default() }).unwrap();
    assert!(sample.len() >= 1000);
    let rel = parse_poly("x1*x3 - x2^2", 3).unwrap();
    assert!(relation_residual(&sample, &rel) < 1e-8);

    for seed in 0..3 {
        let opts = MembershipOptions { seed, ..Default::default() };
        let inside = membership(&phi, &DualElement::new(vec![1.0, 1.0, 1.0]), &opts).unwrap();
        assert_eq!(inside.verdict, Verdict::In);
        assert!(inside.residual < 1e-6);
        let outside = membership(&phi, &DualElement::new(vec![1.0, 0.0, 1.0]), &opts).unwrap();
        assert_eq!(outside.verdict, Verdict::Out);
        assert!(outside.heuristic);
    }

    let report = invariance_check(&phi, &sample, &o.algebra, &InvarianceOptions { points: 4, ..Default::default() }).unwrap();
    assert!(report.holds, "{:?}", report.counterexamples);
}

#[test]
fn cubic_fiber_cone_relation() {
    let g = generators(&["dx", "x^2*dy", "x*dy"], &[1, 2, 3], 2, 4);
    let o = osculating_at(&g, &[int(0), int(0)], None).unwrap();
    let phi = PairingMap::from_osculating(&o).unwrap();
    let sample = sample_cone(&phi, &SampleOptions::default()).unwrap();
    assert!(sample.len() >= 1000);
    let rel = parse_poly("x2*x4 - x3^2", phi.len()).unwrap();
    assert!(relation_residual(&sample, &rel) < 1e-8);
}
