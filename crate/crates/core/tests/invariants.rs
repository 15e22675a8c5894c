//! Property tests for the geometric and algebraic invariants.

use std::f64::consts::{PI, TAU};

use cobound::characteristics::{region_of, s1, s2, Characteristic};
use cobound::cochain::{alternate, coboundary_at, min_gap};
use cobound::moebius::{angular_distance, cross_ratio_angles, flow_a, flow_n, wrap, GroupElement};
use cobound::output::{a_invariant, in_fundamental_domain, n_invariant, s3_orbit};
use cobound::zoo::{crossratio_cochain, cup_orientation, orientation, ProfileId};
use num_complex::Complex64;
use proptest::prelude::*;

fn angle() -> impl Strategy<Value = f64> {
    0.0..TAU
}

fn element() -> impl Strategy<Value = GroupElement> {
    (-1.5..1.5f64, -1.5..1.5f64, angle()).prop_map(|(r, i, phase)| {
        let b = Complex64::new(r, i);
        let a = Complex64::from_polar((1.0 + b.norm_sqr()).sqrt(), phase);
        GroupElement::new(a, b).unwrap()
    })
}

fn tuple(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(angle(), n).prop_filter("distinct points", |x| min_gap(x) > 1e-3)
}

/// Points of the open square off the diagonal, kept away from the singular lines.
fn domain_point() -> impl Strategy<Value = (f64, f64)> {
    (0.05..TAU - 0.05, 0.05..TAU - 0.05).prop_filter("off the diagonal", |(a, b)| (a - b).abs() > 0.05)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn inverse_composes_to_identity(g in element(), theta in angle()) {
        let back = g.inverse().act(g.act(theta));
        prop_assert!(angular_distance(back, theta) < 1e-9);
        prop_assert!(g.compose(&g.inverse()).approx_eq(&GroupElement::identity(), 1e-9));
    }

    #[test]
    fn action_preserves_cyclic_order(g in element(), x in tuple(3)) {
        let y = g.act_tuple(&x);
        prop_assert_eq!(orientation(x[0], x[1], x[2]), orientation(y[0], y[1], y[2]));
    }

    #[test]
    fn cross_ratio_is_invariant(g in element(), x in tuple(4)) {
        let y = g.act_tuple(&x);
        let (a, b) = (cross_ratio_angles(x[0], x[1], x[2], x[3]), cross_ratio_angles(y[0], y[1], y[2], y[3]));
        prop_assert!((a - b).abs() <= 1e-7 * (1.0 + a.abs()), "{} vs {}", a, b);
    }

    #[test]
    fn one_parameter_flows_are_additive(u in -3.0..3.0f64, v in -3.0..3.0f64, theta in angle()) {
        prop_assert!(angular_distance(flow_a(u + v, theta), flow_a(u, flow_a(v, theta))) < 1e-10);
        prop_assert!(angular_distance(flow_n(u + v, theta), flow_n(u, flow_n(v, theta))) < 1e-10);
    }

    #[test]
    fn cup_cocycle_identity_holds_to_roundoff(x in tuple(6)) {
        // six terms of +-1/3
        prop_assert!(coboundary_at(&cup_orientation(), &x).abs() < 1e-15);
    }

    #[test]
    fn cup_is_invariant(g in element(), x in tuple(5)) {
        let y = g.act_tuple(&x);
        prop_assume!(min_gap(&y) > 1e-9);
        prop_assert_eq!(cup_orientation().eval(&x), cup_orientation().eval(&y));
    }

    #[test]
    fn alternation_flips_sign_under_transposition(x in tuple(4), i in 0usize..4, j in 0usize..4) {
        prop_assume!(i != j);
        let q = alternate(&crossratio_cochain(ProfileId::Cos2, 1.0));
        let mut y = x.clone();
        y.swap(i, j);
        prop_assert!((q.eval(&x) + q.eval(&y)).abs() < 1e-12);
    }

    #[test]
    fn characteristic_coordinates_round_trip((p1, p2) in domain_point()) {
        let ch = Characteristic::of(p1, p2).unwrap();
        let (q1, q2) = ch.point();
        prop_assert!(angular_distance(q1, p1) < 1e-8 && angular_distance(q2, p2) < 1e-8,
            "({}, {}) -> ({}, {})", p1, p2, q1, q2);
    }

    #[test]
    fn orbit_invariants_are_conserved((p1, p2) in domain_point(), u in -2.0..2.0f64) {
        let (a1, a2) = (flow_a(u, p1), flow_a(u, p2));
        let (n1, n2) = (flow_n(u, p1), flow_n(u, p2));
        prop_assume!(region_of(a1, a2).is_ok() && region_of(n1, n2).is_ok());
        prop_assert!((a_invariant(a1, a2) - a_invariant(p1, p2)).abs() < 1e-8);
        prop_assert!((n_invariant(n1, n2) - n_invariant(p1, p2)).abs() < 1e-8 * (1.0 + n_invariant(p1, p2).abs()));
    }

    #[test]
    fn s3_generators_satisfy_the_relations((p1, p2) in domain_point()) {
        let p = (p1, p2);
        let close = |a: (f64, f64), b: (f64, f64)| angular_distance(a.0, b.0) < 1e-12 && angular_distance(a.1, b.1) < 1e-12;
        prop_assert!(close(s1(s1(p)), p));
        prop_assert!(close(s2(s2(p)), p));
        let r = |q| s1(s2(q));
        prop_assert!(close(r(r(r(p))), p));
        prop_assert!(!close(r(p), p));
    }

    #[test]
    fn generic_orbits_meet_the_fundamental_domain((p1, p2) in domain_point()) {
        let orbit = s3_orbit((p1, p2));
        let generic = orbit.iter().all(|&(a, b)| {
            let (a, b) = (wrap(a), wrap(b));
            (b - 2.0 * a).abs() > 1e-9 && (b - PI - 0.5 * a).abs() > 1e-9 && (a - b).abs() > 1e-9
        });
        prop_assume!(generic);
        prop_assert_eq!(orbit.iter().filter(|&&q| in_fundamental_domain(q)).count(), 1);
    }
}
