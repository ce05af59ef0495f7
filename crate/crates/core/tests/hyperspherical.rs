//! Hyperspherical chart: conversions, the chart Jacobian and agreement of
//! the chart frame with the ambient frame.

use std::f64::consts::PI;

use multiflag::hyperspherical::{
    frame_agreement, hs_a, hs_forward, hs_frame, hs_inverse, sphere_jacobian, sphere_jacobian_inverse, sphere_point,
    HsPoint,
};
use multiflag::verify::hyperspherical;
use multiflag::{ArmConfig, Error};
use proptest::prelude::*;

fn angles(m: usize) -> impl Strategy<Value = Vec<f64>> {
    (prop::collection::vec(0.05f64..(PI - 0.05), m - 1), 0.0f64..(2.0 * PI)).prop_map(|(mut v, last)| {
        v.push(last);
        v
    })
}

fn point(m: usize, k: usize) -> impl Strategy<Value = HsPoint<f64>> {
    (prop::collection::vec(-1.0f64..1.0, m + 1), prop::collection::vec(angles(m), k))
        .prop_map(|(x0, thetas)| HsPoint { x0, thetas })
}

fn any_point() -> impl Strategy<Value = HsPoint<f64>> {
    (2usize..=3, 1usize..=4).prop_flat_map(|(m, k)| point(m, k))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn forward_gives_unit_links_and_inverts(h in any_point()) {
        let c = hs_forward(&h).unwrap();
        for i in 1..=c.k() {
            let n: f64 = c.segment(i).iter().map(|x| x * x).sum();
            prop_assert!((n - 1.0).abs() <= 1e-14);
        }
        let back = hs_forward(&hs_inverse(&c).unwrap()).unwrap();
        for (p, q) in back.points().iter().zip(c.points()) {
            for (a, b) in p.iter().zip(q) {
                prop_assert!((a - b).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn chart_invariants_match_ambient_ones(h in any_point()) {
        let c = hs_forward(&h).unwrap();
        for i in 1..c.k() {
            prop_assert!((hs_a(&h, i).unwrap() - c.a_fn(i).unwrap()).abs() <= 1e-12);
        }
        prop_assert_eq!(hs_frame(&h).unwrap().len(), h.m() + 1);
        prop_assert!(frame_agreement(&h).unwrap() <= 1e-8);
    }

    #[test]
    fn jacobian_inverse(theta in angles(3)) {
        let j = sphere_jacobian(&theta, 1.0);
        let inv = sphere_jacobian_inverse(&theta, 1.0);
        for r in 0..4 {
            for c in 0..4 {
                let v: f64 = (0..4).map(|s| inv[r][s] * j[s][c]).sum();
                let id = if r == c { 1.0 } else { 0.0 };
                prop_assert!((v - id).abs() <= 1e-10);
            }
        }
    }
}

#[test]
fn reference_angles() {
    assert_eq!(sphere_point(&[0.0, 0.0]), vec![0.0, 0.0, 1.0]);
    let h: HsPoint<f64> = HsPoint { x0: vec![0.0; 3], thetas: vec![vec![0.4, 1.0]; 3] };
    for i in 1..3 {
        assert!((hs_a(&h, i).unwrap() - 1.0).abs() <= 1e-15);
    }
    let orth: HsPoint<f64> = HsPoint { x0: vec![0.0; 3], thetas: vec![vec![PI / 2.0, 0.0], vec![PI / 2.0, PI / 2.0]] };
    assert!(hs_a(&orth, 1).unwrap().abs() <= 1e-15);
}

#[test]
fn singular_and_straight_inverses() {
    let up = ArmConfig::from_points(vec![vec![0.0; 3], vec![0.0, 0.0, 1.0]]).unwrap();
    assert_eq!(hs_inverse(&up), Err(Error::ChartSingular { block: 1, angle: 1 }));
    let straight = ArmConfig::straight(2, 3).unwrap();
    let h = hs_inverse(&straight).unwrap();
    assert!(h.thetas.windows(2).all(|p| p[0] == p[1]));
    assert!(matches!(hs_a(&h, 3), Err(Error::IndexOutOfRange { .. })));
}

#[test]
fn small_hyperspherical_suite() {
    let report = hyperspherical(&[2, 3], &[1, 2, 3, 4], 10, 2).unwrap();
    assert!(report.passed(), "{:?}", report.messages);
}
