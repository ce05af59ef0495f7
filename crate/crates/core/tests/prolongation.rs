//! Spherical prolongation: the commutation square, the pushforward of the
//! prolonged distribution and the antipodal flip.

use multiflag::classify::{classify, RvtWord, DEFAULT_CLASSIFY_TOL};
use multiflag::distributions::frame_dk_offset;
use multiflag::prolongation::{
    flip_last, prolong_config, verify_pushforward, verify_pushforward_against, FiberDirection, PushforwardCheck,
    DEFAULT_PUSHFORWARD_TOL,
};
use multiflag::sampler::{sample_cartan, sample_in_class, SampleSpec};
use multiflag::verify::prolongation;
use multiflag::{ArmConfig, Error};
use proptest::prelude::*;

fn direction(m: usize) -> impl Strategy<Value = FiberDirection> {
    prop::collection::vec(-1.0f64..1.0, m + 1)
        .prop_filter("non-degenerate", |v| v.iter().map(|x| x * x).sum::<f64>() > 1e-2)
        .prop_map(|v| FiberDirection::normalized(&v).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn prolongation_commutes_and_pushes_forward(seed in any::<u64>(), k in 1usize..=4, d in direction(2)) {
        let c = &sample_cartan(2, k, seed, 0.0, 1).unwrap()[0];
        let p = prolong_config(c, &d).unwrap();
        prop_assert_eq!(&p.truncate(k).unwrap(), c);
        let link: f64 = p.segment(k + 1).iter().map(|x| x * x).sum();
        prop_assert!((link - 1.0).abs() <= 1e-14);
        let report = verify_pushforward(&p, DEFAULT_PUSHFORWARD_TOL).unwrap();
        prop_assert_eq!((report.pushed_rank, report.target_rank), (3, 3));
    }

    #[test]
    fn flip_is_an_involution_preserving_the_word(seed in any::<u64>()) {
        let word = RvtWord::parse("RVTRV").unwrap();
        let c = &sample_in_class(&SampleSpec::new(word.clone(), 3, seed, 1)).unwrap()[0];
        let f = flip_last(c);
        let back = flip_last(&f);
        for (p, q) in back.points().iter().zip(c.points()) {
            for (a, b) in p.iter().zip(q) {
                prop_assert!((a - b).abs() <= 1e-14);
            }
        }
        prop_assert!((f.a_fn(4).unwrap() + c.a_fn(4).unwrap()).abs() <= 1e-12);
        prop_assert_eq!(classify(&f, DEFAULT_CLASSIFY_TOL).unwrap().word, word);
    }
}

#[test]
fn straight_arm_extends_straight() {
    let c = ArmConfig::straight(3, 2).unwrap();
    let p = prolong_config(&c, &FiberDirection::new(vec![1.0, 0.0, 0.0, 0.0]).unwrap()).unwrap();
    assert_eq!(p, ArmConfig::straight(3, 3).unwrap());
    assert!(verify_pushforward(&p, DEFAULT_PUSHFORWARD_TOL).is_ok());
}

#[test]
fn corrupted_recursion_is_detected() {
    for k in 1..=4 {
        let bad = frame_dk_offset::<f64>(2, k + 1, 1e-3).unwrap();
        let shifted = PushforwardCheck::with_offset(2, k, 1e-3).unwrap();
        for c in sample_cartan(2, k + 1, 3, 0.05, 10).unwrap() {
            assert!(matches!(verify_pushforward_against(&c, &bad, DEFAULT_PUSHFORWARD_TOL), Err(Error::SpanMismatch(_))));
            assert!(matches!(shifted.check(&c, DEFAULT_PUSHFORWARD_TOL), Err(Error::SpanMismatch(_))));
        }
    }
}

#[test]
fn bad_inputs() {
    assert!(matches!(FiberDirection::new(vec![1.0, 1.0, 0.0]), Err(Error::NonUnitDirection(_))));
    let c = ArmConfig::straight(2, 2).unwrap();
    let d = FiberDirection::new(vec![1.0, 0.0, 0.0, 0.0]).unwrap();
    assert!(matches!(prolong_config(&c, &d), Err(Error::DimensionMismatch { .. })));
    let check = PushforwardCheck::new(2, 3).unwrap();
    assert!(matches!(check.check(&c, 1e-6), Err(Error::LengthMismatch { .. })));
}

#[test]
fn small_prolongation_suite() {
    let report = prolongation(&[2, 3], &[1, 2, 3, 4], 10, 3, DEFAULT_PUSHFORWARD_TOL).unwrap();
    assert!(report.passed(), "{:?}", report.messages);
}
