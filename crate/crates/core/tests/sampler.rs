//! The constructive sampler as an oracle: exact zeros, margins, determinism
//! and agreement with the classifier.

use multiflag::classify::{classify, enumerate_words, RvtWord, DEFAULT_CLASSIFY_TOL};
use multiflag::sampler::{condition_extremes, sample_cartan, sample_in_class, sample_with_stats, SampleSpec, DEFAULT_MARGIN};
use multiflag::verify::roundtrip;
use multiflag::Error;
use proptest::prelude::*;

fn word_pool() -> Vec<RvtWord> {
    let mut pool: Vec<RvtWord> = (2..=6).flat_map(|k| enumerate_words(k, 1).unwrap()).collect();
    pool.extend((3..=4).flat_map(|k| enumerate_words(k, 2).unwrap().into_iter().filter(|w| w.depth() == 2)));
    pool
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn samples_meet_their_conditions(word in prop::sample::select(word_pool()), m in 2usize..=3, seed in any::<u64>()) {
        let configs = sample_in_class(&SampleSpec::new(word.clone(), m, seed, 3)).unwrap();
        for c in &configs {
            let (zero, nonzero) = condition_extremes(&word, c).unwrap();
            prop_assert!(zero <= 1e-12, "zero condition {zero:e}");
            prop_assert!(nonzero >= DEFAULT_MARGIN, "non-zero condition {nonzero}");
            prop_assert_eq!(&classify(c, DEFAULT_CLASSIFY_TOL).unwrap().word, &word);
        }
    }

    #[test]
    fn same_seed_same_configurations(word in prop::sample::select(word_pool()), seed in any::<u64>()) {
        let spec = SampleSpec::new(word, 3, seed, 2);
        prop_assert_eq!(sample_in_class(&spec).unwrap(), sample_in_class(&spec).unwrap());
    }
}

#[test]
fn cartan_samples() {
    let configs = sample_cartan(2, 4, 1, 0.05, 1000).unwrap();
    assert_eq!(configs.len(), 1000);
    assert!(configs.iter().all(|c| c.is_cartan(0.05)));
    let (_, stats) = sample_with_stats(&SampleSpec::new(RvtWord::parse("RRRR").unwrap(), 2, 1, 1000)).unwrap();
    assert!(stats.acceptance() > 0.5);
}

#[test]
fn small_roundtrip_suite() {
    let report = roundtrip(&[2, 3], 5, true, 5, 4, DEFAULT_CLASSIFY_TOL, DEFAULT_MARGIN).unwrap();
    assert!(report.passed(), "{:?}", report.messages);
}

#[test]
fn unsupported_requests() {
    let word = RvtWord::parse("RVT").unwrap();
    let mut spec = SampleSpec::new(word.clone(), 1, 0, 1);
    assert!(matches!(sample_in_class(&spec), Err(Error::DimensionTooSmall(1))));
    spec = SampleSpec::new(word, 2, 0, 1);
    spec.k = 4;
    assert!(matches!(sample_in_class(&spec), Err(Error::LengthMismatch { .. })));
    let tight = SampleSpec::new(RvtWord::parse("RRR").unwrap(), 2, 0, 1).with_margin(1.5);
    assert!(matches!(sample_in_class(&tight), Err(Error::RejectionBudgetExceeded { .. })));
}
