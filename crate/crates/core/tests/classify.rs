//! RVT and EKR classification: worked configurations, word grammar, the
//! k = 4 decomposition table and invariance of the classification.

use std::collections::BTreeSet;

use multiflag::classify::{
    classify, classify_depth1, classify_k4, ekr_from_config, ekr_to_rvt_words, enumerate_ekr, enumerate_words,
    rvt_to_ekr, word_codimension, EkrCode, Letter, RvtWord, DEFAULT_CLASSIFY_TOL,
};
use multiflag::prolongation::flip_last;
use multiflag::sampler::{sample_in_class, SampleSpec};
use multiflag::verify::covering;
use multiflag::{ArmConfig, Error};
use proptest::prelude::*;

const TOL: f64 = DEFAULT_CLASSIFY_TOL;

fn w(s: &str) -> RvtWord {
    RvtWord::parse(s).unwrap()
}

fn word_set(words: &[&str]) -> BTreeSet<RvtWord> {
    words.iter().map(|s| w(s)).collect()
}

#[test]
fn worked_depth_one_configurations() {
    let straight = ArmConfig::straight(2, 4).unwrap();
    assert_eq!(classify_depth1(&straight, TOL).unwrap().word, w("RRRR"));
    assert_eq!(ekr_from_config(&straight, TOL).unwrap(), EkrCode::parse("1111").unwrap());

    let rv = ArmConfig::from_points(vec![vec![0.0, 0.0, 0.0], vec![1.0, 0.0, 0.0], vec![1.0, 1.0, 0.0]]).unwrap();
    assert_eq!(classify_depth1(&rv, TOL).unwrap().word, w("RV"));
    assert_eq!(ekr_from_config(&rv, TOL).unwrap(), EkrCode::parse("12").unwrap());

    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut points = rv.points().to_vec();
    points.push(vec![1.0 + s, 1.0 - s, 0.0]);
    let rvt = ArmConfig::from_points(points).unwrap();
    assert!((rvt.a_fn(2).unwrap() + s).abs() < 1e-15);
    let report = classify_depth1(&rvt, TOL).unwrap();
    assert_eq!(report.word, w("RVT"));
    assert_eq!(report.word.to_string(), "RVT");
    assert_eq!(report.levels.len(), 2);
}

#[test]
fn double_degeneracy_needs_the_k4_classifier() {
    let word = w("RT_0T_{01}");
    let c = &sample_in_class(&SampleSpec::new(word.clone(), 3, 4, 1)).unwrap()[0];
    assert!(matches!(classify_depth1(c, TOL), Err(Error::DepthExceeded(_))));
    assert_eq!(classify_k4(c, TOL).unwrap().word, word);
    assert_eq!(classify(c, TOL).unwrap().word.to_string(), "RT_0T_{01}");
    assert_eq!(ekr_from_config(c, TOL).unwrap(), EkrCode::parse("123").unwrap());
}

#[test]
fn k4_rows_from_sampled_configurations() {
    for (text, code) in [("RVT_0T_{01}", "1223"), ("RVRT_{01}", "1213"), ("RT_0T_{01}T_{12}", "1231")] {
        let word = w(text);
        for c in sample_in_class(&SampleSpec::new(word.clone(), 3, 17, 10)).unwrap() {
            let report = classify_k4(&c, TOL).unwrap();
            assert_eq!(report.word, word);
            assert_eq!(report.word.to_string(), text);
            assert_eq!(ekr_from_config(&c, TOL).unwrap(), EkrCode::parse(code).unwrap());
        }
    }
}

#[test]
fn enumeration_lists() {
    let k2: Vec<_> = enumerate_words(2, 2).unwrap();
    assert_eq!(k2, vec![w("RR"), w("RV")]);
    let k3: BTreeSet<_> = enumerate_words(3, 2).unwrap().into_iter().collect();
    assert_eq!(k3, word_set(&["RRR", "RRV", "RVV", "RVR", "RVT", "RT_0T_{01}"]));
    assert_eq!(enumerate_words(4, 2).unwrap().len(), 24);
    assert!(matches!(enumerate_words(5, 2), Err(Error::DepthExceeded(_))));
}

#[test]
fn decomposition_table_rows() {
    let row = |code: &str| -> BTreeSet<RvtWord> {
        ekr_to_rvt_words(&EkrCode::parse(code).unwrap(), code.len()).unwrap().into_iter().collect()
    };
    assert_eq!(row("1211"), word_set(&["RVRR", "RVTR", "RVTT"]));
    assert_eq!(row("1231"), word_set(&["RT_0T_{01}R", "RT_0T_{01}T_1", "RT_0T_{01}T_2", "RT_0T_{01}T_{12}"]));
    assert_eq!(row("12"), word_set(&["RV"]));
    assert_eq!(rvt_to_ekr(&w("RVTT")).unwrap(), EkrCode::parse("1211").unwrap());
    assert_eq!(rvt_to_ekr(&w("RRRV")).unwrap(), EkrCode::parse("1112").unwrap());
}

#[test]
fn table_partitions_the_k4_words() {
    let codes = enumerate_ekr(4, 2);
    assert_eq!(codes.len(), 14);
    let mut union = BTreeSet::new();
    for code in &codes {
        for word in ekr_to_rvt_words(code, 4).unwrap() {
            assert_eq!(&rvt_to_ekr(&word).unwrap(), code);
            assert!(union.insert(word), "word listed under two codes");
        }
    }
    let all: BTreeSet<_> = enumerate_words(4, 2).unwrap().into_iter().collect();
    assert_eq!(union, all);
}

#[test]
fn sampled_k4_classes_land_in_their_row() {
    for word in enumerate_words(4, 2).unwrap() {
        let code = rvt_to_ekr(&word).unwrap();
        for c in sample_in_class(&SampleSpec::new(word.clone(), 3, 5, 5)).unwrap() {
            assert_eq!(classify_k4(&c, TOL).unwrap().word, word);
            assert_eq!(ekr_from_config(&c, TOL).unwrap(), code);
        }
    }
}

#[test]
fn codimensions() {
    assert_eq!(word_codimension(&w("RVT")).unwrap(), 2);
    assert_eq!(word_codimension(&w("RRRR")).unwrap(), 0);
    assert_eq!(word_codimension(&w("RVTRV")).unwrap(), 3);
    assert!(matches!(word_codimension(&w("RT_0T_{01}")), Err(Error::DepthExceeded(_))));
}

#[test]
fn letters_and_codes_reject_bad_input() {
    assert_eq!(Letter::sub(vec![0]).unwrap(), Letter::V);
    assert!(RvtWord::parse("VR").is_err());
    assert!(!w("RT").is_admissible());
    assert!(!w("RVT_2").is_admissible());
    assert!(RvtWord::parse("RX").is_err());
    assert!(matches!(EkrCode::new(vec![1, 3]), Err(Error::RuleViolation { position: 2 })));
    assert!(EkrCode::new(vec![2]).is_err());
}

#[test]
fn invariance_under_motions_and_flips() {
    let report = covering(200, 9, TOL).unwrap();
    assert!(report.passed(), "{:?}", report.messages);
    let c = &sample_in_class(&SampleSpec::new(w("RVT"), 2, 1, 1)).unwrap()[0];
    assert_eq!(classify(&flip_last(c), TOL).unwrap().word, w("RVT"));
}

fn any_word() -> impl Strategy<Value = RvtWord> {
    let mut pool: Vec<RvtWord> = (1..=6).flat_map(|k| enumerate_words(k, 1).unwrap()).collect();
    pool.extend((3..=4).flat_map(|k| enumerate_words(k, 2).unwrap()));
    prop::sample::select(pool)
}

proptest! {
    #[test]
    fn printed_words_parse_back(word in any_word()) {
        prop_assert_eq!(RvtWord::parse(&word.to_string()).unwrap(), word.clone());
        prop_assert_eq!(RvtWord::parse(&word.canonical()).unwrap(), word.clone());
        prop_assert!(word.is_admissible());
    }

    #[test]
    fn depth_one_codimension_counts_degenerate_letters(word in any_word()) {
        prop_assume!(word.depth() <= 1);
        let count = word.letters().iter().filter(|l| !matches!(l, Letter::R)).count();
        prop_assert_eq!(word_codimension(&word).unwrap(), count);
        let code = rvt_to_ekr(&word).unwrap();
        prop_assert!(ekr_to_rvt_words(&code, word.len()).unwrap().contains(&word));
    }
}
