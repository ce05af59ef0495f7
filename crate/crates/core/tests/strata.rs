//! Defining equations of RVT strata, their Jacobian ranks and the exact
//! identities behind them.

use multiflag::classify::{enumerate_words, RvtWord};
use multiflag::distributions::{a_poly, Layout};
use multiflag::sampler::{sample_cartan, sample_in_class, SampleSpec};
use multiflag::strata::{
    a_pair_identities, defining_equations, fd_jacobian, jacobian, phi_bar, residuals, verify_codimension,
    verify_recursion, FD_STEP,
};
use multiflag::verify::{identities, strata};
use multiflag::{ArmConfig, Error};

const REL_TOL: f64 = 1e-8;

fn w(s: &str) -> RvtWord {
    RvtWord::parse(s).unwrap()
}

#[test]
fn small_systems() {
    let rv = defining_equations(&w("RV"), 2, 2).unwrap();
    assert_eq!(rv.equations, vec![a_poly(Layout::new(2, 2), 1).unwrap()]);
    let rvt = defining_equations(&w("RVT"), 2, 3).unwrap();
    let l = Layout::new(2, 3);
    assert_eq!(rvt.equations, vec![a_poly(l, 1).unwrap(), l.inner((3, 2), (2, 0))]);
    assert!(defining_equations(&w("RRRR"), 2, 4).unwrap().equations.is_empty());
    assert!(matches!(defining_equations(&w("RT_0T_{01}"), 3, 3), Err(Error::DepthExceeded(_))));
}

#[test]
fn residuals_vanish_in_class_and_drift_linearly_off_it() {
    let straight = ArmConfig::straight(2, 2).unwrap();
    assert_eq!(residuals(&defining_equations(&w("RV"), 2, 2).unwrap(), &straight).unwrap(), vec![1.0]);

    let word = w("RVT");
    let sys = defining_equations(&word, 2, 3).unwrap();
    let c = &sample_in_class(&SampleSpec::new(word, 2, 3, 1)).unwrap()[0];
    assert!(residuals(&sys, c).unwrap().iter().all(|r| r.abs() <= 1e-12));
    let jac = jacobian(&sys, c);
    let dir: Vec<f64> = (0..c.flat().len()).map(|i| ((i * 5 % 7) as f64 - 3.0) / 7.0).collect();
    for eps in [1e-4, 1e-5] {
        let moved: Vec<f64> = c.flat().iter().zip(&dir).map(|(x, d)| x + eps * d).collect();
        for (row, eq) in sys.equations.iter().enumerate() {
            let slope: f64 = (0..dir.len()).map(|j| jac[(3 + row, j)] * dir[j]).sum();
            let value = eq.evaluate(&moved).unwrap();
            assert!((value - eps * slope).abs() <= 10.0 * eps * eps, "{value} vs {}", eps * slope);
        }
    }
}

#[test]
fn codimension_examples() {
    for c in sample_in_class(&SampleSpec::new(w("RVT"), 2, 1, 100)).unwrap() {
        let sys = defining_equations(&w("RVT"), 2, 3).unwrap();
        assert_eq!(verify_codimension(&sys, &c, REL_TOL).unwrap().rank, 5);
    }
    let word = w("RVTRV");
    let c = &sample_in_class(&SampleSpec::new(word.clone(), 2, 1, 1)).unwrap()[0];
    let rep = verify_codimension(&defining_equations(&word, 2, 5).unwrap(), c, REL_TOL).unwrap();
    assert_eq!((rep.rank, rep.codimension(5)), (8, 3));
    let c = &sample_cartan(3, 4, 1, 0.05, 1).unwrap()[0];
    assert_eq!(verify_codimension(&defining_equations(&w("RRRR"), 3, 4).unwrap(), c, REL_TOL).unwrap().rank, 4);
}

#[test]
fn analytic_and_finite_difference_jacobians_agree() {
    for word in enumerate_words(5, 1).unwrap() {
        let sys = defining_equations(&word, 3, 5).unwrap();
        let c = &sample_in_class(&SampleSpec::new(word, 3, 2, 1)).unwrap()[0];
        let gap = (jacobian(&sys, c) - fd_jacobian(&sys, c, FD_STEP)).amax();
        assert!(gap <= 1e-5, "gap {gap:e}");
    }
}

#[test]
fn equations_are_local() {
    let l = Layout::new(3, 6);
    for i in 2..=6 {
        for j in 0..=(6 - i) {
            let vars = phi_bar(l, i, j).unwrap().support_vars();
            let lo = l.index(i - 2, 0);
            let hi = l.index(i + j, 3);
            assert!(vars.iter().all(|&v| v >= lo && v <= hi), "phi_bar[{i},{j}]");
        }
    }
}

#[test]
fn vertical_gradient_is_the_previous_segment() {
    let l = Layout::new(3, 4);
    for lv in 1..4 {
        let a = a_poly::<i64>(l, lv).unwrap();
        for r in 0..=3 {
            assert_eq!(a.partial(l.index(lv + 1, r)), l.diff(lv, lv - 1, r));
        }
    }
    let c = &sample_cartan(3, 4, 6, 0.05, 1).unwrap()[0];
    for lv in 1..4 {
        let norm: f64 = (0..=3)
            .map(|r| a_poly::<i64>(l, lv).unwrap().partial(l.index(lv + 1, r)).evaluate(&c.flat()).unwrap().powi(2))
            .sum();
        assert!((norm - 1.0).abs() <= 1e-12);
    }
}

#[test]
fn recursion_checks() {
    let l = Layout::new(2, 4);
    assert_eq!(a_pair_identities(l).unwrap(), None);
    let word = w("RVTT");
    for c in sample_in_class(&SampleSpec::new(word.clone(), 2, 8, 20)).unwrap() {
        assert!(verify_recursion(&word, &c, 1e-10).unwrap());
    }
    for c in sample_cartan(2, 4, 8, 0.0, 20).unwrap() {
        assert!(verify_recursion(&word, &c, 1e-10).unwrap());
    }
    let report = identities(&[2, 3], 4, 4).unwrap();
    assert!(report.passed(), "{:?}", report.messages);
}

#[test]
fn small_strata_suite() {
    let report = strata(&[2], 4, 3, 5, REL_TOL).unwrap();
    assert!(report.passed(), "{:?}", report.messages);
}
