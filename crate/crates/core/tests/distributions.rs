//! Frames of the rank-(m+1) distribution, the flag built from them, Cauchy
//! characteristics, sandwiches and the EKR normal forms.

use multiflag::distributions::{
    build_flag, cauchy_char_at, ekr_normal_form, frame_dk, frame_vertical, gen_v, lie_square, psi_poly, rank_at,
    Layout,
};
use multiflag::linalg::{containment_sine, orthonormal_basis, rank};
use multiflag::poly::CompiledScalar;
use multiflag::sampler::{sample_cartan, sample_in_class, SampleSpec};
use multiflag::strata::y_recursion_identity;
use multiflag::verify::{cauchy, flag_ranks};
use multiflag::classify::{enumerate_ekr, RvtWord};
use multiflag::{ArmConfig, Error, ExactFrame, RealFrame};

const REL_TOL: f64 = 1e-8;

#[test]
fn y_recursion_is_exact_up_to_six_links() {
    for k in 1..=6 {
        assert!(y_recursion_identity(Layout::new(2, k)).unwrap(), "k = {k}");
    }
}

#[test]
fn frame_has_rank_m_plus_one_everywhere_sampled() {
    let frame = frame_dk::<i64>(2, 4).unwrap().compile();
    let configs = sample_cartan(2, 4, 11, 0.0, 1000).unwrap();
    for c in &configs {
        assert_eq!(rank(&frame.matrix(&c.flat()), REL_TOL), 3);
    }
}

#[test]
fn frame_is_tangent_to_the_configuration_space() {
    for (m, k) in [(2, 3), (3, 2)] {
        let l = Layout::new(m, k);
        let frame = frame_dk::<i64>(m, k).unwrap().compile();
        let constraints: Vec<_> = (0..k).map(|i| CompiledScalar::new(&psi_poly::<i64>(l, i).unwrap())).collect();
        for c in sample_cartan(m, k, 5, 0.0, 50).unwrap() {
            let p = c.flat();
            let e = frame.matrix(&p);
            let mut grad = vec![0.0; p.len()];
            for psi in &constraints {
                psi.value_grad(&p, &mut grad);
                for col in e.column_iter() {
                    let d: f64 = col.iter().zip(&grad).map(|(a, b)| a * b).sum();
                    assert!(d.abs() <= 1e-10);
                }
            }
        }
    }
}

#[test]
fn fiber_frame_spans_the_last_sphere() {
    let (m, k) = (3, 3);
    let vertical = frame_vertical::<i64>(m, k).unwrap();
    let full = frame_dk::<i64>(m, k).unwrap();
    let v = gen_v::<i64>(Layout::new(m, k), k).unwrap();
    for c in sample_cartan(m, k, 8, 0.0, 100).unwrap() {
        let p = c.flat();
        let fv = vertical.evaluate(&p).unwrap();
        assert_eq!(rank(&fv, REL_TOL), m);
        let vv = v.evaluate(&p).unwrap();
        for col in fv.column_iter() {
            let d: f64 = col.iter().zip(&vv).map(|(a, b)| a * b).sum();
            assert!(d.abs() <= 1e-12);
        }
        let a = orthonormal_basis(&fv, REL_TOL);
        let b = orthonormal_basis(&full.evaluate(&p).unwrap(), REL_TOL);
        assert!(containment_sine(&a, &b) <= 1e-8);
    }
}

#[test]
fn flag_ranks_for_three_links() {
    let flag = build_flag::<i64>(2, 3).unwrap();
    let c = &sample_cartan(2, 3, 3, 0.05, 1).unwrap()[0];
    let ranks: Vec<_> = (0..=3).rev().map(|j| rank_at(flag.member(j), &c.flat(), REL_TOL).unwrap()).collect();
    assert_eq!(ranks, vec![3, 5, 7, 9]);
    // ranks stay constant at a vertical point
    let v = &sample_in_class(&SampleSpec::new(RvtWord::parse("RVR").unwrap(), 2, 3, 1)).unwrap()[0];
    let ranks: Vec<_> = (0..=3).rev().map(|j| rank_at(flag.member(j), &v.flat(), REL_TOL).unwrap()).collect();
    assert_eq!(ranks, vec![3, 5, 7, 9]);
}

#[test]
fn flag_and_bracket_closure_suite() {
    let report = flag_ranks(&[2, 3], &[1, 2, 3], 5, 21, REL_TOL).unwrap();
    assert!(report.passed(), "{:?}", report.messages);
}

#[test]
fn cauchy_and_sandwich_suite() {
    let report = cauchy(&[2, 3], &[1, 2, 3], 5, 22, REL_TOL).unwrap();
    assert!(report.passed(), "{:?}", report.messages);
}

#[test]
fn top_member_has_no_characteristics() {
    let c = ArmConfig::straight(2, 2).unwrap();
    let l = cauchy_char_at(&frame_dk::<i64>(2, 2).unwrap(), &c.flat(), REL_TOL).unwrap();
    assert_eq!(l.ncols(), 0);
}

#[test]
fn oversized_flag_is_refused() {
    assert!(build_flag::<f64>(4, 4).is_ok());
    assert!(matches!(build_flag::<f64>(5, 4), Err(Error::SizeLimitExceeded { size: 30, limit: 25 })));
}

/// Ranks at the origin of the iterated Lie squares of an EKR normal form.
fn derived_ranks(f: &ExactFrame, steps: usize) -> Vec<usize> {
    let origin = vec![0.0; f.dim()];
    let mut out = vec![rank_at(f, &origin, REL_TOL).unwrap()];
    let mut cur = f.clone();
    for _ in 0..steps {
        cur = lie_square(&cur).unwrap();
        out.push(rank_at(&cur, &origin, REL_TOL).unwrap());
    }
    out
}

#[test]
fn ekr_normal_forms_grow_like_the_flag() {
    let m = 2;
    for k in 1..=3 {
        for code in enumerate_ekr(k, 2) {
            let f = ekr_normal_form::<i64>(code.js(), m).unwrap();
            assert_eq!(f.dim(), (k + 1) * m + 1);
            let expected: Vec<_> = (0..=k).map(|i| (i + 1) * m + 1).collect();
            assert_eq!(derived_ranks(&f, k), expected, "{code}");
        }
    }
}

#[test]
fn ekr_normal_form_rejects_upward_jumps() {
    assert!(matches!(ekr_normal_form::<i64>(&[1, 3], 2), Err(Error::RuleViolation { .. })));
    let real: RealFrame = ekr_normal_form(&[1, 2], 3).unwrap();
    assert_eq!(real.len(), 4);
}
