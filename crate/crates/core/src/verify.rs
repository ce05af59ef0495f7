//! Batch verification suites over sampled configurations.
//!
//! Each suite returns a [`SuiteReport`] with a count of individual checks,
//! the failures among them, readable summary lines and a JSON payload.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::classify::{classify, classify_depth1, classify_k4, enumerate_words, RvtWord};
use crate::distributions::{build_flag, cauchy_char_from_jet, lie_square_at, psi_poly, Layout};
use crate::error::Result;
use crate::hyperspherical::{
    frame_agreement, hs_a, hs_forward, hs_inverse, sphere_jacobian, sphere_jacobian_inverse, HsPoint,
};
use crate::linalg;
use crate::poly::CompiledScalar;
use crate::prolongation::{flip_last, prolong_config, FiberDirection, PushforwardCheck};
use crate::sampler::{condition_extremes, random_rotation, random_unit, sample_cartan, sample_in_class, SampleSpec};
use crate::strata::{
    a_pair_identities, defining_equations, phi_bar_identity, plan_equations, residuals, verify_codimension,
    verify_recursion, y_recursion_identity,
};
use crate::ArmConfig;

/// Failure messages kept per report.
const MAX_MESSAGES: usize = 20;
/// Sandwich containment threshold at Cartan points.
pub const SANDWICH_GAP: f64 = 0.01;
/// Chart margin on |sin θ^j| for sampled hyperspherical points.
pub const CHART_MARGIN: f64 = 0.05;

/// Outcome of one suite.
#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub checks: usize,
    pub failures: usize,
    pub lines: Vec<String>,
    pub messages: Vec<String>,
    pub data: Value,
}

impl SuiteReport {
    fn new(suite: &str) -> Self {
        Self { suite: suite.into(), checks: 0, failures: 0, lines: Vec::new(), messages: Vec::new(), data: json!({}) }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0 && self.checks > 0
    }

    fn check(&mut self, ok: bool, message: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures += 1;
            if self.messages.len() < MAX_MESSAGES {
                self.messages.push(message());
            }
        }
    }
}

fn task_seed(seed: u64, parts: &[usize]) -> u64 {
    parts.iter().fold(seed, |acc, &p| acc.wrapping_mul(1_000_003).wrapping_add(p as u64 + 1))
}

/// Sampler/classifier round trip over every depth-1 word with k ≤ `k_max`
/// and, if `depth2`, every depth-2 word with k ≤ 4.
pub fn roundtrip(ms: &[usize], k_max: usize, depth2: bool, samples: usize, seed: u64, tol: f64, margin: f64) -> Result<SuiteReport> {
    let mut r = SuiteReport::new("roundtrip");
    let mut per_k = Vec::new();
    for &m in ms {
        for k in 1..=k_max {
            let mut words = enumerate_words(k, 1)?;
            let depth1_count = words.len();
            if depth2 && k <= 4 {
                words = enumerate_words(k, 2)?;
            }
            let before = r.failures;
            for (wi, word) in words.iter().enumerate() {
                let spec = SampleSpec::new(word.clone(), m, task_seed(seed, &[m, k, wi]), samples).with_margin(margin);
                let configs = match sample_in_class(&spec) {
                    Ok(c) => c,
                    Err(e) => {
                        r.check(false, || format!("m={m} {word}: sampling failed: {e}"));
                        continue;
                    }
                };
                for c in &configs {
                    let (zero, nonzero) = condition_extremes(word, c)?;
                    r.check(zero <= 1e-12 && nonzero >= margin, || format!("m={m} {word}: sample off class ({zero:e}, {nonzero})"));
                    let got = if word.depth() <= 1 { classify_depth1(c, tol) } else { classify_k4(c, tol) };
                    match got {
                        Ok(rep) => r.check(rep.word == *word, || format!("m={m} {word}: classified as {}", rep.word)),
                        Err(e) => r.check(false, || format!("m={m} {word}: {e}")),
                    }
                }
            }
            r.lines.push(format!(
                "m={m} k={k}: {} words ({} depth-1) x {samples} samples, {} failures",
                words.len(),
                depth1_count,
                r.failures - before
            ));
            per_k.push(json!({"m": m, "k": k, "words": words.len(), "failures": r.failures - before}));
        }
    }
    r.data = json!({ "per_k": per_k });
    Ok(r)
}

/// Ranks of every flag member and the bracket-closure cross-check at Cartan points.
pub fn flag_ranks(ms: &[usize], ks: &[usize], samples: usize, seed: u64, rel_tol: f64) -> Result<SuiteReport> {
    let mut r = SuiteReport::new("flag-ranks");
    let mut table = Vec::new();
    for &m in ms {
        for &k in ks {
            let flag = build_flag::<i64>(m, k)?;
            let compiled: Vec<_> = flag.frames.iter().map(|f| f.compile()).collect();
            let expected: Vec<usize> = (0..=k).rev().map(|j| flag.expected_rank(j)).collect();
            let mut observed = Vec::new();
            let mut max_gap: f64 = 0.0;
            for (s, c) in sample_cartan(m, k, task_seed(seed, &[m, k]), 0.05, samples)?.iter().enumerate() {
                let p = c.flat();
                let ranks: Vec<usize> = compiled.iter().map(|f| linalg::rank(&f.matrix(&p), rel_tol)).collect();
                r.check(ranks == expected, || format!("m={m} k={k}: ranks {ranks:?}, expected {expected:?}"));
                if s == 0 {
                    observed = ranks;
                }
                for idx in 0..k {
                    // frames[idx] is D_{k-idx}; its Lie square should span D_{k-idx-1}.
                    let square = lie_square_at(&compiled[idx], &p);
                    let gap = linalg::span_distance(&square, &compiled[idx + 1].matrix(&p), rel_tol);
                    max_gap = max_gap.max(gap);
                    r.check(gap <= 1e-8, || format!("m={m} k={k}: bracket closure of D_{} off by {gap:e}", k - idx));
                }
            }
            r.lines.push(format!("m={m} k={k}: ranks D_{k}..D_0 = {observed:?} (expected {expected:?}), bracket gap {max_gap:.1e}"));
            table.push(json!({"m": m, "k": k, "ranks": observed, "expected": expected, "bracket_gap": max_gap}));
        }
    }
    r.data = json!({ "flags": table });
    Ok(r)
}

/// Tangent vectors of the arm space that fix x_0.
fn fiber_of_base(m: usize, c: &ArmConfig) -> DMatrix<f64> {
    let k = c.k();
    let l = Layout::new(m, k);
    let p = c.flat();
    let mut rows = DMatrix::zeros(k + m + 1, l.dim());
    let mut grad = vec![0.0; p.len()];
    for i in 0..k {
        grad.iter_mut().for_each(|g| *g = 0.0);
        CompiledScalar::new(&psi_poly::<i64>(l, i).expect("index in range")).value_grad(&p, &mut grad);
        for (col, g) in grad.iter().enumerate() {
            rows[(i, col)] = *g;
        }
    }
    for r in 0..=m {
        rows[(k + r, l.index(0, r))] = 1.0;
    }
    linalg::kernel(&rows, linalg::DEFAULT_REL_TOL)
}

/// Containment sine of D_l in the lower member of its sandwich: the
/// characteristic L(D_{l-2}) for l ≥ 3, the fibers of x_0 for l = 2.
fn sandwich_sine(compiled: &[crate::poly::CompiledFrame], k: usize, l: usize, c: &ArmConfig, rel_tol: f64) -> Result<f64> {
    let p = c.flat();
    let upper = linalg::orthonormal_basis(&compiled[k - l].matrix(&p), rel_tol);
    let lower = if l == 2 {
        fiber_of_base(c.m(), c)
    } else {
        cauchy_char_from_jet(&compiled[k - l + 2].jet(&p), rel_tol)?
    };
    Ok(linalg::containment_sine(&upper, &lower))
}

/// Cauchy characteristic dimensions at Cartan points and the sandwich test
/// at configurations with a single vertical level.
pub fn cauchy(ms: &[usize], ks: &[usize], samples: usize, seed: u64, rel_tol: f64) -> Result<SuiteReport> {
    let mut r = SuiteReport::new("cauchy");
    let mut table = Vec::new();
    for &m in ms {
        for &k in ks {
            let flag = build_flag::<i64>(m, k)?;
            let compiled: Vec<_> = flag.frames.iter().map(|f| f.compile()).collect();
            let expected: Vec<usize> = (1..=k).rev().map(|j| (k - j) * m).collect();
            let mut observed = Vec::new();
            let cartan = sample_cartan(m, k, task_seed(seed, &[m, k, 1]), 0.05, samples)?;
            let mut min_gap = f64::INFINITY;
            for (s, c) in cartan.iter().enumerate() {
                let p = c.flat();
                let dims = (0..k)
                    .map(|idx| cauchy_char_from_jet(&compiled[idx].jet(&p), rel_tol).map(|b| b.ncols()))
                    .collect::<Result<Vec<_>>>()?;
                r.check(dims == expected, || format!("m={m} k={k}: dim L(D_k..D_1) = {dims:?}, expected {expected:?}"));
                if s == 0 {
                    observed = dims;
                }
                for l in 2..=k {
                    let sine = sandwich_sine(&compiled, k, l, c, rel_tol)?;
                    min_gap = min_gap.min(sine);
                    r.check(sine > SANDWICH_GAP, || format!("m={m} k={k}: D_{l} inside its sandwich at a Cartan point ({sine:e})"));
                }
            }
            let mut max_in = 0.0f64;
            for l in 2..=k {
                let mut text = "R".repeat(l - 1);
                text.push('V');
                text.push_str(&"R".repeat(k - l));
                let word = RvtWord::parse(&text)?;
                let spec = SampleSpec::new(word, m, task_seed(seed, &[m, k, l, 2]), samples.min(20));
                for c in sample_in_class(&spec)? {
                    let sine = sandwich_sine(&compiled, k, l, &c, rel_tol)?;
                    max_in = max_in.max(sine);
                    r.check(sine <= 1e-8, || format!("m={m} k={k}: D_{l} not in its sandwich at a vertical point ({sine:e})"));
                }
            }
            r.lines.push(format!(
                "m={m} k={k}: dim L(D_k..D_1) = {observed:?} (expected {expected:?}); sandwich sine vertical <= {max_in:.1e}, Cartan >= {:.3}",
                if min_gap.is_finite() { min_gap } else { 1.0 }
            ));
            table.push(json!({"m": m, "k": k, "cauchy_dims": observed, "expected": expected}));
        }
    }
    r.data = json!({ "cauchy": table });
    Ok(r)
}

/// Prolongation pushforward, commutation square and the corrupted-frame control.
pub fn prolongation(ms: &[usize], ks: &[usize], samples: usize, seed: u64, rel_tol: f64) -> Result<SuiteReport> {
    let mut r = SuiteReport::new("prolongation");
    let mut table = Vec::new();
    for &m in ms {
        for &k in ks {
            let mut rng = ChaCha8Rng::seed_from_u64(task_seed(seed, &[m, k]));
            let bases = sample_cartan(m, k, task_seed(seed, &[m, k, 1]), 0.0, samples)?;
            let check = PushforwardCheck::new(m, k)?;
            let corrupted = PushforwardCheck::with_offset(m, k, 1e-3)?;
            let mut worst: f64 = 0.0;
            let mut detected = 0;
            for c in &bases {
                let d = FiberDirection::normalized(&random_unit(&mut rng, m + 1))?;
                let p = prolong_config(c, &d)?;
                r.check(p.truncate(k)? == *c, || format!("m={m} k={k}: commutation square not exact"));
                match check.check(&p, rel_tol) {
                    Ok(rep) => {
                        worst = worst.max(rep.max_sine);
                        r.check(true, String::new);
                    }
                    Err(e) => r.check(false, || format!("m={m} k={k}: {e}")),
                }
                let caught = corrupted.check(&p, rel_tol).is_err();
                detected += usize::from(caught);
                r.check(caught, || format!("m={m} k={k}: corrupted frame not detected"));
            }
            r.lines.push(format!(
                "m={m} k={k}: {samples} points, max sine {worst:.1e}, corrupted frame caught {detected}/{samples}"
            ));
            table.push(json!({"m": m, "k": k, "max_sine": worst, "mutation_detected": detected}));
        }
    }
    r.data = json!({ "prolongation": table });
    Ok(r)
}

fn all_depth1_words(k_max: usize) -> Result<Vec<RvtWord>> {
    let mut out = Vec::new();
    for k in 1..=k_max {
        out.extend(enumerate_words(k, 1)?);
    }
    Ok(out)
}

/// Jacobian ranks of stratum systems at in-class samples, recursion checks,
/// and measured (unasserted) ranks of the depth-2 systems.
pub fn strata(ms: &[usize], k_max: usize, samples: usize, seed: u64, rel_tol: f64) -> Result<SuiteReport> {
    let mut r = SuiteReport::new("strata");
    let mut depth2 = Vec::new();
    for &m in ms {
        let before = r.failures;
        let words = all_depth1_words(k_max)?;
        for (wi, word) in words.iter().enumerate() {
            let k = word.len();
            let sys = defining_equations(word, m, k)?;
            let spec = SampleSpec::new(word.clone(), m, task_seed(seed, &[m, wi]), samples);
            let configs = sample_in_class(&spec)?;
            for c in &configs {
                let res = residuals(&sys, c)?;
                let worst = res.iter().fold(0.0f64, |a, b| a.max(b.abs()));
                r.check(worst <= 1e-10, || format!("m={m} {word}: residual {worst:e}"));
                match verify_codimension(&sys, c, rel_tol) {
                    Ok(_) => r.check(true, String::new),
                    Err(e) => r.check(false, || format!("m={m} {word}: {e}")),
                }
            }
            if let Some(c) = configs.first() {
                match verify_recursion(word, c, 1e-10) {
                    Ok(_) => r.check(true, String::new),
                    Err(e) => r.check(false, || format!("m={m} {word}: recursion {e}")),
                }
            }
        }
        r.lines.push(format!("m={m}: {} depth-1 words with k <= {k_max}, {} failures", words.len(), r.failures - before));
        for k in 3..=k_max.min(4) {
            for word in enumerate_words(k, 2)?.into_iter().filter(|w| w.depth() == 2) {
                let sys = plan_equations(&word, m, k)?;
                let spec = SampleSpec::new(word.clone(), m, task_seed(seed, &[m, k, 99]), samples.min(10));
                let mut ranks = Vec::new();
                for c in sample_in_class(&spec)? {
                    ranks.push(verify_codimension(&sys, &c, rel_tol)?.rank);
                }
                ranks.sort_unstable();
                ranks.dedup();
                let codims: Vec<usize> = ranks.iter().map(|x| x - k).collect();
                r.lines.push(format!("m={m} {word}: {} equations, measured codimension {codims:?}", sys.equations.len()));
                depth2.push(json!({"m": m, "word": word.to_string(), "equations": sys.equations.len(), "codimension": codims}));
            }
        }
    }
    r.data = json!({ "depth2_measured": depth2 });
    Ok(r)
}

/// Jacobian ranks of one stratum at in-class samples. Depth-1 words are
/// checked against their expected codimension; depth-2 ranks are reported.
pub fn strata_word(word: &RvtWord, ms: &[usize], samples: usize, seed: u64, rel_tol: f64) -> Result<SuiteReport> {
    let mut r = SuiteReport::new("strata");
    let k = word.len();
    let mut table = Vec::new();
    for &m in ms {
        let sys = if word.depth() <= 1 { defining_equations(word, m, k)? } else { plan_equations(word, m, k)? };
        let spec = SampleSpec::new(word.clone(), m, task_seed(seed, &[m]), samples);
        let mut ranks = Vec::new();
        for c in sample_in_class(&spec)? {
            let worst = residuals(&sys, &c)?.iter().fold(0.0f64, |a, b| a.max(b.abs()));
            r.check(worst <= 1e-10, || format!("m={m} {word}: residual {worst:e}"));
            match verify_codimension(&sys, &c, rel_tol) {
                Ok(rep) => {
                    ranks.push(rep.rank);
                    r.check(true, String::new);
                }
                Err(e) => r.check(false, || format!("m={m} {word}: {e}")),
            }
        }
        ranks.sort_unstable();
        ranks.dedup();
        let codims: Vec<usize> = ranks.iter().map(|x| x - k).collect();
        let expected = sys.expected_rank().map(|e| e - k);
        let shown = expected.map_or("not asserted".to_string(), |e| e.to_string());
        r.lines.push(format!(
            "m={m} {word}: {} equations, measured codimension {codims:?}, expected {shown}",
            sys.equations.len()
        ));
        table.push(json!({"m": m, "word": word.to_string(), "codimension": codims, "expected": expected}));
    }
    r.data = json!({ "strata": table });
    Ok(r)
}

/// Exact polynomial identities for every m in `ms` and k ≤ `k_max`.
pub fn identities(ms: &[usize], k_max: usize, y_k_max: usize) -> Result<SuiteReport> {
    let mut r = SuiteReport::new("identities");
    for &m in ms {
        for k in 1..=k_max {
            let l = Layout::new(m, k);
            let failed = a_pair_identities(l)?;
            r.check(failed.is_none(), || format!("m={m} k={k}: rule {} for A_ij fails", failed.unwrap_or(0)));
            let mut count = 0;
            for i in 2..=k {
                for j in 0..k {
                    if i + j + 1 > k {
                        break;
                    }
                    count += 1;
                    let ok = phi_bar_identity(l, i, j)?;
                    r.check(ok, || format!("m={m} k={k}: phi_bar recursion fails at i={i} j={j}"));
                }
            }
            r.lines.push(format!("m={m} k={k}: A_ij rules ok={}, {count} phi_bar recursions", failed.is_none()));
        }
        for k in 1..=y_k_max {
            let ok = y_recursion_identity(Layout::new(m, k))?;
            r.check(ok, || format!("m={m}: Y recursion fails up to k={k}"));
        }
        r.lines.push(format!("m={m}: Y_n recursion checked for n <= {y_k_max}"));
    }
    Ok(r)
}

fn random_chart_point(rng: &mut ChaCha8Rng, m: usize, k: usize) -> HsPoint<f64> {
    let x0 = (0..=m).map(|_| rng.random_range(-1.0..=1.0)).collect();
    let thetas = (0..k)
        .map(|_| {
            (0..m)
                .map(|j| loop {
                    let t: f64 = if j + 1 < m {
                        rng.random_range(0.0..std::f64::consts::PI)
                    } else {
                        rng.random_range(0.0..2.0 * std::f64::consts::PI)
                    };
                    if j + 1 == m || t.sin().abs() > CHART_MARGIN {
                        break t;
                    }
                })
                .collect()
        })
        .collect();
    HsPoint { x0, thetas }
}

/// Chart frame against the ambient frame, A_i against 𝒜_i, chart round trips
/// and the inverse of the sphere Jacobian.
pub fn hyperspherical(ms: &[usize], ks: &[usize], samples: usize, seed: u64) -> Result<SuiteReport> {
    let mut r = SuiteReport::new("hyperspherical");
    for &m in ms {
        for &k in ks {
            let mut rng = ChaCha8Rng::seed_from_u64(task_seed(seed, &[m, k]));
            let (mut span, mut a_err, mut trip, mut inv): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
            for _ in 0..samples {
                let h = random_chart_point(&mut rng, m, k);
                let s = frame_agreement(&h)?;
                span = span.max(s);
                r.check(s <= 1e-8, || format!("m={m} k={k}: span gap {s:e}"));
                let c = hs_forward(&h)?;
                for i in 1..k {
                    let e = (hs_a(&h, i)? - c.a_fn(i)?).abs();
                    a_err = a_err.max(e);
                    r.check(e <= 1e-12, || format!("m={m} k={k}: A_{i} differs by {e:e}"));
                }
                let back = hs_forward(&hs_inverse(&c)?)?;
                let e = back.flat().iter().zip(c.flat()).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
                trip = trip.max(e);
                r.check(e <= 1e-10, || format!("m={m} k={k}: chart round trip off by {e:e}"));
                let rho = rng.random_range(0.5..2.0);
                let j = sphere_jacobian(&h.thetas[0], rho);
                let ji = sphere_jacobian_inverse(&h.thetas[0], rho);
                let n = m + 1;
                let mut e: f64 = 0.0;
                for a in 0..n {
                    for b in 0..n {
                        let v: f64 = (0..n).map(|t| ji[a][t] * j[t][b]).sum();
                        e = e.max((v - if a == b { 1.0 } else { 0.0 }).abs());
                    }
                }
                inv = inv.max(e);
                r.check(e <= 1e-10, || format!("m={m} k={k}: Jacobian inverse off by {e:e}"));
            }
            r.lines.push(format!(
                "m={m} k={k}: span gap {span:.1e}, A_i error {a_err:.1e}, round trip {trip:.1e}, Jacobian inverse {inv:.1e}"
            ));
        }
    }
    Ok(r)
}

/// Classification invariance under the flip of the last link and rigid motions.
pub fn covering(count: usize, seed: u64, tol: f64) -> Result<SuiteReport> {
    let mut r = SuiteReport::new("covering");
    let mut pool = all_depth1_words(6)?.into_iter().filter(|w| w.len() >= 2).collect::<Vec<_>>();
    for k in 3..=4 {
        pool.extend(enumerate_words(k, 2)?.into_iter().filter(|w| w.depth() == 2));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..count {
        let word = &pool[i % pool.len()];
        let m = 2 + (i / pool.len()) % 2;
        let c = sample_in_class(&SampleSpec::new(word.clone(), m, task_seed(seed, &[i]), 1))?.remove(0);
        let base = classify(&c, tol).map(|rep| rep.word);
        let flipped = classify(&flip_last(&c), tol).map(|rep| rep.word);
        let rot = random_rotation(&mut rng, m + 1);
        let shift: Vec<f64> = (0..=m).map(|_| rng.random_range(-5.0..5.0)).collect();
        let moved = classify(&c.transform(&rot, &shift)?, tol).map(|rep| rep.word);
        let ok = base.as_ref() == Ok(word) && flipped == base && moved == base;
        r.check(ok, || format!("m={m} {word}: base {base:?}, flipped {flipped:?}, moved {moved:?}"));
    }
    r.lines.push(format!("{count} configurations over {} classes, {} failures", pool.len(), r.failures));
    Ok(r)
}
