//! Constructive sampling of configurations inside a prescribed RVT class.
//!
//! Each segment is drawn as a Gaussian vector projected onto the orthogonal
//! complement of the normals its letter requires, then accepted only if every
//! monitored condition that must not vanish clears the margin.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::classify::{anchor_residual, LevelPlan, RvtWord};
use crate::error::{Error, Result};
use crate::geometry::{dot, sub};
use crate::ArmConfig;

/// Default lower bound on conditions that must not vanish.
pub const DEFAULT_MARGIN: f64 = 0.05;
/// Default number of draws per segment before giving up.
pub const DEFAULT_BUDGET: usize = 10_000;
/// Number of fresh starts of a whole configuration after a segment exhausts its budget.
pub const DEFAULT_RESTARTS: usize = 16;
/// Projected draws shorter than this are discarded as degenerate.
const DEGENERATE_NORM: f64 = 1e-6;

/// Parameters of a sampling run.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSpec {
    pub word: RvtWord,
    pub m: usize,
    pub k: usize,
    pub seed: u64,
    pub margin: f64,
    pub count: usize,
    pub budget: usize,
}

impl SampleSpec {
    pub fn new(word: RvtWord, m: usize, seed: u64, count: usize) -> Self {
        let k = word.len();
        Self { word, m, k, seed, margin: DEFAULT_MARGIN, count, budget: DEFAULT_BUDGET }
    }

    pub fn with_margin(mut self, margin: f64) -> Self {
        self.margin = margin;
        self
    }
}

/// Segment draw statistics of a sampling run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SampleStats {
    pub draws: usize,
    pub accepted: usize,
}

impl SampleStats {
    pub fn acceptance(&self) -> f64 {
        if self.draws == 0 {
            0.0
        } else {
            self.accepted as f64 / self.draws as f64
        }
    }
}

/// Uniformly distributed unit vector in R^n.
pub fn random_unit<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let norm = dot(&v, &v).sqrt();
        if norm > DEGENERATE_NORM {
            return v.iter().map(|x| x / norm).collect();
        }
    }
}

/// Random rotation of R^n (Haar measure on SO(n)), as a list of rows.
pub fn random_rotation<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<Vec<f64>> {
    let g = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let (mut q, r) = qr.unpack();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    if q.determinant() < 0.0 {
        q.column_mut(0).neg_mut();
    }
    (0..n).map(|i| q.row(i).iter().copied().collect()).collect()
}

/// Projects `v` onto the orthogonal complement of `normals`.
fn project_out(v: &[f64], normals: &[Vec<f64>]) -> Result<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for n in normals {
        let mut u = n.clone();
        for b in &basis {
            let c = dot(&u, b);
            u.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
        }
        let norm = dot(&u, &u).sqrt();
        let scale = dot(n, n).sqrt();
        if norm <= 1e-9 * scale.max(1.0) {
            return Err(Error::InfeasibleLetter { level: 0, reason: "dependent condition normals".into() });
        }
        basis.push(u.iter().map(|x| x / norm).collect());
    }
    let mut out = v.to_vec();
    for b in &basis {
        let c = dot(&out, b);
        out.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
    }
    // A second pass removes the rounding left by the first.
    for b in &basis {
        let c = dot(&out, b);
        out.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
    }
    Ok(out)
}

fn draw_segment(
    rng: &mut ChaCha8Rng,
    arm: &ArmConfig,
    plan: &LevelPlan,
    margin: f64,
    budget: usize,
    stats: &mut SampleStats,
) -> Result<Option<Vec<f64>>> {
    let l = plan.level;
    let prev = arm.point(l - 1).to_vec();
    let z_prev = arm.segment(l - 1);
    let anchor_dir = |p: usize| sub(&prev, arm.point(p - 2));
    let mut normals = Vec::new();
    if plan.vertical {
        normals.push(z_prev.clone());
    }
    normals.extend(plan.zero_anchors.iter().map(|&p| anchor_dir(p)));
    if normals.len() > arm.m() {
        return Err(Error::InfeasibleLetter {
            level: l,
            reason: format!("{} conditions leave no direction on S^{}", normals.len(), arm.m()),
        });
    }
    for _ in 0..budget {
        stats.draws += 1;
        let g: Vec<f64> = (0..=arm.m()).map(|_| rng.sample(StandardNormal)).collect();
        let projected = match project_out(&g, &normals) {
            Ok(v) => v,
            Err(_) => return Ok(None),
        };
        let norm = dot(&projected, &projected).sqrt();
        if norm < DEGENERATE_NORM {
            continue;
        }
        let z: Vec<f64> = projected.iter().map(|x| x / norm).collect();
        if !plan.vertical && dot(&z, &z_prev).abs() < margin {
            continue;
        }
        if plan.nonzero_anchors.iter().any(|&p| dot(&z, &anchor_dir(p)).abs() < margin) {
            continue;
        }
        stats.accepted += 1;
        return Ok(Some(z));
    }
    Ok(None)
}

fn sample_one(
    rng: &mut ChaCha8Rng,
    m: usize,
    plans: &[LevelPlan],
    k: usize,
    margin: f64,
    budget: usize,
    stats: &mut SampleStats,
) -> Result<ArmConfig> {
    let mut last_level = 1;
    for _ in 0..=DEFAULT_RESTARTS {
        let x0: Vec<f64> = (0..=m).map(|_| rng.random_range(-1.0..=1.0)).collect();
        let z1 = random_unit(rng, m + 1);
        let x1: Vec<f64> = x0.iter().zip(&z1).map(|(a, b)| a + b).collect();
        let mut arm = ArmConfig::from_parts_unchecked(m, vec![x0, x1]);
        let mut complete = true;
        for plan in plans.iter().take(k - 1) {
            match draw_segment(rng, &arm, plan, margin, budget, stats)? {
                Some(z) => {
                    let next = arm.point(plan.level - 1).iter().zip(&z).map(|(a, b)| a + b).collect();
                    arm.push_unchecked(next);
                }
                None => {
                    last_level = plan.level;
                    complete = false;
                    break;
                }
            }
        }
        if complete {
            return Ok(arm);
        }
    }
    Err(Error::RejectionBudgetExceeded { level: last_level, budget })
}

/// Samples `spec.count` configurations of class `spec.word` and reports draw counts.
pub fn sample_with_stats(spec: &SampleSpec) -> Result<(Vec<ArmConfig>, SampleStats)> {
    if spec.m < 2 {
        return Err(Error::DimensionTooSmall(spec.m));
    }
    if spec.k != spec.word.len() {
        return Err(Error::LengthMismatch { expected: spec.k, found: spec.word.len() });
    }
    if spec.word.depth() > 1 && spec.k > 4 {
        return Err(Error::DepthExceeded(format!("cannot sample {} at k = {}", spec.word, spec.k)));
    }
    let plans = spec.word.plans()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut stats = SampleStats::default();
    let mut out = Vec::with_capacity(spec.count);
    for _ in 0..spec.count {
        out.push(sample_one(&mut rng, spec.m, &plans, spec.k, spec.margin, spec.budget, &mut stats)?);
    }
    Ok((out, stats))
}

/// Configurations lying in the class of `spec.word`.
pub fn sample_in_class(spec: &SampleSpec) -> Result<Vec<ArmConfig>> {
    Ok(sample_with_stats(spec)?.0)
}

/// Cartan configurations with every |𝒜_j| ≥ margin.
pub fn sample_cartan(m: usize, k: usize, seed: u64, margin: f64, count: usize) -> Result<Vec<ArmConfig>> {
    let word = RvtWord::parse(&"R".repeat(k))?;
    sample_in_class(&SampleSpec::new(word, m, seed, count).with_margin(margin))
}

/// Largest |residual| of the conditions a word requires to vanish at `c`,
/// and smallest |residual| of those it requires to stay away from zero.
pub fn condition_extremes(word: &RvtWord, c: &ArmConfig) -> Result<(f64, f64)> {
    let mut max_zero = 0.0f64;
    let mut min_nonzero = f64::INFINITY;
    for plan in word.plans()? {
        let l = plan.level;
        let a = c.a_fn(l - 1)?.abs();
        if plan.vertical {
            max_zero = max_zero.max(a);
        } else {
            min_nonzero = min_nonzero.min(a);
        }
        for &p in &plan.zero_anchors {
            max_zero = max_zero.max(anchor_residual(c, l, p).abs());
        }
        for &p in &plan.nonzero_anchors {
            min_nonzero = min_nonzero.min(anchor_residual(c, l, p).abs());
        }
    }
    Ok((max_zero, min_nonzero))
}
