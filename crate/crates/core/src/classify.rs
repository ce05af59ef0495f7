//! RVT words, EKR codes, and the classification of arm configurations.
//!
//! Every level l ≥ 2 of a configuration carries a vertical condition
//! ⟨z_l, z_{l-1}⟩ = 0 and one anchor condition ⟨z_l, x_{l-1} - x_{p-2}⟩ = 0
//! per earlier vertical level p. Anchors are numbered 1, 2, ... by increasing
//! vertical level; index 0 is the vertical hyperplane. A non-vertical segment
//! may only be tangent to anchors whose chain has not been broken, a vertical
//! one may meet any earlier anchor.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};
use crate::geometry::{dot, sub, Arm};
use crate::scalar::Real;

/// Default tolerance on condition residuals.
pub const DEFAULT_CLASSIFY_TOL: f64 = 1e-7;

/// One letter of an RVT word.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Letter {
    /// Regular.
    R,
    /// Vertical; the canonical form of T_0.
    V,
    /// Tangency to the single active anchor.
    T,
    /// Intersection of the listed hyperplanes (sorted; never exactly `[0]`).
    Sub(Vec<u8>),
}

impl Letter {
    fn rank_key(&self) -> u8 {
        match self {
            Letter::R => 0,
            Letter::V => 1,
            Letter::T => 2,
            Letter::Sub(_) => 3,
        }
    }

    /// Number of hyperplanes the letter lies in.
    pub fn depth(&self) -> usize {
        match self {
            Letter::R => 0,
            Letter::V | Letter::T => 1,
            Letter::Sub(s) => s.len(),
        }
    }

    pub fn is_vertical(&self) -> bool {
        match self {
            Letter::V => true,
            Letter::Sub(s) => s.first() == Some(&0),
            _ => false,
        }
    }

    /// Builds a subscripted letter, normalizing `{0}` to `V`.
    pub fn sub(mut s: Vec<u8>) -> Result<Letter> {
        s.sort_unstable();
        s.dedup();
        match s.as_slice() {
            [] => Err(Error::Parse("empty subscript set".into())),
            [0] => Ok(Letter::V),
            _ => Ok(Letter::Sub(s)),
        }
    }
}

impl PartialOrd for Letter {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Letter {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Letter::Sub(a), Letter::Sub(b)) => a.len().cmp(&b.len()).then_with(|| a.cmp(b)),
            _ => self.rank_key().cmp(&other.rank_key()),
        }
    }
}

fn subscript(s: &[u8]) -> String {
    let digits: String = s.iter().map(|d| d.to_string()).collect();
    if s.len() == 1 {
        format!("T_{digits}")
    } else {
        format!("T_{{{digits}}}")
    }
}

/// An RVT word; the first letter is always `R`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RvtWord {
    letters: Vec<Letter>,
}

impl RvtWord {
    pub fn new(letters: Vec<Letter>) -> Result<Self> {
        if letters.first() != Some(&Letter::R) {
            return Err(Error::Parse("an RVT word starts with R".into()));
        }
        Ok(Self { letters })
    }

    /// Parses `R`, `V`, `T`, `T0`, `T01`, `T_0`, `T_{01}` and `T{013}` letters.
    pub fn parse(text: &str) -> Result<Self> {
        let chars: Vec<char> = text.trim().chars().collect();
        let mut letters = Vec::new();
        let mut i = 0;
        while i < chars.len() {
            match chars[i] {
                'R' => letters.push(Letter::R),
                'V' => letters.push(Letter::V),
                'T' => {
                    let mut j = i + 1;
                    if j < chars.len() && chars[j] == '_' {
                        j += 1;
                    }
                    let braced = j < chars.len() && chars[j] == '{';
                    if braced {
                        j += 1;
                    }
                    let mut digits = Vec::new();
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        digits.push(chars[j] as u8 - b'0');
                        j += 1;
                        if !braced && chars.get(i + 1) == Some(&'_') {
                            // `T_0` takes a single digit without braces.
                            break;
                        }
                    }
                    if braced {
                        if j >= chars.len() || chars[j] != '}' || digits.is_empty() {
                            return Err(Error::Parse(format!("unterminated subscript in {text:?}")));
                        }
                        j += 1;
                    } else if chars.get(i + 1) == Some(&'_') && digits.is_empty() {
                        return Err(Error::Parse(format!("missing subscript in {text:?}")));
                    }
                    letters.push(if digits.is_empty() { Letter::T } else { Letter::sub(digits)? });
                    i = j;
                    continue;
                }
                c if c.is_whitespace() => {}
                c => return Err(Error::Parse(format!("unexpected character {c:?} in {text:?}"))),
            }
            i += 1;
        }
        if letters.is_empty() {
            return Err(Error::Parse("empty word".into()));
        }
        Self::new(letters)
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn depth(&self) -> usize {
        self.letters.iter().map(Letter::depth).max().unwrap_or(0)
    }

    /// Canonical spelling: `V` for verticals and `T{..}` for subscript sets.
    pub fn canonical(&self) -> String {
        self.letters
            .iter()
            .map(|l| match l {
                Letter::R => "R".to_string(),
                Letter::V => "V".to_string(),
                Letter::T => "T".to_string(),
                Letter::Sub(s) => format!("T{{{}}}", s.iter().map(|d| d.to_string()).collect::<String>()),
            })
            .collect()
    }

    /// Number of V and T letters (codimension of a depth-1 class).
    pub fn codimension(&self) -> Result<usize> {
        if self.depth() > 1 {
            return Err(Error::DepthExceeded(format!("{self} has depth {}", self.depth())));
        }
        Ok(self.letters.iter().filter(|l| matches!(l, Letter::V | Letter::T)).count())
    }

    /// Levels (1-based) and letter plans obtained by replaying the word.
    pub fn plans(&self) -> Result<Vec<LevelPlan>> {
        let mut ctx = Context::default();
        let mut plans = Vec::with_capacity(self.letters.len());
        for (idx, letter) in self.letters.iter().enumerate() {
            let level = idx + 1;
            if level == 1 {
                if letter != &Letter::R {
                    return Err(Error::InfeasibleLetter { level, reason: "first letter must be R".into() });
                }
                continue;
            }
            let plan = ctx.plan_for(level, letter)?;
            ctx.advance(level, plan.vertical, &plan.zero_anchors);
            plans.push(plan);
        }
        Ok(plans)
    }

    /// Replays the word and returns its canonical form (e.g. `T_1` with a
    /// single active anchor becomes `T`).
    pub fn canonicalize(&self) -> Result<Self> {
        let plans = self.plans()?;
        let mut letters = vec![Letter::R];
        letters.extend(plans.iter().map(|p| p.letter.clone()));
        Ok(Self { letters })
    }

    /// Words over R, V, T, or subscripted letters that replay consistently.
    pub fn is_admissible(&self) -> bool {
        self.canonicalize().map(|c| &c == self).unwrap_or(false)
    }
}

impl fmt::Display for RvtWord {
    /// Paper spelling: a vertical letter followed by a subscripted letter
    /// containing 0 is written `T_0`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, l) in self.letters.iter().enumerate() {
            let s = match l {
                Letter::R => "R".to_string(),
                Letter::T => "T".to_string(),
                Letter::V => {
                    let next_refs_zero = matches!(self.letters.get(i + 1), Some(Letter::Sub(s)) if s.first() == Some(&0));
                    if next_refs_zero { "T_0".to_string() } else { "V".to_string() }
                }
                Letter::Sub(s) => subscript(s),
            };
            f.write_str(&s)?;
        }
        Ok(())
    }
}

impl std::str::FromStr for RvtWord {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

/// Conditions a level of a word imposes, in terms of anchor levels.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelPlan {
    pub level: usize,
    pub letter: Letter,
    pub vertical: bool,
    /// Anchor levels p whose condition must vanish.
    pub zero_anchors: Vec<usize>,
    /// Anchor levels p whose condition must stay away from zero.
    pub nonzero_anchors: Vec<usize>,
}

/// Registry state while scanning a word or configuration from the left.
#[derive(Debug, Clone, Default)]
struct Context {
    verticals: Vec<usize>,
    active: Vec<usize>,
}

impl Context {
    fn anchor_index(&self, p: usize) -> u8 {
        (self.verticals.iter().position(|&v| v == p).expect("anchor is a vertical level") + 1) as u8
    }

    fn monitored(&self, vertical: bool) -> &[usize] {
        if vertical {
            &self.verticals
        } else {
            &self.active
        }
    }

    fn letter_for(&self, vertical: bool, satisfied: &[usize]) -> Letter {
        let idx: Vec<u8> = satisfied.iter().map(|&p| self.anchor_index(p)).collect();
        if vertical {
            if idx.is_empty() {
                Letter::V
            } else {
                Letter::Sub(std::iter::once(0).chain(idx).collect())
            }
        } else if idx.is_empty() {
            Letter::R
        } else if self.active.len() == 1 {
            Letter::T
        } else {
            Letter::Sub(idx)
        }
    }

    fn plan_for(&self, level: usize, letter: &Letter) -> Result<LevelPlan> {
        let infeasible = |reason: String| Error::InfeasibleLetter { level, reason };
        let (vertical, zero): (bool, Vec<usize>) = match letter {
            Letter::R => (false, vec![]),
            Letter::V => (true, vec![]),
            Letter::T => {
                if self.active.len() != 1 {
                    return Err(infeasible(format!("T needs exactly one active anchor, found {}", self.active.len())));
                }
                (false, self.active.clone())
            }
            Letter::Sub(s) => {
                let vertical = s.first() == Some(&0);
                let mut zero = Vec::new();
                for &a in s.iter().filter(|&&a| a > 0) {
                    let p = *self
                        .verticals
                        .get(usize::from(a) - 1)
                        .ok_or_else(|| infeasible(format!("anchor {a} does not exist")))?;
                    if !vertical && !self.active.contains(&p) {
                        return Err(infeasible(format!("anchor {a} is not active")));
                    }
                    zero.push(p);
                }
                (vertical, zero)
            }
        };
        let canonical = self.letter_for(vertical, &zero);
        if &canonical != letter && !(matches!(letter, Letter::Sub(_)) && canonical == Letter::T) {
            return Err(infeasible(format!("letter {letter:?} is spelled {canonical:?} here")));
        }
        let nonzero = self.monitored(vertical).iter().copied().filter(|p| !zero.contains(p)).collect();
        Ok(LevelPlan { level, letter: canonical, vertical, zero_anchors: zero, nonzero_anchors: nonzero })
    }

    fn advance(&mut self, level: usize, vertical: bool, satisfied: &[usize]) {
        let mut active: Vec<usize> = satisfied.to_vec();
        if vertical {
            self.verticals.push(level);
            active.push(level);
        }
        active.sort_unstable();
        active.dedup();
        self.active = active;
    }
}

/// Mormul's EKR code j_1 ... j_k.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EkrCode {
    js: Vec<usize>,
}

impl EkrCode {
    /// Validates j_1 = 1 and j_{l+1} ≤ 1 + max(j_1..j_l).
    pub fn new(js: Vec<usize>) -> Result<Self> {
        let mut max = 0;
        for (pos, &j) in js.iter().enumerate() {
            if j < 1 || j > max + 1 {
                return Err(Error::RuleViolation { position: pos + 1 });
            }
            max = max.max(j);
        }
        if js.is_empty() {
            return Err(Error::Parse("empty EKR code".into()));
        }
        Ok(Self { js })
    }

    pub fn parse(text: &str) -> Result<Self> {
        let js = text
            .trim()
            .chars()
            .map(|c| c.to_digit(10).map(|d| d as usize).ok_or_else(|| Error::Parse(format!("bad EKR digit {c:?}"))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(js)
    }

    pub fn js(&self) -> &[usize] {
        &self.js
    }

    pub fn len(&self) -> usize {
        self.js.len()
    }

    pub fn is_empty(&self) -> bool {
        self.js.is_empty()
    }

    pub fn depth(&self) -> usize {
        self.js.iter().copied().max().unwrap_or(1) - 1
    }
}

impl fmt::Display for EkrCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.js.iter().all(|&j| j < 10) {
            for j in &self.js {
                write!(f, "{j}")?;
            }
            Ok(())
        } else {
            let parts: Vec<String> = self.js.iter().map(ToString::to_string).collect();
            f.write_str(&parts.join("."))
        }
    }
}

/// Residuals and letter at one level of a configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelReport {
    pub level: usize,
    pub vertical_residual: f64,
    /// (anchor index, anchor level, residual) for every monitored anchor.
    pub anchors: Vec<(u8, usize, f64)>,
    pub letter: Letter,
}

/// Result of classifying one configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassReport {
    pub word: RvtWord,
    pub ekr: Option<EkrCode>,
    pub levels: Vec<LevelReport>,
    pub tol: f64,
}

/// Value of the anchor condition ⟨x_l - x_{l-1}, x_{l-1} - x_{p-2}⟩.
pub fn anchor_residual<T: Real>(c: &Arm<T>, level: usize, anchor_level: usize) -> T {
    dot(&c.segment(level), &sub(c.point(level - 1), c.point(anchor_level - 2)))
}

/// Applies the condition registry to every level without any depth restriction.
pub fn classify_raw<T: Real>(c: &Arm<T>, tol: f64) -> ClassReport {
    let tol_t = T::lit(tol);
    let mut ctx = Context::default();
    let mut letters = vec![Letter::R];
    let mut levels = Vec::new();
    for level in 2..=c.k() {
        let c0 = c.a_fn(level - 1).expect("level in range");
        let vertical = c0.abs() <= tol_t;
        let monitored = ctx.monitored(vertical).to_vec();
        let residuals: Vec<(usize, T)> = monitored.iter().map(|&p| (p, anchor_residual(c, level, p))).collect();
        let satisfied: Vec<usize> = residuals.iter().filter(|(_, r)| r.abs() <= tol_t).map(|&(p, _)| p).collect();
        let letter = ctx.letter_for(vertical, &satisfied);
        levels.push(LevelReport {
            level,
            vertical_residual: c0.to_f64().unwrap_or(f64::NAN),
            anchors: residuals
                .iter()
                .map(|&(p, r)| (ctx.anchor_index(p), p, r.to_f64().unwrap_or(f64::NAN)))
                .collect(),
            letter: letter.clone(),
        });
        ctx.advance(level, vertical, &satisfied);
        letters.push(letter);
    }
    ClassReport { word: RvtWord { letters }, ekr: None, levels, tol }
}

fn ekr_of_letters(w: &RvtWord) -> EkrCode {
    let js = w
        .letters
        .iter()
        .map(|l| match l {
            Letter::V => 2,
            l if l.is_vertical() => 3,
            _ => 1,
        })
        .collect();
    EkrCode { js }
}

/// Depth-1 classification for any k; configurations meeting two
/// hyperplanes at one level are reported as [`Error::DepthExceeded`].
pub fn classify_depth1<T: Real>(c: &Arm<T>, tol: f64) -> Result<ClassReport> {
    let mut report = classify_raw(c, tol);
    if report.word.depth() > 1 {
        return Err(Error::DepthExceeded(format!("configuration has class {}", report.word)));
    }
    report.ekr = Some(ekr_of_letters(&report.word));
    Ok(report)
}

/// Full classification for k ≤ 4, including subscripted letters.
pub fn classify_k4<T: Real>(c: &Arm<T>, tol: f64) -> Result<ClassReport> {
    if c.k() > 4 {
        return Err(Error::DepthExceeded(format!("subscripted classification needs k ≤ 4, got {}", c.k())));
    }
    let mut report = classify_raw(c, tol);
    if report.word.depth() > 1 && !enumerate_words(c.k(), 2)?.contains(&report.word) {
        let level = report.levels.iter().find(|l| l.letter.depth() > 1).map_or(0, |l| l.level);
        return Err(Error::UnclassifiableDegeneracy { level, pattern: report.word.canonical() });
    }
    report.ekr = Some(ekr_of_letters(&report.word));
    Ok(report)
}

/// [`classify_k4`] for k ≤ 4 and [`classify_depth1`] otherwise.
pub fn classify<T: Real>(c: &Arm<T>, tol: f64) -> Result<ClassReport> {
    if c.k() <= 4 {
        classify_k4(c, tol)
    } else {
        classify_depth1(c, tol)
    }
}

/// EKR code of a configuration.
pub fn ekr_from_config<T: Real>(c: &Arm<T>, tol: f64) -> Result<EkrCode> {
    Ok(classify(c, tol)?.ekr.expect("classification attaches the code"))
}

/// EKR code of an RVT word.
pub fn rvt_to_ekr(w: &RvtWord) -> Result<EkrCode> {
    match w.depth() {
        0 | 1 => {}
        2 if w.len() <= 4 => {
            if !enumerate_words(w.len(), 2)?.contains(w) {
                return Err(Error::DepthExceeded(format!("{w} is not an enumerated class")));
            }
        }
        d => return Err(Error::DepthExceeded(format!("{w} has depth {d} at k = {}", w.len()))),
    }
    Ok(ekr_of_letters(w))
}

/// Depth-2 words for k ≤ 4 beyond the depth-1 grammar, in the listing order.
pub const DEPTH2_WORDS_K3: [&str; 1] = ["RT_0T_{01}"];

/// Depth-2 words for k = 4.
pub const DEPTH2_WORDS_K4: [&str; 11] = [
    "RRT_0T_{01}",
    "RVT_0T_{01}",
    "RVRT_{01}",
    "RVTT_{01}",
    "RT_0T_{01}R",
    "RT_0T_{01}V",
    "RT_0T_{01}T_1",
    "RT_0T_{01}T_2",
    "RT_0T_{01}T_{01}",
    "RT_0T_{01}T_{02}",
    "RT_0T_{01}T_{12}",
];

fn depth1_words(k: usize) -> Vec<RvtWord> {
    let mut out = Vec::new();
    let mut stack = vec![vec![Letter::R]];
    while let Some(w) = stack.pop() {
        if w.len() == k {
            out.push(RvtWord { letters: w });
            continue;
        }
        let last = w.last().expect("non-empty");
        for next in [Letter::R, Letter::V, Letter::T] {
            if next == Letter::T && last == &Letter::R {
                continue;
            }
            let mut n = w.clone();
            n.push(next);
            stack.push(n);
        }
    }
    out.sort();
    out
}

/// All words of length k up to the given depth, sorted with R < V < T < T_S.
pub fn enumerate_words(k: usize, depth_max: usize) -> Result<Vec<RvtWord>> {
    if k == 0 {
        return Err(Error::ArmTooShort(0));
    }
    let mut words = depth1_words(k);
    match depth_max {
        1 => {}
        2 if k <= 4 => {
            let extra: &[&str] = match k {
                3 => &DEPTH2_WORDS_K3,
                4 => &DEPTH2_WORDS_K4,
                _ => &[],
            };
            for w in extra {
                words.push(RvtWord::parse(w).expect("listed words parse"));
            }
            words.sort();
        }
        d => return Err(Error::DepthExceeded(format!("enumeration up to depth {d} is not available for k = {k}"))),
    }
    Ok(words)
}

/// EKR codes of length k up to the given depth, in increasing order.
pub fn enumerate_ekr(k: usize, depth_max: usize) -> Vec<EkrCode> {
    let mut out = Vec::new();
    let mut stack = vec![(vec![1usize], 1usize)];
    while let Some((js, max)) = stack.pop() {
        if js.len() == k {
            out.push(EkrCode { js });
            continue;
        }
        for j in 1..=(max + 1).min(depth_max + 1) {
            let mut n = js.clone();
            n.push(j);
            stack.push((n, max.max(j)));
        }
    }
    out.sort();
    out
}

/// RVT words making up an EKR class.
pub fn ekr_to_rvt_words(e: &EkrCode, k: usize) -> Result<Vec<RvtWord>> {
    if e.len() != k {
        return Err(Error::LengthMismatch { expected: k, found: e.len() });
    }
    match e.depth() {
        0 | 1 => {
            let mut words = vec![Vec::new()];
            let mut i = 0;
            while i < k {
                if e.js[i] == 2 {
                    let gap_end = (i + 1..k).find(|&t| e.js[t] == 2).unwrap_or(k);
                    let gap = gap_end - i - 1;
                    let mut next = Vec::new();
                    for w in &words {
                        for l in 0..=gap {
                            let mut n: Vec<Letter> = w.clone();
                            n.push(Letter::V);
                            n.extend(std::iter::repeat_n(Letter::T, l));
                            n.extend(std::iter::repeat_n(Letter::R, gap - l));
                            next.push(n);
                        }
                    }
                    words = next;
                    i = gap_end;
                } else {
                    for w in &mut words {
                        w.push(Letter::R);
                    }
                    i += 1;
                }
            }
            let mut out: Vec<RvtWord> = words.into_iter().map(|letters| RvtWord { letters }).collect();
            out.sort();
            Ok(out)
        }
        2 if k <= 4 => Ok(enumerate_words(k, 2)?
            .into_iter()
            .filter(|w| ekr_of_letters(w) == *e)
            .collect()),
        d => Err(Error::DepthExceeded(format!("EKR code {e} has depth {d} at k = {k}"))),
    }
}

/// Codimension ν + Σ l_λ of a depth-1 class.
pub fn word_codimension(w: &RvtWord) -> Result<usize> {
    w.codimension()
}
