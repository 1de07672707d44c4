//! The extreme KMS values `φ′(v_a v_b*) = μ(Ω^{a,b}_triv)` and
//! `φ″(v_a v_b*) = μ(Ω^{a,b}_fix)`, and the uniqueness verdict built on them.
//!
//! `Ω_triv` is the union of the cylinders `Z_s` over
//! `B^{a,b} = {[s] : s' = at = bt for some s' ~N s}`, so at a finite stage
//!
//! ```text
//! μ(Ω_triv) ≈ 1 − μ(Z_{e, B∩F}).
//! ```
//!
//! `Ω_fix` is approximated along a ladder of finite `∨`-closed class sets
//! `[F]` by `Σ_{[s]∈T_{[F]}} μ(Z_{s, F_s})`, where `F_s` are the elements of
//! `[F]` strictly above `[s]` and `T_{[F]}` is the set of `[s]` with
//! `t = a⁻¹[s] ∨ b⁻¹[s] < ∞` and `a⁻¹[r], b⁻¹[r] ≰ t` for `r ∈ F_s`. For
//! kernel `a, b` and action-invariant `[F]` this is `a⁻¹[s] = b⁻¹[s]`.
//!
//! Only the minimal elements of `F_s` matter for both the measure and the
//! membership test, and in a level-complete rung these are the lifts of
//! `[s]` to the minimal levels above its own. On `ax+b` and the lamplighter
//! the kernel acts transitively on each level, preserving the rung and the
//! measure, so one representative per level suffices.
//!
//! The values are net limits without a rate: sequences are reported along
//! the ladder, never extrapolated.

use std::collections::{BTreeSet, HashMap, HashSet};

use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gf2::Gf2Poly;
use crate::measure::{integral_beta, mu_classes, weight_exact, MeasureValue};
use crate::monoid::{Element, Monoid};
use crate::quotient::{Join, Level, NClass};
use crate::scale::{int, rational_to_f64, Scale};

/// A finite `∨`-closed class set containing `[e]`, given as whole levels.
#[derive(Clone, Debug)]
pub struct Rung {
    pub levels: Vec<Level>,
}

impl Rung {
    pub fn class_count(&self) -> u64 {
        self.levels.iter().map(|l| l.size).sum()
    }

    /// The classes, level by level. Only for small rungs.
    pub fn classes(&self, scale: &Scale) -> Result<Vec<NClass>> {
        let mut out = Vec::new();
        for l in &self.levels {
            out.extend(scale.level_classes(l)?);
        }
        Ok(out)
    }
}

/// An increasing sequence of rungs.
#[derive(Clone, Debug)]
pub struct TruncationLadder {
    pub rungs: Vec<Rung>,
}

fn level_sort(scale: &Scale, levels: &mut [Level]) {
    let m = scale.monoid();
    levels.sort_by_cached_key(|l| (l.n.clone(), m.render(&l.key)));
}

impl TruncationLadder {
    /// The default ladder of height `height`:
    ///
    /// * `ax+b`: rung `n` holds the levels `m | n!`;
    /// * lamplighter: rung `n` holds the levels `(x, y)` with `x, y ≤ n`;
    /// * otherwise: rung `k` is the `∨`-closure of the classes with
    ///   `N ≤ w^k`, `w` the smallest generator weight above `1`.
    pub fn default_for(scale: &Scale, height: usize) -> Result<Self> {
        match scale.monoid() {
            Monoid::AxB { .. } => Self::axb_factorial(scale, height),
            Monoid::Lamplighter => Self::lamplighter(scale, height),
            _ => Self::bounded(scale, height),
        }
    }

    pub fn axb_factorial(scale: &Scale, height: usize) -> Result<Self> {
        if !matches!(scale.monoid(), Monoid::AxB { .. }) {
            return Err(Error::Usage("factorial ladder needs the ax+b family".into()));
        }
        if height > 20 {
            return Err(Error::Unsupported("n! overflows beyond n = 20".into()));
        }
        let mut rungs = Vec::new();
        let mut fact = 1u64;
        for n in 1..=height as u64 {
            fact *= n;
            let mut levels: Vec<Level> = divisors(fact)
                .into_iter()
                .map(|m| scale.level_for_key(&Element::axb(0, m)))
                .collect::<Result<_>>()?;
            level_sort(scale, &mut levels);
            rungs.push(Rung { levels });
        }
        Ok(TruncationLadder { rungs })
    }

    pub fn lamplighter(scale: &Scale, height: usize) -> Result<Self> {
        if *scale.monoid() != Monoid::Lamplighter {
            return Err(Error::Usage("lamplighter ladder needs the lamplighter family".into()));
        }
        let mut rungs = Vec::new();
        for n in 1..=height as u32 {
            let mut levels = Vec::new();
            for x in 0..=n {
                for y in 0..=n {
                    levels.push(scale.level_for_key(&Element::lamp(Gf2Poly::zero(), x, y))?);
                }
            }
            level_sort(scale, &mut levels);
            rungs.push(Rung { levels });
        }
        Ok(TruncationLadder { rungs })
    }

    pub fn bounded(scale: &Scale, height: usize) -> Result<Self> {
        let base = scale
            .raw_weights()
            .iter()
            .filter(|w| !w.is_one())
            .min()
            .cloned();
        let mut rungs = Vec::new();
        for k in 1..=height {
            let bound = match &base {
                Some(w) => num_traits::pow(w.clone(), k),
                None => BigRational::one(),
            };
            let closed = join_closure(scale, scale.enumerate_classes(&bound)?)?;
            let mut levels: Vec<Level> = closed
                .into_iter()
                .map(|c| Level {
                    key: c.rep,
                    n: c.n,
                    size: 1,
                })
                .collect();
            level_sort(scale, &mut levels);
            rungs.push(Rung { levels });
        }
        Ok(TruncationLadder { rungs })
    }
}

fn divisors(n: u64) -> Vec<u64> {
    let mut out: Vec<u64> = (1..)
        .take_while(|d| d * d <= n)
        .filter(|d| n % d == 0)
        .flat_map(|d| [d, n / d])
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

const MAX_CLOSURE: usize = 20_000;

/// Smallest `∨`-closed set containing the given classes.
pub fn join_closure(scale: &Scale, classes: Vec<NClass>) -> Result<Vec<NClass>> {
    let mut set: BTreeSet<NClass> = classes.into_iter().collect();
    let mut frontier: Vec<NClass> = set.iter().cloned().collect();
    while !frontier.is_empty() {
        let all: Vec<NClass> = set.iter().cloned().collect();
        let mut next = Vec::new();
        for f in &frontier {
            for c in &all {
                if let Join::Class(j) = scale.class_join(f, c)? {
                    if set.insert(j.clone()) {
                        next.push(j);
                    }
                }
            }
        }
        if set.len() > MAX_CLOSURE {
            return Err(Error::Unsupported("join closure exceeds the supported size".into()));
        }
        frontier = next;
    }
    Ok(set.into_iter().collect())
}

/// Whether the class set of a rung is closed under finite joins. Checked on
/// level keys: the join of two classes from given levels always lands in
/// the level of the join of the keys.
pub fn verify_join_closed(scale: &Scale, rung: &Rung) -> Result<bool> {
    let keys: HashSet<&Element> = rung.levels.iter().map(|l| &l.key).collect();
    for (i, l1) in rung.levels.iter().enumerate() {
        for l2 in &rung.levels[i + 1..] {
            let c1 = scale.n_class(&l1.key)?;
            let c2 = scale.n_class(&l2.key)?;
            if let Join::Class(j) = scale.class_join(&c1, &c2)? {
                if !keys.contains(&scale.level_of(&j)) {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Whether `s·[F] ⊆ [F]` for each given `s`.
pub fn verify_action_invariant(scale: &Scale, f: &[NClass], actors: &[&Element]) -> Result<bool> {
    let set: HashSet<&NClass> = f.iter().collect();
    for s in actors {
        for c in f {
            if !set.contains(&scale.class_act(s, c)?) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Rung levels with, for each level, the minimal rung levels strictly above.
struct RungIndex<'a> {
    rung: &'a Rung,
    above: Vec<Vec<usize>>,
    top: Vec<bool>,
}

impl<'a> RungIndex<'a> {
    fn new(scale: &Scale, rung: &'a Rung) -> Result<Self> {
        let levels = &rung.levels;
        let mut above = Vec::with_capacity(levels.len());
        for (i, l) in levels.iter().enumerate() {
            let mut strict = Vec::new();
            for (j, m) in levels.iter().enumerate() {
                if i != j && m.n >= l.n && scale.level_leq(&l.key, &m.key)? {
                    strict.push(j);
                }
            }
            let mut minimal = Vec::new();
            for &j in &strict {
                let mut is_min = true;
                for &k in &strict {
                    if k != j
                        && levels[k].n <= levels[j].n
                        && scale.level_leq(&levels[k].key, &levels[j].key)?
                    {
                        is_min = false;
                        break;
                    }
                }
                if is_min {
                    minimal.push(j);
                }
            }
            above.push(minimal);
        }
        let top = above.iter().map(|a| a.is_empty()).collect();
        Ok(RungIndex { rung, above, top })
    }

    /// Minimal elements of `F_s` for a class `s` of level `i`.
    fn covers(&self, scale: &Scale, i: usize, s: &NClass) -> Result<Vec<NClass>> {
        let mut out = Vec::new();
        for &j in &self.above[i] {
            out.extend(scale.lifts(s, &self.rung.levels[j])?);
        }
        Ok(out)
    }
}

/// Which description of `T_{[F]}` to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TPath {
    /// `a⁻¹[s] = b⁻¹[s]`; needs kernel `a, b` and an action-invariant `[F]`.
    Fast,
    /// `t = a⁻¹[s] ∨ b⁻¹[s]` with the exclusion clauses; needs
    /// `[a] ∨ [b] ≤ [s]` on `[F]`.
    General,
}

fn in_t(
    scale: &Scale,
    path: TPath,
    a: &Element,
    b: &Element,
    s: &NClass,
    covers: &[NClass],
) -> Result<bool> {
    let ia = scale.class_act_inv(a, s)?;
    let ib = scale.class_act_inv(b, s)?;
    if path == TPath::Fast {
        return Ok(ia == ib);
    }
    let Join::Class(t) = scale.class_join(&ia, &ib)? else {
        return Ok(false);
    };
    for r in covers {
        if scale.class_leq(&scale.class_act_inv(a, r)?, &t)?
            || scale.class_leq(&scale.class_act_inv(b, r)?, &t)?
        {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Minimal elements of `{c ∈ F : c > s}`.
fn covers_in(scale: &Scale, f: &[NClass], s: &NClass) -> Result<Vec<NClass>> {
    let mut strict = Vec::new();
    for c in f {
        if c != s && scale.class_leq(s, c)? {
            strict.push(c.clone());
        }
    }
    let mut out = Vec::new();
    for c in &strict {
        let mut minimal = true;
        for d in &strict {
            if d != c && d.n <= c.n && scale.class_leq(d, c)? {
                minimal = false;
                break;
            }
        }
        if minimal {
            out.push(c.clone());
        }
    }
    Ok(out)
}

/// `T^{a,b}_{[F]}` for an explicit finite class set, in the order of `f`.
pub fn t_set_for_f(
    scale: &Scale,
    a: &Element,
    b: &Element,
    f: &[NClass],
    path: TPath,
) -> Result<Vec<NClass>> {
    match path {
        TPath::Fast => {
            if !scale.ker_contains(a) || !scale.ker_contains(b) {
                return Err(Error::Usage("the fast path needs kernel elements".into()));
            }
            if !verify_action_invariant(scale, f, &[a, b])? {
                return Err(Error::Usage("the class set is not invariant under a and b".into()));
            }
        }
        TPath::General => {
            let ab = scale
                .class_join(&scale.n_class(a)?, &scale.n_class(b)?)?
                .class()
                .ok_or_else(|| Error::Usage("aS ∩ bS is empty".into()))?;
            for s in f {
                if !scale.class_leq(&ab, s)? {
                    return Err(Error::Usage(format!(
                        "{} is not above [a] ∨ [b]",
                        scale.render_class(s)
                    )));
                }
            }
        }
    }
    let mut out = Vec::new();
    for s in f {
        let covers = if path == TPath::General {
            covers_in(scale, f, s)?
        } else {
            Vec::new()
        };
        if in_t(scale, path, a, b, s, &covers)? {
            out.push(s.clone());
        }
    }
    Ok(out)
}

/// `B^{a,b}` up to `class_cutoff`, found by scanning the elements `t` of word
/// length at most `depth` for `at = bt`.
pub fn b_set(
    scale: &Scale,
    a: &Element,
    b: &Element,
    class_cutoff: &BigRational,
    depth: usize,
) -> Result<Vec<NClass>> {
    let m = scale.monoid();
    let mut out = BTreeSet::new();
    for t in m.enumerate(depth) {
        let at = m.multiply(a, &t)?;
        if at == m.multiply(b, &t)? && scale.n_value(&at)? <= *class_cutoff {
            out.insert(scale.n_class(&at)?);
        }
    }
    Ok(out.into_iter().collect())
}

fn one_minus(v: MeasureValue) -> MeasureValue {
    MeasureValue {
        value: 1.0 - v.value,
        exact: v.exact.map(|e| BigRational::one() - e),
    }
}

/// `μ(Ω_triv)` at a finite stage: `1 − μ(Z_{e, B})` with `B` from
/// [`b_set`].
pub fn mu_omega_triv(
    scale: &Scale,
    beta: f64,
    a: &Element,
    b: &Element,
    class_cutoff: &BigRational,
    depth: usize,
) -> Result<MeasureValue> {
    let bs = b_set(scale, a, b, class_cutoff, depth)?;
    Ok(one_minus(mu_classes(scale, beta, &scale.identity_class(), &bs)?))
}

/// One rung of a pair report.
#[derive(Clone, Debug, PartialEq)]
pub struct RungValue {
    pub f_size: u64,
    pub mu_triv: MeasureValue,
    pub mu_fix: MeasureValue,
    /// `|T_{[F]}|`.
    pub t_size: u64,
    /// Classes of `T_{[F]}` in the maximal levels of the rung.
    pub top_slice: u64,
}

impl RungValue {
    pub fn gap(&self) -> f64 {
        self.mu_fix.value - self.mu_triv.value
    }

    pub fn exact_gap(&self) -> Option<BigRational> {
        Some(self.mu_fix.exact.as_ref()? - self.mu_triv.exact.as_ref()?)
    }
}

struct Acc {
    value: f64,
    exact: Option<BigRational>,
}

impl Acc {
    fn new(beta: f64) -> Self {
        Acc {
            value: 0.0,
            exact: integral_beta(beta).map(|_| BigRational::zero()),
        }
    }

    fn add(&mut self, v: &MeasureValue, times: u64) {
        self.value += v.value * times as f64;
        if let (Some(acc), Some(e)) = (self.exact.as_mut(), v.exact.as_ref()) {
            *acc += e * int(times);
        }
    }

    fn finish(self) -> MeasureValue {
        match self.exact {
            Some(e) => MeasureValue {
                value: rational_to_f64(&e),
                exact: Some(e),
            },
            None => MeasureValue {
                value: self.value,
                exact: None,
            },
        }
    }
}

fn rung_value(
    scale: &Scale,
    beta: f64,
    a: &Element,
    b: &Element,
    rung: &Rung,
    b_classes: &[NClass],
) -> Result<RungValue> {
    let index = RungIndex::new(scale, rung)?;
    let kernel_pair = scale.ker_contains(a) && scale.ker_contains(b);
    let homogeneous = kernel_pair && scale.has_multi_class_levels();
    let path = if kernel_pair {
        let invariant = homogeneous || verify_action_invariant(scale, &rung.classes(scale)?, &[a, b])?;
        if invariant {
            TPath::Fast
        } else {
            TPath::General
        }
    } else {
        TPath::General
    };
    let ab = scale
        .class_join(&scale.n_class(a)?, &scale.n_class(b)?)?
        .class();
    let mut fix = Acc::new(beta);
    let (mut t_size, mut top_slice) = (0u64, 0u64);
    if let Some(ab) = ab {
        for (i, level) in rung.levels.iter().enumerate() {
            let reps = if homogeneous {
                vec![(NClass {
                    rep: level.key.clone(),
                    n: level.n.clone(),
                }, level.size)]
            } else {
                scale.level_classes(level)?.into_iter().map(|c| (c, 1)).collect()
            };
            for (s, mult) in reps {
                if path == TPath::General && !scale.class_leq(&ab, &s)? {
                    continue;
                }
                let covers = index.covers(scale, i, &s)?;
                if in_t(scale, path, a, b, &s, &covers)? {
                    fix.add(&mu_classes(scale, beta, &s, &covers)?, mult);
                    t_size += mult;
                    if index.top[i] {
                        top_slice += mult;
                    }
                }
            }
        }
    }
    let keys: HashSet<&Element> = rung.levels.iter().map(|l| &l.key).collect();
    let inside: Vec<NClass> = b_classes
        .iter()
        .filter(|c| keys.contains(&scale.level_of(c)))
        .cloned()
        .collect();
    let mu_triv = one_minus(mu_classes(scale, beta, &scale.identity_class(), &inside)?);
    Ok(RungValue {
        f_size: rung.class_count(),
        mu_triv,
        mu_fix: fix.finish(),
        t_size,
        top_slice,
    })
}

/// `μ(Ω_fix)` and `μ(Ω_triv)` along a ladder. `depth` bounds the scan for
/// `B^{a,b}`.
pub fn mu_omega_fix(
    scale: &Scale,
    beta: f64,
    a: &Element,
    b: &Element,
    ladder: &TruncationLadder,
    depth: usize,
) -> Result<Vec<RungValue>> {
    let cutoff = ladder
        .rungs
        .iter()
        .flat_map(|r| r.levels.iter().map(|l| l.n.clone()))
        .max()
        .unwrap_or_else(BigRational::one);
    let b_classes = b_set(scale, a, b, &cutoff, depth)?;
    ladder
        .rungs
        .iter()
        .map(|r| rung_value(scale, beta, a, b, r, &b_classes))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PairVerdict {
    EqualAtTolerance,
    Separated,
    Inconclusive,
}

impl PairVerdict {
    pub fn name(self) -> &'static str {
        match self {
            PairVerdict::EqualAtTolerance => "equal-at-tolerance",
            PairVerdict::Separated => "separated",
            PairVerdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PairReport {
    pub a: Element,
    pub b: Element,
    pub rungs: Vec<RungValue>,
    pub verdict: PairVerdict,
    /// The gaps at the last two rungs agree to within the tolerance.
    pub stabilized: bool,
}

impl PairReport {
    pub fn final_gap(&self) -> f64 {
        self.rungs.last().map(RungValue::gap).unwrap_or(0.0)
    }
}

pub fn pair_report(
    scale: &Scale,
    beta: f64,
    a: &Element,
    b: &Element,
    ladder: &TruncationLadder,
    depth: usize,
    tolerance: f64,
) -> Result<PairReport> {
    let rungs = mu_omega_fix(scale, beta, a, b, ladder, depth)?;
    let gaps: Vec<f64> = rungs.iter().map(RungValue::gap).collect();
    let stabilized = match gaps.as_slice() {
        [.., x, y] => (x - y).abs() <= tolerance,
        _ => false,
    };
    let last = gaps.last().copied().unwrap_or(0.0);
    let verdict = if last.abs() <= tolerance {
        PairVerdict::EqualAtTolerance
    } else if stabilized {
        PairVerdict::Separated
    } else {
        PairVerdict::Inconclusive
    };
    Ok(PairReport {
        a: a.clone(),
        b: b.clone(),
        rungs,
        verdict,
        stabilized,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Unique,
    NotUnique,
    Inconclusive,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::Unique => "unique",
            Verdict::NotUnique => "not unique",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct UniquenessReport {
    pub beta: f64,
    pub tolerance: f64,
    pub pairs: Vec<PairReport>,
    pub verdict: Verdict,
    /// Index into `pairs` of the pair with the largest final gap.
    pub witness: Option<usize>,
    /// Set when some gap sequence has not stabilized.
    pub caveat: Option<&'static str>,
}

/// Distinct kernel pairs `a < b` from [`Scale::kernel_sample`].
pub fn kernel_pairs(scale: &Scale, k: usize) -> Vec<(Element, Element)> {
    let sample = scale.kernel_sample(k);
    let mut out = Vec::new();
    for (i, a) in sample.iter().enumerate() {
        for b in &sample[i + 1..] {
            out.push((a.clone(), b.clone()));
        }
    }
    out
}

/// The default tolerance: `1e-9` when the values are exact rationals,
/// `1e-6` otherwise.
pub fn default_tolerance(beta: f64) -> f64 {
    if integral_beta(beta).is_some() {
        1e-9
    } else {
        1e-6
    }
}

/// Pair reports for the given pairs (computed in parallel, reported in
/// input order) and the combined verdict.
pub fn uniqueness_report(
    scale: &Scale,
    beta: f64,
    pairs: &[(Element, Element)],
    ladder: &TruncationLadder,
    depth: usize,
    tolerance: f64,
) -> Result<UniquenessReport> {
    let reports: Vec<PairReport> = pairs
        .par_iter()
        .map(|(a, b)| pair_report(scale, beta, a, b, ladder, depth, tolerance))
        .collect::<Result<_>>()?;
    let verdict = if reports.iter().any(|r| r.verdict == PairVerdict::Separated) {
        Verdict::NotUnique
    } else if reports.iter().all(|r| r.verdict == PairVerdict::EqualAtTolerance) {
        Verdict::Unique
    } else {
        Verdict::Inconclusive
    };
    let witness = reports
        .iter()
        .enumerate()
        .filter(|(_, r)| r.final_gap().abs() > tolerance)
        .max_by(|x, y| x.1.final_gap().total_cmp(&y.1.final_gap()))
        .map(|(i, _)| i);
    let caveat = reports
        .iter()
        .any(|r| !r.stabilized)
        .then_some("certificate, not proof");
    Ok(UniquenessReport {
        beta,
        tolerance,
        pairs: reports,
        verdict,
        witness,
        caveat,
    })
}

/// Uniqueness over the kernel pairs of `kernel_sample(depth)`, on the default
/// ladder of the given height. A KMS_β-state must exist (see
/// [`crate::measure::existence_check`]); since `1` is isolated in `N(S)` for
/// every family here, kernel pairs suffice.
pub fn uniqueness_verdict(
    scale: &Scale,
    beta: f64,
    depth: usize,
    ladder_height: usize,
    tolerance: f64,
) -> Result<UniquenessReport> {
    let ladder = TruncationLadder::default_for(scale, ladder_height)?;
    let pairs = kernel_pairs(scale, depth);
    uniqueness_report(scale, beta, &pairs, &ladder, depth, tolerance)
}

/// Outcome of checking the generalized-scale axioms on a finite range.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GsVerdict {
    pub passed: bool,
    /// Axioms (1)–(4) in order: kernel equals core, `n` classes at level
    /// `n`, equal `N` means equivalent or disjoint, every `s` meets every
    /// level.
    pub axioms: [bool; 4],
    pub integer_valued: bool,
    /// First failure, with the axiom number.
    pub failure: Option<(usize, String)>,
}

const GS_SCAN_DEPTH: usize = 4;

/// Checks the generalized-scale axioms on classes with `N ≤ cutoff`.
pub fn gs_check(scale: &Scale, cutoff: u64) -> Result<GsVerdict> {
    let integer_valued = scale.raw_weights().iter().all(|w| w.is_integer());
    let mut failures: Vec<(usize, String)> = Vec::new();
    let mut axioms = [true; 4];
    if !integer_valued {
        return Ok(GsVerdict {
            passed: false,
            axioms: [false; 4],
            integer_valued,
            failure: Some((0, "the scale is not integer-valued".into())),
        });
    }
    let m = scale.monoid();
    let bound = int(cutoff);
    let elements: Vec<Element> = m
        .enumerate(GS_SCAN_DEPTH)
        .into_iter()
        .filter(|s| scale.n_value(s).map(|n| n <= bound).unwrap_or(false))
        .collect();

    // (1) kernel = core
    'one: for s in &elements {
        let meets_all = elements
            .iter()
            .map(|t| m.right_lcm(s, t).map(|r| r.is_some()))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .all(|x| x);
        let kernel = scale.ker_contains(s);
        if kernel != meets_all {
            axioms[0] = false;
            failures.push((
                1,
                if kernel {
                    format!("kernel element {} is not in the core", m.render(s))
                } else {
                    format!("{} meets every element but N > 1", m.render(s))
                },
            ));
            break 'one;
        }
    }

    let classes = scale.enumerate_classes(&bound)?;
    let mut by_value: HashMap<BigRational, Vec<NClass>> = HashMap::new();
    for c in &classes {
        by_value.entry(c.n.clone()).or_default().push(c.clone());
    }
    let mut values: Vec<&BigRational> = by_value.keys().collect();
    values.sort();

    // (2) |N^{-1}(n)/~N| = n
    for v in &values {
        let count = by_value[*v].len() as u64;
        if int(count) != **v {
            axioms[1] = false;
            failures.push((2, format!("level N = {v} has {count} classes")));
            break;
        }
    }

    // (3) equal N: equivalent or disjoint
    'three: for v in &values {
        let group = &by_value[*v];
        for (i, c) in group.iter().enumerate() {
            for d in &group[i + 1..] {
                if !scale.class_join(c, d)?.is_infinite() {
                    axioms[2] = false;
                    failures.push((
                        3,
                        format!(
                            "{} and {} have equal N, meet, and are inequivalent",
                            scale.render_class(c),
                            scale.render_class(d)
                        ),
                    ));
                    break 'three;
                }
            }
        }
    }

    // (4) every s meets some t at every level
    'four: for s in &classes {
        for v in &values {
            let mut met = false;
            for t in &by_value[*v] {
                if !scale.class_join(s, t)?.is_infinite() {
                    met = true;
                    break;
                }
            }
            if !met {
                axioms[3] = false;
                failures.push((4, format!("{} meets no class with N = {v}", scale.render_class(s))));
                break 'four;
            }
        }
    }

    failures.sort_by_key(|f| f.0);
    Ok(GsVerdict {
        passed: failures.is_empty(),
        axioms,
        integer_valued,
        failure: failures.into_iter().next(),
    })
}

fn level_with_value(scale: &Scale, n: u64) -> Result<Vec<NClass>> {
    let target = int(n);
    let mut out = Vec::new();
    for l in scale.levels(&target)? {
        if l.n == target {
            out.extend(scale.level_classes(&l)?);
        }
    }
    Ok(out)
}

/// `(|B^{a,b}_n|/n, |T^{a,b}_n|/n)` for a generalized scale, with
/// `T_n = {[s] : N(s) = n, a⁻¹[s] = b⁻¹[s]}`; `depth` bounds the scan for
/// `B`. Refuses unless the axioms hold up to `n`.
pub fn gs_ratios(
    scale: &Scale,
    a: &Element,
    b: &Element,
    n: u64,
    depth: usize,
) -> Result<(BigRational, BigRational)> {
    let check = gs_check(scale, n.max(2))?;
    if !check.passed {
        let (k, why) = check.failure.unwrap_or_default();
        return Err(Error::Usage(format!(
            "not a generalized scale (axiom {k}): {why}"
        )));
    }
    if !scale.ker_contains(a) || !scale.ker_contains(b) {
        return Err(Error::Usage("the ratio criterion is for kernel pairs".into()));
    }
    let level = level_with_value(scale, n)?;
    let bs: HashSet<NClass> = b_set(scale, a, b, &int(n), depth)?.into_iter().collect();
    let mut t = 0u64;
    let mut bn = 0u64;
    for s in &level {
        if scale.class_act_inv(a, s)? == scale.class_act_inv(b, s)? {
            t += 1;
        }
        if bs.contains(s) {
            bn += 1;
        }
    }
    Ok((BigRational::new(bn.into(), n.into()), BigRational::new(t.into(), n.into())))
}

/// `ζ_I^{-1} Σ_{n∈⟨I⟩, n ≤ cutoff} n^{-β}|B_n|` and the same with `T_n` on
/// `ax+b` with integer `β` — the generalized-scale expressions for `φ′` and
/// `φ″` restricted to `N^{-1}(⟨I⟩)`.
pub fn axb_gs_values(
    scale: &Scale,
    beta: i64,
    a: &Element,
    b: &Element,
    primes: &[u64],
    cutoff: u64,
    depth: usize,
) -> Result<(BigRational, BigRational)> {
    if !matches!(scale.monoid(), Monoid::AxB { .. }) {
        return Err(Error::Usage("generalized-scale sums are implemented for ax+b".into()));
    }
    let zeta = crate::measure::axb_zeta_restricted_exact(scale, primes, beta)
        .ok_or_else(|| Error::Usage("restricted partition function diverges".into()))?;
    let bs: HashSet<NClass> = b_set(scale, a, b, &int(cutoff), depth)?.into_iter().collect();
    let (mut triv, mut fix) = (BigRational::zero(), BigRational::zero());
    for n in 1..=cutoff {
        let mut rest = n;
        for p in primes {
            while rest % p == 0 {
                rest /= p;
            }
        }
        if rest != 1 {
            continue;
        }
        let w = weight_exact(&scale.axb_level_value(n), beta);
        let (mut bn, mut tn) = (0u64, 0u64);
        for c in 0..n {
            let s = scale.n_class(&Element::axb(c, n))?;
            if scale.class_act_inv(a, &s)? == scale.class_act_inv(b, &s)? {
                tn += 1;
            }
            if bs.contains(&s) {
                bn += 1;
            }
        }
        triv += &w * int(bn);
        fix += &w * int(tn);
    }
    Ok((triv / &zeta, fix / &zeta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scale::rational;

    fn axb() -> Scale {
        Scale::standard(Monoid::axb()).unwrap()
    }

    fn lamp() -> Scale {
        Scale::standard(Monoid::Lamplighter).unwrap()
    }

    fn k(c: u64) -> Element {
        Element::axb(c, 1)
    }

    fn g(bits: u64) -> Element {
        Element::lamp(Gf2Poly::from_bits(bits), 0, 0)
    }

    #[test]
    fn b_set_examples() {
        let s = axb();
        assert!(b_set(&s, &k(0), &k(2), &int(50), 4).unwrap().is_empty());
        let same = b_set(&s, &k(1), &k(1), &int(4), 3).unwrap();
        assert!(same.contains(&s.n_class(&k(1)).unwrap()));
        assert!(same.iter().all(|c| c.n <= int(4)));
        let c3 = Scale::standard(Monoid::C3).unwrap();
        let x3 = |j| Element::c3(0, 0, j);
        assert!(b_set(&c3, &x3(1), &x3(3), &int(64), 4).unwrap().is_empty());
    }

    #[test]
    fn triv_examples() {
        let s = axb();
        let v = mu_omega_triv(&s, 3.0, &k(0), &k(2), &int(100), 4).unwrap();
        assert_eq!(v.exact, Some(BigRational::zero()));
        let v = mu_omega_triv(&s, 3.0, &k(1), &k(1), &int(100), 2).unwrap();
        assert_eq!(v.exact, Some(BigRational::one()));
    }

    #[test]
    fn t_set_examples() {
        let s = axb();
        let mut f = Vec::new();
        for n in 1..=4 {
            f.extend(s.level_classes(&s.level_for_key(&Element::axb(0, n)).unwrap()).unwrap());
        }
        let t = t_set_for_f(&s, &k(0), &k(2), &f, TPath::Fast).unwrap();
        let expected: Vec<NClass> = [(0, 1), (0, 2), (1, 2)]
            .iter()
            .map(|&(c, n)| s.n_class(&Element::axb(c, n)).unwrap())
            .collect();
        assert_eq!(t, expected);
        assert_eq!(t_set_for_f(&s, &k(3), &k(3), &f, TPath::Fast).unwrap(), f);
        let half = vec![s.n_class(&Element::axb(1, 2)).unwrap()];
        assert!(t_set_for_f(&s, &k(0), &k(1), &half, TPath::Fast).is_err());
    }

    #[test]
    fn fast_and_general_paths_agree() {
        for (s, pairs, ladder) in [
            (
                axb(),
                vec![(k(0), k(2)), (k(1), k(7)), (k(0), k(6))],
                TruncationLadder::axb_factorial(&axb(), 4).unwrap(),
            ),
            (
                lamp(),
                vec![(g(0), g(0b1)), (g(0b10), g(0b100)), (g(0), g(0b11))],
                TruncationLadder::lamplighter(&lamp(), 2).unwrap(),
            ),
        ] {
            for rung in &ladder.rungs {
                let f = rung.classes(&s).unwrap();
                assert!(verify_join_closed(&s, rung).unwrap());
                for (a, b) in &pairs {
                    assert_eq!(
                        t_set_for_f(&s, a, b, &f, TPath::Fast).unwrap(),
                        t_set_for_f(&s, a, b, &f, TPath::General).unwrap()
                    );
                }
            }
        }
    }

    #[test]
    fn fix_examples() {
        let s = axb();
        let ladder = TruncationLadder::axb_factorial(&s, 5).unwrap();
        let same = mu_omega_fix(&s, 3.0, &k(4), &k(4), &ladder, 2).unwrap();
        assert!(same.iter().all(|r| r.mu_fix.exact == Some(BigRational::one())));
        let beta1 = mu_omega_fix(&s, 1.0, &k(0), &k(2), &ladder, 3).unwrap();
        assert_eq!(beta1[1].mu_fix.exact, Some(BigRational::one()));
        for r in &beta1[3..] {
            assert_eq!(r.mu_fix.exact, Some(BigRational::zero()));
            assert_eq!(r.top_slice, 0);
        }
        // levels 2,3,5 are in 5!; the product (3/4)(8/9)(24/25) is 1/ζ̂
        let beta3 = mu_omega_fix(&s, 3.0, &k(0), &k(2), &ladder, 3).unwrap();
        let expected = rational(5, 4) * rational(3, 4) * rational(8, 9) * rational(24, 25);
        assert_eq!(beta3[4].mu_fix.exact, Some(expected));
    }

    #[test]
    fn verdict_examples() {
        let s = axb();
        let unique = uniqueness_verdict(&s, 1.0, 4, 6, 1e-9).unwrap();
        assert_eq!(unique.verdict, Verdict::Unique);
        let not = uniqueness_verdict(&s, 3.0, 3, 6, 1e-9).unwrap();
        assert_eq!(not.verdict, Verdict::NotUnique);
        let w = &not.pairs[not.witness.unwrap()];
        assert!(w.final_gap() > 0.1);
        let l = uniqueness_verdict(&lamp(), 1.0, 3, 4, 1e-9).unwrap();
        assert_eq!(l.verdict, Verdict::Unique);
        assert!(l.pairs.iter().all(|p| p.rungs.last().unwrap().top_slice == 0));
    }

    #[test]
    fn trivial_kernel_is_vacuously_unique() {
        let s = Scale::standard(Monoid::FreeMonoid { alphabet: 2 }).unwrap();
        let r = uniqueness_verdict(&s, 1.0, 3, 3, 1e-9).unwrap();
        assert!(r.pairs.is_empty());
        assert_eq!(r.verdict, Verdict::Unique);
    }

    #[test]
    fn c3_kernel_pairs() {
        let s = Scale::standard(Monoid::C3).unwrap();
        let ladder = TruncationLadder::bounded(&s, 4).unwrap();
        for rung in &ladder.rungs {
            assert!(verify_join_closed(&s, rung).unwrap());
        }
        let even = pair_report(&s, 2.0, &Element::c3(0, 0, 0), &Element::c3(0, 0, 2), &ladder, 3, 1e-9)
            .unwrap();
        assert!(even.rungs.iter().all(|r| r.mu_fix.exact == Some(BigRational::one())));
        let odd = pair_report(&s, 2.0, &Element::c3(0, 0, 0), &Element::c3(0, 0, 1), &ladder, 3, 1e-9)
            .unwrap();
        assert!(odd.final_gap() > 0.0 && odd.final_gap() < 1.0);
    }

    #[test]
    fn gs_ratio_examples() {
        let s = axb();
        let r = |n| gs_ratios(&s, &k(0), &k(2), n, 3).unwrap();
        assert_eq!(r(1), (BigRational::zero(), BigRational::one()));
        assert_eq!(r(2), (BigRational::zero(), BigRational::one()));
        assert_eq!(r(3), (BigRational::zero(), BigRational::zero()));
        assert_eq!(r(4), (BigRational::zero(), BigRational::zero()));
        assert_eq!(gs_ratios(&s, &k(5), &k(5), 6, 3).unwrap().1, BigRational::one());
        assert!(gs_ratios(&lamp(), &g(0), &g(1), 2, 3).is_err());
    }

    #[test]
    fn gs_check_examples() {
        assert!(gs_check(&axb(), 20).unwrap().passed);
        let l = gs_check(&lamp(), 8).unwrap();
        assert!(!l.passed);
        assert_eq!(l.failure.unwrap().0, 2);
        assert!(!l.axioms[1]);
        let free = Scale::standard(Monoid::FreeMonoid { alphabet: 2 }).unwrap();
        assert!(gs_check(&free, 16).unwrap().passed);
    }

    #[test]
    fn gs_values_match_rungs() {
        let s = axb();
        let ladder = TruncationLadder::axb_factorial(&s, 8).unwrap();
        let rungs = mu_omega_fix(&s, 3.0, &k(1), &k(3), &ladder, 3).unwrap();
        let (triv, fix) = axb_gs_values(&s, 3, &k(1), &k(3), &[2, 3, 5, 7], 100, 3).unwrap();
        let last = rungs.last().unwrap();
        assert_eq!(last.mu_fix.exact, Some(fix));
        assert_eq!(last.mu_triv.exact, Some(triv));
    }
}
