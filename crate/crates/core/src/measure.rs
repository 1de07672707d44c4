//! The measure `μ_{N,β}` on cylinder sets, the existence criterion and the
//! partition function `ζ_N`.
//!
//! For `F ⊂ sS` finite,
//!
//! ```text
//! μ(Z_{s,F}) = N(s)^{-β} + Σ_{∅≠K⊆[F]} (-1)^{|K|} N(q_K)^{-β},   q_K = ⋁K,
//! ```
//!
//! with `N(∞)^{-β} = 0`. Only the classes `[F]` matter, and since
//! `Z_{s,F} = Z_{s,F'}` when `F'` is the set of minimal elements of `F`, the
//! sum is evaluated over minimal elements only. Subsets whose join is `∞`
//! are pruned together with all their supersets.
//!
//! When `β` is an integer every value is also available as an exact
//! rational.

use std::collections::HashMap;
use std::ops::{AddAssign, SubAssign};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rustc_hash::FxHashMap;

use crate::error::{Error, Result};
use crate::monoid::{Element, Monoid};
use crate::quotient::{Join, NClass};
use crate::scale::{rational_to_f64, Scale};
use crate::special::riemann_zeta;

/// A value of `μ` or of a related inclusion–exclusion sum.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasureValue {
    pub value: f64,
    /// Exact value, present when `β` is an integer.
    pub exact: Option<BigRational>,
}

/// `β` as an integer, when it is one of moderate size.
pub fn integral_beta(beta: f64) -> Option<i64> {
    (beta.fract() == 0.0 && beta.abs() <= 256.0).then_some(beta as i64)
}

/// `N^{-β}` in floating point.
pub fn weight(n: &BigRational, beta: f64) -> f64 {
    if beta == 0.0 {
        return 1.0;
    }
    rational_to_f64(n).powf(-beta)
}

/// `N^{-β}` exactly, for integer `β`.
pub fn weight_exact(n: &BigRational, beta: i64) -> BigRational {
    if beta >= 0 {
        num_traits::pow(n.recip(), beta as usize)
    } else {
        num_traits::pow(n.clone(), (-beta) as usize)
    }
}

/// Replaces `F` by the minimal elements of `{[s] ∨ f : f ∈ F} \ {∞}`.
pub fn reduce_to_minimal(scale: &Scale, base: &NClass, f: &[NClass]) -> Result<Vec<NClass>> {
    let mut joined: Vec<NClass> = Vec::with_capacity(f.len());
    for c in f {
        if let Join::Class(j) = scale.class_join(base, c)? {
            if !joined.contains(&j) {
                joined.push(j);
            }
        }
    }
    joined.sort();
    let mut minimal = Vec::with_capacity(joined.len());
    'outer: for (i, c) in joined.iter().enumerate() {
        for (j, d) in joined.iter().enumerate() {
            if i != j && d.n <= c.n && scale.class_leq(d, c)? {
                continue 'outer;
            }
        }
        minimal.push(c.clone());
    }
    Ok(minimal)
}

fn inclusion_exclusion<W, G>(scale: &Scale, base: &NClass, f: &[NClass], weigh: &G) -> Result<W>
where
    W: Clone + AddAssign + SubAssign,
    G: Fn(&NClass) -> W,
{
    fn rec<W, G>(
        scale: &Scale,
        f: &[NClass],
        start: usize,
        current: &NClass,
        odd: bool,
        acc: &mut W,
        weigh: &G,
    ) -> Result<()>
    where
        W: Clone + AddAssign + SubAssign,
        G: Fn(&NClass) -> W,
    {
        for j in start..f.len() {
            if let Join::Class(q) = scale.class_join(current, &f[j])? {
                // `odd` is the parity of |K| for K ending at j
                if odd {
                    *acc -= weigh(&q);
                } else {
                    *acc += weigh(&q);
                }
                rec(scale, f, j + 1, &q, !odd, acc, weigh)?;
            }
        }
        Ok(())
    }
    let f = reduce_to_minimal(scale, base, f)?;
    let mut acc = weigh(base);
    rec(scale, &f, 0, base, true, &mut acc, weigh)?;
    Ok(acc)
}

/// `μ(Z_{s,F})` in floating point over classes.
pub fn mu_classes_f64(scale: &Scale, beta: f64, base: &NClass, f: &[NClass]) -> Result<f64> {
    inclusion_exclusion(scale, base, f, &|c: &NClass| weight(&c.n, beta))
}

/// `μ(Z_{s,F})` exactly for integer `β`.
pub fn mu_classes_exact(
    scale: &Scale,
    beta: i64,
    base: &NClass,
    f: &[NClass],
) -> Result<BigRational> {
    inclusion_exclusion(scale, base, f, &|c: &NClass| weight_exact(&c.n, beta))
}

pub fn mu_classes(scale: &Scale, beta: f64, base: &NClass, f: &[NClass]) -> Result<MeasureValue> {
    match integral_beta(beta) {
        Some(b) => {
            let exact = mu_classes_exact(scale, b, base, f)?;
            Ok(MeasureValue {
                value: rational_to_f64(&exact),
                exact: Some(exact),
            })
        }
        None => Ok(MeasureValue {
            value: mu_classes_f64(scale, beta, base, f)?,
            exact: None,
        }),
    }
}

/// `μ(Z_{s,F})`. Every element of `F` must lie in `sS`.
///
/// The result is not clamped: a negative value shows that `μ_{N,β}` does
/// not exist.
pub fn mu_cylinder(scale: &Scale, beta: f64, s: &Element, f: &[Element]) -> Result<MeasureValue> {
    let m = scale.monoid();
    for t in f {
        if m.left_divide(s, t)?.is_none() {
            return Err(Error::InvalidElement(format!(
                "{} is not in {}S",
                m.render(t),
                m.render(s)
            )));
        }
    }
    let base = scale.n_class(s)?;
    let classes = f.iter().map(|t| scale.n_class(t)).collect::<Result<Vec<_>>>()?;
    mu_classes(scale, beta, &base, &classes)
}

/// `1 + Σ_{∅≠K⊆[F]} (-1)^{|K|} N(q_K)^{-β}`, i.e. `μ(Z_{e,F})`.
///
/// For a foundation set `F` this vanishes at `β = 1` exactly when the
/// KMS₁-state factors through the boundary quotient.
pub fn boundary_factor_check(scale: &Scale, beta: f64, f: &[Element]) -> Result<MeasureValue> {
    let classes = f.iter().map(|t| scale.n_class(t)).collect::<Result<Vec<_>>>()?;
    mu_classes(scale, beta, &scale.identity_class(), &classes)
}

/// Returns a class `[s]` with `N(s) ≤ probe_cutoff` that meets no element of
/// `F`, or `None` if every probed class meets some element (a necessary
/// condition for `F` to be a foundation set).
pub fn foundation_witness(
    scale: &Scale,
    f: &[Element],
    probe_cutoff: &BigRational,
) -> Result<Option<NClass>> {
    let classes = f.iter().map(|t| scale.n_class(t)).collect::<Result<Vec<_>>>()?;
    for s in scale.enumerate_classes(probe_cutoff)? {
        let mut meets = false;
        for c in &classes {
            if !scale.class_join(&s, c)?.is_infinite() {
                meets = true;
                break;
            }
        }
        if !meets {
            return Ok(Some(s));
        }
    }
    Ok(None)
}

pub fn foundation_candidate_check(
    scale: &Scale,
    f: &[Element],
    probe_cutoff: &BigRational,
) -> Result<bool> {
    Ok(foundation_witness(scale, f, probe_cutoff)?.is_none())
}

/// Interned classes with memoized joins, for loops that join the same
/// classes many times.
pub(crate) struct ClassArena<'a> {
    scale: &'a Scale,
    beta: f64,
    classes: Vec<NClass>,
    index: HashMap<NClass, u32>,
    joins: FxHashMap<(u32, u32), u32>,
    weights: Vec<f64>,
}

pub(crate) const INF: u32 = u32::MAX;

impl<'a> ClassArena<'a> {
    pub fn new(scale: &'a Scale, beta: f64) -> Self {
        ClassArena {
            scale,
            beta,
            classes: Vec::new(),
            index: HashMap::new(),
            joins: FxHashMap::default(),
            weights: Vec::new(),
        }
    }

    pub fn intern(&mut self, c: NClass) -> u32 {
        if let Some(&i) = self.index.get(&c) {
            return i;
        }
        let i = self.classes.len() as u32;
        self.weights.push(weight(&c.n, self.beta));
        self.index.insert(c.clone(), i);
        self.classes.push(c);
        i
    }

    pub fn class(&self, i: u32) -> &NClass {
        &self.classes[i as usize]
    }

    pub fn weight(&self, i: u32) -> f64 {
        self.weights[i as usize]
    }

    pub fn join(&mut self, i: u32, j: u32) -> Result<u32> {
        if i == j {
            return Ok(i);
        }
        let key = if i < j { (i, j) } else { (j, i) };
        if let Some(&r) = self.joins.get(&key) {
            return Ok(r);
        }
        let r = match self
            .scale
            .class_join(&self.classes[i as usize], &self.classes[j as usize])?
        {
            Join::Class(c) => self.intern(c),
            Join::Infinity => INF,
        };
        self.joins.insert(key, r);
        Ok(r)
    }

    pub fn leq(&mut self, i: u32, j: u32) -> Result<bool> {
        Ok(self.join(i, j)? == j)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExistenceVerdict {
    pub passed: bool,
    /// On failure, the set `[F]` with `μ(Z_{e,F}) < 0`.
    pub witness: Option<Vec<NClass>>,
    /// Value at the witness on failure, otherwise the smallest value seen.
    pub value: f64,
    pub exact_value: Option<BigRational>,
    pub subsets_checked: u64,
    /// The subset budget ran out before all antichains were checked.
    pub partial: bool,
}

/// Values this far below zero in floating point count as negative when no
/// exact value is available.
pub const NEGATIVITY_TOLERANCE: f64 = 1e-12;

/// Evaluates `μ(Z_{e,F})` for antichains `[F]` of classes `[t] > [e]` with
/// `N(t) ≤ class_cutoff` and `|F| ≤ max_size`, smallest sets first.
///
/// A failure is a proof that `μ_{N,β}` does not exist; for integer `β` it is
/// confirmed in exact arithmetic. A pass certifies only the checked range.
pub fn existence_check(
    scale: &Scale,
    beta: f64,
    class_cutoff: &BigRational,
    max_size: usize,
    budget: u64,
) -> Result<ExistenceVerdict> {
    let mut arena = ClassArena::new(scale, beta);
    let e = arena.intern(scale.identity_class());
    let candidates: Vec<u32> = scale
        .enumerate_classes(class_cutoff)?
        .into_iter()
        .map(|c| arena.intern(c))
        .filter(|&i| i != e)
        .collect();
    let k = candidates.len();
    let mut comparable = vec![false; k * k];
    for i in 0..k {
        for j in i + 1..k {
            let (a, b) = (candidates[i], candidates[j]);
            let c = arena.leq(a, b)? || arena.leq(b, a)?;
            comparable[i * k + j] = c;
            comparable[j * k + i] = c;
        }
    }

    struct Search<'s, 'a> {
        arena: &'s mut ClassArena<'a>,
        candidates: &'s [u32],
        comparable: &'s [bool],
        exact_beta: Option<i64>,
        budget: u64,
        checked: u64,
        min_value: f64,
        chosen: Vec<usize>,
        failure: Option<(Vec<usize>, f64, Option<BigRational>)>,
        exhausted: bool,
        /// `rows[q][j]` caches `q ∨ candidates[j]`; the right operand is
        /// always a candidate, so a dense row beats hashing.
        rows: Vec<Option<Box<[u32]>>>,
    }

    const UNSET: u32 = INF - 1;

    impl Search<'_, '_> {
        fn join(&mut self, q: u32, j: usize) -> Result<u32> {
            let k = self.candidates.len();
            let qi = q as usize;
            if qi >= self.rows.len() {
                self.rows.resize_with(qi + 1, || None);
            }
            let row = self.rows[qi].get_or_insert_with(|| vec![UNSET; k].into_boxed_slice());
            if row[j] != UNSET {
                return Ok(row[j]);
            }
            let r = self.arena.join(q, self.candidates[j])?;
            if let Some(row) = self.rows[qi].as_mut() {
                row[j] = r;
            }
            Ok(r)
        }

        // `terms` holds (join, |K| odd) for every nonempty K ⊆ chosen with finite join
        fn dfs(&mut self, start: usize, target: usize, terms: &[(u32, bool)], value: f64) -> Result<()> {
            let k = self.candidates.len();
            for j in start..k {
                if self.failure.is_some() || self.exhausted {
                    return Ok(());
                }
                if self.chosen.iter().any(|&i| self.comparable[i * k + j]) {
                    continue;
                }
                let f = self.candidates[j];
                let leaf = self.chosen.len() + 1 == target;
                let mut new_terms = Vec::new();
                let mut v = value - self.arena.weight(f);
                if !leaf {
                    new_terms.reserve(terms.len() * 2 + 1);
                    new_terms.extend_from_slice(terms);
                    new_terms.push((f, true));
                }
                for &(q, odd) in terms {
                    let r = self.join(q, j)?;
                    if r != INF {
                        // |K ∪ {f}| has the opposite parity of |K|
                        if odd {
                            v += self.arena.weight(r);
                        } else {
                            v -= self.arena.weight(r);
                        }
                        if !leaf {
                            new_terms.push((r, !odd));
                        }
                    }
                }
                self.chosen.push(j);
                if leaf {
                    self.checked += 1;
                    if self.checked > self.budget {
                        self.exhausted = true;
                    } else {
                        self.min_value = self.min_value.min(v);
                        if v < -NEGATIVITY_TOLERANCE {
                            self.confirm(v)?;
                        }
                    }
                } else {
                    self.dfs(j + 1, target, &new_terms, v)?;
                }
                self.chosen.pop();
            }
            Ok(())
        }

        fn confirm(&mut self, v: f64) -> Result<()> {
            let set: Vec<NClass> = self
                .chosen
                .iter()
                .map(|&i| self.arena.class(self.candidates[i]).clone())
                .collect();
            match self.exact_beta {
                Some(b) => {
                    let scale = self.arena.scale;
                    let exact = mu_classes_exact(scale, b, &scale.identity_class(), &set)?;
                    if exact.is_negative() {
                        self.failure = Some((self.chosen.clone(), v, Some(exact)));
                    }
                }
                None => self.failure = Some((self.chosen.clone(), v, None)),
            }
            Ok(())
        }
    }

    let mut search = Search {
        arena: &mut arena,
        candidates: &candidates,
        comparable: &comparable,
        exact_beta: integral_beta(beta),
        budget,
        checked: 0,
        min_value: 1.0,
        chosen: Vec::new(),
        failure: None,
        exhausted: false,
        rows: Vec::new(),
    };
    for target in 1..=max_size.min(k) {
        search.dfs(0, target, &[], 1.0)?;
        if search.failure.is_some() || search.exhausted {
            break;
        }
    }
    let checked = search.checked.min(budget);
    let partial = search.exhausted;
    let min_value = search.min_value;
    Ok(match search.failure.take() {
        Some((chosen, v, exact)) => ExistenceVerdict {
            passed: false,
            witness: Some(
                chosen
                    .iter()
                    .map(|&i| arena.class(candidates[i]).clone())
                    .collect(),
            ),
            value: exact.as_ref().map(rational_to_f64).unwrap_or(v),
            exact_value: exact,
            subsets_checked: checked,
            partial,
        },
        None => ExistenceVerdict {
            passed: true,
            witness: None,
            value: min_value,
            exact_value: None,
            subsets_checked: checked,
            partial,
        },
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ZetaValue {
    /// `Σ N(s)^{-β}` over classes with `N(s) ≤ cutoff`.
    pub partial: f64,
    pub closed_form: Option<f64>,
    pub classes: u64,
}

/// Partial sum of `ζ_N(β) = Σ_{[s]∈S/~N} N(s)^{-β}` over classes with
/// `N ≤ class_cutoff`, together with the closed form where known.
pub fn zeta_partial(scale: &Scale, beta: f64, class_cutoff: &BigRational) -> Result<ZetaValue> {
    let levels = scale.levels(class_cutoff)?;
    // smallest terms first
    let partial = levels
        .iter()
        .rev()
        .map(|l| l.size as f64 * weight(&l.n, beta))
        .sum();
    Ok(ZetaValue {
        partial,
        closed_form: zeta_closed(scale, beta),
        classes: levels.iter().map(|l| l.size).sum(),
    })
}

fn geometric(ratio: f64) -> Option<f64> {
    (ratio < 1.0).then(|| 1.0 / (1.0 - ratio))
}

/// `ζ_N(β)` in closed form, or `None` if the series diverges.
///
/// * `ax+b`: `Π_p (1 − p·w_p^{-β})^{-1}`, i.e. `ζ(β−1)` for `N(c,n) = n`;
/// * lamplighter: `(1 − 2w_x^{-β})^{-1}(1 − 2w_y^{-β})^{-1}`;
/// * `C₃`: `(1 − w^{-β})^{-2}`, times `(1 − w₃^{-β})^{-1}` if `w₃ > 1`;
/// * free abelian: `Π (1 − w_i^{-β})^{-1}` over weights `w_i > 1`;
/// * free monoid: `(1 − Σ w_i^{-β})^{-1}`.
pub fn zeta_closed(scale: &Scale, beta: f64) -> Option<f64> {
    let w: Vec<f64> = scale.raw_weights().iter().map(rational_to_f64).collect();
    let inv = |x: f64| x.powf(-beta);
    match scale.monoid() {
        Monoid::AxB { .. } => {
            if beta <= 2.0 {
                return None;
            }
            let mut z = riemann_zeta(beta - 1.0);
            for (p, wp) in scale.axb_overrides() {
                let p = p as f64;
                z *= (1.0 - p.powf(1.0 - beta)) * geometric(p * inv(rational_to_f64(&wp)))?;
            }
            Some(z)
        }
        Monoid::Lamplighter => Some(geometric(2.0 * inv(w[1]))? * geometric(2.0 * inv(w[2]))?),
        Monoid::C3 => {
            let z = geometric(inv(w[0]))?.powi(2);
            if w[2] > 1.0 {
                Some(z * geometric(inv(w[2]))?)
            } else {
                Some(z)
            }
        }
        Monoid::FreeAbelian { .. } => w
            .iter()
            .filter(|&&x| x > 1.0)
            .try_fold(1.0, |acc, &x| Some(acc * geometric(inv(x))?)),
        Monoid::FreeMonoid { alphabet } => {
            if *alphabet == 1 && w[0] == 1.0 {
                return Some(1.0);
            }
            if w.contains(&1.0) {
                return None;
            }
            geometric(w.iter().map(|&x| inv(x)).sum())
        }
    }
}

/// `Σ_{n ∈ ⟨I⟩} n·w_n^{-β}` for the `ax+b` scale restricted to `n` built from
/// the primes in `I` — the partition function of the hereditary submonoid
/// `N^{-1}(⟨I⟩)`.
pub fn axb_zeta_restricted_exact(scale: &Scale, primes: &[u64], beta: i64) -> Option<BigRational> {
    let mut z = BigRational::one();
    for &p in primes {
        let wp = scale.axb_prime_weight(p);
        let ratio = BigRational::from_integer(BigInt::from(p)) * weight_exact(&wp, beta);
        if ratio >= BigRational::one() {
            return None;
        }
        z *= (BigRational::one() - ratio).recip();
    }
    if z.is_zero() {
        None
    } else {
        Some(z)
    }
}
