//! Spanning elements of `C*(S)`, the dynamics `σ^N`, and KMS, ground and
//! KMS∞ states.
//!
//! A [`SpanElement`] is a finite combination of monomials `v_s v_t*`. Products
//! reduce by `v_t* v_a = v_{t⁻¹r} v_{a⁻¹r}*` where `tS ∩ aS = rS` (and `0`
//! when the ideals are disjoint).
//!
//! In the finite-type regime `ζ_N(β) < ∞` the KMS_β-state attached to a
//! trace `τ` on `C*(ker N)` is
//!
//! ```text
//! φ(v_s v_t*) = N(s)^{-β}/ζ_N(β) · Σ_{[x]: [sx]=[tx]} N(x)^{-β} τ(v_{q_x} v_{p_x}*),
//! ```
//!
//! with `sx·p_x = tx·q_x`, `p_x, q_x ∈ ker N`. [`Truncation`] evaluates this
//! over the classes with `N(x)` at most a cutoff and normalizes by the partial
//! sum of `ζ_N` at the same cutoff.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::Gf2Poly;
use crate::measure::{weight, zeta_closed};
use crate::monoid::{Element, Monoid};
use crate::quotient::Level;
use crate::scale::Scale;
use crate::special::riemann_zeta;

/// `Σ c·v_s v_t*`, keyed by `(s, t)`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SpanElement {
    terms: BTreeMap<(Element, Element), Complex64>,
}

/// `(v_s v_t*)(v_a v_b*)` as a single monomial, or `None` for zero.
pub fn mul_spanning(
    m: &Monoid,
    s: &Element,
    t: &Element,
    a: &Element,
    b: &Element,
) -> Result<Option<(Element, Element)>> {
    let Some(r) = m.right_lcm(t, a)? else {
        return Ok(None);
    };
    let inconsistent = || Error::Inconsistency("right LCM is not a common multiple".into());
    let left = m.left_divide(t, &r)?.ok_or_else(inconsistent)?;
    let right = m.left_divide(a, &r)?.ok_or_else(inconsistent)?;
    Ok(Some((m.multiply(s, &left)?, m.multiply(b, &right)?)))
}

impl SpanElement {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one(m: &Monoid) -> Self {
        Self::monomial(m.identity(), m.identity())
    }

    /// `v_s v_t*`
    pub fn monomial(s: Element, t: Element) -> Self {
        Self::term(Complex64::new(1.0, 0.0), s, t)
    }

    pub fn term(c: Complex64, s: Element, t: Element) -> Self {
        let mut x = Self::zero();
        x.add_term(c, s, t);
        x
    }

    pub fn add_term(&mut self, c: Complex64, s: Element, t: Element) {
        let entry = self.terms.entry((s, t)).or_insert(Complex64::new(0.0, 0.0));
        *entry += c;
        if *entry == Complex64::new(0.0, 0.0) {
            self.terms.retain(|_, v| *v != Complex64::new(0.0, 0.0));
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Element, &Element, Complex64)> {
        self.terms.iter().map(|((s, t), c)| (s, t, *c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (s, t, c) in other.terms() {
            out.add_term(c, s.clone(), t.clone());
        }
        out
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        let mut out = Self::zero();
        for (s, t, d) in self.terms() {
            out.add_term(c * d, s.clone(), t.clone());
        }
        out
    }

    pub fn product(&self, other: &Self, m: &Monoid) -> Result<Self> {
        let mut out = Self::zero();
        for (s, t, c) in self.terms() {
            for (a, b, d) in other.terms() {
                if let Some((u, v)) = mul_spanning(m, s, t, a, b)? {
                    out.add_term(c * d, u, v);
                }
            }
        }
        Ok(out)
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zero();
        for (s, t, c) in self.terms() {
            out.add_term(c.conj(), t.clone(), s.clone());
        }
        out
    }

    /// `σ^N_{iβ}`: each term is multiplied by `(N(s)/N(t))^{-β}`.
    pub fn apply_dynamics(&self, scale: &Scale, beta: f64) -> Result<Self> {
        let mut out = Self::zero();
        for (s, t, c) in self.terms() {
            let f = weight(&scale.n_value(s)?, beta) / weight(&scale.n_value(t)?, beta);
            out.add_term(c * f, s.clone(), t.clone());
        }
        Ok(out)
    }

    /// The conditional expectation onto `C*(ker N)`: keeps the terms with both
    /// legs in the kernel.
    pub fn conditional_expectation(&self, scale: &Scale) -> Self {
        let mut out = Self::zero();
        for (s, t, c) in self.terms() {
            if scale.ker_contains(s) && scale.ker_contains(t) {
                out.add_term(c, s.clone(), t.clone());
            }
        }
        out
    }

    pub fn is_kernel_supported(&self, scale: &Scale) -> bool {
        self.terms()
            .all(|(s, t, _)| scale.ker_contains(s) && scale.ker_contains(t))
    }

    /// Applies a linear functional given on monomials.
    pub fn evaluate<F>(&self, mut on_monomial: F) -> Result<Complex64>
    where
        F: FnMut(&Element, &Element) -> Result<Complex64>,
    {
        let mut acc = Complex64::new(0.0, 0.0);
        for (s, t, c) in self.terms() {
            acc += c * on_monomial(s, t)?;
        }
        Ok(acc)
    }
}

/// A trace on `C*(ker N)`, given by its values `τ(v_q v_p*)` on kernel
/// elements.
pub trait Trace: Sync {
    fn eval(&self, q: &Element, p: &Element) -> Result<Complex64>;
}

/// The built-in traces.
///
/// * `Character { z }`: `τ(v_k v_l*) = z^{k−l}` for a kernel `≅ Z₊`, `|z| = 1`
///   (on a free abelian kernel of higher rank, `k` is the coordinate sum).
/// * `Fourier { coeffs }`: `τ(v_k v_l*) = c_{k−l}` with `c_{−k} = c̄_k` and
///   `c_k = 0` beyond the listed coefficients; `c₀` must be `1`.
/// * `LampCharacter { signs }`: the character of `G = GF(2)[T]` sending `T^i`
///   to `signs[i]` (`+1` beyond the list).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum TraceSpec {
    Character { z: [f64; 2] },
    Fourier { coeffs: Vec<[f64; 2]> },
    LampCharacter { signs: Vec<i8> },
}

impl TraceSpec {
    pub fn point(z: Complex64) -> Self {
        TraceSpec::Character { z: [z.re, z.im] }
    }

    /// The trace of the uniform measure on the circle: `c_k = δ_{k,0}`.
    pub fn haar() -> Self {
        TraceSpec::Fourier {
            coeffs: vec![[1.0, 0.0]],
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            TraceSpec::Character { z } => {
                let m = Complex64::new(z[0], z[1]).norm();
                if (m - 1.0).abs() > 1e-12 {
                    return Err(Error::Usage(format!("character value has modulus {m}, not 1")));
                }
            }
            TraceSpec::Fourier { coeffs } => {
                if coeffs.first() != Some(&[1.0, 0.0]) {
                    return Err(Error::Usage("Fourier coefficients must start with c0 = 1".into()));
                }
            }
            TraceSpec::LampCharacter { signs } => {
                if signs.iter().any(|s| *s != 1 && *s != -1) {
                    return Err(Error::Usage("lamplighter character signs must be ±1".into()));
                }
            }
        }
        Ok(())
    }

    /// Fourier coefficient `c_k` of the circle measure for `Z₊` kernels.
    pub fn coefficient(&self, k: i64) -> Result<Complex64> {
        match self {
            TraceSpec::Character { z } => Ok(Complex64::new(z[0], z[1]).powi(k as i32)),
            TraceSpec::Fourier { coeffs } => {
                let c = coeffs
                    .get(k.unsigned_abs() as usize)
                    .map(|c| Complex64::new(c[0], c[1]))
                    .unwrap_or(Complex64::new(0.0, 0.0));
                Ok(if k < 0 { c.conj() } else { c })
            }
            TraceSpec::LampCharacter { .. } => Err(Error::Usage(
                "a lamplighter character has no circle coefficients".into(),
            )),
        }
    }
}

/// Position of a kernel element in `Z₊`: `(c,1) ↦ c`, `x₃^k ↦ k`, vector ↦
/// coordinate sum, word ↦ length.
fn kernel_index(e: &Element) -> Result<i64> {
    Ok(match e {
        Element::AxB { c, n: 1 } => *c as i64,
        Element::C3 { a: 0, b: 0, k } => *k as i64,
        Element::Vector(v) => v.iter().sum::<u64>() as i64,
        Element::Word(w) => w.len() as i64,
        _ => {
            return Err(Error::Usage(format!(
                "{e:?} is not a kernel element with a Z₊ index"
            )))
        }
    })
}

fn lamp_character(signs: &[i8], g: &Gf2Poly) -> f64 {
    let Some(deg) = g.degree() else { return 1.0 };
    (0..=deg)
        .filter(|&i| g.coeff(i) && signs.get(i).copied().unwrap_or(1) == -1)
        .count()
        .rem_euclid(2) as f64
        * -2.0
        + 1.0
}

impl Trace for TraceSpec {
    fn eval(&self, q: &Element, p: &Element) -> Result<Complex64> {
        match self {
            TraceSpec::LampCharacter { signs } => match (q, p) {
                (Element::Lamp { g, x: 0, y: 0 }, Element::Lamp { g: h, x: 0, y: 0 }) => {
                    Ok(Complex64::new(lamp_character(signs, &(g + h)), 0.0))
                }
                _ => Err(Error::Usage("lamplighter character on a non-kernel element".into())),
            },
            _ => self.coefficient(kernel_index(q)? - kernel_index(p)?),
        }
    }
}

/// Checks positive semidefiniteness of `[τ(v_{k_i} v_{k_j}*)]` on a kernel
/// sample (tolerance `1e-10` on the smallest eigenvalue).
pub fn trace_gram_psd(trace: &dyn Trace, sample: &[Element]) -> Result<bool> {
    let n = sample.len();
    let mut g = DMatrix::<Complex64>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            g[(i, j)] = trace.eval(&sample[i], &sample[j])?;
        }
    }
    let eig = g.symmetric_eigenvalues();
    Ok(eig.iter().all(|&l| l >= -1e-10))
}

/// A finite-type state evaluation: value and a bound on the truncation error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StateValue {
    pub value: Complex64,
    pub tail_bound: f64,
    /// The bound is the last-level contribution rather than a closed-form
    /// remainder.
    pub heuristic_tail: bool,
}

/// The classes with `N ≤ cutoff`, grouped into levels, with weights
/// `N^{-β}` and the partial sum `ζ̂` of the partition function.
#[derive(Clone, Debug)]
pub struct Truncation {
    pub beta: f64,
    pub cutoff: BigRational,
    levels: Vec<(Level, f64)>,
    pub zeta_hat: f64,
    pub zeta_closed: Option<f64>,
}

impl Truncation {
    pub fn new(scale: &Scale, beta: f64, cutoff: &BigRational) -> Result<Self> {
        let levels: Vec<(Level, f64)> = scale
            .levels(cutoff)?
            .into_iter()
            .map(|l| {
                let w = weight(&l.n, beta);
                (l, w)
            })
            .collect();
        let zeta_hat = levels.iter().rev().map(|(l, w)| l.size as f64 * w).sum();
        Ok(Truncation {
            beta,
            cutoff: cutoff.clone(),
            levels,
            zeta_hat,
            zeta_closed: zeta_closed(scale, beta),
        })
    }

    pub fn levels(&self) -> impl Iterator<Item = &Level> {
        self.levels.iter().map(|(l, _)| l)
    }

    pub fn class_count(&self) -> u64 {
        self.levels.iter().map(|(l, _)| l.size).sum()
    }
}

/// The summand `τ(v_{q_x} v_{p_x}*)` for `x = rep`, or `None` if
/// `[sx] ≠ [tx]`.
fn kms_summand(
    scale: &Scale,
    trace: &dyn Trace,
    s: &Element,
    t: &Element,
    x: &Element,
) -> Result<Option<Complex64>> {
    let m = scale.monoid();
    let sx = m.multiply(s, x)?;
    let tx = m.multiply(t, x)?;
    if scale.n_class(&sx)? != scale.n_class(&tx)? {
        return Ok(None);
    }
    let render = |e: &Element| m.render(e);
    let r = m.right_lcm(&sx, &tx)?.ok_or_else(|| {
        Error::Inconsistency(format!(
            "{} ~ {} but their principal ideals are disjoint",
            render(&sx),
            render(&tx)
        ))
    })?;
    let p = m.left_divide(&sx, &r)?.expect("r is a multiple of sx");
    let q = m.left_divide(&tx, &r)?.expect("r is a multiple of tx");
    if !scale.ker_contains(&p) || !scale.ker_contains(&q) {
        return Err(Error::Inconsistency(format!(
            "sx·p = tx·q with p = {}, q = {} not both in ker N",
            render(&p),
            render(&q)
        )));
    }
    Ok(Some(trace.eval(&q, &p)?))
}

/// `φ_{τ,β}(v_s v_t*)` over the classes of a truncation.
///
/// On `ax+b` and the lamplighter the summand is constant on each level (it
/// depends on the level of `x` only), so each level is evaluated at one
/// representative and weighted by its size; [`phi_finite_type_bruteforce`]
/// sums class by class.
pub fn phi_finite_type(
    scale: &Scale,
    trunc: &Truncation,
    trace: &dyn Trace,
    s: &Element,
    t: &Element,
) -> Result<StateValue> {
    phi_impl(scale, trunc, trace, s, t, scale.has_multi_class_levels())
}

pub fn phi_finite_type_bruteforce(
    scale: &Scale,
    trunc: &Truncation,
    trace: &dyn Trace,
    s: &Element,
    t: &Element,
) -> Result<StateValue> {
    phi_impl(scale, trunc, trace, s, t, false)
}

fn phi_impl(
    scale: &Scale,
    trunc: &Truncation,
    trace: &dyn Trace,
    s: &Element,
    t: &Element,
    per_level: bool,
) -> Result<StateValue> {
    let ns = scale.n_value(s)?;
    let ws = weight(&ns, trunc.beta);
    let tail_bound = match trunc.zeta_closed {
        Some(z) => (ws * (z - trunc.zeta_hat) / trunc.zeta_hat).abs(),
        None => trunc
            .levels
            .last()
            .map(|(l, w)| ws * l.size as f64 * w / trunc.zeta_hat)
            .unwrap_or(0.0),
    };
    let zero = StateValue {
        value: Complex64::new(0.0, 0.0),
        tail_bound,
        heuristic_tail: trunc.zeta_closed.is_none(),
    };
    if ns != scale.n_value(t)? {
        return Ok(zero);
    }
    let mut acc = Complex64::new(0.0, 0.0);
    // smallest weights first
    for (level, w) in trunc.levels.iter().rev() {
        if per_level {
            if let Some(v) = kms_summand(scale, trace, s, t, &level.key)? {
                acc += v * (*w * level.size as f64);
            }
        } else {
            for class in scale.level_classes(level)? {
                if let Some(v) = kms_summand(scale, trace, s, t, &class.rep)? {
                    acc += v * *w;
                }
            }
        }
    }
    Ok(StateValue {
        value: acc * (ws / trunc.zeta_hat),
        ..zero
    })
}

/// `φ_{τ,β}` on a span element.
pub fn phi_span(
    scale: &Scale,
    trunc: &Truncation,
    trace: &dyn Trace,
    x: &SpanElement,
) -> Result<Complex64> {
    x.evaluate(|s, t| Ok(phi_finite_type(scale, trunc, trace, s, t)?.value))
}

/// `Σ_{m: nm | (c−d)} m^{1−β} c_{(c−d)/(nm)} · n^{-β}/ζ(β−1)` — the `ax+b`
/// state for the circle measure with Fourier coefficients given by `trace`.
pub fn axb_state_direct(
    beta: f64,
    trace: &TraceSpec,
    (c, n): (u64, u64),
    (d, n2): (u64, u64),
) -> Result<Complex64> {
    if n != n2 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let nf = n as f64;
    if c == d {
        return Ok(Complex64::new(nf.powf(-beta), 0.0));
    }
    let diff = c as i64 - d as i64;
    let k = diff.unsigned_abs();
    let mut acc = Complex64::new(0.0, 0.0);
    for m in 1..=k / n {
        if k % (n * m) == 0 {
            let j = diff / (n * m) as i64;
            acc += trace.coefficient(j)? * (m as f64).powf(1.0 - beta);
        }
    }
    Ok(acc * (nf.powf(-beta) / riemann_zeta(beta - 1.0)))
}

/// Fourier coefficient `∫ z^k dν̃` of the restriction of `φ_{ν,β}` to the
/// kernel: `ζ(β−1)^{-1} Σ_{m | k} m^{1−β} c_{k/m}` (and `1` for `k = 0`).
pub fn axb_tilde_measure(beta: f64, trace: &TraceSpec, k: u64) -> Result<Complex64> {
    if k == 0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for m in 1..=k {
        if k % m == 0 {
            acc += trace.coefficient((k / m) as i64)? * (m as f64).powf(1.0 - beta);
        }
    }
    Ok(acc / riemann_zeta(beta - 1.0))
}

/// The KMS∞-state: `τ(v_s v_t*)` on kernel legs, `0` otherwise.
pub fn phi_kms_infty(
    scale: &Scale,
    trace: &dyn Trace,
    s: &Element,
    t: &Element,
) -> Result<Complex64> {
    if scale.ker_contains(s) && scale.ker_contains(t) {
        trace.eval(s, t)
    } else {
        Ok(Complex64::new(0.0, 0.0))
    }
}

/// The ground state `ψ∘E` for a state `ψ` on `C*(ker N)`.
pub fn ground_state<F>(scale: &Scale, psi: F, x: &SpanElement) -> Result<Complex64>
where
    F: FnMut(&Element, &Element) -> Result<Complex64>,
{
    x.conditional_expectation(scale).evaluate(psi)
}

/// `|φ(xy) − φ(y σ_{iβ}(x))|`.
pub fn kms_residual<F>(
    scale: &Scale,
    beta: f64,
    mut state: F,
    x: &SpanElement,
    y: &SpanElement,
) -> Result<f64>
where
    F: FnMut(&Element, &Element) -> Result<Complex64>,
{
    let m = scale.monoid();
    let lhs = x.product(y, m)?.evaluate(&mut state)?;
    let rhs = y.product(&x.apply_dynamics(scale, beta)?, m)?.evaluate(&mut state)?;
    Ok((lhs - rhs).norm())
}
