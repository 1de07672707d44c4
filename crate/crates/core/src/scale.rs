//! Scales `N: S → [1, ∞)` given by generator weights.
//!
//! Weights are exact rationals. Families whose relations force a weight
//! (the translation `(1,1)` of `ax+b`, the lamp `(1,0,0)`, the two
//! coordinates of `C₃`) are checked at construction.
//!
//! For `ax+b` the monoid is all of `Z₊ ⋊ N^×`; only the declared primes get
//! a configurable weight and every other prime `p` has weight `p`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};

use crate::error::{Error, Result};
use crate::monoid::{Element, Monoid};

#[derive(Clone, Debug, PartialEq)]
pub struct Scale {
    monoid: Monoid,
    // aligned with `monoid.generators()`
    weights: Vec<BigRational>,
}

pub fn rational(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Parses `"p/q"`, `"p"` or a finite decimal such as `"1.5"`.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let t = text.trim();
    let bad = || Error::Parse(format!("`{text}` is not a rational number"));
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d == BigInt::from(0) {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    if let Some((i, f)) = t.split_once('.') {
        if f.is_empty() || !f.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let digits: BigInt = format!("{i}{f}").parse().map_err(|_| bad())?;
        let den = num_traits::pow(BigInt::from(10), f.len());
        return Ok(BigRational::new(digits, den));
    }
    Ok(BigRational::from_integer(t.parse().map_err(|_| bad())?))
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

fn pow_rational(base: &BigRational, e: u64) -> BigRational {
    num_traits::pow(base.clone(), e as usize)
}

/// Factorization by trial division, ascending primes.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

impl Scale {
    /// The default scale of a family: `N(c,n) = n` on `ax+b`,
    /// `N(g,x,y) = 2^{x+y}` on the lamplighter, `N(x₁)=N(x₂)=2, N(x₃)=1` on
    /// `C₃`, and weight 2 on every generator of the free families.
    pub fn standard(monoid: Monoid) -> Result<Scale> {
        Scale::new(monoid, &[])
    }

    /// Default weights overridden by `(generator name, weight)` pairs.
    pub fn new(monoid: Monoid, overrides: &[(&str, BigRational)]) -> Result<Scale> {
        if let Monoid::AxB { primes } = &monoid {
            for &p in primes {
                if factorize(p).len() != 1 || factorize(p)[0].1 != 1 {
                    return Err(Error::InvalidScale(format!("{p} is not a prime")));
                }
            }
        }
        let gens = monoid.generators();
        let mut weights: Vec<BigRational> = gens
            .iter()
            .map(|(_, g)| match (&monoid, g) {
                (Monoid::AxB { .. }, Element::AxB { n, .. }) => int(*n),
                (Monoid::C3, Element::C3 { k, .. }) => int(if *k == 1 { 1 } else { 2 }),
                (Monoid::Lamplighter, Element::Lamp { x, y, .. }) => {
                    int(if x + y == 0 { 1 } else { 2 })
                }
                _ => int(2),
            })
            .collect();
        let mut seen = BTreeMap::new();
        for (name, w) in overrides {
            let idx = gens
                .iter()
                .position(|(g, _)| g == name)
                .ok_or_else(|| Error::InvalidScale(format!("unknown generator `{name}`")))?;
            if seen.insert(idx, ()).is_some() {
                return Err(Error::InvalidScale(format!("duplicate weight for `{name}`")));
            }
            weights[idx] = w.clone();
        }
        let scale = Scale { monoid, weights };
        scale.validate()?;
        Ok(scale)
    }

    fn validate(&self) -> Result<()> {
        let one = BigRational::one();
        let names: Vec<String> = self.monoid.generators().into_iter().map(|g| g.0).collect();
        for (name, w) in names.iter().zip(&self.weights) {
            if *w < one {
                return Err(Error::InvalidScale(format!(
                    "weight {w} of `{name}` is below 1"
                )));
            }
        }
        let w = &self.weights;
        match &self.monoid {
            Monoid::AxB { .. } => {
                // (0,p)(1,1) = (1,1)^p (0,p) forces N(1,1) = 1
                if !w[0].is_one() {
                    return Err(Error::InvalidScale(
                        "the relation (0,p)(1,1) = (1,1)^p(0,p) forces weight 1 on (1,1)".into(),
                    ));
                }
                if w[1..].iter().any(|x| x.is_one()) {
                    return Err(Error::Unsupported(
                        "ax+b scales with a prime of weight 1".into(),
                    ));
                }
            }
            Monoid::C3 => {
                // x₃x₁ = x₂x₃
                if w[0] != w[1] {
                    return Err(Error::InvalidScale(
                        "the relation x3 x1 = x2 x3 forces N(x1) = N(x2)".into(),
                    ));
                }
                if w[0].is_one() {
                    return Err(Error::Unsupported("C3 scales with N(x1) = 1".into()));
                }
            }
            Monoid::Lamplighter => {
                // (1,0,0)² = e
                if !w[0].is_one() {
                    return Err(Error::InvalidScale(
                        "(1,0,0) has order two, so its weight must be 1".into(),
                    ));
                }
                if w[1].is_one() || w[2].is_one() {
                    return Err(Error::Unsupported(
                        "lamplighter scales with a shift of weight 1".into(),
                    ));
                }
            }
            Monoid::FreeMonoid { .. } | Monoid::FreeAbelian { .. } => {}
        }
        Ok(())
    }

    pub fn monoid(&self) -> &Monoid {
        &self.monoid
    }

    /// `(generator name, weight)` in declaration order.
    pub fn weights(&self) -> Vec<(String, BigRational)> {
        self.monoid
            .generators()
            .into_iter()
            .map(|g| g.0)
            .zip(self.weights.iter().cloned())
            .collect()
    }

    pub(crate) fn raw_weights(&self) -> &[BigRational] {
        &self.weights
    }

    /// Weight of the prime `p` on `ax+b` (`p` itself unless declared).
    pub fn axb_prime_weight(&self, p: u64) -> BigRational {
        if let Monoid::AxB { primes } = &self.monoid {
            if let Some(i) = primes.iter().position(|&q| q == p) {
                return self.weights[i + 1].clone();
            }
        }
        int(p)
    }

    /// Declared `ax+b` primes whose weight differs from `p`.
    pub(crate) fn axb_overrides(&self) -> Vec<(u64, BigRational)> {
        match &self.monoid {
            Monoid::AxB { primes } => primes
                .iter()
                .zip(&self.weights[1..])
                .filter(|(p, w)| **w != int(**p))
                .map(|(p, w)| (*p, w.clone()))
                .collect(),
            _ => Vec::new(),
        }
    }

    /// `N(0, n)` on `ax+b`.
    pub fn axb_level_value(&self, n: u64) -> BigRational {
        let mut v = int(n);
        for (p, w) in self.axb_overrides() {
            let mut m = n;
            while m % p == 0 {
                m /= p;
                v = v * &w / int(p);
            }
        }
        v
    }

    pub fn n_value(&self, s: &Element) -> Result<BigRational> {
        self.monoid.validate(s)?;
        let w = &self.weights;
        Ok(match s {
            Element::Word(letters) => letters
                .iter()
                .fold(BigRational::one(), |acc, &l| acc * &w[l as usize]),
            Element::Vector(v) => v
                .iter()
                .zip(w)
                .fold(BigRational::one(), |acc, (&e, x)| acc * pow_rational(x, e)),
            Element::AxB { n, .. } => self.axb_level_value(*n),
            Element::C3 { a, b, k } => pow_rational(&w[0], a + b) * pow_rational(&w[2], *k),
            Element::Lamp { x, y, .. } => {
                pow_rational(&w[1], *x as u64) * pow_rational(&w[2], *y as u64)
            }
        })
    }

    /// `N(s) = 1`, decided on the normal form.
    pub fn ker_contains(&self, s: &Element) -> bool {
        let w = &self.weights;
        match s {
            Element::Word(letters) => letters.iter().all(|&l| w[l as usize].is_one()),
            Element::Vector(v) => v.iter().zip(w).all(|(&e, x)| e == 0 || x.is_one()),
            Element::AxB { n, .. } => *n == 1,
            Element::C3 { a, b, k } => *a == 0 && *b == 0 && (*k == 0 || w[2].is_one()),
            Element::Lamp { x, y, .. } => *x == 0 && *y == 0,
        }
    }

    /// Generators of weight one.
    pub fn kernel_generators(&self) -> Vec<Element> {
        self.monoid
            .generators()
            .into_iter()
            .zip(&self.weights)
            .filter(|(_, w)| w.is_one())
            .map(|((_, g), _)| g)
            .collect()
    }

    /// Kernel elements up to a family-specific size bound `k`:
    /// `(c,1)` with `c ≤ k` on `ax+b`, `x₃^j` with `j ≤ k` on `C₃`,
    /// `(g,0,0)` with `deg g < k` on the lamplighter, and words or vectors of
    /// kernel generators of length at most `k` otherwise.
    pub fn kernel_sample(&self, k: usize) -> Vec<Element> {
        match &self.monoid {
            Monoid::AxB { .. } => (0..=k as u64).map(|c| Element::axb(c, 1)).collect(),
            Monoid::C3 => {
                if self.weights[2].is_one() {
                    (0..=k as u64).map(|j| Element::c3(0, 0, j)).collect()
                } else {
                    vec![Element::c3(0, 0, 0)]
                }
            }
            Monoid::Lamplighter => {
                let k = k.min(20);
                (0..1u64 << k)
                    .map(|bits| Element::lamp(crate::gf2::Gf2Poly::from_bits(bits), 0, 0))
                    .collect()
            }
            Monoid::FreeMonoid { .. } | Monoid::FreeAbelian { .. } => {
                let kernel_gens = self.kernel_generators();
                let mut out = vec![self.monoid.identity()];
                let mut frontier = out.clone();
                for _ in 0..k {
                    let mut next = Vec::new();
                    for s in &frontier {
                        for g in &kernel_gens {
                            let p = self.monoid.multiply(s, g).expect("same family");
                            if !out.contains(&p) && !next.contains(&p) {
                                next.push(p);
                            }
                        }
                    }
                    out.extend(next.iter().cloned());
                    frontier = next;
                }
                out.sort();
                out
            }
        }
    }

    /// Checks that kernel elements enumerated to `depth` pairwise have a
    /// common upper bound inside the kernel. Returns the first failing pair.
    pub fn check_kernel_directed(&self, depth: usize) -> Result<Certificate> {
        let kernel: Vec<Element> = self
            .monoid
            .enumerate(depth)
            .into_iter()
            .filter(|s| self.ker_contains(s))
            .collect();
        for (i, t1) in kernel.iter().enumerate() {
            for t2 in &kernel[i + 1..] {
                match self.monoid.right_lcm(t1, t2)? {
                    Some(r) if self.ker_contains(&r) => {}
                    _ => return Ok(Certificate::Counterexample(t1.clone(), t2.clone())),
                }
            }
        }
        Ok(Certificate::Pass)
    }

    /// Checks `sS ∩ tS = rS` with `N(r) = N(s)` for every enumerated `s` and
    /// kernel `t` up to `depth`. Returns the first violating `(s, t)`.
    pub fn check_admissibility(&self, depth: usize) -> Result<Certificate> {
        let all = self.monoid.enumerate(depth);
        let kernel: Vec<&Element> = all.iter().filter(|s| self.ker_contains(s)).collect();
        for s in &all {
            let ns = self.n_value(s)?;
            for t in &kernel {
                match self.monoid.right_lcm(s, t)? {
                    Some(r) if self.n_value(&r)? == ns => {}
                    _ => return Ok(Certificate::Counterexample(s.clone(), (*t).clone())),
                }
            }
        }
        Ok(Certificate::Pass)
    }
}

/// Outcome of a depth-bounded check: a pass certifies only the checked range.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Certificate {
    Pass,
    Counterexample(Element, Element),
}

impl Certificate {
    pub fn passed(&self) -> bool {
        matches!(self, Certificate::Pass)
    }
}
