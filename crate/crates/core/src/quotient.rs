//! The quotient quasi-lattice `S/~N` and the action of `S` on it.
//!
//! `s ~N t` iff `sa = tb` for kernel elements `a, b`. Classes are stored by
//! a canonical representative computed in closed form:
//!
//! | family       | representative of `[s]`             |
//! |--------------|-------------------------------------|
//! | `ax+b`       | `(c mod n, n)`                      |
//! | `C₃`         | `(a, b, 0)` when `N(x₃) = 1`        |
//! | lamplighter  | `(g mod T^x(1+T)^y, x, y)`          |
//! | free abelian | weight-one coordinates zeroed       |
//! | free monoid  | `s` itself (the kernel is trivial)  |
//!
//! Classes are grouped into *levels*. On `ax+b` the level of `[c]ₙ` is `n`
//! and holds `n` classes; on the lamplighter the level of `[g]_{x,y}` is
//! `(x, y)` and holds `2^{x+y}` classes. In the other families each level is
//! a single class. Every class of a level is above exactly one class of each
//! lower level, which is what [`Scale::lifts`] exploits.

use std::cmp::Ordering;

use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};

use crate::error::{Error, Result};
use crate::gf2::Gf2Poly;
use crate::monoid::{lamp_modulus, Element, Monoid};
use crate::scale::{int, Scale};

/// A class of `S/~N`: canonical representative and its exact `N`-value.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct NClass {
    pub rep: Element,
    pub n: BigRational,
}

impl Ord for NClass {
    fn cmp(&self, other: &Self) -> Ordering {
        self.n.cmp(&other.n).then_with(|| self.rep.cmp(&other.rep))
    }
}

impl PartialOrd for NClass {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Least upper bound of two classes, or `∞` when they have no common upper
/// bound (with the convention `N(∞)^{-β} = 0`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Join {
    Class(NClass),
    Infinity,
}

impl Join {
    pub fn class(self) -> Option<NClass> {
        match self {
            Join::Class(c) => Some(c),
            Join::Infinity => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Join::Infinity)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Level {
    /// Representative of one class of the level; the level's identity.
    pub key: Element,
    pub n: BigRational,
    /// Number of classes in the level.
    pub size: u64,
}

const MAX_LEVELS: u64 = 50_000_000;
const MAX_EXPLICIT_LEVEL: u64 = 1 << 24;

impl Scale {
    fn free_monoid_kernel_is_everything(&self) -> Result<bool> {
        if let Monoid::FreeMonoid { alphabet } = self.monoid() {
            let kernel_letters = self.raw_weights().iter().filter(|w| w.is_one()).count();
            if kernel_letters > 0 {
                if *alphabet == 1 {
                    return Ok(true);
                }
                return Err(Error::NotAdmissible(
                    "a free monoid on two or more letters with a weight-one letter".into(),
                ));
            }
        }
        Ok(false)
    }

    /// Canonical representative of `[s]`.
    pub fn n_class(&self, s: &Element) -> Result<NClass> {
        self.monoid().validate(s)?;
        let rep = match s {
            Element::AxB { c, n } => Element::axb(c % n, *n),
            Element::C3 { a, b, k } => {
                if self.raw_weights()[2].is_one() {
                    Element::c3(*a, *b, 0)
                } else {
                    Element::c3(*a, *b, *k)
                }
            }
            Element::Lamp { g, x, y } => Element::lamp(g.rem(&lamp_modulus(*x, *y)), *x, *y),
            Element::Vector(v) => Element::Vector(
                v.iter()
                    .zip(self.raw_weights())
                    .map(|(&e, w)| if w.is_one() { 0 } else { e })
                    .collect(),
            ),
            Element::Word(_) => {
                if self.free_monoid_kernel_is_everything()? {
                    self.monoid().identity()
                } else {
                    s.clone()
                }
            }
        };
        let n = self.n_value(&rep)?;
        Ok(NClass { rep, n })
    }

    pub fn identity_class(&self) -> NClass {
        NClass {
            rep: self.monoid().identity(),
            n: BigRational::one(),
        }
    }

    pub fn render_class(&self, c: &NClass) -> String {
        self.monoid().render(&c.rep)
    }

    /// `[a] ≤ [b]` iff `aS ∩ bS = rS` with `N(r) = N(b)`.
    pub fn class_leq(&self, a: &NClass, b: &NClass) -> Result<bool> {
        if a.n > b.n {
            return Ok(false);
        }
        Ok(match self.monoid().right_lcm(&a.rep, &b.rep)? {
            Some(r) => self.n_value(&r)? == b.n,
            None => false,
        })
    }

    pub fn class_join(&self, a: &NClass, b: &NClass) -> Result<Join> {
        Ok(match self.monoid().right_lcm(&a.rep, &b.rep)? {
            Some(r) => Join::Class(self.n_class(&r)?),
            None => Join::Infinity,
        })
    }

    /// Iterated join; `∞` absorbs. The join of the empty set is `[e]`.
    pub fn join_of_set(&self, classes: &[NClass]) -> Result<Join> {
        let mut acc = self.identity_class();
        for c in classes {
            match self.class_join(&acc, c)? {
                Join::Class(j) => acc = j,
                Join::Infinity => return Ok(Join::Infinity),
            }
        }
        Ok(Join::Class(acc))
    }

    /// `s·[t] = [st]`.
    pub fn class_act(&self, s: &Element, a: &NClass) -> Result<NClass> {
        self.n_class(&self.monoid().multiply(s, &a.rep)?)
    }

    /// `a⁻¹[s]`, defined when `[a] ≤ [s]` (in particular for kernel `a`).
    ///
    /// With `aS ∩ sS = rS` and `N(r) = N(s)` we have `r ~N s`, so
    /// `a·[a⁻¹r] = [s]`.
    pub fn class_act_inv(&self, a: &Element, class: &NClass) -> Result<NClass> {
        let fail = || {
            Error::Inconsistency(format!(
                "no preimage of {} under {}",
                self.render_class(class),
                self.monoid().render(a)
            ))
        };
        let r = self
            .monoid()
            .right_lcm(a, &class.rep)?
            .ok_or_else(fail)?;
        if self.n_value(&r)? != class.n {
            return Err(fail());
        }
        let t = self.monoid().left_divide(a, &r)?.ok_or_else(fail)?;
        self.n_class(&t)
    }

    /// Whether every class of a level gives the same summand in the sums over
    /// `S/~N` used by the finite-type KMS formula (see `kms`).
    pub fn has_multi_class_levels(&self) -> bool {
        matches!(self.monoid(), Monoid::AxB { .. } | Monoid::Lamplighter)
    }

    /// All levels with `N ≤ max`, sorted by `(N, text of key)`.
    pub fn levels(&self, max: &BigRational) -> Result<Vec<Level>> {
        let mut out = Vec::new();
        if *max < BigRational::one() {
            return Ok(out);
        }
        let w = self.raw_weights();
        match self.monoid() {
            Monoid::AxB { .. } => {
                let overrides = self.axb_overrides();
                let special: u64 = overrides.iter().map(|(p, _)| *p).product();
                let mut smooth = vec![(1u64, BigRational::one())];
                for (p, wp) in &overrides {
                    let mut next = Vec::new();
                    for (d, nd) in &smooth {
                        let (mut d2, mut n2) = (*d, nd.clone());
                        while n2 <= *max {
                            next.push((d2, n2.clone()));
                            d2 = d2.checked_mul(*p).ok_or_else(too_many)?;
                            n2 = n2 * wp;
                        }
                    }
                    smooth = next;
                }
                let mut count = 0u64;
                for (d, nd) in smooth {
                    let kmax = (max / &nd).floor().to_integer().to_u64().ok_or_else(too_many)?;
                    count += kmax;
                    if count > MAX_LEVELS {
                        return Err(too_many());
                    }
                    for k in 1..=kmax {
                        if special > 1 && k.gcd(&special) != 1 {
                            continue;
                        }
                        let m = d.checked_mul(k).ok_or_else(too_many)?;
                        out.push(Level {
                            key: Element::axb(0, m),
                            n: &nd * int(k),
                            size: m,
                        });
                    }
                }
            }
            Monoid::Lamplighter => {
                let mut nx = BigRational::one();
                let mut x = 0u32;
                while nx <= *max {
                    let mut ny = nx.clone();
                    let mut y = 0u32;
                    while ny <= *max {
                        if x + y >= 64 {
                            return Err(too_many());
                        }
                        out.push(Level {
                            key: Element::lamp(Gf2Poly::zero(), x, y),
                            n: ny.clone(),
                            size: 1 << (x + y),
                        });
                        ny = ny * &w[2];
                        y += 1;
                    }
                    nx = nx * &w[1];
                    x += 1;
                }
            }
            Monoid::C3 => {
                let kernel_x3 = w[2].is_one();
                let mut na = BigRational::one();
                let mut total = 0u64;
                while na <= *max {
                    let total_exp = total;
                    for a in 0..=total_exp {
                        let b = total_exp - a;
                        let mut n = na.clone();
                        let mut k = 0;
                        while n <= *max {
                            out.push(Level {
                                key: Element::c3(a, b, k),
                                n: n.clone(),
                                size: 1,
                            });
                            if kernel_x3 {
                                break;
                            }
                            n = n * &w[2];
                            k += 1;
                        }
                    }
                    na = na * &w[0];
                    total += 1;
                }
            }
            Monoid::FreeAbelian { rank } => {
                let mut vecs = vec![(vec![0u64; *rank], BigRational::one())];
                for i in 0..*rank {
                    if w[i].is_one() {
                        continue;
                    }
                    let mut next = Vec::new();
                    for (v, n) in &vecs {
                        let (mut v2, mut n2) = (v.clone(), n.clone());
                        while n2 <= *max {
                            next.push((v2.clone(), n2.clone()));
                            v2[i] += 1;
                            n2 = n2 * &w[i];
                        }
                    }
                    vecs = next;
                    if vecs.len() as u64 > MAX_LEVELS {
                        return Err(too_many());
                    }
                }
                out.extend(vecs.into_iter().map(|(v, n)| Level {
                    key: Element::Vector(v),
                    n,
                    size: 1,
                }));
            }
            Monoid::FreeMonoid { alphabet } => {
                if self.free_monoid_kernel_is_everything()? {
                    out.push(Level {
                        key: self.monoid().identity(),
                        n: BigRational::one(),
                        size: 1,
                    });
                } else {
                    let mut frontier = vec![(Vec::<u8>::new(), BigRational::one())];
                    while !frontier.is_empty() {
                        let mut next = Vec::new();
                        for (word, n) in frontier {
                            for l in 0..*alphabet as u8 {
                                let n2 = &n * &w[l as usize];
                                if n2 <= *max {
                                    let mut w2 = word.clone();
                                    w2.push(l);
                                    next.push((w2, n2));
                                }
                            }
                            out.push(Level {
                                key: Element::Word(word),
                                n,
                                size: 1,
                            });
                            if out.len() as u64 > MAX_LEVELS {
                                return Err(too_many());
                            }
                        }
                        frontier = next;
                    }
                }
            }
        }
        let m = self.monoid();
        let mut keyed: Vec<(String, Level)> = out.into_iter().map(|l| (m.render(&l.key), l)).collect();
        keyed.sort_by(|a, b| a.1.n.cmp(&b.1.n).then_with(|| a.0.cmp(&b.0)));
        Ok(keyed.into_iter().map(|(_, l)| l).collect())
    }

    /// Key of the level containing `c`.
    pub fn level_of(&self, c: &NClass) -> Element {
        match &c.rep {
            Element::AxB { n, .. } => Element::axb(0, *n),
            Element::Lamp { x, y, .. } => Element::lamp(Gf2Poly::zero(), *x, *y),
            other => other.clone(),
        }
    }

    pub fn level_for_key(&self, key: &Element) -> Result<Level> {
        let n = self.n_value(key)?;
        let size = match key {
            Element::AxB { n, .. } => *n,
            Element::Lamp { x, y, .. } => {
                if x + y >= 64 {
                    return Err(too_many());
                }
                1 << (x + y)
            }
            _ => 1,
        };
        Ok(Level {
            key: key.clone(),
            n,
            size,
        })
    }

    /// All classes of a level, in ascending representative order.
    pub fn level_classes(&self, level: &Level) -> Result<Vec<NClass>> {
        if level.size > MAX_EXPLICIT_LEVEL {
            return Err(too_many());
        }
        Ok(match &level.key {
            Element::AxB { n, .. } => (0..*n)
                .map(|c| NClass {
                    rep: Element::axb(c, *n),
                    n: level.n.clone(),
                })
                .collect(),
            Element::Lamp { x, y, .. } => (0..level.size)
                .map(|bits| NClass {
                    rep: Element::lamp(Gf2Poly::from_bits(bits), *x, *y),
                    n: level.n.clone(),
                })
                .collect(),
            key => vec![NClass {
                rep: key.clone(),
                n: level.n.clone(),
            }],
        })
    }

    /// Whether every class of level `lo` lies below some class of level `hi`.
    pub fn level_leq(&self, lo: &Element, hi: &Element) -> Result<bool> {
        Ok(match (lo, hi) {
            (Element::AxB { n, .. }, Element::AxB { n: m, .. }) => m % n == 0,
            (Element::Lamp { x, y, .. }, Element::Lamp { x: u, y: v, .. }) => x <= u && y <= v,
            _ => self.class_leq(&self.n_class(lo)?, &self.n_class(hi)?)?,
        })
    }

    /// Classes of `level` that lie above `c`.
    pub fn lifts(&self, c: &NClass, level: &Level) -> Result<Vec<NClass>> {
        match (&c.rep, &level.key) {
            (Element::AxB { c: r, n }, Element::AxB { n: m, .. }) => {
                if m % n != 0 {
                    return Ok(Vec::new());
                }
                Ok((0..m / n)
                    .map(|j| NClass {
                        rep: Element::axb(r + n * j, *m),
                        n: level.n.clone(),
                    })
                    .collect())
            }
            (Element::Lamp { g, x, y }, Element::Lamp { x: u, y: v, .. }) => {
                if x > u || y > v {
                    return Ok(Vec::new());
                }
                let d = (u - x) + (v - y);
                if d >= 24 {
                    return Err(too_many());
                }
                let p = lamp_modulus(*x, *y);
                let q = lamp_modulus(*u, *v);
                Ok((0..1u64 << d)
                    .map(|h| NClass {
                        rep: Element::lamp(
                            (g + &(&p * &Gf2Poly::from_bits(h))).rem(&q),
                            *u,
                            *v,
                        ),
                        n: level.n.clone(),
                    })
                    .collect())
            }
            _ => {
                let target = NClass {
                    rep: level.key.clone(),
                    n: level.n.clone(),
                };
                Ok(if self.class_leq(c, &target)? {
                    vec![target]
                } else {
                    Vec::new()
                })
            }
        }
    }

    /// All classes with `N ≤ max`, each once, sorted by `(N, canonical text)`.
    pub fn enumerate_classes(&self, max: &BigRational) -> Result<Vec<NClass>> {
        let mut out = Vec::new();
        for level in self.levels(max)? {
            out.extend(self.level_classes(&level)?);
        }
        let m = self.monoid();
        let mut keyed: Vec<(String, NClass)> = out.into_iter().map(|c| (m.render(&c.rep), c)).collect();
        keyed.sort_by(|a, b| a.1.n.cmp(&b.1.n).then_with(|| a.0.cmp(&b.0)));
        Ok(keyed.into_iter().map(|(_, c)| c).collect())
    }

    /// Number of classes with `N ≤ max`.
    pub fn class_count(&self, max: &BigRational) -> Result<u64> {
        Ok(self.levels(max)?.iter().map(|l| l.size).sum())
    }
}

fn too_many() -> Error {
    Error::Unsupported("class enumeration exceeds the supported size".into())
}
