//! Right LCM monoids with decidable normal forms.
//!
//! Five concrete families are provided. Every element has a unique normal
//! form, so equality of [`Element`]s is equality in the monoid.
//!
//! | family        | normal form        | text          |
//! |---------------|--------------------|---------------|
//! | free monoid   | word over `a, b, …`| `abba`, `1`   |
//! | free abelian  | vector in `Z₊^k`   | `(1,0,2)`     |
//! | `ax+b`        | `(c, n)`, `n ≥ 1`  | `(c,n)`       |
//! | `C₃`          | `((a,b), k)`       | `(a,b,k)`     |
//! | lamplighter   | `(g, x, y)`        | `(hex,x,y)`   |
//!
//! In `C₃ = Z₊² ⋊ Z₊` the generator of `Z₊` flips the two coordinates, with
//! `x₁ = (1,0,0)`, `x₂ = (0,1,0)`, `x₃ = (0,0,1)`. In the lamplighter monoid
//! `G ⋊ Z₊²` the pair `(x, y)` acts on `G = GF(2)[T]` by multiplication with
//! `T^x (1+T)^y`.
//!
//! Right LCMs are returned as a canonical generator of `sS ∩ tS`. All families
//! except the lamplighter have trivial unit group; there the units are the
//! elements `(g, 0, 0)` and the generator is chosen with `g` reduced modulo
//! `T^p (1+T)^q`.

use std::collections::BTreeSet;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::Gf2Poly;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Element {
    Word(Vec<u8>),
    Vector(Vec<u64>),
    AxB { c: u64, n: u64 },
    C3 { a: u64, b: u64, k: u64 },
    Lamp { g: Gf2Poly, x: u32, y: u32 },
}

impl Element {
    pub fn family(&self) -> &'static str {
        match self {
            Element::Word(_) => "free_monoid",
            Element::Vector(_) => "free_abelian",
            Element::AxB { .. } => "axb",
            Element::C3 { .. } => "c3",
            Element::Lamp { .. } => "lamplighter",
        }
    }

    pub fn axb(c: u64, n: u64) -> Element {
        Element::AxB { c, n }
    }

    pub fn c3(a: u64, b: u64, k: u64) -> Element {
        Element::C3 { a, b, k }
    }

    pub fn lamp(g: Gf2Poly, x: u32, y: u32) -> Element {
        Element::Lamp { g, x, y }
    }

    /// Word over the letters `a, b, …` (`"1"` or `""` for the identity).
    pub fn word(letters: &str) -> Element {
        let w = if letters == "1" { "" } else { letters };
        Element::Word(w.bytes().map(|b| b - b'a').collect())
    }
}

/// Family tag plus parameters. Fully determines every monoid operation and
/// the generating set used by [`Monoid::enumerate`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum Monoid {
    FreeMonoid { alphabet: usize },
    FreeAbelian { rank: usize },
    /// `Z₊ ⋊ N^×`; `primes` lists the declared generators `(0, p)`.
    #[serde(rename = "axb")]
    AxB {
        #[serde(default = "default_axb_primes")]
        primes: Vec<u64>,
    },
    C3,
    Lamplighter,
}

pub const DEFAULT_AXB_PRIMES: [u64; 4] = [2, 3, 5, 7];

fn default_axb_primes() -> Vec<u64> {
    DEFAULT_AXB_PRIMES.to_vec()
}

/// `T^x (1+T)^y`
pub fn lamp_modulus(x: u32, y: u32) -> Gf2Poly {
    &Gf2Poly::monomial(x as usize) * &Gf2Poly::one_plus_t().pow(y)
}

fn overflow() -> Error {
    Error::Unsupported("integer overflow in ax+b arithmetic".into())
}

fn flip_if(odd: bool, a: u64, b: u64) -> (u64, u64) {
    if odd {
        (b, a)
    } else {
        (a, b)
    }
}

impl Monoid {
    pub fn axb() -> Monoid {
        Monoid::AxB {
            primes: DEFAULT_AXB_PRIMES.to_vec(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Monoid::FreeMonoid { .. } => "free_monoid",
            Monoid::FreeAbelian { .. } => "free_abelian",
            Monoid::AxB { .. } => "axb",
            Monoid::C3 => "c3",
            Monoid::Lamplighter => "lamplighter",
        }
    }

    pub fn identity(&self) -> Element {
        match self {
            Monoid::FreeMonoid { .. } => Element::Word(Vec::new()),
            Monoid::FreeAbelian { rank } => Element::Vector(vec![0; *rank]),
            Monoid::AxB { .. } => Element::axb(0, 1),
            Monoid::C3 => Element::c3(0, 0, 0),
            Monoid::Lamplighter => Element::lamp(Gf2Poly::zero(), 0, 0),
        }
    }

    /// The declared generating set, with the names used in scale configs.
    pub fn generators(&self) -> Vec<(String, Element)> {
        match self {
            Monoid::FreeMonoid { alphabet } => (0..*alphabet as u8)
                .map(|i| (((b'a' + i) as char).to_string(), Element::Word(vec![i])))
                .collect(),
            Monoid::FreeAbelian { rank } => (0..*rank)
                .map(|i| {
                    let mut v = vec![0; *rank];
                    v[i] = 1;
                    (format!("x{}", i + 1), Element::Vector(v))
                })
                .collect(),
            Monoid::AxB { primes } => std::iter::once(Element::axb(1, 1))
                .chain(primes.iter().map(|&p| Element::axb(0, p)))
                .map(|e| (self.render(&e), e))
                .collect(),
            Monoid::C3 => vec![
                ("x1".into(), Element::c3(1, 0, 0)),
                ("x2".into(), Element::c3(0, 1, 0)),
                ("x3".into(), Element::c3(0, 0, 1)),
            ],
            Monoid::Lamplighter => [
                Element::lamp(Gf2Poly::one(), 0, 0),
                Element::lamp(Gf2Poly::zero(), 1, 0),
                Element::lamp(Gf2Poly::zero(), 0, 1),
            ]
            .into_iter()
            .map(|e| (self.render(&e), e))
            .collect(),
        }
    }

    /// Checks that `s` is a normal form of this monoid.
    pub fn validate(&self, s: &Element) -> Result<()> {
        match (self, s) {
            (Monoid::FreeMonoid { alphabet }, Element::Word(w)) => {
                if w.iter().all(|&l| (l as usize) < *alphabet) {
                    Ok(())
                } else {
                    Err(Error::InvalidElement(format!(
                        "letter outside alphabet of size {alphabet}"
                    )))
                }
            }
            (Monoid::FreeAbelian { rank }, Element::Vector(v)) => {
                if v.len() == *rank {
                    Ok(())
                } else {
                    Err(Error::InvalidElement(format!(
                        "vector of length {} in rank {rank}",
                        v.len()
                    )))
                }
            }
            (Monoid::AxB { .. }, Element::AxB { n, .. }) => {
                if *n >= 1 {
                    Ok(())
                } else {
                    Err(Error::InvalidElement("ax+b element needs n ≥ 1".into()))
                }
            }
            (Monoid::C3, Element::C3 { .. }) | (Monoid::Lamplighter, Element::Lamp { .. }) => {
                Ok(())
            }
            _ => Err(self.mismatch(s)),
        }
    }

    fn mismatch(&self, s: &Element) -> Error {
        Error::FamilyMismatch {
            expected: self.name(),
            found: s.family(),
        }
    }

    fn check(&self, s: &Element) -> Result<()> {
        if s.family() == self.name() {
            Ok(())
        } else {
            Err(self.mismatch(s))
        }
    }

    /// Normal form of `st`.
    pub fn multiply(&self, s: &Element, t: &Element) -> Result<Element> {
        self.check(s)?;
        self.check(t)?;
        Ok(match (s, t) {
            (Element::Word(u), Element::Word(v)) => {
                let mut w = u.clone();
                w.extend_from_slice(v);
                Element::Word(w)
            }
            (Element::Vector(u), Element::Vector(v)) => {
                if u.len() != v.len() {
                    return Err(Error::InvalidElement("rank mismatch".into()));
                }
                Element::Vector(u.iter().zip(v).map(|(a, b)| a + b).collect())
            }
            (Element::AxB { c, n }, Element::AxB { c: d, n: m }) => {
                // (c,n)(d,m) = (c+nd, nm)
                let c2 = n
                    .checked_mul(*d)
                    .and_then(|x| x.checked_add(*c))
                    .ok_or_else(overflow)?;
                Element::axb(c2, n.checked_mul(*m).ok_or_else(overflow)?)
            }
            (Element::C3 { a, b, k }, Element::C3 { a: a2, b: b2, k: k2 }) => {
                let (fa, fb) = flip_if(k % 2 == 1, *a2, *b2);
                Element::c3(a + fa, b + fb, k + k2)
            }
            (Element::Lamp { g, x, y }, Element::Lamp { g: h, x: u, y: v }) => {
                let moved = &lamp_modulus(*x, *y) * h;
                Element::lamp(g + &moved, x + u, y + v)
            }
            _ => unreachable!("family checked above"),
        })
    }

    /// Returns `u` with `su = t`, or `None` if `t ∉ sS`.
    pub fn left_divide(&self, s: &Element, t: &Element) -> Result<Option<Element>> {
        self.check(s)?;
        self.check(t)?;
        Ok(match (s, t) {
            (Element::Word(u), Element::Word(w)) => w
                .strip_prefix(u.as_slice())
                .map(|rest| Element::Word(rest.to_vec())),
            (Element::Vector(u), Element::Vector(w)) => {
                if u.iter().zip(w).all(|(a, b)| a <= b) {
                    Some(Element::Vector(u.iter().zip(w).map(|(a, b)| b - a).collect()))
                } else {
                    None
                }
            }
            (Element::AxB { c, n }, Element::AxB { c: c2, n: n2 }) => {
                if n2 % n == 0 && c2 >= c && (c2 - c) % n == 0 {
                    Some(Element::axb((c2 - c) / n, n2 / n))
                } else {
                    None
                }
            }
            (Element::C3 { a, b, k }, Element::C3 { a: a2, b: b2, k: k2 }) => {
                if a2 >= a && b2 >= b && k2 >= k {
                    let (da, db) = flip_if(k % 2 == 1, a2 - a, b2 - b);
                    Some(Element::c3(da, db, k2 - k))
                } else {
                    None
                }
            }
            (Element::Lamp { g, x, y }, Element::Lamp { g: h, x: u, y: v }) => {
                if u < x || v < y {
                    None
                } else {
                    Gf2Poly::exact_div(&(h + g), &lamp_modulus(*x, *y))
                        .map(|k| Element::lamp(k, u - x, v - y))
                }
            }
            _ => unreachable!("family checked above"),
        })
    }

    /// Canonical generator `r` of `sS ∩ tS`, or `None` if the ideals are disjoint.
    pub fn right_lcm(&self, s: &Element, t: &Element) -> Result<Option<Element>> {
        self.check(s)?;
        self.check(t)?;
        Ok(match (s, t) {
            (Element::Word(u), Element::Word(w)) => {
                if w.starts_with(u) {
                    Some(t.clone())
                } else if u.starts_with(w) {
                    Some(s.clone())
                } else {
                    None
                }
            }
            (Element::Vector(u), Element::Vector(w)) => Some(Element::Vector(
                u.iter().zip(w).map(|(a, b)| *a.max(b)).collect(),
            )),
            (Element::AxB { c, n }, Element::AxB { c: d, n: m }) => axb_lcm(*c, *n, *d, *m)?,
            (Element::C3 { a, b, k }, Element::C3 { a: a2, b: b2, k: k2 }) => {
                Some(Element::c3(*a.max(a2), *b.max(b2), *k.max(k2)))
            }
            (Element::Lamp { g, x, y }, Element::Lamp { g: h, x: u, y: v }) => {
                Gf2Poly::crt(g, &lamp_modulus(*x, *y), h, &lamp_modulus(*u, *v))
                    .map(|(f, _)| Element::lamp(f, *x.max(u), *y.max(v)))
            }
            _ => unreachable!("family checked above"),
        })
    }

    /// All elements of generator-word length at most `depth`, without
    /// duplicates, ordered by shortest word length and then by normal form.
    pub fn enumerate(&self, depth: usize) -> Vec<Element> {
        let gens: Vec<Element> = self.generators().into_iter().map(|(_, g)| g).collect();
        let mut seen = BTreeSet::new();
        let id = self.identity();
        seen.insert(id.clone());
        let mut out = vec![id.clone()];
        let mut frontier = vec![id];
        for _ in 0..depth {
            let mut next = BTreeSet::new();
            for s in &frontier {
                for g in &gens {
                    if let Ok(p) = self.multiply(s, g) {
                        if !seen.contains(&p) {
                            next.insert(p);
                        }
                    }
                }
            }
            for p in &next {
                seen.insert(p.clone());
            }
            out.extend(next.iter().cloned());
            frontier = next.into_iter().collect();
        }
        out
    }

    pub fn render(&self, s: &Element) -> String {
        match s {
            Element::Word(w) => {
                if w.is_empty() {
                    "1".to_string()
                } else {
                    w.iter().map(|&l| (b'a' + l) as char).collect()
                }
            }
            Element::Vector(v) => format!(
                "({})",
                v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
            ),
            Element::AxB { c, n } => format!("({c},{n})"),
            Element::C3 { a, b, k } => format!("({a},{b},{k})"),
            Element::Lamp { g, x, y } => format!("({},{x},{y})", g.to_hex()),
        }
    }

    /// Parses the text rendering produced by [`Monoid::render`].
    pub fn parse(&self, text: &str) -> Result<Element> {
        let text = text.trim();
        let bad = || Error::Parse(format!("`{text}` is not a {} element", self.name()));
        let tuple = || -> Result<Vec<&str>> {
            let inner = text
                .strip_prefix('(')
                .and_then(|t| t.strip_suffix(')'))
                .ok_or_else(bad)?;
            Ok(inner.split(',').map(str::trim).collect())
        };
        let num = |s: &str| s.parse::<u64>().map_err(|_| bad());
        let el = match self {
            Monoid::FreeMonoid { .. } => {
                if text == "1" || text.is_empty() {
                    Element::Word(Vec::new())
                } else if text.bytes().all(|b| b.is_ascii_lowercase()) {
                    Element::word(text)
                } else {
                    return Err(bad());
                }
            }
            Monoid::FreeAbelian { .. } => {
                Element::Vector(tuple()?.into_iter().map(num).collect::<Result<_>>()?)
            }
            Monoid::AxB { .. } => match tuple()?.as_slice() {
                [c, n] => Element::axb(num(c)?, num(n)?),
                _ => return Err(bad()),
            },
            Monoid::C3 => match tuple()?.as_slice() {
                [a, b, k] => Element::c3(num(a)?, num(b)?, num(k)?),
                _ => return Err(bad()),
            },
            Monoid::Lamplighter => match tuple()?.as_slice() {
                [g, x, y] => Element::lamp(
                    Gf2Poly::from_hex(g)?,
                    x.parse().map_err(|_| bad())?,
                    y.parse().map_err(|_| bad())?,
                ),
                _ => return Err(bad()),
            },
        };
        self.validate(&el)?;
        Ok(el)
    }
}

fn axb_lcm(c: u64, n: u64, d: u64, m: u64) -> Result<Option<Element>> {
    // (c,n)S = {(c', n'): n | n', c' ≥ c, c' ≡ c mod n}
    let g = n.gcd(&m);
    let (c_i, d_i) = (c as i128, d as i128);
    if (c_i - d_i).rem_euclid(g as i128) != 0 {
        return Ok(None);
    }
    let l = n.lcm(&m) as i128;
    let (n_i, m_g) = (n as i128, (m / g) as i128);
    let inv = mod_inverse((n / g) as i128, m_g);
    let k = ((d_i - c_i) / g as i128 * inv).rem_euclid(m_g.max(1));
    let r0 = (c_i + n_i * k).rem_euclid(l);
    let floor = c_i.max(d_i);
    let r = if r0 >= floor {
        r0
    } else {
        r0 + ((floor - r0 + l - 1) / l) * l
    };
    let r = u64::try_from(r).map_err(|_| overflow())?;
    Ok(Some(Element::axb(r, u64::try_from(l).map_err(|_| overflow())?)))
}

fn mod_inverse(a: i128, m: i128) -> i128 {
    if m == 1 {
        return 0;
    }
    let ext = a.rem_euclid(m).extended_gcd(&m);
    ext.x.rem_euclid(m)
}
