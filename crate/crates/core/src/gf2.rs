//! Polynomials over GF(2).
//!
//! The lamplighter kernel `⊕_{Z₊} Z/2Z` is identified with `GF(2)[T]`: the
//! shift becomes multiplication by `T` and `id + shift` multiplication by
//! `1 + T`. Coefficients are packed into `u64` limbs, lowest degree first.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul};

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Gf2Poly {
    // invariant: no trailing zero limb
    limbs: Vec<u64>,
}

impl Gf2Poly {
    pub fn zero() -> Self {
        Gf2Poly { limbs: Vec::new() }
    }

    pub fn one() -> Self {
        Gf2Poly { limbs: vec![1] }
    }

    /// The monomial `T^k`.
    pub fn monomial(k: usize) -> Self {
        let mut limbs = vec![0u64; k / 64 + 1];
        limbs[k / 64] = 1u64 << (k % 64);
        Gf2Poly { limbs }
    }

    /// `1 + T`
    pub fn one_plus_t() -> Self {
        Gf2Poly { limbs: vec![0b11] }
    }

    /// Bit `i` of `bits` is the coefficient of `T^i`.
    pub fn from_bits(bits: u64) -> Self {
        let mut p = Gf2Poly { limbs: vec![bits] };
        p.normalize();
        p
    }

    pub fn from_limbs(limbs: Vec<u64>) -> Self {
        let mut p = Gf2Poly { limbs };
        p.normalize();
        p
    }

    /// Low 64 coefficients as an integer; `None` if the degree is 64 or more.
    pub fn to_bits(&self) -> Option<u64> {
        match self.limbs.len() {
            0 => Some(0),
            1 => Some(self.limbs[0]),
            _ => None,
        }
    }

    fn normalize(&mut self) {
        while self.limbs.last() == Some(&0) {
            self.limbs.pop();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.limbs.is_empty()
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        let top = *self.limbs.last()?;
        Some((self.limbs.len() - 1) * 64 + 63 - top.leading_zeros() as usize)
    }

    pub fn coeff(&self, i: usize) -> bool {
        self.limbs
            .get(i / 64)
            .is_some_and(|l| (l >> (i % 64)) & 1 == 1)
    }

    fn flip(&mut self, i: usize) {
        if self.limbs.len() <= i / 64 {
            self.limbs.resize(i / 64 + 1, 0);
        }
        self.limbs[i / 64] ^= 1u64 << (i % 64);
    }

    pub fn shl(&self, k: usize) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let words = k / 64;
        let bits = k % 64;
        let mut limbs = vec![0u64; self.limbs.len() + words + 1];
        for (i, &l) in self.limbs.iter().enumerate() {
            limbs[i + words] ^= l << bits;
            if bits != 0 {
                limbs[i + words + 1] ^= l >> (64 - bits);
            }
        }
        Gf2Poly::from_limbs(limbs)
    }

    pub fn pow(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    /// Euclidean division. Panics on a zero divisor.
    pub fn div_rem(&self, divisor: &Self) -> (Self, Self) {
        let dd = divisor.degree().expect("division by the zero polynomial");
        let mut rem = self.clone();
        let mut quot = Self::zero();
        while let Some(rd) = rem.degree() {
            if rd < dd {
                break;
            }
            let shift = rd - dd;
            quot.flip(shift);
            rem = &rem + &divisor.shl(shift);
        }
        quot.normalize();
        (quot, rem)
    }

    pub fn rem(&self, divisor: &Self) -> Self {
        self.div_rem(divisor).1
    }

    pub fn divides(&self, other: &Self) -> bool {
        if self.is_zero() {
            return other.is_zero();
        }
        other.rem(self).is_zero()
    }

    /// Exact quotient `other / self`, or `None` if `self` does not divide `other`.
    pub fn exact_div(other: &Self, by: &Self) -> Option<Self> {
        if by.is_zero() {
            return None;
        }
        let (q, r) = other.div_rem(by);
        r.is_zero().then_some(q)
    }

    pub fn gcd(a: &Self, b: &Self) -> Self {
        let (mut a, mut b) = (a.clone(), b.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a
    }

    /// Returns `(g, u, v)` with `u·a + v·b = g = gcd(a, b)`.
    pub fn ext_gcd(a: &Self, b: &Self) -> (Self, Self, Self) {
        let (mut r0, mut r1) = (a.clone(), b.clone());
        let (mut s0, mut s1) = (Self::one(), Self::zero());
        let (mut t0, mut t1) = (Self::zero(), Self::one());
        while !r1.is_zero() {
            let (q, r) = r0.div_rem(&r1);
            r0 = std::mem::replace(&mut r1, r);
            let s = &s0 + &(&q * &s1);
            s0 = std::mem::replace(&mut s1, s);
            let t = &t0 + &(&q * &t1);
            t0 = std::mem::replace(&mut t1, t);
        }
        (r0, s0, t0)
    }

    /// Solves `f ≡ g (mod m1)`, `f ≡ h (mod m2)`. Returns the canonical
    /// solution of degree below `deg lcm(m1, m2)` together with that lcm,
    /// or `None` when `gcd(m1, m2)` does not divide `g - h`.
    pub fn crt(g: &Self, m1: &Self, h: &Self, m2: &Self) -> Option<(Self, Self)> {
        let (d, u, _v) = Self::ext_gcd(m1, m2);
        let diff = h + g;
        let k = Self::exact_div(&diff, &d)?;
        let m2_over_d = Self::exact_div(m2, &d).expect("gcd divides its argument");
        let lcm = m1 * &m2_over_d;
        // f = g + m1·u·(h-g)/d
        let f = g + &(&(m1 * &u) * &k);
        Some((f.rem(&lcm), lcm))
    }

    /// Lowercase hex of the coefficient vector read as a binary integer.
    pub fn to_hex(&self) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut s = format!("{:x}", self.limbs.last().unwrap());
        for l in self.limbs.iter().rev().skip(1) {
            s.push_str(&format!("{:016x}", l));
        }
        s
    }

    pub fn from_hex(text: &str) -> Result<Self> {
        let t = text.trim().trim_start_matches("0x");
        if t.is_empty() {
            return Err(Error::Parse(format!("empty polynomial literal `{text}`")));
        }
        let mut limbs = Vec::new();
        let bytes = t.as_bytes();
        let mut end = bytes.len();
        while end > 0 {
            let start = end.saturating_sub(16);
            let chunk = &t[start..end];
            let limb = u64::from_str_radix(chunk, 16)
                .map_err(|_| Error::Parse(format!("bad hex polynomial `{text}`")))?;
            limbs.push(limb);
            end = start;
        }
        Ok(Gf2Poly::from_limbs(limbs))
    }
}

impl Add for &Gf2Poly {
    type Output = Gf2Poly;
    fn add(self, rhs: &Gf2Poly) -> Gf2Poly {
        let n = self.limbs.len().max(rhs.limbs.len());
        let limbs = (0..n)
            .map(|i| self.limbs.get(i).unwrap_or(&0) ^ rhs.limbs.get(i).unwrap_or(&0))
            .collect();
        Gf2Poly::from_limbs(limbs)
    }
}

impl Mul for &Gf2Poly {
    type Output = Gf2Poly;
    fn mul(self, rhs: &Gf2Poly) -> Gf2Poly {
        if self.is_zero() || rhs.is_zero() {
            return Gf2Poly::zero();
        }
        let mut out = vec![0u64; self.limbs.len() + rhs.limbs.len()];
        for (i, &a) in self.limbs.iter().enumerate() {
            for bit in 0..64 {
                if (a >> bit) & 1 == 0 {
                    continue;
                }
                for (j, &b) in rhs.limbs.iter().enumerate() {
                    out[i + j] ^= b << bit;
                    if bit != 0 {
                        out[i + j + 1] ^= b >> (64 - bit);
                    }
                }
            }
        }
        Gf2Poly::from_limbs(out)
    }
}

impl Ord for Gf2Poly {
    fn cmp(&self, other: &Self) -> Ordering {
        self.limbs
            .len()
            .cmp(&other.limbs.len())
            .then_with(|| self.limbs.iter().rev().cmp(other.limbs.iter().rev()))
    }
}

impl PartialOrd for Gf2Poly {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Gf2Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Gf2Poly(0x{})", self.to_hex())
    }
}

impl fmt::Display for Gf2Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}
