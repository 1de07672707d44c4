//! KMS states of semigroup C*-algebras of right LCM monoids with a scale.
//!
//! The crate evaluates, for five concrete families of right LCM monoids
//! equipped with a scale `N: S → [1, ∞)`:
//!
//! * the quotient quasi-lattice `S/~N` and its join ([`quotient`]),
//! * the measure `μ_{N,β}` on cylinder sets, partition functions and the
//!   existence criterion ([`measure`]),
//! * finite-type KMS states, ground and KMS∞ states ([`kms`]),
//! * the two extreme states `φ′ ≤ φ″` that decide uniqueness ([`uniqueness`]).
//!
//! All combinatorics (normal forms, LCMs, `N`-values, class order) is exact;
//! floating point enters only when `N^{-β}` is evaluated.

pub mod error;
pub mod gf2;
pub mod kms;
pub mod measure;
pub mod monoid;
pub mod quotient;
pub mod scale;
pub mod special;
pub mod uniqueness;

pub use error::{Error, Result};
pub use gf2::Gf2Poly;
pub use monoid::{Element, Monoid};
pub use quotient::{Join, Level, NClass};
pub use scale::Scale;
