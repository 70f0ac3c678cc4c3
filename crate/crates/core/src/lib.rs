//! Weighted group algebras at desk scale.
//!
//! The crate is organised bottom-up:
//!
//! - [`group`]: exact normal-form arithmetic for a closed catalog of finitely
//!   generated groups, Cayley-ball enumeration and word lengths.
//! - [`growth`]: growth functions evaluated in log-space, submultiplicativity
//!   checks and the comparison relation with witness search.
//! - [`algebra`]: sparse group-algebra elements, Hopf structure maps and the
//!   weighted ℓ^p family of norms together with the inequality checkers.
//! - [`spectral`]: summability diagnostics (nuclearity, ℓ^p sandwich, complete
//!   growth series).
//! - [`bw`]: the recursive factorial-scaled seminorm scheme.
//! - [`verify`]: the deterministic verification battery behind `wga verify-all`.

pub mod algebra;
pub mod bw;
mod error;
pub mod group;
pub mod growth;
mod logvalue;
pub mod sample;
pub mod spectral;
pub mod verify;

pub use algebra::{AlgebraElement, NormSpec, ProductAlgebraElement, Exponent};
pub use error::{Error, Result};
pub use group::{Element, GroupFamily, GroupMorphism, GroupSpec, GrowthCounts, LengthTable};
pub use growth::{GrowthFunction, GrowthWitness, LogGrowth, SampledGrowth};
pub use logvalue::LogValue;

/// Relative tolerance for equality claims between two computed routes.
pub const EQUALITY_TOLERANCE: f64 = 1e-9;

/// Relative slack granted on the large side of inequality claims.
pub const INEQUALITY_TOLERANCE: f64 = 1e-9;
