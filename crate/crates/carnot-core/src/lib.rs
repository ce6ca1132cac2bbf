//! Step-two Carnot groups with an H-type bracket.
//!
//! Points are stored in exponential coordinates `(x, t)` with `x` in the
//! horizontal layer and `t` in the centre. The group law is
//! `(x, t)(x', t') = (x + x', t + t' + [x, x'] / 2)`.

pub mod algebra;
pub mod cover;
pub mod error;
pub mod group;
pub mod measure;
pub mod norm;
pub mod rng;
pub mod selftest;

pub use algebra::{AlgebraKind, AlgebraSpec, BracketTerm, HTypeAlgebra};
pub use cover::{greedy_cover, Cover};
pub use error::{Error, Result};
pub use group::GroupPoint;
pub use measure::DiscreteMeasure;
pub use norm::HomogeneousNorm;

/// Library version reported in experiment output.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
