//! Exact distributions of randomly signed sums S = Σ εᵢvᵢ and mechanical
//! checks of the lower bound P(|S| ≤ 1) ≥ G(¼) ≈ 0.42768 for Σvᵢ² ≤ 1.

pub mod bounds;
pub mod claims;
pub mod dist;
pub mod error;
pub mod numerics;
pub mod report;
pub mod search;
pub mod stopping;
pub mod surd;

pub use bounds::BoundTable;
pub use dist::{
    Caps, Counter, Engine, ExactProbability, SignedSumDistribution, WeightSpec, WeightVector,
};
pub use error::{Error, Result};
pub use report::VerificationReport;
pub use surd::Surd;
