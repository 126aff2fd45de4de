//! Risk estimation toolkit: VaR/CVaR estimators for light- and
//! heavy-tailed samples, evaluators for the matching concentration
//! bounds, a CVaR-criterion successive-rejects bandit, and a seeded
//! Monte Carlo harness that measures how the estimators and the bandit
//! actually behave against those bounds.

pub mod bounds;
pub mod distributions;
pub mod estimators;
pub mod quad;
pub mod rng;

pub use bounds::{BoundSpec, BoundValue, BoundsError, HeavyBoundParams, LightBoundParams, Regime};
pub use distributions::{
    DistributionError, DistributionSpec, LightTail, MomentBound, RiskLevel, TailClass,
};
pub use estimators::{EstimatorError, EstimatorKind, RiskEstimate, SampleBatch};
pub use rng::SeedStream;
