//! Catalytic relative majorization of pairs of finite distributions.
//!
//! Decisions run in exact rational arithmetic; constructions come with
//! certificates that can be re-checked independently. Most types are generic
//! over the scalar: `f64`, `f32`, or [`Rational`].

pub mod catalysis;
pub mod channel;
pub mod channels;
pub mod distribution;
pub mod divergence;
pub mod error;
pub mod json;
pub mod majorize;
pub mod relmaj;
pub mod scalar;

pub use catalysis::{
    check_approximate_conditions, check_conditions, check_exact_conditions, check_unital_conditions,
    converse_audit, search_catalyst, verify_certificate, ConversionCertificate, ConversionInstance,
    Mode, SearchOptions, SearchOutcome,
};
pub use channel::{apply, compose, tensor, StochasticChannel};
pub use distribution::{marginals, trace_distance, Distribution, JointDistribution};
pub use divergence::{relative_entropy, renyi_divergence, renyi_entropy, Order};
pub use error::{Error, Result};
pub use relmaj::{blackwell_criterion, relatively_majorizes, DistPair};
pub use scalar::{Backend, Rational, Scalar};

pub type RatDistribution = Distribution<Rational>;
pub type FloatDistribution = Distribution<f64>;
pub type RatJoint = JointDistribution<Rational>;
pub type FloatJoint = JointDistribution<f64>;
pub type RatChannel = StochasticChannel<Rational>;
pub type FloatChannel = StochasticChannel<f64>;
pub type RatPair = DistPair<Rational>;
pub type FloatPair = DistPair<f64>;
pub type RatInstance = ConversionInstance<Rational>;
pub type FloatInstance = ConversionInstance<f64>;
