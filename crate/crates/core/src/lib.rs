//! Simulation and verification toolkit for device-independent randomness.
//!
//! The crate models Bell-test behaviors, bounds them over the local and
//! no-signaling polytopes, implements weak-source models and randomness
//! extractors with exhaustive oracles, and runs expansion and amplification
//! protocols against honest and adversarial device programs.
//!
//! The scenario, Bell-expression and LP layers are generic over [`Scalar`];
//! the aliases below fix the common instantiations.

pub mod bell;
pub mod error;
pub mod extractors;
pub mod gf2;
pub mod hashcover;
pub mod lp;
pub mod protocols;
pub mod quantum;
pub mod scalar;
pub mod scenario;
pub mod sources;

pub use error::{Error, Result};
pub use scalar::Scalar;
pub use scenario::{DeterministicPoint, Scenario};
pub use quantum::QuantumStrategy;

pub use num_rational::Rational64;

pub type Behavior = scenario::Behavior<f64>;
pub type BehaviorF32 = scenario::Behavior<f32>;
pub type ExactBehavior = scenario::Behavior<Rational64>;

pub type BellExpression = bell::BellExpression<f64>;
pub type BellExpressionF32 = bell::BellExpression<f32>;
pub type ExactBellExpression = bell::BellExpression<Rational64>;

pub type LinearProgram = lp::LinearProgram<f64>;
pub type LinearProgramF32 = lp::LinearProgram<f32>;
pub type ExactLinearProgram = lp::LinearProgram<Rational64>;
