//! Numerical geometry of rotationally symmetric Cartan–Hadamard manifolds
//! and the conformal scalar curvature equation on them.
//!
//! The core is generic over the scalar type through [`Real`]; the aliases
//! at the crate root fix it to `f64`.

pub mod criteria;
pub mod error;
pub mod funcexpr;
pub mod manifold;
pub mod quadrature;
pub mod radial_ode;
pub mod scalar;

pub use error::{Error, Result};
pub use funcexpr::{parse, EvalError, Expr, Jet2, SyntaxError};
pub use scalar::Real;

pub type Jet = Jet2<f64>;
pub type Manifold = manifold::ModelManifold<f64>;
pub type Verdict = criteria::Verdict<f64>;
pub type CriteriaPolicy = criteria::CriteriaPolicy<f64>;
pub type GrowthReport = criteria::GrowthReport<f64>;
pub type Solution = radial_ode::Solution<f64>;
pub type SolvePolicy = radial_ode::SolvePolicy<f64>;
pub type QuadPolicy = quadrature::QuadPolicy<f64>;
