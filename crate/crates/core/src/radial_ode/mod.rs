//! The radial conformal scalar curvature equation: shooting, residuals and
//! checks on computed profiles.

mod analysis;
mod equation;
mod solver;

pub use analysis::{
    conformal_length, inf_estimate, verify_average_bound, AverageBoundReport, BoundSample,
    ConformalLength, InfEstimate, TailKind, Trend,
};
pub use equation::{
    residual, residual_at, residual_with, ConformalExponents, ResidualClass, ResidualReport,
    RESIDUAL_TOL,
};
pub use solver::{solve_radial, Solution, SolvePolicy, SolveStats, SolveStatus};
