//! Adaptive integration, nested ball integrals and improper-integral
//! classification.

mod adaptive;
mod improper;
mod nested;

pub use adaptive::{integrate, integrate_split, integrate_with, QuadPolicy, QuadResult};
pub use improper::{
    classify_improper, limit_at_infinity, ClassifyPolicy, ImproperKind, ImproperResult,
    LimitKind, LimitPolicy, LimitResult, Sign,
};
pub use nested::{
    ball_integral, mean_k_ball, nested_i, nested_i_on_grid, NestedIntegral, SMALL_BALL,
};
