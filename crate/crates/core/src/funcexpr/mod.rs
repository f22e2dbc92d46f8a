//! Arithmetic expressions in the single variable `r`, evaluated together
//! with their first and second derivatives.
//!
//! Used for the warping function, the prescribed curvature and the
//! background-curvature override supplied through configuration.

mod ast;
mod eval;
mod jet;
mod parse;

pub use ast::{BinOp, Constant, Expr, Func};
pub use eval::EvalError;
pub use jet::Jet2;
pub use parse::{parse, SyntaxError};

impl std::str::FromStr for Expr {
    type Err = SyntaxError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}
