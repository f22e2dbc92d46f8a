use thiserror::Error;

use super::ast::{BinOp, Constant, Expr, Func};
use super::jet::Jet2;
use crate::Real;

/// Evaluation failures. `node` is the printed sub-expression that failed.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("domain error in `{node}` at r = {r}: {reason}")]
    Domain {
        node: String,
        r: f64,
        reason: &'static str,
    },
    #[error("non-finite value in `{node}` at r = {r}")]
    Overflow { node: String, r: f64 },
}

impl Expr {
    /// Evaluates `(e(r), e'(r), e''(r))` by forward-mode differentiation.
    pub fn eval_jet2<T: Real>(&self, r: T) -> Result<Jet2<T>, EvalError> {
        let x = Jet2::variable(r);
        self.jet_at(x, r)
    }

    /// Plain value, still checked for domain errors and overflow.
    pub fn eval<T: Real>(&self, r: T) -> Result<T, EvalError> {
        Ok(self.eval_jet2(r)?.value)
    }

    fn jet_at<T: Real>(&self, x: Jet2<T>, r: T) -> Result<Jet2<T>, EvalError> {
        let domain = |reason| EvalError::Domain {
            node: self.to_string(),
            r: r.as_f64(),
            reason,
        };
        let out = match self {
            Expr::Num(v) => Jet2::constant(T::lit(*v)),
            Expr::Var => x,
            Expr::Const(Constant::Pi) => Jet2::constant(T::PI()),
            Expr::Const(Constant::E) => Jet2::constant(T::E()),
            Expr::Neg(e) => -e.jet_at(x, r)?,
            Expr::Binary(op, lhs, rhs) => {
                let a = lhs.jet_at(x, r)?;
                match op {
                    BinOp::Add => a + rhs.jet_at(x, r)?,
                    BinOp::Sub => a - rhs.jet_at(x, r)?,
                    BinOp::Mul => a * rhs.jet_at(x, r)?,
                    BinOp::Div => {
                        let b = rhs.jet_at(x, r)?;
                        if b.value == T::zero() {
                            return Err(domain("division by zero"));
                        }
                        a / b
                    }
                    BinOp::Pow => power(a, rhs, x, r, domain)?,
                }
            }
            Expr::Call(func, args) => {
                let a = args[0].jet_at(x, r)?;
                match func {
                    Func::Sin => a.sin(),
                    Func::Cos => a.cos(),
                    Func::Tan => a.tan(),
                    Func::Sinh => a.sinh(),
                    Func::Cosh => a.cosh(),
                    Func::Tanh => a.tanh(),
                    Func::Coth => {
                        if a.value == T::zero() {
                            return Err(domain("pole of coth at 0"));
                        }
                        a.coth()
                    }
                    Func::Exp => a.exp(),
                    Func::Log => {
                        if a.value <= T::zero() {
                            return Err(domain("log of a non-positive number"));
                        }
                        a.ln()
                    }
                    Func::Sqrt => {
                        if a.value < T::zero() {
                            return Err(domain("sqrt of a negative number"));
                        }
                        a.sqrt()
                    }
                    Func::Abs => a.abs(),
                    Func::Atan => a.atan(),
                    Func::Pow => power(a, &args[1], x, r, domain)?,
                }
            }
        };
        if !out.is_finite() {
            return Err(EvalError::Overflow {
                node: self.to_string(),
                r: r.as_f64(),
            });
        }
        Ok(out)
    }
}

fn power<T: Real>(
    base: Jet2<T>,
    exponent: &Expr,
    x: Jet2<T>,
    r: T,
    domain: impl Fn(&'static str) -> EvalError,
) -> Result<Jet2<T>, EvalError> {
    let e = exponent.jet_at(x, r)?;
    if exponent.is_constant() {
        let p = e.value;
        if base.value < T::zero() && p.fract() != T::zero() {
            return Err(domain("non-integer power of a negative number"));
        }
        if base.value == T::zero() && p < T::zero() {
            return Err(domain("negative power of zero"));
        }
        Ok(base.powf(p))
    } else {
        if base.value <= T::zero() {
            return Err(domain("variable exponent needs a positive base"));
        }
        Ok(base.pow(e))
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use super::*;

    fn jet(src: &str, r: f64) -> Jet2<f64> {
        parse(src).unwrap().eval_jet2(r).unwrap()
    }

    #[test]
    fn sinh_at_one_matches_closed_form() {
        let j = jet("sinh(r)", 1.0);
        assert!((j.value - 1.175201).abs() < 1e-6);
        assert!((j.d1 - 1.543081).abs() < 1e-6);
        assert!((j.d2 - 1.175201).abs() < 1e-6);
    }

    #[test]
    fn polynomial_and_constant() {
        let j = jet("r^2", 2.0);
        assert_eq!((j.value, j.d1, j.d2), (4.0, 4.0, 2.0));
        for r in [0.0, 1.5, -3.0] {
            let j = jet("7", r);
            assert_eq!((j.value, j.d1, j.d2), (7.0, 0.0, 0.0));
        }
    }

    #[test]
    fn domain_errors_name_the_node() {
        let err = parse("1 + log(r - 2)").unwrap().eval_jet2(1.0).unwrap_err();
        match err {
            EvalError::Domain { node, .. } => assert_eq!(node, "log(r - 2)"),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            parse("coth(r)").unwrap().eval_jet2(0.0),
            Err(EvalError::Domain { .. })
        ));
        assert!(matches!(
            parse("(r - 2)^0.5").unwrap().eval_jet2(1.0),
            Err(EvalError::Domain { .. })
        ));
        assert!(matches!(
            parse("1/(r - 1)").unwrap().eval_jet2(1.0),
            Err(EvalError::Domain { .. })
        ));
        assert!(matches!(
            parse("r^r").unwrap().eval_jet2(-1.0),
            Err(EvalError::Domain { .. })
        ));
    }

    #[test]
    fn overflow_is_reported() {
        assert!(matches!(
            parse("exp(r)").unwrap().eval_jet2(1000.0),
            Err(EvalError::Overflow { .. })
        ));
        // derivative of sqrt blows up at 0
        assert!(matches!(
            parse("sqrt(r)").unwrap().eval_jet2(0.0),
            Err(EvalError::Overflow { .. })
        ));
    }

    #[test]
    fn negative_base_integer_power() {
        let j = jet("r^3", -2.0);
        assert_eq!((j.value, j.d1, j.d2), (-8.0, 12.0, -12.0));
        let j = jet("pow(r, -1)", -2.0);
        assert_eq!((j.value, j.d1, j.d2), (-0.5, -0.25, -0.25));
    }

    #[test]
    fn variable_exponent() {
        // d/dr r^r = r^r (ln r + 1)
        let j = jet("r^r", 2.0);
        assert!((j.d1 - 4.0 * (2f64.ln() + 1.0)).abs() < 1e-12);
        // (r^r)'' = r^r ((ln r + 1)^2 + 1/r)
        let l = 2f64.ln() + 1.0;
        assert!((j.d2 - 4.0 * (l * l + 0.5)).abs() < 1e-12);
    }

    #[test]
    fn coth_derivatives() {
        let j = jet("coth(r)", 1.0);
        let c = 1.0 / 1f64.tanh();
        assert!((j.value - c).abs() < 1e-14);
        assert!((j.d1 - (1.0 - c * c)).abs() < 1e-14);
        assert!((j.d2 - (-2.0 * c * (1.0 - c * c))).abs() < 1e-13);
    }
}
