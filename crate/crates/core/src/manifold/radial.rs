//! Radial and direction-dependent functions on a model manifold.

use crate::funcexpr::{Expr, Jet2};
use crate::{Error, Real, Result};

/// A function of the radius that can only be evaluated pointwise.
///
/// Every [`RadialFn`] is also a `RadialValue`.
pub trait RadialValue<T>: Send + Sync {
    fn value(&self, r: T) -> Result<T>;
}

/// A function of the radius that yields its first two derivatives.
pub trait RadialFn<T>: RadialValue<T> {
    fn jet(&self, r: T) -> Result<Jet2<T>>;
}

macro_rules! value_from_jet {
    ($ty:ty $(, $gen:ident)*) => {
        impl<T: Real $(, $gen)*> RadialValue<T> for $ty
        where
            $ty: RadialFn<T>,
        {
            fn value(&self, r: T) -> Result<T> {
                Ok(self.jet(r)?.value)
            }
        }
    };
}

value_from_jet!(Expr);
value_from_jet!(ConstantFn<T>);
value_from_jet!(JetFn<F>, F);

impl<T: Real> RadialFn<T> for Expr {
    fn jet(&self, r: T) -> Result<Jet2<T>> {
        Ok(self.eval_jet2(r)?)
    }
}

/// Constant function.
#[derive(Debug, Clone, Copy)]
pub struct ConstantFn<T>(pub T);

impl<T: Real> RadialFn<T> for ConstantFn<T> {
    fn jet(&self, _r: T) -> Result<Jet2<T>> {
        Ok(Jet2::constant(self.0))
    }
}

/// Adapts a closure returning a full jet.
pub struct JetFn<F>(pub F);

impl<T, F> RadialFn<T> for JetFn<F>
where
    T: Real,
    F: Fn(T) -> Jet2<T> + Send + Sync,
{
    fn jet(&self, r: T) -> Result<Jet2<T>> {
        let j = (self.0)(r);
        if !j.is_finite() {
            return Err(Error::Eval(crate::funcexpr::EvalError::Overflow {
                node: "<closure>".into(),
                r: r.as_f64(),
            }));
        }
        Ok(j)
    }
}

/// Adapts a closure returning only values.
pub struct ValueFn<F>(pub F);

impl<T, F> RadialValue<T> for ValueFn<F>
where
    T: Real,
    F: Fn(T) -> Result<T> + Send + Sync,
{
    fn value(&self, r: T) -> Result<T> {
        (self.0)(r)
    }
}

/// Unit vector in `R^n`, normalised on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitVector<T>(Vec<T>);

impl<T: Real> UnitVector<T> {
    /// Returns `None` for the zero vector or non-finite input.
    pub fn new(mut v: Vec<T>) -> Option<Self> {
        let norm = v.iter().map(|&x| x * x).sum::<T>().sqrt();
        if !(norm.is_finite() && norm > T::zero()) {
            return None;
        }
        for x in &mut v {
            *x = *x / norm;
        }
        Some(UnitVector(v))
    }

    pub fn components(&self) -> &[T] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

/// A function of a point `r·ξ`, written in polar form as `(r, ξ)`.
pub trait DirectionFn<T>: Send + Sync {
    fn eval(&self, r: T, xi: &UnitVector<T>) -> Result<T>;
}

impl<T, F> DirectionFn<T> for F
where
    T: Real,
    F: Fn(T, &UnitVector<T>) -> Result<T> + Send + Sync,
{
    fn eval(&self, r: T, xi: &UnitVector<T>) -> Result<T> {
        self(r, xi)
    }
}

/// Views a radial function as a direction function that ignores `ξ`.
pub struct Radial<'a, F: ?Sized>(pub &'a F);

impl<T, F> DirectionFn<T> for Radial<'_, F>
where
    T: Real,
    F: RadialValue<T> + ?Sized,
{
    fn eval(&self, r: T, _xi: &UnitVector<T>) -> Result<T> {
        self.0.value(r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_vector_normalises() {
        let u = UnitVector::new(vec![3.0f64, 4.0]).unwrap();
        assert_eq!(u.components(), &[0.6, 0.8]);
        assert!(UnitVector::new(vec![0.0f64, 0.0]).is_none());
        assert!(UnitVector::new(vec![f64::NAN]).is_none());
    }

    #[test]
    fn expression_is_a_radial_value() {
        let e: Expr = "r^2".parse().unwrap();
        assert_eq!(RadialValue::<f64>::value(&e, 3.0).unwrap(), 9.0);
        let k = ConstantFn(2.5f64);
        assert_eq!(k.value(100.0).unwrap(), 2.5);
    }
}
