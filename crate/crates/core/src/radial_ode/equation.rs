//! The conformal scalar curvature equation `c_n Δu − k u + K u^σ = 0` and
//! its residual.

use serde::Serialize;

use crate::manifold::{ModelManifold, RadialFn, RadialValue};
use crate::{Error, Real, Result};

/// Exponents of the equation in dimension `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConformalExponents<T> {
    pub n: usize,
    /// `4(n−1)/(n−2)`
    pub c_n: T,
    /// `(n+2)/(n−2)`
    pub sigma: T,
    /// `1 − σ = −4/(n−2)`
    pub alpha: T,
}

impl<T: Real> ConformalExponents<T> {
    pub fn new(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidDimension(n, 3));
        }
        let nf = T::from_count(n);
        let two = T::lit(2.0);
        let sigma = (nf + two) / (nf - two);
        Ok(ConformalExponents {
            n,
            c_n: T::lit(4.0) * (nf - T::one()) / (nf - two),
            sigma,
            alpha: T::one() - sigma,
        })
    }

    /// Exponent of the conformal length element `u^{2/(n−2)}`.
    pub fn length_power(&self) -> T {
        T::lit(2.0) / (T::from_count(self.n) - T::lit(2.0))
    }
}

/// Sign pattern of the residual on a grid.
///
/// A supersolution is a positive `u` with `c_n Δu − k u + K u^σ <= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ResidualClass {
    Solution,
    Supersolution,
    Subsolution,
    Mixed,
}

impl ResidualClass {
    pub fn is_supersolution(self) -> bool {
        matches!(self, ResidualClass::Solution | ResidualClass::Supersolution)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport<T> {
    pub max_abs: T,
    pub argmax: T,
    pub class: ResidualClass,
    pub tol: T,
    /// `(r, R(r))` on the grid.
    pub values: Vec<(T, T)>,
}

/// Default threshold for treating a residual as zero.
pub const RESIDUAL_TOL: f64 = 1e-8;

/// `R(r) = c_n (u'' + Δr u') − k u + K u^σ` for radial `u`. At the pole,
/// `Δu(0) = n u''(0)`.
pub fn residual_at<T: Real>(
    manifold: &ModelManifold<T>,
    k: &(impl RadialValue<T> + ?Sized),
    ex: &ConformalExponents<T>,
    r: T,
    u: T,
    du: T,
    d2u: T,
) -> Result<T> {
    let lap = if r == T::zero() {
        T::from_count(manifold.dim()) * d2u
    } else {
        d2u + manifold.laplacian_r(r)? * du
    };
    let kk = manifold.scalar_curvature(r)?;
    Ok(ex.c_n * lap - kk * u + k.value(r)? * u.powf(ex.sigma))
}

/// Evaluates the residual of `u` on `grid` and classifies its sign with
/// the default tolerance.
pub fn residual<T: Real>(
    manifold: &ModelManifold<T>,
    k: &(impl RadialValue<T> + ?Sized),
    u: &(impl RadialFn<T> + ?Sized),
    grid: &[T],
) -> Result<ResidualReport<T>> {
    residual_with(manifold, k, u, grid, T::lit(RESIDUAL_TOL))
}

pub fn residual_with<T: Real>(
    manifold: &ModelManifold<T>,
    k: &(impl RadialValue<T> + ?Sized),
    u: &(impl RadialFn<T> + ?Sized),
    grid: &[T],
    tol: T,
) -> Result<ResidualReport<T>> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("empty residual grid".into()));
    }
    let ex = ConformalExponents::new(manifold.dim())?;
    let mut values = Vec::with_capacity(grid.len());
    let mut max_abs = T::zero();
    let mut argmax = grid[0];
    let (mut above, mut below) = (false, false);
    for &r in grid {
        let j = u.jet(r)?;
        if !(j.value > T::zero()) {
            return Err(Error::InvalidArgument(format!(
                "u must be positive, got u({r}) = {}",
                j.value
            )));
        }
        let res = residual_at(manifold, k, &ex, r, j.value, j.d1, j.d2)?;
        if res.abs() > max_abs {
            max_abs = res.abs();
            argmax = r;
        }
        above |= res > tol;
        below |= res < -tol;
        values.push((r, res));
    }
    let class = match (above, below) {
        (false, false) => ResidualClass::Solution,
        (false, true) => ResidualClass::Supersolution,
        (true, false) => ResidualClass::Subsolution,
        (true, true) => ResidualClass::Mixed,
    };
    Ok(ResidualReport {
        max_abs,
        argmax,
        class,
        tol,
        values,
    })
}
