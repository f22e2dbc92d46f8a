use serde::Serialize;

use crate::manifold::ModelManifold;
use crate::{Error, Real, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthPolicy<T> {
    /// Smallest radius of the geometric grid.
    pub r_min: T,
    /// Required `growth_factor` for the check to pass.
    pub factor: T,
}

impl<T: Real> Default for GrowthPolicy<T> {
    fn default() -> Self {
        GrowthPolicy {
            r_min: T::lit(0.01),
            factor: T::one(),
        }
    }
}

/// Behaviour of `V(r) / r^{n-2+δ}` on a geometric grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthReport<T> {
    pub delta: T,
    pub radii: Vec<T>,
    pub ratios: Vec<T>,
    /// True when the ratio never decreases beyond rounding.
    pub nondecreasing: bool,
    pub first_decrease: Option<T>,
    /// `ratio(r_max) / ratio(r_max / 4)`.
    pub growth_factor: T,
    /// `ratio(r_max) / ratio(r_min)`.
    pub span_growth: T,
    pub passed: bool,
}

/// Samples `V(r) / r^{n-2+δ}` for `0 <= δ < 1`. On a Cartan–Hadamard
/// manifold `Δr >= (n-1)/r`, so the ratio is nondecreasing.
///
/// Ratios are formed in log space so that exponential area growth does
/// not overflow before the division.
pub fn volume_growth<T: Real>(
    manifold: &ModelManifold<T>,
    delta: T,
    r_max: T,
    n_grid: usize,
    policy: &GrowthPolicy<T>,
) -> Result<GrowthReport<T>> {
    if !(delta >= T::zero() && delta < T::one()) {
        return Err(Error::DeltaOutOfRange(delta.as_f64()));
    }
    if !(policy.r_min > T::zero() && r_max > policy.r_min) {
        return Err(Error::InvalidArgument(format!(
            "growth grid needs 0 < r_min < r_max, got [{}, {r_max}]",
            policy.r_min
        )));
    }
    let n = n_grid.max(2);
    let span = r_max / policy.r_min;
    let power = T::from_count(manifold.dim() - 2) + delta;
    let mut radii = Vec::with_capacity(n);
    let mut ratios = Vec::with_capacity(n);
    let at = |r: T| -> Result<T> {
        let v = manifold.volume_sphere(r)?;
        Ok((v.ln() - power * r.ln()).exp())
    };
    for i in 0..n {
        let r = policy.r_min * span.powf(T::from_count(i) / T::from_count(n - 1));
        radii.push(r);
        ratios.push(at(r)?);
    }
    let slack = T::lit(1e-8);
    let first_decrease = ratios
        .windows(2)
        .position(|w| w[1] < w[0] * (T::one() - slack))
        .map(|i| radii[i + 1]);
    let last = *ratios.last().expect("nonempty");
    let growth_factor = last / at(r_max / T::lit(4.0))?;
    let span_growth = last / ratios[0];
    let nondecreasing = first_decrease.is_none();
    Ok(GrowthReport {
        delta,
        radii,
        ratios,
        nondecreasing,
        first_decrease,
        growth_factor,
        span_growth,
        passed: nondecreasing && growth_factor >= policy.factor,
    })
}
