use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use super::model::ModelManifold;
use super::radial::{DirectionFn, UnitVector};
use crate::{Error, Real, Result};

/// Area of the unit `(n-1)`-sphere in `R^n`, `2 π^{n/2} / Γ(n/2)`.
pub fn sphere_area_unit<T: Real>(n: usize) -> Result<T> {
    if n < 2 {
        return Err(Error::InvalidDimension(n, 2));
    }
    Ok(T::lit(2.0) * T::PI().powf(T::from_count(n) / T::lit(2.0)) / half_gamma::<T>(n))
}

/// `Γ(n/2)` from `Γ(1) = 1`, `Γ(1/2) = √π` and `Γ(x+1) = x Γ(x)`.
fn half_gamma<T: Real>(n: usize) -> T {
    let (mut g, mut x) = if n % 2 == 0 {
        (T::one(), T::one())
    } else {
        (T::PI().sqrt(), T::lit(0.5))
    };
    let target = T::from_count(n) / T::lit(2.0);
    while x < target {
        g = g * x;
        x = x + T::one();
    }
    g
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SphereAverage<T> {
    pub mean: T,
    pub std_error: T,
    pub n_samples: usize,
}

/// Monte Carlo mean of `f` over the geodesic sphere of radius `r`.
///
/// Directions are drawn uniformly on the unit sphere by normalising Gaussian
/// vectors; the area element of the sphere of radius `r` is `h(r)^{n-1}`
/// times the unit-sphere measure, so the uniform direction mean is the
/// sphere mean. The stream is a ChaCha8 generator seeded with `seed`, so the
/// result is reproducible. Uses Welford updates: a function that ignores the
/// direction averages to exactly its value.
pub fn sphere_average<T: Real>(
    manifold: &ModelManifold<T>,
    f: &(impl DirectionFn<T> + ?Sized),
    r: T,
    n_samples: usize,
    seed: u64,
) -> Result<SphereAverage<T>> {
    if !(r > T::zero()) {
        return Err(Error::InvalidArgument(format!(
            "sphere average needs r > 0, got {r}"
        )));
    }
    if n_samples < 100 {
        return Err(Error::InvalidArgument(format!(
            "sphere average needs at least 100 samples, got {n_samples}"
        )));
    }
    let n = manifold.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mean = T::zero();
    let mut m2 = T::zero();
    let mut count = 0usize;
    while count < n_samples {
        let raw: Vec<T> = (0..n)
            .map(|_| T::lit(StandardNormal.sample(&mut rng)))
            .collect();
        let Some(xi) = UnitVector::new(raw) else {
            continue;
        };
        let x = f.eval(r, &xi)?;
        count += 1;
        let delta = x - mean;
        mean = mean + delta / T::from_count(count);
        m2 = m2 + delta * (x - mean);
    }
    let var = m2 / T::from_count(n_samples - 1);
    Ok(SphereAverage {
        mean,
        std_error: (var / T::from_count(n_samples)).sqrt(),
        n_samples,
    })
}
