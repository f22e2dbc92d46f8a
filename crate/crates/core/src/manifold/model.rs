use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use super::radial::{RadialFn, RadialValue};
use super::sphere::sphere_area_unit;
use crate::funcexpr::{BinOp, Expr, Func, Jet2};
use crate::quadrature::{integrate_with, QuadPolicy};
use crate::{Error, Real, Result};

/// Below this radius `Δr` and `k` switch to their series expansions.
pub const POLE_GUARD: f64 = 1e-6;

/// Absolute tolerance on curvature signs in the Cartan–Hadamard check.
pub const CH_TOLERANCE: f64 = 1e-12;

/// Below this radius `k` is interpolated from its limit at the pole.
pub const CURVATURE_BLEND: f64 = 3e-3;

const POLE_TOLERANCE: f64 = 1e-9;
const THIRD_DERIVATIVE_STEP: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "preset", rename_all = "snake_case")]
pub enum Preset<T> {
    Euclidean,
    Hyperbolic { c: T },
    Custom,
}

/// An `n`-dimensional rotationally symmetric manifold with metric
/// `dr² + h(r)² dΘ²` around a pole.
///
/// Every geometric quantity is derived from the warping function `h` and
/// its first two derivatives: sphere area `V(r) = ω h^{n-1}`, the Laplacian
/// of the distance function `Δr = (n-1) h'/h`, and the scalar curvature.
#[derive(Clone)]
pub struct ModelManifold<T> {
    n: usize,
    warp: Arc<dyn RadialFn<T>>,
    warp_text: Option<String>,
    k_override: Option<Arc<dyn RadialValue<T>>>,
    preset: Preset<T>,
    omega_sphere: T,
    omega_ball: T,
    /// `h'''(0)`, the leading correction of `h` at the pole.
    h3_at_pole: T,
}

impl<T: Real> fmt::Debug for ModelManifold<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ModelManifold")
            .field("n", &self.n)
            .field("preset", &self.preset)
            .field("warp", &self.warp_text)
            .field("k_override", &self.k_override.is_some())
            .finish()
    }
}

impl<T: Real> ModelManifold<T> {
    /// Flat space, `h(r) = r`.
    pub fn euclidean(n: usize) -> Result<Self> {
        Self::build(n, Expr::Var, Preset::Euclidean)
    }

    /// Space form of constant curvature `-c²`, `h(r) = sinh(c r)/c`.
    pub fn hyperbolic(n: usize, c: T) -> Result<Self> {
        if !(c > T::zero() && c.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "hyperbolic preset needs c > 0, got {c}"
            )));
        }
        let cf = Expr::Num(c.as_f64());
        let h = Expr::binary(
            BinOp::Div,
            Expr::call(Func::Sinh, Expr::binary(BinOp::Mul, cf.clone(), Expr::Var)),
            cf,
        );
        Self::build(n, h, Preset::Hyperbolic { c })
    }

    /// Custom warping function given as an expression.
    pub fn from_expr(n: usize, h: Expr) -> Result<Self> {
        Self::build(n, h, Preset::Custom)
    }

    fn build(n: usize, h: Expr, preset: Preset<T>) -> Result<Self> {
        let text = h.to_string();
        let mut m = Self::from_warp(n, h)?;
        m.warp_text = Some(text);
        m.preset = preset;
        Ok(m)
    }

    /// Custom warping function from any jet-valued radial function.
    ///
    /// Requires `n >= 3`, `h(0) = 0` and `h'(0) = 1`.
    pub fn from_warp(n: usize, warp: impl RadialFn<T> + 'static) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidDimension(n, 3));
        }
        let at_pole = warp
            .jet(T::zero())
            .map_err(|e| Error::BadPole(format!("h cannot be evaluated at r = 0: {e}")))?;
        let tol = T::lit(POLE_TOLERANCE);
        if at_pole.value.abs() > tol {
            return Err(Error::BadPole(format!("h(0) = {} != 0", at_pole.value)));
        }
        if (at_pole.d1 - T::one()).abs() > tol {
            return Err(Error::BadPole(format!("h'(0) = {} != 1", at_pole.d1)));
        }
        // h is odd for a metric smooth at the pole, so h'' = h3 r + h5 r^3/6 + ...
        // and this combination cancels the cubic term.
        let d = T::lit(THIRD_DERIVATIVE_STEP);
        let h2_d = warp.jet(d)?.d2;
        let h2_2d = warp.jet(d + d)?.d2;
        let h3 = (T::lit(8.0) * h2_d - h2_2d) / (T::lit(6.0) * d);
        let omega_sphere = sphere_area_unit::<T>(n)?;
        Ok(ModelManifold {
            n,
            warp: Arc::new(warp),
            warp_text: None,
            k_override: None,
            preset: Preset::Custom,
            omega_sphere,
            omega_ball: omega_sphere / T::from_count(n),
            h3_at_pole: h3,
        })
    }

    /// Replaces the derived scalar curvature by a user-supplied function.
    /// Verdicts computed afterwards no longer follow from `h` alone.
    pub fn with_k_override(mut self, k: impl RadialValue<T> + 'static) -> Self {
        self.k_override = Some(Arc::new(k));
        self
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn preset(&self) -> Preset<T> {
        self.preset
    }

    pub fn warp_text(&self) -> Option<&str> {
        self.warp_text.as_deref()
    }

    pub fn has_k_override(&self) -> bool {
        self.k_override.is_some()
    }

    /// Area of the unit `(n-1)`-sphere.
    pub fn omega_sphere(&self) -> T {
        self.omega_sphere
    }

    /// Volume of the unit `n`-ball.
    pub fn omega_ball(&self) -> T {
        self.omega_ball
    }

    pub fn warp(&self) -> &dyn RadialFn<T> {
        self.warp.as_ref()
    }

    pub fn warp_jet(&self, r: T) -> Result<Jet2<T>> {
        self.warp.jet(r)
    }

    fn dim_t(&self) -> T {
        T::from_count(self.n)
    }

    fn positive_warp(&self, r: T) -> Result<Jet2<T>> {
        let j = self.warp.jet(r)?;
        if j.value <= T::zero() {
            return Err(Error::NonPositiveWarp {
                r: r.as_f64(),
                h: j.value.as_f64(),
            });
        }
        Ok(j)
    }

    /// Third derivative of the warp at the pole, estimated from `h''` nearby.
    pub fn h3_at_pole(&self) -> T {
        self.h3_at_pole
    }

    /// `h(r)/h(s)`, which stays finite where `h` itself is large.
    pub fn warp_ratio(&self, r: T, s: T) -> Result<T> {
        if r == T::zero() {
            return Ok(T::zero());
        }
        Ok(self.positive_warp(r)?.value / self.positive_warp(s)?.value)
    }

    /// Area of the geodesic sphere of radius `r`.
    pub fn volume_sphere(&self, r: T) -> Result<T> {
        if r < T::zero() {
            return Err(Error::InvalidArgument(format!("negative radius {r}")));
        }
        if r == T::zero() {
            return Ok(T::zero());
        }
        let h = self.positive_warp(r)?.value;
        let v = self.omega_sphere * h.powi(self.n as i32 - 1);
        if !v.is_finite() {
            return Err(overflow("V(r)", r));
        }
        Ok(v)
    }

    /// Laplacian of the distance function, `V'(r)/V(r)`.
    pub fn laplacian_r(&self, r: T) -> Result<T> {
        if r <= T::zero() {
            return Err(Error::Pole {
                r: r.as_f64(),
                what: "the Laplacian of r",
            });
        }
        let n1 = self.dim_t() - T::one();
        if r < T::lit(POLE_GUARD) {
            let corr = T::one() - self.h3_at_pole * r * r / T::lit(3.0);
            return Ok(n1 / r * corr);
        }
        let j = self.positive_warp(r)?;
        let v = n1 * j.d1 / j.value;
        if !v.is_finite() {
            return Err(overflow("Δr", r));
        }
        Ok(v)
    }

    /// Sectional curvature of planes containing `∂r`, `-h''/h`.
    pub fn radial_curvature(&self, r: T) -> Result<T> {
        let j = self.positive_warp(r)?;
        Ok(-j.d2 / j.value)
    }

    /// Sectional curvature of planes tangent to the sphere, `(1 - h'²)/h²`.
    pub fn tangential_curvature(&self, r: T) -> Result<T> {
        let j = self.positive_warp(r)?;
        Ok((T::one() - j.d1) * (T::one() + j.d1) / (j.value * j.value))
    }

    /// Scalar curvature of the background metric.
    ///
    /// Derived from `h` unless an override was installed. At the pole the
    /// limit `-n(n-1) h'''(0)` is used. The formula loses accuracy like
    /// `ε/r²` near the pole, so below `r_b = 3e-3` the value is the even
    /// interpolant `k(0) + (k(r_b) - k(0)) (r/r_b)²`.
    pub fn scalar_curvature(&self, r: T) -> Result<T> {
        if let Some(k) = &self.k_override {
            return k.value(r);
        }
        if r < T::zero() {
            return Err(Error::InvalidArgument(format!("negative radius {r}")));
        }
        let r_b = T::lit(CURVATURE_BLEND);
        if r >= r_b {
            return self.derived_curvature(r);
        }
        let n = self.dim_t();
        let k0 = -n * (n - T::one()) * self.h3_at_pole;
        if !k0.is_finite() {
            return Err(Error::Pole {
                r: r.as_f64(),
                what: "the scalar curvature limit",
            });
        }
        if r < T::lit(POLE_GUARD) {
            return Ok(k0);
        }
        let kb = self.derived_curvature(r_b)?;
        let t = r / r_b;
        Ok(k0 + (kb - k0) * t * t)
    }

    fn derived_curvature(&self, r: T) -> Result<T> {
        let n1 = self.dim_t() - T::one();
        let j = self.positive_warp(r)?;
        let h = j.value;
        let tangential = (T::one() - j.d1) * (T::one() + j.d1) / (h * h);
        let k = T::lit(2.0) * n1 * (-j.d2 / h) + n1 * (n1 - T::one()) * tangential;
        if !k.is_finite() {
            return Err(overflow("k(r)", r));
        }
        Ok(k)
    }

    /// Volume of the geodesic ball, `∫₀^r V(t) dt`, to relative accuracy 1e-9.
    pub fn ball_volume(&self, r: T) -> Result<T> {
        self.ball_volume_with(r, &QuadPolicy::default())
    }

    pub fn ball_volume_with(&self, r: T, policy: &QuadPolicy<T>) -> Result<T> {
        if r < T::zero() {
            return Err(Error::InvalidArgument(format!("negative radius {r}")));
        }
        Ok(integrate_with(|t| self.volume_sphere(t), T::zero(), r, policy)?.value)
    }

    /// View of the background curvature (or its absolute value) as a radial function.
    pub fn curvature_fn(&self, absolute: bool) -> CurvatureFn<'_, T> {
        CurvatureFn {
            manifold: self,
            absolute,
        }
    }
}

fn overflow<T: Real>(what: &str, r: T) -> Error {
    Error::Eval(crate::funcexpr::EvalError::Overflow {
        node: what.to_string(),
        r: r.as_f64(),
    })
}

/// The manifold's scalar curvature `k(r)` as a [`RadialValue`].
pub struct CurvatureFn<'a, T> {
    manifold: &'a ModelManifold<T>,
    absolute: bool,
}

impl<T: Real> RadialValue<T> for CurvatureFn<'_, T> {
    fn value(&self, r: T) -> Result<T> {
        let k = self.manifold.scalar_curvature(r)?;
        Ok(if self.absolute { k.abs() } else { k })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn volume_sphere_examples() {
        let e = ModelManifold::<f64>::euclidean(3).unwrap();
        assert!(rel(e.volume_sphere(2.0).unwrap(), 16.0 * PI) < 1e-14);
        assert_eq!(e.volume_sphere(0.0).unwrap(), 0.0);
        let h = ModelManifold::hyperbolic(3, 1.0).unwrap();
        let want = 4.0 * PI * 1f64.sinh().powi(2);
        assert!(rel(h.volume_sphere(1.0).unwrap(), want) < 1e-14);
        assert!((want - 17.355387).abs() < 1e-6);
        assert_eq!(h.volume_sphere(0.0).unwrap(), 0.0);
    }

    #[test]
    fn laplacian_examples() {
        let e = ModelManifold::<f64>::euclidean(3).unwrap();
        assert!(rel(e.laplacian_r(2.0).unwrap(), 1.0) < 1e-15);
        let h = ModelManifold::hyperbolic(3, 1.0).unwrap();
        let want = 2.0 / 1f64.tanh();
        assert!(rel(h.laplacian_r(1.0).unwrap(), want) < 1e-14);
        assert!((want - 2.626071).abs() < 1e-6);
        let h = ModelManifold::<f64>::hyperbolic(4, 2.0).unwrap();
        assert!((h.laplacian_r(100.0).unwrap() - 6.0).abs() < 1e-12);
        assert!(matches!(e.laplacian_r(0.0), Err(Error::Pole { .. })));
    }

    #[test]
    fn laplacian_series_near_pole_is_continuous() {
        let h = ModelManifold::<f64>::hyperbolic(3, 1.0).unwrap();
        let inside = h.laplacian_r(0.999e-6).unwrap() * 0.999e-6;
        let outside = h.laplacian_r(1.001e-6).unwrap() * 1.001e-6;
        assert!((inside - outside).abs() < 1e-9);
        assert!((inside - 2.0).abs() < 1e-9);
    }

    #[test]
    fn scalar_curvature_examples() {
        for n in 3..6 {
            let e = ModelManifold::<f64>::euclidean(n).unwrap();
            assert_eq!(e.scalar_curvature(1.0).unwrap(), 0.0);
        }
        let h = ModelManifold::hyperbolic(3, 1.0).unwrap();
        assert!(rel(h.scalar_curvature(1.0).unwrap(), -6.0) < 1e-12);
        let h = ModelManifold::<f64>::hyperbolic(4, 2.0).unwrap();
        assert!(rel(h.scalar_curvature(0.5).unwrap(), -48.0) < 1e-12);
        // limit at the pole from the series
        assert!(rel(h.scalar_curvature(0.0).unwrap(), -48.0) < 1e-9);
    }

    #[test]
    fn ball_volume_examples() {
        let e = ModelManifold::<f64>::euclidean(3).unwrap();
        assert!(rel(e.ball_volume(1.0).unwrap(), 4.0 * PI / 3.0) < 1e-12);
        assert_eq!(e.ball_volume(0.0).unwrap(), 0.0);
        let h = ModelManifold::hyperbolic(3, 1.0).unwrap();
        let want = PI * (2f64.sinh() - 2.0);
        assert!(rel(h.ball_volume(1.0).unwrap(), want) < 1e-10);
        assert!((want - 5.110933).abs() < 1e-6);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            ModelManifold::<f64>::euclidean(2),
            Err(Error::InvalidDimension(2, 3))
        ));
        let not_pole: Expr = "r + 1".parse().unwrap();
        assert!(matches!(
            ModelManifold::<f64>::from_expr(3, not_pole),
            Err(Error::BadPole(_))
        ));
        let wrong_slope: Expr = "2*r".parse().unwrap();
        assert!(ModelManifold::<f64>::from_expr(3, wrong_slope).is_err());
        let sin: Expr = "sin(r)".parse().unwrap();
        let m = ModelManifold::<f64>::from_expr(3, sin).unwrap();
        assert!(matches!(
            m.volume_sphere(4.0),
            Err(Error::NonPositiveWarp { .. })
        ));
        assert!(ModelManifold::<f64>::hyperbolic(3, 0.0).is_err());
    }

    #[test]
    fn k_override_replaces_derived_curvature() {
        let m = ModelManifold::<f64>::euclidean(3)
            .unwrap()
            .with_k_override(crate::manifold::ConstantFn(-1.0));
        assert!(m.has_k_override());
        assert_eq!(m.scalar_curvature(2.0).unwrap(), -1.0);
    }

    #[test]
    fn single_precision_geometry() {
        let h = ModelManifold::<f32>::hyperbolic(3, 1.0).unwrap();
        let k = h.scalar_curvature(1.0).unwrap();
        assert!((k + 6.0).abs() < 1e-4);
        let d = h.laplacian_r(1.0).unwrap();
        assert!((d - 2.0 / 1f32.tanh()).abs() < 1e-5);
    }
}
