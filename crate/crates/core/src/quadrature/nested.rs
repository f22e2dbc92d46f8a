//! Ball integrals, ball averages and the averaged double integral
//!
//! ```text
//! I(r) = ∫₀^r (1/V(s)) ∫_{B(s)} K dμ ds
//! ```
//!
//! For radial `K` the ball integral is `∫₀^s K(t) V(t) dt`.

use super::adaptive::{integrate_split, integrate_with, QuadPolicy, QuadResult};
use crate::manifold::{ModelManifold, RadialValue};
use crate::{Error, Real, Result};

/// Below this radius the ball average uses its small-ball expansion.
pub const SMALL_BALL: f64 = 1e-4;

/// `∫_{B(r)} K dμ = ∫₀^r K(t) V(t) dt`.
pub fn ball_integral<T: Real>(
    manifold: &ModelManifold<T>,
    k: &(impl RadialValue<T> + ?Sized),
    r: T,
    policy: &QuadPolicy<T>,
) -> Result<QuadResult<T>> {
    if r < T::zero() {
        return Err(Error::InvalidArgument(format!("negative radius {r}")));
    }
    integrate_split(
        |t| Ok(k.value(t)? * manifold.volume_sphere(t)?),
        T::zero(),
        r,
        &dyadic_breakpoints(r),
        policy,
    )
}

/// Breakpoints `1, 16, 256, ...` below `s`, so that mass near the pole is
/// found without bisecting down from a huge interval.
fn dyadic_breakpoints<T: Real>(s: T) -> Vec<T> {
    let mut out = Vec::new();
    let mut w = T::one();
    while w < s && out.len() < 64 {
        out.push(w);
        w = w * T::lit(16.0);
    }
    out
}

/// Breakpoints `s - 1, s - 2, s - 4, ...` inside `(0, s)`. Ball averages on
/// exponentially growing manifolds concentrate their weight near `t = s`.
fn shell_breakpoints<T: Real>(s: T) -> Vec<T> {
    let mut out = Vec::new();
    let mut w = T::one();
    while w < s && out.len() < 64 {
        out.push(s - w);
        w = w + w;
    }
    out
}

fn breakpoints<T: Real>(s: T) -> Vec<T> {
    let mut pts = shell_breakpoints(s);
    pts.extend(dyadic_breakpoints(s / T::lit(2.0)));
    pts
}

fn inner_policy<T: Real>(policy: &QuadPolicy<T>) -> QuadPolicy<T> {
    QuadPolicy {
        rel_tol: (policy.rel_tol * T::lit(1e-2)).max(T::lit(1e-14)),
        ..*policy
    }
}

/// Mean of `K` over the ball, scaled by the sphere: `(1/V(s)) ∫_{B(s)} K dμ`.
///
/// Computed as `∫₀^s K(t) (h(t)/h(s))^{n-1} dt` so that `V` itself never
/// has to be formed. For `s < 1e-4` the warp is replaced by its pole
/// expansion `h(t) = t + h'''(0) t³/6`, which avoids `0/0` in the ratio;
/// to leading order the result is `K(0)·s/n`.
pub fn mean_k_ball<T: Real>(
    manifold: &ModelManifold<T>,
    k: &(impl RadialValue<T> + ?Sized),
    s: T,
    policy: &QuadPolicy<T>,
) -> Result<T> {
    if s < T::zero() {
        return Err(Error::InvalidArgument(format!("negative radius {s}")));
    }
    if s == T::zero() {
        return Ok(T::zero());
    }
    let power = manifold.dim() as i32 - 1;
    if s < T::lit(SMALL_BALL) {
        let c = manifold.h3_at_pole() / T::lit(6.0);
        let hs = s * (T::one() + c * s * s);
        let q = integrate_with(
            |t| Ok(k.value(t)? * (t * (T::one() + c * t * t) / hs).powi(power)),
            T::zero(),
            s,
            policy,
        )?;
        return Ok(q.value);
    }
    let q = integrate_split(
        |t| Ok(k.value(t)? * manifold.warp_ratio(t, s)?.powi(power)),
        T::zero(),
        s,
        &breakpoints(s),
        policy,
    )?;
    Ok(q.value)
}

/// `I(r) = ∫₀^r mean_k_ball(s) ds`, without the `1/(n-1)` factor.
pub fn nested_i<T: Real>(
    manifold: &ModelManifold<T>,
    k: &(impl RadialValue<T> + ?Sized),
    r: T,
    policy: &QuadPolicy<T>,
) -> Result<T> {
    nested_between(manifold, k, T::zero(), r, policy)
}

fn nested_between<T: Real>(
    manifold: &ModelManifold<T>,
    k: &(impl RadialValue<T> + ?Sized),
    lo: T,
    hi: T,
    policy: &QuadPolicy<T>,
) -> Result<T> {
    if lo < T::zero() || hi < lo {
        return Err(Error::InvalidArgument(format!(
            "nested integral bounds out of order: [{lo}, {hi}]"
        )));
    }
    let inner = inner_policy(policy);
    let mut cuts = Vec::new();
    if lo < T::lit(SMALL_BALL) && hi > T::lit(SMALL_BALL) {
        cuts.push(T::lit(SMALL_BALL));
    }
    Ok(integrate_split(
        |s| mean_k_ball(manifold, k, s, &inner),
        lo,
        hi,
        &cuts,
        policy,
    )?
    .value)
}

/// `I(r)` at every radius of an increasing grid, accumulated panel by panel.
pub fn nested_i_on_grid<T: Real>(
    manifold: &ModelManifold<T>,
    k: &(impl RadialValue<T> + ?Sized),
    radii: &[T],
    policy: &QuadPolicy<T>,
) -> Result<Vec<T>> {
    let mut out = Vec::with_capacity(radii.len());
    let mut acc = T::zero();
    let mut prev = T::zero();
    for &r in radii {
        if r < prev {
            return Err(Error::InvalidArgument("grid must be increasing".into()));
        }
        acc = acc + nested_between(manifold, k, prev, r, policy)?;
        out.push(acc);
        prev = r;
    }
    Ok(out)
}

/// `I(r)` with precomputed values on geometric knots, so that evaluating
/// at many radii costs one short panel each.
pub struct NestedIntegral<'a, T: Real, K: ?Sized> {
    manifold: &'a ModelManifold<T>,
    k: &'a K,
    policy: QuadPolicy<T>,
    knots: Vec<T>,
    prefix: Vec<T>,
    /// Set when building stopped early because the integrand overflowed.
    horizon: Option<T>,
}

impl<'a, T: Real, K: RadialValue<T> + ?Sized> NestedIntegral<'a, T, K> {
    /// Knots run geometrically from `lo > 0` to at least `hi`, with
    /// `per_doubling` knots per factor of two.
    pub fn new(
        manifold: &'a ModelManifold<T>,
        k: &'a K,
        lo: T,
        hi: T,
        per_doubling: usize,
        policy: QuadPolicy<T>,
    ) -> Result<Self> {
        if !(lo > T::zero() && hi >= lo) {
            return Err(Error::InvalidArgument(format!(
                "bad knot range [{lo}, {hi}]"
            )));
        }
        let step = T::lit(2.0).powf(T::one() / T::from_count(per_doubling.max(1)));
        let mut knots = vec![lo];
        let mut prefix = vec![nested_i(manifold, k, lo, &policy)?];
        let mut horizon = None;
        while *knots.last().expect("nonempty") < hi {
            let a = *knots.last().expect("nonempty");
            let b = a * step;
            match nested_between(manifold, k, a, b, &policy) {
                Ok(v) => {
                    let p = *prefix.last().expect("nonempty") + v;
                    knots.push(b);
                    prefix.push(p);
                }
                Err(e) if e.is_overflow() => {
                    horizon = Some(a);
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        Ok(NestedIntegral {
            manifold,
            k,
            policy,
            knots,
            prefix,
            horizon,
        })
    }

    pub fn knots(&self) -> &[T] {
        &self.knots
    }

    pub fn knot_values(&self) -> &[T] {
        &self.prefix
    }

    pub fn horizon(&self) -> Option<T> {
        self.horizon
    }

    pub fn eval(&self, r: T) -> Result<T> {
        if r < self.knots[0] {
            return nested_i(self.manifold, self.k, r, &self.policy);
        }
        let j = self.knots.partition_point(|&x| x <= r) - 1;
        Ok(self.prefix[j] + nested_between(self.manifold, self.k, self.knots[j], r, &self.policy)?)
    }
}
