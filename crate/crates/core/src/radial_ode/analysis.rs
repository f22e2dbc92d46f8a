//! Post-processing of radial profiles: the averaged lower bound for
//! `v = u^α`, the conformal length of a ray and the tail of `u`.

use serde::Serialize;

use super::equation::{residual, ConformalExponents, ResidualClass};
use super::solver::Solution;
use crate::manifold::{ModelManifold, RadialValue};
use crate::quadrature::{
    classify_improper, integrate_split, nested_i_on_grid, ClassifyPolicy, ImproperKind,
    ImproperResult, QuadPolicy,
};
use crate::{Error, Real, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundSample<T> {
    pub r: T,
    pub v: T,
    /// `I(r)/(n−1)`
    pub bound: T,
    pub margin: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AverageBoundReport<T> {
    pub samples: Vec<BoundSample<T>>,
    pub min_margin: T,
    pub argmin: T,
    pub slack: T,
    pub holds: bool,
    /// Residual class of `u` on its own grid; the bound is only claimed
    /// for solutions and supersolutions.
    pub residual_class: ResidualClass,
    pub precondition_met: bool,
}

/// Checks `v(r) >= I(r)/(n−1)` with `v = u^α` at every grid point of `u`.
///
/// For radial `u` the sphere average of `v` is `v` itself.
pub fn verify_average_bound<T: Real>(
    manifold: &ModelManifold<T>,
    k: &(impl RadialValue<T> + ?Sized),
    u: &Solution<T>,
    slack: T,
    policy: &QuadPolicy<T>,
) -> Result<AverageBoundReport<T>> {
    let ex = ConformalExponents::new(manifold.dim())?;
    let residual_class = residual(manifold, k, u, &u.grid)?.class;
    let nested = nested_i_on_grid(manifold, k, &u.grid, policy)?;
    let scale = T::from_count(manifold.dim() - 1);
    let mut samples = Vec::with_capacity(u.grid.len());
    let mut min_margin = T::infinity();
    let mut argmin = u.grid[0];
    for ((&r, &uu), &i) in u.grid.iter().zip(&u.u).zip(&nested) {
        let v = uu.powf(ex.alpha);
        let bound = i / scale;
        let margin = v - bound;
        if margin < min_margin {
            min_margin = margin;
            argmin = r;
        }
        samples.push(BoundSample { r, v, bound, margin });
    }
    Ok(AverageBoundReport {
        samples,
        min_margin,
        argmin,
        slack,
        holds: min_margin >= -slack,
        residual_class,
        precondition_met: residual_class.is_supersolution(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TailKind {
    Finite,
    Infinite,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConformalLength<T> {
    /// Length over `[a, r_end]`, plus the extrapolated tail when it is finite.
    pub length: T,
    pub on_grid: T,
    pub tail: TailKind,
    /// Fitted `u^{2/(n−2)} ≈ A r^p` near the end of the grid.
    pub tail_fit: Option<(T, T)>,
    pub tail_integral: Option<ImproperResult<T>>,
    pub note: String,
}

/// Ratio between the end of the grid and the start of the tail window.
const TAIL_WINDOW: f64 = 4.0;

/// Length of the ray `[a, ∞)` in the metric `u^{4/(n−2)} g₀`, whose line
/// element along rays is `u^{2/(n−2)} dr`.
///
/// The computed part covers `[a, r_end]`. The tail is judged by fitting a
/// power law on `[r_end/2, r_end]`, checking that the exponent on
/// `[r_end/4, r_end/2]` lies on the same side of `-1`, and classifying the
/// integral of the fit from `r_end`.
pub fn conformal_length<T: Real>(
    manifold: &ModelManifold<T>,
    u: &Solution<T>,
    a: T,
    policy: &ClassifyPolicy<T>,
) -> Result<ConformalLength<T>> {
    let ex = ConformalExponents::new(manifold.dim())?;
    let p = ex.length_power();
    let r_end = u.r_end();
    if !(a >= u.grid[0] && a <= r_end) {
        return Err(Error::InvalidArgument(format!(
            "a = {a} outside the solution grid [{}, {r_end}]",
            u.grid[0]
        )));
    }
    let on_grid = integrate_split(
        |r| Ok(u.value(r)?.powf(p)),
        a,
        r_end,
        &u.grid,
        &policy.quad,
    )?
    .value;
    let tail_points: Vec<(T, T)> = u
        .grid
        .iter()
        .zip(&u.u)
        .filter(|(&r, _)| r > T::zero() && r >= r_end / T::lit(TAIL_WINDOW))
        .map(|(&r, &uu)| (r.ln(), uu.powf(p).ln()))
        .collect();
    let mut out = ConformalLength {
        length: on_grid,
        on_grid,
        tail: TailKind::Inconclusive,
        tail_fit: None,
        tail_integral: None,
        note: String::new(),
    };
    let mid = (r_end / T::lit(TAIL_WINDOW.sqrt())).ln();
    let (inner, outer): (Vec<_>, Vec<_>) = tail_points.iter().partition(|p| p.0 < mid);
    if inner.len() < 3 || outer.len() < 3 || tail_points[0].0 >= r_end.ln() - T::lit(1.2) {
        out.note = "grid too short for a tail fit over a factor of four".into();
        return Ok(out);
    }
    let (_, inner_slope, _) = fit_line(&inner);
    let (log_a, slope, max_dev) = fit_line(&outer);
    let amp = log_a.exp();
    out.tail_fit = Some((amp, slope));
    // the length is finite exactly when the exponent stays below -1
    let margin = T::lit(0.1);
    let side = |q: T| {
        if q < -T::one() - margin {
            -1
        } else if q > -T::one() + margin {
            1
        } else {
            0
        }
    };
    if max_dev > T::lit(0.05) || side(slope) == 0 || side(slope) != side(inner_slope) {
        out.note = format!(
            "tail is not a settled power law (exponents {inner_slope:.4} then {slope:.4})"
        );
        return Ok(out);
    }
    let tail = classify_improper(|r: T| Ok(amp * r.powf(slope)), r_end, policy)?;
    match tail.kind {
        ImproperKind::Convergent { value } => {
            out.tail = TailKind::Finite;
            out.length = on_grid + value;
        }
        ImproperKind::Divergent { .. } => out.tail = TailKind::Infinite,
        ImproperKind::Inconclusive => {}
    }
    out.note = format!("tail fit A r^p with A = {amp:e}, p = {slope:.6}");
    out.tail_integral = Some(tail);
    Ok(out)
}

/// Least-squares line through `(x, y)` with the largest absolute deviation.
fn fit_line<T: Real>(pts: &[(T, T)]) -> (T, T, T) {
    let n = T::from_count(pts.len());
    let mx = pts.iter().map(|p| p.0).sum::<T>() / n;
    let my = pts.iter().map(|p| p.1).sum::<T>() / n;
    let sxx: T = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: T = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = if sxx > T::zero() { sxy / sxx } else { T::zero() };
    let icpt = my - slope * mx;
    let dev = pts
        .iter()
        .map(|p| (p.1 - icpt - slope * p.0).abs())
        .fold(T::zero(), T::max);
    (icpt, slope, dev)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Trend {
    DecreasingToZero,
    BoundedBelow,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InfEstimate<T> {
    pub inf_on_grid: T,
    pub argmin: T,
    pub trend: Trend,
}

/// Minimum of `u` on its grid and the trend over the last decade.
///
/// `DecreasingToZero` needs a monotone decrease that at least halves `u`
/// over the decade; `BoundedBelow` needs `u` nondecreasing there.
pub fn inf_estimate<T: Real>(u: &Solution<T>) -> InfEstimate<T> {
    let mut inf_on_grid = u.u[0];
    let mut argmin = u.grid[0];
    for (&r, &v) in u.grid.iter().zip(&u.u) {
        if v < inf_on_grid {
            inf_on_grid = v;
            argmin = r;
        }
    }
    let r_end = u.r_end();
    let tail: Vec<T> = u
        .grid
        .iter()
        .zip(&u.u)
        .filter(|(&r, _)| r >= r_end / T::lit(10.0))
        .map(|(_, &v)| v)
        .collect();
    let trend = if tail.len() < 3 {
        Trend::Inconclusive
    } else {
        let noise = T::lit(1e-12);
        let nonincreasing = tail.windows(2).all(|w| w[1] <= w[0] * (T::one() + noise));
        let nondecreasing = tail.windows(2).all(|w| w[1] >= w[0] * (T::one() - noise));
        let first = tail[0];
        let last = tail[tail.len() - 1];
        if nonincreasing && last <= first * T::lit(0.5) {
            Trend::DecreasingToZero
        } else if nondecreasing {
            Trend::BoundedBelow
        } else {
            Trend::Inconclusive
        }
    };
    InfEstimate {
        inf_on_grid,
        argmin,
        trend,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcexpr::Expr;
    use crate::manifold::ConstantFn;
    use crate::radial_ode::{solve_radial, SolvePolicy};
    use std::f64::consts::FRAC_PI_2;

    fn geometric(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        let mut g = vec![0.0];
        g.extend((0..n).map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64)));
        g
    }

    fn sampled(src: &str, grid: Vec<f64>) -> Solution<f64> {
        let e: Expr = src.parse().unwrap();
        Solution::sample(&e, grid).unwrap()
    }

    #[test]
    fn bubble_bound_margin_is_one_plus_r4() {
        let m = ModelManifold::<f64>::euclidean(3).unwrap();
        let u = sampled("(1 + r^2)^(-1/2)", geometric(0.01, 10.0, 80));
        let rep =
            verify_average_bound(&m, &ConstantFn(24.0), &u, 1e-6, &QuadPolicy::default()).unwrap();
        assert!(rep.holds && rep.precondition_met);
        for s in &rep.samples {
            let want = 1.0 + s.r.powi(4);
            assert!((s.margin - want).abs() <= 1e-8 * want, "r={}", s.r);
        }
        assert_eq!(rep.min_margin, 1.0);
        assert_eq!(rep.argmin, 0.0);
    }

    #[test]
    fn negative_curvature_bound_is_slack() {
        let m = ModelManifold::<f64>::hyperbolic(3, 1.0).unwrap();
        let k = m.curvature_fn(false);
        let u = Solution::sample(&ConstantFn(1.0), geometric(0.1, 5.0, 20)).unwrap();
        let rep = verify_average_bound(&m, &k, &u, 1e-6, &QuadPolicy::default()).unwrap();
        assert!(rep.holds);
        assert_eq!(rep.residual_class, ResidualClass::Solution);
        assert!(rep.samples[1..].iter().all(|s| s.margin > 1.0));
        assert_eq!(rep.samples[0].margin, 1.0);
    }

    #[test]
    fn bubble_length_is_quarter_turn() {
        let m = ModelManifold::<f64>::euclidean(3).unwrap();
        let u = sampled("(1 + r^2)^(-1/2)", geometric(1e-3, 1e3, 400));
        let len = conformal_length(&m, &u, 0.0, &ClassifyPolicy::default()).unwrap();
        assert_eq!(len.tail, TailKind::Finite);
        assert!((len.length - FRAC_PI_2).abs() < 1e-6, "{}", len.length);
    }

    #[test]
    fn constant_profile_is_complete() {
        let m = ModelManifold::<f64>::euclidean(3).unwrap();
        let u = Solution::sample(&ConstantFn(1.0), geometric(0.1, 100.0, 50)).unwrap();
        let len = conformal_length(&m, &u, 0.0, &ClassifyPolicy::default()).unwrap();
        assert_eq!(len.tail, TailKind::Infinite);
        assert!((len.on_grid - 100.0).abs() < 1e-9);
    }

    #[test]
    fn inverse_linear_profile_has_finite_length() {
        let m = ModelManifold::<f64>::euclidean(3).unwrap();
        let u = sampled("1/(1 + r)", geometric(0.01, 1e4, 300));
        let len = conformal_length(&m, &u, 0.0, &ClassifyPolicy::default()).unwrap();
        assert_eq!(len.tail, TailKind::Finite);
        // ∫₀^∞ (1+r)^{-2} dr = 1
        assert!((len.length - 1.0).abs() < 1e-6, "{}", len.length);
    }

    #[test]
    fn tail_trends() {
        let bubble = sampled("(1 + r^2)^(-1/2)", geometric(0.01, 100.0, 100));
        let est = inf_estimate(&bubble);
        assert_eq!(est.trend, Trend::DecreasingToZero);
        assert_eq!(est.inf_on_grid, *bubble.u.last().unwrap());
        let one = Solution::sample(&ConstantFn(1.0), geometric(0.01, 100.0, 100)).unwrap();
        let est = inf_estimate(&one);
        assert_eq!((est.inf_on_grid, est.trend), (1.0, Trend::BoundedBelow));
        let wave = sampled("2 + sin(r)", geometric(0.01, 100.0, 400));
        assert_eq!(inf_estimate(&wave).trend, Trend::Inconclusive);
    }

    #[test]
    fn computed_bubble_agrees_with_closed_form_checks() {
        let m = ModelManifold::<f64>::euclidean(3).unwrap();
        let k = ConstantFn(24.0);
        let sol = solve_radial(&m, &k, 1.0, 1e3, &SolvePolicy::default()).unwrap();
        assert!(sol.is_completed());
        let len = conformal_length(&m, &sol, 0.0, &ClassifyPolicy::default()).unwrap();
        assert_eq!(len.tail, TailKind::Finite);
        assert!((len.length - FRAC_PI_2).abs() < 1e-6, "{}", len.length);
        assert_eq!(inf_estimate(&sol).trend, Trend::DecreasingToZero);
    }
}
