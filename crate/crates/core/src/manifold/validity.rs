use serde::Serialize;

use super::model::{ModelManifold, CH_TOLERANCE};
use crate::Real;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvatureSample<T> {
    pub r: T,
    pub radial: T,
    pub tangential: T,
}

/// Result of checking nonpositive sectional curvature on a grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidityReport<T> {
    pub r_max: T,
    pub samples: Vec<CurvatureSample<T>>,
    /// Radii where a sectional curvature exceeded the tolerance.
    pub violations: Vec<T>,
    /// Radii where the curvature could not be evaluated, with the reason.
    pub failures: Vec<(T, String)>,
    pub valid: bool,
    /// Smallest `c >= 0` with `-c² <=` both curvatures on the grid, when the
    /// curvature looks bounded below.
    pub pinching_c: Option<T>,
}

impl<T: Real> ModelManifold<T> {
    /// Checks the Cartan–Hadamard condition on `n_grid` equally spaced radii
    /// in `(0, r_max]` and estimates a pinching constant.
    ///
    /// No pinching constant is reported when the manifold is invalid or when
    /// the most negative curvature keeps decreasing over the last quarter of
    /// the grid, which suggests it is unbounded below.
    pub fn check_ch(&self, r_max: T, n_grid: usize) -> ValidityReport<T> {
        let n_grid = n_grid.max(16);
        let tol = T::lit(CH_TOLERANCE);
        let mut samples = Vec::with_capacity(n_grid);
        let mut violations = Vec::new();
        let mut failures = Vec::new();
        for i in 1..=n_grid {
            let r = r_max * T::from_count(i) / T::from_count(n_grid);
            match (self.radial_curvature(r), self.tangential_curvature(r)) {
                (Ok(radial), Ok(tangential)) => {
                    if !(radial <= tol && tangential <= tol) {
                        violations.push(r);
                    }
                    samples.push(CurvatureSample {
                        r,
                        radial,
                        tangential,
                    });
                }
                (Err(e), _) | (_, Err(e)) => failures.push((r, e.to_string())),
            }
        }
        let valid = violations.is_empty() && failures.is_empty();
        let pinching_c = if valid { pinching(&samples) } else { None };
        ValidityReport {
            r_max,
            samples,
            violations,
            failures,
            valid,
            pinching_c,
        }
    }
}

fn pinching<T: Real>(samples: &[CurvatureSample<T>]) -> Option<T> {
    let lowest = |s: &[CurvatureSample<T>]| {
        s.iter()
            .map(|p| p.radial.min(p.tangential))
            .fold(T::infinity(), T::min)
    };
    let split = samples.len() * 3 / 4;
    let head = lowest(&samples[..split]);
    let tail = lowest(&samples[split..]);
    let overall = head.min(tail);
    let drift = head - tail;
    if drift > T::lit(1e-9) && drift > T::lit(0.01) * head.abs() {
        return None;
    }
    Some((-overall).max(T::zero()).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcexpr::Expr;

    #[test]
    fn euclidean_is_flat() {
        let m = ModelManifold::<f64>::euclidean(3).unwrap();
        let rep = m.check_ch(10.0, 64);
        assert!(rep.valid);
        assert_eq!(rep.pinching_c, Some(0.0));
        assert_eq!(rep.samples.len(), 64);
    }

    #[test]
    fn sine_warp_is_not_cartan_hadamard() {
        let h: Expr = "sin(r)".parse().unwrap();
        let m = ModelManifold::<f64>::from_expr(3, h).unwrap();
        let rep = m.check_ch(3.0, 32);
        assert!(!rep.valid);
        assert_eq!(rep.violations.len(), 32);
        assert_eq!(rep.pinching_c, None);
    }

    #[test]
    fn sinh_warp_pinched_by_one() {
        let h: Expr = "sinh(r)".parse().unwrap();
        let m = ModelManifold::<f64>::from_expr(3, h).unwrap();
        let rep = m.check_ch(10.0, 100);
        assert!(rep.valid);
        let c = rep.pinching_c.unwrap();
        assert!((c - 1.0).abs() < 1e-9, "c = {c}");
        for s in &rep.samples {
            assert!((s.radial + 1.0).abs() < 1e-12);
            assert!((s.tangential + 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn unbounded_curvature_has_no_pinching() {
        // -h''/h grows like -9 r^4
        let h: Expr = "sinh(r + r^3)".parse().unwrap();
        let m = ModelManifold::<f64>::from_expr(3, h).unwrap();
        let rep = m.check_ch(4.0, 64);
        assert!(rep.valid);
        assert_eq!(rep.pinching_c, None);
    }

    #[test]
    fn positive_curvature_inside_grid_is_flagged() {
        // flat near the pole, then bends back: h'' < 0 past r = 2/3
        let h: Expr = "r + r^3/6 - r^4/8".parse().unwrap();
        let m = ModelManifold::<f64>::from_expr(3, h).unwrap();
        let rep = m.check_ch(2.0, 40);
        assert!(!rep.valid);
        assert!(rep.violations.iter().all(|&r| r > 0.5));
    }
}
