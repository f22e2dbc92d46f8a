//! Heuristic classification of `∫_a^∞ g` and `lim_{r→∞} g(r)`.
//!
//! Neither question is decidable from finitely many samples. Both
//! classifiers report `Inconclusive` unless one of their rules fires, and
//! every result carries the samples it was decided on.

use serde::Serialize;

use super::adaptive::{integrate_with, QuadPolicy};
use crate::{Error, Real, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Sign {
    Positive,
    Negative,
}

impl Sign {
    fn of<T: Real>(x: T) -> Sign {
        if x < T::zero() {
            Sign::Negative
        } else {
            Sign::Positive
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind")]
pub enum ImproperKind<T> {
    Convergent { value: T },
    Divergent { sign: Sign },
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImproperResult<T> {
    pub kind: ImproperKind<T>,
    /// `(R_k, ∫_a^{R_k} g)` with strictly increasing `R_k`.
    pub truncation_trace: Vec<(T, T)>,
    pub rationale: String,
}

impl<T: Real> ImproperResult<T> {
    pub fn is_convergent(&self) -> bool {
        matches!(self.kind, ImproperKind::Convergent { .. })
    }

    pub fn diverges_to(&self, sign: Sign) -> bool {
        self.kind == ImproperKind::Divergent { sign }
    }
}

/// Settings for [`classify_improper`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassifyPolicy<T> {
    /// Truncations are `a·2^k` for `k = 0..=max_doublings`.
    pub max_doublings: usize,
    /// Agreement tolerance for the last partial integrals.
    pub tol: T,
    /// Magnitude beyond which growing partial integrals count as divergent.
    pub big: T,
    /// Largest ratio of successive increments accepted as geometric decay.
    pub ratio_max: T,
    /// An increment must exceed its quadrature error by this factor to be
    /// used as evidence of divergence.
    pub resolution: T,
    /// Increments required before an overflow can end the scan early.
    pub min_increments: usize,
    pub quad: QuadPolicy<T>,
}

impl<T: Real> Default for ClassifyPolicy<T> {
    fn default() -> Self {
        ClassifyPolicy {
            max_doublings: 20,
            tol: T::lit(1e-6),
            big: T::lit(1e8),
            ratio_max: T::lit(0.95),
            resolution: T::lit(100.0),
            min_increments: 4,
            quad: QuadPolicy::default(),
        }
    }
}

struct Increment<T> {
    value: T,
    error: T,
}

/// Classifies `∫_a^∞ g` from partial integrals over `[a, a·2^k]`.
///
/// * Divergent: the last three dyadic increments share a strict sign, are
///   nondecreasing in magnitude and are each resolved beyond quadrature
///   error; or they share a sign, decay no faster than `ratio_max` and the
///   partial integral already exceeds `big`.
/// * Convergent: the last three partial integrals agree within
///   `tol·(1+|value|)`, or the last increments share a sign and shrink
///   geometrically with ratio at most `ratio_max`, in which case the
///   geometric tail is added to the value.
/// * Inconclusive otherwise.
///
/// If `g` overflows after at least `min_increments` increments the scan
/// stops and the available trace is classified.
pub fn classify_improper<T: Real>(
    mut g: impl FnMut(T) -> Result<T>,
    a: T,
    policy: &ClassifyPolicy<T>,
) -> Result<ImproperResult<T>> {
    if !(a > T::zero()) || !a.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "improper integrals start at a > 0, got {a}"
        )));
    }
    let mut trace = vec![(a, T::zero())];
    let mut increments: Vec<Increment<T>> = Vec::new();
    let mut note = String::new();
    let mut lo = a;
    for _ in 0..policy.max_doublings {
        let hi = lo + lo;
        let step = match integrate_with(&mut g, lo, hi, &policy.quad) {
            Ok(q) => Increment {
                value: q.value,
                error: q.error_estimate,
            },
            Err(Error::MaxSubdivisions {
                value,
                error_estimate,
                ..
            }) => Increment {
                value: T::lit(value),
                error: T::lit(error_estimate),
            },
            Err(e) if e.is_overflow() && increments.len() >= policy.min_increments => {
                note = format!("; scan stopped at R = {hi}: {e}");
                break;
            }
            Err(e) => return Err(e),
        };
        let partial = trace.last().expect("nonempty").1 + step.value;
        if !partial.is_finite() {
            note = format!("; partial integral overflowed at R = {hi}");
            break;
        }
        trace.push((hi, partial));
        increments.push(step);
        lo = hi;
    }
    let (kind, why) = decide(&trace, &increments, policy);
    Ok(ImproperResult {
        kind,
        truncation_trace: trace,
        rationale: why + &note,
    })
}

fn decide<T: Real>(
    trace: &[(T, T)],
    inc: &[Increment<T>],
    policy: &ClassifyPolicy<T>,
) -> (ImproperKind<T>, String) {
    let m = inc.len();
    if m < 3 {
        return (
            ImproperKind::Inconclusive,
            format!("only {m} truncation increments available"),
        );
    }
    let last = &inc[m - 3..];
    let (d0, d1, d2) = (last[0].value, last[1].value, last[2].value);
    let s = trace[trace.len() - 1].1;
    let same_sign = (d0 > T::zero() && d1 > T::zero() && d2 > T::zero())
        || (d0 < T::zero() && d1 < T::zero() && d2 < T::zero());
    let resolved = last
        .iter()
        .all(|d| d.value.abs() > policy.resolution * d.error);
    let slack = T::one() - policy.tol;
    let rho1 = d1 / d0;
    let rho2 = d2 / d1;
    if same_sign && resolved && rho1 >= slack && rho2 >= slack {
        return (
            ImproperKind::Divergent { sign: Sign::of(d2) },
            format!(
                "last increments {d0:e}, {d1:e}, {d2:e} share a sign and do not shrink \
                 (ratios {rho1:.6}, {rho2:.6})"
            ),
        );
    }
    if same_sign && s.abs() > policy.big && rho1 > policy.ratio_max && rho2 > policy.ratio_max {
        return (
            ImproperKind::Divergent { sign: Sign::of(d2) },
            format!(
                "partial integral {s:e} exceeds {:e} and increments decay slower than \
                 ratio {:.3}",
                policy.big, policy.ratio_max
            ),
        );
    }
    let scale = policy.tol * (T::one() + s.abs());
    let geometric = same_sign
        && rho1 <= policy.ratio_max
        && rho2 <= policy.ratio_max
        && (rho2 - rho1).abs() <= T::lit(0.1);
    let tail = if geometric {
        d2 * rho2 / (T::one() - rho2)
    } else {
        T::zero()
    };
    if d1.abs() <= scale && d2.abs() <= scale {
        return (
            ImproperKind::Convergent { value: s + tail },
            format!("last three partial integrals agree within {scale:e}"),
        );
    }
    if geometric {
        return (
            ImproperKind::Convergent { value: s + tail },
            format!(
                "increments shrink geometrically (ratios {rho1:.6}, {rho2:.6}); \
                 tail estimate {tail:e} added"
            ),
        );
    }
    (
        ImproperKind::Inconclusive,
        format!(
            "last increments {d0:e}, {d1:e}, {d2:e} fit neither rule \
             (partial integral {s:e})"
        ),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind")]
pub enum LimitKind<T> {
    Finite { value: T },
    Infinite { sign: Sign },
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitResult<T> {
    pub kind: LimitKind<T>,
    /// `(r_j, g(r_j))` on the geometric sample grid.
    pub samples: Vec<(T, T)>,
    pub rationale: String,
}

impl<T: Real> LimitResult<T> {
    pub fn is_infinite(&self, sign: Sign) -> bool {
        self.kind == LimitKind::Infinite { sign }
    }
}

/// Settings for [`limit_at_infinity`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LimitPolicy<T> {
    /// Samples are taken at `r0·2^j`, `j = 0..=max_doublings`.
    pub r0: T,
    pub max_doublings: usize,
    pub big: T,
    pub tol: T,
    /// Samples required before an overflow can end the scan early.
    pub min_samples: usize,
}

impl<T: Real> Default for LimitPolicy<T> {
    fn default() -> Self {
        LimitPolicy {
            r0: T::one(),
            max_doublings: 40,
            big: T::lit(1e8),
            tol: T::lit(1e-6),
            min_samples: 6,
        }
    }
}

/// Classifies `lim_{r→∞} g(r)` from samples at `r0·2^j`.
///
/// * Infinite: the last samples move monotonically past `±big`, or their
///   last three differences share a sign and are nondecreasing in
///   magnitude.
/// * Finite: the differences contract and the last three Aitken
///   extrapolations agree within `tol·(1+|L|)`.
/// * Inconclusive otherwise.
///
/// If `g` overflows after `min_samples` samples the scan stops there; the
/// overflow itself is recorded in the rationale.
pub fn limit_at_infinity<T: Real>(
    mut g: impl FnMut(T) -> Result<T>,
    policy: &LimitPolicy<T>,
) -> Result<LimitResult<T>> {
    if !(policy.r0 > T::zero()) {
        return Err(Error::InvalidArgument(format!(
            "limit sampling starts at r0 > 0, got {}",
            policy.r0
        )));
    }
    let mut samples = Vec::new();
    let mut note = String::new();
    let mut r = policy.r0;
    for _ in 0..=policy.max_doublings {
        match g(r) {
            Ok(v) if v.is_finite() => samples.push((r, v)),
            Ok(_) if samples.len() >= policy.min_samples => {
                note = format!("; sampling stopped at r = {r}: non-finite value");
                break;
            }
            Ok(_) => {
                return Err(Error::Eval(crate::funcexpr::EvalError::Overflow {
                    node: "limit argument".into(),
                    r: r.as_f64(),
                }))
            }
            Err(e) if e.is_overflow() && samples.len() >= policy.min_samples => {
                note = format!("; sampling stopped at r = {r}: {e}");
                break;
            }
            Err(e) => return Err(e),
        }
        r = r + r;
    }
    let (kind, why) = decide_limit(&samples, policy);
    Ok(LimitResult {
        kind,
        samples,
        rationale: why + &note,
    })
}

fn decide_limit<T: Real>(samples: &[(T, T)], policy: &LimitPolicy<T>) -> (LimitKind<T>, String) {
    let m = samples.len();
    if m < 5 {
        return (
            LimitKind::Inconclusive,
            format!("only {m} samples available"),
        );
    }
    let v: Vec<T> = samples.iter().map(|p| p.1).collect();
    let d: Vec<T> = v.windows(2).map(|w| w[1] - w[0]).collect();
    let last = v[m - 1];
    let dl = &d[d.len() - 3..];
    let slack = T::one() - T::lit(1e-9);
    for sign in [Sign::Positive, Sign::Negative] {
        let s = if sign == Sign::Positive {
            T::one()
        } else {
            -T::one()
        };
        let monotone = dl.iter().all(|&x| s * x > T::zero());
        if !monotone {
            continue;
        }
        if s * last > policy.big {
            return (
                LimitKind::Infinite { sign },
                format!("samples move monotonically past {:e} (last {last:e})", s * policy.big),
            );
        }
        if s * dl[1] >= slack * s * dl[0] && s * dl[2] >= slack * s * dl[1] {
            return (
                LimitKind::Infinite { sign },
                format!(
                    "differences {:e}, {:e}, {:e} on the doubling grid do not shrink",
                    dl[0], dl[1], dl[2]
                ),
            );
        }
    }
    // Aitken's delta-squared on consecutive triples
    let mut estimates = Vec::new();
    for j in (d.len() - 3)..d.len() {
        let (prev, cur) = (d[j - 1], d[j]);
        if cur.abs() > prev.abs() {
            return (
                LimitKind::Inconclusive,
                format!("differences {prev:e}, {cur:e} do not contract"),
            );
        }
        let denom = cur - prev;
        let a = if cur == T::zero() || denom == T::zero() {
            v[j + 1]
        } else {
            v[j + 1] - cur * cur / denom
        };
        estimates.push(a);
    }
    let l = estimates[2];
    let scale = policy.tol * (T::one() + l.abs());
    let spread = estimates
        .iter()
        .map(|&e| (e - l).abs())
        .fold(T::zero(), T::max);
    if spread <= scale {
        (
            LimitKind::Finite { value: l },
            format!("Aitken estimates agree within {spread:e}"),
        )
    } else {
        (
            LimitKind::Inconclusive,
            format!("Aitken estimates spread {spread:e} exceeds {scale:e}"),
        )
    }
}
