use std::collections::BTreeMap;

use serde::Serialize;

use crate::quadrature::{ClassifyPolicy, ImproperResult, LimitPolicy, LimitResult, QuadPolicy};
use crate::Real;

/// Which curvature a criterion's hypotheses are stated for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Clause {
    /// The prescribed curvature `K`.
    Prescribed,
    /// The background scalar curvature `|k|`.
    Background,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    /// Divergence of `∫ (1/V) ∫_B K` with `∫_B K` eventually nonnegative.
    Integral,
    /// Limit form of the integral criterion.
    Limit,
    /// Convergence of `∫_a^∞ I(r)^{-1/2} dr`.
    FiniteLength,
    /// Growth of `K` faster than `r^{1+δ}` under pinched curvature.
    PointwiseGrowth,
}

impl Criterion {
    pub fn id(self) -> &'static str {
        match self {
            Criterion::Integral => "integral",
            Criterion::Limit => "limit",
            Criterion::FiniteLength => "finite_length",
            Criterion::PointwiseGrowth => "pointwise_growth",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VerdictKind {
    /// Every positive supersolution has infimum zero.
    InfZeroForced { clause: Clause },
    /// No complete conformal metric with scalar curvature `K` exists.
    NoCompleteMetric,
    NotApplicable { reason: String },
    Inconclusive { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailScan<T> {
    pub radii: Vec<T>,
    /// `(1/V(r)) ∫_{B(r)} K dμ`, which has the sign of `∫_{B(r)} K dμ`.
    pub ball_means: Vec<T>,
    /// First grid radius from which every value is nonnegative.
    pub tau: Option<T>,
    /// Largest radius actually scanned.
    pub horizon: T,
    pub note: String,
}

/// Settings for the nonnegativity scan and the choice of `a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanPolicy<T> {
    pub r_min: T,
    pub r_max: T,
    /// Geometric grid size on `[r_min, r_max]`.
    pub n_grid: usize,
    /// Grid points a tail must contain to count.
    pub min_tail: usize,
}

impl<T: Real> Default for ScanPolicy<T> {
    fn default() -> Self {
        ScanPolicy {
            r_min: T::lit(0.05),
            r_max: T::lit(100.0),
            n_grid: 64,
            min_tail: 4,
        }
    }
}

impl<T: Real> ScanPolicy<T> {
    pub fn grid(&self) -> Vec<T> {
        let n = self.n_grid.max(2);
        let ratio = self.r_max / self.r_min;
        (0..n)
            .map(|i| self.r_min * ratio.powf(T::from_count(i) / T::from_count(n - 1)))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriteriaPolicy<T> {
    pub scan: ScanPolicy<T>,
    pub classify: ClassifyPolicy<T>,
    pub limit: LimitPolicy<T>,
    pub quad: QuadPolicy<T>,
    /// Start of the improper integrals of ball means.
    pub improper_start: T,
    /// Grid size of the curvature-sign check on `(0, scan.r_max]`.
    pub ch_grid: usize,
    /// Knots per doubling for cached nested integrals.
    pub knots_per_doubling: usize,
}

impl<T: Real> Default for CriteriaPolicy<T> {
    fn default() -> Self {
        CriteriaPolicy {
            scan: ScanPolicy::default(),
            classify: ClassifyPolicy::default(),
            limit: LimitPolicy::default(),
            quad: QuadPolicy::default(),
            improper_start: T::one(),
            ch_grid: 200,
            knots_per_doubling: 4,
        }
    }
}

/// Everything a verdict was decided on.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionReport<T> {
    pub ch_valid: bool,
    pub pinching_c: Option<T>,
    pub tail_start: Option<T>,
    pub scan: Option<TailScan<T>>,
    pub a_found: Option<T>,
    /// `(r, I(r))` on the scan grid, when the criterion uses `I`.
    pub nested_trace: Vec<(T, T)>,
    pub integrals: BTreeMap<String, ImproperResult<T>>,
    pub limits: BTreeMap<String, LimitResult<T>>,
    pub clauses_fired: Vec<Clause>,
    pub notes: Vec<String>,
    pub policy: CriteriaPolicy<T>,
}

impl<T: Real> CriterionReport<T> {
    pub(crate) fn new(policy: &CriteriaPolicy<T>) -> Self {
        CriterionReport {
            ch_valid: false,
            pinching_c: None,
            tail_start: None,
            scan: None,
            a_found: None,
            nested_trace: Vec::new(),
            integrals: BTreeMap::new(),
            limits: BTreeMap::new(),
            clauses_fired: Vec::new(),
            notes: Vec::new(),
            policy: *policy,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict<T> {
    pub criterion: Criterion,
    #[serde(flatten)]
    pub kind: VerdictKind,
    /// The conclusion the verdict licenses, in words.
    pub statement: String,
    pub evidence: CriterionReport<T>,
}

pub const INF_ZERO_STATEMENT: &str = "every positive C^2 supersolution u of \
     c_n Δu - k u + K u^σ = 0 (c_n Δu - k u + K u^σ <= 0) on M has inf u = 0";
pub const NO_METRIC_STATEMENT: &str = "M carries no complete conformal metric \
     u^{4/(n-2)} g_0 that is radially symmetric about the pole and has scalar curvature K";
pub const NO_CONCLUSION: &str = "no conclusion";

impl<T: Real> Verdict<T> {
    pub(crate) fn new(criterion: Criterion, kind: VerdictKind, evidence: CriterionReport<T>) -> Self {
        let statement = match kind {
            VerdictKind::InfZeroForced { .. } => INF_ZERO_STATEMENT,
            VerdictKind::NoCompleteMetric => NO_METRIC_STATEMENT,
            _ => NO_CONCLUSION,
        }
        .to_string();
        Verdict {
            criterion,
            kind,
            statement,
            evidence,
        }
    }

    /// True when the criterion's conclusion holds.
    pub fn fired(&self) -> bool {
        matches!(
            self.kind,
            VerdictKind::InfZeroForced { .. } | VerdictKind::NoCompleteMetric
        )
    }

    pub fn clause(&self) -> Option<Clause> {
        match self.kind {
            VerdictKind::InfZeroForced { clause } => Some(clause),
            _ => None,
        }
    }

    pub fn clause_fired(&self, clause: Clause) -> bool {
        self.evidence.clauses_fired.contains(&clause)
    }
}
