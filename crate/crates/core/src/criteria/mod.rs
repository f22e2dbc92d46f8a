//! Criteria that force `inf u = 0` for supersolutions or rule out complete
//! conformal metrics, evaluated numerically on a model manifold.

mod checks;
mod growth;
mod verdict;

pub use checks::{
    finite_length_criterion, integral_criterion, limit_criterion, pointwise_growth_criterion,
    tail_scan,
};
pub use growth::{volume_growth, GrowthPolicy, GrowthReport};
pub use verdict::{
    Clause, CriteriaPolicy, Criterion, CriterionReport, ScanPolicy, TailScan, Verdict,
    VerdictKind, INF_ZERO_STATEMENT, NO_CONCLUSION, NO_METRIC_STATEMENT,
};
