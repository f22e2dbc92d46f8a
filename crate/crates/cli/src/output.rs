//! JSON and CSV emission.
//!
//! JSON documents are `{meta, ...}` objects; CSV files carry a header row
//! and print numbers with 17 significant digits.

use std::io::Write;

use curvlab::criteria::VerdictKind;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::Format;
use crate::run::{Body, Meta, Outcome, RunError};

/// 17 significant digits, enough to round-trip an `f64`.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn internal(e: impl std::fmt::Display) -> RunError {
    RunError::Internal(e.to_string())
}

pub fn to_json(outcome: &Outcome) -> Result<String, RunError> {
    let meta = &outcome.meta;
    let doc = match &outcome.body {
        Body::Geometry { series, spot_check } => {
            json!({ "meta": meta, "series": series, "spot_check": spot_check })
        }
        Body::Check(checks) => json!({
            "meta": meta,
            "verdicts": checks.verdicts,
            "volume_growth": checks.volume_growth,
        }),
        Body::Solve(doc) => with_meta(meta, doc)?,
        Body::Verify { verify, .. } => with_meta(meta, verify)?,
        Body::Report(doc) => with_meta(meta, doc)?,
    };
    let mut text = serde_json::to_string_pretty(&doc).map_err(internal)?;
    text.push('\n');
    Ok(text)
}

fn with_meta(meta: &Meta, body: &impl Serialize) -> Result<Value, RunError> {
    let mut value = serde_json::to_value(body).map_err(internal)?;
    let Value::Object(fields) = &mut value else {
        return Err(internal("document body is not an object"));
    };
    let mut out = serde_json::Map::new();
    out.insert("meta".into(), serde_json::to_value(meta).map_err(internal)?);
    out.append(fields);
    Ok(Value::Object(out))
}

pub fn to_csv(outcome: &Outcome) -> Result<String, RunError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut row = |fields: Vec<String>| w.write_record(&fields).map_err(internal);
    match &outcome.body {
        Body::Geometry { series, .. } => {
            row(["r", "h", "V", "delta_r", "k", "vol_ball"].map(String::from).to_vec())?;
            for g in series {
                row([g.r, g.h, g.v, g.delta_r, g.k, g.vol_ball].map(num).to_vec())?;
            }
        }
        Body::Check(checks) => {
            row(["criterion", "result", "clause", "clauses_fired", "detail"].map(String::from).to_vec())?;
            for v in &checks.verdicts {
                let (result, detail) = match &v.kind {
                    VerdictKind::InfZeroForced { .. } => ("inf_zero_forced", v.statement.clone()),
                    VerdictKind::NoCompleteMetric => ("no_complete_metric", v.statement.clone()),
                    VerdictKind::NotApplicable { reason } => ("not_applicable", reason.clone()),
                    VerdictKind::Inconclusive { reason } => ("inconclusive", reason.clone()),
                };
                let fired: Vec<String> = v
                    .evidence
                    .clauses_fired
                    .iter()
                    .map(|c| format!("{c:?}").to_lowercase())
                    .collect();
                row(vec![
                    v.criterion.id().to_string(),
                    result.to_string(),
                    v.clause().map(|c| format!("{c:?}").to_lowercase()).unwrap_or_default(),
                    fired.join(";"),
                    detail,
                ])?;
            }
            let g = &checks.volume_growth;
            row(vec![
                "volume_growth".into(),
                if g.passed { "pass" } else { "fail" }.into(),
                String::new(),
                String::new(),
                format!(
                    "delta = {}; growth_factor = {}; first_decrease = {}",
                    num(g.delta),
                    num(g.growth_factor),
                    opt(g.first_decrease)
                ),
            ])?;
        }
        Body::Solve(doc) => {
            row(["r", "u", "u_prime", "residual"].map(String::from).to_vec())?;
            for s in &doc.series {
                row([s.r, s.u, s.u_prime, s.residual].map(num).to_vec())?;
            }
        }
        Body::Verify { verify, solution } => {
            row(["r", "u", "v", "bound", "margin"].map(String::from).to_vec())?;
            for (s, &u) in verify.average_bound.samples.iter().zip(&solution.u) {
                row([s.r, u, s.v, s.bound, s.margin].map(num).to_vec())?;
            }
        }
        Body::Report(_) => {
            return Err(RunError::Usage(
                "report bundles several tables and is only written as JSON".into(),
            ))
        }
    }
    let bytes = w.into_inner().map_err(internal)?;
    String::from_utf8(bytes).map_err(internal)
}

pub fn render(outcome: &Outcome, format: Format) -> Result<String, RunError> {
    match format {
        Format::Json => to_json(outcome),
        Format::Csv => to_csv(outcome),
    }
}

/// Writes to `path`, or to standard output when there is none.
pub fn emit(text: &str, path: Option<&str>) -> Result<(), RunError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| internal(format!("cannot write {p}: {e}"))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).map_err(internal)?;
            out.flush().map_err(internal)
        }
    }
}
