use super::verdict::{
    Clause, CriteriaPolicy, Criterion, CriterionReport, TailScan, Verdict, VerdictKind,
};
use crate::manifold::{ModelManifold, RadialValue, ValueFn};
use crate::quadrature::{
    ball_integral, classify_improper, limit_at_infinity, mean_k_ball, ImproperKind,
    ImproperResult, LimitKind, LimitResult, NestedIntegral, QuadPolicy, Sign,
};
use crate::{Error, Real, Result};

fn inner<T: Real>(policy: &QuadPolicy<T>) -> QuadPolicy<T> {
    QuadPolicy {
        rel_tol: (policy.rel_tol * T::lit(1e-2)).max(T::lit(1e-14)),
        ..*policy
    }
}

/// Fills the curvature-sign fields; returns false when `M` is not
/// Cartan–Hadamard on the scan horizon.
fn ch_gate<T: Real>(
    manifold: &ModelManifold<T>,
    report: &mut CriterionReport<T>,
    policy: &CriteriaPolicy<T>,
) -> bool {
    let ch = manifold.check_ch(policy.scan.r_max, policy.ch_grid);
    report.ch_valid = ch.valid;
    report.pinching_c = ch.pinching_c;
    if !ch.valid {
        let first = ch
            .violations
            .first()
            .map(|r| format!("positive curvature at r = {r}"))
            .or_else(|| ch.failures.first().map(|(r, e)| format!("r = {r}: {e}")))
            .unwrap_or_default();
        report
            .notes
            .push(format!("not Cartan-Hadamard on (0, {}]: {first}", policy.scan.r_max));
    }
    ch.valid
}

/// Scans the sign of `∫_{B(r)} K dμ` on the geometric scan grid.
pub fn tail_scan<T: Real>(
    manifold: &ModelManifold<T>,
    k: &(impl RadialValue<T> + ?Sized),
    policy: &CriteriaPolicy<T>,
) -> Result<TailScan<T>> {
    let quad = &policy.quad;
    let abs_k = ValueFn(|r: T| Ok(k.value(r)?.abs()));
    let mut radii = Vec::new();
    let mut ball_means = Vec::new();
    let mut nonneg = Vec::new();
    let mut note = String::new();
    for r in policy.scan.grid() {
        let m = match mean_k_ball(manifold, k, r, quad) {
            Ok(m) => m,
            Err(e) if e.is_overflow() => {
                note = format!("scan stopped at r = {r}: {e}");
                break;
            }
            Err(e) => return Err(e),
        };
        // a negative mean counts as zero when it is at quadrature noise level
        let ok = m >= T::zero()
            || m >= -T::lit(10.0) * quad.rel_tol * mean_k_ball(manifold, &abs_k, r, quad)?;
        radii.push(r);
        ball_means.push(m);
        nonneg.push(ok);
    }
    let start = nonneg.iter().rposition(|&ok| !ok).map_or(0, |i| i + 1);
    let tau = if nonneg.len() - start >= policy.scan.min_tail {
        Some(radii[start])
    } else {
        None
    };
    Ok(TailScan {
        horizon: radii.last().copied().unwrap_or(T::zero()),
        radii,
        ball_means,
        tau,
        note,
    })
}

/// Records the tail scan in the report and returns `τ`.
fn scan_into<T: Real>(
    manifold: &ModelManifold<T>,
    k: &(impl RadialValue<T> + ?Sized),
    report: &mut CriterionReport<T>,
    policy: &CriteriaPolicy<T>,
) -> Result<Option<T>> {
    let scan = tail_scan(manifold, k, policy)?;
    let tau = scan.tau;
    report.tail_start = tau;
    report.scan = Some(scan);
    Ok(tau)
}

fn describe_improper<T: Real>(res: &ImproperResult<T>) -> String {
    match res.kind {
        ImproperKind::Convergent { value } => format!("converges to {value:e}"),
        ImproperKind::Divergent { sign: Sign::Positive } => "diverges to +inf".into(),
        ImproperKind::Divergent { sign: Sign::Negative } => "diverges to -inf".into(),
        ImproperKind::Inconclusive => format!("inconclusive ({})", res.rationale),
    }
}

fn describe_limit<T: Real>(res: &LimitResult<T>) -> String {
    match res.kind {
        LimitKind::Finite { value } => format!("tends to {value:e}"),
        LimitKind::Infinite { sign: Sign::Positive } => "tends to +inf".into(),
        LimitKind::Infinite { sign: Sign::Negative } => "tends to -inf".into(),
        LimitKind::Inconclusive => format!("inconclusive ({})", res.rationale),
    }
}

/// When both clauses fire the background clause is reported: it holds for
/// every admissible `K` on `M`.
fn pick_clause(fired: &[Clause]) -> Option<Clause> {
    if fired.contains(&Clause::Background) {
        Some(Clause::Background)
    } else {
        fired.first().copied()
    }
}

/// Integral criterion: every positive supersolution has infimum zero if
///
/// * (prescribed) `∫₀^∞ (1/V(s)) ∫_{B(s)} K dμ ds = +∞`, or
/// * (background) `∫_{B(r)} K dμ >= 0` for large `r` and
///   `∫₀^∞ (1/V(s)) ∫_{B(s)} |k| dμ ds = +∞`.
pub fn integral_criterion<T: Real>(
    manifold: &ModelManifold<T>,
    k: &(impl RadialValue<T> + ?Sized),
    policy: &CriteriaPolicy<T>,
) -> Result<Verdict<T>> {
    let mut report = CriterionReport::new(policy);
    if !ch_gate(manifold, &mut report, policy) {
        let reason = report.notes.last().cloned().unwrap_or_default();
        return Ok(Verdict::new(
            Criterion::Integral,
            VerdictKind::NotApplicable { reason },
            report,
        ));
    }
    let q = inner(&policy.quad);
    let a = policy.improper_start;

    let prescribed = classify_improper(|s| mean_k_ball(manifold, k, s, &q), a, &policy.classify)?;
    let mut reasons = vec![format!(
        "prescribed: ∫ (1/V) ∫_B K {}",
        describe_improper(&prescribed)
    )];
    if prescribed.diverges_to(Sign::Positive) {
        report.clauses_fired.push(Clause::Prescribed);
    }
    report.integrals.insert("prescribed".into(), prescribed);

    let tau = scan_into(manifold, k, &mut report, policy)?;
    match tau {
        None => reasons.push(format!(
            "background: ∫_B K dμ is not eventually nonnegative up to r = {}",
            policy.scan.r_max
        )),
        Some(tau) => {
            let abs_k = manifold.curvature_fn(true);
            let background =
                classify_improper(|s| mean_k_ball(manifold, &abs_k, s, &q), a, &policy.classify)?;
            reasons.push(format!(
                "background: tail nonnegative from τ = {tau}; ∫ (1/V) ∫_B |k| {}",
                describe_improper(&background)
            ));
            if background.diverges_to(Sign::Positive) {
                report.clauses_fired.push(Clause::Background);
            }
            report.integrals.insert("background".into(), background);
        }
    }
    report.notes.extend(reasons.iter().cloned());
    let kind = match pick_clause(&report.clauses_fired) {
        Some(clause) => VerdictKind::InfZeroForced { clause },
        None => VerdictKind::Inconclusive {
            reason: reasons.join("; "),
        },
    };
    Ok(Verdict::new(Criterion::Integral, kind, report))
}

fn positive_or_infinite<T: Real>(res: &LimitResult<T>, tol: T) -> bool {
    match res.kind {
        LimitKind::Finite { value } => value > tol,
        LimitKind::Infinite { sign } => sign == Sign::Positive,
        LimitKind::Inconclusive => false,
    }
}

/// Limit criterion. With `∫_{B(r)} K dμ >= 0` for large `r`, every
/// positive supersolution has infimum zero if
///
/// * (prescribed) `∫_{B(r)} K dμ → ∞` and `r² K(r)/(r Δr − 1) → β`
///   with `β > 0` or `β = +∞`, or
/// * (background) the same holds with `|k|` in place of `K`.
pub fn limit_criterion<T: Real>(
    manifold: &ModelManifold<T>,
    k: &(impl RadialValue<T> + ?Sized),
    policy: &CriteriaPolicy<T>,
) -> Result<Verdict<T>> {
    let mut report = CriterionReport::new(policy);
    if !ch_gate(manifold, &mut report, policy) {
        let reason = report.notes.last().cloned().unwrap_or_default();
        return Ok(Verdict::new(
            Criterion::Limit,
            VerdictKind::NotApplicable { reason },
            report,
        ));
    }
    if scan_into(manifold, k, &mut report, policy)?.is_none() {
        let reason = format!(
            "∫_B K dμ is not eventually nonnegative up to r = {}",
            policy.scan.r_max
        );
        report.notes.push(reason.clone());
        return Ok(Verdict::new(
            Criterion::Limit,
            VerdictKind::NotApplicable { reason },
            report,
        ));
    }
    let abs_k = manifold.curvature_fn(true);
    let mut reasons = Vec::new();
    for clause in [Clause::Prescribed, Clause::Background] {
        let (name, ratio_name) = match clause {
            Clause::Prescribed => ("prescribed", "beta"),
            Clause::Background => ("background", "gamma"),
        };
        let (mass, ratio) = match clause {
            Clause::Prescribed => limit_pair(manifold, k, policy)?,
            Clause::Background => limit_pair(manifold, &abs_k, policy)?,
        };
        let fired = mass.is_infinite(Sign::Positive)
            && positive_or_infinite(&ratio, policy.limit.tol);
        reasons.push(format!(
            "{name}: ∫_B dμ {}; {ratio_name} {}",
            describe_limit(&mass),
            describe_limit(&ratio)
        ));
        if fired {
            report.clauses_fired.push(clause);
        }
        report.limits.insert(format!("{name}_ball_integral"), mass);
        report.limits.insert(ratio_name.to_string(), ratio);
    }
    report.notes.extend(reasons.iter().cloned());
    let kind = match pick_clause(&report.clauses_fired) {
        Some(clause) => VerdictKind::InfZeroForced { clause },
        None => VerdictKind::Inconclusive {
            reason: reasons.join("; "),
        },
    };
    Ok(Verdict::new(Criterion::Limit, kind, report))
}

/// Finite-length criterion: no complete conformal metric with scalar
/// curvature `K` exists if, for some `a > 0` with `I(r) > 0` on `[a, ∞)`,
/// `∫_a^∞ I(r)^{-1/2} dr < ∞`, where `I(r) = ∫₀^r (1/V) ∫_B K dμ dt`.
pub fn finite_length_criterion<T: Real>(
    manifold: &ModelManifold<T>,
    k: &(impl RadialValue<T> + ?Sized),
    policy: &CriteriaPolicy<T>,
) -> Result<Verdict<T>> {
    let mut report = CriterionReport::new(policy);
    if !ch_gate(manifold, &mut report, policy) {
        let reason = report.notes.last().cloned().unwrap_or_default();
        return Ok(Verdict::new(
            Criterion::FiniteLength,
            VerdictKind::NotApplicable { reason },
            report,
        ));
    }
    let grid = policy.scan.grid();
    let cached = NestedIntegral::new(
        manifold,
        k,
        policy.scan.r_min,
        policy.scan.r_max,
        policy.knots_per_doubling,
        policy.quad,
    )?;
    let mut values = Vec::new();
    for &r in &grid {
        match cached.eval(r) {
            Ok(v) => values.push((r, v)),
            Err(e) if e.is_overflow() => {
                report.notes.push(format!("I(r) overflowed at r = {r}"));
                break;
            }
            Err(e) => return Err(e),
        }
    }
    let start = values
        .iter()
        .rposition(|&(_, v)| !(v > T::zero()))
        .map_or(0, |i| i + 1);
    report.nested_trace = values.clone();
    if values.len() - start < policy.scan.min_tail {
        let reason = format!(
            "I(r) is not positive on a tail of the scan grid up to r = {}",
            policy.scan.r_max
        );
        report.notes.push(reason.clone());
        return Ok(Verdict::new(
            Criterion::FiniteLength,
            VerdictKind::NotApplicable { reason },
            report,
        ));
    }
    let a = values[start].0;
    report.a_found = Some(a);
    let reach = a * T::lit(2.0).powi(policy.classify.max_doublings as i32);
    let tail = NestedIntegral::new(
        manifold,
        k,
        a,
        reach,
        policy.knots_per_doubling,
        policy.quad,
    )?;
    if let Some(h) = tail.horizon() {
        report
            .notes
            .push(format!("I(r) overflowed beyond r = {h}; the tail scan stops there"));
    }
    let length = classify_improper(
        |r| {
            let i = tail.eval(r)?;
            if !(i > T::zero()) {
                return Err(Error::InvalidArgument(format!(
                    "I(r) = {i} is not positive at r = {r}"
                )));
            }
            Ok(i.powf(T::lit(-0.5)))
        },
        a,
        &policy.classify,
    );
    let kind = match length {
        Ok(res) => {
            let text = format!("∫_a^∞ I^(-1/2) dr with a = {a} {}", describe_improper(&res));
            report.notes.push(text.clone());
            let kind = if res.is_convergent() {
                VerdictKind::NoCompleteMetric
            } else {
                VerdictKind::Inconclusive { reason: text }
            };
            report.integrals.insert("length".into(), res);
            kind
        }
        Err(Error::InvalidArgument(msg)) => {
            report.notes.push(msg.clone());
            VerdictKind::Inconclusive { reason: msg }
        }
        Err(e) => return Err(e),
    };
    Ok(Verdict::new(Criterion::FiniteLength, kind, report))
}

/// Pointwise growth criterion: under pinched curvature `−c² <= sec <= 0`,
/// no complete conformal metric with scalar curvature `K` exists if
/// `K(r)/r^{1+δ} → +∞` for some `δ > 0`.
pub fn pointwise_growth_criterion<T: Real>(
    manifold: &ModelManifold<T>,
    k: &(impl RadialValue<T> + ?Sized),
    delta: T,
    policy: &CriteriaPolicy<T>,
) -> Result<Verdict<T>> {
    if !(delta > T::zero()) || !delta.is_finite() {
        return Err(Error::DeltaOutOfRange(delta.as_f64()));
    }
    let mut report = CriterionReport::new(policy);
    if !ch_gate(manifold, &mut report, policy) {
        let reason = report.notes.last().cloned().unwrap_or_default();
        return Ok(Verdict::new(
            Criterion::PointwiseGrowth,
            VerdictKind::NotApplicable { reason },
            report,
        ));
    }
    let Some(c) = report.pinching_c else {
        let reason = format!(
            "curvature does not look bounded below on (0, {}]; no pinching constant",
            policy.scan.r_max
        );
        report.notes.push(reason.clone());
        return Ok(Verdict::new(
            Criterion::PointwiseGrowth,
            VerdictKind::NotApplicable { reason },
            report,
        ));
    };
    let p = T::one() + delta;
    let growth = limit_at_infinity(|r: T| Ok(k.value(r)? / r.powf(p)), &policy.limit)?;
    let text = format!(
        "pinching c = {c}; K(r)/r^(1+δ) with δ = {delta} {}",
        describe_limit(&growth)
    );
    report.notes.push(text.clone());
    let kind = if growth.is_infinite(Sign::Positive) {
        VerdictKind::NoCompleteMetric
    } else {
        VerdictKind::Inconclusive { reason: text }
    };
    report.limits.insert("growth".into(), growth);
    Ok(Verdict::new(Criterion::PointwiseGrowth, kind, report))
}

/// Limits of `∫_{B(r)} f dμ` and of `r² f(r)/(r Δr − 1)`.
fn limit_pair<T: Real>(
    manifold: &ModelManifold<T>,
    f: &(impl RadialValue<T> + ?Sized),
    policy: &CriteriaPolicy<T>,
) -> Result<(LimitResult<T>, LimitResult<T>)> {
    let mass = limit_at_infinity(
        |r| Ok(ball_integral(manifold, f, r, &policy.quad)?.value),
        &policy.limit,
    )?;
    let ratio = limit_at_infinity(
        |r| {
            let denom = r * manifold.laplacian_r(r)? - T::one();
            if !(denom > T::zero()) {
                return Err(Error::InvalidArgument(format!(
                    "r Δr - 1 = {denom} is not positive at r = {r}"
                )));
            }
            Ok(r * r * f.value(r)? / denom)
        },
        &policy.limit,
    )?;
    Ok((mass, ratio))
}
