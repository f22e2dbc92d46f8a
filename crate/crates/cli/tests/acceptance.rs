//! Acceptance suite: one line per criterion, `pass` or `fail` with the
//! numbers behind it. Exits nonzero when a criterion fails, unless it is
//! listed in `EXPECTED_FAILURES`, in which case an unexpected pass fails.

use std::f64::consts::FRAC_PI_2;
use std::process::{Command, ExitCode};
use std::time::Instant;

use curvlab::criteria::{
    finite_length_criterion, integral_criterion, limit_criterion, pointwise_growth_criterion,
    volume_growth, Clause, CriteriaPolicy, GrowthPolicy, Verdict, VerdictKind,
};
use curvlab::funcexpr::{BinOp, Constant, Func};
use curvlab::manifold::{ConstantFn, ModelManifold, RadialFn};
use curvlab::quadrature::{nested_i, ClassifyPolicy, QuadPolicy};
use curvlab::radial_ode::{
    conformal_length, residual, solve_radial, verify_average_bound, ResidualClass, Solution,
    SolvePolicy, TailKind,
};
use curvlab::{parse, Error, Expr, Manifold};
use proptest::strategy::{Just, Strategy, ValueTree};
use proptest::test_runner::{Config, TestRng, TestRunner};

type Outcome = Result<String, String>;

/// Criteria whose statement cannot hold as written, with the reason.
const EXPECTED_FAILURES: &[(usize, &str)] = &[(
    3,
    "for Euclidean space V/r^(n-2+0.999) = w r^0.001, so its growth over [1, 100] is 100^0.001",
)];

fn rel(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        a.abs()
    } else {
        (a - b).abs() / b.abs()
    }
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn ev(e: Error) -> String {
    e.to_string()
}

fn euclid(n: usize) -> Manifold {
    Manifold::euclidean(n).unwrap()
}

fn hyper(n: usize, c: f64) -> Manifold {
    ModelManifold::hyperbolic(n, c).unwrap()
}

fn expr(s: &str) -> Expr {
    parse(s).unwrap()
}

fn geometry_oracles() -> Outcome {
    let radii = [0.1, 0.5, 1.0, 2.0, 5.0, 10.0];
    let mut worst = 0.0f64;
    for n in [3usize, 4, 5, 7] {
        let m = euclid(n);
        let w = m.omega_sphere();
        let d = (n - 1) as f64;
        for &r in &radii {
            worst = worst
                .max(rel(m.volume_sphere(r).map_err(ev)?, w * r.powi(n as i32 - 1)))
                .max(rel(m.laplacian_r(r).map_err(ev)?, d / r))
                .max(m.scalar_curvature(r).map_err(ev)?.abs());
        }
        for c in [0.5, 1.0, 2.0] {
            let m = hyper(n, c);
            for &r in &radii {
                let h = (c * r).sinh() / c;
                worst = worst
                    .max(rel(m.volume_sphere(r).map_err(ev)?, w * h.powi(n as i32 - 1)))
                    .max(rel(m.laplacian_r(r).map_err(ev)?, d * c / (c * r).tanh()))
                    .max(rel(m.scalar_curvature(r).map_err(ev)?, -(n as f64) * d * c * c));
            }
        }
    }
    check(worst <= 1e-9, format!("largest relative error {worst:.2e} (limit 1e-9)"))
}

fn comparison_sandwich() -> Outcome {
    let mut worst_low = f64::INFINITY;
    let mut worst_high = f64::INFINITY;
    for n in [3usize, 4, 6] {
        let m = Manifold::from_expr(n, expr("(r + sinh(r)) / 2")).map_err(ev)?;
        let d = (n - 1) as f64;
        for i in 1..=200 {
            let r = 20.0 * i as f64 / 200.0;
            let lap = m.laplacian_r(r).map_err(ev)?;
            worst_low = worst_low.min(lap - d / r);
            worst_high = worst_high.min(d / r.tanh() + 1e-10 - lap);
        }
    }
    check(
        worst_low >= 0.0 && worst_high >= 0.0,
        format!("min Δr - (n-1)/r = {worst_low:.3e}, min upper slack = {worst_high:.3e}"),
    )
}

fn volume_growth_lemma() -> Outcome {
    let manifolds = [
        ("euclidean", euclid(3)),
        ("hyperbolic(1)", hyper(3, 1.0)),
        ("r + r^3/6", Manifold::from_expr(3, expr("r + r^3/6")).unwrap()),
    ];
    let mut notes = Vec::new();
    let mut ok = true;
    for (name, m) in &manifolds {
        for delta in [0.0, 0.5, 0.9] {
            let g = volume_growth(m, delta, 100.0, 200, &GrowthPolicy::default()).map_err(ev)?;
            if !g.nondecreasing {
                ok = false;
                notes.push(format!("{name} δ={delta} decreases at {:?}", g.first_decrease));
            }
        }
    }
    notes.push("ratio nondecreasing for δ in {0, 0.5, 0.9} on all three".into());
    let span = GrowthPolicy {
        r_min: 1.0,
        ..GrowthPolicy::default()
    };
    let g = volume_growth(&euclid(3), 0.999, 100.0, 100, &span).map_err(ev)?;
    ok &= g.span_growth > 10.0;
    notes.push(format!(
        "euclidean δ=0.999 growth over [1, 100] = {:.6} (required > 10)",
        g.span_growth
    ));
    let rejected = matches!(
        volume_growth(&euclid(3), 1.0, 100.0, 10, &GrowthPolicy::default()),
        Err(Error::DeltaOutOfRange(_))
    );
    ok &= rejected;
    notes.push(format!("δ=1 rejected: {rejected}"));
    check(ok, notes.join("; "))
}

fn nested_integral_oracle() -> Outcome {
    let m = euclid(3);
    let mut worst = 0.0f64;
    for p in 0..4 {
        let k = expr(&format!("r^{p}"));
        for r in [0.5, 1.0, 2.0, 4.0, 8.0] {
            let got = nested_i(&m, &k, r, &QuadPolicy::default()).map_err(ev)?;
            let pf = p as f64;
            worst = worst.max(rel(got, r.powf(pf + 2.0) / ((pf + 2.0) * (3.0 + pf))));
        }
    }
    check(worst <= 1e-7, format!("largest relative error {worst:.2e} (limit 1e-7)"))
}

fn bubble_reproduction() -> Outcome {
    let m = euclid(3);
    let k = ConstantFn(24.0);
    let bubble = expr("(1 + r^2)^(-1/2)");
    let sol = solve_radial(&m, &k, 1.0, 10.0, &SolvePolicy::default()).map_err(ev)?;
    let mut worst = 0.0f64;
    for i in 0..=2000 {
        let r = 10.0 * i as f64 / 2000.0;
        worst = worst.max(rel(sol.eval(r).map_err(ev)?.value, bubble.jet(r).map_err(ev)?.value));
    }
    let grid: Vec<f64> = (0..=400).map(|i| 10.0 * i as f64 / 400.0).collect();
    let rep = residual(&m, &k, &bubble, &grid).map_err(ev)?;
    check(
        sol.is_completed()
            && worst <= 1e-6
            && rep.class == ResidualClass::Solution
            && rep.max_abs <= 1e-8,
        format!(
            "status {:?}, max relative error {worst:.2e}; closed form residual {:?} with max |R| {:.2e}",
            sol.status, rep.class, rep.max_abs
        ),
    )
}

fn average_bound() -> Outcome {
    let q = QuadPolicy::default();
    let start = Instant::now();
    let grid: Vec<f64> = (0..=200).map(|i| 10.0 * i as f64 / 200.0).collect();
    let bubble = Solution::sample(&expr("(1 + r^2)^(-1/2)"), grid).map_err(ev)?;
    let a = verify_average_bound(&euclid(3), &ConstantFn(24.0), &bubble, 1e-6, &q).map_err(ev)?;
    let t_bubble = start.elapsed().as_secs_f64();

    let start = Instant::now();
    let grid: Vec<f64> = (0..=200).map(|i| 20.0 * i as f64 / 200.0).collect();
    let one = Solution::sample(&ConstantFn(1.0), grid).map_err(ev)?;
    let b = verify_average_bound(&hyper(3, 1.0), &ConstantFn(-6.0), &one, 1e-6, &q).map_err(ev)?;
    let t_one = start.elapsed().as_secs_f64();
    check(
        a.min_margin >= -1e-6
            && b.min_margin >= -1e-6
            && a.precondition_met
            && b.precondition_met
            && t_bubble < 5.0
            && t_one < 5.0,
        format!(
            "bubble min margin {:.6} in {t_bubble:.2}s; u=1 on hyperbolic(1) min margin {:.6} ({:?}) in {t_one:.2}s",
            a.min_margin, b.min_margin, b.residual_class
        ),
    )
}

fn verdict_table() -> Outcome {
    let p = CriteriaPolicy::default();
    let prescribed = VerdictKind::InfZeroForced {
        clause: Clause::Prescribed,
    };
    let background = VerdictKind::InfZeroForced {
        clause: Clause::Background,
    };
    let e = euclid(3);
    let h = hyper(3, 1.0);
    let one = ConstantFn(1.0);
    let quad = expr("r^2");
    let mut rows: Vec<(&str, bool)> = Vec::new();
    let kind = |v: Result<Verdict<f64>, Error>| v.map(|v| v.kind).map_err(ev);
    rows.push((
        "euclidean K=1 integral (a)",
        kind(integral_criterion(&e, &one, &p))? == prescribed,
    ));
    rows.push(("euclidean K=1 limit (a)", kind(limit_criterion(&e, &one, &p))? == prescribed));
    rows.push((
        "hyperbolic K=0 integral (b)",
        kind(integral_criterion(&h, &ConstantFn(0.0), &p))? == background,
    ));
    rows.push(("hyperbolic K=1 limit (b)", kind(limit_criterion(&h, &one, &p))? == background));
    rows.push((
        "euclidean K=r^2 finite length",
        kind(finite_length_criterion(&e, &quad, &p))? == VerdictKind::NoCompleteMetric,
    ));
    rows.push((
        "euclidean K=r^2 pointwise growth δ=0.5",
        kind(pointwise_growth_criterion(&e, &quad, 0.5, &p))? == VerdictKind::NoCompleteMetric,
    ));
    let k24 = ConstantFn(24.0);
    rows.push((
        "euclidean K=24 finite length does not fire",
        !finite_length_criterion(&e, &k24, &p).map_err(ev)?.fired(),
    ));
    rows.push((
        "euclidean K=24 integral (a)",
        kind(integral_criterion(&e, &k24, &p))? == prescribed,
    ));
    let neg = ConstantFn(-1.0);
    let quiet = [
        integral_criterion(&e, &neg, &p),
        limit_criterion(&e, &neg, &p),
        finite_length_criterion(&e, &neg, &p),
        pointwise_growth_criterion(&e, &neg, 0.5, &p),
    ]
    .into_iter()
    .map(|v| v.map(|v| !v.fired()))
    .collect::<Result<Vec<_>, _>>()
    .map_err(ev)?;
    rows.push(("euclidean K=-1 nothing fires", quiet.iter().all(|&q| q)));
    let failed: Vec<&str> = rows.iter().filter(|r| !r.1).map(|r| r.0).collect();
    check(
        failed.is_empty(),
        if failed.is_empty() {
            format!("{} rows match", rows.len())
        } else {
            format!("mismatched: {}", failed.join(", "))
        },
    )
}

fn logic_chain() -> Outcome {
    let p = CriteriaPolicy::default();
    let ks = ["1", "0", "-1", "24", "r^2", "r^3", "r", "1 + r", "exp(-r)", "-exp(-r)", "r^2 - 1"];
    let mut count = 0;
    let mut broken = Vec::new();
    for (name, m) in [("euclidean", euclid(3)), ("hyperbolic(1)", hyper(3, 1.0))] {
        for text in ks {
            let k = expr(text);
            let integral = integral_criterion(&m, &k, &p).map_err(ev)?.fired();
            let limit = limit_criterion(&m, &k, &p).map_err(ev)?.fired();
            let length = finite_length_criterion(&m, &k, &p).map_err(ev)?.fired();
            let growth = pointwise_growth_criterion(&m, &k, 0.5, &p).map_err(ev)?.fired();
            if growth && !length {
                broken.push(format!("{name} K={text}: growth without finite length"));
            }
            if limit && !integral {
                broken.push(format!("{name} K={text}: limit without integral"));
            }
            count += 1;
        }
    }
    check(
        broken.is_empty(),
        if broken.is_empty() {
            format!("{count} instances consistent")
        } else {
            broken.join("; ")
        },
    )
}

fn completeness_length() -> Outcome {
    let m = euclid(3);
    let sol = solve_radial(&m, &ConstantFn(24.0), 1.0, 1e3, &SolvePolicy::default()).map_err(ev)?;
    let bubble = conformal_length(&m, &sol, 0.0, &ClassifyPolicy::default()).map_err(ev)?;
    let grid: Vec<f64> = (0..=100).map(|i| i as f64).collect();
    let one = Solution::sample(&ConstantFn(1.0), grid).map_err(ev)?;
    let flat = conformal_length(&m, &one, 0.0, &ClassifyPolicy::default()).map_err(ev)?;
    let err = (bubble.length - FRAC_PI_2).abs();
    check(
        err <= 1e-6 && bubble.tail == TailKind::Finite && flat.tail == TailKind::Infinite,
        format!(
            "bubble length {:.9} (error {err:.2e}), tail {:?}; u=1 tail {:?}",
            bubble.length, bubble.tail, flat.tail
        ),
    )
}

fn smooth_expr() -> impl Strategy<Value = Expr> {
    let leaf = proptest::prop_oneof![
        3 => Just(Expr::Var),
        2 => (-2.0f64..2.0).prop_map(|x| Expr::num((x * 100.0).round() / 100.0)),
        1 => Just(Expr::Const(Constant::Pi)),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        let one_plus_sq = |e: Expr| {
            Expr::binary(BinOp::Add, Expr::num(1.0), Expr::binary(BinOp::Pow, e, Expr::num(2.0)))
        };
        proptest::prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::binary(BinOp::Add, a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::binary(BinOp::Sub, a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::binary(BinOp::Mul, a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::binary(
                BinOp::Div,
                a,
                Expr::binary(BinOp::Add, Expr::num(1.5), Expr::call(Func::Sin, b))
            )),
            inner.clone().prop_map(|a| Expr::Neg(Box::new(a))),
            inner.clone().prop_map(|a| Expr::call(Func::Sin, a)),
            inner.clone().prop_map(|a| Expr::call(Func::Cos, a)),
            inner.clone().prop_map(|a| Expr::call(Func::Atan, a)),
            inner.clone().prop_map(|a| Expr::call(Func::Tanh, a)),
            inner.clone().prop_map(|a| Expr::call(Func::Exp, Expr::call(Func::Sin, a))),
            inner.clone().prop_map(move |a| Expr::call(Func::Log, one_plus_sq(a))),
            inner.clone().prop_map(move |a| Expr::call(Func::Sqrt, one_plus_sq(a))),
            (inner.clone(), 0u8..4)
                .prop_map(|(a, p)| Expr::binary(BinOp::Pow, a, Expr::num(p as f64))),
            (0.5f64..2.5).prop_map(|p| Expr::binary(
                BinOp::Pow,
                Expr::Var,
                Expr::num((p * 10.0).round() / 10.0)
            )),
            Just(Expr::call(Func::Sinh, Expr::Var)),
            Just(Expr::call(Func::Coth, Expr::Var)),
        ]
    })
}

fn ad_correctness() -> Outcome {
    let mut runner = TestRunner::new_with_rng(Config::default(), TestRng::deterministic_rng(Config::default().rng_algorithm));
    let strategy = (smooth_expr(), 0.5f64..2.0);
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    for _ in 0..1000 {
        let (e, r) = strategy
            .new_tree(&mut runner)
            .map_err(|e| e.to_string())?
            .current();
        let jet = e.eval_jet2::<f64>(r).map_err(|e| e.to_string())?;
        let f = |x: f64| e.eval::<f64>(x).unwrap();
        let d1 = |h: f64| (f(r + h) - f(r - h)) / (2.0 * h);
        let d2 = |h: f64| (f(r + h) - 2.0 * f(r) + f(r - h)) / (h * h);
        let h = 2e-3;
        let fd1 = (4.0 * d1(h / 2.0) - d1(h)) / 3.0;
        let fd2 = (4.0 * d2(h / 2.0) - d2(h)) / 3.0;
        let s1 = jet.d1.abs().max(jet.value.abs()).max(1.0);
        let s2 = jet.d2.abs().max(jet.d1.abs()).max(jet.value.abs()).max(1.0);
        let err = ((jet.d1 - fd1).abs() / s1).max((jet.d2 - fd2).abs() / s2);
        worst = worst.max(err);
        if err > 1e-6 {
            failures.push(format!("{e} at r = {r}"));
        }
    }
    check(
        failures.is_empty(),
        format!(
            "1000 expressions, largest scaled error {worst:.2e} (limit 1e-6){}",
            if failures.is_empty() { String::new() } else { format!("; failing: {}", failures.join(", ")) }
        ),
    )
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let config = dir.path().join("run.ini");
    std::fs::write(
        &config,
        "[manifold]\nn = 3\npreset = hyperbolic\nc = 1.0\n\n[curvature]\nK = \"1 + r\"\n",
    )
    .map_err(|e| e.to_string())?;
    let mut outputs = Vec::new();
    for i in 0..2 {
        let out = dir.path().join(format!("report{i}.json"));
        let status = Command::new(env!("CARGO_BIN_EXE_curvlab"))
            .args(["report", "--seed", "42", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(&out)
            .status()
            .map_err(|e| e.to_string())?;
        if !status.success() {
            return Err(format!("report exited with {status}"));
        }
        outputs.push(std::fs::read(&out).map_err(|e| e.to_string())?);
    }
    check(
        outputs[0] == outputs[1],
        format!("two report runs, {} bytes each, identical: {}", outputs[0].len(), outputs[0] == outputs[1]),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("geometry oracles", geometry_oracles),
        ("comparison sandwich", comparison_sandwich),
        ("volume growth", volume_growth_lemma),
        ("nested integral oracle", nested_integral_oracle),
        ("bubble reproduction", bubble_reproduction),
        ("average bound", average_bound),
        ("verdict table", verdict_table),
        ("logic chain", logic_chain),
        ("completeness length", completeness_length),
        ("AD correctness", ad_correctness),
        ("determinism", determinism),
    ];
    let mut bad = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let id = i + 1;
        let expected = EXPECTED_FAILURES.iter().find(|(n, _)| *n == id);
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        let (verdict, detail) = match (&outcome, expected) {
            (Ok(d), None) => ("pass", d.clone()),
            (Err(d), None) => {
                bad += 1;
                ("FAIL", d.clone())
            }
            (Err(d), Some((_, why))) => ("fail (expected)", format!("{d}; {why}")),
            (Ok(d), Some(_)) => {
                bad += 1;
                ("FAIL (unexpected pass)", d.clone())
            }
        };
        println!("criterion {id:>2} {name}: {verdict} [{secs:.2}s] {detail}");
    }
    if bad == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{bad} criteria failed");
        ExitCode::FAILURE
    }
}
