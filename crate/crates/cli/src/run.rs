//! Subcommand execution. Every command returns a serialisable document;
//! writing it out is left to [`crate::output`].

use curvlab::criteria::{
    finite_length_criterion, integral_criterion, limit_criterion, pointwise_growth_criterion,
    volume_growth,
};
use curvlab::manifold::{sphere_average, Radial, RadialValue};
use curvlab::radial_ode::{
    conformal_length, inf_estimate, residual_at, solve_radial, verify_average_bound,
    AverageBoundReport, ConformalExponents, ConformalLength, InfEstimate, SolveStats, SolveStatus,
};
use curvlab::{Expr, GrowthReport, Manifold, Solution, Verdict};
use serde::Serialize;
use thiserror::Error;

use crate::config::{Config, ConfigError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Geometry,
    Check,
    Solve,
    Verify,
    Report,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Geometry => "geometry",
            Command::Check => "check",
            Command::Solve => "solve",
            Command::Verify => "verify",
            Command::Report => "report",
        }
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("config: {0}")]
    Config(#[from] ConfigError),
    #[error("evaluation: {0}")]
    Eval(#[from] curvlab::Error),
    #[error("{0}")]
    Usage(String),
    #[error("internal: {0}")]
    Internal(String),
}

impl RunError {
    /// 1 for input and evaluation problems, 2 for failures of the tool itself.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) | RunError::Eval(_) | RunError::Usage(_) => 1,
            RunError::Internal(_) => 2,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Meta {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub seed: u64,
    pub config: Config,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GeometryRow {
    pub r: f64,
    pub h: f64,
    #[serde(rename = "V")]
    pub v: f64,
    pub delta_r: f64,
    pub k: f64,
    pub vol_ball: f64,
}

/// Monte Carlo sphere average of `K`, which for radial `K` must equal `K(r)`.
#[derive(Debug, Clone, Serialize)]
pub struct SpotCheck {
    pub r: f64,
    pub mean: f64,
    pub std_error: f64,
    pub n_samples: usize,
    pub exact: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Checks {
    pub verdicts: Vec<Verdict>,
    pub volume_growth: GrowthReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveRow {
    pub r: f64,
    pub u: f64,
    pub u_prime: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveDoc {
    pub u0: f64,
    pub status: SolveStatus<f64>,
    pub stats: SolveStats<f64>,
    pub fingerprint: String,
    pub series: Vec<SolveRow>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyDoc {
    pub status: SolveStatus<f64>,
    pub average_bound: AverageBoundReport<f64>,
    pub conformal_length: ConformalLength<f64>,
    pub inf_estimate: InfEstimate<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportDoc {
    pub geometry: Vec<GeometryRow>,
    pub spot_check: SpotCheck,
    pub verdicts: Vec<Verdict>,
    pub volume_growth: GrowthReport,
    pub solve: SolveDoc,
    pub verify: VerifyDoc,
}

#[derive(Debug, Clone)]
pub enum Body {
    Geometry {
        series: Vec<GeometryRow>,
        spot_check: SpotCheck,
    },
    Check(Checks),
    Solve(SolveDoc),
    Verify {
        verify: VerifyDoc,
        solution: Solution,
    },
    Report(Box<ReportDoc>),
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub meta: Meta,
    pub body: Body,
}

/// Everything a command needs, built once from the config.
struct Setup<'a> {
    config: &'a Config,
    manifold: Manifold,
    k: Expr,
}

pub fn run(command: Command, config: &Config, seed: u64) -> Result<Outcome, RunError> {
    let setup = Setup {
        config,
        manifold: config.build_manifold()?,
        k: config.curvature(),
    };
    let warning = config.manifold.k_override.as_ref().map(|k| {
        format!(
            "background curvature overridden by k = {k}; verdicts no longer follow from h alone"
        )
    });
    let meta = Meta {
        tool: "curvlab",
        version: env!("CARGO_PKG_VERSION"),
        command: command.name(),
        seed,
        config: config.clone(),
        warning,
    };
    let body = match command {
        Command::Geometry => Body::Geometry {
            series: setup.geometry()?,
            spot_check: setup.spot_check(seed)?,
        },
        Command::Check => Body::Check(setup.checks()?),
        Command::Solve => Body::Solve(setup.solve_doc(&setup.solve()?)?),
        Command::Verify => {
            let solution = setup.solve()?;
            Body::Verify {
                verify: setup.verify(&solution)?,
                solution,
            }
        }
        Command::Report => Body::Report(Box::new(setup.report(seed)?)),
    };
    Ok(Outcome { meta, body })
}

impl Setup<'_> {
    fn geometry(&self) -> Result<Vec<GeometryRow>, RunError> {
        let p = &self.config.policy;
        let quad = self.config.quad_policy();
        let m = &self.manifold;
        (1..=p.geometry_points)
            .map(|i| {
                let r = p.geometry_r_max * i as f64 / p.geometry_points as f64;
                Ok(GeometryRow {
                    r,
                    h: m.warp_jet(r)?.value,
                    v: m.volume_sphere(r)?,
                    delta_r: m.laplacian_r(r)?,
                    k: m.scalar_curvature(r)?,
                    vol_ball: m.ball_volume_with(r, &quad)?,
                })
            })
            .collect()
    }

    fn spot_check(&self, seed: u64) -> Result<SpotCheck, RunError> {
        let p = &self.config.policy;
        let r = p.geometry_r_max / 2.0;
        let avg = sphere_average(&self.manifold, &Radial(&self.k), r, p.mc_samples, seed)?;
        Ok(SpotCheck {
            r,
            mean: avg.mean,
            std_error: avg.std_error,
            n_samples: avg.n_samples,
            exact: RadialValue::<f64>::value(&self.k, r)?,
        })
    }

    fn verdict(&self, index: usize) -> Result<Verdict, RunError> {
        let (m, k) = (&self.manifold, &self.k);
        let policy = self.config.criteria_policy();
        Ok(match index {
            0 => integral_criterion(m, k, &policy)?,
            1 => limit_criterion(m, k, &policy)?,
            2 => finite_length_criterion(m, k, &policy)?,
            _ => pointwise_growth_criterion(m, k, self.config.policy.corollary_delta, &policy)?,
        })
    }

    fn growth(&self) -> Result<GrowthReport, RunError> {
        let p = &self.config.policy;
        Ok(volume_growth(
            &self.manifold,
            p.lemma_delta,
            p.r_max,
            p.n_grid,
            &self.config.growth_policy(),
        )?)
    }

    fn checks(&self) -> Result<Checks, RunError> {
        // independent checks run concurrently; results are assembled in order
        std::thread::scope(|s| {
            let verdicts: Vec<_> = (0..4).map(|i| s.spawn(move || self.verdict(i))).collect();
            let growth = s.spawn(|| self.growth());
            let verdicts = verdicts
                .into_iter()
                .map(|h| joined(h.join()))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Checks {
                verdicts,
                volume_growth: joined(growth.join())?,
            })
        })
    }

    fn solve(&self) -> Result<Solution, RunError> {
        let p = &self.config.policy;
        Ok(solve_radial(
            &self.manifold,
            &self.k,
            p.u0,
            p.solve_r_max,
            &self.config.solve_policy(),
        )?)
    }

    fn solve_doc(&self, sol: &Solution) -> Result<SolveDoc, RunError> {
        let ex = ConformalExponents::new(self.manifold.dim())?;
        let series = (0..sol.grid.len())
            .map(|i| {
                let r = sol.grid[i];
                let residual = residual_at(
                    &self.manifold,
                    &self.k,
                    &ex,
                    r,
                    sol.u[i],
                    sol.u_prime[i],
                    sol.u_second[i],
                )?;
                Ok(SolveRow {
                    r,
                    u: sol.u[i],
                    u_prime: sol.u_prime[i],
                    residual,
                })
            })
            .collect::<Result<Vec<_>, RunError>>()?;
        Ok(SolveDoc {
            u0: sol.u0,
            status: sol.status.clone(),
            stats: sol.stats,
            fingerprint: sol.fingerprint.clone(),
            series,
        })
    }

    fn verify(&self, sol: &Solution) -> Result<VerifyDoc, RunError> {
        let p = &self.config.policy;
        let average_bound = verify_average_bound(
            &self.manifold,
            &self.k,
            sol,
            p.bound_slack,
            &self.config.quad_policy(),
        )?;
        let length = conformal_length(
            &self.manifold,
            sol,
            sol.grid[0],
            &self.config.criteria_policy().classify,
        )?;
        Ok(VerifyDoc {
            status: sol.status.clone(),
            average_bound,
            conformal_length: length,
            inf_estimate: inf_estimate(sol),
        })
    }

    fn report(&self, seed: u64) -> Result<ReportDoc, RunError> {
        std::thread::scope(|s| {
            let geometry = s.spawn(|| self.geometry());
            let checks = s.spawn(|| self.checks());
            let solved = s.spawn(|| -> Result<_, RunError> {
                let sol = self.solve()?;
                Ok((self.solve_doc(&sol)?, self.verify(&sol)?))
            });
            let spot_check = self.spot_check(seed)?;
            let geometry = joined(geometry.join())?;
            let checks = joined(checks.join())?;
            let (solve, verify) = joined(solved.join())?;
            Ok(ReportDoc {
                geometry,
                spot_check,
                verdicts: checks.verdicts,
                volume_growth: checks.volume_growth,
                solve,
                verify,
            })
        })
    }
}

fn joined<V>(res: std::thread::Result<Result<V, RunError>>) -> Result<V, RunError> {
    res.unwrap_or_else(|panic| {
        let msg = panic
            .downcast_ref::<&str>()
            .map(|s| s.to_string())
            .or_else(|| panic.downcast_ref::<String>().cloned())
            .unwrap_or_else(|| "worker thread panicked".into());
        Err(RunError::Internal(msg))
    })
}
