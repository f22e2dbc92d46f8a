//! INI-style run configuration.
//!
//! ```ini
//! [manifold]
//! n = 3
//! preset = hyperbolic   ; or euclidean, or give h = "expr" instead
//! c = 1.0
//!
//! [curvature]
//! K = "1 + r"
//! ```

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use curvlab::criteria::{CriteriaPolicy, GrowthPolicy};
use curvlab::manifold::ModelManifold;
use curvlab::quadrature::QuadPolicy;
use curvlab::radial_ode::SolvePolicy;
use curvlab::{Expr, Manifold};
use ini::{Ini, ParseOption};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{key}: {message}")]
    Validation { key: String, message: String },
}

impl ConfigError {
    fn invalid(key: &str, message: impl Into<String>) -> Self {
        ConfigError::Validation {
            key: key.to_string(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum WarpSpec {
    Euclidean,
    Hyperbolic { c: f64 },
    Expr { h: String },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ManifoldConfig {
    pub n: usize,
    pub warp: WarpSpec,
    pub k_override: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvatureConfig {
    #[serde(rename = "K")]
    pub k: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolicyConfig {
    /// Relative tolerance of proper integrals.
    pub rel_tol: f64,
    /// Tolerance of the improper-integral and limit classifiers.
    pub classify_tol: f64,
    pub max_doublings: usize,
    /// Scan horizon for sign conditions and curvature checks.
    pub r_max: f64,
    pub n_grid: usize,
    pub ode_tol: f64,
    pub u0: f64,
    /// Radius the ODE is integrated to.
    pub solve_r_max: f64,
    /// Exponent of the volume growth check, in `[0, 1)`.
    pub lemma_delta: f64,
    /// Exponent of the pointwise growth criterion, positive.
    pub corollary_delta: f64,
    /// Slack allowed in the average bound check.
    pub bound_slack: f64,
    pub geometry_points: usize,
    pub geometry_r_max: f64,
    pub mc_samples: usize,
    pub seed: u64,
}

impl Default for PolicyConfig {
    fn default() -> Self {
        PolicyConfig {
            rel_tol: 1e-9,
            classify_tol: 1e-6,
            max_doublings: 20,
            r_max: 100.0,
            n_grid: 64,
            ode_tol: 1e-10,
            u0: 1.0,
            solve_r_max: 10.0,
            lemma_delta: 0.5,
            corollary_delta: 0.5,
            bound_slack: 1e-6,
            geometry_points: 101,
            geometry_r_max: 10.0,
            mc_samples: 1000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputConfig {
    pub format: Format,
    pub path: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Config {
    pub manifold: ManifoldConfig,
    pub curvature: CurvatureConfig,
    pub policy: PolicyConfig,
    pub output: OutputConfig,
}

const KEYS: &[(&str, &[&str])] = &[
    ("manifold", &["n", "preset", "c", "h", "k_override"]),
    ("curvature", &["K"]),
    (
        "policy",
        &[
            "rel_tol",
            "classify_tol",
            "max_doublings",
            "r_max",
            "n_grid",
            "ode_tol",
            "u0",
            "solve_r_max",
            "lemma_delta",
            "corollary_delta",
            "bound_slack",
            "geometry_points",
            "geometry_r_max",
            "mc_samples",
            "seed",
        ],
    ),
    ("output", &["format", "path"]),
];

/// Flat `section.key -> value` view with duplicate and unknown-key checks.
struct Table(BTreeMap<String, String>);

impl Table {
    fn from_ini(ini: &Ini) -> Result<Self, ConfigError> {
        let mut map = BTreeMap::new();
        for (section, props) in ini.iter() {
            let Some(section) = section else {
                if let Some((key, _)) = props.iter().next() {
                    return Err(ConfigError::invalid(key, "keys must be inside a section"));
                }
                continue;
            };
            let Some((_, allowed)) = KEYS.iter().find(|(s, _)| *s == section) else {
                return Err(ConfigError::invalid(section, "unknown section"));
            };
            for (key, value) in props.iter() {
                let path = format!("{section}.{key}");
                if !allowed.contains(&key) {
                    return Err(ConfigError::invalid(&path, "unknown key"));
                }
                if map.insert(path.clone(), value.trim().to_string()).is_some() {
                    return Err(ConfigError::invalid(&path, "given more than once"));
                }
            }
        }
        Ok(Table(map))
    }

    fn text(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    fn parsed<V: FromStr>(&self, key: &str) -> Result<Option<V>, ConfigError>
    where
        V::Err: std::fmt::Display,
    {
        self.text(key)
            .map(|s| {
                s.parse::<V>()
                    .map_err(|e| ConfigError::invalid(key, format!("cannot parse {s:?}: {e}")))
            })
            .transpose()
    }

    fn or<V: FromStr>(&self, key: &str, default: V) -> Result<V, ConfigError>
    where
        V::Err: std::fmt::Display,
    {
        Ok(self.parsed(key)?.unwrap_or(default))
    }
}

fn positive(key: &str, v: f64) -> Result<f64, ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(ConfigError::invalid(key, format!("must be positive and finite, got {v}")))
    }
}

fn at_least(key: &str, v: usize, min: usize) -> Result<usize, ConfigError> {
    if v >= min {
        Ok(v)
    } else {
        Err(ConfigError::invalid(key, format!("must be at least {min}, got {v}")))
    }
}

fn expression(key: &str, text: &str) -> Result<Expr, ConfigError> {
    text.parse::<Expr>()
        .map_err(|e| ConfigError::invalid(key, format!("bad expression {text:?}: {e}")))
}

impl Config {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        text.parse()
    }

    /// The manifold described by the `[manifold]` section.
    pub fn build_manifold(&self) -> Result<Manifold, curvlab::Error> {
        let m = &self.manifold;
        let base = match &m.warp {
            WarpSpec::Euclidean => ModelManifold::euclidean(m.n)?,
            WarpSpec::Hyperbolic { c } => ModelManifold::hyperbolic(m.n, *c)?,
            WarpSpec::Expr { h } => ModelManifold::from_expr(m.n, expression_unchecked(h))?,
        };
        Ok(match &m.k_override {
            Some(k) => base.with_k_override(expression_unchecked(k)),
            None => base,
        })
    }

    pub fn curvature(&self) -> Expr {
        expression_unchecked(&self.curvature.k)
    }

    pub fn quad_policy(&self) -> QuadPolicy<f64> {
        QuadPolicy::with_rel_tol(self.policy.rel_tol)
    }

    pub fn criteria_policy(&self) -> CriteriaPolicy<f64> {
        let p = &self.policy;
        let mut out = CriteriaPolicy::default();
        out.quad = self.quad_policy();
        out.scan.r_max = p.r_max;
        out.scan.n_grid = p.n_grid;
        out.classify.tol = p.classify_tol;
        out.classify.max_doublings = p.max_doublings;
        out.classify.quad = self.quad_policy();
        out.limit.tol = p.classify_tol;
        out
    }

    pub fn growth_policy(&self) -> GrowthPolicy<f64> {
        GrowthPolicy::default()
    }

    pub fn solve_policy(&self) -> SolvePolicy<f64> {
        SolvePolicy::with_tol(self.policy.ode_tol)
    }
}

/// Expressions are validated when the config is parsed.
fn expression_unchecked(text: &str) -> Expr {
    text.parse().expect("expression validated at load time")
}

/// Line-level syntax check. The INI reader folds malformed lines into the
/// next key, so they are caught here with their line number.
fn check_lines(text: &str) -> Result<(), ConfigError> {
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let err = |message: &str| ConfigError::Parse {
            line: i + 1,
            message: message.to_string(),
        };
        if line.is_empty() || line.starts_with(';') || line.starts_with('#') {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            match rest.find(']') {
                Some(0) => return Err(err("empty section name")),
                Some(_) => continue,
                None => return Err(err("section header is missing `]`")),
            }
        }
        match line.find('=') {
            Some(0) => return Err(err("missing key before `=`")),
            Some(_) => {}
            None => return Err(err("expected `key = value`")),
        }
    }
    Ok(())
}

impl FromStr for Config {
    type Err = ConfigError;

    fn from_str(text: &str) -> Result<Self, ConfigError> {
        check_lines(text)?;
        let opt = ParseOption {
            enabled_quote: true,
            enabled_escape: false,
            ..ParseOption::default()
        };
        let ini = Ini::load_from_str_opt(text, opt).map_err(|e| ConfigError::Parse {
            line: e.line,
            message: e.msg.to_string(),
        })?;
        let t = Table::from_ini(&ini)?;

        let n: usize = t
            .parsed("manifold.n")?
            .ok_or_else(|| ConfigError::invalid("manifold.n", "required"))?;
        if n < 3 {
            return Err(ConfigError::invalid(
                "manifold.n",
                format!("dimension must be at least 3, got {n}"),
            ));
        }
        let warp = match (t.text("manifold.preset"), t.text("manifold.h")) {
            (Some(_), Some(_)) => {
                return Err(ConfigError::invalid(
                    "manifold.h",
                    "give either preset or h, not both",
                ))
            }
            (None, None) => {
                return Err(ConfigError::invalid(
                    "manifold.preset",
                    "one of preset or h is required",
                ))
            }
            (Some("euclidean"), None) => {
                if t.text("manifold.c").is_some() {
                    return Err(ConfigError::invalid("manifold.c", "only used by the hyperbolic preset"));
                }
                WarpSpec::Euclidean
            }
            (Some("hyperbolic"), None) => WarpSpec::Hyperbolic {
                c: positive("manifold.c", t.or("manifold.c", 1.0)?)?,
            },
            (Some(other), None) => {
                return Err(ConfigError::invalid(
                    "manifold.preset",
                    format!("unknown preset {other:?}; expected euclidean or hyperbolic"),
                ))
            }
            (None, Some(h)) => {
                expression("manifold.h", h)?;
                if t.text("manifold.c").is_some() {
                    return Err(ConfigError::invalid("manifold.c", "only used by the hyperbolic preset"));
                }
                WarpSpec::Expr { h: h.to_string() }
            }
        };
        let k_override = t.text("manifold.k_override").map(str::to_string);
        if let Some(k) = &k_override {
            expression("manifold.k_override", k)?;
        }
        let k = t
            .text("curvature.K")
            .ok_or_else(|| ConfigError::invalid("curvature.K", "required"))?
            .to_string();
        expression("curvature.K", &k)?;

        let d = PolicyConfig::default();
        let policy = PolicyConfig {
            rel_tol: positive("policy.rel_tol", t.or("policy.rel_tol", d.rel_tol)?)?,
            classify_tol: positive(
                "policy.classify_tol",
                t.or("policy.classify_tol", d.classify_tol)?,
            )?,
            max_doublings: at_least(
                "policy.max_doublings",
                t.or("policy.max_doublings", d.max_doublings)?,
                4,
            )?,
            r_max: positive("policy.r_max", t.or("policy.r_max", d.r_max)?)?,
            n_grid: at_least("policy.n_grid", t.or("policy.n_grid", d.n_grid)?, 8)?,
            ode_tol: positive("policy.ode_tol", t.or("policy.ode_tol", d.ode_tol)?)?,
            u0: positive("policy.u0", t.or("policy.u0", d.u0)?)?,
            solve_r_max: positive("policy.solve_r_max", t.or("policy.solve_r_max", d.solve_r_max)?)?,
            lemma_delta: t.or("policy.lemma_delta", d.lemma_delta)?,
            corollary_delta: positive(
                "policy.corollary_delta",
                t.or("policy.corollary_delta", d.corollary_delta)?,
            )?,
            bound_slack: t.or("policy.bound_slack", d.bound_slack)?,
            geometry_points: at_least(
                "policy.geometry_points",
                t.or("policy.geometry_points", d.geometry_points)?,
                2,
            )?,
            geometry_r_max: positive(
                "policy.geometry_r_max",
                t.or("policy.geometry_r_max", d.geometry_r_max)?,
            )?,
            mc_samples: at_least("policy.mc_samples", t.or("policy.mc_samples", d.mc_samples)?, 100)?,
            seed: t.or("policy.seed", d.seed)?,
        };
        if !(0.0..1.0).contains(&policy.lemma_delta) {
            return Err(ConfigError::invalid(
                "policy.lemma_delta",
                format!("must lie in [0, 1), got {}", policy.lemma_delta),
            ));
        }
        if !(policy.bound_slack >= 0.0) {
            return Err(ConfigError::invalid("policy.bound_slack", "must be nonnegative"));
        }
        let format = match t.text("output.format") {
            None | Some("json") => Format::Json,
            Some("csv") => Format::Csv,
            Some(other) => {
                return Err(ConfigError::invalid(
                    "output.format",
                    format!("expected csv or json, got {other:?}"),
                ))
            }
        };
        Ok(Config {
            manifold: ManifoldConfig { n, warp, k_override },
            curvature: CurvatureConfig { k },
            policy,
            output: OutputConfig {
                format,
                path: t.text("output.path").map(str::to_string),
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn key_of(err: ConfigError) -> String {
        match err {
            ConfigError::Validation { key, .. } => key,
            other => panic!("expected a validation error, got {other}"),
        }
    }

    #[test]
    fn hyperbolic_preset() {
        let c: Config = "[manifold]\nn = 3\npreset = hyperbolic\nc = 1.0\n[curvature]\nK = \"1\"\n"
            .parse()
            .unwrap();
        assert_eq!(c.manifold.warp, WarpSpec::Hyperbolic { c: 1.0 });
        assert_eq!(c.policy, PolicyConfig::default());
        assert_eq!(c.output.format, Format::Json);
    }

    #[test]
    fn missing_curvature_names_the_key() {
        let err = "[manifold]\nn = 3\nh = \"sinh(r)\"\n".parse::<Config>().unwrap_err();
        assert_eq!(key_of(err), "curvature.K");
    }

    #[test]
    fn dimension_two_is_rejected() {
        let err = "[manifold]\nn = 2\npreset = euclidean\n[curvature]\nK = \"1\"\n"
            .parse::<Config>()
            .unwrap_err();
        assert_eq!(key_of(err), "manifold.n");
    }

    #[test]
    fn preset_and_h_are_exclusive() {
        let text = "[manifold]\nn = 3\npreset = euclidean\nh = \"r\"\n[curvature]\nK = \"1\"\n";
        assert_eq!(key_of(text.parse::<Config>().unwrap_err()), "manifold.h");
    }

    #[test]
    fn bad_values_name_their_key() {
        let base = "[manifold]\nn = 3\npreset = euclidean\n[curvature]\nK = \"1\"\n";
        for (extra, key) in [
            ("[policy]\nrel_tol = -1\n", "policy.rel_tol"),
            ("[policy]\nlemma_delta = 1\n", "policy.lemma_delta"),
            ("[policy]\nwibble = 1\n", "policy.wibble"),
            ("[output]\nformat = xml\n", "output.format"),
        ] {
            let err = format!("{base}{extra}").parse::<Config>().unwrap_err();
            assert_eq!(key_of(err), key);
        }
        let err = "[manifold]\nn = 3\npreset = euclidean\n[curvature]\nK = \"1 +\"\n"
            .parse::<Config>()
            .unwrap_err();
        assert_eq!(key_of(err), "curvature.K");
    }

    #[test]
    fn syntax_errors_carry_a_line() {
        let err = "[manifold]\nn = 3\npreset euclidean\n[curvature]\nK = \"1\"\n"
            .parse::<Config>()
            .unwrap_err();
        assert!(matches!(err, ConfigError::Parse { line: 3, .. }), "{err:?}");
        let err = "; comment\n[manifold\nn = 3\n".parse::<Config>().unwrap_err();
        assert!(matches!(err, ConfigError::Parse { line: 2, .. }), "{err:?}");
    }

    #[test]
    fn policy_overrides_reach_the_core() {
        let c: Config = "[manifold]\nn = 4\nh = \"sinh(r)\"\n[curvature]\nK = \"r^2\"\n\
                         [policy]\nr_max = 50\nrel_tol = 1e-8\n"
            .parse()
            .unwrap();
        let p = c.criteria_policy();
        assert_eq!(p.scan.r_max, 50.0);
        assert_eq!(p.quad.rel_tol, 1e-8);
        assert_eq!(c.build_manifold().unwrap().dim(), 4);
    }
}
