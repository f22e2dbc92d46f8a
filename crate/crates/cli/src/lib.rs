//! Configuration, subcommands and report emission for the `curvlab` tool.

pub mod config;
pub mod output;
pub mod run;

pub use config::{Config, ConfigError, Format};
pub use run::{run, Command, Outcome, RunError};

/// Loads `config`, runs `command` and writes the result. Flags given on the
/// command line take precedence over the `[output]` and `[policy]` sections.
pub fn execute(
    command: Command,
    config: &std::path::Path,
    out: Option<&str>,
    format: Option<Format>,
    seed: Option<u64>,
) -> Result<(), RunError> {
    let mut cfg = Config::load(config)?;
    if let Some(seed) = seed {
        cfg.policy.seed = seed;
    }
    let format = format.unwrap_or(cfg.output.format);
    let path = out.map(str::to_string).or_else(|| cfg.output.path.clone());
    let outcome = run(command, &cfg, cfg.policy.seed)?;
    let text = output::render(&outcome, format)?;
    output::emit(&text, path.as_deref())
}
