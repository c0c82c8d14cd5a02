//! What a run reads, computes and writes.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use owc_core::scene::builtin_scenario;
use owc_core::{ScenarioConfig, TraceParams};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScenarioSource {
    Builtin(String),
    Config(PathBuf),
}

impl ScenarioSource {
    pub fn load(&self) -> Result<ScenarioConfig> {
        match self {
            ScenarioSource::Builtin(name) => Ok(builtin_scenario(name)?),
            ScenarioSource::Config(path) => Ok(ScenarioConfig::load(path)?),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SolverChoice {
    Exhaustive,
    Bnb,
    /// Write the MILP in LP format and stop.
    ExportOnly,
}

#[derive(Debug, Clone)]
pub struct RunManifest {
    pub source: ScenarioSource,
    pub trace: TraceParams,
    pub solver: SolverChoice,
    pub out: PathBuf,
    /// Read an up-to-date channel cache instead of tracing.
    pub use_cache: bool,
}

pub const CACHE_FILE: &str = "channel.json";
pub const RESULT_FILE: &str = "result.json";
pub const LP_FILE: &str = "model.lp";

impl RunManifest {
    /// Rejects an output directory that is, or contains, the scenario file.
    pub fn validate(&self) -> Result<()> {
        self.trace.validate()?;
        if let ScenarioSource::Config(cfg) = &self.source {
            let cfg = cfg
                .canonicalize()
                .with_context(|| format!("scenario config {}", cfg.display()))?;
            let out = absolute(&self.out)?;
            if cfg == out || cfg.parent() == Some(out.as_path()) {
                bail!(
                    "output directory {} must differ from the directory holding the scenario config",
                    self.out.display()
                );
            }
        }
        Ok(())
    }

    pub fn cache_path(&self) -> PathBuf {
        self.out.join(CACHE_FILE)
    }
}

fn absolute(p: &Path) -> Result<PathBuf> {
    if p.exists() {
        return Ok(p.canonicalize()?);
    }
    Ok(std::env::current_dir()?.join(p))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn manifest(source: ScenarioSource, out: PathBuf) -> RunManifest {
        RunManifest {
            source,
            trace: TraceParams::default(),
            solver: SolverChoice::Bnb,
            out,
            use_cache: true,
        }
    }

    #[test]
    fn out_next_to_config_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("room.toml");
        std::fs::write(&cfg, "").unwrap();
        let m = manifest(ScenarioSource::Config(cfg.clone()), dir.path().to_owned());
        assert!(m.validate().is_err());
        let m = manifest(ScenarioSource::Config(cfg), dir.path().join("out"));
        assert!(m.validate().is_ok());
    }

    #[test]
    fn builtin_sources_accept_any_out() {
        let m = manifest(ScenarioSource::Builtin("office".into()), ".".into());
        assert!(m.validate().is_ok());
        assert!(ScenarioSource::Builtin("attic".into()).load().is_err());
    }
}
