use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{CaseSpec, ToleranceTable};
use crate::cheeger::DEFAULT_SWEEP;
use crate::error::{Error, Result};
use crate::norms::MinkowskiNorm;
use crate::pde::DEFAULT_TOL;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Eigen,
    Torsion,
    Cheeger,
    Verify,
    Sweep,
}

/// Slab sweep over `Ω_{a,k}` for the listed `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub a: f64,
    pub k: Vec<f64>,
    pub norm: MinkowskiNorm,
    pub p: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

fn default_tol() -> f64 {
    DEFAULT_TOL
}

fn default_out() -> PathBuf {
    PathBuf::from("aniso-plap-out")
}

fn default_cheeger_sweep() -> usize {
    DEFAULT_SWEEP
}

/// Everything one CLI invocation does. Written as TOML by `--dump-config`
/// and read back by `verify`; JSON is accepted too.
///
/// ```toml
/// command = "verify"
/// out = "report"
/// jobs = 4
/// strict = false
///
/// [tolerances.default]
/// rel = 1e-6
/// grid = 0.0
///
/// [tolerances.overrides.hersch]
/// rel = 1e-6
/// grid = 0.05
///
/// [[cases]]
/// domain = "rect:1,1"
/// norm = "lq:2"
/// p = 2.0
/// h = 0.02
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jobs: Option<usize>,
    #[serde(default)]
    pub strict: bool,
    /// Radii in the coarse sweep of the `cheeger` command.
    #[serde(default = "default_cheeger_sweep")]
    pub cheeger_sweep: usize,
    #[serde(default)]
    pub tolerances: ToleranceTable,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub cases: Vec<CaseSpec>,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            out: default_out(),
            jobs: None,
            strict: false,
            cheeger_sweep: DEFAULT_SWEEP,
            tolerances: ToleranceTable::default(),
            sweep: None,
            cases: Vec::new(),
        }
    }

    /// Parses TOML, or JSON when the text starts with `{`.
    pub fn parse(text: &str) -> Result<Self> {
        if text.trim_start().starts_with('{') {
            Ok(serde_json::from_str(text)?)
        } else {
            toml::from_str(text).map_err(|e| Error::parse("run config", "TOML", e.to_string()))
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::InvalidArgument(format!("cannot write config: {e}")))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{default_catalog, InequalityId, Tolerance};

    fn sample() -> RunConfig {
        let mut c = RunConfig::new(Command::Verify);
        c.jobs = Some(3);
        c.cases = default_catalog();
        c.cases[0].h = Some(0.015625);
        c.cases[1].id = Some("named".into());
        c.tolerances.overrides.insert(InequalityId::Hersch, Tolerance { rel: 1e-7, grid: 0.25 });
        c.sweep = Some(SweepConfig {
            a: 1.0,
            k: vec![1.0, 2.0, 4.0],
            norm: "ellipse:4,0,1".parse().unwrap(),
            p: 1.5,
            h: None,
            tol: 1e-9,
        });
        c
    }

    #[test]
    fn toml_round_trip() {
        let c = sample();
        let text = c.to_toml().unwrap();
        assert_eq!(RunConfig::parse(&text).unwrap(), c, "{text}");
    }

    #[test]
    fn json_round_trip() {
        let c = sample();
        assert_eq!(RunConfig::parse(&c.to_json().unwrap()).unwrap(), c);
    }

    #[test]
    fn defaults_fill_in() {
        let c = RunConfig::parse("command = \"verify\"\n[[cases]]\ndomain = \"rect:1,4\"\nnorm = \"lq:4\"\np = 3\n").unwrap();
        assert_eq!(c.cases.len(), 1);
        assert_eq!(c.cases[0].tol, DEFAULT_TOL);
        assert_eq!(c.tolerances, ToleranceTable::default());
        assert_eq!(c.cheeger_sweep, DEFAULT_SWEEP);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_specs() {
        assert!(RunConfig::parse("command = \"verify\"\nbogus = 1\n").is_err());
        assert!(RunConfig::parse("command = \"verify\"\n[[cases]]\ndomain = \"rect:1\"\nnorm = \"lq:2\"\np = 2\n").is_err());
        assert!(RunConfig::parse("command = \"verify\"\n[[cases]]\ndomain = \"rect:1,1\"\nnorm = \"lq:0.5\"\np = 2\n").is_err());
    }
}
