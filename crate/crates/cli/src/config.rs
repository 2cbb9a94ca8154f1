//! Run configuration: TOML in, fully materialised `RunSpec` out.

use std::path::{Path, PathBuf};

use enaqt_core::{EnsembleSpec, NoiseModel};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Analysis {
    DoublePeakBars,
    GapHistogram,
    InjExtHistogram,
    RatioHistogram,
    ReorgFraction,
    EfficiencyComparison,
}

impl Analysis {
    pub const ALL: [Analysis; 6] = [
        Analysis::DoublePeakBars,
        Analysis::GapHistogram,
        Analysis::InjExtHistogram,
        Analysis::RatioHistogram,
        Analysis::ReorgFraction,
        Analysis::EfficiencyComparison,
    ];

    fn computable(self, environments: &[NoiseModel]) -> bool {
        match self {
            Analysis::ReorgFraction => environments.iter().any(|e| matches!(e, NoiseModel::Redfield { .. })),
            _ => true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    pub directory: PathBuf,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            directory: PathBuf::from("enaqt-out"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FormatSpec {
    /// Write one CSV per (network, environment) curve.
    pub curves: bool,
    /// Also write each curve as JSON.
    pub curve_json: bool,
    /// Write the sampled networks as JSON.
    pub networks: bool,
}

impl Default for FormatSpec {
    fn default() -> Self {
        Self {
            curves: true,
            curve_json: false,
            networks: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    pub ensemble: EnsembleSpec,
    pub outputs: OutputSpec,
    pub analyses: Vec<Analysis>,
    pub format: FormatSpec,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRunSpec {
    #[serde(default)]
    ensemble: EnsembleSpec,
    #[serde(default)]
    outputs: OutputSpec,
    analyses: Option<Vec<Analysis>>,
    #[serde(default)]
    format: FormatSpec,
}

impl Default for RunSpec {
    fn default() -> Self {
        materialise(RawRunSpec::default())
    }
}

fn materialise(raw: RawRunSpec) -> RunSpec {
    let analyses = match raw.analyses {
        Some(mut list) => {
            list.sort();
            list.dedup();
            list
        }
        None => Analysis::ALL
            .into_iter()
            .filter(|a| a.computable(&raw.ensemble.environments))
            .collect(),
    };
    RunSpec {
        ensemble: raw.ensemble,
        outputs: raw.outputs,
        analyses,
        format: raw.format,
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{origin}:{line}:{column}: {message}")]
    Parse {
        origin: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{origin}:{}{message}", line.map(|l| format!("{l}: ")).unwrap_or_else(|| " ".into()))]
    Invalid {
        origin: String,
        line: Option<usize>,
        message: String,
    },
}

impl ConfigError {
    pub fn line(&self) -> Option<usize> {
        match self {
            ConfigError::Io { .. } => None,
            ConfigError::Parse { line, .. } => Some(*line),
            ConfigError::Invalid { line, .. } => *line,
        }
    }
}

fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

/// First line assigning `key`, 1-based.
fn key_line(text: &str, key: &str) -> Option<usize> {
    text.lines()
        .position(|l| {
            l.trim_start()
                .strip_prefix(key)
                .is_some_and(|rest| rest.trim_start().starts_with('='))
        })
        .map(|i| i + 1)
}

pub fn parse_config(path: &Path) -> Result<RunSpec, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_config_str(&text, &path.display().to_string())
}

pub fn parse_config_str(text: &str, origin: &str) -> Result<RunSpec, ConfigError> {
    let raw: RawRunSpec = toml::from_str(text).map_err(|e| {
        let (line, column) = e.span().map_or((1, 1), |s| line_column(text, s.start));
        ConfigError::Parse {
            origin: origin.into(),
            line,
            column,
            message: e.message().trim().to_string(),
        }
    })?;
    let spec = materialise(raw);
    validate(&spec, text, origin)?;
    Ok(spec)
}

fn validate(spec: &RunSpec, text: &str, origin: &str) -> Result<(), ConfigError> {
    let invalid = |line, message: String| ConfigError::Invalid {
        origin: origin.into(),
        line,
        message,
    };
    if let Err(e) = spec.ensemble.validate() {
        let line = match &e {
            enaqt_core::Error::InvalidParameter { name, .. } => key_line(text, name),
            _ => None,
        };
        let line = line
            .or_else(|| key_line(text, "environments"))
            .or_else(|| text.find("environments").map(|o| line_column(text, o).0));
        return Err(invalid(line, e.to_string()));
    }
    for a in &spec.analyses {
        if !a.computable(&spec.ensemble.environments) {
            return Err(invalid(
                key_line(text, "analyses"),
                format!("analysis {a:?} needs at least one Redfield environment"),
            ));
        }
    }
    Ok(())
}

/// Canonical TOML form; parsing it back yields the same spec.
pub fn to_toml(spec: &RunSpec) -> String {
    toml::to_string(spec).expect("run spec serialises to TOML")
}
