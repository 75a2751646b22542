//! Experiment configuration: file schema, command-line overrides and grid expansion.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use entropic::numkernel::C64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    TwoTime,
    Ancilla,
    Qpsc,
    TransferSpectrum,
    ResonanceCurve,
    Ness,
    ClassicalPref,
    FluctuationCheck,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::TwoTime => "two-time",
            Experiment::Ancilla => "ancilla",
            Experiment::Qpsc => "qpsc",
            Experiment::TransferSpectrum => "transfer-spectrum",
            Experiment::ResonanceCurve => "resonance-curve",
            Experiment::Ness => "ness",
            Experiment::ClassicalPref => "classical-pref",
            Experiment::FluctuationCheck => "fluctuation-check",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Axis {
    Real,
    Imaginary,
    /// Imaginary parts from the grid, real parts 0, 1/4, 1/2, 3/4, 1.
    Strip,
}

/// Either `start`/`stop`/`count` or an explicit `values` list.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis: Option<Axis>,
}

impl GridSpec {
    pub fn values(values: &[f64]) -> Self {
        GridSpec {
            values: Some(values.to_vec()),
            ..Default::default()
        }
    }

    pub fn range(start: f64, stop: f64, count: usize) -> Self {
        GridSpec {
            start: Some(start),
            stop: Some(stop),
            count: Some(count),
            ..Default::default()
        }
    }

    /// `start:stop:count`, a comma list, or a single number.
    pub fn parse(text: &str, key: &str) -> Result<Self, CliError> {
        let bad = |msg: String| CliError::Config {
            path: key.to_string(),
            message: msg,
        };
        let num = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| bad(format!("`{s}` is not a number")))
        };
        if text.contains(':') {
            let parts: Vec<&str> = text.split(':').collect();
            if parts.len() != 3 {
                return Err(bad(format!("expected start:stop:count, got `{text}`")));
            }
            let count = parts[2]
                .trim()
                .parse::<usize>()
                .map_err(|_| bad(format!("`{}` is not a count", parts[2])))?;
            return Ok(GridSpec::range(num(parts[0])?, num(parts[1])?, count));
        }
        if text.trim().is_empty() {
            return Ok(GridSpec::values(&[]));
        }
        let values = text.split(',').map(num).collect::<Result<Vec<_>, _>>()?;
        Ok(GridSpec::values(&values))
    }

    pub fn expand(&self, key: &str) -> Result<Vec<f64>, CliError> {
        let bad = |field: &str, msg: &str| CliError::Config {
            path: format!("{key}.{field}"),
            message: msg.to_string(),
        };
        let out = match (&self.values, self.start, self.stop, self.count) {
            (Some(v), None, None, None) => v.clone(),
            (None, Some(a), Some(b), Some(n)) => match n {
                0 => vec![],
                1 => vec![a],
                _ => (0..n)
                    .map(|k| a + (b - a) * k as f64 / (n - 1) as f64)
                    .collect(),
            },
            (Some(_), _, _, _) => {
                return Err(bad("values", "give either values or start/stop/count"))
            }
            _ => return Err(bad("count", "start, stop and count are all required")),
        };
        if out.is_empty() {
            let field = if self.values.is_some() { "values" } else { "count" };
            return Err(bad(field, "grid is empty"));
        }
        if out.iter().any(|v| !v.is_finite()) {
            return Err(bad("values", "grid contains a non-finite value"));
        }
        Ok(out)
    }

    pub fn expand_complex(&self, key: &str, default_axis: Axis) -> Result<Vec<C64>, CliError> {
        let xs = self.expand(key)?;
        Ok(match self.axis.unwrap_or(default_axis) {
            Axis::Real => xs.iter().map(|&x| C64::new(x, 0.0)).collect(),
            Axis::Imaginary => xs.iter().map(|&x| C64::new(0.0, x)).collect(),
            Axis::Strip => [0.0, 0.25, 0.5, 0.75, 1.0]
                .iter()
                .flat_map(|&re| xs.iter().map(move |&im| C64::new(re, im)))
                .collect(),
        })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<Experiment>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<GridSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<GridSpec>,
    #[serde(default, rename = "T", skip_serializing_if = "Option::is_none")]
    pub big_t: Option<GridSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<GridSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sandwich_alpha: Option<GridSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub tolerances: BTreeMap<String, f64>,
}

/// Parses TOML, or JSON when the extension is `.json`, reporting the path of
/// the offending key on failure.
pub fn load_structured<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let is_json = path.extension().is_some_and(|e| e == "json");
    if is_json {
        let mut de = serde_json::Deserializer::from_str(&text);
        serde_path_to_error::deserialize(&mut de).map_err(|e| CliError::Config {
            path: format!("{}: {}", path.display(), e.path()),
            message: e.inner().to_string(),
        })
    } else {
        let de = toml::Deserializer::new(&text);
        serde_path_to_error::deserialize(de).map_err(|e| CliError::Config {
            path: format!("{}: {}", path.display(), e.path()),
            message: e.inner().message().to_string(),
        })
    }
}
