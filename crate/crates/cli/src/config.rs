//! Run configuration: a TOML file with `[params]` and `[quadrature]`
//! tables, overlaid by command-line flags.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use hn_hartree::{Params, QuadratureSpec};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Campaign {
    Group,
    Cayley,
    Constants,
    Spectral,
    Bubble,
    Pohozaev,
    Reduced,
    All,
}

impl Campaign {
    pub const ORDER: [Campaign; 7] = [
        Campaign::Group,
        Campaign::Cayley,
        Campaign::Constants,
        Campaign::Spectral,
        Campaign::Bubble,
        Campaign::Pohozaev,
        Campaign::Reduced,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Campaign::Group => "group",
            Campaign::Cayley => "cayley",
            Campaign::Constants => "constants",
            Campaign::Spectral => "spectral",
            Campaign::Bubble => "bubble",
            Campaign::Pohozaev => "pohozaev",
            Campaign::Reduced => "reduced",
            Campaign::All => "all",
        }
    }
}

impl fmt::Display for Campaign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("{field}: {message}")]
    Field { field: String, message: String },
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

fn field_err(field: &str, message: impl fmt::Display) -> ConfigError {
    ConfigError::Field { field: field.to_string(), message: message.to_string() }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub params: Params,
    pub quadrature: QuadratureSpec,
    pub campaigns: Vec<Campaign>,
    pub output_path: PathBuf,
    pub robin_csv: Option<PathBuf>,
}

/// Quadrature used when the file does not say otherwise. Coarser than the
/// library default so that `all` finishes in minutes at n = 1.
pub fn default_quadrature() -> QuadratureSpec {
    QuadratureSpec { radial_nodes: 32, angular_nodes: 24, ..QuadratureSpec::default() }
}

impl RunConfig {
    /// The selected campaigns with `all` expanded, deduplicated, in the
    /// fixed execution order.
    pub fn schedule(&self) -> Vec<Campaign> {
        let all = self.campaigns.contains(&Campaign::All);
        Campaign::ORDER.iter().copied().filter(|c| all || self.campaigns.contains(c)).collect()
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.campaigns.is_empty() {
            return Err(field_err("campaigns", "at least one campaign is required"));
        }
        self.quadrature.validate().map_err(|e| field_err("quadrature", e))?;
        if self.output_path.as_os_str().is_empty() {
            return Err(field_err("output_path", "empty path"));
        }
        Ok(())
    }

    /// Create the output directory and make sure a file can be written there.
    pub fn prepare_output(&self) -> Result<(), ConfigError> {
        let io = |source| ConfigError::Io { path: self.output_path.display().to_string(), source };
        fs::create_dir_all(&self.output_path).map_err(io)?;
        let probe = self.output_path.join(".hn-audit-probe");
        fs::write(&probe, b"").map_err(io)?;
        fs::remove_file(&probe).map_err(io)?;
        Ok(())
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    campaigns: Option<Vec<Campaign>>,
    output_path: Option<String>,
    robin_csv: Option<String>,
    params: Option<ParamsFile>,
    quadrature: Option<toml::Table>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamsFile {
    n: Option<usize>,
    mu: Option<f64>,
}

/// Flag values; every `Some` wins over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub campaigns: Vec<Campaign>,
    pub n: Option<usize>,
    pub mu: Option<f64>,
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub out: Option<PathBuf>,
    pub robin_csv: Option<PathBuf>,
}

pub fn load(path: Option<&Path>, flags: &Overrides) -> Result<RunConfig, ConfigError> {
    let (file, origin) = match path {
        Some(p) => {
            let text = fs::read_to_string(p)
                .map_err(|source| ConfigError::Io { path: p.display().to_string(), source })?;
            (parse_str(&text, &p.display().to_string())?, p.display().to_string())
        }
        None => (FileConfig::default(), "<flags>".to_string()),
    };
    build(file, flags, &origin)
}

/// Parse a configuration held in memory; `origin` names it in errors.
pub fn from_str(text: &str, origin: &str, flags: &Overrides) -> Result<RunConfig, ConfigError> {
    build(parse_str(text, origin)?, flags, origin)
}

fn parse_str(text: &str, origin: &str) -> Result<FileConfig, ConfigError> {
    toml::from_str(text).map_err(|e| ConfigError::Parse { path: origin.to_string(), message: e.to_string() })
}

fn build(file: FileConfig, flags: &Overrides, origin: &str) -> Result<RunConfig, ConfigError> {
    let pf = file.params.unwrap_or_default();
    let n = flags.n.or(pf.n).unwrap_or(1);
    let mu = flags.mu.or(pf.mu).unwrap_or(2.0);
    let params = Params::new(n, mu).map_err(|e| field_err("params", e))?;

    let mut quadrature = match file.quadrature {
        None => default_quadrature(),
        Some(table) => {
            let mut base = match toml::Value::try_from(default_quadrature()).expect("spec serializes") {
                toml::Value::Table(t) => t,
                _ => unreachable!("a struct serializes to a table"),
            };
            base.extend(table);
            toml::Value::Table(base).try_into().map_err(|e: toml::de::Error| ConfigError::Parse {
                path: origin.to_string(),
                message: format!("[quadrature] {}", e.message()),
            })?
        }
    };
    if let Some(seed) = flags.seed {
        quadrature.seed = seed;
    }
    if let Some(samples) = flags.samples {
        quadrature.samples = samples;
    }

    let campaigns = if flags.campaigns.is_empty() { file.campaigns.unwrap_or_default() } else { flags.campaigns.clone() };
    let output_path = flags
        .out
        .clone()
        .or(file.output_path.map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("hn-audit-out"));
    let robin_csv = flags.robin_csv.clone().or(file.robin_csv.map(PathBuf::from));

    let cfg = RunConfig { params, quadrature, campaigns, output_path, robin_csv };
    cfg.validate()?;
    Ok(cfg)
}
