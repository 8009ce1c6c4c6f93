//! Model and run configuration files.
//!
//! Both are JSON. A model file describes the complex:
//!
//! ```json
//! {
//!   "name": "fmo-7",
//!   "site_energies_cm1": [12410, 12530, ...],
//!   "couplings_cm1": [[0, -87.7, ...], ...],
//!   "bath": { "temperature_k": 300, "lambda_cm1": 31.5, "omega_c_cm1": 150, "uphill": "none" },
//!   "sink_sites": [3, 4]
//! }
//! ```
//!
//! `bath` may instead carry `"rates_per_fs"`, an exciton-basis rate table
//! (`[M][N]` is the rate of `M → N`). Unknown fields are rejected, except for
//! free-form `"notes"`.
//!
//! A run file points at a model (relative paths resolve against the run file's
//! directory) and fixes the numerics:
//!
//! ```json
//! { "model": "fmo_default.json", "initial_site": 1, "dt_fs": 10, "steps": 400,
//!   "chi": 1.0, "backend": "operator", "renormalize": false }
//! ```

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::fmo::{BathSpec, FmoModel, HamiltonianSpec, UphillRates};
use crate::linalg::RealMatrix;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error("{path}:{line}:{column}: {message}")]
    Parse { path: PathBuf, line: usize, column: usize, message: String },

    #[error("{path}: field `{field}`: {message}")]
    Field { path: PathBuf, field: String, message: String },

    #[error("override `{field}`: {message}")]
    Override { field: String, message: String },
}

fn field_error(path: &Path, field: &str, message: impl ToString) -> ConfigError {
    ConfigError::Field { path: path.to_path_buf(), field: field.to_string(), message: message.to_string() }
}

fn read(path: &Path) -> Result<String, ConfigError> {
    std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })
}

fn parse<T: for<'de> Deserialize<'de>>(path: &Path, text: &str) -> Result<T, ConfigError> {
    serde_json::from_str(text).map_err(|e| ConfigError::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BathFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperature_k: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_cm1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_c_cm1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub uphill: Option<UphillRates>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rates_per_fs: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    #[serde(default)]
    pub name: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    pub site_energies_cm1: Vec<f64>,
    pub couplings_cm1: Vec<Vec<f64>>,
    pub bath: BathFile,
    pub sink_sites: Vec<usize>,
}

fn square_matrix(path: &Path, field: &str, rows: &[Vec<f64>], n: usize) -> Result<RealMatrix, ConfigError> {
    if rows.len() != n {
        return Err(field_error(path, field, format!("expected {n} rows, found {}", rows.len())));
    }
    if let Some((k, row)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
        return Err(field_error(path, &format!("{field}[{k}]"), format!("expected {n} entries, found {}", row.len())));
    }
    Ok(RealMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

impl ModelFile {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        parse(path, &read(path)?)
    }

    /// Checks the file and builds the model. `path` is only used in messages.
    pub fn to_model(&self, path: &Path) -> Result<FmoModel, ConfigError> {
        let n = self.site_energies_cm1.len();
        let couplings = square_matrix(path, "couplings_cm1", &self.couplings_cm1, n)?;
        let hamiltonian = HamiltonianSpec::new(self.site_energies_cm1.clone(), couplings)
            .map_err(|e| field_error(path, "couplings_cm1", e))?;
        let bath = self.bath_spec(path, n)?;
        bath.validate(n).map_err(|e| field_error(path, "bath", e))?;
        if self.sink_sites.is_empty() {
            return Err(field_error(path, "sink_sites", "at least one sink site is required"));
        }
        if let Some(s) = self.sink_sites.iter().find(|&&s| s == 0 || s > n) {
            return Err(field_error(path, "sink_sites", format!("site {s} is outside 1..={n}")));
        }
        Ok(FmoModel { name: self.name.clone(), hamiltonian, bath, sink_sites: self.sink_sites.clone() })
    }

    fn bath_spec(&self, path: &Path, n: usize) -> Result<BathSpec, ConfigError> {
        let b = &self.bath;
        if let Some(rows) = &b.rates_per_fs {
            if b.lambda_cm1.is_some() || b.omega_c_cm1.is_some() {
                return Err(field_error(path, "bath", "give either rates_per_fs or lambda_cm1/omega_c_cm1, not both"));
            }
            return Ok(BathSpec::Explicit { rates_per_fs: square_matrix(path, "bath.rates_per_fs", rows, n)? });
        }
        let need = |value: Option<f64>, name: &str| {
            value.ok_or_else(|| field_error(path, &format!("bath.{name}"), "missing (or give bath.rates_per_fs)"))
        };
        Ok(BathSpec::Ohmic {
            temperature_k: need(b.temperature_k, "temperature_k")?,
            lambda_cm1: need(b.lambda_cm1, "lambda_cm1")?,
            omega_c_cm1: need(b.omega_c_cm1, "omega_c_cm1")?,
            uphill: b.uphill.unwrap_or_default(),
        })
    }
}

pub fn load_model(path: &Path) -> Result<FmoModel, ConfigError> {
    ModelFile::load(path)?.to_model(path)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Backend {
    /// Operator-sum step map.
    #[default]
    Operator,
    /// Compiled step circuit on the density-matrix simulator.
    Circuit,
    /// RK4 integration of the Lindblad equation.
    LindbladOracle,
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Backend::Operator => "operator",
            Backend::Circuit => "circuit",
            Backend::LindbladOracle => "lindblad-oracle",
        })
    }
}

fn default_dt() -> f64 {
    10.0
}

fn default_steps() -> usize {
    400
}

fn default_chi() -> f64 {
    1.0
}

fn default_initial_site() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: PathBuf,
    #[serde(default = "default_initial_site")]
    pub initial_site: usize,
    #[serde(default = "default_dt")]
    pub dt_fs: f64,
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default = "default_chi")]
    pub chi: f64,
    /// Overrides the model's bath temperature.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperature_k: Option<f64>,
    #[serde(default)]
    pub backend: Backend,
    #[serde(default)]
    pub renormalize: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    /// Written into run metadata; ignored when read back.
    #[serde(default, skip_serializing)]
    pub provenance: Option<serde_json::Value>,
}

/// Per-field command-line overrides.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub chi: Option<f64>,
    pub dt_fs: Option<f64>,
    pub steps: Option<usize>,
    pub initial_site: Option<usize>,
    pub backend: Option<Backend>,
    pub temperature_k: Option<f64>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    /// Reads a run file and resolves its model path against the file's directory.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let mut cfg: RunConfig = parse(path, &read(path)?)?;
        if cfg.model.is_relative() {
            let dir = path.parent().unwrap_or(Path::new("."));
            cfg.model = dir.join(&cfg.model);
        }
        if let Ok(abs) = std::path::absolute(&cfg.model) {
            cfg.model = abs;
        }
        Ok(cfg)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(v) = o.chi {
            self.chi = v;
        }
        if let Some(v) = o.dt_fs {
            self.dt_fs = v;
        }
        if let Some(v) = o.steps {
            self.steps = v;
        }
        if let Some(v) = o.initial_site {
            self.initial_site = v;
        }
        if let Some(v) = o.backend {
            self.backend = v;
        }
        if let Some(v) = o.temperature_k {
            self.temperature_k = Some(v);
        }
        if let Some(v) = &o.out {
            self.out = Some(v.clone());
        }
    }

    /// Checks the run fields against a model with `n_sites` sites.
    pub fn validate(&self, n_sites: usize) -> Result<(), ConfigError> {
        let bad = |field: &str, message: String| ConfigError::Override { field: field.into(), message };
        if self.initial_site == 0 || self.initial_site > n_sites {
            return Err(bad("initial_site", format!("{} is outside 1..={n_sites}", self.initial_site)));
        }
        if !(0.0..=1.0).contains(&self.chi) {
            return Err(bad("chi", format!("{} is outside [0, 1]", self.chi)));
        }
        if self.steps == 0 {
            return Err(bad("steps", "must be at least 1".into()));
        }
        if !(self.dt_fs > 0.0) || !self.dt_fs.is_finite() {
            return Err(bad("dt_fs", format!("{} must be positive", self.dt_fs)));
        }
        if let Some(t) = self.temperature_k {
            if !(t > 0.0) {
                return Err(bad("temperature_k", format!("{t} must be positive")));
            }
        }
        Ok(())
    }

    /// The model with this run's temperature applied.
    pub fn resolve_model(&self) -> Result<FmoModel, ConfigError> {
        let mut model = load_model(&self.model)?;
        if let Some(t) = self.temperature_k {
            model.bath = model.bath.with_temperature(t);
        }
        self.validate(model.n_sites())?;
        Ok(model)
    }
}

/// Hex SHA-256 of the given byte strings, concatenated.
pub fn sha256_hex<'a>(parts: impl IntoIterator<Item = &'a [u8]>) -> String {
    let mut hasher = Sha256::new();
    for p in parts {
        hasher.update(p);
    }
    hex::encode(hasher.finalize())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tmp(name: &str, text: &str) -> PathBuf {
        let dir = std::env::temp_dir().join(format!("enaqt-config-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let p = dir.join(name);
        std::fs::write(&p, text).unwrap();
        p
    }

    const DIMER: &str = r#"{
        "site_energies_cm1": [100, 0],
        "couplings_cm1": [[0, 20], [20, 0]],
        "bath": { "temperature_k": 300, "lambda_cm1": 30, "omega_c_cm1": 150 },
        "sink_sites": [2]
    }"#;

    #[test]
    fn loads_ohmic_model() {
        let model = load_model(&tmp("dimer.json", DIMER)).unwrap();
        assert_eq!(model.n_sites(), 2);
        assert!(matches!(model.bath, BathSpec::Ohmic { uphill: UphillRates::DetailedBalance, .. }));
    }

    #[test]
    fn parse_error_has_position() {
        let err = load_model(&tmp("broken.json", "{\n  \"site_energies_cm1\": [1, 2,\n}")).unwrap_err();
        match err {
            ConfigError::Parse { line, .. } => assert_eq!(line, 3),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn ragged_couplings_name_the_row() {
        let text = DIMER.replace("[[0, 20], [20, 0]]", "[[0, 20], [20]]");
        let err = load_model(&tmp("ragged.json", &text)).unwrap_err();
        assert!(err.to_string().contains("couplings_cm1[1]"), "{err}");
    }

    #[test]
    fn missing_bath_field() {
        let text = DIMER.replace("\"lambda_cm1\": 30, ", "");
        let err = load_model(&tmp("nolambda.json", &text)).unwrap_err();
        assert!(err.to_string().contains("bath.lambda_cm1"), "{err}");
    }

    #[test]
    fn unknown_field_rejected() {
        let text = DIMER.replace("\"sink_sites\"", "\"sinks\": [1], \"sink_sites\"");
        assert!(matches!(load_model(&tmp("unknown.json", &text)), Err(ConfigError::Parse { .. })));
    }

    #[test]
    fn sink_out_of_range() {
        let text = DIMER.replace("[2]", "[3]");
        let err = load_model(&tmp("sink.json", &text)).unwrap_err();
        assert!(err.to_string().contains("sink_sites"), "{err}");
    }

    #[test]
    fn run_config_defaults_and_overrides() {
        tmp("dimer.json", DIMER);
        let path = tmp("run.json", r#"{ "model": "dimer.json" }"#);
        let mut cfg = RunConfig::load(&path).unwrap();
        assert_eq!((cfg.dt_fs, cfg.steps, cfg.chi, cfg.initial_site), (10.0, 400, 1.0, 1));
        assert_eq!(cfg.backend, Backend::Operator);
        assert!(cfg.resolve_model().is_ok());
        cfg.apply(&Overrides { chi: Some(1.5), ..Default::default() });
        assert!(matches!(cfg.resolve_model(), Err(ConfigError::Override { .. })));
        cfg.apply(&Overrides { chi: Some(0.5), initial_site: Some(3), ..Default::default() });
        assert!(cfg.resolve_model().is_err());
    }

    #[test]
    fn backend_names() {
        let cfg: RunConfig = serde_json::from_str(r#"{ "model": "m", "backend": "lindblad-oracle" }"#).unwrap();
        assert_eq!(cfg.backend, Backend::LindbladOracle);
        assert_eq!(cfg.backend.to_string(), "lindblad-oracle");
    }

    #[test]
    fn hash_is_stable() {
        assert_eq!(
            sha256_hex([b"abc".as_slice()]),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
