//! Experiment configuration. Every section is optional except
//! `experiment`; missing sections take the defaults listed by `list`.

use std::path::PathBuf;

use airy_lab::estimate::{EstimateId, EstimateSpec, FamilyKind, TestFamily};
use airy_lab::norms::XsbParams;
use airy_lab::solver::SolverConfig;
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    NormSuite,
    Probe,
    Exponents,
    ResonantIntegral,
    Solve,
    Lifespan,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::NormSuite => "norm-suite",
            Experiment::Probe => "probe",
            Experiment::Exponents => "exponents",
            Experiment::ResonantIntegral => "resonant-integral",
            Experiment::Solve => "solve",
            Experiment::Lifespan => "lifespan",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<DataConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spec: Option<EstimateSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<TestFamily>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe: Option<ProbeConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub norms: Option<NormsConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exponents: Option<ExponentsConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resonant: Option<ResonantConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lifespan: Option<LifespanConfig>,
}

/// Periodic spatial grid of `n` points on a period `length`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n: usize,
    #[serde(default = "default_length")]
    pub length: f64,
}

fn default_length() -> f64 {
    40.0
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            n: 256,
            length: default_length(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataKind {
    /// `a exp(-(x - c)^2 / (2 w^2))`
    Gaussian,
    /// `a sech((x - c) / w)`
    Sech,
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    pub kind: DataKind,
    #[serde(default = "one")]
    pub amplitude: f64,
    #[serde(default = "one")]
    pub width: f64,
    #[serde(default)]
    pub center: f64,
}

fn one() -> f64 {
    1.0
}

impl Default for DataConfig {
    fn default() -> Self {
        DataConfig {
            kind: DataKind::Gaussian,
            amplitude: 1.0,
            width: 1.0,
            center: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeConfig {
    #[serde(default = "default_sizes")]
    pub sizes: Vec<usize>,
    /// Band edge of the refinements; defaults per estimate.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub band: Option<f64>,
}

fn default_sizes() -> Vec<usize> {
    vec![64, 128, 256]
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig {
            sizes: default_sizes(),
            band: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormsConfig {
    #[serde(default = "default_norm_r")]
    pub r: Vec<f64>,
    #[serde(default = "default_norm_s")]
    pub s: Vec<f64>,
    /// Relative agreement required with the quadrature reference.
    #[serde(default = "default_norm_tol")]
    pub tol: f64,
}

fn default_norm_r() -> Vec<f64> {
    vec![1.2, 1.5, 2.0]
}
fn default_norm_s() -> Vec<f64> {
    vec![0.0, 0.25, 1.0]
}
fn default_norm_tol() -> f64 {
    1e-8
}

impl Default for NormsConfig {
    fn default() -> Self {
        NormsConfig {
            r: default_norm_r(),
            s: default_norm_s(),
            tol: default_norm_tol(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExponentsConfig {
    #[serde(default = "default_exp_r")]
    pub r: Vec<f64>,
}

fn default_exp_r() -> Vec<f64> {
    vec![1.2, 1.5, 2.0]
}

impl Default for ExponentsConfig {
    fn default() -> Self {
        ExponentsConfig { r: default_exp_r() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResonantConfig {
    #[serde(default = "default_xis")]
    pub xi: Vec<f64>,
    #[serde(default = "default_eps")]
    pub eps: f64,
    /// The fitted slope must not exceed this.
    #[serde(default = "default_max_slope")]
    pub max_slope: f64,
}

fn default_xis() -> Vec<f64> {
    vec![8.0, 16.0, 32.0, 64.0]
}
fn default_eps() -> f64 {
    0.1
}
fn default_max_slope() -> f64 {
    -0.8
}

impl Default for ResonantConfig {
    fn default() -> Self {
        ResonantConfig {
            xi: default_xis(),
            eps: default_eps(),
            max_slope: default_max_slope(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LifespanConfig {
    #[serde(default = "default_lambdas")]
    pub lambdas: Vec<f64>,
    /// Accepted interval for the fitted slope.
    #[serde(default = "default_slope_range")]
    pub slope_range: [f64; 2],
}

fn default_lambdas() -> Vec<f64> {
    (0..6).map(|i| f64::powi(2.0, i)).collect()
}
fn default_slope_range() -> [f64; 2] {
    [-5.2, -2.8]
}

impl Default for LifespanConfig {
    fn default() -> Self {
        LifespanConfig {
            lambdas: default_lambdas(),
            slope_range: default_slope_range(),
        }
    }
}

pub fn default_spec() -> EstimateSpec {
    EstimateSpec::new(EstimateId::Lemma1)
}

pub fn default_family(seed: u64) -> TestFamily {
    let mut f = TestFamily::new(FamilyKind::Gaussian);
    f.seed = seed;
    f
}

/// `r = 2` at the threshold `s = 1/4`, `b = 0.6`, on `[0, 0.1]`.
pub fn default_solver() -> SolverConfig {
    SolverConfig::new(
        XsbParams {
            r: 2.0,
            s: 0.25,
            b: 0.6,
        },
        0.1,
    )
}

/// Lifespan runs bracket from a coarser start with fewer iterations.
pub fn default_lifespan_solver() -> SolverConfig {
    let mut c = default_solver();
    c.max_iter = 40;
    c
}

pub fn default_lifespan_grid() -> GridConfig {
    GridConfig {
        n: 128,
        length: 40.0,
    }
}

#[derive(Debug)]
pub enum ConfigError {
    Io(String),
    Parse(String),
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConfigError::Io(m) | ConfigError::Parse(m) => f.write_str(m),
        }
    }
}

/// Sets `path` (dot separated) in `root` to `raw`, read as JSON when it
/// parses and as a string otherwise. Missing objects are created.
pub fn apply_override(root: &mut Value, path: &str, raw: &str) -> Result<(), ConfigError> {
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let keys: Vec<&str> = path.split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(ConfigError::Parse(format!("bad override key {path:?}")));
    }
    let mut node = root;
    for (i, key) in keys.iter().enumerate() {
        let Value::Object(map) = node else {
            return Err(ConfigError::Parse(format!(
                "override {path:?}: {} is not an object",
                keys[..i].join(".")
            )));
        };
        if i + 1 == keys.len() {
            map.insert(key.to_string(), value);
            return Ok(());
        }
        node = map.entry(key.to_string()).or_insert_with(|| Value::Object(Default::default()));
    }
    unreachable!("keys is nonempty")
}

impl ExperimentConfig {
    /// Fills every section the experiment reads with its defaults, so the
    /// echoed config reproduces the run on its own.
    pub fn resolved(mut self) -> Self {
        let seed = self.seed;
        match self.experiment {
            Experiment::NormSuite => {
                self.grid.get_or_insert_with(GridConfig::default);
                self.data.get_or_insert_with(DataConfig::default);
                self.norms.get_or_insert_with(NormsConfig::default);
            }
            Experiment::Probe => {
                self.spec.get_or_insert_with(default_spec);
                self.family.get_or_insert_with(|| default_family(seed));
                self.probe.get_or_insert_with(ProbeConfig::default);
            }
            Experiment::Exponents => {
                self.exponents.get_or_insert_with(ExponentsConfig::default);
            }
            Experiment::ResonantIntegral => {
                self.resonant.get_or_insert_with(ResonantConfig::default);
            }
            Experiment::Solve => {
                self.grid.get_or_insert_with(GridConfig::default);
                self.data.get_or_insert_with(DataConfig::default);
                self.solver.get_or_insert_with(default_solver);
            }
            Experiment::Lifespan => {
                self.grid.get_or_insert_with(default_lifespan_grid);
                self.data.get_or_insert_with(DataConfig::default);
                self.solver.get_or_insert_with(default_lifespan_solver);
                self.lifespan.get_or_insert_with(LifespanConfig::default);
            }
        }
        // one seed drives the run
        if let Some(f) = self.family.as_mut() {
            f.seed = seed;
        }
        self
    }
}

fn parse_value(v: Value) -> Result<ExperimentConfig, ConfigError> {
    serde_json::from_value(v).map_err(|e| ConfigError::Parse(format!("config: {e}")))
}

/// Parses `text`, fills defaults, then applies `overrides` to the filled
/// config, so an override may set a single key of a default section.
pub fn parse_str(text: &str, overrides: &[(String, String)]) -> Result<ExperimentConfig, ConfigError> {
    let raw: Value = serde_json::from_str(text).map_err(|e| ConfigError::Parse(format!("config: {e}")))?;
    let base = parse_value(raw)?.resolved();
    let mut root = serde_json::to_value(&base).expect("config serializes");
    for (k, v) in overrides {
        apply_override(&mut root, k, v)?;
    }
    Ok(parse_value(root)?.resolved())
}

pub fn load(path: &std::path::Path, overrides: &[(String, String)]) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io(format!("{}: {e}", path.display())))?;
    parse_str(&text, overrides)
}

pub fn emit(cfg: &ExperimentConfig) -> String {
    serde_json::to_string_pretty(cfg).expect("config serializes")
}
