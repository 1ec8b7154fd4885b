//! Scenario configuration: the JSON schema, hypothesis-level validation,
//! and deterministic run records.
//!
//! A scenario file fully determines a run. Loading validates everything the
//! modules assume: the kernel nonnegativity hypothesis, the force-of-
//! infection hypotheses on a sample grid, nonnegative bounded initial data,
//! the region clearance rule, and the explicit positivity bound on the time
//! step. Validation failures carry the violated hypothesis in the message
//! and map to exit code 2; numerical failures during a run map to exit
//! code 3.

use crate::grid::{
    assemble_robin_laplacian, build_kernel, make_region, ControlRegion, Domain, GridError,
    KernelFamily, RegionShape,
};
use crate::integrator::{IntegratorError, Operators, Scheme, SolverConfig, State};
use crate::models::{
    FoiFamily, ForceOfInfection, ModelError, ModelKind, ModelSpec, Seasonality,
};
use crate::spectral::{LogisticConfig, PeriodicConfig};
use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("scenario parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("cannot read '{path}': {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl From<GridError> for ScenarioError {
    fn from(e: GridError) -> Self {
        ScenarioError::Validation(e.to_string())
    }
}

impl From<ModelError> for ScenarioError {
    fn from(e: ModelError) -> Self {
        ScenarioError::Validation(e.to_string())
    }
}

impl From<IntegratorError> for ScenarioError {
    fn from(e: IntegratorError) -> Self {
        ScenarioError::Validation(e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    pub extents: Vec<f64>,
    pub nodes_per_axis: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiffusionSpec {
    /// Pollutant diffusivity.
    pub d1: f64,
    /// Robin coefficient of the third-type boundary condition.
    #[serde(default)]
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum KernelSpec {
    Gaussian { sigma: f64, amplitude: f64 },
    Uniform { amplitude: f64 },
    SeparableProduct { sigmas: Vec<f64>, amplitude: f64 },
    Delta { amplitude: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum FoiSpec {
    Linear { k: f64 },
    Power { k: f64, p: f64 },
    Holling { k: f64, p: f64, q: f64, alpha: f64, beta: f64 },
    Sigmoid { k: f64, alpha: f64, beta: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum SeasonalitySpec {
    Constant { level: f64 },
    Cosine { mean: f64, depth: f64, period: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CapacitySpec {
    Constant { value: f64 },
    FromFile { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ModelConfig {
    Core { a11: f64, a22: f64 },
    Controlled { a11: f64, a22: f64 },
    Periodic { a11: f64, a22: f64 },
    Malaria { a11: f64, a22: f64, capacity: CapacitySpec },
    SirKendall { d2: f64, d3: f64, mu: f64, recovery: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "kebab-case")]
pub enum RegionSpec {
    Interval { center: Vec<f64>, half_width: f64 },
    Ball { center: Vec<f64>, radius: f64 },
    Box { center: Vec<f64>, half_widths: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    pub dt: f64,
    pub end_time: f64,
    pub scheme: String,
    #[serde(default = "default_snapshot_stride")]
    pub snapshot_stride: usize,
    #[serde(default)]
    pub store_every_step: bool,
    #[serde(default = "default_steady_tol")]
    pub steady_tol: f64,
}

fn default_snapshot_stride() -> usize {
    100
}

fn default_steady_tol() -> f64 {
    1e-8
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum InitialSpec {
    /// One constant level per field.
    Constant { values: Vec<f64> },
    /// Gaussian bump on the first field, optionally a scaled copy on the
    /// second.
    GaussianBump {
        center: Vec<f64>,
        width: f64,
        height: f64,
        #[serde(default)]
        u2_height: f64,
    },
    /// Snapshot-format CSV: node index, coordinates, one column per field.
    FromFile { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EigenSpec {
    /// Logistic shift; picked automatically (with retries) when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zeta: Option<f64>,
    #[serde(default = "default_y0")]
    pub y0: f64,
    #[serde(default = "default_settle_tol")]
    pub settle_tol: f64,
    #[serde(default = "default_check_interval")]
    pub check_interval: f64,
    #[serde(default = "default_max_time")]
    pub max_time: f64,
    #[serde(default = "default_logistic_dt")]
    pub logistic_dt: f64,
    /// Period of the periodic eigenproblem when the seasonality is constant.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub period: Option<f64>,
    #[serde(default = "default_periodic_dt")]
    pub periodic_dt: f64,
}

fn default_y0() -> f64 {
    1.0
}
fn default_settle_tol() -> f64 {
    1e-8
}
fn default_check_interval() -> f64 {
    0.5
}
fn default_max_time() -> f64 {
    600.0
}
fn default_logistic_dt() -> f64 {
    0.05
}
fn default_periodic_dt() -> f64 {
    0.01
}

impl Default for EigenSpec {
    fn default() -> Self {
        Self {
            zeta: None,
            y0: default_y0(),
            settle_tol: default_settle_tol(),
            check_interval: default_check_interval(),
            max_time: default_max_time(),
            logistic_dt: default_logistic_dt(),
            period: None,
            periodic_dt: default_periodic_dt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta_min: Option<f64>,
    #[serde(default = "default_grad_tol")]
    pub grad_tol: f64,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
}

fn default_grad_tol() -> f64 {
    1e-8
}
fn default_max_iterations() -> usize {
    20
}

impl Default for OptimizerSpec {
    fn default() -> Self {
        Self {
            eta0: None,
            eta_min: None,
            grad_tol: default_grad_tol(),
            max_iterations: default_max_iterations(),
        }
    }
}

/// Complete description of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub domain: DomainSpec,
    pub diffusion: DiffusionSpec,
    pub kernel: KernelSpec,
    pub model: ModelConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub foi: Option<FoiSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seasonality: Option<SeasonalitySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region: Option<RegionSpec>,
    #[serde(default)]
    pub gamma: f64,
    pub solver: SolverSpec,
    pub initial: InitialSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eigen: Option<EigenSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimizer: Option<OptimizerSpec>,
}

/// Scenario materialized into grid objects, model and initial state.
#[derive(Debug)]
pub struct BuiltScenario {
    pub operators: Operators,
    pub model: ModelSpec,
    pub region: Option<ControlRegion>,
    pub initial: State,
    pub solver: SolverConfig,
    pub gamma: f64,
    pub eigen: EigenSpec,
    pub optimizer: OptimizerSpec,
}

impl Scenario {
    /// Parses and fully validates a scenario file.
    pub fn load(path: &Path) -> Result<(Scenario, BuiltScenario), ScenarioError> {
        let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let scenario: Scenario = serde_json::from_str(&text)?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        let built = scenario.build(&base)?;
        Ok((scenario, built))
    }

    /// Content digest of the canonical serialized form.
    pub fn digest(&self) -> String {
        let canonical = serde_json::to_string(self).expect("scenario serializes");
        let mut hasher = Sha256::new();
        hasher.update(canonical.as_bytes());
        hex_string(&hasher.finalize())
    }

    /// Validates every cross-module invariant and assembles the run inputs.
    /// Relative file references resolve against `base`.
    pub fn build(&self, base: &Path) -> Result<BuiltScenario, ScenarioError> {
        let domain = Domain::build(&self.domain.extents, &self.domain.nodes_per_axis)?;
        let robin = assemble_robin_laplacian(&domain, self.diffusion.d1, self.diffusion.alpha)?;
        let kernel_family = match &self.kernel {
            KernelSpec::Gaussian { sigma, .. } => KernelFamily::Gaussian { sigma: *sigma },
            KernelSpec::Uniform { .. } => KernelFamily::Uniform,
            KernelSpec::SeparableProduct { sigmas, .. } => KernelFamily::SeparableProduct {
                sigmas: sigmas.clone(),
            },
            KernelSpec::Delta { .. } => KernelFamily::Delta,
        };
        let amplitude = match &self.kernel {
            KernelSpec::Gaussian { amplitude, .. }
            | KernelSpec::Uniform { amplitude }
            | KernelSpec::SeparableProduct { amplitude, .. }
            | KernelSpec::Delta { amplitude } => *amplitude,
        };
        let kernel = build_kernel(&domain, kernel_family, amplitude)?;

        if self.gamma < 0.0 {
            return Err(ScenarioError::Validation(format!(
                "sanitation effort gamma must be nonnegative, got {}",
                self.gamma
            )));
        }

        let foi = match (&self.foi, &self.model) {
            (Some(spec), _) => build_foi(spec)?,
            (None, ModelConfig::SirKendall { .. }) => {
                // The SIR variant carries its force of infection in the
                // kernel; the slot is a placeholder.
                ForceOfInfection::new(FoiFamily::Linear { k: 1.0 })?
            }
            (None, _) => {
                return Err(ScenarioError::Validation(
                    "this model variant needs a force of infection ('foi')".into(),
                ))
            }
        };

        let seasonality = match &self.seasonality {
            Some(SeasonalitySpec::Constant { level }) => {
                Some(Seasonality::Constant { level: *level })
            }
            Some(SeasonalitySpec::Cosine { mean, depth, period }) => Some(Seasonality::Cosine {
                mean: *mean,
                depth: *depth,
                period: *period,
            }),
            None => None,
        };
        if let Some(s) = &seasonality {
            s.validate()?;
        }

        let region = match &self.region {
            Some(spec) => {
                let (shape, center) = match spec {
                    RegionSpec::Interval { center, half_width } => (
                        RegionShape::Interval {
                            half_width: *half_width,
                        },
                        center,
                    ),
                    RegionSpec::Ball { center, radius } => {
                        (RegionShape::Ball { radius: *radius }, center)
                    }
                    RegionSpec::Box { center, half_widths } => (
                        RegionShape::Box {
                            half_widths: half_widths.clone(),
                        },
                        center,
                    ),
                };
                Some(make_region(&domain, shape, center)?)
            }
            None => None,
        };

        let kind = match &self.model {
            ModelConfig::Core { .. } => ModelKind::Core,
            ModelConfig::Controlled { .. } => ModelKind::Controlled { gamma: self.gamma },
            ModelConfig::Periodic { .. } => ModelKind::Periodic {
                gamma: self.gamma,
                seasonality: seasonality.clone().ok_or_else(|| {
                    ScenarioError::Validation(
                        "the periodic model needs a 'seasonality' block".into(),
                    )
                })?,
            },
            ModelConfig::Malaria { capacity, .. } => ModelKind::Malaria {
                capacity: build_capacity(capacity, &domain, base)?,
            },
            ModelConfig::SirKendall { d2, d3, mu, recovery } => ModelKind::SirKendall {
                d2: *d2,
                d3: *d3,
                mu: *mu,
                recovery: *recovery,
            },
        };
        let (a11, a22) = match &self.model {
            ModelConfig::Core { a11, a22 }
            | ModelConfig::Controlled { a11, a22 }
            | ModelConfig::Periodic { a11, a22 }
            | ModelConfig::Malaria { a11, a22, .. } => (*a11, *a22),
            ModelConfig::SirKendall { .. } => (0.0, 0.0),
        };
        let model = ModelSpec::new(kind, a11, a22, foi)?;

        // Hypothesis checks on the force of infection for the pair models.
        if !matches!(model.kind, ModelKind::SirKendall { .. }) {
            model
                .foi
                .check_h1(h1_sample_range(&self.initial))
                .map_err(|e| ScenarioError::Validation(e.to_string()))?;
        }
        if matches!(
            model.kind,
            ModelKind::Controlled { .. } | ModelKind::Periodic { .. }
        ) && self.gamma > 0.0
            && region.is_none()
        {
            return Err(ScenarioError::Validation(
                "a positive gamma needs a control 'region'".into(),
            ));
        }

        let initial = build_initial(&self.initial, &domain, model.field_count(), base)?;
        let min = initial.min_value();
        if min < 0.0 {
            return Err(ScenarioError::Validation(format!(
                "H3 violated: initial data must be nonnegative, min = {min}"
            )));
        }
        if initial
            .fields
            .iter()
            .any(|f| f.iter().any(|v| !v.is_finite()))
        {
            return Err(ScenarioError::Validation(
                "H3 violated: initial data must be bounded".into(),
            ));
        }

        let scheme = match self.solver.scheme.as_str() {
            "backward-euler-diffusion" => Scheme::BackwardEulerDiffusion,
            "crank-nicolson-diffusion" => Scheme::CrankNicolsonDiffusion,
            other => {
                return Err(ScenarioError::Validation(format!(
                    "unknown scheme '{other}'; use 'backward-euler-diffusion' or 'crank-nicolson-diffusion'"
                )))
            }
        };
        let solver = SolverConfig {
            dt: self.solver.dt,
            end_time: self.solver.end_time,
            scheme,
            snapshot_stride: self.solver.snapshot_stride,
            store_every_step: self.solver.store_every_step,
            steady_tol: self.solver.steady_tol,
        };
        let operators = Operators {
            domain,
            robin,
            kernel,
        };
        solver.validate(&model, &operators)?;

        Ok(BuiltScenario {
            operators,
            model,
            region,
            initial,
            solver,
            gamma: self.gamma,
            eigen: self.eigen.clone().unwrap_or_default(),
            optimizer: self.optimizer.clone().unwrap_or_default(),
        })
    }
}

impl BuiltScenario {
    pub fn logistic_config(&self) -> LogisticConfig {
        LogisticConfig {
            dt: self.eigen.logistic_dt,
            max_time: self.eigen.max_time,
            settle_tol: self.eigen.settle_tol,
            check_interval: self.eigen.check_interval,
            y0: self.eigen.y0,
            min_time: 1.0,
        }
    }

    pub fn periodic_config(&self) -> PeriodicConfig {
        PeriodicConfig {
            dt: self.eigen.periodic_dt,
            ..PeriodicConfig::default()
        }
    }

    /// Period of the periodic eigenproblem: the seasonality period when
    /// present, otherwise the explicit override, otherwise one.
    pub fn period(&self) -> f64 {
        if let ModelKind::Periodic { seasonality, .. } = &self.model.kind {
            if let Some(p) = seasonality.period() {
                return p;
            }
        }
        self.eigen.period.unwrap_or(1.0)
    }

    pub fn seasonality(&self) -> Seasonality {
        match &self.model.kind {
            ModelKind::Periodic { seasonality, .. } => seasonality.clone(),
            _ => Seasonality::Constant { level: 1.0 },
        }
    }
}

fn h1_sample_range(initial: &InitialSpec) -> f64 {
    let scale = match initial {
        InitialSpec::Constant { values } => values.iter().copied().fold(0.0, f64::max),
        InitialSpec::GaussianBump { height, u2_height, .. } => height.max(*u2_height),
        InitialSpec::FromFile { .. } => 1.0,
    };
    10.0 * scale.max(1.0)
}

fn build_foi(spec: &FoiSpec) -> Result<ForceOfInfection, ModelError> {
    let family = match spec {
        FoiSpec::Linear { k } => FoiFamily::Linear { k: *k },
        FoiSpec::Power { k, p } => FoiFamily::Power { k: *k, p: *p },
        FoiSpec::Holling { k, p, q, alpha, beta } => FoiFamily::Holling {
            k: *k,
            p: *p,
            q: *q,
            alpha: *alpha,
            beta: *beta,
        },
        FoiSpec::Sigmoid { k, alpha, beta } => FoiFamily::Sigmoid {
            k: *k,
            alpha: *alpha,
            beta: *beta,
        },
    };
    ForceOfInfection::new(family)
}

fn build_capacity(
    spec: &CapacitySpec,
    domain: &Domain,
    base: &Path,
) -> Result<DVector<f64>, ScenarioError> {
    match spec {
        CapacitySpec::Constant { value } => {
            Ok(DVector::from_element(domain.node_count(), *value))
        }
        CapacitySpec::FromFile { path } => {
            let fields = read_field_csv(&resolve(base, path), domain, 1)?;
            Ok(fields.into_iter().next().unwrap())
        }
    }
}

fn build_initial(
    spec: &InitialSpec,
    domain: &Domain,
    field_count: usize,
    base: &Path,
) -> Result<State, ScenarioError> {
    match spec {
        InitialSpec::Constant { values } => {
            if values.len() != field_count {
                return Err(ScenarioError::Validation(format!(
                    "initial values: expected {field_count} entries, got {}",
                    values.len()
                )));
            }
            Ok(State::constant(domain.node_count(), values))
        }
        InitialSpec::GaussianBump {
            center,
            width,
            height,
            u2_height,
        } => {
            if center.len() != domain.dimension() {
                return Err(ScenarioError::Validation(format!(
                    "bump center: expected {} coordinates, got {}",
                    domain.dimension(),
                    center.len()
                )));
            }
            if !(*width > 0.0) {
                return Err(ScenarioError::Validation(format!(
                    "bump width must be positive, got {width}"
                )));
            }
            let profile = DVector::from_fn(domain.node_count(), |i, _| {
                let d2: f64 = domain
                    .coord(i)
                    .iter()
                    .zip(center)
                    .map(|(x, c)| (x - c) * (x - c))
                    .sum();
                (-d2 / (2.0 * width * width)).exp()
            });
            if field_count == 3 {
                // SIR: seed infectives with the bump, susceptibles fill up.
                let i_field = *height * &profile;
                let s = DVector::from_fn(domain.node_count(), |k, _| {
                    (1.0 - i_field[k]).max(0.0)
                });
                Ok(State::sir(s, i_field, DVector::zeros(domain.node_count())))
            } else {
                Ok(State::pair(*height * &profile, *u2_height * &profile))
            }
        }
        InitialSpec::FromFile { path } => {
            let fields = read_field_csv(&resolve(base, path), domain, field_count)?;
            Ok(State { fields })
        }
    }
}

fn resolve(base: &Path, path: &Path) -> PathBuf {
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        base.join(path)
    }
}

/// Reads a snapshot-format CSV (node, coordinates, field columns).
fn read_field_csv(
    path: &Path,
    domain: &Domain,
    field_count: usize,
) -> Result<Vec<DVector<f64>>, ScenarioError> {
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| ScenarioError::Validation(format!("{}: empty field file", path.display())))?;
    let columns = header.split(',').count();
    let expected = 1 + domain.dimension() + field_count;
    if columns != expected {
        return Err(ScenarioError::Validation(format!(
            "{}: expected {expected} columns (node, coordinates, {field_count} fields), got {columns}",
            path.display()
        )));
    }
    let mut fields = vec![DVector::zeros(domain.node_count()); field_count];
    let mut rows = 0usize;
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != expected {
            return Err(ScenarioError::Validation(format!(
                "{}:{}: malformed row",
                path.display(),
                lineno + 2
            )));
        }
        let node: usize = cells[0].trim().parse().map_err(|_| {
            ScenarioError::Validation(format!("{}:{}: bad node index", path.display(), lineno + 2))
        })?;
        if node >= domain.node_count() {
            return Err(ScenarioError::Validation(format!(
                "{}:{}: node {node} outside the grid",
                path.display(),
                lineno + 2
            )));
        }
        for f in 0..field_count {
            let raw = cells[1 + domain.dimension() + f].trim();
            fields[f][node] = raw.parse().map_err(|_| {
                ScenarioError::Validation(format!(
                    "{}:{}: bad value '{raw}'",
                    path.display(),
                    lineno + 2
                ))
            })?;
        }
        rows += 1;
    }
    if rows != domain.node_count() {
        return Err(ScenarioError::Validation(format!(
            "{}: {} rows for a grid of {} nodes",
            path.display(),
            rows,
            domain.node_count()
        )));
    }
    Ok(fields)
}

/// One produced file: path relative to the output directory plus a content
/// hash, so identical scenarios can be checked to reproduce identical
/// outputs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputEntry {
    pub path: String,
    pub sha256: String,
}

/// Provenance record written next to the outputs of every run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub scenario_digest: String,
    pub artifact_version: String,
    pub command: String,
    pub outputs: Vec<OutputEntry>,
    pub wall_ms: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step_count: Option<u64>,
    pub threads: usize,
}

pub fn hex_string(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn sha256_hex(data: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(data.as_bytes());
    hex_string(&hasher.finalize())
}

/// Internal thread count pinned by the `EPIREGION_THREADS` variable; the
/// numerical kernels are single-threaded, so this also serves as the default
/// for cross-scenario parallelism.
pub fn pinned_threads() -> usize {
    std::env::var("EPIREGION_THREADS")
        .ok()
        .and_then(|v| v.parse().ok())
        .filter(|&n| n >= 1)
        .unwrap_or(1)
}

/// Map a run-time error to the process exit code contract: 2 for validation
/// problems, 3 for numerical failures.
pub fn exit_code_for(err: &crate::Error) -> i32 {
    match err {
        crate::Error::Scenario(_) => 2,
        crate::Error::Grid(_) | crate::Error::Model(_) => 2,
        _ => 3,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal_json() -> String {
        r#"{
            "domain": {"extents": [1.0], "nodes_per_axis": [32]},
            "diffusion": {"d1": 0.01, "alpha": 0.0},
            "kernel": {"family": "gaussian", "sigma": 0.1, "amplitude": 1.0},
            "model": {"kind": "controlled", "a11": 1.0, "a22": 1.0},
            "foi": {"family": "linear", "k": 2.0},
            "region": {"shape": "interval", "center": [0.5], "half_width": 0.1},
            "gamma": 5.0,
            "solver": {"dt": 0.05, "end_time": 1.0, "scheme": "backward-euler-diffusion"},
            "initial": {"kind": "constant", "values": [1.0, 1.0]}
        }"#
        .to_string()
    }

    #[test]
    fn minimal_scenario_loads_and_digest_is_stable() {
        let scenario: Scenario = serde_json::from_str(&minimal_json()).unwrap();
        scenario.build(Path::new(".")).unwrap();
        let d1 = scenario.digest();
        let d2 = scenario.digest();
        assert_eq!(d1, d2);
        assert_eq!(d1.len(), 64);
    }

    #[test]
    fn scenario_roundtrips_through_serialization() {
        let scenario: Scenario = serde_json::from_str(&minimal_json()).unwrap();
        let text = serde_json::to_string(&scenario).unwrap();
        let again: Scenario = serde_json::from_str(&text).unwrap();
        assert_eq!(scenario, again);
        assert_eq!(scenario.digest(), again.digest());
    }

    #[test]
    fn negative_kernel_amplitude_cites_h2() {
        let json = minimal_json().replace("\"amplitude\": 1.0", "\"amplitude\": -1.0");
        let scenario: Scenario = serde_json::from_str(&json).unwrap();
        let err = scenario.build(Path::new(".")).unwrap_err();
        assert!(err.to_string().contains("H2"), "{err}");
    }

    #[test]
    fn unbounded_force_of_infection_cites_h1() {
        let json = minimal_json().replace(
            "{\"family\": \"linear\", \"k\": 2.0}",
            "{\"family\": \"power\", \"k\": 1.0, \"p\": 2.0}",
        );
        let scenario: Scenario = serde_json::from_str(&json).unwrap();
        let err = scenario.build(Path::new(".")).unwrap_err();
        assert!(err.to_string().contains("H1-c"), "{err}");
    }

    #[test]
    fn dt_above_bound_reports_the_bound() {
        let json = minimal_json().replace("\"dt\": 0.05", "\"dt\": 0.5");
        let scenario: Scenario = serde_json::from_str(&json).unwrap();
        let err = scenario.build(Path::new(".")).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("positivity bound"), "{msg}");
    }

    #[test]
    fn negative_initial_data_cites_h3() {
        let json = minimal_json().replace("\"values\": [1.0, 1.0]", "\"values\": [1.0, -0.5]");
        let scenario: Scenario = serde_json::from_str(&json).unwrap();
        let err = scenario.build(Path::new(".")).unwrap_err();
        assert!(err.to_string().contains("H3"), "{err}");
    }

    #[test]
    fn region_clearance_violation_is_rejected() {
        let json = minimal_json().replace("\"center\": [0.5]", "\"center\": [0.95]");
        let scenario: Scenario = serde_json::from_str(&json).unwrap();
        let err = scenario.build(Path::new(".")).unwrap_err();
        assert!(err.to_string().contains("2h"), "{err}");
    }

    #[test]
    fn parse_error_carries_position() {
        let err = serde_json::from_str::<Scenario>("{\"domain\": ").unwrap_err();
        assert!(err.line() >= 1);
    }
}
