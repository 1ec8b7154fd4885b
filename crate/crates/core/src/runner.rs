//! Subcommand execution on loaded scenarios, producing in-memory artifacts
//! that the command-line tool writes to disk and the C ABI hands back as
//! strings.

use crate::control::{
    self, certify, optimize_translation, CertifyMode, ControlScenario, DomainFlag,
    OptimizerConfig, StabilizationReport,
};
use crate::integrator::{measure_decay_rate, simulate, write_snapshot_csv};
use crate::models::{ModelKind, Seasonality};
use crate::scenario::{BuiltScenario, Scenario, ScenarioError};
use crate::spectral::{
    assemble_eigen_operator, periodic_principal_eigenvalue, principal_eigenvalue_direct,
    principal_eigenvalue_dirichlet_complement, principal_eigenvalue_logistic,
    principal_eigenvalue_logistic_auto, EigenPair, LinearizedCoefficients, LogisticEstimate,
};
use crate::Error;
use serde::Serialize;
use std::fmt::Write as _;

/// One produced file, named relative to the run's output directory.
#[derive(Debug, Clone)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

/// Result of one subcommand: the files to persist, a JSON summary (also the
/// payload returned by the C ABI), and the step count when a simulation ran.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub artifacts: Vec<Artifact>,
    pub summary_json: String,
    pub step_count: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EigenMethodChoice {
    Direct,
    Logistic,
    Both,
}

impl std::str::FromStr for EigenMethodChoice {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "direct" => Ok(Self::Direct),
            "logistic" => Ok(Self::Logistic),
            "both" => Ok(Self::Both),
            other => Err(format!("unknown method '{other}'; use direct|logistic|both")),
        }
    }
}

#[derive(Serialize)]
struct EigenRecord {
    method: &'static str,
    lambda: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    zeta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    horizon: Option<f64>,
}

impl EigenRecord {
    fn from_pair(pair: &EigenPair) -> Self {
        Self {
            method: pair.method.tag(),
            lambda: pair.lambda,
            residual: Some(pair.residual),
            iterations: Some(pair.iterations),
            zeta: None,
            horizon: None,
        }
    }

    fn from_logistic(est: &LogisticEstimate) -> Self {
        Self {
            method: "logistic",
            lambda: est.lambda_hat,
            residual: None,
            iterations: None,
            zeta: Some(est.zeta),
            horizon: Some(est.horizon),
        }
    }
}

fn require_region(built: &BuiltScenario) -> Result<&crate::grid::ControlRegion, Error> {
    built.region.as_ref().ok_or_else(|| {
        Error::Scenario(ScenarioError::Validation(
            "this subcommand needs a control 'region' in the scenario".into(),
        ))
    })
}

/// `simulate`: run the configured model and export the trajectory.
pub fn run_simulate(built: &BuiltScenario) -> Result<RunOutput, Error> {
    let trajectory = simulate(
        &built.initial,
        &built.operators,
        &built.model,
        built.region.as_ref(),
        &built.solver,
    )
    .map_err(control_or_numerical)?;

    let mut artifacts = Vec::new();
    let mut series = String::new();
    trajectory
        .write_time_series_csv(&mut StringWriter(&mut series))
        .expect("string write");
    artifacts.push(Artifact {
        name: "series.csv".into(),
        contents: series,
    });
    for (step, state) in &trajectory.snapshots {
        let mut csv = String::new();
        write_snapshot_csv(
            &built.operators.domain,
            state,
            &trajectory.labels,
            &mut StringWriter(&mut csv),
        )
        .expect("string write");
        artifacts.push(Artifact {
            name: format!("snapshot_{step:06}.csv"),
            contents: csv,
        });
    }

    let window = (0.25 * built.solver.end_time).max(5.0 * built.solver.dt);
    let decay_rate = measure_decay_rate(&trajectory, 0, window).ok();
    let steps = trajectory.times.len() as u64 - 1;
    #[derive(Serialize)]
    struct Summary<'a> {
        end_time: f64,
        steps: u64,
        scheme: &'a str,
        min_value: f64,
        final_sup_norms: &'a [f64],
        final_integrals: &'a [f64],
        #[serde(skip_serializing_if = "Option::is_none")]
        decay_rate: Option<f64>,
    }
    let summary = Summary {
        end_time: trajectory.end_time(),
        steps,
        scheme: trajectory.scheme.tag(),
        min_value: trajectory.min_value,
        final_sup_norms: trajectory.sup_norms.last().unwrap(),
        final_integrals: trajectory.integrals.last().unwrap(),
        decay_rate,
    };
    let summary_json = serde_json::to_string_pretty(&summary).expect("summary serializes");
    artifacts.push(Artifact {
        name: "simulate.json".into(),
        contents: summary_json.clone(),
    });
    Ok(RunOutput {
        artifacts,
        summary_json,
        step_count: Some(steps),
    })
}

/// `eigen`: principal eigenvalue of the feedback operator by the requested
/// route(s), exporting JSON records plus eigenvector / history CSV fields.
pub fn run_eigen(built: &BuiltScenario, method: EigenMethodChoice) -> Result<RunOutput, Error> {
    let coeffs = LinearizedCoefficients::from_model(&built.model)?;
    let region = built.region.as_ref();
    let mut records = Vec::new();
    let mut artifacts = Vec::new();
    let mut direct_lambda = None;
    let mut logistic_lambda = None;

    if matches!(method, EigenMethodChoice::Direct | EigenMethodChoice::Both) {
        let a = assemble_eigen_operator(&built.operators, &coeffs, region, built.gamma)?;
        let pair = principal_eigenvalue_direct(&a)?;
        direct_lambda = Some(pair.lambda);
        let mut csv = String::new();
        write_snapshot_csv(
            &built.operators.domain,
            &crate::integrator::State {
                fields: vec![pair.phi.clone()],
            },
            &["phi"],
            &mut StringWriter(&mut csv),
        )
        .expect("string write");
        artifacts.push(Artifact {
            name: "eigenvector_direct.csv".into(),
            contents: csv,
        });
        records.push(EigenRecord::from_pair(&pair));
    }

    if matches!(method, EigenMethodChoice::Logistic | EigenMethodChoice::Both) {
        let config = built.logistic_config();
        let est = match built.eigen.zeta {
            Some(zeta) => principal_eigenvalue_logistic(
                &built.operators,
                &coeffs,
                region,
                built.gamma,
                zeta,
                &config,
            )?,
            None => principal_eigenvalue_logistic_auto(
                &built.operators,
                &coeffs,
                region,
                built.gamma,
                &config,
            )?,
        };
        logistic_lambda = Some(est.lambda_hat);
        let mut history = String::from("t,mass\n");
        for (t, mass) in &est.history {
            let _ = writeln!(history, "{t},{mass}");
        }
        artifacts.push(Artifact {
            name: "logistic_history.csv".into(),
            contents: history,
        });
        records.push(EigenRecord::from_logistic(&est));
    }

    #[derive(Serialize)]
    struct Summary {
        records: Vec<EigenRecord>,
        #[serde(skip_serializing_if = "Option::is_none")]
        delta: Option<f64>,
    }
    let delta = match (direct_lambda, logistic_lambda) {
        (Some(a), Some(b)) => Some((a - b).abs()),
        _ => None,
    };
    let summary_json =
        serde_json::to_string_pretty(&Summary { records, delta }).expect("summary serializes");
    artifacts.push(Artifact {
        name: "eigen.json".into(),
        contents: summary_json.clone(),
    });
    Ok(RunOutput {
        artifacts,
        summary_json,
        step_count: None,
    })
}

#[derive(Serialize)]
struct CertifyRecord<'a> {
    verdict: &'static str,
    gamma: f64,
    region_shape: &'a str,
    region_center: &'a [f64],
    #[serde(skip_serializing_if = "Option::is_none")]
    lambda_feedback: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lambda_complement: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lambda_complement_local: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lambda_periodic: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lambda_periodic_local: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    decay_rate: Option<f64>,
}

fn certify_record(report: &StabilizationReport) -> String {
    serde_json::to_string_pretty(&CertifyRecord {
        verdict: report.verdict.tag(),
        gamma: report.gamma,
        region_shape: &report.region_shape,
        region_center: &report.region_center,
        lambda_feedback: report.lambda_feedback,
        lambda_complement: report.lambda_complement,
        lambda_complement_local: report.lambda_complement_local,
        lambda_periodic: report.lambda_periodic,
        lambda_periodic_local: report.lambda_periodic_local,
        decay_rate: report.decay_rate,
    })
    .expect("record serializes")
}

/// `certify`: stabilizability verdict for the configured region and gain.
pub fn run_certify(built: &BuiltScenario, mode: CertifyMode) -> Result<RunOutput, Error> {
    let region = require_region(built)?;
    let report = certify(
        &built.operators,
        &built.model,
        region,
        built.gamma,
        mode,
        &built.periodic_config(),
    )?;
    let summary_json = certify_record(&report);
    Ok(RunOutput {
        artifacts: vec![Artifact {
            name: "certify.json".into(),
            contents: summary_json.clone(),
        }],
        summary_json,
        step_count: None,
    })
}

/// `optimize-region`: iterative translation of the control region.
pub fn run_optimize(built: &BuiltScenario, flag: DomainFlag) -> Result<RunOutput, Error> {
    let region = require_region(built)?;
    if !matches!(
        built.model.kind,
        ModelKind::Controlled { .. } | ModelKind::Periodic { .. }
    ) {
        return Err(Error::Scenario(ScenarioError::Validation(
            "optimize-region needs the controlled (or periodic) model".into(),
        )));
    }
    let h = built.operators.domain.spacing();
    let config = OptimizerConfig {
        eta0: built.optimizer.eta0.unwrap_or(4.0 * h),
        eta_min: built.optimizer.eta_min.unwrap_or(0.25 * h),
        grad_tol: built.optimizer.grad_tol,
        max_iterations: built.optimizer.max_iterations,
    };
    let scenario = ControlScenario {
        operators: &built.operators,
        model: &built.model,
        initial: &built.initial,
        config: &built.solver,
        domain_flag: flag,
    };
    let path = optimize_translation(region, &scenario, &config)?;

    #[derive(Serialize)]
    struct PathRecord<'a> {
        centers: &'a [Vec<f64>],
        objectives: &'a [f64],
        step_sizes: &'a [f64],
        termination: &'static str,
        iterations: usize,
    }
    let summary_json = serde_json::to_string_pretty(&PathRecord {
        centers: &path.centers,
        objectives: &path.objectives,
        step_sizes: &path.step_sizes,
        termination: path.termination.tag(),
        iterations: path.centers.len() - 1,
    })
    .expect("path serializes");

    let dim = built.operators.domain.dimension();
    let mut gradients = String::from("iterate");
    for axis in 0..dim {
        let _ = write!(gradients, ",center_{}", ["x", "y"][axis]);
    }
    let _ = write!(gradients, ",objective");
    for axis in 0..dim {
        let _ = write!(gradients, ",dR_{}", ["x", "y"][axis]);
    }
    let _ = writeln!(gradients, ",step_size");
    for k in 0..path.centers.len() {
        let _ = write!(gradients, "{k}");
        for c in &path.centers[k] {
            let _ = write!(gradients, ",{c}");
        }
        let _ = write!(gradients, ",{}", path.objectives[k]);
        for axis in 0..dim {
            match path.gradients.get(k) {
                Some(g) => {
                    let _ = write!(gradients, ",{}", g[axis]);
                }
                None => {
                    let _ = write!(gradients, ",");
                }
            }
        }
        match path.step_sizes.get(k) {
            Some(s) => {
                let _ = writeln!(gradients, ",{s}");
            }
            None => {
                let _ = writeln!(gradients, ",");
            }
        }
    }

    Ok(RunOutput {
        artifacts: vec![
            Artifact {
                name: "path.json".into(),
                contents: summary_json.clone(),
            },
            Artifact {
                name: "gradients.csv".into(),
                contents: gradients,
            },
        ],
        summary_json,
        step_count: None,
    })
}

/// `compare-eigen`: table of direct vs logistic vs periodic-reduction
/// eigenvalues with their deltas.
pub fn run_compare(built: &BuiltScenario) -> Result<RunOutput, Error> {
    let region = require_region(built)?;
    let coeffs = LinearizedCoefficients::from_model(&built.model)?;

    let a = assemble_eigen_operator(&built.operators, &coeffs, Some(region), built.gamma)?;
    let direct = principal_eigenvalue_direct(&a)?;
    let logistic = principal_eigenvalue_logistic_auto(
        &built.operators,
        &coeffs,
        Some(region),
        built.gamma,
        &built.logistic_config(),
    )?;
    let complement = principal_eigenvalue_dirichlet_complement(&built.operators, &coeffs, region)?;
    let periodic = periodic_principal_eigenvalue(
        &built.operators,
        &coeffs,
        region,
        &Seasonality::Constant { level: 1.0 },
        built.period(),
        &built.periodic_config(),
    )?;

    #[derive(Serialize)]
    struct Row {
        quantity: &'static str,
        reference: &'static str,
        reference_value: f64,
        alternative: &'static str,
        alternative_value: f64,
        delta: f64,
    }
    let rows = vec![
        Row {
            quantity: "feedback eigenvalue",
            reference: "direct",
            reference_value: direct.lambda,
            alternative: "logistic",
            alternative_value: logistic.lambda_hat,
            delta: (direct.lambda - logistic.lambda_hat).abs(),
        },
        Row {
            quantity: "complement eigenvalue",
            reference: "dirichlet-complement",
            reference_value: complement.lambda,
            alternative: "period-map (flat seasonality)",
            alternative_value: periodic.lambda,
            delta: (complement.lambda - periodic.lambda).abs(),
        },
    ];
    let summary_json = serde_json::to_string_pretty(&rows).expect("rows serialize");

    let mut csv =
        String::from("quantity,reference,reference_value,alternative,alternative_value,delta\n");
    for row in &rows {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{}",
            row.quantity,
            row.reference,
            row.reference_value,
            row.alternative,
            row.alternative_value,
            row.delta
        );
    }

    Ok(RunOutput {
        artifacts: vec![
            Artifact {
                name: "compare.json".into(),
                contents: summary_json.clone(),
            },
            Artifact {
                name: "compare.csv".into(),
                contents: csv,
            },
        ],
        summary_json,
        step_count: None,
    })
}

/// `report`: merge run records into one summary CSV.
pub fn run_report(records: &[(String, crate::scenario::RunRecord)]) -> String {
    let mut csv = String::from(
        "record,command,scenario_digest,artifact_version,wall_ms,step_count,outputs,threads\n",
    );
    for (path, record) in records {
        let _ = writeln!(
            csv,
            "{path},{},{},{},{},{},{},{}",
            record.command,
            record.scenario_digest,
            record.artifact_version,
            record.wall_ms,
            record
                .step_count
                .map(|s| s.to_string())
                .unwrap_or_default(),
            record.outputs.len(),
            record.threads
        );
    }
    csv
}

/// Runs one subcommand by name on a loaded scenario; the single entry point
/// shared by the command-line tool and the C ABI.
pub fn run_subcommand(
    scenario: &Scenario,
    built: &BuiltScenario,
    command: &str,
    method: EigenMethodChoice,
    mode: CertifyMode,
    flag: DomainFlag,
) -> Result<RunOutput, Error> {
    let _ = scenario;
    match command {
        "simulate" => run_simulate(built),
        "eigen" => run_eigen(built, method),
        "certify" => run_certify(built, mode),
        "optimize-region" => run_optimize(built, flag),
        "compare-eigen" => run_compare(built),
        other => Err(Error::Scenario(ScenarioError::Validation(format!(
            "unknown subcommand '{other}'"
        )))),
    }
}

fn control_or_numerical(e: crate::integrator::IntegratorError) -> Error {
    Error::Integrator(e)
}

/// Adapter: `std::fmt::Write` string sink behind the `io::Write` interface
/// used by the CSV writers.
struct StringWriter<'a>(&'a mut String);

impl std::io::Write for StringWriter<'_> {
    fn write(&mut self, buf: &[u8]) -> std::io::Result<usize> {
        self.0
            .push_str(std::str::from_utf8(buf).map_err(std::io::Error::other)?);
        Ok(buf.len())
    }

    fn flush(&mut self) -> std::io::Result<()> {
        Ok(())
    }
}

pub use control::CertifyMode as CertifyModeChoice;
