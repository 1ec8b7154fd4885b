//! Regional-control pipeline: stabilizability certificates, feedback runs,
//! the terminal-mass objective, the adjoint system, translation shape
//! derivatives, and the iterative region-placement optimizer.
//!
//! The certificates follow the sign classification of the principal
//! eigenvalues: a positive eigenvalue of the problem with the global kernel
//! slope certifies zero-stabilizability for large feedback gains; with the
//! slope of the force of infection at zero it certifies the local variant;
//! a negative local eigenvalue rules stabilization out. Values inside a
//! small band around zero are reported as inconclusive, since the theory
//! leaves the boundary case undetermined.

use crate::grid::{ControlRegion, Domain, GridError};
use crate::integrator::{
    measure_decay_rate, simulate, IntegratorError, Operators, SolverConfig, State, Trajectory,
};
use crate::models::{ModelError, ModelKind, ModelSpec, Seasonality};
use crate::spectral::{
    assemble_eigen_operator, periodic_principal_eigenvalue, principal_eigenvalue_direct,
    principal_eigenvalue_dirichlet_complement, LinearizedCoefficients, PeriodicConfig,
    SpectralError,
};
use nalgebra::DVector;

#[derive(Debug, thiserror::Error)]
pub enum ControlError {
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Integrator(#[from] IntegratorError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("the forward trajectory was not stored every step; rerun with dense storage")]
    MissingDenseTrajectory,
    #[error("state went negative during a feedback run (min = {min})")]
    NonnegativityViolated { min: f64 },
    #[error("{0}")]
    InvalidScenario(String),
}

/// Stabilizability classification applied to the computed eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    ZeroStabilizable,
    LocallyZeroStabilizable,
    NotStabilizable,
    Inconclusive,
}

impl Verdict {
    pub fn tag(&self) -> &'static str {
        match self {
            Verdict::ZeroStabilizable => "zero-stabilizable",
            Verdict::LocallyZeroStabilizable => "locally-zero-stabilizable",
            Verdict::NotStabilizable => "not-stabilizable",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

/// Decision table on the pair (global-slope eigenvalue, zero-slope
/// eigenvalue). Every pair outside the band maps to exactly one verdict.
pub fn classify(lambda_global: f64, lambda_local: f64, band: f64) -> Verdict {
    if lambda_global > band {
        Verdict::ZeroStabilizable
    } else if lambda_local < -band {
        Verdict::NotStabilizable
    } else if lambda_global < -band && lambda_local > band {
        Verdict::LocallyZeroStabilizable
    } else {
        Verdict::Inconclusive
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CertifyMode {
    Homogeneous,
    Periodic,
}

/// Certificate of a region/gain pair, carrying every eigenvalue that went
/// into the verdict.
#[derive(Debug, Clone)]
pub struct StabilizationReport {
    pub region_center: Vec<f64>,
    pub region_shape: String,
    pub gamma: f64,
    /// Eigenvalue of the feedback operator with `gamma chi_omega`.
    pub lambda_feedback: Option<f64>,
    /// Complement eigenvalue with the global slope `a21`.
    pub lambda_complement: Option<f64>,
    /// Complement eigenvalue with the slope of `g` at zero.
    pub lambda_complement_local: Option<f64>,
    /// Periodic eigenvalue with the global slope (periodic mode).
    pub lambda_periodic: Option<f64>,
    /// Periodic eigenvalue with the zero slope (periodic mode).
    pub lambda_periodic_local: Option<f64>,
    pub verdict: Verdict,
    pub decay_rate: Option<f64>,
}

/// Inconclusive bands: ten times the relevant residual tolerance.
const HOMOGENEOUS_BAND: f64 = 1e-7;
const PERIODIC_BAND: f64 = 1e-5;

fn region_shape_tag(region: &ControlRegion) -> String {
    match region.shape() {
        crate::grid::RegionShape::Interval { half_width } => {
            format!("interval(half_width={half_width})")
        }
        crate::grid::RegionShape::Ball { radius } => format!("ball(radius={radius})"),
        crate::grid::RegionShape::Box { half_widths } => format!("box(half_widths={half_widths:?})"),
    }
}

/// Computes the eigenvalues relevant for the requested mode and applies the
/// sign classification.
pub fn certify(
    operators: &Operators,
    model: &ModelSpec,
    region: &ControlRegion,
    gamma: f64,
    mode: CertifyMode,
    periodic_config: &PeriodicConfig,
) -> Result<StabilizationReport, ControlError> {
    let global = LinearizedCoefficients::from_model(model)?;
    let local = LinearizedCoefficients::from_model_at_zero(model)?;

    let feedback = {
        let a = assemble_eigen_operator(operators, &global, Some(region), gamma)?;
        principal_eigenvalue_direct(&a)?.lambda
    };
    let complement = principal_eigenvalue_dirichlet_complement(operators, &global, region)?.lambda;
    let complement_local =
        principal_eigenvalue_dirichlet_complement(operators, &local, region)?.lambda;

    let mut report = StabilizationReport {
        region_center: region.center().to_vec(),
        region_shape: region_shape_tag(region),
        gamma,
        lambda_feedback: Some(feedback),
        lambda_complement: Some(complement),
        lambda_complement_local: Some(complement_local),
        lambda_periodic: None,
        lambda_periodic_local: None,
        verdict: Verdict::Inconclusive,
        decay_rate: None,
    };

    match mode {
        CertifyMode::Homogeneous => {
            report.verdict = classify(complement, complement_local, HOMOGENEOUS_BAND);
        }
        CertifyMode::Periodic => {
            let (seasonality, period) = match &model.kind {
                ModelKind::Periodic { seasonality, .. } => (
                    seasonality.clone(),
                    seasonality.period().unwrap_or(1.0),
                ),
                _ => (Seasonality::Constant { level: 1.0 }, 1.0),
            };
            let periodic = periodic_principal_eigenvalue(
                operators,
                &global,
                region,
                &seasonality,
                period,
                periodic_config,
            )?
            .lambda;
            let periodic_local = periodic_principal_eigenvalue(
                operators,
                &local,
                region,
                &seasonality,
                period,
                periodic_config,
            )?
            .lambda;
            report.lambda_periodic = Some(periodic);
            report.lambda_periodic_local = Some(periodic_local);
            report.verdict = classify(periodic, periodic_local, PERIODIC_BAND);
        }
    }
    Ok(report)
}

/// Simulates the feedback-controlled system, asserts nonnegativity of both
/// fields, and fills the certificate with the measured decay rate of the
/// pollutant sup norm (absent for identically zero runs).
pub fn run_feedback(
    initial: &State,
    operators: &Operators,
    model: &ModelSpec,
    region: &ControlRegion,
    config: &SolverConfig,
) -> Result<(Trajectory, StabilizationReport), ControlError> {
    let mode = match model.kind {
        ModelKind::Periodic { .. } => CertifyMode::Periodic,
        ModelKind::Core | ModelKind::Controlled { .. } => CertifyMode::Homogeneous,
        _ => {
            return Err(ControlError::InvalidScenario(
                "feedback runs apply to the pollutant/infective pair models".into(),
            ))
        }
    };
    let trajectory = simulate(initial, operators, model, Some(region), config)?;
    if trajectory.min_value < -1e-9 {
        return Err(ControlError::NonnegativityViolated {
            min: trajectory.min_value,
        });
    }
    let mut report = certify(
        operators,
        model,
        region,
        model.gamma(),
        mode,
        &PeriodicConfig::default(),
    )?;
    let window = (0.25 * config.end_time).max(5.0 * config.dt);
    report.decay_rate = measure_decay_rate(&trajectory, 0, window).ok();
    Ok((trajectory, report))
}

/// Integration domain of the terminal-mass objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DomainFlag {
    /// Integrate the terminal fields over the whole habitat (matches the
    /// adjoint terminal data of one on the habitat).
    #[default]
    Whole,
    /// Integrate over the control region only.
    RegionOnly,
}

/// Terminal mass `R = int (u1(T) + u2(T))` over the flagged domain.
pub fn compute_r(
    trajectory: &Trajectory,
    domain: &Domain,
    region: &ControlRegion,
    flag: DomainFlag,
) -> f64 {
    let state = trajectory.final_state();
    let w = domain.weights();
    let mut total = 0.0;
    for i in 0..domain.node_count() {
        if flag == DomainFlag::RegionOnly && !region.indicator()[i] {
            continue;
        }
        total += w[i] * (state.fields[0][i] + state.fields[1][i]);
    }
    total
}

/// Backward states aligned with the forward time grid: `p1[k]`, `p2[k]` at
/// time `times[k]`, terminal condition one at the final level.
#[derive(Debug, Clone)]
pub struct AdjointSolution {
    pub times: Vec<f64>,
    pub p1: Vec<DVector<f64>>,
    pub p2: Vec<DVector<f64>>,
}

/// Solves the adjoint pair backward from terminal data one, reusing the
/// forward IMEX splitting: implicit diffusion on `p1`, explicit reaction
/// with the kernel applied transposed and the incidence slope `g'(u1)`
/// evaluated on the stored forward pollutant.
pub fn solve_adjoint(
    forward: &Trajectory,
    operators: &Operators,
    model: &ModelSpec,
    region: Option<&ControlRegion>,
) -> Result<AdjointSolution, ControlError> {
    let states = forward
        .states
        .as_ref()
        .ok_or(ControlError::MissingDenseTrajectory)?;
    match model.kind {
        ModelKind::Core | ModelKind::Controlled { .. } | ModelKind::Periodic { .. } => {}
        _ => {
            return Err(ControlError::InvalidScenario(
                "the adjoint system is defined for the pollutant/infective pair".into(),
            ))
        }
    }
    let gamma = model.gamma();
    if gamma > 0.0 && region.is_none() {
        return Err(ControlError::Model(ModelError::MissingRegion));
    }

    let n = operators.domain.node_count();
    let n_levels = states.len();
    let dt = forward.dt;

    // Forward pollutant interpolated between stored levels.
    let u1_at = |t: f64| -> DVector<f64> {
        let pos = (t / dt).clamp(0.0, (n_levels - 1) as f64);
        let k = pos.floor() as usize;
        if k + 1 >= n_levels {
            return states[n_levels - 1].fields[0].clone();
        }
        let theta = pos - k as f64;
        (1.0 - theta) * &states[k].fields[0] + theta * &states[k + 1].fields[0]
    };

    let decay1 = DVector::from_fn(n, |i, _| {
        model.a11
            + match region {
                Some(r) if r.indicator()[i] => gamma,
                _ => 0.0,
            }
    });

    // Backward reaction at forward time t.
    let reaction = |t: f64, p1: &DVector<f64>, p2: &DVector<f64>| {
        let u1 = u1_at(t);
        let p = model.seasonal_factor(t);
        let transposed = operators.kernel.apply_transpose(p1);
        let d1 = DVector::from_fn(n, |i, _| {
            -decay1[i] * p1[i] + p * model.foi.derivative(u1[i]) * p2[i]
        });
        let d2 = DVector::from_fn(n, |i, _| transposed[i] - model.a22 * p2[i]);
        (d1, d2)
    };

    let heun = |t_start: f64, dt_sub: f64, p1: &DVector<f64>, p2: &DVector<f64>| {
        // tau runs backward in forward time: t decreases by dt_sub.
        let (k11, k12) = reaction(t_start, p1, p2);
        let (q1, q2) = (p1 + dt_sub * &k11, p2 + dt_sub * &k12);
        let (k21, k22) = reaction(t_start - dt_sub, &q1, &q2);
        (
            p1 + 0.5 * dt_sub * (k11 + k21),
            p2 + 0.5 * dt_sub * (k12 + k22),
        )
    };

    let implicit_dt = match forward.scheme {
        crate::integrator::Scheme::BackwardEulerDiffusion => dt,
        crate::integrator::Scheme::CrankNicolsonDiffusion => 0.5 * dt,
    };
    let matrix = operators.robin.matrix().identity_plus_scaled(implicit_dt);
    let solver = crate::grid::ImplicitSolver::new(&matrix, operators.domain.weights());

    let mut p1 = vec![DVector::zeros(n); n_levels];
    let mut p2 = vec![DVector::zeros(n); n_levels];
    p1[n_levels - 1] = DVector::from_element(n, 1.0);
    p2[n_levels - 1] = DVector::from_element(n, 1.0);

    for k in (0..n_levels - 1).rev() {
        let t_hi = forward.times[k + 1];
        let (q1, q2) = match forward.scheme {
            crate::integrator::Scheme::BackwardEulerDiffusion => {
                let (r1, r2) = reaction(t_hi, &p1[k + 1], &p2[k + 1]);
                let explicit1 = &p1[k + 1] + dt * r1;
                let explicit2 = &p2[k + 1] + dt * r2;
                (
                    solver.solve(&explicit1).map_err(SpectralError::from)?,
                    explicit2,
                )
            }
            crate::integrator::Scheme::CrankNicolsonDiffusion => {
                let (m1, m2) = heun(t_hi, 0.5 * dt, &p1[k + 1], &p2[k + 1]);
                let rhs = &m1 - 0.5 * dt * operators.robin.matrix().apply(&m1);
                let d1 = solver.solve(&rhs).map_err(SpectralError::from)?;
                heun(t_hi - 0.5 * dt, 0.5 * dt, &d1, &m2)
            }
        };
        p1[k] = q1;
        p2[k] = q2;
    }

    Ok(AdjointSolution {
        times: forward.times.clone(),
        p1,
        p2,
    })
}

/// Gradient data of the terminal-mass objective under region translations.
#[derive(Debug, Clone)]
pub struct ShapeGradient {
    /// Time integral of `gamma * u1 * p1` per boundary facet.
    pub facet_time_integrals: Vec<f64>,
    /// Derivative against each canonical direction.
    pub derivatives: Vec<f64>,
}

impl ShapeGradient {
    /// Derivative against an arbitrary translation direction; linear in the
    /// direction by construction.
    pub fn derivative(&self, region: &ControlRegion, direction: &[f64]) -> f64 {
        region
            .facets()
            .iter()
            .zip(&self.facet_time_integrals)
            .map(|(facet, integral)| {
                let nu_dot_v: f64 = facet
                    .normal
                    .iter()
                    .zip(direction)
                    .map(|(nu, v)| nu * v)
                    .sum();
                integral * facet.weight * nu_dot_v
            })
            .sum()
    }

    pub fn norm(&self) -> f64 {
        self.derivatives.iter().map(|d| d * d).sum::<f64>().sqrt()
    }
}

/// Evaluates the translation derivative data: for each boundary facet the
/// trapezoid time integral of `gamma * u1 * p1` (fields averaged onto the
/// facet midpoint from its straddling node pair), then the boundary
/// quadrature against each canonical direction.
pub fn shape_gradient(
    forward: &Trajectory,
    adjoint: &AdjointSolution,
    region: &ControlRegion,
    gamma: f64,
) -> Result<ShapeGradient, ControlError> {
    let states = forward
        .states
        .as_ref()
        .ok_or(ControlError::MissingDenseTrajectory)?;
    let n_levels = states.len();
    let dt = forward.dt;
    let dim = region.center().len();

    let mut facet_time_integrals = vec![0.0; region.facets().len()];
    for k in 0..n_levels {
        let weight_t = if k == 0 || k + 1 == n_levels { 0.5 * dt } else { dt };
        let u1 = &states[k].fields[0];
        let p1 = &adjoint.p1[k];
        for (f, facet) in region.facets().iter().enumerate() {
            let u_mid = 0.5 * (u1[facet.node_in] + u1[facet.node_out]);
            let p_mid = 0.5 * (p1[facet.node_in] + p1[facet.node_out]);
            facet_time_integrals[f] += weight_t * gamma * u_mid * p_mid;
        }
    }

    let mut gradient = ShapeGradient {
        facet_time_integrals,
        derivatives: vec![0.0; dim],
    };
    for axis in 0..dim {
        let mut e = vec![0.0; dim];
        e[axis] = 1.0;
        gradient.derivatives[axis] = gradient.derivative(region, &e);
    }
    Ok(gradient)
}

/// Translation derivative against one direction.
pub fn shape_derivative(
    forward: &Trajectory,
    adjoint: &AdjointSolution,
    region: &ControlRegion,
    gamma: f64,
    direction: &[f64],
) -> Result<f64, ControlError> {
    Ok(shape_gradient(forward, adjoint, region, gamma)?.derivative(region, direction))
}

#[derive(Debug, Clone)]
pub struct OptimizerConfig {
    /// Initial trial step length for the center update.
    pub eta0: f64,
    /// Smallest step length tried before giving up on an iterate.
    pub eta_min: f64,
    /// Stop when the assembled gradient norm falls below this.
    pub grad_tol: f64,
    pub max_iterations: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            eta0: 0.1,
            eta_min: 1e-4,
            grad_tol: 1e-8,
            max_iterations: 20,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    GradientSmall,
    MaxIterations,
    BoundaryClamp,
    NoDecrease,
}

impl Termination {
    pub fn tag(&self) -> &'static str {
        match self {
            Termination::GradientSmall => "gradient-small",
            Termination::MaxIterations => "max-iter",
            Termination::BoundaryClamp => "boundary-clamp",
            Termination::NoDecrease => "no-decrease",
        }
    }
}

/// History of the translation optimizer: the accepted centers, their
/// objective values (strictly decreasing past the first entry), the
/// accepted step sizes, and why the loop stopped.
#[derive(Debug, Clone)]
pub struct TranslationPath {
    pub centers: Vec<Vec<f64>>,
    pub objectives: Vec<f64>,
    pub step_sizes: Vec<f64>,
    /// Assembled translation derivative at each center that got a gradient
    /// evaluation (all but possibly the last).
    pub gradients: Vec<Vec<f64>>,
    pub termination: Termination,
}

/// Everything the optimizer needs to evaluate a region placement.
pub struct ControlScenario<'a> {
    pub operators: &'a Operators,
    pub model: &'a ModelSpec,
    pub initial: &'a State,
    pub config: &'a SolverConfig,
    pub domain_flag: DomainFlag,
}

impl ControlScenario<'_> {
    fn objective(&self, region: &ControlRegion, dense: bool) -> Result<(f64, Option<Trajectory>), ControlError> {
        let mut config = self.config.clone();
        config.store_every_step = dense;
        let trajectory = simulate(self.initial, self.operators, self.model, Some(region), &config)?;
        let r = compute_r(&trajectory, &self.operators.domain, region, self.domain_flag);
        Ok((r, dense.then_some(trajectory)))
    }
}

/// Iterative improvement of the region position by translations: forward
/// solve, adjoint solve, boundary gradient, then a backtracking step on the
/// center, clamped to keep the region strictly inside the habitat. Accepted
/// iterates strictly decrease the objective.
pub fn optimize_translation(
    initial_region: &ControlRegion,
    scenario: &ControlScenario<'_>,
    config: &OptimizerConfig,
) -> Result<TranslationPath, ControlError> {
    let gamma = scenario.model.gamma();
    let domain = &scenario.operators.domain;
    let mut region = initial_region.clone();
    let bounds = region.admissible_center_bounds(domain)?;

    let (mut objective, mut forward) = scenario.objective(&region, true)?;
    let mut path = TranslationPath {
        centers: vec![region.center().to_vec()],
        objectives: vec![objective],
        step_sizes: Vec::new(),
        gradients: Vec::new(),
        termination: Termination::MaxIterations,
    };

    for _ in 0..config.max_iterations {
        let adjoint = solve_adjoint(forward.as_ref().unwrap(), scenario.operators, scenario.model, Some(&region))?;
        let gradient = shape_gradient(forward.as_ref().unwrap(), &adjoint, &region, gamma)?;
        path.gradients.push(gradient.derivatives.clone());
        let norm = gradient.norm();
        if norm <= config.grad_tol {
            path.termination = Termination::GradientSmall;
            return Ok(path);
        }
        let direction: Vec<f64> = gradient.derivatives.iter().map(|d| -d / norm).collect();

        let mut eta = config.eta0;
        let mut accepted = false;
        let mut clamped_out = false;
        while eta >= config.eta_min {
            let candidate_center: Vec<f64> = region
                .center()
                .iter()
                .zip(&direction)
                .zip(&bounds)
                .map(|((c, d), (lo, hi))| (c + eta * d).clamp(*lo, *hi))
                .collect();
            let moved = candidate_center
                .iter()
                .zip(region.center())
                .any(|(a, b)| (a - b).abs() > 1e-14);
            if !moved {
                clamped_out = true;
                break;
            }
            let shift: Vec<f64> = candidate_center
                .iter()
                .zip(region.center())
                .map(|(a, b)| a - b)
                .collect();
            let candidate = region.translate(domain, &shift)?;
            let (candidate_objective, candidate_forward) = scenario.objective(&candidate, true)?;
            if candidate_objective < objective - 1e-12 * objective.abs().max(1e-12) {
                region = candidate;
                objective = candidate_objective;
                forward = candidate_forward;
                path.centers.push(region.center().to_vec());
                path.objectives.push(objective);
                path.step_sizes.push(eta);
                accepted = true;
                break;
            }
            eta *= 0.5;
        }
        if !accepted {
            path.termination = if clamped_out {
                Termination::BoundaryClamp
            } else {
                Termination::NoDecrease
            };
            return Ok(path);
        }
    }
    path.termination = Termination::MaxIterations;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{
        assemble_robin_laplacian, build_domain, build_kernel, make_region, KernelFamily,
        RegionShape,
    };
    use crate::integrator::Scheme;
    use crate::models::{FoiFamily, ForceOfInfection};

    fn operators(n: usize, d1: f64, alpha: f64, family: KernelFamily, amp: f64) -> Operators {
        let domain = build_domain(1, &[1.0], &[n]).unwrap();
        let robin = assemble_robin_laplacian(&domain, d1, alpha).unwrap();
        let kernel = build_kernel(&domain, family, amp).unwrap();
        Operators { domain, robin, kernel }
    }

    #[test]
    fn classification_table_is_total_and_consistent() {
        let band = 1e-7;
        let values = [-1.0, -2.0 * band, 0.0, 2.0 * band, 1.0];
        for &lg in &values {
            for &ll in &values {
                if ll < lg {
                    continue; // the local eigenvalue dominates the global one
                }
                let verdict = classify(lg, ll, band);
                let expected = if lg > band {
                    Verdict::ZeroStabilizable
                } else if ll < -band {
                    Verdict::NotStabilizable
                } else if lg < -band && ll > band {
                    Verdict::LocallyZeroStabilizable
                } else {
                    Verdict::Inconclusive
                };
                assert_eq!(verdict, expected, "lg={lg} ll={ll}");
                if lg.abs() > band && ll.abs() > band {
                    assert_ne!(verdict, Verdict::Inconclusive);
                }
            }
        }
    }

    #[test]
    fn terminal_mass_of_constant_fields() {
        let ops = operators(16, 0.1, 0.0, KernelFamily::Delta, 1.0);
        let region =
            make_region(&ops.domain, RegionShape::Interval { half_width: 0.2 }, &[0.5]).unwrap();
        let model = ModelSpec::new(
            ModelKind::Core,
            1.0,
            1.0,
            ForceOfInfection::new(FoiFamily::Linear { k: 1.0 }).unwrap(),
        )
        .unwrap();
        let cfg = SolverConfig {
            dt: 0.05,
            end_time: 0.05,
            scheme: Scheme::BackwardEulerDiffusion,
            snapshot_stride: 1,
            store_every_step: false,
            steady_tol: 1e-9,
        };
        // Zero terminal state.
        let zero = simulate(&State::constant(16, &[0.0, 0.0]), &ops, &model, None, &cfg).unwrap();
        assert_eq!(compute_r(&zero, &ops.domain, &region, DomainFlag::Whole), 0.0);
        // Constant-one fields: fake a trajectory with a unit terminal state.
        let mut traj = zero;
        traj.snapshots = vec![(0, State::constant(16, &[1.0, 1.0]))];
        let whole = compute_r(&traj, &ops.domain, &region, DomainFlag::Whole);
        assert!((whole - 2.0).abs() <= 1e-12);
        let region_only = compute_r(&traj, &ops.domain, &region, DomainFlag::RegionOnly);
        assert!((region_only - 2.0 * region.measure(&ops.domain)).abs() <= 1e-12);
    }

    #[test]
    fn adjoint_is_stationary_without_couplings() {
        // Zero kernel, zero rates, zero feedback, and g'(0) = 0 on a zero
        // forward state: the backward pair stays at its terminal value one.
        let ops = operators(12, 0.3, 0.0, KernelFamily::Delta, 0.0);
        let g = ForceOfInfection::new(FoiFamily::Sigmoid { k: 1.0, alpha: 1.0, beta: 1.0 }).unwrap();
        let model = ModelSpec::new(ModelKind::Core, 0.0, 0.0, g).unwrap();
        let cfg = SolverConfig {
            dt: 0.05,
            end_time: 1.0,
            scheme: Scheme::CrankNicolsonDiffusion,
            snapshot_stride: 4,
            store_every_step: true,
            steady_tol: 1e-9,
        };
        let forward = simulate(&State::constant(12, &[0.0, 0.0]), &ops, &model, None, &cfg).unwrap();
        let adjoint = solve_adjoint(&forward, &ops, &model, None).unwrap();
        for k in 0..adjoint.times.len() {
            for i in 0..12 {
                assert!((adjoint.p1[k][i] - 1.0).abs() <= 1e-12);
                assert!((adjoint.p2[k][i] - 1.0).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn adjoint_requires_dense_storage() {
        let ops = operators(12, 0.3, 0.0, KernelFamily::Delta, 1.0);
        let model = ModelSpec::new(
            ModelKind::Core,
            1.0,
            1.0,
            ForceOfInfection::new(FoiFamily::Linear { k: 1.0 }).unwrap(),
        )
        .unwrap();
        let cfg = SolverConfig {
            dt: 0.05,
            end_time: 0.5,
            scheme: Scheme::BackwardEulerDiffusion,
            snapshot_stride: 4,
            store_every_step: false,
            steady_tol: 1e-9,
        };
        let forward = simulate(&State::constant(12, &[1.0, 1.0]), &ops, &model, None, &cfg).unwrap();
        assert!(matches!(
            solve_adjoint(&forward, &ops, &model, None),
            Err(ControlError::MissingDenseTrajectory)
        ));
    }

    #[test]
    fn shape_derivative_is_linear_in_direction() {
        let ops = operators(32, 0.02, 0.0, KernelFamily::Gaussian { sigma: 0.1 }, 1.0);
        let region =
            make_region(&ops.domain, RegionShape::Interval { half_width: 0.1 }, &[0.4]).unwrap();
        let gamma = 5.0;
        let model = ModelSpec::new(
            ModelKind::Controlled { gamma },
            1.0,
            1.0,
            ForceOfInfection::new(FoiFamily::Linear { k: 2.0 }).unwrap(),
        )
        .unwrap();
        let cfg = SolverConfig {
            dt: 0.02,
            end_time: 1.0,
            scheme: Scheme::CrankNicolsonDiffusion,
            snapshot_stride: 16,
            store_every_step: true,
            steady_tol: 1e-9,
        };
        let bump = DVector::from_fn(32, |i, _| {
            let x = i as f64 / 31.0;
            (-(x - 0.25f64).powi(2) / 0.005).exp()
        });
        let forward = simulate(&State::pair(bump, DVector::zeros(32)), &ops, &model, Some(&region), &cfg).unwrap();
        let adjoint = solve_adjoint(&forward, &ops, &model, Some(&region)).unwrap();
        let gradient = shape_gradient(&forward, &adjoint, &region, gamma).unwrap();
        let d1 = gradient.derivative(&region, &[1.0]);
        let d2 = gradient.derivative(&region, &[2.0]);
        let dm = gradient.derivative(&region, &[-1.0]);
        assert!((d2 - 2.0 * d1).abs() <= 1e-15 * d1.abs().max(1e-300));
        assert!((dm + d1).abs() <= 1e-15 * d1.abs().max(1e-300));
        assert_eq!(shape_derivative(&forward, &adjoint, &region, gamma, &[0.0]).unwrap(), 0.0);
    }
}
