//! Time integration of the model variants with an implicit-diffusion /
//! explicit-reaction splitting.
//!
//! Diffusion is stiff and its matrix is sparse, while the nonlocal coupling
//! is dense but nonstiff, so each step treats diffusion implicitly with a
//! prefactored solver and the reaction explicitly. Two schemes are offered:
//!
//! * `backward-euler-diffusion` — first order, positivity preserving:
//!   `(I + dt L) u1' = u1 + dt * reaction(t)`, pointwise explicit `u2`.
//! * `crank-nicolson-diffusion` — second order: a reaction half-step (Heun),
//!   a trapezoidal diffusion step over the full `dt`, and a second reaction
//!   half-step.
//!
//! The explicit part carries a positivity time-step bound derived from the
//! decay rates and the kernel norm; it is checked when a run is configured.

use crate::grid::{
    assemble_robin_laplacian, ControlRegion, Domain, ImplicitSolver, KernelOperator,
    LinearSolveFailure, RobinOperator, SparseMatrix,
};
use crate::models::{self, ModelError, ModelKind, ModelSpec};
use nalgebra::DVector;
use std::io::Write;

/// Assembled spatial operators shared by the integrator, the eigenvalue
/// routines and the control pipeline.
#[derive(Debug, Clone)]
pub struct Operators {
    pub domain: Domain,
    pub robin: RobinOperator,
    pub kernel: KernelOperator,
}

#[derive(Debug, Clone, thiserror::Error)]
pub enum IntegratorError {
    #[error(transparent)]
    Linear(#[from] LinearSolveFailure),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("dt = {dt} exceeds the positivity bound {bound} = 1/(a11 + gamma + a22 + ||K||_inf)")]
    DtAboveBound { dt: f64, bound: f64 },
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("initial data violates nonnegativity (min = {min})")]
    NegativeInitialData { min: f64 },
    #[error("state-dependent decay rate {rate} too stiff for dt = {dt}; reduce dt")]
    StateBoundExceeded { rate: f64, dt: f64 },
    #[error("field norms underflowed inside the fit window")]
    NormUnderflow,
    #[error("decay-rate window holds fewer than two samples")]
    WindowTooShort,
    #[error("no steady state within the horizon; last residual {residual}")]
    NotConverged { residual: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    BackwardEulerDiffusion,
    CrankNicolsonDiffusion,
}

impl Scheme {
    pub fn tag(&self) -> &'static str {
        match self {
            Scheme::BackwardEulerDiffusion => "backward-euler-diffusion",
            Scheme::CrankNicolsonDiffusion => "crank-nicolson-diffusion",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub dt: f64,
    pub end_time: f64,
    pub scheme: Scheme,
    /// Steps between stored snapshots (the initial and final states are
    /// always stored).
    pub snapshot_stride: usize,
    /// Keep every step of every field; the adjoint solver requires this.
    pub store_every_step: bool,
    /// Relative time-derivative norm below which a state counts as steady.
    pub steady_tol: f64,
}

impl SolverConfig {
    pub fn validate(&self, model: &ModelSpec, operators: &Operators) -> Result<(), IntegratorError> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(IntegratorError::InvalidConfig(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if !(self.end_time > 0.0) {
            return Err(IntegratorError::InvalidConfig(format!(
                "end_time must be positive, got {}",
                self.end_time
            )));
        }
        if self.snapshot_stride == 0 {
            return Err(IntegratorError::InvalidConfig(
                "snapshot_stride must be at least 1".into(),
            ));
        }
        let bound = positivity_bound(model, operators);
        if self.dt > bound {
            return Err(IntegratorError::DtAboveBound { dt: self.dt, bound });
        }
        Ok(())
    }
}

/// Explicit-part positivity bound on `dt`. The decay rates of both fields
/// plus the kernel norm enter; state-dependent incidence rates (malaria,
/// SIR) are additionally guarded at run time.
pub fn positivity_bound(model: &ModelSpec, operators: &Operators) -> f64 {
    let k_norm = operators.kernel.infinity_norm();
    let rate = match model.kind {
        ModelKind::SirKendall { mu, recovery, .. } => mu + recovery + k_norm,
        _ => model.a11 + model.gamma() + model.a22 + k_norm,
    };
    if rate <= 0.0 {
        f64::INFINITY
    } else {
        1.0 / rate
    }
}

/// Nodal fields of one time level: `(u1, u2)`, or `(s, i, r)` for SIR runs.
#[derive(Debug, Clone)]
pub struct State {
    pub fields: Vec<DVector<f64>>,
}

impl State {
    pub fn pair(u1: DVector<f64>, u2: DVector<f64>) -> Self {
        Self { fields: vec![u1, u2] }
    }

    pub fn sir(s: DVector<f64>, i: DVector<f64>, r: DVector<f64>) -> Self {
        Self { fields: vec![s, i, r] }
    }

    pub fn constant(n: usize, values: &[f64]) -> Self {
        Self {
            fields: values.iter().map(|&v| DVector::from_element(n, v)).collect(),
        }
    }

    pub fn sup_norms(&self) -> Vec<f64> {
        self.fields.iter().map(|f| f.amax()).collect()
    }

    pub fn min_value(&self) -> f64 {
        self.fields
            .iter()
            .map(|f| f.iter().copied().fold(f64::INFINITY, f64::min))
            .fold(f64::INFINITY, f64::min)
    }

    fn max_change(&self, other: &State) -> f64 {
        self.fields
            .iter()
            .zip(&other.fields)
            .map(|(a, b)| (a - b).amax())
            .fold(0.0, f64::max)
    }
}

/// Stored history of a run: per-step norms and integrals of every field,
/// snapshots at a stride, and optionally the dense state sequence.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// `sup_norms[k][f]` is the sup norm of field `f` at step `k`.
    pub sup_norms: Vec<Vec<f64>>,
    pub integrals: Vec<Vec<f64>>,
    pub snapshots: Vec<(usize, State)>,
    /// Every stored step, when the config asked for dense storage.
    pub states: Option<Vec<State>>,
    pub dt: f64,
    pub scheme: Scheme,
    pub labels: Vec<&'static str>,
    /// Smallest nodal value seen over all steps and fields.
    pub min_value: f64,
}

impl Trajectory {
    pub fn end_time(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn final_state(&self) -> &State {
        &self.snapshots.last().unwrap().1
    }

    /// Time series as CSV: `t`, then sup norms, then integrals per field.
    pub fn write_time_series_csv<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        write!(w, "t")?;
        for label in &self.labels {
            write!(w, ",sup_{label}")?;
        }
        for label in &self.labels {
            write!(w, ",int_{label}")?;
        }
        writeln!(w)?;
        for k in 0..self.times.len() {
            write!(w, "{}", self.times[k])?;
            for v in &self.sup_norms[k] {
                write!(w, ",{v}")?;
            }
            for v in &self.integrals[k] {
                write!(w, ",{v}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// Snapshot fields as CSV: node index, coordinates, then one column per field.
pub fn write_snapshot_csv<W: Write>(
    domain: &Domain,
    state: &State,
    labels: &[&str],
    w: &mut W,
) -> std::io::Result<()> {
    write!(w, "node")?;
    for axis in 0..domain.dimension() {
        write!(w, ",{}", ["x", "y"][axis])?;
    }
    for label in labels {
        write!(w, ",{label}")?;
    }
    writeln!(w)?;
    for i in 0..domain.node_count() {
        write!(w, "{i}")?;
        for c in domain.coord(i) {
            write!(w, ",{c}")?;
        }
        for f in &state.fields {
            write!(w, ",{}", f[i])?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Prefactored stepping context for one (model, operators, config) triple.
pub struct Stepper<'a> {
    operators: &'a Operators,
    model: &'a ModelSpec,
    region: Option<&'a ControlRegion>,
    scheme: Scheme,
    dt: f64,
    /// Per-field diffusion matrix and solver; `None` for non-diffusing fields.
    diffusion: Vec<Option<(SparseMatrix, ImplicitSolver)>>,
}

impl<'a> Stepper<'a> {
    pub fn new(
        operators: &'a Operators,
        model: &'a ModelSpec,
        region: Option<&'a ControlRegion>,
        config: &SolverConfig,
    ) -> Result<Self, IntegratorError> {
        config.validate(model, operators)?;
        let dt = config.dt;
        let implicit_dt = match config.scheme {
            Scheme::BackwardEulerDiffusion => dt,
            Scheme::CrankNicolsonDiffusion => 0.5 * dt,
        };
        let weights = operators.domain.weights();
        let build = |robin: &RobinOperator| {
            let m = robin.matrix().identity_plus_scaled(implicit_dt);
            let solver = ImplicitSolver::new(&m, weights);
            (robin.matrix().clone(), solver)
        };
        let diffusion = match model.kind {
            ModelKind::SirKendall { d2, d3, .. } => {
                let alpha = operators.robin.alpha();
                let l2 = assemble_robin_laplacian(&operators.domain, d2, alpha)
                    .map_err(|e| IntegratorError::InvalidConfig(e.to_string()))?;
                let l3 = assemble_robin_laplacian(&operators.domain, d3, alpha)
                    .map_err(|e| IntegratorError::InvalidConfig(e.to_string()))?;
                vec![
                    Some(build(&operators.robin)),
                    Some(build(&l2)),
                    Some(build(&l3)),
                ]
            }
            _ => vec![Some(build(&operators.robin)), None],
        };
        Ok(Self {
            operators,
            model,
            region,
            scheme: config.scheme,
            dt,
            diffusion,
        })
    }

    fn reaction(&self, t: f64, state: &State) -> Result<Vec<DVector<f64>>, IntegratorError> {
        let ops = self.operators;
        match self.model.kind {
            ModelKind::SirKendall { .. } => {
                let (ds, di, dr) = models::rhs_sir_kendall(
                    &ops.domain,
                    &ops.kernel,
                    self.model,
                    &state.fields[0],
                    &state.fields[1],
                    &state.fields[2],
                )?;
                Ok(vec![ds, di, dr])
            }
            ModelKind::Malaria { .. } => {
                let (du1, du2) = models::rhs_malaria(
                    &ops.domain,
                    &ops.kernel,
                    self.model,
                    &state.fields[0],
                    &state.fields[1],
                )?;
                Ok(vec![du1, du2])
            }
            _ => {
                let (du1, du2) = models::rhs_core(
                    &ops.domain,
                    &ops.kernel,
                    self.model,
                    self.region,
                    t,
                    &state.fields[0],
                    &state.fields[1],
                )?;
                Ok(vec![du1, du2])
            }
        }
    }

    /// Guard against state-dependent incidence rates that outrun the
    /// configured positivity bound.
    fn check_state_rates(&self, state: &State, dt_sub: f64) -> Result<(), IntegratorError> {
        let rate = match &self.model.kind {
            ModelKind::Malaria { .. } => {
                let hmax = state.fields[0]
                    .iter()
                    .map(|&v| self.model.foi.eval(v))
                    .fold(0.0, f64::max);
                self.model.a22 + hmax
            }
            ModelKind::SirKendall { mu, .. } => {
                let foi_max = self.operators.kernel.apply(&state.fields[1]).amax();
                mu + foi_max
            }
            _ => return Ok(()),
        };
        if dt_sub * rate > 1.0 + 1e-9 {
            return Err(IntegratorError::StateBoundExceeded { rate, dt: dt_sub });
        }
        Ok(())
    }

    fn euler(&self, t: f64, state: &State, dt_sub: f64) -> Result<State, IntegratorError> {
        self.check_state_rates(state, dt_sub)?;
        let r = self.reaction(t, state)?;
        let fields = state
            .fields
            .iter()
            .zip(&r)
            .map(|(u, du)| u + dt_sub * du)
            .collect();
        Ok(State { fields })
    }

    /// Second-order explicit (Heun) update of the reaction subsystem.
    fn heun(&self, t: f64, state: &State, dt_sub: f64) -> Result<State, IntegratorError> {
        self.check_state_rates(state, dt_sub)?;
        let k1 = self.reaction(t, state)?;
        let predictor = State {
            fields: state
                .fields
                .iter()
                .zip(&k1)
                .map(|(u, du)| u + dt_sub * du)
                .collect(),
        };
        let k2 = self.reaction(t + dt_sub, &predictor)?;
        let fields = state
            .fields
            .iter()
            .zip(k1.iter().zip(&k2))
            .map(|(u, (a, b))| u + 0.5 * dt_sub * (a + b))
            .collect();
        Ok(State { fields })
    }

    /// Advances one step from time `t`.
    pub fn step(&self, state: &State, t: f64) -> Result<State, IntegratorError> {
        match self.scheme {
            Scheme::BackwardEulerDiffusion => {
                let mut next = self.euler(t, state, self.dt)?;
                for (f, diff) in self.diffusion.iter().enumerate() {
                    if let Some((_, solver)) = diff {
                        next.fields[f] = solver.solve(&next.fields[f])?;
                    }
                }
                Ok(next)
            }
            Scheme::CrankNicolsonDiffusion => {
                let mut mid = self.heun(t, state, 0.5 * self.dt)?;
                for (f, diff) in self.diffusion.iter().enumerate() {
                    if let Some((l, solver)) = diff {
                        let rhs = &mid.fields[f] - 0.5 * self.dt * l.apply(&mid.fields[f]);
                        mid.fields[f] = solver.solve(&rhs)?;
                    }
                }
                self.heun(t + 0.5 * self.dt, &mid, 0.5 * self.dt)
            }
        }
    }
}

/// Runs the model from nonnegative initial data and records the trajectory.
pub fn simulate(
    initial: &State,
    operators: &Operators,
    model: &ModelSpec,
    region: Option<&ControlRegion>,
    config: &SolverConfig,
) -> Result<Trajectory, IntegratorError> {
    let min0 = initial.min_value();
    if min0 < 0.0 {
        return Err(IntegratorError::NegativeInitialData { min: min0 });
    }
    let stepper = Stepper::new(operators, model, region, config)?;
    let n_steps = (config.end_time / config.dt - 1e-9).ceil().max(1.0) as usize;

    let mut traj = Trajectory {
        times: Vec::with_capacity(n_steps + 1),
        sup_norms: Vec::with_capacity(n_steps + 1),
        integrals: Vec::with_capacity(n_steps + 1),
        snapshots: Vec::new(),
        states: config.store_every_step.then(Vec::new),
        dt: config.dt,
        scheme: config.scheme,
        labels: model.field_labels().to_vec(),
        min_value: f64::INFINITY,
    };

    let record = |traj: &mut Trajectory, step: usize, state: &State| {
        traj.times.push(step as f64 * config.dt);
        traj.sup_norms.push(state.sup_norms());
        traj.integrals
            .push(state.fields.iter().map(|f| operators.domain.integrate(f)).collect());
        traj.min_value = traj.min_value.min(state.min_value());
        if step % config.snapshot_stride == 0 || step == n_steps {
            traj.snapshots.push((step, state.clone()));
        }
        if let Some(states) = &mut traj.states {
            states.push(state.clone());
        }
    };

    let mut state = initial.clone();
    record(&mut traj, 0, &state);
    for step in 1..=n_steps {
        state = stepper.step(&state, (step - 1) as f64 * config.dt)?;
        record(&mut traj, step, &state);
    }
    Ok(traj)
}

/// Least-squares slope of `log(sup norm)` over the trailing `window` of the
/// run; the decay rate is the negated slope.
pub fn measure_decay_rate(
    trajectory: &Trajectory,
    field: usize,
    window: f64,
) -> Result<f64, IntegratorError> {
    let t_end = trajectory.end_time();
    let mut ts = Vec::new();
    let mut logs = Vec::new();
    for (k, &t) in trajectory.times.iter().enumerate() {
        if t >= t_end - window - 1e-12 {
            let norm = trajectory.sup_norms[k][field];
            if norm < 1e-300 {
                return Err(IntegratorError::NormUnderflow);
            }
            ts.push(t);
            logs.push(norm.ln());
        }
    }
    if ts.len() < 2 {
        return Err(IntegratorError::WindowTooShort);
    }
    let n = ts.len() as f64;
    let mean_t = ts.iter().sum::<f64>() / n;
    let mean_l = logs.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var = 0.0;
    for (t, l) in ts.iter().zip(&logs) {
        cov += (t - mean_t) * (l - mean_l);
        var += (t - mean_t) * (t - mean_t);
    }
    Ok(-(cov / var))
}

/// Steps until the relative time-derivative norm falls below the steady
/// tolerance, or the horizon runs out.
pub fn steady_state(
    initial: &State,
    operators: &Operators,
    model: &ModelSpec,
    region: Option<&ControlRegion>,
    config: &SolverConfig,
) -> Result<(State, f64), IntegratorError> {
    let min0 = initial.min_value();
    if min0 < 0.0 {
        return Err(IntegratorError::NegativeInitialData { min: min0 });
    }
    let stepper = Stepper::new(operators, model, region, config)?;
    let n_steps = (config.end_time / config.dt - 1e-9).ceil().max(1.0) as usize;
    let mut state = initial.clone();
    let mut residual = f64::INFINITY;
    for step in 0..n_steps {
        let next = stepper.step(&state, step as f64 * config.dt)?;
        residual = next.max_change(&state) / config.dt;
        state = next;
        if residual < config.steady_tol {
            return Ok((state, residual));
        }
    }
    Err(IntegratorError::NotConverged { residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_domain, build_kernel, KernelFamily};
    use crate::models::{FoiFamily, ForceOfInfection};

    fn operators(n: usize, d1: f64, alpha: f64, kernel: KernelFamily, amp: f64) -> Operators {
        let domain = build_domain(1, &[1.0], &[n]).unwrap();
        let robin = assemble_robin_laplacian(&domain, d1, alpha).unwrap();
        let kernel = build_kernel(&domain, kernel, amp).unwrap();
        Operators { domain, robin, kernel }
    }

    fn core_model(a11: f64, a22: f64, k: f64) -> ModelSpec {
        ModelSpec::new(
            ModelKind::Core,
            a11,
            a22,
            ForceOfInfection::new(FoiFamily::Linear { k }).unwrap(),
        )
        .unwrap()
    }

    fn config(dt: f64, end: f64, scheme: Scheme) -> SolverConfig {
        SolverConfig {
            dt,
            end_time: end,
            scheme,
            snapshot_stride: 64,
            store_every_step: false,
            steady_tol: 1e-9,
        }
    }

    #[test]
    fn zero_state_stays_zero() {
        let ops = operators(16, 0.5, 0.0, KernelFamily::Delta, 1.0);
        let model = core_model(1.0, 1.0, 1.0);
        for scheme in [Scheme::BackwardEulerDiffusion, Scheme::CrankNicolsonDiffusion] {
            let cfg = config(0.05, 1.0, scheme);
            let traj = simulate(&State::constant(16, &[0.0, 0.0]), &ops, &model, None, &cfg).unwrap();
            assert_eq!(traj.final_state().fields[0].amax(), 0.0);
            assert_eq!(traj.final_state().fields[1].amax(), 0.0);
        }
    }

    #[test]
    fn crank_nicolson_conserves_mass_without_sources() {
        // Pure Neumann diffusion of u1: zero kernel, zero decay.
        let ops = operators(32, 1.0, 0.0, KernelFamily::Delta, 0.0);
        let model = core_model(0.0, 1.0, 1.0);
        let cfg = config(0.02, 2.0, Scheme::CrankNicolsonDiffusion);
        let bump = DVector::from_fn(32, |i, _| (-(i as f64 / 31.0 - 0.3f64).powi(2) / 0.02).exp());
        let initial = State::pair(bump, DVector::zeros(32));
        let traj = simulate(&initial, &ops, &model, None, &cfg).unwrap();
        let m0 = traj.integrals[0][0];
        let steps = traj.times.len() as f64;
        for row in &traj.integrals {
            assert!((row[0] - m0).abs() <= 1e-10 * steps);
        }
    }

    #[test]
    fn linearity_doubles_with_initial_data() {
        let ops = operators(24, 0.05, 0.0, KernelFamily::Gaussian { sigma: 0.15 }, 1.0);
        let model = core_model(1.0, 1.0, 2.0);
        let cfg = config(0.05, 1.5, Scheme::CrankNicolsonDiffusion);
        let u1 = DVector::from_fn(24, |i, _| 0.2 + (i as f64 * 0.3).sin().abs());
        let u2 = DVector::from_fn(24, |i, _| 0.1 + 0.01 * i as f64);
        let a = simulate(&State::pair(u1.clone(), u2.clone()), &ops, &model, None, &cfg).unwrap();
        let b = simulate(&State::pair(2.0 * u1, 2.0 * u2), &ops, &model, None, &cfg).unwrap();
        for f in 0..2 {
            let fa = &a.final_state().fields[f];
            let fb = &b.final_state().fields[f];
            assert!((2.0 * fa - fb).amax() <= 1e-10 * fb.amax().max(1.0));
        }
    }

    #[test]
    fn dt_bound_is_enforced() {
        let ops = operators(16, 0.5, 0.0, KernelFamily::Delta, 1.0);
        let model = core_model(4.0, 1.0, 1.0);
        // bound = 1/(4 + 0 + 1 + 1) ~ 0.1667
        let cfg = config(0.5, 1.0, Scheme::BackwardEulerDiffusion);
        let err = simulate(&State::constant(16, &[1.0, 1.0]), &ops, &model, None, &cfg);
        assert!(matches!(err, Err(IntegratorError::DtAboveBound { .. })));
    }

    #[test]
    fn synthetic_exponential_decay_rate() {
        let times: Vec<f64> = (0..200).map(|k| k as f64 * 0.05).collect();
        let sup_norms: Vec<Vec<f64>> = times.iter().map(|t| vec![(-2.0 * t).exp()]).collect();
        let traj = Trajectory {
            integrals: sup_norms.clone(),
            times,
            sup_norms,
            snapshots: vec![(0, State::constant(4, &[1.0]))],
            states: None,
            dt: 0.05,
            scheme: Scheme::BackwardEulerDiffusion,
            labels: vec!["u1"],
            min_value: 0.0,
        };
        let rate = measure_decay_rate(&traj, 0, 5.0).unwrap();
        assert!((rate - 2.0).abs() <= 1e-8);
    }

    #[test]
    fn zero_initial_data_is_steady() {
        let ops = operators(16, 0.5, 0.0, KernelFamily::Delta, 1.0);
        let model = core_model(1.0, 1.0, 1.0);
        let cfg = config(0.05, 2.0, Scheme::BackwardEulerDiffusion);
        let (state, residual) = steady_state(&State::constant(16, &[0.0, 0.0]), &ops, &model, None, &cfg).unwrap();
        assert_eq!(state.fields[0].amax(), 0.0);
        assert_eq!(residual, 0.0);
    }

    #[test]
    fn trajectory_norms_match_snapshots() {
        let ops = operators(16, 0.1, 0.0, KernelFamily::Delta, 1.0);
        let model = core_model(1.0, 1.0, 1.0);
        let mut cfg = config(0.05, 1.0, Scheme::BackwardEulerDiffusion);
        cfg.snapshot_stride = 5;
        let initial = State::constant(16, &[1.0, 0.5]);
        let traj = simulate(&initial, &ops, &model, None, &cfg).unwrap();
        assert!(traj.times.windows(2).all(|w| w[1] > w[0]));
        for (step, state) in &traj.snapshots {
            for f in 0..2 {
                assert_eq!(state.fields[f].amax(), traj.sup_norms[*step][f]);
            }
        }
    }

    #[test]
    fn negative_initial_data_rejected() {
        let ops = operators(16, 0.1, 0.0, KernelFamily::Delta, 1.0);
        let model = core_model(1.0, 1.0, 1.0);
        let cfg = config(0.05, 1.0, Scheme::BackwardEulerDiffusion);
        let mut bad = State::constant(16, &[1.0, 0.0]);
        bad.fields[1][3] = -0.2;
        assert!(matches!(
            simulate(&bad, &ops, &model, None, &cfg),
            Err(IntegratorError::NegativeInitialData { .. })
        ));
    }
}
