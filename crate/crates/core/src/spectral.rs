//! Principal eigenvalue of the linearized epidemic operator by three routes:
//! direct inverse power iteration on the assembled matrix, the
//! logistic-dynamics estimator, and a period-map method for the
//! time-periodic problems.
//!
//! The operator of interest is
//! `A = -d1 Laplacian + a11 - (a21/a22) K + gamma chi_omega`
//! with Robin boundary rows, either on the whole habitat (the feedback
//! eigenvalue) or with Dirichlet elimination on the closure of the control
//! region (the complement eigenvalue). Its off-diagonal entries are
//! nonpositive, so for a large enough shift `sigma` the matrix `A + sigma I`
//! is an M-matrix and inverse power iteration converges to the smallest-real
//! eigenvalue with a nonnegative eigenvector.
//!
//! The logistic route integrates
//! `dy/dt = -A y + zeta y - (int y) y`, `y(0) = y0 > 0`:
//! the total mass settles to `zeta - lambda`, so `lambda = zeta - lim int y`.
//! Any positive constant `y0` and any shift `zeta > lambda` give the same
//! limit. Both routes share the same discrete operator, so their agreement
//! checks convergence rather than discretization.

use crate::grid::{
    complement_connected, restrict_to_complement, ControlRegion, ImplicitSolver,
    LinearSolveFailure, SparseMatrix,
};
use crate::integrator::Operators;
use crate::models::{ModelError, ModelSpec, Seasonality};
use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, thiserror::Error)]
pub enum SpectralError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Linear(#[from] LinearSolveFailure),
    #[error("a22 must be positive to scale the kernel coupling, got {0}")]
    ZeroRecoveryRate(f64),
    #[error("inverse power iteration did not reach residual {tol}; best {best}")]
    NoConvergence { tol: f64, best: f64 },
    #[error("computed eigenvector is not positive (min entry {min}); the kernel violates the nonnegativity hypothesis or the discretization is inconsistent")]
    NonPositiveEigenvector { min: f64 },
    #[error("logistic mass collapsed: zeta = {zeta} is not above the principal eigenvalue")]
    ZetaTooSmall { zeta: f64 },
    #[error("logistic integral did not settle within the horizon (last gap {gap})")]
    NotConverged { gap: f64 },
    #[error("period-map multiplier {rho} is not positive; discretization too coarse")]
    NonPositiveMultiplier { rho: f64 },
    #[error("invalid spectral configuration: {0}")]
    InvalidConfig(String),
}

/// Coefficients of the linearization around zero: the decay rates and the
/// slope multiplying the kernel coupling (`a21`, or `g'(0)` for the local
/// variants).
#[derive(Debug, Clone, Copy)]
pub struct LinearizedCoefficients {
    pub a11: f64,
    pub a22: f64,
    pub slope: f64,
}

impl LinearizedCoefficients {
    /// Linearization with the global bound `a21` of the force of infection.
    pub fn from_model(spec: &ModelSpec) -> Result<Self, SpectralError> {
        Ok(Self {
            a11: spec.a11,
            a22: spec.a22,
            slope: spec.foi.a21()?,
        })
    }

    /// Linearization with the slope of `g` at zero, when it exists.
    pub fn from_model_at_zero(spec: &ModelSpec) -> Result<Self, SpectralError> {
        let slope = spec
            .foi
            .slope_at_zero()
            .ok_or(SpectralError::Model(ModelError::UnboundedSlope))?;
        Ok(Self {
            a11: spec.a11,
            a22: spec.a22,
            slope,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EigenMethod {
    Direct,
    DirichletComplement,
    Logistic,
    PeriodMap,
}

impl EigenMethod {
    pub fn tag(&self) -> &'static str {
        match self {
            EigenMethod::Direct => "direct",
            EigenMethod::DirichletComplement => "dirichlet-complement",
            EigenMethod::Logistic => "logistic",
            EigenMethod::PeriodMap => "period-map",
        }
    }
}

/// Principal eigenvalue with its positive eigenvector (`sup` norm one).
#[derive(Debug, Clone)]
pub struct EigenPair {
    pub lambda: f64,
    pub phi: DVector<f64>,
    pub residual: f64,
    pub method: EigenMethod,
    pub iterations: usize,
}

/// Builds the dense eigen operator
/// `A = L + a11 I - (slope/a22) K + gamma diag(chi)`.
pub fn assemble_eigen_operator(
    operators: &Operators,
    coeffs: &LinearizedCoefficients,
    region: Option<&ControlRegion>,
    gamma: f64,
) -> Result<DMatrix<f64>, SpectralError> {
    assemble_eigen_dense(
        &operators.robin.to_dense(),
        operators.kernel.matrix(),
        coeffs,
        region.map(|r| r.indicator()),
        gamma,
    )
}

/// Dense assembly from raw matrices; exposed for small hand-built cases.
pub fn assemble_eigen_dense(
    laplacian: &DMatrix<f64>,
    kernel: &DMatrix<f64>,
    coeffs: &LinearizedCoefficients,
    indicator: Option<&[bool]>,
    gamma: f64,
) -> Result<DMatrix<f64>, SpectralError> {
    if !(coeffs.a22 > 0.0) {
        return Err(SpectralError::ZeroRecoveryRate(coeffs.a22));
    }
    let n = laplacian.nrows();
    let mut a = laplacian.clone();
    let scale = coeffs.slope / coeffs.a22;
    for i in 0..n {
        for j in 0..n {
            a[(i, j)] -= scale * kernel[(i, j)];
        }
        a[(i, i)] += coeffs.a11;
        if let Some(chi) = indicator {
            if chi[i] {
                a[(i, i)] += gamma;
            }
        }
    }
    Ok(a)
}

const RESIDUAL_TOL: f64 = 1e-8;
const MAX_POWER_ITERATIONS: usize = 200_000;

/// Smallest-real eigenvalue and Perron eigenvector of a matrix with the
/// `-(positive off-diagonal generator) + diagonal` sign structure, by
/// inverse power iteration on `(A + sigma I)^{-1}`. The Gershgorin shift
/// makes the iteration matrix inverse-positive; on solver failure the shift
/// is doubled and the iteration restarted.
pub fn principal_eigenvalue_direct(a: &DMatrix<f64>) -> Result<EigenPair, SpectralError> {
    let pair = inverse_power_smallest(a)?;
    check_positivity(a, &pair)?;
    Ok(pair)
}

fn inverse_power_smallest(a: &DMatrix<f64>) -> Result<EigenPair, SpectralError> {
    let n = a.nrows();
    let gershgorin_min = (0..n)
        .map(|i| {
            let off: f64 = (0..n).filter(|&j| j != i).map(|j| a[(i, j)].abs()).sum();
            a[(i, i)] - off
        })
        .fold(f64::INFINITY, f64::min);
    let mut sigma = 1.0 + (-gershgorin_min).max(0.0);

    for _attempt in 0..6 {
        let shifted = {
            let mut m = a.clone();
            for i in 0..n {
                m[(i, i)] += sigma;
            }
            m
        };
        let lu = shifted.lu();
        let mut v = DVector::from_element(n, 1.0);
        let mut best_residual = f64::INFINITY;
        let mut best: Option<(f64, DVector<f64>, usize)> = None;
        let mut failed = false;
        for it in 1..=MAX_POWER_ITERATIONS {
            let z = match lu.solve(&v) {
                Some(z) if z.iter().all(|x| x.is_finite()) => z,
                _ => {
                    failed = true;
                    break;
                }
            };
            let norm = z.amax();
            if norm == 0.0 {
                failed = true;
                break;
            }
            let phi = z / norm;
            let lambda = phi.dot(&(a * &phi)) / phi.dot(&phi);
            let residual = (a * &phi - lambda * &phi).amax();
            if residual < best_residual {
                best_residual = residual;
                best = Some((lambda, phi.clone(), it));
            }
            if residual <= RESIDUAL_TOL {
                break;
            }
            v = phi;
        }
        if !failed {
            if let Some((lambda, phi, iterations)) = best {
                if best_residual <= RESIDUAL_TOL {
                    return Ok(EigenPair {
                        lambda,
                        phi,
                        residual: best_residual,
                        method: EigenMethod::Direct,
                        iterations,
                    });
                }
                return Err(SpectralError::NoConvergence {
                    tol: RESIDUAL_TOL,
                    best: best_residual,
                });
            }
        }
        sigma *= 2.0;
    }
    Err(SpectralError::NoConvergence {
        tol: RESIDUAL_TOL,
        best: f64::INFINITY,
    })
}

/// The Perron eigenvector must be nonnegative always, and strictly positive
/// when the coupling graph of the operator is irreducible.
fn check_positivity(a: &DMatrix<f64>, pair: &EigenPair) -> Result<(), SpectralError> {
    let mut phi = pair.phi.clone();
    if phi.sum() < 0.0 {
        phi.neg_mut();
    }
    let min = phi.min();
    if min < -1e-10 {
        return Err(SpectralError::NonPositiveEigenvector { min });
    }
    if irreducible(a) && min <= 0.0 {
        return Err(SpectralError::NonPositiveEigenvector { min });
    }
    Ok(())
}

fn irreducible(a: &DMatrix<f64>) -> bool {
    let n = a.nrows();
    let mut seen = vec![false; n];
    let mut stack = vec![0usize];
    seen[0] = true;
    let mut count = 0;
    while let Some(i) = stack.pop() {
        count += 1;
        for j in 0..n {
            if !seen[j] && (a[(i, j)] != 0.0 || a[(j, i)] != 0.0) {
                seen[j] = true;
                stack.push(j);
            }
        }
    }
    count == n
}

/// Principal eigenvalue of the operator on the complement of the region
/// closure, with Dirichlet elimination at region nodes. The eigenvector is
/// reported as zero inside the region. Warns when the complement is not
/// node-connected through the coupling graph.
pub fn principal_eigenvalue_dirichlet_complement(
    operators: &Operators,
    coeffs: &LinearizedCoefficients,
    region: &ControlRegion,
) -> Result<EigenPair, SpectralError> {
    if !complement_connected(&operators.domain, &operators.kernel, region.indicator()) {
        eprintln!(
            "warning: complement of the control region is not node-connected; \
             the principal eigenvector may vanish on some components"
        );
    }
    let a = assemble_eigen_operator(operators, coeffs, None, 0.0)?;
    let active: Vec<usize> = (0..operators.domain.node_count())
        .filter(|&i| !region.indicator()[i])
        .collect();
    principal_eigenvalue_on_active(&a, &active, operators.domain.node_count())
}

/// Inverse power iteration on the submatrix over `active` nodes, re-embedded
/// as a full-length eigenvector with zeros elsewhere.
pub fn principal_eigenvalue_on_active(
    a: &DMatrix<f64>,
    active: &[usize],
    n_total: usize,
) -> Result<EigenPair, SpectralError> {
    let m = active.len();
    let sub = DMatrix::from_fn(m, m, |i, j| a[(active[i], active[j])]);
    let pair = inverse_power_smallest(&sub)?;
    check_positivity(&sub, &pair)?;
    let mut phi = DVector::zeros(n_total);
    for (k, &i) in active.iter().enumerate() {
        phi[i] = pair.phi[k];
    }
    Ok(EigenPair {
        lambda: pair.lambda,
        phi,
        residual: pair.residual,
        method: EigenMethod::DirichletComplement,
        iterations: pair.iterations,
    })
}

/// Configuration of the logistic-dynamics run.
#[derive(Debug, Clone)]
pub struct LogisticConfig {
    /// Requested time step; capped internally by the positivity bound of the
    /// logistic reaction.
    pub dt: f64,
    pub max_time: f64,
    /// The estimate settles when two consecutive recorded masses differ by
    /// at most this.
    pub settle_tol: f64,
    /// Time between recorded masses.
    pub check_interval: f64,
    /// Initial constant level; any positive value gives the same limit.
    pub y0: f64,
    pub min_time: f64,
}

impl Default for LogisticConfig {
    fn default() -> Self {
        Self {
            dt: 0.05,
            max_time: 600.0,
            settle_tol: 1e-8,
            check_interval: 0.5,
            y0: 1.0,
            min_time: 1.0,
        }
    }
}

/// Result of the logistic estimator.
#[derive(Debug, Clone)]
pub struct LogisticEstimate {
    pub zeta: f64,
    pub lambda_hat: f64,
    /// Final integration time.
    pub horizon: f64,
    /// Recorded `(t, int y)` history.
    pub history: Vec<(f64, f64)>,
    pub y0: f64,
}

/// Estimates the principal eigenvalue of the feedback operator by running
/// the logistic dynamics until the total mass settles;
/// `lambda_hat = zeta - lim int y`. Fails with [`SpectralError::ZetaTooSmall`]
/// when the mass collapses, in which case the caller should retry with a
/// larger shift.
pub fn principal_eigenvalue_logistic(
    operators: &Operators,
    coeffs: &LinearizedCoefficients,
    region: Option<&ControlRegion>,
    gamma: f64,
    zeta: f64,
    config: &LogisticConfig,
) -> Result<LogisticEstimate, SpectralError> {
    if !(coeffs.a22 > 0.0) {
        return Err(SpectralError::ZeroRecoveryRate(coeffs.a22));
    }
    if !(config.y0 > 0.0) {
        return Err(SpectralError::InvalidConfig(format!(
            "y0 must be positive, got {}",
            config.y0
        )));
    }
    let n = operators.domain.node_count();
    let scale = coeffs.slope / coeffs.a22;
    let decay = DVector::from_fn(n, |i, _| {
        coeffs.a11
            + match region {
                Some(r) if r.indicator()[i] => gamma,
                _ => 0.0,
            }
    });

    let mass0 = config.y0 * operators.domain.measure();
    let growth_cap = scale.max(0.0) * operators.kernel.infinity_norm();
    let stiffness = coeffs.a11 + gamma + (mass0 - zeta).max(growth_cap).max(0.0);
    let dt = config.dt.min(0.5 / stiffness.max(1e-6));

    let matrix = operators.robin.matrix().identity_plus_scaled(dt);
    let solver = ImplicitSolver::new(&matrix, operators.domain.weights());

    let mut y = DVector::from_element(n, config.y0);
    let mut history = vec![(0.0, mass0)];
    let mut t = 0.0;
    let mut next_check = config.check_interval;
    let steps = (config.max_time / dt).ceil() as usize;
    for _ in 0..steps {
        let mass = operators.domain.integrate(&y);
        if mass < 1e-10 * mass0.max(1.0) {
            return Err(SpectralError::ZetaTooSmall { zeta });
        }
        let coupling = operators.kernel.apply(&y);
        let explicit = DVector::from_fn(n, |i, _| {
            y[i] + dt * (scale * coupling[i] + (zeta - decay[i] - mass) * y[i])
        });
        y = solver.solve(&explicit)?;
        t += dt;
        if t + 1e-12 >= next_check {
            let mass_now = operators.domain.integrate(&y);
            let (_, last) = *history.last().unwrap();
            history.push((t, mass_now));
            next_check += config.check_interval;
            if t >= config.min_time && (mass_now - last).abs() <= config.settle_tol {
                // A mass that settles at a negligible level is a decay to
                // zero in disguise: the shift sits below the eigenvalue.
                if mass_now <= 1e-6 * mass0.max(1.0) {
                    return Err(SpectralError::ZetaTooSmall { zeta });
                }
                return Ok(LogisticEstimate {
                    zeta,
                    lambda_hat: zeta - mass_now,
                    horizon: t,
                    history,
                    y0: config.y0,
                });
            }
        }
    }
    let gap = history
        .last()
        .zip(history.iter().rev().nth(1))
        .map(|(a, b)| (a.1 - b.1).abs())
        .unwrap_or(f64::INFINITY);
    Err(SpectralError::NotConverged { gap })
}

/// Logistic estimator with the shift-retry policy: start at
/// `zeta = a11 + gamma + 1` and escalate while the mass collapses.
pub fn principal_eigenvalue_logistic_auto(
    operators: &Operators,
    coeffs: &LinearizedCoefficients,
    region: Option<&ControlRegion>,
    gamma: f64,
    config: &LogisticConfig,
) -> Result<LogisticEstimate, SpectralError> {
    let mut zeta = coeffs.a11 + gamma + 1.0;
    for _ in 0..8 {
        match principal_eigenvalue_logistic(operators, coeffs, region, gamma, zeta, config) {
            Err(SpectralError::ZetaTooSmall { .. }) => {
                zeta = 2.0 * zeta.abs() + 1.0;
            }
            other => return other,
        }
    }
    Err(SpectralError::ZetaTooSmall { zeta })
}

/// Configuration of the period-map eigenvalue solver.
#[derive(Debug, Clone)]
pub struct PeriodicConfig {
    /// Requested step; capped by the explicit positivity bound and rounded
    /// so a period is a whole number of steps.
    pub dt: f64,
    /// Power-iteration periods per shift value.
    pub max_periods: usize,
    /// Multiplier settle tolerance of the inner power iteration.
    pub multiplier_tol: f64,
    /// Outer stop: `|ln rho| / T` below this.
    pub shift_tol: f64,
    pub max_shift_iterations: usize,
    /// Number of phases at which the eigenfunction pair is stored.
    pub stored_phases: usize,
}

impl Default for PeriodicConfig {
    fn default() -> Self {
        Self {
            dt: 0.01,
            max_periods: 4000,
            multiplier_tol: 1e-11,
            shift_tol: 1e-7,
            max_shift_iterations: 80,
            stored_phases: 8,
        }
    }
}

/// Principal eigenvalue of the periodic problem on the complement, with the
/// eigenfunction pair sampled over one period.
#[derive(Debug, Clone)]
pub struct PeriodicEigenPair {
    pub lambda: f64,
    /// Dominant period-map multiplier at the converged shift (one up to the
    /// shift tolerance).
    pub multiplier: f64,
    /// `(phase, phi, psi)` samples over one period.
    pub phases: Vec<(f64, DVector<f64>, DVector<f64>)>,
    /// `||(phi, psi)(T) - (phi, psi)(0)||_inf` after normalization.
    pub periodicity_residual: f64,
    /// Total periods integrated over all shifts.
    pub iterations: usize,
}

struct PeriodMap<'a> {
    laplacian: &'a SparseMatrix,
    kernel: &'a DMatrix<f64>,
    weights: &'a DVector<f64>,
    coeffs: LinearizedCoefficients,
    seasonality: &'a Seasonality,
    period: f64,
}

impl PeriodMap<'_> {
    /// One Heun update of the coupled reaction over `dt` starting at `t`.
    fn reaction(
        &self,
        shift: f64,
        t: f64,
        dt: f64,
        phi: &DVector<f64>,
        psi: &DVector<f64>,
    ) -> (DVector<f64>, DVector<f64>) {
        let eval = |t: f64, phi: &DVector<f64>, psi: &DVector<f64>| {
            let coupling = self.kernel * psi;
            let p = self.seasonality.eval(t);
            let dphi = DVector::from_fn(phi.len(), |i, _| {
                (shift - self.coeffs.a11) * phi[i] + coupling[i]
            });
            let dpsi = DVector::from_fn(psi.len(), |i, _| {
                -self.coeffs.a22 * psi[i] + self.coeffs.slope * p * phi[i]
            });
            (dphi, dpsi)
        };
        let (k1p, k1s) = eval(t, phi, psi);
        let (pp, ps) = (phi + dt * &k1p, psi + dt * &k1s);
        let (k2p, k2s) = eval(t + dt, &pp, &ps);
        (
            phi + 0.5 * dt * (k1p + k2p),
            psi + 0.5 * dt * (k1s + k2s),
        )
    }

    /// Evolves `(phi, psi)` over one full period with the given shift added
    /// to the `phi` equation, Strang-split around the implicit diffusion.
    fn evolve_period(
        &self,
        shift: f64,
        dt_request: f64,
        phi: &DVector<f64>,
        psi: &DVector<f64>,
        mut sample: Option<&mut Vec<(f64, DVector<f64>, DVector<f64>)>>,
        sample_stride: usize,
    ) -> Result<(DVector<f64>, DVector<f64>), SpectralError> {
        let stiffness = self.coeffs.a11
            + self.coeffs.a22
            + shift.abs()
            + kernel_infinity_norm(self.kernel)
            + self.coeffs.slope.abs() * seasonal_max(self.seasonality);
        let dt_cap = dt_request.min(0.5 / stiffness.max(1e-6));
        let steps = (self.period / dt_cap).ceil().max(1.0) as usize;
        let dt = self.period / steps as f64;
        let matrix = self.laplacian.identity_plus_scaled(0.5 * dt);
        let solver = ImplicitSolver::new(&matrix, self.weights);

        let mut phi = phi.clone();
        let mut psi = psi.clone();
        for step in 0..steps {
            let t = step as f64 * dt;
            if let Some(samples) = sample.as_deref_mut() {
                if step % sample_stride == 0 {
                    samples.push((t, phi.clone(), psi.clone()));
                }
            }
            let (p1, s1) = self.reaction(shift, t, 0.5 * dt, &phi, &psi);
            let rhs = &p1 - 0.5 * dt * self.laplacian.apply(&p1);
            let p_diff = solver.solve(&rhs)?;
            let (p2, s2) = self.reaction(shift, t + 0.5 * dt, 0.5 * dt, &p_diff, &s1);
            phi = p2;
            psi = s2;
        }
        if let Some(samples) = sample.as_deref_mut() {
            samples.push((self.period, phi.clone(), psi.clone()));
        }
        Ok((phi, psi))
    }
}

fn kernel_infinity_norm(k: &DMatrix<f64>) -> f64 {
    (0..k.nrows())
        .map(|i| k.row(i).iter().map(|a| a.abs()).sum())
        .fold(0.0, f64::max)
}

fn seasonal_max(s: &Seasonality) -> f64 {
    match s {
        Seasonality::Constant { level } => *level,
        Seasonality::Cosine { mean, depth, .. } => mean * (1.0 + depth),
    }
}

/// Principal eigenvalue of the periodic eigenproblem on the complement of
/// the control region: the coupled pair evolves with Dirichlet rows on the
/// region, `psi` driven by `slope * p(t) * phi`, and the eigenvalue shift
/// acting on the `phi` equation alone. For each shift the dominant
/// period-map multiplier `rho` comes from power iteration; the shift is
/// updated by `-ln(rho)/T` until the dominant multiplier is one, which is
/// exactly the periodicity condition of the eigenproblem. The first update
/// from shift zero is the plain `-ln(rho)/T` estimate.
pub fn periodic_principal_eigenvalue(
    operators: &Operators,
    coeffs: &LinearizedCoefficients,
    region: &ControlRegion,
    seasonality: &Seasonality,
    period: f64,
    config: &PeriodicConfig,
) -> Result<PeriodicEigenPair, SpectralError> {
    if !(period > 0.0) {
        return Err(SpectralError::InvalidConfig(format!(
            "period must be positive, got {period}"
        )));
    }
    if !(coeffs.a22 > 0.0) {
        return Err(SpectralError::ZeroRecoveryRate(coeffs.a22));
    }
    let restricted = restrict_to_complement(&operators.robin, &operators.kernel, region);
    let map = PeriodMap {
        laplacian: &restricted.laplacian,
        kernel: &restricted.kernel,
        weights: operators.domain.weights(),
        coeffs: *coeffs,
        seasonality,
        period,
    };

    let n = operators.domain.node_count();
    let active_mask: Vec<bool> = (0..n).map(|i| !region.indicator()[i]).collect();
    let start = DVector::from_fn(n, |i, _| if active_mask[i] { 1.0 } else { 0.0 });
    let functional = |phi: &DVector<f64>, psi: &DVector<f64>| {
        operators.domain.integrate(phi) + operators.domain.integrate(psi)
    };

    let mut shift = 0.0;
    let mut phi = start.clone();
    let mut psi = start.clone();
    let mut total_periods = 0usize;
    let mut rho = f64::NAN;

    for _outer in 0..config.max_shift_iterations {
        // Inner power iteration at the current shift.
        let mut rho_prev = f64::NAN;
        let mut converged = false;
        for _ in 0..config.max_periods {
            let before = functional(&phi, &psi);
            let (phi_next, psi_next) = map.evolve_period(shift, config.dt, &phi, &psi, None, 1)?;
            total_periods += 1;
            let after = functional(&phi_next, &psi_next);
            rho = after / before;
            if !rho.is_finite() || rho <= 0.0 {
                return Err(SpectralError::NonPositiveMultiplier { rho });
            }
            let norm = phi_next.amax().max(psi_next.amax());
            let change = ((&phi_next / norm) - &phi).amax().max(((&psi_next / norm) - &psi).amax());
            phi = phi_next / norm;
            psi = psi_next / norm;
            if (rho - rho_prev).abs() <= config.multiplier_tol * rho.max(1.0)
                && change <= 1e-9
            {
                converged = true;
                break;
            }
            rho_prev = rho;
        }
        if !converged {
            return Err(SpectralError::NoConvergence {
                tol: config.multiplier_tol,
                best: (rho - rho_prev).abs(),
            });
        }
        let correction = -rho.ln() / period;
        shift += correction;
        if correction.abs() <= config.shift_tol {
            break;
        }
    }

    // Final pass at the converged shift: sample the eigenfunction phases and
    // measure the periodicity defect.
    let norm = phi.amax().max(psi.amax());
    phi /= norm;
    psi /= norm;
    let steps_guess = (period / config.dt).ceil() as usize;
    let stride = (steps_guess / config.stored_phases.max(1)).max(1);
    let mut phases = Vec::new();
    let (phi_end, psi_end) =
        map.evolve_period(shift, config.dt, &phi, &psi, Some(&mut phases), stride)?;
    let rho_final = functional(&phi_end, &psi_end) / functional(&phi, &psi);
    let periodicity_residual = ((&phi_end / rho_final) - &phi)
        .amax()
        .max(((&psi_end / rho_final) - &psi).amax());
    let lambda = shift - rho_final.ln() / period;

    let min_entry = phases
        .iter()
        .flat_map(|(_, p, s)| p.iter().chain(s.iter()))
        .copied()
        .fold(f64::INFINITY, f64::min);
    if min_entry < -1e-6 {
        return Err(SpectralError::NonPositiveEigenvector { min: min_entry });
    }

    Ok(PeriodicEigenPair {
        lambda,
        multiplier: rho_final,
        phases,
        periodicity_residual,
        iterations: total_periods,
    })
}
