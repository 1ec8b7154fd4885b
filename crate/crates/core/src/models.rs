//! Forces of infection and the reaction parts of every model variant.
//!
//! The force of infection `g` drives new infections from the pollutant (or
//! infective-density) level. All in-scope stabilization theory assumes the
//! hypotheses: `g` vanishes on the negative axis, is Lipschitz and
//! increasing, and is dominated by a linear bound `g(x) <= a21 * x`. The
//! linear bound `a21` is computed analytically per family as
//! `sup_{x>0} g(x)/x`; families where that supremum is infinite carry no
//! bound and are rejected by hypothesis validation.
//!
//! Reaction terms are pure functions of the fields; diffusion is applied
//! separately by the integrator.

use crate::grid::{ControlRegion, Domain, KernelOperator};
use nalgebra::DVector;

#[derive(Debug, Clone, thiserror::Error)]
pub enum ModelError {
    #[error("{0}")]
    InvalidParameter(String),
    #[error("{hypothesis} violated: {detail}")]
    HypothesisViolated { hypothesis: &'static str, detail: String },
    #[error("field '{what}' has {got} entries, expected {expected}")]
    ShapeMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("control gain is positive but no control region was supplied")]
    MissingRegion,
    #[error("infective density exceeds capacity by {excess} (tolerance 1e-9)")]
    CapacityExceeded { excess: f64 },
    #[error("step left the invariant box [0,H]x[0,M]; reduce dt (got {dt})")]
    StepTooLarge { dt: f64 },
    #[error("force of infection has no finite linear bound a21")]
    UnboundedSlope,
}

/// Force-of-infection families. Parameters follow the functional forms
/// `k x^p` (power), `k x^p / (alpha + beta x^q)` (Holling) and the sigmoid
/// special case with `p = q = 2`.
#[derive(Debug, Clone, PartialEq)]
pub enum FoiFamily {
    Linear { k: f64 },
    Power { k: f64, p: f64 },
    Holling { k: f64, p: f64, q: f64, alpha: f64, beta: f64 },
    Sigmoid { k: f64, alpha: f64, beta: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForceOfInfection {
    family: FoiFamily,
    a21: Option<f64>,
}

impl ForceOfInfection {
    pub fn new(family: FoiFamily) -> Result<Self, ModelError> {
        let bad = |msg: String| Err(ModelError::InvalidParameter(msg));
        match &family {
            FoiFamily::Linear { k } => {
                if !(*k > 0.0) {
                    return bad(format!("linear force of infection needs k > 0, got {k}"));
                }
            }
            FoiFamily::Power { k, p } => {
                if !(*k > 0.0) || !(*p > 0.0) {
                    return bad(format!("power force of infection needs k, p > 0, got k={k}, p={p}"));
                }
            }
            FoiFamily::Holling { k, p, q, alpha, beta } => {
                if !(*k > 0.0) || !(*p > 0.0) || !(*q > 0.0) {
                    return bad(format!("holling needs k, p, q > 0, got k={k}, p={p}, q={q}"));
                }
                if *alpha < 0.0 || *beta < 0.0 || *alpha + *beta == 0.0 {
                    return bad(format!(
                        "holling needs alpha, beta >= 0 with alpha + beta > 0, got alpha={alpha}, beta={beta}"
                    ));
                }
            }
            FoiFamily::Sigmoid { k, alpha, beta } => {
                if !(*k > 0.0) || !(*alpha > 0.0) || !(*beta > 0.0) {
                    return bad(format!(
                        "sigmoid needs k, alpha, beta > 0, got k={k}, alpha={alpha}, beta={beta}"
                    ));
                }
            }
        }
        let a21 = linear_bound(&family);
        Ok(Self { family, a21 })
    }

    pub fn family(&self) -> &FoiFamily {
        &self.family
    }

    /// `g(x)`, clamped to zero on the negative axis.
    pub fn eval(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        match &self.family {
            FoiFamily::Linear { k } => k * x,
            FoiFamily::Power { k, p } => k * x.powf(*p),
            FoiFamily::Holling { k, p, q, alpha, beta } => {
                k * x.powf(*p) / (alpha + beta * x.powf(*q))
            }
            FoiFamily::Sigmoid { k, alpha, beta } => k * x * x / (alpha + beta * x * x),
        }
    }

    /// One-sided derivative: zero for `x < 0`, the right derivative at zero.
    pub fn derivative(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        if x == 0.0 {
            return self.slope_at_zero().unwrap_or(f64::INFINITY);
        }
        match &self.family {
            FoiFamily::Linear { k } => *k,
            FoiFamily::Power { k, p } => k * p * x.powf(p - 1.0),
            FoiFamily::Holling { k, p, q, alpha, beta } => {
                let denom = alpha + beta * x.powf(*q);
                k * x.powf(p - 1.0) * (p * alpha + (p - q) * beta * x.powf(*q)) / (denom * denom)
            }
            FoiFamily::Sigmoid { k, alpha, beta } => {
                let denom = alpha + beta * x * x;
                2.0 * k * alpha * x / (denom * denom)
            }
        }
    }

    /// Analytic linear bound `a21 = sup_{x>0} g(x)/x`, when finite.
    pub fn linear_bound(&self) -> Option<f64> {
        self.a21
    }

    /// Linear bound, as an error when the family has none.
    pub fn a21(&self) -> Result<f64, ModelError> {
        self.a21.ok_or(ModelError::UnboundedSlope)
    }

    /// Right derivative of `g` at zero, when finite.
    pub fn slope_at_zero(&self) -> Option<f64> {
        match &self.family {
            FoiFamily::Linear { k } => Some(*k),
            FoiFamily::Power { k, p } => match p.partial_cmp(&1.0).unwrap() {
                std::cmp::Ordering::Greater => Some(0.0),
                std::cmp::Ordering::Equal => Some(*k),
                std::cmp::Ordering::Less => None,
            },
            FoiFamily::Holling { k, p, q, alpha, beta } => {
                // Limit of k x^{p-1} / (alpha + beta x^q) as x -> 0+.
                if *alpha > 0.0 {
                    match p.partial_cmp(&1.0).unwrap() {
                        std::cmp::Ordering::Greater => Some(0.0),
                        std::cmp::Ordering::Equal => Some(k / alpha),
                        std::cmp::Ordering::Less => None,
                    }
                } else {
                    match (p - 1.0).partial_cmp(q).unwrap() {
                        std::cmp::Ordering::Greater => Some(0.0),
                        std::cmp::Ordering::Equal => Some(k / beta),
                        std::cmp::Ordering::Less => None,
                    }
                }
            }
            FoiFamily::Sigmoid { .. } => Some(0.0),
        }
    }

    /// Checks the standing hypotheses on a 1000-point sample of `[0, x_max]`:
    /// vanishing on the negative axis, monotonicity, the linear bound, and
    /// consistency of the analytic derivative with finite differences.
    pub fn check_h1(&self, x_max: f64) -> Result<(), ModelError> {
        for x in [-1.0, -0.25, -1e-9] {
            if self.eval(x) != 0.0 {
                return Err(ModelError::HypothesisViolated {
                    hypothesis: "H1-a",
                    detail: format!("g({x}) = {} but must vanish for x <= 0", self.eval(x)),
                });
            }
        }
        let n = 1000;
        let mut prev = 0.0_f64;
        let a21 = self.a21.ok_or(ModelError::HypothesisViolated {
            hypothesis: "H1-c",
            detail: "g(x)/x is unbounded for this family".into(),
        })?;
        for i in 0..=n {
            let x = x_max * i as f64 / n as f64;
            let g = self.eval(x);
            if g + 1e-12 * (1.0 + prev.abs()) < prev {
                return Err(ModelError::HypothesisViolated {
                    hypothesis: "H1-b",
                    detail: format!("g decreases near x = {x}"),
                });
            }
            if g > a21 * x * (1.0 + 1e-9) + 1e-300 {
                return Err(ModelError::HypothesisViolated {
                    hypothesis: "H1-c",
                    detail: format!("g(x) > a21*x at x = {x}: {g} > {}", a21 * x),
                });
            }
            prev = g;
        }
        // Derivative consistency away from the kink at zero.
        for i in 1..=20 {
            let x = x_max * i as f64 / 20.0;
            let step = (1e-6 * x.max(1e-3)).max(1e-9);
            let fd = (self.eval(x + step) - self.eval(x - step)) / (2.0 * step);
            let an = self.derivative(x);
            if (fd - an).abs() > 1e-6 * (1.0 + an.abs().max(fd.abs())) {
                return Err(ModelError::HypothesisViolated {
                    hypothesis: "H1-b",
                    detail: format!("derivative mismatch at x = {x}: analytic {an}, fd {fd}"),
                });
            }
        }
        Ok(())
    }
}

fn linear_bound(family: &FoiFamily) -> Option<f64> {
    match family {
        FoiFamily::Linear { k } => Some(*k),
        FoiFamily::Power { k, p } => (*p == 1.0).then_some(*k),
        FoiFamily::Holling { k, p, q, alpha, beta } => {
            if *alpha == 0.0 {
                return (*p - 1.0 == *q).then(|| k / beta);
            }
            if *p < 1.0 {
                None
            } else if *p == 1.0 {
                Some(k / alpha)
            } else if *beta == 0.0 {
                None
            } else if *p - 1.0 < *q {
                // Interior maximum of k x^{p-1} / (alpha + beta x^q).
                let xs = ((p - 1.0) * alpha / ((q - p + 1.0) * beta)).powf(1.0 / q);
                Some(k * xs.powf(p - 1.0) / (alpha + beta * xs.powf(*q)))
            } else if *p - 1.0 == *q {
                Some(k / beta)
            } else {
                None
            }
        }
        FoiFamily::Sigmoid { k, alpha, beta } => Some(k / (2.0 * (alpha * beta).sqrt())),
    }
}

/// Seasonal modulation of the incidence rate, strictly positive and
/// `T`-periodic for the cosine family.
#[derive(Debug, Clone, PartialEq)]
pub enum Seasonality {
    Constant { level: f64 },
    Cosine { mean: f64, depth: f64, period: f64 },
}

impl Seasonality {
    pub fn validate(&self) -> Result<(), ModelError> {
        match self {
            Seasonality::Constant { level } => {
                if !(*level > 0.0) {
                    return Err(ModelError::InvalidParameter(format!(
                        "seasonality level must be positive, got {level}"
                    )));
                }
            }
            Seasonality::Cosine { mean, depth, period } => {
                if !(*mean > 0.0) || !(*period > 0.0) || !(0.0..1.0).contains(depth) {
                    return Err(ModelError::InvalidParameter(format!(
                        "cosine seasonality needs mean > 0, period > 0, depth in [0,1); got mean={mean}, depth={depth}, period={period}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Seasonality::Constant { level } => *level,
            Seasonality::Cosine { mean, depth, period } => {
                mean * (1.0 + depth * (2.0 * std::f64::consts::PI * t / period).cos())
            }
        }
    }

    pub fn period(&self) -> Option<f64> {
        match self {
            Seasonality::Constant { .. } => None,
            Seasonality::Cosine { period, .. } => Some(*period),
        }
    }
}

/// Model variant and its variant-specific data.
#[derive(Debug, Clone)]
pub enum ModelKind {
    /// Pollutant/infective pair without control.
    Core,
    /// Core dynamics plus the removal feedback `-gamma chi_omega u1`.
    Controlled { gamma: f64 },
    /// Controlled dynamics with seasonal incidence `p(t) g(u1)`.
    Periodic { gamma: f64, seasonality: Seasonality },
    /// Mosquito/human pair with saturating incidence `(C - u2) h(u1)`.
    Malaria { capacity: DVector<f64> },
    /// Nonlocal SIR with vital dynamics.
    SirKendall { d2: f64, d3: f64, mu: f64, recovery: f64 },
}

#[derive(Debug, Clone)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub a11: f64,
    pub a22: f64,
    pub foi: ForceOfInfection,
}

impl ModelSpec {
    pub fn new(kind: ModelKind, a11: f64, a22: f64, foi: ForceOfInfection) -> Result<Self, ModelError> {
        if a11 < 0.0 || a22 < 0.0 {
            return Err(ModelError::InvalidParameter(format!(
                "decay rates must be nonnegative, got a11={a11}, a22={a22}"
            )));
        }
        match &kind {
            ModelKind::Controlled { gamma } | ModelKind::Periodic { gamma, .. } => {
                if *gamma < 0.0 {
                    return Err(ModelError::InvalidParameter(format!(
                        "feedback gain must be nonnegative, got {gamma}"
                    )));
                }
                if let ModelKind::Periodic { seasonality, .. } = &kind {
                    seasonality.validate()?;
                }
            }
            ModelKind::Malaria { capacity } => {
                if capacity.iter().any(|&c| c < 0.0) {
                    return Err(ModelError::InvalidParameter(
                        "human capacity field must be nonnegative nodewise".into(),
                    ));
                }
            }
            ModelKind::SirKendall { d2, d3, mu, recovery } => {
                if !(*d2 > 0.0) || !(*d3 > 0.0) || *mu < 0.0 || *recovery < 0.0 {
                    return Err(ModelError::InvalidParameter(format!(
                        "SIR rates must satisfy d2, d3 > 0 and mu, recovery >= 0; got d2={d2}, d3={d3}, mu={mu}, recovery={recovery}"
                    )));
                }
            }
            ModelKind::Core => {}
        }
        Ok(Self { kind, a11, a22, foi })
    }

    pub fn gamma(&self) -> f64 {
        match &self.kind {
            ModelKind::Controlled { gamma } | ModelKind::Periodic { gamma, .. } => *gamma,
            _ => 0.0,
        }
    }

    pub fn seasonal_factor(&self, t: f64) -> f64 {
        match &self.kind {
            ModelKind::Periodic { seasonality, .. } => seasonality.eval(t),
            _ => 1.0,
        }
    }

    pub fn field_labels(&self) -> &'static [&'static str] {
        match self.kind {
            ModelKind::SirKendall { .. } => &["s", "i", "r"],
            _ => &["u1", "u2"],
        }
    }

    pub fn field_count(&self) -> usize {
        self.field_labels().len()
    }
}

fn check_len(what: &'static str, v: &DVector<f64>, n: usize) -> Result<(), ModelError> {
    if v.len() != n {
        return Err(ModelError::ShapeMismatch {
            what,
            expected: n,
            got: v.len(),
        });
    }
    Ok(())
}

/// Reaction part of the core / controlled / periodic pair:
/// `du1 = -a11 u1 + K u2 - gamma chi u1`, `du2 = -a22 u2 + p(t) g(u1)`.
pub fn rhs_core(
    domain: &Domain,
    kernel: &KernelOperator,
    spec: &ModelSpec,
    region: Option<&ControlRegion>,
    t: f64,
    u1: &DVector<f64>,
    u2: &DVector<f64>,
) -> Result<(DVector<f64>, DVector<f64>), ModelError> {
    let n = domain.node_count();
    check_len("u1", u1, n)?;
    check_len("u2", u2, n)?;
    let gamma = spec.gamma();
    if gamma > 0.0 && region.is_none() {
        return Err(ModelError::MissingRegion);
    }
    let mut du1 = kernel.apply(u2);
    du1.axpy(-spec.a11, u1, 1.0);
    if gamma > 0.0 {
        let indicator = region.unwrap().indicator();
        for i in 0..n {
            if indicator[i] {
                du1[i] -= gamma * u1[i];
            }
        }
    }
    let p = spec.seasonal_factor(t);
    let du2 = DVector::from_fn(n, |i, _| -spec.a22 * u2[i] + p * spec.foi.eval(u1[i]));
    Ok((du1, du2))
}

/// Reaction part of the malaria pair: `du1 = -a11 u1 + K u2`,
/// `du2 = -a22 u2 + (C - u2) h(u1)` with `h` the functional response.
pub fn rhs_malaria(
    domain: &Domain,
    kernel: &KernelOperator,
    spec: &ModelSpec,
    u1: &DVector<f64>,
    u2: &DVector<f64>,
) -> Result<(DVector<f64>, DVector<f64>), ModelError> {
    let n = domain.node_count();
    check_len("u1", u1, n)?;
    check_len("u2", u2, n)?;
    let capacity = match &spec.kind {
        ModelKind::Malaria { capacity } => capacity,
        _ => {
            return Err(ModelError::InvalidParameter(
                "rhs_malaria called with a non-malaria model".into(),
            ))
        }
    };
    check_len("capacity", capacity, n)?;
    let excess = (0..n).map(|i| u2[i] - capacity[i]).fold(f64::MIN, f64::max);
    if excess > 1e-9 {
        return Err(ModelError::CapacityExceeded { excess });
    }
    let mut du1 = kernel.apply(u2);
    du1.axpy(-spec.a11, u1, 1.0);
    let du2 = DVector::from_fn(n, |i, _| {
        -spec.a22 * u2[i] + (capacity[i] - u2[i]) * spec.foi.eval(u1[i])
    });
    Ok((du1, du2))
}

/// Reaction part of the nonlocal SIR system; the local mass action is
/// replaced by the integral force of infection `(K i) s`.
pub fn rhs_sir_kendall(
    domain: &Domain,
    kernel: &KernelOperator,
    spec: &ModelSpec,
    s: &DVector<f64>,
    i: &DVector<f64>,
    r: &DVector<f64>,
) -> Result<(DVector<f64>, DVector<f64>, DVector<f64>), ModelError> {
    let n = domain.node_count();
    check_len("s", s, n)?;
    check_len("i", i, n)?;
    check_len("r", r, n)?;
    let (mu, recovery) = match spec.kind {
        ModelKind::SirKendall { mu, recovery, .. } => (mu, recovery),
        _ => {
            return Err(ModelError::InvalidParameter(
                "rhs_sir_kendall called with a non-SIR model".into(),
            ))
        }
    };
    let foi = kernel.apply(i);
    let ds = DVector::from_fn(n, |j, _| -foi[j] * s[j] + mu - mu * s[j]);
    let di = DVector::from_fn(n, |j, _| foi[j] * s[j] - (mu + recovery) * i[j]);
    let dr = DVector::from_fn(n, |j, _| recovery * i[j] - mu * r[j]);
    Ok((ds, di, dr))
}

/// Ross-Macdonald infected-human / infected-mosquito pair.
#[derive(Debug, Clone, PartialEq)]
pub struct RossMacdonaldParams {
    /// Bites on humans per mosquito per unit time.
    pub biting_rate: f64,
    /// Proportion of infected bites that infect a human.
    pub human_infection_prob: f64,
    /// Transmission efficiency from humans to mosquitoes.
    pub mosquito_infection_prob: f64,
    pub humans: f64,
    pub mosquitoes: f64,
    /// Per-capita human recovery rate.
    pub recovery: f64,
    pub mosquito_mortality: f64,
}

impl RossMacdonaldParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        let ok = self.biting_rate > 0.0
            && self.humans > 0.0
            && self.mosquitoes > 0.0
            && self.recovery > 0.0
            && self.mosquito_mortality > 0.0
            && (0.0..=1.0).contains(&self.human_infection_prob)
            && self.human_infection_prob > 0.0
            && (0.0..=1.0).contains(&self.mosquito_infection_prob)
            && self.mosquito_infection_prob > 0.0;
        if !ok {
            return Err(ModelError::InvalidParameter(
                "Ross-Macdonald parameters must be positive with b, c in (0,1]".into(),
            ));
        }
        Ok(())
    }

    /// `dX/dt = -r X + (a/H) b (H - X) Y`, `dY/dt = -mu Y + (a/H) c X (M - Y)`.
    pub fn derivatives(&self, x: f64, y: f64) -> (f64, f64) {
        let a_h = self.biting_rate / self.humans;
        let dx = -self.recovery * x + a_h * self.human_infection_prob * (self.humans - x) * y;
        let dy = -self.mosquito_mortality * y
            + a_h * self.mosquito_infection_prob * x * (self.mosquitoes - y);
        (dx, dy)
    }
}

/// One explicit fourth-order Runge-Kutta step of the Ross-Macdonald pair.
/// The invariant box `[0,H] x [0,M]` must be preserved; if the step leaves
/// it the step size was too large for these rates.
pub fn rossmacdonald_step(
    params: &RossMacdonaldParams,
    x: f64,
    y: f64,
    dt: f64,
) -> Result<(f64, f64), ModelError> {
    params.validate()?;
    if !(dt > 0.0) {
        return Err(ModelError::InvalidParameter(format!(
            "dt must be positive, got {dt}"
        )));
    }
    if !(0.0..=params.humans).contains(&x) || !(0.0..=params.mosquitoes).contains(&y) {
        return Err(ModelError::InvalidParameter(format!(
            "state ({x}, {y}) outside [0,H]x[0,M]"
        )));
    }
    let f = |x: f64, y: f64| params.derivatives(x, y);
    let (k1x, k1y) = f(x, y);
    let (k2x, k2y) = f(x + 0.5 * dt * k1x, y + 0.5 * dt * k1y);
    let (k3x, k3y) = f(x + 0.5 * dt * k2x, y + 0.5 * dt * k2y);
    let (k4x, k4y) = f(x + dt * k3x, y + dt * k3y);
    let xn = x + dt / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
    let yn = y + dt / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
    let tol = 1e-12 * (params.humans + params.mosquitoes);
    if xn < -tol
        || xn > params.humans + tol
        || yn < -tol
        || yn > params.mosquitoes + tol
    {
        return Err(ModelError::StepTooLarge { dt });
    }
    Ok((xn.clamp(0.0, params.humans), yn.clamp(0.0, params.mosquitoes)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_domain, build_kernel, KernelFamily};

    fn linear(k: f64) -> ForceOfInfection {
        ForceOfInfection::new(FoiFamily::Linear { k }).unwrap()
    }

    #[test]
    fn clamps_on_negative_axis() {
        let g = linear(2.0);
        assert_eq!(g.eval(-1.0), 0.0);
        assert_eq!(g.derivative(-1.0), 0.0);
        assert_eq!(g.eval(3.0), 6.0);
    }

    #[test]
    fn power_family_evaluates() {
        let g = ForceOfInfection::new(FoiFamily::Power { k: 1.0, p: 2.0 }).unwrap();
        assert_eq!(g.eval(3.0), 9.0);
        assert_eq!(g.linear_bound(), None);
        assert_eq!(g.slope_at_zero(), Some(0.0));
        assert!(g.check_h1(10.0).is_err());
    }

    #[test]
    fn holling_linear_bound_attained_near_zero() {
        let g = ForceOfInfection::new(FoiFamily::Holling {
            k: 1.0,
            p: 1.0,
            q: 1.0,
            alpha: 1.0,
            beta: 1.0,
        })
        .unwrap();
        assert!((g.eval(1.0) - 0.5).abs() < 1e-15);
        let a21 = g.a21().unwrap();
        assert!((a21 - 1.0).abs() < 1e-15);
        // Dense sampling: the ratio g(x)/x stays below a21 and approaches it.
        let sup = (1..20000)
            .map(|i| {
                let x = i as f64 * 1e-4;
                g.eval(x) / x
            })
            .fold(f64::MIN, f64::max);
        assert!(sup <= a21 + 1e-12);
        assert!(sup > a21 - 1e-3);
        g.check_h1(50.0).unwrap();
    }

    #[test]
    fn holling_interior_maximum_bound() {
        let g = ForceOfInfection::new(FoiFamily::Holling {
            k: 2.0,
            p: 2.0,
            q: 2.0,
            alpha: 1.0,
            beta: 3.0,
        })
        .unwrap();
        let a21 = g.a21().unwrap();
        let sup = (1..200000)
            .map(|i| {
                let x = i as f64 * 1e-4;
                g.eval(x) / x
            })
            .fold(f64::MIN, f64::max);
        assert!((sup - a21).abs() <= 1e-6 * a21, "sampled {sup}, analytic {a21}");
        g.check_h1(20.0).unwrap();
    }

    #[test]
    fn sigmoid_bound_and_zero_slope() {
        let g = ForceOfInfection::new(FoiFamily::Sigmoid {
            k: 4.0,
            alpha: 1.0,
            beta: 1.0,
        })
        .unwrap();
        assert!((g.a21().unwrap() - 2.0).abs() < 1e-15);
        assert_eq!(g.slope_at_zero(), Some(0.0));
        g.check_h1(30.0).unwrap();
    }

    #[test]
    fn h1_checks_pass_for_all_bounded_families() {
        let families = [
            FoiFamily::Linear { k: 2.0 },
            FoiFamily::Power { k: 0.7, p: 1.0 },
            FoiFamily::Holling {
                k: 1.5,
                p: 2.0,
                q: 2.0,
                alpha: 0.5,
                beta: 1.0,
            },
            FoiFamily::Sigmoid {
                k: 3.0,
                alpha: 2.0,
                beta: 0.5,
            },
        ];
        for f in families {
            ForceOfInfection::new(f).unwrap().check_h1(25.0).unwrap();
        }
    }

    #[test]
    fn seasonality_positive_and_periodic() {
        let p = Seasonality::Cosine {
            mean: 1.0,
            depth: 0.8,
            period: 2.0,
        };
        p.validate().unwrap();
        for i in 0..50 {
            let t = i as f64 * 0.13;
            assert!(p.eval(t) > 0.0);
            assert!((p.eval(t) - p.eval(t + 2.0)).abs() < 1e-12);
        }
        assert!(Seasonality::Cosine {
            mean: 1.0,
            depth: 1.0,
            period: 2.0
        }
        .validate()
        .is_err());
    }

    fn pair_setup() -> (Domain, KernelOperator) {
        let d = build_domain(1, &[1.0], &[16]).unwrap();
        let k = build_kernel(&d, KernelFamily::Delta, 1.5).unwrap();
        (d, k)
    }

    #[test]
    fn origin_is_equilibrium() {
        let (d, k) = pair_setup();
        let spec = ModelSpec::new(ModelKind::Core, 1.0, 1.0, linear(2.0)).unwrap();
        let z = DVector::zeros(16);
        let (du1, du2) = rhs_core(&d, &k, &spec, None, 0.0, &z, &z).unwrap();
        assert_eq!(du1.amax(), 0.0);
        assert_eq!(du2.amax(), 0.0);
    }

    #[test]
    fn delta_kernel_constant_field() {
        let (d, k) = pair_setup();
        let spec = ModelSpec::new(ModelKind::Core, 0.0, 1.0, linear(2.0)).unwrap();
        let u1 = DVector::zeros(16);
        let u2 = DVector::from_element(16, 1.0);
        let (du1, _) = rhs_core(&d, &k, &spec, None, 0.0, &u1, &u2).unwrap();
        for v in du1.iter() {
            assert!((v - 1.5).abs() < 1e-15);
        }
    }

    #[test]
    fn homogeneous_fields_reduce_to_ode() {
        // Exact for kernels whose rows integrate to the amplitude.
        let d = build_domain(1, &[1.0], &[16]).unwrap();
        for family in [KernelFamily::Delta, KernelFamily::Uniform] {
            let k = build_kernel(&d, family, 1.3).unwrap();
            let g = ForceOfInfection::new(FoiFamily::Holling {
                k: 1.0,
                p: 1.0,
                q: 1.0,
                alpha: 1.0,
                beta: 1.0,
            })
            .unwrap();
            let spec = ModelSpec::new(ModelKind::Core, 0.4, 0.9, g.clone()).unwrap();
            let (z1, z2) = (0.7, 0.3);
            let u1 = DVector::from_element(16, z1);
            let u2 = DVector::from_element(16, z2);
            let (du1, du2) = rhs_core(&d, &k, &spec, None, 0.0, &u1, &u2).unwrap();
            let ode_du1 = -0.4 * z1 + 1.3 * z2;
            let ode_du2 = -0.9 * z2 + g.eval(z1);
            for i in 0..16 {
                assert!((du1[i] - ode_du1).abs() <= 1e-14);
                assert!((du2[i] - ode_du2).abs() <= 1e-14);
            }
        }
    }

    #[test]
    fn quasi_monotone_coupling() {
        let (d, k) = pair_setup();
        let spec = ModelSpec::new(ModelKind::Core, 1.0, 1.0, linear(2.0)).unwrap();
        let u1 = DVector::from_fn(16, |i, _| 0.1 * i as f64);
        let u2 = DVector::from_fn(16, |i, _| 0.05 * (16 - i) as f64);
        let mut bigger = u2.clone();
        bigger[7] += 0.5;
        let (du1_a, _) = rhs_core(&d, &k, &spec, None, 0.0, &u1, &u2).unwrap();
        let (du1_b, _) = rhs_core(&d, &k, &spec, None, 0.0, &u1, &bigger).unwrap();
        for i in 0..16 {
            assert!(du1_b[i] >= du1_a[i] - 1e-15);
        }
    }

    #[test]
    fn malaria_saturation_and_rest_state() {
        let (d, k) = pair_setup();
        let capacity = DVector::from_element(16, 2.0);
        let h = ForceOfInfection::new(FoiFamily::Holling {
            k: 1.0,
            p: 1.0,
            q: 1.0,
            alpha: 1.0,
            beta: 1.0,
        })
        .unwrap();
        let spec = ModelSpec::new(
            ModelKind::Malaria {
                capacity: capacity.clone(),
            },
            1.0,
            0.7,
            h,
        )
        .unwrap();
        // Saturated: u2 = C kills the infection term.
        let u1 = DVector::from_element(16, 0.5);
        let (_, du2) = rhs_malaria(&d, &k, &spec, &u1, &capacity).unwrap();
        for i in 0..16 {
            assert!((du2[i] + 0.7 * 2.0).abs() < 1e-14);
        }
        // No pollutant: h(0) = 0, pure decay of infectives.
        let z = DVector::zeros(16);
        let u2 = DVector::from_element(16, 0.4);
        let (_, du2) = rhs_malaria(&d, &k, &spec, &z, &u2).unwrap();
        for i in 0..16 {
            assert!((du2[i] + 0.7 * 0.4).abs() < 1e-14);
        }
        // Capacity violations are flagged.
        let over = DVector::from_element(16, 2.1);
        assert!(matches!(
            rhs_malaria(&d, &k, &spec, &z, &over),
            Err(ModelError::CapacityExceeded { .. })
        ));
    }

    #[test]
    fn malaria_small_case_matches_dense_evaluation() {
        let d = build_domain(1, &[1.0], &[8]).unwrap();
        let k = build_kernel(&d, KernelFamily::Gaussian { sigma: 0.2 }, 1.0).unwrap();
        let h = linear(0.8);
        let capacity = DVector::from_fn(8, |i, _| 1.0 + 0.1 * i as f64);
        let spec = ModelSpec::new(
            ModelKind::Malaria {
                capacity: capacity.clone(),
            },
            0.3,
            0.6,
            h.clone(),
        )
        .unwrap();
        let u1 = DVector::from_fn(8, |i, _| 0.2 + 0.05 * i as f64);
        let u2 = DVector::from_fn(8, |i, _| 0.1 * i as f64);
        let (du1, du2) = rhs_malaria(&d, &k, &spec, &u1, &u2).unwrap();
        for i in 0..8 {
            let mut conv = 0.0;
            for j in 0..8 {
                conv += k.matrix()[(i, j)] * u2[j];
            }
            assert!((du1[i] - (-0.3 * u1[i] + conv)).abs() < 1e-14);
            let expected = -0.6 * u2[i] + (capacity[i] - u2[i]) * h.eval(u1[i]);
            assert!((du2[i] - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn sir_disease_free_equilibrium() {
        let (d, k) = pair_setup();
        let spec = ModelSpec::new(
            ModelKind::SirKendall {
                d2: 0.1,
                d3: 0.1,
                mu: 0.0,
                recovery: 0.5,
            },
            0.0,
            0.0,
            linear(1.0),
        )
        .unwrap();
        let s = DVector::from_element(16, 1.0);
        let z = DVector::zeros(16);
        let (ds, di, dr) = rhs_sir_kendall(&d, &k, &spec, &s, &z, &z).unwrap();
        assert_eq!(ds.amax(), 0.0);
        assert_eq!(di.amax(), 0.0);
        assert_eq!(dr.amax(), 0.0);
    }

    #[test]
    fn sir_delta_kernel_recovers_local_mass_action() {
        let d = build_domain(1, &[1.0], &[12]).unwrap();
        let kk = 1.5;
        let k = build_kernel(&d, KernelFamily::Delta, kk).unwrap();
        let spec = ModelSpec::new(
            ModelKind::SirKendall {
                d2: 0.1,
                d3: 0.1,
                mu: 0.2,
                recovery: 0.5,
            },
            0.0,
            0.0,
            linear(1.0),
        )
        .unwrap();
        let s = DVector::from_fn(12, |i, _| 0.9 - 0.01 * i as f64);
        let i_field = DVector::from_fn(12, |i, _| 0.05 + 0.01 * i as f64);
        let r = DVector::zeros(12);
        let (ds, _, _) = rhs_sir_kendall(&d, &k, &spec, &s, &i_field, &r).unwrap();
        for j in 0..12 {
            let expected = -kk * i_field[j] * s[j] + 0.2 * (1.0 - s[j]);
            assert!((ds[j] - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn sir_total_population_balance() {
        let d = build_domain(1, &[1.0], &[24]).unwrap();
        let k = build_kernel(&d, KernelFamily::Gaussian { sigma: 0.15 }, 2.0).unwrap();
        let mu = 0.3;
        let spec = ModelSpec::new(
            ModelKind::SirKendall {
                d2: 0.1,
                d3: 0.1,
                mu,
                recovery: 0.7,
            },
            0.0,
            0.0,
            linear(1.0),
        )
        .unwrap();
        let s = DVector::from_fn(24, |i, _| 0.8 + 0.005 * i as f64);
        let i_field = DVector::from_fn(24, |i, _| 0.1 * ((i as f64 * 0.4).sin().abs()));
        let r = DVector::from_fn(24, |i, _| 0.02 * i as f64 / 24.0);
        let (ds, di, dr) = rhs_sir_kendall(&d, &k, &spec, &s, &i_field, &r).unwrap();
        let total_rate = d.integrate(&ds) + d.integrate(&di) + d.integrate(&dr);
        let total = d.integrate(&s) + d.integrate(&i_field) + d.integrate(&r);
        let expected = mu * (d.measure() - total);
        assert!((total_rate - expected).abs() <= 1e-12);
    }

    fn rm_params() -> RossMacdonaldParams {
        RossMacdonaldParams {
            biting_rate: 0.3,
            human_infection_prob: 0.5,
            mosquito_infection_prob: 0.5,
            humans: 200.0,
            mosquitoes: 1000.0,
            recovery: 0.05,
            mosquito_mortality: 0.1,
        }
    }

    #[test]
    fn rossmacdonald_fixed_points() {
        let p = rm_params();
        let (x, y) = rossmacdonald_step(&p, 0.0, 0.0, 0.1).unwrap();
        assert_eq!((x, y), (0.0, 0.0));

        // Saturated humans with no recovery stay saturated.
        let mut p2 = p.clone();
        p2.recovery = 1e-300;
        let (x, _) = rossmacdonald_step(&p2, p2.humans, 10.0, 0.1).unwrap();
        assert!((x - p2.humans).abs() < 1e-9);
    }

    #[test]
    fn rossmacdonald_endemic_equilibrium_is_step_fixpoint() {
        let p = rm_params();
        // Solve dX = 0 and dY = 0 by bisection on X in (0, H).
        let y_of_x = |x: f64| {
            let a_h = p.biting_rate / p.humans;
            a_h * p.mosquito_infection_prob * x * p.mosquitoes
                / (p.mosquito_mortality + a_h * p.mosquito_infection_prob * x)
        };
        let residual = |x: f64| p.derivatives(x, y_of_x(x)).0;
        let (mut lo, mut hi) = (1e-6, p.humans - 1e-6);
        assert!(residual(lo) > 0.0 && residual(hi) < 0.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if residual(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let x_star = 0.5 * (lo + hi);
        let y_star = y_of_x(x_star);
        let (xn, yn) = rossmacdonald_step(&p, x_star, y_star, 0.05).unwrap();
        assert!((xn - x_star).abs() < 1e-8);
        assert!((yn - y_star).abs() < 1e-8);
    }

    #[test]
    fn rossmacdonald_rejects_bad_state() {
        let p = rm_params();
        assert!(rossmacdonald_step(&p, -1.0, 0.0, 0.1).is_err());
        assert!(rossmacdonald_step(&p, 0.0, 2000.0, 0.1).is_err());
    }
}
