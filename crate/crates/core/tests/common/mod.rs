//! Shared test oracles: dense matrix exponential, dense eigensolves, and
//! small builders. These stay independent of the library's solver paths.

#![allow(dead_code)]

use epiregion::grid::{
    assemble_robin_laplacian, build_domain, build_kernel, ControlRegion, KernelFamily,
};
use epiregion::integrator::Operators;
use epiregion::models::{FoiFamily, ForceOfInfection, ModelKind, ModelSpec};
use nalgebra::{DMatrix, DVector};

/// Dense matrix exponential by scaling-and-squaring with a Taylor series,
/// accurate to machine precision for the small generators used in tests.
pub fn expm(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let norm = (0..n)
        .map(|j| a.column(j).iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let s = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let b = a / 2f64.powi(s as i32);
    let mut term = DMatrix::identity(n, n);
    let mut sum = DMatrix::identity(n, n);
    for k in 1..60 {
        term = &term * &b / k as f64;
        sum += &term;
        if term.amax() < 1e-20 {
            break;
        }
    }
    let mut result = sum;
    for _ in 0..s {
        result = &result * &result;
    }
    result
}

/// 1D operator bundle on the unit interval.
pub fn operators_1d(
    n: usize,
    d1: f64,
    alpha: f64,
    kernel: KernelFamily,
    amplitude: f64,
) -> Operators {
    let domain = build_domain(1, &[1.0], &[n]).unwrap();
    let robin = assemble_robin_laplacian(&domain, d1, alpha).unwrap();
    let kernel = build_kernel(&domain, kernel, amplitude).unwrap();
    Operators {
        domain,
        robin,
        kernel,
    }
}

pub fn linear_model(a11: f64, a22: f64, k: f64) -> ModelSpec {
    ModelSpec::new(
        ModelKind::Core,
        a11,
        a22,
        ForceOfInfection::new(FoiFamily::Linear { k }).unwrap(),
    )
    .unwrap()
}

pub fn controlled_linear_model(a11: f64, a22: f64, k: f64, gamma: f64) -> ModelSpec {
    ModelSpec::new(
        ModelKind::Controlled { gamma },
        a11,
        a22,
        ForceOfInfection::new(FoiFamily::Linear { k }).unwrap(),
    )
    .unwrap()
}

/// Dense generator of the linearized pair system
/// `du1 = -(L + a11 + gamma chi) u1 + K u2`, `du2 = slope u1 - a22 u2`,
/// as one `2n x 2n` block matrix acting on the stacked state.
pub fn pair_generator(
    ops: &Operators,
    a11: f64,
    a22: f64,
    slope: f64,
    gamma: f64,
    region: Option<&ControlRegion>,
) -> DMatrix<f64> {
    let n = ops.domain.node_count();
    let l = ops.robin.to_dense();
    let k = ops.kernel.matrix();
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = -l[(i, j)];
            m[(i, n + j)] = k[(i, j)];
        }
        m[(i, i)] -= a11;
        if let Some(r) = region {
            if r.indicator()[i] {
                m[(i, i)] -= gamma;
            }
        }
        m[(n + i, i)] = slope;
        m[(n + i, n + i)] = -a22;
    }
    m
}

/// Stacks a two-field state into one vector.
pub fn stack(u1: &DVector<f64>, u2: &DVector<f64>) -> DVector<f64> {
    let n = u1.len();
    DVector::from_fn(2 * n, |i, _| if i < n { u1[i] } else { u2[i - n] })
}

/// Classical fourth-order Runge-Kutta on a scalar-pair ODE, used as a
/// reference for spatially homogeneous runs.
pub fn rk4_pair<F: Fn(f64, f64, f64) -> (f64, f64)>(
    f: F,
    mut z1: f64,
    mut z2: f64,
    dt: f64,
    steps: usize,
) -> (f64, f64) {
    let mut t = 0.0;
    for _ in 0..steps {
        let (a1, a2) = f(t, z1, z2);
        let (b1, b2) = f(t + 0.5 * dt, z1 + 0.5 * dt * a1, z2 + 0.5 * dt * a2);
        let (c1, c2) = f(t + 0.5 * dt, z1 + 0.5 * dt * b1, z2 + 0.5 * dt * b2);
        let (d1, d2) = f(t + dt, z1 + dt * c1, z2 + dt * c2);
        z1 += dt / 6.0 * (a1 + 2.0 * b1 + 2.0 * c1 + d1);
        z2 += dt / 6.0 * (a2 + 2.0 * b2 + 2.0 * c2 + d2);
        t += dt;
    }
    (z1, z2)
}

/// Smallest real part over the dense spectrum.
pub fn min_real_eigenvalue(a: &DMatrix<f64>) -> f64 {
    a.complex_eigenvalues()
        .iter()
        .map(|z| z.re)
        .fold(f64::INFINITY, f64::min)
}
