//! Quadrature discretization of the nonlocal transfer kernel
//! `u(x) -> \int_Omega k(x, x') u(x') dx'`.
//!
//! The stored matrix has entries `k(x_i, x_j) * w_j`, so a plain matrix-vector
//! product is the quadrature rule applied row-wise. Smooth families are
//! column-normalized discretely: each column of the unweighted kernel
//! integrates to the amplitude, which makes the local (delta) limit and the
//! nonlocal cases comparable at a fixed amplitude.

use super::{Domain, GridError};
use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, PartialEq)]
pub enum KernelFamily {
    /// `k(x, x') = a * exp(-|x - x'|^2 / 2 sigma^2) / Z(x')`.
    Gaussian { sigma: f64 },
    /// Flat kernel `k = a / |Omega|`.
    Uniform,
    /// Product of per-axis gaussians with individual widths.
    SeparableProduct { sigmas: Vec<f64> },
    /// Local limit `k(x, x') = a * delta(x - x')`; reduces to `a * I`.
    Delta,
}

#[derive(Debug, Clone)]
pub struct KernelOperator {
    family: KernelFamily,
    amplitude: f64,
    matrix: DMatrix<f64>,
    weights: DVector<f64>,
}

impl KernelOperator {
    pub fn family(&self) -> &KernelFamily {
        &self.family
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    /// Quadrature-weighted kernel matrix with entries `k(x_i, x_j) * w_j`.
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// `v(x_i) -> \int k(x_i, x') v(x') dx'`.
    pub fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.matrix * v
    }

    /// Adjoint application in the weighted inner product:
    /// `p(x_j) -> \int k(x', x_j) p(x') dx'` (integration over the first
    /// kernel argument, as in the adjoint state equations).
    pub fn apply_transpose(&self, p: &DVector<f64>) -> DVector<f64> {
        let weighted = p.component_mul(&self.weights);
        let mut out = self.matrix.transpose() * weighted;
        for j in 0..out.len() {
            out[j] /= self.weights[j];
        }
        out
    }

    /// Maximum row sum; a bound for `\int k(x, x') dx'` over nodes.
    pub fn infinity_norm(&self) -> f64 {
        (0..self.matrix.nrows())
            .map(|i| self.matrix.row(i).iter().map(|a| a.abs()).sum())
            .fold(0.0, f64::max)
    }

    /// Discrete form of the positivity hypothesis on the kernel:
    /// every column satisfies `sum_i k(x_i, x_j) w_i > 0`.
    pub fn h2_column_positivity(&self) -> bool {
        (0..self.matrix.ncols()).all(|j| {
            (0..self.matrix.nrows())
                .map(|i| self.matrix[(i, j)] * self.weights[i] / self.weights[j])
                .sum::<f64>()
                > 0.0
        })
    }
}

/// Builds the kernel matrix for a family. Amplitude zero yields the zero
/// operator (no infection feedback), which is allowed here and flagged only
/// by scenario-level hypothesis validation.
pub fn build_kernel(
    domain: &Domain,
    family: KernelFamily,
    amplitude: f64,
) -> Result<KernelOperator, GridError> {
    if amplitude < 0.0 || !amplitude.is_finite() {
        return Err(GridError::NegativeAmplitude(amplitude));
    }
    let n = domain.node_count();
    let w = domain.weights();

    let matrix = match &family {
        KernelFamily::Delta => DMatrix::from_diagonal(&DVector::from_element(n, amplitude)),
        KernelFamily::Uniform => {
            let volume = domain.measure();
            DMatrix::from_fn(n, n, |_, j| amplitude * w[j] / volume)
        }
        KernelFamily::Gaussian { sigma } => {
            if !(*sigma > 0.0) {
                return Err(GridError::NonPositiveSigma(*sigma));
            }
            column_normalized(domain, amplitude, |i, j| {
                (-domain.distance_sq(i, j) / (2.0 * sigma * sigma)).exp()
            })
        }
        KernelFamily::SeparableProduct { sigmas } => {
            if sigmas.len() != domain.dimension() {
                return Err(GridError::ShapeMismatch {
                    what: "kernel sigmas",
                    expected: domain.dimension(),
                    got: sigmas.len(),
                });
            }
            for &s in sigmas {
                if !(s > 0.0) {
                    return Err(GridError::NonPositiveSigma(s));
                }
            }
            let sigmas = sigmas.clone();
            column_normalized(domain, amplitude, move |i, j| {
                domain
                    .coord(i)
                    .iter()
                    .zip(domain.coord(j))
                    .zip(&sigmas)
                    .map(|((a, b), s)| (-((a - b) * (a - b)) / (2.0 * s * s)).exp())
                    .product()
            })
        }
    };

    Ok(KernelOperator {
        family,
        amplitude,
        matrix,
        weights: w.clone(),
    })
}

fn column_normalized<F: Fn(usize, usize) -> f64>(
    domain: &Domain,
    amplitude: f64,
    shape: F,
) -> DMatrix<f64> {
    let n = domain.node_count();
    let w = domain.weights();
    let mut m = DMatrix::zeros(n, n);
    for j in 0..n {
        let mut z = 0.0;
        for i in 0..n {
            let e = shape(i, j);
            m[(i, j)] = e;
            z += w[i] * e;
        }
        for i in 0..n {
            m[(i, j)] *= amplitude * w[j] / z;
        }
    }
    m
}
