//! Minimal sparse-matrix support for the discrete diffusion operators.
//!
//! The stencil matrices here have at most `2 * dimension + 1` entries per row,
//! so a per-row adjacency list is plenty. Implicit diffusion solves go through
//! [`ImplicitSolver`]: the Thomas algorithm when the matrix is tridiagonal
//! (1D grids), and a weighted conjugate-gradient iteration otherwise. Both
//! paths are deterministic.

use nalgebra::{DMatrix, DVector};

/// Row-major sparse matrix with sorted column entries.
#[derive(Debug, Clone)]
pub struct SparseMatrix {
    n: usize,
    rows: Vec<Vec<(usize, f64)>>,
}

impl SparseMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            rows: vec![Vec::new(); n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Accumulate `value` into entry `(i, j)`.
    pub fn add(&mut self, i: usize, j: usize, value: f64) {
        debug_assert!(i < self.n && j < self.n);
        let row = &mut self.rows[i];
        match row.binary_search_by_key(&j, |&(col, _)| col) {
            Ok(pos) => row[pos].1 += value,
            Err(pos) => row.insert(pos, (j, value)),
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.rows[i]
            .binary_search_by_key(&j, |&(col, _)| col)
            .map(|pos| self.rows[i][pos].1)
            .unwrap_or(0.0)
    }

    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    pub fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        debug_assert_eq!(v.len(), self.n);
        let mut out = DVector::zeros(self.n);
        for (i, row) in self.rows.iter().enumerate() {
            let mut acc = 0.0;
            for &(j, a) in row {
                acc += a * v[j];
            }
            out[i] = acc;
        }
        out
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, a) in row {
                m[(i, j)] = a;
            }
        }
        m
    }

    /// Returns `I + c * self`.
    pub fn identity_plus_scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        for row in &mut out.rows {
            for entry in row.iter_mut() {
                entry.1 *= c;
            }
        }
        for i in 0..out.n {
            out.add(i, i, 1.0);
        }
        out
    }

    /// Dirichlet elimination: rows and columns of nodes with `inside[i]`
    /// are zeroed and the diagonal set to one.
    pub fn dirichlet_restrict(&self, inside: &[bool]) -> Self {
        assert_eq!(inside.len(), self.n);
        let mut out = Self::zeros(self.n);
        for (i, row) in self.rows.iter().enumerate() {
            if inside[i] {
                out.rows[i].push((i, 1.0));
                continue;
            }
            for &(j, a) in row {
                if !inside[j] {
                    out.rows[i].push((j, a));
                }
            }
        }
        out
    }

    pub fn is_tridiagonal(&self) -> bool {
        self.rows.iter().enumerate().all(|(i, row)| {
            row.iter()
                .all(|&(j, _)| i.abs_diff(j) <= 1)
        })
    }

    /// Maximum absolute row sum.
    pub fn infinity_norm(&self) -> f64 {
        self.rows
            .iter()
            .map(|row| row.iter().map(|&(_, a)| a.abs()).sum())
            .fold(0.0, f64::max)
    }
}

/// Failure of an implicit diffusion solve. The matrices are assembled to be
/// strictly diagonally dominant, so this signals an assembly bug upstream.
#[derive(Debug, Clone, thiserror::Error)]
#[error("linear solve failed: {reason}")]
pub struct LinearSolveFailure {
    pub reason: String,
}

/// Prefactored solver for `M x = b` with `M = I + c * L`.
#[derive(Debug, Clone)]
pub enum ImplicitSolver {
    /// Thomas algorithm with precomputed forward-elimination factors.
    Tridiagonal {
        /// Upper-diagonal factors `c'`.
        sup: Vec<f64>,
        /// Pivots after elimination.
        pivots: Vec<f64>,
        sub: Vec<f64>,
    },
    /// Conjugate gradients on the weighted-symmetric form `W M x = W b`.
    ConjugateGradient {
        matrix: SparseMatrix,
        weights: DVector<f64>,
        precond: DVector<f64>,
        tol: f64,
        max_iter: usize,
    },
}

impl ImplicitSolver {
    /// Builds a solver for `matrix`, assumed weighted-self-adjoint and
    /// positive definite. `weights` are the quadrature weights making
    /// `W * matrix` symmetric.
    pub fn new(matrix: &SparseMatrix, weights: &DVector<f64>) -> Self {
        let n = matrix.n();
        if matrix.is_tridiagonal() {
            let mut sub = vec![0.0; n];
            let mut diag = vec![0.0; n];
            let mut sup = vec![0.0; n];
            for i in 0..n {
                for &(j, a) in matrix.row(i) {
                    if j + 1 == i {
                        sub[i] = a;
                    } else if j == i {
                        diag[i] = a;
                    } else {
                        sup[i] = a;
                    }
                }
            }
            // Forward elimination is state-free given the pivots.
            let mut pivots = vec![0.0; n];
            pivots[0] = diag[0];
            for i in 1..n {
                pivots[i] = diag[i] - sub[i] * sup[i - 1] / pivots[i - 1];
            }
            ImplicitSolver::Tridiagonal { sup, pivots, sub }
        } else {
            let precond = DVector::from_fn(n, |i, _| 1.0 / (weights[i] * matrix.get(i, i)));
            ImplicitSolver::ConjugateGradient {
                matrix: matrix.clone(),
                weights: weights.clone(),
                precond,
                tol: 1e-13,
                max_iter: 40 * n.max(50),
            }
        }
    }

    pub fn solve(&self, b: &DVector<f64>) -> Result<DVector<f64>, LinearSolveFailure> {
        match self {
            ImplicitSolver::Tridiagonal { sup, pivots, sub } => {
                let n = b.len();
                let mut y = DVector::zeros(n);
                y[0] = b[0];
                for i in 1..n {
                    y[i] = b[i] - sub[i] / pivots[i - 1] * y[i - 1];
                }
                let mut x = DVector::zeros(n);
                x[n - 1] = y[n - 1] / pivots[n - 1];
                for i in (0..n - 1).rev() {
                    x[i] = (y[i] - sup[i] * x[i + 1]) / pivots[i];
                }
                if x.iter().any(|v| !v.is_finite()) {
                    return Err(LinearSolveFailure {
                        reason: "tridiagonal pivot underflow".into(),
                    });
                }
                Ok(x)
            }
            ImplicitSolver::ConjugateGradient {
                matrix,
                weights,
                precond,
                tol,
                max_iter,
            } => {
                let wb = b.component_mul(weights);
                let apply_wm = |v: &DVector<f64>| matrix.apply(v).component_mul(weights);
                let mut x = DVector::zeros(b.len());
                let mut r = wb.clone();
                let bnorm = wb.norm().max(1e-300);
                let mut z = r.component_mul(precond);
                let mut p = z.clone();
                let mut rz = r.dot(&z);
                for _ in 0..*max_iter {
                    if r.norm() <= tol * bnorm {
                        return Ok(x);
                    }
                    let ap = apply_wm(&p);
                    let alpha = rz / p.dot(&ap);
                    x += alpha * &p;
                    r -= alpha * &ap;
                    z = r.component_mul(precond);
                    let rz_next = r.dot(&z);
                    p = &z + (rz_next / rz) * &p;
                    rz = rz_next;
                }
                if r.norm() <= 1e-9 * bnorm {
                    // Stagnated near roundoff; accept.
                    return Ok(x);
                }
                Err(LinearSolveFailure {
                    reason: format!(
                        "conjugate gradients stalled at relative residual {:.3e}",
                        r.norm() / bnorm
                    ),
                })
            }
        }
    }
}
