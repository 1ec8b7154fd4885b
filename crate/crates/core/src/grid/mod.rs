//! Spatial discretization of the habitat.
//!
//! A [`Domain`] is a uniform tensor grid on an interval or a rectangle,
//! carrying trapezoid quadrature weights. On top of it sit the diffusion
//! operator with third-type boundary conditions ([`RobinOperator`]), the
//! quadrature-weighted nonlocal kernel matrix ([`KernelOperator`]) and the
//! control subregion geometry ([`ControlRegion`]). Everything is immutable
//! after assembly and safe to share across threads.

mod kernel;
mod region;
mod robin;
mod sparse;

pub use kernel::{build_kernel, KernelFamily, KernelOperator};
pub use region::{make_region, ControlRegion, Facet, RegionShape};
pub use robin::{assemble_robin_laplacian, RobinOperator};
pub use sparse::{ImplicitSolver, LinearSolveFailure, SparseMatrix};

use nalgebra::DVector;

/// Errors from grid construction and region geometry.
#[derive(Debug, Clone, thiserror::Error)]
pub enum GridError {
    #[error("dimension must be 1 or 2, got {0}")]
    UnsupportedDimension(usize),
    #[error("extents must be positive, got {0}")]
    DegenerateExtent(f64),
    #[error("need at least 8 nodes per axis, got {0}")]
    TooFewNodes(usize),
    #[error("expected {expected} entries for {what}, got {got}")]
    ShapeMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("grid spacing differs across axes ({0} vs {1}); use matching extents/nodes")]
    AnisotropicSpacing(f64, f64),
    #[error("kernel width sigma must be positive, got {0}")]
    NonPositiveSigma(f64),
    #[error("kernel amplitude must be nonnegative, got {0} (violates H2)")]
    NegativeAmplitude(f64),
    #[error("region closure must stay at least 2h = {clearance} away from the habitat boundary")]
    RegionTouchesBoundary { clearance: f64 },
    #[error("region contains no grid nodes")]
    EmptyRegion,
    #[error("region size parameters must be positive")]
    DegenerateRegion,
    #[error("diffusivity must be positive, got {0}")]
    NonPositiveDiffusivity(f64),
    #[error("Robin coefficient must be nonnegative, got {0}")]
    NegativeRobinCoefficient(f64),
}

/// Uniform tensor grid over an interval `(0, L)` or rectangle
/// `(0, Lx) x (0, Ly)`, nodes placed on the closure including the boundary.
#[derive(Debug, Clone)]
pub struct Domain {
    dimension: usize,
    extents: Vec<f64>,
    nodes_per_axis: Vec<usize>,
    spacing: f64,
    /// Flat coordinate storage, `dimension` entries per node.
    coords: Vec<f64>,
    weights: DVector<f64>,
    interior: Vec<usize>,
    boundary: Vec<usize>,
}

impl Domain {
    /// Builds the grid. Node `i` along an axis with `n` nodes sits at `i * h`
    /// with `h = extent / (n - 1)`; quadrature weights are the tensor-product
    /// trapezoid rule, so they sum to the measure of the habitat exactly.
    pub fn build(extents: &[f64], nodes_per_axis: &[usize]) -> Result<Self, GridError> {
        let dimension = extents.len();
        if dimension != 1 && dimension != 2 {
            return Err(GridError::UnsupportedDimension(dimension));
        }
        if nodes_per_axis.len() != dimension {
            return Err(GridError::ShapeMismatch {
                what: "nodes_per_axis",
                expected: dimension,
                got: nodes_per_axis.len(),
            });
        }
        for &e in extents {
            if !(e > 0.0) || !e.is_finite() {
                return Err(GridError::DegenerateExtent(e));
            }
        }
        for &n in nodes_per_axis {
            if n < 8 {
                return Err(GridError::TooFewNodes(n));
            }
        }
        let spacings: Vec<f64> = extents
            .iter()
            .zip(nodes_per_axis)
            .map(|(&e, &n)| e / (n - 1) as f64)
            .collect();
        let spacing = spacings[0];
        if dimension == 2 && (spacings[1] - spacing).abs() > 1e-12 * spacing {
            return Err(GridError::AnisotropicSpacing(spacing, spacings[1]));
        }

        let n_total: usize = nodes_per_axis.iter().product();
        let mut coords = Vec::with_capacity(n_total * dimension);
        let mut weights = DVector::zeros(n_total);
        let mut interior = Vec::new();
        let mut boundary = Vec::new();

        let axis_weight = |idx: usize, n: usize| -> f64 {
            if idx == 0 || idx + 1 == n {
                0.5 * spacing
            } else {
                spacing
            }
        };

        match dimension {
            1 => {
                let n = nodes_per_axis[0];
                for i in 0..n {
                    coords.push(i as f64 * spacing);
                    weights[i] = axis_weight(i, n);
                    if i == 0 || i + 1 == n {
                        boundary.push(i);
                    } else {
                        interior.push(i);
                    }
                }
            }
            _ => {
                let (nx, ny) = (nodes_per_axis[0], nodes_per_axis[1]);
                for iy in 0..ny {
                    for ix in 0..nx {
                        let idx = iy * nx + ix;
                        coords.push(ix as f64 * spacing);
                        coords.push(iy as f64 * spacing);
                        weights[idx] = axis_weight(ix, nx) * axis_weight(iy, ny);
                        if ix == 0 || ix + 1 == nx || iy == 0 || iy + 1 == ny {
                            boundary.push(idx);
                        } else {
                            interior.push(idx);
                        }
                    }
                }
            }
        }

        Ok(Self {
            dimension,
            extents: extents.to_vec(),
            nodes_per_axis: nodes_per_axis.to_vec(),
            spacing,
            coords,
            weights,
            interior,
            boundary,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn extents(&self) -> &[f64] {
        &self.extents
    }

    pub fn nodes_per_axis(&self) -> &[usize] {
        &self.nodes_per_axis
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn node_count(&self) -> usize {
        self.weights.len()
    }

    pub fn coord(&self, node: usize) -> &[f64] {
        &self.coords[node * self.dimension..(node + 1) * self.dimension]
    }

    pub fn weights(&self) -> &DVector<f64> {
        &self.weights
    }

    pub fn interior_nodes(&self) -> &[usize] {
        &self.interior
    }

    pub fn boundary_nodes(&self) -> &[usize] {
        &self.boundary
    }

    /// Measure of the habitat.
    pub fn measure(&self) -> f64 {
        self.extents.iter().product()
    }

    /// Trapezoid quadrature of a nodal field.
    pub fn integrate(&self, field: &DVector<f64>) -> f64 {
        self.weights.dot(field)
    }

    /// Squared Euclidean distance between two nodes.
    pub fn distance_sq(&self, a: usize, b: usize) -> f64 {
        self.coord(a)
            .iter()
            .zip(self.coord(b))
            .map(|(x, y)| (x - y) * (x - y))
            .sum()
    }

    /// Grid-adjacent node pairs along `axis`, as `(lower, upper)` indices.
    pub fn axis_edges(&self, axis: usize) -> Vec<(usize, usize)> {
        let mut edges = Vec::new();
        match self.dimension {
            1 => {
                let n = self.nodes_per_axis[0];
                for i in 0..n - 1 {
                    edges.push((i, i + 1));
                }
            }
            _ => {
                let (nx, ny) = (self.nodes_per_axis[0], self.nodes_per_axis[1]);
                if axis == 0 {
                    for iy in 0..ny {
                        for ix in 0..nx - 1 {
                            edges.push((iy * nx + ix, iy * nx + ix + 1));
                        }
                    }
                } else {
                    for iy in 0..ny - 1 {
                        for ix in 0..nx {
                            edges.push((iy * nx + ix, (iy + 1) * nx + ix));
                        }
                    }
                }
            }
        }
        edges
    }

    /// Grid neighbours of a node (4-neighbourhood in 2D).
    pub fn neighbours(&self, node: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(2 * self.dimension);
        match self.dimension {
            1 => {
                let n = self.nodes_per_axis[0];
                if node > 0 {
                    out.push(node - 1);
                }
                if node + 1 < n {
                    out.push(node + 1);
                }
            }
            _ => {
                let (nx, ny) = (self.nodes_per_axis[0], self.nodes_per_axis[1]);
                let (ix, iy) = (node % nx, node / nx);
                if ix > 0 {
                    out.push(node - 1);
                }
                if ix + 1 < nx {
                    out.push(node + 1);
                }
                if iy > 0 {
                    out.push(node - nx);
                }
                if iy + 1 < ny {
                    out.push(node + nx);
                }
            }
        }
        out
    }
}

/// Convenience wrapper matching the operation name used by callers.
pub fn build_domain(
    dimension: usize,
    extents: &[f64],
    nodes_per_axis: &[usize],
) -> Result<Domain, GridError> {
    if dimension != extents.len() {
        return Err(GridError::ShapeMismatch {
            what: "extents",
            expected: dimension,
            got: extents.len(),
        });
    }
    Domain::build(extents, nodes_per_axis)
}

/// Diffusion and kernel matrices with Dirichlet rows eliminated on the
/// closure of a control region; the eigenproblem on the complement and the
/// period-map evolution act on these.
#[derive(Debug, Clone)]
pub struct RestrictedOperators {
    /// Diffusion matrix with identity rows at region nodes.
    pub laplacian: SparseMatrix,
    /// Kernel matrix with region rows and columns zeroed.
    pub kernel: nalgebra::DMatrix<f64>,
    /// Complement (active) node indices.
    pub active: Vec<usize>,
    /// Region (Dirichlet) node indices.
    pub dirichlet: Vec<usize>,
}

/// Builds the discrete operator pair on the complement of the region closure:
/// rows and columns at region nodes are replaced by identity-row Dirichlet
/// elimination, and the kernel integral is restricted to complement nodes.
pub fn restrict_to_complement(
    robin: &RobinOperator,
    kernel: &KernelOperator,
    region: &ControlRegion,
) -> RestrictedOperators {
    restrict_to_complement_nodes(robin, kernel, region.indicator())
}

/// As [`restrict_to_complement`], taking the node indicator directly.
pub fn restrict_to_complement_nodes(
    robin: &RobinOperator,
    kernel: &KernelOperator,
    inside: &[bool],
) -> RestrictedOperators {
    let laplacian = robin.matrix().dirichlet_restrict(inside);
    let mut k = kernel.matrix().clone();
    for (i, &inside_i) in inside.iter().enumerate() {
        if inside_i {
            k.row_mut(i).fill(0.0);
            k.column_mut(i).fill(0.0);
        }
    }
    let mut active = Vec::new();
    let mut dirichlet = Vec::new();
    for (i, &inside_i) in inside.iter().enumerate() {
        if inside_i {
            dirichlet.push(i);
        } else {
            active.push(i);
        }
    }
    RestrictedOperators {
        laplacian,
        kernel: k,
        active,
        dirichlet,
    }
}

/// Checks whether the complement nodes form one connected component of the
/// coupling graph (grid adjacency plus nonzero kernel entries). The
/// continuous theory asks for a connected complement; on grids we can only
/// check node connectivity, and callers warn when it fails.
pub fn complement_connected(
    domain: &Domain,
    kernel: &KernelOperator,
    indicator: &[bool],
) -> bool {
    let n = domain.node_count();
    let active: Vec<usize> = (0..n).filter(|&i| !indicator[i]).collect();
    if active.is_empty() {
        return true;
    }
    let mut seen = vec![false; n];
    let mut stack = vec![active[0]];
    seen[active[0]] = true;
    let mut visited = 0usize;
    while let Some(i) = stack.pop() {
        visited += 1;
        for j in domain.neighbours(i) {
            if !indicator[j] && !seen[j] {
                seen[j] = true;
                stack.push(j);
            }
        }
        for j in 0..n {
            if !indicator[j] && !seen[j] && kernel.matrix()[(i, j)] > 1e-14 {
                seen[j] = true;
                stack.push(j);
            }
        }
    }
    visited == active.len()
}
