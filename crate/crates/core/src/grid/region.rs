//! Control subregion geometry: node indicator, and boundary facets with
//! inward normals for the shape-derivative quadrature.
//!
//! Facets are placed at midpoints of grid edges whose endpoints straddle the
//! region boundary. The unit normal comes from the analytic shape (not from
//! the grid staircase), and a facet crossing an edge along axis `a` carries
//! the surface weight `h^(d-1) * |nu_a|`, so the facet weights sum to the
//! boundary measure up to O(h).

use super::{Domain, GridError};

#[derive(Debug, Clone, PartialEq)]
pub enum RegionShape {
    Interval { half_width: f64 },
    Ball { radius: f64 },
    Box { half_widths: Vec<f64> },
}

impl RegionShape {
    /// Half-extent along each axis, used for the interior-clearance check.
    fn half_extents(&self, dimension: usize) -> Result<Vec<f64>, GridError> {
        let ext = match self {
            RegionShape::Interval { half_width } => {
                if dimension != 1 {
                    return Err(GridError::UnsupportedDimension(dimension));
                }
                vec![*half_width]
            }
            RegionShape::Ball { radius } => vec![*radius; dimension],
            RegionShape::Box { half_widths } => {
                if half_widths.len() != dimension {
                    return Err(GridError::ShapeMismatch {
                        what: "box half_widths",
                        expected: dimension,
                        got: half_widths.len(),
                    });
                }
                half_widths.clone()
            }
        };
        if ext.iter().any(|&e| !(e > 0.0) || !e.is_finite()) {
            return Err(GridError::DegenerateRegion);
        }
        Ok(ext)
    }

    /// Closed membership test with a tiny tolerance against ties on node
    /// coordinates; the indicator marks the grid portion of the closure.
    fn contains(&self, center: &[f64], point: &[f64]) -> bool {
        let tol = 1e-12;
        match self {
            RegionShape::Interval { half_width } => {
                (point[0] - center[0]).abs() <= half_width + tol
            }
            RegionShape::Ball { radius } => {
                let d2: f64 = point
                    .iter()
                    .zip(center)
                    .map(|(p, c)| (p - c) * (p - c))
                    .sum();
                d2.sqrt() <= radius + tol
            }
            RegionShape::Box { half_widths } => point
                .iter()
                .zip(center)
                .zip(half_widths)
                .all(|((p, c), hw)| (p - c).abs() <= hw + tol),
        }
    }

    /// Unit normal at a boundary point, pointing into the region.
    fn inward_normal(&self, center: &[f64], point: &[f64]) -> Vec<f64> {
        match self {
            RegionShape::Interval { .. } => {
                vec![if point[0] < center[0] { 1.0 } else { -1.0 }]
            }
            RegionShape::Ball { .. } => {
                let mut v: Vec<f64> = center.iter().zip(point).map(|(c, p)| c - p).collect();
                let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                for x in &mut v {
                    *x /= norm;
                }
                v
            }
            RegionShape::Box { half_widths } => {
                // The face closest (in scaled distance) to the point.
                let (axis, _) = point
                    .iter()
                    .zip(center)
                    .zip(half_widths)
                    .map(|((p, c), hw)| (p - c).abs() / hw)
                    .enumerate()
                    .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
                    .unwrap();
                let mut v = vec![0.0; point.len()];
                v[axis] = if point[axis] < center[axis] { 1.0 } else { -1.0 };
                v
            }
        }
    }
}

/// One boundary facet: the straddling node pair, the edge midpoint, the
/// analytic inward unit normal there, and the surface quadrature weight.
#[derive(Debug, Clone)]
pub struct Facet {
    pub node_in: usize,
    pub node_out: usize,
    pub midpoint: Vec<f64>,
    pub normal: Vec<f64>,
    pub weight: f64,
}

#[derive(Debug, Clone)]
pub struct ControlRegion {
    shape: RegionShape,
    center: Vec<f64>,
    indicator: Vec<bool>,
    inside_nodes: Vec<usize>,
    facets: Vec<Facet>,
}

impl ControlRegion {
    pub fn shape(&self) -> &RegionShape {
        &self.shape
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    /// Node indicator of the region closure on the grid.
    pub fn indicator(&self) -> &[bool] {
        &self.indicator
    }

    pub fn inside_nodes(&self) -> &[usize] {
        &self.inside_nodes
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    /// Discrete measure of the region (quadrature mass of the indicator).
    pub fn measure(&self, domain: &Domain) -> f64 {
        self.inside_nodes
            .iter()
            .map(|&i| domain.weights()[i])
            .sum()
    }

    /// Sum of boundary facet weights, approximating the boundary measure.
    pub fn boundary_measure(&self) -> f64 {
        self.facets.iter().map(|f| f.weight).sum()
    }

    /// Admissible range for each center coordinate under the clearance rule.
    pub fn admissible_center_bounds(&self, domain: &Domain) -> Result<Vec<(f64, f64)>, GridError> {
        let ext = self.shape.half_extents(domain.dimension())?;
        let margin = 2.0 * domain.spacing();
        Ok(domain
            .extents()
            .iter()
            .zip(&ext)
            .map(|(&length, &e)| (margin + e, length - margin - e))
            .collect())
    }

    /// Same shape and size, shifted center; the indicator and facets are
    /// recomputed on the fixed grid.
    pub fn translate(&self, domain: &Domain, shift: &[f64]) -> Result<Self, GridError> {
        if shift.len() != self.center.len() {
            return Err(GridError::ShapeMismatch {
                what: "translation vector",
                expected: self.center.len(),
                got: shift.len(),
            });
        }
        let center: Vec<f64> = self.center.iter().zip(shift).map(|(c, s)| c + s).collect();
        make_region(domain, self.shape.clone(), &center)
    }
}

/// Builds a control region strictly inside the habitat: the closure must
/// keep a clearance of at least `2h` from the habitat boundary, and at least
/// one grid node must fall inside.
pub fn make_region(
    domain: &Domain,
    shape: RegionShape,
    center: &[f64],
) -> Result<ControlRegion, GridError> {
    let dim = domain.dimension();
    if center.len() != dim {
        return Err(GridError::ShapeMismatch {
            what: "region center",
            expected: dim,
            got: center.len(),
        });
    }
    let ext = shape.half_extents(dim)?;
    let margin = 2.0 * domain.spacing();
    let slack = 1e-12;
    for axis in 0..dim {
        let lo = center[axis] - ext[axis];
        let hi = center[axis] + ext[axis];
        if lo < margin - slack || hi > domain.extents()[axis] - margin + slack {
            return Err(GridError::RegionTouchesBoundary { clearance: margin });
        }
    }

    let n = domain.node_count();
    let mut indicator = vec![false; n];
    let mut inside_nodes = Vec::new();
    for i in 0..n {
        if shape.contains(center, domain.coord(i)) {
            indicator[i] = true;
            inside_nodes.push(i);
        }
    }
    if inside_nodes.is_empty() {
        return Err(GridError::EmptyRegion);
    }

    let h = domain.spacing();
    let face_weight = h.powi(dim as i32 - 1);
    let mut facets = Vec::new();
    for axis in 0..dim {
        for (p, q) in domain.axis_edges(axis) {
            if indicator[p] == indicator[q] {
                continue;
            }
            let (node_in, node_out) = if indicator[p] { (p, q) } else { (q, p) };
            let midpoint: Vec<f64> = domain
                .coord(p)
                .iter()
                .zip(domain.coord(q))
                .map(|(a, b)| 0.5 * (a + b))
                .collect();
            let normal = shape.inward_normal(center, &midpoint);
            let weight = face_weight * normal[axis].abs();
            facets.push(Facet {
                node_in,
                node_out,
                midpoint,
                normal,
                weight,
            });
        }
    }

    Ok(ControlRegion {
        shape,
        center: center.to_vec(),
        indicator,
        inside_nodes,
        facets,
    })
}
