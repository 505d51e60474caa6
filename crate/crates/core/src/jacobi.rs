//! Gradient alignment values, the PL critical-edge test and local bilinear
//! Jacobi set points.
//!
//! For two fields `f`, `g` the gradient alignment value is
//! `kappa = df/dx * dg/dy - df/dy * dg/dx`; the Jacobi set is its zero set.
//! An interior edge `ab` is PL-critical when the piecewise constant `kappa`
//! of its two incident triangles has strictly opposite signs. Each critical
//! edge is then replaced by one point on the polyline `v1 -> m -> v2`
//! (`m` the edge midpoint) where the bilinear `kappa` of the enclosing quad
//! crosses zero.

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fields::ScalarGrid;
use crate::mesh::{
    signed_parallelogram_area, EdgeId, EdgeNeighborhood, MeshError, Point2, Triangulation, VertexId,
};

/// Raw interpolation parameters outside `[0, 1]` by more than this are
/// reported before clamping.
pub const LAMBDA_SLACK: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum JacobiError {
    #[error("degenerate geometry at edge {edge}: {reason}")]
    DegenerateGeometry { edge: EdgeId, reason: &'static str },
    #[error("edge {0} lies on the boundary and has a single link vertex")]
    BoundaryEdge(EdgeId),
    #[error("edge {0} is not PL-critical")]
    NotCritical(EdgeId),
    #[error("field lattice {field:?} does not match triangulation {mesh:?}")]
    DimensionMismatch {
        field: (usize, usize),
        mesh: (usize, usize),
    },
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KappaKind {
    Linear,
    Bilinear,
}

/// Gradient alignment values at the two link vertices of an edge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KappaPair {
    pub v1: f64,
    pub v2: f64,
    pub kind: KappaKind,
}

impl KappaPair {
    /// Strictly opposite signs.
    pub fn signs_differ(&self) -> bool {
        self.v1 * self.v2 < 0.0
    }

    pub fn scaled(self, s: f64) -> Self {
        Self {
            v1: self.v1 * s,
            v2: self.v2 * s,
            ..self
        }
    }
}

/// Which pair of kappa values placed a Jacobi set point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KappaSource {
    Bilinear,
    LinearFallback,
    /// Neither pair changes sign; the point sits at the edge midpoint.
    Degenerate,
}

/// A PL-critical edge and its Jacobi set point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalEdgeRecord {
    pub edge: EdgeId,
    pub a: VertexId,
    pub b: VertexId,
    /// Whether `a` and `b` lie on the domain boundary.
    pub endpoint_on_boundary: [bool; 2],
    pub point: Point2,
    /// Position along `v1 -> m -> v2`, `0` at `v1` and `1` at `v2`.
    pub lambda: f64,
    pub source: KappaSource,
    pub kappa_linear: KappaPair,
    pub kappa_bilinear: KappaPair,
}

impl CriticalEdgeRecord {
    /// A bare record for hand-built incidence patterns: interior endpoints,
    /// given point, midpoint placement.
    pub fn synthetic(edge: EdgeId, a: VertexId, b: VertexId, point: Point2) -> Self {
        let zero = KappaPair {
            v1: 0.0,
            v2: 0.0,
            kind: KappaKind::Linear,
        };
        Self {
            edge,
            a,
            b,
            endpoint_on_boundary: [false, false],
            point,
            lambda: 0.5,
            source: KappaSource::Degenerate,
            kappa_linear: zero,
            kappa_bilinear: KappaPair {
                kind: KappaKind::Bilinear,
                ..zero
            },
        }
    }

    pub fn endpoints(&self) -> [VertexId; 2] {
        [self.a, self.b]
    }
}

/// Constant `kappa` of the linear interpolants on triangle `(p1, p2, p3)`:
/// `[(f2 - f1) g3 + (f1 - f3) g2 + (f3 - f2) g1] / A(p1, p2, p3)`.
///
/// The value does not depend on the orientation of the triangle.
#[inline]
pub fn triangle_kappa(p: [Point2; 3], f: [f64; 3], g: [f64; 3]) -> Option<f64> {
    let area = signed_parallelogram_area(p[0], p[1], p[2]);
    if area == 0.0 {
        return None;
    }
    let (df1, df2) = (f[1] - f[0], f[2] - f[0]);
    let (dg1, dg2) = (g[1] - g[0], g[2] - g[0]);
    let num = df1 * dg2 - df2 * dg1;
    Some(num / area)
}

fn samples(grid: &ScalarGrid, ids: [VertexId; 3]) -> [f64; 3] {
    ids.map(|v| grid.at(v as usize))
}

fn interior_v2(nb: &EdgeNeighborhood) -> Result<crate::mesh::MeshVertex, JacobiError> {
    nb.v2.ok_or(JacobiError::BoundaryEdge(nb.edge))
}

/// `kappa` of a mesh triangle, evaluated in ascending vertex-id order so the
/// two edges sharing a triangle see bit-identical values.
fn mesh_triangle_kappa(
    mut tri: [crate::mesh::MeshVertex; 3],
    f: &ScalarGrid,
    g: &ScalarGrid,
) -> Option<f64> {
    tri.sort_by_key(|v| v.id);
    let ids = tri.map(|v| v.id);
    triangle_kappa(tri.map(|v| v.pos), samples(f, ids), samples(g, ids))
}

/// Linear `kappa` of triangles `(a, b, v1)` and `(a, v2, b)`.
pub fn kappa_linear(
    nb: &EdgeNeighborhood,
    f: &ScalarGrid,
    g: &ScalarGrid,
) -> Result<KappaPair, JacobiError> {
    let v2 = interior_v2(nb)?;
    let degenerate = || JacobiError::DegenerateGeometry {
        edge: nb.edge,
        reason: "zero-area link triangle",
    };
    let k1 = mesh_triangle_kappa([nb.a, nb.b, nb.v1], f, g).ok_or_else(degenerate)?;
    let k2 = mesh_triangle_kappa([nb.a, v2, nb.b], f, g).ok_or_else(degenerate)?;
    Ok(KappaPair {
        v1: k1,
        v2: k2,
        kind: KappaKind::Linear,
    })
}

/// Strict sign test on a linear pair. Exact zeros are not critical.
#[inline]
pub fn is_critical(k: &KappaPair) -> bool {
    debug_assert_eq!(k.kind, KappaKind::Linear);
    k.signs_differ()
}

/// Isoparametric bilinear interpolation of two fields on a quad.
///
/// The unit square maps to the quad with `(0,0) -> c[0]`, `(1,0) -> c[1]`,
/// `(1,1) -> c[2]`, `(0,1) -> c[3]`; the field values are interpolated with
/// the same shape functions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadInterpolant {
    pub corners: [Point2; 4],
    pub f: [f64; 4],
    pub g: [f64; 4],
}

impl QuadInterpolant {
    /// Quad `(a, v1, b, v2)` around an interior edge.
    pub fn around_edge(
        nb: &EdgeNeighborhood,
        f: &ScalarGrid,
        g: &ScalarGrid,
    ) -> Result<Self, JacobiError> {
        let quad = nb.quad().ok_or(JacobiError::BoundaryEdge(nb.edge))?;
        Ok(Self {
            corners: quad.map(|v| v.pos),
            f: quad.map(|v| f.at(v.id as usize)),
            g: quad.map(|v| g.at(v.id as usize)),
        })
    }

    fn weights(s: f64, t: f64) -> [f64; 4] {
        [(1.0 - s) * (1.0 - t), s * (1.0 - t), s * t, (1.0 - s) * t]
    }

    /// Maps a parameter point to world coordinates.
    pub fn map(&self, s: f64, t: f64) -> Point2 {
        let w = Self::weights(s, t);
        (0..4).fold(Point2::default(), |acc, k| acc + self.corners[k] * w[k])
    }

    /// Interpolated `(f, g)` at a parameter point.
    pub fn values(&self, s: f64, t: f64) -> (f64, f64) {
        let w = Self::weights(s, t);
        let dot = |v: &[f64; 4]| (0..4).map(|k| v[k] * w[k]).sum::<f64>();
        (dot(&self.f), dot(&self.g))
    }

    fn param_derivatives(v: &[f64; 4], s: f64, t: f64) -> (f64, f64) {
        let ds = (v[1] - v[0]) * (1.0 - t) + (v[2] - v[3]) * t;
        let dt = (v[3] - v[0]) * (1.0 - s) + (v[2] - v[1]) * s;
        (ds, dt)
    }

    /// Jacobian determinant of the map at `(s, t)`.
    pub fn jacobian_det(&self, s: f64, t: f64) -> f64 {
        let c = &self.corners;
        let xs = (c[1] - c[0]) * (1.0 - t) + (c[2] - c[3]) * t;
        let xt = (c[3] - c[0]) * (1.0 - s) + (c[2] - c[1]) * s;
        xs.cross(xt)
    }

    /// World-space gradient alignment value at parameter point `(s, t)`.
    ///
    /// With `J` the map's Jacobian, `grad F = J^-T (F_s, F_t)`, hence
    /// `kappa = (F_s G_t - F_t G_s) / det J`.
    pub fn kappa_at(&self, s: f64, t: f64) -> Option<f64> {
        let det = self.jacobian_det(s, t);
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        let (fs, ft) = Self::param_derivatives(&self.f, s, t);
        let (gs, gt) = Self::param_derivatives(&self.g, s, t);
        Some((fs * gt - ft * gs) / det)
    }
}

/// Bilinear `kappa` at the corners `v1` and `v2` of the quad `(a, v1, b, v2)`.
pub fn kappa_bilinear(
    nb: &EdgeNeighborhood,
    f: &ScalarGrid,
    g: &ScalarGrid,
) -> Result<KappaPair, JacobiError> {
    let quad = QuadInterpolant::around_edge(nb, f, g)?;
    let degenerate = || JacobiError::DegenerateGeometry {
        edge: nb.edge,
        reason: "singular bilinear map at a link vertex",
    };
    let k1 = quad.kappa_at(1.0, 0.0).ok_or_else(degenerate)?;
    let k2 = quad.kappa_at(0.0, 1.0).ok_or_else(degenerate)?;
    Ok(KappaPair {
        v1: k1,
        v2: k2,
        kind: KappaKind::Bilinear,
    })
}

/// Where a Jacobi set point lands on `v1 -> m -> v2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobiPlacement {
    pub point: Point2,
    pub lambda: f64,
    pub source: KappaSource,
}

/// Zero of the linear interpolant between `k.v1` (at 0) and `k.v2` (at 1).
fn zero_crossing(k: &KappaPair) -> f64 {
    k.v1 / (k.v1 - k.v2)
}

/// Places the Jacobi set point from precomputed kappa pairs.
///
/// The bilinear pair is used when its signs differ, otherwise the linear
/// pair. `lambda` below one half walks from `v1` towards the midpoint `m`,
/// above one half from `m` towards `v2`.
pub fn place_jacobi_point(
    nb: &EdgeNeighborhood,
    linear: &KappaPair,
    bilinear: &KappaPair,
) -> Result<JacobiPlacement, JacobiError> {
    let v1 = nb.v1.pos;
    let v2 = interior_v2(nb)?.pos;
    let m = nb.a.pos + (nb.b.pos - nb.a.pos) * 0.5;

    let (raw, source) = if bilinear.signs_differ() {
        (zero_crossing(bilinear), KappaSource::Bilinear)
    } else if linear.signs_differ() {
        (zero_crossing(linear), KappaSource::LinearFallback)
    } else {
        return Ok(JacobiPlacement {
            point: m,
            lambda: 0.5,
            source: KappaSource::Degenerate,
        });
    };

    if !(-LAMBDA_SLACK..=1.0 + LAMBDA_SLACK).contains(&raw) {
        warn!("edge {}: lambda {raw} outside [0, 1], clamping", nb.edge);
    }
    let lambda = raw.clamp(0.0, 1.0);
    let point = if lambda < 0.5 {
        v1 + (m - v1) * (2.0 * lambda)
    } else {
        m + (m - v2) * (1.0 - 2.0 * lambda)
    };
    Ok(JacobiPlacement {
        point,
        lambda,
        source,
    })
}

fn record_for(
    t: &Triangulation,
    nb: &EdgeNeighborhood,
    linear: KappaPair,
    f: &ScalarGrid,
    g: &ScalarGrid,
) -> Result<CriticalEdgeRecord, JacobiError> {
    let bilinear = kappa_bilinear(nb, f, g)?;
    let placed = place_jacobi_point(nb, &linear, &bilinear)?;
    Ok(CriticalEdgeRecord {
        edge: nb.edge,
        a: nb.a.id,
        b: nb.b.id,
        endpoint_on_boundary: [t.is_boundary_vertex(nb.a.id), t.is_boundary_vertex(nb.b.id)],
        point: placed.point,
        lambda: placed.lambda,
        source: placed.source,
        kappa_linear: linear,
        kappa_bilinear: bilinear,
    })
}

/// Jacobi set point of one PL-critical edge.
pub fn jacobi_point(
    t: &Triangulation,
    e: EdgeId,
    f: &ScalarGrid,
    g: &ScalarGrid,
) -> Result<CriticalEdgeRecord, JacobiError> {
    check_lattice(t, f)?;
    check_lattice(t, g)?;
    let nb = t.edge_neighborhood(e)?;
    let linear = kappa_linear(&nb, f, g)?;
    if !is_critical(&linear) {
        return Err(JacobiError::NotCritical(e));
    }
    record_for(t, &nb, linear, f, g)
}

fn check_lattice(t: &Triangulation, grid: &ScalarGrid) -> Result<(), JacobiError> {
    if grid.nx() != t.nx() || grid.ny() != t.ny() {
        return Err(JacobiError::DimensionMismatch {
            field: (grid.nx(), grid.ny()),
            mesh: (t.nx(), t.ny()),
        });
    }
    Ok(())
}

/// Ids of the PL-critical interior edges, ascending.
pub fn critical_edge_ids(
    f: &ScalarGrid,
    g: &ScalarGrid,
    t: &Triangulation,
) -> Result<Vec<EdgeId>, JacobiError> {
    check_lattice(t, f)?;
    check_lattice(t, g)?;
    (0..t.edges().len() as EdgeId)
        .into_par_iter()
        .filter(|&e| !t.is_boundary_edge(e))
        .filter_map(|e| {
            let nb = match t.edge_neighborhood(e) {
                Ok(nb) => nb,
                Err(err) => return Some(Err(err.into())),
            };
            match kappa_linear(&nb, f, g) {
                Ok(k) => is_critical(&k).then_some(Ok(e)),
                Err(err) => Some(Err(err)),
            }
        })
        .collect()
}

/// Runs the critical-edge test on every interior edge and places one Jacobi
/// set point per critical edge. Output is sorted by edge id regardless of
/// how many threads the current rayon pool has.
pub fn extract_critical_edges(
    f: &ScalarGrid,
    g: &ScalarGrid,
    t: &Triangulation,
) -> Result<Vec<CriticalEdgeRecord>, JacobiError> {
    check_lattice(t, f)?;
    check_lattice(t, g)?;
    (0..t.edges().len() as EdgeId)
        .into_par_iter()
        .filter(|&e| !t.is_boundary_edge(e))
        .filter_map(|e| {
            let run = || -> Result<Option<CriticalEdgeRecord>, JacobiError> {
                let nb = t.edge_neighborhood(e)?;
                let linear = kappa_linear(&nb, f, g)?;
                if !is_critical(&linear) {
                    return Ok(None);
                }
                record_for(t, &nb, linear, f, g).map(Some)
            };
            run().transpose()
        })
        .collect()
}

/// Critical-edge degree of every mesh vertex.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeReport {
    /// Indexed by vertex id.
    pub degrees: Vec<u32>,
    /// Interior vertices whose degree is odd.
    pub odd_interior: Vec<VertexId>,
    /// `(vertex, degree)` for boundary vertices with nonzero degree.
    pub boundary: Vec<(VertexId, u32)>,
}

impl DegreeReport {
    pub fn holds(&self) -> bool {
        self.odd_interior.is_empty()
    }

    pub fn degree_sum(&self) -> u64 {
        self.degrees.iter().map(|&d| d as u64).sum()
    }

    /// `histogram[d]` = number of vertices of degree `d`.
    pub fn histogram(&self) -> Vec<usize> {
        let max = self.degrees.iter().copied().max().unwrap_or(0) as usize;
        let mut h = vec![0; max + 1];
        for &d in &self.degrees {
            h[d as usize] += 1;
        }
        h
    }
}

/// Counts critical edges per vertex and lists parity violations.
pub fn check_even_degree(records: &[CriticalEdgeRecord], t: &Triangulation) -> DegreeReport {
    let mut degrees = vec![0u32; t.vertex_count()];
    for r in records {
        degrees[r.a as usize] += 1;
        degrees[r.b as usize] += 1;
    }
    let mut odd_interior = Vec::new();
    let mut boundary = Vec::new();
    for (v, &d) in degrees.iter().enumerate() {
        let v = v as VertexId;
        if t.is_boundary_vertex(v) {
            if d > 0 {
                boundary.push((v, d));
            }
        } else if d % 2 == 1 {
            odd_interior.push(v);
        }
    }
    DegreeReport {
        degrees,
        odd_interior,
        boundary,
    }
}
