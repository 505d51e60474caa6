//! Triangulation of a regular lattice and the edge neighbourhood queries used
//! by the critical-edge test.
//!
//! Every cell is split by the diagonal running from its lower-left to its
//! upper-right corner. Ids are row-major and stable:
//!
//! * vertex `(i, j)` has id `j * nx + i`;
//! * edges are emitted per lower endpoint in vertex order, each vertex
//!   contributing (when they exist) its horizontal edge to `(i + 1, j)`, its
//!   vertical edge to `(i, j + 1)` and its diagonal edge to `(i + 1, j + 1)`,
//!   in that order;
//! * cell `(i, j)` owns triangles `2 * (j * (nx - 1) + i)` (lower-right,
//!   `v00 v10 v11`) and `+ 1` (upper-left, `v00 v11 v01`), both
//!   counter-clockwise.

use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type VertexId = u32;
pub type EdgeId = u32;

const NONE: u32 = u32::MAX;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MeshError {
    #[error("grid must have at least 2x2 vertices, got {nx}x{ny}")]
    TooSmall { nx: usize, ny: usize },
    #[error("edge {0} does not exist")]
    UnknownEdge(EdgeId),
    #[error("grid of {nx}x{ny} vertices exceeds the 32-bit id space")]
    TooLarge { nx: usize, ny: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn midpoint(self, other: Point2) -> Point2 {
        self + (other - self) * 0.5
    }

    pub fn cross(self, other: Point2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn dot(self, other: Point2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    /// Euclidean distance from `self` to the closed segment `a`-`b`.
    pub fn distance_to_segment(self, a: Point2, b: Point2) -> f64 {
        let ab = b - a;
        let len2 = ab.dot(ab);
        if len2 == 0.0 {
            return (self - a).norm();
        }
        let t = ((self - a).dot(ab) / len2).clamp(0.0, 1.0);
        (self - (a + ab * t)).norm()
    }
}

impl From<[f64; 2]> for Point2 {
    fn from([x, y]: [f64; 2]) -> Self {
        Self { x, y }
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, rhs: Point2) -> Point2 {
        Point2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, rhs: Point2) -> Point2 {
        Point2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, s: f64) -> Point2 {
        Point2::new(self.x * s, self.y * s)
    }
}

/// `x1 (y2 - y3) + x2 (y3 - y1) + x3 (y1 - y2)`: twice the signed area of the
/// triangle, positive for counter-clockwise order.
#[inline]
pub fn signed_parallelogram_area(p1: Point2, p2: Point2, p3: Point2) -> f64 {
    p1.x * (p2.y - p3.y) + p2.x * (p3.y - p1.y) + p3.x * (p1.y - p2.y)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EdgeKind {
    Horizontal,
    Vertical,
    Diagonal,
}

/// An undirected mesh edge, stored with `a < b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub a: VertexId,
    pub b: VertexId,
    pub kind: EdgeKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeshVertex {
    pub id: VertexId,
    pub pos: Point2,
}

/// Edge `a`-`b` together with its link.
///
/// For interior edges `v1` lies left of the directed edge `a -> b` (with `a`
/// the smaller id) and `v2` right of it, so `(a, v2, b, v1)` runs
/// counter-clockwise. Boundary edges have a single link vertex in `v1` and no
/// `v2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeNeighborhood {
    pub edge: EdgeId,
    pub a: MeshVertex,
    pub b: MeshVertex,
    pub v1: MeshVertex,
    pub v2: Option<MeshVertex>,
}

impl EdgeNeighborhood {
    pub fn is_boundary(&self) -> bool {
        self.v2.is_none()
    }

    /// Midpoint of the edge.
    pub fn midpoint(&self) -> Point2 {
        self.a.pos.midpoint(self.b.pos)
    }

    /// The quad cycle `(a, v1, b, v2)` for interior edges.
    pub fn quad(&self) -> Option<[MeshVertex; 4]> {
        self.v2.map(|v2| [self.a, self.v1, self.b, v2])
    }
}

/// The diagonal-split triangulation of an `nx x ny` lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct Triangulation {
    nx: usize,
    ny: usize,
    origin: [f64; 2],
    spacing: [f64; 2],
    edges: Vec<Edge>,
    triangles: Vec<[VertexId; 3]>,
    links: Vec<[VertexId; 2]>,
    /// Per vertex: ids of its horizontal, vertical and diagonal edge (as the
    /// lower endpoint), `NONE` when absent.
    outgoing: Vec<[EdgeId; 3]>,
}

impl Triangulation {
    pub fn new(
        nx: usize,
        ny: usize,
        origin: [f64; 2],
        spacing: [f64; 2],
    ) -> Result<Self, MeshError> {
        if nx < 2 || ny < 2 {
            return Err(MeshError::TooSmall { nx, ny });
        }
        let n_edges = nx * (ny - 1) + ny * (nx - 1) + (nx - 1) * (ny - 1);
        if n_edges >= NONE as usize {
            return Err(MeshError::TooLarge { nx, ny });
        }

        let mut edges = Vec::with_capacity(n_edges);
        let mut outgoing = vec![[NONE; 3]; nx * ny];
        for j in 0..ny {
            for i in 0..nx {
                let v = (j * nx + i) as VertexId;
                let slot = &mut outgoing[v as usize];
                if i + 1 < nx {
                    slot[0] = edges.len() as EdgeId;
                    edges.push(Edge {
                        a: v,
                        b: v + 1,
                        kind: EdgeKind::Horizontal,
                    });
                }
                if j + 1 < ny {
                    slot[1] = edges.len() as EdgeId;
                    edges.push(Edge {
                        a: v,
                        b: v + nx as VertexId,
                        kind: EdgeKind::Vertical,
                    });
                }
                if i + 1 < nx && j + 1 < ny {
                    slot[2] = edges.len() as EdgeId;
                    edges.push(Edge {
                        a: v,
                        b: v + nx as VertexId + 1,
                        kind: EdgeKind::Diagonal,
                    });
                }
            }
        }

        let mut triangles = Vec::with_capacity(2 * (nx - 1) * (ny - 1));
        for j in 0..ny - 1 {
            for i in 0..nx - 1 {
                let v00 = (j * nx + i) as VertexId;
                let v10 = v00 + 1;
                let v01 = v00 + nx as VertexId;
                let v11 = v01 + 1;
                triangles.push([v00, v10, v11]);
                triangles.push([v00, v11, v01]);
            }
        }

        let mut tri = Self {
            nx,
            ny,
            origin,
            spacing,
            edges,
            triangles,
            links: Vec::new(),
            outgoing,
        };
        tri.links = tri.build_links();
        Ok(tri)
    }

    /// Triangulates the lattice a grid is sampled on.
    pub fn for_grid(grid: &crate::fields::ScalarGrid) -> Self {
        Self::new(grid.nx(), grid.ny(), grid.origin(), grid.spacing())
            .expect("a ScalarGrid always has at least 2x2 samples")
    }

    fn build_links(&self) -> Vec<[VertexId; 2]> {
        let mut links = vec![[NONE; 2]; self.edges.len()];
        for &[p, q, r] in &self.triangles {
            for (u, w, opposite) in [(p, q, r), (q, r, p), (r, p, q)] {
                let e = self
                    .edge_between(u, w)
                    .expect("triangle sides are mesh edges");
                let edge = self.edges[e as usize];
                let slot = &mut links[e as usize];
                // Left of a -> b goes in slot 0.
                let left = signed_parallelogram_area(
                    self.position(edge.a),
                    self.position(edge.b),
                    self.position(opposite),
                ) > 0.0;
                if left {
                    slot[0] = opposite;
                } else {
                    slot[1] = opposite;
                }
            }
        }
        links
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn vertex_count(&self) -> usize {
        self.nx * self.ny
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: EdgeId) -> Option<Edge> {
        self.edges.get(e as usize).copied()
    }

    pub fn triangles(&self) -> &[[VertexId; 3]] {
        &self.triangles
    }

    pub fn position(&self, v: VertexId) -> Point2 {
        let i = v as usize % self.nx;
        let j = v as usize / self.nx;
        Point2::new(
            self.origin[0] + i as f64 * self.spacing[0],
            self.origin[1] + j as f64 * self.spacing[1],
        )
    }

    /// Grid coordinates `(i, j)` of a vertex.
    pub fn grid_coords(&self, v: VertexId) -> (usize, usize) {
        (v as usize % self.nx, v as usize / self.nx)
    }

    pub fn is_boundary_vertex(&self, v: VertexId) -> bool {
        let (i, j) = self.grid_coords(v);
        i == 0 || j == 0 || i + 1 == self.nx || j + 1 == self.ny
    }

    pub fn is_boundary_edge(&self, e: EdgeId) -> bool {
        self.links[e as usize].contains(&NONE)
    }

    /// Length of the bounding-box diagonal.
    pub fn domain_diagonal(&self) -> f64 {
        let w = (self.nx - 1) as f64 * self.spacing[0];
        let h = (self.ny - 1) as f64 * self.spacing[1];
        w.hypot(h)
    }

    /// Id of the edge joining `u` and `w`, if any.
    pub fn edge_between(&self, u: VertexId, w: VertexId) -> Option<EdgeId> {
        let (lo, hi) = if u < w { (u, w) } else { (w, u) };
        let n = self.vertex_count() as VertexId;
        if hi >= n {
            return None;
        }
        let nx = self.nx as VertexId;
        let slot = if hi == lo + 1 && (lo + 1) % nx != 0 {
            0
        } else if hi == lo + nx {
            1
        } else if hi == lo + nx + 1 && (lo + 1) % nx != 0 {
            2
        } else {
            return None;
        };
        let e = self.outgoing[lo as usize][slot];
        (e != NONE).then_some(e)
    }

    pub fn edge_neighborhood(&self, e: EdgeId) -> Result<EdgeNeighborhood, MeshError> {
        let edge = self.edge(e).ok_or(MeshError::UnknownEdge(e))?;
        let vertex = |id: VertexId| MeshVertex {
            id,
            pos: self.position(id),
        };
        let [left, right] = self.links[e as usize];
        let (v1, v2) = match (left != NONE, right != NONE) {
            (true, true) => (vertex(left), Some(vertex(right))),
            (true, false) => (vertex(left), None),
            (false, true) => (vertex(right), None),
            (false, false) => unreachable!("every edge borders a triangle"),
        };
        Ok(EdgeNeighborhood {
            edge: e,
            a: vertex(edge.a),
            b: vertex(edge.b),
            v1,
            v2,
        })
    }

    /// Ids of edges that have two incident triangles.
    pub fn interior_edges(&self) -> impl Iterator<Item = EdgeId> + '_ {
        (0..self.edges.len() as EdgeId).filter(|&e| !self.is_boundary_edge(e))
    }
}
