//! Line-segment drawings of a Jacobi set built from critical-edge records.
//!
//! Three drawings are supported:
//!
//! * [`pl_graph`]: the critical edges themselves, between mesh vertices;
//! * [`nonreduced_connectivity`]: Jacobi set points joined pairwise around
//!   every mesh vertex, i.e. the 1-skeleton of the nerve of the critical
//!   edges;
//! * [`reduced_connectivity`]: a single segment for mesh vertices of degree
//!   two and a star to the barycenter of the incident points for higher
//!   degrees.
//!
//! For a mesh vertex of degree `d > 2` the reduced drawing uses `d` segments
//! instead of `C(d, 2)`, so the two drawings differ by exactly
//! `sum (C(d, 2) - d)` segments.

use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::jacobi::CriticalEdgeRecord;
use crate::mesh::{EdgeId, Point2, Triangulation, VertexId};
use crate::simplicial::{Simplex, SimplicialComplex};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConnectivityError {
    #[error("interior vertex {vertex} has odd critical-edge degree {degree}")]
    ParityViolation { vertex: VertexId, degree: usize },
    #[error(
        "segment accounting mismatch: nonreduced {nonreduced} - reduced {reduced} != predicted {predicted}"
    )]
    AccountingMismatch {
        nonreduced: usize,
        reduced: usize,
        predicted: usize,
    },
    #[error("graphs were not built from the same records")]
    MismatchedGraphs,
}

/// Critical edges grouped by mesh vertex, ascending vertex id.
///
/// Stored in compressed form: the record indices incident to `vertices[k]`
/// are `incident[offsets[k]..offsets[k + 1]]`, in record order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VertexIncidence {
    vertices: Vec<VertexId>,
    offsets: Vec<usize>,
    incident: Vec<usize>,
    boundary: Vec<bool>,
}

impl VertexIncidence {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// `(vertex, record indices, vertex is on the boundary)`.
    pub fn iter(&self) -> impl Iterator<Item = (VertexId, &[usize], bool)> + '_ {
        self.vertices.iter().enumerate().map(move |(k, &v)| {
            (
                v,
                &self.incident[self.offsets[k]..self.offsets[k + 1]],
                self.boundary[k],
            )
        })
    }

    pub fn get(&self, v: VertexId) -> Option<&[usize]> {
        let k = self.vertices.binary_search(&v).ok()?;
        Some(&self.incident[self.offsets[k]..self.offsets[k + 1]])
    }

    /// `(vertex, degree)` pairs.
    pub fn degrees(&self) -> impl Iterator<Item = (VertexId, usize)> + '_ {
        self.iter().map(|(v, inc, _)| (v, inc.len()))
    }
}

/// Maps every mesh vertex touched by a critical edge to the indices (into
/// `records`) of its incident critical edges.
pub fn build_vertex_incidence(records: &[CriticalEdgeRecord]) -> VertexIncidence {
    // (vertex << 32 | record index) sorts by vertex, then record order.
    let mut keys: Vec<u64> = Vec::with_capacity(2 * records.len());
    for (k, r) in records.iter().enumerate() {
        for v in r.endpoints() {
            keys.push((v as u64) << 32 | k as u64);
        }
    }
    keys.sort_unstable();

    let mut inc = VertexIncidence {
        offsets: vec![0],
        incident: Vec::with_capacity(keys.len()),
        ..Default::default()
    };
    for key in keys {
        let v = (key >> 32) as VertexId;
        let k = (key & 0xffff_ffff) as usize;
        if inc.vertices.last() != Some(&v) {
            if !inc.vertices.is_empty() {
                inc.offsets.push(inc.incident.len());
            }
            inc.vertices.push(v);
            let r = &records[k];
            inc.boundary.push(if r.a == v {
                r.endpoint_on_boundary[0]
            } else {
                r.endpoint_on_boundary[1]
            });
        }
        inc.incident.push(k);
    }
    if !inc.vertices.is_empty() {
        inc.offsets.push(inc.incident.len());
    }
    inc
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphMode {
    Pl,
    Nonreduced,
    Reduced,
}

impl GraphMode {
    pub const ALL: [GraphMode; 3] = [GraphMode::Pl, GraphMode::Nonreduced, GraphMode::Reduced];

    pub fn name(self) -> &'static str {
        match self {
            GraphMode::Pl => "pl",
            GraphMode::Nonreduced => "nonreduced",
            GraphMode::Reduced => "reduced",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NodeKind {
    /// Jacobi set point of a critical edge.
    JacobiPoint { edge: EdgeId },
    /// Synthetic node at the mean of the `degree` points around `vertex`.
    Barycenter { vertex: VertexId, degree: u32 },
    /// Mesh vertex (PL drawing only).
    MeshVertex { vertex: VertexId },
}

impl NodeKind {
    pub fn label(&self) -> &'static str {
        match self {
            NodeKind::JacobiPoint { .. } => "jacobi_point",
            NodeKind::Barycenter { .. } => "barycenter",
            NodeKind::MeshVertex { .. } => "mesh_vertex",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraphNode {
    pub pos: Point2,
    #[serde(flatten)]
    pub kind: NodeKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Segment {
    /// Node ids, smaller first.
    pub nodes: [u32; 2],
    /// Mesh vertex whose neighbourhood produced the segment.
    pub source_vertex: Option<VertexId>,
}

/// A drawing of the Jacobi set as line segments between nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JacobiGraph {
    pub mode: GraphMode,
    pub nodes: Vec<GraphNode>,
    /// Sorted by node pair, no duplicates, no self-loops.
    pub segments: Vec<Segment>,
}

impl JacobiGraph {
    fn empty(mode: GraphMode) -> Self {
        Self {
            mode,
            nodes: Vec::new(),
            segments: Vec::new(),
        }
    }

    /// Sorts segments by node pair and drops repeated pairs, keeping the one
    /// with the smallest source vertex.
    fn canonicalize(&mut self) {
        self.segments.sort_unstable();
        self.segments.dedup_by_key(|s| s.nodes);
    }

    fn push_segment(&mut self, p: u32, q: u32, source: Option<VertexId>) {
        debug_assert_ne!(p, q);
        self.segments.push(Segment {
            nodes: [p.min(q), p.max(q)],
            source_vertex: source,
        });
    }

    pub fn segment_count(&self) -> usize {
        self.segments.len()
    }

    /// Node degrees, indexed by node id.
    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.nodes.len()];
        for s in &self.segments {
            deg[s.nodes[0] as usize] += 1;
            deg[s.nodes[1] as usize] += 1;
        }
        deg
    }

    /// Segments whose endpoints coincide geometrically.
    pub fn zero_length_segments(&self) -> usize {
        self.segments
            .iter()
            .filter(|s| self.nodes[s.nodes[0] as usize].pos == self.nodes[s.nodes[1] as usize].pos)
            .count()
    }

    /// The drawing as a 1-dimensional complex on node ids (isolated nodes
    /// included).
    pub fn to_complex(&self) -> SimplicialComplex {
        let mut k = SimplicialComplex::new();
        for id in 0..self.nodes.len() as u32 {
            k.insert(Simplex::vertex(id));
        }
        for s in &self.segments {
            k.insert(Simplex::edge(s.nodes[0], s.nodes[1]));
        }
        k
    }

    /// Positions of the Jacobi point nodes, in node order.
    pub fn jacobi_points(&self) -> Vec<Point2> {
        self.nodes
            .iter()
            .filter(|n| matches!(n.kind, NodeKind::JacobiPoint { .. }))
            .map(|n| n.pos)
            .collect()
    }
}

fn jacobi_nodes(records: &[CriticalEdgeRecord]) -> Vec<GraphNode> {
    records
        .iter()
        .map(|r| GraphNode {
            pos: r.point,
            kind: NodeKind::JacobiPoint { edge: r.edge },
        })
        .collect()
}

/// Reduced drawing. Node `k < records.len()` is the Jacobi point of
/// `records[k]`; barycenter nodes follow in ascending mesh-vertex order.
///
/// Interior vertices must have even degree. Boundary vertices may have odd
/// degree: degree one contributes nothing and degree three or more gets a
/// barycenter star.
pub fn reduced_connectivity(
    records: &[CriticalEdgeRecord],
) -> Result<JacobiGraph, ConnectivityError> {
    let incidence = build_vertex_incidence(records);
    let mut graph = JacobiGraph::empty(GraphMode::Reduced);
    graph.nodes = jacobi_nodes(records);

    for (v, inc, on_boundary) in incidence.iter() {
        let d = inc.len();
        if d % 2 == 1 && !on_boundary {
            return Err(ConnectivityError::ParityViolation {
                vertex: v,
                degree: d,
            });
        }
        match d {
            0 | 1 => {}
            2 => graph.push_segment(inc[0] as u32, inc[1] as u32, Some(v)),
            _ => {
                let sum = inc
                    .iter()
                    .fold(Point2::default(), |acc, &k| acc + records[k].point);
                let center = sum * (1.0 / d as f64);
                let hub = graph.nodes.len() as u32;
                graph.nodes.push(GraphNode {
                    pos: center,
                    kind: NodeKind::Barycenter {
                        vertex: v,
                        degree: d as u32,
                    },
                });
                for &k in inc {
                    graph.push_segment(k as u32, hub, Some(v));
                }
            }
        }
    }
    graph.canonicalize();
    Ok(graph)
}

/// Nerve 1-skeleton drawing: all `C(d, 2)` pairs of Jacobi points around
/// each mesh vertex. Node `k` is the point of `records[k]`.
pub fn nonreduced_connectivity(records: &[CriticalEdgeRecord]) -> JacobiGraph {
    let incidence = build_vertex_incidence(records);
    let mut graph = JacobiGraph::empty(GraphMode::Nonreduced);
    graph.nodes = jacobi_nodes(records);
    for (v, inc, _) in incidence.iter() {
        for (i, &p) in inc.iter().enumerate() {
            for &q in &inc[i + 1..] {
                graph.push_segment(p as u32, q as u32, Some(v));
            }
        }
    }
    graph.canonicalize();
    graph
}

/// The critical edges as segments between mesh vertices. Nodes are the
/// touched mesh vertices in ascending id order.
pub fn pl_graph(records: &[CriticalEdgeRecord], t: &Triangulation) -> JacobiGraph {
    let mut vertices: Vec<VertexId> = records.iter().flat_map(|r| r.endpoints()).collect();
    vertices.sort_unstable();
    vertices.dedup();
    let node_of = |v: VertexId| vertices.binary_search(&v).expect("collected above") as u32;

    let mut graph = JacobiGraph::empty(GraphMode::Pl);
    graph.nodes = vertices
        .iter()
        .map(|&v| GraphNode {
            pos: t.position(v),
            kind: NodeKind::MeshVertex { vertex: v },
        })
        .collect();
    for r in records {
        graph.push_segment(node_of(r.a), node_of(r.b), None);
    }
    graph.canonicalize();
    graph
}

/// `C(d, 2) - d`: segments saved at a mesh vertex of degree `d > 2`.
pub fn removed_at_degree(d: usize) -> usize {
    if d > 2 {
        d * (d - 1) / 2 - d
    } else {
        0
    }
}

/// Wall-clock time of each pipeline stage.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTimings {
    pub jacobi_points_ms: f64,
    pub nonreduced_ms: f64,
    pub reduced_ms: f64,
}

impl StageTimings {
    pub fn from_durations(points: Duration, nonreduced: Duration, reduced: Duration) -> Self {
        let ms = |d: Duration| d.as_secs_f64() * 1e3;
        Self {
            jacobi_points_ms: ms(points),
            nonreduced_ms: ms(nonreduced),
            reduced_ms: ms(reduced),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReductionStats {
    pub critical_edges: usize,
    /// `(vertex, degree)` for every vertex touched by a critical edge.
    pub vertex_degrees: Vec<(VertexId, usize)>,
    /// Number of vertices with degree above two.
    pub higher_simplices: usize,
    pub predicted_removed: usize,
    pub nonreduced_segments: usize,
    pub reduced_segments: usize,
    pub measured_removed: usize,
    /// `(nonreduced - reduced) / nonreduced`, in percent; zero for empty
    /// drawings.
    pub reduction_percent: f64,
    pub zero_length_reduced_segments: usize,
    pub timings: StageTimings,
}

/// Checks `nonreduced - reduced = sum (C(d, 2) - d)` and summarises the
/// reduction.
pub fn reduction_stats(
    records: &[CriticalEdgeRecord],
    nonreduced: &JacobiGraph,
    reduced: &JacobiGraph,
    timings: StageTimings,
) -> Result<ReductionStats, ConnectivityError> {
    if nonreduced.mode != GraphMode::Nonreduced
        || reduced.mode != GraphMode::Reduced
        || nonreduced.jacobi_points().len() != records.len()
        || reduced.jacobi_points().len() != records.len()
    {
        return Err(ConnectivityError::MismatchedGraphs);
    }
    let incidence = build_vertex_incidence(records);
    let vertex_degrees: Vec<(VertexId, usize)> = incidence.degrees().collect();
    let predicted: usize = vertex_degrees
        .iter()
        .map(|&(_, d)| removed_at_degree(d))
        .sum();
    let n = nonreduced.segment_count();
    let r = reduced.segment_count();
    if n < r || n - r != predicted {
        return Err(ConnectivityError::AccountingMismatch {
            nonreduced: n,
            reduced: r,
            predicted,
        });
    }
    Ok(ReductionStats {
        critical_edges: records.len(),
        higher_simplices: vertex_degrees.iter().filter(|&&(_, d)| d > 2).count(),
        vertex_degrees,
        predicted_removed: predicted,
        nonreduced_segments: n,
        reduced_segments: r,
        measured_removed: n - r,
        reduction_percent: if n == 0 {
            0.0
        } else {
            100.0 * (n - r) as f64 / n as f64
        },
        zero_length_reduced_segments: reduced.zero_length_segments(),
        timings,
    })
}
