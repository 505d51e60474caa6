//! Finite abstract simplicial complexes over integer vertex labels.
//!
//! Complexes are stored as the full set of simplices (always closed under
//! taking faces) plus an index of the maximal simplices. On top of that the
//! module provides stars and links, elementary and strong collapses, nerves,
//! edge contraction with the link condition, and `beta_0`/`beta_1` over
//! GF(2). Everything iterates in label order, so collapse traces are
//! reproducible.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use petgraph::unionfind::UnionFind;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::jacobi::CriticalEdgeRecord;

pub type Label = u32;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SimplicialError {
    #[error("simplex {0} is not in the complex")]
    NotInComplex(Simplex),
    #[error("{face} is not a free face of {coface}")]
    NotFree { face: Simplex, coface: Simplex },
    #[error("cannot collapse {simplex}: {reason}")]
    InvalidOddSimplex { simplex: Simplex, reason: String },
    #[error("edge {{{0}, {1}}} is not in the complex")]
    EdgeAbsent(Label, Label),
    #[error("vertex {0} is not dominated by {1}")]
    NotDominated(Label, Label),
}

pub type Result<T> = std::result::Result<T, SimplicialError>;

/// A nonempty set of vertex labels, kept sorted and duplicate-free.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Simplex(Vec<Label>);

impl Simplex {
    /// Builds a simplex from any labels; duplicates collapse.
    ///
    /// # Panics
    ///
    /// If `labels` is empty.
    pub fn new(labels: impl IntoIterator<Item = Label>) -> Self {
        let mut v: Vec<Label> = labels.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        assert!(!v.is_empty(), "a simplex needs at least one vertex");
        Simplex(v)
    }

    pub fn vertex(v: Label) -> Self {
        Simplex(vec![v])
    }

    pub fn edge(a: Label, b: Label) -> Self {
        Self::new([a, b])
    }

    pub fn labels(&self) -> &[Label] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.0.len() - 1
    }

    pub fn contains(&self, v: Label) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    pub fn is_face_of(&self, other: &Simplex) -> bool {
        self.0.iter().all(|&v| other.contains(v))
    }

    pub fn is_disjoint(&self, other: &Simplex) -> bool {
        !self.0.iter().any(|&v| other.contains(v))
    }

    /// `self` plus one more vertex.
    pub fn with(&self, v: Label) -> Simplex {
        Simplex::new(self.0.iter().copied().chain([v]))
    }

    /// `self` minus one vertex, `None` if that leaves nothing.
    pub fn without(&self, v: Label) -> Option<Simplex> {
        let rest: Vec<Label> = self.0.iter().copied().filter(|&w| w != v).collect();
        (!rest.is_empty()).then_some(Simplex(rest))
    }

    /// All nonempty subsets, including `self`.
    pub fn faces(&self) -> impl Iterator<Item = Simplex> + '_ {
        let n = self.0.len();
        assert!(n < 32, "simplex too large to enumerate faces");
        (1u32..(1 << n)).map(move |mask| {
            Simplex(
                (0..n)
                    .filter(|&k| mask >> k & 1 == 1)
                    .map(|k| self.0[k])
                    .collect(),
            )
        })
    }

    /// Codimension-one faces (empty for a vertex).
    pub fn facets(&self) -> impl Iterator<Item = Simplex> + '_ {
        let skip_all = self.0.len() == 1;
        self.0
            .iter()
            .filter(move |_| !skip_all)
            .map(move |&v| self.without(v).expect("len > 1"))
    }
}

impl fmt::Display for Simplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, v) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{v}")?;
        }
        f.write_str("}")
    }
}

/// One step of a collapse sequence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum CollapseMove {
    /// Removal of a free face together with its unique coface.
    Elementary { face: Simplex, coface: Simplex },
    /// Removal of a vertex dominated by another vertex.
    Strong { dominated: Label, dominating: Label },
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CollapseTrace {
    pub moves: Vec<CollapseMove>,
}

impl CollapseTrace {
    pub fn len(&self) -> usize {
        self.moves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moves.is_empty()
    }

    /// Re-applies every move to `start`, validating each one.
    pub fn replay(&self, start: &SimplicialComplex) -> Result<SimplicialComplex> {
        let mut k = start.clone();
        for mv in &self.moves {
            match mv {
                CollapseMove::Elementary { face, coface } => k.elementary_collapse(face, coface)?,
                CollapseMove::Strong {
                    dominated,
                    dominating,
                } => {
                    if !k.is_dominated_by(*dominated, *dominating) {
                        return Err(SimplicialError::NotDominated(*dominated, *dominating));
                    }
                    k.remove_vertex(*dominated);
                }
            }
        }
        Ok(k)
    }
}

impl fmt::Display for CollapseTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for mv in &self.moves {
            match mv {
                CollapseMove::Elementary { face, coface } => {
                    writeln!(f, "collapse {face} {coface}")?
                }
                CollapseMove::Strong {
                    dominated,
                    dominating,
                } => writeln!(f, "strong {dominated} {dominating}")?,
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SimplicialComplex {
    simplices: BTreeSet<Simplex>,
    maximal: BTreeSet<Simplex>,
}

impl SimplicialComplex {
    pub fn new() -> Self {
        Self::default()
    }

    /// Closure of the given simplices.
    pub fn from_simplices<I, S>(simplices: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<Simplex>,
    {
        let mut k = Self::new();
        for s in simplices {
            k.insert(s.into());
        }
        k
    }

    /// Closure of the given label lists; convenient for tests.
    pub fn from_lists(lists: &[&[Label]]) -> Self {
        Self::from_simplices(lists.iter().map(|l| Simplex::new(l.iter().copied())))
    }

    /// The full simplex on `labels` with all its faces.
    pub fn solid(labels: impl IntoIterator<Item = Label>) -> Self {
        Self::from_simplices([Simplex::new(labels)])
    }

    /// Adds `s` and all of its faces.
    pub fn insert(&mut self, s: Simplex) {
        if self.simplices.contains(&s) {
            return;
        }
        for face in s.faces() {
            if face != s {
                self.maximal.remove(&face);
            }
            self.simplices.insert(face);
        }
        self.maximal.insert(s);
    }

    pub fn contains(&self, s: &Simplex) -> bool {
        self.simplices.contains(s)
    }

    pub fn simplices(&self) -> impl Iterator<Item = &Simplex> {
        self.simplices.iter()
    }

    pub fn maximal_simplices(&self) -> &BTreeSet<Simplex> {
        &self.maximal
    }

    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    /// Dimension of the largest simplex, `None` when empty.
    pub fn dim(&self) -> Option<usize> {
        self.maximal.iter().map(Simplex::dim).max()
    }

    pub fn vertices(&self) -> Vec<Label> {
        self.simplices_of_dim(0).map(|s| s.0[0]).collect()
    }

    pub fn vertex_count(&self) -> usize {
        self.simplices_of_dim(0).count()
    }

    pub fn simplices_of_dim(&self, d: usize) -> impl Iterator<Item = &Simplex> {
        self.simplices.iter().filter(move |s| s.dim() == d)
    }

    /// `counts[d]` = number of `d`-simplices.
    pub fn f_vector(&self) -> Vec<usize> {
        let mut counts = vec![0; self.dim().map_or(0, |d| d + 1)];
        for s in &self.simplices {
            counts[s.dim()] += 1;
        }
        counts
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.f_vector()
            .iter()
            .enumerate()
            .map(|(d, &n)| if d % 2 == 0 { n as i64 } else { -(n as i64) })
            .sum()
    }

    /// Number of edges containing `v`.
    pub fn degree(&self, v: Label) -> usize {
        self.simplices_of_dim(1).filter(|e| e.contains(v)).count()
    }

    /// Edge degree of every vertex, by label.
    pub fn degrees(&self) -> BTreeMap<Label, usize> {
        let mut out: BTreeMap<Label, usize> = self.vertices().into_iter().map(|v| (v, 0)).collect();
        for e in self.simplices_of_dim(1) {
            for v in e.labels() {
                *out.get_mut(v).expect("faces are present") += 1;
            }
        }
        out
    }

    fn require(&self, s: &Simplex) -> Result<()> {
        if self.contains(s) {
            Ok(())
        } else {
            Err(SimplicialError::NotInComplex(s.clone()))
        }
    }

    fn maximal_containing<'a>(&'a self, s: &'a Simplex) -> impl Iterator<Item = &'a Simplex> + 'a {
        self.maximal.iter().filter(move |m| s.is_face_of(m))
    }

    fn has_proper_coface(&self, s: &Simplex) -> bool {
        self.maximal_containing(s).any(|m| m.len() > s.len())
    }

    /// Closed star: every simplex containing `s`, with all faces.
    pub fn star(&self, s: &Simplex) -> Result<SimplicialComplex> {
        self.require(s)?;
        Ok(Self::from_simplices(self.maximal_containing(s).cloned()))
    }

    /// Simplices of the closed star that do not meet `s`.
    pub fn link(&self, s: &Simplex) -> Result<SimplicialComplex> {
        let star = self.star(s)?;
        Ok(Self::from_simplices(
            star.simplices.into_iter().filter(|t| t.is_disjoint(s)),
        ))
    }

    /// The unique proper coface of `s`, if `s` is a free face.
    pub fn free_coface(&self, s: &Simplex) -> Option<Simplex> {
        if !self.contains(s) {
            return None;
        }
        let mut above = self.maximal_containing(s).filter(|m| *m != s);
        let first = above.next()?;
        if above.next().is_some() || first.len() != s.len() + 1 {
            return None;
        }
        Some(first.clone())
    }

    /// Removes the free face `face` together with its coface `coface`.
    pub fn elementary_collapse(&mut self, face: &Simplex, coface: &Simplex) -> Result<()> {
        if self.free_coface(face).as_ref() != Some(coface) {
            return Err(SimplicialError::NotFree {
                face: face.clone(),
                coface: coface.clone(),
            });
        }
        self.simplices.remove(face);
        self.simplices.remove(coface);
        self.maximal.remove(coface);
        for facet in coface.facets().filter(|t| t != face) {
            if !self.has_proper_coface(&facet) {
                self.maximal.insert(facet);
            }
        }
        Ok(())
    }

    /// Deletes `v` and every simplex containing it.
    pub fn remove_vertex(&mut self, v: Label) {
        let touched: Vec<Simplex> = self
            .maximal
            .iter()
            .filter(|m| m.contains(v))
            .cloned()
            .collect();
        self.simplices.retain(|s| !s.contains(v));
        for m in &touched {
            self.maximal.remove(m);
        }
        for rest in touched.iter().filter_map(|m| m.without(v)) {
            if !self.has_proper_coface(&rest) {
                self.maximal.insert(rest);
            }
        }
    }

    /// `true` if every maximal simplex containing `v` also contains `w`.
    pub fn is_dominated_by(&self, v: Label, w: Label) -> bool {
        let vs = Simplex::vertex(v);
        v != w && self.contains(&vs) && self.maximal_containing(&vs).all(|m| m.contains(w))
    }

    /// Smallest vertex dominating `v`, using the maximal-simplex criterion.
    pub fn dominating_vertex(&self, v: Label) -> Option<Label> {
        let vs = Simplex::vertex(v);
        if !self.contains(&vs) {
            return None;
        }
        let mut common: Option<BTreeSet<Label>> = None;
        for m in self.maximal_containing(&vs) {
            let here: BTreeSet<Label> = m.labels().iter().copied().filter(|&w| w != v).collect();
            common = Some(match common {
                None => here,
                Some(c) => c.intersection(&here).copied().collect(),
            });
        }
        common.and_then(|c| c.into_iter().next())
    }

    /// Vertices that are dominated by some other vertex.
    pub fn dominated_vertices(&self) -> Vec<Label> {
        self.vertices()
            .into_iter()
            .filter(|&v| self.dominating_vertex(v).is_some())
            .collect()
    }
}

impl fmt::Display for SimplicialComplex {
    /// One simplex per line, labels separated by spaces, in sorted order.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.simplices {
            let line: Vec<String> = s.labels().iter().map(Label::to_string).collect();
            writeln!(f, "{}", line.join(" "))?;
        }
        Ok(())
    }
}

/// `A(n, m) = sum_{k=0}^{m+1} (-1)^k C(n+1, k) (m+1-k)^n`, evaluated in exact
/// integer arithmetic. Returns `None` on overflow.
pub fn eulerian_number(n: u32, m: u32) -> Option<u128> {
    let mut total: i128 = 0;
    let mut binom: i128 = 1; // C(n+1, k)
    for k in 0..=(m + 1) {
        if k > n + 1 {
            break;
        }
        let base = (m + 1 - k) as i128;
        let power = base.checked_pow(n)?;
        let term = binom.checked_mul(power)?;
        total = if k % 2 == 0 {
            total.checked_add(term)?
        } else {
            total.checked_sub(term)?
        };
        binom = binom.checked_mul((n + 1 - k) as i128)? / (k as i128 + 1);
    }
    u128::try_from(total).ok()
}

/// Collapses the maximal odd-dimensional simplex `s` onto the star joining
/// the vertex outside `s_prime` to the vertices of `s_prime`.
///
/// Every face `tau` of `s_prime` with at least two vertices is paired with
/// `tau + w` (`w` the apex) and removed, largest faces first. For an
/// `n`-simplex this takes `2^n - n - 1 = A(n, 1)` elementary collapses.
pub fn collapse_odd_simplex(
    k: &SimplicialComplex,
    s: &Simplex,
    s_prime: &Simplex,
) -> Result<(SimplicialComplex, CollapseTrace)> {
    let invalid = |reason: String| SimplicialError::InvalidOddSimplex {
        simplex: s.clone(),
        reason,
    };
    k.require(s)?;
    let n = s.dim();
    if n < 3 || n.is_multiple_of(2) {
        return Err(invalid(format!(
            "dimension {n} is not odd and greater than one"
        )));
    }
    if !k.maximal.contains(s) {
        return Err(invalid("simplex is not maximal".into()));
    }
    if s_prime.len() != s.len() - 1 || !s_prime.is_face_of(s) {
        return Err(invalid(format!("{s_prime} is not a facet")));
    }
    if let Some(other) = k
        .maximal
        .iter()
        .find(|m| *m != s && m.labels().iter().filter(|&&v| s.contains(v)).count() > 1)
    {
        return Err(invalid(format!("shares an edge with {other}")));
    }
    let apex = *s
        .labels()
        .iter()
        .find(|&&v| !s_prime.contains(v))
        .expect("facet misses one vertex");

    let mut faces: Vec<Simplex> = s_prime.faces().filter(|t| t.len() >= 2).collect();
    faces.sort_by(|x, y| y.len().cmp(&x.len()).then_with(|| x.cmp(y)));

    let mut out = k.clone();
    let mut trace = CollapseTrace::default();
    for face in faces {
        let coface = face.with(apex);
        out.elementary_collapse(&face, &coface)?;
        trace.moves.push(CollapseMove::Elementary { face, coface });
    }
    Ok((out, trace))
}

/// Removes dominated vertices (smallest label first, dominated by the
/// smallest dominating label) until none is left.
pub fn strong_collapse(k: &SimplicialComplex) -> (SimplicialComplex, CollapseTrace) {
    let mut core = k.clone();
    let mut trace = CollapseTrace::default();
    loop {
        let next = core
            .vertices()
            .into_iter()
            .find_map(|v| core.dominating_vertex(v).map(|w| (v, w)));
        let Some((v, w)) = next else { break };
        core.remove_vertex(v);
        trace.moves.push(CollapseMove::Strong {
            dominated: v,
            dominating: w,
        });
    }
    (core, trace)
}

/// Nerve of the cover by maximal simplices.
///
/// Nerve vertex `i` stands for the `i`-th maximal simplex in sorted order. A
/// set of maximal simplices spans a nerve simplex iff they share a vertex, so
/// the nerve's maximal simplices are the maximal families
/// `{M : v in M}` over the vertices `v`.
pub fn nerve(k: &SimplicialComplex) -> SimplicialComplex {
    let mut families: BTreeMap<Label, Vec<Label>> = BTreeMap::new();
    for (i, m) in k.maximal.iter().enumerate() {
        for &v in m.labels() {
            families.entry(v).or_default().push(i as Label);
        }
    }
    SimplicialComplex::from_simplices(families.into_values().map(Simplex::new))
}

/// `nerve` applied `j` times.
pub fn iterated_nerve(k: &SimplicialComplex, j: usize) -> SimplicialComplex {
    (0..j).fold(k.clone(), |acc, _| nerve(&acc))
}

/// Contracts edge `ab` onto `a`.
///
/// Returns the contracted complex and whether the link condition
/// `lk(a) ∩ lk(b) = lk(ab)` held beforehand; for 1-complexes this reads
/// `lk(a) ∩ lk(b) = ∅`.
pub fn contract_edge(
    k: &SimplicialComplex,
    a: Label,
    b: Label,
) -> Result<(SimplicialComplex, bool)> {
    let ab = Simplex::edge(a, b);
    if a == b || !k.contains(&ab) {
        return Err(SimplicialError::EdgeAbsent(a, b));
    }
    let la = k.link(&Simplex::vertex(a))?;
    let lb = k.link(&Simplex::vertex(b))?;
    let lab = k.link(&ab)?;
    let common: BTreeSet<&Simplex> = la.simplices.intersection(&lb.simplices).collect();
    let held = common == lab.simplices.iter().collect::<BTreeSet<_>>();

    let contracted = SimplicialComplex::from_simplices(
        k.maximal
            .iter()
            .map(|m| Simplex::new(m.labels().iter().map(|&v| if v == b { a } else { v }))),
    );
    Ok((contracted, held))
}

/// Rank over GF(2) of a matrix given by its columns' nonzero row indices.
fn gf2_rank(columns: Vec<Vec<usize>>) -> usize {
    let mut pivots: HashMap<usize, Vec<usize>> = HashMap::new();
    let mut rank = 0;
    for mut col in columns {
        col.sort_unstable();
        while let Some(&low) = col.last() {
            match pivots.get(&low) {
                Some(p) => col = symmetric_difference(&col, p),
                None => break,
            }
        }
        if let Some(&low) = col.last() {
            pivots.insert(low, col);
            rank += 1;
        }
    }
    rank
}

fn symmetric_difference(x: &[usize], y: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(x.len() + y.len());
    let (mut i, mut j) = (0, 0);
    while i < x.len() && j < y.len() {
        match x[i].cmp(&y[j]) {
            std::cmp::Ordering::Less => {
                out.push(x[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(y[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&x[i..]);
    out.extend_from_slice(&y[j..]);
    out
}

/// `(beta_0, beta_1)` over GF(2). Only the 2-skeleton is read.
pub fn betti01(k: &SimplicialComplex) -> (usize, usize) {
    let vertices = k.vertices();
    let index_of = |v: Label| vertices.binary_search(&v).expect("faces are present");
    let edges: Vec<&Simplex> = k.simplices_of_dim(1).collect();

    let mut uf = UnionFind::<usize>::new(vertices.len());
    for e in &edges {
        uf.union(index_of(e.0[0]), index_of(e.0[1]));
    }
    let beta0 = (0..vertices.len()).filter(|&i| uf.find(i) == i).count();

    let edge_index: HashMap<&Simplex, usize> =
        edges.iter().enumerate().map(|(i, &e)| (e, i)).collect();
    let columns: Vec<Vec<usize>> = k
        .simplices_of_dim(2)
        .map(|t| t.facets().map(|e| edge_index[&e]).collect())
        .collect();
    let rank2 = gf2_rank(columns);
    let rank1 = vertices.len() - beta0;
    (beta0, edges.len() - rank1 - rank2)
}

/// Nerve of the closed critical edges: one nerve vertex per critical edge
/// (labelled by edge id), and for every mesh vertex shared by `d >= 2`
/// critical edges the full simplex on those edges.
pub fn nerve_of_critical_edges(records: &[CriticalEdgeRecord]) -> SimplicialComplex {
    let mut at_vertex: BTreeMap<u32, Vec<Label>> = BTreeMap::new();
    let mut k = SimplicialComplex::new();
    for r in records {
        k.insert(Simplex::vertex(r.edge));
        for v in r.endpoints() {
            at_vertex.entry(v).or_default().push(r.edge);
        }
    }
    for edges in at_vertex.into_values().filter(|e| e.len() >= 2) {
        k.insert(Simplex::new(edges));
    }
    k
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(labels: &[Label]) -> Simplex {
        Simplex::new(labels.iter().copied())
    }

    #[test]
    fn closure_and_maximal_index() {
        let k = SimplicialComplex::from_lists(&[&[1, 2, 3], &[3, 4], &[2, 3]]);
        assert_eq!(k.len(), 7 + 2);
        assert_eq!(
            k.maximal_simplices().iter().cloned().collect::<Vec<_>>(),
            vec![s(&[1, 2, 3]), s(&[3, 4])]
        );
        assert_eq!(k.euler_characteristic(), 1);
    }

    #[test]
    fn star_and_link_of_triangle() {
        let k = SimplicialComplex::solid([1, 2, 3]);
        let link = k.link(&s(&[1])).unwrap();
        assert_eq!(link, SimplicialComplex::from_lists(&[&[2, 3]]));
        let link = k.link(&s(&[1, 2])).unwrap();
        assert_eq!(link, SimplicialComplex::from_lists(&[&[3]]));
        assert_eq!(k.star(&s(&[1])).unwrap(), k);
        assert!(k.link(&s(&[9])).is_err());
    }

    #[test]
    fn link_of_bowtie_center_is_two_edges() {
        let k = SimplicialComplex::from_lists(&[&[0, 1, 2], &[0, 3, 4]]);
        let link = k.link(&s(&[0])).unwrap();
        assert_eq!(link, SimplicialComplex::from_lists(&[&[1, 2], &[3, 4]]));
        assert_eq!(betti01(&link), (2, 0));
    }

    #[test]
    fn free_faces() {
        let k = SimplicialComplex::solid([1, 2, 3]);
        assert_eq!(k.free_coface(&s(&[2, 3])), Some(s(&[1, 2, 3])));
        assert_eq!(k.free_coface(&s(&[2])), None);
        let k = SimplicialComplex::from_lists(&[&[1, 2, 3], &[2, 3, 4], &[5, 6]]);
        assert_eq!(k.free_coface(&s(&[2, 3])), None);
        assert_eq!(k.free_coface(&s(&[5, 6])), None);
        assert_eq!(k.free_coface(&s(&[6])), Some(s(&[5, 6])));
    }

    #[test]
    fn elementary_collapse_of_triangle() {
        let mut k = SimplicialComplex::solid([1, 2, 3]);
        k.elementary_collapse(&s(&[2, 3]), &s(&[1, 2, 3])).unwrap();
        assert_eq!(k, SimplicialComplex::from_lists(&[&[1, 2], &[1, 3]]));
        assert_eq!(
            k.maximal_simplices().iter().cloned().collect::<Vec<_>>(),
            vec![s(&[1, 2]), s(&[1, 3])]
        );
        assert!(k.elementary_collapse(&s(&[1]), &s(&[1, 2])).is_err());
    }

    #[test]
    fn tetrahedron_to_graph_takes_four_collapses() {
        let k = SimplicialComplex::solid([1, 2, 3, 4]);
        let (out, trace) = collapse_odd_simplex(&k, &s(&[1, 2, 3, 4]), &s(&[1, 2, 3])).unwrap();
        assert_eq!(trace.len(), 4);
        assert_eq!(out.dim(), Some(1));
        assert_eq!(
            out,
            SimplicialComplex::from_lists(&[&[1, 4], &[2, 4], &[3, 4]])
        );
        assert_eq!(trace.replay(&k).unwrap(), out);
        assert_eq!(out.euler_characteristic(), k.euler_characteristic());
    }

    #[test]
    fn eulerian_numbers() {
        assert_eq!(eulerian_number(3, 1), Some(4));
        assert_eq!(eulerian_number(1, 0), Some(1));
        for n in 1..=6 {
            assert_eq!(eulerian_number(n, 0), Some(1));
        }
        assert_eq!(eulerian_number(4, 1), Some(11));
        assert_eq!(eulerian_number(5, 2), Some(66));
        // Row sums are factorials.
        let row: u128 = (0..7).map(|m| eulerian_number(7, m).unwrap()).sum();
        assert_eq!(row, 5040);
        assert_eq!(eulerian_number(200, 150), None);
    }

    #[test]
    fn odd_simplex_preconditions() {
        let tri = SimplicialComplex::solid([1, 2, 3]);
        assert!(collapse_odd_simplex(&tri, &s(&[1, 2, 3]), &s(&[1, 2])).is_err());
        let k = SimplicialComplex::from_lists(&[&[1, 2, 3, 4], &[3, 4, 5]]);
        assert!(matches!(
            collapse_odd_simplex(&k, &s(&[1, 2, 3, 4]), &s(&[1, 2, 3])),
            Err(SimplicialError::InvalidOddSimplex { .. })
        ));
        let k = SimplicialComplex::solid([1, 2, 3, 4]);
        assert!(collapse_odd_simplex(&k, &s(&[1, 2, 3]), &s(&[1, 2])).is_err());
        assert!(collapse_odd_simplex(&k, &s(&[1, 2, 3, 4]), &s(&[1, 2, 5])).is_err());
    }

    #[test]
    fn domination() {
        let k = SimplicialComplex::solid([1, 2, 3]);
        assert_eq!(k.dominating_vertex(1), Some(2));
        let cycle = SimplicialComplex::from_lists(&[&[1, 2], &[2, 3], &[3, 4], &[4, 1]]);
        assert!(cycle.dominated_vertices().is_empty());
        // Cone with apex 0 over a 4-cycle.
        let cone = SimplicialComplex::from_lists(&[&[0, 1, 2], &[0, 2, 3], &[0, 3, 4], &[0, 4, 1]]);
        for v in 1..=4 {
            assert!(cone.is_dominated_by(v, 0));
        }
        assert_eq!(cone.dominating_vertex(0), None);
    }

    #[test]
    fn strong_collapse_examples() {
        let (core, trace) = strong_collapse(&SimplicialComplex::solid([3, 5, 7, 9, 11]));
        assert_eq!(core.vertex_count(), 1);
        assert_eq!(trace.len(), 4);
        let cycle = SimplicialComplex::from_lists(&[&[1, 2], &[2, 3], &[3, 4], &[4, 1]]);
        let (core, trace) = strong_collapse(&cycle);
        assert_eq!(core, cycle);
        assert!(trace.is_empty());

        // Hollow square 1-2-3-4 with three dangling triangles hung off the
        // corners: each apex is dominated once, the square is a core.
        let k = SimplicialComplex::from_lists(&[
            &[1, 2],
            &[2, 3],
            &[3, 4],
            &[4, 1],
            &[1, 2, 10],
            &[2, 3, 11],
            &[3, 4, 12],
        ]);
        let (core, trace) = strong_collapse(&k);
        assert_eq!(trace.len(), 3);
        assert_eq!(core, cycle);
        assert_eq!(trace.replay(&k).unwrap(), core);
    }

    #[test]
    fn nerve_examples() {
        let bowtie = SimplicialComplex::from_lists(&[&[0, 1, 2], &[0, 3, 4]]);
        assert_eq!(nerve(&bowtie), SimplicialComplex::from_lists(&[&[0, 1]]));
        let apart = SimplicialComplex::from_lists(&[&[0, 1], &[2, 3]]);
        assert_eq!(nerve(&apart), SimplicialComplex::from_lists(&[&[0], &[1]]));
        // Four edges through one vertex: nerve is a solid tetrahedron.
        let hub = SimplicialComplex::from_lists(&[&[0, 1], &[0, 2], &[0, 3], &[0, 4]]);
        assert_eq!(nerve(&hub), SimplicialComplex::solid([0, 1, 2, 3]));
    }

    #[test]
    fn contraction_examples() {
        let path = SimplicialComplex::from_lists(&[&[1, 2], &[2, 3]]);
        let (out, held) = contract_edge(&path, 1, 2).unwrap();
        assert!(held);
        assert_eq!(out, SimplicialComplex::from_lists(&[&[1, 3]]));
        assert_eq!(betti01(&out), (1, 0));

        let triangle = SimplicialComplex::from_lists(&[&[1, 2], &[2, 3], &[1, 3]]);
        let (out, held) = contract_edge(&triangle, 1, 2).unwrap();
        assert!(!held);
        assert_eq!(betti01(&triangle), (1, 1));
        assert_eq!(betti01(&out), (1, 0));

        assert_eq!(
            contract_edge(&path, 1, 3),
            Err(SimplicialError::EdgeAbsent(1, 3))
        );
    }

    #[test]
    fn betti_examples() {
        let k4 =
            SimplicialComplex::from_lists(&[&[1, 2], &[1, 3], &[1, 4], &[2, 3], &[2, 4], &[3, 4]]);
        assert_eq!(betti01(&k4), (1, 3));
        assert_eq!(betti01(&SimplicialComplex::solid([1, 2, 3, 4])), (1, 0));
        let star = SimplicialComplex::from_lists(&[&[0, 1], &[0, 2], &[0, 3], &[0, 4]]);
        assert_eq!(betti01(&star), (1, 0));
        assert_eq!(betti01(&SimplicialComplex::new()), (0, 0));
        // Hollow tetrahedron boundary is a 2-sphere.
        let sphere =
            SimplicialComplex::from_lists(&[&[1, 2, 3], &[1, 2, 4], &[1, 3, 4], &[2, 3, 4]]);
        assert_eq!(betti01(&sphere), (1, 0));
    }

    #[test]
    fn critical_edge_nerve() {
        use crate::mesh::Point2;
        let p = Point2::default();
        let chain = [
            CriticalEdgeRecord::synthetic(5, 1, 2, p),
            CriticalEdgeRecord::synthetic(8, 2, 3, p),
        ];
        assert_eq!(
            nerve_of_critical_edges(&chain),
            SimplicialComplex::from_lists(&[&[5, 8]])
        );
        let hub: Vec<_> = (0..4)
            .map(|k| CriticalEdgeRecord::synthetic(10 + k, 0, 100 + k, p))
            .collect();
        assert_eq!(
            nerve_of_critical_edges(&hub),
            SimplicialComplex::solid([10, 11, 12, 13])
        );
    }

    #[test]
    fn display_is_line_oriented() {
        let k = SimplicialComplex::from_lists(&[&[2, 1]]);
        assert_eq!(k.to_string(), "1\n1 2\n2\n");
        let (_, trace) = strong_collapse(&k);
        assert_eq!(trace.to_string(), "strong 1 2\n");
    }
}
