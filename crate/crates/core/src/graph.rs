//! Embedded graphs encoded by a boundary word.
//!
//! A finite graph `G` sitting inside a once-punctured surface is recorded by
//! the closed edge path `rho` that runs once around the puncture. `rho`
//! crosses every edge twice, once in each direction, and the cyclic order
//! of the directions at each vertex (the rotation system) can be read off
//! from consecutive letters of `rho`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VertexId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EdgeId(pub u32);

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.0)
    }
}

/// An edge together with a direction of travel.
///
/// Read as a *direction* at a vertex, an oriented edge stands for the germ of
/// the edge leaving its origin.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct OrientedEdge {
    pub edge: EdgeId,
    pub forward: bool,
}

impl OrientedEdge {
    pub fn new(edge: EdgeId, forward: bool) -> Self {
        Self { edge, forward }
    }

    pub fn fwd(edge: u32) -> Self {
        Self::new(EdgeId(edge), true)
    }

    pub fn bwd(edge: u32) -> Self {
        Self::new(EdgeId(edge), false)
    }

    #[must_use]
    pub fn reverse(self) -> Self {
        Self {
            edge: self.edge,
            forward: !self.forward,
        }
    }
}

/// `e3` for the forward orientation, `E3` for the reverse.
impl fmt::Display for OrientedEdge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.forward {
            write!(f, "e{}", self.edge.0)
        } else {
            write!(f, "E{}", self.edge.0)
        }
    }
}

/// A finite sequence of oriented edges.
///
/// Endpoint compatibility depends on a graph and is checked by
/// [`EmbeddedGraph::check_path`]; the purely combinatorial operations here
/// (reversal, free reduction) do not need one.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EdgePath(Vec<OrientedEdge>);

impl EdgePath {
    pub fn new(steps: Vec<OrientedEdge>) -> Self {
        Self(steps)
    }

    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn steps(&self) -> &[OrientedEdge] {
        &self.0
    }

    pub fn into_steps(self) -> Vec<OrientedEdge> {
        self.0
    }

    #[must_use]
    pub fn reversed(&self) -> Self {
        Self(self.0.iter().rev().map(|d| d.reverse()).collect())
    }

    pub fn is_tight(&self) -> bool {
        self.0.windows(2).all(|w| w[1] != w[0].reverse())
    }

    #[must_use]
    pub fn tightened(&self) -> Self {
        tighten(self)
    }

    pub fn push(&mut self, d: OrientedEdge) {
        self.0.push(d);
    }

    pub fn extend_from(&mut self, other: &EdgePath) {
        self.0.extend_from_slice(&other.0);
    }

    /// Concatenation without reduction.
    #[must_use]
    pub fn concat(&self, other: &EdgePath) -> Self {
        let mut out = self.0.clone();
        out.extend_from_slice(&other.0);
        Self(out)
    }

    pub fn first(&self) -> Option<OrientedEdge> {
        self.0.first().copied()
    }

    pub fn last(&self) -> Option<OrientedEdge> {
        self.0.last().copied()
    }

    /// Occurrences of `edge` in either orientation.
    pub fn crossings(&self, edge: EdgeId) -> usize {
        self.0.iter().filter(|d| d.edge == edge).count()
    }
}

impl Deref for EdgePath {
    type Target = [OrientedEdge];

    fn deref(&self) -> &[OrientedEdge] {
        &self.0
    }
}

impl FromIterator<OrientedEdge> for EdgePath {
    fn from_iter<I: IntoIterator<Item = OrientedEdge>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

impl From<Vec<OrientedEdge>> for EdgePath {
    fn from(v: Vec<OrientedEdge>) -> Self {
        Self(v)
    }
}

impl fmt::Display for EdgePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for (i, d) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

/// Free reduction: cancel every `d reverse(d)` pair until none is left.
pub fn tighten(p: &EdgePath) -> EdgePath {
    let mut out: Vec<OrientedEdge> = Vec::with_capacity(p.len());
    for &d in p.iter() {
        if out.last() == Some(&d.reverse()) {
            out.pop();
        } else {
            out.push(d);
        }
    }
    EdgePath(out)
}

/// Free reduction followed by cancelling the two ends against each other,
/// so the result is cyclically reduced.
pub fn tighten_cyclic(word: &[OrientedEdge]) -> Vec<OrientedEdge> {
    let mut w = tighten(&EdgePath(word.to_vec())).0;
    let mut lo = 0;
    let mut hi = w.len();
    while hi - lo >= 2 && w[lo] == w[hi - 1].reverse() {
        lo += 1;
        hi -= 1;
    }
    w.truncate(hi);
    w.drain(..lo);
    w
}

/// True when `b` is a cyclic rotation of `a`.
pub fn is_cyclic_rotation<T: PartialEq>(a: &[T], b: &[T]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    if a.is_empty() {
        return true;
    }
    (0..a.len()).any(|s| (0..a.len()).all(|i| a[(s + i) % a.len()] == b[i]))
}

/// Cyclic order of directions at every vertex, derived from the boundary word.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RotationSystem {
    succ: BTreeMap<OrientedEdge, OrientedEdge>,
    origin: BTreeMap<OrientedEdge, VertexId>,
}

impl RotationSystem {
    pub fn successor(&self, d: OrientedEdge) -> OrientedEdge {
        self.succ[&d]
    }

    pub fn predecessor(&self, d: OrientedEdge) -> OrientedEdge {
        let v = self.origin[&d];
        let mut cur = d;
        loop {
            let next = self.succ[&cur];
            if next == d {
                return cur;
            }
            debug_assert_eq!(self.origin[&next], v);
            cur = next;
        }
    }

    /// The directions at `v` in rotation order, starting from the smallest.
    pub fn cyclic_order(&self, v: VertexId) -> Vec<OrientedEdge> {
        let Some(start) = self.origin.iter().find(|(_, &o)| o == v).map(|(d, _)| *d) else {
            return Vec::new();
        };
        let mut out = vec![start];
        let mut cur = self.succ[&start];
        while cur != start {
            out.push(cur);
            cur = self.succ[&cur];
        }
        out
    }

    /// Two directions are adjacent when one immediately follows the other.
    pub fn adjacent(&self, a: OrientedEdge, b: OrientedEdge) -> bool {
        self.succ.get(&a) == Some(&b) || self.succ.get(&b) == Some(&a)
    }

    /// Number of boundary cycles of the ribbon graph, traced by
    /// `d -> successor(reverse(d))`.
    pub fn face_count(&self) -> usize {
        let mut seen = BTreeSet::new();
        let mut faces = 0;
        for &d in self.succ.keys() {
            if seen.contains(&d) {
                continue;
            }
            faces += 1;
            let mut cur = d;
            while seen.insert(cur) {
                cur = self.succ[&cur.reverse()];
            }
        }
        faces
    }

    pub fn succ_map(&self) -> &BTreeMap<OrientedEdge, OrientedEdge> {
        &self.succ
    }
}

/// A finite graph together with the boundary word of its embedding.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbeddedGraph {
    pub(crate) vertices: BTreeSet<VertexId>,
    pub(crate) edges: BTreeMap<EdgeId, (VertexId, VertexId)>,
    pub(crate) rho: Vec<OrientedEdge>,
    pub(crate) next_vertex: u32,
    pub(crate) next_edge: u32,
}

impl EmbeddedGraph {
    /// Builds and validates a graph. `edges` lists `(id, tail, head)`.
    pub fn new(
        vertices: impl IntoIterator<Item = VertexId>,
        edges: impl IntoIterator<Item = (EdgeId, VertexId, VertexId)>,
        rho: Vec<OrientedEdge>,
    ) -> Result<Self> {
        let vertices: BTreeSet<VertexId> = vertices.into_iter().collect();
        let mut edge_map = BTreeMap::new();
        for (e, t, h) in edges {
            if edge_map.insert(e, (t, h)).is_some() {
                return Err(Error::InvalidGraph(format!("duplicate edge id {e}")));
            }
        }
        let next_vertex = vertices.iter().next_back().map_or(0, |v| v.0 + 1);
        let next_edge = edge_map.keys().next_back().map_or(0, |e| e.0 + 1);
        let g = Self {
            vertices,
            edges: edge_map,
            rho,
            next_vertex,
            next_edge,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.vertices.iter().copied()
    }

    pub fn edges(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.edges.keys().copied()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_vertex(&self, v: VertexId) -> bool {
        self.vertices.contains(&v)
    }

    pub fn has_edge(&self, e: EdgeId) -> bool {
        self.edges.contains_key(&e)
    }

    pub fn rho(&self) -> &[OrientedEdge] {
        &self.rho
    }

    pub fn rho_path(&self) -> EdgePath {
        EdgePath(self.rho.clone())
    }

    /// `(tail, head)` of an edge.
    pub fn endpoints(&self, e: EdgeId) -> (VertexId, VertexId) {
        self.edges[&e]
    }

    pub fn origin(&self, d: OrientedEdge) -> VertexId {
        let (t, h) = self.edges[&d.edge];
        if d.forward {
            t
        } else {
            h
        }
    }

    pub fn terminus(&self, d: OrientedEdge) -> VertexId {
        self.origin(d.reverse())
    }

    pub fn is_loop(&self, e: EdgeId) -> bool {
        let (t, h) = self.edges[&e];
        t == h
    }

    /// All oriented edges, in id order (forward before backward).
    pub fn directions(&self) -> Vec<OrientedEdge> {
        self.edges
            .keys()
            .flat_map(|&e| [OrientedEdge::new(e, true), OrientedEdge::new(e, false)])
            .collect()
    }

    pub fn directions_at(&self, v: VertexId) -> Vec<OrientedEdge> {
        self.directions()
            .into_iter()
            .filter(|&d| self.origin(d) == v)
            .collect()
    }

    pub fn valence(&self, v: VertexId) -> usize {
        self.edges
            .values()
            .map(|&(t, h)| usize::from(t == v) + usize::from(h == v))
            .sum()
    }

    /// Checks that `p` is made of edges of this graph with matching endpoints.
    pub fn check_path(&self, p: &[OrientedEdge]) -> Result<()> {
        for d in p {
            if !self.edges.contains_key(&d.edge) {
                return Err(Error::PathMismatch(format!("unknown edge {}", d.edge)));
            }
        }
        for w in p.windows(2) {
            if self.terminus(w[0]) != self.origin(w[1]) {
                return Err(Error::PathMismatch(format!(
                    "{} does not end where {} starts",
                    w[0], w[1]
                )));
            }
        }
        Ok(())
    }

    /// Euler-characteristic genus `(1 - |V| + |E|) / 2` of the punctured surface.
    pub fn genus(&self) -> Result<u32> {
        let twice = 1 - self.vertices.len() as i64 + self.edges.len() as i64;
        if twice < 2 || twice % 2 != 0 {
            return Err(Error::Genus(format!(
                "|V| = {}, |E| = {} gives no integral genus >= 1",
                self.vertices.len(),
                self.edges.len()
            )));
        }
        Ok((twice / 2) as u32)
    }

    /// Derives the rotation system from `rho`: every consecutive pair
    /// `(d, d')` records `successor(reverse(d)) = d'`.
    pub fn rotation_system(&self) -> Result<RotationSystem> {
        let n = self.rho.len();
        if n != 2 * self.edges.len() {
            return Err(Error::InvalidGraph(format!(
                "boundary word has length {n}, expected {}",
                2 * self.edges.len()
            )));
        }
        let mut seen = BTreeSet::new();
        for d in &self.rho {
            if !self.edges.contains_key(&d.edge) {
                return Err(Error::InvalidGraph(format!(
                    "boundary word uses unknown edge {}",
                    d.edge
                )));
            }
            if !seen.insert(*d) {
                return Err(Error::InvalidGraph(format!(
                    "boundary word crosses {d} twice"
                )));
            }
        }
        let mut succ = BTreeMap::new();
        for i in 0..n {
            let d = self.rho[i];
            let next = self.rho[(i + 1) % n];
            if self.terminus(d) != self.origin(next) {
                return Err(Error::InvalidGraph(format!(
                    "boundary word breaks between {d} and {next}"
                )));
            }
            succ.insert(d.reverse(), next);
        }
        let origin = succ.keys().map(|&d| (d, self.origin(d))).collect();
        let rs = RotationSystem { succ, origin };
        for &v in &self.vertices {
            let cycle = rs.cyclic_order(v).len();
            if cycle != self.valence(v) {
                return Err(Error::InvalidGraph(format!(
                    "directions at {v} split into several cycles ({cycle} of {})",
                    self.valence(v)
                )));
            }
        }
        let faces = rs.face_count();
        if faces != 1 {
            return Err(Error::InvalidGraph(format!(
                "ribbon structure has {faces} faces, expected 1"
            )));
        }
        Ok(rs)
    }

    /// Full structural check.
    pub fn validate(&self) -> Result<()> {
        for (&e, &(t, h)) in &self.edges {
            if !self.vertices.contains(&t) || !self.vertices.contains(&h) {
                return Err(Error::InvalidGraph(format!(
                    "edge {e} has an endpoint outside the vertex set"
                )));
            }
        }
        for &v in &self.vertices {
            if self.valence(v) == 0 {
                return Err(Error::InvalidGraph(format!("vertex {v} is isolated")));
            }
        }
        self.rotation_system()?;
        self.genus()?;
        Ok(())
    }

    pub(crate) fn fresh_vertex(&mut self) -> VertexId {
        let v = VertexId(self.next_vertex);
        self.next_vertex += 1;
        v
    }

    pub(crate) fn fresh_edge(&mut self) -> EdgeId {
        let e = EdgeId(self.next_edge);
        self.next_edge += 1;
        e
    }

    /// Edge ids and endpoints, for reports.
    pub fn edge_list(&self) -> Vec<(EdgeId, VertexId, VertexId)> {
        self.edges.iter().map(|(&e, &(t, h))| (e, t, h)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(e: u32) -> OrientedEdge {
        OrientedEdge::fwd(e)
    }

    fn r(e: u32) -> OrientedEdge {
        OrientedEdge::bwd(e)
    }

    fn torus() -> EmbeddedGraph {
        let v = VertexId(0);
        EmbeddedGraph::new(
            [v],
            [(EdgeId(0), v, v), (EdgeId(1), v, v)],
            vec![d(0), d(1), r(0), r(1)],
        )
        .unwrap()
    }

    #[test]
    fn tighten_cancels_fully() {
        let p = EdgePath::new(vec![d(0), r(0)]);
        assert!(tighten(&p).is_empty());
        let p = EdgePath::new(vec![d(0), d(1), r(1), d(2)]);
        assert_eq!(tighten(&p).steps(), &[d(0), d(2)]);
    }

    #[test]
    fn cyclic_tightening_and_rotation() {
        assert_eq!(tighten_cyclic(&[d(1), d(0), d(2), r(1)]), vec![d(0), d(2)]);
        assert!(is_cyclic_rotation(&[1, 2, 3], &[3, 1, 2]));
        assert!(!is_cyclic_rotation(&[1, 2, 3], &[3, 2, 1]));
    }

    #[test]
    fn torus_rotation_is_a_four_cycle() {
        let g = torus();
        let rs = g.rotation_system().unwrap();
        assert_eq!(rs.successor(r(0)), d(1));
        assert_eq!(rs.successor(r(1)), r(0));
        assert_eq!(rs.successor(d(0)), r(1));
        assert_eq!(rs.successor(d(1)), d(0));
        assert_eq!(rs.cyclic_order(VertexId(0)).len(), 4);
        assert_eq!(rs.face_count(), 1);
        assert_eq!(g.genus().unwrap(), 1);
    }

    #[test]
    fn repeated_letter_in_rho_is_rejected() {
        let v = VertexId(0);
        let err = EmbeddedGraph::new(
            [v],
            [(EdgeId(0), v, v), (EdgeId(1), v, v)],
            vec![d(0), d(1), d(0), r(1)],
        );
        assert!(matches!(err, Err(Error::InvalidGraph(_))));
    }

    #[test]
    fn planar_word_is_rejected() {
        // x X y Y splits the corners at the vertex into two cycles.
        let v = VertexId(0);
        let err = EmbeddedGraph::new(
            [v],
            [(EdgeId(0), v, v), (EdgeId(1), v, v)],
            vec![d(0), r(0), d(1), r(1)],
        );
        assert!(matches!(err, Err(Error::InvalidGraph(_))));
    }

    #[test]
    fn path_reverse_is_involution() {
        let p = EdgePath::new(vec![d(0), r(1), d(2)]);
        assert_eq!(p.reversed().reversed(), p);
        assert_eq!(d(3).reverse().reverse(), d(3));
    }
}
