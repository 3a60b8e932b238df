//! Graph self-maps representing outer automorphisms.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{
    is_cyclic_rotation, tighten, tighten_cyclic, EdgeId, EdgePath, EmbeddedGraph, OrientedEdge,
    VertexId,
};
use crate::matrix::TransitionMatrix;

/// A homotopy equivalence `f: G -> G`, stored as vertex images plus the
/// image path of every edge in its forward orientation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphSelfMap {
    pub(crate) graph: EmbeddedGraph,
    pub(crate) vertex_image: BTreeMap<VertexId, VertexId>,
    pub(crate) edge_image: BTreeMap<EdgeId, EdgePath>,
}

impl GraphSelfMap {
    /// Builds a map and checks every invariant, including that the boundary
    /// word is sent to a rotation of itself.
    pub fn new(
        graph: EmbeddedGraph,
        vertex_image: BTreeMap<VertexId, VertexId>,
        edge_image: BTreeMap<EdgeId, EdgePath>,
    ) -> Result<Self> {
        let f = Self {
            graph,
            vertex_image,
            edge_image,
        };
        f.check_invariants("construction")?;
        Ok(f)
    }

    pub fn identity(graph: EmbeddedGraph) -> Self {
        let vertex_image = graph.vertices().map(|v| (v, v)).collect();
        let edge_image = graph
            .edges()
            .map(|e| (e, EdgePath::new(vec![OrientedEdge::new(e, true)])))
            .collect();
        Self {
            graph,
            vertex_image,
            edge_image,
        }
    }

    pub fn graph(&self) -> &EmbeddedGraph {
        &self.graph
    }

    pub fn vertex_image(&self, v: VertexId) -> VertexId {
        self.vertex_image[&v]
    }

    pub fn edge_image(&self, e: EdgeId) -> &EdgePath {
        &self.edge_image[&e]
    }

    pub fn edge_images(&self) -> &BTreeMap<EdgeId, EdgePath> {
        &self.edge_image
    }

    /// Image of an oriented edge: the stored image, reversed for backward
    /// orientation.
    pub fn image_of(&self, d: OrientedEdge) -> EdgePath {
        let p = &self.edge_image[&d.edge];
        if d.forward {
            p.clone()
        } else {
            p.reversed()
        }
    }

    /// The derivative map on directions: first step of the image.
    pub fn derivative(&self, d: OrientedEdge) -> Option<OrientedEdge> {
        let p = &self.edge_image[&d.edge];
        if d.forward {
            p.first()
        } else {
            p.last().map(OrientedEdge::reverse)
        }
    }

    /// Image of a path, tightened.
    pub fn apply(&self, p: &EdgePath) -> Result<EdgePath> {
        self.graph.check_path(p)?;
        Ok(tighten(&self.apply_unchecked(p)))
    }

    /// Concatenated image without reduction.
    pub(crate) fn apply_unchecked(&self, p: &[OrientedEdge]) -> EdgePath {
        let mut out = EdgePath::empty();
        for &d in p {
            if d.forward {
                out.extend_from(&self.edge_image[&d.edge]);
            } else {
                out.extend_from(&self.edge_image[&d.edge].reversed());
            }
        }
        out
    }

    pub fn is_tight(&self) -> bool {
        self.edge_image.values().all(EdgePath::is_tight)
    }

    pub fn transition_matrix(&self) -> TransitionMatrix {
        TransitionMatrix::from_map(self)
    }

    /// Every edge image starts at the image of the edge's tail and ends at
    /// the image of its head.
    pub fn check_endpoints(&self) -> Result<()> {
        for v in self.graph.vertices() {
            match self.vertex_image.get(&v) {
                Some(w) if self.graph.has_vertex(*w) => {}
                _ => return Err(Error::InvalidMap(format!("vertex {v} has no valid image"))),
            }
        }
        if self.vertex_image.len() != self.graph.vertex_count() {
            return Err(Error::InvalidMap(
                "vertex images for vertices outside the graph".into(),
            ));
        }
        if self.edge_image.len() != self.graph.edge_count() {
            return Err(Error::InvalidMap(
                "edge image table does not match the edge set".into(),
            ));
        }
        for (e, t, h) in self.graph.edge_list() {
            let Some(p) = self.edge_image.get(&e) else {
                return Err(Error::InvalidMap(format!("edge {e} has no image")));
            };
            self.graph
                .check_path(p)
                .map_err(|err| Error::InvalidMap(format!("image of {e}: {err}")))?;
            let (ft, fh) = (self.vertex_image[&t], self.vertex_image[&h]);
            match (p.first(), p.last()) {
                (Some(a), Some(b)) => {
                    if self.graph.origin(a) != ft || self.graph.terminus(b) != fh {
                        return Err(Error::InvalidMap(format!(
                            "image of {e} has the wrong endpoints"
                        )));
                    }
                }
                _ => {
                    if ft != fh {
                        return Err(Error::InvalidMap(format!(
                            "trivial image of {e} joins two different vertices"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// The boundary loop goes to itself up to free homotopy.
    pub fn check_boundary(&self) -> Result<()> {
        let image = tighten_cyclic(&self.apply_unchecked(self.graph.rho()));
        if is_cyclic_rotation(self.graph.rho(), &image) {
            Ok(())
        } else {
            Err(Error::InvalidMap(format!(
                "boundary word {} maps to {}",
                EdgePath::new(self.graph.rho().to_vec()),
                EdgePath::new(image)
            )))
        }
    }

    /// Graph, endpoint and boundary invariants, tagged with the step name.
    pub fn check_invariants(&self, step: &str) -> Result<()> {
        let wrap = |e: Error| Error::InvariantViolation {
            step: step.to_string(),
            detail: e.to_string(),
        };
        self.graph.validate().map_err(wrap)?;
        self.check_endpoints().map_err(wrap)?;
        self.check_boundary().map_err(wrap)?;
        Ok(())
    }

    /// Action on `H_1(G; Z)` in the basis of fundamental cycles of a
    /// spanning tree (non-tree edges in id order). Row `i`, column `j` is the
    /// coefficient of generator `i` in the image of generator `j`.
    pub fn homology_action(&self) -> Vec<Vec<i64>> {
        let g = &self.graph;
        // spanning tree by BFS from the smallest vertex
        let mut parent: BTreeMap<VertexId, Option<OrientedEdge>> = BTreeMap::new();
        let mut tree_edges = std::collections::BTreeSet::new();
        let mut queue = std::collections::VecDeque::new();
        if let Some(root) = g.vertices().next() {
            parent.insert(root, None);
            queue.push_back(root);
        }
        while let Some(v) = queue.pop_front() {
            for d in g.directions_at(v) {
                let w = g.terminus(d);
                if let std::collections::btree_map::Entry::Vacant(slot) = parent.entry(w) {
                    slot.insert(Some(d));
                    tree_edges.insert(d.edge);
                    queue.push_back(w);
                }
            }
        }
        let generators: Vec<EdgeId> = g.edges().filter(|e| !tree_edges.contains(e)).collect();
        let index: BTreeMap<EdgeId, usize> = generators
            .iter()
            .enumerate()
            .map(|(i, &e)| (e, i))
            .collect();
        let abelianize = |p: &[OrientedEdge]| {
            let mut v = vec![0i64; generators.len()];
            for d in p {
                if let Some(&i) = index.get(&d.edge) {
                    v[i] += if d.forward { 1 } else { -1 };
                }
            }
            v
        };
        let mut cols = Vec::with_capacity(generators.len());
        for &e in &generators {
            // tree paths contribute nothing, so the image of the cycle
            // abelianizes to the image of e plus images of tree edges
            let (t, h) = g.endpoints(e);
            let mut cycle = tree_path_from_root(&parent, g, t);
            cycle.push(OrientedEdge::new(e, true));
            let back = tree_path_from_root(&parent, g, h);
            cycle.extend(back.iter().rev().map(|d| d.reverse()));
            cols.push(abelianize(&self.apply_unchecked(&cycle)));
        }
        let n = generators.len();
        (0..n)
            .map(|i| (0..n).map(|j| cols[j][i]).collect())
            .collect()
    }
}

fn tree_path_from_root(
    parent: &BTreeMap<VertexId, Option<OrientedEdge>>,
    g: &EmbeddedGraph,
    mut v: VertexId,
) -> Vec<OrientedEdge> {
    let mut rev = Vec::new();
    while let Some(Some(d)) = parent.get(&v) {
        rev.push(*d);
        v = g.origin(*d);
    }
    rev.reverse();
    rev
}

/// `g ∘ f`, edge images tightened.
pub fn compose(g: &GraphSelfMap, f: &GraphSelfMap) -> Result<GraphSelfMap> {
    if g.graph != f.graph {
        return Err(Error::InvalidMap(
            "cannot compose maps on different graphs".into(),
        ));
    }
    let vertex_image = f
        .vertex_image
        .iter()
        .map(|(&v, &w)| (v, g.vertex_image[&w]))
        .collect();
    let edge_image = f
        .edge_image
        .iter()
        .map(|(&e, p)| (e, tighten(&g.apply_unchecked(p))))
        .collect();
    Ok(GraphSelfMap {
        graph: f.graph.clone(),
        vertex_image,
        edge_image,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::EdgeId;

    fn x() -> OrientedEdge {
        OrientedEdge::fwd(0)
    }
    fn y() -> OrientedEdge {
        OrientedEdge::fwd(1)
    }

    fn torus() -> EmbeddedGraph {
        let v = VertexId(0);
        EmbeddedGraph::new(
            [v],
            [(EdgeId(0), v, v), (EdgeId(1), v, v)],
            vec![x(), y(), x().reverse(), y().reverse()],
        )
        .unwrap()
    }

    /// x -> y, y -> y x. Not boundary-preserving, so built without checks.
    fn fib() -> GraphSelfMap {
        let g = torus();
        let mut f = GraphSelfMap::identity(g);
        f.edge_image.insert(EdgeId(0), EdgePath::new(vec![y()]));
        f.edge_image
            .insert(EdgeId(1), EdgePath::new(vec![y(), x()]));
        f
    }

    #[test]
    fn identity_applies_as_tighten() {
        let f = GraphSelfMap::identity(torus());
        let p = EdgePath::new(vec![x(), y(), y().reverse(), x()]);
        assert_eq!(f.apply(&p).unwrap(), p.tightened());
        f.check_invariants("identity").unwrap();
    }

    #[test]
    fn substitution_on_a_rose() {
        let f = fib();
        let p = EdgePath::new(vec![x(), y()]);
        assert_eq!(f.apply(&p).unwrap().steps(), &[y(), y(), x()]);
    }

    #[test]
    fn compose_with_identity() {
        let f = fib();
        let id = GraphSelfMap::identity(torus());
        assert_eq!(compose(&id, &f).unwrap(), f);
        assert_eq!(compose(&f, &id).unwrap(), f);
    }

    #[test]
    fn apply_rejects_foreign_edges() {
        let f = fib();
        let p = EdgePath::new(vec![OrientedEdge::fwd(7)]);
        assert!(matches!(f.apply(&p), Err(Error::PathMismatch(_))));
    }

    #[test]
    fn homology_of_fibonacci_map() {
        let f = fib();
        assert_eq!(f.homology_action(), vec![vec![0, 1], vec![1, 1]]);
    }
}
