//! Elementary moves on graph self-maps. Each one changes the graph and the
//! map together, keeps the outer automorphism class, and rewrites the
//! boundary word so the embedding stays valid.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::graph::{tighten, tighten_cyclic, EdgeId, EdgePath, OrientedEdge, VertexId};
use crate::map::GraphSelfMap;

/// Tightens every edge image.
pub fn pull_tight(f: &GraphSelfMap) -> GraphSelfMap {
    let mut out = f.clone();
    for p in out.edge_image.values_mut() {
        *p = tighten(p);
    }
    out
}

/// Edges reachable from `e` through images, `e` included.
pub fn edge_closure(f: &GraphSelfMap, e: EdgeId) -> BTreeSet<EdgeId> {
    let mut seen = BTreeSet::from([e]);
    let mut stack = vec![e];
    while let Some(c) = stack.pop() {
        for d in f.edge_image(c).iter() {
            if seen.insert(d.edge) {
                stack.push(d.edge);
            }
        }
    }
    seen
}

/// Union-find over vertices; the representative of a class is its
/// smallest vertex.
struct Components(BTreeMap<VertexId, VertexId>);

impl Components {
    fn new(vertices: impl Iterator<Item = VertexId>) -> Self {
        Self(vertices.map(|v| (v, v)).collect())
    }

    fn find(&mut self, v: VertexId) -> VertexId {
        let p = self.0[&v];
        if p == v {
            return v;
        }
        let r = self.find(p);
        self.0.insert(v, r);
        r
    }

    /// Returns false if the two were already joined.
    fn union(&mut self, a: VertexId, b: VertexId) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.0.insert(ra.max(rb), ra.min(rb));
        true
    }
}

/// True when the edges form a forest (no cycles, loops included).
pub fn is_forest(f: &GraphSelfMap, edges: &BTreeSet<EdgeId>) -> bool {
    let mut comps = Components::new(f.graph.vertices());
    edges.iter().all(|&e| {
        let (t, h) = f.graph.endpoints(e);
        comps.union(t, h)
    })
}

/// The smallest-edge invariant forest: the closure of the lowest edge
/// whose closure is a forest.
pub fn invariant_forest(f: &GraphSelfMap) -> Option<BTreeSet<EdgeId>> {
    f.graph
        .edges()
        .map(|e| edge_closure(f, e))
        .find(|c| is_forest(f, c))
}

/// Contracts every component of an invariant forest to a point.
pub fn collapse_forest(f: &GraphSelfMap, forest: &BTreeSet<EdgeId>) -> Result<GraphSelfMap> {
    if !is_forest(f, forest) {
        return Err(Error::InvalidMove(
            "collapsed subgraph is not a forest".into(),
        ));
    }
    for &e in forest {
        if f.edge_image(e).iter().any(|d| !forest.contains(&d.edge)) {
            return Err(Error::InvalidMove(format!(
                "forest is not invariant: image of {e} leaves it"
            )));
        }
    }
    let mut comps = Components::new(f.graph.vertices());
    for &e in forest {
        let (t, h) = f.graph.endpoints(e);
        comps.union(t, h);
    }
    let rep: BTreeMap<VertexId, VertexId> =
        f.graph.vertices().map(|v| (v, comps.find(v))).collect();
    let mut out = f.clone();
    let g = &mut out.graph;
    g.vertices = rep.values().copied().collect();
    for &e in forest {
        g.edges.remove(&e);
    }
    for (t, h) in g.edges.values_mut() {
        *t = rep[t];
        *h = rep[h];
    }
    g.rho.retain(|d| !forest.contains(&d.edge));
    let old_vertex_image = std::mem::take(&mut out.vertex_image);
    out.vertex_image = out
        .graph
        .vertices()
        .map(|v| (v, rep[&old_vertex_image[&v]]))
        .collect();
    out.edge_image = f
        .edge_image
        .iter()
        .filter(|(e, _)| !forest.contains(e))
        .map(|(&e, p)| {
            (
                e,
                tighten(
                    &p.iter()
                        .copied()
                        .filter(|d| !forest.contains(&d.edge))
                        .collect(),
                ),
            )
        })
        .collect();
    Ok(out)
}

/// Collapses invariant forests until none is left.
pub fn collapse_invariant_forest(f: &GraphSelfMap) -> Result<GraphSelfMap> {
    let mut out = f.clone();
    while let Some(forest) = invariant_forest(&out) {
        out = collapse_forest(&out, &forest)?;
    }
    Ok(out)
}

/// Replaces each vertex `u` in `moved` by `target` as a vertex image,
/// homotoping edge images by the connecting path `via` (from `target`
/// to the old image).
fn slide_vertex_images(
    f: &mut GraphSelfMap,
    moved: &BTreeSet<VertexId>,
    target: VertexId,
    via: &EdgePath,
) {
    let back = via.reversed();
    for u in moved {
        f.vertex_image.insert(*u, target);
    }
    let ends: Vec<(EdgeId, VertexId, VertexId)> = f.graph.edge_list();
    for (e, t, h) in ends {
        let mut p = EdgePath::empty();
        if moved.contains(&t) {
            p.extend_from(via);
        }
        p.extend_from(&f.edge_image[&e]);
        if moved.contains(&h) {
            p.extend_from(&back);
        }
        f.edge_image.insert(e, tighten(&p));
    }
}

/// Lowest vertex all of whose directions have the same derivative.
pub fn vertex_with_one_direction_image(f: &GraphSelfMap) -> Option<VertexId> {
    f.graph.vertices().find(|&v| {
        let mut images = f
            .graph
            .directions_at(v)
            .into_iter()
            .map(|d| f.derivative(d));
        match images.next() {
            Some(Some(first)) => images.all(|d| d == Some(first)),
            _ => false,
        }
    })
}

/// Moves the image of `v` one edge forward along the common first step of
/// all images leaving `v`. Every such image loses its first step, so the
/// total image length drops.
pub fn slide_vertex(f: &GraphSelfMap, v: VertexId) -> Result<GraphSelfMap> {
    let dirs = f.graph.directions_at(v);
    let u = dirs.first().and_then(|&d| f.derivative(d)).ok_or_else(|| {
        Error::InvalidMove(format!("{v} has no direction with a nontrivial image"))
    })?;
    if dirs.iter().any(|&d| f.derivative(d) != Some(u)) {
        return Err(Error::InvalidMove(format!(
            "directions at {v} do not share a first image step"
        )));
    }
    let mut out = f.clone();
    out.vertex_image.insert(v, f.graph.terminus(u));
    let back = EdgePath::new(vec![u]);
    let front = EdgePath::new(vec![u.reverse()]);
    for (e, t, h) in f.graph.edge_list() {
        let mut p = EdgePath::empty();
        if t == v {
            p.extend_from(&front);
        }
        p.extend_from(&f.edge_image[&e]);
        if h == v {
            p.extend_from(&back);
        }
        out.edge_image.insert(e, tighten(&p));
    }
    Ok(out)
}

/// Lowest vertex of the given valence.
pub fn vertex_of_valence(f: &GraphSelfMap, valence: usize) -> Option<VertexId> {
    f.graph.vertices().find(|&v| f.graph.valence(v) == valence)
}

/// Retracts the edge of a valence-one vertex. Returns the map unchanged if
/// there is none.
pub fn remove_valence_one(f: &GraphSelfMap) -> Result<GraphSelfMap> {
    let Some(v) = vertex_of_valence(f, 1) else {
        return Ok(f.clone());
    };
    let d = f.graph.directions_at(v)[0];
    let w = f.graph.terminus(d);
    let mut out = f.clone();
    let moved: BTreeSet<VertexId> = f
        .graph
        .vertices()
        .filter(|&u| f.vertex_image(u) == v)
        .collect();
    slide_vertex_images(&mut out, &moved, w, &EdgePath::new(vec![d.reverse()]));
    out.edge_image.remove(&d.edge);
    out.vertex_image.remove(&v);
    out.graph.edges.remove(&d.edge);
    out.graph.vertices.remove(&v);
    if out
        .edge_image
        .values()
        .any(|p| p.iter().any(|s| s.edge == d.edge))
    {
        return Err(Error::InvalidMove(format!(
            "image still crosses the retracted edge {}",
            d.edge
        )));
    }
    out.graph.rho = remove_cyclic_pair(&f.graph.rho, d.reverse(), d)?;
    Ok(out)
}

fn remove_cyclic_pair(
    rho: &[OrientedEdge],
    a: OrientedEdge,
    b: OrientedEdge,
) -> Result<Vec<OrientedEdge>> {
    let n = rho.len();
    let i = (0..n)
        .find(|&i| rho[i] == a && rho[(i + 1) % n] == b)
        .ok_or_else(|| Error::InvalidMove(format!("boundary word has no corner {a} {b}")))?;
    let j = (i + 1) % n;
    Ok(rho
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != i && k != j)
        .map(|(_, &d)| d)
        .collect())
}

/// Rewrites a path through a valence-two vertex: `reverse(d1) d2 -> c` and
/// `reverse(d2) d1 -> C`.
fn merge_through(
    p: &[OrientedEdge],
    d1: OrientedEdge,
    d2: OrientedEdge,
    c: EdgeId,
) -> Result<Vec<OrientedEdge>> {
    let mut out = Vec::with_capacity(p.len());
    let mut i = 0;
    while i < p.len() {
        let s = p[i];
        if s.edge == d1.edge || s.edge == d2.edge {
            let next = p.get(i + 1).copied();
            if s == d1.reverse() && next == Some(d2) {
                out.push(OrientedEdge::new(c, true));
            } else if s == d2.reverse() && next == Some(d1) {
                out.push(OrientedEdge::new(c, false));
            } else {
                return Err(Error::InvalidMove(format!(
                    "path stops at the valence-two vertex near {s}"
                )));
            }
            i += 2;
        } else {
            out.push(s);
            i += 1;
        }
    }
    Ok(out)
}

fn merge_through_cyclic(
    rho: &[OrientedEdge],
    d1: OrientedEdge,
    d2: OrientedEdge,
    c: EdgeId,
) -> Result<Vec<OrientedEdge>> {
    // rotate so that the word does not start between the two halves of a pair
    let n = rho.len();
    let start = (0..n)
        .find(|&i| {
            let prev = rho[(i + n - 1) % n];
            !(prev == d1.reverse() || prev == d2.reverse())
        })
        .ok_or_else(|| Error::InvalidMove("boundary word has no valid starting point".into()))?;
    let rotated: Vec<OrientedEdge> = rho[start..].iter().chain(&rho[..start]).copied().collect();
    merge_through(&rotated, d1, d2, c)
}

/// Merges the two edges at a valence-two vertex `v` into one.
///
/// Vertex images equal to `v` are first slid to the far end of `toward`
/// (one of the two directions at `v`).
pub fn merge_at_valence_two(
    f: &GraphSelfMap,
    v: VertexId,
    toward: OrientedEdge,
) -> Result<GraphSelfMap> {
    let dirs = f.graph.directions_at(v);
    if dirs.len() != 2 || dirs[0].edge == dirs[1].edge {
        return Err(Error::InvalidMove(format!(
            "{v} is not a valence-two vertex with two edges"
        )));
    }
    if !dirs.contains(&toward) {
        return Err(Error::InvalidMove(format!(
            "{toward} does not start at {v}"
        )));
    }
    let (d1, d2) = (dirs[0], dirs[1]);
    let mut out = f.clone();
    let moved: BTreeSet<VertexId> = f
        .graph
        .vertices()
        .filter(|&u| f.vertex_image(u) == v)
        .collect();
    if !moved.is_empty() {
        slide_vertex_images(
            &mut out,
            &moved,
            f.graph.terminus(toward),
            &EdgePath::new(vec![toward.reverse()]),
        );
    }
    let (w1, w2) = (f.graph.terminus(d1), f.graph.terminus(d2));
    let c = d1.edge.min(d2.edge);
    let image_c = tighten(&out.image_of(d1).reversed().concat(&out.image_of(d2)));
    out.edge_image.remove(&d1.edge);
    out.edge_image.remove(&d2.edge);
    out.vertex_image.remove(&v);
    out.graph.edges.remove(&d1.edge);
    out.graph.edges.remove(&d2.edge);
    out.graph.vertices.remove(&v);
    out.graph.edges.insert(c, (w1, w2));
    out.edge_image.insert(c, image_c);
    let edges: Vec<EdgeId> = out.edge_image.keys().copied().collect();
    for e in edges {
        let p = merge_through(&out.edge_image[&e], d1, d2, c)?;
        out.edge_image.insert(e, tighten(&EdgePath::new(p)));
    }
    out.graph.rho = merge_through_cyclic(&f.graph.rho, d1, d2, c)?;
    Ok(out)
}

/// Removes the lowest valence-two vertex, choosing the slide direction that
/// gives the smaller growth rate. Unchanged if there is none.
pub fn remove_valence_two(f: &GraphSelfMap, tol: f64) -> Result<GraphSelfMap> {
    let Some(v) = f.graph.vertices().find(|&v| {
        let d = f.graph.directions_at(v);
        d.len() == 2 && d[0].edge != d[1].edge
    }) else {
        return Ok(f.clone());
    };
    let dirs = f.graph.directions_at(v);
    let needs_slide = f.graph.vertices().any(|u| f.vertex_image(u) == v);
    if !needs_slide {
        return merge_at_valence_two(f, v, dirs[0]);
    }
    let mut best: Option<(f64, GraphSelfMap)> = None;
    for toward in dirs {
        let candidate = merge_at_valence_two(f, v, toward)?;
        let lambda = candidate.transition_matrix().spectral_radius(tol)?;
        if best.as_ref().is_none_or(|(l, _)| lambda < *l - tol) {
            best = Some((lambda, candidate));
        }
    }
    Ok(best.expect("two candidates").1)
}

/// Splits edge `e` after `k` steps of its image. The first half keeps the
/// id `e`; returns the map, the id of the second half and the new vertex.
pub fn subdivide(
    f: &GraphSelfMap,
    e: EdgeId,
    k: usize,
) -> Result<(GraphSelfMap, EdgeId, VertexId)> {
    let image = f.edge_image(e).clone();
    if k == 0 || k >= image.len() {
        return Err(Error::InvalidMove(format!(
            "cannot split the image of {e} (length {}) at {k}",
            image.len()
        )));
    }
    let mut out = f.clone();
    let z = out.graph.fresh_vertex();
    let e2 = out.graph.fresh_edge();
    let (t, h) = f.graph.endpoints(e);
    out.graph.vertices.insert(z);
    out.graph.edges.insert(e, (t, z));
    out.graph.edges.insert(e2, (z, h));
    out.vertex_image.insert(z, f.graph.origin(image[k]));
    let prefix: EdgePath = image[..k].iter().copied().collect();
    let suffix: EdgePath = image[k..].iter().copied().collect();
    out.edge_image.insert(e, prefix);
    out.edge_image.insert(e2, suffix);
    let split = |p: &[OrientedEdge]| -> Vec<OrientedEdge> {
        let mut q = Vec::with_capacity(p.len() + 2);
        for &d in p {
            if d.edge == e {
                if d.forward {
                    q.push(OrientedEdge::new(e, true));
                    q.push(OrientedEdge::new(e2, true));
                } else {
                    q.push(OrientedEdge::new(e2, false));
                    q.push(OrientedEdge::new(e, false));
                }
            } else {
                q.push(d);
            }
        }
        q
    };
    for p in out.edge_image.values_mut() {
        *p = EdgePath::new(split(p));
    }
    out.graph.rho = split(&f.graph.rho);
    Ok((out, e2, z))
}

/// Identifies two adjacent directions at a vertex whose images agree.
/// The edge of `keep` survives and the far end of `merge` is glued to the
/// far end of `keep`.
pub fn fold(f: &GraphSelfMap, keep: OrientedEdge, merge: OrientedEdge) -> Result<GraphSelfMap> {
    let g = &f.graph;
    if keep.edge == merge.edge {
        return Err(Error::InvalidMove("cannot fold an edge onto itself".into()));
    }
    if g.origin(keep) != g.origin(merge) {
        return Err(Error::InvalidMove(format!(
            "{keep} and {merge} start at different vertices"
        )));
    }
    if !g.rotation_system()?.adjacent(keep, merge) {
        return Err(Error::InvalidMove(format!(
            "{keep} and {merge} are not adjacent"
        )));
    }
    if f.image_of(keep) != f.image_of(merge) {
        return Err(Error::InvalidMove(format!(
            "{keep} and {merge} have different images"
        )));
    }
    let (t_keep, t_merge) = (g.terminus(keep), g.terminus(merge));
    if t_keep == t_merge {
        return Err(Error::InvalidMove(format!(
            "folding {keep} and {merge} would kill a loop"
        )));
    }
    let relabel = |d: OrientedEdge| -> OrientedEdge {
        if d == merge {
            keep
        } else if d == merge.reverse() {
            keep.reverse()
        } else {
            d
        }
    };
    let vmap = |v: VertexId| if v == t_merge { t_keep } else { v };
    let mut out = f.clone();
    out.graph.edges.remove(&merge.edge);
    out.edge_image.remove(&merge.edge);
    out.graph.vertices.remove(&t_merge);
    out.vertex_image.remove(&t_merge);
    for (t, h) in out.graph.edges.values_mut() {
        *t = vmap(*t);
        *h = vmap(*h);
    }
    for w in out.vertex_image.values_mut() {
        *w = vmap(*w);
    }
    for p in out.edge_image.values_mut() {
        *p = tighten(&p.iter().map(|&d| relabel(d)).collect());
    }
    let rho: Vec<OrientedEdge> = f.graph.rho.iter().map(|&d| relabel(d)).collect();
    out.graph.rho = tighten_cyclic(&rho);
    if out.graph.rho.len() + 2 != rho.len() {
        return Err(Error::InvalidMove(format!(
            "fold of {keep} and {merge} cancelled {} letters of the boundary word",
            rho.len() - out.graph.rho.len()
        )));
    }
    Ok(out)
}

/// Length of the common prefix of two paths.
pub fn common_prefix(a: &[OrientedEdge], b: &[OrientedEdge]) -> usize {
    a.iter().zip(b).take_while(|(x, y)| x == y).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::twist::{standard_rose, x_edge, y_edge};

    fn f_from(genus: usize, images: &[(EdgeId, Vec<OrientedEdge>)]) -> GraphSelfMap {
        let mut f = GraphSelfMap::identity(standard_rose(genus).unwrap());
        for (e, p) in images {
            f.edge_image.insert(*e, EdgePath::new(p.clone()));
        }
        f
    }

    #[test]
    fn pull_tight_cancels_backtracks() {
        let x = OrientedEdge::new(x_edge(0), true);
        let y = OrientedEdge::new(y_edge(0), true);
        let f = f_from(1, &[(x_edge(0), vec![x, x.reverse(), y])]);
        assert_eq!(pull_tight(&f).edge_image(x_edge(0)).steps(), &[y]);
        let id = GraphSelfMap::identity(standard_rose(1).unwrap());
        assert_eq!(pull_tight(&id), id);
    }

    #[test]
    fn subdivision_grows_rho_by_two_and_merges_back() {
        let f = crate::twist::compose_word(
            2,
            &crate::cli::parse_word("a1 c0 d0 a1 d1 a1").unwrap(),
            false,
        )
        .unwrap();
        let e = f
            .graph()
            .edges()
            .find(|&e| f.edge_image(e).len() > 1)
            .unwrap();
        let (g, _, z) = subdivide(&f, e, 1).unwrap();
        g.check_invariants("subdivide").unwrap();
        assert_eq!(g.graph().rho().len(), f.graph().rho().len() + 2);
        let l0 = f.transition_matrix().spectral_radius(1e-12).unwrap();
        let l1 = g.transition_matrix().spectral_radius(1e-12).unwrap();
        assert!((l0 - l1).abs() < 1e-9);
        let back = remove_valence_two(&g, 1e-12).unwrap();
        back.check_invariants("merge").unwrap();
        assert!(!back.graph().has_vertex(z));
        assert_eq!(back.graph().edge_count(), f.graph().edge_count());
        assert_eq!(back.edge_image(e), f.edge_image(e));
    }

    #[test]
    fn subdivide_rejects_out_of_range() {
        let f = GraphSelfMap::identity(standard_rose(1).unwrap());
        assert!(subdivide(&f, x_edge(0), 0).is_err());
        assert!(subdivide(&f, x_edge(0), 1).is_err());
    }

    #[test]
    fn no_low_valence_means_no_change() {
        let f = GraphSelfMap::identity(standard_rose(2).unwrap());
        assert_eq!(remove_valence_one(&f).unwrap(), f);
        assert_eq!(remove_valence_two(&f, 1e-9).unwrap(), f);
        assert_eq!(collapse_invariant_forest(&f).unwrap(), f);
    }

    #[test]
    fn merge_replaces_pairs() {
        let p = [
            OrientedEdge::fwd(7),
            OrientedEdge::bwd(1),
            OrientedEdge::fwd(2),
            OrientedEdge::bwd(2),
            OrientedEdge::fwd(1),
        ];
        let d1 = OrientedEdge::fwd(1);
        let d2 = OrientedEdge::fwd(2);
        let q = merge_through(&p, d1, d2, EdgeId(1)).unwrap();
        assert_eq!(
            q,
            vec![
                OrientedEdge::fwd(7),
                OrientedEdge::fwd(1),
                OrientedEdge::bwd(1)
            ]
        );
    }
}
