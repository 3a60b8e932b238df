//! Dehn twists on embedded graphs and the standard generator curves.
//!
//! A closed curve carried by the graph is pushed slightly off to one side.
//! At each visit of the curve to a vertex, the pushed-off copy cuts across
//! the directions lying strictly between the outgoing and the reversed
//! incoming step on that side; every edge leaving through such a direction
//! picks up one full turn around the curve.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{
    tighten, tighten_cyclic, EdgeId, EdgePath, EmbeddedGraph, OrientedEdge, VertexId,
};
use crate::map::{compose, GraphSelfMap};

/// Which way the rotation system is read when deciding which side of a
/// curve is "left". Flipping it mirrors every twist.
pub const ROTATION_IS_COUNTERCLOCKWISE: bool = true;

/// A closed, cyclically tight edge path that uses no oriented edge twice.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveOnGraph {
    path: Vec<OrientedEdge>,
    name: Option<String>,
}

impl CurveOnGraph {
    pub fn new(
        graph: &EmbeddedGraph,
        path: Vec<OrientedEdge>,
        name: Option<String>,
    ) -> Result<Self> {
        let label = name
            .clone()
            .unwrap_or_else(|| EdgePath::new(path.clone()).to_string());
        if path.is_empty() {
            return Err(Error::CurveNotRealizable(format!("{label}: empty curve")));
        }
        graph
            .check_path(&path)
            .map_err(|e| Error::CurveNotRealizable(format!("{label}: {e}")))?;
        if graph.terminus(*path.last().unwrap()) != graph.origin(path[0]) {
            return Err(Error::CurveNotRealizable(format!(
                "{label}: path is not closed"
            )));
        }
        if tighten_cyclic(&path) != path {
            return Err(Error::CurveNotRealizable(format!(
                "{label}: not cyclically tight"
            )));
        }
        let mut sorted = path.clone();
        sorted.sort();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::CurveNotRealizable(format!(
                "{label}: repeats an oriented edge"
            )));
        }
        Ok(Self { path, name })
    }

    pub fn path(&self) -> &[OrientedEdge] {
        &self.path
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    /// The curve read starting from step `i`.
    fn loop_from(&self, i: usize) -> EdgePath {
        self.path[i..]
            .iter()
            .chain(&self.path[..i])
            .copied()
            .collect()
    }
}

/// One Dehn twist along a curve (`sign` is `+1` or `-1`).
pub fn dehn_twist(graph: &EmbeddedGraph, curve: &CurveOnGraph, sign: i8) -> Result<GraphSelfMap> {
    assert!(sign == 1 || sign == -1, "twist exponent must be ±1");
    let rs = graph.rotation_system()?;
    // position of every direction in the cyclic order at its vertex
    let mut position: BTreeMap<OrientedEdge, (usize, usize)> = BTreeMap::new();
    for v in graph.vertices() {
        let mut order = rs.cyclic_order(v);
        if !ROTATION_IS_COUNTERCLOCKWISE {
            order.reverse();
        }
        let n = order.len();
        for (i, d) in order.into_iter().enumerate() {
            position.insert(d, (i, n));
        }
    }
    let m = curve.path.len();
    let visit_vertex = |i: usize| graph.origin(curve.path[i]);
    let outgoing = |i: usize| curve.path[i];
    let incoming = |i: usize| curve.path[(i + m - 1) % m].reverse();

    // directions strictly between `from` and `to`, walking forward
    let arc = |from: OrientedEdge, to: OrientedEdge| -> Vec<usize> {
        let (a, n) = position[&from];
        let (b, _) = position[&to];
        let len = (b + n - a) % n;
        (1..len).map(|k| (a + k) % n).collect()
    };

    let mut chosen = None;
    for side in [1i8, -1] {
        let arcs: Vec<Vec<usize>> = (0..m)
            .map(|i| {
                if side == 1 {
                    arc(outgoing(i), incoming(i))
                } else {
                    arc(incoming(i), outgoing(i))
                }
            })
            .collect();
        if arcs_are_laminar(
            &arcs,
            m,
            visit_vertex,
            |i| position[&outgoing(i)].0,
            |i| position[&incoming(i)].0,
        ) {
            chosen = Some((side, arcs));
            break;
        }
    }
    let Some((side, arcs)) = chosen else {
        return Err(Error::CurveNotRealizable(format!(
            "{}: the pushed-off copy crosses itself",
            curve
                .name
                .clone()
                .unwrap_or_else(|| EdgePath::new(curve.path.clone()).to_string())
        )));
    };

    // loops picked up when leaving through each direction, innermost first
    let mut leading: BTreeMap<OrientedEdge, EdgePath> = BTreeMap::new();
    for d in graph.directions() {
        let v = graph.origin(d);
        let (pos, _) = position[&d];
        let mut visits: Vec<usize> = (0..m)
            .filter(|&i| visit_vertex(i) == v && arcs[i].contains(&pos))
            .collect();
        visits.sort_by_key(|&i| (std::cmp::Reverse(arcs[i].len()), i));
        let mut p = EdgePath::empty();
        for i in visits {
            let lp = curve.loop_from(i);
            if sign * side > 0 {
                p.extend_from(&lp);
            } else {
                p.extend_from(&lp.reversed());
            }
        }
        leading.insert(d, p);
    }

    let vertex_image = graph.vertices().map(|v| (v, v)).collect();
    let edge_image: BTreeMap<EdgeId, EdgePath> = graph
        .edges()
        .map(|e| {
            let fwd = OrientedEdge::new(e, true);
            let mut p = leading[&fwd].clone();
            p.push(fwd);
            p.extend_from(&leading[&fwd.reverse()].reversed());
            (e, tighten(&p))
        })
        .collect();
    GraphSelfMap::new(graph.clone(), vertex_image, edge_image)
}

/// Arcs at a common vertex must be nested or disjoint, and the endpoints of
/// one visit must lie on a single side of every other visit's arc.
fn arcs_are_laminar(
    arcs: &[Vec<usize>],
    m: usize,
    vertex: impl Fn(usize) -> VertexId,
    out_pos: impl Fn(usize) -> usize,
    in_pos: impl Fn(usize) -> usize,
) -> bool {
    for i in 0..m {
        for j in 0..m {
            if i == j || vertex(i) != vertex(j) {
                continue;
            }
            let (ai, aj) = (&arcs[i], &arcs[j]);
            let inter = aj.iter().filter(|x| ai.contains(x)).count();
            let nested_or_disjoint = inter == 0 || inter == ai.len() || inter == aj.len();
            if !nested_or_disjoint {
                return false;
            }
            if ai.contains(&out_pos(j)) != ai.contains(&in_pos(j)) {
                return false;
            }
        }
    }
    true
}

/// Curve families of the standard generating set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Family {
    A,
    C,
    D,
}

impl Family {
    fn letter(self) -> char {
        match self {
            Family::A => 'a',
            Family::C => 'c',
            Family::D => 'd',
        }
    }
}

/// One letter `D_{name}^{±1}` of a twist word.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwistLetter {
    pub family: Family,
    pub index: usize,
    pub exponent: i8,
}

impl TwistLetter {
    pub fn name(&self) -> String {
        format!("{}{}", self.family.letter(), self.index)
    }

    #[must_use]
    pub fn inverse(self) -> Self {
        Self {
            exponent: -self.exponent,
            ..self
        }
    }
}

impl fmt::Display for TwistLetter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exponent < 0 {
            write!(f, "-")?;
        }
        write!(f, "{}", self.name())
    }
}

/// A product of twists, written left to right as in `D_{a1} D_{c0} ...`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwistWord {
    pub letters: Vec<TwistLetter>,
}

impl TwistWord {
    pub fn new(letters: Vec<TwistLetter>) -> Self {
        Self { letters }
    }

    /// The word for the inverse mapping class.
    #[must_use]
    pub fn inverse(&self) -> Self {
        Self {
            letters: self.letters.iter().rev().map(|l| l.inverse()).collect(),
        }
    }

    /// Moves the first `k` letters to the end.
    #[must_use]
    pub fn rotated(&self, k: usize) -> Self {
        let n = self.letters.len();
        if n == 0 {
            return self.clone();
        }
        let k = k % n;
        Self {
            letters: self.letters[k..]
                .iter()
                .chain(&self.letters[..k])
                .copied()
                .collect(),
        }
    }
}

impl fmt::Display for TwistWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, l) in self.letters.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

/// Edge id of the `x` loop of handle `i` on the standard rose.
pub fn x_edge(i: usize) -> EdgeId {
    EdgeId(2 * i as u32)
}

/// Edge id of the `y` loop of handle `i` on the standard rose.
pub fn y_edge(i: usize) -> EdgeId {
    EdgeId(2 * i as u32 + 1)
}

/// One vertex, loops `x_0, y_0, ..., x_{g-1}, y_{g-1}`, boundary word the
/// product of commutators `x_i y_i X_i Y_i`.
pub fn standard_rose(genus: usize) -> Result<EmbeddedGraph> {
    if genus < 1 {
        return Err(Error::Genus(format!(
            "standard rose needs genus >= 1, got {genus}"
        )));
    }
    let v = VertexId(0);
    let mut edges = Vec::new();
    let mut rho = Vec::new();
    for i in 0..genus {
        let (x, y) = (x_edge(i), y_edge(i));
        edges.push((x, v, v));
        edges.push((y, v, v));
        rho.extend([
            OrientedEdge::new(x, true),
            OrientedEdge::new(y, true),
            OrientedEdge::new(x, false),
            OrientedEdge::new(y, false),
        ]);
    }
    EmbeddedGraph::new([v], edges, rho)
}

/// Number of curves in each family at the given genus.
pub fn family_size(genus: usize, family: Family) -> usize {
    match family {
        Family::A | Family::C | Family::D => genus,
    }
}

/// The cyclic word of a generator curve on [`standard_rose`].
///
/// `a_i` runs once along `x_i` and `d_i` along `y_i`, so `a_i` and `d_i`
/// meet once. For `i < g - 1`, `c_i = X_i Y_i x_{i+1} y_i` meets `d_i` and
/// `d_{i+1}` once each and misses every other generator, so
/// `a_0, d_0, c_0, d_1, ..., c_{g-2}, d_{g-1}, a_{g-1}` is a chain. The last
/// curve `c_{g-1}` meets only `d_{g-1}` and is therefore isotopic to
/// `a_{g-1}`.
pub fn generator_path(genus: usize, family: Family, index: usize) -> Result<Vec<OrientedEdge>> {
    let name = format!("{}{}", family.letter(), index);
    if index >= family_size(genus, family) {
        return Err(Error::UnknownGenerator(name));
    }
    let x = |i: usize, forward: bool| OrientedEdge::new(x_edge(i), forward);
    let y = |i: usize, forward: bool| OrientedEdge::new(y_edge(i), forward);
    Ok(match family {
        Family::A => vec![x(index, true)],
        Family::D => vec![y(index, true)],
        Family::C if index + 1 == genus => vec![x(index, true)],
        Family::C => vec![
            x(index, false),
            y(index, false),
            x(index + 1, true),
            y(index, true),
        ],
    })
}

/// The named curves of the standard generating set on [`standard_rose`].
pub fn standard_generators(genus: usize) -> Result<BTreeMap<String, CurveOnGraph>> {
    if genus < 2 {
        return Err(Error::Genus(format!(
            "standard generators need genus >= 2, got {genus}"
        )));
    }
    generators_unchecked(genus)
}

fn generators_unchecked(genus: usize) -> Result<BTreeMap<String, CurveOnGraph>> {
    let rose = standard_rose(genus)?;
    let mut out = BTreeMap::new();
    for family in [Family::A, Family::C, Family::D] {
        for index in 0..family_size(genus, family) {
            let name = format!("{}{}", family.letter(), index);
            let path = generator_path(genus, family, index)?;
            out.insert(name.clone(), CurveOnGraph::new(&rose, path, Some(name))?);
        }
    }
    Ok(out)
}

/// Evaluates a twist word on [`standard_rose`]; the rightmost letter acts
/// first. Genus 1 is accepted only with `allow_low_genus`.
pub fn compose_word(genus: usize, word: &TwistWord, allow_low_genus: bool) -> Result<GraphSelfMap> {
    if genus < 2 && !(allow_low_genus && genus == 1) {
        return Err(Error::Genus(format!("genus {genus} is below 2")));
    }
    let rose = standard_rose(genus)?;
    let gens = generators_unchecked(genus)?;
    let mut f = GraphSelfMap::identity(rose.clone());
    let mut cache: BTreeMap<(String, i8), GraphSelfMap> = BTreeMap::new();
    for letter in word.letters.iter().rev() {
        let name = letter.name();
        let key = (name.clone(), letter.exponent);
        if !cache.contains_key(&key) {
            let curve = gens
                .get(&name)
                .ok_or_else(|| Error::UnknownGenerator(name.clone()))?;
            cache.insert(key.clone(), dehn_twist(&rose, curve, letter.exponent)?);
        }
        f = compose(&cache[&key], &f)?;
    }
    f.check_invariants("compose_word")?;
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rose_sizes() {
        for g in 1..=3 {
            let r = standard_rose(g).unwrap();
            assert_eq!(r.edge_count(), 2 * g);
            assert_eq!(r.rho().len(), 4 * g);
            assert_eq!(r.genus().unwrap() as usize, g);
        }
        assert!(standard_rose(0).is_err());
    }

    #[test]
    fn genus_two_names() {
        let gens = standard_generators(2).unwrap();
        for name in ["a0", "a1", "c0", "d0", "d1"] {
            assert!(gens.contains_key(name), "{name}");
        }
        assert!(standard_generators(1).is_err());
    }

    #[test]
    fn genus_three_names() {
        let gens = standard_generators(3).unwrap();
        for name in ["c0", "c1", "c2", "d2"] {
            assert!(gens.contains_key(name), "{name}");
        }
    }

    #[test]
    fn twist_fixes_its_curve() {
        let rose = standard_rose(2).unwrap();
        for curve in standard_generators(2).unwrap().values() {
            for sign in [1, -1] {
                let f = dehn_twist(&rose, curve, sign).unwrap();
                let image =
                    tighten_cyclic(&f.apply(&EdgePath::new(curve.path().to_vec())).unwrap());
                assert!(
                    crate::graph::is_cyclic_rotation(curve.path(), &image),
                    "{:?}",
                    curve.name()
                );
            }
        }
    }

    #[test]
    fn torus_twist_is_a_transvection() {
        let rose = standard_rose(1).unwrap();
        let c = CurveOnGraph::new(&rose, vec![OrientedEdge::new(x_edge(0), true)], None).unwrap();
        let f = dehn_twist(&rose, &c, 1).unwrap();
        let y_image = f.edge_image(y_edge(0));
        assert_eq!(y_image.len(), 2);
        assert_eq!(y_image.crossings(x_edge(0)), 1);
        let h = f.homology_action();
        let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
        assert_eq!(det, 1);
        assert_eq!(h[0][0] + h[1][1], 2);
    }

    #[test]
    fn bad_curves_are_rejected() {
        let rose = standard_rose(2).unwrap();
        let x = OrientedEdge::new(x_edge(0), true);
        assert!(CurveOnGraph::new(&rose, vec![x, x.reverse()], None).is_err());
        assert!(CurveOnGraph::new(&rose, vec![x, x], None).is_err());
        assert!(CurveOnGraph::new(&rose, vec![], None).is_err());
    }

    #[test]
    fn empty_word_is_identity() {
        let f = compose_word(2, &TwistWord::default(), false).unwrap();
        assert_eq!(f, GraphSelfMap::identity(standard_rose(2).unwrap()));
    }

    #[test]
    fn low_genus_needs_permission() {
        assert!(compose_word(1, &TwistWord::default(), false).is_err());
        assert!(compose_word(1, &TwistWord::default(), true).is_ok());
    }
}
