//! Infinitesimal structure of a train track map and the singularity data
//! of the invariant foliations.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::bh::{gates, taken_turns, BhOutcome, GateStructure};
use crate::error::{Error, Result};
use crate::graph::{OrientedEdge, VertexId};
use crate::map::GraphSelfMap;

/// A half-integer, stored as twice its value. Singularity indices
/// `1 - k/2` and their sums live here.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HalfInteger {
    twice: i64,
}

impl HalfInteger {
    pub fn from_twice(twice: i64) -> Self {
        Self { twice }
    }

    pub fn from_integer(n: i64) -> Self {
        Self { twice: 2 * n }
    }

    /// Index `1 - k/2` of a `k`-pronged singularity.
    pub fn prong_index(k: usize) -> Self {
        Self {
            twice: 2 - k as i64,
        }
    }

    pub fn twice(self) -> i64 {
        self.twice
    }

    pub fn to_f64(self) -> f64 {
        self.twice as f64 / 2.0
    }
}

impl std::ops::Add for HalfInteger {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self {
            twice: self.twice + rhs.twice,
        }
    }
}

impl std::ops::Sub for HalfInteger {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self {
            twice: self.twice - rhs.twice,
        }
    }
}

impl std::iter::Sum for HalfInteger {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::from_twice(0), |a, b| a + b)
    }
}

impl fmt::Display for HalfInteger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.twice % 2 == 0 {
            write!(f, "{}", self.twice / 2)
        } else {
            write!(f, "{}/2", self.twice)
        }
    }
}

impl FromStr for HalfInteger {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("`{s}` is not a half-integer"));
        match s.split_once('/') {
            Some((num, "2")) => num.trim().parse().map(Self::from_twice).map_err(|_| bad()),
            Some(_) => Err(bad()),
            None => s.trim().parse().map(Self::from_integer).map_err(|_| bad()),
        }
    }
}

impl Serialize for HalfInteger {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for HalfInteger {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Two distinct gates at one vertex, joined in the train track. Gates are
/// indices into the [`GateStructure`], stored sorted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct InfinitesimalEdge {
    pub vertex: VertexId,
    pub gates: (usize, usize),
}

/// A cycle of `k >= 3` gates at one vertex, consecutive ones joined by
/// infinitesimal edges. The cycle starts at its smallest gate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InfinitesimalPolygon {
    pub label: usize,
    pub vertex: VertexId,
    pub cycle: Vec<usize>,
}

impl InfinitesimalPolygon {
    pub fn k(&self) -> usize {
        self.cycle.len()
    }

    pub fn index(&self) -> HalfInteger {
        HalfInteger::prong_index(self.k())
    }
}

/// Gates, infinitesimal edges and polygons of a train track map.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrainTrackStructure {
    pub gates: GateStructure,
    pub edges: BTreeSet<InfinitesimalEdge>,
    pub polygons: Vec<InfinitesimalPolygon>,
}

fn edge_between(gs: &GateStructure, a: usize, b: usize) -> Result<InfinitesimalEdge> {
    if a == b {
        return Err(Error::Analysis(format!("turn inside gate {a} is illegal")));
    }
    let vertex = gs.gates()[a].vertex;
    if gs.gates()[b].vertex != vertex {
        return Err(Error::Analysis(format!(
            "gates {a} and {b} sit at different vertices"
        )));
    }
    Ok(InfinitesimalEdge {
        vertex,
        gates: (a.min(b), a.max(b)),
    })
}

/// Gate pairs of the turns taken by edge images, closed under the gate map.
pub fn infinitesimal_edges(
    f: &GraphSelfMap,
    gs: &GateStructure,
) -> Result<BTreeSet<InfinitesimalEdge>> {
    let mut out = BTreeSet::new();
    let mut stack = Vec::new();
    for (turn, _, _) in taken_turns(f) {
        let e = edge_between(gs, gs.gate_of(turn.0), gs.gate_of(turn.1))?;
        if out.insert(e) {
            stack.push(e);
        }
    }
    while let Some(e) = stack.pop() {
        let image = edge_between(gs, gs.gate_image(e.gates.0), gs.gate_image(e.gates.1))?;
        if out.insert(image) {
            stack.push(image);
        }
    }
    Ok(out)
}

/// Simple cycles of length at least three in the per-vertex gate graphs,
/// labelled by (vertex, smallest gate).
pub fn polygons(
    gs: &GateStructure,
    edges: &BTreeSet<InfinitesimalEdge>,
) -> Result<Vec<InfinitesimalPolygon>> {
    let mut adjacency: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for e in edges {
        adjacency.entry(e.gates.0).or_default().push(e.gates.1);
        adjacency.entry(e.gates.1).or_default().push(e.gates.0);
    }
    if let Some((g, n)) = adjacency.iter().find(|(_, n)| n.len() > 2) {
        return Err(Error::Analysis(format!(
            "gate {g} meets {} infinitesimal edges",
            n.len()
        )));
    }
    let mut seen = BTreeSet::new();
    let mut cycles = Vec::new();
    // gates in increasing order, so each cycle starts at its smallest gate
    for &start in adjacency.keys() {
        if seen.contains(&start) {
            continue;
        }
        let mut component = vec![start];
        seen.insert(start);
        let (mut prev, mut cur) = (start, adjacency[&start][0]);
        let closed = loop {
            if cur == start {
                break true;
            }
            if !seen.insert(cur) {
                break false;
            }
            component.push(cur);
            let next = adjacency[&cur].iter().copied().find(|&n| n != prev);
            match next {
                Some(n) => (prev, cur) = (cur, n),
                None => break false,
            }
        };
        if !closed {
            // a path: mark the rest of it from the other side
            let mut stack = vec![start];
            while let Some(g) = stack.pop() {
                for &n in &adjacency[&g] {
                    if seen.insert(n) {
                        stack.push(n);
                    }
                }
            }
            continue;
        }
        if component.len() < 3 {
            return Err(Error::Analysis(format!(
                "gates {component:?} form a cycle of length {}",
                component.len()
            )));
        }
        cycles.push(component);
    }
    let mut polys: Vec<InfinitesimalPolygon> = cycles
        .into_iter()
        .map(|cycle| InfinitesimalPolygon {
            label: 0,
            vertex: gs.gates()[cycle[0]].vertex,
            cycle,
        })
        .collect();
    polys.sort_by_key(|p| (p.vertex, p.cycle[0]));
    for (i, p) in polys.iter_mut().enumerate() {
        p.label = i;
    }
    Ok(polys)
}

/// Builds the full infinitesimal structure of a train track map.
pub fn train_track_structure(f: &GraphSelfMap) -> Result<TrainTrackStructure> {
    let gs = gates(f)?;
    let edges = infinitesimal_edges(f, &gs)?;
    let polygons = polygons(&gs, &edges)?;
    Ok(TrainTrackStructure {
        gates: gs,
        edges,
        polygons,
    })
}

/// Cusp counts of the complementary regions of the train track.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Regions {
    /// Euler characteristic of the surface spanned by the ribbon graph of
    /// the track; it is `2 - 2g` iff every complementary region is a disk.
    pub euler_characteristic: i64,
    /// Cusps of the region containing the puncture.
    pub puncture_cusps: usize,
    /// Cusps of every other region, sorted.
    pub interior_cusps: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum HalfEdge {
    Strip(OrientedEdge),
    Chord(usize, bool),
}

/// Walks the faces of the ribbon graph whose nodes are gates and whose
/// edges are the graph edges (strips) and the infinitesimal edges
/// (chords), and counts cusps: corners between two strips or between two
/// chords. At a gate the strips come in rotation order, followed by the
/// chords by increasing distance of their other gate along the rotation.
pub fn complementary_regions(
    f: &GraphSelfMap,
    gs: &GateStructure,
    edges: &BTreeSet<InfinitesimalEdge>,
) -> Result<Regions> {
    let g = f.graph();
    let rs = g.rotation_system()?;
    let chords: Vec<InfinitesimalEdge> = edges.iter().copied().collect();
    let mut rotation: BTreeMap<usize, Vec<HalfEdge>> = BTreeMap::new();
    for v in g.vertices() {
        let mut order = rs.cyclic_order(v);
        // start at a change of gate so that no gate run wraps around
        if let Some(i) = (0..order.len()).find(|&i| {
            gs.gate_of(order[i]) != gs.gate_of(order[(i + order.len() - 1) % order.len()])
        }) {
            order.rotate_left(i);
        }
        let mut position: BTreeMap<usize, usize> = BTreeMap::new();
        for d in &order {
            let gate = gs.gate_of(*d);
            if position
                .get(&gate)
                .is_some_and(|&p| p + 1 != position.len())
            {
                return Err(Error::Analysis(format!(
                    "gate {gate} is not an interval of the rotation at {v}"
                )));
            }
            let next = position.len();
            position.entry(gate).or_insert(next);
            rotation.entry(gate).or_default().push(HalfEdge::Strip(*d));
        }
        let m = position.len();
        for (&gate, &p) in &position {
            let mut ends: Vec<(usize, HalfEdge)> = chords
                .iter()
                .enumerate()
                .filter_map(|(i, c)| match c.gates {
                    (a, b) if a == gate => {
                        Some(((position[&b] + m - p) % m, HalfEdge::Chord(i, false)))
                    }
                    (a, b) if b == gate => {
                        Some(((position[&a] + m - p) % m, HalfEdge::Chord(i, true)))
                    }
                    _ => None,
                })
                .collect();
            ends.sort();
            rotation
                .get_mut(&gate)
                .expect("gate has a strip")
                .extend(ends.into_iter().map(|(_, h)| h));
        }
    }
    let mut succ: BTreeMap<HalfEdge, HalfEdge> = BTreeMap::new();
    for hs in rotation.values() {
        for (i, &h) in hs.iter().enumerate() {
            succ.insert(h, hs[(i + 1) % hs.len()]);
        }
    }
    let partner = |h: HalfEdge| match h {
        HalfEdge::Strip(d) => HalfEdge::Strip(d.reverse()),
        HalfEdge::Chord(i, end) => HalfEdge::Chord(i, !end),
    };
    let same_kind = |a: HalfEdge, b: HalfEdge| {
        matches!(
            (a, b),
            (HalfEdge::Strip(_), HalfEdge::Strip(_)) | (HalfEdge::Chord(..), HalfEdge::Chord(..))
        )
    };
    let mut seen = BTreeSet::new();
    let mut faces: Vec<(bool, usize)> = Vec::new();
    for &start in succ.keys() {
        if seen.contains(&start) {
            continue;
        }
        let (mut h, mut has_strip, mut cusps) = (start, false, 0);
        while seen.insert(h) {
            has_strip |= matches!(h, HalfEdge::Strip(_));
            let arrived = partner(h);
            h = succ[&arrived];
            if same_kind(arrived, h) {
                cusps += 1;
            }
        }
        faces.push((has_strip, cusps));
    }
    let euler_characteristic =
        gs.gates().len() as i64 - (g.edge_count() + chords.len()) as i64 + faces.len() as i64;
    let outer: Vec<usize> = faces.iter().filter(|f| f.0).map(|f| f.1).collect();
    let filling = euler_characteristic == 2 - 2 * g.genus()? as i64;
    if filling && outer.len() != 1 {
        return Err(Error::Analysis(format!(
            "{} disk regions meet the graph edges",
            outer.len()
        )));
    }
    // meaningful only for a filling track
    let puncture_cusps = outer.iter().sum();
    let mut interior_cusps: Vec<usize> = faces.iter().filter(|f| !f.0).map(|f| f.1).collect();
    interior_cusps.sort();
    Ok(Regions {
        euler_characteristic,
        puncture_cusps,
        interior_cusps,
    })
}

impl Regions {
    /// Every complementary region is a disk or a once-punctured disk.
    pub fn fills(&self, genus: u32) -> bool {
        self.euler_characteristic == 2 - 2 * genus as i64
    }
}

/// `(2 - 2g) - Σ (1 - k_i/2)`.
pub fn puncture_index(genus: u32, polys: &[InfinitesimalPolygon]) -> HalfInteger {
    HalfInteger::from_integer(2 - 2 * genus as i64)
        - polys.iter().map(InfinitesimalPolygon::index).sum()
}

/// `perm[i] = j` when the gate map carries polygon `i` onto polygon `j`.
pub fn orbit_permutation(
    f: &GraphSelfMap,
    gs: &GateStructure,
    polys: &[InfinitesimalPolygon],
) -> Result<Vec<usize>> {
    let by_gates: BTreeMap<BTreeSet<usize>, usize> = polys
        .iter()
        .map(|p| (p.cycle.iter().copied().collect(), p.label))
        .collect();
    let mut perm = Vec::with_capacity(polys.len());
    for p in polys {
        let image: BTreeSet<usize> = p.cycle.iter().map(|&g| gs.gate_image(g)).collect();
        let target = by_gates.get(&image).copied().ok_or_else(|| {
            Error::Analysis(format!("image of polygon {} is not a polygon", p.label))
        })?;
        if polys[target].k() != p.k() || polys[target].vertex != f.vertex_image(p.vertex) {
            return Err(Error::Analysis(format!(
                "polygon {} maps onto a polygon of another shape",
                p.label
            )));
        }
        perm.push(target);
    }
    let distinct: BTreeSet<usize> = perm.iter().copied().collect();
    if distinct.len() != perm.len() {
        return Err(Error::Analysis("polygon map is not a bijection".into()));
    }
    Ok(perm)
}

/// Cycles of a permutation, each starting at its smallest element.
pub fn cycles(perm: &[usize]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; perm.len()];
    let mut out = Vec::new();
    for i in 0..perm.len() {
        if seen[i] {
            continue;
        }
        let mut c = Vec::new();
        let mut j = i;
        while !seen[j] {
            seen[j] = true;
            c.push(j);
            j = perm[j];
        }
        out.push(c);
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    PseudoAnosov,
    Reducible,
    GrowthOne,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::PseudoAnosov => "PseudoAnosov",
            Verdict::Reducible => "Reducible",
            Verdict::GrowthOne => "GrowthOne",
        })
    }
}

/// One singularity in the interior of the surface.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolygonReport {
    pub label: usize,
    pub k: usize,
    pub index: HalfInteger,
    /// Smallest label in the orbit of this polygon.
    pub orbit: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingularityReport {
    pub verdict: Verdict,
    pub genus: u32,
    /// Growth rate; absent for reducible classes.
    pub lambda: Option<f64>,
    pub polygons: Vec<PolygonReport>,
    /// Present in the pseudo-Anosov case.
    pub puncture_index: Option<HalfInteger>,
    pub orbit_permutation: Vec<usize>,
}

/// Verdict and singularity data for the outcome of the train track
/// algorithm.
pub fn full_report(outcome: &BhOutcome, genus: u32, tol: f64) -> Result<SingularityReport> {
    let empty = |verdict, lambda| SingularityReport {
        verdict,
        genus,
        lambda,
        polygons: Vec::new(),
        puncture_index: None,
        orbit_permutation: Vec::new(),
    };
    let (map, lambda) = match outcome {
        BhOutcome::GrowthOne { .. } | BhOutcome::Periodic { .. } => {
            return Ok(empty(Verdict::GrowthOne, Some(1.0)))
        }
        BhOutcome::Reducible { .. } => return Ok(empty(Verdict::Reducible, None)),
        BhOutcome::TrainTrack { map, lambda } => (map, *lambda),
    };
    let m = map.transition_matrix();
    if lambda.is_nan() || lambda <= 1.0 + tol || !m.is_irreducible() {
        return Ok(empty(Verdict::Reducible, None));
    }
    let tt = train_track_structure(map)?;
    let regions = complementary_regions(map, &tt.gates, &tt.edges)?;
    if !regions.fills(genus) {
        // a region that is not a disk contains an invariant essential curve
        return Ok(empty(Verdict::Reducible, None));
    }
    let perm = orbit_permutation(map, &tt.gates, &tt.polygons)?;
    let mut orbit = vec![0; perm.len()];
    for c in cycles(&perm) {
        let rep = *c.iter().min().expect("cycles are nonempty");
        for i in c {
            orbit[i] = rep;
        }
    }
    let polygons = tt
        .polygons
        .iter()
        .map(|p| PolygonReport {
            label: p.label,
            k: p.k(),
            index: p.index(),
            orbit: orbit[p.label],
        })
        .collect();
    let puncture = puncture_index(genus, &tt.polygons);
    // the cusps of the complementary regions give the same indices independently
    let mut ks: Vec<usize> = tt.polygons.iter().map(InfinitesimalPolygon::k).collect();
    ks.sort();
    if regions.interior_cusps != ks {
        return Err(Error::Analysis(format!(
            "interior regions have {:?} cusps, polygons {ks:?}",
            regions.interior_cusps
        )));
    }
    let from_cusps = HalfInteger::prong_index(regions.puncture_cusps);
    let total: HalfInteger = from_cusps + tt.polygons.iter().map(InfinitesimalPolygon::index).sum();
    if total != HalfInteger::from_integer(2 - 2 * genus as i64) {
        return Err(Error::Analysis(format!(
            "indices sum to {total}, not {}",
            2 - 2 * genus as i64
        )));
    }
    Ok(SingularityReport {
        verdict: Verdict::PseudoAnosov,
        genus,
        lambda: Some(lambda),
        polygons,
        puncture_index: Some(puncture),
        orbit_permutation: perm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{EdgeId, EdgePath, OrientedEdge};
    use crate::twist::standard_rose;

    fn fibonacci() -> GraphSelfMap {
        let mut f = GraphSelfMap::identity(standard_rose(1).unwrap());
        f.edge_image
            .insert(EdgeId(0), EdgePath::new(vec![OrientedEdge::fwd(1)]));
        f.edge_image.insert(
            EdgeId(1),
            EdgePath::new(vec![OrientedEdge::fwd(1), OrientedEdge::fwd(0)]),
        );
        f
    }

    #[test]
    fn half_integers() {
        assert_eq!(HalfInteger::prong_index(3).to_string(), "-1/2");
        assert_eq!(HalfInteger::prong_index(6).to_string(), "-2");
        assert_eq!(HalfInteger::prong_index(2).to_string(), "0");
        for s in ["-1/2", "3", "0", "-7/2"] {
            assert_eq!(s.parse::<HalfInteger>().unwrap().to_string(), s);
        }
        assert!("1/3".parse::<HalfInteger>().is_err());
    }

    #[test]
    fn identity_has_no_structure() {
        let f = GraphSelfMap::identity(standard_rose(2).unwrap());
        let tt = train_track_structure(&f).unwrap();
        assert!(tt.edges.is_empty());
        assert!(tt.polygons.is_empty());
        assert!(orbit_permutation(&f, &tt.gates, &tt.polygons)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn fibonacci_structure_is_a_path() {
        // the only taken turn {Y, x} and its image {X, y} both end at the gate {x, y}
        let f = fibonacci();
        let tt = train_track_structure(&f).unwrap();
        assert_eq!(tt.gates.gates().len(), 3);
        assert_eq!(tt.edges.len(), 2);
        let centre = tt.gates.gate_of(OrientedEdge::fwd(0));
        assert!(tt
            .edges
            .iter()
            .all(|e| e.gates.0 == centre || e.gates.1 == centre));
        assert!(tt.polygons.is_empty());
    }

    #[test]
    fn infinitesimal_edges_are_closed_under_the_gate_map() {
        let f = fibonacci();
        let gs = gates(&f).unwrap();
        let edges = infinitesimal_edges(&f, &gs).unwrap();
        for e in &edges {
            let image =
                edge_between(&gs, gs.gate_image(e.gates.0), gs.gate_image(e.gates.1)).unwrap();
            assert!(edges.contains(&image));
        }
    }

    #[test]
    fn puncture_index_of_an_anosov_torus() {
        assert_eq!(puncture_index(1, &[]), HalfInteger::from_integer(0));
        assert_eq!(puncture_index(2, &[]), HalfInteger::from_integer(-2));
    }

    #[test]
    fn cycles_of_a_permutation() {
        assert_eq!(cycles(&[1, 0, 3, 2]), vec![vec![0, 1], vec![2, 3]]);
        assert_eq!(cycles(&[0]), vec![vec![0]]);
    }
}
