//! The train track algorithm: simplify, measure growth, look for an
//! invariant subgraph, and otherwise fold an illegal turn, until the map is
//! a train track map, is seen to be reducible, or has growth one.

pub mod gates;
pub mod moves;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{EdgeId, OrientedEdge};
use crate::map::GraphSelfMap;

pub use gates::{gates, is_train_track, taken_turns, Gate, GateStructure, Turn};
pub use moves::{
    collapse_invariant_forest, fold, pull_tight, remove_valence_one, remove_valence_two, subdivide,
};

/// Fold rounds without a drop in growth after which the input is tested
/// for periodicity.
pub const STALL_ROUNDS: usize = 64;

/// Default cap on fold rounds.
pub const DEFAULT_MAX_ROUNDS: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BhConfig {
    pub max_rounds: usize,
    /// Tolerance for growth-rate computations.
    pub tol: f64,
    /// Re-check the embedding invariants after every move.
    pub check_invariants: bool,
    /// Keep a copy of the map after every move in [`BhRun::maps`].
    pub keep_maps: bool,
}

impl Default for BhConfig {
    fn default() -> Self {
        Self {
            max_rounds: DEFAULT_MAX_ROUNDS,
            tol: 1e-12,
            check_invariants: true,
            keep_maps: false,
        }
    }
}

/// One entry of the move trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MoveRecord {
    pub name: String,
    pub edges: Vec<EdgeId>,
    pub lambda: f64,
}

impl fmt::Display for MoveRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name)?;
        for e in &self.edges {
            write!(f, " {e}")?;
        }
        write!(f, " lambda={:.9}", self.lambda)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum BhOutcome {
    TrainTrack {
        map: GraphSelfMap,
        lambda: f64,
    },
    /// `invariant_subgraph` is a proper invariant subgraph that is not a forest.
    Reducible {
        map: GraphSelfMap,
        invariant_subgraph: Vec<EdgeId>,
    },
    GrowthOne {
        map: GraphSelfMap,
    },
    /// Folding stalled and `period` is the least power of the class that
    /// is inner; `map` is the last map reached.
    Periodic {
        map: GraphSelfMap,
        period: usize,
    },
}

impl BhOutcome {
    pub fn map(&self) -> &GraphSelfMap {
        match self {
            BhOutcome::TrainTrack { map, .. }
            | BhOutcome::Reducible { map, .. }
            | BhOutcome::Periodic { map, .. }
            | BhOutcome::GrowthOne { map } => map,
        }
    }
}

/// Outcome plus the list of moves that led to it.
#[derive(Clone, Debug, PartialEq)]
pub struct BhRun {
    pub outcome: BhOutcome,
    pub moves: Vec<MoveRecord>,
    /// `maps[i]` is the map after `moves[i]`; empty unless requested.
    pub maps: Vec<GraphSelfMap>,
}

struct Runner {
    config: BhConfig,
    genus: u32,
    moves: Vec<MoveRecord>,
    maps: Vec<GraphSelfMap>,
}

impl Runner {
    fn record(&mut self, name: &str, edges: Vec<EdgeId>, f: &GraphSelfMap) -> Result<()> {
        if self.config.check_invariants {
            f.check_invariants(name)?;
            let g = f.graph().genus()?;
            if g != self.genus {
                return Err(Error::InvariantViolation {
                    step: name.to_string(),
                    detail: format!("genus changed from {} to {g}", self.genus),
                });
            }
        }
        let lambda = f.transition_matrix().spectral_radius(self.config.tol)?;
        self.moves.push(MoveRecord {
            name: name.to_string(),
            edges,
            lambda,
        });
        if self.config.keep_maps {
            self.maps.push(f.clone());
        }
        Ok(())
    }

    /// Tightening, forest collapse and low-valence removal until none applies.
    fn simplify(&mut self, mut f: GraphSelfMap) -> Result<GraphSelfMap> {
        loop {
            if !f.is_tight() {
                f = pull_tight(&f);
                self.record("pull_tight", Vec::new(), &f)?;
                continue;
            }
            if let Some(v) = moves::vertex_with_one_direction_image(&f) {
                f = moves::slide_vertex(&f, v)?;
                self.record("vertex_slide", Vec::new(), &f)?;
                continue;
            }
            if let Some(forest) = moves::invariant_forest(&f) {
                f = moves::collapse_forest(&f, &forest)?;
                self.record("collapse", forest.into_iter().collect(), &f)?;
                continue;
            }
            if let Some(e) = f.graph().edges().find(|&e| f.edge_image(e).is_empty()) {
                return Err(Error::InvalidMove(format!("loop {e} has a trivial image")));
            }
            if let Some(v) = moves::vertex_of_valence(&f, 1) {
                let d = f.graph().directions_at(v)[0];
                f = remove_valence_one(&f)?;
                self.record("valence1", vec![d.edge], &f)?;
                continue;
            }
            let before: BTreeSet<EdgeId> = f.graph().edges().collect();
            let next = remove_valence_two(&f, self.config.tol)?;
            if next != f {
                let removed: Vec<EdgeId> = before
                    .into_iter()
                    .filter(|e| !next.graph().has_edge(*e))
                    .collect();
                f = next;
                self.record("valence2", removed, &f)?;
                continue;
            }
            return Ok(f);
        }
    }

    /// Subdivides the edge of `d` so that the edge leaving through `d` has
    /// image of length `len`. Returns the (possibly renamed) direction and
    /// the id of the other half, if a split happened.
    fn isolate_prefix(
        &mut self,
        f: &mut GraphSelfMap,
        d: OrientedEdge,
        len: usize,
    ) -> Result<(OrientedEdge, Option<EdgeId>)> {
        let total = f.edge_image(d.edge).len();
        if len >= total {
            return Ok((d, None));
        }
        let k = if d.forward { len } else { total - len };
        let (next, fresh, _) = subdivide(f, d.edge, k)?;
        *f = next;
        self.record("subdivide", vec![d.edge, fresh], f)?;
        let renamed = if d.forward {
            d
        } else {
            OrientedEdge::new(fresh, false)
        };
        Ok((renamed, Some(fresh)))
    }

    /// Folds the maximal common initial segment of two adjacent directions.
    fn fold_pair(
        &mut self,
        mut f: GraphSelfMap,
        a: OrientedEdge,
        b: OrientedEdge,
    ) -> Result<GraphSelfMap> {
        let len = moves::common_prefix(&f.image_of(a), &f.image_of(b));
        if len == 0 {
            return Err(Error::InvalidMove(format!(
                "{a} and {b} have different derivatives"
            )));
        }
        let (a, fresh) = self.isolate_prefix(&mut f, a, len)?;
        // the second half of a's edge carries b when both ends belong to one edge
        let b = match fresh {
            Some(fresh) if b.edge == a.edge && !b.forward && a.forward => {
                OrientedEdge::new(fresh, false)
            }
            _ => b,
        };
        let len = moves::common_prefix(&f.image_of(a), &f.image_of(b));
        let (b, _) = self.isolate_prefix(&mut f, b, len)?;
        let keep = a.min(b);
        let merge = a.max(b);
        let folded = fold(&f, keep, merge)?;
        self.record("fold", vec![keep.edge, merge.edge], &folded)?;
        Ok(folded)
    }

    /// One fold round on a map that is not a train track map.
    ///
    /// Each illegal taken turn is pushed forward by the derivative to the
    /// last pair of distinct directions; its depth is the number of pushes.
    /// Turns are tried by increasing depth, then lowest edge and earliest
    /// position, and the first whose last pair spans a uniform rotation arc
    /// is folded. Folding the last pair lowers the depth of its turn by one,
    /// so the minimal depth drops every round until a fold cancels.
    fn fold_round(&mut self, f: GraphSelfMap, gs: &GateStructure) -> Result<GraphSelfMap> {
        let rs = f.graph().rotation_system()?;
        let mut tried = BTreeSet::new();
        let mut candidates = Vec::new();
        for (turn, _, _) in gates::taken_turns(&f) {
            if !gs.is_illegal(turn) || turn.is_degenerate() || !tried.insert(turn) {
                continue;
            }
            let (mut a, mut b) = (turn.0, turn.1);
            let mut depth = 0;
            while gs.derivative(a) != gs.derivative(b) {
                a = gs.derivative(a);
                b = gs.derivative(b);
                depth += 1;
            }
            candidates.push((depth, a, b));
        }
        // stable: ties keep edge and position order
        candidates.sort_by_key(|c| c.0);
        for (_, a, b) in candidates {
            if let Some((x, y)) = uniform_arc(&rs, gs, a, b) {
                return self.fold_pair(f, x, y);
            }
        }
        Err(Error::InvalidMove(
            "no illegal turn can be folded inside the surface".into(),
        ))
    }
}

/// Two adjacent directions with equal derivative, taken from an arc of
/// the rotation between `a` and `b` on which the derivative is constant.
fn uniform_arc(
    rs: &crate::graph::RotationSystem,
    gs: &GateStructure,
    a: OrientedEdge,
    b: OrientedEdge,
) -> Option<(OrientedEdge, OrientedEdge)> {
    let target = gs.derivative(a);
    for (from, to) in [(a, b), (b, a)] {
        let mut cur = rs.successor(from);
        while cur != to && gs.derivative(cur) == target {
            cur = rs.successor(cur);
        }
        if cur == to {
            return Some((from, rs.successor(from)));
        }
    }
    None
}

/// Total image length beyond which powers are no longer followed.
const POWER_LENGTH_CAP: usize = 100_000;

/// Least `n <= max_order` such that `f^n` is homotopic to the identity, for
/// a map on a one-vertex graph. `None` if there is none, if the graph has
/// several vertices, or if the powers grow past a length cap.
pub fn periodic_order(f: &GraphSelfMap, max_order: usize) -> Result<Option<usize>> {
    if f.graph().vertex_count() != 1 {
        return Ok(None);
    }
    let f = pull_tight(f);
    let mut power = f.clone();
    for n in 1..=max_order {
        if is_inner(&power) {
            return Ok(Some(n));
        }
        power = pull_tight(&crate::map::compose(&f, &power)?);
        if power.edge_images().values().map(|p| p.len()).sum::<usize>() > POWER_LENGTH_CAP {
            return Ok(None);
        }
    }
    Ok(None)
}

/// Whether every loop `e` of a one-vertex graph maps to `w e w̄` for one
/// common path `w`.
///
/// A tight conjugate of the first loop `e0` reads `u e0 ū`, so `w` is
/// `u e0^k`; `|k|` is at most the length of any other image.
fn is_inner(f: &GraphSelfMap) -> bool {
    let edges: Vec<EdgeId> = f.graph().edges().collect();
    let Some(&e0) = edges.first() else {
        return true;
    };
    let img = f.edge_image(e0).steps();
    let h = img.len() / 2;
    if img.len().is_multiple_of(2) || img[h] != OrientedEdge::new(e0, true) {
        return false;
    }
    let u = crate::graph::EdgePath::new(img[..h].to_vec());
    let bound = edges
        .iter()
        .map(|&e| f.edge_image(e).len())
        .max()
        .unwrap_or(0) as i64;
    (-bound..=bound).any(|k| {
        let step = OrientedEdge::new(e0, k > 0);
        let mut w = u.clone();
        for _ in 0..k.abs() {
            w.push(step);
        }
        edges.iter().all(|&e| {
            let conj = w.reversed().concat(f.edge_image(e)).concat(&w);
            crate::graph::tighten(&conj).steps() == [OrientedEdge::new(e, true)]
        })
    })
}

/// Runs the algorithm on a boundary-preserving graph map.
pub fn bestvina_handel(f: &GraphSelfMap, config: BhConfig) -> Result<BhRun> {
    f.check_invariants("input")?;
    let mut runner = Runner {
        config,
        genus: f.graph().genus()?,
        moves: Vec::new(),
        maps: Vec::new(),
    };
    runner.record("start", Vec::new(), f)?;
    let mut f = f.clone();
    let input = f.clone();
    let (mut best, mut stalled, mut period_checked) = (f64::INFINITY, 0, false);
    for _ in 0..config.max_rounds {
        f = runner.simplify(f)?;
        let lambda = runner.moves.last().expect("start is recorded").lambda;
        if lambda < best - config.tol.max(1e-9) {
            best = lambda;
            stalled = 0;
        } else {
            stalled += 1;
        }
        if stalled > STALL_ROUNDS && !period_checked {
            period_checked = true;
            let genus = runner.genus as usize;
            if let Some(period) = periodic_order(&input, 4 * genus + 2)? {
                return Ok(BhRun {
                    outcome: BhOutcome::Periodic { map: f, period },
                    moves: runner.moves,
                    maps: runner.maps,
                });
            }
        }
        let m = f.transition_matrix();
        if m.has_growth_one() {
            return Ok(BhRun {
                outcome: BhOutcome::GrowthOne { map: f },
                moves: runner.moves,
                maps: runner.maps,
            });
        }
        if !m.is_irreducible() {
            let n = m.dim();
            let witness = (0..n)
                .map(|j| m.reachable_from(j))
                .filter(|r| r.len() < n)
                .min_by_key(|r| (r.len(), r.iter().next().copied()))
                .expect("a reducible matrix has a proper invariant set");
            let edges = m.edges();
            let invariant_subgraph = witness.into_iter().map(|i| edges[i]).collect();
            return Ok(BhRun {
                outcome: BhOutcome::Reducible {
                    map: f,
                    invariant_subgraph,
                },
                moves: runner.moves,
                maps: runner.maps,
            });
        }
        let gs = gates(&f)?;
        if gates::first_illegal_turn(&f, &gs).is_none() {
            let lambda = m.spectral_radius(config.tol)?;
            return Ok(BhRun {
                outcome: BhOutcome::TrainTrack { map: f, lambda },
                moves: runner.moves,
                maps: runner.maps,
            });
        }
        f = runner.fold_round(f, &gs)?;
    }
    let tail: Vec<String> = runner
        .moves
        .iter()
        .rev()
        .take(5)
        .map(ToString::to_string)
        .collect();
    Err(Error::IterationCap {
        cap: config.max_rounds,
        trace: tail.join("; "),
    })
}
