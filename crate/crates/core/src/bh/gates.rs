//! Directions, turns and gates.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{OrientedEdge, VertexId};
use crate::map::GraphSelfMap;

/// Unordered pair of directions at a common vertex, stored sorted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Turn(pub OrientedEdge, pub OrientedEdge);

impl Turn {
    pub fn new(a: OrientedEdge, b: OrientedEdge) -> Self {
        if a <= b {
            Turn(a, b)
        } else {
            Turn(b, a)
        }
    }

    pub fn is_degenerate(&self) -> bool {
        self.0 == self.1
    }
}

/// A class of directions at one vertex that some iterate of the
/// derivative map identifies.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gate {
    pub vertex: VertexId,
    pub directions: Vec<OrientedEdge>,
}

/// The gate partition of all directions of a map.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GateStructure {
    gates: Vec<Gate>,
    gate_of: BTreeMap<OrientedEdge, usize>,
    derivative: BTreeMap<OrientedEdge, OrientedEdge>,
}

impl GateStructure {
    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn gate_of(&self, d: OrientedEdge) -> usize {
        self.gate_of[&d]
    }

    pub fn same_gate(&self, a: OrientedEdge, b: OrientedEdge) -> bool {
        self.gate_of[&a] == self.gate_of[&b]
    }

    pub fn derivative(&self, d: OrientedEdge) -> OrientedEdge {
        self.derivative[&d]
    }

    /// Gate containing the derivative image of any direction of `gate`.
    pub fn gate_image(&self, gate: usize) -> usize {
        self.gate_of[&self.derivative[&self.gates[gate].directions[0]]]
    }

    pub fn is_illegal(&self, t: Turn) -> bool {
        self.same_gate(t.0, t.1)
    }

    pub fn gates_at(&self, v: VertexId) -> Vec<usize> {
        (0..self.gates.len())
            .filter(|&i| self.gates[i].vertex == v)
            .collect()
    }
}

/// Derivative map `Df` on directions. Fails on an empty edge image.
pub fn derivative_map(f: &GraphSelfMap) -> Result<BTreeMap<OrientedEdge, OrientedEdge>> {
    f.graph()
        .directions()
        .into_iter()
        .map(|d| {
            f.derivative(d)
                .map(|img| (d, img))
                .ok_or_else(|| Error::InvalidMap(format!("edge {} has a trivial image", d.edge)))
        })
        .collect()
}

/// Gates as fibres of a high power of the derivative map.
///
/// Two directions end up identified within `N^2` steps if ever
/// (`N` = number of directions): before they meet, the pairs of iterates
/// are pairwise distinct. The power is computed by repeated squaring.
pub fn gates(f: &GraphSelfMap) -> Result<GateStructure> {
    let derivative = derivative_map(f)?;
    let dirs: Vec<OrientedEdge> = derivative.keys().copied().collect();
    let idx: BTreeMap<OrientedEdge, usize> =
        dirs.iter().enumerate().map(|(i, &d)| (d, i)).collect();
    let n = dirs.len();
    let step: Vec<usize> = dirs.iter().map(|d| idx[&derivative[d]]).collect();
    let target = (n * n).max(1);
    let mut power: Vec<usize> = (0..n).collect();
    let mut base = step;
    let mut k = target;
    while k > 0 {
        if k & 1 == 1 {
            power = power.iter().map(|&i| base[i]).collect();
        }
        base = base.iter().map(|&i| base[i]).collect();
        k >>= 1;
    }
    let g = f.graph();
    let mut classes: BTreeMap<(VertexId, usize), Vec<OrientedEdge>> = BTreeMap::new();
    for (i, &d) in dirs.iter().enumerate() {
        classes.entry((g.origin(d), power[i])).or_default().push(d);
    }
    let mut gates: Vec<Gate> = classes
        .into_iter()
        .map(|((vertex, _), directions)| Gate { vertex, directions })
        .collect();
    gates.sort_by(|a, b| (a.vertex, a.directions[0]).cmp(&(b.vertex, b.directions[0])));
    let gate_of = gates
        .iter()
        .enumerate()
        .flat_map(|(i, gate)| gate.directions.iter().map(move |&d| (d, i)))
        .collect();
    Ok(GateStructure {
        gates,
        gate_of,
        derivative,
    })
}

/// Turns taken by edge images, with the edge and the position of the
/// junction (between steps `k` and `k + 1`), in edge-id order.
pub fn taken_turns(f: &GraphSelfMap) -> Vec<(Turn, crate::graph::EdgeId, usize)> {
    let mut out = Vec::new();
    for (&e, p) in f.edge_images() {
        for (k, w) in p.windows(2).enumerate() {
            out.push((Turn::new(w[0].reverse(), w[1]), e, k));
        }
    }
    out
}

/// First illegal taken turn: lowest edge id, earliest position.
pub fn first_illegal_turn(
    f: &GraphSelfMap,
    gs: &GateStructure,
) -> Option<(Turn, crate::graph::EdgeId, usize)> {
    taken_turns(f)
        .into_iter()
        .find(|(t, _, _)| gs.is_illegal(*t))
}

/// True iff no edge image takes an illegal turn.
pub fn is_train_track(f: &GraphSelfMap) -> Result<bool> {
    if !f.is_tight() {
        return Ok(false);
    }
    let gs = gates(f)?;
    Ok(first_illegal_turn(f, &gs).is_none())
}
