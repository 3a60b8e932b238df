//! Periodicity detection, checked against the order of the action on
//! homology.

mod common;

use common::*;
use traintrack::analysis::Verdict;
use traintrack::bh::{periodic_order, BhOutcome};
use traintrack::map::GraphSelfMap;
use traintrack::twist::{compose_word, standard_rose};

fn mat_mul(a: &[Vec<i64>], b: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let n = a.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (0..n).map(|k| a[i][k] * b[k][j]).sum())
                .collect()
        })
        .collect()
}

/// Least `n <= cap` with `H^n = I`.
fn homology_order(h: &[Vec<i64>], cap: usize) -> Option<usize> {
    let n = h.len();
    let id: Vec<Vec<i64>> = (0..n)
        .map(|i| (0..n).map(|j| i64::from(i == j)).collect())
        .collect();
    let mut p = h.to_vec();
    for k in 1..=cap {
        if p == id {
            return Some(k);
        }
        p = mat_mul(&p, h);
    }
    None
}

#[test]
fn identity_has_period_one() {
    let f = GraphSelfMap::identity(standard_rose(2).unwrap());
    assert_eq!(periodic_order(&f, 10).unwrap(), Some(1));
}

#[test]
fn chain_products_match_their_homology_order() {
    // a 4-chain and a 5-chain on the genus two surface
    for (w, order) in [
        ("a0 d0 c0 d1", 10),
        ("a0 d0 c0 d1 a1", 6),
        ("-d1 -d0 -a0 -c0 -a1", 6),
    ] {
        let f = compose_word(2, &word(w), false).unwrap();
        assert_eq!(homology_order(&f.homology_action(), 10), Some(order), "{w}");
        assert_eq!(periodic_order(&f, 10).unwrap(), Some(order), "{w}");
    }
}

#[test]
fn pseudo_anosov_classes_are_not_periodic() {
    for (genus, w, _) in PA_EXAMPLES {
        let f = compose_word(genus, &word(w), false).unwrap();
        assert_eq!(periodic_order(&f, 4 * genus + 2).unwrap(), None, "{w}");
    }
}

#[test]
fn a_stalled_fold_sequence_ends_as_periodic() {
    // folding cycles through maps of growth sqrt(golden ratio) on this class
    let (run, r) = analyse(2, &word("-d1 -d0 -a0 -c0 -a1"), false);
    assert!(matches!(run.outcome, BhOutcome::Periodic { period: 6, .. }));
    assert_eq!(r.verdict, Verdict::GrowthOne);
}

/// Every ordering of the twists along a chain is conjugate to one of
/// finite order, so no ordering may exhaust the fold cap.
#[test]
fn every_ordering_of_a_chain_terminates() {
    fn permutations(items: &[&str]) -> Vec<Vec<String>> {
        if items.len() <= 1 {
            return vec![items.iter().map(|s| s.to_string()).collect()];
        }
        let mut out = Vec::new();
        for i in 0..items.len() {
            let mut rest = items.to_vec();
            let head = rest.remove(i);
            for mut p in permutations(&rest) {
                p.insert(0, head.to_string());
                out.push(p);
            }
        }
        out
    }
    for (genus, chain) in [
        (2, vec!["a0", "d0", "c0", "d1"]),
        (2, vec!["a0", "d0", "c0", "d1", "a1"]),
    ] {
        for p in permutations(&chain) {
            for sign in ["", "-"] {
                let w: Vec<String> = p.iter().map(|l| format!("{sign}{l}")).collect();
                let (_, r) = analyse(genus, &word(&w.join(" ")), false);
                assert_eq!(r.verdict, Verdict::GrowthOne, "{}", w.join(" "));
            }
        }
    }
}
