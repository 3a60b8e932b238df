//! The worked examples, checked end to end.

mod common;

use common::*;
use traintrack::analysis::{cycles, Verdict};
use traintrack::bh::BhOutcome;

fn lambda_oracle(outcome: &BhOutcome) -> f64 {
    spectral_radius_oracle(outcome.map().transition_matrix().rows())
}

#[test]
fn growth_rates_match_the_characteristic_polynomial() {
    for (genus, w, growth) in PA_EXAMPLES {
        let (run, r) = analyse(genus, &word(w), false);
        assert_eq!(r.verdict, Verdict::PseudoAnosov, "{w}");
        let lambda = r.lambda.unwrap();
        assert!((lambda - growth).abs() < 1e-5, "{w}: {lambda}");
        assert!((lambda - lambda_oracle(&run.outcome)).abs() < 1e-9, "{w}");
    }
}

#[test]
fn first_example_has_only_the_puncture() {
    let (_, r) = analyse(2, &word("a1 c0 d0 a1 d1 a1"), false);
    assert!(r.polygons.is_empty());
    assert_eq!(r.puncture_index.unwrap().to_string(), "-2");
}

#[test]
fn third_example_has_two_pairs_of_triangles() {
    let (_, r) = analyse(2, &word("a0 -c0 d0 -d1"), false);
    assert_eq!(
        r.polygons.iter().map(|p| p.k).collect::<Vec<_>>(),
        [3, 3, 3, 3]
    );
    assert!(r.polygons.iter().all(|p| p.index.to_string() == "-1/2"));
    let mut lens: Vec<usize> = cycles(&r.orbit_permutation).iter().map(Vec::len).collect();
    lens.sort();
    assert_eq!(lens, [2, 2]);
    assert_eq!(r.puncture_index.unwrap().to_string(), "0");
}

#[test]
fn fourth_example_exchanges_two_hexagons() {
    let (_, r) = analyse(3, &word("d0 c0 d1 c1 d2 -c2"), false);
    assert_eq!(r.polygons.iter().map(|p| p.k).collect::<Vec<_>>(), [6, 6]);
    assert_eq!(r.orbit_permutation, [1, 0]);
    assert_eq!(r.puncture_index.unwrap().to_string(), "0");
    let total: i64 =
        r.polygons.iter().map(|p| p.index.twice()).sum::<i64>() + r.puncture_index.unwrap().twice();
    assert_eq!(total, -8);
}

/// Positive twists on the disjoint curves `d0, d1` and negative ones on the
/// disjoint `c0, a1`. The four curves form a chain with three crossings, so
/// their union cuts the closed surface into `2 - 2g - (3 - 6) = 1` disk, a
/// 12-gon, which carries the only singularity: a 6-prong at the puncture.
#[test]
fn second_example_singularity_sits_at_the_puncture() {
    let w = word("-a1 d1 -c0 d0");
    let (_, r) = analyse(2, &w, false);
    assert!(r.polygons.is_empty());
    assert_eq!(r.puncture_index.unwrap().to_string(), "-2");
    let data = singularity_data(&r);
    for k in 0..w.letters.len() {
        for v in [w.rotated(k), w.rotated(k).inverse()] {
            let (_, s) = analyse(2, &v, false);
            assert_eq!(singularity_data(&s), data, "{v}");
        }
    }
}

#[test]
fn fifth_example_is_reducible() {
    let (genus, w) = REDUCIBLE_EXAMPLE;
    let (run, r) = analyse(genus, &word(w), false);
    assert_eq!(r.verdict, Verdict::Reducible);
    assert!(r.lambda.is_none() && r.puncture_index.is_none());
    assert!(matches!(run.outcome, BhOutcome::Reducible { .. }));
}

#[test]
fn singularity_data_is_a_conjugacy_invariant() {
    for (genus, w, _) in PA_EXAMPLES {
        let w = word(w);
        let (_, r) = analyse(genus, &w, false);
        for k in 1..w.letters.len() {
            let (_, s) = analyse(genus, &w.rotated(k), false);
            assert_eq!(
                singularity_data(&s),
                singularity_data(&r),
                "{w} rotated by {k}"
            );
            assert!((s.lambda.unwrap() - r.lambda.unwrap()).abs() < 1e-6);
        }
    }
}

#[test]
fn train_track_images_do_not_cancel_under_iteration() {
    for (genus, w, _) in PA_EXAMPLES {
        let (run, _) = analyse(genus, &word(w), false);
        let f = run.outcome.map();
        for e in f.graph().edges() {
            let mut p = f.edge_image(e).steps().to_vec();
            for _ in 0..3 {
                p = apply_naive(f, &p);
                assert_eq!(tighten_naive(&p).len(), p.len(), "{w}: edge {e}");
            }
        }
    }
}
