//! Independent reference computations for the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::rngs::StdRng;
use rand::Rng;
use traintrack::analysis::{full_report, SingularityReport};
use traintrack::bh::{bestvina_handel, BhConfig, BhRun};
use traintrack::graph::{EdgePath, EmbeddedGraph, OrientedEdge};
use traintrack::map::GraphSelfMap;
use traintrack::twist::{compose_word, family_size, Family, TwistLetter, TwistWord};

/// (genus, word, growth) of the pseudo-Anosov examples.
pub const PA_EXAMPLES: [(usize, &str, f64); 4] = [
    (2, "a1 c0 d0 a1 d1 a1", 1.722084),
    (2, "-a1 d1 -c0 d0", 4.390257),
    (2, "a0 -c0 d0 -d1", 2.015357),
    (3, "d0 c0 d1 c1 d2 -c2", 2.042491),
];
pub const REDUCIBLE_EXAMPLE: (usize, &str) = (2, "d0 c0 d1");

// ---------------------------------------------------------------------------
// characteristic polynomial oracle

/// Coefficients, lowest degree first, of `det(xI - A)`, by Faddeev-LeVerrier
/// in exact integer arithmetic.
pub fn char_poly(a: &[Vec<u64>]) -> Vec<i128> {
    narrow(&char_poly_big(a))
}

fn char_poly_big(a: &[Vec<u64>]) -> Vec<BigInt> {
    let n = a.len();
    let a: Vec<Vec<BigInt>> = a
        .iter()
        .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
        .collect();
    let mut c = vec![BigInt::zero(); n + 1];
    c[n] = BigInt::one();
    let mut m = vec![vec![BigInt::zero(); n]; n];
    for k in 1..=n {
        // M_k = A M_{k-1} + c_{n-k+1} I
        let mut next = vec![vec![BigInt::zero(); n]; n];
        for i in 0..n {
            for j in 0..n {
                next[i][j] = (0..n).map(|l| &a[i][l] * &m[l][j]).sum();
            }
            next[i][i] += &c[n - k + 1];
        }
        m = next;
        let trace: BigInt = (0..n)
            .map(|i| (0..n).map(|l| &a[i][l] * &m[l][i]).sum::<BigInt>())
            .sum();
        let kb = BigInt::from(k);
        assert!((&trace % &kb).is_zero());
        c[n - k] = -(trace / kb);
    }
    c
}

fn narrow(p: &[BigInt]) -> Vec<i128> {
    p.iter()
        .map(|c| i128::try_from(c).expect("coefficient fits in i128"))
        .collect()
}

fn trim(mut p: Vec<BigInt>) -> Vec<BigInt> {
    while p.len() > 1 && p.last().unwrap().is_zero() {
        p.pop();
    }
    p
}

fn is_zero_poly(p: &[BigInt]) -> bool {
    p.len() == 1 && p[0].is_zero()
}

fn content(p: &[BigInt]) -> BigInt {
    p.iter().fold(BigInt::zero(), |g, c| g.gcd(c))
}

fn primitive(p: Vec<BigInt>) -> Vec<BigInt> {
    let g = content(&p);
    if g <= BigInt::one() {
        p
    } else {
        p.into_iter().map(|c| c / &g).collect()
    }
}

/// Pseudo-division: `lc(b)^k a = q b + r`, up to a common positive factor.
fn pseudo_divide(a: &[BigInt], b: &[BigInt]) -> (Vec<BigInt>, Vec<BigInt>) {
    let (mut r, b) = (trim(a.to_vec()), trim(b.to_vec()));
    let db = b.len() - 1;
    let lb = b[db].clone();
    let mut q = vec![BigInt::zero(); r.len().saturating_sub(db).max(1)];
    while r.len() > db && !is_zero_poly(&r) {
        let dr = r.len() - 1;
        let lr = r[dr].clone();
        for c in q.iter_mut() {
            *c *= &lb;
        }
        q[dr - db] += &lr;
        for c in r.iter_mut() {
            *c *= &lb;
        }
        for (i, bc) in b.iter().enumerate() {
            r[dr - db + i] -= &lr * bc;
        }
        r = trim(r);
        let g = content(&r).gcd(&content(&q));
        if g > BigInt::one() {
            r = r.into_iter().map(|c| c / &g).collect();
            q = q.into_iter().map(|c| c / &g).collect();
        }
    }
    (q, r)
}

fn poly_gcd(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let (mut a, mut b) = (primitive(trim(a.to_vec())), primitive(trim(b.to_vec())));
    while !is_zero_poly(&b) {
        let (_, r) = pseudo_divide(&a, &b);
        a = b;
        b = primitive(r);
    }
    a
}

/// `p / gcd(p, p')`: same real roots as `p`, all simple.
pub fn squarefree(p: &[i128]) -> Vec<i128> {
    narrow(&squarefree_big(
        p.iter().map(|&c| BigInt::from(c)).collect(),
    ))
}

fn squarefree_big(p: Vec<BigInt>) -> Vec<BigInt> {
    let dp: Vec<BigInt> = p
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| BigInt::from(i) * c)
        .collect();
    if dp.is_empty() {
        return p;
    }
    let g = poly_gcd(&p, &dp);
    primitive(pseudo_divide(&p, &g).0)
}

/// Horner with error-free transformations, accurate as if evaluated in
/// twice the working precision.
pub fn eval(p: &[i128], x: f64) -> f64 {
    let mut s = *p.last().unwrap() as f64;
    let mut err = 0.0;
    for &c in p.iter().rev().skip(1) {
        let prod = s * x;
        let pe = s.mul_add(x, -prod);
        let c = c as f64;
        let sum = prod + c;
        let bb = sum - prod;
        let se = (prod - (sum - bb)) + (c - bb);
        s = sum;
        err = err * x + (pe + se);
    }
    s + err
}

/// Spectral radius of a nonnegative integer matrix as the largest real
/// root of its characteristic polynomial.
pub fn spectral_radius_oracle(a: &[Vec<u64>]) -> f64 {
    let n = a.len();
    let bound = (0..n).map(|i| a[i].iter().sum::<u64>()).max().unwrap_or(0) as f64 + 1.0;
    let q = narrow(&squarefree_big(char_poly_big(a)));
    let sign_at = |x: f64| eval(&q, x).signum();
    let top = sign_at(bound);
    let step = 1e-4;
    let mut hi = bound;
    loop {
        let lo = (hi - step).max(0.0);
        let s = eval(&q, lo);
        if s == 0.0 {
            return lo;
        }
        if s.signum() != top {
            let (mut l, mut h) = (lo, hi);
            for _ in 0..200 {
                let mid = 0.5 * (l + h);
                if sign_at(mid) == top {
                    h = mid;
                } else {
                    l = mid;
                }
            }
            return 0.5 * (l + h);
        }
        if lo == 0.0 {
            return 0.0;
        }
        hi = lo;
    }
}

// ---------------------------------------------------------------------------
// paths and surfaces

/// Cancels adjacent inverse pairs one at a time until none is left.
pub fn tighten_naive(word: &[OrientedEdge]) -> Vec<OrientedEdge> {
    let mut w = word.to_vec();
    'outer: loop {
        for i in 0..w.len().saturating_sub(1) {
            if w[i + 1] == w[i].reverse() {
                w.drain(i..i + 2);
                continue 'outer;
            }
        }
        return w;
    }
}

pub fn tighten_cyclic_naive(word: &[OrientedEdge]) -> Vec<OrientedEdge> {
    let mut w = tighten_naive(word);
    while w.len() >= 2 && w[0] == w[w.len() - 1].reverse() {
        w = w[1..w.len() - 1].to_vec();
    }
    w
}

pub fn is_rotation(a: &[OrientedEdge], b: &[OrientedEdge]) -> bool {
    a.len() == b.len()
        && (a.is_empty()
            || (0..a.len()).any(|k| a.iter().cycle().skip(k).take(a.len()).eq(b.iter())))
}

/// Image of a path as the plain concatenation of edge images.
pub fn apply_naive(f: &GraphSelfMap, path: &[OrientedEdge]) -> Vec<OrientedEdge> {
    path.iter()
        .flat_map(|&d| f.image_of(d).steps().to_vec())
        .collect()
}

/// Boundary cycles of the ribbon graph read off directly from the
/// boundary word: after `d` comes `rho[i + 1]` when `d = rho[i]`.
pub fn face_count_from_rho(g: &EmbeddedGraph) -> usize {
    let rho = g.rho();
    let mut next: BTreeMap<OrientedEdge, OrientedEdge> = BTreeMap::new();
    for i in 0..rho.len() {
        next.insert(rho[i], rho[(i + 1) % rho.len()]);
    }
    let mut seen = BTreeSet::new();
    let mut faces = 0;
    for d in g.directions() {
        if seen.contains(&d) {
            continue;
        }
        faces += 1;
        let mut cur = d;
        while seen.insert(cur) {
            cur = match next.get(&cur) {
                Some(&n) => n,
                None => return usize::MAX,
            };
        }
    }
    faces
}

/// Geometric intersection number of two curves through the growth of
/// `T_a^n(b)`.
pub fn intersection(rose: &EmbeddedGraph, a: &[OrientedEdge], b: &[OrientedEdge]) -> usize {
    let ca = traintrack::twist::CurveOnGraph::new(rose, a.to_vec(), None).unwrap();
    let t = traintrack::twist::dehn_twist(rose, &ca, 1).unwrap();
    let mut w = b.to_vec();
    let mut lens = Vec::new();
    for _ in 0..6 {
        w = tighten_cyclic_naive(&w);
        lens.push(w.len());
        w = apply_naive(&t, &w);
    }
    (lens[5] - lens[4]) / a.len()
}

// ---------------------------------------------------------------------------
// random words

pub fn random_word(rng: &mut StdRng, genus: usize, max_len: usize) -> TwistWord {
    let len = rng.gen_range(1..=max_len);
    let letters = (0..len)
        .map(|_| {
            let family = [Family::A, Family::C, Family::D][rng.gen_range(0..3)];
            let index = rng.gen_range(0..family_size(genus, family));
            let exponent = if rng.gen_bool(0.5) { 1 } else { -1 };
            TwistLetter {
                family,
                index,
                exponent,
            }
        })
        .collect();
    TwistWord::new(letters)
}

pub fn path(steps: &[OrientedEdge]) -> EdgePath {
    EdgePath::new(steps.to_vec())
}

// ---------------------------------------------------------------------------
// pipeline

/// Composes, runs the train track algorithm and analyses the outcome.
pub fn analyse(genus: usize, word: &TwistWord, keep_maps: bool) -> (BhRun, SingularityReport) {
    let f = compose_word(genus, word, false).unwrap();
    let config = BhConfig {
        keep_maps,
        ..BhConfig::default()
    };
    let run = bestvina_handel(&f, config).unwrap_or_else(|e| panic!("{word}: {e}"));
    let report =
        full_report(&run.outcome, genus as u32, 1e-9).unwrap_or_else(|e| panic!("{word}: {e}"));
    (run, report)
}

pub fn word(s: &str) -> TwistWord {
    traintrack::cli::parse_word(s).unwrap()
}

/// Sorted prong counts plus the puncture index, in twice-units.
pub fn singularity_data(r: &SingularityReport) -> (Vec<usize>, Option<i64>) {
    let mut ks: Vec<usize> = r.polygons.iter().map(|p| p.k).collect();
    ks.sort();
    (ks, r.puncture_index.map(|h| h.twice()))
}
