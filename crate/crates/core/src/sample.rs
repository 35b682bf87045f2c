//! Random networks for property tests, acceptance runs and benchmarks.

use std::ops::RangeInclusive;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::circular::{circular_identifiable, CircleDescriptor, CircularCase};
use crate::model::NetworkModel;

/// Random simple digraph on a vertex count drawn from `vertices`, with each
/// ordered pair an edge with probability drawn from `density`. Every vertex
/// is excited or measured independently with probability one half; both sets
/// are kept nonempty.
pub fn random_model<R: Rng + ?Sized>(
    rng: &mut R,
    vertices: RangeInclusive<usize>,
    density: RangeInclusive<f64>,
) -> NetworkModel {
    let n = rng.random_range(vertices);
    let p = rng.random_range(density);
    let mut edges = Vec::new();
    for from in 1..=n {
        for to in 1..=n {
            if from != to && rng.random_bool(p) {
                edges.push((from, to));
            }
        }
    }
    let mut excited: Vec<usize> = (1..=n).filter(|_| rng.random_bool(0.5)).collect();
    let mut measured: Vec<usize> = (1..=n).filter(|_| rng.random_bool(0.5)).collect();
    if excited.is_empty() {
        excited.push(rng.random_range(1..=n));
    }
    if measured.is_empty() {
        measured.push(rng.random_range(1..=n));
    }
    NetworkModel::new(n, edges, excited, measured).expect("generated model is valid")
}

/// Directed cycle over a random permutation of `1..=len` with random
/// excited and measured sets covering every vertex.
pub fn random_ring<R: Rng + ?Sized>(rng: &mut R, len: usize) -> NetworkModel {
    let mut order: Vec<usize> = (1..=len).collect();
    order.shuffle(rng);
    let edges = (0..len).map(|i| (order[i], order[(i + 1) % len]));
    let mut excited = Vec::new();
    let mut measured = Vec::new();
    for v in 1..=len {
        match rng.random_range(0..3) {
            0 => excited.push(v),
            1 => measured.push(v),
            _ => {
                excited.push(v);
                measured.push(v);
            }
        }
    }
    NetworkModel::new(len, edges, excited, measured).expect("generated ring is valid")
}

/// Random cycle of length in `len` that is identifiable through two
/// vertex-disjoint paths, so its modules can be recovered from `T_{C,R}`.
pub fn random_recoverable_ring<R: Rng + ?Sized>(
    rng: &mut R,
    len: RangeInclusive<usize>,
) -> CircleDescriptor {
    let n = rng.random_range(len);
    assert!(n >= 2, "a recoverable ring needs at least two vertices");
    loop {
        let m = random_ring(rng, n);
        let d = crate::circular::detect_circle(&m).expect("ring");
        if circular_identifiable(&d).condition == CircularCase::TwoDisjointPaths {
            return d;
        }
    }
}
