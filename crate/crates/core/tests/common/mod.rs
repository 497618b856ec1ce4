//! Random frameworks for property tests.

#![allow(dead_code)]

use framesaddle::framework::{Configuration, Edge, Framework, Pin, Topology};
use framesaddle::Framework64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A random framework with `n` vertices in `R^d`, vertices uniform in
/// `[-2, 2]^d`, each pair joined with probability 1/2 (at least one edge),
/// a random free edge, measured rest lengths and the triangular pinning
/// scheme (vertex 0 fully, vertex 1 from axis 1 on, ...).
pub fn random_framework(n: usize, d: usize, seed: u64) -> Framework64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let verts: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..d).map(|_| rng.random_range(-2.0..2.0)).collect())
        .collect();
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if rng.random_bool(0.5) {
                edges.push(Edge::new(a, b));
            }
        }
    }
    if edges.is_empty() {
        edges.push(Edge::new(0, 1));
    }
    let free = rng.random_range(0..edges.len());
    let topo = Topology::new(n, edges, free).unwrap();
    let mut pins = Vec::new();
    for (v, p) in verts.iter().enumerate().take(d) {
        for (axis, &value) in p.iter().enumerate().skip(v) {
            pins.push(Pin::new(v, axis, value));
        }
    }
    let config = Configuration::from_vertices(d, &verts).unwrap();
    Framework::new(topo, config, None, pins).unwrap()
}

/// `(n, d, seed)` with `n ≤ 8`, `d ∈ {2, 3}` and `n ≥ d + 1`.
pub fn framework_params() -> impl Strategy<Value = (usize, usize, u64)> {
    prop_oneof![Just(2usize), Just(3usize)]
        .prop_flat_map(|d| (d + 1..=8usize, Just(d), any::<u64>()))
}

/// Relative Frobenius error with a floor of one on the scale.
pub fn rel_err(got: &nalgebra::DMatrix<f64>, want: &nalgebra::DMatrix<f64>) -> f64 {
    (got - want).norm() / want.norm().max(1.0)
}
