//! Seeded generators for test networks.
//!
//! All randomness comes from SplitMix64: the state advances by
//! `0x9E3779B97F4A7C15` and each output is mixed with
//! `z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9`,
//! `z = (z ^ (z >> 27)) * 0x94D049BB133111EB`, `z ^ (z >> 31)`.
//! Uniform reals take the top 53 bits: `(u >> 11) * 2^-53`.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use rand_xoshiro::rand_core::{Rng as _, SeedableRng};
use rand_xoshiro::SplitMix64;

use crate::balance::{structural_balance, GaugeVector};
use crate::linalg::Matrix;
use crate::sgraph::{NetworkPair, SignedDigraph};
use crate::stability::canonical_union;

/// Seeded SplitMix64 stream.
#[derive(Debug, Clone)]
pub struct Rng(SplitMix64);

impl Rng {
    pub fn new(seed: u64) -> Self {
        Self(SplitMix64::seed_from_u64(seed))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    /// Uniform on `[0, 1)`.
    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit()
    }

    /// Uniform on `0..n` (slightly biased for huge `n`, irrelevant here).
    pub fn below(&mut self, n: usize) -> usize {
        (self.unit() * n as f64) as usize
    }

    pub fn chance(&mut self, p: f64) -> bool {
        self.unit() < p
    }

    pub fn sign(&mut self) -> f64 {
        if self.next_u64() >> 63 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// Fisher-Yates shuffle of `0..n`.
    pub fn permutation(&mut self, n: usize) -> Vec<usize> {
        let mut p: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            p.swap(i, self.below(i + 1));
        }
        p
    }
}

/// Sign structure of a generated network pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    ConsistentBalanced,
    ConsistentUnbalanced,
    Inconsistent,
}

impl Family {
    pub const ALL: [Family; 3] = [
        Family::ConsistentBalanced,
        Family::ConsistentUnbalanced,
        Family::Inconsistent,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::ConsistentBalanced => "consistent-balanced",
            Family::ConsistentUnbalanced => "consistent-unbalanced",
            Family::Inconsistent => "inconsistent",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Family::ALL.into_iter().find(|f| f.name() == s)
    }
}

const EXTRA_ARC_PROB: f64 = 0.3;

fn magnitude(rng: &mut Rng) -> f64 {
    rng.uniform(0.5, 1.5)
}

/// Arcs of a strongly connected skeleton: a random Hamiltonian cycle plus
/// extra arcs, in lexicographic order.
fn skeleton(rng: &mut Rng, n: usize) -> BTreeSet<(usize, usize)> {
    let order = rng.permutation(n);
    let mut arcs = BTreeSet::new();
    if n >= 2 {
        for w in 0..n {
            arcs.insert((order[(w + 1) % n], order[w]));
        }
    }
    for i in 0..n {
        for j in 0..n {
            if i != j && rng.chance(EXTRA_ARC_PROB) {
                arcs.insert((i, j));
            }
        }
    }
    arcs
}

#[derive(Clone, Copy)]
enum Layer {
    First,
    Second,
    Both,
}

fn layer(rng: &mut Rng) -> Layer {
    match rng.below(3) {
        0 => Layer::First,
        1 => Layer::Second,
        _ => Layer::Both,
    }
}

fn build(n: usize, bc: Vec<(usize, usize, f64)>, bd: Vec<(usize, usize, f64)>) -> NetworkPair {
    NetworkPair::new(
        SignedDigraph::from_arcs(n, bc).expect("generated arcs are valid"),
        SignedDigraph::from_arcs(n, bd).expect("generated arcs are valid"),
    )
    .expect("generated layers have equal size")
}

/// Sign-consistent pair whose arcs take the sign `sign_of(i, j)` in both layers.
fn consistent_pair(
    rng: &mut Rng,
    n: usize,
    mut sign_of: impl FnMut(&mut Rng, usize, usize) -> f64,
) -> NetworkPair {
    let mut bc = Vec::new();
    let mut bd = Vec::new();
    for (i, j) in skeleton(rng, n) {
        let s = sign_of(rng, i, j);
        match layer(rng) {
            Layer::First => bc.push((i, j, s * magnitude(rng))),
            Layer::Second => bd.push((i, j, s * magnitude(rng))),
            Layer::Both => {
                bc.push((i, j, s * magnitude(rng)));
                bd.push((i, j, s * magnitude(rng)));
            }
        }
    }
    build(n, bc, bd)
}

/// Random pair of the given family on `n >= 2` agents with strongly
/// connected union.
pub fn random_pair(rng: &mut Rng, n: usize, family: Family) -> NetworkPair {
    assert!(n >= 2, "generated networks need at least two agents");
    match family {
        Family::ConsistentBalanced => {
            let d: Vec<f64> = (0..n).map(|_| rng.sign()).collect();
            consistent_pair(rng, n, |_, i, j| d[i] * d[j])
        }
        Family::ConsistentUnbalanced => loop {
            let pair = consistent_pair(rng, n, |r, _, _| r.sign());
            let union = canonical_union(&pair).expect("consistent layers cannot cancel");
            if !structural_balance(&union).is_balanced() {
                break pair;
            }
        },
        Family::Inconsistent => {
            let arcs: Vec<_> = skeleton(rng, n).into_iter().collect();
            let forced = rng.below(arcs.len());
            let mut bc = Vec::new();
            let mut bd = Vec::new();
            for (idx, &(i, j)) in arcs.iter().enumerate() {
                if idx == forced {
                    let s = rng.sign();
                    bc.push((i, j, s * magnitude(rng)));
                    bd.push((i, j, -s * magnitude(rng)));
                    continue;
                }
                match layer(rng) {
                    Layer::First => bc.push((i, j, rng.sign() * magnitude(rng))),
                    Layer::Second => bd.push((i, j, rng.sign() * magnitude(rng))),
                    Layer::Both => {
                        bc.push((i, j, rng.sign() * magnitude(rng)));
                        bd.push((i, j, rng.sign() * magnitude(rng)));
                    }
                }
            }
            build(n, bc, bd)
        }
    }
}

/// Initial state with entries uniform on `[-1, 1]`.
pub fn random_initial_state(rng: &mut Rng, n: usize) -> (Vec<f64>, Vec<f64>) {
    let x = (0..n).map(|_| rng.uniform(-1.0, 1.0)).collect();
    let y = (0..n).map(|_| rng.uniform(-1.0, 1.0)).collect();
    (x, y)
}

/// Signed digraph with arc probability `density`. Half of the draws are
/// switched copies of a nonnegative graph, so balanced and unbalanced cases
/// both occur.
pub fn random_signed_digraph(rng: &mut Rng, n: usize, density: f64) -> SignedDigraph {
    let planted = rng.chance(0.5);
    let d: Vec<f64> = (0..n).map(|_| rng.sign()).collect();
    let mut arcs = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j && rng.chance(density) {
                let s = if planted { d[i] * d[j] } else { rng.sign() };
                arcs.push((i, j, s * magnitude(rng)));
            }
        }
    }
    SignedDigraph::from_arcs(n, arcs).expect("generated arcs are valid")
}

/// Random gauge.
pub fn random_gauge(rng: &mut Rng, n: usize) -> GaugeVector {
    GaugeVector::new(
        (0..n)
            .map(|_| if rng.sign() > 0.0 { 1 } else { -1 })
            .collect(),
    )
}

/// Matrix with nonpositive off-diagonal entries (about half of them zero)
/// and a diagonal drawn around the off-diagonal row mass, so that both
/// stable and unstable cases occur.
pub fn random_z_matrix(rng: &mut Rng, n: usize) -> Matrix {
    let mut m = Matrix::zeros(n, n);
    for i in 0..n {
        let mut mass = 0.0;
        for j in 0..n {
            if i != j && rng.chance(0.5) {
                let w = rng.uniform(0.0, 1.0);
                m[(i, j)] = -w;
                mass += w;
            }
        }
        m[(i, i)] = rng.uniform(-0.2, 1.3) * mass.max(0.5);
    }
    m
}
