//! Structural balance of signed digraphs.
//!
//! A graph is balanced iff some `D = diag(d), d_i = ±1` makes `D B D = |B|`.
//! Each arc `(i, j)` therefore imposes the parity constraint
//! `d_i d_j = sgn(b_ij)` on the undirected support, which a union-find with
//! parity resolves in near-linear time.

use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::Matrix;
use crate::sgraph::{laplacian, SignedDigraph};
use crate::{Error, Result};

/// Absolute tolerance for matrix equality checks.
pub const EPS_MAT: f64 = 1e-9;

/// Diagonal `±1` gauge.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GaugeVector(Vec<i8>);

impl GaugeVector {
    /// Panics if an entry is not `+1` or `-1`.
    pub fn new(signs: Vec<i8>) -> Self {
        assert!(
            signs.iter().all(|&s| s == 1 || s == -1),
            "gauge entries must be +1 or -1"
        );
        Self(signs)
    }

    pub fn try_new(signs: Vec<i8>) -> Option<Self> {
        signs
            .iter()
            .all(|&s| s == 1 || s == -1)
            .then_some(Self(signs))
    }

    pub fn identity(n: usize) -> Self {
        Self(vec![1; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn signs(&self) -> &[i8] {
        &self.0
    }

    #[inline]
    pub fn sign(&self, i: usize) -> f64 {
        f64::from(self.0[i])
    }

    pub fn as_matrix(&self) -> Matrix {
        Matrix::from_diagonal(&self.to_f64())
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(|&s| f64::from(s)).collect()
    }

    /// `D v`.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        v.iter()
            .zip(&self.0)
            .map(|(x, &s)| x * f64::from(s))
            .collect()
    }

    pub fn negated(&self) -> Self {
        Self(self.0.iter().map(|s| -s).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Balance {
    Balanced {
        gauge: GaugeVector,
    },
    /// An arc whose sign contradicts the parity forced by earlier arcs.
    Unbalanced {
        conflict: (usize, usize),
    },
}

impl Balance {
    pub fn is_balanced(&self) -> bool {
        matches!(self, Balance::Balanced { .. })
    }

    pub fn gauge(&self) -> Option<&GaugeVector> {
        match self {
            Balance::Balanced { gauge } => Some(gauge),
            Balance::Unbalanced { .. } => None,
        }
    }
}

struct ParityUnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
    // parity of a vertex relative to its parent; true means opposite camps
    flip: Vec<bool>,
}

impl ParityUnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            rank: vec![0; n],
            flip: vec![false; n],
        }
    }

    /// Root of `v` and the parity of `v` relative to that root.
    fn find(&mut self, v: usize) -> (usize, bool) {
        let mut path = Vec::new();
        let mut root = v;
        while self.parent[root] != root {
            path.push(root);
            root = self.parent[root];
        }
        // compress from the top so each node sees its parent's final parity
        let mut acc = false;
        for &node in path.iter().rev() {
            acc ^= self.flip[node];
            self.flip[node] = acc;
            self.parent[node] = root;
        }
        (root, if path.is_empty() { false } else { self.flip[v] })
    }

    /// Records `parity(a) xor parity(b) == odd`. Returns false on contradiction.
    fn union(&mut self, a: usize, b: usize, odd: bool) -> bool {
        let (ra, pa) = self.find(a);
        let (rb, pb) = self.find(b);
        if ra == rb {
            return (pa ^ pb) == odd;
        }
        let (hi, lo) = if self.rank[ra] >= self.rank[rb] {
            (ra, rb)
        } else {
            (rb, ra)
        };
        self.parent[lo] = hi;
        self.flip[lo] = pa ^ pb ^ odd;
        if self.rank[hi] == self.rank[lo] {
            self.rank[hi] += 1;
        }
        true
    }
}

/// Balance verdict with a gauge normalized so that the lowest-indexed vertex
/// of every weakly connected component gets `+1`.
pub fn structural_balance(g: &SignedDigraph) -> Balance {
    let n = g.n();
    let mut uf = ParityUnionFind::new(n);
    for (i, j, w) in g.arcs() {
        if !uf.union(i, j, w < 0.0) {
            return Balance::Unbalanced { conflict: (i, j) };
        }
    }
    let mut anchor: Vec<Option<bool>> = vec![None; n];
    let mut signs = Vec::with_capacity(n);
    for v in 0..n {
        let (root, parity) = uf.find(v);
        // vertices are visited in increasing order, so the first one seen in
        // a component is its lowest index
        let base = *anchor[root].get_or_insert(parity);
        signs.push(if parity == base { 1 } else { -1 });
    }
    Balance::Balanced {
        gauge: GaugeVector(signs),
    }
}

/// `G(D B D)`.
pub fn apply_gauge(g: &SignedDigraph, d: &GaugeVector) -> Result<SignedDigraph> {
    if d.len() != g.n() {
        return Err(Error::GaugeDimension {
            expected: g.n(),
            found: d.len(),
        });
    }
    let switched = SignedDigraph::from_arcs(
        g.n(),
        g.arcs().map(|(i, j, w)| (i, j, d.sign(i) * w * d.sign(j))),
    )?;
    Ok(switched)
}

/// Whether `D L_B D = L_{|B|}` holds entrywise within [`EPS_MAT`].
pub fn verify_gauge(g: &SignedDigraph, d: &GaugeVector) -> bool {
    match apply_gauge(g, d) {
        Ok(switched) => laplacian(&switched).approx_eq(&laplacian(&g.abs()), EPS_MAT),
        Err(_) => false,
    }
}

/// Exhaustive search over all `2^n` gauges; returns the first gauge (in
/// binary counting order, `d_0 = +1`) with `D B D = |B|`.
pub fn brute_force_gauge(g: &SignedDigraph) -> Option<GaugeVector> {
    let n = g.n();
    assert!(
        n <= 24,
        "exhaustive gauge search is limited to small graphs"
    );
    (0u32..(1 << n)).find_map(|mask| {
        let signs: Vec<i8> = (0..n)
            .map(|i| if mask >> i & 1 == 1 { -1 } else { 1 })
            .collect();
        let ok = g
            .arcs()
            .all(|(i, j, w)| f64::from(signs[i] * signs[j]) * w == w.abs());
        ok.then_some(GaugeVector(signs))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;

    fn g(rows: &[&[f64]]) -> SignedDigraph {
        SignedDigraph::from_dense(&Matrix::from_rows(rows)).unwrap()
    }

    #[test]
    fn balance_examples() {
        let b = g(&[&[0.0, -1.0], &[-1.0, 0.0]]);
        assert_eq!(
            structural_balance(&b),
            Balance::Balanced {
                gauge: GaugeVector::new(vec![1, -1])
            }
        );
        let pos = g(&[&[0.0, 1.0, 0.0], &[0.0, 0.0, 2.0], &[1.0, 0.0, 0.0]]);
        assert_eq!(
            structural_balance(&pos),
            Balance::Balanced {
                gauge: GaugeVector::identity(3)
            }
        );
        // directed 3-cycle with signs (+, +, -)
        let tri = SignedDigraph::from_arcs(3, [(1, 0, 1.0), (2, 1, 1.0), (0, 2, -1.0)]).unwrap();
        assert!(!structural_balance(&tri).is_balanced());
        assert!(brute_force_gauge(&tri).is_none());
    }

    #[test]
    fn opposite_signs_on_reciprocal_arcs_are_unbalanced() {
        let b = g(&[&[0.0, 1.0], &[-1.0, 0.0]]);
        assert_eq!(
            structural_balance(&b),
            Balance::Unbalanced { conflict: (1, 0) }
        );
    }

    #[test]
    fn gauge_is_normalized_per_component() {
        // components {0, 2} and {1, 3}; lowest vertex of each gets +1
        let b = SignedDigraph::from_arcs(4, [(2, 0, -1.0), (1, 3, -2.0)]).unwrap();
        let gauge = structural_balance(&b).gauge().cloned().unwrap();
        assert_eq!(gauge.signs(), &[1, 1, -1, -1]);
    }

    #[test]
    fn apply_gauge_examples() {
        let b = g(&[&[0.0, -1.0], &[-1.0, 0.0]]);
        assert_eq!(apply_gauge(&b, &GaugeVector::identity(2)).unwrap(), b);
        let d = GaugeVector::new(vec![1, -1]);
        let once = apply_gauge(&b, &d).unwrap();
        assert_eq!(
            once.adjacency(),
            Matrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]])
        );
        assert_eq!(apply_gauge(&once, &d).unwrap(), b);
        assert!(apply_gauge(&b, &GaugeVector::identity(3)).is_err());
    }

    #[test]
    fn verify_gauge_examples() {
        let b = g(&[&[0.0, -1.0, 0.0], &[0.0, 0.0, 2.0], &[-3.0, 0.0, 0.0]]);
        let gauge = structural_balance(&b).gauge().cloned().unwrap();
        assert!(verify_gauge(&b, &gauge));
        let tri = SignedDigraph::from_arcs(3, [(1, 0, 1.0), (2, 1, 1.0), (0, 2, -1.0)]).unwrap();
        for mask in 0..8u8 {
            let d = GaugeVector::new(
                (0..3)
                    .map(|i| if mask >> i & 1 == 1 { -1 } else { 1 })
                    .collect(),
            );
            assert!(!verify_gauge(&tri, &d));
        }
        let pos = g(&[&[0.0, 1.0], &[4.0, 0.0]]);
        assert!(verify_gauge(&pos, &GaugeVector::new(vec![-1, -1])));
    }

    #[test]
    fn gauge_commutes_with_laplacian() {
        let b = g(&[&[0.0, -1.0, 0.5], &[2.0, 0.0, 0.0], &[0.0, -3.0, 0.0]]);
        let d = GaugeVector::new(vec![1, -1, -1]);
        let dm = d.as_matrix();
        let lhs = laplacian(&apply_gauge(&b, &d).unwrap());
        let rhs = &(&dm * &laplacian(&b)) * &dm;
        assert!(lhs.approx_eq(&rhs, 0.0));
    }
}
