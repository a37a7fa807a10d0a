//! Signed digraphs and pairs of them.
//!
//! Entry `b_ij` of an adjacency matrix is the weight of the arc `v_j -> v_i`
//! ("agent `i` listens to agent `j`"). Vertices are 0-indexed here; user-facing
//! layers add one.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::Matrix;

/// Relative cancellation threshold for `alpha * b^c_ij + beta * b^d_ij`.
pub const EPS_CANCEL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GraphError {
    #[error("a signed digraph needs at least one vertex")]
    Empty,
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("vertex {index} out of range for {n} vertices")]
    OutOfRange { index: usize, n: usize },
    #[error("weight of arc ({i}, {j}) is not finite")]
    NonFinite { i: usize, j: usize },
    #[error("adjacency must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("layers disagree on vertex count ({bc} vs {bd})")]
    SizeMismatch { bc: usize, bd: usize },
    #[error("union coefficients must be positive (alpha = {alpha}, beta = {beta})")]
    InvalidCoefficients { alpha: f64, beta: f64 },
    #[error("entry ({i}, {j}) cancels in the weighted union")]
    Cancellation { i: usize, j: usize },
}

/// Weighted signed digraph without self-loops. Only nonzero weights are
/// stored.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedDigraph {
    n: usize,
    weights: BTreeMap<(usize, usize), f64>,
}

impl SignedDigraph {
    /// Graph with `n` vertices and no arcs.
    pub fn empty(n: usize) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::Empty);
        }
        Ok(Self {
            n,
            weights: BTreeMap::new(),
        })
    }

    /// Builds a graph from `(i, j, b_ij)` triples. Zero weights are dropped;
    /// repeated pairs keep the last weight.
    pub fn from_arcs<I>(n: usize, arcs: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut g = Self::empty(n)?;
        for (i, j, w) in arcs {
            g.set(i, j, w)?;
        }
        Ok(g)
    }

    /// Builds a graph from a dense adjacency matrix. The diagonal must be zero.
    pub fn from_dense(b: &Matrix) -> Result<Self, GraphError> {
        if !b.is_square() {
            return Err(GraphError::NotSquare {
                rows: b.rows(),
                cols: b.cols(),
            });
        }
        let n = b.rows();
        let mut g = Self::empty(n)?;
        for i in 0..n {
            for j in 0..n {
                g.set(i, j, b[(i, j)])?;
            }
        }
        Ok(g)
    }

    fn set(&mut self, i: usize, j: usize, w: f64) -> Result<(), GraphError> {
        for index in [i, j] {
            if index >= self.n {
                return Err(GraphError::OutOfRange { index, n: self.n });
            }
        }
        if !w.is_finite() {
            return Err(GraphError::NonFinite { i, j });
        }
        if w == 0.0 {
            self.weights.remove(&(i, j));
            return Ok(());
        }
        if i == j {
            return Err(GraphError::SelfLoop(i));
        }
        self.weights.insert((i, j), w);
        Ok(())
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// `b_ij`, zero when there is no arc `v_j -> v_i`.
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights.get(&(i, j)).copied().unwrap_or(0.0)
    }

    /// Arcs as `(i, j, b_ij)` in lexicographic `(i, j)` order.
    pub fn arcs(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.weights.iter().map(|(&(i, j), &w)| (i, j, w))
    }

    pub fn arc_count(&self) -> usize {
        self.weights.len()
    }

    pub fn has_negative_arc(&self) -> bool {
        self.weights.values().any(|&w| w < 0.0)
    }

    pub fn row_is_empty(&self, i: usize) -> bool {
        self.weights.range((i, 0)..(i + 1, 0)).next().is_none()
    }

    pub fn adjacency(&self) -> Matrix {
        let mut b = Matrix::zeros(self.n, self.n);
        for (i, j, w) in self.arcs() {
            b[(i, j)] = w;
        }
        b
    }

    /// `G(|B|)`.
    pub fn abs(&self) -> SignedDigraph {
        self.map_weights(f64::abs)
    }

    pub fn scaled(&self, s: f64) -> SignedDigraph {
        self.map_weights(|w| w * s)
    }

    pub(crate) fn map_weights(&self, f: impl Fn(f64) -> f64) -> SignedDigraph {
        SignedDigraph {
            n: self.n,
            weights: self
                .weights
                .iter()
                .map(|(&k, &w)| (k, f(w)))
                .filter(|&(_, w)| w != 0.0)
                .collect(),
        }
    }

    /// Entrywise sum of two graphs on the same vertex set. Entries that sum
    /// to exactly zero are dropped.
    pub fn sum(&self, other: &SignedDigraph) -> Result<SignedDigraph, GraphError> {
        if self.n != other.n {
            return Err(GraphError::SizeMismatch {
                bc: self.n,
                bd: other.n,
            });
        }
        let mut weights = self.weights.clone();
        for (&k, &w) in &other.weights {
            let e = weights.entry(k).or_insert(0.0);
            *e += w;
            if *e == 0.0 {
                weights.remove(&k);
            }
        }
        Ok(SignedDigraph { n: self.n, weights })
    }

    pub fn support(&self) -> DigraphSupport {
        DigraphSupport {
            n: self.n,
            arcs: self.weights.keys().copied().collect(),
        }
    }
}

/// The two coupling layers `G(B^c)` and `G(B^d)` over one vertex set.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkPair {
    bc: SignedDigraph,
    bd: SignedDigraph,
}

impl NetworkPair {
    pub fn new(bc: SignedDigraph, bd: SignedDigraph) -> Result<Self, GraphError> {
        if bc.n() != bd.n() {
            return Err(GraphError::SizeMismatch {
                bc: bc.n(),
                bd: bd.n(),
            });
        }
        Ok(Self { bc, bd })
    }

    pub fn from_dense(bc: &Matrix, bd: &Matrix) -> Result<Self, GraphError> {
        Self::new(
            SignedDigraph::from_dense(bc)?,
            SignedDigraph::from_dense(bd)?,
        )
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.bc.n()
    }

    /// First-order coupling layer `G(B^c)`.
    pub fn bc(&self) -> &SignedDigraph {
        &self.bc
    }

    /// Second-order coupling layer `G(B^d)`.
    pub fn bd(&self) -> &SignedDigraph {
        &self.bd
    }

    pub fn swapped(&self) -> NetworkPair {
        NetworkPair {
            bc: self.bd.clone(),
            bd: self.bc.clone(),
        }
    }

    /// `L_{B^c} + scale * L_{B^d}`.
    pub fn laplacian_sum(&self, scale: f64) -> Matrix {
        &laplacian(&self.bc) + &laplacian(&self.bd).scale(scale)
    }
}

/// Arc set of a digraph, independent of weights. `(i, j)` stands for the arc
/// `v_j -> v_i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DigraphSupport {
    n: usize,
    arcs: BTreeSet<(usize, usize)>,
}

impl DigraphSupport {
    pub fn new<I>(n: usize, arcs: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        if n == 0 {
            return Err(GraphError::Empty);
        }
        let mut set = BTreeSet::new();
        for (i, j) in arcs {
            for index in [i, j] {
                if index >= n {
                    return Err(GraphError::OutOfRange { index, n });
                }
            }
            if i == j {
                return Err(GraphError::SelfLoop(i));
            }
            set.insert((i, j));
        }
        Ok(Self { n, arcs: set })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.arcs.contains(&(i, j))
    }

    pub fn arcs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.arcs.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.arcs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty()
    }

    /// Out-neighbour lists in the direction of information flow:
    /// `out[j]` holds every `i` with an arc `v_j -> v_i`.
    pub fn successors(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.n];
        for &(i, j) in &self.arcs {
            out[j].push(i);
        }
        out
    }
}

/// Signed Laplacian: `l_ii = sum_k |b_ik|`, `l_ij = -b_ij`.
pub fn laplacian(g: &SignedDigraph) -> Matrix {
    let mut l = Matrix::zeros(g.n(), g.n());
    for (i, j, w) in g.arcs() {
        l[(i, j)] = -w;
        l[(i, i)] += w.abs();
    }
    l
}

/// `diag(row sums of a)`.
pub fn degree_matrix(a: &Matrix) -> Matrix {
    Matrix::from_diagonal(&a.row_sums())
}

/// Positive and negative parts `(B^+, B^-)` with `B^+ + B^- = B`.
pub fn pos_neg_split(g: &SignedDigraph) -> (SignedDigraph, SignedDigraph) {
    (g.map_weights(|w| w.max(0.0)), g.map_weights(|w| w.min(0.0)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Consistency {
    Consistent,
    /// Lexicographically smallest `(i, j)` with `b^c_ij * b^d_ij < 0`.
    Inconsistent {
        witness: (usize, usize),
    },
}

impl Consistency {
    pub fn is_consistent(&self) -> bool {
        matches!(self, Consistency::Consistent)
    }
}

pub fn sign_consistency(pair: &NetworkPair) -> Consistency {
    pair.bc()
        .arcs()
        .find(|&(i, j, w)| w * pair.bd().weight(i, j) < 0.0)
        .map_or(Consistency::Consistent, |(i, j, _)| {
            Consistency::Inconsistent { witness: (i, j) }
        })
}

/// Arcs present in either layer.
pub fn union_support(pair: &NetworkPair) -> DigraphSupport {
    DigraphSupport {
        n: pair.n(),
        arcs: pair
            .bc()
            .weights
            .keys()
            .chain(pair.bd().weights.keys())
            .copied()
            .collect(),
    }
}

fn cancels(c: f64, d: f64) -> bool {
    let sum = c + d;
    sum.abs() <= EPS_CANCEL * c.abs().max(d.abs())
}

/// `G(alpha B^c + beta B^d)`, rejected when some arc of the union cancels.
pub fn union_adjacency(
    pair: &NetworkPair,
    alpha: f64,
    beta: f64,
) -> Result<SignedDigraph, GraphError> {
    if !(alpha > 0.0 && beta > 0.0 && alpha.is_finite() && beta.is_finite()) {
        return Err(GraphError::InvalidCoefficients { alpha, beta });
    }
    let mut weights = BTreeMap::new();
    for (i, j) in union_support(pair).arcs() {
        let c = alpha * pair.bc().weight(i, j);
        let d = beta * pair.bd().weight(i, j);
        if cancels(c, d) {
            return Err(GraphError::Cancellation { i, j });
        }
        weights.insert((i, j), c + d);
    }
    Ok(SignedDigraph {
        n: pair.n(),
        weights,
    })
}

/// `(1, beta)` with the smallest `beta` in `1, 2, 3, ...` for which no entry of
/// the union cancels.
pub fn safe_union_coefficients(pair: &NetworkPair) -> (f64, f64) {
    let support = union_support(pair);
    // each arc forbids at most one beta, so the scan ends within len + 1 steps
    let mut beta = 1.0;
    loop {
        let ok = support
            .arcs()
            .all(|(i, j)| !cancels(pair.bc().weight(i, j), beta * pair.bd().weight(i, j)));
        if ok {
            return (1.0, beta);
        }
        beta += 1.0;
    }
}

/// Strongly connected components (iterative Tarjan). Returns the component
/// id of every vertex and the number of components.
pub fn strongly_connected_components(support: &DigraphSupport) -> (Vec<usize>, usize) {
    const UNSEEN: usize = usize::MAX;
    let n = support.n();
    let succ = support.successors();
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut comp = vec![UNSEEN; n];
    let mut stack = Vec::new();
    let mut next_index = 0;
    let mut count = 0;
    // (vertex, position in its successor list)
    let mut work: Vec<(usize, usize)> = Vec::new();

    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        work.push((root, 0));
        while let Some(&mut (v, ref mut pos)) = work.last_mut() {
            if *pos == 0 && index[v] == UNSEEN {
                index[v] = next_index;
                low[v] = next_index;
                next_index += 1;
                stack.push(v);
                on_stack[v] = true;
            }
            if let Some(&w) = succ[v].get(*pos) {
                *pos += 1;
                if index[w] == UNSEEN {
                    work.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            work.pop();
            if let Some(&(parent, _)) = work.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                while let Some(w) = stack.pop() {
                    on_stack[w] = false;
                    comp[w] = count;
                    if w == v {
                        break;
                    }
                }
                count += 1;
            }
        }
    }
    (comp, count)
}

pub fn is_strongly_connected(support: &DigraphSupport) -> bool {
    strongly_connected_components(support).1 == 1
}

/// Agents whose dynamics collapse to a single integrator (empty row in
/// `B^d`) and to a double integrator (empty row in `B^c`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgentOrders {
    pub single_integrator: Vec<usize>,
    pub double_integrator: Vec<usize>,
}

pub fn agent_order_sets(pair: &NetworkPair) -> AgentOrders {
    let n = pair.n();
    AgentOrders {
        single_integrator: (0..n).filter(|&i| pair.bd().row_is_empty(i)).collect(),
        double_integrator: (0..n).filter(|&i| pair.bc().row_is_empty(i)).collect(),
    }
}
