//! Stability certificates and gain selection.
//!
//! Sign-consistent pairs are analyzed through the canonical union
//! `B = B^c + B^d`:
//!
//! * balanced union: `W` solves `A^T W + W A = I` for the reduced matrix
//!   `A = E D (L_{B^c} + L_{B^d}) D F`, and the gain index is
//!   `mu = lmax(W) lmax(Psi Psi^T) / (2 (delta - 1))` with
//!   `Psi = E D (L_{B^c} + delta L_{B^d}) D F`;
//! * unbalanced union: `H` solves the same equation for
//!   `L_{B^c} + L_{B^d}` and `Psi = L_{B^c} + delta L_{B^d}`.
//!
//! Sign-inconsistent pairs use `H` as well, with index `zeta` of the same
//! shape. Their positive stability rests on the splitting
//! `L_{B^c} + L_{B^d} = core * Xi`, where
//! `core = L_{B^{c+} + B^{d+}} + Delta_{|B^{c-} + B^{d-}|}` is an M-matrix
//! and `Xi = I - core^{-1} (B^{c-} + B^{d-}) >= 0`.

use alloc::collections::VecDeque;
use alloc::vec;

use crate::balance::{structural_balance, Balance, GaugeVector, EPS_MAT};
use crate::linalg::{
    determinant, is_positive_definite, lambda_max, lyapunov_residual, lyapunov_solve, Lu, Matrix,
    EPS_LYAP,
};
use crate::sgraph::{
    degree_matrix, is_strongly_connected, laplacian, pos_neg_split, sign_consistency,
    union_adjacency, union_support, NetworkPair, SignedDigraph,
};
use crate::{Error, Result};

pub const DEFAULT_DELTA: f64 = 2.0;
pub const DEFAULT_MARGIN: f64 = 0.1;

/// Coordinate-change matrices for the balanced reduction.
///
/// `Q = [1 | F]` has inverse `[C ; E]`; `E` removes the consensus direction.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectorMatrices {
    /// `[-1 | I]`, `(n-1) x n`.
    pub e: Matrix,
    /// `[0 ; I]`, `n x (n-1)`.
    pub f: Matrix,
    /// `[1, 0, ..., 0]`, `1 x n`.
    pub c: Matrix,
    /// `[1 | F]`, `n x n`.
    pub q: Matrix,
}

impl SelectorMatrices {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::TooFewAgents(n));
        }
        let mut e = Matrix::zeros(n - 1, n);
        let mut f = Matrix::zeros(n, n - 1);
        for r in 0..n - 1 {
            e[(r, 0)] = -1.0;
            e[(r, r + 1)] = 1.0;
            f[(r + 1, r)] = 1.0;
        }
        let mut c = Matrix::zeros(1, n);
        c[(0, 0)] = 1.0;
        let mut q = Matrix::zeros(n, n);
        for i in 0..n {
            q[(i, 0)] = 1.0;
        }
        q.set_block(0, 1, &f);
        let sel = Self { e, f, c, q };
        debug_assert!((&sel.q_inverse() * &sel.q).approx_eq(&Matrix::identity(n), EPS_MAT));
        Ok(sel)
    }

    /// `[C ; E]`.
    pub fn q_inverse(&self) -> Matrix {
        let n = self.q.rows();
        let mut inv = Matrix::zeros(n, n);
        inv.set_block(0, 0, &self.c);
        inv.set_block(1, 0, &self.e);
        inv
    }

    /// `E M F`.
    pub fn reduce(&self, m: &Matrix) -> Matrix {
        &(&self.e * m) * &self.f
    }
}

/// `E D M D F`.
pub fn reduced_matrix(m: &Matrix, gauge: &GaugeVector) -> Result<Matrix> {
    let sel = SelectorMatrices::new(m.rows())?;
    if gauge.len() != m.rows() {
        return Err(Error::GaugeDimension {
            expected: m.rows(),
            found: gauge.len(),
        });
    }
    let d = gauge.as_matrix();
    Ok(sel.reduce(&(&(&d * m) * &d)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CertificateKind {
    /// `W` for a sign-consistent pair with balanced union.
    BalancedW,
    /// `H` for a sign-consistent pair with unbalanced union.
    UnbalancedH,
    /// `H` for a sign-inconsistent pair.
    InconsistentH,
}

/// Positive definite Lyapunov solution with its residual.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityCertificate {
    pub kind: CertificateKind,
    pub matrix: Matrix,
    pub residual: f64,
    pub gauge: Option<GaugeVector>,
}

fn certify(a: &Matrix) -> Result<(Matrix, f64)> {
    let x = lyapunov_solve(a)?;
    let residual = lyapunov_residual(a, &x);
    if !is_positive_definite(&x) {
        return Err(Error::NotPositiveDefinite);
    }
    if residual > EPS_LYAP {
        return Err(Error::ResidualTooLarge(residual));
    }
    Ok((x, residual))
}

/// `W` from `[E D (L_c + L_d) D F]^T W + W [E D (L_c + L_d) D F] = I`.
pub fn certificate_balanced(
    pair: &NetworkPair,
    gauge: &GaugeVector,
) -> Result<StabilityCertificate> {
    let a = reduced_matrix(&pair.laplacian_sum(1.0), gauge)?;
    let (matrix, residual) = certify(&a)?;
    Ok(StabilityCertificate {
        kind: CertificateKind::BalancedW,
        matrix,
        residual,
        gauge: Some(gauge.clone()),
    })
}

/// `H` from `(L_c + L_d)^T H + H (L_c + L_d) = I`.
pub fn certificate_unbalanced(pair: &NetworkPair) -> Result<StabilityCertificate> {
    let kind = if sign_consistency(pair).is_consistent() {
        CertificateKind::UnbalancedH
    } else {
        CertificateKind::InconsistentH
    };
    let (matrix, residual) = certify(&pair.laplacian_sum(1.0))?;
    Ok(StabilityCertificate {
        kind,
        matrix,
        residual,
        gauge: None,
    })
}

/// Which theorem branch a pair falls into.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Branch {
    ConsistentBalanced { gauge: GaugeVector },
    ConsistentUnbalanced,
    Inconsistent,
}

impl Branch {
    /// Classifies a pair; fails when the union is not strongly connected.
    pub fn of(pair: &NetworkPair) -> Result<Branch> {
        if !is_strongly_connected(&union_support(pair)) {
            return Err(Error::NotStronglyConnected);
        }
        if !sign_consistency(pair).is_consistent() {
            return Ok(Branch::Inconsistent);
        }
        Ok(match structural_balance(&canonical_union(pair)?) {
            Balance::Balanced { gauge } => Branch::ConsistentBalanced { gauge },
            Balance::Unbalanced { .. } => Branch::ConsistentUnbalanced,
        })
    }
}

/// `G(B^c + B^d)`.
pub fn canonical_union(pair: &NetworkPair) -> Result<SignedDigraph> {
    Ok(union_adjacency(pair, 1.0, 1.0)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IndexKind {
    Mu,
    Zeta,
}

/// Gain index (`mu` or `zeta`) together with the certificate it rests on.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexAnalysis {
    pub kind: IndexKind,
    pub branch: Branch,
    pub delta: f64,
    pub index: f64,
    pub phi_lambda_max: f64,
    pub psi_lambda_max: f64,
    pub certificate: StabilityCertificate,
}

/// An index analysis with the selected gain `k = index * (1 + margin)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GainAnalysis {
    pub analysis: IndexAnalysis,
    pub margin: f64,
    pub k: f64,
}

impl GainAnalysis {
    pub fn new(analysis: IndexAnalysis, margin: f64) -> Result<Self> {
        let k = select_gain(analysis.index, margin)?;
        Ok(Self {
            analysis,
            margin,
            k,
        })
    }

    pub fn delta(&self) -> f64 {
        self.analysis.delta
    }

    pub fn index(&self) -> f64 {
        self.analysis.index
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if delta > 1.0 && delta.is_finite() {
        Ok(())
    } else {
        Err(Error::DeltaOutOfRange(delta))
    }
}

fn gain_index(phi: &Matrix, psi: &Matrix, delta: f64) -> Result<(f64, f64, f64)> {
    let phi_max = lambda_max(phi)?;
    let psi_max = lambda_max(&(psi * &psi.transpose()))?;
    Ok((phi_max * psi_max / (2.0 * (delta - 1.0)), phi_max, psi_max))
}

/// Index `mu` for a sign-consistent pair with strongly connected union.
pub fn compute_mu(pair: &NetworkPair, delta: f64) -> Result<IndexAnalysis> {
    check_delta(delta)?;
    let branch = Branch::of(pair)?;
    let psi_full = pair.laplacian_sum(delta);
    let (certificate, psi) = match &branch {
        Branch::Inconsistent => return Err(Error::SignInconsistent),
        Branch::ConsistentBalanced { gauge } => (
            certificate_balanced(pair, gauge)?,
            reduced_matrix(&psi_full, gauge)?,
        ),
        Branch::ConsistentUnbalanced => (certificate_unbalanced(pair)?, psi_full),
    };
    let (index, phi_lambda_max, psi_lambda_max) = gain_index(&certificate.matrix, &psi, delta)?;
    if !(index > 0.0) {
        return Err(Error::NonPositiveIndex(index));
    }
    Ok(IndexAnalysis {
        kind: IndexKind::Mu,
        branch,
        delta,
        index,
        phi_lambda_max,
        psi_lambda_max,
        certificate,
    })
}

/// Index `zeta` for a sign-inconsistent pair with strongly connected union.
pub fn compute_zeta(pair: &NetworkPair, delta: f64) -> Result<IndexAnalysis> {
    check_delta(delta)?;
    let branch = Branch::of(pair)?;
    if branch != Branch::Inconsistent {
        return Err(Error::SignConsistent);
    }
    let certificate = certificate_unbalanced(pair)?;
    let (index, phi_lambda_max, psi_lambda_max) =
        gain_index(&certificate.matrix, &pair.laplacian_sum(delta), delta)?;
    if !(index > 0.0) {
        return Err(Error::NonPositiveIndex(index));
    }
    Ok(IndexAnalysis {
        kind: IndexKind::Zeta,
        branch,
        delta,
        index,
        phi_lambda_max,
        psi_lambda_max,
        certificate,
    })
}

/// `mu` or `zeta`, whichever applies to the pair.
pub fn compute_index(pair: &NetworkPair, delta: f64) -> Result<IndexAnalysis> {
    check_delta(delta)?;
    if sign_consistency(pair).is_consistent() {
        compute_mu(pair, delta)
    } else {
        compute_zeta(pair, delta)
    }
}

/// `k = index * (1 + margin)`.
pub fn select_gain(index: f64, margin: f64) -> Result<f64> {
    if !(index > 0.0 && index.is_finite()) {
        return Err(Error::NonPositiveIndex(index));
    }
    if !(margin > 0.0 && margin.is_finite()) {
        return Err(Error::NonPositiveMargin(margin));
    }
    Ok(index * (1.0 + margin))
}

struct SplitParts {
    positive: SignedDigraph,
    negative: SignedDigraph,
}

fn split_sums(pair: &NetworkPair) -> Result<SplitParts> {
    let (cp, cm) = pos_neg_split(pair.bc());
    let (dp, dm) = pos_neg_split(pair.bd());
    Ok(SplitParts {
        positive: cp.sum(&dp)?,
        negative: cm.sum(&dm)?,
    })
}

/// `[[0, 0], [Delta_{|B^{c-} + B^{d-}|} 1, B^{c+} + B^{d+}]]`; vertex 0 is the
/// added root.
pub fn augmented_digraph(pair: &NetworkPair) -> Result<Matrix> {
    let n = pair.n();
    let parts = split_sums(pair)?;
    let mut a = Matrix::zeros(n + 1, n + 1);
    let root_column = parts.negative.abs().adjacency().row_sums();
    for (i, w) in root_column.into_iter().enumerate() {
        a[(i + 1, 0)] = w;
    }
    a.set_block(1, 1, &parts.positive.adjacency());
    Ok(a)
}

/// Whether every vertex is reachable from vertex 0, following arcs
/// `v_j -> v_i` for `a[i][j] > 0`.
pub fn root_reaches_all(abar: &Matrix) -> bool {
    let n = abar.rows();
    if n == 0 {
        return false;
    }
    let mut seen = vec![false; n];
    seen[0] = true;
    let mut queue = VecDeque::from([0usize]);
    while let Some(j) = queue.pop_front() {
        for i in 0..n {
            if !seen[i] && abar[(i, j)] > 0.0 {
                seen[i] = true;
                queue.push_back(i);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// `L_{B^{c+} + B^{d+}} + Delta_{|B^{c-} + B^{d-}|}`.
pub fn m_matrix_core(pair: &NetworkPair) -> Result<Matrix> {
    let parts = split_sums(pair)?;
    let core = &laplacian(&parts.positive) + &degree_matrix(&parts.negative.abs().adjacency());
    debug_assert!(has_z_pattern(&core));
    Ok(core)
}

pub fn has_z_pattern(z: &Matrix) -> bool {
    z.is_square() && (0..z.rows()).all(|i| (0..z.cols()).all(|j| i == j || z[(i, j)] <= EPS_MAT))
}

/// Z-pattern plus positive leading principal minors.
pub fn is_m_matrix(z: &Matrix) -> bool {
    has_z_pattern(z) && (1..=z.rows()).all(|k| determinant(&z.block(0, 0, k, k)) > 0.0)
}

/// `Xi = I - core^{-1} (B^{c-} + B^{d-})`.
pub fn xi_matrix(pair: &NetworkPair) -> Result<Matrix> {
    let core = m_matrix_core(pair)?;
    let negative = split_sums(pair)?.negative.adjacency();
    if negative.max_abs() == 0.0 {
        // no antagonistic arcs: the correction vanishes even if core is singular
        return Ok(Matrix::identity(pair.n()));
    }
    let correction = Lu::factor(&core)?.solve_matrix(&negative)?;
    Ok(&Matrix::identity(pair.n()) - &correction)
}

/// `|L_c + L_d - core * Xi|_inf`.
pub fn recomposition_residual(pair: &NetworkPair, xi: &Matrix) -> Result<f64> {
    let core = m_matrix_core(pair)?;
    Ok((&pair.laplacian_sum(1.0) - &(&core * xi)).norm_inf())
}

/// Determinants on both sides of `det(L_c + L_d) = det(core) det(Xi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeterminantIdentity {
    pub laplacian_sum: f64,
    pub core: f64,
    pub xi: f64,
}

impl DeterminantIdentity {
    pub fn compute(pair: &NetworkPair, xi: &Matrix) -> Result<Self> {
        Ok(Self {
            laplacian_sum: determinant(&pair.laplacian_sum(1.0)),
            core: determinant(&m_matrix_core(pair)?),
            xi: determinant(xi),
        })
    }

    /// Relative mismatch between the two sides.
    pub fn mismatch(&self) -> f64 {
        let rhs = self.core * self.xi;
        (self.laplacian_sum - rhs).abs()
            / self
                .laplacian_sum
                .abs()
                .max(rhs.abs())
                .max(f64::MIN_POSITIVE)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Lemma6Report {
    pub core_is_m: bool,
    pub tree: bool,
}

/// M-matrix and rooted-spanning-tree checks for a sign-inconsistent pair.
pub fn verify_lemma6(pair: &NetworkPair) -> Result<Lemma6Report> {
    if sign_consistency(pair).is_consistent() {
        return Err(Error::SignConsistent);
    }
    Ok(Lemma6Report {
        core_is_m: is_m_matrix(&m_matrix_core(pair)?),
        tree: root_reaches_all(&augmented_digraph(pair)?),
    })
}

/// Smallest entry of a matrix.
pub fn min_entry(m: &Matrix) -> f64 {
    m.data().iter().copied().fold(f64::INFINITY, f64::min)
}
