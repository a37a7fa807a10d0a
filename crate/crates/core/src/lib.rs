//! Analysis and simulation of directed signed networks whose agents are
//! coupled through two nonidentical signed digraphs.
//!
//! The crate is `no_std` (it needs `alloc`) and covers the whole decision
//! pipeline:
//!
//! * [`sgraph`]: signed digraphs, Laplacians, sign-consistency of a pair and
//!   the union of the two layers.
//! * [`balance`]: structural balance with gauge recovery.
//! * [`linalg`]: the small dense kernel (LU, determinants, Jacobi
//!   eigenvalues, Lyapunov equations, left null vectors).
//! * [`stability`]: Lyapunov certificates `W`/`H`, the gain indices `mu` and
//!   `zeta`, and the M-matrix machinery used for sign-inconsistent pairs.
//! * [`dynamics`]: the coupled first/second-order system, its RK4
//!   integration, outcome classification and theory-vs-simulation
//!   reconciliation.
//! * [`generate`]: seeded generators of pairs with prescribed sign structure.

#![no_std]
// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(feature = "std")]
extern crate std;

pub mod balance;
pub mod dynamics;
mod error;
pub mod generate;
pub mod linalg;
pub mod sgraph;
pub mod stability;

pub use balance::{apply_gauge, structural_balance, verify_gauge, Balance, GaugeVector};
pub use dynamics::{
    classify_outcome, predict, predicted_limit, reconcile, simulate, Outcome, Prediction,
    ReconcileReport, SimParams, State, Trajectory,
};
pub use error::{Error, Result};
pub use linalg::{LinalgError, Matrix};
pub use sgraph::{
    sign_consistency, union_support, Consistency, DigraphSupport, GraphError, NetworkPair,
    SignedDigraph,
};
pub use stability::{compute_mu, compute_zeta, select_gain, GainAnalysis, IndexAnalysis};
