//! Mixed first/second-order agent dynamics.
//!
//! Each agent `i` carries a position `x_i` and an auxiliary state `y_i`:
//!
//! ```text
//! x' = -L_{B^c} x + y
//! y' = -k L_{B^d} x - k y
//! ```
//!
//! The change of variables `Y = Theta X` with `Theta = [[kI, I], [I, 0]]`
//! turns the system matrix into `Gamma = [[0, -k (L_c + L_d)], [I, -(kI + L_c)]]`.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::balance::GaugeVector;
use crate::linalg::{left_null_unit, vec_norm_inf, Matrix};
use crate::sgraph::{laplacian, NetworkPair};
use crate::stability::{
    canonical_union, compute_index, Branch, GainAnalysis, IndexAnalysis, SelectorMatrices,
};
use crate::{Error, Result};

/// Integration and stopping parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimParams {
    pub h: f64,
    pub t_max: f64,
    pub tol_stop: f64,
    pub sample_stride: usize,
    pub overflow_guard: f64,
    /// Consecutive samples with `|X'|_inf <= tol_stop` required to stop early.
    pub stop_window: usize,
}

impl Default for SimParams {
    fn default() -> Self {
        Self {
            h: 1e-3,
            t_max: 200.0,
            tol_stop: 1e-9,
            sample_stride: 100,
            overflow_guard: 1e12,
            stop_window: 10,
        }
    }
}

impl SimParams {
    fn validate(&self) -> Result<()> {
        let positive = |name, value: f64| {
            if value > 0.0 && value.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter { name, value })
            }
        };
        positive("h", self.h)?;
        positive("t_max", self.t_max)?;
        positive("overflow_guard", self.overflow_guard)?;
        if !(self.tol_stop >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "tol_stop",
                value: self.tol_stop,
            });
        }
        if self.sample_stride == 0 {
            return Err(Error::InvalidParameter {
                name: "sample_stride",
                value: 0.0,
            });
        }
        Ok(())
    }
}

/// Default convergence tolerance for outcome classification.
pub const TOL_CONV: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl State {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        assert_eq!(x.len(), y.len(), "x and y must have equal length");
        Self { x, y }
    }

    /// Splits a stacked `[x; y]` vector.
    pub fn from_stacked(v: &[f64]) -> Self {
        let n = v.len() / 2;
        Self {
            x: v[..n].to_vec(),
            y: v[n..].to_vec(),
        }
    }

    pub fn stacked(&self) -> Vec<f64> {
        let mut v = self.x.clone();
        v.extend_from_slice(&self.y);
        v
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn norm_inf(&self) -> f64 {
        vec_norm_inf(&self.x).max(vec_norm_inf(&self.y))
    }
}

/// Sampled solution of the network dynamics.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<State>,
    pub k: f64,
    pub h: f64,
}

impl Trajectory {
    pub fn final_state(&self) -> &State {
        self.states
            .last()
            .expect("trajectory holds at least the initial state")
    }

    pub fn final_time(&self) -> f64 {
        *self
            .times
            .last()
            .expect("trajectory holds at least the initial time")
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// `[[-L_c, I], [-k L_d, -k I]]`.
pub fn system_matrix(pair: &NetworkPair, k: f64) -> Matrix {
    let n = pair.n();
    let id = Matrix::identity(n);
    Matrix::from_blocks(
        &-&laplacian(pair.bc()),
        &id,
        &laplacian(pair.bd()).scale(-k),
        &id.scale(-k),
    )
}

/// `[[0, -k (L_c + L_d)], [I, -(kI + L_c)]]`.
pub fn gamma_matrix(pair: &NetworkPair, k: f64) -> Matrix {
    let n = pair.n();
    let id = Matrix::identity(n);
    Matrix::from_blocks(
        &Matrix::zeros(n, n),
        &pair.laplacian_sum(1.0).scale(-k),
        &id,
        &-&(&id.scale(k) + &laplacian(pair.bc())),
    )
}

/// `[[kI, I], [I, 0]]`.
pub fn theta_matrix(n: usize, k: f64) -> Matrix {
    let id = Matrix::identity(n);
    Matrix::from_blocks(&id.scale(k), &id, &id, &Matrix::zeros(n, n))
}

/// `[[0, I], [I, -kI]]`.
pub fn theta_inverse_matrix(n: usize, k: f64) -> Matrix {
    let id = Matrix::identity(n);
    Matrix::from_blocks(&Matrix::zeros(n, n), &id, &id, &id.scale(-k))
}

/// `Y = (k x + y, x)`.
pub fn theta_transform(s: &State, k: f64) -> Vec<f64> {
    let mut out: Vec<f64> = s.x.iter().zip(&s.y).map(|(x, y)| k * x + y).collect();
    out.extend_from_slice(&s.x);
    out
}

/// Inverse of [`theta_transform`]: `x = Y_2`, `y = Y_1 - k Y_2`.
pub fn inverse_theta_transform(yv: &[f64], k: f64) -> State {
    let n = yv.len() / 2;
    let (top, bottom) = yv.split_at(n);
    State {
        x: bottom.to_vec(),
        y: top.iter().zip(bottom).map(|(a, b)| a - k * b).collect(),
    }
}

/// One classical RK4 step for `X' = A X`, evaluated stage by stage.
pub fn rk4_step(a: &Matrix, x: &[f64], h: f64) -> Vec<f64> {
    let axpy = |base: &[f64], dir: &[f64], s: f64| -> Vec<f64> {
        base.iter().zip(dir).map(|(b, d)| b + s * d).collect()
    };
    let k1 = a.mul_vec(x);
    let k2 = a.mul_vec(&axpy(x, &k1, 0.5 * h));
    let k3 = a.mul_vec(&axpy(x, &k2, 0.5 * h));
    let k4 = a.mul_vec(&axpy(x, &k3, h));
    (0..x.len())
        .map(|i| x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect()
}

/// Matrix of one RK4 step for a linear autonomous field:
/// `I + hA + (hA)^2/2 + (hA)^3/6 + (hA)^4/24`.
pub fn rk4_propagator(a: &Matrix, h: f64) -> Matrix {
    let ha = a.scale(h);
    let mut out = Matrix::identity(a.rows());
    let mut term = Matrix::identity(a.rows());
    for p in 1..=4 {
        term = (&term * &ha).scale(1.0 / p as f64);
        out = &out + &term;
    }
    out
}

fn check_state(n: usize, v: &[f64]) -> Result<()> {
    if v.len() != n {
        return Err(Error::StateDimension {
            expected: n,
            found: v.len(),
        });
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "initial state",
            value: f64::NAN,
        });
    }
    Ok(())
}

/// Integrates the network from `(x0, y0)` with fixed-step RK4.
///
/// Samples are kept every `sample_stride` steps and at the last step.
/// Integration stops early once `|X'|_inf <= tol_stop` has held for
/// `stop_window` consecutive samples.
pub fn simulate(
    pair: &NetworkPair,
    k: f64,
    x0: &[f64],
    y0: &[f64],
    params: &SimParams,
) -> Result<Trajectory> {
    params.validate()?;
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "k",
            value: k,
        });
    }
    let n = pair.n();
    check_state(n, x0)?;
    check_state(n, y0)?;

    let a = system_matrix(pair, k);
    let step = rk4_propagator(&a, params.h);
    let steps = libm::ceil(params.t_max / params.h * (1.0 - 1e-12)) as u64;

    let mut x = State::new(x0.to_vec(), y0.to_vec()).stacked();
    let mut times = vec![0.0];
    let mut states = vec![State::from_stacked(&x)];
    let mut calm = 0usize;

    for s in 1..=steps {
        x = step.mul_vec(&x);
        if s % params.sample_stride as u64 != 0 && s != steps {
            continue;
        }
        let t = s as f64 * params.h;
        let size = vec_norm_inf(&x);
        if !(size <= params.overflow_guard) {
            return Err(Error::DivergenceDetected { t });
        }
        times.push(t);
        states.push(State::from_stacked(&x));
        if vec_norm_inf(&a.mul_vec(&x)) <= params.tol_stop {
            calm += 1;
            if calm >= params.stop_window {
                break;
            }
        } else {
            calm = 0;
        }
    }
    Ok(Trajectory {
        times,
        states,
        k,
        h: params.h,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum InconclusiveReason {
    /// `|y(T)|_inf` above tolerance.
    AuxiliaryNotSettled { y_norm: f64 },
    /// Spread of `|x_i(T)|` above tolerance.
    MagnitudesSpread { stdev: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Polarization { theta: f64, signs: Vec<i8> },
    Neutralization,
    Inconclusive { reason: InconclusiveReason },
}

impl Outcome {
    pub fn label(&self) -> &'static str {
        match self {
            Outcome::Polarization { .. } => "polarization",
            Outcome::Neutralization => "neutralization",
            Outcome::Inconclusive { .. } => "inconclusive",
        }
    }
}

/// Classifies the end state of a trajectory.
pub fn classify_outcome(traj: &Trajectory, tol_conv: f64) -> Outcome {
    classify_state(traj.final_state(), tol_conv)
}

pub fn classify_state(s: &State, tol_conv: f64) -> Outcome {
    let x_norm = vec_norm_inf(&s.x);
    let y_norm = vec_norm_inf(&s.y);
    if x_norm <= tol_conv && y_norm <= tol_conv {
        return Outcome::Neutralization;
    }
    if y_norm > tol_conv {
        return Outcome::Inconclusive {
            reason: InconclusiveReason::AuxiliaryNotSettled { y_norm },
        };
    }
    let n = s.x.len() as f64;
    let theta = s.x.iter().map(|v| v.abs()).sum::<f64>() / n;
    let var =
        s.x.iter()
            .map(|v| (v.abs() - theta) * (v.abs() - theta))
            .sum::<f64>()
            / n;
    let stdev = libm::sqrt(var);
    if stdev > tol_conv {
        return Outcome::Inconclusive {
            reason: InconclusiveReason::MagnitudesSpread { stdev },
        };
    }
    let signs =
        s.x.iter()
            .map(|&v| {
                if v.abs() <= tol_conv {
                    0
                } else if v > 0.0 {
                    1
                } else {
                    -1
                }
            })
            .collect();
    Outcome::Polarization { theta, signs }
}

/// Behaviour the theory predicts once `k` exceeds the gain index.
#[derive(Debug, Clone, PartialEq)]
pub enum Prediction {
    /// Limit `{nu^T D [x0 + y0 / k]} D 1`, with `nu^T (D L_B D) = 0` and
    /// `nu^T 1 = 1`.
    Polarization {
        gauge: GaugeVector,
        nu: Vec<f64>,
    },
    Neutralization,
}

impl Prediction {
    pub fn label(&self) -> &'static str {
        match self {
            Prediction::Polarization { .. } => "polarization",
            Prediction::Neutralization => "neutralization",
        }
    }

    /// Predicted limit of `x(t)`; `y(t)` always tends to zero.
    pub fn limit_x(&self, k: f64, x0: &[f64], y0: &[f64]) -> Vec<f64> {
        match self {
            Prediction::Neutralization => vec![0.0; x0.len()],
            Prediction::Polarization { gauge, nu } => polarization_limit(gauge, nu, k, x0, y0),
        }
    }
}

fn polarization_limit(gauge: &GaugeVector, nu: &[f64], k: f64, x0: &[f64], y0: &[f64]) -> Vec<f64> {
    let shifted: Vec<f64> = x0.iter().zip(y0).map(|(x, y)| x + y / k).collect();
    let level: f64 = nu
        .iter()
        .zip(gauge.apply(&shifted))
        .map(|(a, b)| a * b)
        .sum();
    gauge.to_f64().into_iter().map(|d| level * d).collect()
}

/// Normalized left null vector of `D L_B D` for the canonical union.
pub fn consensus_weights(pair: &NetworkPair, gauge: &GaugeVector) -> Result<Vec<f64>> {
    if gauge.len() != pair.n() {
        return Err(Error::GaugeDimension {
            expected: pair.n(),
            found: gauge.len(),
        });
    }
    let d = gauge.as_matrix();
    let l = laplacian(&canonical_union(pair)?);
    Ok(left_null_unit(&(&(&d * &l) * &d))?)
}

/// Closed-form polarization limit of `x(t)`.
pub fn predicted_limit(
    pair: &NetworkPair,
    k: f64,
    x0: &[f64],
    y0: &[f64],
    gauge: &GaugeVector,
) -> Result<Vec<f64>> {
    if !(k > 0.0) {
        return Err(Error::InvalidParameter {
            name: "k",
            value: k,
        });
    }
    check_state(pair.n(), x0)?;
    check_state(pair.n(), y0)?;
    let nu = consensus_weights(pair, gauge)?;
    Ok(polarization_limit(gauge, &nu, k, x0, y0))
}

fn prediction_for(pair: &NetworkPair, analysis: &IndexAnalysis) -> Result<Prediction> {
    Ok(match &analysis.branch {
        Branch::ConsistentBalanced { gauge } => Prediction::Polarization {
            gauge: gauge.clone(),
            nu: consensus_weights(pair, gauge)?,
        },
        Branch::ConsistentUnbalanced | Branch::Inconsistent => Prediction::Neutralization,
    })
}

/// Theoretical behaviour and gain for a pair with strongly connected union.
pub fn predict(pair: &NetworkPair, delta: f64, margin: f64) -> Result<(Prediction, GainAnalysis)> {
    let analysis = compute_index(pair, delta)?;
    let prediction = prediction_for(pair, &analysis)?;
    Ok((prediction, GainAnalysis::new(analysis, margin)?))
}

/// Quadratic Lyapunov function along trajectories.
///
/// With certificate `P` and `u`, `v` the coordinates it acts on,
/// `V = u^T P u + (2/k) u^T P v + (delta/k^2) v^T P v`. In the balanced case
/// `P = W` and `(u, v) = (E D x, E D y)`; otherwise `P = H` and
/// `(u, v) = (x, y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LyapunovFunction {
    p: Matrix,
    reduction: Option<Matrix>,
    delta: f64,
    k: f64,
}

impl LyapunovFunction {
    pub fn new(analysis: &IndexAnalysis, k: f64) -> Result<Self> {
        let reduction = match &analysis.branch {
            Branch::ConsistentBalanced { gauge } => {
                let sel = SelectorMatrices::new(gauge.len())?;
                Some(&sel.e * &gauge.as_matrix())
            }
            _ => None,
        };
        Ok(Self {
            p: analysis.certificate.matrix.clone(),
            reduction,
            delta: analysis.delta,
            k,
        })
    }

    pub fn value(&self, s: &State) -> f64 {
        let (u, v) = match &self.reduction {
            Some(ed) => (ed.mul_vec(&s.x), ed.mul_vec(&s.y)),
            None => (s.x.clone(), s.y.clone()),
        };
        let form = |a: &[f64], b: &[f64]| -> f64 {
            a.iter().zip(self.p.mul_vec(b)).map(|(p, q)| p * q).sum()
        };
        form(&u, &u) + 2.0 / self.k * form(&u, &v) + self.delta / (self.k * self.k) * form(&v, &v)
    }
}

/// Verdict of a theory-vs-simulation comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    /// The gain does not exceed the index, so the theory makes no claim.
    InconclusiveByTheory,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReconcileReport {
    pub prediction: Prediction,
    pub gain: GainAnalysis,
    /// Gain used for the simulation.
    pub k: f64,
    pub outcome: Outcome,
    pub final_time: f64,
    pub final_state: State,
    pub limit_x: Vec<f64>,
    /// `|x(T) - limit_x|_inf`.
    pub deviation: f64,
    pub y_norm: f64,
    pub certificate_residual: f64,
    pub verdict: Verdict,
    pub note: Option<String>,
}

/// Predicts, simulates with the selected gain, classifies and compares.
pub fn reconcile(
    pair: &NetworkPair,
    delta: f64,
    margin: f64,
    x0: &[f64],
    y0: &[f64],
    params: &SimParams,
    tol_accept: f64,
) -> Result<ReconcileReport> {
    reconcile_at_gain(pair, delta, margin, None, x0, y0, params, tol_accept)
}

/// Like [`reconcile`], optionally simulating with a caller-chosen gain.
#[allow(clippy::too_many_arguments)]
pub fn reconcile_at_gain(
    pair: &NetworkPair,
    delta: f64,
    margin: f64,
    k_override: Option<f64>,
    x0: &[f64],
    y0: &[f64],
    params: &SimParams,
    tol_accept: f64,
) -> Result<ReconcileReport> {
    let (prediction, gain) = predict(pair, delta, margin)?;
    let k = k_override.unwrap_or(gain.k);
    let traj = simulate(pair, k, x0, y0, params)?;
    Ok(assess(prediction, gain, x0, y0, &traj, tol_accept))
}

/// Compares a simulated trajectory with the prediction. The gain is read
/// from the trajectory.
pub fn assess(
    prediction: Prediction,
    gain: GainAnalysis,
    x0: &[f64],
    y0: &[f64],
    traj: &Trajectory,
    tol_accept: f64,
) -> ReconcileReport {
    let k = traj.k;
    let outcome = classify_outcome(traj, tol_accept);
    let end = traj.final_state().clone();
    let limit_x = prediction.limit_x(k, x0, y0);
    let deviation = end
        .x
        .iter()
        .zip(&limit_x)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    let y_norm = vec_norm_inf(&end.y);

    let kinds_match = match (&prediction, &outcome) {
        (Prediction::Polarization { .. }, Outcome::Polarization { .. })
        | (Prediction::Neutralization, Outcome::Neutralization) => true,
        // a polarization limit of zero magnitude is indistinguishable from
        // neutralization
        (Prediction::Polarization { .. }, Outcome::Neutralization) => {
            vec_norm_inf(&limit_x) <= tol_accept
        }
        _ => false,
    };
    let (verdict, note) = if !(k > gain.index()) {
        (
            Verdict::InconclusiveByTheory,
            Some(alloc::format!(
                "k = {k} does not exceed the index {}",
                gain.index()
            )),
        )
    } else if kinds_match && deviation <= tol_accept && y_norm <= tol_accept {
        (Verdict::Pass, None)
    } else {
        (Verdict::Fail, None)
    };

    ReconcileReport {
        certificate_residual: gain.analysis.certificate.residual,
        prediction,
        gain,
        k,
        outcome,
        final_time: traj.final_time(),
        final_state: end,
        limit_x,
        deviation,
        y_norm,
        verdict,
        note,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sgraph::SignedDigraph;
    use approx::assert_abs_diff_eq;

    fn pair(n: usize, bc: &[(usize, usize, f64)], bd: &[(usize, usize, f64)]) -> NetworkPair {
        NetworkPair::new(
            SignedDigraph::from_arcs(n, bc.iter().copied()).unwrap(),
            SignedDigraph::from_arcs(n, bd.iter().copied()).unwrap(),
        )
        .unwrap()
    }

    fn empty(n: usize) -> NetworkPair {
        pair(n, &[], &[])
    }

    #[test]
    fn system_matrix_examples() {
        let a = system_matrix(&empty(2), 1.0);
        let id = Matrix::identity(2);
        let expected = Matrix::from_blocks(
            &Matrix::zeros(2, 2),
            &id,
            &Matrix::zeros(2, 2),
            &id.scale(-1.0),
        );
        assert_eq!(a, expected);
        assert_eq!(
            system_matrix(&empty(1), 3.0),
            Matrix::from_rows(&[[0.0, 1.0], [0.0, -3.0]])
        );
    }

    #[test]
    fn system_matrix_matches_per_agent_equations() {
        // x_i' = sum_j b_ij (x_j - sgn(b_ij) x_i) + y_i
        // y_i' = -k y_i + k sum_j b_ij (x_j - sgn(b_ij) x_i)
        let p = pair(
            3,
            &[(0, 1, 1.0), (1, 2, -2.0), (2, 0, 0.5)],
            &[(0, 2, -1.0), (2, 1, 3.0)],
        );
        let k = 1.7;
        let x = [0.3, -1.2, 2.0];
        let y = [1.0, 0.25, -0.5];
        let coupling = |g: &SignedDigraph, i: usize| -> f64 {
            g.arcs()
                .filter(|&(r, _, _)| r == i)
                .map(|(_, j, b)| b * (x[j] - b.signum() * x[i]))
                .sum()
        };
        let mut expected = vec![0.0; 6];
        for i in 0..3 {
            expected[i] = coupling(p.bc(), i) + y[i];
            expected[3 + i] = k * (coupling(p.bd(), i) - y[i]);
        }
        let got = system_matrix(&p, k).mul_vec(&State::new(x.to_vec(), y.to_vec()).stacked());
        for (g, e) in got.iter().zip(&expected) {
            assert_abs_diff_eq!(g, e, epsilon = 1e-14);
        }
    }

    #[test]
    fn gamma_examples() {
        let p = pair(2, &[], &[(0, 1, 1.0), (1, 0, -2.0)]);
        let k = 2.0;
        let g = gamma_matrix(&p, k);
        let ld = laplacian(p.bd());
        let id = Matrix::identity(2);
        assert_eq!(
            g,
            Matrix::from_blocks(&Matrix::zeros(2, 2), &ld.scale(-k), &id, &id.scale(-k))
        );
        assert_eq!(
            gamma_matrix(&empty(1), 4.0),
            Matrix::from_rows(&[[0.0, 0.0], [1.0, -4.0]])
        );
    }

    #[test]
    fn theta_examples() {
        let s = State::new(vec![0.0], vec![0.0]);
        assert_eq!(theta_transform(&s, 3.0), vec![0.0, 0.0]);
        let s = State::new(vec![1.0], vec![3.0]);
        assert_eq!(theta_transform(&s, 2.0), vec![5.0, 1.0]);
        let s = State::new(vec![0.5, -2.0], vec![1.25, 7.0]);
        assert_eq!(inverse_theta_transform(&theta_transform(&s, 0.75), 0.75), s);
        let th = theta_matrix(2, 0.75);
        assert_eq!(&theta_inverse_matrix(2, 0.75) * &th, Matrix::identity(4));
        assert_eq!(th.mul_vec(&s.stacked()), theta_transform(&s, 0.75));
    }

    #[test]
    fn propagator_equals_stagewise_rk4() {
        let p = pair(3, &[(0, 1, 1.0), (1, 2, -0.5)], &[(2, 0, 2.0)]);
        let a = system_matrix(&p, 1.3);
        let x = [0.1, -0.7, 1.1, 0.4, 0.0, -0.3];
        let h = 0.05;
        let direct = rk4_step(&a, &x, h);
        let via = rk4_propagator(&a, h).mul_vec(&x);
        for (u, v) in direct.iter().zip(&via) {
            assert_abs_diff_eq!(u, v, epsilon = 1e-14);
        }
    }

    #[test]
    fn zero_field_keeps_state() {
        let params = SimParams {
            t_max: 1.0,
            ..SimParams::default()
        };
        let x0 = [1.0, -2.0, 0.5];
        let traj = simulate(&empty(3), 2.0, &x0, &[0.0; 3], &params).unwrap();
        for s in &traj.states {
            assert_eq!(s.x, x0.to_vec());
            assert_eq!(s.y, vec![0.0; 3]);
        }
        // the derivative vanishes from the start, so the run stops early
        assert_eq!(traj.len(), 11);
    }

    #[test]
    fn isolated_agents_follow_closed_form() {
        let params = SimParams {
            t_max: 20.0,
            ..SimParams::default()
        };
        let k = 1.5;
        let x0 = [1.0, -1.0];
        let y0 = [2.0, 0.5];
        let traj = simulate(&empty(2), k, &x0, &y0, &params).unwrap();
        for (t, s) in traj.times.iter().zip(&traj.states) {
            for i in 0..2 {
                let decay = libm::exp(-k * t);
                assert_abs_diff_eq!(s.y[i], decay * y0[i], epsilon = 1e-10);
                assert_abs_diff_eq!(s.x[i], x0[i] + y0[i] / k * (1.0 - decay), epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn simulate_rejects_bad_parameters() {
        let p = empty(2);
        let bad_h = SimParams {
            h: 0.0,
            ..SimParams::default()
        };
        assert!(matches!(
            simulate(&p, 1.0, &[0.0; 2], &[0.0; 2], &bad_h),
            Err(Error::InvalidParameter { name: "h", .. })
        ));
        assert!(simulate(&p, 0.0, &[0.0; 2], &[0.0; 2], &SimParams::default()).is_err());
        assert!(matches!(
            simulate(&p, 1.0, &[0.0; 3], &[0.0; 2], &SimParams::default()),
            Err(Error::StateDimension { .. })
        ));
    }

    #[test]
    fn divergence_is_reported() {
        // a large gain with a coarse step leaves the RK4 stability region
        let p = pair(2, &[(0, 1, 1.0), (1, 0, 1.0)], &[]);
        let params = SimParams {
            h: 0.1,
            t_max: 100.0,
            sample_stride: 1,
            ..SimParams::default()
        };
        assert!(matches!(
            simulate(&p, 100.0, &[1.0, 0.0], &[1.0, 0.0], &params),
            Err(Error::DivergenceDetected { .. })
        ));
    }

    fn end_state(x: Vec<f64>, y: Vec<f64>) -> Trajectory {
        Trajectory {
            times: vec![0.0],
            states: vec![State::new(x, y)],
            k: 1.0,
            h: 1e-3,
        }
    }

    #[test]
    fn classification_examples() {
        let t = end_state(vec![2.0, -2.0, 2.0], vec![1e-6, 0.0, -1e-6]);
        assert_eq!(
            classify_outcome(&t, 1e-3),
            Outcome::Polarization {
                theta: 2.0,
                signs: vec![1, -1, 1]
            }
        );
        let t = end_state(vec![1e-5, -1e-4], vec![0.0, 1e-6]);
        assert_eq!(classify_outcome(&t, 1e-3), Outcome::Neutralization);
        let t = end_state(vec![1.0, 1.0], vec![0.5, 0.0]);
        assert!(matches!(
            classify_outcome(&t, 1e-3),
            Outcome::Inconclusive {
                reason: InconclusiveReason::AuxiliaryNotSettled { .. }
            }
        ));
        let t = end_state(vec![1.0, 3.0], vec![0.0, 0.0]);
        assert!(matches!(
            classify_outcome(&t, 1e-3),
            Outcome::Inconclusive {
                reason: InconclusiveReason::MagnitudesSpread { .. }
            }
        ));
    }

    #[test]
    fn predicted_limit_examples() {
        let p = pair(2, &[(0, 1, 1.0), (1, 0, 1.0)], &[]);
        let id = GaugeVector::identity(2);
        for k in [0.5, 1.0, 7.0] {
            let lim = predicted_limit(&p, k, &[1.0, 3.0], &[0.0, 0.0], &id).unwrap();
            assert_abs_diff_eq!(lim[0], 2.0, epsilon = 1e-14);
            assert_abs_diff_eq!(lim[1], 2.0, epsilon = 1e-14);
            let lim = predicted_limit(&p, k, &[1.0, 3.0], &[2.0 * k, 0.0], &id).unwrap();
            assert_abs_diff_eq!(lim[0], 3.0, epsilon = 1e-14);
            assert_abs_diff_eq!(lim[1], 3.0, epsilon = 1e-14);
        }
        let anta = pair(2, &[(0, 1, -1.0), (1, 0, -1.0)], &[]);
        let d = GaugeVector::new(vec![1, -1]);
        let lim = predicted_limit(&anta, 1.0, &[1.0, -1.0], &[0.0, 0.0], &d).unwrap();
        assert_abs_diff_eq!(lim[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(lim[1], -1.0, epsilon = 1e-14);
    }

    #[test]
    fn predict_dispatch() {
        let coop = pair(3, &[(1, 0, 1.0), (2, 1, 1.0)], &[(0, 2, 1.0)]);
        let (pred, gain) = predict(&coop, 2.0, 0.1).unwrap();
        match pred {
            Prediction::Polarization { gauge, .. } => assert_eq!(gauge, GaugeVector::identity(3)),
            other => panic!("expected polarization, got {other:?}"),
        }
        assert_abs_diff_eq!(gain.k, 1.1 * gain.index(), epsilon = 1e-12);

        let incons = pair(2, &[(0, 1, 1.0), (1, 0, 1.0)], &[(0, 1, -1.0)]);
        assert_eq!(
            predict(&incons, 2.0, 0.1).unwrap().0,
            Prediction::Neutralization
        );

        let tri = pair(3, &[(1, 0, 1.0), (2, 1, 1.0)], &[(0, 2, -1.0)]);
        assert_eq!(
            predict(&tri, 2.0, 0.1).unwrap().0,
            Prediction::Neutralization
        );

        let cut = pair(3, &[(1, 0, 1.0)], &[(2, 1, 1.0)]);
        assert_eq!(predict(&cut, 2.0, 0.1), Err(Error::NotStronglyConnected));
    }

    #[test]
    fn reconcile_end_to_end() {
        let balanced = pair(
            3,
            &[(1, 0, -1.0), (2, 1, 1.0)],
            &[(0, 2, -1.0), (1, 0, -0.5)],
        );
        let report = reconcile(
            &balanced,
            2.0,
            0.1,
            &[0.5, -0.2, 0.9],
            &[0.1, 0.3, -0.4],
            &SimParams::default(),
            TOL_CONV,
        )
        .unwrap();
        assert_eq!(report.verdict, Verdict::Pass, "{report:?}");
        assert!(matches!(report.outcome, Outcome::Polarization { .. }));

        let tri = pair(3, &[(1, 0, 1.0), (2, 1, 1.0)], &[(0, 2, -1.0)]);
        let report = reconcile(
            &tri,
            2.0,
            0.1,
            &[0.5, -0.2, 0.9],
            &[0.1, 0.3, -0.4],
            &SimParams::default(),
            TOL_CONV,
        )
        .unwrap();
        assert_eq!(report.verdict, Verdict::Pass);
        assert_eq!(report.outcome, Outcome::Neutralization);
    }

    #[test]
    fn reconcile_flags_gain_below_index() {
        let tri = pair(3, &[(1, 0, 1.0), (2, 1, 1.0)], &[(0, 2, -1.0)]);
        let (_, gain) = predict(&tri, 2.0, 0.1).unwrap();
        let report = reconcile_at_gain(
            &tri,
            2.0,
            0.1,
            Some(0.5 * gain.index()),
            &[0.5, -0.2, 0.9],
            &[0.0; 3],
            &SimParams::default(),
            TOL_CONV,
        )
        .unwrap();
        assert_eq!(report.verdict, Verdict::InconclusiveByTheory);
    }
}
