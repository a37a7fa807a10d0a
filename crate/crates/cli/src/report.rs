//! Reports. Every report serializes to JSON (`--json`) and renders to text
//! with the same content. Agent labels are 1-indexed.

use std::fmt::Write as _;

use serde::Serialize;
use signet_core::dynamics::{InconclusiveReason, Outcome, Prediction, ReconcileReport, Verdict};
use signet_core::stability::{Branch, CertificateKind, IndexAnalysis, IndexKind};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsistencyReport {
    pub consistent: bool,
    /// First arc `(i, j)` with opposite signs in the two layers.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<[usize; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BalanceReport {
    /// Coefficients of the union `alpha Bc + beta Bd` that was tested.
    pub alpha: f64,
    pub beta: f64,
    pub balanced: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gauge: Option<Vec<i8>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub conflict: Option<[usize; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrdersReport {
    /// Agents with no arc in `Bd`.
    pub single_integrator: Vec<usize>,
    /// Agents with no arc in `Bc`.
    pub double_integrator: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateReport {
    pub matrix: &'static str,
    pub residual: f64,
    pub lambda_min: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndexReport {
    pub branch: &'static str,
    pub name: &'static str,
    pub phi: &'static str,
    pub psi: &'static str,
    pub delta: f64,
    pub phi_lambda_max: f64,
    pub psi_lambda_max: f64,
    pub value: f64,
    pub margin: f64,
    pub k: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PredictionReport {
    pub behavior: &'static str,
    /// Gain the limit is evaluated at.
    pub k: f64,
    pub limit_x: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MMatrixReport {
    pub core_is_m_matrix: bool,
    pub root_reaches_all: bool,
    pub xi_min_entry: f64,
    pub recomposition_residual: f64,
    pub det_laplacian_sum: f64,
    pub det_core: f64,
    pub det_xi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub n: usize,
    pub consistency: ConsistencyReport,
    pub strongly_connected: bool,
    pub balance: BalanceReport,
    pub agent_orders: OrdersReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<CertificateReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub index: Option<IndexReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prediction: Option<PredictionReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m_matrix: Option<MMatrixReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hypothesis_failure: Option<String>,
}

pub fn branch_name(b: &Branch) -> &'static str {
    match b {
        Branch::ConsistentBalanced { .. } => "consistent-balanced",
        Branch::ConsistentUnbalanced => "consistent-unbalanced",
        Branch::Inconsistent => "inconsistent",
    }
}

pub fn certificate_name(kind: CertificateKind) -> &'static str {
    match kind {
        CertificateKind::BalancedW => "W",
        CertificateKind::UnbalancedH | CertificateKind::InconsistentH => "H",
    }
}

impl IndexReport {
    pub fn new(a: &IndexAnalysis, margin: f64, k: f64) -> Self {
        let balanced = matches!(a.branch, Branch::ConsistentBalanced { .. });
        Self {
            branch: branch_name(&a.branch),
            name: match a.kind {
                IndexKind::Mu => "mu",
                IndexKind::Zeta => "zeta",
            },
            phi: certificate_name(a.certificate.kind),
            psi: if balanced {
                "E D (Lc + delta Ld) D F"
            } else {
                "Lc + delta Ld"
            },
            delta: a.delta,
            phi_lambda_max: a.phi_lambda_max,
            psi_lambda_max: a.psi_lambda_max,
            value: a.index,
            margin,
            k,
        }
    }

    pub fn render(&self, out: &mut String) {
        let _ = writeln!(out, "branch: {}", self.branch);
        let _ = writeln!(out, "Phi = {}, Psi = {}", self.phi, self.psi);
        let _ = writeln!(
            out,
            "lambda_max(Phi) = {}, lambda_max(Psi Psi^T) = {}",
            self.phi_lambda_max, self.psi_lambda_max
        );
        let _ = writeln!(
            out,
            "{} = {} (delta = {})",
            self.name, self.value, self.delta
        );
        let _ = writeln!(out, "k = {} (margin = {})", self.k, self.margin);
    }
}

fn labels(v: &[usize]) -> String {
    if v.is_empty() {
        return "none".into();
    }
    v.iter()
        .map(|i| i.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

fn signs(v: &[i8]) -> String {
    v.iter()
        .map(|&s| {
            if s > 0 {
                "+1"
            } else if s < 0 {
                "-1"
            } else {
                "0"
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn floats(v: &[f64]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

impl AnalysisReport {
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "agents: {}", self.n);
        match self.consistency.witness {
            None => out.push_str("sign consistency: consistent\n"),
            Some([i, j]) => {
                let _ = writeln!(
                    out,
                    "sign consistency: inconsistent (arc {i} <- {j} has opposite signs)"
                );
            }
        }
        let _ = writeln!(
            out,
            "strongly connected union: {}",
            if self.strongly_connected { "yes" } else { "no" }
        );
        let b = &self.balance;
        let union = format!("{} Bc + {} Bd", b.alpha, b.beta);
        match (&b.gauge, b.conflict) {
            (Some(g), _) => {
                let _ = writeln!(
                    out,
                    "structural balance of {union}: balanced, gauge [{}]",
                    signs(g)
                );
            }
            (None, Some([i, j])) => {
                let _ = writeln!(
                    out,
                    "structural balance of {union}: unbalanced (conflict at arc {i} <- {j})"
                );
            }
            (None, None) => {
                let _ = writeln!(out, "structural balance of {union}: unbalanced");
            }
        }
        let _ = writeln!(
            out,
            "single-integrator agents: {}; double-integrator agents: {}",
            labels(&self.agent_orders.single_integrator),
            labels(&self.agent_orders.double_integrator)
        );
        if let Some(c) = &self.certificate {
            let _ = writeln!(
                out,
                "certificate {}: residual {:e}, lambda_min {}",
                c.matrix, c.residual, c.lambda_min
            );
        }
        if let Some(ix) = &self.index {
            ix.render(&mut out);
        }
        if let Some(p) = &self.prediction {
            let _ = writeln!(out, "prediction: {}", p.behavior);
            let _ = writeln!(
                out,
                "predicted limit of x at k = {}: [{}]",
                p.k,
                floats(&p.limit_x)
            );
        }
        if let Some(m) = &self.m_matrix {
            let _ = writeln!(
                out,
                "M-matrix core: {}; root reaches all agents: {}",
                m.core_is_m_matrix, m.root_reaches_all
            );
            let _ = writeln!(
                out,
                "Xi min entry {}, recomposition residual {:e}",
                m.xi_min_entry, m.recomposition_residual
            );
            let _ = writeln!(
                out,
                "det(Lc + Ld) = {} = {} * {}",
                m.det_laplacian_sum, m.det_core, m.det_xi
            );
        }
        if let Some(f) = &self.hypothesis_failure {
            let _ = writeln!(out, "hypothesis failed: {f}");
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutcomeReport {
    pub kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub signs: Option<Vec<i8>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

impl From<&Outcome> for OutcomeReport {
    fn from(o: &Outcome) -> Self {
        let mut r = OutcomeReport {
            kind: o.label(),
            theta: None,
            signs: None,
            reason: None,
        };
        match o {
            Outcome::Polarization { theta, signs } => {
                r.theta = Some(*theta);
                r.signs = Some(signs.clone());
            }
            Outcome::Neutralization => {}
            Outcome::Inconclusive { reason } => {
                r.reason = Some(match reason {
                    InconclusiveReason::AuxiliaryNotSettled { y_norm } => {
                        format!("|y(T)| = {y_norm:e} above tolerance")
                    }
                    InconclusiveReason::MagnitudesSpread { stdev } => {
                        format!("spread of |x_i(T)| = {stdev:e} above tolerance")
                    }
                })
            }
        }
        r
    }
}

impl OutcomeReport {
    fn summary(&self) -> String {
        match (self.theta, &self.reason) {
            (Some(t), _) => format!("{} θ={t}", self.kind),
            (None, Some(r)) => format!("{} ({r})", self.kind),
            _ => self.kind.to_string(),
        }
    }
}

pub fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::Pass => "pass",
        Verdict::Fail => "fail",
        Verdict::InconclusiveByTheory => "inconclusive-by-theory",
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub predicted: &'static str,
    pub index_name: &'static str,
    pub index: f64,
    pub limit_x: Vec<f64>,
    pub deviation: f64,
    pub y_norm: f64,
    pub verdict: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl From<&ReconcileReport> for ComparisonReport {
    fn from(r: &ReconcileReport) -> Self {
        Self {
            predicted: r.prediction.label(),
            index_name: match r.gain.analysis.kind {
                IndexKind::Mu => "mu",
                IndexKind::Zeta => "zeta",
            },
            index: r.gain.index(),
            limit_x: r.limit_x.clone(),
            deviation: r.deviation,
            y_norm: r.y_norm,
            verdict: verdict_name(r.verdict),
            note: r.note.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationReport {
    pub k: f64,
    pub k_source: &'static str,
    pub h: f64,
    pub t_max: f64,
    pub final_time: f64,
    pub samples: usize,
    pub outcome: OutcomeReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub comparison: Option<ComparisonReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv: Option<String>,
}

impl SimulationReport {
    pub fn summary_line(&self) -> String {
        let mut line = self.outcome.summary();
        if let Some(c) = &self.comparison {
            let _ = write!(line, " deviation={:e}", c.deviation);
        }
        line
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "k = {} ({}), h = {}, t_max = {}",
            self.k, self.k_source, self.h, self.t_max
        );
        let _ = writeln!(
            out,
            "stopped at t = {} after {} samples",
            self.final_time, self.samples
        );
        if let Some(c) = &self.comparison {
            let _ = writeln!(
                out,
                "predicted: {} ({} = {})",
                c.predicted, c.index_name, c.index
            );
            let _ = writeln!(out, "|y(T)| = {:e}", c.y_norm);
            let _ = writeln!(out, "verdict: {}", c.verdict);
            if let Some(n) = &c.note {
                let _ = writeln!(out, "note: {n}");
            }
        }
        if let Some(p) = &self.csv {
            let _ = writeln!(out, "trajectory written to {p}");
        }
        let _ = writeln!(out, "{}", self.summary_line());
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialReport {
    pub trial: usize,
    pub seed: u64,
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outcome: Option<OutcomeReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub comparison: Option<ComparisonReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub family: &'static str,
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    pub delta: f64,
    pub margin: f64,
    pub passed: usize,
    pub results: Vec<TrialReport>,
}

impl VerifyReport {
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "family {}, n = {}, seed = {}, delta = {}, margin = {}",
            self.family, self.n, self.seed, self.delta, self.margin
        );
        for t in &self.results {
            let status = if t.passed { "pass" } else { "FAIL" };
            match (&t.outcome, &t.comparison, &t.error) {
                (Some(o), Some(c), _) => {
                    let _ = writeln!(
                        out,
                        "trial {:>3}: {status} {} (predicted {}) deviation={:e} k={}",
                        t.trial,
                        o.summary(),
                        c.predicted,
                        c.deviation,
                        t.k.unwrap_or(f64::NAN)
                    );
                }
                (_, _, Some(e)) => {
                    let _ = writeln!(out, "trial {:>3}: {status} error: {e}", t.trial);
                }
                _ => {
                    let _ = writeln!(out, "trial {:>3}: {status}", t.trial);
                }
            }
        }
        let mut kinds: Vec<(&str, usize)> = Vec::new();
        for o in self.results.iter().filter_map(|t| t.outcome.as_ref()) {
            match kinds.iter_mut().find(|(k, _)| *k == o.kind) {
                Some(e) => e.1 += 1,
                None => kinds.push((o.kind, 1)),
            }
        }
        let tally = kinds
            .iter()
            .map(|(k, c)| format!("{c}/{} {k}", self.trials))
            .collect::<Vec<_>>()
            .join(", ");
        let _ = writeln!(out, "{}/{} trials pass ({tally})", self.passed, self.trials);
        out
    }
}

pub fn prediction_report(p: &Prediction, k: f64, x0: &[f64], y0: &[f64]) -> PredictionReport {
    PredictionReport {
        behavior: p.label(),
        k,
        limit_x: p.limit_x(k, x0, y0),
    }
}
