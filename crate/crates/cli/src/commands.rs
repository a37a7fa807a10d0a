use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use rayon::prelude::*;
use signet_core::balance::{structural_balance, Balance};
use signet_core::dynamics::{assess, predict, simulate, SimParams, Trajectory, Verdict, TOL_CONV};
use signet_core::generate::{random_initial_state, random_pair, Family, Rng};
use signet_core::linalg::lambda_min;
use signet_core::sgraph::{
    agent_order_sets, is_strongly_connected, safe_union_coefficients, sign_consistency,
    union_adjacency, union_support, Consistency,
};
use signet_core::stability::{
    augmented_digraph, compute_index, is_m_matrix, m_matrix_core, min_entry,
    recomposition_residual, root_reaches_all, xi_matrix, DeterminantIdentity,
};
use signet_core::Error as CoreError;

use crate::error::{CliError, CliResult, ExitStatus};
use crate::network::Network;
use crate::report::{
    prediction_report, AnalysisReport, BalanceReport, CertificateReport, ComparisonReport,
    ConsistencyReport, IndexReport, MMatrixReport, OrdersReport, OutcomeReport, SimulationReport,
    TrialReport, VerifyReport,
};
use crate::trajectory_csv::write_trajectory;

/// Overrides for values that may also come from the network file.
#[derive(Debug, Clone, Copy, Default)]
pub struct GainOptions {
    pub delta: Option<f64>,
    pub margin: Option<f64>,
}

impl GainOptions {
    fn resolve(&self, net: &Network) -> (f64, f64) {
        (
            self.delta.unwrap_or(net.delta),
            self.margin.unwrap_or(net.margin),
        )
    }
}

fn one_based((i, j): (usize, usize)) -> [usize; 2] {
    [i + 1, j + 1]
}

fn is_hypothesis(e: &CoreError) -> bool {
    matches!(CliError::from(e.clone()), CliError::Hypothesis(_))
}

/// Runs the full decision pipeline. Returns the report and the exit status;
/// hypothesis failures are recorded in the report rather than returned as
/// errors so that the partial analysis is still printed.
pub fn analyze(net: &Network, opts: GainOptions) -> CliResult<(AnalysisReport, ExitStatus)> {
    let pair = &net.pair;
    let (delta, margin) = opts.resolve(net);
    let consistency = sign_consistency(pair);
    let strongly_connected = is_strongly_connected(&union_support(pair));

    let (alpha, beta) = match consistency {
        Consistency::Consistent => (1.0, 1.0),
        Consistency::Inconsistent { .. } => safe_union_coefficients(pair),
    };
    let union = union_adjacency(pair, alpha, beta).map_err(|e| CliError::Input(e.to_string()))?;
    let balance = match structural_balance(&union) {
        Balance::Balanced { gauge } => BalanceReport {
            alpha,
            beta,
            balanced: true,
            gauge: Some(gauge.signs().to_vec()),
            conflict: None,
        },
        Balance::Unbalanced { conflict } => BalanceReport {
            alpha,
            beta,
            balanced: false,
            gauge: None,
            conflict: Some(one_based(conflict)),
        },
    };
    let orders = agent_order_sets(pair);
    let mut report = AnalysisReport {
        n: pair.n(),
        consistency: ConsistencyReport {
            consistent: consistency.is_consistent(),
            witness: match consistency {
                Consistency::Consistent => None,
                Consistency::Inconsistent { witness } => Some(one_based(witness)),
            },
        },
        strongly_connected,
        balance,
        agent_orders: OrdersReport {
            single_integrator: orders.single_integrator.iter().map(|i| i + 1).collect(),
            double_integrator: orders.double_integrator.iter().map(|i| i + 1).collect(),
        },
        certificate: None,
        index: None,
        prediction: None,
        m_matrix: None,
        hypothesis_failure: None,
    };

    if !consistency.is_consistent() && strongly_connected {
        report.m_matrix = Some(m_matrix_report(net)?);
    }

    match predict(pair, delta, margin) {
        Ok((prediction, gain)) => {
            let cert = &gain.analysis.certificate;
            report.certificate = Some(CertificateReport {
                matrix: crate::report::certificate_name(cert.kind),
                residual: cert.residual,
                lambda_min: lambda_min(&cert.matrix).map_err(CoreError::from)?,
            });
            report.index = Some(IndexReport::new(&gain.analysis, margin, gain.k));
            let k = net.k.unwrap_or(gain.k);
            report.prediction = Some(prediction_report(&prediction, k, &net.x0, &net.y0));
            Ok((report, ExitStatus::Success))
        }
        Err(e) if is_hypothesis(&e) => {
            log::info!("analysis stopped: {e}");
            report.hypothesis_failure = Some(e.to_string());
            Ok((report, ExitStatus::HypothesisFailure))
        }
        Err(e) => Err(e.into()),
    }
}

fn m_matrix_report(net: &Network) -> CliResult<MMatrixReport> {
    let pair = &net.pair;
    let core = m_matrix_core(pair)?;
    let xi = xi_matrix(pair)?;
    let det = DeterminantIdentity::compute(pair, &xi)?;
    Ok(MMatrixReport {
        core_is_m_matrix: is_m_matrix(&core),
        root_reaches_all: root_reaches_all(&augmented_digraph(pair)?),
        xi_min_entry: min_entry(&xi),
        recomposition_residual: recomposition_residual(pair, &xi)?,
        det_laplacian_sum: det.laplacian_sum,
        det_core: det.core,
        det_xi: det.xi,
    })
}

/// Gain index and selected gain.
pub fn gain(net: &Network, opts: GainOptions) -> CliResult<IndexReport> {
    let (delta, margin) = opts.resolve(net);
    let analysis = compute_index(&net.pair, delta)?;
    let k = signet_core::select_gain(analysis.index, margin)?;
    Ok(IndexReport::new(&analysis, margin, k))
}

#[derive(Debug, Clone, Default)]
pub struct SimulateOptions {
    pub gain: GainOptions,
    pub h: Option<f64>,
    pub t_max: Option<f64>,
}

/// Simulates the network. Uses the file's `k` when present, otherwise the
/// selected gain; compares with the prediction whenever the hypotheses hold.
pub fn simulate_network(
    net: &Network,
    opts: &SimulateOptions,
    out: Option<&Path>,
) -> CliResult<(SimulationReport, Trajectory)> {
    let (delta, margin) = opts.gain.resolve(net);
    let mut params = SimParams::default();
    if let Some(h) = opts.h {
        params.h = h;
    }
    if let Some(t) = opts.t_max {
        params.t_max = t;
    }
    let predicted = match predict(&net.pair, delta, margin) {
        Ok(p) => Some(p),
        Err(e) if is_hypothesis(&e) && net.k.is_some() => {
            log::warn!("no prediction available: {e}");
            None
        }
        Err(e) => return Err(e.into()),
    };
    let (k, k_source) = match (net.k, &predicted) {
        (Some(k), _) => (k, "file"),
        (None, Some((_, g))) => (g.k, "selected"),
        (None, None) => unreachable!("prediction failures without k return early"),
    };
    log::info!(
        "simulating with k = {k}, h = {}, t_max = {}",
        params.h,
        params.t_max
    );
    let traj = simulate(&net.pair, k, &net.x0, &net.y0, &params)?;
    log::debug!("{} samples, final time {}", traj.len(), traj.final_time());

    let comparison = predicted
        .map(|(p, g)| ComparisonReport::from(&assess(p, g, &net.x0, &net.y0, &traj, TOL_CONV)));
    let outcome = signet_core::dynamics::classify_outcome(&traj, TOL_CONV);

    if let Some(path) = out {
        let file = File::create(path)
            .map_err(|e| CliError::Input(format!("cannot create {}: {e}", path.display())))?;
        write_trajectory(BufWriter::new(file), &traj)?;
    }
    let report = SimulationReport {
        k,
        k_source,
        h: params.h,
        t_max: params.t_max,
        final_time: traj.final_time(),
        samples: traj.len(),
        outcome: OutcomeReport::from(&outcome),
        comparison,
        csv: out.map(|p| p.display().to_string()),
    };
    Ok((report, traj))
}

#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    pub family: Family,
    pub delta: f64,
    pub margin: f64,
}

fn run_trial(opts: &VerifyOptions, trial: usize, seed: u64) -> TrialReport {
    let mut rng = Rng::new(seed);
    let pair = random_pair(&mut rng, opts.n, opts.family);
    let (x0, y0) = random_initial_state(&mut rng, opts.n);
    let mut report = TrialReport {
        trial: trial + 1,
        seed,
        n: opts.n,
        k: None,
        outcome: None,
        comparison: None,
        error: None,
        passed: false,
    };
    let result = predict(&pair, opts.delta, opts.margin).and_then(|(p, g)| {
        let traj = simulate(&pair, g.k, &x0, &y0, &SimParams::default())?;
        Ok(assess(p, g, &x0, &y0, &traj, TOL_CONV))
    });
    match result {
        Ok(r) => {
            report.k = Some(r.k);
            report.outcome = Some(OutcomeReport::from(&r.outcome));
            report.passed = r.verdict == Verdict::Pass;
            report.comparison = Some(ComparisonReport::from(&r));
        }
        Err(e) => report.error = Some(e.to_string()),
    }
    report
}

/// Randomized theory-vs-simulation suite. Trial seeds come from one master
/// stream, so results do not depend on scheduling.
pub fn verify(opts: VerifyOptions) -> CliResult<VerifyReport> {
    if opts.n < 2 {
        return Err(CliError::Input(format!(
            "--n must be at least 2, got {}",
            opts.n
        )));
    }
    if opts.trials == 0 {
        return Err(CliError::Input("--trials must be at least 1".into()));
    }
    if !(opts.delta > 1.0 && opts.delta.is_finite()) {
        return Err(CoreError::DeltaOutOfRange(opts.delta).into());
    }
    if !(opts.margin > 0.0 && opts.margin.is_finite()) {
        return Err(CoreError::NonPositiveMargin(opts.margin).into());
    }
    let mut master = Rng::new(opts.seed);
    let seeds: Vec<u64> = (0..opts.trials).map(|_| master.next_u64()).collect();
    let results: Vec<TrialReport> = seeds
        .par_iter()
        .enumerate()
        .map(|(t, &s)| run_trial(&opts, t, s))
        .collect();
    let passed = results.iter().filter(|r| r.passed).count();
    log::info!("{passed}/{} trials pass", opts.trials);
    Ok(VerifyReport {
        family: opts.family.name(),
        n: opts.n,
        trials: opts.trials,
        seed: opts.seed,
        delta: opts.delta,
        margin: opts.margin,
        passed,
        results,
    })
}
