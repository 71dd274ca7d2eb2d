//! Monte-Carlo evaluation of predictor-prescriptor pairs: disappointment
//! curves, decay-rate regression, frontiers, the newsvendor scenario, the
//! Sanov check and CSV output.

mod config;
mod csv_io;
mod decay;
mod frontier;
mod newsvendor;
mod sanov;

pub use config::{ConfigFile, ExperimentConfig};
pub use csv_io::{
    read_curve_csv, read_frontier_csv, write_csv, write_curve_records, write_frontier_csv, write_frontier_records,
    CURVE_HEADER, FRONTIER_HEADER,
};
pub use decay::{estimate_decay_rate, DecayEstimate};
pub use frontier::{frontier, frontier_dominance, DominanceCheck, FrontierPoint};
pub use newsvendor::{newsvendor_optimum, newsvendor_scenario, NEWSVENDOR_COST, NEWSVENDOR_PRICE};
pub use sanov::{sanov_check, sanov_predicted_rate, HalfSpace, SanovReport};

use rayon::prelude::*;

use crate::dro::{model_cost, predictor, prescriptor};
use crate::error::{Error, Result};
use crate::processes::simulate_with;
use crate::rng;
use crate::statistics::{asymptotic_statistic, compute};

/// Aggregated outcome of all trials at one horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub horizon: usize,
    pub trials: usize,
    pub disappointments: usize,
    pub p_hat: f64,
    pub mean_in_sample: f64,
    pub se_in_sample: f64,
    pub mean_out_of_sample: f64,
    pub spec: String,
    pub radius: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DisappointmentCurve {
    pub points: Vec<CurvePoint>,
}

#[derive(Debug, Clone, Copy)]
struct TrialOutcome {
    in_sample: f64,
    out_of_sample: f64,
    disappointed: bool,
}

/// Estimates the disappointment probability and the mean in- and
/// out-of-sample cost of the prescribed decision at every horizon.
///
/// Trial `k` at horizon index `i` draws from the stream derived from
/// `(seed, i, k)`, so the result does not depend on how trials are scheduled.
pub fn run_curve(config: &ExperimentConfig) -> Result<DisappointmentCurve> {
    config.validate()?;
    let truth = asymptotic_statistic(&config.process, config.statistic)?;
    let mut points = Vec::with_capacity(config.tgrid.len());
    for (ti, &horizon) in config.tgrid.iter().enumerate() {
        let outcomes: Vec<TrialOutcome> = (0..config.trials)
            .into_par_iter()
            .map(|trial| {
                run_trial(config, &truth, ti, horizon, trial).map_err(|e| Error::Trial {
                    horizon,
                    trial,
                    source: Box::new(e),
                })
            })
            .collect::<Result<_>>()?;
        points.push(aggregate(config, horizon, &outcomes));
    }
    Ok(DisappointmentCurve { points })
}

fn run_trial(config: &ExperimentConfig, truth: &[f64], ti: usize, horizon: usize, trial: usize) -> Result<TrialOutcome> {
    let mut stream = rng::stream(config.seed, &[ti as u64, trial as u64]);
    let traj = simulate_with(&config.process, horizon, &mut stream)?;
    let stat = compute(&config.process, config.statistic, &traj)?;
    let predictions = predictor(&config.losses, &stat, &config.spec)?;
    let x = prescriptor(&predictions)?;
    let in_sample = predictions[x].value;
    let out_of_sample = model_cost(config.statistic, config.losses.row(x), truth);
    Ok(TrialOutcome { in_sample, out_of_sample, disappointed: out_of_sample > in_sample })
}

fn aggregate(config: &ExperimentConfig, horizon: usize, outcomes: &[TrialOutcome]) -> CurvePoint {
    let n = outcomes.len() as f64;
    let disappointments = outcomes.iter().filter(|o| o.disappointed).count();
    let mean_in = outcomes.iter().map(|o| o.in_sample).sum::<f64>() / n;
    let mean_out = outcomes.iter().map(|o| o.out_of_sample).sum::<f64>() / n;
    let var_in = if outcomes.len() > 1 {
        outcomes.iter().map(|o| (o.in_sample - mean_in).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    CurvePoint {
        horizon,
        trials: outcomes.len(),
        disappointments,
        p_hat: disappointments as f64 / n,
        mean_in_sample: mean_in,
        se_in_sample: (var_in / n).sqrt(),
        mean_out_of_sample: mean_out,
        spec: config.spec.name().to_string(),
        radius: config.spec.radius(),
        seed: config.seed,
    }
}
