use rayon::prelude::*;

use super::decay::fit_log_linear;
use super::DecayEstimate;
use crate::error::{Error, Result};
use crate::ext::ExtendedReal;
use crate::optim::golden_min;
use crate::processes::{FiniteIidModel, ProcessModel, Trajectory, simulate_with};
use crate::rng;

/// The event `<coeffs, s> >= threshold` on the empirical distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfSpace {
    pub coeffs: Vec<f64>,
    pub threshold: f64,
}

impl HalfSpace {
    /// `s_k >= threshold` for the 1-based state `k`.
    pub fn component(d: usize, k: usize, threshold: f64) -> Self {
        let mut coeffs = vec![0.0; d];
        coeffs[k - 1] = 1.0;
        HalfSpace { coeffs, threshold }
    }

    fn contains_counts(&self, counts: &[usize], horizon: usize) -> bool {
        let t = horizon as f64;
        let v: f64 = self.coeffs.iter().zip(counts).map(|(a, &c)| a * c as f64 / t).sum();
        // Lattice points on the boundary must count as inside.
        v >= self.threshold - 1e-12
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SanovReport {
    pub measured: DecayEstimate,
    pub predicted: ExtendedReal,
    /// `(T, hits)` per horizon.
    pub hits: Vec<(usize, usize)>,
    pub trials: usize,
}

/// `inf { D(s || theta) : <a, s> >= c }`, evaluated through the concave dual
/// `sup_{lambda >= 0} lambda c - log sum_i theta_i e^{lambda a_i}`.
pub fn sanov_predicted_rate(theta: &[f64], event: &HalfSpace) -> Result<ExtendedReal> {
    if theta.len() != event.coeffs.len() {
        return Err(Error::Usage("event and model dimensions differ".into()));
    }
    let mean: f64 = theta.iter().zip(&event.coeffs).map(|(t, a)| t * a).sum();
    if mean >= event.threshold {
        return Ok(ExtendedReal::ZERO);
    }
    let top = event.coeffs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if top < event.threshold {
        return Ok(ExtendedReal::PosInfinity);
    }
    let dual = |lambda: f64| {
        let shifted: f64 = theta.iter().zip(&event.coeffs).map(|(t, a)| t * (lambda * (a - top)).exp()).sum();
        lambda * (event.threshold - top) - shifted.ln()
    };
    let mut hi = 1.0;
    while dual(2.0 * hi) > dual(hi) && hi < 1e12 {
        hi *= 2.0;
    }
    let (_, neg) = golden_min(|l| -dual(l), 0.0, 2.0 * hi, 1e-12);
    Ok(ExtendedReal::Finite((-neg).max(0.0)))
}

/// Measures `P[S_T in event]` by simulation at each horizon and regresses its
/// logarithm on `T`; also returns the rate predicted by Sanov's theorem.
pub fn sanov_check(
    model: &FiniteIidModel,
    event: &HalfSpace,
    tgrid: &[usize],
    trials: usize,
    seed: u64,
) -> Result<SanovReport> {
    if trials == 0 || tgrid.is_empty() {
        return Err(Error::Config("sanov check needs trials and a T grid".into()));
    }
    let predicted = sanov_predicted_rate(model.probs(), event)?;
    let process = ProcessModel::FiniteIid(model.clone());
    let d = model.num_states();
    let mut hits = Vec::with_capacity(tgrid.len());
    for (ti, &horizon) in tgrid.iter().enumerate() {
        let count = (0..trials)
            .into_par_iter()
            .map(|trial| -> Result<usize> {
                let mut stream = rng::stream(seed, &[ti as u64, trial as u64]);
                let traj = simulate_with(&process, horizon, &mut stream)?;
                let Trajectory::Discrete { states, .. } = traj else { unreachable!("finite model") };
                let mut counts = vec![0usize; d];
                states.iter().for_each(|&s| counts[s - 1] += 1);
                Ok(usize::from(event.contains_counts(&counts, horizon)))
            })
            .collect::<Result<Vec<usize>>>()?
            .into_iter()
            .sum();
        hits.push((horizon, count));
    }
    let pairs: Vec<(f64, f64)> = hits
        .iter()
        .filter(|(_, c)| *c > 0)
        .map(|&(t, c)| (t as f64, (c as f64 / trials as f64).ln()))
        .collect();
    let measured = fit_log_linear(&pairs)?;
    Ok(SanovReport { measured, predicted, hits, trials })
}
