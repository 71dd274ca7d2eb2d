//! Summary statistics of trajectories and their large-sample limits.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::processes::{ProcessModel, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatisticKind {
    EmpiricalDist,
    DoubletDist,
    ScaledSampleMean,
    SampleMean,
    LeastSquaresCoeff,
    YuleWalkerCoeff,
}

impl StatisticKind {
    /// The statistic naturally paired with a process family.
    pub fn natural_for(model: &ProcessModel) -> StatisticKind {
        match model {
            ProcessModel::FiniteIid(_) => StatisticKind::EmpiricalDist,
            ProcessModel::Markov(_) => StatisticKind::DoubletDist,
            ProcessModel::Var(_) => StatisticKind::ScaledSampleMean,
            ProcessModel::ScalarAr(_) => StatisticKind::LeastSquaresCoeff,
            ProcessModel::Parametric(_) => StatisticKind::SampleMean,
        }
    }
}

/// A realisation of a statistic. Matrices are stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct StatisticValue {
    pub kind: StatisticKind,
    pub value: Vec<f64>,
    pub rows: usize,
    pub cols: usize,
    pub sample_size: usize,
}

impl StatisticValue {
    pub fn vector(kind: StatisticKind, value: Vec<f64>, sample_size: usize) -> Self {
        let rows = value.len();
        StatisticValue { kind, value, rows, cols: 1, sample_size }
    }

    pub fn scalar(&self) -> f64 {
        self.value[0]
    }
}

fn counts(states: &[usize], d: usize) -> Result<Vec<usize>> {
    let mut counts = vec![0usize; d];
    for &s in states {
        if s == 0 || s > d {
            return Err(Error::Data(format!("state {s} outside 1..={d}")));
        }
        counts[s - 1] += 1;
    }
    Ok(counts)
}

fn discrete_states(traj: &Trajectory) -> Result<&[usize]> {
    traj.states().ok_or_else(|| Error::Data("expected a finite-state trajectory".into()))
}

fn real_values(traj: &Trajectory) -> Result<(usize, &[f64])> {
    traj.values().ok_or_else(|| Error::Data("expected a real-valued trajectory".into()))
}

/// Relative visit frequencies of the states `1..=d`.
pub fn empirical_distribution(traj: &Trajectory, d: usize) -> Result<StatisticValue> {
    let states = discrete_states(traj)?;
    if states.is_empty() {
        return Err(Error::Data("empty trajectory".into()));
    }
    let t = states.len() as f64;
    let value = counts(states, d)?.into_iter().map(|c| c as f64 / t).collect();
    Ok(StatisticValue::vector(StatisticKind::EmpiricalDist, value, states.len()))
}

/// Relative frequencies of the transitions `(xi_{t-1}, xi_t)`, `t = 1..=T`.
pub fn doublet_distribution(traj: &Trajectory, m: usize) -> Result<StatisticValue> {
    let states = discrete_states(traj)?;
    let initial = traj
        .initial_state()
        .ok_or_else(|| Error::Data("doublet statistic needs the initial state xi_0".into()))?;
    if states.is_empty() {
        return Err(Error::Data("empty trajectory".into()));
    }
    let mut grid = vec![0usize; m * m];
    let mut prev = initial;
    for &s in std::iter::once(&initial).chain(states) {
        if s == 0 || s > m {
            return Err(Error::Data(format!("state {s} outside 1..={m}")));
        }
    }
    for &s in states {
        grid[(prev - 1) * m + (s - 1)] += 1;
        prev = s;
    }
    let t = states.len() as f64;
    Ok(StatisticValue {
        kind: StatisticKind::DoubletDist,
        value: grid.into_iter().map(|c| c as f64 / t).collect(),
        rows: m,
        cols: m,
        sample_size: states.len(),
    })
}

fn mean_vector(traj: &Trajectory) -> Result<(usize, DVector<f64>, usize)> {
    let (dim, values) = real_values(traj)?;
    let t = values.len() / dim;
    if t == 0 {
        return Err(Error::Data("empty trajectory".into()));
    }
    let mut sum = DVector::zeros(dim);
    for row in values.chunks(dim) {
        sum += DVector::from_column_slice(row);
    }
    Ok((dim, sum / t as f64, t))
}

/// Plain sample mean of a real-valued trajectory.
pub fn sample_mean(traj: &Trajectory) -> Result<StatisticValue> {
    let (_, mean, t) = mean_vector(traj)?;
    Ok(StatisticValue::vector(StatisticKind::SampleMean, mean.iter().copied().collect(), t))
}

/// `(I - A)` times the sample mean; consistent for the drift of a VAR process.
pub fn scaled_sample_mean(traj: &Trajectory, a: &DMatrix<f64>) -> Result<StatisticValue> {
    let (dim, mean, t) = mean_vector(traj)?;
    if a.shape() != (dim, dim) {
        return Err(Error::Data(format!("coefficient matrix is {:?}, trajectory has dimension {dim}", a.shape())));
    }
    let scaled = (DMatrix::identity(dim, dim) - a) * mean;
    Ok(StatisticValue::vector(StatisticKind::ScaledSampleMean, scaled.iter().copied().collect(), t))
}

/// Least-squares and Yule-Walker estimates of a scalar AR coefficient.
pub fn ar_coefficients(traj: &Trajectory) -> Result<(StatisticValue, StatisticValue)> {
    let (dim, x) = real_values(traj)?;
    if dim != 1 {
        return Err(Error::Data("AR coefficients need a scalar trajectory".into()));
    }
    if x.len() < 2 {
        return Err(Error::Data("AR coefficients need at least two observations".into()));
    }
    let num: f64 = x.windows(2).map(|w| w[0] * w[1]).sum();
    let lagged: f64 = x[..x.len() - 1].iter().map(|v| v * v).sum();
    let full = lagged + x[x.len() - 1] * x[x.len() - 1];
    if lagged == 0.0 || full == 0.0 {
        return Err(Error::DegenerateData("AR estimator denominator is zero".into()));
    }
    let t = x.len();
    Ok((
        StatisticValue::vector(StatisticKind::LeastSquaresCoeff, vec![num / lagged], t),
        StatisticValue::vector(StatisticKind::YuleWalkerCoeff, vec![num / full], t),
    ))
}

/// Evaluates the statistic of the given kind on a trajectory of `model`.
pub fn compute(model: &ProcessModel, kind: StatisticKind, traj: &Trajectory) -> Result<StatisticValue> {
    match (model, kind) {
        (ProcessModel::FiniteIid(m), StatisticKind::EmpiricalDist) => empirical_distribution(traj, m.num_states()),
        (ProcessModel::Markov(m), StatisticKind::DoubletDist) => doublet_distribution(traj, m.num_states()),
        (ProcessModel::Var(m), StatisticKind::ScaledSampleMean) => scaled_sample_mean(traj, m.coeff()),
        (ProcessModel::ScalarAr(_), StatisticKind::LeastSquaresCoeff) => Ok(ar_coefficients(traj)?.0),
        (ProcessModel::ScalarAr(_), StatisticKind::YuleWalkerCoeff) => Ok(ar_coefficients(traj)?.1),
        (ProcessModel::Parametric(_) | ProcessModel::Var(_), StatisticKind::SampleMean) => sample_mean(traj),
        _ => Err(incompatible(model, kind)),
    }
}

fn incompatible(model: &ProcessModel, kind: StatisticKind) -> Error {
    let family = match model {
        ProcessModel::FiniteIid(_) => "finite_iid",
        ProcessModel::Markov(_) => "markov",
        ProcessModel::Var(_) => "var",
        ProcessModel::ScalarAr(_) => "scalar_ar",
        ProcessModel::Parametric(_) => "parametric",
    };
    Error::Usage(format!("statistic {kind:?} is not defined for the {family} model"))
}

/// The in-probability limit `S_inf(theta)` of the statistic under `model`.
pub fn asymptotic_statistic(model: &ProcessModel, kind: StatisticKind) -> Result<Vec<f64>> {
    match (model, kind) {
        (ProcessModel::FiniteIid(m), StatisticKind::EmpiricalDist) => Ok(m.probs().to_vec()),
        (ProcessModel::Markov(m), StatisticKind::DoubletDist) => Ok(m.doublet().to_vec()),
        (ProcessModel::Var(m), StatisticKind::ScaledSampleMean) => Ok(m.drift().iter().copied().collect()),
        (ProcessModel::Var(m), StatisticKind::SampleMean) => Ok(m.stationary_mean().iter().copied().collect()),
        (ProcessModel::ScalarAr(m), StatisticKind::LeastSquaresCoeff | StatisticKind::YuleWalkerCoeff) => {
            Ok(vec![m.coeff()])
        }
        (ProcessModel::Parametric(m), StatisticKind::SampleMean) => Ok(m.family().mean(m.theta())),
        _ => Err(incompatible(model, kind)),
    }
}
