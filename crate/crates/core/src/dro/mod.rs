//! Distributionally robust predictors and prescriptors.
//!
//! Each solver returns the worst-case expected loss of one decision over an
//! ambiguity set around the observed statistic. [`predictor`] dispatches a
//! whole [`LossTable`] and [`prescriptor`] picks the decision.

mod autoregressive;
mod baselines;
mod entropy;
mod gaussian;
mod markov;

pub use autoregressive::{ar_ball_worst_case, ar_rate_ball};
pub use baselines::{moment_set_worst_case, wasserstein_set_worst_case, wasserstein_set_worst_case_lp};
pub use entropy::{entropy_dro_dual, entropy_primal_oracle, PrimalOracleOptions};
pub use gaussian::{ellipsoid_linear_worst_case, ellipsoid_linear_worst_case_mapped, AffineMap};
pub use markov::{markov_ball_worst_case, MarkovSolverOptions};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rates::{covariance_matrix, ArRateKind};
use crate::statistics::{StatisticKind, StatisticValue};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// The rate ball is nonempty and the value is the supremum over it.
    BallFeasible,
    /// The rate ball is empty and the value is the supremum over all models.
    BallEmpty,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredictorOutput {
    pub value: f64,
    pub worst_case: Option<Vec<f64>>,
    pub branch: Branch,
}

impl PredictorOutput {
    pub fn feasible(value: f64, worst_case: Option<Vec<f64>>) -> Self {
        PredictorOutput { value, worst_case, branch: Branch::BallFeasible }
    }
}

/// Losses `l(x, k)` of each decision `x` (rows) against the columns of the
/// statistic.
///
/// How a row turns into a cost `c(x, theta)` depends on the statistic:
/// finite-state and doublet statistics use `sum_k l(x, k) theta_k`, Gaussian
/// means use the linear form `l(x, .)^T theta`, and scalar AR coefficients
/// read the row as polynomial coefficients `sum_k l(x, k) theta^k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossTable {
    rows: usize,
    cols: usize,
    losses: Vec<f64>,
    decisions: Vec<String>,
}

impl LossTable {
    pub fn new(rows: usize, cols: usize, losses: Vec<f64>, decisions: Vec<String>) -> Result<Self> {
        if rows == 0 || cols == 0 || losses.len() != rows * cols {
            return Err(Error::Domain(format!("loss table needs {rows} x {cols} entries, got {}", losses.len())));
        }
        if decisions.len() != rows {
            return Err(Error::Domain("one decision label per row is required".into()));
        }
        if losses.iter().any(|l| !l.is_finite()) {
            return Err(Error::Domain("losses must be finite".into()));
        }
        Ok(LossTable { rows, cols, losses, decisions })
    }

    /// Rows labelled `1..=rows`.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Domain("ragged loss table".into()));
        }
        LossTable::new(n, cols, rows.concat(), (1..=n).map(|i| i.to_string()).collect())
    }

    pub fn num_decisions(&self) -> usize {
        self.rows
    }

    pub fn num_columns(&self) -> usize {
        self.cols
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.losses[x * self.cols..(x + 1) * self.cols]
    }

    pub fn decisions(&self) -> &[String] {
        &self.decisions
    }

    /// A copy with `shift` added to every entry.
    pub fn shifted(&self, shift: f64) -> LossTable {
        LossTable { losses: self.losses.iter().map(|l| l + shift).collect(), ..self.clone() }
    }
}

/// Ambiguity set around the statistic, with its radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AmbiguitySpec {
    /// Relative-entropy ball for finite-state i.i.d. data.
    Entropy { radius: f64 },
    /// Conditional-relative-entropy ball for Markov doublets.
    ConditionalEntropy {
        radius: f64,
        #[serde(default)]
        solver: Option<MarkovSolverOptions>,
    },
    /// Quadratic-rate ball for Gaussian means; `cov` is row-major.
    Ellipsoid { radius: f64, cov: Vec<f64> },
    ArBall { radius: f64, rate: ArRateKind },
    /// First `moments` raw moments within `radius` of the empirical ones.
    Moment {
        radius: f64,
        #[serde(default = "default_moments")]
        moments: usize,
    },
    Wasserstein { radius: f64 },
    /// Empirical cost plus `radius`.
    Penalized { radius: f64 },
    Empirical,
}

fn default_moments() -> usize {
    4
}

impl AmbiguitySpec {
    pub fn name(&self) -> &'static str {
        match self {
            AmbiguitySpec::Entropy { .. } => "entropy",
            AmbiguitySpec::ConditionalEntropy { .. } => "conditional_entropy",
            AmbiguitySpec::Ellipsoid { .. } => "ellipsoid",
            AmbiguitySpec::ArBall { .. } => "ar_ball",
            AmbiguitySpec::Moment { .. } => "moment",
            AmbiguitySpec::Wasserstein { .. } => "wasserstein",
            AmbiguitySpec::Penalized { .. } => "penalized",
            AmbiguitySpec::Empirical => "empirical",
        }
    }

    pub fn radius(&self) -> f64 {
        match self {
            AmbiguitySpec::Entropy { radius }
            | AmbiguitySpec::ConditionalEntropy { radius, .. }
            | AmbiguitySpec::Ellipsoid { radius, .. }
            | AmbiguitySpec::ArBall { radius, .. }
            | AmbiguitySpec::Moment { radius, .. }
            | AmbiguitySpec::Wasserstein { radius }
            | AmbiguitySpec::Penalized { radius } => *radius,
            AmbiguitySpec::Empirical => 0.0,
        }
    }

    /// The same kind of set with a different radius (no-op for `Empirical`).
    pub fn with_radius(&self, r: f64) -> AmbiguitySpec {
        let mut spec = self.clone();
        match &mut spec {
            AmbiguitySpec::Entropy { radius }
            | AmbiguitySpec::ConditionalEntropy { radius, .. }
            | AmbiguitySpec::Ellipsoid { radius, .. }
            | AmbiguitySpec::ArBall { radius, .. }
            | AmbiguitySpec::Moment { radius, .. }
            | AmbiguitySpec::Wasserstein { radius }
            | AmbiguitySpec::Penalized { radius } => *radius = r,
            AmbiguitySpec::Empirical => {}
        }
        spec
    }

    pub fn validate(&self) -> Result<()> {
        let r = self.radius();
        if !(r >= 0.0) || !r.is_finite() {
            return Err(Error::Domain(format!("radius {r} must be a finite nonnegative number")));
        }
        match self {
            AmbiguitySpec::Moment { moments: 0, .. } => Err(Error::Domain("moment set needs J >= 1".into())),
            AmbiguitySpec::Ellipsoid { cov, .. } => {
                let sigma = covariance_matrix(cov)?;
                sigma.cholesky().map(|_| ()).ok_or_else(|| Error::Domain("covariance is not positive definite".into()))
            }
            _ => Ok(()),
        }
    }
}

/// Model-based cost `c(x, theta)` of one loss row for a statistic kind.
pub fn model_cost(kind: StatisticKind, row: &[f64], theta: &[f64]) -> f64 {
    match kind {
        StatisticKind::LeastSquaresCoeff | StatisticKind::YuleWalkerCoeff => polynomial(row, theta[0]),
        _ => row.iter().zip(theta).map(|(l, t)| l * t).sum(),
    }
}

fn polynomial(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

fn incompatible(spec: &AmbiguitySpec, kind: StatisticKind) -> Error {
    Error::Usage(format!("ambiguity set '{}' does not apply to a {kind:?} statistic", spec.name()))
}

/// Worst-case cost of every decision in `table` under `spec` around `s`.
pub fn predictor(table: &LossTable, s: &StatisticValue, spec: &AmbiguitySpec) -> Result<Vec<PredictorOutput>> {
    spec.validate()?;
    let kind = s.kind;
    let vector_like = !matches!(kind, StatisticKind::LeastSquaresCoeff | StatisticKind::YuleWalkerCoeff);
    if vector_like && table.num_columns() != s.value.len() {
        return Err(Error::Usage(format!(
            "loss table has {} columns, statistic has {} entries",
            table.num_columns(),
            s.value.len()
        )));
    }
    let rows = 0..table.num_decisions();
    let nominal = |x: usize| model_cost(kind, table.row(x), &s.value);
    match (spec, kind) {
        (AmbiguitySpec::Empirical, _) => {
            Ok(rows.map(|x| PredictorOutput::feasible(nominal(x), Some(s.value.clone()))).collect())
        }
        (AmbiguitySpec::Penalized { radius }, _) => {
            Ok(rows.map(|x| PredictorOutput::feasible(nominal(x) + radius, Some(s.value.clone()))).collect())
        }
        (AmbiguitySpec::Entropy { radius }, StatisticKind::EmpiricalDist) => {
            rows.map(|x| entropy_dro_dual(table.row(x), &s.value, *radius)).collect()
        }
        (AmbiguitySpec::Moment { radius, moments }, StatisticKind::EmpiricalDist) => {
            rows.map(|x| moment_set_worst_case(table.row(x), &s.value, *radius, *moments)).collect()
        }
        (AmbiguitySpec::Wasserstein { radius }, StatisticKind::EmpiricalDist) => {
            rows.map(|x| wasserstein_set_worst_case(table.row(x), &s.value, *radius)).collect()
        }
        (AmbiguitySpec::ConditionalEntropy { radius, solver }, StatisticKind::DoubletDist) => {
            let opts = solver.unwrap_or_default();
            rows.map(|x| markov_ball_worst_case(table.row(x), &s.value, s.rows, *radius, &opts)).collect()
        }
        (AmbiguitySpec::Ellipsoid { radius, cov }, StatisticKind::ScaledSampleMean | StatisticKind::SampleMean) => {
            let sigma: DMatrix<f64> = covariance_matrix(cov)?;
            let center = DVector::from_column_slice(&s.value);
            rows.map(|x| {
                let a = DVector::from_column_slice(table.row(x));
                ellipsoid_linear_worst_case(&a, 0.0, &center, &sigma, *radius)
            })
            .collect()
        }
        (AmbiguitySpec::ArBall { radius, rate }, StatisticKind::LeastSquaresCoeff | StatisticKind::YuleWalkerCoeff) => {
            let expected = match kind {
                StatisticKind::LeastSquaresCoeff => ArRateKind::LeastSquares,
                _ => ArRateKind::YuleWalker,
            };
            if *rate != expected {
                return Err(Error::Usage(format!("{rate:?} rate ball does not match a {kind:?} statistic")));
            }
            Ok(rows.map(|x| ar_ball_worst_case(|t| polynomial(table.row(x), t), s.scalar(), *radius, *rate)).collect())
        }
        _ => Err(incompatible(spec, kind)),
    }
}

/// Index of the smallest predicted cost, ties going to the lowest index.
pub fn prescriptor(predictions: &[PredictorOutput]) -> Result<usize> {
    if predictions.is_empty() {
        return Err(Error::Usage("prescriptor needs at least one prediction".into()));
    }
    let mut best = 0;
    for (i, p) in predictions.iter().enumerate().skip(1) {
        if p.value < predictions[best].value {
            best = i;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn finite_stat(p: Vec<f64>) -> StatisticValue {
        StatisticValue::vector(StatisticKind::EmpiricalDist, p, 10)
    }

    #[test]
    fn prescriptor_tie_break_and_singletons() {
        let same = vec![PredictorOutput::feasible(1.0, None); 3];
        assert_eq!(prescriptor(&same).unwrap(), 0);
        assert_eq!(prescriptor(&same[..1]).unwrap(), 0);
        assert!(prescriptor(&[]).is_err());
    }

    #[test]
    fn empirical_and_penalized() {
        let table = LossTable::from_rows(vec![vec![1.0, 3.0], vec![2.0, 2.0]]).unwrap();
        let s = finite_stat(vec![0.25, 0.75]);
        let emp = predictor(&table, &s, &AmbiguitySpec::Empirical).unwrap();
        assert_eq!(emp[0].value, 2.5);
        let pen = predictor(&table, &s, &AmbiguitySpec::Penalized { radius: 0.5 }).unwrap();
        assert_eq!(pen[1].value, 2.5);
    }

    #[test]
    fn incompatible_spec_is_usage_error() {
        let table = LossTable::from_rows(vec![vec![1.0, 3.0]]).unwrap();
        let s = finite_stat(vec![0.5, 0.5]);
        let spec = AmbiguitySpec::ArBall { radius: 0.1, rate: ArRateKind::LeastSquares };
        assert!(matches!(predictor(&table, &s, &spec), Err(Error::Usage(_))));
    }

    #[test]
    fn ar_rows_are_polynomials() {
        let table = LossTable::from_rows(vec![vec![1.0, 0.0, 2.0]]).unwrap();
        let s = StatisticValue::vector(StatisticKind::LeastSquaresCoeff, vec![0.5], 50);
        let out = predictor(&table, &s, &AmbiguitySpec::Empirical).unwrap();
        assert_eq!(out[0].value, 1.5);
    }

    #[test]
    fn spec_json_round_trip() {
        let spec: AmbiguitySpec = serde_json::from_str(r#"{"kind":"moment","radius":0.05}"#).unwrap();
        assert_eq!(spec, AmbiguitySpec::Moment { radius: 0.05, moments: 4 });
        let back: AmbiguitySpec = serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
        assert_eq!(back, spec);
    }
}
