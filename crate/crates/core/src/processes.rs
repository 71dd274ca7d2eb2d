//! Parameterised data-generating processes and their seeded simulators.
//!
//! State labels of finite-state processes are 1-based (`1..=d`), matching how
//! scenarios are usually written down; columns of loss tables are 0-based.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Binomial, Distribution, Exp, Gamma, Geometric, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{self, StreamRng};

const SIMPLEX_TOL: f64 = 1e-12;
const BALANCE_TOL: f64 = 1e-10;
const LYAPUNOV_TOL: f64 = 1e-10;
const LYAPUNOV_MAX_ITERS: usize = 1_000_000;

fn domain(msg: impl Into<String>) -> Error {
    Error::ParameterDomain(msg.into())
}

fn check_positive_simplex(v: &[f64], what: &str) -> Result<()> {
    if let Some(bad) = v.iter().find(|&&p| !(p > 0.0) || !p.is_finite()) {
        return Err(domain(format!("{what}: entries must be strictly positive, found {bad}")));
    }
    let total: f64 = v.iter().sum();
    if (total - 1.0).abs() > SIMPLEX_TOL {
        return Err(domain(format!("{what}: entries sum to {total}, expected 1")));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Finite-state i.i.d.
// ---------------------------------------------------------------------------

/// I.i.d. draws from a strictly positive pmf on `{1, ..., d}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FiniteIidRaw", into = "FiniteIidRaw")]
pub struct FiniteIidModel {
    probs: Vec<f64>,
    cdf: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct FiniteIidRaw {
    probs: Vec<f64>,
}

impl TryFrom<FiniteIidRaw> for FiniteIidModel {
    type Error = Error;
    fn try_from(raw: FiniteIidRaw) -> Result<Self> {
        FiniteIidModel::new(raw.probs)
    }
}

impl From<FiniteIidModel> for FiniteIidRaw {
    fn from(m: FiniteIidModel) -> Self {
        FiniteIidRaw { probs: m.probs }
    }
}

impl FiniteIidModel {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.len() < 2 {
            return Err(domain("finite i.i.d. model needs at least two states"));
        }
        check_positive_simplex(&probs, "finite i.i.d. pmf")?;
        let mut acc = 0.0;
        let mut cdf: Vec<f64> = probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        // The last bucket must catch every uniform draw.
        *cdf.last_mut().unwrap() = f64::INFINITY;
        Ok(FiniteIidModel { probs, cdf })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn num_states(&self) -> usize {
        self.probs.len()
    }

    /// Draws one 1-based state label.
    #[inline]
    pub fn sample_state<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        self.cdf.iter().position(|&c| u < c).unwrap() + 1
    }
}

// ---------------------------------------------------------------------------
// Finite-state Markov chain parameterised by its stationary doublet pmf.
// ---------------------------------------------------------------------------

/// Ergodic Markov chain on `{1, ..., m}` described by the stationary pmf of
/// consecutive pairs, a strictly positive `m x m` matrix with balanced
/// marginals (row sums equal column sums).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MarkovRaw", into = "MarkovRaw")]
pub struct MarkovDoubletModel {
    m: usize,
    doublet: Vec<f64>,
    initial_state: usize,
}

#[derive(Serialize, Deserialize)]
struct MarkovRaw {
    doublet: Vec<Vec<f64>>,
    #[serde(default = "default_initial_state")]
    initial_state: usize,
}

fn default_initial_state() -> usize {
    1
}

impl TryFrom<MarkovRaw> for MarkovDoubletModel {
    type Error = Error;
    fn try_from(raw: MarkovRaw) -> Result<Self> {
        let m = raw.doublet.len();
        if raw.doublet.iter().any(|row| row.len() != m) {
            return Err(domain("doublet matrix must be square"));
        }
        MarkovDoubletModel::new(m, raw.doublet.concat())?.with_initial_state(raw.initial_state)
    }
}

impl From<MarkovDoubletModel> for MarkovRaw {
    fn from(model: MarkovDoubletModel) -> Self {
        MarkovRaw {
            doublet: model.doublet.chunks(model.m).map(<[f64]>::to_vec).collect(),
            initial_state: model.initial_state,
        }
    }
}

impl MarkovDoubletModel {
    /// `doublet` is row-major `m x m`. The dummy initial state defaults to 1;
    /// it does not influence any asymptotic quantity.
    pub fn new(m: usize, doublet: Vec<f64>) -> Result<Self> {
        if m < 2 || doublet.len() != m * m {
            return Err(domain(format!("doublet must be m x m with m >= 2, got {} entries", doublet.len())));
        }
        check_positive_simplex(&doublet, "doublet pmf")?;
        for i in 0..m {
            let row: f64 = doublet[i * m..(i + 1) * m].iter().sum();
            let col: f64 = (0..m).map(|k| doublet[k * m + i]).sum();
            if (row - col).abs() > BALANCE_TOL {
                return Err(domain(format!("doublet marginals unbalanced at state {}: {row} vs {col}", i + 1)));
            }
        }
        Ok(MarkovDoubletModel { m, doublet, initial_state: 1 })
    }

    pub fn with_initial_state(mut self, state: usize) -> Result<Self> {
        if state == 0 || state > self.m {
            return Err(domain(format!("initial state {state} outside 1..={}", self.m)));
        }
        self.initial_state = state;
        Ok(self)
    }

    pub fn num_states(&self) -> usize {
        self.m
    }

    pub fn doublet(&self) -> &[f64] {
        &self.doublet
    }

    pub fn initial_state(&self) -> usize {
        self.initial_state
    }
}

/// Stationary state distribution and transition matrix induced by a doublet:
/// `pi_i = sum_j theta_ij`, `P_ij = theta_ij / pi_i`.
pub fn markov_derived(model: &MarkovDoubletModel) -> (Vec<f64>, Vec<f64>) {
    let m = model.m;
    let pi: Vec<f64> = model.doublet.chunks(m).map(|row| row.iter().sum()).collect();
    let p = model
        .doublet
        .chunks(m)
        .zip(&pi)
        .flat_map(|(row, &mass)| row.iter().map(move |v| v / mass))
        .collect();
    (pi, p)
}

// ---------------------------------------------------------------------------
// Vector autoregression with unknown drift.
// ---------------------------------------------------------------------------

/// `xi_{t+1} = drift + A xi_t + eps_{t+1}`, `eps ~ N(0, Sigma)`, started in its
/// stationary law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "VarRaw", into = "VarRaw")]
pub struct VarDriftModel {
    drift: DVector<f64>,
    coeff: DMatrix<f64>,
    noise_cov: DMatrix<f64>,
    stationary_cov: DMatrix<f64>,
    stationary_mean: DVector<f64>,
    noise_chol: DMatrix<f64>,
    stationary_chol: DMatrix<f64>,
}

#[derive(Serialize, Deserialize)]
struct VarRaw {
    drift: Vec<f64>,
    coeff: Vec<Vec<f64>>,
    noise_cov: Vec<Vec<f64>>,
}

fn matrix_from_rows(rows: &[Vec<f64>], what: &str) -> Result<DMatrix<f64>> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(domain(format!("{what} must be a non-empty square matrix")));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

fn matrix_to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

impl TryFrom<VarRaw> for VarDriftModel {
    type Error = Error;
    fn try_from(raw: VarRaw) -> Result<Self> {
        VarDriftModel::new(
            DVector::from_vec(raw.drift),
            matrix_from_rows(&raw.coeff, "coeff")?,
            matrix_from_rows(&raw.noise_cov, "noise_cov")?,
        )
    }
}

impl From<VarDriftModel> for VarRaw {
    fn from(m: VarDriftModel) -> Self {
        VarRaw {
            drift: m.drift.iter().copied().collect(),
            coeff: matrix_to_rows(&m.coeff),
            noise_cov: matrix_to_rows(&m.noise_cov),
        }
    }
}

pub(crate) fn cholesky_spd(m: &DMatrix<f64>, what: &str) -> Result<DMatrix<f64>> {
    let asym = (m - m.transpose()).norm();
    if asym > 1e-12 * (1.0 + m.norm()) {
        return Err(domain(format!("{what} is not symmetric")));
    }
    m.clone()
        .cholesky()
        .map(|c| c.l())
        .ok_or_else(|| domain(format!("{what} is not positive definite")))
}

impl VarDriftModel {
    pub fn new(drift: DVector<f64>, coeff: DMatrix<f64>, noise_cov: DMatrix<f64>) -> Result<Self> {
        let d = drift.len();
        if coeff.shape() != (d, d) || noise_cov.shape() != (d, d) {
            return Err(domain("drift, coeff and noise_cov dimensions disagree"));
        }
        if !is_schur_stable(&coeff) {
            return Err(domain("coefficient matrix must have spectral radius < 1"));
        }
        let noise_chol = cholesky_spd(&noise_cov, "noise covariance")?;
        let stationary_cov = solve_lyapunov(&coeff, &noise_cov)?;
        let stationary_chol = cholesky_spd(&symmetrize(&stationary_cov), "stationary covariance")?;
        let stationary_mean = (DMatrix::identity(d, d) - &coeff)
            .lu()
            .solve(&drift)
            .ok_or_else(|| domain("I - A is singular"))?;
        Ok(VarDriftModel { drift, coeff, noise_cov, stationary_cov, stationary_mean, noise_chol, stationary_chol })
    }

    pub fn dim(&self) -> usize {
        self.drift.len()
    }
    pub fn drift(&self) -> &DVector<f64> {
        &self.drift
    }
    pub fn coeff(&self) -> &DMatrix<f64> {
        &self.coeff
    }
    pub fn noise_cov(&self) -> &DMatrix<f64> {
        &self.noise_cov
    }
    pub fn stationary_cov(&self) -> &DMatrix<f64> {
        &self.stationary_cov
    }
    /// `(I - A)^{-1} drift`.
    pub fn stationary_mean(&self) -> &DVector<f64> {
        &self.stationary_mean
    }
}

fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Certifies `rho(A) < 1` through the Gelfand bound `rho(A) <= ||A^k||^(1/k)`,
/// squaring `A` until some power has Frobenius norm below one.
pub fn is_schur_stable(a: &DMatrix<f64>) -> bool {
    let mut power = a.clone();
    for _ in 0..40 {
        let n = power.norm();
        if !n.is_finite() || n > 1e150 {
            return false;
        }
        if n < 1.0 {
            return true;
        }
        power = &power * &power;
    }
    false
}

/// Solves `R = A R A^T + Sigma` by the fixed-point iteration
/// `R <- Sigma + A R A^T` started from `R = Sigma`.
pub fn solve_lyapunov(a: &DMatrix<f64>, sigma: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if a.nrows() != a.ncols() || sigma.shape() != a.shape() {
        return Err(domain("Lyapunov operands must be square and of equal size"));
    }
    if !is_schur_stable(a) {
        return Err(Error::Stability("spectral radius of A is not below 1".into()));
    }
    let at = a.transpose();
    let mut r = sigma.clone();
    for _ in 0..LYAPUNOV_MAX_ITERS {
        let next = sigma + a * &r * &at;
        let residual = (&next - a * &next * &at - sigma).norm();
        r = next;
        if residual <= LYAPUNOV_TOL {
            return Ok(r);
        }
        if !residual.is_finite() {
            break;
        }
    }
    Err(Error::Stability(format!("Lyapunov iteration did not converge in {LYAPUNOV_MAX_ITERS} steps")))
}

// ---------------------------------------------------------------------------
// Scalar autoregression with unknown coefficient.
// ---------------------------------------------------------------------------

/// `xi_{t+1} = coeff * xi_t + eps_{t+1}`, `eps ~ N(noise_mean, noise_var)`,
/// started in its stationary law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ScalarArRaw", into = "ScalarArRaw")]
pub struct ScalarArModel {
    coeff: f64,
    noise_mean: f64,
    noise_var: f64,
}

#[derive(Serialize, Deserialize)]
struct ScalarArRaw {
    coeff: f64,
    #[serde(default)]
    noise_mean: f64,
    noise_var: f64,
}

impl TryFrom<ScalarArRaw> for ScalarArModel {
    type Error = Error;
    fn try_from(raw: ScalarArRaw) -> Result<Self> {
        ScalarArModel::new(raw.coeff, raw.noise_mean, raw.noise_var)
    }
}

impl From<ScalarArModel> for ScalarArRaw {
    fn from(m: ScalarArModel) -> Self {
        ScalarArRaw { coeff: m.coeff, noise_mean: m.noise_mean, noise_var: m.noise_var }
    }
}

impl ScalarArModel {
    pub fn new(coeff: f64, noise_mean: f64, noise_var: f64) -> Result<Self> {
        if !(coeff.abs() < 1.0) {
            return Err(domain(format!("AR coefficient {coeff} outside (-1, 1)")));
        }
        if !(noise_var > 0.0) || !noise_var.is_finite() || !noise_mean.is_finite() {
            return Err(domain(format!("noise variance must be positive, got {noise_var}")));
        }
        Ok(ScalarArModel { coeff, noise_mean, noise_var })
    }

    pub fn coeff(&self) -> f64 {
        self.coeff
    }
    pub fn noise_mean(&self) -> f64 {
        self.noise_mean
    }
    pub fn noise_var(&self) -> f64 {
        self.noise_var
    }
    pub fn stationary_mean(&self) -> f64 {
        self.noise_mean / (1.0 - self.coeff)
    }
    pub fn stationary_var(&self) -> f64 {
        self.noise_var / (1.0 - self.coeff * self.coeff)
    }
}

// ---------------------------------------------------------------------------
// Parametric i.i.d. families.
// ---------------------------------------------------------------------------

/// Parametric families with their fixed nuisance parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Family {
    /// Unknown mean, known covariance (row-major `m x m`).
    Normal { cov: Vec<f64> },
    /// Unknown rate.
    Exponential,
    /// Unknown scale, known shape.
    Gamma { shape: f64 },
    Poisson,
    Bernoulli,
    /// Number of trials up to and including the first success (support `1, 2, ...`).
    Geometric,
    Binomial { trials: u32 },
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Normal { .. } => "normal",
            Family::Exponential => "exponential",
            Family::Gamma { .. } => "gamma",
            Family::Poisson => "poisson",
            Family::Bernoulli => "bernoulli",
            Family::Geometric => "geometric",
            Family::Binomial { .. } => "binomial",
        }
    }

    /// Dimension of the parameter (and of the sample mean).
    pub fn dim(&self) -> usize {
        match self {
            Family::Normal { cov } => (cov.len() as f64).sqrt().round() as usize,
            _ => 1,
        }
    }

    pub fn validate_nuisance(&self) -> Result<()> {
        match self {
            Family::Normal { cov } => {
                let m = self.dim();
                if m == 0 || m * m != cov.len() {
                    return Err(domain("normal covariance must be a non-empty square matrix"));
                }
                cholesky_spd(&DMatrix::from_row_slice(m, m, cov), "normal covariance").map(|_| ())
            }
            Family::Gamma { shape } if !(*shape > 0.0) => Err(domain(format!("gamma shape {shape} must be > 0"))),
            Family::Binomial { trials } if *trials < 1 => Err(domain("binomial needs at least one trial")),
            _ => Ok(()),
        }
    }

    /// Checks that `theta` lies in the open parameter domain of the family.
    pub fn validate_theta(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.dim() {
            return Err(domain(format!("{} expects a {}-dimensional parameter", self.name(), self.dim())));
        }
        let ok = match self {
            Family::Normal { .. } => theta.iter().all(|t| t.is_finite()),
            Family::Exponential | Family::Gamma { .. } | Family::Poisson => theta[0] > 0.0 && theta[0].is_finite(),
            Family::Bernoulli | Family::Geometric | Family::Binomial { .. } => theta[0] > 0.0 && theta[0] < 1.0,
        };
        if ok {
            Ok(())
        } else {
            Err(domain(format!("theta {theta:?} outside the {} parameter domain", self.name())))
        }
    }

    /// The mean map `theta -> E[xi]`.
    pub fn mean(&self, theta: &[f64]) -> Vec<f64> {
        match self {
            Family::Normal { .. } | Family::Poisson | Family::Bernoulli => theta.to_vec(),
            Family::Exponential | Family::Geometric => vec![1.0 / theta[0]],
            Family::Gamma { shape } => vec![shape * theta[0]],
            Family::Binomial { trials } => vec![*trials as f64 * theta[0]],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ParametricRaw", into = "ParametricRaw")]
pub struct ParametricIidModel {
    family: Family,
    theta: Vec<f64>,
    #[serde(skip)]
    chol: Option<DMatrix<f64>>,
}

#[derive(Serialize, Deserialize)]
struct ParametricRaw {
    family: Family,
    theta: Vec<f64>,
}

impl TryFrom<ParametricRaw> for ParametricIidModel {
    type Error = Error;
    fn try_from(raw: ParametricRaw) -> Result<Self> {
        ParametricIidModel::new(raw.family, raw.theta)
    }
}

impl From<ParametricIidModel> for ParametricRaw {
    fn from(m: ParametricIidModel) -> Self {
        ParametricRaw { family: m.family, theta: m.theta }
    }
}

impl ParametricIidModel {
    pub fn new(family: Family, theta: Vec<f64>) -> Result<Self> {
        family.validate_nuisance()?;
        family.validate_theta(&theta)?;
        let chol = match &family {
            Family::Normal { cov } => {
                let m = family.dim();
                Some(cholesky_spd(&DMatrix::from_row_slice(m, m, cov), "normal covariance")?)
            }
            _ => None,
        };
        Ok(ParametricIidModel { family, theta, chol })
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }
}

// ---------------------------------------------------------------------------
// Tagged union and trajectories.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ProcessModel {
    FiniteIid(FiniteIidModel),
    Markov(MarkovDoubletModel),
    Var(VarDriftModel),
    ScalarAr(ScalarArModel),
    Parametric(ParametricIidModel),
}

/// An observed history `xi_1, ..., xi_T`.
#[derive(Debug, Clone, PartialEq)]
pub enum Trajectory {
    /// 1-based state labels; `initial` carries the Markov chain's `xi_0`.
    Discrete { states: Vec<usize>, initial: Option<usize> },
    /// Row-major `T x dim` observations.
    Continuous { dim: usize, values: Vec<f64> },
}

impl Trajectory {
    pub fn discrete(states: Vec<usize>) -> Self {
        Trajectory::Discrete { states, initial: None }
    }

    pub fn markov(initial: usize, states: Vec<usize>) -> Self {
        Trajectory::Discrete { states, initial: Some(initial) }
    }

    pub fn scalar(values: Vec<f64>) -> Self {
        Trajectory::Continuous { dim: 1, values }
    }

    pub fn vectors(dim: usize, values: Vec<f64>) -> Self {
        assert!(dim > 0 && values.len() % dim == 0, "values must be a whole number of {dim}-vectors");
        Trajectory::Continuous { dim, values }
    }

    pub fn len(&self) -> usize {
        match self {
            Trajectory::Discrete { states, .. } => states.len(),
            Trajectory::Continuous { dim, values } => values.len() / dim,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn states(&self) -> Option<&[usize]> {
        match self {
            Trajectory::Discrete { states, .. } => Some(states),
            Trajectory::Continuous { .. } => None,
        }
    }

    pub fn initial_state(&self) -> Option<usize> {
        match self {
            Trajectory::Discrete { initial, .. } => *initial,
            Trajectory::Continuous { .. } => None,
        }
    }

    /// `(dim, values)` for real-valued trajectories.
    pub fn values(&self) -> Option<(usize, &[f64])> {
        match self {
            Trajectory::Continuous { dim, values } => Some((*dim, values)),
            Trajectory::Discrete { .. } => None,
        }
    }
}

/// Simulates `horizon` observations under `model` from the stream seeded by
/// `seed`. Output is a pure function of `(model, horizon, seed)` and shorter
/// horizons yield prefixes of longer ones.
pub fn simulate(model: &ProcessModel, horizon: usize, seed: u64) -> Result<Trajectory> {
    let mut rng = rng::stream(seed, &[]);
    simulate_with(model, horizon, &mut rng)
}

/// Same as [`simulate`] but drawing from a caller-supplied stream.
pub fn simulate_with(model: &ProcessModel, horizon: usize, rng: &mut StreamRng) -> Result<Trajectory> {
    if horizon == 0 {
        return Err(Error::Usage("horizon must be at least 1".into()));
    }
    Ok(match model {
        ProcessModel::FiniteIid(m) => Trajectory::discrete((0..horizon).map(|_| m.sample_state(rng)).collect()),
        ProcessModel::Markov(m) => simulate_markov(m, horizon, rng),
        ProcessModel::Var(m) => simulate_var(m, horizon, rng),
        ProcessModel::ScalarAr(m) => simulate_scalar_ar(m, horizon, rng),
        ProcessModel::Parametric(m) => simulate_parametric(m, horizon, rng)?,
    })
}

fn simulate_markov(model: &MarkovDoubletModel, horizon: usize, rng: &mut StreamRng) -> Trajectory {
    let m = model.m;
    let (_, p) = markov_derived(model);
    let cdfs: Vec<Vec<f64>> = p
        .chunks(m)
        .map(|row| {
            let mut acc = 0.0;
            let mut cdf: Vec<f64> = row
                .iter()
                .map(|v| {
                    acc += v;
                    acc
                })
                .collect();
            *cdf.last_mut().unwrap() = f64::INFINITY;
            cdf
        })
        .collect();
    let mut state = model.initial_state;
    let states = (0..horizon)
        .map(|_| {
            let u: f64 = rng.random();
            state = cdfs[state - 1].iter().position(|&c| u < c).unwrap() + 1;
            state
        })
        .collect();
    Trajectory::markov(model.initial_state, states)
}

fn standard_normal_vec(dim: usize, rng: &mut StreamRng) -> DVector<f64> {
    DVector::from_fn(dim, |_, _| StandardNormal.sample(rng))
}

fn simulate_var(model: &VarDriftModel, horizon: usize, rng: &mut StreamRng) -> Trajectory {
    let d = model.dim();
    let mut values = Vec::with_capacity(d * horizon);
    let mut x = &model.stationary_mean + &model.stationary_chol * standard_normal_vec(d, rng);
    values.extend(x.iter());
    for _ in 1..horizon {
        x = &model.drift + &model.coeff * &x + &model.noise_chol * standard_normal_vec(d, rng);
        values.extend(x.iter());
    }
    Trajectory::vectors(d, values)
}

fn simulate_scalar_ar(model: &ScalarArModel, horizon: usize, rng: &mut StreamRng) -> Trajectory {
    let sd = model.noise_var.sqrt();
    let z: f64 = StandardNormal.sample(rng);
    let mut x = model.stationary_mean() + model.stationary_var().sqrt() * z;
    let mut values = Vec::with_capacity(horizon);
    values.push(x);
    for _ in 1..horizon {
        let z: f64 = StandardNormal.sample(rng);
        x = model.coeff * x + model.noise_mean + sd * z;
        values.push(x);
    }
    Trajectory::scalar(values)
}

fn simulate_parametric(model: &ParametricIidModel, horizon: usize, rng: &mut StreamRng) -> Result<Trajectory> {
    let theta = model.theta[0];
    let bad = |e: &dyn std::fmt::Display| domain(e.to_string());
    let values: Vec<f64> = match &model.family {
        Family::Normal { .. } => {
            let chol = model.chol.as_ref().expect("normal model carries its Cholesky factor");
            let mean = DVector::from_column_slice(&model.theta);
            let m = mean.len();
            let mut values = Vec::with_capacity(m * horizon);
            for _ in 0..horizon {
                values.extend((&mean + chol * standard_normal_vec(m, rng)).iter());
            }
            return Ok(Trajectory::vectors(m, values));
        }
        Family::Exponential => {
            let dist = Exp::new(theta).map_err(|e| bad(&e))?;
            (0..horizon).map(|_| dist.sample(rng)).collect()
        }
        Family::Gamma { shape } => {
            let dist = Gamma::new(*shape, theta).map_err(|e| bad(&e))?;
            (0..horizon).map(|_| dist.sample(rng)).collect()
        }
        Family::Poisson => {
            let dist = Poisson::new(theta).map_err(|e| bad(&e))?;
            (0..horizon).map(|_| dist.sample(rng)).collect()
        }
        Family::Bernoulli => (0..horizon).map(|_| if rng.random::<f64>() < theta { 1.0 } else { 0.0 }).collect(),
        Family::Geometric => {
            let dist = Geometric::new(theta).map_err(|e| bad(&e))?;
            (0..horizon).map(|_| dist.sample(rng) as f64 + 1.0).collect()
        }
        Family::Binomial { trials } => {
            let dist = Binomial::new(*trials as u64, theta).map_err(|e| bad(&e))?;
            (0..horizon).map(|_| dist.sample(rng) as f64).collect()
        }
    };
    Ok(Trajectory::scalar(values))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn finite_iid_rejects_degenerate_pmf() {
        assert!(matches!(FiniteIidModel::new(vec![1.0, 0.0]), Err(Error::ParameterDomain(_))));
        assert!(matches!(FiniteIidModel::new(vec![1.0]), Err(Error::ParameterDomain(_))));
        assert!(matches!(FiniteIidModel::new(vec![0.5, 0.6]), Err(Error::ParameterDomain(_))));
    }

    #[test]
    fn fair_coin_frequency() {
        let model = ProcessModel::FiniteIid(FiniteIidModel::new(vec![0.5, 0.5]).unwrap());
        let traj = simulate(&model, 100_000, 11).unwrap();
        let ones = traj.states().unwrap().iter().filter(|&&s| s == 1).count();
        assert!(close(ones as f64 / 1e5, 0.5, 0.01));
    }

    #[test]
    fn scalar_ar_stationary_variance() {
        let model = ProcessModel::ScalarAr(ScalarArModel::new(0.5, 0.0, 1.0).unwrap());
        let (_, v) = simulate(&model, 100_000, 5).unwrap().values().map(|(d, v)| (d, v.to_vec())).unwrap();
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (v.len() - 1) as f64;
        assert!((var / (1.0 / 0.75) - 1.0).abs() < 0.05, "variance {var}");
    }

    #[test]
    fn lyapunov_examples() {
        let r = solve_lyapunov(&DMatrix::zeros(2, 2), &DMatrix::identity(2, 2)).unwrap();
        assert_eq!(r, DMatrix::identity(2, 2));

        let r = solve_lyapunov(&DMatrix::from_element(1, 1, 0.5), &DMatrix::from_element(1, 1, 1.0)).unwrap();
        assert!(close(r[(0, 0)], 1.0 / 0.75, 1e-10));

        let a = DMatrix::identity(2, 2) * 0.9;
        let r = solve_lyapunov(&a, &DMatrix::identity(2, 2)).unwrap();
        assert!(close(r[(0, 0)], 1.0 / 0.19, 1e-9) && close(r[(1, 1)], 1.0 / 0.19, 1e-9));
        assert!(close(r[(0, 1)], 0.0, 1e-12));
    }

    #[test]
    fn lyapunov_rejects_unstable() {
        let a = DMatrix::identity(2, 2) * 1.01;
        assert!(matches!(solve_lyapunov(&a, &DMatrix::identity(2, 2)), Err(Error::Stability(_))));
    }

    #[test]
    fn lyapunov_residual_for_coupled_system() {
        let a = DMatrix::from_row_slice(2, 2, &[0.5, 0.4, -0.3, 0.6]);
        let s = DMatrix::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 1.0]);
        let r = solve_lyapunov(&a, &s).unwrap();
        assert!((&r - &a * &r * a.transpose() - &s).norm() <= 1e-10);
    }

    #[test]
    fn markov_derived_examples() {
        let uniform = MarkovDoubletModel::new(2, vec![0.25; 4]).unwrap();
        let (pi, p) = markov_derived(&uniform);
        assert_eq!(pi, vec![0.5, 0.5]);
        assert_eq!(p, vec![0.5; 4]);

        let sticky = MarkovDoubletModel::new(2, vec![0.4, 0.1, 0.1, 0.4]).unwrap();
        let (pi, p) = markov_derived(&sticky);
        assert!(close(pi[0], 0.5, 1e-15));
        for (a, b) in p.iter().zip([0.8, 0.2, 0.2, 0.8]) {
            assert!(close(*a, b, 1e-15));
        }
    }

    #[test]
    fn markov_rejects_unbalanced_doublet() {
        let err = MarkovDoubletModel::new(2, vec![0.1, 0.4, 0.1, 0.4]).unwrap_err();
        assert!(matches!(err, Error::ParameterDomain(_)));
    }

    #[test]
    fn parametric_domains() {
        assert!(ParametricIidModel::new(Family::Exponential, vec![0.0]).is_err());
        assert!(ParametricIidModel::new(Family::Bernoulli, vec![1.0]).is_err());
        assert!(ParametricIidModel::new(Family::Gamma { shape: -1.0 }, vec![1.0]).is_err());
        assert!(ParametricIidModel::new(Family::Binomial { trials: 0 }, vec![0.5]).is_err());
        assert!(ParametricIidModel::new(Family::Normal { cov: vec![1.0, 2.0, 2.0, 1.0] }, vec![0.0, 0.0]).is_err());
        assert!(ParametricIidModel::new(Family::Normal { cov: vec![2.0, 0.5, 0.5, 1.0] }, vec![0.0, 1.0]).is_ok());
    }

    #[test]
    fn geometric_support_starts_at_one() {
        let model = ProcessModel::Parametric(ParametricIidModel::new(Family::Geometric, vec![0.9]).unwrap());
        let traj = simulate(&model, 1000, 3).unwrap();
        assert!(traj.values().unwrap().1.iter().all(|&v| v >= 1.0));
    }

    #[test]
    fn config_json_round_trip() {
        let json = r#"{"family":"markov","doublet":[[0.4,0.1],[0.1,0.4]],"initial_state":2}"#;
        let model: ProcessModel = serde_json::from_str(json).unwrap();
        match &model {
            ProcessModel::Markov(m) => assert_eq!(m.initial_state(), 2),
            other => panic!("unexpected {other:?}"),
        }
        let back: ProcessModel = serde_json::from_str(&serde_json::to_string(&model).unwrap()).unwrap();
        assert_eq!(back, model);

        let bad = r#"{"family":"finite_iid","probs":[1.0,0.0]}"#;
        assert!(serde_json::from_str::<ProcessModel>(bad).is_err());
    }
}
