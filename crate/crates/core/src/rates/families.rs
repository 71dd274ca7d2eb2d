use nalgebra::DVector;

use super::covariance_matrix;
use super::divergence::check_simplex;
use crate::error::{Error, Result};
use crate::ext::ExtendedReal;
use crate::processes::{Family, Trajectory};
use crate::statistics::empirical_distribution;

/// Central-difference step for gradients of the log-MGF.
pub const GRAD_STEP: f64 = 1e-6;

/// Either a parametric family or a finite-state i.i.d. process, whose
/// parameter is the pmf itself.
#[derive(Debug, Clone, Copy)]
pub enum MgfFamily<'a> {
    Parametric(&'a Family),
    FiniteIid,
}

impl MgfFamily<'_> {
    fn validate(&self, theta: &[f64]) -> Result<()> {
        match self {
            MgfFamily::Parametric(f) => {
                f.validate_nuisance().map_err(into_domain)?;
                f.validate_theta(theta).map_err(into_domain)
            }
            MgfFamily::FiniteIid => {
                check_simplex(theta, "theta")?;
                if theta.iter().any(|&t| t <= 0.0) {
                    return Err(Error::Domain("finite-state theta must be strictly positive".into()));
                }
                Ok(())
            }
        }
    }
}

fn into_domain(e: Error) -> Error {
    match e {
        Error::ParameterDomain(msg) => Error::Domain(msg),
        other => other,
    }
}

fn finite(v: f64) -> ExtendedReal {
    if v.is_finite() {
        ExtendedReal::Finite(v)
    } else {
        ExtendedReal::PosInfinity
    }
}

/// `x log(x / y)` with `0 log 0 = 0`.
fn xlogx_over(x: f64, y: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * (x / y).ln()
    }
}

/// `log(1 - p + p e^lambda)` without cancellation for either sign of lambda.
fn log_bernoulli_mgf(lambda: f64, p: f64) -> f64 {
    if lambda > 0.0 {
        lambda + (p + (1.0 - p) * (-lambda).exp()).ln()
    } else {
        (p * lambda.exp_m1()).ln_1p()
    }
}

fn log_sum_exp_weighted(weights: &[f64], lambda: &[f64]) -> f64 {
    let peak = lambda.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = weights.iter().zip(lambda).map(|(w, l)| w * (l - peak).exp()).sum();
    peak + sum.ln()
}

/// Limiting log-moment generating function `Lambda(lambda, theta)`.
pub fn limit_log_mgf(family: MgfFamily<'_>, lambda: &[f64], theta: &[f64]) -> Result<ExtendedReal> {
    family.validate(theta)?;
    let family = match family {
        MgfFamily::FiniteIid => {
            if lambda.len() != theta.len() {
                return Err(Error::Domain("lambda and theta lengths differ".into()));
            }
            return Ok(finite(log_sum_exp_weighted(theta, lambda)));
        }
        MgfFamily::Parametric(f) => f,
    };
    if lambda.len() != family.dim() {
        return Err(Error::Domain(format!("{} expects a {}-dimensional lambda", family.name(), family.dim())));
    }
    let (l, t) = (lambda[0], theta[0]);
    let v = match family {
        Family::Normal { cov } => {
            let sigma = covariance_matrix(cov)?;
            let lam = DVector::from_column_slice(lambda);
            let linear: f64 = lam.iter().zip(theta).map(|(a, b)| a * b).sum();
            linear + 0.5 * lam.dot(&(&sigma * &lam))
        }
        Family::Exponential => {
            if l >= t {
                return Ok(ExtendedReal::PosInfinity);
            }
            -(-l / t).ln_1p()
        }
        Family::Gamma { shape } => {
            if t * l >= 1.0 {
                return Ok(ExtendedReal::PosInfinity);
            }
            -shape * (-t * l).ln_1p()
        }
        Family::Poisson => t * l.exp_m1(),
        Family::Bernoulli => log_bernoulli_mgf(l, t),
        Family::Geometric => {
            if l >= -(-t).ln_1p() {
                return Ok(ExtendedReal::PosInfinity);
            }
            l + t.ln() - (-(1.0 - t) * l.exp()).ln_1p()
        }
        Family::Binomial { trials } => *trials as f64 * log_bernoulli_mgf(l, t),
    };
    Ok(finite(v))
}

/// Closed-form Cramer function `Lambda*(s, theta)`.
///
/// Boundary points of the mean range where the conjugate is finite (for
/// example `s = 0` for the Poisson family) take their limiting value.
pub fn cramer_rate(family: &Family, s: &[f64], theta: &[f64]) -> Result<ExtendedReal> {
    MgfFamily::Parametric(family).validate(theta)?;
    if s.len() != family.dim() {
        return Err(Error::Domain(format!("{} expects a {}-dimensional s", family.name(), family.dim())));
    }
    if s.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("s must be finite".into()));
    }
    let (x, t) = (s[0], theta[0]);
    let inf = Ok(ExtendedReal::PosInfinity);
    let v = match family {
        Family::Normal { cov } => {
            return super::gaussian_quadratic_rate(s, theta, &covariance_matrix(cov)?).map(ExtendedReal::Finite)
        }
        Family::Exponential => {
            if x <= 0.0 {
                return inf;
            }
            t * x - 1.0 - (t * x).ln()
        }
        Family::Gamma { shape } => {
            if x <= 0.0 {
                return inf;
            }
            x / t - shape + shape * (shape * t / x).ln()
        }
        Family::Poisson => {
            if x < 0.0 {
                return inf;
            }
            xlogx_over(x, t) - x + t
        }
        Family::Bernoulli => {
            if !(0.0..=1.0).contains(&x) {
                return inf;
            }
            xlogx_over(x, t) + xlogx_over(1.0 - x, 1.0 - t)
        }
        Family::Geometric => {
            if x < 1.0 {
                return inf;
            }
            xlogx_over(x - 1.0, x * (1.0 - t)) - (t * x).ln()
        }
        Family::Binomial { trials } => {
            let n = *trials as f64;
            if !(0.0..=n).contains(&x) {
                return inf;
            }
            xlogx_over(x, n * t) + xlogx_over(n - x, n * (1.0 - t))
        }
    };
    Ok(ExtendedReal::Finite(v.max(0.0)))
}

/// Central-difference gradient of `Lambda(., theta)` at the origin.
pub fn grad_limit_log_mgf_at_zero(family: MgfFamily<'_>, theta: &[f64]) -> Result<Vec<f64>> {
    family.validate(theta)?;
    let dim = match family {
        MgfFamily::FiniteIid => theta.len(),
        MgfFamily::Parametric(f) => f.dim(),
    };
    let mut lambda = vec![0.0; dim];
    (0..dim)
        .map(|k| {
            lambda[k] = GRAD_STEP;
            let up = limit_log_mgf(family, &lambda, theta)?;
            lambda[k] = -GRAD_STEP;
            let down = limit_log_mgf(family, &lambda, theta)?;
            lambda[k] = 0.0;
            match (up, down) {
                (ExtendedReal::Finite(u), ExtendedReal::Finite(d)) => Ok((u - d) / (2.0 * GRAD_STEP)),
                _ => Err(Error::Domain("log-MGF is infinite next to the origin".into())),
            }
        })
        .collect()
}

/// Log-likelihood ratio of a finite-state trajectory against the uniform
/// pmf, computed term by term (`direct`) and through the exponential-family
/// form `<T log theta, S_T> + T log d` (`expfam`).
pub fn rn_derivative_finite_iid(theta: &[f64], traj: &Trajectory) -> Result<(f64, f64)> {
    MgfFamily::FiniteIid.validate(theta)?;
    let d = theta.len();
    let states = traj.states().ok_or_else(|| Error::Data("expected a finite-state trajectory".into()))?;
    let t = states.len() as f64;
    let log_d = (d as f64).ln();
    let mut direct = 0.0;
    for &s in states {
        if s == 0 || s > d {
            return Err(Error::Data(format!("state {s} outside 1..={d}")));
        }
        direct += log_d + theta[s - 1].ln();
    }
    let s_hat = empirical_distribution(traj, d)?;
    let inner: f64 = theta.iter().zip(&s_hat.value).map(|(th, s)| t * th.ln() * s).sum();
    Ok((direct, inner + t * log_d))
}
