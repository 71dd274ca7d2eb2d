//! Rate functions, limiting log-moment generating functions and a numerical
//! Legendre transform.
//!
//! Every rate returns an [`ExtendedReal`]; `+inf` marks points outside the
//! effective domain.

mod autoregressive;
mod conjugate;
pub(crate) mod divergence;
mod families;

pub use autoregressive::{ar_rate, ls_breakpoints, ArRateKind};
pub use conjugate::numerical_conjugate;
pub use divergence::{conditional_relative_entropy, gaussian_quadratic_rate, relative_entropy};
pub use families::{
    cramer_rate, grad_limit_log_mgf_at_zero, limit_log_mgf, rn_derivative_finite_iid, MgfFamily, GRAD_STEP,
};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ext::ExtendedReal;
use crate::processes::Family;

/// Selects a rate function together with its fixed nuisance parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RateSpec {
    RelativeEntropy,
    /// `m x m` doublets, stored row-major.
    ConditionalRelativeEntropy { m: usize },
    /// Covariance of the noise, row-major.
    GaussianQuadratic { cov: Vec<f64> },
    ArLeastSquares,
    ArYuleWalker,
    Cramer { family: Family },
}

impl RateSpec {
    pub fn name(&self) -> &'static str {
        match self {
            RateSpec::RelativeEntropy => "relative_entropy",
            RateSpec::ConditionalRelativeEntropy { .. } => "conditional_relative_entropy",
            RateSpec::GaussianQuadratic { .. } => "gaussian_quadratic",
            RateSpec::ArLeastSquares => "ar_least_squares",
            RateSpec::ArYuleWalker => "ar_yule_walker",
            RateSpec::Cramer { .. } => "cramer",
        }
    }

    /// Checks the nuisance parameters.
    pub fn validate(&self) -> Result<()> {
        match self {
            RateSpec::GaussianQuadratic { cov } => covariance_matrix(cov).map(|_| ()),
            RateSpec::ConditionalRelativeEntropy { m } if *m < 1 => Err(Error::Domain("m must be positive".into())),
            RateSpec::Cramer { family } => family.validate_nuisance(),
            _ => Ok(()),
        }
    }

    /// Evaluates `I(s, theta)`.
    pub fn eval(&self, s: &[f64], theta: &[f64]) -> Result<ExtendedReal> {
        match self {
            RateSpec::RelativeEntropy => relative_entropy(s, theta),
            RateSpec::ConditionalRelativeEntropy { m } => conditional_relative_entropy(s, theta, *m),
            RateSpec::GaussianQuadratic { cov } => {
                gaussian_quadratic_rate(s, theta, &covariance_matrix(cov)?).map(ExtendedReal::Finite)
            }
            RateSpec::ArLeastSquares | RateSpec::ArYuleWalker => {
                if s.len() != 1 || theta.len() != 1 {
                    return Err(Error::Domain("AR rates take scalar s and theta".into()));
                }
                let kind = if matches!(self, RateSpec::ArLeastSquares) { ArRateKind::LeastSquares } else { ArRateKind::YuleWalker };
                Ok(ar_rate(s[0], theta[0], kind))
            }
            RateSpec::Cramer { family } => cramer_rate(family, s, theta),
        }
    }
}

pub fn covariance_matrix(cov: &[f64]) -> Result<DMatrix<f64>> {
    let n = (cov.len() as f64).sqrt().round() as usize;
    if n == 0 || n * n != cov.len() {
        return Err(Error::Domain("covariance must be a non-empty square matrix".into()));
    }
    Ok(DMatrix::from_row_slice(n, n, cov))
}
