//! Worst-case affine costs over the ellipsoidal rate balls of Gaussian
//! sample means.

use nalgebra::{DMatrix, DVector};

use super::PredictorOutput;
use crate::error::{Error, Result};

fn check_radius(r: f64) -> Result<()> {
    if r >= 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("radius {r} must be a finite nonnegative number")))
    }
}

fn spd(sigma: &DMatrix<f64>) -> Result<()> {
    sigma
        .clone()
        .cholesky()
        .map(|_| ())
        .ok_or_else(|| Error::Domain("covariance is not positive definite".into()))
}

/// `sup { a^T theta + b : 1/2 (s - theta)^T Sigma^{-1} (s - theta) <= r }`.
pub fn ellipsoid_linear_worst_case(
    a: &DVector<f64>,
    b: f64,
    s: &DVector<f64>,
    sigma: &DMatrix<f64>,
    r: f64,
) -> Result<PredictorOutput> {
    check_radius(r)?;
    let d = a.len();
    if s.len() != d || sigma.shape() != (d, d) {
        return Err(Error::Domain("dimension mismatch in ellipsoid worst case".into()));
    }
    spd(sigma)?;
    let sigma_a = sigma * a;
    let q = a.dot(&sigma_a);
    let reach = (2.0 * r * q).sqrt();
    let theta = if q > 0.0 { s + sigma_a * ((2.0 * r).sqrt() / q.sqrt()) } else { s.clone() };
    Ok(PredictorOutput::feasible(a.dot(s) + b + reach, Some(theta.iter().copied().collect())))
}

/// An invertible affine map `psi(s) = M s + c` of the statistic space.
#[derive(Debug, Clone)]
pub struct AffineMap {
    pub matrix: DMatrix<f64>,
    pub offset: DVector<f64>,
}

impl AffineMap {
    pub fn apply(&self, s: &DVector<f64>) -> DVector<f64> {
        &self.matrix * s + &self.offset
    }

    pub fn inverse_apply(&self, t: &DVector<f64>) -> Result<DVector<f64>> {
        self.matrix
            .clone()
            .lu()
            .solve(&(t - &self.offset))
            .ok_or_else(|| Error::Domain("affine map is not invertible".into()))
    }
}

/// The same predictor as [`ellipsoid_linear_worst_case`], evaluated on the
/// transformed statistic `t = psi(s)` with the pulled-back rate
/// `I(psi^{-1}(t), theta)`.
///
/// In the coordinates `eta = psi(theta)` the ball is an ellipsoid around `t`
/// with shape `M Sigma M^T` and the cost is affine in `eta`, so the value is
/// computed there without ever inverting `psi` on the statistic.
pub fn ellipsoid_linear_worst_case_mapped(
    a: &DVector<f64>,
    b: f64,
    t: &DVector<f64>,
    sigma: &DMatrix<f64>,
    r: f64,
    map: &AffineMap,
) -> Result<PredictorOutput> {
    check_radius(r)?;
    spd(sigma)?;
    let mt = map.matrix.transpose();
    let a_eta = mt.clone().lu().solve(a).ok_or_else(|| Error::Domain("affine map is not invertible".into()))?;
    let b_eta = b - a_eta.dot(&map.offset);
    let shape = &map.matrix * sigma * &mt;
    let out = ellipsoid_linear_worst_case(&a_eta, b_eta, t, &shape, r)?;
    let eta = DVector::from_vec(out.worst_case.clone().unwrap_or_default());
    let theta = map.inverse_apply(&eta)?;
    Ok(PredictorOutput::feasible(out.value, Some(theta.iter().copied().collect())))
}
