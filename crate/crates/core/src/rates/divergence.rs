use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::ext::ExtendedReal;

const SIMPLEX_TOL: f64 = 1e-9;

pub(crate) fn check_simplex(v: &[f64], what: &str) -> Result<()> {
    if v.iter().any(|&x| !(x >= -SIMPLEX_TOL) || !x.is_finite()) {
        return Err(Error::Domain(format!("{what} has negative or non-finite entries")));
    }
    let total: f64 = v.iter().sum();
    if (total - 1.0).abs() > SIMPLEX_TOL {
        return Err(Error::Domain(format!("{what} sums to {total}, expected 1")));
    }
    Ok(())
}

/// `D(s || theta) = sum_i s_i log(s_i / theta_i)` with `0 log 0 = 0`.
pub fn relative_entropy(s: &[f64], theta: &[f64]) -> Result<ExtendedReal> {
    if s.len() != theta.len() {
        return Err(Error::Domain(format!("length mismatch: {} vs {}", s.len(), theta.len())));
    }
    check_simplex(s, "s")?;
    check_simplex(theta, "theta")?;
    Ok(relative_entropy_unchecked(s, theta))
}

pub(crate) fn relative_entropy_unchecked(s: &[f64], theta: &[f64]) -> ExtendedReal {
    let mut acc = 0.0;
    for (&si, &ti) in s.iter().zip(theta) {
        if si <= 0.0 {
            continue;
        }
        if ti <= 0.0 {
            return ExtendedReal::PosInfinity;
        }
        acc += si * (si / ti).ln();
    }
    // Rounding can push an exact zero slightly negative.
    ExtendedReal::Finite(acc.max(0.0))
}

/// Visitation-weighted relative entropy between transition rows of two
/// `m x m` doublet distributions (row-major).
///
/// `s` may be unbalanced; `theta` is expected to be a balanced doublet.
pub fn conditional_relative_entropy(s: &[f64], theta: &[f64], m: usize) -> Result<ExtendedReal> {
    if s.len() != m * m || theta.len() != m * m {
        return Err(Error::Domain(format!("doublets must have {} entries", m * m)));
    }
    check_simplex(s, "s")?;
    check_simplex(theta, "theta")?;
    Ok(conditional_relative_entropy_unchecked(s, theta, m))
}

pub(crate) fn conditional_relative_entropy_unchecked(s: &[f64], theta: &[f64], m: usize) -> ExtendedReal {
    let mut acc = 0.0;
    for i in 0..m {
        let s_row = &s[i * m..(i + 1) * m];
        let t_row = &theta[i * m..(i + 1) * m];
        let pi_s: f64 = s_row.iter().sum();
        if pi_s <= 0.0 {
            continue;
        }
        let pi_t: f64 = t_row.iter().sum();
        for (&sij, &tij) in s_row.iter().zip(t_row) {
            if sij <= 0.0 {
                continue;
            }
            if tij <= 0.0 {
                return ExtendedReal::PosInfinity;
            }
            acc += sij * ((sij * pi_t) / (pi_s * tij)).ln();
        }
    }
    ExtendedReal::Finite(acc.max(0.0))
}

/// `1/2 (s - theta)^T Sigma^{-1} (s - theta)`.
pub fn gaussian_quadratic_rate(s: &[f64], theta: &[f64], sigma: &DMatrix<f64>) -> Result<f64> {
    let d = s.len();
    if theta.len() != d || sigma.shape() != (d, d) {
        return Err(Error::Domain("dimension mismatch in quadratic rate".into()));
    }
    let chol = sigma.clone().cholesky().ok_or_else(|| Error::Domain("covariance is not positive definite".into()))?;
    let diff = DVector::from_iterator(d, s.iter().zip(theta).map(|(a, b)| a - b));
    let solved = chol.solve(&diff);
    Ok(0.5 * diff.dot(&solved).max(0.0))
}
