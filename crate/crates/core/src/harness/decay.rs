use super::DisappointmentCurve;
use crate::error::{Error, Result};

/// Log-linear fit `log p_hat ~ intercept - rate * T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayEstimate {
    /// Negated slope, floored at zero.
    pub rate: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points_used: usize,
}

/// Ordinary least squares of `log p_hat` on `T` over the points with
/// `p_hat > 0`; at least three such points are needed.
pub fn estimate_decay_rate(curve: &DisappointmentCurve) -> Result<DecayEstimate> {
    let pairs: Vec<(f64, f64)> =
        curve.points.iter().filter(|p| p.p_hat > 0.0).map(|p| (p.horizon as f64, p.p_hat.ln())).collect();
    fit_log_linear(&pairs)
}

pub(crate) fn fit_log_linear(pairs: &[(f64, f64)]) -> Result<DecayEstimate> {
    if pairs.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "decay regression needs 3 points with positive frequency, found {}",
            pairs.len()
        )));
    }
    let n = pairs.len() as f64;
    let mx = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pairs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pairs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pairs.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData("decay regression needs distinct horizons".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = pairs.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let r_squared = if syy == 0.0 { 1.0 } else { (1.0 - ss_res / syy).clamp(0.0, 1.0) };
    Ok(DecayEstimate { rate: (-slope).max(0.0), intercept, r_squared, points_used: pairs.len() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::CurvePoint;

    fn curve(ps: &[(usize, f64)]) -> DisappointmentCurve {
        DisappointmentCurve {
            points: ps
                .iter()
                .map(|&(t, p)| CurvePoint {
                    horizon: t,
                    trials: 1,
                    disappointments: 0,
                    p_hat: p,
                    mean_in_sample: 0.0,
                    se_in_sample: 0.0,
                    mean_out_of_sample: 0.0,
                    spec: "test".into(),
                    radius: 0.0,
                    seed: 0,
                })
                .collect(),
        }
    }

    #[test]
    fn exact_exponential() {
        let pts: Vec<(usize, f64)> = (1..=10).map(|k| (10 * k, (-0.2 * (10 * k) as f64).exp())).collect();
        let est = estimate_decay_rate(&curve(&pts)).unwrap();
        assert!((est.rate - 0.2).abs() < 1e-12);
        assert!((est.r_squared - 1.0).abs() < 1e-12);
        assert_eq!(est.points_used, 10);
    }

    #[test]
    fn flat_line_has_zero_rate() {
        let pts: Vec<(usize, f64)> = (1..=10).map(|k| (10 * k, 0.5)).collect();
        let est = estimate_decay_rate(&curve(&pts)).unwrap();
        assert_eq!(est.rate, 0.0);
    }

    #[test]
    fn zero_points_are_dropped() {
        let est = estimate_decay_rate(&curve(&[(10, 0.1), (20, 0.0), (30, 0.01), (40, 0.001)])).unwrap();
        assert_eq!(est.points_used, 3);
        assert!(matches!(
            estimate_decay_rate(&curve(&[(10, 0.1), (20, 0.0), (30, 0.01)])),
            Err(Error::InsufficientData(_))
        ));
    }
}
