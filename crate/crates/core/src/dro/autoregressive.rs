//! Worst-case costs over the interval-shaped rate balls of scalar AR
//! coefficient estimators.

use super::{Branch, PredictorOutput};
use crate::optim::{bisect_boundary, golden_min};
use crate::rates::{ar_rate, ArRateKind};

const GRID: usize = 1001;
const EDGE_TOL: f64 = 1e-10;

/// The ball `{theta in [-1, 1] : I(s, theta) <= r}` as an interval, or `None`
/// when it is empty.
///
/// The rate is minimised at `clamp(s, -1, 1)` and is monotone on either side,
/// so each edge is found by bisection.
pub fn ar_rate_ball(s: f64, r: f64, kind: ArRateKind) -> Option<(f64, f64)> {
    let center = s.clamp(-1.0, 1.0);
    let inside = |theta: f64| ar_rate(s, theta, kind).le(r);
    if !inside(center) {
        return None;
    }
    let hi = if inside(1.0) { 1.0 } else { bisect_boundary(inside, center, 1.0, EDGE_TOL) };
    let lo = if inside(-1.0) { -1.0 } else { bisect_boundary(inside, center, -1.0, EDGE_TOL) };
    Some((lo, hi))
}

/// Grid search plus golden-section refinement of `cost` on `[lo, hi]`.
fn maximize_on<F: Fn(f64) -> f64>(cost: &F, lo: f64, hi: f64) -> (f64, f64) {
    if hi <= lo {
        return (lo, cost(lo));
    }
    let step = (hi - lo) / (GRID - 1) as f64;
    let at = |k: usize| if k == GRID - 1 { hi } else { lo + k as f64 * step };
    let (mut best_x, mut best_v) = (lo, cost(lo));
    let mut best_k = 0;
    for k in 1..GRID {
        let v = cost(at(k));
        if v > best_v {
            best_x = at(k);
            best_v = v;
            best_k = k;
        }
    }
    let a = at(best_k.saturating_sub(1));
    let b = at((best_k + 1).min(GRID - 1));
    let (x, neg) = golden_min(|x| -cost(x), a, b, 1e-12);
    if -neg > best_v {
        (x, -neg)
    } else {
        (best_x, best_v)
    }
}

/// `sup { cost(theta) : theta in [-1, 1], I(s, theta) <= r }`; an empty ball
/// falls back to the supremum over all of `[-1, 1]`.
pub fn ar_ball_worst_case<F: Fn(f64) -> f64>(cost: F, s: f64, r: f64, kind: ArRateKind) -> PredictorOutput {
    match ar_rate_ball(s, r, kind) {
        Some((lo, hi)) => {
            let (theta, value) = maximize_on(&cost, lo, hi);
            PredictorOutput::feasible(value, Some(vec![theta]))
        }
        None => {
            let (theta, value) = maximize_on(&cost, -1.0, 1.0);
            PredictorOutput { value, worst_case: Some(vec![theta]), branch: Branch::BallEmpty }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_radius_pins_the_estimate() {
        let (lo, hi) = ar_rate_ball(0.3, 0.0, ArRateKind::LeastSquares).unwrap();
        assert!((lo - 0.3).abs() < 1e-9 && (hi - 0.3).abs() < 1e-9);
        let out = ar_ball_worst_case(|t| t * t - t, 0.3, 0.0, ArRateKind::YuleWalker);
        assert!((out.value - (0.09 - 0.3)).abs() < 1e-8);
    }

    #[test]
    fn least_squares_interval_at_origin() {
        let (lo, hi) = ar_rate_ball(0.0, 0.1, ArRateKind::LeastSquares).unwrap();
        let edge = (0.2f64.exp() - 1.0).sqrt();
        assert!((hi - edge).abs() < 1e-9 && (lo + edge).abs() < 1e-9);
        assert!((edge - 0.470_534).abs() < 1e-6);
    }

    #[test]
    fn empty_ball_falls_back_to_global_supremum() {
        let out = ar_ball_worst_case(|t| -(t - 0.25).powi(2), 2.0, 0.5, ArRateKind::LeastSquares);
        assert_eq!(out.branch, Branch::BallEmpty);
        assert!(out.value.abs() < 1e-12);
    }
}
