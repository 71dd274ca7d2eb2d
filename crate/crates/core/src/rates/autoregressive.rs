use serde::{Deserialize, Serialize};

use crate::ext::ExtendedReal;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArRateKind {
    LeastSquares,
    YuleWalker,
}

/// The interval `[a(theta), b(theta)]` on which the least-squares rate
/// follows the smooth branch.
pub fn ls_breakpoints(theta: f64) -> (f64, f64) {
    let root = (theta * theta + 8.0).sqrt();
    (0.25 * (theta - root), 0.25 * (theta + root))
}

/// `1/2 log((1 - 2 theta s + theta^2) / (1 - s^2))`, written through the
/// identity `1 - 2 theta s + theta^2 = (1 - s^2) + (theta - s)^2` so that it
/// stays accurate near `s = theta`.
fn interior(s: f64, theta: f64) -> f64 {
    let gap = theta - s;
    0.5 * (gap * gap / (1.0 - s * s)).ln_1p()
}

/// Rate function of the least-squares or Yule-Walker estimator of a scalar
/// AR coefficient `theta` in `[-1, 1]`.
pub fn ar_rate(s: f64, theta: f64, kind: ArRateKind) -> ExtendedReal {
    match kind {
        ArRateKind::LeastSquares => {
            let (a, b) = ls_breakpoints(theta);
            if a <= s && s <= b && s.abs() < 1.0 {
                ExtendedReal::Finite(interior(s, theta))
            } else {
                ExtendedReal::Finite((theta - 2.0 * s).abs().ln().max(0.0))
            }
        }
        ArRateKind::YuleWalker => {
            if s.abs() < 1.0 {
                ExtendedReal::Finite(interior(s, theta))
            } else if s == theta {
                ExtendedReal::ZERO
            } else {
                ExtendedReal::PosInfinity
            }
        }
    }
}
