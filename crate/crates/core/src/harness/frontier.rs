use super::{estimate_decay_rate, run_curve, DecayEstimate, DisappointmentCurve, ExperimentConfig};
use crate::dro::AmbiguitySpec;
use crate::error::{Error, Result};

/// Decay rate and (approximate) asymptotic in-sample cost of one predictor.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontierPoint {
    pub spec: AmbiguitySpec,
    pub decay: DecayEstimate,
    /// Mean in-sample cost at the largest horizon of the grid.
    pub asymptotic_in_sample: f64,
    pub se: f64,
    pub curve: DisappointmentCurve,
}

impl FrontierPoint {
    pub fn radius(&self) -> f64 {
        self.spec.radius()
    }
}

/// Runs a disappointment curve for every spec kind at every radius and
/// returns the resulting points sorted by decay rate.
pub fn frontier(base: &ExperimentConfig, specs: &[AmbiguitySpec], radii: &[f64]) -> Result<Vec<FrontierPoint>> {
    if specs.is_empty() || radii.is_empty() {
        return Err(Error::Config("frontier needs at least one spec and one radius".into()));
    }
    let mut points = Vec::new();
    for spec in specs {
        let radii: Vec<f64> = if matches!(spec, AmbiguitySpec::Empirical) { vec![0.0] } else { radii.to_vec() };
        for r in radii {
            let config = ExperimentConfig { spec: spec.with_radius(r), ..base.clone() };
            let curve = run_curve(&config)?;
            let decay = estimate_decay_rate(&curve)?;
            let last = curve.points.last().expect("validated grids are nonempty");
            points.push(FrontierPoint {
                spec: config.spec.clone(),
                decay,
                asymptotic_in_sample: last.mean_in_sample,
                se: last.se_in_sample,
                curve,
            });
        }
    }
    points.sort_by(|a, b| {
        a.decay
            .rate
            .total_cmp(&b.decay.rate)
            .then_with(|| a.spec.name().cmp(b.spec.name()))
            .then_with(|| a.radius().total_cmp(&b.radius()))
    });
    Ok(points)
}

/// Comparison of two frontiers at one decay rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DominanceCheck {
    pub rate: f64,
    pub lower_cost: f64,
    pub upper_cost: f64,
    /// Two combined Monte-Carlo standard errors.
    pub tolerance: f64,
    pub holds: bool,
}

/// Piecewise-linear interpolation of `(rate, cost, se)` at `rate`.
fn interpolate(points: &[(f64, f64, f64)], rate: f64) -> (f64, f64) {
    let k = points.partition_point(|p| p.0 < rate);
    if k == 0 {
        return (points[0].1, points[0].2);
    }
    if k == points.len() {
        let last = points[points.len() - 1];
        return (last.1, last.2);
    }
    let (a, b) = (points[k - 1], points[k]);
    let w = if b.0 > a.0 { (rate - a.0) / (b.0 - a.0) } else { 1.0 };
    (a.1 + w * (b.1 - a.1), a.2 + w * (b.2 - a.2))
}

/// Checks that the `lower` frontier's cost does not exceed the `upper`
/// frontier's by more than two standard errors at `count` decay rates spread
/// evenly over the interior of the range both frontiers cover.
///
/// The endpoints are skipped: at the low end both frontiers approach the
/// empirical predictor and the comparison is dominated by the error of the
/// decay-rate estimates, which the cost tolerance does not account for.
pub fn frontier_dominance(lower: &[FrontierPoint], upper: &[FrontierPoint], count: usize) -> Result<Vec<DominanceCheck>> {
    let prep = |pts: &[FrontierPoint]| -> Vec<(f64, f64, f64)> {
        let mut v: Vec<_> = pts.iter().map(|p| (p.decay.rate, p.asymptotic_in_sample, p.se)).collect();
        v.sort_by(|a, b| a.0.total_cmp(&b.0));
        v
    };
    let (lo_pts, up_pts) = (prep(lower), prep(upper));
    if lo_pts.len() < 2 || up_pts.len() < 2 || count < 1 {
        return Err(Error::InsufficientData("each frontier needs at least two points".into()));
    }
    let start = lo_pts[0].0.max(up_pts[0].0);
    let end = lo_pts[lo_pts.len() - 1].0.min(up_pts[up_pts.len() - 1].0);
    if !(end > start) {
        return Err(Error::InsufficientData(format!("frontiers share no decay-rate range ({start} .. {end})")));
    }
    Ok((0..count)
        .map(|k| {
            let rate = start + (end - start) * (k + 1) as f64 / (count + 1) as f64;
            let (lc, ls) = interpolate(&lo_pts, rate);
            let (uc, us) = interpolate(&up_pts, rate);
            let tolerance = 2.0 * (ls * ls + us * us).sqrt();
            DominanceCheck { rate, lower_cost: lc, upper_cost: uc, tolerance, holds: lc <= uc + tolerance }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolation_is_linear_and_clamped() {
        let pts = [(0.0, 1.0, 0.1), (1.0, 3.0, 0.3)];
        assert_eq!(interpolate(&pts, 0.5), (2.0, 0.2));
        assert_eq!(interpolate(&pts, -1.0), (1.0, 0.1));
        assert_eq!(interpolate(&pts, 2.0), (3.0, 0.3));
    }

    fn point(rate: f64, cost: f64) -> FrontierPoint {
        FrontierPoint {
            spec: AmbiguitySpec::Entropy { radius: rate },
            decay: DecayEstimate { rate, intercept: 0.0, r_squared: 1.0, points_used: 3 },
            asymptotic_in_sample: cost,
            se: 0.01,
            curve: DisappointmentCurve::default(),
        }
    }

    #[test]
    fn dominance_uses_interior_rates() {
        let lower = [point(0.0, -2.0), point(1.0, 0.0)];
        let upper = [point(0.2, -1.0), point(1.2, 1.0)];
        let checks = frontier_dominance(&lower, &upper, 3).unwrap();
        let rates: Vec<f64> = checks.iter().map(|c| c.rate).collect();
        assert_eq!(rates, vec![0.4, 0.6000000000000001, 0.8]);
        assert!(checks.iter().all(|c| c.holds));
        let reversed = frontier_dominance(&upper, &lower, 3).unwrap();
        assert!(reversed.iter().all(|c| !c.holds));
        assert!(frontier_dominance(&lower, &[point(2.0, 0.0), point(3.0, 0.0)], 2).is_err());
    }
}
