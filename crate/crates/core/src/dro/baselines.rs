//! Moment and Wasserstein ambiguity sets around an empirical pmf on `{1..d}`.

use super::PredictorOutput;
use crate::error::{Error, Result};
use crate::lp::{LinearProgram, Relation};
use crate::rates::divergence::check_simplex;

fn validate(loss: &[f64], s: &[f64], eps: f64) -> Result<()> {
    if loss.len() != s.len() || s.is_empty() {
        return Err(Error::Domain(format!("loss row has {} entries, s has {}", loss.len(), s.len())));
    }
    if !(eps >= 0.0) {
        return Err(Error::Domain(format!("radius {eps} must be nonnegative")));
    }
    check_simplex(s, "s")
}

fn nominal(loss: &[f64], s: &[f64]) -> f64 {
    loss.iter().zip(s).map(|(l, p)| l * p).sum()
}

/// `sup <loss, theta>` over pmfs whose first `moments` raw moments are within
/// `eps` of those of `s`, solved exactly as a linear program.
pub fn moment_set_worst_case(loss: &[f64], s: &[f64], eps: f64, moments: usize) -> Result<PredictorOutput> {
    validate(loss, s, eps)?;
    if moments == 0 {
        return Err(Error::Domain("at least one moment constraint is required".into()));
    }
    let d = s.len();
    let mut lp = LinearProgram::maximize(loss.to_vec());
    lp.add_constraint(vec![1.0; d], Relation::Eq, 1.0);
    for j in 1..=moments as i32 {
        // Rows are scaled by d^-j to keep the tableau well conditioned.
        let scale = (d as f64).powi(-j);
        let row: Vec<f64> = (1..=d).map(|i| (i as f64).powi(j) * scale).collect();
        let target: f64 = row.iter().zip(s).map(|(a, p)| a * p).sum();
        let slack = eps * scale;
        if slack == 0.0 {
            lp.add_constraint(row, Relation::Eq, target);
        } else {
            lp.add_constraint(row.clone(), Relation::Le, target + slack);
            lp.add_constraint(row, Relation::Ge, target - slack);
        }
    }
    let sol = lp.solve().map_err(Error::Lp)?;
    let value = nominal(loss, &sol.x);
    Ok(PredictorOutput::feasible(value.max(nominal(loss, s)), Some(sol.x)))
}

/// `sup <loss, theta>` over the type-1 Wasserstein ball of radius `eps`
/// (ground cost `|i - j|`), as a transport linear program over the plan
/// `gamma` with `gamma 1 = s`; the model is `theta = gamma^T 1`.
pub fn wasserstein_set_worst_case_lp(loss: &[f64], s: &[f64], eps: f64) -> Result<PredictorOutput> {
    validate(loss, s, eps)?;
    if eps == 0.0 {
        return Ok(PredictorOutput::feasible(nominal(loss, s), Some(s.to_vec())));
    }
    let d = s.len();
    let sources: Vec<usize> = (0..d).filter(|&i| s[i] > 0.0).collect();
    let n = sources.len() * d;
    let mut objective = Vec::with_capacity(n);
    let mut cost = Vec::with_capacity(n);
    for &i in &sources {
        for j in 0..d {
            objective.push(loss[j]);
            cost.push((i as f64 - j as f64).abs());
        }
    }
    let mut lp = LinearProgram::maximize(objective);
    for (k, &i) in sources.iter().enumerate() {
        let mut row = vec![0.0; n];
        row[k * d..(k + 1) * d].iter_mut().for_each(|v| *v = 1.0);
        lp.add_constraint(row, Relation::Eq, s[i]);
    }
    lp.add_constraint(cost, Relation::Le, eps);
    let sol = lp.solve().map_err(Error::Lp)?;
    let mut theta = vec![0.0; d];
    for (k, _) in sources.iter().enumerate() {
        for j in 0..d {
            theta[j] += sol.x[k * d + j];
        }
    }
    Ok(PredictorOutput::feasible(nominal(loss, &theta), Some(theta)))
}

/// One linear piece of a source's gain-versus-transport-cost frontier.
struct Segment {
    slope: f64,
    /// Transport budget the piece consumes at full use.
    budget: f64,
    source: usize,
    from: usize,
    to: usize,
}

/// Same value as [`wasserstein_set_worst_case_lp`], computed by a greedy
/// fractional multiple-choice knapsack.
///
/// Each source state may ship its mass to any destination; the achievable
/// gain as a function of distance is the upper concave envelope of the
/// points `(|i - j|, loss_j - loss_i)`. Filling the budget with the envelope
/// pieces of steepest slope first is optimal for this linear program.
pub fn wasserstein_set_worst_case(loss: &[f64], s: &[f64], eps: f64) -> Result<PredictorOutput> {
    validate(loss, s, eps)?;
    let d = s.len();
    let mut segments = Vec::new();
    for i in (0..d).filter(|&i| s[i] > 0.0) {
        // Best destination at each distance, keeping only strict improvements.
        let mut points: Vec<(f64, usize)> = vec![(0.0, i)];
        let mut best = loss[i];
        for dist in 1..d {
            let candidates = [i.checked_sub(dist), (i + dist < d).then_some(i + dist)];
            let choice = candidates.into_iter().flatten().max_by(|&a, &b| loss[a].total_cmp(&loss[b]).then(b.cmp(&a)));
            if let Some(j) = choice {
                if loss[j] > best {
                    best = loss[j];
                    points.push((dist as f64, j));
                }
            }
        }
        // Upper concave hull starting at the origin point.
        let mut hull: Vec<(f64, usize)> = Vec::new();
        for p in points {
            while hull.len() >= 2 {
                let (c1, j1) = hull[hull.len() - 2];
                let (c2, j2) = hull[hull.len() - 1];
                let s12 = (loss[j2] - loss[j1]) / (c2 - c1);
                let s2p = (loss[p.1] - loss[j2]) / (p.0 - c2);
                if s2p >= s12 {
                    hull.pop();
                } else {
                    break;
                }
            }
            hull.push(p);
        }
        for w in hull.windows(2) {
            let (c1, j1) = w[0];
            let (c2, j2) = w[1];
            segments.push(Segment {
                slope: (loss[j2] - loss[j1]) / (c2 - c1),
                budget: s[i] * (c2 - c1),
                source: i,
                from: j1,
                to: j2,
            });
        }
    }
    // Steepest first; ties resolved deterministically by position.
    segments.sort_by(|a, b| b.slope.total_cmp(&a.slope).then(a.source.cmp(&b.source)).then(a.to.cmp(&b.to)));
    let mut theta = s.to_vec();
    let mut remaining = eps;
    for seg in &segments {
        if remaining <= 0.0 {
            break;
        }
        let used = seg.budget.min(remaining);
        let moved = s[seg.source] * used / seg.budget;
        theta[seg.from] -= moved;
        theta[seg.to] += moved;
        remaining -= used;
    }
    theta.iter_mut().for_each(|t| *t = t.max(0.0));
    Ok(PredictorOutput::feasible(nominal(loss, &theta), Some(theta)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moment_examples() {
        let out = moment_set_worst_case(&[0.0, 1.0], &[0.5, 0.5], 0.0, 1).unwrap();
        assert!((out.value - 0.5).abs() < 1e-12);
        let third = 1.0 / 3.0;
        let out = moment_set_worst_case(&[0.0, 1.0, 0.0], &[third; 3], 0.0, 1).unwrap();
        assert!((out.value - 1.0).abs() < 1e-12);
        let out = moment_set_worst_case(&[0.3, -1.0, 2.5, 0.0], &[0.25; 4], 1e6, 4).unwrap();
        assert!((out.value - 2.5).abs() < 1e-12);
    }

    #[test]
    fn wasserstein_examples() {
        for solve in [wasserstein_set_worst_case, wasserstein_set_worst_case_lp] {
            let out = solve(&[0.0, 1.0], &[0.5, 0.5], 0.0).unwrap();
            assert_eq!(out.value, 0.5);
            let out = solve(&[0.0, 1.0], &[0.5, 0.5], 0.2).unwrap();
            assert!((out.value - 0.7).abs() < 1e-12);
            // Full transport to the argmax state costs 0.5*2 + 0.3*1.
            let out = solve(&[1.0, 0.0, 3.0], &[0.5, 0.3, 0.2], 1.3).unwrap();
            assert!((out.value - 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn greedy_prefers_cheap_gains() {
        // From state 1 the nearby state 2 gives most gain per unit distance.
        let loss = [0.0, 2.0, 2.5, 0.0];
        let s = [1.0, 0.0, 0.0, 0.0];
        for eps in [0.5, 1.0, 1.5, 2.0, 3.0] {
            let g = wasserstein_set_worst_case(&loss, &s, eps).unwrap().value;
            let l = wasserstein_set_worst_case_lp(&loss, &s, eps).unwrap().value;
            assert!((g - l).abs() < 1e-12, "eps {eps}: {g} vs {l}");
        }
    }
}
