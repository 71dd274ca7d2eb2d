//! Worst-case stationary expected loss over conditional-relative-entropy
//! balls of balanced doublet distributions.
//!
//! The ball is not convex in the doublet, so the solver is a local method
//! run from several starts: a trust-region sequential linear programming
//! scheme whose subproblem maximises the linear objective over the balanced
//! simplex intersected with the linearised rate constraint and a box.

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, Exp1, Uniform};
use serde::{Deserialize, Serialize};

use super::{Branch, PredictorOutput};
use crate::error::{Error, Result};
use crate::lp::{LinearProgram, Relation};
use crate::optim::bisect_boundary;
use crate::rates::divergence::{check_simplex, conditional_relative_entropy_unchecked};
use crate::rng;

const MIN_TRUST: f64 = 1e-10;
const POSITIVE_MASS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarkovSolverOptions {
    pub starts: usize,
    pub iterations: usize,
    pub seed: u64,
}

impl Default for MarkovSolverOptions {
    fn default() -> Self {
        MarkovSolverOptions { starts: 16, iterations: 500, seed: 0 }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn row_sums(theta: &[f64], m: usize) -> Vec<f64> {
    theta.chunks(m).map(|r| r.iter().sum()).collect()
}

/// Adds `sum = total` and the balance rows `row_i - col_i = rhs_i` (the last
/// one is implied by the others) for variables laid out as an `m x m` block
/// followed by `extra` further columns.
fn balanced_rows(lp: &mut LinearProgram, m: usize, extra: usize, total: f64, balance_rhs: &[f64]) {
    let n = m * m + extra;
    let mut ones = vec![1.0; n];
    ones[m * m..].iter_mut().for_each(|v| *v = 0.0);
    lp.add_constraint(ones, Relation::Eq, total);
    for i in 0..m - 1 {
        let mut row = vec![0.0; n];
        for k in 0..m {
            row[i * m + k] += 1.0;
            row[k * m + i] -= 1.0;
        }
        lp.add_constraint(row, Relation::Eq, balance_rhs[i]);
    }
}

/// `max <loss, theta>` over the closed balanced doublet simplex.
fn balanced_supremum(loss: &[f64], m: usize) -> Result<PredictorOutput> {
    let mut lp = LinearProgram::maximize(loss.to_vec());
    balanced_rows(&mut lp, m, 0, 1.0, &vec![0.0; m]);
    let sol = lp.solve().map_err(Error::Lp)?;
    Ok(PredictorOutput { value: dot(loss, &sol.x), worst_case: Some(sol.x), branch: Branch::BallEmpty })
}

/// Radius zero: the ball is the set of balanced doublets whose transition
/// rows match those of `s` on every visited state, with positive mass there.
fn zero_radius(loss: &[f64], s: &[f64], m: usize) -> Result<PredictorOutput> {
    let pi_s = row_sums(s, m);
    let visited: Vec<usize> = (0..m).filter(|&i| pi_s[i] > 0.0).collect();
    let add_rows = |lp: &mut LinearProgram, extra: usize| {
        balanced_rows(lp, m, extra, 1.0, &vec![0.0; m]);
        for &i in &visited {
            for j in 0..m {
                let mut row = vec![0.0; m * m + extra];
                let p = s[i * m + j] / pi_s[i];
                for k in 0..m {
                    row[i * m + k] -= p;
                }
                row[i * m + j] += 1.0;
                lp.add_constraint(row, Relation::Eq, 0.0);
            }
        }
    };

    // Largest achievable minimum mass over the visited states.
    let mut objective = vec![0.0; m * m + 1];
    objective[m * m] = 1.0;
    let mut probe = LinearProgram::maximize(objective);
    add_rows(&mut probe, 1);
    for &i in &visited {
        let mut row = vec![0.0; m * m + 1];
        row[i * m..(i + 1) * m].iter_mut().for_each(|v| *v = -1.0);
        row[m * m] = 1.0;
        probe.add_constraint(row, Relation::Le, 0.0);
    }
    match probe.solve() {
        Ok(sol) if sol.objective > POSITIVE_MASS => {}
        _ => return balanced_supremum(loss, m),
    }

    let mut lp = LinearProgram::maximize(loss.to_vec());
    add_rows(&mut lp, 0);
    let sol = lp.solve().map_err(Error::Lp)?;
    Ok(PredictorOutput::feasible(dot(loss, &sol.x), Some(sol.x)))
}

/// A strictly positive balanced doublet with rate at most `r / 2`: the
/// stationary doublet of the empirical chain mixed with uniform jumps.
fn interior_center(s: &[f64], m: usize, r: f64) -> Vec<f64> {
    let pi_s = row_sums(s, m);
    let eta = 1e-3f64.min(-(-r / 2.0).exp_m1());
    let uniform = 1.0 / m as f64;
    let p = DMatrix::from_fn(m, m, |i, j| {
        let base = if pi_s[i] > 0.0 {
            s[i * m + j] / pi_s[i]
        } else if i == j {
            1.0
        } else {
            0.0
        };
        (1.0 - eta) * base + eta * uniform
    });
    // Stationary law: (P^T - I) pi = 0 with the last equation replaced by sum(pi) = 1.
    let mut a = p.transpose() - DMatrix::identity(m, m);
    a.row_mut(m - 1).fill(1.0);
    let mut rhs = DVector::zeros(m);
    rhs[m - 1] = 1.0;
    let pi = a.lu().solve(&rhs).expect("mixed chain is irreducible");
    (0..m * m).map(|k| (pi[k / m].max(0.0)) * p[(k / m, k % m)]).collect()
}

struct Problem<'a> {
    loss: &'a [f64],
    s: &'a [f64],
    pi_s: Vec<f64>,
    m: usize,
    r: f64,
}

impl Problem<'_> {
    fn rate(&self, theta: &[f64]) -> f64 {
        conditional_relative_entropy_unchecked(self.s, theta, self.m).to_f64()
    }

    fn feasible(&self, theta: &[f64]) -> bool {
        theta.iter().all(|&t| t >= 0.0) && self.rate(theta) <= self.r
    }

    fn value(&self, theta: &[f64]) -> f64 {
        dot(self.loss, theta)
    }

    fn gradient(&self, theta: &[f64]) -> Vec<f64> {
        let m = self.m;
        let pi_t = row_sums(theta, m);
        (0..m * m)
            .map(|k| {
                let i = k / m;
                if self.pi_s[i] <= 0.0 {
                    return 0.0;
                }
                let sij = self.s[k];
                let own = if sij > 0.0 { -sij / theta[k] } else { 0.0 };
                own + self.pi_s[i] / pi_t[i]
            })
            .collect()
    }

    /// Furthest feasible point on the segment from `from` (feasible) to `to`.
    fn retract(&self, from: &[f64], to: &[f64]) -> Vec<f64> {
        let lerp = |t: f64| -> Vec<f64> { from.iter().zip(to).map(|(a, b)| a + t * (b - a)).collect() };
        if self.feasible(to) {
            return to.to_vec();
        }
        let t = bisect_boundary(|t| self.feasible(&lerp(t)), 0.0, 1.0, 1e-13);
        lerp(t)
    }

    /// Trust-region linear subproblem around `theta`.
    fn step(&self, theta: &[f64], radius: f64) -> Option<Vec<f64>> {
        let m = self.m;
        let n = m * m;
        let lo: Vec<f64> = theta.iter().map(|t| (t - radius).max(0.0)).collect();
        let hi: Vec<f64> = theta.iter().map(|t| (t + radius).min(1.0)).collect();
        let grad = self.gradient(theta);
        let total = 1.0 - lo.iter().sum::<f64>();
        let balance: Vec<f64> = (0..m)
            .map(|i| {
                let out: f64 = (0..m).map(|k| lo[i * m + k]).sum();
                let inc: f64 = (0..m).map(|k| lo[k * m + i]).sum();
                inc - out
            })
            .collect();
        let mut lp = LinearProgram::maximize(self.loss.to_vec());
        balanced_rows(&mut lp, m, 0, total, &balance);
        let shift: f64 = grad.iter().zip(theta).zip(&lo).map(|((g, t), l)| g * (t - l)).sum();
        lp.add_constraint(grad, Relation::Le, self.r - self.rate(theta) + shift);
        for k in 0..n {
            let mut row = vec![0.0; n];
            row[k] = 1.0;
            lp.add_constraint(row, Relation::Le, hi[k] - lo[k]);
        }
        let sol = lp.solve().ok()?;
        Some(lo.iter().zip(&sol.x).map(|(l, y)| (l + y).max(0.0)).collect())
    }

    fn climb(&self, start: Vec<f64>, center: &[f64], iterations: usize) -> Vec<f64> {
        let mut theta = start;
        let mut value = self.value(&theta);
        let mut radius = 0.1;
        for _ in 0..iterations {
            if radius < MIN_TRUST {
                break;
            }
            let Some(trial) = self.step(&theta, radius) else {
                radius *= 0.25;
                continue;
            };
            let mut candidates = vec![self.retract(&theta, &trial)];
            if !self.feasible(&trial) {
                candidates.push(self.retract(center, &trial));
            }
            let best = candidates.into_iter().map(|c| (self.value(&c), c)).max_by(|a, b| a.0.total_cmp(&b.0));
            match best {
                Some((v, c)) if v > value + 1e-15 * (1.0 + value.abs()) => {
                    let full = self.feasible(&trial);
                    theta = c;
                    value = v;
                    radius = if full { (radius * 2.0).min(1.0) } else { radius * 0.5 };
                }
                _ => radius *= 0.25,
            }
        }
        theta
    }
}

/// `sup { <loss, theta> : theta balanced doublet, D_c(s || theta) <= r }`.
///
/// `loss` and `s` are row-major `m x m`. The result is the best feasible point
/// found over all starts; an empty ball (only possible at `r = 0`) returns the
/// supremum over the whole balanced simplex.
pub fn markov_ball_worst_case(
    loss: &[f64],
    s: &[f64],
    m: usize,
    r: f64,
    opts: &MarkovSolverOptions,
) -> Result<PredictorOutput> {
    if m < 2 || loss.len() != m * m || s.len() != m * m {
        return Err(Error::Domain(format!("loss and s must be {m} x {m} with m >= 2")));
    }
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::Domain(format!("radius {r} must be a finite nonnegative number")));
    }
    check_simplex(s, "s")?;
    if r == 0.0 {
        return zero_radius(loss, s, m);
    }

    let problem = Problem { loss, s, pi_s: row_sums(s, m), m, r };
    let center = interior_center(s, m, r);
    debug_assert!(problem.feasible(&center));

    let mut rng = rng::stream(opts.seed, &[0x3a7c0]);
    let fraction = Uniform::new(0.5, 1.0).expect("valid range");
    let mut best = center.clone();
    let mut best_value = problem.value(&best);
    for start in 0..opts.starts.max(1) {
        let initial = if start == 0 {
            center.clone()
        } else {
            let mut sym = vec![0.0; m * m];
            for i in 0..m {
                for j in i..m {
                    let v: f64 = Exp1.sample(&mut rng);
                    sym[i * m + j] = v;
                    sym[j * m + i] = v;
                }
            }
            let total: f64 = sym.iter().sum();
            sym.iter_mut().for_each(|v| *v /= total);
            let edge = problem.retract(&center, &sym);
            let t: f64 = fraction.sample(&mut rng);
            center.iter().zip(&edge).map(|(c, e)| c + t * (e - c)).collect()
        };
        let local = problem.climb(initial, &center, opts.iterations);
        let v = problem.value(&local);
        if v > best_value {
            best = local;
            best_value = v;
        }
    }
    Ok(PredictorOutput::feasible(best_value, Some(best)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_radius_balanced_interior_returns_nominal() {
        let s = [0.4, 0.1, 0.1, 0.4];
        let loss = [1.0, -2.0, 3.0, 0.5];
        let out = markov_ball_worst_case(&loss, &s, 2, 0.0, &MarkovSolverOptions::default()).unwrap();
        assert!((out.value - dot(&loss, &s)).abs() < 1e-12);
        assert_eq!(out.branch, Branch::BallFeasible);
    }

    #[test]
    fn absorbed_path_has_empty_zero_ball() {
        // Path 1,1,1,2,2,2: state 2 absorbs, yet state 1 was visited.
        let s = [2.0 / 5.0, 1.0 / 5.0, 0.0, 2.0 / 5.0];
        let loss = [1.0, 0.0, 0.0, 2.0];
        let out = markov_ball_worst_case(&loss, &s, 2, 0.0, &MarkovSolverOptions::default()).unwrap();
        assert_eq!(out.branch, Branch::BallEmpty);
        assert!((out.value - 2.0).abs() < 1e-12);
    }

    #[test]
    fn center_lies_inside_half_ball() {
        let s = [0.0, 0.5, 0.25, 0.25];
        for r in [1e-4, 0.01, 0.3, 2.0] {
            let c = interior_center(&s, 2, r);
            let rate = conditional_relative_entropy_unchecked(&s, &c, 2).unwrap();
            assert!(rate <= r / 2.0 + 1e-15, "r={r} rate={rate}");
            assert!(c.iter().all(|&v| v > 0.0));
        }
    }

    #[test]
    fn solution_is_feasible_and_dominates_nominal() {
        let s = [0.3, 0.2, 0.2, 0.3];
        let loss = [0.0, 1.0, 1.0, 0.0];
        let out = markov_ball_worst_case(&loss, &s, 2, 0.1, &MarkovSolverOptions::default()).unwrap();
        let theta = out.worst_case.unwrap();
        assert!(conditional_relative_entropy_unchecked(&s, &theta, 2).unwrap() <= 0.1 + 1e-8);
        assert!(out.value >= dot(&loss, &s));
    }
}
