//! Worst-case expectations over relative-entropy balls around an empirical pmf.

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use super::PredictorOutput;
use crate::error::{Error, Result};
use crate::optim::golden_min;
use crate::rates::divergence::{check_simplex, relative_entropy_unchecked};
use crate::rng;

const ALPHA_WIDTH: f64 = 1e-10;

fn validate(loss: &[f64], s: &[f64], r: f64) -> Result<()> {
    if loss.len() != s.len() || s.len() < 2 {
        return Err(Error::Domain(format!("loss row has {} entries, s has {}", loss.len(), s.len())));
    }
    if loss.iter().any(|l| !l.is_finite()) {
        return Err(Error::Domain("losses must be finite".into()));
    }
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::Domain(format!("radius {r} must be a finite nonnegative number")));
    }
    check_simplex(s, "s")
}

fn nominal(loss: &[f64], s: &[f64]) -> f64 {
    loss.iter().zip(s).map(|(l, p)| l * p).sum()
}

fn argmax(loss: &[f64]) -> usize {
    let mut best = 0;
    for (i, &l) in loss.iter().enumerate() {
        if l > loss[best] {
            best = i;
        }
    }
    best
}

/// `sup { <loss, theta> : D(s || theta) <= r }` through its one-dimensional
/// dual `min_{alpha >= max loss} alpha - e^{-r} prod_i (alpha - loss_i)^{s_i}`.
///
/// The returned worst-case model is recovered from the dual minimiser.
pub fn entropy_dro_dual(loss: &[f64], s: &[f64], r: f64) -> Result<PredictorOutput> {
    validate(loss, s, r)?;
    if r == 0.0 {
        return Ok(PredictorOutput::feasible(nominal(loss, s), Some(s.to_vec())));
    }
    let top = loss[argmax(loss)];
    // Work with beta = alpha - max loss and the gaps max loss - loss_i >= 0.
    let support: Vec<(f64, f64)> =
        s.iter().zip(loss).filter(|(&p, _)| p > 0.0).map(|(&p, &l)| (p, top - l)).collect();
    let shrink = (-r).exp();
    let log_g = |beta: f64| -> f64 { support.iter().map(|&(p, gap)| p * (beta + gap).ln()).sum() };
    let objective = |beta: f64| beta - shrink * log_g(beta).exp();

    let at_boundary = objective(0.0);
    let mut lo = 0.0;
    let mut mid = 1.0;
    let mut f_mid = objective(mid);
    let mut hi = 2.0;
    let mut f_hi = objective(hi);
    while f_hi < f_mid {
        lo = mid;
        mid = hi;
        f_mid = f_hi;
        hi *= 2.0;
        f_hi = objective(hi);
    }
    let (mut beta, mut value) = golden_min(objective, lo, hi, ALPHA_WIDTH);
    if f_mid < value {
        beta = mid;
        value = f_mid;
    }
    if at_boundary <= value {
        beta = 0.0;
        value = at_boundary;
    }

    let multiplier = shrink * log_g(beta).exp();
    let mut theta: Vec<f64> = s
        .iter()
        .zip(loss)
        .map(|(&p, &l)| if p > 0.0 { p * multiplier / (beta + top - l) } else { 0.0 })
        .collect();
    let mass: f64 = theta.iter().sum();
    if mass.is_finite() && mass > 0.0 {
        if mass < 1.0 {
            theta[argmax(loss)] += 1.0 - mass;
        } else {
            theta.iter_mut().for_each(|t| *t /= mass);
        }
    } else {
        theta = s.to_vec();
    }
    Ok(PredictorOutput::feasible(top + value, Some(theta)))
}

/// Search effort for [`entropy_primal_oracle`].
#[derive(Debug, Clone, Copy)]
pub struct PrimalOracleOptions {
    pub starts: usize,
    pub screen: usize,
    pub max_iterations: usize,
    pub seed: u64,
}

impl Default for PrimalOracleOptions {
    fn default() -> Self {
        PrimalOracleOptions { starts: 32, screen: 1_000_000, max_iterations: 2_000, seed: 0 }
    }
}

/// Projects onto the hyperplane `sum = 0` and normalises; `None` for the zero vector.
fn tangent_unit(v: &[f64]) -> Option<Vec<f64>> {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    let u: Vec<f64> = v.iter().map(|x| x - mean).collect();
    let norm = u.iter().map(|x| x * x).sum::<f64>().sqrt();
    (norm > 1e-300).then(|| u.into_iter().map(|x| x / norm).collect())
}

/// Writes `q = softmax(log s + rho u)` and returns `D(s || q)` with its
/// derivative in `rho`, using `D = log E_s[e^{rho u}] - rho E_s[u]`.
fn tilt(s: &[f64], u: &[f64], rho: f64, q: &mut [f64]) -> (f64, f64) {
    let peak = u.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut z = 0.0;
    for ((qi, &si), &ui) in q.iter_mut().zip(s).zip(u) {
        *qi = si * (rho * (ui - peak)).exp();
        z += *qi;
    }
    q.iter_mut().for_each(|x| *x /= z);
    let mean_s = nominal(u, s);
    let mean_q = nominal(u, q);
    (z.ln() + rho * (peak - mean_s), mean_q - mean_s)
}

/// Moves along the log-coordinate ray `softmax(log s + rho u)` to the ball
/// boundary and leaves the boundary point in `q`. `D` is convex and
/// increasing in `rho`, so Newton from an upper bracket converges
/// monotonically.
fn ray_boundary(s: &[f64], u: &[f64], r: f64, q: &mut [f64]) {
    if r == 0.0 {
        q.copy_from_slice(s);
        return;
    }
    let mut rho = 1.0;
    while tilt(s, u, rho, q).0 < r && rho < 1e12 {
        rho *= 2.0;
    }
    for _ in 0..200 {
        let (div, slope) = tilt(s, u, rho, q);
        if !(slope > 0.0) {
            break;
        }
        let step = (div - r) / slope;
        rho -= step;
        if step.abs() <= 1e-15 * rho.abs().max(1.0) {
            break;
        }
    }
    tilt(s, u, rho, q);
}

/// Brute-force lower bound for `sup { <loss, theta> : D(s || theta) <= r }`.
///
/// On the support of `s` every boundary point of the ball is
/// `softmax(log s + rho(u) u)` for a direction `u` with zero sum; states
/// outside the support can additionally receive a mass `m`, which costs
/// `-log(1 - m)` of the radius. The objective is climbed over `(u, m)` by
/// finite-difference gradient ascent from several starts, and a uniform
/// Dirichlet screen of the simplex is kept as a safety net.
pub fn entropy_primal_oracle(loss: &[f64], s: &[f64], r: f64, opts: &PrimalOracleOptions) -> Result<f64> {
    validate(loss, s, r)?;
    let d = s.len();
    let support: Vec<usize> = (0..d).filter(|&i| s[i] > 0.0).collect();
    let s_sup: Vec<f64> = support.iter().map(|&i| s[i]).collect();
    let l_sup: Vec<f64> = support.iter().map(|&i| loss[i]).collect();
    let off_best = (0..d).filter(|&i| s[i] == 0.0).map(|i| loss[i]).reduce(f64::max);
    let n = support.len();
    let dims = n + usize::from(off_best.is_some());
    let max_mass = -(-r).exp_m1();

    let mut q = vec![0.0; n];
    let value_of = |v: &[f64], q: &mut [f64]| -> f64 {
        let (mass, radius) = match off_best {
            Some(_) => {
                let m = max_mass / (1.0 + (-v[n]).exp());
                (m, (r + (-m).ln_1p()).max(0.0))
            }
            None => (0.0, r),
        };
        let inner = match tangent_unit(&v[..n]) {
            Some(u) if n > 1 => {
                ray_boundary(&s_sup, &u, radius, q);
                nominal(&l_sup, q)
            }
            _ => nominal(&l_sup, &s_sup),
        };
        (1.0 - mass) * inner + mass * off_best.unwrap_or(0.0)
    };
    let normalise = |v: &mut [f64]| {
        let norm = v[..n].iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            v[..n].iter_mut().for_each(|x| *x /= norm);
        }
    };

    let mut best = nominal(loss, s);
    let mut rng = rng::stream(opts.seed, &[0x0a_c1e]);
    for start in 0..opts.starts {
        let mut v: Vec<f64> = if start == 0 {
            let mut v = l_sup.clone();
            v.resize(dims, 0.0);
            v
        } else {
            (0..dims).map(|_| StandardNormal.sample(&mut rng)).collect()
        };
        normalise(&mut v);
        let mut f = value_of(&v, &mut q);
        let mut step = 0.5;
        let h = 1e-7;
        for _ in 0..opts.max_iterations {
            let grad: Vec<f64> = (0..dims)
                .map(|k| {
                    let mut up = v.clone();
                    up[k] += h;
                    let mut down = v.clone();
                    down[k] -= h;
                    (value_of(&up, &mut q) - value_of(&down, &mut q)) / (2.0 * h)
                })
                .collect();
            let gnorm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
            if !(gnorm > 1e-14) {
                break;
            }
            let mut improved = false;
            while step > 1e-12 {
                let mut trial: Vec<f64> = v.iter().zip(&grad).map(|(x, g)| x + step * g / gnorm).collect();
                normalise(&mut trial);
                let ft = value_of(&trial, &mut q);
                if ft > f {
                    v = trial;
                    f = ft;
                    improved = true;
                    step = (step * 2.0).min(1.0);
                    break;
                }
                step *= 0.5;
            }
            if !improved {
                break;
            }
        }
        best = best.max(f);
    }

    let mut theta = vec![0.0; d];
    for _ in 0..opts.screen {
        let mut total = 0.0;
        for t in theta.iter_mut() {
            *t = rng.sample::<f64, _>(Exp1);
            total += *t;
        }
        let value = nominal(loss, &theta) / total;
        if value > best {
            theta.iter_mut().for_each(|t| *t /= total);
            if relative_entropy_unchecked(s, &theta).le(r) {
                best = value;
            }
        }
    }
    Ok(best)
}
