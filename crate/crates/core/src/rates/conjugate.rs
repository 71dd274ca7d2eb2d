use crate::ext::ExtendedReal;
use crate::optim::golden_min;

/// Objective values above this are taken as evidence of an unbounded supremum.
const DIVERGENCE: f64 = 1e8;
/// Bracket expansion stops at this distance from the starting point.
const MAX_REACH: f64 = 1e9;
const WIDTH: f64 = 1e-10;
const MAX_SWEEPS: usize = 20_000;

enum LineMax {
    Finite(f64, f64),
    Unbounded,
}

/// Maximizes a concave `g` (which may be `-inf`) along a line starting at `x0`.
fn line_max<G: FnMut(f64) -> f64>(mut g: G, x0: f64) -> LineMax {
    let g0 = g(x0);
    let step = 1.0;
    let mut bracket = None;
    for dir in [1.0, -1.0] {
        let mut prev = x0;
        let mut cur = x0 + dir * step;
        let mut gcur = g(cur);
        if gcur <= g0 {
            continue;
        }
        loop {
            if gcur > DIVERGENCE {
                return LineMax::Unbounded;
            }
            let next = x0 + 2.0 * (cur - x0);
            if (next - x0).abs() > MAX_REACH {
                bracket = Some((prev.min(cur), prev.max(cur), cur, gcur));
                break;
            }
            let gnext = g(next);
            if gnext <= gcur {
                bracket = Some((prev.min(next), prev.max(next), cur, gcur));
                break;
            }
            prev = cur;
            cur = next;
            gcur = gnext;
        }
        break;
    }
    let (lo, hi, best_x, best_g) = bracket.unwrap_or((x0 - step, x0 + step, x0, g0));
    let (x, neg) = golden_min(|x| -g(x), lo, hi, WIDTH);
    if -neg >= best_g {
        LineMax::Finite(x, -neg)
    } else {
        LineMax::Finite(best_x, best_g)
    }
}

/// Numerical Legendre transform `sup_lambda <lambda, s> - Lambda(lambda)`.
///
/// `log_mgf` must be convex, finite near the origin and vanish there. Scalar
/// problems use a bracketed golden-section search; vector problems cycle
/// through the coordinates until a sweep stops improving.
pub fn numerical_conjugate<F>(log_mgf: F, s: &[f64]) -> ExtendedReal
where
    F: Fn(&[f64]) -> ExtendedReal,
{
    let dim = s.len();
    let mut lambda = vec![0.0; dim];
    let objective = |lambda: &[f64]| -> f64 {
        match log_mgf(lambda) {
            ExtendedReal::Finite(v) => lambda.iter().zip(s).map(|(l, x)| l * x).sum::<f64>() - v,
            ExtendedReal::PosInfinity => f64::NEG_INFINITY,
        }
    };
    let mut value = objective(&lambda);
    for _ in 0..MAX_SWEEPS {
        let before = value;
        for k in 0..dim {
            let start = lambda[k];
            let mut probe = lambda.clone();
            let line = line_max(
                |x| {
                    probe[k] = x;
                    objective(&probe)
                },
                start,
            );
            match line {
                LineMax::Unbounded => return ExtendedReal::PosInfinity,
                LineMax::Finite(x, v) if v > value => {
                    lambda[k] = x;
                    value = v;
                }
                LineMax::Finite(..) => {}
            }
        }
        if dim == 1 || value - before <= 1e-15 * (1.0 + value.abs()) {
            break;
        }
    }
    if value > DIVERGENCE {
        ExtendedReal::PosInfinity
    } else {
        ExtendedReal::Finite(value.max(0.0))
    }
}
