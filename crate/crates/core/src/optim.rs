//! Scalar search primitives shared by the rate and DRO modules.

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section minimization of a unimodal `f` on `[lo, hi]`.
///
/// Stops once the bracket is narrower than `tol`; returns `(argmin, min)`
/// over all points evaluated. `f` may return `+inf`.
pub(crate) fn golden_min<F: FnMut(f64) -> f64>(mut f: F, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    // Floating-point spacing bounds the achievable width for large |x|.
    let floor = 4.0 * f64::EPSILON * lo.abs().max(hi.abs());
    let tol = tol.max(floor);
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Bisection for the boundary between a feasible point `inside` and an
/// infeasible point `outside`; returns the last feasible point.
pub(crate) fn bisect_boundary<F: FnMut(f64) -> bool>(
    mut feasible: F,
    mut inside: f64,
    mut outside: f64,
    tol: f64,
) -> f64 {
    while (outside - inside).abs() > tol {
        let mid = 0.5 * (inside + outside);
        if mid == inside || mid == outside {
            break;
        }
        if feasible(mid) {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    inside
}
