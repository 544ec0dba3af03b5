//! Bisection root-finding and the double-well stationary points.
//!
//! The well locations are always computed from the derivative's sign changes
//! rather than hard-coded, so every consumer sees oracle-confirmed values.

use crate::objectives::double_well_eval;

/// Bisects f on [a, b] (requires a sign change) down to an interval of
/// machine-level width; returns the midpoint.
pub fn bisect_root(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let (fa, fb) = (f(a), f(b));
    assert!(
        fa.signum() != fb.signum() && fa != 0.0 || fb == 0.0 || fa == 0.0,
        "no sign change on [{a}, {b}]: f(a) = {fa}, f(b) = {fb}"
    );
    if fa == 0.0 {
        return a;
    }
    if fb == 0.0 {
        return b;
    }
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid == a || mid == b {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == fa.signum() {
            a = mid;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}

/// The two minimizers of the double-well potential.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoubleWellRoots {
    /// Global minimizer, near −2.94.
    pub global_min: f64,
    /// Local minimizer, near 2.22.
    pub local_min: f64,
}

/// Locates both minimizers by bisection on dU over the sign-change brackets
/// [−3.2, −2.7] and [2.0, 2.4].
pub fn double_well_minima() -> DoubleWellRoots {
    let du = |theta: f64| double_well_eval(theta).1;
    DoubleWellRoots {
        global_min: bisect_root(du, -3.2, -2.7),
        local_min: bisect_root(du, 2.0, 2.4),
    }
}
