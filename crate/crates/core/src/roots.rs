//! Bracketed bisection and geometric bracket discovery.
//!
//! Every root in the model is located with these two routines. Bisection
//! runs until the bracket can no longer be split in double precision, which
//! is well inside the required absolute tolerance of `1e-12`.

use crate::error::{Error, Result};

/// Absolute tolerance guaranteed on every root returned by [`bisect`].
pub const ROOT_TOL: f64 = 1e-12;

const MAX_BISECTIONS: usize = 2_000;
const MAX_DOUBLINGS: usize = 1_100;

/// Finds a root of `f` in `[lo, hi]`. `f(lo)` and `f(hi)` must have strictly
/// opposite signs.
pub fn bisect<F>(mut f: F, lo: f64, hi: f64, what: &'static str) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if !(fa.is_finite() && fb.is_finite()) || fa.signum() == fb.signum() {
        return Err(Error::BracketFailure { what });
    }
    let left_positive = fa > 0.0;
    for _ in 0..MAX_BISECTIONS {
        let mid = a + 0.5 * (b - a);
        if mid <= a || mid >= b {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if (fm > 0.0) == left_positive {
            a = mid;
        } else {
            b = mid;
        }
    }
    debug_assert!(b - a <= ROOT_TOL * a.abs().max(1.0));
    Ok(a + 0.5 * (b - a))
}

/// Doubles `start` until `pred` holds, returning the first point that
/// satisfies it.
pub fn expand_until<F>(start: f64, mut pred: F, what: &'static str) -> Result<f64>
where
    F: FnMut(f64) -> bool,
{
    let mut x = start;
    for _ in 0..MAX_DOUBLINGS {
        if !x.is_finite() {
            break;
        }
        if pred(x) {
            return Ok(x);
        }
        x *= 2.0;
    }
    Err(Error::BracketFailure { what })
}
