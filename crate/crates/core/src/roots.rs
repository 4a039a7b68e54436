//! Bracketed root finding for increasing functions.

use crate::error::{Error, Result};

/// Solve `f(x) = 0` for an increasing `f` on `[lo, hi]` with
/// `f(lo) ≤ 0 ≤ f(hi)`.
///
/// `f` returns the value and derivative. Newton steps are taken from the
/// current iterate and replaced by bisection whenever they leave the bracket,
/// so convergence is guaranteed. Iteration stops when the step falls below
/// `tol * max(1, |x|)`.
pub fn bracketed_newton<F>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<(f64, f64)>,
{
    let (flo, _) = f(lo)?;
    if flo == 0.0 {
        return Ok(lo);
    }
    let (fhi, _) = f(hi)?;
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo > 0.0 || fhi < 0.0 {
        return Err(Error::RootNotBracketed(format!(
            "f({lo}) = {flo:e}, f({hi}) = {fhi:e}"
        )));
    }
    // Linear interpolation start.
    let mut x = lo - flo * (hi - lo) / (fhi - flo);
    if !(x > lo && x < hi) {
        x = 0.5 * (lo + hi);
    }
    for _ in 0..200 {
        let (fx, dfx) = f(x)?;
        if fx == 0.0 {
            return Ok(x);
        }
        if fx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let newton = x - fx / dfx;
        let next = if dfx > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        let step = (next - x).abs();
        x = next;
        if step <= tol * x.abs().max(1.0) || hi - lo <= tol * x.abs().max(1.0) {
            return Ok(x);
        }
    }
    Ok(x)
}
