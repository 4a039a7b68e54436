//! Independent reference computations shared by the integration tests.
//!
//! Nothing here calls into the library's quadrature or inversion code.

#![allow(dead_code)]

use std::f64::consts::PI;

/// Perimeter of the ellipse with semi-axes `a ≥ b` by the
/// arithmetic–geometric mean.
pub fn ellipse_perimeter(a: f64, b: f64) -> f64 {
    let (mut an, mut bn) = (a, b);
    let mut sum = 0.5 * (a * a - b * b);
    let mut pow = 0.5;
    for _ in 0..40 {
        let c = 0.5 * (an - bn);
        let (a1, b1) = (0.5 * (an + bn), (an * bn).sqrt());
        pow *= 2.0;
        sum += pow * c * c;
        an = a1;
        bn = b1;
        if c.abs() < 1e-300 {
            break;
        }
    }
    4.0 * PI * (a * a - sum) / (an + bn)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Adaptive Simpson quadrature of `f` on `[a, b]`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(&f, a, b, fa, fm, fb, whole, tol, 50)
}

/// Root of increasing `f` on `[lo, hi]` by bisection.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi.abs().max(1.0) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Roots of `g11 λ² + 2 g01 λ + g00 = 0`, larger first, by the
/// cancellation-free quadratic formula.
pub fn quadratic_speeds(g00: f64, g01: f64, g11: f64) -> (f64, f64) {
    let disc = (g01 * g01 - g00 * g11).sqrt();
    let q = -(g01 + g01.signum() * disc);
    let (r1, r2) = if q != 0.0 {
        (q / g11, g00 / q)
    } else {
        (disc / g11, -disc / g11)
    };
    (r1.max(r2), r1.min(r2))
}

/// Speed of the ellipse `(a cos θ, b sin θ)`.
pub fn ellipse_speed(a: f64, b: f64, theta: f64) -> f64 {
    (a * a * theta.sin().powi(2) + b * b * theta.cos().powi(2)).sqrt()
}

/// Arc length of the ellipse from 0 to θ, which is ρ for zero velocity.
pub fn ellipse_rho(a: f64, b: f64, theta: f64) -> f64 {
    adaptive_simpson(|s| ellipse_speed(a, b, s), 0.0, theta, 1e-14)
}

/// Inverse of [`ellipse_rho`] for σ within one period.
pub fn ellipse_varrho(a: f64, b: f64, sigma: f64) -> f64 {
    let total = ellipse_perimeter(a, b);
    let k = (sigma / total).floor();
    let s = sigma - k * total;
    bisect(|th| ellipse_rho(a, b, th) - s, 0.0, 2.0 * PI) + k * 2.0 * PI
}
