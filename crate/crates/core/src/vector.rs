//! Small dense vectors in the ambient space ℝⁿ.

use smallvec::SmallVec;

/// A point or tangent vector in ℝⁿ. Inline storage covers n ≤ 4.
pub type Vector = SmallVec<[f64; 4]>;

pub fn zeros(dim: usize) -> Vector {
    smallvec::smallvec![0.0; dim]
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    norm_sq(a).sqrt()
}

/// `|a - b|`
pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// `a += s * b`
#[inline]
pub fn axpy(a: &mut [f64], s: f64, b: &[f64]) {
    for (x, y) in a.iter_mut().zip(b) {
        *x += s * y;
    }
}
