//! Induced metric of the worldsheet `(t, θ) ↦ (t, x(t, θ))` in Minkowski
//! space with signature `(−, +, …, +)`, its characteristic speeds, and the
//! normal projection `M = I − G g̃`.

use crate::error::{Error, Result};
use crate::vector::{dot, norm, norm_sq};

/// Minimum `|x_θ|` accepted by [`induced_metric`].
pub const IMMERSION_THRESHOLD: f64 = 1e-8;

/// Induced metric components at one worldsheet point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricSample {
    /// `|x_t|² − 1`
    pub g00: f64,
    /// `⟨x_t, x_θ⟩`
    pub g01: f64,
    /// `|x_θ|²`
    pub g11: f64,
    /// `g01² − g00·g11`
    pub disc: f64,
    /// NaN for space-like samples.
    pub lambda_plus: f64,
    /// NaN for space-like samples.
    pub lambda_minus: f64,
}

impl MetricSample {
    pub fn from_components(g00: f64, g01: f64, g11: f64) -> Self {
        let disc = g01 * g01 - g00 * g11;
        let (lambda_plus, lambda_minus) = if disc >= 0.0 {
            let root = disc.sqrt();
            ((-g01 + root) / g11, (-g01 - root) / g11)
        } else {
            (f64::NAN, f64::NAN)
        };
        Self {
            g00,
            g01,
            g11,
            disc,
            lambda_plus,
            lambda_minus,
        }
    }

    pub fn is_space_like(&self) -> bool {
        self.disc < 0.0
    }

    /// `det(g_{μν}) = −disc`.
    pub fn det(&self) -> f64 {
        self.g00 * self.g11 - self.g01 * self.g01
    }

    /// Closed-form inverse `(g^{00}, g^{01}, g^{11})`.
    pub fn inverse(&self) -> Result<(f64, f64, f64)> {
        let det = self.det();
        if det.abs() <= 1e-12 {
            return Err(Error::SingularMetric { det });
        }
        Ok((self.g11 / det, -self.g01 / det, self.g00 / det))
    }
}

/// Metric components from the worldsheet tangents `x_t`, `x_θ`.
pub fn induced_metric(x_t: &[f64], x_theta: &[f64]) -> Result<MetricSample> {
    let speed = norm(x_theta);
    if !(speed >= IMMERSION_THRESHOLD) {
        return Err(Error::DegenerateImmersion {
            theta: f64::NAN,
            speed,
        });
    }
    Ok(MetricSample::from_components(
        norm_sq(x_t) - 1.0,
        dot(x_t, x_theta),
        norm_sq(x_theta),
    ))
}

/// `λ± = (−g01 ± √disc) / g11`.
pub fn eigen_speeds(sample: &MetricSample) -> Result<(f64, f64)> {
    if sample.is_space_like() {
        return Err(Error::SpaceLike {
            theta: f64::NAN,
            discriminant: sample.disc,
        });
    }
    if !(sample.g11 > 0.0) {
        return Err(Error::DegenerateImmersion {
            theta: f64::NAN,
            speed: sample.g11.max(0.0).sqrt(),
        });
    }
    Ok((sample.lambda_plus, sample.lambda_minus))
}

/// The projection `M` at one worldsheet point and how well it behaves.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionCheck {
    /// Ambient dimension `1 + n`.
    pub size: usize,
    /// Row-major `(1+n) × (1+n)`.
    pub m: Vec<f64>,
    pub metric: MetricSample,
    /// `‖M X₀‖ / ‖X₀‖`
    pub tangent_t_residual: f64,
    /// `‖M X₁‖ / ‖X₁‖`
    pub tangent_theta_residual: f64,
    /// Frobenius norm of `M² − M`.
    pub idempotence_residual: f64,
    pub trace: f64,
}

impl ProjectionCheck {
    /// `M v` for `v ∈ ℝ^{1+n}`.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let k = self.size;
        (0..k)
            .map(|r| dot(&self.m[r * k..(r + 1) * k], v))
            .collect()
    }
}

/// Build `M = I − Q g⁻¹ Qᵀ g̃` from `X₀ = (1, x_t)`, `X₁ = (0, x_θ)` and
/// measure how far it is from an orthogonal projection onto the normal space.
pub fn projection_audit(x_t: &[f64], x_theta: &[f64]) -> Result<ProjectionCheck> {
    let n = x_t.len();
    let k = n + 1;
    let metric =
        MetricSample::from_components(norm_sq(x_t) - 1.0, dot(x_t, x_theta), norm_sq(x_theta));
    metric.inverse()?;

    let mut x0 = vec![1.0; k];
    x0[1..].copy_from_slice(x_t);
    let mut x1 = vec![0.0; k];
    x1[1..].copy_from_slice(x_theta);

    // Same plane, orthogonal basis: E₀ = X₀ − (g01/g11) X₁, E₁ = X₁. Then
    // G = Q g⁻¹ Qᵀ = E₀E₀ᵀ/⟨E₀,E₀⟩ + E₁E₁ᵀ/g11 without the cancellation in
    // det g, and M = I − G diag(−1, 1, …, 1).
    let shift = metric.g01 / metric.g11;
    let e0: Vec<f64> = x0.iter().zip(&x1).map(|(a, b)| a - shift * b).collect();
    let e00 = norm_sq(&e0[1..]) - 1.0;
    if !(e00 < 0.0) {
        return Err(Error::SingularMetric {
            det: e00 * metric.g11,
        });
    }
    let mut m = vec![0.0; k * k];
    for r in 0..k {
        for c in 0..k {
            let g = e0[r] * e0[c] / e00 + x1[r] * x1[c] / metric.g11;
            let eta = if c == 0 { -1.0 } else { 1.0 };
            m[r * k + c] = if r == c { 1.0 } else { 0.0 } - g * eta;
        }
    }

    let apply =
        |v: &[f64]| -> Vec<f64> { (0..k).map(|r| dot(&m[r * k..(r + 1) * k], v)).collect() };
    let tangent_t_residual = norm(&apply(&x0)) / norm(&x0);
    let tangent_theta_residual = norm(&apply(&x1)) / norm(&x1);

    let mut idem = 0.0;
    for r in 0..k {
        for c in 0..k {
            let sq: f64 = (0..k).map(|j| m[r * k + j] * m[j * k + c]).sum();
            idem += (sq - m[r * k + c]).powi(2);
        }
    }
    let trace = (0..k).map(|i| m[i * k + i]).sum();

    Ok(ProjectionCheck {
        size: k,
        m,
        metric,
        tangent_t_residual,
        tangent_theta_residual,
        idempotence_residual: idem.sqrt(),
        trace,
    })
}
