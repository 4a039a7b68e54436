//! Cauchy data for the string: initial position `p(θ)`, velocity `q(θ)`,
//! and the characteristic fields `Λ±(θ)` they induce.

use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::vector::{dot, norm_sq, zeros, Vector};

/// Parameter domain of the string.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Topology {
    /// Closed string, θ ∈ [0, period).
    Closed { period: f64 },
    /// Open stretch of an infinite string with data on θ ∈ [0, extent].
    Line { extent: f64 },
}

impl Topology {
    pub fn closed(period: f64) -> Self {
        Topology::Closed { period }
    }

    /// Length of the θ-domain (the period for closed strings).
    pub fn length(&self) -> f64 {
        match *self {
            Topology::Closed { period } => period,
            Topology::Line { extent } => extent,
        }
    }

    pub fn is_closed(&self) -> bool {
        matches!(self, Topology::Closed { .. })
    }

    fn validate(&self) -> Result<()> {
        let len = self.length();
        if !(len > 0.0) || !len.is_finite() {
            return Err(Error::NonPositivePeriod(len));
        }
        Ok(())
    }
}

impl Default for Topology {
    fn default() -> Self {
        Topology::Closed { period: TAU }
    }
}

/// Uniform θ samples: `n` nodes on `[0, L)` for closed strings, `n` nodes on
/// `[0, extent]` (endpoints included) for lines.
pub fn uniform_grid(topology: Topology, n: usize) -> Vec<f64> {
    let len = topology.length();
    match topology {
        Topology::Closed { .. } => (0..n).map(|i| len * i as f64 / n as f64).collect(),
        Topology::Line { .. } => {
            let cells = n.saturating_sub(1).max(1);
            (0..n).map(|i| len * i as f64 / cells as f64).collect()
        }
    }
}

/// How the initial position is described.
#[derive(Debug, Clone, PartialEq)]
pub enum Presentation {
    /// `circle [radius]`, `ellipse [a, b]`, or `line []`.
    Preset { name: String, params: Vec<f64> },
    /// Per-component cosine/sine coefficients `c_k cos(kωθ) + s_k sin(kωθ)`,
    /// `ω = 2π / L`.
    Fourier {
        cos: Vec<Vec<f64>>,
        sin: Vec<Vec<f64>>,
    },
}

impl Presentation {
    pub fn preset(name: &str, params: &[f64]) -> Self {
        Presentation::Preset {
            name: name.to_string(),
            params: params.to_vec(),
        }
    }
}

/// How the initial velocity is described.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum VelocitySpec {
    #[default]
    Zero,
    Constant(Vec<f64>),
    Fourier {
        cos: Vec<Vec<f64>>,
        sin: Vec<Vec<f64>>,
    },
}

/// Truncated Fourier series in each ambient component.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierSeries {
    omega: f64,
    cos: Vec<Vec<f64>>,
    sin: Vec<Vec<f64>>,
}

impl FourierSeries {
    fn new(cos: &[Vec<f64>], sin: &[Vec<f64>], dim: usize, period: f64) -> Result<Self> {
        if cos.len() != dim || sin.len() != dim {
            return Err(Error::CoefficientMismatch(format!(
                "expected {dim} components, got {} cosine and {} sine arrays",
                cos.len(),
                sin.len()
            )));
        }
        for (j, (c, s)) in cos.iter().zip(sin).enumerate() {
            if c.is_empty() && s.is_empty() {
                return Err(Error::EmptyCoefficients { component: j });
            }
            if !c.is_empty() && !s.is_empty() && c.len() != s.len() {
                return Err(Error::CoefficientMismatch(format!(
                    "component {j}: {} cosine vs {} sine terms",
                    c.len(),
                    s.len()
                )));
            }
        }
        Ok(Self {
            omega: TAU / period,
            cos: cos.to_vec(),
            sin: sin.to_vec(),
        })
    }

    fn eval(&self, theta: f64, value: &mut [f64], deriv: Option<&mut [f64]>) {
        let w = self.omega;
        let mut d = deriv;
        for j in 0..value.len() {
            let (c, s) = (&self.cos[j], &self.sin[j]);
            let terms = c.len().max(s.len());
            let (mut v, mut dv) = (0.0, 0.0);
            for k in 0..terms {
                let kw = k as f64 * w;
                let (sn, cs) = (kw * theta).sin_cos();
                let ck = c.get(k).copied().unwrap_or(0.0);
                let sk = s.get(k).copied().unwrap_or(0.0);
                v += ck * cs + sk * sn;
                dv += kw * (sk * cs - ck * sn);
            }
            value[j] = v;
            if let Some(d) = d.as_deref_mut() {
                d[j] = dv;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Shape {
    Ellipse { a: f64, b: f64, omega: f64 },
    Line,
    Fourier(FourierSeries),
}

#[derive(Debug, Clone, PartialEq)]
enum Velocity {
    Constant(Vector),
    Fourier(FourierSeries),
}

/// `p`, `p'` and `q` at one parameter value.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveSample {
    pub position: Vector,
    pub tangent: Vector,
    pub velocity: Vector,
}

impl CurveSample {
    /// Component of `q` normal to the curve, `q − p'⟨q, p'⟩/|p'|²`.
    pub fn normal_velocity(&self) -> Vector {
        let s = dot(&self.velocity, &self.tangent) / norm_sq(&self.tangent);
        self.velocity
            .iter()
            .zip(&self.tangent)
            .map(|(q, t)| q - s * t)
            .collect()
    }
}

/// Cauchy data `x(0, θ) = p(θ)`, `x_t(0, θ) = q(θ)` with analytic `p'`.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialCurve {
    dim: usize,
    topology: Topology,
    presentation: Presentation,
    shape: Shape,
    velocity: Velocity,
}

/// Build a curve from its presentation. Closed curves are checked for
/// periodicity of `p`, `p'` and `q`.
pub fn make_curve(
    presentation: &Presentation,
    velocity: &VelocitySpec,
    dim: usize,
    topology: Topology,
) -> Result<InitialCurve> {
    if dim < 2 {
        return Err(Error::InvalidDimension(dim));
    }
    topology.validate()?;
    let omega = TAU / topology.length();
    let shape = match presentation {
        Presentation::Preset { name, params } => match name.as_str() {
            "circle" => {
                let r = params.first().copied().unwrap_or(1.0);
                if params.len() > 1 {
                    return Err(Error::InvalidArgument(format!(
                        "circle takes one parameter, got {}",
                        params.len()
                    )));
                }
                Shape::Ellipse { a: r, b: r, omega }
            }
            "ellipse" => match params.as_slice() {
                [a, b] => Shape::Ellipse {
                    a: *a,
                    b: *b,
                    omega,
                },
                _ => {
                    return Err(Error::InvalidArgument(format!(
                        "ellipse takes parameters (a, b), got {}",
                        params.len()
                    )))
                }
            },
            "line" => Shape::Line,
            other => return Err(Error::UnknownPreset(other.to_string())),
        },
        Presentation::Fourier { cos, sin } => {
            Shape::Fourier(FourierSeries::new(cos, sin, dim, topology.length())?)
        }
    };
    let velocity = match velocity {
        VelocitySpec::Zero => Velocity::Constant(zeros(dim)),
        VelocitySpec::Constant(v) => {
            if v.len() != dim {
                return Err(Error::CoefficientMismatch(format!(
                    "velocity has {} components, dimension is {dim}",
                    v.len()
                )));
            }
            Velocity::Constant(v.iter().copied().collect())
        }
        VelocitySpec::Fourier { cos, sin } => {
            Velocity::Fourier(FourierSeries::new(cos, sin, dim, topology.length())?)
        }
    };
    let curve = InitialCurve {
        dim,
        topology,
        presentation: presentation.clone(),
        shape,
        velocity,
    };
    if topology.is_closed() {
        curve.check_periodic()?;
    }
    Ok(curve)
}

impl InitialCurve {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    pub fn presentation(&self) -> &Presentation {
        &self.presentation
    }

    /// Evaluate `p(θ)`, `p'(θ)`, `q(θ)`.
    pub fn sample(&self, theta: f64) -> CurveSample {
        let mut position = zeros(self.dim);
        let mut tangent = zeros(self.dim);
        match &self.shape {
            Shape::Ellipse { a, b, omega } => {
                let (s, c) = (omega * theta).sin_cos();
                position[0] = a * c;
                position[1] = b * s;
                tangent[0] = -a * omega * s;
                tangent[1] = b * omega * c;
            }
            Shape::Line => {
                position[0] = theta;
                tangent[0] = 1.0;
            }
            Shape::Fourier(series) => series.eval(theta, &mut position, Some(&mut tangent)),
        }
        let velocity = match &self.velocity {
            Velocity::Constant(v) => v.clone(),
            Velocity::Fourier(series) => {
                let mut v = zeros(self.dim);
                series.eval(theta, &mut v, None);
                v
            }
        };
        CurveSample {
            position,
            tangent,
            velocity,
        }
    }

    /// Position only; cheaper than [`sample`](Self::sample) for Fourier data.
    pub fn position(&self, theta: f64) -> Vector {
        self.sample(theta).position
    }

    /// Characteristic speeds `Λ±(θ)` without admissibility checks.
    pub fn speeds(&self, theta: f64) -> CharacteristicSpeeds {
        let s = self.sample(theta);
        CharacteristicSpeeds::from_data(&s.velocity, &s.tangent)
    }

    fn check_periodic(&self) -> Result<()> {
        let l = self.topology.length();
        let (s0, s1) = (self.sample(0.0), self.sample(l));
        let scale = 1.0 + l;
        for (field, a, b) in [
            ("position", &s0.position, &s1.position),
            ("position derivative", &s0.tangent, &s1.tangent),
            ("velocity", &s0.velocity, &s1.velocity),
        ] {
            let mismatch = crate::vector::distance(a, b);
            if mismatch > 1e-12 * scale {
                return Err(Error::NotPeriodic { field, mismatch });
            }
        }
        Ok(())
    }
}

/// `Λ±` at one parameter value together with the quantities they are built
/// from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharacteristicSpeeds {
    pub plus: f64,
    pub minus: f64,
    /// `⟨q, p'⟩² − (|q|² − 1)|p'|²`
    pub discriminant: f64,
    /// `|p'|²`
    pub tangent_sq: f64,
}

impl CharacteristicSpeeds {
    /// `Λ± = (−⟨q,p'⟩ ± √disc) / |p'|²`. A negative discriminant yields NaN
    /// speeds; callers check `discriminant` first.
    pub fn from_data(q: &[f64], dp: &[f64]) -> Self {
        let qp = dot(q, dp);
        let pp = norm_sq(dp);
        let disc = qp * qp - (norm_sq(q) - 1.0) * pp;
        let root = disc.sqrt();
        Self {
            plus: (-qp + root) / pp,
            minus: (-qp - root) / pp,
            discriminant: disc,
            tangent_sq: pp,
        }
    }

    pub fn gap(&self) -> f64 {
        self.plus - self.minus
    }
}

/// Admissibility thresholds for Cauchy data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    /// Minimum `|p'|`.
    pub immersion: f64,
    /// Minimum discriminant.
    pub discriminant: f64,
    /// Minimum `Λ₊ − Λ₋`.
    pub gap: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            immersion: 1e-8,
            discriminant: 1e-12,
            gap: 1e-12,
        }
    }
}

/// `Λ±` sampled on a θ-grid.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenvalueField {
    pub grid: Vec<f64>,
    pub lambda_plus: Vec<f64>,
    pub lambda_minus: Vec<f64>,
    pub gap_min: f64,
}

/// Evaluate `Λ±` at every grid point, rejecting degenerate or space-like
/// samples.
pub fn lambda_init(curve: &InitialCurve, grid: &[f64]) -> Result<EigenvalueField> {
    lambda_init_with(curve, grid, &Thresholds::default())
}

pub fn lambda_init_with(
    curve: &InitialCurve,
    grid: &[f64],
    thresholds: &Thresholds,
) -> Result<EigenvalueField> {
    let mut lambda_plus = Vec::with_capacity(grid.len());
    let mut lambda_minus = Vec::with_capacity(grid.len());
    let mut gap_min = f64::INFINITY;
    for &theta in grid {
        let s = curve.sample(theta);
        let sp = CharacteristicSpeeds::from_data(&s.velocity, &s.tangent);
        let speed = sp.tangent_sq.sqrt();
        if !(speed >= thresholds.immersion) {
            return Err(Error::DegenerateImmersion { theta, speed });
        }
        if !(sp.discriminant >= thresholds.discriminant) {
            return Err(Error::SpaceLike {
                theta,
                discriminant: sp.discriminant,
            });
        }
        gap_min = gap_min.min(sp.gap());
        lambda_plus.push(sp.plus);
        lambda_minus.push(sp.minus);
    }
    if !(gap_min > thresholds.gap) && !grid.is_empty() {
        let i = lambda_plus
            .iter()
            .zip(&lambda_minus)
            .map(|(p, m)| p - m)
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(i, _)| i)
            .unwrap_or(0);
        return Err(Error::GapCollapse {
            theta: grid[i],
            gap: gap_min,
        });
    }
    Ok(EigenvalueField {
        grid: grid.to_vec(),
        lambda_plus,
        lambda_minus,
        gap_min,
    })
}

/// Result of [`validate_timelike`].
#[derive(Debug, Clone, PartialEq)]
pub struct TimelikeReport {
    pub min_speed: f64,
    pub min_speed_at: f64,
    pub min_discriminant: f64,
    pub min_discriminant_at: f64,
    pub min_gap: f64,
    pub min_gap_at: f64,
    pub pass: bool,
}

/// Minimum `|p'|`, discriminant and gap over the grid. Never fails; a
/// negative discriminant shows up as `pass = false`.
pub fn validate_timelike(
    curve: &InitialCurve,
    grid: &[f64],
    thresholds: &Thresholds,
) -> TimelikeReport {
    let mut r = TimelikeReport {
        min_speed: f64::INFINITY,
        min_speed_at: f64::NAN,
        min_discriminant: f64::INFINITY,
        min_discriminant_at: f64::NAN,
        min_gap: f64::INFINITY,
        min_gap_at: f64::NAN,
        pass: false,
    };
    for &theta in grid {
        let s = curve.sample(theta);
        let sp = CharacteristicSpeeds::from_data(&s.velocity, &s.tangent);
        let speed = sp.tangent_sq.sqrt();
        // A negative discriminant has no real gap; report it as negative.
        let gap = if sp.discriminant >= 0.0 {
            sp.gap()
        } else {
            -(-sp.discriminant).sqrt()
        };
        if speed < r.min_speed {
            r.min_speed = speed;
            r.min_speed_at = theta;
        }
        if sp.discriminant < r.min_discriminant {
            r.min_discriminant = sp.discriminant;
            r.min_discriminant_at = theta;
        }
        if gap < r.min_gap {
            r.min_gap = gap;
            r.min_gap_at = theta;
        }
    }
    r.pass = !grid.is_empty()
        && r.min_speed >= thresholds.immersion
        && r.min_discriminant >= thresholds.discriminant
        && r.min_gap > thresholds.gap;
    r
}
