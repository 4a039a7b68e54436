//! The Kong–Zhang change of variables `θ = Θ(t, σ)`.
//!
//! `ρ(θ) = ∫₀^θ 2/(Λ₊ − Λ₋)` maps the initial parameter to `σ`, `ϱ = ρ⁻¹`,
//! and
//!
//! ```text
//! Θ(t, σ) = ½ ∫₀^{σ+t} Λ₊(ϱ(ξ)) dξ − ½ ∫₀^{σ−t} Λ₋(ϱ(ξ)) dξ.
//! ```
//!
//! All σ-integrals are evaluated in θ-space through `dξ = ρ'(θ) dθ`, so each
//! reduces to an antiderivative table of an analytic integrand evaluated at
//! `ϱ(σ ± t)`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::evolution::Worldsheet;
use crate::initial_data::{CharacteristicSpeeds, EigenvalueField, InitialCurve, Topology};
use crate::metric::MetricSample;
use crate::quadrature::PrefixTable;
use crate::report::{fit_order, GridMeta, ResidualReport};
use crate::roots::bracketed_newton;
use crate::vector::{axpy, dot, norm_sq, Vector};

/// Relative step tolerance for all inversions.
const INVERSION_TOL: f64 = 1e-15;

pub type Density = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Strictly increasing map `f(x) = f(x₀) + ∫_{x₀}^x density`, tabulated on a
/// uniform grid. Periodic tables satisfy `f(x + P_in) = f(x) + P_out`.
#[derive(Clone)]
pub struct MonotoneTable {
    table: PrefixTable,
    density: Density,
}

impl std::fmt::Debug for MonotoneTable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MonotoneTable")
            .field("origin", &self.table.origin())
            .field("length", &self.table.length())
            .field("cells", &self.table.cells())
            .field("periodic", &self.table.is_periodic())
            .finish()
    }
}

impl MonotoneTable {
    pub fn from_density(
        origin: f64,
        length: f64,
        cells: usize,
        periodic: bool,
        density: Density,
    ) -> Result<Self> {
        let d = density.clone();
        let table = PrefixTable::build(
            origin,
            length,
            cells,
            1,
            periodic,
            &move |x: f64, o: &mut [f64]| o[0] = d(x),
        )?;
        for i in 0..cells {
            let step = table.node_value(i + 1)[0] - table.node_value(i)[0];
            if !(step > 0.0) {
                return Err(Error::NonMonotone { index: i });
            }
        }
        Ok(Self { table, density })
    }

    pub fn cells(&self) -> usize {
        self.table.cells()
    }

    pub fn node(&self, i: usize) -> f64 {
        self.table.node(i)
    }

    pub fn value_at_node(&self, i: usize) -> f64 {
        self.table.node_value(i)[0]
    }

    pub fn is_periodic(&self) -> bool {
        self.table.is_periodic()
    }

    /// `(P_in, P_out)` for periodic tables.
    pub fn periods(&self) -> Option<(f64, f64)> {
        self.is_periodic()
            .then(|| (self.table.length(), self.table.total()[0]))
    }

    /// Range of values on the base domain.
    pub fn value_range(&self) -> (f64, f64) {
        (self.value_at_node(0), self.value_at_node(self.cells()))
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        let mut out = [0.0];
        let d = &self.density;
        self.table
            .eval(x, &|x: f64, o: &mut [f64]| o[0] = d(x), &mut out)?;
        Ok(out[0])
    }

    pub fn derivative(&self, x: f64) -> f64 {
        (self.density)(x)
    }

    /// Solve `f(x) = y`.
    pub fn solve(&self, y: f64) -> Result<f64> {
        let (v0, v1) = self.value_range();
        let (target, shift) = if let Some((p_in, p_out)) = self.periods() {
            let k = ((y - v0) / p_out).floor();
            (y - k * p_out, k * p_in)
        } else {
            let slack = 1e-12 * (v1 - v0).abs().max(1.0);
            if y < v0 - slack || y > v1 + slack {
                return Err(Error::OutOfDomain {
                    value: y,
                    lo: v0,
                    hi: v1,
                });
            }
            (y.clamp(v0, v1), 0.0)
        };
        let n = self.cells();
        let i = self
            .table
            .raw()
            .partition_point(|v| *v <= target)
            .clamp(1, n)
            - 1;
        let (lo, hi) = (self.node(i), self.node(i + 1));
        // Endpoint values may differ from the tabulated ones by rounding.
        let eps = 4.0 * f64::EPSILON * target.abs().max(1.0);
        for end in [lo, hi] {
            if (self.eval(end)? - target).abs() <= eps {
                return Ok(end + shift);
            }
        }
        let x = bracketed_newton(
            |x| Ok((self.eval(x)? - target, self.derivative(x))),
            lo,
            hi,
            INVERSION_TOL,
        )?;
        Ok(x + shift)
    }
}

/// Evaluator for `f⁻¹` of a [`MonotoneTable`].
#[derive(Debug, Clone)]
pub struct InverseTable {
    forward: MonotoneTable,
}

impl InverseTable {
    pub fn eval(&self, y: f64) -> Result<f64> {
        self.forward.solve(y)
    }

    pub fn forward(&self) -> &MonotoneTable {
        &self.forward
    }
}

/// Inverse of a strictly increasing table.
pub fn invert_table(table: &MonotoneTable) -> Result<InverseTable> {
    for i in 0..table.cells() {
        if !(table.value_at_node(i + 1) > table.value_at_node(i)) {
            return Err(Error::NonMonotone { index: i });
        }
    }
    Ok(InverseTable {
        forward: table.clone(),
    })
}

/// Number of table cells implied by an eigenvalue-field grid.
fn cells_for(field: &EigenvalueField, topology: Topology) -> Result<usize> {
    let n = field.grid.len();
    let cells = match topology {
        Topology::Closed { .. } => n,
        Topology::Line { .. } => n.saturating_sub(1),
    };
    if cells < 2 {
        return Err(Error::InvalidArgument(format!(
            "eigenvalue field has {n} samples; need a grid"
        )));
    }
    Ok(cells)
}

/// `ρ(θ) = ∫₀^θ 2/(Λ₊ − Λ₋)` tabulated on the field's grid.
pub fn build_rho(curve: &InitialCurve, field: &EigenvalueField) -> Result<MonotoneTable> {
    let topology = curve.topology();
    let cells = cells_for(field, topology)?;
    if !(field.gap_min > 0.0) {
        return Err(Error::GapCollapse {
            theta: f64::NAN,
            gap: field.gap_min,
        });
    }
    let c = curve.clone();
    let density: Density = Arc::new(move |theta| 2.0 / c.speeds(theta).gap());
    MonotoneTable::from_density(0.0, topology.length(), cells, topology.is_closed(), density)
}

/// Tunables for [`KzMap::build`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct KzOptions {
    /// Flip the sign of `Λ₋` in every evaluation after construction. Fault
    /// injection for exercising the verification pipeline.
    pub flip_lambda_minus: bool,
}

/// `Θ` together with its first derivatives at one `(t, σ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaJet {
    pub theta: f64,
    pub theta_t: f64,
    pub theta_sigma: f64,
    /// `ϱ(σ + t)`
    pub foot_plus: f64,
    /// `ϱ(σ − t)`
    pub foot_minus: f64,
}

/// The built Kong–Zhang transform for one set of Cauchy data.
#[derive(Debug, Clone)]
pub struct KzMap {
    curve: InitialCurve,
    rho: MonotoneTable,
    varrho: InverseTable,
    /// `∫₀^θ (Λ₊ρ', Λ₋ρ')`
    speed_integrals: PrefixTable,
    /// `∫₀^θ q_⊥ ρ'`
    drift_integral: PrefixTable,
    options: KzOptions,
}

fn speed_integrand(curve: &InitialCurve) -> impl Fn(f64, &mut [f64]) + '_ {
    move |theta, out| {
        let s = curve.speeds(theta);
        let w = 2.0 / s.gap();
        out[0] = s.plus * w;
        out[1] = s.minus * w;
    }
}

fn drift_integrand(curve: &InitialCurve) -> impl Fn(f64, &mut [f64]) + '_ {
    move |theta, out| {
        let s = curve.sample(theta);
        let w = 2.0 / CharacteristicSpeeds::from_data(&s.velocity, &s.tangent).gap();
        for (o, q) in out.iter_mut().zip(s.normal_velocity()) {
            *o = w * q;
        }
    }
}

impl KzMap {
    pub fn build(curve: &InitialCurve, field: &EigenvalueField) -> Result<Self> {
        Self::build_with(curve, field, KzOptions::default())
    }

    pub fn build_with(
        curve: &InitialCurve,
        field: &EigenvalueField,
        options: KzOptions,
    ) -> Result<Self> {
        let rho = build_rho(curve, field)?;
        let varrho = invert_table(&rho)?;
        let topology = curve.topology();
        let cells = rho.cells();
        let periodic = topology.is_closed();
        let speed_integrals = PrefixTable::build(
            0.0,
            topology.length(),
            cells,
            2,
            periodic,
            &speed_integrand(curve),
        )?;
        let drift_integral = PrefixTable::build(
            0.0,
            topology.length(),
            cells,
            curve.dim(),
            periodic,
            &drift_integrand(curve),
        )?;
        Ok(Self {
            curve: curve.clone(),
            rho,
            varrho,
            speed_integrals,
            drift_integral,
            options,
        })
    }

    pub fn curve(&self) -> &InitialCurve {
        &self.curve
    }

    pub fn topology(&self) -> Topology {
        self.curve.topology()
    }

    pub fn rho_table(&self) -> &MonotoneTable {
        &self.rho
    }

    /// Σ = ρ(L), the σ-period of a closed string; for a line, the σ-extent of
    /// the data.
    pub fn sigma_length(&self) -> f64 {
        self.rho.value_range().1
    }

    pub fn is_closed(&self) -> bool {
        self.topology().is_closed()
    }

    pub fn rho(&self, theta: f64) -> Result<f64> {
        self.rho.eval(theta)
    }

    pub fn varrho(&self, sigma: f64) -> Result<f64> {
        self.varrho.eval(sigma)
    }

    /// `Λ±(θ)`, honouring fault injection.
    pub fn speeds(&self, theta: f64) -> (f64, f64) {
        let s = self.curve.speeds(theta);
        if self.options.flip_lambda_minus {
            (s.plus, -s.minus)
        } else {
            (s.plus, s.minus)
        }
    }

    /// `ϱ'(σ) = (Λ₊ − Λ₋)(ϱ(σ)) / 2`, given `θ = ϱ(σ)`.
    pub fn varrho_derivative_at(&self, theta: f64) -> f64 {
        let (p, m) = self.speeds(theta);
        0.5 * (p - m)
    }

    /// `Λ±(ϱ(σ))`.
    pub fn lambda_at_sigma(&self, sigma: f64) -> Result<(f64, f64)> {
        Ok(self.speeds(self.varrho(sigma)?))
    }

    fn speed_antiderivative(&self, theta: f64) -> Result<[f64; 2]> {
        let mut out = [0.0; 2];
        self.speed_integrals
            .eval(theta, &speed_integrand(&self.curve), &mut out)?;
        Ok(out)
    }

    /// `B(θ) = ∫₀^θ q_⊥ ρ'`, i.e. `∫₀^{ρ(θ)} G(ξ) dξ` with `G = q_⊥ ∘ ϱ`.
    pub fn drift_antiderivative(&self, theta: f64) -> Result<Vector> {
        let mut out = crate::vector::zeros(self.curve.dim());
        self.drift_integral
            .eval(theta, &drift_integrand(&self.curve), &mut out)?;
        Ok(out)
    }

    /// `∫₀^Σ G`, the rigid displacement of a closed string per σ-period.
    pub fn drift(&self) -> Vector {
        self.drift_integral.total().iter().copied().collect()
    }

    /// Θ(t, σ).
    pub fn theta(&self, t: f64, sigma: f64) -> Result<f64> {
        let plus = self.speed_antiderivative(self.varrho(sigma + t)?)?;
        let minus = self.speed_antiderivative(self.varrho(sigma - t)?)?;
        Ok(0.5 * plus[0] - 0.5 * minus[1])
    }

    /// Θ with `Θ_t = ½Λ₊(ϱ(σ+t)) + ½Λ₋(ϱ(σ−t))` and
    /// `Θ_σ = ½Λ₊(ϱ(σ+t)) − ½Λ₋(ϱ(σ−t))`.
    pub fn theta_jet(&self, t: f64, sigma: f64) -> Result<ThetaJet> {
        let foot_plus = self.varrho(sigma + t)?;
        let foot_minus = self.varrho(sigma - t)?;
        let a = self.speed_antiderivative(foot_plus)?;
        let b = self.speed_antiderivative(foot_minus)?;
        let (lp, _) = self.speeds(foot_plus);
        let (_, lm) = self.speeds(foot_minus);
        Ok(ThetaJet {
            theta: 0.5 * a[0] - 0.5 * b[1],
            theta_t: 0.5 * (lp + lm),
            theta_sigma: 0.5 * (lp - lm),
            foot_plus,
            foot_minus,
        })
    }

    /// Φ(t, θ): the σ with Θ(t, σ) = θ.
    pub fn phi(&self, t: f64, theta: f64) -> Result<f64> {
        let f = |s: f64| -> Result<(f64, f64)> {
            let j = self.theta_jet(t, s)?;
            Ok((j.theta, j.theta_sigma))
        };
        let (target, shift, period) = match self.topology() {
            Topology::Closed { period } => {
                let k = (theta / period).floor();
                (theta - k * period, k * self.sigma_length(), Some(period))
            }
            Topology::Line { .. } => (theta, 0.0, None),
        };

        // Start from the t = 0 inverse and move by whole σ-periods so the
        // residual is at most half a period.
        let mut guess = match period {
            Some(_) => self.rho(target)?,
            None => self.rho(target.clamp(0.0, self.topology().length()))?,
        };
        let (g0, _) = f(guess)?;
        if let Some(l) = period {
            let k = ((g0 - target) / l).round();
            guess -= k * self.sigma_length();
        }
        let (g, d) = f(guess)?;
        let residual = g - target;
        if residual == 0.0 {
            return Ok(guess + shift);
        }

        let span = self.sigma_length();
        let mut step = (residual.abs() / d.max(1e-3)).max(span / 64.0);
        let (mut lo, mut hi) = (guess, guess);
        let mut bracketed = false;
        while step <= 2.0 * span {
            if residual < 0.0 {
                hi = guess + step;
                if f(hi)?.0 >= target {
                    bracketed = true;
                    break;
                }
                lo = hi;
            } else {
                lo = guess - step;
                if f(lo)?.0 <= target {
                    bracketed = true;
                    break;
                }
                hi = lo;
            }
            step *= 2.0;
        }
        if !bracketed {
            return Err(Error::RootNotBracketed(format!(
                "Phi(t = {t}, theta = {theta}) within one period extension"
            )));
        }
        let sigma = bracketed_newton(
            |s| {
                let (v, dv) = f(s)?;
                Ok((v - target, dv))
            },
            lo,
            hi,
            INVERSION_TOL,
        )?;
        Ok(sigma + shift)
    }

    /// Sample ρ, ϱ or Θ tables for inspection.
    pub fn rho_nodes(&self) -> Vec<(f64, f64)> {
        (0..=self.rho.cells())
            .map(|i| (self.rho.node(i), self.rho.value_at_node(i)))
            .collect()
    }
}

/// Finite-difference checks of the transform's derivative identities.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentityResiduals {
    /// Steps, coarsest first.
    pub steps: Vec<f64>,
    /// `max |D_t Θ + g01/g11|` per step.
    pub theta_t: Vec<f64>,
    /// `max |D_σ Θ − √disc/g11|` per step.
    pub theta_sigma: Vec<f64>,
    /// `max |D_t Θ_t − D_σ Θ_σ|` on the jets per step (time step = half
    /// the σ step).
    pub wave: Vec<f64>,
    /// Rounding bound per step for the three series, from `ε·max|Θ|`.
    pub rounding: Vec<[f64; 3]>,
}

/// Below this, a residual is treated as rounding noise.
pub const NOISE_FLOOR: f64 = 1e-11;

impl IdentityResiduals {
    fn series(&self) -> [&Vec<f64>; 3] {
        [&self.theta_t, &self.theta_sigma, &self.wave]
    }

    /// Whether every value of each series is at rounding level.
    pub fn at_noise(&self) -> [bool; 3] {
        let mut out = [true; 3];
        for (k, e) in self.series().into_iter().enumerate() {
            out[k] = e
                .iter()
                .zip(&self.rounding)
                .all(|(v, r)| *v < NOISE_FLOOR.max(r[k]));
        }
        out
    }

    pub fn orders(&self) -> [Option<f64>; 3] {
        let noise = self.at_noise();
        let mut out = [None; 3];
        for (k, e) in self.series().into_iter().enumerate() {
            if !noise[k] {
                out[k] = fit_order(&self.steps, e);
            }
        }
        out
    }

    pub fn to_report(&self, nodes: usize) -> ResidualReport {
        let [ot, os, ow] = self.orders();
        let mut r = ResidualReport::new(GridMeta {
            nodes,
            spacing: *self.steps.last().unwrap_or(&f64::NAN),
            steps: self.steps.clone(),
        });
        let last = |v: &Vec<f64>| *v.last().unwrap_or(&f64::NAN);
        r.push_with_order("kz.theta_t", last(&self.theta_t), ot);
        r.push_with_order("kz.theta_sigma", last(&self.theta_sigma), os);
        r.push_with_order("kz.wave", last(&self.wave), ow);
        r
    }
}

/// Compare central differences of Θ against the metric ratios of the evolved
/// solution at the sample points `(t, σ)`, for each step in `steps`
/// (decreasing). Samples where `|x̃_σ|² ≤ ε` are rejected.
///
/// The metric is that of the pulled-back solution `x(t, θ) = x̃(t, Φ(t, θ))`
/// with `x_θ = x̃_σ / Θ_σ` and `x_t = x̃_t − x_θ Θ_t`.
pub fn kz_identity_residuals<W: Worldsheet + ?Sized>(
    map: &KzMap,
    sheet: &W,
    samples: &[(f64, f64)],
    steps: &[f64],
) -> Result<IdentityResiduals> {
    if steps.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidArgument(
            "refinement steps must be strictly decreasing".into(),
        ));
    }
    // Right-hand sides do not depend on the step.
    let mut rhs = Vec::with_capacity(samples.len());
    for &(t, s) in samples {
        let jet = map.theta_jet(t, s)?;
        let (xt_tilde, xs_tilde) = sheet.tangents(t, s)?;
        let mut x_theta = xs_tilde.clone();
        x_theta.iter_mut().for_each(|v| *v /= jet.theta_sigma);
        let mut x_t = xt_tilde.clone();
        axpy(&mut x_t, -jet.theta_t, &x_theta);
        let g = MetricSample::from_components(
            norm_sq(&x_t) - 1.0,
            dot(&x_t, &x_theta),
            norm_sq(&x_theta),
        );
        // The ratios are undefined where the string has collapsed.
        if g.g11 <= f64::EPSILON {
            return Err(Error::Degeneration {
                t,
                theta: s,
                discriminant: g.disc,
            });
        }
        rhs.push((-g.g01 / g.g11, g.disc.max(0.0).sqrt() / g.g11, g.disc));
    }

    let mut out = IdentityResiduals {
        steps: steps.to_vec(),
        theta_t: Vec::new(),
        theta_sigma: Vec::new(),
        wave: Vec::new(),
        rounding: Vec::new(),
    };
    let (mut scale, mut jet_scale) = (1.0f64, 1.0f64);
    for &(t, s) in samples {
        let j = map.theta_jet(t, s)?;
        scale = scale.max(j.theta.abs());
        jet_scale = jet_scale.max(j.theta_t.abs()).max(j.theta_sigma.abs());
    }
    let delta = 2.0 * f64::EPSILON * scale;
    let delta_jet = 2.0 * f64::EPSILON * jet_scale;
    for &h in steps {
        let ht = 0.5 * h;
        let (mut et, mut es, mut ew) = (0.0f64, 0.0f64, 0.0f64);
        for (&(t, s), &(rt, rs, disc)) in samples.iter().zip(&rhs) {
            if disc < 0.0 {
                return Err(Error::SpaceLike {
                    theta: f64::NAN,
                    discriminant: disc,
                });
            }
            let tp = map.theta(t + h, s)?;
            let tm = map.theta(t - h, s)?;
            let sp = map.theta(t, s + h)?;
            let sm = map.theta(t, s - h)?;
            et = et.max(((tp - tm) / (2.0 * h) - rt).abs());
            es = es.max(((sp - sm) / (2.0 * h) - rs).abs());
            let jtp = map.theta_jet(t + ht, s)?;
            let jtm = map.theta_jet(t - ht, s)?;
            let jsp = map.theta_jet(t, s + h)?;
            let jsm = map.theta_jet(t, s - h)?;
            let wave = (jtp.theta_t - jtm.theta_t) / (2.0 * ht)
                - (jsp.theta_sigma - jsm.theta_sigma) / (2.0 * h);
            ew = ew.max(wave.abs());
        }
        out.theta_t.push(et);
        out.theta_sigma.push(es);
        out.wave.push(ew);
        out.rounding
            .push([delta / h, delta / h, 4.0 * delta_jet / h]);
    }
    // Growth under refinement is cancellation unless the whole series is
    // already at rounding level.
    let noise = out.at_noise();
    for (k, series) in out.series().into_iter().enumerate() {
        if noise[k] {
            continue;
        }
        for w in series.windows(2) {
            if w[1] > 1.05 * w[0] {
                return Err(Error::StepTooSmall {
                    coarse: w[0],
                    fine: w[1],
                });
            }
        }
    }
    Ok(out)
}
