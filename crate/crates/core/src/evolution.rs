//! Exact evolution in Kong–Zhang coordinates.
//!
//! In the `(t, σ)` chart the string obeys `x̃_tt = x̃_σσ` with data
//! `F = p ∘ ϱ`, `G = q_⊥ ∘ ϱ`, where `q_⊥` is the part of the initial
//! velocity normal to the curve. The d'Alembert formula then gives the
//! solution and its derivatives in closed form.

use crate::error::{Error, Result};
use crate::kz_map::KzMap;
use crate::metric::MetricSample;
use crate::report::{GridMeta, ResidualReport};
use crate::vector::{axpy, dot, norm_sq, zeros, Vector};

/// Position and first derivatives of a worldsheet at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct WorldsheetPoint {
    pub position: Vector,
    /// `∂/∂t`
    pub velocity: Vector,
    /// `∂/∂σ` (or `∂/∂θ` in the original chart)
    pub tangent: Vector,
}

/// Anything that can evaluate `x̃(t, σ)` and its first derivatives.
pub trait Worldsheet {
    fn dim(&self) -> usize;

    fn point(&self, t: f64, sigma: f64) -> Result<WorldsheetPoint>;

    /// `(x̃_t, x̃_σ)`
    fn tangents(&self, t: f64, sigma: f64) -> Result<(Vector, Vector)> {
        let p = self.point(t, sigma)?;
        Ok((p.velocity, p.tangent))
    }
}

/// The d'Alembert solution built from a [`KzMap`].
#[derive(Debug, Clone, Copy)]
pub struct ExactSolution<'a> {
    map: &'a KzMap,
}

impl<'a> ExactSolution<'a> {
    pub fn new(map: &'a KzMap) -> Self {
        Self { map }
    }

    pub fn map(&self) -> &'a KzMap {
        self.map
    }
}

impl Worldsheet for ExactSolution<'_> {
    fn dim(&self) -> usize {
        self.map.curve().dim()
    }

    fn point(&self, t: f64, sigma: f64) -> Result<WorldsheetPoint> {
        let map = self.map;
        let curve = map.curve();
        let feet = [map.varrho(sigma + t)?, map.varrho(sigma - t)?];
        let n = curve.dim();

        let mut position = zeros(n);
        let mut velocity = zeros(n);
        let mut tangent = zeros(n);
        for (k, &theta) in feet.iter().enumerate() {
            // +1 for the σ + t foot, −1 for σ − t.
            let sign = if k == 0 { 1.0 } else { -1.0 };
            let s = curve.sample(theta);
            let g = s.normal_velocity();
            let stretch = map.varrho_derivative_at(theta);
            let drift = map.drift_antiderivative(theta)?;
            axpy(&mut position, 0.5, &s.position);
            axpy(&mut position, 0.5 * sign, &drift);
            axpy(&mut velocity, 0.5 * sign * stretch, &s.tangent);
            axpy(&mut velocity, 0.5, &g);
            axpy(&mut tangent, 0.5 * stretch, &s.tangent);
            axpy(&mut tangent, 0.5 * sign, &g);
        }
        Ok(WorldsheetPoint {
            position,
            velocity,
            tangent,
        })
    }
}

/// Which coordinates a state's parameter refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Chart {
    /// Parameter is σ; companion is ϱ(σ).
    KongZhang,
    /// Parameter is θ; companion is Φ(t, θ) when known.
    Original,
}

/// The string at one instant, sampled on a parameter grid.
#[derive(Debug, Clone, PartialEq)]
pub struct StringState {
    pub t: f64,
    pub chart: Chart,
    pub dim: usize,
    pub param: Vec<f64>,
    /// Companion coordinate per sample; empty when unknown.
    pub companion: Vec<f64>,
    /// Row-major `len × dim`.
    pub position: Vec<f64>,
    pub velocity: Vec<f64>,
    pub tangent: Vec<f64>,
}

impl StringState {
    pub fn len(&self) -> usize {
        self.param.len()
    }

    pub fn is_empty(&self) -> bool {
        self.param.is_empty()
    }

    pub fn position(&self, i: usize) -> &[f64] {
        &self.position[i * self.dim..(i + 1) * self.dim]
    }

    pub fn velocity(&self, i: usize) -> &[f64] {
        &self.velocity[i * self.dim..(i + 1) * self.dim]
    }

    pub fn tangent(&self, i: usize) -> &[f64] {
        &self.tangent[i * self.dim..(i + 1) * self.dim]
    }

    /// `max_i |x(i)|`
    pub fn max_radius(&self) -> f64 {
        (0..self.len())
            .map(|i| norm_sq(self.position(i)).sqrt())
            .fold(0.0, f64::max)
    }
}

/// Uniform σ-grid: `n` nodes on `[0, Σ)` for closed strings, or on
/// `[t_max, Σ − t_max]` for a line so that states up to `t_max` stay inside
/// the domain of dependence of the data.
pub fn sigma_grid(map: &KzMap, n: usize, t_max: f64) -> Result<Vec<f64>> {
    let len = map.sigma_length();
    if map.is_closed() {
        return Ok((0..n).map(|i| len * i as f64 / n as f64).collect());
    }
    let (a, b) = (t_max.abs(), len - t_max.abs());
    if !(b > a) || n < 2 {
        return Err(Error::OutOfDomain {
            value: t_max,
            lo: 0.0,
            hi: 0.5 * len,
        });
    }
    Ok((0..n)
        .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
        .collect())
}

/// x̃ and its derivatives at time `t` on `grid`.
pub fn dalembert_state(map: &KzMap, t: f64, grid: &[f64]) -> Result<StringState> {
    let sheet = ExactSolution::new(map);
    let dim = sheet.dim();
    let mut state = StringState {
        t,
        chart: Chart::KongZhang,
        dim,
        param: grid.to_vec(),
        companion: Vec::with_capacity(grid.len()),
        position: Vec::with_capacity(grid.len() * dim),
        velocity: Vec::with_capacity(grid.len() * dim),
        tangent: Vec::with_capacity(grid.len() * dim),
    };
    for &sigma in grid {
        let p = sheet.point(t, sigma)?;
        state.companion.push(map.varrho(sigma)?);
        state.position.extend_from_slice(&p.position);
        state.velocity.extend_from_slice(&p.velocity);
        state.tangent.extend_from_slice(&p.tangent);
    }
    Ok(state)
}

/// Where a trajectory came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    ExactDalembert,
    OracleNonlinear,
}

/// Periodic structure of a state's parameter grid: `x(s + length) = x(s) + winding`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamPeriod {
    pub length: f64,
    pub winding: Vector,
}

/// States at strictly increasing times on one shared grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub states: Vec<StringState>,
    pub provenance: Provenance,
    /// Set when the grid covers exactly one period, uniformly.
    pub period: Option<ParamPeriod>,
}

impl Trajectory {
    pub fn new(
        states: Vec<StringState>,
        provenance: Provenance,
        period: Option<ParamPeriod>,
    ) -> Result<Self> {
        if states.windows(2).any(|w| !(w[1].t > w[0].t)) {
            return Err(Error::InvalidArgument(
                "trajectory times must be strictly increasing".into(),
            ));
        }
        if let Some(first) = states.first() {
            if states
                .iter()
                .any(|s| s.param != first.param || s.dim != first.dim || s.chart != first.chart)
            {
                return Err(Error::MismatchedGrids);
            }
        }
        Ok(Self {
            states,
            provenance,
            period,
        })
    }

    pub fn times(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.t).collect()
    }
}

/// Exact states at `times` on the default σ-grid with `n` nodes.
pub fn exact_trajectory(map: &KzMap, times: &[f64], n: usize) -> Result<Trajectory> {
    let t_max = times.iter().fold(0.0f64, |a, t| a.max(t.abs()));
    let grid = sigma_grid(map, n, t_max)?;
    let states = times
        .iter()
        .map(|&t| dalembert_state(map, t, &grid))
        .collect::<Result<Vec<_>>>()?;
    let period = map.is_closed().then(|| ParamPeriod {
        length: map.sigma_length(),
        winding: zeros(map.curve().dim()),
    });
    Trajectory::new(states, Provenance::ExactDalembert, period)
}

/// `λ±(t, θ) = Λ±(ϱ(Φ(t, θ) ± t))`.
pub fn lambda_solution(map: &KzMap, t: f64, theta: f64) -> Result<(f64, f64)> {
    let sigma = map.phi(t, theta)?;
    let (plus, _) = map.speeds(map.varrho(sigma + t)?);
    let (_, minus) = map.speeds(map.varrho(sigma - t)?);
    Ok((plus, minus))
}

/// Orthogonal-gauge residuals `max |⟨x̃_t, x̃_σ⟩|` and
/// `max ||x̃_t|² + |x̃_σ|² − 1|`.
pub fn gauge_check(state: &StringState) -> ResidualReport {
    let (mut orth, mut norm) = (0.0f64, 0.0f64);
    for i in 0..state.len() {
        let (v, s) = (state.velocity(i), state.tangent(i));
        orth = orth.max(dot(v, s).abs());
        norm = norm.max((norm_sq(v) + norm_sq(s) - 1.0).abs());
    }
    let spacing = if state.len() > 1 {
        state.param[1] - state.param[0]
    } else {
        f64::NAN
    };
    let mut r = ResidualReport::new(GridMeta {
        nodes: state.len(),
        spacing,
        steps: Vec::new(),
    });
    r.push("gauge.orthogonality", orth);
    r.push("gauge.normalization", norm);
    r
}

/// `∫ (|x̃_t|² + |x̃_σ|²) dσ` by the trapezoid rule over one σ-period.
pub fn energy(state: &StringState, period: f64) -> f64 {
    let h = period / state.len() as f64;
    (0..state.len())
        .map(|i| norm_sq(state.velocity(i)) + norm_sq(state.tangent(i)))
        .sum::<f64>()
        * h
}

/// `max |D_tt x̃ − D_σσ x̃|` over `samples` with σ-step `h` and time step
/// `h/2`. Equal steps would make the stencil exact for every wave solution.
pub fn wave_residual<W: Worldsheet + ?Sized>(
    sheet: &W,
    samples: &[(f64, f64)],
    h: f64,
) -> Result<f64> {
    let ht = 0.5 * h;
    let mut worst = 0.0f64;
    for &(t, s) in samples {
        let c = sheet.point(t, s)?.position;
        let tp = sheet.point(t + ht, s)?.position;
        let tm = sheet.point(t - ht, s)?.position;
        let sp = sheet.point(t, s + h)?.position;
        let sm = sheet.point(t, s - h)?.position;
        for j in 0..c.len() {
            let r =
                (tp[j] - 2.0 * c[j] + tm[j]) / (ht * ht) - (sp[j] - 2.0 * c[j] + sm[j]) / (h * h);
            worst = worst.max(r.abs());
        }
    }
    Ok(worst)
}

fn uniform_spacing(values: &[f64]) -> Option<f64> {
    let h = values.get(1)? - values.first()?;
    let ok = values
        .windows(2)
        .all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h.abs().max(1e-300));
    (ok && h > 0.0).then_some(h)
}

/// Contracted Christoffel symbols `Γ^ρ = g^{μν} Γ^ρ_{μν}` of the induced
/// metric of a trajectory, by second-order finite differences.
///
/// Tangents are differenced from the sampled positions, the metric is built
/// from them, and its derivatives are differenced again. In harmonic
/// coordinates the result is pure discretisation error.
pub fn harmonic_check(traj: &Trajectory) -> Result<ResidualReport> {
    let states = &traj.states;
    let k_count = states.len();
    if k_count < 5 {
        return Err(Error::TooFewStates {
            needed: 5,
            got: k_count,
        });
    }
    let times = traj.times();
    let ht = uniform_spacing(&times).ok_or(Error::NonUniformTimes)?;
    let grid = &states[0].param;
    let n = grid.len();
    let hs = uniform_spacing(grid).ok_or(Error::MismatchedGrids)?;
    let dim = states[0].dim;
    let periodic = traj.period.as_ref();
    if n < 5 {
        return Err(Error::InvalidArgument(
            "harmonic check needs at least 5 nodes".into(),
        ));
    }

    // Position at (k, i) with i possibly outside [0, n) for periodic grids.
    let pos = |k: usize, i: isize| -> Vector {
        let s = &states[k];
        let wraps = i.div_euclid(n as isize);
        let idx = i.rem_euclid(n as isize) as usize;
        let mut p: Vector = s.position(idx).iter().copied().collect();
        if let Some(per) = periodic {
            axpy(&mut p, wraps as f64, &per.winding);
        }
        p
    };
    // Node range where σ-differences are available, shrunk by `depth`.
    let range = |depth: usize| -> std::ops::Range<usize> {
        if periodic.is_some() {
            0..n
        } else {
            depth..n - depth
        }
    };

    // Metric (g_tt, g_tσ, g_σσ) on interior levels and range(1). Only central
    // stencils are used: a one-sided layer would be differenced again and
    // lose an order.
    let mut metric = vec![vec![[f64::NAN; 3]; n]; k_count];
    for (k, layer) in metric.iter_mut().enumerate().take(k_count - 1).skip(1) {
        for i in range(1) {
            let ii = i as isize;
            let mut ts = zeros(dim);
            axpy(&mut ts, 1.0 / (2.0 * hs), &pos(k, ii + 1));
            axpy(&mut ts, -1.0 / (2.0 * hs), &pos(k, ii - 1));
            let mut tt = zeros(dim);
            axpy(&mut tt, 1.0 / (2.0 * ht), &pos(k + 1, ii));
            axpy(&mut tt, -1.0 / (2.0 * ht), &pos(k - 1, ii));
            layer[i] = [norm_sq(&tt) - 1.0, dot(&tt, &ts), norm_sq(&ts)];
        }
    }

    let (mut worst_t, mut worst_s) = (0.0f64, 0.0f64);
    for k in 2..k_count - 2 {
        for i in range(2) {
            let (ip, im) = ((i + 1) % n, (i + n - 1) % n);
            let g = metric[k][i];
            // d[λ][μ][ν] = ∂_λ g_{μν}
            let mut d = [[[0.0; 2]; 2]; 2];
            for c in 0..3 {
                let dt = (metric[k + 1][i][c] - metric[k - 1][i][c]) / (2.0 * ht);
                let ds = (metric[k][ip][c] - metric[k][im][c]) / (2.0 * hs);
                let (mu, nu) = [(0, 0), (0, 1), (1, 1)][c];
                for (lam, val) in [(0, dt), (1, ds)] {
                    d[lam][mu][nu] = val;
                    d[lam][nu][mu] = val;
                }
            }
            let inv = MetricSample::from_components(g[0], g[1], g[2]).inverse()?;
            let ginv = [[inv.0, inv.1], [inv.1, inv.2]];
            let mut contracted = [0.0; 2];
            for (rho, out) in contracted.iter_mut().enumerate() {
                for lam in 0..2 {
                    for mu in 0..2 {
                        for nu in 0..2 {
                            let first_kind =
                                0.5 * (d[mu][lam][nu] + d[nu][lam][mu] - d[lam][mu][nu]);
                            *out += ginv[rho][lam] * ginv[mu][nu] * first_kind;
                        }
                    }
                }
            }
            worst_t = worst_t.max(contracted[0].abs());
            worst_s = worst_s.max(contracted[1].abs());
        }
    }
    let mut r = ResidualReport::new(GridMeta {
        nodes: n,
        spacing: hs,
        steps: vec![ht, hs],
    });
    r.push("harmonic.t", worst_t);
    r.push("harmonic.sigma", worst_s);
    r.push("harmonic", worst_t.max(worst_s));
    Ok(r)
}

/// Result of [`periodicity_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodReport {
    /// Fundamental time quasi-period Σ.
    pub period: f64,
    /// Rigid displacement per period, `∫₀^Σ G`.
    pub drift: Vector,
    /// `max |x̃(t + Σ, σ) − x̃(t, σ) − d|` over the sampled `(t, σ)`.
    pub max_deviation: f64,
}

/// Compare states one σ-period apart at each of `times`.
pub fn periodicity_check(map: &KzMap, grid: &[f64], times: &[f64]) -> Result<PeriodReport> {
    if !map.is_closed() {
        return Err(Error::InvalidArgument(
            "periodicity is defined for closed strings only".into(),
        ));
    }
    let period = map.sigma_length();
    let drift = map.drift();
    let mut worst = 0.0f64;
    for &t in times {
        let a = dalembert_state(map, t, grid)?;
        let b = dalembert_state(map, t + period, grid)?;
        for i in 0..grid.len() {
            let (pa, pb) = (a.position(i), b.position(i));
            for j in 0..a.dim {
                worst = worst.max((pb[j] - pa[j] - drift[j]).abs());
            }
        }
    }
    Ok(PeriodReport {
        period,
        drift,
        max_deviation: worst,
    })
}

/// The solution in the original chart, `x(t, θ) = x̃(t, Φ(t, θ))`, with
/// `x_θ = x̃_σ / Θ_σ` and `x_t = x̃_t − x_θ Θ_t`.
pub fn pullback<W: Worldsheet + ?Sized>(
    map: &KzMap,
    sheet: &W,
    t: f64,
    theta_grid: &[f64],
) -> Result<StringState> {
    let dim = sheet.dim();
    let mut state = StringState {
        t,
        chart: Chart::Original,
        dim,
        param: theta_grid.to_vec(),
        companion: Vec::with_capacity(theta_grid.len()),
        position: Vec::with_capacity(theta_grid.len() * dim),
        velocity: Vec::with_capacity(theta_grid.len() * dim),
        tangent: Vec::with_capacity(theta_grid.len() * dim),
    };
    for &theta in theta_grid {
        let sigma = map.phi(t, theta)?;
        let jet = map.theta_jet(t, sigma)?;
        let p = sheet.point(t, sigma)?;
        let mut x_theta = p.tangent.clone();
        x_theta.iter_mut().for_each(|v| *v /= jet.theta_sigma);
        let mut x_t = p.velocity.clone();
        axpy(&mut x_t, -jet.theta_t, &x_theta);
        state.companion.push(sigma);
        state.position.extend_from_slice(&p.position);
        state.velocity.extend_from_slice(&x_t);
        state.tangent.extend_from_slice(&x_theta);
    }
    Ok(state)
}

/// Pulled-back exact states at `times` on one θ-grid.
pub fn pullback_trajectory(map: &KzMap, times: &[f64], theta_grid: &[f64]) -> Result<Trajectory> {
    let sheet = ExactSolution::new(map);
    let states = times
        .iter()
        .map(|&t| pullback(map, &sheet, t, theta_grid))
        .collect::<Result<Vec<_>>>()?;
    // Only closed strings sampled over a whole period carry a period.
    let curve = map.curve();
    let period = map.is_closed().then(|| ParamPeriod {
        length: curve.topology().length(),
        winding: zeros(curve.dim()),
    });
    Trajectory::new(states, Provenance::ExactDalembert, period)
}

/// Cubic Hermite interpolation of a sampled state in σ, using the stored
/// tangents as nodal derivatives. Only defined at the state's own time.
#[derive(Debug, Clone)]
pub struct StateInterpolant<'a> {
    state: &'a StringState,
    period: Option<ParamPeriod>,
    spacing: f64,
}

impl<'a> StateInterpolant<'a> {
    pub fn new(state: &'a StringState, period: Option<ParamPeriod>) -> Result<Self> {
        let spacing = uniform_spacing(&state.param).ok_or(Error::MismatchedGrids)?;
        Ok(Self {
            state,
            period,
            spacing,
        })
    }
}

impl Worldsheet for StateInterpolant<'_> {
    fn dim(&self) -> usize {
        self.state.dim
    }

    fn point(&self, t: f64, sigma: f64) -> Result<WorldsheetPoint> {
        let s = self.state;
        if (t - s.t).abs() > 1e-12 * (1.0 + s.t.abs()) {
            return Err(Error::InvalidArgument(format!(
                "interpolant holds t = {}, asked for t = {t}",
                s.t
            )));
        }
        let n = s.len();
        let origin = s.param[0];
        let h = self.spacing;
        let (mut rel, mut shift) = (sigma - origin, 0.0);
        if let Some(per) = &self.period {
            shift = (rel / per.length).floor();
            rel -= shift * per.length;
        } else if rel < 0.0 || rel > h * (n - 1) as f64 {
            return Err(Error::OutOfDomain {
                value: sigma,
                lo: origin,
                hi: origin + h * (n - 1) as f64,
            });
        }
        let cells = if self.period.is_some() { n } else { n - 1 };
        let i = ((rel / h).floor() as usize).min(cells - 1);
        let u = rel / h - i as f64;
        let j = (i + 1) % n;
        let wrap_j = if j < i { 1.0 } else { 0.0 };

        let (h00, h10, h01, h11) = (
            (1.0 + 2.0 * u) * (1.0 - u) * (1.0 - u),
            u * (1.0 - u) * (1.0 - u),
            u * u * (3.0 - 2.0 * u),
            u * u * (u - 1.0),
        );
        let mut position = zeros(s.dim);
        let mut velocity = zeros(s.dim);
        let mut tangent = zeros(s.dim);
        for d in 0..s.dim {
            let mut pj = s.position(j)[d];
            if let Some(per) = &self.period {
                pj += wrap_j * per.winding[d];
                position[d] += shift * per.winding[d];
            }
            position[d] += h00 * s.position(i)[d]
                + h10 * h * s.tangent(i)[d]
                + h01 * pj
                + h11 * h * s.tangent(j)[d];
            velocity[d] = (1.0 - u) * s.velocity(i)[d] + u * s.velocity(j)[d];
            tangent[d] = (1.0 - u) * s.tangent(i)[d] + u * s.tangent(j)[d];
        }
        Ok(WorldsheetPoint {
            position,
            velocity,
            tangent,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::initial_data::{
        lambda_init, make_curve, uniform_grid, Presentation, Topology, VelocitySpec,
    };
    use std::f64::consts::{FRAC_PI_2, PI, TAU};

    fn circle_map(n: usize) -> KzMap {
        let c = make_curve(
            &Presentation::preset("circle", &[1.0]),
            &VelocitySpec::Zero,
            2,
            Topology::default(),
        )
        .unwrap();
        KzMap::build(
            &c,
            &lambda_init(&c, &uniform_grid(Topology::default(), n)).unwrap(),
        )
        .unwrap()
    }

    fn line_map(v: f64) -> KzMap {
        let c = make_curve(
            &Presentation::preset("line", &[]),
            &VelocitySpec::Constant(vec![0.0, v]),
            2,
            Topology::Line { extent: 10.0 },
        )
        .unwrap();
        KzMap::build(
            &c,
            &lambda_init(&c, &uniform_grid(c.topology(), 41)).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn circle_collapses_as_cos_t() {
        let map = circle_map(64);
        let grid = sigma_grid(&map, 64, 0.0).unwrap();
        for t in [0.0, 0.7, FRAC_PI_2, 2.0] {
            let s = dalembert_state(&map, t, &grid).unwrap();
            for (i, &sigma) in grid.iter().enumerate() {
                let x = s.position(i);
                assert!((x[0] - sigma.cos() * t.cos()).abs() < 1e-12);
                assert!((x[1] - sigma.sin() * t.cos()).abs() < 1e-12);
            }
        }
        let collapsed = dalembert_state(&map, FRAC_PI_2, &grid).unwrap();
        assert!(collapsed.max_radius() < 1e-12);
    }

    #[test]
    fn circle_gauge_is_exact() {
        let map = circle_map(64);
        let grid = sigma_grid(&map, 128, 0.0).unwrap();
        let r = gauge_check(&dalembert_state(&map, 0.7, &grid).unwrap());
        assert!(r.value("gauge.orthogonality").unwrap() < 1e-12);
        assert!(r.value("gauge.normalization").unwrap() < 1e-12);
    }

    #[test]
    fn translating_line_is_rigid() {
        let v = 0.6;
        let c = (1.0f64 - v * v).sqrt();
        let map = line_map(v);
        let t = 1.3;
        let grid = sigma_grid(&map, 17, t).unwrap();
        let s = dalembert_state(&map, t, &grid).unwrap();
        for (i, &sigma) in grid.iter().enumerate() {
            assert!((s.position(i)[0] - sigma * c).abs() < 1e-12);
            assert!((s.position(i)[1] - v * t).abs() < 1e-12);
        }
        let r = gauge_check(&s);
        assert!(r.max() < 1e-14);
        // Outside the domain of dependence.
        assert!(dalembert_state(&map, 3.0, &[1.0]).is_err());
    }

    #[test]
    fn lambda_solution_for_constant_speeds() {
        let map = circle_map(32);
        for (t, th) in [(0.0, 0.0), (0.5, 2.0), (4.0, 5.0)] {
            let (p, m) = lambda_solution(&map, t, th).unwrap();
            assert!((p - 1.0).abs() < 1e-14 && (m + 1.0).abs() < 1e-14);
        }
        let v = 0.6;
        let (p, m) = lambda_solution(&line_map(v), 1.0, 4.0).unwrap();
        assert!((p - 0.8).abs() < 1e-14 && (m + 0.8).abs() < 1e-14);
    }

    #[test]
    fn circle_is_periodic_with_antiperiod() {
        let map = circle_map(64);
        let grid = sigma_grid(&map, 64, 0.0).unwrap();
        let r = periodicity_check(&map, &grid, &[0.0, 0.4, 1.9]).unwrap();
        assert!((r.period - TAU).abs() < 1e-12);
        assert!(r.drift.iter().all(|d| d.abs() < 1e-14));
        assert!(r.max_deviation < 1e-12);
        let a = dalembert_state(&map, 0.4, &grid).unwrap();
        let b = dalembert_state(&map, 0.4 + PI, &grid).unwrap();
        for (x, y) in a.position.iter().zip(&b.position) {
            assert!((x + y).abs() < 1e-12);
        }
    }

    #[test]
    fn pullback_of_circle_is_identity() {
        let map = circle_map(64);
        let sheet = ExactSolution::new(&map);
        let grid = uniform_grid(Topology::default(), 32);
        let t = 0.8;
        let s = pullback(&map, &sheet, t, &grid).unwrap();
        for (i, &th) in grid.iter().enumerate() {
            assert!((s.position(i)[0] - th.cos() * t.cos()).abs() < 1e-12);
            assert!((s.position(i)[1] - th.sin() * t.cos()).abs() < 1e-12);
            assert!((s.companion[i] - th).abs() < 1e-12);
        }
    }

    #[test]
    fn harmonic_check_rejects_bad_trajectories() {
        let map = circle_map(32);
        let two = exact_trajectory(&map, &[0.0, 0.1], 32).unwrap();
        assert_eq!(
            harmonic_check(&two).unwrap_err(),
            Error::TooFewStates { needed: 5, got: 2 }
        );
        let uneven = exact_trajectory(&map, &[0.0, 0.1, 0.2, 0.3, 0.5], 32).unwrap();
        assert_eq!(harmonic_check(&uneven).unwrap_err(), Error::NonUniformTimes);
    }

    #[test]
    fn trajectory_requires_increasing_times() {
        let map = circle_map(16);
        let grid = sigma_grid(&map, 16, 0.0).unwrap();
        let a = dalembert_state(&map, 0.5, &grid).unwrap();
        let b = dalembert_state(&map, 0.2, &grid).unwrap();
        assert!(Trajectory::new(vec![a, b], Provenance::ExactDalembert, None).is_err());
    }
}
