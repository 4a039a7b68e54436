//! Brute-force reference solvers.
//!
//! [`solve_nonlinear`] integrates `g11·x_tt − 2g01·x_tθ + g00·x_θθ = 0`
//! directly with a leapfrog scheme. [`solve_characteristic`] transports the
//! characteristic speeds with a first-order upwind scheme. Neither uses any
//! part of the exact pipeline.

use crate::error::{Error, Result};
use crate::evolution::{Chart, ParamPeriod, Provenance, StringState, Trajectory};
use crate::initial_data::{EigenvalueField, InitialCurve};
use crate::metric::{projection_audit, MetricSample};
use crate::report::{GridMeta, ResidualReport};
use crate::vector::{distance, dot, norm_sq, Vector};

/// Largest CFL number the leapfrog scheme runs at.
pub const LEAPFROG_CFL: f64 = 0.5;
/// Largest CFL number the upwind scheme runs at.
pub const UPWIND_CFL: f64 = 0.9;
/// Number of time-step halvings before a CFL failure is reported.
pub const MAX_HALVINGS: usize = 20;

const CORRECTOR_SWEEPS: usize = 2;

/// Uniform periodic θ-grid with three position layers.
///
/// Positions satisfy `x(θ + L) = x(θ) + winding`; closed curves have zero
/// winding and a periodicized line has `winding = p(L) − p(0)`.
#[derive(Debug, Clone)]
pub struct FdGrid {
    pub theta: Vec<f64>,
    pub dtheta: f64,
    pub dt: f64,
    pub dim: usize,
    pub winding: Vector,
    /// Layers at `t`, `t − dt`, `t − 2dt`, each row-major `nodes × dim`.
    pub current: Vec<f64>,
    pub previous: Vec<f64>,
    pub before: Vec<f64>,
    pub t: f64,
}

impl FdGrid {
    pub fn nodes(&self) -> usize {
        self.theta.len()
    }

    /// `dt · max|λ±| / dθ` for the given speed bound.
    pub fn cfl(&self, max_speed: f64) -> f64 {
        self.dt * max_speed / self.dtheta
    }

    /// Re-sample the two older layers for a new step `dt_new ≤ dt` by
    /// quadratic interpolation through the three stored layers.
    fn rescale(&mut self, dt_new: f64) {
        let r = dt_new / self.dt;
        let lagrange = |s: f64| {
            [
                (s + 1.0) * (s + 2.0) / 2.0,
                -s * (s + 2.0),
                s * (s + 1.0) / 2.0,
            ]
        };
        let w1 = lagrange(-r);
        let w2 = lagrange(-2.0 * r);
        let mut prev = vec![0.0; self.current.len()];
        let mut before = vec![0.0; self.current.len()];
        for k in 0..prev.len() {
            let (a, b, c) = (self.current[k], self.previous[k], self.before[k]);
            prev[k] = w1[0] * a + w1[1] * b + w1[2] * c;
            before[k] = w2[0] * a + w2[1] * b + w2[2] * c;
        }
        self.previous = prev;
        self.before = before;
        self.dt = dt_new;
    }
}

/// Central θ-differences `(x_θ, x_θθ)` of a layer at node `i`.
fn theta_derivatives(layer: &[f64], i: usize, g: &FdGrid, xs: &mut [f64], xss: &mut [f64]) {
    let n = g.nodes();
    let d = g.dim;
    let (ip, im) = ((i + 1) % n, (i + n - 1) % n);
    let wp = if i + 1 == n { 1.0 } else { 0.0 };
    let wm = if i == 0 { 1.0 } else { 0.0 };
    for j in 0..d {
        let up = layer[ip * d + j] + wp * g.winding[j];
        let dn = layer[im * d + j] - wm * g.winding[j];
        let c = layer[i * d + j];
        xs[j] = (up - dn) / (2.0 * g.dtheta);
        xss[j] = (up - 2.0 * c + dn) / (g.dtheta * g.dtheta);
    }
}

/// `x_tt` from the string equation at every node, given the layer and a
/// velocity estimate. Also returns the largest characteristic speed.
fn acceleration(layer: &[f64], velocity: &[f64], g: &FdGrid, out: &mut [f64]) -> Result<f64> {
    let n = g.nodes();
    let d = g.dim;
    let mut xs = vec![0.0; d];
    let mut xss = vec![0.0; d];
    let mut max_speed = 0.0f64;
    for i in 0..n {
        theta_derivatives(layer, i, g, &mut xs, &mut xss);
        let v = &velocity[i * d..(i + 1) * d];
        let (ip, im) = ((i + 1) % n, (i + n - 1) % n);
        let m = MetricSample::from_components(norm_sq(v) - 1.0, dot(v, &xs), norm_sq(&xs));
        if !m.disc.is_finite() {
            return Err(Error::NonFinite { t: g.t });
        }
        if m.disc <= 0.0 || m.g11 <= 0.0 {
            return Err(Error::Degeneration {
                t: g.t,
                theta: g.theta[i],
                discriminant: m.disc,
            });
        }
        max_speed = max_speed.max(m.lambda_plus.abs()).max(m.lambda_minus.abs());
        for j in 0..d {
            let vtheta = (velocity[ip * d + j] - velocity[im * d + j]) / (2.0 * g.dtheta);
            out[i * d + j] = (2.0 * m.g01 * vtheta - m.g00 * xss[j]) / m.g11;
        }
    }
    Ok(max_speed)
}

/// Largest characteristic speed of the initial data on the grid.
fn initial_speed(curve: &InitialCurve, theta: &[f64]) -> Result<f64> {
    let mut worst = 0.0f64;
    for &th in theta {
        let s = curve.speeds(th);
        if !(s.discriminant > 0.0) {
            return Err(Error::SpaceLike {
                theta: th,
                discriminant: s.discriminant,
            });
        }
        worst = worst.max(s.plus.abs()).max(s.minus.abs());
    }
    Ok(worst)
}

/// One leapfrog step with a predictor–corrector for the metric velocity.
/// Returns the largest speed seen at the current layer.
fn leapfrog_step(g: &mut FdGrid) -> Result<f64> {
    let len = g.current.len();
    let dt = g.dt;
    let mut velocity: Vec<f64> = (0..len)
        .map(|k| (3.0 * g.current[k] - 4.0 * g.previous[k] + g.before[k]) / (2.0 * dt))
        .collect();
    let mut acc = vec![0.0; len];
    let mut next = vec![0.0; len];
    let mut speed = 0.0;
    for sweep in 0..=CORRECTOR_SWEEPS {
        speed = acceleration(&g.current, &velocity, g, &mut acc)?;
        for k in 0..len {
            next[k] = 2.0 * g.current[k] - g.previous[k] + dt * dt * acc[k];
        }
        if sweep < CORRECTOR_SWEEPS {
            for k in 0..len {
                velocity[k] = (next[k] - g.previous[k]) / (2.0 * dt);
            }
        }
    }
    if next.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { t: g.t + dt });
    }
    g.before = std::mem::replace(&mut g.previous, std::mem::replace(&mut g.current, next));
    g.t += dt;
    Ok(speed)
}

fn layer_state(g: &FdGrid) -> StringState {
    let n = g.nodes();
    let d = g.dim;
    let mut tangent = vec![0.0; n * d];
    let mut xss = vec![0.0; d];
    for i in 0..n {
        theta_derivatives(&g.current, i, g, &mut tangent[i * d..(i + 1) * d], &mut xss);
    }
    let velocity = (0..g.current.len())
        .map(|k| (3.0 * g.current[k] - 4.0 * g.previous[k] + g.before[k]) / (2.0 * g.dt))
        .collect();
    StringState {
        t: g.t,
        chart: Chart::Original,
        dim: d,
        param: g.theta.clone(),
        companion: Vec::new(),
        position: g.current.clone(),
        velocity,
        tangent,
    }
}

/// Integrate the string equations from `curve` on `nodes` uniform θ-nodes
/// and return states at the increasing, non-negative `times`.
///
/// Each output interval is covered by an even number of equal steps so the
/// leapfrog computational mode has the same sign at every output time.
pub fn solve_nonlinear(curve: &InitialCurve, nodes: usize, times: &[f64]) -> Result<Trajectory> {
    if nodes < 8 {
        return Err(Error::InvalidArgument(format!(
            "{nodes} nodes; need at least 8"
        )));
    }
    if times.iter().any(|t| !(*t >= 0.0)) || times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument(
            "output times must be non-negative and strictly increasing".into(),
        ));
    }
    let length = curve.topology().length();
    let dim = curve.dim();
    let h = length / nodes as f64;
    let theta: Vec<f64> = (0..nodes).map(|i| h * i as f64).collect();
    let mut winding = curve.position(length);
    let origin = curve.position(0.0);
    for (w, o) in winding.iter_mut().zip(&origin) {
        *w = if curve.topology().is_closed() {
            0.0
        } else {
            *w - o
        };
    }

    let max_speed = initial_speed(curve, &theta)?;
    let dt_cfl = LEAPFROG_CFL * h / max_speed.max(1e-300);

    // x(−dt) and x(−2dt) from a Taylor expansion with x_tt(0) from the PDE.
    let mut p = Vec::with_capacity(nodes * dim);
    let mut q = Vec::with_capacity(nodes * dim);
    for &th in &theta {
        let s = curve.sample(th);
        p.extend_from_slice(&s.position);
        q.extend_from_slice(&s.velocity);
    }
    let mut grid = FdGrid {
        theta,
        dtheta: h,
        dt: dt_cfl,
        dim,
        winding,
        current: p,
        previous: Vec::new(),
        before: Vec::new(),
        t: 0.0,
    };
    let mut acc0 = vec![0.0; q.len()];
    acceleration(&grid.current, &q, &grid, &mut acc0)?;
    let seed = |g: &FdGrid, k: f64| -> Vec<f64> {
        (0..q.len())
            .map(|j| g.current[j] - k * g.dt * q[j] + 0.5 * (k * g.dt).powi(2) * acc0[j])
            .collect()
    };

    let mut states = Vec::with_capacity(times.len());
    let mut seeded = false;
    let mut halvings = 0usize;
    let mut speed = max_speed;
    for &target in times {
        'interval: while target - grid.t > 1e-12 * (1.0 + target) {
            let remaining = target - grid.t;
            // The step never grows, so the stored layers only need shrinking.
            let mut allowed = LEAPFROG_CFL * h / speed.max(1e-300);
            if seeded {
                allowed = allowed.min(grid.dt);
            }
            let steps = 2 * (remaining / (2.0 * allowed) - 1e-9).ceil().max(1.0) as usize;
            let dt = remaining / steps as f64;
            if !seeded {
                grid.dt = dt;
                grid.previous = seed(&grid, 1.0);
                grid.before = seed(&grid, 2.0);
                seeded = true;
            } else if (dt - grid.dt).abs() > 1e-12 * grid.dt {
                grid.rescale(dt);
            }
            for _ in 0..steps {
                speed = leapfrog_step(&mut grid)?;
                if grid.cfl(speed) > LEAPFROG_CFL * (1.0 + 1e-9) {
                    halvings += 1;
                    if halvings > MAX_HALVINGS {
                        return Err(Error::CflViolation {
                            cfl: grid.cfl(speed),
                            limit: LEAPFROG_CFL,
                            halvings: MAX_HALVINGS,
                        });
                    }
                    grid.rescale(0.5 * grid.dt);
                    continue 'interval;
                }
            }
            grid.t = target;
        }
        if !seeded {
            // Only t = 0 so far; the velocity is the data itself.
            let mut s = layer_state(&FdGrid {
                previous: grid.current.clone(),
                before: grid.current.clone(),
                ..grid.clone()
            });
            s.velocity = q.clone();
            states.push(s);
            continue;
        }
        states.push(layer_state(&grid));
    }
    let period = Some(ParamPeriod {
        length,
        winding: grid.winding.clone(),
    });
    Trajectory::new(states, Provenance::OracleNonlinear, period)
}

/// Characteristic speeds `λ±` of a state read off its induced metric.
pub fn extract_speeds(state: &StringState) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut plus = Vec::with_capacity(state.len());
    let mut minus = Vec::with_capacity(state.len());
    for i in 0..state.len() {
        let m = crate::metric::induced_metric(state.velocity(i), state.tangent(i))?;
        let (p, q) = crate::metric::eigen_speeds(&m)?;
        plus.push(p);
        minus.push(q);
    }
    Ok((plus, minus))
}

/// `max ‖M·E‖` at interior time levels of a trajectory, where
/// `E = g^{μν} x_{μν}` (time component zero) and `M` is the normal
/// projection built from the tangents.
///
/// Derivatives use fourth-order central stencils, so the result measures
/// how far the sampled surface is from a solution, not stencil error.
pub fn equation_audit(traj: &Trajectory) -> Result<ResidualReport> {
    let states = &traj.states;
    if states.len() < 5 {
        return Err(Error::TooFewStates {
            needed: 5,
            got: states.len(),
        });
    }
    let times = traj.times();
    let ht = times[1] - times[0];
    if times
        .windows(2)
        .any(|w| ((w[1] - w[0]) - ht).abs() > 1e-9 * ht)
    {
        return Err(Error::NonUniformTimes);
    }
    let period = traj.period.as_ref().ok_or_else(|| {
        Error::InvalidArgument("equation audit needs a periodic parameter grid".into())
    })?;
    let n = states[0].len();
    let d = states[0].dim;
    let hs = period.length / n as f64;
    let at = |k: usize, i: isize, j: usize| -> f64 {
        let wraps = i.div_euclid(n as isize) as f64;
        let idx = i.rem_euclid(n as isize) as usize;
        states[k].position(idx)[j] + wraps * period.winding[j]
    };
    let d1 = |f: [f64; 5], h: f64| (f[0] - 8.0 * f[1] + 8.0 * f[3] - f[4]) / (12.0 * h);
    let d2 = |f: [f64; 5], h: f64| {
        (-f[0] + 16.0 * f[1] - 30.0 * f[2] + 16.0 * f[3] - f[4]) / (12.0 * h * h)
    };

    let mut worst = 0.0f64;
    let mut e = vec![0.0; d + 1];
    let (mut xt, mut xs, mut xtt, mut xts, mut xss) = (
        vec![0.0; d],
        vec![0.0; d],
        vec![0.0; d],
        vec![0.0; d],
        vec![0.0; d],
    );
    for k in 2..states.len() - 2 {
        for i in 0..n as isize {
            for j in 0..d {
                let col = |kk: usize| {
                    [
                        at(kk, i - 2, j),
                        at(kk, i - 1, j),
                        at(kk, i, j),
                        at(kk, i + 1, j),
                        at(kk, i + 2, j),
                    ]
                };
                let row = [
                    at(k - 2, i, j),
                    at(k - 1, i, j),
                    at(k, i, j),
                    at(k + 1, i, j),
                    at(k + 2, i, j),
                ];
                let space = col(k);
                xt[j] = d1(row, ht);
                xtt[j] = d2(row, ht);
                xs[j] = d1(space, hs);
                xss[j] = d2(space, hs);
                let ds = [
                    d1(col(k - 2), hs),
                    d1(col(k - 1), hs),
                    0.0,
                    d1(col(k + 1), hs),
                    d1(col(k + 2), hs),
                ];
                xts[j] = d1(ds, ht);
            }
            let audit = projection_audit(&xt, &xs)?;
            let (i00, i01, i11) = audit.metric.inverse()?;
            e[0] = 0.0;
            for j in 0..d {
                e[j + 1] = i00 * xtt[j] + 2.0 * i01 * xts[j] + i11 * xss[j];
            }
            let me = audit.apply(&e);
            worst = worst.max(norm_sq(&me).sqrt());
        }
    }
    let mut r = ResidualReport::new(GridMeta {
        nodes: n,
        spacing: hs,
        steps: vec![ht, hs],
    });
    r.push("projection.me", worst);
    Ok(r)
}

/// Upwind solution of the characteristic system at the output times.
#[derive(Debug, Clone, PartialEq)]
pub struct CharacteristicSolution {
    pub theta: Vec<f64>,
    pub times: Vec<f64>,
    /// One row per output time.
    pub plus: Vec<Vec<f64>>,
    pub minus: Vec<Vec<f64>>,
}

/// Transport `λ₊` with speed `λ₋` and `λ₋` with speed `λ₊` by first-order
/// upwinding on the field's grid, treated as uniform and periodic.
pub fn solve_characteristic(
    field: &EigenvalueField,
    times: &[f64],
    gap_threshold: f64,
) -> Result<CharacteristicSolution> {
    let theta = field.grid.clone();
    let n = theta.len();
    if n < 3 {
        return Err(Error::InvalidArgument(format!(
            "{n} nodes; need at least 3"
        )));
    }
    if times.iter().any(|t| !(*t >= 0.0)) || times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument(
            "output times must be non-negative and strictly increasing".into(),
        ));
    }
    let h = theta[1] - theta[0];
    let mut plus = field.lambda_plus.clone();
    let mut minus = field.lambda_minus.clone();
    let mut t = 0.0;
    let mut out_p = Vec::with_capacity(times.len());
    let mut out_m = Vec::with_capacity(times.len());

    let check_gap = |p: &[f64], m: &[f64], t: f64| -> Result<f64> {
        let mut speed = 0.0f64;
        for i in 0..n {
            let gap = p[i] - m[i];
            if !gap.is_finite() {
                return Err(Error::NonFinite { t });
            }
            if gap <= gap_threshold {
                return Err(Error::GapCollapse {
                    theta: theta[i],
                    gap,
                });
            }
            speed = speed.max(p[i].abs()).max(m[i].abs());
        }
        Ok(speed)
    };

    // Upwind difference of `f` at `i` for advection speed `a`.
    let upwind = |f: &[f64], i: usize, a: f64| -> f64 {
        if a > 0.0 {
            f[i] - f[(i + n - 1) % n]
        } else {
            f[(i + 1) % n] - f[i]
        }
    };

    let mut next_p = vec![0.0; n];
    let mut next_m = vec![0.0; n];
    for &target in times {
        while target - t > 1e-12 * (1.0 + target) {
            let speed = check_gap(&plus, &minus, t)?;
            let dt_cfl = if speed > 0.0 {
                UPWIND_CFL * h / speed
            } else {
                f64::INFINITY
            };
            let dt = dt_cfl.min(target - t);
            for i in 0..n {
                next_p[i] = plus[i] - dt / h * minus[i] * upwind(&plus, i, minus[i]);
                next_m[i] = minus[i] - dt / h * plus[i] * upwind(&minus, i, plus[i]);
            }
            std::mem::swap(&mut plus, &mut next_p);
            std::mem::swap(&mut minus, &mut next_m);
            t += dt;
        }
        check_gap(&plus, &minus, target)?;
        t = target;
        out_p.push(plus.clone());
        out_m.push(minus.clone());
    }
    Ok(CharacteristicSolution {
        theta,
        times: times.to_vec(),
        plus: out_p,
        minus: out_m,
    })
}

/// How two trajectories are matched.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Matching {
    /// Pointwise distance on a shared parameter grid.
    SameParametrization,
    /// Symmetric Hausdorff distance between the sampled curve images.
    Geometric,
}

fn closes(traj: &Trajectory) -> bool {
    traj.period
        .as_ref()
        .is_some_and(|p| p.winding.iter().all(|w| *w == 0.0))
}

fn point_segment(x: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let mut ab = 0.0;
    let mut ax = 0.0;
    for j in 0..x.len() {
        ab += (b[j] - a[j]) * (b[j] - a[j]);
        ax += (x[j] - a[j]) * (b[j] - a[j]);
    }
    let s = if ab > 0.0 {
        (ax / ab).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let mut d2 = 0.0;
    for j in 0..x.len() {
        let p = a[j] + s * (b[j] - a[j]);
        d2 += (x[j] - p) * (x[j] - p);
    }
    d2.sqrt()
}

/// Largest distance from a sample of `a` to the polyline through `b`.
fn one_sided(a: &StringState, b: &StringState, closed: bool) -> f64 {
    let m = b.len();
    let segments = if closed { m } else { m.saturating_sub(1) };
    (0..a.len())
        .map(|i| {
            let x = a.position(i);
            if segments == 0 {
                return distance(x, b.position(0));
            }
            (0..segments)
                .map(|k| point_segment(x, b.position(k), b.position((k + 1) % m)))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max)
}

/// Distance between two trajectories sampled at the same times.
pub fn compare_trajectories(
    a: &Trajectory,
    b: &Trajectory,
    matching: Matching,
) -> Result<ResidualReport> {
    let ta = a.times();
    let tb = b.times();
    if ta.len() != tb.len()
        || ta
            .iter()
            .zip(&tb)
            .any(|(x, y)| (x - y).abs() > 1e-12 * (1.0 + x.abs()))
    {
        return Err(Error::MismatchedTimes);
    }
    let nodes = a.states.first().map_or(0, |s| s.len());
    let mut r = ResidualReport::new(GridMeta {
        nodes,
        spacing: a
            .states
            .first()
            .filter(|s| s.len() > 1)
            .map_or(f64::NAN, |s| s.param[1] - s.param[0]),
        steps: Vec::new(),
    });
    let mut worst = 0.0f64;
    for (sa, sb) in a.states.iter().zip(&b.states) {
        let d = match matching {
            Matching::SameParametrization => {
                let same = sa.len() == sb.len()
                    && sa
                        .param
                        .iter()
                        .zip(&sb.param)
                        .all(|(x, y)| (x - y).abs() <= 1e-12 * (1.0 + x.abs()));
                if !same || sa.dim != sb.dim {
                    return Err(Error::MismatchedGrids);
                }
                (0..sa.len())
                    .map(|i| distance(sa.position(i), sb.position(i)))
                    .fold(0.0, f64::max)
            }
            Matching::Geometric => {
                if sa.dim != sb.dim || sa.is_empty() || sb.is_empty() {
                    return Err(Error::MismatchedGrids);
                }
                one_sided(sa, sb, closes(b)).max(one_sided(sb, sa, closes(a)))
            }
        };
        worst = worst.max(d);
    }
    let name = match matching {
        Matching::SameParametrization => "compare.same_parametrization",
        Matching::Geometric => "compare.geometric",
    };
    r.push(name, worst);
    Ok(r)
}
