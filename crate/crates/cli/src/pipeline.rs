//! The `simulate`, `verify`, `compare` and `kzmap` pipelines.

use std::fmt;
use std::io;
use std::path::PathBuf;

use kzstring::evolution::pullback_trajectory;
use kzstring::kz_map::NOISE_FLOOR;
use kzstring::oracle::{compare_trajectories, solve_characteristic, solve_nonlinear, Matching};
use kzstring::{
    dalembert_state, exact_trajectory, fit_order, gauge_check, harmonic_check,
    kz_identity_residuals, lambda_init, lambda_solution, make_curve, periodicity_check, sigma_grid,
    uniform_grid, validate_timelike, EigenvalueField, Error, ExactSolution, InitialCurve, KzMap,
    KzOptions, Thresholds, Worldsheet,
};

use crate::config::{ConfigError, ScenarioConfig};
use crate::output::{state_csv, OutputDir, Summary};

/// Steps of the derivative-identity refinement study, coarsest first.
pub const IDENTITY_STEPS: [f64; 3] = [1e-2, 5e-3, 2.5e-3];
/// Below this the harmonic residual is rounding noise and has no order.
/// Samples with `|x̃_σ|²` below this are collapsed and skipped by the
/// identity check.
pub const COLLAPSE_FLOOR: f64 = 1e-12;
pub const HARMONIC_NOISE_FLOOR: f64 = 1e-10;
/// Allowed distance of the upwind solver's fitted order from one.
pub const UPWIND_ORDER_BAND: f64 = 0.25;

#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    Numeric(Error),
    Io(io::Error),
}

impl RunError {
    /// 2 for configuration problems, 3 for numeric and I/O failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Numeric(_) | RunError::Io(_) => 3,
        }
    }
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Config(e) => write!(f, "{e}"),
            RunError::Numeric(e) => write!(f, "numeric failure: {e}"),
            RunError::Io(e) => write!(f, "i/o failure: {e}"),
        }
    }
}

// Display already carries the inner message, so no source is exposed.
impl std::error::Error for RunError {}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e)
    }
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        RunError::Numeric(e)
    }
}

impl From<io::Error> for RunError {
    fn from(e: io::Error) -> Self {
        RunError::Io(e)
    }
}

pub type RunResult<T> = std::result::Result<T, RunError>;

/// What a pipeline produced.
#[derive(Debug)]
pub struct Outcome {
    pub summary: Summary,
    pub files: Vec<PathBuf>,
    /// First numeric failure inside an individual check, if any. The summary
    /// is still written; the run counts as a numeric failure.
    pub check_error: Option<Error>,
}

impl Outcome {
    /// 0 when every check passed, 1 on a tolerance failure, 3 when a check
    /// could not be evaluated.
    pub fn exit_code(&self) -> i32 {
        if self.check_error.is_some() {
            3
        } else if self.summary.passed() {
            0
        } else {
            1
        }
    }
}

/// Initial data and transform of a scenario.
pub struct Scenario {
    pub curve: InitialCurve,
    pub field: EigenvalueField,
    pub map: KzMap,
}

pub fn build_scenario(cfg: &ScenarioConfig) -> RunResult<Scenario> {
    build_with_nodes(cfg, cfg.theta_nodes)
}

fn build_with_nodes(cfg: &ScenarioConfig, theta_nodes: usize) -> RunResult<Scenario> {
    let curve = make_curve(&cfg.presentation, &cfg.velocity, cfg.dim, cfg.topology)?;
    let grid = uniform_grid(cfg.topology, theta_nodes);
    let report = validate_timelike(&curve, &grid, &Thresholds::default());
    if !report.pass {
        if report.min_speed <= Thresholds::default().immersion {
            return Err(Error::DegenerateImmersion {
                theta: report.min_speed_at,
                speed: report.min_speed,
            }
            .into());
        }
        return Err(Error::SpaceLike {
            theta: report.min_discriminant_at,
            discriminant: report.min_discriminant,
        }
        .into());
    }
    let field = lambda_init(&curve, &grid)?;
    let map = KzMap::build_with(
        &curve,
        &field,
        KzOptions {
            flip_lambda_minus: cfg.flip_lambda_minus,
        },
    )?;
    Ok(Scenario { curve, field, map })
}

fn t_max(times: &[f64]) -> f64 {
    times.iter().fold(0.0f64, |a, t| a.max(t.abs()))
}

fn describe(summary: &mut Summary, cfg: &ScenarioConfig, map: &KzMap) {
    summary.int("grid.theta_nodes", cfg.theta_nodes as i64);
    summary.int("grid.sigma_nodes", cfg.sigma_nodes as i64);
    summary.float("value.sigma_period", map.sigma_length());
}

/// Gauge residuals over all configured times.
fn gauge_over_times(map: &KzMap, grid: &[f64], times: &[f64]) -> RunResult<(f64, f64)> {
    let (mut orth, mut norm) = (0.0f64, 0.0f64);
    for &t in times {
        let r = gauge_check(&dalembert_state(map, t, grid)?);
        orth = orth.max(r.value("gauge.orthogonality").unwrap_or(f64::NAN));
        norm = norm.max(r.value("gauge.normalization").unwrap_or(f64::NAN));
    }
    Ok((orth, norm))
}

fn record_gauge(summary: &mut Summary, cfg: &ScenarioConfig, (orth, norm): (f64, f64)) {
    summary.float("residual.gauge.orthogonality.max", orth);
    summary.float("residual.gauge.normalization.max", norm);
    summary.check("gauge", orth <= cfg.tol.gauge && norm <= cfg.tol.gauge);
}

/// Exact states at every configured time, one CSV each, plus a manifest.
pub fn run_simulate(cfg: &ScenarioConfig) -> RunResult<Outcome> {
    let sc = build_scenario(cfg)?;
    let grid = sigma_grid(&sc.map, cfg.sigma_nodes, t_max(&cfg.times))?;
    let mut out = OutputDir::create(&cfg.output_dir)?;
    let mut files = Vec::new();
    let mut manifest = Summary::default();
    manifest.int("states", cfg.times.len() as i64);
    let (mut orth, mut norm) = (0.0f64, 0.0f64);
    for (k, &t) in cfg.times.iter().enumerate() {
        let state = dalembert_state(&sc.map, t, &grid)?;
        let r = gauge_check(&state);
        orth = orth.max(r.value("gauge.orthogonality").unwrap_or(f64::NAN));
        norm = norm.max(r.value("gauge.normalization").unwrap_or(f64::NAN));
        let name = format!("state_{k:04}.csv");
        files.push(out.write(&name, &state_csv(&state))?);
        manifest.float(format!("state.{k:04}.t"), t);
        manifest.text(format!("state.{k:04}.file"), name);
    }
    files.push(out.write("manifest.toml", &manifest.render())?);

    let mut summary = Summary::default();
    summary.text("command", "simulate");
    describe(&mut summary, cfg, &sc.map);
    record_gauge(&mut summary, cfg, (orth, norm));
    files.push(out.write("summary.toml", &summary.render())?);
    Ok(Outcome {
        summary,
        files,
        check_error: None,
    })
}

/// Run `f`; on a numeric failure mark the check failed and keep going.
fn guarded<T>(
    summary: &mut Summary,
    first_error: &mut Option<Error>,
    name: &str,
    f: impl FnOnce() -> RunResult<T>,
) -> RunResult<Option<T>> {
    match f() {
        Ok(v) => Ok(Some(v)),
        Err(RunError::Numeric(e)) => {
            summary.text(format!("error.{name}"), e.to_string());
            summary.check(name, false);
            first_error.get_or_insert(e);
            Ok(None)
        }
        Err(other) => Err(other),
    }
}

fn order_entry(summary: &mut Summary, key: &str, order: Option<f64>) {
    match order {
        Some(o) => summary.float(key, o),
        None => summary.text(key, "unavailable"),
    }
}

/// Every identity the transform is supposed to satisfy, with pass/fail.
pub fn run_verify(cfg: &ScenarioConfig) -> RunResult<Outcome> {
    let sc = build_scenario(cfg)?;
    let map = &sc.map;
    let tmax = t_max(&cfg.times);
    let grid = sigma_grid(map, cfg.sigma_nodes, tmax)?;
    let mut summary = Summary::default();
    let mut err = None;
    summary.text("command", "verify");
    describe(&mut summary, cfg, map);

    // Gauge.
    if let Some(g) = guarded(&mut summary, &mut err, "gauge", || {
        gauge_over_times(map, &grid, &cfg.times)
    })? {
        record_gauge(&mut summary, cfg, g);
    }

    // Quadrature: the σ-period must not move when the θ-table is refined.
    let fine = guarded(&mut summary, &mut err, "quadrature", || {
        build_with_nodes(cfg, 2 * cfg.theta_nodes).map(|s| s.map.sigma_length())
    })?;
    if let Some(fine) = fine {
        let d = (fine - map.sigma_length()).abs();
        summary.float("residual.quadrature.sigma_period", d);
        summary.check("quadrature", d <= cfg.tol.quadrature);
    }

    // Inversion round trips.
    let inv = guarded(&mut summary, &mut err, "inversion", || {
        let mut rho = 0.0f64;
        for &s in &grid {
            rho = rho.max((map.rho(map.varrho(s)?)? - s).abs());
        }
        let thetas = uniform_grid(cfg.topology, 64);
        let mut theta = 0.0f64;
        for &t in &cfg.times {
            for &th in thetas
                .iter()
                .filter(|th| map.is_closed() || in_line_window(map, t, **th))
            {
                theta = theta.max((map.theta(t, map.phi(t, th)?)? - th).abs());
            }
        }
        Ok((rho, theta))
    })?;
    if let Some((rho, theta)) = inv {
        summary.float("residual.inversion.rho", rho);
        summary.float("residual.inversion.theta", theta);
        summary.check(
            "inversion",
            rho <= cfg.tol.inversion && theta <= cfg.tol.inversion,
        );
    }

    // Derivative identities and the wave equation for Θ.
    let ids = guarded(&mut summary, &mut err, "identities", || {
        let margin = IDENTITY_STEPS[0];
        let stride = (grid.len() / 16).max(1);
        let sheet = ExactSolution::new(map);
        let mut samples = Vec::new();
        let mut collapsed = 0usize;
        for &t in &cfg.times {
            for &s in grid.iter().step_by(stride) {
                let inside = map.is_closed()
                    || (s - t - margin > 0.0 && s + t + margin < map.sigma_length());
                if !inside {
                    continue;
                }
                let (_, xs) = sheet.tangents(t, s)?;
                if xs.iter().map(|v| v * v).sum::<f64>() <= COLLAPSE_FLOOR {
                    collapsed += 1;
                } else {
                    samples.push((t, s));
                }
            }
        }
        Ok((
            kz_identity_residuals(map, &sheet, &samples, &IDENTITY_STEPS)?,
            collapsed,
        ))
    })?;
    if let Some((ids, collapsed)) = ids {
        summary.int("value.kz.collapsed_samples", collapsed as i64);
        let orders = ids.orders();
        let noise = ids.at_noise();
        let series = [&ids.theta_t, &ids.theta_sigma, &ids.wave];
        let names = ["theta_t", "theta_sigma", "wave"];
        let mut pass = true;
        for (((name, values), order), below_noise) in
            names.iter().zip(series).zip(orders).zip(noise)
        {
            let last = *values.last().unwrap_or(&f64::NAN);
            summary.float(format!("residual.kz.{name}"), last);
            order_entry(&mut summary, &format!("order.kz.{name}"), order);
            pass &= last <= cfg.tol.identity
                && (below_noise || order.is_some_and(|o| o >= cfg.compare.min_order));
        }
        summary.check("identities", pass);
    }

    // Harmonic coordinates: contracted Christoffel symbols of x̃.
    let harm = guarded(&mut summary, &mut err, "harmonic", || {
        let mut steps = Vec::new();
        let mut values = Vec::new();
        for n in [cfg.sigma_nodes / 4, cfg.sigma_nodes / 2, cfg.sigma_nodes] {
            let h = map.sigma_length() / n as f64;
            let times: Vec<f64> = (0..5).map(|k| cfg.times[0] + h * k as f64).collect();
            let traj = exact_trajectory(map, &times, n)?;
            steps.push(h);
            values.push(harmonic_check(&traj)?.max());
        }
        Ok((steps, values))
    })?;
    if let Some((steps, values)) = harm {
        let below_noise = values.iter().all(|v| *v < HARMONIC_NOISE_FLOOR);
        let order = if below_noise {
            None
        } else {
            fit_order(&steps, &values)
        };
        summary.float("residual.harmonic.max", *values.last().unwrap());
        order_entry(&mut summary, "order.harmonic", order);
        summary.check(
            "harmonic",
            below_noise || order.is_some_and(|o| o >= cfg.compare.min_order),
        );
    }

    // Time periodicity with drift.
    if map.is_closed() {
        let per = guarded(&mut summary, &mut err, "periodicity", || {
            let stride = (grid.len() / 64).max(1);
            let coarse: Vec<f64> = grid.iter().step_by(stride).copied().collect();
            Ok(periodicity_check(map, &coarse, &cfg.times)?)
        })?;
        if let Some(p) = per {
            summary.float("residual.periodicity.drift.max", p.max_deviation);
            for (j, d) in p.drift.iter().enumerate() {
                summary.float(format!("value.drift.x{}", j + 1), *d);
            }
            summary.check("periodicity", p.max_deviation <= cfg.tol.periodicity);
        }
    }

    let mut out = OutputDir::create(&cfg.output_dir)?;
    let files = vec![out.write("summary.toml", &summary.render())?];
    Ok(Outcome {
        summary,
        files,
        check_error: err,
    })
}

/// Whether θ at time `t` lies where a line's solution is determined.
fn in_line_window(map: &KzMap, t: f64, theta: f64) -> bool {
    match map.rho(theta) {
        Ok(s) => s - t > 0.0 && s + t < map.sigma_length(),
        Err(_) => false,
    }
}

/// Exact solution against the nonlinear reference solver at several
/// resolutions, with fitted convergence orders.
pub fn run_compare(cfg: &ScenarioConfig) -> RunResult<Outcome> {
    if !cfg.topology.is_closed() {
        return Err(ConfigError::new("topology.kind", "compare needs a closed curve").into());
    }
    let sc = build_scenario(cfg)?;
    let t_end = cfg.compare.t_end;
    let mut summary = Summary::default();
    let mut err = None;
    summary.text("command", "compare");
    describe(&mut summary, cfg, &sc.map);
    summary.float("compare.t_end", t_end);

    let nodes = &cfg.compare.nodes;
    let steps: Vec<f64> = nodes
        .iter()
        .map(|&n| cfg.topology.length() / n as f64)
        .collect();

    let sup = guarded(&mut summary, &mut err, "compare", || {
        let (mut sup, mut geo) = (Vec::new(), Vec::new());
        for &n in nodes {
            let oracle = solve_nonlinear(&sc.curve, n, &[t_end])?;
            let exact = pullback_trajectory(&sc.map, &[t_end], &uniform_grid(cfg.topology, n))?;
            sup.push(compare_trajectories(&oracle, &exact, Matching::SameParametrization)?.max());
            geo.push(compare_trajectories(&oracle, &exact, Matching::Geometric)?.max());
        }
        Ok((sup, geo))
    })?;
    if let Some((sup, geo)) = sup {
        for ((n, e), g) in nodes.iter().zip(&sup).zip(&geo) {
            summary.float(format!("residual.compare.n{n}"), *e);
            summary.float(format!("residual.compare.geometric.n{n}"), *g);
        }
        let order = (nodes.len() > 1).then(|| fit_order(&steps, &sup)).flatten();
        order_entry(&mut summary, "order.compare", order);
        let finest = *sup.last().unwrap();
        let order_ok = nodes.len() < 2 || order.is_some_and(|o| o >= cfg.compare.min_order);
        summary.check("compare", finest <= cfg.tol.compare && order_ok);
    }

    if cfg.characteristic {
        let l1 = guarded(&mut summary, &mut err, "characteristic", || {
            let mut l1 = Vec::new();
            for &n in nodes {
                let grid = uniform_grid(cfg.topology, n);
                let field = lambda_init(&sc.curve, &grid)?;
                let sol = solve_characteristic(&field, &[t_end], Thresholds::default().gap)?;
                let h = cfg.topology.length() / n as f64;
                let mut e = 0.0;
                for (i, &th) in grid.iter().enumerate() {
                    let (p, m) = lambda_solution(&sc.map, t_end, th)?;
                    e += ((sol.plus[0][i] - p).abs() + (sol.minus[0][i] - m).abs()) * h;
                }
                l1.push(e);
            }
            Ok(l1)
        })?;
        if let Some(l1) = l1 {
            for (n, e) in nodes.iter().zip(&l1) {
                summary.float(format!("residual.characteristic.l1.n{n}"), *e);
            }
            let exact = l1.iter().all(|e| *e < NOISE_FLOOR);
            let order = if exact || nodes.len() < 2 {
                None
            } else {
                fit_order(&steps, &l1)
            };
            order_entry(&mut summary, "order.characteristic", order);
            let pass = exact
                || nodes.len() < 2
                || order.is_some_and(|o| (o - 1.0).abs() <= UPWIND_ORDER_BAND);
            summary.check("characteristic", pass);
        }
    }

    let mut out = OutputDir::create(&cfg.output_dir)?;
    let files = vec![out.write("summary.toml", &summary.render())?];
    Ok(Outcome {
        summary,
        files,
        check_error: err,
    })
}

/// Tabulated ρ and the initial speeds at the θ-table nodes.
pub fn run_kzmap(cfg: &ScenarioConfig) -> RunResult<Outcome> {
    let sc = build_scenario(cfg)?;
    let mut csv = String::from("theta,rho,lambda_plus,lambda_minus\n");
    for (theta, rho) in sc.map.rho_nodes() {
        let (p, m) = sc.map.speeds(theta);
        csv.push_str(&format!(
            "{},{},{},{}\n",
            crate::output::fmt_f64(theta),
            crate::output::fmt_f64(rho),
            crate::output::fmt_f64(p),
            crate::output::fmt_f64(m)
        ));
    }
    let mut summary = Summary::default();
    summary.text("command", "kzmap");
    describe(&mut summary, cfg, &sc.map);
    summary.float("value.gap_min", sc.field.gap_min);
    for (j, d) in sc.map.drift().iter().enumerate() {
        summary.float(format!("value.drift.x{}", j + 1), *d);
    }
    let mut out = OutputDir::create(&cfg.output_dir)?;
    let files = vec![
        out.write("kzmap.csv", &csv)?,
        out.write("summary.toml", &summary.render())?,
    ];
    Ok(Outcome {
        summary,
        files,
        check_error: None,
    })
}
