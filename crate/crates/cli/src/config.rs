//! Scenario configuration.
//!
//! The file is TOML restricted to scalar and array values under dotted
//! keys, e.g. `curve.preset = "ellipse"`. Every key is checked against a
//! fixed list; numeric values may also be given as strings holding simple
//! products and quotients of numbers and `pi`, such as `"3*pi/2"`.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use kzstring::{Presentation, Topology, VelocitySpec};

/// A configuration problem, tied to the key that caused it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub key: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(key: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            key: key.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config key `{}`: {}", self.key, self.message)
    }
}

impl std::error::Error for ConfigError {}

type Result<T> = std::result::Result<T, ConfigError>;

/// Pass/fail thresholds.
#[derive(Debug, Clone, PartialEq)]
pub struct Tolerances {
    /// Change of the σ-period when the θ-grid is doubled.
    pub quadrature: f64,
    /// `max |ρ(ϱ(σ)) − σ|` on the σ-grid.
    pub inversion: f64,
    pub gauge: f64,
    /// Finest-step residual of the derivative identities and wave equation.
    pub identity: f64,
    pub periodicity: f64,
    /// Sup distance between oracle and exact solutions at the finest grid.
    pub compare: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            quadrature: 1e-10,
            inversion: 1e-10,
            gauge: 1e-8,
            identity: 1e-4,
            periodicity: 1e-9,
            compare: 5e-4,
        }
    }
}

/// Refinement study settings for `compare`.
#[derive(Debug, Clone, PartialEq)]
pub struct CompareConfig {
    pub nodes: Vec<usize>,
    pub t_end: f64,
    /// Smallest acceptable fitted convergence order.
    pub min_order: f64,
}

impl Default for CompareConfig {
    fn default() -> Self {
        Self {
            nodes: vec![128, 256, 512],
            t_end: 0.5,
            min_order: 1.8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub presentation: Presentation,
    pub velocity: VelocitySpec,
    pub dim: usize,
    pub topology: Topology,
    pub theta_nodes: usize,
    pub sigma_nodes: usize,
    pub times: Vec<f64>,
    pub tol: Tolerances,
    pub compare: CompareConfig,
    /// Also run the upwind solver for the characteristic speeds in `compare`.
    pub characteristic: bool,
    pub output_dir: PathBuf,
    /// Negate Λ₋ after the transform is built, to exercise failure paths.
    pub flip_lambda_minus: bool,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            presentation: Presentation::preset("circle", &[1.0]),
            velocity: VelocitySpec::Zero,
            dim: 2,
            topology: Topology::default(),
            theta_nodes: 1024,
            sigma_nodes: 1024,
            times: vec![0.0],
            tol: Tolerances::default(),
            compare: CompareConfig::default(),
            characteristic: false,
            output_dir: PathBuf::from("out"),
            flip_lambda_minus: false,
        }
    }
}

pub const MIN_NODES: usize = 16;

const FIXED_KEYS: &[&str] = &[
    "curve.preset",
    "curve.radius",
    "curve.a",
    "curve.b",
    "curve.dim",
    "velocity.kind",
    "velocity.value",
    "topology.kind",
    "topology.period",
    "topology.extent",
    "grid.theta_nodes",
    "grid.sigma_nodes",
    "time.list",
    "time.end",
    "time.stride",
    "tol.quadrature",
    "tol.inversion",
    "tol.gauge",
    "tol.identity",
    "tol.periodicity",
    "tol.compare",
    "compare.nodes",
    "compare.t_end",
    "compare.min_order",
    "solver.characteristic",
    "output.dir",
    "fault.flip_lambda_minus",
];

/// `curve.x3.cos`, `velocity.x1.sin` and the like.
fn is_coefficient_key(key: &str) -> bool {
    let parts: Vec<&str> = key.split('.').collect();
    matches!(parts.as_slice(), [section, comp, kind]
        if (*section == "curve" || *section == "velocity")
            && (*kind == "cos" || *kind == "sin")
            && comp.strip_prefix('x').is_some_and(|d| d.parse::<usize>().is_ok_and(|d| d >= 1)))
}

/// Evaluate `a*b/c…` where each factor is a number or `pi`.
pub fn eval_scalar(text: &str) -> Option<f64> {
    let mut value = 1.0;
    let mut op = '*';
    let mut rest = text.trim();
    if rest.is_empty() {
        return None;
    }
    let (sign, body) = match rest.strip_prefix('-') {
        Some(b) => (-1.0, b),
        None => (1.0, rest),
    };
    rest = body;
    loop {
        let end = rest.find(['*', '/']).unwrap_or(rest.len());
        let token = rest[..end].trim();
        let factor = match token {
            "pi" => std::f64::consts::PI,
            _ => token.parse::<f64>().ok()?,
        };
        value = if op == '*' {
            value * factor
        } else {
            value / factor
        };
        if end == rest.len() {
            break;
        }
        op = rest[end..].chars().next()?;
        rest = &rest[end + 1..];
    }
    value.is_finite().then_some(sign * value)
}

fn flatten(
    prefix: &str,
    table: &toml::Table,
    out: &mut BTreeMap<String, toml::Value>,
) -> Result<()> {
    for (k, v) in table {
        let key = if prefix.is_empty() {
            k.clone()
        } else {
            format!("{prefix}.{k}")
        };
        match v {
            toml::Value::Table(t) => flatten(&key, t, out)?,
            other => {
                if !FIXED_KEYS.contains(&key.as_str()) && !is_coefficient_key(&key) {
                    return Err(ConfigError::new(key, "unknown key"));
                }
                out.insert(key, other.clone());
            }
        }
    }
    Ok(())
}

/// Cosine and sine coefficient arrays, one per component.
type Coefficients = (Vec<Vec<f64>>, Vec<Vec<f64>>);

struct Entries(BTreeMap<String, toml::Value>);

impl Entries {
    fn float(&self, key: &str) -> Result<Option<f64>> {
        self.0.get(key).map(|v| value_to_f64(key, v)).transpose()
    }

    fn positive(&self, key: &str, default: f64) -> Result<f64> {
        let v = self.float(key)?.unwrap_or(default);
        if !(v > 0.0) {
            return Err(ConfigError::new(key, format!("must be positive, got {v}")));
        }
        Ok(v)
    }

    fn count(&self, key: &str, default: usize, min: usize) -> Result<usize> {
        let n = match self.0.get(key) {
            None => default,
            Some(v) => value_to_count(key, v)?,
        };
        if n < min {
            return Err(ConfigError::new(
                key,
                format!("must be at least {min}, got {n}"),
            ));
        }
        Ok(n)
    }

    fn string(&self, key: &str) -> Result<Option<String>> {
        match self.0.get(key) {
            None => Ok(None),
            Some(toml::Value::String(s)) => Ok(Some(s.clone())),
            Some(_) => Err(ConfigError::new(key, "expected a string")),
        }
    }

    fn boolean(&self, key: &str) -> Result<bool> {
        match self.0.get(key) {
            None => Ok(false),
            Some(toml::Value::Boolean(b)) => Ok(*b),
            Some(_) => Err(ConfigError::new(key, "expected true or false")),
        }
    }

    fn floats(&self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.0.get(key) {
            None => Ok(None),
            Some(toml::Value::Array(items)) => items
                .iter()
                .map(|v| value_to_f64(key, v))
                .collect::<Result<Vec<_>>>()
                .map(Some),
            Some(v) => value_to_f64(key, v).map(|x| Some(vec![x])),
        }
    }

    /// Per-component coefficient arrays `section.x1.kind … section.x{dim}.kind`.
    fn coefficients(&self, section: &str, dim: usize) -> Result<Option<Coefficients>> {
        let any = self
            .0
            .keys()
            .any(|k| k.starts_with(&format!("{section}.x")));
        if !any {
            return Ok(None);
        }
        for key in self
            .0
            .keys()
            .filter(|k| is_coefficient_key(k) && k.starts_with(section))
        {
            let comp: usize = key.split('.').nth(1).unwrap()[1..].parse().unwrap();
            if comp > dim {
                return Err(ConfigError::new(
                    key.as_str(),
                    format!("component exceeds curve.dim = {dim}"),
                ));
            }
        }
        let mut cos = Vec::with_capacity(dim);
        let mut sin = Vec::with_capacity(dim);
        for c in 1..=dim {
            for (kind, out) in [("cos", &mut cos), ("sin", &mut sin)] {
                let key = format!("{section}.x{c}.{kind}");
                out.push(self.floats(&key)?.unwrap_or_default());
            }
            let (nc, ns) = (cos[c - 1].len(), sin[c - 1].len());
            let n = nc.max(ns);
            if n == 0 {
                return Err(ConfigError::new(
                    format!("{section}.x{c}.cos"),
                    "component has no coefficients",
                ));
            }
            cos[c - 1].resize(n, 0.0);
            sin[c - 1].resize(n, 0.0);
        }
        Ok(Some((cos, sin)))
    }
}

fn value_to_f64(key: &str, v: &toml::Value) -> Result<f64> {
    match v {
        toml::Value::Float(x) => Ok(*x),
        toml::Value::Integer(i) => Ok(*i as f64),
        toml::Value::String(s) => {
            eval_scalar(s).ok_or_else(|| ConfigError::new(key, format!("cannot evaluate `{s}`")))
        }
        _ => Err(ConfigError::new(key, "expected a number")),
    }
}

fn value_to_count(key: &str, v: &toml::Value) -> Result<usize> {
    match v {
        toml::Value::Integer(i) if *i >= 0 => Ok(*i as usize),
        _ => Err(ConfigError::new(key, "expected a non-negative integer")),
    }
}

fn check_times(key: &str, times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(ConfigError::new(key, "no output times"));
    }
    if times.iter().any(|t| !(*t >= 0.0)) {
        return Err(ConfigError::new(key, "times must be non-negative"));
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(ConfigError::new(key, "times must be strictly increasing"));
    }
    Ok(())
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| ConfigError::new("<syntax>", e.message().to_string()))?;
        let mut flat = BTreeMap::new();
        flatten("", &table, &mut flat)?;
        let e = Entries(flat);
        let d = ScenarioConfig::default();

        let dim = e.count("curve.dim", d.dim, 2)?;
        let topology = match e.string("topology.kind")?.as_deref().unwrap_or("closed") {
            "closed" => Topology::Closed {
                period: e.positive("topology.period", std::f64::consts::TAU)?,
            },
            "line" => Topology::Line {
                extent: e.positive("topology.extent", 10.0)?,
            },
            other => {
                return Err(ConfigError::new(
                    "topology.kind",
                    format!("unknown topology `{other}` (closed, line)"),
                ))
            }
        };

        let preset = e.string("curve.preset")?.unwrap_or_else(|| "circle".into());
        let presentation = match preset.as_str() {
            "circle" => Presentation::preset("circle", &[e.positive("curve.radius", 1.0)?]),
            "ellipse" => Presentation::preset(
                "ellipse",
                &[e.positive("curve.a", 2.0)?, e.positive("curve.b", 1.0)?],
            ),
            "line" => Presentation::preset("line", &[]),
            "fourier" => {
                let (cos, sin) = e.coefficients("curve", dim)?.ok_or_else(|| {
                    ConfigError::new("curve.x1.cos", "fourier curve needs coefficients")
                })?;
                Presentation::Fourier { cos, sin }
            }
            other => {
                return Err(ConfigError::new(
                    "curve.preset",
                    format!("unknown preset `{other}` (circle, ellipse, line, fourier)"),
                ))
            }
        };
        if preset == "line" && topology.is_closed() {
            return Err(ConfigError::new(
                "topology.kind",
                "the line preset needs topology.kind = \"line\"",
            ));
        }
        if preset != "line" && preset != "fourier" && !topology.is_closed() {
            return Err(ConfigError::new(
                "topology.kind",
                format!("the {preset} preset is closed"),
            ));
        }
        if preset != "fourier" && e.0.keys().any(|k| k.starts_with("curve.x")) {
            return Err(ConfigError::new(
                "curve.preset",
                "coefficients given for a non-fourier curve",
            ));
        }

        let velocity = match e.string("velocity.kind")?.as_deref().unwrap_or("zero") {
            "zero" => VelocitySpec::Zero,
            "constant" => {
                let v = e.floats("velocity.value")?.ok_or_else(|| {
                    ConfigError::new("velocity.value", "constant velocity needs a value")
                })?;
                if v.len() != dim {
                    return Err(ConfigError::new(
                        "velocity.value",
                        format!("{} components for dimension {dim}", v.len()),
                    ));
                }
                VelocitySpec::Constant(v)
            }
            "fourier" => {
                let (cos, sin) = e.coefficients("velocity", dim)?.ok_or_else(|| {
                    ConfigError::new("velocity.x1.cos", "fourier velocity needs coefficients")
                })?;
                VelocitySpec::Fourier { cos, sin }
            }
            other => {
                return Err(ConfigError::new(
                    "velocity.kind",
                    format!("unknown velocity `{other}` (zero, constant, fourier)"),
                ))
            }
        };

        let theta_nodes = e.count("grid.theta_nodes", d.theta_nodes, MIN_NODES)?;
        let sigma_nodes = e.count("grid.sigma_nodes", d.sigma_nodes, MIN_NODES)?;

        let times = match (e.floats("time.list")?, e.float("time.end")?) {
            (Some(_), Some(_)) => {
                return Err(ConfigError::new(
                    "time.end",
                    "give either time.list or time.end, not both",
                ))
            }
            (Some(list), None) => {
                check_times("time.list", &list)?;
                list
            }
            (None, Some(end)) => {
                if !(end >= 0.0) {
                    return Err(ConfigError::new("time.end", "must be non-negative"));
                }
                let stride = e.positive("time.stride", end.max(f64::MIN_POSITIVE))?;
                let steps = (end / stride + 1e-9).floor() as usize;
                (0..=steps).map(|k| k as f64 * stride).collect()
            }
            (None, None) => {
                if e.0.contains_key("time.stride") {
                    return Err(ConfigError::new("time.stride", "needs time.end"));
                }
                d.times.clone()
            }
        };

        let tol = Tolerances {
            quadrature: e.positive("tol.quadrature", d.tol.quadrature)?,
            inversion: e.positive("tol.inversion", d.tol.inversion)?,
            gauge: e.positive("tol.gauge", d.tol.gauge)?,
            identity: e.positive("tol.identity", d.tol.identity)?,
            periodicity: e.positive("tol.periodicity", d.tol.periodicity)?,
            compare: e.positive("tol.compare", d.tol.compare)?,
        };

        let nodes = match e.0.get("compare.nodes") {
            None => d.compare.nodes.clone(),
            Some(toml::Value::Array(items)) => items
                .iter()
                .map(|v| value_to_count("compare.nodes", v))
                .collect::<Result<Vec<_>>>()?,
            Some(v) => vec![value_to_count("compare.nodes", v)?],
        };
        if nodes.is_empty() || nodes.iter().any(|n| *n < MIN_NODES) {
            return Err(ConfigError::new(
                "compare.nodes",
                format!("each entry must be at least {MIN_NODES}"),
            ));
        }
        if nodes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(ConfigError::new(
                "compare.nodes",
                "must be strictly increasing",
            ));
        }
        let compare = CompareConfig {
            nodes,
            t_end: e.positive("compare.t_end", d.compare.t_end)?,
            min_order: e.positive("compare.min_order", d.compare.min_order)?,
        };

        Ok(Self {
            presentation,
            velocity,
            dim,
            topology,
            theta_nodes,
            sigma_nodes,
            times,
            tol,
            compare,
            characteristic: e.boolean("solver.characteristic")?,
            output_dir: e.string("output.dir")?.map_or(d.output_dir, PathBuf::from),
            flip_lambda_minus: e.boolean("fault.flip_lambda_minus")?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn scalar_expressions() {
        assert_eq!(eval_scalar("pi"), Some(PI));
        assert_eq!(eval_scalar("2*pi"), Some(2.0 * PI));
        assert_eq!(eval_scalar("pi/2"), Some(PI / 2.0));
        assert_eq!(eval_scalar(" 3 * pi / 4 "), Some(3.0 * PI / 4.0));
        assert_eq!(eval_scalar("-0.5"), Some(-0.5));
        assert_eq!(eval_scalar("1e-3"), Some(1e-3));
        assert_eq!(eval_scalar("pi/0"), None);
        assert_eq!(eval_scalar("two"), None);
        assert_eq!(eval_scalar(""), None);
    }

    #[test]
    fn defaults() {
        let c = ScenarioConfig::parse("").unwrap();
        assert_eq!(c, ScenarioConfig::default());
    }

    #[test]
    fn full_ellipse_scenario() {
        let c = ScenarioConfig::parse(
            r#"
            # ellipse at rest
            curve.preset = "ellipse"
            curve.a = 2
            curve.b = 1.0
            grid.sigma_nodes = 256
            time.list = [0, 0.5, "pi/2"]
            tol.gauge = 1e-9
            [compare]
            nodes = [64, 128]
            "#,
        )
        .unwrap();
        assert_eq!(c.presentation, Presentation::preset("ellipse", &[2.0, 1.0]));
        assert_eq!(c.sigma_nodes, 256);
        assert_eq!(c.times, vec![0.0, 0.5, PI / 2.0]);
        assert_eq!(c.tol.gauge, 1e-9);
        assert_eq!(c.compare.nodes, vec![64, 128]);
    }

    #[test]
    fn stride_times() {
        let c = ScenarioConfig::parse("time.end = 1.0\ntime.stride = 0.25").unwrap();
        assert_eq!(c.times, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn fourier_curve_pads_components() {
        let c = ScenarioConfig::parse(
            r#"
            curve.preset = "fourier"
            curve.dim = 3
            curve.x1.cos = [0, 1]
            curve.x2.sin = [0, 1]
            curve.x3.cos = [0, 0, 0.2]
            velocity.kind = "constant"
            velocity.value = [0, 0, 0.1]
            "#,
        )
        .unwrap();
        match c.presentation {
            Presentation::Fourier { cos, sin } => {
                assert_eq!(cos[0], vec![0.0, 1.0]);
                assert_eq!(sin[0], vec![0.0, 0.0]);
                assert_eq!(cos[2], vec![0.0, 0.0, 0.2]);
                assert_eq!(sin[2], vec![0.0, 0.0, 0.0]);
            }
            _ => panic!("not a fourier curve"),
        }
    }

    #[test]
    fn errors_name_the_key() {
        let cases = [
            ("topology.period = -1", "topology.period"),
            ("curve.preset = \"spiral\"", "curve.preset"),
            ("grid.theta_nodes = 8", "grid.theta_nodes"),
            ("time.list = [0.5, 0.1]", "time.list"),
            ("curve.colour = 3", "curve.colour"),
            ("velocity.kind = \"constant\"", "velocity.value"),
            (
                "velocity.kind = \"constant\"\nvelocity.value = [1]",
                "velocity.value",
            ),
            ("curve.radius = \"big\"", "curve.radius"),
            ("curve.preset = \"line\"", "topology.kind"),
            ("compare.nodes = [64, 32]", "compare.nodes"),
            (
                "curve.preset = \"fourier\"\ncurve.x3.cos = [1]",
                "curve.x3.cos",
            ),
            ("fault.flip_lambda_minus = 1", "fault.flip_lambda_minus"),
        ];
        for (text, key) in cases {
            let err = ScenarioConfig::parse(text).unwrap_err();
            assert_eq!(err.key, key, "{text}: {err}");
        }
    }

    #[test]
    fn syntax_errors_are_reported() {
        assert_eq!(
            ScenarioConfig::parse("curve.preset = ").unwrap_err().key,
            "<syntax>"
        );
    }
}
