//! End-to-end runs of the `kzstring` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
    out: PathBuf,
}

impl Run {
    fn summary(&self) -> toml::Table {
        let text = fs::read_to_string(self.out.join("summary.toml")).expect("summary.toml");
        text.parse().expect("summary parses as TOML")
    }

    /// Follow a dotted key through the nested tables.
    fn get(&self, key: &str) -> Option<toml::Value> {
        let mut v = toml::Value::Table(self.summary());
        for part in key.split('.') {
            v = v.get(part)?.clone();
        }
        Some(v)
    }

    fn float(&self, key: &str) -> f64 {
        match self.get(key) {
            Some(toml::Value::Float(x)) => x,
            other => panic!("{key}: {other:?}\n{}", self.stdout),
        }
    }

    fn text(&self, key: &str) -> String {
        match self.get(key) {
            Some(toml::Value::String(s)) => s,
            other => panic!("{key}: {other:?}\n{}", self.stdout),
        }
    }
}

fn kzstring(dir: &Path, sub: &str, config: &str, extra: &[&str]) -> Run {
    let cfg = dir.join(format!("{sub}.toml"));
    fs::write(&cfg, config).unwrap();
    let out = dir.join(format!("out_{sub}"));
    let Output {
        status,
        stdout,
        stderr,
    } = Command::new(env!("CARGO_BIN_EXE_kzstring"))
        .arg(sub)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .args(extra)
        .output()
        .expect("binary runs");
    Run {
        code: status.code().expect("exit code"),
        stdout: String::from_utf8(stdout).unwrap(),
        stderr: String::from_utf8(stderr).unwrap(),
        out,
    }
}

const CIRCLE: &str = "curve.preset = \"circle\"\ntime.list = [0, \"pi/2\", \"pi\"]\n";
const ELLIPSE: &str =
    "curve.preset = \"ellipse\"\ncurve.a = 2\ncurve.b = 1\ntime.list = [0, 0.5, 1.0]\n";

fn max_radius(csv: &Path) -> f64 {
    let text = fs::read_to_string(csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,sigma,theta,x1,x2"));
    lines
        .map(|l| {
            let v: Vec<f64> = l.split(',').map(|s| s.parse().unwrap()).collect();
            v[3].hypot(v[4])
        })
        .fold(0.0, f64::max)
}

#[test]
fn simulate_circle_collapses_at_quarter_period() {
    let dir = TempDir::new().unwrap();
    let r = kzstring(dir.path(), "simulate", CIRCLE, &["--nodes", "256"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    for k in 0..3 {
        assert!(r.out.join(format!("state_{k:04}.csv")).exists());
    }
    assert!((max_radius(&r.out.join("state_0000.csv")) - 1.0).abs() < 1e-14);
    assert!(max_radius(&r.out.join("state_0001.csv")) <= 1e-10);
    assert!((max_radius(&r.out.join("state_0002.csv")) - 1.0).abs() < 1e-14);

    let manifest: toml::Table = fs::read_to_string(r.out.join("manifest.toml"))
        .unwrap()
        .parse()
        .unwrap();
    assert_eq!(manifest["states"].as_integer(), Some(3));
    assert_eq!(
        manifest["state"]["0001"]["file"].as_str(),
        Some("state_0001.csv")
    );
}

#[test]
fn simulate_ellipse_reports_gauge_residuals() {
    let dir = TempDir::new().unwrap();
    let r = kzstring(dir.path(), "simulate", ELLIPSE, &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.float("residual.gauge.orthogonality.max") <= 1e-8);
    assert!(r.float("residual.gauge.normalization.max") <= 1e-8);
    assert_eq!(r.text("check.gauge"), "pass");
    assert_eq!(
        r.stdout,
        fs::read_to_string(r.out.join("summary.toml")).unwrap()
    );
}

#[test]
fn verify_circle_passes_with_tight_residuals() {
    let dir = TempDir::new().unwrap();
    let r = kzstring(dir.path(), "verify", CIRCLE, &[]);
    assert_eq!(r.code, 0, "{}\n{}", r.stdout, r.stderr);
    for key in [
        "residual.gauge.orthogonality.max",
        "residual.gauge.normalization.max",
        "residual.kz.theta_t",
        "residual.kz.theta_sigma",
        "residual.kz.wave",
        "residual.periodicity.drift.max",
    ] {
        assert!(r.float(key) <= 1e-10, "{key} = {}", r.float(key));
    }
    for check in [
        "gauge",
        "quadrature",
        "inversion",
        "identities",
        "harmonic",
        "periodicity",
    ] {
        assert_eq!(r.text(&format!("check.{check}")), "pass", "{check}");
    }
}

#[test]
fn verify_ellipse_passes() {
    let dir = TempDir::new().unwrap();
    let r = kzstring(dir.path(), "verify", ELLIPSE, &[]);
    assert_eq!(r.code, 0, "{}\n{}", r.stdout, r.stderr);
    assert!(r.float("residual.gauge.orthogonality.max") <= 1e-8);
    assert!(r.float("order.kz.wave") >= 1.8);
    assert!(r.float("order.harmonic") >= 1.8);
}

#[test]
fn flipped_lambda_minus_fails_gauge() {
    let dir = TempDir::new().unwrap();
    let cfg = "curve.preset = \"ellipse\"\ntime.list = [0.2]\nfault.flip_lambda_minus = true\n";
    let r = kzstring(dir.path(), "verify", cfg, &["--nodes", "256"]);
    assert_eq!(r.code, 1, "{}", r.stderr);
    assert_eq!(r.text("check.gauge"), "fail");

    // Later times also break the inversion of the corrupted transform.
    let cfg = format!("{ELLIPSE}fault.flip_lambda_minus = true\n");
    let r = kzstring(dir.path(), "verify", &cfg, &["--nodes", "256"]);
    assert_eq!(r.code, 3, "{}", r.stderr);
    assert_eq!(r.text("check.gauge"), "fail");
}

#[test]
fn config_errors_exit_two_and_name_the_key() {
    let dir = TempDir::new().unwrap();
    let r = kzstring(dir.path(), "verify", "topology.period = -1\n", &[]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("topology.period"), "{}", r.stderr);
    assert_eq!(
        r.stderr.matches("topology.period").count(),
        1,
        "{}",
        r.stderr
    );

    let r = kzstring(dir.path(), "simulate", "curve.colour = \"red\"\n", &[]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("curve.colour"), "{}", r.stderr);

    let r = kzstring(dir.path(), "kzmap", CIRCLE, &["--nodes", "4"]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("--nodes"), "{}", r.stderr);
}

#[test]
fn missing_config_exits_two() {
    let status = Command::new(env!("CARGO_BIN_EXE_kzstring"))
        .args(["verify", "--config", "/nonexistent/scenario.toml"])
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(2));
}

#[test]
fn compare_circle_converges_at_second_order() {
    let dir = TempDir::new().unwrap();
    let r = kzstring(dir.path(), "compare", CIRCLE, &[]);
    assert_eq!(r.code, 0, "{}\n{}", r.stdout, r.stderr);
    assert!(r.float("order.compare") >= 1.8);
    assert!(r.float("residual.compare.n512") <= 1e-4);
    assert_eq!(r.text("check.compare"), "pass");
}

#[test]
fn compare_single_resolution_has_no_order() {
    let dir = TempDir::new().unwrap();
    let r = kzstring(dir.path(), "compare", "compare.nodes = [64]\n", &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(r.text("order.compare"), "unavailable");
}

#[test]
fn compare_rejects_open_strings() {
    let dir = TempDir::new().unwrap();
    let cfg = "curve.preset = \"line\"\ntopology.kind = \"line\"\nvelocity.kind = \"constant\"\nvelocity.value = [0, 0.3]\n";
    let r = kzstring(dir.path(), "compare", cfg, &[]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("topology.kind"), "{}", r.stderr);
}

#[test]
fn kzmap_circle_is_identity() {
    let dir = TempDir::new().unwrap();
    let r = kzstring(dir.path(), "kzmap", CIRCLE, &["--nodes", "32", "--quiet"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.stdout.is_empty());
    assert_eq!(r.summary()["grid"]["sigma_nodes"].as_integer(), Some(32));

    let text = fs::read_to_string(r.out.join("kzmap.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("theta,rho,lambda_plus,lambda_minus"));
    let mut rows = 0;
    for line in lines {
        let v: Vec<f64> = line.split(',').map(|s| s.parse().unwrap()).collect();
        assert!((v[1] - v[0]).abs() < 1e-13);
        assert!((v[2] - 1.0).abs() < 1e-14 && (v[3] + 1.0).abs() < 1e-14);
        rows += 1;
    }
    assert!(rows >= 32);
}
