//! CSV and summary writers. Formatting is fixed so output is reproducible
//! byte for byte.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use kzstring::StringState;

/// Seventeen significant digits: enough to round-trip any `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// `t,sigma,theta,x1..xn`; `theta` is the state's companion coordinate.
pub fn state_csv(state: &StringState) -> String {
    let mut s = String::from("t,sigma,theta");
    for j in 1..=state.dim {
        let _ = write!(s, ",x{j}");
    }
    s.push('\n');
    for i in 0..state.len() {
        let theta = state.companion.get(i).copied().unwrap_or(f64::NAN);
        let _ = write!(
            s,
            "{},{},{}",
            fmt_f64(state.t),
            fmt_f64(state.param[i]),
            fmt_f64(theta)
        );
        for x in state.position(i) {
            let _ = write!(s, ",{}", fmt_f64(*x));
        }
        s.push('\n');
    }
    s
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Float(f64),
    Int(i64),
    Text(String),
}

/// Ordered `key = value` lines, valid TOML.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Summary {
    entries: Vec<(String, Value)>,
}

impl Summary {
    pub fn float(&mut self, key: impl Into<String>, v: f64) {
        self.entries.push((key.into(), Value::Float(v)));
    }

    pub fn int(&mut self, key: impl Into<String>, v: i64) {
        self.entries.push((key.into(), Value::Int(v)));
    }

    pub fn text(&mut self, key: impl Into<String>, v: impl Into<String>) {
        self.entries.push((key.into(), Value::Text(v.into())));
    }

    /// Record `check.<name>` and return `pass`.
    pub fn check(&mut self, name: &str, pass: bool) -> bool {
        self.text(format!("check.{name}"), if pass { "pass" } else { "fail" });
        pass
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    pub fn get_float(&self, key: &str) -> Option<f64> {
        match self.get(key)? {
            Value::Float(x) => Some(*x),
            Value::Int(i) => Some(*i as f64),
            Value::Text(_) => None,
        }
    }

    pub fn entries(&self) -> &[(String, Value)] {
        &self.entries
    }

    /// True when no `check.*` entry failed.
    pub fn passed(&self) -> bool {
        !self
            .entries
            .iter()
            .any(|(k, v)| k.starts_with("check.") && *v == Value::Text("fail".into()))
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.entries {
            let _ = match v {
                // TOML spells non-finite floats `nan` and `inf`.
                Value::Float(x) if x.is_nan() => writeln!(s, "{k} = nan"),
                Value::Float(x) if x.is_infinite() => {
                    writeln!(s, "{k} = {}inf", if *x < 0.0 { "-" } else { "" })
                }
                Value::Float(x) => writeln!(s, "{k} = {x:e}"),
                Value::Int(i) => writeln!(s, "{k} = {i}"),
                Value::Text(t) => writeln!(s, "{k} = \"{t}\""),
            };
        }
        s
    }
}

/// Writes artifacts into one directory and remembers what it wrote.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    written: Vec<String>,
}

impl OutputDir {
    pub fn create(root: &Path) -> io::Result<Self> {
        fs::create_dir_all(root)?;
        Ok(Self {
            root: root.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn write(&mut self, name: &str, contents: &str) -> io::Result<PathBuf> {
        let path = self.root.join(name);
        fs::write(&path, contents)?;
        self.written.push(name.to_string());
        Ok(path)
    }

    pub fn written(&self) -> &[String] {
        &self.written
    }
}
