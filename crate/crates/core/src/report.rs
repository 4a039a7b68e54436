//! Named residual norms and convergence-order fits.

use std::fmt;

/// One named residual with an optional fitted convergence order.
#[derive(Debug, Clone, PartialEq)]
pub struct Residual {
    pub name: String,
    pub value: f64,
    pub order: Option<f64>,
}

/// Resolution the residuals were measured at.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GridMeta {
    pub nodes: usize,
    pub spacing: f64,
    /// Step sizes of a refinement study, coarsest first; empty otherwise.
    pub steps: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ResidualReport {
    pub entries: Vec<Residual>,
    pub grid: GridMeta,
}

impl ResidualReport {
    pub fn new(grid: GridMeta) -> Self {
        Self {
            entries: Vec::new(),
            grid,
        }
    }

    pub fn push(&mut self, name: impl Into<String>, value: f64) {
        self.entries.push(Residual {
            name: name.into(),
            value,
            order: None,
        });
    }

    pub fn push_with_order(&mut self, name: impl Into<String>, value: f64, order: Option<f64>) {
        self.entries.push(Residual {
            name: name.into(),
            value,
            order,
        });
    }

    pub fn get(&self, name: &str) -> Option<&Residual> {
        self.entries.iter().find(|r| r.name == name)
    }

    pub fn value(&self, name: &str) -> Option<f64> {
        self.get(name).map(|r| r.value)
    }

    /// Largest residual value (NaN-propagating).
    pub fn max(&self) -> f64 {
        self.entries.iter().map(|r| r.value).fold(0.0, |a: f64, b| {
            if b.is_nan() || a.is_nan() {
                f64::NAN
            } else {
                a.max(b)
            }
        })
    }
}

impl fmt::Display for ResidualReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.entries {
            write!(f, "{} = {:e}", r.name, r.value)?;
            if let Some(p) = r.order {
                write!(f, " (order {p:.3})")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Least-squares slope of `log(err)` against `log(h)`.
///
/// Returns `None` with fewer than two points or any non-positive error.
pub fn fit_order(steps: &[f64], errors: &[f64]) -> Option<f64> {
    if steps.len() != errors.len() || steps.len() < 2 {
        return None;
    }
    if errors.iter().any(|e| !(*e > 0.0)) || steps.iter().any(|h| !(*h > 0.0)) {
        return None;
    }
    let n = steps.len() as f64;
    let xs: Vec<f64> = steps.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_exact_power_law() {
        let h = [0.1, 0.05, 0.025];
        let e: Vec<f64> = h.iter().map(|h| 3.0 * h * h).collect();
        assert!((fit_order(&h, &e).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn single_point_has_no_order() {
        assert_eq!(fit_order(&[0.1], &[1.0]), None);
        assert_eq!(fit_order(&[0.1, 0.05], &[1.0, 0.0]), None);
    }
}
