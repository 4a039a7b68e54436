//! Cumulative quadrature on uniform grids.
//!
//! A [`PrefixTable`] stores the antiderivative of a smooth integrand at the
//! nodes of a uniform grid. Evaluating the antiderivative anywhere costs one
//! table lookup plus an 8-point Gauss–Legendre rule over the partial cell, so
//! the result carries no interpolation error.

use crate::error::{Error, Result};

const GL_NODES: [f64; 4] = [
    0.183_434_642_495_649_78,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_2,
];
const GL_WEIGHTS: [f64; 4] = [
    0.362_683_783_378_361_77,
    0.313_706_645_877_887_05,
    0.222_381_034_453_374_34,
    0.101_228_536_290_376_69,
];

/// Integrate a vector-valued integrand over `[a, b]` with one 8-point
/// Gauss–Legendre panel, accumulating into `out`.
///
/// `scratch` must have the same length as `out`.
pub fn gauss_legendre<F>(a: f64, b: f64, f: &F, out: &mut [f64], scratch: &mut [f64])
where
    F: Fn(f64, &mut [f64]) + ?Sized,
{
    let half = 0.5 * (b - a);
    if half == 0.0 {
        return;
    }
    let mid = 0.5 * (a + b);
    for (x, w) in GL_NODES.iter().zip(GL_WEIGHTS) {
        for sign in [-1.0, 1.0] {
            f(mid + sign * half * x, scratch);
            for (o, s) in out.iter_mut().zip(scratch.iter()) {
                *o += half * w * s;
            }
        }
    }
}

/// Scalar convenience wrapper around [`gauss_legendre`].
pub fn gauss_legendre_scalar(a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
    let mut out = [0.0];
    let mut scratch = [0.0];
    gauss_legendre(
        a,
        b,
        &|x: f64, s: &mut [f64]| s[0] = f(x),
        &mut out,
        &mut scratch,
    );
    out[0]
}

/// Antiderivative table `A(x) = ∫_origin^x f` of a `width`-component
/// integrand on `cells` uniform cells.
///
/// With `periodic` set, the integrand is assumed periodic with period
/// `cells * step` and `A(x + P) = A(x) + A(origin + P)`.
#[derive(Debug, Clone)]
pub struct PrefixTable {
    origin: f64,
    step: f64,
    cells: usize,
    width: usize,
    periodic: bool,
    prefix: Vec<f64>,
}

impl PrefixTable {
    pub fn build<F>(
        origin: f64,
        length: f64,
        cells: usize,
        width: usize,
        periodic: bool,
        f: &F,
    ) -> Result<Self>
    where
        F: Fn(f64, &mut [f64]) + ?Sized,
    {
        if cells == 0 || width == 0 {
            return Err(Error::InvalidArgument(
                "prefix table needs at least one cell and one component".into(),
            ));
        }
        if !(length > 0.0) {
            return Err(Error::NonPositivePeriod(length));
        }
        let step = length / cells as f64;
        let mut prefix = vec![0.0; (cells + 1) * width];
        let mut acc = vec![0.0; width];
        let mut scratch = vec![0.0; width];
        for i in 0..cells {
            let a = origin + i as f64 * step;
            gauss_legendre(a, a + step, f, &mut acc, &mut scratch);
            prefix[(i + 1) * width..(i + 2) * width].copy_from_slice(&acc);
        }
        Ok(Self {
            origin,
            step,
            cells,
            width,
            periodic,
            prefix,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn origin(&self) -> f64 {
        self.origin
    }

    pub fn length(&self) -> f64 {
        self.step * self.cells as f64
    }

    pub fn is_periodic(&self) -> bool {
        self.periodic
    }

    pub fn node(&self, i: usize) -> f64 {
        self.origin + i as f64 * self.step
    }

    /// Antiderivative at node `i` (0 ≤ i ≤ cells).
    pub fn node_value(&self, i: usize) -> &[f64] {
        &self.prefix[i * self.width..(i + 1) * self.width]
    }

    /// All node values, row-major `(cells + 1) × width`.
    pub fn raw(&self) -> &[f64] {
        &self.prefix
    }

    /// Integral over one full period (or the whole domain).
    pub fn total(&self) -> &[f64] {
        self.node_value(self.cells)
    }

    /// Split `x` into a period count and a cell index with a local offset.
    fn locate(&self, x: f64) -> Result<(f64, usize, f64)> {
        let length = self.length();
        let mut rel = x - self.origin;
        let mut periods = 0.0;
        if self.periodic {
            periods = (rel / length).floor();
            rel -= periods * length;
        } else {
            let slack = 1e-12 * length.max(1.0);
            if rel < -slack || rel > length + slack {
                return Err(Error::OutOfDomain {
                    value: x,
                    lo: self.origin,
                    hi: self.origin + length,
                });
            }
            rel = rel.clamp(0.0, length);
        }
        let cell = ((rel / self.step).floor() as usize).min(self.cells - 1);
        Ok((periods, cell, rel))
    }

    /// Evaluate `A(x)` into `out`. `f` must be the integrand the table was
    /// built with.
    pub fn eval<F>(&self, x: f64, f: &F, out: &mut [f64]) -> Result<()>
    where
        F: Fn(f64, &mut [f64]) + ?Sized,
    {
        let (periods, cell, rel) = self.locate(x)?;
        out.copy_from_slice(self.node_value(cell));
        let a = self.origin + cell as f64 * self.step;
        let b = self.origin + rel;
        let mut scratch = smallvec::SmallVec::<[f64; 8]>::from_elem(0.0, self.width);
        gauss_legendre(a, b, f, out, &mut scratch);
        if periods != 0.0 {
            for (o, t) in out.iter_mut().zip(self.total()) {
                *o += periods * t;
            }
        }
        Ok(())
    }
}
