//! Complex amplitudes on a [`Grid`] and the transforms between sides.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{LabError, Result};
use crate::grid::{window_samples, Grid};

pub type C64 = Complex64;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

pub(crate) fn fft_forward(n: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(n))
}

pub(crate) fn fft_inverse(n: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(n))
}

/// Which variables the stored samples are indexed by.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// `x` (1D) or `(t, x)` (2D).
    Physical,
    /// `xi` (1D) or `(tau, xi)` (2D).
    Frequency,
    /// 2D only: time samples by spatial frequency, `(t, xi)`.
    Mixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dims {
    One,
    Two,
}

/// Samples of a function on a grid. 2D values are row-major with the time
/// (or `tau`) index as the row and `x` (or `xi`) as the column.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: Grid,
    dims: Dims,
    side: Side,
    values: Vec<C64>,
}

impl SpectralField {
    pub fn zeros(grid: Grid, dims: Dims, side: Side) -> Self {
        let len = match dims {
            Dims::One => grid.n_x,
            Dims::Two => grid.n_x * grid.n_t,
        };
        SpectralField {
            grid,
            dims,
            side,
            values: vec![C64::new(0.0, 0.0); len],
        }
    }

    pub fn from_values(grid: Grid, dims: Dims, side: Side, values: Vec<C64>) -> Result<Self> {
        let want = match dims {
            Dims::One => grid.n_x,
            Dims::Two => {
                if !grid.has_time() {
                    return Err(LabError::Shape("2D field on a grid without time axis".into()));
                }
                grid.n_x * grid.n_t
            }
        };
        if values.len() != want {
            return Err(LabError::Shape(format!(
                "expected {want} values, got {}",
                values.len()
            )));
        }
        if dims == Dims::One && side == Side::Mixed {
            return Err(LabError::Shape("mixed side is 2D only".into()));
        }
        Ok(SpectralField {
            grid,
            dims,
            side,
            values,
        })
    }

    pub fn from_physical_fn(grid: Grid, f: impl Fn(f64) -> C64) -> Self {
        let values = (0..grid.n_x).map(|j| f(grid.x(j))).collect();
        SpectralField {
            grid,
            dims: Dims::One,
            side: Side::Physical,
            values,
        }
    }

    pub fn from_frequency_fn(grid: Grid, f: impl Fn(f64) -> C64) -> Self {
        let values = (0..grid.n_x).map(|k| f(grid.xi(k))).collect();
        SpectralField {
            grid,
            dims: Dims::One,
            side: Side::Frequency,
            values,
        }
    }

    /// 2D physical samples `f(t, x)`.
    pub fn from_spacetime_fn(grid: Grid, f: impl Fn(f64, f64) -> C64) -> Result<Self> {
        if !grid.has_time() {
            return Err(LabError::Shape("grid has no time axis".into()));
        }
        let mut values = Vec::with_capacity(grid.n_x * grid.n_t);
        for m in 0..grid.n_t {
            let t = grid.t(m);
            for j in 0..grid.n_x {
                values.push(f(t, grid.x(j)));
            }
        }
        Ok(SpectralField {
            grid,
            dims: Dims::Two,
            side: Side::Physical,
            values,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [C64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<C64> {
        self.values
    }

    pub fn rows(&self) -> usize {
        match self.dims {
            Dims::One => 1,
            Dims::Two => self.grid.n_t,
        }
    }

    pub fn row(&self, r: usize) -> &[C64] {
        let n = self.grid.n_x;
        &self.values[r * n..(r + 1) * n]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [C64] {
        let n = self.grid.n_x;
        &mut self.values[r * n..(r + 1) * n]
    }

    pub fn scaled(&self, c: C64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= c);
        out
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v = f(*v));
        out
    }

    pub fn ensure_compatible(&self, other: &SpectralField) -> Result<()> {
        if self.grid != other.grid {
            return Err(LabError::GridMismatch(format!(
                "{} vs {}",
                self.grid.fingerprint(),
                other.grid.fingerprint()
            )));
        }
        if self.dims != other.dims || self.side != other.side {
            return Err(LabError::Shape(format!(
                "{:?}/{:?} vs {:?}/{:?}",
                self.dims, self.side, other.dims, other.side
            )));
        }
        Ok(())
    }

    pub fn sub(&self, other: &SpectralField) -> Result<Self> {
        self.ensure_compatible(other)?;
        let mut out = self.clone();
        for (a, b) in out.values.iter_mut().zip(&other.values) {
            *a -= *b;
        }
        Ok(out)
    }

    pub fn add(&self, other: &SpectralField) -> Result<Self> {
        self.ensure_compatible(other)?;
        let mut out = self.clone();
        for (a, b) in out.values.iter_mut().zip(&other.values) {
            *a += *b;
        }
        Ok(out)
    }

    /// Frequency side of a 1D field (identity if already there). 2D
    /// physical or mixed fields go through [`spacetime_transform`].
    pub fn to_frequency(&self) -> Result<Self> {
        match (self.dims, self.side) {
            (_, Side::Frequency) => Ok(self.clone()),
            (Dims::One, Side::Physical) => {
                let mut values = self.values.clone();
                forward_x(&self.grid, &mut values);
                Ok(SpectralField {
                    grid: self.grid,
                    dims: Dims::One,
                    side: Side::Frequency,
                    values,
                })
            }
            (Dims::Two, _) => spacetime_transform(self),
            (Dims::One, Side::Mixed) => unreachable!("rejected at construction"),
        }
    }

    /// Physical side of a 1D field, or the `(t, x)` samples of a mixed 2D
    /// field. A windowed 2D frequency field has no inverse.
    pub fn to_physical(&self) -> Result<Self> {
        match (self.dims, self.side) {
            (_, Side::Physical) => Ok(self.clone()),
            (Dims::One, Side::Frequency) => {
                let mut values = self.values.clone();
                inverse_x(&self.grid, &mut values);
                Ok(SpectralField {
                    grid: self.grid,
                    dims: Dims::One,
                    side: Side::Physical,
                    values,
                })
            }
            (Dims::Two, Side::Mixed) => {
                let mut out = self.clone();
                for r in 0..out.rows() {
                    inverse_x(&self.grid, out.row_mut(r));
                }
                out.side = Side::Physical;
                Ok(out)
            }
            (Dims::Two, Side::Frequency) => Err(LabError::Shape(
                "windowed space-time spectrum cannot be inverted".into(),
            )),
            (Dims::One, Side::Mixed) => unreachable!("rejected at construction"),
        }
    }

    /// Transforms each time row of a 2D physical field in `x`.
    pub fn to_mixed(&self) -> Result<Self> {
        match (self.dims, self.side) {
            (Dims::Two, Side::Mixed) => Ok(self.clone()),
            (Dims::Two, Side::Physical) => {
                let mut out = self.clone();
                for r in 0..out.rows() {
                    forward_x(&self.grid, out.row_mut(r));
                }
                out.side = Side::Mixed;
                Ok(out)
            }
            _ => Err(LabError::Shape("to_mixed needs a 2D physical field".into())),
        }
    }
}

/// In-place unitary spatial transform of centered samples.
pub fn forward_x(grid: &Grid, buf: &mut [C64]) {
    let n = grid.n_x;
    debug_assert_eq!(buf.len(), n);
    buf.rotate_left(n / 2);
    fft_forward(n).process(buf);
    buf.rotate_left(n / 2);
    let scale = grid.dx() / (2.0 * PI).sqrt();
    buf.iter_mut().for_each(|v| *v *= scale);
}

/// Inverse of [`forward_x`].
pub fn inverse_x(grid: &Grid, buf: &mut [C64]) {
    let n = grid.n_x;
    debug_assert_eq!(buf.len(), n);
    buf.rotate_left(n / 2);
    fft_inverse(n).process(buf);
    buf.rotate_left(n / 2);
    let scale = grid.dxi() / (2.0 * PI).sqrt();
    buf.iter_mut().for_each(|v| *v *= scale);
}

/// Windowed space-time transform: spatial transform of every time row, then
/// along each frequency column multiplication by the plateau window and a
/// unitary Riemann-sum transform in `t`.
///
/// For `f = exp(i(kappa x + omega t))` with `(kappa, omega)` on the grid the
/// squared mass concentrates in the cell `(omega, kappa)`; the leakage is
/// the window's own spectral spread, `1 - (sum w)^2 / (n_t sum w^2)` of the
/// mass (about 4% for the default taper).
pub fn spacetime_transform(f: &SpectralField) -> Result<SpectralField> {
    if f.dims != Dims::Two {
        return Err(LabError::Shape("spacetime_transform needs a 2D field".into()));
    }
    let mixed = match f.side {
        Side::Physical => f.to_mixed()?,
        Side::Mixed => f.clone(),
        Side::Frequency => return Ok(f.clone()),
    };
    let g = f.grid;
    let (nx, nt) = (g.n_x, g.n_t);
    let w = window_samples(&g);
    let fft = fft_forward(nt);
    let scale = g.dt() / (2.0 * PI).sqrt();
    let mut out = vec![C64::new(0.0, 0.0); nx * nt];
    let mut col = vec![C64::new(0.0, 0.0); nt];
    for k in 0..nx {
        for m in 0..nt {
            col[m] = mixed.values[m * nx + k] * w[m];
        }
        fft.process(&mut col);
        // centered tau order
        col.rotate_left(nt / 2);
        for l in 0..nt {
            out[l * nx + k] = col[l] * scale;
        }
    }
    Ok(SpectralField {
        grid: g,
        dims: Dims::Two,
        side: Side::Frequency,
        values: out,
    })
}

/// Linear interpolation of a 1D frequency-side field at arbitrary `xi`;
/// zero outside the retained band.
pub fn interpolate(grid: &Grid, values: &[C64], xi: f64) -> C64 {
    let pos = xi / grid.dxi() + (grid.n_x / 2) as f64;
    if !(pos >= 0.0) || pos > (grid.n_x - 1) as f64 {
        return C64::new(0.0, 0.0);
    }
    let i = pos.floor() as usize;
    if i + 1 >= grid.n_x {
        return values[grid.n_x - 1];
    }
    let frac = pos - i as f64;
    values[i] * (1.0 - frac) + values[i + 1] * frac
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel_err(a: &[C64], b: &[C64]) -> f64 {
        let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
        let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
        (num / den).sqrt()
    }

    #[test]
    fn round_trip_1d() {
        let g = Grid::spatial(128, 30.0).unwrap();
        let f = SpectralField::from_physical_fn(g, |x| C64::new((-x * x).exp(), (x / 3.0).sin()));
        let back = f.to_frequency().unwrap().to_physical().unwrap();
        assert!(rel_err(back.values(), f.values()) < 1e-12);
    }

    #[test]
    fn single_mode_lands_on_its_cell() {
        let g = Grid::spatial(64, 2.0 * PI * 4.0).unwrap();
        let kappa = g.xi(40);
        let f = SpectralField::from_physical_fn(g, |x| C64::from_polar(1.0, kappa * x));
        let fh = f.to_frequency().unwrap();
        for (k, v) in fh.values().iter().enumerate() {
            if k == 40 {
                // (2 pi)^(-1/2) * L
                assert!((v.norm() - g.length / (2.0 * PI).sqrt()).abs() < 1e-10);
            } else {
                assert!(v.norm() < 1e-10);
            }
        }
    }

    #[test]
    fn plancherel_unit_constant() {
        let g = Grid::spatial(256, 40.0).unwrap();
        let f = SpectralField::from_physical_fn(g, |x| {
            C64::new((-x * x / 2.0).exp() * (2.0 * x).cos(), 0.3 * (-x * x).exp())
        });
        let phys: f64 = f.values().iter().map(|v| v.norm_sqr()).sum::<f64>() * g.dx();
        let fh = f.to_frequency().unwrap();
        let freq: f64 = fh.values().iter().map(|v| v.norm_sqr()).sum::<f64>() * g.dxi();
        assert!((phys - freq).abs() / phys < 1e-12);
    }

    #[test]
    fn zero_spacetime_field() {
        let g = Grid::with_window(16, 10.0, 2.0).unwrap();
        let z = SpectralField::zeros(g, Dims::Two, Side::Physical);
        let zh = spacetime_transform(&z).unwrap();
        assert!(zh.values().iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn interpolation_is_exact_on_nodes_and_linear_between() {
        let g = Grid::spatial(16, 2.0 * PI).unwrap();
        let vals: Vec<C64> = (0..16).map(|k| C64::new(k as f64, -(k as f64))).collect();
        assert_eq!(interpolate(&g, &vals, g.xi(3)), vals[3]);
        let mid = interpolate(&g, &vals, 0.5 * (g.xi(3) + g.xi(4)));
        assert!((mid - C64::new(3.5, -3.5)).norm() < 1e-12);
        assert_eq!(interpolate(&g, &vals, 100.0), C64::new(0.0, 0.0));
    }
}
