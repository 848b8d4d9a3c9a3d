use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::picard::{picard_solve, SolveVerdict};
use super::SolverConfig;
use crate::error::{LabError, Result};
use crate::field::{Dims, Side, SpectralField};
use crate::grid::Grid;
use crate::norms::{fl_norm, lifespan_exponent, FLParams};

/// Relative resolution of the bisection for the largest converging delta.
pub const DELTA_RESOLUTION: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LifespanPoint {
    pub lambda: f64,
    pub norm: f64,
    pub delta_star: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LifespanReport {
    pub points: Vec<LifespanPoint>,
    /// Least-squares slope of `log delta*` against `log ||u0||`.
    pub slope: f64,
    pub predicted: f64,
    /// False when `delta*` fails to decrease as the norm grows.
    pub monotone: bool,
}

/// `lambda u0(lambda x)` on the grid of period `L / lambda`: the same
/// frequency samples on dilated wavenumbers, so the scaled problem is the
/// original one in rescaled variables.
pub fn dilate(u0: &SpectralField, lambda: f64) -> Result<SpectralField> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(LabError::Domain(format!("scale must be positive, got {lambda}")));
    }
    let f = u0.to_frequency()?;
    if f.dims() != Dims::One {
        return Err(LabError::Shape("dilation needs 1D data".into()));
    }
    let g = f.grid();
    let grid = Grid::spatial(g.n_x, g.length / lambda)?;
    SpectralField::from_values(grid, Dims::One, Side::Frequency, f.values().to_vec())
}

fn converges(u0: &SpectralField, cfg: &SolverConfig, delta: f64) -> Result<bool> {
    let c = SolverConfig {
        delta,
        t_window: None,
        ..cfg.clone()
    };
    Ok(picard_solve(u0, &c)?.verdict == SolveVerdict::Converged)
}

/// Largest converging `delta` to `DELTA_RESOLUTION`, starting from `start`.
fn delta_star(u0: &SpectralField, cfg: &SolverConfig, start: f64) -> Result<f64> {
    let (mut lo, mut hi);
    if converges(u0, cfg, start)? {
        lo = start;
        hi = 2.0 * start;
        let mut k = 0;
        while converges(u0, cfg, hi)? {
            lo = hi;
            hi *= 2.0;
            k += 1;
            if k > 40 {
                return Err(LabError::Numerical("no divergence found while doubling delta".into()));
            }
        }
    } else {
        hi = start;
        lo = 0.5 * start;
        let mut k = 0;
        while !converges(u0, cfg, lo)? {
            hi = lo;
            lo *= 0.5;
            k += 1;
            if k > 40 {
                return Err(LabError::Numerical("no converging delta found while halving".into()));
            }
        }
    }
    while hi / lo > 1.0 + DELTA_RESOLUTION {
        let mid = (lo * hi).sqrt();
        if converges(u0, cfg, mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// For each `lambda` the largest `delta` for which the iteration on the
/// dilated data converges, and the fitted exponent of `delta*` in the
/// `H^r_s` norm of the data.
pub fn lifespan_experiment(u0: &SpectralField, lambdas: &[f64], cfg: &SolverConfig) -> Result<LifespanReport> {
    cfg.validate()?;
    if lambdas.len() < 2 {
        return Err(LabError::Domain("need at least two scales".into()));
    }
    let fl = FLParams::new(cfg.params.r, cfg.params.s)?;
    let data: Vec<(f64, SpectralField, f64)> = lambdas
        .iter()
        .map(|&l| {
            let d = dilate(u0, l)?;
            let n = fl_norm(&d, &fl)?;
            Ok((l, d, n))
        })
        .collect::<Result<_>>()?;
    let norms: Vec<f64> = data.iter().map(|d| d.2).collect();
    let (nmin, nmax) = norms.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &n| (a.min(n), b.max(n)));
    if !(nmax >= 10.0 * nmin) {
        return Err(LabError::Domain(format!(
            "scales span norms {nmin:.3e}..{nmax:.3e}, less than a decade"
        )));
    }
    let points: Vec<LifespanPoint> = data
        .par_iter()
        .map(|(l, d, n)| {
            Ok(LifespanPoint {
                lambda: *l,
                norm: *n,
                delta_star: delta_star(d, cfg, cfg.delta)?,
            })
        })
        .collect::<Result<_>>()?;
    let mut sorted = points.clone();
    sorted.sort_by(|a, b| a.norm.total_cmp(&b.norm));
    let monotone = sorted.windows(2).all(|w| w[1].delta_star <= w[0].delta_star);
    let xs: Vec<f64> = points.iter().map(|p| p.norm.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.delta_star.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    Ok(LifespanReport {
        points,
        slope: sxy / sxx,
        predicted: lifespan_exponent(cfg.params.r)?,
        monotone,
    })
}
