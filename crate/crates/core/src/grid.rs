//! Space-time discretization and the normalization conventions shared by
//! every other module.
//!
//! Spatial samples sit at `x_j = (j - n_x/2) dx` on the periodic box
//! `[-L/2, L/2)`; frequencies at `xi_k = (k - n_x/2) dxi` with
//! `dxi = 2 pi / L`. Both axes are stored in *centered* order, so index
//! `n_x/2` is the origin. The time axis samples `t_m = m dt` on `[0, T)`
//! and its dual `tau_l = (l - n_t/2) dtau` with `dtau = 2 pi / T`.
//!
//! All transforms are unitary Riemann sums:
//!
//! ```text
//! u^(xi)    = (2 pi)^(-1/2) dx  sum_j exp(-i x_j xi) u(x_j)
//! f^(tau)   = (2 pi)^(-1/2) dt  sum_m exp(-i t_m tau) w(t_m) f(t_m)
//! ```
//!
//! so Plancherel holds with constant one and every norm is a cell-measure
//! weighted sum that converges to its continuum integral.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Ratio bound `max|xi|^3 <= TAU_HEADROOM * max|tau|` enforced on grids with
/// a time axis.
pub const TAU_HEADROOM: f64 = 0.8;

/// Fraction of the window spent on each smooth taper.
pub const WINDOW_TAPER: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub n_x: usize,
    pub length: f64,
    /// Zero for purely spatial grids.
    #[serde(default)]
    pub n_t: usize,
    #[serde(default)]
    pub t_window: f64,
}

impl Grid {
    /// Space-time grid. Rejects grids whose time axis cannot represent the
    /// cubic dispersion curve over the retained modes.
    pub fn new(n_x: usize, length: f64, n_t: usize, t_window: f64) -> Result<Self> {
        let g = Grid {
            n_x,
            length,
            n_t,
            t_window,
        };
        g.validate()?;
        Ok(g)
    }

    /// Grid without a time axis, for data `u0` and for 1D operators.
    pub fn spatial(n_x: usize, length: f64) -> Result<Self> {
        Self::new(n_x, length, 0, 0.0)
    }

    /// Smallest power-of-two time axis for which the anti-aliasing
    /// constraint holds with the given window.
    pub fn with_window(n_x: usize, length: f64, t_window: f64) -> Result<Self> {
        let s = Self::spatial(n_x, length)?;
        if !(t_window > 0.0 && t_window.is_finite()) {
            return Err(LabError::InvalidGrid(format!(
                "time window must be positive, got {t_window}"
            )));
        }
        let need = s.xi_max().powi(3) / TAU_HEADROOM;
        // tau_max = pi n_t / T
        let mut n_t = 8usize;
        while std::f64::consts::PI * n_t as f64 / t_window < need {
            n_t *= 2;
            if n_t > 1 << 26 {
                return Err(LabError::InvalidGrid(
                    "time axis would exceed 2^26 samples".into(),
                ));
            }
        }
        Self::new(n_x, length, n_t, t_window)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_x < 4 || !self.n_x.is_power_of_two() {
            return Err(LabError::InvalidGrid(format!(
                "n_x must be a power of two >= 4, got {}",
                self.n_x
            )));
        }
        if !(self.length > 0.0 && self.length.is_finite()) {
            return Err(LabError::InvalidGrid(format!(
                "length must be positive, got {}",
                self.length
            )));
        }
        if self.n_t == 0 {
            return Ok(());
        }
        if self.n_t < 4 || !self.n_t.is_power_of_two() {
            return Err(LabError::InvalidGrid(format!(
                "n_t must be a power of two >= 4, got {}",
                self.n_t
            )));
        }
        if !(self.t_window > 0.0 && self.t_window.is_finite()) {
            return Err(LabError::InvalidGrid(format!(
                "time window must be positive, got {}",
                self.t_window
            )));
        }
        let cubic = self.xi_max().powi(3);
        if cubic > TAU_HEADROOM * self.tau_max() {
            return Err(LabError::InvalidGrid(format!(
                "tau range {:.4e} cannot hold max|xi|^3 = {:.4e} (needs headroom {})",
                self.tau_max(),
                cubic,
                TAU_HEADROOM
            )));
        }
        Ok(())
    }

    pub fn has_time(&self) -> bool {
        self.n_t > 0
    }

    pub fn dx(&self) -> f64 {
        self.length / self.n_x as f64
    }

    pub fn dxi(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.length
    }

    pub fn dt(&self) -> f64 {
        self.t_window / self.n_t as f64
    }

    pub fn dtau(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.t_window
    }

    /// `|xi|` of the most negative retained mode.
    pub fn xi_max(&self) -> f64 {
        (self.n_x / 2) as f64 * self.dxi()
    }

    pub fn tau_max(&self) -> f64 {
        (self.n_t / 2) as f64 * self.dtau()
    }

    pub fn x(&self, j: usize) -> f64 {
        (j as f64 - (self.n_x / 2) as f64) * self.dx()
    }

    pub fn xi(&self, k: usize) -> f64 {
        (k as f64 - (self.n_x / 2) as f64) * self.dxi()
    }

    pub fn t(&self, m: usize) -> f64 {
        m as f64 * self.dt()
    }

    pub fn tau(&self, l: usize) -> f64 {
        (l as f64 - (self.n_t / 2) as f64) * self.dtau()
    }

    /// Signed integer wavenumber of centered index `k`.
    pub fn wavenumber(&self, k: usize) -> i64 {
        k as i64 - (self.n_x / 2) as i64
    }

    /// Centered index of integer wavenumber `m`, if retained.
    pub fn index_of_wavenumber(&self, m: i64) -> Option<usize> {
        let k = m + (self.n_x / 2) as i64;
        (0..self.n_x as i64).contains(&k).then_some(k as usize)
    }

    pub fn xi_values(&self) -> Vec<f64> {
        (0..self.n_x).map(|k| self.xi(k)).collect()
    }

    /// Same box, different mode count (time axis dropped).
    pub fn refined(&self, n_x: usize) -> Result<Self> {
        Self::spatial(n_x, self.length)
    }

    /// Short identifier used in reports.
    pub fn fingerprint(&self) -> String {
        if self.has_time() {
            format!(
                "nx{}-L{}-nt{}-T{}",
                self.n_x, self.length, self.n_t, self.t_window
            )
        } else {
            format!("nx{}-L{}", self.n_x, self.length)
        }
    }

    pub fn same_space(&self, other: &Grid) -> bool {
        self.n_x == other.n_x && self.length == other.length
    }
}

/// Smooth plateau window on `[0, T]`: identically one on
/// `[eta T, (1 - eta) T]`, zero outside `(0, T)`, with the C-infinity taper
///
/// ```text
/// S(u) = 1 / (1 + exp(1/u - 1/(1 - u))),   0 < u < 1,
/// ```
///
/// on each edge, `u = t / (eta T)` rising and `u = (T - t) / (eta T)` falling.
pub fn window(t: f64, t_window: f64) -> f64 {
    if t <= 0.0 || t >= t_window {
        return 0.0;
    }
    let edge = WINDOW_TAPER * t_window;
    let u = if t < edge {
        t / edge
    } else if t > t_window - edge {
        (t_window - t) / edge
    } else {
        return 1.0;
    };
    if u >= 1.0 {
        return 1.0;
    }
    let z = 1.0 / u - 1.0 / (1.0 - u);
    if z > 700.0 {
        0.0
    } else {
        1.0 / (1.0 + z.exp())
    }
}

/// Window values on the sampling points of `grid`'s time axis.
pub fn window_samples(grid: &Grid) -> Vec<f64> {
    (0..grid.n_t)
        .map(|m| window(grid.t(m), grid.t_window))
        .collect()
}
