//! Picard iteration on the Duhamel form of
//! `u_t + u_xxx + sign (u^3)_x = 0` on a periodic grid, with lifespan
//! experiments and conservation diagnostics.

pub mod lifespan;
pub mod picard;
pub mod trajectory;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::norms::{sr_threshold, XsbParams};

pub use lifespan::{dilate, lifespan_experiment, LifespanPoint, LifespanReport};
pub use picard::{
    conservation_check, duhamel_step, flowmap_lipschitz_probe, picard_solve, picard_solve_backward, ConservationReport,
    LipschitzRatio, SolveVerdict, SolverState,
};
pub use trajectory::{Trajectory, XWindow};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub params: XsbParams,
    /// Length of the existence interval.
    pub delta: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    /// Bound on successive differences relative to the free flow, in the
    /// windowed restriction norm.
    #[serde(default = "default_tol")]
    pub tol: f64,
    /// `+1` focusing, `-1` defocusing, `0` drops the nonlinearity.
    #[serde(default = "default_sign")]
    pub sign: f64,
    /// Panels of the coarsest time mesh; doubled until halving the step
    /// moves the solution by less than `tol / 10`.
    #[serde(default = "default_panels")]
    pub panels: usize,
    #[serde(default = "default_max_panels")]
    pub max_panels: usize,
    /// Defaults to `4 delta`.
    #[serde(default)]
    pub t_window: Option<f64>,
    /// Time samples of the measuring window.
    #[serde(default = "default_window_samples")]
    pub window_samples: usize,
}

fn default_max_iter() -> usize {
    60
}
fn default_tol() -> f64 {
    1e-10
}
fn default_sign() -> f64 {
    1.0
}
fn default_panels() -> usize {
    2
}
fn default_max_panels() -> usize {
    128
}
fn default_window_samples() -> usize {
    256
}

impl SolverConfig {
    pub fn new(params: XsbParams, delta: f64) -> Self {
        SolverConfig {
            params,
            delta,
            max_iter: default_max_iter(),
            tol: default_tol(),
            sign: default_sign(),
            panels: default_panels(),
            max_panels: default_max_panels(),
            t_window: None,
            window_samples: default_window_samples(),
        }
    }

    pub fn t_window(&self) -> f64 {
        self.t_window.unwrap_or(4.0 * self.delta)
    }

    /// Malformed settings are domain errors; exponents outside the range
    /// of the well-posedness statement are hypothesis errors.
    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(LabError::Domain(format!("delta must be positive, got {}", self.delta)));
        }
        if !(self.delta <= 0.5 * self.t_window()) {
            return Err(LabError::Domain(format!(
                "delta {} exceeds half the window {}",
                self.delta,
                self.t_window()
            )));
        }
        if ![-1.0, 0.0, 1.0].contains(&self.sign) {
            return Err(LabError::Domain(format!("sign must be -1, 0 or 1, got {}", self.sign)));
        }
        if !(self.tol > 0.0) || self.max_iter == 0 {
            return Err(LabError::Domain("tol > 0 and max_iter >= 1 required".into()));
        }
        if self.panels == 0 || self.max_panels < self.panels {
            return Err(LabError::Domain("need 1 <= panels <= max_panels".into()));
        }
        if self.window_samples < 16 || !self.window_samples.is_power_of_two() {
            return Err(LabError::Domain("window_samples must be a power of two >= 16".into()));
        }
        let XsbParams { r, s, b } = self.params;
        let mut bad = Vec::new();
        if !(r > 1.0 && r <= 2.0) {
            bad.push(format!("1 < r <= 2 (r = {r})"));
        } else {
            let sr = sr_threshold(r)?;
            if !(s >= sr - 1e-12) {
                bad.push(format!("s >= s(r) = {sr} (s = {s})"));
            }
        }
        if !(b > 1.0 / r) {
            bad.push(format!("b > 1/r (b = {b})"));
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(LabError::Hypothesis(bad))
        }
    }
}
