//! Shared inputs for the benchmarks.

use airy_lab::{Grid, SpectralField, C64};

/// `exp(-(xi - c)^2 / (2 w^2))` sampled in frequency.
pub fn packet(grid: Grid, c: f64, w: f64) -> SpectralField {
    SpectralField::from_frequency_fn(grid, |xi| C64::new((-(xi - c).powi(2) / (2.0 * w * w)).exp(), 0.0))
}

/// `a exp(-x^2)` sampled in space.
pub fn bump(grid: Grid, a: f64) -> SpectralField {
    SpectralField::from_physical_fn(grid, |x| C64::new(a * (-x * x).exp(), 0.0))
}
