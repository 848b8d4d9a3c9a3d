//! Spectral laboratory for the modified KdV equation in Fourier-Lebesgue
//! spaces: grids and transforms, restriction norms, delta-resolved spectra
//! of products of Airy solutions, multilinear operators, an estimate probing
//! harness and a Picard contraction solver.

pub mod airy;
pub mod error;
pub mod estimate;
pub mod field;
pub mod grid;
pub mod multilinear;
pub mod multiplier;
pub mod norms;
pub mod quad;
pub mod solver;

pub use error::{LabError, Result};
pub use field::{Dims, Side, SpectralField, C64};
pub use grid::Grid;
pub use multiplier::{airy_propagate, apply_multiplier, MultiplierKind, MultiplierSpec};
pub use norms::{FLParams, MixedParams, XsbParams};
