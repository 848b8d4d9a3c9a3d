//! Numerical probes of multilinear estimates under grid refinement.

pub mod exponents;
pub mod family;
pub mod probe;
pub mod pushforward;
pub mod resonant;
pub mod spec;

pub use exponents::{lemma3_witness, t2c_exponents, validate_lemma3_params, BundleSource, Lemma3Verdict, T2cBundle};
pub use family::{FamilyKind, Role, TestFamily};
pub use probe::{default_refinements, probe, EstimateReport, Refinement, Sample, Verdict};
pub use resonant::{resonant_integral, resonant_slope, resonant_sup, sigma_gain_check, sigma_gain_sweep, ModulatedTriple};
pub use spec::{EstimateId, EstimateSpec, Exponents};
