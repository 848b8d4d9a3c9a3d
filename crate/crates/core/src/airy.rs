//! Delta-resolved space-time spectra of products of free Airy solutions.
//!
//! For `u = exp(-t d^3) u0`, `v = exp(-t d^3) v0` the full transform of the
//! product is supported on the surface `tau = xi1^3 + xi2^3`. Resolving the
//! delta in `xi1` gives
//!
//! ```text
//! F(uv)(xi, tau) = (3 |xi| y)^-1 [ u0^((xi+y)/2) v0^((xi-y)/2) + swap ],
//! y = 2 sqrt(tau/(3 xi) - xi^2/12),
//! ```
//!
//! and for three factors, resolving in `xi2` at fixed `xi1`,
//!
//! ```text
//! F(uvw)(xi, tau) = (2 pi)^(-1/2) / 6  int dxi1  sum_pm
//!     u0^(xi1) v0^(a/2 pm y) w0^(a/2 mp y) / (|a| y),      a = xi - xi1,
//! y^2 = (xi + xi1)^2/4 + (tau - xi^3) / (3 a).
//! ```
//!
//! Constants follow the unitary convention of [`crate::grid`].

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::field::{interpolate, inverse_x, Dims, Side, SpectralField, C64};
use crate::grid::Grid;
use crate::multiplier::{airy_phase, bracket};
use crate::norms::{LpAccumulator, MixedParams};
use crate::quad::integrate_adaptive;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }

    pub const BOTH: [Branch; 2] = [Branch::Plus, Branch::Minus];
}

/// `y^2` of the two-factor resonance, `4 tau/(3 xi) - xi^2/3`.
pub fn pair_y_squared(xi: f64, tau: f64) -> f64 {
    4.0 * tau / (3.0 * xi) - xi * xi / 3.0
}

/// `tau` on the pair surface at resonance coordinate `y`.
pub fn pair_tau(xi: f64, y: f64) -> f64 {
    0.25 * xi * xi * xi + 0.75 * xi * y * y
}

/// `|d tau / d y|` along the pair surface.
pub fn pair_jacobian(xi: f64, y: f64) -> f64 {
    1.5 * xi.abs() * y.abs()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairBranch {
    pub xi: f64,
    pub tau: f64,
    pub y: f64,
    pub branch: Branch,
    pub admissible: bool,
}

impl PairBranch {
    pub fn new(xi: f64, tau: f64, branch: Branch, y_min: f64) -> Self {
        let y2 = pair_y_squared(xi, tau);
        let y = if y2 > 0.0 { y2.sqrt() } else { 0.0 };
        Self {
            xi,
            tau,
            y,
            branch,
            admissible: xi != 0.0 && y2 > 0.0 && y > y_min,
        }
    }

    /// `(xi1, xi2)` with `xi1 = (xi + branch y)/2`.
    pub fn zeros(&self) -> (f64, f64) {
        let x1 = 0.5 * (self.xi + self.branch.sign() * self.y);
        (x1, self.xi - x1)
    }

    /// `xi1^3 + xi2^3 - tau`, relative to `max(|tau|, |xi|^3)`.
    pub fn residual(&self) -> f64 {
        let (a, b) = self.zeros();
        let scale = self.tau.abs().max(self.xi.abs().powi(3)).max(f64::MIN_POSITIVE);
        (a * a * a + b * b * b - self.tau) / scale
    }

    /// `g'(xi1) = 3 xi (xi - 2 xi1)`, which equals `-branch 3 xi y`.
    pub fn derivative(&self) -> f64 {
        let (x1, _) = self.zeros();
        3.0 * self.xi * (self.xi - 2.0 * x1)
    }
}

/// `y^2` of the three-factor resonance at fixed `xi1`.
pub fn triple_y_squared(xi: f64, tau: f64, xi1: f64) -> f64 {
    let a = xi - xi1;
    (tau - xi1 * xi1 * xi1 - 0.25 * a * a * a) / (3.0 * a)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TripleBranch {
    pub xi: f64,
    pub tau: f64,
    pub xi1: f64,
    pub y: f64,
    pub branch: Branch,
    pub admissible: bool,
}

impl TripleBranch {
    pub fn new(xi: f64, tau: f64, xi1: f64, branch: Branch, y_min: f64) -> Self {
        let y2 = if xi == xi1 {
            f64::NAN
        } else {
            triple_y_squared(xi, tau, xi1)
        };
        let y = if y2 > 0.0 { y2.sqrt() } else { 0.0 };
        Self {
            xi,
            tau,
            xi1,
            y,
            branch,
            admissible: y2 > 0.0 && y > y_min,
        }
    }

    /// `(xi2, xi3)`.
    pub fn zeros(&self) -> (f64, f64) {
        let h = 0.5 * (self.xi - self.xi1);
        let d = self.branch.sign() * self.y;
        (h + d, h - d)
    }

    pub fn residual(&self) -> f64 {
        let (b, c) = self.zeros();
        let a = self.xi1;
        let scale = self
            .tau
            .abs()
            .max(a.abs().powi(3))
            .max(b.abs().powi(3))
            .max(c.abs().powi(3))
            .max(f64::MIN_POSITIVE);
        (a * a * a + b * b * b + c * c * c - self.tau) / scale
    }

    /// `|g'(xi2)| = 3 |xi2^2 - xi3^2|`, which equals `6 |xi - xi1| y`.
    pub fn derivative(&self) -> f64 {
        let (b, c) = self.zeros();
        3.0 * (b * b - c * c).abs()
    }
}

/// Evaluation of a delta-resolved spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSample {
    pub value: C64,
    /// Quadrature error plus the uncertainty of the excluded-set model.
    pub error: f64,
    /// Magnitude of the excluded-set contribution.
    pub excluded: f64,
    /// Set when part of the integral fell inside the singular cutoffs.
    pub singular: bool,
}

fn frequency_values(f: &SpectralField) -> Result<SpectralField> {
    if f.dims() != Dims::One {
        return Err(LabError::Shape("Airy product data must be 1D".into()));
    }
    match f.side() {
        Side::Frequency => Ok(f.clone()),
        _ => f.to_frequency(),
    }
}

/// Default singular-set cutoff `dxi / 4`.
pub fn default_cutoff(g: &Grid) -> f64 {
    0.25 * g.dxi()
}

/// Sum of both branch terms `u0^((xi+y)/2) v0^((xi-y)/2) + swap`.
pub fn pair_numerator(g: &Grid, u: &[C64], v: &[C64], xi: f64, y: f64) -> C64 {
    let (p, m) = (0.5 * (xi + y), 0.5 * (xi - y));
    interpolate(g, u, p) * interpolate(g, v, m) + interpolate(g, u, m) * interpolate(g, v, p)
}

/// `F(uv)(xi, tau)` for free Airy evolutions of `u0`, `v0`.
pub fn pair_spectrum(u0: &SpectralField, v0: &SpectralField, xi: f64, tau: f64) -> Result<SpectrumSample> {
    if xi == 0.0 || !xi.is_finite() || !tau.is_finite() {
        return Err(LabError::Domain(format!("pair spectrum at xi = {xi}, tau = {tau}")));
    }
    u0.ensure_compatible(v0)?;
    let u = frequency_values(u0)?;
    let v = frequency_values(v0)?;
    let g = *u.grid();
    let y_min = default_cutoff(&g);
    let b = PairBranch::new(xi, tau, Branch::Plus, y_min);
    let zero = SpectrumSample {
        value: C64::new(0.0, 0.0),
        error: 0.0,
        excluded: 0.0,
        singular: false,
    };
    if pair_y_squared(xi, tau) <= 0.0 {
        return Ok(zero);
    }
    let num = pair_numerator(&g, u.values(), v.values(), xi, b.y);
    Ok(SpectrumSample {
        value: num / (3.0 * xi.abs() * b.y),
        singular: !b.admissible,
        ..zero
    })
}

/// Bessel weights `<xi>^s` applied to the two factors before convolving.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PairWeights {
    pub s_u: f64,
    pub s_v: f64,
}

/// Values of a convolution on the grid `xi = xi_start + k dxi`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvolutionProfile {
    pub xi_start: f64,
    pub dxi: f64,
    pub values: Vec<f64>,
}

impl ConvolutionProfile {
    pub fn xi(&self, k: usize) -> f64 {
        self.xi_start + k as f64 * self.dxi
    }

    /// `(sum values^q' dxi)^(1/q')`.
    pub fn norm(&self, q_prime: f64) -> f64 {
        let mut acc = LpAccumulator::new(q_prime);
        self.values.iter().for_each(|&v| acc.push(v, self.dxi));
        acc.finish()
    }
}

/// `( |J^s_u u0^|^{p'} * |J^s_v v0^|^{p'} )^{1/p'}` on the full sum grid
/// `xi in [-2 xi_max, 2 xi_max - 2 dxi]`, by direct summation.
pub fn pair_norm_formula(
    u0: &SpectralField,
    v0: &SpectralField,
    p: &MixedParams,
    weights: &PairWeights,
) -> Result<ConvolutionProfile> {
    let pp = p.p_prime();
    if !pp.is_finite() || !p.p.is_finite() {
        return Err(LabError::Domain("pair_norm_formula needs finite p".into()));
    }
    u0.ensure_compatible(v0)?;
    let u = frequency_values(u0)?;
    let v = frequency_values(v0)?;
    let g = *u.grid();
    let n = g.n_x;
    let pw = |f: &SpectralField, s: f64| -> Vec<f64> {
        f.values()
            .iter()
            .enumerate()
            .map(|(k, z)| (bracket(g.xi(k)).powf(s) * z.norm()).powf(pp))
            .collect()
    };
    let a = pw(&u, weights.s_u);
    let b = pw(&v, weights.s_v);
    // index i + j of the output sits at xi_i + xi_j = (i + j - n) dxi
    let mut out = vec![0.0; 2 * n - 1];
    for (i, ai) in a.iter().enumerate() {
        if *ai == 0.0 {
            continue;
        }
        for (j, bj) in b.iter().enumerate() {
            out[i + j] += ai * bj;
        }
    }
    Ok(ConvolutionProfile {
        xi_start: -(n as f64) * g.dxi(),
        dxi: g.dxi(),
        values: out.into_iter().map(|s| (s * g.dxi()).powf(1.0 / pp)).collect(),
    })
}

/// Frequency regions of the trilinear analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    /// `|xi1| ~ |xi2| >> <xi3>`.
    I,
    /// `|xi2 - xi3| >= |xi2 + xi3|`.
    II,
    /// `1 <= |xi2 - xi3| <= |xi2 + xi3|`.
    III,
    None,
}

/// Quantifiers of region i: `|xi1|/|xi2| in [1/ratio, ratio]` and
/// `|xi2| >= gap <xi3>`. Regions are tested in the order i, ii, iii.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionRule {
    pub ratio: f64,
    pub gap: f64,
}

impl Default for RegionRule {
    fn default() -> Self {
        Self {
            ratio: 2.0,
            gap: 10.0,
        }
    }
}

impl RegionRule {
    pub fn classify(&self, xi1: f64, xi2: f64, xi3: f64) -> Region {
        let (a1, a2) = (xi1.abs(), xi2.abs());
        if a2 > 0.0 && a1 * self.ratio >= a2 && a1 <= self.ratio * a2 && a2 >= self.gap * bracket(xi3) {
            return Region::I;
        }
        let (d, s) = ((xi2 - xi3).abs(), (xi2 + xi3).abs());
        if d >= s {
            Region::II
        } else if d >= 1.0 {
            Region::III
        } else {
            Region::None
        }
    }
}

pub fn region_mask(xi1: f64, xi2: f64, xi3: f64) -> Region {
    RegionRule::default().classify(xi1, xi2, xi3)
}

/// Which frequency triples a trilinear quantity keeps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionMask {
    All,
    Only(Region),
    Except(Region),
}

impl RegionMask {
    pub fn keeps(&self, rule: &RegionRule, xi1: f64, xi2: f64, xi3: f64) -> bool {
        match self {
            RegionMask::All => true,
            RegionMask::Only(r) => rule.classify(xi1, xi2, xi3) == *r,
            RegionMask::Except(r) => rule.classify(xi1, xi2, xi3) != *r,
        }
    }
}

/// Tolerances of [`triple_spectrum`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TripleOptions {
    pub rule: RegionRule,
    /// Cutoff on `y`; `None` means `dxi / 4`.
    pub y_min: Option<f64>,
    /// Cutoff on `|xi - xi1|`; `None` means `dxi / 4`.
    pub eps_q: Option<f64>,
    pub rel_tol: f64,
    pub max_panels: usize,
}

impl Default for TripleOptions {
    fn default() -> Self {
        Self {
            rule: RegionRule::default(),
            y_min: None,
            eps_q: None,
            rel_tol: 1e-6,
            max_panels: 20_000,
        }
    }
}

/// `F(uvw)(xi, tau)` restricted to `mask`, with default options.
pub fn triple_spectrum(
    u0: &SpectralField,
    v0: &SpectralField,
    w0: &SpectralField,
    xi: f64,
    tau: f64,
    mask: RegionMask,
) -> Result<SpectrumSample> {
    triple_spectrum_with(u0, v0, w0, xi, tau, mask, &TripleOptions::default())
}

/// The `xi1` integral runs over `[-xi_max, xi_max]` minus the cutoff sets
/// `{y < y_min}` and `{|xi - xi1| < eps_q}`; the cut-out pieces are
/// evaluated separately by a local model and reported as `excluded`.
pub fn triple_spectrum_with(
    u0: &SpectralField,
    v0: &SpectralField,
    w0: &SpectralField,
    xi: f64,
    tau: f64,
    mask: RegionMask,
    opt: &TripleOptions,
) -> Result<SpectrumSample> {
    if !xi.is_finite() || !tau.is_finite() {
        return Err(LabError::Domain(format!("triple spectrum at xi = {xi}, tau = {tau}")));
    }
    u0.ensure_compatible(v0)?;
    u0.ensure_compatible(w0)?;
    let u = frequency_values(u0)?;
    let v = frequency_values(v0)?;
    let w = frequency_values(w0)?;
    let g = *u.grid();
    let y_min = opt.y_min.unwrap_or_else(|| default_cutoff(&g));
    let eps = opt.eps_q.unwrap_or_else(|| default_cutoff(&g));
    let (uv, vv, wv) = (u.values(), v.values(), w.values());
    let rule = opt.rule;

    let kernel = |x1: f64| -> C64 {
        let a = xi - x1;
        let y2 = triple_y_squared(xi, tau, x1);
        if !(y2 > 0.0) {
            return C64::new(0.0, 0.0);
        }
        let y = y2.sqrt();
        let ux = interpolate(&g, uv, x1);
        if ux == C64::new(0.0, 0.0) {
            return ux;
        }
        let mut acc = C64::new(0.0, 0.0);
        for br in Branch::BOTH {
            let x2 = 0.5 * a + br.sign() * y;
            let x3 = 0.5 * a - br.sign() * y;
            if mask.keeps(&rule, x1, x2, x3) {
                acc += interpolate(&g, vv, x2) * interpolate(&g, wv, x3);
            }
        }
        ux * acc / (a.abs() * y)
    };

    let lo = -g.xi_max();
    let hi = g.xi_max();
    // y^2 = N(xi1) / (3 a) and y^2 - y_min^2 = (N - 3 a y_min^2) / (3 a) with
    // cubic numerators, so every sign change of either sits at a root of a
    // cubic or at the pole a = 0
    let num = |x1: f64| {
        let a = xi - x1;
        tau - x1 * x1 * x1 - 0.25 * a * a * a
    };
    let num_cut = |x1: f64| num(x1) - 3.0 * (xi - x1) * y_min * y_min;
    let samples = 8 * g.n_x;
    let mut roots = cubic_roots(&num, lo, hi, samples);
    let folds = roots.clone();
    roots.extend(cubic_roots(&num_cut, lo, hi, samples));
    for b in [xi - eps, xi, xi + eps] {
        if b > lo && b < hi {
            roots.push(b);
        }
    }
    roots.push(lo);
    roots.push(hi);
    roots.sort_by(f64::total_cmp);
    roots.dedup();
    let is_singular_end = |x: f64| x == xi || folds.contains(&x);

    let mut total = C64::new(0.0, 0.0);
    let mut err = 0.0;
    let mut correction = C64::new(0.0, 0.0);
    let mut corr_err = 0.0;
    let mut singular = false;
    let scale = uv.iter().map(|z| z.norm()).fold(0.0, f64::max)
        * vv.iter().map(|z| z.norm()).fold(0.0, f64::max)
        * wv.iter().map(|z| z.norm()).fold(0.0, f64::max);
    for win in roots.windows(2) {
        let (p, q) = (win[0], win[1]);
        if q <= p {
            continue;
        }
        let m = 0.5 * (p + q);
        let y2 = triple_y_squared(xi, tau, m);
        if !(y2 > 0.0) {
            continue;
        }
        if (xi - m).abs() >= eps && y2 > y_min * y_min {
            let (val, qe) =
                integrate_adaptive(&kernel, p, q, 1e-15 * scale.max(1e-300), opt.rel_tol, opt.max_panels)?;
            total += val;
            err += qe;
        } else {
            // excluded: local model with the inverse square-root behaviour
            // at folds and at the pole absorbed by a quadratic substitution
            let (sp, sq) = (is_singular_end(p), is_singular_end(q));
            let fine = excluded_mass(&kernel, p, q, sp, sq, 16);
            let coarse = excluded_mass(&kernel, p, q, sp, sq, 8);
            correction += fine;
            corr_err += (fine - coarse).norm();
            singular = true;
        }
    }
    let c = 1.0 / (6.0 * (2.0 * PI).sqrt());
    Ok(SpectrumSample {
        value: (total + correction) * c,
        error: (err + corr_err) * c,
        excluded: correction.norm() * c,
        singular,
    })
}

/// Gauss-Legendre estimate of `int_p^q f` after `x = p + (q-p) h(s)`, where
/// `h'` vanishes to first order at every singular end.
fn excluded_mass(f: &impl Fn(f64) -> C64, p: f64, q: f64, sing_p: bool, sing_q: bool, n: usize) -> C64 {
    let (nodes, weights) = crate::quad::gauss_legendre(n);
    let map = |s: f64| -> (f64, f64) {
        match (sing_p, sing_q) {
            (false, false) => (s, 1.0),
            (true, false) => (s * s, 2.0 * s),
            (false, true) => (1.0 - (1.0 - s) * (1.0 - s), 2.0 * (1.0 - s)),
            (true, true) => (s * s * (3.0 - 2.0 * s), 6.0 * s * (1.0 - s)),
        }
    };
    let mut acc = C64::new(0.0, 0.0);
    for (x, w) in nodes.iter().zip(&weights) {
        let s = 0.5 * (x + 1.0);
        let (h, dh) = map(s);
        acc += f(p + (q - p) * h) * (0.5 * w * dh * (q - p));
    }
    acc
}

/// Simple roots of `f` on `[lo, hi]` located by sign changes on `samples`
/// cells and refined by bisection.
fn cubic_roots(f: &impl Fn(f64) -> f64, lo: f64, hi: f64, samples: usize) -> Vec<f64> {
    let h = (hi - lo) / samples as f64;
    let mut out = Vec::new();
    let mut a = lo;
    let mut fa = f(a);
    for k in 1..=samples {
        let b = if k == samples { hi } else { lo + k as f64 * h };
        let fb = f(b);
        if fb == 0.0 {
            out.push(b);
        } else if fa != 0.0 && (fa > 0.0) != (fb > 0.0) {
            out.push(bisect(f, a, b));
        }
        a = b;
        fa = fb;
    }
    out
}

fn bisect(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let fa_pos = f(a) > 0.0;
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m == a || m == b {
            break;
        }
        if (f(m) > 0.0) == fa_pos {
            a = m;
        } else {
            b = m;
        }
    }
    if fa_pos {
        a
    } else {
        b
    }
}

/// Lebesgue measure of `{xi1 in range : 2^j <= y(xi1) < 2^(j+1)}` for the
/// three-factor resonance coordinate, by midpoint sampling.
pub fn dyadic_measure_probe(xi: f64, tau: f64, j: i32, range: (f64, f64), samples: usize) -> f64 {
    let (lo, hi) = (2f64.powi(j), 2f64.powi(j + 1));
    let h = (range.1 - range.0) / samples as f64;
    let mut count = 0usize;
    for k in 0..samples {
        let x1 = range.0 + (k as f64 + 0.5) * h;
        let y2 = triple_y_squared(xi, tau, x1);
        if y2 > 0.0 {
            let y = y2.sqrt();
            if y >= lo && y < hi {
                count += 1;
            }
        }
    }
    count as f64 * h
}

/// Measure of `{xi1 in range : y(xi1) real and positive}`, same sampling.
pub fn admissible_measure(xi: f64, tau: f64, range: (f64, f64), samples: usize) -> f64 {
    let h = (range.1 - range.0) / samples as f64;
    (0..samples)
        .filter(|k| triple_y_squared(xi, tau, range.0 + (*k as f64 + 0.5) * h) > 0.0)
        .count() as f64
        * h
}

/// Space-time samples `prod_i (exp(-t d^3) f_i)(x)` on the time axis of the
/// factors' grid, ready for [`crate::field::spacetime_transform`].
pub fn free_product_samples(factors: &[&SpectralField]) -> Result<SpectralField> {
    let first = factors
        .first()
        .ok_or_else(|| LabError::Shape("no factors".into()))?;
    let g = *first.grid();
    if !g.has_time() {
        return Err(LabError::Shape("factors need a grid with a time axis".into()));
    }
    let freq = factors
        .iter()
        .map(|f| {
            first.grid().same_space(f.grid()).then_some(()).ok_or_else(|| {
                LabError::GridMismatch(format!("{} vs {}", g.fingerprint(), f.grid().fingerprint()))
            })?;
            frequency_values(f)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = SpectralField::zeros(g, Dims::Two, Side::Physical);
    let mut row = vec![C64::new(0.0, 0.0); g.n_x];
    for m in 0..g.n_t {
        let t = g.t(m);
        let dst = out.row_mut(m);
        dst.iter_mut().for_each(|v| *v = C64::new(1.0, 0.0));
        for f in &freq {
            for (k, (r, z)) in row.iter_mut().zip(f.values()).enumerate() {
                *r = z * airy_phase(g.xi(k), t);
            }
            inverse_x(&g, &mut row);
            dst.iter_mut().zip(&row).for_each(|(d, r)| *d *= r);
        }
    }
    Ok(out)
}

/// `3 (xi1 + xi2)(xi2 + xi3)(xi3 + xi1)`, so that
/// `sigma_0 - sigma_1 - sigma_2 - sigma_3 = -resonance(xi1, xi2, xi3)`
/// with `sigma_i = tau_i - xi_i^3`, `xi = sum xi_i`, `tau = sum tau_i`.
pub fn resonance(xi1: f64, xi2: f64, xi3: f64) -> f64 {
    3.0 * (xi1 + xi2) * (xi2 + xi3) * (xi3 + xi1)
}
