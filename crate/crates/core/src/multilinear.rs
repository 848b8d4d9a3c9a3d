//! Weighted bilinear convolutions `I^s_-`, `I^s_+`, their adjoint pair and
//! the region-masked trilinear operators.
//!
//! All operators act on frequency-side amplitudes by truncated (band
//! limited, non-periodic) convolution. Sums carry the factors
//! `(2 pi)^(-1/2) dxi` per bilinear and `(2 pi)^(-1) dxi^2` per trilinear
//! convolution (one extra `(2 pi)^(-1/2) dtau` per joint `tau` sum), so with
//! all weights equal to one they reproduce the transform of the pointwise
//! product. The unpaired mode `-n/2` (and `-n_t/2` in `tau`) is treated as
//! zero throughout: it has no mirror image under `xi -> -xi`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::airy::{Region, RegionRule};
use crate::error::{LabError, Result};
use crate::field::{spacetime_transform, Dims, Side, SpectralField, C64};
use crate::multiplier::riesz;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightKind {
    /// `|xi1 - xi2|^s`.
    Minus,
    /// `|xi + xi2|^s = |xi1 + 2 xi2|^s`.
    Plus,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BilinearWeight {
    pub kind: WeightKind,
    pub order: f64,
}

impl BilinearWeight {
    pub fn minus(order: f64) -> Self {
        Self {
            kind: WeightKind::Minus,
            order,
        }
    }

    pub fn plus(order: f64) -> Self {
        Self {
            kind: WeightKind::Plus,
            order,
        }
    }

    /// Weight at `(xi1, xi2)`; a vanishing base gives zero for `s != 0`.
    #[inline]
    pub fn eval(&self, xi1: f64, xi2: f64) -> f64 {
        match self.kind {
            WeightKind::Minus => riesz(xi1 - xi2, self.order),
            WeightKind::Plus => riesz(xi1 + 2.0 * xi2, self.order),
        }
    }
}

/// Frequency restriction of a trilinear operator. Each mask is the printed
/// inequality taken literally, so `TGe` and `TLe` share the boundary
/// `1 <= |xi2 - xi3| = |xi2 + xi3|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrilinearMask {
    /// Region i.
    T,
    /// `|xi2 - xi3| >= |xi2 + xi3|`.
    TGe,
    /// `1 <= |xi2 - xi3| <= |xi2 + xi3|`.
    TLe,
    Unmasked,
}

impl TrilinearMask {
    pub fn contains(&self, rule: &RegionRule, xi1: f64, xi2: f64, xi3: f64) -> bool {
        let (d, s) = ((xi2 - xi3).abs(), (xi2 + xi3).abs());
        match self {
            TrilinearMask::T => rule.classify(xi1, xi2, xi3) == Region::I,
            TrilinearMask::TGe => d >= s,
            TrilinearMask::TLe => d >= 1.0 && d <= s,
            TrilinearMask::Unmasked => true,
        }
    }

    /// The classifier region this mask corresponds to.
    pub fn region(&self) -> Option<Region> {
        match self {
            TrilinearMask::T => Some(Region::I),
            TrilinearMask::TGe => Some(Region::II),
            TrilinearMask::TLe => Some(Region::III),
            TrilinearMask::Unmasked => None,
        }
    }
}

fn frequency(f: &SpectralField) -> Result<SpectralField> {
    match (f.dims(), f.side()) {
        (Dims::One, Side::Frequency) | (Dims::Two, Side::Frequency) | (Dims::Two, Side::Mixed) => {
            Ok(f.clone())
        }
        (Dims::One, _) => f.to_frequency(),
        (Dims::Two, Side::Physical) => f.to_mixed(),
    }
}

/// Centered index of `-xi` for index `k`, or `None` for the unpaired mode.
#[inline]
pub fn mirror(n: usize, k: usize) -> Option<usize> {
    (k != 0).then(|| n - k)
}

/// Truncated 1D weighted convolution of frequency rows into `out`.
///
/// Terms of each output mode are summed in pairs from both ends of the
/// `xi1` range, so swapping `a` and `b` under a symmetric weight gives a
/// bitwise identical result.
fn convolve_row(n: usize, dxi: f64, a: &[C64], b: &[C64], w: &BilinearWeight, out: &mut [C64]) {
    let h = n as i64 / 2;
    let c = dxi / (2.0 * PI).sqrt();
    let xi = |k: i64| (k - h) as f64 * dxi;
    let term = |i: i64, j: i64| a[i as usize] * b[j as usize] * w.eval(xi(i), xi(j));
    for k in 1..n as i64 {
        // i + j = k + h with 1 <= i, j < n
        let lo = (k + h - n as i64 + 1).max(1);
        let hi = (k + h - 1).min(n as i64 - 1);
        if lo > hi {
            continue;
        }
        let mut acc = C64::new(0.0, 0.0);
        let (mut p, mut q) = (lo, hi);
        while p < q {
            acc += term(p, k + h - p) + term(q, k + h - q);
            p += 1;
            q -= 1;
        }
        if p == q {
            acc += term(p, k + h - p);
        }
        out[k as usize] += acc * c;
    }
}

fn bilinear(f: &SpectralField, g: &SpectralField, w: &BilinearWeight) -> Result<SpectralField> {
    if !w.order.is_finite() {
        return Err(LabError::Domain(format!("weight order {}", w.order)));
    }
    let f = frequency(f)?;
    let g = frequency(g)?;
    f.ensure_compatible(&g)?;
    let grid = *f.grid();
    let n = grid.n_x;
    match (f.dims(), f.side()) {
        (Dims::One, _) => {
            let mut out = SpectralField::zeros(grid, Dims::One, Side::Frequency);
            convolve_row(n, grid.dxi(), f.values(), g.values(), w, out.values_mut());
            Ok(out)
        }
        (Dims::Two, Side::Mixed) => {
            // product in t, convolution in xi, then the windowed t transform
            let mut out = SpectralField::zeros(grid, Dims::Two, Side::Mixed);
            for m in 0..grid.n_t {
                let mut row = vec![C64::new(0.0, 0.0); n];
                convolve_row(n, grid.dxi(), f.row(m), g.row(m), w, &mut row);
                out.row_mut(m).copy_from_slice(&row);
            }
            spacetime_transform(&out)
        }
        (Dims::Two, _) => {
            // joint (xi, tau) convolution
            let nt = grid.n_t;
            let ht = nt as i64 / 2;
            let ct = grid.dtau() / (2.0 * PI).sqrt();
            let mut out = SpectralField::zeros(grid, Dims::Two, Side::Frequency);
            let mut row = vec![C64::new(0.0, 0.0); n];
            for l1 in 1..nt {
                for l2 in 1..nt {
                    let l = l1 as i64 + l2 as i64 - ht;
                    if l < 1 || l >= nt as i64 {
                        continue;
                    }
                    row.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
                    convolve_row(n, grid.dxi(), f.row(l1), g.row(l2), w, &mut row);
                    for (o, r) in out.row_mut(l as usize).iter_mut().zip(&row) {
                        *o += r * ct;
                    }
                }
            }
            Ok(out)
        }
    }
}

/// `F I^s_-(f, g)(xi) = c sum_{xi1 + xi2 = xi} |xi1 - xi2|^s f^(xi1) g^(xi2)`.
///
/// 1D inputs convolve in `xi`; 2D frequency inputs convolve jointly in
/// `(xi, tau)`; 2D physical or mixed inputs are combined per time sample and
/// then transformed in `t`.
pub fn i_minus(f: &SpectralField, g: &SpectralField, s: f64) -> Result<SpectralField> {
    bilinear(f, g, &BilinearWeight::minus(s))
}

/// `F I^s_+(f, g)(xi) = c sum_{xi1 + xi2 = xi} |xi + xi2|^s f^(xi1) g^(xi2)`.
pub fn i_plus(f: &SpectralField, g: &SpectralField, s: f64) -> Result<SpectralField> {
    bilinear(f, g, &BilinearWeight::plus(s))
}

/// Frequency-side field of the complex conjugate:
/// `F(conj u)(xi, tau) = conj(F u(-xi, -tau))`, unpaired modes set to zero.
pub fn conjugate_flip(u: &SpectralField) -> Result<SpectralField> {
    let u = frequency(u)?;
    let g = *u.grid();
    let n = g.n_x;
    let mut out = SpectralField::zeros(g, u.dims(), u.side());
    let rows = u.rows();
    for r in 0..rows {
        // tau is reversed on the frequency side only; a mixed field keeps t
        let src_row = match (u.dims(), u.side()) {
            (Dims::Two, Side::Frequency) => mirror(rows, r),
            _ => Some(r),
        };
        let Some(sr) = src_row else { continue };
        let src = u.row(sr).to_vec();
        let dst = out.row_mut(r);
        for k in 0..n {
            if let Some(mk) = mirror(n, k) {
                dst[k] = src[mk].conj();
            }
        }
    }
    Ok(out)
}

/// `<a, b> = sum a conj(b)` times the cell measure.
pub fn inner(a: &SpectralField, b: &SpectralField) -> Result<C64> {
    a.ensure_compatible(b)?;
    let g = a.grid();
    let cell = match a.dims() {
        Dims::One => g.dxi(),
        Dims::Two => g.dxi() * g.dtau(),
    };
    Ok(a.values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| x * y.conj())
        .sum::<C64>()
        * cell)
}

fn l2(a: &SpectralField) -> Result<f64> {
    Ok(inner(a, a)?.re.max(0.0).sqrt())
}

/// `|<M_u v, w> - <v, N_u w>|` relative to `||u|| ||v|| ||w||`, with
/// `M_u v = I^s_-(u, v)` and `N_u w = I^s_+(w, conj u)`.
pub fn adjoint_defect(u: &SpectralField, v: &SpectralField, w: &SpectralField, s: f64) -> Result<f64> {
    let (u, v, w) = (frequency(u)?, frequency(v)?, frequency(w)?);
    if u.side() == Side::Mixed {
        return Err(LabError::Shape("adjoint_defect needs frequency-side fields".into()));
    }
    let mv = i_minus(&u, &v, s)?;
    let nw = i_plus(&w, &conjugate_flip(&u)?, s)?;
    let lhs = inner(&mv, &w)?;
    let rhs = inner(&v, &nw)?;
    let scale = l2(&u)? * l2(&v)? * l2(&w)?;
    if scale == 0.0 {
        return Ok(0.0);
    }
    Ok((lhs - rhs).norm() / scale)
}

fn trilinear_row(
    n: usize,
    dxi: f64,
    a: &[C64],
    b: &[C64],
    c: &[C64],
    keep: &impl Fn(f64, f64, f64) -> bool,
    out: &mut [C64],
) {
    let h = n as i64 / 2;
    let scale = dxi * dxi / (2.0 * PI);
    let xi = |k: i64| (k - h) as f64 * dxi;
    for i in 1..n as i64 {
        let ai = a[i as usize];
        if ai == C64::new(0.0, 0.0) {
            continue;
        }
        for j in 1..n as i64 {
            let bj = b[j as usize];
            if bj == C64::new(0.0, 0.0) {
                continue;
            }
            let ab = ai * bj * scale;
            for l in 1..n as i64 {
                let k = i + j + l - 2 * h;
                if k < 1 || k >= n as i64 {
                    continue;
                }
                if keep(xi(i), xi(j), xi(l)) {
                    out[k as usize] += ab * c[l as usize];
                }
            }
        }
    }
}

/// Masked triple convolution with the default region quantifiers.
pub fn trilinear_apply(
    f: &SpectralField,
    g: &SpectralField,
    h: &SpectralField,
    mask: TrilinearMask,
) -> Result<SpectralField> {
    let rule = RegionRule::default();
    trilinear_where(f, g, h, |a, b, c| mask.contains(&rule, a, b, c))
}

/// Contribution of the boundary `1 <= |xi2 - xi3| = |xi2 + xi3|` that both
/// `TGe` and `TLe` keep.
pub fn trilinear_shared_boundary(f: &SpectralField, g: &SpectralField, h: &SpectralField) -> Result<SpectralField> {
    trilinear_where(f, g, h, |_, b, c| {
        let (d, s) = ((b - c).abs(), (b + c).abs());
        d >= 1.0 && d == s
    })
}

/// Triple convolution restricted by an arbitrary predicate on
/// `(xi1, xi2, xi3)`. 2D inputs are combined per time sample and the result
/// is transformed in `t`.
pub fn trilinear_where(
    f: &SpectralField,
    g: &SpectralField,
    h: &SpectralField,
    keep: impl Fn(f64, f64, f64) -> bool,
) -> Result<SpectralField> {
    let (f, g, h) = (frequency(f)?, frequency(g)?, frequency(h)?);
    f.ensure_compatible(&g)?;
    f.ensure_compatible(&h)?;
    let grid = *f.grid();
    let n = grid.n_x;
    match (f.dims(), f.side()) {
        (Dims::One, _) => {
            let mut out = SpectralField::zeros(grid, Dims::One, Side::Frequency);
            trilinear_row(n, grid.dxi(), f.values(), g.values(), h.values(), &keep, out.values_mut());
            Ok(out)
        }
        (Dims::Two, Side::Mixed) => {
            let mut out = SpectralField::zeros(grid, Dims::Two, Side::Mixed);
            for m in 0..grid.n_t {
                let mut row = vec![C64::new(0.0, 0.0); n];
                trilinear_row(n, grid.dxi(), f.row(m), g.row(m), h.row(m), &keep, &mut row);
                out.row_mut(m).copy_from_slice(&row);
            }
            spacetime_transform(&out)
        }
        (Dims::Two, _) => Err(LabError::Shape(
            "trilinear_apply needs 1D fields or 2D fields with a time axis in t".into(),
        )),
    }
}
