//! Lattice evaluation of delta-resolved product spectra.
//!
//! For free Airy solutions the space-time transform of a product is the
//! pushforward of the frequency-side product measure under the phase
//! `tau = sum xi_i^3`. On a lattice `xi_i = (i + offset) dxi` every term of
//! the truncated convolution sum is spread over the `tau` range its lattice
//! cell covers and accumulated into bins of width `h`:
//!
//! ```text
//! pair:    F(uv)(xi, tau)  =            int  u^(xi1) v^(xi2) delta(tau - xi1^3 - xi2^3) dxi1
//! triple:  F(uvw)(xi, tau) = (2 pi)^-1/2 int int u^ v^ w^ delta(tau - xi1^3 - xi2^3 - xi3^3)
//! ```

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{LabError, Result};
use crate::field::{fft_forward, fft_inverse, C64};
use crate::norms::LpAccumulator;

/// Samples of a continuum spectrum at `xi_i = (i + offset) dxi`.
#[derive(Debug, Clone, PartialEq)]
pub struct Lattice {
    pub dxi: f64,
    pub offset: f64,
    pub values: Vec<C64>,
}

impl Lattice {
    pub fn from_fn(n: usize, dxi: f64, offset: f64, f: impl Fn(f64) -> C64) -> Self {
        let values = (0..n).map(|i| f((i as f64 + offset) * dxi)).collect();
        Lattice { dxi, offset, values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn xi(&self, i: usize) -> f64 {
        (i as f64 + self.offset) * self.dxi
    }

    /// `|| weight(xi) f ||_{L^p}` by the lattice sum.
    pub fn norm(&self, p: f64, weight: impl Fn(f64) -> f64) -> f64 {
        let mut acc = LpAccumulator::new(p);
        for (i, z) in self.values.iter().enumerate() {
            acc.push(weight(self.xi(i)) * z.norm(), self.dxi);
        }
        acc.finish()
    }

    /// Index range holding every nonzero sample.
    fn support(&self) -> Option<(usize, usize)> {
        let lo = self.values.iter().position(|z| *z != C64::new(0.0, 0.0))?;
        let hi = self.values.iter().rposition(|z| *z != C64::new(0.0, 0.0))?;
        Some((lo, hi))
    }

    fn max_abs_xi(&self) -> f64 {
        match self.support() {
            Some((lo, hi)) => self.xi(lo).abs().max(self.xi(hi).abs()),
            None => 0.0,
        }
    }

    fn compatible(&self, other: &Lattice) -> Result<()> {
        if self.dxi != other.dxi || self.offset != other.offset || self.len() != other.len() {
            return Err(LabError::Shape("lattices differ in spacing, offset or length".into()));
        }
        Ok(())
    }
}

/// Bin masses `mass[k * n_tau + m]` of a spectrum at `xi_k = (k + xi_offset) dxi`
/// over `tau in [tau0 + m h, tau0 + (m + 1) h)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TauHistogram {
    pub dxi: f64,
    pub xi_offset: f64,
    pub n_xi: usize,
    pub tau0: f64,
    pub h: f64,
    pub n_tau: usize,
    pub mass: Vec<C64>,
}

impl TauHistogram {
    pub fn xi(&self, k: usize) -> f64 {
        (k as f64 + self.xi_offset) * self.dxi
    }

    /// Bin center.
    pub fn tau(&self, m: usize) -> f64 {
        self.tau0 + (m as f64 + 0.5) * self.h
    }

    pub fn density(&self, k: usize, m: usize) -> C64 {
        self.mass[k * self.n_tau + m] / self.h
    }

    pub fn total(&self) -> C64 {
        self.mass.iter().sum()
    }

    /// `|| weight(xi, tau) F ||_{L^p_{xi tau}}` on the bin grid.
    pub fn norm(&self, p: f64, weight: impl Fn(f64, f64) -> f64) -> f64 {
        let mut acc = LpAccumulator::new(p);
        for k in 0..self.n_xi {
            let xi = self.xi(k);
            for m in 0..self.n_tau {
                let d = self.density(k, m);
                if d.norm() > 0.0 {
                    acc.push(weight(xi, self.tau(m)) * d.norm(), self.dxi * self.h);
                }
            }
        }
        acc.finish()
    }

    /// `|| || weight F ||_{L^inner_tau} ||_{L^outer_xi}`.
    pub fn mixed_norm(&self, outer: f64, inner: f64, weight: impl Fn(f64, f64) -> f64) -> f64 {
        let mut acc = LpAccumulator::new(outer);
        for k in 0..self.n_xi {
            let xi = self.xi(k);
            let mut row = LpAccumulator::new(inner);
            for m in 0..self.n_tau {
                let d = self.density(k, m);
                if d.norm() > 0.0 {
                    row.push(weight(xi, self.tau(m)) * d.norm(), self.h);
                }
            }
            acc.push(row.finish(), self.dxi);
        }
        acc.finish()
    }

    /// Convolution in `tau` with `amp exp(-(lambda - mean)^2 / (2 var))`,
    /// by FFT on a padded copy of every row.
    pub fn convolve_gaussian(&self, mean: f64, var: f64, amp: f64) -> Result<TauHistogram> {
        if !(var > 0.0) {
            return Err(LabError::Domain(format!("gaussian variance must be positive, got {var}")));
        }
        let half = (7.0 * var.sqrt() / self.h).ceil() as usize + 1;
        let shift = (mean / self.h).round();
        let n_tau = self.n_tau + 2 * half;
        let len = (n_tau + 2 * half).next_power_of_two();
        // tap j sits at lag j h - resid; negative taps wrap cyclically
        let mut kernel = vec![C64::new(0.0, 0.0); len];
        let resid = mean - shift * self.h;
        for j in -(2 * half as i64)..=(2 * half as i64) {
            let lam = j as f64 * self.h;
            let w = amp * (-(lam - resid).powi(2) / (2.0 * var)).exp();
            kernel[j.rem_euclid(len as i64) as usize] = C64::new(w, 0.0);
        }
        let fwd = fft_forward(len);
        let inv = fft_inverse(len);
        fwd.process(&mut kernel);
        let scale = 1.0 / len as f64;
        let mut mass = vec![C64::new(0.0, 0.0); self.n_xi * n_tau];
        for k in 0..self.n_xi {
            let src = &self.mass[k * self.n_tau..(k + 1) * self.n_tau];
            if src.iter().all(|z| z.norm() == 0.0) {
                continue;
            }
            let mut buf = vec![C64::new(0.0, 0.0); len];
            buf[half..half + self.n_tau].copy_from_slice(src);
            fwd.process(&mut buf);
            buf.iter_mut().zip(&kernel).for_each(|(b, q)| *b *= q * scale);
            inv.process(&mut buf);
            // mass in bin m' = h * sum_m mass_m A(tau_m' - tau_m)
            mass[k * n_tau..(k + 1) * n_tau].iter_mut().zip(&buf[..n_tau]).for_each(|(d, s)| *d = s * self.h);
        }
        Ok(TauHistogram {
            dxi: self.dxi,
            xi_offset: self.xi_offset,
            n_xi: self.n_xi,
            tau0: self.tau0 - half as f64 * self.h + shift * self.h,
            h: self.h,
            n_tau,
            mass,
        })
    }
}

/// Accumulator for one output row: deposits of a box of mass `m` spread
/// uniformly over `[a, b]` become two linear-interpolation impulses whose
/// running sum is the bin mass.
struct RowDeposit {
    tau0: f64,
    h: f64,
    s: Vec<C64>,
}

impl RowDeposit {
    fn new(tau0: f64, h: f64, n_tau: usize) -> Self {
        RowDeposit {
            tau0,
            h,
            s: vec![C64::new(0.0, 0.0); n_tau + 2],
        }
    }

    fn impulse(&mut self, x: f64, w: C64) {
        let u = (x - self.tau0) / self.h;
        let j = u.floor();
        let f = u - j;
        let j = j as usize;
        self.s[j] += w * (1.0 - f);
        self.s[j + 1] += w * f;
    }

    fn add(&mut self, center: f64, width: f64, m: C64) {
        if width < 1e-9 * self.h {
            let j = ((center - self.tau0) / self.h).floor() as usize;
            self.s[j] += m;
            self.s[j + 1] -= m;
            return;
        }
        let c = m * (self.h / width);
        self.impulse(center - 0.5 * width, c);
        self.impulse(center + 0.5 * width, -c);
    }

    fn finish(mut self, n_tau: usize) -> Vec<C64> {
        let mut run = C64::new(0.0, 0.0);
        for z in self.s.iter_mut() {
            run += *z;
            *z = run;
        }
        self.s.truncate(n_tau);
        self.s
    }
}

fn tau_frame(bound: f64, h: f64) -> Result<(f64, usize)> {
    if !(h > 0.0) || !bound.is_finite() {
        return Err(LabError::Domain(format!("bin width must be positive, got {h}")));
    }
    let pad = 2.0 * h;
    let tau0 = (-(bound + pad) / h).floor() * h;
    let n_tau = ((bound + pad - tau0) / h).ceil() as usize + 1;
    Ok((tau0, n_tau))
}

/// Pushforward of `weight(xi1, xi2) u^(xi1) v^(xi2) dxi1` onto `(xi, tau)`.
/// Each lattice term covers `3 |xi1^2 - xi2^2| dxi` in `tau`.
pub fn pair_pushforward(
    u: &Lattice,
    v: &Lattice,
    h: f64,
    weight: impl Fn(f64, f64) -> f64 + Sync,
) -> Result<TauHistogram> {
    u.compatible(v)?;
    let n = u.len();
    let x = u.max_abs_xi().max(v.max_abs_xi());
    let (tau0, n_tau) = tau_frame(2.0 * x.powi(3) + 3.0 * x * x * u.dxi, h)?;
    let n_out = 2 * n - 1;
    let (Some(su), Some(sv)) = (u.support(), v.support()) else {
        return Ok(empty(u, 2.0, n_out, tau0, h, n_tau));
    };
    let dxi = u.dxi;
    let rows: Vec<Vec<C64>> = (0..n_out)
        .into_par_iter()
        .map(|k| {
            let mut row = RowDeposit::new(tau0, h, n_tau);
            let lo = su.0.max((k as i64 - sv.1 as i64).max(0) as usize);
            let hi = su.1.min(k.saturating_sub(sv.0));
            if k < sv.0 || lo > hi {
                return vec![C64::new(0.0, 0.0); n_tau];
            }
            for i in lo..=hi {
                let j = k - i;
                let (x1, x2) = (u.xi(i), v.xi(j));
                let w = weight(x1, x2);
                if w == 0.0 {
                    continue;
                }
                let m = u.values[i] * v.values[j] * (w * dxi);
                let phase = x1.powi(3) + x2.powi(3);
                row.add(phase, 3.0 * (x1 * x1 - x2 * x2).abs() * dxi, m);
            }
            row.finish(n_tau)
        })
        .collect();
    Ok(assemble(u, 2.0, tau0, h, n_tau, rows))
}

/// Pushforward of `(2 pi)^-1/2 weight(xi1, xi2, xi3) u^ v^ w^ dxi1 dxi2`.
/// Each lattice term covers a `tau` interval whose width matches the spread
/// of the phase over its cell, `sqrt(d1^2 + d2^2) dxi` with
/// `d_i = 3 (xi_i^2 - xi3^2)`.
pub fn triple_pushforward(
    u: &Lattice,
    v: &Lattice,
    w: &Lattice,
    h: f64,
    weight: impl Fn(f64, f64, f64) -> f64 + Sync,
) -> Result<TauHistogram> {
    u.compatible(v)?;
    u.compatible(w)?;
    let n = u.len();
    let x = u.max_abs_xi().max(v.max_abs_xi()).max(w.max_abs_xi());
    let (tau0, n_tau) = tau_frame(3.0 * x.powi(3) + 9.0 * x * x * u.dxi, h)?;
    let n_out = 3 * n - 2;
    let (Some(su), Some(sv), Some(sw)) = (u.support(), v.support(), w.support()) else {
        return Ok(empty(u, 3.0, n_out, tau0, h, n_tau));
    };
    let dxi = u.dxi;
    let scale = dxi * dxi / (2.0 * PI).sqrt();
    let rows: Vec<Vec<C64>> = (0..n_out)
        .into_par_iter()
        .map(|k| {
            let mut row = RowDeposit::new(tau0, h, n_tau);
            let k = k as i64;
            for i in su.0..=su.1 {
                let ui = u.values[i];
                if ui.norm() == 0.0 {
                    continue;
                }
                let x1 = u.xi(i);
                // l = k - i - j must lie in the support of w
                let rest = k - i as i64;
                let jlo = (sv.0 as i64).max(rest - sw.1 as i64);
                let jhi = (sv.1 as i64).min(rest - sw.0 as i64);
                for j in jlo..=jhi {
                    let l = (rest - j) as usize;
                    let j = j as usize;
                    let (x2, x3) = (v.xi(j), w.xi(l));
                    let wt = weight(x1, x2, x3);
                    if wt == 0.0 {
                        continue;
                    }
                    let m = ui * v.values[j] * w.values[l] * (wt * scale);
                    let phase = x1.powi(3) + x2.powi(3) + x3.powi(3);
                    let d1 = 3.0 * (x1 * x1 - x3 * x3);
                    let d2 = 3.0 * (x2 * x2 - x3 * x3);
                    row.add(phase, d1.hypot(d2) * dxi, m);
                }
            }
            row.finish(n_tau)
        })
        .collect();
    Ok(assemble(u, 3.0, tau0, h, n_tau, rows))
}

fn empty(u: &Lattice, factors: f64, n_out: usize, tau0: f64, h: f64, n_tau: usize) -> TauHistogram {
    TauHistogram {
        dxi: u.dxi,
        xi_offset: factors * u.offset,
        n_xi: n_out,
        tau0,
        h,
        n_tau,
        mass: vec![C64::new(0.0, 0.0); n_out * n_tau],
    }
}

fn assemble(u: &Lattice, factors: f64, tau0: f64, h: f64, n_tau: usize, rows: Vec<Vec<C64>>) -> TauHistogram {
    let n_xi = rows.len();
    TauHistogram {
        dxi: u.dxi,
        xi_offset: factors * u.offset,
        n_xi,
        tau0,
        h,
        n_tau,
        mass: rows.into_iter().flatten().collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_deposit_spreads_mass_uniformly() {
        let mut row = RowDeposit::new(0.0, 1.0, 10);
        row.add(4.0, 4.0, C64::new(8.0, 0.0));
        let m = row.finish(10);
        let want = [0.0, 0.0, 2.0, 2.0, 2.0, 2.0, 0.0, 0.0, 0.0, 0.0];
        for (a, b) in m.iter().zip(want) {
            assert!((a.re - b).abs() < 1e-14, "{m:?}");
        }
    }

    #[test]
    fn narrow_deposit_lands_in_one_bin() {
        let mut row = RowDeposit::new(0.0, 1.0, 6);
        row.add(2.25, 0.0, C64::new(1.0, 0.0));
        row.add(2.5, 0.5, C64::new(1.0, 0.0));
        let m = row.finish(6);
        assert!((m[2].re - 2.0).abs() < 1e-14 && m.iter().map(|z| z.re).sum::<f64>() - 2.0 < 1e-14);
    }
}
