//! Both sides of every estimate on every family member and refinement.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::airy::RegionRule;
use crate::error::{LabError, Result};
use crate::field::{fft_inverse, C64};
use crate::grid::Grid;
use crate::multilinear::TrilinearMask;
use crate::multiplier::{bracket, riesz};
use crate::norms::{conjugate, LpAccumulator};
use crate::quad::integrate_adaptive;

use super::family::{MemberField, Role, TestFamily};
use super::pushforward::{pair_pushforward, triple_pushforward, Lattice, TauHistogram};
use super::spec::{EstimateId, EstimateSpec, Exponents};

/// Largest acceptable growth of the maximal ratio between refinements.
pub const GROWTH_LIMIT: f64 = 1.2;
/// Samples whose right-hand side falls below this are dropped.
pub const RHS_FLOOR: f64 = 1e-14;
/// Grid sizes of the default refinement series.
pub const DEFAULT_SIZES: [usize; 3] = [64, 128, 256];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub member: usize,
    pub grid_n: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Refinement {
    pub grid_n: usize,
    pub max_ratio: f64,
    /// Member attaining the maximum.
    pub argmax: usize,
    pub retained: usize,
    pub dropped: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub id: EstimateId,
    pub exponents: Exponents,
    pub family: TestFamily,
    pub samples: Vec<Sample>,
    pub refinements: Vec<Refinement>,
    /// `max_ratio[k + 1] / max_ratio[k]`.
    pub growth: Vec<f64>,
    pub verdict: Verdict,
    /// Set for the linear estimate at `r <= 4/3`, where it is known to fail.
    pub below_threshold: bool,
}

impl EstimateReport {
    pub fn max_growth(&self) -> f64 {
        self.growth.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Grids with `n` in [`DEFAULT_SIZES`] and spacing `2 band / n`, so every
/// refinement resolves the same band `[-band, band]`.
pub fn default_refinements(id: EstimateId) -> Vec<Grid> {
    refinements_for_band(id.default_band(), &DEFAULT_SIZES)
}

pub fn refinements_for_band(band: f64, sizes: &[usize]) -> Vec<Grid> {
    sizes
        .iter()
        .map(|&n| Grid::spatial(n, n as f64 * PI / band).expect("valid spatial grid"))
        .collect()
}

/// Gaussian modulation profile `a(sigma) = exp(-(sigma - mean)^2 / (2 var))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Modulation {
    pub mean: f64,
    pub var: f64,
}

impl Modulation {
    pub fn eval(&self, sigma: f64) -> f64 {
        (-(sigma - self.mean).powi(2) / (2.0 * self.var)).exp()
    }

    /// `|| <sigma>^b a ||_{L^p}`.
    pub fn norm(&self, p: f64, b: f64) -> Result<f64> {
        let sd = self.var.sqrt();
        let (lo, hi) = (self.mean - 14.0 * sd, self.mean + 14.0 * sd);
        if p.is_infinite() {
            let mut best = 0.0f64;
            for i in 0..=4000 {
                let s = lo + (hi - lo) * i as f64 / 4000.0;
                best = best.max(bracket(s).powf(b) * self.eval(s));
            }
            return Ok(best);
        }
        let (v, _) = integrate_adaptive(
            |s: f64| (bracket(s).powf(b) * self.eval(s)).powf(p),
            lo,
            hi,
            0.0,
            1e-10,
            2000,
        )?;
        Ok(v.powf(1.0 / p))
    }
}

/// Gaussian modulations for `k` factors of member `m`; widths in
/// `[band^3 / 32, band^3 / 8]`, means within one width of zero.
pub fn modulations(family: &TestFamily, m: usize, k: usize, band: f64) -> Vec<Modulation> {
    let mut rng = ChaCha8Rng::seed_from_u64(family.seed ^ 0x6d6f_6475_6c61_7465);
    rng.set_stream(m as u64 + 1);
    let b3 = band.powi(3);
    (0..k)
        .map(|_| {
            let w = rng.gen_range(b3 / 32.0..b3 / 8.0);
            Modulation {
                mean: rng.gen_range(-w..w),
                var: w * w,
            }
        })
        .collect()
}

/// Tau-convolution of a product histogram with the modulations:
/// `F = (2 pi)^-1/2 sqrt(prod v_i / V) exp(-(l - M)^2 / (2 V)) * H`.
fn modulate(h: &TauHistogram, mods: &[Modulation]) -> Result<TauHistogram> {
    let var: f64 = mods.iter().map(|m| m.var).sum();
    let mean: f64 = mods.iter().map(|m| m.mean).sum();
    let amp = (mods.iter().map(|m| m.var).product::<f64>() / var).sqrt() / (2.0 * PI).sqrt();
    h.convolve_gaussian(mean, var, amp)
}

/// Midpoint lattice `xi_i = (i - n/2 + 1/2) dxi` of the grid.
pub fn lattice(grid: &Grid, f: &MemberField) -> Lattice {
    let n = grid.n_x;
    Lattice::from_fn(n, grid.dxi(), 0.5 - (n / 2) as f64, |xi| f.eval(xi))
}

fn roles(id: EstimateId) -> Vec<Role> {
    match id {
        EstimateId::Lemma1 | EstimateId::CorB1 | EstimateId::CorB2_204 => vec![Role::FREE, Role::FREE],
        EstimateId::Fs20 => vec![Role::FREE],
        EstimateId::Lemma2 | EstimateId::CorT1c => {
            vec![
                Role { scale: 1.3, ..Role::FREE },
                Role { scale: 1.3, ..Role::FREE },
                Role::at_origin(0.25),
            ]
        }
        EstimateId::Lemma3 | EstimateId::CorT2c => {
            vec![Role::FREE, Role::FREE.signed(1.0).holed(0.05), Role::FREE.signed(-1.0).holed(0.05)]
        }
        EstimateId::Lemma4 | EstimateId::CorT3c => {
            vec![Role::FREE, Role::FREE.signed(1.0).holed(0.05), Role::FREE.signed(1.0).holed(0.05)]
        }
        EstimateId::Theorem2 => vec![Role::FREE, Role::FREE, Role::FREE],
    }
}

fn mask_weight(mask: TrilinearMask) -> impl Fn(f64, f64, f64) -> f64 + Sync {
    let rule = RegionRule::default();
    move |a, b, c| if mask.contains(&rule, a, b, c) { 1.0 } else { 0.0 }
}

/// `(lhs, rhs)` of one member on one grid.
pub fn evaluate(id: EstimateId, e: &Exponents, fields: &[MemberField], mods: &[Modulation], grid: &Grid) -> Result<(f64, f64)> {
    let lat: Vec<Lattice> = fields.iter().map(|f| lattice(grid, f)).collect();
    let band = grid.xi_max();
    let h = band.powi(3) / 128.0;
    let lp = |i: usize, p: f64, w: &dyn Fn(f64) -> f64| lat[i].norm(p, w);
    let one = |_: f64| 1.0;
    match id {
        EstimateId::Lemma1 | EstimateId::CorB1 => {
            let a = 1.0 / e.p;
            let hist = pair_pushforward(&lat[0], &lat[1], h, |x1, x2| riesz(x1 - x2, a))?;
            let hist = if id == EstimateId::CorB1 { modulate(&hist, mods)? } else { hist };
            let lhs = hist.mixed_norm(conjugate(e.q), conjugate(e.p), |xi, _| riesz(xi, a));
            let (r1p, r2p) = (conjugate(e.r1), conjugate(e.r2));
            let mut rhs = lp(0, r1p, &one) * lp(1, r2p, &one);
            if id == EstimateId::CorB1 {
                rhs *= mods[0].norm(r1p, e.b1)? * mods[1].norm(r2p, e.b2)?;
            }
            Ok((lhs, rhs))
        }
        EstimateId::CorB2_204 => {
            // I_+^{1/rho'}(I^{1/rho'} u2, u1): first slot u2 (field 1), second u1 (field 0)
            let a = 1.0 / conjugate(e.rho);
            let hist = pair_pushforward(&lat[1], &lat[0], h, |x1, x2| riesz(x1, a) * riesz(x1 + 2.0 * x2, a))?;
            let hist = modulate(&hist, &[mods[1], mods[0]])?;
            let rp = conjugate(e.r);
            let lhs = hist.norm(rp, |xi, tau| bracket(tau - xi.powi(3)).powf(e.beta));
            let rhs = lp(0, e.rho, &one) * mods[0].norm(e.rho, -e.beta)? * lp(1, rp, &one) * mods[1].norm(rp, 0.0)?;
            Ok((lhs, rhs))
        }
        EstimateId::Fs20 => {
            let q = 3.0 * e.r;
            let lhs = airy_lq_norm(grid, &lat[0], q)?;
            let rhs = lp(0, conjugate(e.r), &|xi| riesz(xi, 1.0 / q));
            Ok((lhs, rhs))
        }
        EstimateId::Lemma2 | EstimateId::CorT1c => {
            let hist = triple_pushforward(&lat[0], &lat[1], &lat[2], h, mask_weight(TrilinearMask::T))?;
            let rp = conjugate(e.r);
            let br = |s: f64| move |xi: f64| bracket(xi).powf(s);
            let mut rhs = lp(0, rp, &br(e.s1)) * lp(1, rp, &br(e.s1)) * lp(2, rp, &br(e.s2));
            let hist = if id == EstimateId::CorT1c {
                for m in &mods[..3] {
                    rhs *= m.norm(rp, e.b)?;
                }
                modulate(&hist, mods)?
            } else {
                hist
            };
            Ok((hist.norm(rp, |_, _| 1.0), rhs))
        }
        EstimateId::Lemma3 => {
            let hist = triple_pushforward(&lat[0], &lat[1], &lat[2], h, mask_weight(TrilinearMask::TGe))?;
            let g = -1.0 / (2.0 * e.p);
            let p1p = conjugate(e.p1);
            let rhs = lp(0, conjugate(e.p0), &one) * lp(1, p1p, &|xi| riesz(xi, g)) * lp(2, p1p, &|xi| riesz(xi, g));
            Ok((hist.norm(conjugate(e.p), |_, _| 1.0), rhs))
        }
        EstimateId::CorT2c => {
            let hist = triple_pushforward(&lat[0], &lat[1], &lat[2], h, mask_weight(TrilinearMask::TGe))?;
            let hist = modulate(&hist, mods)?;
            let rp = conjugate(e.r);
            let mut rhs = lp(0, rp, &|xi| riesz(xi, -e.s0)) * lp(1, rp, &|xi| riesz(xi, -e.s1)) * lp(2, rp, &|xi| riesz(xi, -e.s1));
            for m in &mods[..3] {
                rhs *= m.norm(rp, e.b)?;
            }
            Ok((hist.norm(rp, |_, _| 1.0), rhs))
        }
        EstimateId::Lemma4 | EstimateId::CorT3c => {
            let hist = triple_pushforward(&lat[0], &lat[1], &lat[2], h, mask_weight(TrilinearMask::TLe))?;
            let rp = conjugate(e.r);
            let g = -1.0 / (2.0 * e.r);
            let rho_p = conjugate(e.rho);
            let mut rhs = lp(0, rho_p, &one) * lp(1, rp, &|xi| riesz(xi, g)) * lp(2, rp, &|xi| riesz(xi, g));
            let hist = if id == EstimateId::CorT3c {
                rhs *= mods[0].norm(rho_p, e.beta)? * mods[1].norm(rp, e.b)? * mods[2].norm(rp, e.b)?;
                modulate(&hist, mods)?
            } else {
                hist
            };
            Ok((hist.norm(rp, |_, _| 1.0), rhs))
        }
        EstimateId::Theorem2 => {
            let hist = triple_pushforward(&lat[0], &lat[1], &lat[2], h, |_, _, _| 1.0)?;
            let hist = modulate(&hist, mods)?;
            let rp = conjugate(e.r);
            let lhs = hist.norm(rp, |xi, tau| {
                bracket(tau - xi.powi(3)).powf(e.b_prime) * bracket(xi).powf(e.s) * xi.abs()
            });
            let mut rhs = 1.0;
            for i in 0..3 {
                rhs *= lp(i, rp, &|xi| bracket(xi).powf(e.s)) * mods[i].norm(rp, e.b)?;
            }
            Ok((lhs, rhs))
        }
    }
}

/// `|| exp(-t d^3) u0 ||_{L^q}` over the period `2 pi / dxi` in `x` and
/// `|t| <= T`, where `T` lets the fastest group velocity `3 (0.9 band)^2`
/// cross half the period. Four-fold oversampling in `x`; `dt = pi / (4 band^3)`.
pub fn airy_lq_norm(grid: &Grid, u0: &Lattice, q: f64) -> Result<f64> {
    if !q.is_finite() {
        return Err(LabError::Domain("the linear estimate needs finite 3r".into()));
    }
    let n = u0.len();
    let band = grid.xi_max();
    let length = 2.0 * PI / u0.dxi;
    let t_max = length / (6.0 * (0.9 * band).powi(2));
    let dt = PI / (4.0 * band.powi(3));
    let steps = (2.0 * t_max / dt).ceil() as usize;
    let dt = 2.0 * t_max / steps as f64;
    let m = 4 * n.next_power_of_two();
    let dx = length / m as f64;
    let inv = fft_inverse(m);
    let c = u0.dxi / (2.0 * PI).sqrt();
    let rows: Vec<f64> = (0..steps)
        .into_par_iter()
        .map(|k| {
            let t = -t_max + (k as f64 + 0.5) * dt;
            let mut buf = vec![C64::new(0.0, 0.0); m];
            for (i, z) in u0.values.iter().enumerate() {
                let xi = u0.xi(i);
                buf[i] = z * C64::from_polar(c, t * xi.powi(3));
            }
            inv.process(&mut buf);
            let mut acc = LpAccumulator::new(q);
            buf.iter().for_each(|z| acc.push(z.norm(), dx * dt));
            acc.finish().powf(q)
        })
        .collect();
    Ok(rows.iter().sum::<f64>().powf(1.0 / q))
}

/// Evaluates both sides on every member and refinement.
pub fn probe(spec: &EstimateSpec, family: &TestFamily, refinements: &[Grid]) -> Result<EstimateReport> {
    let e = spec.resolved()?;
    family.validate()?;
    if refinements.is_empty() {
        return Err(LabError::Domain("probe needs at least one grid".into()));
    }
    let band = refinements[0].xi_max();
    for w in refinements.windows(2) {
        if (w[1].xi_max() - band).abs() > 1e-9 * band || w[1].n_x <= w[0].n_x {
            return Err(LabError::Domain(
                "refinements must share the band and increase in size".into(),
            ));
        }
    }
    let id = spec.id;
    let roles = roles(id);
    let members: Vec<(Vec<MemberField>, Vec<Modulation>)> = (0..family.count)
        .map(|m| (family.member(band, &roles, m), modulations(family, m, roles.len(), band)))
        .collect();
    let mut samples = Vec::new();
    let mut summary = Vec::new();
    for grid in refinements {
        let evals: Vec<Result<(f64, f64)>> = members
            .par_iter()
            .map(|(f, m)| evaluate(id, &e, f, m, grid))
            .collect();
        let mut best = (f64::NEG_INFINITY, 0usize);
        let (mut kept, mut dropped) = (0, 0);
        for (member, r) in evals.into_iter().enumerate() {
            let (lhs, rhs) = r?;
            if !(rhs >= RHS_FLOOR) {
                dropped += 1;
                continue;
            }
            let ratio = lhs / rhs;
            if !ratio.is_finite() {
                return Err(LabError::Numerical(format!("{id}: ratio {ratio} for member {member}")));
            }
            kept += 1;
            if ratio > best.0 {
                best = (ratio, member);
            }
            samples.push(Sample {
                member,
                grid_n: grid.n_x,
                lhs,
                rhs,
                ratio,
            });
        }
        if kept == 0 {
            return Err(LabError::Numerical(format!("{id}: every sample degenerate on n = {}", grid.n_x)));
        }
        summary.push(Refinement {
            grid_n: grid.n_x,
            max_ratio: best.0,
            argmax: best.1,
            retained: kept,
            dropped,
        });
    }
    let growth: Vec<f64> = summary.windows(2).map(|w| w[1].max_ratio / w[0].max_ratio).collect();
    let verdict = if growth.iter().all(|g| *g < GROWTH_LIMIT) { Verdict::Pass } else { Verdict::Fail };
    Ok(EstimateReport {
        id,
        exponents: e,
        family: family.clone(),
        samples,
        refinements: summary,
        growth,
        verdict,
        below_threshold: id == EstimateId::Fs20 && e.r <= 4.0 / 3.0,
    })
}
