//! The resonant-set integral and the modulation gain factor.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::airy::resonance;
use crate::error::{LabError, Result};
use crate::multiplier::bracket;
use crate::quad::integrate_adaptive;

/// `xi2` range on the hexagon `|xi_i - xi_j| <= 1` with `xi3 = xi - xi1 - xi2`.
fn xi2_range(xi: f64, xi1: f64) -> Option<(f64, f64)> {
    let lo = (xi1 - 1.0).max(0.5 * (xi - xi1 - 1.0)).max(xi - 2.0 * xi1 - 1.0);
    let hi = (xi1 + 1.0).min(0.5 * (xi - xi1 + 1.0)).min(xi - 2.0 * xi1 + 1.0);
    (hi > lo).then_some((lo, hi))
}

fn comparable(xi: f64, x: f64) -> bool {
    let (a, b) = (x.abs(), xi.abs());
    a >= 0.25 * b && a <= 4.0 * b
}

/// Integrand on the hexagon, zero off the `|xi_i| ~ |xi|` set.
pub fn resonant_integrand(xi: f64, tau: f64, eps: f64, xi1: f64, xi2: f64) -> f64 {
    let xi3 = xi - xi1 - xi2;
    if !(comparable(xi, xi1) && comparable(xi, xi2) && comparable(xi, xi3)) {
        return 0.0;
    }
    if (xi1 - xi2).abs() > 1.0 || (xi2 - xi3).abs() > 1.0 || (xi1 - xi3).abs() > 1.0 {
        return 0.0;
    }
    let phase = xi1.powi(3) + xi2.powi(3) + xi3.powi(3);
    bracket(tau - phase).powf(-1.0 - eps)
}

/// `int int <tau - xi1^3 - xi2^3 - xi3^3>^{-1-eps} dxi1 dxi2` over
/// `|xi_i - xi_j| <= 1`, `|xi_i| ~ |xi|`. Zero for `|xi| <= 1`.
pub fn resonant_integral(xi: f64, tau: f64, eps: f64) -> Result<f64> {
    if !(eps > 0.0) || !xi.is_finite() || !tau.is_finite() {
        return Err(LabError::Domain(format!("resonant integral needs eps > 0, got {eps}")));
    }
    if xi.abs() <= 1.0 {
        return Ok(0.0);
    }
    let a = xi.abs();
    let cuts = [-4.0 * a, -0.25 * a, 0.25 * a, 4.0 * a];
    let mut failure = None;
    let inner = |xi1: f64| {
        let Some((lo, hi)) = xi2_range(xi, xi1) else {
            return 0.0;
        };
        // the indicator of |xi2|, |xi3| ~ |xi| jumps at these points
        let rest = xi - xi1;
        let mut br: Vec<f64> = cuts.iter().flat_map(|&c| [c, rest - c]).collect();
        match piecewise(|xi2: f64| resonant_integrand(xi, tau, eps, xi1, xi2), lo, hi, &mut br, 1e-15, 1e-10) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        }
    };
    let mut br = cuts.to_vec();
    br.extend([xi / 3.0 - 1.0 / 3.0, xi / 3.0 + 1.0 / 3.0]);
    let outer = piecewise(inner, xi / 3.0 - 2.0 / 3.0, xi / 3.0 + 2.0 / 3.0, &mut br, 1e-14, 1e-8)?;
    match failure {
        Some(e) => Err(e),
        None => Ok(outer),
    }
}

/// Adaptive integral over `[lo, hi]` split at the interior `breaks`.
fn piecewise(mut f: impl FnMut(f64) -> f64, lo: f64, hi: f64, breaks: &mut Vec<f64>, abs: f64, rel: f64) -> Result<f64> {
    breaks.retain(|&b| b > lo && b < hi);
    breaks.sort_by(f64::total_cmp);
    let mut pts = vec![lo];
    pts.extend(breaks.iter().copied());
    pts.push(hi);
    let mut total = 0.0;
    for w in pts.windows(2) {
        if w[1] > w[0] {
            total += integrate_adaptive(&mut f, w[0], w[1], abs, rel, 4000)?.0;
        }
    }
    Ok(total)
}

/// Range of `xi1^3 + xi2^3 + xi3^3` over the hexagon, by sampling.
fn phase_range(xi: f64) -> (f64, f64) {
    let m = 80;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..=m {
        let xi1 = xi / 3.0 - 2.0 / 3.0 + 4.0 / 3.0 * i as f64 / m as f64;
        let Some((a, b)) = xi2_range(xi, xi1) else { continue };
        for j in 0..=m {
            let xi2 = a + (b - a) * j as f64 / m as f64;
            let xi3 = xi - xi1 - xi2;
            let ph = xi1.powi(3) + xi2.powi(3) + xi3.powi(3);
            lo = lo.min(ph);
            hi = hi.max(ph);
        }
    }
    (lo, hi)
}

/// `(tau*, value)` maximizing the resonant integral over `tau`: a scan of
/// the phase range followed by golden-section refinement.
pub fn resonant_sup(xi: f64, eps: f64) -> Result<(f64, f64)> {
    if xi.abs() <= 1.0 {
        return Ok((0.0, 0.0));
    }
    let (lo, hi) = phase_range(xi);
    let (a, b) = (lo - 2.0, hi + 2.0);
    let m = 60;
    let step = (b - a) / m as f64;
    let mut best = (a, f64::NEG_INFINITY);
    for i in 0..=m {
        let t = a + step * i as f64;
        let v = resonant_integral(xi, t, eps)?;
        if v > best.1 {
            best = (t, v);
        }
    }
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut x0, mut x3) = (best.0 - step, best.0 + step);
    let mut x1 = x3 - g * (x3 - x0);
    let mut x2 = x0 + g * (x3 - x0);
    let mut f1 = resonant_integral(xi, x1, eps)?;
    let mut f2 = resonant_integral(xi, x2, eps)?;
    for _ in 0..30 {
        if f1 > f2 {
            x3 = x2;
            x2 = x1;
            f2 = f1;
            x1 = x3 - g * (x3 - x0);
            f1 = resonant_integral(xi, x1, eps)?;
        } else {
            x0 = x1;
            x1 = x2;
            f1 = f2;
            x2 = x0 + g * (x3 - x0);
            f2 = resonant_integral(xi, x2, eps)?;
        }
    }
    let (t, v) = if f1 > f2 { (x1, f1) } else { (x2, f2) };
    Ok(if v >= best.1 { (t, v) } else { best })
}

/// Least-squares slope of `log sup_tau` against `log xi`.
pub fn resonant_slope(xis: &[f64], eps: f64) -> Result<f64> {
    let mut pts = Vec::with_capacity(xis.len());
    for &x in xis {
        let (_, v) = resonant_sup(x, eps)?;
        pts.push((x.ln(), v.ln()));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

/// One point `(xi_i, sigma_i)` for i = 1, 2, 3; `sigma_0` is fixed by
/// `tau_0 = tau_1 + tau_2 + tau_3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModulatedTriple {
    pub xi: [f64; 3],
    pub sigma: [f64; 3],
}

impl ModulatedTriple {
    pub fn sigma0(&self) -> f64 {
        self.sigma.iter().sum::<f64>() - resonance(self.xi[0], self.xi[1], self.xi[2])
    }
}

/// `<xi1>^eps <xi2>^eps / prod_{i=0..3} <sigma_i>^eps` on triples ordered by
/// `|xi1| >= |xi2| >= |xi3|` with `|xi1 + xi2| >= 1`.
pub fn sigma_gain_check(t: &ModulatedTriple, eps: f64) -> Result<f64> {
    let [a, b, c] = t.xi;
    if !(a.abs() >= b.abs() && b.abs() >= c.abs()) {
        return Err(LabError::Domain("frequencies must satisfy |xi1| >= |xi2| >= |xi3|".into()));
    }
    if (a + b).abs() < 1.0 {
        return Err(LabError::Domain("need |xi1 + xi2| >= 1".into()));
    }
    let den = bracket(t.sigma0()) * t.sigma.iter().map(|&s| bracket(s)).product::<f64>();
    Ok((bracket(a) * bracket(b) / den).powf(eps))
}

/// Largest gain over `samples` random triples drawn from the admissible
/// set with heavy-tailed modulations.
pub fn sigma_gain_sweep(samples: usize, seed: u64, eps: f64, xi_max: f64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = 0.0f64;
    let mut taken = 0;
    while taken < samples {
        let mut xi = [0.0; 3];
        for x in &mut xi {
            *x = rng.gen_range(-xi_max..xi_max);
        }
        xi.sort_by(|p, q| q.abs().total_cmp(&p.abs()));
        if (xi[0] + xi[1]).abs() < 1.0 {
            continue;
        }
        let mut sigma = [0.0; 3];
        for s in &mut sigma {
            // Cauchy-like tails with an atom near zero.
            let u: f64 = rng.gen_range(-1.0..1.0);
            *s = if rng.gen_bool(0.3) { 0.0 } else { (0.5 * std::f64::consts::PI * u).tan() * 10.0 };
        }
        best = best.max(sigma_gain_check(&ModulatedTriple { xi, sigma }, eps)?);
        taken += 1;
    }
    Ok(best)
}
