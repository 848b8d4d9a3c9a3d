//! Fourier-Lebesgue, mixed and restriction norms, plus the exponent
//! arithmetic that relates them.
//!
//! Every norm is a Riemann sum over frequency cells (`dxi`, `dtau`), so
//! values converge to the continuum integrals as the grid grows. Exponents
//! may be infinite: an infinite inner or outer exponent is evaluated as an
//! explicit supremum, never as a large-exponent limit.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::field::{Dims, Side, SpectralField};
use crate::multiplier::bracket;

/// Hölder conjugate, with `1 <-> inf`.
pub fn conjugate(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    }
}

/// Accumulates `(sum a_i^p cell_i)^(1/p)` without overflow, or `max a_i`
/// when `p` is infinite. Inputs must be nonnegative.
#[derive(Debug, Clone)]
pub struct LpAccumulator {
    p: f64,
    scale: f64,
    sum: f64,
}

impl LpAccumulator {
    pub fn new(p: f64) -> Self {
        Self {
            p,
            scale: 0.0,
            sum: 0.0,
        }
    }

    pub fn push(&mut self, a: f64, cell: f64) {
        if a == 0.0 {
            return;
        }
        if self.p.is_infinite() {
            self.scale = self.scale.max(a);
            return;
        }
        if a > self.scale {
            if self.scale > 0.0 {
                self.sum *= (self.scale / a).powf(self.p);
            }
            self.scale = a;
        }
        self.sum += (a / self.scale).powf(self.p) * cell;
    }

    pub fn finish(&self) -> f64 {
        if self.p.is_infinite() || self.scale == 0.0 {
            self.scale
        } else {
            self.scale * self.sum.powf(1.0 / self.p)
        }
    }
}

/// Parameters of `H^r_s` (frequency side `L^{r'}` with weight `<xi>^s`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FLParams {
    pub r: f64,
    pub s: f64,
}

impl FLParams {
    pub fn new(r: f64, s: f64) -> Result<Self> {
        if !(r > 1.0) || r.is_nan() {
            return Err(LabError::Domain(format!("need r > 1, got {r}")));
        }
        if !s.is_finite() {
            return Err(LabError::Domain(format!("regularity {s}")));
        }
        Ok(Self { r, s })
    }

    pub fn r_prime(&self) -> f64 {
        conjugate(self.r)
    }
}

/// Outer (`x`) exponent `q` and inner (`t`) exponent `p` of
/// `L^q_x(L^p_t)`-hat.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixedParams {
    pub p: f64,
    pub q: f64,
}

impl MixedParams {
    pub fn new(p: f64, q: f64) -> Result<Self> {
        for (name, v) in [("p", p), ("q", q)] {
            if !(v >= 1.0) {
                return Err(LabError::Domain(format!("{name} must lie in [1, inf], got {v}")));
            }
        }
        Ok(Self { p, q })
    }

    pub fn p_prime(&self) -> f64 {
        conjugate(self.p)
    }

    pub fn q_prime(&self) -> f64 {
        conjugate(self.q)
    }
}

/// Parameters of the restriction space `X^r_{s,b}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct XsbParams {
    pub r: f64,
    pub s: f64,
    pub b: f64,
}

impl XsbParams {
    pub fn new(r: f64, s: f64, b: f64) -> Result<Self> {
        if !(r >= 1.0) {
            return Err(LabError::Domain(format!("need r >= 1, got {r}")));
        }
        if !(s.is_finite() && b.is_finite()) {
            return Err(LabError::Domain(format!("s = {s}, b = {b}")));
        }
        Ok(Self { r, s, b })
    }

    pub fn r_prime(&self) -> f64 {
        conjugate(self.r)
    }
}

fn require(f: &SpectralField, dims: Dims, side: Side, what: &str) -> Result<()> {
    if f.dims() != dims || f.side() != side {
        return Err(LabError::Shape(format!(
            "{what} needs a {dims:?} {side:?} field, got {:?} {:?}",
            f.dims(),
            f.side()
        )));
    }
    Ok(())
}

/// `|| <xi>^s u0^ ||_{L^{r'}_xi}`. Physical data are transformed first.
pub fn fl_norm(u0: &SpectralField, p: &FLParams) -> Result<f64> {
    let u = u0.to_frequency()?;
    require(&u, Dims::One, Side::Frequency, "fl_norm")?;
    Ok(weighted_fl(&u, p.r_prime(), p.s))
}

/// `fl_norm` with an arbitrary dual exponent `r' in [1, inf]`.
pub fn weighted_fl(u: &SpectralField, r_prime: f64, s: f64) -> f64 {
    let g = u.grid();
    let mut acc = LpAccumulator::new(r_prime);
    for (k, v) in u.values().iter().enumerate() {
        acc.push(bracket(g.xi(k)).powf(s) * v.norm(), g.dxi());
    }
    acc.finish()
}

/// `( int ( int |f^|^{p'} dtau )^{q'/p'} dxi )^{1/q'}`.
pub fn mixed_fl_norm(f: &SpectralField, m: &MixedParams) -> Result<f64> {
    require(f, Dims::Two, Side::Frequency, "mixed_fl_norm")?;
    let g = f.grid();
    let (pp, qp) = (m.p_prime(), m.q_prime());
    let mut outer = LpAccumulator::new(qp);
    for k in 0..g.n_x {
        let mut inner = LpAccumulator::new(pp);
        for l in 0..g.n_t {
            inner.push(f.values()[l * g.n_x + k].norm(), g.dtau());
        }
        outer.push(inner.finish(), g.dxi());
    }
    Ok(outer.finish())
}

/// `|| <xi>^s <tau - xi^3>^b f^ ||_{L^{r'}_{xi tau}}`.
pub fn xsb_norm(f: &SpectralField, p: &XsbParams) -> Result<f64> {
    require(f, Dims::Two, Side::Frequency, "xsb_norm")?;
    let g = f.grid();
    let mut acc = LpAccumulator::new(p.r_prime());
    let cell = g.dxi() * g.dtau();
    for l in 0..g.n_t {
        let tau = g.tau(l);
        for k in 0..g.n_x {
            let xi = g.xi(k);
            let w = bracket(xi).powf(p.s) * bracket(tau - xi * xi * xi).powf(p.b);
            acc.push(w * f.values()[l * g.n_x + k].norm(), cell);
        }
    }
    Ok(acc.finish())
}

/// Restriction norm of a field given in the co-moving frame: the rows are
/// indexed by `sigma = tau - xi^3` instead of `tau`. This is what
/// [`xsb_norm`] computes after undoing the Airy phase, and it needs no time
/// axis wide enough to hold `xi^3`.
pub fn xsb_norm_profile(f: &SpectralField, p: &XsbParams) -> Result<f64> {
    require(f, Dims::Two, Side::Frequency, "xsb_norm_profile")?;
    let g = f.grid();
    let mut acc = LpAccumulator::new(p.r_prime());
    let cell = g.dxi() * g.dtau();
    for l in 0..g.n_t {
        let wb = bracket(g.tau(l)).powf(p.b);
        for k in 0..g.n_x {
            let w = bracket(g.xi(k)).powf(p.s) * wb;
            acc.push(w * f.values()[l * g.n_x + k].norm(), cell);
        }
    }
    Ok(acc.finish())
}

/// Regularity threshold `s(r) = 1/2 - 1/(2r)` on `r in (1, 2]`.
pub fn sr_threshold(r: f64) -> Result<f64> {
    if !(r > 1.0 && r <= 2.0) {
        return Err(LabError::Domain(format!("s(r) is defined for r in (1, 2], got {r}")));
    }
    Ok(0.5 - 0.5 / r)
}

/// Sobolev index `sigma` with `H^r_s` scaling like `H^sigma`:
/// `s - 1/r = sigma - 1/2`.
pub fn scaling_sigma(s: f64, r: f64) -> f64 {
    s - 1.0 / r + 0.5
}

/// Exponent of the data norm in the guaranteed lifespan,
/// `delta ~ ||u0||^(-2r/(r-1))`.
pub fn lifespan_exponent(r: f64) -> Result<f64> {
    if !(r > 1.0) {
        return Err(LabError::Domain(format!("need r > 1, got {r}")));
    }
    Ok(-2.0 * r / (r - 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::C64;
    use crate::grid::Grid;

    #[test]
    fn conjugates() {
        assert_eq!(conjugate(2.0), 2.0);
        assert_eq!(conjugate(1.0), f64::INFINITY);
        assert_eq!(conjugate(f64::INFINITY), 1.0);
        let r = 1.37;
        let rp = FLParams::new(r, 0.0).unwrap().r_prime();
        assert!((rp - 1.0 / (1.0 - 1.0 / r)).abs() < 1e-15 * rp);
    }

    #[test]
    fn accumulator_matches_direct_sum() {
        let xs = [0.5, 3.0, 1e-3, 2.0];
        let mut acc = LpAccumulator::new(3.0);
        xs.iter().for_each(|&x| acc.push(x, 0.25));
        let direct = (xs.iter().map(|x| x.powi(3) * 0.25).sum::<f64>()).cbrt();
        assert!((acc.finish() - direct).abs() < 1e-14);
        let mut sup = LpAccumulator::new(f64::INFINITY);
        xs.iter().for_each(|&x| sup.push(x, 0.25));
        assert_eq!(sup.finish(), 3.0);
    }

    #[test]
    fn zero_field_norms() {
        let g = Grid::with_window(16, 10.0, 1.0).unwrap();
        let z1 = SpectralField::zeros(g, Dims::One, Side::Frequency);
        assert_eq!(fl_norm(&z1, &FLParams::new(1.5, 0.3).unwrap()).unwrap(), 0.0);
        let z2 = SpectralField::zeros(g, Dims::Two, Side::Frequency);
        assert_eq!(xsb_norm(&z2, &XsbParams::new(1.5, 0.3, 0.7).unwrap()).unwrap(), 0.0);
    }

    #[test]
    fn single_cell_mixed_norm() {
        let g = Grid::with_window(16, 10.0, 1.0).unwrap();
        let mut f = SpectralField::zeros(g, Dims::Two, Side::Frequency);
        let a = 2.5;
        f.values_mut()[3 * g.n_x + 5] = C64::new(0.0, a);
        let m = MixedParams::new(3.0, 1.5).unwrap();
        let (pp, qp) = (m.p_prime(), m.q_prime());
        // inner = a dtau^{1/p'}, outer = inner dxi^{1/q'}
        let want = a * g.dtau().powf(1.0 / pp) * g.dxi().powf(1.0 / qp);
        let got = mixed_fl_norm(&f, &m).unwrap();
        assert!((got - want).abs() < 1e-13 * want);
    }

    #[test]
    fn thresholds() {
        assert_eq!(sr_threshold(2.0).unwrap(), 0.25);
        assert!((sr_threshold(4.0 / 3.0).unwrap() - 0.125).abs() < 1e-15);
        assert!(sr_threshold(1.0 + 1e-9).unwrap() < 1e-8);
        assert!(sr_threshold(1.0).is_err());
        assert!(sr_threshold(2.5).is_err());
        assert_eq!(scaling_sigma(0.0, 1.0), -0.5);
        assert_eq!(scaling_sigma(0.25, 2.0), 0.25);
        let r = 2.0;
        let s = sr_threshold(r).unwrap();
        assert!((scaling_sigma(s, r) - (1.0 - 1.5 / r)).abs() < 1e-15);
        assert_eq!(lifespan_exponent(2.0).unwrap(), -4.0);
        assert!((lifespan_exponent(1.5).unwrap() + 6.0).abs() < 1e-12);
    }
}
