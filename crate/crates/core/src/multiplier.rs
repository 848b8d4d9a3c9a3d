//! Fourier multipliers and the exact Airy group.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::field::{Dims, Side, SpectralField, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MultiplierKind {
    /// `|xi|^order`, zero mode mapped to zero for `order != 0`.
    Riesz,
    /// `<xi>^order`.
    Bessel,
    /// `<tau - xi^3>^order`; 2D frequency fields only.
    Lambda,
    /// `chi_{|xi| <= 1}`; order ignored.
    Lowpass,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MultiplierSpec {
    pub kind: MultiplierKind,
    #[serde(default)]
    pub order: f64,
}

impl MultiplierSpec {
    pub fn riesz(order: f64) -> Self {
        Self {
            kind: MultiplierKind::Riesz,
            order,
        }
    }

    pub fn bessel(order: f64) -> Self {
        Self {
            kind: MultiplierKind::Bessel,
            order,
        }
    }

    pub fn lambda(order: f64) -> Self {
        Self {
            kind: MultiplierKind::Lambda,
            order,
        }
    }

    pub fn lowpass() -> Self {
        Self {
            kind: MultiplierKind::Lowpass,
            order: 0.0,
        }
    }

    /// Symbol at `(xi, tau)`; `tau` is ignored by the spatial kinds.
    pub fn symbol(&self, xi: f64, tau: f64) -> f64 {
        match self.kind {
            MultiplierKind::Riesz => riesz(xi, self.order),
            MultiplierKind::Bessel => bracket(xi).powf(self.order),
            MultiplierKind::Lambda => bracket(tau - xi * xi * xi).powf(self.order),
            MultiplierKind::Lowpass => {
                if xi.abs() <= 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

/// Japanese bracket `(1 + x^2)^(1/2)`.
#[inline]
pub fn bracket(x: f64) -> f64 {
    x.hypot(1.0)
}

/// `|xi|^sigma` with the zero mode annihilated for every `sigma != 0`.
#[inline]
pub fn riesz(xi: f64, sigma: f64) -> f64 {
    if sigma == 0.0 {
        1.0
    } else if xi == 0.0 {
        0.0
    } else {
        xi.abs().powf(sigma)
    }
}

/// Pointwise multiplication on the frequency side. 1D physical input is
/// transformed first.
pub fn apply_multiplier(f: &SpectralField, m: &MultiplierSpec) -> Result<SpectralField> {
    if !m.order.is_finite() {
        return Err(LabError::Domain(format!("multiplier order {}", m.order)));
    }
    let f = match (f.dims(), f.side()) {
        (Dims::One, Side::Physical) => f.to_frequency()?,
        (_, Side::Frequency) => f.clone(),
        (Dims::Two, Side::Mixed) if m.kind != MultiplierKind::Lambda => f.clone(),
        _ => f.to_frequency()?,
    };
    let g = *f.grid();
    if m.kind == MultiplierKind::Lambda && (f.dims() != Dims::Two || f.side() != Side::Frequency) {
        return Err(LabError::Shape("Lambda multiplier needs a 2D frequency field".into()));
    }
    let mut out = f.clone();
    let nx = g.n_x;
    for r in 0..f.rows() {
        let tau = if f.dims() == Dims::Two && f.side() == Side::Frequency {
            g.tau(r)
        } else {
            0.0
        };
        let row = out.row_mut(r);
        for (k, v) in row.iter_mut().enumerate() {
            let xi = g.xi(k);
            let w = m.symbol(xi, tau);
            let nv = *v * w;
            if !(nv.re.is_finite() && nv.im.is_finite()) {
                return Err(LabError::Range {
                    mode: r * nx + k,
                    xi,
                });
            }
            *v = nv;
        }
    }
    Ok(out)
}

/// Free Airy evolution `exp(-t d_x^3)`: multiplies `u0^(xi)` by
/// `exp(i t xi^3)`.
pub fn airy_propagate(u0: &SpectralField, t: f64) -> Result<SpectralField> {
    if u0.dims() != Dims::One {
        return Err(LabError::Shape("airy_propagate needs 1D data".into()));
    }
    if !t.is_finite() {
        return Err(LabError::Domain(format!("time {t}")));
    }
    let mut out = u0.to_frequency()?;
    let g = *out.grid();
    for (k, v) in out.values_mut().iter_mut().enumerate() {
        let xi = g.xi(k);
        *v *= airy_phase(xi, t);
    }
    Ok(out)
}

/// `exp(i t xi^3)` with the phase reduced before the exponential.
#[inline]
pub fn airy_phase(xi: f64, t: f64) -> C64 {
    let ph = (t * xi * xi * xi).rem_euclid(2.0 * std::f64::consts::PI);
    C64::from_polar(1.0, ph)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use std::f64::consts::PI;

    fn unit_mode(g: Grid, k: usize) -> SpectralField {
        SpectralField::from_frequency_fn(g, |xi| {
            if (xi - g.xi(k)).abs() < 1e-12 {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    #[test]
    fn bessel_zero_is_identity() {
        let g = Grid::spatial(32, 10.0).unwrap();
        let f = SpectralField::from_frequency_fn(g, |xi| C64::new(xi.cos(), xi));
        let out = apply_multiplier(&f, &MultiplierSpec::bessel(0.0)).unwrap();
        assert_eq!(out.values(), f.values());
    }

    #[test]
    fn riesz_one_at_two() {
        let g = Grid::spatial(32, 2.0 * PI).unwrap(); // dxi = 1
        let k = g.index_of_wavenumber(2).unwrap();
        let out = apply_multiplier(&unit_mode(g, k), &MultiplierSpec::riesz(1.0)).unwrap();
        assert!((out.values()[k] - C64::new(2.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn negative_riesz_kills_mean_and_matches_per_mode() {
        let g = Grid::spatial(64, 20.0).unwrap();
        let f = SpectralField::from_frequency_fn(g, |xi| C64::new((-xi * xi).exp() + 0.1, 0.2));
        let out = apply_multiplier(&f, &MultiplierSpec::riesz(-0.5)).unwrap();
        for k in 0..g.n_x {
            let xi = g.xi(k);
            let want = if xi == 0.0 {
                C64::new(0.0, 0.0)
            } else {
                f.values()[k] / xi.abs().sqrt()
            };
            assert!((out.values()[k] - want).norm() <= 1e-14 * want.norm().max(1.0));
        }
    }

    #[test]
    fn lowpass_idempotent() {
        let g = Grid::spatial(64, 20.0).unwrap();
        let f = SpectralField::from_frequency_fn(g, |xi| C64::new(1.0 + xi, xi.sin()));
        let once = apply_multiplier(&f, &MultiplierSpec::lowpass()).unwrap();
        let twice = apply_multiplier(&once, &MultiplierSpec::lowpass()).unwrap();
        assert_eq!(once.values(), twice.values());
    }

    #[test]
    fn overflow_reports_mode() {
        let g = Grid::spatial(64, 0.01).unwrap();
        let f = SpectralField::from_frequency_fn(g, |_| C64::new(1.0, 0.0));
        let err = apply_multiplier(&f, &MultiplierSpec::bessel(400.0)).unwrap_err();
        assert!(matches!(err, LabError::Range { mode: 0, .. }));
    }

    #[test]
    fn airy_phase_at_pi() {
        let g = Grid::spatial(32, 2.0 * PI).unwrap();
        let k = g.index_of_wavenumber(1).unwrap();
        let out = airy_propagate(&unit_mode(g, k), PI).unwrap();
        assert!((out.values()[k] - C64::new(-1.0, 0.0)).norm() < 1e-14);
        let same = airy_propagate(&unit_mode(g, k), 0.0).unwrap();
        assert_eq!(same.values(), unit_mode(g, k).values());
    }

    #[test]
    fn group_law() {
        let g = Grid::spatial(64, 30.0).unwrap();
        let u0 = SpectralField::from_physical_fn(g, |x| C64::new((-x * x).exp(), 0.0));
        let a = airy_propagate(&airy_propagate(&u0, 0.3).unwrap(), 0.45).unwrap();
        let b = airy_propagate(&u0, 0.75).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!((x - y).norm() < 1e-12);
        }
    }
}
