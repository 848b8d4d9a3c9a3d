//! Exponent bookkeeping for the `T>=` estimate and its interpolated form.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::norms::conjugate;

const TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lemma3Verdict {
    pub theta: f64,
    pub accepted: bool,
    /// Smallest slack over the strict inequalities.
    pub margin: f64,
    /// Printed constraints that fail, in a fixed order.
    pub violated: Vec<&'static str>,
}

/// Checks every hypothesis on `(p, p0, p1)` and returns
/// `theta = 3/p' - 2/p1'`.
pub fn validate_lemma3_params(p: f64, p0: f64, p1: f64) -> Lemma3Verdict {
    let pp = conjugate(p);
    let theta = 3.0 / pp - 2.0 / conjugate(p1);
    let p0p = conjugate(p0);
    let mut violated = Vec::new();
    let mut margin = f64::INFINITY;
    let mut less = |a: f64, b: f64, name: &'static str| {
        margin = margin.min(b - a);
        if !(a < b) {
            violated.push(name);
        }
    };
    less(1.0, p1, "1 < p1");
    less(p1, p, "p1 < p");
    less(p, p0, "p < p0");
    less(p, p0p, "p < p0'");
    less(2.0 / p1, 1.0 + 1.0 / p, "2/p1 < 1 + 1/p");
    less(0.0, theta, "0 < theta");
    less(theta, 1.0, "theta < 1");
    less(1.0, theta * pp, "1 < theta p'");
    less(theta * pp, 2.0, "theta p' < 2");
    let hls = (1.0 - theta) * p;
    less(0.0, hls, "0 < (1-theta) p");
    less(hls, 1.0, "(1-theta) p < 1");
    less(1.0, p0p / p, "1 < p0'/p");
    less(p0p / p, 1.0 / (1.0 - hls), "p0'/p < 1/(1-(1-theta)p)");
    if !p0.is_finite() {
        violated.push("p0 < inf");
    }
    if (3.0 / p - 1.0 / p0 - 2.0 / p1).abs() >= TOL {
        violated.push("3/p = 1/p0 + 2/p1");
    }
    if (theta - 1.0 / p0p).abs() >= TOL {
        violated.push("theta = 1/p0'");
    }
    if margin.is_nan() {
        margin = f64::NEG_INFINITY;
    }
    Lemma3Verdict {
        theta,
        accepted: violated.is_empty(),
        margin,
        violated,
    }
}

/// An accepted `(p0, p1)` for a given `p`: the lattice point over `1/p0`
/// with the largest slack (`p1` follows from `3/p = 1/p0 + 2/p1`).
pub fn lemma3_witness(p: f64, lattice: usize) -> Option<(f64, f64, Lemma3Verdict)> {
    let mut best: Option<(f64, f64, Lemma3Verdict)> = None;
    for i in 1..lattice {
        let inv_p0 = i as f64 / lattice as f64;
        let inv_p1 = 0.5 * (3.0 / p - inv_p0);
        if inv_p1 <= 0.0 {
            continue;
        }
        let (p0, p1) = (1.0 / inv_p0, 1.0 / inv_p1);
        let v = validate_lemma3_params(p, p0, p1);
        if v.accepted && best.as_ref().map_or(true, |b| v.margin > b.2.margin) {
            best = Some((p0, p1, v));
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BundleSource {
    /// Interpolation between the `T>=` estimate and the `L^2` product bound.
    Interpolation,
    /// `s0 = s1 = 1/(3r)` from the linear estimate, valid for `r >= 2`.
    Remark,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct T2cBundle {
    pub r: f64,
    pub s0: f64,
    pub s1: f64,
    pub theta: f64,
    pub q0: f64,
    pub q1: f64,
    pub p: f64,
    pub p0: f64,
    pub p1: f64,
    pub source: BundleSource,
}

impl T2cBundle {
    fn from_theta_q0(r: f64, theta: f64, q0: f64) -> Self {
        let q1 = 2.0 / (1.5 - 1.0 / q0);
        let inv = |x: f64| (1.0 / r - theta * x) / (1.0 - theta);
        let p = 1.0 / inv(0.5);
        let p0 = 1.0 / inv(1.0 / q0);
        let p1 = 1.0 / inv(1.0 / q1);
        T2cBundle {
            r,
            s0: theta / (3.0 * q0),
            s1: (1.0 - theta) / (2.0 * p) + theta / (3.0 * q1),
            theta,
            q0,
            q1,
            p,
            p0,
            p1,
            source: BundleSource::Interpolation,
        }
    }

    /// Smallest slack over the strict inequalities of the bundle.
    pub fn margin(&self) -> f64 {
        let m = validate_lemma3_params(self.p, self.p0, self.p1).margin;
        m.min(self.theta).min(1.0 - self.theta).min(self.q0 - 4.0 / 3.0).min(2.0 - self.q0)
    }

    /// Recomputes every constraint from the stored exponents.
    pub fn violations(&self) -> Vec<&'static str> {
        if self.source == BundleSource::Remark {
            let mut v = Vec::new();
            if self.r < 2.0 {
                v.push("r >= 2");
            }
            if (self.s0 + 2.0 * self.s1 - 1.0 / self.r).abs() > TOL {
                v.push("s0 + 2 s1 = 1/r");
            }
            return v;
        }
        let mut v = validate_lemma3_params(self.p, self.p0, self.p1).violated;
        let (t, r) = (self.theta, self.r);
        let mut need = |ok: bool, name: &'static str| {
            if !ok {
                v.push(name);
            }
        };
        need(t > 0.0 && t < 1.0, "0 < theta_i < 1");
        need(4.0 / 3.0 < self.q0 && self.q0 < 2.0 && self.q1 > 2.0, "4/3 < q0 < 2 < q1");
        need((1.0 / self.q0 + 2.0 / self.q1 - 1.5).abs() < TOL, "3/2 = 1/q0 + 2/q1");
        need(((1.0 - t) / self.p + t / 2.0 - 1.0 / r).abs() < TOL, "1/r = (1-theta)/p + theta/2");
        need(((1.0 - t) / self.p0 + t / self.q0 - 1.0 / r).abs() < TOL, "1/r = (1-theta)/p0 + theta/q0");
        need(((1.0 - t) / self.p1 + t / self.q1 - 1.0 / r).abs() < TOL, "1/r = (1-theta)/p1 + theta/q1");
        need(self.s0 >= 0.0 && self.s1 >= 0.0, "s0, s1 >= 0");
        need((self.s0 + 2.0 * self.s1 - 1.0 / r).abs() < TOL, "s0 + 2 s1 = 1/r");
        v
    }
}

/// `s0 = s1 = 1/(3r)`.
pub fn t2c_remark_bundle(r: f64) -> T2cBundle {
    let s = 1.0 / (3.0 * r);
    T2cBundle {
        r,
        s0: s,
        s1: s,
        theta: 1.0,
        q0: r,
        q1: r,
        p: f64::NAN,
        p0: f64::NAN,
        p1: f64::NAN,
        source: BundleSource::Remark,
    }
}

/// Lattice search over `(theta, q0)` for a bundle meeting every
/// hypothesis. Returns the feasible point with the largest slack in the
/// strict inequalities (ties go to the earliest lattice point); at `r >= 2` the interpolation is infeasible (`p = 2`
/// cannot satisfy `p < p0` and `p < p0'` together) and the remark bundle
/// is returned instead.
pub fn t2c_exponents(r: f64) -> Result<T2cBundle> {
    if !(r > 1.0) || !r.is_finite() {
        return Err(LabError::Domain(format!("t2c exponents need r > 1, got {r}")));
    }
    if r >= 2.0 {
        return Ok(t2c_remark_bundle(r));
    }
    let (nt, nq) = (1000, 200);
    let mut last = Vec::new();
    let mut best: Option<(f64, T2cBundle)> = None;
    for i in 1..nt {
        let theta = i as f64 / nt as f64;
        for j in 1..nq {
            let q0 = 4.0 / 3.0 + (2.0 - 4.0 / 3.0) * j as f64 / nq as f64;
            let b = T2cBundle::from_theta_q0(r, theta, q0);
            if !(b.p.is_finite() && b.p0.is_finite() && b.p1.is_finite() && b.p > 0.0 && b.p0 > 0.0 && b.p1 > 0.0) {
                continue;
            }
            let v = b.violations();
            if v.is_empty() {
                let m = b.margin();
                if best.as_ref().map_or(true, |(bm, _)| m > *bm) {
                    best = Some((m, b));
                }
            } else {
                last = v;
            }
        }
    }
    if let Some((_, b)) = best {
        return Ok(b);
    }
    Err(LabError::Domain(format!(
        "no feasible exponent bundle for r = {r}; last violations: {}",
        last.join(", ")
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_for_theta_holds_on_the_constraint() {
        let v = validate_lemma3_params(1.5, 2.0, 4.0 / 3.0);
        assert!(v.accepted, "{:?}", v.violated);
        assert!((v.theta - 0.5).abs() < 1e-12);
    }

    #[test]
    fn remark_bundle_sums() {
        let b = t2c_exponents(2.0).unwrap();
        assert_eq!(b.source, BundleSource::Remark);
        assert!((b.s0 - 1.0 / 6.0).abs() < 1e-15 && (b.s1 - 1.0 / 6.0).abs() < 1e-15);
        assert!(b.violations().is_empty());
    }
}
