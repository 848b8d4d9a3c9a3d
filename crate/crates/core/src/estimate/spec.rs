//! Estimate identifiers, exponent bundles and their hypotheses.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::norms::{conjugate, sr_threshold};

use super::exponents::{t2c_exponents, validate_lemma3_params};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateId {
    Lemma1,
    CorB1,
    #[serde(rename = "cor_b2_204")]
    CorB2_204,
    Fs20,
    Lemma2,
    CorT1c,
    Lemma3,
    CorT2c,
    Lemma4,
    CorT3c,
    Theorem2,
}

impl EstimateId {
    pub const ALL: [EstimateId; 11] = [
        EstimateId::Lemma1,
        EstimateId::CorB1,
        EstimateId::CorB2_204,
        EstimateId::Fs20,
        EstimateId::Lemma2,
        EstimateId::CorT1c,
        EstimateId::Lemma3,
        EstimateId::CorT2c,
        EstimateId::Lemma4,
        EstimateId::CorT3c,
        EstimateId::Theorem2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EstimateId::Lemma1 => "lemma1",
            EstimateId::CorB1 => "cor_b1",
            EstimateId::CorB2_204 => "cor_b2_204",
            EstimateId::Fs20 => "fs20",
            EstimateId::Lemma2 => "lemma2",
            EstimateId::CorT1c => "cor_t1c",
            EstimateId::Lemma3 => "lemma3",
            EstimateId::CorT2c => "cor_t2c",
            EstimateId::Lemma4 => "lemma4",
            EstimateId::CorT3c => "cor_t3c",
            EstimateId::Theorem2 => "theorem2",
        }
    }

    pub fn parse(s: &str) -> Option<EstimateId> {
        EstimateId::ALL.into_iter().find(|id| id.name() == s)
    }

    /// The statement the probe evaluates.
    pub fn statement(self) -> &'static str {
        match self {
            EstimateId::Lemma1 => "bilinear Riesz-weighted estimate for free solutions, mixed norm",
            EstimateId::CorB1 => "bilinear estimate in restriction spaces, b_i > 1/r_i",
            EstimateId::CorB2_204 => "dual bilinear estimate with I_+, interpolated with Hausdorff-Young",
            EstimateId::Fs20 => "Airy Fefferman-Stein estimate, L^{3r}_{xt} by |xi|^{1/(3r)} L^{r'}",
            EstimateId::Lemma2 => "trilinear estimate for T on |xi1| ~ |xi2| >> <xi3>",
            EstimateId::CorT1c => "T estimate in restriction spaces",
            EstimateId::Lemma3 => "T>= estimate via Hardy-Littlewood-Sobolev",
            EstimateId::CorT2c => "T>= estimate with s0 + 2 s1 = 1/r in restriction spaces",
            EstimateId::Lemma4 => "T<= estimate via dyadic decomposition in y",
            EstimateId::CorT3c => "T<= estimate in restriction spaces",
            EstimateId::Theorem2 => "trilinear estimate for d_x(u1 u2 u3) in X^r_{s,b'}",
        }
    }

    /// Band edge used by the default refinements.
    pub fn default_band(self) -> f64 {
        match self {
            EstimateId::Lemma1 | EstimateId::CorB1 | EstimateId::CorB2_204 => 16.0,
            EstimateId::Fs20 | EstimateId::Theorem2 => 8.0,
            EstimateId::Lemma3 | EstimateId::CorT2c | EstimateId::Lemma4 | EstimateId::CorT3c => 16.0,
            EstimateId::Lemma2 | EstimateId::CorT1c => 32.0,
        }
    }
}

impl std::fmt::Display for EstimateId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Exponent bundle of one estimate. Unset fields take the defaults of
/// [`EstimateSpec::resolved`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimateSpec {
    pub id: EstimateId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b_prime: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p1: Option<f64>,
    /// Stands in for "0+".
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
}

fn default_epsilon() -> f64 {
    0.05
}

/// Every exponent with defaults filled in; fields an estimate does not use
/// are `NaN`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Exponents {
    pub r: f64,
    pub s: f64,
    pub b: f64,
    pub b_prime: f64,
    pub p: f64,
    pub q: f64,
    pub r1: f64,
    pub r2: f64,
    pub rho: f64,
    pub beta: f64,
    pub s0: f64,
    pub s1: f64,
    pub s2: f64,
    pub p0: f64,
    pub p1: f64,
    pub b1: f64,
    pub b2: f64,
}

impl Exponents {
    fn blank() -> Self {
        let n = f64::NAN;
        Exponents {
            r: n,
            s: n,
            b: n,
            b_prime: n,
            p: n,
            q: n,
            r1: n,
            r2: n,
            rho: n,
            beta: n,
            s0: n,
            s1: n,
            s2: n,
            p0: n,
            p1: n,
            b1: n,
            b2: n,
        }
    }
}

impl EstimateSpec {
    pub fn new(id: EstimateId) -> Self {
        EstimateSpec {
            id,
            r: None,
            s: None,
            b: None,
            b_prime: None,
            p: None,
            q: None,
            r1: None,
            r2: None,
            rho: None,
            beta: None,
            s0: None,
            s1: None,
            s2: None,
            p0: None,
            p1: None,
            epsilon: default_epsilon(),
        }
    }

    /// Fills defaults and checks the hypotheses of the cited statement.
    pub fn resolved(&self) -> Result<Exponents> {
        let eps = self.epsilon;
        if !(eps > 0.0 && eps < 1.0) {
            return Err(LabError::Hypothesis(vec![format!("epsilon in (0, 1), got {eps}")]));
        }
        let mut e = Exponents::blank();
        let mut bad: Vec<String> = Vec::new();
        let mut need = |ok: bool, what: &str| {
            if !ok {
                bad.push(what.to_string());
            }
        };
        match self.id {
            EstimateId::Lemma1 | EstimateId::CorB1 => {
                e.p = self.p.unwrap_or(2.0);
                e.q = self.q.unwrap_or(2.0);
                e.r1 = self.r1.unwrap_or(2.0);
                e.r2 = self.r2.unwrap_or(2.0);
                let (p, q, r1, r2) = (e.p, e.q, e.r1, e.r2);
                need(1.0 <= q && q <= r1.min(r2) && r1.max(r2) <= p, "1 <= q <= r1, r2 <= p");
                need((1.0 / p + 1.0 / q - 1.0 / r1 - 1.0 / r2).abs() < 1e-12, "1/p + 1/q = 1/r1 + 1/r2");
                need(q.is_finite(), "q finite");
                if self.id == EstimateId::CorB1 {
                    e.b1 = self.b.unwrap_or(1.0 / r1 + 0.1);
                    e.b2 = self.b.unwrap_or(1.0 / r2 + 0.1);
                    e.b = e.b1.max(e.b2);
                    need(e.b1 > 1.0 / r1 && e.b2 > 1.0 / r2, "b_i > 1/r_i");
                }
            }
            EstimateId::CorB2_204 => {
                e.r = self.r.unwrap_or(1.5);
                e.rho = self.rho.unwrap_or(1.25);
                e.beta = self.beta.unwrap_or(-0.3);
                let inv_rho_p = 1.0 / conjugate(e.rho);
                need(e.r > 1.0 && e.r.is_finite(), "1 < r < inf");
                need(e.rho >= 1.0, "rho >= 1");
                need(inv_rho_p <= 1.0 / conjugate(e.r) + 1e-15, "0 <= 1/rho' <= 1/r'");
                need(e.beta < -inv_rho_p, "beta < -1/rho'");
            }
            EstimateId::Fs20 => {
                e.r = self.r.unwrap_or(2.0);
                need(e.r > 1.0 && e.r.is_finite(), "1 < r < inf");
            }
            EstimateId::Lemma2 | EstimateId::CorT1c => {
                e.r = self.r.unwrap_or(1.5);
                let rp = conjugate(e.r);
                e.s1 = self.s1.unwrap_or(1.0 / (4.0 * rp) - 0.5 + eps);
                e.s2 = self.s2.unwrap_or(1.0 / (2.0 * rp));
                need((1.0..=2.0).contains(&e.r), "1 <= r <= 2");
                need(e.s1 > 1.0 / (4.0 * rp) - 0.5, "s1 > 1/(4r') - 1/2");
                need(e.s2 >= 1.0 / (2.0 * rp), "s2 >= 1/(2r')");
                if self.id == EstimateId::CorT1c {
                    e.b = self.b.unwrap_or(1.0 / e.r + 0.1);
                    need(e.b > 1.0 / e.r, "b > 1/r");
                }
            }
            EstimateId::Lemma3 => {
                e.p = self.p.unwrap_or(1.5);
                e.p0 = self.p0.unwrap_or(2.0);
                e.p1 = self.p1.unwrap_or(4.0 / 3.0);
                let v = validate_lemma3_params(e.p, e.p0, e.p1);
                bad.extend(v.violated.iter().map(|s| s.to_string()));
            }
            EstimateId::CorT2c => {
                e.r = self.r.unwrap_or(1.5);
                e.b = self.b.unwrap_or(1.0 / e.r + 0.1);
                need(e.r > 1.0 && e.r < 2.0, "1 < r < 2");
                need(e.b > 1.0 / e.r, "b > 1/r");
                match (self.s0, self.s1) {
                    (Some(s0), Some(s1)) => {
                        e.s0 = s0;
                        e.s1 = s1;
                    }
                    (None, None) if e.r > 1.0 => {
                        let bundle = t2c_exponents(e.r)?;
                        e.s0 = bundle.s0;
                        e.s1 = bundle.s1;
                        e.p = bundle.p;
                        e.p0 = bundle.p0;
                        e.p1 = bundle.p1;
                    }
                    _ => need(false, "s0 and s1 given together"),
                }
                need(e.s0 >= 0.0 && e.s1 >= 0.0, "s0, s1 >= 0");
                need((e.s0 + 2.0 * e.s1 - 1.0 / e.r).abs() < 1e-12, "s0 + 2 s1 = 1/r");
            }
            EstimateId::Lemma4 | EstimateId::CorT3c => {
                e.r = self.r.unwrap_or(1.5);
                e.rho = self.rho.unwrap_or(3.0);
                need(1.0 <= e.r && e.r < e.rho, "1 <= r < rho <= inf");
                if self.id == EstimateId::CorT3c {
                    e.beta = self.beta.unwrap_or(1.0 / e.rho + 0.1);
                    e.b = self.b.unwrap_or(1.0 / e.r + 0.1);
                    need(e.beta > 1.0 / e.rho, "beta > 1/rho");
                    need(e.b > 1.0 / e.r, "b > 1/r");
                }
            }
            EstimateId::Theorem2 => {
                e.r = self.r.unwrap_or(1.5);
                let sr = sr_threshold(e.r.clamp(1.0, 2.0))?;
                e.s = self.s.unwrap_or(sr);
                e.b = self.b.unwrap_or(1.0 / e.r + 0.1);
                e.b_prime = self.b_prime.unwrap_or(-0.1);
                need(e.r > 1.0 && e.r <= 2.0, "1 < r <= 2");
                need(e.s >= sr - 1e-15, "s >= s(r)");
                need(e.b > 1.0 / e.r, "b > 1/r");
                need(e.b_prime < 0.0, "b' < 0");
            }
        }
        if bad.is_empty() {
            Ok(e)
        } else {
            Err(LabError::Hypothesis(bad))
        }
    }
}
