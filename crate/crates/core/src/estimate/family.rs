//! Reproducible families of band-limited test spectra.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::field::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    Gaussian,
    WavePacket,
    DyadicBump,
    RandomPhase,
    TwoBumpSeparated,
}

impl FamilyKind {
    pub const ALL: [FamilyKind; 5] = [
        FamilyKind::Gaussian,
        FamilyKind::WavePacket,
        FamilyKind::DyadicBump,
        FamilyKind::RandomPhase,
        FamilyKind::TwoBumpSeparated,
    ];
}

/// `center`, `width` and `separation` are fractions of the band edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestFamily {
    pub kind: FamilyKind,
    #[serde(default = "default_center")]
    pub center: f64,
    #[serde(default = "default_width")]
    pub width: f64,
    #[serde(default = "default_separation")]
    pub separation: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_count")]
    pub count: usize,
}

fn default_center() -> f64 {
    0.5
}
fn default_width() -> f64 {
    0.1
}
fn default_separation() -> f64 {
    0.3
}
fn default_count() -> usize {
    50
}

impl Default for TestFamily {
    fn default() -> Self {
        TestFamily::new(FamilyKind::Gaussian)
    }
}

/// Placement of one factor: `scale` multiplies the family center (zero puts
/// the factor at the origin), `sign` fixes the side of the spectrum and
/// `hole` (fraction of the band) clears a neighbourhood of zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Role {
    pub scale: f64,
    pub sign: Option<f64>,
    pub hole: f64,
    /// Multiplies the family width.
    pub narrow: f64,
}

impl Role {
    pub const FREE: Role = Role {
        scale: 1.0,
        sign: None,
        hole: 0.0,
        narrow: 1.0,
    };

    pub fn signed(mut self, s: f64) -> Self {
        self.sign = Some(s);
        self
    }

    pub fn holed(mut self, h: f64) -> Self {
        self.hole = h;
        self
    }

    pub fn at_origin(narrow: f64) -> Self {
        Role {
            scale: 0.0,
            sign: None,
            hole: 0.0,
            narrow,
        }
    }
}

/// Smooth step: 0 for `t <= 0`, 1 for `t >= 1`.
pub fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let a = (-1.0 / t).exp();
    let b = (-1.0 / (1.0 - t)).exp();
    a / (a + b)
}

#[derive(Debug, Clone, PartialEq)]
enum Shape {
    Gaussian { c: f64, w: f64 },
    Packet { c: f64, w: f64, x0: f64 },
    Bump { lo: f64, hi: f64, sign: f64 },
    Phase { c: f64, w: f64, modes: [(f64, f64, f64); 3] },
    TwoBump { c1: f64, c2: f64, w: f64, rel: C64 },
}

/// One factor of one family member, a smooth function of `xi` vanishing
/// outside `0.9` of the band.
#[derive(Debug, Clone, PartialEq)]
pub struct MemberField {
    shape: Shape,
    amp: C64,
    band: f64,
    hole: f64,
}

impl MemberField {
    pub fn eval(&self, xi: f64) -> C64 {
        let a = xi.abs();
        let cut = 1.0 - smooth_step((a - 0.8 * self.band) / (0.1 * self.band));
        if cut == 0.0 {
            return C64::new(0.0, 0.0);
        }
        let hole = if self.hole > 0.0 { smooth_step((a - self.hole) / self.hole) } else { 1.0 };
        if hole == 0.0 {
            return C64::new(0.0, 0.0);
        }
        let g = |c: f64, w: f64| (-(xi - c).powi(2) / (2.0 * w * w)).exp();
        let v = match &self.shape {
            Shape::Gaussian { c, w } => C64::new(g(*c, *w), 0.0),
            Shape::Packet { c, w, x0 } => C64::from_polar(g(*c, *w), -xi * x0),
            Shape::Bump { lo, hi, sign } => {
                let s = sign * xi;
                if s <= *lo || s >= *hi {
                    C64::new(0.0, 0.0)
                } else {
                    let z = (2.0 * s - lo - hi) / (hi - lo);
                    C64::new((1.0 - 1.0 / (1.0 - z * z)).exp(), 0.0)
                }
            }
            Shape::Phase { c, w, modes } => {
                let ph: f64 = modes.iter().map(|(a, f, p)| a * (f * (xi - c) + p).sin()).sum();
                C64::from_polar(g(*c, *w), ph)
            }
            Shape::TwoBump { c1, c2, w, rel } => C64::new(g(*c1, *w), 0.0) + rel * g(*c2, *w),
        };
        v * self.amp * (cut * hole)
    }
}

impl TestFamily {
    pub fn new(kind: FamilyKind) -> Self {
        TestFamily {
            kind,
            center: default_center(),
            width: default_width(),
            separation: default_separation(),
            seed: 0,
            count: default_count(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v > 0.0 && v < 0.9;
        if !ok(self.center) || !ok(self.width) || !(self.separation >= 0.0 && self.separation < 0.9) {
            return Err(LabError::Domain(format!(
                "family center, width in (0, 0.9) and separation in [0, 0.9) required, got {}, {}, {}",
                self.center, self.width, self.separation
            )));
        }
        if self.count == 0 {
            return Err(LabError::Domain("family needs at least one member".into()));
        }
        Ok(())
    }

    /// Generator for member `m`, independent of every other member.
    pub fn rng(&self, m: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(m as u64 + 1);
        rng
    }

    /// The factors of member `m` on a band `[-band, band]`, one per role.
    pub fn member(&self, band: f64, roles: &[Role], m: usize) -> Vec<MemberField> {
        let mut rng = self.rng(m);
        roles.iter().map(|role| self.field(&mut rng, band, role)).collect()
    }

    fn field(&self, rng: &mut ChaCha8Rng, band: f64, role: &Role) -> MemberField {
        let sign = role.sign.unwrap_or(if rng.gen_bool(0.5) { 1.0 } else { -1.0 });
        let w = self.width * band * role.narrow * rng.gen_range(0.6..1.4);
        let c = if role.scale == 0.0 {
            w * rng.gen_range(-0.5..0.5)
        } else {
            sign * (role.scale * self.center * band * rng.gen_range(0.75..1.25)).min(0.75 * band)
        };
        let shape = match self.kind {
            FamilyKind::Gaussian => Shape::Gaussian { c, w },
            FamilyKind::WavePacket => Shape::Packet {
                c,
                w,
                x0: rng.gen_range(-4.0..4.0) / w,
            },
            FamilyKind::DyadicBump if role.scale == 0.0 => {
                // low-frequency ball |xi| < 2^j
                let hi = 2f64.powf((2.0 * self.width * band * role.narrow).log2().ceil());
                Shape::Bump { lo: -hi, hi, sign }
            }
            FamilyKind::DyadicBump => {
                let floor = (self.width * band * role.narrow).max(role.hole * band * 2.0);
                let top = 0.45 * band;
                let j = c.abs().max(floor).min(top).log2().floor();
                let lo = 2f64.powf(j).clamp(floor.min(top * 0.5), top * 0.5);
                Shape::Bump { lo, hi: 2.0 * lo, sign }
            }
            FamilyKind::RandomPhase => {
                let mut modes = [(0.0, 0.0, 0.0); 3];
                for md in &mut modes {
                    *md = (rng.gen_range(0.5..2.0), rng.gen_range(0.5..1.5) / w, rng.gen_range(0.0..2.0 * PI));
                }
                Shape::Phase { c, w, modes }
            }
            FamilyKind::TwoBumpSeparated => {
                let d = 0.5 * self.separation * band * role.scale.max(0.25);
                Shape::TwoBump {
                    c1: c - d,
                    c2: c + d,
                    w: if role.scale == 0.0 { w } else { 0.7 * w },
                    rel: C64::from_polar(rng.gen_range(0.5..1.5), rng.gen_range(0.0..2.0 * PI)),
                }
            }
        };
        let amp = C64::from_polar(rng.gen_range(0.5..2.0), rng.gen_range(0.0..2.0 * PI));
        MemberField {
            shape,
            amp,
            band,
            hole: role.hole * band,
        }
    }
}
