//! Piecewise-polynomial solutions in the interaction variable
//! `v(t, xi) = exp(-i t xi^3) u^(t, xi)`.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{LabError, Result};
use crate::field::{forward_x, inverse_x, Dims, Side, SpectralField, C64};
use crate::grid::{window, Grid};
use crate::multiplier::{airy_phase, bracket};
use crate::norms::{LpAccumulator, XsbParams};
use crate::quad::PanelRule;

pub const NODES: usize = 8;

/// `-sign i xi exp(-i t xi^3) F(u^3)` with `u = F^-1(exp(i t xi^3) v)`;
/// the cube is formed on a twice finer grid, so no aliasing reaches the
/// retained modes. The unpaired mode `-n/2` is kept at zero.
#[derive(Debug, Clone)]
pub struct Nonlinearity {
    grid: Grid,
    pad: Grid,
    sign: f64,
}

impl Nonlinearity {
    pub fn new(grid: Grid, sign: f64) -> Result<Self> {
        let pad = Grid::spatial(2 * grid.n_x, grid.length)?;
        Ok(Nonlinearity { grid, pad, sign })
    }

    pub fn eval(&self, t: f64, v: &[C64]) -> Vec<C64> {
        let n = self.grid.n_x;
        let mut out = vec![C64::new(0.0, 0.0); n];
        if self.sign == 0.0 {
            return out;
        }
        let mut buf = vec![C64::new(0.0, 0.0); 2 * n];
        for k in 1..n {
            buf[k + n / 2] = v[k] * airy_phase(self.grid.xi(k), t);
        }
        inverse_x(&self.pad, &mut buf);
        buf.iter_mut().for_each(|z| *z = *z * *z * *z);
        forward_x(&self.pad, &mut buf);
        for k in 1..n {
            let xi = self.grid.xi(k);
            out[k] = C64::new(0.0, -self.sign * xi) * airy_phase(xi, t).conj() * buf[k + n / 2];
        }
        out
    }
}

/// Collocation solution on `[t0, t0 + span]`: `panels` equal panels with
/// `NODES` Gauss nodes each. On panel `p`,
/// `v(t0 + h (p + s)) = start_p + h sum_j B_j(s) rate_j` with `B_j` the
/// integrated Lagrange basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub grid: Grid,
    pub t0: f64,
    pub span: f64,
    pub panels: usize,
    /// `panels + 1` rows: `v` at the panel edges.
    pub starts: Vec<Vec<C64>>,
    /// `panels * NODES` rows: `v` at the nodes.
    pub values: Vec<Vec<C64>>,
    /// `panels * NODES` rows: `dv/dt` at the nodes.
    pub rates: Vec<Vec<C64>>,
}

thread_local! {
    static RULE: PanelRule = PanelRule::new(NODES);
}

pub(crate) fn with_rule<R>(f: impl FnOnce(&PanelRule) -> R) -> R {
    RULE.with(f)
}

/// `int_0^s l_j`, exact for the degree `NODES - 1` basis.
fn integrated_basis(rule: &PanelRule, s: f64) -> Vec<f64> {
    let mut out = vec![0.0; rule.len()];
    for (xk, wk) in rule.nodes.iter().zip(&rule.weights) {
        for (o, b) in out.iter_mut().zip(rule.basis(s * xk)) {
            *o += wk * s * b;
        }
    }
    out
}

impl Trajectory {
    /// The free flow: `v = u0^` at all times.
    pub fn free(u0: &[C64], grid: Grid, t0: f64, span: f64, panels: usize) -> Self {
        let zero = vec![C64::new(0.0, 0.0); u0.len()];
        Trajectory {
            grid,
            t0,
            span,
            panels,
            starts: vec![u0.to_vec(); panels + 1],
            values: vec![u0.to_vec(); panels * NODES],
            rates: vec![zero; panels * NODES],
        }
    }

    pub fn h(&self) -> f64 {
        self.span / self.panels as f64
    }

    pub fn node_time(&self, i: usize) -> f64 {
        let h = self.h();
        with_rule(|r| self.t0 + h * ((i / NODES) as f64 + r.nodes[i % NODES]))
    }

    pub fn end(&self) -> &[C64] {
        &self.starts[self.panels]
    }

    /// Panel index and local coordinate of `t`, clamped to the interval.
    fn locate(&self, t: f64) -> (usize, f64) {
        let x = ((t - self.t0) / self.h()).clamp(0.0, self.panels as f64);
        let p = (x.floor() as usize).min(self.panels - 1);
        (p, x - p as f64)
    }

    /// `v(t)`; before and after the interval the free flow continues.
    pub fn interaction_at(&self, t: f64) -> Vec<C64> {
        let (p, s) = self.locate(t);
        if s == 0.0 {
            return self.starts[p].clone();
        }
        let b = with_rule(|r| integrated_basis(r, s));
        let h = self.h();
        let mut out = self.starts[p].clone();
        for (j, bj) in b.iter().enumerate() {
            let rate = &self.rates[p * NODES + j];
            out.iter_mut().zip(rate).for_each(|(o, q)| *o += q * (h * bj));
        }
        out
    }

    /// `dv/dt` of the collocation polynomial at `t` inside the interval.
    pub fn rate_at(&self, t: f64) -> Vec<C64> {
        let (p, s) = self.locate(t);
        let l = with_rule(|r| r.basis(s));
        let mut out = vec![C64::new(0.0, 0.0); self.grid.n_x];
        for (j, lj) in l.iter().enumerate() {
            let rate = &self.rates[p * NODES + j];
            out.iter_mut().zip(rate).for_each(|(o, q)| *o += q * *lj);
        }
        out
    }

    /// `u^(t)` as a 1D frequency field.
    pub fn at(&self, t: f64) -> Result<SpectralField> {
        let v = self.interaction_at(t);
        let vals = v.iter().enumerate().map(|(k, z)| z * airy_phase(self.grid.xi(k), t)).collect();
        SpectralField::from_values(self.grid, Dims::One, Side::Frequency, vals)
    }

    /// Row-wise `self - other`; both must share grid and panels.
    pub fn sub(&self, other: &Trajectory) -> Result<Trajectory> {
        if self.panels != other.panels || !self.grid.same_space(&other.grid) || self.span != other.span {
            return Err(LabError::GridMismatch("trajectories differ in grid or panels".into()));
        }
        let diff = |a: &[Vec<C64>], b: &[Vec<C64>]| -> Vec<Vec<C64>> {
            a.iter().zip(b).map(|(x, y)| x.iter().zip(y).map(|(p, q)| p - q).collect()).collect()
        };
        Ok(Trajectory {
            grid: self.grid,
            t0: self.t0,
            span: self.span,
            panels: self.panels,
            starts: diff(&self.starts, &other.starts),
            values: diff(&self.values, &other.values),
            rates: diff(&self.rates, &other.rates),
        })
    }
}

/// One Picard update: rates from the nonlinearity at the current node
/// values, then the Duhamel integral `v = u0^ + int rate` panel by panel.
pub fn picard_update(cur: &Trajectory, u0: &[C64], nl: &Nonlinearity) -> Trajectory {
    let rates: Vec<Vec<C64>> = (0..cur.values.len())
        .into_par_iter()
        .map(|i| nl.eval(cur.node_time(i), &cur.values[i]))
        .collect();
    integrate_rates(cur, u0, rates)
}

fn integrate_rates(cur: &Trajectory, u0: &[C64], rates: Vec<Vec<C64>>) -> Trajectory {
    let n = u0.len();
    let h = cur.h();
    let mut starts = Vec::with_capacity(cur.panels + 1);
    let mut values = Vec::with_capacity(cur.values.len());
    starts.push(u0.to_vec());
    with_rule(|rule| {
        for p in 0..cur.panels {
            let start = starts[p].clone();
            for i in 0..NODES {
                let mut v = start.clone();
                for (j, a) in rule.integrate[i].iter().enumerate() {
                    let q = &rates[p * NODES + j];
                    v.iter_mut().zip(q).for_each(|(o, z)| *o += z * (h * a));
                }
                values.push(v);
            }
            let mut end = start;
            for (j, w) in rule.weights.iter().enumerate() {
                let q = &rates[p * NODES + j];
                end.iter_mut().zip(q).for_each(|(o, z)| *o += z * (h * w));
            }
            debug_assert_eq!(end.len(), n);
            starts.push(end);
        }
    });
    Trajectory {
        grid: cur.grid,
        t0: cur.t0,
        span: cur.span,
        panels: cur.panels,
        starts,
        values,
        rates,
    }
}

/// The fixed extension used to measure trajectories: `n_t` samples of the
/// free-flow continuation on a window of length `t_window` starting a
/// quarter window before `t0`, multiplied by the plateau taper.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XWindow {
    pub t_start: f64,
    pub t_window: f64,
    pub n_t: usize,
}

impl XWindow {
    pub fn around(traj: &Trajectory, t_window: f64, n_t: usize) -> Self {
        let lo = traj.t0.min(traj.t0 + traj.span);
        XWindow {
            t_start: lo - 0.25 * t_window,
            t_window,
            n_t,
        }
    }

    pub fn time(&self, m: usize) -> f64 {
        self.t_start + self.t_window * m as f64 / self.n_t as f64
    }

    /// Windowed samples of `v`, row per time.
    pub fn sample(&self, traj: &Trajectory) -> Vec<Vec<C64>> {
        (0..self.n_t)
            .into_par_iter()
            .map(|m| {
                let t = self.time(m);
                let w = window(t - self.t_start, self.t_window);
                if w == 0.0 {
                    return vec![C64::new(0.0, 0.0); traj.grid.n_x];
                }
                traj.interaction_at(t).into_iter().map(|z| z * w).collect()
            })
            .collect()
    }

    /// `|| <xi>^s <sigma>^b F_t(w v) ||_{L^{r'}}`: the restriction norm of
    /// the windowed extension in the co-moving frame.
    pub fn norm(&self, grid: &Grid, samples: &[Vec<C64>], p: &XsbParams) -> f64 {
        let n_t = self.n_t;
        let dt = self.t_window / n_t as f64;
        let dsigma = 2.0 * PI / self.t_window;
        let fft = crate::field::fft_forward(n_t);
        let mut acc = LpAccumulator::new(p.r_prime());
        let mut col = vec![C64::new(0.0, 0.0); n_t];
        for k in 0..grid.n_x {
            col.iter_mut().zip(samples).for_each(|(c, row)| *c = row[k]);
            if col.iter().all(|z| z.norm() == 0.0) {
                continue;
            }
            fft.process(&mut col);
            let wx = bracket(grid.xi(k)).powf(p.s);
            for (l, z) in col.iter().enumerate() {
                // FFT bins in natural order: l and l - n_t are the same sigma
                let idx = if l < n_t / 2 { l as f64 } else { l as f64 - n_t as f64 };
                let sigma = idx * dsigma;
                acc.push(wx * bracket(sigma).powf(p.b) * z.norm() * dt / (2.0 * PI).sqrt(), grid.dxi() * dsigma);
            }
        }
        acc.finish()
    }

    pub fn measure(&self, traj: &Trajectory, p: &XsbParams) -> f64 {
        self.norm(&traj.grid, &self.sample(traj), p)
    }
}

/// Row-wise difference of two sample sets.
pub fn sample_diff(a: &[Vec<C64>], b: &[Vec<C64>]) -> Vec<Vec<C64>> {
    a.iter().zip(b).map(|(x, y)| x.iter().zip(y).map(|(p, q)| p - q).collect()).collect()
}
