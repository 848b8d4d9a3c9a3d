use serde::{Deserialize, Serialize};

use super::trajectory::{picard_update, sample_diff, Nonlinearity, Trajectory, XWindow, NODES};
use super::SolverConfig;
use crate::error::{LabError, Result};
use crate::field::{Dims, SpectralField, C64};
use crate::grid::Grid;
use crate::norms::{fl_norm, FLParams, LpAccumulator};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveVerdict {
    Converged,
    Diverged,
    MaxIter,
}

#[derive(Debug, Clone)]
pub struct SolverState {
    /// Final iterate on the finest mesh.
    pub trajectory: Trajectory,
    /// Successive differences over the norm of the free flow.
    pub history: Vec<f64>,
    pub contraction_factors: Vec<f64>,
    /// Picard steps on the finest mesh.
    pub iterations: usize,
    pub verdict: SolveVerdict,
    /// Largest `L^2_xi` defect of `v' = N(v)` at off-node times.
    pub residual: f64,
    pub panels: usize,
    /// Relative change of the solution under the last step halving.
    pub refinement_change: f64,
    /// Mode with the largest last difference when the iteration diverged.
    pub divergent_xi: Option<f64>,
    /// Windowed restriction norm of the solution.
    pub norm: f64,
}

/// Consecutive growing differences after burn-in that end the iteration.
const GROWTH_STREAK: usize = 4;
const BURN_IN: usize = 3;
const BLOWUP: f64 = 1e6;

fn data(u0: &SpectralField) -> Result<(Grid, Vec<C64>)> {
    if u0.dims() != Dims::One {
        return Err(LabError::Shape("solver data must be 1D".into()));
    }
    let f = u0.to_frequency()?;
    let mut v = f.values().to_vec();
    if let Some(bad) = v.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(LabError::Range {
            mode: bad,
            xi: f.grid().xi(bad),
        });
    }
    // the unpaired mode -n/2 is not evolved
    v[0] = C64::new(0.0, 0.0);
    Ok((*f.grid(), v))
}

/// `t -> exp(-t d^3) u0 - sign int_0^t exp(-(t - t') d^3) d_x(u^3)(t') dt'`
/// for the trajectory `u`, by Gauss-Legendre collocation on its panels.
pub fn duhamel_step(u: &Trajectory, u0: &SpectralField, cfg: &SolverConfig) -> Result<Trajectory> {
    let (grid, v0) = data(u0)?;
    if !grid.same_space(&u.grid) {
        return Err(LabError::GridMismatch("data and trajectory grids differ".into()));
    }
    let nl = Nonlinearity::new(grid, cfg.sign)?;
    Ok(picard_update(u, &v0, &nl))
}

struct Run {
    traj: Trajectory,
    history: Vec<f64>,
    factors: Vec<f64>,
    verdict: SolveVerdict,
    divergent_xi: Option<f64>,
}

fn iterate(grid: Grid, v0: &[C64], cfg: &SolverConfig, span: f64, panels: usize) -> Result<Run> {
    let nl = Nonlinearity::new(grid, cfg.sign)?;
    let mut cur = Trajectory::free(v0, grid, 0.0, span, panels);
    let win = XWindow::around(&cur, cfg.t_window(), cfg.window_samples);
    let mut prev = win.sample(&cur);
    let scale = win.norm(&grid, &prev, &cfg.params).max(f64::MIN_POSITIVE);
    let mut history = Vec::new();
    let mut factors = Vec::new();
    let mut streak = 0;
    for it in 1..=cfg.max_iter {
        let next = picard_update(&cur, v0, &nl);
        let samples = win.sample(&next);
        let d = win.norm(&grid, &sample_diff(&samples, &prev), &cfg.params) / scale;
        if let Some(&last) = history.last() {
            let q: f64 = d / last;
            factors.push(q);
            streak = if q >= 1.0 && it > BURN_IN { streak + 1 } else { 0 };
        }
        history.push(d);
        if !d.is_finite() || d > BLOWUP || streak >= GROWTH_STREAK {
            let diff = next.sub(&cur)?;
            let end = diff.end();
            let k = (0..end.len()).max_by(|&a, &b| end[a].norm().total_cmp(&end[b].norm())).unwrap_or(0);
            return Ok(Run {
                traj: next,
                history,
                factors,
                verdict: SolveVerdict::Diverged,
                divergent_xi: Some(grid.xi(k)),
            });
        }
        cur = next;
        prev = samples;
        if d < cfg.tol {
            return Ok(Run {
                traj: cur,
                history,
                factors,
                verdict: SolveVerdict::Converged,
                divergent_xi: None,
            });
        }
    }
    Ok(Run {
        traj: cur,
        history,
        factors,
        verdict: SolveVerdict::MaxIter,
        divergent_xi: None,
    })
}

/// Largest `L^2_xi` defect between the collocation polynomial's derivative
/// and the vector field, at four interior points of every panel.
fn residual(traj: &Trajectory, nl: &Nonlinearity) -> f64 {
    let h = traj.h();
    let mut worst = 0.0f64;
    for p in 0..traj.panels {
        for s in [0.125, 0.375, 0.625, 0.875] {
            let t = traj.t0 + h * (p as f64 + s);
            let v = traj.interaction_at(t);
            let want = nl.eval(t, &v);
            let got = traj.rate_at(t);
            let mut acc = LpAccumulator::new(2.0);
            for (a, b) in got.iter().zip(&want) {
                acc.push((a - b).norm(), traj.grid.dxi());
            }
            worst = worst.max(acc.finish());
        }
    }
    worst
}

fn solve_span(u0: &SpectralField, cfg: &SolverConfig, span: f64) -> Result<SolverState> {
    cfg.validate()?;
    let (grid, v0) = data(u0)?;
    let mut panels = cfg.panels;
    let mut run = iterate(grid, &v0, cfg, span, panels)?;
    let mut change = f64::NAN;
    while run.verdict == SolveVerdict::Converged && panels * 2 <= cfg.max_panels {
        let fine = iterate(grid, &v0, cfg, span, panels * 2)?;
        let win = XWindow::around(&fine.traj, cfg.t_window(), cfg.window_samples);
        let a = win.sample(&run.traj);
        let b = win.sample(&fine.traj);
        let scale = win.norm(&grid, &b, &cfg.params).max(f64::MIN_POSITIVE);
        change = win.norm(&grid, &sample_diff(&a, &b), &cfg.params) / scale;
        panels *= 2;
        run = fine;
        if change < 0.1 * cfg.tol {
            break;
        }
    }
    let nl = Nonlinearity::new(grid, cfg.sign)?;
    let converged = run.verdict == SolveVerdict::Converged;
    let res = if converged { residual(&run.traj, &nl) } else { f64::NAN };
    let win = XWindow::around(&run.traj, cfg.t_window(), cfg.window_samples);
    let norm = win.measure(&run.traj, &cfg.params);
    Ok(SolverState {
        iterations: run.history.len(),
        trajectory: run.traj,
        history: run.history,
        contraction_factors: run.factors,
        verdict: run.verdict,
        residual: res,
        panels,
        refinement_change: change,
        divergent_xi: run.divergent_xi,
        norm,
    })
}

/// Picard iteration from the free flow on `[0, delta]`.
pub fn picard_solve(u0: &SpectralField, cfg: &SolverConfig) -> Result<SolverState> {
    solve_span(u0, cfg, cfg.delta)
}

/// The same iteration on `[-delta, 0]`.
pub fn picard_solve_backward(u0: &SpectralField, cfg: &SolverConfig) -> Result<SolverState> {
    solve_span(u0, cfg, -cfg.delta)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LipschitzRatio {
    pub ratio: f64,
    pub solution_distance: f64,
    pub data_distance: f64,
    /// Set when the data coincide and the ratio is `0` by convention.
    pub degenerate: bool,
}

/// Distance of the solutions in the windowed restriction norm over the
/// `H^r_s` distance of the data.
pub fn flowmap_lipschitz_probe(u0: &SpectralField, v0: &SpectralField, cfg: &SolverConfig) -> Result<LipschitzRatio> {
    let fl = FLParams::new(cfg.params.r, cfg.params.s)?;
    let diff = u0.to_frequency()?.sub(&v0.to_frequency()?)?;
    let data_distance = fl_norm(&diff, &fl)?;
    if data_distance == 0.0 {
        return Ok(LipschitzRatio {
            ratio: 0.0,
            solution_distance: 0.0,
            data_distance,
            degenerate: true,
        });
    }
    let a = picard_solve(u0, cfg)?;
    let b = picard_solve(v0, cfg)?;
    for (name, st) in [("first", &a), ("second", &b)] {
        if st.verdict != SolveVerdict::Converged {
            return Err(LabError::Numerical(format!("{name} solve ended {:?}", st.verdict)));
        }
    }
    let win = XWindow::around(&a.trajectory, cfg.t_window(), cfg.window_samples);
    let d = sample_diff(&win.sample(&a.trajectory), &win.sample(&b.trajectory));
    let solution_distance = win.norm(&a.trajectory.grid, &d, &cfg.params);
    Ok(LipschitzRatio {
        ratio: solution_distance / data_distance,
        solution_distance,
        data_distance,
        degenerate: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConservationReport {
    pub mass: f64,
    pub l2: f64,
    /// Largest `|int u dx (t) - int u dx (0)|` over the panel edges.
    pub mass_drift: f64,
    /// Largest `|int u^2 dx (t) - int u^2 dx (0)|` over the panel edges.
    pub l2_drift: f64,
}

/// Drift of the mass and of the `L^2` norm along a converged run.
pub fn conservation_check(state: &SolverState) -> Result<ConservationReport> {
    if state.verdict != SolveVerdict::Converged {
        return Err(LabError::Numerical("conservation needs a converged state".into()));
    }
    let traj = &state.trajectory;
    let g = traj.grid;
    let mid = g.n_x / 2;
    let mass = |v: &[C64]| (2.0 * std::f64::consts::PI).sqrt() * v[mid];
    let l2 = |v: &[C64]| v.iter().map(|z| z.norm_sqr()).sum::<f64>() * g.dxi();
    let (m0, e0) = (mass(&traj.starts[0]), l2(&traj.starts[0]));
    let mut report = ConservationReport {
        mass: m0.re,
        l2: e0,
        mass_drift: 0.0,
        l2_drift: 0.0,
    };
    for v in &traj.starts[1..] {
        report.mass_drift = report.mass_drift.max((mass(v) - m0).norm());
        report.l2_drift = report.l2_drift.max((l2(v) - e0).abs());
    }
    debug_assert_eq!(traj.values.len(), traj.panels * NODES);
    Ok(report)
}
