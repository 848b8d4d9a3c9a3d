//! The six experiments. Each fills a [`Report`] row by row so a numerical
//! failure still leaves the rows computed before it.

use std::f64::consts::PI;

use airy_lab::estimate::{probe, resonant_sup, t2c_exponents, EstimateReport, Verdict};
use airy_lab::estimate::exponents::t2c_remark_bundle;
use airy_lab::multiplier::bracket;
use airy_lab::norms::{fl_norm, lifespan_exponent, scaling_sigma, sr_threshold, FLParams};
use airy_lab::quad::integrate_adaptive;
use airy_lab::solver::{conservation_check, lifespan_experiment, picard_solve, SolveVerdict};
use airy_lab::{Grid, LabError, Result, SpectralField, C64};
use serde_json::{json, Value};

use crate::config::{self, DataConfig, DataKind, Experiment, ExperimentConfig, GridConfig};
use crate::report::{num, Report};

pub const NORM_SUITE_COLUMNS: &[&str] = &[
    "check", "profile", "r", "s", "grid", "seed", "value", "reference", "rel_err", "verdict",
];
pub const PROBE_COLUMNS: &[&str] = &["estimate_id", "r", "s", "b", "grid_n", "max_ratio", "growth", "verdict"];
pub const EXPONENTS_COLUMNS: &[&str] = &["quantity", "r", "value", "reference", "verdict"];
pub const RESONANT_COLUMNS: &[&str] = &["kind", "xi", "eps", "tau_star", "value", "verdict"];
pub const SOLVE_COLUMNS: &[&str] = &[
    "profile", "r", "s", "b", "delta", "sign", "grid", "seed", "panels", "iterations", "verdict", "residual",
    "mass_drift", "l2_drift", "norm",
];
pub const LIFESPAN_COLUMNS: &[&str] = &[
    "kind", "lambda", "r", "s", "b", "grid", "seed", "norm", "delta_star", "slope", "predicted", "verdict",
];

pub fn columns(e: Experiment) -> &'static [&'static str] {
    match e {
        Experiment::NormSuite => NORM_SUITE_COLUMNS,
        Experiment::Probe => PROBE_COLUMNS,
        Experiment::Exponents => EXPONENTS_COLUMNS,
        Experiment::ResonantIntegral => RESONANT_COLUMNS,
        Experiment::Solve => SOLVE_COLUMNS,
        Experiment::Lifespan => LIFESPAN_COLUMNS,
    }
}

pub fn run(cfg: &ExperimentConfig, report: &mut Report) -> Result<()> {
    match cfg.experiment {
        Experiment::NormSuite => norm_suite(cfg, report),
        Experiment::Probe => probe_run(cfg, report),
        Experiment::Exponents => exponents(cfg, report),
        Experiment::ResonantIntegral => resonant(cfg, report),
        Experiment::Solve => solve(cfg, report),
        Experiment::Lifespan => lifespan(cfg, report),
    }
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn grid_of(g: GridConfig) -> Result<Grid> {
    Grid::spatial(g.n, g.length)
}

fn profile_name(d: &DataConfig) -> &'static str {
    match d.kind {
        DataKind::Gaussian => "gaussian",
        DataKind::Sech => "sech",
        DataKind::Zero => "zero",
    }
}

pub fn data_field(grid: Grid, d: &DataConfig) -> Result<SpectralField> {
    if !(d.width > 0.0 && d.width.is_finite() && d.amplitude.is_finite() && d.center.is_finite()) {
        return Err(LabError::Domain("data needs a positive width and finite amplitude".into()));
    }
    let DataConfig {
        amplitude: a,
        width: w,
        center: c,
        ..
    } = *d;
    let f: Box<dyn Fn(f64) -> f64> = match d.kind {
        DataKind::Gaussian => Box::new(move |x| a * (-(x - c).powi(2) / (2.0 * w * w)).exp()),
        DataKind::Sech => Box::new(move |x| a / ((x - c) / w).cosh()),
        DataKind::Zero => Box::new(|_| 0.0),
    };
    Ok(SpectralField::from_physical_fn(grid, |x| C64::new(f(x), 0.0)))
}

/// `|u^(xi)|` of the data on the line, in the unitary convention.
fn data_transform_abs(d: &DataConfig, xi: f64) -> f64 {
    let (a, w) = (d.amplitude.abs(), d.width);
    match d.kind {
        DataKind::Gaussian => a * w * (-(w * xi).powi(2) / 2.0).exp(),
        DataKind::Sech => a * w * (PI / 2.0).sqrt() / (PI * w * xi / 2.0).cosh(),
        DataKind::Zero => 0.0,
    }
}

/// `|| <xi>^s u^ ||_{L^{r'}}` by adaptive quadrature of the transform on
/// the line, independent of the grid.
fn reference_norm(d: &DataConfig, r: f64, s: f64) -> Result<f64> {
    let rp = r / (r - 1.0);
    let edge = 60.0 / d.width;
    let mut total = 0.0;
    let mut lo = -edge;
    // unit panels keep the peak resolved for narrow and wide data alike
    let step = 1.0 / d.width;
    while lo < edge {
        let hi = (lo + step).min(edge);
        let (v, _) = integrate_adaptive(
            |xi: f64| (bracket(xi).powf(s) * data_transform_abs(d, xi)).powf(rp),
            lo,
            hi,
            0.0,
            1e-14,
            400,
        )?;
        total += v;
        lo = hi;
    }
    Ok(total.powf(1.0 / rp))
}

fn rel_err(v: f64, reference: f64) -> f64 {
    if reference == 0.0 {
        v.abs()
    } else {
        (v - reference).abs() / reference.abs()
    }
}

fn norm_suite(cfg: &ExperimentConfig, report: &mut Report) -> Result<()> {
    let g = cfg.grid.unwrap_or_default();
    let grid = grid_of(g)?;
    let data = cfg.data.unwrap_or_default();
    let nc = cfg.norms.clone().unwrap_or_default();
    let u = data_field(grid, &data)?;
    let name = profile_name(&data);
    let fp = grid.fingerprint();
    let row = |report: &mut Report, check: &str, r: f64, s: f64, v: f64, reference: f64, tol: f64| {
        let e = rel_err(v, reference);
        report.push(vec![
            check.into(),
            name.into(),
            num(r),
            num(s),
            fp.clone(),
            cfg.seed.to_string(),
            num(v),
            num(reference),
            num(e),
            verdict(e <= tol).into(),
        ]);
    };
    for &r in &nc.r {
        for &s in &nc.s {
            let v = fl_norm(&u, &FLParams::new(r, s)?)?;
            row(report, "quadrature", r, s, v, reference_norm(&data, r, s)?, nc.tol);
        }
    }
    let l2 = fl_norm(&u, &FLParams::new(2.0, 0.0)?)?;
    let phys = u.to_physical()?;
    let direct = (phys.values().iter().map(|z| z.norm_sqr()).sum::<f64>() * grid.dx()).sqrt();
    row(report, "plancherel", 2.0, 0.0, l2, direct, 1e-12);
    if data.kind == DataKind::Gaussian {
        let closed = data.amplitude.abs() * data.width.sqrt() * PI.powf(0.25);
        row(report, "closed_form", 2.0, 0.0, l2, closed, 1e-6);
    }
    report.detail.insert("grid".into(), json!(grid));
    report.detail.insert("data".into(), json!(data));
    Ok(())
}

fn probe_run(cfg: &ExperimentConfig, report: &mut Report) -> Result<()> {
    let spec = cfg.spec.clone().unwrap_or_else(config::default_spec);
    let mut family = cfg.family.clone().unwrap_or_else(|| config::default_family(cfg.seed));
    family.seed = cfg.seed;
    let pc = cfg.probe.clone().unwrap_or_default();
    let band = pc.band.unwrap_or_else(|| spec.id.default_band());
    if !(band > 0.0 && band.is_finite()) {
        return Err(LabError::Domain(format!("band must be positive, got {band}")));
    }
    let grids = pc
        .sizes
        .iter()
        .map(|&n| Grid::spatial(n, n as f64 * PI / band))
        .collect::<Result<Vec<_>>>()?;
    report.detail.insert("spec".into(), json!(spec));
    let rep: EstimateReport = probe(&spec, &family, &grids)?;
    let e = &rep.exponents;
    for (i, rf) in rep.refinements.iter().enumerate() {
        let growth = if i == 0 { String::new() } else { num(rep.growth[i - 1]) };
        report.push(vec![
            rep.id.name().into(),
            num(e.r),
            num(e.s),
            num(e.b),
            rf.grid_n.to_string(),
            num(rf.max_ratio),
            growth,
            rep.verdict.to_string(),
        ]);
    }
    report.pass &= rep.verdict == Verdict::Pass;
    report.detail.insert("band".into(), json!(band));
    report.detail.insert(
        "grids".into(),
        json!(grids.iter().map(|g| g.fingerprint()).collect::<Vec<_>>()),
    );
    report.detail.insert("report".into(), json!(rep));
    Ok(())
}

fn exponents(cfg: &ExperimentConfig, report: &mut Report) -> Result<()> {
    let ec = cfg.exponents.clone().unwrap_or_default();
    let row = |q: &str, r: f64, v: f64, reference: Option<f64>, ok: Option<bool>| {
        let ok = ok.or(reference.map(|x| (v - x).abs() <= 1e-12));
        vec![
            q.to_string(),
            num(r),
            num(v),
            reference.map(num).unwrap_or_default(),
            ok.map(|b| verdict(b).to_string()).unwrap_or_else(|| "-".into()),
        ]
    };
    report.push(row("scaling_sigma_at_s0", 1.0, scaling_sigma(0.0, 1.0), Some(-0.5), None));
    let mut bundles = Vec::new();
    for &r in &ec.r {
        let sr = sr_threshold(r)?;
        report.push(row("s_threshold", r, sr, (r == 2.0).then_some(0.25), None));
        report.push(row("scaling_sigma_at_threshold", r, scaling_sigma(sr, r), None, None));
        report.push(row("lifespan_exponent", r, lifespan_exponent(r)?, (r == 2.0).then_some(-4.0), None));
        let b = t2c_exponents(r)?;
        let viol = b.violations();
        report.push(row("t2c_s0", r, b.s0, None, None));
        report.push(row("t2c_s1", r, b.s1, None, None));
        report.push(row("t2c_s0_plus_2s1", r, b.s0 + 2.0 * b.s1, Some(1.0 / r), None));
        report.push(row("t2c_constraints_violated", r, viol.len() as f64, None, Some(viol.is_empty())));
        if r >= 2.0 {
            let rem = t2c_remark_bundle(r);
            report.push(row("remark_s0", r, rem.s0, Some(1.0 / (3.0 * r)), None));
            report.push(row("remark_constraints_violated", r, rem.violations().len() as f64, None, Some(rem.violations().is_empty())));
        }
        bundles.push(json!({ "r": r, "bundle": b, "violations": viol }));
    }
    report.detail.insert("t2c".into(), Value::Array(bundles));
    Ok(())
}

fn resonant(cfg: &ExperimentConfig, report: &mut Report) -> Result<()> {
    let rc = cfg.resonant.clone().unwrap_or_default();
    if rc.xi.len() < 2 {
        return Err(LabError::Domain("slope needs at least two frequencies".into()));
    }
    let mut pts = Vec::new();
    for &xi in &rc.xi {
        let (tau, v) = resonant_sup(xi, rc.eps)?;
        report.push(vec!["sup".into(), num(xi), num(rc.eps), num(tau), num(v), "-".into()]);
        pts.push((xi, v));
    }
    // the same least-squares fit as resonant_slope, on the values above
    let xs: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
    let slope = fit(&xs, &ys);
    let ok = slope <= rc.max_slope;
    report.push(vec!["slope".into(), String::new(), num(rc.eps), String::new(), num(slope), verdict(ok).into()]);
    report.detail.insert("slope".into(), json!(slope));
    report.detail.insert("max_slope".into(), json!(rc.max_slope));
    Ok(())
}

pub fn fit(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

fn solve(cfg: &ExperimentConfig, report: &mut Report) -> Result<()> {
    let sc = cfg.solver.clone().unwrap_or_else(config::default_solver);
    sc.validate()?;
    let grid = grid_of(cfg.grid.unwrap_or_default())?;
    let data = cfg.data.unwrap_or_default();
    let u0 = data_field(grid, &data)?;
    let st = picard_solve(&u0, &sc)?;
    let converged = st.verdict == SolveVerdict::Converged;
    let cons = if converged { Some(conservation_check(&st)?) } else { None };
    let p = sc.params;
    let verdict_name = match st.verdict {
        SolveVerdict::Converged => "converged",
        SolveVerdict::Diverged => "diverged",
        SolveVerdict::MaxIter => "max_iter",
    };
    report.push(vec![
        profile_name(&data).into(),
        num(p.r),
        num(p.s),
        num(p.b),
        num(sc.delta),
        num(sc.sign),
        grid.fingerprint(),
        cfg.seed.to_string(),
        st.panels.to_string(),
        st.iterations.to_string(),
        verdict_name.into(),
        num(st.residual),
        cons.map(|c| num(c.mass_drift)).unwrap_or_default(),
        cons.map(|c| num(c.l2_drift)).unwrap_or_default(),
        num(st.norm),
    ]);
    report.pass &= converged;
    report.detail.insert("solver".into(), json!(sc));
    report.detail.insert("data".into(), json!(data));
    report.detail.insert("grid".into(), json!(grid));
    report.detail.insert(
        "state".into(),
        json!({
            "verdict": st.verdict,
            "iterations": st.iterations,
            "panels": st.panels,
            "history": st.history,
            "contraction_factors": st.contraction_factors,
            "residual": st.residual,
            "refinement_change": st.refinement_change,
            "divergent_xi": st.divergent_xi,
            "norm": st.norm,
            "conservation": cons,
        }),
    );
    Ok(())
}

fn lifespan(cfg: &ExperimentConfig, report: &mut Report) -> Result<()> {
    let sc = cfg.solver.clone().unwrap_or_else(config::default_lifespan_solver);
    sc.validate()?;
    let grid = grid_of(cfg.grid.unwrap_or_else(config::default_lifespan_grid))?;
    let data = cfg.data.unwrap_or_default();
    let lc = cfg.lifespan.clone().unwrap_or_default();
    let u0 = data_field(grid, &data)?;
    let rep = lifespan_experiment(&u0, &lc.lambdas, &sc)?;
    let p = sc.params;
    let [lo, hi] = lc.slope_range;
    let ok = rep.monotone && rep.slope >= lo && rep.slope <= hi;
    for pt in &rep.points {
        let g = Grid::spatial(grid.n_x, grid.length / pt.lambda)?;
        report.push(vec![
            "point".into(),
            num(pt.lambda),
            num(p.r),
            num(p.s),
            num(p.b),
            g.fingerprint(),
            cfg.seed.to_string(),
            num(pt.norm),
            num(pt.delta_star),
            String::new(),
            String::new(),
            "-".into(),
        ]);
    }
    report.push(vec![
        "fit".into(),
        String::new(),
        num(p.r),
        num(p.s),
        num(p.b),
        grid.fingerprint(),
        cfg.seed.to_string(),
        String::new(),
        String::new(),
        num(rep.slope),
        num(rep.predicted),
        verdict(ok).into(),
    ]);
    report.pass &= ok;
    report.detail.insert("solver".into(), json!(sc));
    report.detail.insert("data".into(), json!(data));
    report.detail.insert("slope_range".into(), json!(lc.slope_range));
    report.detail.insert("report".into(), json!(rep));
    Ok(())
}
