use airy_lab::estimate::{EstimateId, EstimateSpec};

use crate::config::{self, GridConfig, LifespanConfig, NormsConfig, ProbeConfig, ResonantConfig};
use crate::report::num;

pub struct Entry {
    pub id: String,
    pub anchor: &'static str,
    pub defaults: String,
}

fn anchor(id: EstimateId) -> &'static str {
    match id {
        EstimateId::Lemma1 => "Lemma 1",
        EstimateId::CorB1 => "Corollary 1",
        EstimateId::CorB2_204 => "Corollary 1, dual form with I_+",
        EstimateId::Fs20 => "Airy Fefferman-Stein estimate (quoted in the introduction)",
        EstimateId::Lemma2 => "Lemma 2",
        EstimateId::CorT1c => "Corollary to Lemma 2",
        EstimateId::Lemma3 => "Lemma 3",
        EstimateId::CorT2c => "Corollary to Lemma 3",
        EstimateId::Lemma4 => "Lemma 4",
        EstimateId::CorT3c => "Corollary to Lemma 4",
        EstimateId::Theorem2 => "Theorem 2",
    }
}

fn estimate_defaults(id: EstimateId) -> String {
    let p = ProbeConfig::default();
    let sizes: Vec<String> = p.sizes.iter().map(|n| n.to_string()).collect();
    let mut parts = vec![format!("sizes={}", sizes.join("/")), format!("band={}", num(id.default_band()))];
    match EstimateSpec::new(id).resolved() {
        Ok(e) => {
            let named = [
                ("r", e.r),
                ("s", e.s),
                ("b", e.b),
                ("b'", e.b_prime),
                ("p", e.p),
                ("q", e.q),
                ("r1", e.r1),
                ("r2", e.r2),
                ("rho", e.rho),
                ("beta", e.beta),
                ("s0", e.s0),
                ("s1", e.s1),
                ("s2", e.s2),
                ("p0", e.p0),
                ("p1", e.p1),
            ];
            parts.extend(named.iter().filter(|(_, v)| !v.is_nan()).map(|(k, v)| format!("{k}={}", num(*v))));
        }
        Err(err) => parts.push(format!("defaults rejected: {err}")),
    }
    parts.join(" ")
}

/// Every experiment id in byte order.
pub fn entries() -> Vec<Entry> {
    let mut out: Vec<Entry> = EstimateId::ALL
        .iter()
        .map(|&id| Entry {
            id: id.name().into(),
            anchor: anchor(id),
            defaults: format!("experiment=probe {}", estimate_defaults(id)),
        })
        .collect();
    let g = GridConfig::default();
    let sc = config::default_solver();
    let n = NormsConfig::default();
    let r = ResonantConfig::default();
    let l = LifespanConfig::default();
    let lg = config::default_lifespan_grid();
    let list = |v: &[f64]| v.iter().map(|x| num(*x)).collect::<Vec<_>>().join("/");
    out.push(Entry {
        id: "norm-suite".into(),
        anchor: "Fourier-Lebesgue data norms (introduction)",
        defaults: format!(
            "grid={}x{} data=gaussian r={} s={} tol={}",
            g.n,
            num(g.length),
            list(&n.r),
            list(&n.s),
            num(n.tol)
        ),
    });
    out.push(Entry {
        id: "exponents".into(),
        anchor: "Theorem 1 and Corollary to Lemma 3",
        defaults: format!("r={}", list(&config::ExponentsConfig::default().r)),
    });
    out.push(Entry {
        id: "resonant-integral".into(),
        anchor: "Theorem 2, resonant case of the proof",
        defaults: format!("xi={} eps={} max_slope={}", list(&r.xi), num(r.eps), num(r.max_slope)),
    });
    out.push(Entry {
        id: "solve".into(),
        anchor: "Theorem 1",
        defaults: format!(
            "grid={}x{} data=gaussian r={} s={} b={} delta={} tol={} sign={}",
            g.n,
            num(g.length),
            num(sc.params.r),
            num(sc.params.s),
            num(sc.params.b),
            num(sc.delta),
            num(sc.tol),
            num(sc.sign)
        ),
    });
    out.push(Entry {
        id: "lifespan".into(),
        anchor: "Theorem 1, lifespan in the data norm",
        defaults: format!(
            "grid={}x{} data=gaussian lambda={} slope_range={}..{} r={} s={} b={} delta_start={}",
            lg.n,
            num(lg.length),
            list(&l.lambdas),
            num(l.slope_range[0]),
            num(l.slope_range[1]),
            num(sc.params.r),
            num(sc.params.s),
            num(sc.params.b),
            num(sc.delta)
        ),
    });
    out.sort_by(|a, b| a.id.cmp(&b.id));
    out
}

pub fn render() -> String {
    let mut s = String::new();
    for e in entries() {
        s.push_str(&format!("{}\t{}\t{}\n", e.id, e.anchor, e.defaults));
    }
    s
}
