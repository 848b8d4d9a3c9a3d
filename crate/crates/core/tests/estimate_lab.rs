use std::f64::consts::PI;

use airy_lab::estimate::pushforward::{pair_pushforward, triple_pushforward, Lattice};
use airy_lab::estimate::*;
use airy_lab::{LabError, C64};

fn conj(p: f64) -> f64 {
    p / (p - 1.0)
}

#[test]
fn lemma3_params_accept_interior_point() {
    let v = validate_lemma3_params(1.5, 2.0, 4.0 / 3.0);
    assert!(v.accepted, "{:?}", v.violated);
    assert!((v.theta - 0.5).abs() < 1e-12);
    assert!(v.margin > 0.0);
}

#[test]
fn lemma3_params_report_each_failure() {
    // p1 > p
    let v = validate_lemma3_params(1.5, 6.0, 1.6);
    assert!(!v.accepted);
    assert!(v.violated.contains(&"p1 < p"));
    // equality 3/p = 1/p0 + 2/p1 broken
    let v = validate_lemma3_params(1.5, 2.0, 1.4);
    assert!(v.violated.contains(&"3/p = 1/p0 + 2/p1"));
    let v = validate_lemma3_params(1.5, f64::INFINITY, 1.0);
    assert!(v.violated.contains(&"p0 < inf"));
}

#[test]
fn lemma3_witness_exists_across_range() {
    for i in 1..9 {
        let p = 1.0 + 0.1 * i as f64;
        let (p0, p1, v) = lemma3_witness(p, 2000).unwrap_or_else(|| panic!("no witness at p = {p}"));
        assert!(v.accepted);
        assert!((3.0 / p - 1.0 / p0 - 2.0 / p1).abs() < 1e-12);
        assert!((v.theta - 1.0 / conj(p0)).abs() < 1e-12);
    }
}

#[test]
fn t2c_bundles_balance() {
    for r in [1.2, 1.5, 1.8] {
        let b = t2c_exponents(r).unwrap();
        assert_eq!(b.source, BundleSource::Interpolation);
        assert!((b.s0 + 2.0 * b.s1 - 1.0 / r).abs() < 1e-12, "r = {r}");
        assert!(b.violations().is_empty(), "r = {r}: {:?}", b.violations());
        assert!(b.s0 > 0.0 && b.s1 > 0.0 && b.theta > 0.0 && b.theta < 1.0);
    }
    let b = t2c_exponents(2.0).unwrap();
    assert_eq!(b.source, BundleSource::Remark);
    assert!((b.s0 + 2.0 * b.s1 - 0.5).abs() < 1e-12);
    assert!(matches!(t2c_exponents(1.0), Err(LabError::Domain(_))));
}

#[test]
fn resonant_integral_vanishes_at_low_frequency() {
    assert_eq!(resonant_integral(0.5, 3.0, 0.1).unwrap(), 0.0);
    assert_eq!(resonant_integral(-1.0, 0.0, 0.1).unwrap(), 0.0);
    assert!(resonant_integral(4.0, 1.0, 0.0).is_err());
}

#[test]
fn resonant_integral_matches_midpoint_grid() {
    // peak of the phase: every xi_i = xi/3
    let (xi, eps) = (8.0, 0.1);
    let tau = 3.0 * (xi / 3.0f64).powi(3) + 2.0;
    let adaptive = resonant_integral(xi, tau, eps).unwrap();
    let n = 1200;
    let (lo, w) = (xi / 3.0 - 2.0 / 3.0, 4.0 / 3.0);
    let d = w / n as f64;
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            let x1 = lo + (i as f64 + 0.5) * d;
            let x2 = lo + (j as f64 + 0.5) * d;
            sum += airy_lab::estimate::resonant::resonant_integrand(xi, tau, eps, x1, x2);
        }
    }
    let grid = sum * d * d;
    assert!((adaptive - grid).abs() < 0.02 * grid, "{adaptive} vs {grid}");
}

#[test]
fn resonant_sup_is_positive_and_decays() {
    let (_, a) = resonant_sup(8.0, 0.1).unwrap();
    let (_, b) = resonant_sup(16.0, 0.1).unwrap();
    assert!(a > 0.0 && b > 0.0);
    assert!(b < a);
}

#[test]
fn sigma_gain_zero_modulations() {
    let t = ModulatedTriple {
        xi: [5.0, -3.0, 1.0],
        sigma: [0.0; 3],
    };
    let res = 3.0 * (5.0 - 3.0) * (-3.0 + 1.0) * (1.0 + 5.0);
    assert!((t.sigma0() + res).abs() < 1e-12);
    let g = sigma_gain_check(&t, 0.5).unwrap();
    let want = (26f64.sqrt() * 10f64.sqrt() / (1.0 + res * res).sqrt()).sqrt();
    assert!((g - want).abs() < 1e-12);
    let bad = ModulatedTriple {
        xi: [1.0, 3.0, 0.0],
        sigma: [0.0; 3],
    };
    assert!(sigma_gain_check(&bad, 0.5).is_err());
}

#[test]
fn sigma_gain_sweep_stays_bounded() {
    let a = sigma_gain_sweep(20_000, 7, 0.1, 200.0).unwrap();
    let b = sigma_gain_sweep(40_000, 7, 0.1, 200.0).unwrap();
    assert!(a.is_finite() && b >= a);
    assert!(b <= 1.2 * a, "{a} -> {b}");
}

fn gauss(c: f64, w: f64) -> impl Fn(f64) -> C64 {
    move |x| C64::new((-(x - c).powi(2) / (2.0 * w * w)).exp(), 0.0)
}

#[test]
fn pair_pushforward_matches_fine_binning() {
    let (n, band) = (128usize, 8.0);
    let dxi = 2.0 * band / n as f64;
    let off = 0.5 - (n / 2) as f64;
    let (fu, fv) = (gauss(2.5, 0.8), gauss(-1.0, 1.1));
    let u = Lattice::from_fn(n, dxi, off, &fu);
    let v = Lattice::from_fn(n, dxi, off, &fv);
    let h = band.powi(3) / 128.0;
    let hist = pair_pushforward(&u, &v, h, |_, _| 1.0).unwrap();
    // reference: the same output rows, the xi1 integral resolved 400x finer
    let sub = 400;
    let fine = dxi / sub as f64;
    let mut err = 0.0;
    let mut tot = 0.0;
    for k in (0..hist.n_xi).step_by(7) {
        let xi = hist.xi(k);
        let mut want = vec![0.0; hist.n_tau];
        for i in 0..n * sub {
            let x1 = -band + (i as f64 + 0.5) * fine;
            let x2 = xi - x1;
            let m = (fu(x1) * fv(x2)).re * fine;
            let bin = ((x1.powi(3) + x2.powi(3) - hist.tau0) / h).floor();
            if bin >= 0.0 && (bin as usize) < hist.n_tau {
                want[bin as usize] += m;
            }
        }
        for (m, w) in want.iter().enumerate() {
            let got = hist.density(k, m).re * h;
            err += (got - w).abs();
            tot += w.abs();
        }
    }
    assert!(tot > 0.0);
    assert!(err < 0.03 * tot, "relative L1 error {}", err / tot);
}

#[test]
fn modulated_triple_matches_direct_sum() {
    let (n, band) = (48usize, 6.0);
    let dxi = 2.0 * band / n as f64;
    let off = 0.5 - (n / 2) as f64;
    let u = Lattice::from_fn(n, dxi, off, gauss(2.0, 0.7));
    let v = Lattice::from_fn(n, dxi, off, gauss(-1.0, 0.9));
    let w = Lattice::from_fn(n, dxi, off, gauss(0.5, 0.6));
    let (mu, var) = ([3.0, -5.0, 1.0], [30.0f64, 50.0, 40.0]);
    // (2 pi)^-3/2 (a1 * a2 * a3)(lambda) by direct quadrature
    let step = 0.2;
    let a = |s: f64, i: usize| (-(s - mu[i]).powi(2) / (2.0 * var[i])).exp();
    let conv3 = |lam: f64| {
        let r = 40.0;
        let m = (2.0 * r / step) as usize;
        let mut tot = 0.0;
        for p in 0..m {
            let s1 = mu[0] - r + (p as f64 + 0.5) * step;
            for q in 0..m {
                let s2 = mu[1] - r + (q as f64 + 0.5) * step;
                tot += a(s1, 0) * a(s2, 1) * a(lam - s1 - s2, 2);
            }
        }
        tot * step * step / (2.0 * PI).powf(1.5)
    };
    let h = band.powi(3) / 128.0;
    let hist = triple_pushforward(&u, &v, &w, h, |_, _, _| 1.0).unwrap();
    let vsum: f64 = var.iter().sum();
    let amp = (var.iter().product::<f64>() / vsum).sqrt() / (2.0 * PI).sqrt();
    let f = hist.convolve_gaussian(mu.iter().sum(), vsum, amp).unwrap();
    // A tabulated once on a lambda grid, then interpolated
    let lam0 = -150.0;
    let dl = 0.5;
    let table: Vec<f64> = (0..=600).map(|i| conv3(lam0 + i as f64 * dl)).collect();
    let a_of = |lam: f64| {
        let x = (lam - lam0) / dl;
        if x < 0.0 || x >= 600.0 {
            return 0.0;
        }
        let i = x.floor() as usize;
        let t = x - i as f64;
        table[i] * (1.0 - t) + table[i + 1] * t
    };
    // output rows around the sum of the centers, 1.5
    let k_mid = (1.5 / dxi - 3.0 * off).round() as usize;
    let mut err = 0.0f64;
    let mut peak = 0.0f64;
    for k in [k_mid - 6, k_mid, k_mid + 6] {
        let xi = f.xi(k);
        for m in (0..f.n_tau).step_by(5) {
            let tau = f.tau(m);
            let mut want = C64::new(0.0, 0.0);
            for i in 0..n {
                for j in 0..n {
                    let x3 = xi - u.xi(i) - v.xi(j);
                    let l = ((x3 / dxi) - off).round();
                    if l < 0.0 || l as usize >= n {
                        continue;
                    }
                    let l = l as usize;
                    let phase = u.xi(i).powi(3) + v.xi(j).powi(3) + w.xi(l).powi(3);
                    want += u.values[i] * v.values[j] * w.values[l] * a_of(tau - phase);
                }
            }
            want *= dxi * dxi / (2.0 * PI).sqrt();
            let got = f.density(k, m);
            err = err.max((got - want).norm());
            peak = peak.max(want.norm());
        }
    }
    assert!(peak > 0.0);
    assert!(err < 0.01 * peak, "max error {err} against peak {peak}");
}

#[test]
fn lemma1_gaussian_passes() {
    let fam = TestFamily {
        count: 8,
        ..TestFamily::new(FamilyKind::Gaussian)
    };
    let rep = probe(&EstimateSpec::new(EstimateId::Lemma1), &fam, &default_refinements(EstimateId::Lemma1)).unwrap();
    assert_eq!(rep.verdict, Verdict::Pass);
    assert_eq!(rep.refinements.len(), 3);
    assert_eq!(rep.samples.len(), 24);
    assert!(rep.max_growth() < 1.2);
}

#[test]
fn probe_is_deterministic() {
    let fam = TestFamily {
        count: 4,
        seed: 11,
        ..TestFamily::new(FamilyKind::RandomPhase)
    };
    let id = EstimateId::Lemma4;
    let a = probe(&EstimateSpec::new(id), &fam, &default_refinements(id)).unwrap();
    let b = probe(&EstimateSpec::new(id), &fam, &default_refinements(id)).unwrap();
    assert_eq!(a.samples, b.samples);
    assert_eq!(a.growth, b.growth);
}

#[test]
fn hypothesis_violation_is_rejected() {
    let spec = EstimateSpec {
        p: Some(1.5),
        p0: Some(2.0),
        p1: Some(1.6),
        ..EstimateSpec::new(EstimateId::Lemma3)
    };
    match probe(&spec, &TestFamily::default(), &default_refinements(EstimateId::Lemma3)) {
        Err(LabError::Hypothesis(v)) => assert!(!v.is_empty()),
        other => panic!("expected a hypothesis error, got {other:?}"),
    }
}

#[test]
fn family_members_reproduce() {
    let fam = TestFamily {
        seed: 3,
        ..TestFamily::new(FamilyKind::TwoBumpSeparated)
    };
    let roles = [Role::FREE, Role::at_origin(0.5)];
    let a = fam.member(16.0, &roles, 9);
    let b = fam.member(16.0, &roles, 9);
    let c = fam.member(16.0, &roles, 10);
    assert_eq!(a, b);
    assert_ne!(a, c);
    for f in &a {
        assert_eq!(f.eval(15.0), C64::new(0.0, 0.0));
    }
}

#[test]
fn family_rejects_bad_parameters() {
    let fam = TestFamily {
        width: 1.5,
        ..TestFamily::default()
    };
    assert!(fam.validate().is_err());
}
