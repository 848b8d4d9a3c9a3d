use airy_lab::airy::*;
use airy_lab::field::spacetime_transform;
use airy_lab::norms::MixedParams;
use airy_lab::quad::integrate_adaptive;
use airy_lab::{Grid, SpectralField, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn gauss_packet(g: Grid, centre: f64, width: f64) -> SpectralField {
    SpectralField::from_frequency_fn(g, |xi| {
        C64::new((-(xi - centre).powi(2) / (2.0 * width * width)).exp(), 0.0)
    })
}

// Box large enough that the packets do not wrap within the time window.
fn test_grid() -> Grid {
    Grid::with_window(256, 120.0, 2.0).unwrap()
}

/// `sum_l psi(tau_l) F(xi_k, tau_l) dtau` for the windowed spectrum.
fn paired_windowed(f: &SpectralField, k: usize, psi: &impl Fn(f64) -> C64) -> C64 {
    let g = f.grid();
    (0..g.n_t)
        .map(|l| psi(g.tau(l)) * f.values()[l * g.n_x + k] * g.dtau())
        .sum()
}

fn test_function(t0: f64, s: f64) -> impl Fn(f64) -> C64 {
    move |tau: f64| C64::from_polar((-tau * tau / (2.0 * s * s)).exp(), tau * t0)
}

#[test]
fn pair_inadmissible_is_zero() {
    let g = test_grid();
    let u = gauss_packet(g, 1.0, 0.5);
    // tau/(3 xi) < xi^2/12
    let s = pair_spectrum(&u, &u, 2.0, 0.5).unwrap();
    assert_eq!(s.value, C64::new(0.0, 0.0));
    assert!(pair_spectrum(&u, &u, 0.0, 1.0).is_err());
}

#[test]
fn pair_symmetric_data_doubles_one_branch() {
    let g = test_grid();
    let u = gauss_packet(g, 0.7, 0.5);
    let (xi, tau) = (1.1, 2.0);
    let y = pair_y_squared(xi, tau).sqrt();
    let single = airy_lab::field::interpolate(&g, u.values(), 0.5 * (xi + y))
        * airy_lab::field::interpolate(&g, u.values(), 0.5 * (xi - y))
        / (3.0 * xi * y);
    let both = pair_spectrum(&u, &u, xi, tau).unwrap().value;
    assert!((both - single * 2.0).norm() < 1e-14 * both.norm());
}

#[test]
fn pair_spectrum_matches_windowed_time_evolution() {
    let g = test_grid();
    let u = gauss_packet(g, 1.0, 0.5);
    let v = gauss_packet(g, -0.5, 0.4);
    let prod = free_product_samples(&[&u, &v]).unwrap();
    let spec = spacetime_transform(&prod).unwrap();
    let t0 = 0.5 * g.t_window;
    let psi = test_function(t0, 40.0);
    let mut worst = 0.0f64;
    let mut peak = 0.0f64;
    for k in (0..g.n_x).step_by(4) {
        let xi = g.xi(k);
        if xi == 0.0 || xi.abs() > 3.0 {
            continue;
        }
        let lhs = paired_windowed(&spec, k, &psi);
        // int psi(tau) P(xi, tau) dtau = 1/2 int_0^inf psi(tau(y)) B(y) dy
        let (rhs, _) = integrate_adaptive(
            |y: f64| psi(pair_tau(xi, y)) * pair_numerator(&g, u.values(), v.values(), xi, y) * 0.5,
            0.0,
            2.0 * g.xi_max() + xi.abs(),
            1e-12,
            1e-8,
            20_000,
        )
        .unwrap();
        worst = worst.max((lhs - rhs).norm());
        peak = peak.max(rhs.norm());
    }
    assert!(peak > 0.1);
    assert!(worst < 0.05 * peak, "worst {worst}, peak {peak}");
}

#[test]
fn pair_tau_integral_is_product_transform() {
    // int P(xi, tau) dtau = sqrt(2 pi) F_x(u0 v0)(xi)
    let g = Grid::spatial(256, 120.0).unwrap();
    let u = gauss_packet(g, 1.0, 0.5);
    let v = gauss_packet(g, -0.5, 0.4);
    let mut phys = u.to_physical().unwrap();
    let vp = v.to_physical().unwrap();
    phys.values_mut()
        .iter_mut()
        .zip(vp.values())
        .for_each(|(a, b)| *a *= b);
    let direct = phys.to_frequency().unwrap();
    let peak = direct.values().iter().map(|z| z.norm()).fold(0.0, f64::max) * (2.0 * std::f64::consts::PI).sqrt();
    for k in [100usize, 128 + 5, 140, 150] {
        let xi = g.xi(k);
        let (int, _) = integrate_adaptive(
            |y: f64| pair_numerator(&g, u.values(), v.values(), xi, y) * 0.5,
            0.0,
            2.0 * g.xi_max() + xi.abs(),
            1e-14,
            1e-10,
            20_000,
        )
        .unwrap();
        let want = direct.values()[k] * (2.0 * std::f64::consts::PI).sqrt();
        // linear interpolation of the data is second order in dxi
        assert!((int - want).norm() < 2e-3 * peak, "xi {xi}: {int} vs {want}");
    }
}

#[test]
fn pair_change_of_variables() {
    for xi in [0.6f64, 1.7, -1.2] {
        let f = |tau: f64| (-(tau - 2.0).powi(2)).exp() + 0.3 / (1.0 + tau * tau);
        let edge = 0.25 * xi.powi(3);
        let (lhs, _) = if xi > 0.0 {
            integrate_adaptive(f, edge, edge + 400.0, 1e-13, 1e-11, 10_000).unwrap()
        } else {
            integrate_adaptive(f, edge - 400.0, edge, 1e-13, 1e-11, 10_000).unwrap()
        };
        let ymax = (400.0 / (0.75 * xi.abs())).sqrt();
        let (rhs, _) = integrate_adaptive(
            |y: f64| f(pair_tau(xi, y)) * pair_jacobian(xi, y),
            0.0,
            ymax,
            1e-13,
            1e-11,
            10_000,
        )
        .unwrap();
        assert!((lhs - rhs).abs() < 1e-6 * lhs.abs(), "{lhs} vs {rhs}");
    }
}

#[test]
fn branch_zeros_reproduce_tau() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut checked = 0;
    for _ in 0..2000 {
        let xi: f64 = rng.gen_range(-8.0..8.0);
        let tau: f64 = rng.gen_range(-300.0..300.0);
        let xi1: f64 = rng.gen_range(-8.0..8.0);
        for br in Branch::BOTH {
            let p = PairBranch::new(xi, tau, br, 0.0);
            if p.admissible {
                assert!(p.residual().abs() < 1e-9);
                checked += 1;
            }
            let t = TripleBranch::new(xi, tau, xi1, br, 0.0);
            if t.admissible {
                assert!(t.residual().abs() < 1e-9);
                let want = 6.0 * (xi - xi1).abs() * t.y;
                assert!((t.derivative() - want).abs() <= 1e-9 * want.max(1.0));
                checked += 1;
            }
        }
    }
    assert!(checked > 1000);
}

#[test]
fn pair_norm_point_masses() {
    let g = Grid::spatial(64, 2.0 * std::f64::consts::PI).unwrap();
    let mut u = SpectralField::zeros(g, airy_lab::Dims::One, airy_lab::Side::Frequency);
    let mut v = u.clone();
    let (ka, kb) = (g.index_of_wavenumber(3).unwrap(), g.index_of_wavenumber(-7).unwrap());
    u.values_mut()[ka] = C64::new(2.0, 0.0);
    v.values_mut()[kb] = C64::new(0.0, 1.5);
    let p = MixedParams::new(3.0, 2.0).unwrap();
    let prof = pair_norm_formula(&u, &v, &p, &PairWeights::default()).unwrap();
    let nonzero: Vec<usize> = (0..prof.values.len()).filter(|&i| prof.values[i] > 0.0).collect();
    assert_eq!(nonzero.len(), 1);
    assert!((prof.xi(nonzero[0]) - (-4.0)).abs() < 1e-12);
    let pp = p.p_prime();
    let want = ((2.0f64 * 1.5).powf(pp) * g.dxi()).powf(1.0 / pp);
    assert!((prof.values[nonzero[0]] - want).abs() < 1e-13);
}

#[test]
fn pair_norm_matches_naive_convolution() {
    let g = Grid::spatial(32, 10.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut rand_field = || {
        let vals: Vec<C64> = (0..g.n_x)
            .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        SpectralField::from_values(g, airy_lab::Dims::One, airy_lab::Side::Frequency, vals).unwrap()
    };
    let (u, v) = (rand_field(), rand_field());
    let p = MixedParams::new(2.5, 1.5).unwrap();
    let w = PairWeights { s_u: 0.3, s_v: -0.2 };
    let prof = pair_norm_formula(&u, &v, &p, &w).unwrap();
    let pp = p.p_prime();
    for (idx, got) in prof.values.iter().enumerate() {
        let xi = prof.xi(idx);
        let mut s = 0.0;
        for i in 0..g.n_x {
            for j in 0..g.n_x {
                if (g.xi(i) + g.xi(j) - xi).abs() < 1e-9 {
                    let a = (1.0 + g.xi(i).powi(2)).powf(0.15) * u.values()[i].norm();
                    let b = (1.0 + g.xi(j).powi(2)).powf(-0.1) * v.values()[j].norm();
                    s += (a * b).powf(pp) * g.dxi();
                }
            }
        }
        let want = s.powf(1.0 / pp);
        assert!((got - want).abs() <= 1e-12 * want.max(1e-300), "{got} vs {want}");
    }
}

#[test]
fn pair_norm_gaussian_closed_form() {
    let g = Grid::spatial(512, 200.0).unwrap();
    let (c1, s1, c2, s2) = (0.8, 0.6, -1.1, 0.9);
    let u = gauss_packet(g, c1, s1);
    let v = gauss_packet(g, c2, s2);
    let p = MixedParams::new(3.0, 2.0).unwrap();
    let pp = p.p_prime();
    let prof = pair_norm_formula(&u, &v, &p, &PairWeights::default()).unwrap();
    // |u^|^{p'} has variance s1^2/p'
    let (v1, v2) = (s1 * s1 / pp, s2 * s2 / pp);
    for (k, got) in prof.values.iter().enumerate() {
        let xi = prof.xi(k);
        if (xi - c1 - c2).abs() > 2.0 {
            continue;
        }
        let conv = (2.0 * std::f64::consts::PI * v1 * v2 / (v1 + v2)).sqrt()
            * (-(xi - c1 - c2).powi(2) / (2.0 * (v1 + v2))).exp();
        let want = conv.powf(1.0 / pp);
        assert!((got - want).abs() < 1e-6 * want, "xi {xi}: {got} vs {want}");
    }
}

#[test]
fn triple_single_modes_sit_on_the_resonant_point() {
    // dxi = 1, dtau = 1: integer wavenumbers put sum k^3 on the tau grid
    let g = Grid::with_window(32, 2.0 * std::f64::consts::PI, 2.0 * std::f64::consts::PI).unwrap();
    let ks = [2i64, -3, 1];
    let amps = [C64::new(1.5, 0.0), C64::new(0.0, 2.0), C64::new(-0.5, 0.5)];
    let fields: Vec<SpectralField> = ks
        .iter()
        .zip(amps)
        .map(|(&k, a)| {
            let mut f = SpectralField::zeros(g, airy_lab::Dims::One, airy_lab::Side::Frequency);
            f.values_mut()[g.index_of_wavenumber(k).unwrap()] = a;
            f
        })
        .collect();
    let prod = free_product_samples(&[&fields[0], &fields[1], &fields[2]]).unwrap();
    let spec = spacetime_transform(&prod).unwrap();
    let ksum = g.index_of_wavenumber(ks.iter().sum()).unwrap();
    let tau0: f64 = ks.iter().map(|&k| (k * k * k) as f64).sum();
    let total: f64 = spec.values().iter().map(|z| z.norm_sqr()).sum();
    let l0 = (0..g.n_t).find(|&l| (g.tau(l) - tau0).abs() < 1e-9).unwrap();
    let peak = spec.values()[l0 * g.n_x + ksum].norm_sqr();
    assert!(peak >= 0.95 * total);
    // delta line of weight dxi^2/(2 pi) prod a_i, paired with a broad test function
    let t0 = 0.5 * g.t_window;
    let psi = move |tau: f64| C64::from_polar((-(tau - tau0).powi(2) / (2.0 * 400.0)).exp(), (tau - tau0) * t0);
    let got = paired_windowed(&spec, ksum, &psi);
    let want = amps.iter().product::<C64>() * g.dxi().powi(2) / (2.0 * std::f64::consts::PI)
        * (2.0 * std::f64::consts::PI).sqrt()
        * C64::from_polar(1.0, tau0 * t0);
    assert!((got - want).norm() < 1e-3 * want.norm(), "{got} vs {want}");
}

#[test]
fn mask_excluding_support_gives_zero() {
    let g = test_grid();
    let u = gauss_packet(g, 1.0, 0.4);
    // region i needs |xi2| >= 10 <xi3>, out of reach of these packets
    let s = triple_spectrum(&u, &u, &u, 2.0, 3.0, RegionMask::Only(Region::I)).unwrap();
    assert_eq!(s.value, C64::new(0.0, 0.0));
    let all = triple_spectrum(&u, &u, &u, 2.0, 3.0, RegionMask::All).unwrap();
    assert!(all.value.norm() > 0.0);
}

#[test]
fn triple_spectrum_matches_windowed_time_evolution() {
    let g = Grid::with_window(128, 60.0, 2.0).unwrap();
    let u = gauss_packet(g, 0.8, 0.4);
    let v = gauss_packet(g, -0.6, 0.35);
    let w = gauss_packet(g, 0.3, 0.3);
    let prod = free_product_samples(&[&u, &v, &w]).unwrap();
    let spec = spacetime_transform(&prod).unwrap();
    let t0 = 0.5 * g.t_window;
    let s = 25.0;
    let psi = test_function(t0, s);
    let mut worst = 0.0f64;
    let mut peak = 0.0f64;
    for k in [64usize + 2, 64 + 6, 64 + 9, 64 + 13] {
        let xi = g.xi(k);
        let lhs = paired_windowed(&spec, k, &psi);
        let f = |tau: f64| {
            triple_spectrum(&u, &v, &w, xi, tau, RegionMask::All)
                .unwrap()
                .value
                * psi(tau)
        };
        // split at the critical values xi^3/9 and xi^3 of the cubic phase
        let (c1, c2) = ((xi.powi(3) / 9.0).min(xi.powi(3)), (xi.powi(3) / 9.0).max(xi.powi(3)));
        let mut rhs = C64::new(0.0, 0.0);
        for (a, b) in [(-15.0, c1), (c1, c2), (c2, 15.0)] {
            rhs += integrate_adaptive(f, a, b, 1e-7, 1e-4, 2000).unwrap().0;
        }
        worst = worst.max((lhs - rhs).norm());
        peak = peak.max(rhs.norm());
    }
    assert!(peak > 0.05, "{peak}");
    assert!(worst < 0.05 * peak, "worst {worst}, peak {peak}");
}

#[test]
fn resonance_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..10_000 {
        let x: [f64; 3] = [rng.gen_range(-50.0..50.0), rng.gen_range(-50.0..50.0), rng.gen_range(-50.0..50.0)];
        let t: [f64; 3] = [rng.gen_range(-1e4..1e4), rng.gen_range(-1e4..1e4), rng.gen_range(-1e4..1e4)];
        let (xi, tau) = (x.iter().sum::<f64>(), t.iter().sum::<f64>());
        let sigma0 = tau - xi.powi(3);
        let rest: f64 = (0..3).map(|i| t[i] - x[i].powi(3)).sum();
        let lhs = sigma0 - rest;
        let rhs = -resonance(x[0], x[1], x[2]);
        let scale = x.iter().map(|v| v.abs()).fold(1.0, f64::max).powi(3) + tau.abs();
        assert!((lhs - rhs).abs() <= 1e-10 * scale);
    }
}

#[test]
fn region_classifier_is_total_and_documented() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let rule = RegionRule::default();
    for _ in 0..20_000 {
        let (a, b, c): (f64, f64, f64) = (rng.gen_range(-40.0..40.0), rng.gen_range(-40.0..40.0), rng.gen_range(-40.0..40.0));
        let r = rule.classify(a, b, c);
        assert_eq!(r, region_mask(a, b, c));
        let (d, s) = ((b - c).abs(), (b + c).abs());
        match r {
            Region::I => {
                assert!(a.abs() <= 2.0 * b.abs() && b.abs() <= 2.0 * a.abs());
                assert!(b.abs() >= 10.0 * (1.0 + c * c).sqrt());
            }
            Region::II => assert!(d >= s),
            Region::III => assert!(d >= 1.0 && d <= s),
            Region::None => assert!(d < 1.0_f64.min(s)),
        }
    }
}

#[test]
fn dyadic_measure_bound_and_additivity() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let range = (-20.0, 20.0);
    let mut c_coarse = 0.0f64;
    let mut c_fine = 0.0f64;
    for _ in 0..100 {
        let xi: f64 = rng.gen_range(-5.0..5.0);
        let tau: f64 = rng.gen_range(-100.0..100.0);
        let mut total = 0.0;
        for j in -40..=20 {
            let m = dyadic_measure_probe(xi, tau, j, range, 20_000);
            total += m;
            c_coarse = c_coarse.max(m / 2f64.powi(j));
            if m > 0.0 {
                let mf = dyadic_measure_probe(xi, tau, j, range, 80_000);
                c_fine = c_fine.max(mf / 2f64.powi(j));
            }
        }
        let adm = admissible_measure(xi, tau, range, 20_000);
        assert!((total - adm).abs() <= 1e-3 * adm);
    }
    assert!(c_coarse.is_finite() && c_coarse < 16.0, "C = {c_coarse}");
    assert!((c_fine - c_coarse).abs() < 0.1 * c_coarse, "{c_coarse} vs {c_fine}");
}
