use num_complex::Complex64;
use spdc_core::exact::{mu_series, natural_window};
use spdc_core::phase_space::{
    integrate_ensemble, pp_step, pp_step_with, sample_pump_fock_pp, sample_pump_fock_tw, sample_vacuum, tw_step,
    EnsembleConfig, PositivePState, Representation, Scheme, TrajectoryRng, WignerState,
};
use spdc_core::{PumpSpec, TimeGrid};

fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

fn pp_initial(n: u64, rng: &mut TrajectoryRng) -> PositivePState {
    let (gamma, gamma_p) = sample_pump_fock_pp(n, rng);
    PositivePState { gamma, gamma_p, ..Default::default() }
}

#[test]
fn fock_sampler_normal_ordered_moments() {
    for n in [0u64, 1, 10] {
        let mut rng = TrajectoryRng::new(77, n);
        let samples: Vec<(Complex64, Complex64)> = (0..200_000).map(|_| sample_pump_fock_pp(n, &mut rng)).collect();
        let first: Vec<f64> = samples.iter().map(|(g, gp)| (gp * g).re).collect();
        let second: Vec<f64> = samples.iter().map(|(g, gp)| (gp * gp * g * g).re).collect();
        let (m1, s1) = mean_se(&first);
        let (m2, s2) = mean_se(&second);
        let nf = n as f64;
        assert!((m1 - nf).abs() <= 5.0 * s1 + 1e-12, "n={n}: {m1} ± {s1}");
        assert!((m2 - nf * (nf - 1.0)).abs() <= 5.0 * s2 + 1e-12, "n={n}: {m2} ± {s2}");
    }
}

#[test]
fn wigner_samplers() {
    let mut rng = TrajectoryRng::new(5, 0);
    let ring: Vec<f64> = (0..1000).map(|_| sample_pump_fock_tw(100, &mut rng).norm_sqr()).collect();
    assert!(ring.iter().all(|r| (r - 100.5).abs() < 1e-12));

    let vac: Vec<Complex64> = (0..200_000).map(|_| sample_vacuum(Representation::TruncatedWigner, &mut rng).0).collect();
    let (m, s) = mean_se(&vac.iter().map(|a| a.norm_sqr()).collect::<Vec<_>>());
    assert!((m - 0.5).abs() <= 5.0 * s, "{m} ± {s}");
    let (m2, s2) = mean_se(&vac.iter().map(|a| (a * a).re).collect::<Vec<_>>());
    assert!(m2.abs() <= 5.0 * s2);

    let pp = sample_vacuum(Representation::PositiveP, &mut rng);
    assert_eq!(pp, (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)));
}

#[test]
fn pair_growth_starts_quadratically() {
    // d⟨α⁺α⟩/dτ vanishes at τ = 0: one step leaves the mean at zero within SE
    let n = 20;
    let dt = 1e-3;
    let vals: Vec<f64> = (0..50_000u64)
        .map(|j| {
            let mut rng = TrajectoryRng::new(3, j);
            let s = pp_step(&pp_initial(n, &mut rng), dt, Scheme::EulerMaruyama, &mut rng);
            (s.alpha_p * s.alpha).re / dt
        })
        .collect();
    let (m, se) = mean_se(&vals);
    assert!(m.abs() <= 5.0 * se, "{m} ± {se}");
}

#[test]
fn positive_p_tracks_exact_solution() {
    let n = 10;
    let grid = TimeGrid::new(natural_window(n as usize, 1.5), 21).unwrap();
    let cfg = EnsembleConfig { n_traj: 2000, n_subensembles: 20, seed: 11, ..EnsembleConfig::for_photons(n) };
    let run = integrate_ensemble(&PumpSpec::Fock(n), &cfg, &grid, Representation::PositiveP).unwrap();
    let exact = mu_series(&PumpSpec::Fock(n), &grid).unwrap();
    let se = run.series.se.as_ref().unwrap();
    let window = run.divergence.valid_samples();
    assert!(window >= 15, "window {window}");
    let misses = (1..window).filter(|&i| (run.series.mu[i] - exact.mu[i]).abs() > 3.0 * se[i]).count();
    // 3 SE is a 0.3% event per point; allow one
    assert!(misses <= 1, "{misses} points outside 3 SE");
    assert!(exact.mu[window - 1] > 0.3, "comparison never reaches the depletion regime");
}

#[test]
fn truncated_wigner_tracks_exact_solution() {
    let n = 10;
    let grid = TimeGrid::new(natural_window(n as usize, 1.5), 21).unwrap();
    let cfg = EnsembleConfig { n_traj: 2000, n_subensembles: 20, seed: 12, ..EnsembleConfig::for_photons(n) };
    let run = integrate_ensemble(&PumpSpec::Fock(n), &cfg, &grid, Representation::TruncatedWigner).unwrap();
    let exact = mu_series(&PumpSpec::Fock(n), &grid).unwrap();
    let se = run.series.se.as_ref().unwrap();
    for i in 0..grid.n_samples {
        let tol = (3.0 * se[i]).max(3e-2);
        assert!((run.series.mu[i] - exact.mu[i]).abs() <= tol, "τ={}: {} vs {}", exact.taus[i], run.series.mu[i], exact.mu[i]);
    }
}

#[test]
fn halving_dt_is_within_one_standard_error() {
    // same Brownian path on both grids: coarse increments are sums of fine pairs
    let n = 50;
    let tau = 0.3;
    let coarse: f64 = 2e-3;
    let steps = (tau / coarse) as usize;
    let run = |j: u64| {
        let mut rng = TrajectoryRng::new(21, j);
        let start = pp_initial(n, &mut rng);
        let (mut c, mut f) = (start, start);
        for _ in 0..steps {
            let sd = (coarse / 2.0).sqrt();
            let a: [f64; 4] = std::array::from_fn(|_| rng.normal() * sd);
            let b: [f64; 4] = std::array::from_fn(|_| rng.normal() * sd);
            f = pp_step_with(&f, coarse / 2.0, &a, Scheme::EulerMaruyama);
            f = pp_step_with(&f, coarse / 2.0, &b, Scheme::EulerMaruyama);
            let sum: [f64; 4] = std::array::from_fn(|k| a[k] + b[k]);
            c = pp_step_with(&c, coarse, &sum, Scheme::EulerMaruyama);
        }
        ((c.alpha_p * c.alpha).re / n as f64, (f.alpha_p * f.alpha).re / n as f64)
    };
    let pairs: Vec<(f64, f64)> = (0..4000).map(run).collect();
    let (m_c, _) = mean_se(&pairs.iter().map(|p| p.0).collect::<Vec<_>>());
    let (m_f, se_f) = mean_se(&pairs.iter().map(|p| p.1).collect::<Vec<_>>());
    assert!(m_f > 0.05, "no conversion yet: {m_f}");
    assert!((m_c - m_f).abs() < se_f, "{m_c} vs {m_f} ± {se_f}");
}

#[test]
fn wigner_schemes_agree_on_the_mean() {
    let n = 50;
    let grid = TimeGrid::new(natural_window(n as usize, 1.0), 6).unwrap();
    let base = EnsembleConfig { n_traj: 1000, n_subensembles: 10, ..EnsembleConfig::for_photons(n) };
    let em = integrate_ensemble(&PumpSpec::Fock(n), &base, &grid, Representation::TruncatedWigner).unwrap();
    let half = EnsembleConfig { dt: base.dt / 2.0, ..base };
    let em_half = integrate_ensemble(&PumpSpec::Fock(n), &half, &grid, Representation::TruncatedWigner).unwrap();
    let mid = EnsembleConfig { scheme: Scheme::SemiImplicitMidpoint, ..base };
    let mp = integrate_ensemble(&PumpSpec::Fock(n), &mid, &grid, Representation::TruncatedWigner).unwrap();
    let se = em.series.se.as_ref().unwrap();
    for i in 0..grid.n_samples {
        assert!((em.series.mu[i] - em_half.series.mu[i]).abs() < se[i].max(1e-12));
        assert!((em.series.mu[i] - mp.series.mu[i]).abs() < se[i].max(1e-12));
    }
}

#[test]
fn wigner_trajectories_conserve_invariants_per_unit_time() {
    let n = 100;
    let mut rng = TrajectoryRng::new(8, 0);
    let dt = 1e-4;
    for _ in 0..20 {
        let gamma = sample_pump_fock_tw(n, &mut rng);
        let (alpha, _) = sample_vacuum(Representation::TruncatedWigner, &mut rng);
        let (beta, _) = sample_vacuum(Representation::TruncatedWigner, &mut rng);
        let mut s = WignerState { alpha, beta, gamma };
        let i0 = s.alpha.norm_sqr() + s.gamma.norm_sqr();
        let j0 = s.alpha.norm_sqr() - s.beta.norm_sqr();
        for _ in 0..5000 {
            s = tw_step(&s, dt, Scheme::SemiImplicitMidpoint);
        }
        // half a unit of τ
        let i1 = s.alpha.norm_sqr() + s.gamma.norm_sqr();
        let j1 = s.alpha.norm_sqr() - s.beta.norm_sqr();
        assert!((i1 - i0).abs() / i0 < 1e-6, "{i0} -> {i1}");
        assert!((j1 - j0).abs() / i0 < 1e-6, "{j0} -> {j1}");
    }
}
