mod common;

use common::{box_radius, c, instance, polar_grid_max, rel, table1};
use nalgebra::SymmetricEigen;
use proptest::prelude::*;
use wpt_core::joint::{algorithm1, StoppingRule};
use wpt_core::model::*;
use wpt_core::special::*;
use wpt_core::CoreError;

fn harvester(n_s: usize, n_r: usize, sensing: f64, seed: u64) -> (CommonHarvesterConfig, ChannelRealization) {
    let net = table1(n_s, n_r, sensing);
    let ch = instance(&net, seed, 0);
    let h_e = instance(&table1(1, n_r, sensing), seed, 1).g_down[0].clone();
    (CommonHarvesterConfig { net, h_e }, ch)
}

fn equal_init(n_s: usize) -> CVec {
    CVec::from_element(n_s, c(1e-3, 0.0))
}

#[test]
fn centralized_bound_values() {
    assert_eq!(centralized_mse_bound(&table1(5, 2, 0.1)), 0.02);
    for n_s in [1usize, 3, 8, 20] {
        let b = centralized_mse_bound(&table1(n_s, 2, 0.01));
        assert!(rel(b, 0.01 / n_s as f64) < 1e-14);
    }
    let mut cfg = table1(2, 2, 0.1);
    cfg.sensing_vars = vec![0.1, 0.2];
    assert!(rel(centralized_mse_bound(&cfg), 1.0 / 15.0) < 1e-15);
}

#[test]
fn single_antenna_single_sensor_uses_full_budget() {
    let cfg = table1(1, 1, 0.1);
    let ch = instance(&cfg, 3, 0);
    let sol = single_antenna_mse_min(&cfg, &ch).unwrap();
    let cap = cfg.harvest_gain(0) * cfg.total_power * ch.g_down[0][0].norm_sqr() / cfg.d(0);
    assert!(rel(sol.amp[0].norm_sqr(), cap) < 1e-8);
    assert!(rel(sol.mse, mse_closed_form(&cfg, &ch, &sol.amp).unwrap()) < 1e-12);
}

#[test]
fn single_antenna_symmetric_sensors() {
    let cfg = NetworkConfig::uniform(2, 1, 1.0, 1.0, 0.1, 1e-3, 0.51, 0.0);
    let ch = ChannelRealization {
        g_down: vec![CVec::from_element(1, c(0.6, 0.2)); 2],
        h_up: CMat::from_row_slice(1, 2, &[c(1.0, 0.0), c(1.0, 0.0)]),
    };
    let sol = single_antenna_mse_min(&cfg, &ch).unwrap();
    assert!(rel(sol.amp[0].norm(), sol.amp[1].norm()) < 1e-6, "{:?}", sol.amp);
}

#[test]
fn single_antenna_matches_grid_oracle() {
    for seed in [1u64, 5, 12] {
        let cfg = table1(2, 1, 0.1);
        let ch = instance(&cfg, seed, 0);
        let sol = single_antenna_mse_min(&cfg, &ch).unwrap();
        assert!(sol.rank_one_residual <= 1e-4);
        let caps = [0, 1].map(|k| cfg.harvest_gain(k) * cfg.total_power * ch.g_down[k][0].norm_sqr() / cfg.d(k));
        let (best, _) = polar_grid_max(|a| 1.0 / mse_closed_form(&cfg, &ch, a).unwrap(), box_radius(caps));
        assert!(rel(sol.mse, 1.0 / best) < 1e-4, "seed {seed}: {} vs {}", sol.mse, 1.0 / best);
    }
}

#[test]
fn single_antenna_agrees_with_algorithm1() {
    let cfg = table1(4, 1, 0.1);
    let ch = instance(&cfg, 2, 0);
    let sol = single_antenna_mse_min(&cfg, &ch).unwrap();
    let trace = algorithm1(&cfg, &ch, &wpt_core::joint::default_init(&cfg, &ch), &StoppingRule::default()).unwrap();
    assert!(sol.mse <= trace.mse * (1.0 + 1e-6));
}

#[test]
fn single_antenna_power_single_sensor_closed_form() {
    let cfg = NetworkConfig::uniform(1, 1, 1.0, 1.0, 1.0, 1.0, 1.0, 0.0);
    let ch = ChannelRealization {
        g_down: vec![CVec::from_element(1, c(1.2, 0.0))],
        h_up: CMat::from_element(1, 1, c(0.7, 0.0)),
    };
    let gamma = 0.5;
    let sol = single_antenna_power_min(&cfg, &ch, gamma).unwrap();
    let a2 = gamma / (0.49 * (1.0 - gamma));
    let expected = a2 * cfg.d(0) / (cfg.harvest_gain(0) * 1.44);
    assert!(rel(sol.power, expected) < 1e-9, "{} vs {expected}", sol.power);
}

#[test]
fn single_antenna_power_vanishes_with_target() {
    let cfg = table1(3, 1, 0.1);
    let ch = instance(&cfg, 4, 0);
    let big = single_antenna_power_min(&cfg, &ch, 10.0).unwrap().power;
    let small = single_antenna_power_min(&cfg, &ch, 1e-4).unwrap().power;
    assert!(small < big * 1e-4, "{small} {big}");
}

#[test]
fn single_antenna_round_trip() {
    for seed in 0..5u64 {
        let cfg = table1(3, 1, 0.1);
        let ch = instance(&cfg, seed, 0);
        let m = single_antenna_mse_min(&cfg, &ch).unwrap();
        let p = single_antenna_power_min(&cfg, &ch, 1.0 / m.mse).unwrap();
        assert!(rel(p.power, cfg.total_power) < 1e-4, "seed {seed}: {}", p.power);
        assert!(p.rank_one_residual <= 1e-4);
    }
}

#[test]
fn single_antenna_input_errors() {
    let cfg = table1(3, 2, 0.1);
    let ch = instance(&cfg, 0, 0);
    assert!(matches!(single_antenna_mse_min(&cfg, &ch), Err(CoreError::InvalidArgument(_))));
    let cfg = table1(3, 1, 0.1);
    let ch = instance(&cfg, 0, 0);
    assert!(matches!(single_antenna_power_min(&cfg, &ch, 30.0), Err(CoreError::Infeasible(_))));
    assert!(matches!(single_antenna_power_min(&cfg, &ch, 0.0), Err(CoreError::Infeasible(_))));
}

#[test]
fn harvester_single_sensor_full_budget() {
    let (chc, ch) = harvester(1, 3, 0.1, 2);
    let sol = common_harvester_mse_min(&chc, &ch, &equal_init(1), &IterationControl::default()).unwrap();
    let a2 = chc.budget(chc.net.total_power) / chc.net.d(0);
    assert!(rel(sol.amp[0].norm_sqr(), a2) < 1e-10);
    let expected = mse_closed_form(&chc.net, &ch, &CVec::from_element(1, c(a2.sqrt(), 0.0))).unwrap();
    assert!(rel(sol.mse, expected) < 1e-9);
}

#[test]
fn harvester_symmetric_sensors() {
    let net = NetworkConfig::uniform(3, 2, 1.0, 1.0, 0.1, 1e-2, 0.51, 0.0);
    let col = CVec::from_vec(vec![c(0.8, 0.1), c(-0.3, 0.5)]);
    let ch = ChannelRealization {
        g_down: vec![col.clone(); 3],
        h_up: CMat::from_columns(&[col.clone(), col.clone(), col.clone()]),
    };
    let chc = CommonHarvesterConfig { net, h_e: col };
    let sol = common_harvester_mse_min(&chc, &ch, &equal_init(3), &IterationControl::default()).unwrap();
    let m0 = sol.amp[0].norm();
    assert!(sol.amp.iter().all(|a| rel(a.norm(), m0) < 1e-10));
}

#[test]
fn harvester_value_identity_and_sum_power() {
    for seed in 0..4u64 {
        let (chc, ch) = harvester(4, 3, 0.1, seed);
        let sol = common_harvester_mse_min(&chc, &ch, &equal_init(4), &IterationControl::default()).unwrap();
        assert!(sol.converged);
        let used: f64 = (0..4).map(|k| sol.amp[k].norm_sqr() * chc.net.d(k)).sum();
        assert!(rel(used, chc.budget(chc.net.total_power)) < 1e-8);
        let q = quotient(&chc.net, &ch, &sol.amp, &sol.filter);
        assert!(rel(1.0 / q, sol.mse) < 1e-10);
        assert!(sol.history.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-12)));
        assert!(rel(sol.beam.norm_squared(), chc.net.total_power) < 1e-12);
    }
}

#[test]
fn harvester_inversion() {
    for seed in 0..4u64 {
        let (chc, ch) = harvester(4, 3, 0.1, seed);
        let init = equal_init(4);
        let ctl = IterationControl::default();
        let m = common_harvester_mse_min(&chc, &ch, &init, &ctl).unwrap();
        let p = common_harvester_power_min(&chc, &ch, 1.0 / m.mse, &init, &ctl).unwrap();
        assert!(rel(p.power, chc.net.total_power) < 1e-6, "seed {seed}: {}", p.power);
    }
}

#[test]
fn harvester_power_single_sensor_and_vanishing() {
    let (chc, ch) = harvester(1, 2, 0.1, 3);
    let gamma = 4.0;
    let ctl = IterationControl::default();
    let sol = common_harvester_power_min(&chc, &ch, gamma, &equal_init(1), &ctl).unwrap();
    let k = &ch.h_up.column(0);
    let h2: f64 = k.iter().zip(&chc.net.fc_noise_vars).map(|(h, s)| h.norm_sqr() / s).sum();
    let a2 = gamma / (h2 * (1.0 - gamma * 0.1));
    let expected = a2 * chc.net.d(0) / chc.h_e.norm_squared();
    assert!(rel(sol.power, expected) < 1e-8, "{} vs {expected}", sol.power);
    let tiny = common_harvester_power_min(&chc, &ch, 1e-6, &equal_init(1), &ctl).unwrap();
    assert!(tiny.power < sol.power * 1e-5);
    assert!(common_harvester_power_min(&chc, &ch, 10.0, &equal_init(1), &ctl).is_err());
}

#[test]
fn harvester_config_validation() {
    let (mut chc, ch) = harvester(2, 2, 0.1, 0);
    chc.h_e = CVec::zeros(2);
    assert!(common_harvester_mse_min(&chc, &ch, &equal_init(2), &IterationControl::default()).is_err());
    chc.h_e = CVec::from_element(3, c(1.0, 0.0));
    assert!(chc.validate().is_err());
}

#[test]
fn tradeoff_monotone_and_asymptotic() {
    let (chc, ch) = harvester(4, 4, 0.01, 6);
    let grid: Vec<f64> = (-6..=6).map(|i| 10f64.powf(i as f64 * 0.5)).collect();
    let curve = tradeoff_curve(&chc, &ch, &grid, &equal_init(4), &IterationControl::default()).unwrap();
    let bound = centralized_mse_bound(&chc.net);
    for w in curve.windows(2) {
        assert!(w[1].mse <= w[0].mse);
    }
    assert!(curve.iter().all(|p| p.mse >= bound));
    assert!(curve.last().unwrap().mse <= bound * 1.01);
    assert!(tradeoff_curve(&chc, &ch, &[1.0, 1.0], &equal_init(4), &IterationControl::default()).is_err());
    assert!(tradeoff_curve(&chc, &ch, &[-1.0], &equal_init(4), &IterationControl::default()).is_err());
}

#[test]
fn larger_network_has_broader_region() {
    let grid: Vec<f64> = (-4..=4).map(|i| 10f64.powi(i)).collect();
    let avg = |n: usize| -> Vec<f64> {
        let mut sum = vec![0.0; grid.len()];
        for seed in 0..6u64 {
            let (chc, ch) = harvester(n, n, 0.01, seed);
            let curve = tradeoff_curve(&chc, &ch, &grid, &equal_init(n), &IterationControl::default()).unwrap();
            for (s, p) in sum.iter_mut().zip(&curve) {
                *s += p.mse / 6.0;
            }
        }
        sum
    };
    let (small, large) = (avg(4), avg(8));
    for (s, l) in small.iter().zip(&large) {
        assert!(l <= s, "{l} > {s}");
    }
}

/// Inverse MSE by the matrix inversion lemma expansion around `R_n`.
fn inversion_lemma_value(cfg: &NetworkConfig, ch: &ChannelRealization, amp: &CVec) -> f64 {
    let rn_inv = CMat::from_diagonal(&CVec::from_iterator(cfg.n_r, cfg.fc_noise_vars.iter().map(|s| c(1.0 / s, 0.0))));
    let k_inv = CMat::from_diagonal(&CVec::from_iterator(
        cfg.n_s,
        (0..cfg.n_s).map(|i| c(1.0 / (amp[i].norm_sqr() * cfg.sensing_vars[i]), 0.0)),
    ));
    let h = &ch.h_up;
    let hrh = h.adjoint() * &rn_inv * h;
    let inner = (k_inv + &hrh).try_inverse().unwrap();
    let first = (amp.adjoint() * &hrh * amp)[(0, 0)].re;
    let second = (amp.adjoint() * &hrh * inner * &hrh * amp)[(0, 0)].re;
    first - second
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rayleigh_value_identity(n in 1usize..6, seed in 0u64..10_000) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut draw = || c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
        let f = CVec::from_fn(n, |_, _| draw());
        let b = CMat::from_fn(n, n, |_, _| draw());
        let y = &b * b.adjoint() + CMat::identity(n, n) * c(0.1, 0.0);
        let y_inv = y.clone().try_inverse().unwrap();
        let value = (f.adjoint() * &y_inv * &f)[(0, 0)].re;
        let chol = y.cholesky().unwrap();
        let l_inv = chol.l().try_inverse().unwrap();
        let m = &l_inv * &f * f.adjoint() * l_inv.adjoint();
        let lam = SymmetricEigen::new(m).eigenvalues.max();
        prop_assert!(rel(lam, value) < 1e-10);
    }

    #[test]
    fn inversion_lemma_expansion(ns in 1usize..5, nr in 1usize..5, seed in 0u64..10_000) {
        let cfg = NetworkConfig::uniform(ns, nr, 1.0, 1.0, 0.1, 0.05, 0.51, 0.0);
        let ch = instance(&cfg, seed, 0);
        let h_scaled = &ch.h_up * c(1e3, 0.0);
        let ch = ChannelRealization { h_up: h_scaled, ..ch };
        let amp = CVec::from_fn(ns, |k, _| c(0.3 + 0.1 * k as f64, -0.2));
        let expected = 1.0 / mse_closed_form(&cfg, &ch, &amp).unwrap();
        prop_assert!(rel(inversion_lemma_value(&cfg, &ch, &amp), expected) < 1e-8);
    }

    #[test]
    fn harvester_sum_power_every_iterate(seed in 0u64..10_000, ns in 1usize..5, nr in 1usize..4) {
        let (chc, ch) = harvester(ns, nr, 0.1, seed);
        let ctl = IterationControl { rel_tol: 1e-12, max_iter: 5 };
        let sol = common_harvester_mse_min(&chc, &ch, &equal_init(ns), &ctl).unwrap();
        let used: f64 = (0..ns).map(|k| sol.amp[k].norm_sqr() * chc.net.d(k)).sum();
        prop_assert!(rel(used, chc.budget(chc.net.total_power)) < 1e-8);
    }
}
