#![allow(dead_code)]

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use wpt_core::model::{dbm_to_watts, ChannelRealization, CVec, NetworkConfig};
use wpt_core::sim::{draw_channels, draw_geometry, trial_rng, GeometrySpec};

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// Default network: P = 1 W, FC noise −103.16 dBm, 51 % harvesting, no circuit energy.
pub fn table1(n_s: usize, n_r: usize, sensing_var: f64) -> NetworkConfig {
    NetworkConfig::uniform(n_s, n_r, 1.0, 1.0, sensing_var, dbm_to_watts(-103.16), 0.51, 0.0)
}

pub fn instance(cfg: &NetworkConfig, seed: u64, trial: u64) -> ChannelRealization {
    let mut rng = trial_rng(seed, trial);
    let geo = draw_geometry(&GeometrySpec::default(), cfg.n_s, &mut rng).unwrap();
    draw_channels(cfg, &geo, &mut rng).unwrap()
}

fn top_eigvec(m: DMatrix<Complex64>) -> DVector<Complex64> {
    let eig = SymmetricEigen::new(m);
    let i = eig.eigenvalues.imax();
    eig.eigenvectors.column(i).into_owned()
}

/// Least FC power delivering received energies `t = (t₁, t₂)` to two sensors.
///
/// Efficient single beams are leading eigenvectors of `λG₁ + (1−λ)G₂`; along
/// that family the power each sensor needs is monotone in `λ`, so the balance
/// point is found by bisection.
pub fn min_beam_power(g: [&CVec; 2], t: [f64; 2]) -> f64 {
    let g1 = g[0] * g[0].adjoint();
    let g2 = g[1] * g[1].adjoint();
    let need = |lam: f64| -> (f64, f64) {
        let u = top_eigvec(&g1 * c(lam, 0.0) + &g2 * c(1.0 - lam, 0.0));
        let e1 = (g[0].adjoint() * &u)[0].norm_sqr();
        let e2 = (g[1].adjoint() * &u)[0].norm_sqr();
        let n1 = if t[0] > 0.0 { t[0] / e1 } else { 0.0 };
        let n2 = if t[1] > 0.0 { t[1] / e2 } else { 0.0 };
        (n1, n2)
    };
    let (lo_1, lo_2) = need(0.0);
    if lo_1 <= lo_2 {
        return lo_2;
    }
    let (hi_1, hi_2) = need(1.0);
    if hi_2 <= hi_1 {
        return hi_1;
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        let (n1, n2) = need(mid);
        if n1 > n2 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (n1, n2) = need(0.5 * (lo + hi));
    n1.max(n2)
}

/// Maximizes `objective(ρ u(θ, φ))` with `u = (cos θ, e^{iφ} sin θ)` and `ρ`
/// the largest feasible radius along each ray (objectives here increase with
/// `ρ`). Feasibility depends on `θ` only. A coarse grid is followed by
/// repeated local zooms.
pub fn polar_grid_max(objective: impl Fn(&CVec) -> f64, radius: impl Fn(f64) -> f64) -> (f64, CVec) {
    let cache = std::cell::RefCell::new(std::collections::HashMap::<u64, f64>::new());
    let point = |th: f64, ph: f64| -> CVec {
        let r = *cache.borrow_mut().entry(th.to_bits()).or_insert_with(|| radius(th));
        CVec::from_vec(vec![c(r * th.cos(), 0.0), Complex64::from_polar(r * th.sin(), ph)])
    };
    let eval = |th: f64, ph: f64| objective(&point(th, ph));
    let half_pi = std::f64::consts::FRAC_PI_2;
    let tau = std::f64::consts::TAU;
    let (nt, np) = (96usize, 192usize);
    let (mut best, mut bt, mut bp) = (f64::NEG_INFINITY, 0.0, 0.0);
    for i in 0..=nt {
        let th = half_pi * i as f64 / nt as f64;
        for j in 0..np {
            let ph = tau * j as f64 / np as f64;
            let v = eval(th, ph);
            if v > best {
                (best, bt, bp) = (v, th, ph);
            }
        }
    }
    let (mut dt, mut dp) = (half_pi / nt as f64, tau / np as f64);
    for _ in 0..12 {
        let (ct, cp) = (bt, bp);
        for i in -10i32..=10 {
            let th = (ct + dt * i as f64 / 5.0).clamp(0.0, half_pi);
            for j in -10i32..=10 {
                let ph = cp + dp * j as f64 / 5.0;
                let v = eval(th, ph);
                if v > best {
                    (best, bt, bp) = (v, th, ph);
                }
            }
        }
        dt /= 4.0;
        dp /= 4.0;
    }
    (best, point(bt, bp))
}

/// Largest `ρ` with `power(ρ) ≤ budget` for `power` increasing in `ρ`.
pub fn bisect_radius(power: impl Fn(f64) -> f64, budget: f64) -> f64 {
    let mut hi = 1.0;
    while power(hi) <= budget {
        hi *= 2.0;
        if hi > 1e150 {
            return hi;
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if power(mid) <= budget {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    lo
}

/// Feasible radius for two sensors powered by a multi-antenna FC of budget `P`.
pub fn fc_power_radius<'a>(cfg: &'a NetworkConfig, ch: &'a ChannelRealization) -> impl Fn(f64) -> f64 + 'a {
    move |th: f64| {
        let need = |rho: f64| {
            let t = [
                ((rho * th.cos()).powi(2) * cfg.d(0) + cfg.circuit_power(0)) / cfg.harvest_gain(0),
                ((rho * th.sin()).powi(2) * cfg.d(1) + cfg.circuit_power(1)) / cfg.harvest_gain(1),
            ];
            min_beam_power([&ch.g_down[0], &ch.g_down[1]], t)
        };
        if cfg.circuit_energy.iter().all(|&e| e == 0.0) {
            // Homogeneous in ρ².
            (cfg.total_power / need(1.0)).sqrt()
        } else {
            bisect_radius(need, cfg.total_power)
        }
    }
}

/// Feasible radius inside the box `|α_k|² d_k ≤ b_k`.
pub fn box_radius(caps: [f64; 2]) -> impl Fn(f64) -> f64 {
    move |th: f64| {
        let r1 = if th.cos() > 1e-300 { caps[0].sqrt() / th.cos() } else { f64::INFINITY };
        let r2 = if th.sin() > 1e-300 { caps[1].sqrt() / th.sin() } else { f64::INFINITY };
        r1.min(r2)
    }
}

/// Minimizes a unimodal-ish `f` on `[lo, hi]` by a dense grid and zooms.
pub fn line_min(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> (f64, f64) {
    let n = 400;
    let (mut best, mut bx) = (f64::INFINITY, lo);
    for i in 0..=n {
        let x = lo + (hi - lo) * i as f64 / n as f64;
        let y = f(x);
        if y < best {
            (best, bx) = (y, x);
        }
    }
    let mut step = (hi - lo) / n as f64;
    for _ in 0..20 {
        let cx = bx;
        for i in -10i32..=10 {
            let x = (cx + step * i as f64 / 5.0).clamp(lo, hi);
            let y = f(x);
            if y < best {
                (best, bx) = (y, x);
            }
        }
        step /= 4.0;
    }
    (best, bx)
}

/// Least FC power for which a two-sensor design reaches quotient `γ` with
/// the filter `v` held fixed. Along `u = (cos θ, e^{iφ} sin θ)` the quotient
/// grows with the radius, so the radius meeting `γ` is explicit; the phase
/// that co-phases `f₁u₁` and `f₂u₂` is optimal since power ignores phases.
pub fn fixed_filter_power_oracle(cfg: &NetworkConfig, ch: &ChannelRealization, v: &CVec, gamma: f64) -> f64 {
    let f = ch.effective_gains(v);
    let noise: f64 = v.iter().zip(&cfg.fc_noise_vars).map(|(z, s)| z.norm_sqr() * s).sum();
    let power = |th: f64| -> f64 {
        let (u1, u2) = (th.cos(), th.sin());
        let sig = (f[0].norm() * u1 + f[1].norm() * u2).powi(2);
        let pen = f[0].norm_sqr() * cfg.sensing_vars[0] * u1 * u1 + f[1].norm_sqr() * cfg.sensing_vars[1] * u2 * u2;
        let den = sig - gamma * pen;
        if den <= 0.0 {
            return f64::INFINITY;
        }
        let rho2 = gamma * noise / den;
        let t = [
            (rho2 * u1 * u1 * cfg.d(0) + cfg.circuit_power(0)) / cfg.harvest_gain(0),
            (rho2 * u2 * u2 * cfg.d(1) + cfg.circuit_power(1)) / cfg.harvest_gain(1),
        ];
        min_beam_power([&ch.g_down[0], &ch.g_down[1]], t)
    };
    line_min(power, 0.0, std::f64::consts::FRAC_PI_2).0
}
