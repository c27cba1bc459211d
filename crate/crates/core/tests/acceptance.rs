//! One PASS/FAIL line per acceptance criterion. Failures are reported, not
//! fatal, unless `ACCEPTANCE_STRICT=1`.

mod common;

use std::time::Instant;

use common::{box_radius, fc_power_radius, instance, polar_grid_max, rel, table1};
use wpt_core::joint::*;
use wpt_core::model::*;
use wpt_core::sim::*;
use wpt_core::special::*;
use wpt_sdp::{solve, SdpSolution, ToleranceSet};

struct Verdict {
    id: usize,
    pass: bool,
    detail: String,
}

fn report(v: &Verdict, secs: f64) {
    println!("criterion {:2}: {} ({:.1} s) {}", v.id, if v.pass { "PASS" } else { "FAIL" }, secs, v.detail);
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn criterion1() -> Verdict {
    let cfg = table1(5, 2, 0.1);
    let t = Instant::now();
    let b = centralized_mse_bound(&cfg);
    let us = t.elapsed().as_secs_f64() * 1e6;
    Verdict { id: 1, pass: b == 0.02 && us < 1000.0, detail: format!("bound = {b}, {us:.1} us") }
}

struct SdrCase {
    ns: usize,
    nr: usize,
    p: f64,
    sdr1: (wpt_sdp::SdpProblem, SdpSolution),
    sdr2: (wpt_sdp::SdpProblem, SdpSolution),
}

fn sdr_cases() -> Vec<SdrCase> {
    let combos = [(2usize, 2usize), (2, 5), (5, 2), (5, 5), (7, 2), (7, 5)];
    (0..100u64)
        .map(|i| {
            let (ns, nr) = combos[i as usize % combos.len()];
            let cfg = table1(ns, nr, 0.1);
            let ch = instance(&cfg, 1000 + i, 0);
            let v = optimal_filter(&cfg, &ch, &default_init(&cfg, &ch)).unwrap();
            let tol = ToleranceSet::default();
            let p1 = build_sdr1(&cfg, &ch, &v).unwrap();
            let s1 = solve(&p1, &tol).unwrap();
            let gamma = 0.5 / centralized_mse_bound(&cfg);
            let p2 = build_sdr2(&cfg, &ch, &v, gamma).unwrap();
            let s2 = solve(&p2, &tol).unwrap();
            SdrCase { ns, nr, p: cfg.total_power, sdr1: (p1, s1), sdr2: (p2, s2) }
        })
        .collect()
}

fn criterion2(cases: &[SdrCase], secs: f64) -> Verdict {
    let mut worst_residual: f64 = 0.0;
    let mut bad = 0;
    for c in cases {
        for (p, s, kind) in [
            (&c.sdr1.0, &c.sdr1.1, SdrKind::Sdr1 { total_power: c.p }),
            (&c.sdr2.0, &c.sdr2.1, SdrKind::Sdr2),
        ] {
            if !s.is_optimal() {
                bad += 1;
                continue;
            }
            let r = verify_certificates(p, s, kind);
            worst_residual = worst_residual.max(r.q_rank_one_residual);
            if !(r.q_rank_one_residual <= 1e-4) || r.w_rank > c.ns.min(c.nr) {
                bad += 1;
            }
        }
    }
    Verdict {
        id: 2,
        pass: bad == 0 && secs < 30.0,
        detail: format!("{bad} violations in 200 solves taking {secs:.1} s, worst rank-one residual {worst_residual:.2e}"),
    }
}

fn criterion3(cases: &[SdrCase]) -> Verdict {
    let (mut gap, mut slack, mut cs): (f64, f64, f64) = (0.0, 0.0, 0.0);
    let mut beta_ok = true;
    for c in cases {
        let (p, s) = &c.sdr1;
        let r = verify_certificates(p, s, SdrKind::Sdr1 { total_power: c.p });
        beta_ok &= r.beta.is_some_and(|b| b > 0.0);
        let eta = s.scalars[ETA];
        slack = slack.max((s.blocks[1].trace().re - eta * c.p).abs() / c.p);
        for (s, r) in [(s, r), (&c.sdr2.1, verify_certificates(&c.sdr2.0, &c.sdr2.1, SdrKind::Sdr2))] {
            let scale = s.primal_objective.abs().max(s.dual_objective.abs());
            gap = gap.max((s.primal_objective - s.dual_objective).abs() / scale);
            cs = cs.max(r.complementarity_q).max(r.complementarity_w);
        }
    }
    Verdict {
        id: 3,
        pass: gap <= 1e-7 && beta_ok && slack <= 1e-6 && cs <= 1e-6,
        detail: format!("max rel gap {gap:.2e}, beta>0 {beta_ok}, max power slack {slack:.2e}·P, max CS {cs:.2e}"),
    }
}

fn criterion4() -> Verdict {
    let stop = StoppingRule { max_iter: 5000, ..StoppingRule::default() };
    let (mut worst_joint, mut worst_single): (f64, f64) = (f64::NEG_INFINITY, 0.0);
    for seed in 0..20u64 {
        let cfg = table1(2, 2, 0.1);
        let ch = instance(&cfg, 2000 + seed, 0);
        let t = algorithm1(&cfg, &ch, &default_init(&cfg, &ch), &stop).unwrap();
        let (best, _) = polar_grid_max(|a| 1.0 / mse_closed_form(&cfg, &ch, a).unwrap_or(f64::INFINITY), fc_power_radius(&cfg, &ch));
        let oracle = 1.0 / best;
        worst_joint = worst_joint.max((t.mse - oracle) / oracle);

        let cfg = table1(2, 1, 0.1);
        let ch = instance(&cfg, 2000 + seed, 0);
        let sol = single_antenna_mse_min(&cfg, &ch).unwrap();
        let caps = [0, 1].map(|k| cfg.harvest_gain(k) * cfg.total_power * ch.g_down[k][0].norm_sqr() / cfg.d(k));
        let (best, _) = polar_grid_max(|a| 1.0 / mse_closed_form(&cfg, &ch, a).unwrap_or(f64::INFINITY), box_radius(caps));
        worst_single = worst_single.max(rel(sol.mse, 1.0 / best));
    }
    Verdict {
        id: 4,
        pass: worst_joint <= 1e-3 && worst_single <= 1e-4,
        detail: format!("joint mse above oracle by at most {worst_joint:.2e}, single-antenna deviation {worst_single:.2e}"),
    }
}

fn runs_of(result: &ExperimentResult) -> Vec<(usize, &SchemeRun)> {
    let mut out: Vec<(usize, &SchemeRun)> = result
        .records
        .iter()
        .flat_map(|r| r.runs.iter().map(move |s| (r.trial, s)))
        .collect();
    out.sort_by_key(|(t, _)| *t);
    out
}

fn criterion5(fig1: &ExperimentResult, fig4: &ExperimentResult) -> Verdict {
    let a1 = runs_of(fig1);
    let a2 = runs_of(fig4);
    let mut monotone = true;
    let (mut converged, mut total) = (0, 0);
    let mut iters = Vec::new();
    for (runs, up) in [(&a1, true), (&a2, false)] {
        for (_, run) in runs.iter().take(250) {
            total += 1;
            let Some(o) = &run.outcome else {
                monotone = false;
                continue;
            };
            monotone &= o.objectives.windows(2).all(|w| if up { w[1] >= w[0] - 1e-9 } else { w[1] <= w[0] + 1e-9 });
            if run.status == TrialStatus::Converged {
                converged += 1;
            }
            iters.push(o.iterations as f64);
        }
    }
    let frac = converged as f64 / total as f64;
    Verdict {
        id: 5,
        pass: monotone && total == 500 && frac >= 0.99,
        detail: format!(
            "monotone {monotone}; {converged}/{total} runs ({:.1}%) met rel change < 1e-6 within 50 iterations, mean iterations {:.1}",
            100.0 * frac,
            mean(&iters)
        ),
    }
}

fn averages(result: &ExperimentResult, value: impl Fn(&wpt_core::schemes::SchemeOutcome) -> f64) -> Vec<(f64, f64, usize)> {
    let mut out = Vec::new();
    for &x in &result.spec.sweep.values {
        let vals: Vec<f64> = result
            .records
            .iter()
            .filter(|r| r.sweep_value == x)
            .flat_map(|r| r.runs.iter())
            .filter(|s| s.status.usable())
            .filter_map(|s| s.outcome.as_ref().map(&value))
            .collect();
        out.push((x, mean(&vals), vals.len()));
    }
    out
}

fn criterion6(fig1: &ExperimentResult, secs: f64) -> Verdict {
    let avg = averages(fig1, |o| o.mse);
    let m: Vec<f64> = avg.iter().map(|a| a.1).collect();
    let decreasing = m.windows(2).all(|w| w[1] < w[0]);
    let above = m.iter().all(|&x| x >= 0.02);
    let gap_ratio = (m[0] - 0.02) / (m[3] - 0.02);
    let usable: usize = avg.iter().map(|a| a.2).sum();
    Verdict {
        id: 6,
        pass: decreasing && above && gap_ratio >= 2.0 && secs < 600.0,
        detail: format!("mean mse {m:.5?} over n_r 5/10/15/20 ({usable} usable runs), gap ratio {gap_ratio:.2}, preset run {secs:.0} s"),
    }
}

fn criterion7(fig4: &ExperimentResult) -> Verdict {
    let avg = averages(fig4, |o| o.fc_power);
    let p: Vec<f64> = avg.iter().map(|a| a.1).collect();
    let decreasing = p.windows(2).all(|w| w[1] < w[0]);
    let usable: usize = avg.iter().map(|a| a.2).sum();
    Verdict {
        id: 7,
        pass: decreasing && usable == 800,
        detail: format!("mean FC power (W) {:?} over n_r 5/10/15/20 ({usable} usable runs)", p.iter().map(|x| format!("{x:.4e}")).collect::<Vec<_>>()),
    }
}

fn criterion8() -> Verdict {
    let converged = StoppingRule { max_iter: 5000, ..StoppingRule::default() };
    let mut fig2 = preset("fig2").unwrap();
    fig2.trials = 50;
    fig2.stopping = converged;
    let r2 = run_experiment(&fig2).unwrap();
    let mut p1_ok = 0;
    let mut p1_total = 0;
    for rec in &r2.records {
        let (Some(j), Some(b)) = (rec.run("joint"), rec.run("two-phase")) else { continue };
        p1_total += 1;
        if let (Some(j), Some(b)) = (&j.outcome, &b.outcome) {
            if j.mse <= b.mse * (1.0 + 1e-6) {
                p1_ok += 1;
            }
        }
    }
    let mut fig5 = preset("fig5").unwrap();
    fig5.trials = 50;
    fig5.stopping = converged;
    let r5 = run_experiment(&fig5).unwrap();
    let mut p2_ok = 0;
    let mut p2_total = 0;
    let mut savings = Vec::new();
    for &g in &fig5.sweep.values {
        let mut diffs = Vec::new();
        for rec in r5.records.iter().filter(|r| r.sweep_value == g) {
            let (Some(j), Some(b)) = (rec.run("joint"), rec.run("two-phase")) else { continue };
            p2_total += 1;
            if let (Some(j), Some(b)) = (&j.outcome, &b.outcome) {
                if j.fc_power <= b.fc_power * (1.0 + 1e-6) {
                    p2_ok += 1;
                }
                diffs.push((j.fc_power, b.fc_power));
            }
        }
        let j = mean(&diffs.iter().map(|d| d.0).collect::<Vec<_>>());
        let b = mean(&diffs.iter().map(|d| d.1).collect::<Vec<_>>());
        savings.push(10.0 * (b / j).log10());
    }
    Verdict {
        id: 8,
        pass: p1_ok == p1_total && p2_ok == p2_total && p1_total == 250 && p2_total == 150 && savings.iter().all(|&s| s > 0.0),
        detail: format!(
            "P1 {p1_ok}/{p1_total} seeds, P2 {p2_ok}/{p2_total} seeds; mean P2 saving {savings:.2?} dB at 1/gamma 0.02/0.03/0.04"
        ),
    }
}

fn criterion9() -> Verdict {
    let ctl = IterationControl::default();
    let mut worst: f64 = 0.0;
    for seed in 0..50u64 {
        let net = table1(4, 4, 0.01);
        let ch = instance(&net, 3000 + seed, 0);
        let h_e = instance(&table1(1, 4, 0.01), 3000 + seed, 1).g_down[0].clone();
        let chc = CommonHarvesterConfig { net, h_e };
        let init = CVec::from_element(4, common::c(1e-3, 0.0));
        let m = common_harvester_mse_min(&chc, &ch, &init, &ctl).unwrap();
        let p = common_harvester_power_min(&chc, &ch, 1.0 / m.mse, &init, &ctl).unwrap();
        let mut back = chc.clone();
        back.net.total_power = p.power;
        let m2 = common_harvester_mse_min(&back, &ch, &init, &ctl).unwrap();
        worst = worst.max(rel(m2.mse, m.mse));
    }
    let mut fig6 = preset("fig6").unwrap();
    fig6.trials = 50;
    let r6 = run_experiment(&fig6).unwrap();
    let top = fig6.tradeoff_grid_dbm.iter().position(|&p| p == 60.0).expect("grid reaches 60 dBm");
    let mut monotone = true;
    let mut asym: f64 = 0.0;
    let mut curves = 0;
    for rec in &r6.records {
        let Some(c) = &rec.curve else { continue };
        if !c.status.usable() {
            monotone = false;
            continue;
        }
        curves += 1;
        monotone &= c.points.windows(2).all(|w| w[1].1 <= w[0].1);
        asym = asym.max(c.points[top].1 / rec.bound - 1.0);
    }
    Verdict {
        id: 9,
        pass: worst <= 1e-5 && monotone && curves == 100 && asym <= 0.01,
        detail: format!("round-trip error {worst:.2e}; {curves} curves monotone {monotone}; excess over bound at 60 dBm {asym:.2e}"),
    }
}

fn criterion10() -> Verdict {
    let spec = preset("table2").unwrap();
    let result = run_experiment(&spec).unwrap();
    let table = build_table(&result);
    let (h, t, pc) = (
        table.column("harvested_dbm").unwrap(),
        table.column("transmit_dbm").unwrap(),
        table.column("power_controlled").unwrap(),
    );
    let trial = table.column("trial").unwrap();
    let mut causal = true;
    let mut seeds = std::collections::BTreeMap::<String, bool>::new();
    for row in &table.rows {
        let (Cell::Num(hv), Cell::Num(tv), Cell::Num(c)) = (&row[h], &row[t], &row[pc]) else {
            causal = false;
            continue;
        };
        causal &= dbm_to_watts(*tv) <= dbm_to_watts(*hv) * (1.0 + 1e-6);
        *seeds.entry(format!("{:?}", row[trial])).or_default() |= *c == 1.0;
    }
    let rows_ok = table.rows.len() == 7 * spec.trials;
    let frac = seeds.values().filter(|&&b| b).count() as f64 / seeds.len() as f64;
    Verdict {
        id: 10,
        pass: causal && rows_ok && frac >= 0.8,
        detail: format!("{} rows, transmit <= harvested {causal}, power control on {:.1}% of seeds", table.rows.len(), 100.0 * frac),
    }
}

fn main() {
    let mut verdicts = Vec::new();
    let mut run = |f: &mut dyn FnMut() -> Verdict| {
        let t = Instant::now();
        let v = f();
        report(&v, t.elapsed().as_secs_f64());
        verdicts.push(v);
    };
    run(&mut criterion1);
    let t = Instant::now();
    let cases = sdr_cases();
    let sdr_secs = t.elapsed().as_secs_f64();
    run(&mut || criterion2(&cases, sdr_secs));
    run(&mut || criterion3(&cases));
    run(&mut criterion4);
    let t = Instant::now();
    let fig1 = run_experiment(&preset("fig1").unwrap()).unwrap();
    let fig1_secs = t.elapsed().as_secs_f64();
    let fig4 = run_experiment(&preset("fig4").unwrap()).unwrap();
    run(&mut || criterion5(&fig1, &fig4));
    run(&mut || criterion6(&fig1, fig1_secs));
    run(&mut || criterion7(&fig4));
    run(&mut criterion8);
    run(&mut criterion9);
    run(&mut criterion10);
    let failed: Vec<usize> = verdicts.iter().filter(|v| !v.pass).map(|v| v.id).collect();
    println!("acceptance: {} of {} criteria pass; failing: {failed:?}", verdicts.len() - failed.len(), verdicts.len());
    if !failed.is_empty() && std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
        std::process::exit(1);
    }
}
