//! CSV tables and JSON sidecars for experiment results.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde_json::json;

use crate::error::Result;
use crate::sim::run::{dbm, sweep_column, ExperimentResult, SchemeRun, TrialRecord};
use crate::sim::spec::ExperimentKind;

/// Significant digits of every emitted number.
pub const SIG_DIGITS: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl Cell {
    fn render(&self, out: &mut String) {
        match self {
            Cell::Num(x) => out.push_str(&format_number(*x)),
            Cell::Text(t) => out.push_str(t),
        }
    }
}

/// Rounds to [`SIG_DIGITS`] significant digits and prints the shortest
/// decimal that reads back to the rounded value.
pub fn format_number(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let rounded: f64 = format!("{:.*e}", SIG_DIGITS - 1, x).parse().expect("formatted float parses");
    let mag = rounded.abs();
    if rounded == 0.0 || (1e-5..1e15).contains(&mag) {
        format!("{rounded}")
    } else {
        format!("{rounded:e}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            for (i, c) in row.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                c.render(&mut out);
            }
            out.push('\n');
        }
        out
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }
}

/// Averaged quantity: plain values are averaged directly, powers are
/// averaged in watts and printed in dBm.
#[derive(Debug, Clone, Copy)]
enum Val {
    Plain(f64),
    Dbm(f64),
}

impl Val {
    fn raw(&self) -> f64 {
        match *self {
            Val::Plain(x) | Val::Dbm(x) => x,
        }
    }

    fn cell(&self, x: f64) -> Cell {
        match self {
            Val::Plain(_) => Cell::Num(x),
            Val::Dbm(_) => Cell::Num(dbm(x)),
        }
    }
}

struct Row {
    key: Vec<Cell>,
    trial: usize,
    sub: Vec<Cell>,
    values: Vec<Val>,
    status: String,
    usable: bool,
}

fn key_text(cells: &[Cell]) -> String {
    let mut s = String::new();
    for c in cells {
        c.render(&mut s);
        s.push('\u{1f}');
    }
    s
}

fn assemble(key_names: &[&str], sub_names: &[&str], value_names: &[&str], rows: Vec<Row>, aggregate: bool) -> Table {
    let mut header: Vec<String> = key_names.iter().map(|s| s.to_string()).collect();
    header.push("trial".into());
    header.extend(sub_names.iter().map(|s| s.to_string()));
    header.extend(value_names.iter().map(|s| s.to_string()));
    header.push("status".into());
    header.push("count".into());

    let mut groups: BTreeMap<(usize, String), (Vec<Cell>, Vec<Cell>, Vec<Val>, Vec<f64>, usize)> = BTreeMap::new();
    let mut order = 0usize;
    let mut seen: BTreeMap<String, usize> = BTreeMap::new();
    let mut out = Vec::with_capacity(rows.len());
    for r in rows {
        let mut cells = r.key.clone();
        cells.push(Cell::Num(r.trial as f64));
        cells.extend(r.sub.iter().cloned());
        cells.extend(r.values.iter().map(|v| v.cell(v.raw())));
        cells.push(Cell::Text(r.status.clone()));
        cells.push(Cell::Num(1.0));
        out.push(cells);
        if aggregate {
            let k = format!("{}|{}", key_text(&r.key), key_text(&r.sub));
            let idx = *seen.entry(k.clone()).or_insert_with(|| {
                order += 1;
                order
            });
            let g = groups
                .entry((idx, k))
                .or_insert_with(|| (r.key.clone(), r.sub.clone(), r.values.clone(), vec![0.0; r.values.len()], 0));
            if r.usable {
                for (acc, v) in g.3.iter_mut().zip(&r.values) {
                    *acc += v.raw();
                }
                g.4 += 1;
            }
        }
    }
    for (_, (key, sub, kinds, sums, n)) in groups {
        let mut cells = key;
        cells.push(Cell::Text("mean".into()));
        cells.extend(sub);
        for (k, s) in kinds.iter().zip(sums) {
            cells.push(if n > 0 { k.cell(s / n as f64) } else { Cell::Num(f64::NAN) });
        }
        cells.push(Cell::Text("aggregate".into()));
        cells.push(Cell::Num(n as f64));
        out.push(cells);
    }
    Table { header, rows: out }
}

fn padded(objectives: &[f64], len: usize) -> Vec<f64> {
    let last = objectives.last().copied().unwrap_or(f64::NAN);
    (0..len).map(|i| objectives.get(i).copied().unwrap_or(last)).collect()
}

fn scheme_rows(rec: &TrialRecord, key: &[Cell], mut each: impl FnMut(&SchemeRun) -> Vec<(Vec<Cell>, Vec<Val>)>) -> Vec<Row> {
    let mut rows = Vec::new();
    for run in &rec.runs {
        for (sub, values) in each(run) {
            let mut s = vec![Cell::Text(run.scheme.clone())];
            s.extend(sub);
            rows.push(Row {
                key: key.to_vec(),
                trial: rec.trial,
                sub: s,
                values,
                status: run.status.as_str().into(),
                usable: run.status.usable(),
            });
        }
    }
    rows
}

/// Fixed column layout per experiment kind; trial rows first, then means.
pub fn build_table(result: &ExperimentResult) -> Table {
    let spec = &result.spec;
    let sweep = sweep_column(spec.sweep.parameter);
    let max_iter = spec.stopping.max_iter;
    let mut rows = Vec::new();
    let nan = f64::NAN;
    match spec.kind {
        ExperimentKind::MseVsIteration => {
            for rec in &result.records {
                let key = [Cell::Num(rec.sweep_value)];
                rows.extend(scheme_rows(rec, &key, |run| {
                    let obj = run.outcome.as_ref().map(|o| o.objectives.clone()).unwrap_or_default();
                    padded(&obj, max_iter)
                        .into_iter()
                        .enumerate()
                        .map(|(i, q)| (vec![Cell::Num((i + 1) as f64)], vec![Val::Plain(1.0 / q), Val::Plain(rec.bound)]))
                        .collect()
                }));
            }
            assemble(&[sweep], &["scheme", "iteration"], &["mse", "bound"], rows, true)
        }
        ExperimentKind::PowerVsIteration => {
            for rec in &result.records {
                let key = [Cell::Num(rec.sweep_value)];
                rows.extend(scheme_rows(rec, &key, |run| {
                    let obj = run.outcome.as_ref().map(|o| o.objectives.clone()).unwrap_or_default();
                    padded(&obj, max_iter)
                        .into_iter()
                        .enumerate()
                        .map(|(i, p)| (vec![Cell::Num((i + 1) as f64)], vec![Val::Plain(p), Val::Dbm(p)]))
                        .collect()
                }));
            }
            assemble(&[sweep], &["scheme", "iteration"], &["fc_power_w", "fc_power_dbm"], rows, true)
        }
        ExperimentKind::MseVsNs | ExperimentKind::PowerVsGamma | ExperimentKind::Custom => {
            for rec in &result.records {
                let key = [Cell::Num(rec.sweep_value)];
                rows.extend(scheme_rows(rec, &key, |run| {
                    let (mse, p, it) = run
                        .outcome
                        .as_ref()
                        .map(|o| (o.mse, o.fc_power, o.iterations as f64))
                        .unwrap_or((nan, nan, nan));
                    vec![(
                        vec![],
                        vec![Val::Plain(mse), Val::Plain(rec.bound), Val::Plain(p), Val::Dbm(p), Val::Plain(it)],
                    )]
                }));
            }
            assemble(&[sweep], &["scheme"], &["mse", "bound", "fc_power_w", "fc_power_dbm", "iterations"], rows, true)
        }
        ExperimentKind::Tradeoff => {
            for rec in &result.records {
                let Some(curve) = &rec.curve else { continue };
                for (i, &pdbm) in spec.tradeoff_grid_dbm.iter().enumerate() {
                    let mse = curve.points.get(i).map(|p| p.1).unwrap_or(nan);
                    rows.push(Row {
                        key: vec![Cell::Num(rec.sweep_value)],
                        trial: rec.trial,
                        sub: vec![Cell::Num(pdbm)],
                        values: vec![Val::Plain(mse), Val::Plain(rec.bound)],
                        status: curve.status.as_str().into(),
                        usable: curve.status.usable(),
                    });
                }
            }
            assemble(&[sweep], &["power_dbm"], &["mse", "bound"], rows, true)
        }
        ExperimentKind::PowerControlTable => {
            for rec in &result.records {
                let key = [Cell::Num(rec.sweep_value)];
                rows.extend(scheme_rows(rec, &key, |run| {
                    run.sensors
                        .iter()
                        .enumerate()
                        .map(|(k, &(h, t))| {
                            let controlled = if t < h * (1.0 - crate::sim::run::EMIT_TOL) { 1.0 } else { 0.0 };
                            (vec![Cell::Num((k + 1) as f64)], vec![Val::Dbm(h), Val::Dbm(t), Val::Plain(controlled)])
                        })
                        .collect()
                }));
            }
            assemble(&[sweep], &["scheme", "sensor"], &["harvested_dbm", "transmit_dbm", "power_controlled"], rows, false)
        }
    }
}

/// Resolved spec, code version and failure count.
pub fn meta_json(result: &ExperimentResult) -> serde_json::Value {
    let failures: Vec<serde_json::Value> = result
        .records
        .iter()
        .flat_map(|r| {
            let runs = r.runs.iter().filter_map(move |s| {
                s.message.as_ref().map(|m| {
                    json!({"sweep": r.sweep_value, "trial": r.trial, "scheme": s.scheme, "status": s.status.as_str(), "message": m})
                })
            });
            let curve = r.curve.iter().filter_map(move |c| {
                c.message.as_ref().map(|m| json!({"sweep": r.sweep_value, "trial": r.trial, "status": c.status.as_str(), "message": m}))
            });
            runs.chain(curve)
        })
        .collect();
    json!({
        "name": result.spec.name,
        "code_version": env!("CARGO_PKG_VERSION"),
        "spec": result.spec,
        "trials": result.spec.trials,
        "failures": failures,
    })
}

/// Writes `<name>.csv` and `<name>.meta.json` into `dir` and returns both paths.
pub fn write_outputs(result: &ExperimentResult, dir: &Path) -> Result<(PathBuf, PathBuf)> {
    std::fs::create_dir_all(dir)?;
    let csv = dir.join(format!("{}.csv", result.spec.name));
    let meta = dir.join(format!("{}.meta.json", result.spec.name));
    std::fs::write(&csv, build_table(result).to_csv())?;
    let mut text = serde_json::to_string_pretty(&meta_json(result)).map_err(|e| crate::error::CoreError::Io(e.to_string()))?;
    let _ = writeln!(text);
    std::fs::write(&meta, text)?;
    Ok((csv, meta))
}
