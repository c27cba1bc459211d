//! Built-in experiments matching the published figures and table.

use crate::error::{CoreError, Result};
use crate::sim::geometry::GeometrySpec;
use crate::sim::spec::{ExperimentKind, ExperimentSpec, NetworkSpec, Sweep, SweepParameter, DEFAULT_TRIALS};

pub const PRESET_NAMES: [&str; 7] = ["fig1", "fig1-text", "fig2", "fig4", "fig5", "fig6", "table2"];

fn base(name: &str, kind: ExperimentKind, parameter: SweepParameter, values: &[f64]) -> ExperimentSpec {
    ExperimentSpec {
        name: name.to_string(),
        kind,
        sweep: Sweep { parameter, values: values.to_vec() },
        trials: DEFAULT_TRIALS,
        seed: 1,
        network: NetworkSpec::default(),
        geometry: GeometrySpec::default(),
        stopping: Default::default(),
        schemes: vec!["joint".to_string()],
        starts: 1,
        weights: None,
        gamma_inv: None,
        problem: None,
        tradeoff_grid_dbm: Vec::new(),
        output: None,
    }
}

/// One-line descriptions for `presets` listings.
pub fn describe(name: &str) -> Option<&'static str> {
    Some(match name {
        "fig1" => "MSE vs iteration, n_s=5, R_s=0.1 I, P=30 dBm, n_r in {5,10,15,20}",
        "fig1-text" => "as fig1 with R_s=0.01 I",
        "fig2" => "MSE vs n_s, n_r=5, joint vs two-phase",
        "fig4" => "FC power vs iteration, n_s=10, target 0.015, n_r in {5,10,15,20}",
        "fig5" => "FC power vs target, n_s=10, n_r=5, joint vs two-phase",
        "fig6" => "common-harvester power-distortion trade-off, n_s=n_r in {4,8}, R_s=0.01 I",
        "table2" => "per-sensor harvested vs transmit power, n_s=7, n_r=2",
        _ => return None,
    })
}

pub fn preset(name: &str) -> Result<ExperimentSpec> {
    let spec = match name {
        "fig1" | "fig1-text" => {
            let mut s = base(name, ExperimentKind::MseVsIteration, SweepParameter::NR, &[5.0, 10.0, 15.0, 20.0]);
            s.network.n_s = 5;
            s.network.sensing_var = if name == "fig1" { 0.1 } else { 0.01 };
            s
        }
        "fig2" => {
            let mut s = base(name, ExperimentKind::MseVsNs, SweepParameter::NS, &[2.0, 4.0, 6.0, 8.0, 10.0]);
            s.network.n_r = 5;
            s.schemes = vec!["joint".into(), "two-phase".into()];
            s
        }
        "fig4" => {
            let mut s = base(name, ExperimentKind::PowerVsIteration, SweepParameter::NR, &[5.0, 10.0, 15.0, 20.0]);
            s.network.n_s = 10;
            s.gamma_inv = Some(0.015);
            s
        }
        "fig5" => {
            let mut s = base(name, ExperimentKind::PowerVsGamma, SweepParameter::GammaInv, &[0.02, 0.03, 0.04]);
            s.network.n_s = 10;
            s.network.n_r = 5;
            s.schemes = vec!["joint".into(), "two-phase".into()];
            s
        }
        "fig6" => {
            let mut s = base(name, ExperimentKind::Tradeoff, SweepParameter::Size, &[4.0, 8.0]);
            s.network.sensing_var = 0.01;
            s.geometry.colocated = true;
            s.tradeoff_grid_dbm = (0..=18).map(|i| -30.0 + 5.0 * i as f64).collect();
            s
        }
        "table2" => {
            let mut s = base(name, ExperimentKind::PowerControlTable, SweepParameter::None, &[0.0]);
            s.network.n_s = 7;
            s.network.n_r = 2;
            s
        }
        _ => {
            return Err(CoreError::Config(format!("unknown preset `{name}` (known: {})", PRESET_NAMES.join(", "))));
        }
    };
    spec.validate()?;
    Ok(spec)
}
