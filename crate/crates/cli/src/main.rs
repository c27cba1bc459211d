use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use wpt_core::joint::{algorithm1, algorithm2, default_init, verify_certificates, RunTrace, SdrKind, StoppingRule};
use wpt_core::model::dbm_to_watts;
use wpt_core::sim::presets::describe;
use wpt_core::schemes::SchemeRegistry;
use wpt_core::sim::{
    draw_channels, draw_geometry, preset, run_experiment, trial_rng, write_outputs, ExperimentSpec, GeometrySpec,
    NetworkSpec, PRESET_NAMES,
};

#[derive(Parser)]
#[command(name = "wpt-estim", version, about = "Wirelessly powered distributed estimation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProblemArg {
    Mse,
    Power,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment from a TOML/JSON spec file or a preset name.
    Run {
        spec: String,
        #[arg(long, default_value = "results")]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        threads: Option<usize>,
        /// Replace the spec's schemes (repeatable).
        #[arg(long = "scheme")]
        schemes: Vec<String>,
    },
    /// List the built-in presets, or print one as TOML.
    Presets {
        #[arg(long)]
        show: Option<String>,
    },
    /// Solve one seeded instance and print the design and certificate report.
    Solve {
        #[arg(long, default_value_t = 5)]
        n_s: usize,
        #[arg(long, default_value_t = 5)]
        n_r: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        trial: u64,
        #[arg(long, value_enum, default_value = "mse")]
        problem: ProblemArg,
        /// Distortion target for power minimization.
        #[arg(long, default_value_t = 0.03)]
        gamma_inv: f64,
        #[arg(long, default_value_t = 30.0)]
        power_dbm: f64,
        #[arg(long, default_value_t = 0.1)]
        sensing_var: f64,
        #[arg(long, default_value = "joint")]
        scheme: String,
        /// Write the last relaxation and its solution as JSON.
        #[arg(long)]
        dump: Option<PathBuf>,
    },
}

fn load_spec(arg: &str) -> Result<ExperimentSpec> {
    let path = Path::new(arg);
    if path.exists() {
        return ExperimentSpec::load(path).with_context(|| format!("loading {arg}"));
    }
    if PRESET_NAMES.contains(&arg) {
        return Ok(preset(arg)?);
    }
    bail!("`{arg}` is neither a spec file nor a preset ({})", PRESET_NAMES.join(", "))
}

fn run(arg: &str, out: &Path, seed: Option<u64>, trials: Option<usize>, threads: Option<usize>, schemes: Vec<String>) -> Result<()> {
    let mut spec = load_spec(arg)?;
    if let Some(s) = seed {
        spec.seed = s;
    }
    if let Some(t) = trials {
        spec.trials = t;
    }
    if !schemes.is_empty() {
        spec.schemes = schemes;
    }
    spec.validate()?;
    let out = spec.output.clone().filter(|_| out == Path::new("results")).unwrap_or_else(|| out.to_path_buf());
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads.unwrap_or(0)).build()?;
    let started = std::time::Instant::now();
    let result = pool.install(|| run_experiment(&spec))?;
    let (csv, meta) = write_outputs(&result, &out)?;
    log::info!("{} finished in {:.1} s", spec.name, started.elapsed().as_secs_f64());
    println!("wrote {} and {} ({} failed runs)", csv.display(), meta.display(), result.failures());
    Ok(())
}

fn presets(show: Option<String>) -> Result<()> {
    match show {
        Some(name) => print!("{}", preset(&name)?.to_toml()?),
        None => {
            for name in PRESET_NAMES {
                println!("{name:10} {}", describe(name).unwrap_or(""));
            }
        }
    }
    Ok(())
}

fn certificate(trace: &RunTrace, kind: SdrKind, dump: Option<&Path>) -> Result<serde_json::Value> {
    let (Some(problem), Some(sol)) = (&trace.last_problem, &trace.last_solution) else {
        return Ok(serde_json::Value::Null);
    };
    if let Some(path) = dump {
        wpt_sdp::write_dump(path, problem, Some(sol)).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(serde_json::to_value(verify_certificates(problem, sol, kind))?)
}

#[allow(clippy::too_many_arguments)]
fn solve(
    n_s: usize,
    n_r: usize,
    seed: u64,
    trial: u64,
    problem: ProblemArg,
    gamma_inv: f64,
    power_dbm: f64,
    sensing_var: f64,
    scheme: &str,
    dump: Option<&Path>,
) -> Result<()> {
    let net = NetworkSpec { n_s, n_r, total_power_dbm: power_dbm, sensing_var, ..NetworkSpec::default() };
    let cfg = net.to_config()?;
    let mut rng = trial_rng(seed, trial);
    let geometry = draw_geometry(&GeometrySpec::default(), n_s, &mut rng)?;
    let ch = draw_channels(&cfg, &geometry, &mut rng)?;
    let stop = StoppingRule::default();
    let report = if scheme == "joint" {
        let init = default_init(&cfg, &ch);
        let (trace, kind) = match problem {
            ProblemArg::Mse => (algorithm1(&cfg, &ch, &init, &stop)?, SdrKind::Sdr1 { total_power: dbm_to_watts(power_dbm) }),
            ProblemArg::Power => (algorithm2(&cfg, &ch, 1.0 / gamma_inv, &init, &stop)?, SdrKind::Sdr2),
        };
        json!({
            "scheme": scheme,
            "status": trace.status,
            "iterations": trace.iterations,
            "mse": trace.mse,
            "fc_power_w": trace.fc_power,
            "objectives": trace.objectives(),
            "sensor_powers_w": trace.sensor_powers,
            "certificate": certificate(&trace, kind, dump)?,
        })
    } else {
        let registry = SchemeRegistry::with_defaults(stop, 1, None);
        let out = match problem {
            ProblemArg::Mse => registry.mse(scheme)?.minimize_mse(&cfg, &ch)?,
            ProblemArg::Power => registry.power(scheme)?.minimize_power(&cfg, &ch, 1.0 / gamma_inv)?,
        };
        json!({
            "scheme": scheme,
            "status": out.status,
            "iterations": out.iterations,
            "mse": out.mse,
            "fc_power_w": out.fc_power,
            "objectives": out.objectives,
        })
    };
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match Cli::parse().command {
        Command::Run { spec, out, seed, trials, threads, schemes } => run(&spec, &out, seed, trials, threads, schemes),
        Command::Presets { show } => presets(show),
        Command::Solve { n_s, n_r, seed, trial, problem, gamma_inv, power_dbm, sensing_var, scheme, dump } => solve(
            n_s,
            n_r,
            seed,
            trial,
            problem,
            gamma_inv,
            power_dbm,
            sensing_var,
            &scheme,
            dump.as_deref(),
        ),
    }
}
