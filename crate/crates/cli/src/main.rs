//! Command-line front end: run simulations, dump structure-constant
//! tables, cross-check the real evolution against the complex reference,
//! and benchmark the two paths.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure,
//! 4 validation failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde_json::json;

use quditsim::config::SimConfig;
use quditsim::convert::density_from_bloch;
use quditsim::integrator::{integrate, standard_monitors, Method, Monitor, Trajectory};
use quditsim::oracle::{cross_check, evolve_density, DensityMatrix};
use quditsim::rhs::CompiledRhs;
use quditsim::system::SystemSpec;
use quditsim::{Error, HalfInteger};

#[derive(Parser)]
#[command(
    name = "quditsim",
    version,
    about = "Bloch-vector dynamics of coupled qudits"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a configured system and write the trajectory
    Simulate {
        /// TOML run configuration
        #[arg(long)]
        config: PathBuf,
        /// Overrides output.path from the config
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Dump the su(2S+1) structure-constant tables as JSON
    Constants {
        /// Spin like "1/2", "1", "3/2"
        #[arg(long)]
        spin: String,
        /// Write to a file instead of stdout
        #[arg(long)]
        output: Option<PathBuf>,
        /// Also include the basis matrices (real and imaginary parts)
        #[arg(long)]
        include_basis: bool,
    },
    /// Run both representations and report their disagreement
    Validate {
        #[arg(long)]
        config: PathBuf,
        /// Largest acceptable |R_bloch - R_reference|
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, hide = true)]
        corrupt_tables: bool,
    },
    /// Time the real and complex right-hand sides on the same run
    Benchmark {
        #[arg(long)]
        config: PathBuf,
    },
}

enum CliError {
    Config(String),
    Numerical(String),
    Validation(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> CliError {
        match e {
            Error::NonFinite { .. } | Error::StepUnderflow { .. } => {
                CliError::Numerical(e.to_string())
            }
            other => CliError::Config(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate { config, output } => cmd_simulate(&config, output.as_deref()),
        Command::Constants {
            spin,
            output,
            include_basis,
        } => cmd_constants(&spin, output.as_deref(), include_basis),
        Command::Validate {
            config,
            tol,
            corrupt_tables,
        } => cmd_validate(&config, tol, corrupt_tables),
        Command::Benchmark { config } => cmd_benchmark(&config),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(3)
        }
        Err(CliError::Validation(msg)) => {
            eprintln!("validation failed: {msg}");
            ExitCode::from(4)
        }
    }
}

fn load_config(path: &Path) -> Result<(SimConfig, Option<PathBuf>), CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let cfg: SimConfig =
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    Ok((cfg, path.parent().map(Path::to_path_buf)))
}

fn selected_monitors(
    cfg: &SimConfig,
    field: &quditsim::field::FieldSpec,
) -> Result<Vec<Monitor>, CliError> {
    let names = cfg.output.monitor_names().map_err(CliError::from)?;
    let mut all = standard_monitors(field);
    all.retain(|m| names.contains(&m.name));
    Ok(all)
}

fn cmd_simulate(config_path: &Path, output_override: Option<&Path>) -> Result<(), CliError> {
    let (cfg, base_dir) = load_config(config_path)?;
    let setup = cfg.build(base_dir.as_deref())?;
    let monitors = selected_monitors(&cfg, &setup.field)?;
    let compiled = CompiledRhs::new(&setup.spec, &setup.field)?;
    let traj = integrate(
        |r, t, out: &mut [f64]| compiled.eval_into(r, t, out),
        &setup.initial,
        &setup.integration,
        &monitors,
    )?;

    let out_path = output_override
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from(&cfg.output.path));
    match cfg.output.format.as_str() {
        "csv" => write_csv(&out_path, &setup.spec, &traj)?,
        "json" => write_json(&out_path, &setup.spec, &traj)?,
        other => return Err(CliError::Config(format!("unknown output format {other:?}"))),
    }
    write_metadata(&out_path, &cfg, &setup.spec, &traj)?;
    println!(
        "wrote {} samples over t in [{}, {}] to {}",
        traj.len(),
        setup.integration.t0,
        setup.integration.t1,
        out_path.display()
    );
    Ok(())
}

/// All floats with 17 significant digits so downstream reads are lossless.
fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_csv(path: &Path, spec: &SystemSpec, traj: &Trajectory) -> Result<(), CliError> {
    let mut text = String::from("t");
    for flat in 0..spec.state_len() {
        text.push_str(&format!(",R[{}]", spec.composite_token(flat)));
    }
    for (name, _) in &traj.monitors {
        text.push(',');
        text.push_str(name);
    }
    text.push('\n');
    for (i, t) in traj.times.iter().enumerate() {
        text.push_str(&fmt(*t));
        for v in traj.states[i].components() {
            text.push(',');
            text.push_str(&fmt(*v));
        }
        for (_, values) in &traj.monitors {
            text.push(',');
            text.push_str(&fmt(values[i]));
        }
        text.push('\n');
    }
    fs::write(path, text)
        .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))
}

fn write_json(path: &Path, spec: &SystemSpec, traj: &Trajectory) -> Result<(), CliError> {
    let labels: Vec<String> = (0..spec.state_len())
        .map(|f| spec.composite_token(f))
        .collect();
    let states: Vec<&[f64]> = traj.states.iter().map(|s| s.components()).collect();
    let monitors: serde_json::Map<String, serde_json::Value> = traj
        .monitors
        .iter()
        .map(|(name, values)| (name.clone(), json!(values)))
        .collect();
    let doc = json!({
        "labels": labels,
        "times": traj.times,
        "states": states,
        "monitors": monitors,
    });
    fs::write(
        path,
        serde_json::to_string_pretty(&doc).expect("serializable"),
    )
    .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))
}

fn write_metadata(
    out_path: &Path,
    cfg: &SimConfig,
    spec: &SystemSpec,
    traj: &Trajectory,
) -> Result<(), CliError> {
    let labels: Vec<String> = (0..spec.state_len())
        .map(|f| spec.composite_token(f))
        .collect();
    let label_map: Vec<serde_json::Value> = (0..spec.state_len())
        .map(|f| {
            json!({
                "flat": f,
                "token": spec.composite_token(f),
                "per_qudit": spec.labels_at(f).iter().map(|l| l.to_string()).collect::<Vec<_>>(),
            })
        })
        .collect();
    let mut columns = vec!["t".to_string()];
    columns.extend(labels.iter().map(|l| format!("R[{l}]")));
    columns.extend(traj.monitors.iter().map(|(n, _)| n.clone()));
    let doc = json!({
        "spins": spec.spins().iter().map(|s| s.to_string()).collect::<Vec<_>>(),
        "columns": columns,
        "labels": label_map,
        "samples": traj.len(),
        "config": cfg,
    });
    let meta_path = out_path.with_extension(match out_path.extension() {
        Some(ext) => format!("{}.meta.json", ext.to_string_lossy()),
        None => "meta.json".to_string(),
    });
    fs::write(
        &meta_path,
        serde_json::to_string_pretty(&doc).expect("serializable"),
    )
    .map_err(|e| CliError::Config(format!("cannot write {}: {e}", meta_path.display())))
}

fn cmd_constants(
    spin_str: &str,
    output: Option<&Path>,
    include_basis: bool,
) -> Result<(), CliError> {
    let spin: HalfInteger = spin_str
        .parse()
        .map_err(|e: Error| CliError::Config(e.to_string()))?;
    let tables = quditsim::algebra::StructureTables::get(spin)?;
    let basis = quditsim::basis::SpinBasis::get(spin)?;
    let entries = |t: &quditsim::algebra::SparseTriple| -> Vec<serde_json::Value> {
        t.iter().map(|((i, j, k), v)| json!([i, j, k, v])).collect()
    };
    let mut doc = json!({
        "spin": spin.to_string(),
        "n": tables.n,
        "c_unit": tables.c_unit,
        "c_norm": tables.c_norm,
        "labels": basis.labels.iter().map(|l| l.to_string()).collect::<Vec<_>>(),
        "e": entries(&tables.e),
        "g": entries(&tables.g),
    });
    if include_basis {
        let matrices: Vec<serde_json::Value> = basis
            .labels
            .iter()
            .zip(basis.matrices())
            .map(|(label, m)| {
                let part = |f: fn(&quditsim::C64) -> f64| -> Vec<Vec<f64>> {
                    (0..m.nrows())
                        .map(|r| (0..m.ncols()).map(|c| f(&m[(r, c)])).collect())
                        .collect()
                };
                json!({
                    "label": label.to_string(),
                    "re": part(|v| v.re),
                    "im": part(|v| v.im),
                })
            })
            .collect();
        doc["basis"] = json!(matrices);
    }
    let text = serde_json::to_string_pretty(&doc).expect("serializable");
    match output {
        Some(path) => fs::write(path, text)
            .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?,
        None => println!("{text}"),
    }
    Ok(())
}

fn cmd_validate(config_path: &Path, tol: f64, corrupt: bool) -> Result<(), CliError> {
    let (cfg, base_dir) = load_config(config_path)?;
    let setup = cfg.build(base_dir.as_deref())?;
    if !matches!(setup.integration.method, Method::Rk4 { .. }) {
        return Err(CliError::Config(
            "validation compares fixed grids; use integration.method = \"rk4\"".into(),
        ));
    }

    let mut compiled = CompiledRhs::new(&setup.spec, &setup.field)?;
    if corrupt {
        compiled.perturb_first_entry(1e-3);
    }
    let monitors = standard_monitors(&setup.field);
    let traj = integrate(
        |r, t, out: &mut [f64]| compiled.eval_into(r, t, out),
        &setup.initial,
        &setup.integration,
        &monitors,
    )?;

    let rho0 = DensityMatrix::new(density_from_bloch(&setup.initial))
        .map_err(|e| CliError::Config(format!("initial state: {e}")))?;
    let reference = evolve_density(&setup.spec, &setup.field, &rho0, &setup.integration)?;
    let report = cross_check(&traj, &reference)?;

    let drifts: serde_json::Map<String, serde_json::Value> = traj
        .monitors
        .iter()
        .map(|(name, _)| {
            (
                name.clone(),
                json!(traj.monitor_drift(name).unwrap_or(f64::NAN)),
            )
        })
        .collect();
    let passed = report.max_component_error <= tol;
    let doc = json!({
        "max_component_error": report.max_component_error,
        "tolerance": tol,
        "passed": passed,
        "samples": traj.len(),
        "invariant_drifts": drifts,
        "per_time": report.per_time,
    });
    println!(
        "{}",
        serde_json::to_string_pretty(&doc).expect("serializable")
    );
    if passed {
        Ok(())
    } else {
        Err(CliError::Validation(format!(
            "max component error {:.3e} exceeds tolerance {tol:.3e}",
            report.max_component_error
        )))
    }
}

fn cmd_benchmark(config_path: &Path) -> Result<(), CliError> {
    let (cfg, base_dir) = load_config(config_path)?;
    let setup = cfg.build(base_dir.as_deref())?;
    let Method::Rk4 { dt } = setup.integration.method else {
        return Err(CliError::Config(
            "benchmarks use fixed steps; set integration.method = \"rk4\"".into(),
        ));
    };
    let (steps, _) =
        quditsim::integrator::fixed_step_grid(setup.integration.t0, setup.integration.t1, dt)?;

    // no monitors and final-only sampling, so the loop is pure stepping
    let bare = quditsim::integrator::IntegrationConfig {
        sample_every: steps,
        ..setup.integration
    };
    let compiled = CompiledRhs::new(&setup.spec, &setup.field)?;
    let start = Instant::now();
    integrate(
        |r, t, out: &mut [f64]| compiled.eval_into(r, t, out),
        &setup.initial,
        &bare,
        &[],
    )?;
    let real_elapsed = start.elapsed().as_secs_f64();

    let rho0 = DensityMatrix::new(density_from_bloch(&setup.initial))
        .map_err(|e| CliError::Config(format!("initial state: {e}")))?;
    let start = Instant::now();
    evolve_density(&setup.spec, &setup.field, &rho0, &bare)?;
    let complex_elapsed = start.elapsed().as_secs_f64();

    let doc = json!({
        "system": setup.spec.spins().iter().map(|s| s.to_string()).collect::<Vec<_>>(),
        "hilbert_dim": setup.spec.total_dim(),
        "state_len": setup.spec.state_len(),
        "rhs_nnz": compiled.nnz(),
        "steps": steps,
        "real_seconds_per_step": real_elapsed / steps as f64,
        "complex_seconds_per_step": complex_elapsed / steps as f64,
        "complex_over_real_ratio": complex_elapsed / real_elapsed,
    });
    println!(
        "{}",
        serde_json::to_string_pretty(&doc).expect("serializable")
    );
    Ok(())
}
