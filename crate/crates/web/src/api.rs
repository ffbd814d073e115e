//! JSON-in/JSON-out surface behind the browser demo. Everything here is
//! plain Rust so it can be tested natively; the wasm bindings in `lib.rs`
//! are one-line wrappers.

use serde::Deserialize;
use serde_json::json;

use quditsim::basis::BasisLabel;
use quditsim::config::SimConfig;
use quditsim::convert::density_from_bloch;
use quditsim::integrator::{integrate, standard_monitors, Method};
use quditsim::oracle::{cross_check, evolve_density, DensityMatrix};
use quditsim::rhs::CompiledRhs;
use quditsim::system::SystemSpec;
use quditsim::HalfInteger;

/// Request for a trajectory: a run configuration plus an optional list of
/// composite component tokens to return (defaults to every qudit's
/// rank-1 x, y, z components).
#[derive(Deserialize)]
struct SimulateRequest {
    config: SimConfig,
    #[serde(default)]
    components: Option<Vec<String>>,
}

const MAX_STEPS: usize = 2_000_000;
const MAX_SAMPLES: usize = 20_000;

fn guard_size(
    spec: &SystemSpec,
    cfg: &quditsim::integrator::IntegrationConfig,
) -> Result<(), String> {
    if let Method::Rk4 { dt } = cfg.method {
        let steps = ((cfg.t1 - cfg.t0) / dt).round() as usize;
        if steps > MAX_STEPS {
            return Err(format!(
                "{steps} steps exceed the demo limit of {MAX_STEPS}"
            ));
        }
        if steps / cfg.sample_every.max(1) > MAX_SAMPLES {
            return Err(format!(
                "more than {MAX_SAMPLES} samples requested; raise integration.sample_every"
            ));
        }
    }
    let _ = spec;
    Ok(())
}

/// Flat indices of the default plotted components: the rank-1 (x, y, z) of
/// each qudit, all other axes at the unit element.
fn default_components(spec: &SystemSpec) -> Vec<usize> {
    let mut out = Vec::new();
    for qudit in 0..spec.qudit_count() {
        for local in 1..=3usize {
            let mut multi = vec![0usize; spec.qudit_count()];
            multi[qudit] = local;
            out.push(spec.flat_index(&multi));
        }
    }
    out
}

fn resolve_components(
    spec: &SystemSpec,
    requested: &Option<Vec<String>>,
) -> Result<Vec<usize>, String> {
    match requested {
        None => Ok(default_components(spec)),
        Some(tokens) => {
            let all: Vec<String> = (0..spec.state_len())
                .map(|f| spec.composite_token(f))
                .collect();
            tokens
                .iter()
                .map(|t| {
                    all.iter()
                        .position(|have| have == t)
                        .ok_or_else(|| format!("unknown component token {t:?}"))
                })
                .collect()
        }
    }
}

/// Runs a simulation and returns per-component time series ready to plot.
pub fn simulate(request_json: &str) -> Result<String, String> {
    let request: SimulateRequest =
        serde_json::from_str(request_json).map_err(|e| format!("request: {e}"))?;
    let setup = request.config.build(None).map_err(|e| e.to_string())?;
    guard_size(&setup.spec, &setup.integration)?;
    let flats = resolve_components(&setup.spec, &request.components)?;

    let monitors = standard_monitors(&setup.field);
    let compiled = CompiledRhs::new(&setup.spec, &setup.field).map_err(|e| e.to_string())?;
    let traj = integrate(
        |r, t, out: &mut [f64]| compiled.eval_into(r, t, out),
        &setup.initial,
        &setup.integration,
        &monitors,
    )
    .map_err(|e| e.to_string())?;

    let series: Vec<serde_json::Value> = flats
        .iter()
        .map(|&flat| {
            let values: Vec<f64> = traj.states.iter().map(|s| s.components()[flat]).collect();
            json!({
                "token": setup.spec.composite_token(flat),
                "values": values,
            })
        })
        .collect();
    let monitor_map: serde_json::Map<String, serde_json::Value> = traj
        .monitors
        .iter()
        .map(|(name, values)| (name.clone(), json!(values)))
        .collect();
    Ok(json!({
        "spins": setup.spec.spins().iter().map(|s| s.to_string()).collect::<Vec<_>>(),
        "times": traj.times,
        "series": series,
        "monitors": monitor_map,
    })
    .to_string())
}

/// Structure-constant tables for one spin, with user-facing labels.
pub fn constants_table(spin_str: &str) -> Result<String, String> {
    let spin: HalfInteger = spin_str
        .parse()
        .map_err(|e: quditsim::Error| e.to_string())?;
    let tables = quditsim::algebra::StructureTables::get(spin).map_err(|e| e.to_string())?;
    let basis = quditsim::basis::SpinBasis::get(spin).map_err(|e| e.to_string())?;
    let labels: Vec<String> = basis.labels.iter().map(BasisLabel::to_string).collect();
    let rows = |t: &quditsim::algebra::SparseTriple| -> Vec<serde_json::Value> {
        t.iter()
            .map(|((i, j, k), v)| {
                json!({
                    "indices": [i, j, k],
                    "labels": [labels[i], labels[j], labels[k]],
                    "value": v,
                })
            })
            .collect()
    };
    Ok(json!({
        "spin": spin.to_string(),
        "n": tables.n,
        "c_unit": tables.c_unit,
        "c_norm": tables.c_norm,
        "labels": labels,
        "e": rows(&tables.e),
        "g": rows(&tables.g),
    })
    .to_string())
}

/// Runs the real evolution and the complex reference on the same grid and
/// reports their disagreement over time.
pub fn validate(request_json: &str) -> Result<String, String> {
    let request: SimulateRequest =
        serde_json::from_str(request_json).map_err(|e| format!("request: {e}"))?;
    let setup = request.config.build(None).map_err(|e| e.to_string())?;
    if !matches!(setup.integration.method, Method::Rk4 { .. }) {
        return Err("validation needs integration.method = \"rk4\"".into());
    }
    guard_size(&setup.spec, &setup.integration)?;

    let compiled = CompiledRhs::new(&setup.spec, &setup.field).map_err(|e| e.to_string())?;
    let monitors = standard_monitors(&setup.field);
    let traj = integrate(
        |r, t, out: &mut [f64]| compiled.eval_into(r, t, out),
        &setup.initial,
        &setup.integration,
        &monitors,
    )
    .map_err(|e| e.to_string())?;
    let rho0 = DensityMatrix::new(density_from_bloch(&setup.initial))
        .map_err(|e| format!("initial state: {e}"))?;
    let reference = evolve_density(&setup.spec, &setup.field, &rho0, &setup.integration)
        .map_err(|e| e.to_string())?;
    let report = cross_check(&traj, &reference).map_err(|e| e.to_string())?;

    let drifts: serde_json::Map<String, serde_json::Value> = traj
        .monitors
        .iter()
        .map(|(name, _)| (name.clone(), json!(traj.monitor_drift(name))))
        .collect();
    Ok(json!({
        "max_component_error": report.max_component_error,
        "per_time": report.per_time,
        "invariant_drifts": drifts,
        "samples": traj.len(),
    })
    .to_string())
}
