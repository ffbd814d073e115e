//! Declarative run configuration, shared by the command line (TOML) and
//! the browser demo (JSON). Field indices use the user-facing basis-label
//! notation ("unit", "k,q,x", "k,q,y", "k,z"), spins are strings like
//! "3/2", and nothing quantum is ever read through a float.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::basis::BasisLabel;
use crate::error::{Error, Result};
use crate::field::{FieldSpec, FieldTerm, Primitive};
use crate::integrator::{IntegrationConfig, Method};
use crate::state::BlochState;
use crate::system::SystemSpec;
use crate::{CMatrix, C64};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SimConfig {
    /// Spins as strings, e.g. ["1/2", "1", "3/2"].
    pub spins: Vec<String>,
    #[serde(default)]
    pub field: Vec<FieldTermConfig>,
    pub initial: InitialConfig,
    pub integration: IntegrationSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FieldTermConfig {
    /// One basis label per qudit.
    pub indices: Vec<String>,
    pub profile: ProfileConfig,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ProfileConfig {
    Const {
        amplitude: f64,
    },
    Cos {
        amplitude: f64,
        omega: f64,
        #[serde(default)]
        phase: f64,
    },
    Sin {
        amplitude: f64,
        omega: f64,
        #[serde(default)]
        phase: f64,
    },
    Pulse {
        amplitude: f64,
        t_on: f64,
        t_off: f64,
    },
}

impl ProfileConfig {
    fn to_primitive(&self) -> Primitive {
        match *self {
            ProfileConfig::Const { amplitude } => Primitive::Constant { amplitude },
            ProfileConfig::Cos {
                amplitude,
                omega,
                phase,
            } => Primitive::Cosine {
                amplitude,
                omega,
                phase,
            },
            ProfileConfig::Sin {
                amplitude,
                omega,
                phase,
            } => Primitive::Sine {
                amplitude,
                omega,
                phase,
            },
            ProfileConfig::Pulse {
                amplitude,
                t_on,
                t_off,
            } => Primitive::Pulse {
                amplitude,
                t_on,
                t_off,
            },
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum InitialConfig {
    /// Local Bloch vectors, one per qudit: either n_i components or 3
    /// (the Cartesian rank-1 slots).
    Product { vectors: Vec<Vec<f64>> },
    /// Path to a JSON file holding {"re": [[..]], "im": [[..]]}.
    Density { path: String },
    /// The full flat component array, R at the all-unit index first.
    Bloch { r: Vec<f64> },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IntegrationSection {
    #[serde(default = "default_method")]
    pub method: String,
    pub dt: Option<f64>,
    pub rtol: Option<f64>,
    pub atol: Option<f64>,
    pub dt_init: Option<f64>,
    #[serde(default)]
    pub t0: f64,
    pub t1: f64,
    #[serde(default = "default_sample_every")]
    pub sample_every: usize,
}

fn default_method() -> String {
    "rk4".into()
}

fn default_sample_every() -> usize {
    1
}

pub const ALL_MONITORS: [&str; 4] = ["bloch_length", "purity", "energy", "min_eig"];

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OutputSection {
    #[serde(default = "default_output_path")]
    pub path: String,
    #[serde(default = "default_format")]
    pub format: String,
    /// Subset of ["bloch_length", "purity", "energy", "min_eig"].
    pub monitors: Option<Vec<String>>,
}

fn default_output_path() -> String {
    "trajectory.csv".into()
}

fn default_format() -> String {
    "csv".into()
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            path: default_output_path(),
            format: default_format(),
            monitors: None,
        }
    }
}

impl OutputSection {
    pub fn monitor_names(&self) -> Result<Vec<String>> {
        match &self.monitors {
            None => Ok(ALL_MONITORS.iter().map(|s| s.to_string()).collect()),
            Some(list) => {
                for name in list {
                    if !ALL_MONITORS.contains(&name.as_str()) {
                        return Err(Error::Config(format!(
                            "unknown monitor {name:?}; available: {ALL_MONITORS:?}"
                        )));
                    }
                }
                Ok(list.clone())
            }
        }
    }
}

/// Everything needed to run one simulation.
pub struct RunSetup {
    pub spec: SystemSpec,
    pub field: FieldSpec,
    pub initial: BlochState,
    pub integration: IntegrationConfig,
}

impl SimConfig {
    pub fn build_system(&self) -> Result<SystemSpec> {
        SystemSpec::from_strings(&self.spins)
    }

    pub fn build_field(&self, spec: &SystemSpec) -> Result<FieldSpec> {
        let mut terms = Vec::with_capacity(self.field.len());
        for term in &self.field {
            if term.indices.len() != spec.qudit_count() {
                return Err(Error::FieldArityMismatch {
                    got: term.indices.len(),
                    want: spec.qudit_count(),
                });
            }
            let mut indices = Vec::with_capacity(term.indices.len());
            for (qudit, label_str) in term.indices.iter().enumerate() {
                let label: BasisLabel = label_str.parse()?;
                label.validate_for_spin(spec.spins()[qudit])?;
                let index = spec
                    .basis(qudit)
                    .index_of(&label)
                    .expect("validated label is in the canonical order");
                indices.push(index);
            }
            terms.push(FieldTerm::new(indices, vec![term.profile.to_primitive()]));
        }
        let field = FieldSpec::new(terms);
        field.validate(spec)?;
        Ok(field)
    }

    /// Builds the initial state; `base_dir` anchors relative density paths.
    pub fn build_initial(&self, spec: &SystemSpec, base_dir: Option<&Path>) -> Result<BlochState> {
        match &self.initial {
            InitialConfig::Product { vectors } => BlochState::product(spec, vectors),
            InitialConfig::Bloch { r } => BlochState::from_components(spec, r.clone()),
            InitialConfig::Density { path } => {
                let resolved = match base_dir {
                    Some(dir) => dir.join(path),
                    None => Path::new(path).to_path_buf(),
                };
                let text = std::fs::read_to_string(&resolved).map_err(|e| {
                    Error::Config(format!(
                        "cannot read density file {}: {e}",
                        resolved.display()
                    ))
                })?;
                let rho = parse_density_json(&text, spec.total_dim())?;
                crate::convert::bloch_from_density(spec, &rho)
            }
        }
    }

    pub fn build_integration(&self) -> Result<IntegrationConfig> {
        let section = &self.integration;
        let method = match section.method.as_str() {
            "rk4" => Method::Rk4 {
                dt: section
                    .dt
                    .ok_or_else(|| Error::Config("rk4 needs integration.dt".into()))?,
            },
            "rk45" => Method::Rk45 {
                rtol: section
                    .rtol
                    .ok_or_else(|| Error::Config("rk45 needs integration.rtol".into()))?,
                atol: section
                    .atol
                    .ok_or_else(|| Error::Config("rk45 needs integration.atol".into()))?,
                dt_init: section.dt_init.unwrap_or(1e-3),
            },
            other => {
                return Err(Error::Config(format!(
                    "unknown integration method {other:?}; use \"rk4\" or \"rk45\""
                )))
            }
        };
        let cfg = IntegrationConfig {
            method,
            t0: section.t0,
            t1: section.t1,
            sample_every: section.sample_every,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn build(&self, base_dir: Option<&Path>) -> Result<RunSetup> {
        let spec = self.build_system()?;
        let field = self.build_field(&spec)?;
        let initial = self.build_initial(&spec, base_dir)?;
        let integration = self.build_integration()?;
        Ok(RunSetup {
            spec,
            field,
            initial,
            integration,
        })
    }
}

#[derive(Deserialize)]
struct DensityFile {
    re: Vec<Vec<f64>>,
    #[serde(default)]
    im: Vec<Vec<f64>>,
}

fn parse_density_json(text: &str, dim: usize) -> Result<CMatrix> {
    let file: DensityFile =
        serde_json::from_str(text).map_err(|e| Error::Config(format!("density JSON: {e}")))?;
    if file.re.len() != dim || file.re.iter().any(|row| row.len() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: file.re.len(),
        });
    }
    if !file.im.is_empty() && (file.im.len() != dim || file.im.iter().any(|row| row.len() != dim)) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: file.im.len(),
        });
    }
    Ok(CMatrix::from_fn(dim, dim, |r, c| {
        let re = file.re[r][c];
        let im = if file.im.is_empty() {
            0.0
        } else {
            file.im[r][c]
        };
        C64::new(re, im)
    }))
}
