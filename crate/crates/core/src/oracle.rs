//! Independent ground truth: direct RK4 integration of the complex
//! equation of motion i∂_t ρ = [H, ρ] on the dense density matrix, plus the
//! cross-check of a Bloch trajectory against it.
//!
//! This path shares only the Hamiltonian assembly and basis construction
//! with the real dynamics, so agreement between the two representations
//! genuinely validates the decomplexification.

use crate::convert::{self, build_hamiltonian};
use crate::error::{Error, Result};
use crate::field::FieldSpec;
use crate::integrator::{fixed_step_grid, IntegrationConfig, Method, Trajectory};
use crate::system::SystemSpec;
use crate::{CMatrix, C64};

/// A validated density matrix: Hermitian and unit-trace to 1e-12.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    matrix: CMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let herm_dev = (&matrix - matrix.adjoint()).norm();
        if herm_dev > 1e-12 {
            return Err(Error::Config(format!(
                "density matrix is not Hermitian (deviation {herm_dev:.3e})"
            )));
        }
        let tr: C64 = matrix.trace();
        if (tr.re - 1.0).abs() > 1e-12 || tr.im.abs() > 1e-12 {
            return Err(Error::NonUnitTrace {
                trace: tr.re,
                tol: 1e-12,
            });
        }
        Ok(DensityMatrix { matrix })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }
}

/// −i[H(t), ρ].
pub fn lvn_rhs(spec: &SystemSpec, field: &FieldSpec, rho: &CMatrix, t: f64) -> Result<CMatrix> {
    let h = build_hamiltonian(spec, field, t)?;
    if rho.nrows() != h.nrows() {
        return Err(Error::DimensionMismatch {
            expected: h.nrows(),
            got: rho.nrows(),
        });
    }
    let comm = &h * rho - rho * &h;
    Ok(comm * C64::new(0.0, -1.0))
}

/// Integrates the density matrix with classical RK4 on the same fixed grid
/// as the Bloch run, re-symmetrizing (ρ+ρ†)/2 after every step. Returns
/// (t, ρ(t)) at the sampled steps.
pub fn evolve_density(
    spec: &SystemSpec,
    field: &FieldSpec,
    rho0: &DensityMatrix,
    cfg: &IntegrationConfig,
) -> Result<Vec<(f64, DensityMatrix)>> {
    cfg.validate()?;
    field.validate(spec)?;
    let Method::Rk4 { dt } = cfg.method else {
        return Err(Error::OracleNeedsFixedStep);
    };
    let (steps, dt) = fixed_step_grid(cfg.t0, cfg.t1, dt)?;

    let mut rho = rho0.matrix().clone();
    let mut samples = vec![(cfg.t0, rho0.clone())];
    for step in 1..=steps {
        let t = cfg.t0 + (step - 1) as f64 * dt;
        let k1 = lvn_rhs(spec, field, &rho, t)?;
        let k2 = lvn_rhs(
            spec,
            field,
            &(&rho + &k1 * C64::new(0.5 * dt, 0.0)),
            t + 0.5 * dt,
        )?;
        let k3 = lvn_rhs(
            spec,
            field,
            &(&rho + &k2 * C64::new(0.5 * dt, 0.0)),
            t + 0.5 * dt,
        )?;
        let k4 = lvn_rhs(spec, field, &(&rho + &k3 * C64::new(dt, 0.0)), t + dt)?;
        rho +=
            (k1 + k2 * C64::new(2.0, 0.0) + k3 * C64::new(2.0, 0.0) + k4) * C64::new(dt / 6.0, 0.0);
        rho = (&rho + rho.adjoint()) * C64::new(0.5, 0.0);
        if rho.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::NonFinite { t: t + dt });
        }
        if step % cfg.sample_every == 0 || step == steps {
            let snapshot = DensityMatrix {
                matrix: rho.clone(),
            };
            samples.push((cfg.t0 + step as f64 * dt, snapshot));
        }
    }
    Ok(samples)
}

/// Max |R_bloch − R_oracle| over all components and shared sample times.
#[derive(Clone, Debug)]
pub struct CrossCheckReport {
    pub max_component_error: f64,
    /// (t, max component error at t) per sample.
    pub per_time: Vec<(f64, f64)>,
}

/// Converts every oracle sample into Bloch components and compares against
/// the Bloch trajectory on the same time grid.
pub fn cross_check(
    bloch: &Trajectory,
    oracle: &[(f64, DensityMatrix)],
) -> Result<CrossCheckReport> {
    if bloch.len() != oracle.len() {
        return Err(Error::GridMismatch(bloch.len(), oracle.len()));
    }
    let mut per_time = Vec::with_capacity(oracle.len());
    let mut worst: f64 = 0.0;
    for (state, (t, rho)) in bloch.states.iter().zip(oracle) {
        let t_bloch = bloch.times[per_time.len()];
        if (t_bloch - t).abs() > 1e-12 {
            return Err(Error::GridMismatch(bloch.len(), oracle.len()));
        }
        let reference = convert::bloch_from_density(state.spec(), rho.matrix())?;
        let err = state
            .components()
            .iter()
            .zip(reference.components())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        per_time.push((*t, err));
        worst = worst.max(err);
    }
    Ok(CrossCheckReport {
        max_component_error: worst,
        per_time,
    })
}

/// Partial trace over all qudits except `keep`, for a density matrix on the
/// tensor product of the given dimensions.
pub fn partial_trace(rho: &CMatrix, dims: &[usize], keep: usize) -> CMatrix {
    let total: usize = dims.iter().product();
    debug_assert_eq!(rho.nrows(), total);
    let d_keep = dims[keep];
    let mut strides = vec![1usize; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * dims[i + 1];
    }
    let env: Vec<usize> = (0..dims.len()).filter(|&i| i != keep).collect();
    let env_total: usize = env.iter().map(|&i| dims[i]).product();

    let mut out = CMatrix::zeros(d_keep, d_keep);
    for a in 0..d_keep {
        for b in 0..d_keep {
            let mut acc = C64::new(0.0, 0.0);
            for e in 0..env_total {
                let mut rest = e;
                let mut row = a * strides[keep];
                let mut col = b * strides[keep];
                for &axis in &env {
                    let v = rest % dims[axis];
                    rest /= dims[axis];
                    row += v * strides[axis];
                    col += v * strides[axis];
                }
                acc += rho[(row, col)];
            }
            out[(a, b)] = acc;
        }
    }
    out
}
