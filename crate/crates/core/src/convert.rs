//! Hamiltonian assembly, density-matrix ↔ Bloch conversions, reduced
//! states and scalar invariants.
//!
//! Conversions run axis by axis: for each qudit the d²×d² map between
//! matrix-element pairs and basis coefficients is applied along its own
//! lattice axis, so a full transform costs Σ_i d_i² · Π_j d_j² instead of
//! the naive Π_j d_j⁴.

use nalgebra::linalg::SymmetricEigen;

use crate::error::{Error, Result};
use crate::field::FieldSpec;
use crate::state::BlochState;
use crate::system::SystemSpec;
use crate::{CMatrix, C64};

/// ½ Σ h_{ϱστ}(t) C_ϱ ⊗ C_σ ⊗ C_τ (fewer factors for 1–2 qudits).
pub fn build_hamiltonian(spec: &SystemSpec, field: &FieldSpec, t: f64) -> Result<CMatrix> {
    let d = spec.total_dim();
    let mut h = CMatrix::zeros(d, d);
    for term in &field.terms {
        spec.check_multi(&term.indices)?;
        let value = term.eval(t);
        if value != 0.0 {
            h += spec.kron_basis_element(&term.indices) * C64::new(0.5 * value, 0.0);
        }
    }
    Ok(h)
}

/// Per-qudit map from matrix-element pairs (a,b) to basis coefficients:
/// X[α, a·d + b] = C_α[b, a], so that X·vec(ρ) gives the traces Tr(ρ C_α).
fn pair_transform(spec: &SystemSpec, axis: usize) -> CMatrix {
    let basis = spec.basis(axis);
    let d = basis.dim;
    let f = d * d;
    CMatrix::from_fn(f, f, |alpha, p| basis.matrix(alpha)[(p % d, p / d)])
}

/// In-place contraction of one lattice axis with `x` (forward) or its
/// adjoint, over a row-major complex tensor with the given lead/trail
/// extents around the axis.
fn apply_axis(
    data: &mut [C64],
    x: &CMatrix,
    lead: usize,
    size: usize,
    trail: usize,
    adjoint: bool,
) {
    let mut slice = vec![C64::new(0.0, 0.0); size];
    for l in 0..lead {
        for tr in 0..trail {
            let base = l * size * trail + tr;
            for (p, s) in slice.iter_mut().enumerate() {
                *s = data[base + p * trail];
            }
            for alpha in 0..size {
                let mut acc = C64::new(0.0, 0.0);
                if adjoint {
                    for (p, s) in slice.iter().enumerate() {
                        acc += x[(p, alpha)].conj() * s;
                    }
                } else {
                    for (p, s) in slice.iter().enumerate() {
                        acc += x[(alpha, p)] * s;
                    }
                }
                data[base + alpha * trail] = acc;
            }
        }
    }
}

/// R_{αβγ} = Tr(ρ · C_α⊗C_β⊗C_γ)/Πc_i. Rejects non-unit traces beyond
/// 1e-10; the resulting all-unit component is exactly 1.
pub fn bloch_from_density(spec: &SystemSpec, rho: &CMatrix) -> Result<BlochState> {
    let d = spec.total_dim();
    if rho.nrows() != d || rho.ncols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: rho.nrows(),
        });
    }
    let trace: C64 = rho.trace();
    if (trace.re - 1.0).abs() > 1e-10 || trace.im.abs() > 1e-10 {
        return Err(Error::NonUnitTrace {
            trace: trace.re,
            tol: 1e-10,
        });
    }

    let count = spec.qudit_count();
    let dims: Vec<usize> = (0..count).map(|i| spec.dim(i)).collect();
    let mut dstride = vec![1usize; count];
    for i in (0..count.saturating_sub(1)).rev() {
        dstride[i] = dstride[i + 1] * dims[i + 1];
    }

    // regroup rho[(A,B)] into the per-axis pair lattice
    let mut data = vec![C64::new(0.0, 0.0); spec.state_len()];
    for (flat, value) in data.iter_mut().enumerate() {
        let multi = spec.multi_index(flat);
        let mut row = 0;
        let mut col = 0;
        for i in 0..count {
            row += (multi[i] / dims[i]) * dstride[i];
            col += (multi[i] % dims[i]) * dstride[i];
        }
        *value = rho[(row, col)];
    }

    for axis in 0..count {
        let x = pair_transform(spec, axis);
        let size = spec.full_size(axis);
        let trail = spec.stride(axis);
        let lead = spec.state_len() / (size * trail);
        apply_axis(&mut data, &x, lead, size, trail, false);
    }

    let scale = 1.0 / spec.c_unit_product();
    let mut r: Vec<f64> = data.iter().map(|v| v.re * scale).collect();
    r[0] = 1.0;
    Ok(BlochState::from_raw(spec, r))
}

/// ρ = (1/Π(c_i d_i)) Σ R_{αβγ} C_α⊗C_β⊗C_γ. Hermitian with unit trace;
/// positive semidefiniteness is the caller's concern.
pub fn density_from_bloch(state: &BlochState) -> CMatrix {
    let spec = state.spec();
    let count = spec.qudit_count();
    let mut data: Vec<C64> = state
        .components()
        .iter()
        .map(|&v| C64::new(v, 0.0))
        .collect();

    for axis in 0..count {
        let x = pair_transform(spec, axis);
        let size = spec.full_size(axis);
        let trail = spec.stride(axis);
        let lead = spec.state_len() / (size * trail);
        apply_axis(&mut data, &x, lead, size, trail, true);
    }

    let dims: Vec<usize> = (0..count).map(|i| spec.dim(i)).collect();
    let mut dstride = vec![1usize; count];
    for i in (0..count.saturating_sub(1)).rev() {
        dstride[i] = dstride[i + 1] * dims[i + 1];
    }
    let norm: f64 = (0..count)
        .map(|i| spec.c_unit(i) * dims[i] as f64)
        .product();

    let d = spec.total_dim();
    let mut rho = CMatrix::zeros(d, d);
    for (flat, value) in data.iter().enumerate() {
        let multi = spec.multi_index(flat);
        let mut row = 0;
        let mut col = 0;
        for i in 0..count {
            row += (multi[i] / dims[i]) * dstride[i];
            col += (multi[i] % dims[i]) * dstride[i];
        }
        rho[(row, col)] = value / norm;
    }
    rho
}

/// Reduced state of one qudit: (1/(c_i(2S_i+1)))(R_0 C_0 + R_m C_m) over
/// that qudit's own axis, all other axes at the unit index.
pub fn reduced_single(state: &BlochState, which: usize) -> Result<CMatrix> {
    let spec = state.spec();
    if which >= spec.qudit_count() {
        return Err(Error::DimensionMismatch {
            expected: spec.qudit_count(),
            got: which,
        });
    }
    let basis = spec.basis(which);
    let d = basis.dim;
    let norm = 1.0 / (basis.c_unit * d as f64);
    let mut rho = CMatrix::zeros(d, d);
    let mut multi = vec![0usize; spec.qudit_count()];
    for alpha in 0..spec.full_size(which) {
        multi[which] = alpha;
        let r = state.components()[spec.flat_index(&multi)];
        if r != 0.0 {
            rho += basis.matrix(alpha) * C64::new(r * norm, 0.0);
        }
    }
    Ok(rho)
}

/// E = Tr Hρ, evaluated as the real contraction ½ Πc_i Σ h_β(t) R_β.
pub fn energy(state: &BlochState, field: &FieldSpec, t: f64) -> f64 {
    let spec = state.spec();
    let scale = 0.5 * spec.c_unit_product();
    field
        .eval_terms(t)
        .map(|(multi, h)| scale * h * state.components()[spec.flat_index(multi)])
        .sum()
}

/// Smallest eigenvalue of the reconstructed density matrix; negative values
/// beyond rounding indicate a nonphysical state.
pub fn min_eigenvalue(state: &BlochState) -> f64 {
    let rho = density_from_bloch(state);
    let eig = SymmetricEigen::new(rho);
    eig.eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}
