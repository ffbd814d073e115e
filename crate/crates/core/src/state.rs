//! The composite Bloch state: a flat real array over the basis-index
//! lattice, with the all-unit component pinned to 1.

use crate::error::{Error, Result};
use crate::system::SystemSpec;

/// Real components R_{αβγ} of a state in the composite Hermitian basis,
/// stored row-major over the per-qudit indices. R at the all-zero
/// multi-index is identically 1 (unit trace).
#[derive(Clone, Debug, PartialEq)]
pub struct BlochState {
    spec: SystemSpec,
    r: Vec<f64>,
}

impl BlochState {
    /// The maximally mixed state: all components zero except R_0 = 1.
    pub fn maximally_mixed(spec: &SystemSpec) -> Self {
        let mut r = vec![0.0; spec.state_len()];
        r[0] = 1.0;
        BlochState {
            spec: spec.clone(),
            r,
        }
    }

    /// Builds from a full component array; the unit component must be 1
    /// within 1e-9 and is pinned to exactly 1.
    pub fn from_components(spec: &SystemSpec, mut r: Vec<f64>) -> Result<Self> {
        if r.len() != spec.state_len() {
            return Err(Error::DimensionMismatch {
                expected: spec.state_len(),
                got: r.len(),
            });
        }
        if (r[0] - 1.0).abs() > 1e-9 {
            return Err(Error::BadUnitComponent(r[0]));
        }
        r[0] = 1.0;
        Ok(BlochState {
            spec: spec.clone(),
            r,
        })
    }

    pub(crate) fn from_raw(spec: &SystemSpec, r: Vec<f64>) -> Self {
        debug_assert_eq!(r.len(), spec.state_len());
        BlochState {
            spec: spec.clone(),
            r,
        }
    }

    /// Product state from per-qudit local Bloch vectors. Each local vector
    /// has either n_i components (the full traceless range) or exactly 3,
    /// which fill the rank-1 (x, y, z) slots with higher ranks zero.
    pub fn product(spec: &SystemSpec, locals: &[Vec<f64>]) -> Result<Self> {
        if locals.len() != spec.qudit_count() {
            return Err(Error::BadQuditCount(locals.len()));
        }
        let mut per_qudit: Vec<Vec<f64>> = Vec::with_capacity(locals.len());
        for (i, local) in locals.iter().enumerate() {
            let n = spec.n(i);
            let mut full = vec![0.0; n + 1];
            full[0] = 1.0;
            if local.len() == n {
                full[1..].copy_from_slice(local);
            } else if local.len() == 3 {
                full[1..4].copy_from_slice(local);
            } else {
                return Err(Error::BadLocalVector {
                    qudit: i,
                    expected: n,
                    got: local.len(),
                });
            }
            per_qudit.push(full);
        }
        let mut r = vec![0.0; spec.state_len()];
        for (flat, value) in r.iter_mut().enumerate() {
            let multi = spec.multi_index(flat);
            *value = multi
                .iter()
                .enumerate()
                .map(|(i, &a)| per_qudit[i][a])
                .product();
        }
        Ok(BlochState {
            spec: spec.clone(),
            r,
        })
    }

    pub fn spec(&self) -> &SystemSpec {
        &self.spec
    }

    pub fn components(&self) -> &[f64] {
        &self.r
    }

    pub fn get(&self, multi: &[usize]) -> f64 {
        self.r[self.spec.flat_index(multi)]
    }

    /// Length of the generalized Bloch vector: the root sum of squares over
    /// every component except the all-unit one.
    pub fn bloch_length(&self) -> f64 {
        self.r[1..].iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// (1 + b²)/Π(2S_i+1); equals Tr ρ² of the reconstructed state.
    pub fn purity(&self) -> f64 {
        let b = self.bloch_length();
        (1.0 + b * b) / self.spec.total_dim() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn mixed_state_invariants() {
        let spec = SystemSpec::from_strings(&["1/2", "1"]).unwrap();
        let s = BlochState::maximally_mixed(&spec);
        assert_eq!(s.components()[0], 1.0);
        assert_eq!(s.bloch_length(), 0.0);
        assert_abs_diff_eq!(s.purity(), 1.0 / 6.0);
    }

    #[test]
    fn product_state_components() {
        let spec = SystemSpec::from_strings(&["1/2", "1/2"]).unwrap();
        let s = BlochState::product(&spec, &[vec![0.0, 0.0, 1.0], vec![1.0, 0.0, 0.0]]).unwrap();
        assert_eq!(s.get(&[0, 0]), 1.0);
        assert_eq!(s.get(&[3, 0]), 1.0);
        assert_eq!(s.get(&[0, 1]), 1.0);
        assert_eq!(s.get(&[3, 1]), 1.0);
        assert_eq!(s.get(&[1, 1]), 0.0);
        // pure ⊗ pure has b² = 3 for two qubits: purity 1
        assert_abs_diff_eq!(s.purity(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn short_local_vectors_fill_rank_one() {
        let spec = SystemSpec::from_strings(&["1"]).unwrap();
        let s = BlochState::product(&spec, &[vec![0.0, 0.0, 0.5]]).unwrap();
        assert_eq!(s.get(&[3]), 0.5);
        assert_eq!(s.get(&[8]), 0.0);
        let full = BlochState::product(&spec, &[vec![0.1; 8]]).unwrap();
        assert_eq!(full.get(&[8]), 0.1);
        assert!(BlochState::product(&spec, &[vec![0.1; 5]]).is_err());
    }

    #[test]
    fn from_components_validates_unit() {
        let spec = SystemSpec::from_strings(&["1/2"]).unwrap();
        assert!(BlochState::from_components(&spec, vec![0.5, 0.0, 0.0, 0.0]).is_err());
        assert!(BlochState::from_components(&spec, vec![1.0, 0.0]).is_err());
        let ok = BlochState::from_components(&spec, vec![1.0 + 1e-12, 0.1, 0.2, 0.3]).unwrap();
        assert_eq!(ok.components()[0], 1.0);
    }
}
