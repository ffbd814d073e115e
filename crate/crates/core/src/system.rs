//! Composite systems of one to three qudits and their flat index lattice.

use std::sync::Arc;

use crate::algebra::{ExtendedTripleTrace, StructureTables};
use crate::basis::{BasisLabel, SpinBasis};
use crate::error::{Error, Result};
use crate::half_integer::HalfInteger;
use crate::CMatrix;

/// A system of 1–3 qudits with spins S_i ≥ 1/2, carrying shared handles to
/// the per-spin basis, structure tables and triple traces. Cloning is cheap.
#[derive(Clone, Debug)]
pub struct SystemSpec {
    inner: Arc<Inner>,
}

#[derive(Debug)]
struct Inner {
    spins: Vec<HalfInteger>,
    bases: Vec<Arc<SpinBasis>>,
    tables: Vec<Arc<StructureTables>>,
    triples: Vec<Arc<ExtendedTripleTrace>>,
    full_sizes: Vec<usize>,
    strides: Vec<usize>,
    total_dim: usize,
    state_len: usize,
}

impl PartialEq for SystemSpec {
    fn eq(&self, other: &Self) -> bool {
        self.inner.spins == other.inner.spins
    }
}

impl SystemSpec {
    pub fn new(spins: &[HalfInteger]) -> Result<Self> {
        if spins.is_empty() || spins.len() > 3 {
            return Err(Error::BadQuditCount(spins.len()));
        }
        for &s in spins {
            if s.twice() < 1 {
                return Err(Error::SpinTooSmall(s.to_string()));
            }
        }
        let bases: Vec<_> = spins
            .iter()
            .map(|&s| SpinBasis::get(s))
            .collect::<Result<_>>()?;
        let tables: Vec<_> = spins
            .iter()
            .map(|&s| StructureTables::get(s))
            .collect::<Result<_>>()?;
        let triples: Vec<_> = spins
            .iter()
            .map(|&s| ExtendedTripleTrace::get(s))
            .collect::<Result<_>>()?;
        let full_sizes: Vec<usize> = bases.iter().map(|b| b.n + 1).collect();
        let mut strides = vec![1; spins.len()];
        for i in (0..spins.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * full_sizes[i + 1];
        }
        let total_dim = bases.iter().map(|b| b.dim).product();
        let state_len = full_sizes.iter().product();
        Ok(SystemSpec {
            inner: Arc::new(Inner {
                spins: spins.to_vec(),
                bases,
                tables,
                triples,
                full_sizes,
                strides,
                total_dim,
                state_len,
            }),
        })
    }

    /// Parses spins like ["1/2", "1", "3/2"].
    pub fn from_strings<S: AsRef<str>>(spins: &[S]) -> Result<Self> {
        let parsed: Vec<HalfInteger> = spins
            .iter()
            .map(|s| s.as_ref().parse())
            .collect::<Result<_>>()?;
        SystemSpec::new(&parsed)
    }

    pub fn qudit_count(&self) -> usize {
        self.inner.spins.len()
    }

    pub fn spins(&self) -> &[HalfInteger] {
        &self.inner.spins
    }

    /// Hilbert-space dimension 2S_i + 1 of one qudit.
    pub fn dim(&self, i: usize) -> usize {
        self.inner.bases[i].dim
    }

    /// Number of traceless basis elements of one qudit.
    pub fn n(&self, i: usize) -> usize {
        self.inner.bases[i].n
    }

    /// Full per-qudit index range (2S_i+1)², including the unit element.
    pub fn full_size(&self, i: usize) -> usize {
        self.inner.full_sizes[i]
    }

    pub fn c_unit(&self, i: usize) -> f64 {
        self.inner.bases[i].c_unit
    }

    pub fn c_norm(&self, i: usize) -> f64 {
        self.inner.bases[i].c_norm
    }

    /// Product of the c_i = √(S_i(S_i+1)/3).
    pub fn c_unit_product(&self) -> f64 {
        self.inner.bases.iter().map(|b| b.c_unit).product()
    }

    /// Composite Hilbert-space dimension Π(2S_i+1).
    pub fn total_dim(&self) -> usize {
        self.inner.total_dim
    }

    /// Length of the flat Bloch component array, Π(2S_i+1)².
    pub fn state_len(&self) -> usize {
        self.inner.state_len
    }

    pub fn basis(&self, i: usize) -> &Arc<SpinBasis> {
        &self.inner.bases[i]
    }

    pub fn tables(&self, i: usize) -> &Arc<StructureTables> {
        &self.inner.tables[i]
    }

    pub fn triple_trace(&self, i: usize) -> &Arc<ExtendedTripleTrace> {
        &self.inner.triples[i]
    }

    /// Row-major flat index of a per-qudit multi-index.
    pub fn flat_index(&self, multi: &[usize]) -> usize {
        debug_assert_eq!(multi.len(), self.qudit_count());
        multi
            .iter()
            .zip(&self.inner.strides)
            .map(|(&m, &s)| m * s)
            .sum()
    }

    pub fn multi_index(&self, flat: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.qudit_count());
        let mut rest = flat;
        for i in 0..self.qudit_count() {
            out.push(rest / self.inner.strides[i]);
            rest %= self.inner.strides[i];
        }
        out
    }

    pub fn stride(&self, i: usize) -> usize {
        self.inner.strides[i]
    }

    /// Per-qudit labels of one flat composite index.
    pub fn labels_at(&self, flat: usize) -> Vec<BasisLabel> {
        self.multi_index(flat)
            .iter()
            .enumerate()
            .map(|(i, &a)| self.inner.bases[i].labels[a])
            .collect()
    }

    /// Compact composite label like "1.1x|u|2z" for CSV headers.
    pub fn composite_token(&self, flat: usize) -> String {
        self.labels_at(flat)
            .iter()
            .map(|l| l.token())
            .collect::<Vec<_>>()
            .join("|")
    }

    /// Kronecker product of the per-qudit basis matrices at a multi-index.
    pub fn kron_basis_element(&self, multi: &[usize]) -> CMatrix {
        let mut m = self.inner.bases[0].matrix(multi[0]).clone();
        for i in 1..self.qudit_count() {
            m = m.kronecker(self.inner.bases[i].matrix(multi[i]));
        }
        m
    }

    /// Validates a per-qudit multi-index against the lattice bounds.
    pub fn check_multi(&self, multi: &[usize]) -> Result<()> {
        if multi.len() != self.qudit_count() {
            return Err(Error::FieldArityMismatch {
                got: multi.len(),
                want: self.qudit_count(),
            });
        }
        for (i, &a) in multi.iter().enumerate() {
            if a >= self.full_size(i) {
                return Err(Error::FieldIndexOutOfBounds {
                    qudit: i,
                    index: a,
                    size: self.full_size(i),
                });
            }
        }
        Ok(())
    }
}
