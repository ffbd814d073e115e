//! Time-dependent Hamiltonian coefficient channels h_{ϱστ}(t).
//!
//! A field is a sparse list of terms, one per coefficient multi-index, each
//! carrying a sum of primitive time profiles. Units are energy with ħ = 1;
//! time is inverse energy.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::system::SystemSpec;

/// One primitive time profile.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Primitive {
    Constant {
        amplitude: f64,
    },
    Cosine {
        amplitude: f64,
        omega: f64,
        phase: f64,
    },
    Sine {
        amplitude: f64,
        omega: f64,
        phase: f64,
    },
    /// amplitude on t_on ≤ t < t_off, zero outside
    Pulse {
        amplitude: f64,
        t_on: f64,
        t_off: f64,
    },
}

impl Primitive {
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            Primitive::Constant { amplitude } => amplitude,
            Primitive::Cosine {
                amplitude,
                omega,
                phase,
            } => amplitude * (omega * t + phase).cos(),
            Primitive::Sine {
                amplitude,
                omega,
                phase,
            } => amplitude * (omega * t + phase).sin(),
            Primitive::Pulse {
                amplitude,
                t_on,
                t_off,
            } => {
                if t >= t_on && t < t_off {
                    amplitude
                } else {
                    0.0
                }
            }
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, Primitive::Constant { .. })
    }
}

/// One coefficient channel: a per-qudit basis multi-index plus its profile.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldTerm {
    /// Flat per-qudit basis indices, one per qudit, 0 = unit element.
    pub indices: Vec<usize>,
    pub profile: Vec<Primitive>,
}

impl FieldTerm {
    pub fn new(indices: Vec<usize>, profile: Vec<Primitive>) -> Self {
        FieldTerm { indices, profile }
    }

    pub fn constant(indices: Vec<usize>, amplitude: f64) -> Self {
        FieldTerm {
            indices,
            profile: vec![Primitive::Constant { amplitude }],
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.profile.iter().map(|p| p.eval(t)).sum()
    }

    pub fn is_all_unit(&self) -> bool {
        self.indices.iter().all(|&i| i == 0)
    }
}

/// Sparse Hamiltonian coefficient tensor; absent terms are zero.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FieldSpec {
    pub terms: Vec<FieldTerm>,
}

impl FieldSpec {
    pub fn new(terms: Vec<FieldTerm>) -> Self {
        FieldSpec { terms }
    }

    pub fn empty() -> Self {
        FieldSpec { terms: Vec::new() }
    }

    /// Checks arity and lattice bounds of every term. A term addressing the
    /// all-unit multi-index is legal but only shifts the global phase; it is
    /// ignored by the dynamics, so flag it.
    pub fn validate(&self, spec: &SystemSpec) -> Result<()> {
        for term in &self.terms {
            spec.check_multi(&term.indices)?;
            if term.is_all_unit() {
                log::warn!(
                    "field term at the all-unit index only contributes a global phase and is ignored by the dynamics"
                );
            }
        }
        Ok(())
    }

    /// True when every primitive is constant in time.
    pub fn is_dc(&self) -> bool {
        self.terms
            .iter()
            .all(|t| t.profile.iter().all(|p| p.is_constant()))
    }

    /// (multi-index, value) pairs at time t; repeated indices stay separate
    /// and sum through the linearity of every consumer.
    pub fn eval_terms(&self, t: f64) -> impl Iterator<Item = (&[usize], f64)> + '_ {
        self.terms
            .iter()
            .map(move |term| (term.indices.as_slice(), term.eval(t)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn primitive_profiles() {
        assert_eq!(Primitive::Constant { amplitude: 2.5 }.eval(7.0), 2.5);
        assert_abs_diff_eq!(
            Primitive::Cosine {
                amplitude: 2.0,
                omega: 3.0,
                phase: 0.5
            }
            .eval(1.0),
            2.0 * (3.5f64).cos()
        );
        assert_abs_diff_eq!(
            Primitive::Sine {
                amplitude: 1.0,
                omega: 2.0,
                phase: 0.0
            }
            .eval(0.25),
            0.5f64.sin()
        );
        let p = Primitive::Pulse {
            amplitude: 4.0,
            t_on: 1.0,
            t_off: 2.0,
        };
        assert_eq!(p.eval(0.5), 0.0);
        assert_eq!(p.eval(1.0), 4.0);
        assert_eq!(p.eval(1.5), 4.0);
        assert_eq!(p.eval(2.0), 0.0);
    }

    #[test]
    fn term_sums_primitives() {
        let term = FieldTerm::new(
            vec![3],
            vec![
                Primitive::Constant { amplitude: 1.0 },
                Primitive::Cosine {
                    amplitude: 2.0,
                    omega: 1.0,
                    phase: 0.0,
                },
            ],
        );
        assert_abs_diff_eq!(term.eval(0.0), 3.0);
    }

    #[test]
    fn validation() {
        let spec = SystemSpec::from_strings(&["1/2", "1"]).unwrap();
        let good = FieldSpec::new(vec![FieldTerm::constant(vec![3, 8], 1.0)]);
        assert!(good.validate(&spec).is_ok());
        let bad_arity = FieldSpec::new(vec![FieldTerm::constant(vec![3], 1.0)]);
        assert!(bad_arity.validate(&spec).is_err());
        let bad_index = FieldSpec::new(vec![FieldTerm::constant(vec![3, 9], 1.0)]);
        assert!(bad_index.validate(&spec).is_err());
    }

    #[test]
    fn dc_detection() {
        let dc = FieldSpec::new(vec![FieldTerm::constant(vec![3], 1.0)]);
        assert!(dc.is_dc());
        let ac = FieldSpec::new(vec![FieldTerm::new(
            vec![1],
            vec![Primitive::Sine {
                amplitude: 1.0,
                omega: 1.0,
                phase: 0.0,
            }],
        )]);
        assert!(!ac.is_dc());
    }
}
