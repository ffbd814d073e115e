//! Irreducible tensor operators T_{k,q} and the Hermitian single-spin basis
//! built from them.
//!
//! The basis for spin S holds (2S+1)² elements: the scaled unit matrix plus
//! (2S+1)²−1 traceless Hermitian matrices, pairwise trace-orthogonal with
//! common norm² S(S+1)(2S+1)/3. Elements 1..3 coincide with the Cartesian
//! spin operators S_x, S_y, S_z for every spin.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, LazyLock, RwLock};

use crate::error::{Error, Result};
use crate::half_integer::HalfInteger;
use crate::wigner::three_jm;
use crate::{CMatrix, C64};

/// Identifies one Hermitian basis element of a single spin.
///
/// `X`/`Y` carry a rank k and projection 1 ≤ q ≤ k, `Z` only a rank, and
/// `Unit` is the scaled identity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BasisLabel {
    Unit,
    X { k: u32, q: u32 },
    Y { k: u32, q: u32 },
    Z { k: u32 },
}

impl BasisLabel {
    pub fn rank(&self) -> u32 {
        match *self {
            BasisLabel::Unit => 0,
            BasisLabel::X { k, .. } | BasisLabel::Y { k, .. } | BasisLabel::Z { k } => k,
        }
    }

    pub fn is_unit(&self) -> bool {
        matches!(self, BasisLabel::Unit)
    }

    pub fn validate_for_spin(&self, spin: HalfInteger) -> Result<()> {
        let two_s = spin.twice() as u32;
        let ok = match *self {
            BasisLabel::Unit => true,
            BasisLabel::X { k, q } | BasisLabel::Y { k, q } => {
                k >= 1 && k <= two_s && q >= 1 && q <= k
            }
            BasisLabel::Z { k } => k >= 1 && k <= two_s,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::LabelOutOfRange {
                spin: spin.to_string(),
                label: self.to_string(),
            })
        }
    }

    /// Short token without commas, usable in CSV headers: "u", "2.1x", "1z".
    pub fn token(&self) -> String {
        match *self {
            BasisLabel::Unit => "u".into(),
            BasisLabel::X { k, q } => format!("{k}.{q}x"),
            BasisLabel::Y { k, q } => format!("{k}.{q}y"),
            BasisLabel::Z { k } => format!("{k}z"),
        }
    }
}

/// User-facing form: "unit", "k,q,x", "k,q,y", "k,z".
impl fmt::Display for BasisLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            BasisLabel::Unit => write!(f, "unit"),
            BasisLabel::X { k, q } => write!(f, "{k},{q},x"),
            BasisLabel::Y { k, q } => write!(f, "{k},{q},y"),
            BasisLabel::Z { k } => write!(f, "{k},z"),
        }
    }
}

impl FromStr for BasisLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("unit") || s == "u" {
            return Ok(BasisLabel::Unit);
        }
        let bad = || {
            Error::Config(format!(
                "invalid basis label {s:?}: expected \"unit\", \"k,q,x\", \"k,q,y\" or \"k,z\""
            ))
        };
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        match parts.as_slice() {
            [k, "z"] => Ok(BasisLabel::Z {
                k: k.parse().map_err(|_| bad())?,
            }),
            [k, q, comp] => {
                let k = k.parse().map_err(|_| bad())?;
                let q = q.parse().map_err(|_| bad())?;
                match *comp {
                    "x" => Ok(BasisLabel::X { k, q }),
                    "y" => Ok(BasisLabel::Y { k, q }),
                    _ => Err(bad()),
                }
            }
            _ => Err(bad()),
        }
    }
}

/// Canonical flat order for spin S: Unit first, then for each k = 1..2S the
/// pairs (k,1,x), (k,1,y), …, (k,k,x), (k,k,y) followed by (k,z).
pub fn canonical_labels(spin: HalfInteger) -> Vec<BasisLabel> {
    let two_s = spin.twice().max(0) as u32;
    let mut labels = vec![BasisLabel::Unit];
    for k in 1..=two_s {
        for q in 1..=k {
            labels.push(BasisLabel::X { k, q });
            labels.push(BasisLabel::Y { k, q });
        }
        labels.push(BasisLabel::Z { k });
    }
    labels
}

/// Matrix of the irreducible tensor operator T_{k,q} for spin S, with rows
/// and columns ordered by m = S, S−1, …, −S. Normalized so T_{0,0} = E.
pub fn tensor_operator(spin: HalfInteger, k: i32, q: i32) -> Result<CMatrix> {
    if spin.is_negative() {
        return Err(Error::NegativeJ(spin.to_string()));
    }
    if k < 0 || k > spin.twice() || q.abs() > k {
        return Err(Error::TensorArgsOutOfRange {
            spin: spin.to_string(),
            k,
            q,
        });
    }
    let dim = spin.multiplicity();
    let kk = HalfInteger::from_int(k);
    let qq = HalfInteger::from_int(q);
    let scale = ((spin.twice() as f64 + 1.0) * (2.0 * k as f64 + 1.0)).sqrt();
    let ms: Vec<HalfInteger> = spin.projections().collect();
    let mut out = CMatrix::zeros(dim, dim);
    for (r, &m) in ms.iter().enumerate() {
        for (c, &mp) in ms.iter().enumerate() {
            if (-m + qq + mp).twice() != 0 {
                continue;
            }
            let w = three_jm(spin, kk, spin, -m, qq, mp).expect("validated arguments");
            if w != 0.0 {
                let sign = if ((spin - m).twice() / 2).rem_euclid(2) == 0 {
                    1.0
                } else {
                    -1.0
                };
                out[(r, c)] = C64::new(scale * sign * w, 0.0);
            }
        }
    }
    Ok(out)
}

/// One Hermitian basis element:
/// X → √(S(S+1)/6)(T_{k,−q} + (−1)^q T_{k,q}),
/// Y → i√(S(S+1)/6)(T_{k,−q} − (−1)^q T_{k,q}),
/// Z → √(S(S+1)/3) T_{k,0}, Unit → √(S(S+1)/3) E.
pub fn hermitian_basis_element(spin: HalfInteger, label: &BasisLabel) -> Result<CMatrix> {
    label.validate_for_spin(spin)?;
    let s = spin.value();
    let c_pair = (s * (s + 1.0) / 6.0).sqrt();
    let c_single = (s * (s + 1.0) / 3.0).sqrt();
    let m = match *label {
        BasisLabel::Unit => {
            CMatrix::identity(spin.multiplicity(), spin.multiplicity()) * C64::new(c_single, 0.0)
        }
        BasisLabel::X { k, q } => {
            let tm = tensor_operator(spin, k as i32, -(q as i32))?;
            let tp = tensor_operator(spin, k as i32, q as i32)?;
            let sign = if q % 2 == 0 { 1.0 } else { -1.0 };
            (tm + tp * C64::new(sign, 0.0)) * C64::new(c_pair, 0.0)
        }
        BasisLabel::Y { k, q } => {
            let tm = tensor_operator(spin, k as i32, -(q as i32))?;
            let tp = tensor_operator(spin, k as i32, q as i32)?;
            let sign = if q % 2 == 0 { 1.0 } else { -1.0 };
            (tm - tp * C64::new(sign, 0.0)) * C64::new(0.0, c_pair)
        }
        BasisLabel::Z { k } => tensor_operator(spin, k as i32, 0)? * C64::new(c_single, 0.0),
    };
    Ok(m)
}

/// The full cached basis of one spin, in canonical flat order.
#[derive(Debug)]
pub struct SpinBasis {
    pub spin: HalfInteger,
    /// Hilbert-space dimension 2S+1.
    pub dim: usize,
    /// Number of traceless elements, (2S+1)² − 1.
    pub n: usize,
    /// √(S(S+1)/3): the Unit element is c_unit·E.
    pub c_unit: f64,
    /// S(S+1)(2S+1)/3: common value of Tr C_r².
    pub c_norm: f64,
    pub labels: Vec<BasisLabel>,
    matrices: Vec<CMatrix>,
    index: HashMap<BasisLabel, usize>,
}

static BASIS_CACHE: LazyLock<RwLock<HashMap<i32, Arc<SpinBasis>>>> =
    LazyLock::new(|| RwLock::new(HashMap::new()));

impl SpinBasis {
    /// Cached basis for one spin; built once, immutable afterwards.
    pub fn get(spin: HalfInteger) -> Result<Arc<SpinBasis>> {
        if spin.twice() < 1 {
            return Err(Error::SpinTooSmall(spin.to_string()));
        }
        {
            let cache = BASIS_CACHE.read().unwrap();
            if let Some(b) = cache.get(&spin.twice()) {
                return Ok(Arc::clone(b));
            }
        }
        let built = Arc::new(SpinBasis::build(spin)?);
        let mut cache = BASIS_CACHE.write().unwrap();
        Ok(Arc::clone(cache.entry(spin.twice()).or_insert(built)))
    }

    fn build(spin: HalfInteger) -> Result<SpinBasis> {
        let labels = canonical_labels(spin);
        let matrices: Vec<CMatrix> = labels
            .iter()
            .map(|l| hermitian_basis_element(spin, l))
            .collect::<Result<_>>()?;
        let index = labels
            .iter()
            .copied()
            .enumerate()
            .map(|(i, l)| (l, i))
            .collect();
        let s = spin.value();
        Ok(SpinBasis {
            spin,
            dim: spin.multiplicity(),
            n: labels.len() - 1,
            c_unit: (s * (s + 1.0) / 3.0).sqrt(),
            c_norm: s * (s + 1.0) * (spin.twice() as f64 + 1.0) / 3.0,
            labels,
            matrices,
            index,
        })
    }

    pub fn matrix(&self, i: usize) -> &CMatrix {
        &self.matrices[i]
    }

    pub fn matrices(&self) -> &[CMatrix] {
        &self.matrices
    }

    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn index_of(&self, label: &BasisLabel) -> Option<usize> {
        self.index.get(label).copied()
    }
}

/// Ordered (label, matrix) pairs of the full basis.
pub fn full_basis(spin: HalfInteger) -> Result<Vec<(BasisLabel, CMatrix)>> {
    let b = SpinBasis::get(spin)?;
    Ok(b.labels
        .iter()
        .copied()
        .zip(b.matrices().iter().cloned())
        .collect())
}

/// Max deviation of Tr C_r C_s from δ_rs·S(S+1)(2S+1)/3 over all pairs.
pub fn gram_check(spin: HalfInteger) -> Result<f64> {
    let b = SpinBasis::get(spin)?;
    let mut worst: f64 = 0.0;
    for r in 0..b.len() {
        for s in r..b.len() {
            let t: C64 = (b.matrix(r) * b.matrix(s)).trace();
            let want = if r == s { b.c_norm } else { 0.0 };
            worst = worst.max((t.re - want).abs()).max(t.im.abs());
        }
    }
    Ok(worst)
}
