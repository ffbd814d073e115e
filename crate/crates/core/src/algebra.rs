//! Antisymmetric (e) and symmetric (g) structure constants of su(2S+1) in
//! the Hermitian basis, produced by two independent routes: trace formulas
//! over the basis matrices, and closed forms in 3jm/6j symbols.
//!
//! The trace route is the reference; the closed forms are cross-checked
//! against it entrywise. The extended triple-trace tensor additionally
//! covers the unit element and feeds the generic right-hand-side builder.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, LazyLock, RwLock};

use crate::basis::{BasisLabel, SpinBasis};
use crate::error::Result;
use crate::half_integer::HalfInteger;
use crate::wigner::{six_j, three_jm};
use crate::{CMatrix, C64};

/// Values at or below this magnitude are treated as exact zeros and not
/// stored. The Wigner backend makes true zeros exact; this only guards the
/// rounding of the trace route.
pub const ZERO_EPS: f64 = 1e-14;

/// Sparse totally (anti)symmetric rank-3 tensor over basis indices.
#[derive(Clone, Debug)]
pub struct SparseTriple {
    map: BTreeMap<(u16, u16, u16), f64>,
    by_first: Vec<Vec<(u16, u16, f64)>>,
}

impl SparseTriple {
    fn from_map(map: BTreeMap<(u16, u16, u16), f64>, index_bound: usize) -> Self {
        let mut by_first = vec![Vec::new(); index_bound + 1];
        for (&(i, j, k), &v) in &map {
            by_first[i as usize].push((j, k, v));
        }
        SparseTriple { map, by_first }
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.map
            .get(&(i as u16, j as u16, k as u16))
            .copied()
            .unwrap_or(0.0)
    }

    /// Entries (j, k, value) with the first index fixed.
    pub fn with_first(&self, i: usize) -> &[(u16, u16, f64)] {
        &self.by_first[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = ((usize, usize, usize), f64)> + '_ {
        self.map
            .iter()
            .map(|(&(i, j, k), &v)| ((i as usize, j as usize, k as usize), v))
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// Max |self − other| over the union of stored entries.
    pub fn max_abs_diff(&self, other: &SparseTriple) -> f64 {
        let mut worst: f64 = 0.0;
        for (&k, &v) in &self.map {
            worst = worst.max((v - other.map.get(&k).copied().unwrap_or(0.0)).abs());
        }
        for (&k, &v) in &other.map {
            if !self.map.contains_key(&k) {
                worst = worst.max(v.abs());
            }
        }
        worst
    }
}

fn trace_prod(a: &CMatrix, b: &CMatrix) -> C64 {
    let d = a.nrows();
    let mut acc = C64::new(0.0, 0.0);
    for r in 0..d {
        for c in 0..d {
            acc += a[(r, c)] * b[(c, r)];
        }
    }
    acc
}

/// Both tables from the trace formulas:
/// e_ijk = Im Tr(C_i C_j C_k)/c_norm, g_ijk = Re Tr(C_i C_j C_k)/c_norm.
pub fn tables_from_traces(spin: HalfInteger) -> Result<(SparseTriple, SparseTriple)> {
    let b = SpinBasis::get(spin)?;
    let n = b.n;
    let mut e = BTreeMap::new();
    let mut g = BTreeMap::new();
    for i in 1..=n {
        for j in 1..=n {
            let prod = b.matrix(i) * b.matrix(j);
            for k in 1..=n {
                let t = trace_prod(&prod, b.matrix(k));
                let ev = t.im / b.c_norm;
                let gv = t.re / b.c_norm;
                if ev.abs() > ZERO_EPS {
                    e.insert((i as u16, j as u16, k as u16), ev);
                }
                if gv.abs() > ZERO_EPS {
                    g.insert((i as u16, j as u16, k as u16), gv);
                }
            }
        }
    }
    Ok((SparseTriple::from_map(e, n), SparseTriple::from_map(g, n)))
}

pub fn e_from_traces(spin: HalfInteger) -> Result<SparseTriple> {
    Ok(tables_from_traces(spin)?.0)
}

pub fn g_from_traces(spin: HalfInteger) -> Result<SparseTriple> {
    Ok(tables_from_traces(spin)?.1)
}

/// F(k,k',k'',S) = (−1)^{2S}/√3 · √(S(S+1)(2S+1)(2k+1)(2k'+1)(2k''+1))
///                 · {k k' k''; S S S}.
pub fn f_factor(k: u32, kp: u32, kpp: u32, spin: HalfInteger) -> f64 {
    let sj = six_j(
        HalfInteger::from_int(k as i32),
        HalfInteger::from_int(kp as i32),
        HalfInteger::from_int(kpp as i32),
        spin,
        spin,
        spin,
    );
    if sj == 0.0 {
        return 0.0;
    }
    let s = spin.value();
    let sign = if spin.twice().rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    };
    let scale = (s
        * (s + 1.0)
        * (spin.twice() as f64 + 1.0)
        * (2.0 * k as f64 + 1.0)
        * (2.0 * kp as f64 + 1.0)
        * (2.0 * kpp as f64 + 1.0))
        .sqrt();
    sign / 3f64.sqrt() * scale * sj
}

fn w3(k: [u32; 3], m: [i32; 3]) -> f64 {
    three_jm(
        HalfInteger::from_int(k[0] as i32),
        HalfInteger::from_int(k[1] as i32),
        HalfInteger::from_int(k[2] as i32),
        HalfInteger::from_int(m[0]),
        HalfInteger::from_int(m[1]),
        HalfInteger::from_int(m[2]),
    )
    .expect("integer wigner arguments")
}

/// Component class of a label for the closed-form dispatch.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Comp {
    X,
    Y,
    Z,
}

fn comp_of(l: &BasisLabel) -> Option<(Comp, u32, i32)> {
    match *l {
        BasisLabel::Unit => None,
        BasisLabel::X { k, q } => Some((Comp::X, k, q as i32)),
        BasisLabel::Y { k, q } => Some((Comp::Y, k, q as i32)),
        BasisLabel::Z { k } => Some((Comp::Z, k, 0)),
    }
}

fn pow_neg1(q: i32) -> f64 {
    if q.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Closed-form value for one canonically ordered component class, or None
/// for classes that vanish identically.
fn analytic_e_value(
    a: (Comp, u32, i32),
    b: (Comp, u32, i32),
    c: (Comp, u32, i32),
    spin: HalfInteger,
) -> Option<f64> {
    let (ka, kb, kc) = (a.1, b.1, c.1);
    if (ka + kb + kc) % 2 == 0 {
        return None;
    }
    let f = f_factor(ka, kb, kc, spin);
    let ks = [ka, kb, kc];
    let (q, qp, qpp) = (a.2, b.2, c.2);
    match (a.0, b.0, c.0) {
        (Comp::X, Comp::X, Comp::Y) => Some(
            -f / 2f64.sqrt()
                * (pow_neg1(q) * w3(ks, [q, -qp, -qpp])
                    + pow_neg1(qp) * w3(ks, [-q, qp, -qpp])
                    + pow_neg1(qpp) * w3(ks, [q, qp, -qpp])),
        ),
        (Comp::Y, Comp::Y, Comp::Y) => Some(
            f / 2f64.sqrt()
                * (pow_neg1(q) * w3(ks, [-q, qp, qpp])
                    + pow_neg1(qp) * w3(ks, [q, -qp, qpp])
                    + pow_neg1(qpp) * w3(ks, [q, qp, -qpp])),
        ),
        (Comp::X, Comp::Y, Comp::Z) => Some(-f * pow_neg1(q) * w3(ks, [q, -qp, 0])),
        _ => None,
    }
}

fn analytic_g_value(
    a: (Comp, u32, i32),
    b: (Comp, u32, i32),
    c: (Comp, u32, i32),
    spin: HalfInteger,
) -> Option<f64> {
    let (ka, kb, kc) = (a.1, b.1, c.1);
    if (ka + kb + kc) % 2 == 1 {
        return None;
    }
    let f = f_factor(ka, kb, kc, spin);
    let ks = [ka, kb, kc];
    let (q, qp, qpp) = (a.2, b.2, c.2);
    match (a.0, b.0, c.0) {
        (Comp::X, Comp::X, Comp::X) => Some(
            f / 2f64.sqrt()
                * (pow_neg1(q) * w3(ks, [q, -qp, -qpp])
                    + pow_neg1(qp) * w3(ks, [-q, qp, -qpp])
                    + pow_neg1(qpp) * w3(ks, [q, qp, -qpp])),
        ),
        (Comp::X, Comp::Y, Comp::Y) => Some(
            f / 2f64.sqrt()
                * (-pow_neg1(q) * w3(ks, [q, -qp, -qpp])
                    + pow_neg1(qp) * w3(ks, [-q, qp, -qpp])
                    + pow_neg1(qpp) * w3(ks, [-q, -qp, qpp])),
        ),
        (Comp::X, Comp::X, Comp::Z) | (Comp::Y, Comp::Y, Comp::Z) => {
            Some(f * pow_neg1(q) * w3(ks, [q, -qp, 0]))
        }
        (Comp::Z, Comp::Z, Comp::Z) => Some(f * w3(ks, [0, 0, 0])),
        _ => None,
    }
}

const EVEN_PERMS: [[usize; 3]; 3] = [[0, 1, 2], [1, 2, 0], [2, 0, 1]];
const ODD_PERMS: [[usize; 3]; 3] = [[0, 2, 1], [2, 1, 0], [1, 0, 2]];

/// Antisymmetric table from the closed forms. Each canonical component
/// ordering is evaluated once; all other orderings are filled by total
/// antisymmetry.
pub fn e_analytic(spin: HalfInteger) -> Result<SparseTriple> {
    let b = SpinBasis::get(spin)?;
    let n = b.n;
    let mut map = BTreeMap::new();
    for i in 1..=n {
        for j in (i + 1)..=n {
            for k in (j + 1)..=n {
                let idx = [i, j, k];
                let mut comps: Vec<(usize, (Comp, u32, i32))> = idx
                    .iter()
                    .map(|&t| (t, comp_of(&b.labels[t]).expect("traceless label")))
                    .collect();
                // canonical component order: X before Y before Z
                comps.sort_by_key(|(_, c)| c.0);
                let cls = (comps[0].1 .0, comps[1].1 .0, comps[2].1 .0);
                if !matches!(
                    cls,
                    (Comp::X, Comp::X, Comp::Y)
                        | (Comp::Y, Comp::Y, Comp::Y)
                        | (Comp::X, Comp::Y, Comp::Z)
                ) {
                    continue;
                }
                let Some(v) = analytic_e_value(comps[0].1, comps[1].1, comps[2].1, spin) else {
                    continue;
                };
                if v.abs() <= ZERO_EPS {
                    continue;
                }
                let canon = [comps[0].0 as u16, comps[1].0 as u16, comps[2].0 as u16];
                for p in EVEN_PERMS {
                    map.insert((canon[p[0]], canon[p[1]], canon[p[2]]), v);
                }
                for p in ODD_PERMS {
                    map.insert((canon[p[0]], canon[p[1]], canon[p[2]]), -v);
                }
            }
        }
    }
    Ok(SparseTriple::from_map(map, n))
}

/// Symmetric table from the closed forms, filled over all index orderings
/// by total symmetry.
pub fn g_analytic(spin: HalfInteger) -> Result<SparseTriple> {
    let b = SpinBasis::get(spin)?;
    let n = b.n;
    let mut map = BTreeMap::new();
    for i in 1..=n {
        for j in i..=n {
            for k in j..=n {
                let idx = [i, j, k];
                let mut comps: Vec<(usize, (Comp, u32, i32))> = idx
                    .iter()
                    .map(|&t| (t, comp_of(&b.labels[t]).expect("traceless label")))
                    .collect();
                comps.sort_by_key(|(_, c)| c.0);
                let cls = (comps[0].1 .0, comps[1].1 .0, comps[2].1 .0);
                if !matches!(
                    cls,
                    (Comp::X, Comp::X, Comp::X)
                        | (Comp::X, Comp::Y, Comp::Y)
                        | (Comp::X, Comp::X, Comp::Z)
                        | (Comp::Y, Comp::Y, Comp::Z)
                        | (Comp::Z, Comp::Z, Comp::Z)
                ) {
                    continue;
                }
                let Some(v) = analytic_g_value(comps[0].1, comps[1].1, comps[2].1, spin) else {
                    continue;
                };
                if v.abs() <= ZERO_EPS {
                    continue;
                }
                let canon = [comps[0].0 as u16, comps[1].0 as u16, comps[2].0 as u16];
                for p in EVEN_PERMS.iter().chain(ODD_PERMS.iter()) {
                    map.insert((canon[p[0]], canon[p[1]], canon[p[2]]), v);
                }
            }
        }
    }
    Ok(SparseTriple::from_map(map, n))
}

/// The per-spin tables used by the dynamics, from the trace route.
#[derive(Debug)]
pub struct StructureTables {
    pub spin: HalfInteger,
    /// Number of traceless indices, (2S+1)² − 1.
    pub n: usize,
    pub c_unit: f64,
    pub c_norm: f64,
    pub e: SparseTriple,
    pub g: SparseTriple,
}

static TABLES_CACHE: LazyLock<RwLock<HashMap<i32, Arc<StructureTables>>>> =
    LazyLock::new(|| RwLock::new(HashMap::new()));

impl StructureTables {
    pub fn get(spin: HalfInteger) -> Result<Arc<StructureTables>> {
        {
            let cache = TABLES_CACHE.read().unwrap();
            if let Some(t) = cache.get(&spin.twice()) {
                return Ok(Arc::clone(t));
            }
        }
        let b = SpinBasis::get(spin)?;
        let (e, g) = tables_from_traces(spin)?;
        let built = Arc::new(StructureTables {
            spin,
            n: b.n,
            c_unit: b.c_unit,
            c_norm: b.c_norm,
            e,
            g,
        });
        let mut cache = TABLES_CACHE.write().unwrap();
        Ok(Arc::clone(cache.entry(spin.twice()).or_insert(built)))
    }
}

/// Tr C_i C_j C_k over the full index set 0..=n, with 0 the unit element,
/// split into real and imaginary parts. Assembled from the e/g tables and
/// the unit-trace rules rather than re-traced.
#[derive(Debug)]
pub struct ExtendedTripleTrace {
    pub spin: HalfInteger,
    /// Full index count (2S+1)².
    pub full: usize,
    map: BTreeMap<(u16, u16, u16), (f64, f64)>,
    by_first: Vec<Vec<(u16, u16, f64, f64)>>,
}

static TRIPLE_CACHE: LazyLock<RwLock<HashMap<i32, Arc<ExtendedTripleTrace>>>> =
    LazyLock::new(|| RwLock::new(HashMap::new()));

impl ExtendedTripleTrace {
    pub fn get(spin: HalfInteger) -> Result<Arc<ExtendedTripleTrace>> {
        {
            let cache = TRIPLE_CACHE.read().unwrap();
            if let Some(t) = cache.get(&spin.twice()) {
                return Ok(Arc::clone(t));
            }
        }
        let built = Arc::new(ExtendedTripleTrace::build(spin)?);
        let mut cache = TRIPLE_CACHE.write().unwrap();
        Ok(Arc::clone(cache.entry(spin.twice()).or_insert(built)))
    }

    fn build(spin: HalfInteger) -> Result<ExtendedTripleTrace> {
        let tables = StructureTables::get(spin)?;
        let n = tables.n;
        let cu_cn = tables.c_unit * tables.c_norm;
        let mut map: BTreeMap<(u16, u16, u16), (f64, f64)> = BTreeMap::new();
        map.insert((0, 0, 0), (cu_cn, 0.0));
        for j in 1..=n as u16 {
            // the unit commutes, so every placement carries the same value
            map.insert((0, j, j), (cu_cn, 0.0));
            map.insert((j, 0, j), (cu_cn, 0.0));
            map.insert((j, j, 0), (cu_cn, 0.0));
        }
        for ((i, j, k), v) in tables.g.iter() {
            map.entry((i as u16, j as u16, k as u16))
                .or_insert((0.0, 0.0))
                .0 = tables.c_norm * v;
        }
        for ((i, j, k), v) in tables.e.iter() {
            map.entry((i as u16, j as u16, k as u16))
                .or_insert((0.0, 0.0))
                .1 = tables.c_norm * v;
        }
        let mut by_first = vec![Vec::new(); n + 1];
        for (&(i, j, k), &(re, im)) in &map {
            by_first[i as usize].push((j, k, re, im));
        }
        Ok(ExtendedTripleTrace {
            spin,
            full: n + 1,
            map,
            by_first,
        })
    }

    /// (Re, Im) of Tr C_i C_j C_k.
    pub fn tau(&self, i: usize, j: usize, k: usize) -> (f64, f64) {
        self.map
            .get(&(i as u16, j as u16, k as u16))
            .copied()
            .unwrap_or((0.0, 0.0))
    }

    /// Entries (j, k, re, im) with the first index fixed.
    pub fn with_first(&self, i: usize) -> &[(u16, u16, f64, f64)] {
        &self.by_first[i]
    }
}

/// Max violation of total antisymmetry of e and total symmetry of g over
/// all index transpositions.
#[derive(Clone, Copy, Debug)]
pub struct SymmetryReport {
    pub max_e_violation: f64,
    pub max_g_violation: f64,
}

pub fn symmetry_selftest(spin: HalfInteger) -> Result<SymmetryReport> {
    let tables = StructureTables::get(spin)?;
    let mut report = SymmetryReport {
        max_e_violation: 0.0,
        max_g_violation: 0.0,
    };
    for ((i, j, k), v) in tables.e.iter() {
        for p in EVEN_PERMS {
            let t = [i, j, k];
            let w = tables.e.get(t[p[0]], t[p[1]], t[p[2]]);
            report.max_e_violation = report.max_e_violation.max((w - v).abs());
        }
        for p in ODD_PERMS {
            let t = [i, j, k];
            let w = tables.e.get(t[p[0]], t[p[1]], t[p[2]]);
            report.max_e_violation = report.max_e_violation.max((w + v).abs());
        }
    }
    for ((i, j, k), v) in tables.g.iter() {
        for p in EVEN_PERMS.iter().chain(ODD_PERMS.iter()) {
            let t = [i, j, k];
            let w = tables.g.get(t[p[0]], t[p[1]], t[p[2]]);
            report.max_g_violation = report.max_g_violation.max((w - v).abs());
        }
    }
    Ok(report)
}
