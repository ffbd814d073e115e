//! Right-hand sides of the real dynamical system dR/dt.
//!
//! Two independent builds of the same derivative:
//!
//! * [`CompiledRhs`] derives the equations mechanically from the extended
//!   triple-trace tensors: ∂_t R_η = (1/Πc_norm) Σ h_β R_α Im Π_i
//!   τ^{(i)}(β_i, α_i, η_i), expanded in real arithmetic and precompiled
//!   into one sparse matrix for the dc part plus one per ac primitive, so
//!   the hot loop is a sparse mat-vec. This is the authoritative dynamics.
//! * [`rhs_one`], [`rhs_two`], [`rhs_three`] transcribe the explicit
//!   per-block equations term by term from the e/g tables and serve as a
//!   cross-check of the generic build.
//!
//! Both leave the derivative at the all-unit index exactly zero.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::field::{FieldSpec, Primitive};
use crate::state::BlochState;
use crate::system::SystemSpec;

/// Unit-amplitude time factor of one non-constant primitive; the amplitude
/// is folded into the precompiled matrix.
#[derive(Clone, Copy, Debug)]
enum Waveform {
    Cos { omega: f64, phase: f64 },
    Sin { omega: f64, phase: f64 },
    Pulse { t_on: f64, t_off: f64 },
}

impl Waveform {
    fn eval(&self, t: f64) -> f64 {
        match *self {
            Waveform::Cos { omega, phase } => (omega * t + phase).cos(),
            Waveform::Sin { omega, phase } => (omega * t + phase).sin(),
            Waveform::Pulse { t_on, t_off } => {
                if t >= t_on && t < t_off {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

/// Row-major CSR matrix with f64 entries.
#[derive(Clone, Debug)]
struct Csr {
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
}

impl Csr {
    fn from_coo(coo: &HashMap<(u32, u32), f64>, dim: usize) -> Csr {
        let mut entries: Vec<((u32, u32), f64)> = coo
            .iter()
            .filter(|(_, &v)| v != 0.0)
            .map(|(&k, &v)| (k, v))
            .collect();
        entries.sort_unstable_by_key(|&(k, _)| k);
        let mut row_ptr = vec![0usize; dim + 1];
        let mut cols = Vec::with_capacity(entries.len());
        let mut vals = Vec::with_capacity(entries.len());
        for ((r, c), v) in entries {
            row_ptr[r as usize + 1] += 1;
            cols.push(c);
            vals.push(v);
        }
        for r in 0..dim {
            row_ptr[r + 1] += row_ptr[r];
        }
        Csr {
            row_ptr,
            cols,
            vals,
        }
    }

    fn accumulate(&self, r: &[f64], scale: f64, out: &mut [f64]) {
        for row in 0..out.len() {
            let lo = self.row_ptr[row];
            let hi = self.row_ptr[row + 1];
            if lo == hi {
                continue;
            }
            let mut acc = 0.0;
            for idx in lo..hi {
                acc += self.vals[idx] * r[self.cols[idx] as usize];
            }
            out[row] += scale * acc;
        }
    }

    fn nnz(&self) -> usize {
        self.vals.len()
    }
}

/// The generic right-hand side, precompiled for one (system, field) pair:
/// dR/dt = M_dc·R + Σ_p w_p(t)·M_p·R.
#[derive(Debug)]
pub struct CompiledRhs {
    len: usize,
    dc: Csr,
    ac: Vec<(Waveform, Csr)>,
}

impl CompiledRhs {
    pub fn new(spec: &SystemSpec, field: &FieldSpec) -> Result<CompiledRhs> {
        field.validate(spec)?;
        let len = spec.state_len();
        let mut matrix_cache: HashMap<Vec<usize>, HashMap<(u32, u32), f64>> = HashMap::new();
        let mut dc: HashMap<(u32, u32), f64> = HashMap::new();
        let mut ac: Vec<(Waveform, Csr)> = Vec::new();
        for term in &field.terms {
            if term.is_all_unit() {
                // identity component: global phase only
                continue;
            }
            let m = matrix_cache
                .entry(term.indices.clone())
                .or_insert_with(|| generic_coefficient_matrix(spec, &term.indices));
            for prim in &term.profile {
                match *prim {
                    Primitive::Constant { amplitude } => {
                        for (&k, &v) in m.iter() {
                            *dc.entry(k).or_insert(0.0) += amplitude * v;
                        }
                    }
                    Primitive::Cosine {
                        amplitude,
                        omega,
                        phase,
                    } => {
                        ac.push((
                            Waveform::Cos { omega, phase },
                            scaled_csr(m, amplitude, len),
                        ));
                    }
                    Primitive::Sine {
                        amplitude,
                        omega,
                        phase,
                    } => {
                        ac.push((
                            Waveform::Sin { omega, phase },
                            scaled_csr(m, amplitude, len),
                        ));
                    }
                    Primitive::Pulse {
                        amplitude,
                        t_on,
                        t_off,
                    } => {
                        ac.push((
                            Waveform::Pulse { t_on, t_off },
                            scaled_csr(m, amplitude, len),
                        ));
                    }
                }
            }
        }
        Ok(CompiledRhs {
            len,
            dc: Csr::from_coo(&dc, len),
            ac,
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn nnz(&self) -> usize {
        self.dc.nnz() + self.ac.iter().map(|(_, m)| m.nnz()).sum::<usize>()
    }

    /// Writes dR/dt at time t into `out`.
    pub fn eval_into(&self, r: &[f64], t: f64, out: &mut [f64]) {
        debug_assert_eq!(r.len(), self.len);
        debug_assert_eq!(out.len(), self.len);
        out.fill(0.0);
        self.dc.accumulate(r, 1.0, out);
        for (w, m) in &self.ac {
            let factor = w.eval(t);
            if factor != 0.0 {
                m.accumulate(r, factor, out);
            }
        }
    }

    /// Test hook: corrupts one matrix entry so validation runs can prove
    /// they detect broken tables.
    #[doc(hidden)]
    pub fn perturb_first_entry(&mut self, epsilon: f64) {
        if let Some(v) = self.dc.vals.first_mut() {
            *v += epsilon;
        } else if let Some((_, m)) = self.ac.first_mut() {
            if let Some(v) = m.vals.first_mut() {
                *v += epsilon;
            }
        }
    }
}

fn scaled_csr(m: &HashMap<(u32, u32), f64>, amplitude: f64, dim: usize) -> Csr {
    let scaled: HashMap<(u32, u32), f64> = m.iter().map(|(&k, &v)| (k, amplitude * v)).collect();
    Csr::from_coo(&scaled, dim)
}

/// M[η, α] = Im(Π_i τ^{(i)}(β_i, α_i, η_i))/Πc_norm for one coefficient
/// multi-index β, with the complex product expanded in real arithmetic.
fn generic_coefficient_matrix(spec: &SystemSpec, beta: &[usize]) -> HashMap<(u32, u32), f64> {
    let inv_norm: f64 = 1.0
        / (0..spec.qudit_count())
            .map(|i| spec.c_norm(i))
            .product::<f64>();
    let mut coo: HashMap<(u32, u32), f64> = HashMap::new();
    match spec.qudit_count() {
        1 => {
            for &(a0, e0, _, im0) in spec.triple_trace(0).with_first(beta[0]) {
                if im0 != 0.0 {
                    *coo.entry((e0 as u32, a0 as u32)).or_insert(0.0) += im0 * inv_norm;
                }
            }
        }
        2 => {
            let s0 = spec.stride(0) as u32;
            for &(a0, e0, re0, im0) in spec.triple_trace(0).with_first(beta[0]) {
                for &(a1, e1, re1, im1) in spec.triple_trace(1).with_first(beta[1]) {
                    let im = re0 * im1 + im0 * re1;
                    if im != 0.0 {
                        let row = e0 as u32 * s0 + e1 as u32;
                        let col = a0 as u32 * s0 + a1 as u32;
                        *coo.entry((row, col)).or_insert(0.0) += im * inv_norm;
                    }
                }
            }
        }
        3 => {
            let s0 = spec.stride(0) as u32;
            let s1 = spec.stride(1) as u32;
            for &(a0, e0, re0, im0) in spec.triple_trace(0).with_first(beta[0]) {
                for &(a1, e1, re1, im1) in spec.triple_trace(1).with_first(beta[1]) {
                    let rr = re0 * re1 - im0 * im1;
                    let ri = re0 * im1 + im0 * re1;
                    for &(a2, e2, re2, im2) in spec.triple_trace(2).with_first(beta[2]) {
                        let im = rr * im2 + ri * re2;
                        if im != 0.0 {
                            let row = e0 as u32 * s0 + e1 as u32 * s1 + e2 as u32;
                            let col = a0 as u32 * s0 + a1 as u32 * s1 + a2 as u32;
                            *coo.entry((row, col)).or_insert(0.0) += im * inv_norm;
                        }
                    }
                }
            }
        }
        _ => unreachable!("systems hold 1..=3 qudits"),
    }
    coo
}

/// Generic derivative at one instant (compiles the field on the fly; use
/// [`CompiledRhs`] directly when integrating).
pub fn rhs_generic(state: &BlochState, field: &FieldSpec, t: f64) -> Result<Vec<f64>> {
    let compiled = CompiledRhs::new(state.spec(), field)?;
    let mut out = vec![0.0; state.spec().state_len()];
    compiled.eval_into(state.components(), t, &mut out);
    Ok(out)
}

/// Dispatches to the explicit per-block transcription for the system size.
pub fn rhs_explicit(state: &BlochState, field: &FieldSpec, t: f64) -> Result<Vec<f64>> {
    match state.spec().qudit_count() {
        1 => rhs_one(state, field, t),
        2 => rhs_two(state, field, t),
        3 => rhs_three(state, field, t),
        n => Err(Error::BadQuditCount(n)),
    }
}

/// One qudit: ∂_t R_l = e_{ijl} h_i R_j.
pub fn rhs_one(state: &BlochState, field: &FieldSpec, t: f64) -> Result<Vec<f64>> {
    let spec = state.spec();
    if spec.qudit_count() != 1 {
        return Err(Error::BadQuditCount(spec.qudit_count()));
    }
    field.validate(spec)?;
    let r = state.components();
    let e = &spec.tables(0).e;
    let mut out = vec![0.0; spec.state_len()];
    for (multi, h) in field.eval_terms(t) {
        let b = multi[0];
        if b == 0 || h == 0.0 {
            continue;
        }
        for &(j, l, v) in e.with_first(b) {
            out[l as usize] += h * v * r[j as usize];
        }
    }
    Ok(out)
}

/// Two qudits: the explicit equations for ∂_t R_{m0}, ∂_t R_{0m} and
/// ∂_t R_{mn}, evaluated per coefficient channel.
pub fn rhs_two(state: &BlochState, field: &FieldSpec, t: f64) -> Result<Vec<f64>> {
    let spec = state.spec();
    if spec.qudit_count() != 2 {
        return Err(Error::BadQuditCount(spec.qudit_count()));
    }
    field.validate(spec)?;
    let r = state.components();
    let (e1, g1) = (&spec.tables(0).e, &spec.tables(0).g);
    let (e2, g2) = (&spec.tables(1).e, &spec.tables(1).g);
    let (c1, c2) = (spec.c_unit(0), spec.c_unit(1));
    let (n1, n2) = (spec.n(0), spec.n(1));
    let s0 = spec.stride(0);
    let mut out = vec![0.0; spec.state_len()];

    for (multi, h) in field.eval_terms(t) {
        let (b1, b2) = (multi[0], multi[1]);
        if (b1 == 0 && b2 == 0) || h == 0.0 {
            continue;
        }
        // ∂_t R_{m0} = c₂ e¹_{pim} (h_{p0} R_{i0} + h_{pl} R_{il})
        if b1 >= 1 {
            for &(i, m, v) in e1.with_first(b1) {
                out[m as usize * s0] += c2 * h * v * r[i as usize * s0 + b2];
            }
        }
        // ∂_t R_{0m} = c₁ e²_{pim} (h_{0p} R_{0i} + h_{lp} R_{li})
        if b2 >= 1 {
            for &(i, m, v) in e2.with_first(b2) {
                out[m as usize] += c1 * h * v * r[b1 * s0 + i as usize];
            }
        }
        // ∂_t R_{mn}, split by which coefficient slots are occupied
        if b1 >= 1 && b2 >= 1 {
            // e¹_{pim} c₂ h_{pn} R_{i0}
            for &(i, m, v) in e1.with_first(b1) {
                out[m as usize * s0 + b2] += c2 * h * v * r[i as usize * s0];
            }
            // e²_{pin} c₁ h_{mp} R_{0i}
            for &(i, n, v) in e2.with_first(b2) {
                out[b1 * s0 + n as usize] += c1 * h * v * r[i as usize];
            }
            // e¹_{pim} g²_{rln} h_{pr} R_{il}
            for &(i, m, v1) in e1.with_first(b1) {
                for &(l, n, v2) in g2.with_first(b2) {
                    out[m as usize * s0 + n as usize] +=
                        h * v1 * v2 * r[i as usize * s0 + l as usize];
                }
            }
            // e²_{pin} g¹_{rlm} h_{rp} R_{li}
            for &(i, n, v1) in e2.with_first(b2) {
                for &(l, m, v2) in g1.with_first(b1) {
                    out[m as usize * s0 + n as usize] +=
                        h * v1 * v2 * r[l as usize * s0 + i as usize];
                }
            }
        } else if b1 >= 1 {
            // e¹_{pim} c₂ h_{p0} R_{in}
            for &(i, m, v) in e1.with_first(b1) {
                for n in 1..=n2 {
                    out[m as usize * s0 + n] += c2 * h * v * r[i as usize * s0 + n];
                }
            }
        } else {
            // e²_{pin} c₁ h_{0p} R_{mi}
            for &(i, n, v) in e2.with_first(b2) {
                for m in 1..=n1 {
                    out[m * s0 + n as usize] += c1 * h * v * r[m * s0 + i as usize];
                }
            }
        }
    }
    Ok(out)
}

/// Three qudits: the explicit equations for all seven blocks ∂_t R_{m00}
/// through ∂_t R_{mnp}, evaluated per coefficient channel with the occupied
/// coefficient slots deciding which terms fire.
pub fn rhs_three(state: &BlochState, field: &FieldSpec, t: f64) -> Result<Vec<f64>> {
    let spec = state.spec();
    if spec.qudit_count() != 3 {
        return Err(Error::BadQuditCount(spec.qudit_count()));
    }
    field.validate(spec)?;
    let r = state.components();
    let (e1, g1) = (&spec.tables(0).e, &spec.tables(0).g);
    let (e2, g2) = (&spec.tables(1).e, &spec.tables(1).g);
    let (e3, g3) = (&spec.tables(2).e, &spec.tables(2).g);
    let (c1, c2, c3) = (spec.c_unit(0), spec.c_unit(1), spec.c_unit(2));
    let (n1, n2, n3) = (spec.n(0), spec.n(1), spec.n(2));
    let s0 = spec.stride(0);
    let s1 = spec.stride(1);
    let at = |a: usize, b: usize, c: usize| a * s0 + b * s1 + c;
    let mut out = vec![0.0; spec.state_len()];

    for (multi, h) in field.eval_terms(t) {
        let (b1, b2, b3) = (multi[0], multi[1], multi[2]);
        if (b1 == 0 && b2 == 0 && b3 == 0) || h == 0.0 {
            continue;
        }

        // ∂_t R_{m00} = c₂c₃ e¹_{jim} h_{jβγ} R_{iβγ}
        if b1 >= 1 {
            for &(i, m, v) in e1.with_first(b1) {
                out[at(m as usize, 0, 0)] += c2 * c3 * h * v * r[at(i as usize, b2, b3)];
            }
        }
        // ∂_t R_{0n0} = c₁c₃ e²_{ikn} h_{αiγ} R_{αkγ}
        if b2 >= 1 {
            for &(k, n, v) in e2.with_first(b2) {
                out[at(0, n as usize, 0)] += c1 * c3 * h * v * r[at(b1, k as usize, b3)];
            }
        }
        // ∂_t R_{00p} = c₁c₂ e³_{ijp} h_{αβi} R_{αβj}
        if b3 >= 1 {
            for &(j, p, v) in e3.with_first(b3) {
                out[at(0, 0, p as usize)] += c1 * c2 * h * v * r[at(b1, b2, j as usize)];
            }
        }

        // ∂_t R_{mn0}
        if b1 >= 1 && b2 >= 1 {
            for &(i, m, v) in e1.with_first(b1) {
                out[at(m as usize, b2, 0)] += c2 * c3 * h * v * r[at(i as usize, 0, b3)];
            }
            for &(k, n, v) in e2.with_first(b2) {
                out[at(b1, n as usize, 0)] += c1 * c3 * h * v * r[at(0, k as usize, b3)];
            }
            for &(i, m, v1) in e1.with_first(b1) {
                for &(k, n, v2) in g2.with_first(b2) {
                    out[at(m as usize, n as usize, 0)] +=
                        c3 * h * v1 * v2 * r[at(i as usize, k as usize, b3)];
                }
            }
            for &(i, m, v1) in g1.with_first(b1) {
                for &(k, n, v2) in e2.with_first(b2) {
                    out[at(m as usize, n as usize, 0)] +=
                        c3 * h * v1 * v2 * r[at(i as usize, k as usize, b3)];
                }
            }
        } else if b1 >= 1 {
            for &(i, m, v) in e1.with_first(b1) {
                for n in 1..=n2 {
                    out[at(m as usize, n, 0)] += c2 * c3 * h * v * r[at(i as usize, n, b3)];
                }
            }
        } else if b2 >= 1 {
            for &(k, n, v) in e2.with_first(b2) {
                for m in 1..=n1 {
                    out[at(m, n as usize, 0)] += c1 * c3 * h * v * r[at(m, k as usize, b3)];
                }
            }
        }

        // ∂_t R_{m0p}
        if b1 >= 1 && b3 >= 1 {
            for &(i, m, v) in e1.with_first(b1) {
                out[at(m as usize, 0, b3)] += c2 * c3 * h * v * r[at(i as usize, b2, 0)];
            }
            for &(q, p, v) in e3.with_first(b3) {
                out[at(b1, 0, p as usize)] += c1 * c2 * h * v * r[at(0, b2, q as usize)];
            }
            for &(i, m, v1) in e1.with_first(b1) {
                for &(q, p, v2) in g3.with_first(b3) {
                    out[at(m as usize, 0, p as usize)] +=
                        c2 * h * v1 * v2 * r[at(i as usize, b2, q as usize)];
                }
            }
            for &(i, m, v1) in g1.with_first(b1) {
                for &(q, p, v2) in e3.with_first(b3) {
                    out[at(m as usize, 0, p as usize)] +=
                        c2 * h * v1 * v2 * r[at(i as usize, b2, q as usize)];
                }
            }
        } else if b1 >= 1 {
            for &(i, m, v) in e1.with_first(b1) {
                for p in 1..=n3 {
                    out[at(m as usize, 0, p)] += c2 * c3 * h * v * r[at(i as usize, b2, p)];
                }
            }
        } else if b3 >= 1 {
            for &(q, p, v) in e3.with_first(b3) {
                for m in 1..=n1 {
                    out[at(m, 0, p as usize)] += c1 * c2 * h * v * r[at(m, b2, q as usize)];
                }
            }
        }

        // ∂_t R_{0np}
        if b2 >= 1 && b3 >= 1 {
            for &(k, n, v) in e2.with_first(b2) {
                out[at(0, n as usize, b3)] += c1 * c3 * h * v * r[at(b1, k as usize, 0)];
            }
            for &(q, p, v) in e3.with_first(b3) {
                out[at(0, b2, p as usize)] += c1 * c2 * h * v * r[at(b1, 0, q as usize)];
            }
            for &(k, n, v1) in e2.with_first(b2) {
                for &(q, p, v2) in g3.with_first(b3) {
                    out[at(0, n as usize, p as usize)] +=
                        c1 * h * v1 * v2 * r[at(b1, k as usize, q as usize)];
                }
            }
            for &(k, n, v1) in g2.with_first(b2) {
                for &(q, p, v2) in e3.with_first(b3) {
                    out[at(0, n as usize, p as usize)] +=
                        c1 * h * v1 * v2 * r[at(b1, k as usize, q as usize)];
                }
            }
        } else if b2 >= 1 {
            for &(k, n, v) in e2.with_first(b2) {
                for p in 1..=n3 {
                    out[at(0, n as usize, p)] += c1 * c3 * h * v * r[at(b1, k as usize, p)];
                }
            }
        } else if b3 >= 1 {
            for &(q, p, v) in e3.with_first(b3) {
                for n in 1..=n2 {
                    out[at(0, n, p as usize)] += c1 * c2 * h * v * r[at(b1, n, q as usize)];
                }
            }
        }

        // ∂_t R_{mnp}
        match (b1 >= 1, b2 >= 1, b3 >= 1) {
            (true, true, true) => {
                for &(i, m, v) in e1.with_first(b1) {
                    out[at(m as usize, b2, b3)] += c2 * c3 * h * v * r[at(i as usize, 0, 0)];
                }
                for &(k, n, v) in e2.with_first(b2) {
                    out[at(b1, n as usize, b3)] += c1 * c3 * h * v * r[at(0, k as usize, 0)];
                }
                for &(q, p, v) in e3.with_first(b3) {
                    out[at(b1, b2, p as usize)] += c1 * c2 * h * v * r[at(0, 0, q as usize)];
                }
                for &(i, m, v1) in e1.with_first(b1) {
                    for &(k, n, v2) in g2.with_first(b2) {
                        out[at(m as usize, n as usize, b3)] +=
                            c3 * h * v1 * v2 * r[at(i as usize, k as usize, 0)];
                    }
                }
                for &(i, m, v1) in g1.with_first(b1) {
                    for &(k, n, v2) in e2.with_first(b2) {
                        out[at(m as usize, n as usize, b3)] +=
                            c3 * h * v1 * v2 * r[at(i as usize, k as usize, 0)];
                    }
                }
                for &(i, m, v1) in e1.with_first(b1) {
                    for &(q, p, v2) in g3.with_first(b3) {
                        out[at(m as usize, b2, p as usize)] +=
                            c2 * h * v1 * v2 * r[at(i as usize, 0, q as usize)];
                    }
                }
                for &(i, m, v1) in g1.with_first(b1) {
                    for &(q, p, v2) in e3.with_first(b3) {
                        out[at(m as usize, b2, p as usize)] +=
                            c2 * h * v1 * v2 * r[at(i as usize, 0, q as usize)];
                    }
                }
                for &(k, n, v1) in e2.with_first(b2) {
                    for &(q, p, v2) in g3.with_first(b3) {
                        out[at(b1, n as usize, p as usize)] +=
                            c1 * h * v1 * v2 * r[at(0, k as usize, q as usize)];
                    }
                }
                for &(k, n, v1) in g2.with_first(b2) {
                    for &(q, p, v2) in e3.with_first(b3) {
                        out[at(b1, n as usize, p as usize)] +=
                            c1 * h * v1 * v2 * r[at(0, k as usize, q as usize)];
                    }
                }
                // e¹g²g³ + g¹e²g³ + g¹g²e³ − e¹e²e³
                triple_products(e1, g2, g3, (b1, b2, b3), h, 1.0, r, &mut out, at);
                triple_products(g1, e2, g3, (b1, b2, b3), h, 1.0, r, &mut out, at);
                triple_products(g1, g2, e3, (b1, b2, b3), h, 1.0, r, &mut out, at);
                triple_products(e1, e2, e3, (b1, b2, b3), h, -1.0, r, &mut out, at);
            }
            (true, false, true) => {
                for &(i, m, v) in e1.with_first(b1) {
                    for n in 1..=n2 {
                        out[at(m as usize, n, b3)] += c2 * c3 * h * v * r[at(i as usize, n, 0)];
                    }
                }
                for &(q, p, v) in e3.with_first(b3) {
                    for n in 1..=n2 {
                        out[at(b1, n, p as usize)] += c1 * c2 * h * v * r[at(0, n, q as usize)];
                    }
                }
                for &(i, m, v1) in e1.with_first(b1) {
                    for &(q, p, v2) in g3.with_first(b3) {
                        for n in 1..=n2 {
                            out[at(m as usize, n, p as usize)] +=
                                c2 * h * v1 * v2 * r[at(i as usize, n, q as usize)];
                        }
                    }
                }
                for &(i, m, v1) in g1.with_first(b1) {
                    for &(q, p, v2) in e3.with_first(b3) {
                        for n in 1..=n2 {
                            out[at(m as usize, n, p as usize)] +=
                                c2 * h * v1 * v2 * r[at(i as usize, n, q as usize)];
                        }
                    }
                }
            }
            (false, true, true) => {
                for &(k, n, v) in e2.with_first(b2) {
                    for m in 1..=n1 {
                        out[at(m, n as usize, b3)] += c1 * c3 * h * v * r[at(m, k as usize, 0)];
                    }
                }
                for &(q, p, v) in e3.with_first(b3) {
                    for m in 1..=n1 {
                        out[at(m, b2, p as usize)] += c1 * c2 * h * v * r[at(m, 0, q as usize)];
                    }
                }
                for &(k, n, v1) in e2.with_first(b2) {
                    for &(q, p, v2) in g3.with_first(b3) {
                        for m in 1..=n1 {
                            out[at(m, n as usize, p as usize)] +=
                                c1 * h * v1 * v2 * r[at(m, k as usize, q as usize)];
                        }
                    }
                }
                for &(k, n, v1) in g2.with_first(b2) {
                    for &(q, p, v2) in e3.with_first(b3) {
                        for m in 1..=n1 {
                            out[at(m, n as usize, p as usize)] +=
                                c1 * h * v1 * v2 * r[at(m, k as usize, q as usize)];
                        }
                    }
                }
            }
            (true, true, false) => {
                for &(i, m, v) in e1.with_first(b1) {
                    for p in 1..=n3 {
                        out[at(m as usize, b2, p)] += c2 * c3 * h * v * r[at(i as usize, 0, p)];
                    }
                }
                for &(k, n, v) in e2.with_first(b2) {
                    for p in 1..=n3 {
                        out[at(b1, n as usize, p)] += c1 * c3 * h * v * r[at(0, k as usize, p)];
                    }
                }
                for &(i, m, v1) in e1.with_first(b1) {
                    for &(k, n, v2) in g2.with_first(b2) {
                        for p in 1..=n3 {
                            out[at(m as usize, n as usize, p)] +=
                                c3 * h * v1 * v2 * r[at(i as usize, k as usize, p)];
                        }
                    }
                }
                for &(i, m, v1) in g1.with_first(b1) {
                    for &(k, n, v2) in e2.with_first(b2) {
                        for p in 1..=n3 {
                            out[at(m as usize, n as usize, p)] +=
                                c3 * h * v1 * v2 * r[at(i as usize, k as usize, p)];
                        }
                    }
                }
            }
            (true, false, false) => {
                for &(i, m, v) in e1.with_first(b1) {
                    for n in 1..=n2 {
                        for p in 1..=n3 {
                            out[at(m as usize, n, p)] += c2 * c3 * h * v * r[at(i as usize, n, p)];
                        }
                    }
                }
            }
            (false, true, false) => {
                for &(k, n, v) in e2.with_first(b2) {
                    for m in 1..=n1 {
                        for p in 1..=n3 {
                            out[at(m, n as usize, p)] += c1 * c3 * h * v * r[at(m, k as usize, p)];
                        }
                    }
                }
            }
            (false, false, true) => {
                for &(q, p, v) in e3.with_first(b3) {
                    for m in 1..=n1 {
                        for n in 1..=n2 {
                            out[at(m, n, p as usize)] += c1 * c2 * h * v * r[at(m, n, q as usize)];
                        }
                    }
                }
            }
            (false, false, false) => {}
        }
    }
    Ok(out)
}

/// One third-order product family t¹_{jim} t²_{lkn} t³_{rqp} h_{jlr} R_{ikq}.
fn triple_products(
    t1: &crate::algebra::SparseTriple,
    t2: &crate::algebra::SparseTriple,
    t3: &crate::algebra::SparseTriple,
    (b1, b2, b3): (usize, usize, usize),
    h: f64,
    sign: f64,
    r: &[f64],
    out: &mut [f64],
    at: impl Fn(usize, usize, usize) -> usize,
) {
    for &(i, m, v1) in t1.with_first(b1) {
        for &(k, n, v2) in t2.with_first(b2) {
            let v12 = sign * h * v1 * v2;
            for &(q, p, v3) in t3.with_first(b3) {
                out[at(m as usize, n as usize, p as usize)] +=
                    v12 * v3 * r[at(i as usize, k as usize, q as usize)];
            }
        }
    }
}
