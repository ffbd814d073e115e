//! Fixed-step RK4 and adaptive Dormand–Prince integration of the real
//! system, with invariant monitors evaluated on sampled states.

use crate::convert::{energy, min_eigenvalue};
use crate::error::{Error, Result};
use crate::field::FieldSpec;
use crate::state::BlochState;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Method {
    Rk4 { dt: f64 },
    Rk45 { rtol: f64, atol: f64, dt_init: f64 },
}

#[derive(Clone, Copy, Debug)]
pub struct IntegrationConfig {
    pub method: Method,
    pub t0: f64,
    pub t1: f64,
    /// Record every k-th step (the initial and final states are always kept).
    pub sample_every: usize,
}

impl IntegrationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.t1 > self.t0) {
            return Err(Error::BadTimeSpan {
                t0: self.t0,
                t1: self.t1,
            });
        }
        match self.method {
            Method::Rk4 { dt } => {
                if !(dt > 0.0) {
                    return Err(Error::BadIntegrationConfig(format!(
                        "dt = {dt} must be positive"
                    )));
                }
            }
            Method::Rk45 {
                rtol,
                atol,
                dt_init,
            } => {
                if !(rtol > 0.0 && atol > 0.0 && dt_init > 0.0) {
                    return Err(Error::BadIntegrationConfig(format!(
                        "rtol = {rtol}, atol = {atol}, dt_init = {dt_init} must all be positive"
                    )));
                }
            }
        }
        if self.sample_every == 0 {
            return Err(Error::BadIntegrationConfig(
                "sample_every must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// A named scalar evaluated on sampled states; monitors read the state and
/// never mutate it.
pub struct Monitor {
    pub name: String,
    func: Box<dyn Fn(&BlochState, f64) -> f64>,
}

impl Monitor {
    pub fn new(name: impl Into<String>, func: impl Fn(&BlochState, f64) -> f64 + 'static) -> Self {
        Monitor {
            name: name.into(),
            func: Box::new(func),
        }
    }

    pub fn eval(&self, state: &BlochState, t: f64) -> f64 {
        (self.func)(state, t)
    }
}

/// The standard monitor set: generalized Bloch length, purity, energy under
/// the driving field, and the smallest eigenvalue of the reconstructed
/// density matrix.
pub fn standard_monitors(field: &FieldSpec) -> Vec<Monitor> {
    let field_for_energy = field.clone();
    vec![
        Monitor::new("bloch_length", |s, _| s.bloch_length()),
        Monitor::new("purity", |s, _| s.purity()),
        Monitor::new("energy", move |s, t| energy(s, &field_for_energy, t)),
        Monitor::new("min_eig", |s, _| min_eigenvalue(s)),
    ]
}

/// Sampled times, states and monitor values of one integration run.
#[derive(Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<BlochState>,
    pub monitors: Vec<(String, Vec<f64>)>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn monitor(&self, name: &str) -> Option<&[f64]> {
        self.monitors
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_slice())
    }

    /// Peak-to-peak excursion of one monitor over the run.
    pub fn monitor_drift(&self, name: &str) -> Option<f64> {
        let values = self.monitor(name)?;
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Some(hi - lo)
    }
}

/// Number of fixed steps and the uniform step landing exactly on t1.
pub fn fixed_step_grid(t0: f64, t1: f64, dt: f64) -> Result<(usize, f64)> {
    if !(t1 > t0) {
        return Err(Error::BadTimeSpan { t0, t1 });
    }
    if !(dt > 0.0) {
        return Err(Error::BadIntegrationConfig(format!(
            "dt = {dt} must be positive"
        )));
    }
    let steps = ((t1 - t0) / dt).round().max(1.0) as usize;
    Ok((steps, (t1 - t0) / steps as f64))
}

fn check_finite(y: &[f64], t: f64) -> Result<()> {
    if y.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite { t })
    }
}

/// Integrates dR/dt = rhs(R, t) from the initial state, recording samples
/// and monitor values. Fixed-step runs are bitwise deterministic.
pub fn integrate<F>(
    mut rhs: F,
    initial: &BlochState,
    cfg: &IntegrationConfig,
    monitors: &[Monitor],
) -> Result<Trajectory>
where
    F: FnMut(&[f64], f64, &mut [f64]),
{
    cfg.validate()?;
    let spec = initial.spec().clone();
    let len = spec.state_len();

    let mut traj = Trajectory {
        times: Vec::new(),
        states: Vec::new(),
        monitors: monitors
            .iter()
            .map(|m| (m.name.clone(), Vec::new()))
            .collect(),
    };
    let record = |traj: &mut Trajectory, y: &[f64], t: f64| {
        let state = BlochState::from_raw(&spec, y.to_vec());
        for (m, (_, values)) in monitors.iter().zip(traj.monitors.iter_mut()) {
            values.push(m.eval(&state, t));
        }
        traj.times.push(t);
        traj.states.push(state);
    };

    let mut y = initial.components().to_vec();
    record(&mut traj, &y, cfg.t0);

    match cfg.method {
        Method::Rk4 { dt } => {
            let (steps, dt) = fixed_step_grid(cfg.t0, cfg.t1, dt)?;
            let mut stage = Rk4Buffers::new(len);
            for step in 1..=steps {
                let t = cfg.t0 + (step - 1) as f64 * dt;
                stage.step(&mut rhs, &mut y, t, dt);
                check_finite(&y, t + dt)?;
                if step % cfg.sample_every == 0 || step == steps {
                    record(&mut traj, &y, cfg.t0 + step as f64 * dt);
                }
            }
        }
        Method::Rk45 {
            rtol,
            atol,
            dt_init,
        } => {
            let mut t = cfg.t0;
            let mut dt = dt_init.min(cfg.t1 - cfg.t0);
            let mut accepted: usize = 0;
            let mut stage = DormandPrince::new(len);
            let min_dt = 1e-14 * (cfg.t1 - cfg.t0);
            while t < cfg.t1 {
                let trial_dt = dt.min(cfg.t1 - t);
                let err = stage.attempt(&mut rhs, &y, t, trial_dt, rtol, atol);
                if !err.is_finite() {
                    return Err(Error::NonFinite { t });
                }
                if err <= 1.0 {
                    y.copy_from_slice(&stage.y_next);
                    t += trial_dt;
                    check_finite(&y, t)?;
                    accepted += 1;
                    if accepted % cfg.sample_every == 0 || t >= cfg.t1 {
                        record(&mut traj, &y, t);
                    }
                }
                let factor = if err > 0.0 { 0.9 * err.powf(-0.2) } else { 5.0 };
                dt = trial_dt * factor.clamp(0.2, 5.0);
                if dt < min_dt {
                    return Err(Error::StepUnderflow { t });
                }
            }
        }
    }
    Ok(traj)
}

struct Rk4Buffers {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl Rk4Buffers {
    fn new(len: usize) -> Self {
        Rk4Buffers {
            k1: vec![0.0; len],
            k2: vec![0.0; len],
            k3: vec![0.0; len],
            k4: vec![0.0; len],
            tmp: vec![0.0; len],
        }
    }

    fn step<F>(&mut self, rhs: &mut F, y: &mut [f64], t: f64, dt: f64)
    where
        F: FnMut(&[f64], f64, &mut [f64]),
    {
        rhs(y, t, &mut self.k1);
        for i in 0..y.len() {
            self.tmp[i] = y[i] + 0.5 * dt * self.k1[i];
        }
        rhs(&self.tmp, t + 0.5 * dt, &mut self.k2);
        for i in 0..y.len() {
            self.tmp[i] = y[i] + 0.5 * dt * self.k2[i];
        }
        rhs(&self.tmp, t + 0.5 * dt, &mut self.k3);
        for i in 0..y.len() {
            self.tmp[i] = y[i] + dt * self.k3[i];
        }
        rhs(&self.tmp, t + dt, &mut self.k4);
        for i in 0..y.len() {
            y[i] += dt / 6.0 * (self.k1[i] + 2.0 * self.k2[i] + 2.0 * self.k3[i] + self.k4[i]);
        }
    }
}

/// Dormand–Prince 5(4) embedded pair.
struct DormandPrince {
    k: [Vec<f64>; 7],
    tmp: Vec<f64>,
    y_next: Vec<f64>,
}

const DP_A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const DP_C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const DP_B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const DP_B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

impl DormandPrince {
    fn new(len: usize) -> Self {
        DormandPrince {
            k: std::array::from_fn(|_| vec![0.0; len]),
            tmp: vec![0.0; len],
            y_next: vec![0.0; len],
        }
    }

    /// One trial step; fills `y_next` with the 5th-order result and returns
    /// the scaled error norm (accept when ≤ 1).
    fn attempt<F>(&mut self, rhs: &mut F, y: &[f64], t: f64, dt: f64, rtol: f64, atol: f64) -> f64
    where
        F: FnMut(&[f64], f64, &mut [f64]),
    {
        let len = y.len();
        rhs(y, t, &mut self.k[0]);
        for s in 1..7 {
            for i in 0..len {
                let mut acc = 0.0;
                for (j, kj) in self.k.iter().enumerate().take(s) {
                    let a = DP_A[s - 1][j];
                    if a != 0.0 {
                        acc += a * kj[i];
                    }
                }
                self.tmp[i] = y[i] + dt * acc;
            }
            let ts = t + DP_C[s - 1] * dt;
            let (_, tail) = self.k.split_at_mut(s);
            rhs(&self.tmp, ts, &mut tail[0]);
        }
        let mut err_sq = 0.0;
        for i in 0..len {
            let mut y5 = y[i];
            let mut y4 = y[i];
            for s in 0..7 {
                y5 += dt * DP_B5[s] * self.k[s][i];
                y4 += dt * DP_B4[s] * self.k[s][i];
            }
            self.y_next[i] = y5;
            let scale = atol + rtol * y[i].abs().max(y5.abs());
            let e = (y5 - y4) / scale;
            err_sq += e * e;
        }
        (err_sq / len as f64).sqrt()
    }
}
