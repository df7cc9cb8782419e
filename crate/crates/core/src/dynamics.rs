//! Landau-Lifshitz-Gilbert dynamics with spin-orbit torque.
//!
//! The equation of motion is written in Landau-Lifshitz form
//!
//! ```text
//! dm/dt = -gamma/(1+alpha^2) [ m x B' + alpha m x (m x B') ]
//! B'    = B_eff + a_FL sigma + a_DL (m x sigma)
//! ```
//!
//! with `a_DL = beta_j`, `a_FL = xi beta_j / 2` and spin polarization
//! `sigma = z x j_dir`. Expanding `B'` gives the damping-like torque
//! `-(gamma a_DL)/(1+alpha^2) m x (m x sigma)` and the field-like torque
//! `-(gamma a_FL)/(1+alpha^2) m x sigma`, each with its alpha cross term.
//!
//! Time stepping is Dormand-Prince 5(4) with the magnetization renormalized
//! after each accepted step.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{effective_field_into, energy_of, max_torque};
use crate::materials::{DriveSegment, MaterialParams, HBAR, QE};
use crate::mesh::{ScalarField, VectorField};
use crate::vec3::Vec3;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SotDrive {
    /// Charge current density magnitude (A/m^2).
    pub j: f64,
    /// Unit vector of current flow.
    pub j_dir: Vec3,
    /// Spin polarization direction `z x j_dir`.
    pub sigma: Vec3,
    /// Torque amplitude `hbar |J| P / (2 e Ms t_FL)` (T).
    pub beta_j: f64,
    /// Field-like amplitude `xi beta_j / 2` (T).
    pub a_fl: f64,
}

impl SotDrive {
    pub fn none() -> Self {
        Self {
            j: 0.0,
            j_dir: Vec3::X,
            sigma: Vec3::Y,
            beta_j: 0.0,
            a_fl: 0.0,
        }
    }

    /// Drive for current density `j` (sign flips the flow direction) along `j_dir`
    /// in a free layer of thickness `t_fl`.
    pub fn new(j: f64, j_dir: Vec3, p: &MaterialParams, t_fl: f64) -> Self {
        if j == 0.0 {
            return Self::none();
        }
        let dir = if j < 0.0 { -j_dir } else { j_dir }.normalized();
        let beta_j = HBAR * j.abs() * p.pol / (2.0 * QE * p.ms * t_fl);
        Self {
            j: j.abs(),
            j_dir: dir,
            sigma: Vec3::Z.cross(dir),
            beta_j,
            a_fl: p.sot_xi * beta_j / 2.0,
        }
    }

    pub fn from_segment(seg: &DriveSegment, p: &MaterialParams, t_fl: f64) -> Self {
        Self::new(seg.current_density, seg.current_dir, p, t_fl)
    }

    pub fn is_active(&self) -> bool {
        self.beta_j != 0.0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimState {
    pub t: f64,
    pub m: VectorField,
    pub drive: DriveSegment,
    pub k_map: ScalarField,
}

impl SimState {
    /// State at `t = 0` with no current and zero gate voltage.
    pub fn new(m: VectorField, k_map: ScalarField) -> Self {
        Self {
            t: 0.0,
            m,
            drive: DriveSegment {
                duration: f64::INFINITY,
                current_density: 0.0,
                current_dir: Vec3::X,
                voltage: 0.0,
            },
            k_map,
        }
    }

    pub fn energy(&self, p: &MaterialParams) -> crate::field::Energy {
        crate::field::total_energy(&self.m, &self.k_map, p)
    }
}

/// Step-size controller settings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Maximum embedded error estimate per step (max-norm over cells).
    pub tol: f64,
    /// Maximum per-cell change of m in one step.
    pub max_dm: f64,
    pub dt_init: f64,
    pub dt_min: f64,
    pub dt_max: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            tol: 1e-5,
            max_dm: 0.01,
            dt_init: 1e-14,
            dt_min: 1e-18,
            dt_max: 1e-11,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        let checks = [
            ("integrator.tol", self.tol),
            ("integrator.max_dm", self.max_dm),
            ("integrator.dt_init", self.dt_init),
            ("integrator.dt_min", self.dt_min),
            ("integrator.dt_max", self.dt_max),
        ];
        for (name, v) in checks {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::validation(name, format!("must be > 0 (got {v})")));
            }
        }
        if self.dt_min > self.dt_max {
            return Err(Error::validation(
                "integrator.dt_min",
                "must not exceed integrator.dt_max",
            ));
        }
        Ok(())
    }
}

/// Which terms of the equation of motion are integrated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Full LLG with precession and spin-orbit torque.
    Full,
    /// Damping term only; used for energy minimization.
    DampingOnly,
}

/// Right-hand side `dm/dt` for each cell of `state` (1/s).
pub fn llg_rhs(state: &SimState, p: &MaterialParams) -> VectorField {
    let mesh = state.m.mesh;
    let sot = SotDrive::from_segment(&state.drive, p, mesh.dz);
    let mut b = vec![Vec3::ZERO; mesh.len()];
    let mut out = VectorField::zeros(mesh);
    rhs_into(&state.m.data, state, p, &sot, Mode::Full, &mut b, &mut out.data);
    out
}

#[allow(clippy::too_many_arguments)]
fn rhs_into(
    m: &[Vec3],
    state: &SimState,
    p: &MaterialParams,
    sot: &SotDrive,
    mode: Mode,
    b: &mut [Vec3],
    out: &mut [Vec3],
) {
    effective_field_into(&state.m.mesh, m, &state.k_map.data, p, b);
    let pref = -p.gamma / (1.0 + p.alpha * p.alpha);
    let alpha = p.alpha;
    match mode {
        Mode::Full => {
            for ((o, &mi), &bi) in out.iter_mut().zip(m).zip(b.iter()) {
                let mut bp = bi;
                if sot.is_active() {
                    bp += sot.sigma * sot.a_fl + mi.cross(sot.sigma) * sot.beta_j;
                }
                let mxb = mi.cross(bp);
                *o = (mxb + mi.cross(mxb) * alpha) * pref;
            }
        }
        Mode::DampingOnly => {
            for ((o, &mi), &bi) in out.iter_mut().zip(m).zip(b.iter()) {
                *o = mi.cross(mi.cross(bi)) * (pref * alpha);
            }
        }
    }
}

// Dormand-Prince 5(4) tableau.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Outcome of one accepted step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepInfo {
    pub dt: f64,
    pub error: f64,
    pub max_dm: f64,
    pub rejected: usize,
}

/// Adaptive integrator with reusable stage buffers.
#[derive(Clone, Debug)]
pub struct Integrator {
    pub tolerances: Tolerances,
    pub mode: Mode,
    dt: f64,
    k: [Vec<Vec3>; 7],
    y: Vec<Vec3>,
    b: Vec<Vec3>,
}

impl Integrator {
    pub fn new(tolerances: Tolerances, mode: Mode, n: usize) -> Self {
        Self {
            tolerances,
            mode,
            dt: tolerances.dt_init,
            k: std::array::from_fn(|_| vec![Vec3::ZERO; n]),
            y: vec![Vec3::ZERO; n],
            b: vec![Vec3::ZERO; n],
        }
    }

    /// Proposed size of the next step.
    pub fn next_dt(&self) -> f64 {
        self.dt
    }

    fn stage(&mut self, state: &SimState, p: &MaterialParams, sot: &SotDrive, dt: f64, coeffs: &[(usize, f64)], out: usize) {
        let m = &state.m.data;
        for (i, y) in self.y.iter_mut().enumerate() {
            let mut acc = m[i];
            for &(s, a) in coeffs {
                acc += self.k[s][i] * (a * dt);
            }
            *y = acc;
        }
        let mut k_out = std::mem::take(&mut self.k[out]);
        rhs_into(&self.y, state, p, sot, self.mode, &mut self.b, &mut k_out);
        self.k[out] = k_out;
    }

    /// Advances `state` by one accepted step that does not pass `t_limit`.
    pub fn step(&mut self, state: &mut SimState, p: &MaterialParams, t_limit: f64) -> Result<StepInfo> {
        let sot = SotDrive::from_segment(&state.drive, p, state.m.mesh.dz);
        let n = state.m.data.len();
        let tol = self.tolerances;

        let mut k0 = std::mem::take(&mut self.k[0]);
        rhs_into(&state.m.data, state, p, &sot, self.mode, &mut self.b, &mut k0);
        self.k[0] = k0;
        let rate = self.k[0].iter().map(|v| v.norm()).fold(0.0, f64::max);

        let mut rejected = 0;
        loop {
            let mut dt = self.dt.min(tol.dt_max);
            if rate > 0.0 {
                dt = dt.min(tol.max_dm / rate);
            }
            let remaining = t_limit - state.t;
            let clipped = remaining < dt;
            if clipped {
                dt = remaining;
            }
            if !(dt >= tol.dt_min) && !clipped {
                return Err(Error::Stiffness {
                    t: state.t,
                    dt,
                    diagnostic: format!(
                        "max |dm/dt| = {rate:e} 1/s after {rejected} rejected steps"
                    ),
                });
            }
            if dt <= 0.0 {
                return Err(Error::Trace(format!(
                    "step requested with t_limit {t_limit:e} <= t {:e}",
                    state.t
                )));
            }

            self.stage(state, p, &sot, dt, &[(0, A21)], 1);
            self.stage(state, p, &sot, dt, &[(0, A31), (1, A32)], 2);
            self.stage(state, p, &sot, dt, &[(0, A41), (1, A42), (2, A43)], 3);
            self.stage(state, p, &sot, dt, &[(0, A51), (1, A52), (2, A53), (3, A54)], 4);
            self.stage(state, p, &sot, dt, &[(0, A61), (1, A62), (2, A63), (3, A64), (4, A65)], 5);
            // Fifth-order solution, then the FSAL stage for the error estimate.
            self.stage(state, p, &sot, dt, &[(0, B1), (2, B3), (3, B4), (4, B5), (5, B6)], 6);

            let mut err = 0.0f64;
            let mut dm_max = 0.0f64;
            for i in 0..n {
                let e = self.k[0][i] * E1
                    + self.k[2][i] * E3
                    + self.k[3][i] * E4
                    + self.k[4][i] * E5
                    + self.k[5][i] * E6
                    + self.k[6][i] * E7;
                err = err.max(e.norm() * dt);
                dm_max = dm_max.max((self.y[i] - state.m.data[i]).norm());
            }
            if !err.is_finite() {
                err = f64::INFINITY;
            }

            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * (tol.tol / err).powf(0.2)).clamp(0.2, 5.0)
            };

            if err <= tol.tol && dm_max <= tol.max_dm * 1.000_001 {
                for (m, y) in state.m.data.iter_mut().zip(&self.y) {
                    *m = y.normalized();
                }
                state.t = if clipped { t_limit } else { state.t + dt };
                if !clipped || dt * factor > self.dt {
                    self.dt = (dt * factor).min(tol.dt_max);
                }
                return Ok(StepInfo {
                    dt,
                    error: err,
                    max_dm: dm_max,
                    rejected,
                });
            }
            rejected += 1;
            self.dt = dt * factor.min(0.9);
            if dm_max > tol.max_dm * 1.000_001 {
                self.dt = self.dt.min(dt * 0.5);
            }
        }
    }

    /// Integrates `state` to `t_end`, calling `on_step` after every accepted step.
    pub fn advance_to(
        &mut self,
        state: &mut SimState,
        p: &MaterialParams,
        t_end: f64,
        mut on_step: impl FnMut(&SimState),
    ) -> Result<()> {
        while state.t < t_end {
            self.step(state, p, t_end)?;
            on_step(state);
        }
        Ok(())
    }
}

/// One adaptive full-LLG step with the given tolerances.
pub fn step(state: &SimState, p: &MaterialParams, tolerances: Tolerances) -> Result<SimState> {
    let mut next = state.clone();
    let mut integ = Integrator::new(tolerances, Mode::Full, state.m.len());
    integ.step(&mut next, p, f64::INFINITY)?;
    Ok(next)
}

/// Stopping rule for [`relax`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RelaxCriteria {
    /// Converged when the largest `|m x B_eff|` drops below this (T).
    pub torque_tol: f64,
    /// Simulated-time budget (s).
    pub max_time: f64,
}

impl Default for RelaxCriteria {
    fn default() -> Self {
        Self {
            torque_tol: 1e-4,
            max_time: 50e-9,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RelaxOutcome {
    pub state: SimState,
    pub converged: bool,
    pub max_torque: f64,
    pub energy: f64,
    pub steps: usize,
    /// Total energy after each accepted step, starting with the initial state.
    pub energy_history: Vec<f64>,
}

/// Damping-only descent to a local energy minimum.
///
/// Steps that would raise the total energy are rejected and retried with a
/// smaller step, so the energy history is non-increasing.
pub fn relax(
    state: &SimState,
    p: &MaterialParams,
    stop: RelaxCriteria,
    tolerances: Tolerances,
) -> Result<RelaxOutcome> {
    if state.drive.current_density != 0.0 {
        return Err(Error::validation(
            "drive.current_density",
            "relaxation requires zero current",
        ));
    }
    let mesh = state.m.mesh;
    let mut s = state.clone();
    let t0 = s.t;
    let mut integ = Integrator::new(tolerances, Mode::DampingOnly, mesh.len());
    let mut b = vec![Vec3::ZERO; mesh.len()];

    let torque_of = |s: &SimState, b: &mut Vec<Vec3>| {
        effective_field_into(&mesh, &s.m.data, &s.k_map.data, p, b);
        max_torque(&s.m.data, b)
    };
    let energy = |s: &SimState| energy_of(&mesh, &s.m.data, &s.k_map.data, p).total;

    let mut e = energy(&s);
    let mut history = vec![e];
    let mut torque = torque_of(&s, &mut b);
    let mut steps = 0;
    let mut stalled = 0;
    while torque >= stop.torque_tol && s.t - t0 < stop.max_time {
        let before = s.clone();
        integ.step(&mut s, p, t0 + stop.max_time)?;
        let e_new = energy(&s);
        if e_new > e + 1e-12 * e.abs() {
            s = before;
            integ.dt = (integ.dt * 0.5).max(tolerances.dt_min);
            stalled += 1;
            if stalled > 60 {
                break;
            }
            continue;
        }
        stalled = 0;
        e = e_new;
        history.push(e);
        steps += 1;
        torque = torque_of(&s, &mut b);
    }
    Ok(RelaxOutcome {
        converged: torque < stop.torque_tol,
        max_torque: torque,
        energy: e,
        steps,
        energy_history: history,
        state: s,
    })
}
