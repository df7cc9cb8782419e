//! Three-step field-free write, readout and recovery-time measurement.
//!
//! 1. SOT current on, gate at 0 V: a chiral texture forms.
//! 2. Current held, gate at +/-V: the anisotropy gradient is switched on.
//! 3. Current off, gate held: the texture collapses into the uniform state
//!    favoured by the stronger-anisotropy side.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::dynamics::{relax, Integrator, Mode, RelaxCriteria, SimState, Tolerances};
use crate::error::{Error, Result};
use crate::field::total_energy;
use crate::materials::{anisotropy_map, DriveSchedule, DriveSegment, MaterialParams, VcmaProfile};
use crate::mesh::{mean_vector, Mesh, RegionMask, ScalarField, VectorField};
use crate::texture::{classify, TextureClass, Thresholds};
use crate::vec3::Vec3;

/// Sign of the gate voltage during steps 2 and 3.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Polarity {
    #[serde(rename = "+")]
    Positive,
    #[serde(rename = "-")]
    Negative,
}

impl Polarity {
    pub fn sign(self) -> f64 {
        match self {
            Polarity::Positive => 1.0,
            Polarity::Negative => -1.0,
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "+" | "+V" | "pos" | "positive" => Ok(Polarity::Positive),
            "-" | "-V" | "neg" | "negative" => Ok(Polarity::Negative),
            other => Err(Error::Parse(format!("unknown polarity '{other}' (use + or -)"))),
        }
    }
}

impl fmt::Display for Polarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Polarity::Positive => "+",
            Polarity::Negative => "-",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WriteTiming {
    /// Step 1 duration (s).
    pub t1: f64,
    /// Step 2 duration (s).
    pub t2: f64,
    /// Step 3 duration (s).
    pub t3: f64,
    /// SOT charge current density (A/m^2).
    pub current_density: f64,
    pub current_dir: Vec3,
    /// Gate voltage magnitude (V).
    pub voltage: f64,
    /// Trace sampling interval (s).
    pub sample_interval: f64,
}

impl Default for WriteTiming {
    fn default() -> Self {
        Self {
            t1: 2e-9,
            t2: 1e-9,
            t3: 5e-9,
            current_density: 1.5e12,
            current_dir: Vec3::X,
            voltage: 0.165,
            sample_interval: 1e-12,
        }
    }
}

impl WriteTiming {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("protocol.t1", self.t1),
            ("protocol.t2", self.t2),
            ("protocol.t3", self.t3),
            ("protocol.sample_interval", self.sample_interval),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::validation(name, format!("must be > 0 (got {v})")));
            }
        }
        self.schedule(Polarity::Positive).validate()
    }

    /// The three drive segments for the given gate polarity.
    pub fn schedule(&self, polarity: Polarity) -> DriveSchedule {
        let v = polarity.sign() * self.voltage;
        let seg = |duration, current_density, voltage| DriveSegment {
            duration,
            current_density,
            current_dir: self.current_dir,
            voltage,
        };
        DriveSchedule {
            segments: vec![
                seg(self.t1, self.current_density, 0.0),
                seg(self.t2, self.current_density, v),
                seg(self.t3, 0.0, v),
            ],
        }
    }

    /// Time at which the current is removed.
    pub fn release_time(&self) -> f64 {
        self.t1 + self.t2
    }
}

/// One row of a time trace.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceSample {
    /// Seconds.
    pub t: f64,
    pub m: Vec3,
    /// Current density during the step that ended here (A/m^2).
    pub current_density: f64,
    /// Gate voltage during the step that ended here (V).
    pub voltage: f64,
    /// Total energy (J).
    pub energy: f64,
}

/// Result of integrating a drive schedule.
#[derive(Clone, Debug)]
pub struct ScheduleRun {
    pub trace: Vec<TraceSample>,
    pub state: SimState,
    /// State at the start of each segment after the first, and at the end.
    pub checkpoints: Vec<SimState>,
}

fn sample(state: &SimState, p: &MaterialParams) -> TraceSample {
    TraceSample {
        t: state.t,
        m: mean_vector(&state.m, None).expect("mesh has cells"),
        current_density: state.drive.current_density,
        voltage: state.drive.voltage,
        energy: total_energy(&state.m, &state.k_map, p).total,
    }
}

/// Integrates the full LLG equation through `schedule`, sampling the mean
/// magnetization every `sample_interval` and at each segment end.
pub fn run_schedule(
    initial: &SimState,
    schedule: &DriveSchedule,
    p: &MaterialParams,
    vcma: &VcmaProfile,
    tolerances: Tolerances,
    sample_interval: f64,
) -> Result<ScheduleRun> {
    let mesh = initial.m.mesh;
    let mut state = initial.clone();
    let mut integ = Integrator::new(tolerances, Mode::Full, mesh.len());
    let mut trace = vec![sample(&state, p)];
    let mut checkpoints = Vec::with_capacity(schedule.segments.len());
    for seg in &schedule.segments {
        state.drive = *seg;
        state.k_map = anisotropy_map(p, vcma, mesh, seg.voltage).k;
        let t_start = state.t;
        let t_end = t_start + seg.duration;
        let n = ((seg.duration / sample_interval).round() as usize).max(1);
        for k in 1..=n {
            let target = if k == n {
                t_end
            } else {
                t_start + k as f64 * sample_interval
            };
            integ.advance_to(&mut state, p, target, |_| {})?;
            trace.push(sample(&state, p));
        }
        checkpoints.push(state.clone());
    }
    Ok(ScheduleRun {
        trace,
        state,
        checkpoints,
    })
}

/// Relaxed uniform state of the given polarity at zero gate voltage.
pub fn relaxed_uniform(
    mesh: Mesh,
    p: &MaterialParams,
    vcma: &VcmaProfile,
    up: bool,
    tolerances: Tolerances,
) -> Result<SimState> {
    let tilt = 5f64.to_radians();
    let mz = if up { tilt.cos() } else { -tilt.cos() };
    let m = VectorField::uniform(mesh, Vec3::new(tilt.sin(), 0.0, mz));
    let k = anisotropy_map(p, vcma, mesh, 0.0).k;
    let out = relax(&SimState::new(m, k), p, RelaxCriteria::default(), tolerances)?;
    let mut state = out.state;
    state.t = 0.0;
    Ok(state)
}

#[derive(Clone, Debug)]
pub struct WriteResult {
    pub polarity: Polarity,
    pub trace: Vec<TraceSample>,
    pub final_state: SimState,
    pub final_class: TextureClass,
    /// Polarity of the stronger-anisotropy side at the moment of release;
    /// `None` without an anisotropy contrast or without a texture to select.
    pub selected: Option<i8>,
    pub switched: bool,
    pub recovery_time: Option<f64>,
    pub release_time: f64,
}

impl WriteResult {
    /// Final uniform polarity, if any.
    pub fn final_polarity(&self) -> Option<i8> {
        self.final_class.kind.polarity()
    }
}

/// Cells whose anisotropy exceeds the layer mean.
fn stronger_region(k: &ScalarField) -> Option<RegionMask> {
    let mean = k.mean();
    let cut = mean + 1e-9 * mean.abs().max(1.0);
    let mask = RegionMask::from_fn(k.mesh, |i| k.data[i] > cut);
    (mask.count() > 0).then_some(mask)
}

/// Runs the three-step write from `initial`.
#[allow(clippy::too_many_arguments)]
pub fn write(
    initial: &SimState,
    polarity: Polarity,
    p: &MaterialParams,
    vcma: &VcmaProfile,
    timing: &WriteTiming,
    tolerances: Tolerances,
    thresholds: &Thresholds,
) -> Result<WriteResult> {
    timing.validate()?;
    let schedule = timing.schedule(polarity);
    let mut start = initial.clone();
    start.t = 0.0;
    let run = run_schedule(&start, &schedule, p, vcma, tolerances, timing.sample_interval)?;

    // State at release: end of segment 2.
    let at_release = &run.checkpoints[1];
    let selected = stronger_region(&at_release.k_map).and_then(|mask| {
        let mz = mean_vector(&at_release.m, Some(&mask)).ok()?.z;
        (mz.abs() > 1e-3).then_some(if mz > 0.0 { 1 } else { -1 })
    });

    let final_class = classify(&run.state.m, thresholds);
    let switched = match (final_class.kind.polarity(), selected) {
        (Some(f), Some(s)) => f == s,
        _ => false,
    };
    let release_time = timing.release_time();
    let recovery = recovery_time(&run.trace, release_time, thresholds.uniform)?;
    Ok(WriteResult {
        polarity,
        trace: run.trace,
        final_state: run.state,
        final_class,
        selected,
        switched,
        recovery_time: recovery,
        release_time,
    })
}

/// Time after `release` at which `|<m_z>|` reaches `threshold` and stays there
/// for the rest of the trace.
pub fn recovery_time(trace: &[TraceSample], release: f64, threshold: f64) -> Result<Option<f64>> {
    let tail: Vec<&TraceSample> = trace.iter().filter(|s| s.t >= release).collect();
    if tail.len() < 2 {
        return Err(Error::Trace(format!(
            "trace has no samples after the release at {release:e} s"
        )));
    }
    let mut first_of_run = None;
    for s in &tail {
        if s.m.z.abs() >= threshold {
            first_of_run.get_or_insert(s.t);
        } else {
            first_of_run = None;
        }
    }
    Ok(first_of_run.map(|t| t - release))
}

/// Resistance state of the junction against a +z reference layer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Readout {
    /// Parallel: free layer along the reference.
    P,
    /// Antiparallel.
    AP,
}

/// Reads the free-layer polarity under the pillar.
pub fn readout(state: &SimState, pillar: &RegionMask) -> Result<(Readout, f64)> {
    let mz = mean_vector(&state.m, Some(pillar))?.z;
    if mz.abs() < 0.5 {
        return Err(Error::IndeterminateReadout { mz });
    }
    Ok((if mz > 0.0 { Readout::P } else { Readout::AP }, mz))
}
