//! Parameter sweeps: phase diagram, DMI window and gradient curve.
//!
//! Every point is computed independently from the shared [`Setup`] and a seed
//! derived from its index, so the output does not depend on the worker count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{relax, RelaxCriteria, SimState, Tolerances};
use crate::error::{Error, Result};
use crate::materials::{anisotropy_map, gradient_magnitude, MaterialParams, VcmaProfile};
use crate::mesh::{Mesh, VectorField};
use crate::protocol::{relaxed_uniform, write, Polarity, WriteTiming};
use crate::texture::{classify, TextureKind, Thresholds};
use crate::vec3::Vec3;

/// Everything a single run needs.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Setup {
    pub mesh: Mesh,
    pub material: MaterialParams,
    pub vcma: VcmaProfile,
    pub timing: WriteTiming,
    pub tolerances: Tolerances,
    pub thresholds: Thresholds,
    pub relax: RelaxCriteria,
}

impl Setup {
    pub fn validate(&self) -> Result<()> {
        self.mesh.validate()?;
        self.material.validate()?;
        self.vcma.validate(&self.mesh)?;
        self.timing.validate()?;
        self.tolerances.validate()?;
        Ok(())
    }

    /// Copy with one parameter replaced.
    pub fn with(&self, param: SweepParam, value: f64) -> Setup {
        let mut s = self.clone();
        match param {
            SweepParam::Ku0 => s.material.ku0 = value,
            SweepParam::D => s.material.dind = value,
            SweepParam::Vb => s.timing.voltage = value,
            SweepParam::Beta => s.vcma.beta = value,
            SweepParam::J => s.timing.current_density = value,
        }
        s
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepParam {
    Ku0,
    D,
    Vb,
    #[serde(rename = "beta")]
    Beta,
    J,
}

impl SweepParam {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepParam::Ku0 => "Ku0",
            SweepParam::D => "D",
            SweepParam::Vb => "Vb",
            SweepParam::Beta => "beta",
            SweepParam::J => "J",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    #[default]
    Linear,
    Log,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    pub param: SweepParam,
    pub min: f64,
    pub max: f64,
    pub count: usize,
    #[serde(default)]
    pub scale: Scale,
}

impl SweepAxis {
    pub fn linear(param: SweepParam, min: f64, max: f64, count: usize) -> Self {
        Self {
            param,
            min,
            max,
            count,
            scale: Scale::Linear,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let field = format!("sweep.{}", self.param.as_str());
        if self.count < 2 {
            return Err(Error::validation(field, "count must be at least 2"));
        }
        if !self.min.is_finite() || !self.max.is_finite() || self.max <= self.min {
            return Err(Error::validation(field, "requires finite min < max"));
        }
        if self.scale == Scale::Log && self.min <= 0.0 {
            return Err(Error::validation(field, "log scale requires min > 0"));
        }
        Ok(())
    }

    /// Grid values, `min` and `max` included exactly.
    pub fn values(&self) -> Result<Vec<f64>> {
        self.validate()?;
        let n = self.count - 1;
        Ok((0..self.count)
            .map(|i| {
                if i == n {
                    return self.max;
                }
                let f = i as f64 / n as f64;
                match self.scale {
                    Scale::Linear => self.min + (self.max - self.min) * f,
                    Scale::Log => self.min * (self.max / self.min).powf(f),
                }
            })
            .collect())
    }
}

/// Maps `f` over `items` on a pool of `workers` threads, keeping input order.
/// The first error in input order is returned.
pub fn run_parallel<I, T, F>(items: &[I], workers: usize, f: F) -> Result<Vec<T>>
where
    I: Sync,
    T: Send,
    F: Fn(usize, &I) -> Result<T> + Sync + Send,
{
    if workers == 0 {
        return Err(Error::validation("sweep.workers", "must be at least 1"));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::validation("sweep.workers", e.to_string()))?;
    let out: Vec<Result<T>> = pool.install(|| {
        items
            .par_iter()
            .enumerate()
            .map(|(i, item)| f(i, item))
            .collect()
    });
    out.into_iter().collect()
}

/// Random unit field from a per-point stream of `seed`.
pub fn random_state(mesh: Mesh, seed: u64, stream: u64) -> VectorField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    VectorField::from_fn(mesh, |_| loop {
        let v = Vec3::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        let n = v.norm();
        if n > 0.1 && n <= 1.0 {
            break v / n;
        }
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Start {
    Tilted,
    Random,
}

impl Start {
    pub fn as_str(self) -> &'static str {
        match self {
            Start::Tilted => "tilted",
            Start::Random => "random",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub ku0: f64,
    pub d: f64,
    pub kind: TextureKind,
    pub mz: f64,
    pub charge: f64,
    /// Total energy of the kept state (J).
    pub energy: f64,
    pub converged: bool,
    pub start: Start,
}

/// Relaxes one `(Ku0, D)` point from a 5 degree tilt and from a random state
/// and keeps the lower-energy result.
pub fn phase_point(setup: &Setup, ku0: f64, d: f64, seed: u64, stream: u64) -> Result<PhasePoint> {
    let s = setup.with(SweepParam::Ku0, ku0).with(SweepParam::D, d);
    s.material.validate()?;
    let k = anisotropy_map(&s.material, &s.vcma, s.mesh, 0.0).k;
    let tilt = 5f64.to_radians();
    let starts = [
        (
            Start::Tilted,
            VectorField::uniform(s.mesh, Vec3::new(tilt.sin(), 0.0, tilt.cos())),
        ),
        (Start::Random, random_state(s.mesh, seed, stream)),
    ];
    let mut best: Option<(Start, crate::dynamics::RelaxOutcome)> = None;
    for (start, m0) in starts {
        let out = match relax(&SimState::new(m0, k.clone()), &s.material, s.relax, s.tolerances) {
            Ok(out) => out,
            Err(e) => {
                log::warn!("Ku0={ku0:e} D={d:e} {} start: {e}", start.as_str());
                continue;
            }
        };
        if best.as_ref().is_none_or(|(_, b)| out.energy < b.energy) {
            best = Some((start, out));
        }
    }
    let Some((start, out)) = best else {
        return Ok(PhasePoint {
            ku0,
            d,
            kind: TextureKind::Indeterminate,
            mz: f64::NAN,
            charge: f64::NAN,
            energy: f64::NAN,
            converged: false,
            start: Start::Tilted,
        });
    };
    let class = classify(&out.state.m, &s.thresholds);
    let kind = if out.converged {
        class.kind
    } else {
        log::warn!("Ku0={ku0:e} D={d:e}: relaxation did not converge (torque {:e} T)", out.max_torque);
        TextureKind::Indeterminate
    };
    Ok(PhasePoint {
        ku0,
        d,
        kind,
        mz: class.mz,
        charge: class.charge,
        energy: out.energy,
        converged: out.converged,
        start,
    })
}

/// Phase diagram over a `(Ku0, D)` grid, sorted by `Ku0` then `D`.
pub fn phase_diagram(
    setup: &Setup,
    ku0: &SweepAxis,
    d: &SweepAxis,
    seed: u64,
    workers: usize,
) -> Result<Vec<PhasePoint>> {
    let grid: Vec<(f64, f64)> = ku0
        .values()?
        .into_iter()
        .flat_map(|k| d.values().map(|ds| ds.into_iter().map(move |dv| (k, dv))))
        .flatten()
        .collect();
    run_parallel(&grid, workers, |i, &(k, dv)| phase_point(setup, k, dv, seed, i as u64))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WriteOutcome {
    pub polarity: Polarity,
    pub start_up: bool,
    pub kind: TextureKind,
    pub mz: f64,
    pub selected: Option<i8>,
    pub switched: bool,
    pub recovery_time: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowPoint {
    pub d: f64,
    /// `+V` from up, `+V` from down, `-V` from up, `-V` from down.
    pub runs: Vec<WriteOutcome>,
    pub deterministic: bool,
}

/// Runs the four-write matrix `{+V, -V} x {up, down}` for one setup.
pub fn write_matrix(setup: &Setup) -> Result<Vec<WriteOutcome>> {
    let s = setup;
    let mut starts = Vec::with_capacity(2);
    for up in [true, false] {
        starts.push(relaxed_uniform(s.mesh, &s.material, &s.vcma, up, s.tolerances)?);
    }
    let mut runs = Vec::with_capacity(4);
    for polarity in [Polarity::Positive, Polarity::Negative] {
        for (start, up) in starts.iter().zip([true, false]) {
            let r = write(start, polarity, &s.material, &s.vcma, &s.timing, s.tolerances, &s.thresholds)?;
            runs.push(WriteOutcome {
                polarity,
                start_up: up,
                kind: r.final_class.kind,
                mz: r.final_class.mz,
                selected: r.selected,
                switched: r.switched,
                recovery_time: r.recovery_time,
            });
        }
    }
    Ok(runs)
}

/// A write matrix is deterministic when every run switches, each voltage
/// polarity ends in one state regardless of the start, and the two voltage
/// polarities end in opposite states.
pub fn is_deterministic(runs: &[WriteOutcome]) -> bool {
    let final_of = |pol: Polarity| -> Option<i8> {
        let mut it = runs.iter().filter(|r| r.polarity == pol).map(|r| r.kind.polarity());
        let first = it.next()??;
        it.all(|p| p == Some(first)).then_some(first)
    };
    runs.len() == 4
        && runs.iter().all(|r| r.switched)
        && matches!(
            (final_of(Polarity::Positive), final_of(Polarity::Negative)),
            (Some(a), Some(b)) if a == -b
        )
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DmiWindow {
    pub points: Vec<WindowPoint>,
    /// Whether the deterministic points form one unbroken run in `D`.
    pub contiguous: bool,
}

impl DmiWindow {
    /// Smallest and largest deterministic `D`.
    pub fn range(&self) -> Option<(f64, f64)> {
        let mut det = self.points.iter().filter(|p| p.deterministic).map(|p| p.d);
        let lo = det.next()?;
        Some((lo, det.next_back().unwrap_or(lo)))
    }
}

/// True when the set entries of `flags` form at most one unbroken run.
pub fn single_run(flags: &[bool]) -> bool {
    let starts = flags
        .iter()
        .enumerate()
        .filter(|&(i, &f)| f && (i == 0 || !flags[i - 1]))
        .count();
    starts <= 1
}

/// Write matrix at each `D`, sorted by `D`.
pub fn dmi_window(setup: &Setup, d: &SweepAxis, workers: usize) -> Result<DmiWindow> {
    let values = d.values()?;
    let points = run_parallel(&values, workers, |_, &dv| {
        let s = setup.with(SweepParam::D, dv);
        s.material.validate()?;
        let runs = write_matrix(&s)?;
        Ok(WindowPoint {
            d: dv,
            deterministic: is_deterministic(&runs),
            runs,
        })
    })?;
    let flags: Vec<bool> = points.iter().map(|p| p.deterministic).collect();
    Ok(DmiWindow {
        contiguous: single_run(&flags),
        points,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradientPoint {
    pub voltage: f64,
    pub beta: f64,
    /// Mean `|dK/ds|` along the profile axis during the write (J/m^4).
    pub mean_gradient: f64,
    pub kind: TextureKind,
    pub switched: bool,
    pub recovery_time: Option<f64>,
}

/// Mean anisotropy gradient produced by the write voltage of `setup`.
pub fn mean_gradient(setup: &Setup) -> Result<f64> {
    let k = anisotropy_map(&setup.material, &setup.vcma, setup.mesh, setup.timing.voltage).k;
    gradient_magnitude(&k, setup.vcma.axis)
}

/// `+V` writes from the relaxed up state for each value of `axis`
/// (`Vb` or `beta`), sorted by mean gradient.
pub fn gradient_curve(setup: &Setup, axis: &SweepAxis, workers: usize) -> Result<Vec<GradientPoint>> {
    if !matches!(axis.param, SweepParam::Vb | SweepParam::Beta) {
        return Err(Error::validation(
            "sweep.param",
            "gradient curve sweeps Vb or beta",
        ));
    }
    let values = axis.values()?;
    let mut points = run_parallel(&values, workers, |_, &v| {
        let s = setup.with(axis.param, v);
        s.vcma.validate(&s.mesh)?;
        s.timing.validate()?;
        let start = relaxed_uniform(s.mesh, &s.material, &s.vcma, true, s.tolerances)?;
        let r = write(&start, Polarity::Positive, &s.material, &s.vcma, &s.timing, s.tolerances, &s.thresholds)?;
        Ok(GradientPoint {
            voltage: s.timing.voltage,
            beta: s.vcma.beta,
            mean_gradient: mean_gradient(&s)?,
            kind: r.final_class.kind,
            switched: r.switched,
            recovery_time: r.recovery_time,
        })
    })?;
    points.sort_by(|a, b| a.mean_gradient.total_cmp(&b.mean_gradient));
    Ok(points)
}

/// Whether recovery time never grows with the gradient by more than `slack`.
/// Points without a recovery time fail the check.
pub fn recovery_non_increasing(points: &[GradientPoint], slack: f64) -> bool {
    let times: Option<Vec<f64>> = points.iter().map(|p| p.recovery_time).collect();
    match times {
        Some(t) => t.windows(2).all(|w| w[1] <= w[0] + slack),
        None => false,
    }
}
