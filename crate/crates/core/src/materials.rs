//! Material constants, drive schedules and the voltage-controlled anisotropy map.
//!
//! The VCMA law acts on the anisotropy energy density directly:
//!
//! ```text
//! K_u(cell) = Ku0 - (beta * V / t_ox) * g(cell)
//! ```
//!
//! where `g` is a gating profile in `[0, 1]`. `beta` is taken in J/(V m^2) so that
//! `beta * V / t_ox` is an energy density; with the default `beta = 9.0429e-5` and
//! `t_ox = 1 nm`, 0.165 V shifts the anisotropy by about 1.49e4 J/m^3.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::{Axis, Mesh, RegionMask, ScalarField};
use crate::vec3::Vec3;

/// Vacuum permeability (T m / A).
pub const MU0: f64 = 1.256_637_062_12e-6;
/// Reduced Planck constant (J s).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Elementary charge (C).
pub const QE: f64 = 1.602_176_634e-19;

/// How the magnetostatic self-interaction is treated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DemagMode {
    /// No magnetostatic term.
    Off,
    /// Local thin-film shape anisotropy, `(1/2) mu0 Ms^2 m_z^2` per unit volume.
    #[default]
    ThinFilm,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MaterialParams {
    /// Saturation magnetization (A/m).
    pub ms: f64,
    /// Exchange stiffness (J/m).
    pub aex: f64,
    /// Uniaxial anisotropy at zero gate voltage (J/m^3).
    pub ku0: f64,
    pub easy_axis: Vec3,
    /// Interfacial DMI constant (J/m^2).
    pub dind: f64,
    pub alpha: f64,
    /// Spin polarization of the SOT spin current.
    pub pol: f64,
    /// Field-like to damping-like torque ratio.
    pub sot_xi: f64,
    /// Gyromagnetic ratio (rad / (s T)).
    pub gamma: f64,
    pub demag: DemagMode,
    /// Uniform applied induction (T). Zero for the field-free device; used by tests.
    pub zeeman: Vec3,
}

impl Default for MaterialParams {
    fn default() -> Self {
        Self {
            ms: 1.1e6,
            aex: 1.6e-11,
            ku0: 8e5,
            easy_axis: Vec3::Z,
            dind: 1e-3,
            alpha: 0.1,
            pol: 0.15,
            sot_xi: -2.0,
            gamma: 1.7595e11,
            demag: DemagMode::ThinFilm,
            zeeman: Vec3::ZERO,
        }
    }
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::validation(field, format!("must be > 0 (got {v})")))
    }
}

fn non_negative(field: &str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::validation(field, format!("must be >= 0 (got {v})")))
    }
}

fn finite(field: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::validation(field, format!("must be finite (got {v})")))
    }
}

impl MaterialParams {
    pub fn validate(&self) -> Result<()> {
        positive("material.ms", self.ms)?;
        positive("material.aex", self.aex)?;
        positive("material.gamma", self.gamma)?;
        positive("material.alpha", self.alpha)?;
        non_negative("material.ku0", self.ku0)?;
        finite("material.dind", self.dind)?;
        finite("material.pol", self.pol)?;
        finite("material.sot_xi", self.sot_xi)?;
        if ((self.easy_axis.norm() - 1.0).abs()) > 1e-9 {
            return Err(Error::validation(
                "material.easy_axis",
                "must be a unit vector",
            ));
        }
        Ok(())
    }

    /// Coefficient `D / (2 Aex)` of the chiral boundary condition (1/m).
    pub fn dmi_boundary_coefficient(&self) -> f64 {
        self.dind / (2.0 * self.aex)
    }

    /// Anisotropy field `2 K / Ms` at `K = ku0` (T).
    pub fn anisotropy_field(&self) -> f64 {
        2.0 * self.ku0 / self.ms
    }

    /// Anisotropy constant net of the thin-film shape term (J/m^3).
    pub fn effective_ku(&self) -> f64 {
        match self.demag {
            DemagMode::Off => self.ku0,
            DemagMode::ThinFilm => self.ku0 - 0.5 * MU0 * self.ms * self.ms,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GateShape {
    /// `g` ramps from 0 to 1 across the gate along the profile axis.
    #[default]
    Linear,
    /// `g = 1` inside the gate, 0 outside.
    Step,
}

/// Rectangular block of cells, half-open ranges `[lo, hi)` in cell units.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellRect {
    pub x: [usize; 2],
    pub y: [usize; 2],
}

impl CellRect {
    pub fn to_mask(&self, mesh: Mesh) -> RegionMask {
        RegionMask::rect(mesh, (self.x[0], self.x[1]), (self.y[0], self.y[1]))
    }

    pub fn validate(&self, field: &str, mesh: &Mesh) -> Result<()> {
        let ok = self.x[0] < self.x[1]
            && self.y[0] < self.y[1]
            && self.x[1] <= mesh.nx
            && self.y[1] <= mesh.ny;
        if ok {
            Ok(())
        } else {
            Err(Error::validation(
                field,
                format!(
                    "rectangle x={:?} y={:?} is empty or outside the {}x{} mesh",
                    self.x, self.y, mesh.nx, mesh.ny
                ),
            ))
        }
    }
}

/// Mask from an optional rectangle; `None` selects the whole layer.
pub fn region_mask(rect: Option<&CellRect>, mesh: Mesh) -> RegionMask {
    match rect {
        Some(r) => r.to_mask(mesh),
        None => RegionMask::all(mesh),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VcmaProfile {
    /// VCMA coefficient (J/(V m^2)).
    pub beta: f64,
    /// Oxide thickness (m).
    pub t_ox: f64,
    /// Gated cells; the whole layer when absent.
    pub gate: Option<CellRect>,
    pub shape: GateShape,
    /// Direction along which the linear profile increases. The default, y, is
    /// perpendicular to the write current and parallel to the SOT spin polarization.
    pub axis: Axis,
}

impl Default for VcmaProfile {
    fn default() -> Self {
        Self {
            beta: 9.0429e-5,
            t_ox: 1e-9,
            gate: None,
            shape: GateShape::Linear,
            axis: Axis::Y,
        }
    }
}

impl VcmaProfile {
    pub fn validate(&self, mesh: &Mesh) -> Result<()> {
        finite("vcma.beta", self.beta)?;
        positive("vcma.t_ox", self.t_ox)?;
        if self.axis == Axis::Z {
            return Err(Error::validation("vcma.axis", "must be x or y"));
        }
        if let Some(g) = &self.gate {
            g.validate("vcma.gate", mesh)?;
        }
        Ok(())
    }

    /// Anisotropy shift per volt at `g = 1` (J/m^3/V).
    pub fn shift_per_volt(&self) -> f64 {
        self.beta / self.t_ox
    }

    pub fn gate_mask(&self, mesh: Mesh) -> RegionMask {
        region_mask(self.gate.as_ref(), mesh)
    }

    /// Gating profile `g(cell)` in `[0, 1]`.
    pub fn gating(&self, mesh: Mesh) -> ScalarField {
        let gate = self.gate_mask(mesh);
        let extent = gate.extent(self.axis);
        ScalarField::from_fn(mesh, |i| {
            if !gate.contains(i) {
                return 0.0;
            }
            match self.shape {
                GateShape::Step => 1.0,
                GateShape::Linear => {
                    let (lo, hi) = extent.expect("gate contains cell i");
                    if hi == lo {
                        1.0
                    } else {
                        (mesh.coord(i, self.axis) - lo) as f64 / (hi - lo) as f64
                    }
                }
            }
        })
    }
}

/// Anisotropy map and the number of cells that had to be clamped at zero.
#[derive(Clone, Debug, PartialEq)]
pub struct AnisotropyMap {
    pub k: ScalarField,
    pub clamped: usize,
}

/// Per-cell anisotropy constant under gate voltage `vb` (volts).
pub fn anisotropy_map(p: &MaterialParams, v: &VcmaProfile, mesh: Mesh, vb: f64) -> AnisotropyMap {
    let g = v.gating(mesh);
    let shift = v.shift_per_volt() * vb;
    let mut clamped = 0;
    let k = ScalarField::from_fn(mesh, |i| {
        let k = p.ku0 - shift * g.data[i];
        if k < 0.0 {
            clamped += 1;
            0.0
        } else {
            k
        }
    });
    if clamped > 0 {
        log::warn!(
            "gate voltage {vb} V drives the anisotropy negative in {clamped} cells; clamped at 0"
        );
    }
    AnisotropyMap { k, clamped }
}

/// Mean `|dK/d(axis)|` over all cells, central differences inside and one-sided at
/// the edges (J/m^3 per m).
pub fn gradient_magnitude(k: &ScalarField, axis: Axis) -> Result<f64> {
    let mesh = k.mesh;
    let n = mesh.count(axis);
    if n < 2 {
        return Err(Error::validation(
            "mesh",
            format!("gradient along {axis:?} needs at least 2 cells (got {n})"),
        ));
    }
    let h = mesh.spacing(axis);
    let mut sum = 0.0;
    for i in 0..mesh.len() {
        let lo = mesh.step(i, axis, -1);
        let hi = mesh.step(i, axis, 1);
        let d = match (lo, hi) {
            (Some(a), Some(b)) => (k.data[b] - k.data[a]) / (2.0 * h),
            (None, Some(b)) => (k.data[b] - k.data[i]) / h,
            (Some(a), None) => (k.data[i] - k.data[a]) / h,
            (None, None) => unreachable!("n >= 2"),
        };
        sum += d.abs();
    }
    Ok(sum / mesh.len() as f64)
}

/// One piecewise-constant interval of current and gate voltage.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveSegment {
    /// Seconds.
    pub duration: f64,
    /// Charge current density (A/m^2).
    pub current_density: f64,
    /// In-plane unit vector of current flow.
    pub current_dir: Vec3,
    /// Gate voltage (V).
    pub voltage: f64,
}

impl DriveSegment {
    pub fn validate(&self, field: &str) -> Result<()> {
        positive(&format!("{field}.duration"), self.duration)?;
        finite(&format!("{field}.current_density"), self.current_density)?;
        finite(&format!("{field}.voltage"), self.voltage)?;
        if self.current_density != 0.0 {
            let d = self.current_dir;
            if (d.norm() - 1.0).abs() > 1e-9 || d.z.abs() > 1e-12 {
                return Err(Error::validation(
                    format!("{field}.current_dir"),
                    "must be an in-plane unit vector when current flows",
                ));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveSchedule {
    pub segments: Vec<DriveSegment>,
}

impl DriveSchedule {
    pub fn validate(&self) -> Result<()> {
        for (i, s) in self.segments.iter().enumerate() {
            s.validate(&format!("drive.segments[{i}]"))?;
        }
        Ok(())
    }

    pub fn total_duration(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).sum()
    }

    /// Start times of each segment.
    pub fn boundaries(&self) -> Vec<f64> {
        let mut t = 0.0;
        self.segments
            .iter()
            .map(|s| {
                let t0 = t;
                t += s.duration;
                t0
            })
            .collect()
    }
}
