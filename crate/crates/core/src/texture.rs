//! Order parameters and phase classification of relaxed states.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;

use crate::mesh::VectorField;
use crate::vec3::Vec3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TextureKind {
    UniformUp,
    UniformDown,
    VerticalStripe,
    CircularStripe,
    Indeterminate,
}

impl TextureKind {
    pub fn is_uniform(self) -> bool {
        matches!(self, TextureKind::UniformUp | TextureKind::UniformDown)
    }

    /// +1 for `UniformUp`, -1 for `UniformDown`, `None` otherwise.
    pub fn polarity(self) -> Option<i8> {
        match self {
            TextureKind::UniformUp => Some(1),
            TextureKind::UniformDown => Some(-1),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TextureKind::UniformUp => "UniformUp",
            TextureKind::UniformDown => "UniformDown",
            TextureKind::VerticalStripe => "VerticalStripe",
            TextureKind::CircularStripe => "CircularStripe",
            TextureKind::Indeterminate => "Indeterminate",
        }
    }
}

impl fmt::Display for TextureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Thresholds {
    /// `|<m_z>|` at or above which a state is uniform.
    pub uniform: f64,
    /// Band-count excess of one axis over the other for a stripe state.
    pub stripe_excess: usize,
    /// `|Q|` at or above which a state counts as closed-contour.
    pub charge: f64,
    /// Cells with `|m_z|` below this do not start a new band.
    pub deadband: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            uniform: 0.9,
            stripe_excess: 2,
            charge: 0.5,
            deadband: 0.2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TextureClass {
    pub kind: TextureKind,
    /// `<m_z>` over the layer.
    pub mz: f64,
    /// Uniformity `|<m_z>|`.
    pub uniformity: f64,
    /// Topological charge.
    pub charge: f64,
    /// Largest number of `m_z` sign changes along any row (x direction).
    pub bands_x: usize,
    /// Largest number of `m_z` sign changes along any column (y direction).
    pub bands_y: usize,
}

/// Topological charge `Q = (1/4pi) sum m . (dm/dx x dm/dy) dx dy`.
///
/// Central differences inside, one-sided at the edges.
pub fn skyrmion_number(m: &VectorField) -> f64 {
    let mesh = m.mesh;
    let d = &m.data;
    let deriv = |i: usize, lo: Option<usize>, hi: Option<usize>| -> Vec3 {
        match (lo, hi) {
            (Some(a), Some(b)) => (d[b] - d[a]) * 0.5,
            (None, Some(b)) => d[b] - d[i],
            (Some(a), None) => d[i] - d[a],
            (None, None) => Vec3::ZERO,
        }
    };
    let mut q = 0.0;
    for i in 0..mesh.len() {
        // Spacings cancel: (dm/dx)(dm/dy) dx dy uses differences per cell.
        let dx = deriv(
            i,
            mesh.step(i, crate::mesh::Axis::X, -1),
            mesh.step(i, crate::mesh::Axis::X, 1),
        );
        let dy = deriv(
            i,
            mesh.step(i, crate::mesh::Axis::Y, -1),
            mesh.step(i, crate::mesh::Axis::Y, 1),
        );
        q += d[i].dot(dx.cross(dy));
    }
    q / (4.0 * PI)
}

/// Sign changes of `m_z` along one line of cells, skipping cells inside the deadband.
fn sign_changes(values: impl Iterator<Item = f64>, deadband: f64) -> usize {
    let mut last: Option<bool> = None;
    let mut changes = 0;
    for v in values {
        if v.abs() < deadband {
            continue;
        }
        let s = v > 0.0;
        if let Some(prev) = last {
            if prev != s {
                changes += 1;
            }
        }
        last = Some(s);
    }
    changes
}

/// Band counts `(along x, along y)`: the largest number of `m_z` sign changes
/// over all rows and over all columns respectively.
pub fn band_counts(m: &VectorField, deadband: f64) -> (usize, usize) {
    let mesh = m.mesh;
    let mz = |ix: usize, iy: usize| m.data[mesh.index(ix, iy, 0)].z;
    let bx = (0..mesh.ny)
        .map(|iy| sign_changes((0..mesh.nx).map(|ix| mz(ix, iy)), deadband))
        .max()
        .unwrap_or(0);
    let by = (0..mesh.nx)
        .map(|ix| sign_changes((0..mesh.ny).map(|iy| mz(ix, iy)), deadband))
        .max()
        .unwrap_or(0);
    (bx, by)
}

/// Classifies a relaxed state.
pub fn classify(m: &VectorField, th: &Thresholds) -> TextureClass {
    let mz = m.data.iter().map(|v| v.z).sum::<f64>() / m.data.len() as f64;
    let u = mz.abs();
    let charge = skyrmion_number(m);
    let (bands_x, bands_y) = band_counts(m, th.deadband);

    let kind = if u >= th.uniform {
        if mz >= 0.0 {
            TextureKind::UniformUp
        } else {
            TextureKind::UniformDown
        }
    } else {
        let (hi, lo) = (bands_x.max(bands_y), bands_x.min(bands_y));
        if hi >= lo + th.stripe_excess && charge.abs() < th.charge {
            TextureKind::VerticalStripe
        } else if charge.abs() >= th.charge || (lo >= 1 && hi < lo + th.stripe_excess) {
            TextureKind::CircularStripe
        } else {
            TextureKind::Indeterminate
        }
    };
    TextureClass {
        kind,
        mz,
        uniformity: u,
        charge,
        bands_x,
        bands_y,
    }
}
