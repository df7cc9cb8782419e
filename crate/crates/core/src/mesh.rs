//! Regular-grid discretization of the free layer.
//!
//! Cells are stored row-major with x fastest: `index = ix + nx * (iy + ny * iz)`.
//! Boundaries are open; there is no periodic wrap.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vec3::Vec3;

/// Tolerance on `| |m| - 1 |` for a valid magnetization field.
pub const UNIT_NORM_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }

    pub fn unit(self) -> Vec3 {
        match self {
            Axis::X => Vec3::X,
            Axis::Y => Vec3::Y,
            Axis::Z => Vec3::Z,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Mesh {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    pub dx: f64,
    pub dy: f64,
    pub dz: f64,
}

impl Default for Mesh {
    /// 20 nm x 20 nm x 1 nm film with 1 nm cubic cells.
    fn default() -> Self {
        Self {
            nx: 20,
            ny: 20,
            nz: 1,
            dx: 1e-9,
            dy: 1e-9,
            dz: 1e-9,
        }
    }
}

/// One entry of a cell's face-neighborhood.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Neighbor {
    pub index: usize,
    pub axis: Axis,
    /// -1 or +1 along `axis`.
    pub direction: i8,
}

impl Mesh {
    pub fn new(nx: usize, ny: usize, nz: usize, dx: f64, dy: f64, dz: f64) -> Result<Self> {
        let mesh = Self {
            nx,
            ny,
            nz,
            dx,
            dy,
            dz,
        };
        mesh.validate()?;
        Ok(mesh)
    }

    /// Mesh with cubic cells of edge `cell`.
    pub fn square(nx: usize, ny: usize, cell: f64) -> Result<Self> {
        Self::new(nx, ny, 1, cell, cell, cell)
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx == 0 || self.ny == 0 {
            return Err(Error::InvalidMesh(format!(
                "nx and ny must be >= 1 (got {} x {})",
                self.nx, self.ny
            )));
        }
        if self.nz != 1 {
            return Err(Error::InvalidMesh(format!(
                "only single-layer films are supported (nz = {})",
                self.nz
            )));
        }
        for (name, v) in [("dx", self.dx), ("dy", self.dy), ("dz", self.dz)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidMesh(format!("{name} must be > 0 (got {v})")));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny * self.nz
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_volume(&self) -> f64 {
        self.dx * self.dy * self.dz
    }

    pub fn spacing(&self, axis: Axis) -> f64 {
        match axis {
            Axis::X => self.dx,
            Axis::Y => self.dy,
            Axis::Z => self.dz,
        }
    }

    pub fn count(&self, axis: Axis) -> usize {
        match axis {
            Axis::X => self.nx,
            Axis::Y => self.ny,
            Axis::Z => self.nz,
        }
    }

    #[inline]
    pub fn index(&self, ix: usize, iy: usize, iz: usize) -> usize {
        ix + self.nx * (iy + self.ny * iz)
    }

    #[inline]
    pub fn coords(&self, i: usize) -> (usize, usize, usize) {
        let ix = i % self.nx;
        let iy = (i / self.nx) % self.ny;
        let iz = i / (self.nx * self.ny);
        (ix, iy, iz)
    }

    /// Integer coordinate of cell `i` along `axis`.
    pub fn coord(&self, i: usize, axis: Axis) -> usize {
        let (ix, iy, iz) = self.coords(i);
        match axis {
            Axis::X => ix,
            Axis::Y => iy,
            Axis::Z => iz,
        }
    }

    /// Cell-center position in meters, origin at the lower corner of the layer.
    pub fn center(&self, i: usize) -> Vec3 {
        let (ix, iy, iz) = self.coords(i);
        Vec3::new(
            (ix as f64 + 0.5) * self.dx,
            (iy as f64 + 0.5) * self.dy,
            (iz as f64 + 0.5) * self.dz,
        )
    }

    /// Neighbor of `i` one cell along `axis` in `direction`, if inside the mesh.
    #[inline]
    pub fn step(&self, i: usize, axis: Axis, direction: i8) -> Option<usize> {
        let (ix, iy, iz) = self.coords(i);
        let (c, n) = match axis {
            Axis::X => (ix, self.nx),
            Axis::Y => (iy, self.ny),
            Axis::Z => (iz, self.nz),
        };
        let c = if direction < 0 {
            c.checked_sub(1)?
        } else if c + 1 < n {
            c + 1
        } else {
            return None;
        };
        Some(match axis {
            Axis::X => self.index(c, iy, iz),
            Axis::Y => self.index(ix, c, iz),
            Axis::Z => self.index(ix, iy, c),
        })
    }

    /// In-bounds face neighbors of cell `i`.
    pub fn neighbors(&self, i: usize) -> Result<Vec<Neighbor>> {
        if i >= self.len() {
            return Err(Error::IndexOutOfRange {
                index: i,
                len: self.len(),
            });
        }
        let mut out = Vec::with_capacity(6);
        for axis in [Axis::X, Axis::Y, Axis::Z] {
            for direction in [-1i8, 1] {
                if let Some(index) = self.step(i, axis, direction) {
                    out.push(Neighbor {
                        index,
                        axis,
                        direction,
                    });
                }
            }
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    pub mesh: Mesh,
    pub data: Vec<Vec3>,
}

impl VectorField {
    pub fn uniform(mesh: Mesh, v: Vec3) -> Self {
        Self {
            mesh,
            data: vec![v; mesh.len()],
        }
    }

    pub fn zeros(mesh: Mesh) -> Self {
        Self::uniform(mesh, Vec3::ZERO)
    }

    pub fn from_data(mesh: Mesh, data: Vec<Vec3>) -> Result<Self> {
        if data.len() != mesh.len() {
            return Err(Error::LengthMismatch {
                expected: mesh.len(),
                got: data.len(),
            });
        }
        Ok(Self { mesh, data })
    }

    /// Builds a field by evaluating `f` at every cell index.
    pub fn from_fn(mesh: Mesh, f: impl FnMut(usize) -> Vec3) -> Self {
        Self {
            mesh,
            data: (0..mesh.len()).map(f).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn normalize(&mut self) {
        for v in &mut self.data {
            *v = v.normalized();
        }
    }

    /// Largest `| |m_i| - 1 |` over all cells.
    pub fn max_norm_deviation(&self) -> f64 {
        self.data
            .iter()
            .map(|v| (v.norm() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Checks the unit-norm invariant of a magnetization field.
    pub fn validate_unit_norm(&self) -> Result<()> {
        if self.data.len() != self.mesh.len() {
            return Err(Error::LengthMismatch {
                expected: self.mesh.len(),
                got: self.data.len(),
            });
        }
        for (cell, v) in self.data.iter().enumerate() {
            let deviation = (v.norm() - 1.0).abs();
            if !(deviation <= UNIT_NORM_TOL) {
                return Err(Error::NotUnitNorm { cell, deviation });
            }
        }
        Ok(())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.max_abs()).fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    pub mesh: Mesh,
    pub data: Vec<f64>,
}

impl ScalarField {
    pub fn uniform(mesh: Mesh, v: f64) -> Self {
        Self {
            mesh,
            data: vec![v; mesh.len()],
        }
    }

    pub fn from_fn(mesh: Mesh, f: impl FnMut(usize) -> f64) -> Self {
        Self {
            mesh,
            data: (0..mesh.len()).map(f).collect(),
        }
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RegionMask {
    pub mesh: Mesh,
    pub member: Vec<bool>,
}

impl RegionMask {
    pub fn all(mesh: Mesh) -> Self {
        Self {
            mesh,
            member: vec![true; mesh.len()],
        }
    }

    pub fn none(mesh: Mesh) -> Self {
        Self {
            mesh,
            member: vec![false; mesh.len()],
        }
    }

    /// Cells with `x0 <= ix < x1` and `y0 <= iy < y1`.
    pub fn rect(mesh: Mesh, x: (usize, usize), y: (usize, usize)) -> Self {
        Self::from_fn(mesh, |i| {
            let (ix, iy, _) = mesh.coords(i);
            ix >= x.0 && ix < x.1 && iy >= y.0 && iy < y.1
        })
    }

    pub fn from_fn(mesh: Mesh, f: impl FnMut(usize) -> bool) -> Self {
        Self {
            mesh,
            member: (0..mesh.len()).map(f).collect(),
        }
    }

    pub fn count(&self) -> usize {
        self.member.iter().filter(|&&b| b).count()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.member[i]
    }

    /// Errors unless at least one cell is selected.
    pub fn require_nonempty(&self) -> Result<()> {
        if self.count() == 0 {
            Err(Error::EmptyMask)
        } else {
            Ok(())
        }
    }

    /// Inclusive range of integer coordinates covered along `axis`.
    pub fn extent(&self, axis: Axis) -> Option<(usize, usize)> {
        let mut lo = usize::MAX;
        let mut hi = 0;
        for (i, _) in self.member.iter().enumerate().filter(|(_, &b)| b) {
            let c = self.mesh.coord(i, axis);
            lo = lo.min(c);
            hi = hi.max(c);
        }
        (lo != usize::MAX).then_some((lo, hi))
    }
}

/// Arithmetic mean of the vectors over the masked cells (all cells when `mask` is `None`).
///
/// Summation runs in ascending cell order so the result is reproducible.
pub fn mean_vector(f: &VectorField, mask: Option<&RegionMask>) -> Result<Vec3> {
    let mut sum = Vec3::ZERO;
    let mut n = 0usize;
    match mask {
        None => {
            for v in &f.data {
                sum += *v;
            }
            n = f.data.len();
        }
        Some(mask) => {
            if mask.member.len() != f.data.len() {
                return Err(Error::LengthMismatch {
                    expected: f.data.len(),
                    got: mask.member.len(),
                });
            }
            for (v, _) in f.data.iter().zip(&mask.member).filter(|(_, &b)| b) {
                sum += *v;
                n += 1;
            }
        }
    }
    if n == 0 {
        return Err(Error::EmptyMask);
    }
    Ok(sum / n as f64)
}
