//! Finite-difference micromagnetics of a thin free layer written by spin-orbit
//! torque with a voltage-controlled anisotropy gradient.

pub mod cli;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod field;
pub mod io;
pub mod materials;
pub mod mesh;
pub mod protocol;
pub mod sweeps;
pub mod texture;
pub mod vec3;

pub use error::{Error, Result};
pub use vec3::Vec3;
