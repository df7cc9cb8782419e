//! Run configuration: one TOML file, every section optional.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dynamics::{RelaxCriteria, Tolerances};
use crate::error::{Error, Result};
use crate::materials::{CellRect, MaterialParams, VcmaProfile};
use crate::mesh::Mesh;
use crate::protocol::WriteTiming;
use crate::sweeps::{Setup, SweepAxis, SweepParam};
use crate::texture::Thresholds;

/// Name of the resolved-config copy written next to the outputs.
pub const RESOLVED_NAME: &str = "resolved_config.toml";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepProtocol {
    #[default]
    Relax,
    WritePositive,
    WriteNegative,
    WriteBoth,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub axes: Vec<SweepAxis>,
    pub protocol: SweepProtocol,
    pub workers: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            axes: Vec::new(),
            protocol: SweepProtocol::Relax,
            workers: 1,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.workers == 0 {
            return Err(Error::validation("sweep.workers", "must be at least 1"));
        }
        for (i, a) in self.axes.iter().enumerate() {
            a.validate()?;
            if self.axes[..i].iter().any(|b| b.param == a.param) {
                return Err(Error::validation(
                    format!("sweep.axes[{i}]"),
                    format!("parameter {} appears twice", a.param.as_str()),
                ));
            }
        }
        Ok(())
    }

    /// The axis sweeping `param`.
    pub fn axis(&self, param: SweepParam) -> Result<&SweepAxis> {
        self.axes.iter().find(|a| a.param == param).ok_or_else(|| {
            Error::validation(
                "sweep.axes",
                format!("no axis for parameter {}", param.as_str()),
            )
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub seed: u64,
    pub output_dir: PathBuf,
    pub mesh: Mesh,
    pub material: MaterialParams,
    pub vcma: VcmaProfile,
    pub protocol: WriteTiming,
    pub integrator: Tolerances,
    pub relax: RelaxCriteria,
    pub thresholds: Thresholds,
    /// Readout pillar; the whole layer when absent.
    pub pillar: Option<CellRect>,
    pub sweep: SweepConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            output_dir: PathBuf::from("out"),
            mesh: Mesh::default(),
            material: MaterialParams::default(),
            vcma: VcmaProfile::default(),
            protocol: WriteTiming::default(),
            integrator: Tolerances::default(),
            relax: RelaxCriteria::default(),
            thresholds: Thresholds::default(),
            pillar: None,
            sweep: SweepConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.setup().validate()?;
        for (name, v) in [
            ("relax.torque_tol", self.relax.torque_tol),
            ("relax.max_time", self.relax.max_time),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::validation(name, format!("must be > 0 (got {v})")));
            }
        }
        let th = &self.thresholds;
        for (name, v) in [
            ("thresholds.uniform", th.uniform),
            ("thresholds.charge", th.charge),
            ("thresholds.deadband", th.deadband),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::validation(name, format!("must lie in [0, 1] (got {v})")));
            }
        }
        if let Some(p) = &self.pillar {
            p.validate("pillar", &self.mesh)?;
        }
        self.sweep.validate()
    }

    pub fn setup(&self) -> Setup {
        Setup {
            mesh: self.mesh,
            material: self.material.clone(),
            vcma: self.vcma.clone(),
            timing: self.protocol,
            tolerances: self.integrator,
            thresholds: self.thresholds,
            relax: self.relax,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Parse(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Writes the resolved config into `dir` and returns its path.
    pub fn write_resolved(&self, dir: &Path) -> Result<PathBuf> {
        fs::create_dir_all(dir)?;
        let path = dir.join(RESOLVED_NAME);
        fs::write(&path, self.to_toml()?)?;
        Ok(path)
    }
}

/// Reads and validates a config file. The name `defaults` selects the
/// built-in defaults unless a file of that name exists.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    if path == Path::new("defaults") && !path.exists() {
        return Ok(RunConfig::default());
    }
    let text = fs::read_to_string(path)?;
    RunConfig::from_toml(&text)
}
