//! Command-line front end.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::{load_config, RunConfig};
use crate::dynamics::{relax, SimState};
use crate::error::{Error, Result};
use crate::io;
use crate::materials::{anisotropy_map, region_mask};
use crate::mesh::VectorField;
use crate::protocol::{readout, relaxed_uniform, write, Polarity};
use crate::sweeps::{dmi_window, gradient_curve, phase_diagram, random_state, SweepParam};
use crate::texture::classify;
use crate::vec3::Vec3;

#[derive(Parser, Debug)]
#[command(name = "lvamtj", version, about = "Micromagnetic simulation of a gradient-assisted SOT write")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Config file (TOML); `defaults` uses built-in values.
    #[arg(long, default_value = "defaults")]
    config: PathBuf,
    /// Output directory; overrides `output_dir` from the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    /// Worker threads; overrides `sweep.workers`.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum StartArg {
    Up,
    Down,
    Random,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Relax to equilibrium at zero current and voltage.
    Relax {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "up")]
        start: StartArg,
    },
    /// Three-step write from a relaxed uniform state.
    Write {
        #[command(flatten)]
        common: Common,
        /// Gate voltage sign: + or -.
        #[arg(long, allow_hyphen_values = true)]
        polarity: String,
        #[arg(long, value_enum, default_value = "up")]
        start: StartArg,
    },
    /// Equilibrium texture over the Ku0 x D grid of `sweep.axes`.
    PhaseDiagram(SweepArgs),
    /// Four-write matrix at each D of `sweep.axes`.
    DmiWindow(SweepArgs),
    /// +V writes over the Vb or beta axis of `sweep.axes`.
    GradientCurve(SweepArgs),
    /// Parse and validate a config file.
    ValidateConfig {
        #[command(flatten)]
        common: Common,
    },
}

/// Parses `argv`, runs the command and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", error_line(&e));
            1
        }
    }
}

/// One-line error report: `error[kind] message`.
pub fn error_line(e: &Error) -> String {
    format!("error[{}] {}", e.kind(), e)
}

fn prepare(common: &Common) -> Result<(RunConfig, PathBuf)> {
    let mut cfg = load_config(&common.config)?;
    if let Some(out) = &common.out {
        cfg.output_dir = out.clone();
    }
    let dir = cfg.output_dir.clone();
    cfg.write_resolved(&dir)?;
    Ok((cfg, dir))
}

fn save(dir: &Path, name: &str, contents: &str) -> Result<()> {
    fs::write(dir.join(name), contents)?;
    println!("wrote {}", dir.join(name).display());
    Ok(())
}

fn sweep_config(args: &SweepArgs) -> Result<(RunConfig, PathBuf)> {
    let (mut cfg, dir) = prepare(&args.common)?;
    if let Some(w) = args.workers {
        cfg.sweep.workers = w;
        cfg.sweep.validate()?;
    }
    Ok((cfg, dir))
}

fn execute(cmd: Command) -> Result<()> {
    match cmd {
        Command::ValidateConfig { common } => {
            let cfg = load_config(&common.config)?;
            if let Some(out) = &common.out {
                cfg.write_resolved(out)?;
            }
            println!("config ok");
            Ok(())
        }
        Command::Relax { common, start } => {
            let (cfg, dir) = prepare(&common)?;
            let setup = cfg.setup();
            let tilt = 5f64.to_radians();
            let m0 = match start {
                StartArg::Up => VectorField::uniform(setup.mesh, Vec3::new(tilt.sin(), 0.0, tilt.cos())),
                StartArg::Down => VectorField::uniform(setup.mesh, Vec3::new(tilt.sin(), 0.0, -tilt.cos())),
                StartArg::Random => random_state(setup.mesh, cfg.seed, 0),
            };
            let k = anisotropy_map(&setup.material, &setup.vcma, setup.mesh, 0.0).k;
            let out = relax(&SimState::new(m0, k), &setup.material, setup.relax, setup.tolerances)?;
            let class = classify(&out.state.m, &setup.thresholds);
            save(
                &dir,
                "relax.csv",
                &io::relax_csv(&class, out.energy, out.max_torque, out.converged, out.state.t),
            )?;
            save(&dir, "energy_history.csv", &io::energy_history_csv(&out.energy_history))?;
            io::write_ovf(&dir.join("relaxed.ovf"), &out.state.m, out.state.t, setup.material.ms)?;
            println!("{} <mz> = {:.4} converged = {}", class.kind, class.mz, out.converged);
            Ok(())
        }
        Command::Write {
            common,
            polarity,
            start,
        } => {
            let polarity = Polarity::parse(&polarity)?;
            let (cfg, dir) = prepare(&common)?;
            let s = cfg.setup();
            let up = match start {
                StartArg::Up => true,
                StartArg::Down => false,
                StartArg::Random => {
                    return Err(Error::validation("start", "write starts from up or down"))
                }
            };
            let initial = relaxed_uniform(s.mesh, &s.material, &s.vcma, up, s.tolerances)?;
            let r = write(&initial, polarity, &s.material, &s.vcma, &s.timing, s.tolerances, &s.thresholds)?;
            save(&dir, "write_result.csv", &io::write_result_csv(&r))?;
            save(&dir, "trace.csv", &io::trace_csv(&r.trace))?;
            io::write_ovf(&dir.join("final.ovf"), &r.final_state.m, r.final_state.t, s.material.ms)?;
            let pillar = region_mask(cfg.pillar.as_ref(), s.mesh);
            let state = match readout(&r.final_state, &pillar) {
                Ok((state, _)) => format!("{state:?}"),
                Err(e) => e.to_string(),
            };
            println!(
                "{} -> {} switched = {} readout = {}",
                r.polarity, r.final_class.kind, r.switched, state
            );
            Ok(())
        }
        Command::PhaseDiagram(args) => {
            let (cfg, dir) = sweep_config(&args)?;
            let ku0 = cfg.sweep.axis(SweepParam::Ku0)?;
            let d = cfg.sweep.axis(SweepParam::D)?;
            let points = phase_diagram(&cfg.setup(), ku0, d, cfg.seed, cfg.sweep.workers)?;
            save(&dir, "phase_diagram.csv", &io::phase_csv(&points))
        }
        Command::DmiWindow(args) => {
            let (cfg, dir) = sweep_config(&args)?;
            let d = cfg.sweep.axis(SweepParam::D)?;
            let w = dmi_window(&cfg.setup(), d, cfg.sweep.workers)?;
            if !w.contiguous {
                log::warn!("deterministic D values are not contiguous; inspect dmi_runs.csv");
            }
            save(&dir, "dmi_window.csv", &io::dmi_window_csv(&w))?;
            save(&dir, "dmi_runs.csv", &io::dmi_runs_csv(&w))
        }
        Command::GradientCurve(args) => {
            let (cfg, dir) = sweep_config(&args)?;
            let axis = cfg
                .sweep
                .axis(SweepParam::Vb)
                .or_else(|_| cfg.sweep.axis(SweepParam::Beta))?;
            let points = gradient_curve(&cfg.setup(), axis, cfg.sweep.workers)?;
            save(&dir, "gradient_curve.csv", &io::gradient_csv(&points))
        }
    }
}
