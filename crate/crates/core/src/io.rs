//! CSV tables and OVF 2.0 text snapshots.
//!
//! Floats are written with Rust's shortest round-trip formatting, so reading a
//! file back gives the same bits.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::mesh::{Mesh, VectorField};
use crate::protocol::{TraceSample, WriteResult};
use crate::sweeps::{DmiWindow, GradientPoint, PhasePoint};
use crate::texture::TextureClass;
use crate::vec3::Vec3;

/// Shortest round-trip decimal; exponent form outside `[1e-4, 1e6)`.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || (1e-4..1e6).contains(&a) || !a.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn opt_sign(v: Option<i8>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Header plus rows, comma separated, newline terminated.
pub fn csv_table(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for r in rows {
        s.push_str(&r.join(","));
        s.push('\n');
    }
    s
}

pub const TRACE_HEADER: [&str; 7] = ["t_s", "mx", "my", "mz", "J_A_per_m2", "V_volts", "E_J"];

pub fn trace_csv(trace: &[TraceSample]) -> String {
    csv_table(
        &TRACE_HEADER,
        trace.iter().map(|s| {
            vec![
                num(s.t),
                num(s.m.x),
                num(s.m.y),
                num(s.m.z),
                num(s.current_density),
                num(s.voltage),
                num(s.energy),
            ]
        }),
    )
}

pub fn write_result_csv(r: &WriteResult) -> String {
    let c = &r.final_class;
    csv_table(
        &[
            "polarity",
            "final_kind",
            "mz",
            "Q",
            "selected",
            "switched",
            "recovery_time_s",
            "release_time_s",
        ],
        [vec![
            r.polarity.to_string(),
            c.kind.to_string(),
            num(c.mz),
            num(c.charge),
            opt_sign(r.selected),
            r.switched.to_string(),
            opt(r.recovery_time),
            num(r.release_time),
        ]],
    )
}

pub fn relax_csv(class: &TextureClass, energy: f64, max_torque: f64, converged: bool, t: f64) -> String {
    csv_table(
        &["kind", "mz", "uniformity", "Q", "bands_x", "bands_y", "E_J", "max_torque_T", "converged", "t_s"],
        [vec![
            class.kind.to_string(),
            num(class.mz),
            num(class.uniformity),
            num(class.charge),
            class.bands_x.to_string(),
            class.bands_y.to_string(),
            num(energy),
            num(max_torque),
            converged.to_string(),
            num(t),
        ]],
    )
}

pub fn energy_history_csv(history: &[f64]) -> String {
    csv_table(
        &["step", "E_J"],
        history.iter().enumerate().map(|(i, e)| vec![i.to_string(), num(*e)]),
    )
}

pub fn phase_csv(points: &[PhasePoint]) -> String {
    csv_table(
        &["Ku0_J_per_m3", "D_J_per_m2", "kind", "mz", "Q", "E_J", "converged", "start"],
        points.iter().map(|p| {
            vec![
                num(p.ku0),
                num(p.d),
                p.kind.to_string(),
                num(p.mz),
                num(p.charge),
                num(p.energy),
                p.converged.to_string(),
                p.start.as_str().to_string(),
            ]
        }),
    )
}

/// One row per `D`: both starts must switch for a polarity to count.
pub fn dmi_window_csv(w: &DmiWindow) -> String {
    csv_table(
        &[
            "D_J_per_m2",
            "switched_pos",
            "switched_neg",
            "kind_pos",
            "kind_neg",
            "recovery_time_pos_s",
            "recovery_time_neg_s",
            "deterministic",
        ],
        w.points.iter().map(|p| {
            let of = |sign: char| {
                p.runs
                    .iter()
                    .filter(move |r| r.polarity.to_string().starts_with(sign))
            };
            let switched = |sign| of(sign).all(|r| r.switched).to_string();
            let kinds = |sign| {
                let mut k: Vec<String> = of(sign).map(|r| r.kind.to_string()).collect();
                k.dedup();
                k.join("|")
            };
            let rec = |sign| {
                let t: Option<Vec<f64>> = of(sign).map(|r| r.recovery_time).collect();
                opt(t.map(|t| t.into_iter().fold(f64::NEG_INFINITY, f64::max)))
            };
            vec![
                num(p.d),
                switched('+'),
                switched('-'),
                kinds('+'),
                kinds('-'),
                rec('+'),
                rec('-'),
                p.deterministic.to_string(),
            ]
        }),
    )
}

/// One row per write in the window matrix.
pub fn dmi_runs_csv(w: &DmiWindow) -> String {
    csv_table(
        &["D_J_per_m2", "polarity", "start", "kind", "mz", "selected", "switched", "recovery_time_s"],
        w.points.iter().flat_map(|p| {
            p.runs.iter().map(move |r| {
                vec![
                    num(p.d),
                    r.polarity.to_string(),
                    if r.start_up { "up" } else { "down" }.to_string(),
                    r.kind.to_string(),
                    num(r.mz),
                    opt_sign(r.selected),
                    r.switched.to_string(),
                    opt(r.recovery_time),
                ]
            })
        }),
    )
}

pub fn gradient_csv(points: &[GradientPoint]) -> String {
    csv_table(
        &[
            "mean_gradient_J_per_m4",
            "V_volts",
            "beta_J_per_V_m2",
            "kind",
            "switched",
            "recovery_time_s",
        ],
        points.iter().map(|p| {
            vec![
                num(p.mean_gradient),
                num(p.voltage),
                num(p.beta),
                p.kind.to_string(),
                p.switched.to_string(),
                opt(p.recovery_time),
            ]
        }),
    )
}

/// A magnetization snapshot as read from an OVF file.
#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub ms: f64,
    pub m: VectorField,
}

/// OVF 2.0 text rendering. Cells are listed x fastest, then y, then z.
pub fn ovf_string(m: &VectorField, t: f64, ms: f64) -> String {
    let mesh = m.mesh;
    let mut s = String::new();
    let mut h = |line: String| {
        s.push_str("# ");
        s.push_str(&line);
        s.push('\n');
    };
    h("OOMMF OVF 2.0".into());
    h("Segment count: 1".into());
    h("Begin: Segment".into());
    h("Begin: Header".into());
    h("Title: m".into());
    h(format!("Desc: Total simulation time: {} s", num(t)));
    h(format!("Desc: Ms: {} A/m", num(ms)));
    h("Desc: Cell order: row-major, x fastest, then y, then z".into());
    h("meshtype: rectangular".into());
    h("meshunit: m".into());
    for (a, n, d) in [("x", mesh.nx, mesh.dx), ("y", mesh.ny, mesh.dy), ("z", mesh.nz, mesh.dz)] {
        h(format!("{a}min: 0"));
        h(format!("{a}max: {}", num(n as f64 * d)));
    }
    for (a, d) in [("x", mesh.dx), ("y", mesh.dy), ("z", mesh.dz)] {
        h(format!("{a}base: {}", num(0.5 * d)));
    }
    for (a, d) in [("x", mesh.dx), ("y", mesh.dy), ("z", mesh.dz)] {
        h(format!("{a}stepsize: {}", num(d)));
    }
    for (a, n) in [("x", mesh.nx), ("y", mesh.ny), ("z", mesh.nz)] {
        h(format!("{a}nodes: {n}"));
    }
    h("valuedim: 3".into());
    h("valuelabels: m_x m_y m_z".into());
    h("valueunits: 1 1 1".into());
    h("End: Header".into());
    h("Begin: Data Text".into());
    for v in &m.data {
        writeln!(s, "{} {} {}", num(v.x), num(v.y), num(v.z)).expect("write to string");
    }
    s.push_str("# End: Data Text\n# End: Segment\n");
    s
}

pub fn write_ovf(path: &Path, m: &VectorField, t: f64, ms: f64) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    fs::write(path, ovf_string(m, t, ms))?;
    Ok(())
}

fn parse_num<T: std::str::FromStr>(key: &str, text: &str) -> Result<T> {
    text.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("OVF header {key}: cannot parse {text:?}")))
}

/// Parses the text produced by [`ovf_string`] (OVF 2.0, text data, 3 components).
pub fn parse_ovf(text: &str) -> Result<Snapshot> {
    let mut header: HashMap<String, String> = HashMap::new();
    let mut t = None;
    let mut ms = None;
    let mut data = Vec::new();
    let mut in_data = false;
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some("# OOMMF OVF 2.0") {
        return Err(Error::Parse("not an OVF 2.0 file".into()));
    }
    for line in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let rest = rest.trim();
            match rest {
                "Begin: Data Text" => in_data = true,
                "End: Data Text" => in_data = false,
                _ if rest.starts_with("Begin: Data") => {
                    return Err(Error::Parse(format!("unsupported data block: {rest}")))
                }
                _ => {
                    if let Some((k, v)) = rest.split_once(':') {
                        let (k, v) = (k.trim(), v.trim());
                        if k == "Desc" {
                            if let Some(x) = v.strip_prefix("Total simulation time:") {
                                t = Some(parse_num::<f64>("t", x.trim().trim_end_matches('s'))?);
                            } else if let Some(x) = v.strip_prefix("Ms:") {
                                ms = Some(parse_num::<f64>("Ms", x.trim().trim_end_matches("A/m"))?);
                            }
                        } else {
                            header.insert(k.to_lowercase(), v.to_string());
                        }
                    }
                }
            }
            continue;
        }
        if !in_data {
            return Err(Error::Parse(format!("data outside the data block: {line:?}")));
        }
        let c: Vec<f64> = line
            .split_whitespace()
            .map(|x| parse_num("data", x))
            .collect::<Result<_>>()?;
        if c.len() != 3 {
            return Err(Error::Parse(format!("expected 3 components, got {line:?}")));
        }
        data.push(Vec3::new(c[0], c[1], c[2]));
    }
    let get = |k: &str| {
        header
            .get(k)
            .ok_or_else(|| Error::Parse(format!("OVF header is missing {k}")))
    };
    if get("valuedim")?.as_str() != "3" {
        return Err(Error::Parse("valuedim must be 3".into()));
    }
    let mesh = Mesh::new(
        parse_num("xnodes", get("xnodes")?)?,
        parse_num("ynodes", get("ynodes")?)?,
        parse_num("znodes", get("znodes")?)?,
        parse_num("xstepsize", get("xstepsize")?)?,
        parse_num("ystepsize", get("ystepsize")?)?,
        parse_num("zstepsize", get("zstepsize")?)?,
    )?;
    Ok(Snapshot {
        t: t.ok_or_else(|| Error::Parse("OVF header is missing the simulation time".into()))?,
        ms: ms.ok_or_else(|| Error::Parse("OVF header is missing Ms".into()))?,
        m: VectorField::from_data(mesh, data)?,
    })
}

pub fn read_ovf(path: &Path) -> Result<Snapshot> {
    parse_ovf(&fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sweeps::random_state;

    #[test]
    fn uniform_state_rows() {
        let m = VectorField::uniform(Mesh::default(), Vec3::Z);
        let s = ovf_string(&m, 0.0, 1.1e6);
        let rows: Vec<&str> = s.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(rows.len(), 400);
        assert!(rows.iter().all(|r| *r == "0 0 1"));
        assert!(s.contains("# xnodes: 20\n# ynodes: 20\n# znodes: 1\n"));
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let mesh = Mesh::new(7, 5, 1, 1.3e-9, 0.7e-9, 1e-9).unwrap();
        let m = random_state(mesh, 3, 0);
        let t = 1.234567890123e-9;
        let back = parse_ovf(&ovf_string(&m, t, 1.1e6)).unwrap();
        assert_eq!(back.m.mesh, mesh);
        assert_eq!(back.t.to_bits(), t.to_bits());
        assert_eq!(back.ms, 1.1e6);
        for (a, b) in m.data.iter().zip(&back.m.data) {
            for k in 0..3 {
                assert_eq!(a.component(k).to_bits(), b.component(k).to_bits());
            }
        }
    }

    #[test]
    fn node_order_is_x_fastest() {
        let mesh = Mesh::new(3, 2, 1, 1e-9, 1e-9, 1e-9).unwrap();
        let m = VectorField::from_fn(mesh, |i| Vec3::new(i as f64, 0.0, 0.0));
        let s = ovf_string(&m, 0.0, 1.0);
        let xs: Vec<&str> = s
            .lines()
            .filter(|l| !l.starts_with('#'))
            .map(|l| l.split(' ').next().unwrap())
            .collect();
        assert_eq!(xs, ["0", "1", "2", "3", "4", "5"]);
        assert_eq!(m.data[mesh.index(1, 1, 0)].x, 4.0);
    }

    #[test]
    fn malformed_ovf_rejected() {
        assert!(parse_ovf("hello").is_err());
        let m = VectorField::uniform(Mesh::square(2, 2, 1e-9).unwrap(), Vec3::Z);
        let good = ovf_string(&m, 0.0, 1.0);
        let short = good.replacen("0 0 1\n", "", 1);
        assert!(matches!(parse_ovf(&short), Err(Error::LengthMismatch { .. })));
        let bad = good.replacen("0 0 1\n", "0 0\n", 1);
        assert!(parse_ovf(&bad).is_err());
    }

    #[test]
    fn number_format_round_trips() {
        for x in [0.0, -0.0, 1.0, 0.165, 1e-4, 9.9999e-5, 1.5e12, -2.5e-19, 123456.789, f64::MIN_POSITIVE] {
            let s = num(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
        }
        assert_eq!(num(1e6), "1e6");
        assert_eq!(num(0.5), "0.5");
    }

    #[test]
    fn csv_has_unit_header() {
        let s = trace_csv(&[TraceSample {
            t: 1e-12,
            m: Vec3::Z,
            current_density: 1.5e12,
            voltage: 0.165,
            energy: -1e-19,
        }]);
        assert_eq!(s, "t_s,mx,my,mz,J_A_per_m2,V_volts,E_J\n1e-12,0,0,1,1.5e12,0.165,-1e-19\n");
    }
}
