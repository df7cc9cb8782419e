use lvamtj::dynamics::{Integrator, Mode, SimState, Tolerances};
use lvamtj::materials::{DemagMode, DriveSegment, MaterialParams};
use lvamtj::mesh::{Mesh, ScalarField, VectorField};
use lvamtj::sweeps::random_state;
use lvamtj::Vec3;
use std::f64::consts::PI;

const B: f64 = 1.0;

fn macrospin(theta0: f64, alpha: f64) -> (SimState, MaterialParams) {
    let mesh = Mesh::square(1, 1, 1e-9).unwrap();
    let p = MaterialParams {
        alpha,
        zeeman: Vec3::new(0.0, 0.0, B),
        demag: DemagMode::Off,
        ..Default::default()
    };
    let m0 = Vec3::new(theta0.sin(), 0.0, theta0.cos());
    (SimState::new(VectorField::uniform(mesh, m0), ScalarField::uniform(mesh, 0.0)), p)
}

/// Polar angle from `tan(theta/2) = tan(theta0/2) exp(-gamma alpha B t / (1 + alpha^2))`.
fn damped_theta(theta0: f64, alpha: f64, gamma: f64, t: f64) -> f64 {
    2.0 * ((theta0 / 2.0).tan() * (-gamma * alpha * B * t / (1.0 + alpha * alpha)).exp()).atan()
}

/// Closed-form damped macrospin in a static field along z.
fn damped_m(theta0: f64, alpha: f64, gamma: f64, t: f64) -> Vec3 {
    let th = damped_theta(theta0, alpha, gamma, t);
    // Azimuth advances at gamma B / (1 + alpha^2) in the positive sense for m x B torque.
    let phi = gamma * B * t / (1.0 + alpha * alpha);
    Vec3::new(th.sin() * phi.cos(), th.sin() * phi.sin(), th.cos())
}

#[test]
fn undamped_precession_frequency() {
    let (mut s, p) = macrospin(0.5, 0.0);
    let mut integ = Integrator::new(Tolerances::default(), Mode::Full, 1);
    let period = 2.0 * PI / (p.gamma * B);
    let t_end = 100.0 * period;
    let mut phase = 0.0;
    let mut last = s.m.data[0].y.atan2(s.m.data[0].x);
    integ
        .advance_to(&mut s, &p, t_end, |st| {
            let a = st.m.data[0].y.atan2(st.m.data[0].x);
            let mut d = a - last;
            d -= 2.0 * PI * (d / (2.0 * PI)).round();
            phase += d;
            last = a;
        })
        .unwrap();
    let omega = phase.abs() / t_end;
    let rel = (omega - p.gamma * B).abs() / (p.gamma * B);
    assert!(rel < 1e-3, "omega off by {rel:e}");
    assert!(phase > 0.0, "m precesses counterclockwise about +B");
}

#[test]
fn undamped_energy_is_conserved() {
    let (mut s, p) = macrospin(0.5, 0.0);
    let e0 = s.energy(&p).total;
    let mut integ = Integrator::new(Tolerances::default(), Mode::Full, 1);
    let t_end = 100.0 * 2.0 * PI / (p.gamma * B);
    let mut worst = 0.0f64;
    integ
        .advance_to(&mut s, &p, t_end, |st| {
            worst = worst.max(((st.energy(&p).total - e0) / e0).abs());
        })
        .unwrap();
    assert!(worst < 1e-6, "relative energy drift {worst:e}");
}

#[test]
fn damped_matches_closed_form() {
    let theta0 = 1.0;
    let alpha = 0.1;
    let (mut s, p) = macrospin(theta0, alpha);
    let mut integ = Integrator::new(Tolerances::default(), Mode::Full, 1);
    integ.advance_to(&mut s, &p, 1e-9, |_| {}).unwrap();
    let exact = damped_m(theta0, alpha, p.gamma, 1e-9);
    let err = (s.m.data[0] - exact).max_abs();
    assert!(err < 1e-3, "error {err:e}");
}

#[test]
fn tighter_tolerance_converges() {
    let theta0 = 2.5;
    let alpha = 0.1;
    let err_at = |tol: f64| {
        let (mut s, p) = macrospin(theta0, alpha);
        let t = Tolerances { tol, max_dm: 1.0, ..Default::default() };
        let mut integ = Integrator::new(t, Mode::Full, 1);
        integ.advance_to(&mut s, &p, 0.3e-9, |_| {}).unwrap();
        (s.m.data[0] - damped_m(theta0, alpha, p.gamma, 0.3e-9)).max_abs()
    };
    let coarse = err_at(1e-4);
    let fine = err_at(0.5e-4);
    let finest = err_at(1e-8);
    assert!(coarse < 1e-2, "{coarse:e}");
    assert!(fine <= coarse, "{fine:e} > {coarse:e}");
    assert!(finest < 1e-6, "{finest:e}");
}

#[test]
fn steps_preserve_unit_norm() {
    let mesh = Mesh::square(8, 8, 1e-9).unwrap();
    let p = MaterialParams { dind: 2e-3, ..Default::default() };
    let mut s = SimState::new(random_state(mesh, 3, 0), ScalarField::uniform(mesh, p.ku0));
    s.drive = DriveSegment {
        duration: 1e-9,
        current_density: 1.5e12,
        current_dir: Vec3::X,
        voltage: 0.0,
    };
    let mut integ = Integrator::new(Tolerances::default(), Mode::Full, mesh.len());
    integ
        .advance_to(&mut s, &p, 20e-12, |st| {
            st.m.validate_unit_norm().unwrap();
        })
        .unwrap();
}

/// Rotation by 180 degrees about z: cell (ix, iy) -> (nx-1-ix, ny-1-iy), m -> (-mx, -my, mz).
fn rotate_pi(m: &VectorField) -> VectorField {
    let mesh = m.mesh;
    VectorField::from_fn(mesh, |i| {
        let (ix, iy, _) = mesh.coords(i);
        let v = m.data[mesh.index(mesh.nx - 1 - ix, mesh.ny - 1 - iy, 0)];
        Vec3::new(-v.x, -v.y, v.z)
    })
}

#[test]
fn reversed_current_mirrors_trajectory() {
    let mesh = Mesh::square(6, 6, 1e-9).unwrap();
    let p = MaterialParams::default();
    let k = ScalarField::uniform(mesh, p.ku0);
    let m0 = random_state(mesh, 11, 0);
    let run = |m: VectorField, dir: Vec3| {
        let mut s = SimState::new(m, k.clone());
        s.drive = DriveSegment {
            duration: 1e-9,
            current_density: 1.5e12,
            current_dir: dir,
            voltage: 0.0,
        };
        let mut integ = Integrator::new(Tolerances::default(), Mode::Full, mesh.len());
        integ.advance_to(&mut s, &p, 30e-12, |_| {}).unwrap();
        s.m
    };
    let forward = run(m0.clone(), Vec3::X);
    let reversed = run(rotate_pi(&m0), -Vec3::X);
    let expected = rotate_pi(&forward);
    for (a, b) in reversed.data.iter().zip(&expected.data) {
        assert!((*a - *b).max_abs() < 1e-9, "{a:?} vs {b:?}");
    }
}
