use lvamtj::dynamics::{relax, RelaxCriteria, SimState, Tolerances};
use lvamtj::materials::{anisotropy_map, MaterialParams, VcmaProfile};
use lvamtj::mesh::{Mesh, VectorField};
use lvamtj::sweeps::{phase_point, random_state, Setup};
use lvamtj::texture::{classify, TextureKind, Thresholds};
use lvamtj::Vec3;

fn tilted(mesh: Mesh) -> VectorField {
    let t = 5f64.to_radians();
    VectorField::uniform(mesh, Vec3::new(t.sin(), 0.0, t.cos()))
}

fn relax_from(m: VectorField, p: &MaterialParams) -> lvamtj::dynamics::RelaxOutcome {
    let k = anisotropy_map(p, &VcmaProfile::default(), m.mesh, 0.0).k;
    relax(&SimState::new(m, k), p, RelaxCriteria::default(), Tolerances::default()).unwrap()
}

#[test]
fn defaults_relax_to_uniform_up() {
    let out = relax_from(tilted(Mesh::default()), &MaterialParams::default());
    assert!(out.converged);
    let c = classify(&out.state.m, &Thresholds::default());
    assert_eq!(c.kind, TextureKind::UniformUp);
    assert!(c.uniformity > 0.95, "u = {}", c.uniformity);
}

#[test]
fn relaxation_never_raises_energy() {
    let mesh = Mesh::square(10, 10, 1e-9).unwrap();
    let p = MaterialParams { dind: 3e-3, ..Default::default() };
    let out = relax_from(random_state(mesh, 21, 0), &p);
    let h = &out.energy_history;
    assert!(h.len() > 10);
    for w in h.windows(2) {
        assert!(w[1] <= w[0] + 1e-12 * w[0].abs(), "{} -> {}", w[0], w[1]);
    }
    assert!(h.last().unwrap() < &h[0]);
    out.state.m.validate_unit_norm().unwrap();
}

#[test]
fn damping_rescales_time_but_not_the_outcome() {
    let mesh = Mesh::square(10, 10, 1e-9).unwrap();
    let th = Thresholds::default();
    let base = MaterialParams::default();
    let doubled = MaterialParams { alpha: 0.2, ..base.clone() };
    for seed in [1, 2] {
        let m0 = random_state(mesh, seed, 0);
        let a = classify(&relax_from(m0.clone(), &base).state.m, &th);
        let b = classify(&relax_from(m0, &doubled).state.m, &th);
        assert_eq!(a.kind, b.kind, "seed {seed}");
        assert!((a.mz - b.mz).abs() < 1e-2, "seed {seed}: {} vs {}", a.mz, b.mz);
    }
}

#[test]
fn operating_point_is_uniform() {
    let setup = Setup::default();
    let pt = phase_point(&setup, 8e5, 1e-3, 0, 0).unwrap();
    assert!(pt.kind.is_uniform(), "{pt:?}");
    let no_dmi = phase_point(&setup, 9e5, 0.0, 0, 1).unwrap();
    assert!(no_dmi.kind.is_uniform(), "{no_dmi:?}");
}
