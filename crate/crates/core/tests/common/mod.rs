#![allow(dead_code)]

use lvamtj::field::{field_terms, total_energy, Energy};
use lvamtj::materials::MaterialParams;
use lvamtj::mesh::{ScalarField, VectorField};

/// Energy term selector.
pub type Term = fn(&Energy) -> f64;

pub const TERMS: [(&str, Term); 3] = [
    ("exchange", |e| e.exchange),
    ("dmi", |e| e.dmi),
    ("anisotropy", |e| e.anisotropy),
];

/// `-(1/(Ms V)) dE/dm_i` by central differences of step `h` per component.
pub fn fd_field(m: &VectorField, k: &ScalarField, p: &MaterialParams, term: Term, h: f64) -> VectorField {
    let scale = -1.0 / (p.ms * m.mesh.cell_volume());
    let mut work = m.clone();
    let mut out = VectorField::zeros(m.mesh);
    for i in 0..m.len() {
        for c in 0..3 {
            let orig = work.data[i].component(c);
            *work.data[i].component_mut(c) = orig + h;
            let ep = term(&total_energy(&work, k, p));
            *work.data[i].component_mut(c) = orig - h;
            let em = term(&total_energy(&work, k, p));
            *work.data[i].component_mut(c) = orig;
            *out.data[i].component_mut(c) = scale * (ep - em) / (2.0 * h);
        }
    }
    out
}

/// `max |a - b| / max |b|` over all cells and components.
pub fn rel_max_err(a: &VectorField, b: &VectorField) -> f64 {
    let diff = a
        .data
        .iter()
        .zip(&b.data)
        .map(|(x, y)| (*x - *y).max_abs())
        .fold(0.0, f64::max);
    diff / b.max_abs().max(f64::MIN_POSITIVE)
}

/// Worst relative error of the analytic exchange, DMI and anisotropy fields
/// against finite differences of their energies.
pub fn worst_fd_error(m: &VectorField, k: &ScalarField, p: &MaterialParams) -> (f64, &'static str) {
    let terms = field_terms(m, k, p);
    let analytic = [&terms.exchange, &terms.dmi, &terms.anisotropy];
    TERMS
        .iter()
        .zip(analytic)
        .map(|((name, t), b)| (rel_max_err(&fd_field(m, k, p, *t, 1e-6), b), *name))
        .fold((0.0, ""), |acc, x| if x.0 > acc.0 { x } else { acc })
}
