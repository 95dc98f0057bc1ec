//! Lattice Chern number of magnetic Bloch bands (Fukui–Hatsugai–Suzuki plaquette
//! method), written against the momentum-space Hamiltonian only.

use faer::{Mat, Side};
use fluxindex::linalg::c64;

/// Magnetic Bloch Hamiltonian of the Landau-gauge Hofstadter model with flux `p/q`:
/// one unit cell holds `q` sites along direction 2.
pub fn bloch_hamiltonian(p: i64, q: i64, t: f64, k1: f64, k2: f64) -> Mat<c64> {
    let q = q as usize;
    let alpha = p as f64 / q as f64;
    let mut h = Mat::<c64>::zeros(q, q);
    for m in 0..q {
        let phi = std::f64::consts::TAU * alpha * m as f64;
        h[(m, m)] += c64::new(-2.0 * t * (k1 - phi).cos(), 0.0);
    }
    if q == 1 {
        h[(0, 0)] += c64::new(-2.0 * t * k2.cos(), 0.0);
        return h;
    }
    for m in 0..q - 1 {
        h[(m + 1, m)] += c64::new(-t, 0.0);
        h[(m, m + 1)] += c64::new(-t, 0.0);
    }
    h[(0, q - 1)] += c64::cis(-k2) * (-t);
    h[(q - 1, 0)] += c64::cis(k2) * (-t);
    h
}

/// Chern number of the lowest `bands` bands on an `n × n` momentum grid.
pub fn chern_number(p: i64, q: i64, bands: usize, n: usize) -> f64 {
    let tau = std::f64::consts::TAU;
    let states: Vec<Vec<Mat<c64>>> = (0..n)
        .map(|a| {
            (0..n)
                .map(|b| {
                    let h = bloch_hamiltonian(p, q, 1.0, tau * a as f64 / n as f64, tau * b as f64 / n as f64);
                    let e = h.self_adjoint_eigen(Side::Lower).unwrap();
                    e.U().get(.., 0..bands).to_owned()
                })
                .collect()
        })
        .collect();
    let link = |a: &Mat<c64>, b: &Mat<c64>| {
        let d = (a.adjoint() * b).determinant();
        d / d.norm()
    };
    let mut total = 0.0;
    for a in 0..n {
        for b in 0..n {
            let u00 = &states[a][b];
            let u10 = &states[(a + 1) % n][b];
            let u11 = &states[(a + 1) % n][(b + 1) % n];
            let u01 = &states[a][(b + 1) % n];
            let w = link(u00, u10) * link(u10, u11) * link(u11, u01) * link(u01, u00);
            total += w.arg();
        }
    }
    total / tau
}
