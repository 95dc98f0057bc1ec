//! Frequency-domain weights for quasi-adiabatic generators.
//!
//! A generator `K = ∫dt W(t) e^{itH} A e^{−itH}` is evaluated in an exact energy
//! eigenbasis, where it becomes a Hadamard product with a weight depending on the
//! energy difference `ω = E_m − E_n`.

use faer::{Mat, MatRef};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c64, ZERO};
use crate::sparse::SparseMatrix;

/// Interpolation profile `h: [0,1] → [0,1]` used inside the gap.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterProfile {
    /// `x²(3 − 2x)`, C¹ at the gap edge.
    #[default]
    Smoothstep,
    /// `x³(10 − 15x + 6x²)`, C² at the gap edge.
    Smootherstep,
    /// `f(x)/(f(x) + f(1−x))` with `f(x) = e^{−1/x}`: flat at both ends, so `W(t)`
    /// decays faster than any power.
    Bump,
}

impl FilterProfile {
    fn eval(self, x: f64) -> f64 {
        if x >= 1.0 {
            return 1.0;
        }
        match self {
            FilterProfile::Smoothstep => x * x * (3.0 - 2.0 * x),
            FilterProfile::Smootherstep => x * x * x * (10.0 - 15.0 * x + 6.0 * x * x),
            FilterProfile::Bump => {
                if x <= 0.0 {
                    return 0.0;
                }
                let f = |y: f64| (-1.0 / y).exp();
                f(x) / (f(x) + f(1.0 - x))
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FilterFunction {
    gap: f64,
    profile: FilterProfile,
}

pub fn make_filter(gap: f64) -> Result<FilterFunction> {
    make_filter_with_profile(gap, FilterProfile::default())
}

pub fn make_filter_with_profile(gap: f64, profile: FilterProfile) -> Result<FilterFunction> {
    if !(gap > 0.0 && gap.is_finite()) {
        return Err(Error::InvalidFilter(format!("gap must be positive and finite, got {gap}")));
    }
    Ok(FilterFunction { gap, profile })
}

impl FilterFunction {
    pub fn gap(&self) -> f64 {
        self.gap
    }

    pub fn profile(&self) -> FilterProfile {
        self.profile
    }

    /// Dimensionless weight `g(ω) = h(|ω|/γ)`; even, 0 at the origin, 1 outside the gap.
    pub fn weight(&self, omega: f64) -> f64 {
        self.profile.eval(omega.abs() / self.gap)
    }

    /// Weight applied to a current matrix element: `i·g(ω)/ω`, with 0 at `ω = 0`.
    ///
    /// A current `i[Q,H]` has elements `−iω Q_mn`, so this weight maps it to
    /// `g(ω) Q_mn`, which equals `Q_mn` across the gap.
    pub fn current_weight(&self, omega: f64) -> c64 {
        if omega == 0.0 {
            return ZERO;
        }
        c64::new(0.0, self.weight(omega) / omega)
    }
}

/// `K_mn = g(E_m − E_n) Q_mn` with `Q` given in the eigenbasis. Elements inside the
/// leading `ground` block are set to zero.
pub fn filter_in_eigenbasis(
    f: &FilterFunction,
    energies: &[f64],
    q_eig: MatRef<c64>,
    ground: usize,
) -> Result<Mat<c64>> {
    let n = energies.len();
    if q_eig.nrows() != n || q_eig.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: q_eig.nrows(),
        });
    }
    Ok(Mat::from_fn(n, n, |m, k| {
        if m < ground && k < ground {
            ZERO
        } else {
            q_eig[(m, k)] * f.weight(energies[m] - energies[k])
        }
    }))
}

/// Filters a local operator given in the site basis and returns the result in the site
/// basis: `V (ŵ ∘ V†AV) V†`, where `V` holds the eigenvectors (all of them, or a
/// low-energy window) as columns.
pub fn filter_local_term(
    f: &FilterFunction,
    energies: &[f64],
    vectors: MatRef<c64>,
    a: &SparseMatrix,
    ground: usize,
) -> Result<Mat<c64>> {
    let eig = filter_local_term_eigenbasis(f, energies, vectors, a, ground)?;
    let tmp = vectors * &eig;
    Ok(&tmp * vectors.adjoint())
}

/// Same as [`filter_local_term`] but returns the filtered operator in the eigenbasis.
pub fn filter_local_term_eigenbasis(
    f: &FilterFunction,
    energies: &[f64],
    vectors: MatRef<c64>,
    a: &SparseMatrix,
    ground: usize,
) -> Result<Mat<c64>> {
    let m = energies.len();
    if vectors.ncols() != m || vectors.nrows() != a.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: vectors.nrows(),
        });
    }
    let av = a.mul_dense(vectors);
    let mut eig = vectors.adjoint() * &av;
    for k in 0..m {
        for r in 0..m {
            eig[(r, k)] = if r < ground && k < ground {
                ZERO
            } else {
                eig[(r, k)] * f.current_weight(energies[r] - energies[k])
            };
        }
    }
    Ok(eig)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{commutator, eigh, frobenius, hermiticity_defect, hermitian_part, projector, spectral_norm};

    #[test]
    fn weight_values() {
        let f = make_filter(1.0).unwrap();
        assert_eq!(f.weight(2.0), 1.0);
        assert_eq!(f.weight(0.0), 0.0);
        assert!((f.weight(0.5) - 0.5).abs() < 1e-15);
        assert_eq!(f.weight(-0.3), f.weight(0.3));
        assert!(make_filter(0.0).is_err());
        assert!(make_filter(-1.0).is_err());
    }

    #[test]
    fn profiles_are_monotone_and_bounded() {
        for p in [FilterProfile::Smoothstep, FilterProfile::Smootherstep] {
            let f = make_filter_with_profile(1.0, p).unwrap();
            let mut prev = 0.0;
            for k in 0..=200 {
                let w = f.weight(k as f64 / 100.0);
                assert!((0.0..=1.0).contains(&w));
                assert!(w >= prev);
                prev = w;
            }
        }
    }

    #[test]
    fn two_level_eigenbasis_filter() {
        let f = make_filter(1.0).unwrap();
        let q = Mat::from_fn(2, 2, |i, j| if i != j { c64::new(1.0, 0.0) } else { ZERO });
        let k = filter_in_eigenbasis(&f, &[0.0, 2.0], q.as_ref(), 1).unwrap();
        assert_eq!(k[(0, 1)], c64::new(1.0, 0.0));
        assert_eq!(k[(1, 0)], c64::new(1.0, 0.0));
        assert_eq!(k[(0, 0)], ZERO);
        assert_eq!(k[(1, 1)], ZERO);
    }

    #[test]
    fn two_level_local_term() {
        let gamma = 0.7;
        let f = make_filter(gamma).unwrap();
        let a = SparseMatrix::from_triplets(
            2,
            vec![(0, 1, c64::new(0.0, 1.0)), (1, 0, c64::new(0.0, -1.0))],
        );
        let id = Mat::<c64>::identity(2, 2);
        let k = filter_local_term(&f, &[0.0, 2.0 * gamma], id.as_ref(), &a, 1).unwrap();
        assert!((k[(0, 1)].norm() - 1.0 / (2.0 * gamma)).abs() < 1e-14);
        assert!((k[(1, 0)].norm() - 1.0 / (2.0 * gamma)).abs() < 1e-14);
        assert!(hermiticity_defect(k.as_ref()) < 1e-14);
    }

    #[test]
    fn filtered_current_reproduces_commutator_with_ground_projector() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let n = 8;
        let raw = Mat::from_fn(n, n, |_, _| c64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5));
        let h = hermitian_part(raw.as_ref());
        let e = eigh(h.as_ref()).unwrap();
        let gap = e.values[1] - e.values[0];
        let f = make_filter(gap).unwrap();
        let qd: Vec<f64> = (0..n).map(|i| (i % 3) as f64).collect();
        let q = Mat::from_fn(n, n, |i, j| if i == j { c64::new(qd[i], 0.0) } else { ZERO });
        let hs = SparseMatrix::from_triplets(
            n,
            (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| (i, j, h[(i, j)])).collect(),
        );
        let current = hs.diag_commutator(&qd);
        let k = filter_local_term(&f, &e.values, e.vectors.as_ref(), &current, 1).unwrap();
        let p = projector(e.vectors.get(.., 0..1));
        let lhs = commutator(k.as_ref(), p.as_ref());
        let rhs = commutator(q.as_ref(), p.as_ref());
        assert!(spectral_norm((&lhs - &rhs).as_ref()) < 1e-10);
        assert!(hermiticity_defect(k.as_ref()) < 1e-10);

        // the same through the direct eigenbasis route
        let q_eig = e.vectors.adjoint() * &q * &e.vectors;
        let k2 = filter_in_eigenbasis(&f, &e.values, q_eig.as_ref(), 1).unwrap();
        let k2 = &e.vectors * &k2 * e.vectors.adjoint();
        assert!(frobenius((&k - &k2).as_ref()) < 1e-10);
    }
}
