//! Dense complex linear algebra helpers on top of `faer`.

use faer::linalg::matmul::matmul;
use faer::{Accum, Mat, MatRef, Par, Side};

use crate::error::{Error, Result};

pub use faer::c64;

pub const ZERO: c64 = c64 { re: 0.0, im: 0.0 };
pub const ONE: c64 = c64 { re: 1.0, im: 0.0 };
pub const I: c64 = c64 { re: 0.0, im: 1.0 };

/// Spectral decomposition `A = V diag(values) V†` of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct Eigh {
    /// Eigenvalues in ascending order.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns.
    pub vectors: Mat<c64>,
}

impl Eigh {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `f(A) = V diag(f(λ)) V†`.
    pub fn map(&self, f: impl Fn(f64) -> c64) -> Mat<c64> {
        let n = self.dim();
        let fv: Vec<c64> = self.values.iter().map(|&x| f(x)).collect();
        let scaled = Mat::from_fn(n, n, |i, j| self.vectors[(i, j)] * fv[j]);
        &scaled * self.vectors.adjoint()
    }

    /// `e^{iθA}`.
    pub fn exp_i(&self, theta: f64) -> Mat<c64> {
        self.map(|x| c64::cis(theta * x))
    }

    /// `f(A) X` without forming `f(A)`; cheap when `X` has few columns.
    pub fn map_apply(&self, f: impl Fn(f64) -> c64, x: MatRef<c64>) -> Mat<c64> {
        let mut y = self.vectors.adjoint() * x;
        for (i, &lam) in self.values.iter().enumerate() {
            let s = f(lam);
            for j in 0..y.ncols() {
                y[(i, j)] *= s;
            }
        }
        &self.vectors * &y
    }

    /// `e^{iθA} X`.
    pub fn exp_i_apply(&self, theta: f64, x: MatRef<c64>) -> Mat<c64> {
        self.map_apply(|v| c64::cis(theta * v), x)
    }
}

/// Eigendecomposition of a Hermitian matrix (lower triangle is read).
pub fn eigh(a: MatRef<c64>) -> Result<Eigh> {
    let e = a
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Numerical(format!("hermitian eigensolver: {e:?}")))?;
    let values = e.S().column_vector().iter().map(|x| x.re).collect();
    Ok(Eigh {
        values,
        vectors: e.U().to_owned(),
    })
}

/// Ascending eigenvalues of a Hermitian matrix.
pub fn eigvalsh(a: MatRef<c64>) -> Result<Vec<f64>> {
    a.self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Numerical(format!("hermitian eigensolver: {e:?}")))
}

/// Largest singular value.
pub fn spectral_norm(a: MatRef<c64>) -> f64 {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0.0;
    }
    // For tall matrices the Gram matrix is much cheaper than a full SVD.
    if a.nrows() > 4 * a.ncols() {
        let g = a.adjoint() * a;
        return eigvalsh(g.as_ref())
            .map(|v| v.last().copied().unwrap_or(0.0).max(0.0).sqrt())
            .unwrap_or(f64::NAN);
    }
    if a.ncols() > 4 * a.nrows() {
        return spectral_norm(a.adjoint().to_owned().as_ref());
    }
    a.singular_values()
        .map(|s| s.first().copied().unwrap_or(0.0))
        .unwrap_or(f64::NAN)
}

/// Frobenius norm, an upper bound on the spectral norm.
pub fn frobenius(a: MatRef<c64>) -> f64 {
    a.norm_l2()
}

/// `‖A − A†‖_F`.
pub fn hermiticity_defect(a: MatRef<c64>) -> f64 {
    let n = a.nrows();
    let mut s = 0.0;
    for j in 0..n {
        for i in 0..=j {
            let d = a[(i, j)] - a[(j, i)].conj();
            s += if i == j { d.norm_sqr() } else { 2.0 * d.norm_sqr() };
        }
    }
    s.sqrt()
}

/// `‖U†U − 1‖_F`.
pub fn unitarity_defect(u: MatRef<c64>) -> f64 {
    let g = u.adjoint() * u;
    let n = g.nrows();
    let mut s = 0.0;
    for j in 0..n {
        for i in 0..n {
            let d = if i == j { g[(i, j)] - ONE } else { g[(i, j)] };
            s += d.norm_sqr();
        }
    }
    s.sqrt()
}

pub fn trace(a: MatRef<c64>) -> c64 {
    (0..a.nrows().min(a.ncols())).map(|i| a[(i, i)]).sum()
}

pub fn identity(n: usize) -> Mat<c64> {
    Mat::identity(n, n)
}

pub fn scaled(a: MatRef<c64>, s: c64) -> Mat<c64> {
    faer::Scale(s) * a
}

/// `(A + A†)/2`.
pub fn hermitian_part(a: MatRef<c64>) -> Mat<c64> {
    let n = a.nrows();
    Mat::from_fn(n, n, |i, j| (a[(i, j)] + a[(j, i)].conj()) * 0.5)
}

/// `AB − BA`.
pub fn commutator(a: MatRef<c64>, b: MatRef<c64>) -> Mat<c64> {
    let mut c = a * b;
    matmul(c.as_mut(), Accum::Add, b, a, -ONE, Par::Seq);
    c
}

/// `diag(d) A`.
pub fn diag_left(d: &[c64], a: MatRef<c64>) -> Mat<c64> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| d[i] * a[(i, j)])
}

/// `A diag(d)`.
pub fn diag_right(a: MatRef<c64>, d: &[c64]) -> Mat<c64> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] * d[j])
}

/// Projector `ΨΨ†` onto the column span of an isometry.
pub fn projector(psi: MatRef<c64>) -> Mat<c64> {
    psi * psi.adjoint()
}

/// `(1 − ΨΨ†) X` for an isometry `Ψ`.
pub fn complement_apply(psi: MatRef<c64>, x: MatRef<c64>) -> Mat<c64> {
    let overlap = psi.adjoint() * x;
    let mut y = x.to_owned();
    matmul(y.as_mut(), Accum::Add, psi, overlap.as_ref(), -ONE, Par::Seq);
    y
}

/// `‖[A, P]‖` for `P = ΨΨ†`, given `AΨ` and `A†Ψ`.
///
/// `[A, P]` is block off-diagonal with respect to `ran P ⊕ ker P`, so its
/// norm is the larger of `‖(1−P)AΨ‖` and `‖(1−P)A†Ψ‖`.
pub fn projector_commutator_norm_from(
    psi: MatRef<c64>,
    a_psi: MatRef<c64>,
    adj_a_psi: MatRef<c64>,
) -> f64 {
    let l = spectral_norm(complement_apply(psi, a_psi).as_ref());
    let r = spectral_norm(complement_apply(psi, adj_a_psi).as_ref());
    l.max(r)
}

/// `‖[A, P]‖` for a dense `A` and `P = ΨΨ†`.
pub fn projector_commutator_norm(a: MatRef<c64>, psi: MatRef<c64>) -> f64 {
    let a_psi = a * psi;
    let adj_a_psi = a.adjoint() * psi;
    projector_commutator_norm_from(psi, a_psi.as_ref(), adj_a_psi.as_ref())
}

/// Re-orthonormalize columns (modified Gram–Schmidt, two passes).
pub fn orthonormalize(x: &mut Mat<c64>) -> Result<()> {
    let (n, m) = (x.nrows(), x.ncols());
    for j in 0..m {
        for _ in 0..2 {
            for k in 0..j {
                let ov: c64 = (0..n).map(|i| x[(i, k)].conj() * x[(i, j)]).sum();
                for i in 0..n {
                    let v = x[(i, k)];
                    x[(i, j)] -= ov * v;
                }
            }
        }
        let nrm = (0..n).map(|i| x[(i, j)].norm_sqr()).sum::<f64>().sqrt();
        if nrm < 1e-300 {
            return Err(Error::Numerical("linearly dependent columns".into()));
        }
        for i in 0..n {
            x[(i, j)] /= nrm;
        }
    }
    Ok(())
}

/// Newton–Schulz polar iteration; pulls a nearly unitary matrix onto the unitary group.
pub fn unitarize(u: &Mat<c64>, iterations: usize) -> Mat<c64> {
    let n = u.nrows();
    let mut x = u.clone();
    for _ in 0..iterations {
        let g = x.adjoint() * &x;
        let m = Mat::from_fn(n, n, |i, j| {
            let id = if i == j { 3.0 } else { 0.0 };
            (c64::new(id, 0.0) - g[(i, j)]) * 0.5
        });
        x = &x * &m;
    }
    x
}

/// Spectral norm of a Hermitian matrix from its eigenvalues.
pub fn hermitian_norm(a: MatRef<c64>) -> Result<f64> {
    Ok(eigvalsh(a)?.iter().fold(0.0f64, |m, v| m.max(v.abs())))
}

/// `e^{iθA}` for Hermitian `A` (only the lower triangle is read).
pub fn expm_i(a: MatRef<c64>, theta: f64) -> Result<Mat<c64>> {
    Ok(eigh(a)?.exp_i(theta))
}

/// `‖XX† − YY†‖` through the `2k×2k` Gram matrix of `[X Y]`.
pub fn outer_difference_norm(x: MatRef<c64>, y: MatRef<c64>) -> Result<f64> {
    let k = x.ncols() + y.ncols();
    let m = Mat::from_fn(x.nrows(), k, |i, j| if j < x.ncols() { x[(i, j)] } else { y[(i, j - x.ncols())] });
    let g = m.adjoint() * &m;
    let ge = eigh(g.as_ref())?;
    let root = ge.map(|v| c64::new(v.max(0.0).sqrt(), 0.0));
    let signed = Mat::from_fn(k, k, |i, j| if j < x.ncols() { root[(i, j)] } else { -root[(i, j)] });
    let s = &signed * &root;
    let vals = eigvalsh(hermitian_part(s.as_ref()).as_ref())?;
    Ok(vals.iter().fold(0.0f64, |a, v| a.max(v.abs())))
}

/// Wrap a real number into `[-1/2, 1/2)`.
pub fn wrap_half(x: f64) -> f64 {
    x - (x + 0.5).floor()
}

/// Distance from `x` to the nearest integer.
pub fn dist_to_integer(x: f64) -> f64 {
    wrap_half(x).abs()
}

/// Distance from `x` to the lattice `ℤ/p`.
pub fn dist_to_fraction_lattice(x: f64, p: usize) -> f64 {
    let p = p.max(1) as f64;
    dist_to_integer(x * p) / p
}

/// Wrap an angle into `(-π, π]`.
pub fn wrap_angle(theta: f64) -> f64 {
    let two_pi = std::f64::consts::TAU;
    let mut t = theta % two_pi;
    if t <= -std::f64::consts::PI {
        t += two_pi;
    } else if t > std::f64::consts::PI {
        t -= two_pi;
    }
    t
}
