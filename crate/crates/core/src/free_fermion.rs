//! One-particle index `tr[P(U†QU − Q)_−]`, dressed charges and the determinant chain
//! that forces it to be an integer.

use faer::{Mat, MatRef};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{HalfTorus, Region, Side, TorusLattice};
use crate::linalg::{self, c64, eigh, spectral_norm, ONE, ZERO};

/// A dense operator on the one-particle space `ℓ²(sites)`.
#[derive(Clone, Debug)]
pub struct OnePartOperator {
    pub matrix: Mat<c64>,
    pub support: Option<Region>,
}

impl OnePartOperator {
    pub fn new(matrix: Mat<c64>) -> Self {
        Self { matrix, support: None }
    }

    pub fn identity(n: usize) -> Self {
        Self::new(Mat::identity(n, n))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn as_ref(&self) -> MatRef<'_, c64> {
        self.matrix.as_ref()
    }

    /// `max(‖P² − P‖, ‖P† − P‖)` in Frobenius norm.
    pub fn projector_defect(&self) -> f64 {
        let p2 = &self.matrix * &self.matrix;
        linalg::frobenius((&p2 - &self.matrix).as_ref()).max(linalg::hermiticity_defect(self.as_ref()))
    }

    pub fn unitarity_defect(&self) -> f64 {
        linalg::unitarity_defect(self.as_ref())
    }

    pub fn rank(&self) -> usize {
        linalg::trace(self.as_ref()).re.round() as usize
    }
}

/// Spectral projector onto eigenvalues below `fermi_energy`.
pub fn fermi_projection(h: &OnePartOperator, fermi_energy: f64) -> Result<OnePartOperator> {
    let psi = occupied_states(h, fermi_energy)?;
    Ok(OnePartOperator::new(linalg::projector(psi.as_ref())))
}

/// Orthonormal eigenvectors with energy below `fermi_energy`, as columns.
pub fn occupied_states(h: &OnePartOperator, fermi_energy: f64) -> Result<Mat<c64>> {
    let dev = linalg::hermiticity_defect(h.as_ref());
    if dev > 1e-10 {
        return Err(Error::NotHermitian { deviation: dev });
    }
    let e = eigh(h.as_ref())?;
    let nearest = e.values.iter().map(|&x| (x - fermi_energy).abs()).fold(f64::INFINITY, f64::min);
    if nearest <= 1e-8 {
        return Err(Error::GapTooSmall {
            gap: nearest,
            tolerance: 1e-8,
        });
    }
    let rank = e.values.iter().filter(|&&x| x < fermi_energy).count();
    Ok(e.vectors.get(.., 0..rank).to_owned())
}

/// Fermi projection filling the lowest `rank` levels; the Fermi energy sits mid-gap.
pub fn lowest_band_projection(h: &OnePartOperator, rank: usize) -> Result<(OnePartOperator, f64, f64)> {
    let e = eigvals(h)?;
    if rank == 0 || rank >= e.len() {
        return Err(Error::InvalidModel(format!("cannot fill {rank} of {} levels", e.len())));
    }
    let gap = e[rank] - e[rank - 1];
    let ef = 0.5 * (e[rank] + e[rank - 1]);
    Ok((fermi_projection(h, ef)?, ef, gap))
}

fn eigvals(h: &OnePartOperator) -> Result<Vec<f64>> {
    linalg::eigvalsh(h.as_ref())
}

/// `1_Ω`.
pub fn charge_projector(t: &TorusLattice, r: &Region) -> OnePartOperator {
    let n = t.dim();
    let m = Mat::from_fn(n, n, |i, j| if i == j && r.contains(i) { ONE } else { ZERO });
    OnePartOperator {
        matrix: m,
        support: Some(r.clone()),
    }
}

/// Site translation `S e_j = e_{j+shift}`, the one-particle counterpart of the many-body
/// translation.
pub fn ff_translation(t: &TorusLattice, shift: (isize, isize)) -> OnePartOperator {
    let n = t.dim();
    OnePartOperator::new(Mat::from_fn(n, n, |i, j| if i == t.translate(j, shift) { ONE } else { ZERO }))
}

/// `Π O Π` with `Π` the projector onto the strip's sites.
pub fn restrict_to_strip(o: &OnePartOperator, strip: &Region) -> OnePartOperator {
    let n = o.dim();
    let m = Mat::from_fn(n, n, |i, j| {
        if strip.contains(i) && strip.contains(j) {
            o.matrix[(i, j)]
        } else {
            ZERO
        }
    });
    OnePartOperator {
        matrix: m,
        support: Some(strip.clone()),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FfIndex {
    pub value: f64,
    pub imaginary: f64,
    /// `‖[P, U]‖`.
    pub commutator: f64,
    /// `tr[P(U†QU − Q)]`, the total transport.
    pub total_transport: f64,
}

/// `U†QU − Q`.
fn transported(u: &OnePartOperator, q: &OnePartOperator) -> Mat<c64> {
    let uq = u.matrix.adjoint() * &q.matrix * &u.matrix;
    &uq - &q.matrix
}

/// `tr[P(U†QU − Q)_−]` with the restriction to the ∂_− strip of width `width`.
pub fn ff_index(
    p: &OnePartOperator,
    u: &OnePartOperator,
    gamma: &HalfTorus,
    width: usize,
    tol_commute: f64,
) -> Result<FfIndex> {
    let commutator = spectral_norm(linalg::commutator(p.as_ref(), u.as_ref()).as_ref());
    if commutator >= tol_commute {
        return Err(Error::CommutatorBound {
            what: "‖[P,U]‖".into(),
            value: commutator,
            tolerance: tol_commute,
        });
    }
    let q = charge_projector(gamma.lattice(), gamma.region());
    let strip = gamma.boundary_strip(Side::Minus, width)?;
    let d = OnePartOperator::new(transported(u, &q));
    let dm = restrict_to_strip(&d, &strip);
    let tr = linalg::trace((&p.matrix * &dm.matrix).as_ref());
    let total = linalg::trace((&p.matrix * &d.matrix).as_ref());
    Ok(FfIndex {
        value: tr.re,
        imaginary: tr.im,
        commutator,
        total_transport: total.re,
    })
}

/// `K = PQ(1−P) + (1−P)QP`, its strip restrictions and the dressed charge.
#[derive(Clone, Debug)]
pub struct FfDressedCharge {
    pub q: OnePartOperator,
    pub k: OnePartOperator,
    pub k_minus: OnePartOperator,
    pub k_plus: OnePartOperator,
    /// `Q − K_− − K_+`.
    pub qbar: OnePartOperator,
    /// `‖[Q̄, P]‖`.
    pub commutator_residual: f64,
    /// `‖K − K_− − K_+‖`.
    pub split_residual: f64,
    pub width: usize,
}

pub fn ff_dressed_charge(p: &OnePartOperator, gamma: &HalfTorus, width: usize) -> Result<FfDressedCharge> {
    let q = charge_projector(gamma.lattice(), gamma.region());
    let n = p.dim();
    let one_minus_p = Mat::<c64>::identity(n, n) - &p.matrix;
    let a = &p.matrix * &q.matrix * &one_minus_p;
    let k = &a + a.adjoint();
    let k = OnePartOperator::new(k);
    let k_minus = restrict_to_strip(&k, &gamma.boundary_strip(Side::Minus, width)?);
    let k_plus = restrict_to_strip(&k, &gamma.boundary_strip(Side::Plus, width)?);
    let qbar = &q.matrix - &k_minus.matrix - &k_plus.matrix;
    let commutator_residual = spectral_norm(linalg::commutator(qbar.as_ref(), p.as_ref()).as_ref());
    let split_residual = spectral_norm((&k.matrix - &k_minus.matrix - &k_plus.matrix).as_ref());
    Ok(FfDressedCharge {
        q,
        k,
        k_minus,
        k_plus,
        qbar: OnePartOperator::new(qbar),
        commutator_residual,
        split_residual,
        width,
    })
}

/// `e^{2πiA}` for Hermitian `A`.
pub fn exp_2pi_i(a: MatRef<c64>) -> Result<Mat<c64>> {
    Ok(eigh(linalg::hermitian_part(a).as_ref())?.exp_i(std::f64::consts::TAU))
}

/// Flux-threading unitary `e^{2πi(Q − K_side)}`.
pub fn ff_flux_unitary(d: &FfDressedCharge, side: Side) -> Result<OnePartOperator> {
    let k = match side {
        Side::Minus => &d.k_minus,
        Side::Plus => &d.k_plus,
    };
    let g = &d.q.matrix - &k.matrix;
    Ok(OnePartOperator::new(exp_2pi_i(g.as_ref())?))
}

/// `det(PAP + 1 − P)`.
pub fn det_p(a: &OnePartOperator, p: &OnePartOperator) -> c64 {
    let n = p.dim();
    let pap = &p.matrix * &a.matrix * &p.matrix;
    let m = &pap + Mat::<c64>::identity(n, n) - &p.matrix;
    m.determinant()
}

#[derive(Clone, Debug, Serialize)]
pub struct ProofReport {
    pub index: f64,
    pub index_imaginary: f64,
    pub dist_to_integer: f64,
    /// `‖[N, P]‖` for `N = Q + (U†QU−Q)_− − U†K_−U − K_+`.
    pub n_commutator: f64,
    /// `det_P(Z_−)` with `Z_− = U† e^{2πiQ̄_−} U e^{−2πiQ̄_−}`, `Q̄_− = Q − K_−`.
    pub det_z_minus_re: f64,
    pub det_z_minus_im: f64,
    pub det_residual: f64,
    /// `|e^{2πi·Ind} − det_P(e^{2πiN}) / det_P(e^{2πiQ̄})|`.
    pub phase_residual: f64,
    /// `‖[Q̄, P]‖`.
    pub qbar_commutator: f64,
    /// `‖[P, U]‖`.
    pub pu_commutator: f64,
    /// `‖(U†QU−Q) − (U†QU−Q)_− − (U†QU−Q)_+‖`.
    pub restriction_residual: f64,
}

pub fn ff_proof_chain(p: &OnePartOperator, u: &OnePartOperator, gamma: &HalfTorus, width: usize) -> Result<ProofReport> {
    let tau = std::f64::consts::TAU;
    let idx = ff_index(p, u, gamma, width, f64::INFINITY)?;
    let d = ff_dressed_charge(p, gamma, width)?;
    let strip_m = gamma.boundary_strip(Side::Minus, width)?;
    let strip_p = gamma.boundary_strip(Side::Plus, width)?;
    let dq = OnePartOperator::new(transported(u, &d.q));
    let dq_m = restrict_to_strip(&dq, &strip_m);
    let dq_p = restrict_to_strip(&dq, &strip_p);
    let restriction_residual = spectral_norm((&dq.matrix - &dq_m.matrix - &dq_p.matrix).as_ref());

    let k_minus_u = u.matrix.adjoint() * &d.k_minus.matrix * &u.matrix;
    let n_op = &d.q.matrix + &dq_m.matrix - &k_minus_u - &d.k_plus.matrix;
    let n_op = linalg::hermitian_part(n_op.as_ref());
    let n_commutator = spectral_norm(linalg::commutator(n_op.as_ref(), p.as_ref()).as_ref());

    let qbar_minus = &d.q.matrix - &d.k_minus.matrix;
    let f = exp_2pi_i(qbar_minus.as_ref())?;
    let z = u.matrix.adjoint() * &f * &u.matrix * f.adjoint();
    let det_z = det_p(&OnePartOperator::new(z), p);

    let det_n = det_p(&OnePartOperator::new(exp_2pi_i(n_op.as_ref())?), p);
    let det_qbar = det_p(&OnePartOperator::new(exp_2pi_i(d.qbar.as_ref())?), p);
    let phase_residual = (c64::cis(tau * idx.value) - det_n / det_qbar).norm();

    Ok(ProofReport {
        index: idx.value,
        index_imaginary: idx.imaginary,
        dist_to_integer: linalg::dist_to_integer(idx.value),
        n_commutator,
        det_z_minus_re: det_z.re,
        det_z_minus_im: det_z.im,
        det_residual: (det_z - ONE).norm(),
        phase_residual,
        qbar_commutator: d.commutator_residual,
        pu_commutator: idx.commutator,
        restriction_residual,
    })
}

/// Largest matrix element per distance shell.
#[derive(Clone, Debug, Serialize)]
pub struct RapidDecayReport {
    pub shells: Vec<f64>,
    /// Slope of `−ln(max |O_ij|)` against distance over the nonzero shells.
    pub decay_rate: f64,
}

pub fn rapid_decay(o: &OnePartOperator, t: &TorusLattice) -> RapidDecayReport {
    let n = o.dim();
    let max_d = t.l1() / 2 + t.l2() / 2;
    let mut shells = vec![0.0f64; max_d + 1];
    for i in 0..n {
        for j in 0..n {
            let d = t.torus_distance(i, j);
            shells[d] = shells[d].max(o.matrix[(i, j)].norm());
        }
    }
    let pts: Vec<(f64, f64)> = shells
        .iter()
        .enumerate()
        .filter(|(_, &v)| v > 1e-300)
        .map(|(d, &v)| (d as f64, -v.ln()))
        .collect();
    let decay_rate = if pts.len() >= 2 {
        let m = pts.len() as f64;
        let sx: f64 = pts.iter().map(|p| p.0).sum();
        let sy: f64 = pts.iter().map(|p| p.1).sum();
        let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
        (m * sxy - sx * sy) / (m * sxx - sx * sx)
    } else {
        f64::INFINITY
    };
    RapidDecayReport { shells, decay_rate }
}
