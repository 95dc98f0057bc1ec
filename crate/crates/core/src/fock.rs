//! Occupation-number bases, local terms, many-body operators and exact diagonalization.

use std::sync::Arc;

use faer::{Mat, MatRef};
use serde::{Deserialize, Serialize};

use crate::eigensolver::{lowest_eigenpairs, KrylovOptions};
use crate::error::{Error, Result};
use crate::lattice::{Region, TorusLattice};
use crate::linalg::{self, c64, eigh, frobenius, spectral_norm, ONE, ZERO};
use crate::sparse::SparseMatrix;

/// Largest basis handled at all.
pub const MAX_BASIS_DIM: usize = 1 << 22;
/// Largest dimension diagonalized densely.
pub const DENSE_LIMIT: usize = 4096;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistics {
    #[default]
    Fermion,
    HardcoreBoson,
    /// Spin-1/2 with `n_i = (1 + σ^z_i)/2`; same algebra as hardcore bosons.
    Spin,
}

/// Occupation bitstrings (bit `i` = site `i`), sorted ascending.
#[derive(Clone, Debug)]
pub struct FockBasis {
    lattice: TorusLattice,
    statistics: Statistics,
    particles: Option<usize>,
    states: Vec<u64>,
}

pub fn build_basis(t: &TorusLattice, statistics: Statistics, n: usize) -> Result<FockBasis> {
    let sites = t.dim();
    if sites > 64 {
        return Err(Error::BasisTooLarge(format!("{sites} sites exceed the 64-bit occupation encoding")));
    }
    if n > sites {
        return Err(Error::InvalidModel(format!(
            "particle number {n} exceeds the {sites} available sites"
        )));
    }
    let dim = binomial(sites, n);
    if dim > MAX_BASIS_DIM as u128 {
        return Err(Error::BasisTooLarge(format!("C({sites}, {n}) = {dim}")));
    }
    let mut states = Vec::with_capacity(dim as usize);
    if n == 0 {
        states.push(0);
    } else {
        // Gosper's hack enumerates n-subsets in increasing numeric order.
        let mut s: u64 = (1u64 << n) - 1;
        let limit: u128 = 1u128 << sites;
        while (s as u128) < limit {
            states.push(s);
            let c = s & s.wrapping_neg();
            let r = s.wrapping_add(c);
            if r == 0 {
                break;
            }
            s = (((r ^ s) >> 2) / c) | r;
        }
    }
    Ok(FockBasis {
        lattice: *t,
        statistics,
        particles: Some(n),
        states,
    })
}

/// All particle-number sectors at once.
pub fn build_full_basis(t: &TorusLattice, statistics: Statistics) -> Result<FockBasis> {
    let sites = t.dim();
    if sites > 22 {
        return Err(Error::BasisTooLarge(format!("2^{sites}")));
    }
    Ok(FockBasis {
        lattice: *t,
        statistics,
        particles: None,
        states: (0..1u64 << sites).collect(),
    })
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

impl FockBasis {
    pub fn lattice(&self) -> &TorusLattice {
        &self.lattice
    }

    pub fn statistics(&self) -> Statistics {
        self.statistics
    }

    pub fn particles(&self) -> Option<usize> {
        self.particles
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn state(&self, k: usize) -> u64 {
        self.states[k]
    }

    pub fn states(&self) -> &[u64] {
        &self.states
    }

    pub fn index_of(&self, s: u64) -> Option<usize> {
        self.states.binary_search(&s).ok()
    }

    fn is_fermion(&self) -> bool {
        self.statistics == Statistics::Fermion
    }

    /// Sign of `c_i† c_j` acting on `s` (Jordan–Wigner order along the linear site index).
    pub fn hop_sign(&self, s: u64, i: usize, j: usize) -> f64 {
        if !self.is_fermion() {
            return 1.0;
        }
        let (lo, hi) = if i < j { (i, j) } else { (j, i) };
        let between = if hi - lo <= 1 { 0 } else { ((1u64 << hi) - 1) & !((1u64 << (lo + 1)) - 1) };
        if (s & between).count_ones() % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }
}

/// A local term: sparse action on the whole space plus its nominal support.
#[derive(Clone, Debug)]
pub struct LocalTerm {
    pub label: String,
    pub support: Region,
    pub matrix: SparseMatrix,
    pub charge_conserving: bool,
}

impl LocalTerm {
    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.matrix.hermiticity_defect() <= tol
    }

    pub fn scaled(&self, s: f64) -> LocalTerm {
        LocalTerm {
            matrix: self.matrix.scale(c64::new(s, 0.0)),
            ..self.clone()
        }
    }
}

/// `amp·c_i† c_j + h.c.` (or `b_i† b_j + h.c.` for bosons and spins).
pub fn hopping_term(b: &FockBasis, i: usize, j: usize, amp: c64) -> Result<LocalTerm> {
    if i == j {
        return Err(Error::InvalidModel("hopping needs two distinct sites".into()));
    }
    let mut t = Vec::new();
    for (k, &s) in b.states.iter().enumerate() {
        for (to, from, a) in [(i, j, amp), (j, i, amp.conj())] {
            if s >> from & 1 == 1 && s >> to & 1 == 0 {
                let s2 = (s & !(1 << from)) | (1 << to);
                let k2 = b.index_of(s2).expect("hopping stays in the sector");
                t.push((k2, k, a * b.hop_sign(s, to, from)));
            }
        }
    }
    Ok(LocalTerm {
        label: format!("hop({i},{j})"),
        support: Region::from_sites(&b.lattice, "bond", &[i, j])?,
        matrix: SparseMatrix::from_triplets(b.dim(), t),
        charge_conserving: true,
    })
}

/// `Σ_ij a_ij c_i† c_j` for a one-particle matrix `a` (fermions only).
pub fn second_quantize(b: &FockBasis, a: MatRef<c64>) -> Result<ManyBodyOperator> {
    let n = b.lattice.dim();
    if a.nrows() != n || a.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: a.nrows(),
        });
    }
    if !b.is_fermion() {
        return Err(Error::InvalidModel("second quantization needs fermions".into()));
    }
    let mut t = Vec::new();
    for (k, &s) in b.states.iter().enumerate() {
        for j in (0..n).filter(|&j| s >> j & 1 == 1) {
            for i in 0..n {
                let v = a[(i, j)];
                if v == ZERO {
                    continue;
                }
                if i == j {
                    t.push((k, k, v));
                } else if s >> i & 1 == 0 {
                    let s2 = (s & !(1 << j)) | (1 << i);
                    let k2 = b.index_of(s2).expect("hopping stays in the sector");
                    t.push((k2, k, v * b.hop_sign(s, i, j)));
                }
            }
        }
    }
    Ok(ManyBodyOperator::sparse(SparseMatrix::from_triplets(b.dim(), t)))
}

/// `mu·n_i`.
pub fn onsite_term(b: &FockBasis, i: usize, mu: f64) -> Result<LocalTerm> {
    let d: Vec<c64> = b.states.iter().map(|&s| c64::new(if s >> i & 1 == 1 { mu } else { 0.0 }, 0.0)).collect();
    Ok(LocalTerm {
        label: format!("n({i})"),
        support: Region::from_sites(&b.lattice, "site", &[i])?,
        matrix: SparseMatrix::diagonal(&d),
        charge_conserving: true,
    })
}

/// `v·n_i n_j`.
pub fn density_density_term(b: &FockBasis, i: usize, j: usize, v: f64) -> Result<LocalTerm> {
    let d: Vec<c64> = b
        .states
        .iter()
        .map(|&s| c64::new(if s >> i & 1 == 1 && s >> j & 1 == 1 { v } else { 0.0 }, 0.0))
        .collect();
    Ok(LocalTerm {
        label: format!("nn({i},{j})"),
        support: Region::from_sites(&b.lattice, "bond", &[i, j])?,
        matrix: SparseMatrix::diagonal(&d),
        charge_conserving: true,
    })
}

/// Storage for a many-body operator.
#[derive(Clone, Debug)]
pub enum OperatorMatrix {
    Diagonal(Vec<c64>),
    Sparse(SparseMatrix),
    Dense(Mat<c64>),
}

/// A many-body operator with optional local-term decomposition and nominal support.
#[derive(Clone, Debug)]
pub struct ManyBodyOperator {
    pub matrix: OperatorMatrix,
    pub terms: Vec<LocalTerm>,
    pub support: Option<Region>,
}

impl ManyBodyOperator {
    pub fn dense(m: Mat<c64>) -> Self {
        Self {
            matrix: OperatorMatrix::Dense(m),
            terms: Vec::new(),
            support: None,
        }
    }

    pub fn diagonal(d: Vec<c64>) -> Self {
        Self {
            matrix: OperatorMatrix::Diagonal(d),
            terms: Vec::new(),
            support: None,
        }
    }

    pub fn sparse(s: SparseMatrix) -> Self {
        Self {
            matrix: OperatorMatrix::Sparse(s),
            terms: Vec::new(),
            support: None,
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::diagonal(vec![ONE; dim])
    }

    pub fn with_support(mut self, r: Region) -> Self {
        self.support = Some(r);
        self
    }

    pub fn dim(&self) -> usize {
        match &self.matrix {
            OperatorMatrix::Diagonal(d) => d.len(),
            OperatorMatrix::Sparse(s) => s.dim(),
            OperatorMatrix::Dense(m) => m.nrows(),
        }
    }

    /// Real diagonal if the operator is stored diagonally.
    pub fn real_diagonal(&self) -> Option<Vec<f64>> {
        match &self.matrix {
            OperatorMatrix::Diagonal(d) => Some(d.iter().map(|x| x.re).collect()),
            _ => None,
        }
    }

    pub fn to_dense(&self) -> Mat<c64> {
        match &self.matrix {
            OperatorMatrix::Diagonal(d) => {
                Mat::from_fn(d.len(), d.len(), |i, j| if i == j { d[i] } else { ZERO })
            }
            OperatorMatrix::Sparse(s) => s.to_dense(),
            OperatorMatrix::Dense(m) => m.clone(),
        }
    }

    /// `O X`.
    pub fn apply(&self, x: MatRef<c64>) -> Mat<c64> {
        match &self.matrix {
            OperatorMatrix::Diagonal(d) => linalg::diag_left(d, x),
            OperatorMatrix::Sparse(s) => s.mul_dense(x),
            OperatorMatrix::Dense(m) => m * x,
        }
    }

    /// `O† X`.
    pub fn apply_adjoint(&self, x: MatRef<c64>) -> Mat<c64> {
        match &self.matrix {
            OperatorMatrix::Diagonal(d) => {
                let c: Vec<c64> = d.iter().map(|v| v.conj()).collect();
                linalg::diag_left(&c, x)
            }
            OperatorMatrix::Sparse(s) => s.adjoint().mul_dense(x),
            OperatorMatrix::Dense(m) => m.adjoint() * x,
        }
    }

    /// `X O`.
    pub fn apply_right(&self, x: MatRef<c64>) -> Mat<c64> {
        match &self.matrix {
            OperatorMatrix::Diagonal(d) => linalg::diag_right(x, d),
            OperatorMatrix::Sparse(s) => s.dense_mul(x),
            OperatorMatrix::Dense(m) => x * m,
        }
    }

    pub fn adjoint(&self) -> Self {
        let matrix = match &self.matrix {
            OperatorMatrix::Diagonal(d) => OperatorMatrix::Diagonal(d.iter().map(|v| v.conj()).collect()),
            OperatorMatrix::Sparse(s) => OperatorMatrix::Sparse(s.adjoint()),
            OperatorMatrix::Dense(m) => OperatorMatrix::Dense(m.adjoint().to_owned()),
        };
        Self {
            matrix,
            terms: Vec::new(),
            support: self.support.clone(),
        }
    }

    /// `‖O − O†‖_F`.
    pub fn hermiticity_defect(&self) -> f64 {
        match &self.matrix {
            OperatorMatrix::Diagonal(d) => d.iter().map(|v| 2.0 * v.im.abs()).fold(0.0, f64::max),
            OperatorMatrix::Sparse(s) => s.hermiticity_defect(),
            OperatorMatrix::Dense(m) => linalg::hermiticity_defect(m.as_ref()),
        }
    }

    /// `‖O†O − 1‖_F`.
    pub fn unitarity_defect(&self) -> f64 {
        match &self.matrix {
            OperatorMatrix::Diagonal(d) => d.iter().map(|v| (v.norm_sqr() - 1.0).powi(2)).sum::<f64>().sqrt(),
            OperatorMatrix::Sparse(s) => {
                let g = s.adjoint().matmul(s);
                g.add(&SparseMatrix::identity(s.dim()).scale(-ONE)).frobenius()
            }
            OperatorMatrix::Dense(m) => linalg::unitarity_defect(m.as_ref()),
        }
    }

    /// `⟨ψ|O|ψ⟩` for each column of `psi`.
    pub fn expectations(&self, psi: MatRef<c64>) -> Vec<c64> {
        let o = self.apply(psi);
        (0..psi.ncols())
            .map(|k| (0..psi.nrows()).map(|i| psi[(i, k)].conj() * o[(i, k)]).sum())
            .collect()
    }

    /// `Ψ† O Ψ`.
    pub fn compress(&self, psi: MatRef<c64>) -> Mat<c64> {
        psi.adjoint() * self.apply(psi)
    }

    /// Charge-conservation defect `‖[O, N_total]‖_F` with respect to a basis.
    pub fn number_commutator(&self, b: &FockBasis) -> f64 {
        let n: Vec<f64> = b.states().iter().map(|s| s.count_ones() as f64).collect();
        match &self.matrix {
            OperatorMatrix::Diagonal(_) => 0.0,
            OperatorMatrix::Sparse(s) => s.diag_commutator(&n).frobenius(),
            OperatorMatrix::Dense(m) => {
                let dim = m.nrows();
                let mut acc = 0.0;
                for j in 0..dim {
                    for i in 0..dim {
                        acc += ((n[i] - n[j]) * m[(i, j)].norm()).powi(2);
                    }
                }
                acc.sqrt()
            }
        }
    }

    pub fn add(&self, other: &ManyBodyOperator) -> ManyBodyOperator {
        match (&self.matrix, &other.matrix) {
            (OperatorMatrix::Diagonal(a), OperatorMatrix::Diagonal(b)) => {
                Self::diagonal(a.iter().zip(b).map(|(x, y)| x + y).collect())
            }
            (OperatorMatrix::Sparse(a), OperatorMatrix::Sparse(b)) => Self::sparse(a.add(b)),
            _ => Self::dense(self.to_dense() + other.to_dense()),
        }
    }

    pub fn scale(&self, s: c64) -> ManyBodyOperator {
        let matrix = match &self.matrix {
            OperatorMatrix::Diagonal(d) => OperatorMatrix::Diagonal(d.iter().map(|v| v * s).collect()),
            OperatorMatrix::Sparse(m) => OperatorMatrix::Sparse(m.scale(s)),
            OperatorMatrix::Dense(m) => OperatorMatrix::Dense(linalg::scaled(m.as_ref(), s)),
        };
        Self {
            matrix,
            terms: Vec::new(),
            support: self.support.clone(),
        }
    }

    /// Sparse view, if available without densifying.
    pub fn as_sparse(&self) -> Option<SparseMatrix> {
        match &self.matrix {
            OperatorMatrix::Diagonal(d) => Some(SparseMatrix::diagonal(d)),
            OperatorMatrix::Sparse(s) => Some(s.clone()),
            OperatorMatrix::Dense(_) => None,
        }
    }
}

/// `Σ_{i∈Ω} n_i`, diagonal in the occupation basis.
pub fn charge_operator(b: &FockBasis, omega: &Region) -> ManyBodyOperator {
    let mask = omega.mask();
    let d = b.states.iter().map(|s| c64::new((s & mask).count_ones() as f64, 0.0)).collect();
    ManyBodyOperator::diagonal(d).with_support(omega.clone())
}

/// Real charge values `Σ_{i∈Ω} n_i` per basis state.
pub fn charge_values(b: &FockBasis, omega: &Region) -> Vec<f64> {
    let mask = omega.mask();
    b.states.iter().map(|s| (s & mask).count_ones() as f64).collect()
}

/// Sum of Hermitian local terms; the term list is retained.
pub fn assemble_hamiltonian(b: &FockBasis, terms: Vec<LocalTerm>) -> Result<ManyBodyOperator> {
    for t in &terms {
        if t.matrix.dim() != b.dim() {
            return Err(Error::DimensionMismatch {
                expected: b.dim(),
                found: t.matrix.dim(),
            });
        }
        let dev = t.matrix.hermiticity_defect();
        if dev > 1e-12 * t.matrix.max_abs().max(1.0) {
            return Err(Error::NotHermitian { deviation: dev });
        }
    }
    let m = SparseMatrix::sum(b.dim(), terms.iter().map(|t| &t.matrix));
    Ok(ManyBodyOperator {
        matrix: OperatorMatrix::Sparse(m),
        terms,
        support: None,
    })
}

/// Fermionic translation sign: parity of the permutation sorting the images of the
/// occupied sites.
fn permutation_sign(images: &[usize]) -> f64 {
    let mut inv = 0usize;
    for a in 0..images.len() {
        for b in a + 1..images.len() {
            if images[a] > images[b] {
                inv += 1;
            }
        }
    }
    if inv % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Translation `U c_i† U† = c_{i+shift}†`, realized as a signed basis permutation.
pub fn translation_unitary(b: &FockBasis, shift: (isize, isize)) -> ManyBodyOperator {
    let t = b.lattice;
    let mut trip = Vec::with_capacity(b.dim());
    for (k, &s) in b.states.iter().enumerate() {
        let images: Vec<usize> = (0..t.dim()).filter(|&i| s >> i & 1 == 1).map(|i| t.translate(i, shift)).collect();
        let s2 = images.iter().fold(0u64, |m, &i| m | (1 << i));
        let sign = if b.is_fermion() { permutation_sign(&images) } else { 1.0 };
        let k2 = b.index_of(s2).expect("translation preserves particle number");
        trip.push((k2, k, c64::new(sign, 0.0)));
    }
    ManyBodyOperator::sparse(SparseMatrix::from_triplets(b.dim(), trip))
}

/// Energies and eigenvectors: the full spectrum, or a low-energy window.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub energies: Vec<f64>,
    pub vectors: Mat<c64>,
    pub complete: bool,
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.vectors.nrows()
    }
}

/// Orthonormal ground multiplet of a Hamiltonian together with its eigenbasis.
#[derive(Clone, Debug)]
pub struct GroundSpace {
    pub spectrum: Arc<Spectrum>,
    pub p: usize,
    pub ground_energy: f64,
    /// First level above the multiplet minus the top of the multiplet.
    pub gap: f64,
    /// Width of the multiplet.
    pub spread: f64,
    pub split_tol: f64,
    /// Largest `‖Hψ − Eψ‖` over the multiplet.
    pub residual: f64,
}

impl GroundSpace {
    pub fn vectors(&self) -> MatRef<'_, c64> {
        self.spectrum.vectors.get(.., 0..self.p)
    }

    pub fn dim(&self) -> usize {
        self.spectrum.dim()
    }

    pub fn projector(&self) -> Mat<c64> {
        linalg::projector(self.vectors())
    }

    /// `‖[A, P]‖` for a many-body operator.
    pub fn commutator_norm(&self, a: &ManyBodyOperator) -> f64 {
        let psi = self.vectors();
        let ap = a.apply(psi);
        let adp = a.apply_adjoint(psi);
        linalg::projector_commutator_norm_from(psi, ap.as_ref(), adp.as_ref())
    }
}

/// Ground multiplet: all levels within `split_tol` of the minimum (or exactly
/// `p_hint` levels when given). Dense diagonalization up to [`DENSE_LIMIT`], a
/// Krylov window above.
pub fn ground_space(h: &ManyBodyOperator, p_hint: Option<usize>, split_tol: Option<f64>) -> Result<GroundSpace> {
    ground_space_seeded(h, p_hint, split_tol, KrylovOptions::default().seed)
}

/// [`ground_space`] with an explicit seed for the Krylov start block.
pub fn ground_space_seeded(h: &ManyBodyOperator, p_hint: Option<usize>, split_tol: Option<f64>, seed: u64) -> Result<GroundSpace> {
    let dim = h.dim();
    let sparse = h.as_sparse();
    let norm_scale = match &sparse {
        Some(s) => s.max_abs().max(1e-300),
        None => frobenius(h.to_dense().as_ref()).max(1e-300),
    };
    let split_tol = split_tol.unwrap_or(1e-8 * norm_scale);
    let spectrum = if dim <= DENSE_LIMIT || sparse.is_none() {
        let e = eigh(h.to_dense().as_ref())?;
        Spectrum {
            energies: e.values,
            vectors: e.vectors,
            complete: true,
        }
    } else {
        let window = p_hint.unwrap_or(4) + 4;
        let opts = KrylovOptions {
            block: window,
            seed,
            ..Default::default()
        };
        let (vals, vecs, _) = lowest_eigenpairs(sparse.as_ref().unwrap(), window.min(dim), &opts)?;
        Spectrum {
            energies: vals,
            vectors: vecs,
            complete: false,
        }
    };
    ground_space_from_spectrum(h, Arc::new(spectrum), p_hint, split_tol)
}

pub fn ground_space_from_spectrum(
    h: &ManyBodyOperator,
    spectrum: Arc<Spectrum>,
    p_hint: Option<usize>,
    split_tol: f64,
) -> Result<GroundSpace> {
    let e = &spectrum.energies;
    if e.is_empty() {
        return Err(Error::Multiplet("empty spectrum".into()));
    }
    let e0 = e[0];
    let p = match p_hint {
        Some(p) => p,
        None => e.iter().take_while(|&&x| x - e0 <= split_tol).count(),
    };
    let whole_space = spectrum.complete && p == e.len();
    if p == 0 || (p >= e.len() && !whole_space) {
        return Err(Error::Multiplet(format!(
            "multiplet of size {p} leaves no level above it in a window of {}",
            e.len()
        )));
    }
    let spread = e[p - 1] - e0;
    let gap = if whole_space { f64::INFINITY } else { e[p] - e[p - 1] };
    if gap <= split_tol {
        return Err(Error::GapTooSmall {
            gap,
            tolerance: split_tol,
        });
    }
    if gap <= spread {
        return Err(Error::Multiplet(format!(
            "multiplet spread {spread:.3e} is not below the gap {gap:.3e}"
        )));
    }
    let psi = spectrum.vectors.get(.., 0..p);
    let hpsi = h.apply(psi);
    let mut residual: f64 = 0.0;
    for k in 0..p {
        let r: f64 = (0..psi.nrows()).map(|i| (hpsi[(i, k)] - psi[(i, k)] * e[k]).norm_sqr()).sum::<f64>().sqrt();
        residual = residual.max(r);
    }
    Ok(GroundSpace {
        spectrum,
        p,
        ground_energy: e0,
        gap,
        spread,
        split_tol,
        residual,
    })
}

/// `max_O ‖POP − (tr(PO)/p) P‖` over the probes, measured on `ran P`.
pub fn topological_order_deviation(g: &GroundSpace, probes: &[ManyBodyOperator]) -> f64 {
    if g.p == 1 {
        return 0.0;
    }
    let psi = g.vectors();
    let mut worst: f64 = 0.0;
    for o in probes {
        let mut m = o.compress(psi);
        let avg = linalg::trace(m.as_ref()) / g.p as f64;
        for k in 0..g.p {
            m[(k, k)] -= avg;
        }
        worst = worst.max(spectral_norm(m.as_ref()));
    }
    worst
}

/// Local probes for the topological-order check: every on-site density and the
/// hermitian and antihermitian parts of every nearest-neighbour hopping.
pub fn standard_probes(b: &FockBasis) -> Result<Vec<ManyBodyOperator>> {
    let t = b.lattice;
    let mut out = Vec::new();
    for i in 0..t.dim() {
        out.push(ManyBodyOperator::sparse(onsite_term(b, i, 1.0)?.matrix));
    }
    for bond in t.bonds() {
        out.push(ManyBodyOperator::sparse(hopping_term(b, bond.to, bond.from, ONE)?.matrix));
        out.push(ManyBodyOperator::sparse(hopping_term(b, bond.to, bond.from, c64::new(0.0, 1.0))?.matrix));
    }
    Ok(out)
}
