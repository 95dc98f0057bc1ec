//! Filtered boundary currents, dressed charges `Q̄ = Q − K_− − K_+`, flux threading
//! unitaries and the locality lemma as a numerical check.

use std::sync::Arc;

use faer::Mat;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::{charge_values, FockBasis, GroundSpace, LocalTerm, ManyBodyOperator, Spectrum};
use crate::lattice::{HalfTorus, Region, Side};
use crate::linalg::{self, c64, eigh, spectral_norm, Eigh};
use crate::sparse::SparseMatrix;
use crate::spectral_filter::{filter_local_term, FilterFunction};

/// The current `i[Q, H_X]` of one local term.
#[derive(Clone, Debug)]
pub struct BoundaryCurrent {
    pub label: String,
    pub support: Region,
    pub current: SparseMatrix,
}

/// Currents of all terms that do not commute with the charge `diag(charge)`.
pub fn boundary_currents(terms: &[LocalTerm], charge: &[f64]) -> Vec<BoundaryCurrent> {
    terms
        .iter()
        .filter_map(|t| {
            let j = t.matrix.diag_commutator(charge);
            (j.max_abs() > 0.0).then(|| BoundaryCurrent {
                label: t.label.clone(),
                support: t.support.clone(),
                current: j,
            })
        })
        .collect()
}

/// `i[Q,H] = J_− + J_+`, with each term's current assigned to one boundary.
#[derive(Clone, Debug)]
pub struct CurrentSplit {
    pub minus: Vec<BoundaryCurrent>,
    pub plus: Vec<BoundaryCurrent>,
    pub width: usize,
}

impl CurrentSplit {
    pub fn side(&self, side: Side) -> &[BoundaryCurrent] {
        match side {
            Side::Minus => &self.minus,
            Side::Plus => &self.plus,
        }
    }

    pub fn total(&self, side: Side, dim: usize) -> SparseMatrix {
        SparseMatrix::sum(dim, self.side(side).iter().map(|c| &c.current))
    }
}

/// Splits the boundary currents of `terms` by the strip their support meets.
pub fn current_split(b: &FockBasis, terms: &[LocalTerm], gamma: &HalfTorus, width: usize) -> Result<CurrentSplit> {
    let strip_m = gamma.boundary_strip(Side::Minus, width)?;
    let strip_p = gamma.boundary_strip(Side::Plus, width)?;
    let charge = charge_values(b, gamma.region());
    let mut minus = Vec::new();
    let mut plus = Vec::new();
    for c in boundary_currents(terms, &charge) {
        match (c.support.intersects(&strip_m), c.support.intersects(&strip_p)) {
            (true, false) => minus.push(c),
            (false, true) => plus.push(c),
            (true, true) => return Err(Error::CrossesBothBoundaries(c.label)),
            (false, false) => {
                return Err(Error::Geometry(format!(
                    "term {} carries current but misses both strips",
                    c.label
                )))
            }
        }
    }
    Ok(CurrentSplit { minus, plus, width })
}

/// Eigenbasis and filter used to turn currents into quasi-adiabatic generators.
#[derive(Clone, Debug)]
pub struct FilterContext {
    pub spectrum: Arc<Spectrum>,
    pub ground: usize,
    pub filter: FilterFunction,
}

impl FilterContext {
    /// The filter must be flat across the spectral gap of `g`.
    pub fn new(g: &GroundSpace, filter: FilterFunction) -> Result<Self> {
        if filter.gap() > g.gap * (1.0 + 1e-12) {
            return Err(Error::InvalidFilter(format!(
                "filter gap {} exceeds the spectral gap {}",
                filter.gap(),
                g.gap
            )));
        }
        Ok(Self {
            spectrum: g.spectrum.clone(),
            ground: g.p,
            filter,
        })
    }

    pub fn dim(&self) -> usize {
        self.spectrum.dim()
    }

    /// Filtered sum of currents, in the Fock basis.
    pub fn filter_sum<'a>(&self, currents: impl IntoIterator<Item = &'a SparseMatrix>) -> Result<Mat<c64>> {
        let j = SparseMatrix::sum(self.dim(), currents);
        if j.nnz() == 0 {
            return Ok(Mat::zeros(self.dim(), self.dim()));
        }
        let k = filter_local_term(
            &self.filter,
            &self.spectrum.energies,
            self.spectrum.vectors.as_ref(),
            &j,
            self.ground,
        )?;
        Ok(linalg::hermitian_part(k.as_ref()))
    }
}

/// Dressed charge of a half torus.
#[derive(Clone, Debug)]
pub struct DressedCharge {
    pub gamma: HalfTorus,
    pub width: usize,
    /// Diagonal of `Q`.
    pub charge: Vec<f64>,
    /// Diagonals of `Q_± = Σ n_i` over `Γ ∩ strip_±`.
    pub charge_minus: Vec<f64>,
    pub charge_plus: Vec<f64>,
    pub currents: CurrentSplit,
    pub k_minus: Mat<c64>,
    pub k_plus: Mat<c64>,
    /// `‖[Q̄, P]‖`.
    pub commutator_residual: f64,
    pub context: FilterContext,
}

pub fn dressed_charge(
    h: &ManyBodyOperator,
    b: &FockBasis,
    g: &GroundSpace,
    gamma: &HalfTorus,
    width: usize,
    f: FilterFunction,
) -> Result<DressedCharge> {
    let context = FilterContext::new(g, f)?;
    let currents = current_split(b, &h.terms, gamma, width)?;
    let k_minus = context.filter_sum(currents.minus.iter().map(|c| &c.current))?;
    let k_plus = context.filter_sum(currents.plus.iter().map(|c| &c.current))?;
    let strip_m = gamma.boundary_strip(Side::Minus, width)?;
    let strip_p = gamma.boundary_strip(Side::Plus, width)?;
    let mut d = DressedCharge {
        gamma: gamma.clone(),
        width,
        charge: charge_values(b, gamma.region()),
        charge_minus: charge_values(b, &gamma.region().intersection(&strip_m)),
        charge_plus: charge_values(b, &gamma.region().intersection(&strip_p)),
        currents,
        k_minus,
        k_plus,
        commutator_residual: 0.0,
        context,
    };
    d.commutator_residual = g.commutator_norm(&ManyBodyOperator::dense(d.qbar()));
    Ok(d)
}

fn diag_minus(d: &[f64], k: &Mat<c64>) -> Mat<c64> {
    let mut m = -k;
    for (i, &v) in d.iter().enumerate() {
        m[(i, i)] += c64::new(v, 0.0);
    }
    m
}

impl DressedCharge {
    pub fn dim(&self) -> usize {
        self.charge.len()
    }

    pub fn k(&self) -> Mat<c64> {
        &self.k_minus + &self.k_plus
    }

    pub fn k_side(&self, side: Side) -> &Mat<c64> {
        match side {
            Side::Minus => &self.k_minus,
            Side::Plus => &self.k_plus,
        }
    }

    pub fn charge_side(&self, side: Side) -> &[f64] {
        match side {
            Side::Minus => &self.charge_minus,
            Side::Plus => &self.charge_plus,
        }
    }

    /// Diagonal of `Q_m = Q − Q_− − Q_+`.
    pub fn charge_middle(&self) -> Vec<f64> {
        (0..self.dim())
            .map(|i| self.charge[i] - self.charge_minus[i] - self.charge_plus[i])
            .collect()
    }

    pub fn qbar(&self) -> Mat<c64> {
        diag_minus(&self.charge, &self.k())
    }

    /// `Q̄_± = Q_± − K_±`.
    pub fn qbar_side(&self, side: Side) -> Mat<c64> {
        diag_minus(self.charge_side(side), self.k_side(side))
    }

    /// `Q − K_side`, the generator of flux threading through one boundary.
    pub fn q_minus_k(&self, side: Side) -> Mat<c64> {
        diag_minus(&self.charge, self.k_side(side))
    }

    pub fn q_operator(&self) -> ManyBodyOperator {
        ManyBodyOperator::diagonal(self.charge.iter().map(|&v| c64::new(v, 0.0)).collect())
    }

    /// `‖[K, P] − [Q, P]‖`, i.e. `‖[Q̄, P]‖`.
    pub fn identity_residual(&self) -> f64 {
        self.commutator_residual
    }
}

/// Flux threaded through one boundary, `e^{2πi(Q − K_side)}`. Equal to `e^{2πiQ̄_side}`
/// up to the tails of `K_side` at the inner edge of the strip, which this form pushes out
/// to the opposite boundary.
pub fn flux_unitary(d: &DressedCharge, side: Side) -> Result<ManyBodyOperator> {
    let q = d.q_minus_k(side);
    let u = eigh(q.as_ref())?.exp_i(std::f64::consts::TAU);
    let support = d.gamma.boundary_strip(side, d.width)?;
    Ok(ManyBodyOperator::dense(u).with_support(support))
}

/// `e^{2πiQ̄}` as a dense operator.
pub fn full_flux_unitary(d: &DressedCharge) -> Result<ManyBodyOperator> {
    let q = d.qbar();
    Ok(ManyBodyOperator::dense(eigh(q.as_ref())?.exp_i(std::f64::consts::TAU)))
}

/// `‖e^{2πiQ̄} − e^{2πiQ̄_−} e^{2πiQ̄_+}‖`.
pub fn flux_factorization_residual(d: &DressedCharge) -> Result<f64> {
    let full = full_flux_unitary(d)?;
    let m = flux_unitary(d, Side::Minus)?.to_dense();
    let p = flux_unitary(d, Side::Plus)?.to_dense();
    let prod = &m * &p;
    Ok(spectral_norm((full.to_dense() - prod).as_ref()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FlowVariant {
    Full,
    Minus,
}

/// `V(φ)` with its residual `‖V†PV − e^{iφQ}Pe^{−iφQ}‖` (full variant only).
#[derive(Clone, Debug)]
pub struct SpectralFlow {
    pub v: ManyBodyOperator,
    pub residual: Option<f64>,
}

/// `V(φ) = e^{iφ(Q−K)} e^{−iφQ}`, or `V_−(φ)` with `K → K_−`.
pub fn spectral_flow(d: &DressedCharge, g: &GroundSpace, phi: f64, variant: FlowVariant) -> Result<SpectralFlow> {
    let gen = match variant {
        FlowVariant::Full => d.qbar(),
        FlowVariant::Minus => d.q_minus_k(Side::Minus),
    };
    let e = eigh(gen.as_ref())?;
    let phase: Vec<c64> = d.charge.iter().map(|&q| c64::cis(-phi * q)).collect();
    let left = e.exp_i(phi);
    let v = linalg::diag_right(left.as_ref(), &phase);
    let residual = match variant {
        FlowVariant::Full => {
            let psi = g.vectors();
            let x = v.adjoint() * psi;
            let back: Vec<c64> = phase.iter().map(|z| z.conj()).collect();
            let y = linalg::diag_left(&back, psi);
            Some(linalg::outer_difference_norm(x.as_ref(), y.as_ref())?)
        }
        FlowVariant::Minus => None,
    };
    Ok(SpectralFlow {
        v: ManyBodyOperator::dense(v),
        residual,
    })
}

/// `(‖PVP − PV_−PV_+P‖, 1 − ‖PV_−P‖)` with `V = V_− V_+`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct LocalityReport {
    pub factorization: f64,
    pub norm_loss: f64,
}

pub fn locality_lemma_check(v_minus: &ManyBodyOperator, v_plus: &ManyBodyOperator, g: &GroundSpace) -> LocalityReport {
    let psi = g.vectors();
    let vp_psi = v_plus.apply(psi);
    let v_psi = v_minus.apply(vp_psi.as_ref());
    let full = psi.adjoint() * &v_psi;
    let cm = v_minus.compress(psi);
    let cp = psi.adjoint() * &vp_psi;
    let prod = &cm * &cp;
    LocalityReport {
        factorization: spectral_norm((full - prod).as_ref()),
        norm_loss: 1.0 - spectral_norm(cm.as_ref()),
    }
}

/// Dressed charge of an arbitrary region `Ω`: `Q̄_Ω = Q_Ω − K_{∂Ω}`, with the
/// per-term currents kept so that open strings can be cut out.
#[derive(Clone, Debug)]
pub struct RegionCharge {
    pub omega: Region,
    pub charge: Vec<f64>,
    pub currents: Vec<BoundaryCurrent>,
    pub context: FilterContext,
}

pub fn region_charge(h: &ManyBodyOperator, b: &FockBasis, g: &GroundSpace, omega: &Region, f: FilterFunction) -> Result<RegionCharge> {
    let context = FilterContext::new(g, f)?;
    let charge = charge_values(b, omega);
    let currents = boundary_currents(&h.terms, &charge);
    Ok(RegionCharge {
        omega: omega.clone(),
        charge,
        currents,
        context,
    })
}

impl RegionCharge {
    /// Filtered currents of the selected terms.
    pub fn k_of(&self, selected: &[usize]) -> Result<Mat<c64>> {
        for &k in selected {
            if k >= self.currents.len() {
                return Err(Error::Geometry(format!("no boundary term {k}")));
            }
        }
        self.context.filter_sum(selected.iter().map(|&k| &self.currents[k].current))
    }

    /// `Q_Ω − K_γ` for the selected terms.
    pub fn generator(&self, selected: &[usize]) -> Result<Mat<c64>> {
        Ok(diag_minus(&self.charge, &self.k_of(selected)?))
    }

    /// `e^{2πiQ̄_Ω}` over the whole boundary, diagonalized.
    pub fn loop_eigh(&self) -> Result<Eigh> {
        let all: Vec<usize> = (0..self.currents.len()).collect();
        eigh(self.generator(&all)?.as_ref())
    }
}
