//! The twisted flux products `Z_−`, `Z_±(φ)`, loop-unitary braiding and anyon
//! string operators.

use std::f64::consts::TAU;

use faer::Mat;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::{charge_values, FockBasis, GroundSpace, ManyBodyOperator};
use crate::lattice::{Axis, Bond, HalfTorus, Region, Side, TorusLattice};
use crate::linalg::{self, c64, eigh, spectral_norm, Eigh, ZERO};
use crate::quasi_adiabatic::{flux_unitary, DressedCharge, RegionCharge};
use crate::transport::{ProcessUnitary, TransportSplit};

/// Diagnostics of the twist identity, its interpolation and loop braiding. Parts that
/// were not computed are `None`.
#[derive(Clone, Debug, Default, Serialize)]
pub struct BraidReport {
    /// `‖PZ_−P − e^{(2πi/p)tr(PT_−)}P‖` on `ran P`.
    pub identity_residual: Option<f64>,
    /// `|det(PZ_−P) − 1|` on `ran P`.
    pub det_deviation: Option<f64>,
    /// Largest `‖[Z_−(φ), P]‖` over the grid.
    pub max_commutator: Option<f64>,
    /// Largest finite-difference residual of `d(PZ_−(φ)P)/dφ = i(tr(PT_−)/p)PZ_−(φ)P`.
    pub ode_residual: Option<f64>,
    /// Argument of `(1/p) tr(P·U₂†U₁U₂U₁†·P)`.
    pub phase: Option<f64>,
    /// Distance of the compressed braid operator from the scalar `e^{i·phase}`.
    pub phase_deviation: Option<f64>,
    /// Distance of the phase to `2π(ℤ/p)`.
    pub phase_fractionality: Option<f64>,
    /// `tr(PT_−)` used as the reference.
    pub trace: Option<f64>,
    pub p: usize,
}

/// `Z_− = U† F U F†` with `F` the flux through `∂_−` (see [`flux_unitary`]), as a dense operator.
pub fn z_minus(u: &ProcessUnitary, d: &DressedCharge) -> Result<ManyBodyOperator> {
    let f = flux_unitary(d, Side::Minus)?.to_dense();
    let uf = u.unitary.apply(f.as_ref());
    let ufu = u.unitary.apply_adjoint(uf.as_ref());
    let ufu = u.unitary.apply_right(ufu.as_ref());
    Ok(ManyBodyOperator::dense(ufu * f.adjoint()))
}

/// `Ψ† Z_− Ψ` without forming `Z_−`.
fn z_minus_compressed(g: &GroundSpace, u: &ProcessUnitary, d: &DressedCharge) -> Result<Mat<c64>> {
    let e = eigh(d.q_minus_k(Side::Minus).as_ref())?;
    let psi = g.vectors();
    let x = e.exp_i_apply(-TAU, psi);
    let x = u.unitary.apply(x.as_ref());
    let x = e.exp_i_apply(TAU, x.as_ref());
    let x = u.unitary.apply_adjoint(x.as_ref());
    Ok(psi.adjoint() * x)
}

fn scalar_residual(m: &Mat<c64>, z: c64) -> f64 {
    let n = m.nrows();
    let diff = Mat::from_fn(n, n, |i, j| m[(i, j)] - if i == j { z } else { ZERO });
    spectral_norm(diff.as_ref())
}

fn determinant(m: &Mat<c64>) -> c64 {
    // Small p×p matrices: Gaussian elimination with partial pivoting.
    let n = m.nrows();
    let mut a = m.clone();
    let mut det = c64::new(1.0, 0.0);
    for k in 0..n {
        let piv = (k..n).max_by(|&i, &j| a[(i, k)].norm().total_cmp(&a[(j, k)].norm())).unwrap();
        if a[(piv, k)].norm() == 0.0 {
            return ZERO;
        }
        if piv != k {
            for j in 0..n {
                let t = a[(k, j)];
                a[(k, j)] = a[(piv, j)];
                a[(piv, j)] = t;
            }
            det = -det;
        }
        det *= a[(k, k)];
        for i in k + 1..n {
            let f = a[(i, k)] / a[(k, k)];
            for j in k..n {
                let v = a[(k, j)];
                a[(i, j)] -= f * v;
            }
        }
    }
    det
}

/// `‖PZ_−P − e^{(2πi/p)tr(PT_−)}P‖` and `|det(PZ_−P) − 1|`.
pub fn core_identity_check(g: &GroundSpace, u: &ProcessUnitary, d: &DressedCharge, ts: &TransportSplit) -> Result<BraidReport> {
    let m = z_minus_compressed(g, u, d)?;
    let trace: f64 = ts.t_minus.expectations(g.vectors()).iter().map(|z| z.re).sum::<f64>() + (g.p as f64) * ts.shift as f64;
    let z = c64::cis(TAU * trace / g.p as f64);
    Ok(BraidReport {
        identity_residual: Some(scalar_residual(&m, z)),
        det_deviation: Some((determinant(&m) - c64::new(1.0, 0.0)).norm()),
        trace: Some(trace),
        p: g.p,
        ..Default::default()
    })
}

/// Diagonal charge of the half of `Γ` adjacent to `∂_side`.
pub fn half_charge(b: &FockBasis, gamma: &HalfTorus, side: Side) -> Vec<f64> {
    let half = gamma.side_length() as isize / 2;
    let cut = half / 2;
    let cols: Vec<isize> = match side {
        Side::Minus => (1..=cut).collect(),
        Side::Plus => (cut + 1..=half).collect(),
    };
    charge_values(b, &gamma.lattice().columns("Γ-half", gamma.axis(), &cols))
}

fn diag_minus(d: &[f64], k: &Mat<c64>) -> Mat<c64> {
    let mut m = -k;
    for (i, &v) in d.iter().enumerate() {
        m[(i, i)] += c64::new(v, 0.0);
    }
    m
}

/// The pair of generators of `Z_side(φ) = e^{iφA} e^{−iφB}`:
/// `A = Q_side ± T_side − U†K_side U`, `B = Q_side − K_side` with `Q_side` the half of
/// `Γ` next to that boundary.
pub struct Twist {
    pub a: Eigh,
    pub b: Eigh,
}

pub fn twist(b: &FockBasis, u: &ProcessUnitary, d: &DressedCharge, ts: &TransportSplit, side: Side) -> Result<Twist> {
    let q = half_charge(b, &d.gamma, side);
    let k = d.k_side(side);
    let ku = u.unitary.apply_right(k.as_ref());
    let ku = u.unitary.apply_adjoint(ku.as_ref());
    let t = match side {
        Side::Minus => &ts.t_minus,
        Side::Plus => &ts.t_plus,
    };
    let mut a = diag_minus(&q, &ku);
    a += t.to_dense();
    let a = linalg::hermitian_part(a.as_ref());
    let bm = diag_minus(&q, k);
    Ok(Twist {
        a: eigh(a.as_ref())?,
        b: eigh(bm.as_ref())?,
    })
}

impl Twist {
    pub fn at(&self, phi: f64) -> Mat<c64> {
        let right = self.b.exp_i(-phi);
        self.a.exp_i_apply(phi, right.as_ref())
    }
}

/// `‖Z_−(φ)Z_+(φ) − U†e^{iφQ̄}Ue^{−iφQ̄}‖`.
pub fn twist_product_residual(
    b: &FockBasis,
    u: &ProcessUnitary,
    d: &DressedCharge,
    ts: &TransportSplit,
    phi: f64,
) -> Result<f64> {
    let zm = twist(b, u, d, ts, Side::Minus)?.at(phi);
    let zp = twist(b, u, d, ts, Side::Plus)?.at(phi);
    let e = eigh(d.qbar().as_ref())?;
    let right = e.exp_i(-phi);
    let mid = e.exp_i(phi);
    let x = u.unitary.apply(mid.as_ref());
    let x = u.unitary.apply_adjoint(x.as_ref());
    let target = x * right;
    Ok(spectral_norm((zm * zp - target).as_ref()))
}

/// `‖[W, P]‖` for unitary `W` from its compression `M = Ψ†WΨ`.
fn commutator_from_compression(m: &Mat<c64>) -> f64 {
    let n = m.nrows();
    let leak = |g: Mat<c64>| {
        let id = Mat::from_fn(n, n, |i, j| if i == j { c64::new(1.0, 0.0) } else { ZERO } - g[(i, j)]);
        let h = linalg::hermitian_part(id.as_ref());
        linalg::eigvalsh(h.as_ref())
            .map(|v| v.into_iter().fold(0.0f64, f64::max).max(0.0).sqrt())
            .unwrap_or(f64::NAN)
    };
    leak(m.adjoint() * m).max(leak(m * m.adjoint()))
}

/// Scans `Z_−(φ)` over `φ_k = 2πk/steps`: the largest `‖[Z_−(φ), P]‖` and the largest
/// residual of the phase ODE with a five-point stencil on the same grid.
pub fn interpolation_check(
    g: &GroundSpace,
    b: &FockBasis,
    u: &ProcessUnitary,
    d: &DressedCharge,
    ts: &TransportSplit,
    steps: usize,
) -> Result<BraidReport> {
    if steps < 4 {
        return Err(Error::Numerical("interpolation grid needs at least 4 steps".into()));
    }
    let tw = twist(b, u, d, ts, Side::Minus)?;
    let psi = g.vectors();
    let x = psi.adjoint() * &tw.a.vectors;
    let w = tw.a.vectors.adjoint() * &tw.b.vectors;
    let y = tw.b.vectors.adjoint() * psi;
    let n = w.nrows();
    let compressed = |phi: f64| {
        let by = Mat::from_fn(n, y.ncols(), |i, j| y[(i, j)] * c64::cis(-phi * tw.b.values[i]));
        let wy = &w * by;
        let awy = Mat::from_fn(n, y.ncols(), |i, j| wy[(i, j)] * c64::cis(phi * tw.a.values[i]));
        &x * awy
    };
    let h = TAU / steps as f64;
    let p = g.p as f64;
    let trace: f64 = ts.t_minus.expectations(psi).iter().map(|z| z.re).sum::<f64>() + p * ts.shift as f64;
    let rate = c64::new(0.0, trace / p);
    let samples: Vec<Mat<c64>> = (-2..=steps as isize + 2).map(|k| compressed(k as f64 * h)).collect();
    let mut max_comm: f64 = 0.0;
    let mut max_res: f64 = 0.0;
    for k in 0..=steps {
        let c = k + 2;
        let m = &samples[c];
        max_comm = max_comm.max(commutator_from_compression(m));
        let dm = Mat::from_fn(m.nrows(), m.ncols(), |i, j| {
            (samples[c - 2][(i, j)] - samples[c - 1][(i, j)] * 8.0 + samples[c + 1][(i, j)] * 8.0 - samples[c + 2][(i, j)])
                / (12.0 * h)
        });
        let res = dm - linalg::scaled(m.as_ref(), rate);
        max_res = max_res.max(spectral_norm(res.as_ref()));
    }
    Ok(BraidReport {
        max_commutator: Some(max_comm),
        ode_residual: Some(max_res),
        trace: Some(trace),
        p: g.p,
        ..Default::default()
    })
}

/// Phase of `U₂†U₁U₂U₁†` on the ground space.
pub fn braid_commutator(g: &GroundSpace, u1: &ManyBodyOperator, u2: &ManyBodyOperator) -> BraidReport {
    let psi = g.vectors();
    let x = u1.apply_adjoint(psi);
    let x = u2.apply(x.as_ref());
    let x = u1.apply(x.as_ref());
    let x = u2.apply_adjoint(x.as_ref());
    let m = psi.adjoint() * x;
    let p = g.p;
    let mean = (0..p).map(|i| m[(i, i)]).sum::<c64>() / p as f64;
    let phase = mean.arg();
    BraidReport {
        phase: Some(phase),
        phase_deviation: Some(scalar_residual(&m, c64::cis(phase))),
        phase_fractionality: Some(TAU * linalg::dist_to_fraction_lattice(phase / TAU, p)),
        p,
        ..Default::default()
    }
}

/// Dual plaquette named by its lower-left site.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Plaquette(pub usize);

impl Plaquette {
    pub fn corners(self, t: &TorusLattice) -> [usize; 4] {
        let s = self.0;
        [s, t.translate(s, (1, 0)), t.translate(s, (0, 1)), t.translate(s, (1, 1))]
    }

    pub fn inside(self, t: &TorusLattice, r: &Region) -> bool {
        self.corners(t).iter().all(|&c| r.contains(c))
    }
}

fn bond_plaquettes(t: &TorusLattice, bond: &Bond) -> [usize; 2] {
    match bond.axis {
        Axis::One => [bond.from, t.translate(bond.from, (0, -1))],
        Axis::Two => [bond.from, t.translate(bond.from, (-1, 0))],
    }
}

/// Orders a bond list as a dual path. Returns its endpoints, or `None` for a closed loop.
pub fn dual_path_endpoints(t: &TorusLattice, bonds: &[Bond]) -> Result<Option<[Plaquette; 2]>> {
    let Some(first) = bonds.first() else {
        return Ok(None);
    };
    let p0 = bond_plaquettes(t, first);
    if bonds.len() == 1 {
        return Ok(Some([Plaquette(p0[0]), Plaquette(p0[1])]));
    }
    let p1 = bond_plaquettes(t, &bonds[1]);
    let (start, mut cur) = if p1.contains(&p0[1]) { (p0[0], p0[1]) } else { (p0[1], p0[0]) };
    for bond in &bonds[1..] {
        let pl = bond_plaquettes(t, bond);
        if pl[0] == cur {
            cur = pl[1];
        } else if pl[1] == cur {
            cur = pl[0];
        } else {
            return Err(Error::StringOperator("string bonds are not a contiguous dual path".into()));
        }
    }
    Ok(if cur == start { None } else { Some([Plaquette(start), Plaquette(cur)]) })
}

/// Bonds of the lattice with exactly one end in `omega`.
pub fn boundary_bonds(t: &TorusLattice, omega: &Region) -> Vec<Bond> {
    t.bonds()
        .into_iter()
        .filter(|b| omega.contains(b.from) != omega.contains(b.to))
        .collect()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StringMethod {
    /// `e^{2πi(Q_Ω − K_γ)}`, exact for the frame-rotated family.
    #[default]
    ClosedForm,
    /// Midpoint Magnus steps with halving and Richardson extrapolation.
    Magnus,
}

/// An open or closed string operator `U_γ` cut from the dressed charge of a region.
#[derive(Clone, Debug)]
pub struct StringOperator {
    pub omega: Region,
    pub bonds: Vec<Bond>,
    /// Indices of the boundary currents kept.
    pub terms: Vec<usize>,
    pub endpoints: Option<[Plaquette; 2]>,
    pub unitary: ManyBodyOperator,
    pub method: StringMethod,
    /// Magnus steps used (zero for the closed form).
    pub magnus_steps: usize,
    /// `‖U_N − U_{N/2}‖` at the accepted step count.
    pub halving_difference: Option<f64>,
    /// `‖U_Magnus − U_closed‖` when the Magnus path was taken.
    pub closed_form_deviation: Option<f64>,
}

impl StringOperator {
    pub fn is_closed(&self) -> bool {
        self.endpoints.is_none() && !self.bonds.is_empty()
    }
}

/// `U_γ = T exp(−i∫₀^{2π} Σ_{b∈γ} K_b(φ) dφ)` with `K_b(φ) = e^{−iφQ_Ω}K_b e^{iφQ_Ω}`.
///
/// `bonds` is either the whole boundary of `Ω` or an ordered contiguous dual path on it.
pub fn string_operator(t: &TorusLattice, rc: &RegionCharge, bonds: &[Bond], method: StringMethod) -> Result<StringOperator> {
    let n = rc.charge.len();
    let boundary = boundary_bonds(t, &rc.omega);
    let mut terms = Vec::new();
    for bond in bonds {
        if !boundary.contains(bond) {
            return Err(Error::Geometry(format!("bond {}-{} is not on the boundary of {}", bond.from, bond.to, rc.omega.label())));
        }
        let pair = [bond.from.min(bond.to), bond.from.max(bond.to)];
        let found: Vec<usize> = (0..rc.currents.len())
            .filter(|&k| rc.currents[k].support.sites() == pair)
            .collect();
        terms.extend(found);
    }
    let full = !bonds.is_empty() && boundary.iter().all(|b| bonds.contains(b));
    let endpoints = if full { None } else { dual_path_endpoints(t, bonds)? };
    if bonds.is_empty() {
        return Ok(StringOperator {
            omega: rc.omega.clone(),
            bonds: Vec::new(),
            terms,
            endpoints: None,
            unitary: ManyBodyOperator::identity(n),
            method,
            magnus_steps: 0,
            halving_difference: None,
            closed_form_deviation: None,
        });
    }
    let closed = eigh(rc.generator(&terms)?.as_ref())?.exp_i(TAU);
    let (unitary, magnus_steps, halving_difference, closed_form_deviation) = match method {
        StringMethod::ClosedForm => (closed, 0, None, None),
        StringMethod::Magnus => {
            let k = eigh(rc.k_of(&terms)?.as_ref())?;
            let (u, steps, diff) = magnus_loop(&k, &rc.charge, 256, 1e-2)?;
            let dev = spectral_norm((&u - &closed).as_ref());
            (u, steps, Some(diff), Some(dev))
        }
    };
    Ok(StringOperator {
        omega: rc.omega.clone(),
        bonds: bonds.to_vec(),
        terms,
        endpoints,
        unitary: ManyBodyOperator::dense(unitary),
        method,
        magnus_steps,
        halving_difference,
        closed_form_deviation,
    })
}

/// Midpoint product `e^{−iφ_{N−1}Q}(E e^{ihQ})^{N−1} E e^{iφ_0 Q}` with `E = e^{−ihK}`.
fn magnus_product(k: &Eigh, q: &[f64], steps: usize) -> Mat<c64> {
    let h = TAU / steps as f64;
    let e = k.exp_i(-h);
    let dq: Vec<c64> = q.iter().map(|&v| c64::cis(h * v)).collect();
    let step = linalg::diag_right(e.as_ref(), &dq);
    let mut power = linalg::identity(q.len());
    let mut base = step;
    let mut m = steps - 1;
    while m > 0 {
        if m & 1 == 1 {
            power = &power * &base;
        }
        m >>= 1;
        if m > 0 {
            base = &base * &base;
        }
    }
    let first: Vec<c64> = q.iter().map(|&v| c64::cis(0.5 * h * v)).collect();
    let last: Vec<c64> = q.iter().map(|&v| c64::cis(-(TAU - 0.5 * h) * v)).collect();
    let x = &power * e;
    let x = linalg::diag_right(x.as_ref(), &first);
    linalg::diag_left(&last, x.as_ref())
}

/// Doubles the step count until successive midpoint products agree to `tol`, then
/// Richardson-extrapolates and restores unitarity.
fn magnus_loop(k: &Eigh, q: &[f64], start: usize, tol: f64) -> Result<(Mat<c64>, usize, f64)> {
    let mut coarse = magnus_product(k, q, start / 2);
    let mut steps = start;
    loop {
        let fine = magnus_product(k, q, steps);
        let diff = spectral_norm((&fine - &coarse).as_ref());
        if diff < tol || steps >= 4096 {
            let extrapolated = Mat::from_fn(fine.nrows(), fine.ncols(), |i, j| (fine[(i, j)] * 4.0 - coarse[(i, j)]) / 3.0);
            return Ok((linalg::unitarize(&extrapolated, 3), steps, diff));
        }
        coarse = fine;
        steps *= 2;
    }
}

/// Charge of one string endpoint: `ε = ⟨Q_R⟩_φ − ⟨Q_R⟩_ψ` with `φ = U_γψ`, averaged over
/// the ground space, and the same for the complement of `R`.
#[derive(Clone, Debug, Serialize)]
pub struct ExcitationCharge {
    pub epsilon: f64,
    pub complement: f64,
    /// `|ε + ε_c|`, zero by charge conservation.
    pub sum: f64,
    /// Distance of `ε` to `ℤ/p`.
    pub fractionality: f64,
}

pub fn excitation_charge(g: &GroundSpace, b: &FockBasis, s: &StringOperator, r: &Region) -> Result<ExcitationCharge> {
    let t = b.lattice();
    if let Some(ends) = s.endpoints {
        let inside = ends.iter().filter(|e| e.inside(t, r)).count();
        if inside != 1 {
            return Err(Error::Geometry(format!("{} must contain exactly one string endpoint, found {inside}", r.label())));
        }
    } else if !s.bonds.is_empty() {
        return Err(Error::Geometry("a closed string has no endpoints".into()));
    }
    let psi = g.vectors();
    let phi = s.unitary.apply(psi);
    let p = g.p as f64;
    let mean = |r: &Region, x: faer::MatRef<c64>| {
        let q = ManyBodyOperator::diagonal(charge_values(b, r).into_iter().map(|v| c64::new(v, 0.0)).collect());
        q.expectations(x).iter().map(|z| z.re).sum::<f64>() / p
    };
    let rc = r.complement();
    let epsilon = mean(r, phi.as_ref()) - mean(r, psi);
    let complement = mean(&rc, phi.as_ref()) - mean(&rc, psi);
    Ok(ExcitationCharge {
        epsilon,
        complement,
        sum: (epsilon + complement).abs(),
        fractionality: linalg::dist_to_fraction_lattice(epsilon, g.p),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct BraidPhase {
    /// `arg tr(P U_γ†U_αU_γ P) − arg tr(P U_α P)` wrapped to `(−π, π]`.
    pub phase: f64,
    /// `arg tr(P U_α P)`.
    pub baseline: f64,
    /// `|tr(P U_α P)|/p`; one when the loop acts as a phase on the ground space.
    pub baseline_modulus: f64,
    pub enclosed: usize,
    /// Distance of the phase to `2π(ℤ/p)`.
    pub fractionality: f64,
}

/// Phase picked up by a closed loop `α` around one endpoint of `γ`.
pub fn braid_phase(g: &GroundSpace, t: &TorusLattice, s: &StringOperator, alpha: &StringOperator) -> Result<BraidPhase> {
    if !alpha.is_closed() {
        return Err(Error::Geometry("braiding loop must be closed".into()));
    }
    let enclosed = match s.endpoints {
        Some(ends) => {
            let n = ends.iter().filter(|e| e.inside(t, &alpha.omega)).count();
            if n != 1 {
                return Err(Error::Geometry(format!("loop encloses {n} string endpoints, expected one")));
            }
            n
        }
        None => 0,
    };
    let psi = g.vectors();
    let p = g.p as f64;
    let trace = |x: faer::MatRef<c64>| {
        let y = alpha.unitary.apply(x);
        (0..x.ncols())
            .map(|k| (0..x.nrows()).map(|i| x[(i, k)].conj() * y[(i, k)]).sum::<c64>())
            .sum::<c64>()
            / p
    };
    let base = trace(psi);
    let phi = s.unitary.apply(psi);
    let excited = trace(phi.as_ref());
    let phase = linalg::wrap_angle(excited.arg() - base.arg());
    Ok(BraidPhase {
        phase,
        baseline: base.arg(),
        baseline_modulus: base.norm(),
        enclosed,
        fractionality: TAU * linalg::dist_to_fraction_lattice(phase / TAU, g.p),
    })
}

/// Largest change of a probe expectation between `ψ` and `U_γψ` among probes whose
/// support keeps torus distance `> margin` from both endpoints.
pub fn far_probe_deviation(
    g: &GroundSpace,
    t: &TorusLattice,
    s: &StringOperator,
    probes: &[(Region, ManyBodyOperator)],
    margin: usize,
) -> f64 {
    let Some(ends) = s.endpoints else {
        return 0.0;
    };
    let psi = g.vectors();
    let phi = s.unitary.apply(psi);
    let p = g.p as f64;
    let mut worst: f64 = 0.0;
    for (support, o) in probes {
        let far = support.sites().iter().all(|&x| {
            ends.iter()
                .all(|e| e.corners(t).iter().all(|&c| t.torus_distance(x, c) > margin))
        });
        if !far {
            continue;
        }
        let before: f64 = o.expectations(psi).iter().map(|z| z.re).sum::<f64>() / p;
        let after: f64 = o.expectations(phi.as_ref()).iter().map(|z| z.re).sum::<f64>() / p;
        worst = worst.max((after - before).abs());
    }
    worst
}
