//! Experiment drivers.

use std::f64::consts::TAU;
use std::time::Instant;

use fluxindex::braiding::{
    boundary_bonds, braid_commutator, braid_phase, core_identity_check, excitation_charge, interpolation_check,
    string_operator, Plaquette,
};
use fluxindex::fock::{ground_space_seeded, standard_probes, topological_order_deviation, FockBasis, GroundSpace, ManyBodyOperator};
use fluxindex::free_fermion::{
    exp_2pi_i, ff_dressed_charge, ff_flux_unitary, ff_index, ff_proof_chain, ff_translation, lowest_band_projection,
    OnePartOperator,
};
use fluxindex::lattice::{half_torus_region, Axis, HalfTorus, Side};
use fluxindex::models::{build_many_body, one_particle_hamiltonian, ModelKind};
use fluxindex::quasi_adiabatic::{dressed_charge, flux_unitary, region_charge, DressedCharge};
use fluxindex::spectral_filter::{make_filter_with_profile, FilterFunction};
use fluxindex::transport::{
    adz_check, checked_index, hall_conductance, index_theorem_check, lsm_density, transport_split, ProcessUnitary,
};

use crate::config::{ExperimentConfig, ExperimentKind, ProcessSpec};
use crate::record::{ResultRecord, Status};
use crate::CliError;

/// Runs one experiment. Compute failures are recorded in the status, not returned; the
/// `Err` path is reserved for invalid configs and I/O.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ResultRecord, CliError> {
    cfg.validate()?;
    let start = Instant::now();
    let mut rec = ResultRecord::new(cfg.clone());
    let outcome = match cfg.kind {
        ExperimentKind::FfIndex => ff_index_run(cfg, &mut rec),
        ExperimentKind::ProofChain => proof_chain_run(cfg, &mut rec),
        ExperimentKind::MbIndex => mb_index_run(cfg, &mut rec),
        ExperimentKind::Lsm => lsm_run(cfg, &mut rec),
        ExperimentKind::Hall => hall_run(cfg, &mut rec),
        ExperimentKind::Adz => adz_run(cfg, &mut rec),
        ExperimentKind::Braid => braid_run(cfg, &mut rec),
        ExperimentKind::Anyon => anyon_run(cfg, &mut rec),
    };
    if let Err(e) = outcome {
        rec.status = Status::Error { message: e.to_string() };
    }
    rec.wall_clock_seconds = start.elapsed().as_secs_f64();
    Ok(rec)
}

type Run = fluxindex::Result<()>;

fn width(cfg: &ExperimentConfig, gamma: &HalfTorus) -> usize {
    cfg.strip_width.unwrap_or_else(|| gamma.default_strip_width())
}

/// Rank of the filled band for one-particle runs.
fn filled_rank(cfg: &ExperimentConfig) -> fluxindex::Result<usize> {
    match (cfg.model.particles, cfg.model.kind) {
        (Some(n), _) => Ok(n),
        (None, ModelKind::Hofstadter) => Ok(cfg.model.l1 * cfg.model.l2 / *cfg.model.flux.0.denom() as usize),
        _ => Err(fluxindex::Error::InvalidModel("particle number required".into())),
    }
}

fn one_particle(cfg: &ExperimentConfig, rec: &mut ResultRecord) -> fluxindex::Result<OnePartOperator> {
    let h = OnePartOperator::new(one_particle_hamiltonian(&cfg.model)?);
    let (p, fermi, gap) = lowest_band_projection(&h, filled_rank(cfg)?)?;
    rec.diag("fermi_energy", fermi);
    rec.diag("gap", gap);
    Ok(p)
}

fn ff_process(cfg: &ExperimentConfig, p: &OnePartOperator, process: ProcessSpec) -> fluxindex::Result<OnePartOperator> {
    let t = cfg.model.lattice()?;
    Ok(match process {
        ProcessSpec::Identity => OnePartOperator::identity(t.dim()),
        ProcessSpec::Translation { shift } => ff_translation(&t, (shift[0], shift[1])),
        ProcessSpec::Flux { axis, side } => {
            let g = half_torus_region(&t, axis)?;
            ff_flux_unitary(&ff_dressed_charge(p, &g, width(cfg, &g))?, side)?
        }
        ProcessSpec::FullFlux { axis } => {
            let g = half_torus_region(&t, axis)?;
            let d = ff_dressed_charge(p, &g, width(cfg, &g))?;
            OnePartOperator::new(exp_2pi_i(d.qbar.as_ref())?)
        }
    })
}

fn ff_index_run(cfg: &ExperimentConfig, rec: &mut ResultRecord) -> Run {
    let p = one_particle(cfg, rec)?;
    let u = ff_process(cfg, &p, cfg.process.expect("validated"))?;
    let gamma = half_torus_region(&cfg.model.lattice()?, cfg.axis)?;
    let r = ff_index(&p, &u, &gamma, width(cfg, &gamma), cfg.tolerances.commutator)?;
    rec.value = Some(r.value);
    rec.diag("index", r.value);
    rec.diag("imaginary", r.imaginary);
    rec.diag("commutator", r.commutator);
    rec.diag("total_transport", r.total_transport);
    rec.diag("integrality", index_theorem_check(r.value, 1));
    rec.gate("quantized", index_theorem_check(r.value, 1) < cfg.tolerances.integrality);
    rec.attach("ff_index", &r);
    Ok(())
}

/// Flux through `Γ₁` measured across `Γ₂`.
fn proof_chain_run(cfg: &ExperimentConfig, rec: &mut ResultRecord) -> Run {
    let p = one_particle(cfg, rec)?;
    let u = ff_process(cfg, &p, ProcessSpec::Flux { axis: Axis::One, side: Side::Minus })?;
    let gamma = half_torus_region(&cfg.model.lattice()?, Axis::Two)?;
    let r = ff_proof_chain(&p, &u, &gamma, width(cfg, &gamma))?;
    rec.value = Some(r.index);
    for (k, v) in [
        ("index", r.index),
        ("integrality", r.dist_to_integer),
        ("n_commutator", r.n_commutator),
        ("det_residual", r.det_residual),
        ("phase_residual", r.phase_residual),
        ("qbar_commutator", r.qbar_commutator),
        ("pu_commutator", r.pu_commutator),
        ("restriction_residual", r.restriction_residual),
    ] {
        rec.diag(k, v);
    }
    rec.gate("quantized", r.dist_to_integer < cfg.tolerances.integrality);
    rec.attach("proof_chain", &r);
    Ok(())
}

struct System {
    b: FockBasis,
    h: ManyBodyOperator,
    g: GroundSpace,
}

impl System {
    fn new(cfg: &ExperimentConfig, rec: &mut ResultRecord) -> fluxindex::Result<Self> {
        let (b, h) = build_many_body(&cfg.model)?;
        let g = ground_space_seeded(&h, None, cfg.tolerances.multiplet, cfg.seed)?;
        rec.diag("dim", b.dim() as f64);
        rec.diag("p", g.p as f64);
        rec.diag("gap", g.gap);
        rec.diag("ground_energy", g.ground_energy);
        rec.diag("multiplet_spread", g.spread);
        rec.diag("ground_residual", g.residual);
        Ok(System { b, h, g })
    }

    fn gamma(&self, axis: Axis) -> fluxindex::Result<HalfTorus> {
        half_torus_region(self.b.lattice(), axis)
    }

    fn filter(&self, cfg: &ExperimentConfig) -> fluxindex::Result<FilterFunction> {
        make_filter_with_profile(self.g.gap, cfg.filter)
    }

    fn dressed(&self, cfg: &ExperimentConfig, axis: Axis) -> fluxindex::Result<DressedCharge> {
        let gamma = self.gamma(axis)?;
        dressed_charge(&self.h, &self.b, &self.g, &gamma, width(cfg, &gamma), self.filter(cfg)?)
    }

    fn process(&self, cfg: &ExperimentConfig, spec: ProcessSpec) -> fluxindex::Result<ProcessUnitary> {
        Ok(match spec {
            ProcessSpec::Identity => ProcessUnitary::identity(self.b.dim()),
            ProcessSpec::Translation { shift } => ProcessUnitary::translation(&self.b, (shift[0], shift[1])),
            ProcessSpec::Flux { axis, side } => ProcessUnitary::flux(&self.dressed(cfg, axis)?, side)?,
            ProcessSpec::FullFlux { axis } => ProcessUnitary::full_flux(&self.dressed(cfg, axis)?)?,
        })
    }

    fn topological_order(&self, rec: &mut ResultRecord) -> fluxindex::Result<f64> {
        let dev = topological_order_deviation(&self.g, &standard_probes(&self.b)?);
        rec.diag("topological_order", dev);
        Ok(dev)
    }
}

fn mb_index_run(cfg: &ExperimentConfig, rec: &mut ResultRecord) -> Run {
    let s = System::new(cfg, rec)?;
    let dev = s.topological_order(rec)?;
    let u = s.process(cfg, cfg.process.expect("validated"))?;
    let gamma = s.gamma(cfg.axis)?;
    let ts = transport_split(&u, &s.b, &gamma, width(cfg, &gamma), cfg.split)?;
    rec.diag("commutator", u.commutator_norm(&s.g));
    rec.diag("split_residual", ts.split_residual);
    rec.diag("integrality_spread", ts.integrality_spread);
    rec.diag("offset", ts.offset);
    rec.diag("shift", ts.shift as f64);
    let idx = checked_index(&s.g, &ts, dev, cfg.tolerances.topological_order)?;
    rec.value = Some(idx.index);
    rec.diag("index", idx.index);
    rec.diag("state_spread", idx.spread);
    rec.diag("imaginary", idx.imaginary);
    let frac = index_theorem_check(idx.index, idx.p);
    rec.diag("fractionality", frac);
    rec.gate("quantized", frac < cfg.tolerances.integrality);
    rec.attach("index", &idx);
    Ok(())
}

fn lsm_run(cfg: &ExperimentConfig, rec: &mut ResultRecord) -> Run {
    let s = System::new(cfg, rec)?;
    let r = lsm_density(&s.g, &s.h, &s.b, cfg.shift)?;
    rec.value = Some(r.rho);
    rec.diag("rho", r.rho);
    rec.diag("fractionality", r.fractionality);
    rec.diag("symmetry_defect", r.symmetry_defect);
    rec.gate("quantized", r.fractionality < cfg.tolerances.integrality);
    rec.attach("lsm", &r);
    Ok(())
}

fn hall_of(cfg: &ExperimentConfig, s: &System, rec: &mut ResultRecord) -> fluxindex::Result<fluxindex::transport::HallReport> {
    let d1 = s.dressed(cfg, Axis::One)?;
    let g2 = s.gamma(Axis::Two)?;
    let r = hall_conductance(&s.g, &s.b, &d1, &g2, width(cfg, &g2))?;
    rec.diag("sigma", r.sigma);
    rec.diag("sigma_fractionality", r.fractionality);
    rec.diag("commutator", r.commutator);
    rec.diag("split_residual", r.split_residual);
    rec.diag("integrality_spread", r.integrality_spread);
    Ok(r)
}

fn hall_run(cfg: &ExperimentConfig, rec: &mut ResultRecord) -> Run {
    let s = System::new(cfg, rec)?;
    s.topological_order(rec)?;
    let r = hall_of(cfg, &s, rec)?;
    rec.value = Some(r.sigma);
    rec.gate("quantized", r.fractionality < cfg.tolerances.integrality);
    rec.attach("hall", &r);
    Ok(())
}

fn adz_run(cfg: &ExperimentConfig, rec: &mut ResultRecord) -> Run {
    let s = System::new(cfg, rec)?;
    let lsm = lsm_density(&s.g, &s.h, &s.b, cfg.shift)?;
    rec.diag("rho", lsm.rho);
    rec.diag("symmetry_defect", lsm.symmetry_defect);
    let hall = hall_of(cfg, &s, rec)?;
    // Flux through the strip of `shift` columns that the translation sweeps.
    let phi = cfg.model.flux.times(cfg.model.l2 * cfg.shift);
    let dist = adz_check(lsm.rho, phi, hall.sigma, s.g.p);
    rec.value = Some(dist);
    rec.diag("adz_distance", dist);
    rec.gate("adz", dist < cfg.tolerances.integrality);
    rec.attach("lsm", &lsm);
    rec.attach("hall", &hall);
    Ok(())
}

fn braid_run(cfg: &ExperimentConfig, rec: &mut ResultRecord) -> Run {
    let s = System::new(cfg, rec)?;
    let dev = s.topological_order(rec)?;
    rec.gate("topological_order", s.g.p == 1 || dev < cfg.tolerances.topological_order);
    rec.gate("multiplet", s.g.spread < 0.1 * s.g.gap);
    let u = s.process(cfg, cfg.process.expect("validated"))?;
    let d = s.dressed(cfg, cfg.axis)?;
    let gamma = s.gamma(cfg.axis)?;
    let ts = transport_split(&u, &s.b, &gamma, width(cfg, &gamma), cfg.split)?;
    let core = core_identity_check(&s.g, &u, &d, &ts)?;
    let ode = interpolation_check(&s.g, &s.b, &u, &d, &ts, cfg.phi_steps)?;
    for (k, v) in [
        ("identity_residual", core.identity_residual),
        ("det_deviation", core.det_deviation),
        ("trace", ode.trace),
        ("ode_residual", ode.ode_residual),
        ("max_twist_commutator", ode.max_commutator),
    ] {
        if let Some(v) = v {
            rec.diag(k, v);
        }
    }
    rec.attach("core_identity", &core);
    rec.attach("interpolation", &ode);
    if s.b.lattice().l1() >= 4 && s.b.lattice().l2() >= 4 {
        let u1 = flux_unitary(&s.dressed(cfg, Axis::One)?, Side::Minus)?;
        let u2 = flux_unitary(&s.dressed(cfg, Axis::Two)?, Side::Minus)?;
        let br = braid_commutator(&s.g, &u1, &u2);
        if let (Some(phase), Some(dev), Some(frac)) = (br.phase, br.phase_deviation, br.phase_fractionality) {
            rec.value = Some(phase);
            rec.diag("braid_phase", phase);
            rec.diag("braid_scalar_deviation", dev);
            rec.diag("braid_fractionality", frac);
        }
        rec.attach("loop_braid", &br);
    }
    Ok(())
}

/// Open string along `∂_−` of the half torus cut along direction 1, starting at row 0.
fn anyon_run(cfg: &ExperimentConfig, rec: &mut ResultRecord) -> Run {
    let s = System::new(cfg, rec)?;
    let t = s.b.lattice().clone();
    let k = cfg.string_length;
    if k + 2 > t.l2() {
        return Err(fluxindex::Error::Geometry(format!("string of {k} bonds does not fit a torus of height {}", t.l2())));
    }
    let f = s.filter(cfg)?;
    let omega = s.gamma(Axis::One)?.region().clone();
    let rc = region_charge(&s.h, &s.b, &s.g, &omega, f)?;
    let rows: Vec<usize> = (0..k).map(|r| t.site(0, r as isize)).collect();
    let bonds: Vec<_> = boundary_bonds(&t, &omega).into_iter().filter(|b| rows.contains(&b.from)).collect();
    let string = string_operator(&t, &rc, &bonds, cfg.string)?;
    // The endpoint at row k−1 sits in rows {k−1, k}; the other one wraps to row 0.
    let r = t.columns("R", Axis::Two, &[k as isize - 1, k as isize]);
    let e = excitation_charge(&s.g, &s.b, &string, &r)?;
    rec.diag("epsilon", e.epsilon);
    rec.diag("epsilon_complement", e.complement);
    rec.diag("charge_sum", e.sum);
    rec.diag("epsilon_fractionality", e.fractionality);
    if let Some(d) = string.closed_form_deviation {
        rec.diag("magnus_deviation", d);
    }
    let block = t.block("α", (0, 2), (k as isize - 1, 2));
    let rca = region_charge(&s.h, &s.b, &s.g, &block, f)?;
    let alpha = string_operator(&t, &rca, &boundary_bonds(&t, &block), cfg.string)?;
    let bp = braid_phase(&s.g, &t, &string, &alpha)?;
    let empty = string_operator(&t, &rc, &[], cfg.string)?;
    let bp0 = braid_phase(&s.g, &t, &empty, &alpha)?;
    rec.value = Some(bp.phase);
    rec.diag("braid_phase", bp.phase);
    rec.diag("braid_baseline", bp.baseline);
    rec.diag("braid_baseline_modulus", bp.baseline_modulus);
    rec.diag("braid_fractionality", bp.fractionality);
    rec.diag("empty_loop_phase", bp0.phase);
    rec.gate("charge_conservation", e.sum < cfg.tolerances.integrality);
    rec.gate("epsilon_quantized", e.fractionality < cfg.tolerances.integrality);
    rec.gate("braid_quantized", bp.fractionality < TAU * cfg.tolerances.integrality);
    rec.attach("endpoints", string.endpoints.map(|e: [Plaquette; 2]| [e[0].0, e[1].0]));
    rec.attach("excitation", &e);
    rec.attach("braid", &bp);
    Ok(())
}
