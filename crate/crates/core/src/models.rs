//! Concrete lattice Hamiltonians: Hofstadter, staggered chain, atomic insulator.

use std::fmt;
use std::str::FromStr;

use faer::Mat;
use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{
    assemble_hamiltonian, build_basis, density_density_term, hopping_term, onsite_term, FockBasis, LocalTerm,
    ManyBodyOperator, Statistics,
};
use crate::lattice::{build_torus, Axis, TorusLattice};
use crate::linalg::{c64, ZERO};

/// Magnetic flux per plaquette in units of the flux quantum.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "FluxRepr", into = "String")]
pub struct Flux(pub Rational64);

#[derive(Deserialize)]
#[serde(untagged)]
enum FluxRepr {
    Int(i64),
    Text(String),
}

impl TryFrom<FluxRepr> for Flux {
    type Error = Error;
    fn try_from(r: FluxRepr) -> Result<Flux> {
        match r {
            FluxRepr::Int(n) => Ok(Flux(Rational64::from_integer(n))),
            FluxRepr::Text(s) => s.parse(),
        }
    }
}

impl From<Flux> for String {
    fn from(f: Flux) -> String {
        f.to_string()
    }
}

impl fmt::Display for Flux {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if *self.0.denom() == 1 {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl FromStr for Flux {
    type Err = Error;

    /// Accepts `p/q` or an integer, with optional surrounding whitespace.
    fn from_str(s: &str) -> Result<Flux> {
        let t = s.trim();
        let bad = || Error::InvalidModel(format!("cannot parse flux {s:?}; expected p/q"));
        let (n, d) = match t.split_once('/') {
            Some((n, d)) => (n.trim().parse::<i64>().map_err(|_| bad())?, d.trim().parse::<i64>().map_err(|_| bad())?),
            None => (t.parse::<i64>().map_err(|_| bad())?, 1),
        };
        if d == 0 {
            return Err(Error::InvalidModel(format!("flux {s:?} has a zero denominator")));
        }
        if n.checked_neg().is_none() || d.checked_neg().is_none() {
            return Err(bad());
        }
        Ok(Flux(Rational64::new(n, d)))
    }
}

impl Flux {
    pub fn new(n: i64, d: i64) -> Flux {
        Flux(Rational64::new(n, d))
    }

    pub fn as_f64(&self) -> f64 {
        *self.0.numer() as f64 / *self.0.denom() as f64
    }

    pub fn is_zero(&self) -> bool {
        *self.0.numer() == 0
    }

    /// `self·n`, e.g. the flux through one column of `n` plaquettes.
    pub fn times(&self, n: usize) -> Flux {
        Flux(self.0 * Rational64::from_integer(n as i64))
    }

    /// True when `self·n` is an integer.
    pub fn commensurate_with(&self, n: usize) -> bool {
        (*self.0.numer() as i128 * n as i128) % (*self.0.denom() as i128) == 0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Hofstadter,
    StaggeredChain,
    AtomicInsulator,
}

/// Landau gauge: which bonds carry the Peierls phases.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Gauge {
    /// Phases `2πα·i2` on direction-1 bonds; needs `α·L2 ∈ ℤ`.
    #[default]
    Axis1,
    /// Phases `−2πα·i1` on direction-2 bonds; needs `α·L1 ∈ ℤ`.
    Axis2,
}

fn default_hopping() -> f64 {
    1.0
}

fn default_l2() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub l1: usize,
    #[serde(default = "default_l2")]
    pub l2: usize,
    #[serde(default)]
    pub statistics: Statistics,
    #[serde(default = "default_hopping")]
    pub hopping: f64,
    /// Nearest-neighbour density-density interaction.
    #[serde(default)]
    pub interaction: f64,
    /// Staggered potential amplitude `Δ(−1)^i`.
    #[serde(default)]
    pub staggering: f64,
    /// Uniform on-site potential.
    #[serde(default)]
    pub potential: f64,
    #[serde(default)]
    pub flux: Flux,
    #[serde(default)]
    pub particles: Option<usize>,
    #[serde(default)]
    pub gauge: Gauge,
}

impl ModelSpec {
    pub fn hofstadter(l1: usize, l2: usize, flux: Flux, particles: Option<usize>) -> ModelSpec {
        ModelSpec {
            kind: ModelKind::Hofstadter,
            l1,
            l2,
            statistics: Statistics::Fermion,
            hopping: 1.0,
            interaction: 0.0,
            staggering: 0.0,
            potential: 0.0,
            flux,
            particles,
            gauge: Gauge::Axis1,
        }
    }

    pub fn staggered_chain(l: usize, hopping: f64, staggering: f64, particles: usize) -> ModelSpec {
        ModelSpec {
            kind: ModelKind::StaggeredChain,
            l1: l,
            l2: 1,
            statistics: Statistics::Fermion,
            hopping,
            interaction: 0.0,
            staggering,
            potential: 0.0,
            flux: Flux::default(),
            particles: Some(particles),
            gauge: Gauge::Axis1,
        }
    }

    /// Checkerboard potential `±staggering` with no hopping.
    pub fn atomic_insulator(l1: usize, l2: usize, staggering: f64, particles: usize) -> ModelSpec {
        ModelSpec {
            kind: ModelKind::AtomicInsulator,
            l1,
            l2,
            statistics: Statistics::Fermion,
            hopping: 0.0,
            interaction: 0.0,
            staggering,
            potential: 0.0,
            flux: Flux::default(),
            particles: Some(particles),
            gauge: Gauge::Axis1,
        }
    }

    pub fn with_statistics(mut self, s: Statistics) -> ModelSpec {
        self.statistics = s;
        self
    }

    pub fn lattice(&self) -> Result<TorusLattice> {
        build_torus(self.l1, self.l2)
    }

    pub fn validate(&self) -> Result<()> {
        let t = self.lattice()?;
        for (name, v) in [
            ("hopping", self.hopping),
            ("interaction", self.interaction),
            ("staggering", self.staggering),
            ("potential", self.potential),
        ] {
            if !v.is_finite() {
                return Err(Error::InvalidModel(format!("{name} must be finite")));
            }
        }
        if let Some(n) = self.particles {
            if n > t.dim() {
                return Err(Error::InvalidModel(format!("{n} particles on {} sites", t.dim())));
            }
        }
        match self.kind {
            ModelKind::Hofstadter => {
                let ok = match self.gauge {
                    Gauge::Axis1 => self.flux.commensurate_with(self.l2),
                    Gauge::Axis2 => self.flux.commensurate_with(self.l1),
                };
                if !ok {
                    return Err(Error::InvalidModel(format!(
                        "flux {} is incommensurate with the {}x{} torus in gauge {:?}",
                        self.flux, self.l1, self.l2, self.gauge
                    )));
                }
            }
            ModelKind::StaggeredChain => {
                if self.l2 != 1 || self.l1 % 2 != 0 {
                    return Err(Error::InvalidModel(format!(
                        "staggered chain needs an even ring, got {}x{}",
                        self.l1, self.l2
                    )));
                }
            }
            ModelKind::AtomicInsulator => {}
        }
        Ok(())
    }

    /// One-particle hoppings `(to, from, amplitude)` meaning `amplitude·c_to† c_from + h.c.`,
    /// and on-site potentials.
    pub fn one_particle_terms(&self) -> Result<(Vec<(usize, usize, c64)>, Vec<f64>)> {
        self.validate()?;
        let t = self.lattice()?;
        let mut hops = Vec::new();
        let mut onsite = vec![self.potential; t.dim()];
        match self.kind {
            ModelKind::Hofstadter => {
                let alpha = self.flux.as_f64();
                for b in t.bonds() {
                    let (i1, i2) = t.coords(b.from);
                    let theta = match (self.gauge, b.axis) {
                        (Gauge::Axis1, Axis::One) => std::f64::consts::TAU * alpha * i2 as f64,
                        (Gauge::Axis2, Axis::Two) => -std::f64::consts::TAU * alpha * i1 as f64,
                        _ => 0.0,
                    };
                    hops.push((b.to, b.from, c64::cis(theta) * (-self.hopping)));
                }
            }
            ModelKind::StaggeredChain => {
                for b in t.bonds() {
                    hops.push((b.to, b.from, c64::new(-self.hopping, 0.0)));
                }
                for (i, v) in onsite.iter_mut().enumerate() {
                    *v += if i % 2 == 0 { self.staggering } else { -self.staggering };
                }
            }
            ModelKind::AtomicInsulator => {
                for (s, v) in onsite.iter_mut().enumerate() {
                    let (a, b) = t.coords(s);
                    *v += if (a + b) % 2 == 0 { self.staggering } else { -self.staggering };
                }
            }
        }
        Ok((hops, onsite))
    }

    pub fn basis(&self) -> Result<FockBasis> {
        let n = self
            .particles
            .ok_or_else(|| Error::InvalidModel("many-body model needs a particle number".into()))?;
        build_basis(&self.lattice()?, self.statistics, n)
    }
}

/// One-particle Hamiltonian on the sites of the torus.
pub fn one_particle_hamiltonian(spec: &ModelSpec) -> Result<Mat<c64>> {
    let t = spec.lattice()?;
    let (hops, onsite) = spec.one_particle_terms()?;
    let n = t.dim();
    let mut h = Mat::<c64>::zeros(n, n);
    for (to, from, a) in hops {
        h[(to, from)] += a;
        h[(from, to)] += a.conj();
    }
    for (i, v) in onsite.into_iter().enumerate() {
        h[(i, i)] += c64::new(v, 0.0);
    }
    Ok(h)
}

/// Hofstadter hopping matrix with Landau-gauge Peierls phases.
pub fn hofstadter_one_particle(spec: &ModelSpec) -> Result<Mat<c64>> {
    if spec.kind != ModelKind::Hofstadter {
        return Err(Error::InvalidModel("expected a Hofstadter spec".into()));
    }
    one_particle_hamiltonian(spec)
}

/// Second-quantized local terms of any shipped model on the given basis.
pub fn many_body_terms(spec: &ModelSpec, b: &FockBasis) -> Result<Vec<LocalTerm>> {
    let (hops, onsite) = spec.one_particle_terms()?;
    let t = spec.lattice()?;
    let mut out = Vec::new();
    for (to, from, a) in hops {
        if a != ZERO {
            out.push(hopping_term(b, to, from, a)?);
        }
    }
    for (i, v) in onsite.into_iter().enumerate() {
        if v != 0.0 {
            out.push(onsite_term(b, i, v)?);
        }
    }
    if spec.interaction != 0.0 {
        for bond in t.bonds() {
            out.push(density_density_term(b, bond.from, bond.to, spec.interaction)?);
        }
    }
    Ok(out)
}

pub fn hofstadter_many_body(spec: &ModelSpec, b: &FockBasis) -> Result<Vec<LocalTerm>> {
    if spec.kind != ModelKind::Hofstadter {
        return Err(Error::InvalidModel("expected a Hofstadter spec".into()));
    }
    many_body_terms(spec, b)
}

pub fn staggered_chain(spec: &ModelSpec, b: &FockBasis) -> Result<Vec<LocalTerm>> {
    if spec.kind != ModelKind::StaggeredChain {
        return Err(Error::InvalidModel("expected a staggered-chain spec".into()));
    }
    many_body_terms(spec, b)
}

pub fn atomic_insulator(spec: &ModelSpec, b: &FockBasis) -> Result<Vec<LocalTerm>> {
    if spec.kind != ModelKind::AtomicInsulator {
        return Err(Error::InvalidModel("expected an atomic-insulator spec".into()));
    }
    many_body_terms(spec, b)
}

/// Basis and assembled Hamiltonian.
pub fn build_many_body(spec: &ModelSpec) -> Result<(FockBasis, ManyBodyOperator)> {
    let b = spec.basis()?;
    let terms = many_body_terms(spec, &b)?;
    let h = assemble_hamiltonian(&b, terms)?;
    Ok((b, h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{eigvalsh, hermiticity_defect};

    #[test]
    fn flux_parsing() {
        assert_eq!("1/3".parse::<Flux>().unwrap(), Flux::new(1, 3));
        assert_eq!(" -2/6 ".parse::<Flux>().unwrap(), Flux::new(-1, 3));
        assert_eq!("2".parse::<Flux>().unwrap(), Flux::new(2, 1));
        assert!("1/0".parse::<Flux>().is_err());
        assert!("x".parse::<Flux>().is_err());
        assert_eq!(Flux::new(3, 12).to_string(), "1/4");
    }

    #[test]
    fn flux_serde_round_trip() {
        let f = Flux::new(1, 4);
        let s = serde_json::to_string(&f).unwrap();
        assert_eq!(s, "\"1/4\"");
        assert_eq!(serde_json::from_str::<Flux>(&s).unwrap(), f);
        assert_eq!(serde_json::from_str::<Flux>("0").unwrap(), Flux::default());
    }

    #[test]
    fn zero_flux_band_edges() {
        let h = hofstadter_one_particle(&ModelSpec::hofstadter(4, 4, Flux::default(), None)).unwrap();
        let e = eigvalsh(h.as_ref()).unwrap();
        assert!((e[0] + 4.0).abs() < 1e-12 && (e[15] - 4.0).abs() < 1e-12);
    }

    #[test]
    fn half_flux_is_chiral() {
        let h = hofstadter_one_particle(&ModelSpec::hofstadter(4, 4, Flux::new(1, 2), None)).unwrap();
        assert!(hermiticity_defect(h.as_ref()) < 1e-14);
        let e = eigvalsh(h.as_ref()).unwrap();
        for k in 0..16 {
            assert!((e[k] + e[15 - k]).abs() < 1e-10);
        }
    }

    #[test]
    fn incommensurate_flux_rejected() {
        assert!(hofstadter_one_particle(&ModelSpec::hofstadter(8, 8, Flux::new(1, 3), None)).is_err());
        let mut s = ModelSpec::hofstadter(6, 4, Flux::new(1, 3), None);
        assert!(s.validate().is_err());
        s.gauge = Gauge::Axis2;
        assert!(s.validate().is_ok());
    }

    #[test]
    fn odd_chain_rejected() {
        assert!(ModelSpec::staggered_chain(7, 1.0, 2.0, 3).validate().is_err());
    }
}
