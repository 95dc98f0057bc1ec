//! Many-body index of charge transport for gapped lattice systems.
//!
//! The crate computes the free-fermion index `tr[P(U†QU − Q)_−]` and its many-body
//! generalization `⟨ψ|T_−|ψ⟩` on small tori by exact diagonalization, together with
//! the quasi-adiabatic dressed charges, flux-threading unitaries, braiding commutators
//! and anyon string operators that enter its integrality theorem.

pub mod braiding;
pub mod eigensolver;
pub mod error;
pub mod fock;
pub mod free_fermion;
pub mod lattice;
pub mod linalg;
pub mod models;
pub mod quasi_adiabatic;
pub mod sparse;
pub mod spectral_filter;
pub mod transport;

pub use error::{Error, Result};
