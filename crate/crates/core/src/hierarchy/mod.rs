//! Nested many-body states and their canonical representations.

mod canonical;
mod defect;
mod nested;
mod potential;
mod symmetrize;

pub use canonical::{CanonicalState, Payload, Term, CANON_HEADER, DEFAULT_TERM_CAP};
pub use defect::{DefectEntry, EnergyDefectLog};
pub use nested::{
    entanglement_of, HierNode, HierState, LevelTable, Observation, Particle, Restructured, DEFAULT_CONFIRMATIONS, DEFAULT_ETA, MAX_FLAT,
};
pub use potential::{coulomb, effective_potential};
pub use symmetrize::{permanent, symmetrized_amplitude, Statistics, MAX_BOSONS, MAX_FERMIONS};

#[cfg(test)]
mod tests;
