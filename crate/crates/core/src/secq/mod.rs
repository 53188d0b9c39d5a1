//! Occupation-number states, ladder operators and the two-stage energy minimization.

mod hamiltonian;
mod minimize;
mod occupation;

pub use hamiltonian::{
    apply_hamiltonian, build_hamiltonian, ground_oracle, hamiltonian_dense, LadderHamiltonian, OrbitalSet, TwoBody, MAX_ORACLE,
    TENSOR_HEADER,
};
pub use minimize::{best_direction_gain, configuration_energy, minimize_energy, MinimizeOptions, Minimized};
pub use occupation::{fermion_ladder_matrix, ladder_apply, ladder_chain, FockBasis, FockState, Ladder, Occupation};
