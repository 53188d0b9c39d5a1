//! Finite-difference propagation on uniform 1D grids.
//!
//! Grid states are discrete amplitudes `a_i` with `Σ |a_i|² = 1`; the continuum
//! wavefunction is `a_i / √dx`.

mod analytic;
mod eigen;
mod grid;
mod pair;
mod propagate;
mod variational;

pub use analytic::{heat_kernel, spreading_density, width_factor, AnalyticOracle};
pub use eigen::{eigen_csv, eigen_dense, eigen_symmetric, hamiltonian_matrix, Eigenpair};
pub use grid::{Boundary, Grid1D, Potential};
pub use pair::{catmull_rom, evolve_pair, PairState};
pub use propagate::{apply_hamiltonian, evolve_step, Propagator, PropagatorConfig, MAX_PHASE_PER_STEP};
pub use variational::{
    minimize_coordinate, minimize_pair, PairHamiltonian, PairResult, VariationalOptions, VariationalResult,
};

/// Position moments `(mean, variance)` of a grid state.
pub fn moments(grid: &Grid1D, psi: &[crate::Complex]) -> (f64, f64) {
    let n: f64 = psi.iter().map(|a| a.norm_sqr()).sum();
    let m1: f64 = psi.iter().enumerate().map(|(i, a)| a.norm_sqr() * grid.position(i)).sum::<f64>() / n;
    let m2: f64 = psi.iter().enumerate().map(|(i, a)| a.norm_sqr() * (grid.position(i) - m1).powi(2)).sum::<f64>() / n;
    (m1, m2)
}
