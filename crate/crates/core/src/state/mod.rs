//! Grained wavefunctions and the operations defined on them.

mod born;
mod division;
mod emission;
mod grains;
pub mod snapshot;
mod transforms;
mod wavefunction;

pub use born::{born_probabilities, born_sample, Histogram};
pub use division::{division_points, point_count, DivisionPoints};
pub use emission::{emission_probability, emission_state, EMITTED_LABEL_START};
pub use grains::{grain_expand, round_half_even, GrainList};
pub use transforms::{hadamard_pair, momentum_transform, Mixture};
pub use wavefunction::{GrainPolicy, GrainedWaveFunction, GridMeta, LabelFormat};

/// Tolerance for "normalized" checks.
pub const NORM_TOL: f64 = 1e-10;
