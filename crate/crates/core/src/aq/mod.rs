//! Bound amplitude quanta.
//!
//! A [`Bubble`] is an ensemble of fictitious copies of one particle. Each copy
//! flies between collisions, accumulating the action of its path; at a
//! collision the action becomes a phase on its amplitude and its velocity is
//! redrawn. Summing amplitudes over δ-cells ([`Bubble::accumulate`])
//! recovers the wavefunction.

mod bubble;
mod driver;
mod dump;
mod dynamics;
mod observe;
mod recycle;
mod urn;

pub use bubble::{
    AccumulateMode, BoundQuantum, Bubble, BubbleConfig, CollisionClock, FlightLaw, LocalWavenumber, OscState, ReinjectionDensity,
    VelocityCenter, VelocityLaw,
};
pub use driver::{cell_probabilities, l1_distance, NormingCycle};
pub use dump::{read_bubble, write_bubble, BUBBLE_HEADER};
pub use dynamics::{CouplingFn, Lagrangian, OscillatorCoupling, DEFAULT_MICROSTEP_RATIO};
pub use observe::{momentum_sweep, Accumulated, Component};
pub use urn::{form_measurement_ensemble, urn_draw, urn_measure, ComplexQuantum, Member};
