use crate::{Complex, Error, Result};

use super::{grain_expand, GrainPolicy, GrainedWaveFunction};

/// Labels `EMITTED_LABEL_START..=j` are the emitted shells; label 0 is the
/// excited atom with the field in its ground state.
pub const EMITTED_LABEL_START: u64 = 1;

/// The emission state after `j` steps: one not-emitted summand and `j`
/// emitted summands, all of equal modulus, normalized to one.
pub fn emission_state(j: u64) -> Result<GrainedWaveFunction> {
    if j == 0 {
        return Err(Error::Domain("emission needs at least one step".into()));
    }
    let a = Complex::new(1.0 / ((j + 1) as f64).sqrt(), 0.0);
    GrainedWaveFunction::from_entries((0..=j).map(|r| (r, a)).collect(), GrainPolicy::exact())
}

/// Exact `(emitted, total)` grain counts of the emission state, read off a
/// grain expansion at the common summand modulus.
pub fn emission_probability(psi: &GrainedWaveFunction) -> Result<(u64, u64)> {
    let eps = psi.entries().iter().map(|e| e.1.norm()).fold(f64::INFINITY, f64::min);
    let g = grain_expand(psi, eps)?;
    let emitted = g.counts.iter().filter(|c| c.0 >= EMITTED_LABEL_START).map(|c| c.1).sum();
    Ok((emitted, g.total()))
}
