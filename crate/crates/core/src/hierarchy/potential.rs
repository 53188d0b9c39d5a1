use crate::state::GrainedWaveFunction;
use crate::{Error, Result};

/// Potential felt at `r` from a source of unit charge at `x`.
pub fn coulomb(charge: f64) -> impl Fn(f64, f64) -> f64 {
    move |r, x| charge / (r - x).abs()
}

/// `V(r)` plus the expectation over the tier's position density of `kernel(r, x)`.
pub fn effective_potential(
    tier: &GrainedWaveFunction,
    external: impl Fn(f64) -> f64,
    kernel: impl Fn(f64, f64) -> f64,
    r: f64,
) -> Result<f64> {
    let base = external(r);
    if tier.is_empty() {
        return Ok(base);
    }
    if !tier.is_normalized() {
        return Err(Error::Domain(format!("tier state has norm² {}, expected 1", tier.norm_sqr())));
    }
    let grid = tier.grid.ok_or_else(|| Error::DimensionMismatch("tier state carries no spatial grid".into()))?;
    let mean: f64 = tier.entries().iter().map(|&(l, a)| a.norm_sqr() * kernel(r, grid.position(l))).sum();
    Ok(base + mean)
}
