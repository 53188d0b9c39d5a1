use std::ops::Range;

use rand::seq::SliceRandom;

use crate::rng;
use crate::state::{grain_expand, GrainedWaveFunction};
use crate::{Complex, Error, Result};

/// One particle's share of a complex quantum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Member {
    pub x: f64,
    pub amp: Complex,
}

/// An amplitude quantum of the whole system: one member per particle.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexQuantum {
    pub members: Vec<Member>,
}

impl ComplexQuantum {
    pub fn amp(&self) -> Complex {
        self.members.iter().map(|m| m.amp).product()
    }
}

/// Position of a grain: uniform inside its cell.
fn place(psi: &GrainedWaveFunction, label: u64, u: f64) -> Result<f64> {
    let grid = psi
        .grid
        .ok_or_else(|| Error::DimensionMismatch("measured state needs grid metadata".into()))?;
    Ok(grid.position(label) + (u - 0.5) * grid.spacing)
}

/// Split the particle state and the apparatus pointer state into grains of
/// modulus ε and pair them at random. Apparatus grains are reused cyclically
/// when there are fewer of them than particle grains.
pub fn form_measurement_ensemble(
    particle: &GrainedWaveFunction,
    apparatus: &GrainedWaveFunction,
    eps: f64,
    seed: u64,
) -> Result<Vec<ComplexQuantum>> {
    let pg = grain_expand(particle, eps)?;
    let ag = grain_expand(apparatus, eps)?;
    let mut r = rng::stream(seed, 0, 0);
    let mut a_members = Vec::with_capacity(ag.grains.len());
    for &(label, amp) in &ag.grains {
        a_members.push(Member { x: place(apparatus, label, rng::unit(&mut r))?, amp });
    }
    a_members.shuffle(&mut r);
    let mut out = Vec::with_capacity(pg.grains.len());
    for (i, &(label, amp)) in pg.grains.iter().enumerate() {
        let p = Member { x: place(particle, label, rng::unit(&mut r))?, amp };
        let a = a_members[i % a_members.len()];
        out.push(ComplexQuantum { members: vec![p, a] });
    }
    Ok(out)
}

/// Fraction of complex quanta whose particle member lies in `region`.
pub fn urn_measure(ensemble: &[ComplexQuantum], region: Range<f64>) -> f64 {
    if ensemble.is_empty() {
        return 0.0;
    }
    let hits = ensemble.iter().filter(|q| region.contains(&q.members[0].x)).count();
    hits as f64 / ensemble.len() as f64
}

/// Draw `n` complex quanta uniformly with replacement and count the hits in `region`.
pub fn urn_draw(ensemble: &[ComplexQuantum], region: Range<f64>, n: usize, seed: u64) -> usize {
    if ensemble.is_empty() {
        return 0;
    }
    let mut r = rng::stream(seed, 1, 0);
    (0..n)
        .filter(|_| {
            let i = ((rng::unit(&mut r) * ensemble.len() as f64) as usize).min(ensemble.len() - 1);
            region.contains(&ensemble[i].members[0].x)
        })
        .count()
}
