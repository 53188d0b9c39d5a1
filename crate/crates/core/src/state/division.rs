use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::rng::unit;
use crate::{Error, Result};

use super::{born_probabilities, GrainedWaveFunction};

/// Points distributed with density ∝ |Ψ|², tagged with the grid cell they fall in.
#[derive(Clone, Debug, PartialEq)]
pub struct DivisionPoints {
    pub points: Vec<f64>,
    pub cells: Vec<u64>,
}

impl DivisionPoints {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Number of points in each of the labels given.
    pub fn counts(&self, labels: &[u64]) -> Vec<u64> {
        let mut c = vec![0u64; labels.len()];
        for cell in &self.cells {
            if let Ok(i) = labels.binary_search(cell) {
                c[i] += 1;
            }
        }
        c
    }
}

/// ⌈1/g²⌉, with 1/g² snapped to an integer when rounding noise is all that separates them.
pub fn point_count(g: f64) -> usize {
    let inv = 1.0 / (g * g);
    if (inv - inv.round()).abs() < 1e-9 * inv {
        inv.round() as usize
    } else {
        inv.ceil() as usize
    }
}

/// Sample ⌈1/g²⌉ points, each placed uniformly inside a cell chosen with probability |Ψ|².
///
/// Without grid metadata points sit at the label value itself.
pub fn division_points(psi: &GrainedWaveFunction, g: f64, seed: u64) -> Result<DivisionPoints> {
    if !(g > 0.0 && g < 1.0) {
        return Err(Error::Domain(format!("division grain must lie in (0, 1), got {g}")));
    }
    let probs = born_probabilities(psi);
    if probs.is_empty() {
        return Err(Error::AllAnnihilated);
    }
    let mut cdf = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for p in &probs {
        acc += p.1;
        cdf.push(acc);
    }
    let n = point_count(g);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(n);
    let mut cells = Vec::with_capacity(n);
    for _ in 0..n {
        let u = unit(&mut rng) * acc;
        let i = cdf.partition_point(|&c| c <= u).min(probs.len() - 1);
        let label = probs[i].0;
        let x = match psi.grid {
            Some(grid) => grid.position(label) + (unit(&mut rng) - 0.5) * grid.spacing,
            None => label as f64,
        };
        points.push(x);
        cells.push(label);
    }
    Ok(DivisionPoints { points, cells })
}
