use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::rng::unit;
use crate::{Error, Result};

use super::{GrainedWaveFunction, LabelFormat};

/// Outcome counts keyed by label, in label order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Histogram {
    pub labels: Vec<u64>,
    pub counts: Vec<u64>,
    pub label_format: LabelFormat,
}

impl Histogram {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn count(&self, label: u64) -> u64 {
        self.labels.iter().position(|&l| l == label).map_or(0, |i| self.counts[i])
    }

    pub fn frequency(&self, label: u64) -> f64 {
        self.count(label) as f64 / self.total().max(1) as f64
    }

    /// `label,count,frequency` rows under a header.
    pub fn to_csv(&self) -> String {
        let total = self.total().max(1) as f64;
        let mut s = String::from("label,count,frequency\n");
        for (l, c) in self.labels.iter().zip(&self.counts) {
            s.push_str(&format!("{},{},{}\n", self.label_format.format(*l), c, *c as f64 / total));
        }
        s
    }
}

/// |λ_j|² per entry, normalized by the state's norm.
pub fn born_probabilities(psi: &GrainedWaveFunction) -> Vec<(u64, f64)> {
    let n = psi.norm_sqr();
    psi.entries().iter().map(|&(l, a)| (l, a.norm_sqr() / n)).collect()
}

/// Draw `draws` outcomes with probability |λ_j|².
pub fn born_sample(psi: &GrainedWaveFunction, draws: u64, seed: u64) -> Result<Histogram> {
    if !psi.is_normalized() {
        return Err(Error::Domain(format!("state must be normalized, norm² = {}", psi.norm_sqr())));
    }
    let probs = born_probabilities(psi);
    let mut cdf = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for &(_, p) in &probs {
        acc += p;
        cdf.push(acc);
    }
    let mut counts = vec![0u64; probs.len()];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..draws {
        let u = unit(&mut rng) * acc;
        let i = cdf.partition_point(|&c| c <= u).min(probs.len() - 1);
        counts[i] += 1;
    }
    Ok(Histogram { labels: probs.iter().map(|p| p.0).collect(), counts, label_format: psi.label_format })
}
