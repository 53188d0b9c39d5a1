use crate::{Complex, Error, Result};

use super::GrainedWaveFunction;

/// Round to nearest, ties to even.
pub fn round_half_even(x: f64) -> f64 {
    let r = x.round();
    if (x - x.trunc()).abs() == 0.5 && r % 2.0 != 0.0 {
        r - x.signum()
    } else {
        r
    }
}

/// The measurement state split into near-equal grains.
#[derive(Clone, Debug, PartialEq)]
pub struct GrainList {
    pub grains: Vec<(u64, Complex)>,
    pub epsilon: f64,
    /// `(label, l_j)` in label order.
    pub counts: Vec<(u64, u64)>,
}

impl GrainList {
    pub fn total(&self) -> u64 {
        self.counts.iter().map(|c| c.1).sum()
    }

    /// Branch probabilities under a uniform draw over grains, by exact enumeration.
    pub fn branch_probabilities(&self) -> Vec<(u64, f64)> {
        let t = self.total() as f64;
        self.counts.iter().map(|&(l, c)| (l, c as f64 / t)).collect()
    }

    /// Largest relative deviation of a grain modulus from ε.
    pub fn max_modulus_deviation(&self) -> f64 {
        self.grains.iter().map(|g| (g.1.norm() / self.epsilon - 1.0).abs()).fold(0.0, f64::max)
    }
}

/// Split branch j into l_j = max(1, round(|λ_j|²/ε²)) grains of modulus |λ_j|/√l_j
/// and the phase of λ_j.
pub fn grain_expand(psi: &GrainedWaveFunction, epsilon: f64) -> Result<GrainList> {
    if !(epsilon > 0.0) {
        return Err(Error::Domain(format!("grain must be positive, got {epsilon}")));
    }
    let mut grains = Vec::new();
    let mut counts = Vec::new();
    for &(label, amp) in psi.entries() {
        let m = amp.norm();
        if m == 0.0 {
            continue;
        }
        let l = round_half_even(m * m / (epsilon * epsilon)).max(1.0) as u64;
        let g = amp / (l as f64).sqrt();
        grains.extend(std::iter::repeat_n((label, g), l as usize));
        counts.push((label, l));
    }
    Ok(GrainList { grains, epsilon, counts })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::GrainPolicy;

    #[test]
    fn half_even() {
        assert_eq!(round_half_even(2.5), 2.0);
        assert_eq!(round_half_even(3.5), 4.0);
        assert_eq!(round_half_even(1.78), 2.0);
        assert_eq!(round_half_even(-2.5), -2.0);
    }

    #[test]
    fn counts_follow_squared_moduli() {
        let psi = GrainedWaveFunction::from_real(&[0.75f64.sqrt(), 0.25f64.sqrt()], GrainPolicy::exact()).unwrap();
        let g = grain_expand(&psi, 0.05).unwrap();
        assert_eq!(g.counts, vec![(0, 300), (1, 100)]);
        assert!((g.branch_probabilities()[0].1 - 0.75).abs() < 1e-12);
    }

    #[test]
    fn single_branch() {
        let psi = GrainedWaveFunction::from_real(&[1.0], GrainPolicy::exact()).unwrap();
        let g = grain_expand(&psi, 0.1).unwrap();
        assert_eq!(g.total(), 100);
        assert!(g.grains.iter().all(|x| (x.1.norm() - 0.1).abs() < 1e-12));
    }

    #[test]
    fn coarse_grain_bias() {
        let psi = GrainedWaveFunction::from_real(&[0.6, 0.8], GrainPolicy::exact()).unwrap();
        let g = grain_expand(&psi, 0.6).unwrap();
        assert_eq!(g.counts, vec![(0, 1), (1, 2)]);
        let p = g.branch_probabilities();
        // Exact enumeration: 1/3 against 0.36.
        assert!((p[0].1 - 1.0 / 3.0).abs() < 1e-15);
        assert!((p[0].1 - 0.36).abs() <= 0.6);
    }

    #[test]
    fn grains_reassemble_branch() {
        let psi = GrainedWaveFunction::from_entries(
            vec![(0, Complex::new(0.6, 0.0)), (1, Complex::from_polar(0.8, 1.1))],
            GrainPolicy::exact(),
        )
        .unwrap();
        let g = grain_expand(&psi, 0.01).unwrap();
        for &(label, l) in &g.counts {
            let sum: Complex = g.grains.iter().filter(|x| x.0 == label).map(|x| x.1).sum();
            let expect = psi.amplitude(label) * (l as f64).sqrt();
            assert!((sum - expect).norm() < 1e-9);
        }
        assert!(g.max_modulus_deviation() < 0.01);
    }
}
