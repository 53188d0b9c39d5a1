use std::f64::consts::PI;

use rustfft::FftPlanner;

use crate::{Complex, Error, Result};

use super::{GrainedWaveFunction, GridMeta, LabelFormat, NORM_TOL};

/// Apply H⊗H, H = (1/√2)[[1, 1], [1, −1]], to a two-qubit state.
///
/// Label `2 b₁ + b₂` encodes |b₁ b₂⟩. All four output labels are present.
pub fn hadamard_pair(psi: &GrainedWaveFunction) -> Result<GrainedWaveFunction> {
    if let Some(l) = psi.labels().find(|&l| l > 3) {
        return Err(Error::DimensionMismatch(format!("label {l} outside the two-qubit space")));
    }
    let a = psi.to_dense(4);
    let mut out = [Complex::new(0.0, 0.0); 4];
    for (k, o) in out.iter_mut().enumerate() {
        for (j, &aj) in a.iter().enumerate() {
            // ⟨k|H⊗H|j⟩ = (−1)^{popcount(k & j)} / 2
            let sign = if (k & j).count_ones() % 2 == 0 { 0.5 } else { -0.5 };
            *o += aj * sign;
        }
    }
    let mut r = GrainedWaveFunction::from_dense(&out, psi.grain)?;
    r.label_format = LabelFormat::Bits(2);
    Ok(r)
}

/// Unitary discrete Fourier transform of a grid state.
///
/// Output label `j` is wavenumber `k_j = (j − ⌊N/2⌋) Δk` with `Δk = 2π/(N Δx)`;
/// the amplitude is `N^{-1/2} Σ_n ψ_n e^{−i k_j x_n}`.
pub fn momentum_transform(psi: &GrainedWaveFunction) -> Result<GrainedWaveFunction> {
    let grid = psi.grid.ok_or_else(|| Error::Domain("momentum transform needs grid metadata".into()))?;
    let n = grid.points;
    if n == 0 || psi.labels().any(|l| l as usize >= n) {
        return Err(Error::DimensionMismatch(format!("labels exceed the {n}-point grid")));
    }
    let h = n / 2;
    let dk = 2.0 * PI / (n as f64 * grid.spacing);
    let mut buf: Vec<Complex> = psi
        .to_dense(n)
        .into_iter()
        .enumerate()
        .map(|(m, a)| a * Complex::from_polar(1.0, 2.0 * PI * (h * m % n) as f64 / n as f64))
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let scale = 1.0 / (n as f64).sqrt();
    let out: Vec<Complex> = buf
        .into_iter()
        .enumerate()
        .map(|(j, a)| {
            let k = (j as f64 - h as f64) * dk;
            a * scale * Complex::from_polar(1.0, -k * grid.origin)
        })
        .collect();
    Ok(GrainedWaveFunction::from_dense(&out, psi.grain)?.with_grid(GridMeta::new(dk, -(h as f64) * dk, n)))
}

/// A classical ensemble of pure states.
#[derive(Clone, Debug)]
pub struct Mixture {
    components: Vec<(f64, GrainedWaveFunction)>,
}

impl Mixture {
    pub fn new(components: Vec<(f64, GrainedWaveFunction)>) -> Result<Self> {
        let total: f64 = components.iter().map(|c| c.0).sum();
        if components.iter().any(|c| c.0 < 0.0) || (total - 1.0).abs() > NORM_TOL {
            return Err(Error::Domain(format!("mixture weights must be nonnegative and sum to 1, got {total}")));
        }
        Ok(Mixture { components })
    }

    pub fn components(&self) -> &[(f64, GrainedWaveFunction)] {
        &self.components
    }

    /// Outcome probabilities Σ_i w_i |⟨r|f(ψ_i)⟩|² after transforming each component.
    pub fn outcome_distribution<F>(&self, f: F) -> Result<Vec<(u64, f64)>>
    where
        F: Fn(&GrainedWaveFunction) -> Result<GrainedWaveFunction>,
    {
        let mut acc: std::collections::BTreeMap<u64, f64> = Default::default();
        for (w, psi) in &self.components {
            let out = f(psi)?;
            let n = out.norm_sqr();
            for &(l, a) in out.entries() {
                *acc.entry(l).or_default() += w * a.norm_sqr() / n;
            }
        }
        Ok(acc.into_iter().collect())
    }

    pub fn after_hadamard(&self) -> Result<Vec<(u64, f64)>> {
        self.outcome_distribution(hadamard_pair)
    }
}
