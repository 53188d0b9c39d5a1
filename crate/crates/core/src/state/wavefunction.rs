use crate::{Complex, Error, Result};

use super::NORM_TOL;

/// Amplitude grain. Amplitudes with modulus below `epsilon` are nulled by [`GrainedWaveFunction::reduce`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GrainPolicy {
    pub epsilon: f64,
    pub resource_t: Option<f64>,
}

impl GrainPolicy {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::Domain(format!("grain must lie in (0, 1), got {epsilon}")));
        }
        Ok(GrainPolicy { epsilon, resource_t: None })
    }

    /// Grain implied by a total step budget: ε = 1/√T.
    pub fn from_resource(t: f64) -> Result<Self> {
        if !(t > 1.0) {
            return Err(Error::Domain(format!("step budget must exceed 1, got {t}")));
        }
        Ok(GrainPolicy { epsilon: 1.0 / t.sqrt(), resource_t: Some(t) })
    }

    /// A grain that nulls nothing but exact zeros.
    pub fn exact() -> Self {
        GrainPolicy { epsilon: f64::MIN_POSITIVE, resource_t: None }
    }

    /// Upper bound on the entry count of a reduced state.
    pub fn max_entries(&self) -> usize {
        let inv = 1.0 / (self.epsilon * self.epsilon);
        // Snap values like 99.99999999999999 to the integer they stand for.
        let snapped = if (inv - inv.round()).abs() < 1e-9 * inv { inv.round() } else { inv.floor() };
        snapped.min(usize::MAX as f64) as usize
    }
}

/// Uniform grid carried by spatial states: label `i` sits at `origin + i * spacing`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridMeta {
    pub spacing: f64,
    pub origin: f64,
    pub points: usize,
}

impl GridMeta {
    pub fn new(spacing: f64, origin: f64, points: usize) -> Self {
        GridMeta { spacing, origin, points }
    }

    pub fn position(&self, label: u64) -> f64 {
        self.origin + label as f64 * self.spacing
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum LabelFormat {
    #[default]
    Decimal,
    /// Bit-strings of the given width, most significant bit first.
    Bits(u32),
}

impl LabelFormat {
    pub fn format(&self, label: u64) -> String {
        match *self {
            LabelFormat::Decimal => label.to_string(),
            LabelFormat::Bits(w) => format!("{label:0w$b}", w = w as usize),
        }
    }
}

/// A finite superposition `Σ λ_r |r⟩` with sorted unique labels.
#[derive(Clone, Debug, PartialEq)]
pub struct GrainedWaveFunction {
    entries: Vec<(u64, Complex)>,
    pub grain: GrainPolicy,
    pub grid: Option<GridMeta>,
    pub label_format: LabelFormat,
}

impl GrainedWaveFunction {
    /// Build from arbitrary `(label, amp)` pairs; duplicate labels are summed.
    pub fn from_entries(mut entries: Vec<(u64, Complex)>, grain: GrainPolicy) -> Result<Self> {
        if let Some((l, a)) = entries.iter().find(|(_, a)| !(a.re.is_finite() && a.im.is_finite())) {
            return Err(Error::Domain(format!("non-finite amplitude {a} at label {l}")));
        }
        entries.sort_by_key(|e| e.0);
        let mut merged: Vec<(u64, Complex)> = Vec::with_capacity(entries.len());
        for (l, a) in entries {
            match merged.last_mut() {
                Some(last) if last.0 == l => last.1 += a,
                _ => merged.push((l, a)),
            }
        }
        Ok(GrainedWaveFunction { entries: merged, grain, grid: None, label_format: LabelFormat::Decimal })
    }

    /// Dense amplitudes labelled `0..n`.
    pub fn from_dense(amps: &[Complex], grain: GrainPolicy) -> Result<Self> {
        Self::from_entries(amps.iter().enumerate().map(|(i, &a)| (i as u64, a)).collect(), grain)
    }

    pub fn from_real(amps: &[f64], grain: GrainPolicy) -> Result<Self> {
        Self::from_entries(amps.iter().enumerate().map(|(i, &a)| (i as u64, Complex::new(a, 0.0))).collect(), grain)
    }

    pub fn with_grid(mut self, grid: GridMeta) -> Self {
        self.grid = Some(grid);
        self
    }

    pub fn with_label_format(mut self, f: LabelFormat) -> Self {
        self.label_format = f;
        self
    }

    pub fn entries(&self) -> &[(u64, Complex)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn labels(&self) -> impl Iterator<Item = u64> + '_ {
        self.entries.iter().map(|e| e.0)
    }

    pub fn amplitude(&self, label: u64) -> Complex {
        match self.entries.binary_search_by_key(&label, |e| e.0) {
            Ok(i) => self.entries[i].1,
            Err(_) => Complex::new(0.0, 0.0),
        }
    }

    /// Amplitudes at labels `0..n`, zero where absent.
    pub fn to_dense(&self, n: usize) -> Vec<Complex> {
        let mut out = vec![Complex::new(0.0, 0.0); n];
        for &(l, a) in &self.entries {
            if (l as usize) < n {
                out[l as usize] = a;
            }
        }
        out
    }

    pub fn norm_sqr(&self) -> f64 {
        self.entries.iter().map(|e| e.1.norm_sqr()).sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= NORM_TOL
    }

    pub fn normalize(&mut self) -> Result<()> {
        let n = self.norm_sqr().sqrt();
        if n == 0.0 {
            return Err(Error::AllAnnihilated);
        }
        for e in &mut self.entries {
            e.1 /= n;
        }
        Ok(())
    }

    pub fn normalized(mut self) -> Result<Self> {
        self.normalize()?;
        Ok(self)
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &GrainedWaveFunction) -> Complex {
        let (mut i, mut j) = (0, 0);
        let mut acc = Complex::new(0.0, 0.0);
        while i < self.entries.len() && j < other.entries.len() {
            let (a, b) = (self.entries[i], other.entries[j]);
            match a.0.cmp(&b.0) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    acc += a.1.conj() * b.1;
                    i += 1;
                    j += 1;
                }
            }
        }
        acc
    }

    /// Null every amplitude whose modulus (relative to the normalized state)
    /// is below the grain, then renormalize.
    ///
    /// A state that is already normalized and has nothing to null is returned
    /// bit-for-bit unchanged, which makes the operation idempotent.
    pub fn reduce(&self) -> Result<GrainedWaveFunction> {
        let norm = self.norm_sqr().sqrt();
        if norm == 0.0 {
            return Err(Error::AllAnnihilated);
        }
        let eps = self.grain.epsilon;
        let kept: Vec<(u64, Complex)> = self.entries.iter().copied().filter(|e| e.1.norm() / norm >= eps).collect();
        if kept.is_empty() {
            return Err(Error::AllAnnihilated);
        }
        let mut out = GrainedWaveFunction { entries: kept, ..self.clone() };
        if out.entries.len() == self.entries.len() && (norm - 1.0).abs() <= 1e-14 {
            return Ok(out);
        }
        out.normalize()?;
        Ok(out)
    }

    /// Replace the amplitudes, keeping labels, grain and metadata.
    pub fn map_amplitudes(&self, f: impl Fn(u64, Complex) -> Complex) -> GrainedWaveFunction {
        GrainedWaveFunction { entries: self.entries.iter().map(|&(l, a)| (l, f(l, a))).collect(), ..self.clone() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex {
        Complex::new(re, 0.0)
    }

    #[test]
    fn reduce_nulls_and_renormalizes() {
        let psi = GrainedWaveFunction::from_real(&[0.9, 0.3, 0.05], GrainPolicy::new(0.1).unwrap()).unwrap();
        let r = psi.reduce().unwrap();
        // Direct arithmetic: the survivors are divided by √(0.81 + 0.09).
        let n = (0.81f64 + 0.09).sqrt();
        assert_eq!(r.len(), 2);
        assert!((r.amplitude(0).re - 0.9 / n).abs() < 1e-12);
        assert!((r.amplitude(1).re - 0.3 / n).abs() < 1e-12);
        assert!((r.amplitude(0).re - 0.9487).abs() < 1e-4);
        assert!((r.amplitude(1).re - 0.3162).abs() < 1e-4);
    }

    #[test]
    fn reduce_single_entry_unchanged() {
        let psi = GrainedWaveFunction::from_real(&[1.0], GrainPolicy::new(0.5).unwrap()).unwrap();
        assert_eq!(psi.reduce().unwrap(), psi);
    }

    #[test]
    fn reduce_uniform_annihilates() {
        let a = 1.0 / 1000f64.sqrt();
        let psi = GrainedWaveFunction::from_real(&vec![a; 1000], GrainPolicy::new(0.1).unwrap()).unwrap();
        assert!(matches!(psi.reduce(), Err(Error::AllAnnihilated)));
    }

    #[test]
    fn resource_grain() {
        let g = GrainPolicy::from_resource(1e4).unwrap();
        assert!((g.epsilon - 0.01).abs() < 1e-12);
        assert_eq!(g.max_entries(), 10_000);
        assert!(GrainPolicy::new(1.0).is_err());
        assert!(GrainPolicy::new(0.0).is_err());
    }

    #[test]
    fn duplicates_merge_and_sort() {
        let psi = GrainedWaveFunction::from_entries(vec![(3, c(0.5)), (1, c(0.5)), (3, c(0.25))], GrainPolicy::exact()).unwrap();
        assert_eq!(psi.labels().collect::<Vec<_>>(), vec![1, 3]);
        assert_eq!(psi.amplitude(3), c(0.75));
    }

    #[test]
    fn bit_labels() {
        assert_eq!(LabelFormat::Bits(2).format(1), "01");
        assert_eq!(LabelFormat::Decimal.format(5), "5");
    }
}
