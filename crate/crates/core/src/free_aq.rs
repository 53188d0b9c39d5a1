//! Free amplitude quanta.
//!
//! An amplitude is carried by token counts: `[α⁺_j] − [α⁻_j]` is the real part
//! of branch `j`, `[β⁺_j] − [β⁻_j]` the imaginary part. Phase rotation is a
//! set of spawning reactions; stored counts are never combined arithmetically
//! except by pairwise cancellation of antithetic tokens.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand_distr::{Binomial, Distribution};

use crate::rng;
use crate::state::GrainedWaveFunction;
use crate::{Error, Result};

/// Largest basis a population may span.
pub const MAX_BRANCHES: usize = 64;
/// Largest phase increment per reaction step.
pub const MAX_DPHI: f64 = 0.01;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Part {
    Alpha,
    Beta,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// Token type `x^s_j` with auxiliary options and a reaction volume.
#[derive(Clone, Debug)]
pub struct FreeQuantumType {
    pub part: Part,
    pub sign: Sign,
    pub branch: usize,
    pub aux: Vec<u32>,
    /// Scales the reaction rate; a negative volume reverses the spawn sign.
    pub volume: f64,
}

impl FreeQuantumType {
    pub fn new(part: Part, sign: Sign, branch: usize) -> Self {
        FreeQuantumType { part, sign, branch, aux: Vec::new(), volume: 1.0 }
    }

    fn key(&self) -> (usize, Part, Sign, &[u32], u64) {
        (self.branch, self.part, self.sign, &self.aux, self.volume.to_bits())
    }

    fn antithetic(&self) -> FreeQuantumType {
        FreeQuantumType { sign: self.sign.flip(), ..self.clone() }
    }
}

impl PartialEq for FreeQuantumType {
    fn eq(&self, o: &Self) -> bool {
        self.key() == o.key()
    }
}

impl Eq for FreeQuantumType {}

impl PartialOrd for FreeQuantumType {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for FreeQuantumType {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.key().cmp(&o.key())
    }
}

/// How spawn counts are drawn in a reaction step.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReactionMode {
    /// Spawn the expected number of tokens; counts become real-valued.
    Exact,
    /// Each token spawns with probability |v0 dφ|, drawn from the given seed.
    Tokens { seed: u64 },
}

/// Token counts over a basis of `branches` states.
#[derive(Clone, Debug, PartialEq)]
pub struct Population {
    counts: BTreeMap<FreeQuantumType, f64>,
    branches: usize,
    steps: u64,
}

impl Population {
    pub fn new(branches: usize) -> Result<Self> {
        if branches == 0 {
            return Err(Error::Domain("a population needs at least one branch".into()));
        }
        if branches > MAX_BRANCHES {
            return Err(Error::SizeCap { size: branches, cap: MAX_BRANCHES });
        }
        Ok(Population { counts: BTreeMap::new(), branches, steps: 0 })
    }

    pub fn branches(&self) -> usize {
        self.branches
    }

    pub fn add(&mut self, t: FreeQuantumType, count: f64) -> Result<()> {
        if t.branch >= self.branches {
            return Err(Error::DimensionMismatch(format!("branch {} outside basis of {}", t.branch, self.branches)));
        }
        if !(count >= 0.0 && count.is_finite()) {
            return Err(Error::Domain(format!("token count must be finite and nonnegative, got {count}")));
        }
        if count > 0.0 {
            *self.counts.entry(t).or_insert(0.0) += count;
        }
        Ok(())
    }

    pub fn count(&self, t: &FreeQuantumType) -> f64 {
        self.counts.get(t).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&FreeQuantumType, f64)> {
        self.counts.iter().map(|(t, &c)| (t, c))
    }

    /// `[x⁺_j] − [x⁻_j]` summed over auxiliary options and volumes.
    pub fn net(&self, part: Part, branch: usize) -> f64 {
        self.counts
            .iter()
            .filter(|(t, _)| t.part == part && t.branch == branch)
            .map(|(t, &c)| t.sign.value() * c)
            .sum()
    }

    pub fn total_tokens(&self) -> f64 {
        self.counts.values().sum()
    }

    /// Σ_j [α_j]² + [β_j]².
    pub fn norm_proxy(&self) -> f64 {
        (0..self.branches).map(|j| self.net(Part::Alpha, j).powi(2) + self.net(Part::Beta, j).powi(2)).sum()
    }

    /// Tokens for ψ at `scale` tokens per unit amplitude, rounded to whole tokens.
    pub fn from_wavefunction(psi: &GrainedWaveFunction, scale: f64) -> Result<Self> {
        if !(scale >= 1e3) {
            return Err(Error::Domain(format!("scale must be at least 10³ tokens per unit amplitude, got {scale}")));
        }
        let branches = psi.labels().last().map_or(1, |l| l as usize + 1);
        let mut pop = Population::new(branches)?;
        for &(l, a) in psi.entries() {
            for (part, x) in [(Part::Alpha, a.re), (Part::Beta, a.im)] {
                let n = (x.abs() * scale).round();
                let sign = if x < 0.0 { Sign::Minus } else { Sign::Plus };
                pop.add(FreeQuantumType::new(part, sign, l as usize), n)?;
            }
        }
        Ok(pop)
    }

    /// One step of the reactions β^s → β^s + α^{−s} and α^s → α^s + β^s at rate dφ.
    /// A negative dφ runs the reverse rotation by flipping every spawn sign.
    pub fn react_phase_step(&mut self, dphi: f64, mode: ReactionMode) -> Result<()> {
        if !(dphi.abs() <= MAX_DPHI) {
            return Err(Error::Domain(format!("phase step {dphi} outside the small-step regime |dφ| ≤ {MAX_DPHI}")));
        }
        if dphi == 0.0 {
            return Ok(());
        }
        let step = self.steps;
        self.steps += 1;
        let mut spawned: Vec<(FreeQuantumType, f64)> = Vec::with_capacity(self.counts.len());
        for (i, (t, &c)) in self.counts.iter().enumerate() {
            let rate = dphi * t.volume;
            let (part, sign) = match t.part {
                Part::Beta => (Part::Alpha, t.sign.flip()),
                Part::Alpha => (Part::Beta, t.sign),
            };
            let sign = if rate < 0.0 { sign.flip() } else { sign };
            let p = rate.abs().min(1.0);
            let n = match mode {
                ReactionMode::Exact => c * p,
                ReactionMode::Tokens { seed } => {
                    let mut r = rng::stream(seed, i as u64, step);
                    Binomial::new(c.round() as u64, p).map_err(|e| Error::Domain(e.to_string()))?.sample(&mut r) as f64
                }
            };
            if n > 0.0 {
                spawned.push((FreeQuantumType { part, sign, ..t.clone() }, n));
            }
        }
        for (t, n) in spawned {
            *self.counts.entry(t).or_insert(0.0) += n;
        }
        Ok(())
    }

    /// Integrate the rotation to `phi` in steps of at most `dphi`.
    pub fn rotate(&mut self, phi: f64, dphi: f64, mode: ReactionMode) -> Result<()> {
        if !(dphi > 0.0) {
            return Err(Error::Domain("phase step must be positive".into()));
        }
        let n = (phi.abs() / dphi).ceil() as usize;
        let d = if n == 0 { 0.0 } else { phi / n as f64 };
        for _ in 0..n {
            self.react_phase_step(d, mode)?;
        }
        Ok(())
    }

    /// Cancel x⁺/x⁻ pairs of otherwise identical type. Net counts are unchanged.
    pub fn r_reduce(&mut self) {
        let plus: Vec<FreeQuantumType> = self.counts.keys().filter(|t| t.sign == Sign::Plus).cloned().collect();
        for t in plus {
            let anti = t.antithetic();
            let (a, b) = (self.count(&t), self.count(&anti));
            let m = a.min(b);
            if m > 0.0 {
                self.set(t, a - m);
                self.set(anti, b - m);
            }
        }
    }

    fn set(&mut self, t: FreeQuantumType, c: f64) {
        if c > 0.0 {
            self.counts.insert(t, c);
        } else {
            self.counts.remove(&t);
        }
    }

    /// p_j = ([α_j]² + [β_j]²) / Σ_k ([α_k]² + [β_k]²), after r-reduction.
    pub fn probabilities(&self) -> Result<Vec<f64>> {
        let mut reduced = self.clone();
        reduced.r_reduce();
        let w: Vec<f64> =
            (0..self.branches).map(|j| reduced.net(Part::Alpha, j).powi(2) + reduced.net(Part::Beta, j).powi(2)).collect();
        let total: f64 = w.iter().sum();
        if total == 0.0 {
            return Err(Error::AllCancelled);
        }
        Ok(w.into_iter().map(|x| x / total).collect())
    }

    /// `part,sign,branch,count`, aggregated over auxiliary options and volumes.
    pub fn to_csv(&self) -> String {
        let mut agg: BTreeMap<(usize, Part, Sign), f64> = BTreeMap::new();
        for (t, &c) in &self.counts {
            *agg.entry((t.branch, t.part, t.sign)).or_insert(0.0) += c;
        }
        let mut s = String::from("part,sign,branch,count\n");
        for ((j, part, sign), c) in agg {
            let p = if part == Part::Alpha { "alpha" } else { "beta" };
            let g = if sign == Sign::Plus { "+" } else { "-" };
            writeln!(s, "{p},{g},{j},{c}").unwrap();
        }
        s
    }
}
