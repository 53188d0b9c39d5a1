use crate::exec;
use crate::rng::{stream, unit};
use crate::state::{GrainPolicy, GrainedWaveFunction, GridMeta};
use crate::{Complex, Error, Result};

use super::bubble::{AccumulateMode, Bubble, LocalWavenumber};

/// Cell sums of a bubble.
#[derive(Clone, Debug)]
pub struct Accumulated {
    /// Normalized cell amplitudes; labels count cells from the left end of the domain.
    pub psi: GrainedWaveFunction,
    /// Local wavenumber per entry of `psi`.
    pub kbar: Vec<f64>,
    /// Σ_cells |Σ λ|² before normalization.
    pub raw_norm_sqr: f64,
}

/// A run of adjacent occupied cells.
#[derive(Clone, Debug, PartialEq)]
pub struct Component {
    /// Inclusive label range.
    pub first: u64,
    pub last: u64,
    /// Born weight of the run.
    pub weight: f64,
}

/// Wavenumber moments of one cell.
#[derive(Clone, Copy, Debug)]
struct KSum {
    weighted: Complex,
    mean: f64,
    modulus: f64,
    lo: f64,
    hi: f64,
}

impl Default for KSum {
    fn default() -> Self {
        KSum { weighted: Complex::new(0.0, 0.0), mean: 0.0, modulus: 0.0, lo: f64::INFINITY, hi: f64::NEG_INFINITY }
    }
}

impl KSum {
    fn add(&mut self, k: f64, mu: Complex) {
        self.weighted += mu * k;
        self.mean += k * mu.norm();
        self.modulus += mu.norm();
        self.lo = self.lo.min(k);
        self.hi = self.hi.max(k);
    }

    fn merge(&mut self, o: &KSum) {
        self.weighted += o.weighted;
        self.mean += o.mean;
        self.modulus += o.modulus;
        self.lo = self.lo.min(o.lo);
        self.hi = self.hi.max(o.hi);
    }

    fn estimate(&self, sum: Complex, rule: LocalWavenumber) -> f64 {
        match rule {
            LocalWavenumber::Coherent => ((self.weighted * sum.conj()).re / sum.norm_sqr()).clamp(self.lo, self.hi),
            LocalWavenumber::ArrivalMean => self.mean / self.modulus,
        }
    }
}

impl Bubble {
    /// Per cell: Σ μ, and Σ k μ with the range of k for the local wavenumber.
    fn cell_sums(&self) -> (Vec<Complex>, Vec<KSum>) {
        let cfg = &self.config;
        let (c0, c1) = cfg.cell_range();
        let n = (c1 - c0 + 1) as usize;
        let (hbar, t) = (cfg.units.hbar, self.time);
        let parts = exec::map_chunks(cfg.policy, &self.quanta, |chunk| {
            let mut s = vec![Complex::new(0.0, 0.0); n];
            let mut ks = vec![KSum::default(); n];
            for q in chunk {
                if !self.in_domain(q.x) {
                    continue;
                }
                let i = (cfg.cell_of(q.x) - c0) as usize;
                if i >= n {
                    continue;
                }
                let k = q.end_wavenumber(t, cfg.flight, &cfg.units);
                let mut mu = q.current_amp(hbar);
                if cfg.accumulate == AccumulateMode::PhaseReferenced {
                    mu *= Complex::from_polar(1.0, -k * (q.x - cfg.cell_center(c0 + i as i64)));
                }
                s[i] += mu;
                ks[i].add(k, mu);
            }
            (s, ks)
        });
        let mut s = vec![Complex::new(0.0, 0.0); n];
        let mut ks = vec![KSum::default(); n];
        for (ps, pk) in parts {
            for i in 0..n {
                s[i] += ps[i];
                ks[i].merge(&pk[i]);
            }
        }
        (s, ks)
    }

    /// ψ(cell) = Σ_{α in cell} λ_α, normalized over the domain.
    pub fn accumulate(&self) -> Accumulated {
        let cfg = &self.config;
        let (c0, _) = cfg.cell_range();
        let (s, ks) = self.cell_sums();
        let mut entries = Vec::new();
        let mut kbar = Vec::new();
        for (i, (&a, &k)) in s.iter().zip(&ks).enumerate() {
            if a.norm_sqr() > 0.0 {
                entries.push((i as u64, a));
                kbar.push(k.estimate(a, cfg.kbar));
            }
        }
        let raw_norm_sqr: f64 = entries.iter().map(|e| e.1.norm_sqr()).sum();
        let meta = GridMeta::new(cfg.delta(), cfg.cell_center(c0), s.len());
        let mut psi = GrainedWaveFunction::from_entries(entries, GrainPolicy::exact())
            .expect("cell sums are finite")
            .with_grid(meta);
        if raw_norm_sqr > 0.0 {
            psi.normalize().expect("nonzero norm");
        }
        Accumulated { psi, kbar, raw_norm_sqr }
    }

    /// Σ λ_α e^{−i x_α k_α} over quanta with |k_α − k0| < eps_k.
    pub fn momentum_view(&self, k0: f64, eps_k: f64) -> Result<Complex> {
        if !(eps_k > 0.0) {
            return Err(Error::Domain(format!("momentum window must be positive, got {eps_k}")));
        }
        let cfg = &self.config;
        let (hbar, t) = (cfg.units.hbar, self.time);
        let parts = exec::map_chunks(cfg.policy, &self.quanta, |chunk| {
            chunk
                .iter()
                .filter_map(|q| {
                    let k = q.end_wavenumber(t, cfg.flight, &cfg.units);
                    ((k - k0).abs() < eps_k).then(|| q.current_amp(hbar) * Complex::from_polar(1.0, -q.x * k))
                })
                .sum::<Complex>()
        });
        Ok(parts.into_iter().sum())
    }

    /// Adjacent runs of occupied cells with their Born weights.
    pub fn connectivity(&self) -> Vec<Component> {
        components(&self.accumulate().psi)
    }

    /// Pick one component by Born weight and move every quantum outside it
    /// into it, resampled from the component's own amplitudes.
    pub fn project_component(&mut self, draw_seed: u64) -> Result<Component> {
        let acc = self.accumulate();
        let comps = components(&acc.psi);
        if comps.is_empty() {
            return Err(Error::EmptyBubble);
        }
        let mut rng = stream(draw_seed, u64::MAX, 0);
        let u = unit(&mut rng);
        let mut acc_w = 0.0;
        let mut chosen = comps[comps.len() - 1].clone();
        for c in &comps {
            acc_w += c.weight;
            if u < acc_w {
                chosen = c.clone();
                break;
            }
        }
        let (c0, _) = self.config.cell_range();
        let inside = |x: f64| {
            let i = self.config.cell_of(x) - c0;
            i >= chosen.first as i64 && i <= chosen.last as i64
        };
        let keep: Vec<bool> = self.quanta.iter().map(|q| self.in_domain(q.x) && inside(q.x)).collect();
        let mut idx = Vec::new();
        let mut kb = Vec::new();
        let sub: Vec<(u64, Complex)> = acc
            .psi
            .entries()
            .iter()
            .zip(&acc.kbar)
            .filter(|(e, _)| e.0 >= chosen.first && e.0 <= chosen.last)
            .map(|(e, k)| {
                kb.push(*k);
                *e
            })
            .collect();
        for (i, k) in keep.iter().enumerate() {
            if !k {
                idx.push(i);
            }
        }
        let mut psi = GrainedWaveFunction::from_entries(sub, GrainPolicy::exact())?.normalized()?;
        psi.grid = acc.psi.grid;
        self.reinject_indices(&idx, &psi, Some(&kb))?;
        Ok(chosen)
    }
}

fn components(psi: &GrainedWaveFunction) -> Vec<Component> {
    let mut out: Vec<Component> = Vec::new();
    let total = psi.norm_sqr();
    for &(l, a) in psi.entries() {
        if a.norm_sqr() == 0.0 {
            continue;
        }
        let w = a.norm_sqr() / total;
        match out.last_mut() {
            Some(c) if c.last + 1 == l => {
                c.last = l;
                c.weight += w;
            }
            _ => out.push(Component { first: l, last: l, weight: w }),
        }
    }
    out
}

/// Momentum views on a uniform wavenumber grid, normalized over the sweep.
pub fn momentum_sweep(bubble: &Bubble, ks: &[f64], eps_k: f64) -> Result<GrainedWaveFunction> {
    if ks.len() < 2 {
        return Err(Error::Domain("a sweep needs at least two wavenumbers".into()));
    }
    let vals = ks.iter().map(|&k| bubble.momentum_view(k, eps_k)).collect::<Result<Vec<_>>>()?;
    let meta = GridMeta::new(ks[1] - ks[0], ks[0], ks.len());
    GrainedWaveFunction::from_dense(&vals, GrainPolicy::exact())?.with_grid(meta).normalized()
}
