use crate::fd::Grid1D;
use crate::{Complex, Error, Result};

use super::bubble::{Bubble, BubbleConfig, FlightLaw};
use super::dynamics::{Lagrangian, OscillatorCoupling};
use super::observe::Accumulated;

/// Propagation in intervals: fly, accumulate, optionally reduce, reinject.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormingCycle {
    /// Time between norming signals.
    pub interval: f64,
    /// Grain applied to the accumulated state before reinjection.
    pub grain: Option<f64>,
}

impl NormingCycle {
    pub fn new(interval: f64) -> Result<Self> {
        if !(interval > 0.0) {
            return Err(Error::Domain(format!("norming interval must be positive, got {interval}")));
        }
        Ok(NormingCycle { interval, grain: None })
    }

    pub fn with_grain(mut self, eps: f64) -> Self {
        self.grain = Some(eps);
        self
    }

    /// Advance `steps` intervals. `observe` sees the bubble and its
    /// accumulation at the end of each interval, before reinjection.
    pub fn run(
        &self,
        bubble: &mut Bubble,
        lag: &Lagrangian,
        coupling: Option<&OscillatorCoupling>,
        steps: usize,
        mut observe: impl FnMut(usize, &Bubble, &Accumulated),
    ) -> Result<Accumulated> {
        let mut last = bubble.accumulate();
        for s in 0..steps {
            let (n, dt) = self.micro_steps(bubble, lag);
            for _ in 0..n {
                bubble.step_ensemble(lag, dt, coupling)?;
            }
            last = bubble.accumulate();
            if last.raw_norm_sqr == 0.0 {
                return Err(Error::AllCancelled);
            }
            observe(s, bubble, &last);
            let psi = match self.grain {
                Some(eps) => {
                    let mut p = last.psi.clone();
                    p.grain = crate::state::GrainPolicy::new(eps)?;
                    p.reduce()?
                }
                None => last.psi.clone(),
            };
            let kbar: Vec<f64> = psi
                .labels()
                .map(|l| {
                    let i = last.psi.entries().partition_point(|e| e.0 < l);
                    last.kbar[i]
                })
                .collect();
            bubble.renorm(&psi, Some(&kbar))?;
        }
        Ok(last)
    }

    /// Micro-step count and length for one interval, keeping every flight
    /// within one lattice node at the current top speed. Newtonian flights
    /// allow for the speed gained over the interval, with a 10% margin.
    pub fn micro_steps(&self, bubble: &Bubble, lag: &Lagrangian) -> (usize, f64) {
        let cfg = &bubble.config;
        let mut vmax = bubble.max_abs_velocity().max(cfg.velocity.max_speed());
        if cfg.flight == FlightLaw::Newtonian {
            let m = cfg.units.mass;
            let t = bubble.time;
            let a = bubble.quanta.iter().map(|q| lag.gradient(q.x, t, m).abs() / m).fold(0.0, f64::max);
            vmax = 1.1 * (vmax + a * self.interval);
        }
        let bound = cfg.eps_x / vmax.max(f64::MIN_POSITIVE);
        let n = (self.interval / bound).ceil().max(1.0) as usize;
        (n, self.interval / n as f64)
    }
}

/// Probability per δ-cell of a grid wavefunction, labelled like [`Bubble::accumulate`].
pub fn cell_probabilities(grid: &Grid1D, psi: &[Complex], config: &BubbleConfig) -> Vec<f64> {
    let (c0, c1) = config.cell_range();
    let mut p = vec![0.0; (c1 - c0 + 1) as usize];
    let total: f64 = psi.iter().map(|a| a.norm_sqr()).sum();
    for (i, a) in psi.iter().enumerate() {
        let c = config.cell_of(grid.position(i));
        if (c0..=c1).contains(&c) {
            p[(c - c0) as usize] += a.norm_sqr() / total;
        }
    }
    p
}

/// Σ|a − b|, treating missing trailing entries as zero.
pub fn l1_distance(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().max(b.len());
    (0..n).map(|i| (a.get(i).copied().unwrap_or(0.0) - b.get(i).copied().unwrap_or(0.0)).abs()).sum()
}
