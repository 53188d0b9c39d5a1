use std::f64::consts::PI;

use crate::exec::{self, Policy};
use crate::rng::{stream, unit};
use crate::state::GrainedWaveFunction;
use crate::{Complex, Error, Result, Units};

/// Law for velocities drawn at collisions, relative to the local centre.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum VelocityLaw {
    Uniform { vmax: f64 },
    /// Flat on |u| ≤ core, cos²-tapered to zero over a further `taper`.
    FlatTop { core: f64, taper: f64 },
}

impl VelocityLaw {
    pub fn max_speed(&self) -> f64 {
        match *self {
            VelocityLaw::Uniform { vmax } => vmax,
            VelocityLaw::FlatTop { core, taper } => core + taper,
        }
    }

    fn weight(&self, u: f64) -> f64 {
        match *self {
            VelocityLaw::Uniform { .. } => 1.0,
            VelocityLaw::FlatTop { core, taper } => {
                let a = u.abs();
                if a <= core {
                    1.0
                } else {
                    (0.5 * PI * (a - core) / taper).cos().powi(2)
                }
            }
        }
    }

    /// Draw by rejection; 31 tries fit in the words reserved for one event.
    pub(crate) fn draw(&self, rng: &mut impl rand::RngCore) -> f64 {
        let w = self.max_speed();
        let mut u = 0.0;
        for _ in 0..31 {
            u = (2.0 * unit(rng) - 1.0) * w;
            if unit(rng) < self.weight(u) {
                return u;
            }
        }
        u
    }
}

/// Centre of the velocity window.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VelocityCenter {
    Zero,
    /// ħ k̄ / m of the quantum's cell, from the last accumulation.
    LocalMomentum,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CollisionClock {
    /// Exponential waiting times with the given rate, per quantum.
    Poisson { rate: f64 },
    /// Every quantum collides at multiples of `interval`.
    Periodic { interval: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FlightLaw {
    /// Constant velocity between collisions.
    Straight,
    /// Velocity-Verlet flights under the force −∂V/∂x.
    Newtonian,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AccumulateMode {
    /// ψ(cell) = Σ λ.
    Plain,
    /// ψ(cell) = Σ λ e^{−i k (x − x_c)}, each quantum carrying its endpoint wavenumber.
    PhaseReferenced,
}

/// Estimate of a cell's local wavenumber from the quanta arriving in it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LocalWavenumber {
    /// Re(Σ k μ / Σ μ), clamped to the range of arriving k.
    Coherent,
    /// Σ k |μ| / Σ |μ|: the mean arrival wavenumber, stable when the action is large.
    ArrivalMean,
}

/// Sampling density for injected quanta. Amplitudes are weighted by ψ/ρ, so
/// cell sums reproduce ψ under either choice.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReinjectionDensity {
    ModulusSquared,
    /// ρ ∝ |ψ|: every injected quantum has the same modulus.
    Modulus,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BubbleConfig {
    pub eps_x: f64,
    /// Cell size δ = r ε_x.
    pub r: u32,
    pub stale_time: f64,
    /// Simulated interval; quanta outside it are ignored by accumulation and reinjected by recycling.
    pub domain: (f64, f64),
    pub velocity: VelocityLaw,
    pub center: VelocityCenter,
    pub clock: CollisionClock,
    pub flight: FlightLaw,
    pub accumulate: AccumulateMode,
    pub kbar: LocalWavenumber,
    pub reinjection: ReinjectionDensity,
    pub units: Units,
    pub policy: Policy,
}

impl Default for BubbleConfig {
    fn default() -> Self {
        BubbleConfig {
            eps_x: 0.01,
            r: 10,
            stale_time: f64::INFINITY,
            domain: (-10.0, 10.0),
            velocity: VelocityLaw::Uniform { vmax: 0.5 },
            center: VelocityCenter::Zero,
            clock: CollisionClock::Poisson { rate: 1.0 },
            flight: FlightLaw::Straight,
            accumulate: AccumulateMode::Plain,
            kbar: LocalWavenumber::Coherent,
            reinjection: ReinjectionDensity::ModulusSquared,
            units: Units::default(),
            policy: Policy::default(),
        }
    }
}

impl BubbleConfig {
    pub fn delta(&self) -> f64 {
        self.r as f64 * self.eps_x
    }

    pub fn validate(&self) -> Result<()> {
        self.units.validate()?;
        if !(self.eps_x > 0.0) || self.r == 0 || !(self.domain.1 > self.domain.0) {
            return Err(Error::Domain("bubble needs eps_x > 0, r ≥ 1 and a nonempty domain".into()));
        }
        match self.clock {
            CollisionClock::Poisson { rate } if !(rate > 0.0) => return Err(Error::Domain("collision rate must be positive".into())),
            CollisionClock::Periodic { interval } if !(interval > 0.0) => return Err(Error::Domain("collision interval must be positive".into())),
            _ => {}
        }
        if !(self.velocity.max_speed() > 0.0) {
            return Err(Error::Domain("velocity law must have a positive range".into()));
        }
        Ok(())
    }

    /// Global cell index of a position.
    pub fn cell_of(&self, x: f64) -> i64 {
        ((x / self.eps_x).round() as i64).div_euclid(self.r as i64)
    }

    pub fn cell_center(&self, c: i64) -> f64 {
        (c as f64 * self.r as f64 + (self.r as f64 - 1.0) / 2.0) * self.eps_x
    }

    pub(crate) fn cell_range(&self) -> (i64, i64) {
        (self.cell_of(self.domain.0), self.cell_of(self.domain.1))
    }
}

/// Oscillator degree of freedom riding on a particle quantum.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct OscState {
    pub x: f64,
    pub v: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundQuantum {
    pub id: u64,
    pub x: f64,
    pub v: f64,
    /// Amplitude as of the last collision.
    pub amp: Complex,
    pub t_last: f64,
    pub x_last: f64,
    /// Action accumulated since `t_last`.
    pub action: f64,
    /// ∫ ∂V/∂x (t′ − t_last) dt′ along the current straight flight.
    pub impulse: f64,
    pub next_collision: f64,
    /// Wavenumber at the end of the previous flight, reported while no time
    /// has elapsed since `t_last`.
    pub k_last: f64,
    /// Random events consumed so far.
    pub events: u64,
    pub osc: Option<OscState>,
}

impl BoundQuantum {
    /// Lattice node index.
    pub fn node(&self, eps_x: f64) -> i64 {
        (self.x / eps_x).round() as i64
    }

    /// Amplitude if a collision happened now.
    pub fn current_amp(&self, hbar: f64) -> Complex {
        self.amp * Complex::from_polar(1.0, self.action / hbar)
    }

    /// ∂S/∂x at the current endpoint, over ħ.
    pub fn end_wavenumber(&self, t: f64, flight: FlightLaw, units: &Units) -> f64 {
        let p = units.mass * self.v;
        let elapsed = t - self.t_last;
        if elapsed == 0.0 {
            return self.k_last;
        }
        match flight {
            FlightLaw::Newtonian => p / units.hbar,
            FlightLaw::Straight => (p - self.impulse / elapsed) / units.hbar,
        }
    }
}

/// An ensemble of bound quanta approximating one wavefunction.
#[derive(Clone, Debug)]
pub struct Bubble {
    pub quanta: Vec<BoundQuantum>,
    pub config: BubbleConfig,
    pub seed: u64,
    pub time: f64,
    /// Velocity-window centre per domain cell.
    pub(crate) centers: Vec<f64>,
}

/// A state sampled for injection: cumulative weights over labels plus interpolation data.
pub(crate) struct Injector<'a> {
    psi: &'a GrainedWaveFunction,
    spacing: f64,
    origin: f64,
    cdf: Vec<f64>,
    rho: Vec<f64>,
    /// Σ |ψ_l| ρ_l / ρ_l, the mean |ψ/ρ| under ρ.
    z: f64,
    kbar: Vec<f64>,
}

impl<'a> Injector<'a> {
    pub(crate) fn new(psi: &'a GrainedWaveFunction, density: ReinjectionDensity, kbar: Option<&[f64]>) -> Result<Self> {
        let grid = psi.grid.ok_or_else(|| Error::Domain("injection needs a state with grid metadata".into()))?;
        let w: Vec<f64> = psi
            .entries()
            .iter()
            .map(|e| match density {
                ReinjectionDensity::ModulusSquared => e.1.norm_sqr(),
                ReinjectionDensity::Modulus => e.1.norm(),
            })
            .collect();
        let total: f64 = w.iter().sum();
        if !(total > 0.0) {
            return Err(Error::AllAnnihilated);
        }
        let rho: Vec<f64> = w.iter().map(|x| x / total).collect();
        let mut cdf = Vec::with_capacity(rho.len());
        let mut acc = 0.0;
        for &p in &rho {
            acc += p;
            cdf.push(acc);
        }
        let z = psi.entries().iter().map(|e| e.1.norm()).sum::<f64>();
        let kbar = match kbar {
            Some(k) => k.to_vec(),
            None => phase_gradient(psi, grid.spacing),
        };
        Ok(Injector { psi, spacing: grid.spacing, origin: grid.origin, cdf, rho, z, kbar })
    }

    pub(crate) fn kbar_values(&self) -> &[f64] {
        &self.kbar
    }

    /// Position, amplitude (scale `a_ref` on average in modulus) and local wavenumber.
    pub(crate) fn sample(&self, rng: &mut impl rand::RngCore, a_ref: f64) -> (f64, Complex, f64) {
        let u = unit(rng) * self.cdf[self.cdf.len() - 1];
        let i = self.cdf.partition_point(|&c| c <= u).min(self.rho.len() - 1);
        let (label, amp) = self.psi.entries()[i];
        let xc = self.origin + label as f64 * self.spacing;
        let off = (unit(rng) - 0.5) * self.spacing;
        let k = self.kbar[i];
        // Linear interpolation towards the neighbour on the side of the offset,
        // after removing the local plane-wave factor.
        let (nb_label, frac) = if off >= 0.0 { (label + 1, off / self.spacing) } else { (label.wrapping_sub(1), -off / self.spacing) };
        let nb = self.psi.amplitude(nb_label) * Complex::from_polar(1.0, -k * (off.signum() * self.spacing));
        let psi_x = (amp * (1.0 - frac) + nb * frac) * Complex::from_polar(1.0, k * off);
        let lam = psi_x / (self.rho[i] * self.z) * a_ref;
        (xc + off, lam, k)
    }
}

/// Local wavenumber per entry from neighbouring phase differences.
fn phase_gradient(psi: &GrainedWaveFunction, dx: f64) -> Vec<f64> {
    psi.entries()
        .iter()
        .map(|&(l, a)| {
            let right = psi.amplitude(l + 1);
            let left = if l > 0 { psi.amplitude(l - 1) } else { Complex::new(0.0, 0.0) };
            let (r0, l0) = (right.norm() > 0.0, left.norm() > 0.0);
            match (l0, r0) {
                (true, true) => (right * left.conj()).arg() / (2.0 * dx),
                (false, true) => (right * a.conj()).arg() / dx,
                (true, false) => (a * left.conj()).arg() / dx,
                (false, false) => 0.0,
            }
        })
        .collect()
}

impl Bubble {
    /// Sample `n` quanta from ψ; amplitudes are importance weights ψ/ρ of mean modulus 1.
    pub fn init(psi: &GrainedWaveFunction, n: usize, seed: u64, config: BubbleConfig) -> Result<Self> {
        config.validate()?;
        if n < 1000 {
            return Err(Error::Domain(format!("a bubble needs at least 10³ quanta, got {n}")));
        }
        let inj = Injector::new(psi, config.reinjection, None)?;
        let (c0, c1) = config.cell_range();
        let mut b = Bubble { quanta: Vec::new(), config, seed, time: 0.0, centers: vec![0.0; (c1 - c0 + 1) as usize] };
        if config.center == VelocityCenter::LocalMomentum {
            b.set_centers_from(psi, &inj.kbar);
        }
        b.quanta = exec::map_range(config.policy, n, |i| b.inject(i as u64, &inj, 1.0, 0));
        for q in &b.quanta {
            b.check_light_speed(q)?;
        }
        Ok(b)
    }

    /// New quantum with id `id`, drawing from the injection stream.
    pub(crate) fn inject(&self, id: u64, inj: &Injector<'_>, a_ref: f64, events: u64) -> BoundQuantum {
        let c = &self.config;
        let mut rng = stream(self.seed, id, events);
        let (x, amp, k_last) = inj.sample(&mut rng, a_ref);
        let v = self.center_velocity(x) + c.velocity.draw(&mut rng);
        let next_collision = self.next_collision_time(&mut rng, self.time);
        BoundQuantum {
            id,
            x,
            v,
            amp,
            t_last: self.time,
            x_last: x,
            action: 0.0,
            impulse: 0.0,
            next_collision,
            k_last,
            events: events + 1,
            osc: None,
        }
    }

    pub(crate) fn next_collision_time(&self, rng: &mut impl rand::RngCore, t: f64) -> f64 {
        match self.config.clock {
            CollisionClock::Poisson { rate } => t - (1.0 - unit(rng)).ln() / rate,
            CollisionClock::Periodic { interval } => ((t / interval).round() + 1.0) * interval,
        }
    }

    pub(crate) fn center_velocity(&self, x: f64) -> f64 {
        if self.config.center == VelocityCenter::Zero {
            return 0.0;
        }
        let (c0, _) = self.config.cell_range();
        let i = self.config.cell_of(x) - c0;
        if i >= 0 && (i as usize) < self.centers.len() {
            self.centers[i as usize]
        } else {
            0.0
        }
    }

    /// Set velocity centres from a state's local wavenumbers, mapping its labels onto domain cells.
    pub(crate) fn set_centers_from(&mut self, psi: &GrainedWaveFunction, kbar: &[f64]) {
        let Some(grid) = psi.grid else { return };
        let (c0, _) = self.config.cell_range();
        let u = self.config.units;
        let mut sum = vec![0.0; self.centers.len()];
        let mut wsum = vec![0.0; self.centers.len()];
        for (e, &k) in psi.entries().iter().zip(kbar) {
            let i = self.config.cell_of(grid.position(e.0)) - c0;
            if i >= 0 && (i as usize) < sum.len() {
                let w = e.1.norm_sqr();
                sum[i as usize] += w * k;
                wsum[i as usize] += w;
            }
        }
        for i in 0..self.centers.len() {
            self.centers[i] = if wsum[i] > 0.0 { u.hbar * sum[i] / (wsum[i] * u.mass) } else { 0.0 };
        }
    }

    pub(crate) fn check_light_speed(&self, q: &BoundQuantum) -> Result<()> {
        if q.v.abs() > self.config.units.light_speed {
            return Err(Error::Domain(format!("quantum {} speed {} exceeds light speed {}", q.id, q.v, self.config.units.light_speed)));
        }
        Ok(())
    }

    /// Bubble holding the given quanta; velocity centres are reset to zero.
    pub fn from_quanta(quanta: Vec<BoundQuantum>, seed: u64, time: f64, config: BubbleConfig) -> Result<Self> {
        config.validate()?;
        let (c0, c1) = config.cell_range();
        let b = Bubble { quanta, config, seed, time, centers: vec![0.0; (c1 - c0 + 1) as usize] };
        for q in &b.quanta {
            b.check_light_speed(q)?;
        }
        Ok(b)
    }

    pub fn max_abs_velocity(&self) -> f64 {
        self.quanta.iter().map(|q| q.v.abs()).fold(0.0, f64::max)
    }

    pub fn len(&self) -> usize {
        self.quanta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.quanta.is_empty()
    }

    pub fn in_domain(&self, x: f64) -> bool {
        x >= self.config.domain.0 && x <= self.config.domain.1
    }
}
