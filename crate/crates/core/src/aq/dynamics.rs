use std::sync::Arc;

use crate::exec;
use crate::rng::{stream, unit};
use crate::{Complex, Error, Result, Units};

use super::bubble::{BoundQuantum, Bubble, FlightLaw, OscState};

/// Default ratio dt/δt between particle and oscillator micro-steps.
pub const DEFAULT_MICROSTEP_RATIO: u32 = 64;

pub type CouplingFn = Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;
type PotentialFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// L(x, v, t) = ½ m v² − V(x, t), or identically zero.
#[derive(Clone)]
pub enum Lagrangian {
    Zero,
    Free,
    Harmonic { omega: f64, center: f64 },
    Potential(PotentialFn),
}

impl std::fmt::Debug for Lagrangian {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Lagrangian::Zero => write!(f, "Zero"),
            Lagrangian::Free => write!(f, "Free"),
            Lagrangian::Harmonic { omega, center } => write!(f, "Harmonic {{ omega: {omega}, center: {center} }}"),
            Lagrangian::Potential(_) => write!(f, "Potential(..)"),
        }
    }
}

impl Lagrangian {
    pub fn potential(&self, x: f64, t: f64, mass: f64) -> f64 {
        match self {
            Lagrangian::Zero | Lagrangian::Free => 0.0,
            Lagrangian::Harmonic { omega, center } => 0.5 * mass * omega * omega * (x - center).powi(2),
            Lagrangian::Potential(v) => v(x, t),
        }
    }

    /// ∂V/∂x.
    pub fn gradient(&self, x: f64, t: f64, mass: f64) -> f64 {
        match self {
            Lagrangian::Zero | Lagrangian::Free => 0.0,
            Lagrangian::Harmonic { omega, center } => mass * omega * omega * (x - center),
            Lagrangian::Potential(v) => {
                let h = 1e-6 * x.abs().max(1.0);
                (v(x + h, t) - v(x - h, t)) / (2.0 * h)
            }
        }
    }

    pub fn value(&self, x: f64, v: f64, t: f64, mass: f64) -> f64 {
        match self {
            Lagrangian::Zero => 0.0,
            _ => 0.5 * mass * v * v - self.potential(x, t, mass),
        }
    }
}

/// A single-mode oscillator attached to every particle quantum.
#[derive(Clone)]
pub struct OscillatorCoupling {
    pub mass: f64,
    pub omega: f64,
    /// g(ẋ, x, t) multiplying X in the interaction term.
    pub g: CouplingFn,
    /// Oscillator velocities are redrawn uniformly in [−vmax, vmax] at collisions.
    pub vmax: f64,
    pub microsteps: u32,
    /// Required ratio of the lattice pitch to the oscillator excursion |X|.
    pub min_ratio: f64,
}

impl OscillatorCoupling {
    pub fn new(mass: f64, omega: f64, g: CouplingFn, vmax: f64) -> Result<Self> {
        if !(omega > 0.0 && mass > 0.0 && vmax >= 0.0) {
            return Err(Error::Domain("oscillator needs M > 0, ω > 0 and vmax ≥ 0".into()));
        }
        Ok(OscillatorCoupling { mass, omega, g, vmax, microsteps: DEFAULT_MICROSTEP_RATIO, min_ratio: 10.0 })
    }

    /// ½ M Ẋ² − ½ M ω² X² + g(ẋ, x, t) X.
    pub fn lagrangian(&self, xo: f64, vo: f64, xp: f64, vp: f64, t: f64) -> f64 {
        0.5 * self.mass * vo * vo - 0.5 * self.mass * self.omega * self.omega * xo * xo + (self.g)(vp, xp, t) * xo
    }
}

impl std::fmt::Debug for OscillatorCoupling {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OscillatorCoupling").field("mass", &self.mass).field("omega", &self.omega).finish_non_exhaustive()
    }
}

struct StepCtx<'a> {
    lag: &'a Lagrangian,
    coupling: Option<&'a OscillatorCoupling>,
    units: Units,
    eps_x: f64,
    flight: FlightLaw,
    t0: f64,
    dt: f64,
    seed: u64,
}

impl Bubble {
    /// Advance every quantum by one micro-step `dt`, applying collisions that fall due.
    pub fn step_ensemble(&mut self, lag: &Lagrangian, dt: f64, coupling: Option<&OscillatorCoupling>) -> Result<()> {
        if !(dt > 0.0) {
            return Err(Error::Domain(format!("micro-step must be positive, got {dt}")));
        }
        if let Some(c) = coupling {
            for q in self.quanta.iter_mut().filter(|q| q.osc.is_none()) {
                let mut rng = stream(self.seed, q.id, q.events);
                q.events += 1;
                q.osc = Some(OscState { x: 0.0, v: (2.0 * unit(&mut rng) - 1.0) * c.vmax });
            }
        }
        let ctx = StepCtx {
            lag,
            coupling,
            units: self.config.units,
            eps_x: self.config.eps_x,
            flight: self.config.flight,
            t0: self.time,
            dt,
            seed: self.seed,
        };
        let mut quanta = std::mem::take(&mut self.quanta);
        let this = &*self;
        let r = exec::try_for_each_mut(self.config.policy, &mut quanta, |q| this.advance(q, &ctx));
        self.quanta = quanta;
        r?;
        self.time += dt;
        Ok(())
    }

    fn advance(&self, q: &mut BoundQuantum, c: &StepCtx<'_>) -> Result<()> {
        let (m, dt, t0) = (c.units.mass, c.dt, c.t0);
        let tm = t0 + 0.5 * dt;
        let x0 = q.x;
        let node0 = q.node(c.eps_x);
        match c.flight {
            FlightLaw::Straight => {
                let xm = x0 + 0.5 * q.v * dt;
                q.action += c.lag.value(xm, q.v, tm, m) * dt;
                q.impulse += c.lag.gradient(xm, tm, m) * (tm - q.t_last) * dt;
                q.x += q.v * dt;
            }
            FlightLaw::Newtonian => {
                let vh = q.v - 0.5 * dt * c.lag.gradient(x0, t0, m) / m;
                let xm = x0 + 0.5 * vh * dt;
                q.action += c.lag.value(xm, vh, tm, m) * dt;
                q.x += vh * dt;
                q.v = vh - 0.5 * dt * c.lag.gradient(q.x, t0 + dt, m) / m;
            }
        }
        let hop = (q.node(c.eps_x) - node0).abs();
        if hop > 1 || (q.x - x0).abs() > c.eps_x * (1.0 + 1e-9) {
            return Err(Error::SpeedCap { id: q.id, shift: (q.x - x0).abs() / c.eps_x });
        }
        if let (Some(cp), Some(osc)) = (c.coupling, q.osc.as_mut()) {
            let sub = dt / cp.microsteps as f64;
            let vp = (q.x - x0) / dt;
            for s in 0..cp.microsteps {
                let ts = t0 + (s as f64 + 0.5) * sub;
                let xo = osc.x + 0.5 * osc.v * sub;
                let xp = x0 + vp * (s as f64 + 0.5) * sub;
                q.action += cp.lagrangian(xo, osc.v, xp, vp, ts) * sub;
                osc.x += osc.v * sub;
            }
            if osc.x.abs() * cp.min_ratio > c.eps_x {
                return Err(Error::Domain(format!(
                    "oscillator excursion {} of quantum {} is not small against the lattice pitch",
                    osc.x, q.id
                )));
            }
        }
        let t1 = t0 + dt;
        if t1 >= q.next_collision - 1e-9 * dt {
            self.collide(q, t1, c.seed, c.coupling.map(|cp| cp.vmax))?;
        }
        Ok(())
    }

    /// Fold the pending action into the amplitude and redraw velocities.
    pub(crate) fn collide(&self, q: &mut BoundQuantum, t: f64, seed: u64, osc_vmax: Option<f64>) -> Result<()> {
        let hbar = self.config.units.hbar;
        q.k_last = q.end_wavenumber(t, self.config.flight, &self.config.units);
        q.amp *= Complex::from_polar(1.0, q.action / hbar);
        q.action = 0.0;
        q.impulse = 0.0;
        q.t_last = t;
        q.x_last = q.x;
        let mut rng = stream(seed, q.id, q.events);
        q.events += 1;
        q.v = self.center_velocity(q.x) + self.config.velocity.draw(&mut rng);
        q.next_collision = self.next_collision_time(&mut rng, t);
        if let (Some(osc), Some(vmax)) = (q.osc.as_mut(), osc_vmax) {
            osc.v = (2.0 * unit(&mut rng) - 1.0) * vmax;
        }
        self.check_light_speed(q)
    }
}
