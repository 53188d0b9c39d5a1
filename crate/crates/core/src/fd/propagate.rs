use crate::state::GrainedWaveFunction;
use crate::{Complex, Error, Result, Units};

use super::{Boundary, Grid1D, Potential};

/// Largest admissible `|dt| E_max / ħ`, where `E_max` bounds the discrete spectrum.
/// The Cayley step is unitary for any dt; beyond this the fastest grid modes are
/// rotated by more than this many radians per step and the step is rejected.
pub const MAX_PHASE_PER_STEP: f64 = 1000.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    ImplicitMidpoint,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PropagatorConfig {
    pub dt: f64,
    pub scheme: Scheme,
    pub steps_per_output: usize,
}

/// (Hψ)_i = −(ħ²/2m)(ψ_{i+1} − 2ψ_i + ψ_{i−1})/dx² + V_i ψ_i
pub fn apply_hamiltonian(grid: &Grid1D, v: &Potential, units: &Units, psi: &[Complex]) -> Vec<Complex> {
    let n = grid.points;
    let kappa = units.hbar * units.hbar / (2.0 * units.mass * grid.dx * grid.dx);
    let zero = Complex::new(0.0, 0.0);
    (0..n)
        .map(|i| {
            let (l, r) = neighbours(grid, psi, i, zero);
            -(l + r - 2.0 * psi[i]) * kappa + psi[i] * v.values[i]
        })
        .collect()
}

fn neighbours(grid: &Grid1D, psi: &[Complex], i: usize, zero: Complex) -> (Complex, Complex) {
    let n = grid.points;
    match grid.boundary {
        Boundary::Periodic => (psi[(i + n - 1) % n], psi[(i + 1) % n]),
        Boundary::HardWall => (if i > 0 { psi[i - 1] } else { zero }, if i + 1 < n { psi[i + 1] } else { zero }),
    }
}

/// Implicit-midpoint propagator with a fixed step, reusable across steps.
#[derive(Clone, Debug)]
pub struct Propagator {
    grid: Grid1D,
    v: Potential,
    units: Units,
    dt: f64,
    /// (1 + iΔt H/2ħ): diagonal and the constant off-diagonal.
    diag: Vec<Complex>,
    off: Complex,
}

impl Propagator {
    pub fn new(grid: Grid1D, v: Potential, units: Units, dt: f64) -> Result<Self> {
        if v.values.len() != grid.points {
            return Err(Error::DimensionMismatch(format!("potential has {} values for {} points", v.values.len(), grid.points)));
        }
        let kappa = units.hbar * units.hbar / (2.0 * units.mass * grid.dx * grid.dx);
        let e_max = 4.0 * kappa + v.max_abs();
        let bound = MAX_PHASE_PER_STEP * units.hbar / e_max;
        if !dt.is_finite() || dt.abs() > bound {
            return Err(Error::Stability { dt, bound });
        }
        let a = Complex::new(0.0, dt / (2.0 * units.hbar));
        let diag = v.values.iter().map(|&vi| Complex::new(1.0, 0.0) + a * (2.0 * kappa + vi)).collect();
        Ok(Propagator { grid, v, units, dt, diag, off: -a * kappa })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    /// Solve (1 + iΔt H/2ħ) ψ' = (1 − iΔt H/2ħ) ψ in place.
    pub fn step(&self, psi: &mut [Complex]) -> Result<()> {
        if psi.len() != self.grid.points {
            return Err(Error::DimensionMismatch(format!("{} amplitudes on a {}-point grid", psi.len(), self.grid.points)));
        }
        if self.dt == 0.0 {
            return Ok(());
        }
        let h = apply_hamiltonian(&self.grid, &self.v, &self.units, psi);
        let a = Complex::new(0.0, self.dt / (2.0 * self.units.hbar));
        let rhs: Vec<Complex> = psi.iter().zip(&h).map(|(&p, &hp)| p - a * hp).collect();
        let out = match self.grid.boundary {
            Boundary::HardWall => thomas(&self.diag, self.off, self.off, &rhs),
            Boundary::Periodic => cyclic(&self.diag, self.off, &rhs),
        };
        psi.copy_from_slice(&out);
        Ok(())
    }

    pub fn run(&self, psi: &mut [Complex], steps: usize) -> Result<()> {
        for _ in 0..steps {
            self.step(psi)?;
        }
        Ok(())
    }
}

/// Tridiagonal solve with constant sub/super diagonals. The systems built here
/// are strictly diagonally dominant, so no pivoting is needed.
fn thomas(diag: &[Complex], sub: Complex, sup: Complex, rhs: &[Complex]) -> Vec<Complex> {
    let n = diag.len();
    let mut c = vec![Complex::new(0.0, 0.0); n];
    let mut d = vec![Complex::new(0.0, 0.0); n];
    c[0] = sup / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - sub * c[i - 1];
        c[i] = sup / m;
        d[i] = (rhs[i] - sub * d[i - 1]) / m;
    }
    for i in (0..n - 1).rev() {
        let next = d[i + 1];
        d[i] -= c[i] * next;
    }
    d
}

/// Cyclic tridiagonal solve via Sherman–Morrison: the corner entries equal the off-diagonal.
fn cyclic(diag: &[Complex], off: Complex, rhs: &[Complex]) -> Vec<Complex> {
    let n = diag.len();
    let gamma = -diag[0];
    let mut bb = diag.to_vec();
    bb[0] -= gamma;
    bb[n - 1] -= off * off / gamma;
    let x = thomas(&bb, off, off, rhs);
    let mut u = vec![Complex::new(0.0, 0.0); n];
    u[0] = gamma;
    u[n - 1] = off;
    let z = thomas(&bb, off, off, &u);
    let fact = (x[0] + off * x[n - 1] / gamma) / (Complex::new(1.0, 0.0) + z[0] + off * z[n - 1] / gamma);
    x.iter().zip(&z).map(|(&xi, &zi)| xi - fact * zi).collect()
}

/// One implicit-midpoint step of a grid state.
pub fn evolve_step(psi: &GrainedWaveFunction, grid: &Grid1D, v: &Potential, dt: f64, units: &Units) -> Result<GrainedWaveFunction> {
    let mut a = grid.from_state(psi)?;
    Propagator::new(*grid, v.clone(), *units, dt)?.step(&mut a)?;
    grid.to_state(&a, psi.grain)
}
