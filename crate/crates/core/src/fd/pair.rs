use crate::state::{division_points, DivisionPoints, GrainedWaveFunction};
use crate::{Complex, Error, Result, Units};

use super::{evolve_step, Boundary, Grid1D, Potential};

/// The pair (|Ψ⟩, P) advanced together: the state and points distributed as |Ψ|².
#[derive(Clone, Debug)]
pub struct PairState {
    pub psi: GrainedWaveFunction,
    pub points: DivisionPoints,
    /// Ψ interpolated at each point.
    pub values: Vec<Complex>,
}

/// Cubic (Catmull–Rom) interpolation of grid amplitudes at `x`.
pub fn catmull_rom(grid: &Grid1D, psi: &[Complex], x: f64) -> Complex {
    let s = (x - grid.origin) / grid.dx;
    let i = s.floor() as i64;
    let t = s - i as f64;
    let n = grid.points as i64;
    let at = |j: i64| -> Complex {
        match grid.boundary {
            Boundary::Periodic => psi[j.rem_euclid(n) as usize],
            Boundary::HardWall if (0..n).contains(&j) => psi[j as usize],
            Boundary::HardWall => Complex::new(0.0, 0.0),
        }
    };
    let (p0, p1, p2, p3) = (at(i - 1), at(i), at(i + 1), at(i + 2));
    let t2 = t * t;
    let t3 = t2 * t;
    (p1 * 2.0 + (p2 - p0) * t + (p0 * 2.0 - p1 * 5.0 + p2 * 4.0 - p3) * t2 + (p1 * 3.0 - p0 - p2 * 3.0 + p3) * t3) * 0.5
}

/// Advance Ψ one step and redraw the division points from |Ψ'|².
#[allow(clippy::too_many_arguments)]
pub fn evolve_pair(
    psi: &GrainedWaveFunction,
    points: &DivisionPoints,
    grid: &Grid1D,
    v: &Potential,
    dt: f64,
    g: f64,
    seed: u64,
    units: &Units,
) -> Result<PairState> {
    if points.is_empty() {
        return Err(Error::Domain("division point set is empty".into()));
    }
    let next = evolve_step(psi, grid, v, dt, units)?;
    let pts = division_points(&next, g, seed)?;
    let dense = grid.from_state(&next)?;
    let values = pts.points.iter().map(|&x| catmull_rom(grid, &dense, x)).collect();
    Ok(PairState { psi: next, points: pts, values })
}
