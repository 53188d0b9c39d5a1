use crate::state::{GrainPolicy, GrainedWaveFunction, GridMeta};
use crate::{Complex, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Boundary {
    Periodic,
    /// ψ vanishes one spacing beyond each end.
    HardWall,
}

impl Boundary {
    pub fn name(self) -> &'static str {
        match self {
            Boundary::Periodic => "periodic",
            Boundary::HardWall => "hard-wall",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid1D {
    pub points: usize,
    pub dx: f64,
    pub origin: f64,
    pub boundary: Boundary,
}

impl Grid1D {
    pub fn new(points: usize, dx: f64, origin: f64, boundary: Boundary) -> Result<Self> {
        if points < 8 || !(dx > 0.0) {
            return Err(Error::Domain(format!("grid needs at least 8 points and dx > 0, got {points}, {dx}")));
        }
        Ok(Grid1D { points, dx, origin, boundary })
    }

    /// `points` nodes spanning `[lo, hi)` (periodic) or strictly inside `(lo, hi)` (hard wall).
    pub fn spanning(lo: f64, hi: f64, points: usize, boundary: Boundary) -> Result<Self> {
        match boundary {
            Boundary::Periodic => Self::new(points, (hi - lo) / points as f64, lo, boundary),
            Boundary::HardWall => {
                let dx = (hi - lo) / (points + 1) as f64;
                Self::new(points, dx, lo + dx, boundary)
            }
        }
    }

    pub fn position(&self, i: usize) -> f64 {
        self.origin + i as f64 * self.dx
    }

    pub fn positions(&self) -> Vec<f64> {
        (0..self.points).map(|i| self.position(i)).collect()
    }

    pub fn meta(&self) -> GridMeta {
        GridMeta::new(self.dx, self.origin, self.points)
    }

    /// Sample `f` at the nodes and normalize to unit discrete norm.
    pub fn sample(&self, f: impl Fn(f64) -> Complex) -> Result<Vec<Complex>> {
        let mut v: Vec<Complex> = self.positions().into_iter().map(f).collect();
        let n = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if n == 0.0 {
            return Err(Error::AllAnnihilated);
        }
        v.iter_mut().for_each(|a| *a /= n);
        Ok(v)
    }

    pub fn to_state(&self, amps: &[Complex], grain: GrainPolicy) -> Result<GrainedWaveFunction> {
        if amps.len() != self.points {
            return Err(Error::DimensionMismatch(format!("{} amplitudes on a {}-point grid", amps.len(), self.points)));
        }
        Ok(GrainedWaveFunction::from_dense(amps, grain)?.with_grid(self.meta()))
    }

    pub fn from_state(&self, psi: &GrainedWaveFunction) -> Result<Vec<Complex>> {
        if psi.labels().any(|l| l as usize >= self.points) {
            return Err(Error::DimensionMismatch(format!("state labels exceed the {}-point grid", self.points)));
        }
        Ok(psi.to_dense(self.points))
    }
}

/// Potential energy at each grid node.
#[derive(Clone, Debug, PartialEq)]
pub struct Potential {
    pub values: Vec<f64>,
}

impl Potential {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("potential values must be finite".into()));
        }
        Ok(Potential { values })
    }

    pub fn zero(grid: &Grid1D) -> Self {
        Potential { values: vec![0.0; grid.points] }
    }

    pub fn from_fn(grid: &Grid1D, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid.positions().into_iter().map(f).collect())
    }

    pub fn harmonic(grid: &Grid1D, mass: f64, omega: f64, center: f64) -> Self {
        Potential { values: grid.positions().into_iter().map(|x| 0.5 * mass * omega * omega * (x - center).powi(2)).collect() }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}
