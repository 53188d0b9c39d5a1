/// Physical constants of a run. The default is the dimensionless system ħ = m = c = 1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Units {
    pub hbar: f64,
    pub mass: f64,
    /// Upper bound on quantum speeds.
    pub light_speed: f64,
}

impl Default for Units {
    fn default() -> Self {
        Units { hbar: 1.0, mass: 1.0, light_speed: 1.0 }
    }
}

impl Units {
    pub fn new(hbar: f64, mass: f64) -> Self {
        Units { hbar, mass, ..Self::default() }
    }

    /// Wavenumber carried by velocity `v`.
    pub fn wavenumber(&self, v: f64) -> f64 {
        self.mass * v / self.hbar
    }
}

impl Units {
    pub fn with_light_speed(mut self, c: f64) -> Self {
        self.light_speed = c;
        self
    }

    pub fn validate(&self) -> crate::Result<()> {
        if self.hbar > 0.0 && self.mass > 0.0 && self.light_speed > 0.0 {
            Ok(())
        } else {
            Err(crate::Error::Domain(format!("units must be positive: {self:?}")))
        }
    }
}
