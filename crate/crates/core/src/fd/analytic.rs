use std::f64::consts::PI;

use crate::{Complex, Error, Result, Units};

/// Closed-form reference values.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AnalyticOracle {
    /// Free propagator K(x₂, t₂; x₁, t₁).
    FreeKernel { x1: f64, t1: f64, x2: f64, t2: f64 },
    /// width²(t)/width²(0) for a resting Gaussian ψ ∝ e^{−αx²/2}.
    WidthFactor { alpha: f64, t: f64 },
    /// Probability density of that Gaussian at time t.
    SpreadingDensity { alpha: f64, x: f64, t: f64 },
    /// Diffusion kernel with variance C t about x₀.
    HeatKernel { c: f64, x0: f64, x: f64, t: f64 },
}

impl AnalyticOracle {
    pub fn evaluate(&self, units: &Units) -> Result<Complex> {
        let (hbar, m) = (units.hbar, units.mass);
        match *self {
            AnalyticOracle::FreeKernel { x1, t1, x2, t2 } => {
                let dt = t2 - t1;
                if !(dt > 0.0) {
                    return Err(Error::Domain(format!("kernel needs t2 > t1, got {t1}, {t2}")));
                }
                let pre = Complex::new(0.0, 2.0 * PI * hbar * dt / m).sqrt().inv();
                Ok(pre * Complex::from_polar(1.0, m * (x2 - x1).powi(2) / (2.0 * hbar * dt)))
            }
            AnalyticOracle::WidthFactor { alpha, t } => Ok(Complex::new(width_factor(alpha, t, units), 0.0)),
            AnalyticOracle::SpreadingDensity { alpha, x, t } => {
                if !(alpha > 0.0) {
                    return Err(Error::Domain("alpha must be positive".into()));
                }
                Ok(Complex::new(spreading_density(alpha, x, t, units), 0.0))
            }
            AnalyticOracle::HeatKernel { c, x0, x, t } => {
                if !(t > 0.0 && c > 0.0) {
                    return Err(Error::Domain(format!("heat kernel needs t > 0 and C > 0, got {t}, {c}")));
                }
                Ok(Complex::new(heat_kernel(c, x0, x, t), 0.0))
            }
        }
    }
}

/// 1 + α²ħ²t²/m².
pub fn width_factor(alpha: f64, t: f64, units: &Units) -> f64 {
    1.0 + (alpha * units.hbar * t / units.mass).powi(2)
}

/// √(α/(π f)) exp(−αx²/f), f the width factor.
pub fn spreading_density(alpha: f64, x: f64, t: f64, units: &Units) -> f64 {
    let f = width_factor(alpha, t, units);
    (alpha / (PI * f)).sqrt() * (-alpha * x * x / f).exp()
}

/// (2πCt)^{−1/2} exp(−(x−x₀)²/(2Ct)).
pub fn heat_kernel(c: f64, x0: f64, x: f64, t: f64) -> f64 {
    (2.0 * PI * c * t).powf(-0.5) * (-(x - x0).powi(2) / (2.0 * c * t)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_modulus_is_position_independent() {
        let u = Units::default();
        let want = (2.0 * PI * 0.7).powf(-0.5);
        for x in [-3.0, 0.0, 1.5] {
            let k = AnalyticOracle::FreeKernel { x1: 0.2, t1: 0.3, x2: x, t2: 1.0 }.evaluate(&u).unwrap();
            assert!((k.norm() - want).abs() < 1e-12);
        }
        assert!(AnalyticOracle::FreeKernel { x1: 0.0, t1: 1.0, x2: 0.0, t2: 1.0 }.evaluate(&u).is_err());
    }

    #[test]
    fn kernel_solves_free_equation() {
        // i ∂K/∂t = −½ ∂²K/∂x² by central differences.
        let u = Units::default();
        let k = |x: f64, t: f64| AnalyticOracle::FreeKernel { x1: 0.0, t1: 0.0, x2: x, t2: t }.evaluate(&u).unwrap();
        let (x, t, h) = (0.4, 0.9, 1e-4);
        let dt = (k(x, t + h) - k(x, t - h)) / (2.0 * h);
        let dxx = (k(x + h, t) - k(x, t) * 2.0 + k(x - h, t)) / (h * h);
        assert!((Complex::i() * dt + dxx * 0.5).norm() < 1e-4);
    }

    #[test]
    fn width_law() {
        let u = Units::default();
        assert_eq!(width_factor(1.0, 0.0, &u), 1.0);
        assert_eq!(width_factor(1.0, 1.0, &u), 2.0);
    }

    #[test]
    fn densities_normalized() {
        let u = Units::default();
        let dx = 1e-3;
        let s1: f64 = (-10_000..10_000).map(|i| spreading_density(1.3, i as f64 * dx, 0.8, &u) * dx).sum();
        let s2: f64 = (-10_000..10_000).map(|i| heat_kernel(0.5, 0.3, i as f64 * dx, 1.1) * dx).sum();
        assert!((s1 - 1.0).abs() < 1e-9);
        assert!((s2 - 1.0).abs() < 1e-9);
        assert!(AnalyticOracle::HeatKernel { c: 1.0, x0: 0.0, x: 0.0, t: 0.0 }.evaluate(&u).is_err());
    }
}
