use crate::{Complex, Error, Result, Units};

use super::{apply_hamiltonian, Grid1D, Potential};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VariationalOptions {
    /// Stop once ‖Hψ − Eψ‖ falls below this.
    pub gradient_tol: f64,
    pub max_iterations: usize,
}

impl Default for VariationalOptions {
    fn default() -> Self {
        VariationalOptions { gradient_tol: 1e-8, max_iterations: 500_000 }
    }
}

#[derive(Clone, Debug)]
pub struct VariationalResult {
    pub psi: Vec<Complex>,
    pub energy: f64,
    /// Energy after every accepted step, starting with the initial energy.
    pub history: Vec<f64>,
    pub gradient_norm: f64,
}

fn dot(a: &[Complex], b: &[Complex]) -> Complex {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn normalize(v: &mut [Complex]) {
    let n = dot(v, v).re.sqrt();
    v.iter_mut().for_each(|a| *a /= n);
}

/// Steepest descent of the Rayleigh quotient on the unit sphere.
///
/// Each step minimizes E exactly over the great circle through ψ along the
/// gradient g = Hψ − Eψ, which is a 2×2 eigenproblem in span{ψ, ĝ}.
fn descend(mut psi: Vec<Complex>, apply: impl Fn(&[Complex]) -> Vec<Complex>, opts: &VariationalOptions) -> Result<VariationalResult> {
    normalize(&mut psi);
    let mut hpsi = apply(&psi);
    let mut energy = dot(&psi, &hpsi).re;
    let mut history = vec![energy];
    for _ in 0..opts.max_iterations {
        let mut d: Vec<Complex> = hpsi.iter().zip(&psi).map(|(h, p)| h - p * energy).collect();
        // Re-project to keep d ⟂ ψ despite rounding.
        let ov = dot(&psi, &d);
        d.iter_mut().zip(&psi).for_each(|(x, p)| *x -= p * ov);
        let gnorm = dot(&d, &d).re.sqrt();
        if gnorm <= opts.gradient_tol {
            return Ok(VariationalResult { psi, energy, history, gradient_norm: gnorm });
        }
        d.iter_mut().for_each(|x| *x /= gnorm);
        let hd = apply(&d);
        let b = dot(&psi, &hd);
        let c = dot(&d, &hd).re;
        // Lowest eigenpair of [[E, b], [b*, c]].
        let half = 0.5 * (energy - c);
        let lam = 0.5 * (energy + c) - (half * half + b.norm_sqr()).sqrt();
        let (mut c1, mut c2) = (b, Complex::new(lam - energy, 0.0));
        let n = (c1.norm_sqr() + c2.norm_sqr()).sqrt();
        c1 /= n;
        c2 /= n;
        if lam >= energy {
            return Ok(VariationalResult { psi, energy, history, gradient_norm: gnorm });
        }
        let mut next: Vec<Complex> = psi.iter().zip(&d).map(|(p, x)| p * c1 + x * c2).collect();
        let mut hnext: Vec<Complex> = hpsi.iter().zip(&hd).map(|(p, x)| p * c1 + x * c2).collect();
        let nn = dot(&next, &next).re.sqrt();
        next.iter_mut().for_each(|a| *a /= nn);
        hnext.iter_mut().for_each(|a| *a /= nn);
        let e = dot(&next, &hnext).re;
        if e > energy {
            // Rounding floor reached.
            return Ok(VariationalResult { psi, energy, history, gradient_norm: gnorm });
        }
        psi = next;
        hpsi = hnext;
        energy = e;
        history.push(energy);
    }
    Err(Error::MaxIterations(opts.max_iterations))
}

/// One-particle ground state by descent from `psi0`.
pub fn minimize_coordinate(
    psi0: &[Complex],
    grid: &Grid1D,
    v: &Potential,
    units: &Units,
    opts: &VariationalOptions,
) -> Result<VariationalResult> {
    if psi0.len() != grid.points {
        return Err(Error::DimensionMismatch(format!("{} amplitudes on a {}-point grid", psi0.len(), grid.points)));
    }
    descend(psi0.to_vec(), |p| apply_hamiltonian(grid, v, units, p), opts)
}

/// Two particles on one grid: h₁ + h₂ + W(x₁, x₂).
#[derive(Clone, Debug)]
pub struct PairHamiltonian {
    pub grid: Grid1D,
    pub v: Potential,
    /// Row-major n×n pair potential.
    pub w: Vec<f64>,
    pub units: Units,
}

impl PairHamiltonian {
    pub fn new(grid: Grid1D, v: Potential, w: Vec<f64>, units: Units) -> Result<Self> {
        if w.len() != grid.points * grid.points || v.values.len() != grid.points {
            return Err(Error::DimensionMismatch("pair potential must be n×n".into()));
        }
        Ok(PairHamiltonian { grid, v, w, units })
    }

    /// Contact interaction g δ(x₁ − x₂), i.e. g/dx on coinciding nodes.
    pub fn contact(grid: Grid1D, v: Potential, g: f64, units: Units) -> Result<Self> {
        let n = grid.points;
        let mut w = vec![0.0; n * n];
        for i in 0..n {
            w[i * n + i] = g / grid.dx;
        }
        Self::new(grid, v, w, units)
    }

    pub fn apply(&self, psi: &[Complex]) -> Vec<Complex> {
        let n = self.grid.points;
        let mut out: Vec<Complex> = psi.iter().zip(&self.w).map(|(p, w)| p * w).collect();
        let mut col = vec![Complex::new(0.0, 0.0); n];
        for i in 0..n {
            let row = apply_hamiltonian(&self.grid, &self.v, &self.units, &psi[i * n..(i + 1) * n]);
            for j in 0..n {
                out[i * n + j] += row[j];
            }
        }
        for j in 0..n {
            for i in 0..n {
                col[i] = psi[i * n + j];
            }
            let hc = apply_hamiltonian(&self.grid, &self.v, &self.units, &col);
            for i in 0..n {
                out[i * n + j] += hc[i];
            }
        }
        out
    }

    /// Dense real matrix for exact diagonalization.
    pub fn matrix(&self) -> nalgebra::DMatrix<f64> {
        let n = self.grid.points;
        let h1 = super::hamiltonian_matrix(&self.grid, &self.v, &self.units);
        let id = nalgebra::DMatrix::<f64>::identity(n, n);
        let mut h = h1.kronecker(&id) + id.kronecker(&h1);
        for k in 0..n * n {
            h[(k, k)] += self.w[k];
        }
        h
    }

    fn product_energy(&self, a: &[Complex], b: &[Complex]) -> f64 {
        let n = self.grid.points;
        let ea = dot(a, &apply_hamiltonian(&self.grid, &self.v, &self.units, a)).re;
        let eb = dot(b, &apply_hamiltonian(&self.grid, &self.v, &self.units, b)).re;
        let mut ew = 0.0;
        for i in 0..n {
            for j in 0..n {
                ew += self.w[i * n + j] * a[i].norm_sqr() * b[j].norm_sqr();
            }
        }
        ea + eb + ew
    }

    /// V plus the mean field of `other` acting on particle 1 (`first`) or 2.
    fn mean_field(&self, other: &[Complex], first: bool) -> Potential {
        let n = self.grid.points;
        let values = (0..n)
            .map(|i| {
                self.v.values[i]
                    + (0..n)
                        .map(|j| other[j].norm_sqr() * if first { self.w[i * n + j] } else { self.w[j * n + i] })
                        .sum::<f64>()
            })
            .collect();
        Potential { values }
    }
}

#[derive(Clone, Debug)]
pub struct PairResult {
    pub phi1: Vec<Complex>,
    pub phi2: Vec<Complex>,
    pub stage1_energy: f64,
    pub psi: Vec<Complex>,
    pub energy: f64,
    /// `(stage, energy)` after every accepted update.
    pub history: Vec<(u8, f64)>,
}

/// Stage 1: alternate one-particle descents in product form. Stage 2: release
/// the product constraint and descend on the full two-particle amplitude.
pub fn minimize_pair(
    phi1: &[Complex],
    phi2: &[Complex],
    h: &PairHamiltonian,
    opts: &VariationalOptions,
) -> Result<PairResult> {
    let n = h.grid.points;
    if phi1.len() != n || phi2.len() != n {
        return Err(Error::DimensionMismatch("product factors must live on the grid".into()));
    }
    let (mut a, mut b) = (phi1.to_vec(), phi2.to_vec());
    normalize(&mut a);
    normalize(&mut b);
    let mut e = h.product_energy(&a, &b);
    let mut history = vec![(1u8, e)];
    let mut converged = false;
    for _ in 0..1000 {
        let ra = minimize_coordinate(&a, &h.grid, &h.mean_field(&b, true), &h.units, opts)?;
        if h.product_energy(&ra.psi, &b) <= e {
            a = ra.psi;
        }
        let rb = minimize_coordinate(&b, &h.grid, &h.mean_field(&a, false), &h.units, opts)?;
        if h.product_energy(&a, &rb.psi) <= h.product_energy(&a, &b) {
            b = rb.psi;
        }
        let next = h.product_energy(&a, &b);
        history.push((1, next));
        let done = e - next <= 1e-13 * next.abs().max(1.0);
        e = next;
        if done {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::MaxIterations(1000));
    }
    let stage1_energy = e;
    let start: Vec<Complex> = (0..n * n).map(|k| a[k / n] * b[k % n]).collect();
    let r = descend(start, |p| h.apply(p), opts)?;
    history.extend(r.history.iter().skip(1).map(|&x| (2u8, x)));
    Ok(PairResult { phi1: a, phi2: b, stage1_energy, psi: r.psi, energy: r.energy, history })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fd::{eigen_dense, eigen_symmetric, Boundary};

    #[test]
    fn single_particle_reaches_dense_ground_energy() {
        let g = Grid1D::spanning(-8.0, 8.0, 200, Boundary::HardWall).unwrap();
        let v = Potential::harmonic(&g, 1.0, 1.0, 0.0);
        let u = Units::default();
        let e0 = eigen_dense(&g, &v, &u, 1).unwrap()[0].energy;
        let psi0 = g.sample(|x| Complex::new((-(x - 1.0).powi(2) / 3.0).exp(), 0.0)).unwrap();
        let r = minimize_coordinate(&psi0, &g, &v, &u, &VariationalOptions::default()).unwrap();
        assert!((r.energy - e0).abs() / e0 < 1e-6);
        assert!(r.history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn iteration_cap_reported() {
        let g = Grid1D::spanning(-8.0, 8.0, 64, Boundary::HardWall).unwrap();
        let v = Potential::harmonic(&g, 1.0, 1.0, 0.0);
        let psi0 = g.sample(|x| Complex::new((-x * x).exp() * (1.0 + x), 0.0)).unwrap();
        let opts = VariationalOptions { max_iterations: 3, ..Default::default() };
        assert!(matches!(minimize_coordinate(&psi0, &g, &v, &Units::default(), &opts), Err(Error::MaxIterations(3))));
    }

    fn trial(g: &Grid1D, c: f64) -> Vec<Complex> {
        g.sample(|x| Complex::new((-(x - c).powi(2)).exp(), 0.0)).unwrap()
    }

    #[test]
    fn separable_pair_needs_no_second_stage() {
        let g = Grid1D::spanning(-4.0, 4.0, 16, Boundary::HardWall).unwrap();
        let h = PairHamiltonian::contact(g, Potential::harmonic(&g, 1.0, 1.0, 0.0), 0.0, Units::default()).unwrap();
        let r = minimize_pair(&trial(&g, 0.5), &trial(&g, -0.3), &h, &VariationalOptions::default()).unwrap();
        assert!(r.stage1_energy - r.energy < 1e-8);
    }

    #[test]
    fn contact_pair_matches_dense_two_body() {
        let g = Grid1D::spanning(-4.0, 4.0, 16, Boundary::HardWall).unwrap();
        let h = PairHamiltonian::contact(g, Potential::harmonic(&g, 1.0, 1.0, 0.0), 2.0, Units::default()).unwrap();
        let exact = eigen_symmetric(&h.matrix(), 1).unwrap()[0].energy;
        let r = minimize_pair(&trial(&g, 0.5), &trial(&g, -0.3), &h, &VariationalOptions::default()).unwrap();
        assert!(r.energy <= r.stage1_energy);
        assert!(r.stage1_energy - exact > 1e-4, "contact repulsion should entangle");
        assert!((r.energy - exact).abs() < 1e-5);
        assert!(r.history.windows(2).all(|w| w[1].1 <= w[0].1 + 1e-12 * w[0].1.abs()));
    }

    #[test]
    fn apply_matches_dense_matrix() {
        let g = Grid1D::spanning(-2.0, 2.0, 8, Boundary::Periodic).unwrap();
        let h = PairHamiltonian::contact(g, Potential::from_fn(&g, |x| x.sin()).unwrap(), 1.5, Units::default()).unwrap();
        let psi: Vec<Complex> = (0..64).map(|k| Complex::new((k as f64).sin(), (k as f64 * 0.3).cos())).collect();
        let m = h.matrix();
        let out = h.apply(&psi);
        for r in 0..64 {
            let want: Complex = (0..64).map(|c| psi[c] * m[(r, c)]).sum();
            assert!((out[r] - want).norm() < 1e-10);
        }
    }
}
