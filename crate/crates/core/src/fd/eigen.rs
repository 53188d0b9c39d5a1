use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::{Error, Result, Units};

use super::{Boundary, Grid1D, Potential};

const MAX_DENSE: usize = 4096;
const RESIDUAL_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct Eigenpair {
    pub energy: f64,
    /// Unit discrete norm; sign fixed so the largest-modulus component is positive.
    pub state: Vec<f64>,
}

pub fn hamiltonian_matrix(grid: &Grid1D, v: &Potential, units: &Units) -> DMatrix<f64> {
    let n = grid.points;
    let kappa = units.hbar * units.hbar / (2.0 * units.mass * grid.dx * grid.dx);
    let mut h = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        h[(i, i)] = 2.0 * kappa + v.values[i];
        if i + 1 < n {
            h[(i, i + 1)] = -kappa;
            h[(i + 1, i)] = -kappa;
        }
    }
    if grid.boundary == Boundary::Periodic {
        h[(0, n - 1)] -= kappa;
        h[(n - 1, 0)] -= kappa;
    }
    h
}

/// The `k` lowest eigenpairs of a real symmetric matrix, ascending.
pub fn eigen_symmetric(h: &DMatrix<f64>, k: usize) -> Result<Vec<Eigenpair>> {
    let n = h.nrows();
    if n > MAX_DENSE {
        return Err(Error::SizeCap { size: n, cap: MAX_DENSE });
    }
    if k == 0 || k > n {
        return Err(Error::Domain(format!("requested {k} eigenpairs of a {n}x{n} matrix")));
    }
    let eig = SymmetricEigen::new(h.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let scale = h.amax().max(1.0);
    order
        .into_iter()
        .take(k)
        .map(|j| {
            let e = eig.eigenvalues[j];
            let mut v: DVector<f64> = eig.eigenvectors.column(j).into_owned();
            v /= v.norm();
            let imax = v.iamax();
            if v[imax] < 0.0 {
                v = -v;
            }
            let res = (h * &v - &v * e).norm();
            if res > RESIDUAL_TOL * scale {
                return Err(Error::Convergence(format!("eigenpair {j} residual {res:e}")));
            }
            Ok(Eigenpair { energy: e, state: v.iter().copied().collect() })
        })
        .collect()
}

pub fn eigen_dense(grid: &Grid1D, v: &Potential, units: &Units, k: usize) -> Result<Vec<Eigenpair>> {
    if grid.points > MAX_DENSE {
        return Err(Error::SizeCap { size: grid.points, cap: MAX_DENSE });
    }
    eigen_symmetric(&hamiltonian_matrix(grid, v, units), k)
}

/// `index,energy` rows under a header.
pub fn eigen_csv(pairs: &[Eigenpair]) -> String {
    let mut s = String::from("index,energy\n");
    for (i, p) in pairs.iter().enumerate() {
        s.push_str(&format!("{i},{}\n", p.energy));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn harmonic_ground_energy() {
        let g = Grid1D::spanning(-10.0, 10.0, 800, Boundary::HardWall).unwrap();
        let e = eigen_dense(&g, &Potential::harmonic(&g, 1.0, 1.0, 0.0), &Units::default(), 3).unwrap();
        assert!((e[0].energy - 0.5).abs() < 1e-3);
        assert!((e[1].energy - 1.5).abs() < 1e-3);
    }

    #[test]
    fn box_levels_scale_quadratically() {
        let g = Grid1D::spanning(0.0, 1.0, 400, Boundary::HardWall).unwrap();
        let e = eigen_dense(&g, &Potential::zero(&g), &Units::default(), 4).unwrap();
        for (n, p) in e.iter().enumerate() {
            let exact = (PI * (n + 1) as f64).powi(2) / 2.0;
            assert!((p.energy - exact).abs() / exact < 1e-4, "level {n}: {} vs {exact}", p.energy);
        }
    }

    #[test]
    fn ground_state_is_nodeless_and_orthonormal() {
        let g = Grid1D::spanning(-5.0, 5.0, 101, Boundary::HardWall).unwrap();
        let v = Potential::from_fn(&g, |x| x.powi(4) - 2.0 * x * x).unwrap();
        let e = eigen_dense(&g, &v, &Units::default(), 2).unwrap();
        assert!(e[0].state.iter().all(|&x| x > -1e-12));
        let dot: f64 = e[0].state.iter().zip(&e[1].state).map(|(a, b)| a * b).sum();
        assert!(dot.abs() < 1e-10);
    }

    #[test]
    fn spectrum_invariant_under_translation() {
        let g = Grid1D::new(64, 0.2, -6.4, Boundary::Periodic).unwrap();
        let v1 = Potential::from_fn(&g, |x| (x * 0.7).cos() * 2.0).unwrap();
        let mut shifted = v1.values.clone();
        shifted.rotate_left(7);
        let v2 = Potential::new(shifted).unwrap();
        let a = eigen_dense(&g, &v1, &Units::default(), 10).unwrap();
        let b = eigen_dense(&g, &v2, &Units::default(), 10).unwrap();
        assert!(a.iter().zip(&b).all(|(x, y)| (x.energy - y.energy).abs() < 1e-10));
    }

    #[test]
    fn csv_rows() {
        let p = vec![Eigenpair { energy: 0.5, state: vec![] }];
        assert_eq!(eigen_csv(&p), "index,energy\n0,0.5\n");
    }
}
