use nalgebra::DMatrix;

use crate::{Complex, Error, Result};

/// Largest boson count accepted by the permanent.
pub const MAX_BOSONS: usize = 10;
/// Largest fermion count accepted by the determinant.
pub const MAX_FERMIONS: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Statistics {
    Fermion,
    Boson,
}

/// Square matrix `m[s][t] = orbital_s(r_t)`.
fn orbital_matrix(orbitals: &[Vec<Complex>], config: &[usize]) -> Result<DMatrix<Complex>> {
    let k = orbitals.len();
    if config.len() != k {
        return Err(Error::DimensionMismatch(format!("{k} orbitals but {} coordinates", config.len())));
    }
    let mut m = DMatrix::zeros(k, k);
    for (s, orb) in orbitals.iter().enumerate() {
        for (t, &r) in config.iter().enumerate() {
            m[(s, t)] = *orb.get(r).ok_or_else(|| Error::Domain(format!("coordinate {r} outside orbital table")))?;
        }
    }
    Ok(m)
}

/// Permanent by Ryser's formula with Gray-code subset updates.
pub fn permanent(m: &DMatrix<Complex>) -> Complex {
    let n = m.nrows();
    if n == 0 {
        return Complex::new(1.0, 0.0);
    }
    let mut row_sums = vec![Complex::new(0.0, 0.0); n];
    let mut total = Complex::new(0.0, 0.0);
    let mut gray = 0usize;
    for i in 1..(1usize << n) {
        let next = i ^ (i >> 1);
        let col = (gray ^ next).trailing_zeros() as usize;
        let add = next & (1 << col) != 0;
        for (r, s) in row_sums.iter_mut().enumerate() {
            if add {
                *s += m[(r, col)];
            } else {
                *s -= m[(r, col)];
            }
        }
        gray = next;
        let prod: Complex = row_sums.iter().product();
        if (n - next.count_ones() as usize).is_multiple_of(2) {
            total += prod;
        } else {
            total -= prod;
        }
    }
    total
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// `(1/√k!)` times the determinant (fermions) or permanent (bosons) of `[orbital_s(r_t)]`.
pub fn symmetrized_amplitude(orbitals: &[Vec<Complex>], config: &[usize], stats: Statistics) -> Result<Complex> {
    let k = orbitals.len();
    let cap = match stats {
        Statistics::Fermion => MAX_FERMIONS,
        Statistics::Boson => MAX_BOSONS,
    };
    if k > cap {
        return Err(Error::SizeCap { size: k, cap });
    }
    let m = orbital_matrix(orbitals, config)?;
    if stats == Statistics::Fermion && (1..config.len()).any(|i| config[..i].contains(&config[i])) {
        return Ok(Complex::new(0.0, 0.0));
    }
    let v = match stats {
        Statistics::Fermion => m.determinant(),
        Statistics::Boson => permanent(&m),
    };
    Ok(v / factorial(k).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    fn permutations(n: usize) -> Vec<(Vec<usize>, f64)> {
        if n == 0 {
            return vec![(vec![], 1.0)];
        }
        let mut out = Vec::new();
        for (p, sign) in permutations(n - 1) {
            for pos in 0..n {
                let mut q = p.clone();
                q.insert(pos, n - 1);
                let flips = (n - 1 - pos) as i32;
                out.push((q, sign * (-1f64).powi(flips)));
            }
        }
        out
    }

    fn brute(orbitals: &[Vec<Complex>], config: &[usize], stats: Statistics) -> Complex {
        let k = orbitals.len();
        let sum: Complex = permutations(k)
            .into_iter()
            .map(|(p, sign)| {
                let prod: Complex = (0..k).map(|s| orbitals[s][config[p[s]]]).product();
                match stats {
                    Statistics::Fermion => prod * sign,
                    Statistics::Boson => prod,
                }
            })
            .sum();
        sum / factorial(k).sqrt()
    }

    fn random_orbitals(k: usize, n: usize, seed: u64) -> Vec<Vec<Complex>> {
        let mut rng = crate::rng::stream(seed, 0, 0);
        let mut u = || crate::rng::unit(&mut rng) - 0.5;
        (0..k).map(|_| (0..n).map(|_| c(u(), u())).collect()).collect()
    }

    #[test]
    fn repeated_fermion_coordinate_vanishes() {
        let orb = random_orbitals(2, 4, 1);
        assert_eq!(symmetrized_amplitude(&orb, &[2, 2], Statistics::Fermion).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn single_particle_is_the_orbital() {
        let orb = vec![vec![c(0.6, 0.0), c(0.0, 0.8)]];
        for s in [Statistics::Fermion, Statistics::Boson] {
            assert_eq!(symmetrized_amplitude(&orb, &[1], s).unwrap(), c(0.0, 0.8));
        }
    }

    #[test]
    fn three_fermions_match_permutation_sum() {
        let orb = random_orbitals(3, 5, 7);
        let cfg = [4, 0, 2];
        let a = symmetrized_amplitude(&orb, &cfg, Statistics::Fermion).unwrap();
        assert!((a - brute(&orb, &cfg, Statistics::Fermion)).norm() < 1e-12);
    }

    #[test]
    fn ryser_matches_permutation_sum() {
        for k in 1..=5 {
            let orb = random_orbitals(k, 6, k as u64);
            let cfg: Vec<usize> = (0..k).map(|t| (t * 5 + 1) % 6).collect();
            let a = symmetrized_amplitude(&orb, &cfg, Statistics::Boson).unwrap();
            assert!((a - brute(&orb, &cfg, Statistics::Boson)).norm() < 1e-12, "k={k}");
        }
    }

    #[test]
    fn boson_cap() {
        let orb = random_orbitals(11, 2, 3);
        let cfg = vec![0; 11];
        assert!(matches!(symmetrized_amplitude(&orb, &cfg, Statistics::Boson), Err(Error::SizeCap { size: 11, cap: 10 })));
    }

    #[test]
    fn exchange_symmetry_exhaustive() {
        for k in 2..=4 {
            let orb = random_orbitals(k, 5, 10 + k as u64);
            let cfg: Vec<usize> = (0..k).collect();
            let f0 = symmetrized_amplitude(&orb, &cfg, Statistics::Fermion).unwrap();
            let b0 = symmetrized_amplitude(&orb, &cfg, Statistics::Boson).unwrap();
            for (p, sign) in permutations(k) {
                let q: Vec<usize> = p.iter().map(|&i| cfg[i]).collect();
                let f = symmetrized_amplitude(&orb, &q, Statistics::Fermion).unwrap();
                let b = symmetrized_amplitude(&orb, &q, Statistics::Boson).unwrap();
                assert!((f - f0 * sign).norm() < 1e-12);
                assert!((b - b0).norm() < 1e-12);
            }
        }
    }
}
