use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector, Matrix2, SymmetricEigen};

use super::hamiltonian::{build_hamiltonian, hamiltonian_dense, LadderHamiltonian, OrbitalSet, TwoBody, MAX_ORACLE};
use super::occupation::{ladder_chain, FockBasis, Ladder, Occupation};
use crate::fd::Potential;
use crate::hierarchy::{EnergyDefectLog, Statistics};
use crate::{Complex, Error, Result, Units};

#[derive(Clone, Debug, PartialEq)]
pub struct MinimizeOptions {
    /// Stage 1 stops when the projected orbital gradient norm falls below this.
    pub orbital_tol: f64,
    pub orbital_iterations: usize,
    /// Stage 2 stops when the best line minimization in a sweep gains less than this.
    pub direction_tol: f64,
    pub sweeps: usize,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        MinimizeOptions { orbital_tol: 1e-9, orbital_iterations: 20_000, direction_tol: 1e-10, sweeps: 500 }
    }
}

#[derive(Clone, Debug)]
pub struct Minimized {
    pub orbitals: OrbitalSet,
    pub hamiltonian: LadderHamiltonian,
    pub basis: FockBasis,
    pub state: Vec<Complex>,
    pub energy: f64,
    pub start_energy: f64,
    pub stage1_energy: f64,
    /// `(stage, iteration, energy)` for every accepted step.
    pub trace: Vec<(u8, usize, f64)>,
    pub log: EnergyDefectLog,
}

impl Minimized {
    /// `stage,iteration,energy,defect` rows; the defect is the drop below the stage-1 energy.
    pub fn energies_csv(&self) -> String {
        let mut s = String::from("stage,iteration,energy,defect\n");
        for &(stage, it, e) in &self.trace {
            let d = if stage == 2 { self.stage1_energy - e } else { 0.0 };
            let _ = writeln!(s, "{stage},{it},{e:.12e},{d:.12e}");
        }
        s
    }
}

/// Two-stage minimization starting from the occupation `start`.
///
/// Stage 1 varies the occupied orbitals under the fixed configuration by
/// projected gradient descent with re-orthonormalization. Stage 2 freezes the
/// orbitals and minimizes exactly along `|ψ⟩ + λ|n̄′⟩` for every
/// `n̄′ = c_k† c_l† c_m c_n n̄`, taking source states `n̄` in decreasing amplitude
/// modulus and directions in lexicographic `(k, l, m, n)` order.
pub fn minimize_energy(
    start: &[u8],
    orbitals: OrbitalSet,
    v1: &Potential,
    v2: &TwoBody,
    units: &Units,
    opts: &MinimizeOptions,
) -> Result<Minimized> {
    let levels = orbitals.levels();
    if start.len() != levels || start.iter().any(|&n| n > 1) {
        return Err(Error::Domain(format!("start {start:?} is not a fermion configuration on {levels} levels")));
    }
    let particles = start.iter().map(|&n| n as usize).sum();
    let basis = FockBasis::new(levels, particles, Statistics::Fermion, MAX_ORACLE)?;
    let s0 = basis.index_of(start).ok_or_else(|| Error::Domain("start configuration outside its own basis".into()))?;

    let mut trace = Vec::new();
    let mut log = EnergyDefectLog::new();
    let (orbitals, stage1) = optimize_orbitals(start, orbitals, v1, v2, units, opts, &mut trace)?;
    let start_energy = stage1[0];
    let stage1_energy = *stage1.last().unwrap_or(&start_energy);
    log.record(0, stage1)?;

    let hamiltonian = build_hamiltonian(&orbitals, v1, v2, units)?;
    let m = hamiltonian_dense(&hamiltonian, &basis)?;
    let mut psi = DVector::<Complex>::zeros(basis.len());
    psi[s0] = Complex::new(1.0, 0.0);
    let mut hpsi = m.column(s0).into_owned();
    let mut energy = psi.dotc(&hpsi).re;
    let mut iteration = 0;
    let mut converged = false;
    for sweep in 1..=opts.sweeps {
        let mut order: Vec<usize> = (0..basis.len()).filter(|&i| psi[i].norm() > 0.0).collect();
        order.sort_by(|&a, &b| psi[b].norm().total_cmp(&psi[a].norm()).then(a.cmp(&b)));
        let mut best_gain: f64 = 0.0;
        let mut sweep_energies = Vec::new();
        for src in order {
            for target in directions(&basis, src) {
                let Some((new_psi, new_hpsi, e)) = line_minimize(&m, &psi, &hpsi, target) else { continue };
                let gain = energy - e;
                if gain > 0.0 {
                    psi = new_psi;
                    hpsi = new_hpsi;
                    energy = e;
                    best_gain = best_gain.max(gain);
                    iteration += 1;
                    trace.push((2, iteration, energy));
                    sweep_energies.push(energy);
                }
            }
        }
        if !sweep_energies.is_empty() {
            log.record(sweep, sweep_energies)?;
        }
        if best_gain < opts.direction_tol {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::MaxIterations(opts.sweeps));
    }
    Ok(Minimized {
        orbitals,
        hamiltonian,
        state: psi.iter().copied().collect(),
        basis,
        energy,
        start_energy,
        stage1_energy,
        trace,
        log,
    })
}

/// Distinct targets `c_k† c_l† c_m c_n |src⟩ ≠ |src⟩`, first appearance in lexicographic order.
fn directions(basis: &FockBasis, src: usize) -> Vec<usize> {
    let l = basis.levels;
    let occ = &basis.states[src];
    let mut seen = vec![false; basis.len()];
    seen[src] = true;
    let mut out = Vec::new();
    for k in 0..l {
        for ll in 0..l {
            for m in 0..l {
                for n in 0..l {
                    let ops = [(Ladder::Create, k), (Ladder::Create, ll), (Ladder::Annihilate, m), (Ladder::Annihilate, n)];
                    if let Some((_, t)) = ladder_chain(&ops, occ, basis.statistics) {
                        if let Some(i) = basis.index_of(&t) {
                            if !seen[i] {
                                seen[i] = true;
                                out.push(i);
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

/// Exact minimum of the Rayleigh quotient on `span{ψ, e_target}`.
fn line_minimize(
    m: &DMatrix<Complex>,
    psi: &DVector<Complex>,
    hpsi: &DVector<Complex>,
    target: usize,
) -> Option<(DVector<Complex>, DVector<Complex>, f64)> {
    let mut d = -psi * psi[target].conj();
    d[target] += Complex::new(1.0, 0.0);
    let dn = d.norm();
    if dn < 1e-12 {
        return None;
    }
    d /= Complex::new(dn, 0.0);
    let mut hd = m.column(target).into_owned();
    hd -= hpsi * psi[target].conj();
    hd /= Complex::new(dn, 0.0);
    let a = psi.dotc(hpsi).re;
    let b = psi.dotc(&hd);
    let c = d.dotc(&hd).re;
    let h2 = Matrix2::new(Complex::new(a, 0.0), b, b.conj(), Complex::new(c, 0.0));
    let eig = SymmetricEigen::new(h2);
    let j = if eig.eigenvalues[0] <= eig.eigenvalues[1] { 0 } else { 1 };
    let (x, y) = (eig.eigenvectors[(0, j)], eig.eigenvectors[(1, j)]);
    let norm = (x.norm_sqr() + y.norm_sqr()).sqrt();
    let (x, y) = (x / norm, y / norm);
    let new_psi = psi * x + &d * y;
    let new_hpsi = hpsi * x + &hd * y;
    let e = new_psi.dotc(&new_hpsi).re / new_psi.norm_squared();
    Some((new_psi, new_hpsi, e))
}

/// Largest energy gain available along any single basis direction from `state`.
pub fn best_direction_gain(h: &LadderHamiltonian, basis: &FockBasis, state: &[Complex]) -> Result<f64> {
    let m = hamiltonian_dense(h, basis)?;
    let mut psi = DVector::from_column_slice(state);
    psi /= Complex::new(psi.norm(), 0.0);
    let hpsi = &m * &psi;
    let e = psi.dotc(&hpsi).re;
    let mut best: f64 = 0.0;
    for t in 0..basis.len() {
        if let Some((_, _, et)) = line_minimize(&m, &psi, &hpsi, t) {
            best = best.max(e - et);
        }
    }
    Ok(best)
}

/// Energy of the single configuration `occ` under `h`.
pub fn configuration_energy(h: &LadderHamiltonian, occ: &Occupation) -> Result<f64> {
    let particles = occ.iter().map(|&n| n as usize).sum();
    let basis = FockBasis::new(h.levels, particles, Statistics::Fermion, MAX_ORACLE)?;
    let i = basis.index_of(occ).ok_or_else(|| Error::Domain(format!("{occ:?} is not a fermion configuration")))?;
    let mut e = vec![Complex::new(0.0, 0.0); basis.len()];
    e[i] = Complex::new(1.0, 0.0);
    Ok(super::hamiltonian::apply_hamiltonian(h, &basis, &e)?[i].re)
}

fn optimize_orbitals(
    start: &[u8],
    mut orbitals: OrbitalSet,
    v1: &Potential,
    v2: &TwoBody,
    units: &Units,
    opts: &MinimizeOptions,
    trace: &mut Vec<(u8, usize, f64)>,
) -> Result<(OrbitalSet, Vec<f64>)> {
    let occupied: Vec<usize> = (0..start.len()).filter(|&k| start[k] == 1).collect();
    let occ = start.to_vec();
    let grid = orbitals.grid;
    let h1 = crate::fd::hamiltonian_matrix(&grid, v1, units).map(|x| Complex::new(x, 0.0));
    let energy_of = |o: &OrbitalSet| -> Result<f64> { configuration_energy(&build_hamiltonian(o, v1, v2, units)?, &occ) };
    let mut energy = energy_of(&orbitals)?;
    let mut energies = vec![energy];
    trace.push((1, 0, energy));
    let mut eta = 0.5 / h1.iter().map(|a| a.norm()).fold(1e-300, f64::max);
    let mut it = 0;
    while it < opts.orbital_iterations {
        let grads = orbital_gradients(&orbitals, &occupied, &h1, v2);
        let gnorm: f64 = grads.iter().map(|g| g.norm_squared()).sum::<f64>().sqrt();
        if gnorm < opts.orbital_tol {
            return Ok((orbitals, energies));
        }
        let mut accepted = false;
        for _ in 0..40 {
            let mut trial = orbitals.clone();
            for (g, &k) in grads.iter().zip(&occupied) {
                for (x, gx) in trial.orbitals[k].iter_mut().zip(g.iter()) {
                    *x -= gx * eta;
                }
            }
            orthonormalize(&mut trial, &occupied);
            let e = energy_of(&trial)?;
            if e < energy {
                orbitals = trial;
                energy = e;
                it += 1;
                energies.push(e);
                trace.push((1, it, e));
                eta *= 1.5;
                accepted = true;
                break;
            }
            eta *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if it >= opts.orbital_iterations {
        return Err(Error::MaxIterations(opts.orbital_iterations));
    }
    Ok((orbitals, energies))
}

/// Projected gradient `F_k ψ_k` for each occupied level, with
/// `F_k = h + Σ_{l occupied, l≠k} (J_l − δ_spin K_l)` and the occupied
/// same-spin subspace projected out.
fn orbital_gradients(o: &OrbitalSet, occupied: &[usize], h1: &DMatrix<Complex>, v2: &TwoBody) -> Vec<DVector<Complex>> {
    let n = o.grid.points;
    let dx = o.grid.dx;
    let psi: Vec<DVector<Complex>> = o.orbitals.iter().map(|v| DVector::from_column_slice(v)).collect();
    let w = |i: usize, j: usize| -> f64 {
        match v2 {
            TwoBody::None => 0.0,
            TwoBody::Contact(g) => {
                if i == j {
                    g / dx
                } else {
                    0.0
                }
            }
            TwoBody::Kernel(m) => m[(i, j)],
        }
    };
    let mut out = Vec::with_capacity(occupied.len());
    for &k in occupied {
        let mut f = h1 * &psi[k];
        if !v2.is_none() {
            for &l in occupied {
                if l == k {
                    continue;
                }
                let same = o.spins[l] == o.spins[k];
                for i in 0..n {
                    let (mut hartree, mut exchange) = (Complex::new(0.0, 0.0), Complex::new(0.0, 0.0));
                    let js: Box<dyn Iterator<Item = usize>> = match v2 {
                        TwoBody::Contact(_) => Box::new(std::iter::once(i)),
                        _ => Box::new(0..n),
                    };
                    for j in js {
                        let wij = w(i, j);
                        hartree += psi[l][j].norm_sqr() * wij;
                        if same {
                            exchange += psi[l][j].conj() * psi[k][j] * wij;
                        }
                    }
                    f[i] += hartree * psi[k][i] - exchange * psi[l][i];
                }
            }
        }
        for &l in occupied {
            if o.spins[l] == o.spins[k] {
                let c = psi[l].dotc(&f);
                f -= &psi[l] * c;
            }
        }
        out.push(f);
    }
    out
}

/// Gram–Schmidt: occupied levels among themselves in order, then the rest
/// against everything before them, within each spin.
fn orthonormalize(o: &mut OrbitalSet, occupied: &[usize]) {
    let mut order: Vec<usize> = occupied.to_vec();
    order.extend((0..o.levels()).filter(|k| !occupied.contains(k)));
    for (pos, &k) in order.iter().enumerate() {
        let mut v = o.orbitals[k].clone();
        for &p in &order[..pos] {
            if o.spins[p] != o.spins[k] {
                continue;
            }
            let c: Complex = o.orbitals[p].iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for (x, y) in v.iter_mut().zip(&o.orbitals[p]) {
                *x -= y * c;
            }
        }
        let n = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        o.orbitals[k] = v.into_iter().map(|a| a / n).collect();
    }
}
