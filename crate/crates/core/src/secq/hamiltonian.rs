use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::occupation::{ladder_chain, FockBasis, Ladder};
use crate::fd::{hamiltonian_matrix, Grid1D, Potential};
use crate::hierarchy::Statistics;
use crate::{Complex, Error, Result, Units};

pub const TENSOR_HEADER: &str = "AQSIM-TENSOR v1";
/// Largest occupation space [`ground_oracle`] will diagonalize.
pub const MAX_ORACLE: usize = 10_000;

const ORTHO_TOL: f64 = 1e-8;
const HERMITIAN_TOL: f64 = 1e-10;

/// One-particle levels on a grid. Each level is a spatial orbital with unit
/// discrete norm and a spin label; levels of different spin are orthogonal.
#[derive(Clone, Debug, PartialEq)]
pub struct OrbitalSet {
    pub grid: Grid1D,
    pub orbitals: Vec<Vec<Complex>>,
    pub spins: Vec<u8>,
}

impl OrbitalSet {
    pub fn new(grid: Grid1D, orbitals: Vec<Vec<Complex>>, spins: Vec<u8>) -> Result<Self> {
        if orbitals.len() != spins.len() {
            return Err(Error::DimensionMismatch(format!("{} orbitals but {} spin labels", orbitals.len(), spins.len())));
        }
        if orbitals.iter().any(|o| o.len() != grid.points) {
            return Err(Error::DimensionMismatch(format!("orbitals must have {} grid values", grid.points)));
        }
        let set = OrbitalSet { grid, orbitals, spins };
        let dev = set.orthonormality_error();
        if dev > ORTHO_TOL {
            return Err(Error::Domain(format!("orbitals deviate from orthonormality by {dev:e}")));
        }
        Ok(set)
    }

    /// Spinless levels.
    pub fn spinless(grid: Grid1D, orbitals: Vec<Vec<Complex>>) -> Result<Self> {
        let spins = vec![0; orbitals.len()];
        Self::new(grid, orbitals, spins)
    }

    /// Each spatial orbital twice, spin 0 then spin 1.
    pub fn spin_pairs(grid: Grid1D, spatial: Vec<Vec<Complex>>) -> Result<Self> {
        let mut orbitals = Vec::with_capacity(2 * spatial.len());
        let mut spins = Vec::with_capacity(2 * spatial.len());
        for o in spatial {
            orbitals.push(o.clone());
            orbitals.push(o);
            spins.extend([0, 1]);
        }
        Self::new(grid, orbitals, spins)
    }

    pub fn levels(&self) -> usize {
        self.orbitals.len()
    }

    pub fn overlap(&self, a: usize, b: usize) -> Complex {
        if self.spins[a] != self.spins[b] {
            return Complex::new(0.0, 0.0);
        }
        self.orbitals[a].iter().zip(&self.orbitals[b]).map(|(x, y)| x.conj() * y).sum()
    }

    /// Largest deviation of the Gram matrix from the identity.
    pub fn orthonormality_error(&self) -> f64 {
        let l = self.levels();
        let mut worst: f64 = 0.0;
        for a in 0..l {
            for b in 0..l {
                let want = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((self.overlap(a, b) - Complex::new(want, 0.0)).norm());
            }
        }
        worst
    }
}

/// Two-particle potential on the grid.
#[derive(Clone, Debug, PartialEq)]
pub enum TwoBody {
    None,
    /// `g·δ(x − y)`.
    Contact(f64),
    /// `V₂(x_i, x_j)` sampled on grid nodes.
    Kernel(DMatrix<f64>),
}

impl TwoBody {
    /// Discrete weights `W_ij` with `v = Σ_ij ψ_k*(i) ψ_l*(j) W_ij ψ_m(i) ψ_n(j)` for unit-norm grid vectors.
    fn weight(&self, i: usize, j: usize, dx: f64) -> f64 {
        match self {
            TwoBody::None => 0.0,
            TwoBody::Contact(g) => {
                if i == j {
                    g / dx
                } else {
                    0.0
                }
            }
            TwoBody::Kernel(w) => w[(i, j)],
        }
    }

    pub fn is_none(&self) -> bool {
        matches!(self, TwoBody::None)
    }
}

/// `H = Σ v_kl c_k† c_l + ½ Σ v_klmn c_l† c_k† c_m c_n`.
///
/// Index convention: `v_klmn = ∫∫ Ψ_k*(x) Ψ_l*(y) V₂(x, y) Ψ_m(x) Ψ_n(y)`, i.e. the
/// bra `⟨Ψ_l, Ψ_k|` lists its factors in reverse of the coordinates they act on.
/// `v2` is stored row-major in `(k, l, m, n)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LadderHamiltonian {
    pub levels: usize,
    pub v1: DMatrix<Complex>,
    pub v2: Vec<Complex>,
}

impl LadderHamiltonian {
    pub fn new(v1: DMatrix<Complex>, v2: Vec<Complex>) -> Result<Self> {
        let l = v1.nrows();
        if v1.ncols() != l || v2.len() != l.pow(4) {
            return Err(Error::DimensionMismatch(format!("{l} levels need an {l}x{l} and an {l}^4 tensor")));
        }
        let h = LadderHamiltonian { levels: l, v1, v2 };
        if h.hermiticity_error() > HERMITIAN_TOL * h.scale() {
            return Err(Error::Domain("v_kl is not Hermitian".into()));
        }
        Ok(h)
    }

    pub fn zero(levels: usize) -> Self {
        LadderHamiltonian { levels, v1: DMatrix::zeros(levels, levels), v2: vec![Complex::new(0.0, 0.0); levels.pow(4)] }
    }

    fn scale(&self) -> f64 {
        self.v1.iter().map(|a| a.norm()).fold(1.0, f64::max)
    }

    pub fn hermiticity_error(&self) -> f64 {
        (&self.v1 - self.v1.adjoint()).iter().map(|a| a.norm()).fold(0.0, f64::max)
    }

    pub fn idx(&self, k: usize, l: usize, m: usize, n: usize) -> usize {
        ((k * self.levels + l) * self.levels + m) * self.levels + n
    }

    pub fn v2_at(&self, k: usize, l: usize, m: usize, n: usize) -> Complex {
        self.v2[self.idx(k, l, m, n)]
    }

    pub fn to_text(&self) -> String {
        let l = self.levels;
        let mut s = String::new();
        let _ = writeln!(s, "{TENSOR_HEADER}");
        let _ = writeln!(s, "levels {l}");
        let _ = writeln!(s, "# v2[k,l,m,n] = <Psi_l,Psi_k|V2|Psi_m,Psi_n>, row-major in k,l,m,n, one line per (k,l,m)");
        s.push_str("v1\n");
        for k in 0..l {
            let row: Vec<String> = (0..l).map(|c| format!("{:?} {:?}", self.v1[(k, c)].re, self.v1[(k, c)].im)).collect();
            let _ = writeln!(s, "{}", row.join(" "));
        }
        s.push_str("v2\n");
        for chunk in self.v2.chunks(l.max(1)) {
            let row: Vec<String> = chunk.iter().map(|a| format!("{:?} {:?}", a.re, a.im)).collect();
            let _ = writeln!(s, "{}", row.join(" "));
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let mut next = || lines.next().ok_or_else(|| Error::parse(0, "unexpected end of tensor file"));
        let (ln, h) = next()?;
        if h != TENSOR_HEADER {
            return Err(Error::parse(ln, format!("expected header {TENSOR_HEADER}")));
        }
        let (ln, lv) = next()?;
        let l: usize = lv
            .strip_prefix("levels")
            .ok_or_else(|| Error::parse(ln, "expected levels"))?
            .trim()
            .parse()
            .map_err(|e: std::num::ParseIntError| Error::parse(ln, e.to_string()))?;
        let mut read_rows = |tag: &str, rows: usize| -> Result<Vec<Complex>> {
            let (ln, t) = next()?;
            if t != tag {
                return Err(Error::parse(ln, format!("expected {tag}")));
            }
            let mut out = Vec::with_capacity(rows * l);
            for _ in 0..rows {
                let (ln, row) = next()?;
                let v = row.split_whitespace().map(|x| x.parse::<f64>().map_err(|e| Error::parse(ln, e.to_string()))).collect::<Result<Vec<_>>>()?;
                if v.len() != 2 * l {
                    return Err(Error::parse(ln, format!("expected {l} complex values")));
                }
                out.extend(v.chunks(2).map(|p| Complex::new(p[0], p[1])));
            }
            Ok(out)
        };
        let v1 = read_rows("v1", l)?;
        let v2 = read_rows("v2", l.pow(3))?;
        Self::new(DMatrix::from_row_slice(l, l, &v1), v2)
    }
}

/// Tensors by grid quadrature. The kinetic term uses the three-point
/// finite-difference Laplacian of the grid's boundary condition.
pub fn build_hamiltonian(orbitals: &OrbitalSet, v1: &Potential, v2: &TwoBody, units: &Units) -> Result<LadderHamiltonian> {
    let grid = orbitals.grid;
    if v1.values.len() != grid.points {
        return Err(Error::DimensionMismatch(format!("potential has {} values for {} grid points", v1.values.len(), grid.points)));
    }
    let l = orbitals.levels();
    let h1 = hamiltonian_matrix(&grid, v1, units).map(|x| Complex::new(x, 0.0));
    let psi: Vec<DVector<Complex>> = orbitals.orbitals.iter().map(|o| DVector::from_column_slice(o)).collect();
    let hpsi: Vec<DVector<Complex>> = psi.iter().map(|p| &h1 * p).collect();
    let mut m1 = DMatrix::zeros(l, l);
    for k in 0..l {
        for c in 0..l {
            if orbitals.spins[k] == orbitals.spins[c] {
                m1[(k, c)] = psi[k].dotc(&hpsi[c]);
            }
        }
    }
    let mut h = LadderHamiltonian { levels: l, v1: m1, v2: vec![Complex::new(0.0, 0.0); l.pow(4)] };
    if !v2.is_none() {
        let n = grid.points;
        let o = &orbitals.orbitals;
        for k in 0..l {
            for m in 0..l {
                if orbitals.spins[k] != orbitals.spins[m] {
                    continue;
                }
                // Pair density of the x coordinate.
                let rho_x: Vec<Complex> = (0..n).map(|i| o[k][i].conj() * o[m][i]).collect();
                for ll in 0..l {
                    for nn in 0..l {
                        if orbitals.spins[ll] != orbitals.spins[nn] {
                            continue;
                        }
                        let rho_y: Vec<Complex> = (0..n).map(|j| o[ll][j].conj() * o[nn][j]).collect();
                        let val: Complex = match v2 {
                            TwoBody::Contact(_) => (0..n).map(|i| rho_x[i] * rho_y[i] * v2.weight(i, i, grid.dx)).sum(),
                            _ => (0..n).map(|i| (0..n).map(|j| rho_x[i] * rho_y[j] * v2.weight(i, j, grid.dx)).sum::<Complex>()).sum(),
                        };
                        let idx = h.idx(k, ll, m, nn);
                        h.v2[idx] = val;
                    }
                }
            }
        }
    }
    if h.hermiticity_error() > HERMITIAN_TOL * h.scale() {
        return Err(Error::Domain("one-body tensor lost Hermiticity".into()));
    }
    Ok(h)
}

/// `H·vec` over a fixed-number basis.
pub fn apply_hamiltonian(h: &LadderHamiltonian, basis: &FockBasis, vec: &[Complex]) -> Result<Vec<Complex>> {
    if vec.len() != basis.len() {
        return Err(Error::DimensionMismatch(format!("vector has {} entries for a basis of {}", vec.len(), basis.len())));
    }
    if h.levels != basis.levels {
        return Err(Error::DimensionMismatch(format!("Hamiltonian on {} levels, basis on {}", h.levels, basis.levels)));
    }
    let mut out = vec![Complex::new(0.0, 0.0); basis.len()];
    for (col, &a) in vec.iter().enumerate() {
        if a == Complex::new(0.0, 0.0) {
            continue;
        }
        for (row, v) in column(h, basis, col) {
            out[row] += v * a;
        }
    }
    Ok(out)
}

/// Nonzero entries `(row, H[row, col])` of one column.
fn column(h: &LadderHamiltonian, basis: &FockBasis, col: usize) -> Vec<(usize, Complex)> {
    let l = h.levels;
    let stats = basis.statistics;
    let occ = &basis.states[col];
    let zero = Complex::new(0.0, 0.0);
    let mut acc: Vec<(usize, Complex)> = Vec::new();
    let mut push = |state: &[u8], v: Complex| {
        if let Some(row) = basis.index_of(state) {
            match acc.iter_mut().find(|e| e.0 == row) {
                Some(e) => e.1 += v,
                None => acc.push((row, v)),
            }
        }
    };
    for k in 0..l {
        for c in 0..l {
            let v = h.v1[(k, c)];
            if v == zero {
                continue;
            }
            if let Some((s, out)) = ladder_chain(&[(Ladder::Create, k), (Ladder::Annihilate, c)], occ, stats) {
                push(&out, v * s);
            }
        }
    }
    for k in 0..l {
        for ll in 0..l {
            for m in 0..l {
                for n in 0..l {
                    let v = h.v2_at(k, ll, m, n);
                    if v == zero {
                        continue;
                    }
                    let ops = [(Ladder::Create, ll), (Ladder::Create, k), (Ladder::Annihilate, m), (Ladder::Annihilate, n)];
                    if let Some((s, out)) = ladder_chain(&ops, occ, stats) {
                        push(&out, v * (0.5 * s));
                    }
                }
            }
        }
    }
    acc.sort_by_key(|e| e.0);
    acc
}

/// Dense matrix of `H` over a fixed-number basis.
pub fn hamiltonian_dense(h: &LadderHamiltonian, basis: &FockBasis) -> Result<DMatrix<Complex>> {
    if basis.len() > MAX_ORACLE {
        return Err(Error::SizeCap { size: basis.len(), cap: MAX_ORACLE });
    }
    if h.levels != basis.levels {
        return Err(Error::DimensionMismatch(format!("Hamiltonian on {} levels, basis on {}", h.levels, basis.levels)));
    }
    let mut m = DMatrix::zeros(basis.len(), basis.len());
    for col in 0..basis.len() {
        for (row, v) in column(h, basis, col) {
            m[(row, col)] = v;
        }
    }
    Ok(m)
}

/// Lowest eigenpair of `H` on the `particles`-particle sector.
pub fn ground_oracle(h: &LadderHamiltonian, particles: usize, stats: Statistics) -> Result<(f64, FockBasis, Vec<Complex>)> {
    let basis = FockBasis::new(h.levels, particles, stats, MAX_ORACLE)?;
    let m = hamiltonian_dense(h, &basis)?;
    let eig = SymmetricEigen::new(m);
    let j = (0..basis.len()).min_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b])).ok_or_else(|| Error::Domain("empty occupation space".into()))?;
    let v: Vec<Complex> = eig.eigenvectors.column(j).iter().copied().collect();
    Ok((eig.eigenvalues[j], basis, v))
}
