use std::collections::{BTreeMap, HashMap};

use nalgebra::DMatrix;

use crate::hierarchy::Statistics;
use crate::{Complex, Error, Result};

/// Occupation numbers per level, level 0 first.
pub type Occupation = Vec<u8>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Ladder {
    Create,
    Annihilate,
}

/// Most quanta a bosonic level may hold.
pub const MAX_BOSON_OCCUPANCY: u8 = u8::MAX - 1;

/// Apply `c_j†` or `c_j` to a basis state: the coefficient and the resulting
/// state, or `None` for the zero vector.
///
/// Fermions carry the sign `(−1)^(n_0 + … + n_{j−1})`; bosons carry `√(n_j + 1)`
/// on creation and `√n_j` on annihilation.
pub fn ladder_apply(op: Ladder, j: usize, occ: &[u8], stats: Statistics) -> Option<(f64, Occupation)> {
    let n = *occ.get(j)?;
    let mut out = occ.to_vec();
    match stats {
        Statistics::Fermion => {
            let sigma: u32 = occ[..j].iter().map(|&x| x as u32).sum();
            let sign = if sigma.is_multiple_of(2) { 1.0 } else { -1.0 };
            match op {
                Ladder::Create if n == 0 => {
                    out[j] = 1;
                    Some((sign, out))
                }
                Ladder::Annihilate if n == 1 => {
                    out[j] = 0;
                    Some((sign, out))
                }
                _ => None,
            }
        }
        Statistics::Boson => match op {
            Ladder::Create if n < MAX_BOSON_OCCUPANCY => {
                out[j] = n + 1;
                Some((((n + 1) as f64).sqrt(), out))
            }
            Ladder::Annihilate if n > 0 => {
                out[j] = n - 1;
                Some(((n as f64).sqrt(), out))
            }
            _ => None,
        },
    }
}

/// Apply a product of ladder operators, rightmost first.
pub fn ladder_chain(ops: &[(Ladder, usize)], occ: &[u8], stats: Statistics) -> Option<(f64, Occupation)> {
    let mut coef = 1.0;
    let mut state = occ.to_vec();
    for &(op, j) in ops.iter().rev() {
        let (c, s) = ladder_apply(op, j, &state, stats)?;
        coef *= c;
        state = s;
    }
    Some((coef, state))
}

/// Sparse superposition of occupation states.
#[derive(Clone, Debug, PartialEq)]
pub struct FockState {
    pub statistics: Statistics,
    pub levels: usize,
    pub amps: BTreeMap<Occupation, Complex>,
}

impl FockState {
    pub fn basis(occ: Occupation, statistics: Statistics) -> Result<Self> {
        if statistics == Statistics::Fermion && occ.iter().any(|&n| n > 1) {
            return Err(Error::Domain(format!("fermion occupations must be 0 or 1, got {occ:?}")));
        }
        let levels = occ.len();
        Ok(FockState { statistics, levels, amps: BTreeMap::from([(occ, Complex::new(1.0, 0.0))]) })
    }

    pub fn zero(levels: usize, statistics: Statistics) -> Self {
        FockState { statistics, levels, amps: BTreeMap::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.amps.values().all(|a| *a == Complex::new(0.0, 0.0))
    }

    pub fn amplitude(&self, occ: &[u8]) -> Complex {
        self.amps.get(occ).copied().unwrap_or_default()
    }

    pub fn apply(&self, op: Ladder, j: usize) -> Result<FockState> {
        if j >= self.levels {
            return Err(Error::Domain(format!("level {j} outside 0..{}", self.levels)));
        }
        let mut out = FockState::zero(self.levels, self.statistics);
        for (occ, a) in &self.amps {
            if let Some((c, s)) = ladder_apply(op, j, occ, self.statistics) {
                *out.amps.entry(s).or_default() += a * c;
            }
        }
        out.amps.retain(|_, a| *a != Complex::new(0.0, 0.0));
        Ok(out)
    }
}

/// All occupation states with a fixed particle number, in lexicographic order
/// of the occupation vector read from the highest level down.
#[derive(Clone, Debug, PartialEq)]
pub struct FockBasis {
    pub statistics: Statistics,
    pub levels: usize,
    pub particles: usize,
    pub states: Vec<Occupation>,
    index: HashMap<Occupation, usize>,
}

impl FockBasis {
    pub fn new(levels: usize, particles: usize, statistics: Statistics, cap: usize) -> Result<Self> {
        if statistics == Statistics::Fermion && particles > levels {
            return Err(Error::Domain(format!("{particles} fermions do not fit in {levels} levels")));
        }
        let size = basis_size(levels, particles, statistics);
        if size > cap as f64 {
            return Err(Error::SizeCap { size: size.min(usize::MAX as f64) as usize, cap });
        }
        let max = match statistics {
            Statistics::Fermion => 1,
            Statistics::Boson => particles.min(MAX_BOSON_OCCUPANCY as usize) as u8,
        };
        let mut states = Vec::with_capacity(size as usize);
        let mut cur = vec![0u8; levels];
        fill(&mut cur, 0, particles, max, &mut states);
        let index = states.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        Ok(FockBasis { statistics, levels, particles, states, index })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn index_of(&self, occ: &[u8]) -> Option<usize> {
        self.index.get(occ).copied()
    }
}

fn fill(cur: &mut Vec<u8>, level: usize, left: usize, max: u8, out: &mut Vec<Occupation>) {
    if level == cur.len() {
        if left == 0 {
            out.push(cur.clone());
        }
        return;
    }
    let top = (max as usize).min(left);
    for n in (0..=top).rev() {
        cur[level] = n as u8;
        fill(cur, level + 1, left - n, max, out);
    }
    cur[level] = 0;
}

fn basis_size(levels: usize, particles: usize, stats: Statistics) -> f64 {
    let choose = |n: usize, k: usize| -> f64 { (0..k).map(|i| (n - i) as f64 / (i + 1) as f64).product() };
    match stats {
        Statistics::Fermion => choose(levels, particles),
        Statistics::Boson if levels == 0 => {
            if particles == 0 {
                1.0
            } else {
                0.0
            }
        }
        Statistics::Boson => choose(levels + particles - 1, particles),
    }
}

/// Dense matrix of `c_j†` or `c_j` on the full fermionic Fock space of `levels`
/// levels, basis index = occupation bitmask with level 0 as the lowest bit.
pub fn fermion_ladder_matrix(op: Ladder, j: usize, levels: usize) -> Result<DMatrix<f64>> {
    if levels > 12 {
        return Err(Error::SizeCap { size: levels, cap: 12 });
    }
    let dim = 1usize << levels;
    let mut m = DMatrix::zeros(dim, dim);
    for mask in 0..dim {
        let occ: Occupation = (0..levels).map(|b| ((mask >> b) & 1) as u8).collect();
        if let Some((c, out)) = ladder_apply(op, j, &occ, Statistics::Fermion) {
            let row: usize = out.iter().enumerate().map(|(b, &n)| (n as usize) << b).sum();
            m[(row, mask)] = c;
        }
    }
    Ok(m)
}
