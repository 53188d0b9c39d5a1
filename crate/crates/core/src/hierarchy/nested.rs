use nalgebra::{DMatrix, SymmetricEigen};

use crate::state::{GrainPolicy, GrainedWaveFunction};
use crate::{Complex, Error, Result};

/// Largest configuration space [`HierState::flatten`] will expand.
pub const MAX_FLAT: usize = 1 << 20;
/// Default entanglement tolerance for restructuring.
pub const DEFAULT_ETA: f64 = 1e-3;
/// Default number of consecutive confirmations before lowering.
pub const DEFAULT_CONFIRMATIONS: usize = 5;

/// One particle of a nested state.
#[derive(Clone, Debug, PartialEq)]
pub struct Particle {
    pub id: usize,
    pub mass: f64,
    /// Coordinate of each option.
    pub positions: Vec<f64>,
}

impl Particle {
    pub fn new(id: usize, mass: f64, positions: Vec<f64>) -> Self {
        Particle { id, mass, positions }
    }

    pub fn options(&self) -> usize {
        self.positions.len()
    }
}

/// Amplitudes of one level conditioned on the coordinates of earlier levels.
///
/// `context` lists the chain positions the table depends on; `tables` is
/// indexed by their options in mixed radix, first context entry most significant.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelTable {
    pub context: Vec<usize>,
    pub tables: Vec<Vec<Complex>>,
}

impl LevelTable {
    /// A table with no dependence on other levels.
    pub fn free(amps: Vec<Complex>) -> Self {
        LevelTable { context: Vec::new(), tables: vec![amps] }
    }

    fn index(&self, config: &[usize], radix: &[usize]) -> usize {
        self.context.iter().fold(0, |acc, &c| acc * radix[c] + config[c])
    }

    pub fn amplitude(&self, config: &[usize], radix: &[usize], own: usize) -> Complex {
        self.tables[self.index(config, radix)][config_own(config, own)]
    }
}

fn config_own(config: &[usize], own: usize) -> usize {
    config[own]
}

/// A node of the particle tree. Composite nodes have no particle.
#[derive(Clone, Debug, PartialEq)]
pub struct HierNode {
    pub particle: Option<usize>,
    pub level: usize,
    pub children: Vec<HierNode>,
    /// Mass-weighted mean of the children's means; a leaf's own mean position.
    pub frame: f64,
    /// Mean position of the node's own particle, or the frame for composite nodes.
    pub position: f64,
    /// Mass of the subtree.
    pub mass: f64,
}

impl HierNode {
    /// Mean positions of the children relative to this node's frame.
    pub fn relative_offsets(&self) -> Vec<f64> {
        self.children.iter().map(|c| c.position - self.frame).collect()
    }

    pub fn depth(&self) -> usize {
        1 + self.children.iter().map(HierNode::depth).max().unwrap_or(0)
    }

    fn find(&self, particle: usize) -> Option<&HierNode> {
        if self.particle == Some(particle) {
            return Some(self);
        }
        self.children.iter().find_map(|c| c.find(particle))
    }
}

/// Per-check measurements driving [`HierState::restructure`].
#[derive(Clone, Debug, PartialEq)]
pub struct Observation {
    /// Entanglement of each chain position with the rest, 1 − λ_max of its reduced density.
    pub entanglement: Vec<f64>,
    /// Position correlation of chain-position pairs (a < b).
    pub correlations: Vec<(usize, usize, f64)>,
}

/// What a call to [`HierState::restructure`] changed.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Restructured {
    pub lowered: Vec<usize>,
    pub lifted: Vec<(usize, usize)>,
}

/// A state built level by level: each particle's amplitude table is
/// conditioned on the coordinates of the particles before it in the chain.
#[derive(Clone, Debug, PartialEq)]
pub struct HierState {
    pub particles: Vec<Particle>,
    pub levels: Vec<LevelTable>,
    /// Locality bound: tables depend on at most the last `p` earlier levels.
    pub depth: Option<usize>,
    pub eta: f64,
    pub confirmations: usize,
    lowered: Vec<bool>,
    groups: Vec<(usize, usize)>,
    streak: Vec<usize>,
}

impl HierState {
    pub fn new(particles: Vec<Particle>, levels: Vec<LevelTable>, depth: Option<usize>) -> Result<Self> {
        if particles.len() != levels.len() || particles.is_empty() {
            return Err(Error::DimensionMismatch(format!("{} particles but {} level tables", particles.len(), levels.len())));
        }
        let radix: Vec<usize> = particles.iter().map(Particle::options).collect();
        for (k, lv) in levels.iter().enumerate() {
            if lv.context.iter().any(|&c| c >= k) || lv.context.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Domain(format!("level {k} may only depend on earlier levels, in order")));
            }
            if let Some(p) = depth {
                if lv.context.iter().any(|&c| c + p < k) {
                    return Err(Error::Domain(format!("level {k} depends on a level further back than depth {p}")));
                }
            }
            let want: usize = lv.context.iter().map(|&c| radix[c]).product();
            if lv.tables.len() != want {
                return Err(Error::DimensionMismatch(format!("level {k} needs {want} tables, has {}", lv.tables.len())));
            }
            for t in &lv.tables {
                if t.len() != radix[k] {
                    return Err(Error::DimensionMismatch(format!("level {k} tables need {} entries", radix[k])));
                }
                let n: f64 = t.iter().map(|a| a.norm_sqr()).sum();
                if (n - 1.0).abs() > 1e-10 {
                    return Err(Error::Domain(format!("level {k} table has norm² {n}, expected 1")));
                }
            }
        }
        let n = particles.len();
        Ok(HierState {
            particles,
            levels,
            depth,
            eta: DEFAULT_ETA,
            confirmations: DEFAULT_CONFIRMATIONS,
            lowered: vec![false; n],
            groups: Vec::new(),
            streak: vec![0; n],
        })
    }

    /// Uncorrelated particles, one free table each.
    pub fn product(particles: Vec<Particle>, tables: Vec<Vec<Complex>>) -> Result<Self> {
        let levels = tables.into_iter().map(LevelTable::free).collect();
        Self::new(particles, levels, Some(0))
    }

    fn radix(&self) -> Vec<usize> {
        self.particles.iter().map(Particle::options).collect()
    }

    /// Number of configurations of the flattened state.
    pub fn flat_size(&self) -> usize {
        self.radix().iter().try_fold(1usize, |acc, &r| acc.checked_mul(r)).unwrap_or(usize::MAX)
    }

    /// Stored amplitudes across all tables.
    pub fn stored_size(&self) -> usize {
        self.levels.iter().map(|l| l.tables.iter().map(Vec::len).sum::<usize>()).sum()
    }

    /// Amplitude of one configuration: the product of table entries along the chain.
    pub fn amplitude(&self, config: &[usize]) -> Complex {
        let radix = self.radix();
        self.levels.iter().enumerate().map(|(k, lv)| lv.amplitude(config, &radix, k)).product()
    }

    /// Expand into a dense state labelled in mixed radix, first particle most significant.
    pub fn flatten(&self) -> Result<GrainedWaveFunction> {
        let size = self.flat_size();
        if size > MAX_FLAT {
            return Err(Error::SizeCap { size, cap: MAX_FLAT });
        }
        let radix = self.radix();
        let mut config = vec![0usize; radix.len()];
        let mut amps = Vec::with_capacity(size);
        for _ in 0..size {
            amps.push(self.amplitude(&config));
            for k in (0..radix.len()).rev() {
                config[k] += 1;
                if config[k] < radix[k] {
                    break;
                }
                config[k] = 0;
            }
        }
        GrainedWaveFunction::from_dense(&amps, GrainPolicy::exact())
    }

    /// Entanglement and position correlations computed from the flattened state.
    pub fn observe(&self) -> Result<Observation> {
        let psi = self.flatten()?;
        let radix = self.radix();
        let dense = psi.to_dense(self.flat_size());
        let n = radix.len();
        let entanglement = (0..n).map(|k| entanglement_of(&dense, &radix, k)).collect();
        let mut correlations = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                correlations.push((a, b, self.correlation(&dense, &radix, a, b)));
            }
        }
        Ok(Observation { entanglement, correlations })
    }

    fn correlation(&self, dense: &[Complex], radix: &[usize], a: usize, b: usize) -> f64 {
        let (pa, pb) = (&self.particles[a].positions, &self.particles[b].positions);
        let (mut ma, mut mb, mut saa, mut sbb, mut sab) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for (i, amp) in dense.iter().enumerate() {
            let w = amp.norm_sqr();
            if w == 0.0 {
                continue;
            }
            let cfg = digits(i, radix);
            let (xa, xb) = (pa[cfg[a]], pb[cfg[b]]);
            ma += w * xa;
            mb += w * xb;
            saa += w * xa * xa;
            sbb += w * xb * xb;
            sab += w * xa * xb;
        }
        let (va, vb) = (saa - ma * ma, sbb - mb * mb);
        if va <= 0.0 || vb <= 0.0 {
            return 0.0;
        }
        (sab - ma * mb) / (va * vb).sqrt()
    }

    /// Apply lowering and lifting rules given one more round of observations.
    ///
    /// A chain position whose entanglement stays at or below η for the
    /// configured number of consecutive checks is lowered: its table and every
    /// later table stop depending on the other's coordinates. A pair whose
    /// position correlation reaches 1 − η is lifted under a shared parent.
    pub fn restructure(&mut self, obs: &Observation) -> Result<Restructured> {
        if obs.entanglement.len() != self.levels.len() {
            return Err(Error::DimensionMismatch("one entanglement value per level is required".into()));
        }
        let mut out = Restructured::default();
        for (k, &e) in obs.entanglement.iter().enumerate() {
            self.streak[k] = if e <= self.eta { self.streak[k] + 1 } else { 0 };
            if !self.lowered[k] && self.streak[k] >= self.confirmations {
                self.lower(k);
                out.lowered.push(k);
            }
        }
        for &(a, b, c) in &obs.correlations {
            if c.abs() >= 1.0 - self.eta && !self.groups.contains(&(a, b)) {
                self.groups.push((a, b));
                out.lifted.push((a, b));
            }
        }
        Ok(out)
    }

    /// Drop every dependence between level `k` and the others, keeping for
    /// each table the slice of largest weight.
    fn lower(&mut self, k: usize) {
        let radix = self.radix();
        let weights = self.context_weights();
        for j in 0..self.levels.len() {
            let lv = &self.levels[j];
            let drop: Vec<usize> = if j == k { lv.context.clone() } else if lv.context.contains(&k) { vec![k] } else { continue };
            let keep: Vec<usize> = lv.context.iter().copied().filter(|c| !drop.contains(c)).collect();
            let keep_size: usize = keep.iter().map(|&c| radix[c]).product();
            let mut tables = vec![Vec::new(); keep_size];
            let mut best = vec![-1.0; keep_size];
            for (idx, t) in lv.tables.iter().enumerate() {
                let ctx = digits(idx, &lv.context.iter().map(|&c| radix[c]).collect::<Vec<_>>());
                let sub = lv
                    .context
                    .iter()
                    .zip(&ctx)
                    .filter(|(c, _)| keep.contains(c))
                    .fold(0, |acc, (&c, &v)| acc * radix[c] + v);
                let w = weights[j][idx];
                if w > best[sub] {
                    best[sub] = w;
                    tables[sub] = t.clone();
                }
            }
            self.levels[j] = LevelTable { context: keep, tables };
        }
        self.lowered[k] = true;
    }

    /// Probability of each context value of each level.
    fn context_weights(&self) -> Vec<Vec<f64>> {
        let radix = self.radix();
        let n = radix.len();
        // Marginals over prefixes, computed by forward accumulation over the chain.
        let size = self.flat_size().min(MAX_FLAT);
        let mut w: Vec<Vec<f64>> = self.levels.iter().map(|l| vec![0.0; l.tables.len()]).collect();
        let mut config = vec![0usize; n];
        for _ in 0..size {
            let p = self.amplitude(&config).norm_sqr();
            for (j, lv) in self.levels.iter().enumerate() {
                w[j][lv.index(&config, &radix)] += p;
            }
            for k in (0..n).rev() {
                config[k] += 1;
                if config[k] < radix[k] {
                    break;
                }
                config[k] = 0;
            }
        }
        w
    }

    pub fn is_lowered(&self, k: usize) -> bool {
        self.lowered[k]
    }

    /// The particle tree: the conditioning chain nested from the root, lowered
    /// particles attached to the root directly, lifted pairs under a composite node.
    pub fn tree(&self) -> Result<HierNode> {
        let psi = self.flatten()?;
        let radix = self.radix();
        let dense = psi.to_dense(self.flat_size());
        let n = radix.len();
        let mut mean = vec![0.0; n];
        for (i, a) in dense.iter().enumerate() {
            let w = a.norm_sqr();
            if w > 0.0 {
                let cfg = digits(i, &radix);
                for k in 0..n {
                    mean[k] += w * self.particles[k].positions[cfg[k]];
                }
            }
        }
        let leaf = |k: usize, level: usize| HierNode {
            particle: Some(self.particles[k].id),
            level,
            children: Vec::new(),
            frame: mean[k],
            position: mean[k],
            mass: self.particles[k].mass,
        };
        let mut grouped = vec![false; n];
        let mut root_children = Vec::new();
        for &(a, b) in &self.groups {
            if grouped[a] || grouped[b] {
                continue;
            }
            grouped[a] = true;
            grouped[b] = true;
            root_children.push(composite(vec![leaf(a, 2), leaf(b, 2)], 1));
        }
        for k in 0..n {
            if self.lowered[k] && !grouped[k] {
                root_children.push(leaf(k, 1));
            }
        }
        let chain: Vec<usize> = (0..n).filter(|&k| !self.lowered[k] && !grouped[k]).collect();
        let mut nested: Option<HierNode> = None;
        for (depth, &k) in chain.iter().enumerate().rev() {
            let mut node = leaf(k, depth + 1);
            if let Some(inner) = nested.take() {
                node.mass += inner.mass;
                node.frame = inner.position;
                node.children.push(inner);
            }
            nested = Some(node);
        }
        if let Some(c) = nested {
            root_children.push(c);
        }
        Ok(composite(root_children, 0))
    }

    /// Chain position of the particle with a given id.
    pub fn position_of(&self, id: usize) -> Option<usize> {
        self.particles.iter().position(|p| p.id == id)
    }

    /// Node holding a particle in the current tree.
    pub fn node_of(&self, id: usize) -> Result<Option<HierNode>> {
        Ok(self.tree()?.find(id).cloned())
    }
}

fn composite(children: Vec<HierNode>, level: usize) -> HierNode {
    let mass: f64 = children.iter().map(|c| c.mass).sum();
    let frame = if mass > 0.0 { children.iter().map(|c| c.mass * c.position).sum::<f64>() / mass } else { 0.0 };
    HierNode { particle: None, level, children, frame, position: frame, mass }
}

fn digits(mut i: usize, radix: &[usize]) -> Vec<usize> {
    let mut d = vec![0; radix.len()];
    for k in (0..radix.len()).rev() {
        d[k] = i % radix[k];
        i /= radix[k];
    }
    d
}

/// 1 − λ_max(ρ_k) for the reduced density of position `k` in a dense state.
pub fn entanglement_of(dense: &[Complex], radix: &[usize], k: usize) -> f64 {
    let nk = radix[k];
    let rest = dense.len() / nk;
    let mut m = DMatrix::<Complex>::zeros(nk, rest);
    let mut col = vec![0usize; nk];
    for (i, &a) in dense.iter().enumerate() {
        let d = digits(i, radix);
        let r = d[k];
        m[(r, col[r])] = a;
        col[r] += 1;
    }
    let rho = &m * m.adjoint();
    let tr: f64 = (0..nk).map(|i| rho[(i, i)].re).sum();
    if tr == 0.0 {
        return 0.0;
    }
    let eig = SymmetricEigen::new(rho);
    let lmax = eig.eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (1.0 - lmax / tr).max(0.0)
}
