use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt::Write as _;

use super::symmetrize::{self, Statistics};
use crate::{Complex, Error, Result};

pub const CANON_HEADER: &str = "AQSIM-CANON v1";
/// Default bound on the number of terms.
pub const DEFAULT_TERM_CAP: usize = 1 << 16;
/// Largest configuration space [`CanonicalState::flatten`] will expand.
pub const MAX_FLAT: usize = 1 << 20;

const NORM_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub enum Payload {
    /// A single configuration.
    Basic(Vec<usize>),
    /// A product of one normalized table per particle.
    Product(Vec<Vec<Complex>>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    pub coef: Complex,
    pub payload: Payload,
}

impl Term {
    pub fn basic(coef: Complex, config: Vec<usize>) -> Self {
        Term { coef, payload: Payload::Basic(config) }
    }

    /// A product term; each table is normalized and its norm folded into the coefficient.
    pub fn product(coef: Complex, tables: Vec<Vec<Complex>>) -> Result<Self> {
        let mut coef = coef;
        let mut out = Vec::with_capacity(tables.len());
        for t in tables {
            let n = t.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            if n == 0.0 {
                return Err(Error::Domain("product table is identically zero".into()));
            }
            coef *= n;
            out.push(t.into_iter().map(|a| a / n).collect());
        }
        Ok(Term { coef, payload: Payload::Product(out) })
    }

    fn amplitude(&self, config: &[usize]) -> Complex {
        match &self.payload {
            Payload::Basic(b) => {
                if b.as_slice() == config {
                    self.coef
                } else {
                    Complex::new(0.0, 0.0)
                }
            }
            Payload::Product(tables) => tables.iter().zip(config).fold(self.coef, |acc, (t, &r)| acc * t[r]),
        }
    }

    fn supports(&self, config: &[usize]) -> bool {
        match &self.payload {
            Payload::Basic(b) => b.as_slice() == config,
            Payload::Product(tables) => tables.iter().zip(config).all(|(t, &r)| t[r] != Complex::new(0.0, 0.0)),
        }
    }

    fn tables(&self, grid: usize) -> Vec<Vec<Complex>> {
        match &self.payload {
            Payload::Basic(b) => b
                .iter()
                .map(|&r| {
                    let mut t = vec![Complex::new(0.0, 0.0); grid];
                    t[r] = Complex::new(1.0, 0.0);
                    t
                })
                .collect(),
            Payload::Product(tables) => tables.clone(),
        }
    }
}

/// Support of one particle's factor in a term.
fn particle_support(term: &Term, s: usize, grid: usize) -> Vec<bool> {
    match &term.payload {
        Payload::Basic(b) => (0..grid).map(|r| r == b[s]).collect(),
        Payload::Product(t) => t[s].iter().map(|a| *a != Complex::new(0.0, 0.0)).collect(),
    }
}

fn disjoint(a: &Term, b: &Term, particles: usize, grid: usize) -> bool {
    (0..particles).any(|s| {
        let (sa, sb) = (particle_support(a, s, grid), particle_support(b, s, grid));
        !sa.iter().zip(&sb).any(|(x, y)| *x && *y)
    })
}

/// Sum of terms with pairwise disjoint supports, so at most one term contributes
/// to any configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct CanonicalState {
    pub particles: usize,
    pub grid: usize,
    pub statistics: Statistics,
    pub range: usize,
    pub terms: Vec<Term>,
    pub term_cap: usize,
}

impl CanonicalState {
    /// Validates shapes and disjointness, then rescales coefficients to unit norm.
    pub fn new(particles: usize, grid: usize, statistics: Statistics, terms: Vec<Term>) -> Result<Self> {
        Self::with_cap(particles, grid, statistics, terms, DEFAULT_TERM_CAP)
    }

    pub fn with_cap(particles: usize, grid: usize, statistics: Statistics, mut terms: Vec<Term>, term_cap: usize) -> Result<Self> {
        if terms.len() > term_cap {
            return Err(Error::SizeCap { size: terms.len(), cap: term_cap });
        }
        for t in &terms {
            match &t.payload {
                Payload::Basic(b) => {
                    if b.len() != particles || b.iter().any(|&r| r >= grid) {
                        return Err(Error::DimensionMismatch(format!("basic term {b:?} does not fit {particles} particles on {grid} points")));
                    }
                }
                Payload::Product(tables) => {
                    if tables.len() != particles || tables.iter().any(|x| x.len() != grid) {
                        return Err(Error::DimensionMismatch(format!("product term needs {particles} tables of {grid} entries")));
                    }
                    for x in tables {
                        let n: f64 = x.iter().map(|a| a.norm_sqr()).sum();
                        if (n - 1.0).abs() > NORM_TOL {
                            return Err(Error::Domain(format!("product table has norm² {n}, expected 1")));
                        }
                    }
                }
            }
        }
        for i in 0..terms.len() {
            for j in i + 1..terms.len() {
                if !disjoint(&terms[i], &terms[j], particles, grid) {
                    return Err(Error::NotOrthogonal(i, j));
                }
            }
        }
        let norm = terms.iter().map(|t| t.coef.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::AllAnnihilated);
        }
        for t in &mut terms {
            t.coef /= norm;
        }
        Ok(CanonicalState { particles, grid, statistics, range: 0, terms, term_cap })
    }

    /// Index of the term supporting `config`, if any.
    pub fn contributing_term(&self, config: &[usize]) -> Option<usize> {
        self.terms.iter().position(|t| t.supports(config))
    }

    /// `⟨r̄|Ψ⟩`, taken from the single term whose support holds `r̄`.
    pub fn canonical_amplitude(&self, config: &[usize]) -> Complex {
        match self.contributing_term(config) {
            Some(j) => self.terms[j].amplitude(config),
            None => Complex::new(0.0, 0.0),
        }
    }

    /// Amplitude of the symmetrized state: each term's tables combined by
    /// determinant or permanent.
    pub fn symmetrized_amplitude(&self, config: &[usize]) -> Result<Complex> {
        let mut total = Complex::new(0.0, 0.0);
        for t in &self.terms {
            total += t.coef * symmetrize::symmetrized_amplitude(&t.tables(self.grid), config, self.statistics)?;
        }
        Ok(total)
    }

    /// Dense amplitudes in mixed radix, first particle most significant.
    pub fn flatten(&self) -> Result<Vec<Complex>> {
        let size = self.grid.checked_pow(self.particles as u32).unwrap_or(usize::MAX);
        if size > MAX_FLAT {
            return Err(Error::SizeCap { size, cap: MAX_FLAT });
        }
        let mut config = vec![0usize; self.particles];
        let mut out = Vec::with_capacity(size);
        for _ in 0..size {
            out.push(self.canonical_amplitude(&config));
            for s in (0..self.particles).rev() {
                config[s] += 1;
                if config[s] < self.grid {
                    break;
                }
                config[s] = 0;
            }
        }
        Ok(out)
    }

    /// Every configuration with modulus at least `g`, in descending modulus.
    ///
    /// Product terms are searched best-first over per-particle entries sorted by
    /// modulus, so the work per reported item is logarithmic in the heap size.
    pub fn enumerate_large_amplitudes(&self, g: f64) -> Result<Vec<(Vec<usize>, Complex)>> {
        if !(g > 0.0) {
            return Err(Error::Domain(format!("threshold must be positive, got {g}")));
        }
        let mut out = Vec::new();
        for t in &self.terms {
            match &t.payload {
                Payload::Basic(b) => {
                    if t.coef.norm() >= g {
                        out.push((b.clone(), t.coef));
                    }
                }
                Payload::Product(tables) => best_first(t.coef, tables, g, &mut out),
            }
        }
        out.sort_by(|a, b| b.1.norm().total_cmp(&a.1.norm()).then_with(|| a.0.cmp(&b.0)));
        Ok(out)
    }

    /// Split term `j` at a configuration it supports into an extracted basic
    /// term and prefix-fixed product terms, raising the range by one.
    pub fn expand_range(&self, config: &[usize], j: usize) -> Result<CanonicalState> {
        let term = self.terms.get(j).ok_or(Error::NotContributing(j))?;
        let Payload::Product(tables) = &term.payload else {
            return Err(Error::NotContributing(j));
        };
        if config.len() != self.particles || !term.supports(config) {
            return Err(Error::NotContributing(j));
        }
        if self.terms.len() + self.particles > self.term_cap {
            return Err(Error::SizeCap { size: self.terms.len() + self.particles, cap: self.term_cap });
        }
        let zero = Complex::new(0.0, 0.0);
        let mut pieces = vec![Term::basic(term.amplitude(config), config.to_vec())];
        let mut prefix = term.coef;
        for h in 0..self.particles {
            let mut rest = tables[h].clone();
            rest[config[h]] = zero;
            let n = rest.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            if n > 0.0 {
                let mut piece = Vec::with_capacity(self.particles);
                for (s, t) in tables.iter().enumerate() {
                    match s.cmp(&h) {
                        Ordering::Less => {
                            let mut d = vec![zero; self.grid];
                            d[config[s]] = Complex::new(1.0, 0.0);
                            piece.push(d);
                        }
                        Ordering::Equal => piece.push(rest.iter().map(|a| a / n).collect()),
                        Ordering::Greater => piece.push(t.clone()),
                    }
                }
                pieces.push(Term { coef: prefix * n, payload: Payload::Product(piece) });
            }
            prefix *= tables[h][config[h]];
        }
        let mut terms = self.terms.clone();
        terms.splice(j..=j, pieces);
        Ok(CanonicalState { terms, range: self.range + 1, ..self.clone() })
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let stats = match self.statistics {
            Statistics::Fermion => "fermion",
            Statistics::Boson => "boson",
        };
        let _ = writeln!(s, "{CANON_HEADER}");
        let _ = writeln!(s, "statistics {stats}");
        let _ = writeln!(s, "particles {}", self.particles);
        let _ = writeln!(s, "grid {}", self.grid);
        let _ = writeln!(s, "range {}", self.range);
        let _ = writeln!(s, "terms {}", self.terms.len());
        for t in &self.terms {
            match &t.payload {
                Payload::Basic(b) => {
                    let _ = write!(s, "basic {:?} {:?}", t.coef.re, t.coef.im);
                    for r in b {
                        let _ = write!(s, " {r}");
                    }
                    s.push('\n');
                }
                Payload::Product(tables) => {
                    let _ = writeln!(s, "product {:?} {:?}", t.coef.re, t.coef.im);
                    for tab in tables {
                        s.push_str("table");
                        for a in tab {
                            let _ = write!(s, " {:?} {:?}", a.re, a.im);
                        }
                        s.push('\n');
                    }
                }
            }
        }
        s
    }

    pub fn from_text(text: &str) -> Result<CanonicalState> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty());
        let mut next = |what: &str| lines.next().ok_or_else(|| Error::parse(0, format!("missing {what}")));
        let (ln, head) = next("header")?;
        if head != CANON_HEADER {
            return Err(Error::parse(ln, format!("expected header {CANON_HEADER}")));
        }
        let mut field = |key: &str| -> Result<(usize, String)> {
            let (ln, l) = next(key)?;
            let v = l.strip_prefix(key).map(str::trim).ok_or_else(|| Error::parse(ln, format!("expected {key}")))?;
            Ok((ln, v.to_string()))
        };
        let (ln, stats) = field("statistics")?;
        let statistics = match stats.as_str() {
            "fermion" => Statistics::Fermion,
            "boson" => Statistics::Boson,
            other => return Err(Error::parse(ln, format!("unknown statistics {other}"))),
        };
        let int = |(ln, v): (usize, String)| v.parse::<usize>().map_err(|e| Error::parse(ln, e.to_string()));
        let particles = int(field("particles")?)?;
        let grid = int(field("grid")?)?;
        let range = int(field("range")?)?;
        let count = int(field("terms")?)?;
        let mut terms = Vec::with_capacity(count);
        for _ in 0..count {
            let (ln, l) = next("term")?;
            let mut it = l.split_whitespace();
            let kind = it.next().unwrap_or_default();
            let nums: Vec<&str> = it.collect();
            let float = |x: &str| x.parse::<f64>().map_err(|e| Error::parse(ln, e.to_string()));
            if nums.len() < 2 {
                return Err(Error::parse(ln, "term needs a coefficient"));
            }
            let coef = Complex::new(float(nums[0])?, float(nums[1])?);
            match kind {
                "basic" => {
                    let cfg = nums[2..].iter().map(|x| x.parse::<usize>().map_err(|e| Error::parse(ln, e.to_string()))).collect::<Result<Vec<_>>>()?;
                    terms.push(Term::basic(coef, cfg));
                }
                "product" => {
                    let mut tables = Vec::with_capacity(particles);
                    for _ in 0..particles {
                        let (tl, l) = next("table")?;
                        let rest = l.strip_prefix("table").ok_or_else(|| Error::parse(tl, "expected table"))?;
                        let v = rest.split_whitespace().map(|x| x.parse::<f64>().map_err(|e| Error::parse(tl, e.to_string()))).collect::<Result<Vec<_>>>()?;
                        if v.len() % 2 != 0 {
                            return Err(Error::parse(tl, "table needs re/im pairs"));
                        }
                        tables.push(v.chunks(2).map(|p| Complex::new(p[0], p[1])).collect());
                    }
                    terms.push(Term { coef, payload: Payload::Product(tables) });
                }
                other => return Err(Error::parse(ln, format!("unknown term kind {other}"))),
            }
        }
        let mut state = CanonicalState::new(particles, grid, statistics, terms)?;
        state.range = range;
        Ok(state)
    }
}

struct Frontier {
    modulus: f64,
    index: Vec<usize>,
}

impl PartialEq for Frontier {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Frontier {}
impl PartialOrd for Frontier {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Frontier {
    fn cmp(&self, other: &Self) -> Ordering {
        self.modulus.total_cmp(&other.modulus).then_with(|| other.index.cmp(&self.index))
    }
}

fn best_first(coef: Complex, tables: &[Vec<Complex>], g: f64, out: &mut Vec<(Vec<usize>, Complex)>) {
    let order: Vec<Vec<usize>> = tables
        .iter()
        .map(|t| {
            let mut o: Vec<usize> = (0..t.len()).collect();
            o.sort_by(|&a, &b| t[b].norm().total_cmp(&t[a].norm()).then(a.cmp(&b)));
            o
        })
        .collect();
    let modulus = |idx: &[usize]| idx.iter().enumerate().fold(coef.norm(), |m, (s, &i)| m * tables[s][order[s][i]].norm());
    let k = tables.len();
    let start = vec![0usize; k];
    let mut heap = BinaryHeap::new();
    heap.push(Frontier { modulus: modulus(&start), index: start });
    while let Some(Frontier { modulus: m, index }) = heap.pop() {
        if m < g {
            break;
        }
        let config: Vec<usize> = index.iter().enumerate().map(|(s, &i)| order[s][i]).collect();
        let amp = tables.iter().zip(&config).fold(coef, |a, (t, &r)| a * t[r]);
        out.push((config, amp));
        // Each index tuple has a unique parent: decrement its last nonzero coordinate.
        let last = index.iter().rposition(|&i| i > 0).unwrap_or(0);
        for s in last..k {
            if index[s] + 1 < tables[s].len() {
                let mut child = index.clone();
                child[s] += 1;
                let cm = modulus(&child);
                if cm >= g {
                    heap.push(Frontier { modulus: cm, index: child });
                }
            }
        }
    }
}
