use nalgebra::DMatrix;

use super::*;
use crate::{Complex, Error};

fn c(re: f64, im: f64) -> Complex {
    Complex::new(re, im)
}

fn random_table(n: usize, rng: &mut impl rand::RngCore) -> Vec<Complex> {
    let t: Vec<Complex> = (0..n).map(|_| c(crate::rng::unit(rng) - 0.5, crate::rng::unit(rng) - 0.5)).collect();
    let norm = t.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    t.into_iter().map(|a| a / norm).collect()
}

fn particles(n: usize, options: usize) -> Vec<Particle> {
    (0..n).map(|i| Particle::new(i, 1.0, (0..options).map(|r| r as f64).collect())).collect()
}

/// Entanglement through singular values of the reshaped amplitude matrix.
fn schmidt_entanglement(dense: &[Complex], radix: &[usize], k: usize) -> f64 {
    let rest = dense.len() / radix[k];
    let mut m = DMatrix::<Complex>::zeros(radix[k], rest);
    for (i, &a) in dense.iter().enumerate() {
        let mut d = vec![0; radix.len()];
        let mut x = i;
        for s in (0..radix.len()).rev() {
            d[s] = x % radix[s];
            x /= radix[s];
        }
        let mut col = 0;
        for s in 0..radix.len() {
            if s != k {
                col = col * radix[s] + d[s];
            }
        }
        m[(d[k], col)] = a;
    }
    let sv = m.svd(false, false).singular_values;
    let total: f64 = sv.iter().map(|s| s * s).sum();
    let top = sv.iter().fold(0.0f64, |a, &s| a.max(s));
    1.0 - top * top / total
}

#[test]
fn trivial_tables_give_one_basic_state() {
    let ps = vec![Particle::new(0, 1.0, vec![0.0]), Particle::new(1, 1.0, vec![2.0])];
    let h = HierState::product(ps, vec![vec![c(1.0, 0.0)], vec![c(1.0, 0.0)]]).unwrap();
    let psi = h.flatten().unwrap();
    assert_eq!(psi.entries(), &[(0, c(1.0, 0.0))]);
}

#[test]
fn product_tables_flatten_to_tensor_product() {
    let mut rng = crate::rng::stream(3, 0, 0);
    let (a, b) = (random_table(3, &mut rng), random_table(4, &mut rng));
    let ps = vec![Particle::new(0, 1.0, vec![0.0, 1.0, 2.0]), Particle::new(1, 1.0, vec![0.0, 1.0, 2.0, 3.0])];
    let h = HierState::product(ps, vec![a.clone(), b.clone()]).unwrap();
    let dense = h.flatten().unwrap().to_dense(12);
    for i in 0..3 {
        for j in 0..4 {
            assert!((dense[i * 4 + j] - a[i] * b[j]).norm() < 1e-15);
        }
    }
    assert!(entanglement_of(&dense, &[3, 4], 0) < 1e-12);
}

#[test]
fn three_level_chain_matches_brute_force() {
    let mut rng = crate::rng::stream(11, 0, 0);
    let t1 = random_table(2, &mut rng);
    let t2: Vec<_> = (0..2).map(|_| random_table(2, &mut rng)).collect();
    let t3: Vec<_> = (0..4).map(|_| random_table(2, &mut rng)).collect();
    let levels = vec![
        LevelTable::free(t1.clone()),
        LevelTable { context: vec![0], tables: t2.clone() },
        LevelTable { context: vec![0, 1], tables: t3.clone() },
    ];
    let h = HierState::new(particles(3, 2), levels, None).unwrap();
    let psi = h.flatten().unwrap();
    assert!(psi.is_normalized());
    let dense = psi.to_dense(8);
    for r1 in 0..2 {
        for r2 in 0..2 {
            for r3 in 0..2 {
                let brute = t1[r1] * t2[r1][r2] * t3[r1 * 2 + r2][r3];
                assert_eq!(dense[r1 * 4 + r2 * 2 + r3], brute);
            }
        }
    }
}

#[test]
fn flatten_size_cap() {
    let tables = vec![vec![c(0.6, 0.0), c(0.8, 0.0)]; 21];
    let h = HierState::product(particles(21, 2), tables).unwrap();
    assert!(matches!(h.flatten(), Err(Error::SizeCap { cap: MAX_FLAT, .. })));
}

#[test]
fn depth_bound_is_enforced() {
    let mut rng = crate::rng::stream(5, 0, 0);
    let levels = vec![
        LevelTable::free(random_table(2, &mut rng)),
        LevelTable::free(random_table(2, &mut rng)),
        LevelTable { context: vec![0], tables: vec![random_table(2, &mut rng), random_table(2, &mut rng)] },
    ];
    assert!(matches!(HierState::new(particles(3, 2), levels, Some(1)), Err(Error::Domain(_))));
}

#[test]
fn depth_bounded_memory_is_linear() {
    let build = |n: usize| {
        let mut rng = crate::rng::stream(9, n as u64, 0);
        let mut levels = vec![LevelTable::free(random_table(4, &mut rng))];
        for k in 1..n {
            levels.push(LevelTable { context: vec![k - 1], tables: (0..4).map(|_| random_table(4, &mut rng)).collect() });
        }
        HierState::new(particles(n, 4), levels, Some(1)).unwrap()
    };
    let sizes: Vec<usize> = (2..8).map(|n| build(n).stored_size()).collect();
    for w in sizes.windows(2) {
        assert_eq!(w[1] - w[0], 16);
    }
    assert_eq!(build(7).flat_size(), 4usize.pow(7));
}

#[test]
fn entanglement_matches_schmidt_oracle() {
    let mut rng = crate::rng::stream(21, 0, 0);
    let levels = vec![
        LevelTable::free(random_table(3, &mut rng)),
        LevelTable { context: vec![0], tables: (0..3).map(|_| random_table(2, &mut rng)).collect() },
        LevelTable { context: vec![1], tables: (0..2).map(|_| random_table(3, &mut rng)).collect() },
    ];
    let h = HierState::new(particles(3, 3).into_iter().enumerate().map(|(i, mut p)| {
        if i == 1 {
            p.positions.truncate(2);
        }
        p
    }).collect(), levels, None)
    .unwrap();
    let radix = [3, 2, 3];
    let dense = h.flatten().unwrap().to_dense(18);
    for k in 0..3 {
        let a = entanglement_of(&dense, &radix, k);
        let b = schmidt_entanglement(&dense, &radix, k);
        assert!((a - b).abs() < 1e-12, "k={k}: {a} vs {b}");
    }
}

#[test]
fn factorized_particle_is_lowered_without_changing_amplitudes() {
    let mut rng = crate::rng::stream(31, 0, 0);
    let t0 = random_table(2, &mut rng);
    let t1 = random_table(3, &mut rng);
    let t2: Vec<_> = (0..2).map(|_| random_table(2, &mut rng)).collect();
    // Level 1 carries a context on level 0 but the same table in every branch.
    let levels = vec![
        LevelTable::free(t0),
        LevelTable { context: vec![0], tables: vec![t1.clone(), t1] },
        LevelTable { context: vec![0], tables: t2 },
    ];
    let mut ps = particles(3, 2);
    ps[1].positions = vec![0.0, 1.0, 2.0];
    let mut h = HierState::new(ps, levels, None).unwrap();
    h.eta = 1e-6;
    let before = h.flatten().unwrap();
    let mut lowered = Vec::new();
    for _ in 0..DEFAULT_CONFIRMATIONS {
        let obs = h.observe().unwrap();
        lowered.extend(h.restructure(&obs).unwrap().lowered);
    }
    assert_eq!(lowered, vec![1]);
    assert!(h.is_lowered(1));
    assert!(h.levels[1].context.is_empty());
    let after = h.flatten().unwrap();
    for (a, b) in before.entries().iter().zip(after.entries()) {
        assert_eq!(a.0, b.0);
        assert!((a.1 - b.1).norm() < 1e-9);
    }
    let tree = h.tree().unwrap();
    assert!(tree.children.iter().any(|n| n.particle == Some(1) && n.level == 1 && n.children.is_empty()));
}

#[test]
fn lowering_needs_consecutive_confirmations() {
    let h0 = HierState::product(particles(2, 2), vec![vec![c(0.6, 0.0), c(0.8, 0.0)]; 2]).unwrap();
    let mut h = h0.clone();
    let quiet = Observation { entanglement: vec![0.0, 0.0], correlations: vec![] };
    let loud = Observation { entanglement: vec![0.5, 0.0], correlations: vec![] };
    for _ in 0..DEFAULT_CONFIRMATIONS - 1 {
        assert!(h.restructure(&quiet).unwrap().lowered.is_empty());
    }
    assert!(h.restructure(&loud).unwrap().lowered == vec![1]);
    for _ in 0..DEFAULT_CONFIRMATIONS - 1 {
        assert!(h.restructure(&quiet).unwrap().lowered.is_empty());
    }
    assert_eq!(h.restructure(&quiet).unwrap().lowered, vec![0]);
}

#[test]
fn correlated_particles_are_lifted() {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let levels = vec![
        LevelTable::free(vec![c(s, 0.0), c(s, 0.0)]),
        LevelTable { context: vec![0], tables: vec![vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(1.0, 0.0)]] },
    ];
    let ps = vec![Particle::new(0, 1.0, vec![-1.0, 1.0]), Particle::new(1, 3.0, vec![-1.0, 1.0])];
    let mut h = HierState::new(ps, levels, None).unwrap();
    let obs = h.observe().unwrap();
    assert!((obs.correlations[0].2 - 1.0).abs() < 1e-12);
    let r = h.restructure(&obs).unwrap();
    assert_eq!(r.lifted, vec![(0, 1)]);
    let tree = h.tree().unwrap();
    let parent = tree.children.iter().find(|n| n.particle.is_none()).unwrap();
    let ids: Vec<_> = parent.children.iter().map(|n| n.particle).collect();
    assert_eq!(ids, vec![Some(0), Some(1)]);
    let offsets = parent.relative_offsets();
    let weighted: f64 = parent.children.iter().zip(&offsets).map(|(n, o)| n.mass * o).sum();
    assert!(weighted.abs() < 1e-12);
    assert!(parent.children.iter().all(|n| n.level > parent.level));
}

#[test]
fn entangled_random_tables_are_left_alone() {
    let mut rng = crate::rng::stream(41, 0, 0);
    let levels = vec![
        LevelTable::free(random_table(3, &mut rng)),
        LevelTable { context: vec![0], tables: (0..3).map(|_| random_table(3, &mut rng)).collect() },
    ];
    let mut h = HierState::new(particles(2, 3), levels, None).unwrap();
    let before = h.clone();
    let radix = [3, 3];
    let dense = h.flatten().unwrap().to_dense(9);
    for k in 0..2 {
        assert!(schmidt_entanglement(&dense, &radix, k) > DEFAULT_ETA);
    }
    for _ in 0..2 * DEFAULT_CONFIRMATIONS {
        let obs = h.observe().unwrap();
        assert_eq!(h.restructure(&obs).unwrap(), Restructured::default());
    }
    assert_eq!(h.levels, before.levels);
}

#[test]
fn chain_tree_levels_increase() {
    let mut rng = crate::rng::stream(43, 0, 0);
    let levels = vec![
        LevelTable::free(random_table(2, &mut rng)),
        LevelTable { context: vec![0], tables: (0..2).map(|_| random_table(2, &mut rng)).collect() },
        LevelTable { context: vec![1], tables: (0..2).map(|_| random_table(2, &mut rng)).collect() },
    ];
    let h = HierState::new(particles(3, 2), levels, Some(1)).unwrap();
    let tree = h.tree().unwrap();
    assert_eq!(tree.depth(), 4);
    fn check(n: &HierNode) {
        for ch in &n.children {
            assert!(ch.level > n.level);
            check(ch);
        }
    }
    check(&tree);
    assert!(h.node_of(2).unwrap().unwrap().children.is_empty());
}

// Canonical states.

fn canon_3term(seed: u64) -> CanonicalState {
    let mut rng = crate::rng::stream(seed, 0, 0);
    // Particle 0 supports split the grid so terms cannot overlap.
    let mask = |t: Vec<Complex>, keep: &[usize]| -> Vec<Complex> {
        t.into_iter().enumerate().map(|(r, a)| if keep.contains(&r) { a } else { c(0.0, 0.0) }).collect()
    };
    let p1 = Term::product(c(0.7, 0.1), vec![mask(random_table(4, &mut rng), &[0, 1]), random_table(4, &mut rng)]).unwrap();
    let p2 = Term::product(c(-0.3, 0.4), vec![mask(random_table(4, &mut rng), &[2]), random_table(4, &mut rng)]).unwrap();
    let b = Term::basic(c(0.2, -0.5), vec![3, 1]);
    CanonicalState::new(2, 4, Statistics::Fermion, vec![p1, p2, b]).unwrap()
}

/// Dense expansion of the sum of every term's tensor, independent of support lookup.
fn brute_dense(s: &CanonicalState) -> Vec<Complex> {
    let n = s.grid.pow(s.particles as u32);
    let mut out = vec![c(0.0, 0.0); n];
    for t in &s.terms {
        for (i, o) in out.iter_mut().enumerate() {
            let mut cfg = vec![0; s.particles];
            let mut x = i;
            for k in (0..s.particles).rev() {
                cfg[k] = x % s.grid;
                x /= s.grid;
            }
            *o += match &t.payload {
                Payload::Basic(b) if *b == cfg => t.coef,
                Payload::Basic(_) => c(0.0, 0.0),
                Payload::Product(tab) => tab.iter().zip(&cfg).fold(t.coef, |a, (row, &r)| a * row[r]),
            };
        }
    }
    out
}

fn term_dense(t: &Term, s: &CanonicalState) -> Vec<Complex> {
    let single = CanonicalState { terms: vec![Term { coef: c(1.0, 0.0), payload: t.payload.clone() }], ..s.clone() };
    brute_dense(&single)
}

#[test]
fn basic_term_amplitude_is_its_coefficient() {
    let s = CanonicalState::new(2, 3, Statistics::Boson, vec![Term::basic(c(0.0, 2.0), vec![1, 2])]).unwrap();
    assert_eq!(s.canonical_amplitude(&[1, 2]), c(0.0, 1.0));
    assert_eq!(s.canonical_amplitude(&[2, 1]), c(0.0, 0.0));
}

#[test]
fn single_product_is_tensor_amplitude() {
    let a = vec![c(0.6, 0.0), c(0.0, 0.8)];
    let b = vec![c(0.0, 1.0), c(0.0, 0.0)];
    let s = CanonicalState::new(2, 2, Statistics::Fermion, vec![Term::product(c(1.0, 0.0), vec![a.clone(), b.clone()]).unwrap()]).unwrap();
    for i in 0..2 {
        for j in 0..2 {
            assert!((s.canonical_amplitude(&[i, j]) - a[i] * b[j]).norm() < 1e-15);
        }
    }
}

#[test]
fn mixed_state_sweep_matches_expansion() {
    let s = canon_3term(1);
    let brute = brute_dense(&s);
    let flat = s.flatten().unwrap();
    for (a, b) in flat.iter().zip(&brute) {
        assert!((a - b).norm() < 1e-14);
    }
    let norm: f64 = flat.iter().map(|a| a.norm_sqr()).sum();
    assert!((norm - 1.0).abs() < 1e-12);
}

#[test]
fn symmetrized_state_matches_permutation_oracle() {
    let s = canon_3term(2);
    let flat = s.flatten().unwrap();
    for r0 in 0..4 {
        for r1 in 0..4 {
            let oracle = (flat[r0 * 4 + r1] - flat[r1 * 4 + r0]) / 2f64.sqrt();
            assert!((s.symmetrized_amplitude(&[r0, r1]).unwrap() - oracle).norm() < 1e-14);
        }
    }
}

#[test]
fn overlapping_terms_rejected() {
    let t = vec![c(0.6, 0.0), c(0.8, 0.0)];
    let p = Term::product(c(1.0, 0.0), vec![t.clone(), t]).unwrap();
    let b = Term::basic(c(1.0, 0.0), vec![1, 0]);
    assert!(matches!(CanonicalState::new(2, 2, Statistics::Boson, vec![p, b]), Err(Error::NotOrthogonal(0, 1))));
}

#[test]
fn threshold_above_peak_is_empty() {
    let s = canon_3term(3);
    let peak = s.flatten().unwrap().iter().map(|a| a.norm()).fold(0.0, f64::max);
    assert!(s.enumerate_large_amplitudes(peak * 1.0001).unwrap().is_empty());
    assert_eq!(s.enumerate_large_amplitudes(peak).unwrap().len(), 1);
}

#[test]
fn tiny_threshold_lists_every_configuration() {
    let mut rng = crate::rng::stream(4, 0, 0);
    let s = CanonicalState::new(2, 4, Statistics::Boson, vec![Term::product(c(1.0, 0.0), vec![random_table(4, &mut rng), random_table(4, &mut rng)]).unwrap()]).unwrap();
    let list = s.enumerate_large_amplitudes(1e-300).unwrap();
    assert_eq!(list.len(), 16);
    let flat = s.flatten().unwrap();
    for (cfg, a) in &list {
        assert_eq!(*a, flat[cfg[0] * 4 + cfg[1]]);
    }
    assert!(list.windows(2).all(|w| w[0].1.norm() >= w[1].1.norm()));
}

#[test]
fn geometric_profile_count_matches_analytic() {
    let q: f64 = 0.5;
    let n = 8;
    let t: Vec<Complex> = (0..n).map(|r| c(q.powi(r as i32), 0.0)).collect();
    let s = CanonicalState::new(3, n, Statistics::Boson, vec![Term::product(c(1.0, 0.0), vec![t.clone(), t.clone(), t]).unwrap()]).unwrap();
    let z = (0..n).map(|r| q.powi(2 * r as i32)).sum::<f64>().sqrt();
    let top = z.powi(-3);
    // Modulus is top·q^(r1+r2+r3); choose a threshold between levels m=4 and m=5.
    let g = top * q.powf(4.5);
    let count = s.enumerate_large_amplitudes(g).unwrap().len();
    // Compositions of at most 4 into 3 nonnegative parts: C(4+3, 3).
    assert_eq!(count, 35);
}

#[test]
fn expand_range_preserves_amplitudes() {
    let s = canon_3term(5);
    let before = s.flatten().unwrap();
    let e = s.expand_range(&[1, 2], 0).unwrap();
    assert_eq!(e.range, s.range + 1);
    assert!(e.terms.len() <= s.terms.len() + s.particles);
    for (a, b) in before.iter().zip(e.flatten().unwrap()) {
        assert!((a - b).norm() < 1e-12);
    }
}

#[test]
fn extracted_peak_coefficient_is_product() {
    let a = vec![c(0.8, 0.0), c(0.6, 0.0), c(0.0, 0.0)];
    let b = vec![c(0.0, 0.6), c(0.0, 0.0), c(0.8, 0.0)];
    let s = CanonicalState::new(2, 3, Statistics::Fermion, vec![Term::product(c(1.0, 0.0), vec![a, b]).unwrap()]).unwrap();
    let e = s.expand_range(&[0, 2], 0).unwrap();
    assert_eq!(e.terms[0].payload, Payload::Basic(vec![0, 2]));
    assert!((e.terms[0].coef - c(0.8 * 0.8, 0.0)).norm() < 1e-15);
}

#[test]
fn double_expansion_keeps_payloads_orthogonal() {
    let s = canon_3term(6);
    let e1 = s.expand_range(&[0, 3], 0).unwrap();
    let j = e1.contributing_term(&[1, 1]).unwrap();
    let e2 = e1.expand_range(&[1, 1], j).unwrap();
    let dense: Vec<Vec<Complex>> = e2.terms.iter().map(|t| term_dense(t, &e2)).collect();
    for i in 0..dense.len() {
        for k in 0..dense.len() {
            let g: Complex = dense[i].iter().zip(&dense[k]).map(|(x, y)| x.conj() * y).sum();
            let want = if i == k { 1.0 } else { 0.0 };
            assert!((g - c(want, 0.0)).norm() < 1e-12, "gram[{i}][{k}] = {g}");
        }
    }
    for (a, b) in s.flatten().unwrap().iter().zip(e2.flatten().unwrap()) {
        assert!((a - b).norm() < 1e-12);
    }
}

#[test]
fn expand_rejects_non_contributing() {
    let s = canon_3term(7);
    assert!(matches!(s.expand_range(&[3, 1], 2), Err(Error::NotContributing(2))));
    assert!(matches!(s.expand_range(&[3, 0], 0), Err(Error::NotContributing(0))));
}

#[test]
fn canonical_text_round_trip() {
    let s = canon_3term(8).expand_range(&[0, 0], 0).unwrap();
    let text = s.to_text();
    assert!(text.starts_with(CANON_HEADER));
    let back = CanonicalState::from_text(&text).unwrap();
    assert_eq!(back.terms.len(), s.terms.len());
    for (a, b) in back.terms.iter().zip(&s.terms) {
        assert_eq!(a.payload, b.payload);
        assert!((a.coef - b.coef).norm() < 1e-15);
    }
    assert_eq!(back.range, 1);
    assert!(CanonicalState::from_text("AQSIM-CANON v0\n").is_err());
}
