use proptest::prelude::*;

use aqsim::fd::{Boundary, Grid1D, Potential, Propagator};
use aqsim::free_aq::{Part, Population, ReactionMode};
use aqsim::hierarchy::{symmetrized_amplitude, CanonicalState, Payload, Statistics, Term};
use aqsim::rng::{stream, unit};
use aqsim::scenario::normalize_value;
use aqsim::state::{grain_expand, hadamard_pair, GrainPolicy, GrainedWaveFunction};
use aqsim::{Complex, Units};

fn c(re: f64, im: f64) -> Complex {
    Complex::new(re, im)
}

fn random_table(n: usize, rng: &mut impl rand::RngCore) -> Vec<Complex> {
    let t: Vec<Complex> = (0..n).map(|_| c(unit(rng) - 0.5, unit(rng) - 0.5)).collect();
    let norm = t.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    t.into_iter().map(|a| a / norm).collect()
}

fn decode(mut i: usize, k: usize, n: usize) -> Vec<usize> {
    let mut cfg = vec![0; k];
    for s in (0..k).rev() {
        cfg[s] = i % n;
        i /= n;
    }
    cfg
}

/// A product state refined at up to three random supported configurations.
fn random_canonical(seed: u64, k: usize, n: usize, expansions: usize) -> CanonicalState {
    let mut rng = stream(seed, 0, 0);
    let tables = (0..k).map(|_| random_table(n, &mut rng)).collect();
    let mut s = CanonicalState::new(k, n, Statistics::Boson, vec![Term::product(c(1.0, 0.0), tables).unwrap()]).unwrap();
    for _ in 0..expansions {
        let flat = s.flatten().unwrap();
        let candidates: Vec<(Vec<usize>, usize)> = (0..flat.len())
            .map(|i| decode(i, k, n))
            .filter_map(|cfg| {
                let j = s.contributing_term(&cfg)?;
                matches!(s.terms[j].payload, Payload::Product(_)).then_some((cfg, j))
            })
            .collect();
        if candidates.is_empty() {
            break;
        }
        let (cfg, j) = &candidates[(unit(&mut rng) * candidates.len() as f64) as usize];
        s = s.expand_range(cfg, *j).unwrap();
    }
    s
}

fn random_state(seed: u64, len: usize, eps: f64) -> GrainedWaveFunction {
    let mut rng = stream(seed, 1, 0);
    let amps: Vec<Complex> = (0..len).map(|_| c(unit(&mut rng) - 0.5, unit(&mut rng) - 0.5)).collect();
    GrainedWaveFunction::from_dense(&amps, GrainPolicy::new(eps).unwrap()).unwrap().normalized().unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn enumeration_equals_brute_force(seed in any::<u64>(), k in 1usize..=3, n in 2usize..=8, ex in 0usize..=3, q in 0.05f64..0.95) {
        let s = random_canonical(seed, k, n, ex);
        let flat = s.flatten().unwrap();
        let mut mods: Vec<f64> = flat.iter().map(|a| a.norm()).filter(|&m| m > 0.0).collect();
        mods.sort_by(f64::total_cmp);
        let i = ((mods.len() - 1) as f64 * q) as usize;
        let g = if i + 1 < mods.len() { 0.5 * (mods[i] + mods[i + 1]) } else { mods[i] };
        let mut want: Vec<Vec<usize>> = (0..flat.len()).filter(|&i| flat[i].norm() >= g).map(|i| decode(i, k, n)).collect();
        let got = s.enumerate_large_amplitudes(g).unwrap();
        let mut got_cfgs: Vec<Vec<usize>> = got.iter().map(|e| e.0.clone()).collect();
        want.sort();
        got_cfgs.sort();
        prop_assert_eq!(got_cfgs, want);
        for (cfg, a) in &got {
            let idx = cfg.iter().fold(0, |acc, &r| acc * n + r);
            prop_assert!((a - flat[idx]).norm() <= 1e-15);
        }
    }

    #[test]
    fn expansion_preserves_amplitudes(seed in any::<u64>(), k in 1usize..=3, n in 2usize..=6) {
        let s0 = random_canonical(seed, k, n, 0);
        let s3 = random_canonical(seed, k, n, 3);
        for (a, b) in s0.flatten().unwrap().iter().zip(s3.flatten().unwrap()) {
            prop_assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn reduce_is_idempotent_and_bounded(seed in any::<u64>(), len in 1usize..200, eps in 0.02f64..0.9) {
        let psi = random_state(seed, len, eps);
        match psi.reduce() {
            Ok(r) => {
                prop_assert!(r.len() <= GrainPolicy::new(eps).unwrap().max_entries());
                prop_assert_eq!(r.reduce().unwrap(), r.clone());
                prop_assert!(r.is_normalized());
            }
            Err(e) => prop_assert!(matches!(e, aqsim::Error::AllAnnihilated)),
        }
    }

    #[test]
    fn grain_counts_track_born_weights(seed in any::<u64>(), len in 1usize..6) {
        let psi = random_state(seed, len, 0.5);
        let eps = 0.01;
        let g = grain_expand(&psi, eps).unwrap();
        for &(label, count) in &g.counts {
            let p = psi.amplitude(label).norm_sqr();
            prop_assert!((count as f64 * eps * eps - p).abs() <= 0.5 * eps * eps + 1e-12 || count == 1);
        }
    }

    #[test]
    fn hadamard_pair_is_an_involution(seed in any::<u64>()) {
        let psi = random_state(seed, 4, 0.5);
        let twice = hadamard_pair(&hadamard_pair(&psi).unwrap()).unwrap();
        for l in 0..4 {
            prop_assert!((twice.amplitude(l) - psi.amplitude(l)).norm() < 1e-15);
        }
    }

    #[test]
    fn exchange_symmetry(seed in any::<u64>(), k in 2usize..=4, a in 0usize..4, b in 0usize..4) {
        prop_assume!(a < k && b < k && a != b);
        let mut rng = stream(seed, 2, 0);
        let orbitals: Vec<Vec<Complex>> = (0..k).map(|_| random_table(5, &mut rng)).collect();
        let config: Vec<usize> = (0..k).map(|_| (unit(&mut rng) * 5.0) as usize).collect();
        let mut swapped = config.clone();
        swapped.swap(a, b);
        let f = symmetrized_amplitude(&orbitals, &config, Statistics::Fermion).unwrap();
        let fs = symmetrized_amplitude(&orbitals, &swapped, Statistics::Fermion).unwrap();
        prop_assert!((f + fs).norm() < 1e-12);
        let bo = symmetrized_amplitude(&orbitals, &config, Statistics::Boson).unwrap();
        let bs = symmetrized_amplitude(&orbitals, &swapped, Statistics::Boson).unwrap();
        prop_assert!((bo - bs).norm() < 1e-12);
    }

    #[test]
    fn r_reduce_keeps_net_counts(seed in any::<u64>(), branches in 1usize..5, phi in 0.0f64..1.5) {
        let psi = random_state(seed, branches, 0.5);
        let mut pop = Population::from_wavefunction(&psi, 1e3).unwrap();
        pop.rotate(phi, 0.01, ReactionMode::Exact).unwrap();
        let before: Vec<(f64, f64)> = (0..branches).map(|j| (pop.net(Part::Alpha, j), pop.net(Part::Beta, j))).collect();
        pop.r_reduce();
        let after: Vec<(f64, f64)> = (0..branches).map(|j| (pop.net(Part::Alpha, j), pop.net(Part::Beta, j))).collect();
        for (x, y) in before.iter().zip(&after) {
            prop_assert!((x.0 - y.0).abs() < 1e-9 && (x.1 - y.1).abs() < 1e-9);
        }
    }

    #[test]
    fn propagation_is_unitary_and_reversible(x0 in -2.0f64..2.0, k0 in -2.0f64..2.0, steps in 1usize..40) {
        let grid = Grid1D::spanning(-10.0, 10.0, 256, Boundary::Periodic).unwrap();
        let psi0 = grid.sample(|x| Complex::from_polar((-(x - x0) * (x - x0)).exp(), k0 * x)).unwrap();
        let v = Potential::harmonic(&grid, 1.0, 0.5, 0.0);
        let fwd = Propagator::new(grid, v.clone(), Units::default(), 0.01).unwrap();
        let back = Propagator::new(grid, v, Units::default(), -0.01).unwrap();
        let mut psi = psi0.clone();
        fwd.run(&mut psi, steps).unwrap();
        let n: f64 = psi.iter().map(|a| a.norm_sqr()).sum();
        prop_assert!((n - 1.0).abs() < 1e-10 * steps as f64);
        back.run(&mut psi, steps).unwrap();
        let err = psi.iter().zip(&psi0).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        prop_assert!(err < 1e-8);
    }

    #[test]
    fn number_normalization_is_idempotent(x in any::<f64>(), i in any::<i64>()) {
        for s in [format!("{x}"), format!("{x:e}"), i.to_string()] {
            let once = normalize_value(&s);
            prop_assert_eq!(normalize_value(&once), once.clone());
        }
    }
}
