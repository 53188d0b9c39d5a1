use std::f64::consts::PI;

use crate::aq::{
    cell_probabilities, form_measurement_ensemble, l1_distance, momentum_sweep, urn_draw, urn_measure, AccumulateMode, Bubble, BubbleConfig,
    CollisionClock, FlightLaw, Lagrangian, NormingCycle, ReinjectionDensity, VelocityCenter, VelocityLaw,
};
use crate::exec::Policy;
use crate::fd::{eigen_dense, moments, Boundary, Grid1D, Potential, Propagator};
use crate::hierarchy::Statistics;
use crate::mhtm::{measure_pairs, run_epr_demo, step_budget, trace_csv, EprConfig};
use crate::secq::{best_direction_gain, ground_oracle, minimize_energy, MinimizeOptions, Minimized, OrbitalSet, TwoBody};
use crate::state::{
    born_sample, emission_probability, emission_state, hadamard_pair, momentum_transform, GrainPolicy, GrainedWaveFunction, GridMeta, LabelFormat,
    Mixture,
};
use crate::{Complex, Error, Result, Units};

use super::{file_header, OutputFile, ScenarioConfig, ScenarioSpec};

pub(super) fn dispatch(spec: &ScenarioSpec, cfg: &ScenarioConfig) -> Result<Vec<OutputFile>> {
    let out = Out { module: spec.module, cfg };
    match spec.name {
        "free-gaussian" => free_gaussian(&out),
        "double-well" => double_well(&out),
        "epr-hadamard" => epr_hadamard(&out),
        "emission" => emission(&out),
        "urn" => urn(&out),
        "two-fermion" => two_fermion(&out),
        "aq-vs-fd" => aq_vs_fd(&out),
        "mhtm-epr" => mhtm_epr(&out),
        "mhtm-budget" => mhtm_budget(&out),
        other => Err(Error::Config(format!("unknown scenario {other:?}"))),
    }
}

/// Shortest round-trip decimal, with negative zero printed as `0`.
fn num(x: f64) -> String {
    if x == 0.0 {
        "0".into()
    } else {
        format!("{x}")
    }
}

struct Out<'a> {
    module: &'a str,
    cfg: &'a ScenarioConfig,
}

impl Out<'_> {
    fn table(&self, name: &str, columns: &str, rows: impl IntoIterator<Item = String>) -> OutputFile {
        let mut contents = file_header(self.module, self.cfg);
        contents.push_str(columns);
        contents.push('\n');
        for r in rows {
            contents.push_str(&r);
            contents.push('\n');
        }
        OutputFile { name: name.into(), contents }
    }

    fn summary(&self, rows: Vec<(&str, String)>) -> OutputFile {
        self.table("summary.csv", "key,value", rows.into_iter().map(|(k, v)| format!("{k},{v}")))
    }

    fn policy(&self) -> Policy {
        if self.cfg.threads > 1 {
            Policy::Parallel
        } else {
            Policy::Sequential
        }
    }
}

fn free_gaussian(o: &Out) -> Result<Vec<OutputFile>> {
    let c = o.cfg;
    let units = Units::default();
    let (alpha, t_max, dt, samples, diffusion) = (c.f64("alpha")?, c.f64("t_max")?, c.f64("dt")?, c.usize("samples")?, c.f64("diffusion")?);
    if !(alpha > 0.0 && t_max > 0.0 && dt > 0.0 && samples > 0 && diffusion > 0.0) {
        return Err(Error::Config("free-gaussian needs positive alpha, t_max, dt, samples and diffusion".into()));
    }
    let grid = Grid1D::spanning(c.f64("lo")?, c.f64("hi")?, c.usize("points")?, Boundary::Periodic)?;
    let mut psi = grid.sample(|x| Complex::new((-alpha * x * x / 2.0).exp(), 0.0))?;
    let prop = Propagator::new(grid, Potential::zero(&grid), units, dt)?;
    let var0 = moments(&grid, &psi).1;
    let per = ((t_max / samples as f64) / dt).round().max(1.0) as usize;
    let mut rows = vec![format!("0,1,1,0,1")];
    let mut worst: f64 = 0.0;
    for s in 1..=samples {
        prop.run(&mut psi, per)?;
        let t = (s * per) as f64 * dt;
        let ratio = moments(&grid, &psi).1 / var0;
        let law = crate::fd::width_factor(alpha, t, &units);
        let err = (ratio - law).abs() / law;
        worst = worst.max(err);
        // Heat flow from the same initial variance 1/(2α).
        let heat = 1.0 + 2.0 * alpha * diffusion * t;
        rows.push(format!("{},{},{},{},{}", num(t), num(ratio), num(law), num(err), num(heat)));
    }
    Ok(vec![
        o.table("width.csv", "t,width_sq_ratio,width_law,rel_err,heat_ratio", rows),
        o.summary(vec![("max_rel_err", num(worst)), ("boundary", grid.boundary.name().into())]),
    ])
}

/// Result of a double-well run, one record per output step.
struct WellRecord {
    step: usize,
    t: f64,
    p_right: f64,
    max_transient: f64,
}

fn double_well(o: &Out) -> Result<Vec<OutputFile>> {
    let c = o.cfg;
    let units = Units::default();
    let (v0, b, eps, dt, horizon, every) =
        (c.f64("barrier")?, c.f64("separation")?, c.f64("epsilon")?, c.f64("dt")?, c.f64("horizon")?, c.usize("every")?.max(1));
    if !(b > 0.0 && v0 > 0.0 && dt > 0.0 && horizon > 0.0) || !(0.0..1.0).contains(&eps) {
        return Err(Error::Config("double-well needs positive barrier, separation, dt and horizon and epsilon in [0, 1)".into()));
    }
    let grid = Grid1D::spanning(c.f64("lo")?, c.f64("hi")?, c.usize("points")?, Boundary::HardWall)?;
    let v = Potential::from_fn(&grid, |x| v0 * ((x / b).powi(2) - 1.0).powi(2))?;
    let pair = eigen_dense(&grid, &v, &units, 2)?;
    let de = pair[1].energy - pair[0].energy;
    // Full transfer between the wells takes π/ΔE.
    let t_transfer = PI / de;
    let steps = (horizon * t_transfer / dt).ceil() as usize;
    let right: Vec<usize> = (0..grid.points).filter(|&i| grid.position(i) > 0.0).collect();
    let left_weight = |s: f64| -> f64 {
        (0..grid.points).filter(|&i| grid.position(i) < 0.0).map(|i| (pair[0].state[i] + s * pair[1].state[i]).powi(2) / 2.0).sum()
    };
    let sign = if left_weight(1.0) >= left_weight(-1.0) { 1.0 } else { -1.0 };
    let mut psi: Vec<Complex> =
        (0..grid.points).map(|i| Complex::new((pair[0].state[i] + sign * pair[1].state[i]) / 2f64.sqrt(), 0.0)).collect();
    let prop = Propagator::new(grid, v, units, dt)?;
    let grain = if eps > 0.0 { Some(GrainPolicy::new(eps)?) } else { None };
    let mut records = Vec::new();
    let mut record = |step: usize, psi: &mut Vec<Complex>| -> Result<()> {
        let norm: f64 = psi.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        let transient = right.iter().map(|&i| psi[i].norm() / norm).fold(0.0, f64::max);
        if let Some(g) = grain {
            *psi = grid.from_state(&grid.to_state(psi, g)?.reduce()?)?;
        }
        let p_right = right.iter().map(|&i| psi[i].norm_sqr()).sum::<f64>() + 0.0;
        records.push(WellRecord { step, t: step as f64 * dt, p_right, max_transient: transient });
        Ok(())
    };
    record(0, &mut psi)?;
    for s in 1..=steps {
        prop.step(&mut psi)?;
        record(s, &mut psi)?;
    }
    let max_transient = records.iter().map(|r| r.max_transient).fold(0.0, f64::max);
    let p_max = records.iter().map(|r| r.p_right).fold(0.0, f64::max);
    let rows = records
        .iter()
        .filter(|r| r.step % every == 0 || r.step == steps)
        .map(|r| format!("{},{},{},{}", r.step, num(r.t), num(r.p_right), num(r.max_transient)));
    let blocked = records.iter().all(|r| r.p_right == 0.0);
    Ok(vec![
        o.table("trajectory.csv", "step,t,p_right,max_transient", rows),
        o.summary(vec![
            ("delta_e", num(de)),
            ("horizon_t", num(steps as f64 * dt)),
            ("steps", steps.to_string()),
            ("epsilon", num(eps)),
            ("p_right_final", num(records.last().map_or(0.0, |r| r.p_right))),
            ("p_right_max", num(p_max)),
            ("max_transient", num(max_transient)),
            ("blocked_every_step", blocked.to_string()),
            ("boundary", grid.boundary.name().into()),
        ]),
    ])
}

fn epr_hadamard(o: &Out) -> Result<Vec<OutputFile>> {
    let draws = o.cfg.u64("draws")?;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let bell = GrainedWaveFunction::from_real(&[s, 0.0, 0.0, s], GrainPolicy::exact())?.with_label_format(LabelFormat::Bits(2));
    let after = hadamard_pair(&bell)?;
    let invariance = (0..4).map(|l| (after.amplitude(l) - bell.amplitude(l)).norm()).fold(0.0, f64::max);
    let state_rows = (0..4u64).map(|l| {
        let (a, b) = (bell.amplitude(l), after.amplitude(l));
        format!("{},{},{},{},{},{}", l, LabelFormat::Bits(2).format(l), num(a.re), num(a.im), num(b.re), num(b.im))
    });
    let basis = |l: u64| GrainedWaveFunction::from_entries(vec![(l, Complex::new(1.0, 0.0))], GrainPolicy::exact());
    let mixture = Mixture::new(vec![(0.5, basis(0)?), (0.5, basis(3)?)])?;
    let dist = mixture.after_hadamard()?;
    let hist = born_sample(&after, draws, o.cfg.seed)?;
    Ok(vec![
        o.table("state.csv", "label,bits,re_before,im_before,re_after,im_after", state_rows),
        o.table("mixture.csv", "outcome,probability", dist.iter().map(|(l, p)| format!("{l},{}", num(*p)))),
        o.table("samples.csv", "outcome,count", (0..4).map(|l| format!("{l},{}", hist.count(l)))),
        o.summary(vec![("invariance_error", num(invariance)), ("draws", draws.to_string())]),
    ])
}

/// Two spin-paired harmonic orbitals, filled from the lowest pair, minimized
/// with a contact repulsion.
fn contact_pair(points: usize, half_width: f64, omega: f64, g: f64) -> Result<(Minimized, f64)> {
    let units = Units::default();
    let grid = Grid1D::spanning(-half_width, half_width, points, Boundary::HardWall)?;
    let v = Potential::harmonic(&grid, units.mass, omega, 0.0);
    let spatial = eigen_dense(&grid, &v, &units, 2)?;
    let orbitals =
        OrbitalSet::spin_pairs(grid, spatial.iter().map(|p| p.state.iter().map(|&x| Complex::new(x, 0.0)).collect()).collect())?;
    let two = if g == 0.0 { TwoBody::None } else { TwoBody::Contact(g) };
    let r = minimize_energy(&[1, 1, 0, 0], orbitals, &v, &two, &units, &MinimizeOptions::default())?;
    let (e0, _, _) = ground_oracle(&r.hamiltonian, 2, Statistics::Fermion)?;
    Ok((r, e0))
}

fn emission(o: &Out) -> Result<Vec<OutputFile>> {
    let j_max = o.cfg.u64("j_max")?;
    if j_max == 0 {
        return Err(Error::Config("emission.j_max must be at least 1".into()));
    }
    let mut rows = Vec::new();
    for j in 1..=j_max {
        let (emitted, total) = emission_probability(&emission_state(j)?)?;
        rows.push(format!("{j},{emitted},{total},{}", num(emitted as f64 / total as f64)));
    }
    let (r, e0) = contact_pair(48, 6.0, 1.0, o.cfg.f64("contact")?)?;
    let gain = best_direction_gain(&r.hamiltonian, &r.basis, &r.state)?;
    let tol = MinimizeOptions::default().direction_tol;
    Ok(vec![
        o.table("emission.csv", "j,emitted,total,probability", rows),
        o.table("ground.csv", "energy,oracle,best_gain,tolerance", [format!("{},{},{},{}", num(r.energy), num(e0), num(gain), num(tol))]),
    ])
}

fn urn(o: &Out) -> Result<Vec<OutputFile>> {
    let c = o.cfg;
    let (p, quanta, draws) = (c.f64("p_left")?, c.usize("quanta")?, c.usize("draws")?);
    if !(p > 0.0 && p < 1.0) || quanta == 0 {
        return Err(Error::Config("urn needs p_left in (0, 1) and quanta > 0".into()));
    }
    let eps = 1.0 / (quanta as f64).sqrt();
    let meta = GridMeta::new(1.0, 0.0, 2);
    let particle = GrainedWaveFunction::from_real(&[p.sqrt(), (1.0 - p).sqrt()], GrainPolicy::exact())?.with_grid(meta);
    let pointer = GrainedWaveFunction::from_real(&[1.0], GrainPolicy::exact())?.with_grid(GridMeta::new(1.0, 0.0, 1));
    let ens = form_measurement_ensemble(&particle, &pointer, eps, c.seed)?;
    let n = ens.len();
    let regions = [("left", -0.5..0.5), ("right", 0.5..1.5)];
    let mut rows = Vec::new();
    let mut fractions = Vec::new();
    for (name, region) in regions.iter() {
        let f = urn_measure(&ens, region.clone());
        let hits = urn_draw(&ens, region.clone(), draws, c.seed);
        let sigma = (draws as f64 * f * (1.0 - f)).sqrt();
        let z = if sigma > 0.0 { (hits as f64 - draws as f64 * f) / sigma } else { 0.0 };
        let born = if *name == "left" { p } else { 1.0 - p };
        rows.push(format!("{name},{},{},{},{},{}", num(born), num(f), hits, num(sigma), num(z)));
        fractions.push(f);
    }
    Ok(vec![
        o.table("urn.csv", "region,born,fraction,draw_hits,draw_sigma,draw_z", rows),
        o.summary(vec![("complex_quanta", n.to_string()), ("draws", draws.to_string()), ("fraction_sum", num(fractions.iter().sum()))]),
    ])
}

fn two_fermion(o: &Out) -> Result<Vec<OutputFile>> {
    let c = o.cfg;
    let (r, e0) = contact_pair(c.usize("points")?, c.f64("half_width")?, c.f64("omega")?, c.f64("contact")?)?;
    let mut energies = file_header(o.module, c);
    energies.push_str(&r.energies_csv());
    let rel = ((r.energy - e0) / e0).abs();
    let occupations = r.basis.states.iter().zip(&r.state).map(|(occ, a)| {
        let bits: String = occ.iter().map(|n| char::from(b'0' + n)).collect();
        format!("{bits},{},{}", num(a.re), num(a.im))
    });
    Ok(vec![
        OutputFile { name: "energies.csv".into(), contents: energies },
        o.table("state.csv", "occupation,re,im", occupations),
        o.summary(vec![
            ("start_energy", num(r.start_energy)),
            ("stage1_energy", num(r.stage1_energy)),
            ("energy", num(r.energy)),
            ("oracle", num(e0)),
            ("rel_err", num(rel)),
        ]),
    ])
}

struct AqComparison {
    l1: f64,
    sweep_l2: f64,
    peak_aq: f64,
    peak_dft: f64,
    dk: f64,
}

fn aq_vs_fd(o: &Out) -> Result<Vec<OutputFile>> {
    let c = o.cfg;
    let harmonic = match c.str("potential")? {
        "harmonic" => true,
        "free" => false,
        v => return Err(Error::Config(format!("aq-vs-fd.potential must be harmonic or free, got {v:?}"))),
    };
    let n = c.usize("quanta")?;
    let units = Units::default();
    let grid = Grid1D::spanning(-12.0, 12.0, 2400, Boundary::Periodic)?;
    let (x0, p0) = if harmonic { (1.5, 0.0) } else { (0.0, 1.0) };
    let psi0 = grid.sample(|x| Complex::from_polar((-(x - x0) * (x - x0) / 2.0).exp(), p0 * x))?;
    let v = if harmonic { Potential::harmonic(&grid, units.mass, 1.0, 0.0) } else { Potential::zero(&grid) };
    let mut fd = psi0.clone();
    Propagator::new(grid, v, units, 1e-3)?.run(&mut fd, 1000)?;
    let cfg = BubbleConfig {
        eps_x: 0.025,
        r: 10,
        domain: (-12.0, 12.0),
        velocity: VelocityLaw::FlatTop { core: 4.0, taper: 2.0 },
        center: VelocityCenter::LocalMomentum,
        clock: CollisionClock::Periodic { interval: 1.0 },
        flight: FlightLaw::Newtonian,
        accumulate: AccumulateMode::PhaseReferenced,
        reinjection: ReinjectionDensity::Modulus,
        units: units.with_light_speed(50.0),
        policy: o.policy(),
        ..BubbleConfig::default()
    };
    let mut bubble = Bubble::init(&grid.to_state(&psi0, GrainPolicy::exact())?, n, c.seed, cfg)?;
    let lag = if harmonic { Lagrangian::Harmonic { omega: 1.0, center: 0.0 } } else { Lagrangian::Free };
    let dk = 2.0 * PI / 24.0;
    let ks: Vec<f64> = (-20..=20).map(|j| j as f64 * dk).collect();
    let mut sweep = None;
    let acc = NormingCycle::new(1.0)?.run(&mut bubble, &lag, None, 1, |_, b, _| sweep = Some(momentum_sweep(b, &ks, 0.25)))?;
    let sweep = sweep.expect("observer runs once")?;
    let mt = momentum_transform(&grid.to_state(&fd, GrainPolicy::exact())?)?;
    let mg = mt.grid.expect("momentum states carry a grid");
    let dft: Vec<f64> = ks.iter().map(|&k| mt.amplitude(((k - mg.origin) / mg.spacing).round() as u64).norm()).collect();
    let dn = dft.iter().map(|a| a * a).sum::<f64>().sqrt();
    let sw: Vec<f64> = (0..ks.len()).map(|i| sweep.amplitude(i as u64).norm()).collect();
    let argmax = |v: &[f64]| (0..v.len()).max_by(|&i, &j| v[i].total_cmp(&v[j])).unwrap_or(0);
    let (c0, c1) = cfg.cell_range();
    let mut p_aq = vec![0.0; (c1 - c0 + 1) as usize];
    for &(l, a) in acc.psi.entries() {
        p_aq[l as usize] = a.norm_sqr();
    }
    let p_fd = cell_probabilities(&grid, &fd, &cfg);
    let cmp = AqComparison {
        l1: l1_distance(&p_aq, &p_fd),
        sweep_l2: sw.iter().zip(&dft).map(|(a, b)| (a - b / dn).powi(2)).sum::<f64>().sqrt(),
        peak_aq: ks[argmax(&sw)],
        peak_dft: ks[argmax(&dft)],
        dk,
    };
    let density = (0..p_aq.len()).map(|i| format!("{i},{},{},{}", num(cfg.cell_center(c0 + i as i64)), num(p_aq[i]), num(p_fd[i])));
    let momentum = ks.iter().enumerate().map(|(i, k)| format!("{},{},{}", num(*k), num(sw[i]), num(dft[i] / dn)));
    Ok(vec![
        o.table("density.csv", "cell,x,p_aq,p_fd", density),
        o.table("momentum.csv", "k,sweep,dft", momentum),
        o.summary(vec![
            ("l1", num(cmp.l1)),
            ("sweep_l2", num(cmp.sweep_l2)),
            ("peak_aq", num(cmp.peak_aq)),
            ("peak_dft", num(cmp.peak_dft)),
            ("dk", num(cmp.dk)),
            ("boundary", grid.boundary.name().into()),
        ]),
    ])
}

fn mhtm_epr(o: &Out) -> Result<Vec<OutputFile>> {
    let c = o.cfg;
    let out = run_epr_demo(&EprConfig { distance: c.u64("distance")?, trigger: c.bool("trigger")?, max_steps: c.u64("max_steps")? })?;
    let mut trace = file_header(o.module, c);
    trace.push_str(&trace_csv(&out.trace));
    Ok(vec![
        OutputFile { name: "trace.csv".into(), contents: trace },
        o.summary(vec![
            ("kill_step", out.kill_step.map_or("none".into(), |s| s.to_string())),
            ("kill_writes", out.kill_writes.to_string()),
            ("intermediate_writes", out.intermediate_writes.to_string()),
            ("tokens_remaining", out.tokens_remaining.to_string()),
            ("steps", out.steps.to_string()),
        ]),
    ])
}

fn mhtm_budget(o: &Out) -> Result<Vec<OutputFile>> {
    let c = o.cfg;
    let (c1, c2, ds_max, dt_max) = (c.f64("c1")?, c.f64("c2")?, c.usize("ds_max")?, c.usize("dt_max")?);
    let (n_min, n_max) = (c.usize("n_min")?, c.usize("n_max")?);
    if n_min == 0 || n_min > n_max {
        return Err(Error::Config("mhtm-budget needs 0 < n_min ≤ n_max".into()));
    }
    let mut budget = Vec::new();
    for ds in 0..=ds_max {
        for dt in 0..=dt_max {
            budget.push(format!("{ds},{dt},{}", num(step_budget(ds as f64, dt as f64, c1, c2)?)));
        }
    }
    let mut pairs = Vec::new();
    let mut n = n_min;
    while n <= n_max {
        let steps = measure_pairs(n)?;
        pairs.push(format!("{n},{steps},{}", num(steps as f64 / (n * n) as f64)));
        n *= 2;
    }
    Ok(vec![o.table("budget.csv", "ds,dt,budget", budget), o.table("pairs.csv", "n,steps,steps_per_n2", pairs)])
}
