use std::f64::consts::PI;

use crate::exec;
use crate::state::GrainedWaveFunction;
use crate::{Error, Result};

use super::bubble::{Bubble, Injector};

impl Bubble {
    /// Replace stale quanta (no collision for longer than the stale time, or
    /// outside the domain) by fresh ones drawn from ψ. Without a reference the
    /// current accumulation is used. Returns the number replaced.
    pub fn recycle(&mut self, reference: Option<&GrainedWaveFunction>) -> Result<usize> {
        if self.quanta.is_empty() {
            return Err(Error::EmptyBubble);
        }
        let t0 = self.config.stale_time;
        let idx: Vec<usize> = (0..self.quanta.len())
            .filter(|&i| {
                let q = &self.quanta[i];
                self.time - q.t_last > t0 || !self.in_domain(q.x)
            })
            .collect();
        if idx.is_empty() {
            return Ok(0);
        }
        match reference {
            Some(psi) => self.reinject_indices(&idx, psi, None)?,
            None => {
                let acc = self.accumulate();
                self.reinject_indices(&idx, &acc.psi, Some(&acc.kbar))?;
            }
        }
        Ok(idx.len())
    }

    /// Reinject every quantum from ψ: the norming step of a propagation cycle.
    pub fn renorm(&mut self, psi: &GrainedWaveFunction, kbar: Option<&[f64]>) -> Result<()> {
        if self.quanta.is_empty() {
            return Err(Error::EmptyBubble);
        }
        let idx: Vec<usize> = (0..self.quanta.len()).collect();
        self.reinject_indices(&idx, psi, kbar)
    }

    /// Replace the quanta at `idx` with new ones sampled from ψ, keeping their
    /// ids and random streams. New amplitudes have the mean modulus of those replaced.
    pub(crate) fn reinject_indices(&mut self, idx: &[usize], psi: &GrainedWaveFunction, kbar: Option<&[f64]>) -> Result<()> {
        let hbar = self.config.units.hbar;
        let mean: f64 = idx.iter().map(|&i| self.quanta[i].current_amp(hbar).norm()).sum::<f64>() / idx.len().max(1) as f64;
        let a_ref = if mean > 0.0 { mean } else { 1.0 };
        let inj = Injector::new(psi, self.config.reinjection, kbar)?;
        if let Some(k) = kbar {
            self.set_centers_from(psi, k);
        } else if self.config.center == super::VelocityCenter::LocalMomentum {
            let k = inj_kbar(&inj);
            self.set_centers_from(psi, &k);
        }
        let fresh = exec::map_range(self.config.policy, idx.len(), |j| {
            let q = &self.quanta[idx[j]];
            self.inject(q.id, &inj, a_ref, q.events)
        });
        for (&i, q) in idx.iter().zip(fresh) {
            self.check_light_speed(&q)?;
            self.quanta[i] = q;
        }
        Ok(())
    }

    /// Annihilate antithetic pairs within a cell (phases π apart within `tol`
    /// radians, moduli equal within `tol` relative), then reinject the same
    /// number of quanta from the accumulated state. Returns the pair count.
    pub fn r_reduce(&mut self, tol: f64) -> Result<usize> {
        let hbar = self.config.units.hbar;
        let cfg = self.config;
        let mut order: Vec<usize> = (0..self.quanta.len()).collect();
        let cell = |i: usize| cfg.cell_of(self.quanta[i].x);
        order.sort_by_key(|&i| (cell(i), self.quanta[i].id));
        let mut removed = vec![false; self.quanta.len()];
        let mut pairs = 0usize;
        let mut start = 0;
        while start < order.len() {
            let c = cell(order[start]);
            let mut end = start;
            while end < order.len() && cell(order[end]) == c {
                end += 1;
            }
            let mut members: Vec<(f64, f64, usize)> = order[start..end]
                .iter()
                .map(|&i| {
                    let a = self.quanta[i].current_amp(hbar);
                    (a.arg(), a.norm(), i)
                })
                .collect();
            members.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.2.cmp(&b.2)));
            let angles: Vec<f64> = members.iter().map(|m| m.0).collect();
            for m in 0..members.len() {
                let (th, r, i) = members[m];
                if removed[i] || r == 0.0 {
                    continue;
                }
                let mut target = th + PI;
                if target >= PI {
                    target -= 2.0 * PI;
                }
                let mut partner = None;
                for shift in [0.0, 2.0 * PI, -2.0 * PI] {
                    let lo = angles.partition_point(|&a| a < target + shift - tol);
                    for cand in &members[lo..] {
                        if cand.0 > target + shift + tol {
                            break;
                        }
                        if cand.2 != i && !removed[cand.2] && (cand.1 - r).abs() <= tol * r.max(cand.1) {
                            partner = Some(cand.2);
                            break;
                        }
                    }
                    if partner.is_some() {
                        break;
                    }
                }
                if let Some(j) = partner {
                    removed[i] = true;
                    removed[j] = true;
                    pairs += 1;
                }
            }
            start = end;
        }
        if pairs == 0 {
            return Ok(0);
        }
        let idx: Vec<usize> = (0..removed.len()).filter(|&i| removed[i]).collect();
        let survivors: Vec<_> = self.quanta.iter().enumerate().filter(|(i, _)| !removed[*i]).map(|(_, q)| q.clone()).collect();
        let scale: f64 = survivors.iter().map(|q| q.current_amp(hbar).norm()).sum::<f64>() / survivors.len().max(1) as f64;
        let acc = {
            let mut tmp = self.clone();
            tmp.quanta = survivors;
            tmp.accumulate()
        };
        if acc.psi.is_empty() {
            return Err(Error::EmptyBubble);
        }
        for &i in &idx {
            // The pair members carry the modulus of the survivors into reinjection.
            let q = &mut self.quanta[i];
            q.amp = num_complex::Complex::new(scale, 0.0);
            q.action = 0.0;
        }
        self.reinject_indices(&idx, &acc.psi, Some(&acc.kbar))?;
        Ok(pairs)
    }
}

fn inj_kbar(inj: &Injector<'_>) -> Vec<f64> {
    inj.kbar_values().to_vec()
}
