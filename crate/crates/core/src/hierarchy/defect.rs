use std::fmt::Write as _;

use crate::{Error, Result};

const ACCEPT_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct DefectEntry {
    pub range: usize,
    /// Energies reached by the successive minimization steps at this range.
    pub energies: Vec<f64>,
    /// Drop of the final energy relative to the previous range; zero for the first entry.
    pub defect: f64,
    pub accepted: bool,
}

/// Final energies per range and the improvement each range brought.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EnergyDefectLog {
    pub entries: Vec<DefectEntry>,
}

impl EnergyDefectLog {
    pub fn new() -> Self {
        Self::default()
    }

    /// Record the energies of one range; returns its defect.
    pub fn record(&mut self, range: usize, energies: Vec<f64>) -> Result<f64> {
        let last = *energies.last().ok_or_else(|| Error::Domain("a range needs at least one energy".into()))?;
        if let Some(prev) = self.entries.last() {
            if range <= prev.range {
                return Err(Error::Domain(format!("range {range} does not follow {}", prev.range)));
            }
        }
        let defect = self.entries.iter().rev().find(|e| e.accepted).map_or(0.0, |e| e.energies[e.energies.len() - 1] - last);
        let accepted = defect >= -ACCEPT_TOL;
        self.entries.push(DefectEntry { range, energies, defect, accepted });
        Ok(defect)
    }

    pub fn accepted(&self) -> impl Iterator<Item = &DefectEntry> {
        self.entries.iter().filter(|e| e.accepted)
    }

    /// Whether accepted defects, after the first entry, never grow with the range.
    pub fn defects_nonincreasing(&self) -> bool {
        let d: Vec<f64> = self.accepted().skip(1).map(|e| e.defect).collect();
        d.windows(2).all(|w| w[1] <= w[0] + ACCEPT_TOL)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("range,step,energy,defect,accepted\n");
        for e in &self.entries {
            for (i, en) in e.energies.iter().enumerate() {
                let _ = writeln!(s, "{},{},{:.12e},{:.12e},{}", e.range, i + 1, en, e.defect, e.accepted);
            }
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defects_track_final_energies() {
        let mut log = EnergyDefectLog::new();
        assert_eq!(log.record(1, vec![3.0, 2.0]).unwrap(), 0.0);
        assert_eq!(log.record(2, vec![1.9, 1.5]).unwrap(), 0.5);
        assert!((log.record(3, vec![1.4]).unwrap() - 0.1).abs() < 1e-12);
        assert!(log.defects_nonincreasing());
        assert_eq!(log.accepted().count(), 3);
    }

    #[test]
    fn rising_energy_is_rejected() {
        let mut log = EnergyDefectLog::new();
        log.record(1, vec![1.0]).unwrap();
        assert!(log.record(2, vec![1.5]).unwrap() < 0.0);
        assert!(!log.entries[1].accepted);
        assert_eq!(log.record(3, vec![0.5]).unwrap(), 0.5);
    }

    #[test]
    fn ranges_must_increase() {
        let mut log = EnergyDefectLog::new();
        log.record(2, vec![1.0]).unwrap();
        assert!(log.record(2, vec![0.5]).is_err());
        assert!(log.record(3, vec![]).is_err());
    }
}
