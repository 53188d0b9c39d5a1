//! `AQSIM-STATE v1` text snapshots.
//!
//! ```text
//! AQSIM-STATE v1
//! # module=state-core
//! # grain=0.01
//! # grid=0.05,-8,320
//! # labels=decimal
//! 0 0.70710678 0
//! 3 0.70710678 0
//! ```
//!
//! Floats are written in shortest round-trip form, so write/read is lossless.

use crate::{Complex, Error, Result};

use super::{GrainPolicy, GrainedWaveFunction, GridMeta, LabelFormat};

pub const HEADER: &str = "AQSIM-STATE v1";

/// Serialize with extra `# key=value` header lines (module, version, config hash, ...).
pub fn write_state(psi: &GrainedWaveFunction, meta: &[(&str, String)]) -> String {
    let mut s = format!("{HEADER}\n");
    for (k, v) in meta {
        s.push_str(&format!("# {k}={v}\n"));
    }
    s.push_str(&format!("# grain={}\n", psi.grain.epsilon));
    if let Some(t) = psi.grain.resource_t {
        s.push_str(&format!("# resource_t={t}\n"));
    }
    if let Some(g) = psi.grid {
        s.push_str(&format!("# grid={},{},{}\n", g.spacing, g.origin, g.points));
    }
    match psi.label_format {
        LabelFormat::Decimal => s.push_str("# labels=decimal\n"),
        LabelFormat::Bits(w) => s.push_str(&format!("# labels=bits:{w}\n")),
    }
    for &(l, a) in psi.entries() {
        s.push_str(&format!("{} {} {}\n", psi.label_format.format(l), a.re, a.im));
    }
    s
}

pub fn read_state(text: &str) -> Result<GrainedWaveFunction> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == HEADER => {}
        _ => return Err(Error::parse(1, format!("expected header `{HEADER}`"))),
    }
    let mut grain = GrainPolicy::exact();
    let mut grid = None;
    let mut format = LabelFormat::Decimal;
    let mut entries = Vec::new();
    let num = |ln: usize, s: &str| s.trim().parse::<f64>().map_err(|e| Error::parse(ln + 1, format!("{s}: {e}")));
    for (ln, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(meta) = line.strip_prefix('#') {
            let Some((k, v)) = meta.trim().split_once('=') else { continue };
            match k.trim() {
                "grain" => grain.epsilon = num(ln, v)?,
                "resource_t" => grain.resource_t = Some(num(ln, v)?),
                "grid" => {
                    let p: Vec<&str> = v.split(',').collect();
                    if p.len() != 3 {
                        return Err(Error::parse(ln + 1, "grid needs spacing,origin,points"));
                    }
                    let points = p[2].trim().parse().map_err(|_| Error::parse(ln + 1, "bad grid point count"))?;
                    grid = Some(GridMeta::new(num(ln, p[0])?, num(ln, p[1])?, points));
                }
                "labels" => {
                    format = match v.trim() {
                        "decimal" => LabelFormat::Decimal,
                        b => {
                            let w = b.strip_prefix("bits:").and_then(|w| w.parse().ok());
                            LabelFormat::Bits(w.ok_or_else(|| Error::parse(ln + 1, format!("unknown label format {b}")))?)
                        }
                    }
                }
                _ => {}
            }
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 3 {
            return Err(Error::parse(ln + 1, "expected `label re im`"));
        }
        let label = match format {
            LabelFormat::Decimal => f[0].parse::<u64>().ok(),
            LabelFormat::Bits(_) => u64::from_str_radix(f[0], 2).ok(),
        }
        .ok_or_else(|| Error::parse(ln + 1, format!("bad label {}", f[0])))?;
        entries.push((label, Complex::new(num(ln, f[1])?, num(ln, f[2])?)));
    }
    let mut psi = GrainedWaveFunction::from_entries(entries, grain)?.with_label_format(format);
    psi.grid = grid;
    Ok(psi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_is_lossless() {
        let psi = GrainedWaveFunction::from_entries(
            vec![(0, Complex::new(0.1f64.sqrt(), -1e-17)), (3, Complex::from_polar(0.9f64.sqrt(), 2.0))],
            GrainPolicy::new(0.01).unwrap(),
        )
        .unwrap()
        .with_grid(GridMeta::new(0.05, -8.0, 320))
        .with_label_format(LabelFormat::Bits(2));
        let text = write_state(&psi, &[("module", "state-core".into())]);
        assert!(text.starts_with("AQSIM-STATE v1\n# module=state-core\n"));
        assert!(text.contains("\n11 "));
        assert_eq!(read_state(&text).unwrap(), psi);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(read_state("AQSIM-STATE v2\n").is_err());
        assert!(read_state("AQSIM-STATE v1\n0 1\n").is_err());
    }
}
