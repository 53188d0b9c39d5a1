use std::fmt::Write as _;

use crate::{Complex, Error, Result};

use super::bubble::{BoundQuantum, Bubble, BubbleConfig};

pub const BUBBLE_HEADER: &str = "AQSIM-BUBBLE v1";

/// One line per quantum: `id x v re im t_last`, with the amplitude as of now.
pub fn write_bubble(bubble: &Bubble) -> String {
    let hbar = bubble.config.units.hbar;
    let mut s = String::new();
    writeln!(s, "{BUBBLE_HEADER}").unwrap();
    writeln!(s, "# time={:?} seed={}", bubble.time, bubble.seed).unwrap();
    for q in &bubble.quanta {
        let a = q.current_amp(hbar);
        writeln!(s, "{} {:?} {:?} {:?} {:?} {:?}", q.id, q.x, q.v, a.re, a.im, q.t_last).unwrap();
    }
    s
}

/// Parse a dump into quanta with no pending action. Collision times are not
/// stored, so every quantum is due to collide at `time`.
pub fn read_bubble(text: &str, config: BubbleConfig) -> Result<Bubble> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == BUBBLE_HEADER => {}
        _ => return Err(Error::parse(1, format!("expected header {BUBBLE_HEADER}"))),
    }
    let (mut time, mut seed) = (0.0, 0u64);
    let mut quanta = Vec::new();
    for (i, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(meta) = line.strip_prefix('#') {
            for kv in meta.split_whitespace() {
                match kv.split_once('=') {
                    Some(("time", v)) => time = v.parse().map_err(|_| Error::parse(i + 1, "bad time"))?,
                    Some(("seed", v)) => seed = v.parse().map_err(|_| Error::parse(i + 1, "bad seed"))?,
                    _ => {}
                }
            }
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 6 {
            return Err(Error::parse(i + 1, format!("expected 6 fields, found {}", f.len())));
        }
        let num = |j: usize| f[j].parse::<f64>().map_err(|_| Error::parse(i + 1, format!("bad number {:?}", f[j])));
        let id = f[0].parse::<u64>().map_err(|_| Error::parse(i + 1, "bad id"))?;
        let (x, v, re, im, t_last) = (num(1)?, num(2)?, num(3)?, num(4)?, num(5)?);
        quanta.push(BoundQuantum {
            id,
            x,
            v,
            amp: Complex::new(re, im),
            t_last,
            x_last: x,
            action: 0.0,
            impulse: 0.0,
            next_collision: time,
            k_last: config.units.wavenumber(v),
            events: 0,
            osc: None,
        });
    }
    Bubble::from_quanta(quanta, seed, time, config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{GrainedWaveFunction, GridMeta};

    #[test]
    fn round_trip_preserves_records() {
        let psi = GrainedWaveFunction::from_real(&[0.6, 0.8], crate::state::GrainPolicy::exact()).unwrap().with_grid(GridMeta::new(0.1, 0.0, 2));
        let b = Bubble::init(&psi, 1000, 5, BubbleConfig::default()).unwrap();
        let text = write_bubble(&b);
        let back = read_bubble(&text, b.config).unwrap();
        assert_eq!(back.len(), b.len());
        assert_eq!(write_bubble(&back), text);
    }

    #[test]
    fn rejects_bad_header() {
        assert!(read_bubble("nope\n", BubbleConfig::default()).is_err());
    }
}
