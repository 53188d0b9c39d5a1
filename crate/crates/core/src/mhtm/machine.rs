use std::collections::HashMap;
use std::fmt::{self, Write as _};

use crate::{Error, Result};

pub const BLANK: char = '_';

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Shift {
    Left,
    Right,
    Stay,
}

impl Shift {
    fn delta(self) -> i64 {
        match self {
            Shift::Left => -1,
            Shift::Right => 1,
            Shift::Stay => 0,
        }
    }
}

/// A tape that grows with blanks in either direction when written.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tape {
    cells: Vec<char>,
    origin: i64,
}

impl Tape {
    pub fn new(content: &str) -> Self {
        Tape { cells: content.chars().collect(), origin: 0 }
    }

    pub fn blank(len: usize) -> Self {
        Tape { cells: vec![BLANK; len], origin: 0 }
    }

    pub fn read(&self, pos: i64) -> char {
        let i = pos - self.origin;
        if i < 0 || i as usize >= self.cells.len() {
            BLANK
        } else {
            self.cells[i as usize]
        }
    }

    pub fn write(&mut self, pos: i64, sym: char) {
        if pos < self.origin {
            let grow = (self.origin - pos) as usize;
            self.cells.splice(0..0, std::iter::repeat_n(BLANK, grow));
            self.origin = pos;
        }
        let i = (pos - self.origin) as usize;
        if i >= self.cells.len() {
            self.cells.resize(i + 1, BLANK);
        }
        self.cells[i] = sym;
    }

    /// Allocated extent `[lo, hi)`.
    pub fn extent(&self) -> (i64, i64) {
        (self.origin, self.origin + self.cells.len() as i64)
    }

    /// Contents with leading and trailing blanks removed.
    pub fn trimmed(&self) -> String {
        let s: String = self.cells.iter().collect();
        s.trim_matches(BLANK).to_string()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HeadRef {
    pub machine: usize,
    pub head: usize,
}

impl fmt::Display for HeadRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "m{}.h{}", self.machine, self.head)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Head {
    pub id: HeadRef,
    pub tape: usize,
    pub pos: i64,
    pub state: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PosClass {
    Any,
    At(i64),
}

/// Condition on one head: its tape, position class, cell symbol and state,
/// plus heads that must (`present`) or must not share its cell.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HeadMatch {
    pub head: HeadRef,
    pub tape: usize,
    pub pos: PosClass,
    pub symbol: char,
    pub state: String,
    pub coobservers: Vec<(HeadRef, bool)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HeadWrite {
    pub symbol: char,
    pub state: String,
    pub shift: Shift,
}

/// Rule over several heads, applied to all of them in one step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JointRule {
    pub matches: Vec<HeadMatch>,
    pub writes: Vec<HeadWrite>,
}

impl JointRule {
    /// Whether no configuration can satisfy both rules.
    fn exclusive(&self, other: &JointRule) -> bool {
        for a in &self.matches {
            for b in other.matches.iter().filter(|b| b.head == a.head) {
                if a.tape != b.tape || a.symbol != b.symbol || a.state != b.state {
                    return true;
                }
                if let (PosClass::At(x), PosClass::At(y)) = (a.pos, b.pos) {
                    if x != y {
                        return true;
                    }
                }
                for (h, want) in &a.coobservers {
                    if b.coobservers.iter().any(|(g, w)| g == h && w != want) {
                        return true;
                    }
                }
            }
        }
        false
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleSet {
    pub rules: Vec<JointRule>,
}

impl RuleSet {
    /// Rejects rule sets where two rules could match the same configuration.
    pub fn new(rules: Vec<JointRule>) -> Result<Self> {
        for (i, r) in rules.iter().enumerate() {
            if r.matches.is_empty() || r.matches.len() != r.writes.len() {
                return Err(Error::Domain(format!("rule {i} needs one write per matched head")));
            }
            for (a, m) in r.matches.iter().enumerate() {
                if r.matches[..a].iter().any(|p| p.head == m.head) {
                    return Err(Error::Domain(format!("rule {i} matches head {} twice", m.head)));
                }
            }
        }
        for i in 0..rules.len() {
            for j in i + 1..rules.len() {
                if !rules[i].exclusive(&rules[j]) {
                    return Err(Error::Nondeterminism(i, j));
                }
            }
        }
        Ok(RuleSet { rules })
    }

    /// Parse one rule per line:
    ///
    /// `match: (m0.h0,0,*,a,q,@m1.h0) (m0.h1,0,3,b,q,!m0.h0) -> write: (a',q',R) (b',q',S)`
    ///
    /// Fields are head, tape, position class (`*` or a cell index), symbol,
    /// state and any number of co-observers. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut rules = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            rules.push(parse_rule(line).map_err(|m| Error::parse(n + 1, m))?);
        }
        Self::new(rules)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for r in &self.rules {
            s.push_str("match:");
            for m in &r.matches {
                let pos = match m.pos {
                    PosClass::Any => "*".to_string(),
                    PosClass::At(p) => p.to_string(),
                };
                let _ = write!(s, " ({},{},{},{},{}", m.head, m.tape, pos, m.symbol, m.state);
                for (h, present) in &m.coobservers {
                    let _ = write!(s, ",{}{h}", if *present { '@' } else { '!' });
                }
                s.push(')');
            }
            s.push_str(" -> write:");
            for w in &r.writes {
                let sh = match w.shift {
                    Shift::Left => 'L',
                    Shift::Right => 'R',
                    Shift::Stay => 'S',
                };
                let _ = write!(s, " ({},{},{sh})", w.symbol, w.state);
            }
            s.push('\n');
        }
        s
    }
}

fn tuples(s: &str) -> std::result::Result<Vec<Vec<String>>, String> {
    let mut out = Vec::new();
    let mut rest = s.trim();
    while !rest.is_empty() {
        let body = rest.strip_prefix('(').ok_or_else(|| format!("expected '(' at {rest:?}"))?;
        let end = body.find(')').ok_or("unclosed '('")?;
        out.push(body[..end].split(',').map(|f| f.trim().to_string()).collect());
        rest = body[end + 1..].trim_start();
    }
    Ok(out)
}

fn head_ref(s: &str) -> std::result::Result<HeadRef, String> {
    let (m, h) = s.split_once('.').ok_or_else(|| format!("bad head {s:?}"))?;
    let machine = m.strip_prefix('m').and_then(|x| x.parse().ok()).ok_or_else(|| format!("bad machine {m:?}"))?;
    let head = h.strip_prefix('h').and_then(|x| x.parse().ok()).ok_or_else(|| format!("bad head {h:?}"))?;
    Ok(HeadRef { machine, head })
}

fn symbol(s: &str) -> std::result::Result<char, String> {
    let mut it = s.chars();
    match (it.next(), it.next()) {
        (Some(c), None) => Ok(c),
        _ => Err(format!("symbol {s:?} must be one character")),
    }
}

fn parse_rule(line: &str) -> std::result::Result<JointRule, String> {
    let body = line.strip_prefix("match:").ok_or("rule must start with 'match:'")?;
    let (lhs, rhs) = body.split_once("->").ok_or("missing '->'")?;
    let rhs = rhs.trim().strip_prefix("write:").ok_or("missing 'write:'")?;
    let mut matches = Vec::new();
    for t in tuples(lhs)? {
        if t.len() < 5 {
            return Err("match tuple needs head, tape, position, symbol, state".into());
        }
        let pos = if t[2] == "*" { PosClass::Any } else { PosClass::At(t[2].parse().map_err(|_| format!("bad position {:?}", t[2]))?) };
        let coobservers = t[5..]
            .iter()
            .map(|c| match c.chars().next() {
                Some('@') => Ok((head_ref(&c[1..])?, true)),
                Some('!') => Ok((head_ref(&c[1..])?, false)),
                _ => Err(format!("co-observer {c:?} needs '@' or '!'")),
            })
            .collect::<std::result::Result<Vec<_>, String>>()?;
        matches.push(HeadMatch {
            head: head_ref(&t[0])?,
            tape: t[1].parse().map_err(|_| format!("bad tape {:?}", t[1]))?,
            pos,
            symbol: symbol(&t[3])?,
            state: t[4].clone(),
            coobservers,
        });
    }
    let mut writes = Vec::new();
    for t in tuples(rhs)? {
        if t.len() != 3 {
            return Err("write tuple needs symbol, state, shift".into());
        }
        let shift = match t[2].as_str() {
            "L" => Shift::Left,
            "R" => Shift::Right,
            "S" => Shift::Stay,
            other => return Err(format!("bad shift {other:?}")),
        };
        writes.push(HeadWrite { symbol: symbol(&t[0])?, state: t[1].clone(), shift });
    }
    Ok(JointRule { matches, writes })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceRecord {
    pub step: u64,
    pub head: HeadRef,
    pub tape: usize,
    pub pos: i64,
    pub write: char,
    pub state: String,
}

pub const TRACE_HEADER: &str = "step,machine,head,tape,pos,write,state";

pub fn trace_csv(trace: &[TraceRecord]) -> String {
    let mut s = format!("{TRACE_HEADER}\n");
    for r in trace {
        let _ = writeln!(s, "{},{},{},{},{},{},{}", r.step, r.head.machine, r.head.head, r.tape, r.pos, r.write, r.state);
    }
    s
}

/// Tapes, heads and a deterministic rule set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ensemble {
    pub tapes: Vec<Tape>,
    pub heads: Vec<Head>,
    pub rules: RuleSet,
    pub steps: u64,
    pub trace: Vec<TraceRecord>,
    pub record: bool,
    index: HashMap<HeadRef, usize>,
}

impl Ensemble {
    pub fn new(tapes: Vec<Tape>, heads: Vec<Head>, rules: RuleSet) -> Result<Self> {
        let mut index = HashMap::new();
        for (i, h) in heads.iter().enumerate() {
            if h.tape >= tapes.len() {
                return Err(Error::Domain(format!("head {} on missing tape {}", h.id, h.tape)));
            }
            if index.insert(h.id, i).is_some() {
                return Err(Error::Domain(format!("head {} declared twice", h.id)));
            }
        }
        for (i, r) in rules.rules.iter().enumerate() {
            for m in &r.matches {
                if !index.contains_key(&m.head) || m.coobservers.iter().any(|(h, _)| !index.contains_key(h)) {
                    return Err(Error::Domain(format!("rule {i} refers to an undeclared head")));
                }
            }
        }
        Ok(Ensemble { tapes, heads, rules, steps: 0, trace: Vec::new(), record: true, index })
    }

    pub fn head(&self, id: HeadRef) -> Option<&Head> {
        self.index.get(&id).map(|&i| &self.heads[i])
    }

    fn matches(&self, r: &JointRule) -> bool {
        r.matches.iter().all(|m| {
            let h = &self.heads[self.index[&m.head]];
            h.tape == m.tape
                && match m.pos {
                    PosClass::Any => true,
                    PosClass::At(p) => h.pos == p,
                }
                && self.tapes[h.tape].read(h.pos) == m.symbol
                && h.state == m.state
                && m.coobservers.iter().all(|(o, present)| {
                    let g = &self.heads[self.index[o]];
                    (g.tape == h.tape && g.pos == h.pos) == *present
                })
        })
    }

    /// Index of the rule matching the current configuration.
    pub fn matching_rule(&self) -> Result<usize> {
        let mut found = None;
        for (i, r) in self.rules.rules.iter().enumerate() {
            if self.matches(r) {
                if let Some(j) = found {
                    return Err(Error::Nondeterminism(j, i));
                }
                found = Some(i);
            }
        }
        found.ok_or(Error::Halt { steps: self.steps })
    }

    /// Apply the unique matching rule to all of its heads at once.
    pub fn step(&mut self) -> Result<usize> {
        let i = self.matching_rule()?;
        let rule = &self.rules.rules[i];
        let targets: Vec<(usize, i64, usize)> = rule
            .matches
            .iter()
            .map(|m| {
                let k = self.index[&m.head];
                (k, self.heads[k].pos, self.heads[k].tape)
            })
            .collect();
        self.steps += 1;
        for (&(k, pos, tape), w) in targets.iter().zip(&rule.writes) {
            self.tapes[tape].write(pos, w.symbol);
            let h = &mut self.heads[k];
            h.state.clone_from(&w.state);
            h.pos = pos + w.shift.delta();
            if self.record {
                self.trace.push(TraceRecord { step: self.steps, head: h.id, tape, pos, write: w.symbol, state: w.state.clone() });
            }
        }
        Ok(i)
    }

    /// Step until no rule matches or `max_steps` is reached; returns whether it halted.
    pub fn run(&mut self, max_steps: u64) -> Result<bool> {
        while self.steps < max_steps {
            match self.step() {
                Ok(_) => {}
                Err(Error::Halt { .. }) => return Ok(true),
                Err(e) => return Err(e),
            }
        }
        Ok(false)
    }
}
