use super::machine::{Ensemble, Head, HeadRef, RuleSet, Tape, TraceRecord, BLANK};
use crate::{Error, Result};

pub const TOKEN: char = 'T';
pub const KILL: char = 'K';

const EPR_RULES: &str = "\
# a local trigger at the first head marks its token
match: (m0.h0,0,*,T,armed) -> write: (K,wait,S)
# kill rule: both paired tokens removed in one application
match: (m0.h0,0,*,K,wait) (m1.h0,0,*,T,wait) -> write: (_,done,S) (_,done,S)
# without a trigger the pair idles in place
match: (m0.h0,0,*,T,wait) (m1.h0,0,*,T,wait) -> write: (T,wait,S) (T,wait,S)
";

#[derive(Clone, Debug, PartialEq)]
pub struct EprConfig {
    pub distance: u64,
    pub trigger: bool,
    pub max_steps: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EprOutcome {
    pub trace: Vec<TraceRecord>,
    /// Step at which the kill rule fired.
    pub kill_step: Option<u64>,
    /// Number of heads the kill step wrote to.
    pub kill_writes: usize,
    /// Writes to cells strictly between the two heads.
    pub intermediate_writes: usize,
    pub tokens_remaining: usize,
    pub steps: u64,
}

pub fn epr_rules() -> Result<RuleSet> {
    RuleSet::parse(EPR_RULES)
}

/// Two tokens `distance` cells apart, one head on each.
pub fn run_epr_demo(cfg: &EprConfig) -> Result<EprOutcome> {
    if cfg.distance == 0 {
        return Err(Error::Domain("the two heads need distance at least 1".into()));
    }
    let d = cfg.distance as i64;
    let mut tape = Tape::blank(cfg.distance as usize + 1);
    tape.write(0, TOKEN);
    tape.write(d, TOKEN);
    let a = HeadRef { machine: 0, head: 0 };
    let b = HeadRef { machine: 1, head: 0 };
    let first = if cfg.trigger { "armed" } else { "wait" };
    let heads = vec![Head { id: a, tape: 0, pos: 0, state: first.into() }, Head { id: b, tape: 0, pos: d, state: "wait".into() }];
    let mut ens = Ensemble::new(vec![tape], heads, epr_rules()?)?;
    let mut kill_step = None;
    while ens.steps < cfg.max_steps {
        match ens.step() {
            Ok(1) => kill_step = Some(ens.steps),
            Ok(_) => {}
            Err(Error::Halt { .. }) => break,
            Err(e) => return Err(e),
        }
    }
    let kill_writes = kill_step.map_or(0, |s| ens.trace.iter().filter(|r| r.step == s).count());
    let intermediate_writes = ens.trace.iter().filter(|r| r.pos > 0 && r.pos < d).count();
    let tokens_remaining = [0, d].iter().filter(|&&p| matches!(ens.tapes[0].read(p), TOKEN | KILL)).count();
    Ok(EprOutcome { trace: ens.trace, kill_step, kill_writes, intermediate_writes, tokens_remaining, steps: ens.steps })
}

/// `c₁·dS² − c₂·dt²`.
pub fn step_budget(ds: f64, dt: f64, c1: f64, c2: f64) -> Result<f64> {
    if ds < 0.0 || dt < 0.0 {
        return Err(Error::Domain(format!("dS and dt must be nonnegative, got {ds}, {dt}")));
    }
    Ok(c1 * ds * ds - c2 * dt * dt)
}

const PAIR_RULES: &str = "\
# second head sweeps right over every cell after the first
match: (m0.h0,0,*,x,scan) (m0.h1,0,*,x,q) -> write: (x,scan,S) (x,q,R)
match: (m0.h0,0,*,x,scan) (m0.h1,0,*,_,q) -> write: (x,back,S) (_,q,L)
# and returns until it meets the first head
match: (m0.h0,0,*,x,back) (m0.h1,0,*,x,q,!m0.h0) -> write: (x,back,S) (x,q,L)
match: (m0.h0,0,*,x,back) (m0.h1,0,*,x,q,@m0.h0) -> write: (x,scan,R) (x,q,R)
";

pub fn pair_rules() -> Result<RuleSet> {
    RuleSet::parse(PAIR_RULES)
}

/// Steps taken by the two-head machine that visits every pair of cells on a
/// tape of `n` cells.
pub fn measure_pairs(n: usize) -> Result<u64> {
    if n == 0 {
        return Ok(0);
    }
    let tape = Tape::new(&"x".repeat(n));
    let heads = vec![
        Head { id: HeadRef { machine: 0, head: 0 }, tape: 0, pos: 0, state: "scan".into() },
        Head { id: HeadRef { machine: 0, head: 1 }, tape: 0, pos: 0, state: "q".into() },
    ];
    let mut ens = Ensemble::new(vec![tape], heads, pair_rules()?)?;
    ens.record = false;
    let cap = 4 * (n as u64 + 2).pow(2);
    if !ens.run(cap)? {
        return Err(Error::MaxIterations(cap as usize));
    }
    debug_assert_eq!(ens.tapes[0].read(n as i64), BLANK);
    Ok(ens.steps)
}
