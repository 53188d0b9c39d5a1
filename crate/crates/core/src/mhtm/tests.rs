use super::*;
use crate::Error;

fn h(machine: usize, head: usize) -> HeadRef {
    HeadRef { machine, head }
}

fn head(machine: usize, pos: i64, state: &str) -> Head {
    Head { id: h(machine, 0), tape: 0, pos, state: state.into() }
}

const INCREMENT: &str = "\
match: (m0.h0,0,*,1,run) -> write: (1,run,R)
match: (m0.h0,0,*,_,run) -> write: (1,halt,S)
";

#[test]
fn unary_increment() {
    let rules = RuleSet::parse(INCREMENT).unwrap();
    let mut e = Ensemble::new(vec![Tape::new("111")], vec![head(0, 0, "run")], rules).unwrap();
    assert!(e.run(100).unwrap());
    assert_eq!(e.tapes[0].trimmed(), "1111");
    assert_eq!(e.steps, 4);
    assert!(matches!(e.step(), Err(Error::Halt { steps: 4 })));
}

#[test]
fn two_head_swap_is_one_step() {
    let rules = RuleSet::parse("match: (m0.h0,0,*,a,s) (m1.h0,0,*,b,s) -> write: (b,t,S) (a,t,S)\n").unwrap();
    let mut e = Ensemble::new(vec![Tape::new("a_____b")], vec![head(0, 0, "s"), head(1, 6, "s")], rules).unwrap();
    e.step().unwrap();
    assert_eq!(e.steps, 1);
    assert_eq!(e.tapes[0].read(0), 'b');
    assert_eq!(e.tapes[0].read(6), 'a');
    assert_eq!(e.trace.len(), 2);
    assert!(e.trace.iter().all(|r| r.step == 1));
}

#[test]
fn coobserver_rule_fires_only_on_shared_cell() {
    let rules = RuleSet::parse("match: (m0.h0,0,*,a,q,@m1.h0) -> write: (b,q,S)\n").unwrap();
    for p0 in 0..4 {
        for p1 in 0..4 {
            let mut e = Ensemble::new(vec![Tape::new("aaaa")], vec![head(0, p0, "q"), head(1, p1, "q")], rules.clone()).unwrap();
            let fired = e.step().is_ok();
            assert_eq!(fired, p0 == p1, "positions {p0},{p1}");
            let changed = (0..4).filter(|&c| e.tapes[0].read(c) == 'b').count();
            assert_eq!(changed, usize::from(p0 == p1));
        }
    }
}

#[test]
fn overlapping_rules_rejected_at_load() {
    let text = "match: (m0.h0,0,*,a,q) -> write: (b,q,S)\nmatch: (m0.h0,0,3,a,q) -> write: (c,q,S)\n";
    assert!(matches!(RuleSet::parse(text), Err(Error::Nondeterminism(0, 1))));
    let independent = "match: (m0.h0,0,*,a,q) -> write: (b,q,S)\nmatch: (m1.h0,0,*,a,q) -> write: (c,q,S)\n";
    assert!(matches!(RuleSet::parse(independent), Err(Error::Nondeterminism(0, 1))));
    let exclusive = "match: (m0.h0,0,*,a,q,@m1.h0) -> write: (b,q,S)\nmatch: (m0.h0,0,*,a,q,!m1.h0) -> write: (c,q,S)\n";
    assert!(RuleSet::parse(exclusive).is_ok());
}

#[test]
fn parse_errors_carry_line_numbers() {
    let err = RuleSet::parse("# c\nmatch: (m0.h0,0,*,ab,q) -> write: (b,q,S)\n").unwrap_err();
    assert!(matches!(err, Error::Parse { line: 2, .. }));
    assert!(RuleSet::parse("match: (m0.h0,0,*,a,q) -> write: (b,q,X)\n").is_err());
}

#[test]
fn rule_text_round_trip() {
    for rules in [epr_rules().unwrap(), pair_rules().unwrap()] {
        assert_eq!(RuleSet::parse(&rules.to_text()).unwrap(), rules);
    }
}

#[test]
fn tape_grows_both_ways() {
    let rules = RuleSet::parse("match: (m0.h0,0,*,_,l) -> write: (x,l,L)\n").unwrap();
    let mut e = Ensemble::new(vec![Tape::new("")], vec![head(0, 0, "l")], rules).unwrap();
    e.run(3).unwrap();
    assert_eq!(e.tapes[0].extent(), (-2, 1));
    assert_eq!(e.tapes[0].trimmed(), "xxx");
}

#[test]
fn replay_is_identical() {
    let run = || {
        let tape = Tape::new(&"x".repeat(12));
        let heads = vec![
            Head { id: h(0, 0), tape: 0, pos: 0, state: "scan".into() },
            Head { id: h(0, 1), tape: 0, pos: 0, state: "q".into() },
        ];
        let mut e = Ensemble::new(vec![tape], heads, pair_rules().unwrap()).unwrap();
        e.run(10_000).unwrap();
        trace_csv(&e.trace)
    };
    let a = run();
    assert!(a.starts_with(TRACE_HEADER));
    assert_eq!(a, run());
}

#[test]
fn epr_kill_at_unit_distance() {
    let out = run_epr_demo(&EprConfig { distance: 1, trigger: true, max_steps: 100 }).unwrap();
    assert_eq!(out.kill_writes, 2);
    assert_eq!(out.tokens_remaining, 0);
    let k = out.kill_step.unwrap();
    assert_eq!(out.trace.iter().filter(|r| r.step == k).count(), 2);
}

#[test]
fn epr_kill_at_large_distance() {
    let out = run_epr_demo(&EprConfig { distance: 10_000, trigger: true, max_steps: 100 }).unwrap();
    assert_eq!(out.kill_writes, 2);
    assert_eq!(out.intermediate_writes, 0);
    assert_eq!(out.tokens_remaining, 0);
    assert_eq!(out.steps, 2);
}

#[test]
fn epr_without_trigger_persists() {
    let out = run_epr_demo(&EprConfig { distance: 50, trigger: false, max_steps: 500 }).unwrap();
    assert_eq!(out.kill_step, None);
    assert_eq!(out.tokens_remaining, 2);
    assert_eq!(out.steps, 500);
    assert_eq!(out.intermediate_writes, 0);
}

#[test]
fn budget_arithmetic() {
    assert_eq!(step_budget(2.0, 2.0, 1.5, 1.5).unwrap(), 0.0);
    assert_eq!(step_budget(3.0, 5.0, 1.0, 0.0).unwrap(), 9.0);
    assert!(step_budget(-1.0, 0.0, 1.0, 1.0).is_err());
}

#[test]
fn pair_machine_step_count() {
    // From start i: n−i moves right, one turn, n−1−i moves left, one advance.
    for n in [1usize, 2, 5, 17] {
        let want: u64 = (0..n).map(|i| 2 * (n - i) as u64 + 1).sum();
        assert_eq!(want, (n * n + 2 * n) as u64);
        assert_eq!(measure_pairs(n).unwrap(), want, "n={n}");
    }
}
