//! Multihead Turing machines whose rules read and write several heads in one step.

mod demos;
mod machine;

pub use demos::{epr_rules, measure_pairs, pair_rules, run_epr_demo, step_budget, EprConfig, EprOutcome, KILL, TOKEN};
pub use machine::{
    trace_csv, Ensemble, Head, HeadMatch, HeadRef, HeadWrite, JointRule, PosClass, RuleSet, Shift, Tape, TraceRecord, BLANK, TRACE_HEADER,
};

#[cfg(test)]
mod tests;
