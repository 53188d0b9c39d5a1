//! `aqsim`: run one named scenario and write its CSV outputs.

use std::path::PathBuf;
use std::process::ExitCode;

use aqsim::scenario::{self, Cache, CacheStatus, ConfigText, Overrides, SCENARIOS};
use clap::{CommandFactory, Parser};

#[derive(Parser, Debug)]
#[command(name = "aqsim", version, about = "Grained-amplitude quantum simulation scenarios")]
struct Cli {
    /// Scenario to run; overrides `name` in the config file.
    scenario: Option<String>,
    /// Sectioned key = value configuration file.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    #[arg(long, value_name = "N")]
    threads: Option<usize>,
    /// Output directory [default: aqsim-out/<scenario>].
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Neither read nor write the result cache.
    #[arg(long)]
    no_cache: bool,
    #[arg(long)]
    list_scenarios: bool,
}

fn usage_error(msg: &str) -> ExitCode {
    eprintln!("error: {msg}\n\n{}", Cli::command().render_usage());
    eprintln!("run `aqsim --list-scenarios` for the available scenarios");
    ExitCode::from(2)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if cli.list_scenarios {
        for s in SCENARIOS {
            println!("{:<14} {:<14} {}", s.name, s.module, s.summary);
        }
        return ExitCode::SUCCESS;
    }
    let text = match &cli.config {
        Some(path) => match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) => return usage_error(&format!("cannot read {}: {e}", path.display())),
        },
        None => String::new(),
    };
    let parsed = match ConfigText::parse(&text) {
        Ok(p) => p,
        Err(e) => return usage_error(&e.to_string()),
    };
    let over = Overrides { name: cli.scenario.clone(), seed: cli.seed, threads: cli.threads, out: cli.out.clone() };
    let cfg = match scenario::resolve(&parsed, &over) {
        Ok(c) => c,
        Err(e) => return usage_error(&e.to_string()),
    };
    let cache = (!cli.no_cache).then(Cache::from_env);
    log::info!("running {} with config {}", cfg.name, cfg.hash());
    let run = match scenario::execute(&cfg, cache.as_ref()) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(scenario::exit_code(&e) as u8);
        }
    };
    let dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from("aqsim-out").join(&cfg.name));
    if let Err(e) = scenario::write_outputs(&dir, &run.files) {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    let status = match &run.status {
        CacheStatus::Bypassed => "cache bypassed",
        CacheStatus::Miss => "cache miss",
        CacheStatus::Hit => "cache hit",
        CacheStatus::Recovered(_) => "cache entry corrupted, recomputed",
    };
    eprintln!("{}: {} files in {} ({status})", cfg.name, run.files.len(), dir.display());
    match run.status {
        CacheStatus::Recovered(why) => {
            log::warn!("recovered from corrupted cache entry: {why}");
            ExitCode::from(3)
        }
        _ => ExitCode::SUCCESS,
    }
}
