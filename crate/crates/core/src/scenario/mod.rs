//! Named scenarios, their configuration and the result cache.
//!
//! A scenario reads a [`ScenarioConfig`], produces a set of [`OutputFile`]s
//! and never touches the filesystem itself. [`execute`] wraps a run with the
//! content-addressed [`Cache`].

mod cache;
mod config;
mod runs;

use std::fs;
use std::path::Path;

use crate::{Error, Result, VERSION};

pub use cache::{Cache, EntryMeta, Lookup, CACHE_ENV};
pub use config::{normalize_value, ConfigText, ScenarioConfig};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OutputFile {
    pub name: String,
    pub contents: String,
}

/// Static description of a scenario: producing module and parameter defaults.
#[derive(Clone, Copy, Debug)]
pub struct ScenarioSpec {
    pub name: &'static str,
    pub module: &'static str,
    pub summary: &'static str,
    pub params: &'static [(&'static str, &'static str)],
}

pub const SCENARIOS: &[ScenarioSpec] = &[
    ScenarioSpec {
        name: "free-gaussian",
        module: "fd-propagator",
        summary: "spreading of a resting Gaussian against the width law and the heat kernel",
        params: &[
            ("points", "1024"),
            ("lo", "-40"),
            ("hi", "40"),
            ("alpha", "1"),
            ("t_max", "2"),
            ("dt", "0.001"),
            ("samples", "20"),
            ("diffusion", "1"),
        ],
    },
    ScenarioSpec {
        name: "double-well",
        module: "fd-propagator",
        summary: "tunneling between two wells with per-step reduction at grain epsilon",
        params: &[
            ("points", "160"),
            ("lo", "-4"),
            ("hi", "4"),
            ("barrier", "4"),
            ("separation", "1.5"),
            ("epsilon", "0"),
            ("dt", "0.01"),
            ("horizon", "0.5"),
            ("every", "10"),
        ],
    },
    ScenarioSpec {
        name: "epr-hadamard",
        module: "state-core",
        summary: "Bell state under H⊗H and the matching classical mixture",
        params: &[("draws", "100000")],
    },
    ScenarioSpec {
        name: "emission",
        module: "state-core",
        summary: "emitted-photon probability j/(j+1) and the electron ground-state check",
        params: &[("j_max", "100"), ("contact", "1")],
    },
    ScenarioSpec {
        name: "urn",
        module: "aq-engine",
        summary: "urn measurement of a two-cell state with complex quanta",
        params: &[("p_left", "0.36"), ("quanta", "100000"), ("draws", "100000")],
    },
    ScenarioSpec {
        name: "two-fermion",
        module: "secq",
        summary: "two fermions with contact repulsion in a harmonic well",
        params: &[("points", "48"), ("half_width", "6"), ("omega", "1"), ("contact", "1")],
    },
    ScenarioSpec {
        name: "aq-vs-fd",
        module: "aq-engine",
        summary: "amplitude-quantum density and momentum sweep against finite differences",
        params: &[("potential", "harmonic"), ("quanta", "100000")],
    },
    ScenarioSpec {
        name: "mhtm-epr",
        module: "mhtm",
        summary: "kill rule removing two distant tokens in one step",
        params: &[("distance", "10000"), ("trigger", "true"), ("max_steps", "100")],
    },
    ScenarioSpec {
        name: "mhtm-budget",
        module: "mhtm",
        summary: "step budget c1 dS² − c2 dt² and the pair-visiting machine",
        params: &[("c1", "1"), ("c2", "1"), ("ds_max", "4"), ("dt_max", "4"), ("n_min", "64"), ("n_max", "512")],
    },
];

pub fn find(name: &str) -> Option<&'static ScenarioSpec> {
    SCENARIOS.iter().find(|s| s.name == name)
}

/// Overrides applied on top of a config file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub name: Option<String>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub out: Option<std::path::PathBuf>,
}

/// Validate a config file against the scenario schema and fill in defaults.
pub fn resolve(text: &ConfigText, over: &Overrides) -> Result<ScenarioConfig> {
    let name = over
        .name
        .clone()
        .or_else(|| text.get("scenario", "name").map(str::to_string))
        .ok_or_else(|| Error::Config("no scenario named".into()))?;
    let spec = find(&name).ok_or_else(|| Error::Config(format!("unknown scenario {name:?}")))?;
    for (section, keys) in &text.sections {
        let allowed: &[&str] = match section.as_str() {
            "scenario" => &["name", "seed", "threads"],
            "output" => &["dir"],
            s if s == spec.name => &[],
            s => return Err(Error::Config(format!("unknown section [{s}]"))),
        };
        for k in keys.keys() {
            let known = allowed.contains(&k.as_str()) || (section == spec.name && spec.params.iter().any(|p| p.0 == k));
            if !known {
                return Err(Error::Config(format!("unknown key {k} in [{section}]")));
            }
        }
    }
    let int = |key: &str| -> Result<Option<u64>> {
        text.get("scenario", key)
            .map(|v| normalize_value(v).parse::<u64>().map_err(|_| Error::Config(format!("scenario.{key} = {v:?} is not a nonnegative integer"))))
            .transpose()
    };
    let seed = over.seed.or(int("seed")?).unwrap_or(0);
    let threads = over.threads.or(int("threads")?.map(|t| t as usize)).unwrap_or(1);
    if threads == 0 {
        return Err(Error::Config("threads must be at least 1".into()));
    }
    let mut params: std::collections::BTreeMap<String, String> =
        spec.params.iter().map(|&(k, v)| (k.to_string(), v.to_string())).collect();
    if let Some(keys) = text.sections.get(spec.name) {
        for (k, v) in keys {
            params.insert(k.clone(), v.clone());
        }
    }
    let out = over.out.clone().or_else(|| text.get("output", "dir").map(Into::into));
    Ok(ScenarioConfig { name, seed, threads, params, out })
}

/// Run a scenario without the cache.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<Vec<OutputFile>> {
    let spec = find(&cfg.name).ok_or_else(|| Error::Config(format!("unknown scenario {:?}", cfg.name)))?;
    #[cfg(feature = "parallel")]
    {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
        pool.install(|| runs::dispatch(spec, cfg))
    }
    #[cfg(not(feature = "parallel"))]
    runs::dispatch(spec, cfg)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CacheStatus {
    Bypassed,
    Miss,
    Hit,
    /// A corrupted entry was found, recomputed and replaced.
    Recovered(String),
}

#[derive(Clone, Debug)]
pub struct Execution {
    pub files: Vec<OutputFile>,
    pub status: CacheStatus,
}

/// Run through the cache: a valid entry is returned as stored, anything else
/// is recomputed and stored.
pub fn execute(cfg: &ScenarioConfig, cache: Option<&Cache>) -> Result<Execution> {
    let Some(cache) = cache else {
        return Ok(Execution { files: run_scenario(cfg)?, status: CacheStatus::Bypassed });
    };
    let key = cfg.hash();
    let status = match cache.lookup(&key)? {
        Lookup::Hit { files, .. } => return Ok(Execution { files, status: CacheStatus::Hit }),
        Lookup::Miss => CacheStatus::Miss,
        Lookup::Corrupted(why) => {
            log::warn!("cache entry {key} corrupted ({why}); recomputing");
            CacheStatus::Recovered(why)
        }
    };
    let files = run_scenario(cfg)?;
    cache.store(&key, &files)?;
    Ok(Execution { files, status })
}

pub fn write_outputs(dir: &Path, files: &[OutputFile]) -> Result<()> {
    fs::create_dir_all(dir)?;
    for f in files {
        fs::write(dir.join(&f.name), &f.contents)?;
    }
    Ok(())
}

/// Process exit code for an error: 2 for usage and configuration problems, 1 otherwise.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Parse { .. } => 2,
        _ => 1,
    }
}

/// First line of every numeric file.
pub fn file_header(module: &str, cfg: &ScenarioConfig) -> String {
    format!("# aqsim module={module} version={VERSION} scenario={} config={}\n", cfg.name, cfg.hash())
}

/// Strip `#` header lines and parse the remaining CSV into a header row and records.
pub fn parse_csv(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let head = lines.next().map(|l| l.split(',').map(str::to_string).collect()).unwrap_or_default();
    (head, lines.map(|l| l.split(',').map(str::to_string).collect()).collect())
}

#[cfg(test)]
mod tests;
