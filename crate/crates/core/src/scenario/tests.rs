use super::*;

fn cfg(name: &str, extra: &str) -> ScenarioConfig {
    let text = ConfigText::parse(&format!("[scenario]\nname = {name}\nseed = 3\n[{name}]\n{extra}")).unwrap();
    resolve(&text, &Overrides::default()).unwrap()
}

fn summary(files: &[OutputFile]) -> std::collections::BTreeMap<String, String> {
    let f = files.iter().find(|f| f.name == "summary.csv").expect("summary file");
    parse_csv(&f.contents).1.into_iter().map(|r| (r[0].clone(), r[1].clone())).collect()
}

#[test]
fn every_scenario_has_unique_name_and_resolves() {
    for (i, s) in SCENARIOS.iter().enumerate() {
        assert!(SCENARIOS[..i].iter().all(|t| t.name != s.name));
        let c = resolve(&ConfigText::default(), &Overrides { name: Some(s.name.into()), ..Default::default() }).unwrap();
        assert_eq!(c.params.len(), s.params.len());
        assert_eq!((c.seed, c.threads), (0, 1));
    }
    assert_eq!(SCENARIOS.len(), 9);
}

#[test]
fn schema_rejects_unknowns() {
    let r = |t: &str| resolve(&ConfigText::parse(t).unwrap(), &Overrides::default());
    assert!(matches!(r("[scenario]\nname = nope\n"), Err(Error::Config(_))));
    assert!(matches!(r("[scenario]\nname = urn\ncolour = red\n"), Err(Error::Config(_))));
    assert!(matches!(r("[scenario]\nname = urn\n[urn]\nquanta = 5\nbogus = 1\n"), Err(Error::Config(_))));
    assert!(matches!(r("[scenario]\nname = urn\n[emission]\nj_max = 5\n"), Err(Error::Config(_))));
    assert!(matches!(r("[scenario]\nname = urn\nthreads = 0\n"), Err(Error::Config(_))));
    assert!(matches!(r("[urn]\nquanta = 5\n"), Err(Error::Config(_))));
    assert_eq!(exit_code(&r("[scenario]\nname = nope\n").unwrap_err()), 2);
    assert_eq!(exit_code(&Error::AllAnnihilated), 1);
}

#[test]
fn defaults_hash_like_explicit_values() {
    let a = cfg("urn", "");
    let b = cfg("urn", "quanta = 1e5\np_left = 0.360\n");
    assert_eq!(a.hash(), b.hash());
    let o = resolve(&ConfigText::parse("[scenario]\nname = urn\nseed = 3\n").unwrap(), &Overrides { seed: Some(4), ..Default::default() }).unwrap();
    assert_ne!(a.hash(), o.hash());
    assert_eq!(o.seed, 4);
}

#[test]
fn headers_name_module_version_and_hash() {
    let c = cfg("mhtm-budget", "n_max = 128\n");
    for f in run_scenario(&c).unwrap() {
        let first = f.contents.lines().next().unwrap();
        assert!(first.contains("module=mhtm"), "{first}");
        assert!(first.contains(&format!("version={}", crate::VERSION)));
        assert!(first.contains(&c.hash()));
    }
}

#[test]
fn double_well_tunnels_without_grain_and_blocks_with_it() {
    let open = summary(&run_scenario(&cfg("double-well", "")).unwrap());
    assert!(open["p_right_final"].parse::<f64>().unwrap() >= 0.1);
    let blocked = run_scenario(&cfg("double-well", "epsilon = 0.03\n")).unwrap();
    let s = summary(&blocked);
    assert!(s["max_transient"].parse::<f64>().unwrap() < 0.03);
    assert_eq!(s["blocked_every_step"], "true");
    assert_eq!(s["p_right_max"], "0");
}

#[test]
fn mhtm_epr_summary() {
    let s = summary(&run_scenario(&cfg("mhtm-epr", "")).unwrap());
    assert_eq!(s["kill_writes"], "2");
    assert_eq!(s["intermediate_writes"], "0");
    assert_eq!(s["tokens_remaining"], "0");
}

#[test]
fn urn_fractions_partition() {
    let files = run_scenario(&cfg("urn", "quanta = 10000\ndraws = 1000\n")).unwrap();
    let s = summary(&files);
    assert_eq!(s["complex_quanta"], "10000");
    assert_eq!(s["fraction_sum"], "1");
}

#[test]
fn emission_table_is_exact() {
    let files = run_scenario(&cfg("emission", "j_max = 10\n")).unwrap();
    let (head, rows) = parse_csv(&files[0].contents);
    assert_eq!(head, ["j", "emitted", "total", "probability"]);
    for r in rows {
        let j: u64 = r[0].parse().unwrap();
        assert_eq!((r[1].parse::<u64>().unwrap(), r[2].parse::<u64>().unwrap()), (j, j + 1));
    }
}

#[test]
fn cache_hit_miss_and_recovery() {
    let tmp = tempfile::tempdir().unwrap();
    let cache = Cache::new(tmp.path());
    let c = cfg("epr-hadamard", "draws = 1000\n");
    let first = execute(&c, Some(&cache)).unwrap();
    assert_eq!(first.status, CacheStatus::Miss);
    let second = execute(&c, Some(&cache)).unwrap();
    assert_eq!(second.status, CacheStatus::Hit);
    assert_eq!(first.files, second.files);
    let mut reseeded = c.clone();
    reseeded.seed += 1;
    assert_eq!(execute(&reseeded, Some(&cache)).unwrap().status, CacheStatus::Miss);
    std::fs::write(cache.entry_dir(&c.hash()).join("samples.csv"), "tampered\n").unwrap();
    let third = execute(&c, Some(&cache)).unwrap();
    assert!(matches!(third.status, CacheStatus::Recovered(_)));
    assert_eq!(third.files, first.files);
    assert_eq!(execute(&c, Some(&cache)).unwrap().status, CacheStatus::Hit);
    assert_eq!(execute(&c, None).unwrap().status, CacheStatus::Bypassed);
}
