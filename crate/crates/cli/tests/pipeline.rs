use gammalab_cli::config::{ScenarioConfig, Stage, BUILTINS};
use gammalab_cli::pipeline::{Minimize1dRecord, PredictRecord};
use gammalab_cli::store::num;
use gammalab_cli::*;
use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::Command;

fn in_dir(mut cfg: ScenarioConfig, dir: &Path) -> ScenarioConfig {
    cfg.output = dir.to_path_buf();
    cfg
}

fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(dir).unwrap().display().to_string();
                out.insert(rel, fs::read(&p).unwrap());
            }
        }
    }
    out
}

#[test]
fn builtins_round_trip_through_canonical_text() {
    for (name, _) in BUILTINS {
        let cfg = builtin(name).unwrap();
        let again = ScenarioConfig::parse(&cfg.to_text()).unwrap();
        assert_eq!(cfg, again, "{name}");
        assert_eq!(cfg.hash(), again.hash());
    }
    assert!(matches!(builtin("nope"), Err(ConfigError::UnknownScenario(..))));
}

#[test]
fn sections_and_dotted_keys_agree() {
    let a = ScenarioConfig::parse("potential.kind = asymmetric\npotential.beta = 0.5\nstages = constants\n").unwrap();
    let b = ScenarioConfig::parse("stages = constants # only\n[potential]\nkind = asymmetric\nbeta = 0.5\n").unwrap();
    assert_eq!(a, b);
}

#[test]
fn malformed_configs_name_the_key() {
    let err = ScenarioConfig::parse("scenario = x\n[domain]\nkind = flat\n").unwrap_err();
    assert!(matches!(&err, ConfigError::MissingKey(k) if k == "potential.kind"));
    assert!(err.to_string().contains("potential.kind"));
    let err = ScenarioConfig::parse("potential.kind = quartic\npotential.colour = red\nstages = constants\n").unwrap_err();
    assert!(matches!(err, ConfigError::UnknownKey(k) if k == "potential.colour"));
    let err = ScenarioConfig::parse("potential.kind = quartic\nthis line is wrong\n").unwrap_err();
    assert!(matches!(err, ConfigError::Syntax { line: 2, .. }));
    let err = ScenarioConfig::parse("potential.kind = quartic\nstages = weight\n").unwrap_err();
    assert!(err.to_string().contains("needs `iso`"), "{err}");
    let err = ScenarioConfig::parse("potential.kind = quartic\ndomain.kind = flat\nladder.eps = 0.1, 0.05\n").unwrap_err();
    assert!(err.to_string().contains("ladder.eps"), "{err}");
    let err = ScenarioConfig::parse("potential.kind = quartic\nstages = constants, dynamics\n").unwrap_err();
    assert!(matches!(err, ConfigError::MissingKey(k) if k == "dynamics.flow"));
}

#[test]
fn stage_closure_follows_dependencies() {
    assert_eq!(Stage::Minimize1d.closure(), vec![Stage::Constants, Stage::Iso, Stage::Weight, Stage::Minimize1d]);
    assert_eq!(Stage::Constants.closure(), vec![Stage::Constants]);
}

#[test]
fn flat_scenario_runs_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let store = run_scenario(&in_dir(builtin("flat").unwrap(), dir.path())).unwrap();
    assert_eq!(store.manifest.completed.len(), 6);
    assert!(store.manifest.failure.is_none());
    let rec: Minimize1dRecord = store.read(Stage::Minimize1d).unwrap();
    assert_eq!(rec.ladder.len(), 4);
    assert!(rec.ladder.iter().all(|r| r.el_residual <= 1e-9 && r.locality_ok));
    assert!(rec.gap_limit.unwrap().value.abs() < 1e-3);
    let table = store.table("minimize1d").unwrap();
    assert_eq!(table.rows.len(), 4);
    assert!(store.verify_hash().unwrap());
}

#[test]
fn rect_crossover_ranks_the_quarter_disk_first() {
    let dir = tempfile::tempdir().unwrap();
    let store = run_scenario(&in_dir(builtin("rect-crossover").unwrap(), dir.path())).unwrap();
    let rec: PredictRecord = store.read(Stage::Predict).unwrap();
    let labels: Vec<&str> = rec.ranking.iter().map(|r| r.label.as_str()).collect();
    assert_eq!(labels, ["quarter-disk", "straight-cut"]);
    assert!(rec.ranking[0].f2 < 0.0 && rec.ranking[1].f2 == 0.0);
    assert_eq!(rec.selected, "quarter-disk");
    let m: Minimize1dRecord = store.read(Stage::Minimize1d).unwrap();
    assert_eq!(m.bound_holds, Some(true));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = in_dir(builtin("rect-crossover").unwrap(), dir.path());
    let mut store = run_scenario(&cfg).unwrap();
    emit_plots(&mut store).unwrap();
    let first = snapshot(dir.path());
    let mut store = run_scenario(&cfg).unwrap();
    emit_plots(&mut store).unwrap();
    assert_eq!(first, snapshot(dir.path()));
    // Same scenario elsewhere: same numbers, different manifest hash.
    let other = tempfile::tempdir().unwrap();
    let store2 = run_scenario(&in_dir(builtin("rect-crossover").unwrap(), other.path())).unwrap();
    assert_ne!(store2.manifest.input_hash, store.manifest.input_hash);
    for t in &store.manifest.tables {
        assert_eq!(fs::read(dir.path().join(t)).unwrap(), fs::read(other.path().join(t)).unwrap(), "{t}");
    }
    // A changed seed changes the hash.
    let mut seeded = cfg.clone();
    seeded.seed = 9;
    assert_ne!(seeded.hash(), cfg.hash());
}

#[test]
fn tampered_config_fails_hash_check() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ScenarioConfig::parse("potential.kind = quartic\nstages = constants\n").unwrap();
    let store = run_scenario(&in_dir(cfg, dir.path())).unwrap();
    assert!(store.verify_hash().unwrap());
    let path = dir.path().join("config.txt");
    let text = fs::read_to_string(&path).unwrap().replace("seed = 0", "seed = 1");
    fs::write(&path, text).unwrap();
    assert!(!ResultStore::open(dir.path()).unwrap().verify_hash().unwrap());
}

#[test]
fn records_are_append_only() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ScenarioConfig::parse("potential.kind = quartic\nstages = constants\n").unwrap();
    let mut store = run_scenario(&in_dir(cfg, dir.path())).unwrap();
    let err = store.record(Stage::Constants, &1.0).unwrap_err();
    assert!(err.to_string().contains("append-only"));
    let reopened = ResultStore::open(dir.path()).unwrap();
    assert!(reopened.get(Stage::Constants).unwrap().get("c_w").is_some());
}

#[test]
fn failing_stage_keeps_partial_store() {
    let dir = tempfile::tempdir().unwrap();
    // The surrogate's windows cannot fit this close to the end.
    let text = "potential.kind = quartic\nstages = constants, iso, weight\n[domain]\nkind = smooth\nperimeter = 1\nkappa = 1\nvm = 0.999\n";
    let cfg = in_dir(ScenarioConfig::parse(text).unwrap(), dir.path());
    let err = run_scenario(&cfg).unwrap_err();
    assert!(matches!(&err, Error::Stage { stage, .. } if stage == "weight"), "{err}");
    let store = ResultStore::open(dir.path()).unwrap();
    assert_eq!(store.manifest.completed, ["constants", "iso"]);
    assert_eq!(store.manifest.failure.as_ref().unwrap().stage, "weight");
    assert!(dir.path().join("failure.json").exists());
    assert!(store.get(Stage::Constants).is_some());
}

#[test]
fn plots_from_empty_and_ladder_stores() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ScenarioConfig::parse("potential.kind = quartic\nstages = constants\n").unwrap();
    let mut store = run_scenario(&in_dir(cfg, dir.path())).unwrap();
    let out = emit_plots(&mut store).unwrap();
    assert!(out.files.is_empty());
    assert_eq!(out.notes.len(), 3);

    let mut t = Table::new("minimize1d", &["eps", "gap", "rhs"]);
    for (e, g) in [(0.04, 0.2), (0.02, 0.12), (0.01, 0.09), (0.005, 0.08)] {
        t.push(vec![num(e), num(g), num(0.07)]);
    }
    store.write_table(&t).unwrap();
    let out = emit_plots(&mut store).unwrap();
    assert_eq!(out.files.len(), 1);
    let svg = fs::read_to_string(&out.files[0]).unwrap();
    assert_eq!(svg.matches("<circle").count(), 4);
    assert_eq!(svg.matches(r#"class="reference""#).count(), 1);
    emit_plots(&mut store).unwrap();
    assert_eq!(fs::read_to_string(&out.files[0]).unwrap(), svg);
}

#[test]
fn binary_prints_stage_record_and_rejects_bad_config() {
    let exe = env!("CARGO_BIN_EXE_gammalab");
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(exe)
        .args(["constants", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rec: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let cw = rec["c_w"]["value"].as_f64().unwrap();
    assert!((cw - 4.0 / 3.0).abs() < 1e-10);
    assert!(rec["shift_identity"]["passed"].as_bool().unwrap());

    let bad = dir.path().join("bad.txt");
    fs::write(&bad, "scenario = broken\n[domain]\nkind = flat\n").unwrap();
    let out = Command::new(exe).arg("run").arg("--config").arg(&bad).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("potential.kind"));
}
