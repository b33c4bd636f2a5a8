//! Run-directory contract: determinism, manifest contents and the
//! file-based hand-off between the backward and forward phases.

use std::path::{Path, PathBuf};

use muskat_core::curve::{make_grid, Preset};
use muskat_core::scenario::{
    export_snapshot, import_snapshot, run_scenario, RunConfig, RunManifest, RunStatus, ScenarioId, FINAL_SNAPSHOT_FILE,
    MANIFEST_FILE,
};

fn small(scenario: ScenarioId, out: &Path) -> RunConfig {
    RunConfig {
        scenario,
        n: 64,
        dt: 2e-4,
        t_final: Some(if scenario == ScenarioId::BackwardSeed { -4e-3 } else { 4e-3 }),
        out_dir: out.to_path_buf(),
        ..RunConfig::default()
    }
}

fn read_manifest(dir: &Path) -> RunManifest {
    toml::from_str(&std::fs::read_to_string(dir.join(MANIFEST_FILE)).unwrap()).unwrap()
}

#[test]
fn identical_configs_give_identical_files() {
    let root = tempfile::tempdir().unwrap();
    let (a, b) = (root.path().join("a"), root.path().join("b"));
    let ma = run_scenario(&small(ScenarioId::BackwardSeed, &a)).unwrap();
    let mb = run_scenario(&small(ScenarioId::BackwardSeed, &b)).unwrap();
    assert_eq!(ma.status, RunStatus::Ok);
    assert_eq!(ma.files, mb.files);
    let data: Vec<&String> = ma.files.iter().filter(|f| f.ends_with(".csv")).collect();
    assert!(data.len() > 3, "{:?}", ma.files);
    for f in data {
        let (x, y) = (std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap());
        assert!(x == y, "{f} differs between identical runs");
    }
}

#[test]
fn manifest_lists_existing_files_and_round_trips() {
    let root = tempfile::tempdir().unwrap();
    let out = root.path().join("seed");
    let m = run_scenario(&small(ScenarioId::BackwardSeed, &out)).unwrap();
    for f in &m.files {
        assert!(out.join(f).exists(), "{f} listed but missing");
    }
    assert!(m.files.iter().any(|f| f == "initial.csv"));
    assert!(m.files.iter().any(|f| f == MANIFEST_FILE));
    let back = read_manifest(&out);
    assert_eq!(back.config, m.config);
    assert_eq!(back.phases, m.phases);
    assert_eq!(back.status, RunStatus::Ok);
    let phase = m.phase("backward").expect("backward phase");
    assert_eq!(phase.t_end, -4e-3);
}

#[test]
fn forward_rerun_reads_the_exported_state() {
    let root = tempfile::tempdir().unwrap();
    let seed_dir = root.path().join("seed");
    run_scenario(&small(ScenarioId::BackwardSeed, &seed_dir)).unwrap();
    let input: PathBuf = seed_dir.join(FINAL_SNAPSHOT_FILE);
    let exported = import_snapshot(&input).unwrap();
    assert_eq!(exported.time, -4e-3);

    let out = root.path().join("rerun");
    let m = run_scenario(&RunConfig {
        input: Some(input),
        ..small(ScenarioId::ForwardRerun, &out)
    })
    .unwrap();
    assert_eq!(m.status, RunStatus::Ok, "{}", m.message);
    let initial = import_snapshot(out.join("initial.csv")).unwrap();
    assert_eq!(initial.curve, exported.curve);
    assert_eq!(initial.time, exported.time);
    let phase = m.phase("forward").expect("forward phase");
    assert_eq!(phase.t_start, -4e-3);
    // No backward phase is run when an input is supplied.
    assert!(m.phase("backward").is_none());
}

#[test]
fn unreadable_input_is_an_error_but_still_leaves_a_manifest() {
    let root = tempfile::tempdir().unwrap();
    let out = root.path().join("rerun");
    let bad = root.path().join("bad.csv");
    std::fs::write(&bad, "not a snapshot\n").unwrap();
    let result = run_scenario(&RunConfig {
        input: Some(bad),
        ..small(ScenarioId::ForwardRerun, &out)
    });
    assert!(result.is_err());
    assert!(out.join(MANIFEST_FILE).exists());
    assert_eq!(read_manifest(&out).status, RunStatus::Error);
}

#[test]
fn export_then_import_is_exact_for_presets() {
    let root = tempfile::tempdir().unwrap();
    let g = make_grid(128).unwrap();
    for preset in [Preset::SeedT0, Preset::ConjT0, Preset::DeltaTilt(0.05)] {
        let c = preset.sample(g).unwrap();
        let path = root.path().join("snap.csv");
        export_snapshot(&c, 0.125, &path).unwrap();
        let s = import_snapshot(&path).unwrap();
        assert_eq!(s.curve, c, "{preset}");
        assert_eq!(s.time, 0.125);
    }
}
