use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const CHEAP: [&str; 10] = [
    "--set",
    "trials=200",
    "--set",
    "critical_trials=200",
    "--set",
    "ells=[4, 8]",
    "--set",
    "critical_ell=8",
    "--set",
    "bootstrap=20",
];

fn landau(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_landau")).args(args).output().expect("binary runs")
}

fn crossing(out: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["perc-crossing", "--out", out.to_str().unwrap()];
    args.extend_from_slice(&CHEAP);
    args.extend_from_slice(extra);
    landau(&args)
}

fn csvs(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    v.sort();
    v
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn same_seed_gives_identical_csvs() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let ra = crossing(a.path(), &["--seed", "11"]);
    let rb = crossing(b.path(), &["--seed", "11"]);
    assert!(ra.status.code().is_some_and(|c| c < 2), "{}", stderr(&ra));
    assert!(rb.status.code().is_some_and(|c| c < 2), "{}", stderr(&rb));
    let (ca, cb) = (csvs(a.path()), csvs(b.path()));
    assert_eq!(ca.len(), 2);
    assert_eq!(ca, cb);
    assert!(a.path().join("perc-crossing.json").exists());
}

#[test]
fn thread_count_does_not_change_results() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    crossing(a.path(), &["--jobs", "1"]);
    crossing(b.path(), &["--jobs", "3"]);
    assert_eq!(csvs(a.path()), csvs(b.path()));
}

#[test]
fn different_seeds_differ() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    crossing(a.path(), &["--seed", "1"]);
    crossing(b.path(), &["--seed", "2"]);
    assert_ne!(csvs(a.path()), csvs(b.path()));
}

#[test]
fn empty_config_matches_no_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("empty.toml");
    fs::write(&cfg, "").unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    crossing(&a, &["--config", cfg.to_str().unwrap()]);
    crossing(&b, &[]);
    assert_eq!(csvs(&a), csvs(&b));
    let json: serde_json::Value = serde_json::from_slice(&fs::read(a.join("perc-crossing.json")).unwrap()).unwrap();
    assert_eq!(json["seed"], 0);
    assert_eq!(json["parameters"]["p"], 0.6);
}

#[test]
fn config_file_values_are_used() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, "seed = 5\n[perc-crossing]\np = 0.7\n").unwrap();
    let out = dir.path().join("r");
    crossing(&out, &["--config", cfg.to_str().unwrap()]);
    let json: serde_json::Value = serde_json::from_slice(&fs::read(out.join("perc-crossing.json")).unwrap()).unwrap();
    assert_eq!(json["seed"], 5);
    assert_eq!(json["parameters"]["p"], 0.7);
}

#[test]
fn invalid_probability_is_rejected_by_name() {
    let dir = tempfile::tempdir().unwrap();
    let o = crossing(dir.path(), &["--set", "p=1.5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("`p`"), "{}", stderr(&o));
    assert!(csvs(dir.path()).is_empty());
}

#[test]
fn unknown_experiment_lists_the_valid_ones() {
    let o = landau(&["nosuch"]);
    assert_eq!(o.status.code(), Some(2));
    let e = stderr(&o);
    for n in landau_cli::EXPERIMENTS {
        assert!(e.contains(n), "{e}");
    }
}

#[test]
fn unknown_config_section_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, "[percolation]\np = 0.7\n").unwrap();
    let o = landau(&["perc-crossing", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("perc-crossing"), "{}", stderr(&o));
}

#[test]
fn failed_check_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = crossing(dir.path(), &["--set", "critical_band=[0.0, 0.01]"]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL"));
    assert!(dir.path().join("perc-crossing.json").exists());
}
