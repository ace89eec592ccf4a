//! End-to-end CLI tests: dispatch in-process for speed, spawn the real
//! binary for exit-code semantics.

use adtrw_cli::commands::dispatch;
use std::path::{Path, PathBuf};
use std::process::Command;

struct TempDir(PathBuf);

impl TempDir {
    fn new(tag: &str) -> Self {
        let dir = std::env::temp_dir().join(format!("adtrw-cli-test-{tag}-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        TempDir(dir)
    }

    fn path(&self, name: &str) -> PathBuf {
        self.0.join(name)
    }
}

impl Drop for TempDir {
    fn drop(&mut self) {
        let _ = std::fs::remove_dir_all(&self.0);
    }
}

fn run_args(args: &[&str]) -> Result<(), adtrw_cli::CliError> {
    let mut argv = vec!["adtrw".to_string()];
    argv.extend(args.iter().map(|s| s.to_string()));
    dispatch(&argv)
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn mc_outputs_are_byte_identical_across_runs() {
    let dir = TempDir::new("mc-determinism");
    let a = dir.path("a.csv");
    let b = dir.path("b.csv");
    let c = dir.path("c.csv");
    for (path, seed) in [(&a, "5"), (&b, "5"), (&c, "6")] {
        run_args(&[
            "mc",
            "--density",
            "geometric:p=0.5",
            "--t-max",
            "10",
            "--samples",
            "20000",
            "--seed",
            seed,
            "--out",
            path.to_str().unwrap(),
        ])
        .unwrap();
    }
    assert_eq!(read(&a), read(&b), "same seed must reproduce bytes");
    assert_ne!(read(&a), read(&c), "different seed must differ");
    let header = read(&a);
    assert!(header.contains("# seed = 5"));
    assert!(header.contains("# shards = 2"));
    assert!(header.contains("# samples = 20000"));
}

#[test]
fn config_supplies_defaults_and_flags_override() {
    let dir = TempDir::new("config");
    let cfg = dir.path("run.conf");
    std::fs::write(
        &cfg,
        "density = geometric:p=0.5\nseed = 42\nsamples = 1000\nt_max = 4\n",
    )
    .unwrap();
    let out1 = dir.path("from_config.csv");
    run_args(&[
        "mc",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out1.to_str().unwrap(),
    ])
    .unwrap();
    assert!(read(&out1).contains("# seed = 42"));

    let out2 = dir.path("flag_wins.csv");
    run_args(&[
        "mc",
        "--config",
        cfg.to_str().unwrap(),
        "--seed",
        "7",
        "--out",
        out2.to_str().unwrap(),
    ])
    .unwrap();
    assert!(read(&out2).contains("# seed = 7"));
}

#[test]
fn config_errors_name_the_problem() {
    let dir = TempDir::new("config-errors");
    let cfg = dir.path("bad.conf");
    std::fs::write(&cfg, "density = trivial\nwhat is this\n").unwrap();
    let err = run_args(&["density", "--config", cfg.to_str().unwrap()]).unwrap_err();
    assert!(err.message.contains(":2"), "{}", err.message);

    std::fs::write(&cfg, "seed = 1\nseed = 2\n").unwrap();
    let err = run_args(&[
        "density",
        "--density",
        "trivial",
        "--config",
        cfg.to_str().unwrap(),
    ])
    .unwrap_err();
    assert!(err.message.contains("duplicate"), "{}", err.message);

    std::fs::write(&cfg, "mystery = 1\n").unwrap();
    let err = run_args(&[
        "density",
        "--density",
        "trivial",
        "--config",
        cfg.to_str().unwrap(),
    ])
    .unwrap_err();
    assert!(err.message.contains("unknown key"), "{}", err.message);

    std::fs::write(&cfg, "samples = lots\n").unwrap();
    let err = run_args(&[
        "mc",
        "--density",
        "trivial",
        "--t-max",
        "2",
        "--seed",
        "1",
        "--config",
        cfg.to_str().unwrap(),
    ])
    .unwrap_err();
    assert!(err.message.contains("samples"), "{}", err.message);
}

#[test]
fn density_file_spec_round_trips() {
    let dir = TempDir::new("density-file");
    let table = dir.path("psi.txt");
    std::fs::write(&table, "0.5\n0.25\n0.125\n").unwrap();
    let out = dir.path("states.csv");
    run_args(&[
        "states",
        "--density",
        &format!("file:{}", table.display()),
        "--t-max",
        "2",
        "--out",
        out.to_str().unwrap(),
    ])
    .unwrap();
    let text = read(&out);
    assert!(text.contains("t,n,probability"));
    // P(N(2)=1) = S(1)ψ(1) + S(0)ψ(2) = 0.25 + 0.25
    assert!(text.contains("2,1,5.0000000000000000e-1"), "{text}");
}

#[test]
fn bell_table_subcommand() {
    let dir = TempDir::new("bell");
    let out = dir.path("bell.csv");
    run_args(&[
        "bell",
        "--density",
        "geometric:p=0.5",
        "--r-max",
        "3",
        "--out",
        out.to_str().unwrap(),
    ])
    .unwrap();
    let text = read(&out);
    assert!(text.contains("r,n,value"));
    // B_{3,2} = 2 ψ(1) ψ(2) = 0.25
    assert!(text.contains("3,2,2.5000000000000000e-1"), "{text}");
}

#[test]
fn states_capped_rows_match_full_table() {
    let dir = TempDir::new("states-cap");
    let full = dir.path("full.csv");
    let capped = dir.path("capped.csv");
    run_args(&[
        "states",
        "--density",
        "sibuya:beta=0.5",
        "--t-max",
        "12",
        "--out",
        full.to_str().unwrap(),
    ])
    .unwrap();
    run_args(&[
        "states",
        "--density",
        "sibuya:beta=0.5",
        "--t-max",
        "12",
        "--n-max",
        "3",
        "--out",
        capped.to_str().unwrap(),
    ])
    .unwrap();
    let full_rows: Vec<&str> = read(&full)
        .lines()
        .map(|l| l.trim())
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .filter(|l| l.split(',').nth(1).unwrap().parse::<usize>().unwrap() <= 3)
        .map(|_| "")
        .collect();
    let capped_text = read(&capped);
    let capped_rows = capped_text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .count();
    assert_eq!(full_rows.len(), capped_rows);
    // same numeric content on a shared row
    let want = read(&full)
        .lines()
        .find(|l| l.starts_with("12,3,"))
        .unwrap()
        .to_string();
    assert!(capped_text.contains(&want), "missing row {want}");
}

#[test]
fn walk_json_format() {
    let dir = TempDir::new("walk-json");
    let out = dir.path("walk.json");
    run_args(&[
        "walk",
        "--density",
        "geometric:p=0.5",
        "--t",
        "2",
        "--format",
        "json",
        "--out",
        out.to_str().unwrap(),
    ])
    .unwrap();
    let doc: serde_json::Value = serde_json::from_str(&read(&out)).unwrap();
    assert_eq!(doc["meta"]["command"], "walk");
    let rows = doc["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 5);
    assert_eq!(rows[2]["probability"], 0.5);
}

#[test]
fn invert_bias_subcommand() {
    let dir = TempDir::new("invert");
    let f = dir.path("f.txt");
    // f(t) = 0.2 t -> geometric p = 0.6
    let lines: String = (1..=32).map(|t| format!("{}\n", 0.2 * t as f64)).collect();
    std::fs::write(&f, lines).unwrap();
    let out = dir.path("psi.csv");
    run_args(&[
        "invert-bias",
        "--f",
        &format!("file:{}", f.display()),
        "--out",
        out.to_str().unwrap(),
    ])
    .unwrap();
    let text = read(&out);
    assert!(
        text.contains("1,5.9999999999999998e-1") || text.contains("1,6.0000000000000"),
        "{text}"
    );

    // inadmissible input is a validation error naming the time
    std::fs::write(&f, "3.0\n").unwrap();
    let err = run_args(&["invert-bias", "--f", &format!("file:{}", f.display())]).unwrap_err();
    assert_eq!(err.code, 1);
    assert!(err.message.contains("t=1"), "{}", err.message);
}

#[test]
fn analyze_writes_report_and_site_table() {
    let dir = TempDir::new("analyze");
    let report = dir.path("report.json");
    let est = dir.path("est.csv");
    run_args(&[
        "analyze",
        "--density",
        "geometric:p=0.6",
        "--sites",
        "-2..2",
        "--t-max",
        "512",
        "--out",
        report.to_str().unwrap(),
        "--est-csv",
        est.to_str().unwrap(),
    ])
    .unwrap();
    let doc: serde_json::Value = serde_json::from_str(&read(&report)).unwrap();
    assert_eq!(doc["verdict"], "transient");
    assert!((doc["est"].as_f64().unwrap() - 5.0).abs() < 1e-9);
    assert!((doc["escape_prob"].as_f64().unwrap() - 0.2).abs() < 1e-9);
    let est_text = read(&est);
    assert!(est_text.contains("site,est_exact,est_numeric"));
    assert_eq!(est_text.lines().filter(|l| !l.starts_with('#')).count(), 6); // header + 5 sites
}

#[test]
fn sibuya_figures_and_est() {
    let dir = TempDir::new("sibuya");
    let out = dir.path("fig3.csv");
    run_args(&[
        "sibuya",
        "--beta",
        "0.5",
        "--fig",
        "3",
        "--t-max",
        "100",
        "--out",
        out.to_str().unwrap(),
    ])
    .unwrap();
    let text = read(&out);
    // t = 2 row carries E[Y_2] = -1/4
    assert!(
        text.contains("5.0000000000000000e-1,2,-2.5000000000000000e-1"),
        "{text}"
    );

    let out = dir.path("est.csv");
    run_args(&[
        "sibuya",
        "--beta",
        "0.5",
        "--fig",
        "est",
        "--out",
        out.to_str().unwrap(),
    ])
    .unwrap();
    assert!(read(&out).contains("beta,est"));
}

#[test]
fn actrw_table_is_deterministic() {
    let dir = TempDir::new("actrw");
    let a = dir.path("a.csv");
    let b = dir.path("b.csv");
    for path in [&a, &b] {
        run_args(&[
            "actrw",
            "--density",
            "geometric:p=0.6",
            "--mu",
            "0.8",
            "--xi0",
            "1.0",
            "--t",
            "0:2:0.5",
            "--n-max",
            "4",
            "--out",
            path.to_str().unwrap(),
        ])
        .unwrap();
    }
    assert_eq!(read(&a), read(&b));
}

// ---- true process-level tests against the built binary ----

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_adtrw"))
}

#[test]
fn binary_exit_codes() {
    // success
    let out = binary()
        .args(["density", "--density", "trivial", "--horizon", "2"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("t,psi"));

    // validation error
    let out = binary()
        .args(["density", "--density", "geometric:p=2"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));

    // unknown flag is a validation error
    let out = binary().args(["density", "--bogus"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));

    // numerical envelope violation
    let out = binary()
        .args([
            "actrw",
            "--density",
            "trivial",
            "--mu",
            "0.5",
            "--xi0",
            "1.0",
            "--t",
            "3000:3000:1",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
