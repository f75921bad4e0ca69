use std::fs;
use std::path::Path;

use frameless::cli::{main_with_args, EXIT_CONFIG, EXIT_OK, EXIT_USAGE};

fn run(args: &[&str]) -> i32 {
    main_with_args(std::iter::once("frameless").chain(args.iter().copied()))
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn empty_argv_is_usage_error() {
    assert_eq!(run(&[]), EXIT_USAGE);
    assert_eq!(run(&["simulate", "--no-such-flag"]), EXIT_USAGE);
}

#[test]
fn simulate_writes_table_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let code = run(&["simulate", "--out", out, "n_users=50", "runs=50", "--target_degree", "2.68", "--threshold_v", "0.83"]);
    assert_eq!(code, EXIT_OK);
    let table = read(dir.path(), "table1.csv");
    let mut lines = table.lines();
    assert!(lines.next().unwrap().starts_with("n_users,target_degree,policy,"));
    assert!(lines.next().unwrap().starts_with("50,2.68,dual,1,0.83,"));
    let manifest = read(dir.path(), "manifest.txt");
    assert!(manifest.contains("n_users=50\n"));
    assert!(manifest.contains("target_degree=2.68\n"));
    assert!(manifest.contains("seed=0\n"));
}

#[test]
fn flags_override_positional_and_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# small run\nn_users = 20\nruns = 10\nseed = 5\n").unwrap();
    let code = run(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
        "seed=6",
        "--seed",
        "7",
    ]);
    assert_eq!(code, EXIT_OK);
    let manifest = read(dir.path(), "manifest.txt");
    assert!(manifest.contains("n_users=20\n") && manifest.contains("seed=7\n"), "{manifest}");
}

#[test]
fn config_errors_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "n_users=20\nthis line is broken\n").unwrap();
    assert_eq!(run(&["simulate", "--out", out, "--config", cfg.to_str().unwrap()]), EXIT_CONFIG);
    assert_eq!(run(&["simulate", "--out", out, "colour=blue"]), EXIT_CONFIG);
    assert_eq!(run(&["simulate", "--out", out, "erasure_prob=2"]), EXIT_CONFIG);
    assert_eq!(run(&["simulate", "--out", out, "policy=lucky"]), EXIT_CONFIG);
    assert!(!dir.path().join("table1.csv").exists());
}

fn round_trip(command: &str, args: &[&str], csv: &[&str]) {
    let first = tempfile::tempdir().unwrap();
    let mut a = vec![command, "--out", first.path().to_str().unwrap()];
    a.extend_from_slice(args);
    assert_eq!(run(&a), EXIT_OK);

    let second = tempfile::tempdir().unwrap();
    let manifest = first.path().join("manifest.txt");
    let b = [command, "--config", manifest.to_str().unwrap(), "--out", second.path().to_str().unwrap()];
    assert_eq!(run(&b), EXIT_OK);
    for name in csv.iter().chain(&["manifest.txt"]) {
        assert_eq!(read(first.path(), name), read(second.path(), name), "{command}: {name}");
    }
}

#[test]
fn manifest_reproduces_output() {
    round_trip("simulate", &["n_users=40", "runs=40", "erasure_prob=0.1", "seed=11"], &["table1.csv"]);
    round_trip(
        "sweep",
        &["n_users=30", "runs=20", "g_grid=2.6:0.1:2.8", "v_grid=0.8,0.85"],
        &["table1.csv"],
    );
    round_trip("asymptotic", &["target_degree=3.12", "ratio_grid=0.9:0.01:1.2"], &["fig3.csv"]);
    round_trip("beacon", &["n_users=30", "runs=20", "beacon_len=3", "g_grid=2.8,2.9"], &["table3.csv"]);
    round_trip(
        "sensitivity",
        &["n_users=20", "runs=20", "g_grid=2.7,2.8", "v_grid=0.8", "alpha_max=0.05"],
        &["fig5.csv", "table2.csv"],
    );
}

#[test]
fn output_is_stable_across_job_counts() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["n_users=60", "runs=64", "seed=3"];
    let mut one = vec!["simulate", "--jobs", "1", "--out", a.path().to_str().unwrap()];
    one.extend_from_slice(&args);
    let mut four = vec!["simulate", "--jobs", "4", "--out", b.path().to_str().unwrap()];
    four.extend_from_slice(&args);
    assert_eq!(run(&one), EXIT_OK);
    assert_eq!(run(&four), EXIT_OK);
    assert_eq!(read(a.path(), "table1.csv"), read(b.path(), "table1.csv"));
}

#[test]
fn asymptotic_peak() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["asymptotic", "--out", dir.path().to_str().unwrap(), "target_degree=3.12"]), EXIT_OK);
    let csv = read(dir.path(), "fig3.csv");
    let (ratio, t) = csv
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<f64> = l.split(',').map(|x| x.parse().unwrap()).collect();
            (f[0], f[2])
        })
        .fold((0.0, 0.0), |best, p| if p.1 > best.1 { p } else { best });
    assert!((t - 0.874).abs() < 0.005, "{t}");
    assert!((ratio - 1.07).abs() < 0.01, "{ratio}");
}
