//! End-to-end tests of the `zofw` binary: exit codes, CSV contracts,
//! and byte-level determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn zofw() -> Command {
    Command::new(env!("CARGO_BIN_EXE_zofw"))
}

fn repo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").canonicalize().unwrap()
}

fn run_ok(cmd: &mut Command) -> Output {
    let out = cmd.output().expect("binary runs");
    assert!(
        out.status.success(),
        "expected success, got {:?}\nstdout: {}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn strip_elapsed(csv: &str) -> String {
    csv.lines()
        .map(|l| match l.rfind(',') {
            Some(p) => &l[..p],
            None => l,
        })
        .collect::<Vec<_>>()
        .join("\n")
}

const QUAD_CONFIG: &str = r#"
task = "quadratic"
seed = 7

[quadratic]
a = 1.0
n = 2

[constraint]
kind = "l1"
r = 1.0

[solver]
kind = "zsfw_dvr"
t_iters = 200
p = 0.5
b = 2
sample_size = 1

[pgd]
iters = 2000
lr = 0.3
"#;

#[test]
fn run_quadratic_writes_full_trace_with_small_final_gap() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("quad.toml");
    std::fs::write(&cfg, QUAD_CONFIG).unwrap();
    let out = run_ok(zofw().args(["run", "--config"]).arg(&cfg).arg("--out").arg(dir.path()));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("f_star=0"), "summary should report the reference: {stdout}");

    let csv = std::fs::read_to_string(dir.path().join("quad_zsfw_dvr_7.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 202, "header plus T+1 rows");
    assert_eq!(lines[0], "iter,queries,f,gap_obj,gap_fw,branch,elapsed_ms");
    let last: Vec<&str> = lines[201].split(',').collect();
    let gap: f64 = last[3].parse().unwrap();
    assert!(gap <= 1e-3, "final gap_obj {gap} above 1e-3");
    // queries strictly non-decreasing.
    let mut prev = 0u64;
    for line in &lines[1..] {
        let q: u64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!(q >= prev);
        prev = q;
    }
}

#[test]
fn identical_configs_reproduce_identical_csv_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("quad.toml");
    std::fs::write(&cfg, QUAD_CONFIG).unwrap();
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    run_ok(zofw().args(["run", "--config"]).arg(&cfg).arg("--out").arg(&out_a));
    run_ok(zofw().args(["run", "--config"]).arg(&cfg).arg("--out").arg(&out_b));
    let a = std::fs::read_to_string(out_a.join("quad_zsfw_dvr_7.csv")).unwrap();
    let b = std::fs::read_to_string(out_b.join("quad_zsfw_dvr_7.csv")).unwrap();
    assert_eq!(strip_elapsed(&a), strip_elapsed(&b));
}

#[test]
fn missing_dataset_file_exits_two_and_names_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(
        &cfg,
        r#"
task = "logistic"

[dataset]
path = "no/such/file.libsvm"

[constraint]
kind = "l1"
r = 1.0

[solver]
kind = "zsfw_dvr"
t_iters = 10
"#,
    )
    .unwrap();
    let out = zofw().args(["run", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("no/such/file.libsvm"), "stderr should name the path: {stderr}");
}

#[test]
fn malformed_config_exits_two_with_key_context() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "task = \"logistic\"\n").unwrap();
    let out = zofw().args(["run", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("constraint"), "error should name the missing key: {stderr}");
}

#[test]
fn verify_passes_and_negative_control_fails() {
    let out = run_ok(zofw().args(["verify", "--seed", "5"]));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("all 14 checks passed"), "{stdout}");

    let out = zofw().args(["verify", "--seed", "5", "--negative-control"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1), "tampered bound must fail the suite");
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL"));
}

#[test]
fn compare_writes_per_solver_csvs_and_sorted_merged_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cmp.toml");
    std::fs::write(
        &cfg,
        r#"
task = "quadratic"
seeds = [3, 1]

[quadratic]
a = 1.0
n = 4

[constraint]
kind = "l1"
r = 1.0

[pgd]
iters = 500
lr = 0.2

[[solvers]]
kind = "zsfw_dvr"
t_iters = 30
p = 0.5
b = 2

[[solvers]]
kind = "zofwgd"
t_iters = 30
lr = 1.0

[[solvers]]
kind = "zofwsgd"
t_iters = 30
b = 2
batch = 3
lr = 1.0

[[solvers]]
kind = "acc_szofw"
t_iters = 30
batch = 2
q = 4
lr = 1.0
"#,
    )
    .unwrap();
    run_ok(zofw().args(["compare", "--config"]).arg(&cfg).arg("--out").arg(dir.path()));
    for solver in ["zsfw_dvr", "zofwgd", "zofwsgd", "acc_szofw"] {
        for seed in [1, 3] {
            let name = format!("{solver}_{seed}.csv");
            assert!(dir.path().join(&name).exists(), "missing {name}");
        }
    }
    let merged = std::fs::read_to_string(dir.path().join("merged.csv")).unwrap();
    let lines: Vec<&str> = merged.lines().collect();
    assert_eq!(lines[0], "solver,seed,iter,queries,metric,value");
    let solver_col: Vec<&str> = lines[1..].iter().map(|l| l.split(',').next().unwrap()).collect();
    let mut labels: Vec<&str> = solver_col.clone();
    labels.dedup();
    // Sorted by (solver in config order, seed, iter): each solver forms
    // one contiguous block.
    assert_eq!(labels, vec!["zsfw_dvr", "zofwgd", "zofwsgd", "acc_szofw"]);
    let first_gd = solver_col.iter().position(|&s| s == "zofwgd").unwrap();
    let zsfw_seeds: Vec<u64> = lines[1..=first_gd]
        .iter()
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    let mut sorted = zsfw_seeds.clone();
    sorted.sort();
    assert_eq!(zsfw_seeds, sorted, "seeds must be sorted within a solver");
}

#[test]
fn compare_with_empty_solver_list_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cmp.toml");
    std::fs::write(
        &cfg,
        r#"
task = "quadratic"
seeds = [1]
solvers = []

[quadratic]
a = 1.0
n = 2

[constraint]
kind = "l1"
r = 1.0
"#,
    )
    .unwrap();
    let out = zofw().args(["compare", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn attack_eval_writes_success_curve_starting_at_zero() {
    let root = repo_root();
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("attack.toml");
    std::fs::write(
        &cfg,
        format!(
            r#"
task = "attack"
seed = 1

[attack]
model = "{root}/assets/attack_toy_model.txt"
images = "{root}/assets/attack_toy_images.txt"
checkpoint_every = 20

[constraint]
kind = "l2"
r = 3.0

[solver]
kind = "zsfw_dvr"
t_iters = 100
query_budget = 20000

[pgd]
enabled = false
"#,
            root = root.display()
        ),
    )
    .unwrap();
    run_ok(zofw().args(["attack-eval", "--config"]).arg(&cfg).arg("--out").arg(dir.path()));
    let csv = std::fs::read_to_string(dir.path().join("asr_zsfw_dvr_1.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "queries,asr");
    let first: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(first[1], "0", "zero perturbation must have zero success rate");
    for line in &lines[1..] {
        let asr: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!((0.0..=1.0).contains(&asr));
    }
}

#[test]
fn stats_reports_counts_for_bundled_images() {
    let root = repo_root();
    let out = run_ok(zofw().args(["stats", "--data"]).arg(root.join("assets/attack_toy_images.txt")));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("n=25 d=64 nnz=1600"), "{stdout}");
    assert!(stdout.contains("labels {0:25}"), "{stdout}");
}
