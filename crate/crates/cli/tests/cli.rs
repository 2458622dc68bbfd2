use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ssdsim_core::MetricsReport;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_ssdsim"));
    c.env_remove("SSDSIM_OUT_DIR");
    c
}

fn repo(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

fn ok(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn report(path: &Path) -> MetricsReport {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

/// A quick synthetic run: 16 chips, 300 mixed reads.
fn small(cmd: &mut Command) -> &mut Command {
    cmd.args(["--set", "geometry.num_channels=4", "--set", "geometry.chips_per_channel=4"])
        .args(["--set", "geometry.blocks_per_die=64", "--set", "workload.count=300"])
        .args(["--set", "workload.sizes=[4096, 16384]"])
}

#[test]
fn worked_example_reports_twenty_idle_slots_under_vas() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["run", "--policy", "vas", "--config"])
        .arg(repo("configs/worked_example.toml"))
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    let line = ok(&out);
    assert!(line.starts_with("vas: bandwidth"), "{line}");
    let r = report(&dir.path().join("vas.json"));
    assert_eq!(r.inter_chip_idle_slots.round(), 20.0);
    let csv = std::fs::read_to_string(dir.path().join("vas_chips.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 9);
    assert!(csv.starts_with("chip,channel,offset,utilization"));
}

#[test]
fn baseline_adds_txn_reduction() {
    let dir = tempfile::tempdir().unwrap();
    ok(&small(bin().args(["run", "--policy", "vas"]).arg("--out").arg(dir.path())).output().unwrap());
    let line = ok(&small(bin().args(["run", "--policy", "spk3"]))
        .arg("--baseline")
        .arg(dir.path().join("vas.json"))
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap());
    assert!(line.contains("txn reduction"), "{line}");
    let r = report(&dir.path().join("spk3.json"));
    assert!(r.txn_reduction_vs_baseline.unwrap() > 0.0);
}

#[test]
fn baseline_from_another_workload_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    ok(&small(bin().args(["run", "--policy", "vas"]).arg("--out").arg(dir.path())).output().unwrap());
    let out = small(bin().args(["run", "--set", "workload.seed=99"]))
        .arg("--baseline")
        .arg(dir.path().join("vas.json"))
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("digest"));
}

#[test]
fn out_dir_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    ok(&small(bin().arg("run").arg("--name").arg("envrun").env("SSDSIM_OUT_DIR", dir.path())).output().unwrap());
    assert!(dir.path().join("envrun.json").exists());
    assert!(dir.path().join("envrun_chips.csv").exists());
}

#[test]
fn report_config_redrives_an_identical_run() {
    let dir = tempfile::tempdir().unwrap();
    ok(&small(bin().args(["run", "--name", "first"]).arg("--out").arg(dir.path())).output().unwrap());
    let first = report(&dir.path().join("first.json"));
    let cfg = dir.path().join("echo.toml");
    std::fs::write(&cfg, first.config.to_toml()).unwrap();
    ok(&bin().args(["run", "--name", "second", "--config"]).arg(&cfg).arg("--out").arg(dir.path()).output().unwrap());
    assert_eq!(report(&dir.path().join("second.json")), first);
}

#[test]
fn missing_trace_exits_one_and_names_the_path() {
    let out = bin()
        .args(["run", "--set", "workload.source=trace", "--set", "workload.path=/nonexistent/cfs.csv"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent/cfs.csv"));
}

#[test]
fn config_errors_exit_one() {
    for args in [
        vec!["run", "--set", "queue.depth=0"],
        vec!["run", "--set", "geometry.colour=3"],
        vec!["run", "--policy", "fifo"],
        vec!["print-config", "--config", "/nonexistent/x.toml"],
        vec!["launch"],
    ] {
        let out = bin().args(&args).output().unwrap();
        assert_eq!(out.status.code(), Some(1), "{args:?}");
    }
}

#[test]
fn runtime_errors_exit_two() {
    // Too few blocks per die to ever hold the preconditioned data.
    let out = bin()
        .args(["run", "--set", "geometry.num_channels=1", "--set", "geometry.chips_per_channel=1"])
        .args(["--set", "geometry.blocks_per_die=8", "--set", "ftl.export_fraction=0.99"])
        .args(["--set", "ftl.free_block_threshold=0.01", "--set", "ftl.precondition_fill=1.0"])
        .args(["--set", "workload.read_fraction=0.0", "--set", "workload.count=2000"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn print_config_applies_overrides() {
    let text = ok(&bin().args(["print-config", "--policy", "pas", "--set", "timing.read_cell_time=25"]).output().unwrap());
    let cfg = ssdsim_core::Config::from_toml(&text).unwrap();
    assert_eq!(cfg.policy.name, ssdsim_core::PolicyKind::Pas);
    assert_eq!(cfg.timing.read_cell_time, 25.0);
}

#[test]
fn validate_trace_counts_records() {
    let trace = repo("crates/core/tests/data/msr_excerpt.csv");
    let line = ok(&bin().arg("validate-trace").arg(&trace).args(["--error-budget", "1"]).output().unwrap());
    assert!(line.contains("6 records (4 reads, 2 writes)"), "{line}");
    assert!(line.contains("1 malformed"), "{line}");
    let strict = bin().arg("validate-trace").arg(&trace).output().unwrap();
    assert_eq!(strict.status.code(), Some(1));
}

fn sweep(dir: &Path, extra: &[&str]) -> String {
    ok(&small(bin().arg("sweep").args(extra).arg("--out").arg(dir)).output().unwrap());
    std::fs::read_to_string(dir.join("sweep.csv")).unwrap()
}

#[test]
fn sweep_is_deterministic_and_pairs_with_vas() {
    let args = ["--chips", "4,16", "--sizes", "4K,16K", "--policies", "vas,spk3", "--root-seed", "11"];
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let first = sweep(a.path(), &args);
    assert_eq!(first, sweep(b.path(), &args));
    let mut rows = csv::Reader::from_reader(first.as_bytes());
    let header = rows.headers().unwrap().clone();
    let col = |name: &str| header.iter().position(|h| h == name).unwrap();
    let rows: Vec<csv::StringRecord> = rows.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 8);
    for r in &rows {
        assert_eq!(&r[col("status")], "ok");
        let paired = !r[col("txn_reduction_vs_baseline")].is_empty();
        assert_eq!(paired, &r[col("policy")] == "spk3");
    }
    assert_eq!(std::fs::read_dir(a.path().join("cells")).unwrap().count(), 16);
}

#[test]
fn one_cell_sweep_matches_run() {
    let dir = tempfile::tempdir().unwrap();
    sweep(dir.path(), &[]);
    ok(&small(bin().args(["run", "--name", "single"]).arg("--out").arg(dir.path())).output().unwrap());
    let cell = std::fs::read_dir(dir.path().join("cells"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .find(|p| p.extension().is_some_and(|e| e == "json"))
        .unwrap();
    assert_eq!(report(&cell), report(&dir.path().join("single.json")));
}

#[test]
fn failing_cells_are_recorded_and_the_sweep_continues() {
    let dir = tempfile::tempdir().unwrap();
    let out = small(bin().args(["sweep", "--chips", "0,4"]).arg("--out").arg(dir.path())).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[1].contains(",error,") && lines[1].contains("chips_per_channel"), "{}", lines[1]);
    assert!(lines[2].contains(",ok,"), "{}", lines[2]);
    assert!(dir.path().join("cells/chips4_sizemix_spk3.json").exists());
}
