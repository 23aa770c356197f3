//! End-to-end behavior of the `qir` binary: exit codes, output formats,
//! config resolution and reproducibility.

use std::path::Path;
use std::process::{Command, Output};

fn qir() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qir"))
}

fn run(args: &[&str]) -> Output {
    qir().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header: Vec<String> = lines
        .next()
        .unwrap()
        .split(',')
        .map(str::to_string)
        .collect();
    let rows = lines
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect();
    (header, rows)
}

fn column<'a>(header: &[String], rows: &'a [Vec<String>], name: &str) -> Vec<&'a str> {
    let i = header.iter().position(|h| h == name).unwrap_or_else(|| {
        panic!("column {name} missing from {header:?}");
    });
    rows.iter().map(|r| r[i].as_str()).collect()
}

#[test]
fn snr_emits_four_rows_for_all_protocols() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("snr.csv");
    let out = run(&[
        "snr",
        "--nb",
        "0.01",
        "--modes",
        "100",
        "--eta",
        "0.1",
        "--protocol",
        "all",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let (header, rows) = read_csv(&out_path);
    assert_eq!(rows.len(), 4);
    let snrs: Vec<f64> = column(&header, &rows, "snr")
        .iter()
        .map(|s| s.parse().unwrap())
        .collect();
    let qi2 = snrs[3];
    assert!((qi2 - 1.00000009e7).abs() / 1.00000009e7 < 1e-12);
    // manifest sidecar exists and names the command
    let manifest = std::fs::read_to_string(out_path.with_extension("csv.manifest")).unwrap();
    assert!(manifest.contains("meta.command = snr"));
}

#[test]
fn zero_noise_is_a_domain_error() {
    let out = run(&["snr", "--nb", "0", "--modes", "100", "--eta", "0.1"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("ZeroNoise"));
}

#[test]
fn usage_errors_exit_2() {
    let out = run(&["snr", "--nb", "0.01", "--bogus"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&[
        "snr",
        "--nb",
        "0.01",
        "--modes",
        "100",
        "--eta",
        "0.1",
        "--protocol",
        "xx",
    ]);
    assert_eq!(out.status.code(), Some(2));
    // missing required parameter
    let out = run(&["snr", "--nb", "0.01"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("modes"));
}

#[test]
fn io_errors_exit_4() {
    let out = run(&[
        "snr",
        "--nb",
        "0.01",
        "--modes",
        "100",
        "--eta",
        "0.1",
        "--out",
        "/nonexistent-dir/x.csv",
    ]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn validity_warning_is_surfaced() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("warn.csv");
    let out = run(&[
        "snr",
        "--nb",
        "0.2",
        "--modes",
        "10",
        "--eta",
        "0.5",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let (header, rows) = read_csv(&out_path);
    for w in column(&header, &rows, "warnings") {
        assert!(w.contains("low_noise_valid=false"), "got {w}");
    }
}

#[test]
fn config_file_resolves_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("run.cfg");
    std::fs::write(
        &cfg_path,
        "# defaults\nnb = 0.5\nmodes = 100\neta = 0.1\nprotocol = qi1\n",
    )
    .unwrap();
    let out_path = dir.path().join("out.csv");
    // flag --nb overrides the config's 0.5
    let out = run(&[
        "snr",
        "--config",
        cfg_path.to_str().unwrap(),
        "--nb",
        "0.01",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let (header, rows) = read_csv(&out_path);
    assert_eq!(rows.len(), 1);
    let nb: f64 = column(&header, &rows, "nb")[0].parse().unwrap();
    assert_eq!(nb, 0.01);

    // unknown config keys are rejected
    std::fs::write(&cfg_path, "nb = 0.1\nbogus_key = 1\n").unwrap();
    let out = run(&["snr", "--config", cfg_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("bogus_key"));
}

#[test]
fn env_seed_is_used_when_flag_absent() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("mc.csv");
    let out = qir()
        .env("QIR_DEFAULT_SEED", "123")
        .args([
            "mc",
            "--protocol",
            "qi1",
            "--nb",
            "0.01",
            "--modes",
            "100",
            "--eta",
            "0.1",
            "--trials",
            "1000",
            "--out",
            out_path.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let (header, rows) = read_csv(&out_path);
    assert_eq!(column(&header, &rows, "seed")[0], "123");
    // explicit flag wins over the environment
    let out = qir()
        .env("QIR_DEFAULT_SEED", "123")
        .args([
            "mc",
            "--protocol",
            "qi1",
            "--nb",
            "0.01",
            "--modes",
            "100",
            "--eta",
            "0.1",
            "--trials",
            "1000",
            "--seed",
            "9",
            "--out",
            out_path.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let (header, rows) = read_csv(&out_path);
    assert_eq!(column(&header, &rows, "seed")[0], "9");
}

#[test]
fn csv_numbers_round_trip_to_identical_bits() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("zzb.csv");
    let out = run(&[
        "zzb",
        "--protocol",
        "all",
        "--nb",
        "0.01",
        "--modes",
        "100",
        "--eta",
        "0.1",
        "--tau-min",
        "9e-6",
        "--tau-max",
        "1e-5",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&out_path).unwrap();
    for line in text.lines().skip(1) {
        for cell in line.split(',') {
            if cell.contains('e') && cell.chars().next().unwrap().is_ascii_digit()
                || cell.starts_with('-')
            {
                if let Ok(x) = cell.parse::<f64>() {
                    let reformatted = format!("{x:.16e}");
                    assert_eq!(
                        reformatted.parse::<f64>().unwrap().to_bits(),
                        x.to_bits(),
                        "cell {cell}"
                    );
                }
            }
        }
    }
}

#[test]
fn json_mirror_has_identical_keys() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("p.csv");
    let json_path = dir.path().join("p.json");
    let base = [
        "perr",
        "--protocol",
        "all",
        "--nb",
        "0.01",
        "--modes",
        "100",
        "--eta",
        "0.1",
    ];
    let mut args = base.to_vec();
    args.extend(["--out", csv_path.to_str().unwrap()]);
    assert!(run(&args).status.success());
    let mut args = base.to_vec();
    args.extend(["--out", json_path.to_str().unwrap(), "--format", "json"]);
    assert!(run(&args).status.success());

    let (header, rows) = read_csv(&csv_path);
    let parsed: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&json_path).unwrap()).unwrap();
    let array = parsed.as_array().unwrap();
    assert_eq!(array.len(), rows.len());
    for object in array {
        let keys: Vec<&str> = object
            .as_object()
            .unwrap()
            .keys()
            .map(String::as_str)
            .collect();
        let columns: Vec<&str> = header.iter().map(String::as_str).collect();
        assert_eq!(keys, columns);
    }
    // closed form metadata: qi rows used the closed form, ci rows did not
    let used = column(&header, &rows, "closed_form_used");
    assert_eq!(used, vec!["false", "false", "true", "true"]);
    let upper = column(&header, &rows, "upper_bound");
    assert_eq!(upper, vec!["false", "false", "false", "true"]);
}

#[test]
fn sweep_error_ratio_stays_below_one() {
    let dir = tempfile::tempdir().unwrap();
    let spec_path = dir.path().join("sweep.cfg");
    let out_path = dir.path().join("sweep.csv");
    std::fs::write(
        &spec_path,
        format!(
            "axis = eta log 0.01 1.0 50\nnb = 0.01\nmodes = 100\nrecord = error_ratio\nout = {}\n",
            out_path.display()
        ),
    )
    .unwrap();
    let out = run(&["sweep", "--spec", spec_path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let (header, rows) = read_csv(&out_path);
    assert_eq!(rows.len(), 50);
    for cell in column(&header, &rows, "error_ratio") {
        let ratio: f64 = cell.parse().unwrap();
        assert!(ratio < 1.0, "ratio {ratio}");
    }
}

#[test]
fn sweep_rejects_oversized_and_malformed_specs() {
    let dir = tempfile::tempdir().unwrap();
    let spec_path = dir.path().join("bad.cfg");
    // over the point guard
    std::fs::write(
        &spec_path,
        "axis = eta linear 0.1 1 10000\naxis = nb linear 0.001 0.01 10000\nnb = 0.01\nmodes = 100\nrecord = error_ratio\n",
    )
    .unwrap();
    let out = run(&["sweep", "--spec", spec_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    // log axis through zero
    std::fs::write(
        &spec_path,
        "axis = eta log 0 1 10\nnb = 0.01\nmodes = 100\nrecord = error_ratio\n",
    )
    .unwrap();
    let out = run(&["sweep", "--spec", spec_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    // no axes at all
    std::fs::write(&spec_path, "nb = 0.01\nmodes = 100\nrecord = error_ratio\n").unwrap();
    let out = run(&["sweep", "--spec", spec_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn timebudget_reports_both_time_and_ratio() {
    let out = run(&[
        "timebudget",
        "--t1",
        "100",
        "--bandwidth",
        "1e6",
        "--nb",
        "0.01",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("note:"), "missing note in {text}");
    // nonpositive inputs are domain errors
    let out = run(&[
        "timebudget",
        "--t1",
        "0",
        "--bandwidth",
        "1e6",
        "--nb",
        "0.01",
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn mc_k_of_m_rule_runs() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("kofm.csv");
    let out = run(&[
        "mc",
        "--protocol",
        "qi1",
        "--nb",
        "0.05",
        "--modes",
        "10",
        "--eta",
        "0.3",
        "--hypothesis",
        "h1",
        "--shots",
        "5",
        "--k",
        "2",
        "--trials",
        "20000",
        "--seed",
        "3",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let (header, rows) = read_csv(&out_path);
    assert_eq!(column(&header, &rows, "rule")[0], "2-of-5");
    let freq: f64 = column(&header, &rows, "frequency")[0].parse().unwrap();
    let closed: f64 = column(&header, &rows, "closed_form")[0].parse().unwrap();
    assert!(
        (freq - closed).abs() < 0.02,
        "freq {freq} vs closed {closed}"
    );
}

#[test]
fn manifest_rerun_reproduces_output_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first.csv");
    let out = run(&[
        "mc",
        "--protocol",
        "qi1",
        "--nb",
        "0.01",
        "--modes",
        "100",
        "--eta",
        "0.1",
        "--hypothesis",
        "h1",
        "--trials",
        "50000",
        "--seed",
        "31",
        "--out",
        first.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let manifest = format!("{}.manifest", first.display());
    let second = dir.path().join("second.csv");
    let out = run(&[
        "mc",
        "--config",
        &manifest,
        "--out",
        second.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(
        std::fs::read(&first).unwrap(),
        std::fs::read(&second).unwrap()
    );
}

#[test]
fn identical_flags_and_seed_give_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for path in [&a, &b] {
        let out = run(&[
            "mc",
            "--protocol",
            "qi2",
            "--nb",
            "0.01",
            "--modes",
            "100",
            "--eta",
            "0.1",
            "--hypothesis",
            "h1",
            "--trials",
            "100000",
            "--seed",
            "77",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}
