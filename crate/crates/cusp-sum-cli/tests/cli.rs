use std::io::Write;
use std::process::{Command, Output};

use cusp_sum::kloosterman::kloosterman_sum;
use serde_json::Value;

fn cusp_sum(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_cusp-sum"));
    cmd.args(args);
    match threads {
        Some(t) => cmd.env("CUSP_SUM_THREADS", t),
        None => cmd.env_remove("CUSP_SUM_THREADS"),
    };
    cmd.output().unwrap()
}

fn config_file(text: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

fn records(out: &Output) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_reader(&out.stdout[..]);
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|x| x.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

#[test]
fn kloosterman_rows_respect_weil_and_recompute() {
    let out = cusp_sum(&["run", "--command", "kloosterman", "--c-max", "500"], None);
    assert_eq!(out.status.code(), Some(0));
    let (header, rows) = records(&out);
    assert_eq!(header, ["m", "n", "c", "value", "weil_ratio", "seed"]);
    assert_eq!(rows.len(), 500 * 4);
    for row in &rows {
        assert!(row[4].parse::<f64>().unwrap() <= 1.0);
        assert_eq!(row[5], "0");
    }
    for row in rows.iter().step_by(97) {
        let (m, n, c): (i64, i64, u64) = (
            row[0].parse().unwrap(),
            row[1].parse().unwrap(),
            row[2].parse().unwrap(),
        );
        assert_eq!(kloosterman_sum(m, n, c).unwrap(), row[3].parse::<f64>().unwrap());
    }
}

#[test]
fn karatsuba_example_has_no_violations() {
    let args = [
        "run",
        "--command",
        "bounds",
        "--lemma",
        "karatsuba",
        "--seed",
        "42",
        "--trials",
        "10000",
    ];
    let out = cusp_sum(&args, None);
    assert_eq!(out.status.code(), Some(0));
    let (_, rows) = records(&out);
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][0], "karatsuba");
    assert_eq!(rows[0][5], "42");
    assert!(String::from_utf8_lossy(&out.stderr).contains("karatsuba_violations = 0"));

    let mut json_args = args.to_vec();
    json_args.extend(["--format", "json"]);
    let v: Value = serde_json::from_slice(&cusp_sum(&json_args, None).stdout).unwrap();
    assert_eq!(v["schema"], 1);
    assert_eq!(v["seed"], 42);
    assert_eq!(v["summary"]["karatsuba_violations"], 0);
    assert_eq!(v["config"]["trials"], "10000");
}

#[test]
fn empty_config_prints_usage() {
    let f = config_file("# nothing here\n");
    let out = cusp_sum(&["run", "--config", f.path().to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage: cusp-sum run"));
    assert_eq!(cusp_sum(&[], None).status.code(), Some(2));
}

#[test]
fn config_errors_exit_two() {
    for text in [
        "command=kloosterman\nc-max",
        "command=kloosterman\nwidth=3",
        "command=kloosterman\nc-max=many",
    ] {
        let f = config_file(text);
        let out = cusp_sum(&["run", "--config", f.path().to_str().unwrap()], None);
        assert_eq!(out.status.code(), Some(2), "{text}");
    }
    assert_eq!(cusp_sum(&["run", "--command", "nope"], None).status.code(), Some(2));
    assert_eq!(cusp_sum(&["run", "--bogus", "1"], None).status.code(), Some(2));
}

#[test]
fn flags_override_the_file() {
    let f = config_file("command = bounds\nlemma = majorant\nseed = 3\ntrials = 50\n");
    let path = f.path().to_str().unwrap();
    let (_, rows) = records(&cusp_sum(&["run", "--config", path, "--lemma", "karatsuba"], None));
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][1], "trials=50");
    assert_eq!(rows[0][5], "3");
}

#[test]
fn budget_and_invariant_exit_codes() {
    let out = cusp_sum(&["run", "--command", "kloosterman", "--c-max", "20000000"], None);
    assert_eq!(out.status.code(), Some(3));
    let out = cusp_sum(&["run", "--command", "voronoi", "--tol", "1e-30"], None);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("FAILED"));
}

#[test]
fn reports_do_not_depend_on_thread_count() {
    let args = [
        "run",
        "--command",
        "scan",
        "--x-max",
        "4096",
        "--random",
        "4",
        "--seed",
        "11",
        "--format",
        "json",
    ];
    let one = cusp_sum(&args, Some("1"));
    let three = cusp_sum(&args, Some("3"));
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, three.stdout);
    let flag = cusp_sum(&[&args[..], &["--threads", "2"]].concat(), Some("1"));
    let (a, b): (Value, Value) = (
        serde_json::from_slice(&one.stdout).unwrap(),
        serde_json::from_slice(&flag.stdout).unwrap(),
    );
    assert_eq!(b["config"]["threads"], "2");
    assert_eq!(a["rows"], b["rows"]);
    assert_eq!(a["summary"], b["summary"]);
}
