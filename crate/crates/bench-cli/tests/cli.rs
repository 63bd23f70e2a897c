//! End-to-end tests of the `coharray` binary: flag handling, exit codes,
//! CSV shape, and rerun determinism.

use std::io::Write;
use std::path::Path;
use std::process::Command;

use coharray_core::model::{coherence_direct, Placement, ProblemConfig};

fn coharray(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_coharray"))
        .args(args)
        .output()
        .expect("binary runs")
}

const SMALL: &[&str] = &[
    "--g", "16", "--mtilde", "8", "--ntilde", "8", "--m", "3", "--n", "3", "--runs", "3",
    "--seed", "5",
];

fn read_rows(path: &Path) -> (csv::StringRecord, Vec<csv::StringRecord>) {
    let mut reader = csv::Reader::from_path(path).unwrap();
    let headers = reader.headers().unwrap().clone();
    let rows = reader.records().map(|r| r.unwrap()).collect();
    (headers, rows)
}

#[test]
fn table1_emits_recheckable_records_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t1.csv");
    let mut args = vec!["table1"];
    args.extend_from_slice(SMALL);
    args.extend_from_slice(&["--p", "0.33", "--algo", "riap", "--algo", "diap"]);
    args.extend_from_slice(&["--out", out.to_str().unwrap()]);
    let output = coharray(&args);
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));

    let (headers, rows) = read_rows(&out);
    assert_eq!(
        headers.iter().collect::<Vec<_>>(),
        vec![
            "experiment", "algorithm", "m", "n", "m_tilde", "n_tilde", "g", "p", "seed",
            "coherence", "runtime_ms", "outer_iterations", "tx_indices", "rx_indices"
        ]
    );
    assert_eq!(rows.len(), 6, "2 algorithms x 3 runs");

    // every record recomputes to its stored coherence
    let cfg = ProblemConfig::new(8, 8, 3, 3, 16).unwrap();
    for row in &rows {
        let parse = |field: &str| -> Vec<usize> {
            field.split(';').map(|s| s.parse().unwrap()).collect()
        };
        let placement = Placement::new(parse(&row[12]), parse(&row[13])).unwrap();
        let stored: f64 = row[9].parse().unwrap();
        let mu = coherence_direct(&placement, &cfg).unwrap();
        assert!((mu - stored).abs() < 1e-12);
    }

    let (_, summary) = read_rows(&dir.path().join("t1-summary.csv"));
    assert_eq!(summary.len(), 2, "one cell per algorithm");
}

#[test]
fn reruns_are_identical_excluding_runtime() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    for out in [&a, &b] {
        let mut args = vec!["table1"];
        args.extend_from_slice(SMALL);
        args.extend_from_slice(&["--out", out.to_str().unwrap()]);
        assert!(coharray(&args).status.success());
    }
    let (ha, rows_a) = read_rows(&a);
    let (hb, rows_b) = read_rows(&b);
    assert_eq!(ha, hb);
    let runtime_col = ha.iter().position(|h| h == "runtime_ms").unwrap();
    assert_eq!(rows_a.len(), rows_b.len());
    for (x, y) in rows_a.iter().zip(&rows_b) {
        for col in 0..x.len() {
            if col == runtime_col {
                continue;
            }
            assert_eq!(&x[col], &y[col], "column {col} differs between reruns");
        }
    }
}

#[test]
fn trace_writes_dimensionality_sibling() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("tr.csv");
    let mut args = vec!["trace"];
    args.extend_from_slice(SMALL);
    args.extend_from_slice(&["--out", out.to_str().unwrap()]);
    assert!(coharray(&args).status.success());
    let (_, rows) = read_rows(&dir.path().join("tr-trace.csv"));
    assert!(!rows.is_empty());
    let first = &rows[0];
    assert_eq!(first[1].parse::<f64>().unwrap(), 8.0, "starts at the full tx grid");
    assert_eq!(first[2].parse::<f64>().unwrap(), 8.0);
    let last = rows.last().unwrap();
    assert_eq!(last[1].parse::<f64>().unwrap(), 3.0, "ends at M");
    assert_eq!(last[2].parse::<f64>().unwrap(), 3.0);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bench.conf");
    let out = dir.path().join("s.csv");
    let mut file = std::fs::File::create(&config).unwrap();
    writeln!(
        file,
        "g = 16\nmtilde = 8\nntilde = 8\nm = 3\nn = 3\nruns = 4\nseed = 2\nalgo = diap"
    )
    .unwrap();
    let output = coharray(&[
        "single",
        "--config",
        config.to_str().unwrap(),
        "--runs",
        "2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(output.status.success());
    let (_, rows) = read_rows(&out);
    assert_eq!(rows.len(), 2, "CLI --runs beats the config file");
    assert_eq!(&rows[0][8], "2", "seed comes from the config file");
}

#[test]
fn exit_codes_distinguish_failure_modes() {
    // bad flags
    let output = coharray(&["table1", "--runs", "zero"]);
    assert_eq!(output.status.code(), Some(1));
    // unknown subcommand
    let output = coharray(&["frobnicate"]);
    assert_eq!(output.status.code(), Some(1));
    // oracle instance over the enumeration cap
    let output = coharray(&["oracle", "--g", "200"]);
    assert_eq!(output.status.code(), Some(1));
    // unwritable output path
    let mut args = vec!["single"];
    args.extend_from_slice(SMALL);
    args.extend_from_slice(&["--out", "/nonexistent-dir/x.csv"]);
    let output = coharray(&args);
    assert_eq!(output.status.code(), Some(3));
}

#[test]
fn oracle_subcommand_reports_the_global_minimum() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o.csv");
    let output = coharray(&[
        "oracle", "--g", "10", "--mtilde", "4", "--ntilde", "4", "--m", "2", "--n", "2",
        "--out", out.to_str().unwrap(),
    ]);
    assert!(output.status.success());
    let (_, rows) = read_rows(&out);
    assert_eq!(rows.len(), 1);
    let best: f64 = rows[0][9].parse().unwrap();
    // spot-check optimality against a few hand-picked placements
    let cfg = ProblemConfig::new(4, 4, 2, 2, 10).unwrap();
    for tx in [[0, 1], [1, 3], [2, 3]] {
        for rx in [[0, 2], [0, 3]] {
            let p = Placement::new(tx.to_vec(), rx.to_vec()).unwrap();
            assert!(coherence_direct(&p, &cfg).unwrap() >= best - 1e-12);
        }
    }
}
