//! Command-line behavior: outputs, error exits, reproducibility, pairing.

use std::collections::HashMap;
use std::path::Path;

use cradar::cli::run;

fn cradar(args: &[&str]) -> i32 {
    let mut v = vec!["cradar"];
    v.extend_from_slice(args);
    run(v)
}

fn read_csv(path: &Path) -> Vec<HashMap<String, String>> {
    let text = std::fs::read_to_string(path).unwrap();
    assert!(!text.contains('\r'), "CSV must use LF line endings");
    let mut lines = text.lines();
    let header: Vec<String> = lines.next().unwrap().split(',').map(String::from).collect();
    lines
        .map(|l| {
            let cells: Vec<&str> = l.split(',').collect();
            assert_eq!(cells.len(), header.len(), "ragged row: {l}");
            header.iter().cloned().zip(cells.into_iter().map(String::from)).collect()
        })
        .collect()
}

fn num(row: &HashMap<String, String>, col: &str) -> f64 {
    row[col].parse().unwrap_or_else(|_| panic!("{col} = {:?}", row[col]))
}

fn out_dir(root: &Path, name: &str) -> String {
    root.join(name).to_str().unwrap().to_string()
}

#[test]
fn train_writes_outputs_with_table_budget() {
    let dir = tempfile::tempdir().unwrap();
    let out = out_dir(dir.path(), "train");
    assert_eq!(cradar(&["train", "--seed", "3", "--slots", "150", "--out", &out]), 0);
    for f in ["trace.csv", "summary.csv", "config.resolved", "checkpoint.json"] {
        assert!(Path::new(&out).join(f).is_file(), "{f} missing");
    }
    let resolved = std::fs::read_to_string(Path::new(&out).join("config.resolved")).unwrap();
    assert!(resolved.contains("# schema_version = 1"));
    assert!(resolved.contains("theta_max = 0.9\n"), "{resolved}");

    let trace = read_csv(&Path::new(&out).join("trace.csv"));
    assert_eq!(trace.len(), 150);
    for (k, row) in trace.iter().enumerate() {
        assert_eq!(row["slot"], k.to_string());
        for (col, v) in row {
            if v.is_empty() || col == "slot" {
                continue;
            }
            let digits = v
                .trim_start_matches('-')
                .split(['e', 'E'])
                .next()
                .unwrap()
                .chars()
                .filter(char::is_ascii_digit)
                .collect::<String>();
            assert!(digits.trim_start_matches('0').len() <= 9, "{col} = {v}");
        }
    }
    let summary = read_csv(&Path::new(&out).join("summary.csv"));
    assert_eq!(summary.last().unwrap()["episode"], "mean");
}

#[test]
fn missing_config_file_fails() {
    let dir = tempfile::tempdir().unwrap();
    let out = out_dir(dir.path(), "x");
    let missing = dir.path().join("nope.toml");
    assert_ne!(cradar(&["train", "--config", missing.to_str().unwrap(), "--out", &out]), 0);
}

#[test]
fn invalid_values_exit_with_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = out_dir(dir.path(), "x");
    assert_eq!(cradar(&["train", "--slots", "5", "--set", "objective.theta_max=1.5", "--out", &out]), 2);
    assert_eq!(cradar(&["train", "--slots", "5", "--set", "objective.no_such_key=1", "--out", &out]), 2);
    assert_ne!(cradar(&["baseline", "--fraction", "1.2", "--slots", "5", "--out", &out]), 0);
    assert_ne!(cradar(&["fly"]), 0);
}

#[test]
fn resolved_config_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let a = out_dir(dir.path(), "a");
    let b = out_dir(dir.path(), "b");
    let args = ["--seed", "7", "--slots", "200", "--set", "spawn.spawn_period=20", "--set", "spawn.spawn_prob=0.5"];
    let mut first = vec!["train", "--out", &a];
    first.extend_from_slice(&args);
    assert_eq!(cradar(&first), 0);
    let resolved = Path::new(&a).join("config.resolved");
    assert_eq!(cradar(&["train", "--config", resolved.to_str().unwrap(), "--out", &b]), 0);
    let ta = std::fs::read(Path::new(&a).join("trace.csv")).unwrap();
    let tb = std::fs::read(Path::new(&b).join("trace.csv")).unwrap();
    assert_eq!(ta, tb);
}

#[test]
fn eval_is_deterministic_and_paired_with_baseline() {
    let dir = tempfile::tempdir().unwrap();
    let train = out_dir(dir.path(), "train");
    let busy = ["--set", "spawn.spawn_period=10", "--set", "spawn.spawn_prob=0.5"];
    let mut args = vec!["train", "--seed", "2", "--slots", "200", "--out", &train];
    args.extend_from_slice(&busy);
    assert_eq!(cradar(&args), 0);
    let ck = Path::new(&train).join("checkpoint.json");
    let ck = ck.to_str().unwrap();

    let e1 = out_dir(dir.path(), "e1");
    let e2 = out_dir(dir.path(), "e2");
    let base = out_dir(dir.path(), "base");
    for out in [&e1, &e2] {
        let mut args = vec!["eval", "--checkpoint", ck, "--seed", "11", "--slots", "300", "--episodes", "2", "--out", out];
        args.extend_from_slice(&busy);
        assert_eq!(cradar(&args), 0);
    }
    let mut args = vec!["baseline", "--fraction", "0.9", "--seed", "11", "--slots", "300", "--episodes", "2", "--out", &base];
    args.extend_from_slice(&busy);
    assert_eq!(cradar(&args), 0);

    let t1 = std::fs::read(Path::new(&e1).join("trace.csv")).unwrap();
    let t2 = std::fs::read(Path::new(&e2).join("trace.csv")).unwrap();
    assert_eq!(t1, t2);

    let summary = read_csv(&Path::new(&e1).join("summary.csv"));
    assert_eq!(summary.len(), 3);
    for row in &summary {
        let v = num(row, "violation_fraction");
        assert!((0.0..=1.0).contains(&v));
    }

    // same seeds, same ground truth: the spawn schedule agrees slot by slot
    let ev = read_csv(&Path::new(&e1).join("trace.csv"));
    let bl = read_csv(&Path::new(&base).join("trace.csv"));
    assert_eq!(ev.len(), bl.len());
    assert!(ev.iter().any(|r| r["n_targets"] != "0"));
    for (a, b) in ev.iter().zip(&bl) {
        assert_eq!(a["episode"], b["episode"]);
        assert_eq!(a["slot"], b["slot"]);
        assert_eq!(a["n_targets"], b["n_targets"]);
    }
    // eval keeps λ at its trained value
    let lambdas: Vec<&String> = ev.iter().map(|r| &r["lambda"]).collect();
    assert!(lambdas.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn eval_rejects_a_checkpoint_of_another_shape() {
    let dir = tempfile::tempdir().unwrap();
    let train = out_dir(dir.path(), "train");
    assert_eq!(cradar(&["train", "--slots", "3", "--out", &train]), 0);
    let ck = Path::new(&train).join("checkpoint.json");
    let out = out_dir(dir.path(), "eval");
    let code = cradar(&[
        "eval",
        "--checkpoint",
        ck.to_str().unwrap(),
        "--set",
        "spawn.max_targets=3",
        "--slots",
        "5",
        "--out",
        &out,
    ]);
    assert_ne!(code, 0);
}

#[test]
fn baseline_usage_never_exceeds_the_fraction() {
    let dir = tempfile::tempdir().unwrap();
    let out = out_dir(dir.path(), "b");
    let args = [
        "baseline", "--fraction", "0.9", "--seed", "4", "--slots", "600", "--set", "spawn.spawn_period=10",
        "--set", "spawn.spawn_prob=0.5", "--out", &out,
    ];
    assert_eq!(cradar(&args), 0);
    let trace = read_csv(&Path::new(&out).join("trace.csv"));
    assert!(trace.iter().any(|r| num(r, "usage") > 0.0));
    for r in &trace {
        assert!(num(r, "usage") <= 0.9 + 1e-12);
        assert_eq!(num(r, "lambda"), 5000.0);
    }
}

#[test]
fn zero_fraction_scans_only_and_tracks_worse() {
    let dir = tempfile::tempdir().unwrap();
    let mut mean_cost = Vec::new();
    for f in ["0", "0.9"] {
        let out = out_dir(dir.path(), f);
        let args = [
            "baseline", "--fraction", f, "--seed", "4", "--slots", "400", "--set", "spawn.spawn_period=10",
            "--set", "spawn.spawn_prob=0.5", "--out", &out,
        ];
        assert_eq!(cradar(&args), 0);
        if f == "0" {
            let trace = read_csv(&Path::new(&out).join("trace.csv"));
            assert!(trace.iter().all(|r| num(r, "usage") == 0.0));
            assert!(trace.iter().any(|r| r["n_tracked"] != "0"), "scanning alone should still confirm tracks");
        }
        let summary = read_csv(&Path::new(&out).join("summary.csv"));
        mean_cost.push(num(&summary[0], "mean_tracking_cost"));
    }
    assert!(mean_cost[0] > 10.0 * mean_cost[1], "{mean_cost:?}");
}
