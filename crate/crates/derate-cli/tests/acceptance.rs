//! Release gate for the command-line pipeline: criteria 8 (whole-flow
//! determinism) and 9 (report and learning-curve shape). The library-level
//! criteria live in the core crate's acceptance suite.

use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use tempfile::TempDir;

fn derate() -> Command {
    Command::new(env!("CARGO_BIN_EXE_derate"))
}

fn run_ok(dir: &Path, args: &[&str]) {
    let out = derate()
        .current_dir(dir)
        .args(args)
        .output()
        .expect("failed to spawn derate");
    assert!(
        out.status.success(),
        "derate {args:?} failed:\n{}{}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

/// gen-demo then the full measurement-to-prediction flow, all inside `dir`.
fn run_pipeline(dir: &Path, seed: &str) {
    run_ok(dir, &["gen-demo", "--out", ".", "--seed", seed]);
    run_ok(dir, &["--config", "run.toml", "golden"]);
    run_ok(dir, &["--config", "run.toml", "campaign"]);
    run_ok(dir, &["--config", "run.toml", "train-predict"]);
}

fn listed(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    names
}

/// Report rows minus the three wall-clock columns.
fn strip_report_timings(text: &str) -> Vec<String> {
    text.lines()
        .map(|line| {
            let fields: Vec<&str> = line.split(',').collect();
            assert_eq!(fields.len(), 10, "unexpected report row: {line}");
            fields[..7].join(",")
        })
        .collect()
}

/// Tuning-log lines as JSON with the timing fields removed.
fn strip_trial_timings(text: &str) -> Vec<serde_json::Value> {
    text.lines()
        .map(|line| {
            let mut v: serde_json::Value = serde_json::from_str(line).unwrap();
            let obj = v.as_object_mut().unwrap();
            assert!(obj.remove("mean_fit_time_s").is_some());
            assert!(obj.remove("mean_predict_time_s").is_some());
            v
        })
        .collect()
}

#[test]
fn acceptance_08_pipeline_is_deterministic_across_directories() {
    let started = Instant::now();
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    run_pipeline(a.path(), "3");
    run_pipeline(b.path(), "3");

    assert_eq!(listed(a.path()), listed(b.path()));
    for name in ["design.nl", "stimulus.txt", "run.toml"] {
        let left = fs::read_to_string(a.path().join(name)).unwrap();
        let right = fs::read_to_string(b.path().join(name)).unwrap();
        assert_eq!(left, right, "{name} differs between runs");
    }

    let out_a = a.path().join("out");
    let out_b = b.path().join("out");
    let names = listed(&out_a);
    assert_eq!(names, listed(&out_b));
    assert!(names.iter().any(|n| n == "golden.csv"));
    assert!(names.iter().any(|n| n == "fdr.csv"));
    assert!(names.iter().any(|n| n == "report_output.csv"));
    assert!(names.iter().any(|n| n.starts_with("model_")));

    for name in &names {
        let left = fs::read_to_string(out_a.join(name)).unwrap();
        let right = fs::read_to_string(out_b.join(name)).unwrap();
        if name.starts_with("report_") {
            assert_eq!(
                strip_report_timings(&left),
                strip_report_timings(&right),
                "{name} differs beyond its timing columns"
            );
        } else if name.starts_with("tune_") {
            assert_eq!(
                strip_trial_timings(&left),
                strip_trial_timings(&right),
                "{name} differs beyond its timing fields"
            );
        } else {
            assert_eq!(left, right, "{name} differs between runs");
        }
    }
    assert!(started.elapsed().as_secs() < 600);
}

const MODEL_NAMES: [&str; 11] = [
    "Linear Least Squares",
    "k-Nearest Neighbors",
    "Decision Tree",
    "Ridge w/ Linear Kernel",
    "Ridge w/ Polynomial Kernel",
    "Ridge w/ RBF Kernel",
    "Ridge w/ Sigmoid Kernel",
    "SVR w/ Linear Kernel",
    "SVR w/ Polynomial Kernel",
    "SVR w/ RBF Kernel",
    "SVR w/ Sigmoid Kernel",
];

const MODEL_SLUGS: [&str; 11] = [
    "ols",
    "knn",
    "tree",
    "ridge-linear",
    "ridge-poly",
    "ridge-rbf",
    "ridge-sigmoid",
    "svr-linear",
    "svr-poly",
    "svr-rbf",
    "svr-sigmoid",
];

#[test]
fn acceptance_09_report_and_learning_curve_cover_every_model() {
    let dir = TempDir::new().unwrap();
    run_pipeline(dir.path(), "0");
    run_ok(dir.path(), &["--config", "run.toml", "learning-curve"]);
    let out = dir.path().join("out");

    for target in ["output", "application"] {
        let report =
            fs::read_to_string(out.join(format!("report_{target}.csv"))).unwrap();
        let mut lines = report.lines();
        assert_eq!(
            lines.next().unwrap(),
            "model,mae,max,rmse,ev,r2,trials,training_time_s,fit_time_s,prediction_time_s"
        );
        let rows: Vec<&str> = lines.collect();
        assert_eq!(rows.len(), 11, "expected one report row per model");
        for (row, name) in rows.iter().zip(MODEL_NAMES) {
            let fields: Vec<&str> = row.split(',').collect();
            assert_eq!(fields.len(), 10);
            assert_eq!(fields[0], name);
            for metric in &fields[1..6] {
                assert!(
                    metric.parse::<f64>().unwrap().is_finite(),
                    "bad metric in {row}"
                );
            }
            assert!(fields[6].parse::<u32>().unwrap() >= 1, "no trials in {row}");
            for time in &fields[7..] {
                assert!(time.parse::<f64>().unwrap() >= 0.0);
            }
        }

        for slug in MODEL_SLUGS {
            let path = out.join(format!("learning_curve_{slug}_{target}.csv"));
            let text = fs::read_to_string(&path).unwrap();
            let mut lines = text.lines();
            assert_eq!(
                lines.next().unwrap(),
                "train size,train mean,train std,test mean,test std,fit time mean,fit time std",
                "{} header",
                path.display()
            );
            let rows: Vec<&str> = lines.collect();
            assert_eq!(rows.len(), 9, "{} should sweep 10%..90%", path.display());
            for (row, expect_size) in rows.iter().zip(1..=9) {
                let fields: Vec<f64> =
                    row.split(',').map(|f| f.parse().unwrap()).collect();
                assert_eq!(fields.len(), 7);
                assert_eq!(fields[0], expect_size as f64 / 10.0);
                for &std in &[fields[2], fields[4], fields[6]] {
                    assert!(std >= 0.0);
                }
            }
        }
    }
}

#[test]
fn gen_demo_is_seed_stable() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    run_ok(a.path(), &["gen-demo", "--out", ".", "--seed", "9"]);
    run_ok(b.path(), &["gen-demo", "--out", ".", "--seed", "9"]);
    for name in ["design.nl", "stimulus.txt", "run.toml"] {
        assert_eq!(
            fs::read_to_string(a.path().join(name)).unwrap(),
            fs::read_to_string(b.path().join(name)).unwrap()
        );
    }

    let c = TempDir::new().unwrap();
    run_ok(c.path(), &["gen-demo", "--out", ".", "--seed", "10"]);
    assert_eq!(
        fs::read_to_string(a.path().join("design.nl")).unwrap(),
        fs::read_to_string(c.path().join("design.nl")).unwrap(),
        "the design itself is fixed; only the stimulus varies with the seed"
    );
    assert_ne!(
        fs::read_to_string(a.path().join("stimulus.txt")).unwrap(),
        fs::read_to_string(c.path().join("stimulus.txt")).unwrap()
    );
}

fn exit_code(dir: &Path, args: &[&str]) -> i32 {
    derate()
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap()
        .status
        .code()
        .unwrap()
}

#[test]
fn exit_codes_separate_config_and_domain_errors() {
    let dir = TempDir::new().unwrap();
    run_ok(dir.path(), &["gen-demo", "--out", ".", "--seed", "0"]);

    assert_eq!(exit_code(dir.path(), &["--config", "nope.toml", "golden"]), 2);

    let run = fs::read_to_string(dir.path().join("run.toml")).unwrap();
    fs::write(
        dir.path().join("bad-frac.toml"),
        run.replace("train_fraction = 0.5", "train_fraction = 1.5"),
    )
    .unwrap();
    assert_eq!(
        exit_code(dir.path(), &["--config", "bad-frac.toml", "golden"]),
        2
    );

    fs::write(
        dir.path().join("bad-model.toml"),
        run.replace("\"ols\"", "\"perceptron\""),
    )
    .unwrap();
    assert_eq!(
        exit_code(dir.path(), &["--config", "bad-model.toml", "golden"]),
        2
    );

    // domain error: predicting before any campaign measured the targets
    assert_eq!(
        exit_code(dir.path(), &["--config", "run.toml", "train-predict"]),
        1
    );
    assert_eq!(exit_code(dir.path(), &["--config", "run.toml", "golden"]), 0);
}

#[test]
fn campaign_honors_a_target_subset() {
    let dir = TempDir::new().unwrap();
    run_ok(dir.path(), &["gen-demo", "--out", ".", "--seed", "4"]);
    let run = fs::read_to_string(dir.path().join("run.toml")).unwrap();
    let patched = run.replace(
        "[campaign]\ninjections_per_ff = 20",
        "[campaign]\ninjections_per_ff = 5\ntargets = [\"v_out\", \"pbit\"]",
    );
    assert_ne!(run, patched);
    fs::write(dir.path().join("subset.toml"), patched).unwrap();
    run_ok(dir.path(), &["--config", "subset.toml", "campaign"]);

    let fdr = fs::read_to_string(dir.path().join("out/fdr.csv")).unwrap();
    let rows: Vec<&str> = fdr.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    // records always come back in netlist declaration order
    assert!(rows[0].starts_with("pbit,5,"), "got {}", rows[0]);
    assert!(rows[1].starts_with("v_out,5,"), "got {}", rows[1]);
}

#[test]
fn effective_config_echoes_defaults_and_verbatim_paths() {
    let dir = TempDir::new().unwrap();
    run_ok(dir.path(), &["gen-demo", "--out", ".", "--seed", "0"]);

    // a minimal config: everything except the required keys is defaulted
    let minimal = "\
netlist = \"design.nl\"
stimulus = \"stimulus.txt\"

[checker]
payload = [\"pkt_out[0]\"]
valid = \"pkt_valid\"
";
    fs::write(dir.path().join("min.toml"), minimal).unwrap();
    run_ok(dir.path(), &["--config", "min.toml", "golden"]);

    let echoed =
        fs::read_to_string(dir.path().join("out/effective-config.toml")).unwrap();
    assert!(echoed.contains("netlist = \"design.nl\""));
    assert!(echoed.contains("out_dir = \"out\""));
    assert!(echoed.contains("seed = 0"));
    assert!(echoed.contains("injections_per_ff = 20"));
    assert!(echoed.contains("folds = 10"));
    assert!(echoed.contains("train_fraction = 0.5"));
    assert!(echoed.contains("random_budget = 40"));
    assert!(echoed.contains("\"svr-sigmoid\""));
    assert!(echoed.contains("sizes = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]"));
}

#[test]
fn out_dir_override_redirects_everything() {
    let dir = TempDir::new().unwrap();
    run_ok(dir.path(), &["gen-demo", "--out", ".", "--seed", "0"]);
    let elsewhere = dir.path().join("elsewhere");
    run_ok(
        dir.path(),
        &[
            "--config",
            "run.toml",
            "--out",
            elsewhere.to_str().unwrap(),
            "golden",
        ],
    );
    assert!(elsewhere.join("golden.csv").is_file());
    assert!(elsewhere.join("activity.csv").is_file());
    assert!(!dir.path().join("out").exists());
}

#[test]
fn search_space_overrides_are_applied_and_validated() {
    let dir = TempDir::new().unwrap();
    run_ok(dir.path(), &["gen-demo", "--out", ".", "--seed", "5"]);
    let run = fs::read_to_string(dir.path().join("run.toml")).unwrap();

    // pin k-NN to a single point: the tuner then has nothing to explore
    let pinned = run.replace(
        "models = [\"ols\", \"knn\",",
        "models = [\"knn\",",
    );
    let pinned = pinned.replace("\"tree\", \"ridge-linear\", \"ridge-poly\", \"ridge-rbf\", \"ridge-sigmoid\", \"svr-linear\", \"svr-poly\", \"svr-rbf\", \"svr-sigmoid\"]", "]");
    let pinned = format!(
        "{pinned}\n[tune.spaces.knn]\nk = {{ choice = {{ options = [4] }} }}\nmetric = {{ choice = {{ options = [\"euclidean\"] }} }}\n"
    );
    fs::write(dir.path().join("pinned.toml"), pinned).unwrap();
    run_ok(dir.path(), &["--config", "pinned.toml", "campaign"]);
    run_ok(dir.path(), &["--config", "pinned.toml", "train-predict"]);

    let log = fs::read_to_string(dir.path().join("out/tune_knn_output.jsonl")).unwrap();
    for line in log.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["params"]["k"], 4);
        assert_eq!(v["params"]["metric"], "euclidean");
    }

    let bad = fs::read_to_string(dir.path().join("pinned.toml"))
        .unwrap()
        .replace("[tune.spaces.knn]\nk", "[tune.spaces.knn]\nneighbours");
    fs::write(dir.path().join("bad-space.toml"), bad).unwrap();
    assert_eq!(
        exit_code(dir.path(), &["--config", "bad-space.toml", "train-predict"]),
        2
    );
}
