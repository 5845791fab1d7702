use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn o2bench(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_o2bench")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

#[test]
fn bench_writes_csv_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("a");
    let o = o2bench(&[
        "bench",
        "--experiment",
        "model-a",
        "--runs",
        "2",
        "--steps",
        "8",
        "--particles",
        "20",
        "--estimators",
        "ekf,o2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("rmse.csv")).unwrap();
    assert!(csv.starts_with("estimator,step,rmse,rmse_abs\n"));
    assert_eq!(csv.lines().count(), 1 + 2 * 7);
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(json["kind"], "scalar");
    assert_eq!(json["runs"], 2);
    assert_eq!(json["estimators"].as_array().unwrap().len(), 2);
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    fs::write(
        &cfg,
        r#"{"experiment": "ungm", "runs": 9, "steps": 5, "seed": 4, "estimators": ["sir", "o2"], "particles": 10}"#,
    )
    .unwrap();
    let out = dir.path().join("o");
    let o = o2bench(&[
        "--config",
        cfg.to_str().unwrap(),
        "--runs",
        "1",
        "--seed",
        "11",
        "bench",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(json["runs"], 1);
    assert_eq!(json["seed"], 11);
    assert_eq!(json["steps"], 5);
}

#[test]
fn pofb_csv_on_stdout() {
    let o = o2bench(&["pofb", "--target", "y", "--samples", "1000"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("r,p,m,pofb,stderr"));
    assert_eq!(lines.count(), 21 * 9);
}

#[test]
fn mtt_rows_per_tracker() {
    let dir = tempfile::tempdir().unwrap();
    let o = o2bench(&[
        "mtt",
        "--runs",
        "2",
        "--steps",
        "6",
        "--particles",
        "50",
        "--sensors",
        "3",
        "--tracker",
        "t2t,o2-cluster",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for name in ["t2t-meap", "o2-cluster"] {
        let csv = fs::read_to_string(dir.path().join(format!("mtt-{name}.csv"))).unwrap();
        assert!(csv.starts_with("run,step,ospa,card_true,card_est,wall_ms\n"));
        assert_eq!(csv.lines().count(), 1 + 2 * 6);
    }
}

#[test]
fn plotdata_long_format() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fig12.csv");
    let o = o2bench(&[
        "plotdata",
        "--fig",
        "fig12",
        "--runs",
        "2",
        "--steps",
        "20",
        "--grid",
        "0.01,1",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("x,series,value\n"));
    let series: std::collections::BTreeSet<&str> = text.lines().skip(1).map(|l| l.split(',').nth(1).unwrap()).collect();
    assert_eq!(series.into_iter().collect::<Vec<_>>(), ["kf", "o2"]);
    assert_eq!(text.lines().count(), 1 + 2 * 2);
    let list = o2bench(&["plotdata", "--list"]);
    assert_eq!(String::from_utf8(list.stdout).unwrap().lines().count(), 19);
}

#[test]
fn config_errors_exit_2() {
    assert_eq!(code(&o2bench(&["bench", "--experiment", "nope"])), 2);
    assert_eq!(
        code(&o2bench(&[
            "bench",
            "--experiment",
            "model-a",
            "--estimators",
            "nope",
            "--runs",
            "1"
        ])),
        2
    );
    assert_eq!(code(&o2bench(&["bench", "--experiment", "model-a", "--runs", "0"])), 2);
    assert_eq!(code(&o2bench(&["--config", "/nonexistent.json", "bench"])), 2);
    assert_eq!(code(&o2bench(&["pofb", "--target", "q"])), 2);
    assert_eq!(code(&o2bench(&["plotdata", "--fig", "fig99"])), 2);
    assert_eq!(code(&o2bench(&["frobnicate"])), 2);
    assert_eq!(code(&o2bench(&["mtt", "--tracker", "o2-cluster", "--runs", "1"])), 2);
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{\"experiment\": \"ungm\", \"runz\": 3}").unwrap();
    assert_eq!(code(&o2bench(&["--config", bad.to_str().unwrap(), "bench"])), 2);
}

#[test]
fn runtime_failure_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("f");
    fs::write(&file, "").unwrap();
    // output directory below a regular file
    let out = Path::new(&file).join("sub");
    let o = o2bench(&[
        "bench",
        "--experiment",
        "model-a",
        "--runs",
        "1",
        "--steps",
        "3",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 3);
}

#[test]
fn shipped_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    let mut n = 0;
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let cfg = o2bench::bench::ExperimentConfig::load(&path).unwrap();
        cfg.validate().unwrap();
        n += 1;
    }
    assert!(n >= 5);
}
