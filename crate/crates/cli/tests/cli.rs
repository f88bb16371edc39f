use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn ssmguard(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ssmguard")).args(args).output().expect("binary runs")
}

fn scenario(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .join(format!("{name}.json"))
        .display()
        .to_string()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Width and height from a PNG header.
fn png_size(path: &Path) -> (u32, u32) {
    let bytes = std::fs::read(path).unwrap();
    let be = |i: usize| u32::from_be_bytes(bytes[i..i + 4].try_into().unwrap());
    (be(16), be(20))
}

#[test]
fn simulate_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = ssmguard(&["simulate", "--scenario", &scenario("static"), "--out", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    for f in ["ticks.csv", "truth.csv", "summary.json", "plot.svg"] {
        assert!(out.join(f).exists(), "{f} missing");
    }
    let ticks = std::fs::read_to_string(out.join("ticks.csv")).unwrap();
    assert_eq!(ticks.lines().count(), 5 * 125 + 1);

    let rmse = ssmguard(&[
        "metrics",
        "rmse",
        "--measured",
        s(&out.join("ticks.csv")),
        "--truth",
        s(&out.join("truth.csv")),
    ]);
    assert!(rmse.status.success(), "{}", stderr(&rmse));
    let text = String::from_utf8(rmse.stdout).unwrap();
    let value: f64 = text.trim().strip_prefix("rmse_m=").unwrap().split_whitespace().next().unwrap().parse().unwrap();
    assert!(value < 1e-6, "{text}");
}

#[test]
fn missing_scenario_is_a_domain_error() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.json");
    let o = ssmguard(&["simulate", "--scenario", s(&missing), "--out", s(&dir.path().join("out"))]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("error[io]") && err.contains("nope.json"), "{err}");
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(ssmguard(&["simulate"]).status.code(), Some(2));
    assert_eq!(ssmguard(&["bogus"]).status.code(), Some(2));
    let o = ssmguard(&["simulate", "--scenario", &scenario("static"), "--out", "x", "--set", "novalue"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("error[usage]"));
}

#[test]
fn invalid_override_is_a_scenario_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = ssmguard(&[
        "simulate",
        "--scenario",
        &scenario("static"),
        "--out",
        s(&dir.path().join("out")),
        "--set",
        "W_max=-1",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("error[scenario]"), "{}", stderr(&o));
}

#[test]
fn seeded_runs_are_identical() {
    let dir = tempfile::tempdir().unwrap();
    let mut summaries = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        let o = ssmguard(&[
            "simulate",
            "--scenario",
            &scenario("approach_retreat"),
            "--out",
            s(&out),
            "--seed",
            "7",
            "--set",
            "duration_s=5",
            "--set",
            "human_waypoints=[[0,0.5,1.5,0]]",
            "--set",
            "robot_waypoints=[[0,-1,-1.2,1.8,-0.6,1.57,0],[5,1,-1.2,1.8,-0.6,1.57,0]]",
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        summaries.push(std::fs::read(out.join("summary.json")).unwrap());
        summaries.push(std::fs::read(out.join("ticks.csv")).unwrap());
    }
    assert_eq!(summaries[0], summaries[2]);
    assert_eq!(summaries[1], summaries[3]);
}

#[test]
fn overrides_change_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let scenario_path = scenario("static");
    let run = |name: &str, extra: &[&str]| {
        let out = dir.path().join(name);
        let mut args = vec!["simulate", "--scenario", &scenario_path, "--out", s(&out)];
        args.extend_from_slice(extra);
        let o = ssmguard(&args);
        assert!(o.status.success(), "{}", stderr(&o));
        std::fs::read_to_string(out.join("summary.json")).unwrap()
    };
    let base = run("base", &[]);
    let wide = run("wide", &["--set", "ssm.W_max=6"]);
    assert_ne!(base, wide);
}

#[test]
fn frames_pipeline_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let rec = dir.path().join("rec");
    let o = ssmguard(&["frames", "synth", "--out", s(&rec), "--frames", "4", "--background-frames", "10"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(rec.join("meta.json").exists());
    assert!(rec.join("annotations.json").exists());

    let pre = dir.path().join("pre");
    let o = ssmguard(&["frames", "preprocess", "--input", s(&rec), "--output", s(&pre)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(png_size(&pre.join("12_reflectivity.png")), (1024, 256));
    assert_eq!(png_size(&pre.join("12_stacked.png")), (1024, 256));

    let small = dir.path().join("small");
    let o = ssmguard(&[
        "frames",
        "preprocess",
        "--input",
        s(&rec),
        "--output",
        s(&small),
        "--resize-height",
        "64",
        "--no-equalize",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(png_size(&small.join("0_range.png")), (1024, 64));

    let humans = dir.path().join("humans");
    let o = ssmguard(&[
        "perceive",
        "extract",
        "--frames",
        s(&rec),
        "--annotations",
        s(&rec.join("annotations.json")),
        "--out",
        s(&humans),
        "--set",
        "background_frames=10",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    for i in 10..14 {
        let text = std::fs::read_to_string(humans.join(format!("{i}.csv"))).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("x,y,z,row,col"));
        let rows: Vec<Vec<f64>> =
            lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
        assert!(rows.len() > 100, "frame {i}: {} points", rows.len());
        // The synthetic person stands 1.6 m in front of the sensor.
        assert!(rows.iter().all(|r| (r[0] - 1.6).abs() < 0.4 && r[2] > 0.0 && r[2] < 1.8));
    }
}

#[test]
fn perceive_rejects_unknown_setting() {
    let dir = tempfile::tempdir().unwrap();
    let o = ssmguard(&[
        "perceive",
        "extract",
        "--frames",
        s(dir.path()),
        "--annotations",
        s(&dir.path().join("a.json")),
        "--out",
        s(&dir.path().join("o")),
        "--set",
        "bogus=1",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn metrics_on_missing_file() {
    let o = ssmguard(&["metrics", "rmse", "--measured", "/nonexistent/a.csv", "--truth", "/nonexistent/b.csv"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("/nonexistent/a.csv"));
}
