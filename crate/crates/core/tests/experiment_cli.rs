use std::fs;
use std::path::Path;
use std::process::Command;

use rapid_dim::experiment::{execute, parse_args, run, ExperimentConfig, Mode, OutputFormat, PathFamily, Results};

fn header(path: &Path) -> String {
    fs::read_to_string(path).unwrap().lines().next().unwrap().to_string()
}

fn config(mode: Mode, out: &Path) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(mode, out);
    c.alphas = vec![0.5];
    c.n_min = 4;
    c.n_max = 7;
    c.resolution_exponent = 13;
    c.trials = 3;
    c.base_seed = 11;
    c
}

#[test]
fn every_mode_writes_its_fixed_header() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        (Mode::Simulate, "trial,seed,family,resolution,x1,max,min,compressed_bits,status"),
        (Mode::Count, "trial,seed,family,alpha,n,j,cells,count,threshold,status"),
        (Mode::Dimension, "trial,seed,family,alpha,n,j,count,threshold,slope,intercept,residual_rms,status"),
        (Mode::Bounds, "suite,point,lhs,rhs,holds"),
        (
            Mode::Compare,
            "record,alpha,family,trial,seed,slope,residual_rms,mean_gaussian,mean_oscillation,difference,pooled_sd,consistent,status",
        ),
    ];
    for (mode, expected) in cases {
        let out = dir.path().join(format!("{mode}.csv"));
        let report = run(&config(mode, &out), None).unwrap();
        assert_eq!(header(&out), expected, "{mode}");
        assert!(report.manifest_path.exists());
        assert_eq!(report.manifest.rows, fs::read_to_string(&out).unwrap().lines().count() - 1);
    }
}

#[test]
fn bounds_report_has_no_violations() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("b.csv");
    let report = run(&config(Mode::Bounds, &out), None).unwrap();
    assert_eq!(report.manifest.failures, 0);
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.lines().skip(1).all(|l| l.ends_with(",true")));
    assert!(text.contains("feller,m=1024;p=0.95;r=1024,"));
    assert!(text.contains("mills_lower,y=8,"));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = config(Mode::Dimension, &dir.path().join("a.csv"));
    c.trials = 1;
    run(&c, None).unwrap();
    let first = fs::read(&c.output_path).unwrap();
    run(&c, None).unwrap();
    assert_eq!(first, fs::read(&c.output_path).unwrap());

    c.workers = Some(1);
    let one = execute(&c).unwrap();
    c.workers = Some(4);
    assert_eq!(one, execute(&c).unwrap());
}

#[test]
fn trial_order_does_not_matter() {
    // each trial depends only on its own seed: trial t of a run equals trial 0 of a run
    // whose base seed is shifted by t
    let dir = tempfile::tempdir().unwrap();
    let mut c = config(Mode::Count, &dir.path().join("c.csv"));
    c.trials = 4;
    let Results::Count(all) = execute(&c).unwrap() else { panic!() };
    for t in 0..4u64 {
        let mut single = c.clone();
        single.trials = 1;
        single.base_seed = c.base_seed + t;
        let Results::Count(rows) = execute(&single).unwrap() else { panic!() };
        let from_all: Vec<_> = all.iter().filter(|r| r.trial == t).collect();
        assert_eq!(from_all.len(), rows.len());
        for (a, b) in from_all.iter().zip(&rows) {
            assert_eq!((a.seed, a.n, a.count), (b.seed, b.n, b.count));
        }
    }
}

#[test]
fn json_mirrors_csv_rows() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = config(Mode::Count, &dir.path().join("r.json"));
    c.output_format = OutputFormat::Json;
    c.path_family = PathFamily::Oscillation;
    let report = run(&c, None).unwrap();
    let rows: Vec<serde_json::Value> = serde_json::from_str(&fs::read_to_string(&c.output_path).unwrap()).unwrap();
    assert_eq!(rows.len(), report.results.len());
    assert_eq!(rows[0]["family"], "oscillation");
    assert_eq!(rows[0]["status"], "ok");
}

#[test]
fn failed_trials_are_recorded_not_fatal() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = config(Mode::Dimension, &dir.path().join("f.csv"));
    c.alphas = vec![0.99];
    c.n_min = 4;
    c.n_max = 6;
    c.resolution_exponent = 12;
    c.trials = 20;
    let report = run(&c, None).unwrap();
    assert!(report.manifest.failures > 0);
    let Results::Dimension(rows) = &report.results else { panic!() };
    assert!(rows.iter().any(|r| r.status.starts_with("error: insufficient data")));
    assert!(rows.iter().all(|r| r.count.is_some()));
}

#[test]
fn manifest_echoes_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("m.csv");
    let text = format!(
        "mode = count\nalpha = 0.4\nn-min = 4\nn-max = 5\nresolution = 11\ntrials = 2\nseed = 5\nout = {}\n",
        out.display()
    );
    let file = dir.path().join("exp.conf");
    fs::write(&file, &text).unwrap();
    let parsed = parse_args(["rapid-dim".as_ref(), "--config".as_ref(), file.as_os_str()]).unwrap();
    let report = run(&parsed.config, parsed.source).unwrap();
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&report.manifest_path).unwrap()).unwrap();
    assert_eq!(manifest["config_source"], text);
    assert_eq!(manifest["config"]["base_seed"], 5);
    assert_eq!(manifest["trial_seeds"], serde_json::json!([5, 6]));
    assert!(manifest["rng"].as_str().unwrap().contains("ChaCha8"));
    assert!(manifest["compressor"].as_str().unwrap().contains("deflate"));
    assert!(manifest["wall_clock_seconds"].as_f64().unwrap() >= 0.0);
}

#[test]
fn binary_end_to_end() {
    let exe = env!("CARGO_BIN_EXE_rapid-dim");
    let dir = tempfile::tempdir().unwrap();
    let out = |name: &str| dir.path().join(name).display().to_string();
    let args = |o: &str| {
        vec![
            "dimension".to_string(),
            "--alpha=0.4,0.6".into(),
            "--n-min=4".into(),
            "--n-max=7".into(),
            "--resolution=13".into(),
            "--trials=3".into(),
            "--seed=9".into(),
            format!("--out={o}"),
        ]
    };

    let st = Command::new(exe).args(args(&out("w1.csv"))).env("RAPID_DIM_WORKERS", "1").status().unwrap();
    assert!(st.success());
    let st = Command::new(exe).args(args(&out("w4.csv"))).env("RAPID_DIM_WORKERS", "4").status().unwrap();
    assert!(st.success());
    assert_eq!(fs::read(out("w1.csv")).unwrap(), fs::read(out("w4.csv")).unwrap());
    let manifest = fs::read_to_string(format!("{}.manifest.json", out("w4.csv"))).unwrap();
    assert!(manifest.contains("\"workers\": 4"));

    let bad = Command::new(exe).args(["dimension", "--alpha=0.5", "--n-max=18", "--out=x.csv"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("resolution"));

    let empty = Command::new(exe).output().unwrap();
    assert_eq!(empty.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&empty.stderr).contains("mode, out"));

    let bad_env = Command::new(exe).args(["bounds", &format!("--out={}", out("b.csv"))]).env("RAPID_DIM_WORKERS", "zero").output().unwrap();
    assert!(!bad_env.status.success());

    let help = Command::new(exe).arg("--help").output().unwrap();
    assert!(help.status.success());
    assert!(String::from_utf8_lossy(&help.stdout).contains("--resolution"));
}
