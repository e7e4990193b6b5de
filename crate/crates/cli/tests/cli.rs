use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use margin_cli::{formats, ingest, report};
use margin_core::classify::{self, TrainConfig};
use margin_core::kernels::Kernel;
use margin_core::losses::Loss;
use tempfile::TempDir;

fn margin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_margin"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn mixture_csv(n: usize) -> String {
    let mut out = String::from("x1,x2,label\n");
    for i in 0..n {
        let t = i as f64 * 0.37;
        let y = if i % 2 == 0 { 1 } else { -1 };
        let shift = y as f64 * 0.8;
        out.push_str(&format!("{},{},{}\n", t.sin() + shift, (1.3 * t).cos() - shift, y));
    }
    out
}

fn decisions(csv: &str) -> Vec<(f64, i32)> {
    csv.lines()
        .skip(1)
        .map(|l| {
            let (f, y) = l.split_once(',').unwrap();
            (f.parse().unwrap(), y.parse().unwrap())
        })
        .collect()
}

#[test]
fn train_predict_matches_in_process_model() {
    let dir = TempDir::new().unwrap();
    let data = write(&dir, "train.csv", &mixture_csv(40));
    let model = dir.path().join("model.txt");
    let preds = dir.path().join("preds.csv");
    let out = margin(&[
        "train",
        "--data",
        s(&data),
        "--kernel",
        "gauss:0.7",
        "--loss",
        "logistic",
        "--lambda",
        "0.05",
        "--iterations",
        "300",
        "--out",
        s(&model),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let out = margin(&["predict", "--model", s(&model), "--data", s(&data), "--out", s(&preds)]);
    assert!(out.status.success());

    let dataset = ingest::ingest(&data, None).unwrap();
    let mut config = TrainConfig::new(Kernel::gaussian(0.7).unwrap(), Loss::Logistic, 0.05);
    config.max_iter = 300;
    let fit = classify::fit(&dataset, &config).unwrap();
    let saved = formats::read_model(&fs::read_to_string(&model).unwrap()).unwrap();
    assert_eq!(saved, fit.model);

    let got = decisions(&fs::read_to_string(&preds).unwrap());
    assert_eq!(got.len(), dataset.len());
    for ((f, y), x) in got.iter().zip(dataset.points()) {
        let expected = fit.model.decision(x).unwrap();
        assert_eq!(*f, expected);
        assert_eq!(*y, classify::sign(expected) as i32);
    }
}

#[test]
fn separable_pair_is_labelled_correctly() {
    let dir = TempDir::new().unwrap();
    let data = write(&dir, "pair.csv", "x,label\n-1,-1\n1,1\n");
    let model = dir.path().join("m.txt");
    let out = margin(&[
        "train",
        "--data",
        s(&data),
        "--kernel",
        "linear",
        "--lambda",
        "0.1",
        "--out",
        s(&model),
    ]);
    assert!(out.status.success());
    let out = margin(&["predict", "--model", s(&model), "--data", s(&data)]);
    assert!(out.status.success());
    let labels: Vec<i32> = decisions(&String::from_utf8(out.stdout).unwrap())
        .iter()
        .map(|d| d.1)
        .collect();
    assert_eq!(labels, vec![-1, 1]);
}

#[test]
fn probe_on_uninformative_joint() {
    let dir = TempDir::new().unwrap();
    let joint = write(&dir, "j.txt", "3\n0 0.2 0.5\n1 0.3 0.5\n2 0.5 0.5\n");
    let out = margin(&["probe", "--joint", s(&joint)]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let risk: f64 = text
        .lines()
        .next()
        .unwrap()
        .strip_prefix("bayes_risk ")
        .unwrap()
        .parse()
        .unwrap();
    assert_eq!(risk, 0.5);
    for line in text.lines().filter(|l| l.starts_with("optimal_phi_risk.")) {
        let v: f64 = line.split_once(' ').unwrap().1.parse().unwrap();
        assert!((v - 1.0).abs() < 1e-9, "{line}");
    }
}

#[test]
fn experiment_reports_are_reproducible() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let out = margin(&[
            "experiment",
            "sieve_bound",
            "--seed",
            "7",
            "--replicates",
            "10",
            "--out",
            s(p),
        ]);
        assert_eq!(out.status.code(), Some(0));
    }
    let a = fs::read_to_string(a).unwrap();
    let b = fs::read_to_string(b).unwrap();
    assert!(a.contains("# generated-at"));
    assert_eq!(report::strip_generated_at(&a), report::strip_generated_at(&b));
    let c = margin(&["experiment", "sieve_bound", "--seed", "8", "--replicates", "10"]);
    assert_eq!(c.status.code(), Some(0));
}

#[test]
fn exit_codes() {
    assert_eq!(margin(&["--help"]).status.code(), Some(0));
    assert_eq!(margin(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(
        margin(&[
            "train",
            "--data",
            "/nonexistent.csv",
            "--lambda",
            "1",
            "--out",
            "/tmp/x"
        ])
        .status
        .code(),
        Some(2)
    );
    assert_eq!(
        margin(&["experiment", "nonsense", "--seed", "1"]).status.code(),
        Some(2)
    );

    let dir = TempDir::new().unwrap();
    let data = write(&dir, "bad.csv", "x,label\n1,2\n");
    let out = margin(&[
        "train",
        "--data",
        s(&data),
        "--lambda",
        "1",
        "--out",
        s(&dir.path().join("m")),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!String::from_utf8_lossy(&out.stderr).is_empty());
    let out = margin(&[
        "train",
        "--data",
        s(&write(&dir, "ok.csv", "x,label\n1,1\n")),
        "--lambda",
        "-1",
        "--out",
        s(&dir.path().join("m")),
    ]);
    assert_eq!(out.status.code(), Some(2));

    // An unattainable target size yields a failing verdict rather than an error.
    let out = margin(&[
        "experiment",
        "sv_fraction",
        "--seed",
        "1",
        "--sizes",
        "20,40",
        "--replicates",
        "2",
    ]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    let code = out.status.code();
    assert!(code == Some(0) || code == Some(1));
    assert_eq!(code == Some(1), stdout.contains("FAIL"), "{stdout}");
}

#[test]
fn svmlight_and_csv_agree() {
    let dir = TempDir::new().unwrap();
    let csv = write(&dir, "d.csv", "a,b,c,label\n1,0,2.5,1\n0,0,0,-1\n0,-3,0,+1\n");
    let svm = write(&dir, "d.svm", "+1 1:1 3:2.5\n-1\n1 2:-3 # comment\n");
    let from_csv = ingest::ingest(&csv, None).unwrap();
    let from_svm = ingest::ingest(&svm, None).unwrap();
    assert_eq!(from_csv, from_svm);

    let model = dir.path().join("m.txt");
    assert!(margin(&[
        "train",
        "--data",
        s(&svm),
        "--kernel",
        "linear",
        "--lambda",
        "1",
        "--out",
        s(&model)
    ])
    .status
    .success());
    let a = margin(&["predict", "--model", s(&model), "--data", s(&csv)]);
    let b = margin(&[
        "predict",
        "--model",
        s(&model),
        "--data",
        s(&svm),
        "--format",
        "svmlight",
    ]);
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
}
