use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn gradecast(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gradecast"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Noiseless cohort whose total depends only on the D1 features.
const D1_ONLY: &[&str] = &[
    "--noise-sd",
    "0",
    "--set",
    "synth.corr.t1=none",
    "--set",
    "synth.corr.t2=none",
    "--set",
    "synth.corr.mte=none",
    "--set",
    "synth.corr.ete=none",
    "--set",
    "weights.t1=0.3",
    "--set",
    "weights.t2=0.3",
    "--set",
    "weights.cw=0.4",
    "--set",
    "weights.mte=0",
    "--set",
    "weights.ete=0",
];

/// Small training budgets for quick end-to-end runs.
const QUICK: &[&str] = &[
    "--set",
    "train.epochs=5",
    "--set",
    "forest.n_trees=5",
    "--set",
    "gbt.stages=5",
];

#[test]
fn synth_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let a = gradecast(dir.path(), &["synth", "--out", "a.csv", "--seed", "7"]);
    let b = gradecast(dir.path(), &["synth", "--out", "b.csv", "--seed", "7"]);
    assert_eq!(code(&a), 0, "{}", stderr(&a));
    assert_eq!(code(&b), 0);
    let a = fs::read(dir.path().join("a.csv")).unwrap();
    assert_eq!(a, fs::read(dir.path().join("b.csv")).unwrap());
    assert_eq!(String::from_utf8(a).unwrap().lines().count(), 1001);
}

#[test]
fn synth_rejects_bad_correlation() {
    let dir = TempDir::new().unwrap();
    let o = gradecast(
        dir.path(),
        &["synth", "--out", "a.csv", "--corr", "ete=1.5"],
    );
    assert_eq!(code(&o), 2, "{}", stderr(&o));
    assert!(!dir.path().join("a.csv").exists());
}

#[test]
fn eda_on_tiny_and_empty_cohorts() {
    let dir = TempDir::new().unwrap();
    fs::write(
        dir.path().join("tiny.csv"),
        "student_id,t1,t2,cw,mte,ete,total\na,10,20,30,40,50,35\nb,20,10,40,50,60,40\nc,30,40,20,60,40,45\n",
    )
    .unwrap();
    let o = gradecast(dir.path(), &["eda", "--input", "tiny.csv", "--out", "out"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    for ext in ["hist", "corr", "gmap"] {
        let text = fs::read_to_string(dir.path().join(format!("out/tiny.{ext}.csv"))).unwrap();
        let mut rdr = csv::Reader::from_reader(text.as_bytes());
        assert!(rdr.records().all(|r| r.is_ok()));
    }

    fs::write(
        dir.path().join("empty.csv"),
        "student_id,t1,t2,cw,mte,ete,total\n",
    )
    .unwrap();
    let o = gradecast(dir.path(), &["eda", "--input", "empty.csv"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("empty cohort"), "{}", stderr(&o));
}

#[test]
fn train_then_predict_recovers_linear_totals() {
    let dir = TempDir::new().unwrap();
    let mut args = vec!["synth", "--out", "c.csv", "--n", "60"];
    args.extend(D1_ONLY);
    assert_eq!(code(&gradecast(dir.path(), &args)), 0);
    let o = gradecast(
        dir.path(),
        &[
            "train",
            "--input",
            "c.csv",
            "--out",
            "m",
            "--pipeline",
            "lr",
        ],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(dir.path().join("m/manifest.json").exists());
    let o = gradecast(
        dir.path(),
        &[
            "predict",
            "--checkpoint",
            "m/checkpoint.json",
            "--input",
            "c.csv",
            "--out",
            "p.csv",
        ],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));

    let mut cohort = csv::Reader::from_path(dir.path().join("c.csv")).unwrap();
    let mut pred = csv::Reader::from_path(dir.path().join("p.csv")).unwrap();
    let mut n = 0;
    for (c, p) in cohort.records().zip(pred.records()) {
        let (c, p) = (c.unwrap(), p.unwrap());
        assert_eq!(&c[0], &p[0]);
        let total: f64 = c[6].parse().unwrap();
        let predicted: f64 = p[1].parse().unwrap();
        assert!((total - predicted).abs() < 1e-6, "{total} vs {predicted}");
        n += 1;
    }
    assert_eq!(n, 60);

    let o = gradecast(
        dir.path(),
        &[
            "predict",
            "--checkpoint",
            "m/checkpoint.json",
            "--input",
            "c.csv",
            "--out",
            "q.csv",
            "--view",
            "d2-ete",
        ],
    );
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("expected 3, got 2"), "{}", stderr(&o));
}

#[test]
fn evaluate_all_d1_pipelines_is_deterministic() {
    let dir = TempDir::new().unwrap();
    assert_eq!(
        code(&gradecast(
            dir.path(),
            &["synth", "--out", "c.csv", "--n", "80"]
        )),
        0
    );
    let run = |out: &str| {
        let mut args = vec![
            "evaluate",
            "--input",
            "c.csv",
            "--out",
            out,
            "--view",
            "d1",
            "--all-pipelines",
        ];
        args.extend(QUICK);
        let o = gradecast(dir.path(), &args);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        fs::read_to_string(dir.path().join(out)).unwrap()
    };
    let a = run("a.csv");
    assert_eq!(a, run("b.csv"));
    let rows: Vec<&str> = a.lines().skip(1).collect();
    assert_eq!(rows.len(), 8);
    assert!(rows.iter().all(|r| r.split(',').nth(1) == Some("d1")));
    assert!(!a.contains("NA"));
}

#[test]
fn usage_and_numerical_errors_have_distinct_codes() {
    let dir = TempDir::new().unwrap();
    assert_eq!(
        code(&gradecast(
            dir.path(),
            &["synth", "--out", "c.csv", "--n", "40"]
        )),
        0
    );
    let o = gradecast(
        dir.path(),
        &[
            "train",
            "--input",
            "c.csv",
            "--out",
            "m",
            "--pipeline",
            "nope",
        ],
    );
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("nope"));

    let o = gradecast(
        dir.path(),
        &[
            "train",
            "--input",
            "c.csv",
            "--out",
            "m",
            "--pipeline",
            "mlp",
            "--set",
            "mlp.optimizer=sgd",
            "--set",
            "mlp.learning_rate=1e6",
        ],
    );
    assert_eq!(code(&o), 3, "{}", stderr(&o));
    assert!(stderr(&o).contains("diverged"));

    let o = gradecast(
        dir.path(),
        &[
            "train",
            "--input",
            "missing.csv",
            "--out",
            "m",
            "--pipeline",
            "lr",
        ],
    );
    assert_eq!(code(&o), 1);
    assert_eq!(code(&gradecast(dir.path(), &["bogus"])), 2);
}
