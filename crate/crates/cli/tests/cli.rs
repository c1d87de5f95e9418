use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use spherecover::data::{self, CsvSchema};
use spherecover::rng::derive_seed;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_spherecover"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let o = run(args);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/data").join(name)
}

const FOUR_ROWS: &str = "x,y,class\n0,0,a\n0,1,a\n5,5,b\n5,6,b\n";

fn gen(dir: &Path, family: &str, n: usize, seed: u64) -> PathBuf {
    let p = dir.join(format!("{family}_{n}_{seed}.csv"));
    ok(&["--seed", &seed.to_string(), "gen", "--family", family, "-n", &n.to_string(), "--dimensions", "5", "--output", s(&p)]);
    p
}

#[test]
fn train_four_rows() {
    let t = tempfile::tempdir().unwrap();
    let d = t.path().join("four.csv");
    fs::write(&d, FOUR_ROWS).unwrap();
    let out = ok(&["--out", s(t.path()), "train", "--data", s(&d), "--alpha", "1"]);
    assert!(out.contains("train_accuracy=1.000000"), "{out}");
    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(t.path().join("model.json")).unwrap()).unwrap();
    assert!(!doc["spheres"].as_array().unwrap().is_empty());
}

#[test]
fn missing_file_exits_2() {
    let o = run(&["train", "--data", "/no/such/file.csv"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("/no/such/file.csv"));
}

#[test]
fn train_is_byte_identical() {
    let t = tempfile::tempdir().unwrap();
    let d = gen(t.path(), "twonorm", 60, 5);
    let a = t.path().join("a.json");
    let b = t.path().join("b.json");
    for m in [&a, &b] {
        ok(&["--seed", "9", "train", "--data", s(&d), "--scheme", "abrse", "-L", "5", "--alpha-grid", "0,1,2", "--cv-folds", "3", "--model-file", s(m)]);
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert!(t.path().join("a_selection.csv").exists());
}

#[test]
fn predict_training_file() {
    let t = tempfile::tempdir().unwrap();
    let d = gen(t.path(), "ringnorm", 50, 2);
    let m = t.path().join("m.json");
    ok(&["train", "--data", s(&d), "--alpha", "1", "--model-file", s(&m)]);
    let out = ok(&["predict", "--model-file", s(&m), "--data", s(&d)]);
    assert!(out.trim_end().ends_with("# accuracy=1.000000"), "{out}");
}

#[test]
fn predict_unlabeled_has_no_accuracy() {
    let t = tempfile::tempdir().unwrap();
    let d = t.path().join("four.csv");
    fs::write(&d, FOUR_ROWS).unwrap();
    let m = t.path().join("m.json");
    ok(&["train", "--data", s(&d), "--alpha", "0", "--model-file", s(&m)]);
    let q = t.path().join("q.csv");
    fs::write(&q, "x,y\n0,0.5\n5,5.5\n").unwrap();
    let out = ok(&["predict", "--model-file", s(&m), "--data", s(&q)]);
    assert_eq!(out, "index,predicted\n0,a\n1,b\n");
}

#[test]
fn ensemble_tallies_sum_to_members() {
    let t = tempfile::tempdir().unwrap();
    let d = gen(t.path(), "twonorm", 80, 3);
    let m = t.path().join("m.json");
    ok(&["train", "--data", s(&d), "--scheme", "arsse", "--alpha", "0", "--kappa", "2", "-L", "9", "--model-file", s(&m)]);
    let out = ok(&["predict", "--model-file", s(&m), "--data", s(&d)]);
    let mut lines = out.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let votes: Vec<usize> = (0..header.len()).filter(|&i| header[i].starts_with("votes_")).collect();
    assert_eq!(votes.len(), 2);
    for line in lines.filter(|l| !l.starts_with('#')) {
        let f: Vec<&str> = line.split(',').collect();
        let total: usize = votes.iter().map(|&i| f[i].parse::<usize>().unwrap()).sum();
        assert_eq!(total, 9);
    }
}

#[test]
fn predict_schema_mismatch_exits_3() {
    let t = tempfile::tempdir().unwrap();
    let d = t.path().join("four.csv");
    fs::write(&d, FOUR_ROWS).unwrap();
    let m = t.path().join("m.json");
    ok(&["train", "--data", s(&d), "--alpha", "1", "--model-file", s(&m)]);
    let q = t.path().join("q.csv");
    fs::write(&q, "x,z,class\n0,0,a\n").unwrap();
    assert_eq!(run(&["predict", "--model-file", s(&m), "--data", s(&q)]).status.code(), Some(3));
}

#[test]
fn single_run_matches_train_and_predict() {
    let t = tempfile::tempdir().unwrap();
    let d = gen(t.path(), "twonorm", 90, 4);
    let out = t.path().join("exp");
    ok(&["--seed", "11", "--out", s(&out), "experiment", "--data", s(&d), "--runs", "1", "--alpha-grid", "0,2,4", "--cv-folds", "3"]);

    let full = data::load_dataset(&d, &CsvSchema::default()).unwrap();
    let run_seed = derive_seed(11, "run", 0);
    let (train, test) = data::split(&full, 1.0 / 3.0, run_seed).unwrap();
    let (tp, qp) = (t.path().join("train.csv"), t.path().join("test.csv"));
    data::write_csv(&train, fs::File::create(&tp).unwrap()).unwrap();
    data::write_csv(&test, fs::File::create(&qp).unwrap()).unwrap();
    let m = t.path().join("m.json");
    ok(&["--seed", &run_seed.to_string(), "train", "--data", s(&tp), "--alpha-grid", "0,2,4", "--cv-folds", "3", "--model-file", s(&m)]);
    assert_eq!(fs::read(&m).unwrap(), fs::read(out.join("models/rsc_run0.json")).unwrap());

    let pred = ok(&["predict", "--model-file", s(&m), "--data", s(&qp)]);
    let acc: f64 = pred.lines().last().unwrap().trim_start_matches("# accuracy=").parse().unwrap();
    let runs = fs::read_to_string(out.join("runs.csv")).unwrap();
    let logged: f64 = runs.lines().nth(1).unwrap().rsplit(',').next().unwrap().parse().unwrap();
    assert!((acc - logged).abs() < 5e-7);
}

#[test]
fn summary_sd_matches_runs() {
    let t = tempfile::tempdir().unwrap();
    let out = t.path().join("exp");
    ok(&["--out", s(&out), "experiment", "--synthetic", "ringnorm", "--dimensions", "4", "--train-size", "40", "--test-size", "60", "--runs", "5", "--alpha", "1"]);
    let runs = fs::read_to_string(out.join("runs.csv")).unwrap();
    let acc: Vec<f64> = runs.lines().skip(1).map(|l| l.rsplit(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(acc.len(), 5);
    let mean = acc.iter().sum::<f64>() / 5.0;
    let sd = (acc.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / 4.0).sqrt();
    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    let f: Vec<f64> = summary.lines().nth(1).unwrap().split(',').skip(2).map(|x| x.parse().unwrap()).collect();
    assert!((f[0] - mean).abs() < 1e-12 && (f[1] - sd).abs() < 1e-12);

    // the matrix feeds compare directly
    let cfg = t.path().join("pair.toml");
    fs::write(&cfg, "[[models]]\nalpha = 0\n\n[[models]]\nalpha = 2\n").unwrap();
    let mut matrices = Vec::new();
    for family in ["twonorm", "ringnorm"] {
        let dir = t.path().join(family);
        ok(&["--config", s(&cfg), "--out", s(&dir), "experiment", "--synthetic", family, "--dimensions", "4", "--train-size", "40", "--test-size", "60", "--runs", "2"]);
        matrices.push(dir.join("matrix.csv"));
    }
    let report = ok(&["--out", s(&t.path().join("cmp")), "compare", s(&matrices[0]), s(&matrices[1])]);
    assert!(report.contains("datasets: 2"), "{report}");
}

fn report_value(report: &str, key: &str) -> f64 {
    let line = report.lines().find(|l| l.starts_with(key)).unwrap_or_else(|| panic!("{key} missing: {report}"));
    line.split(": ").nth(1).unwrap().split_whitespace().next().unwrap().parse().unwrap()
}

fn bv_rows(out: &str) -> Vec<Vec<String>> {
    out.lines().skip(1).map(|l| l.split(',').map(String::from).collect()).collect()
}

#[test]
fn bv_single_and_identical() {
    let t = tempfile::tempdir().unwrap();
    let d = gen(t.path(), "twonorm", 60, 8);
    let common = ["bv", "--data", s(&d), "--s", "10", "--boot-size", "30"];
    let one = ok(&[&["--out", s(&t.path().join("one"))], &common[..], &["--alpha", "1"]].concat());
    assert_eq!(bv_rows(&one).len(), 1);

    let cfg = t.path().join("two.toml");
    fs::write(&cfg, "[[models]]\nname = \"p\"\nalpha = 1\n\n[[models]]\nname = \"q\"\nalpha = 1\n").unwrap();
    let two = ok(&[&["--config", s(&cfg), "--out", s(&t.path().join("two"))], &common[..]].concat());
    let rows = bv_rows(&two);
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0][1..], rows[1][1..]);
    assert_eq!(rows[2][0], "diff p vs q %");
    assert!(rows[2][1..].iter().all(|v| v == "0.00"));
}

#[test]
fn bv_majority_oracle() {
    let t = tempfile::tempdir().unwrap();
    let d = t.path().join("seventy.csv");
    let mut text = String::from("x,class\n");
    for i in 0..100 {
        text.push_str(&format!("{i},{}\n", if i % 10 < 7 { "maj" } else { "min" }));
    }
    fs::write(&d, text).unwrap();
    let out = ok(&["bv", "--data", s(&d), "--scheme", "majority", "--s", "20", "--boot-size", "300", "--test-fraction", "0.3"]);
    let row = &bv_rows(&out)[0];
    let v: Vec<f64> = row[1..].iter().map(|x| x.parse().unwrap()).collect();
    // a bootstrap of 300 from 70/30 data keeps "maj" the majority
    let expected = [0.3, 0.3, 0.0, 0.0, 0.0];
    for (a, b) in v.iter().zip(expected) {
        assert!((a - b).abs() < 1e-12, "{row:?}");
    }
}

#[test]
fn compare_subspace_table() {
    let t = tempfile::tempdir().unwrap();
    let out = ok(&["--out", s(t.path()), "compare", s(&fixture("table_iv.csv")), "--level", "0.1"]);
    assert!((report_value(&out, "critical_difference") - 1.375).abs() < 1e-3);
    let svg = fs::read_to_string(t.path().join("cd.svg")).unwrap();
    assert_eq!(svg.matches(r#"class="clique""#).count(), 2);
    assert!(t.path().join("cd.txt").exists() && t.path().join("ranks.txt").exists());

    let all = ok(&["--out", s(t.path()), "compare", s(&fixture("cd_all.csv")), "--level", "0.10"]);
    assert!((report_value(&all, "critical_difference") - 3.1257).abs() < 1e-3);
}

#[test]
fn compare_equal_matrix() {
    let t = tempfile::tempdir().unwrap();
    let m = t.path().join("m.csv");
    fs::write(&m, "dataset,a,b\nd1,0.5,0.5\nd2,0.7,0.7\n").unwrap();
    let out = ok(&["--out", s(t.path()), "compare", s(&m)]);
    assert_eq!(report_value(&out, "iman_davenport_F"), 0.0);
    let svg = fs::read_to_string(t.path().join("cd.svg")).unwrap();
    assert_eq!(svg.matches(r#"class="clique""#).count(), 1);
}

#[test]
fn compare_malformed_exits_2() {
    let t = tempfile::tempdir().unwrap();
    let m = t.path().join("m.csv");
    fs::write(&m, "dataset,a,b\nd1,0.5\nd2,0.7,x\n").unwrap();
    assert_eq!(run(&["--out", s(t.path()), "compare", s(&m)]).status.code(), Some(2));
}

#[test]
fn filter_keeps_everything_in_rank_order() {
    let t = tempfile::tempdir().unwrap();
    let d = gen(t.path(), "ringnorm", 70, 6);
    let a = t.path().join("a");
    let b = t.path().join("b");
    for out in [&a, &b] {
        ok(&["--out", s(out), "filter", "--data", s(&d), "--method", "infogain", "--bins", "10"]);
    }
    for f in ["scores.csv", "filtered.csv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap());
    }
    let full = data::load_dataset(&d, &CsvSchema::default()).unwrap();
    let filtered = data::load_dataset(a.join("filtered.csv"), &CsvSchema::default()).unwrap();
    assert_eq!(filtered.n_attributes(), full.n_attributes());
    assert_eq!(filtered.n_instances(), full.n_instances());
    let (normed, _) = data::normalize(&full).unwrap();
    let order = spherecover::filters::ranking(&spherecover::filters::infogain_scores(&normed, 10).unwrap());
    assert_eq!(filtered, full.project(&order).unwrap());
}
