use spherecover::stats::{self, Level};

fn table(name: &str) -> stats::AccuracyMatrix {
    let path = format!("{}/tests/data/{name}", env!("CARGO_MANIFEST_DIR"));
    stats::load_matrix(path).unwrap()
}

#[test]
fn subspace_table_ranks_and_f() {
    let m = table("table_iv.csv");
    let s = stats::friedman_test(&m).unwrap();
    let expected = [2.09375, 1.53125, 4.0, 3.5, 3.875];
    for (a, b) in s.mean_ranks.iter().zip(expected) {
        assert!((a - b).abs() < 1e-12, "{a} vs {b}");
    }
    // independent arithmetic: chi2 = 12n/(k(k+1)) * (sum r^2 - k(k+1)^2/4)
    let sum_sq: f64 = expected.iter().map(|r| r * r).sum();
    let chi2 = 12.0 * 16.0 / 30.0 * (sum_sq - 5.0 * 36.0 / 4.0);
    assert!((s.friedman_chi2 - chi2).abs() < 1e-9);
    assert!((s.iman_davenport_f - 15.0 * chi2 / (64.0 - chi2)).abs() < 1e-9);
    assert!((s.iman_davenport_f - 14.97).abs() < 0.5);
    assert!(s.p_value < 1e-5);
    assert_eq!(s.df, (4.0, 60.0));
}

#[test]
fn subspace_table_cliques() {
    let m = table("table_iv.csv");
    let s = stats::friedman_test(&m).unwrap();
    let cd = stats::nemenyi_cd(5, 16, Level::P10).unwrap();
    assert!((cd - 1.375).abs() < 1e-3);
    let named: Vec<Vec<&str>> = stats::cliques(&s.mean_ranks, cd)
        .into_iter()
        .map(|c| {
            let mut v: Vec<&str> = c.iter().map(|&i| s.classifiers[i].as_str()).collect();
            v.sort();
            v
        })
        .collect();
    assert_eq!(named, vec![vec!["RotF", "aRSSE"], vec!["RandC", "RandF", "RandS"]]);
    let svg = stats::render_cd_svg(&s, cd);
    assert_eq!(svg.matches(r#"class="clique""#).count(), 2);
}

#[test]
fn ten_ensemble_table() {
    let m = table("cd_all.csv");
    assert_eq!((m.n_datasets(), m.n_classifiers()), (16, 10));
    let cd = stats::nemenyi_cd(10, 16, Level::P10).unwrap();
    assert!((cd - 3.1257).abs() < 1e-3);
    let s = stats::friedman_test(&m).unwrap();
    let total: f64 = s.mean_ranks.iter().sum();
    assert!((total - 55.0).abs() < 1e-9);
}
