//! Rank-based comparison of several classifiers over several datasets.
//!
//! [`friedman_test`] ranks the classifiers on every dataset (rank 1 is the
//! highest accuracy, ties share the mean rank), then tests whether the mean
//! ranks differ with the Friedman statistic and its Iman-Davenport F form.
//! Pairwise differences are judged with the Nemenyi critical difference or,
//! against a control, with a Bonferroni-Dunn z statistic. Critical
//! difference diagrams draw the mean ranks on an axis and join classifiers
//! that are not significantly different.

use std::fmt::Write as _;
use std::fs;
use std::io::Read;
use std::path::Path;

use serde::Serialize;
use statrs::function::beta::beta_reg;
use statrs::function::erf::erfc;

use crate::error::{Error, Result};

/// Accuracies: one row per dataset, one column per classifier.
#[derive(Debug, Clone, PartialEq)]
pub struct AccuracyMatrix {
    pub datasets: Vec<String>,
    pub classifiers: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

impl AccuracyMatrix {
    pub fn new(datasets: Vec<String>, classifiers: Vec<String>, values: Vec<Vec<f64>>) -> Result<Self> {
        let m = AccuracyMatrix {
            datasets,
            classifiers,
            values,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.classifiers.len();
        let n = self.values.len();
        if n < 2 || k < 2 {
            return Err(Error::invalid(format!(
                "need at least 2 datasets and 2 classifiers, got {n} x {k}"
            )));
        }
        if self.datasets.len() != n {
            return Err(Error::invalid("dataset names do not match rows"));
        }
        for (row, name) in self.values.iter().zip(&self.datasets) {
            if row.len() != k {
                return Err(Error::invalid(format!(
                    "row '{name}' has {} entries, expected {k}",
                    row.len()
                )));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid(format!("row '{name}' has a missing entry")));
            }
        }
        Ok(())
    }

    pub fn n_datasets(&self) -> usize {
        self.values.len()
    }

    pub fn n_classifiers(&self) -> usize {
        self.classifiers.len()
    }

    /// Rows from several matrices sharing one classifier header.
    pub fn concat(parts: Vec<AccuracyMatrix>) -> Result<Self> {
        let mut it = parts.into_iter();
        let mut first = it.next().ok_or_else(|| Error::Empty("no matrices".into()))?;
        for p in it {
            if p.classifiers != first.classifiers {
                return Err(Error::SchemaMismatch("matrices have different classifier headers".into()));
            }
            first.datasets.extend(p.datasets);
            first.values.extend(p.values);
        }
        first.validate()?;
        Ok(first)
    }
}

/// Parses a matrix CSV without validating its shape: header row of
/// classifier names (first cell labels the dataset column), then one row per
/// dataset.
pub fn parse_matrix_csv<R: Read>(reader: R) -> Result<AccuracyMatrix> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let to_parse = |e: csv::Error| Error::Parse {
        line: e.position().map_or(0, |p| p.line()),
        message: e.to_string(),
    };
    let header = rdr.headers().map_err(to_parse)?.clone();
    if header.len() < 2 {
        return Err(Error::Parse {
            line: 1,
            message: "header needs a dataset column and classifier columns".into(),
        });
    }
    let classifiers: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    let mut datasets = Vec::new();
    let mut values = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(to_parse)?;
        let line = rec.position().map_or(0, |p| p.line());
        datasets.push(rec.get(0).unwrap_or_default().to_string());
        let row = rec
            .iter()
            .skip(1)
            .zip(&classifiers)
            .map(|(v, c)| {
                v.parse::<f64>().map_err(|_| Error::NonNumeric {
                    line,
                    column: c.clone(),
                    value: v.to_string(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        values.push(row);
    }
    Ok(AccuracyMatrix {
        datasets,
        classifiers,
        values,
    })
}

pub fn read_matrix_csv<R: Read>(reader: R) -> Result<AccuracyMatrix> {
    let m = parse_matrix_csv(reader)?;
    m.validate()?;
    Ok(m)
}

pub fn load_matrix(path: impl AsRef<Path>) -> Result<AccuracyMatrix> {
    let path = path.as_ref();
    let f = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_matrix_csv(f)
}

/// Ranks, mean ranks and the Friedman / Iman-Davenport statistics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankSummary {
    pub classifiers: Vec<String>,
    /// Per-dataset ranks, rank 1 = most accurate; ties get midranks.
    pub ranks: Vec<Vec<f64>>,
    pub mean_ranks: Vec<f64>,
    pub n_datasets: usize,
    pub friedman_chi2: f64,
    pub iman_davenport_f: f64,
    pub df: (f64, f64),
    /// Upper tail probability of the F statistic.
    pub p_value: f64,
}

/// Descending midranks of one row.
pub fn midranks(row: &[f64]) -> Vec<f64> {
    let k = row.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| row[b].partial_cmp(&row[a]).unwrap());
    let mut ranks = vec![0.0; k];
    let mut i = 0;
    while i < k {
        let mut j = i;
        while j + 1 < k && row[order[j + 1]] == row[order[i]] {
            j += 1;
        }
        // positions i..=j share the mean of ranks i+1..=j+1
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &o in &order[i..=j] {
            ranks[o] = r;
        }
        i = j + 1;
    }
    ranks
}

/// Upper tail of the F(d1, d2) distribution.
pub fn f_upper_tail(f: f64, d1: f64, d2: f64) -> f64 {
    if f <= 0.0 {
        return 1.0;
    }
    if f.is_infinite() {
        return 0.0;
    }
    beta_reg(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * f))
}

pub fn friedman_test(m: &AccuracyMatrix) -> Result<RankSummary> {
    m.validate()?;
    let n = m.n_datasets();
    let k = m.n_classifiers();
    let ranks: Vec<Vec<f64>> = m.values.iter().map(|r| midranks(r)).collect();
    let mean_ranks: Vec<f64> = (0..k)
        .map(|j| ranks.iter().map(|r| r[j]).sum::<f64>() / n as f64)
        .collect();
    let (nf, kf) = (n as f64, k as f64);
    let sum_sq: f64 = mean_ranks.iter().map(|r| r * r).sum();
    let chi2 = (12.0 * nf / (kf * (kf + 1.0)) * (sum_sq - kf * (kf + 1.0).powi(2) / 4.0)).max(0.0);
    let denom = nf * (kf - 1.0) - chi2;
    let f = if chi2 == 0.0 {
        0.0
    } else if denom <= 0.0 {
        f64::INFINITY
    } else {
        (nf - 1.0) * chi2 / denom
    };
    let df = (kf - 1.0, (kf - 1.0) * (nf - 1.0));
    Ok(RankSummary {
        classifiers: m.classifiers.clone(),
        ranks,
        mean_ranks,
        n_datasets: n,
        friedman_chi2: chi2,
        iman_davenport_f: f,
        df,
        p_value: f_upper_tail(f, df.0, df.1),
    })
}

/// Significance level with an embedded Nemenyi table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    P05,
    P10,
}

impl Level {
    pub fn from_f64(level: f64) -> Result<Self> {
        if (level - 0.05).abs() < 1e-9 {
            Ok(Level::P05)
        } else if (level - 0.10).abs() < 1e-9 {
            Ok(Level::P10)
        } else {
            Err(Error::invalid(format!("significance level {level} not in {{0.05, 0.10}}")))
        }
    }

    pub fn as_f64(self) -> f64 {
        match self {
            Level::P05 => 0.05,
            Level::P10 => 0.10,
        }
    }
}

// Studentized range quantiles divided by sqrt(2), k = 2..=10.
const Q_05: [f64; 9] = [1.960, 2.343, 2.569, 2.728, 2.850, 2.949, 3.031, 3.102, 3.164];
const Q_10: [f64; 9] = [1.645, 2.052, 2.291, 2.459, 2.589, 2.693, 2.780, 2.855, 2.920];

/// Nemenyi constant `q_a` for `k` classifiers.
pub fn nemenyi_q(k: usize, level: Level) -> Result<f64> {
    if !(2..=10).contains(&k) {
        return Err(Error::TableRange(k));
    }
    Ok(match level {
        Level::P05 => Q_05[k - 2],
        Level::P10 => Q_10[k - 2],
    })
}

/// `q_a * sqrt(k(k+1) / 6n)`.
pub fn nemenyi_cd(k: usize, n: usize, level: Level) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("no datasets"));
    }
    Ok(nemenyi_q(k, level)? * rank_se(k, n))
}

fn rank_se(k: usize, n: usize) -> f64 {
    let kf = k as f64;
    (kf * (kf + 1.0) / (6.0 * n as f64)).sqrt()
}

/// `(r_i - r_j) / sqrt(k(k+1) / 6n)`, standard normal under the null.
pub fn bonferroni_dunn_z(mean_rank_i: f64, mean_rank_j: f64, k: usize, n: usize) -> f64 {
    (mean_rank_i - mean_rank_j) / rank_se(k, n)
}

/// Two-sided normal p-value of `z`.
pub fn two_sided_p(z: f64) -> f64 {
    erfc(z.abs() / std::f64::consts::SQRT_2)
}

/// Groups of classifiers with all pairwise mean-rank gaps below `cd`.
///
/// Classifiers are sorted by mean rank; from each one the group extends as
/// far as the gap allows, and groups contained in an earlier one or of size
/// one are dropped. Each clique lists classifier indices in rank order.
pub fn cliques(mean_ranks: &[f64], cd: f64) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..mean_ranks.len()).collect();
    order.sort_by(|&a, &b| mean_ranks[a].partial_cmp(&mean_ranks[b]).unwrap().then(a.cmp(&b)));
    let mut out: Vec<Vec<usize>> = Vec::new();
    let mut last_end = 0usize;
    for i in 0..order.len() {
        let mut j = i;
        while j + 1 < order.len() && mean_ranks[order[j + 1]] - mean_ranks[order[i]] < cd {
            j += 1;
        }
        if j > i && (out.is_empty() || j > last_end) {
            out.push(order[i..=j].to_vec());
            last_end = j;
        }
    }
    out
}

fn escape_xml(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// SVG 1.1 critical difference diagram.
pub fn render_cd_svg(summary: &RankSummary, cd: f64) -> String {
    let k = summary.classifiers.len();
    let width = 640.0;
    let left = 60.0;
    let right = width - 60.0;
    let axis_y = 60.0;
    let x_of = |r: f64| left + (r - 1.0) / ((k as f64 - 1.0).max(1.0)) * (right - left);
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| summary.mean_ranks[a].partial_cmp(&summary.mean_ranks[b]).unwrap().then(a.cmp(&b)));
    let groups = cliques(&summary.mean_ranks, cd);
    let half = k.div_ceil(2);
    let label_rows = half.max(k - half);
    let height = axis_y + 40.0 + groups.len() as f64 * 8.0 + label_rows as f64 * 20.0 + 20.0;

    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    // critical difference bar
    let _ = writeln!(
        s,
        r#"<line x1="{:.2}" y1="20.00" x2="{:.2}" y2="20.00" stroke="black" stroke-width="2"/>"#,
        x_of(1.0),
        x_of(1.0 + cd)
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="14.00" text-anchor="middle">CD = {cd:.4}</text>"#,
        (x_of(1.0) + x_of(1.0 + cd)) / 2.0
    );
    // axis and ticks
    let _ = writeln!(
        s,
        r#"<line x1="{left:.2}" y1="{axis_y:.2}" x2="{right:.2}" y2="{axis_y:.2}" stroke="black"/>"#
    );
    for r in 1..=k {
        let x = x_of(r as f64);
        let _ = writeln!(
            s,
            r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{axis_y:.2}" stroke="black"/>"#,
            axis_y - 6.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{r}</text>"#,
            axis_y - 10.0
        );
    }
    // clique bars
    for (g, members) in groups.iter().enumerate() {
        let y = axis_y + 12.0 + g as f64 * 8.0;
        let lo = summary.mean_ranks[members[0]];
        let hi = summary.mean_ranks[*members.last().unwrap()];
        let _ = writeln!(
            s,
            r#"<line class="clique" x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="black" stroke-width="3"/>"#,
            x_of(lo) - 3.0,
            x_of(hi) + 3.0
        );
    }
    // labels: best half to the left, rest to the right
    let base = axis_y + 20.0 + groups.len() as f64 * 8.0;
    for (pos, &c) in order.iter().enumerate() {
        let r = summary.mean_ranks[c];
        let x = x_of(r);
        let (row, anchor, lx) = if pos < half {
            (pos, "end", left - 10.0)
        } else {
            (k - 1 - pos, "start", right + 10.0)
        };
        let y = base + row as f64 * 20.0;
        let _ = writeln!(
            s,
            r#"<polyline points="{x:.2},{axis_y:.2} {x:.2},{y:.2} {lx:.2},{y:.2}" fill="none" stroke="black"/>"#
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="{anchor}">{} ({r:.2})</text>"#,
            if anchor == "end" { lx - 4.0 } else { lx + 4.0 },
            y + 4.0,
            escape_xml(&summary.classifiers[c])
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Fixed-width text rendering of the same diagram.
pub fn render_cd_text(summary: &RankSummary, cd: f64) -> String {
    const WIDTH: usize = 61;
    let k = summary.classifiers.len();
    let col = |r: f64| -> usize {
        (((r - 1.0) / ((k as f64 - 1.0).max(1.0))) * (WIDTH - 1) as f64).round() as usize
    };
    let mut out = String::new();
    let _ = writeln!(out, "CD = {cd:.4}");
    let mut axis = vec!['-'; WIDTH];
    let mut ticks = vec![' '; WIDTH];
    for r in 1..=k {
        let c = col(r as f64);
        axis[c] = '+';
        let label = r.to_string();
        for (o, ch) in label.chars().enumerate() {
            if c + o < WIDTH {
                ticks[c + o] = ch;
            }
        }
    }
    let _ = writeln!(out, "{}", ticks.iter().collect::<String>().trim_end());
    let _ = writeln!(out, "{}", axis.iter().collect::<String>());
    for members in cliques(&summary.mean_ranks, cd) {
        let lo = col(summary.mean_ranks[members[0]]);
        let hi = col(summary.mean_ranks[*members.last().unwrap()]);
        let line: String = (0..=hi).map(|c| if c >= lo { '=' } else { ' ' }).collect();
        let names: Vec<&str> = members.iter().map(|&c| summary.classifiers[c].as_str()).collect();
        let _ = writeln!(out, "{line}  [{}]", names.join(", "));
    }
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| summary.mean_ranks[a].partial_cmp(&summary.mean_ranks[b]).unwrap().then(a.cmp(&b)));
    for c in order {
        let r = summary.mean_ranks[c];
        let pad: String = " ".repeat(col(r));
        let _ = writeln!(out, "{pad}^ {} ({r:.2})", summary.classifiers[c]);
    }
    out
}

/// Writes `path` as SVG and a text rendering next to it (`.txt`).
pub fn render_cd_diagram(summary: &RankSummary, cd: f64, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, render_cd_svg(summary, cd)).map_err(|e| Error::io(path, e))?;
    let text = path.with_extension("txt");
    fs::write(&text, render_cd_text(summary, cd)).map_err(|e| Error::io(&text, e))?;
    Ok(())
}

/// Plain-text rank report.
pub fn format_summary(summary: &RankSummary, cd: f64, level: Level) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "classifier,mean_rank");
    for (c, r) in summary.classifiers.iter().zip(&summary.mean_ranks) {
        let _ = writeln!(out, "{c},{r:.4}");
    }
    let _ = writeln!(out, "datasets: {}", summary.n_datasets);
    let _ = writeln!(out, "friedman_chi2: {:.4}", summary.friedman_chi2);
    let _ = writeln!(
        out,
        "iman_davenport_F: {:.4} (df {}, {})",
        summary.iman_davenport_f, summary.df.0, summary.df.1
    );
    let _ = writeln!(out, "p_value: {:.3e}", summary.p_value);
    let _ = writeln!(out, "critical_difference ({}): {cd:.4}", level.as_f64());
    for members in cliques(&summary.mean_ranks, cd) {
        let names: Vec<&str> = members.iter().map(|&c| summary.classifiers[c].as_str()).collect();
        let _ = writeln!(out, "clique: {}", names.join(", "));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn midranks_share_ties() {
        assert_eq!(midranks(&[0.9, 0.8, 0.8, 0.1]), vec![1.0, 2.5, 2.5, 4.0]);
        assert_eq!(midranks(&[0.5; 3]), vec![2.0; 3]);
    }

    #[test]
    fn identical_classifiers() {
        let m = AccuracyMatrix::new(
            vec!["d1".into(), "d2".into(), "d3".into()],
            vec!["a".into(), "b".into(), "c".into()],
            vec![vec![0.7; 3], vec![0.8; 3], vec![0.9; 3]],
        )
        .unwrap();
        let s = friedman_test(&m).unwrap();
        assert_eq!(s.mean_ranks, vec![2.0; 3]);
        assert_eq!(s.iman_davenport_f, 0.0);
        assert_eq!(s.p_value, 1.0);
    }

    #[test]
    fn cd_examples() {
        assert!((nemenyi_cd(5, 16, Level::P10).unwrap() - 1.375).abs() < 1e-3);
        assert!((nemenyi_cd(10, 16, Level::P10).unwrap() - 3.1257).abs() < 1e-3);
        let a = nemenyi_cd(6, 10, Level::P05).unwrap();
        let b = nemenyi_cd(6, 40, Level::P05).unwrap();
        assert!((a / 2.0 - b).abs() < 1e-12);
        assert!(matches!(nemenyi_cd(11, 16, Level::P05), Err(Error::TableRange(11))));
        assert!(matches!(nemenyi_cd(1, 16, Level::P05), Err(Error::TableRange(1))));
    }

    #[test]
    fn cd_monotone() {
        for level in [Level::P05, Level::P10] {
            for k in 2..10 {
                assert!(nemenyi_cd(k + 1, 16, level).unwrap() > nemenyi_cd(k, 16, level).unwrap());
            }
            for n in 2..30 {
                assert!(nemenyi_cd(5, n + 1, level).unwrap() < nemenyi_cd(5, n, level).unwrap());
            }
        }
    }

    #[test]
    fn z_examples() {
        assert_eq!(bonferroni_dunn_z(2.0, 2.0, 5, 16), 0.0);
        let z = bonferroni_dunn_z(1.53, 4.00, 5, 16);
        assert!((z + 4.418).abs() < 0.005, "{z}");
        assert_eq!(bonferroni_dunn_z(4.00, 1.53, 5, 16), -z);
        assert!((two_sided_p(1.959963984540054) - 0.05).abs() < 1e-9);
    }

    #[test]
    fn clique_examples() {
        assert!(cliques(&[1.0, 3.0], 1.5).is_empty());
        assert_eq!(cliques(&[1.2, 1.5, 1.9], 1.0), vec![vec![0, 1, 2]]);
        assert_eq!(
            cliques(&[2.09375, 1.53125, 4.0, 3.5, 3.875], 1.375),
            vec![vec![1, 0], vec![3, 4, 2]]
        );
        // overlapping chains
        assert_eq!(cliques(&[1.0, 1.8, 2.6], 1.0), vec![vec![0, 1], vec![1, 2]]);
    }

    #[test]
    fn f_tail_matches_known_values() {
        // F(4, 60) upper 5% point is 2.5252
        assert!((f_upper_tail(2.5252, 4.0, 60.0) - 0.05).abs() < 1e-4);
        assert_eq!(f_upper_tail(0.0, 4.0, 60.0), 1.0);
    }

    #[test]
    fn matrix_parsing_errors() {
        assert!(read_matrix_csv("d,a,b\nx,0.5,0.6\n".as_bytes()).is_err());
        assert!(read_matrix_csv("d,a,b\nx,0.5,zz\ny,1,2\n".as_bytes()).is_err());
        let m = read_matrix_csv("d,a,b\nx,0.5,0.6\ny,0.7,0.1\n".as_bytes()).unwrap();
        assert_eq!(m.classifiers, vec!["a", "b"]);
    }

    #[test]
    fn svg_is_deterministic_and_escaped() {
        let m = AccuracyMatrix::new(
            vec!["d1".into(), "d2".into()],
            vec!["a<b".into(), "c".into()],
            vec![vec![0.5, 0.5], vec![0.5, 0.5]],
        )
        .unwrap();
        let s = friedman_test(&m).unwrap();
        let svg = render_cd_svg(&s, 1.0);
        assert_eq!(svg, render_cd_svg(&s, 1.0));
        assert!(svg.contains("a&lt;b"));
        assert_eq!(svg.matches(r#"class="clique""#).count(), 1);
        assert!(render_cd_text(&s, 1.0).contains("[a<b, c]"));
    }
}
