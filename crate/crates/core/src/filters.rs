//! Attribute ranking filters for high-dimensional data.
//!
//! chi-squared and information gain score an attribute by discretising it
//! into equal-width bins over [0,1] and measuring how the bins and the
//! classes depend on each other. Relief (the multiclass ReliefF form with
//! one nearest hit and one nearest miss per other class) rewards attributes
//! that differ across classes near an instance and agree within its class.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::rng;
use crate::rsc::euclidean;

pub const DEFAULT_BINS: usize = 10;
pub const DEFAULT_RELIEF_SAMPLES: usize = 250;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FilterMethod {
    Chi2,
    InfoGain,
    Relief,
}

impl fmt::Display for FilterMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FilterMethod::Chi2 => "chi2",
            FilterMethod::InfoGain => "infogain",
            FilterMethod::Relief => "relief",
        })
    }
}

impl FromStr for FilterMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "chi2" => Ok(FilterMethod::Chi2),
            "infogain" | "ig" => Ok(FilterMethod::InfoGain),
            "relief" | "relieff" => Ok(FilterMethod::Relief),
            other => Err(Error::invalid(format!("unknown filter '{other}'"))),
        }
    }
}

/// Parameters a score was computed with.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterParams {
    Bins(usize),
    Relief { samples: usize, seed: u64 },
}

/// One score per attribute.
#[derive(Debug, Clone, PartialEq)]
pub struct AttributeScores {
    pub method: FilterMethod,
    pub params: FilterParams,
    pub scores: Vec<f64>,
}

/// Equal-width bin of a normalised value; values outside [0,1] fall into
/// the end bins.
fn bin_of(v: f64, bins: usize) -> usize {
    if v <= 0.0 {
        0
    } else {
        ((v * bins as f64) as usize).min(bins - 1)
    }
}

fn contingency(d: &Dataset, attr: usize, bins: usize) -> Vec<Vec<f64>> {
    let mut table = vec![vec![0.0; d.classes().len()]; bins];
    for (i, row) in d.rows().enumerate() {
        table[bin_of(row[attr], bins)][d.label(i)] += 1.0;
    }
    table
}

fn check_binned(d: &Dataset, bins: usize) -> Result<()> {
    if d.is_empty() {
        return Err(Error::Empty("cannot score attributes of an empty dataset".into()));
    }
    if bins < 2 {
        return Err(Error::invalid(format!("need at least 2 bins, got {bins}")));
    }
    Ok(())
}

fn chi2_of(table: &[Vec<f64>]) -> f64 {
    let n: f64 = table.iter().flatten().sum();
    let cols = table[0].len();
    let col_tot: Vec<f64> = (0..cols).map(|c| table.iter().map(|r| r[c]).sum()).collect();
    let mut chi = 0.0;
    for row in table {
        let row_tot: f64 = row.iter().sum();
        for (c, &obs) in row.iter().enumerate() {
            let exp = row_tot * col_tot[c] / n;
            if exp > 0.0 {
                chi += (obs - exp) * (obs - exp) / exp;
            }
        }
    }
    chi
}

fn entropy(counts: impl Iterator<Item = f64>) -> f64 {
    let counts: Vec<f64> = counts.collect();
    let total: f64 = counts.iter().sum();
    if total == 0.0 {
        return 0.0;
    }
    counts
        .iter()
        .filter(|&&c| c > 0.0)
        .map(|&c| {
            let p = c / total;
            -p * p.log2()
        })
        .sum()
}

fn infogain_of(table: &[Vec<f64>]) -> f64 {
    let n: f64 = table.iter().flatten().sum();
    let cols = table[0].len();
    let class_h = entropy((0..cols).map(|c| table.iter().map(|r| r[c]).sum()));
    let cond: f64 = table
        .iter()
        .map(|row| {
            let w: f64 = row.iter().sum::<f64>() / n;
            w * entropy(row.iter().copied())
        })
        .sum();
    // clamp rounding noise on independent attributes
    (class_h - cond).max(0.0)
}

/// Pearson chi-squared statistic of the bin-by-class table, per attribute.
pub fn chi2_scores(d: &Dataset, bins: usize) -> Result<AttributeScores> {
    check_binned(d, bins)?;
    let scores = (0..d.n_attributes())
        .map(|a| chi2_of(&contingency(d, a, bins)))
        .collect();
    Ok(AttributeScores {
        method: FilterMethod::Chi2,
        params: FilterParams::Bins(bins),
        scores,
    })
}

/// `H(class) - H(class | bin)` in bits, per attribute.
pub fn infogain_scores(d: &Dataset, bins: usize) -> Result<AttributeScores> {
    check_binned(d, bins)?;
    let scores = (0..d.n_attributes())
        .map(|a| infogain_of(&contingency(d, a, bins)))
        .collect();
    Ok(AttributeScores {
        method: FilterMethod::InfoGain,
        params: FilterParams::Bins(bins),
        scores,
    })
}

/// ReliefF weights with one nearest hit and one nearest miss per other
/// class, misses weighted by `P(C) / (1 - P(class(x)))`.
///
/// With `sample_count >= n` every instance is used once, in order; otherwise
/// `sample_count` distinct instances are drawn with the seeded generator.
pub fn relief_scores(d: &Dataset, sample_count: usize, seed: u64) -> Result<AttributeScores> {
    let n = d.n_instances();
    let counts = d.class_counts();
    let present: Vec<usize> = (0..counts.len()).filter(|&c| counts[c] > 0).collect();
    if present.len() < 2 {
        return Err(Error::invalid("Relief needs at least two classes"));
    }
    if let Some(&c) = present.iter().find(|&&c| counts[c] < 2) {
        return Err(Error::SingletonClass(d.class_name(c).to_string()));
    }
    if sample_count == 0 {
        return Err(Error::invalid("Relief needs a positive sample count"));
    }
    let samples: Vec<usize> = if sample_count >= n {
        (0..n).collect()
    } else {
        let mut r = rng::stream(seed, "relief", 0);
        index::sample(&mut r, n, sample_count).into_vec()
    };
    let m = d.n_attributes();
    let prior: Vec<f64> = counts.iter().map(|&c| c as f64 / n as f64).collect();
    let mut w = vec![0.0; m];
    let mut nearest = vec![None::<(f64, usize)>; counts.len()];
    for &i in &samples {
        let x = d.row(i);
        nearest.iter_mut().for_each(|e| *e = None);
        for j in 0..n {
            if j == i {
                continue;
            }
            let dist = euclidean(x, d.row(j));
            let slot = &mut nearest[d.label(j)];
            if slot.is_none_or(|(best, _)| dist < best) {
                *slot = Some((dist, j));
            }
        }
        let own = d.label(i);
        let hit = d.row(nearest[own].unwrap().1);
        for a in 0..m {
            w[a] -= (x[a] - hit[a]).abs();
        }
        for &c in present.iter().filter(|&&c| c != own) {
            let miss = d.row(nearest[c].unwrap().1);
            let weight = prior[c] / (1.0 - prior[own]);
            for a in 0..m {
                w[a] += weight * (x[a] - miss[a]).abs();
            }
        }
    }
    let s = samples.len() as f64;
    Ok(AttributeScores {
        method: FilterMethod::Relief,
        params: FilterParams::Relief {
            samples: samples.len(),
            seed,
        },
        scores: w.into_iter().map(|v| v / s).collect(),
    })
}

/// Scores with the given method and its parameters.
pub fn score(
    d: &Dataset,
    method: FilterMethod,
    bins: usize,
    relief_samples: usize,
    seed: u64,
) -> Result<AttributeScores> {
    match method {
        FilterMethod::Chi2 => chi2_scores(d, bins),
        FilterMethod::InfoGain => infogain_scores(d, bins),
        FilterMethod::Relief => relief_scores(d, relief_samples, seed),
    }
}

/// Attribute indices ordered by descending score, ties to the lower index.
pub fn ranking(scores: &AttributeScores) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.scores.len()).collect();
    order.sort_by(|&a, &b| {
        scores.scores[b]
            .partial_cmp(&scores.scores[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    order
}

/// The `k` best attributes, best first.
pub fn select_top_k(scores: &AttributeScores, k: usize) -> Result<Vec<usize>> {
    let m = scores.scores.len();
    if k == 0 || k > m {
        return Err(Error::invalid(format!("k = {k} outside 1..={m}")));
    }
    let mut order = ranking(scores);
    order.truncate(k);
    Ok(order)
}

/// Writes `attribute,score,rank` rows, in attribute order.
pub fn write_scores_csv<W: Write>(scores: &AttributeScores, attributes: &[String], mut w: W) -> std::io::Result<()> {
    let order = ranking(scores);
    let mut rank = vec![0; order.len()];
    for (r, &a) in order.iter().enumerate() {
        rank[a] = r + 1;
    }
    writeln!(w, "attribute,score,rank")?;
    for (a, s) in scores.scores.iter().enumerate() {
        writeln!(w, "{},{},{}", attributes[a], s, rank[a])?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng as _;

    fn ds(cols: &[&[f64]], labels: &[&str]) -> Dataset {
        let n = labels.len();
        let rows = (0..n).map(|i| cols.iter().map(|c| c[i]).collect()).collect();
        Dataset::from_labeled((0..cols.len()).map(|j| format!("a{j}")).collect(), rows, labels).unwrap()
    }

    /// Random 8x3 toy dataset with 2 classes over [0,1].
    pub(crate) fn toy(seed: u64) -> Dataset {
        let mut r = crate::rng::stream(seed, "toy", 0);
        let rows: Vec<Vec<f64>> = (0..8).map(|_| (0..3).map(|_| r.gen::<f64>()).collect()).collect();
        let labels: Vec<&str> = (0..8).map(|i| if i < 4 { "p" } else { "q" }).collect();
        Dataset::from_labeled(vec!["a".into(), "b".into(), "c".into()], rows, &labels).unwrap()
    }

    // Brute force: enumerate every (bin, class) cell by scanning the data.
    fn oracle_chi2(d: &Dataset, a: usize, bins: usize) -> f64 {
        let n = d.n_instances() as f64;
        let mut chi = 0.0;
        for b in 0..bins {
            let in_bin = |i: usize| {
                let v = d.row(i)[a];
                let lo = b as f64 / bins as f64;
                let hi = (b + 1) as f64 / bins as f64;
                (v >= lo && v < hi) || (b == bins - 1 && v >= hi)
            };
            for c in 0..d.classes().len() {
                let obs = (0..d.n_instances()).filter(|&i| in_bin(i) && d.label(i) == c).count() as f64;
                let rb = (0..d.n_instances()).filter(|&i| in_bin(i)).count() as f64;
                let cc = (0..d.n_instances()).filter(|&i| d.label(i) == c).count() as f64;
                let e = rb * cc / n;
                if e > 0.0 {
                    chi += (obs - e).powi(2) / e;
                }
            }
        }
        chi
    }

    fn oracle_ig(d: &Dataset, a: usize, bins: usize) -> f64 {
        let n = d.n_instances() as f64;
        let h = |ps: Vec<f64>| -> f64 { ps.into_iter().filter(|&p| p > 0.0).map(|p| -p * p.ln() / 2f64.ln()).sum() };
        let classes = d.classes().len();
        let hc = h((0..classes).map(|c| d.labels().iter().filter(|&&l| l == c).count() as f64 / n).collect());
        let mut cond = 0.0;
        for b in 0..bins {
            let members: Vec<usize> = (0..d.n_instances())
                .filter(|&i| {
                    let v = d.row(i)[a];
                    let k = ((v * bins as f64).floor() as usize).min(bins - 1);
                    k == b
                })
                .collect();
            if members.is_empty() {
                continue;
            }
            let nb = members.len() as f64;
            let hb = h((0..classes).map(|c| members.iter().filter(|&&i| d.label(i) == c).count() as f64 / nb).collect());
            cond += nb / n * hb;
        }
        hc - cond
    }

    #[test]
    fn constant_attribute_scores_zero() {
        let d = ds(&[&[0.3; 6], &[0.0, 0.1, 0.2, 0.8, 0.9, 1.0]], &["A", "A", "A", "B", "B", "B"]);
        assert_eq!(chi2_scores(&d, 10).unwrap().scores[0], 0.0);
        assert_eq!(infogain_scores(&d, 10).unwrap().scores[0], 0.0);
        assert_eq!(relief_scores(&d, 6, 0).unwrap().scores[0], 0.0);
    }

    #[test]
    fn perfect_separator() {
        let col: Vec<f64> = (0..20).map(|i| if i < 10 { 0.1 } else { 0.9 }).collect();
        let labels: Vec<&str> = (0..20).map(|i| if i < 10 { "A" } else { "B" }).collect();
        let d = ds(&[&col], &labels);
        assert!((chi2_scores(&d, 10).unwrap().scores[0] - 20.0).abs() < 1e-12);
        assert!((infogain_scores(&d, 10).unwrap().scores[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn chi2_and_ig_match_brute_force() {
        for seed in 0..20 {
            let d = toy(seed);
            for bins in [2, 3, 10] {
                let chi = chi2_scores(&d, bins).unwrap();
                let ig = infogain_scores(&d, bins).unwrap();
                for a in 0..3 {
                    assert!((chi.scores[a] - oracle_chi2(&d, a, bins)).abs() < 1e-12);
                    assert!((ig.scores[a] - oracle_ig(&d, a, bins)).abs() < 1e-12);
                }
                let best = (0..3)
                    .max_by(|&a, &b| oracle_chi2(&d, a, bins).partial_cmp(&oracle_chi2(&d, b, bins)).unwrap().then(b.cmp(&a)))
                    .unwrap();
                assert_eq!(select_top_k(&chi, 1).unwrap(), vec![best]);
            }
        }
    }

    #[test]
    fn relief_hand_example() {
        // Inner points: hit 0.1, miss 0.8. Outer points: hit 0.1, miss 0.9.
        // (0.8 + 0.7 + 0.7 + 0.8) / 4
        let d = ds(&[&[0.0, 0.1, 0.9, 1.0]], &["A", "A", "B", "B"]);
        let s = relief_scores(&d, 4, 0).unwrap();
        assert!((s.scores[0] - 0.75).abs() < 1e-12, "{}", s.scores[0]);
    }

    #[test]
    fn relief_noise_attribute_near_zero() {
        let mut total = 0.0;
        for seed in 0..30 {
            let mut r = crate::rng::stream(seed, "noise", 0);
            let rows: Vec<Vec<f64>> = (0..200).map(|_| vec![r.gen::<f64>()]).collect();
            let labels: Vec<&str> = (0..200).map(|i| if i % 2 == 0 { "A" } else { "B" }).collect();
            let d = Dataset::from_labeled(vec!["z".into()], rows, &labels).unwrap();
            total += relief_scores(&d, 200, seed).unwrap().scores[0];
        }
        assert!((total / 30.0).abs() < 0.05);
    }

    #[test]
    fn relief_rejects_singleton_class() {
        let d = ds(&[&[0.0, 0.5, 1.0]], &["A", "A", "B"]);
        match relief_scores(&d, 3, 0) {
            Err(Error::SingletonClass(c)) => assert_eq!(c, "B"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn relief_scores_bounded() {
        for seed in 0..5 {
            let s = relief_scores(&toy(seed), 5, seed).unwrap();
            assert!(s.scores.iter().all(|v| (-1.0..=1.0).contains(v)));
        }
    }

    #[test]
    fn top_k_examples() {
        let s = AttributeScores {
            method: FilterMethod::Chi2,
            params: FilterParams::Bins(10),
            scores: vec![0.5, 0.9, 0.5],
        };
        assert_eq!(select_top_k(&s, 2).unwrap(), vec![1, 0]);
        assert_eq!(select_top_k(&s, 3).unwrap(), vec![1, 0, 2]);
        assert!(select_top_k(&s, 0).is_err());
        assert!(select_top_k(&s, 4).is_err());
    }

    #[test]
    fn duplication_and_relabeling() {
        let d = toy(3);
        let doubled = d.subset(&(0..8).chain(0..8).collect::<Vec<_>>());
        let (c1, c2) = (chi2_scores(&d, 10).unwrap(), chi2_scores(&doubled, 10).unwrap());
        let (i1, i2) = (infogain_scores(&d, 10).unwrap(), infogain_scores(&doubled, 10).unwrap());
        for a in 0..3 {
            assert!((2.0 * c1.scores[a] - c2.scores[a]).abs() < 1e-12);
            assert!((i1.scores[a] - i2.scores[a]).abs() < 1e-12);
        }
        let names: Vec<&str> = d.labels().iter().map(|&l| if l == 0 { "zz" } else { "aa" }).collect();
        let rows = d.rows().map(<[f64]>::to_vec).collect();
        let relabeled = Dataset::from_labeled(d.attributes().to_vec(), rows, &names).unwrap();
        let (c3, i3) = (chi2_scores(&relabeled, 10).unwrap(), infogain_scores(&relabeled, 10).unwrap());
        for a in 0..3 {
            assert!((c3.scores[a] - c1.scores[a]).abs() < 1e-12);
            assert!((i3.scores[a] - i1.scores[a]).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_dataset_errors() {
        let d = toy(1).subset(&[]);
        assert!(chi2_scores(&d, 10).is_err());
        assert!(infogain_scores(&d, 10).is_err());
        assert!(chi2_scores(&toy(1), 1).is_err());
    }
}
