//! Majority-vote ensembles of sphere covers.
//!
//! Three builders share one model type:
//!
//! * [`build_arse`]: every member covers the full training set; diversity
//!   comes only from the random order in which centres are picked.
//! * [`build_abrse`]: members are built in sequence; after each one the
//!   border cases it recorded are taken out of the working training set and
//!   replaced by draws (with replacement) from the border, uncovered and
//!   misclassified cases. The working set keeps its size throughout.
//! * [`build_arsse`]: every member sees a random subset of `kappa`
//!   attributes, drawn without replacement, and keeps it for prediction.
//!
//! Member `j` is seeded with `derive_seed(seed, "member", j)`, so members of
//! the independent schemes can be built in parallel without changing the
//! result.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, MinMax};
use crate::error::{Error, Result};
use crate::rng;
use crate::rsc::{build_rsc, SphereCoverModel};

/// Ensemble construction scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// Plain majority vote over independently randomised covers.
    Arse,
    /// Border-case resampling between members.
    Abrse,
    /// Random attribute subspaces.
    Arsse,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Arse => "arse",
            Scheme::Abrse => "abrse",
            Scheme::Arsse => "arsse",
        })
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "arse" => Ok(Scheme::Arse),
            "abrse" => Ok(Scheme::Abrse),
            "arsse" => Ok(Scheme::Arsse),
            other => Err(Error::invalid(format!("unknown ensemble scheme '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleModel {
    pub(crate) scheme: Scheme,
    pub(crate) alpha: usize,
    pub(crate) kappa: Option<usize>,
    pub(crate) master_seed: u64,
    pub(crate) members: Vec<SphereCoverModel>,
    pub(crate) classes: Vec<String>,
}

impl EnsembleModel {
    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn alpha(&self) -> usize {
        self.alpha
    }

    pub fn kappa(&self) -> Option<usize> {
        self.kappa
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn members(&self) -> &[SphereCoverModel] {
        &self.members
    }

    /// Number of members, `L`.
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn input_dim(&self) -> usize {
        self.members.first().map_or(0, SphereCoverModel::input_dim)
    }

    /// Votes on `x` with the tie seed derived for `query_index`.
    pub fn predict(&self, x: &[f64], query_index: u64) -> Result<(usize, VoteTally)> {
        vote(self, x, rng::derive_seed(self.master_seed, "tie", query_index))
    }

    pub(crate) fn rebase(
        mut self,
        subset_map: &[usize],
        input_dim: usize,
        normalization: Option<MinMax>,
    ) -> Self {
        self.members = self
            .members
            .into_iter()
            .map(|m| m.rebase(subset_map, input_dim, normalization.clone()))
            .collect();
        self
    }
}

/// Per-label vote counts and the fused decision.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VoteTally {
    pub counts: Vec<usize>,
    pub winner: usize,
    pub tie_broken: bool,
}

impl VoteTally {
    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }
}

/// Fuses label votes by majority, breaking exact ties uniformly at random.
pub fn tally_votes(votes: &[usize], n_classes: usize, tie_seed: u64) -> VoteTally {
    let mut counts = vec![0usize; n_classes];
    for &v in votes {
        counts[v] += 1;
    }
    let best = counts.iter().copied().max().unwrap_or(0);
    let tied: Vec<usize> = (0..n_classes).filter(|&c| counts[c] == best).collect();
    let (winner, tie_broken) = if tied.len() == 1 {
        (tied[0], false)
    } else {
        let mut r = rng::stream(tie_seed, "tie-break", 0);
        (tied[r.gen_range(0..tied.len())], true)
    };
    VoteTally {
        counts,
        winner,
        tie_broken,
    }
}

/// Majority vote of the ensemble on a raw input vector.
pub fn vote(ensemble: &EnsembleModel, x: &[f64], tie_seed: u64) -> Result<(usize, VoteTally)> {
    let votes = ensemble
        .members
        .iter()
        .map(|m| m.classify(x))
        .collect::<Result<Vec<_>>>()?;
    let tally = tally_votes(&votes, ensemble.classes.len(), tie_seed);
    Ok((tally.winner, tally))
}

fn member_seed(seed: u64, j: usize) -> u64 {
    rng::derive_seed(seed, "member", j as u64)
}

fn check_members(l: usize) -> Result<()> {
    if l == 0 {
        return Err(Error::invalid("an ensemble needs at least one member"));
    }
    Ok(())
}

fn usable(m: SphereCoverModel) -> Result<SphereCoverModel> {
    if m.is_usable() {
        Ok(m)
    } else {
        Err(Error::UnusableModel)
    }
}

/// `L` independent sphere covers of the full training set.
pub fn build_arse(train: &Dataset, alpha: usize, l: usize, seed: u64) -> Result<EnsembleModel> {
    check_members(l)?;
    let members = (0..l)
        .into_par_iter()
        .map(|j| build_rsc(train, alpha, member_seed(seed, j)).and_then(usable))
        .collect::<Result<Vec<_>>>()?;
    Ok(EnsembleModel {
        scheme: Scheme::Arse,
        alpha,
        kappa: None,
        master_seed: seed,
        members,
        classes: train.classes().to_vec(),
    })
}

/// Positions in `d` recorded as border cases of the model's spheres.
/// Indices not present in `d` are dropped; unbounded spheres have none.
pub fn border_cases(m: &SphereCoverModel, d: &Dataset) -> BTreeSet<usize> {
    m.spheres()
        .iter()
        .filter_map(|s| s.border)
        .filter(|&b| b < d.n_instances())
        .collect()
}

/// Positions in `d` strictly inside no sphere of the model.
pub fn uncovered_cases(m: &SphereCoverModel, d: &Dataset) -> Result<BTreeSet<usize>> {
    let mut out = BTreeSet::new();
    for (i, x) in d.rows().enumerate() {
        let z = m.prepare(x)?;
        if !m.spheres().iter().any(|s| s.contains(&z)) {
            out.insert(i);
        }
    }
    Ok(out)
}

/// Positions in `d` the model assigns a wrong class.
pub fn misclassified_cases(m: &SphereCoverModel, d: &Dataset) -> Result<BTreeSet<usize>> {
    if !m.is_usable() {
        return Err(Error::UnusableModel);
    }
    let mut out = BTreeSet::new();
    for (i, x) in d.rows().enumerate() {
        if m.classify(x)? != d.label(i) {
            out.insert(i);
        }
    }
    Ok(out)
}

/// What happened at one step of the border-resampling ensemble.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResampleStep {
    /// The working training set `D_j`, as indices into the full training set.
    pub training_set: Vec<usize>,
    /// Border cases (positions in `D_j`).
    pub border: BTreeSet<usize>,
    /// Uncovered cases (positions in `D_j`).
    pub uncovered: BTreeSet<usize>,
    /// Misclassified cases (indices into the full training set).
    pub misclassified: BTreeSet<usize>,
    /// Indices (full training set) drawn to replace the border cases.
    pub draws: Vec<usize>,
}

/// Border-resampling ensemble.
pub fn build_abrse(train: &Dataset, alpha: usize, l: usize, seed: u64) -> Result<EnsembleModel> {
    build_abrse_traced(train, alpha, l, seed).map(|(m, _)| m)
}

/// [`build_abrse`], also returning the per-member resampling record.
pub fn build_abrse_traced(
    train: &Dataset,
    alpha: usize,
    l: usize,
    seed: u64,
) -> Result<(EnsembleModel, Vec<ResampleStep>)> {
    check_members(l)?;
    if train.is_empty() {
        return Err(Error::Empty("cannot build an ensemble on no data".into()));
    }
    let mut current: Vec<usize> = (0..train.n_instances()).collect();
    let mut members = Vec::with_capacity(l);
    let mut steps = Vec::with_capacity(l);
    for j in 0..l {
        let dj = train.subset(&current);
        let member = usable(build_rsc(&dj, alpha, member_seed(seed, j))?)?;
        let mut step = ResampleStep {
            training_set: current.clone(),
            border: BTreeSet::new(),
            uncovered: BTreeSet::new(),
            misclassified: BTreeSet::new(),
            draws: Vec::new(),
        };
        if j + 1 < l {
            step.border = border_cases(&member, &dj);
            step.uncovered = uncovered_cases(&member, &dj)?;
            step.misclassified = misclassified_cases(&member, train)?;
            // H = E + F + G, a multiset of full-set indices.
            let pool: Vec<usize> = step
                .border
                .iter()
                .chain(&step.uncovered)
                .map(|&p| current[p])
                .chain(step.misclassified.iter().copied())
                .collect();
            let mut r = rng::stream(seed, "resample", j as u64);
            step.draws = (0..step.border.len())
                .map(|_| pool[r.gen_range(0..pool.len())])
                .collect();
            let mut next: Vec<usize> = current
                .iter()
                .enumerate()
                .filter(|(p, _)| !step.border.contains(p))
                .map(|(_, &i)| i)
                .collect();
            next.extend_from_slice(&step.draws);
            current = next;
        }
        members.push(member);
        steps.push(step);
    }
    Ok((
        EnsembleModel {
            scheme: Scheme::Abrse,
            alpha,
            kappa: None,
            master_seed: seed,
            members,
            classes: train.classes().to_vec(),
        },
        steps,
    ))
}

/// Random subspace ensemble: each member sees `kappa` attributes.
pub fn build_arsse(
    train: &Dataset,
    alpha: usize,
    kappa: usize,
    l: usize,
    seed: u64,
) -> Result<EnsembleModel> {
    check_members(l)?;
    let m = train.n_attributes();
    if kappa == 0 || kappa > m {
        return Err(Error::invalid(format!(
            "kappa = {kappa} outside 1..={m} attributes"
        )));
    }
    let members = (0..l)
        .into_par_iter()
        .map(|j| {
            let mut r = rng::stream(seed, "subspace", j as u64);
            let mut subset = index::sample(&mut r, m, kappa).into_vec();
            subset.sort_unstable();
            let projected = train.project(&subset)?;
            let member = usable(build_rsc(&projected, alpha, member_seed(seed, j))?)?;
            Ok(member.with_attribute_subset(subset, m))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EnsembleModel {
        scheme: Scheme::Arsse,
        alpha,
        kappa: Some(kappa),
        master_seed: seed,
        members,
        classes: train.classes().to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{gen_synthetic, normalize, Family, SyntheticSpec};

    fn ds(rows: &[&[f64]], labels: &[&str]) -> Dataset {
        let m = rows[0].len();
        Dataset::from_labeled(
            (0..m).map(|j| format!("a{j}")).collect(),
            rows.iter().map(|r| r.to_vec()).collect(),
            labels,
        )
        .unwrap()
    }

    fn twonorm(n: usize, seed: u64) -> Dataset {
        let d = gen_synthetic(&SyntheticSpec::new(Family::Twonorm, seed), n).unwrap();
        normalize(&d).unwrap().0
    }

    #[test]
    fn single_member_matches_base() {
        let d = twonorm(60, 1);
        let e = build_arse(&d, 1, 1, 5).unwrap();
        let base = build_rsc(&d, 1, member_seed(5, 0)).unwrap();
        for (i, x) in d.rows().enumerate() {
            assert_eq!(e.predict(x, i as u64).unwrap().0, base.classify(x).unwrap());
        }
    }

    #[test]
    fn members_differ_and_builds_replay() {
        let d = twonorm(50, 2);
        let e = build_arse(&d, 1, 2, 11).unwrap();
        assert_ne!(e.members()[0].spheres(), e.members()[1].spheres());
        assert_eq!(e, build_arse(&d, 1, 2, 11).unwrap());
    }

    #[test]
    fn two_point_border_cases() {
        let d = ds(&[&[0.0], &[1.0]], &["A", "B"]);
        let m = build_rsc(&d, 1, 0).unwrap();
        assert_eq!(border_cases(&m, &d), BTreeSet::from([0, 1]));
        // removing instance 1 from d drops it from the result
        assert_eq!(border_cases(&m, &d.subset(&[0])), BTreeSet::from([0]));
        let single = ds(&[&[0.0], &[1.0]], &["A", "A"]);
        assert!(border_cases(&build_rsc(&single, 1, 0).unwrap(), &single).is_empty());
    }

    #[test]
    fn uncovered_cases_examples() {
        let d = ds(&[&[0.0], &[0.1], &[0.9], &[1.0]], &["A", "A", "B", "B"]);
        assert!(uncovered_cases(&build_rsc(&d, 1, 3).unwrap(), &d).unwrap().is_empty());
        let none = build_rsc(&d, 5, 3).unwrap();
        assert_eq!(uncovered_cases(&none, &d).unwrap(), (0..4).collect());

        // Four A's clustered near 0, one B outlier at 1: the outlier's
        // sphere holds only itself and fails alpha = 2.
        let d = ds(
            &[&[0.0], &[0.05], &[0.1], &[0.15], &[1.0]],
            &["A", "A", "A", "A", "B"],
        );
        for seed in 0..10 {
            let m = build_rsc(&d, 2, seed).unwrap();
            assert_eq!(uncovered_cases(&m, &d).unwrap(), BTreeSet::from([4]));
        }
    }

    #[test]
    fn misclassified_examples() {
        let d = twonorm(80, 3);
        let m = build_rsc(&d, 1, 0).unwrap();
        assert!(misclassified_cases(&m, &d).unwrap().is_empty());
        let none = build_rsc(&d, 1000, 0).unwrap();
        assert!(misclassified_cases(&none, &d).is_err());

        // XOR model against points shifted towards the boundary; the
        // expected set comes from evaluating Rules 1/2 point by point.
        let xor = ds(
            &[&[0.0, 0.0], &[1.0, 1.0], &[0.0, 1.0], &[1.0, 0.0]],
            &["A", "A", "B", "B"],
        );
        let m = build_rsc(&xor, 1, 7).unwrap();
        let shifted = ds(
            &[&[0.1, 0.1], &[0.4, 0.45], &[0.45, 0.4], &[0.55, 0.55]],
            &["B", "A", "A", "B"],
        );
        let expected: BTreeSet<usize> = (0..4)
            .filter(|&i| {
                let x = shifted.row(i);
                // brute force: nearest covering centre, else nearest edge
                let mut best: Option<(f64, usize, bool)> = None;
                for s in m.spheres() {
                    let dd = crate::rsc::distance(x, &s.center).unwrap();
                    let cand = if dd < s.radius { (dd, s.label, true) } else { (dd - s.radius, s.label, false) };
                    best = match best {
                        None => Some(cand),
                        Some(b) if cand.2 && !b.2 => Some(cand),
                        Some(b) if cand.2 == b.2 && cand.0 < b.0 => Some(cand),
                        Some(b) => Some(b),
                    };
                }
                best.unwrap().1 != shifted.label(i)
            })
            .collect();
        let got = misclassified_cases(&m, &shifted).unwrap();
        assert_eq!(got, expected);
        assert!(!got.is_empty());
    }

    #[test]
    fn abrse_single_member_is_base() {
        let d = twonorm(40, 4);
        let (e, steps) = build_abrse_traced(&d, 1, 1, 9).unwrap();
        assert_eq!(steps[0].training_set, (0..40).collect::<Vec<_>>());
        assert_eq!(e.members()[0], build_rsc(&d, 1, member_seed(9, 0)).unwrap());
    }

    #[test]
    fn abrse_single_class_keeps_training_set() {
        let d = ds(&[&[0.0], &[0.3], &[0.6], &[1.0]], &["A"; 4]);
        let (_, steps) = build_abrse_traced(&d, 1, 5, 2).unwrap();
        for s in &steps {
            assert_eq!(s.training_set, vec![0, 1, 2, 3]);
            assert!(s.border.is_empty());
        }
    }

    #[test]
    fn abrse_multiset_algebra() {
        let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64 / 9.0, ((i * 7) % 10) as f64 / 9.0]).collect();
        let labels = ["A", "B", "A", "A", "B", "B", "A", "B", "A", "B"];
        let d = Dataset::from_labeled(vec!["a".into(), "b".into()], rows, &labels).unwrap();
        let (_, steps) = build_abrse_traced(&d, 1, 3, 21).unwrap();
        for w in steps.windows(2) {
            let (prev, next) = (&w[0], &w[1]);
            assert_eq!(next.training_set.len(), 10);
            // D_{j+1} = (D_j minus border positions) followed by the draws.
            let kept: Vec<usize> = prev
                .training_set
                .iter()
                .enumerate()
                .filter(|(p, _)| !prev.border.contains(p))
                .map(|(_, &i)| i)
                .collect();
            assert_eq!(next.training_set[..kept.len()], kept[..]);
            assert_eq!(next.training_set[kept.len()..], prev.draws[..]);
            let h: BTreeSet<usize> = prev
                .border
                .iter()
                .chain(&prev.uncovered)
                .map(|&p| prev.training_set[p])
                .chain(prev.misclassified.iter().copied())
                .collect();
            assert!(prev.draws.iter().all(|i| h.contains(i)));
        }
    }

    #[test]
    fn arsse_subsets() {
        let d = ds(&[&[0.0, 0.0, 0.0], &[1.0, 1.0, 1.0], &[0.2, 0.9, 0.4]], &["A", "B", "A"]);
        let e = build_arsse(&d, 1, 3, 4, 1).unwrap();
        assert!(e.members().iter().all(|m| m.attribute_subset() == [0, 1, 2]));
        assert!(build_arsse(&d, 1, 0, 4, 1).is_err());
        assert!(build_arsse(&d, 1, 4, 4, 1).is_err());
    }

    #[test]
    fn arsse_single_attribute_frequencies() {
        let d = ds(&[&[0.0, 0.0, 0.0], &[1.0, 1.0, 1.0], &[0.2, 0.9, 0.4], &[0.8, 0.1, 0.7]], &["A", "B", "A", "B"]);
        let e = build_arsse(&d, 0, 1, 300, 17).unwrap();
        let mut counts = [0usize; 3];
        for m in e.members() {
            assert_eq!(m.attribute_subset().len(), 1);
            counts[m.attribute_subset()[0]] += 1;
        }
        assert!(counts.iter().all(|&c| (70..=130).contains(&c)), "{counts:?}");
    }

    #[test]
    fn arsse_ignores_unselected_attributes() {
        let d = twonorm(60, 5);
        let e = build_arsse(&d, 1, 5, 7, 3).unwrap();
        let x = d.row(0).to_vec();
        for m in e.members() {
            let mut y = x.clone();
            for (a, v) in y.iter_mut().enumerate() {
                if !m.attribute_subset().contains(&a) {
                    *v += 3.0;
                }
            }
            assert_eq!(m.classify(&x).unwrap(), m.classify(&y).unwrap());
        }
    }

    #[test]
    fn vote_examples() {
        let t = tally_votes(&[0, 0, 0, 1, 1], 2, 1);
        assert_eq!((t.winner, t.tie_broken), (0, false));
        for seed in 0..20 {
            let t = tally_votes(&[1, 1, 1], 2, seed);
            assert_eq!((t.winner, t.tie_broken), (1, false));
        }
        let a_wins = (0..10_000u64)
            .filter(|&s| {
                let t = tally_votes(&[0, 0, 1, 1], 2, s);
                assert!(t.tie_broken);
                t.winner == 0
            })
            .count();
        assert!((4850..=5150).contains(&a_wins), "{a_wins}");
    }

    #[test]
    fn zero_members_rejected() {
        let d = twonorm(10, 1);
        assert!(build_arse(&d, 1, 0, 1).is_err());
        assert!(build_abrse(&d, 1, 0, 1).is_err());
    }
}
