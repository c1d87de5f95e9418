//! Accuracy, cross-validation, parameter selection and the bias/variance
//! decomposition of 0/1 loss.
//!
//! Every model is fitted through [`ModelSpec::fit`]: the training data is
//! min-max normalised, optionally reduced to the `k` best attributes of a
//! filter fitted on the normalised training data, and then handed to the
//! chosen builder. The resulting [`TrainedModel`] takes raw input vectors.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{self, Dataset};
use crate::ensemble::{self, EnsembleModel, VoteTally};
use crate::error::{Error, Result};
use crate::filters::{self, FilterMethod, DEFAULT_BINS, DEFAULT_RELIEF_SAMPLES};
use crate::rng::derive_seed;
use crate::rsc::{build_rsc, SphereCoverModel};

/// What to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelScheme {
    /// A single sphere cover.
    Rsc,
    Arse,
    Abrse,
    Arsse,
    /// Constant predictor of the most frequent training class.
    Majority,
}

impl ModelScheme {
    pub fn is_ensemble(self) -> bool {
        matches!(self, ModelScheme::Arse | ModelScheme::Abrse | ModelScheme::Arsse)
    }
}

impl fmt::Display for ModelScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelScheme::Rsc => "rsc",
            ModelScheme::Arse => "arse",
            ModelScheme::Abrse => "abrse",
            ModelScheme::Arsse => "arsse",
            ModelScheme::Majority => "majority",
        })
    }
}

impl FromStr for ModelScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rsc" => Ok(ModelScheme::Rsc),
            "arse" => Ok(ModelScheme::Arse),
            "abrse" => Ok(ModelScheme::Abrse),
            "arsse" => Ok(ModelScheme::Arsse),
            "majority" => Ok(ModelScheme::Majority),
            other => Err(Error::invalid(format!("unknown scheme '{other}'"))),
        }
    }
}

/// Attribute filter applied before building.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterSpec {
    pub method: FilterMethod,
    /// Attributes kept, best first.
    pub k: usize,
    #[serde(default = "default_bins")]
    pub bins: usize,
    #[serde(default = "default_relief_samples")]
    pub relief_samples: usize,
}

fn default_bins() -> usize {
    DEFAULT_BINS
}

fn default_relief_samples() -> usize {
    DEFAULT_RELIEF_SAMPLES
}

impl FilterSpec {
    pub fn new(method: FilterMethod, k: usize) -> Self {
        FilterSpec {
            method,
            k,
            bins: DEFAULT_BINS,
            relief_samples: DEFAULT_RELIEF_SAMPLES,
        }
    }
}

/// A fully parameterised model family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub scheme: ModelScheme,
    #[serde(default)]
    pub alpha: usize,
    #[serde(default)]
    pub kappa: Option<usize>,
    /// Ensemble size `L`; ignored for single models.
    #[serde(default = "default_members")]
    pub members: usize,
    #[serde(default)]
    pub filter: Option<FilterSpec>,
}

fn default_members() -> usize {
    25
}

impl ModelSpec {
    pub fn rsc(alpha: usize) -> Self {
        ModelSpec {
            scheme: ModelScheme::Rsc,
            alpha,
            kappa: None,
            members: 1,
            filter: None,
        }
    }

    pub fn arse(alpha: usize, members: usize) -> Self {
        ModelSpec {
            scheme: ModelScheme::Arse,
            members,
            ..ModelSpec::rsc(alpha)
        }
    }

    pub fn abrse(alpha: usize, members: usize) -> Self {
        ModelSpec {
            scheme: ModelScheme::Abrse,
            members,
            ..ModelSpec::rsc(alpha)
        }
    }

    pub fn arsse(alpha: usize, kappa: usize, members: usize) -> Self {
        ModelSpec {
            scheme: ModelScheme::Arsse,
            kappa: Some(kappa),
            members,
            ..ModelSpec::rsc(alpha)
        }
    }

    pub fn majority() -> Self {
        ModelSpec {
            scheme: ModelScheme::Majority,
            ..ModelSpec::rsc(0)
        }
    }

    pub fn with_filter(mut self, filter: FilterSpec) -> Self {
        self.filter = Some(filter);
        self
    }

    /// Checks the parameters that do not depend on the data.
    pub fn validate(&self) -> Result<()> {
        match (self.scheme, self.kappa) {
            (ModelScheme::Arsse, None) => return Err(Error::invalid("arsse needs kappa")),
            (ModelScheme::Arsse, Some(0)) => return Err(Error::invalid("kappa must be at least 1")),
            (ModelScheme::Arsse, Some(_)) => {}
            (s, Some(_)) => return Err(Error::invalid(format!("kappa given for {s}"))),
            (_, None) => {}
        }
        if self.scheme.is_ensemble() && self.members == 0 {
            return Err(Error::invalid("an ensemble needs at least one member"));
        }
        if let Some(f) = &self.filter {
            if f.k == 0 {
                return Err(Error::invalid("filter must keep at least one attribute"));
            }
            if f.bins == 0 && f.method != FilterMethod::Relief {
                return Err(Error::invalid("filter needs at least one bin"));
            }
        }
        Ok(())
    }

    /// Short human-readable name, e.g. `arsse(a=2,k=10,L=25)`.
    pub fn label(&self) -> String {
        let mut s = match self.scheme {
            ModelScheme::Majority => "majority".to_string(),
            ModelScheme::Rsc => format!("rsc(a={})", self.alpha),
            ModelScheme::Arsse => format!(
                "arsse(a={},k={},L={})",
                self.alpha,
                self.kappa.unwrap_or(0),
                self.members
            ),
            s => format!("{s}(a={},L={})", self.alpha, self.members),
        };
        if let Some(f) = &self.filter {
            s.push_str(&format!("+{}(k={})", f.method, f.k));
        }
        s
    }

    /// Normalises `train`, applies the filter and builds the model.
    ///
    /// A sphere cover without spheres is reported as
    /// [`Error::UnusableModel`].
    pub fn fit(&self, train: &Dataset, seed: u64) -> Result<TrainedModel> {
        self.validate()?;
        if train.is_empty() {
            return Err(Error::Empty("training set has no instances".into()));
        }
        let m = train.n_attributes();
        let attributes = train.attributes().to_vec();
        let classes = train.classes().to_vec();
        if self.scheme == ModelScheme::Majority {
            return Ok(TrainedModel {
                attributes,
                classes,
                kind: ModelKind::Majority {
                    label: majority_label(train),
                },
            });
        }
        let (normed, stats) = data::normalize(train)?;
        let (work, subset_map) = match &self.filter {
            None => (normed, (0..m).collect::<Vec<_>>()),
            Some(f) => {
                if f.k > m {
                    return Err(Error::invalid(format!(
                        "filter keeps {} of {m} attributes",
                        f.k
                    )));
                }
                let scores = filters::score(
                    &normed,
                    f.method,
                    f.bins,
                    f.relief_samples,
                    derive_seed(seed, "relief", 0),
                )?;
                let keep = filters::select_top_k(&scores, f.k)?;
                (normed.project(&keep)?, keep)
            }
        };
        let norm = Some(stats);
        let kind = match self.scheme {
            ModelScheme::Rsc => {
                let model = build_rsc(&work, self.alpha, seed)?;
                if !model.is_usable() {
                    return Err(Error::UnusableModel);
                }
                ModelKind::Single(model.rebase(&subset_map, m, norm))
            }
            ModelScheme::Arse => ModelKind::Ensemble(
                ensemble::build_arse(&work, self.alpha, self.members, seed)?.rebase(&subset_map, m, norm),
            ),
            ModelScheme::Abrse => ModelKind::Ensemble(
                ensemble::build_abrse(&work, self.alpha, self.members, seed)?.rebase(&subset_map, m, norm),
            ),
            ModelScheme::Arsse => {
                let kappa = self.kappa.unwrap_or(0);
                ModelKind::Ensemble(
                    ensemble::build_arsse(&work, self.alpha, kappa, self.members, seed)?
                        .rebase(&subset_map, m, norm),
                )
            }
            ModelScheme::Majority => unreachable!(),
        };
        Ok(TrainedModel {
            attributes,
            classes,
            kind,
        })
    }
}

/// Most frequent class, ties to the lower index.
fn majority_label(d: &Dataset) -> usize {
    let counts = d.class_counts();
    let best = counts.iter().copied().max().unwrap_or(0);
    counts.iter().position(|&c| c == best).unwrap_or(0)
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelKind {
    Single(SphereCoverModel),
    Ensemble(EnsembleModel),
    Majority { label: usize },
}

/// A fitted model over the raw attributes it was trained on.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub attributes: Vec<String>,
    pub classes: Vec<String>,
    pub kind: ModelKind,
}

/// One prediction; ensembles also report their vote counts.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub label: usize,
    pub tally: Option<VoteTally>,
}

impl TrainedModel {
    pub fn input_dim(&self) -> usize {
        self.attributes.len()
    }

    /// Predicts the class index of raw vector `x`; `query_index` seeds the
    /// ensemble tie-break.
    pub fn predict(&self, x: &[f64], query_index: u64) -> Result<Prediction> {
        if x.len() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                found: x.len(),
            });
        }
        Ok(match &self.kind {
            ModelKind::Single(m) => Prediction {
                label: m.classify(x)?,
                tally: None,
            },
            ModelKind::Ensemble(e) => {
                let (label, tally) = e.predict(x, query_index)?;
                Prediction {
                    label,
                    tally: Some(tally),
                }
            }
            ModelKind::Majority { label } => Prediction {
                label: *label,
                tally: None,
            },
        })
    }

    /// Fails unless `attributes` matches the training schema exactly.
    pub fn check_schema(&self, attributes: &[String]) -> Result<()> {
        if attributes != self.attributes.as_slice() {
            return Err(Error::SchemaMismatch(format!(
                "model expects attributes [{}], data has [{}]",
                self.attributes.join(", "),
                attributes.join(", ")
            )));
        }
        Ok(())
    }

    /// Fraction of `test` whose class name is predicted.
    pub fn accuracy(&self, test: &Dataset) -> Result<f64> {
        self.check_schema(test.attributes())?;
        if test.is_empty() {
            return Err(Error::Empty("test set has no instances".into()));
        }
        let correct = (0..test.n_instances())
            .into_par_iter()
            .map(|i| {
                let p = self.predict(test.row(i), i as u64)?;
                Ok(usize::from(self.classes[p.label] == test.class_name(test.label(i))))
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .sum::<usize>();
        Ok(correct as f64 / test.n_instances() as f64)
    }
}

/// Fits and scores; `None` when the model is left without spheres.
fn fit_and_score(spec: &ModelSpec, train: &Dataset, test: &Dataset, seed: u64) -> Result<Option<f64>> {
    if train.attributes() != test.attributes() {
        return Err(Error::SchemaMismatch(
            "training and test attributes differ".into(),
        ));
    }
    if test.is_empty() {
        return Err(Error::Empty("test set has no instances".into()));
    }
    match spec.fit(train, seed) {
        Ok(model) => model.accuracy(test).map(Some),
        Err(Error::UnusableModel) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Fits `spec` on `train` and scores it on `test`. A model left without
/// spheres scores 0.
pub fn evaluate_accuracy(spec: &ModelSpec, train: &Dataset, test: &Dataset, seed: u64) -> Result<f64> {
    let acc = fit_and_score(spec, train, test, seed)?;
    if acc.is_none() {
        log::warn!("{} left no spheres; scoring it as all wrong", spec.label());
    }
    Ok(acc.unwrap_or(0.0))
}

/// Accuracy of each fold of a stratified `k`-fold cross-validation.
pub fn cross_validate_folds(d: &Dataset, spec: &ModelSpec, k: usize, seed: u64) -> Result<Vec<f64>> {
    let folds = data::cv_folds(d, k, seed)?;
    let acc = (0..k)
        .into_par_iter()
        .map(|f| {
            let (tr, te) = folds.train_test(f);
            fit_and_score(spec, &d.subset(&tr), &d.subset(&te), derive_seed(seed, "cv-fit", f as u64))
        })
        .collect::<Result<Vec<_>>>()?;
    let unusable = acc.iter().filter(|a| a.is_none()).count();
    if unusable > 0 {
        log::warn!(
            "{} left no spheres in {unusable} of {k} folds; those folds score 0",
            spec.label()
        );
    }
    Ok(acc.into_iter().map(|a| a.unwrap_or(0.0)).collect())
}

/// Mean fold accuracy of a stratified `k`-fold cross-validation.
pub fn cross_validate(d: &Dataset, spec: &ModelSpec, k: usize, seed: u64) -> Result<f64> {
    let acc = cross_validate_folds(d, spec, k, seed)?;
    Ok(acc.iter().sum::<f64>() / acc.len() as f64)
}

/// Outcome of a grid search: the winner and the score of every candidate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Selection {
    pub best: usize,
    pub curve: Vec<(usize, f64)>,
}

fn fold_count(n: usize, cv_k: usize) -> Result<usize> {
    if n < 2 {
        return Err(Error::invalid(format!("cannot cross-validate {n} instances")));
    }
    Ok(cv_k.clamp(2, n))
}

/// Scores every grid value by cross-validation (same folds for all) and
/// keeps the best, ties to the smallest value.
fn grid_search(
    d: &Dataset,
    grid: &[usize],
    cv_k: usize,
    seed: u64,
    spec_for: impl Fn(usize) -> ModelSpec,
) -> Result<Selection> {
    if grid.is_empty() {
        return Err(Error::invalid("empty parameter grid"));
    }
    let k = fold_count(d.n_instances(), cv_k)?;
    let mut values = grid.to_vec();
    values.sort_unstable();
    values.dedup();
    let mut curve = Vec::with_capacity(values.len());
    for v in values {
        curve.push((v, cross_validate(d, &spec_for(v), k, seed)?));
    }
    let mut best = curve[0];
    for &c in &curve[1..] {
        if c.1 > best.1 {
            best = c;
        }
    }
    Ok(Selection { best: best.0, curve })
}

/// Picks `alpha` for a single sphere cover by cross-validation on `train`.
pub fn select_alpha(train: &Dataset, alpha_grid: &[usize], cv_k: usize, seed: u64) -> Result<Selection> {
    select_alpha_with(train, alpha_grid, None, cv_k, seed)
}

/// [`select_alpha`] with an attribute filter in front of the sphere cover.
pub fn select_alpha_with(
    train: &Dataset,
    alpha_grid: &[usize],
    filter: Option<FilterSpec>,
    cv_k: usize,
    seed: u64,
) -> Result<Selection> {
    grid_search(train, alpha_grid, cv_k, seed, |a| ModelSpec {
        filter,
        ..ModelSpec::rsc(a)
    })
}

/// Result of the two-stage subspace parameter search.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KappaAlphaSelection {
    pub kappa: Selection,
    pub alpha: Selection,
}

/// Chooses `kappa` then `alpha` for a random subspace ensemble by
/// cross-validation on a stratified third of `train`. `kappa` is searched
/// with `alpha` at the lower median of its grid.
pub fn select_kappa_alpha(
    train: &Dataset,
    kappa_grid: &[usize],
    alpha_grid: &[usize],
    members: usize,
    cv_k: usize,
    seed: u64,
) -> Result<KappaAlphaSelection> {
    select_kappa_alpha_with(train, kappa_grid, alpha_grid, members, None, cv_k, seed)
}

/// [`select_kappa_alpha`] with an attribute filter in front of the ensemble.
pub fn select_kappa_alpha_with(
    train: &Dataset,
    kappa_grid: &[usize],
    alpha_grid: &[usize],
    members: usize,
    filter: Option<FilterSpec>,
    cv_k: usize,
    seed: u64,
) -> Result<KappaAlphaSelection> {
    if kappa_grid.is_empty() || alpha_grid.is_empty() {
        return Err(Error::invalid("empty parameter grid"));
    }
    let (_, third) = data::split_indices(train, 1.0 / 3.0, derive_seed(seed, "subsample", 0))?;
    let sub = train.subset(&third);
    let mut alphas = alpha_grid.to_vec();
    alphas.sort_unstable();
    alphas.dedup();
    let alpha_mid = alphas[(alphas.len() - 1) / 2];
    let spec = |alpha: usize, kappa: usize| ModelSpec {
        filter,
        ..ModelSpec::arsse(alpha, kappa, members)
    };
    let kappa = grid_search(&sub, kappa_grid, cv_k, seed, |k| spec(alpha_mid, k))?;
    let alpha = grid_search(&sub, &alphas, cv_k, seed, |a| spec(a, kappa.best))?;
    Ok(KappaAlphaSelection { kappa, alpha })
}

/// Anything that can be fitted to a training set, for the decomposition.
pub trait Learner: Sync {
    type Model: Classifier + Send;
    fn fit(&self, train: &Dataset, seed: u64) -> Result<Self::Model>;
}

/// A fitted model returning class indices of its training domain.
pub trait Classifier: Sync {
    fn classify(&self, x: &[f64], query_index: u64) -> Result<usize>;
}

impl Learner for ModelSpec {
    type Model = TrainedModel;

    fn fit(&self, train: &Dataset, seed: u64) -> Result<TrainedModel> {
        ModelSpec::fit(self, train, seed)
    }
}

impl Classifier for TrainedModel {
    fn classify(&self, x: &[f64], query_index: u64) -> Result<usize> {
        Ok(self.predict(x, query_index)?.label)
    }
}

/// Decomposition terms of one test point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BvInstanceStats<L> {
    /// Modal prediction, ties to the smallest label.
    pub main_prediction: L,
    /// 0/1 loss of the main prediction.
    pub bias: u8,
    /// Fraction of predictions differing from the main prediction.
    pub variance: f64,
    /// +1 when the main prediction is correct, -1 otherwise.
    pub c2: i8,
    /// Fraction of predictions differing from the true label.
    pub per_set_loss: f64,
}

pub fn bv_point_stats<L: Ord + Clone>(predictions: &[L], y: &L) -> Result<BvInstanceStats<L>> {
    if predictions.is_empty() {
        return Err(Error::Empty("no predictions".into()));
    }
    let mut sorted: Vec<&L> = predictions.iter().collect();
    sorted.sort();
    let mut main = sorted[0];
    let mut best = 0;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        if j - i > best {
            best = j - i;
            main = sorted[i];
        }
        i = j;
    }
    let s = predictions.len() as f64;
    let deviating = predictions.iter().filter(|p| *p != main).count();
    let wrong = predictions.iter().filter(|p| *p != y).count();
    let bias = u8::from(main != y);
    Ok(BvInstanceStats {
        main_prediction: main.clone(),
        bias,
        variance: deviating as f64 / s,
        c2: if bias == 0 { 1 } else { -1 },
        per_set_loss: wrong as f64 / s,
    })
}

/// Averages of the decomposition over a test set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BvReport<L = usize> {
    /// `bias + net_var`.
    pub average_error: f64,
    /// Mean loss of the individual predictions; equals `average_error`
    /// whenever every point has at most two distinct predicted or true
    /// labels.
    pub observed_error: f64,
    pub bias: f64,
    pub net_var: f64,
    pub var_unbiased: f64,
    pub var_biased: f64,
    pub s: usize,
    pub points: Vec<BvInstanceStats<L>>,
}

/// Aggregates per-point statistics: unbiased and biased variance are summed
/// over the points with bias 0 and 1 respectively, then divided by the total
/// number of points.
pub fn bv_aggregate<L>(points: Vec<BvInstanceStats<L>>, s: usize) -> Result<BvReport<L>> {
    if points.is_empty() {
        return Err(Error::Empty("no test points".into()));
    }
    let n = points.len() as f64;
    let mut bias = 0.0;
    let mut vu = 0.0;
    let mut vb = 0.0;
    let mut loss = 0.0;
    for p in &points {
        bias += f64::from(p.bias);
        if p.bias == 0 {
            vu += p.variance;
        } else {
            vb += p.variance;
        }
        loss += p.per_set_loss;
    }
    let bias = bias / n;
    let var_unbiased = vu / n;
    let var_biased = vb / n;
    let net_var = var_unbiased - var_biased;
    Ok(BvReport {
        average_error: bias + net_var,
        observed_error: loss / n,
        bias,
        net_var,
        var_unbiased,
        var_biased,
        s,
        points,
    })
}

/// Predictions of all `s` models on each test point: `out[i][r]`.
pub fn bv_predictions<M: Learner>(
    pool: &Dataset,
    test: &Dataset,
    learner: &M,
    s: usize,
    boot_size: usize,
    seed: u64,
) -> Result<Vec<Vec<usize>>> {
    let per_model = (0..s)
        .into_par_iter()
        .map(|r| {
            let r = r as u64;
            let idx = data::bootstrap_indices(pool.n_instances(), boot_size, derive_seed(seed, "bv-boot", r))?;
            let train = pool.subset(&idx);
            match learner.fit(&train, derive_seed(seed, "bv-fit", r)) {
                Ok(model) => (0..test.n_instances())
                    .map(|i| model.classify(test.row(i), i as u64))
                    .collect::<Result<Vec<_>>>(),
                Err(Error::UnusableModel) => {
                    log::warn!("replicate {r} left no spheres; scoring it as all wrong");
                    Ok(vec![usize::MAX; test.n_instances()])
                }
                Err(e) => Err(e),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((0..test.n_instances())
        .map(|i| per_model.iter().map(|p| p[i]).collect())
        .collect())
}

/// Bias/variance decomposition: a `test_fraction` of `d` is held out, `s`
/// models are fitted on bootstrap samples of size `boot_size` drawn from
/// the rest, and their predictions on the held-out points are decomposed.
pub fn bv_decompose<M: Learner>(
    d: &Dataset,
    learner: &M,
    s: usize,
    boot_size: usize,
    test_fraction: f64,
    seed: u64,
) -> Result<BvReport> {
    if s < 2 {
        return Err(Error::invalid(format!("need at least 2 training sets, got {s}")));
    }
    if boot_size == 0 {
        return Err(Error::invalid("bootstrap size must be positive"));
    }
    let (pool, test) = data::split(d, test_fraction, seed)?;
    if test.is_empty() || pool.is_empty() {
        return Err(Error::Empty("split left an empty training pool or test set".into()));
    }
    let preds = bv_predictions(&pool, &test, learner, s, boot_size, seed)?;
    let points = preds
        .iter()
        .enumerate()
        .map(|(i, p)| bv_point_stats(p, &test.label(i)))
        .collect::<Result<Vec<_>>>()?;
    bv_aggregate(points, s)
}

pub const BV_DEFAULT_S: usize = 200;
pub const BV_DEFAULT_BOOT_SIZE: usize = 200;
pub const BV_DEFAULT_TEST_FRACTION: f64 = 1.0 / 3.0;

pub const BV_CSV_HEADER: &str = "model,avg_error,bias,net_var,var_unbiased,var_biased";

/// One CSV row per named report.
pub fn write_bv_csv<W: Write, L>(reports: &[(String, BvReport<L>)], mut w: W) -> std::io::Result<()> {
    writeln!(w, "{BV_CSV_HEADER}")?;
    for (name, r) in reports {
        writeln!(
            w,
            "{name},{},{},{},{},{}",
            r.average_error, r.bias, r.net_var, r.var_unbiased, r.var_biased
        )?;
    }
    Ok(())
}

/// Per-run accuracies with their mean and sample standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub mean: f64,
    pub sd: f64,
    pub runs: usize,
}

pub fn summarize(acc: &[f64]) -> RunSummary {
    let n = acc.len();
    let mean = if n == 0 { f64::NAN } else { acc.iter().sum::<f64>() / n as f64 };
    let sd = if n < 2 {
        0.0
    } else {
        (acc.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    };
    RunSummary { mean, sd, runs: n }
}
