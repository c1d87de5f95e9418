//! Datasets: CSV ingestion, min-max normalisation, stratified splitting,
//! cross-validation folds, bootstrap resampling and the synthetic twonorm
//! and ringnorm generators.
//!
//! A [`Dataset`] is an ordered multiset of real-valued instances with a class
//! label each. Labels are stored as indices into a lexicographically sorted
//! class domain, so label order and string order coincide. Subsets produced
//! by splitting or resampling keep the parent's class domain.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// Labeled, real-valued instances with attribute metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    attributes: Vec<String>,
    classes: Vec<String>,
    values: Vec<f64>,
    labels: Vec<usize>,
}

impl Dataset {
    /// Builds a dataset from rows and label indices into `classes`.
    ///
    /// `classes` must be strictly increasing (sorted, no duplicates).
    pub fn new(
        attributes: Vec<String>,
        classes: Vec<String>,
        rows: Vec<Vec<f64>>,
        labels: Vec<usize>,
    ) -> Result<Self> {
        if rows.len() != labels.len() {
            return Err(Error::invalid(format!(
                "{} rows but {} labels",
                rows.len(),
                labels.len()
            )));
        }
        if classes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("class domain must be sorted and distinct"));
        }
        let m = attributes.len();
        let mut values = Vec::with_capacity(rows.len() * m);
        for row in &rows {
            if row.len() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    found: row.len(),
                });
            }
            values.extend_from_slice(row);
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= classes.len()) {
            return Err(Error::invalid(format!("label index {bad} outside class domain")));
        }
        Ok(Dataset {
            attributes,
            classes,
            values,
            labels,
        })
    }

    /// Builds a dataset from rows and string labels; the class domain is the
    /// sorted set of distinct labels.
    pub fn from_labeled<S: AsRef<str>>(
        attributes: Vec<String>,
        rows: Vec<Vec<f64>>,
        labels: &[S],
    ) -> Result<Self> {
        let classes: Vec<String> = labels
            .iter()
            .map(|s| s.as_ref().to_string())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let idx = labels
            .iter()
            .map(|s| classes.binary_search_by(|c| c.as_str().cmp(s.as_ref())).unwrap())
            .collect();
        Dataset::new(attributes, classes, rows, idx)
    }

    pub fn attributes(&self) -> &[String] {
        &self.attributes
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn n_instances(&self) -> usize {
        self.labels.len()
    }

    pub fn n_attributes(&self) -> usize {
        self.attributes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let m = self.attributes.len();
        &self.values[i * m..(i + 1) * m]
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn class_name(&self, label: usize) -> &str {
        &self.classes[label]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        (0..self.n_instances()).map(move |i| self.row(i))
    }

    /// Instance counts per class of the domain.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.classes.len()];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// Number of distinct labels actually present.
    pub fn n_present_classes(&self) -> usize {
        self.class_counts().iter().filter(|&&c| c > 0).count()
    }

    /// The instances at `indices`, in that order; repeats are kept.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        let m = self.attributes.len();
        let mut values = Vec::with_capacity(indices.len() * m);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            values.extend_from_slice(self.row(i));
            labels.push(self.labels[i]);
        }
        Dataset {
            attributes: self.attributes.clone(),
            classes: self.classes.clone(),
            values,
            labels,
        }
    }

    /// Restriction to the attribute columns `attrs`, in that order.
    pub fn project(&self, attrs: &[usize]) -> Result<Dataset> {
        if let Some(&bad) = attrs.iter().find(|&&a| a >= self.n_attributes()) {
            return Err(Error::invalid(format!("attribute index {bad} out of range")));
        }
        let mut values = Vec::with_capacity(self.n_instances() * attrs.len());
        for row in self.rows() {
            values.extend(attrs.iter().map(|&a| row[a]));
        }
        Ok(Dataset {
            attributes: attrs.iter().map(|&a| self.attributes[a].clone()).collect(),
            classes: self.classes.clone(),
            values,
            labels: self.labels.clone(),
        })
    }

    /// Re-expresses labels against another class domain, which must contain
    /// every class present here.
    pub fn with_class_domain(&self, classes: &[String]) -> Result<Dataset> {
        let mut map = Vec::with_capacity(self.classes.len());
        for c in &self.classes {
            map.push(classes.binary_search(c).ok());
        }
        let mut labels = Vec::with_capacity(self.labels.len());
        for &l in &self.labels {
            match map[l] {
                Some(nl) => labels.push(nl),
                None => {
                    return Err(Error::SchemaMismatch(format!(
                        "class '{}' not in target domain",
                        self.classes[l]
                    )))
                }
            }
        }
        Ok(Dataset {
            attributes: self.attributes.clone(),
            classes: classes.to_vec(),
            values: self.values.clone(),
            labels,
        })
    }
}

/// Which CSV column holds the class label.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum ClassColumn {
    #[default]
    Last,
    Index(usize),
    Named(String),
}

/// Column layout of a CSV file.
#[derive(Debug, Clone, Default)]
pub struct CsvSchema {
    pub class_column: ClassColumn,
}

struct Table {
    header: Vec<String>,
    rows: Vec<(u64, Vec<String>)>,
}

fn read_table<R: Read>(reader: R) -> Result<Table> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut header = None;
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.iter().all(str::is_empty) {
            continue;
        }
        let fields: Vec<String> = rec.iter().map(str::to_string).collect();
        match &header {
            None => header = Some(fields),
            Some(h) => {
                if fields.len() != h.len() {
                    return Err(Error::Parse {
                        line,
                        message: format!("expected {} fields, found {}", h.len(), fields.len()),
                    });
                }
                rows.push((line, fields));
            }
        }
    }
    let header = header.ok_or_else(|| Error::Empty("no header row".into()))?;
    Ok(Table { header, rows })
}

fn parse_value(line: u64, column: &str, s: &str) -> Result<f64> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::NonNumeric {
            line,
            column: column.to_string(),
            value: s.to_string(),
        }),
    }
}

fn resolve_class_column(header: &[String], col: &ClassColumn) -> Result<usize> {
    match col {
        ClassColumn::Last => header
            .len()
            .checked_sub(1)
            .ok_or_else(|| Error::Empty("header has no columns".into())),
        ClassColumn::Index(i) if *i < header.len() => Ok(*i),
        ClassColumn::Index(i) => Err(Error::SchemaMismatch(format!(
            "class column {i} beyond {} columns",
            header.len()
        ))),
        ClassColumn::Named(name) => header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::SchemaMismatch(format!("no class column named '{name}'"))),
    }
}

/// Reads a labeled dataset from CSV text.
pub fn read_csv<R: Read>(reader: R, schema: &CsvSchema) -> Result<Dataset> {
    let table = read_table(reader)?;
    let class_col = resolve_class_column(&table.header, &schema.class_column)?;
    if table.rows.is_empty() {
        return Err(Error::Empty("no data rows".into()));
    }
    let attributes: Vec<String> = table
        .header
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != class_col)
        .map(|(_, h)| h.clone())
        .collect();
    let mut rows = Vec::with_capacity(table.rows.len());
    let mut labels = Vec::with_capacity(table.rows.len());
    for (line, fields) in &table.rows {
        let mut row = Vec::with_capacity(attributes.len());
        for (j, f) in fields.iter().enumerate() {
            if j == class_col {
                labels.push(f.clone());
            } else {
                row.push(parse_value(*line, &table.header[j], f)?);
            }
        }
        rows.push(row);
    }
    Dataset::from_labeled(attributes, rows, &labels)
}

/// Loads a labeled dataset from a CSV file.
pub fn load_dataset(path: impl AsRef<Path>, schema: &CsvSchema) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, schema)
}

/// Feature rows that may or may not carry labels, as read for prediction.
#[derive(Debug, Clone)]
pub struct QueryData {
    pub rows: Vec<Vec<f64>>,
    /// Label strings, present when the file had a class column.
    pub labels: Option<Vec<String>>,
}

/// Reads rows whose attribute columns must be exactly `attributes`; a single
/// extra column is taken as the class label.
pub fn read_query_csv<R: Read>(reader: R, attributes: &[String]) -> Result<QueryData> {
    let table = read_table(reader)?;
    let class_col = if table.header.len() == attributes.len() {
        None
    } else if table.header.len() == attributes.len() + 1 {
        let extra: Vec<usize> = (0..table.header.len())
            .filter(|&j| !attributes.contains(&table.header[j]))
            .collect();
        match extra.as_slice() {
            [j] => Some(*j),
            _ => {
                return Err(Error::SchemaMismatch(
                    "attribute columns do not match the model".into(),
                ))
            }
        }
    } else {
        return Err(Error::SchemaMismatch(format!(
            "model expects {} attributes, file has {} columns",
            attributes.len(),
            table.header.len()
        )));
    };
    let positions: Vec<usize> = attributes
        .iter()
        .map(|a| {
            table
                .header
                .iter()
                .position(|h| h == a)
                .ok_or_else(|| Error::SchemaMismatch(format!("missing attribute '{a}'")))
        })
        .collect::<Result<_>>()?;
    let mut rows = Vec::with_capacity(table.rows.len());
    let mut labels = class_col.map(|_| Vec::with_capacity(table.rows.len()));
    for (line, fields) in &table.rows {
        let row = positions
            .iter()
            .map(|&j| parse_value(*line, &table.header[j], &fields[j]))
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
        if let (Some(c), Some(l)) = (class_col, labels.as_mut()) {
            l.push(fields[c].clone());
        }
    }
    Ok(QueryData { rows, labels })
}

/// Writes a dataset as CSV: header, attributes in order, class last.
pub fn write_csv<W: Write>(d: &Dataset, w: W) -> Result<()> {
    write_csv_with_class_name(d, "class", w)
}

pub fn write_csv_with_class_name<W: Write>(d: &Dataset, class_name: &str, w: W) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new().from_writer(w);
    let to_parse = |e: csv::Error| Error::Parse {
        line: 0,
        message: e.to_string(),
    };
    let mut header = d.attributes.clone();
    header.push(class_name.to_string());
    wtr.write_record(&header).map_err(to_parse)?;
    for i in 0..d.n_instances() {
        let mut rec: Vec<String> = d.row(i).iter().map(|v| v.to_string()).collect();
        rec.push(d.class_name(d.label(i)).to_string());
        wtr.write_record(&rec).map_err(to_parse)?;
    }
    wtr.flush()
        .map_err(|e| Error::io("<csv output>", e))?;
    Ok(())
}

/// Per-attribute minimum and maximum taken from training data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinMax {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl MinMax {
    pub fn fit(d: &Dataset) -> Result<Self> {
        if d.is_empty() {
            return Err(Error::Empty("cannot fit normalisation on an empty dataset".into()));
        }
        let m = d.n_attributes();
        let mut min = vec![f64::INFINITY; m];
        let mut max = vec![f64::NEG_INFINITY; m];
        for row in d.rows() {
            for (j, &v) in row.iter().enumerate() {
                min[j] = min[j].min(v);
                max[j] = max[j].max(v);
            }
        }
        Ok(MinMax { min, max })
    }

    pub fn dim(&self) -> usize {
        self.min.len()
    }

    /// `(x - min) / (max - min)`; constant attributes map to 0. No clamping.
    pub fn apply_value(&self, j: usize, x: f64) -> f64 {
        let range = self.max[j] - self.min[j];
        if range > 0.0 {
            (x - self.min[j]) / range
        } else {
            0.0
        }
    }

    pub fn apply_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .enumerate()
            .map(|(j, &x)| self.apply_value(j, x))
            .collect()
    }

    pub fn apply(&self, d: &Dataset) -> Result<Dataset> {
        if d.n_attributes() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: d.n_attributes(),
            });
        }
        let mut out = d.clone();
        let m = self.dim();
        for (k, v) in out.values.iter_mut().enumerate() {
            *v = self.apply_value(k % m, *v);
        }
        Ok(out)
    }
}

/// Min-max normalises `d` onto [0,1] and returns the statistics used.
pub fn normalize(d: &Dataset) -> Result<(Dataset, MinMax)> {
    let stats = MinMax::fit(d)?;
    let out = stats.apply(d)?;
    Ok((out, stats))
}

/// Largest-remainder allocation of `total` across groups proportional to
/// `sizes`, never exceeding a group's size.
fn allocate(sizes: &[usize], total: usize) -> Vec<usize> {
    let n: usize = sizes.iter().sum();
    if n == 0 {
        return vec![0; sizes.len()];
    }
    let exact: Vec<f64> = sizes
        .iter()
        .map(|&s| s as f64 * total as f64 / n as f64)
        .collect();
    let mut quota: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let mut rest = total - quota.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..sizes.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = exact[a] - exact[a].floor();
        let fb = exact[b] - exact[b].floor();
        fb.partial_cmp(&fa).unwrap().then(a.cmp(&b))
    });
    for &g in order.iter().cycle().take(order.len() * 2) {
        if rest == 0 {
            break;
        }
        if quota[g] < sizes[g] {
            quota[g] += 1;
            rest -= 1;
        }
    }
    quota
}

fn shuffled_by_class(d: &Dataset, rng: &mut rng::Rng) -> Vec<Vec<usize>> {
    let mut groups = vec![Vec::new(); d.classes().len()];
    for (i, &l) in d.labels().iter().enumerate() {
        groups[l].push(i);
    }
    for g in &mut groups {
        g.shuffle(rng);
    }
    groups
}

/// Stratified train/test index split; each side is returned in ascending
/// index order.
pub fn split_indices(d: &Dataset, test_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::invalid(format!(
            "test fraction {test_fraction} outside (0,1)"
        )));
    }
    if d.is_empty() {
        return Err(Error::Empty("cannot split an empty dataset".into()));
    }
    let n = d.n_instances();
    let total = (test_fraction * n as f64).round() as usize;
    let mut rng = rng::stream(seed, "split", 0);
    let groups = shuffled_by_class(d, &mut rng);
    let sizes: Vec<usize> = groups.iter().map(Vec::len).collect();
    let quota = allocate(&sizes, total);
    let mut train = Vec::with_capacity(n - total);
    let mut test = Vec::with_capacity(total);
    for (g, q) in groups.iter().zip(quota) {
        test.extend_from_slice(&g[..q]);
        train.extend_from_slice(&g[q..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// Stratified train/test split with `|test| = round(test_fraction * n)`.
pub fn split(d: &Dataset, test_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    let (train, test) = split_indices(d, test_fraction, seed)?;
    Ok((d.subset(&train), d.subset(&test)))
}

/// Fold index per instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldAssignment {
    k: usize,
    folds: Vec<usize>,
}

impl FoldAssignment {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn fold_of(&self, i: usize) -> usize {
        self.folds[i]
    }

    pub fn folds(&self) -> &[usize] {
        &self.folds
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in &self.folds {
            sizes[f] += 1;
        }
        sizes
    }

    /// `(train, test)` index lists for fold `f`.
    pub fn train_test(&self, f: usize) -> (Vec<usize>, Vec<usize>) {
        (0..self.folds.len()).partition(|&i| self.folds[i] != f)
    }
}

/// Stratified k-fold assignment: instances are shuffled within each class
/// and dealt round-robin, classes one after another.
pub fn cv_folds(d: &Dataset, k: usize, seed: u64) -> Result<FoldAssignment> {
    let n = d.n_instances();
    if k < 2 {
        return Err(Error::invalid(format!("need at least 2 folds, got {k}")));
    }
    if k > n {
        return Err(Error::invalid(format!("{k} folds for {n} instances")));
    }
    let mut rng = rng::stream(seed, "folds", 0);
    let groups = shuffled_by_class(d, &mut rng);
    let mut folds = vec![0; n];
    for (pos, &i) in groups.iter().flatten().enumerate() {
        folds[i] = pos % k;
    }
    Ok(FoldAssignment { k, folds })
}

/// `size` indices drawn uniformly with replacement.
pub fn bootstrap_indices(n: usize, size: usize, seed: u64) -> Result<Vec<usize>> {
    if size == 0 {
        return Err(Error::invalid("bootstrap size must be positive"));
    }
    if n == 0 {
        return Err(Error::Empty("cannot resample an empty dataset".into()));
    }
    let mut rng = rng::stream(seed, "bootstrap", 0);
    Ok((0..size).map(|_| rng.gen_range(0..n)).collect())
}

pub fn bootstrap(d: &Dataset, size: usize, seed: u64) -> Result<Dataset> {
    let idx = bootstrap_indices(d.n_instances(), size, seed)?;
    Ok(d.subset(&idx))
}

/// Synthetic dataset family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Twonorm,
    Ringnorm,
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "twonorm" => Ok(Family::Twonorm),
            "ringnorm" => Ok(Family::Ringnorm),
            other => Err(Error::invalid(format!("unknown synthetic family '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub family: Family,
    pub dimensions: usize,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn new(family: Family, seed: u64) -> Self {
        SyntheticSpec {
            family,
            dimensions: 20,
            seed,
        }
    }
}

/// Standard normal deviates by the Box-Muller transform, both outputs used.
struct BoxMuller {
    rng: rng::Rng,
    spare: Option<f64>,
}

impl BoxMuller {
    fn next(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        // 1 - U keeps the logarithm argument in (0, 1].
        let u1 = 1.0 - self.rng.gen::<f64>();
        let u2: f64 = self.rng.gen();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * PI * u2;
        self.spare = Some(r * theta.sin());
        r * theta.cos()
    }
}

/// Breiman's twonorm or ringnorm problem with classes `+1` and `-1`,
/// alternating so the classes are balanced.
///
/// twonorm: `+1 ~ N(a*1, I)`, `-1 ~ N(-a*1, I)`, `a = 2/sqrt(d)`.
/// ringnorm: `+1 ~ N(0, 4I)`, `-1 ~ N(a*1, I)`, `a = 1/sqrt(d)`.
pub fn gen_synthetic(spec: &SyntheticSpec, n: usize) -> Result<Dataset> {
    if n < 2 {
        return Err(Error::invalid("synthetic datasets need at least 2 instances"));
    }
    if spec.dimensions == 0 {
        return Err(Error::invalid("synthetic datasets need at least 1 dimension"));
    }
    let dim = spec.dimensions;
    let mut normal = BoxMuller {
        rng: rng::stream(spec.seed, "synthetic", 0),
        spare: None,
    };
    let attributes = (1..=dim).map(|j| format!("x{j}")).collect();
    // "+1" sorts before "-1".
    let classes = vec!["+1".to_string(), "-1".to_string()];
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let positive = i % 2 == 0;
        let (mean, sd) = match (spec.family, positive) {
            (Family::Twonorm, true) => (2.0 / (dim as f64).sqrt(), 1.0),
            (Family::Twonorm, false) => (-2.0 / (dim as f64).sqrt(), 1.0),
            (Family::Ringnorm, true) => (0.0, 2.0),
            (Family::Ringnorm, false) => (1.0 / (dim as f64).sqrt(), 1.0),
        };
        rows.push((0..dim).map(|_| mean + sd * normal.next()).collect());
        labels.push(if positive { 0 } else { 1 });
    }
    Dataset::new(attributes, classes, rows, labels)
}
