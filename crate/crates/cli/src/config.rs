//! TOML experiment configuration, merged with command-line flags.
//!
//! Every key can be overridden by a flag; flags win over the file, the file
//! wins over built-in defaults.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use spherecover::data::{ClassColumn, CsvSchema, Family};
use spherecover::evaluation::{FilterSpec, ModelScheme};
use spherecover::filters::{FilterMethod, DEFAULT_BINS, DEFAULT_RELIEF_SAMPLES};

use crate::error::CliError;

pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_MEMBERS: usize = 25;
pub const DEFAULT_CV_FOLDS: usize = 10;
pub const DEFAULT_RUNS: usize = 30;
pub const DEFAULT_TEST_FRACTION: f64 = 1.0 / 3.0;
pub const DEFAULT_ALPHA_MAX: usize = 30;
pub const FILTER_KAPPAS: [usize; 6] = [5, 10, 20, 30, 40, 50];

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    pub data: Option<DataSection>,
    pub experiment: Option<ExperimentSection>,
    pub bv: Option<BvSection>,
    pub filter: Option<FilterSection>,
    #[serde(default)]
    pub models: Vec<ModelSection>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    pub path: Option<PathBuf>,
    /// Fixed test file; when absent each run splits `path`.
    pub test_path: Option<PathBuf>,
    pub name: Option<String>,
    /// `"last"`, a zero-based column index, or a column name.
    pub class_column: Option<String>,
    pub synthetic: Option<SyntheticSection>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSection {
    pub family: Family,
    pub dimensions: Option<usize>,
    pub train: Option<usize>,
    pub test: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub runs: Option<usize>,
    pub cv_folds: Option<usize>,
    pub test_fraction: Option<f64>,
    pub timings: Option<bool>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BvSection {
    pub s: Option<usize>,
    pub boot_size: Option<usize>,
    pub test_fraction: Option<f64>,
    pub cv_folds: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterSection {
    pub method: Option<FilterMethod>,
    pub k: Option<usize>,
    pub bins: Option<usize>,
    pub relief_samples: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub name: Option<String>,
    pub scheme: Option<ModelScheme>,
    pub alpha: Option<usize>,
    pub alpha_grid: Option<Vec<usize>>,
    pub kappa: Option<usize>,
    pub kappa_grid: Option<Vec<usize>>,
    pub members: Option<usize>,
    pub filter: Option<FilterSection>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!(
            "cannot read config {}: {e}",
            path.display()
        )))?;
        let mut cfg: FileConfig = toml::from_str(&text)
            .map_err(|e| CliError::Input(format!("config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        let rebase = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Some(d) = cfg.data.as_mut() {
            d.path.as_mut().map(rebase);
            d.test_path.as_mut().map(rebase);
        }
        cfg.out.as_mut().map(rebase);
        Ok(cfg)
    }
}

pub fn parse_class_column(s: &str) -> ClassColumn {
    if s.eq_ignore_ascii_case("last") {
        ClassColumn::Last
    } else if let Ok(i) = s.parse::<usize>() {
        ClassColumn::Index(i)
    } else {
        ClassColumn::Named(s.to_string())
    }
}

/// Where the data comes from once flags and file are merged.
#[derive(Debug, Clone)]
pub enum DataSource {
    File {
        path: PathBuf,
        test_path: Option<PathBuf>,
        schema: CsvSchema,
        name: String,
    },
    Synthetic {
        family: Family,
        dimensions: usize,
        train: usize,
        test: usize,
        name: String,
    },
}

impl DataSource {
    pub fn name(&self) -> &str {
        match self {
            DataSource::File { name, .. } | DataSource::Synthetic { name, .. } => name,
        }
    }
}

/// Data flags shared by the commands that read a dataset.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct DataArgs {
    /// Training data CSV (class in the last column unless --class-column).
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Fixed test CSV for experiments.
    #[arg(long)]
    pub test_data: Option<PathBuf>,
    /// Class column: "last", a zero-based index, or a header name.
    #[arg(long)]
    pub class_column: Option<String>,
    /// Dataset name used in result files.
    #[arg(long)]
    pub name: Option<String>,
    /// Synthetic family instead of a file: twonorm or ringnorm.
    #[arg(long)]
    pub synthetic: Option<Family>,
    /// Synthetic dimensionality (default 20).
    #[arg(long)]
    pub dimensions: Option<usize>,
    /// Synthetic training set size.
    #[arg(long)]
    pub train_size: Option<usize>,
    /// Synthetic test set size.
    #[arg(long)]
    pub test_size: Option<usize>,
}

pub fn resolve_data(args: &DataArgs, file: Option<&DataSection>) -> Result<DataSource, CliError> {
    let file = file.cloned().unwrap_or_default();
    let path = args.data.clone().or(file.path.clone());
    let synth_family = args.synthetic.or(file.synthetic.as_ref().map(|s| s.family));
    // a flag source replaces a file source of the other kind
    let (path, synth_family) = match (args.data.is_some(), args.synthetic.is_some()) {
        (true, false) => (path, None),
        (false, true) => (None, synth_family),
        _ => (path, synth_family),
    };
    let fs = file.synthetic.clone();
    match (path, synth_family) {
        (Some(path), None) => {
            let class_column = args
                .class_column
                .clone()
                .or(file.class_column.clone())
                .map(|c| parse_class_column(&c))
                .unwrap_or_default();
            let name = args.name.clone().or(file.name.clone()).unwrap_or_else(|| {
                path.file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| "data".into())
            });
            Ok(DataSource::File {
                test_path: args.test_data.clone().or(file.test_path.clone()),
                path,
                schema: CsvSchema { class_column },
                name,
            })
        }
        (None, Some(family)) => {
            let dimensions = args
                .dimensions
                .or(fs.as_ref().and_then(|s| s.dimensions))
                .unwrap_or(20);
            let train = args.train_size.or(fs.as_ref().and_then(|s| s.train)).unwrap_or(300);
            let test = args.test_size.or(fs.as_ref().and_then(|s| s.test)).unwrap_or(1000);
            let name = args
                .name
                .clone()
                .or(file.name.clone())
                .unwrap_or_else(|| format!("{family:?}").to_lowercase());
            Ok(DataSource::Synthetic {
                family,
                dimensions,
                train,
                test,
                name,
            })
        }
        (Some(_), Some(_)) => Err(CliError::Input(
            "give either a data file or a synthetic family, not both".into(),
        )),
        (None, None) => Err(CliError::Input(
            "no data: pass --data <csv> or --synthetic <family>, or set [data] in the config".into(),
        )),
    }
}

/// Model flags; when given they apply to every configured model.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct ModelArgs {
    /// rsc, arse, abrse, arsse or majority.
    #[arg(long)]
    pub scheme: Option<ModelScheme>,
    /// Fixed alpha; otherwise alpha is chosen by cross-validation.
    #[arg(long)]
    pub alpha: Option<usize>,
    /// Alpha candidates, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub alpha_grid: Option<Vec<usize>>,
    /// Fixed kappa for arsse.
    #[arg(long)]
    pub kappa: Option<usize>,
    /// Kappa candidates, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub kappa_grid: Option<Vec<usize>>,
    /// Ensemble size L.
    #[arg(long, short = 'L')]
    pub members: Option<usize>,
    /// Attribute filter in front of the model: chi2, infogain or relief.
    #[arg(long = "filter")]
    pub filter_method: Option<FilterMethod>,
    /// Attributes kept by the filter.
    #[arg(long)]
    pub filter_k: Option<usize>,
    /// Equal-width bins for chi2 and infogain (default 10).
    #[arg(long)]
    pub bins: Option<usize>,
    /// Instances sampled by relief (default 250).
    #[arg(long)]
    pub relief_samples: Option<usize>,
    /// Name of the model in result files.
    #[arg(long)]
    pub model_name: Option<String>,
}

/// Either a fixed value or a grid to search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Param {
    Fixed(usize),
    Grid(Vec<usize>),
    Default,
}

impl Param {
    fn new(fixed: Option<usize>, grid: Option<Vec<usize>>) -> Result<Self, CliError> {
        match (fixed, grid) {
            (Some(v), _) => Ok(Param::Fixed(v)),
            (None, Some(g)) if g.is_empty() => Err(CliError::Input("empty parameter grid".into())),
            (None, Some(g)) => Ok(Param::Grid(g)),
            (None, None) => Ok(Param::Default),
        }
    }
}

/// One fully merged model description.
#[derive(Debug, Clone)]
pub struct ModelPlan {
    pub name: String,
    pub scheme: ModelScheme,
    pub alpha: Param,
    pub kappa: Param,
    pub members: usize,
    pub filter: Option<FilterSpec>,
}

impl ModelPlan {
    pub fn alpha_grid(&self) -> Vec<usize> {
        match &self.alpha {
            Param::Fixed(a) => vec![*a],
            Param::Grid(g) => g.clone(),
            Param::Default => (0..=DEFAULT_ALPHA_MAX).collect(),
        }
    }

    /// Kappa candidates for `m` attributes reaching the ensemble.
    pub fn kappa_grid(&self, m: usize) -> Vec<usize> {
        match &self.kappa {
            Param::Fixed(k) => vec![*k],
            Param::Grid(g) => g.clone(),
            Param::Default => default_kappa_grid(m, self.filter.is_some()),
        }
    }
}

/// Distinct `round(m * f)` for `f` in 0.1, 0.2, ..., 1.0, plus the fixed
/// filter sizes that fit when a filter is active.
pub fn default_kappa_grid(m: usize, filtered: bool) -> Vec<usize> {
    let mut set: BTreeSet<usize> = (1..=10)
        .map(|t| ((m * t) as f64 / 10.0).round() as usize)
        .filter(|&k| k >= 1)
        .collect();
    if filtered {
        set.extend(FILTER_KAPPAS.iter().copied().filter(|&k| k <= m));
    }
    set.into_iter().collect()
}

fn filter_spec(
    flags: &ModelArgs,
    section: Option<&FilterSection>,
) -> Result<Option<FilterSpec>, CliError> {
    let method = flags.filter_method.or(section.and_then(|s| s.method));
    let k = flags.filter_k.or(section.and_then(|s| s.k));
    match (method, k) {
        (None, None) => Ok(None),
        (Some(method), Some(k)) => Ok(Some(FilterSpec {
            method,
            k,
            bins: flags.bins.or(section.and_then(|s| s.bins)).unwrap_or(DEFAULT_BINS),
            relief_samples: flags
                .relief_samples
                .or(section.and_then(|s| s.relief_samples))
                .unwrap_or(DEFAULT_RELIEF_SAMPLES),
        })),
        (Some(_), None) => Err(CliError::Input("filter needs k (--filter-k)".into())),
        (None, Some(_)) => Err(CliError::Input("filter k given without a method (--filter)".into())),
    }
}

fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' || c == '.' { c } else { '_' })
        .collect()
}

/// Merges model flags into the configured models (or builds one from the
/// flags alone) and gives every model a distinct file-safe name.
pub fn resolve_models(
    flags: &ModelArgs,
    sections: &[ModelSection],
    default_scheme: ModelScheme,
) -> Result<Vec<ModelPlan>, CliError> {
    let sections: Vec<ModelSection> = if sections.is_empty() {
        vec![ModelSection::default()]
    } else {
        sections.to_vec()
    };
    if flags.model_name.is_some() && sections.len() > 1 {
        return Err(CliError::Input("--model-name needs a single model".into()));
    }
    let mut plans = Vec::with_capacity(sections.len());
    let mut seen = BTreeSet::new();
    for (i, s) in sections.iter().enumerate() {
        let scheme = flags.scheme.or(s.scheme).unwrap_or(default_scheme);
        let alpha = if flags.alpha.is_some() || flags.alpha_grid.is_some() {
            Param::new(flags.alpha, flags.alpha_grid.clone())?
        } else {
            Param::new(s.alpha, s.alpha_grid.clone())?
        };
        let kappa = if flags.kappa.is_some() || flags.kappa_grid.is_some() {
            Param::new(flags.kappa, flags.kappa_grid.clone())?
        } else {
            Param::new(s.kappa, s.kappa_grid.clone())?
        };
        if scheme != ModelScheme::Arsse && kappa != Param::Default {
            return Err(CliError::Input(format!("kappa given for scheme {scheme}")));
        }
        let members = flags.members.or(s.members).unwrap_or(DEFAULT_MEMBERS);
        if scheme.is_ensemble() && members == 0 {
            return Err(CliError::Input("an ensemble needs at least one member".into()));
        }
        let filter = filter_spec(flags, s.filter.as_ref())?;
        let base = flags
            .model_name
            .clone()
            .or(s.name.clone())
            .unwrap_or_else(|| scheme.to_string());
        let mut name = sanitize(&base);
        if !seen.insert(name.clone()) {
            name = format!("{name}_{}", i + 1);
            seen.insert(name.clone());
        }
        plans.push(ModelPlan {
            name,
            scheme,
            alpha,
            kappa,
            members: if scheme.is_ensemble() { members } else { 1 },
            filter,
        });
    }
    Ok(plans)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kappa_grid_defaults() {
        assert_eq!(default_kappa_grid(20, false), vec![2, 4, 6, 8, 10, 12, 14, 16, 18, 20]);
        assert_eq!(default_kappa_grid(3, false), vec![1, 2, 3]);
        assert_eq!(default_kappa_grid(12, true), vec![1, 2, 4, 5, 6, 7, 8, 10, 11, 12]);
    }

    #[test]
    fn flags_override_file() {
        let sections = vec![ModelSection {
            scheme: Some(ModelScheme::Abrse),
            alpha: Some(3),
            members: Some(10),
            ..Default::default()
        }];
        let flags = ModelArgs {
            alpha: Some(5),
            ..Default::default()
        };
        let plans = resolve_models(&flags, &sections, ModelScheme::Rsc).unwrap();
        assert_eq!(plans[0].alpha, Param::Fixed(5));
        assert_eq!(plans[0].members, 10);
        assert_eq!(plans[0].scheme, ModelScheme::Abrse);
    }

    #[test]
    fn duplicate_names_are_numbered() {
        let s = ModelSection {
            scheme: Some(ModelScheme::Rsc),
            ..Default::default()
        };
        let plans = resolve_models(&ModelArgs::default(), &[s.clone(), s], ModelScheme::Rsc).unwrap();
        assert_eq!(plans[0].name, "rsc");
        assert_eq!(plans[1].name, "rsc_2");
    }

    #[test]
    fn kappa_only_for_arsse() {
        let flags = ModelArgs {
            scheme: Some(ModelScheme::Arse),
            kappa: Some(3),
            ..Default::default()
        };
        assert!(resolve_models(&flags, &[], ModelScheme::Rsc).is_err());
    }

    #[test]
    fn config_parses() {
        let cfg: FileConfig = toml::from_str(
            r#"
            seed = 3
            [data]
            synthetic = { family = "twonorm", train = 100, test = 200 }
            [experiment]
            runs = 2
            [[models]]
            scheme = "arsse"
            kappa_grid = [2, 4]
            filter = { method = "chi2", k = 10 }
            "#,
        )
        .unwrap();
        assert_eq!(cfg.seed, Some(3));
        assert_eq!(cfg.models[0].kappa_grid, Some(vec![2, 4]));
        assert!(toml::from_str::<FileConfig>("bogus = 1").is_err());
    }
}
