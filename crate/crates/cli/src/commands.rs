use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use spherecover::data::{self, Dataset, SyntheticSpec};
use spherecover::evaluation::{
    self, BvReport, ModelKind, ModelScheme, ModelSpec, TrainedModel,
};
use spherecover::filters;
use spherecover::persist;
use spherecover::rng::derive_seed;
use spherecover::stats::{self, Level};
use spherecover::Error;

use crate::config::{
    self, DataSource, FileConfig, ModelPlan, Param, DEFAULT_CV_FOLDS, DEFAULT_RUNS,
    DEFAULT_SEED, DEFAULT_TEST_FRACTION,
};
use crate::error::CliError;
use crate::output::{self, field};
use crate::{BvArgs, Cli, Command, CompareArgs, ExperimentArgs, FilterArgs, GenArgs, PredictArgs, TrainArgs};

pub fn dispatch(cli: &Cli, file: &FileConfig) -> Result<(), CliError> {
    let seed = cli.seed.or(file.seed).unwrap_or(DEFAULT_SEED);
    let out = output::out_dir(cli.out.as_ref(), file.out.as_ref());
    match &cli.command {
        Command::Train(a) => train(a, file, seed, &out),
        Command::Predict(a) => predict(a),
        Command::Experiment(a) => experiment(a, file, seed, &out),
        Command::Bv(a) => bv(a, file, seed, &out),
        Command::Compare(a) => compare(a, &out),
        Command::Filter(a) => filter(a, file, seed, &out),
        Command::Gen(a) => gen(a, seed),
    }
}

fn load_file(path: &Path, schema: &data::CsvSchema) -> Result<Dataset, CliError> {
    Ok(data::load_dataset(path, schema)?)
}

fn synthetic(src: &DataSource, n: usize, seed: u64) -> Result<Dataset, CliError> {
    match src {
        DataSource::Synthetic {
            family, dimensions, ..
        } => Ok(data::gen_synthetic(
            &SyntheticSpec {
                family: *family,
                dimensions: *dimensions,
                seed,
            },
            n,
        )?),
        DataSource::File { .. } => Err(CliError::Internal("not a synthetic source".into())),
    }
}

/// The training set a single-model command works on.
fn training_data(src: &DataSource, seed: u64) -> Result<Dataset, CliError> {
    match src {
        DataSource::File { path, schema, .. } => load_file(path, schema),
        DataSource::Synthetic { train, .. } => synthetic(src, *train, derive_seed(seed, "train-data", 0)),
    }
}

/// One point of a parameter search.
#[derive(Debug, Clone)]
pub struct CurvePoint {
    pub stage: &'static str,
    pub value: usize,
    pub cv_accuracy: f64,
}

/// Settles the grids of `plan` on `train` by cross-validation.
pub fn choose_spec(
    plan: &ModelPlan,
    train: &Dataset,
    cv_k: usize,
    seed: u64,
) -> Result<(ModelSpec, Vec<CurvePoint>), CliError> {
    let sel_seed = derive_seed(seed, "select", 0);
    let mut curve = Vec::new();
    let mut push = |stage: &'static str, sel: &evaluation::Selection| {
        curve.extend(sel.curve.iter().map(|&(value, cv_accuracy)| CurvePoint {
            stage,
            value,
            cv_accuracy,
        }));
    };
    let spec = match plan.scheme {
        ModelScheme::Majority => ModelSpec::majority(),
        ModelScheme::Arsse => {
            let m = plan.filter.map_or(train.n_attributes(), |f| f.k.min(train.n_attributes()));
            let (kappa, alpha) = match (&plan.kappa, &plan.alpha) {
                (Param::Fixed(k), Param::Fixed(a)) => (*k, *a),
                _ => {
                    let sel = evaluation::select_kappa_alpha_with(
                        train,
                        &plan.kappa_grid(m),
                        &plan.alpha_grid(),
                        plan.members,
                        plan.filter,
                        cv_k,
                        sel_seed,
                    )?;
                    if !matches!(plan.kappa, Param::Fixed(_)) {
                        push("kappa", &sel.kappa);
                    }
                    push("alpha", &sel.alpha);
                    (sel.kappa.best, sel.alpha.best)
                }
            };
            ModelSpec::arsse(alpha, kappa, plan.members)
        }
        scheme => {
            let alpha = match &plan.alpha {
                Param::Fixed(a) => *a,
                _ => {
                    let sel = evaluation::select_alpha_with(train, &plan.alpha_grid(), plan.filter, cv_k, sel_seed)?;
                    push("alpha", &sel);
                    sel.best
                }
            };
            match scheme {
                ModelScheme::Rsc => ModelSpec::rsc(alpha),
                ModelScheme::Arse => ModelSpec::arse(alpha, plan.members),
                _ => ModelSpec::abrse(alpha, plan.members),
            }
        }
    };
    let spec = ModelSpec {
        filter: plan.filter,
        ..spec
    };
    Ok((spec, curve))
}

fn curve_csv(rows: &[(String, Option<usize>, Vec<CurvePoint>)]) -> String {
    let mut s = String::from("model,run,stage,value,cv_accuracy\n");
    for (name, run, curve) in rows {
        for p in curve {
            let run = run.map(|r| r.to_string()).unwrap_or_default();
            let _ = writeln!(s, "{},{run},{},{},{}", field(name), p.stage, p.value, p.cv_accuracy);
        }
    }
    s
}

fn sphere_counts(model: &TrainedModel) -> Vec<usize> {
    match &model.kind {
        ModelKind::Single(m) => vec![m.spheres().len()],
        ModelKind::Ensemble(e) => e.members().iter().map(|m| m.spheres().len()).collect(),
        ModelKind::Majority { .. } => Vec::new(),
    }
}

fn train(a: &TrainArgs, file: &FileConfig, seed: u64, out: &Path) -> Result<(), CliError> {
    let src = config::resolve_data(&a.data, file.data.as_ref())?;
    let plans = config::resolve_models(&a.model, &file.models, ModelScheme::Rsc)?;
    let [plan] = plans.as_slice() else {
        return Err(CliError::Input(format!(
            "train needs exactly one model, the configuration has {}",
            plans.len()
        )));
    };
    let cv_k = a
        .cv_folds
        .or(file.experiment.as_ref().and_then(|e| e.cv_folds))
        .unwrap_or(DEFAULT_CV_FOLDS);
    let train = training_data(&src, seed)?;
    let (spec, curve) = choose_spec(plan, &train, cv_k, seed)?;
    let model = spec.fit(&train, seed)?;
    let acc = model.accuracy(&train)?;
    let model_path = a.model_file.clone().unwrap_or_else(|| out.join("model.json"));
    output::write_file(&model_path, persist::to_json(&model)?)?;
    if !curve.is_empty() {
        let sel_path = model_path.with_file_name(format!(
            "{}_selection.csv",
            model_path.file_stem().unwrap_or_default().to_string_lossy()
        ));
        output::write_file(&sel_path, curve_csv(&[(plan.name.clone(), None, curve)]))?;
    }
    let counts = sphere_counts(&model);
    let spheres = match counts.as_slice() {
        [] => "-".to_string(),
        [one] => one.to_string(),
        many => format!(
            "{} (min {}, max {} per member)",
            many.iter().sum::<usize>(),
            many.iter().min().unwrap(),
            many.iter().max().unwrap()
        ),
    };
    println!(
        "scheme={} alpha={} kappa={} L={} spheres={spheres} train_accuracy={acc:.6} model={}",
        spec.scheme,
        spec.alpha,
        spec.kappa.map_or("-".into(), |k| k.to_string()),
        spec.members,
        model_path.display()
    );
    Ok(())
}

fn predict(a: &PredictArgs) -> Result<(), CliError> {
    let model = persist::load_model(&a.model_file)?;
    let f = fs::File::open(&a.data).map_err(|e| Error::Io {
        path: a.data.clone(),
        source: e,
    })?;
    let q = data::read_query_csv(f, &model.attributes)?;
    let ensemble = matches!(model.kind, ModelKind::Ensemble(_));
    let preds = q
        .rows
        .par_iter()
        .enumerate()
        .map(|(i, row)| model.predict(row, i as u64))
        .collect::<spherecover::Result<Vec<_>>>()?;
    let mut s = String::from("index,predicted");
    if q.labels.is_some() {
        s.push_str(",actual");
    }
    if ensemble {
        for c in &model.classes {
            let _ = write!(s, ",{}", field(&format!("votes_{c}")));
        }
    }
    s.push('\n');
    let mut correct = 0usize;
    for (i, p) in preds.iter().enumerate() {
        let name = &model.classes[p.label];
        let _ = write!(s, "{i},{}", field(name));
        if let Some(labels) = &q.labels {
            let _ = write!(s, ",{}", field(&labels[i]));
            correct += usize::from(&labels[i] == name);
        }
        if let Some(t) = &p.tally {
            for c in &t.counts {
                let _ = write!(s, ",{c}");
            }
        }
        s.push('\n');
    }
    if let Some(labels) = &q.labels {
        if !labels.is_empty() {
            let _ = writeln!(s, "# accuracy={:.6}", correct as f64 / labels.len() as f64);
        }
    }
    output::emit(a.output.as_deref(), &s)
}

struct RunOutcome {
    accuracy: f64,
    spec: ModelSpec,
    curve: Vec<CurvePoint>,
    model_json: Option<String>,
    seconds: f64,
}

fn experiment_run(
    src: &DataSource,
    full: Option<&Dataset>,
    fixed_test: Option<&Dataset>,
    plans: &[ModelPlan],
    test_fraction: f64,
    cv_k: usize,
    run_seed: u64,
) -> Result<Vec<RunOutcome>, CliError> {
    let (train, test) = match (src, full) {
        (DataSource::File { .. }, Some(d)) => match fixed_test {
            Some(t) => (d.clone(), t.clone()),
            None => data::split(d, test_fraction, run_seed)?,
        },
        (DataSource::Synthetic { train, test, .. }, _) => (
            synthetic(src, *train, derive_seed(run_seed, "train-data", 0))?,
            synthetic(src, *test, derive_seed(run_seed, "test-data", 0))?,
        ),
        _ => return Err(CliError::Internal("data file not loaded".into())),
    };
    plans
        .iter()
        .map(|plan| {
            let start = Instant::now();
            let (spec, curve) = choose_spec(plan, &train, cv_k, run_seed)?;
            let (accuracy, model_json) = match spec.fit(&train, run_seed) {
                Ok(model) => (model.accuracy(&test)?, Some(persist::to_json(&model)?)),
                Err(Error::UnusableModel) => {
                    log::warn!("{} left no spheres; scoring it as all wrong", plan.name);
                    (0.0, None)
                }
                Err(e) => return Err(e.into()),
            };
            Ok(RunOutcome {
                accuracy,
                spec,
                curve,
                model_json,
                seconds: start.elapsed().as_secs_f64(),
            })
        })
        .collect()
}

fn experiment(a: &ExperimentArgs, file: &FileConfig, seed: u64, out: &Path) -> Result<(), CliError> {
    let ex = file.experiment.clone().unwrap_or_default();
    let src = config::resolve_data(&a.data, file.data.as_ref())?;
    let plans = config::resolve_models(&a.model, &file.models, ModelScheme::Rsc)?;
    let runs = a.runs.or(ex.runs).unwrap_or(DEFAULT_RUNS);
    if runs == 0 {
        return Err(CliError::Input("run count must be at least 1".into()));
    }
    let cv_k = a.cv_folds.or(ex.cv_folds).unwrap_or(DEFAULT_CV_FOLDS);
    let test_fraction = a.test_fraction.or(ex.test_fraction).unwrap_or(DEFAULT_TEST_FRACTION);
    let timings = a.timings || ex.timings.unwrap_or(false);
    let (full, fixed_test) = match &src {
        DataSource::File {
            path,
            test_path,
            schema,
            ..
        } => (
            Some(load_file(path, schema)?),
            test_path.as_ref().map(|p| load_file(p, schema)).transpose()?,
        ),
        DataSource::Synthetic { .. } => (None, None),
    };
    output::ensure_dir(out)?;
    let results: Vec<Result<Vec<RunOutcome>, CliError>> = (0..runs)
        .into_par_iter()
        .map(|r| {
            experiment_run(
                &src,
                full.as_ref(),
                fixed_test.as_ref(),
                &plans,
                test_fraction,
                cv_k,
                derive_seed(seed, "run", r as u64),
            )
        })
        .collect();

    let mut runs_csv = String::from("model,run,seed,alpha,kappa,accuracy");
    if timings {
        runs_csv.push_str(",seconds");
    }
    runs_csv.push('\n');
    let mut curves = Vec::new();
    let mut per_model: Vec<Vec<f64>> = vec![Vec::new(); plans.len()];
    let models_dir = out.join("models");
    let mut failure = None;
    for (r, res) in results.into_iter().enumerate() {
        let outcomes = match res {
            Ok(o) => o,
            Err(e) => {
                let _ = writeln!(runs_csv, "# FAILED run {r}: {e}");
                failure = Some(e);
                break;
            }
        };
        let run_seed = derive_seed(seed, "run", r as u64);
        for (i, (plan, o)) in plans.iter().zip(outcomes).enumerate() {
            let _ = write!(
                runs_csv,
                "{},{r},{run_seed},{},{},{}",
                field(&plan.name),
                o.spec.alpha,
                o.spec.kappa.map(|k| k.to_string()).unwrap_or_default(),
                o.accuracy
            );
            if timings {
                let _ = write!(runs_csv, ",{:.6}", o.seconds);
            }
            runs_csv.push('\n');
            per_model[i].push(o.accuracy);
            if let Some(json) = o.model_json {
                output::write_file(&models_dir.join(format!("{}_run{r}.json", plan.name)), json)?;
            }
            curves.push((plan.name.clone(), Some(r), o.curve));
        }
    }
    output::write_file(&out.join("runs.csv"), &runs_csv)?;
    output::write_file(&out.join("selection.csv"), curve_csv(&curves))?;
    if let Some(e) = failure {
        return Err(e);
    }

    let mut summary = String::from("model,runs,mean,sd\n");
    let mut matrix = String::from("dataset");
    let mut row = field(src.name());
    for (plan, acc) in plans.iter().zip(&per_model) {
        let s = evaluation::summarize(acc);
        let _ = writeln!(summary, "{},{},{},{}", field(&plan.name), s.runs, s.mean, s.sd);
        let _ = write!(matrix, ",{}", field(&plan.name));
        let _ = write!(row, ",{}", s.mean);
    }
    let _ = writeln!(matrix);
    let _ = writeln!(matrix, "{row}");
    output::write_file(&out.join("summary.csv"), &summary)?;
    output::write_file(&out.join("matrix.csv"), &matrix)?;
    print!("{summary}");
    Ok(())
}

fn bv(a: &BvArgs, file: &FileConfig, seed: u64, out: &Path) -> Result<(), CliError> {
    let sec = file.bv.clone().unwrap_or_default();
    let src = config::resolve_data(&a.data, file.data.as_ref())?;
    let plans = config::resolve_models(&a.model, &file.models, ModelScheme::Rsc)?;
    let s = a.s.or(sec.s).unwrap_or(evaluation::BV_DEFAULT_S);
    let boot = a.boot_size.or(sec.boot_size).unwrap_or(evaluation::BV_DEFAULT_BOOT_SIZE);
    let f = a
        .test_fraction
        .or(sec.test_fraction)
        .unwrap_or(evaluation::BV_DEFAULT_TEST_FRACTION);
    let cv_k = a.cv_folds.or(sec.cv_folds).unwrap_or(DEFAULT_CV_FOLDS);
    let d = match &src {
        DataSource::File { path, schema, .. } => load_file(path, schema)?,
        DataSource::Synthetic { train, test, .. } => {
            synthetic(&src, train + test, derive_seed(seed, "bv-data", 0))?
        }
    };
    let mut reports: Vec<(String, BvReport)> = Vec::with_capacity(plans.len());
    for plan in &plans {
        let needs_selection = match plan.scheme {
            ModelScheme::Majority => false,
            ModelScheme::Arsse => !matches!((&plan.alpha, &plan.kappa), (Param::Fixed(_), Param::Fixed(_))),
            _ => !matches!(plan.alpha, Param::Fixed(_)),
        };
        let spec = if needs_selection {
            let (pool, _) = data::split(&d, f, seed)?;
            choose_spec(plan, &pool, cv_k, seed)?.0
        } else {
            choose_spec(plan, &d, cv_k, seed)?.0
        };
        log::info!("{}: {}", plan.name, spec.label());
        let report = evaluation::bv_decompose(&d, &spec, s, boot, f, seed)?;
        reports.push((plan.name.clone(), report));
    }
    let mut csv = Vec::new();
    evaluation::write_bv_csv(&reports, &mut csv).map_err(|e| CliError::Internal(e.to_string()))?;
    let mut text = String::from_utf8(csv).map_err(|e| CliError::Internal(e.to_string()))?;
    for i in 0..reports.len() {
        for j in i + 1..reports.len() {
            let (n1, r1) = &reports[i];
            let (n2, r2) = &reports[j];
            let v1 = [r1.average_error, r1.bias, r1.net_var, r1.var_unbiased, r1.var_biased];
            let v2 = [r2.average_error, r2.bias, r2.net_var, r2.var_unbiased, r2.var_biased];
            let _ = write!(text, "{}", field(&format!("diff {n1} vs {n2} %")));
            for (x, y) in v1.iter().zip(&v2) {
                let _ = write!(text, ",{}", output::percent_diff(*x, *y));
            }
            text.push('\n');
        }
    }
    output::write_file(&out.join("bv.csv"), &text)?;
    print!("{text}");
    Ok(())
}

fn compare(a: &CompareArgs, out: &Path) -> Result<(), CliError> {
    let level = Level::from_f64(a.level)?;
    let parts = a
        .matrices
        .iter()
        .map(|p| {
            let f = fs::File::open(p).map_err(|e| Error::Io {
                path: p.clone(),
                source: e,
            })?;
            stats::parse_matrix_csv(f)
        })
        .collect::<spherecover::Result<Vec<_>>>()?;
    let matrix = stats::AccuracyMatrix::concat(parts).map_err(|e| match e {
        Error::SchemaMismatch(m) => CliError::Input(m),
        other => other.into(),
    })?;
    let summary = stats::friedman_test(&matrix)?;
    let k = matrix.n_classifiers();
    let n = matrix.n_datasets();
    let cd = stats::nemenyi_cd(k, n, level)?;
    let mut report = stats::format_summary(&summary, cd, level);
    let control = (0..k)
        .min_by(|&x, &y| summary.mean_ranks[x].partial_cmp(&summary.mean_ranks[y]).unwrap())
        .unwrap_or(0);
    let adjusted = level.as_f64() / (k - 1) as f64;
    let _ = writeln!(
        report,
        "bonferroni_dunn vs {} (level {:.4} per comparison):",
        summary.classifiers[control], adjusted
    );
    for j in (0..k).filter(|&j| j != control) {
        let z = stats::bonferroni_dunn_z(summary.mean_ranks[control], summary.mean_ranks[j], k, n);
        let p = stats::two_sided_p(z);
        let _ = writeln!(
            report,
            "  {}: z={z:.4} p={p:.3e}{}",
            summary.classifiers[j],
            if p < adjusted { " significant" } else { "" }
        );
    }
    output::ensure_dir(out)?;
    output::write_file(&out.join("ranks.txt"), &report)?;
    stats::render_cd_diagram(&summary, cd, out.join("cd.svg"))?;
    print!("{report}");
    Ok(())
}

fn filter(a: &FilterArgs, file: &FileConfig, seed: u64, out: &Path) -> Result<(), CliError> {
    let sec = file.filter.clone().unwrap_or_default();
    let src = config::resolve_data(&a.data, file.data.as_ref())?;
    let d = training_data(&src, seed)?;
    let method = a
        .method
        .or(sec.method)
        .ok_or_else(|| CliError::Input("no filter method: pass --method chi2|infogain|relief".into()))?;
    let bins = a.bins.or(sec.bins).unwrap_or(filters::DEFAULT_BINS);
    let samples = a
        .relief_samples
        .or(sec.relief_samples)
        .unwrap_or(filters::DEFAULT_RELIEF_SAMPLES);
    let k = a.k.or(sec.k).unwrap_or(d.n_attributes());
    let (normed, _) = data::normalize(&d)?;
    let scores = filters::score(&normed, method, bins, samples, derive_seed(seed, "relief", 0))?;
    let keep = filters::select_top_k(&scores, k)?;
    output::ensure_dir(out)?;
    let mut buf = Vec::new();
    filters::write_scores_csv(&scores, d.attributes(), &mut buf).map_err(|e| CliError::Internal(e.to_string()))?;
    output::write_file(&out.join("scores.csv"), &buf)?;
    let mut buf = Vec::new();
    data::write_csv(&d.project(&keep)?, &mut buf)?;
    output::write_file(&out.join("filtered.csv"), &buf)?;
    let names: Vec<&str> = keep.iter().map(|&j| d.attributes()[j].as_str()).collect();
    println!("{method}: kept {} of {} attributes: {}", keep.len(), d.n_attributes(), names.join(","));
    Ok(())
}

fn gen(a: &GenArgs, seed: u64) -> Result<(), CliError> {
    let d = data::gen_synthetic(
        &SyntheticSpec {
            family: a.family,
            dimensions: a.dimensions,
            seed,
        },
        a.n,
    )?;
    let mut buf = Vec::new();
    data::write_csv(&d, &mut buf)?;
    let text = String::from_utf8(buf).map_err(|e| CliError::Internal(e.to_string()))?;
    output::emit(a.output.as_deref(), &text)
}
