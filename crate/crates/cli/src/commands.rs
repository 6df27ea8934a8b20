use std::fs::{self, File};
use std::io::{self, BufReader, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Serialize;

use firehash_core::data::{fmt_f64, parse_outlier_label, read_scores, write_matrix_to, write_scores_to};
use firehash_core::fire::{fit_fire, iqr_threshold, score_fire};
use firehash_core::fire1::{self, fit_score_fire1};
use firehash_core::metrics::OutlierMetrics;
use firehash_core::outlierness::{effective_phi, oscore_histogram};
use firehash_core::streams::{collect_stream, gen_planted, gen_stream, DriftKind, DriftStreamSpec, PlantedOutlierSpec, StreamSample};
use firehash_core::timing::{bench_scaling, BenchAlgo, BenchRow, BENCH_DIM};
use firehash_core::enhash::prequential_evaluate;
use firehash_core::{
    load_csv, load_model, save_model, EnhashParams, Fire1Params, FireParams, LabelKind, MethodMeasureTable, Model,
    OScoreConfig, RankedScores, RngSpec, Variant,
};

use crate::args::{
    Algo, BenchArgs, EvalArgs, GenArgs, GenKind, OscoreArgs, RankArgs, ScoreArgs, ScoreUnseenArgs, StreamArgs,
    StreamVariant,
};

const SCHEMA_VERSION: u32 = 1;

fn open_out(path: &Path) -> Result<Box<dyn Write>> {
    if path.as_os_str() == "-" {
        return Ok(Box::new(io::stdout().lock()));
    }
    let f = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(Box::new(f))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut out = open_out(path)?;
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn log(verbose: bool, msg: impl FnOnce() -> String) {
    if verbose {
        eprintln!("{}", msg());
    }
}

pub fn score(a: ScoreArgs, verbose: bool) -> Result<()> {
    let estimators = a.estimators.unwrap_or(100);
    match a.algo {
        Algo::Fire => FireParams {
            estimators,
            sampled_dims: a.sampled_dims.unwrap_or(50),
            modulus: a.modulus,
        }
        .validate()?,
        Algo::Fire1 => Fire1Params {
            estimators,
            sampled_dims: a.sampled_dims.unwrap_or(1),
            bin_width: a.bin_width,
        }
        .validate()?,
    }
    let (data, _) = load_csv(&a.input, a.label_col.as_deref(), LabelKind::ClassLabel)?;
    log(verbose, || format!("loaded {} rows x {} features", data.rows(), data.cols()));
    let rng = RngSpec::new(a.seed);
    let (scores, model) = match a.algo {
        Algo::Fire => {
            let params = FireParams {
                estimators,
                sampled_dims: a.sampled_dims.unwrap_or(50),
                modulus: a.modulus,
            };
            let ens = fit_fire(&data, params, rng)?;
            let report = score_fire(&data, &ens)?;
            (report.scores, Model::Fire(ens))
        }
        Algo::Fire1 => {
            let params = Fire1Params {
                estimators,
                sampled_dims: a.sampled_dims.unwrap_or(data.cols()),
                bin_width: a.bin_width,
            };
            let (ens, report) = fit_score_fire1(&data, params, rng)?;
            (report.scores, Model::Fire1(ens))
        }
    };
    let flags = a.iqr_flag.then(|| {
        let (threshold, flags) = iqr_threshold(&scores);
        log(verbose, || {
            format!("IQR threshold {}: {} rows flagged", fmt_f64(threshold), flags.iter().filter(|&&f| f).count())
        });
        flags
    });
    write_scores_to(open_out(&a.out)?, &scores, flags.as_deref())?;
    if let Some(path) = &a.save_model {
        save_model(path, &model)?;
        log(verbose, || format!("model saved to {}", path.display()));
    }
    Ok(())
}

pub fn score_unseen(a: ScoreUnseenArgs, verbose: bool) -> Result<()> {
    let ens = match load_model(&a.model)? {
        Model::Fire1(ens) => ens,
        Model::Fire(_) => bail!("{}: FiRE models cannot score unseen points; fit with --algo fire1", a.model.display()),
    };
    let (data, _) = load_csv(&a.input, a.label_col.as_deref(), LabelKind::ClassLabel)?;
    log(verbose, || format!("scoring {} rows against a model trained on {}", data.rows(), ens.trained_n));
    let scores = fire1::score_unseen(&ens, &data)?;
    write_scores_to(open_out(&a.out)?, &scores, None)?;
    Ok(())
}

#[derive(Serialize)]
struct OutlierScore {
    row: usize,
    o_score: f64,
}

#[derive(Serialize)]
struct OscoreReport {
    schema_version: u32,
    phi: usize,
    effective_phi: usize,
    inliers: usize,
    outliers: usize,
    bin_edges: Vec<f64>,
    counts: Vec<u64>,
    scores: Vec<OutlierScore>,
}

pub fn oscore(a: OscoreArgs, verbose: bool) -> Result<()> {
    if a.phi == 0 {
        bail!("invalid parameter phi: must be at least 1");
    }
    let (data, labels) = load_csv(&a.input, Some(&a.label_col), LabelKind::OutlierBinary)?;
    let flags = labels.as_ref().and_then(|l| l.outlier_flags()).context("missing outlier labels")?.to_vec();
    let config = OScoreConfig { phi: a.phi };
    let hist = oscore_histogram(&data, &flags, config)?;
    let n_out = hist.scores.len();
    let inliers = data.rows() - n_out;
    log(verbose, || format!("{n_out} outliers scored against {inliers} inliers"));
    let report = OscoreReport {
        schema_version: SCHEMA_VERSION,
        phi: a.phi,
        effective_phi: effective_phi(a.phi, inliers),
        inliers,
        outliers: n_out,
        bin_edges: hist.bin_edges,
        counts: hist.counts,
        scores: hist
            .outlier_rows
            .iter()
            .zip(&hist.scores)
            .map(|(&row, &o_score)| OutlierScore { row, o_score })
            .collect(),
    };
    write_json(&a.out, &report)
}

#[derive(Serialize)]
struct EvalReport {
    schema_version: u32,
    rows: usize,
    outliers: usize,
    #[serde(flatten)]
    metrics: OutlierMetrics,
}

/// Reads one outlier-label column; other columns need not be numeric.
fn read_outlier_column(path: &Path, column: &str) -> Result<Vec<bool>> {
    let mut rdr = csv::Reader::from_path(path).with_context(|| format!("cannot open {}", path.display()))?;
    let idx = rdr
        .headers()?
        .iter()
        .position(|h| h.trim() == column)
        .with_context(|| format!("label column {column:?} not found in {}", path.display()))?;
    let mut flags = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let raw = record?.get(idx).unwrap_or("").to_string();
        let flag = parse_outlier_label(&raw)
            .with_context(|| format!("row {}: invalid outlier label {raw:?}", i + 1))?;
        flags.push(flag);
    }
    if flags.is_empty() {
        bail!("{} has no label rows", path.display());
    }
    Ok(flags)
}

pub fn eval(a: EvalArgs, verbose: bool) -> Result<()> {
    if a.n == Some(0) {
        bail!("invalid parameter n: must be at least 1");
    }
    let file = File::open(&a.scores).with_context(|| format!("cannot open {}", a.scores.display()))?;
    let scores = read_scores(BufReader::new(file))?;
    let flags = read_outlier_column(&a.labels, &a.label_col)?;
    if flags.len() != scores.len() {
        bail!("{} scores but {} labels", scores.len(), flags.len());
    }
    let ranked = RankedScores::new(scores, flags)?;
    let metrics = ranked.report(a.n)?;
    log(verbose, || format!("{} rows, {} outliers, ROC-AUC {}", ranked.len(), ranked.n_outliers(), metrics.roc_auc));
    let report = EvalReport {
        schema_version: SCHEMA_VERSION,
        rows: ranked.len(),
        outliers: ranked.n_outliers(),
        metrics,
    };
    write_json(&a.out, &report)
}

pub fn rank(a: RankArgs, verbose: bool) -> Result<()> {
    let mut paths: Vec<_> = fs::read_dir(&a.tables)
        .with_context(|| format!("cannot read {}", a.tables.display()))?
        .map(|e| e.map(|e| e.path()))
        .collect::<io::Result<_>>()?;
    paths.retain(|p| p.extension().is_some_and(|e| e == "csv"));
    paths.sort();
    if paths.is_empty() {
        bail!("no .csv tables in {}", a.tables.display());
    }
    let stems: Vec<String> = paths
        .iter()
        .map(|p| p.file_stem().unwrap_or_default().to_string_lossy().into_owned())
        .collect();
    if let Some(unknown) = a.lower_is_better.iter().find(|m| !stems.contains(m)) {
        bail!("--lower-is-better {unknown:?} does not match any table");
    }
    let mut measures: Vec<String> = Vec::new();
    let mut methods: Vec<String> = Vec::new();
    let mut columns: Vec<Vec<Option<f64>>> = Vec::new();
    for (path, measure) in paths.iter().zip(stems) {
        let higher = !a.lower_is_better.contains(&measure);
        let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
        let table = MethodMeasureTable::read_csv(BufReader::new(file), higher)
            .with_context(|| format!("in {}", path.display()))?;
        let ranks = table.friedman_ranks()?;
        for m in &table.methods {
            if !methods.contains(m) {
                methods.push(m.clone());
            }
        }
        let by_method = methods
            .iter()
            .map(|m| table.methods.iter().position(|t| t == m).and_then(|i| ranks[i]))
            .collect();
        log(verbose, || format!("{measure}: {} methods x {} datasets", table.methods.len(), table.datasets.len()));
        measures.push(measure);
        columns.push(by_method);
    }
    let mut w = csv::Writer::from_writer(open_out(&a.out)?);
    let mut header = vec!["method".to_string()];
    header.extend(measures.iter().cloned());
    w.write_record(&header)?;
    for (i, m) in methods.iter().enumerate() {
        let mut rec = vec![m.clone()];
        rec.extend(columns.iter().map(|c| c.get(i).copied().flatten().map(fmt_f64).unwrap_or_default()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct StreamReport {
    schema_version: u32,
    params: EnhashParams,
    seed: u64,
    classes: Vec<String>,
    samples: usize,
    errors: usize,
    error_pct: f64,
    kappa_m: Option<f64>,
    kappa_t: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    wall_time_secs: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    window: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    windowed_error: Option<Vec<f64>>,
}

pub fn stream(a: StreamArgs, verbose: bool) -> Result<()> {
    let params = EnhashParams {
        estimators: a.estimators,
        bin_width: a.bin_width,
        lambda: if a.variant == StreamVariant::Lambda0 { 0.0 } else { a.lambda },
        variant: if a.variant == StreamVariant::Noweights { Variant::NoWeights } else { Variant::Full },
    };
    params.validate()?;
    if a.window == Some(0) {
        bail!("invalid parameter window: must be at least 1");
    }
    let (data, labels) = load_csv(&a.input, Some(&a.label_col), LabelKind::ClassLabel)?;
    let Some(firehash_core::LabelVector::Class { values, registry }) = labels else {
        bail!("missing class labels");
    };
    let samples = data
        .iter_rows()
        .zip(&values)
        .map(|(x, &y)| StreamSample { x: x.to_vec(), y });
    let eval = prequential_evaluate(params, RngSpec::new(a.seed), samples, a.window)?;
    log(verbose, || format!("{} samples, error {}%", eval.samples, eval.error_pct));
    let report = StreamReport {
        schema_version: SCHEMA_VERSION,
        params,
        seed: a.seed,
        classes: registry,
        samples: eval.samples,
        errors: eval.errors,
        error_pct: eval.error_pct,
        kappa_m: eval.kappa_m,
        kappa_t: eval.kappa_t,
        wall_time_secs: a.timing.then_some(eval.wall_time_secs),
        window: eval.window,
        windowed_error: eval.windowed_error,
    };
    write_json(&a.out, &report)
}

pub fn gen(a: GenArgs, verbose: bool) -> Result<()> {
    if a.n == Some(0) {
        bail!("invalid parameter n: must be at least 1");
    }
    let (data, labels): (_, Vec<String>) = match a.kind {
        GenKind::Planted => {
            let mut spec = PlantedOutlierSpec::two_cluster(a.seed);
            if let Some(n) = a.n {
                spec = spec.with_inliers(n);
            }
            let planted = gen_planted(&spec)?;
            let labels = planted.outlier_flags().iter().map(|&f| u8::from(f).to_string()).collect();
            (planted.data, labels)
        }
        kind => {
            let Some(n) = a.n else {
                bail!("--n is required for stream kinds");
            };
            let kind = match kind {
                GenKind::Abrupt => DriftKind::Abrupt,
                GenKind::Incremental => DriftKind::Incremental,
                GenKind::Virtual => DriftKind::Virtual,
                _ => DriftKind::Recurring,
            };
            let mut spec = DriftStreamSpec::new(kind, n, a.seed);
            spec.d = a.d;
            if matches!(kind, DriftKind::Abrupt | DriftKind::Recurring) {
                spec.drift_points = if a.drift_at.is_empty() { vec![n / 2] } else { a.drift_at.clone() };
            } else if !a.drift_at.is_empty() {
                bail!("--drift-at applies to abrupt and recurring streams only");
            }
            let (data, ys) = collect_stream(gen_stream(&spec)?)?;
            (data, ys.iter().map(usize::to_string).collect())
        }
    };
    log(verbose, || format!("generated {} rows x {} features", data.rows(), data.cols()));
    write_matrix_to(open_out(&a.out)?, &data, Some(&labels))?;
    Ok(())
}

#[derive(Serialize)]
struct BenchReport {
    schema_version: u32,
    #[serde(flatten)]
    algo: BenchAlgo,
    dim: usize,
    seed: u64,
    trials: usize,
    rows: Vec<BenchRow>,
}

pub fn bench(a: BenchArgs, verbose: bool) -> Result<()> {
    let algo = match a.algo {
        Algo::Fire => {
            let p = FireParams {
                estimators: a.estimators,
                sampled_dims: a.sampled_dims.unwrap_or(50),
                modulus: a.modulus,
            };
            p.validate()?;
            BenchAlgo::Fire(p)
        }
        Algo::Fire1 => {
            let p = Fire1Params {
                estimators: a.estimators,
                sampled_dims: a.sampled_dims.unwrap_or(BENCH_DIM),
                bin_width: a.bin_width,
            };
            p.validate()?;
            BenchAlgo::Fire1(p)
        }
    };
    let rows = bench_scaling(&algo, &a.sizes, a.seed, a.trials)?;
    for r in &rows {
        log(verbose, || format!("n={} {:.4}s", r.n, r.seconds));
    }
    let report = BenchReport {
        schema_version: SCHEMA_VERSION,
        algo,
        dim: BENCH_DIM,
        seed: a.seed,
        trials: a.trials,
        rows,
    };
    write_json(&a.out, &report)
}
