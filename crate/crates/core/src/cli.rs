//! The `gradecast` command line.
//!
//! Exit codes: 0 success, 1 IO or data error, 2 usage error, 3 numerical
//! failure.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::config::Settings;
use crate::data::{DatasetView, Feature, ViewKind};
use crate::eda::{
    correlation_matrix_lenient, gradient_map, histogram, write_correlations, write_gradient_maps,
    write_histograms, DEFAULT_MAP_BINS,
};
use crate::error::{Error, Result};
use crate::eval::{
    cross, format_results_text, full_plan, run_experiment_matrix, write_results_csv,
};
use crate::ingest::{generate_synthetic, parse_cohort, write_cohort_to, CohortFile};
use crate::pipeline::{fit_pipeline, Checkpoint, Pipeline, PipelineConfig, CHECKPOINT_VERSION};

#[derive(Debug, Parser)]
#[command(
    name = "gradecast",
    version,
    about = "Predict course totals from partial assessment scores"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic cohort CSV.
    Synth(SynthArgs),
    /// Write histograms, correlations and gradient maps for a cohort.
    Eda(EdaArgs),
    /// Fit one pipeline on a whole cohort and save a checkpoint.
    Train(TrainArgs),
    /// Cross-validate pipelines and write the results table.
    Evaluate(EvaluateArgs),
    /// Predict totals with a saved checkpoint.
    Predict(PredictArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// Settings file of `key = value` lines.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Override one setting; may be repeated.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    pub set: Vec<String>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub out: PathBuf,
    /// Number of students.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Target correlation with the total, e.g. `ete=0.96`; may be repeated.
    #[arg(long, value_name = "FEATURE=R")]
    pub corr: Vec<String>,
    #[arg(long)]
    pub noise_sd: Option<f64>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct EdaArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[arg(long, default_value_t = DEFAULT_MAP_BINS)]
    pub bins: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Output directory for `checkpoint.json` and `manifest.json`.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value = "d1")]
    pub view: String,
    #[arg(long)]
    pub pipeline: String,
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Results CSV path.
    #[arg(long)]
    pub out: PathBuf,
    /// View to evaluate; may be repeated. Defaults to every view.
    #[arg(long)]
    pub view: Vec<String>,
    /// Pipeline to evaluate; may be repeated.
    #[arg(long, conflicts_with = "all_pipelines")]
    pub pipeline: Vec<String>,
    /// Each view's full pipeline set.
    #[arg(long)]
    pub all_pipelines: bool,
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long)]
    pub input: PathBuf,
    /// Predictions CSV path.
    #[arg(long)]
    pub out: PathBuf,
    /// Feature view of the input; defaults to the checkpoint's.
    #[arg(long)]
    pub view: Option<String>,
    #[command(flatten)]
    pub common: Common,
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.kind().exit_code()
        }
    }
}

pub fn execute(cmd: Command) -> Result<()> {
    match cmd {
        Command::Synth(a) => synth(a),
        Command::Eda(a) => eda(a),
        Command::Train(a) => train(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Predict(a) => predict(a),
    }
}

fn settings(common: &Common) -> Result<Settings> {
    let mut s = Settings::default();
    if let Some(path) = &common.config {
        s.apply_file(path)?;
    }
    for kv in &common.set {
        s.apply_override(kv)?;
    }
    Ok(s)
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn load_cohort(path: &Path, s: &Settings) -> Result<CohortFile> {
    let cohort = parse_cohort(path, &s.maxima)?;
    for r in &cohort.rejections {
        eprintln!("warning: {}: line {}: {}", path.display(), r.line, r.reason);
    }
    if cohort.records.is_empty() {
        return Err(Error::Empty("cohort"));
    }
    Ok(cohort)
}

fn synth(a: SynthArgs) -> Result<()> {
    let mut s = settings(&a.common)?;
    if let Some(n) = a.n {
        s.synth.n_students = n;
    }
    if let Some(seed) = a.seed {
        s.synth.seed = seed;
    }
    if let Some(sd) = a.noise_sd {
        s.synth.noise_sd = sd;
    }
    for c in &a.corr {
        let (f, r) = c.split_once('=').ok_or_else(|| {
            Error::InvalidArgument(format!("--corr expects FEATURE=R, got `{c}`"))
        })?;
        s.set(&format!("synth.corr.{}", f.trim()), r)?;
    }
    let spec = s.synth_spec()?;
    let records = generate_synthetic(&spec)?;
    let mut buf = Vec::new();
    write_cohort_to(&mut buf, &records).map_err(|e| Error::io(&a.out, e))?;
    write_bytes(&a.out, &buf)?;

    let view = DatasetView::select("all", &records, &Feature::ALL)?;
    let corr = correlation_matrix_lenient(&view);
    println!("wrote {} students to {}", records.len(), a.out.display());
    println!("correlation with total:");
    for f in Feature::ALL {
        let r = corr.get(f.name(), "total").unwrap_or(f64::NAN);
        match spec.target_correlations.get(&f) {
            Some(t) => println!("  {f:<4} {r:.3} (target {t})"),
            None => println!("  {f:<4} {r:.3}"),
        }
    }
    Ok(())
}

fn eda(a: EdaArgs) -> Result<()> {
    let s = settings(&a.common)?;
    let cohort = load_cohort(&a.input, &s)?;
    let records = &cohort.records;
    let stem = a
        .input
        .file_stem()
        .map_or_else(|| "cohort".into(), |s| s.to_string_lossy().into_owned());

    let mut hists = Vec::new();
    for f in Feature::ALL {
        let values: Vec<f64> = records.iter().filter_map(|r| r.get(f)).collect();
        if !values.is_empty() {
            hists.push(histogram(f.name(), &values, a.bins)?);
        }
    }
    let totals: Vec<f64> = records.iter().map(|r| r.total()).collect();
    hists.push(histogram("total", &totals, a.bins)?);

    let view = DatasetView::select("all", records, &Feature::ALL)?;
    let corr = correlation_matrix_lenient(&view);

    let mut maps = Vec::new();
    for (x, y) in [(Feature::T1, Feature::T2), (Feature::Mte, Feature::Ete)] {
        match gradient_map(records, x, y, a.bins.max(2)) {
            Ok(m) => maps.push(m),
            Err(Error::Empty(_)) => {
                eprintln!("warning: no rows with both {x} and {y}; gradient map skipped")
            }
            Err(e) => return Err(e),
        }
    }

    let out = |ext: &str| a.out.join(format!("{stem}.{ext}.csv"));
    let mut buf = Vec::new();
    write_histograms(&mut buf, &hists).map_err(|e| Error::io(out("hist"), e))?;
    write_bytes(&out("hist"), &buf)?;
    buf.clear();
    write_correlations(&mut buf, &corr).map_err(|e| Error::io(out("corr"), e))?;
    write_bytes(&out("corr"), &buf)?;
    buf.clear();
    write_gradient_maps(&mut buf, &maps).map_err(|e| Error::io(out("gmap"), e))?;
    write_bytes(&out("gmap"), &buf)?;

    println!(
        "{} students ({} rejected rows, {} incomplete rows excluded from correlations)",
        records.len(),
        cohort.rejections.len(),
        view.excluded
    );
    for f in Feature::ALL {
        let r = corr.get(f.name(), "total").unwrap_or(f64::NAN);
        println!("corr({f}, total) = {}", fmt_corr(r));
    }
    println!(
        "wrote {}, {}, {}",
        out("hist").display(),
        out("corr").display(),
        out("gmap").display()
    );
    Ok(())
}

fn fmt_corr(r: f64) -> String {
    if r.is_finite() {
        format!("{r:.4}")
    } else {
        "NA".into()
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    version: u32,
    pipeline: String,
    view: &'a str,
    features: Vec<&'static str>,
    seed: u64,
    input: String,
    n_train: usize,
    excluded: usize,
    final_training_loss: Option<f64>,
    checkpoint: &'a str,
    config: &'a PipelineConfig,
}

fn train(a: TrainArgs) -> Result<()> {
    let s = settings(&a.common)?;
    let view_kind: ViewKind = a.view.parse()?;
    let pipeline: Pipeline = a.pipeline.parse()?;
    let seed = a.seed.unwrap_or(s.cv.seed);
    let cohort = load_cohort(&a.input, &s)?;
    let view = DatasetView::select(view_kind.name(), &cohort.records, view_kind.features())?;
    let model = fit_pipeline(pipeline, &s.pipeline, &view, seed)?;

    let manifest = Manifest {
        version: CHECKPOINT_VERSION,
        pipeline: pipeline.to_string(),
        view: view_kind.name(),
        features: view.feature_names.iter().map(|f| f.name()).collect(),
        seed,
        input: a.input.display().to_string(),
        n_train: view.len(),
        excluded: view.excluded,
        final_training_loss: model.final_training_loss(),
        checkpoint: "checkpoint.json",
        config: &s.pipeline,
    };
    let checkpoint = Checkpoint {
        version: CHECKPOINT_VERSION,
        pipeline,
        view: view_kind,
        feature_names: view.feature_names.clone(),
        seed,
        model,
    };
    write_bytes(
        &a.out.join("checkpoint.json"),
        (checkpoint.to_json()? + "\n").as_bytes(),
    )?;
    let manifest =
        serde_json::to_string_pretty(&manifest).map_err(|e| Error::Checkpoint(e.to_string()))?;
    write_bytes(&a.out.join("manifest.json"), (manifest + "\n").as_bytes())?;
    println!(
        "trained {pipeline} on {} ({} rows, {} excluded); wrote {}",
        view_kind.name(),
        view.len(),
        view.excluded,
        a.out.join("checkpoint.json").display()
    );
    Ok(())
}

fn evaluate(a: EvaluateArgs) -> Result<()> {
    let mut s = settings(&a.common)?;
    if let Some(seed) = a.seed {
        s.cv.seed = seed;
    }
    s.cv.validate()?;
    let views: Vec<ViewKind> = if a.view.is_empty() {
        ViewKind::ALL.to_vec()
    } else {
        a.view.iter().map(|v| v.parse()).collect::<Result<_>>()?
    };
    let plan = if a.all_pipelines {
        full_plan(&views)
    } else if a.pipeline.is_empty() {
        return Err(Error::InvalidArgument(
            "give --pipeline or --all-pipelines".into(),
        ));
    } else {
        let pipelines: Vec<Pipeline> = a
            .pipeline
            .iter()
            .map(|p| p.parse())
            .collect::<Result<_>>()?;
        cross(&views, &pipelines)
    };
    let cohort = load_cohort(&a.input, &s)?;
    let cells = run_experiment_matrix(&cohort.records, &plan, &s.pipeline, &s.cv);

    let mut buf = Vec::new();
    write_results_csv(&mut buf, &cells).map_err(|e| Error::io(&a.out, e))?;
    write_bytes(&a.out, &buf)?;
    print!("{}", format_results_text(&cells));
    println!("wrote {}", a.out.display());

    match cells
        .iter()
        .find_map(|c| c.outcome.as_ref().err().map(|e| (c, e)))
    {
        None => Ok(()),
        Some((cell, failure)) => {
            let failed = cells.iter().filter(|c| c.outcome.is_err()).count();
            eprintln!("{failed} of {} cells failed", cells.len());
            Err(Error::Experiment {
                kind: failure.kind,
                message: format!(
                    "{} on {}: {}",
                    cell.pipeline,
                    cell.view.name(),
                    failure.message
                ),
            })
        }
    }
}

fn predict(a: PredictArgs) -> Result<()> {
    let s = settings(&a.common)?;
    let cp = Checkpoint::load(&a.checkpoint)?;
    let view_kind: ViewKind = match &a.view {
        Some(v) => v.parse()?,
        None => cp.view,
    };
    let features = view_kind.features();
    if features.len() != cp.feature_names.len() {
        return Err(Error::DimensionMismatch {
            context: "checkpoint features vs input view",
            expected: cp.feature_names.len(),
            got: features.len(),
        });
    }
    if features != cp.feature_names.as_slice() {
        return Err(Error::InvalidArgument(format!(
            "checkpoint was trained on ({}) but the input view is ({})",
            names(&cp.feature_names),
            names(features)
        )));
    }
    let cohort = load_cohort(&a.input, &s)?;
    let view = DatasetView::select(view_kind.name(), &cohort.records, features)?;
    let pred = cp.model.predict(&view.matrix)?;

    let mut out = String::from("student_id,predicted_total\n");
    for (id, p) in view.student_ids.iter().zip(&pred) {
        out.push_str(&format!("{id},{p}\n"));
    }
    write_bytes(&a.out, out.as_bytes())?;
    if view.excluded > 0 {
        eprintln!(
            "warning: {} rows lacked view features and were skipped",
            view.excluded
        );
    }
    println!("wrote {} predictions to {}", pred.len(), a.out.display());
    Ok(())
}

fn names(fs: &[Feature]) -> String {
    fs.iter().map(|f| f.name()).collect::<Vec<_>>().join(", ")
}
