//! Regression metrics, shuffle-split cross-validation and the
//! views × pipelines experiment matrix.
//!
//! MAE and MSE are normalized by the sample count. Fold standard deviations
//! use the population denominator (number of folds).

use std::fmt::Write as _;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{AssessmentRecord, DatasetView, ViewKind};
use crate::error::{Error, ErrorKind, Result};
use crate::pipeline::{fit_pipeline, FittedPipeline, Pipeline, PipelineConfig};
use crate::rng::SeededRng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    /// `None` when the true values are constant.
    pub r2: Option<f64>,
    pub mae: f64,
    pub mse: f64,
    pub rmse: f64,
}

impl Metrics {
    pub fn r2(&self) -> Result<f64> {
        self.r2.ok_or(Error::UndefinedR2)
    }
}

pub fn compute_metrics(y_true: &[f64], y_pred: &[f64]) -> Result<Metrics> {
    if y_true.len() != y_pred.len() {
        return Err(Error::DimensionMismatch {
            context: "metric predictions",
            expected: y_true.len(),
            got: y_pred.len(),
        });
    }
    if y_true.len() < 2 {
        return Err(Error::InvalidArgument(
            "metrics need at least 2 samples".into(),
        ));
    }
    if y_true.iter().chain(y_pred).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("metric input".into()));
    }
    let k = y_true.len() as f64;
    let mean = y_true.iter().sum::<f64>() / k;
    let (mut sse, mut sae, mut sst) = (0.0, 0.0, 0.0);
    for (t, p) in y_true.iter().zip(y_pred) {
        sse += (t - p) * (t - p);
        sae += (t - p).abs();
        sst += (t - mean) * (t - mean);
    }
    let mse = sse / k;
    Ok(Metrics {
        r2: (sst > 0.0).then(|| 1.0 - sse / sst),
        mae: sae / k,
        mse,
        rmse: mse.sqrt(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub per_fold: Vec<f64>,
    pub mean: f64,
    /// Population standard deviation across folds.
    pub std: f64,
}

impl MetricSummary {
    pub fn from_folds(per_fold: Vec<f64>) -> Self {
        let n = per_fold.len() as f64;
        let mean = per_fold.iter().sum::<f64>() / n;
        let std = (per_fold
            .iter()
            .map(|v| (v - mean) * (v - mean))
            .sum::<f64>()
            / n)
            .sqrt();
        MetricSummary {
            per_fold,
            mean,
            std,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub pipeline: Pipeline,
    pub view: String,
    pub n_folds: usize,
    pub seed: u64,
    pub r2: MetricSummary,
    pub mae: MetricSummary,
    pub mse: MetricSummary,
    pub rmse: MetricSummary,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CvConfig {
    pub n_folds: usize,
    pub test_fraction: f64,
    pub seed: u64,
}

impl Default for CvConfig {
    fn default() -> Self {
        CvConfig {
            n_folds: 5,
            test_fraction: 0.2,
            seed: 0,
        }
    }
}

impl CvConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_folds == 0 {
            return Err(Error::InvalidArgument("n_folds must be >= 1".into()));
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "test_fraction must lie in (0, 1), got {}",
                self.test_fraction
            )));
        }
        Ok(())
    }

    pub fn fold_seed(&self, fold: usize) -> u64 {
        self.seed.wrapping_add(fold as u64)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldSplit {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Fold `i` shuffles `0..n` with seed `seed + i`; the first
/// `⌈test_fraction · n⌉` indices are the test set.
pub fn fold_splits(n: usize, cfg: &CvConfig) -> Result<Vec<FoldSplit>> {
    cfg.validate()?;
    if n < 10 {
        return Err(Error::InvalidArgument(format!(
            "cross-validation needs at least 10 rows, got {n}"
        )));
    }
    let n_test = (cfg.test_fraction * n as f64).ceil() as usize;
    if n_test < 2 || n - n_test < 2 {
        return Err(Error::InvalidArgument(format!(
            "fold too small to evaluate: {n_test} test rows of {n}"
        )));
    }
    Ok((0..cfg.n_folds)
        .map(|i| {
            let mut perm = SeededRng::new(cfg.fold_seed(i)).permutation(n);
            let train = perm.split_off(n_test);
            FoldSplit { train, test: perm }
        })
        .collect())
}

/// Fits on the split's training rows only and scores the test rows.
pub fn fit_fold(
    view: &DatasetView,
    split: &FoldSplit,
    pipeline: Pipeline,
    cfg: &PipelineConfig,
    seed: u64,
) -> Result<(FittedPipeline, Metrics)> {
    let train = view.subset(&split.train);
    let test = view.subset(&split.test);
    let fitted = fit_pipeline(pipeline, cfg, &train, seed)?;
    let pred = fitted.predict(&test.matrix)?;
    let metrics = compute_metrics(&test.targets, &pred)?;
    Ok((fitted, metrics))
}

/// Runs every split (in parallel) and summarizes. Split `i` trains with
/// model seed `cv.fold_seed(i)`.
pub fn cv_on_splits(
    view: &DatasetView,
    splits: &[FoldSplit],
    pipeline: Pipeline,
    cfg: &PipelineConfig,
    cv: &CvConfig,
) -> Result<MetricsReport> {
    let folds = splits
        .par_iter()
        .enumerate()
        .map(|(i, s)| fit_fold(view, s, pipeline, cfg, cv.fold_seed(i)).map(|(_, m)| m))
        .collect::<Result<Vec<Metrics>>>()?;
    let r2 = folds.iter().map(|m| m.r2()).collect::<Result<Vec<_>>>()?;
    Ok(MetricsReport {
        pipeline,
        view: view.name.clone(),
        n_folds: folds.len(),
        seed: cv.seed,
        r2: MetricSummary::from_folds(r2),
        mae: MetricSummary::from_folds(folds.iter().map(|m| m.mae).collect()),
        mse: MetricSummary::from_folds(folds.iter().map(|m| m.mse).collect()),
        rmse: MetricSummary::from_folds(folds.iter().map(|m| m.rmse).collect()),
    })
}

pub fn shuffle_split_cv(
    view: &DatasetView,
    pipeline: Pipeline,
    cfg: &PipelineConfig,
    cv: &CvConfig,
) -> Result<MetricsReport> {
    let splits = fold_splits(view.len(), cv)?;
    cv_on_splits(view, &splits, pipeline, cfg, cv)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellFailure {
    pub kind: ErrorKind,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentCell {
    pub view: ViewKind,
    pub pipeline: Pipeline,
    /// A failed cell keeps its error; the rest of the matrix still runs.
    pub outcome: std::result::Result<MetricsReport, CellFailure>,
}

/// Every `(view, pipeline)` pair in `views × pipelines`, in order.
pub fn cross(views: &[ViewKind], pipelines: &[Pipeline]) -> Vec<(ViewKind, Pipeline)> {
    views
        .iter()
        .flat_map(|v| pipelines.iter().map(move |p| (*v, *p)))
        .collect()
}

/// Each view's full pipeline set.
pub fn full_plan(views: &[ViewKind]) -> Vec<(ViewKind, Pipeline)> {
    views
        .iter()
        .flat_map(|v| Pipeline::all_for_view(*v).into_iter().map(move |p| (*v, p)))
        .collect()
}

pub fn run_experiment_matrix(
    records: &[AssessmentRecord],
    plan: &[(ViewKind, Pipeline)],
    cfg: &PipelineConfig,
    cv: &CvConfig,
) -> Vec<ExperimentCell> {
    plan.par_iter()
        .map(|&(view, pipeline)| {
            let outcome = DatasetView::select(view.name(), records, view.features())
                .and_then(|v| shuffle_split_cv(&v, pipeline, cfg, cv))
                .map_err(|e| CellFailure {
                    kind: e.kind(),
                    message: e.to_string(),
                });
            ExperimentCell {
                view,
                pipeline,
                outcome,
            }
        })
        .collect()
}

pub const RESULTS_HEADER: &str =
    "pipeline,view,r2_mean,r2_std,mae_mean,mae_std,mse_mean,mse_std,rmse_mean,rmse_std";

/// Failed cells are written with `NA` metrics.
pub fn write_results_csv<W: Write>(mut w: W, cells: &[ExperimentCell]) -> std::io::Result<()> {
    writeln!(w, "{RESULTS_HEADER}")?;
    for c in cells {
        match &c.outcome {
            Ok(r) => {
                write!(w, "{},{}", c.pipeline, c.view.name())?;
                for s in [&r.r2, &r.mae, &r.mse, &r.rmse] {
                    write!(w, ",{:.6},{:.6}", s.mean, s.std)?;
                }
                writeln!(w)?;
            }
            Err(_) => writeln!(w, "{},{}{}", c.pipeline, c.view.name(), ",NA".repeat(8))?,
        }
    }
    Ok(())
}

/// Human-readable table, one block per view.
pub fn format_results_text(cells: &[ExperimentCell]) -> String {
    let mut out = String::new();
    let mut current = None;
    for c in cells {
        if current != Some(c.view) {
            current = Some(c.view);
            if !out.is_empty() {
                out.push('\n');
            }
            let _ = writeln!(out, "view {} ({})", c.view.name(), feature_list(c.view));
            let _ = writeln!(
                out,
                "  {:<10} {:>17} {:>17} {:>19} {:>17}",
                "pipeline", "R2", "MAE", "MSE", "RMSE"
            );
        }
        match &c.outcome {
            Ok(r) => {
                let _ = writeln!(
                    out,
                    "  {:<10} {:>8.3} ± {:<6.3} {:>8.3} ± {:<6.3} {:>9.3} ± {:<7.3} {:>8.3} ± {:<6.3}",
                    c.pipeline.to_string(),
                    r.r2.mean,
                    r.r2.std,
                    r.mae.mean,
                    r.mae.std,
                    r.mse.mean,
                    r.mse.std,
                    r.rmse.mean,
                    r.rmse.std
                );
            }
            Err(e) => {
                let _ = writeln!(
                    out,
                    "  {:<10} failed: {}",
                    c.pipeline.to_string(),
                    e.message
                );
            }
        }
    }
    let mut trimmed: String = out
        .lines()
        .map(|l| l.trim_end().to_string() + "\n")
        .collect();
    trimmed.shrink_to_fit();
    trimmed
}

fn feature_list(v: ViewKind) -> String {
    v.features()
        .iter()
        .map(|f| f.name())
        .collect::<Vec<_>>()
        .join(", ")
}
