//! C ABI over the `gradecast` library.
//!
//! Objects cross the boundary as opaque handles created by `gc_*_new`/`load`
//! style functions and released with the matching `gc_*_free`. Every fallible
//! function returns a `GcStatus`; on failure the message is available from
//! `gc_last_error_message` on the same thread. Panics never unwind into the
//! caller and are reported as `GC_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use gradecast::config::Settings;
use gradecast::data::{
    composite_score, AssessmentRecord, DatasetView, Feature, Maxima, ViewKind, WeightVector,
};
use gradecast::eda::pearson;
use gradecast::eval::shuffle_split_cv;
use gradecast::ingest::{generate_synthetic, parse_cohort, SynthSpec};
use gradecast::matrix::Matrix;
use gradecast::pipeline::{fit_pipeline, Checkpoint, Pipeline, CHECKPOINT_VERSION};
use gradecast::{Error, ErrorKind};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GcStatus {
    Ok = 0,
    NullPointer = 1,
    Io = 2,
    Data = 3,
    Usage = 4,
    Numerical = 5,
    Panic = 6,
}

/// Assessment components in chronological order.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GcFeature {
    T1 = 0,
    T2 = 1,
    Cw = 2,
    Mte = 3,
    Ete = 4,
}

impl From<GcFeature> for Feature {
    fn from(f: GcFeature) -> Feature {
        Feature::ALL[f as usize]
    }
}

/// Cross-validated metrics: mean and population std over folds.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct GcMetrics {
    pub r2_mean: f64,
    pub r2_std: f64,
    pub mae_mean: f64,
    pub mae_std: f64,
    pub mse_mean: f64,
    pub mse_std: f64,
    pub rmse_mean: f64,
    pub rmse_std: f64,
}

/// Parsed or generated student records.
pub struct GcCohort {
    records: Vec<AssessmentRecord>,
}

/// A fitted pipeline with its view metadata.
pub struct GcModel {
    checkpoint: Checkpoint,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> GcStatus {
    match e.kind() {
        ErrorKind::Io => GcStatus::Io,
        ErrorKind::Data => GcStatus::Data,
        ErrorKind::Usage => GcStatus::Usage,
        ErrorKind::Numerical => GcStatus::Numerical,
    }
}

struct Failure(GcStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(GcStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, recording any error or panic as the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> GcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            GcStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {msg}"));
            GcStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(GcStatus::Usage, format!("{what} is not valid UTF-8")))
}

unsafe fn write_out<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn settings_arg(p: *const c_char) -> Result<Settings, Failure> {
    let mut s = Settings::default();
    if !p.is_null() {
        s.apply_str(str_arg(p, "settings")?)?;
    }
    Ok(s)
}

/// Message of the last failed call on this thread, or null. The pointer is
/// valid until the next `gc_*` call on the same thread.
#[no_mangle]
pub extern "C" fn gc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn gc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// `Σ weights[i]·scores[i]` over the first `n` components in chronological
/// order. Scores must lie in [0, 100]; weights must be non-negative and sum
/// to 1.
///
/// # Safety
/// `scores` and `weights` must point to `n` readable doubles; `out` to one
/// writable double.
#[no_mangle]
pub unsafe extern "C" fn gc_composite_score(
    scores: *const f64,
    weights: *const f64,
    n: usize,
    out: *mut f64,
) -> GcStatus {
    guard(|| {
        if scores.is_null() || weights.is_null() {
            return Err(null("scores or weights"));
        }
        if n == 0 || n > Feature::ALL.len() {
            return Err(Failure(
                GcStatus::Usage,
                format!("component count {n} must lie in 1..=5"),
            ));
        }
        let s = std::slice::from_raw_parts(scores, n);
        let w = WeightVector::new(std::slice::from_raw_parts(weights, n).to_vec())?;
        let mut all = [None; 5];
        for (slot, v) in all.iter_mut().zip(s) {
            *slot = Some(*v);
        }
        let rec = AssessmentRecord::new("ffi", all, 0.0, &Maxima::default())?;
        let value = composite_score(&rec, &w, &Feature::ALL[..n])?;
        write_out(out, value, "out")
    })
}

/// Loads a cohort CSV. Rejected rows are skipped.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gc_cohort_load(path: *const c_char, out: *mut *mut GcCohort) -> GcStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        let file = parse_cohort(path, &Maxima::default())?;
        write_out(
            out,
            Box::into_raw(Box::new(GcCohort {
                records: file.records,
            })),
            "out",
        )
    })
}

/// Generates a synthetic cohort with default calibration.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gc_cohort_synthetic(
    n_students: usize,
    seed: u64,
    out: *mut *mut GcCohort,
) -> GcStatus {
    guard(|| {
        let spec = SynthSpec {
            n_students,
            seed,
            ..SynthSpec::default()
        };
        let records = generate_synthetic(&spec)?;
        write_out(out, Box::into_raw(Box::new(GcCohort { records })), "out")
    })
}

/// # Safety
/// `cohort` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gc_cohort_len(cohort: *const GcCohort, out: *mut usize) -> GcStatus {
    guard(|| {
        let c = cohort.as_ref().ok_or_else(|| null("cohort"))?;
        write_out(out, c.records.len(), "out")
    })
}

/// Pearson correlation of a component with the total over records where the
/// component is present.
///
/// # Safety
/// `cohort` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gc_cohort_correlation(
    cohort: *const GcCohort,
    feature: GcFeature,
    out: *mut f64,
) -> GcStatus {
    guard(|| {
        let c = cohort.as_ref().ok_or_else(|| null("cohort"))?;
        let f = Feature::from(feature);
        let (xs, ys): (Vec<f64>, Vec<f64>) = c
            .records
            .iter()
            .filter_map(|r| Some((r.get(f)?, r.total())))
            .unzip();
        write_out(out, pearson(&xs, &ys)?, "out")
    })
}

/// Releases a cohort. Null is ignored.
///
/// # Safety
/// `cohort` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn gc_cohort_free(cohort: *mut GcCohort) {
    if !cohort.is_null() {
        drop(Box::from_raw(cohort));
    }
}

/// Cross-validates `pipeline` (e.g. "vae+et", "gru") on `view` ("d1",
/// "d2-mte", "d2-ete"). `settings` holds optional `key = value` lines and
/// may be null.
///
/// # Safety
/// String arguments must be NUL-terminated; `cohort` live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gc_evaluate(
    cohort: *const GcCohort,
    view: *const c_char,
    pipeline: *const c_char,
    seed: u64,
    settings: *const c_char,
    out: *mut GcMetrics,
) -> GcStatus {
    guard(|| {
        let c = cohort.as_ref().ok_or_else(|| null("cohort"))?;
        let view: ViewKind = str_arg(view, "view")?.parse()?;
        let pipeline: Pipeline = str_arg(pipeline, "pipeline")?.parse()?;
        let mut s = settings_arg(settings)?;
        s.cv.seed = seed;
        let v = DatasetView::select(view.name(), &c.records, view.features())?;
        let r = shuffle_split_cv(&v, pipeline, &s.pipeline, &s.cv)?;
        let m = GcMetrics {
            r2_mean: r.r2.mean,
            r2_std: r.r2.std,
            mae_mean: r.mae.mean,
            mae_std: r.mae.std,
            mse_mean: r.mse.mean,
            mse_std: r.mse.std,
            rmse_mean: r.rmse.mean,
            rmse_std: r.rmse.std,
        };
        write_out(out, m, "out")
    })
}

/// Fits `pipeline` on every complete row of `view`.
///
/// # Safety
/// String arguments must be NUL-terminated (`settings` may be null);
/// `cohort` live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gc_model_train(
    cohort: *const GcCohort,
    view: *const c_char,
    pipeline: *const c_char,
    seed: u64,
    settings: *const c_char,
    out: *mut *mut GcModel,
) -> GcStatus {
    guard(|| {
        let c = cohort.as_ref().ok_or_else(|| null("cohort"))?;
        let view: ViewKind = str_arg(view, "view")?.parse()?;
        let pipeline: Pipeline = str_arg(pipeline, "pipeline")?.parse()?;
        let s = settings_arg(settings)?;
        let v = DatasetView::select(view.name(), &c.records, view.features())?;
        let model = fit_pipeline(pipeline, &s.pipeline, &v, seed)?;
        let checkpoint = Checkpoint {
            version: CHECKPOINT_VERSION,
            pipeline,
            view,
            feature_names: v.feature_names,
            seed,
            model,
        };
        write_out(out, Box::into_raw(Box::new(GcModel { checkpoint })), "out")
    })
}

/// # Safety
/// `path` must be NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gc_model_load(path: *const c_char, out: *mut *mut GcModel) -> GcStatus {
    guard(|| {
        let checkpoint = Checkpoint::load(str_arg(path, "path")?)?;
        write_out(out, Box::into_raw(Box::new(GcModel { checkpoint })), "out")
    })
}

/// # Safety
/// `model` must be live; `path` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn gc_model_save(model: *const GcModel, path: *const c_char) -> GcStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        Ok(m.checkpoint.save(str_arg(path, "path")?)?)
    })
}

/// Number of input columns the model expects.
///
/// # Safety
/// `model` must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gc_model_n_features(model: *const GcModel, out: *mut usize) -> GcStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        write_out(out, m.checkpoint.feature_names.len(), "out")
    })
}

/// Predicts totals for `n_rows` row-major rows of `n_cols` raw feature
/// values, in the column order of the model's view.
///
/// # Safety
/// `x` must hold `n_rows * n_cols` doubles and `out` room for `n_rows`.
#[no_mangle]
pub unsafe extern "C" fn gc_model_predict(
    model: *const GcModel,
    x: *const f64,
    n_rows: usize,
    n_cols: usize,
    out: *mut f64,
) -> GcStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        if n_rows == 0 {
            return Ok(());
        }
        if x.is_null() || out.is_null() {
            return Err(null("x or out"));
        }
        let len = n_rows
            .checked_mul(n_cols)
            .ok_or_else(|| Failure(GcStatus::Usage, "n_rows * n_cols overflows".into()))?;
        let data = std::slice::from_raw_parts(x, len).to_vec();
        let pred = m
            .checkpoint
            .model
            .predict(&Matrix::from_vec(n_rows, n_cols, data)?)?;
        std::slice::from_raw_parts_mut(out, n_rows).copy_from_slice(&pred);
        Ok(())
    })
}

/// Releases a model. Null is ignored.
///
/// # Safety
/// `model` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn gc_model_free(model: *mut GcModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}
