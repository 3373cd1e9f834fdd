//! C ABI for the grading pipeline.
//!
//! Conventions: every fallible call returns a [`GsStatus`] and writes its
//! result through out-pointers; datasets and models are opaque handles
//! freed by their matching `*_free` function; the most recent failure's
//! message is available per thread via [`gs_last_error_message`]. Panics
//! never cross the boundary — they convert to [`GsStatus::Internal`].

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use libc::c_char;

use gradescore::corpus::{generate_synthetic, Dataset, SynthSpec};
use gradescore::embeddings::TrainParams;
use gradescore::error::Error;
use gradescore::evaluation::{quadratic_weighted_kappa, ModelKind};
use gradescore::forest::ForestParams;
use gradescore::pipeline::{load_model, run_pipeline, save_model, PipelineModel, RunConfig};

/// Status code returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GsStatus {
    /// Success.
    Ok = 0,
    /// A pointer was null, a parameter was out of range, or sizes disagreed.
    InvalidArgument = 1,
    /// The file system failed (missing file, unwritable path, ...).
    Io = 2,
    /// A dataset or model file exists but does not parse.
    Parse = 3,
    /// A numeric input was non-finite or outside its mathematical domain.
    Domain = 4,
    /// An internal invariant failed; please report.
    Internal = 5,
}

/// The three featurizations a model can use.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GsModelKind {
    /// TF-IDF bag of words.
    Bow = 0,
    /// Averaged skip-gram word vectors.
    Vectors = 1,
    /// Histogram over k-means clusters of word vectors.
    Centroids = 2,
}

impl From<GsModelKind> for ModelKind {
    fn from(kind: GsModelKind) -> ModelKind {
        match kind {
            GsModelKind::Bow => ModelKind::Bow,
            GsModelKind::Vectors => ModelKind::Vectors,
            GsModelKind::Centroids => ModelKind::Centroids,
        }
    }
}

impl From<ModelKind> for GsModelKind {
    fn from(kind: ModelKind) -> GsModelKind {
        match kind {
            ModelKind::Bow => GsModelKind::Bow,
            ModelKind::Vectors => GsModelKind::Vectors,
            ModelKind::Centroids => GsModelKind::Centroids,
        }
    }
}

/// Opaque handle to a loaded or synthesized dataset.
pub struct GsDataset(Dataset);

/// Opaque handle to a trained grading model.
pub struct GsModel(PipelineModel);

/// Training settings, passed by value. Get defaults from
/// [`gs_train_options_default`] and override what you need.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct GsTrainOptions {
    /// Featurization to train.
    pub kind: GsModelKind,
    /// Scores live on 0..=max_marks.
    pub max_marks: u32,
    /// Train fraction of the split, strictly between 0 and 1.
    pub ratio: f64,
    /// Master seed; all randomness derives from it.
    pub seed: u64,
    /// Cluster count for the centroids featurization.
    pub k: usize,
    /// Word-vector dimensionality.
    pub dim: usize,
    /// Skip-gram context window.
    pub window: usize,
    /// Skip-gram passes over the corpus.
    pub epochs: usize,
    /// Trees in the random forest.
    pub trees: usize,
    /// Minimum corpus frequency for vocabulary membership.
    pub min_count: u64,
    /// Nonzero: embeddings also learn from held-out text (never scores).
    pub transductive: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(msg).expect("interior NULs replaced");
    });
}

fn status_of(err: &Error) -> GsStatus {
    match err {
        Error::Io(_) | Error::MissingFile { .. } => GsStatus::Io,
        Error::Csv(_)
        | Error::InvalidHeader { .. }
        | Error::MalformedRow { .. }
        | Error::InvalidScore { .. }
        | Error::DuplicateId { .. }
        | Error::ModelFormat { .. } => GsStatus::Parse,
        Error::NonFiniteInput { .. } | Error::DomainError { .. } => GsStatus::Domain,
        _ => GsStatus::InvalidArgument,
    }
}

fn fail(err: Error) -> GsStatus {
    let status = status_of(&err);
    set_error(err.to_string());
    status
}

fn invalid(msg: impl Into<String>) -> GsStatus {
    set_error(msg);
    GsStatus::InvalidArgument
}

fn guard(f: impl FnOnce() -> GsStatus) -> GsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic");
            GsStatus::Internal
        }
    }
}

/// Reads a non-null, NUL-terminated UTF-8 string argument.
///
/// # Safety
/// `ptr`, when non-null, must point to a NUL-terminated string.
unsafe fn cstr<'a>(ptr: *const c_char, name: &str) -> Result<&'a str, GsStatus> {
    if ptr.is_null() {
        return Err(invalid(format!("null pointer: {name}")));
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map_err(|_| invalid(format!("{name} is not valid UTF-8")))
}

/// Library version as a static NUL-terminated string; never null.
#[no_mangle]
pub extern "C" fn gs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Message for this thread's most recent failure; never null, empty before
/// the first failure. The pointer stays valid until the next failing call
/// on the same thread.
#[no_mangle]
pub extern "C" fn gs_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Loads a dataset CSV (header `id,question,answer,score`, scores on
/// 0..=max_marks) into a new handle.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be a valid pointer.
/// On success `*out` owns the dataset and must be released with
/// [`gs_dataset_free`].
#[no_mangle]
pub unsafe extern "C" fn gs_dataset_load(
    path: *const c_char,
    max_marks: u32,
    out: *mut *mut GsDataset,
) -> GsStatus {
    guard(|| {
        if out.is_null() {
            return invalid("null pointer: out");
        }
        let path = match cstr(path, "path") {
            Ok(p) => p,
            Err(status) => return status,
        };
        match Dataset::load(Path::new(path), max_marks) {
            Ok(ds) => {
                unsafe { *out = Box::into_raw(Box::new(GsDataset(ds))) };
                GsStatus::Ok
            }
            Err(err) => fail(err),
        }
    })
}

/// Generates a synthetic dataset: `records` answers spread over
/// `questions` questions, scored on 0..=max_marks, from `seed`.
///
/// # Safety
/// `out` must be a valid pointer. On success `*out` owns the dataset and
/// must be released with [`gs_dataset_free`].
#[no_mangle]
pub unsafe extern "C" fn gs_dataset_synth(
    records: usize,
    max_marks: u32,
    questions: usize,
    seed: u64,
    out: *mut *mut GsDataset,
) -> GsStatus {
    guard(|| {
        if out.is_null() {
            return invalid("null pointer: out");
        }
        let spec = SynthSpec {
            records,
            max_marks,
            questions,
            ..SynthSpec::default()
        };
        match generate_synthetic(&spec, seed) {
            Ok(ds) => {
                unsafe { *out = Box::into_raw(Box::new(GsDataset(ds))) };
                GsStatus::Ok
            }
            Err(err) => fail(err),
        }
    })
}

/// Number of records in the dataset; 0 for a null handle.
///
/// # Safety
/// `ds`, when non-null, must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn gs_dataset_len(ds: *const GsDataset) -> usize {
    if ds.is_null() {
        return 0;
    }
    unsafe { (*ds).0.len() }
}

/// The dataset's score scale (largest attainable mark); 0 for a null handle.
///
/// # Safety
/// `ds`, when non-null, must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn gs_dataset_max_marks(ds: *const GsDataset) -> u32 {
    if ds.is_null() {
        return 0;
    }
    unsafe { (*ds).0.max_marks() }
}

/// Releases a dataset handle; null is a no-op.
///
/// # Safety
/// `ds` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gs_dataset_free(ds: *mut GsDataset) {
    if !ds.is_null() {
        drop(unsafe { Box::from_raw(ds) });
    }
}

/// Default training settings for one featurization kind.
#[no_mangle]
pub extern "C" fn gs_train_options_default(kind: GsModelKind) -> GsTrainOptions {
    let cfg = RunConfig::new(kind.into());
    GsTrainOptions {
        kind,
        max_marks: cfg.max_marks,
        ratio: cfg.ratio,
        seed: cfg.seed,
        k: cfg.k,
        dim: cfg.embed.dim,
        window: cfg.embed.window,
        epochs: cfg.embed.epochs,
        trees: cfg.forest.n_trees,
        min_count: cfg.embed.min_count,
        transductive: cfg.transductive,
    }
}

fn config_from(opts: &GsTrainOptions) -> RunConfig {
    RunConfig {
        kind: opts.kind.into(),
        max_marks: opts.max_marks,
        ratio: opts.ratio,
        seed: opts.seed,
        k: opts.k,
        transductive: opts.transductive,
        embed: TrainParams {
            dim: opts.dim,
            window: opts.window,
            epochs: opts.epochs,
            min_count: opts.min_count,
            ..TrainParams::default()
        },
        forest: ForestParams {
            n_trees: opts.trees,
            ..ForestParams::default()
        },
        stopwords: None,
    }
}

/// Trains one model on `ds` per `opts`: splits by the seed, fits on the
/// training fold, and reports mean test-fold quadratic weighted kappa
/// through `out_mean_kappa` (which may be null if not wanted).
///
/// # Safety
/// `ds` must be a live dataset handle; `opts` and `out_model` must be
/// valid pointers. On success `*out_model` owns the model and must be
/// released with [`gs_model_free`].
#[no_mangle]
pub unsafe extern "C" fn gs_train(
    ds: *const GsDataset,
    opts: *const GsTrainOptions,
    out_model: *mut *mut GsModel,
    out_mean_kappa: *mut f64,
) -> GsStatus {
    guard(|| {
        if ds.is_null() {
            return invalid("null pointer: ds");
        }
        if opts.is_null() {
            return invalid("null pointer: opts");
        }
        if out_model.is_null() {
            return invalid("null pointer: out_model");
        }
        let cfg = config_from(unsafe { &*opts });
        match run_pipeline(&cfg, unsafe { &(*ds).0 }) {
            Ok((model, report)) => {
                if !out_mean_kappa.is_null() {
                    unsafe { *out_mean_kappa = report.mean_kappa() };
                }
                unsafe { *out_model = Box::into_raw(Box::new(GsModel(model))) };
                GsStatus::Ok
            }
            Err(err) => fail(err),
        }
    })
}

/// Saves a model to a text file.
///
/// # Safety
/// `model` must be a live handle; `path` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn gs_model_save(model: *const GsModel, path: *const c_char) -> GsStatus {
    guard(|| {
        if model.is_null() {
            return invalid("null pointer: model");
        }
        let path = match cstr(path, "path") {
            Ok(p) => p,
            Err(status) => return status,
        };
        match save_model(unsafe { &(*model).0 }, Path::new(path)) {
            Ok(()) => GsStatus::Ok,
            Err(err) => fail(err),
        }
    })
}

/// Loads a model file saved by [`gs_model_save`] (or the CLI).
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be a valid pointer.
/// On success `*out` owns the model and must be released with
/// [`gs_model_free`].
#[no_mangle]
pub unsafe extern "C" fn gs_model_load(path: *const c_char, out: *mut *mut GsModel) -> GsStatus {
    guard(|| {
        if out.is_null() {
            return invalid("null pointer: out");
        }
        let path = match cstr(path, "path") {
            Ok(p) => p,
            Err(status) => return status,
        };
        match load_model(Path::new(path)) {
            Ok(model) => {
                unsafe { *out = Box::into_raw(Box::new(GsModel(model))) };
                GsStatus::Ok
            }
            Err(err) => fail(err),
        }
    })
}

/// The model's featurization kind. Returns `Bow` for a null handle.
///
/// # Safety
/// `model`, when non-null, must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn gs_model_kind(model: *const GsModel) -> GsModelKind {
    if model.is_null() {
        return GsModelKind::Bow;
    }
    unsafe { (*model).0.kind.into() }
}

/// The model's score scale (largest attainable mark); 0 for a null handle.
///
/// # Safety
/// `model`, when non-null, must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn gs_model_max_marks(model: *const GsModel) -> u32 {
    if model.is_null() {
        return 0;
    }
    unsafe { (*model).0.max_marks }
}

/// Grades one answer: featurizes `answer` and writes the predicted integer
/// mark (0..=max_marks) to `out_mark`.
///
/// # Safety
/// `model` must be a live handle; `answer` must be a NUL-terminated
/// string; `out_mark` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gs_model_grade(
    model: *const GsModel,
    answer: *const c_char,
    out_mark: *mut u32,
) -> GsStatus {
    guard(|| {
        if model.is_null() {
            return invalid("null pointer: model");
        }
        if out_mark.is_null() {
            return invalid("null pointer: out_mark");
        }
        let answer = match cstr(answer, "answer") {
            Ok(a) => a,
            Err(status) => return status,
        };
        match unsafe { &(*model).0 }.grade(answer) {
            Ok(mark) => {
                unsafe { *out_mark = mark };
                GsStatus::Ok
            }
            Err(err) => fail(err),
        }
    })
}

/// Releases a model handle; null is a no-op.
///
/// # Safety
/// `model` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gs_model_free(model: *mut GsModel) {
    if !model.is_null() {
        drop(unsafe { Box::from_raw(model) });
    }
}

/// Quadratic weighted kappa between two aligned score arrays of length
/// `len` on the scale 0..=max_marks, written to `out`.
///
/// # Safety
/// `a` and `b` must point to `len` readable u32 values (they may be null
/// only when `len` is 0); `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gs_qwk(
    a: *const u32,
    b: *const u32,
    len: usize,
    max_marks: u32,
    out: *mut f64,
) -> GsStatus {
    guard(|| {
        if out.is_null() {
            return invalid("null pointer: out");
        }
        if len > 0 && (a.is_null() || b.is_null()) {
            return invalid("null pointer: a or b with nonzero len");
        }
        let (a, b): (&[u32], &[u32]) = if len == 0 {
            (&[], &[])
        } else {
            unsafe {
                (
                    std::slice::from_raw_parts(a, len),
                    std::slice::from_raw_parts(b, len),
                )
            }
        };
        match quadratic_weighted_kappa(a, b, max_marks) {
            Ok(kappa) => {
                unsafe { *out = kappa };
                GsStatus::Ok
            }
            Err(err) => fail(err),
        }
    })
}
