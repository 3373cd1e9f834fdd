//! Exercises the C ABI end to end, exactly as a foreign caller would:
//! through raw pointers and status codes.

use std::ffi::{CStr, CString};
use std::ptr;

use gradescore_ffi::*;

fn last_error() -> String {
    unsafe {
        CStr::from_ptr(gs_last_error_message())
            .to_str()
            .expect("error messages are UTF-8")
            .to_string()
    }
}

#[test]
fn version_is_a_nonempty_c_string() {
    let version = unsafe { CStr::from_ptr(gs_version()) };
    assert!(!version.to_bytes().is_empty());
}

#[test]
fn full_session_synth_train_grade_save_load() {
    unsafe {
        let mut ds: *mut GsDataset = ptr::null_mut();
        let status = gs_dataset_synth(60, 3, 2, 3, &mut ds);
        assert_eq!(status, GsStatus::Ok, "{}", last_error());
        assert_eq!(gs_dataset_len(ds), 60);
        assert_eq!(gs_dataset_max_marks(ds), 3);

        let mut opts = gs_train_options_default(GsModelKind::Centroids);
        assert_eq!(opts.trees, 100);
        assert!((opts.ratio - 0.7).abs() < 1e-12);
        opts.max_marks = 3;
        opts.dim = 8;
        opts.window = 2;
        opts.epochs = 2;
        opts.trees = 10;
        opts.k = 4;
        opts.seed = 11;

        let mut model: *mut GsModel = ptr::null_mut();
        let mut kappa = f64::NAN;
        let status = gs_train(ds, &opts, &mut model, &mut kappa);
        assert_eq!(status, GsStatus::Ok, "{}", last_error());
        assert!(kappa.is_finite());
        assert!(kappa <= 1.0);
        assert_eq!(gs_model_kind(model), GsModelKind::Centroids);
        assert_eq!(gs_model_max_marks(model), 3);

        let answer = CString::new("kwaa kwab kwac filler words here").unwrap();
        let mut mark = u32::MAX;
        let status = gs_model_grade(model, answer.as_ptr(), &mut mark);
        assert_eq!(status, GsStatus::Ok, "{}", last_error());
        assert!(mark <= 3);

        let dir = tempfile::tempdir().unwrap();
        let path = CString::new(
            dir.path()
                .join("model.txt")
                .to_str()
                .unwrap()
                .to_string(),
        )
        .unwrap();
        assert_eq!(gs_model_save(model, path.as_ptr()), GsStatus::Ok);

        let mut loaded: *mut GsModel = ptr::null_mut();
        assert_eq!(gs_model_load(path.as_ptr(), &mut loaded), GsStatus::Ok);
        let mut mark_again = u32::MAX;
        let status = gs_model_grade(loaded, answer.as_ptr(), &mut mark_again);
        assert_eq!(status, GsStatus::Ok, "{}", last_error());
        assert_eq!(mark, mark_again, "round trip changed a prediction");

        gs_model_free(loaded);
        gs_model_free(model);
        gs_dataset_free(ds);
    }
}

#[test]
fn missing_files_and_null_pointers_report_cleanly() {
    unsafe {
        let mut ds: *mut GsDataset = ptr::null_mut();
        let path = CString::new("definitely_missing_answers.csv").unwrap();
        let status = gs_dataset_load(path.as_ptr(), 5, &mut ds);
        assert_eq!(status, GsStatus::Io);
        assert!(
            last_error().contains("definitely_missing_answers.csv"),
            "diagnostic must name the file: {}",
            last_error()
        );
        assert!(ds.is_null(), "out must be untouched on failure");

        assert_eq!(
            gs_dataset_load(ptr::null(), 5, &mut ds),
            GsStatus::InvalidArgument
        );
        assert_eq!(
            gs_dataset_load(path.as_ptr(), 5, ptr::null_mut()),
            GsStatus::InvalidArgument
        );
        assert!(!last_error().is_empty());

        let mut model: *mut GsModel = ptr::null_mut();
        assert_eq!(
            gs_model_load(path.as_ptr(), &mut model),
            GsStatus::Io
        );

        // Null handles degrade to zero values, never crashes.
        assert_eq!(gs_dataset_len(ptr::null()), 0);
        assert_eq!(gs_dataset_max_marks(ptr::null()), 0);
        assert_eq!(gs_model_max_marks(ptr::null()), 0);
        gs_dataset_free(ptr::null_mut());
        gs_model_free(ptr::null_mut());
    }
}

#[test]
fn bad_training_options_return_invalid_argument() {
    unsafe {
        let mut ds: *mut GsDataset = ptr::null_mut();
        assert_eq!(gs_dataset_synth(30, 3, 1, 1, &mut ds), GsStatus::Ok);

        let mut opts = gs_train_options_default(GsModelKind::Bow);
        opts.max_marks = 3;
        opts.ratio = 1.5;
        let mut model: *mut GsModel = ptr::null_mut();
        let status = gs_train(ds, &opts, &mut model, ptr::null_mut());
        assert_eq!(status, GsStatus::InvalidArgument);
        assert!(last_error().contains("1.5"), "{}", last_error());

        gs_dataset_free(ds);
    }
}

#[test]
fn qwk_through_the_abi() {
    unsafe {
        let mut kappa = f64::NAN;
        let a = [0u32, 1, 2];
        let b = [2u32, 1, 0];
        let status = gs_qwk(a.as_ptr(), b.as_ptr(), 3, 2, &mut kappa);
        assert_eq!(status, GsStatus::Ok, "{}", last_error());
        assert!((kappa - (-1.0)).abs() < 1e-12);

        let status = gs_qwk(a.as_ptr(), a.as_ptr(), 3, 2, &mut kappa);
        assert_eq!(status, GsStatus::Ok);
        assert_eq!(kappa, 1.0);

        // Empty input is a proper error, not a crash.
        assert_eq!(
            gs_qwk(ptr::null(), ptr::null(), 0, 2, &mut kappa),
            GsStatus::InvalidArgument
        );
        // Out-of-range scores are rejected.
        let high = [9u32, 1, 2];
        assert_eq!(
            gs_qwk(high.as_ptr(), b.as_ptr(), 3, 2, &mut kappa),
            GsStatus::InvalidArgument
        );
    }
}
