#ifndef GRADESCORE_H
#define GRADESCORE_H

/* Generated by cbindgen from gradescore-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code returned by every fallible function.
 */
typedef enum GsStatus {
  /**
   * Success.
   */
  GS_STATUS_OK = 0,
  /**
   * A pointer was null, a parameter was out of range, or sizes disagreed.
   */
  GS_STATUS_INVALID_ARGUMENT = 1,
  /**
   * The file system failed (missing file, unwritable path, ...).
   */
  GS_STATUS_IO = 2,
  /**
   * A dataset or model file exists but does not parse.
   */
  GS_STATUS_PARSE = 3,
  /**
   * A numeric input was non-finite or outside its mathematical domain.
   */
  GS_STATUS_DOMAIN = 4,
  /**
   * An internal invariant failed; please report.
   */
  GS_STATUS_INTERNAL = 5,
} GsStatus;

/**
 * The three featurizations a model can use.
 */
typedef enum GsModelKind {
  /**
   * TF-IDF bag of words.
   */
  GS_MODEL_KIND_BOW = 0,
  /**
   * Averaged skip-gram word vectors.
   */
  GS_MODEL_KIND_VECTORS = 1,
  /**
   * Histogram over k-means clusters of word vectors.
   */
  GS_MODEL_KIND_CENTROIDS = 2,
} GsModelKind;

/**
 * Opaque handle to a loaded or synthesized dataset.
 */
typedef struct GsDataset GsDataset;

/**
 * Opaque handle to a trained grading model.
 */
typedef struct GsModel GsModel;

/**
 * Training settings, passed by value. Get defaults from
 * [`gs_train_options_default`] and override what you need.
 */
typedef struct GsTrainOptions {
  /**
   * Featurization to train.
   */
  enum GsModelKind kind;
  /**
   * Scores live on 0..=max_marks.
   */
  uint32_t max_marks;
  /**
   * Train fraction of the split, strictly between 0 and 1.
   */
  double ratio;
  /**
   * Master seed; all randomness derives from it.
   */
  uint64_t seed;
  /**
   * Cluster count for the centroids featurization.
   */
  size_t k;
  /**
   * Word-vector dimensionality.
   */
  size_t dim;
  /**
   * Skip-gram context window.
   */
  size_t window;
  /**
   * Skip-gram passes over the corpus.
   */
  size_t epochs;
  /**
   * Trees in the random forest.
   */
  size_t trees;
  /**
   * Minimum corpus frequency for vocabulary membership.
   */
  uint64_t min_count;
  /**
   * Nonzero: embeddings also learn from held-out text (never scores).
   */
  bool transductive;
} GsTrainOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string; never null.
 */
const char *gs_version(void);

/**
 * Message for this thread's most recent failure; never null, empty before
 * the first failure. The pointer stays valid until the next failing call
 * on the same thread.
 */
const char *gs_last_error_message(void);

/**
 * Loads a dataset CSV (header `id,question,answer,score`, scores on
 * 0..=max_marks) into a new handle.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be a valid pointer.
 * On success `*out` owns the dataset and must be released with
 * [`gs_dataset_free`].
 */
enum GsStatus gs_dataset_load(const char *path, uint32_t max_marks, struct GsDataset **out);

/**
 * Generates a synthetic dataset: `records` answers spread over
 * `questions` questions, scored on 0..=max_marks, from `seed`.
 *
 * # Safety
 * `out` must be a valid pointer. On success `*out` owns the dataset and
 * must be released with [`gs_dataset_free`].
 */
enum GsStatus gs_dataset_synth(size_t records,
                               uint32_t max_marks,
                               size_t questions,
                               uint64_t seed,
                               struct GsDataset **out);

/**
 * Number of records in the dataset; 0 for a null handle.
 *
 * # Safety
 * `ds`, when non-null, must be a live handle from this library.
 */
size_t gs_dataset_len(const struct GsDataset *ds);

/**
 * The dataset's score scale (largest attainable mark); 0 for a null handle.
 *
 * # Safety
 * `ds`, when non-null, must be a live handle from this library.
 */
uint32_t gs_dataset_max_marks(const struct GsDataset *ds);

/**
 * Releases a dataset handle; null is a no-op.
 *
 * # Safety
 * `ds` must be null or a handle not yet freed.
 */
void gs_dataset_free(struct GsDataset *ds);

/**
 * Default training settings for one featurization kind.
 */
struct GsTrainOptions gs_train_options_default(enum GsModelKind kind);

/**
 * Trains one model on `ds` per `opts`: splits by the seed, fits on the
 * training fold, and reports mean test-fold quadratic weighted kappa
 * through `out_mean_kappa` (which may be null if not wanted).
 *
 * # Safety
 * `ds` must be a live dataset handle; `opts` and `out_model` must be
 * valid pointers. On success `*out_model` owns the model and must be
 * released with [`gs_model_free`].
 */
enum GsStatus gs_train(const struct GsDataset *ds,
                       const struct GsTrainOptions *opts,
                       struct GsModel **out_model,
                       double *out_mean_kappa);

/**
 * Saves a model to a text file.
 *
 * # Safety
 * `model` must be a live handle; `path` must be a NUL-terminated string.
 */
enum GsStatus gs_model_save(const struct GsModel *model, const char *path);

/**
 * Loads a model file saved by [`gs_model_save`] (or the CLI).
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be a valid pointer.
 * On success `*out` owns the model and must be released with
 * [`gs_model_free`].
 */
enum GsStatus gs_model_load(const char *path, struct GsModel **out);

/**
 * The model's featurization kind. Returns `Bow` for a null handle.
 *
 * # Safety
 * `model`, when non-null, must be a live handle from this library.
 */
enum GsModelKind gs_model_kind(const struct GsModel *model);

/**
 * The model's score scale (largest attainable mark); 0 for a null handle.
 *
 * # Safety
 * `model`, when non-null, must be a live handle from this library.
 */
uint32_t gs_model_max_marks(const struct GsModel *model);

/**
 * Grades one answer: featurizes `answer` and writes the predicted integer
 * mark (0..=max_marks) to `out_mark`.
 *
 * # Safety
 * `model` must be a live handle; `answer` must be a NUL-terminated
 * string; `out_mark` must be a valid pointer.
 */
enum GsStatus gs_model_grade(const struct GsModel *model, const char *answer, uint32_t *out_mark);

/**
 * Releases a model handle; null is a no-op.
 *
 * # Safety
 * `model` must be null or a handle not yet freed.
 */
void gs_model_free(struct GsModel *model);

/**
 * Quadratic weighted kappa between two aligned score arrays of length
 * `len` on the scale 0..=max_marks, written to `out`.
 *
 * # Safety
 * `a` and `b` must point to `len` readable u32 values (they may be null
 * only when `len` is 0); `out` must be a valid pointer.
 */
enum GsStatus gs_qwk(const uint32_t *a,
                     const uint32_t *b,
                     size_t len,
                     uint32_t max_marks,
                     double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GRADESCORE_H */
