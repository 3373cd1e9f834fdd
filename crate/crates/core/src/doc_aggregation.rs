//! Per-document features from per-word vectors: the averaged bag of
//! vectors and the k-means bag of centroids.
//!
//! K-means is Lloyd's algorithm, seeded and fully deterministic:
//! initialization samples k distinct word vectors, assignment breaks
//! distance ties toward the lower cluster id, and clusters that lose all
//! members are re-seeded with the point currently farthest from its
//! centroid. Inertia never increases between iterations — the fitted model
//! records the trace so callers can assert it.

use crate::error::{Error, Result};
use crate::embeddings::EmbeddingModel;
use crate::rng::Xoshiro256;
use crate::textprep::Vocabulary;

/// A fitted clustering of the vocabulary's word vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct CentroidModel {
    pub k: usize,
    pub dim: usize,
    /// k × dim centroid matrix.
    pub centroids: Vec<Vec<f64>>,
    /// Cluster id of each vocabulary index (length V).
    pub assignments: Vec<u32>,
    /// Final Σ of squared distances from each vector to its centroid.
    pub inertia: f64,
    /// Inertia after initialization and after each Lloyd iteration;
    /// monotone non-increasing.
    pub inertia_trace: Vec<f64>,
}

fn squared_distance(u: &[f64], v: &[f64]) -> f64 {
    u.iter()
        .zip(v)
        .map(|(a, b)| {
            let d = a - b;
            d * d
        })
        .sum()
}

/// Index of the centroid nearest to `x` (squared Euclidean), ties resolved
/// to the lower cluster id.
fn nearest(x: &[f64], centroids: &[Vec<f64>]) -> (u32, f64) {
    let mut best = 0u32;
    let mut best_d = f64::INFINITY;
    for (c, centroid) in centroids.iter().enumerate() {
        let d = squared_distance(x, centroid);
        if d < best_d {
            best_d = d;
            best = c as u32;
        }
    }
    (best, best_d)
}

fn inertia_of(vectors: &[Vec<f64>], centroids: &[Vec<f64>], assignments: &[u32]) -> f64 {
    vectors
        .iter()
        .zip(assignments)
        .map(|(x, &a)| squared_distance(x, &centroids[a as usize]))
        .sum()
}

/// Re-seeds empty clusters: while any cluster has no members, the lowest
/// empty id takes the point farthest from its current centroid (among
/// donor clusters that keep ≥ 1 member; ties to the lower point index).
/// Each move strictly lowers that point's contribution to zero, so inertia
/// cannot rise.
fn fix_empty_clusters(
    vectors: &[Vec<f64>],
    centroids: &mut [Vec<f64>],
    assignments: &mut [u32],
) {
    let k = centroids.len();
    loop {
        let mut sizes = vec![0usize; k];
        for &a in assignments.iter() {
            sizes[a as usize] += 1;
        }
        let Some(empty) = sizes.iter().position(|&s| s == 0) else {
            return;
        };
        let mut farthest: Option<(usize, f64)> = None;
        for (i, x) in vectors.iter().enumerate() {
            if sizes[assignments[i] as usize] < 2 {
                continue; // donating would empty another cluster
            }
            let d = squared_distance(x, &centroids[assignments[i] as usize]);
            if farthest.is_none_or(|(_, best)| d > best) {
                farthest = Some((i, d));
            }
        }
        let (i, _) = farthest.expect("k <= V guarantees a donor cluster with >= 2 members");
        centroids[empty] = vectors[i].clone();
        assignments[i] = empty as u32;
    }
}

/// Lloyd's k-means over word vectors.
///
/// Initialization: k distinct rows sampled by `seed`. Each iteration
/// recomputes centroids as member means, reassigns every vector to its
/// nearest centroid (ties to the lower id), and re-seeds empty clusters.
/// Stops when an iteration leaves the assignment unchanged, or after
/// `max_iter` iterations.
pub fn kmeans_fit(
    vectors: &[Vec<f64>],
    k: usize,
    seed: u64,
    max_iter: usize,
) -> Result<CentroidModel> {
    let v = vectors.len();
    if k == 0 {
        return Err(Error::InvalidParams {
            reason: "k must be at least 1".to_string(),
        });
    }
    if k > v {
        return Err(Error::TooManyClusters { k, points: v });
    }
    let dim = vectors[0].len();
    if dim == 0 {
        return Err(Error::InvalidParams {
            reason: "vectors must have at least one dimension".to_string(),
        });
    }
    for row in vectors {
        if row.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: row.len(),
            });
        }
        if row.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFiniteInput {
                context: "k-means input vectors",
            });
        }
    }

    let mut rng = Xoshiro256::new(seed);
    let mut centroids: Vec<Vec<f64>> = rng
        .sample_distinct(v, k)
        .into_iter()
        .map(|i| vectors[i].clone())
        .collect();
    let mut assignments: Vec<u32> = vectors.iter().map(|x| nearest(x, &centroids).0).collect();
    fix_empty_clusters(vectors, &mut centroids, &mut assignments);

    let mut trace = vec![inertia_of(vectors, &centroids, &assignments)];
    for _ in 0..max_iter {
        // Means of the current members.
        let mut sums = vec![vec![0.0; dim]; k];
        let mut sizes = vec![0usize; k];
        for (x, &a) in vectors.iter().zip(&assignments) {
            sizes[a as usize] += 1;
            for (s, xi) in sums[a as usize].iter_mut().zip(x) {
                *s += xi;
            }
        }
        for (c, (sum, &size)) in sums.iter().zip(&sizes).enumerate() {
            debug_assert!(size > 0, "empty cluster survived the fix-up");
            centroids[c] = sum.iter().map(|s| s / size as f64).collect();
        }

        let new_assignments: Vec<u32> =
            vectors.iter().map(|x| nearest(x, &centroids).0).collect();
        let converged = new_assignments == assignments;
        assignments = new_assignments;
        fix_empty_clusters(vectors, &mut centroids, &mut assignments);
        trace.push(inertia_of(vectors, &centroids, &assignments));
        if converged {
            break;
        }
    }

    Ok(CentroidModel {
        k,
        dim,
        inertia: *trace.last().expect("trace never empty"),
        centroids,
        assignments,
        inertia_trace: trace,
    })
}

/// Mean of the embedding vectors of `doc`'s in-vocabulary tokens; the zero
/// vector when none are known.
pub fn bag_of_vectors(doc: &[String], model: &EmbeddingModel) -> Vec<f64> {
    let mut sum = vec![0.0; model.dim];
    let mut n = 0usize;
    for tok in doc {
        if let Some(w) = model.word_index(tok) {
            for (s, x) in sum.iter_mut().zip(&model.input[w]) {
                *s += x;
            }
            n += 1;
        }
    }
    if n > 0 {
        for s in &mut sum {
            *s /= n as f64;
        }
    }
    sum
}

/// Histogram of `doc`'s in-vocabulary tokens over the k clusters: entry j
/// counts tokens assigned to cluster j, so the L1 norm equals the doc's
/// in-vocabulary token count.
pub fn bag_of_centroids(
    doc: &[String],
    cm: &CentroidModel,
    vocab: &Vocabulary,
) -> Result<Vec<f64>> {
    if cm.assignments.len() != vocab.len() {
        return Err(Error::DimensionMismatch {
            expected: vocab.len(),
            found: cm.assignments.len(),
        });
    }
    let mut hist = vec![0.0; cm.k];
    for tok in doc {
        if let Some(w) = vocab.index_of(tok) {
            hist[cm.assignments[w] as usize] += 1.0;
        }
    }
    Ok(hist)
}
