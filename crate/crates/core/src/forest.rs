//! Random-forest regression from document features to scores.
//!
//! Bootstrapped CART trees grown by greedy variance (SSE) minimization,
//! predictions averaged across trees and rounded to integer marks by the
//! caller via [`round_score`]. Everything is seeded: tree t draws all of
//! its randomness from a stream derived from (forest seed, t), so fitting
//! is bit-identical no matter how many rayon workers build trees.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng::{derive_stream, Xoshiro256};

/// One regression-tree node.
#[derive(Debug, Clone, PartialEq)]
pub enum TreeNode {
    Internal {
        feature: usize,
        /// Rows with feature value ≤ threshold go left.
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
    Leaf {
        /// Mean of the training targets that reached this leaf.
        value: f64,
    },
}

impl TreeNode {
    fn predict(&self, row: &[f64]) -> f64 {
        match self {
            TreeNode::Leaf { value } => *value,
            TreeNode::Internal {
                feature,
                threshold,
                left,
                right,
            } => {
                if row[*feature] <= *threshold {
                    left.predict(row)
                } else {
                    right.predict(row)
                }
            }
        }
    }
}

/// Forest hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ForestParams {
    pub n_trees: usize,
    /// Features tried per split; `None` means the regression default
    /// max(1, ⌊p/3⌋).
    pub mtry: Option<usize>,
    /// Minimum rows on each side of a split.
    pub min_leaf: usize,
    /// `None` = unlimited.
    pub max_depth: Option<usize>,
    /// Sample n rows with replacement per tree; `false` uses every row.
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 100,
            mtry: None,
            min_leaf: 1,
            max_depth: None,
            bootstrap: true,
            seed: 0,
        }
    }
}

impl ForestParams {
    /// The mtry actually used for `p` features.
    pub fn resolved_mtry(&self, p: usize) -> usize {
        self.mtry.unwrap_or((p / 3).max(1))
    }
}

/// A fitted forest.
#[derive(Debug, Clone, PartialEq)]
pub struct ForestModel {
    pub trees: Vec<TreeNode>,
    pub feature_count: usize,
    pub params: ForestParams,
}

struct GrowContext<'a> {
    features: &'a [Vec<f64>],
    targets: &'a [f64],
    p: usize,
    mtry: usize,
    min_leaf: usize,
    max_depth: Option<usize>,
}

/// Fits a regression forest on an n×p feature matrix.
///
/// Per tree: rows are bootstrapped (or taken whole), then CART growth
/// greedily minimizes the summed child SSE over `mtry` sampled features,
/// splitting at midpoints between consecutive distinct sorted values.
/// Ties between candidate splits resolve to the lowest feature index, then
/// the lowest threshold, so duplicated columns and ties cannot introduce
/// nondeterminism. Growth stops at pure nodes, `min_leaf`, or `max_depth`.
pub fn fit_forest(
    features: &[Vec<f64>],
    targets: &[f64],
    params: &ForestParams,
) -> Result<ForestModel> {
    if features.is_empty() || targets.is_empty() {
        return Err(Error::EmptyTraining);
    }
    if features.len() != targets.len() {
        return Err(Error::LengthMismatch {
            left: features.len(),
            right: targets.len(),
        });
    }
    let p = features[0].len();
    if p == 0 {
        return Err(Error::InvalidParams {
            reason: "need at least one feature column".to_string(),
        });
    }
    for row in features {
        if row.len() != p {
            return Err(Error::DimensionMismatch {
                expected: p,
                found: row.len(),
            });
        }
        if row.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFiniteInput {
                context: "training features",
            });
        }
    }
    if targets.iter().any(|y| !y.is_finite()) {
        return Err(Error::NonFiniteInput {
            context: "training targets",
        });
    }
    if params.n_trees == 0 {
        return Err(Error::InvalidParams {
            reason: "n_trees must be at least 1".to_string(),
        });
    }
    if params.min_leaf == 0 {
        return Err(Error::InvalidParams {
            reason: "min_leaf must be at least 1".to_string(),
        });
    }
    let mtry = params.resolved_mtry(p);
    if mtry == 0 || mtry > p {
        return Err(Error::InvalidParams {
            reason: format!("mtry {mtry} outside 1..={p}"),
        });
    }

    let n = features.len();
    let ctx = GrowContext {
        features,
        targets,
        p,
        mtry,
        min_leaf: params.min_leaf,
        max_depth: params.max_depth,
    };
    let trees: Vec<TreeNode> = (0..params.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = Xoshiro256::new(derive_stream(params.seed, t as u64));
            let rows: Vec<usize> = if params.bootstrap {
                (0..n).map(|_| rng.below(n as u64) as usize).collect()
            } else {
                (0..n).collect()
            };
            grow(&ctx, rows, 0, &mut rng)
        })
        .collect();

    Ok(ForestModel {
        trees,
        feature_count: p,
        params: params.clone(),
    })
}

fn grow(ctx: &GrowContext<'_>, rows: Vec<usize>, depth: usize, rng: &mut Xoshiro256) -> TreeNode {
    let first = ctx.targets[rows[0]];
    let pure = rows.iter().all(|&r| ctx.targets[r] == first);
    let at_depth = ctx.max_depth.is_some_and(|d| depth >= d);
    if pure {
        // Exact value, no summation round-off on constant nodes.
        return TreeNode::Leaf { value: first };
    }
    if at_depth || rows.len() < 2 * ctx.min_leaf {
        return TreeNode::Leaf { value: mean(ctx.targets, &rows) };
    }

    let candidates: Vec<usize> = if ctx.mtry == ctx.p {
        (0..ctx.p).collect()
    } else {
        let mut feats = rng.sample_distinct(ctx.p, ctx.mtry);
        // Ascending scan makes "lowest feature index wins ties" hold for
        // sampled subsets too.
        feats.sort_unstable();
        feats
    };

    let mut best: Option<(f64, usize, f64)> = None; // (children SSE, feature, threshold)
    let mut order = rows.clone();
    for &f in &candidates {
        order.sort_by(|&a, &b| {
            ctx.features[a][f]
                .partial_cmp(&ctx.features[b][f])
                .expect("features validated finite")
                .then(a.cmp(&b))
        });
        // Prefix sums over the sorted order give O(1) SSE per boundary.
        let m = order.len();
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        let prefix: Vec<(f64, f64)> = order
            .iter()
            .map(|&r| {
                let y = ctx.targets[r];
                sum += y;
                sumsq += y * y;
                (sum, sumsq)
            })
            .collect();
        let (total_sum, total_sumsq) = prefix[m - 1];
        for i in 1..m {
            let lo = ctx.features[order[i - 1]][f];
            let hi = ctx.features[order[i]][f];
            if lo == hi {
                continue; // not a boundary between distinct values
            }
            if i < ctx.min_leaf || m - i < ctx.min_leaf {
                continue;
            }
            // Overflow-safe midpoint; if rounding lands on the upper value,
            // fall back to the lower so `x <= thr` splits exactly here.
            let mut thr = lo + (hi - lo) / 2.0;
            if thr >= hi {
                thr = lo;
            }
            let (lsum, lsumsq) = prefix[i - 1];
            let (rsum, rsumsq) = (total_sum - lsum, total_sumsq - lsumsq);
            let sse_l = (lsumsq - lsum * lsum / i as f64).max(0.0);
            let sse_r = (rsumsq - rsum * rsum / (m - i) as f64).max(0.0);
            let score = sse_l + sse_r;
            // Strict improvement only: equal scores keep the earlier
            // candidate, i.e. the lowest feature then lowest threshold.
            if best.is_none_or(|(s, _, _)| score < s) {
                best = Some((score, f, thr));
            }
        }
    }

    let Some((_, feature, threshold)) = best else {
        // No admissible boundary (e.g. all candidate features constant).
        return TreeNode::Leaf { value: mean(ctx.targets, &rows) };
    };
    let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows
        .iter()
        .partition(|&&r| ctx.features[r][feature] <= threshold);
    TreeNode::Internal {
        feature,
        threshold,
        left: Box::new(grow(ctx, left_rows, depth + 1, rng)),
        right: Box::new(grow(ctx, right_rows, depth + 1, rng)),
    }
}

fn mean(targets: &[f64], rows: &[usize]) -> f64 {
    rows.iter().map(|&r| targets[r]).sum::<f64>() / rows.len() as f64
}

/// Mean of the per-tree predictions for one feature row.
pub fn predict_raw(model: &ForestModel, row: &[f64]) -> Result<f64> {
    if row.len() != model.feature_count {
        return Err(Error::DimensionMismatch {
            expected: model.feature_count,
            found: row.len(),
        });
    }
    if row.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFiniteInput {
            context: "prediction input",
        });
    }
    let sum: f64 = model.trees.iter().map(|t| t.predict(row)).sum();
    Ok(sum / model.trees.len() as f64)
}

/// Rounds a raw prediction to an integer mark: half away from zero, then
/// clamped to [0, max_marks].
pub fn round_score(raw: f64, max_marks: u32) -> Result<u32> {
    if max_marks == 0 {
        return Err(Error::InvalidParams {
            reason: "max_marks must be at least 1".to_string(),
        });
    }
    if !raw.is_finite() {
        return Err(Error::NonFiniteInput {
            context: "raw prediction",
        });
    }
    let rounded = raw.round();
    Ok(if rounded < 0.0 {
        0
    } else if rounded > max_marks as f64 {
        max_marks
    } else {
        rounded as u32
    })
}
