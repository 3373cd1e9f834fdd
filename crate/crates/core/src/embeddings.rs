//! Skip-gram word embeddings trained with a Huffman-tree hierarchical
//! softmax — the representation behind the vector and centroid features.
//!
//! The model is the classic one-hidden-layer skip-gram: the hidden weights
//! are the word vectors. Instead of a full softmax over the vocabulary, a
//! word's probability is a product of sigmoids along its Huffman path, so
//! one training pair reads and updates exactly one input vector and
//! |code(target)| inner-node vectors.
//!
//! Training is single-threaded by contract: pair order (documents in order,
//! positions left to right, offsets −window..+window skipping 0) and the
//! seeded initialization make the result a pure function of
//! (docs, vocabulary, params).

use std::collections::HashMap;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::huffman::HuffmanTree;
use crate::rng::Xoshiro256;
use crate::textio::{fmt_f64, parse_f64, parse_int, split_lines, LineCursor};
use crate::textprep::Vocabulary;

/// Logistic function 1/(1+e^(−x)).
pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Numerically stable ln(1 + e^x).
fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

/// Skip-gram hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainParams {
    /// Vector dimensionality.
    pub dim: usize,
    /// Context window: offsets −window..+window around the center.
    pub window: usize,
    /// Full passes over the corpus. Zero is legal and leaves the model at
    /// its initialization.
    pub epochs: usize,
    /// Initial SGD step size; decays linearly over the total pair count,
    /// floored at [`LR_FLOOR_FRACTION`] of the initial value.
    pub learning_rate: f64,
    /// Minimum corpus frequency for vocabulary membership (consumed by the
    /// pipeline when it builds the vocabulary this model trains against).
    pub min_count: u64,
    /// Seed for initialization; the training schedule itself is
    /// deterministic.
    pub seed: u64,
}

impl Default for TrainParams {
    fn default() -> Self {
        TrainParams {
            dim: 50,
            window: 5,
            epochs: 15,
            learning_rate: 0.025,
            min_count: 1,
            seed: 0,
        }
    }
}

/// The learning rate never drops below this fraction of its initial value.
pub const LR_FLOOR_FRACTION: f64 = 1e-4;

impl TrainParams {
    pub(crate) fn validate(&self) -> Result<()> {
        let reason = if self.dim == 0 {
            "dim must be at least 1"
        } else if self.window == 0 {
            "window must be at least 1"
        } else if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            "learning_rate must be positive and finite"
        } else {
            return Ok(());
        };
        Err(Error::InvalidParams {
            reason: reason.to_string(),
        })
    }
}

/// A trained (or freshly initialized) embedding model.
///
/// `input[w]` is word w's vector — the feature downstream stages consume.
/// `inner[n]` is the trainable vector of Huffman inner node n. Words are
/// index-aligned with the vocabulary the model was trained against.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingModel {
    pub dim: usize,
    pub words: Vec<String>,
    pub input: Vec<Vec<f64>>,
    pub inner: Vec<Vec<f64>>,
    pub tree: HuffmanTree,
    index: HashMap<String, usize>,
}

impl EmbeddingModel {
    /// Assembles and validates a model from parts: aligned lengths, uniform
    /// dimension ≥ 1, finite entries, distinct words.
    pub fn new(
        words: Vec<String>,
        input: Vec<Vec<f64>>,
        inner: Vec<Vec<f64>>,
        tree: HuffmanTree,
    ) -> Result<Self> {
        let v = tree.len();
        if words.len() != v || input.len() != v {
            return Err(Error::DimensionMismatch {
                expected: v,
                found: words.len().min(input.len()),
            });
        }
        if inner.len() != tree.inner_count() {
            return Err(Error::DimensionMismatch {
                expected: tree.inner_count(),
                found: inner.len(),
            });
        }
        let dim = input.first().map_or(0, Vec::len);
        if dim == 0 {
            return Err(Error::InvalidParams {
                reason: "embedding dimension must be at least 1".to_string(),
            });
        }
        for row in input.iter().chain(&inner) {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            if row.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFiniteInput {
                    context: "embedding vectors",
                });
            }
        }
        let mut index = HashMap::with_capacity(v);
        for (i, w) in words.iter().enumerate() {
            if index.insert(w.clone(), i).is_some() {
                return Err(Error::InvalidParams {
                    reason: format!("word `{w}` listed twice"),
                });
            }
        }
        Ok(EmbeddingModel {
            dim,
            words,
            input,
            inner,
            tree,
            index,
        })
    }

    /// Fresh model: input vectors uniform in [−0.5/d, +0.5/d) drawn
    /// row-major from `rng`, inner vectors zero.
    pub fn init(words: Vec<String>, tree: HuffmanTree, dim: usize, rng: &mut Xoshiro256) -> Result<Self> {
        let v = tree.len();
        let input: Vec<Vec<f64>> = (0..v)
            .map(|_| (0..dim).map(|_| (rng.next_f64() - 0.5) / dim as f64).collect())
            .collect();
        let inner = vec![vec![0.0; dim]; tree.inner_count()];
        Self::new(words, input, inner, tree)
    }

    /// Dense index of `word`, if the model knows it.
    pub fn word_index(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    /// Vocabulary size.
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// P(target | center): product over the target's code of σ(±dot), where
    /// dot pairs the center's input vector with each inner node on the
    /// target's path and the sign is + for bit 0, − for bit 1. Summed over
    /// all words this telescopes to 1.
    pub fn probability(&self, center: usize, target: usize) -> f64 {
        let v = &self.input[center];
        let code = self.tree.code(target);
        let mut p = 1.0;
        for (j, &node) in self.tree.path(target).iter().enumerate() {
            let d = dot(v, &self.inner[node as usize]);
            p *= sigmoid(if code[j] { -d } else { d });
        }
        p
    }

    /// −ln P(target | center), accumulated per code position through a
    /// stable softplus, so it stays finite where the raw product would
    /// underflow.
    pub fn pair_loss(&self, center: usize, target: usize) -> f64 {
        let v = &self.input[center];
        let code = self.tree.code(target);
        let mut loss = 0.0;
        for (j, &node) in self.tree.path(target).iter().enumerate() {
            let d = dot(v, &self.inner[node as usize]);
            let z = if code[j] { -d } else { d };
            loss += softplus(-z);
        }
        loss
    }

    /// Analytic gradient of [`pair_loss`](Self::pair_loss) with respect to
    /// the center's input vector and each inner vector on the target's
    /// path, as (center gradient, per-node gradients).
    pub fn pair_gradient(&self, center: usize, target: usize) -> (Vec<f64>, Vec<(u32, Vec<f64>)>) {
        let v = &self.input[center];
        let code = self.tree.code(target);
        let mut center_grad = vec![0.0; self.dim];
        let mut inner_grads = Vec::with_capacity(code.len());
        for (j, &node) in self.tree.path(target).iter().enumerate() {
            let w = &self.inner[node as usize];
            // d(loss)/d(dot) = σ(dot) − label, label 1 for bit 0.
            let label = if code[j] { 0.0 } else { 1.0 };
            let g = sigmoid(dot(v, w)) - label;
            for k in 0..self.dim {
                center_grad[k] += g * w[k];
            }
            inner_grads.push((node, v.iter().map(|&x| g * x).collect()));
        }
        (center_grad, inner_grads)
    }

    /// One SGD step on (center, target) at rate `lr`. Inner vectors update
    /// against the center's pre-update value; the center updates last —
    /// exactly one input vector and |code(target)| inner vectors move.
    pub fn train_pair(&mut self, center: usize, target: usize, lr: f64) {
        let v = self.input[center].clone();
        let code = self.tree.code(target);
        let mut center_grad = vec![0.0; self.dim];
        for (j, &node) in self.tree.path(target).iter().enumerate() {
            let w = &mut self.inner[node as usize];
            let label = if code[j] { 0.0 } else { 1.0 };
            let g = sigmoid(dot(&v, w)) - label;
            for k in 0..self.dim {
                center_grad[k] += g * w[k];
                w[k] -= lr * g * v[k];
            }
        }
        let row = &mut self.input[center];
        for k in 0..self.dim {
            row[k] -= lr * center_grad[k];
        }
    }
}

/// P(target | center) with tokens resolved through the model's word list.
pub fn hs_probability(model: &EmbeddingModel, center: &str, target: &str) -> Result<f64> {
    let resolve = |tok: &str| {
        model.word_index(tok).ok_or_else(|| Error::UnknownToken {
            token: tok.to_string(),
        })
    };
    Ok(model.probability(resolve(center)?, resolve(target)?))
}

/// Trains skip-gram embeddings over tokenized documents.
///
/// For every epoch, document, position, and offset in −window..+window
/// (skipping 0 and clipped at document bounds), one SGD step is taken on
/// −ln P(context | center). The step size decays linearly from
/// `learning_rate` over the total pair count, floored at
/// [`LR_FLOOR_FRACTION`] of the initial rate. Out-of-vocabulary tokens are
/// dropped before pairing. Bit-identical across runs for fixed inputs.
pub fn train_skipgram(
    docs: &[Vec<String>],
    vocab: &Vocabulary,
    params: &TrainParams,
) -> Result<EmbeddingModel> {
    params.validate()?;
    if vocab.len() < 2 {
        return Err(Error::VocabularyTooSmall { len: vocab.len() });
    }
    let tree = HuffmanTree::from_vocabulary(vocab)?;
    let mut rng = Xoshiro256::new(params.seed);
    let mut model = EmbeddingModel::init(vocab.tokens().to_vec(), tree, params.dim, &mut rng)?;

    let ids: Vec<Vec<usize>> = docs
        .iter()
        .map(|doc| doc.iter().filter_map(|t| vocab.index_of(t)).collect())
        .collect();
    let window = params.window;
    let pairs_per_pass: u64 = ids
        .iter()
        .map(|doc| {
            (0..doc.len())
                .map(|t| {
                    let lo = t.saturating_sub(window);
                    let hi = (t + window).min(doc.len() - 1);
                    (hi - lo) as u64 // window size minus the center itself
                })
                .sum::<u64>()
        })
        .sum();
    let total = pairs_per_pass * params.epochs as u64;
    if total == 0 {
        return Ok(model); // no epochs or no co-occurring tokens
    }

    let mut processed = 0u64;
    for _ in 0..params.epochs {
        for doc in &ids {
            for t in 0..doc.len() {
                let lo = t.saturating_sub(window);
                let hi = (t + window).min(doc.len() - 1);
                for o in lo..=hi {
                    if o == t {
                        continue;
                    }
                    let frac = 1.0 - processed as f64 / total as f64;
                    let lr = params.learning_rate * frac.max(LR_FLOOR_FRACTION);
                    model.train_pair(doc[t], doc[o], lr);
                    processed += 1;
                }
            }
        }
    }
    Ok(model)
}

/// Cosine similarity ⟨u,v⟩/(|u||v|), defined as 0 when either norm is 0.
pub fn cosine_similarity(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch {
            expected: u.len(),
            found: v.len(),
        });
    }
    let nu = dot(u, u).sqrt();
    let nv = dot(v, v).sqrt();
    if nu == 0.0 || nv == 0.0 {
        return Ok(0.0);
    }
    Ok(dot(u, v) / (nu * nv))
}

/// Writes the model in the `GRADESCORE-EMB v1` text format:
/// header `GRADESCORE-EMB v1 V d`, V word-vector lines `token v1..vd`,
/// V−1 inner-vector lines, then V code/path lines `token bits node..`.
/// Round-trips bit-exactly.
pub fn save_embedding<W: Write>(model: &EmbeddingModel, mut out: W) -> Result<()> {
    writeln!(out, "GRADESCORE-EMB v1 {} {}", model.len(), model.dim)?;
    for (word, vec) in model.words.iter().zip(&model.input) {
        write_vector_line(&mut out, Some(word), vec)?;
    }
    for vec in &model.inner {
        write_vector_line(&mut out, None, vec)?;
    }
    for (w, word) in model.words.iter().enumerate() {
        let bits: String = model
            .tree
            .code(w)
            .iter()
            .map(|&b| if b { '1' } else { '0' })
            .collect();
        write!(out, "{word} {bits}")?;
        for node in model.tree.path(w) {
            write!(out, " {node}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

fn write_vector_line<W: Write>(out: &mut W, word: Option<&str>, vec: &[f64]) -> Result<()> {
    if let Some(word) = word {
        write!(out, "{word}")?;
        for x in vec {
            write!(out, " {}", fmt_f64(*x))?;
        }
    } else {
        for (k, x) in vec.iter().enumerate() {
            if k > 0 {
                write!(out, " ")?;
            }
            write!(out, "{}", fmt_f64(*x))?;
        }
    }
    writeln!(out)?;
    Ok(())
}

/// Reads a model written by [`save_embedding`], re-validating every
/// structural invariant.
pub fn load_embedding<R: BufRead>(mut reader: R) -> Result<EmbeddingModel> {
    let mut text = String::new();
    reader.read_to_string(&mut text)?;
    let lines = split_lines(&text);
    let mut cur = LineCursor::new(&lines);
    parse_embedding_at(&mut cur)
}

/// Parses a `GRADESCORE-EMB v1` block at the cursor (also used for the EMB
/// section of pipeline model files).
pub(crate) fn parse_embedding_at(cur: &mut LineCursor<'_>) -> Result<EmbeddingModel> {
    let (fields, line) = cur.next_fields()?;
    if fields.len() != 4 || fields[0] != "GRADESCORE-EMB" || fields[1] != "v1" {
        return Err(Error::model(line, "expected header `GRADESCORE-EMB v1 V d`"));
    }
    let v: usize = parse_int(fields[2], line, "vocabulary size V")?;
    let dim: usize = parse_int(fields[3], line, "dimension d")?;
    if v < 2 {
        return Err(Error::model(line, format!("vocabulary size {v} below 2")));
    }

    let mut words = Vec::with_capacity(v);
    let mut input = Vec::with_capacity(v);
    for _ in 0..v {
        let (fields, line) = cur.next_fields()?;
        if fields.len() != dim + 1 {
            return Err(Error::model(
                line,
                format!("expected token + {dim} reals, found {} fields", fields.len()),
            ));
        }
        words.push(fields[0].to_string());
        input.push(parse_vector(&fields[1..], line)?);
    }
    let mut inner = Vec::with_capacity(v - 1);
    for _ in 0..v - 1 {
        let (fields, line) = cur.next_fields()?;
        if fields.len() != dim {
            return Err(Error::model(
                line,
                format!("expected {dim} reals, found {} fields", fields.len()),
            ));
        }
        inner.push(parse_vector(&fields, line)?);
    }
    let mut codes = Vec::with_capacity(v);
    let mut paths = Vec::with_capacity(v);
    for (w, word) in words.iter().enumerate() {
        let (fields, line) = cur.next_fields()?;
        if fields.len() < 2 {
            return Err(Error::model(line, "expected `token bits node..`"));
        }
        if fields[0] != word {
            return Err(Error::model(
                line,
                format!("code/path row for `{}` but word {w} is `{word}`", fields[0]),
            ));
        }
        let mut code = Vec::with_capacity(fields[1].len());
        for ch in fields[1].chars() {
            match ch {
                '0' => code.push(false),
                '1' => code.push(true),
                _ => return Err(Error::model(line, format!("bad code bit `{ch}`"))),
            }
        }
        let path: Vec<u32> = fields[2..]
            .iter()
            .map(|f| parse_int(f, line, "an inner-node index"))
            .collect::<Result<_>>()?;
        if path.len() != code.len() {
            return Err(Error::model(
                line,
                format!("code length {} != path length {}", code.len(), path.len()),
            ));
        }
        codes.push(code);
        paths.push(path);
    }
    let tree = HuffmanTree::from_parts(codes, paths)
        .map_err(|reason| Error::model(cur.line_no(), format!("invalid tree: {reason}")))?;
    EmbeddingModel::new(words, input, inner, tree)
}

fn parse_vector(fields: &[&str], line: u64) -> Result<Vec<f64>> {
    fields.iter().map(|f| parse_f64(f, line)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::huffman::HuffmanTree;

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("w{i}")).collect()
    }

    /// Random small model with nonzero inner vectors, for probability tests.
    fn random_model(v: usize, dim: usize, seed: u64) -> EmbeddingModel {
        let mut rng = Xoshiro256::new(seed);
        let counts: Vec<u64> = (0..v).map(|_| 1 + rng.below(20)).collect();
        let tree = HuffmanTree::build(&counts).unwrap();
        let mut rand_matrix = |rows: usize| -> Vec<Vec<f64>> {
            (0..rows)
                .map(|_| (0..dim).map(|_| rng.next_f64() * 2.0 - 1.0).collect())
                .collect()
        };
        let input = rand_matrix(v);
        let inner = rand_matrix(v - 1);
        EmbeddingModel::new(names(v), input, inner, tree).unwrap()
    }

    #[test]
    fn zero_model_splits_probability_evenly_for_two_words() {
        let tree = HuffmanTree::build(&[3, 1]).unwrap();
        let model = EmbeddingModel::new(
            names(2),
            vec![vec![0.0; 4]; 2],
            vec![vec![0.0; 4]; 1],
            tree,
        )
        .unwrap();
        assert_eq!(model.probability(0, 0), 0.5);
        assert_eq!(model.probability(0, 1), 0.5);
    }

    #[test]
    fn hand_set_one_dimensional_model_matches_hand_multiplied_sigmoids() {
        // Tree over counts {5,2,1}: word 0 gets code [1], words 1 and 2 get
        // [01] and [00]; inner node 0 is the first merge, node 1 the root.
        let tree = HuffmanTree::build(&[5, 2, 1]).unwrap();
        let model = EmbeddingModel::new(
            names(3),
            vec![vec![0.7], vec![-0.3], vec![0.2]],
            vec![vec![0.4], vec![-0.9]],
            tree,
        )
        .unwrap();
        // Frozen hand values: σ(0.7·−0.9)·σ(−0.7·0.4), σ(0.63), σ(−0.63)·σ(0.28).
        assert!((model.probability(0, 1) - 0.14958722322004245).abs() < 1e-15);
        assert!((model.probability(0, 0) - 0.6524894621927444).abs() < 1e-15);
        assert!((model.probability(0, 2) - 0.1979233145872131).abs() < 1e-15);
        let total: f64 = (0..3).map(|w| model.probability(0, w)).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn probabilities_sum_to_one_on_random_models() {
        for seed in 0..5 {
            let model = random_model(17, 6, seed);
            for center in [0usize, 5, 16] {
                let total: f64 = (0..17).map(|w| model.probability(center, w)).sum();
                assert!((total - 1.0).abs() < 1e-9, "sum {total}");
            }
        }
    }

    #[test]
    fn pair_loss_is_negative_log_probability() {
        let model = random_model(11, 4, 3);
        for (c, t) in [(0usize, 3usize), (4, 4), (10, 0)] {
            let direct = -model.probability(c, t).ln();
            assert!((model.pair_loss(c, t) - direct).abs() < 1e-9);
        }
    }

    #[test]
    fn train_pair_applies_exactly_the_analytic_gradient() {
        let lr = 0.05;
        let model = random_model(9, 5, 8);
        let (center, target) = (2, 7);
        let (center_grad, inner_grads) = model.pair_gradient(center, target);

        let mut stepped = model.clone();
        stepped.train_pair(center, target, lr);

        let mut manual = model.clone();
        for (node, grad) in &inner_grads {
            for (k, &g) in grad.iter().enumerate() {
                manual.inner[*node as usize][k] -= lr * g;
            }
        }
        for (k, &g) in center_grad.iter().enumerate() {
            manual.input[center][k] -= lr * g;
        }
        assert_eq!(stepped, manual);

        // Sparsity: only the center row and the path's inner rows moved.
        for w in 0..model.len() {
            let same = stepped.input[w] == model.input[w];
            assert_eq!(same, w != center);
        }
        let path: std::collections::HashSet<u32> =
            model.tree.path(target).iter().copied().collect();
        for n in 0..model.inner.len() {
            let same = stepped.inner[n] == model.inner[n];
            assert_eq!(same, !path.contains(&(n as u32)));
        }
    }

    #[test]
    fn training_lowers_pair_loss() {
        let mut model = random_model(9, 5, 4);
        let before = model.pair_loss(1, 6);
        for _ in 0..20 {
            model.train_pair(1, 6, 0.1);
        }
        assert!(model.pair_loss(1, 6) < before);
    }

    fn tiny_corpus() -> Vec<Vec<String>> {
        // x and y are synonyms: they never co-occur but appear between the
        // same rotating filler pairs. z keeps its own disjoint fillers.
        let fillers = ["red", "green", "blue", "grey", "pink", "gold"];
        let mut docs = Vec::new();
        let slot = |i: usize, shift: usize| fillers[(i + shift) % 3].to_string();
        for i in 0..30 {
            for word in ["x", "y"] {
                docs.push(vec![slot(i, 0), word.to_string(), slot(i, 1)]);
            }
            docs.push(vec![
                fillers[3 + i % 3].to_string(),
                "z".to_string(),
                fillers[3 + (i + 1) % 3].to_string(),
            ]);
        }
        docs
    }

    #[test]
    fn shared_contexts_align_word_vectors() {
        let docs = tiny_corpus();
        let vocab = Vocabulary::build(&docs, 1).unwrap();
        let params = TrainParams {
            dim: 8,
            window: 2,
            epochs: 40,
            ..TrainParams::default()
        };
        let model = train_skipgram(&docs, &vocab, &params).unwrap();
        let vec_of = |w: &str| &model.input[model.word_index(w).unwrap()];
        let xy = cosine_similarity(vec_of("x"), vec_of("y")).unwrap();
        let xz = cosine_similarity(vec_of("x"), vec_of("z")).unwrap();
        assert!(
            xy > xz,
            "words sharing contexts should align more: cos(x,y)={xy:.3} cos(x,z)={xz:.3}"
        );
        assert!(xy > 0.5, "synonym similarity too weak: cos(x,y)={xy:.3}");
    }

    #[test]
    fn zero_epochs_returns_the_initialization() {
        let docs = tiny_corpus();
        let vocab = Vocabulary::build(&docs, 1).unwrap();
        let params = TrainParams {
            dim: 6,
            epochs: 0,
            seed: 42,
            ..TrainParams::default()
        };
        let trained = train_skipgram(&docs, &vocab, &params).unwrap();

        let tree = HuffmanTree::from_vocabulary(&vocab).unwrap();
        let mut rng = Xoshiro256::new(42);
        let init = EmbeddingModel::init(vocab.tokens().to_vec(), tree, 6, &mut rng).unwrap();
        assert_eq!(trained, init);
        // Inner vectors start at zero.
        assert!(init.inner.iter().flatten().all(|&x| x == 0.0));
        // Input entries respect the documented init range.
        assert!(init
            .input
            .iter()
            .flatten()
            .all(|&x| (-0.5 / 6.0..0.5 / 6.0).contains(&x)));
    }

    #[test]
    fn training_is_deterministic() {
        let docs = tiny_corpus();
        let vocab = Vocabulary::build(&docs, 1).unwrap();
        let params = TrainParams {
            dim: 5,
            epochs: 3,
            seed: 9,
            ..TrainParams::default()
        };
        let a = train_skipgram(&docs, &vocab, &params).unwrap();
        let b = train_skipgram(&docs, &vocab, &params).unwrap();
        assert_eq!(a, b);
        let c = train_skipgram(
            &docs,
            &vocab,
            &TrainParams {
                seed: 10,
                ..params.clone()
            },
        )
        .unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn invalid_params_and_small_vocabularies_are_rejected() {
        let docs = vec![vec!["a".to_string(), "b".to_string()]];
        let vocab = Vocabulary::build(&docs, 1).unwrap();
        for params in [
            TrainParams { dim: 0, ..TrainParams::default() },
            TrainParams { window: 0, ..TrainParams::default() },
            TrainParams { learning_rate: 0.0, ..TrainParams::default() },
            TrainParams { learning_rate: f64::NAN, ..TrainParams::default() },
        ] {
            assert!(matches!(
                train_skipgram(&docs, &vocab, &params),
                Err(Error::InvalidParams { .. })
            ));
        }

        let single = vec![vec!["a".to_string()]];
        let vocab1 = Vocabulary::build(&single, 1).unwrap();
        assert!(matches!(
            train_skipgram(&single, &vocab1, &TrainParams::default()),
            Err(Error::VocabularyTooSmall { len: 1 })
        ));
    }

    #[test]
    fn hs_probability_resolves_tokens_and_rejects_unknowns() {
        let docs = tiny_corpus();
        let vocab = Vocabulary::build(&docs, 1).unwrap();
        let params = TrainParams { dim: 4, epochs: 1, ..TrainParams::default() };
        let model = train_skipgram(&docs, &vocab, &params).unwrap();
        let p = hs_probability(&model, "x", "y").unwrap();
        assert!(p > 0.0 && p < 1.0);
        match hs_probability(&model, "x", "nosuchword") {
            Err(Error::UnknownToken { token }) => assert_eq!(token, "nosuchword"),
            other => panic!("expected UnknownToken, got {other:?}"),
        }
    }

    #[test]
    fn cosine_similarity_contract() {
        let v = vec![1.0, 2.0, -3.0];
        assert!((cosine_similarity(&v, &v).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(
            cosine_similarity(&[1.0, 0.0], &[0.0, 1.0]).unwrap(),
            0.0
        );
        assert_eq!(cosine_similarity(&[0.0, 0.0], &v[..2]).unwrap(), 0.0);
        assert!(matches!(
            cosine_similarity(&[1.0], &[1.0, 2.0]),
            Err(Error::DimensionMismatch { .. })
        ));
        // Antipodal vectors.
        let w: Vec<f64> = v.iter().map(|x| -x).collect();
        assert!((cosine_similarity(&v, &w).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn save_load_round_trips_bit_exactly() {
        let docs = tiny_corpus();
        let vocab = Vocabulary::build(&docs, 1).unwrap();
        let params = TrainParams { dim: 7, epochs: 2, seed: 3, ..TrainParams::default() };
        let model = train_skipgram(&docs, &vocab, &params).unwrap();

        let mut buf = Vec::new();
        save_embedding(&model, &mut buf).unwrap();
        let loaded = load_embedding(buf.as_slice()).unwrap();
        assert_eq!(model, loaded);

        // And the re-serialization is byte-identical.
        let mut buf2 = Vec::new();
        save_embedding(&loaded, &mut buf2).unwrap();
        assert_eq!(buf, buf2);
    }

    #[test]
    fn load_rejects_corrupted_files() {
        let model = random_model(5, 3, 1);
        let mut buf = Vec::new();
        save_embedding(&model, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();

        // Truncated file.
        let cut: String = text.lines().take(4).collect::<Vec<_>>().join("\n");
        assert!(matches!(
            load_embedding(cut.as_bytes()),
            Err(Error::ModelFormat { .. })
        ));

        // Corrupt a vector entry.
        let bad = text.replacen("e-", "x-", 1);
        assert!(matches!(
            load_embedding(bad.as_bytes()),
            Err(Error::ModelFormat { .. })
        ));

        // Wrong header.
        let bad = text.replacen("GRADESCORE-EMB", "GRADESCORE-XYZ", 1);
        assert!(matches!(
            load_embedding(bad.as_bytes()),
            Err(Error::ModelFormat { line: 1, .. })
        ));
    }
}
