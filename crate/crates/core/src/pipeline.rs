//! End-to-end grading runs: configuration, train/test orchestration, model
//! persistence.
//!
//! [`run_pipeline`] takes one config and one dataset and produces a trained
//! [`PipelineModel`] plus its test-fold [`KappaReport`]; [`compare_pipeline`]
//! does that for all three featurizations on the identical split. One master
//! seed drives everything — each stage derives its own stream by tag, so a
//! run is bit-reproducible and the three comparison runs share their fold.
//!
//! Trained pipelines persist to a single sectioned UTF-8 text file
//! (`GRADESCORE v1` header; VOCAB, optional EMB, optional CENTROIDS, FOREST,
//! META sections) with reals at 17 significant digits so reloading is exact.

use std::collections::HashSet;
use std::io::Write;
use std::path::Path;

use crate::corpus::{split_dataset, Dataset};
use crate::doc_aggregation::{bag_of_centroids, bag_of_vectors, kmeans_fit, CentroidModel};
use crate::embeddings::{
    parse_embedding_at, save_embedding, train_skipgram, EmbeddingModel, TrainParams,
};
use crate::error::{Error, Result};
use crate::evaluation::{compare_models, ComparisonReport, KappaReport, ModelKind, MODEL_ORDER};
use crate::forest::{fit_forest, predict_raw, round_score, ForestModel, ForestParams, TreeNode};
use crate::rng::{derive_stream, tags};
use crate::sparse_features::{count_matrix, tfidf_matrix};
use crate::textio::{fmt_f64, parse_f64, parse_int, split_lines, LineCursor};
use crate::textprep::{builtin_stopwords, tokenize, Vocabulary};

/// Lloyd iterations cap for the bag-of-centroids clustering stage.
pub const KMEANS_MAX_ITER: usize = 100;

/// Everything one grading run depends on.
///
/// The `seed` field is the single master seed: the split, embedding
/// initialization, k-means seeding, and forest all derive their streams
/// from it by fixed tags. The `seed` fields inside `embed` and `forest`
/// are overwritten with derived values at fit time and ignored as inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub kind: ModelKind,
    /// Scores live on 0..=max_marks.
    pub max_marks: u32,
    /// Train fraction, strictly between 0 and 1.
    pub ratio: f64,
    /// Master seed for the whole run.
    pub seed: u64,
    /// Cluster count for the bag-of-centroids featurization.
    pub k: usize,
    /// When set, embeddings (and their vocabulary) also consume the test
    /// fold's text. Off by default: a deployed grader must featurize unseen
    /// answers without retraining.
    pub transductive: bool,
    pub embed: TrainParams,
    pub forest: ForestParams,
    /// Stopwords filtered from the vectors/centroids training text;
    /// `None` uses the built-in list. The bag-of-words path never filters —
    /// IDF already down-weights function words.
    pub stopwords: Option<HashSet<String>>,
}

impl RunConfig {
    /// Defaults: marks 0..=5, 70/30 split, seed 0, k = 9, built-in
    /// stopwords, default embedding and forest hyperparameters.
    pub fn new(kind: ModelKind) -> Self {
        RunConfig {
            kind,
            max_marks: 5,
            ratio: 0.7,
            seed: 0,
            k: 9,
            transductive: false,
            embed: TrainParams::default(),
            forest: ForestParams::default(),
            stopwords: None,
        }
    }

    /// Validates every field before any work happens.
    pub fn validate(&self) -> Result<()> {
        if self.max_marks == 0 {
            return Err(Error::InvalidParams {
                reason: "max_marks must be at least 1".to_string(),
            });
        }
        if !(self.ratio > 0.0 && self.ratio < 1.0) {
            return Err(Error::InvalidRatio { ratio: self.ratio });
        }
        if self.k == 0 {
            return Err(Error::InvalidParams {
                reason: "k must be at least 1".to_string(),
            });
        }
        self.embed.validate()?;
        if self.forest.n_trees == 0 {
            return Err(Error::InvalidParams {
                reason: "n_trees must be at least 1".to_string(),
            });
        }
        if self.forest.min_leaf == 0 {
            return Err(Error::InvalidParams {
                reason: "min_leaf must be at least 1".to_string(),
            });
        }
        Ok(())
    }

    fn effective_stopwords(&self) -> HashSet<String> {
        self.stopwords.clone().unwrap_or_else(builtin_stopwords)
    }

    /// FNV-1a hash of the canonical config rendering. Stamped into saved
    /// model files so a model can be traced back to the exact settings
    /// (including the effective stopword list) that produced it.
    pub fn fingerprint(&self) -> u64 {
        let mut stopwords: Vec<String> = self.effective_stopwords().into_iter().collect();
        stopwords.sort();
        let canonical = format!(
            "kind={}\nmax_marks={}\nratio={}\nseed={}\nk={}\ntransductive={}\n\
             dim={}\nwindow={}\nepochs={}\nlearning_rate={}\nmin_count={}\n\
             n_trees={}\nmtry={}\nmin_leaf={}\nmax_depth={}\nbootstrap={}\n\
             stopwords={}\n",
            self.kind,
            self.max_marks,
            fmt_f64(self.ratio),
            self.seed,
            self.k,
            self.transductive,
            self.embed.dim,
            self.embed.window,
            self.embed.epochs,
            fmt_f64(self.embed.learning_rate),
            self.embed.min_count,
            self.forest.n_trees,
            match self.forest.mtry {
                Some(m) => m.to_string(),
                None => "auto".to_string(),
            },
            self.forest.min_leaf,
            match self.forest.max_depth {
                Some(d) => d.to_string(),
                None => "none".to_string(),
            },
            self.forest.bootstrap,
            stopwords.join(","),
        );
        fnv1a(canonical.as_bytes())
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325_u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// A trained grading pipeline: vocabulary, the featurization components its
/// kind needs, and the forest that maps features to marks.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineModel {
    pub kind: ModelKind,
    pub max_marks: u32,
    pub vocabulary: Vocabulary,
    /// Present for vectors and centroids kinds.
    pub embedding: Option<EmbeddingModel>,
    /// Present for the centroids kind.
    pub centroids: Option<CentroidModel>,
    pub forest: ForestModel,
    /// Fingerprint of the [`RunConfig`] that produced the model.
    pub fingerprint: u64,
}

impl PipelineModel {
    /// Checks that the optional components match the model kind and that
    /// every dimension lines up with the forest's feature count.
    pub fn check_components(&self) -> Result<()> {
        let fail = |reason: String| Err(Error::InvalidParams { reason });
        match self.kind {
            ModelKind::Bow => {
                if self.embedding.is_some() || self.centroids.is_some() {
                    return fail("bag-of-words model carries embedding or centroid parts".into());
                }
            }
            ModelKind::Vectors => {
                if self.embedding.is_none() {
                    return fail("bag-of-vectors model is missing its embedding".into());
                }
                if self.centroids.is_some() {
                    return fail("bag-of-vectors model carries centroid parts".into());
                }
            }
            ModelKind::Centroids => {
                if self.embedding.is_none() || self.centroids.is_none() {
                    return fail(
                        "bag-of-centroids model needs both embedding and centroids".into(),
                    );
                }
            }
        }
        if let Some(emb) = &self.embedding {
            if emb.words != self.vocabulary.tokens() {
                return fail("embedding words do not match the vocabulary".into());
            }
        }
        if let Some(cm) = &self.centroids {
            let emb = self.embedding.as_ref().expect("checked above");
            if cm.assignments.len() != self.vocabulary.len() {
                return fail(format!(
                    "centroid assignments cover {} tokens, vocabulary has {}",
                    cm.assignments.len(),
                    self.vocabulary.len()
                ));
            }
            if cm.dim != emb.dim {
                return fail(format!(
                    "centroid dimension {} differs from embedding dimension {}",
                    cm.dim, emb.dim
                ));
            }
        }
        let expected = match self.kind {
            ModelKind::Bow => self.vocabulary.len(),
            ModelKind::Vectors => self.embedding.as_ref().expect("checked above").dim,
            ModelKind::Centroids => self.centroids.as_ref().expect("checked above").k,
        };
        if self.forest.feature_count != expected {
            return fail(format!(
                "forest expects {} features but the {} featurization yields {}",
                self.forest.feature_count,
                self.kind.flag_name(),
                expected
            ));
        }
        Ok(())
    }

    /// Maps one answer text to the model's feature vector.
    ///
    /// Tokenization never filters stopwords here: for the embedding-based
    /// kinds the stopwords were excluded from the vocabulary at fit time,
    /// so they drop out as out-of-vocabulary tokens anyway, and the
    /// bag-of-words kind keeps them by design.
    pub fn featurize(&self, text: &str) -> Result<Vec<f64>> {
        let tokens = tokenize(text, None);
        match self.kind {
            ModelKind::Bow => {
                let counts = count_matrix(std::slice::from_ref(&tokens), &self.vocabulary);
                let weights = tfidf_matrix(&counts, &self.vocabulary)?;
                Ok(weights.rows.into_iter().next().expect("one input row"))
            }
            ModelKind::Vectors => Ok(bag_of_vectors(
                &tokens,
                self.embedding.as_ref().expect("kind checked"),
            )),
            ModelKind::Centroids => bag_of_centroids(
                &tokens,
                self.centroids.as_ref().expect("kind checked"),
                &self.vocabulary,
            ),
        }
    }

    /// Predicts the integer mark for one answer text.
    pub fn grade(&self, text: &str) -> Result<u32> {
        let features = self.featurize(text)?;
        round_score(predict_raw(&self.forest, &features)?, self.max_marks)
    }
}

/// Trains one pipeline on `ds` per `cfg` and reports test-fold kappa.
///
/// The dataset is split by the master seed; vocabulary, embeddings, and
/// centroids are fitted on the training fold's text (plus the test fold's
/// text when `cfg.transductive` is set — scores are never touched); the
/// forest is fitted on training features and scores; the report scores the
/// held-out fold.
pub fn run_pipeline(cfg: &RunConfig, ds: &Dataset) -> Result<(PipelineModel, KappaReport)> {
    cfg.validate()?;
    if ds.is_empty() {
        return Err(Error::EmptyDataset);
    }
    for record in ds.records() {
        if record.human_score > cfg.max_marks {
            return Err(Error::OutOfRangeScore {
                score: record.human_score,
                max_marks: cfg.max_marks,
            });
        }
    }
    let split = split_dataset(ds, cfg.ratio, cfg.seed)?;
    let model = fit_model(cfg, &split.train, &split.test)?;
    let report = evaluate_model(&model, &split.test)?;
    Ok((model, report))
}

fn fit_model(cfg: &RunConfig, train: &Dataset, test: &Dataset) -> Result<PipelineModel> {
    let (vocabulary, embedding, centroids, features) = match cfg.kind {
        ModelKind::Bow => {
            let docs: Vec<Vec<String>> = train
                .records()
                .iter()
                .map(|r| tokenize(&r.text, None))
                .collect();
            let vocabulary = Vocabulary::build(&docs, cfg.embed.min_count)?;
            let counts = count_matrix(&docs, &vocabulary);
            let weights = tfidf_matrix(&counts, &vocabulary)?;
            (vocabulary, None, None, weights.rows)
        }
        ModelKind::Vectors | ModelKind::Centroids => {
            let stopwords = cfg.effective_stopwords();
            let train_docs: Vec<Vec<String>> = train
                .records()
                .iter()
                .map(|r| tokenize(&r.text, Some(&stopwords)))
                .collect();
            let mut fit_docs = train_docs.clone();
            if cfg.transductive {
                fit_docs.extend(
                    test.records()
                        .iter()
                        .map(|r| tokenize(&r.text, Some(&stopwords))),
                );
            }
            let vocabulary = Vocabulary::build(&fit_docs, cfg.embed.min_count)?;
            let embed_params = TrainParams {
                seed: derive_stream(cfg.seed, tags::EMBED),
                ..cfg.embed.clone()
            };
            let embedding = train_skipgram(&fit_docs, &vocabulary, &embed_params)?;
            match cfg.kind {
                ModelKind::Vectors => {
                    let features = train_docs
                        .iter()
                        .map(|d| bag_of_vectors(d, &embedding))
                        .collect();
                    (vocabulary, Some(embedding), None, features)
                }
                _ => {
                    let cm = kmeans_fit(
                        &embedding.input,
                        cfg.k,
                        derive_stream(cfg.seed, tags::KMEANS),
                        KMEANS_MAX_ITER,
                    )?;
                    let features = train_docs
                        .iter()
                        .map(|d| bag_of_centroids(d, &cm, &vocabulary))
                        .collect::<Result<Vec<_>>>()?;
                    (vocabulary, Some(embedding), Some(cm), features)
                }
            }
        }
    };

    let targets: Vec<f64> = train
        .records()
        .iter()
        .map(|r| r.human_score as f64)
        .collect();
    let forest_params = ForestParams {
        seed: derive_stream(cfg.seed, tags::FOREST),
        ..cfg.forest.clone()
    };
    let forest = fit_forest(&features, &targets, &forest_params)?;

    let model = PipelineModel {
        kind: cfg.kind,
        max_marks: cfg.max_marks,
        vocabulary,
        embedding,
        centroids,
        forest,
        fingerprint: cfg.fingerprint(),
    };
    model.check_components()?;
    Ok(model)
}

/// Grades every record in `ds` with `model` and reports per-question kappa
/// between the model's marks and the human marks.
pub fn evaluate_model(model: &PipelineModel, ds: &Dataset) -> Result<KappaReport> {
    model.check_components()?;
    if ds.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut questions = Vec::with_capacity(ds.len());
    let mut human = Vec::with_capacity(ds.len());
    let mut predicted = Vec::with_capacity(ds.len());
    for record in ds.records() {
        questions.push(record.question_id.clone());
        human.push(record.human_score);
        predicted.push(model.grade(&record.text)?);
    }
    KappaReport::from_predictions(model.kind, &questions, &human, &predicted, model.max_marks)
}

/// Runs all three featurizations on the identical split (same master seed,
/// same ratio) and ranks them. Returns the trained models in canonical
/// order alongside the comparison.
pub fn compare_pipeline(
    cfg: &RunConfig,
    ds: &Dataset,
) -> Result<(Vec<PipelineModel>, ComparisonReport)> {
    let mut models = Vec::with_capacity(MODEL_ORDER.len());
    let mut reports = Vec::with_capacity(MODEL_ORDER.len());
    for kind in MODEL_ORDER {
        let run_cfg = RunConfig {
            kind,
            ..cfg.clone()
        };
        let (model, report) = run_pipeline(&run_cfg, ds)?;
        models.push(model);
        reports.push(report);
    }
    Ok((models, compare_models(reports)?))
}

/// Serializes a trained pipeline to the sectioned text format.
pub fn write_model<W: Write>(model: &PipelineModel, mut out: W) -> Result<()> {
    model.check_components()?;
    writeln!(out, "GRADESCORE v1")?;

    let vocab = &model.vocabulary;
    writeln!(out, "VOCAB {} {}", vocab.len(), vocab.n_docs())?;
    for w in 0..vocab.len() {
        writeln!(out, "{} {} {}", vocab.token(w), vocab.count(w), vocab.doc_freq(w))?;
    }

    if let Some(emb) = &model.embedding {
        writeln!(out, "EMB")?;
        save_embedding(emb, &mut out)?;
    }

    if let Some(cm) = &model.centroids {
        writeln!(out, "CENTROIDS {} {}", cm.k, cm.dim)?;
        for row in &cm.centroids {
            let mut line = String::new();
            for (i, x) in row.iter().enumerate() {
                if i > 0 {
                    line.push(' ');
                }
                line.push_str(&fmt_f64(*x));
            }
            writeln!(out, "{line}")?;
        }
        let trace: Vec<String> = cm.inertia_trace.iter().map(|x| fmt_f64(*x)).collect();
        writeln!(out, "TRACE {}", trace.join(" "))?;
        let assign: Vec<String> = cm.assignments.iter().map(|a| a.to_string()).collect();
        writeln!(out, "ASSIGN {}", assign.join(" "))?;
    }

    let forest = &model.forest;
    writeln!(out, "FOREST {} {}", forest.params.n_trees, forest.feature_count)?;
    writeln!(
        out,
        "FPARAMS {} {} {} {} {}",
        match forest.params.mtry {
            Some(m) => m.to_string(),
            None => "auto".to_string(),
        },
        forest.params.min_leaf,
        match forest.params.max_depth {
            Some(d) => d.to_string(),
            None => "none".to_string(),
        },
        forest.params.bootstrap,
        forest.params.seed,
    )?;
    for (t, tree) in forest.trees.iter().enumerate() {
        writeln!(out, "TREE {t}")?;
        write_tree(tree, &mut out)?;
    }

    writeln!(
        out,
        "META kind={} max_marks={} fingerprint={:016x}",
        model.kind, model.max_marks, model.fingerprint
    )?;
    writeln!(out, "END")?;
    Ok(())
}

fn write_tree<W: Write>(node: &TreeNode, out: &mut W) -> Result<()> {
    match node {
        TreeNode::Internal {
            feature,
            threshold,
            left,
            right,
        } => {
            writeln!(out, "NODE I {} {}", feature, fmt_f64(*threshold))?;
            write_tree(left, out)?;
            write_tree(right, out)?;
        }
        TreeNode::Leaf { value } => {
            writeln!(out, "NODE L {}", fmt_f64(*value))?;
        }
    }
    Ok(())
}

/// Saves a trained pipeline to `path`.
pub fn save_model(model: &PipelineModel, path: &Path) -> Result<()> {
    let mut buf = Vec::new();
    write_model(model, &mut buf)?;
    let mut file = std::fs::File::create(path).map_err(|e| Error::open(path, e))?;
    file.write_all(&buf)?;
    Ok(())
}

/// Parses a pipeline from the sectioned text format, re-validating every
/// structural invariant; errors carry 1-based line numbers.
pub fn read_model(text: &str) -> Result<PipelineModel> {
    let lines = split_lines(text);
    let mut cur = LineCursor::new(&lines);

    let header = cur.next()?;
    if header != "GRADESCORE v1" {
        return Err(Error::model(1, "expected header `GRADESCORE v1`"));
    }

    let (fields, line) = cur.next_fields()?;
    if fields.len() != 3 || fields[0] != "VOCAB" {
        return Err(Error::model(line, "expected `VOCAB V n_docs`"));
    }
    let v: usize = parse_int(fields[1], line, "vocabulary size V")?;
    let n_docs: usize = parse_int(fields[2], line, "document count")?;
    let mut rows = Vec::with_capacity(v);
    for _ in 0..v {
        let (fields, line) = cur.next_fields()?;
        if fields.len() != 3 {
            return Err(Error::model(line, "expected `token count doc_freq`"));
        }
        rows.push((
            fields[0].to_string(),
            parse_int::<u64>(fields[1], line, "count")?,
            parse_int::<u32>(fields[2], line, "doc_freq")?,
        ));
    }
    let vocab_end = cur.line_no();
    let vocabulary =
        Vocabulary::from_parts(rows, n_docs).map_err(|reason| Error::model(vocab_end, reason))?;

    let mut section = cur.next()?;
    let mut embedding = None;
    if section == "EMB" {
        embedding = Some(parse_embedding_at(&mut cur)?);
        section = cur.next()?;
    }

    let mut centroids = None;
    let section_fields: Vec<&str> = section.split(' ').collect();
    let mut section_fields = section_fields;
    if section_fields.first() == Some(&"CENTROIDS") {
        let line = cur.line_no();
        if section_fields.len() != 3 {
            return Err(Error::model(line, "expected `CENTROIDS k d`"));
        }
        let k: usize = parse_int(section_fields[1], line, "cluster count k")?;
        let dim: usize = parse_int(section_fields[2], line, "dimension d")?;
        if k == 0 || dim == 0 {
            return Err(Error::model(line, "k and d must be at least 1"));
        }
        let mut centers = Vec::with_capacity(k);
        for _ in 0..k {
            let (fields, line) = cur.next_fields()?;
            if fields.len() != dim {
                return Err(Error::model(
                    line,
                    format!("expected {dim} reals, found {} fields", fields.len()),
                ));
            }
            let mut row = Vec::with_capacity(dim);
            for f in fields {
                row.push(parse_f64(f, line)?);
            }
            centers.push(row);
        }
        let (fields, line) = cur.next_fields()?;
        if fields.first() != Some(&"TRACE") || fields.len() < 2 {
            return Err(Error::model(line, "expected `TRACE inertia..`"));
        }
        let mut inertia_trace = Vec::with_capacity(fields.len() - 1);
        for f in &fields[1..] {
            inertia_trace.push(parse_f64(f, line)?);
        }
        let (fields, line) = cur.next_fields()?;
        if fields.first() != Some(&"ASSIGN") {
            return Err(Error::model(line, "expected `ASSIGN a0 a1 ..`"));
        }
        let mut assignments = Vec::with_capacity(fields.len() - 1);
        for f in &fields[1..] {
            let a: u32 = parse_int(f, line, "cluster assignment")?;
            if a as usize >= k {
                return Err(Error::model(line, format!("assignment {a} outside 0..{k}")));
            }
            assignments.push(a);
        }
        centroids = Some(CentroidModel {
            k,
            dim,
            centroids: centers,
            assignments,
            inertia: *inertia_trace.last().expect("nonempty by check above"),
            inertia_trace,
        });
        section_fields = cur.next()?.split(' ').collect();
    }

    // FOREST section.
    let line = cur.line_no();
    if section_fields.first() != Some(&"FOREST") || section_fields.len() != 3 {
        return Err(Error::model(line, "expected `FOREST n_trees feature_count`"));
    }
    let n_trees: usize = parse_int(section_fields[1], line, "tree count")?;
    let feature_count: usize = parse_int(section_fields[2], line, "feature count")?;
    if n_trees == 0 || feature_count == 0 {
        return Err(Error::model(line, "tree and feature counts must be at least 1"));
    }
    let (fields, line) = cur.next_fields()?;
    if fields.first() != Some(&"FPARAMS") || fields.len() != 6 {
        return Err(Error::model(
            line,
            "expected `FPARAMS mtry min_leaf max_depth bootstrap seed`",
        ));
    }
    let mtry = if fields[1] == "auto" {
        None
    } else {
        Some(parse_int::<usize>(fields[1], line, "mtry")?)
    };
    let min_leaf: usize = parse_int(fields[2], line, "min_leaf")?;
    let max_depth = if fields[3] == "none" {
        None
    } else {
        Some(parse_int::<usize>(fields[3], line, "max_depth")?)
    };
    let bootstrap = match fields[4] {
        "true" => true,
        "false" => false,
        other => return Err(Error::model(line, format!("bad bootstrap flag `{other}`"))),
    };
    let seed: u64 = parse_int(fields[5], line, "seed")?;
    let params = ForestParams {
        n_trees,
        mtry,
        min_leaf,
        max_depth,
        bootstrap,
        seed,
    };
    let mut trees = Vec::with_capacity(n_trees);
    for t in 0..n_trees {
        let (fields, line) = cur.next_fields()?;
        if fields.len() != 2 || fields[0] != "TREE" {
            return Err(Error::model(line, format!("expected `TREE {t}`")));
        }
        let index: usize = parse_int(fields[1], line, "tree index")?;
        if index != t {
            return Err(Error::model(line, format!("expected tree {t}, found {index}")));
        }
        trees.push(read_tree(&mut cur, feature_count)?);
    }
    let forest = ForestModel {
        trees,
        feature_count,
        params,
    };

    let (fields, line) = cur.next_fields()?;
    if fields.first() != Some(&"META") || fields.len() != 4 {
        return Err(Error::model(
            line,
            "expected `META kind=.. max_marks=.. fingerprint=..`",
        ));
    }
    let mut kind = None;
    let mut max_marks = None;
    let mut fingerprint = None;
    for field in &fields[1..] {
        let (key, value) = field.split_once('=').ok_or_else(|| {
            Error::model(line, format!("expected key=value, found `{field}`"))
        })?;
        match key {
            "kind" => {
                kind = Some(value.parse::<ModelKind>().map_err(|_| {
                    Error::model(line, format!("unknown model kind `{value}`"))
                })?);
            }
            "max_marks" => max_marks = Some(parse_int::<u32>(value, line, "max_marks")?),
            "fingerprint" => {
                fingerprint = Some(u64::from_str_radix(value, 16).map_err(|_| {
                    Error::model(line, format!("bad fingerprint `{value}`"))
                })?);
            }
            other => return Err(Error::model(line, format!("unknown META key `{other}`"))),
        }
    }
    let (Some(kind), Some(max_marks), Some(fingerprint)) = (kind, max_marks, fingerprint) else {
        return Err(Error::model(line, "META needs kind, max_marks, fingerprint"));
    };
    if max_marks == 0 {
        return Err(Error::model(line, "max_marks must be at least 1"));
    }

    let end = cur.next()?;
    if end != "END" {
        return Err(Error::model(cur.line_no(), "expected `END`"));
    }
    if !cur.done() {
        return Err(Error::model(cur.line_no() + 1, "trailing content after END"));
    }

    let model = PipelineModel {
        kind,
        max_marks,
        vocabulary,
        embedding,
        centroids,
        forest,
        fingerprint,
    };
    model.check_components().map_err(|e| match e {
        Error::InvalidParams { reason } => Error::model(line, reason),
        other => other,
    })?;
    Ok(model)
}

fn read_tree(cur: &mut LineCursor<'_>, feature_count: usize) -> Result<TreeNode> {
    let (fields, line) = cur.next_fields()?;
    if fields.first() != Some(&"NODE") || fields.len() < 3 {
        return Err(Error::model(line, "expected `NODE I f thr` or `NODE L value`"));
    }
    match fields[1] {
        "I" => {
            if fields.len() != 4 {
                return Err(Error::model(line, "expected `NODE I f thr`"));
            }
            let feature: usize = parse_int(fields[2], line, "feature index")?;
            if feature >= feature_count {
                return Err(Error::model(
                    line,
                    format!("feature {feature} outside 0..{feature_count}"),
                ));
            }
            let threshold = parse_f64(fields[3], line)?;
            let left = read_tree(cur, feature_count)?;
            let right = read_tree(cur, feature_count)?;
            Ok(TreeNode::Internal {
                feature,
                threshold,
                left: Box::new(left),
                right: Box::new(right),
            })
        }
        "L" => {
            if fields.len() != 3 {
                return Err(Error::model(line, "expected `NODE L value`"));
            }
            Ok(TreeNode::Leaf {
                value: parse_f64(fields[2], line)?,
            })
        }
        other => Err(Error::model(line, format!("unknown node tag `{other}`"))),
    }
}

/// Loads a pipeline model file from disk.
pub fn load_model(path: &Path) -> Result<PipelineModel> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::open(path, e))?;
    read_model(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{generate_synthetic, SynthSpec};

    /// Small, fast settings shared by the pipeline tests.
    fn tiny_config(kind: ModelKind) -> RunConfig {
        RunConfig {
            max_marks: 3,
            seed: 11,
            k: 4,
            embed: TrainParams {
                dim: 8,
                window: 2,
                epochs: 3,
                ..TrainParams::default()
            },
            forest: ForestParams {
                n_trees: 20,
                ..ForestParams::default()
            },
            ..RunConfig::new(kind)
        }
    }

    fn tiny_dataset() -> Dataset {
        let spec = SynthSpec {
            records: 60,
            max_marks: 3,
            questions: 2,
            keywords_per_question: 3,
            filler_vocab: 30,
            min_len: 10,
            max_len: 20,
        };
        generate_synthetic(&spec, 3).unwrap()
    }

    #[test]
    fn run_pipeline_trains_and_scores_each_kind() {
        let ds = tiny_dataset();
        for kind in MODEL_ORDER {
            let cfg = tiny_config(kind);
            let (model, report) = run_pipeline(&cfg, &ds).unwrap();
            assert_eq!(model.kind, kind);
            model.check_components().unwrap();
            // 60 × 0.7 → 42 train, 18 test.
            assert_eq!(report.predicted.len(), 18);
            assert!(report.predicted.iter().all(|&p| p <= 3));
            assert_eq!(report.per_question.len(), 2);
            for (_, kappa) in &report.per_question {
                assert!(kappa.is_finite());
            }
        }
    }

    #[test]
    fn identical_runs_are_identical() {
        let ds = tiny_dataset();
        let cfg = tiny_config(ModelKind::Centroids);
        let (m1, r1) = run_pipeline(&cfg, &ds).unwrap();
        let (m2, r2) = run_pipeline(&cfg, &ds).unwrap();
        assert_eq!(m1, m2);
        assert_eq!(r1, r2);
        let other = RunConfig {
            seed: 12,
            ..cfg
        };
        let (m3, _) = run_pipeline(&other, &ds).unwrap();
        assert_ne!(m1, m3);
    }

    #[test]
    fn compare_matches_individual_runs_and_shares_the_fold() {
        let ds = tiny_dataset();
        let cfg = tiny_config(ModelKind::Bow);
        let (models, cmp) = compare_pipeline(&cfg, &ds).unwrap();
        assert_eq!(models.len(), 3);
        for (i, kind) in MODEL_ORDER.iter().enumerate() {
            let single_cfg = RunConfig {
                kind: *kind,
                ..cfg.clone()
            };
            let (single_model, single_report) = run_pipeline(&single_cfg, &ds).unwrap();
            assert_eq!(models[i], single_model);
            assert_eq!(cmp.reports[i], single_report);
        }
        // All three reports grade the same held-out answers.
        assert_eq!(cmp.reports[0].human, cmp.reports[1].human);
        assert_eq!(cmp.reports[0].questions, cmp.reports[2].questions);
    }

    #[test]
    fn save_load_round_trips_predictions_and_bytes() {
        let ds = tiny_dataset();
        let probes = [
            "the cell wall keeps kwbb kwbc and kwbd stable",
            "filaa filab unrelated words only",
            "",
            "kwaa kwab kwac kwad kwae kwaf",
        ];
        for kind in MODEL_ORDER {
            let cfg = tiny_config(kind);
            let (model, _) = run_pipeline(&cfg, &ds).unwrap();

            let mut bytes = Vec::new();
            write_model(&model, &mut bytes).unwrap();
            let text = String::from_utf8(bytes).unwrap();
            let loaded = read_model(&text).unwrap();

            assert_eq!(loaded, model, "{kind}: loaded model differs");
            for probe in probes {
                assert_eq!(
                    loaded.grade(probe).unwrap(),
                    model.grade(probe).unwrap(),
                    "{kind}: prediction changed after round trip"
                );
            }
            let mut again = Vec::new();
            write_model(&loaded, &mut again).unwrap();
            assert_eq!(
                String::from_utf8(again).unwrap(),
                text,
                "{kind}: re-serialization is not byte-identical"
            );
        }
    }

    #[test]
    fn save_load_via_files() {
        let ds = tiny_dataset();
        let cfg = tiny_config(ModelKind::Vectors);
        let (model, _) = run_pipeline(&cfg, &ds).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model_vectors.txt");
        save_model(&model, &path).unwrap();
        let loaded = load_model(&path).unwrap();
        assert_eq!(loaded, model);
        assert!(matches!(
            load_model(&dir.path().join("missing.txt")),
            Err(Error::MissingFile { .. })
        ));
    }

    #[test]
    fn evaluate_model_matches_run_report() {
        let ds = tiny_dataset();
        let cfg = tiny_config(ModelKind::Centroids);
        let (model, report) = run_pipeline(&cfg, &ds).unwrap();
        let split = split_dataset(&ds, cfg.ratio, cfg.seed).unwrap();
        let again = evaluate_model(&model, &split.test).unwrap();
        assert_eq!(again, report);
    }

    #[test]
    fn transductive_changes_the_vocabulary_not_the_scores_used() {
        let ds = tiny_dataset();
        let cfg = RunConfig {
            transductive: true,
            ..tiny_config(ModelKind::Vectors)
        };
        let (trans_model, _) = run_pipeline(&cfg, &ds).unwrap();
        let plain_cfg = RunConfig {
            transductive: false,
            ..cfg.clone()
        };
        let (plain_model, _) = run_pipeline(&plain_cfg, &ds).unwrap();
        // The transductive vocabulary sees the test fold's text too, so it
        // can only be at least as large.
        assert!(trans_model.vocabulary.len() >= plain_model.vocabulary.len());
        assert_ne!(trans_model.fingerprint, plain_model.fingerprint);
        // Determinism holds in both modes.
        let (again, _) = run_pipeline(&cfg, &ds).unwrap();
        assert_eq!(trans_model, again);
    }

    #[test]
    fn grading_out_of_vocabulary_text_never_errors() {
        let ds = tiny_dataset();
        for kind in MODEL_ORDER {
            let (model, _) = run_pipeline(&tiny_config(kind), &ds).unwrap();
            let mark = model.grade("zzz qqq entirely unseen words").unwrap();
            assert!(mark <= 3);
        }
    }

    #[test]
    fn config_validation() {
        let ds = tiny_dataset();
        let bad_ratio = RunConfig {
            ratio: 1.0,
            ..tiny_config(ModelKind::Bow)
        };
        assert!(matches!(
            run_pipeline(&bad_ratio, &ds),
            Err(Error::InvalidRatio { .. })
        ));
        for cfg in [
            RunConfig { max_marks: 0, ..tiny_config(ModelKind::Bow) },
            RunConfig { k: 0, ..tiny_config(ModelKind::Bow) },
            RunConfig {
                embed: TrainParams { dim: 0, ..TrainParams::default() },
                ..tiny_config(ModelKind::Bow)
            },
            RunConfig {
                forest: ForestParams { n_trees: 0, ..ForestParams::default() },
                ..tiny_config(ModelKind::Bow)
            },
        ] {
            assert!(matches!(
                run_pipeline(&cfg, &ds),
                Err(Error::InvalidParams { .. })
            ));
        }
        let empty = Dataset::new(vec![], 3);
        assert!(empty.is_err()); // can't even build an empty dataset
        // Scores above the configured scale are rejected before any work.
        let low_marks = RunConfig {
            max_marks: 2,
            ..tiny_config(ModelKind::Bow)
        };
        assert!(matches!(
            run_pipeline(&low_marks, &ds),
            Err(Error::OutOfRangeScore { .. })
        ));
    }

    #[test]
    fn fingerprint_tracks_every_knob() {
        let base = tiny_config(ModelKind::Bow);
        let fp = base.fingerprint();
        assert_eq!(fp, base.fingerprint(), "fingerprint must be stable");
        let variants = [
            RunConfig { kind: ModelKind::Vectors, ..base.clone() },
            RunConfig { max_marks: 4, ..base.clone() },
            RunConfig { ratio: 0.8, ..base.clone() },
            RunConfig { seed: 99, ..base.clone() },
            RunConfig { k: 5, ..base.clone() },
            RunConfig { transductive: true, ..base.clone() },
            RunConfig {
                embed: TrainParams { dim: 9, ..base.embed.clone() },
                ..base.clone()
            },
            RunConfig {
                forest: ForestParams { n_trees: 21, ..base.forest.clone() },
                ..base.clone()
            },
            RunConfig {
                stopwords: Some(HashSet::from(["the".to_string()])),
                ..base.clone()
            },
        ];
        for variant in variants {
            assert_ne!(variant.fingerprint(), fp, "{variant:?} collided");
        }
    }

    #[test]
    fn malformed_model_files_are_rejected_with_line_numbers() {
        let ds = tiny_dataset();
        let (model, _) = run_pipeline(&tiny_config(ModelKind::Centroids), &ds).unwrap();
        let mut bytes = Vec::new();
        write_model(&model, &mut bytes).unwrap();
        let good = String::from_utf8(bytes).unwrap();

        // Wrong magic.
        let bad = good.replacen("GRADESCORE v1", "GRADESCORE v2", 1);
        assert!(matches!(
            read_model(&bad),
            Err(Error::ModelFormat { line: 1, .. })
        ));

        // Truncation at every section boundary still yields a line-numbered
        // parse error rather than a panic.
        for marker in ["EMB", "CENTROIDS", "FOREST", "META", "END"] {
            let cut = good
                .lines()
                .take_while(|l| !l.starts_with(marker))
                .collect::<Vec<_>>()
                .join("\n");
            assert!(
                matches!(read_model(&cut), Err(Error::ModelFormat { .. })),
                "truncation before {marker} was accepted"
            );
        }

        // A corrupted float.
        let bad = good.replacen("e-", "x-", 1);
        assert!(matches!(read_model(&bad), Err(Error::ModelFormat { .. })));

        // Trailing junk.
        let bad = format!("{good}junk\n");
        assert!(matches!(read_model(&bad), Err(Error::ModelFormat { .. })));

        // Kind/section mismatch: claim bow while carrying embeddings.
        let bad = good.replacen("kind=centroids", "kind=bow", 1);
        assert!(matches!(read_model(&bad), Err(Error::ModelFormat { .. })));
    }

    #[test]
    fn bow_features_use_training_document_frequencies() {
        let ds = tiny_dataset();
        let (model, _) = run_pipeline(&tiny_config(ModelKind::Bow), &ds).unwrap();
        // Vocabulary statistics must come from the 42-document train fold.
        assert_eq!(model.vocabulary.n_docs(), 42);
        let features = model.featurize("kwaa kwaa filaa").unwrap();
        assert_eq!(features.len(), model.vocabulary.len());
        let sum: f64 = features.iter().sum();
        // Nonzero rows are L1-normalized.
        if sum > 0.0 {
            assert!((sum - 1.0).abs() < 1e-9);
        }
    }
}
