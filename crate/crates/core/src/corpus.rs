//! Graded-answer records: CSV ingestion, train/test splitting, and a
//! synthetic dataset generator for benchmarking.
//!
//! The on-disk shape is a UTF-8 CSV with header `id,question,answer,score`
//! (RFC 4180 — answers may contain quoted commas and newlines). The mark
//! scale `max_marks` is caller-supplied configuration, never inferred from
//! the data: a file where nobody scored full marks must not shrink the
//! scale.

use std::collections::{BTreeSet, HashSet};
use std::path::Path;

use crate::error::{Error, Result};
use crate::rng::{derive_stream, tags, Xoshiro256};

/// One answer with its human-assigned mark.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnswerRecord {
    /// Unique record id.
    pub id: String,
    /// Question this answers; reports break kappa out per question.
    pub question_id: String,
    /// Free-text answer.
    pub text: String,
    /// Integer mark in 0..=max_marks.
    pub human_score: u32,
}

/// An ordered, validated collection of records sharing one mark scale.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    records: Vec<AnswerRecord>,
    max_marks: u32,
}

const HEADER: [&str; 4] = ["id", "question", "answer", "score"];

impl Dataset {
    /// Validates and wraps records: non-empty, scores within 0..=max_marks,
    /// ids unique. Positions in errors are 1-based record ordinals.
    pub fn new(records: Vec<AnswerRecord>, max_marks: u32) -> Result<Self> {
        if max_marks == 0 {
            return Err(Error::InvalidParams {
                reason: "max_marks must be at least 1".to_string(),
            });
        }
        if records.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let mut ids: HashSet<&str> = HashSet::with_capacity(records.len());
        for (ordinal, rec) in records.iter().enumerate() {
            if rec.human_score > max_marks {
                return Err(Error::OutOfRangeScore {
                    score: rec.human_score,
                    max_marks,
                });
            }
            if !ids.insert(&rec.id) {
                return Err(Error::DuplicateId {
                    line: ordinal as u64 + 1,
                    id: rec.id.clone(),
                });
            }
        }
        Ok(Dataset { records, max_marks })
    }

    /// Constructor for records already validated against `max_marks`
    /// (split folds, loader output).
    fn from_validated(records: Vec<AnswerRecord>, max_marks: u32) -> Self {
        Dataset { records, max_marks }
    }

    pub fn records(&self) -> &[AnswerRecord] {
        &self.records
    }

    pub fn max_marks(&self) -> u32 {
        self.max_marks
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Distinct question ids present, in sorted order.
    pub fn question_ids(&self) -> Vec<String> {
        let set: BTreeSet<&str> = self.records.iter().map(|r| r.question_id.as_str()).collect();
        set.into_iter().map(str::to_string).collect()
    }

    /// Loads a dataset from CSV with header `id,question,answer,score`.
    ///
    /// Records keep file order. Errors carry the 1-based line number the
    /// CSV reader reports (multi-line quoted answers count their physical
    /// lines, so numbers always point into the real file).
    pub fn load(path: &Path, max_marks: u32) -> Result<Self> {
        if max_marks == 0 {
            return Err(Error::InvalidParams {
                reason: "max_marks must be at least 1".to_string(),
            });
        }
        let file = std::fs::File::open(path).map_err(|e| Error::open(path, e))?;
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(false)
            .from_reader(file);

        let headers = reader.headers()?.clone();
        if headers.iter().ne(HEADER) {
            return Err(Error::InvalidHeader {
                found: headers.iter().collect::<Vec<_>>().join(","),
            });
        }

        let mut records = Vec::new();
        let mut ids: HashSet<String> = HashSet::new();
        for row in reader.records() {
            let row = match row {
                Ok(row) => row,
                Err(err) => {
                    // Wrong field counts become MalformedRow with a line; all
                    // other CSV-level failures pass through.
                    if let csv::ErrorKind::UnequalLengths { pos, len, .. } = err.kind() {
                        let line = pos.as_ref().map_or(0, csv::Position::line);
                        return Err(Error::MalformedRow {
                            line,
                            reason: format!("expected 4 fields, found {len}"),
                        });
                    }
                    return Err(Error::Csv(err));
                }
            };
            let line = row.position().map_or(0, csv::Position::line);
            let id = row[0].to_string();
            let score_text = row[3].trim();
            let score: u32 = score_text.parse().map_err(|_| Error::InvalidScore {
                line,
                value: score_text.to_string(),
                max_marks,
            })?;
            if score > max_marks {
                return Err(Error::InvalidScore {
                    line,
                    value: score_text.to_string(),
                    max_marks,
                });
            }
            if !ids.insert(id.clone()) {
                return Err(Error::DuplicateId { line, id });
            }
            records.push(AnswerRecord {
                id,
                question_id: row[1].to_string(),
                text: row[2].to_string(),
                human_score: score,
            });
        }
        if records.is_empty() {
            return Err(Error::EmptyDataset);
        }
        Ok(Dataset::from_validated(records, max_marks))
    }

    /// Writes the dataset as CSV in the same format [`Dataset::load`] reads.
    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::open(path, e))?;
        let mut writer = csv::Writer::from_writer(file);
        writer.write_record(HEADER)?;
        for rec in &self.records {
            writer.write_record([
                rec.id.as_str(),
                rec.question_id.as_str(),
                rec.text.as_str(),
                &rec.human_score.to_string(),
            ])?;
        }
        writer.flush()?;
        Ok(())
    }
}

/// A disjoint train/test partition of a dataset.
#[derive(Debug, Clone)]
pub struct SplitPair {
    pub train: Dataset,
    pub test: Dataset,
    pub seed: u64,
    pub ratio: f64,
}

/// Splits `ds` into train/test folds of sizes ⌊ratio·n⌋ / remainder.
///
/// The records are Fisher–Yates-shuffled by `seed`, then the first
/// ⌊ratio·n⌋ go to train and the rest to test; folds keep the shuffled
/// order. The floor is taken on `ratio·n + 1e-9`: the nudge only shields
/// against f64 artifacts (0.7 × 350 evaluates to 244.999…97 in binary
/// floating point, and the intended size is 245), it can never lift a
/// genuinely fractional product to the next integer for realistic n.
pub fn split_dataset(ds: &Dataset, ratio: f64, seed: u64) -> Result<SplitPair> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::InvalidRatio { ratio });
    }
    if ds.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let n = ds.len();
    let mut order: Vec<usize> = (0..n).collect();
    Xoshiro256::new(derive_stream(seed, tags::SPLIT)).shuffle(&mut order);
    let n_train = (ratio * n as f64 + 1e-9).floor() as usize;
    let take = |slice: &[usize]| -> Vec<AnswerRecord> {
        slice.iter().map(|&i| ds.records[i].clone()).collect()
    };
    Ok(SplitPair {
        train: Dataset::from_validated(take(&order[..n_train]), ds.max_marks),
        test: Dataset::from_validated(take(&order[n_train..]), ds.max_marks),
        seed,
        ratio,
    })
}

/// Shape of a synthetic dataset: how many records, questions, keywords per
/// question, filler words, and how long answers run.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub records: usize,
    pub max_marks: u32,
    pub questions: usize,
    /// Size of each question's keyword inventory. Each keyword is a graded
    /// concept with several interchangeable surface forms (see
    /// [`generate_synthetic`]).
    pub keywords_per_question: usize,
    /// Size of the shared filler vocabulary.
    pub filler_vocab: usize,
    /// Answer length range in tokens, inclusive.
    pub min_len: usize,
    pub max_len: usize,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            records: 350,
            max_marks: 5,
            questions: 1,
            keywords_per_question: 6,
            filler_vocab: 120,
            min_len: 20,
            max_len: 60,
        }
    }
}

impl SynthSpec {
    fn validate(&self) -> Result<()> {
        let positive: [(&str, usize); 6] = [
            ("records", self.records),
            ("max_marks", self.max_marks as usize),
            ("questions", self.questions),
            ("keywords_per_question", self.keywords_per_question),
            ("filler_vocab", self.filler_vocab),
            ("min_len", self.min_len),
        ];
        for (name, value) in positive {
            if value == 0 {
                return Err(Error::InvalidSpec {
                    reason: format!("{name} must be positive"),
                });
            }
        }
        if self.max_len < self.min_len {
            return Err(Error::InvalidSpec {
                reason: format!("max_len {} below min_len {}", self.max_len, self.min_len),
            });
        }
        if self.keywords_per_question * PHRASE_LEN > self.min_len {
            return Err(Error::InvalidSpec {
                reason: format!(
                    "keywords_per_question {} needs {} phrase tokens, above min_len {}: \
                     full-coverage answers could not fit",
                    self.keywords_per_question,
                    self.keywords_per_question * PHRASE_LEN,
                    self.min_len
                ),
            });
        }
        Ok(())
    }
}

/// Spells index `n` as a lowercase word: 0..25 → a..z, 26 → aa, and so on
/// (bijective base 26). Keeps generated tokens inside the tokenizer's
/// `[a-z]+` alphabet.
fn spell(mut n: usize) -> String {
    let mut buf = Vec::new();
    loop {
        buf.push(b'a' + (n % 26) as u8);
        n /= 26;
        if n == 0 {
            break;
        }
        n -= 1;
    }
    buf.reverse();
    String::from_utf8(buf).expect("ascii by construction")
}

/// Interchangeable surface forms per keyword concept: an answer that covers
/// a concept expresses it through exactly one of these synonyms.
const SYNONYM_FORMS: usize = 3;
/// Context-word pool per concept; each mention is flanked by two distinct
/// words from its concept's pool.
const CONTEXT_POOL: usize = 4;
/// Tokens emitted per covered concept: context, synonym, context.
const PHRASE_LEN: usize = 3;

/// One gradeable keyword concept: the synonym forms that can express it and
/// the context words that accompany a mention.
struct Concept {
    synonyms: Vec<String>,
    contexts: Vec<String>,
}

/// The fixed keyword inventory of question `q`: `k` concepts with
/// deterministic token names inside the tokenizer's `[a-z]+` alphabet.
fn concept_inventory(q: usize, k: usize) -> Vec<Concept> {
    (0..k)
        .map(|i| Concept {
            synonyms: (0..SYNONYM_FORMS)
                .map(|f| format!("kw{}{}{}", spell(q), spell(i), spell(f)))
                .collect(),
            contexts: (0..CONTEXT_POOL)
                .map(|j| format!("ctx{}{}{}", spell(q), spell(i), spell(j)))
                .collect(),
        })
        .collect()
}

/// Builds one synthetic answer with keyword coverage `c` in [0, 1]:
/// round(c·K) distinct concepts, each mentioned as one contiguous phrase
/// `context synonym context` placed among uniform filler, paired with
/// human_score = round(covered/K · max_marks).
fn synth_answer(
    c: f64,
    concepts: &[Concept],
    filler: &[String],
    spec: &SynthSpec,
    rng: &mut Xoshiro256,
) -> (String, u32) {
    let k = concepts.len();
    let covered = (c * k as f64).round() as usize;
    // Items are either an intact three-token phrase or a single filler
    // token; shuffling items (not tokens) randomizes placement while
    // keeping each mention's context words adjacent to its synonym.
    let mut items: Vec<Vec<String>> = Vec::new();
    for ci in rng.sample_distinct(k, covered) {
        let concept = &concepts[ci];
        let syn = concept.synonyms[rng.below(SYNONYM_FORMS as u64) as usize].clone();
        let flanks = rng.sample_distinct(CONTEXT_POOL, 2);
        items.push(vec![
            concept.contexts[flanks[0]].clone(),
            syn,
            concept.contexts[flanks[1]].clone(),
        ]);
    }
    let len = spec.min_len + rng.below((spec.max_len - spec.min_len + 1) as u64) as usize;
    for _ in 0..len.saturating_sub(covered * PHRASE_LEN) {
        items.push(vec![filler[rng.below(filler.len() as u64) as usize].clone()]);
    }
    rng.shuffle(&mut items);
    let toks: Vec<String> = items.into_iter().flatten().collect();
    let score = (covered as f64 / k as f64 * spec.max_marks as f64).round() as u32;
    (toks.join(" "), score)
}

/// Generates a synthetic graded-answer dataset.
///
/// Per record: coverage c ~ U[0,1); the answer covers round(c·K) distinct
/// keyword concepts of its question, and the human score is
/// round(covered/K · max_marks) — a monotone non-decreasing function of the
/// coverage count. Each covered concept appears as one contiguous phrase
/// `context synonym context`: the synonym is one of three interchangeable
/// surface forms and the flanks are two words from the concept's four-word
/// context pool, so the forms of one concept share contexts without
/// co-occurring — the distributional signal that word-vector models exploit,
/// while sparse counts see the evidence split across forms. Remaining length
/// (uniform in [min_len, max_len]) is uniform filler, and phrase placement
/// is shuffled phrase-intact. Pure function of (spec, seed): draws come from
/// one derived stream in a fixed documented order (coverage, concept choice,
/// per-concept synonym + flank draws, length, filler, placement shuffle —
/// per record, records in order).
pub fn generate_synthetic(spec: &SynthSpec, seed: u64) -> Result<Dataset> {
    spec.validate()?;
    let inventories: Vec<Vec<Concept>> = (0..spec.questions)
        .map(|q| concept_inventory(q, spec.keywords_per_question))
        .collect();
    let filler: Vec<String> = (0..spec.filler_vocab)
        .map(|j| format!("fil{}", spell(j)))
        .collect();

    let mut rng = Xoshiro256::new(derive_stream(seed, tags::SYNTH));
    let mut records = Vec::with_capacity(spec.records);
    for i in 0..spec.records {
        let q = i % spec.questions;
        let c = rng.next_f64();
        let (text, score) = synth_answer(c, &inventories[q], &filler, spec, &mut rng);
        records.push(AnswerRecord {
            id: format!("r{:05}", i + 1),
            question_id: format!("q{}", q + 1),
            text,
            human_score: score,
        });
    }
    Dataset::new(records, spec.max_marks)
}
