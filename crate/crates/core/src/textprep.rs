//! Tokenization, stopword filtering, and vocabulary construction shared by
//! every featurizer.
//!
//! A token is a maximal run of ASCII letters, lowercased; digits and
//! punctuation separate. The rule is deliberately rigid so that a corpus
//! tokenizes identically everywhere. Token sequences are plain
//! `Vec<String>` throughout the crate.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// The built-in stopword list: 127 English function words, one per line,
/// shipped inside the binary. Override with a file of the same shape.
pub const BUILTIN_STOPWORDS: &str = include_str!("stopwords.txt");

/// Parses [`BUILTIN_STOPWORDS`] into a lookup set.
pub fn builtin_stopwords() -> HashSet<String> {
    BUILTIN_STOPWORDS.lines().map(str::to_string).collect()
}

/// Loads a stopword file: one word per line, blank lines ignored, entries
/// lowercased so the set matches tokenizer output.
pub fn load_stopwords(path: &Path) -> Result<HashSet<String>> {
    let text = fs::read_to_string(path).map_err(|e| Error::open(path, e))?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|w| !w.is_empty())
        .map(str::to_lowercase)
        .collect())
}

/// Splits `text` into lowercase alphabetic tokens.
///
/// Every maximal run of ASCII letters becomes one token; all other
/// characters separate. When `stopwords` is given, tokens in the set are
/// dropped after lowercasing. `"B-tree's O(log n)"` tokenizes to
/// `[b, tree, s, o, log, n]`.
pub fn tokenize(text: &str, stopwords: Option<&HashSet<String>>) -> Vec<String> {
    let keep = |tok: &String| stopwords.is_none_or(|set| !set.contains(tok));
    let mut out = Vec::new();
    let mut cur = String::new();
    for ch in text.chars() {
        if ch.is_ascii_alphabetic() {
            cur.push(ch.to_ascii_lowercase());
        } else if !cur.is_empty() {
            let tok = std::mem::take(&mut cur);
            if keep(&tok) {
                out.push(tok);
            }
        }
    }
    if !cur.is_empty() && keep(&cur) {
        out.push(cur);
    }
    out
}

/// Token inventory of a training corpus, with the statistics TF-IDF needs.
///
/// Indices are dense in 0..V and assigned by descending corpus frequency,
/// ties broken lexicographically — a pure function of the corpus content,
/// independent of document order.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
    counts: Vec<u64>,
    doc_freqs: Vec<u32>,
    n_docs: usize,
}

impl Vocabulary {
    /// Builds the vocabulary over tokenized documents, keeping tokens whose
    /// corpus frequency is at least `min_count` (values below 1 behave as 1).
    ///
    /// Document frequencies are counted on the token streams as given, i.e.
    /// after whatever stopword filtering the caller applied.
    pub fn build(docs: &[Vec<String>], min_count: u64) -> Result<Self> {
        let mut counts: HashMap<&str, u64> = HashMap::new();
        let mut doc_freqs: HashMap<&str, u32> = HashMap::new();
        for doc in docs {
            let mut seen: HashSet<&str> = HashSet::new();
            for tok in doc {
                *counts.entry(tok).or_insert(0) += 1;
                if seen.insert(tok) {
                    *doc_freqs.entry(tok).or_insert(0) += 1;
                }
            }
        }
        let min_count = min_count.max(1);
        let mut kept: Vec<(&str, u64)> = counts
            .into_iter()
            .filter(|&(_, c)| c >= min_count)
            .collect();
        if kept.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));

        let mut vocab = Vocabulary {
            tokens: Vec::with_capacity(kept.len()),
            index: HashMap::with_capacity(kept.len()),
            counts: Vec::with_capacity(kept.len()),
            doc_freqs: Vec::with_capacity(kept.len()),
            n_docs: docs.len(),
        };
        for (i, (tok, count)) in kept.into_iter().enumerate() {
            vocab.index.insert(tok.to_string(), i);
            vocab.doc_freqs.push(doc_freqs[tok]);
            vocab.tokens.push(tok.to_string());
            vocab.counts.push(count);
        }
        Ok(vocab)
    }

    /// Reassembles a vocabulary from persisted rows, re-validating the
    /// invariants (distinct tokens, df within 1..=n_docs, count ≥ df).
    pub(crate) fn from_parts(
        rows: Vec<(String, u64, u32)>,
        n_docs: usize,
    ) -> std::result::Result<Self, String> {
        let mut vocab = Vocabulary {
            tokens: Vec::with_capacity(rows.len()),
            index: HashMap::with_capacity(rows.len()),
            counts: Vec::with_capacity(rows.len()),
            doc_freqs: Vec::with_capacity(rows.len()),
            n_docs,
        };
        for (i, (tok, count, df)) in rows.into_iter().enumerate() {
            if df == 0 || df as usize > n_docs {
                return Err(format!("token `{tok}`: doc_freq {df} outside 1..={n_docs}"));
            }
            if count < df as u64 {
                return Err(format!("token `{tok}`: count {count} below doc_freq {df}"));
            }
            if vocab.index.insert(tok.clone(), i).is_some() {
                return Err(format!("token `{tok}` listed twice"));
            }
            vocab.tokens.push(tok);
            vocab.counts.push(count);
            vocab.doc_freqs.push(df);
        }
        if vocab.tokens.is_empty() {
            return Err("empty vocabulary".to_string());
        }
        Ok(vocab)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Dense index of `token`, if present.
    pub fn index_of(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    /// Token at `idx`. Panics on out-of-range (indices come from this map).
    pub fn token(&self, idx: usize) -> &str {
        &self.tokens[idx]
    }

    /// All tokens in index order.
    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    /// Corpus frequency of token `idx`.
    pub fn count(&self, idx: usize) -> u64 {
        self.counts[idx]
    }

    /// Corpus frequencies in index order (Huffman construction input).
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Number of documents containing token `idx`.
    pub fn doc_freq(&self, idx: usize) -> u32 {
        self.doc_freqs[idx]
    }

    /// Total number of documents the vocabulary was built over.
    pub fn n_docs(&self) -> usize {
        self.n_docs
    }
}
