//! Bag-of-words features: raw count matrices, probability normalization,
//! and TF-IDF weighting — the first of the three featurizations.
//!
//! [`count_matrix`] produces raw counts; [`CountMatrix::to_probabilities`]
//! divides each nonzero row by its sum, and [`tfidf_matrix`] applies
//! tf · ln(N/df) cellwise before the same L1 normalization. The natural log
//! is pinned deliberately: the base only rescales columns, but fixing it
//! keeps outputs bit-comparable across builds.
//!
//! Rows are stored dense — the corpora this pipeline targets are a few
//! hundred documents with vocabularies well under the ~4096-column mark
//! where a sparse layout would start to pay.

use std::io::Write;

use crate::error::{Error, Result};
use crate::textprep::Vocabulary;

/// Document–term counts: one row per document, one column per vocabulary
/// index, cell = occurrences of that word in that document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountMatrix {
    pub rows: Vec<Vec<u32>>,
    pub cols: usize,
}

/// Real-valued document features with the invariant that every nonzero row
/// sums to 1 after normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix {
    pub rows: Vec<Vec<f64>>,
    pub cols: usize,
}

/// Counts in-vocabulary tokens per document; OOV tokens are ignored, and an
/// empty or all-OOV document yields an all-zero row.
pub fn count_matrix(docs: &[Vec<String>], vocab: &Vocabulary) -> CountMatrix {
    let cols = vocab.len();
    let rows = docs
        .iter()
        .map(|doc| {
            let mut row = vec![0u32; cols];
            for tok in doc {
                if let Some(i) = vocab.index_of(tok) {
                    row[i] += 1;
                }
            }
            row
        })
        .collect();
    CountMatrix { rows, cols }
}

impl CountMatrix {
    /// Converts counts to per-document term probabilities: each nonzero row
    /// divided by its sum; zero rows stay zero.
    pub fn to_probabilities(&self) -> WeightMatrix {
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let total: u64 = row.iter().map(|&c| c as u64).sum();
                if total == 0 {
                    vec![0.0; row.len()]
                } else {
                    row.iter().map(|&c| c as f64 / total as f64).collect()
                }
            })
            .collect();
        WeightMatrix {
            rows,
            cols: self.cols,
        }
    }
}

/// TF-IDF weight of one cell: tf · ln(n_docs / df), natural log.
///
/// `tf = 0` short-circuits to 0 so absent words need no df. Otherwise df
/// must lie in 1..=n_docs; a word in every document weighs 0 (it carries no
/// signal), and df outside that range is a caller bug surfaced as
/// [`Error::DomainError`].
pub fn tfidf_weight(tf: u32, df: u32, n_docs: usize) -> Result<f64> {
    if tf == 0 {
        return Ok(0.0);
    }
    if df == 0 || df as usize > n_docs {
        return Err(Error::DomainError {
            reason: format!("doc_freq {df} outside 1..={n_docs}"),
        });
    }
    Ok(tf as f64 * (n_docs as f64 / df as f64).ln())
}

/// TF-IDF matrix over `counts`: [`tfidf_weight`] cellwise with the
/// vocabulary's document frequencies, then L1 normalization of each nonzero
/// row. A row can be nonzero in counts yet zero after weighting (every term
/// at df = N); it stays zero.
pub fn tfidf_matrix(counts: &CountMatrix, vocab: &Vocabulary) -> Result<WeightMatrix> {
    if counts.cols != vocab.len() {
        return Err(Error::DimensionMismatch {
            expected: vocab.len(),
            found: counts.cols,
        });
    }
    let n_docs = vocab.n_docs();
    let mut rows = Vec::with_capacity(counts.rows.len());
    for row in &counts.rows {
        let mut weighted = Vec::with_capacity(row.len());
        for (j, &tf) in row.iter().enumerate() {
            weighted.push(tfidf_weight(tf, vocab.doc_freq(j), n_docs)?);
        }
        let total: f64 = weighted.iter().sum();
        if total > 0.0 {
            for w in &mut weighted {
                *w /= total;
            }
        }
        rows.push(weighted);
    }
    Ok(WeightMatrix {
        rows,
        cols: counts.cols,
    })
}

impl WeightMatrix {
    /// Writes the matrix as CSV for inspection: header `id,<token...>`, one
    /// row per document. `ids` must align with the rows.
    pub fn write_csv<W: Write>(&self, ids: &[String], vocab: &Vocabulary, out: W) -> Result<()> {
        if ids.len() != self.rows.len() {
            return Err(Error::LengthMismatch {
                left: ids.len(),
                right: self.rows.len(),
            });
        }
        let mut writer = csv::Writer::from_writer(out);
        let mut header = vec!["id".to_string()];
        header.extend(vocab.tokens().iter().cloned());
        writer.write_record(&header)?;
        for (id, row) in ids.iter().zip(&self.rows) {
            let mut record = vec![id.clone()];
            record.extend(row.iter().map(|w| format!("{w}")));
            writer.write_record(&record)?;
        }
        writer.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Xoshiro256;
    use crate::textprep::tokenize;

    fn toks(words: &[&str]) -> Vec<String> {
        words.iter().map(|w| w.to_string()).collect()
    }

    fn vocab_of(docs: &[Vec<String>]) -> Vocabulary {
        Vocabulary::build(docs, 1).unwrap()
    }

    #[test]
    fn counts_and_probabilities() {
        let docs = vec![toks(&["a", "b", "a"])];
        let vocab = vocab_of(&docs);
        let counts = count_matrix(&docs, &vocab);
        let a = vocab.index_of("a").unwrap();
        let b = vocab.index_of("b").unwrap();
        assert_eq!(counts.rows[0][a], 2);
        assert_eq!(counts.rows[0][b], 1);

        let probs = counts.to_probabilities();
        assert!((probs.rows[0][a] - 2.0 / 3.0).abs() < 1e-15);
        assert!((probs.rows[0][b] - 1.0 / 3.0).abs() < 1e-15);

        // OOV-only document: zero row in, zero row out.
        let oov = vec![toks(&["zz", "yy"])];
        let zero = count_matrix(&oov, &vocab);
        assert!(zero.rows[0].iter().all(|&c| c == 0));
        assert!(zero.to_probabilities().rows[0].iter().all(|&w| w == 0.0));
    }

    #[test]
    fn count_matrix_matches_brute_force_on_random_corpora() {
        let mut rng = Xoshiro256::new(11);
        let alphabet = ["a", "b", "c", "d", "e", "f"];
        for _ in 0..50 {
            let n_docs = 1 + rng.below(10) as usize;
            let docs: Vec<Vec<String>> = (0..n_docs)
                .map(|_| {
                    let len = rng.below(21) as usize;
                    (0..len)
                        .map(|_| alphabet[rng.below(6) as usize].to_string())
                        .collect()
                })
                .collect();
            let Ok(vocab) = Vocabulary::build(&docs, 1) else {
                continue; // all documents empty this round
            };
            let counts = count_matrix(&docs, &vocab);
            for (d, doc) in docs.iter().enumerate() {
                for j in 0..vocab.len() {
                    let expect = doc.iter().filter(|t| t.as_str() == vocab.token(j)).count();
                    assert_eq!(counts.rows[d][j] as usize, expect);
                }
            }
        }
    }

    #[test]
    fn tfidf_weight_hand_values() {
        assert!((tfidf_weight(3, 2, 4).unwrap() - 3.0 * 2f64.ln()).abs() < 1e-12);
        assert_eq!(tfidf_weight(5, 4, 4).unwrap(), 0.0); // df = N
        assert_eq!(tfidf_weight(0, 1, 4).unwrap(), 0.0);
        assert!(matches!(tfidf_weight(1, 0, 4), Err(Error::DomainError { .. })));
        assert!(matches!(tfidf_weight(1, 5, 4), Err(Error::DomainError { .. })));
    }

    #[test]
    fn tfidf_weight_non_increasing_in_df() {
        for n in 1..=8usize {
            let mut last = f64::INFINITY;
            for df in 1..=n as u32 {
                let w = tfidf_weight(3, df, n).unwrap();
                assert!(w <= last + 1e-15);
                assert!(w >= 0.0);
                last = w;
            }
            assert_eq!(last, 0.0, "df = N must weigh zero");
        }
    }

    #[test]
    fn tfidf_matrix_normalizes_and_zeroes_ubiquitous_terms() {
        // corpus [[a,b],[a]]: df(a) = 2 = N so column a is all zero;
        // doc 1 normalizes onto b alone, doc 2 becomes all-zero.
        let docs = vec![toks(&["a", "b"]), toks(&["a"])];
        let vocab = vocab_of(&docs);
        let weights = tfidf_matrix(&count_matrix(&docs, &vocab), &vocab).unwrap();
        let a = vocab.index_of("a").unwrap();
        let b = vocab.index_of("b").unwrap();
        assert_eq!(weights.rows[0][a], 0.0);
        assert_eq!(weights.rows[0][b], 1.0);
        assert!(weights.rows[1].iter().all(|&w| w == 0.0));

        // Single-term docs normalize onto that term.
        let docs = vec![toks(&["a"]), toks(&["b"])];
        let vocab = vocab_of(&docs);
        let weights = tfidf_matrix(&count_matrix(&docs, &vocab), &vocab).unwrap();
        assert_eq!(weights.rows[0][vocab.index_of("a").unwrap()], 1.0);
        assert_eq!(weights.rows[1][vocab.index_of("b").unwrap()], 1.0);
    }

    #[test]
    fn nonzero_rows_sum_to_one_on_realistic_text() {
        let texts = [
            "Binary trees store ordered keys for fast lookup",
            "A hash table gives constant expected lookup time",
            "Sorting with quicksort averages n log n comparisons",
            "Graphs model networks of nodes and edges",
            "Dynamic programming caches overlapping subproblems",
        ];
        let docs: Vec<Vec<String>> = texts.iter().map(|t| tokenize(t, None)).collect();
        let vocab = vocab_of(&docs);
        let weights = tfidf_matrix(&count_matrix(&docs, &vocab), &vocab).unwrap();
        for row in &weights.rows {
            let sum: f64 = row.iter().sum();
            assert!(row.iter().all(|&w| w >= 0.0));
            if sum != 0.0 {
                assert!((sum - 1.0).abs() < 1e-9, "row sum {sum}");
            }
        }
    }

    #[test]
    fn csv_export_has_id_plus_vocab_columns() {
        let docs = vec![toks(&["a", "b"]), toks(&["b", "b"])];
        let vocab = vocab_of(&docs);
        let weights = tfidf_matrix(&count_matrix(&docs, &vocab), &vocab).unwrap();
        let ids = vec!["d1".to_string(), "d2".to_string()];
        let mut buf = Vec::new();
        weights.write_csv(&ids, &vocab, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        let header = lines.next().unwrap();
        assert_eq!(header.split(',').count(), 1 + vocab.len());
        assert!(header.starts_with("id,"));
        assert_eq!(lines.count(), 2);
    }
}
