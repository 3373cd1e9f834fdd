//! Agreement metrics and model comparison reports.
//!
//! The headline metric is quadratic weighted kappa: chance-corrected
//! agreement between integer score vectors, with disagreements penalized by
//! the squared distance between marks. Reports group scores per question,
//! average kappa across questions per featurization, and serialize to the
//! comparison/plot CSV layouts the CLI emits.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

/// The three featurizations the pipeline compares.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    Bow,
    Vectors,
    Centroids,
}

/// Canonical comparison order (also the tie-break order: later wins ties).
pub const MODEL_ORDER: [ModelKind; 3] = [ModelKind::Bow, ModelKind::Vectors, ModelKind::Centroids];

impl ModelKind {
    /// Machine-readable id used in flags, file names, and CSV cells.
    pub fn flag_name(self) -> &'static str {
        match self {
            ModelKind::Bow => "bow",
            ModelKind::Vectors => "vectors",
            ModelKind::Centroids => "centroids",
        }
    }

    /// Human-readable name used in printed tables.
    pub fn display_name(self) -> &'static str {
        match self {
            ModelKind::Bow => "Bag of words",
            ModelKind::Vectors => "Bag of vectors",
            ModelKind::Centroids => "Bag of centroids",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.flag_name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bow" => Ok(ModelKind::Bow),
            "vectors" => Ok(ModelKind::Vectors),
            "centroids" => Ok(ModelKind::Centroids),
            other => Err(Error::InvalidParams {
                reason: format!("unknown model '{other}' (expected bow, vectors, or centroids)"),
            }),
        }
    }
}

/// Quadratic weighted kappa between two integer score vectors on the scale
/// 0..=max_marks.
///
/// κ = 1 − Σ w∘O / Σ w∘E with w_ij = (i−j)²/(R−1)², O the observed joint
/// histogram, and E the outer product of the two marginals scaled to the
/// same total. R = max_marks + 1 categories always — the scale comes from
/// the configured mark range, not from whichever marks happen to appear.
/// If both vectors are constant and equal, agreement is perfect and κ = 1.
pub fn quadratic_weighted_kappa(a: &[u32], b: &[u32], max_marks: u32) -> Result<f64> {
    if max_marks == 0 {
        return Err(Error::InvalidParams {
            reason: "max_marks must be at least 1".to_string(),
        });
    }
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.is_empty() {
        return Err(Error::EmptyInput);
    }
    let r = (max_marks + 1) as usize;
    for &s in a.iter().chain(b.iter()) {
        if s > max_marks {
            return Err(Error::OutOfRangeScore {
                score: s,
                max_marks,
            });
        }
    }

    let mut observed = vec![vec![0.0_f64; r]; r];
    let mut hist_a = vec![0.0_f64; r];
    let mut hist_b = vec![0.0_f64; r];
    for (&x, &y) in a.iter().zip(b.iter()) {
        observed[x as usize][y as usize] += 1.0;
        hist_a[x as usize] += 1.0;
        hist_b[y as usize] += 1.0;
    }
    let n = a.len() as f64;
    let denom_scale = ((r - 1) * (r - 1)) as f64;
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, obs_row) in observed.iter().enumerate() {
        for j in 0..r {
            let w = ((i as f64 - j as f64) * (i as f64 - j as f64)) / denom_scale;
            let expected = hist_a[i] * hist_b[j] / n;
            num += w * obs_row[j];
            den += w * expected;
        }
    }
    if den == 0.0 {
        // Both vectors constant at the same mark: every pair agrees.
        return Ok(1.0);
    }
    Ok(1.0 - num / den)
}

/// Kappa results for one featurization across all questions.
#[derive(Debug, Clone, PartialEq)]
pub struct KappaReport {
    pub model: ModelKind,
    /// (question id, kappa) sorted by question id.
    pub per_question: Vec<(String, f64)>,
    /// Test-fold predictions in dataset order.
    pub predicted: Vec<u32>,
    /// Test-fold human scores in the same order.
    pub human: Vec<u32>,
    /// Question id for each test-fold row, aligned with `predicted`.
    pub questions: Vec<String>,
    pub max_marks: u32,
}

impl KappaReport {
    /// Groups aligned (question, human, predicted) rows by question and
    /// computes kappa per group.
    pub fn from_predictions(
        model: ModelKind,
        questions: &[String],
        human: &[u32],
        predicted: &[u32],
        max_marks: u32,
    ) -> Result<KappaReport> {
        if questions.len() != human.len() {
            return Err(Error::LengthMismatch {
                left: questions.len(),
                right: human.len(),
            });
        }
        if human.len() != predicted.len() {
            return Err(Error::LengthMismatch {
                left: human.len(),
                right: predicted.len(),
            });
        }
        if human.is_empty() {
            return Err(Error::EmptyInput);
        }
        let mut groups: BTreeMap<&str, (Vec<u32>, Vec<u32>)> = BTreeMap::new();
        for ((q, &h), &p) in questions.iter().zip(human).zip(predicted) {
            let entry = groups.entry(q.as_str()).or_default();
            entry.0.push(h);
            entry.1.push(p);
        }
        let mut per_question = Vec::with_capacity(groups.len());
        for (q, (h, p)) in &groups {
            let kappa = quadratic_weighted_kappa(h, p, max_marks)?;
            per_question.push((q.to_string(), kappa));
        }
        Ok(KappaReport {
            model,
            per_question,
            predicted: predicted.to_vec(),
            human: human.to_vec(),
            questions: questions.to_vec(),
            max_marks,
        })
    }

    /// Unweighted mean of the per-question kappas.
    pub fn mean_kappa(&self) -> f64 {
        let sum: f64 = self.per_question.iter().map(|(_, k)| k).sum();
        sum / self.per_question.len() as f64
    }
}

/// Side-by-side comparison of several featurizations on the same split.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub reports: Vec<KappaReport>,
    /// Index into `reports` of the best mean kappa (ties go to the model
    /// appearing later in the canonical order).
    pub best: usize,
}

/// Ranks reports by mean kappa. Exactly one report per model is allowed.
pub fn compare_models(reports: Vec<KappaReport>) -> Result<ComparisonReport> {
    if reports.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut seen = Vec::new();
    for report in &reports {
        if seen.contains(&report.model) {
            return Err(Error::DuplicateModel {
                name: report.model.flag_name().to_string(),
            });
        }
        seen.push(report.model);
    }
    let mut best = 0;
    for (i, report) in reports.iter().enumerate().skip(1) {
        // `>=` lets a later model in the list take ties.
        if report.mean_kappa() >= reports[best].mean_kappa() {
            best = i;
        }
    }
    Ok(ComparisonReport { reports, best })
}

impl ComparisonReport {
    /// Renders an aligned text table: one row per question plus a mean row,
    /// one column per model, kappas with four decimals, best column starred.
    pub fn render_table(&self) -> String {
        let questions: Vec<&str> = self.reports[0]
            .per_question
            .iter()
            .map(|(q, _)| q.as_str())
            .collect();
        let mut header = vec!["question".to_string()];
        for (i, report) in self.reports.iter().enumerate() {
            let star = if i == self.best { " *" } else { "" };
            header.push(format!("{}{}", report.model.display_name(), star));
        }
        let mut rows = vec![header];
        for (qi, q) in questions.iter().enumerate() {
            let mut row = vec![q.to_string()];
            for report in &self.reports {
                row.push(format!("{:.4}", report.per_question[qi].1));
            }
            rows.push(row);
        }
        let mut mean_row = vec!["mean".to_string()];
        for report in &self.reports {
            mean_row.push(format!("{:.4}", report.mean_kappa()));
        }
        rows.push(mean_row);

        let cols = rows[0].len();
        let widths: Vec<usize> = (0..cols)
            .map(|c| rows.iter().map(|r| r[c].len()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        for row in &rows {
            for (c, cell) in row.iter().enumerate() {
                if c > 0 {
                    out.push_str("  ");
                }
                out.push_str(cell);
                for _ in cell.len()..widths[c] {
                    out.push(' ');
                }
            }
            while out.ends_with(' ') {
                out.pop();
            }
            out.push('\n');
        }
        out
    }

    /// Writes the long-form comparison CSV:
    /// `question,model,kappa,mean_kappa,best` with one row per
    /// (question, model) pair; `best` is 1 on rows of the winning model.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::from("question,model,kappa,mean_kappa,best\n");
        for (i, report) in self.reports.iter().enumerate() {
            let mean = report.mean_kappa();
            let best = if i == self.best { 1 } else { 0 };
            for (q, kappa) in &report.per_question {
                out.push_str(&format!(
                    "{q},{},{kappa},{mean},{best}\n",
                    report.model.flag_name()
                ));
            }
        }
        let mut file = std::fs::File::create(path).map_err(|e| Error::open(path, e))?;
        file.write_all(out.as_bytes())?;
        Ok(())
    }

    /// Writes one scatter-plot CSV per question:
    /// `answer_index,human,predicted_bow,predicted_vectors,predicted_centroids`.
    ///
    /// Requires all reports to share the identical test fold (same
    /// question/human sequences), which holds when they come from one
    /// comparison run. Returns the paths written.
    pub fn write_plot_csvs(&self, dir: &Path) -> Result<Vec<std::path::PathBuf>> {
        let first = &self.reports[0];
        for report in &self.reports[1..] {
            if report.questions != first.questions || report.human != first.human {
                return Err(Error::InvalidParams {
                    reason: "plot output needs reports from a single shared test fold"
                        .to_string(),
                });
            }
        }
        let mut header = String::from("answer_index,human");
        for report in &self.reports {
            header.push_str(",predicted_");
            header.push_str(report.model.flag_name());
        }
        header.push('\n');

        let question_ids: Vec<&String> = {
            let mut seen = Vec::new();
            for q in &first.questions {
                if !seen.contains(&q) {
                    seen.push(q);
                }
            }
            seen.sort();
            seen
        };
        let mut written = Vec::with_capacity(question_ids.len());
        for qid in question_ids {
            let mut out = header.clone();
            let mut answer_index = 0usize;
            for (row, q) in first.questions.iter().enumerate() {
                if q != qid {
                    continue;
                }
                out.push_str(&format!("{answer_index},{}", first.human[row]));
                for report in &self.reports {
                    out.push_str(&format!(",{}", report.predicted[row]));
                }
                out.push('\n');
                answer_index += 1;
            }
            let path = dir.join(format!("plot_{qid}.csv"));
            let mut file = std::fs::File::create(&path).map_err(|e| Error::open(&path, e))?;
            file.write_all(out.as_bytes())?;
            written.push(path);
        }
        Ok(written)
    }
}
