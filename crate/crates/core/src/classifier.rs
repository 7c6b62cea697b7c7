//! Distance between frequency vectors and nearest-standard classification.

use std::collections::HashSet;

use crate::histogram::FrequencyVector;
use crate::standards::CategoryStandard;
use crate::tsv;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ClassifyError {
    #[error("no standards to compare against")]
    NoStandards,
    #[error("duplicate standard category '{0}'")]
    DuplicateCategory(String),
    #[error("no documents to classify")]
    NoDocuments,
}

/// Euclidean norm of the 26-entry difference of two percentage vectors.
pub fn distance(standard: &FrequencyVector, test: &FrequencyVector) -> f64 {
    euclidean(standard.percent(), test.percent())
}

/// Euclidean distance between two 26-entry arrays.
pub fn euclidean(a: &[f64; 26], b: &[f64; 26]) -> f64 {
    // No hypot-style rescaling: percentages are bounded by 100.
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Distances from one document to every standard.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceReport {
    pub doc_id: String,
    /// `(category, d)` in the order the standards were given.
    pub per_standard: Vec<(String, f64)>,
    /// Category with the smallest distance; on an exact tie the
    /// lexicographically smallest name.
    pub predicted: String,
    /// Every category sharing the minimum distance (length > 1 means a tie).
    pub tied: Vec<String>,
}

fn check_standards(standards: &[CategoryStandard]) -> Result<(), ClassifyError> {
    if standards.is_empty() {
        return Err(ClassifyError::NoStandards);
    }
    let mut seen = HashSet::new();
    for s in standards {
        if !seen.insert(s.category.as_str()) {
            return Err(ClassifyError::DuplicateCategory(s.category.clone()));
        }
    }
    Ok(())
}

pub fn classify(doc: &FrequencyVector, standards: &[CategoryStandard], doc_id: &str) -> Result<DistanceReport, ClassifyError> {
    check_standards(standards)?;
    Ok(report_for(doc, standards, doc_id))
}

fn report_for(doc: &FrequencyVector, standards: &[CategoryStandard], doc_id: &str) -> DistanceReport {
    let per_standard: Vec<(String, f64)> = standards
        .iter()
        .map(|s| (s.category.clone(), distance(&s.mean_freq, doc)))
        .collect();
    let min = per_standard.iter().map(|(_, d)| *d).fold(f64::INFINITY, f64::min);
    let mut tied: Vec<String> = per_standard
        .iter()
        .filter(|(_, d)| *d == min)
        .map(|(c, _)| c.clone())
        .collect();
    tied.sort();
    DistanceReport {
        doc_id: doc_id.to_owned(),
        predicted: tied[0].clone(),
        per_standard,
        tied,
    }
}

/// Distance matrix for a batch of documents: one row per standard, one
/// column per document.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchReport {
    pub standards: Vec<String>,
    pub doc_ids: Vec<String>,
    /// `matrix[s][d]` is the distance from document `d` to standard `s`.
    pub matrix: Vec<Vec<f64>>,
    pub reports: Vec<DistanceReport>,
    pub row_mean: Vec<f64>,
    /// Sample standard deviation (n - 1); zero for a single document.
    pub row_std: Vec<f64>,
}

pub fn classify_batch(docs: &[(String, FrequencyVector)], standards: &[CategoryStandard]) -> Result<BatchReport, ClassifyError> {
    check_standards(standards)?;
    if docs.is_empty() {
        return Err(ClassifyError::NoDocuments);
    }
    let reports: Vec<DistanceReport> = docs.iter().map(|(id, f)| report_for(f, standards, id)).collect();
    let matrix: Vec<Vec<f64>> = (0..standards.len())
        .map(|s| reports.iter().map(|r| r.per_standard[s].1).collect())
        .collect();
    let (row_mean, row_std) = matrix.iter().map(|row| mean_and_sd(row)).unzip();
    Ok(BatchReport {
        standards: standards.iter().map(|s| s.category.clone()).collect(),
        doc_ids: docs.iter().map(|(id, _)| id.clone()).collect(),
        matrix,
        reports,
        row_mean,
        row_std,
    })
}

pub(crate) fn mean_and_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = xs.iter().map(|x| (x - mean).powi(2)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}

impl BatchReport {
    fn matrix_rows(&self, fmt: fn(f64) -> String) -> Vec<Vec<String>> {
        let mut header = vec!["standard".to_owned()];
        header.extend(self.doc_ids.iter().cloned());
        let mut rows = vec![header];
        for (name, row) in self.standards.iter().zip(&self.matrix) {
            let mut r = vec![name.clone()];
            r.extend(row.iter().map(|&d| fmt(d)));
            rows.push(r);
        }
        rows
    }

    /// Machine-readable distance matrix at full precision.
    pub fn matrix_tsv(&self) -> String {
        tsv::render(self.matrix_rows(tsv::full))
    }

    /// Distance matrix rendered to two decimals.
    pub fn matrix_table(&self) -> String {
        tsv::align(&self.matrix_rows(tsv::two))
    }

    /// `doc_id, predicted, tied` per document.
    pub fn predictions_tsv(&self) -> String {
        let header = vec!["doc_id".to_owned(), "predicted".to_owned(), "tied".to_owned()];
        let body = self
            .reports
            .iter()
            .map(|r| vec![r.doc_id.clone(), r.predicted.clone(), r.tied.join(",")]);
        tsv::render(std::iter::once(header).chain(body))
    }

    /// Per-standard mean and standard deviation of the distances.
    pub fn summary_tsv(&self) -> String {
        let header = ["standard", "mean", "sd", "n"].map(String::from).to_vec();
        let body = self.standards.iter().enumerate().map(|(i, s)| {
            vec![s.clone(), tsv::full(self.row_mean[i]), tsv::full(self.row_std[i]), self.doc_ids.len().to_string()]
        });
        tsv::render(std::iter::once(header).chain(body))
    }
}

/// A distance matrix read back from [`BatchReport::matrix_tsv`].
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    pub doc_ids: Vec<String>,
    /// `(standard, distances)` per row.
    pub rows: Vec<(String, Vec<f64>)>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct ParseMatrixError {
    pub line: usize,
    pub message: String,
}

impl DistanceMatrix {
    pub fn parse(input: &str) -> Result<DistanceMatrix, ParseMatrixError> {
        let mut lines = input
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.strip_suffix('\r').unwrap_or(l)))
            .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'));
        let (hline, header) = lines.next().ok_or(ParseMatrixError { line: 1, message: "empty matrix".into() })?;
        let mut cols = header.split('\t');
        cols.next();
        let doc_ids: Vec<String> = cols.map(str::to_owned).collect();
        if doc_ids.is_empty() {
            return Err(ParseMatrixError { line: hline, message: "header has no document columns".into() });
        }
        let mut rows = Vec::new();
        let mut names = HashSet::new();
        for (line, text) in lines {
            let mut cells = text.split('\t');
            let name = cells.next().unwrap_or_default().to_owned();
            if name.is_empty() {
                return Err(ParseMatrixError { line, message: "empty standard name".into() });
            }
            if !names.insert(name.clone()) {
                return Err(ParseMatrixError { line, message: format!("duplicate standard '{name}'") });
            }
            let values = cells
                .map(|c| {
                    c.trim()
                        .parse::<f64>()
                        .ok()
                        .filter(|v| v.is_finite())
                        .ok_or_else(|| ParseMatrixError { line, message: format!("not a finite number: '{c}'") })
                })
                .collect::<Result<Vec<f64>, _>>()?;
            if values.len() != doc_ids.len() {
                return Err(ParseMatrixError {
                    line,
                    message: format!("expected {} values, found {}", doc_ids.len(), values.len()),
                });
            }
            rows.push((name, values));
        }
        if rows.is_empty() {
            return Err(ParseMatrixError { line: hline, message: "matrix has no rows".into() });
        }
        Ok(DistanceMatrix { doc_ids, rows })
    }
}
