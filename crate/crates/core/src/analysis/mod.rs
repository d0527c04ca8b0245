//! Analyses of external model predictions against gold labels and
//! expected inferences.

mod alignment;
mod categories;
mod dispersion;
mod evaluate;
mod expected;
mod predictions;
mod ranking;
mod scatter;

use std::fmt;

pub use alignment::{signature_alignment, SignatureAlignment};
pub use categories::{
    error_category_report, load_category_annotations, Agreement, CategoryAnnotation, CategoryCount,
    CategoryReport, DatasetCategories, ErrorCategory,
};
pub use dispersion::{group_dispersion, Dispersion, VarianceConvention};
pub use evaluate::{evaluate, evaluation_items, DatasetMetrics, EvalScope, EvaluationReport};
pub use expected::{expected_inference_study, expected_scores, DatasetSlope, ExpectedStudy, StudyPoint};
pub use predictions::PredictionSet;
pub use ranking::{rank_errors, rank_errors_by_dataset, ranking_table, top_count, RankedError};
pub use scatter::{scatter_export, write_scatter_csv, ScatterRow, VerbClasses};

/// Plain-text table with left-aligned first column and right-aligned rest.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TextTable {
    headers: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl TextTable {
    pub fn new<S: Into<String>>(headers: impl IntoIterator<Item = S>) -> Self {
        TextTable {
            headers: headers.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push<S: Into<String>>(&mut self, row: impl IntoIterator<Item = S>) {
        self.rows.push(row.into_iter().map(Into::into).collect());
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

impl fmt::Display for TextTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cols = self.headers.len();
        let mut width: Vec<usize> = self.headers.iter().map(|h| h.chars().count()).collect();
        for r in &self.rows {
            for (i, c) in r.iter().enumerate().take(cols) {
                width[i] = width[i].max(c.chars().count());
            }
        }
        let line = |f: &mut fmt::Formatter<'_>, cells: &[String]| -> fmt::Result {
            let mut out = String::new();
            for (i, w) in width.iter().enumerate() {
                let c = cells.get(i).map(String::as_str).unwrap_or("");
                if i > 0 {
                    out.push_str("  ");
                }
                if i == 0 {
                    out.push_str(&format!("{c:<w$}"));
                } else {
                    out.push_str(&format!("{c:>w$}"));
                }
            }
            writeln!(f, "{}", out.trim_end())
        };
        line(f, &self.headers)?;
        let total = width.iter().sum::<usize>() + 2 * cols.saturating_sub(1);
        writeln!(f, "{}", "-".repeat(total))?;
        for r in &self.rows {
            line(f, r)?;
        }
        Ok(())
    }
}
