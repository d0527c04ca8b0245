use std::path::Path;

use crate::error::{Error, Result};
use crate::io::{source_key, Table};
use crate::model::{Dataset, Environment, EventRecord, FactualityScore, Frame, Span};

use super::{check_span, optional_field, parse_int_annotations, CommonColumns, FilterReport};

/// Share of annotations that must fall into one bin for an item to be kept.
pub const CB_AGREEMENT_THRESHOLD: f64 = 0.8;

/// Items with fewer annotations are kept but noted in the report.
pub const CB_EXPECTED_MIN_ANNOTATIONS: usize = 8;

/// Counts in the bins `[-3, -1]`, `{0}`, `[1, 3]`.
pub(crate) fn bin_counts(annotations: &[i32]) -> [usize; 3] {
    let mut bins = [0; 3];
    for &a in annotations {
        bins[(a.signum() + 1) as usize] += 1;
    }
    bins
}

pub(crate) fn has_high_agreement(annotations: &[i32]) -> bool {
    let max = bin_counts(annotations).into_iter().max().unwrap_or(0);
    !annotations.is_empty() && max as f64 >= CB_AGREEMENT_THRESHOLD * annotations.len() as f64 - 1e-12
}

/// Loads the CommitmentBank table.
///
/// Required columns: `sentence`, `verb`, `environment`, `annotations` (integers
/// in `[-3, 3]`). Optional: `key`, `genre`, `split`, `tokens`, span columns.
/// Keeps items where at least 80% of annotations share a bin; gold is the mean
/// of all annotations of a kept item.
pub fn load_cb(path: &Path) -> Result<(Vec<EventRecord>, FilterReport)> {
    let table = Table::read(path)?;
    let common = CommonColumns::locate(&table)?;
    let verb_c = table.require("verb")?;
    let env_c = table.require("environment")?;
    let ann_c = table.require("annotations")?;
    let genre_c = table.column("genre");

    let key = source_key(path);
    let mut kept = Vec::new();
    let mut removed = Vec::new();
    let mut warnings = Vec::new();
    for (ordinal, (line, row)) in table.rows.iter().enumerate() {
        let line = *line;
        let id = EventRecord::make_id(Dataset::CB, &key, ordinal);
        let raw = parse_int_annotations(&table, line, &row[ann_c], -3..=3)?;
        if raw.len() < CB_EXPECTED_MIN_ANNOTATIONS {
            warnings.push(format!(
                "{id}: only {} annotations (expected at least {CB_EXPECTED_MIN_ANNOTATIONS})",
                raw.len()
            ));
        }
        let environment: Environment = row[env_c]
            .parse()
            .map_err(|e: Error| Error::parse(path, line, e.to_string()))?;
        let tokens = common.tokens(row);
        let span = common
            .span(&table, line, row)?
            .unwrap_or(Span::new(0, tokens.len()));
        let span = check_span(&table, line, span, tokens.len())?;
        if !has_high_agreement(&raw) {
            removed.push(id);
            continue;
        }
        let annotations: Vec<f64> = raw.iter().map(|&a| a as f64).collect();
        let gold = annotations.iter().sum::<f64>() / annotations.len() as f64;
        kept.push(EventRecord {
            id,
            dataset: Dataset::CB,
            split: common.split(&table, line, row)?,
            sentence: common.sentence(row).to_string(),
            tokens,
            event_span: span,
            gold: FactualityScore::new(gold)?,
            annotations,
            verb: Some(row[verb_c].trim().to_lowercase()),
            frame: Some(Frame::VThatS),
            polarity: None,
            environment: Some(environment),
            genre: optional_field(row, genre_c),
        });
    }
    let mut report = FilterReport::stage("80% single-bin agreement", table.rows.len(), removed);
    report.warnings = warnings;
    Ok((kept, report))
}
