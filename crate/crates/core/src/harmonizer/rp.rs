use std::collections::HashSet;
use std::path::Path;

use crate::error::{Error, Result};
use crate::io::{read_id_list, source_key, Table};
use crate::model::{Dataset, Environment, EventRecord, FactualityScore, Frame, Polarity, Span};

use super::{check_span, optional_field, parse_int_annotations, CommonColumns, FilterReport};

/// RP annotations are integers in `[-2, 2]`; this brings them onto `[-3, 3]`.
pub const RP_SCALE_FACTOR: f64 = 1.5;

const BUNDLED_EXCLUSIONS: &str = include_str!("../../data/rp_single_span_exclusions.txt");

/// Items whose annotated event cannot be expressed as one span of the sentence.
///
/// Entries match either a record id or the source `key` column.
#[derive(Debug, Clone, Default)]
pub struct ExclusionList {
    ids: HashSet<String>,
}

impl ExclusionList {
    pub fn new<I: IntoIterator<Item = String>>(ids: I) -> Self {
        ExclusionList {
            ids: ids.into_iter().collect(),
        }
    }

    /// The list shipped with the crate.
    pub fn bundled() -> Self {
        Self::new(
            BUNDLED_EXCLUSIONS
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(String::from),
        )
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Ok(Self::new(read_id_list(path)?))
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    fn contains(&self, id: &str, key: Option<&str>) -> bool {
        self.ids.contains(id) || key.is_some_and(|k| self.ids.contains(k))
    }
}

fn parse_rp_frame(s: &str) -> Result<Frame> {
    match s.trim().to_ascii_lowercase().as_str() {
        "that" => Ok(Frame::VThatS),
        "to" => Ok(Frame::VToVp),
        _ => s.parse(),
    }
}

/// True when strictly positive and strictly negative values co-occur.
/// Zeros are compatible with either sign.
pub(crate) fn signs_disagree(values: &[f64]) -> bool {
    values.iter().any(|&v| v > 0.0) && values.iter().any(|&v| v < 0.0)
}

/// Loads RP.
///
/// Required columns: `sentence`, `verb`, `frame` (`that`, `to`, or a frame id),
/// `polarity`, `annotations` (integers in `[-2, 2]`). Annotations are scaled by
/// 1.5 and averaged. Items on the exclusion list are dropped first, then items
/// whose annotations disagree in sign; the report records both stages.
pub fn load_rp(path: &Path, exclusions: &ExclusionList) -> Result<(Vec<EventRecord>, FilterReport)> {
    let table = Table::read(path)?;
    let common = CommonColumns::locate(&table)?;
    let verb_c = table.require("verb")?;
    let frame_c = table.require("frame")?;
    let pol_c = table.require("polarity")?;
    let ann_c = table.require("annotations")?;
    let key_c = table.column("key");
    let genre_c = table.column("genre");

    let key = source_key(path);
    let mut loaded = Vec::with_capacity(table.rows.len());
    let mut source_keys = Vec::with_capacity(table.rows.len());
    for (ordinal, (line, row)) in table.rows.iter().enumerate() {
        let line = *line;
        let bad = |e: Error| Error::parse(path, line, e.to_string());
        let raw = parse_int_annotations(&table, line, &row[ann_c], -2..=2)?;
        let annotations: Vec<f64> = raw.iter().map(|&a| a as f64 * RP_SCALE_FACTOR).collect();
        let gold = annotations.iter().sum::<f64>() / annotations.len() as f64;
        let polarity: Polarity = row[pol_c].parse().map_err(bad)?;
        let tokens = common.tokens(row);
        let span = common
            .span(&table, line, row)?
            .unwrap_or(Span::new(0, tokens.len()));
        let span = check_span(&table, line, span, tokens.len())?;
        loaded.push(EventRecord {
            id: EventRecord::make_id(Dataset::RP, &key, ordinal),
            dataset: Dataset::RP,
            split: common.split(&table, line, row)?,
            sentence: common.sentence(row).to_string(),
            tokens,
            event_span: span,
            gold: FactualityScore::new(gold)?,
            annotations,
            verb: Some(row[verb_c].trim().to_lowercase()),
            frame: Some(parse_rp_frame(&row[frame_c]).map_err(bad)?),
            polarity: Some(polarity),
            environment: Some(Environment::from_polarity(polarity)),
            genre: optional_field(row, genre_c),
        });
        source_keys.push(optional_field(row, key_c));
    }

    let input = loaded.len();
    let mut span_removed = Vec::new();
    let mut after_span = Vec::with_capacity(input);
    for (rec, k) in loaded.into_iter().zip(&source_keys) {
        if exclusions.contains(&rec.id, k.as_deref()) {
            span_removed.push(rec.id);
        } else {
            after_span.push(rec);
        }
    }
    let span_stage = FilterReport::stage("single-span exclusion list", input, span_removed);

    let mid = after_span.len();
    let mut sign_removed = Vec::new();
    let mut kept = Vec::with_capacity(mid);
    for rec in after_span {
        if signs_disagree(&rec.annotations) {
            sign_removed.push(rec.id);
        } else {
            kept.push(rec);
        }
    }
    let sign_stage = FilterReport::stage("annotation sign agreement", mid, sign_removed);

    let mut report = FilterReport::combine("rp preprocessing", vec![span_stage, sign_stage]);
    if !exclusions.is_empty() && report.stages[0].removed < exclusions.len() {
        report.warnings.push(format!(
            "{} of {} exclusion-list entries matched no item",
            exclusions.len() - report.stages[0].removed,
            exclusions.len()
        ));
    }
    Ok((kept, report))
}
