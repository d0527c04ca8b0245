//! Corpus loaders and preprocessing.
//!
//! Each loader reads one corpus in its distribution format and emits
//! [`EventRecord`]s on the unified scale. The CB and RP loaders also return a
//! [`FilterReport`] describing which items were dropped and why.

mod cb;
pub mod conllu;
mod mv;
mod rp;
mod span;
mod split;
mod unified;

pub use cb::{load_cb, CB_AGREEMENT_THRESHOLD, CB_EXPECTED_MIN_ANNOTATIONS};
pub use conllu::{read_conllu, DepSentence, DepToken};
pub use mv::load_megaveridicality;
pub use rp::{load_rp, ExclusionList, RP_SCALE_FACTOR};
pub use span::{attach_parses, AttachedSpans, resolve_event_span, SpanBranch, SpanResolution, MODAL_OPERATORS};
pub use split::{allocate_largest_remainder, stratified_split, SplitSpec, StratifyKey};
pub use unified::load_unified;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::Table;
use crate::model::{Span, Split};

/// Outcome of an exclusion rule. Multi-stage filters nest one report per stage.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FilterReport {
    pub rule: String,
    pub input: usize,
    pub kept: usize,
    pub removed: usize,
    pub removed_ids: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub stages: Vec<FilterReport>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl FilterReport {
    pub(crate) fn stage(rule: impl Into<String>, input: usize, removed_ids: Vec<String>) -> Self {
        FilterReport {
            rule: rule.into(),
            input,
            kept: input - removed_ids.len(),
            removed: removed_ids.len(),
            removed_ids,
            stages: Vec::new(),
            warnings: Vec::new(),
        }
    }

    /// Chains stages: the overall input is the first stage's input.
    pub(crate) fn combine(rule: impl Into<String>, stages: Vec<FilterReport>) -> Self {
        let input = stages.first().map_or(0, |s| s.input);
        let removed_ids: Vec<String> = stages
            .iter()
            .flat_map(|s| s.removed_ids.iter().cloned())
            .collect();
        FilterReport {
            stages,
            ..FilterReport::stage(rule, input, removed_ids)
        }
    }
}

/// Fields every native table may carry besides its corpus-specific columns.
pub(crate) struct CommonColumns {
    sentence: usize,
    tokens: Option<usize>,
    split: Option<usize>,
    event_index: Option<usize>,
    event_start: Option<usize>,
    event_end: Option<usize>,
}

impl CommonColumns {
    pub fn locate(table: &Table) -> Result<Self> {
        Ok(CommonColumns {
            sentence: table.require("sentence")?,
            tokens: table.column("tokens"),
            split: table.column("split"),
            event_index: table.column("event_index").or_else(|| table.column("index")),
            event_start: table.column("event_start"),
            event_end: table.column("event_end"),
        })
    }

    pub fn sentence<'a>(&self, row: &'a [String]) -> &'a str {
        row[self.sentence].trim()
    }

    /// Pre-tokenized `tokens` column if present, else whitespace-split sentence.
    pub fn tokens(&self, row: &[String]) -> Vec<String> {
        let src = match self.tokens {
            Some(c) if !row[c].trim().is_empty() => &row[c],
            _ => &row[self.sentence],
        };
        src.split_whitespace().map(String::from).collect()
    }

    pub fn split(&self, table: &Table, line: usize, row: &[String]) -> Result<Split> {
        match self.split {
            Some(c) => row[c]
                .parse()
                .map_err(|e: Error| Error::parse(&table.path, line, e.to_string())),
            None => Ok(Split::Unassigned),
        }
    }

    /// Explicit span columns, if the row has any.
    pub fn span(&self, table: &Table, line: usize, row: &[String]) -> Result<Option<Span>> {
        let num = |c: usize| -> Result<Option<usize>> {
            let v = row[c].trim();
            if v.is_empty() {
                return Ok(None);
            }
            v.parse()
                .map(Some)
                .map_err(|_| Error::parse(&table.path, line, format!("bad token index `{v}`")))
        };
        if let (Some(s), Some(e)) = (self.event_start, self.event_end) {
            if let (Some(s), Some(e)) = (num(s)?, num(e)?) {
                return Ok(Some(Span::new(s, e)));
            }
        }
        if let Some(c) = self.event_index {
            if let Some(i) = num(c)? {
                return Ok(Some(Span::single(i)));
            }
        }
        Ok(None)
    }
}

pub(crate) fn check_span(table: &Table, line: usize, span: Span, n_tokens: usize) -> Result<Span> {
    if span.start < span.end && span.end <= n_tokens {
        Ok(span)
    } else {
        Err(Error::parse(
            &table.path,
            line,
            format!(
                "event span [{}, {}) outside sentence of {n_tokens} tokens",
                span.start, span.end
            ),
        ))
    }
}

/// Parses a list of integer annotations separated by commas, semicolons or spaces.
pub(crate) fn parse_int_annotations(
    table: &Table,
    line: usize,
    field: &str,
    range: std::ops::RangeInclusive<i32>,
) -> Result<Vec<i32>> {
    let mut out = Vec::new();
    for tok in field
        .split(|c: char| c == ',' || c == ';' || c.is_whitespace())
        .filter(|t| !t.is_empty())
    {
        let v: i32 = tok
            .parse()
            .map_err(|_| Error::parse(&table.path, line, format!("bad annotation `{tok}`")))?;
        if !range.contains(&v) {
            return Err(Error::parse(
                &table.path,
                line,
                format!(
                    "annotation {v} outside [{}, {}]",
                    range.start(),
                    range.end()
                ),
            ));
        }
        out.push(v);
    }
    if out.is_empty() {
        return Err(Error::parse(&table.path, line, "no annotations"));
    }
    Ok(out)
}

pub(crate) fn optional_field(row: &[String], col: Option<usize>) -> Option<String> {
    col.map(|c| row[c].trim())
        .filter(|s| !s.is_empty())
        .map(String::from)
}
