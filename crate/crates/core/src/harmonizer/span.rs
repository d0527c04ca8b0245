//! Event-span normalization for embedded-clause corpora.
//!
//! When the complement clause carries its own negation, modal operator or
//! adverb, annotators judged the clause as a whole, so the whole clause is the
//! span. Otherwise the span is the clause's root token.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{EventRecord, Span};

use super::conllu::DepSentence;

pub const MODAL_OPERATORS: [&str; 11] = [
    "should", "could", "can", "must", "perhaps", "might", "maybe", "may", "shall", "have to", "would",
];

const COMPLEMENT_RELATIONS: [&str; 2] = ["ccomp", "xcomp"];

/// Which rule decided the span. Kept for manual review of the output.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "branch", rename_all = "snake_case")]
pub enum SpanBranch {
    WholeClause { trigger: String },
    RootToken,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpanResolution {
    pub record: EventRecord,
    pub branch: SpanBranch,
}

/// Resolves the event span of a CB/RP item from its dependency parse.
pub fn resolve_event_span(item: &EventRecord, parse: &DepSentence) -> Result<SpanResolution> {
    let forms: Vec<&str> = parse.tokens.iter().map(|t| t.form.as_str()).collect();
    if forms.len() != item.tokens.len() || forms.iter().zip(&item.tokens).any(|(a, b)| a != b) {
        return Err(Error::InvalidArgument(format!(
            "{}: parse tokens do not match the sentence ({} vs {} tokens)",
            item.id,
            forms.len(),
            item.tokens.len()
        )));
    }

    let complement = find_complement_root(item, parse).ok_or_else(|| {
        Error::InvalidArgument(format!("{}: no embedded clause found in parse", item.id))
    })?;
    let subtree = parse.subtree(complement);
    let clause: Vec<usize> = subtree
        .iter()
        .copied()
        .filter(|&i| {
            let t = &parse.tokens[i];
            !(t.head == complement + 1 && matches!(t.base_relation(), "mark" | "punct"))
        })
        .collect();

    let branch = match trigger(parse, &subtree) {
        Some(trigger) => SpanBranch::WholeClause { trigger },
        None => SpanBranch::RootToken,
    };
    let span = match branch {
        SpanBranch::WholeClause { .. } => {
            let lo = *clause.first().unwrap_or(&complement);
            let hi = *clause.last().unwrap_or(&complement);
            Span::new(lo, hi + 1)
        }
        SpanBranch::RootToken => Span::single(complement),
    };
    let mut record = item.clone();
    record.event_span = span;
    Ok(SpanResolution { record, branch })
}

fn find_complement_root(item: &EventRecord, parse: &DepSentence) -> Option<usize> {
    let is_comp = |j: usize| COMPLEMENT_RELATIONS.contains(&parse.tokens[j].base_relation());
    let verb = item.verb.as_deref().map(str::to_lowercase);
    let embedding = verb
        .as_deref()
        .and_then(|v| {
            parse.tokens.iter().position(|t| {
                t.lemma.to_lowercase() == v || t.form.to_lowercase() == v
            })
        })
        .or_else(|| parse.root());
    if let Some(e) = embedding {
        if let Some(c) = parse.children(e).find(|&j| is_comp(j)) {
            return Some(c);
        }
    }
    (0..parse.tokens.len()).find(|&j| is_comp(j))
}

/// First negation, modal or adverb inside the clause, described for review.
fn trigger(parse: &DepSentence, clause: &[usize]) -> Option<String> {
    let toks = &parse.tokens;
    for &i in clause {
        let t = &toks[i];
        if t.base_relation() == "neg"
            || (t.base_relation() == "advmod" && t.feats.contains("Polarity=Neg"))
        {
            return Some(format!("neg:{}", t.form));
        }
    }
    for (k, &i) in clause.iter().enumerate() {
        let form = toks[i].form.to_lowercase();
        let lemma = toks[i].lemma.to_lowercase();
        if MODAL_OPERATORS.contains(&form.as_str()) || MODAL_OPERATORS.contains(&lemma.as_str()) {
            return Some(format!("modal:{form}"));
        }
        let next_is_to = clause
            .get(k + 1)
            .is_some_and(|&j| j == i + 1 && toks[j].form.eq_ignore_ascii_case("to"));
        if lemma == "have" && next_is_to {
            return Some("modal:have to".into());
        }
    }
    for &i in clause {
        let t = &toks[i];
        if t.upos == "ADV" || t.xpos.starts_with("RB") {
            return Some(format!("adverb:{}", t.form));
        }
    }
    None
}

/// Output of [`attach_parses`].
#[derive(Debug, Clone, Default)]
pub struct AttachedSpans {
    pub records: Vec<EventRecord>,
    /// `(id, branch)` for every resolved item, for manual verification.
    pub branches: Vec<(String, SpanBranch)>,
    pub warnings: Vec<String>,
}

/// Resolves spans for a batch of items.
///
/// Parses are matched by `# sent_id` equal to the record id when the file has
/// sentence ids, otherwise by position against the ordinal in the record id
/// (the row number in the source file). Items without a parse keep their span.
pub fn attach_parses(items: &[EventRecord], parses: &[DepSentence]) -> Result<AttachedSpans> {
    let by_id: HashMap<&str, &DepSentence> = parses
        .iter()
        .filter_map(|p| p.sent_id.as_deref().map(|id| (id, p)))
        .collect();
    let use_ids = !by_id.is_empty();

    let mut out = AttachedSpans::default();
    for item in items {
        let parse = if use_ids {
            by_id.get(item.id.as_str()).copied()
        } else {
            item.id
                .rsplit(':')
                .next()
                .and_then(|o| o.parse::<usize>().ok())
                .and_then(|o| parses.get(o))
        };
        match parse {
            Some(p) => {
                let r = resolve_event_span(item, p)?;
                out.branches.push((item.id.clone(), r.branch));
                out.records.push(r.record);
            }
            None => {
                out.warnings.push(format!("{}: no dependency parse; span left unresolved", item.id));
                out.records.push(item.clone());
            }
        }
    }
    Ok(out)
}
