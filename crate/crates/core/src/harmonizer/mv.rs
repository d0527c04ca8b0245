use std::collections::HashMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::io::{source_key, Table};
use crate::model::{
    Dataset, Environment, EventRecord, FactualityScore, Frame, Polarity, Span,
};

use super::{check_span, CommonColumns};

/// Predicates MegaVeridicality uses for its semantically bleached complements.
const BLEACHED_PREDICATES: [&str; 5] = ["do", "have", "happen", "happened", "be"];

fn response_value(token: &str) -> Option<f64> {
    match token.trim().to_ascii_lowercase().as_str() {
        "yes" => Some(3.0),
        "maybe" => Some(0.0),
        "no" => Some(-3.0),
        _ => None,
    }
}

struct Item {
    first_line: usize,
    verb: String,
    frame: Frame,
    polarity: Polarity,
    sentence: String,
    tokens: Vec<String>,
    span: Option<Span>,
    split: crate::model::Split,
    responses: Vec<f64>,
}

/// Loads the MegaVeridicality long-format table (one row per annotator response).
///
/// Required columns: `verb`, `frame`, `polarity`, `sentence`, `veridicality`
/// (`yes`/`maybe`/`no`). Rows sharing verb, frame, polarity and sentence are one
/// item. Responses map to `3`/`0`/`-3` and the gold label is their mean.
pub fn load_megaveridicality(path: &Path) -> Result<Vec<EventRecord>> {
    let table = Table::read(path)?;
    let common = CommonColumns::locate(&table)?;
    let verb_c = table.require("verb")?;
    let frame_c = table.require("frame")?;
    let pol_c = table.require("polarity")?;
    let resp_c = table.require("veridicality")?;

    let key = source_key(path);
    let mut order: Vec<Item> = Vec::new();
    let mut index: HashMap<(String, Frame, Polarity, String), usize> = HashMap::new();

    for (line, row) in &table.rows {
        let line = *line;
        let bad = |msg: String| Error::parse(path, line, msg);
        let verb = row[verb_c].trim().to_lowercase();
        if verb.is_empty() {
            return Err(bad("empty verb".into()));
        }
        let frame: Frame = row[frame_c].parse().map_err(|e: Error| bad(e.to_string()))?;
        let polarity: Polarity = row[pol_c].parse().map_err(|e: Error| bad(e.to_string()))?;
        let response = response_value(&row[resp_c])
            .ok_or_else(|| bad(format!("unknown response `{}`", row[resp_c].trim())))?;
        let sentence = common.sentence(row).to_string();

        let k = (verb.clone(), frame, polarity, sentence.clone());
        let slot = match index.get(&k) {
            Some(&i) => i,
            None => {
                let tokens = common.tokens(row);
                let span = common.span(&table, line, row)?;
                order.push(Item {
                    first_line: line,
                    verb,
                    frame,
                    polarity,
                    sentence,
                    tokens,
                    span,
                    split: common.split(&table, line, row)?,
                    responses: Vec::new(),
                });
                index.insert(k, order.len() - 1);
                order.len() - 1
            }
        };
        order[slot].responses.push(response);
    }

    order
        .into_iter()
        .enumerate()
        .map(|(ordinal, item)| {
            let span = match item.span {
                Some(s) => s,
                None => locate_bleached_event(&item.tokens).ok_or_else(|| {
                    Error::parse(path, item.first_line, "cannot locate the embedded event token")
                })?,
            };
            let span = check_span(&table, item.first_line, span, item.tokens.len())?;
            let gold = item.responses.iter().sum::<f64>() / item.responses.len() as f64;
            Ok(EventRecord {
                id: EventRecord::make_id(Dataset::MV, &key, ordinal),
                dataset: Dataset::MV,
                split: item.split,
                sentence: item.sentence,
                tokens: item.tokens,
                event_span: span,
                gold: FactualityScore::new(gold)?,
                annotations: item.responses,
                verb: Some(item.verb),
                frame: Some(item.frame),
                polarity: Some(item.polarity),
                environment: Some(Environment::from_polarity(item.polarity)),
                genre: None,
            })
        })
        .collect()
}

/// Last token that is one of the bleached complement predicates.
fn locate_bleached_event(tokens: &[String]) -> Option<Span> {
    tokens
        .iter()
        .rposition(|t| {
            let t = t.trim_matches(|c: char| !c.is_alphanumeric()).to_lowercase();
            BLEACHED_PREDICATES.contains(&t.as_str())
        })
        .map(Span::single)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::Builder::new().suffix(".csv").tempfile().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    const HEADER: &str = "participant,verb,frame,polarity,sentence,veridicality\n";

    #[test]
    fn maps_responses_and_averages() {
        let f = write(&format!(
            "{HEADER}\
             1,manage,V_to_VP_ev,negative,Someone didn't manage to do a particular thing.,no\n\
             2,manage,V_to_VP_ev,negative,Someone didn't manage to do a particular thing.,yes\n\
             3,manage,V_to_VP_ev,negative,Someone didn't manage to do a particular thing.,yes\n\
             1,know,V_that_S,positive,Someone knew that a particular thing happened.,maybe\n"
        ));
        let recs = load_megaveridicality(f.path()).unwrap();
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[0].gold.value(), 1.0);
        assert_eq!(recs[0].annotations, vec![-3.0, 3.0, 3.0]);
        assert_eq!(recs[0].polarity, Some(Polarity::Negative));
        assert_eq!(recs[0].environment, Some(Environment::Negation));
        assert_eq!(recs[0].event_text(), "do");
        assert_eq!(recs[1].gold.value(), 0.0);
        assert_eq!(recs[1].event_text(), "happened.");
        for r in &recs {
            r.validate().unwrap();
        }
        // idempotent
        assert_eq!(recs, load_megaveridicality(f.path()).unwrap());
    }

    #[test]
    fn unknown_response_names_line() {
        let f = write(&format!(
            "{HEADER}1,know,V_that_S,positive,Someone knew that a particular thing happened.,perhaps\n"
        ));
        let err = load_megaveridicality(f.path()).unwrap_err().to_string();
        assert!(err.contains(":2:"), "{err}");
        assert!(err.contains("perhaps"));
    }

    #[test]
    fn malformed_row_names_line() {
        let f = write(&format!(
            "{HEADER}1,know,V_that_S,positive,Someone knew that a particular thing happened.,yes\n2,know\n"
        ));
        let err = load_megaveridicality(f.path()).unwrap_err().to_string();
        assert!(err.contains(":3:"), "{err}");
    }
}
