use std::path::Path;

use crate::error::{Error, Result};
use crate::io::{source_key, Table};
use crate::model::{Dataset, EventRecord, FactualityScore};

use super::{check_span, optional_field, CommonColumns};

/// Loads a token-indexed unified-scale file (FactBank, MEANTIME, UW, UDS-IH2).
///
/// Required columns: `sentence` (or `tokens`), `label` (or `score`), and an event
/// position given as `index`/`event_index` or `event_start` + `event_end`.
/// Scores are read verbatim; linguistic features are left unset.
pub fn load_unified(path: &Path, dataset: Dataset) -> Result<Vec<EventRecord>> {
    let table = Table::read(path)?;
    let common = CommonColumns::locate(&table)?;
    let label_c = table
        .column("label")
        .or_else(|| table.column("score"))
        .ok_or_else(|| Error::parse(path, 1, "missing required column `label`"))?;
    let genre_c = table.column("genre");
    let key = source_key(path);

    table
        .rows
        .iter()
        .enumerate()
        .map(|(ordinal, (line, row))| {
            let line = *line;
            let raw = row[label_c].trim();
            let value: f64 = raw
                .parse()
                .map_err(|_| Error::parse(path, line, format!("bad score `{raw}`")))?;
            let gold = FactualityScore::new(value).map_err(|e| Error::parse(path, line, e.to_string()))?;
            let tokens = common.tokens(row);
            let span = common
                .span(&table, line, row)?
                .ok_or_else(|| Error::parse(path, line, "missing event index"))?;
            let span = check_span(&table, line, span, tokens.len())?;
            Ok(EventRecord {
                id: EventRecord::make_id(dataset, &key, ordinal),
                dataset,
                split: common.split(&table, line, row)?,
                sentence: common.sentence(row).to_string(),
                tokens,
                event_span: span,
                gold,
                annotations: Vec::new(),
                verb: None,
                frame: None,
                polarity: None,
                environment: None,
                genre: optional_field(row, genre_c),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Span;
    use std::io::Write;

    fn write(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::Builder::new().prefix("test").suffix(".tsv").tempfile().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn pass_through() {
        let f = write(
            "sentence\tindex\tlabel\tsplit\n\
             a b c d e said f g h i j k\t5\t3.0\ttest\n",
        );
        let recs = load_unified(f.path(), Dataset::FactBank).unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].tokens.len(), 12);
        assert_eq!(recs[0].event_span, Span::new(5, 6));
        assert_eq!(recs[0].gold.value(), 3.0);
        assert!(recs[0].annotations.is_empty());
        assert!(recs[0].id.starts_with("fb:"));
        assert_eq!(recs[0].split, crate::model::Split::Test);
    }

    #[test]
    fn rejects_bad_rows() {
        let f = write("sentence\tindex\tlabel\na b c\t1\t3.5\n");
        assert!(load_unified(f.path(), Dataset::UW).is_err());
        let f = write("sentence\tindex\tlabel\na b c\t3\t1.0\n");
        let err = load_unified(f.path(), Dataset::UW).unwrap_err().to_string();
        assert!(err.contains("outside sentence"), "{err}");
    }
}
