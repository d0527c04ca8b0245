use std::collections::BTreeSet;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::PredictionSet;
use crate::error::{Error, Result};
use crate::io::read_to_string;
use crate::model::{Dataset, EventRecord};
use crate::oracle::{feature_key, Feature};

/// Editable verb-class word lists used to flag scatter rows.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct VerbClasses {
    pub factive: BTreeSet<String>,
    pub neg_raising: BTreeSet<String>,
}

fn parse_words(text: &str) -> BTreeSet<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_lowercase)
        .collect()
}

impl VerbClasses {
    pub fn bundled() -> Self {
        VerbClasses {
            factive: parse_words(include_str!("../../data/factive.txt")),
            neg_raising: parse_words(include_str!("../../data/neg_raising.txt")),
        }
    }

    pub fn from_files(factive: &Path, neg_raising: &Path) -> Result<Self> {
        Ok(VerbClasses {
            factive: parse_words(&read_to_string(factive)?),
            neg_raising: parse_words(&read_to_string(neg_raising)?),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatterRow {
    pub id: String,
    pub dataset: Dataset,
    pub gold: f64,
    pub prediction: f64,
    pub facet: String,
    pub factive: bool,
    pub neg_raising: bool,
}

/// One row per item, faceted by the joined values of `facet`.
pub fn scatter_export(
    items: &[EventRecord],
    preds: &PredictionSet,
    facet: &[Feature],
    classes: &VerbClasses,
) -> Result<Vec<ScatterRow>> {
    if facet.is_empty() {
        return Err(Error::InvalidArgument("facet needs at least one feature".into()));
    }
    let mut unkeyed = Vec::new();
    let mut missing = Vec::new();
    let mut rows = Vec::with_capacity(items.len());
    for it in items {
        let Some(key) = feature_key(it, facet) else {
            unkeyed.push(it.id.clone());
            continue;
        };
        let Some(p) = preds.get(&it.id) else {
            missing.push(it.id.clone());
            continue;
        };
        let verb = it.verb.as_deref().map(str::to_lowercase).unwrap_or_default();
        rows.push(ScatterRow {
            id: it.id.clone(),
            dataset: it.dataset,
            gold: it.gold.value(),
            prediction: p,
            facet: key.join(" "),
            factive: classes.factive.contains(&verb),
            neg_raising: classes.neg_raising.contains(&verb),
        });
    }
    if !unkeyed.is_empty() {
        let what = facet.iter().map(|k| k.to_string()).collect::<Vec<_>>().join("/");
        return Err(Error::MissingFeature { what, ids: unkeyed });
    }
    if !missing.is_empty() {
        return Err(Error::MissingPredictions { ids: missing });
    }
    Ok(rows)
}

/// Writes rows as CSV. Two leading `#` lines carry the facet definition and
/// the reference diagonal for plotting.
pub fn write_scatter_csv(mut w: impl Write, facet: &[Feature], rows: &[ScatterRow]) -> Result<()> {
    let io = |e| Error::io("<scatter output>", e);
    let names: Vec<String> = facet.iter().map(|f| f.to_string()).collect();
    writeln!(w, "# facet: {}", names.join("+")).map_err(io)?;
    writeln!(w, "# diagonal: prediction = gold over [-3, 3]").map_err(io)?;
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(["id", "dataset", "gold", "prediction", "facet", "factive", "neg_raising"])?;
    for r in rows {
        csv.write_record([
            r.id.clone(),
            r.dataset.to_string(),
            r.gold.to_string(),
            r.prediction.to_string(),
            r.facet.clone(),
            r.factive.to_string(),
            r.neg_raising.to_string(),
        ])?;
    }
    csv.flush().map_err(io)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_lists() {
        let c = VerbClasses::bundled();
        assert!(c.factive.contains("know") && c.factive.contains("remember"));
        assert!(c.neg_raising.contains("think") && !c.neg_raising.contains("realize"));
    }

    #[test]
    fn empty_export_is_header_only() {
        let preds = PredictionSet::new("m", "", Vec::<(String, f64)>::new()).unwrap();
        let rows = scatter_export(&[], &preds, &[Feature::Environment], &VerbClasses::bundled()).unwrap();
        let mut buf = Vec::new();
        write_scatter_csv(&mut buf, &[Feature::Environment], &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let data: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(data, vec!["id,dataset,gold,prediction,facet,factive,neg_raising"]);
    }
}
