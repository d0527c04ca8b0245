use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{PredictionSet, TextTable};
use crate::error::{Error, Result};
use crate::model::{Dataset, EventRecord, Split};
use crate::stats::{mae, pearson};

/// Which items of a dataset were scored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvalScope {
    /// Items assigned to the test split.
    Test,
    /// The dataset carries no test split, so every item is scored.
    All,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMetrics {
    pub dataset: Dataset,
    pub scope: EvalScope,
    pub n: usize,
    pub mae: f64,
    /// `None` when either side is constant.
    pub pearson: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub models: Vec<String>,
    pub datasets: Vec<DatasetMetrics>,
}

impl EvaluationReport {
    pub fn table(&self) -> TextTable {
        let mut t = TextTable::new(["dataset", "scope", "n", "MAE", "r"]);
        for d in &self.datasets {
            t.push([
                d.dataset.to_string(),
                format!("{:?}", d.scope).to_lowercase(),
                d.n.to_string(),
                format!("{:.3}", d.mae),
                d.pearson.map_or("undef".into(), |r| format!("{r:.3}")),
            ]);
        }
        t
    }
}

/// Items scored for each dataset: its test split, or all items if it has none.
pub fn evaluation_items(items: &[EventRecord]) -> BTreeMap<Dataset, (EvalScope, Vec<&EventRecord>)> {
    let mut by_dataset: BTreeMap<Dataset, Vec<&EventRecord>> = BTreeMap::new();
    for it in items {
        by_dataset.entry(it.dataset).or_default().push(it);
    }
    by_dataset
        .into_iter()
        .map(|(d, all)| {
            let test: Vec<&EventRecord> = all.iter().copied().filter(|it| it.split == Split::Test).collect();
            if test.is_empty() {
                (d, (EvalScope::All, all))
            } else {
                (d, (EvalScope::Test, test))
            }
        })
        .collect()
}

/// MAE and Pearson r per dataset. Several prediction sets are averaged per
/// item first.
pub fn evaluate(items: &[EventRecord], sets: &[PredictionSet]) -> Result<EvaluationReport> {
    let preds = PredictionSet::average(sets)?;
    let mut datasets = Vec::new();
    let mut missing = Vec::new();
    for (dataset, (scope, scored)) in evaluation_items(items) {
        let p = match preds.aligned(&scored) {
            Ok(p) => p,
            Err(Error::MissingPredictions { ids }) => {
                missing.extend(ids);
                continue;
            }
            Err(e) => return Err(e),
        };
        let g: Vec<f64> = scored.iter().map(|it| it.gold.value()).collect();
        datasets.push(DatasetMetrics {
            dataset,
            scope,
            n: scored.len(),
            mae: mae(&p, &g)?,
            pearson: if g.len() < 2 { None } else { pearson(&p, &g)?.value() },
        });
    }
    if !missing.is_empty() {
        return Err(Error::MissingPredictions { ids: missing });
    }
    Ok(EvaluationReport {
        models: sets.iter().map(|s| s.model_name.clone()).collect(),
        datasets,
    })
}
