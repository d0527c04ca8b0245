use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{PredictionSet, TextTable};
use crate::error::{Error, Result};
use crate::model::{Dataset, EventRecord, FactualityScore};
use crate::oracle::OracleRow;
use crate::stats::{fit_mixed_linear_with, MixedConfig, MixedLinearModel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyPoint {
    pub id: String,
    pub dataset: Dataset,
    /// |expected inference - gold|
    pub x: f64,
    /// |prediction - gold|
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSlope {
    pub dataset: Dataset,
    pub n: usize,
    pub intercept: f64,
    pub slope: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpectedStudy {
    pub points: Vec<StudyPoint>,
    pub model: MixedLinearModel,
    pub slopes: Vec<DatasetSlope>,
    pub all_slopes_positive: bool,
    /// Items with an expected inference but no prediction.
    pub unpredicted: usize,
    pub warnings: Vec<String>,
}

impl ExpectedStudy {
    pub fn table(&self) -> TextTable {
        let mut t = TextTable::new(["dataset", "n", "intercept", "slope"]);
        t.push([
            "(fixed)".to_string(),
            self.points.len().to_string(),
            format!("{:.3}", self.model.fixed_intercept),
            format!("{:.3}", self.model.fixed_slope),
        ]);
        for s in &self.slopes {
            t.push([
                s.dataset.to_string(),
                s.n.to_string(),
                format!("{:.3}", s.intercept),
                format!("{:.3}", s.slope),
            ]);
        }
        t
    }
}

/// Expected-inference scores keyed by id.
pub fn expected_scores(rows: &[OracleRow]) -> Result<BTreeMap<String, FactualityScore>> {
    let mut out = BTreeMap::new();
    for r in rows {
        if out.insert(r.id.clone(), r.score).is_some() {
            return Err(Error::DuplicateId(r.id.clone()));
        }
    }
    Ok(out)
}

/// Regresses model error on expected-inference error, grouped by dataset.
///
/// Items enter when they have both an expected inference and a prediction.
/// UDS-IH2 never enters.
pub fn expected_inference_study(
    items: &[EventRecord],
    preds: &PredictionSet,
    expected: &BTreeMap<String, FactualityScore>,
    cfg: MixedConfig,
) -> Result<ExpectedStudy> {
    let mut points = Vec::new();
    let mut unpredicted = 0;
    let mut warnings = Vec::new();
    let mut uds = 0;
    for it in items {
        let Some(e) = expected.get(&it.id) else { continue };
        if it.dataset == Dataset::UDSIH2 {
            uds += 1;
            continue;
        }
        let Some(p) = preds.get(&it.id) else {
            unpredicted += 1;
            continue;
        };
        let g = it.gold.value();
        points.push(StudyPoint {
            id: it.id.clone(),
            dataset: it.dataset,
            x: (e.value() - g).abs(),
            y: (p - g).abs(),
        });
    }
    if uds > 0 {
        warnings.push(format!("{uds} UDS-IH2 item(s) excluded"));
    }
    if unpredicted > 0 {
        warnings.push(format!("{unpredicted} item(s) with an expected inference have no prediction"));
    }
    if points.is_empty() {
        return Err(Error::Degenerate(
            "no item has both an expected inference and a prediction".into(),
        ));
    }
    let x: Vec<f64> = points.iter().map(|p| p.x).collect();
    let y: Vec<f64> = points.iter().map(|p| p.y).collect();
    let g: Vec<Dataset> = points.iter().map(|p| p.dataset).collect();
    let model = fit_mixed_linear_with(&x, &y, &g, cfg)?;
    warnings.extend(model.warnings.iter().cloned());

    let slopes: Vec<DatasetSlope> = model
        .group_effects
        .iter()
        .map(|e| DatasetSlope {
            dataset: e.group.parse().expect("group names come from Dataset"),
            n: e.n,
            intercept: e.intercept,
            slope: e.slope,
        })
        .collect();
    let all_slopes_positive = slopes.iter().all(|s| s.slope > 0.0);
    Ok(ExpectedStudy {
        points,
        model,
        slopes,
        all_slopes_positive,
        unpredicted,
        warnings,
    })
}
