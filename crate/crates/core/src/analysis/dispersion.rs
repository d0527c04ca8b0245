use std::collections::BTreeMap;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::PredictionSet;
use crate::error::{Error, Result};
use crate::model::EventRecord;
use crate::oracle::{feature_key, Feature};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VarianceConvention {
    /// Divide by n - 1.
    #[default]
    Sample,
    /// Divide by n.
    Population,
}

impl VarianceConvention {
    pub fn variance(self, xs: &[f64]) -> f64 {
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        let ss: f64 = xs.iter().map(|x| (x - m).powi(2)).sum();
        match self {
            VarianceConvention::Sample => ss / (n - 1.0),
            VarianceConvention::Population => ss / n,
        }
    }
}

impl FromStr for VarianceConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sample" => Ok(VarianceConvention::Sample),
            "population" => Ok(VarianceConvention::Population),
            other => Err(Error::InvalidArgument(format!("unknown variance convention `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dispersion {
    pub keys: Vec<Feature>,
    pub convention: VarianceConvention,
    pub mean_pred_variance: f64,
    pub mean_gold_variance: f64,
    /// Groups with at least two items.
    pub groups: usize,
    pub singletons_skipped: usize,
}

/// Within-group variance of predictions and of gold labels, averaged over
/// groups of size two or more.
pub fn group_dispersion(
    items: &[EventRecord],
    preds: &PredictionSet,
    keys: &[Feature],
    convention: VarianceConvention,
) -> Result<Dispersion> {
    let mut groups: BTreeMap<Vec<String>, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    let mut unkeyed = Vec::new();
    let mut missing = Vec::new();
    for it in items {
        let Some(k) = feature_key(it, keys) else {
            unkeyed.push(it.id.clone());
            continue;
        };
        let Some(p) = preds.get(&it.id) else {
            missing.push(it.id.clone());
            continue;
        };
        let g = groups.entry(k).or_default();
        g.0.push(p);
        g.1.push(it.gold.value());
    }
    if !unkeyed.is_empty() {
        let what = keys.iter().map(|k| k.to_string()).collect::<Vec<_>>().join("/");
        return Err(Error::MissingFeature { what, ids: unkeyed });
    }
    if !missing.is_empty() {
        return Err(Error::MissingPredictions { ids: missing });
    }
    let total = groups.len();
    let sized: Vec<_> = groups.into_values().filter(|(p, _)| p.len() >= 2).collect();
    if sized.is_empty() {
        return Err(Error::Degenerate("no group has two or more items".into()));
    }
    let m = sized.len() as f64;
    Ok(Dispersion {
        keys: keys.to_vec(),
        convention,
        mean_pred_variance: sized.iter().map(|(p, _)| convention.variance(p)).sum::<f64>() / m,
        mean_gold_variance: sized.iter().map(|(_, g)| convention.variance(g)).sum::<f64>() / m,
        groups: sized.len(),
        singletons_skipped: total - sized.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_item_sample_variance() {
        assert_eq!(VarianceConvention::Sample.variance(&[1.0, 2.0]), 0.5);
        assert_eq!(VarianceConvention::Population.variance(&[1.0, 2.0]), 0.25);
    }
}
