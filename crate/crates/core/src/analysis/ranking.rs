use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{PredictionSet, TextTable};
use crate::error::{Error, Result};
use crate::model::{Dataset, EventRecord};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedError {
    pub rank: usize,
    pub id: String,
    pub dataset: Dataset,
    pub gold: f64,
    pub prediction: f64,
    pub abs_error: f64,
}

/// Number of items kept from `n` at fraction `frac`: `floor(frac * n)`, at
/// least one. 10% of 556 is 55 and 10% of 2508 is 250.
pub fn top_count(n: usize, frac: f64) -> usize {
    if n == 0 {
        return 0;
    }
    ((frac * n as f64 + 1e-9).floor() as usize).clamp(1, n)
}

/// Items sorted by absolute error, largest first, ties by id; the top
/// `frac` of them are returned.
pub fn rank_errors(items: &[EventRecord], preds: &PredictionSet, frac: f64) -> Result<Vec<RankedError>> {
    if !(frac > 0.0 && frac <= 1.0) {
        return Err(Error::InvalidArgument(format!("fraction must be in (0, 1], got {frac}")));
    }
    let refs: Vec<&EventRecord> = items.iter().collect();
    let p = preds.aligned(&refs)?;
    let mut rows: Vec<RankedError> = items
        .iter()
        .zip(p)
        .map(|(it, p)| RankedError {
            rank: 0,
            id: it.id.clone(),
            dataset: it.dataset,
            gold: it.gold.value(),
            prediction: p,
            abs_error: (p - it.gold.value()).abs(),
        })
        .collect();
    rows.sort_by(|a, b| b.abs_error.total_cmp(&a.abs_error).then_with(|| a.id.cmp(&b.id)));
    rows.truncate(top_count(items.len(), frac));
    for (i, r) in rows.iter_mut().enumerate() {
        r.rank = i + 1;
    }
    Ok(rows)
}

/// [`rank_errors`] applied to each dataset separately.
pub fn rank_errors_by_dataset(
    items: &[EventRecord],
    preds: &PredictionSet,
    frac: f64,
) -> Result<BTreeMap<Dataset, Vec<RankedError>>> {
    let mut by: BTreeMap<Dataset, Vec<EventRecord>> = BTreeMap::new();
    for it in items {
        by.entry(it.dataset).or_default().push(it.clone());
    }
    by.into_iter()
        .map(|(d, its)| Ok((d, rank_errors(&its, preds, frac)?)))
        .collect()
}

pub fn ranking_table(rows: &[RankedError]) -> TextTable {
    let mut t = TextTable::new(["rank", "id", "dataset", "gold", "prediction", "abs_error"]);
    for r in rows {
        t.push([
            r.rank.to_string(),
            r.id.clone(),
            r.dataset.to_string(),
            format!("{:.3}", r.gold),
            format!("{:.3}", r.prediction),
            format!("{:.3}", r.abs_error),
        ]);
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_match_reported_subsets() {
        assert_eq!(top_count(556, 0.10), 55);
        assert_eq!(top_count(2508, 0.10), 250);
        assert_eq!(top_count(10, 1.0), 10);
        assert_eq!(top_count(3, 0.1), 1);
        assert_eq!(top_count(0, 0.5), 0);
        // 0.3 * 10 is 2.9999999999999996 in binary
        assert_eq!(top_count(10, 0.3), 3);
    }
}
