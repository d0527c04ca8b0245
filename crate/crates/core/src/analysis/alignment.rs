use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::model::{categorize, EventRecord, Thresholds};
use crate::signature::{predict_batch, EnvironmentPolicy, SignatureLexicon, SignatureOutcome};
use crate::stats::{fit_ordered_logistic, OrderedLogitModel};

/// How well signature categories line up with mean human labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignatureAlignment {
    /// Signature category regressed on the gold score.
    pub model: OrderedLogitModel,
    pub covered: usize,
    pub uncovered: usize,
    /// Share of covered items whose signature category equals the binned gold.
    pub agreement: f64,
    /// Best constant-category agreement on the same items.
    pub baseline: f64,
}

pub fn signature_alignment(
    items: &[EventRecord],
    lex: &SignatureLexicon,
    policy: EnvironmentPolicy,
    thresholds: Thresholds,
    exec: Execution,
) -> Result<SignatureAlignment> {
    let outcomes = predict_batch(items, lex, policy, exec)?;
    let mut x = Vec::new();
    let mut y = Vec::new();
    let mut hits = 0usize;
    let mut binned = [0usize; 3];
    for (it, o) in items.iter().zip(&outcomes) {
        if let SignatureOutcome::Predicted { category, .. } = o {
            let g = categorize(it.gold, thresholds);
            x.push(it.gold.value());
            y.push(*category);
            hits += usize::from(g == *category);
            binned[g.rank()] += 1;
        }
    }
    if x.is_empty() {
        return Err(Error::Degenerate("no item is covered by the lexicon".into()));
    }
    let n = x.len() as f64;
    let model = fit_ordered_logistic(&x, &y)?;
    Ok(SignatureAlignment {
        model,
        covered: x.len(),
        uncovered: items.len() - x.len(),
        agreement: hits as f64 / n,
        baseline: *binned.iter().max().expect("three bins") as f64 / n,
    })
}

