//! Expected-inference labels.
//!
//! For embedded-event corpora the expected inference of a test item is the
//! mean gold label of training items sharing its features, backing off to
//! coarser feature tuples when no training item matches exactly. For corpora
//! without such features, rule-based predictions are ingested from a file.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::io::read_id_scores;
use crate::model::{Dataset, EventRecord, FactualityScore};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Feature {
    Verb,
    Polarity,
    Frame,
    Environment,
}

impl Feature {
    /// The feature's value on `item`, if set.
    pub fn value(self, item: &EventRecord) -> Option<String> {
        match self {
            Feature::Verb => item.verb.as_ref().map(|v| v.to_lowercase()),
            Feature::Polarity => item.polarity.map(|p| p.to_string()),
            Feature::Frame => item.frame.map(|f| f.to_string()),
            Feature::Environment => item.environment.map(|e| e.to_string()),
        }
    }
}

impl FromStr for Feature {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "verb" => Ok(Feature::Verb),
            "polarity" => Ok(Feature::Polarity),
            "frame" => Ok(Feature::Frame),
            "environment" | "env" => Ok(Feature::Environment),
            other => Err(Error::InvalidArgument(format!("unknown feature `{other}`"))),
        }
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Feature::Verb => "verb",
            Feature::Polarity => "polarity",
            Feature::Frame => "frame",
            Feature::Environment => "environment",
        })
    }
}

/// Key tuple for `features` on `item`, or `None` if any feature is unset.
pub fn feature_key(item: &EventRecord, features: &[Feature]) -> Option<Vec<String>> {
    features.iter().map(|f| f.value(item)).collect()
}

/// Ordered backoff list of feature tuples, finest first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSchema {
    tiers: Vec<Vec<Feature>>,
}

impl FeatureSchema {
    pub fn new(tiers: Vec<Vec<Feature>>) -> Result<Self> {
        if tiers.is_empty() || tiers.iter().any(Vec::is_empty) {
            return Err(Error::InvalidArgument("feature schema needs nonempty tiers".into()));
        }
        Ok(FeatureSchema { tiers })
    }

    /// MegaVeridicality and RP: (verb, polarity, frame) > (verb, polarity) > (verb) > (polarity).
    pub fn verb_polarity_frame() -> Self {
        use Feature::*;
        FeatureSchema {
            tiers: vec![vec![Verb, Polarity, Frame], vec![Verb, Polarity], vec![Verb], vec![Polarity]],
        }
    }

    /// CB: (verb, environment) > (verb) > (environment).
    pub fn verb_environment() -> Self {
        use Feature::*;
        FeatureSchema {
            tiers: vec![vec![Verb, Environment], vec![Verb], vec![Environment]],
        }
    }

    /// Default schema for a corpus, if it supports feature matching.
    pub fn for_dataset(d: Dataset) -> Option<Self> {
        match d {
            Dataset::MV | Dataset::RP => Some(Self::verb_polarity_frame()),
            Dataset::CB => Some(Self::verb_environment()),
            _ => None,
        }
    }

    pub fn tiers(&self) -> &[Vec<Feature>] {
        &self.tiers
    }

    pub fn len(&self) -> usize {
        self.tiers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tiers.is_empty()
    }

    /// Every feature any tier uses, deduplicated.
    pub fn features(&self) -> Vec<Feature> {
        let set: std::collections::BTreeSet<Feature> = self.tiers.iter().flatten().copied().collect();
        set.into_iter().collect()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct GroupStat {
    sum: f64,
    count: usize,
}

#[derive(Debug, Clone)]
pub struct FeatureIndex {
    schema: FeatureSchema,
    tiers: Vec<HashMap<Vec<String>, GroupStat>>,
}

impl FeatureIndex {
    pub fn schema(&self) -> &FeatureSchema {
        &self.schema
    }

    /// `(mean gold, count)` for a tier and key.
    pub fn group(&self, tier: usize, key: &[String]) -> Option<(f64, usize)> {
        self.tiers
            .get(tier)?
            .get(key)
            .map(|g| (g.sum / g.count as f64, g.count))
    }

    pub fn group_count(&self, tier: usize) -> usize {
        self.tiers.get(tier).map_or(0, HashMap::len)
    }
}

pub fn build_index(train: &[EventRecord], schema: &FeatureSchema) -> Result<FeatureIndex> {
    if train.is_empty() {
        return Err(Error::Degenerate("cannot build a feature index from no training items".into()));
    }
    let needed = schema.features();
    let missing: Vec<String> = train
        .iter()
        .filter(|it| feature_key(it, &needed).is_none())
        .map(|it| it.id.clone())
        .collect();
    if !missing.is_empty() {
        let names: Vec<String> = needed.iter().map(Feature::to_string).collect();
        return Err(Error::MissingFeature {
            what: format!("feature(s) {}", names.join(", ")),
            ids: missing,
        });
    }
    let mut tiers = vec![HashMap::<Vec<String>, GroupStat>::new(); schema.len()];
    for item in train {
        for (t, features) in schema.tiers.iter().enumerate() {
            let key = feature_key(item, features).expect("checked above");
            let g = tiers[t].entry(key).or_default();
            g.sum += item.gold.value();
            g.count += 1;
        }
    }
    Ok(FeatureIndex {
        schema: schema.clone(),
        tiers,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpectedInference {
    pub score: FactualityScore,
    /// Index of the backoff tier that matched.
    pub tier: usize,
    /// Number of training items in the matched group.
    pub support: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum OracleOutcome {
    Matched(ExpectedInference),
    /// No tier, not even the coarsest, has training support.
    NoMatch,
}

pub fn expected_inference(item: &EventRecord, index: &FeatureIndex) -> Result<OracleOutcome> {
    let needed = index.schema.features();
    if feature_key(item, &needed).is_none() {
        return Err(Error::MissingFeature {
            what: "oracle feature(s)".into(),
            ids: vec![item.id.clone()],
        });
    }
    for (tier, features) in index.schema.tiers.iter().enumerate() {
        let key = feature_key(item, features).expect("checked above");
        if let Some((mean, support)) = index.group(tier, &key) {
            return Ok(OracleOutcome::Matched(ExpectedInference {
                score: FactualityScore::new(mean)?,
                tier,
                support,
            }));
        }
    }
    Ok(OracleOutcome::NoMatch)
}

pub fn expected_inference_batch(
    items: &[EventRecord],
    index: &FeatureIndex,
    exec: Execution,
) -> Result<Vec<OracleOutcome>> {
    exec.map(items, |it| expected_inference(it, index))
        .into_iter()
        .collect()
}

/// Rule-based predictions keyed by item id.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RulePredictions {
    pub scores: BTreeMap<String, FactualityScore>,
    pub warnings: Vec<String>,
}

/// Reads `id <TAB> score` rule predictions for the given items.
///
/// Ids absent from `items`, duplicates and out-of-range scores are errors.
/// UDS-IH2 items are dropped with a warning: no rule-based predictions exist
/// for that corpus, so it takes no part in the expected-inference analysis.
pub fn ingest_rule_predictions(path: &Path, items: &[EventRecord]) -> Result<RulePredictions> {
    let known: HashMap<&str, Dataset> = items.iter().map(|it| (it.id.as_str(), it.dataset)).collect();
    let mut seen = HashSet::new();
    let mut out = RulePredictions::default();
    for (line, id, score) in read_id_scores(path)? {
        if !seen.insert(id.clone()) {
            return Err(Error::parse(path, line, format!("duplicate id `{id}`")));
        }
        let dataset = *known
            .get(id.as_str())
            .ok_or_else(|| Error::parse(path, line, format!("unknown id `{id}`")))?;
        let score = FactualityScore::new(score).map_err(|e| Error::parse(path, line, e.to_string()))?;
        if dataset == Dataset::UDSIH2 {
            out.warnings.push(format!("{id}: UDS-IH2 excluded from rule-based expected inference"));
            continue;
        }
        out.scores.insert(id, score);
    }
    Ok(out)
}

/// One exported expected-inference row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleRow {
    pub id: String,
    pub dataset: Dataset,
    pub score: FactualityScore,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub tier: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub support: Option<usize>,
    pub source: OracleSource,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleSource {
    FeatureMatch,
    Rule,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Frame, Polarity, Span, Split};
    use std::io::Write;

    fn item(id: &str, verb: &str, pol: Polarity, frame: Frame, gold: f64) -> EventRecord {
        EventRecord {
            id: id.into(),
            dataset: Dataset::MV,
            split: Split::Train,
            sentence: "x".into(),
            tokens: vec!["x".into()],
            event_span: Span::single(0),
            gold: FactualityScore::new(gold).unwrap(),
            annotations: vec![],
            verb: Some(verb.into()),
            frame: Some(frame),
            polarity: Some(pol),
            environment: None,
            genre: None,
        }
    }

    #[test]
    fn exact_match_and_backoff() {
        use Polarity::*;
        let train = vec![
            item("a", "know", Negative, Frame::VThatS, 2.0),
            item("b", "know", Negative, Frame::VThatS, 3.0),
            item("c", "think", Positive, Frame::VThatS, 1.0),
        ];
        let idx = build_index(&train, &FeatureSchema::verb_polarity_frame()).unwrap();
        assert_eq!(idx.group(0, &["know".into(), "Negative".into(), "V_that_S".into()]), Some((2.5, 2)));

        let q = item("q", "know", Negative, Frame::VThatS, 0.0);
        let OracleOutcome::Matched(e) = expected_inference(&q, &idx).unwrap() else { panic!() };
        assert_eq!((e.score.value(), e.tier, e.support), (2.5, 0, 2));

        let q = item("q", "know", Negative, Frame::VToVpEv, 0.0);
        let OracleOutcome::Matched(e) = expected_inference(&q, &idx).unwrap() else { panic!() };
        assert_eq!(e.tier, 1);

        let q = item("q", "flurble", Positive, Frame::VThatS, 0.0);
        let OracleOutcome::Matched(e) = expected_inference(&q, &idx).unwrap() else { panic!() };
        assert_eq!((e.tier, e.score.value(), e.support), (3, 1.0, 1));
    }

    #[test]
    fn no_match_and_singletons() {
        let train = vec![item("a", "know", Polarity::Positive, Frame::VThatS, 1.5)];
        let idx = build_index(&train, &FeatureSchema::verb_polarity_frame()).unwrap();
        for t in 0..4 {
            assert_eq!(idx.group_count(t), 1);
        }
        let q = item("q", "say", Polarity::Negative, Frame::VThatS, 0.0);
        assert_eq!(expected_inference(&q, &idx).unwrap(), OracleOutcome::NoMatch);
    }

    #[test]
    fn build_errors() {
        assert!(build_index(&[], &FeatureSchema::verb_environment()).is_err());
        let train = vec![item("a", "know", Polarity::Positive, Frame::VThatS, 1.5)];
        match build_index(&train, &FeatureSchema::verb_environment()) {
            Err(Error::MissingFeature { ids, .. }) => assert_eq!(ids, vec!["a".to_string()]),
            other => panic!("{other:?}"),
        }
    }

    fn rule_file(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::Builder::new().suffix(".tsv").tempfile().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn rule_predictions() {
        let mut fb = item("fb:test:0", "say", Polarity::Positive, Frame::VThatS, 3.0);
        fb.dataset = Dataset::FactBank;
        let mut uds = item("udsih2:test:0", "say", Polarity::Positive, Frame::VThatS, 3.0);
        uds.dataset = Dataset::UDSIH2;
        let items = vec![fb, uds];

        let f = rule_file("fb:test:0\t3.0\nudsih2:test:0\t1.0\n");
        let preds = ingest_rule_predictions(f.path(), &items).unwrap();
        assert_eq!(preds.scores.len(), 1);
        assert_eq!(preds.scores["fb:test:0"].value(), 3.0);
        assert_eq!(preds.warnings.len(), 1);

        let f = rule_file("fb:test:0\t3.0\nfb:test:0\t2.0\n");
        assert!(ingest_rule_predictions(f.path(), &items).unwrap_err().to_string().contains("duplicate"));
        let f = rule_file("fb:test:9\t3.0\n");
        assert!(ingest_rule_predictions(f.path(), &items).unwrap_err().to_string().contains("unknown id"));
        let f = rule_file("fb:test:0\t3.5\n");
        assert!(ingest_rule_predictions(f.path(), &items).is_err());
    }
}
