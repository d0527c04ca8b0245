//! Verb-frame signatures and their projection through embedding environments.
//!
//! A signature `X/Y` gives the factuality of the complement when the embedding
//! verb is under positive polarity (`X`) and under negation (`Y`).

use std::collections::HashMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::io::read_to_string;
use crate::model::{
    category_to_score, Environment, EventRecord, FactualityCategory, FactualityScore, Frame,
};

const STARTER_LEXICON: &str = include_str!("../data/lexicon.tsv");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Signature {
    pub pos: FactualityCategory,
    pub neg: FactualityCategory,
}

impl Signature {
    pub fn new(pos: FactualityCategory, neg: FactualityCategory) -> Self {
        Signature { pos, neg }
    }

    /// All nine `X/Y` combinations.
    pub fn all() -> impl Iterator<Item = Signature> {
        FactualityCategory::ALL
            .into_iter()
            .flat_map(|p| FactualityCategory::ALL.into_iter().map(move |n| Signature::new(p, n)))
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.pos, self.neg)
    }
}

impl FromStr for Signature {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (p, n) = s
            .split_once('/')
            .ok_or_else(|| Error::InvalidArgument(format!("signature `{s}` is not X/Y")))?;
        Ok(Signature::new(p.parse()?, n.parse()?))
    }
}

/// How the entailment-canceling environments other than negation behave.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnvironmentPolicy {
    /// Modal, question and conditional act like negation.
    #[default]
    Uniform,
    /// Only negation selects `Y`; the other environments yield neutral.
    NegationOnly,
}

impl FromStr for EnvironmentPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "uniform" => Ok(EnvironmentPolicy::Uniform),
            "negation-only" | "negationonly" => Ok(EnvironmentPolicy::NegationOnly),
            other => Err(Error::InvalidArgument(format!("unknown environment policy `{other}`"))),
        }
    }
}

pub fn project(sig: Signature, env: Environment, policy: EnvironmentPolicy) -> FactualityCategory {
    match (env, policy) {
        (Environment::None, _) => sig.pos,
        (Environment::Negation, _) => sig.neg,
        (_, EnvironmentPolicy::Uniform) => sig.neg,
        (_, EnvironmentPolicy::NegationOnly) => FactualityCategory::Neutral,
    }
}

/// `(verb lemma, frame) -> signature`, with lowercase lemmas.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SignatureLexicon {
    entries: HashMap<(String, Frame), Signature>,
}

impl SignatureLexicon {
    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let mut entries = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let bad = |msg: String| Error::parse(origin, line_no, msg);
            let cols: Vec<&str> = line.split('\t').map(str::trim).collect();
            let [verb, frame, x, y] = cols[..] else {
                return Err(bad(format!("expected 4 tab-separated columns, found {}", cols.len())));
            };
            let frame: Frame = frame.parse().map_err(|e: Error| bad(e.to_string()))?;
            let pos: FactualityCategory = x.parse().map_err(|e: Error| bad(e.to_string()))?;
            let neg: FactualityCategory = y.parse().map_err(|e: Error| bad(e.to_string()))?;
            let key = (verb.to_lowercase(), frame);
            if entries.contains_key(&key) {
                return Err(bad(format!("duplicate entry for ({verb}, {frame})")));
            }
            entries.insert(key, Signature::new(pos, neg));
        }
        Ok(SignatureLexicon { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&read_to_string(path)?, path)
    }

    /// The curated lexicon shipped with the crate.
    pub fn starter() -> Self {
        Self::parse(STARTER_LEXICON, Path::new("data/lexicon.tsv"))
            .expect("bundled lexicon is well-formed")
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get_exact(&self, verb: &str, frame: Frame) -> Option<Signature> {
        self.entries.get(&(verb.to_lowercase(), frame)).copied()
    }

    /// Exact entry, else the active counterpart of a passive frame, else (for
    /// the aspect-unspecified `V_to_VP`) the eventive infinitival entry.
    pub fn lookup(&self, verb: &str, frame: Frame) -> Option<Signature> {
        self.get_exact(verb, frame)
            .or_else(|| frame.active_counterpart().and_then(|f| self.get_exact(verb, f)))
            .or_else(|| match frame {
                Frame::VToVp => self
                    .get_exact(verb, Frame::VToVpEv)
                    .or_else(|| self.get_exact(verb, Frame::VToVpSt)),
                _ => None,
            })
    }

    pub fn verbs(&self) -> std::collections::BTreeSet<&str> {
        self.entries.keys().map(|(v, _)| v.as_str()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum SignatureOutcome {
    Predicted {
        score: FactualityScore,
        category: FactualityCategory,
        signature: Signature,
        environment: Environment,
    },
    /// The verb-frame pair is not in the lexicon. Distinct from a neutral rule.
    NoSignature,
}

impl SignatureOutcome {
    pub fn score(&self) -> Option<FactualityScore> {
        match self {
            SignatureOutcome::Predicted { score, .. } => Some(*score),
            SignatureOutcome::NoSignature => None,
        }
    }

    pub fn category(&self) -> Option<FactualityCategory> {
        match self {
            SignatureOutcome::Predicted { category, .. } => Some(*category),
            SignatureOutcome::NoSignature => None,
        }
    }
}

/// Signature prediction for one item.
///
/// Items without a frame are treated as `V_that_S` (CB only has that frame).
/// Without an explicit environment, polarity decides between `None` and
/// `Negation`.
pub fn predict_item(
    item: &EventRecord,
    lex: &SignatureLexicon,
    policy: EnvironmentPolicy,
) -> Result<SignatureOutcome> {
    let verb = item.verb.as_deref().ok_or_else(|| Error::MissingFeature {
        what: "verb".into(),
        ids: vec![item.id.clone()],
    })?;
    if item.frame.is_none() && item.effective_environment().is_none() {
        return Err(Error::MissingFeature {
            what: "frame or environment".into(),
            ids: vec![item.id.clone()],
        });
    }
    let frame = item.frame.unwrap_or(Frame::VThatS);
    let environment = item.effective_environment().unwrap_or(Environment::None);
    Ok(match lex.lookup(verb, frame) {
        Some(signature) => {
            let category = project(signature, environment, policy);
            SignatureOutcome::Predicted {
                score: category_to_score(category),
                category,
                signature,
                environment,
            }
        }
        None => SignatureOutcome::NoSignature,
    })
}

/// [`predict_item`] over a batch, preserving order.
pub fn predict_batch(
    items: &[EventRecord],
    lex: &SignatureLexicon,
    policy: EnvironmentPolicy,
    exec: Execution,
) -> Result<Vec<SignatureOutcome>> {
    exec.map(items, |it| predict_item(it, lex, policy))
        .into_iter()
        .collect()
}
