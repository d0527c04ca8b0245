//! Domain types shared across the crate.
//!
//! Every corpus is converted to [`EventRecord`]s on the unified `[-3, 3]`
//! factuality scale. Records are plain values: once built they are never
//! mutated in place by the analysis code, only copied with changes.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SCALE_MIN: f64 = -3.0;
pub const SCALE_MAX: f64 = 3.0;

/// Tolerance for `gold == mean(annotations)` checks.
pub const GOLD_MEAN_TOLERANCE: f64 = 1e-9;

/// A factuality rating on the unified `[-3, 3]` scale.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct FactualityScore(f64);

impl FactualityScore {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() && (SCALE_MIN..=SCALE_MAX).contains(&value) {
            Ok(FactualityScore(value))
        } else {
            Err(Error::ScoreOutOfRange(value))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for FactualityScore {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        FactualityScore::new(value)
    }
}

impl From<FactualityScore> for f64 {
    fn from(s: FactualityScore) -> f64 {
        s.0
    }
}

impl fmt::Display for FactualityScore {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Factual (`+`), neutral (`o`) or nonfactual (`-`), ordered `Minus < Neutral < Plus`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FactualityCategory {
    Minus,
    Neutral,
    Plus,
}

impl FactualityCategory {
    pub const ALL: [FactualityCategory; 3] = [
        FactualityCategory::Minus,
        FactualityCategory::Neutral,
        FactualityCategory::Plus,
    ];

    pub fn symbol(self) -> char {
        match self {
            FactualityCategory::Minus => '-',
            FactualityCategory::Neutral => 'o',
            FactualityCategory::Plus => '+',
        }
    }

    /// Zero-based rank in the `Minus < Neutral < Plus` order.
    pub fn rank(self) -> usize {
        self as usize
    }
}

impl fmt::Display for FactualityCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

impl FromStr for FactualityCategory {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "+" => Ok(FactualityCategory::Plus),
            "o" | "O" | "0" => Ok(FactualityCategory::Neutral),
            "-" | "\u{2212}" => Ok(FactualityCategory::Minus),
            other => Err(Error::InvalidArgument(format!(
                "unknown category symbol `{other}` (expected +, o or -)"
            ))),
        }
    }
}

/// Maps `Plus`/`Neutral`/`Minus` to `+3`/`0`/`-3`.
pub fn category_to_score(c: FactualityCategory) -> FactualityScore {
    FactualityScore(match c {
        FactualityCategory::Plus => SCALE_MAX,
        FactualityCategory::Neutral => 0.0,
        FactualityCategory::Minus => SCALE_MIN,
    })
}

/// Bin edges for turning a mean score into a category.
///
/// Scores strictly below `lo` are `Minus`, strictly above `hi` are `Plus`,
/// and the closed interval `[lo, hi]` is `Neutral` (boundary values included).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub lo: f64,
    pub hi: f64,
}

impl Thresholds {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(lo < hi) {
            return Err(Error::InvalidArgument(format!(
                "category thresholds must satisfy lo < hi, got lo={lo}, hi={hi}"
            )));
        }
        Ok(Thresholds { lo, hi })
    }
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds { lo: -0.5, hi: 0.5 }
    }
}

pub fn score_to_category(s: FactualityScore, lo: f64, hi: f64) -> Result<FactualityCategory> {
    let t = Thresholds::new(lo, hi)?;
    Ok(categorize(s, t))
}

pub fn categorize(s: FactualityScore, t: Thresholds) -> FactualityCategory {
    let v = s.value();
    if v < t.lo {
        FactualityCategory::Minus
    } else if v > t.hi {
        FactualityCategory::Plus
    } else {
        FactualityCategory::Neutral
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Polarity {
    Positive,
    Negative,
}

impl FromStr for Polarity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "positive" | "pos" | "+" => Ok(Polarity::Positive),
            "negative" | "neg" | "-" => Ok(Polarity::Negative),
            other => Err(Error::InvalidArgument(format!("unknown polarity `{other}`"))),
        }
    }
}

impl fmt::Display for Polarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Polarity::Positive => "Positive",
            Polarity::Negative => "Negative",
        })
    }
}

/// The embedding context of the clause-embedding verb.
///
/// Everything but `None` is entailment-canceling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Environment {
    None,
    Negation,
    Modal,
    Question,
    Conditional,
}

impl Environment {
    pub const ALL: [Environment; 5] = [
        Environment::None,
        Environment::Negation,
        Environment::Modal,
        Environment::Question,
        Environment::Conditional,
    ];

    pub fn is_entailment_canceling(self) -> bool {
        self != Environment::None
    }

    pub fn from_polarity(p: Polarity) -> Self {
        match p {
            Polarity::Positive => Environment::None,
            Polarity::Negative => Environment::Negation,
        }
    }
}

impl FromStr for Environment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "none" | "" | "positive" => Ok(Environment::None),
            "negation" | "neg" | "negated" => Ok(Environment::Negation),
            "modal" => Ok(Environment::Modal),
            "question" | "q" => Ok(Environment::Question),
            "conditional" | "antecedent" | "cond" => Ok(Environment::Conditional),
            other => Err(Error::InvalidArgument(format!(
                "unknown environment `{other}`"
            ))),
        }
    }
}

impl fmt::Display for Environment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// Syntactic frame of the clause-embedding verb.
///
/// The first nine entries are the MegaVeridicality frames; `VToVp` is the
/// aspect-unspecified infinitival frame used by RP.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Frame {
    #[serde(rename = "V_that_S")]
    VThatS,
    #[serde(rename = "was_Ved_that_S")]
    WasVedThatS,
    #[serde(rename = "V_for_NP_to_VP")]
    VForNpToVp,
    #[serde(rename = "V_NP_to_VP_ev")]
    VNpToVpEv,
    #[serde(rename = "V_NP_to_VP_st")]
    VNpToVpSt,
    #[serde(rename = "NP_was_Ved_to_VP_ev")]
    NpWasVedToVpEv,
    #[serde(rename = "NP_was_Ved_to_VP_st")]
    NpWasVedToVpSt,
    #[serde(rename = "V_to_VP_ev")]
    VToVpEv,
    #[serde(rename = "V_to_VP_st")]
    VToVpSt,
    #[serde(rename = "V_to_VP")]
    VToVp,
}

impl Frame {
    pub const ALL: [Frame; 10] = [
        Frame::VThatS,
        Frame::WasVedThatS,
        Frame::VForNpToVp,
        Frame::VNpToVpEv,
        Frame::VNpToVpSt,
        Frame::NpWasVedToVpEv,
        Frame::NpWasVedToVpSt,
        Frame::VToVpEv,
        Frame::VToVpSt,
        Frame::VToVp,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Frame::VThatS => "V_that_S",
            Frame::WasVedThatS => "was_Ved_that_S",
            Frame::VForNpToVp => "V_for_NP_to_VP",
            Frame::VNpToVpEv => "V_NP_to_VP_ev",
            Frame::VNpToVpSt => "V_NP_to_VP_st",
            Frame::NpWasVedToVpEv => "NP_was_Ved_to_VP_ev",
            Frame::NpWasVedToVpSt => "NP_was_Ved_to_VP_st",
            Frame::VToVpEv => "V_to_VP_ev",
            Frame::VToVpSt => "V_to_VP_st",
            Frame::VToVp => "V_to_VP",
        }
    }

    /// The active frame a passive frame derives from, if any.
    pub fn active_counterpart(self) -> Option<Frame> {
        match self {
            Frame::WasVedThatS => Some(Frame::VThatS),
            Frame::NpWasVedToVpEv => Some(Frame::VNpToVpEv),
            Frame::NpWasVedToVpSt => Some(Frame::VNpToVpSt),
            _ => None,
        }
    }
}

impl FromStr for Frame {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        Frame::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown frame `{s}`")))
    }
}

impl fmt::Display for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Dataset {
    MV,
    CB,
    RP,
    FactBank,
    MEANTIME,
    UW,
    UDSIH2,
}

impl Dataset {
    pub const ALL: [Dataset; 7] = [
        Dataset::MV,
        Dataset::CB,
        Dataset::RP,
        Dataset::FactBank,
        Dataset::MEANTIME,
        Dataset::UW,
        Dataset::UDSIH2,
    ];

    /// Prefix used in record ids.
    pub fn id_prefix(self) -> &'static str {
        match self {
            Dataset::MV => "mv",
            Dataset::CB => "cb",
            Dataset::RP => "rp",
            Dataset::FactBank => "fb",
            Dataset::MEANTIME => "meantime",
            Dataset::UW => "uw",
            Dataset::UDSIH2 => "udsih2",
        }
    }

    /// Corpora annotated on embedded events under a clause-embedding verb.
    pub fn is_embedded_event(self) -> bool {
        matches!(self, Dataset::MV | Dataset::CB | Dataset::RP)
    }
}

impl FromStr for Dataset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "mv" | "megaveridicality" => Ok(Dataset::MV),
            "cb" | "commitmentbank" => Ok(Dataset::CB),
            "rp" => Ok(Dataset::RP),
            "fb" | "factbank" => Ok(Dataset::FactBank),
            "meantime" => Ok(Dataset::MEANTIME),
            "uw" => Ok(Dataset::UW),
            "udsih2" | "uds" => Ok(Dataset::UDSIH2),
            other => Err(Error::InvalidArgument(format!("unknown dataset `{other}`"))),
        }
    }
}

impl fmt::Display for Dataset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub enum Split {
    Train,
    Dev,
    Test,
    #[default]
    Unassigned,
}

impl FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "train" => Ok(Split::Train),
            "dev" | "valid" | "validation" => Ok(Split::Dev),
            "test" => Ok(Split::Test),
            "" | "unassigned" => Ok(Split::Unassigned),
            other => Err(Error::InvalidArgument(format!("unknown split `{other}`"))),
        }
    }
}

/// Half-open token range `[start, end)`, serialized as a two-element array.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "[usize; 2]", into = "[usize; 2]")]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }

    pub fn single(index: usize) -> Self {
        Span {
            start: index,
            end: index + 1,
        }
    }

    pub fn len(&self) -> usize {
        self.end.saturating_sub(self.start)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl From<[usize; 2]> for Span {
    fn from([start, end]: [usize; 2]) -> Self {
        Span { start, end }
    }
}

impl From<Span> for [usize; 2] {
    fn from(s: Span) -> Self {
        [s.start, s.end]
    }
}

/// One annotated event.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub id: String,
    pub dataset: Dataset,
    #[serde(default)]
    pub split: Split,
    pub sentence: String,
    pub tokens: Vec<String>,
    pub event_span: Span,
    pub gold: FactualityScore,
    #[serde(default)]
    pub annotations: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verb: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame: Option<Frame>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub polarity: Option<Polarity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub environment: Option<Environment>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub genre: Option<String>,
}

impl EventRecord {
    /// Builds the stable `<dataset>:<source-file-key>:<ordinal>` id.
    pub fn make_id(dataset: Dataset, source_key: &str, ordinal: usize) -> String {
        format!("{}:{}:{}", dataset.id_prefix(), source_key, ordinal)
    }

    /// Checks span bounds, scale ranges and the gold/annotation mean.
    pub fn validate(&self) -> Result<()> {
        let n = self.tokens.len();
        let Span { start, end } = self.event_span;
        if !(start < end && end <= n) {
            return Err(Error::InvalidArgument(format!(
                "{}: event span [{start}, {end}) outside {n} tokens",
                self.id
            )));
        }
        FactualityScore::new(self.gold.value())?;
        for &a in &self.annotations {
            FactualityScore::new(a)?;
        }
        if let Some(m) = mean(&self.annotations) {
            if (m - self.gold.value()).abs() > GOLD_MEAN_TOLERANCE {
                return Err(Error::InvalidArgument(format!(
                    "{}: gold {} differs from annotation mean {m}",
                    self.id, self.gold
                )));
            }
        }
        Ok(())
    }

    /// The environment used for projection: explicit environment if present,
    /// otherwise derived from polarity.
    pub fn effective_environment(&self) -> Option<Environment> {
        self.environment
            .or_else(|| self.polarity.map(Environment::from_polarity))
    }

    pub fn event_text(&self) -> String {
        self.tokens[self.event_span.start..self.event_span.end.min(self.tokens.len())].join(" ")
    }
}

pub(crate) fn mean(xs: &[f64]) -> Option<f64> {
    if xs.is_empty() {
        None
    } else {
        Some(xs.iter().sum::<f64>() / xs.len() as f64)
    }
}
