//! Event-factuality tooling: corpus harmonization, lexical signature
//! inference, expected-inference oracles, and the statistics used to compare
//! model predictions with them.

pub mod analysis;
pub mod error;
pub mod exec;
pub mod harmonizer;
pub mod io;
pub mod model;
pub mod oracle;
pub mod signature;
pub mod stats;

pub use error::{Error, Result};
pub use exec::Execution;
pub use model::{
    categorize, category_to_score, score_to_category, Dataset, Environment, EventRecord, FactualityCategory,
    FactualityScore, Frame, Polarity, Span, Split, Thresholds,
};
