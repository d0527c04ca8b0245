#![allow(dead_code)]

use factkit::{Dataset, Environment, EventRecord, FactualityScore, Frame, Polarity, Span, Split};

pub fn record(id: &str, dataset: Dataset, gold: f64) -> EventRecord {
    EventRecord {
        id: id.to_string(),
        dataset,
        split: Split::Unassigned,
        sentence: "it happened".into(),
        tokens: vec!["it".into(), "happened".into()],
        event_span: Span::single(1),
        gold: FactualityScore::new(gold).unwrap(),
        annotations: vec![],
        verb: None,
        frame: None,
        polarity: None,
        environment: None,
        genre: None,
    }
}

pub fn embedded(
    id: &str,
    dataset: Dataset,
    verb: &str,
    frame: Frame,
    polarity: Polarity,
    gold: f64,
) -> EventRecord {
    EventRecord {
        verb: Some(verb.to_string()),
        frame: Some(frame),
        polarity: Some(polarity),
        environment: Some(Environment::from_polarity(polarity)),
        ..record(id, dataset, gold)
    }
}

pub fn fixture(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}
