use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{RankedError, TextTable};
use crate::error::{Error, Result};
use crate::io::read_to_string;
use crate::model::Dataset;

/// Why a model's prediction diverged from the gold label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCategory {
    PriorProbability,
    ContextSuggests,
    QUD,
    TenseAspect,
    SubjectAuthority,
    SubjectComplementInteraction,
    LexicalInference,
    AnnotationError,
}

impl ErrorCategory {
    pub const ALL: [ErrorCategory; 8] = [
        ErrorCategory::PriorProbability,
        ErrorCategory::ContextSuggests,
        ErrorCategory::QUD,
        ErrorCategory::TenseAspect,
        ErrorCategory::SubjectAuthority,
        ErrorCategory::SubjectComplementInteraction,
        ErrorCategory::LexicalInference,
        ErrorCategory::AnnotationError,
    ];

    pub fn label(self) -> &'static str {
        match self {
            ErrorCategory::PriorProbability => "Prior probability of the event",
            ErrorCategory::ContextSuggests => "Context suggests (non)factuality",
            ErrorCategory::QUD => "Question Under Discussion (QUD)",
            ErrorCategory::TenseAspect => "Tense/aspect",
            ErrorCategory::SubjectAuthority => "Subject authority/credibility",
            ErrorCategory::SubjectComplementInteraction => "Subject-complement interaction",
            ErrorCategory::LexicalInference => "Lexical inference",
            ErrorCategory::AnnotationError => "Annotation error",
        }
    }
}

impl fmt::Display for ErrorCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for ErrorCategory {
    type Err = Error;

    /// Accepts snake_case, CamelCase or the full label, ignoring case and
    /// punctuation.
    fn from_str(s: &str) -> Result<Self> {
        let norm: String = s.chars().filter(|c| c.is_alphanumeric()).collect::<String>().to_lowercase();
        let c = match norm.as_str() {
            "priorprobability" | "priorprobabilityoftheevent" | "prior" => ErrorCategory::PriorProbability,
            "contextsuggests" | "contextsuggestsnonfactuality" | "context" => ErrorCategory::ContextSuggests,
            "qud" | "questionunderdiscussion" | "questionunderdiscussionqud" => ErrorCategory::QUD,
            "tenseaspect" => ErrorCategory::TenseAspect,
            "subjectauthority" | "subjectauthoritycredibility" => ErrorCategory::SubjectAuthority,
            "subjectcomplementinteraction" => ErrorCategory::SubjectComplementInteraction,
            "lexicalinference" | "lexical" => ErrorCategory::LexicalInference,
            "annotationerror" => ErrorCategory::AnnotationError,
            _ => return Err(Error::InvalidArgument(format!("unknown error category `{}`", s.trim()))),
        };
        Ok(c)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryAnnotation {
    pub id: String,
    pub category: ErrorCategory,
    pub annotator: String,
}

/// Reads `id <TAB> category [<TAB> annotator]` rows. A missing annotator
/// column is recorded as the empty string.
pub fn load_category_annotations(path: &Path) -> Result<Vec<CategoryAnnotation>> {
    let text = read_to_string(path)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let f: Vec<&str> = line.split('\t').map(str::trim).collect();
        if !(2..=3).contains(&f.len()) {
            return Err(Error::parse(path, i + 1, "expected `id<TAB>category<TAB>annotator`"));
        }
        let category = f[1].parse().map_err(|e: Error| Error::parse(path, i + 1, e.to_string()))?;
        out.push(CategoryAnnotation {
            id: f[0].to_string(),
            category,
            annotator: f.get(2).copied().unwrap_or("").to_string(),
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryCount {
    pub category: ErrorCategory,
    pub count: usize,
    pub percent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Agreement {
    /// Ids labelled by at least two annotators.
    pub shared: usize,
    /// Of those, ids on which every annotator chose the same category.
    pub agreed: usize,
    pub percent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetCategories {
    pub dataset: Dataset,
    pub ranked: usize,
    pub categorized: usize,
    pub counts: Vec<CategoryCount>,
    pub agreement: Option<Agreement>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryReport {
    pub datasets: Vec<DatasetCategories>,
    pub warnings: Vec<String>,
}

impl CategoryReport {
    pub fn table(&self) -> TextTable {
        let mut headers = vec!["category".to_string()];
        for d in &self.datasets {
            headers.push(format!("{} #", d.dataset));
            headers.push(format!("{} %", d.dataset));
        }
        let mut t = TextTable::new(headers);
        for (k, c) in ErrorCategory::ALL.iter().enumerate() {
            let mut row = vec![c.label().to_string()];
            for d in &self.datasets {
                let cc = &d.counts[k];
                if cc.count == 0 {
                    row.extend([String::new(), String::new()]);
                } else {
                    row.extend([cc.count.to_string(), format!("{:.1}", cc.percent)]);
                }
            }
            t.push(row);
        }
        let mut total = vec!["Total items categorized".to_string()];
        for d in &self.datasets {
            total.extend([d.categorized.to_string(), String::new()]);
        }
        t.push(total);
        t
    }
}

/// Counts error categories over ranked items, per dataset.
///
/// An id's category is taken from its first annotation in input order;
/// further annotators only enter the agreement figure. Annotations of ids
/// outside the ranking are reported as warnings and ignored.
pub fn error_category_report(ranked: &[RankedError], annotations: &[CategoryAnnotation]) -> CategoryReport {
    let dataset_of: HashMap<&str, Dataset> = ranked.iter().map(|r| (r.id.as_str(), r.dataset)).collect();
    let mut ranked_per: BTreeMap<Dataset, usize> = BTreeMap::new();
    for r in ranked {
        *ranked_per.entry(r.dataset).or_default() += 1;
    }

    let mut warnings = Vec::new();
    // id -> (annotator, category) in input order, one entry per annotator
    let mut by_id: BTreeMap<&str, Vec<(&str, ErrorCategory)>> = BTreeMap::new();
    for a in annotations {
        if !dataset_of.contains_key(a.id.as_str()) {
            warnings.push(format!("annotation for unranked id `{}` ignored", a.id));
            continue;
        }
        let v = by_id.entry(a.id.as_str()).or_default();
        if v.iter().any(|(who, _)| *who == a.annotator) {
            warnings.push(format!(
                "repeated annotation of `{}` by annotator `{}` ignored",
                a.id, a.annotator
            ));
            continue;
        }
        v.push((a.annotator.as_str(), a.category));
    }

    let mut datasets = Vec::new();
    for (&dataset, &n_ranked) in &ranked_per {
        let mut counts = [0usize; 8];
        let (mut shared, mut agreed) = (0, 0);
        let mut categorized = 0;
        for (id, labels) in &by_id {
            if dataset_of[id] != dataset {
                continue;
            }
            categorized += 1;
            let first = labels[0].1;
            counts[ErrorCategory::ALL.iter().position(|c| *c == first).expect("closed set")] += 1;
            if labels.len() >= 2 {
                shared += 1;
                if labels.iter().all(|(_, c)| *c == first) {
                    agreed += 1;
                }
            }
        }
        if categorized < n_ranked {
            warnings.push(format!(
                "{dataset}: {} of {n_ranked} ranked item(s) have no category",
                n_ranked - categorized
            ));
        }
        let pct = |k: usize, n: usize| if n == 0 { 0.0 } else { 100.0 * k as f64 / n as f64 };
        datasets.push(DatasetCategories {
            dataset,
            ranked: n_ranked,
            categorized,
            counts: ErrorCategory::ALL
                .iter()
                .zip(counts)
                .map(|(&category, count)| CategoryCount {
                    category,
                    count,
                    percent: pct(count, categorized),
                })
                .collect(),
            agreement: (shared > 0).then(|| Agreement {
                shared,
                agreed,
                percent: pct(agreed, shared),
            }),
        });
    }
    CategoryReport { datasets, warnings }
}
