use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{read_id_scores, source_key};
use crate::model::{EventRecord, FactualityScore};

/// Scores from one external model run, keyed by item id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionSet {
    pub model_name: String,
    pub entries: BTreeMap<String, FactualityScore>,
    #[serde(default)]
    pub provenance: String,
}

impl PredictionSet {
    pub fn new(
        model_name: impl Into<String>,
        provenance: impl Into<String>,
        entries: impl IntoIterator<Item = (String, f64)>,
    ) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (id, score) in entries {
            let score = FactualityScore::new(score)?;
            if map.insert(id.clone(), score).is_some() {
                return Err(Error::DuplicateId(id));
            }
        }
        Ok(PredictionSet {
            model_name: model_name.into(),
            entries: map,
            provenance: provenance.into(),
        })
    }

    /// Reads an `id <TAB> score` file. The model name is the file stem.
    pub fn load(path: &Path) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (line, id, score) in read_id_scores(path)? {
            let score = FactualityScore::new(score).map_err(|e| Error::parse(path, line, e.to_string()))?;
            if map.insert(id.clone(), score).is_some() {
                return Err(Error::parse(path, line, format!("duplicate id `{id}`")));
            }
        }
        Ok(PredictionSet {
            model_name: source_key(path),
            entries: map,
            provenance: path.display().to_string(),
        })
    }

    pub fn get(&self, id: &str) -> Option<f64> {
        self.entries.get(id).map(|s| s.value())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Per-item mean over the sets that contain each id.
    pub fn average(sets: &[PredictionSet]) -> Result<PredictionSet> {
        match sets {
            [] => Err(Error::InvalidArgument("no prediction sets given".into())),
            [one] => Ok(one.clone()),
            _ => {
                let mut acc: BTreeMap<&str, (f64, usize)> = BTreeMap::new();
                for set in sets {
                    for (id, s) in &set.entries {
                        let e = acc.entry(id).or_insert((0.0, 0));
                        e.0 += s.value();
                        e.1 += 1;
                    }
                }
                let entries = acc
                    .into_iter()
                    .map(|(id, (sum, n))| {
                        // the mean of in-range values is in range up to rounding
                        let v = (sum / n as f64).clamp(-3.0, 3.0);
                        (id.to_string(), FactualityScore::new(v).expect("clamped"))
                    })
                    .collect();
                let names: Vec<&str> = sets.iter().map(|s| s.model_name.as_str()).collect();
                Ok(PredictionSet {
                    model_name: format!("mean({})", names.join(",")),
                    entries,
                    provenance: format!("per-item mean of {} prediction sets", sets.len()),
                })
            }
        }
    }

    /// Predictions for `items` in order, or the ids that have none.
    pub fn aligned(&self, items: &[&EventRecord]) -> Result<Vec<f64>> {
        let mut missing = Vec::new();
        let out: Vec<f64> = items
            .iter()
            .map(|it| {
                self.get(&it.id).unwrap_or_else(|| {
                    missing.push(it.id.clone());
                    f64::NAN
                })
            })
            .collect();
        if missing.is_empty() {
            Ok(out)
        } else {
            Err(Error::MissingPredictions { ids: missing })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn averaging_uses_only_sets_with_the_id() {
        let a = PredictionSet::new("a", "", [("x".to_string(), 1.0), ("y".to_string(), 3.0)]).unwrap();
        let b = PredictionSet::new("b", "", [("x".to_string(), 2.0)]).unwrap();
        let c = PredictionSet::new("c", "", [("x".to_string(), 3.0)]).unwrap();
        let m = PredictionSet::average(&[a, b, c]).unwrap();
        assert_eq!(m.get("x"), Some(2.0));
        assert_eq!(m.get("y"), Some(3.0));
    }

    #[test]
    fn load_rejects_bad_rows() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "a\t1.0\na\t2.0").unwrap();
        assert!(matches!(PredictionSet::load(f.path()), Err(Error::Parse { line: 2, .. })));

        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "a\t3.5").unwrap();
        assert!(PredictionSet::load(f.path()).is_err());

        assert!(PredictionSet::new("m", "", [("a".to_string(), 1.0), ("a".to_string(), 1.0)]).is_err());
    }
}
