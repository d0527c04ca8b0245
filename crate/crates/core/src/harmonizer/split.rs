use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{EventRecord, Split};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum StratifyKey {
    Verb,
    #[default]
    None,
}

impl std::str::FromStr for StratifyKey {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "verb" => Ok(StratifyKey::Verb),
            "none" => Ok(StratifyKey::None),
            other => Err(Error::InvalidArgument(format!("unknown stratify key `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    /// `(train, dev, test)`
    pub ratios: [f64; 3],
    pub seed: u64,
    #[serde(default)]
    pub stratify: StratifyKey,
}

impl SplitSpec {
    pub fn new(ratios: [f64; 3], seed: u64, stratify: StratifyKey) -> Result<Self> {
        let spec = SplitSpec {
            ratios,
            seed,
            stratify,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.ratios.iter().any(|r| !r.is_finite() || *r < 0.0) {
            return Err(Error::InvalidArgument(format!(
                "split ratios must be nonnegative, got {:?}",
                self.ratios
            )));
        }
        let sum: f64 = self.ratios.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "split ratios must sum to 1, got {sum}"
            )));
        }
        Ok(())
    }
}

/// Splits `n` items by `ratios` with largest-remainder rounding.
///
/// Remainder ties go to the earlier split (train before dev before test).
pub fn allocate_largest_remainder(n: usize, ratios: [f64; 3]) -> [usize; 3] {
    let quotas = ratios.map(|r| {
        let q = r * n as f64;
        // snap values that are integers up to rounding noise
        if (q - q.round()).abs() < 1e-9 {
            q.round()
        } else {
            q
        }
    });
    let mut counts = quotas.map(|q| q.floor() as usize);
    let assigned: usize = counts.iter().sum();
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| {
        let fa = quotas[a] - quotas[a].floor();
        let fb = quotas[b] - quotas[b].floor();
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    for &k in order.iter().cycle().take(n.saturating_sub(assigned)) {
        counts[k] += 1;
    }
    counts
}

fn fnv1a(s: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in s.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Assigns train/dev/test within each stratum.
///
/// Each stratum is sorted by id, shuffled with a generator seeded from the spec
/// seed and the stratum key, and cut by [`allocate_largest_remainder`]. The
/// output keeps the input order; only `split` changes.
pub fn stratified_split(items: &[EventRecord], spec: &SplitSpec) -> Result<Vec<EventRecord>> {
    spec.validate()?;
    let mut groups: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    let mut missing = Vec::new();
    for (i, item) in items.iter().enumerate() {
        let key = match spec.stratify {
            StratifyKey::None => String::new(),
            StratifyKey::Verb => match &item.verb {
                Some(v) => v.to_lowercase(),
                None => {
                    missing.push(item.id.clone());
                    continue;
                }
            },
        };
        groups.entry(key).or_default().push(i);
    }
    if !missing.is_empty() {
        return Err(Error::MissingFeature {
            what: "verb (required for verb stratification)".into(),
            ids: missing,
        });
    }

    let mut out = items.to_vec();
    for (key, mut members) in groups {
        members.sort_by(|&a, &b| items[a].id.cmp(&items[b].id));
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed ^ fnv1a(&key));
        members.shuffle(&mut rng);
        let [train, dev, _] = allocate_largest_remainder(members.len(), spec.ratios);
        for (pos, &i) in members.iter().enumerate() {
            out[i].split = if pos < train {
                Split::Train
            } else if pos < train + dev {
                Split::Dev
            } else {
                Split::Test
            };
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Dataset, FactualityScore, Span};
    use proptest::prelude::*;

    /// Brute force: the allocation minimizing total absolute deviation from the
    /// quotas among all (a, b, n-a-b), ties broken towards earlier splits.
    fn brute_force(n: usize, r: [f64; 3]) -> [usize; 3] {
        let mut best = None;
        for a in 0..=n {
            for b in 0..=(n - a) {
                let c = [a, b, n - a - b];
                // only allocations within one of every quota are admissible
                if (0..3).any(|k| (c[k] as f64 - r[k] * n as f64).abs() >= 1.0 + 1e-9) {
                    continue;
                }
                let dev: f64 = (0..3).map(|k| (c[k] as f64 - r[k] * n as f64).abs()).sum();
                match best {
                    Some((d, _)) if d <= dev + 1e-12 => {}
                    _ => best = Some((dev, c)),
                }
            }
        }
        best.unwrap().1
    }

    #[test]
    fn ten_items_hand_enumerated() {
        assert_eq!(brute_force(10, [0.5, 0.14, 0.36]), [5, 1, 4]);
        assert_eq!(allocate_largest_remainder(10, [0.5, 0.14, 0.36]), [5, 1, 4]);
        assert_eq!(allocate_largest_remainder(7, [1.0, 0.0, 0.0]), [7, 0, 0]);
        assert_eq!(allocate_largest_remainder(0, [0.4, 0.2, 0.4]), [0, 0, 0]);
    }

    proptest! {
        #[test]
        fn allocation_matches_brute_force(n in 1usize..40, a in 0u32..=100, b in 0u32..=100) {
            prop_assume!(a + b <= 100);
            let r = [a as f64 / 100.0, b as f64 / 100.0, (100 - a - b) as f64 / 100.0];
            let got = allocate_largest_remainder(n, r);
            prop_assert_eq!(got.iter().sum::<usize>(), n);
            for k in 0..3 {
                prop_assert!((got[k] as f64 - r[k] * n as f64).abs() < 1.0 + 1e-9);
            }
            let dev = |c: [usize; 3]| -> f64 {
                (0..3).map(|k| (c[k] as f64 - r[k] * n as f64).abs()).sum()
            };
            prop_assert!((dev(got) - dev(brute_force(n, r))).abs() < 1e-9);
        }
    }

    fn items(verbs: &[(&str, usize)]) -> Vec<EventRecord> {
        let mut out = Vec::new();
        for (v, n) in verbs {
            for _ in 0..*n {
                let i = out.len();
                out.push(EventRecord {
                    id: format!("mv:t:{i}"),
                    dataset: Dataset::MV,
                    split: Split::Unassigned,
                    sentence: "x".into(),
                    tokens: vec!["x".into()],
                    event_span: Span::single(0),
                    gold: FactualityScore::new(0.0).unwrap(),
                    annotations: vec![],
                    verb: Some(v.to_string()),
                    frame: None,
                    polarity: None,
                    environment: None,
                    genre: None,
                });
            }
        }
        out
    }

    #[test]
    fn deterministic_and_stratified() {
        let data = items(&[("know", 10), ("think", 23), ("manage", 7), ("say", 1)]);
        let spec = SplitSpec::new([0.5, 0.14, 0.36], 42, StratifyKey::Verb).unwrap();
        let a = stratified_split(&data, &spec).unwrap();
        let b = stratified_split(&data, &spec).unwrap();
        assert_eq!(a, b);
        let count = |verb: &str, s: Split| {
            a.iter()
                .filter(|r| r.verb.as_deref() == Some(verb) && r.split == s)
                .count()
        };
        assert_eq!(
            [count("know", Split::Train), count("know", Split::Dev), count("know", Split::Test)],
            [5, 1, 4]
        );
        // a different seed permutes members but keeps group sizes
        let c = stratified_split(&data, &SplitSpec { seed: 43, ..spec.clone() }).unwrap();
        assert_ne!(a, c);
        assert_eq!(
            c.iter().filter(|r| r.split == Split::Train).count(),
            a.iter().filter(|r| r.split == Split::Train).count()
        );
    }

    #[test]
    fn degenerate_ratio() {
        let data = items(&[("know", 5)]);
        let spec = SplitSpec::new([1.0, 0.0, 0.0], 1, StratifyKey::None).unwrap();
        let out = stratified_split(&data, &spec).unwrap();
        assert!(out.iter().all(|r| r.split == Split::Train));
    }

    #[test]
    fn missing_verb_lists_ids() {
        let mut data = items(&[("know", 2)]);
        data[1].verb = None;
        let spec = SplitSpec::new([0.5, 0.0, 0.5], 1, StratifyKey::Verb).unwrap();
        match stratified_split(&data, &spec) {
            Err(Error::MissingFeature { ids, .. }) => assert_eq!(ids, vec!["mv:t:1".to_string()]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_ratios() {
        assert!(SplitSpec::new([0.5, 0.5, 0.5], 0, StratifyKey::None).is_err());
        assert!(SplitSpec::new([1.2, -0.2, 0.0], 0, StratifyKey::None).is_err());
    }
}
