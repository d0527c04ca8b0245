//! Run configuration read from a TOML file. Command-line flags take
//! precedence over every value here.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Corpus input per dataset name (`mv`, `cb`, `rp`, `factbank`, ...).
    #[serde(default)]
    pub corpora: BTreeMap<String, PathBuf>,
    /// CoNLL-U parses per dataset name.
    #[serde(default)]
    pub parses: BTreeMap<String, PathBuf>,
    pub rp_exclusions: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    pub policy: Option<String>,
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub thresholds: Option<ThresholdConfig>,
    #[serde(default)]
    pub split: SplitConfig,
    /// Backoff tiers per dataset name, finest first, e.g.
    /// `cb = [["verb", "environment"], ["verb"], ["environment"]]`.
    #[serde(default)]
    pub schema: BTreeMap<String, Vec<Vec<String>>>,
    #[serde(default)]
    pub analysis: AnalysisConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdConfig {
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitConfig {
    pub ratios: Option<[f64; 3]>,
    pub seed: Option<u64>,
    pub stratify: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    pub top_frac: Option<f64>,
    pub variance: Option<String>,
    pub factive_list: Option<PathBuf>,
    pub neg_raising_list: Option<PathBuf>,
}

impl RunConfig {
    /// Reads and validates a config file. Relative paths inside it are
    /// resolved against the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg: RunConfig =
            toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.rebase(base);
        cfg.validate()?;
        Ok(cfg)
    }

    fn rebase(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        self.corpora.values_mut().for_each(fix);
        self.parses.values_mut().for_each(fix);
        for p in [
            &mut self.rp_exclusions,
            &mut self.lexicon,
            &mut self.analysis.factive_list,
            &mut self.analysis.neg_raising_list,
        ]
        .into_iter()
        .flatten()
        {
            fix(p);
        }
        if let Some(p) = &mut self.out_dir {
            fix(p);
        }
    }

    /// Every referenced input path must exist.
    pub fn validate(&self) -> Result<()> {
        let inputs = self
            .corpora
            .values()
            .chain(self.parses.values())
            .chain(self.rp_exclusions.iter())
            .chain(self.lexicon.iter())
            .chain(self.analysis.factive_list.iter())
            .chain(self.analysis.neg_raising_list.iter());
        for p in inputs {
            if !p.exists() {
                bail!("config references missing path {}", p.display());
            }
        }
        if let Some(t) = self.thresholds {
            if t.lo >= t.hi {
                bail!("config thresholds need lo < hi, got {} and {}", t.lo, t.hi);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn parses_and_rebases() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("cb.csv"), "x").unwrap();
        let path = dir.path().join("run.toml");
        let mut f = std::fs::File::create(&path).unwrap();
        writeln!(
            f,
            "seed = 7\npolicy = \"negation-only\"\n[corpora]\ncb = \"cb.csv\"\n[split]\nratios = [0.5, 0.1, 0.4]\n\
             [schema]\ncb = [[\"verb\"], [\"environment\"]]"
        )
        .unwrap();
        let cfg = RunConfig::load(&path).unwrap();
        assert_eq!(cfg.seed, Some(7));
        assert_eq!(cfg.corpora["cb"], dir.path().join("cb.csv"));
        assert_eq!(cfg.split.ratios, Some([0.5, 0.1, 0.4]));
        assert_eq!(cfg.schema["cb"].len(), 2);
    }

    #[test]
    fn rejects_missing_paths_and_unknown_keys() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(&path, "[corpora]\ncb = \"nope.csv\"\n").unwrap();
        assert!(RunConfig::load(&path).unwrap_err().to_string().contains("nope.csv"));
        std::fs::write(&path, "sed = 7\n").unwrap();
        assert!(RunConfig::load(&path).is_err());
    }
}
