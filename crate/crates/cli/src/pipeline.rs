use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context as _, Result};
use clap::Args;
use serde::Serialize;

use factkit::analysis::{evaluate, evaluation_items, signature_alignment, PredictionSet};
use factkit::harmonizer::{
    attach_parses, load_cb, load_megaveridicality, load_rp, load_unified, read_conllu, stratified_split,
    ExclusionList, FilterReport, SpanBranch, SplitSpec, StratifyKey,
};
use factkit::io::{read_jsonl, write_jsonl};
use factkit::oracle::{
    build_index, expected_inference_batch, ingest_rule_predictions, Feature, FeatureSchema, OracleOutcome,
    OracleRow, OracleSource,
};
use factkit::signature::{predict_batch, EnvironmentPolicy, SignatureLexicon, SignatureOutcome};
use factkit::{Dataset, EventRecord, Split};

use crate::run::Run;
use crate::{Context, ItemsAndPreds};

pub fn parse_dataset(s: &str) -> Result<Dataset> {
    s.parse().map_err(|e: factkit::Error| anyhow!(e))
}

fn jsonl_bytes<T: Serialize>(values: &[T]) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_jsonl(&mut buf, values)?;
    Ok(buf)
}

/// Reads unified items from one or more files, optionally keeping one dataset.
pub fn load_items(run: &mut Run, paths: &[PathBuf], dataset: Option<&str>) -> Result<Vec<EventRecord>> {
    let keep = dataset.map(parse_dataset).transpose()?;
    let mut items = Vec::new();
    let mut seen = HashSet::new();
    for p in paths {
        let recs: Vec<EventRecord> = read_jsonl(&run.input(p))?;
        for r in recs {
            r.validate().with_context(|| format!("{}: item {}", p.display(), r.id))?;
            if !seen.insert(r.id.clone()) {
                bail!("{}: duplicate id `{}`", p.display(), r.id);
            }
            if keep.is_none_or(|d| d == r.dataset) {
                items.push(r);
            }
        }
    }
    run.option("in", paths);
    run.option("dataset", keep);
    Ok(items)
}

pub fn load_preds(run: &mut Run, paths: &[PathBuf]) -> Result<Vec<PredictionSet>> {
    run.option("preds", paths);
    paths
        .iter()
        .map(|p| PredictionSet::load(&run.input(p)).map_err(Into::into))
        .collect()
}

pub fn load_items_and_preds(run: &mut Run, a: &ItemsAndPreds) -> Result<(Vec<EventRecord>, Vec<PredictionSet>)> {
    let items = load_items(run, &a.input, a.dataset.as_deref())?;
    let sets = load_preds(run, &a.preds)?;
    Ok((items, sets))
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// mv, cb, rp, factbank, meantime, uw or udsih2.
    #[arg(long)]
    pub dataset: String,
    /// Native corpus file; defaults to the config's `corpora.<dataset>`.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// CoNLL-U parses for span resolution (CB and RP).
    #[arg(long)]
    pub parses: Option<PathBuf>,
    /// RP single-span exclusion list, one id or source key per line.
    #[arg(long)]
    pub exclusions: Option<PathBuf>,
    /// Unified JSON Lines output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn config_path(map: &BTreeMap<String, PathBuf>, dataset: Dataset, raw: &str) -> Option<PathBuf> {
    map.get(raw)
        .or_else(|| map.get(dataset.id_prefix()))
        .or_else(|| map.iter().find(|(k, _)| k.parse::<Dataset>().ok() == Some(dataset)).map(|(_, v)| v))
        .cloned()
}

#[derive(Serialize)]
struct SpanReview<'a> {
    id: &'a str,
    event: String,
    #[serde(flatten)]
    branch: &'a SpanBranch,
}

pub fn ingest(ctx: &Context, a: &IngestArgs) -> Result<Run> {
    let dataset = parse_dataset(&a.dataset)?;
    let out = a.out.as_deref().map(|p| ctx.resolve_out(p)).ok_or_else(|| anyhow!("--out is required"))?;
    let mut run = Run::new("ingest", Some(out.clone()));
    let input = a
        .input
        .clone()
        .or_else(|| config_path(&ctx.config.corpora, dataset, &a.dataset))
        .ok_or_else(|| anyhow!("no input: pass --input or set corpora.{} in the config", a.dataset))?;
    let parses = a.parses.clone().or_else(|| config_path(&ctx.config.parses, dataset, &a.dataset));
    run.option("dataset", dataset);
    run.input(&input);

    let (records, report) = match dataset {
        Dataset::MV => {
            let recs = load_megaveridicality(&input)?;
            let n = recs.len();
            (recs, FilterReport { rule: "none".into(), input: n, kept: n, ..Default::default() })
        }
        Dataset::CB => load_cb(&input)?,
        Dataset::RP => {
            let list = match a.exclusions.clone().or_else(|| ctx.config.rp_exclusions.clone()) {
                Some(p) => {
                    run.option("exclusions", &p);
                    ExclusionList::from_file(&run.input(&p))?
                }
                None => ExclusionList::bundled(),
            };
            if list.is_empty() {
                run.warn("RP single-span exclusion list is empty; pass --exclusions to apply it");
            }
            load_rp(&input, &list)?
        }
        _ => {
            let recs = load_unified(&input, dataset)?;
            let n = recs.len();
            (recs, FilterReport { rule: "none".into(), input: n, kept: n, ..Default::default() })
        }
    };
    for w in &report.warnings {
        run.warn(w.clone());
    }

    let records = match parses {
        Some(p) => {
            if !matches!(dataset, Dataset::CB | Dataset::RP) {
                bail!("--parses applies to CB and RP only");
            }
            run.option("parses", &p);
            let parsed = read_conllu(&run.input(&p))?;
            let attached = attach_parses(&records, &parsed)?;
            for w in attached.warnings {
                run.warn(w);
            }
            let by_id: BTreeMap<&str, &EventRecord> =
                attached.records.iter().map(|r| (r.id.as_str(), r)).collect();
            let review: Vec<SpanReview> = attached
                .branches
                .iter()
                .map(|(id, branch)| SpanReview { id, event: by_id[id.as_str()].event_text(), branch })
                .collect();
            run.output(crate::run::sidecar_path(&out, ".spans.jsonl"), jsonl_bytes(&review)?);
            attached.records
        }
        None => records,
    };
    for r in &records {
        r.validate()?;
    }
    eprintln!(
        "{}: {} records ({} read, {} removed)",
        dataset,
        records.len(),
        report.input,
        report.removed
    );
    run.output(crate::run::sidecar_path(&out, ".filter.json"), {
        let mut b = serde_json::to_vec_pretty(&report)?;
        b.push(b'\n');
        b
    });
    run.output(out, jsonl_bytes(&records)?);
    Ok(run)
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// train,dev,test proportions summing to 1.
    #[arg(long, value_delimiter = ',')]
    pub ratios: Option<Vec<f64>>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// `verb` or `none`.
    #[arg(long)]
    pub stratify: Option<String>,
    /// Output JSON Lines; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn split(ctx: &Context, a: &SplitArgs) -> Result<Run> {
    let out = a.out.as_deref().map(|p| ctx.resolve_out(p));
    let mut run = Run::new("split", out.clone());
    let items = load_items(&mut run, std::slice::from_ref(&a.input), None)?;
    let ratios: Vec<f64> = a
        .ratios
        .clone()
        .or_else(|| ctx.config.split.ratios.map(|r| r.to_vec()))
        .ok_or_else(|| anyhow!("no ratios: pass --ratios or set split.ratios in the config"))?;
    let ratios: [f64; 3] = ratios.try_into().map_err(|_| anyhow!("--ratios takes three values"))?;
    let seed = a.seed.or(ctx.config.split.seed).or(ctx.config.seed).unwrap_or(0);
    let stratify: StratifyKey = a
        .stratify
        .as_deref()
        .or(ctx.config.split.stratify.as_deref())
        .unwrap_or("none")
        .parse()?;
    let spec = SplitSpec::new(ratios, seed, stratify)?;
    run.option("split", &spec);
    let split = stratified_split(&items, &spec)?;
    let count = |s: Split| split.iter().filter(|r| r.split == s).count();
    eprintln!(
        "train {} / dev {} / test {}",
        count(Split::Train),
        count(Split::Dev),
        count(Split::Test)
    );
    let bytes = jsonl_bytes(&split)?;
    match out {
        Some(p) => run.output(p, bytes),
        None => print!("{}", String::from_utf8(bytes)?),
    }
    Ok(run)
}

#[derive(Debug, Args)]
pub struct SigPredictArgs {
    #[arg(long = "in", required = true, num_args = 1..)]
    pub input: Vec<PathBuf>,
    /// Signature lexicon TSV; the bundled starter lexicon by default.
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
    /// `uniform` or `negation-only`.
    #[arg(long)]
    pub policy: Option<String>,
    #[arg(long)]
    pub dataset: Option<String>,
    /// Also fit an ordered logit of signature category on the gold score.
    #[arg(long)]
    pub ordinal: bool,
    /// Also write covered items as an `id<TAB>score` prediction file.
    #[arg(long)]
    pub tsv: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Serialize)]
struct SigRow<'a> {
    id: &'a str,
    dataset: Dataset,
    #[serde(flatten)]
    outcome: &'a SignatureOutcome,
}

pub fn sig_predict(ctx: &Context, a: &SigPredictArgs) -> Result<Run> {
    let out = a.out.as_deref().map(|p| ctx.resolve_out(p));
    let mut run = Run::new("sig-predict", out.clone());
    let items = load_items(&mut run, &a.input, a.dataset.as_deref())?;
    let lex = match a.lexicon.clone().or_else(|| ctx.config.lexicon.clone()) {
        Some(p) => {
            run.option("lexicon", &p);
            SignatureLexicon::load(&run.input(&p))?
        }
        None => {
            run.option("lexicon", "bundled");
            SignatureLexicon::starter()
        }
    };
    let policy: EnvironmentPolicy = a
        .policy
        .as_deref()
        .or(ctx.config.policy.as_deref())
        .unwrap_or("uniform")
        .parse()?;
    run.option("policy", policy);

    let (usable, skipped): (Vec<EventRecord>, Vec<EventRecord>) = items
        .into_iter()
        .partition(|it| it.verb.is_some() && (it.frame.is_some() || it.effective_environment().is_some()));
    if !skipped.is_empty() {
        run.warn(format!("{} item(s) without verb/frame features skipped", skipped.len()));
    }
    let outcomes = predict_batch(&usable, &lex, policy, ctx.exec)?;
    let covered = outcomes.iter().filter(|o| o.score().is_some()).count();
    println!("lexicon coverage: {covered} of {} items", usable.len());

    let rows: Vec<SigRow> = usable
        .iter()
        .zip(&outcomes)
        .map(|(it, o)| SigRow { id: &it.id, dataset: it.dataset, outcome: o })
        .collect();
    let bytes = jsonl_bytes(&rows)?;
    match &out {
        Some(p) => run.output(p.clone(), bytes),
        None => print!("{}", String::from_utf8(bytes)?),
    }
    if let Some(tsv) = &a.tsv {
        let mut text = String::new();
        for (it, o) in usable.iter().zip(&outcomes) {
            if let Some(s) = o.score() {
                text.push_str(&format!("{}\t{}\n", it.id, s.value()));
            }
        }
        run.output(ctx.resolve_out(tsv), text.into_bytes());
    }
    if a.ordinal {
        run.option("ordinal", true);
        let fit = signature_alignment(&usable, &lex, policy, ctx.thresholds()?, ctx.exec)?;
        let m = &fit.model;
        println!(
            "ordered logit on {} covered items: coefficient {:.3}, thresholds ({:.3}, {:.3}), converged {}",
            fit.covered, m.beta, m.thresholds[0], m.thresholds[1], m.converged
        );
        if let Some(se) = m.std_errors {
            println!("standard errors: coefficient {:.3}, first threshold {:.3}", se[0], se[1]);
        }
        println!(
            "category agreement {:.1}% vs constant baseline {:.1}%",
            100.0 * fit.agreement,
            100.0 * fit.baseline
        );
        if !m.converged {
            run.warn("ordered logit did not converge");
        }
        let path = out.as_ref().map(|p| crate::run::sidecar_path(p, ".ordinal.json"));
        run.json_output(path, &fit)?;
    }
    Ok(run)
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    /// Unified items with train and test splits.
    #[arg(long = "in", required = true, num_args = 1..)]
    pub input: Vec<PathBuf>,
    /// Rule-based predictions (`id<TAB>score`) for corpora without verb features.
    #[arg(long, num_args = 1..)]
    pub rule_predictions: Vec<PathBuf>,
    #[arg(long)]
    pub dataset: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn schema_for(ctx: &Context, dataset: Dataset) -> Result<Option<FeatureSchema>> {
    let configured = ctx
        .config
        .schema
        .iter()
        .find(|(k, _)| k.parse::<Dataset>().ok() == Some(dataset))
        .map(|(_, v)| v);
    match configured {
        Some(tiers) => {
            let tiers = tiers
                .iter()
                .map(|t| t.iter().map(|f| f.parse::<Feature>()).collect::<Result<Vec<_>, _>>())
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Some(FeatureSchema::new(tiers)?))
        }
        None => Ok(FeatureSchema::for_dataset(dataset)),
    }
}

pub fn oracle(ctx: &Context, a: &OracleArgs) -> Result<Run> {
    let out = a.out.as_deref().map(|p| ctx.resolve_out(p));
    let mut run = Run::new("oracle", out.clone());
    let items = load_items(&mut run, &a.input, a.dataset.as_deref())?;
    run.option("rule_predictions", &a.rule_predictions);
    run.option("schema", &ctx.config.schema);

    let mut rule_scores = BTreeMap::new();
    for p in &a.rule_predictions {
        let r = ingest_rule_predictions(&run.input(p), &items)?;
        for w in r.warnings {
            run.warn(w);
        }
        rule_scores.extend(r.scores);
    }

    let mut rows = Vec::new();
    for (dataset, (_, targets)) in evaluation_items(&items) {
        match schema_for(ctx, dataset)? {
            Some(schema) => {
                let train: Vec<EventRecord> = items
                    .iter()
                    .filter(|it| it.dataset == dataset && it.split == Split::Train)
                    .cloned()
                    .collect();
                if train.is_empty() {
                    bail!("{dataset}: feature matching needs training items; run `split` first");
                }
                let index = build_index(&train, &schema)?;
                let targets: Vec<EventRecord> = targets.into_iter().cloned().collect();
                let outcomes = expected_inference_batch(&targets, &index, ctx.exec)?;
                let mut unmatched = Vec::new();
                for (it, o) in targets.iter().zip(outcomes) {
                    match o {
                        OracleOutcome::Matched(e) => rows.push(OracleRow {
                            id: it.id.clone(),
                            dataset,
                            score: e.score,
                            tier: Some(e.tier),
                            support: Some(e.support),
                            source: OracleSource::FeatureMatch,
                        }),
                        OracleOutcome::NoMatch => unmatched.push(it.id.clone()),
                    }
                }
                if !unmatched.is_empty() {
                    run.warn(format!(
                        "{dataset}: {} item(s) without any feature match: {}",
                        unmatched.len(),
                        unmatched.iter().take(10).cloned().collect::<Vec<_>>().join(", ")
                    ));
                }
                eprintln!("{dataset}: {} expected inferences from {} training items", targets.len() - unmatched.len(), train.len());
            }
            None if dataset == Dataset::UDSIH2 => {
                run.warn(format!("{dataset}: no expected inference defined; skipped"));
            }
            None => {
                let mut n = 0;
                for it in targets {
                    if let Some(s) = rule_scores.get(&it.id) {
                        rows.push(OracleRow {
                            id: it.id.clone(),
                            dataset,
                            score: *s,
                            tier: None,
                            support: None,
                            source: OracleSource::Rule,
                        });
                        n += 1;
                    }
                }
                if n == 0 {
                    run.warn(format!("{dataset}: no rule-based predictions supplied"));
                }
                eprintln!("{dataset}: {n} rule-based expected inferences");
            }
        }
    }
    let bytes = jsonl_bytes(&rows)?;
    match out {
        Some(p) => run.output(p, bytes),
        None => print!("{}", String::from_utf8(bytes)?),
    }
    Ok(run)
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub data: ItemsAndPreds,
    /// JSON report.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn eval(ctx: &Context, a: &EvalArgs) -> Result<Run> {
    let out = a.out.as_deref().map(|p| ctx.resolve_out(p));
    let mut run = Run::new("eval", out.clone());
    let (items, sets) = load_items_and_preds(&mut run, &a.data)?;
    let report = evaluate(&items, &sets)?;
    print!("{}", report.table());
    for d in &report.datasets {
        if d.pearson.is_none() {
            run.warn(format!("{}: Pearson r undefined (constant predictions or labels)", d.dataset));
        }
    }
    if let Some(p) = out {
        run.json_output(Some(p), &report)?;
    }
    Ok(run)
}

pub fn exists(p: &Path) -> Result<()> {
    if p.exists() {
        Ok(())
    } else {
        bail!("{} does not exist", p.display())
    }
}
