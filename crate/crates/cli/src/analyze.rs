use std::path::PathBuf;

use anyhow::{anyhow, bail, Result};
use clap::{Args, Subcommand};

use factkit::analysis::{
    error_category_report, evaluation_items, expected_inference_study, expected_scores, group_dispersion,
    load_category_annotations, rank_errors_by_dataset, ranking_table, scatter_export, write_scatter_csv,
    PredictionSet, RankedError, VarianceConvention, VerbClasses,
};
use factkit::io::read_jsonl;
use factkit::oracle::{Feature, OracleRow};
use factkit::stats::MixedConfig;
use factkit::EventRecord;

use crate::pipeline::{exists, load_items_and_preds};
use crate::run::Run;
use crate::{Context, ItemsAndPreds};

#[derive(Debug, Subcommand)]
pub enum AnalyzeCommand {
    /// Regress predictions on expected inferences with a mixed-effects model.
    Expected(ExpectedArgs),
    /// Rank items by absolute error per dataset.
    Errors(ErrorsArgs),
    /// Within-group variance of predictions and gold labels.
    Dispersion(DispersionArgs),
    /// Gold-vs-prediction rows for faceted scatter plots.
    Scatter(ScatterArgs),
    /// Tabulate manual error-category annotations.
    Categories(CategoriesArgs),
}

#[derive(Debug, Args)]
pub struct ExpectedArgs {
    #[command(flatten)]
    pub data: ItemsAndPreds,
    /// Output of `factkit oracle`.
    #[arg(long)]
    pub oracle: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ErrorsArgs {
    #[command(flatten)]
    pub data: ItemsAndPreds,
    /// Share of items to report per dataset.
    #[arg(long)]
    pub top_frac: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DispersionArgs {
    #[command(flatten)]
    pub data: ItemsAndPreds,
    /// Grouping features.
    #[arg(long, value_delimiter = ',', default_value = "verb,frame,polarity")]
    pub keys: Vec<String>,
    /// `sample` or `population`.
    #[arg(long)]
    pub variance: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScatterArgs {
    #[command(flatten)]
    pub data: ItemsAndPreds,
    #[arg(long, value_delimiter = ',', default_value = "verb")]
    pub facet: Vec<String>,
    #[arg(long)]
    pub factive_list: Option<PathBuf>,
    #[arg(long)]
    pub neg_raising_list: Option<PathBuf>,
    /// CSV output; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CategoriesArgs {
    /// Output of `factkit analyze errors`.
    #[arg(long)]
    pub ranked: PathBuf,
    /// `id<TAB>category[<TAB>annotator]` files.
    #[arg(long, required = true, num_args = 1..)]
    pub annotations: Vec<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl AnalyzeCommand {
    pub fn name(&self) -> &'static str {
        match self {
            AnalyzeCommand::Expected(_) => "analyze expected",
            AnalyzeCommand::Errors(_) => "analyze errors",
            AnalyzeCommand::Dispersion(_) => "analyze dispersion",
            AnalyzeCommand::Scatter(_) => "analyze scatter",
            AnalyzeCommand::Categories(_) => "analyze categories",
        }
    }

    pub fn out(&self) -> Option<&PathBuf> {
        match self {
            AnalyzeCommand::Expected(a) => a.out.as_ref(),
            AnalyzeCommand::Errors(a) => a.out.as_ref(),
            AnalyzeCommand::Dispersion(a) => a.out.as_ref(),
            AnalyzeCommand::Scatter(a) => a.out.as_ref(),
            AnalyzeCommand::Categories(a) => a.out.as_ref(),
        }
    }
}

pub fn run(ctx: &Context, cmd: &AnalyzeCommand) -> Result<Run> {
    let out = cmd.out().map(|p| ctx.resolve_out(p));
    let mut run = Run::new(cmd.name(), out.clone());
    match cmd {
        AnalyzeCommand::Expected(a) => expected(&mut run, a, out)?,
        AnalyzeCommand::Errors(a) => errors(ctx, &mut run, a, out)?,
        AnalyzeCommand::Dispersion(a) => dispersion(ctx, &mut run, a, out)?,
        AnalyzeCommand::Scatter(a) => scatter(ctx, &mut run, a, out)?,
        AnalyzeCommand::Categories(a) => categories(&mut run, a, out)?,
    }
    Ok(run)
}

/// Items and the averaged prediction set, restricted to each dataset's
/// evaluation portion.
fn evaluation_data(run: &mut Run, data: &ItemsAndPreds) -> Result<(Vec<EventRecord>, PredictionSet)> {
    let (items, sets) = load_items_and_preds(run, data)?;
    let preds = PredictionSet::average(&sets)?;
    let items = evaluation_items(&items)
        .into_values()
        .flat_map(|(_, v)| v.into_iter().cloned())
        .collect();
    Ok((items, preds))
}

fn features(names: &[String]) -> Result<Vec<Feature>> {
    names
        .iter()
        .map(|s| s.trim().parse::<Feature>().map_err(|e| anyhow!(e)))
        .collect()
}

fn expected(run: &mut Run, a: &ExpectedArgs, out: Option<PathBuf>) -> Result<()> {
    exists(&a.oracle).map_err(|e| e.context("expected inferences are missing; run `factkit oracle` first"))?;
    let (items, preds) = evaluation_data(run, &a.data)?;
    let rows: Vec<OracleRow> = read_jsonl(&run.input(&a.oracle))?;
    if rows.is_empty() {
        bail!("{}: no expected inferences", a.oracle.display());
    }
    let expected = expected_scores(&rows)?;
    let study = expected_inference_study(&items, &preds, &expected, MixedConfig::default())?;
    print!("{}", study.table());
    for w in &study.warnings {
        run.warn(w.clone());
    }
    if !study.model.converged {
        run.warn("mixed model did not converge");
    }
    if study.unpredicted > 0 {
        run.warn(format!("{} item(s) with an expected inference have no prediction", study.unpredicted));
    }
    run.json_output(out, &study)
}

fn errors(ctx: &Context, run: &mut Run, a: &ErrorsArgs, out: Option<PathBuf>) -> Result<()> {
    let frac = a.top_frac.or(ctx.config.analysis.top_frac).unwrap_or(0.1);
    run.option("top_frac", frac);
    let (items, preds) = evaluation_data(run, &a.data)?;
    let by = rank_errors_by_dataset(&items, &preds, frac)?;
    let mut all = Vec::new();
    for (d, rows) in by {
        println!("{d}: top {} errors", rows.len());
        print!("{}", ranking_table(&rows));
        all.extend(rows);
    }
    if let Some(p) = out {
        run.json_output(Some(p), &all)?;
    }
    Ok(())
}

fn dispersion(ctx: &Context, run: &mut Run, a: &DispersionArgs, out: Option<PathBuf>) -> Result<()> {
    let keys = features(&a.keys)?;
    let convention: VarianceConvention = match a.variance.as_deref().or(ctx.config.analysis.variance.as_deref()) {
        Some(s) => s.parse()?,
        None => VarianceConvention::default(),
    };
    run.option("keys", &keys);
    run.option("variance", convention);
    let (items, preds) = evaluation_data(run, &a.data)?;
    let d = group_dispersion(&items, &preds, &keys, convention)?;
    println!(
        "{} groups ({} singletons skipped): mean prediction variance {:.4}, mean gold variance {:.4}",
        d.groups, d.singletons_skipped, d.mean_pred_variance, d.mean_gold_variance
    );
    if d.groups == 0 {
        run.warn("no group has two or more items");
    }
    if let Some(p) = out {
        run.json_output(Some(p), &d)?;
    }
    Ok(())
}

fn scatter(ctx: &Context, run: &mut Run, a: &ScatterArgs, out: Option<PathBuf>) -> Result<()> {
    let facet = features(&a.facet)?;
    run.option("facet", &facet);
    let factive = a.factive_list.clone().or_else(|| ctx.config.analysis.factive_list.clone());
    let neg = a.neg_raising_list.clone().or_else(|| ctx.config.analysis.neg_raising_list.clone());
    let classes = match (factive, neg) {
        (None, None) => VerbClasses::bundled(),
        (Some(f), Some(n)) => VerbClasses::from_files(&run.input(&f), &run.input(&n))?,
        _ => bail!("--factive-list and --neg-raising-list must be given together"),
    };
    let (items, preds) = evaluation_data(run, &a.data)?;
    let rows = scatter_export(&items, &preds, &facet, &classes)?;
    let mut buf = Vec::new();
    write_scatter_csv(&mut buf, &facet, &rows)?;
    match out {
        Some(p) => {
            eprintln!("{} rows", rows.len());
            run.output(p, buf);
        }
        None => print!("{}", String::from_utf8(buf)?),
    }
    Ok(())
}

fn categories(run: &mut Run, a: &CategoriesArgs, out: Option<PathBuf>) -> Result<()> {
    exists(&a.ranked)?;
    let text = std::fs::read_to_string(run.input(&a.ranked))?;
    let ranked: Vec<RankedError> = serde_json::from_str(&text)
        .map_err(|e| anyhow!("{}: expected the JSON written by `analyze errors --out`: {e}", a.ranked.display()))?;
    let mut annotations = Vec::new();
    for p in &a.annotations {
        annotations.extend(load_category_annotations(&run.input(p))?);
    }
    let report = error_category_report(&ranked, &annotations);
    print!("{}", report.table());
    for w in &report.warnings {
        run.warn(w.clone());
    }
    run.json_output(out, &report)
}
