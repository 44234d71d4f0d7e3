//! Command implementations behind the `facetgen` binary.
//!
//! Every command is deterministic given the config and seeds; the only
//! timing-dependent output (training wall time) is written to its own file
//! so all other artifacts can be byte-compared across reruns.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use facetgen::config::{ExperimentConfig, Profile};
use facetgen::corpus::{self, LoadOutcome, QueryRecord};
use facetgen::error::{Error, Result};
use facetgen::inference;
use facetgen::metrics::MetricReport;
use facetgen::objectives::ObjectiveId;
use facetgen::permute::{self, SequenceLimits};
use facetgen::report;
use facetgen::seqmodel;
use facetgen::text::Vocabulary;
use facetgen::training;

#[derive(Parser, Debug)]
#[command(name = "facetgen", version, about = "Query facet generation workbench")]
pub struct Cli {
    /// Experiment configuration file (JSON).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Defaults profile applied after loading the config: desk | reference.
    #[arg(long, global = true)]
    pub profile: Option<String>,

    /// Override all seeds derived from the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Write the configured corpus as native JSONL plus a stats sidecar.
    Synth(OutArgs),
    /// Train one objective and write a checkpoint, vocabulary, and log.
    Train(TrainArgs),
    /// Decode predictions from a checkpoint.
    Generate(GenerateArgs),
    /// Score a predictions file against the configured gold corpus.
    Evaluate(EvaluateArgs),
    /// Paired significance comparison of evaluation reports.
    Compare(CompareArgs),
    /// Per-objective training-epoch cost estimates and example counts.
    Cost(OutArgs),
}

#[derive(Args, Debug)]
pub struct OutArgs {
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    /// Objective name (seq-default, seq-min-perm, seq-avg-perm, set-pred,
    /// seq-set-pred).
    #[arg(long)]
    pub objective: String,
    #[arg(long)]
    pub out: PathBuf,
    /// Also dump the epoch-0 training examples as JSONL.
    #[arg(long)]
    pub dump_examples: bool,
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    #[arg(long)]
    pub objective: String,
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    /// Predictions file (JSONL with keys query and facets).
    #[arg(long)]
    pub predictions: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Label used in report file names and tables.
    #[arg(long, default_value = "model")]
    pub label: String,
}

#[derive(Args, Debug)]
pub struct CompareArgs {
    /// Report JSON files produced by evaluate.
    #[arg(long, required = true, num_args = 1..)]
    pub reports: Vec<PathBuf>,
    /// Label of the baseline row.
    #[arg(long)]
    pub baseline: String,
    #[arg(long)]
    pub out: PathBuf,
}

/// Exit code classes: 1 usage/config, 2 data, 3 numeric.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::InvalidArgument(_) | Error::UnknownObjective(_) => 1,
        Error::NumericOverflow(_) | Error::Diverged { .. } => 3,
        _ => 2,
    }
}

pub fn run(cli: Cli) -> Result<()> {
    let mut config = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => {
            return Err(Error::Config(
                "--config is required (a JSON experiment configuration)".into(),
            ))
        }
    };
    if let Some(profile) = &cli.profile {
        config.apply_profile(profile.parse::<Profile>()?);
    }
    if let Some(seed) = cli.seed {
        config.apply_seed_override(seed);
    }
    match cli.command {
        Command::Synth(args) => cmd_synth(&config, &args.out),
        Command::Train(args) => cmd_train(
            &config,
            args.objective.parse()?,
            &args.out,
            args.dump_examples,
        ),
        Command::Generate(args) => cmd_generate(
            &config,
            args.objective.parse()?,
            &args.checkpoint,
            &args.out,
        ),
        Command::Evaluate(args) => cmd_evaluate(&config, &args.predictions, &args.out, &args.label),
        Command::Compare(args) => cmd_compare(&args.reports, &args.baseline, &args.out),
        Command::Cost(args) => cmd_cost(&config, &args.out),
    }
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_file(path: &Path, content: &str) -> Result<()> {
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(content.as_bytes())
        .map_err(|e| Error::io(path, e))
}

fn load_corpus_reporting_skips(config: &ExperimentConfig) -> Result<Vec<QueryRecord>> {
    let LoadOutcome { records, skipped } = config.resolve_corpus()?;
    for skip in &skipped {
        eprintln!("skipped line {}: {}", skip.line, skip.reason);
    }
    if records.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    Ok(records)
}

pub fn cmd_synth(config: &ExperimentConfig, out: &Path) -> Result<()> {
    ensure_dir(out)?;
    let records = load_corpus_reporting_skips(config)?;
    let mut jsonl = String::new();
    for record in &records {
        jsonl.push_str(
            &serde_json::to_string(record)
                .map_err(|e| Error::Format(format!("record serialization: {e}")))?,
        );
        jsonl.push('\n');
    }
    let corpus_path = out.join("corpus.jsonl");
    write_file(&corpus_path, &jsonl)?;
    let stats = corpus::compute_stats(&records)?;
    write_file(
        &out.join("corpus.stats.json"),
        &report::to_json_string(&stats)?,
    )?;
    println!(
        "wrote {} records to {}",
        records.len(),
        corpus_path.display()
    );
    Ok(())
}

fn checkpoint_path(out: &Path, objective: ObjectiveId) -> PathBuf {
    out.join(format!("{objective}.checkpoint.json"))
}

pub fn cmd_train(
    config: &ExperimentConfig,
    objective: ObjectiveId,
    out: &Path,
    dump_examples: bool,
) -> Result<()> {
    ensure_dir(out)?;
    let records = load_corpus_reporting_skips(config)?;
    let vocab = Vocabulary::build(&records, config.vocab.min_frequency)?;
    let model_config = config.model_config_for(objective, vocab.len());
    let plan = config.sampling_plan_for(objective);
    let hyper = config.train_hyper();

    if dump_examples {
        let mut epoch_plan = plan.clone();
        epoch_plan.epoch_seed = hyper.sampling_seed;
        let limits = SequenceLimits {
            max_input_tokens: model_config.max_input_tokens,
            max_output_tokens: model_config.max_output_tokens,
        };
        let groups =
            training::build_epoch_groups(objective, &records, &vocab, &epoch_plan, limits)?;
        let mut dump = String::new();
        for group in &groups {
            for example in group {
                dump.push_str(
                    &serde_json::to_string(example)
                        .map_err(|e| Error::Format(format!("example serialization: {e}")))?,
                );
                dump.push('\n');
            }
        }
        write_file(&out.join(format!("{objective}.examples.jsonl")), &dump)?;
    }

    let start = Instant::now();
    let (params, log) = training::train(objective, &records, &vocab, &model_config, &plan, &hyper)?;
    let wall_ms = start.elapsed().as_millis();

    seqmodel::save_checkpoint(&params, &vocab, &checkpoint_path(out, objective))?;
    vocab.save(&out.join(format!("{objective}.vocab.txt")))?;

    let mut log_lines = String::new();
    log_lines.push_str(&format!(
        "{}\n",
        serde_json::json!({
            "type": "meta",
            "objective": objective.name(),
            "init_seed": log.init_seed,
            "sampling_seed": log.sampling_seed,
            "shuffle_seed": log.shuffle_seed,
            "epochs": hyper.epochs,
            "batch_size": hyper.batch_size,
            "learning_rate": hyper.adam.learning_rate,
        })
    ));
    for (epoch, loss) in log.epoch_losses.iter().enumerate() {
        log_lines.push_str(&format!(
            "{}\n",
            serde_json::json!({"type": "epoch", "epoch": epoch, "loss": loss})
        ));
    }
    write_file(&out.join(format!("{objective}.train.jsonl")), &log_lines)?;
    // Wall time lives in its own file so the log stays byte-reproducible.
    write_file(
        &out.join(format!("{objective}.timing.json")),
        &format!("{{\"wall_ms\": {wall_ms}}}\n"),
    )?;
    let final_loss = log.epoch_losses.last().copied().unwrap_or(f64::NAN);
    println!(
        "trained {objective}: {} epochs, final loss {final_loss:.6}",
        log.epoch_losses.len()
    );
    Ok(())
}

/// Decode predictions for every corpus record under the objective's
/// inference mode.
pub fn generate_predictions(
    config: &ExperimentConfig,
    objective: ObjectiveId,
    params: &seqmodel::Parameters,
    vocab: &Vocabulary,
    records: &[QueryRecord],
) -> Result<Vec<(String, Vec<String>)>> {
    let inference_cfg = &config.inference;
    let mut rows = Vec::with_capacity(records.len());
    for record in records {
        let facets = if objective.joint_target() {
            inference::generate_joint(params, record, vocab, params.config.max_output_tokens)?
        } else if objective == ObjectiveId::SetPred {
            inference::generate_set(
                params,
                record,
                vocab,
                inference_cfg.facet_count,
                inference_cfg.beam_width,
                inference_cfg.distinct_set,
            )?
        } else {
            inference::generate_seq_set(
                params,
                record,
                vocab,
                inference_cfg.facet_count,
                inference_cfg.beam_width,
            )?
            .facets
        };
        rows.push((record.query.clone(), facets));
    }
    Ok(rows)
}

pub fn cmd_generate(
    config: &ExperimentConfig,
    objective: ObjectiveId,
    checkpoint: &Path,
    out: &Path,
) -> Result<()> {
    ensure_dir(out)?;
    let (params, checkpoint_vocab) = seqmodel::load_checkpoint(checkpoint)?;
    let records = load_corpus_reporting_skips(config)?;
    let vocab = Vocabulary::build(&records, config.vocab.min_frequency)?;
    if vocab.tokens() != checkpoint_vocab {
        return Err(Error::VocabMismatch(format!(
            "checkpoint vocabulary ({} tokens) differs from the corpus vocabulary ({} tokens)",
            checkpoint_vocab.len(),
            vocab.len()
        )));
    }
    let rows = generate_predictions(config, objective, &params, &vocab, &records)?;
    let path = out.join(format!("{objective}.predictions.jsonl"));
    inference::write_predictions(&path, &rows)?;
    println!(
        "wrote predictions for {} queries to {}",
        rows.len(),
        path.display()
    );
    Ok(())
}

pub fn cmd_evaluate(
    config: &ExperimentConfig,
    predictions: &Path,
    out: &Path,
    label: &str,
) -> Result<()> {
    ensure_dir(out)?;
    let gold = load_corpus_reporting_skips(config)?;
    let predictions = corpus::load_predictions(predictions)?;
    let provider = config.embedding_provider()?;
    let options = config.eval_options();
    let metric_report =
        facetgen::metrics::evaluate(&predictions, &gold, provider.as_ref(), &options)?;

    write_file(
        &out.join(format!("{label}.report.json")),
        &report::to_json_string(&metric_report)?,
    )?;
    let histogram = report::facet_count_histogram(&predictions);
    write_file(
        &out.join(format!("{label}.histogram.json")),
        &report::to_json_string(&histogram)?,
    )?;
    let mut markdown = String::new();
    markdown.push_str(&format!("# evaluation: {label}\n\n## matching\n\n"));
    markdown.push_str(&report::render_matching_table(&[(
        label.to_string(),
        &metric_report,
    )]));
    markdown.push_str("\n## diversity (facet bodies)\n\n");
    markdown.push_str(&report::render_diversity_table(&[(
        label.to_string(),
        &metric_report,
    )]));
    markdown.push_str("\n## facet count histogram\n\n| facets | queries |\n|---|---|\n");
    for (count, queries) in &histogram {
        markdown.push_str(&format!("| {count} | {queries} |\n"));
    }
    write_file(&out.join(format!("{label}.report.md")), &markdown)?;
    println!(
        "evaluated {label}: term-overlap F1 {:.4}, exact-match F1 {:.4}",
        metric_report.macro_avg.term_overlap.f1, metric_report.macro_avg.exact_match.f1
    );
    Ok(())
}

fn report_label(path: &Path) -> String {
    let stem = path
        .file_name()
        .map(|n| n.to_string_lossy().to_string())
        .unwrap_or_default();
    stem.strip_suffix(".report.json")
        .map(str::to_string)
        .unwrap_or_else(|| {
            path.file_stem()
                .map(|n| n.to_string_lossy().to_string())
                .unwrap_or(stem)
        })
}

pub fn cmd_compare(reports: &[PathBuf], baseline: &str, out: &Path) -> Result<()> {
    ensure_dir(out)?;
    let mut labeled: Vec<(String, MetricReport)> = Vec::with_capacity(reports.len());
    for path in reports {
        let json = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let parsed: MetricReport = serde_json::from_str(&json)
            .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
        labeled.push((report_label(path), parsed));
    }
    let table = report::compare_reports(&labeled, baseline)?;
    write_file(
        &out.join("comparison.json"),
        &report::to_json_string(&table)?,
    )?;
    let mut markdown = String::from("# method comparison\n\n");
    markdown.push_str(
        "`+` marks a significant improvement over the worst method, `-` a significant \
         decrease against the best (paired t-test, 99% confidence, Bonferroni-corrected).\n\n",
    );
    markdown.push_str("## matching\n\n");
    markdown.push_str(&report::render_comparison(&table));
    let diversity_rows: Vec<(String, &MetricReport)> = labeled
        .iter()
        .map(|(label, rep)| (label.clone(), rep))
        .collect();
    markdown.push_str("\n## diversity (facet bodies)\n\n");
    markdown.push_str(&report::render_diversity_table(&diversity_rows));
    write_file(&out.join("comparison.md"), &markdown)?;
    println!("compared {} reports", labeled.len());
    Ok(())
}

pub fn cmd_cost(config: &ExperimentConfig, out: &Path) -> Result<()> {
    ensure_dir(out)?;
    let records = load_corpus_reporting_skips(config)?;
    let stats = corpus::compute_stats(&records)?;
    let vocab = Vocabulary::build(&records, config.vocab.min_frequency)?;
    let mut markdown = String::from(
        "| objective | epoch token-op estimate | full-enumeration examples | epoch-0 built examples |\n|---|---|---|---|\n",
    );
    for &objective in &config.objectives {
        let cost = permute::estimate_epoch_cost(objective, &stats);
        let full: u64 = records
            .iter()
            .map(|r| permute::count_full_examples(objective, r.facet_count()))
            .sum();
        let model_config = config.model_config_for(objective, vocab.len());
        let mut plan = config.sampling_plan_for(objective);
        plan.epoch_seed = config.training.sampling_seed;
        let limits = SequenceLimits {
            max_input_tokens: model_config.max_input_tokens,
            max_output_tokens: model_config.max_output_tokens,
        };
        let built: usize =
            training::build_epoch_groups(objective, &records, &vocab, &plan, limits)?
                .iter()
                .map(Vec::len)
                .sum();
        markdown.push_str(&format!("| {objective} | {cost:.1} | {full} | {built} |\n"));
    }
    write_file(&out.join("cost.md"), &markdown)?;
    print!("{markdown}");
    Ok(())
}
