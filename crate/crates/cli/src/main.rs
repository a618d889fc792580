//! `sp-lab`: command-line laboratory for surprisingly-popular rank
//! aggregation under concentric mixtures of rank-order models.
//!
//! Every subcommand is a thin wrapper over the library: loading inputs,
//! calling one operation, writing outputs. Anything stochastic takes a
//! required `--seed`; there is no wall-clock fallback, so repeated runs
//! with the same flags produce identical bytes. Exit codes: 0 success,
//! 1 bad input (flags, files that parse but violate a precondition),
//! 2 runtime failure (I/O).

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use sp_core::baselines::{borda, copeland};
use sp_core::error::{Error, Result};
use sp_core::experiments::{run_real_data, run_sample_complexity, Aggregator, ExperimentConfig};
use sp_core::identifiability::{
    cmm_g2_condition, cmm_general_condition, cmpl_g2_condition, cmpl_general_condition,
};
use sp_core::inference::{
    cmm_exact_infer, cmpl_infer, predict_full_ranking_cmpl, McmcConfig, PriorSpec,
};
use sp_core::io::{self, LoadedQuestion, QuestionKey};
use sp_core::models::{sample_paired, CmmParams, CmplParams, ModelSpec};
use sp_core::rankings::{PartialRanking, Ranking};
use sp_core::sp::{sp_vote_modal, PredictionReport, Profile, VoterReport};
use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "sp-lab", version, about = "Surprisingly-popular voting laboratory")]
struct Cli {
    /// Worker threads for parallel sections (default: all cores). Results
    /// do not depend on this.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a synthetic vote+prediction profile from a model spec
    Simulate(SimulateArgs),
    /// Aggregate a profiles file with a named rule and print the winners
    Aggregate(AggregateArgs),
    /// Evaluate an identifiability condition and print the report
    CheckIdentifiability(CheckArgs),
    /// Fit a mixture posterior to one question's vote+prediction pairs
    Infer(InferArgs),
    /// Run a sample-complexity experiment (synthetic or real data)
    Experiment(ExperimentArgs),
    /// Stitch per-question Plackett-Luce fits into a full-universe ranking
    PredictFull(PredictFullArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Model spec JSON file
    #[arg(long)]
    model: PathBuf,
    /// Number of voters to draw
    #[arg(long)]
    n: usize,
    /// RNG seed; fully determines the output
    #[arg(long)]
    seed: u64,
    /// Output profiles CSV
    #[arg(long)]
    out: PathBuf,
    /// Domain label written to the file
    #[arg(long, default_value = "synthetic")]
    domain: String,
    /// Question id written to the file
    #[arg(long, default_value = "q0")]
    question: String,
}

#[derive(Args)]
struct AggregateArgs {
    /// Aggregation rule: copeland, borda, or sp-modal
    #[arg(long)]
    rule: String,
    /// Profiles CSV to aggregate
    #[arg(long = "in")]
    input: PathBuf,
    /// Restrict to one domain
    #[arg(long)]
    domain: Option<String>,
    /// Restrict to one question id
    #[arg(long)]
    question: Option<String>,
}

#[derive(Args)]
struct CheckArgs {
    /// Condition to evaluate: cmm2, cmm-general, cmpl2, or cmpl-general
    #[arg(long)]
    lemma: String,
    /// Expert-group proportion (two-group conditions)
    #[arg(long)]
    p1: Option<f64>,
    /// Group proportions, comma-separated (general conditions)
    #[arg(long, value_delimiter = ',')]
    p: Option<Vec<f64>>,
    /// Mallows dispersions, comma-separated
    #[arg(long, value_delimiter = ',')]
    phi: Option<Vec<f64>>,
    /// Plackett-Luce strength rows: entries comma-separated, rows joined
    /// by ';' (e.g. "0.6,0.3,0.1;0.4,0.35,0.25")
    #[arg(long)]
    theta: Option<String>,
    /// Number of alternatives (Mallows conditions)
    #[arg(long)]
    m: Option<usize>,
    /// Partition index s splitting expert groups 1..=s from the rest
    /// (general conditions)
    #[arg(long, default_value_t = 1)]
    split: usize,
}

#[derive(Args)]
struct InferArgs {
    /// Mixture family: cmm or cmpl
    #[arg(long)]
    family: String,
    /// Number of expertise groups
    #[arg(long)]
    groups: usize,
    /// Profiles CSV with votes and rank predictions
    #[arg(long)]
    data: PathBuf,
    /// Ground-truth CSV
    #[arg(long)]
    truth: PathBuf,
    /// Restrict to one domain
    #[arg(long)]
    domain: Option<String>,
    /// Restrict to one question id
    #[arg(long)]
    question: Option<String>,
    /// RNG seed; fully determines the chains
    #[arg(long)]
    seed: u64,
    /// Number of chains
    #[arg(long, default_value_t = 4)]
    chains: usize,
    /// Iterations per chain (including warmup)
    #[arg(long, default_value_t = 8000)]
    iterations: usize,
    /// Warmup iterations discarded from each chain
    #[arg(long, default_value_t = 2000)]
    warmup: usize,
    /// Output posterior-summary CSV
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Experiment config JSON (synthetic mode)
    #[arg(long, conflicts_with_all = ["data", "truth", "aggregators", "sizes", "trials"])]
    config: Option<PathBuf>,
    /// Profiles CSV (real-data mode)
    #[arg(long, requires = "truth")]
    data: Option<PathBuf>,
    /// Ground-truth CSV (real-data mode)
    #[arg(long, requires = "data")]
    truth: Option<PathBuf>,
    /// Aggregators to compare, comma-separated (real-data mode)
    #[arg(long, value_delimiter = ',')]
    aggregators: Option<Vec<String>>,
    /// Subsample sizes, comma-separated ascending (real-data mode)
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    /// Trials per size (real-data mode)
    #[arg(long)]
    trials: Option<usize>,
    /// Bootstrap resamples behind each confidence interval (real-data mode)
    #[arg(long, default_value_t = 1000)]
    reps: usize,
    /// Confidence level for the intervals (real-data mode)
    #[arg(long, default_value_t = 0.95)]
    confidence: f64,
    /// RNG seed; overrides any seed in the config file
    #[arg(long)]
    seed: u64,
    /// Output results CSV
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PredictFullArgs {
    /// Profiles CSV with votes and rank predictions
    #[arg(long)]
    data: PathBuf,
    /// Ground-truth CSV
    #[arg(long)]
    truth: PathBuf,
    /// Restrict to one domain
    #[arg(long)]
    domain: Option<String>,
    /// Number of expertise groups per question fit
    #[arg(long)]
    groups: usize,
    /// Reference ranking over the union of all alternatives, ">"-joined ids
    #[arg(long)]
    reference: String,
    /// Bootstrap replicates for the stitched distribution
    #[arg(long, default_value_t = 200)]
    bootstrap: usize,
    /// RNG seed; fully determines fits and stitching
    #[arg(long)]
    seed: u64,
    /// Number of chains per question fit
    #[arg(long, default_value_t = 4)]
    chains: usize,
    /// Iterations per chain (including warmup)
    #[arg(long, default_value_t = 8000)]
    iterations: usize,
    /// Warmup iterations discarded from each chain
    #[arg(long, default_value_t = 2000)]
    warmup: usize,
    /// Output prediction JSON
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // --help/--version land here with use_stderr() == false
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    if let Some(threads) = cli.threads {
        if threads == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(1);
        }
        if let Err(err) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("error: could not size the thread pool: {err}");
            return ExitCode::from(2);
        }
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(match err {
                Error::Io(_) => 2,
                _ => 1,
            })
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Simulate(args) => run_simulate(args),
        Command::Aggregate(args) => run_aggregate(args),
        Command::CheckIdentifiability(args) => run_check(args),
        Command::Infer(args) => run_infer(args),
        Command::Experiment(args) => run_experiment(args),
        Command::PredictFull(args) => run_predict_full(args),
    }
}

fn run_simulate(args: SimulateArgs) -> Result<()> {
    let spec: ModelSpec = io::load_json(&args.model)?;
    let m = spec.m();
    let draws = sample_paired(&spec, args.n, args.seed)?;
    let reports = draws
        .iter()
        .map(|d| {
            Ok(VoterReport {
                vote: PartialRanking::new(d.vote.as_slice().to_vec(), m)?,
                prediction: PredictionReport::ModalRanking(PartialRanking::new(
                    d.prediction.as_slice().to_vec(),
                    m,
                )?),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    // zero-padded ids keep the sorted dense remap equal to the draw indices
    let width = (m.saturating_sub(1)).to_string().len();
    let question = LoadedQuestion {
        profile: Profile::new_full(m, reports)?,
        alternatives: (0..m).map(|a| format!("a{a:0width$}")).collect(),
        participants: (0..args.n).map(|i| format!("v{i}")).collect(),
    };
    let mut questions = BTreeMap::new();
    questions.insert((args.domain.clone(), args.question.clone()), question);
    io::save_profiles(&questions, &args.out)?;
    println!(
        "wrote {} reports over {} alternatives to {}",
        args.n,
        m,
        args.out.display()
    );
    Ok(())
}

#[derive(Serialize)]
struct WinnerRecord {
    domain: String,
    question_id: String,
    rule: String,
    winner: String,
}

fn run_aggregate(args: AggregateArgs) -> Result<()> {
    let rule: Aggregator = args.rule.parse()?;
    if rule == Aggregator::SpFullPosterior {
        return Err(Error::Precondition(
            "sp-full-posterior needs a generating model; use the experiment subcommand".into(),
        ));
    }
    let questions = filter_questions(
        io::load_profiles(&args.input)?,
        args.domain.as_deref(),
        args.question.as_deref(),
    )?;
    let mut records = Vec::with_capacity(questions.len());
    for ((domain, question_id), q) in &questions {
        let winner = match rule {
            Aggregator::SpModal => sp_vote_modal(&q.profile)?,
            Aggregator::Copeland => copeland(&total_votes(&q.profile)?)?,
            Aggregator::Borda => borda(&total_votes(&q.profile)?)?,
            Aggregator::SpFullPosterior => unreachable!(),
        };
        records.push(WinnerRecord {
            domain: domain.clone(),
            question_id: question_id.clone(),
            rule: rule.name().to_string(),
            winner: render_ranking(&winner, &q.alternatives),
        });
    }
    println!("{}", serde_json::to_string_pretty(&records)?);
    Ok(())
}

fn run_check(args: CheckArgs) -> Result<()> {
    let report = match args.lemma.as_str() {
        "cmm2" => {
            let p1 = require(args.p1, "--p1")?;
            let phi = require(args.phi, "--phi")?;
            let m = require(args.m, "--m")?;
            if phi.len() != 2 {
                return Err(Error::InvalidParameter(format!(
                    "cmm2 needs exactly two dispersions, got {}",
                    phi.len()
                )));
            }
            cmm_g2_condition(p1, phi[0], phi[1], m)?
        }
        "cmm-general" => {
            let p = require(args.p, "--p")?;
            let phi = require(args.phi, "--phi")?;
            let m = require(args.m, "--m")?;
            cmm_general_condition(&CmmParams::new(p, phi)?, args.split, m)?
        }
        "cmpl2" => {
            let p1 = require(args.p1, "--p1")?;
            let rows = parse_theta(&require(args.theta, "--theta")?)?;
            if rows.len() != 2 {
                return Err(Error::InvalidParameter(format!(
                    "cmpl2 needs exactly two strength rows, got {}",
                    rows.len()
                )));
            }
            cmpl_g2_condition(p1, &rows[0], &rows[1])?
        }
        "cmpl-general" => {
            let p = require(args.p, "--p")?;
            let rows = parse_theta(&require(args.theta, "--theta")?)?;
            cmpl_general_condition(&CmplParams::new(p, rows)?, args.split)?
        }
        other => {
            return Err(Error::InvalidParameter(format!(
                "unknown lemma tag `{other}`; expected cmm2, cmm-general, cmpl2, or cmpl-general"
            )))
        }
    };
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

fn run_infer(args: InferArgs) -> Result<()> {
    let questions = filter_questions(
        io::load_profiles(&args.data)?,
        args.domain.as_deref(),
        args.question.as_deref(),
    )?;
    if questions.len() != 1 {
        return Err(Error::Precondition(format!(
            "inference runs on a single question; the filter matched {} (narrow with --domain/--question)",
            questions.len()
        )));
    }
    let truths = io::load_ground_truths(&args.truth)?;
    let joined = io::join_ground_truths(&questions, &truths)?;
    let (profile, truth) = &joined[0];
    let (data, skipped) = ranking_pairs(profile)?;
    if skipped > 0 {
        eprintln!("note: skipped {skipped} report(s) without rank predictions");
    }
    let cfg = McmcConfig {
        chains: args.chains,
        iterations: args.iterations,
        warmup: args.warmup,
        ..McmcConfig::default()
    }
    .with_seed(args.seed);
    let samples = match args.family.as_str() {
        "cmm" => cmm_exact_infer(
            &data,
            truth,
            args.groups,
            &PriorSpec::default_cmm(args.groups),
            &cfg,
        )?,
        "cmpl" => cmpl_infer(
            &data,
            truth,
            args.groups,
            &PriorSpec::default_cmpl(args.groups, truth.m()),
            &cfg,
        )?,
        other => {
            return Err(Error::InvalidParameter(format!(
                "unknown family `{other}`; expected cmm or cmpl"
            )))
        }
    };
    std::fs::write(&args.out, samples.summary_csv())?;
    for note in samples.notes() {
        eprintln!("note: {note}");
    }
    println!(
        "wrote posterior summary for {} parameters to {} (acceptance rate {:.3})",
        samples.names().len(),
        args.out.display(),
        samples.acceptance_rate()
    );
    Ok(())
}

fn run_experiment(args: ExperimentArgs) -> Result<()> {
    let result = if let Some(config_path) = &args.config {
        let mut cfg: ExperimentConfig = io::load_json(config_path)?;
        cfg.seed = args.seed;
        run_sample_complexity(&cfg)?
    } else {
        let data = args.data.as_ref().ok_or_else(|| {
            Error::InvalidParameter(
                "pass either --config (synthetic) or --data/--truth (real data)".into(),
            )
        })?;
        let truth = args.truth.as_ref().expect("clap ties --truth to --data");
        let aggregators = require(args.aggregators, "--aggregators")?
            .iter()
            .map(|s| s.parse())
            .collect::<Result<Vec<Aggregator>>>()?;
        let sizes = require(args.sizes, "--sizes")?;
        let trials = require(args.trials, "--trials")?;
        let questions = io::load_profiles(data)?;
        let truths = io::load_ground_truths(truth)?;
        let joined = io::join_ground_truths(&questions, &truths)?;
        run_real_data(
            &joined,
            &aggregators,
            &sizes,
            trials,
            args.reps,
            args.confidence,
            args.seed,
        )?
    };
    for line in &result.metadata {
        eprintln!("note: {line}");
    }
    io::save_results(&result, &args.out)?;
    println!(
        "wrote {} result rows to {}",
        result.rows.len(),
        args.out.display()
    );
    Ok(())
}

fn run_predict_full(args: PredictFullArgs) -> Result<()> {
    let questions = filter_questions(io::load_profiles(&args.data)?, args.domain.as_deref(), None)?;
    let truths = io::load_ground_truths(&args.truth)?;
    let joined = io::join_ground_truths(&questions, &truths)?;

    // global universe: sorted union of ids across the selected questions
    let universe: Vec<String> = questions
        .values()
        .flat_map(|q| q.alternatives.iter().cloned())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let global: BTreeMap<&str, usize> = universe
        .iter()
        .enumerate()
        .map(|(idx, id)| (id.as_str(), idx))
        .collect();

    let ref_ids: Vec<&str> = args.reference.split('>').collect();
    if ref_ids.len() != universe.len() {
        return Err(Error::InvalidParameter(format!(
            "reference ranks {} alternatives but the data mention {}",
            ref_ids.len(),
            universe.len()
        )));
    }
    let reference = Ranking::new(
        ref_ids
            .iter()
            .map(|id| {
                global.get(id).copied().ok_or_else(|| {
                    Error::InvalidParameter(format!("reference names unknown alternative `{id}`"))
                })
            })
            .collect::<Result<Vec<usize>>>()?,
    )?;

    let base = McmcConfig {
        chains: args.chains,
        iterations: args.iterations,
        warmup: args.warmup,
        ..McmcConfig::default()
    };
    let mut fits = Vec::with_capacity(questions.len());
    for (qi, ((domain, question_id), q)) in questions.iter().enumerate() {
        let (profile, local_truth) = &joined[qi];
        let (data, skipped) = ranking_pairs(profile)?;
        if skipped > 0 {
            eprintln!(
                "note: {domain}/{question_id}: skipped {skipped} report(s) without rank predictions"
            );
        }
        let cfg = base
            .clone()
            .with_seed(args.seed ^ (qi as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let samples = cmpl_infer(
            &data,
            local_truth,
            args.groups,
            &PriorSpec::default_cmpl(args.groups, local_truth.m()),
            &cfg,
        )?;
        // strength entry j of a fit belongs to the alternative the question's
        // ground truth puts in position j; map that order into the universe
        let subset: Vec<usize> = local_truth
            .as_slice()
            .iter()
            .map(|&a| global[q.alternatives[a].as_str()])
            .collect();
        fits.push((subset, samples));
        eprintln!(
            "note: fitted {domain}/{question_id} ({}/{})",
            qi + 1,
            questions.len()
        );
    }
    let stitched =
        predict_full_ranking_cmpl(&fits, universe.len(), args.bootstrap, args.seed, &reference)?;

    #[derive(Serialize)]
    struct GroupOut {
        mode: String,
        mean_kt: f64,
        kt_histogram: Vec<usize>,
    }
    #[derive(Serialize)]
    struct PredictOut {
        universe: Vec<String>,
        reference: String,
        bootstrap: usize,
        groups: Vec<GroupOut>,
    }
    let out = PredictOut {
        universe: universe.clone(),
        reference: args.reference.clone(),
        bootstrap: stitched.bootstrap,
        groups: (0..args.groups)
            .map(|gi| GroupOut {
                mode: render_ranking(&stitched.group_modes[gi], &universe),
                mean_kt: stitched.mean_kt(gi),
                kt_histogram: stitched.kt_histograms[gi].clone(),
            })
            .collect(),
    };
    io::save_json(&out, &args.out)?;
    println!(
        "wrote stitched prediction over {} alternatives to {}",
        universe.len(),
        args.out.display()
    );
    Ok(())
}

fn require<T>(value: Option<T>, flag: &str) -> Result<T> {
    value.ok_or_else(|| Error::InvalidParameter(format!("{flag} is required here")))
}

fn parse_theta(text: &str) -> Result<Vec<Vec<f64>>> {
    text.split(';')
        .map(|row| {
            row.split(',')
                .map(|v| {
                    let v = v.trim();
                    v.parse::<f64>().map_err(|_| {
                        Error::InvalidParameter(format!("bad strength value `{v}`"))
                    })
                })
                .collect()
        })
        .collect()
}

fn filter_questions(
    mut questions: BTreeMap<QuestionKey, LoadedQuestion>,
    domain: Option<&str>,
    question: Option<&str>,
) -> Result<BTreeMap<QuestionKey, LoadedQuestion>> {
    if let Some(d) = domain {
        questions.retain(|(qd, _), _| qd == d);
    }
    if let Some(q) = question {
        questions.retain(|(_, qq), _| qq == q);
    }
    if questions.is_empty() {
        return Err(Error::EmptyInput("no questions match the filter".into()));
    }
    Ok(questions)
}

fn total_votes(profile: &Profile) -> Result<Vec<Ranking>> {
    profile
        .reports()
        .iter()
        .map(|r| r.vote.clone().into_total())
        .collect()
}

/// Extracts the (vote, prediction) ranking pairs inference consumes. Top
/// and top-t predictions carry no full ranking, so those reports are
/// skipped; the count of skipped reports is returned for surfacing.
fn ranking_pairs(profile: &Profile) -> Result<(Vec<(Ranking, Ranking)>, usize)> {
    let mut pairs = Vec::with_capacity(profile.reports().len());
    let mut skipped = 0usize;
    for r in profile.reports() {
        match &r.prediction {
            PredictionReport::ModalRanking(p) => {
                pairs.push((r.vote.clone().into_total()?, p.clone().into_total()?));
            }
            _ => skipped += 1,
        }
    }
    if pairs.is_empty() {
        return Err(Error::EmptyInput(
            "no reports with rank predictions to fit".into(),
        ));
    }
    Ok((pairs, skipped))
}

fn render_ranking(r: &Ranking, ids: &[String]) -> String {
    r.as_slice()
        .iter()
        .map(|&a| ids[a].as_str())
        .collect::<Vec<_>>()
        .join(">")
}
