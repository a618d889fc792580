//! Monte-Carlo sample-complexity experiments: how quickly different
//! aggregation rules recover the ground truth as the electorate grows.
//!
//! A run draws `trials` independent electorates at each requested size,
//! hands the *same* draws to every aggregator (paired comparisons), records
//! the Kendall tau distance between each output and the generating ground
//! truth, and summarizes each (aggregator, n) cell with a percentile
//! bootstrap over the per-trial distances. All randomness is derived from
//! the master seed by counters, so results are reproducible regardless of
//! trial scheduling.
//!
//! Synthetic voters report predictions in the form each SP variant elicits:
//! full-posterior voters report the exact Bayesian peer-prediction vector
//! for their own vote, while modal voters report the single prediction
//! ranking drawn by the paired sampler. (Reporting the argmax of the
//! Bayesian peer prediction instead would be vacuous: for these concentric
//! kernels that argmax is always the voter's own vote, which makes every
//! prediction count equal its vote count and the SP ratio identically 1.)

use std::collections::BTreeSet;
use std::fmt;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{borda, copeland};
use crate::error::{Error, Result};
use crate::inference::mcmc::{mix_seed, quantile};
use crate::models::{sample_paired, ModelSpec, PairedDraw};
use crate::rankings::{kendall_tau, rank_index, PartialRanking, Ranking, MAX_ENUM_M};
use crate::sp::{
    prediction_normalized_votes, sp_vote_modal, ExactEngine, PredictionReport, Prior, Profile,
    VoterReport,
};

/// Seed stream reserved for bootstrap resampling so it can never collide
/// with the per-cell data streams.
const BOOTSTRAP_STREAM: u64 = 0xB007;

/// An aggregation rule under comparison.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Aggregator {
    /// SP with exact Bayesian peer-prediction vectors.
    SpFullPosterior,
    /// SP with single-ranking predictions, scored by the smoothed ratio.
    SpModal,
    Copeland,
    Borda,
}

impl Aggregator {
    pub fn name(self) -> &'static str {
        match self {
            Aggregator::SpFullPosterior => "sp-full-posterior",
            Aggregator::SpModal => "sp-modal",
            Aggregator::Copeland => "copeland",
            Aggregator::Borda => "borda",
        }
    }

    /// SP variants enumerate the ranking space and are capped at
    /// [`MAX_ENUM_M`]; the pairwise/positional baselines are not.
    fn needs_enumeration(self) -> bool {
        matches!(self, Aggregator::SpFullPosterior | Aggregator::SpModal)
    }
}

impl fmt::Display for Aggregator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Aggregator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sp-full-posterior" => Ok(Aggregator::SpFullPosterior),
            "sp-modal" => Ok(Aggregator::SpModal),
            "copeland" => Ok(Aggregator::Copeland),
            "borda" => Ok(Aggregator::Borda),
            other => Err(Error::InvalidParameter(format!(
                "unknown aggregator {other:?}; expected sp-full-posterior, sp-modal, \
                 copeland, or borda"
            ))),
        }
    }
}

/// Everything a synthetic sample-complexity run needs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub model: ModelSpec,
    pub aggregators: Vec<Aggregator>,
    /// Electorate sizes, strictly increasing.
    pub sample_sizes: Vec<usize>,
    pub trials: usize,
    #[serde(default = "default_bootstrap_reps")]
    pub bootstrap_reps: usize,
    #[serde(default = "default_confidence")]
    pub confidence: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_bootstrap_reps() -> usize {
    1000
}

fn default_confidence() -> f64 {
    0.95
}

impl ExperimentConfig {
    /// Rejects inconsistent configurations before any trial runs.
    pub fn validate(&self) -> Result<()> {
        if self.aggregators.is_empty() {
            return Err(Error::InvalidParameter(
                "at least one aggregator is required".into(),
            ));
        }
        let distinct: BTreeSet<_> = self.aggregators.iter().collect();
        if distinct.len() != self.aggregators.len() {
            return Err(Error::InvalidParameter(
                "aggregators must be distinct".into(),
            ));
        }
        validate_sample_sizes(&self.sample_sizes)?;
        if self.trials == 0 {
            return Err(Error::InvalidParameter("trials must be at least 1".into()));
        }
        validate_bootstrap(self.bootstrap_reps, self.confidence)?;
        let m = self.model.m();
        if self.aggregators.iter().any(|a| a.needs_enumeration()) && m > MAX_ENUM_M {
            return Err(Error::CapacityExceeded { m, max: MAX_ENUM_M });
        }
        Ok(())
    }
}

fn validate_sample_sizes(sizes: &[usize]) -> Result<()> {
    if sizes.is_empty() {
        return Err(Error::InvalidParameter(
            "at least one sample size is required".into(),
        ));
    }
    if sizes[0] == 0 {
        return Err(Error::InvalidParameter(
            "sample sizes must be positive".into(),
        ));
    }
    if sizes.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(
            "sample sizes must be strictly increasing".into(),
        ));
    }
    Ok(())
}

fn validate_bootstrap(reps: usize, confidence: f64) -> Result<()> {
    if reps == 0 {
        return Err(Error::InvalidParameter(
            "bootstrap needs at least one replicate".into(),
        ));
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "confidence level must lie strictly between 0 and 1, got {confidence}"
        )));
    }
    Ok(())
}

/// One (aggregator, electorate size) cell of an experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub aggregator: Aggregator,
    pub n: usize,
    /// Mean Kendall tau distance to the ground truth across trials.
    pub mean_kt: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub trials: usize,
}

/// All cells of a run plus free-form notes (interpretation choices,
/// clipping warnings).
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentResult {
    /// One row per (aggregator, n) pair, aggregator-major in config order.
    pub rows: Vec<ResultRow>,
    pub metadata: Vec<String>,
}

impl ExperimentResult {
    pub fn row(&self, aggregator: Aggregator, n: usize) -> Option<&ResultRow> {
        self.rows
            .iter()
            .find(|r| r.aggregator == aggregator && r.n == n)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("aggregator,n,mean_kt,ci_lo,ci_hi,trials\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{:.6},{:.6},{:.6},{}",
                r.aggregator, r.n, r.mean_kt, r.ci_lo, r.ci_hi, r.trials
            );
        }
        out
    }
}

/// Percentile bootstrap of the mean: resamples `values` with replacement
/// `reps` times and returns `(mean, lower, upper)` at the given confidence
/// level. The interval is widened, if necessary, to bracket the mean.
pub fn bootstrap_ci(values: &[f64], reps: usize, level: f64, seed: u64) -> Result<(f64, f64, f64)> {
    if values.is_empty() {
        return Err(Error::EmptyInput("bootstrap over no values".into()));
    }
    validate_bootstrap(reps, level)?;
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter(
            "bootstrap values must be finite".into(),
        ));
    }
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut means = Vec::with_capacity(reps);
    for _ in 0..reps {
        let mut acc = 0.0;
        for _ in 0..n {
            acc += values[rng.random_range(0..n)];
        }
        means.push(acc / n as f64);
    }
    means.sort_by(f64::total_cmp);
    let alpha = (1.0 - level) / 2.0;
    let lo = quantile(&means, alpha);
    let hi = quantile(&means, 1.0 - alpha);
    // the percentile interval of a skewed resampling distribution can sit
    // entirely on one side of the point estimate; report a bracket
    Ok((mean, lo.min(mean), hi.max(mean)))
}

/// Runs the synthetic sample-complexity experiment described by `cfg`.
///
/// For every trial and electorate size, one set of paired (vote,
/// prediction) draws is generated and given to each aggregator, so the
/// comparison at a cell is over identical data. Cell seeds are derived from
/// the master seed by a trial-major counter, making the result independent
/// of scheduling.
pub fn run_sample_complexity(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let spec = &cfg.model;
    let truth = spec.ground_truth();

    // shared exact peer-prediction table, one row per ranking index
    let prediction_table = if cfg.aggregators.contains(&Aggregator::SpFullPosterior) {
        let engine = ExactEngine::new(spec, &Prior::Uniform)?;
        let mut table = Vec::with_capacity(engine.rankings().len());
        for sigma in engine.rankings() {
            table.push(engine.predict_other(sigma)?);
        }
        Some(table)
    } else {
        None
    };

    let n_sizes = cfg.sample_sizes.len();
    // kts[trial][size index][aggregator index]
    let kts: Vec<Vec<Vec<f64>>> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| -> Result<Vec<Vec<f64>>> {
            let mut per_size = Vec::with_capacity(n_sizes);
            for (si, &n) in cfg.sample_sizes.iter().enumerate() {
                let cell_seed = mix_seed(cfg.seed, (trial * n_sizes + si) as u64);
                let draws = sample_paired(spec, n, cell_seed)?;
                let votes: Vec<Ranking> = draws.iter().map(|d| d.vote.clone()).collect();
                let mut per_agg = Vec::with_capacity(cfg.aggregators.len());
                for &agg in &cfg.aggregators {
                    let out =
                        aggregate_synthetic(agg, &draws, &votes, spec.m(), prediction_table.as_deref())?;
                    per_agg.push(kendall_tau(&out, truth)? as f64);
                }
                per_size.push(per_agg);
            }
            Ok(per_size)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::with_capacity(cfg.aggregators.len() * n_sizes);
    for (ai, &agg) in cfg.aggregators.iter().enumerate() {
        for (si, &n) in cfg.sample_sizes.iter().enumerate() {
            let values: Vec<f64> = (0..cfg.trials).map(|t| kts[t][si][ai]).collect();
            let row_seed = mix_seed(mix_seed(cfg.seed, BOOTSTRAP_STREAM), (ai * n_sizes + si) as u64);
            let (mean_kt, ci_lo, ci_hi) =
                bootstrap_ci(&values, cfg.bootstrap_reps, cfg.confidence, row_seed)?;
            rows.push(ResultRow {
                aggregator: agg,
                n,
                mean_kt,
                ci_lo,
                ci_hi,
                trials: cfg.trials,
            });
        }
    }

    let mut metadata = vec![
        format!(
            "model: {:?} mixture, m = {}, {} group(s)",
            spec.kind(),
            spec.m(),
            spec.g()
        ),
        "seeds: per-cell streams derived from the master seed by a trial-major counter".into(),
        "predictions: sp-full-posterior voters report the exact Bayesian peer-prediction \
         vector for their vote; sp-modal voters report their sampled prediction ranking"
            .into(),
    ];
    if spec.prediction().is_none() {
        metadata.push(
            "prediction channel: none specified, prediction rankings fall back to the vote kernel"
                .into(),
        );
    }
    Ok(ExperimentResult { rows, metadata })
}

fn aggregate_synthetic(
    agg: Aggregator,
    draws: &[PairedDraw],
    votes: &[Ranking],
    m: usize,
    prediction_table: Option<&[Vec<f64>]>,
) -> Result<Ranking> {
    match agg {
        Aggregator::Copeland => copeland(votes),
        Aggregator::Borda => borda(votes),
        Aggregator::SpModal => {
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
            sp_vote_modal(&Profile::new_full(m, reports)?)
        }
        Aggregator::SpFullPosterior => {
            let table = prediction_table.ok_or_else(|| {
                Error::Precondition("peer-prediction table missing for sp-full-posterior".into())
            })?;
            let reports = draws
                .iter()
                .map(|d| {
                    Ok(VoterReport {
                        vote: PartialRanking::new(d.vote.as_slice().to_vec(), m)?,
                        prediction: PredictionReport::FullPosterior(
                            table[rank_index(&d.vote)?].clone(),
                        ),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            prediction_normalized_votes(&Profile::new_full(m, reports)?)?.winner_total()
        }
    }
}

/// Runs the sample-complexity comparison on already-collected data: one
/// `(profile, ground truth)` pair per question. At each trial and size `n`,
/// `n` voters are subsampled without replacement from every question
/// (clipped to availability, with a warning in the metadata), aggregated,
/// and scored by Kendall tau against that question's ground truth; the
/// trial's value is the arithmetic mean across questions. Cells are then
/// bootstrapped exactly as in [`run_sample_complexity`].
///
/// `sp-full-posterior` is rejected: collected datasets elicit ranking-valued
/// predictions, not posterior vectors.
#[allow(clippy::too_many_arguments)]
pub fn run_real_data(
    questions: &[(Profile, Ranking)],
    aggregators: &[Aggregator],
    sample_sizes: &[usize],
    trials: usize,
    bootstrap_reps: usize,
    confidence: f64,
    seed: u64,
) -> Result<ExperimentResult> {
    if questions.is_empty() {
        return Err(Error::EmptyInput("no questions to aggregate".into()));
    }
    if aggregators.is_empty() {
        return Err(Error::InvalidParameter(
            "at least one aggregator is required".into(),
        ));
    }
    let distinct: BTreeSet<_> = aggregators.iter().collect();
    if distinct.len() != aggregators.len() {
        return Err(Error::InvalidParameter(
            "aggregators must be distinct".into(),
        ));
    }
    if aggregators.contains(&Aggregator::SpFullPosterior) {
        return Err(Error::Precondition(
            "sp-full-posterior needs full posterior predictions, which collected datasets \
             do not elicit; use sp-modal"
                .into(),
        ));
    }
    validate_sample_sizes(sample_sizes)?;
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    validate_bootstrap(bootstrap_reps, confidence)?;
    for (qi, (profile, gt)) in questions.iter().enumerate() {
        if !profile.is_full() {
            return Err(Error::Precondition(format!(
                "question {qi}: profile must rank the full universe"
            )));
        }
        if gt.m() != profile.m() {
            return Err(Error::DimensionMismatch {
                expected: profile.m(),
                got: gt.m(),
            });
        }
        if profile.reports().is_empty() {
            return Err(Error::EmptyInput(format!("question {qi} has no reports")));
        }
    }

    let mut metadata = vec![format!(
        "data: {} question(s), per-question subsampling without replacement",
        questions.len()
    )];
    for (qi, (profile, _)) in questions.iter().enumerate() {
        let avail = profile.reports().len();
        let clipped: Vec<usize> = sample_sizes
            .iter()
            .copied()
            .filter(|&n| n > avail)
            .collect();
        if !clipped.is_empty() {
            metadata.push(format!(
                "warning: question {qi} has {avail} report(s); requested size(s) {clipped:?} \
                 clipped to {avail}"
            ));
        }
    }

    let n_sizes = sample_sizes.len();
    // values[trial][size index][aggregator index] = mean KT across questions
    let values: Vec<Vec<Vec<f64>>> = (0..trials)
        .into_par_iter()
        .map(|trial| -> Result<Vec<Vec<f64>>> {
            let mut per_size = Vec::with_capacity(n_sizes);
            for (si, &n) in sample_sizes.iter().enumerate() {
                let mut sums = vec![0.0; aggregators.len()];
                for (qi, (profile, gt)) in questions.iter().enumerate() {
                    let cell = (trial * n_sizes + si) * questions.len() + qi;
                    let sub = subsample_profile(profile, n, mix_seed(seed, cell as u64))?;
                    for (ai, &agg) in aggregators.iter().enumerate() {
                        let out = aggregate_real(agg, &sub)?;
                        sums[ai] += kendall_tau(&out, gt)? as f64;
                    }
                }
                per_size.push(
                    sums.into_iter()
                        .map(|s| s / questions.len() as f64)
                        .collect(),
                );
            }
            Ok(per_size)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::with_capacity(aggregators.len() * n_sizes);
    for (ai, &agg) in aggregators.iter().enumerate() {
        for (si, &n) in sample_sizes.iter().enumerate() {
            let cell: Vec<f64> = (0..trials).map(|t| values[t][si][ai]).collect();
            let row_seed = mix_seed(mix_seed(seed, BOOTSTRAP_STREAM), (ai * n_sizes + si) as u64);
            let (mean_kt, ci_lo, ci_hi) = bootstrap_ci(&cell, bootstrap_reps, confidence, row_seed)?;
            rows.push(ResultRow {
                aggregator: agg,
                n,
                mean_kt,
                ci_lo,
                ci_hi,
                trials,
            });
        }
    }
    Ok(ExperimentResult { rows, metadata })
}

/// `n` reports drawn without replacement (all of them when `n` covers the
/// profile), in their original order so subsampling is stable.
fn subsample_profile(profile: &Profile, n: usize, seed: u64) -> Result<Profile> {
    let avail = profile.reports().len();
    let reports = if n >= avail {
        profile.reports().to_vec()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut idx = rand::seq::index::sample(&mut rng, avail, n).into_vec();
        idx.sort_unstable();
        idx.into_iter()
            .map(|i| profile.reports()[i].clone())
            .collect()
    };
    Profile::new_full(profile.m(), reports)
}

fn aggregate_real(agg: Aggregator, profile: &Profile) -> Result<Ranking> {
    match agg {
        Aggregator::SpModal => sp_vote_modal(profile),
        Aggregator::Copeland | Aggregator::Borda => {
            let votes = profile
                .reports()
                .iter()
                .map(|r| r.vote.clone().into_total())
                .collect::<Result<Vec<_>>>()?;
            if agg == Aggregator::Copeland {
                copeland(&votes)
            } else {
                borda(&votes)
            }
        }
        Aggregator::SpFullPosterior => Err(Error::Precondition(
            "sp-full-posterior is not defined on collected datasets".into(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::identifiability::{verify_separation, DEFAULT_SEPARATION_MARGIN};
    use crate::models::{CmmParams, PredictionParams};
    use rand::Rng;

    fn cmm_spec(m: usize, gt: &[usize], p: &[f64], phi: &[f64]) -> ModelSpec {
        ModelSpec::new_cmm(
            m,
            Ranking::new(gt.to_vec()).unwrap(),
            CmmParams::new(p.to_vec(), phi.to_vec()).unwrap(),
        )
        .unwrap()
    }

    fn all_aggregators() -> Vec<Aggregator> {
        vec![
            Aggregator::SpFullPosterior,
            Aggregator::SpModal,
            Aggregator::Copeland,
            Aggregator::Borda,
        ]
    }

    #[test]
    fn config_validation_rejects_bad_inputs() {
        let base = ExperimentConfig {
            model: cmm_spec(3, &[0, 1, 2], &[0.4, 0.6], &[0.1, 0.9]),
            aggregators: all_aggregators(),
            sample_sizes: vec![10, 20],
            trials: 3,
            bootstrap_reps: 100,
            confidence: 0.95,
            seed: 1,
        };
        base.validate().unwrap();

        let mut c = base.clone();
        c.aggregators.clear();
        assert!(c.validate().is_err());

        let mut c = base.clone();
        c.aggregators.push(Aggregator::Copeland);
        assert!(c.validate().is_err());

        let mut c = base.clone();
        c.sample_sizes = vec![10, 10];
        assert!(c.validate().is_err());
        c.sample_sizes = vec![20, 10];
        assert!(c.validate().is_err());
        c.sample_sizes = vec![0, 10];
        assert!(c.validate().is_err());
        c.sample_sizes.clear();
        assert!(c.validate().is_err());

        let mut c = base.clone();
        c.trials = 0;
        assert!(c.validate().is_err());

        let mut c = base.clone();
        c.bootstrap_reps = 0;
        assert!(c.validate().is_err());

        let mut c = base.clone();
        c.confidence = 1.0;
        assert!(c.validate().is_err());
        c.confidence = 0.0;
        assert!(c.validate().is_err());

        // SP variants are capped by the enumeration guard, baselines are not
        let big = ModelSpec::new_cmm(
            MAX_ENUM_M + 1,
            Ranking::identity(MAX_ENUM_M + 1).unwrap(),
            CmmParams::new(vec![1.0], vec![0.5]).unwrap(),
        )
        .unwrap();
        let mut c = base.clone();
        c.model = big.clone();
        assert!(matches!(
            c.validate(),
            Err(Error::CapacityExceeded { .. })
        ));
        c.aggregators = vec![Aggregator::Copeland, Aggregator::Borda];
        c.validate().unwrap();
    }

    #[test]
    fn config_json_round_trips_with_defaults() {
        let cfg = ExperimentConfig {
            model: cmm_spec(3, &[2, 0, 1], &[0.4, 0.6], &[0.1, 0.9]),
            aggregators: vec![Aggregator::SpModal, Aggregator::Copeland],
            sample_sizes: vec![50, 100],
            trials: 7,
            bootstrap_reps: 250,
            confidence: 0.9,
            seed: 42,
        };
        let text = serde_json::to_string(&cfg).unwrap();
        assert!(text.contains("sp-modal"));
        assert!(text.contains("copeland"));
        let back: ExperimentConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, cfg);

        // bootstrap_reps, confidence, and seed may be omitted
        let text = r#"{
            "model": {"kind":"cmm","m":2,"ground_truth":[0,1],"proportions":[1.0],"dispersions":[0.5]},
            "aggregators": ["borda","sp-full-posterior"],
            "sample_sizes": [10],
            "trials": 2
        }"#;
        let cfg: ExperimentConfig = serde_json::from_str(text).unwrap();
        assert_eq!(cfg.bootstrap_reps, 1000);
        assert_eq!(cfg.confidence, 0.95);
        assert_eq!(cfg.seed, 0);
        assert_eq!(
            cfg.aggregators,
            vec![Aggregator::Borda, Aggregator::SpFullPosterior]
        );
    }

    #[test]
    fn bootstrap_interval_oracles() {
        // constant input: the interval collapses onto the constant
        let (mean, lo, hi) = bootstrap_ci(&vec![2.5; 40], 500, 0.95, 9).unwrap();
        assert_eq!(mean, 2.5);
        assert_eq!(lo, 2.5);
        assert_eq!(hi, 2.5);

        // fair coin, n = 10^4: percentile width matches the normal
        // approximation 2 z sqrt(p(1-p)/n)
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let coin: Vec<f64> = (0..10_000)
            .map(|_| if rng.random::<bool>() { 1.0 } else { 0.0 })
            .collect();
        let (mean, lo, hi) = bootstrap_ci(&coin, 2000, 0.95, 10).unwrap();
        let analytic = 2.0 * 1.959964 * (mean * (1.0 - mean) / 10_000.0).sqrt();
        assert!(((hi - lo) - analytic).abs() < 0.03);
        // and more tightly: both are about 0.0196
        assert!(((hi - lo) - analytic).abs() < 0.004);
        assert!(lo <= mean && mean <= hi);

        // a single replicate still yields a well-formed bracket
        let (mean, lo, hi) = bootstrap_ci(&[1.0, 2.0, 3.0], 1, 0.95, 11).unwrap();
        assert!(lo <= mean && mean <= hi);
        assert!(lo.is_finite() && hi.is_finite());

        assert!(matches!(
            bootstrap_ci(&[], 100, 0.95, 0),
            Err(Error::EmptyInput(_))
        ));
        assert!(bootstrap_ci(&[1.0], 0, 0.95, 0).is_err());
        assert!(bootstrap_ci(&[1.0], 10, 1.0, 0).is_err());
        assert!(bootstrap_ci(&[1.0, f64::NAN], 10, 0.95, 0).is_err());
    }

    #[test]
    fn bootstrap_brackets_the_mean_on_arbitrary_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(123);
        for round in 0..25 {
            let len = 1 + (round % 7);
            let values: Vec<f64> = (0..len).map(|_| rng.random::<f64>() * 10.0 - 5.0).collect();
            let reps = 1 + (round % 40);
            let (mean, lo, hi) = bootstrap_ci(&values, reps, 0.9, round as u64).unwrap();
            assert!(lo <= mean && mean <= hi, "round {round}: {lo} {mean} {hi}");
        }
    }

    #[test]
    fn results_are_deterministic_and_exhaustive() {
        let cfg = ExperimentConfig {
            model: cmm_spec(3, &[1, 2, 0], &[0.4, 0.6], &[0.1, 0.9]),
            aggregators: all_aggregators(),
            sample_sizes: vec![10, 40],
            trials: 5,
            bootstrap_reps: 200,
            confidence: 0.9,
            seed: 7,
        };
        let first = run_sample_complexity(&cfg).unwrap();
        let second = run_sample_complexity(&cfg).unwrap();
        assert_eq!(first, second);

        // exhaustive, aggregator-major, with invariants on every row
        assert_eq!(first.rows.len(), 8);
        let max_kt = 3.0;
        let mut expected = Vec::new();
        for &a in &cfg.aggregators {
            for &n in &cfg.sample_sizes {
                expected.push((a, n));
            }
        }
        let got: Vec<(Aggregator, usize)> =
            first.rows.iter().map(|r| (r.aggregator, r.n)).collect();
        assert_eq!(got, expected);
        for row in &first.rows {
            assert!(row.ci_lo <= row.mean_kt && row.mean_kt <= row.ci_hi);
            assert!(row.mean_kt >= 0.0 && row.mean_kt <= max_kt);
            assert!(row.ci_lo >= 0.0 && row.ci_hi <= max_kt);
            assert_eq!(row.trials, 5);
        }

        // a different seed must be allowed to change the numbers
        let mut other = cfg.clone();
        other.seed = 8;
        assert_ne!(run_sample_complexity(&other).unwrap(), first);

        let csv = first.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("aggregator,n,mean_kt,ci_lo,ci_hi,trials"));
        assert_eq!(csv.lines().count(), 9);
        assert!(csv.contains("sp-full-posterior,10,"));
        assert!(csv.contains("borda,40,"));
    }

    #[test]
    fn no_signal_dispersion_recovers_nothing() {
        // dispersion 1 is the uniform distribution: every aggregator should
        // hover at the uniform-guess baseline m(m-1)/4, and certainly not
        // beat it by more than the interval width. The ground truth is
        // deliberately not the tie-break favourite.
        let cfg = ExperimentConfig {
            model: cmm_spec(3, &[2, 0, 1], &[1.0], &[1.0]),
            aggregators: all_aggregators(),
            sample_sizes: vec![30],
            trials: 40,
            bootstrap_reps: 400,
            confidence: 0.95,
            seed: 21,
        };
        let result = run_sample_complexity(&cfg).unwrap();
        let baseline = 3.0 * 2.0 / 4.0;
        for row in &result.rows {
            let width = row.ci_hi - row.ci_lo;
            assert!(
                row.mean_kt >= baseline - width,
                "{} at n={} beat the no-signal baseline: mean {} width {}",
                row.aggregator,
                row.n,
                row.mean_kt,
                width
            );
        }
    }

    #[test]
    fn separated_mixture_reaches_exact_recovery() {
        // a mixture passing the population-level separation check: the
        // full-posterior rule must recover the truth in every trial once n
        // is large, and improve monotonically (4x size steps) before that
        let spec = cmm_spec(3, &[1, 2, 0], &[0.4, 0.6], &[0.1, 0.9]);
        assert!(verify_separation(&spec, DEFAULT_SEPARATION_MARGIN).unwrap());
        let cfg = ExperimentConfig {
            model: spec,
            aggregators: vec![Aggregator::SpFullPosterior],
            sample_sizes: vec![25, 100, 200],
            trials: 30,
            bootstrap_reps: 300,
            confidence: 0.95,
            seed: 1234,
        };
        let result = run_sample_complexity(&cfg).unwrap();
        let at = |n| result.row(Aggregator::SpFullPosterior, n).unwrap();
        assert_eq!(at(200).mean_kt, 0.0);
        assert_eq!(at(200).ci_lo, 0.0);
        assert_eq!(at(200).ci_hi, 0.0);
        let slack = (at(25).ci_hi - at(25).ci_lo).max(at(100).ci_hi - at(100).ci_lo);
        assert!(at(100).mean_kt <= at(25).mean_kt + slack);
        assert!(at(200).mean_kt <= at(100).mean_kt + slack);
    }

    #[test]
    fn prediction_channel_feeds_modal_sp() {
        // with a separate (flatter) prediction kernel the run must still be
        // deterministic and well-formed, and the interpretation notes must
        // say where predictions come from
        let model = cmm_spec(3, &[0, 2, 1], &[0.3, 0.7], &[0.2, 0.8])
            .with_prediction(PredictionParams::Dispersions(vec![0.5, 1.0]))
            .unwrap();
        let cfg = ExperimentConfig {
            model,
            aggregators: vec![Aggregator::SpModal, Aggregator::Copeland],
            sample_sizes: vec![60],
            trials: 10,
            bootstrap_reps: 200,
            confidence: 0.95,
            seed: 5,
        };
        let result = run_sample_complexity(&cfg).unwrap();
        assert_eq!(result.rows.len(), 2);
        assert!(result
            .metadata
            .iter()
            .any(|l| l.contains("sp-modal voters report their sampled prediction ranking")));
        // the fallback note only appears when there is no prediction channel
        assert!(!result.metadata.iter().any(|l| l.contains("fall back")));
        let fallback = run_sample_complexity(&ExperimentConfig {
            model: cmm_spec(3, &[0, 2, 1], &[0.3, 0.7], &[0.2, 0.8]),
            ..cfg
        })
        .unwrap();
        assert!(fallback.metadata.iter().any(|l| l.contains("fall back")));
    }

    // -- collected-data runs ------------------------------------------------

    fn synthetic_question(
        spec: &ModelSpec,
        n: usize,
        seed: u64,
    ) -> (Profile, Ranking) {
        let draws = sample_paired(spec, n, seed).unwrap();
        let m = spec.m();
        let reports = draws
            .into_iter()
            .map(|d| VoterReport {
                vote: PartialRanking::new(d.vote.as_slice().to_vec(), m).unwrap(),
                prediction: PredictionReport::ModalRanking(
                    PartialRanking::new(d.prediction.as_slice().to_vec(), m).unwrap(),
                ),
            })
            .collect();
        (
            Profile::new_full(m, reports).unwrap(),
            spec.ground_truth().clone(),
        )
    }

    #[test]
    fn real_data_full_sample_matches_direct_aggregation() {
        let spec_a = cmm_spec(3, &[1, 0, 2], &[0.4, 0.6], &[0.2, 0.9]);
        let spec_b = cmm_spec(3, &[2, 1, 0], &[0.4, 0.6], &[0.2, 0.9]);
        let questions = vec![
            synthetic_question(&spec_a, 12, 31),
            synthetic_question(&spec_b, 12, 32),
        ];
        let aggs = vec![Aggregator::SpModal, Aggregator::Copeland, Aggregator::Borda];
        let result =
            run_real_data(&questions, &aggs, &[12], 1, 100, 0.95, 99).unwrap();

        for &agg in &aggs {
            let mut expected = 0.0;
            for (profile, gt) in &questions {
                let out = aggregate_real(agg, profile).unwrap();
                expected += kendall_tau(&out, gt).unwrap() as f64;
            }
            expected /= questions.len() as f64;
            let row = result.row(agg, 12).unwrap();
            assert_eq!(row.mean_kt, expected, "{agg}");
            // one trial, constant bootstrap: the interval collapses
            assert_eq!(row.ci_lo, expected);
            assert_eq!(row.ci_hi, expected);
            assert_eq!(row.trials, 1);
        }
    }

    #[test]
    fn real_data_clips_subsamples_and_validates() {
        let spec = cmm_spec(3, &[0, 1, 2], &[0.4, 0.6], &[0.2, 0.9]);
        let questions = vec![synthetic_question(&spec, 8, 41)];
        let aggs = vec![Aggregator::SpModal, Aggregator::Copeland];

        let result = run_real_data(&questions, &aggs, &[4, 50], 3, 150, 0.9, 7).unwrap();
        assert_eq!(result.rows.len(), 4);
        assert!(result
            .metadata
            .iter()
            .any(|l| l.contains("clipped") && l.contains("[50]") && l.contains("8")));
        let again = run_real_data(&questions, &aggs, &[4, 50], 3, 150, 0.9, 7).unwrap();
        assert_eq!(result, again);
        // clipping makes every trial aggregate the same full profile
        let clipped = result.row(Aggregator::Copeland, 50).unwrap();
        assert_eq!(clipped.ci_lo, clipped.mean_kt);
        assert_eq!(clipped.ci_hi, clipped.mean_kt);

        // rejections: full-posterior SP, empty inputs, bad sizes
        assert!(matches!(
            run_real_data(
                &questions,
                &[Aggregator::SpFullPosterior],
                &[4],
                1,
                10,
                0.9,
                0
            ),
            Err(Error::Precondition(_))
        ));
        assert!(run_real_data(&[], &aggs, &[4], 1, 10, 0.9, 0).is_err());
        assert!(run_real_data(&questions, &aggs, &[4, 4], 1, 10, 0.9, 0).is_err());
        assert!(run_real_data(&questions, &aggs, &[4], 0, 10, 0.9, 0).is_err());

        // mismatched ground truth dimension is caught up front
        let bad = vec![(questions[0].0.clone(), Ranking::identity(4).unwrap())];
        assert!(run_real_data(&bad, &aggs, &[4], 1, 10, 0.9, 0).is_err());
    }

    #[test]
    fn dataset_written_through_files_reproduces_synthetic_run() {
        use crate::io::{
            join_ground_truths, parse_ground_truths, parse_profiles, profiles_csv, LoadedQuestion,
        };
        use std::collections::BTreeMap;

        let spec = cmm_spec(3, &[1, 0, 2], &[0.4, 0.6], &[0.2, 0.9]);
        let aggs = vec![Aggregator::SpModal, Aggregator::Copeland, Aggregator::Borda];
        let cfg = ExperimentConfig {
            model: spec.clone(),
            aggregators: aggs.clone(),
            sample_sizes: vec![25],
            trials: 1,
            bootstrap_reps: 50,
            confidence: 0.9,
            seed: 77,
        };
        let direct = run_sample_complexity(&cfg).unwrap();

        // rebuild the one cell's draws (trial 0, first size) and push them
        // through the dataset file format: ids chosen so the sorted dense
        // remap is the identity
        let draws = sample_paired(&spec, 25, mix_seed(cfg.seed, 0)).unwrap();
        let ids = ["a", "b", "c"];
        let reports = draws
            .iter()
            .map(|d| VoterReport {
                vote: PartialRanking::new(d.vote.as_slice().to_vec(), 3).unwrap(),
                prediction: PredictionReport::ModalRanking(
                    PartialRanking::new(d.prediction.as_slice().to_vec(), 3).unwrap(),
                ),
            })
            .collect();
        let mut questions = BTreeMap::new();
        questions.insert(
            ("synthetic".to_string(), "q0".to_string()),
            LoadedQuestion {
                profile: Profile::new_full(3, reports).unwrap(),
                alternatives: ids.iter().map(|s| s.to_string()).collect(),
                participants: (0..25).map(|i| format!("p{i}")).collect(),
            },
        );
        let text = profiles_csv(&questions).unwrap();
        let loaded = parse_profiles(&text).unwrap();
        let truth_text = format!(
            "domain,question_id,ranking\nsynthetic,q0,{}\n",
            spec.ground_truth()
                .as_slice()
                .iter()
                .map(|&alt| ids[alt])
                .collect::<Vec<_>>()
                .join(">")
        );
        let truths = parse_ground_truths(&truth_text).unwrap();
        let joined = join_ground_truths(&loaded, &truths).unwrap();

        let real = run_real_data(&joined, &aggs, &[25], 1, 50, 0.9, 0).unwrap();
        for &agg in &aggs {
            assert_eq!(
                real.row(agg, 25).unwrap().mean_kt,
                direct.row(agg, 25).unwrap().mean_kt,
                "{agg} diverged between the file path and the synthetic path"
            );
        }
    }

    #[test]
    fn subsampling_without_replacement_preserves_reports() {
        let spec = cmm_spec(3, &[0, 1, 2], &[1.0], &[0.8]);
        let (profile, _) = synthetic_question(&spec, 10, 51);
        let sub = subsample_profile(&profile, 4, 17).unwrap();
        assert_eq!(sub.reports().len(), 4);
        // every sampled report occurs in the original, and subsampling the
        // full size returns the profile unchanged
        for r in sub.reports() {
            assert!(profile.reports().contains(r));
        }
        let full = subsample_profile(&profile, 10, 17).unwrap();
        assert_eq!(full, profile);
        let over = subsample_profile(&profile, 99, 17).unwrap();
        assert_eq!(over, profile);
        // distinct indices: 4 draws of 10 reports can collide only if the
        // index sampler replaced; count distinct votes+predictions pairs
        let sub2 = subsample_profile(&profile, 9, 18).unwrap();
        assert_eq!(sub2.reports().len(), 9);
    }
}
