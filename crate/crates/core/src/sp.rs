//! Surprisingly-popular (SP) aggregation over rankings.
//!
//! The population story: a voter who saw `σ_i` forms a posterior over the
//! ground truth and from it a *prediction* of what another voter reports,
//!
//! ```text
//! Pr_g(σ* | σ_i)  ∝  Pr_s(σ_i | σ*) · P(σ*)                (posterior)
//! Pr_o(σ_j | σ_i) =  Σ_{σ'} Pr_s(σ_j | σ') · Pr_g(σ' | σ_i) (prediction)
//! ```
//!
//! and the SP rule scores each ranking by its vote frequency *normalized by
//! how strongly it was predicted*:
//!
//! ```text
//! V(σ) = f(σ) · Σ_{σ'} h(σ' | σ) / h(σ | σ')
//! ```
//!
//! with `f` the vote frequency and `h(σ|σ')` the average prediction of `σ`
//! among voters who voted `σ'`. [`exact_vbar`] evaluates this at the
//! population level (`f`, `h` exact under a [`ModelSpec`]);
//! [`prediction_normalized_votes`] evaluates it on a finite [`Profile`] of
//! full-posterior predictions; [`sp_vote_modal`] is the cheap variant where
//! voters report only their single most likely ranking, scored by smoothed
//! frequency ratios. [`partial_sp`] runs SP per subset profile and stitches
//! the winning orderings into one ranking with Copeland.
//!
//! Everything here enumerates the `k!` orderings of the profile's subset
//! (`m!` for full profiles), inheriting the capacity guard from
//! [`crate::rankings`].

use crate::baselines::PairwiseTally;
use crate::error::{Error, Result};
use crate::models::{
    mallows_normalizer, model_prob, ModelParams, ModelSpec,
};
use crate::rankings::{
    enumerate_rankings, extensions, factorial, kendall_tau, ordering_from_index, ordering_index,
    rank_index, Ranking, PartialRanking, MAX_ENUM_M,
};
use rayon::prelude::*;
use std::collections::BTreeMap;

/// Prior over ground-truth rankings, dense over `m!` when explicit.
#[derive(Clone, Debug, PartialEq)]
pub enum Prior {
    /// `1/m!` everywhere; the default throughout.
    Uniform,
    /// Explicit weights indexed by `RankIndex`; non-negative, summing to 1.
    Weights(Vec<f64>),
}

impl Prior {
    /// The dense weight vector over all `m!` rankings.
    pub fn dense(&self, m: usize) -> Result<Vec<f64>> {
        if m > MAX_ENUM_M {
            return Err(Error::CapacityExceeded { m, max: MAX_ENUM_M });
        }
        let total = factorial(m);
        match self {
            Prior::Uniform => Ok(vec![1.0 / total as f64; total]),
            Prior::Weights(w) => {
                if w.len() != total {
                    return Err(Error::DimensionMismatch {
                        expected: total,
                        got: w.len(),
                    });
                }
                let mut sum = 0.0;
                for &x in w {
                    if !(x >= 0.0) {
                        return Err(Error::InvalidParameter(format!(
                            "prior weights must be non-negative, got {x}"
                        )));
                    }
                    sum += x;
                }
                if (sum - 1.0).abs() > 1e-12 {
                    return Err(Error::InvalidParameter(format!(
                        "prior weights must sum to 1, got {sum}"
                    )));
                }
                Ok(w.iter().map(|x| x / sum).collect())
            }
        }
    }
}

/// What a voter reports about everyone else.
#[derive(Clone, Debug, PartialEq)]
pub enum PredictionReport {
    /// A full distribution over the `k!` orderings of the profile's subset,
    /// indexed like [`ordering_index`]. Normalized at profile construction.
    FullPosterior(Vec<f64>),
    /// The single ordering the voter finds most likely.
    ModalRanking(PartialRanking),
    /// The alternative the voter finds most likely to be ranked first.
    Top(usize),
    /// A set of alternatives predicted to occupy the top positions.
    TopT(Vec<usize>),
}

/// One voter's vote plus their prediction of others.
#[derive(Clone, Debug, PartialEq)]
pub struct VoterReport {
    pub vote: PartialRanking,
    pub prediction: PredictionReport,
}

/// A collection of voter reports over one subset of the alternatives
/// (the whole universe for ordinary elections).
#[derive(Clone, Debug, PartialEq)]
pub struct Profile {
    m: usize,
    subset: Vec<usize>, // sorted
    reports: Vec<VoterReport>,
}

impl Profile {
    /// A profile whose votes rank the entire universe `0..m`.
    pub fn new_full(m: usize, reports: Vec<VoterReport>) -> Result<Self> {
        Self::new_subset(m, (0..m).collect(), reports)
    }

    /// A profile whose votes rank only `subset` (of the universe `0..m`).
    pub fn new_subset(m: usize, mut subset: Vec<usize>, reports: Vec<VoterReport>) -> Result<Self> {
        subset.sort_unstable();
        if subset.is_empty() {
            return Err(Error::InvalidRanking("profile subset must be non-empty".into()));
        }
        if subset.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidRanking("profile subset has repeats".into()));
        }
        if *subset.last().unwrap() >= m {
            return Err(Error::InvalidRanking(format!(
                "subset member {} out of range for m = {m}",
                subset.last().unwrap()
            )));
        }
        let k = subset.len();
        if k > MAX_ENUM_M {
            return Err(Error::CapacityExceeded { m: k, max: MAX_ENUM_M });
        }
        let space = factorial(k);
        let mut profile = Profile {
            m,
            subset,
            reports: Vec::with_capacity(reports.len()),
        };
        for mut report in reports {
            if report.vote.ambient_m() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    got: report.vote.ambient_m(),
                });
            }
            if report.vote.subset_sorted() != profile.subset {
                return Err(Error::InvalidRanking(format!(
                    "vote {:?} does not rank the profile's subset",
                    report.vote
                )));
            }
            match &mut report.prediction {
                PredictionReport::FullPosterior(w) => {
                    if w.len() != space {
                        return Err(Error::DimensionMismatch {
                            expected: space,
                            got: w.len(),
                        });
                    }
                    let mut sum = 0.0;
                    for &x in w.iter() {
                        if !(x >= 0.0 && x.is_finite()) {
                            return Err(Error::InvalidParameter(format!(
                                "posterior prediction weights must be non-negative, got {x}"
                            )));
                        }
                        sum += x;
                    }
                    if sum <= 0.0 {
                        return Err(Error::InvalidParameter(
                            "posterior prediction has zero total mass".into(),
                        ));
                    }
                    for x in w.iter_mut() {
                        *x /= sum;
                    }
                }
                PredictionReport::ModalRanking(p) => {
                    if p.ambient_m() != m {
                        return Err(Error::DimensionMismatch {
                            expected: m,
                            got: p.ambient_m(),
                        });
                    }
                    if p.subset_sorted() != profile.subset {
                        return Err(Error::InvalidRanking(format!(
                            "modal prediction {p:?} does not rank the profile's subset"
                        )));
                    }
                }
                PredictionReport::Top(a) => {
                    if !profile.subset.contains(a) {
                        return Err(Error::InvalidRanking(format!(
                            "top prediction {a} is outside the profile's subset"
                        )));
                    }
                }
                PredictionReport::TopT(ts) => {
                    if ts.is_empty() {
                        return Err(Error::InvalidRanking(
                            "top-t prediction must be non-empty".into(),
                        ));
                    }
                    let mut seen = ts.clone();
                    seen.sort_unstable();
                    if seen.windows(2).any(|w| w[0] == w[1]) {
                        return Err(Error::InvalidRanking(
                            "top-t prediction has repeats".into(),
                        ));
                    }
                    for a in ts {
                        if !profile.subset.contains(a) {
                            return Err(Error::InvalidRanking(format!(
                                "top-t member {a} is outside the profile's subset"
                            )));
                        }
                    }
                }
            }
            profile.reports.push(report);
        }
        Ok(profile)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// The ranked subset, sorted ascending; `0..m` for full profiles.
    pub fn subset(&self) -> &[usize] {
        &self.subset
    }

    pub fn reports(&self) -> &[VoterReport] {
        &self.reports
    }

    pub fn is_full(&self) -> bool {
        self.subset.len() == self.m
    }
}

/// Exact Bayesian machinery for one model and prior: the full
/// `Pr_s(σ | σ*)` kernel over all `m!` rankings, cached.
pub struct ExactEngine {
    m: usize,
    rankings: Vec<Ranking>,
    prior: Vec<f64>,
    /// `kernel[z][x] = Pr_s(x | ground truth z)`; every row sums to 1.
    kernel: Vec<Vec<f64>>,
    /// `evidence[x] = Σ_z kernel[z][x] · prior[z]`, the Bayes denominator.
    evidence: Vec<f64>,
    truth_idx: usize,
}

impl ExactEngine {
    pub fn new(spec: &ModelSpec, prior: &Prior) -> Result<Self> {
        let m = spec.m();
        let rankings = enumerate_rankings(m)?;
        let prior = prior.dense(m)?;
        let n = rankings.len();
        let kernel = match spec.params() {
            ModelParams::Cmm(params) => {
                // Mallows mixtures depend on σ only through d(σ, z), so one
                // weight table per distance serves every row.
                let max_d = m * (m - 1) / 2;
                let mut by_distance = vec![0.0; max_d + 1];
                for (pg, &phi) in params.proportions().iter().zip(params.dispersions()) {
                    let z = mallows_normalizer(phi, m)?;
                    let mut pw = 1.0;
                    for w in by_distance.iter_mut() {
                        *w += pg * pw / z;
                        pw *= phi;
                    }
                }
                let mut kernel = vec![vec![0.0; n]; n];
                for zi in 0..n {
                    for xi in zi..n {
                        let d = kendall_tau(&rankings[zi], &rankings[xi])?;
                        kernel[zi][xi] = by_distance[d];
                        kernel[xi][zi] = by_distance[d];
                    }
                }
                kernel
            }
            ModelParams::Cmpl(_) => {
                let mut kernel = vec![vec![0.0; n]; n];
                for (zi, row) in kernel.iter_mut().enumerate() {
                    let centered = spec.with_ground_truth(rankings[zi].clone())?;
                    for (xi, cell) in row.iter_mut().enumerate() {
                        *cell = model_prob(&rankings[xi], &centered)?;
                    }
                }
                kernel
            }
        };
        let mut evidence = vec![0.0; n];
        for (zi, row) in kernel.iter().enumerate() {
            for (xi, &k) in row.iter().enumerate() {
                evidence[xi] += k * prior[zi];
            }
        }
        if evidence.iter().any(|&e| e <= 0.0) {
            return Err(Error::InvalidParameter(
                "prior is degenerate: some observation has zero evidence".into(),
            ));
        }
        let truth_idx = rank_index(spec.ground_truth())?;
        Ok(ExactEngine {
            m,
            rankings,
            prior,
            kernel,
            evidence,
            truth_idx,
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// All rankings in `RankIndex` order.
    pub fn rankings(&self) -> &[Ranking] {
        &self.rankings
    }

    fn check_m(&self, r: &Ranking) -> Result<usize> {
        if r.m() != self.m {
            return Err(Error::DimensionMismatch {
                expected: self.m,
                got: r.m(),
            });
        }
        rank_index(r)
    }

    /// Posterior over the ground truth after observing one vote.
    pub fn posterior_ground_truth(&self, sigma_i: &Ranking) -> Result<Vec<f64>> {
        let xi = self.check_m(sigma_i)?;
        Ok(self.posterior_by_index(xi))
    }

    fn posterior_by_index(&self, xi: usize) -> Vec<f64> {
        let n = self.rankings.len();
        let mut post = Vec::with_capacity(n);
        for zi in 0..n {
            post.push(self.kernel[zi][xi] * self.prior[zi] / self.evidence[xi]);
        }
        post
    }

    /// Distribution over another voter's ranking given one's own.
    pub fn predict_other(&self, sigma_i: &Ranking) -> Result<Vec<f64>> {
        let xi = self.check_m(sigma_i)?;
        Ok(self.predict_by_index(xi))
    }

    fn predict_by_index(&self, xi: usize) -> Vec<f64> {
        let post = self.posterior_by_index(xi);
        let n = self.rankings.len();
        let mut out = vec![0.0; n];
        for (zi, &pz) in post.iter().enumerate() {
            if pz == 0.0 {
                continue;
            }
            let row = &self.kernel[zi];
            for (o, &k) in out.iter_mut().zip(row) {
                *o += pz * k;
            }
        }
        out
    }

    /// Ground-truth posterior and subset-level prediction distribution for
    /// a partial vote: the posterior is over all `m!` rankings, the
    /// prediction over the `k!` orderings of the vote's subset.
    pub fn partial_posteriors(&self, pi: &PartialRanking) -> Result<(Vec<f64>, Vec<f64>)> {
        if pi.ambient_m() != self.m {
            return Err(Error::DimensionMismatch {
                expected: self.m,
                got: pi.ambient_m(),
            });
        }
        let n = self.rankings.len();
        let subset = pi.subset_sorted();
        let k = subset.len();
        // Pr_s(π | z) for every center z, for each ordering π of the subset
        let orderings = crate::rankings::subset_orderings(&subset, self.m)?;
        let mut marginal = vec![vec![0.0; n]; orderings.len()];
        for (oi, ordering) in orderings.iter().enumerate() {
            for ext in extensions(ordering)? {
                let xi = rank_index(&ext)?;
                for zi in 0..n {
                    marginal[oi][zi] += self.kernel[zi][xi];
                }
            }
        }
        let own = ordering_index(pi)?;
        // posterior ∝ Pr_s(π_i | z) · prior(z)
        let mut post = vec![0.0; n];
        let mut total = 0.0;
        for zi in 0..n {
            let w = marginal[own][zi] * self.prior[zi];
            post[zi] = w;
            total += w;
        }
        if total <= 0.0 {
            return Err(Error::InvalidParameter(
                "prior is degenerate: partial vote has zero evidence".into(),
            ));
        }
        for w in post.iter_mut() {
            *w /= total;
        }
        // prediction over the k! orderings
        let mut pred = vec![0.0; factorial(k)];
        for (oi, marg) in marginal.iter().enumerate() {
            let mut p = 0.0;
            for zi in 0..n {
                p += marg[zi] * post[zi];
            }
            pred[oi] = p;
        }
        Ok((post, pred))
    }

    /// Population-level prediction-normalized votes for every ranking, with
    /// vote frequencies taken from the spec's own ground truth.
    pub fn exact_vbar(&self) -> Vec<f64> {
        let n = self.rankings.len();
        // h[b][a] = Pr_o(a | b)
        let h: Vec<Vec<f64>> = (0..n).map(|b| self.predict_by_index(b)).collect();
        let f = &self.kernel[self.truth_idx];
        let mut vbar = vec![0.0; n];
        for x in 0..n {
            let mut sum = 0.0;
            for xp in 0..n {
                sum += h[x][xp] / h[xp][x];
            }
            vbar[x] = f[x] * sum;
        }
        vbar
    }
}

/// Posterior over the ground truth given one observed vote.
pub fn posterior_ground_truth(
    sigma_i: &Ranking,
    spec: &ModelSpec,
    prior: &Prior,
) -> Result<Vec<f64>> {
    ExactEngine::new(spec, prior)?.posterior_ground_truth(sigma_i)
}

/// Distribution over another voter's ranking given one's own vote.
pub fn predict_other(sigma_i: &Ranking, spec: &ModelSpec, prior: &Prior) -> Result<Vec<f64>> {
    ExactEngine::new(spec, prior)?.predict_other(sigma_i)
}

/// Ground-truth and peer-prediction posteriors for a partial vote.
pub fn partial_posteriors(
    pi: &PartialRanking,
    spec: &ModelSpec,
    prior: &Prior,
) -> Result<(Vec<f64>, Vec<f64>)> {
    ExactEngine::new(spec, prior)?.partial_posteriors(pi)
}

/// Population-level SP scores for all `m!` rankings under a model.
pub fn exact_vbar(spec: &ModelSpec, prior: &Prior) -> Result<Vec<f64>> {
    Ok(ExactEngine::new(spec, prior)?.exact_vbar())
}

/// Outcome of an SP aggregation over one profile: the winning ordering and
/// the score of every observed vote class (ascending ordering index).
#[derive(Clone, Debug, PartialEq)]
pub struct SpOutcome {
    pub winner: PartialRanking,
    pub scores: Vec<(PartialRanking, f64)>,
}

impl SpOutcome {
    /// The winner as a total ranking; errors on subset profiles.
    pub fn winner_total(&self) -> Result<Ranking> {
        self.winner.clone().into_total()
    }
}

fn profile_space(profile: &Profile) -> Result<usize> {
    let k = profile.subset().len();
    if k > MAX_ENUM_M {
        return Err(Error::CapacityExceeded { m: k, max: MAX_ENUM_M });
    }
    Ok(factorial(k))
}

/// Finite-sample SP with full-posterior predictions: scores each observed
/// vote class `σ` by `f(σ) · Σ_{σ'} h(σ'|σ) / h(σ|σ')` over observed
/// classes `σ'`, where `h(σ|σ')` is the mean predicted probability of `σ`
/// among voters who voted `σ'`. Additive smoothing `ε = 1/(2·n·k!)` keeps
/// every ratio finite; ties break toward the lower ordering index.
pub fn prediction_normalized_votes(profile: &Profile) -> Result<SpOutcome> {
    let n = profile.reports().len();
    if n == 0 {
        return Err(Error::EmptyInput("profile has no reports".into()));
    }
    let space = profile_space(profile)?;
    struct Class {
        count: usize,
        posterior_sum: Vec<f64>,
    }
    let mut classes: BTreeMap<usize, Class> = BTreeMap::new();
    for report in profile.reports() {
        let PredictionReport::FullPosterior(post) = &report.prediction else {
            return Err(Error::Precondition(
                "prediction-normalized voting requires a full-posterior prediction from every voter"
                    .into(),
            ));
        };
        let c = ordering_index(&report.vote)?;
        let entry = classes.entry(c).or_insert_with(|| Class {
            count: 0,
            posterior_sum: vec![0.0; space],
        });
        entry.count += 1;
        for (s, &x) in entry.posterior_sum.iter_mut().zip(post) {
            *s += x;
        }
    }
    let nf = n as f64;
    let eps = 1.0 / (2.0 * nf * space as f64);
    // class means h(· | σ')
    let means: BTreeMap<usize, Vec<f64>> = classes
        .iter()
        .map(|(&c, cl)| {
            let mean: Vec<f64> = cl
                .posterior_sum
                .iter()
                .map(|s| s / cl.count as f64)
                .collect();
            (c, mean)
        })
        .collect();
    let mut scores: Vec<(usize, f64)> = Vec::with_capacity(means.len());
    for (&c, mean_c) in &means {
        let f = classes[&c].count as f64 / nf;
        let mut sum = 0.0;
        for (&c2, mean_c2) in &means {
            sum += (mean_c[c2] + eps) / (mean_c2[c] + eps);
        }
        scores.push((c, f * sum));
    }
    finish_outcome(profile, scores)
}

/// Which score the modal-prediction SP rule uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ScoreForm {
    /// `(f + ε) / (g + ε)` — the classical surprisingly-popular criterion.
    #[default]
    Ratio,
    /// `f − g`, kept for comparison experiments.
    Difference,
}

/// Finite-sample SP with modal predictions: vote frequencies `f` against
/// predicted frequencies `g` (from `ModalRanking` predictions, plus the
/// argmax of any `FullPosterior`; `Top`/`TopT` reports contribute votes but
/// no prediction mass). Only observed vote classes can win; ties break
/// toward the lower ordering index.
pub fn sp_vote_modal_scored(profile: &Profile, form: ScoreForm) -> Result<SpOutcome> {
    let n = profile.reports().len();
    if n == 0 {
        return Err(Error::EmptyInput("profile has no reports".into()));
    }
    let space = profile_space(profile)?;
    let mut votes: BTreeMap<usize, usize> = BTreeMap::new();
    let mut preds: BTreeMap<usize, usize> = BTreeMap::new();
    let mut n_pred = 0usize;
    for report in profile.reports() {
        *votes.entry(ordering_index(&report.vote)?).or_insert(0) += 1;
        let predicted = match &report.prediction {
            PredictionReport::ModalRanking(p) => Some(ordering_index(p)?),
            PredictionReport::FullPosterior(w) => {
                let mut best = 0usize;
                for (i, &x) in w.iter().enumerate() {
                    if x > w[best] {
                        best = i;
                    }
                }
                Some(best)
            }
            PredictionReport::Top(_) | PredictionReport::TopT(_) => None,
        };
        if let Some(c) = predicted {
            *preds.entry(c).or_insert(0) += 1;
            n_pred += 1;
        }
    }
    if n_pred == 0 {
        return Err(Error::EmptyInput(
            "no ranking-valued predictions to compare votes against".into(),
        ));
    }
    let eps = 1.0 / (2.0 * n as f64 * space as f64);
    let mut scores: Vec<(usize, f64)> = Vec::with_capacity(votes.len());
    for (&c, &count) in &votes {
        let f = count as f64 / n as f64;
        let g = preds.get(&c).copied().unwrap_or(0) as f64 / n_pred as f64;
        let score = match form {
            ScoreForm::Ratio => (f + eps) / (g + eps),
            ScoreForm::Difference => f - g,
        };
        scores.push((c, score));
    }
    finish_outcome(profile, scores)
}

/// Modal-prediction SP over a full-universe profile with the ratio score.
pub fn sp_vote_modal(profile: &Profile) -> Result<Ranking> {
    if !profile.is_full() {
        return Err(Error::Precondition(
            "modal SP returns a total ranking; aggregate subset profiles with partial_sp".into(),
        ));
    }
    sp_vote_modal_scored(profile, ScoreForm::Ratio)?.winner_total()
}

fn finish_outcome(profile: &Profile, scores: Vec<(usize, f64)>) -> Result<SpOutcome> {
    debug_assert!(!scores.is_empty());
    // scores arrive in ascending class order; strict `>` keeps the lowest
    // index among ties
    let mut best = 0usize;
    for (i, &(_, s)) in scores.iter().enumerate() {
        if s > scores[best].1 {
            best = i;
        }
    }
    let to_ordering = |idx: usize| ordering_from_index(profile.subset(), idx, profile.m());
    let winner = to_ordering(scores[best].0)?;
    let scores = scores
        .into_iter()
        .map(|(c, s)| Ok((to_ordering(c)?, s)))
        .collect::<Result<Vec<_>>>()?;
    Ok(SpOutcome { winner, scores })
}

/// How per-subset SP winners are merged into one ranking.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum PartialAggregator {
    #[default]
    Copeland,
}

/// SP over a collection of subset profiles: runs SP per profile (the
/// full-posterior path when every prediction is a posterior, the modal path
/// otherwise), turns each winning ordering into pairwise wins, and ranks
/// alternatives by Copeland score. Every pair of alternatives must be
/// covered by at least one profile's subset.
pub fn partial_sp(profiles: &[Profile], aggregator: PartialAggregator) -> Result<Ranking> {
    let PartialAggregator::Copeland = aggregator;
    let Some(first) = profiles.first() else {
        return Err(Error::EmptyInput("no profiles to aggregate".into()));
    };
    let m = first.m();
    for p in profiles {
        if p.m() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: p.m(),
            });
        }
    }
    // coverage of all unordered pairs
    let mut covered = vec![vec![false; m]; m];
    for p in profiles {
        let subset = p.subset();
        for (i, &a) in subset.iter().enumerate() {
            for &b in &subset[i + 1..] {
                covered[a][b] = true;
            }
        }
    }
    let missing: Vec<(usize, usize)> = (0..m)
        .flat_map(|a| ((a + 1)..m).map(move |b| (a, b)))
        .filter(|&(a, b)| !covered[a][b])
        .collect();
    if !missing.is_empty() {
        return Err(Error::Coverage { missing });
    }
    // per-subset SP, in parallel; winners joined in profile order
    let winners: Vec<PartialRanking> = profiles
        .par_iter()
        .map(|p| {
            let all_posterior = !p.reports().is_empty()
                && p.reports()
                    .iter()
                    .all(|r| matches!(r.prediction, PredictionReport::FullPosterior(_)));
            let outcome = if all_posterior {
                prediction_normalized_votes(p)?
            } else {
                sp_vote_modal_scored(p, ScoreForm::Ratio)?
            };
            Ok(outcome.winner)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut tally = PairwiseTally::new(m);
    for w in &winners {
        tally.add_partial(w)?;
    }
    Ok(tally.copeland_ranking())
}
