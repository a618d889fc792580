//! Bayesian parameter inference for the mixture models.
//!
//! Votes and predictions from one population are modeled jointly: each
//! voter's latent group draws both their vote and their prediction, so the
//! likelihood is a mixture over groups of per-channel terms. Three flavors
//! are exposed:
//!
//! * [`cmm_infer`] — the Gaussian-on-distance approximation: observed
//!   Kendall-tau distances (vote and prediction, per voter) are modeled as
//!   mixtures of normals whose means and standard deviations are the exact
//!   Mallows distance moments at each dispersion.
//! * [`cmm_exact_infer`] — the exact Mallows mixture likelihood on ranking
//!   pairs, available whenever the ground truth is known.
//! * [`cmpl_infer`] — the exact Plackett-Luce mixture likelihood, with
//!   within-row monotonicity and the between-group dominance chain enforced
//!   by proposal rejection.
//!
//! All three run adaptive random-walk Metropolis (see [`mcmc`]) over
//! unconstrained coordinates: proportions through a pinned softmax,
//! dispersions on log scale (truncated to `(0, 1]`), strength rows through
//! per-row pinned softmaxes. Group labels are identified after sampling by
//! relabeling each chain (ascending vote dispersion for Mallows, descending
//! first-position vote strength for Plackett-Luce; the latter is already
//! forced by the dominance constraint).
//!
//! [`predict_full_ranking_cmpl`] turns several subset-level fits into a
//! distribution over full rankings by bootstrap-averaging per-alternative
//! strengths across the subsets that contain each alternative.

pub(crate) mod mcmc;

use crate::error::{Error, Result};
use crate::models::{check_dominance, mallows_distance_moments, mallows_normalizer};
use crate::rankings::{kendall_tau, Ranking};
use mcmc::{
    dirichlet_softmax_term, ess, log_normal_pdf, log_sum_exp, mix_seed, quantile, run_rwm,
    softmax_pinned, softmax_pinned_inverse, split_rhat,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};

/// Random-walk Metropolis settings. Defaults follow the four-chain,
/// 8000-iteration, 2000-warmup convention.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct McmcConfig {
    pub chains: usize,
    pub iterations: usize,
    pub warmup: usize,
    /// Initial proposal standard deviation; adapted during warmup.
    pub proposal_scale: f64,
    pub seed: u64,
}

impl Default for McmcConfig {
    fn default() -> Self {
        McmcConfig {
            chains: 4,
            iterations: 8000,
            warmup: 2000,
            proposal_scale: 0.1,
            seed: 0,
        }
    }
}

impl McmcConfig {
    pub fn validate(&self) -> Result<()> {
        if self.chains == 0 {
            return Err(Error::InvalidParameter("need at least one chain".into()));
        }
        if self.warmup >= self.iterations {
            return Err(Error::InvalidParameter(format!(
                "warmup ({}) must be smaller than iterations ({})",
                self.warmup, self.iterations
            )));
        }
        if !(self.proposal_scale > 0.0 && self.proposal_scale.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "proposal scale must be positive, got {}",
                self.proposal_scale
            )));
        }
        Ok(())
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// Location/scale pair for a (truncated) normal prior on a dispersion.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianPrior {
    pub location: f64,
    pub scale: f64,
}

/// Priors for one inference run. The proportion prior is a Dirichlet
/// concentration vector; per-group dispersion priors (Mallows) or per-row
/// strength concentrations (Plackett-Luce) are given separately for the
/// vote and prediction channels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PriorSpec {
    pub proportion_concentration: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vote_dispersion: Option<Vec<GaussianPrior>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prediction_dispersion: Option<Vec<GaussianPrior>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vote_strength_concentration: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prediction_strength_concentration: Option<Vec<Vec<f64>>>,
}

fn positive(v: &[f64], what: &str) -> Result<()> {
    if v.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
        return Err(Error::InvalidParameter(format!(
            "{what} must be positive and finite"
        )));
    }
    Ok(())
}

impl PriorSpec {
    /// Mallows priors: Dirichlet on proportions, per-group normal
    /// location/scale on the vote and prediction dispersions.
    pub fn cmm(
        proportion: Vec<f64>,
        vote: Vec<GaussianPrior>,
        prediction: Vec<GaussianPrior>,
    ) -> Result<Self> {
        positive(&proportion, "proportion concentrations")?;
        for pr in vote.iter().chain(&prediction) {
            if !(pr.scale > 0.0 && pr.scale.is_finite()) {
                return Err(Error::InvalidParameter(
                    "dispersion prior scales must be positive".into(),
                ));
            }
        }
        if vote.len() != proportion.len() || prediction.len() != proportion.len() {
            return Err(Error::DimensionMismatch {
                expected: proportion.len(),
                got: vote.len().min(prediction.len()),
            });
        }
        Ok(PriorSpec {
            proportion_concentration: proportion,
            vote_dispersion: Some(vote),
            prediction_dispersion: Some(prediction),
            vote_strength_concentration: None,
            prediction_strength_concentration: None,
        })
    }

    /// Plackett-Luce priors: Dirichlet on proportions and per-row Dirichlet
    /// concentrations on the vote and prediction strength rows.
    pub fn cmpl(
        proportion: Vec<f64>,
        vote_rows: Vec<Vec<f64>>,
        prediction_rows: Vec<Vec<f64>>,
    ) -> Result<Self> {
        positive(&proportion, "proportion concentrations")?;
        if vote_rows.len() != proportion.len() || prediction_rows.len() != proportion.len() {
            return Err(Error::DimensionMismatch {
                expected: proportion.len(),
                got: vote_rows.len().min(prediction_rows.len()),
            });
        }
        for row in vote_rows.iter().chain(&prediction_rows) {
            positive(row, "strength concentrations")?;
        }
        Ok(PriorSpec {
            proportion_concentration: proportion,
            vote_dispersion: None,
            prediction_dispersion: None,
            vote_strength_concentration: Some(vote_rows),
            prediction_strength_concentration: Some(prediction_rows),
        })
    }

    /// Weakly informative Mallows defaults: concentration 2 per group
    /// (4 on the last, treating the noisiest group as the most common) and
    /// evenly spread dispersion locations.
    pub fn default_cmm(g: usize) -> Self {
        let mut conc = vec![2.0; g];
        if g > 1 {
            conc[g - 1] = 4.0;
        }
        let priors: Vec<GaussianPrior> = (0..g)
            .map(|i| GaussianPrior {
                location: (i + 1) as f64 / (g + 1) as f64,
                scale: 0.5,
            })
            .collect();
        PriorSpec::cmm(conc, priors.clone(), priors).expect("defaults are valid")
    }

    /// Plackett-Luce defaults: proportion prior as in [`Self::default_cmm`],
    /// concentration 3 on every strength entry.
    pub fn default_cmpl(g: usize, m: usize) -> Self {
        let mut conc = vec![2.0; g];
        if g > 1 {
            conc[g - 1] = 4.0;
        }
        let rows = vec![vec![3.0; m]; g];
        PriorSpec::cmpl(conc, rows.clone(), rows).expect("defaults are valid")
    }

    fn require_cmm(&self, g: usize) -> Result<(&[f64], &[GaussianPrior], &[GaussianPrior])> {
        let conc = self.check_proportion(g)?;
        let vote = self
            .vote_dispersion
            .as_deref()
            .ok_or_else(|| Error::InvalidParameter("missing vote dispersion priors".into()))?;
        let pred = self.prediction_dispersion.as_deref().ok_or_else(|| {
            Error::InvalidParameter("missing prediction dispersion priors".into())
        })?;
        if vote.len() != g || pred.len() != g {
            return Err(Error::DimensionMismatch {
                expected: g,
                got: vote.len().min(pred.len()),
            });
        }
        Ok((conc, vote, pred))
    }

    fn require_cmpl(&self, g: usize, m: usize) -> Result<(&[f64], &[Vec<f64>], &[Vec<f64>])> {
        let conc = self.check_proportion(g)?;
        let vote = self.vote_strength_concentration.as_deref().ok_or_else(|| {
            Error::InvalidParameter("missing vote strength concentrations".into())
        })?;
        let pred = self
            .prediction_strength_concentration
            .as_deref()
            .ok_or_else(|| {
                Error::InvalidParameter("missing prediction strength concentrations".into())
            })?;
        if vote.len() != g || pred.len() != g {
            return Err(Error::DimensionMismatch {
                expected: g,
                got: vote.len().min(pred.len()),
            });
        }
        for row in vote.iter().chain(pred) {
            if row.len() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    got: row.len(),
                });
            }
        }
        Ok((conc, vote, pred))
    }

    fn check_proportion(&self, g: usize) -> Result<&[f64]> {
        if self.proportion_concentration.len() != g {
            return Err(Error::DimensionMismatch {
                expected: g,
                got: self.proportion_concentration.len(),
            });
        }
        positive(&self.proportion_concentration, "proportion concentrations")?;
        Ok(&self.proportion_concentration)
    }
}

/// Per-parameter posterior summary row.
#[derive(Clone, Debug, PartialEq)]
pub struct ParameterSummary {
    pub name: String,
    pub mean: f64,
    pub sd: f64,
    pub q05: f64,
    pub q95: f64,
    pub rhat: f64,
    pub ess: f64,
}

/// Posterior draws in constrained (model) coordinates, kept per chain so
/// split-chain diagnostics remain possible after the fact.
#[derive(Clone, Debug)]
pub struct PosteriorSamples {
    names: Vec<String>,
    chains: Vec<Vec<Vec<f64>>>,
    acceptance_rate: f64,
    notes: Vec<String>,
}

impl PosteriorSamples {
    pub fn from_parts(
        names: Vec<String>,
        chains: Vec<Vec<Vec<f64>>>,
        acceptance_rate: f64,
        notes: Vec<String>,
    ) -> Result<Self> {
        if names.is_empty() {
            return Err(Error::EmptyInput("no parameters".into()));
        }
        if chains.is_empty() || chains.iter().any(|c| c.is_empty()) {
            return Err(Error::EmptyInput("every chain needs at least one draw".into()));
        }
        for draw in chains.iter().flatten() {
            if draw.len() != names.len() {
                return Err(Error::DimensionMismatch {
                    expected: names.len(),
                    got: draw.len(),
                });
            }
        }
        Ok(PosteriorSamples {
            names,
            chains,
            acceptance_rate,
            notes,
        })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn n_chains(&self) -> usize {
        self.chains.len()
    }

    pub fn total_draws(&self) -> usize {
        self.chains.iter().map(|c| c.len()).sum()
    }

    /// Flat view over all chains in chain order.
    pub fn draws(&self) -> impl Iterator<Item = &[f64]> {
        self.chains.iter().flatten().map(|d| d.as_slice())
    }

    pub fn draw(&self, mut idx: usize) -> &[f64] {
        for chain in &self.chains {
            if idx < chain.len() {
                return &chain[idx];
            }
            idx -= chain.len();
        }
        panic!("draw index out of range");
    }

    pub fn acceptance_rate(&self) -> f64 {
        self.acceptance_rate
    }

    pub fn notes(&self) -> &[String] {
        &self.notes
    }

    fn param_chains(&self, idx: usize) -> Vec<Vec<f64>> {
        self.chains
            .iter()
            .map(|c| c.iter().map(|d| d[idx]).collect())
            .collect()
    }

    pub fn posterior_mean(&self, name: &str) -> Option<f64> {
        let idx = self.index_of(name)?;
        let (mut sum, mut count) = (0.0, 0usize);
        for d in self.draws() {
            sum += d[idx];
            count += 1;
        }
        Some(sum / count as f64)
    }

    /// Mean, sd, central 90% interval, split-R̂ and effective sample size
    /// for every parameter.
    pub fn summary(&self) -> Vec<ParameterSummary> {
        (0..self.names.len())
            .map(|idx| {
                let per_chain = self.param_chains(idx);
                let mut flat: Vec<f64> = per_chain.iter().flatten().copied().collect();
                let n = flat.len() as f64;
                let mean = flat.iter().sum::<f64>() / n;
                let sd = if flat.len() > 1 {
                    (flat.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
                } else {
                    0.0
                };
                flat.sort_by(|a, b| a.partial_cmp(b).unwrap());
                ParameterSummary {
                    name: self.names[idx].clone(),
                    mean,
                    sd,
                    q05: quantile(&flat, 0.05),
                    q95: quantile(&flat, 0.95),
                    rhat: split_rhat(&per_chain),
                    ess: ess(&per_chain),
                }
            })
            .collect()
    }

    /// The summary as CSV: `parameter,mean,sd,q05,q95,rhat,ess`.
    pub fn summary_csv(&self) -> String {
        let mut out = String::from("parameter,mean,sd,q05,q95,rhat,ess\n");
        for row in self.summary() {
            out.push_str(&format!(
                "{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}\n",
                row.name, row.mean, row.sd, row.q05, row.q95, row.rhat, row.ess
            ));
        }
        out
    }
}

/// Runs `cfg.chains` independent chains in parallel with per-chain seed
/// streams and returns unconstrained draws plus the pooled post-warmup
/// acceptance rate.
fn run_chains<'a, F>(
    cfg: &McmcConfig,
    init: &[f64],
    make_logpost: F,
) -> Result<(Vec<Vec<Vec<f64>>>, f64)>
where
    F: Fn() -> Box<dyn FnMut(&[f64]) -> f64 + Send + 'a> + Sync,
{
    let runs: Result<Vec<_>> = (0..cfg.chains)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(cfg.seed, c as u64));
            let logpost = make_logpost();
            run_rwm(
                init,
                logpost,
                cfg.iterations,
                cfg.warmup,
                cfg.proposal_scale,
                &mut rng,
            )
        })
        .collect();
    let runs = runs?;
    let accepted: usize = runs.iter().map(|r| r.accepted).sum();
    let kept: usize = runs.iter().map(|r| r.kept).sum();
    let rate = accepted as f64 / kept.max(1) as f64;
    Ok((runs.into_iter().map(|r| r.draws).collect(), rate))
}

/// Relabels groups chain by chain: groups are ranked by the chain mean of
/// one key slot and every draw's group-indexed blocks are permuted
/// accordingly. `group_slots[i]` lists all flat parameter indices owned by
/// group `i`, in identical slot order across groups.
fn relabel_chains(
    chains: &mut [Vec<Vec<f64>>],
    group_slots: &[Vec<usize>],
    key_slot: usize,
    ascending: bool,
) {
    let g = group_slots.len();
    if g < 2 {
        return;
    }
    for chain in chains.iter_mut() {
        if chain.is_empty() {
            continue;
        }
        let mut keys = vec![0.0; g];
        for draw in chain.iter() {
            for (i, slots) in group_slots.iter().enumerate() {
                keys[i] += draw[slots[key_slot]];
            }
        }
        let mut perm: Vec<usize> = (0..g).collect();
        perm.sort_by(|&a, &b| {
            let ord = keys[a].partial_cmp(&keys[b]).unwrap_or(std::cmp::Ordering::Equal);
            if ascending {
                ord
            } else {
                ord.reverse()
            }
        });
        if perm.iter().enumerate().all(|(i, &p)| i == p) {
            continue;
        }
        for draw in chain.iter_mut() {
            let old = draw.clone();
            for (rank, &src) in perm.iter().enumerate() {
                for (slot, &dst) in group_slots[rank].iter().enumerate() {
                    draw[dst] = old[group_slots[src][slot]];
                }
            }
        }
    }
}

fn map_chains(
    unconstrained: Vec<Vec<Vec<f64>>>,
    to_constrained: impl Fn(&[f64]) -> Vec<f64> + Sync + Send,
) -> Vec<Vec<Vec<f64>>> {
    unconstrained
        .into_par_iter()
        .map(|chain| chain.iter().map(|x| to_constrained(x)).collect())
        .collect()
}

const PHI_TRUNCATION_NOTE: &str =
    "dispersion priors are normal truncated to (0, 1]; posterior mass at phi > 1 is excluded";

/// Shared prior + transform bookkeeping for the two Mallows-likelihood
/// variants: log prior density of a proposal in unconstrained coordinates,
/// or `-inf` when a dispersion exceeds 1.
fn cmm_log_prior(
    x: &[f64],
    g: usize,
    conc: &[f64],
    vote_prior: &[GaussianPrior],
    pred_prior: &[GaussianPrior],
) -> f64 {
    let p = softmax_pinned(&x[..g - 1]);
    let mut lp = dirichlet_softmax_term(&p, conc);
    for (block, priors) in [(0, vote_prior), (1, pred_prior)] {
        for i in 0..g {
            let w = x[g - 1 + block * g + i];
            if w > 0.0 {
                return f64::NEG_INFINITY;
            }
            let phi = w.exp();
            let pr = &priors[i];
            // truncated-normal kernel plus the log-scale Jacobian
            lp += -0.5 * ((phi - pr.location) / pr.scale).powi(2) + w;
        }
    }
    lp
}

fn cmm_constrain(x: &[f64], g: usize) -> Vec<f64> {
    let mut out = softmax_pinned(&x[..g - 1]);
    out.extend(x[g - 1..3 * g - 1].iter().map(|w| w.exp()));
    out
}

fn cmm_names(g: usize) -> Vec<String> {
    let mut names = Vec::with_capacity(3 * g);
    for i in 1..=g {
        names.push(format!("p[{i}]"));
    }
    for i in 1..=g {
        names.push(format!("phi_vote[{i}]"));
    }
    for i in 1..=g {
        names.push(format!("phi_pred[{i}]"));
    }
    names
}

fn cmm_group_slots(g: usize) -> Vec<Vec<usize>> {
    (0..g).map(|i| vec![i, g + i, 2 * g + i]).collect()
}

/// Gaussian-on-distance inference for a Mallows mixture: each observation
/// is a `(vote distance, prediction distance)` pair measured against the
/// ground truth, modeled as `Σ_g p_g·N(d_v; μ(φ_vg), s(φ_vg))·N(d_p; …)`
/// with exact distance moments per dispersion (cached on a 1e-3 grid).
pub fn cmm_infer(
    data: &[(f64, f64)],
    m: usize,
    g: usize,
    priors: &PriorSpec,
    cfg: &McmcConfig,
) -> Result<PosteriorSamples> {
    cfg.validate()?;
    if g == 0 {
        return Err(Error::InvalidParameter("need at least one group".into()));
    }
    if m < 2 {
        return Err(Error::InvalidParameter(
            "distances are only informative for m ≥ 2".into(),
        ));
    }
    let max_d = (m * (m - 1) / 2) as f64;
    for &(dv, dp) in data {
        if !(0.0..=max_d).contains(&dv) || !(0.0..=max_d).contains(&dp) {
            return Err(Error::InvalidParameter(format!(
                "distance pair ({dv}, {dp}) outside [0, {max_d}]"
            )));
        }
    }
    let (conc, vote_prior, pred_prior) = priors.require_cmm(g)?;
    let init = cmm_init(conc, vote_prior, pred_prior);

    let (uchains, acceptance) = run_chains(cfg, &init, || {
        let mut cache: HashMap<u32, (f64, f64)> = HashMap::new();
        Box::new(move |x: &[f64]| {
            let mut lp = cmm_log_prior(x, g, conc, vote_prior, pred_prior);
            if !lp.is_finite() {
                return f64::NEG_INFINITY;
            }
            if data.is_empty() {
                return lp;
            }
            let p = softmax_pinned(&x[..g - 1]);
            let ln_p: Vec<f64> = p.iter().map(|v| v.ln()).collect();
            // (μ, s) per group per channel from the rounded-φ cache
            let mut moments = [Vec::with_capacity(g), Vec::with_capacity(g)];
            for (block, mom) in moments.iter_mut().enumerate() {
                for i in 0..g {
                    let phi = x[g - 1 + block * g + i].exp();
                    let key = ((phi * 1000.0).round() as u32).max(1);
                    let entry = cache.entry(key).or_insert_with(|| {
                        mallows_distance_moments(key as f64 / 1000.0, m)
                            .unwrap_or((f64::NAN, f64::NAN))
                    });
                    mom.push(*entry);
                }
            }
            let mut terms = vec![0.0; g];
            for &(dv, dp) in data {
                for i in 0..g {
                    let (mv, sv) = moments[0][i];
                    let (mp, sp) = moments[1][i];
                    terms[i] =
                        ln_p[i] + log_normal_pdf(dv, mv, sv) + log_normal_pdf(dp, mp, sp);
                }
                lp += log_sum_exp(&terms);
            }
            if lp.is_nan() {
                f64::NEG_INFINITY
            } else {
                lp
            }
        })
    })?;
    finish_cmm(uchains, acceptance, g)
}

/// Exact-likelihood inference for a Mallows mixture on `(vote, prediction)`
/// ranking pairs with a known ground truth.
pub fn cmm_exact_infer(
    data: &[(Ranking, Ranking)],
    ground_truth: &Ranking,
    g: usize,
    priors: &PriorSpec,
    cfg: &McmcConfig,
) -> Result<PosteriorSamples> {
    cfg.validate()?;
    if g == 0 {
        return Err(Error::InvalidParameter("need at least one group".into()));
    }
    let m = ground_truth.m();
    if m < 2 {
        return Err(Error::InvalidParameter(
            "rankings are only informative for m ≥ 2".into(),
        ));
    }
    let (conc, vote_prior, pred_prior) = priors.require_cmm(g)?;
    // the likelihood depends on the data only through distance-pair counts
    let mut pair_counts: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for (vote, pred) in data {
        let dv = kendall_tau(vote, ground_truth)?;
        let dp = kendall_tau(pred, ground_truth)?;
        *pair_counts.entry((dv, dp)).or_insert(0) += 1;
    }
    let pairs: Vec<((f64, f64), f64)> = pair_counts
        .into_iter()
        .map(|((dv, dp), c)| ((dv as f64, dp as f64), c as f64))
        .collect();
    let init = cmm_init(conc, vote_prior, pred_prior);

    let pairs = &pairs;
    let (uchains, acceptance) = run_chains(cfg, &init, || {
        Box::new(move |x: &[f64]| {
            let mut lp = cmm_log_prior(x, g, conc, vote_prior, pred_prior);
            if !lp.is_finite() {
                return f64::NEG_INFINITY;
            }
            if pairs.is_empty() {
                return lp;
            }
            let p = softmax_pinned(&x[..g - 1]);
            let ln_p: Vec<f64> = p.iter().map(|v| v.ln()).collect();
            // per group and channel: (ln φ, ln Z(φ))
            let mut kern = [Vec::with_capacity(g), Vec::with_capacity(g)];
            for (block, k) in kern.iter_mut().enumerate() {
                for i in 0..g {
                    let w = x[g - 1 + block * g + i];
                    match mallows_normalizer(w.exp(), m) {
                        Ok(z) => k.push((w, z.ln())),
                        Err(_) => return f64::NEG_INFINITY,
                    }
                }
            }
            let mut terms = vec![0.0; g];
            for &((dv, dp), count) in pairs {
                for i in 0..g {
                    let (wv, lzv) = kern[0][i];
                    let (wp, lzp) = kern[1][i];
                    terms[i] = ln_p[i] + dv * wv - lzv + dp * wp - lzp;
                }
                lp += count * log_sum_exp(&terms);
            }
            if lp.is_nan() {
                f64::NEG_INFINITY
            } else {
                lp
            }
        })
    })?;
    finish_cmm(uchains, acceptance, g)
}

fn cmm_init(
    conc: &[f64],
    vote_prior: &[GaussianPrior],
    pred_prior: &[GaussianPrior],
) -> Vec<f64> {
    let total: f64 = conc.iter().sum();
    let p: Vec<f64> = conc.iter().map(|a| a / total).collect();
    let mut init = softmax_pinned_inverse(&p);
    for priors in [vote_prior, pred_prior] {
        for pr in priors {
            init.push(pr.location.clamp(0.02, 1.0).ln());
        }
    }
    init
}

fn finish_cmm(
    uchains: Vec<Vec<Vec<f64>>>,
    acceptance: f64,
    g: usize,
) -> Result<PosteriorSamples> {
    let mut chains = map_chains(uchains, |x| cmm_constrain(x, g));
    relabel_chains(&mut chains, &cmm_group_slots(g), 1, true);
    PosteriorSamples::from_parts(
        cmm_names(g),
        chains,
        acceptance,
        vec![
            PHI_TRUNCATION_NOTE.into(),
            "groups relabeled per chain by ascending mean vote dispersion".into(),
        ],
    )
}

/// `ln Pr(order | identity center, strengths)`: the sequential-choice
/// probability of picking `order` (a permutation of `0..m` expressed in
/// center positions). The final factor is always 1 and is skipped.
fn ln_pl_identity(order: &[usize], row: &[f64]) -> f64 {
    let mut rem: f64 = row.iter().sum();
    let mut lp = 0.0;
    for &idx in &order[..order.len() - 1] {
        lp += (row[idx] / rem).ln();
        rem -= row[idx];
    }
    lp
}

/// Exact-likelihood inference for a Plackett-Luce mixture on
/// `(vote, prediction)` ranking pairs with a known ground truth. Strength
/// rows are constrained to be non-increasing with a between-group dominance
/// chain (per channel); violating proposals are rejected.
pub fn cmpl_infer(
    data: &[(Ranking, Ranking)],
    ground_truth: &Ranking,
    g: usize,
    priors: &PriorSpec,
    cfg: &McmcConfig,
) -> Result<PosteriorSamples> {
    cfg.validate()?;
    if g == 0 {
        return Err(Error::InvalidParameter("need at least one group".into()));
    }
    let m = ground_truth.m();
    if m < 2 {
        return Err(Error::InvalidParameter(
            "rankings are only informative for m ≥ 2".into(),
        ));
    }
    let (conc, vote_conc, pred_conc) = priors.require_cmpl(g, m)?;

    // express every ranking in center positions and deduplicate
    let pos = ground_truth.positions();
    let mut uniq_votes: Vec<Vec<usize>> = Vec::new();
    let mut uniq_preds: Vec<Vec<usize>> = Vec::new();
    let mut vote_ids: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    let mut pred_ids: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    let mut pair_counts: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for (vote, pred) in data {
        if vote.m() != m || pred.m() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: vote.m().min(pred.m()),
            });
        }
        let tv: Vec<usize> = vote.as_slice().iter().map(|&a| pos[a]).collect();
        let tp: Vec<usize> = pred.as_slice().iter().map(|&a| pos[a]).collect();
        let vi = *vote_ids.entry(tv.clone()).or_insert_with(|| {
            uniq_votes.push(tv);
            uniq_votes.len() - 1
        });
        let pi = *pred_ids.entry(tp.clone()).or_insert_with(|| {
            uniq_preds.push(tp);
            uniq_preds.len() - 1
        });
        *pair_counts.entry((vi, pi)).or_insert(0) += 1;
    }
    let pairs: Vec<((usize, usize), f64)> = pair_counts
        .into_iter()
        .map(|(k, c)| (k, c as f64))
        .collect();

    // interior init: per-group geometric strength rows, steeper for earlier
    // groups, so monotonicity and the dominance chain hold with strict
    // margins (an all-equal start would sit on a corner the sampler cannot
    // leave, since almost no joint perturbation keeps every constraint)
    let total_p: f64 = conc.iter().sum();
    let p0: Vec<f64> = conc.iter().map(|a| a / total_p).collect();
    let mut init = softmax_pinned_inverse(&p0);
    for _channel in 0..2 {
        for r in 0..g {
            let rho = if g == 1 {
                0.7
            } else {
                0.55 + 0.4 * r as f64 / (g - 1) as f64
            };
            let mut row: Vec<f64> = (0..m).map(|j| rho.powi(j as i32)).collect();
            let total: f64 = row.iter().sum();
            for v in &mut row {
                *v /= total;
            }
            init.extend(softmax_pinned_inverse(&row));
        }
    }

    let uniq_votes = &uniq_votes;
    let uniq_preds = &uniq_preds;
    let pairs = &pairs;
    let (uchains, acceptance) = run_chains(cfg, &init, || {
        Box::new(move |x: &[f64]| {
            let p = softmax_pinned(&x[..g - 1]);
            let mut lp = dirichlet_softmax_term(&p, conc);
            let stride = m - 1;
            let mut rows: Vec<Vec<Vec<f64>>> = Vec::with_capacity(2);
            for (block, concs) in [vote_conc, pred_conc].into_iter().enumerate() {
                let offset = g - 1 + block * g * stride;
                let mut out = Vec::with_capacity(g);
                for r in 0..g {
                    let free = &x[offset + r * stride..offset + (r + 1) * stride];
                    let row = softmax_pinned(free);
                    if row.windows(2).any(|w| w[1] > w[0] + 1e-12) {
                        return f64::NEG_INFINITY;
                    }
                    lp += dirichlet_softmax_term(&row, &concs[r]);
                    out.push(row);
                }
                if !check_dominance(&out) {
                    return f64::NEG_INFINITY;
                }
                rows.push(out);
            }
            if pairs.is_empty() {
                return lp;
            }
            let ln_p: Vec<f64> = p.iter().map(|v| v.ln()).collect();
            let table = |rows: &[Vec<f64>], uniq: &[Vec<usize>]| -> Vec<Vec<f64>> {
                rows.iter()
                    .map(|row| uniq.iter().map(|t| ln_pl_identity(t, row)).collect())
                    .collect()
            };
            let tv = table(&rows[0], uniq_votes);
            let tp = table(&rows[1], uniq_preds);
            let mut terms = vec![0.0; g];
            for &((vi, pi), count) in pairs {
                for i in 0..g {
                    terms[i] = ln_p[i] + tv[i][vi] + tp[i][pi];
                }
                lp += count * log_sum_exp(&terms);
            }
            if lp.is_nan() {
                f64::NEG_INFINITY
            } else {
                lp
            }
        })
    })?;

    let mut chains = map_chains(uchains, |x| {
        let mut out = softmax_pinned(&x[..g - 1]);
        let stride = m - 1;
        for block in 0..2 {
            let offset = g - 1 + block * g * stride;
            for r in 0..g {
                out.extend(softmax_pinned(&x[offset + r * stride..offset + (r + 1) * stride]));
            }
        }
        out
    });
    let group_slots: Vec<Vec<usize>> = (0..g)
        .map(|i| {
            let mut slots = vec![i];
            slots.extend(g + i * m..g + (i + 1) * m);
            slots.extend(g + g * m + i * m..g + g * m + (i + 1) * m);
            slots
        })
        .collect();
    relabel_chains(&mut chains, &group_slots, 1, false);
    let mut names = Vec::with_capacity(g + 2 * g * m);
    for i in 1..=g {
        names.push(format!("p[{i}]"));
    }
    for channel in ["theta_vote", "theta_pred"] {
        for r in 1..=g {
            for j in 1..=m {
                names.push(format!("{channel}[{r}][{j}]"));
            }
        }
    }
    PosteriorSamples::from_parts(
        names,
        chains,
        acceptance,
        vec![
            "strength rows constrained non-increasing with a between-group dominance chain"
                .into(),
            "groups relabeled per chain by descending mean first-position vote strength".into(),
        ],
    )
}

/// Distribution over full rankings stitched from subset-level fits.
#[derive(Clone, Debug)]
pub struct StitchedPrediction {
    /// Per group: distinct replicate rankings with their bootstrap counts,
    /// most frequent first (ties broken lexicographically).
    pub group_distributions: Vec<Vec<(Ranking, usize)>>,
    /// Per group: the modal replicate.
    pub group_modes: Vec<Ranking>,
    /// Per group: replicate counts indexed by Kendall-tau distance to the
    /// reference ranking.
    pub kt_histograms: Vec<Vec<usize>>,
    pub bootstrap: usize,
}

impl StitchedPrediction {
    /// Average Kendall-tau distance of one group's replicates to the
    /// reference.
    pub fn mean_kt(&self, group: usize) -> f64 {
        let hist = &self.kt_histograms[group];
        let total: usize = hist.iter().sum();
        let weighted: usize = hist.iter().enumerate().map(|(d, &c)| d * c).sum();
        weighted as f64 / total as f64
    }
}

/// Bootstrap-stitches per-subset Plackett-Luce fits into full-ranking
/// predictions. Each fit covers one subset of alternatives, listed in the
/// subset's reference order so strength entry `j` belongs to `subset[j]`.
/// Per replicate and group: draw one posterior sample per subset, average
/// each alternative's strengths over the subsets containing it,
/// renormalize, and rank by iterative argmax (ties to the lower id).
pub fn predict_full_ranking_cmpl(
    subset_fits: &[(Vec<usize>, PosteriorSamples)],
    universe_m: usize,
    bootstrap: usize,
    seed: u64,
    reference: &Ranking,
) -> Result<StitchedPrediction> {
    if subset_fits.is_empty() {
        return Err(Error::EmptyInput("no subset fits".into()));
    }
    if bootstrap == 0 {
        return Err(Error::InvalidParameter("need at least one bootstrap replicate".into()));
    }
    if reference.m() != universe_m {
        return Err(Error::DimensionMismatch {
            expected: universe_m,
            got: reference.m(),
        });
    }
    let mut covered = vec![false; universe_m];
    for (subset, _) in subset_fits {
        if subset.is_empty() {
            return Err(Error::InvalidRanking("empty subset in fits".into()));
        }
        let mut seen = subset.clone();
        seen.sort_unstable();
        if seen.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidRanking("subset has repeats".into()));
        }
        for &a in subset {
            if a >= universe_m {
                return Err(Error::InvalidRanking(format!(
                    "alternative {a} out of range for universe of {universe_m}"
                )));
            }
            covered[a] = true;
        }
    }
    let missing: Vec<usize> = (0..universe_m).filter(|&a| !covered[a]).collect();
    if !missing.is_empty() {
        return Err(Error::UncoveredAlternatives(missing));
    }

    // locate each fit's vote-strength rows: slot_map[fit][group][j]
    let mut g_count = None;
    let mut slot_maps: Vec<Vec<Vec<usize>>> = Vec::with_capacity(subset_fits.len());
    for (subset, fit) in subset_fits {
        let k = subset.len();
        let mut rows = Vec::new();
        for r in 1.. {
            let first = fit.index_of(&format!("theta_vote[{r}][1]"));
            let Some(first) = first else { break };
            let mut row = vec![first];
            for j in 2..=k {
                row.push(fit.index_of(&format!("theta_vote[{r}][{j}]")).ok_or_else(|| {
                    Error::InvalidParameter(format!(
                        "fit for subset {subset:?} lacks theta_vote[{r}][{j}]"
                    ))
                })?);
            }
            rows.push(row);
        }
        if rows.is_empty() {
            return Err(Error::InvalidParameter(
                "fit has no theta_vote parameters".into(),
            ));
        }
        match g_count {
            None => g_count = Some(rows.len()),
            Some(g) if g == rows.len() => {}
            Some(g) => {
                return Err(Error::DimensionMismatch {
                    expected: g,
                    got: rows.len(),
                });
            }
        }
        slot_maps.push(rows);
    }
    let g = g_count.unwrap();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let max_d = universe_m * (universe_m - 1) / 2;
    let mut counts: Vec<BTreeMap<Vec<usize>, usize>> = vec![BTreeMap::new(); g];
    let mut histograms = vec![vec![0usize; max_d + 1]; g];
    for _ in 0..bootstrap {
        let picks: Vec<usize> = subset_fits
            .iter()
            .map(|(_, fit)| rng.random_range(0..fit.total_draws()))
            .collect();
        for group in 0..g {
            let mut sums = vec![0.0; universe_m];
            let mut hits = vec![0usize; universe_m];
            for (fi, (subset, fit)) in subset_fits.iter().enumerate() {
                let draw = fit.draw(picks[fi]);
                for (j, &alt) in subset.iter().enumerate() {
                    sums[alt] += draw[slot_maps[fi][group][j]];
                    hits[alt] += 1;
                }
            }
            let strengths: Vec<f64> = sums
                .iter()
                .zip(&hits)
                .map(|(&s, &h)| s / h as f64)
                .collect();
            let total: f64 = strengths.iter().sum();
            let strengths: Vec<f64> = strengths.iter().map(|s| s / total).collect();
            let mut order: Vec<usize> = (0..universe_m).collect();
            order.sort_by(|&a, &b| {
                strengths[b]
                    .partial_cmp(&strengths[a])
                    .unwrap_or(std::cmp::Ordering::Equal)
                    .then(a.cmp(&b))
            });
            let ranking = Ranking::new(order)?;
            histograms[group][kendall_tau(&ranking, reference)?] += 1;
            *counts[group].entry(ranking.as_slice().to_vec()).or_insert(0) += 1;
        }
    }

    let mut group_distributions = Vec::with_capacity(g);
    let mut group_modes = Vec::with_capacity(g);
    for group_counts in counts {
        let mut dist: Vec<(Ranking, usize)> = group_counts
            .into_iter()
            .map(|(order, c)| (Ranking::new(order).unwrap(), c))
            .collect();
        dist.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.as_slice().cmp(b.0.as_slice())));
        group_modes.push(dist[0].0.clone());
        group_distributions.push(dist);
    }
    Ok(StitchedPrediction {
        group_distributions,
        group_modes,
        kt_histograms: histograms,
        bootstrap,
    })
}
