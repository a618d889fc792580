//! Adaptive random-walk Metropolis driver and chain diagnostics.
//!
//! The sampler walks an unconstrained parameter vector; model adapters in
//! the parent module handle reparameterization (softmax for simplices,
//! log-scale for dispersions) plus the corresponding Jacobians, and return
//! `-inf` for proposals that land outside hard constraints. Adaptation is
//! confined to warmup — a global scale targets ~30% acceptance while the
//! proposal shape tracks the running warmup covariance (proposals are drawn
//! through its Cholesky factor), so posterior ridges that correlate
//! coordinates stay traversable and the retained draws come from a fixed
//! kernel.

use crate::error::{Error, Result};
use rand::Rng;
use rand_distr::StandardNormal;

/// Counter-based seed derivation (splitmix64 finalizer) so chains, trials,
/// and bootstrap replicates get decorrelated streams that do not depend on
/// scheduling order or thread count.
pub(crate) fn mix_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub(crate) struct ChainRun {
    /// Post-warmup states in unconstrained coordinates.
    pub draws: Vec<Vec<f64>>,
    pub accepted: usize,
    pub kept: usize,
}

/// One Metropolis chain. `logpost` may return `-inf` (hard rejection) or
/// NaN (treated as rejection); it must be finite at `init`.
pub(crate) fn run_rwm<F, R>(
    init: &[f64],
    mut logpost: F,
    iterations: usize,
    warmup: usize,
    scale0: f64,
    rng: &mut R,
) -> Result<ChainRun>
where
    F: FnMut(&[f64]) -> f64,
    R: Rng + ?Sized,
{
    let dim = init.len();
    let mut x = init.to_vec();
    let mut lx = logpost(&x);
    if !lx.is_finite() {
        return Err(Error::InvalidParameter(
            "initial point has non-finite posterior density".into(),
        ));
    }
    let mut scale = scale0;
    let mut draws = Vec::with_capacity(iterations.saturating_sub(warmup));
    let mut accepted = 0usize;
    let mut kept = 0usize;
    const WINDOW: usize = 50;
    let mut window_accepted = 0usize;
    // running warmup moments (multivariate Welford) feeding the proposal
    // shape; `chol` stays `None` until enough warmup has accumulated
    let mut wmean = vec![0.0; dim];
    let mut wm2 = vec![vec![0.0; dim]; dim];
    let mut delta = vec![0.0; dim];
    let mut chol: Option<Vec<Vec<f64>>> = None;
    let mut y = vec![0.0; dim];
    let mut z = vec![0.0; dim];
    for it in 0..iterations {
        for zi in z.iter_mut() {
            *zi = rng.sample(StandardNormal);
        }
        match &chol {
            None => {
                for i in 0..dim {
                    y[i] = x[i] + scale * z[i];
                }
            }
            Some(l) => {
                for i in 0..dim {
                    let mut dot = 0.0;
                    for k in 0..=i {
                        dot += l[i][k] * z[k];
                    }
                    y[i] = x[i] + scale * dot;
                }
            }
        }
        let ly = logpost(&y);
        let accept = ly.is_finite() && ly - lx >= rng.random::<f64>().ln();
        if accept {
            std::mem::swap(&mut x, &mut y);
            lx = ly;
        }
        if it < warmup {
            if accept {
                window_accepted += 1;
            }
            let nf = (it + 1) as f64;
            for i in 0..dim {
                delta[i] = x[i] - wmean[i];
                wmean[i] += delta[i] / nf;
            }
            for i in 0..dim {
                let post = x[i] - wmean[i];
                for j in 0..=i {
                    wm2[i][j] += delta[j] * post;
                }
            }
            if (it + 1) % WINDOW == 0 {
                let rate = window_accepted as f64 / WINDOW as f64;
                scale = (scale * (rate - 0.3).exp()).clamp(1e-4, 10.0);
                window_accepted = 0;
                if it + 1 >= 4 * WINDOW {
                    if let Some(l) = proposal_cholesky(&wm2, it as f64) {
                        // renormalize so the shape change does not jolt the
                        // acceptance-targeted global scale
                        if chol.is_none() {
                            scale = 2.38 / (dim as f64).sqrt();
                        }
                        chol = Some(l);
                    }
                }
            }
        } else {
            if accept {
                accepted += 1;
            }
            kept += 1;
            draws.push(x.clone());
        }
    }
    Ok(ChainRun {
        draws,
        accepted,
        kept,
    })
}

/// Cholesky factor of the warmup sample covariance (lower triangle in
/// `m2`, scaled by `1/n`) with a small relative diagonal jitter. `None`
/// when the covariance is degenerate, in which case the caller keeps its
/// previous proposal shape.
fn proposal_cholesky(m2: &[Vec<f64>], n: f64) -> Option<Vec<Vec<f64>>> {
    let dim = m2.len();
    let mut diag_mean = 0.0;
    for (i, row) in m2.iter().enumerate() {
        let v = row[i] / n;
        if !(v.is_finite() && v >= 0.0) {
            return None;
        }
        diag_mean += v;
    }
    diag_mean /= dim as f64;
    if diag_mean <= 0.0 {
        return None;
    }
    let jitter = 1e-6 * diag_mean;
    let mut l = vec![vec![0.0; dim]; dim];
    for i in 0..dim {
        for j in 0..=i {
            let mut s = m2[i][j] / n + if i == j { jitter } else { 0.0 };
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            if i == j {
                if !(s > 0.0 && s.is_finite()) {
                    return None;
                }
                l[i][j] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    Some(l)
}

/// Splits each chain in half, discarding one trailing element on odd
/// lengths, so drift within a chain registers as between-chain variance.
fn split_halves(chains: &[Vec<f64>]) -> Vec<&[f64]> {
    let mut halves = Vec::with_capacity(chains.len() * 2);
    for c in chains {
        let n = c.len() / 2;
        halves.push(&c[..n]);
        halves.push(&c[n..2 * n]);
    }
    halves
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn sample_var(xs: &[f64], mu: f64) -> f64 {
    xs.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / (xs.len() - 1) as f64
}

/// Split-chain potential-scale-reduction factor. 1 for converged chains;
/// values above ~1.1 flag disagreement. Degenerate (constant) sequences
/// report 1.
pub(crate) fn split_rhat(chains: &[Vec<f64>]) -> f64 {
    let halves = split_halves(chains);
    let n = halves.iter().map(|h| h.len()).min().unwrap_or(0);
    if n < 2 {
        return f64::NAN;
    }
    let halves: Vec<&[f64]> = halves.iter().map(|h| &h[..n]).collect();
    let means: Vec<f64> = halves.iter().map(|h| mean(h)).collect();
    let vars: Vec<f64> = halves.iter().zip(&means).map(|(h, &m)| sample_var(h, m)).collect();
    let w = mean(&vars);
    let grand = mean(&means);
    let b_over_n = means.iter().map(|m| (m - grand).powi(2)).sum::<f64>()
        / (means.len() - 1) as f64;
    if w <= 1e-300 {
        return 1.0;
    }
    let nf = n as f64;
    let var_plus = (nf - 1.0) / nf * w + b_over_n;
    (var_plus / w).sqrt()
}

/// Effective sample size across chains: split-chain autocorrelations
/// combined with Geyer's initial-monotone-positive-sequence truncation.
pub(crate) fn ess(chains: &[Vec<f64>]) -> f64 {
    let halves = split_halves(chains);
    let n = halves.iter().map(|h| h.len()).min().unwrap_or(0);
    if n < 4 {
        return f64::NAN;
    }
    let halves: Vec<&[f64]> = halves.iter().map(|h| &h[..n]).collect();
    let total = (halves.len() * n) as f64;
    let means: Vec<f64> = halves.iter().map(|h| mean(h)).collect();
    let vars: Vec<f64> = halves.iter().zip(&means).map(|(h, &m)| sample_var(h, m)).collect();
    let w = mean(&vars);
    if w <= 1e-300 {
        return total;
    }
    let grand = mean(&means);
    let b_over_n = means.iter().map(|m| (m - grand).powi(2)).sum::<f64>()
        / (means.len() - 1) as f64;
    let nf = n as f64;
    let var_plus = (nf - 1.0) / nf * w + b_over_n;

    // mean over chains of the lag-t autocovariance (biased 1/n normalizer)
    let gamma = |t: usize| -> f64 {
        let mut acc = 0.0;
        for (h, &m) in halves.iter().zip(&means) {
            let mut s = 0.0;
            for i in 0..n - t {
                s += (h[i] - m) * (h[i + t] - m);
            }
            acc += s / nf;
        }
        acc / halves.len() as f64
    };
    let rho = |t: usize| 1.0 - (w - gamma(t)) / var_plus;

    let rho0 = rho(0);
    let max_lag = (n - 1).min(1000);
    let mut pair_sum = 0.0;
    let mut prev = f64::INFINITY;
    let mut t = 0;
    while t + 1 <= max_lag {
        let pair = rho(t) + rho(t + 1);
        if pair <= 0.0 {
            break;
        }
        let pair = pair.min(prev);
        pair_sum += pair;
        prev = pair;
        t += 2;
    }
    let tau = (2.0 * pair_sum - rho0).max(rho0.max(1e-3));
    (total / tau).clamp(1.0, total)
}

/// Interpolated empirical quantile of an ascending-sorted slice.
pub(crate) fn quantile(sorted: &[f64], q: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] * (1.0 - frac) + sorted[hi] * frac
}

/// Numerically stable softmax over `[0, free...]` — the first coordinate
/// is pinned to zero so the map is one-to-one.
pub(crate) fn softmax_pinned(free: &[f64]) -> Vec<f64> {
    let hi = free.iter().copied().fold(0.0f64, f64::max);
    let mut out = Vec::with_capacity(free.len() + 1);
    out.push((-hi).exp());
    out.extend(free.iter().map(|x| (x - hi).exp()));
    let sum: f64 = out.iter().sum();
    for o in &mut out {
        *o /= sum;
    }
    out
}

/// Inverse of [`softmax_pinned`] for initialization.
pub(crate) fn softmax_pinned_inverse(probs: &[f64]) -> Vec<f64> {
    probs[1..].iter().map(|p| (p / probs[0]).ln()).collect()
}

/// `Σ_i a_i · ln p_i`: a Dirichlet(a) log-density evaluated through the
/// pinned softmax, with the transform's log-Jacobian `Σ ln p_i` folded in
/// (normalizing constant dropped).
pub(crate) fn dirichlet_softmax_term(p: &[f64], concentration: &[f64]) -> f64 {
    p.iter()
        .zip(concentration)
        .map(|(&pi, &ai)| ai * pi.ln())
        .sum()
}

pub(crate) fn log_normal_pdf(x: f64, mu: f64, sd: f64) -> f64 {
    let z = (x - mu) / sd;
    -sd.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln() - 0.5 * z * z
}

/// `ln Σ exp(terms)` with max-shift.
pub(crate) fn log_sum_exp(terms: &[f64]) -> f64 {
    let hi = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    hi + terms.iter().map(|t| (t - hi).exp()).sum::<f64>().ln()
}
