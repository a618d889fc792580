//! The Plackett-Luce kernel over rankings.
//!
//! Strengths are indexed by ground-truth position: `θ[k]` belongs to the
//! alternative that `σ*` ranks `k`-th. A ranking is built top-down, each
//! position choosing among the not-yet-ranked alternatives with probability
//! proportional to strength:
//!
//! ```text
//! PL(σ | σ*, θ) = Π_{j=0..m-1}  θ_{pos*(σ(j))} / Σ_{ℓ=j..m-1} θ_{pos*(σ(ℓ))}
//! ```
//!
//! The product telescopes to 1 when summed over all rankings, for *any*
//! positive strength vector — the normalization tests below exercise that
//! identity directly.

use crate::error::{Error, Result};
use crate::rankings::Ranking;
use rand::Rng;

use super::sample_categorical;

fn validate_strengths(theta: &[f64], m: usize) -> Result<()> {
    if theta.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: theta.len(),
        });
    }
    for &t in theta {
        if !(t > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "strengths must be strictly positive, got {t}"
            )));
        }
    }
    Ok(())
}

/// Probability of `σ` under Plackett-Luce centered at `σ*`.
pub fn pl_prob(sigma: &Ranking, sigma_star: &Ranking, theta: &[f64]) -> Result<f64> {
    if sigma.m() != sigma_star.m() {
        return Err(Error::DimensionMismatch {
            expected: sigma_star.m(),
            got: sigma.m(),
        });
    }
    let m = sigma.m();
    validate_strengths(theta, m)?;
    let pos_star = sigma_star.positions();
    let strength = |a: usize| theta[pos_star[a]];
    let mut remaining: f64 = sigma.as_slice().iter().map(|&a| strength(a)).sum();
    let mut prob = 1.0;
    for &a in sigma.as_slice() {
        let s = strength(a);
        prob *= s / remaining;
        remaining -= s;
    }
    Ok(prob)
}

/// One Plackett-Luce draw by sequential choice without replacement.
pub(crate) fn sample_pl<R: Rng + ?Sized>(
    sigma_star: &Ranking,
    theta: &[f64],
    rng: &mut R,
) -> Ranking {
    let m = sigma_star.m();
    let pos_star = sigma_star.positions();
    let mut pool: Vec<usize> = (0..m).collect();
    let mut weights: Vec<f64> = pool.iter().map(|&a| theta[pos_star[a]]).collect();
    let mut order = Vec::with_capacity(m);
    for _ in 0..m {
        let i = sample_categorical(&weights, rng);
        order.push(pool.swap_remove(i));
        weights.swap_remove(i);
    }
    Ranking::from_valid(order)
}
