//! The Mallows kernel over rankings.
//!
//! ```text
//! Pr(σ | σ*, φ) = φ^{d(σ, σ*)} / Z(φ, m),   0 < φ ≤ 1,
//! Z(φ, m)       = Π_{i=1..m} (1 − φ^i) / (1 − φ)     (= m! at φ = 1)
//! ```
//!
//! with `d` the Kendall tau distance. Small `φ` concentrates the mass on
//! `σ*`; `φ = 1` is the uniform distribution and is special-cased so the
//! closed form never divides 0 by 0. Sampling uses repeated insertion:
//! walking `σ*` best-first, the `i`-th alternative is inserted at offset
//! `q ∈ {0..i}` with weight `φ^{i−q}`, which adds exactly `i − q` discordant
//! pairs, so the final displacement is Mallows-distributed without any
//! rejection or burn-in.

use crate::error::{Error, Result};
use crate::rankings::{kendall_tau, Ranking};
use rand::Rng;

use super::sample_categorical;

pub(crate) fn validate_phi(phi: f64) -> Result<()> {
    if !(phi > 0.0 && phi <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "dispersion must lie in (0, 1], got {phi}"
        )));
    }
    Ok(())
}

/// `m!` as a float, safe far past the usize overflow point.
fn factorial_f(m: usize) -> f64 {
    (1..=m).fold(1.0, |acc, i| acc * i as f64)
}

/// The Mallows normalization constant `Z(φ, m) = Σ_σ φ^{d(σ, σ*)}`
/// (independent of `σ*`), by closed form.
pub fn mallows_normalizer(phi: f64, m: usize) -> Result<f64> {
    validate_phi(phi)?;
    if m == 0 {
        return Err(Error::InvalidParameter("m must be at least 1".into()));
    }
    if phi == 1.0 {
        return Ok(factorial_f(m));
    }
    let mut z = 1.0;
    let mut phi_pow = 1.0;
    for _ in 1..=m {
        phi_pow *= phi;
        z *= (1.0 - phi_pow) / (1.0 - phi);
    }
    Ok(z)
}

/// Probability of `σ` under Mallows centered at `σ*` with dispersion `φ`.
pub fn mallows_prob(sigma: &Ranking, sigma_star: &Ranking, phi: f64) -> Result<f64> {
    let d = kendall_tau(sigma, sigma_star)?;
    let z = mallows_normalizer(phi, sigma.m())?;
    Ok(phi.powi(d as i32) / z)
}

/// One exact Mallows draw via repeated insertion.
pub(crate) fn sample_mallows<R: Rng + ?Sized>(
    sigma_star: &Ranking,
    phi: f64,
    rng: &mut R,
) -> Ranking {
    let m = sigma_star.m();
    let mut list: Vec<usize> = Vec::with_capacity(m);
    list.push(sigma_star.at(0));
    let mut weights: Vec<f64> = Vec::with_capacity(m);
    for i in 1..m {
        weights.clear();
        // inserting at offset q displaces the newcomer past i − q incumbents
        for q in 0..=i {
            weights.push(phi.powi((i - q) as i32));
        }
        let q = sample_categorical(&weights, rng);
        list.insert(q, sigma_star.at(i));
    }
    Ranking::from_valid(list)
}

/// Number of rankings of `m` alternatives at each Kendall tau distance from
/// a fixed center: index `d` holds `#{σ : d(σ, σ*) = d}`. Computed by the
/// standard convolution (each insertion step contributes `0..i` inversions),
/// so no enumeration is involved and the counts are exact in `f64` for every
/// `m` this crate touches.
pub fn distance_counts(m: usize) -> Vec<f64> {
    let mut counts = vec![1.0];
    for i in 1..m {
        // multiply the generating polynomial by 1 + x + … + x^i
        let mut next = vec![0.0; counts.len() + i];
        for (d, &c) in counts.iter().enumerate() {
            for add in 0..=i {
                next[d + add] += c;
            }
        }
        counts = next;
    }
    counts
}

/// Exact mean and standard deviation of the Kendall tau distance of a
/// Mallows draw from its center.
pub fn mallows_distance_moments(phi: f64, m: usize) -> Result<(f64, f64)> {
    validate_phi(phi)?;
    if m == 0 {
        return Err(Error::InvalidParameter("m must be at least 1".into()));
    }
    let counts = distance_counts(m);
    let mut z = 0.0;
    let mut mean = 0.0;
    let mut second = 0.0;
    let mut phi_pow = 1.0;
    for (d, &c) in counts.iter().enumerate() {
        let w = c * phi_pow;
        z += w;
        mean += d as f64 * w;
        second += (d * d) as f64 * w;
        phi_pow *= phi;
    }
    mean /= z;
    second /= z;
    let var = (second - mean * mean).max(0.0);
    Ok((mean, var.sqrt()))
}
