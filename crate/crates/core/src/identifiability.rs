//! Identifiability conditions for SP voting under concentric mixtures.
//!
//! Each condition is a closed-form sufficient test for the separation
//! `V̄(σ*) ≥ 2·V̄(τ)` for every `τ ≠ σ*` — the property that makes
//! maximizing prediction-normalized votes recover the ground truth.
//! [`verify_separation`] checks the separation itself via [`exact_vbar`],
//! so the conditions can be validated empirically: whenever a condition
//! reports `satisfied`, the separation should hold. The conditions are
//! sufficient only; plenty of separating mixtures fail them.
//!
//! A condition can also be *inapplicable* (e.g. experts in the majority,
//! `p₁ > 1/2`): that is a [`Error::Precondition`] error, deliberately
//! distinct from a report with `satisfied = false`.

use crate::error::{Error, Result};
use crate::models::{
    mallows_normalizer, pl_prob, CmmParams, CmplParams, ModelSpec,
};
use crate::rankings::{rank_index, Ranking};
use crate::sp::{exact_vbar, Prior};
use serde::Serialize;

/// Which sufficient condition a report evaluates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum LemmaTag {
    /// Two-group Mallows mixture.
    #[serde(rename = "CMM-2")]
    CmmTwoGroup,
    /// Mallows mixture with any number of groups, split at a partition index.
    #[serde(rename = "CMM-G")]
    CmmGeneral,
    /// Two-group Plackett-Luce mixture.
    #[serde(rename = "CMPL-2")]
    CmplTwoGroup,
    /// Plackett-Luce mixture with any number of groups.
    #[serde(rename = "CMPL-G")]
    CmplGeneral,
}

/// Outcome of evaluating one identifiability condition: the two sides of
/// the inequality and the verdict `lhs ≥ rhs`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdentifiabilityReport {
    pub lemma: LemmaTag,
    pub lhs: f64,
    pub rhs: f64,
    pub satisfied: bool,
    /// Partition index `s` splitting groups `{1..s}` from `{s+1..G}`,
    /// for the general-mixture conditions.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub partition_s: Option<usize>,
    /// Total expert-side proportion `α = Σ_{j ≤ s} p_j`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
}

impl IdentifiabilityReport {
    fn new(lemma: LemmaTag, lhs: f64, rhs: f64) -> Self {
        IdentifiabilityReport {
            lemma,
            lhs,
            rhs,
            satisfied: lhs >= rhs,
            partition_s: None,
            alpha: None,
        }
    }

    fn with_partition(mut self, s: usize, alpha: f64) -> Self {
        self.partition_s = Some(s);
        self.alpha = Some(alpha);
        self
    }
}

fn check_expert_minority(p1: f64) -> Result<()> {
    if !(p1 > 0.0 && p1.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "expert proportion must be positive, got {p1}"
        )));
    }
    if p1 > 0.5 {
        return Err(Error::Precondition(format!(
            "condition applies only when experts are a minority (p1 ≤ 1/2), got {p1}"
        )));
    }
    Ok(())
}

/// Two-group Mallows condition:
/// `(p1/(1−p1))² ≥ 2·Z(φ2)³/Z(φ1)²·φ1^{m(m−1)/2}`.
pub fn cmm_g2_condition(p1: f64, phi1: f64, phi2: f64, m: usize) -> Result<IdentifiabilityReport> {
    check_expert_minority(p1)?;
    if phi1 > phi2 {
        return Err(Error::Precondition(format!(
            "group 1 must be the expert group (φ1 ≤ φ2), got φ1 = {phi1}, φ2 = {phi2}"
        )));
    }
    let z1 = mallows_normalizer(phi1, m)?;
    let z2 = mallows_normalizer(phi2, m)?;
    let lhs = (p1 / (1.0 - p1)).powi(2);
    let rhs = 2.0 * z2.powi(3) / z1.powi(2) * phi1.powf((m * (m - 1) / 2) as f64);
    Ok(IdentifiabilityReport::new(LemmaTag::CmmTwoGroup, lhs, rhs))
}

/// General Mallows condition at partition index `s` (groups `1..=s`
/// against `s+1..=G`):
/// `α/Z(φ_s) + (1−α)/Z(φ_G) ≥ 2(φ_s·α/Z(φ1) + φ_G·(1−α)/Z(φ_{s+1}))`.
pub fn cmm_general_condition(
    params: &CmmParams,
    s: usize,
    m: usize,
) -> Result<IdentifiabilityReport> {
    let g = params.g();
    if s == 0 || s >= g {
        return Err(Error::Precondition(format!(
            "partition index must satisfy 1 ≤ s < G, got s = {s} with G = {g}"
        )));
    }
    let p = params.proportions();
    let phi = params.dispersions();
    let alpha: f64 = p[..s].iter().sum();
    let z = |i: usize| mallows_normalizer(phi[i], m);
    let lhs = alpha / z(s - 1)? + (1.0 - alpha) / z(g - 1)?;
    let rhs = 2.0 * (phi[s - 1] * alpha / z(0)? + phi[g - 1] * (1.0 - alpha) / z(s)?);
    Ok(IdentifiabilityReport::new(LemmaTag::CmmGeneral, lhs, rhs).with_partition(s, alpha))
}

/// Probability that a single Plackett-Luce row generates its own center.
fn pl_identity_prob(theta: &[f64]) -> Result<f64> {
    let id = Ranking::identity(theta.len())?;
    pl_prob(&id, &id, theta)
}

/// Probability that a single Plackett-Luce row generates the exact
/// reversal of its center.
fn pl_reversal_prob(theta: &[f64]) -> Result<f64> {
    let id = Ranking::identity(theta.len())?;
    pl_prob(&id.reversed(), &id, theta)
}

/// Two-group Plackett-Luce condition:
/// `(p1/(1−p1))² ≥ 2·A·B⁻¹·C` where `A` and `B` are the probabilities of
/// the central ranking under the non-expert and expert rows, and `C` is
/// the probability of the reversal under the expert row.
pub fn cmpl_g2_condition(p1: f64, theta1: &[f64], theta2: &[f64]) -> Result<IdentifiabilityReport> {
    check_expert_minority(p1)?;
    // full row validation (simplex, non-increasing, dominance chain)
    let params = CmplParams::new(vec![p1, 1.0 - p1], vec![theta1.to_vec(), theta2.to_vec()])?;
    let rows = params.strengths();
    let a = pl_identity_prob(&rows[1])?;
    let b = pl_identity_prob(&rows[0])?;
    let c = pl_reversal_prob(&rows[0])?;
    let lhs = (p1 / (1.0 - p1)).powi(2);
    let rhs = 2.0 * a / b * c;
    Ok(IdentifiabilityReport::new(LemmaTag::CmplTwoGroup, lhs, rhs))
}

/// General Plackett-Luce condition at partition index `s`:
///
/// ```text
/// α·P(θ_s) + (1−α)·P(θ_G)  ≥  2·[α·P(θ1) + (1−α)·P(θ_{s+1})]
///                             ─────────────────────────────────
///                              α·R(θ1) + (1−α)·R(θ_{s+1})
/// ```
///
/// with `P` the central-ranking probability of a row and `R` the
/// reversal probability.
pub fn cmpl_general_condition(params: &CmplParams, s: usize) -> Result<IdentifiabilityReport> {
    let g = params.g();
    if s == 0 || s >= g {
        return Err(Error::Precondition(format!(
            "partition index must satisfy 1 ≤ s < G, got s = {s} with G = {g}"
        )));
    }
    let p = params.proportions();
    let rows = params.strengths();
    let alpha: f64 = p[..s].iter().sum();
    let lhs = alpha * pl_identity_prob(&rows[s - 1])?
        + (1.0 - alpha) * pl_identity_prob(&rows[g - 1])?;
    let numer =
        2.0 * (alpha * pl_identity_prob(&rows[0])? + (1.0 - alpha) * pl_identity_prob(&rows[s])?);
    let denom =
        alpha * pl_reversal_prob(&rows[0])? + (1.0 - alpha) * pl_reversal_prob(&rows[s])?;
    Ok(IdentifiabilityReport::new(LemmaTag::CmplGeneral, lhs, numer / denom).with_partition(s, alpha))
}

/// Number of voters sufficient for SP voting to recover the ground truth
/// with probability `1 − δ`: `⌈m!·√(m·ln(m/δ))⌉` (order bound with the
/// constant fixed at 1).
pub fn sample_complexity_bound(m: usize, delta: f64) -> Result<usize> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "failure probability must lie in (0, 1), got {delta}"
        )));
    }
    if m == 0 {
        return Err(Error::InvalidParameter("m must be at least 1".into()));
    }
    let mut fact = 1.0f64;
    for i in 2..=m {
        fact *= i as f64;
    }
    let n = (fact * (m as f64 * (m as f64 / delta).ln()).sqrt()).ceil();
    if !n.is_finite() || n > usize::MAX as f64 {
        return Err(Error::InvalidParameter(format!(
            "sample bound overflows for m = {m}"
        )));
    }
    Ok(n as usize)
}

/// Default separation factor: the analysis asks for `V̄(σ*)` to be at
/// least twice the best rival.
pub const DEFAULT_SEPARATION_MARGIN: f64 = 2.0;

/// Empirical check of the separation the conditions are sufficient for:
/// `exact_vbar(spec)[σ*] ≥ margin · max_{τ≠σ*} exact_vbar(spec)[τ]`.
pub fn verify_separation(spec: &ModelSpec, margin: f64) -> Result<bool> {
    if !(margin > 0.0 && margin.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "separation margin must be positive, got {margin}"
        )));
    }
    let vbar = exact_vbar(spec, &Prior::Uniform)?;
    let truth = rank_index(spec.ground_truth())?;
    let best_rival = vbar
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != truth)
        .map(|(_, &v)| v)
        .fold(f64::NEG_INFINITY, f64::max);
    if best_rival == f64::NEG_INFINITY {
        // m = 1: no rival ranking exists
        return Ok(true);
    }
    Ok(vbar[truth] >= margin * best_rival)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::model_prob;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn two_group_mallows_worked_example() {
        // Z(0.9, 3) = 1.9·2.71 = 5.149, Z(0.1, 3) = 1.1·1.11 = 1.221,
        // rhs = 2·5.149³/1.221²·0.001 = 0.18313331
        let report = cmm_g2_condition(0.4, 0.1, 0.9, 3).unwrap();
        assert_eq!(report.lemma, LemmaTag::CmmTwoGroup);
        assert_relative_eq!(report.lhs, 4.0 / 9.0, epsilon = 1e-12);
        assert_abs_diff_eq!(report.rhs, 0.18313331, epsilon = 1e-7);
        assert!(report.satisfied);

        // a much smaller expert share fails the same condition
        let weak = cmm_g2_condition(0.1, 0.1, 0.9, 3).unwrap();
        assert_relative_eq!(weak.lhs, 1.0 / 81.0, epsilon = 1e-12);
        assert_abs_diff_eq!(weak.rhs, report.rhs, epsilon = 1e-15);
        assert!(!weak.satisfied);
    }

    #[test]
    fn two_group_mallows_uniform_noise_never_satisfied() {
        for m in 2..=5 {
            for &p1 in &[0.1, 0.3, 0.5] {
                let report = cmm_g2_condition(p1, 1.0, 1.0, m).unwrap();
                // Z(1) = m!, so the rhs collapses to 2·m!
                let fact: f64 = (1..=m).map(|i| i as f64).product();
                assert_relative_eq!(report.rhs, 2.0 * fact, epsilon = 1e-9);
                assert!(!report.satisfied);
            }
        }
    }

    #[test]
    fn two_group_mallows_preconditions() {
        assert!(matches!(
            cmm_g2_condition(0.6, 0.1, 0.9, 3),
            Err(Error::Precondition(_))
        ));
        assert!(cmm_g2_condition(0.0, 0.1, 0.9, 3).is_err());
        assert!(matches!(
            cmm_g2_condition(0.4, 0.9, 0.1, 3),
            Err(Error::Precondition(_))
        ));
        assert!(cmm_g2_condition(0.4, 0.1, 1.2, 3).is_err());
        assert!(cmm_g2_condition(0.4, 0.0, 0.9, 3).is_err());
    }

    #[test]
    fn general_mallows_specializes_to_two_groups_at_s1() {
        let params = CmmParams::new(vec![0.3, 0.7], vec![0.2, 0.8]).unwrap();
        let report = cmm_general_condition(&params, 1, 3).unwrap();
        assert_eq!(report.lemma, LemmaTag::CmmGeneral);
        assert_eq!(report.partition_s, Some(1));
        assert_relative_eq!(report.alpha.unwrap(), 0.3, epsilon = 1e-15);
        // direct evaluation of the two-group expression
        let z1 = mallows_normalizer(0.2, 3).unwrap();
        let z2 = mallows_normalizer(0.8, 3).unwrap();
        assert_relative_eq!(report.lhs, 0.3 / z1 + 0.7 / z2, epsilon = 1e-14);
        assert_relative_eq!(
            report.rhs,
            2.0 * (0.2 * 0.3 / z1 + 0.8 * 0.7 / z2),
            epsilon = 1e-14
        );
        // and against hand arithmetic: Z(0.2,3)=1.488, Z(0.8,3)=4.392
        assert_abs_diff_eq!(report.lhs, 0.3609936, epsilon = 1e-6);
        assert_abs_diff_eq!(report.rhs, 0.3356543, epsilon = 1e-6);
        assert!(report.satisfied);
    }

    #[test]
    fn general_mallows_equal_dispersions_reduce_to_phi_half_threshold() {
        // with every φ equal the condition collapses to φ̄ ≤ 1/2
        for (phi, want) in [(0.4, true), (0.5, true), (0.6, false)] {
            let params = CmmParams::new(vec![0.5, 0.5], vec![phi, phi]).unwrap();
            let report = cmm_general_condition(&params, 1, 3).unwrap();
            assert_eq!(report.satisfied, want, "phi = {phi}");
            let three = CmmParams::new(vec![0.2, 0.3, 0.5], vec![phi, phi, phi]).unwrap();
            let report = cmm_general_condition(&three, 2, 4).unwrap();
            assert_eq!(report.satisfied, want, "phi = {phi}, G = 3");
        }
    }

    #[test]
    fn general_mallows_three_group_example() {
        // α = 0.01; Z(0.05,3) = 1.105125, Z(0.3,3) = 1.807,
        // Z(0.95,3) = 5.562375 ⇒ lhs ≈ 0.187030, rhs ≈ 1.041857
        let params =
            CmmParams::new(vec![0.01, 0.49, 0.50], vec![0.05, 0.3, 0.95]).unwrap();
        let report = cmm_general_condition(&params, 1, 3).unwrap();
        assert_relative_eq!(report.alpha.unwrap(), 0.01, epsilon = 1e-15);
        assert_abs_diff_eq!(report.lhs, 0.187030, epsilon = 1e-6);
        assert_abs_diff_eq!(report.rhs, 1.041857, epsilon = 1e-5);
        assert!(!report.satisfied);
    }

    #[test]
    fn general_mallows_rejects_bad_partition() {
        let params = CmmParams::new(vec![0.3, 0.7], vec![0.2, 0.8]).unwrap();
        assert!(matches!(
            cmm_general_condition(&params, 0, 3),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(
            cmm_general_condition(&params, 2, 3),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn two_group_plackett_worked_example() {
        // A = 0.6, B = 0.75, C = 0.25 ⇒ rhs = 2·0.6·0.25/0.75 = 0.4
        let theta1 = [0.75, 0.25];
        let theta2 = [0.6, 0.4];
        let report = cmpl_g2_condition(0.3, &theta1, &theta2).unwrap();
        assert_eq!(report.lemma, LemmaTag::CmplTwoGroup);
        assert_relative_eq!(report.rhs, 0.4, epsilon = 1e-12);
        assert_relative_eq!(report.lhs, (0.3f64 / 0.7).powi(2), epsilon = 1e-12);
        assert_abs_diff_eq!(report.lhs, 0.18367, epsilon = 1e-5);
        assert!(!report.satisfied);

        let stronger = cmpl_g2_condition(0.45, &theta1, &theta2).unwrap();
        assert_abs_diff_eq!(stronger.lhs, 0.66942, epsilon = 1e-5);
        assert!(stronger.satisfied);

        let boundary = cmpl_g2_condition(0.5, &theta1, &theta2).unwrap();
        assert_relative_eq!(boundary.lhs, 1.0, epsilon = 1e-15);
        assert!(boundary.satisfied); // rhs = 0.4 ≤ 1
    }

    #[test]
    fn two_group_plackett_rejects_broken_inputs() {
        // swapped rows: the expert row no longer dominates
        assert!(cmpl_g2_condition(0.3, &[0.6, 0.4], &[0.75, 0.25]).is_err());
        // experts in the majority
        assert!(matches!(
            cmpl_g2_condition(0.6, &[0.75, 0.25], &[0.6, 0.4]),
            Err(Error::Precondition(_))
        ));
        // not a distribution
        assert!(cmpl_g2_condition(0.3, &[0.75, 0.35], &[0.6, 0.4]).is_err());
    }

    #[test]
    fn plackett_products_match_model_probabilities() {
        // the three lemma products are Plackett-Luce probabilities of the
        // center and its reversal; cross-check against the full model
        let theta = vec![0.5, 0.3, 0.2];
        let spec = ModelSpec::new_cmpl(
            3,
            Ranking::identity(3).unwrap(),
            CmplParams::new(vec![1.0], vec![theta.clone()]).unwrap(),
        )
        .unwrap();
        let id = Ranking::identity(3).unwrap();
        assert_relative_eq!(
            pl_identity_prob(&theta).unwrap(),
            model_prob(&id, &spec).unwrap(),
            epsilon = 1e-14
        );
        assert_relative_eq!(
            pl_reversal_prob(&theta).unwrap(),
            model_prob(&id.reversed(), &spec).unwrap(),
            epsilon = 1e-14
        );
        assert_relative_eq!(pl_identity_prob(&theta).unwrap(), 0.3, epsilon = 1e-12);
        assert_relative_eq!(pl_reversal_prob(&theta).unwrap(), 0.075, epsilon = 1e-12);
    }

    #[test]
    fn general_plackett_identical_rows_by_hand() {
        // every row (0.5, 0.3, 0.2): lhs = P = 0.3, rhs = 2·P/R = 8
        let row = vec![0.5, 0.3, 0.2];
        let params = CmplParams::new(vec![0.5, 0.5], vec![row.clone(), row]).unwrap();
        let report = cmpl_general_condition(&params, 1).unwrap();
        assert_eq!(report.lemma, LemmaTag::CmplGeneral);
        assert_relative_eq!(report.lhs, 0.3, epsilon = 1e-12);
        assert_relative_eq!(report.rhs, 8.0, epsilon = 1e-12);
        assert!(!report.satisfied);
    }

    #[test]
    fn general_plackett_two_group_specialization() {
        // Both conditions are sufficient tests, so their verdicts can
        // legitimately differ: at p1 = 0.3 both fail; at p1 = 0.45 the
        // two-group form is satisfied while the general form — whose rhs
        // divides by reversal probabilities ≤ 1 — stays unsatisfied.
        let theta1 = vec![0.75, 0.25];
        let theta2 = vec![0.6, 0.4];
        let g2 = cmpl_g2_condition(0.3, &theta1, &theta2).unwrap();
        let params =
            CmplParams::new(vec![0.3, 0.7], vec![theta1.clone(), theta2.clone()]).unwrap();
        let general = cmpl_general_condition(&params, 1).unwrap();
        assert_eq!(general.satisfied, g2.satisfied);
        // lhs = 0.3·0.75 + 0.7·0.6 = 0.645; rhs = 2·0.645/(0.3·0.25 + 0.7·0.4)
        assert_relative_eq!(general.lhs, 0.645, epsilon = 1e-12);
        assert_relative_eq!(general.rhs, 1.29 / 0.355, epsilon = 1e-12);

        let g2 = cmpl_g2_condition(0.45, &theta1, &theta2).unwrap();
        let params = CmplParams::new(vec![0.45, 0.55], vec![theta1, theta2]).unwrap();
        let general = cmpl_general_condition(&params, 1).unwrap();
        assert!(g2.satisfied && !general.satisfied);
    }

    #[test]
    fn general_plackett_is_never_satisfied_for_valid_mixtures() {
        // For any dominance chain the numerator of the rhs is already at
        // least twice the lhs, and the denominator (a mix of reversal
        // probabilities) is below 1, so `lhs ≥ rhs` is unattainable.
        // Document the vacuity over a parameter sweep.
        let gammas = [1.0, 1.5, 2.0, 4.0, 8.0];
        for m in 2..=5 {
            for (i, &g1) in gammas.iter().enumerate() {
                for &g2 in &gammas[..=i] {
                    let row = |gamma: f64| {
                        let mut v = vec![1.0; m];
                        v[0] = gamma;
                        let s: f64 = v.iter().sum();
                        v.into_iter().map(|x| x / s).collect::<Vec<_>>()
                    };
                    let params =
                        CmplParams::new(vec![0.5, 0.5], vec![row(g1), row(g2)]).unwrap();
                    let report = cmpl_general_condition(&params, 1).unwrap();
                    assert!(!report.satisfied, "γ = ({g1}, {g2}), m = {m}");
                    assert!(report.rhs >= 2.0 * report.lhs);
                }
            }
        }
    }

    #[test]
    fn gamma_rows_track_the_asymptotic_rate() {
        // θ_g = (γ_g, 1, …, 1)/(γ_g + m − 1): the two-group rhs collapses to
        // 2·γ₂/(γ₂+m−1)·(γ₁+m−1)/γ₁·Π_{j=1}^{m−1} 1/(γ₁+m−j), and its
        // square root stays within a factor 2 of √(2γ₂/γ₁)·m^{−(m−1)/2}
        let (g1, g2) = (4.0, 2.0);
        for m in 4..=8 {
            let row = |gamma: f64| {
                let mut v = vec![1.0; m];
                v[0] = gamma;
                let s: f64 = v.iter().sum();
                v.into_iter().map(|x| x / s).collect::<Vec<_>>()
            };
            let report = cmpl_g2_condition(0.5, &row(g1), &row(g2)).unwrap();
            let mf = m as f64;
            let mut closed = 2.0 * g2 / (g2 + mf - 1.0) * (g1 + mf - 1.0) / g1;
            for j in 1..m {
                closed /= g1 + (m - j) as f64;
            }
            assert_relative_eq!(report.rhs, closed, max_relative = 1e-12);
            let rate = (2.0 * g2 / g1).sqrt() * mf.powf(-(mf - 1.0) / 2.0);
            let ratio = report.rhs.sqrt() / rate;
            assert!(
                (0.5..=2.0).contains(&ratio),
                "m = {m}: √rhs/rate = {ratio}"
            );
        }
    }

    #[test]
    fn sample_complexity_known_values_and_monotonicity() {
        assert_eq!(sample_complexity_bound(3, 0.1).unwrap(), 20);
        assert_eq!(sample_complexity_bound(1, (-1.0f64).exp()).unwrap(), 1);
        let mut last = 0;
        for m in 1..=6 {
            let n = sample_complexity_bound(m, 0.1).unwrap();
            assert!(n >= last, "not monotone in m at {m}");
            last = n;
        }
        let mut last = 0;
        for &delta in &[0.5, 0.2, 0.1, 0.01, 1e-6] {
            let n = sample_complexity_bound(3, delta).unwrap();
            assert!(n >= last, "not monotone in 1/δ at {delta}");
            last = n;
        }
        for bad in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(sample_complexity_bound(3, bad).is_err());
        }
        assert!(sample_complexity_bound(0, 0.1).is_err());
    }

    fn cmm_spec(m: usize, p: Vec<f64>, phi: Vec<f64>) -> ModelSpec {
        ModelSpec::new_cmm(
            m,
            Ranking::identity(m).unwrap(),
            CmmParams::new(p, phi).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn separation_check_on_worked_examples() {
        // uniform noise: every V̄ equal → no separation
        assert!(!verify_separation(&cmm_spec(3, vec![1.0], vec![1.0]), 2.0).unwrap());
        // the two-alternative mixture separates at ×2 (1.3589 vs 0.6411)
        let mix = cmm_spec(2, vec![0.4, 0.6], vec![0.1, 0.9]);
        assert!(verify_separation(&mix, 2.0).unwrap());
        // …and its actual ratio is ≈ 2.1195, so a slightly larger margin
        // still passes while a stricter one fails
        assert!(verify_separation(&mix, 2.11).unwrap());
        assert!(!verify_separation(&mix, 2.13).unwrap());
        assert!(verify_separation(&mix, f64::NAN).is_err());
        assert!(verify_separation(&mix, 0.0).is_err());
    }

    #[test]
    fn general_mallows_condition_implies_separation_on_a_grid() {
        // soundness spot-check for the general-mixture Mallows condition
        let phis = [0.05, 0.2, 0.4, 0.6, 0.8];
        let shares = [0.1, 0.3, 0.5];
        let mut satisfied_count = 0;
        for &phi1 in &phis {
            for &phi2 in phis.iter().filter(|&&f| f >= phi1) {
                for &p1 in &shares {
                    let params = CmmParams::new(vec![p1, 1.0 - p1], vec![phi1, phi2]).unwrap();
                    let report = cmm_general_condition(&params, 1, 3).unwrap();
                    if report.satisfied {
                        satisfied_count += 1;
                        let spec = cmm_spec(3, vec![p1, 1.0 - p1], vec![phi1, phi2]);
                        assert!(
                            verify_separation(&spec, 2.0).unwrap(),
                            "condition satisfied but separation fails at φ = ({phi1}, {phi2}), p1 = {p1}"
                        );
                    }
                }
            }
        }
        assert!(satisfied_count > 0, "grid never satisfied the condition");
    }

    #[test]
    fn two_group_mallows_condition_admits_a_non_separating_mixture() {
        // The two-group closed form is *not* sound as stated: with both
        // groups at φ = 0.55 and p1 = 0.5 it is satisfied (lhs = 1 ≥
        // rhs ≈ 0.9554), yet the mixture is a single Mallows model whose
        // V̄ ratio between σ* and an adjacent ranking is 1/φ ≈ 1.82 < 2.
        let report = cmm_g2_condition(0.5, 0.55, 0.55, 3).unwrap();
        assert!(report.satisfied);
        assert_abs_diff_eq!(report.rhs, 0.955450, epsilon = 1e-5);
        let spec = cmm_spec(3, vec![0.5, 0.5], vec![0.55, 0.55]);
        assert!(!verify_separation(&spec, 2.0).unwrap());
    }

    #[test]
    fn report_serializes_with_lemma_tags() {
        let report = cmm_g2_condition(0.4, 0.1, 0.9, 3).unwrap();
        let json = serde_json::to_value(&report).unwrap();
        assert_eq!(json["lemma"], "CMM-2");
        assert_eq!(json["satisfied"], true);
        assert!(json.get("partition_s").is_none());
        let params = CmmParams::new(vec![0.3, 0.7], vec![0.2, 0.8]).unwrap();
        let general = cmm_general_condition(&params, 1, 3).unwrap();
        let json = serde_json::to_value(&general).unwrap();
        assert_eq!(json["lemma"], "CMM-G");
        assert_eq!(json["partition_s"], 1);
        assert_eq!(json["alpha"], 0.3);
    }
}
