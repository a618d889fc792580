//! Concentric mixtures of rank-order models.
//!
//! Both families share one ground truth `σ*` and `G` expertise groups; group
//! `g` is drawn with proportion `p_g` and then emits a ranking from its own
//! noise kernel centered on `σ*`:
//!
//! ```text
//! CMM   Pr(σ | σ*) = Σ_g p_g · φ_g^{d(σ, σ*)} / Z(φ_g, m)        (Mallows)
//! CMPL  Pr(σ | σ*) = Σ_g p_g · PL(σ | σ*, θ_g)                   (Plackett-Luce)
//! ```
//!
//! Concentricity is enforced at construction: Mallows dispersions are sorted
//! non-decreasing (group 1 = sharpest), and Plackett-Luce strength rows are
//! non-increasing within a group and prefix-sum dominant across groups, so
//! higher groups concentrate more mass near `σ*` at every prefix.
//!
//! A [`ModelSpec`] may additionally carry *prediction* parameters: the same
//! mixture structure reused for how a voter imagines everyone else votes.
//! The paired samplers draw a voter's group once and then an independent
//! vote and prediction from the group's two kernels.

pub mod mallows;
pub mod plackett;

pub use mallows::{mallows_distance_moments, mallows_normalizer, mallows_prob};
pub use plackett::pl_prob;

use crate::error::{Error, Result};
use crate::rankings::{extensions, PartialRanking, Ranking};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Absolute tolerance on mixture-proportion sums.
pub(crate) const PROPORTION_TOL: f64 = 1e-12;
/// Absolute tolerance on strength-row sums, monotonicity, and dominance;
/// looser than the proportion tolerance because fitted strengths are the
/// output of floating-point inference.
pub(crate) const STRENGTH_TOL: f64 = 1e-9;

/// Which mixture family a [`ModelSpec`] uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelKind {
    Cmm,
    Cmpl,
}

/// Parameters of a concentric mixture of Mallows models.
#[derive(Clone, Debug, PartialEq)]
pub struct CmmParams {
    p: Vec<f64>,
    phi: Vec<f64>,
}

impl CmmParams {
    /// Validates proportions (positive, summing to 1) and dispersions
    /// (each in `(0, 1]`, sorted non-decreasing). Proportions are
    /// renormalized to sum to exactly 1.
    pub fn new(p: Vec<f64>, phi: Vec<f64>) -> Result<Self> {
        let p = validate_simplex(&p, PROPORTION_TOL, "proportions")?;
        if phi.len() != p.len() {
            return Err(Error::DimensionMismatch {
                expected: p.len(),
                got: phi.len(),
            });
        }
        for &f in &phi {
            mallows::validate_phi(f)?;
        }
        for w in phi.windows(2) {
            if w[1] < w[0] - PROPORTION_TOL {
                return Err(Error::InvalidParameter(format!(
                    "dispersions must be sorted non-decreasing, got {} before {}",
                    w[0], w[1]
                )));
            }
        }
        Ok(CmmParams { p, phi })
    }

    pub fn g(&self) -> usize {
        self.p.len()
    }

    pub fn proportions(&self) -> &[f64] {
        &self.p
    }

    pub fn dispersions(&self) -> &[f64] {
        &self.phi
    }
}

/// Parameters of a concentric mixture of Plackett-Luce models.
#[derive(Clone, Debug, PartialEq)]
pub struct CmplParams {
    p: Vec<f64>,
    theta: Vec<Vec<f64>>,
}

impl CmplParams {
    /// Validates proportions as in [`CmmParams::new`] and strength rows:
    /// positive, summing to 1 (renormalized), non-increasing within each
    /// row, and prefix-sum dominant from each row to the next.
    pub fn new(p: Vec<f64>, theta: Vec<Vec<f64>>) -> Result<Self> {
        let p = validate_simplex(&p, PROPORTION_TOL, "proportions")?;
        if theta.len() != p.len() {
            return Err(Error::DimensionMismatch {
                expected: p.len(),
                got: theta.len(),
            });
        }
        let mut rows = Vec::with_capacity(theta.len());
        let m = theta.first().map(|r| r.len()).unwrap_or(0);
        for row in &theta {
            if row.len() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    got: row.len(),
                });
            }
            let row = validate_simplex(row, STRENGTH_TOL, "strengths")?;
            for w in row.windows(2) {
                if w[1] > w[0] + STRENGTH_TOL {
                    return Err(Error::InvalidParameter(format!(
                        "strength row must be non-increasing, got {} before {}",
                        w[0], w[1]
                    )));
                }
            }
            rows.push(row);
        }
        if !check_dominance(&rows) {
            return Err(Error::InvalidParameter(
                "strength rows must be prefix-sum dominant from sharper to flatter groups"
                    .into(),
            ));
        }
        Ok(CmplParams { p, theta: rows })
    }

    pub fn g(&self) -> usize {
        self.p.len()
    }

    pub fn m(&self) -> usize {
        self.theta[0].len()
    }

    pub fn proportions(&self) -> &[f64] {
        &self.p
    }

    pub fn strengths(&self) -> &[Vec<f64>] {
        &self.theta
    }
}

/// Family-specific voting parameters.
#[derive(Clone, Debug, PartialEq)]
pub enum ModelParams {
    Cmm(CmmParams),
    Cmpl(CmplParams),
}

impl ModelParams {
    pub fn g(&self) -> usize {
        match self {
            ModelParams::Cmm(c) => c.g(),
            ModelParams::Cmpl(c) => c.g(),
        }
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            ModelParams::Cmm(_) => ModelKind::Cmm,
            ModelParams::Cmpl(_) => ModelKind::Cmpl,
        }
    }
}

/// Optional per-group parameters for the *prediction* channel: how voters
/// believe others vote. Proportions are shared with the voting mixture
/// (each voter predicts with their own group's prediction kernel).
#[derive(Clone, Debug, PartialEq)]
pub enum PredictionParams {
    /// Per-group Mallows dispersions in `(0, 1]`.
    Dispersions(Vec<f64>),
    /// Per-group Plackett-Luce strength rows (positive, each summing to 1).
    Strengths(Vec<Vec<f64>>),
}

/// A fully specified generative model: universe size, ground truth, voting
/// mixture, and optionally a prediction mixture.
///
/// Serializes as a flat record `{kind, m, ground_truth, proportions, ...}`
/// with family-specific fields (`dispersions` for Mallows, `strengths` for
/// Plackett-Luce); deserialization re-runs full construction validation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelSpecRepr", into = "ModelSpecRepr")]
pub struct ModelSpec {
    m: usize,
    ground_truth: Ranking,
    params: ModelParams,
    prediction: Option<PredictionParams>,
}

impl ModelSpec {
    pub fn new_cmm(m: usize, ground_truth: Ranking, params: CmmParams) -> Result<Self> {
        if ground_truth.m() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: ground_truth.m(),
            });
        }
        Ok(ModelSpec {
            m,
            ground_truth,
            params: ModelParams::Cmm(params),
            prediction: None,
        })
    }

    pub fn new_cmpl(m: usize, ground_truth: Ranking, params: CmplParams) -> Result<Self> {
        if ground_truth.m() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: ground_truth.m(),
            });
        }
        if params.m() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: params.m(),
            });
        }
        Ok(ModelSpec {
            m,
            ground_truth,
            params: ModelParams::Cmpl(params),
            prediction: None,
        })
    }

    /// Attaches prediction parameters, validated against the voting mixture
    /// (same family, same number of groups, same `m`).
    pub fn with_prediction(mut self, prediction: PredictionParams) -> Result<Self> {
        let g = self.params.g();
        match (&self.params, &prediction) {
            (ModelParams::Cmm(_), PredictionParams::Dispersions(phi)) => {
                if phi.len() != g {
                    return Err(Error::DimensionMismatch {
                        expected: g,
                        got: phi.len(),
                    });
                }
                for &f in phi {
                    mallows::validate_phi(f)?;
                }
                self.prediction = Some(prediction);
            }
            (ModelParams::Cmpl(_), PredictionParams::Strengths(theta)) => {
                if theta.len() != g {
                    return Err(Error::DimensionMismatch {
                        expected: g,
                        got: theta.len(),
                    });
                }
                let mut rows = Vec::with_capacity(g);
                for row in theta {
                    if row.len() != self.m {
                        return Err(Error::DimensionMismatch {
                            expected: self.m,
                            got: row.len(),
                        });
                    }
                    rows.push(validate_simplex(row, STRENGTH_TOL, "strengths")?);
                }
                self.prediction = Some(PredictionParams::Strengths(rows));
            }
            _ => {
                return Err(Error::InvalidParameter(
                    "prediction parameters must match the model family".into(),
                ))
            }
        }
        Ok(self)
    }

    /// The same mixture re-centered on a different ground truth.
    pub fn with_ground_truth(&self, ground_truth: Ranking) -> Result<Self> {
        if ground_truth.m() != self.m {
            return Err(Error::DimensionMismatch {
                expected: self.m,
                got: ground_truth.m(),
            });
        }
        let mut out = self.clone();
        out.ground_truth = ground_truth;
        Ok(out)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn g(&self) -> usize {
        self.params.g()
    }

    pub fn kind(&self) -> ModelKind {
        self.params.kind()
    }

    pub fn ground_truth(&self) -> &Ranking {
        &self.ground_truth
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn prediction(&self) -> Option<&PredictionParams> {
        self.prediction.as_ref()
    }

    pub fn cmm_params(&self) -> Result<&CmmParams> {
        match &self.params {
            ModelParams::Cmm(c) => Ok(c),
            ModelParams::Cmpl(_) => Err(Error::InvalidParameter(
                "expected a Mallows-mixture spec".into(),
            )),
        }
    }

    pub fn cmpl_params(&self) -> Result<&CmplParams> {
        match &self.params {
            ModelParams::Cmpl(c) => Ok(c),
            ModelParams::Cmm(_) => Err(Error::InvalidParameter(
                "expected a Plackett-Luce-mixture spec".into(),
            )),
        }
    }
}

/// Wire format for [`ModelSpec`]: one flat record instead of nested enums,
/// so configs stay hand-editable. `kind` selects the family; exactly the
/// matching parameter fields may be present.
#[derive(Serialize, Deserialize)]
struct ModelSpecRepr {
    kind: String,
    m: usize,
    ground_truth: Vec<usize>,
    proportions: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dispersions: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    strengths: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    prediction_dispersions: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    prediction_strengths: Option<Vec<Vec<f64>>>,
}

impl From<ModelSpec> for ModelSpecRepr {
    fn from(spec: ModelSpec) -> Self {
        let mut repr = ModelSpecRepr {
            kind: match spec.kind() {
                ModelKind::Cmm => "cmm".into(),
                ModelKind::Cmpl => "cmpl".into(),
            },
            m: spec.m,
            ground_truth: spec.ground_truth.as_slice().to_vec(),
            proportions: Vec::new(),
            dispersions: None,
            strengths: None,
            prediction_dispersions: None,
            prediction_strengths: None,
        };
        match &spec.params {
            ModelParams::Cmm(c) => {
                repr.proportions = c.proportions().to_vec();
                repr.dispersions = Some(c.dispersions().to_vec());
            }
            ModelParams::Cmpl(c) => {
                repr.proportions = c.proportions().to_vec();
                repr.strengths = Some(c.strengths().to_vec());
            }
        }
        match &spec.prediction {
            Some(PredictionParams::Dispersions(phi)) => {
                repr.prediction_dispersions = Some(phi.clone());
            }
            Some(PredictionParams::Strengths(theta)) => {
                repr.prediction_strengths = Some(theta.clone());
            }
            None => {}
        }
        repr
    }
}

impl TryFrom<ModelSpecRepr> for ModelSpec {
    type Error = Error;

    fn try_from(repr: ModelSpecRepr) -> Result<Self> {
        let ground_truth = Ranking::new(repr.ground_truth)?;
        let spec = match repr.kind.as_str() {
            "cmm" => {
                if repr.strengths.is_some() || repr.prediction_strengths.is_some() {
                    return Err(Error::InvalidParameter(
                        "a cmm spec cannot carry strength fields".into(),
                    ));
                }
                let phi = repr.dispersions.ok_or_else(|| {
                    Error::InvalidParameter("a cmm spec requires dispersions".into())
                })?;
                let spec = ModelSpec::new_cmm(
                    repr.m,
                    ground_truth,
                    CmmParams::new(repr.proportions, phi)?,
                )?;
                match repr.prediction_dispersions {
                    Some(pred) => spec.with_prediction(PredictionParams::Dispersions(pred))?,
                    None => spec,
                }
            }
            "cmpl" => {
                if repr.dispersions.is_some() || repr.prediction_dispersions.is_some() {
                    return Err(Error::InvalidParameter(
                        "a cmpl spec cannot carry dispersion fields".into(),
                    ));
                }
                let theta = repr.strengths.ok_or_else(|| {
                    Error::InvalidParameter("a cmpl spec requires strengths".into())
                })?;
                let spec = ModelSpec::new_cmpl(
                    repr.m,
                    ground_truth,
                    CmplParams::new(repr.proportions, theta)?,
                )?;
                match repr.prediction_strengths {
                    Some(pred) => spec.with_prediction(PredictionParams::Strengths(pred))?,
                    None => spec,
                }
            }
            other => {
                return Err(Error::InvalidParameter(format!(
                    "unknown model kind {other:?}, expected \"cmm\" or \"cmpl\""
                )))
            }
        };
        Ok(spec)
    }
}

fn validate_simplex(v: &[f64], tol: f64, what: &str) -> Result<Vec<f64>> {
    if v.is_empty() {
        return Err(Error::InvalidParameter(format!("{what} must be non-empty")));
    }
    for &x in v {
        if !(x > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "{what} must be strictly positive, got {x}"
            )));
        }
    }
    let sum: f64 = v.iter().sum();
    if (sum - 1.0).abs() > tol {
        return Err(Error::InvalidParameter(format!(
            "{what} must sum to 1, got {sum}"
        )));
    }
    // dividing by a sum already within rounding error of 1 would only churn
    // low bits, and would make normalize(normalize(v)) != normalize(v);
    // values that round-trip through serialization must pass through intact
    if (sum - 1.0).abs() <= 4.0 * f64::EPSILON * v.len() as f64 {
        return Ok(v.to_vec());
    }
    Ok(v.iter().map(|x| x / sum).collect())
}

/// Draws index `i` with probability `weights[i] / Σ weights`.
pub(crate) fn sample_categorical<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    debug_assert!(total > 0.0, "categorical weights must have positive mass");
    let mut u = rng.random::<f64>() * total;
    for (i, &w) in weights.iter().enumerate() {
        u -= w;
        if u <= 0.0 {
            return i;
        }
    }
    weights.len() - 1
}

/// Mixture-of-Mallows probability of `σ` under `spec`.
pub fn cmm_prob(sigma: &Ranking, spec: &ModelSpec) -> Result<f64> {
    let params = spec.cmm_params()?;
    if sigma.m() != spec.m() {
        return Err(Error::DimensionMismatch {
            expected: spec.m(),
            got: sigma.m(),
        });
    }
    let mut prob = 0.0;
    for (pg, &phi) in params.proportions().iter().zip(params.dispersions()) {
        prob += pg * mallows_prob(sigma, spec.ground_truth(), phi)?;
    }
    Ok(prob)
}

/// Mixture-of-Plackett-Luce probability of `σ` under `spec`.
pub fn cmpl_prob(sigma: &Ranking, spec: &ModelSpec) -> Result<f64> {
    let params = spec.cmpl_params()?;
    if sigma.m() != spec.m() {
        return Err(Error::DimensionMismatch {
            expected: spec.m(),
            got: sigma.m(),
        });
    }
    let mut prob = 0.0;
    for (pg, theta) in params.proportions().iter().zip(params.strengths()) {
        prob += pg * pl_prob(sigma, spec.ground_truth(), theta)?;
    }
    Ok(prob)
}

/// Probability of `σ` under either family.
pub fn model_prob(sigma: &Ranking, spec: &ModelSpec) -> Result<f64> {
    match spec.kind() {
        ModelKind::Cmm => cmm_prob(sigma, spec),
        ModelKind::Cmpl => cmpl_prob(sigma, spec),
    }
}

/// True iff the prefix sums of each row dominate the next row's at every
/// prefix length (within the strength tolerance). Rows are assumed to sum
/// to 1; with one row the condition is vacuous.
pub fn check_dominance(theta: &[Vec<f64>]) -> bool {
    for pair in theta.windows(2) {
        let (hi, lo) = (&pair[0], &pair[1]);
        if hi.len() != lo.len() {
            return false;
        }
        let mut prefix_hi = 0.0;
        let mut prefix_lo = 0.0;
        for (a, b) in hi.iter().zip(lo) {
            prefix_hi += a;
            prefix_lo += b;
            if prefix_hi < prefix_lo - STRENGTH_TOL {
                return false;
            }
        }
    }
    true
}

/// One synthetic voter: the emitted vote and the latent expertise group.
pub type GroupedDraw = (Ranking, usize);

/// One synthetic voter with both channels drawn from the same group.
#[derive(Clone, Debug, PartialEq)]
pub struct PairedDraw {
    pub vote: Ranking,
    pub prediction: Ranking,
    pub group: usize,
}

/// `n` i.i.d. draws from a Mallows mixture, with each voter's latent group.
/// Deterministic in `seed`.
pub fn sample_cmm(spec: &ModelSpec, n: usize, seed: u64) -> Result<Vec<GroupedDraw>> {
    let params = spec.cmm_params()?;
    if n == 0 {
        return Err(Error::EmptyInput("sample size must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let g = sample_categorical(params.proportions(), &mut rng);
        let r = mallows::sample_mallows(spec.ground_truth(), params.dispersions()[g], &mut rng);
        out.push((r, g));
    }
    Ok(out)
}

/// `n` i.i.d. draws from a Plackett-Luce mixture, with latent groups.
/// Deterministic in `seed`.
pub fn sample_cmpl(spec: &ModelSpec, n: usize, seed: u64) -> Result<Vec<GroupedDraw>> {
    let params = spec.cmpl_params()?;
    if n == 0 {
        return Err(Error::EmptyInput("sample size must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let g = sample_categorical(params.proportions(), &mut rng);
        let r = plackett::sample_pl(spec.ground_truth(), &params.strengths()[g], &mut rng);
        out.push((r, g));
    }
    Ok(out)
}

/// Family-dispatching sampler.
pub fn sample_votes(spec: &ModelSpec, n: usize, seed: u64) -> Result<Vec<GroupedDraw>> {
    match spec.kind() {
        ModelKind::Cmm => sample_cmm(spec, n, seed),
        ModelKind::Cmpl => sample_cmpl(spec, n, seed),
    }
}

/// `n` voters drawing a vote *and* a prediction, sharing one latent group.
/// The prediction uses the spec's prediction parameters when attached and
/// the voting parameters otherwise. Deterministic in `seed`.
pub fn sample_paired(spec: &ModelSpec, n: usize, seed: u64) -> Result<Vec<PairedDraw>> {
    if n == 0 {
        return Err(Error::EmptyInput("sample size must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let draw = match &spec.params {
            ModelParams::Cmm(params) => {
                let g = sample_categorical(params.proportions(), &mut rng);
                let vote =
                    mallows::sample_mallows(spec.ground_truth(), params.dispersions()[g], &mut rng);
                let pred_phi = match &spec.prediction {
                    Some(PredictionParams::Dispersions(phi)) => phi[g],
                    _ => params.dispersions()[g],
                };
                let prediction = mallows::sample_mallows(spec.ground_truth(), pred_phi, &mut rng);
                PairedDraw {
                    vote,
                    prediction,
                    group: g,
                }
            }
            ModelParams::Cmpl(params) => {
                let g = sample_categorical(params.proportions(), &mut rng);
                let vote = plackett::sample_pl(spec.ground_truth(), &params.strengths()[g], &mut rng);
                let pred_theta = match &spec.prediction {
                    Some(PredictionParams::Strengths(rows)) => &rows[g],
                    _ => &params.strengths()[g],
                };
                let prediction = plackett::sample_pl(spec.ground_truth(), pred_theta, &mut rng);
                PairedDraw {
                    vote,
                    prediction,
                    group: g,
                }
            }
        };
        out.push(draw);
    }
    Ok(out)
}

/// Probability that a voter's ranking restricts to the partial ranking `p`:
/// the sum of full-model probabilities over all extensions of `p`.
pub fn partial_marginal(p: &PartialRanking, spec: &ModelSpec) -> Result<f64> {
    if p.ambient_m() != spec.m() {
        return Err(Error::DimensionMismatch {
            expected: spec.m(),
            got: p.ambient_m(),
        });
    }
    let mut total = 0.0;
    for ext in extensions(p)? {
        total += model_prob(&ext, spec)?;
    }
    Ok(total)
}
