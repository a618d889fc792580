//! Laboratory for *surprisingly popular* (SP) vote aggregation over rankings.
//!
//! Voters are modeled as a finite mixture of expertise groups. Every group
//! votes around the same ground-truth ranking but with its own dispersion, so
//! the mixture is *concentric*: better-informed groups concentrate more mass
//! near the truth. Two concrete families are implemented — a mixture of
//! Mallows models and a mixture of Plackett–Luce models — together with the
//! exact small-`m` machinery needed to study when the SP rule (pick the answer
//! more popular than voters predicted) recovers the ground truth:
//!
//! * [`rankings`] — permutations, Kendall tau, dense ranking indices.
//! * [`models`] — exact kernels and seeded samplers for both mixtures.
//! * [`sp`] — posteriors over the truth, peer-prediction vectors, exact and
//!   empirical SP scores, and SP voting on full or partial rankings.
//! * [`baselines`] — Copeland and Borda reference aggregators.
//! * [`identifiability`] — closed-form sufficient conditions under which the
//!   ground truth is exactly the surprisingly-popular answer, plus a sample
//!   complexity bound.
//! * [`inference`] — adaptive random-walk Metropolis posterior sampling for
//!   mixture parameters, and full-ranking prediction from subset fits.
//! * [`experiments`] — Monte-Carlo sample-complexity comparisons of SP
//!   against the baselines, on synthetic draws or a bundled dataset.
//! * [`io`] — CSV/JSON formats for profiles, ground truths, and results.
//!
//! Everything that enumerates all `m!` rankings is guarded by
//! [`rankings::MAX_ENUM_M`]; samplers and aggregators work for larger `m`.

pub mod baselines;
pub mod error;
pub mod experiments;
pub mod identifiability;
pub mod inference;
pub mod io;
pub mod models;
pub mod rankings;
pub mod sp;

pub use error::{Error, Result};
