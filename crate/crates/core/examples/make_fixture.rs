//! Generates the vendored demonstration dataset under `data/`: three
//! domains (geography, movies, paintings), four five-alternative questions
//! per domain drawn from a 12-alternative universe with overlaps, and 48
//! participants per domain answering every question.
//!
//! Each question is built around a popular misbelief: the majority ranks
//! one prominent adjacent pair the wrong way round, a small expert group
//! votes the true order, and nearly everyone *predicts* the popular
//! (wrong) order. That is exactly the regime where prediction-corrected
//! aggregation should beat pairwise-majority aggregation, and the
//! generator verifies that direction before writing anything.
//!
//! Votes and predictions are drawn from a small per-question support set
//! of plausible orderings (truth, the misbelief, and two blends), with a
//! few anchored rank predictions so every voted ordering also appears in
//! the prediction pool. Without that clustering, a vote-class-level SP
//! score at 48 reports over 120 possible orderings degenerates: any stray
//! ordering nobody predicted would win by default.
//!
//! Run with `cargo run -p sp-core --example make_fixture -- [out_dir]`
//! (default `data`). Output is deterministic for the fixed seed below.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sp_core::baselines::copeland;
use sp_core::io::{join_ground_truths, save_ground_truths, save_profiles, LoadedQuestion};
use sp_core::rankings::{kendall_tau, PartialRanking};
use sp_core::sp::{sp_vote_modal, PredictionReport, Profile, VoterReport};
use std::collections::BTreeMap;

const SEED: u64 = 20260816;
const N_PARTICIPANTS: usize = 48;
const N_EXPERTS: usize = 7;
const N_INTERMEDIATE: usize = 17;

/// Universe of 12 alternatives per domain, listed in ground-truth order
/// (best first, per the domain's metric).
struct Domain {
    name: &'static str,
    /// countries by population; movies by worldwide box office; paintings
    /// by age (oldest first)
    universe: [&'static str; 12],
}

const DOMAINS: [Domain; 3] = [
    Domain {
        name: "geography",
        universe: [
            "india",
            "china",
            "usa",
            "indonesia",
            "pakistan",
            "nigeria",
            "brazil",
            "bangladesh",
            "russia",
            "mexico",
            "japan",
            "philippines",
        ],
    },
    Domain {
        name: "movies",
        universe: [
            "avatar",
            "avengers_endgame",
            "avatar_way_of_water",
            "titanic",
            "star_wars_force_awakens",
            "avengers_infinity_war",
            "ne_zha_2",
            "spider_man_no_way_home",
            "inside_out_2",
            "jurassic_world",
            "lion_king_2019",
            "the_avengers",
        ],
    },
    Domain {
        name: "paintings",
        universe: [
            "last_supper",
            "mona_lisa",
            "sistine_madonna",
            "girl_with_pearl_earring",
            "the_swing",
            "great_wave",
            "olympia",
            "starry_night",
            "the_scream",
            "persistence_of_memory",
            "guernica",
            "campbells_soup_cans",
        ],
    },
];

/// Overlapping question subsets, as positions in the universe order. The
/// overlaps give the full-ranking stitcher transitive links and together
/// the four subsets cover all 12 alternatives.
const SUBSETS: [[usize; 5]; 4] = [
    [0, 1, 2, 3, 4],
    [3, 4, 5, 6, 7],
    [6, 7, 8, 9, 10],
    [9, 10, 11, 0, 1],
];

/// Vote weights over the support orderings [truth, misbelief, blend A,
/// blend B] per expertise tier.
const VOTE_WEIGHTS: [[f64; 4]; 3] = [
    [0.75, 0.05, 0.10, 0.10], // experts
    [0.28, 0.44, 0.14, 0.14], // intermediates
    [0.06, 0.66, 0.14, 0.14], // non-experts
];

/// Prediction weights over the same support, shared by every tier: the
/// misbelief is common knowledge, so it dominates what people expect
/// others to say.
const PREDICTION_WEIGHTS: [f64; 4] = [0.12, 0.58, 0.15, 0.15];

/// Report indices whose predictions are pinned to rank reports of
/// support orderings 0..4, guaranteeing prediction coverage.
const ANCHORS: [usize; 4] = [5, 17, 29, 41];

fn pick(rng: &mut ChaCha8Rng, weights: &[f64]) -> usize {
    let mut x: f64 = rng.random();
    for (i, w) in weights.iter().enumerate() {
        x -= w;
        if x <= 0.0 {
            return i;
        }
    }
    weights.len() - 1
}

fn swapped(order: &[usize], at: usize) -> Vec<usize> {
    let mut out = order.to_vec();
    out.swap(at, at + 1);
    out
}

fn main() {
    let out_dir = std::env::args().nth(1).unwrap_or_else(|| "data".into());
    std::fs::create_dir_all(&out_dir).expect("output directory");

    let mut questions = BTreeMap::new();
    let mut truths = BTreeMap::new();

    for (di, domain) in DOMAINS.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ (di as u64) << 8);

        // participant ids and a persistent expertise tier for each
        let participants: Vec<String> = (1..=N_PARTICIPANTS).map(|i| format!("p{i:02}")).collect();
        let mut order: Vec<usize> = (0..N_PARTICIPANTS).collect();
        order.shuffle(&mut rng);
        let mut tier = vec![2usize; N_PARTICIPANTS];
        for (slot, &who) in order.iter().enumerate() {
            tier[who] = if slot < N_EXPERTS {
                0
            } else if slot < N_EXPERTS + N_INTERMEDIATE {
                1
            } else {
                2
            };
        }

        for (qi, subset) in SUBSETS.iter().enumerate() {
            let question_id = format!("q{}", qi + 1);

            // the five ids, and the true order among them (universe order)
            let mut members = subset.to_vec();
            members.sort_unstable();
            let truth_ids: Vec<&str> = members.iter().map(|&u| domain.universe[u]).collect();

            // dense index space: ids sorted lexicographically
            let mut alternatives: Vec<String> =
                truth_ids.iter().map(|s| s.to_string()).collect();
            alternatives.sort();
            let dense = |id: &str| alternatives.iter().position(|a| a == id).unwrap();

            // support orderings in dense indices: truth, a misbelief
            // swapping a prominent adjacent pair, and two blends (one per
            // side of that pair)
            let truth_dense: Vec<usize> = truth_ids.iter().map(|id| dense(id)).collect();
            let top_swap = qi % 2;
            let misbelief = swapped(&truth_dense, top_swap);
            let blend_a = swapped(&truth_dense, 3);
            let blend_b = swapped(&misbelief, 3);
            let support = [truth_dense.clone(), misbelief, blend_a, blend_b];

            let mut reports = Vec::with_capacity(N_PARTICIPANTS);
            for who in 0..N_PARTICIPANTS {
                let vote = &support[pick(&mut rng, &VOTE_WEIGHTS[tier[who]])];
                let predicted = &support[pick(&mut rng, &PREDICTION_WEIGHTS)];
                let anchor = ANCHORS.iter().position(|&a| a == who);
                let style: f64 = rng.random();
                let prediction = if let Some(slot) = anchor {
                    PredictionReport::ModalRanking(
                        PartialRanking::new(support[slot].clone(), 5).unwrap(),
                    )
                } else if style < 0.72 {
                    PredictionReport::ModalRanking(
                        PartialRanking::new(predicted.clone(), 5).unwrap(),
                    )
                } else if style < 0.90 {
                    PredictionReport::Top(predicted[0])
                } else {
                    let t = 2 + (rng.random_range(0..2usize));
                    PredictionReport::TopT(predicted[..t].to_vec())
                };
                reports.push(VoterReport {
                    vote: PartialRanking::new(vote.clone(), 5).unwrap(),
                    prediction,
                });
            }

            let key = (domain.name.to_string(), question_id);
            questions.insert(
                key.clone(),
                LoadedQuestion {
                    profile: Profile::new_full(5, reports).unwrap(),
                    alternatives,
                    participants: participants.clone(),
                },
            );
            truths.insert(key, truth_ids.iter().map(|s| s.to_string()).collect());
        }
    }

    // direction check before anything is written: at the full sample,
    // prediction-corrected aggregation should sit at or below the
    // pairwise-majority baseline on average
    let joined = join_ground_truths(&questions, &truths).expect("fixture joins");
    let mut sp_total = 0usize;
    let mut copeland_total = 0usize;
    println!("question                 sp-modal  copeland");
    for (key, (profile, truth)) in questions.keys().zip(&joined) {
        let sp_kt = kendall_tau(&sp_vote_modal(profile).unwrap(), truth).unwrap();
        let votes: Vec<_> = profile
            .reports()
            .iter()
            .map(|r| r.vote.clone().into_total().unwrap())
            .collect();
        let cope_kt = kendall_tau(&copeland(&votes).unwrap(), truth).unwrap();
        println!("{:24} {sp_kt:8} {cope_kt:9}", format!("{}/{}", key.0, key.1));
        sp_total += sp_kt;
        copeland_total += cope_kt;
    }
    let n_q = joined.len() as f64;
    println!(
        "mean Kendall tau: sp-modal {:.3}, copeland {:.3}",
        sp_total as f64 / n_q,
        copeland_total as f64 / n_q
    );
    assert!(
        sp_total <= copeland_total,
        "fixture lost the intended direction; adjust weights or seed"
    );

    let profiles_path = format!("{out_dir}/profiles.csv");
    let truth_path = format!("{out_dir}/ground_truth.csv");
    save_profiles(&questions, &profiles_path).expect("write profiles");
    save_ground_truths(&truths, &truth_path).expect("write ground truths");
    println!(
        "wrote {} questions x {N_PARTICIPANTS} reports to {profiles_path} and {truth_path}",
        questions.len()
    );
}
