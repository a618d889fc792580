//! Classical aggregation rules used as comparators: Copeland and Borda.

use crate::error::{Error, Result};
use crate::rankings::{PartialRanking, Ranking};

/// Pairwise win counts: `wins[a][b]` is the number of ballots ranking `a`
/// above `b`. For full-ranking profiles `wins[a][b] + wins[b][a] = n`;
/// partial ballots only add counts for the pairs they cover.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairwiseTally {
    m: usize,
    wins: Vec<Vec<u64>>,
}

impl PairwiseTally {
    pub fn new(m: usize) -> Self {
        PairwiseTally {
            m,
            wins: vec![vec![0; m]; m],
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn wins(&self, a: usize, b: usize) -> u64 {
        self.wins[a][b]
    }

    /// Records one ballot ranking `winner` above `loser`.
    pub fn add_pair(&mut self, winner: usize, loser: usize) -> Result<()> {
        if winner >= self.m || loser >= self.m || winner == loser {
            return Err(Error::InvalidParameter(format!(
                "pair ({winner}, {loser}) out of range for m = {}",
                self.m
            )));
        }
        self.wins[winner][loser] += 1;
        Ok(())
    }

    /// Records every pair implied by a full ranking.
    pub fn add_ranking(&mut self, r: &Ranking) -> Result<()> {
        if r.m() != self.m {
            return Err(Error::DimensionMismatch {
                expected: self.m,
                got: r.m(),
            });
        }
        for i in 0..r.m() {
            for j in (i + 1)..r.m() {
                self.wins[r.at(i)][r.at(j)] += 1;
            }
        }
        Ok(())
    }

    /// Records every pair implied by an ordered subset.
    pub fn add_partial(&mut self, p: &PartialRanking) -> Result<()> {
        if p.ambient_m() != self.m {
            return Err(Error::DimensionMismatch {
                expected: self.m,
                got: p.ambient_m(),
            });
        }
        let order = p.as_slice();
        for i in 0..order.len() {
            for j in (i + 1)..order.len() {
                self.wins[order[i]][order[j]] += 1;
            }
        }
        Ok(())
    }

    /// Copeland score per alternative: one point per majority pairwise win,
    /// half a point per pairwise tie (including never-compared pairs).
    pub fn copeland_scores(&self) -> Vec<f64> {
        let mut scores = vec![0.0; self.m];
        for a in 0..self.m {
            for b in 0..self.m {
                if a == b {
                    continue;
                }
                if self.wins[a][b] > self.wins[b][a] {
                    scores[a] += 1.0;
                } else if self.wins[a][b] == self.wins[b][a] {
                    scores[a] += 0.5;
                }
            }
        }
        scores
    }

    /// Alternatives sorted by Copeland score, descending; ties broken by
    /// lower alternative id.
    pub fn copeland_ranking(&self) -> Ranking {
        rank_by_scores(&self.copeland_scores())
    }
}

/// Sorts alternatives by score descending, ids ascending on ties.
fn rank_by_scores(scores: &[f64]) -> Ranking {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| {
        scores[b]
            .partial_cmp(&scores[a])
            .expect("scores must not be NaN")
            .then(a.cmp(&b))
    });
    Ranking::new(order).expect("permutation by construction")
}

fn check_profile(votes: &[Ranking]) -> Result<usize> {
    let Some(first) = votes.first() else {
        return Err(Error::EmptyInput("no votes to aggregate".into()));
    };
    let m = first.m();
    for v in votes {
        if v.m() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: v.m(),
            });
        }
    }
    Ok(m)
}

/// Copeland rule over full rankings.
pub fn copeland(votes: &[Ranking]) -> Result<Ranking> {
    let m = check_profile(votes)?;
    let mut tally = PairwiseTally::new(m);
    for v in votes {
        tally.add_ranking(v)?;
    }
    Ok(tally.copeland_ranking())
}

/// Borda scores: each ballot grants an alternative `m - 1 - position` points.
pub fn borda_scores(votes: &[Ranking]) -> Result<Vec<f64>> {
    let m = check_profile(votes)?;
    let mut scores = vec![0.0; m];
    for v in votes {
        for (pos, &a) in v.as_slice().iter().enumerate() {
            scores[a] += (m - 1 - pos) as f64;
        }
    }
    Ok(scores)
}

/// Borda rule over full rankings.
pub fn borda(votes: &[Ranking]) -> Result<Ranking> {
    Ok(rank_by_scores(&borda_scores(votes)?))
}
