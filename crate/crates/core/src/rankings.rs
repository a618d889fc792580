//! Rankings as permutations, Kendall tau, and dense ranking indices.
//!
//! A [`Ranking`] lists alternatives by position: element 0 is the alternative
//! ranked first. Alternatives are `0..m`. The bijection between rankings and
//! `0..m!` ([`rank_index`] / [`unrank`]) is lexicographic in this position
//! representation, so index `0` is the identity ranking and index `m! - 1`
//! is the full reversal. Anything that touches all `m!` rankings is guarded
//! by [`MAX_ENUM_M`].

use crate::error::{Error, Result};
use std::fmt;

/// Largest `m` for which full enumeration of `m!` rankings is permitted.
pub const MAX_ENUM_M: usize = 10;

/// Dense index of a ranking within the lexicographic enumeration of all
/// rankings of the same `m`.
pub type RankIndex = usize;

/// A total ranking of the alternatives `0..m`, listed best-first.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Ranking(Vec<usize>);

impl Ranking {
    /// Validates that `order` is a permutation of `0..order.len()`.
    pub fn new(order: Vec<usize>) -> Result<Self> {
        let m = order.len();
        if m == 0 {
            return Err(Error::InvalidRanking("ranking must be non-empty".into()));
        }
        let mut seen = vec![false; m];
        for &a in &order {
            if a >= m {
                return Err(Error::InvalidRanking(format!(
                    "alternative {a} out of range for m = {m}"
                )));
            }
            if seen[a] {
                return Err(Error::InvalidRanking(format!("alternative {a} repeated")));
            }
            seen[a] = true;
        }
        Ok(Ranking(order))
    }

    /// The identity ranking `0 > 1 > ... > m-1`.
    pub fn identity(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidRanking("ranking must be non-empty".into()));
        }
        Ok(Ranking((0..m).collect()))
    }

    /// Internal constructor for orders already known to be permutations.
    pub(crate) fn from_valid(order: Vec<usize>) -> Self {
        debug_assert!(Ranking::new(order.clone()).is_ok());
        Ranking(order)
    }

    /// Number of alternatives.
    pub fn m(&self) -> usize {
        self.0.len()
    }

    /// Alternative at (0-based) position `pos`.
    pub fn at(&self, pos: usize) -> usize {
        self.0[pos]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    /// Position of each alternative: `positions()[a]` is where `a` sits.
    pub fn positions(&self) -> Vec<usize> {
        let mut pos = vec![0; self.0.len()];
        for (i, &a) in self.0.iter().enumerate() {
            pos[a] = i;
        }
        pos
    }

    /// The same ranking read bottom-up.
    pub fn reversed(&self) -> Ranking {
        let mut order = self.0.clone();
        order.reverse();
        Ranking(order)
    }

    /// Parses the `>`-separated text form, e.g. `"2>0>1"`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut order = Vec::new();
        for part in text.split('>') {
            let part = part.trim();
            let a: usize = part.parse().map_err(|_| {
                Error::InvalidRanking(format!("`{part}` is not an alternative id"))
            })?;
            order.push(a);
        }
        Ranking::new(order)
    }

    /// The `>`-separated text form, inverse of [`Ranking::parse`].
    pub fn to_text(&self) -> String {
        self.0
            .iter()
            .map(|a| a.to_string())
            .collect::<Vec<_>>()
            .join(">")
    }
}

impl fmt::Debug for Ranking {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Ranking({})", self.to_text())
    }
}

impl fmt::Display for Ranking {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// A strict ordering of a subset of the alternatives `0..m`, best-first.
///
/// Unlisted alternatives are unranked rather than tied: the ballot carries
/// no information about them. The ambient `m` is kept so that subsets drawn
/// from the same universe stay comparable.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PartialRanking {
    order: Vec<usize>,
    m: usize,
}

impl PartialRanking {
    /// Validates that `order` lists distinct alternatives below `m`.
    pub fn new(order: Vec<usize>, m: usize) -> Result<Self> {
        if order.is_empty() {
            return Err(Error::InvalidRanking(
                "partial ranking must be non-empty".into(),
            ));
        }
        let mut seen = vec![false; m];
        for &a in &order {
            if a >= m {
                return Err(Error::InvalidRanking(format!(
                    "alternative {a} out of range for m = {m}"
                )));
            }
            if seen[a] {
                return Err(Error::InvalidRanking(format!("alternative {a} repeated")));
            }
            seen[a] = true;
        }
        Ok(PartialRanking { order, m })
    }

    /// Number of ranked alternatives.
    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Ambient number of alternatives.
    pub fn ambient_m(&self) -> usize {
        self.m
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.order
    }

    /// The ranked subset in increasing alternative order.
    pub fn subset_sorted(&self) -> Vec<usize> {
        let mut s = self.order.clone();
        s.sort_unstable();
        s
    }

    /// True when every alternative of the universe is ranked.
    pub fn is_total(&self) -> bool {
        self.order.len() == self.m
    }

    /// Converts a total partial ranking into a [`Ranking`].
    pub fn into_total(self) -> Result<Ranking> {
        if !self.is_total() {
            return Err(Error::InvalidRanking(format!(
                "{} of {} alternatives ranked",
                self.order.len(),
                self.m
            )));
        }
        Ok(Ranking::from_valid(self.order))
    }
}

impl fmt::Debug for PartialRanking {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let text = self
            .order
            .iter()
            .map(|a| a.to_string())
            .collect::<Vec<_>>()
            .join(">");
        write!(f, "PartialRanking({text} of m={})", self.m)
    }
}

/// `m!` as a `usize`. Panics on overflow (m > 20 on 64-bit targets), which is
/// far beyond every enumeration guard in this crate.
pub fn factorial(m: usize) -> usize {
    (1..=m).product::<usize>().max(1)
}

fn guard_enum(m: usize) -> Result<()> {
    if m > MAX_ENUM_M {
        return Err(Error::CapacityExceeded { m, max: MAX_ENUM_M });
    }
    Ok(())
}

/// Kendall tau distance: the number of unordered pairs on which the two
/// rankings disagree. Ranges over `0..=m(m-1)/2`.
pub fn kendall_tau(a: &Ranking, b: &Ranking) -> Result<usize> {
    if a.m() != b.m() {
        return Err(Error::DimensionMismatch {
            expected: a.m(),
            got: b.m(),
        });
    }
    let pa = a.positions();
    let pb = b.positions();
    let m = a.m();
    let mut d = 0;
    for x in 0..m {
        for y in (x + 1)..m {
            if (pa[x] < pa[y]) != (pb[x] < pb[y]) {
                d += 1;
            }
        }
    }
    Ok(d)
}

/// All `m!` rankings in lexicographic order of their position sequence,
/// so `out[i]` has [`rank_index`] `i`.
pub fn enumerate_rankings(m: usize) -> Result<Vec<Ranking>> {
    if m == 0 {
        return Err(Error::InvalidRanking("ranking must be non-empty".into()));
    }
    guard_enum(m)?;
    let total = factorial(m);
    let mut out = Vec::with_capacity(total);
    let mut current: Vec<usize> = (0..m).collect();
    loop {
        out.push(Ranking::from_valid(current.clone()));
        // next lexicographic permutation
        let Some(i) = (0..m.saturating_sub(1)).rev().find(|&i| current[i] < current[i + 1])
        else {
            break;
        };
        let j = (i + 1..m).rev().find(|&j| current[j] > current[i]).unwrap();
        current.swap(i, j);
        current[i + 1..].reverse();
    }
    debug_assert_eq!(out.len(), total);
    Ok(out)
}

/// Lexicographic index of `r` among all rankings of the same `m`
/// (the Lehmer code read as a factorial-base number).
pub fn rank_index(r: &Ranking) -> Result<RankIndex> {
    let m = r.m();
    guard_enum(m)?;
    let mut idx = 0usize;
    for i in 0..m {
        let smaller_later = (i + 1..m).filter(|&j| r.at(j) < r.at(i)).count();
        idx += smaller_later * factorial(m - 1 - i);
    }
    Ok(idx)
}

/// Inverse of [`rank_index`]: the ranking of `m` alternatives at position
/// `idx` in lexicographic order.
pub fn unrank(idx: RankIndex, m: usize) -> Result<Ranking> {
    if m == 0 {
        return Err(Error::InvalidRanking("ranking must be non-empty".into()));
    }
    guard_enum(m)?;
    let total = factorial(m);
    if idx >= total {
        return Err(Error::InvalidParameter(format!(
            "rank index {idx} out of range for m = {m} (max {})",
            total - 1
        )));
    }
    let mut remaining: Vec<usize> = (0..m).collect();
    let mut rest = idx;
    let mut order = Vec::with_capacity(m);
    for i in 0..m {
        let f = factorial(m - 1 - i);
        order.push(remaining.remove(rest / f));
        rest %= f;
    }
    Ok(Ranking::from_valid(order))
}

/// Restriction of a total ranking to a subset of alternatives: the subset
/// members in the order `r` ranks them, with the ambient `m` retained.
pub fn restrict(r: &Ranking, subset: &[usize]) -> Result<PartialRanking> {
    let m = r.m();
    if subset.is_empty() {
        return Err(Error::InvalidRanking("subset must be non-empty".into()));
    }
    let mut wanted = vec![false; m];
    for &a in subset {
        if a >= m {
            return Err(Error::InvalidRanking(format!(
                "alternative {a} out of range for m = {m}"
            )));
        }
        if wanted[a] {
            return Err(Error::InvalidRanking(format!("alternative {a} repeated")));
        }
        wanted[a] = true;
    }
    let order: Vec<usize> = r
        .as_slice()
        .iter()
        .copied()
        .filter(|&a| wanted[a])
        .collect();
    Ok(PartialRanking { order, m })
}

/// Dense index of an ordered subset among the `k!` orderings of the same
/// subset, lexicographic with alternatives compared by id. The inverse is
/// [`ordering_from_index`]. For a total ranking this coincides with
/// [`rank_index`].
pub fn ordering_index(p: &PartialRanking) -> Result<RankIndex> {
    let sorted = p.subset_sorted();
    let local: Vec<usize> = p
        .as_slice()
        .iter()
        .map(|a| sorted.binary_search(a).expect("member of own subset"))
        .collect();
    rank_index(&Ranking::from_valid(local))
}

/// The ordering of `subset` (given sorted) at position `idx` among its `k!`
/// orderings; inverse of [`ordering_index`].
pub fn ordering_from_index(subset: &[usize], idx: RankIndex, m: usize) -> Result<PartialRanking> {
    let k = subset.len();
    let local = unrank(idx, k)?;
    let order: Vec<usize> = local.as_slice().iter().map(|&i| subset[i]).collect();
    PartialRanking::new(order, m)
}

/// All `k!` orderings of `subset` in [`ordering_index`] order.
pub fn subset_orderings(subset: &[usize], m: usize) -> Result<Vec<PartialRanking>> {
    let k = subset.len();
    let mut out = Vec::with_capacity(factorial(k));
    for perm in enumerate_rankings(k)? {
        let order: Vec<usize> = perm.as_slice().iter().map(|&i| subset[i]).collect();
        out.push(PartialRanking::new(order, m)?);
    }
    Ok(out)
}

/// All total rankings consistent with a partial one: every way of placing the
/// unranked alternatives without disturbing the listed order. With `k` of `m`
/// alternatives ranked there are `C(m,k) * (m-k)! = m!/k!` of them.
pub fn extensions(p: &PartialRanking) -> Result<Vec<Ranking>> {
    let m = p.ambient_m();
    guard_enum(m)?;
    let k = p.len();
    let mut listed = vec![false; m];
    for &a in p.as_slice() {
        listed[a] = true;
    }
    let others: Vec<usize> = (0..m).filter(|&a| !listed[a]).collect();
    if others.is_empty() {
        return Ok(vec![Ranking::from_valid(p.as_slice().to_vec())]);
    }
    // Every extension = a choice of k positions for the listed chain (kept in
    // order) + an arrangement of the others in the remaining positions.
    let other_perms = enumerate_rankings(others.len())?;
    let mut out = Vec::with_capacity(factorial(m) / factorial(k));
    let mut comb: Vec<usize> = (0..k).collect(); // positions taken by the chain
    loop {
        let mut taken = vec![false; m];
        for &pos in &comb {
            taken[pos] = true;
        }
        let free: Vec<usize> = (0..m).filter(|&pos| !taken[pos]).collect();
        for perm in &other_perms {
            let mut order = vec![usize::MAX; m];
            for (i, &pos) in comb.iter().enumerate() {
                order[pos] = p.as_slice()[i];
            }
            for (j, &pos) in free.iter().enumerate() {
                order[pos] = others[perm.at(j)];
            }
            out.push(Ranking::from_valid(order));
        }
        // advance to the next k-combination of 0..m, lexicographically
        let mut advanced = false;
        for i in (0..k).rev() {
            if comb[i] < i + m - k {
                comb[i] += 1;
                for j in i + 1..k {
                    comb[j] = comb[j - 1] + 1;
                }
                advanced = true;
                break;
            }
        }
        if !advanced {
            break;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::HashSet;

    /// Deterministic Fisher-Yates from a seed; used to build random rankings
    /// inside proptest strategies without depending on its RNG internals.
    fn shuffled(m: usize, seed: u64) -> Ranking {
        let mut order: Vec<usize> = (0..m).collect();
        let mut s = seed.wrapping_add(0x9E37_79B9_7F4A_7C15);
        for i in (1..m).rev() {
            s ^= s >> 27;
            s = s.wrapping_mul(0x2545_F491_4F6C_DD1D);
            let j = (s >> 33) as usize % (i + 1);
            order.swap(i, j);
        }
        Ranking::from_valid(order)
    }

    fn arb_ranking(max_m: usize) -> impl Strategy<Value = Ranking> {
        (1..=max_m, any::<u64>()).prop_map(|(m, seed)| shuffled(m, seed))
    }

    fn arb_ranking_pair(max_m: usize) -> impl Strategy<Value = (Ranking, Ranking)> {
        (1..=max_m, any::<u64>(), any::<u64>())
            .prop_map(|(m, s1, s2)| (shuffled(m, s1), shuffled(m, s2)))
    }

    #[test]
    fn ranking_validation_rejects_bad_orders() {
        assert!(Ranking::new(vec![]).is_err());
        assert!(Ranking::new(vec![0, 0]).is_err());
        assert!(Ranking::new(vec![0, 2]).is_err());
        assert!(Ranking::new(vec![1, 2, 0]).is_ok());
    }

    #[test]
    fn positions_inverts_order() {
        let r = Ranking::new(vec![2, 0, 3, 1]).unwrap();
        assert_eq!(r.positions(), vec![1, 3, 0, 2]);
    }

    #[test]
    fn kendall_tau_known_values() {
        let id = Ranking::identity(3).unwrap();
        let r = Ranking::new(vec![1, 2, 0]).unwrap();
        assert_eq!(kendall_tau(&id, &r).unwrap(), 2);
        assert_eq!(kendall_tau(&id, &id).unwrap(), 0);
        assert_eq!(kendall_tau(&id, &id.reversed()).unwrap(), 3);
        let id5 = Ranking::identity(5).unwrap();
        assert_eq!(kendall_tau(&id5, &id5.reversed()).unwrap(), 10);
    }

    #[test]
    fn kendall_tau_rejects_mismatched_m() {
        let a = Ranking::identity(3).unwrap();
        let b = Ranking::identity(4).unwrap();
        assert!(kendall_tau(&a, &b).is_err());
    }

    #[test]
    fn enumeration_is_lexicographic_and_complete() {
        let all = enumerate_rankings(3).unwrap();
        assert_eq!(all.len(), 6);
        assert_eq!(all[0].as_slice(), &[0, 1, 2]);
        assert_eq!(all[1].as_slice(), &[0, 2, 1]);
        assert_eq!(all[5].as_slice(), &[2, 1, 0]);
        let distinct: HashSet<_> = all.iter().cloned().collect();
        assert_eq!(distinct.len(), 6);
    }

    #[test]
    fn enumeration_guard() {
        assert!(enumerate_rankings(MAX_ENUM_M + 1).is_err());
        assert!(enumerate_rankings(0).is_err());
    }

    #[test]
    fn rank_index_known_values() {
        let id = Ranking::identity(3).unwrap();
        assert_eq!(rank_index(&id).unwrap(), 0);
        let rev = Ranking::new(vec![2, 1, 0]).unwrap();
        assert_eq!(rank_index(&rev).unwrap(), 5);
        assert_eq!(unrank(3, 3).unwrap().as_slice(), &[1, 2, 0]);
    }

    #[test]
    fn unrank_rejects_out_of_range() {
        assert!(unrank(6, 3).is_err());
        assert!(unrank(0, 0).is_err());
    }

    #[test]
    fn restrict_keeps_order_and_ambient_m() {
        let r = Ranking::new(vec![1, 2, 0]).unwrap();
        let p = restrict(&r, &[0, 2]).unwrap();
        assert_eq!(p.as_slice(), &[2, 0]);
        assert_eq!(p.ambient_m(), 3);
        assert!(restrict(&r, &[]).is_err());
        assert!(restrict(&r, &[0, 0]).is_err());
        assert!(restrict(&r, &[3]).is_err());
    }

    #[test]
    fn extensions_of_chain_2_then_0_in_m3() {
        let p = PartialRanking::new(vec![2, 0], 3).unwrap();
        let exts = extensions(&p).unwrap();
        assert_eq!(exts.len(), 3); // 3!/2!
        let got: HashSet<Vec<usize>> = exts.iter().map(|r| r.as_slice().to_vec()).collect();
        let want: HashSet<Vec<usize>> = [vec![2, 0, 1], vec![2, 1, 0], vec![1, 2, 0]]
            .into_iter()
            .collect();
        assert_eq!(got, want);
    }

    #[test]
    fn extensions_of_total_ranking_is_itself() {
        let p = PartialRanking::new(vec![1, 0, 2], 3).unwrap();
        let exts = extensions(&p).unwrap();
        assert_eq!(exts.len(), 1);
        assert_eq!(exts[0].as_slice(), &[1, 0, 2]);
    }

    #[test]
    fn ordering_index_round_trips_and_orders_lexicographically() {
        // subset {1, 3, 4} of m = 5: index 0 is 1>3>4, index 5 is 4>3>1
        let subset = [1usize, 3, 4];
        let all = subset_orderings(&subset, 5).unwrap();
        assert_eq!(all.len(), 6);
        assert_eq!(all[0].as_slice(), &[1, 3, 4]);
        assert_eq!(all[5].as_slice(), &[4, 3, 1]);
        for (i, p) in all.iter().enumerate() {
            assert_eq!(ordering_index(p).unwrap(), i);
            assert_eq!(&ordering_from_index(&subset, i, 5).unwrap(), p);
        }
        // total rankings: ordering index equals rank index
        for r in enumerate_rankings(4).unwrap() {
            let p = PartialRanking::new(r.as_slice().to_vec(), 4).unwrap();
            assert_eq!(ordering_index(&p).unwrap(), rank_index(&r).unwrap());
        }
    }

    #[test]
    fn text_round_trip() {
        let r = Ranking::parse("2>0>1").unwrap();
        assert_eq!(r.as_slice(), &[2, 0, 1]);
        assert_eq!(r.to_text(), "2>0>1");
        assert!(Ranking::parse("2>0>x").is_err());
        assert!(Ranking::parse("2>0>0").is_err());
        assert!(Ranking::parse("").is_err());
    }

    #[test]
    fn factorial_small_values() {
        assert_eq!(factorial(0), 1);
        assert_eq!(factorial(1), 1);
        assert_eq!(factorial(5), 120);
        assert_eq!(factorial(10), 3_628_800);
    }

    proptest! {
        #[test]
        fn kt_is_a_metric((a, b) in arb_ranking_pair(7)) {
            let d = kendall_tau(&a, &b).unwrap();
            prop_assert_eq!(kendall_tau(&b, &a).unwrap(), d);
            prop_assert!(d <= a.m() * (a.m() - 1) / 2);
            prop_assert_eq!(d == 0, a == b);
        }

        #[test]
        fn kt_triangle((a, b) in arb_ranking_pair(6), seed in any::<u64>()) {
            let c = shuffled(a.m(), seed);
            let ab = kendall_tau(&a, &b).unwrap();
            let ac = kendall_tau(&a, &c).unwrap();
            let cb = kendall_tau(&c, &b).unwrap();
            prop_assert!(ab <= ac + cb);
        }

        #[test]
        fn rank_unrank_round_trip(r in arb_ranking(7)) {
            let idx = rank_index(&r).unwrap();
            prop_assert!(idx < factorial(r.m()));
            prop_assert_eq!(unrank(idx, r.m()).unwrap(), r);
        }

        #[test]
        fn enumerate_agrees_with_unrank(m in 1usize..=5) {
            let all = enumerate_rankings(m).unwrap();
            for (i, r) in all.iter().enumerate() {
                prop_assert_eq!(rank_index(r).unwrap(), i);
                prop_assert_eq!(&unrank(i, m).unwrap(), r);
            }
        }

        #[test]
        fn extensions_match_brute_force_filter(r in arb_ranking(5), keep in any::<u64>()) {
            let m = r.m();
            let subset: Vec<usize> = (0..m).filter(|&a| keep & (1 << a) != 0).collect();
            prop_assume!(!subset.is_empty());
            let p = restrict(&r, &subset).unwrap();
            let exts = extensions(&p).unwrap();
            prop_assert_eq!(exts.len(), factorial(m) / factorial(p.len()));
            let brute: HashSet<Ranking> = enumerate_rankings(m).unwrap()
                .into_iter()
                .filter(|full| restrict(full, &subset).unwrap() == p)
                .collect();
            let as_set: HashSet<Ranking> = exts.into_iter().collect();
            prop_assert_eq!(as_set, brute);
        }
    }
}
