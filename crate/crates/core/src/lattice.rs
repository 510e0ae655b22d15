//! Strategies quantized to multiples of `1/I`, and the annealing move set.

use std::fmt;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{MixedStrategy, StrategyProfile};
use crate::scalar::Scalar;

/// Integer counts over actions summing to the interval count `I`; action `i`
/// has probability `counts[i] / I`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct QuantizedStrategy {
    counts: Vec<u32>,
    intervals: u32,
}

impl QuantizedStrategy {
    pub fn new(counts: Vec<u32>, intervals: u32) -> Result<Self> {
        if intervals == 0 {
            return Err(Error::Lattice("interval count must be at least 1".into()));
        }
        if counts.is_empty() {
            return Err(Error::Lattice("strategy over zero actions".into()));
        }
        let sum: u64 = counts.iter().map(|&c| u64::from(c)).sum();
        if sum != u64::from(intervals) {
            return Err(Error::Lattice(format!("counts {counts:?} sum to {sum}, not {intervals}")));
        }
        Ok(Self { counts, intervals })
    }

    pub fn pure(len: usize, action: usize, intervals: u32) -> Self {
        let mut counts = vec![0; len];
        counts[action] = intervals;
        Self { counts, intervals }
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn intervals(&self) -> u32 {
        self.intervals
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Exact probabilities `counts[i] / I`.
    pub fn dequantize<T: Scalar>(&self) -> MixedStrategy<T> {
        let den = i64::from(self.intervals);
        MixedStrategy::new(self.counts.iter().map(|&c| T::from_fraction(i64::from(c), den)).collect())
            .expect("lattice point is on the simplex")
    }

    /// Largest-remainder rounding of `I * probs` (ties go to the lower index).
    pub fn quantize<T: Scalar>(s: &MixedStrategy<T>, intervals: u32) -> Result<Self> {
        if intervals == 0 {
            return Err(Error::Lattice("interval count must be at least 1".into()));
        }
        let scale = T::from_int(i64::from(intervals));
        let mut counts = Vec::with_capacity(s.len());
        let mut remainders = Vec::with_capacity(s.len());
        for x in s.probs() {
            let v = x.clone() * scale.clone();
            let fl = v.floor_value();
            counts.push(fl.to_u32().unwrap_or(0));
            remainders.push(v - fl);
        }
        let assigned: u32 = counts.iter().sum();
        let mut missing = intervals.saturating_sub(assigned) as usize;
        let mut order: Vec<usize> = (0..counts.len()).collect();
        // Stable sort keeps lower indices first among equal remainders.
        order.sort_by(|&a, &b| remainders[b].partial_cmp(&remainders[a]).unwrap_or(std::cmp::Ordering::Equal));
        for &i in order.iter().cycle() {
            if missing == 0 {
                break;
            }
            counts[i] += 1;
            missing -= 1;
        }
        Self::new(counts, intervals)
    }

    /// Uniform draw over all compositions of `I` into `len` nonnegative parts
    /// (stars and bars: choose `len - 1` bar positions among `I + len - 1`).
    pub fn random<R: Rng + ?Sized>(len: usize, intervals: u32, rng: &mut R) -> Self {
        assert!(len >= 1 && intervals >= 1);
        let slots = intervals as usize + len - 1;
        let mut bars = index::sample(rng, slots, len - 1).into_vec();
        bars.sort_unstable();
        let mut counts = Vec::with_capacity(len);
        let mut prev = 0usize;
        for b in bars {
            counts.push((b - prev) as u32);
            prev = b + 1;
        }
        counts.push((slots - prev) as u32);
        Self { counts, intervals }
    }

    /// Move one quantum from a uniformly chosen donor (count > 0) to a
    /// uniformly chosen different recipient. Requires `len() >= 2`.
    fn transfer<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let donors: Vec<usize> = (0..self.counts.len()).filter(|&i| self.counts[i] > 0).collect();
        let from = donors[rng.random_range(0..donors.len())];
        let mut to = rng.random_range(0..self.counts.len() - 1);
        if to >= from {
            to += 1;
        }
        self.counts[from] -= 1;
        self.counts[to] += 1;
    }

    /// Every strategy reachable by one quantum transfer.
    pub fn transfers(&self) -> Vec<Self> {
        let mut out = Vec::new();
        for from in 0..self.counts.len() {
            if self.counts[from] == 0 {
                continue;
            }
            for to in 0..self.counts.len() {
                if to != from {
                    let mut next = self.clone();
                    next.counts[from] -= 1;
                    next.counts[to] += 1;
                    out.push(next);
                }
            }
        }
        out
    }
}

impl fmt::Display for QuantizedStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.counts.iter().map(u32::to_string).collect();
        write!(f, "({})/{}", parts.join(","), self.intervals)
    }
}

/// A lattice point for both players, sharing one `I`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct QuantizedProfile {
    pub p: QuantizedStrategy,
    pub q: QuantizedStrategy,
}

/// Which players change per proposal.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MoveKind {
    /// One uniformly chosen player moves one quantum.
    #[default]
    OnePlayer,
    /// Both players move one quantum each.
    BothPlayers,
}

impl QuantizedProfile {
    pub fn new(p: QuantizedStrategy, q: QuantizedStrategy) -> Result<Self> {
        if p.intervals != q.intervals {
            return Err(Error::Lattice(format!(
                "players use different interval counts ({} vs {})",
                p.intervals, q.intervals
            )));
        }
        Ok(Self { p, q })
    }

    pub fn from_counts(p: Vec<u32>, q: Vec<u32>, intervals: u32) -> Result<Self> {
        Self::new(QuantizedStrategy::new(p, intervals)?, QuantizedStrategy::new(q, intervals)?)
    }

    pub fn pure(n: usize, m: usize, i: usize, j: usize, intervals: u32) -> Self {
        Self {
            p: QuantizedStrategy::pure(n, i, intervals),
            q: QuantizedStrategy::pure(m, j, intervals),
        }
    }

    pub fn intervals(&self) -> u32 {
        self.p.intervals
    }

    pub fn dequantize<T: Scalar>(&self) -> StrategyProfile<T> {
        StrategyProfile::new(self.p.dequantize(), self.q.dequantize())
    }

    pub fn quantize<T: Scalar>(prof: &StrategyProfile<T>, intervals: u32) -> Result<Self> {
        Ok(Self {
            p: QuantizedStrategy::quantize(&prof.p, intervals)?,
            q: QuantizedStrategy::quantize(&prof.q, intervals)?,
        })
    }

    /// Exact lattice representation, or `None` when some probability is not a
    /// multiple of `1/I`.
    pub fn exact_from<T: Scalar>(prof: &StrategyProfile<T>, intervals: u32) -> Option<Self> {
        let lift = |s: &MixedStrategy<T>| -> Option<QuantizedStrategy> {
            let scale = T::from_int(i64::from(intervals));
            let counts = s
                .probs()
                .iter()
                .map(|x| {
                    let v = x.clone() * scale.clone();
                    if v.floor_value() == v {
                        v.to_u32()
                    } else {
                        None
                    }
                })
                .collect::<Option<Vec<u32>>>()?;
            QuantizedStrategy::new(counts, intervals).ok()
        };
        Some(Self { p: lift(&prof.p)?, q: lift(&prof.q)? })
    }

    pub fn random<R: Rng + ?Sized>(n: usize, m: usize, intervals: u32, rng: &mut R) -> Self {
        Self {
            p: QuantizedStrategy::random(n, intervals, rng),
            q: QuantizedStrategy::random(m, intervals, rng),
        }
    }

    /// Proposal for the annealer. With [`MoveKind::OnePlayer`] exactly one
    /// player's strategy changes, in two coordinates, by one count each. A
    /// player with a single action cannot move, so the other player is used;
    /// when neither can move the profile is returned unchanged.
    pub fn neighbor<R: Rng + ?Sized>(&self, kind: MoveKind, rng: &mut R) -> Self {
        let mut next = self.clone();
        let p_mobile = self.p.len() > 1;
        let q_mobile = self.q.len() > 1;
        match kind {
            MoveKind::OnePlayer => {
                let pick_p = match (p_mobile, q_mobile) {
                    (false, false) => return next,
                    (true, false) => true,
                    (false, true) => false,
                    (true, true) => rng.random_bool(0.5),
                };
                if pick_p {
                    next.p.transfer(rng);
                } else {
                    next.q.transfer(rng);
                }
            }
            MoveKind::BothPlayers => {
                if p_mobile {
                    next.p.transfer(rng);
                }
                if q_mobile {
                    next.q.transfer(rng);
                }
            }
        }
        next
    }

    /// All single-player one-quantum neighbors.
    pub fn neighbors(&self) -> Vec<Self> {
        let mut out: Vec<Self> =
            self.p.transfers().into_iter().map(|p| Self { p, q: self.q.clone() }).collect();
        out.extend(self.q.transfers().into_iter().map(|q| Self { p: self.p.clone(), q }));
        out
    }

    /// L1 distance between count vectors of both players.
    pub fn count_distance(&self, other: &Self) -> u64 {
        let l1 = |a: &[u32], b: &[u32]| a.iter().zip(b).map(|(x, y)| u64::from(x.abs_diff(*y))).sum::<u64>();
        l1(&self.p.counts, &other.p.counts) + l1(&self.q.counts, &other.q.counts)
    }
}

impl fmt::Display for QuantizedProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p={} q={}", self.p, self.q)
    }
}

/// All compositions of `total` into `len` nonnegative parts, in lexicographic
/// order of the count vectors (descending first coordinate).
pub fn compositions(len: usize, total: u32) -> Vec<Vec<u32>> {
    fn rec(len: usize, total: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if len == 1 {
            prefix.push(total);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for first in (0..=total).rev() {
            prefix.push(first);
            rec(len - 1, total - first, prefix, out);
            prefix.pop();
        }
    }
    assert!(len >= 1);
    let mut out = Vec::new();
    rec(len, total, &mut Vec::with_capacity(len), &mut out);
    out
}

/// Every lattice profile of an `n × m` game at resolution `I`.
pub fn all_profiles(n: usize, m: usize, intervals: u32) -> Vec<QuantizedProfile> {
    let ps = compositions(n, intervals);
    let qs = compositions(m, intervals);
    let mut out = Vec::with_capacity(ps.len() * qs.len());
    for p in &ps {
        for q in &qs {
            out.push(QuantizedProfile {
                p: QuantizedStrategy { counts: p.clone(), intervals },
                q: QuantizedStrategy { counts: q.clone(), intervals },
            });
        }
    }
    out
}
