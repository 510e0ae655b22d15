//! Exact equilibrium enumeration for small games.
//!
//! Support enumeration over pairs `(S1, S2)`: the opponent's mixture is the
//! solution of the indifference system on the support, solved with
//! fraction-free elimination on big integers. Equal-size supports suffice
//! for nondegenerate games. Degeneracy is decided exactly beforehand; a
//! degenerate game is flagged and its unequal supports are scanned as well,
//! though continua of equilibria are only represented by the isolated
//! solutions the scan happens to hit.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{classify, epsilon_ne_gap, BimatrixGame, MixedStrategy, PureOrMixed, StrategyProfile};
use crate::lattice::QuantizedProfile;
use crate::{ExactProfile, Rational};

/// Largest action count per player accepted by [`enumerate_all`].
pub const MAX_ACTIONS: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NeSolution {
    #[serde(with = "profile_serde")]
    pub profile: ExactProfile,
    pub kind: PureOrMixed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NeSolutionSet {
    pub solutions: Vec<NeSolution>,
    /// Set when some mixed strategy has more pure best responses than its
    /// support size. The list may then miss equilibria.
    pub degenerate: bool,
}

impl NeSolutionSet {
    pub fn len(&self) -> usize {
        self.solutions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.solutions.is_empty()
    }

    pub fn contains(&self, prof: &ExactProfile) -> bool {
        self.solutions.iter().any(|s| &s.profile == prof)
    }

    pub fn count(&self, kind: PureOrMixed) -> usize {
        self.solutions.iter().filter(|s| s.kind == kind).count()
    }

    pub fn profiles(&self) -> impl Iterator<Item = &ExactProfile> {
        self.solutions.iter().map(|s| &s.profile)
    }
}

/// All pure equilibria, by scanning every cell for mutual best responses.
pub fn enumerate_pure(game: &BimatrixGame) -> Vec<ExactProfile> {
    let (n, m) = (game.n(), game.m());
    let (mm, nn) = (game.row_payoffs(), game.col_payoffs());
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..m {
            let col_best = (0..n).all(|k| mm.get(k, j) <= mm.get(i, j));
            let row_best = (0..m).all(|k| nn.get(i, k) <= nn.get(i, j));
            if col_best && row_best {
                out.push(StrategyProfile::pure(n, m, i, j));
            }
        }
    }
    out
}

/// All equilibria found by support enumeration, sorted by
/// `(support of p, support of q, probabilities)`.
pub fn enumerate_all(game: &BimatrixGame) -> Result<NeSolutionSet> {
    let (n, m) = (game.n(), game.m());
    if n > MAX_ACTIONS || m > MAX_ACTIONS {
        return Err(Error::Size(format!("{n}x{m} exceeds the {MAX_ACTIONS}x{MAX_ACTIONS} limit")));
    }
    let degenerate = is_degenerate(game);
    let rows = subsets(n);
    let cols = subsets(m);
    let mut found: Vec<ExactProfile> = Vec::new();
    for s1 in &rows {
        for s2 in &cols {
            if s1.len() != s2.len() && !degenerate {
                continue;
            }
            if let Some(prof) = support_candidate(game, s1, s2)? {
                if !found.contains(&prof) {
                    found.push(prof);
                }
            }
        }
    }
    let mut solutions: Vec<NeSolution> =
        found.into_iter().map(|profile| NeSolution { kind: classify(&profile), profile }).collect();
    solutions.sort_by(|a, b| sort_key(&a.profile).cmp(&sort_key(&b.profile)));
    Ok(NeSolutionSet { solutions, degenerate })
}

type SortKey<'a> = (Vec<usize>, Vec<usize>, &'a [Rational], &'a [Rational]);

fn sort_key(prof: &ExactProfile) -> SortKey<'_> {
    (prof.p.support(), prof.q.support(), prof.p.probs(), prof.q.probs())
}

/// Nonempty subsets of `0..k`, by size then lexicographically.
fn subsets(k: usize) -> Vec<Vec<usize>> {
    let mut all: Vec<Vec<usize>> =
        (1u32..(1 << k)).map(|mask| (0..k).filter(|&i| mask & (1 << i) != 0).collect()).collect();
    all.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    all
}

/// Solve for the mixture over `support` (entries of `payoff` indexed as
/// `payoff(own action, opponent action)`) that makes every opponent action
/// in `indifferent` yield the same value. Returns the full-length mixture
/// and that value when the solution is unique and nonnegative.
fn indifference_mixture(
    len: usize,
    support: &[usize],
    indifferent: &[usize],
    payoff: impl Fn(usize, usize) -> i64,
) -> Option<(Vec<BigRational>, BigRational)> {
    let k = support.len();
    let mut a: Vec<Vec<BigInt>> = Vec::with_capacity(indifferent.len() + 1);
    let mut b: Vec<BigInt> = Vec::with_capacity(indifferent.len() + 1);
    for &o in indifferent {
        let mut row: Vec<BigInt> = support.iter().map(|&s| BigInt::from(payoff(s, o))).collect();
        row.push(BigInt::from(-1));
        a.push(row);
        b.push(BigInt::zero());
    }
    let mut sum_row = vec![BigInt::from(1); k];
    sum_row.push(BigInt::zero());
    a.push(sum_row);
    b.push(BigInt::from(1));
    match solve_exact(a, b) {
        LinearSolution::Unique(x) => {
            if x[..k].iter().any(|v| v.is_negative()) {
                return None;
            }
            let mut full = vec![BigRational::zero(); len];
            for (idx, &s) in support.iter().enumerate() {
                full[s] = x[idx].clone();
            }
            Some((full, x[k].clone()))
        }
        _ => None,
    }
}

fn to_rational(v: &BigRational) -> Result<Rational> {
    match (v.numer().to_i128(), v.denom().to_i128()) {
        (Some(a), Some(b)) => Ok(Rational::new(a, b)),
        _ => Err(Error::Overflow(format!("{v} does not fit in a 128-bit rational"))),
    }
}

fn support_candidate(game: &BimatrixGame, s1: &[usize], s2: &[usize]) -> Result<Option<ExactProfile>> {
    let (n, m) = (game.n(), game.m());
    let (mm, nn) = (game.row_payoffs(), game.col_payoffs());
    // q over S2 equalizes the row player's payoffs on S1.
    let Some((q, _)) = indifference_mixture(m, s2, s1, |j, i| mm.get(i, j)) else {
        return Ok(None);
    };
    let Some((p, _)) = indifference_mixture(n, s1, s2, |i, j| nn.get(i, j)) else {
        return Ok(None);
    };
    let p = p.iter().map(to_rational).collect::<Result<Vec<_>>>()?;
    let q = q.iter().map(to_rational).collect::<Result<Vec<_>>>()?;
    let prof = StrategyProfile::new(MixedStrategy::new(p)?, MixedStrategy::new(q)?);
    let (g1, g2) = epsilon_ne_gap(game, &prof)?;
    Ok((g1.is_zero() && g2.is_zero()).then_some(prof))
}

/// Exact degeneracy test: is there a mixed strategy of either player with
/// support size `k` against which the opponent has more than `k` pure best
/// responses? Indifference systems with a non-unique solution are counted as
/// degenerate, which errs on the side of flagging.
pub fn is_degenerate(game: &BimatrixGame) -> bool {
    let (mm, nn) = (game.row_payoffs(), game.col_payoffs());
    // Row mixtures against column best responses (payoffs N[i][j]).
    has_excess_best_responses(game.n(), game.m(), |i, j| nn.get(i, j))
        // Column mixtures against row best responses (payoffs M[i][j] seen as (j, i)).
        || has_excess_best_responses(game.m(), game.n(), |j, i| mm.get(i, j))
}

fn has_excess_best_responses(own: usize, other: usize, payoff: impl Fn(usize, usize) -> i64 + Copy) -> bool {
    let others = subsets(other);
    for support in subsets(own) {
        let k = support.len();
        for resp in others.iter().filter(|b| b.len() == k + 1) {
            let mut a: Vec<Vec<BigInt>> = resp
                .iter()
                .map(|&o| {
                    let mut row: Vec<BigInt> = support.iter().map(|&s| BigInt::from(payoff(s, o))).collect();
                    row.push(BigInt::from(-1));
                    row
                })
                .collect();
            let mut sum_row = vec![BigInt::from(1); k];
            sum_row.push(BigInt::zero());
            a.push(sum_row);
            let mut b = vec![BigInt::zero(); k + 1];
            b.push(BigInt::from(1));
            match solve_exact(a, b) {
                LinearSolution::Inconsistent => {}
                LinearSolution::Many => return true,
                LinearSolution::Unique(x) => {
                    if x[..k].iter().any(|v| v.is_negative()) {
                        continue;
                    }
                    let value = &x[k];
                    let dominated = (0..other).all(|o| {
                        let mut s = BigRational::zero();
                        for (idx, &i) in support.iter().enumerate() {
                            s += &x[idx] * BigRational::from_integer(BigInt::from(payoff(i, o)));
                        }
                        &s <= value
                    });
                    if dominated {
                        return true;
                    }
                }
            }
        }
    }
    false
}

#[derive(Debug, Clone, PartialEq)]
pub enum LinearSolution {
    Unique(Vec<BigRational>),
    Many,
    Inconsistent,
}

/// Solve `a x = b` exactly with fraction-free (Bareiss) elimination. Works
/// for any shape; the result distinguishes unique, infinite and empty
/// solution sets.
pub fn solve_exact(mut a: Vec<Vec<BigInt>>, b: Vec<BigInt>) -> LinearSolution {
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    for (row, rhs) in a.iter_mut().zip(b) {
        debug_assert_eq!(row.len(), cols);
        row.push(rhs);
    }
    let mut prev = BigInt::from(1);
    let mut pivots: Vec<usize> = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(pr) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, pr);
        for i in r + 1..rows {
            for k in c + 1..=cols {
                let num = &a[r][c] * &a[i][k] - &a[i][c] * &a[r][k];
                let (quo, rem) = num.div_rem(&prev);
                debug_assert!(rem.is_zero(), "inexact fraction-free step");
                a[i][k] = quo;
            }
            a[i][c] = BigInt::zero();
        }
        prev = a[r][c].clone();
        pivots.push(c);
        r += 1;
    }
    if a[r..].iter().any(|row| !row[cols].is_zero()) {
        return LinearSolution::Inconsistent;
    }
    if pivots.len() < cols {
        return LinearSolution::Many;
    }
    let mut x = vec![BigRational::zero(); cols];
    for (k, &c) in pivots.iter().enumerate().rev() {
        let mut acc = BigRational::from_integer(a[k][cols].clone());
        for j in c + 1..cols {
            acc -= BigRational::from_integer(a[k][j].clone()) * &x[j];
        }
        x[c] = acc / BigRational::from_integer(a[k][c].clone());
    }
    LinearSolution::Unique(x)
}

/// Found profiles scored against the oracle's list on the lattice of `I`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub intervals: u32,
    pub truth_count: usize,
    pub reachable_count: usize,
    pub found_reachable: usize,
    /// `found_reachable / reachable_count`; `None` when nothing is reachable.
    pub proportion: Option<f64>,
    /// `found_reachable / truth_count`.
    pub proportion_of_truth: f64,
    pub reachable: Vec<QuantizedProfile>,
    pub missed: Vec<QuantizedProfile>,
    pub unreachable: Vec<NeSolution>,
    /// Found profiles that are not in the oracle's list (only possible for
    /// degenerate games).
    pub extra: Vec<QuantizedProfile>,
    pub degenerate: bool,
}

pub fn coverage<'a>(
    found: impl IntoIterator<Item = &'a QuantizedProfile>,
    truth: &NeSolutionSet,
    intervals: u32,
) -> CoverageReport {
    let found: Vec<&QuantizedProfile> = found.into_iter().collect();
    let mut reachable = Vec::new();
    let mut unreachable = Vec::new();
    for sol in &truth.solutions {
        match QuantizedProfile::exact_from(&sol.profile, intervals) {
            Some(q) => reachable.push(q),
            None => unreachable.push(sol.clone()),
        }
    }
    let missed: Vec<QuantizedProfile> = reachable.iter().filter(|r| !found.contains(r)).cloned().collect();
    let found_reachable = reachable.len() - missed.len();
    let mut extra: Vec<QuantizedProfile> = found.iter().filter(|f| !reachable.contains(f)).map(|f| (*f).clone()).collect();
    extra.sort();
    extra.dedup();
    CoverageReport {
        intervals,
        truth_count: truth.len(),
        reachable_count: reachable.len(),
        found_reachable,
        proportion: (!reachable.is_empty()).then(|| found_reachable as f64 / reachable.len() as f64),
        proportion_of_truth: if truth.is_empty() { 1.0 } else { found_reachable as f64 / truth.len() as f64 },
        reachable,
        missed,
        unreachable,
        extra,
        degenerate: truth.degenerate,
    }
}

pub(crate) mod profile_serde {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::game::{MixedStrategy, StrategyProfile};
    use crate::rational::{format_rational, parse_rational};
    use crate::ExactProfile;

    #[derive(Serialize, Deserialize)]
    struct Repr {
        p: Vec<String>,
        q: Vec<String>,
    }

    pub fn serialize<S: Serializer>(prof: &ExactProfile, s: S) -> Result<S::Ok, S::Error> {
        Repr {
            p: prof.p.probs().iter().map(format_rational).collect(),
            q: prof.q.probs().iter().map(format_rational).collect(),
        }
        .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<ExactProfile, D::Error> {
        let r = Repr::deserialize(d)?;
        let parse = |v: Vec<String>| {
            v.iter()
                .map(|t| parse_rational(t))
                .collect::<crate::Result<Vec<_>>>()
                .and_then(MixedStrategy::new)
                .map_err(serde::de::Error::custom)
        };
        Ok(StrategyProfile::new(parse(r.p)?, parse(r.q)?))
    }
}
