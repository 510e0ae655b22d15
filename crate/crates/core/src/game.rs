//! Bimatrix games, expected payoffs and equilibrium verification.
//!
//! A profile `(p, q)` is a Nash equilibrium when neither player can raise
//! their expected payoff by deviating unilaterally. Expected payoff is linear
//! in each player's own strategy, so the best deviation is always attained at
//! a pure strategy: comparing against the `n` (resp. `m`) pure deviations is
//! enough to certify an equilibrium. The regret gaps below are exactly those
//! comparisons.

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::{dim_err, Error, Result};
use crate::rational;
use crate::scalar::{max_of, Scalar};
use crate::Rational;

/// Dense row-major matrix of nonnegative integer payoffs.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PayoffMatrix {
    rows: usize,
    cols: usize,
    data: Vec<i64>,
}

impl PayoffMatrix {
    pub fn new(rows: Vec<Vec<i64>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::Input("payoff matrix has no rows".into()));
        }
        let m = rows[0].len();
        if m == 0 {
            return Err(Error::Input("payoff matrix has no columns".into()));
        }
        let mut data = Vec::with_capacity(n * m);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != m {
                return Err(dim_err(&format!("length of row {i}"), m, row.len()));
            }
            if let Some(v) = row.iter().find(|v| **v < 0) {
                return Err(Error::Input(format!(
                    "stored payoffs must be nonnegative, found {v} in row {i}"
                )));
            }
            data.extend(row);
        }
        Ok(Self { rows: n, cols: m, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[i64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                data.push(self.get(i, j));
            }
        }
        Self { rows: self.cols, cols: self.rows, data }
    }

    pub fn max_entry(&self) -> i64 {
        self.data.iter().copied().max().unwrap_or(0)
    }

    pub fn to_rows(&self) -> Vec<Vec<i64>> {
        self.data.chunks(self.cols).map(<[i64]>::to_vec).collect()
    }

    /// `A x` for a column vector `x` of length `cols`.
    pub fn mul_vec<T: Scalar>(&self, x: &[T]) -> Vec<T> {
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(x)
                    .fold(T::zero(), |acc, (&a, xj)| acc + T::from_int(a) * xj.clone())
            })
            .collect()
    }

    /// `Aᵀ y` for a row vector `y` of length `rows`.
    pub fn tr_mul_vec<T: Scalar>(&self, y: &[T]) -> Vec<T> {
        (0..self.cols)
            .map(|j| {
                (0..self.rows).fold(T::zero(), |acc, i| {
                    acc + T::from_int(self.get(i, j)) * y[i].clone()
                })
            })
            .collect()
    }

    /// `yᵀ A x`.
    pub fn bilinear<T: Scalar>(&self, y: &[T], x: &[T]) -> T {
        self.mul_vec(x)
            .into_iter()
            .zip(y)
            .fold(T::zero(), |acc, (ax, yi)| acc + ax * yi.clone())
    }
}

/// Affine map from raw payoffs to stored payoffs: `stored = scale * raw + shift`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AffineRecord {
    pub scale: i128,
    pub shift_row: i128,
    pub shift_col: i128,
}

impl AffineRecord {
    pub fn identity() -> Self {
        Self { scale: 1, shift_row: 0, shift_col: 0 }
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity()
    }

    pub fn raw_row_payoff(&self, stored: &Rational) -> Rational {
        (stored - Ratio::from_integer(self.shift_row)) / Ratio::from_integer(self.scale)
    }

    pub fn raw_col_payoff(&self, stored: &Rational) -> Rational {
        (stored - Ratio::from_integer(self.shift_col)) / Ratio::from_integer(self.scale)
    }
}

/// Two-player game: `row_payoffs` is `M` (player 1), `col_payoffs` is `N`
/// (player 2), both `n × m` with nonnegative integer entries.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BimatrixGame {
    pub name: String,
    row_payoffs: PayoffMatrix,
    col_payoffs: PayoffMatrix,
    transform: AffineRecord,
}

impl BimatrixGame {
    pub fn new(name: impl Into<String>, m: Vec<Vec<i64>>, n: Vec<Vec<i64>>) -> Result<Self> {
        Self::from_matrices(name, PayoffMatrix::new(m)?, PayoffMatrix::new(n)?)
    }

    pub fn from_matrices(
        name: impl Into<String>,
        row_payoffs: PayoffMatrix,
        col_payoffs: PayoffMatrix,
    ) -> Result<Self> {
        if row_payoffs.rows != col_payoffs.rows || row_payoffs.cols != col_payoffs.cols {
            return Err(Error::Dimension(format!(
                "M is {}x{} but N is {}x{}",
                row_payoffs.rows, row_payoffs.cols, col_payoffs.rows, col_payoffs.cols
            )));
        }
        Ok(Self {
            name: name.into(),
            row_payoffs,
            col_payoffs,
            transform: AffineRecord::identity(),
        })
    }

    /// Standard Battle of the Sexes: `M = [[2,0],[0,1]]`, `N = [[1,0],[0,2]]`.
    pub fn battle_of_the_sexes() -> Self {
        Self::new("battle_of_the_sexes", vec![vec![2, 0], vec![0, 1]], vec![vec![1, 0], vec![0, 2]])
            .expect("valid matrices")
    }

    /// Player 1's payoff matrix `M`.
    pub fn row_payoffs(&self) -> &PayoffMatrix {
        &self.row_payoffs
    }

    /// Player 2's payoff matrix `N`.
    pub fn col_payoffs(&self) -> &PayoffMatrix {
        &self.col_payoffs
    }

    pub fn transform(&self) -> &AffineRecord {
        &self.transform
    }

    /// Action count of player 1.
    pub fn n(&self) -> usize {
        self.row_payoffs.rows
    }

    /// Action count of player 2.
    pub fn m(&self) -> usize {
        self.row_payoffs.cols
    }

    pub fn max_entry(&self) -> i64 {
        self.row_payoffs.max_entry().max(self.col_payoffs.max_entry())
    }

    /// Largest entry of `M + N`.
    pub fn max_sum_entry(&self) -> i64 {
        self.row_payoffs
            .data
            .iter()
            .zip(&self.col_payoffs.data)
            .map(|(a, b)| a + b)
            .max()
            .unwrap_or(0)
    }

    pub fn check_profile<T: Scalar>(&self, prof: &StrategyProfile<T>) -> Result<()> {
        if prof.p.len() != self.n() {
            return Err(dim_err("length of p", self.n(), prof.p.len()));
        }
        if prof.q.len() != self.m() {
            return Err(dim_err("length of q", self.m(), prof.q.len()));
        }
        Ok(())
    }
}

/// A probability vector over one player's actions.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MixedStrategy<T> {
    probs: Vec<T>,
}

impl<T: Scalar> MixedStrategy<T> {
    /// Validates nonnegativity and unit sum (exact for rational scalars).
    pub fn new(probs: Vec<T>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::Input("strategy over zero actions".into()));
        }
        if probs.iter().any(|x| x.is_negative()) {
            return Err(Error::Input(format!("negative probability in {probs:?}")));
        }
        let sum = probs.iter().cloned().fold(T::zero(), |a, b| a + b);
        if (sum - T::one()).abs() > T::sum_tolerance() {
            return Err(Error::Input(format!("probabilities {probs:?} do not sum to 1")));
        }
        Ok(Self { probs })
    }

    pub fn pure(len: usize, action: usize) -> Self {
        assert!(action < len, "action {action} out of range for {len} actions");
        let probs = (0..len).map(|i| if i == action { T::one() } else { T::zero() }).collect();
        Self { probs }
    }

    pub fn uniform(len: usize) -> Self {
        let w = T::from_fraction(1, len as i64);
        Self { probs: vec![w; len] }
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Indices with positive probability.
    pub fn support(&self) -> Vec<usize> {
        self.probs
            .iter()
            .enumerate()
            .filter(|(_, x)| !x.is_zero())
            .map(|(i, _)| i)
            .collect()
    }

    /// Convex combination `λ·self + (1-λ)·other`.
    pub fn mix(&self, other: &Self, lambda: &T) -> Result<Self> {
        if self.len() != other.len() {
            return Err(dim_err("mixed strategy length", self.len(), other.len()));
        }
        let mu = T::one() - lambda.clone();
        Self::new(
            self.probs
                .iter()
                .zip(&other.probs)
                .map(|(a, b)| lambda.clone() * a.clone() + mu.clone() * b.clone())
                .collect(),
        )
    }
}

impl<T: Clone + Integer + std::fmt::Display> MixedStrategy<Ratio<T>> {
    pub fn to_strings(&self) -> Vec<String> {
        self.probs.iter().map(rational::format_rational).collect()
    }
}

/// One strategy per player.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StrategyProfile<T> {
    pub p: MixedStrategy<T>,
    pub q: MixedStrategy<T>,
}

impl<T: Scalar> StrategyProfile<T> {
    pub fn new(p: MixedStrategy<T>, q: MixedStrategy<T>) -> Self {
        Self { p, q }
    }

    pub fn pure(n: usize, m: usize, i: usize, j: usize) -> Self {
        Self { p: MixedStrategy::pure(n, i), q: MixedStrategy::pure(m, j) }
    }

    pub fn from_probs(p: Vec<T>, q: Vec<T>) -> Result<Self> {
        Ok(Self { p: MixedStrategy::new(p)?, q: MixedStrategy::new(q)? })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PureOrMixed {
    Pure,
    Mixed,
}

impl std::fmt::Display for PureOrMixed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PureOrMixed::Pure => "Pure",
            PureOrMixed::Mixed => "Mixed",
        })
    }
}

/// Expected payoffs `(pᵀMq, pᵀNq)`.
pub fn payoff<T: Scalar>(game: &BimatrixGame, prof: &StrategyProfile<T>) -> Result<(T, T)> {
    game.check_profile(prof)?;
    Ok((
        game.row_payoffs.bilinear(prof.p.probs(), prof.q.probs()),
        game.col_payoffs.bilinear(prof.p.probs(), prof.q.probs()),
    ))
}

/// Regret of each player against their best pure deviation:
/// `g1 = max(Mq) - pᵀMq`, `g2 = max(Nᵀp) - pᵀNq`. Both are nonnegative and
/// vanish together exactly at a Nash equilibrium.
pub fn epsilon_ne_gap<T: Scalar>(game: &BimatrixGame, prof: &StrategyProfile<T>) -> Result<(T, T)> {
    game.check_profile(prof)?;
    let mq = game.row_payoffs.mul_vec(prof.q.probs());
    let ntp = game.col_payoffs.tr_mul_vec(prof.p.probs());
    let f1 = dot(prof.p.probs(), &mq);
    let f2 = dot(prof.q.probs(), &ntp);
    let best1 = max_of(mq).expect("n >= 1");
    let best2 = max_of(ntp).expect("m >= 1");
    Ok((best1 - f1, best2 - f2))
}

pub fn is_epsilon_ne<T: Scalar>(game: &BimatrixGame, prof: &StrategyProfile<T>, eps: &T) -> Result<bool> {
    if eps.is_negative() {
        return Err(Error::Input("epsilon must be nonnegative".into()));
    }
    let (g1, g2) = epsilon_ne_gap(game, prof)?;
    Ok(g1 <= *eps && g2 <= *eps)
}

pub fn classify<T: Scalar>(prof: &StrategyProfile<T>) -> PureOrMixed {
    if prof.p.support().len() == 1 && prof.q.support().len() == 1 {
        PureOrMixed::Pure
    } else {
        PureOrMixed::Mixed
    }
}

/// Canonicalize raw rational payoffs to nonnegative integers.
///
/// One positive integer scale clears every denominator in both matrices; each
/// matrix is then shifted by the smallest nonnegative integer that lifts its
/// minimum to zero. Positive scaling and uniform shifts leave best responses,
/// and therefore the equilibrium set, unchanged.
pub fn normalize_payoffs(
    name: impl Into<String>,
    m_raw: &[Vec<Rational>],
    n_raw: &[Vec<Rational>],
) -> Result<(BimatrixGame, AffineRecord)> {
    let scale = m_raw
        .iter()
        .chain(n_raw)
        .flatten()
        .fold(1i128, |acc, r| acc.lcm(r.denom()));
    let scaled = |raw: &[Vec<Rational>]| -> Result<Vec<Vec<i128>>> {
        raw.iter()
            .map(|row| {
                row.iter()
                    .map(|r| {
                        let v = r * Ratio::from_integer(scale);
                        debug_assert!(v.is_integer());
                        Ok(v.to_integer())
                    })
                    .collect()
            })
            .collect()
    };
    let sm = scaled(m_raw)?;
    let sn = scaled(n_raw)?;
    let shift = |mat: &[Vec<i128>]| mat.iter().flatten().copied().min().map_or(0, |lo| (-lo).max(0));
    let (c1, c2) = (shift(&sm), shift(&sn));
    let to_i64 = |mat: Vec<Vec<i128>>, c: i128| -> Result<Vec<Vec<i64>>> {
        mat.into_iter()
            .map(|row| {
                row.into_iter()
                    .map(|v| {
                        (v + c)
                            .to_i64()
                            .ok_or_else(|| Error::Overflow(format!("normalized payoff {} exceeds i64", v + c)))
                    })
                    .collect()
            })
            .collect()
    };
    let record = AffineRecord { scale, shift_row: c1, shift_col: c2 };
    let mut game = BimatrixGame::new(name, to_i64(sm, c1)?, to_i64(sn, c2)?)?;
    game.transform = record.clone();
    Ok((game, record))
}

fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(a: i128, b: i128) -> Rational {
        Ratio::new(a, b)
    }

    fn prof(p: &[(i128, i128)], q: &[(i128, i128)]) -> StrategyProfile<Rational> {
        StrategyProfile::from_probs(
            p.iter().map(|&(a, b)| r(a, b)).collect(),
            q.iter().map(|&(a, b)| r(a, b)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn bos_payoffs() {
        let g = BimatrixGame::battle_of_the_sexes();
        let pr = StrategyProfile::<Rational>::pure(2, 2, 0, 0);
        assert_eq!(payoff(&g, &pr).unwrap(), (r(2, 1), r(1, 1)));
        for i in 0..2 {
            for j in 0..2 {
                let pr = StrategyProfile::<Rational>::pure(2, 2, i, j);
                let (f1, f2) = payoff(&g, &pr).unwrap();
                assert_eq!(f1, r(g.row_payoffs().get(i, j) as i128, 1));
                assert_eq!(f2, r(g.col_payoffs().get(i, j) as i128, 1));
            }
        }
    }

    #[test]
    fn constant_game_payoff_is_constant() {
        let g = BimatrixGame::new("ones", vec![vec![1, 1], vec![1, 1]], vec![vec![1, 1], vec![1, 1]]).unwrap();
        let pr = prof(&[(1, 3), (2, 3)], &[(3, 7), (4, 7)]);
        assert_eq!(payoff(&g, &pr).unwrap(), (r(1, 1), r(1, 1)));
    }

    #[test]
    fn bos_gaps() {
        let g = BimatrixGame::battle_of_the_sexes();
        let ne = prof(&[(1, 1), (0, 1)], &[(1, 1), (0, 1)]);
        assert_eq!(epsilon_ne_gap(&g, &ne).unwrap(), (r(0, 1), r(0, 1)));
        let mixed = prof(&[(2, 3), (1, 3)], &[(1, 3), (2, 3)]);
        assert_eq!(epsilon_ne_gap(&g, &mixed).unwrap(), (r(0, 1), r(0, 1)));
        // Mq = (0,1), pᵀMq = 0; Nᵀp = (1,0), pᵀNq = 0.
        let off = prof(&[(1, 1), (0, 1)], &[(0, 1), (1, 1)]);
        assert_eq!(epsilon_ne_gap(&g, &off).unwrap(), (r(1, 1), r(1, 1)));
    }

    #[test]
    fn threshold_semantics() {
        let g = BimatrixGame::battle_of_the_sexes();
        let ne = StrategyProfile::<Rational>::pure(2, 2, 1, 1);
        assert!(is_epsilon_ne(&g, &ne, &r(0, 1)).unwrap());
        // Mq = (0,1) and Nᵀp = (0,2) at the corner (e1, e1): gap (1,2).
        let g2 = BimatrixGame::new("g", vec![vec![0, 0], vec![1, 0]], vec![vec![0, 2], vec![0, 0]]).unwrap();
        let pr = StrategyProfile::<Rational>::pure(2, 2, 0, 0);
        assert_eq!(epsilon_ne_gap(&g2, &pr).unwrap(), (r(1, 1), r(2, 1)));
        assert!(!is_epsilon_ne(&g2, &pr, &r(0, 1)).unwrap());
        assert!(!is_epsilon_ne(&g2, &pr, &r(1, 1)).unwrap());
        assert!(is_epsilon_ne(&g2, &pr, &r(2, 1)).unwrap());
        assert!(is_epsilon_ne(&g2, &pr, &r(-1, 1)).is_err());
    }

    #[test]
    fn classification() {
        assert_eq!(classify(&prof(&[(1, 1), (0, 1)], &[(0, 1), (1, 1)])), PureOrMixed::Pure);
        assert_eq!(classify(&prof(&[(1, 2), (1, 2)], &[(1, 1), (0, 1)])), PureOrMixed::Mixed);
        assert_eq!(classify(&prof(&[(2, 3), (1, 3)], &[(1, 3), (2, 3)])), PureOrMixed::Mixed);
        let f = StrategyProfile::<f64>::from_probs(vec![0.5, 0.5], vec![1.0, 0.0]).unwrap();
        assert_eq!(classify(&f), PureOrMixed::Mixed);
    }

    #[test]
    fn dimension_errors() {
        let g = BimatrixGame::battle_of_the_sexes();
        let bad = StrategyProfile::<Rational>::pure(3, 2, 0, 0);
        assert!(matches!(payoff(&g, &bad), Err(Error::Dimension(_))));
        assert!(matches!(epsilon_ne_gap(&g, &bad), Err(Error::Dimension(_))));
        assert!(BimatrixGame::new("x", vec![vec![1, 2]], vec![vec![1], vec![2]]).is_err());
        assert!(BimatrixGame::new("x", vec![vec![-1]], vec![vec![1]]).is_err());
        assert!(MixedStrategy::new(vec![r(1, 2), r(1, 3)]).is_err());
        assert!(MixedStrategy::new(vec![r(3, 2), r(-1, 2)]).is_err());
    }

    #[test]
    fn normalize_shift_and_scale() {
        let int = |rows: &[&[i128]]| -> Vec<Vec<Rational>> {
            rows.iter().map(|row| row.iter().map(|&v| r(v, 1)).collect()).collect()
        };
        let (g, rec) = normalize_payoffs("a", &int(&[&[-1, 0], &[0, 1]]), &int(&[&[0, 0], &[0, 0]])).unwrap();
        assert_eq!(g.row_payoffs().to_rows(), vec![vec![0, 1], vec![1, 2]]);
        assert_eq!((rec.scale, rec.shift_row, rec.shift_col), (1, 1, 0));

        let half = vec![vec![r(1, 2), r(0, 1)], vec![r(0, 1), r(1, 1)]];
        let (g, rec) = normalize_payoffs("b", &half, &int(&[&[0, 0], &[0, 0]])).unwrap();
        assert_eq!(g.row_payoffs().to_rows(), vec![vec![1, 0], vec![0, 2]]);
        assert_eq!((rec.scale, rec.shift_row), (2, 0));
        assert_eq!(rec.raw_row_payoff(&r(1, 1)), r(1, 2));

        let (g, rec) = normalize_payoffs("c", &int(&[&[2, 0], &[0, 1]]), &int(&[&[1, 0], &[0, 2]])).unwrap();
        assert!(rec.is_identity());
        assert_eq!(g.row_payoffs(), BimatrixGame::battle_of_the_sexes().row_payoffs());
    }
}
