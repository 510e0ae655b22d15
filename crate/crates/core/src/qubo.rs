//! Objectives over strategy profiles.
//!
//! The max-based objective replaces the two inequality constraints of the
//! bilinear equilibrium program with `α = max(Mq)` and `β = max(Nᵀp)`:
//!
//! ```text
//! f(p, q) = max(Mq) + max(Nᵀp) - pᵀ(M + N)q
//! ```
//!
//! Regrouping gives `f = (max(Mq) - pᵀMq) + (max(Nᵀp) - pᵀNq) = g1 + g2`, the
//! sum of the two regret gaps of [`crate::game::epsilon_ne_gap`]. Hence
//! `f >= 0` everywhere and `f == 0` exactly at Nash equilibria; no penalty
//! weights or slack variables are involved.
//!
//! The slack baseline ([`SQuboObjective`]) keeps `α, β` as free variables,
//! turns the inequalities into squared penalties with slacks `ζ, η`, and
//! restricts `p, q` to binary vectors. Its constraint residuals are aggregated
//! over both indices, `C(Σ_{i,j} m_ij q_j - α + ζ)²`, matching the published
//! baseline; a per-row residual (one slack per inequality) is the other
//! common reading and is not implemented.

use num_rational::Ratio;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{dim_err, Error, Result};
use crate::game::{BimatrixGame, MixedStrategy, StrategyProfile};
use crate::lattice::QuantizedProfile;
use crate::scalar::{max_of, Scalar};
use crate::Rational;

/// `max(Mq)`.
pub fn alpha<T: Scalar>(game: &BimatrixGame, q: &MixedStrategy<T>) -> Result<T> {
    if q.len() != game.m() {
        return Err(dim_err("length of q", game.m(), q.len()));
    }
    Ok(max_of(game.row_payoffs().mul_vec(q.probs())).expect("n >= 1"))
}

/// `max(Nᵀp)`.
pub fn beta<T: Scalar>(game: &BimatrixGame, p: &MixedStrategy<T>) -> Result<T> {
    if p.len() != game.n() {
        return Err(dim_err("length of p", game.n(), p.len()));
    }
    Ok(max_of(game.col_payoffs().tr_mul_vec(p.probs())).expect("m >= 1"))
}

/// The three hardware-evaluated pieces of the objective, with the bilinear
/// term split per matrix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decomposed<T> {
    pub alpha: T,
    pub beta: T,
    /// `pᵀMq`
    pub vmv_m: T,
    /// `pᵀNq`
    pub vmv_n: T,
}

impl<T: Scalar> Decomposed<T> {
    pub fn objective(&self) -> T {
        self.alpha.clone() + self.beta.clone() - self.vmv_m.clone() - self.vmv_n.clone()
    }
}

pub fn max_qubo_decomposed<T: Scalar>(game: &BimatrixGame, prof: &StrategyProfile<T>) -> Result<Decomposed<T>> {
    game.check_profile(prof)?;
    Ok(Decomposed {
        alpha: alpha(game, &prof.q)?,
        beta: beta(game, &prof.p)?,
        vmv_m: game.row_payoffs().bilinear(prof.p.probs(), prof.q.probs()),
        vmv_n: game.col_payoffs().bilinear(prof.p.probs(), prof.q.probs()),
    })
}

/// `max(Mq) + max(Nᵀp) - pᵀ(M+N)q`.
pub fn max_qubo<T: Scalar>(game: &BimatrixGame, prof: &StrategyProfile<T>) -> Result<T> {
    Ok(max_qubo_decomposed(game, prof)?.objective())
}

/// Integer form of the decomposition on the lattice, in units of `1/I²`:
/// `(I·max(M c_q), I·max(Nᵀ c_p), c_pᵀ M c_q, c_pᵀ N c_q)` for count vectors
/// `c_p, c_q`.
pub fn lattice_decomposed_scaled(game: &BimatrixGame, prof: &QuantizedProfile) -> Result<Decomposed<i64>> {
    let (n, m) = (game.n(), game.m());
    if prof.p.len() != n {
        return Err(dim_err("length of p", n, prof.p.len()));
    }
    if prof.q.len() != m {
        return Err(dim_err("length of q", m, prof.q.len()));
    }
    let big_i = i64::from(prof.intervals());
    let (mm, nn) = (game.row_payoffs(), game.col_payoffs());
    let cp = prof.p.counts();
    let cq = prof.q.counts();
    let mut best_row = i64::MIN;
    let mut vmv_m = 0i64;
    for (i, &ci) in cp.iter().enumerate() {
        let row: i64 = mm.row(i).iter().zip(cq).map(|(&a, &c)| a * i64::from(c)).sum();
        best_row = best_row.max(row);
        vmv_m += row * i64::from(ci);
    }
    let mut best_col = i64::MIN;
    let mut vmv_n = 0i64;
    for (j, &cj) in cq.iter().enumerate() {
        let col: i64 = cp.iter().enumerate().map(|(i, &ci)| nn.get(i, j) * i64::from(ci)).sum();
        best_col = best_col.max(col);
        vmv_n += col * i64::from(cj);
    }
    Ok(Decomposed { alpha: big_i * best_row, beta: big_i * best_col, vmv_m, vmv_n })
}

/// Fails when integer evaluation on the lattice of `intervals` could
/// overflow: every intermediate is bounded by `4 · max entry · I²`.
pub fn check_lattice_range(game: &BimatrixGame, intervals: u32) -> Result<()> {
    let i2 = i64::from(intervals).pow(2);
    match i2.checked_mul(4).and_then(|b| b.checked_mul(game.max_entry())) {
        Some(_) => Ok(()),
        None => Err(Error::Overflow(format!(
            "payoffs up to {} are too large for integer evaluation at I = {intervals}",
            game.max_entry()
        ))),
    }
}

/// `I² · f` on the lattice; always a nonnegative integer.
pub fn max_qubo_lattice_scaled(game: &BimatrixGame, prof: &QuantizedProfile) -> Result<i64> {
    let d = lattice_decomposed_scaled(game, prof)?;
    Ok(d.alpha + d.beta - d.vmv_m - d.vmv_n)
}

/// Exact objective of a lattice profile via integer counting.
pub fn max_qubo_lattice(game: &BimatrixGame, prof: &QuantizedProfile) -> Result<Rational> {
    let big_i = i128::from(prof.intervals());
    Ok(Ratio::new(i128::from(max_qubo_lattice_scaled(game, prof)?), big_i * big_i))
}

/// Unsigned fixed-point binary code: `int_bits` integer bits then
/// `frac_bits` fraction bits, most significant bit first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixedPoint {
    pub int_bits: u32,
    pub frac_bits: u32,
}

impl FixedPoint {
    pub fn new(int_bits: u32, frac_bits: u32) -> Result<Self> {
        if int_bits + frac_bits == 0 {
            return Err(Error::Encoding("fixed-point code needs at least one bit".into()));
        }
        if int_bits + frac_bits > 24 {
            return Err(Error::Encoding("fixed-point codes are limited to 24 bits".into()));
        }
        Ok(Self { int_bits, frac_bits })
    }

    pub fn width(&self) -> usize {
        (self.int_bits + self.frac_bits) as usize
    }

    pub fn decode(&self, bits: &[bool]) -> Result<Rational> {
        if bits.len() != self.width() {
            return Err(Error::Encoding(format!("code has {} bits, expected {}", bits.len(), self.width())));
        }
        let raw = bits.iter().fold(0i128, |acc, &b| (acc << 1) | i128::from(b));
        Ok(Ratio::new(raw, 1i128 << self.frac_bits))
    }

    pub fn decode_raw(&self, raw: u32) -> Rational {
        Ratio::new(i128::from(raw), 1i128 << self.frac_bits)
    }

    pub fn encode(&self, raw: u32) -> Vec<bool> {
        let w = self.width();
        (0..w).map(|k| (raw >> (w - 1 - k)) & 1 == 1).collect()
    }

    /// Number of distinct codewords.
    pub fn cardinality(&self) -> u32 {
        1 << self.width()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PenaltyWeights {
    #[serde(with = "crate::rational::as_str")]
    pub a: Rational,
    #[serde(with = "crate::rational::as_str")]
    pub b: Rational,
    #[serde(with = "crate::rational::as_str")]
    pub c: Rational,
    #[serde(with = "crate::rational::as_str")]
    pub d: Rational,
}

impl PenaltyWeights {
    pub fn uniform(w: Rational) -> Self {
        Self { a: w, b: w, c: w, d: w }
    }

    pub fn scaled(&self, k: Rational) -> Self {
        Self { a: self.a * k, b: self.b * k, c: self.c * k, d: self.d * k }
    }
}

/// Slack-variable penalty objective over binary strategies.
#[derive(Debug, Clone)]
pub struct SQuboObjective<'g> {
    pub game: &'g BimatrixGame,
    pub weights: PenaltyWeights,
    pub alpha_code: FixedPoint,
    pub beta_code: FixedPoint,
    pub slack_code: FixedPoint,
}

/// One point of the slack objective's binary search space.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SQuboAssignment {
    pub p_bits: Vec<bool>,
    pub q_bits: Vec<bool>,
    pub alpha_code: Vec<bool>,
    pub beta_code: Vec<bool>,
    pub zeta_code: Vec<bool>,
    pub eta_code: Vec<bool>,
}

/// Unweighted pieces of the slack objective.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SQuboTerms {
    /// `-pᵀ(M+N)q + α + β`
    pub base: Rational,
    /// `(Σp - 1)², (Σq - 1)², (Σ m q - α + ζ)², (Σ n p - β + η)²`
    pub residuals: [Rational; 4],
}

impl SQuboTerms {
    pub fn penalty(&self, w: &PenaltyWeights) -> Rational {
        w.a * self.residuals[0] + w.b * self.residuals[1] + w.c * self.residuals[2] + w.d * self.residuals[3]
    }
}

impl SQuboAssignment {
    pub fn zeros(obj: &SQuboObjective<'_>) -> Self {
        Self {
            p_bits: vec![false; obj.game.n()],
            q_bits: vec![false; obj.game.m()],
            alpha_code: vec![false; obj.alpha_code.width()],
            beta_code: vec![false; obj.beta_code.width()],
            zeta_code: vec![false; obj.slack_code.width()],
            eta_code: vec![false; obj.slack_code.width()],
        }
    }

    pub fn bit_count(&self) -> usize {
        self.p_bits.len()
            + self.q_bits.len()
            + self.alpha_code.len()
            + self.beta_code.len()
            + self.zeta_code.len()
            + self.eta_code.len()
    }

    pub fn flip(&mut self, mut k: usize) {
        for part in [
            &mut self.p_bits,
            &mut self.q_bits,
            &mut self.alpha_code,
            &mut self.beta_code,
            &mut self.zeta_code,
            &mut self.eta_code,
        ] {
            if k < part.len() {
                part[k] = !part[k];
                return;
            }
            k -= part.len();
        }
        panic!("bit index out of range");
    }

    /// Binary strategies read as a profile; `None` unless each player's bits
    /// are one-hot (otherwise they do not lie on the simplex).
    pub fn decoded_profile(&self) -> Option<StrategyProfile<Rational>> {
        let one_hot = |bits: &[bool]| -> Option<usize> {
            let mut on = bits.iter().enumerate().filter(|(_, b)| **b).map(|(i, _)| i);
            let first = on.next()?;
            on.next().is_none().then_some(first)
        };
        let i = one_hot(&self.p_bits)?;
        let j = one_hot(&self.q_bits)?;
        Some(StrategyProfile::pure(self.p_bits.len(), self.q_bits.len(), i, j))
    }

    pub fn decoded_lattice(&self, intervals: u32) -> Option<QuantizedProfile> {
        self.decoded_profile().and_then(|prof| QuantizedProfile::exact_from(&prof, intervals))
    }
}

fn bits_sum(bits: &[bool]) -> i128 {
    bits.iter().filter(|b| **b).count() as i128
}

impl<'g> SQuboObjective<'g> {
    /// Defaults: every code uses `⌈log2(max payoff)⌉ + 1` integer bits and 3
    /// fraction bits; all four weights are `2·(max payoff) + 1`.
    pub fn with_defaults(game: &'g BimatrixGame) -> Self {
        let max = game.max_entry().max(1) as u64;
        let int_bits = (u64::BITS - (max - 1).leading_zeros()) + 1;
        let code = FixedPoint { int_bits, frac_bits: 3 };
        Self {
            game,
            weights: PenaltyWeights::uniform(Ratio::from_integer(i128::from(2 * game.max_entry() + 1))),
            alpha_code: code,
            beta_code: code,
            slack_code: code,
        }
    }

    pub fn new(
        game: &'g BimatrixGame,
        weights: PenaltyWeights,
        alpha_code: FixedPoint,
        beta_code: FixedPoint,
        slack_code: FixedPoint,
    ) -> Result<Self> {
        let zero = Rational::zero();
        if weights.a < zero || weights.b < zero || weights.c < zero || weights.d < zero {
            return Err(Error::Input("penalty weights must be nonnegative".into()));
        }
        for code in [alpha_code, beta_code, slack_code] {
            FixedPoint::new(code.int_bits, code.frac_bits)?;
        }
        Ok(Self { game, weights, alpha_code, beta_code, slack_code })
    }

    fn check(&self, asg: &SQuboAssignment) -> Result<()> {
        let expect = |what: &str, got: usize, want: usize| {
            if got == want {
                Ok(())
            } else {
                Err(Error::Encoding(format!("{what} has {got} bits, expected {want}")))
            }
        };
        expect("p", asg.p_bits.len(), self.game.n())?;
        expect("q", asg.q_bits.len(), self.game.m())?;
        expect("alpha code", asg.alpha_code.len(), self.alpha_code.width())?;
        expect("beta code", asg.beta_code.len(), self.beta_code.width())?;
        expect("zeta code", asg.zeta_code.len(), self.slack_code.width())?;
        expect("eta code", asg.eta_code.len(), self.slack_code.width())
    }

    /// `Σ_{i,j} m_ij q_j` and `Σ_{j,i} n_ij p_i` for binary strategies.
    fn aggregated_sums(&self, p_bits: &[bool], q_bits: &[bool]) -> (i128, i128) {
        let (mm, nn) = (self.game.row_payoffs(), self.game.col_payoffs());
        let mut sm = 0i128;
        let mut sn = 0i128;
        for (i, &pi) in p_bits.iter().enumerate() {
            for (j, &qj) in q_bits.iter().enumerate() {
                if qj {
                    sm += i128::from(mm.get(i, j));
                }
                if pi {
                    sn += i128::from(nn.get(i, j));
                }
            }
        }
        (sm, sn)
    }

    fn bilinear(&self, p_bits: &[bool], q_bits: &[bool]) -> i128 {
        let (mm, nn) = (self.game.row_payoffs(), self.game.col_payoffs());
        let mut acc = 0i128;
        for (i, &pi) in p_bits.iter().enumerate() {
            for (j, &qj) in q_bits.iter().enumerate() {
                if pi && qj {
                    acc += i128::from(mm.get(i, j) + nn.get(i, j));
                }
            }
        }
        acc
    }

    pub fn terms(&self, asg: &SQuboAssignment) -> Result<SQuboTerms> {
        self.check(asg)?;
        let a = self.alpha_code.decode(&asg.alpha_code)?;
        let b = self.beta_code.decode(&asg.beta_code)?;
        let zeta = self.slack_code.decode(&asg.zeta_code)?;
        let eta = self.slack_code.decode(&asg.eta_code)?;
        let (sm, sn) = self.aggregated_sums(&asg.p_bits, &asg.q_bits);
        let sq = |x: Rational| x * x;
        let int = Ratio::from_integer;
        Ok(SQuboTerms {
            base: int(-self.bilinear(&asg.p_bits, &asg.q_bits)) + a + b,
            residuals: [
                sq(int(bits_sum(&asg.p_bits) - 1)),
                sq(int(bits_sum(&asg.q_bits) - 1)),
                sq(int(sm) - a + zeta),
                sq(int(sn) - b + eta),
            ],
        })
    }

    /// Literal evaluation of the slack objective.
    pub fn evaluate(&self, asg: &SQuboAssignment) -> Result<Rational> {
        let t = self.terms(asg)?;
        Ok(t.base + t.penalty(&self.weights))
    }

    pub fn bit_count(&self) -> usize {
        self.game.n() + self.game.m() + self.alpha_code.width() + self.beta_code.width() + 2 * self.slack_code.width()
    }

    /// Exhaustive minimum over the full binary space.
    ///
    /// For fixed strategy bits the objective splits into independent
    /// `(α, ζ)` and `(β, η)` parts, so each part is enumerated on its own and
    /// every combination of optimal parts is returned. The result is the same
    /// set a flat scan over all `2^bits` assignments would produce.
    pub fn minimize_exhaustive(&self) -> Result<SQuboMinimum> {
        let (n, m) = (self.game.n(), self.game.m());
        if n + m > 20 {
            return Err(Error::Size(format!("{} strategy bits is too many for exhaustive search", n + m)));
        }
        let int = Ratio::from_integer;
        // min over (x, s) of x + w (base - x + s)², for a given integer `base`.
        let best_pair = |code: FixedPoint, base: i128, w: Rational| -> (Rational, Vec<(u32, u32)>) {
            let mut best: Option<Rational> = None;
            let mut arg = Vec::new();
            for x in 0..code.cardinality() {
                let xv = code.decode_raw(x);
                for s in 0..self.slack_code.cardinality() {
                    let r = int(base) - xv + self.slack_code.decode_raw(s);
                    let v = xv + w * r * r;
                    match &best {
                        Some(b) if v > *b => {}
                        Some(b) if v == *b => arg.push((x, s)),
                        _ => {
                            best = Some(v);
                            arg = vec![(x, s)];
                        }
                    }
                }
            }
            (best.expect("nonempty code space"), arg)
        };
        let mut best: Option<Rational> = None;
        let mut minimizers = Vec::new();
        for pmask in 0u32..(1 << n) {
            let p_bits: Vec<bool> = (0..n).map(|i| pmask >> i & 1 == 1).collect();
            for qmask in 0u32..(1 << m) {
                let q_bits: Vec<bool> = (0..m).map(|j| qmask >> j & 1 == 1).collect();
                let (sm, sn) = self.aggregated_sums(&p_bits, &q_bits);
                let sq = |x: i128| int(x * x);
                let fixed = int(-self.bilinear(&p_bits, &q_bits))
                    + self.weights.a * sq(bits_sum(&p_bits) - 1)
                    + self.weights.b * sq(bits_sum(&q_bits) - 1);
                let (va, arg_a) = best_pair(self.alpha_code, sm, self.weights.c);
                let (vb, arg_b) = best_pair(self.beta_code, sn, self.weights.d);
                let total = fixed + va + vb;
                if matches!(&best, Some(b) if total > *b) {
                    continue;
                }
                if !matches!(&best, Some(b) if total == *b) {
                    best = Some(total);
                    minimizers.clear();
                }
                for &(a, z) in &arg_a {
                    for &(b, e) in &arg_b {
                        minimizers.push(SQuboAssignment {
                            p_bits: p_bits.clone(),
                            q_bits: q_bits.clone(),
                            alpha_code: self.alpha_code.encode(a),
                            beta_code: self.beta_code.encode(b),
                            zeta_code: self.slack_code.encode(z),
                            eta_code: self.slack_code.encode(e),
                        });
                    }
                }
            }
        }
        Ok(SQuboMinimum { value: best.expect("nonempty search space"), minimizers })
    }
}

#[derive(Debug, Clone)]
pub struct SQuboMinimum {
    pub value: Rational,
    pub minimizers: Vec<SQuboAssignment>,
}

/// Free-function form of [`SQuboObjective::evaluate`].
pub fn s_qubo(obj: &SQuboObjective<'_>, asg: &SQuboAssignment) -> Result<Rational> {
    obj.evaluate(asg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::epsilon_ne_gap;
    use crate::lattice::all_profiles;

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
    fn alpha_beta_examples() {
        let g = BimatrixGame::battle_of_the_sexes();
        assert_eq!(alpha(&g, &MixedStrategy::<Rational>::pure(2, 0)).unwrap(), r(2, 1));
        assert_eq!(alpha(&g, &MixedStrategy::new(vec![r(1, 3), r(2, 3)]).unwrap()).unwrap(), r(2, 3));
        assert_eq!(beta(&g, &MixedStrategy::<Rational>::pure(2, 0)).unwrap(), r(1, 1));
        assert_eq!(beta(&g, &MixedStrategy::new(vec![r(2, 3), r(1, 3)]).unwrap()).unwrap(), r(2, 3));
        let c = BimatrixGame::new("c", vec![vec![5; 3]; 2], vec![vec![4; 3]; 2]).unwrap();
        let q = MixedStrategy::new(vec![r(1, 5), r(3, 5), r(1, 5)]).unwrap();
        assert_eq!(alpha(&c, &q).unwrap(), r(5, 1));
        assert_eq!(beta(&c, &MixedStrategy::<Rational>::uniform(2)).unwrap(), r(4, 1));
        assert!(alpha(&g, &MixedStrategy::<Rational>::pure(3, 0)).is_err());
    }

    #[test]
    fn max_qubo_examples() {
        let g = BimatrixGame::battle_of_the_sexes();
        assert_eq!(max_qubo(&g, &prof(&[(1, 1), (0, 1)], &[(1, 1), (0, 1)])).unwrap(), r(0, 1));
        assert_eq!(max_qubo(&g, &prof(&[(2, 3), (1, 3)], &[(1, 3), (2, 3)])).unwrap(), r(0, 1));
        // gaps (1,1) at (e1, e2)
        let off = prof(&[(1, 1), (0, 1)], &[(0, 1), (1, 1)]);
        assert_eq!(max_qubo(&g, &off).unwrap(), r(2, 1));
        let (g1, g2) = epsilon_ne_gap(&g, &off).unwrap();
        assert_eq!(g1 + g2, r(2, 1));
    }

    #[test]
    fn decomposition_examples() {
        let g = BimatrixGame::battle_of_the_sexes();
        let d = max_qubo_decomposed(&g, &prof(&[(1, 1), (0, 1)], &[(1, 1), (0, 1)])).unwrap();
        assert_eq!(d, Decomposed { alpha: r(2, 1), beta: r(1, 1), vmv_m: r(2, 1), vmv_n: r(1, 1) });
        let c = BimatrixGame::new("c", vec![vec![3; 2]; 2], vec![vec![3; 2]; 2]).unwrap();
        let d = max_qubo_decomposed(&c, &prof(&[(1, 4), (3, 4)], &[(1, 2), (1, 2)])).unwrap();
        assert_eq!(d, Decomposed { alpha: r(3, 1), beta: r(3, 1), vmv_m: r(3, 1), vmv_n: r(3, 1) });
        assert_eq!(d.objective(), r(0, 1));
        let g3 = BimatrixGame::new("g3", vec![vec![1, 7], vec![4, 2], vec![0, 3]], vec![vec![5, 1], vec![2, 9], vec![6, 0]])
            .unwrap();
        for i in 0..3 {
            for j in 0..2 {
                let d = max_qubo_decomposed(&g3, &StrategyProfile::<Rational>::pure(3, 2, i, j)).unwrap();
                let col_max = (0..3).map(|k| g3.row_payoffs().get(k, j)).max().unwrap();
                let row_max = (0..2).map(|k| g3.col_payoffs().get(i, k)).max().unwrap();
                assert_eq!(d.alpha, r(col_max.into(), 1));
                assert_eq!(d.beta, r(row_max.into(), 1));
                assert_eq!(d.vmv_m, r(g3.row_payoffs().get(i, j).into(), 1));
                assert_eq!(d.vmv_n, r(g3.col_payoffs().get(i, j).into(), 1));
            }
        }
    }

    #[test]
    fn lattice_path_matches_rational_path() {
        let g = BimatrixGame::new("g", vec![vec![1, 7, 2], vec![4, 2, 8]], vec![vec![5, 1, 3], vec![2, 9, 0]]).unwrap();
        for prof in all_profiles(2, 3, 6) {
            let exact = max_qubo(&g, &prof.dequantize::<Rational>()).unwrap();
            assert_eq!(max_qubo_lattice(&g, &prof).unwrap(), exact);
            let d = lattice_decomposed_scaled(&g, &prof).unwrap();
            let dd = max_qubo_decomposed(&g, &prof.dequantize::<Rational>()).unwrap();
            assert_eq!(r(d.alpha.into(), 36), dd.alpha);
            assert_eq!(r(d.vmv_n.into(), 36), dd.vmv_n);
        }
    }

    #[test]
    fn float_scalar_agrees() {
        let g = BimatrixGame::battle_of_the_sexes();
        let f = StrategyProfile::<f64>::from_probs(vec![2.0 / 3.0, 1.0 / 3.0], vec![1.0 / 3.0, 2.0 / 3.0]).unwrap();
        assert!(max_qubo(&g, &f).unwrap().abs() < 1e-12);
    }

    fn bos_obj(g: &BimatrixGame) -> SQuboObjective<'_> {
        SQuboObjective::with_defaults(g)
    }

    #[test]
    fn default_encoding() {
        let g = BimatrixGame::battle_of_the_sexes();
        let obj = bos_obj(&g);
        assert_eq!(obj.alpha_code, FixedPoint { int_bits: 2, frac_bits: 3 });
        assert_eq!(obj.weights.a, r(5, 1));
        let nine = BimatrixGame::new("9", vec![vec![9]], vec![vec![0]]).unwrap();
        assert_eq!(SQuboObjective::with_defaults(&nine).alpha_code.int_bits, 5);
        let one = BimatrixGame::new("1", vec![vec![1]], vec![vec![0]]).unwrap();
        assert_eq!(SQuboObjective::with_defaults(&one).alpha_code.int_bits, 1);
    }

    #[test]
    fn zero_assignment_fires_simplex_penalties_only() {
        let g = BimatrixGame::battle_of_the_sexes();
        let obj = bos_obj(&g);
        let z = SQuboAssignment::zeros(&obj);
        assert_eq!(s_qubo(&obj, &z).unwrap(), obj.weights.a + obj.weights.b);
    }

    #[test]
    fn pure_ne_plug_in() {
        // p = q = e1: Σ_{i,j} m_ij q_j = 2 and Σ_{j,i} n_ij p_i = 1, so α = 2,
        // β = 1, ζ = η = 0 zero both constraint residuals; the value is
        // -(M+N)_11 + α + β = -3 + 2 + 1.
        let g = BimatrixGame::battle_of_the_sexes();
        let obj = bos_obj(&g);
        let asg = SQuboAssignment {
            p_bits: vec![true, false],
            q_bits: vec![true, false],
            alpha_code: obj.alpha_code.encode(2 << 3),
            beta_code: obj.beta_code.encode(1 << 3),
            zeta_code: obj.slack_code.encode(0),
            eta_code: obj.slack_code.encode(0),
        };
        let t = obj.terms(&asg).unwrap();
        assert_eq!(t.residuals, [r(0, 1); 4]);
        assert_eq!(t.base, r(0, 1));
        assert_eq!(s_qubo(&obj, &asg).unwrap(), r(0, 1));
    }

    #[test]
    fn penalty_linear_in_weights() {
        let g = BimatrixGame::battle_of_the_sexes();
        let obj = bos_obj(&g);
        let mut doubled = obj.clone();
        doubled.weights = obj.weights.scaled(r(2, 1));
        let mut asg = SQuboAssignment::zeros(&obj);
        for k in [0, 3, 5, 9, 14, 20] {
            asg.flip(k);
            let t = obj.terms(&asg).unwrap();
            assert_eq!(s_qubo(&doubled, &asg).unwrap() - s_qubo(&obj, &asg).unwrap(), t.penalty(&obj.weights));
        }
    }

    #[test]
    fn width_mismatch_is_encoding_error() {
        let g = BimatrixGame::battle_of_the_sexes();
        let obj = bos_obj(&g);
        let mut asg = SQuboAssignment::zeros(&obj);
        asg.zeta_code.push(false);
        assert!(matches!(s_qubo(&obj, &asg), Err(Error::Encoding(_))));
        assert!(FixedPoint::new(0, 0).is_err());
    }

    #[test]
    fn separable_minimum_matches_flat_scan() {
        let g = BimatrixGame::battle_of_the_sexes();
        let code = FixedPoint::new(2, 1).unwrap();
        let obj = SQuboObjective::new(&g, PenaltyWeights::uniform(r(5, 1)), code, code, code).unwrap();
        let total = obj.bit_count();
        let mut best: Option<Rational> = None;
        let mut flat = Vec::new();
        for mask in 0u32..(1 << total) {
            let mut asg = SQuboAssignment::zeros(&obj);
            for k in 0..total {
                if mask >> k & 1 == 1 {
                    asg.flip(k);
                }
            }
            let v = obj.evaluate(&asg).unwrap();
            match &best {
                Some(b) if v > *b => {}
                Some(b) if v == *b => flat.push(asg),
                _ => {
                    best = Some(v);
                    flat = vec![asg];
                }
            }
        }
        let mut sep = obj.minimize_exhaustive().unwrap();
        assert_eq!(Some(sep.value), best);
        flat.sort();
        sep.minimizers.sort();
        assert_eq!(flat, sep.minimizers);
    }

    #[test]
    fn lattice_range_guard() {
        let small = BimatrixGame::battle_of_the_sexes();
        assert!(check_lattice_range(&small, 1000).is_ok());
        let huge = BimatrixGame::new("h", vec![vec![1 << 60]], vec![vec![0]]).unwrap();
        assert!(matches!(check_lattice_range(&huge, 12), Err(Error::Overflow(_))));
    }

}
