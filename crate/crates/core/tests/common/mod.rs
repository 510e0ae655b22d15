#![allow(dead_code)]

use nash_anneal::game::BimatrixGame;
use nash_anneal::Rational;
use rand::Rng;

pub fn random_matrix<R: Rng>(rng: &mut R, n: usize, m: usize, hi: i64) -> Vec<Vec<i64>> {
    (0..n).map(|_| (0..m).map(|_| rng.random_range(0..=hi)).collect()).collect()
}

pub fn random_game<R: Rng>(rng: &mut R, n: usize, m: usize, hi: i64) -> BimatrixGame {
    BimatrixGame::new("random", random_matrix(rng, n, m, hi), random_matrix(rng, n, m, hi)).unwrap()
}

/// Regret gaps computed directly from rational payoff matrices.
pub fn raw_gaps(m: &[Vec<Rational>], n: &[Vec<Rational>], p: &[Rational], q: &[Rational]) -> (Rational, Rational) {
    let zero = Rational::from_integer(0);
    let mq: Vec<Rational> = m.iter().map(|row| row.iter().zip(q).map(|(a, b)| a * b).fold(zero, |x, y| x + y)).collect();
    let ntp: Vec<Rational> = (0..q.len()).map(|j| (0..p.len()).map(|i| n[i][j] * p[i]).fold(zero, |x, y| x + y)).collect();
    let f1 = p.iter().zip(&mq).map(|(a, b)| a * b).fold(zero, |x, y| x + y);
    let f2 = q.iter().zip(&ntp).map(|(a, b)| a * b).fold(zero, |x, y| x + y);
    (mq.into_iter().max().unwrap() - f1, ntp.into_iter().max().unwrap() - f2)
}
