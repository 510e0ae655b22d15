//! Acceptance checks, one per criterion. Runs without the libtest harness so
//! the PASS/FAIL lines always reach the console; the process exits nonzero
//! if any criterion fails.

mod common;

use std::collections::HashSet;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use nash_anneal::annealer::{accept, run_many, AnnealOptions, ExactBackend, Schedule};
use nash_anneal::bench::GameInstanceFile;
use nash_anneal::cim_sim::{ceil_log2, wta_max, CimBackend, CrossbarConfig, ProgrammedCrossbar, WtaTree};
use nash_anneal::game::{BimatrixGame, PayoffMatrix};
use nash_anneal::lattice::{all_profiles, QuantizedProfile};
use nash_anneal::oracle::{coverage, enumerate_all, is_degenerate, NeSolutionSet};
use nash_anneal::qubo::{lattice_decomposed_scaled, max_qubo, max_qubo_decomposed, max_qubo_lattice_scaled, SQuboObjective};
use nash_anneal::{ExactProfile, Rational};
use num_integer::Integer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{random_game, random_matrix};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

/// Largest denominator-lcm over the given equilibria.
fn lcm_of(profiles: &[&ExactProfile]) -> i128 {
    profiles
        .iter()
        .flat_map(|pr| pr.p.probs().iter().chain(pr.q.probs()))
        .fold(1i128, |acc, r| acc.lcm(r.denom()))
}

fn binom(n: u64, k: u64) -> u64 {
    (1..=k).fold(1u64, |acc, i| acc * (n - k + i) / i)
}

fn lattice_size(n: usize, m: usize, intervals: u32) -> u64 {
    let i = u64::from(intervals);
    binom(i + n as u64 - 1, n as u64 - 1) * binom(i + m as u64 - 1, m as u64 - 1)
}

fn zero_set(truth: &NeSolutionSet, intervals: u32) -> HashSet<QuantizedProfile> {
    truth.profiles().filter_map(|p| QuantizedProfile::exact_from(p, intervals)).collect()
}

// 1: f = 0 exactly at the equilibria and nowhere else on the lattice.
fn zero_iff_ne() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut nondegenerate, mut degenerate, mut checked, mut failures) = (0u32, 0u32, 0u64, Vec::new());
    while nondegenerate < 500 {
        let n = rng.random_range(2..=4);
        let m = rng.random_range(2..=4);
        let game = random_game(&mut rng, n, m, 9);
        let degen = is_degenerate(&game);
        let truth = enumerate_all(&game).expect("small game");
        for p in truth.profiles() {
            if max_qubo(&game, p).unwrap() != Rational::from_integer(0) {
                failures.push(format!("f != 0 at an oracle equilibrium of {:?}", game.row_payoffs()));
            }
        }
        if degen {
            degenerate += 1;
            continue;
        }
        nondegenerate += 1;
        let all: Vec<&ExactProfile> = truth.profiles().collect();
        let l = lcm_of(&all);
        let intervals = if l > 60 { 12 } else { (12 + l - 1) / l * l } as u32;
        let zeros = zero_set(&truth, intervals);
        let mut samples: Vec<QuantizedProfile> = if lattice_size(n, m, intervals) <= 10_000 {
            all_profiles(n, m, intervals)
        } else {
            (0..10_000).map(|_| QuantizedProfile::random(n, m, intervals, &mut rng)).collect()
        };
        for z in &zeros {
            samples.push(z.clone());
            samples.extend(z.neighbors());
        }
        for s in &samples {
            let is_zero = max_qubo_lattice_scaled(&game, s).unwrap() == 0;
            if is_zero != zeros.contains(s) {
                failures.push(format!("zero={is_zero} at {:?}/{:?} I={intervals}", s.p.counts(), s.q.counts()));
            }
        }
        checked += samples.len() as u64;
    }
    verdict(
        failures.is_empty(),
        format!(
            "500 nondegenerate games, {checked} lattice points, {degenerate} degenerate draws checked one-way, {} mismatches{}",
            failures.len(),
            failures.first().map(|f| format!(" (first: {f})")).unwrap_or_default()
        ),
    )
}

// 2: nonnegativity and invariance under adding constants to each matrix.
fn nonneg_and_shift() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut bad = 0u32;
    for _ in 0..100_000 {
        let n = rng.random_range(1..=6);
        let m = rng.random_range(1..=6);
        let intervals = rng.random_range(1..=16);
        let a = random_matrix(&mut rng, n, m, 50);
        let b = random_matrix(&mut rng, n, m, 50);
        let (c, d) = (rng.random_range(0..=100), rng.random_range(0..=100));
        let shift = |x: &[Vec<i64>], k: i64| x.iter().map(|r| r.iter().map(|v| v + k).collect()).collect::<Vec<_>>();
        let g = BimatrixGame::new("g", a.clone(), b.clone()).unwrap();
        let h = BimatrixGame::new("h", shift(&a, c), shift(&b, d)).unwrap();
        let prof = QuantizedProfile::random(n, m, intervals, &mut rng);
        let fg = max_qubo_lattice_scaled(&g, &prof).unwrap();
        let fh = max_qubo_lattice_scaled(&h, &prof).unwrap();
        let exact: ExactProfile = prof.dequantize();
        let rg = max_qubo(&g, &exact).unwrap();
        let rh = max_qubo(&h, &exact).unwrap();
        let scale = Rational::from_integer(i128::from(intervals) * i128::from(intervals));
        if fg < 0 || fg != fh || rg != rh || rg * scale != Rational::from_integer(i128::from(fg)) {
            bad += 1;
        }
    }
    verdict(bad == 0, format!("100000 random (game, shift, profile) triples, {bad} violations"))
}

// 3: a noiseless crossbar reproduces the exact decomposition bit for bit.
fn noiseless_crossbar() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut bad, mut total) = (0u32, 0u32);
    for _ in 0..200 {
        let n = rng.random_range(1..=4);
        let m = rng.random_range(1..=4);
        let intervals = rng.random_range(1..=8);
        let game = random_game(&mut rng, n, m, 9);
        let mut backend = CimBackend::new(&game, &CrossbarConfig::noiseless(intervals), 0).unwrap();
        let denom = f64::from(intervals * intervals);
        for _ in 0..50 {
            let prof = QuantizedProfile::random(n, m, intervals, &mut rng);
            let d = max_qubo_decomposed::<Rational>(&game, &prof.dequantize()).unwrap();
            let scaled = lattice_decomposed_scaled(&game, &prof).unwrap();
            let f = |r: &Rational| *r.numer() as f64 / *r.denom() as f64;
            let (a, b) = backend.phase1(&prof).unwrap();
            let (vm, vn) = backend.phase2(&prof).unwrap();
            total += 1;
            let ok = a == f(&d.alpha)
                && b == f(&d.beta)
                && vm == f(&d.vmv_m)
                && vn == f(&d.vmv_n)
                && a == scaled.alpha as f64 / denom;
            if !ok {
                bad += 1;
            }
        }
    }
    verdict(bad == 0, format!("{total} profiles over 200 games, {bad} phase outputs differ from the exact values"))
}

fn bos_check() -> (bool, String) {
    let game = BimatrixGame::battle_of_the_sexes();
    let truth = enumerate_all(&game).unwrap();
    let opts = AnnealOptions::new(Schedule::for_game(&game, 10_000).unwrap(), 12);
    let (stats, _) = run_many(&game, |_| Ok(ExactBackend::new(&game)), &opts, 200, 4, 1).unwrap();
    let cov = coverage(stats.solution_counts.iter().map(|(p, _)| p), &truth, 12);
    let ok = stats.success_rate >= 0.95 && cov.found_reachable == 3 && cov.reachable_count == 3;
    (ok, format!("BoS success {:.3} coverage {}/{}", stats.success_rate, cov.found_reachable, cov.reachable_count))
}

/// Resolution for a random game: keep equilibria in oracle order while the
/// lcm of their denominators stays within 12, then take the smallest multiple
/// of that lcm that is at least 4.
fn pick_intervals(truth: &NeSolutionSet) -> u32 {
    let mut l = 1i128;
    for p in truth.profiles() {
        let next = lcm_of(&[p]).lcm(&l);
        if next <= 12 {
            l = next;
        }
    }
    let l = l as u32;
    4u32.div_ceil(l) * l
}

struct SizeClass {
    size: usize,
    hi: i64,
    iterations: u64,
}

fn random_class(class: &SizeClass, seed: u64) -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut rates, mut full_coverage, mut drawn) = (Vec::new(), 0usize, 0u32);
    let mut chosen = std::collections::BTreeMap::<u32, u32>::new();
    while rates.len() < 20 {
        drawn += 1;
        let game = random_game(&mut rng, class.size, class.size, class.hi);
        if is_degenerate(&game) {
            continue;
        }
        let truth = enumerate_all(&game).unwrap();
        let intervals = pick_intervals(&truth);
        if zero_set(&truth, intervals).is_empty() {
            continue;
        }
        let opts = AnnealOptions::new(Schedule::for_game(&game, class.iterations).unwrap(), intervals);
        let master = rng.random();
        let (stats, _) = run_many(&game, |_| Ok(ExactBackend::new(&game)), &opts, 200, master, 1).unwrap();
        let cov = coverage(stats.solution_counts.iter().map(|(p, _)| p), &truth, intervals);
        if cov.found_reachable == cov.reachable_count {
            full_coverage += 1;
        }
        rates.push(stats.success_rate);
        *chosen.entry(intervals).or_default() += 1;
    }
    let mean = rates.iter().sum::<f64>() / rates.len() as f64;
    let min = rates.iter().cloned().fold(f64::INFINITY, f64::min);
    let ok = mean >= 0.6 && full_coverage == rates.len();
    let n = class.size;
    (ok, format!("{n}x{n}: mean success {mean:.3} (min {min:.3}), full coverage {full_coverage}/20, {drawn} draws, I:games {chosen:?}"))
}

// 4: success rate and coverage of the exact annealer.
fn anneal_success() -> Verdict {
    let (bos_ok, bos) = bos_check();
    let (small_ok, small) = random_class(&SizeClass { size: 3, hi: 99, iterations: 15_000 }, 43);
    let (large_ok, large) = random_class(&SizeClass { size: 8, hi: 99, iterations: 50_000 }, 83);
    verdict(bos_ok && small_ok && large_ok, format!("{bos}; {small}; {large}"))
}

// 5: the slack objective cannot express the mixed equilibrium.
fn s_qubo_coverage() -> Verdict {
    let game = BimatrixGame::battle_of_the_sexes();
    let obj = SQuboObjective::with_defaults(&game);
    let min = obj.minimize_exhaustive().unwrap();
    let truth = enumerate_all(&game).unwrap();
    let found: Vec<QuantizedProfile> = min.minimizers.iter().filter_map(|a| a.decoded_lattice(12)).collect();
    let cov = coverage(&found, &truth, 12);
    let ratio = cov.found_reachable as f64 / cov.truth_count as f64;
    verdict(
        ratio <= 2.0 / 3.0,
        format!("{} minimizers, coverage {}/{}", min.minimizers.len(), cov.found_reachable, cov.truth_count),
    )
}

// 6: WTA tree accuracy and cell count.
fn wta_accuracy() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut exact_bad, mut bound_bad, mut worst) = (0u32, 0u32, 0.0f64);
    for _ in 0..100_000 {
        let d = rng.random_range(1..=64);
        let v: Vec<f64> = (0..d).map(|_| rng.random_range(0.0..1000.0)).collect();
        let truth = v.iter().cloned().fold(0.0, f64::max);
        if wta_max(&v, &WtaTree::ideal(d).unwrap()).unwrap() != truth {
            exact_bad += 1;
        }
        let out = wta_max(&v, &WtaTree::new(d, 0.0025, &mut rng).unwrap()).unwrap();
        let rel = (out - truth).abs() / truth;
        let bound = 1.0025f64.powi(ceil_log2(d) as i32) - 1.0;
        worst = worst.max(rel / bound.max(f64::MIN_POSITIVE));
        if rel > bound {
            bound_bad += 1;
        }
    }
    let cells_bad = (1..=64)
        .filter(|&d| WtaTree::ideal(d).unwrap().cell_count() != (1usize << ceil_log2(d)) - 1)
        .count();
    verdict(
        exact_bad == 0 && bound_bad == 0 && cells_bad == 0,
        format!(
            "100000 vectors: {exact_bad} ideal mismatches, {bound_bad} over the error bound (worst {:.3} of bound), {cells_bad} bad cell counts",
            worst
        ),
    )
}

// 7: column current grows linearly with the number of driven rows.
fn column_linearity() -> Verdict {
    let stored = PayoffMatrix::new(vec![vec![1]]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let trials = 100usize;
    let mut sums = vec![0.0f64; 65];
    for _ in 0..trials {
        let xbar = ProgrammedCrossbar::program(&stored, 64, 1, 0.08, &mut rng).unwrap();
        for (k, s) in sums.iter_mut().enumerate().skip(1) {
            *s += xbar.column_current(0, k);
        }
    }
    let pts: Vec<(f64, f64)> = (1..=64).map(|k| (k as f64, sums[k] / trials as f64)).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    let syy: f64 = pts.iter().map(|(_, y)| (y - my).powi(2)).sum();
    let r2 = sxy * sxy / (sxx * syy);
    let outside = pts
        .iter()
        .filter(|(k, y)| (y - k).abs() > 3.0 * 0.08 * k.sqrt() / (trials as f64).sqrt())
        .count();
    verdict(r2 >= 0.999 && outside == 0, format!("R^2 = {r2:.6}, {outside}/64 means outside 3 standard errors of y = k"))
}

fn bench_outputs(bin: &str, config: &Path, threads: u32, out: &Path) -> Vec<(String, Vec<u8>)> {
    let status = Command::new(bin)
        .args(["bench", "--config"])
        .arg(config)
        .args(["--threads", &threads.to_string(), "--solvers", "max-qubo/exact,max-qubo/cim,s-qubo", "--out"])
        .arg(out)
        .env_remove("NASH_ANNEAL_SEED")
        .output()
        .expect("binary runs");
    assert!(status.status.success(), "bench failed: {}", String::from_utf8_lossy(&status.stderr));
    ["results.json", "success.csv", "distribution.csv", "coverage.csv"]
        .iter()
        .map(|f| (f.to_string(), std::fs::read(out.join(f)).expect("output file")))
        .collect()
}

// 8: output bytes do not depend on the thread count.
fn reproducibility() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let instance = GameInstanceFile::from_game(&BimatrixGame::battle_of_the_sexes());
    std::fs::write(dir.path().join("bos.json"), instance.to_json()).unwrap();
    let config = dir.path().join("exp.toml");
    std::fs::write(&config, "instance = \"bos.json\"\nseed = 2024\nruns = 200\niterations = 10000\nI = 12\n").unwrap();
    let bin = env!("CARGO_BIN_EXE_nash-anneal");
    let a = bench_outputs(bin, &config, 1, &dir.path().join("t1"));
    let b = bench_outputs(bin, &config, 3, &dir.path().join("t3"));
    let differing: Vec<&str> = a.iter().zip(&b).filter(|(x, y)| x.1 != y.1).map(|(x, _)| x.0.as_str()).collect();
    verdict(
        differing.is_empty(),
        format!("bench with 1 and 3 threads: {} of 4 files differ {:?}", differing.len(), differing),
    )
}

// 9: Metropolis acceptance frequency.
fn acceptance_rate() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let t = 1.7;
    let delta = t * std::f64::consts::LN_2;
    let hits = (0..100_000).filter(|_| accept(delta, t, &mut rng)).count();
    let rate = hits as f64 / 100_000.0;
    verdict((0.495..=0.505).contains(&rate), format!("rate {rate:.4} at exp(-dE/T) = 0.5 over 100000 proposals"))
}

fn main() -> ExitCode {
    type Check = fn() -> Verdict;
    let checks: [(u32, &str, Check, u64); 9] = [
        (1, "zero objective iff equilibrium", zero_iff_ne, 60),
        (2, "nonnegative and shift invariant", nonneg_and_shift, 30),
        (3, "noiseless crossbar is exact", noiseless_crossbar, 60),
        (4, "annealer success and coverage", anneal_success, 600),
        (5, "slack objective misses the mixed equilibrium", s_qubo_coverage, 10),
        (6, "WTA tree accuracy", wta_accuracy, 30),
        (7, "column current linearity", column_linearity, 60),
        (8, "thread-count independent output", reproducibility, 120),
        (9, "Metropolis acceptance rate", acceptance_rate, 10),
    ];
    let filter: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (id, name, check, budget) in checks {
        if !filter.is_empty() && !filter.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let v = check();
        let took = start.elapsed();
        let in_time = took <= Duration::from_secs(budget);
        let pass = v.pass && in_time;
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {id} {}: {name}: {} [{:.1}s of {budget}s]",
            if pass { "PASS" } else { "FAIL" },
            v.detail,
            took.as_secs_f64()
        );
    }
    if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
