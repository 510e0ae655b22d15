//! Two-phase objective evaluation and the annealing driver.
//!
//! Each iteration proposes a neighboring lattice profile, evaluates the
//! objective as `(max(Mq) + max(Nᵀp)) - (pᵀMq + pᵀNq)` in two phases, and
//! accepts with the Metropolis rule at the current temperature. The driver
//! also tracks the best profile seen; the final current profile is reported
//! alongside it.

use std::collections::BTreeMap;

use num_rational::Ratio;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cim_sim::{ceil_log2, modeled_time, per_iteration_ns, Timing};
use crate::error::{Error, Result};
use crate::game::BimatrixGame;
use crate::lattice::{MoveKind, QuantizedProfile};
use crate::qubo::{check_lattice_range, lattice_decomposed_scaled, max_qubo_lattice, max_qubo_lattice_scaled, SQuboAssignment, SQuboObjective};
use crate::scalar::Scalar;
use crate::Rational;

/// Phase 1 output.
#[derive(Debug, Clone, PartialEq)]
pub struct MaxTerms<V> {
    pub alpha: V,
    pub beta: V,
}

/// Phase 2 output.
#[derive(Debug, Clone, PartialEq)]
pub struct VmvTerms<V> {
    pub vmv_m: V,
    pub vmv_n: V,
}

/// Something that evaluates the objective of a lattice profile in two phases.
pub trait Backend {
    type Value: Scalar;

    /// `max(Mq)` and `max(Nᵀp)`.
    fn phase1(&mut self, prof: &QuantizedProfile) -> Result<MaxTerms<Self::Value>>;

    /// `pᵀMq` and `pᵀNq`.
    fn phase2(&mut self, prof: &QuantizedProfile) -> Result<VmvTerms<Self::Value>>;

    /// Depth of the deeper WTA tree, for the timing model.
    fn wta_depth(&self) -> u32;

    /// Full objective. Implementations may fuse the phases but must agree
    /// with [`two_phase_evaluate`].
    fn evaluate(&mut self, prof: &QuantizedProfile) -> Result<Self::Value> {
        two_phase_evaluate(self, prof)
    }
}

pub fn two_phase_evaluate<B: Backend + ?Sized>(backend: &mut B, prof: &QuantizedProfile) -> Result<B::Value> {
    let MaxTerms { alpha, beta } = backend.phase1(prof)?;
    let VmvTerms { vmv_m, vmv_n } = backend.phase2(prof)?;
    Ok(alpha + beta - vmv_m - vmv_n)
}

/// Exact evaluation by integer counting on the lattice.
#[derive(Debug, Clone, Copy)]
pub struct ExactBackend<'g> {
    game: &'g BimatrixGame,
}

impl<'g> ExactBackend<'g> {
    pub fn new(game: &'g BimatrixGame) -> Self {
        Self { game }
    }
}

fn lattice_denominator(prof: &QuantizedProfile) -> i128 {
    let i = i128::from(prof.intervals());
    i * i
}

impl Backend for ExactBackend<'_> {
    type Value = Rational;

    fn phase1(&mut self, prof: &QuantizedProfile) -> Result<MaxTerms<Rational>> {
        let d = lattice_decomposed_scaled(self.game, prof)?;
        let den = lattice_denominator(prof);
        Ok(MaxTerms { alpha: Ratio::new(d.alpha.into(), den), beta: Ratio::new(d.beta.into(), den) })
    }

    fn phase2(&mut self, prof: &QuantizedProfile) -> Result<VmvTerms<Rational>> {
        let d = lattice_decomposed_scaled(self.game, prof)?;
        let den = lattice_denominator(prof);
        Ok(VmvTerms { vmv_m: Ratio::new(d.vmv_m.into(), den), vmv_n: Ratio::new(d.vmv_n.into(), den) })
    }

    fn wta_depth(&self) -> u32 {
        ceil_log2(self.game.n()).max(ceil_log2(self.game.m()))
    }

    fn evaluate(&mut self, prof: &QuantizedProfile) -> Result<Rational> {
        Ok(Ratio::new(max_qubo_lattice_scaled(self.game, prof)?.into(), lattice_denominator(prof)))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Decay {
    /// `T ← γT`
    #[default]
    Geometric,
    /// `T ← T - (t_max - t_min) / iterations`
    Linear,
}

/// Temperature schedule over a fixed proposal budget.
///
/// Proposal `k` (for `k` in `0..iterations`) runs at `temperature(k)`; after
/// the last proposal the temperature has been decayed exactly `iterations`
/// times and equals `t_min`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub t_max: f64,
    pub t_min: f64,
    pub iterations: u64,
    pub decay: Decay,
}

impl Schedule {
    pub fn new(t_max: f64, t_min: f64, iterations: u64, decay: Decay) -> Result<Self> {
        if !(t_min.is_finite() && t_max.is_finite() && t_min > 0.0 && t_max >= t_min) {
            return Err(Error::Input(format!("need 0 < t_min <= t_max, got t_min={t_min}, t_max={t_max}")));
        }
        if iterations == 0 {
            return Err(Error::Input("iterations must be at least 1".into()));
        }
        Ok(Self { t_max, t_min, iterations, decay })
    }

    /// Geometric schedule with `t_max` = largest entry of `M + N` and
    /// `t_min = 1e-3`.
    pub fn for_game(game: &BimatrixGame, iterations: u64) -> Result<Self> {
        let t_min = 1e-3;
        Self::new((game.max_sum_entry() as f64).max(t_min), t_min, iterations, Decay::Geometric)
    }

    /// Geometric factor `(t_min / t_max)^(1 / iterations)`.
    pub fn gamma(&self) -> f64 {
        (self.t_min / self.t_max).powf(1.0 / self.iterations as f64)
    }

    /// Temperature after `k` decays.
    pub fn temperature(&self, k: u64) -> f64 {
        if k >= self.iterations {
            return self.t_min;
        }
        match self.decay {
            Decay::Geometric => self.t_max * self.gamma().powf(k as f64),
            Decay::Linear => self.t_max - (self.t_max - self.t_min) * (k as f64 / self.iterations as f64),
        }
    }
}

/// Metropolis rule: downhill and flat moves always, uphill with `exp(-ΔE/T)`.
pub fn accept<R: Rng + ?Sized>(delta: f64, temperature: f64, rng: &mut R) -> bool {
    delta <= 0.0 || rng.random::<f64>() < (-delta / temperature).exp()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub iteration: u64,
    pub temperature: f64,
    pub candidate_f: f64,
    pub current_f: f64,
    pub best_f: f64,
    pub accepted: bool,
}

/// Options shared by every annealing run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnealOptions {
    pub schedule: Schedule,
    pub intervals: u32,
    pub moves: MoveKind,
    pub record_trace: bool,
    pub timing: Timing,
}

impl AnnealOptions {
    pub fn new(schedule: Schedule, intervals: u32) -> Self {
        Self { schedule, intervals, moves: MoveKind::OnePlayer, record_trace: false, timing: Timing::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub best_profile: QuantizedProfile,
    /// Exact objective at `best_profile`.
    #[serde(with = "crate::rational::as_str")]
    pub best_f: Rational,
    /// Backend's value at `best_profile` when it was recorded.
    pub best_f_backend: f64,
    pub final_profile: QuantizedProfile,
    #[serde(with = "crate::rational::as_str")]
    pub final_f: Rational,
    pub accepted_moves: u64,
    pub evaluations: u64,
    pub iterations: u64,
    pub modeled_time_s: f64,
    /// `best_f == 0`.
    pub succeeded: bool,
    /// `final_f == 0`.
    pub final_succeeded: bool,
    /// Iteration at which the best-so-far profile first became an exact
    /// equilibrium (`0` is the initial draw).
    pub first_success_iteration: Option<u64>,
    pub first_success_time_s: Option<f64>,
    pub trace: Option<Vec<TracePoint>>,
}

/// Result of the generic Metropolis loop.
struct SaOutcome<S, V> {
    best: S,
    best_value: V,
    current: S,
    accepted: u64,
    evaluations: u64,
    first_goal: Option<u64>,
    trace: Option<Vec<TracePoint>>,
}

/// Generic Metropolis loop over `schedule.iterations` proposals. `is_goal` is
/// consulted whenever the best-so-far state changes.
fn metropolis<S, V, R, E, P, G>(
    schedule: &Schedule,
    rng: &mut R,
    init: S,
    record_trace: bool,
    mut energy: E,
    mut propose: P,
    mut is_goal: G,
) -> Result<SaOutcome<S, V>>
where
    S: Clone,
    V: Scalar,
    R: Rng + ?Sized,
    E: FnMut(&S) -> Result<V>,
    P: FnMut(&S, &mut R) -> S,
    G: FnMut(&S) -> Result<bool>,
{
    let mut current = init;
    let mut current_value = energy(&current)?;
    let mut best = current.clone();
    let mut best_value = current_value.clone();
    let mut first_goal = is_goal(&best)?.then_some(0);
    let mut accepted = 0u64;
    let mut trace = record_trace.then(|| Vec::with_capacity(schedule.iterations as usize));
    for k in 0..schedule.iterations {
        let temperature = schedule.temperature(k);
        let candidate = propose(&current, rng);
        let candidate_value = energy(&candidate)?;
        let delta = candidate_value.clone() - current_value.clone();
        let take = if delta <= V::zero() {
            true
        } else {
            let d = delta.as_f64();
            if !d.is_finite() {
                return Err(Error::Backend(format!("non-finite energy difference {delta:?}")));
            }
            accept(d, temperature, rng)
        };
        if take {
            accepted += 1;
            current = candidate;
            current_value = candidate_value.clone();
            if current_value < best_value {
                best = current.clone();
                best_value = current_value.clone();
                if first_goal.is_none() && is_goal(&best)? {
                    first_goal = Some(k + 1);
                }
            }
        }
        if let Some(t) = trace.as_mut() {
            t.push(TracePoint {
                iteration: k + 1,
                temperature,
                candidate_f: candidate_value.as_f64(),
                current_f: current_value.as_f64(),
                best_f: best_value.as_f64(),
                accepted: take,
            });
        }
    }
    Ok(SaOutcome {
        best,
        best_value,
        current,
        accepted,
        evaluations: schedule.iterations + 1,
        first_goal,
        trace,
    })
}

/// One annealing run over the lattice of `opts.intervals`.
///
/// Proposals are compared by the backend's values; success is always decided
/// with the exact objective, so a noisy backend cannot report a spurious
/// equilibrium.
pub fn anneal<B: Backend, R: Rng + ?Sized>(
    game: &BimatrixGame,
    backend: &mut B,
    opts: &AnnealOptions,
    rng: &mut R,
) -> Result<RunResult> {
    if opts.intervals == 0 {
        return Err(Error::Input("interval count must be at least 1".into()));
    }
    check_lattice_range(game, opts.intervals)?;
    let (n, m) = (game.n(), game.m());
    let init = QuantizedProfile::random(n, m, opts.intervals, rng);
    let depth = backend.wta_depth();
    let moves = opts.moves;
    let out = metropolis(
        &opts.schedule,
        rng,
        init,
        opts.record_trace,
        |s: &QuantizedProfile| backend.evaluate(s),
        |s: &QuantizedProfile, r: &mut R| s.neighbor(moves, r),
        |s: &QuantizedProfile| Ok(max_qubo_lattice_scaled(game, s)? == 0),
    )?;
    let best_f = max_qubo_lattice(game, &out.best)?;
    let final_f = max_qubo_lattice(game, &out.current)?;
    let per_iter_s = per_iteration_ns(depth, &opts.timing) * 1e-9;
    Ok(RunResult {
        succeeded: best_f.is_zero(),
        final_succeeded: final_f.is_zero(),
        best_f_backend: out.best_value.as_f64(),
        best_profile: out.best,
        best_f,
        final_profile: out.current,
        final_f,
        accepted_moves: out.accepted,
        evaluations: out.evaluations,
        iterations: opts.schedule.iterations,
        modeled_time_s: modeled_time(opts.schedule.iterations, depth, &opts.timing),
        first_success_iteration: out.first_goal,
        first_success_time_s: out.first_goal.map(|k| k as f64 * per_iter_s),
        trace: out.trace,
    })
}

/// Annealing over the slack objective's binary space (one bit flip per
/// proposal).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SQuboRunResult {
    pub best_assignment: SQuboAssignment,
    #[serde(with = "crate::rational::as_str")]
    pub best_value: Rational,
    pub final_assignment: SQuboAssignment,
    pub accepted_moves: u64,
    pub evaluations: u64,
    pub iterations: u64,
    pub modeled_time_s: f64,
    /// Best assignment decodes to a pure profile that is an exact equilibrium.
    pub succeeded: bool,
    pub final_succeeded: bool,
    pub first_success_iteration: Option<u64>,
    pub first_success_time_s: Option<f64>,
    pub trace: Option<Vec<TracePoint>>,
}

fn decodes_to_ne(game: &BimatrixGame, asg: &SQuboAssignment) -> Result<bool> {
    match asg.decoded_lattice(1) {
        Some(prof) => Ok(max_qubo_lattice_scaled(game, &prof)? == 0),
        None => Ok(false),
    }
}

pub fn anneal_s_qubo<R: Rng + ?Sized>(
    obj: &SQuboObjective<'_>,
    schedule: &Schedule,
    timing: &Timing,
    record_trace: bool,
    rng: &mut R,
) -> Result<SQuboRunResult> {
    let mut init = SQuboAssignment::zeros(obj);
    let bits = init.bit_count();
    for k in 0..bits {
        if rng.random_bool(0.5) {
            init.flip(k);
        }
    }
    let game = obj.game;
    let out = metropolis(
        schedule,
        rng,
        init,
        record_trace,
        |s: &SQuboAssignment| obj.evaluate(s),
        |s: &SQuboAssignment, r: &mut R| {
            let mut next = s.clone();
            next.flip(r.random_range(0..bits));
            next
        },
        |s: &SQuboAssignment| decodes_to_ne(game, s),
    )?;
    let per_iter_s = per_iteration_ns(0, timing) * 1e-9;
    Ok(SQuboRunResult {
        succeeded: decodes_to_ne(game, &out.best)?,
        final_succeeded: decodes_to_ne(game, &out.current)?,
        best_assignment: out.best,
        best_value: out.best_value,
        final_assignment: out.current,
        accepted_moves: out.accepted,
        evaluations: out.evaluations,
        iterations: schedule.iterations,
        modeled_time_s: modeled_time(schedule.iterations, 0, timing),
        first_success_iteration: out.first_goal,
        first_success_time_s: out.first_goal.map(|k| k as f64 * per_iter_s),
        trace: out.trace,
    })
}

/// Per-run record kept by [`BatchStats`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOutcome {
    pub run: u64,
    pub seed: u64,
    /// Best profile, or `None` when the run's best state is not a profile
    /// (a slack assignment whose bits are not one-hot).
    pub profile: Option<QuantizedProfile>,
    #[serde(with = "opt_rational")]
    pub objective: Option<Rational>,
    pub succeeded: bool,
    pub final_succeeded: bool,
    pub accepted_moves: u64,
    pub modeled_time_s: f64,
    pub first_success_time_s: Option<f64>,
}

mod opt_rational {
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::rational::{format_rational, parse_rational};
    use crate::Rational;

    pub fn serialize<S: Serializer>(v: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(r) => s.serialize_some(&format_rational(r)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rational>, D::Error> {
        Option::<String>::deserialize(d)?
            .map(|t| parse_rational(&t).map_err(serde::de::Error::custom))
            .transpose()
    }
}

impl RunResult {
    pub fn outcome(&self, run: u64, seed: u64) -> RunOutcome {
        RunOutcome {
            run,
            seed,
            profile: Some(self.best_profile.clone()),
            objective: Some(self.best_f),
            succeeded: self.succeeded,
            final_succeeded: self.final_succeeded,
            accepted_moves: self.accepted_moves,
            modeled_time_s: self.modeled_time_s,
            first_success_time_s: self.first_success_time_s,
        }
    }
}

impl SQuboRunResult {
    pub fn outcome(&self, game: &BimatrixGame, run: u64, seed: u64, intervals: u32) -> RunOutcome {
        let profile = self.best_assignment.decoded_lattice(intervals);
        let objective = profile.as_ref().and_then(|p| max_qubo_lattice(game, p).ok());
        RunOutcome {
            run,
            seed,
            profile,
            objective,
            succeeded: self.succeeded,
            final_succeeded: self.final_succeeded,
            accepted_moves: self.accepted_moves,
            modeled_time_s: self.modeled_time_s,
            first_success_time_s: self.first_success_time_s,
        }
    }
}

/// Aggregate over independent runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchStats {
    pub runs: u64,
    pub master_seed: u64,
    pub successes: u64,
    pub success_rate: f64,
    pub final_successes: u64,
    pub final_success_rate: f64,
    /// Successful best profiles with their frequencies, in profile order.
    pub solution_counts: Vec<(QuantizedProfile, u64)>,
    /// Smallest exact objective over all runs' best profiles.
    #[serde(with = "opt_rational")]
    pub min_objective: Option<Rational>,
    /// Mean modeled time to the first exact equilibrium, over successful runs.
    pub mean_time_to_solution_s: Option<f64>,
    pub mean_modeled_time_s: f64,
    pub outcomes: Vec<RunOutcome>,
}

impl BatchStats {
    pub fn from_outcomes(master_seed: u64, outcomes: Vec<RunOutcome>) -> Self {
        let runs = outcomes.len() as u64;
        let successes = outcomes.iter().filter(|o| o.succeeded).count() as u64;
        let final_successes = outcomes.iter().filter(|o| o.final_succeeded).count() as u64;
        let mut counts: BTreeMap<QuantizedProfile, u64> = BTreeMap::new();
        for o in outcomes.iter().filter(|o| o.succeeded) {
            if let Some(p) = &o.profile {
                *counts.entry(p.clone()).or_default() += 1;
            }
        }
        let times: Vec<f64> = outcomes.iter().filter(|o| o.succeeded).filter_map(|o| o.first_success_time_s).collect();
        let rate = |k: u64| if runs == 0 { 0.0 } else { k as f64 / runs as f64 };
        Self {
            runs,
            master_seed,
            successes,
            success_rate: rate(successes),
            final_successes,
            final_success_rate: rate(final_successes),
            solution_counts: counts.into_iter().collect(),
            min_objective: outcomes.iter().filter_map(|o| o.objective).min(),
            mean_time_to_solution_s: (!times.is_empty()).then(|| times.iter().sum::<f64>() / times.len() as f64),
            mean_modeled_time_s: if runs == 0 {
                0.0
            } else {
                outcomes.iter().map(|o| o.modeled_time_s).sum::<f64>() / runs as f64
            },
            outcomes,
        }
    }

    /// Distinct successful profiles.
    pub fn distinct(&self) -> Vec<QuantizedProfile> {
        self.solution_counts.iter().map(|(p, _)| p.clone()).collect()
    }
}

/// Seed of run `index` derived from the master seed (SplitMix64 finalizer).
pub fn split_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn run_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Run `runs` independent jobs on `threads` workers (`0` = all cores) and
/// collect results in run order.
pub fn parallel_runs<T, F>(runs: u64, threads: usize, job: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Backend(format!("thread pool: {e}")))?;
    pool.install(|| (0..runs).into_par_iter().map(&job).collect())
}

/// `runs` independent annealing runs with seeds split from `master_seed`.
/// Each run builds its own backend through `make_backend(run_seed)`; the
/// result does not depend on `threads`.
pub fn run_many<B, F>(
    game: &BimatrixGame,
    make_backend: F,
    opts: &AnnealOptions,
    runs: u64,
    master_seed: u64,
    threads: usize,
) -> Result<(BatchStats, Vec<RunResult>)>
where
    B: Backend,
    F: Fn(u64) -> Result<B> + Sync + Send,
{
    if runs == 0 {
        return Err(Error::Input("runs must be at least 1".into()));
    }
    let results = parallel_runs(runs, threads, |i| {
        let seed = split_seed(master_seed, i);
        let mut backend = make_backend(seed)?;
        let mut rng = run_rng(seed);
        anneal(game, &mut backend, opts, &mut rng)
    })?;
    let outcomes =
        results.iter().enumerate().map(|(i, r)| r.outcome(i as u64, split_seed(master_seed, i as u64))).collect();
    Ok((BatchStats::from_outcomes(master_seed, outcomes), results))
}

/// Batch of slack-objective runs, reported on the lattice of `intervals`.
pub fn run_many_s_qubo(
    obj: &SQuboObjective<'_>,
    schedule: &Schedule,
    timing: &Timing,
    intervals: u32,
    runs: u64,
    master_seed: u64,
    threads: usize,
) -> Result<(BatchStats, Vec<SQuboRunResult>)> {
    if runs == 0 {
        return Err(Error::Input("runs must be at least 1".into()));
    }
    let results = parallel_runs(runs, threads, |i| {
        let mut rng = run_rng(split_seed(master_seed, i));
        anneal_s_qubo(obj, schedule, timing, false, &mut rng)
    })?;
    let outcomes = results
        .iter()
        .enumerate()
        .map(|(i, r)| r.outcome(obj.game, i as u64, split_seed(master_seed, i as u64), intervals))
        .collect();
    Ok((BatchStats::from_outcomes(master_seed, outcomes), results))
}
