//! Instance files, experiment configuration, and the report builders behind
//! the command-line tool.
//!
//! Reports carry modeled times only; nothing here reads a wall clock, so a
//! fixed configuration and seed always produce byte-identical artifacts.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::annealer::{run_many, run_many_s_qubo, AnnealOptions, BatchStats, Decay, ExactBackend, Schedule};
use crate::cim_sim::{CimBackend, CrossbarConfig};
use crate::error::{Error, Result};
use crate::game::{classify, normalize_payoffs, AffineRecord, BimatrixGame, PureOrMixed};
use crate::lattice::{MoveKind, QuantizedProfile};
use crate::oracle::{coverage, enumerate_all, CoverageReport, NeSolutionSet, MAX_ACTIONS};
use crate::qubo::SQuboObjective;
use crate::rational::{format_rational, parse_rational, rational_to_f64};
use crate::Rational;

/// Environment variable that overrides the master seed of a config file.
pub const SEED_ENV: &str = "NASH_ANNEAL_SEED";

/// One payoff as written in an instance file: a JSON integer or an exact
/// rational string such as `"3/4"`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PayoffEntry {
    Int(i64),
    Text(String),
}

impl PayoffEntry {
    pub fn value(&self) -> Result<Rational> {
        match self {
            PayoffEntry::Int(v) => Ok(Rational::from_integer(i128::from(*v))),
            PayoffEntry::Text(t) => parse_rational(t),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpectedProfile {
    pub p: Vec<String>,
    pub q: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceMetadata {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_ne: Option<Vec<ExpectedProfile>>,
}

/// Instance JSON: `{"name": ..., "M": [[...]], "N": [[...]], "metadata": {...}}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameInstanceFile {
    pub name: String,
    #[serde(rename = "M")]
    pub m: Vec<Vec<PayoffEntry>>,
    #[serde(rename = "N")]
    pub n: Vec<Vec<PayoffEntry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<InstanceMetadata>,
}

fn rational_rows(rows: &[Vec<PayoffEntry>]) -> Result<Vec<Vec<Rational>>> {
    rows.iter().map(|r| r.iter().map(PayoffEntry::value).collect()).collect()
}

impl GameInstanceFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Input(format!("instance JSON: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Input(format!("cannot read instance {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serializes")
    }

    /// The canonical integer game and the transform back to raw payoffs.
    pub fn to_game(&self) -> Result<(BimatrixGame, AffineRecord)> {
        normalize_payoffs(self.name.clone(), &rational_rows(&self.m)?, &rational_rows(&self.n)?)
    }

    pub fn from_game(game: &BimatrixGame) -> Self {
        let ints = |rows: Vec<Vec<i64>>| rows.into_iter().map(|r| r.into_iter().map(PayoffEntry::Int).collect()).collect();
        Self {
            name: game.name.clone(),
            m: ints(game.row_payoffs().to_rows()),
            n: ints(game.col_payoffs().to_rows()),
            metadata: None,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Objective {
    #[default]
    #[serde(rename = "max-qubo")]
    MaxQubo,
    #[serde(rename = "s-qubo")]
    SQubo,
}

impl std::fmt::Display for Objective {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Objective::MaxQubo => "max-qubo",
            Objective::SQubo => "s-qubo",
        })
    }
}

impl std::str::FromStr for Objective {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "max-qubo" => Ok(Objective::MaxQubo),
            "s-qubo" => Ok(Objective::SQubo),
            _ => Err(Error::Input(format!("unknown objective {s:?} (expected max-qubo or s-qubo)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    #[default]
    Exact,
    Cim,
}

impl std::fmt::Display for BackendKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            BackendKind::Exact => "exact",
            BackendKind::Cim => "cim",
        })
    }
}

impl std::str::FromStr for BackendKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(BackendKind::Exact),
            "cim" => Ok(BackendKind::Cim),
            _ => Err(Error::Input(format!("unknown backend {s:?} (expected exact or cim)"))),
        }
    }
}

/// Objective plus evaluator, written `objective/backend` on the command line.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Solver {
    pub objective: Objective,
    pub backend: BackendKind,
}

impl std::fmt::Display for Solver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}", self.objective, self.backend)
    }
}

impl std::str::FromStr for Solver {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let (o, b) = s.split_once('/').unwrap_or((s, "exact"));
        Ok(Solver { objective: o.parse()?, backend: b.parse()? })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScheduleConfig {
    /// Starting temperature; defaults to the largest entry of `M + N`.
    pub t_max: Option<f64>,
    pub t_min: f64,
    pub decay: Decay,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        Self { t_max: None, t_min: 1e-3, decay: Decay::Geometric }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub instance: PathBuf,
    pub objective: Objective,
    pub backend: BackendKind,
    #[serde(rename = "I")]
    pub intervals: u32,
    pub iterations: u64,
    pub runs: u64,
    pub seed: u64,
    /// Worker threads for independent runs; `0` uses every core.
    pub threads: usize,
    pub moves: MoveKind,
    pub schedule: ScheduleConfig,
    pub cim: CrossbarConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            instance: PathBuf::new(),
            objective: Objective::MaxQubo,
            backend: BackendKind::Exact,
            intervals: 12,
            iterations: 10_000,
            runs: 200,
            seed: 0,
            threads: 0,
            moves: MoveKind::OnePlayer,
            schedule: ScheduleConfig::default(),
            cim: CrossbarConfig::default(),
        }
    }
}

impl ExperimentConfig {
    /// Parse a TOML file, or JSON when the extension is `.json`. A relative
    /// instance path is resolved against the config file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Input(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg: Self = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).map_err(|e| Error::Input(format!("config JSON: {e}")))?
        } else {
            toml::from_str(&text).map_err(|e| Error::Input(format!("config TOML: {e}")))?
        };
        if !cfg.instance.as_os_str().is_empty() && cfg.instance.is_relative() {
            if let Some(dir) = path.parent() {
                cfg.instance = dir.join(&cfg.instance);
            }
        }
        Ok(cfg)
    }

    /// Apply the seed override from the environment, if set.
    pub fn apply_seed_env(&mut self) -> Result<()> {
        if let Ok(v) = std::env::var(SEED_ENV) {
            self.seed = v
                .trim()
                .parse()
                .map_err(|_| Error::Input(format!("{SEED_ENV} must be an unsigned integer, got {v:?}")))?;
        }
        Ok(())
    }

    pub fn solver(&self) -> Solver {
        Solver { objective: self.objective, backend: self.backend }
    }

    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::Input("iterations must be at least 1".into()));
        }
        if self.runs == 0 {
            return Err(Error::Input("runs must be at least 1".into()));
        }
        if self.intervals == 0 {
            return Err(Error::Input("I must be at least 1".into()));
        }
        validate_solver(self.solver())?;
        self.crossbar().validate()
    }

    /// Crossbar settings with the lattice resolution of the experiment.
    pub fn crossbar(&self) -> CrossbarConfig {
        CrossbarConfig { intervals: self.intervals, ..self.cim.clone() }
    }

    pub fn schedule(&self, game: &BimatrixGame) -> Result<Schedule> {
        let t_max = self.schedule.t_max.unwrap_or(game.max_sum_entry() as f64).max(self.schedule.t_min);
        Schedule::new(t_max, self.schedule.t_min, self.iterations, self.schedule.decay)
    }

    pub fn anneal_options(&self, game: &BimatrixGame) -> Result<AnnealOptions> {
        let mut opts = AnnealOptions::new(self.schedule(game)?, self.intervals);
        opts.moves = self.moves;
        opts.timing = self.cim.timing();
        Ok(opts)
    }
}

fn validate_solver(solver: Solver) -> Result<()> {
    if solver == (Solver { objective: Objective::SQubo, backend: BackendKind::Cim }) {
        return Err(Error::Input("the s-qubo objective has no crossbar backend; use s-qubo/exact".into()));
    }
    Ok(())
}

/// Load the instance named by a config.
pub fn load_game(path: &Path) -> Result<(BimatrixGame, AffineRecord)> {
    GameInstanceFile::load(path)?.to_game()
}

/// Profile in both count and decimal form, for reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileReport {
    pub p_counts: Vec<u32>,
    pub q_counts: Vec<u32>,
    pub p: Vec<String>,
    pub q: Vec<String>,
    pub p_decimal: Vec<f64>,
    pub q_decimal: Vec<f64>,
    pub kind: PureOrMixed,
}

impl ProfileReport {
    pub fn new(prof: &QuantizedProfile) -> Self {
        let exact = prof.dequantize::<Rational>();
        Self {
            p_counts: prof.p.counts().to_vec(),
            q_counts: prof.q.counts().to_vec(),
            p: exact.p.to_strings(),
            q: exact.q.to_strings(),
            p_decimal: exact.p.probs().iter().map(rational_to_f64).collect(),
            q_decimal: exact.q.probs().iter().map(rational_to_f64).collect(),
            kind: classify(&exact),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub instance: String,
    pub solver: Solver,
    #[serde(rename = "I")]
    pub intervals: u32,
    pub iterations: u64,
    pub seed: u64,
    pub run_seed: u64,
    /// `None` when a slack-objective run ends on bits that are not one-hot.
    pub best: Option<ProfileReport>,
    pub best_f: Option<String>,
    pub succeeded: bool,
    pub final_succeeded: bool,
    pub accepted_moves: u64,
    pub modeled_time_s: f64,
    pub first_success_time_s: Option<f64>,
}

/// One seeded run; identical to run 0 of a batch with the same seed.
pub fn solve(game: &BimatrixGame, cfg: &ExperimentConfig) -> Result<SolveReport> {
    let one = ExperimentConfig { runs: 1, ..cfg.clone() };
    let stats = run_batch(game, &one, cfg.solver())?;
    let o = &stats.outcomes[0];
    Ok(SolveReport {
        instance: game.name.clone(),
        solver: cfg.solver(),
        intervals: cfg.intervals,
        iterations: cfg.iterations,
        seed: cfg.seed,
        run_seed: o.seed,
        best: o.profile.as_ref().map(ProfileReport::new),
        best_f: o.objective.as_ref().map(format_rational),
        succeeded: o.succeeded,
        final_succeeded: o.final_succeeded,
        accepted_moves: o.accepted_moves,
        modeled_time_s: o.modeled_time_s,
        first_success_time_s: o.first_success_time_s,
    })
}

/// `cfg.runs` runs of `solver` on `game`.
pub fn run_batch(game: &BimatrixGame, cfg: &ExperimentConfig, solver: Solver) -> Result<BatchStats> {
    validate_solver(solver)?;
    let opts = cfg.anneal_options(game)?;
    match (solver.objective, solver.backend) {
        (Objective::MaxQubo, BackendKind::Exact) => {
            Ok(run_many(game, |_| Ok(ExactBackend::new(game)), &opts, cfg.runs, cfg.seed, cfg.threads)?.0)
        }
        (Objective::MaxQubo, BackendKind::Cim) => {
            let xbar = cfg.crossbar();
            xbar.validate()?;
            CimBackend::new(game, &xbar, 0)?;
            Ok(run_many(game, |s| CimBackend::new(game, &xbar, s), &opts, cfg.runs, cfg.seed, cfg.threads)?.0)
        }
        (Objective::SQubo, _) => {
            let d = SQuboObjective::with_defaults(game);
            let obj = SQuboObjective::new(game, d.weights.clone(), d.alpha_code, d.beta_code, d.slack_code)?;
            let schedule = opts.schedule;
            Ok(run_many_s_qubo(&obj, &schedule, &opts.timing, cfg.intervals, cfg.runs, cfg.seed, cfg.threads)?.0)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverReport {
    pub solver: Solver,
    pub stats: BatchStats,
    pub coverage: Option<CoverageReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub instance: String,
    #[serde(rename = "I")]
    pub intervals: u32,
    pub iterations: u64,
    pub runs: u64,
    pub seed: u64,
    /// `None` when the game exceeds the oracle's size limit.
    pub truth: Option<NeSolutionSet>,
    pub solvers: Vec<SolverReport>,
}

/// Ground truth for a game, or `None` beyond the enumeration limit.
pub fn ground_truth(game: &BimatrixGame) -> Result<Option<NeSolutionSet>> {
    if game.n() > MAX_ACTIONS || game.m() > MAX_ACTIONS {
        return Ok(None);
    }
    enumerate_all(game).map(Some)
}

/// Run every solver with the same seed and score each against the oracle.
pub fn bench(game: &BimatrixGame, cfg: &ExperimentConfig, solvers: &[Solver]) -> Result<BenchReport> {
    bench_with_truth(game, cfg, solvers, ground_truth(game)?)
}

pub fn bench_with_truth(
    game: &BimatrixGame,
    cfg: &ExperimentConfig,
    solvers: &[Solver],
    truth: Option<NeSolutionSet>,
) -> Result<BenchReport> {
    if cfg.runs == 0 {
        return Err(Error::Input("runs must be at least 1".into()));
    }
    let mut reports = Vec::with_capacity(solvers.len());
    for &solver in solvers {
        let stats = run_batch(game, cfg, solver)?;
        let cov = truth.as_ref().map(|t| coverage(stats.solution_counts.iter().map(|(p, _)| p), t, cfg.intervals));
        reports.push(SolverReport { solver, stats, coverage: cov });
    }
    Ok(BenchReport {
        instance: game.name.clone(),
        intervals: cfg.intervals,
        iterations: cfg.iterations,
        runs: cfg.runs,
        seed: cfg.seed,
        truth,
        solvers: reports,
    })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn counts_text(c: &[u32]) -> String {
    c.iter().map(u32::to_string).collect::<Vec<_>>().join(" ")
}

/// Success rate and time per solver.
pub fn success_csv(reports: &[BenchReport]) -> String {
    let mut out = String::from(
        "instance,solver,I,iterations,runs,successes,success_rate,final_success_rate,coverage,mean_time_to_solution_s,mean_modeled_time_s\n",
    );
    for r in reports {
        for s in &r.solvers {
            let cov = s.coverage.as_ref().and_then(|c| c.proportion);
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{}",
                r.instance,
                s.solver,
                r.intervals,
                r.iterations,
                r.runs,
                s.stats.successes,
                s.stats.success_rate,
                s.stats.final_success_rate,
                fmt_opt(cov),
                fmt_opt(s.stats.mean_time_to_solution_s),
                s.stats.mean_modeled_time_s
            )
            .expect("write to string");
        }
    }
    out
}

/// Frequency of each successful solution, per solver.
pub fn distribution_csv(report: &BenchReport) -> String {
    let mut out = String::from("solver,p_counts,q_counts,p,q,kind,frequency,share\n");
    for s in &report.solvers {
        let total = s.stats.successes.max(1) as f64;
        for (prof, count) in &s.stats.solution_counts {
            let pr = ProfileReport::new(prof);
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                s.solver,
                counts_text(&pr.p_counts),
                counts_text(&pr.q_counts),
                pr.p.join(" "),
                pr.q.join(" "),
                pr.kind,
                count,
                *count as f64 / total
            )
            .expect("write to string");
        }
    }
    out
}

/// Oracle coverage per solver, one row per reachable equilibrium.
pub fn coverage_csv(report: &BenchReport) -> String {
    let mut out = String::from("solver,p,q,kind,reachable,found\n");
    let Some(truth) = &report.truth else {
        return out;
    };
    for s in &report.solvers {
        let found: Vec<&QuantizedProfile> = s.stats.solution_counts.iter().map(|(p, _)| p).collect();
        for sol in &truth.solutions {
            let lattice = QuantizedProfile::exact_from(&sol.profile, report.intervals);
            let hit = lattice.as_ref().is_some_and(|l| found.contains(&l));
            writeln!(
                out,
                "{},{},{},{},{},{}",
                s.solver,
                sol.profile.p.to_strings().join(" "),
                sol.profile.q.to_strings().join(" "),
                sol.kind,
                lattice.is_some(),
                hit
            )
            .expect("write to string");
        }
    }
    out
}

/// Grid point of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    #[serde(rename = "I")]
    pub intervals: u32,
    pub iterations: u64,
    pub solver: Solver,
    pub success_rate: f64,
    pub coverage: Option<f64>,
    pub reachable: Option<usize>,
    pub mean_time_to_solution_s: Option<f64>,
}

/// Success and coverage over the grid `intervals × iterations`. Every point
/// reuses the master seed.
pub fn sweep(
    game: &BimatrixGame,
    cfg: &ExperimentConfig,
    solvers: &[Solver],
    intervals: &[u32],
    iterations: &[u64],
) -> Result<Vec<SweepPoint>> {
    let truth = ground_truth(game)?;
    let mut points = Vec::new();
    for &i in intervals {
        for &it in iterations {
            let point_cfg = ExperimentConfig { intervals: i, iterations: it, ..cfg.clone() };
            point_cfg.validate_counts()?;
            let rep = bench_with_truth(game, &point_cfg, solvers, truth.clone())?;
            for s in rep.solvers {
                points.push(SweepPoint {
                    intervals: i,
                    iterations: it,
                    solver: s.solver,
                    success_rate: s.stats.success_rate,
                    coverage: s.coverage.as_ref().and_then(|c| c.proportion),
                    reachable: s.coverage.as_ref().map(|c| c.reachable_count),
                    mean_time_to_solution_s: s.stats.mean_time_to_solution_s,
                });
            }
        }
    }
    Ok(points)
}

impl ExperimentConfig {
    fn validate_counts(&self) -> Result<()> {
        if self.iterations == 0 || self.intervals == 0 || self.runs == 0 {
            return Err(Error::Input("I, iterations and runs must all be at least 1".into()));
        }
        Ok(())
    }
}

pub fn sweep_csv(points: &[SweepPoint]) -> String {
    let mut out = String::from("I,iterations,solver,success_rate,coverage,reachable,mean_time_to_solution_s\n");
    for p in points {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            p.intervals,
            p.iterations,
            p.solver,
            p.success_rate,
            fmt_opt(p.coverage),
            p.reachable.map(|r| r.to_string()).unwrap_or_default(),
            fmt_opt(p.mean_time_to_solution_s)
        )
        .expect("write to string");
    }
    out
}

/// Lines printed by the `enumerate` command.
pub fn enumeration_text(set: &NeSolutionSet) -> String {
    let mut out = String::new();
    for s in &set.solutions {
        writeln!(out, "{}\tp=({})\tq=({})", s.kind, s.profile.p.to_strings().join(", "), s.profile.q.to_strings().join(", "))
            .expect("write to string");
    }
    if set.degenerate {
        out.push_str("degenerate: true (equilibria may form continua; the list can be incomplete)\n");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bos_file() -> GameInstanceFile {
        GameInstanceFile::from_game(&BimatrixGame::battle_of_the_sexes())
    }

    #[test]
    fn instance_round_trip_and_rationals() {
        let f = bos_file();
        assert_eq!(GameInstanceFile::from_json(&f.to_json()).unwrap(), f);
        let text = r#"{"name":"r","M":[["1/2",0],[0,"1/4"]],"N":[[1,"-1"],[0,2]]}"#;
        let (g, rec) = GameInstanceFile::from_json(text).unwrap().to_game().unwrap();
        assert_eq!(g.row_payoffs().to_rows(), vec![vec![2, 0], vec![0, 1]]);
        assert_eq!(g.col_payoffs().to_rows(), vec![vec![8, 0], vec![4, 12]]);
        assert!(!rec.is_identity());
        assert!(GameInstanceFile::from_json(r#"{"name":"x","M":[[1]],"N":[[1]],"extra":1}"#).is_err());
        assert!(GameInstanceFile::from_json(r#"{"name":"x","M":[["1/0"]],"N":[[1]]}"#).unwrap().to_game().is_err());
    }

    #[test]
    fn solver_parsing() {
        assert_eq!("s-qubo".parse::<Solver>().unwrap(), Solver { objective: Objective::SQubo, backend: BackendKind::Exact });
        assert_eq!("max-qubo/cim".parse::<Solver>().unwrap().to_string(), "max-qubo/cim");
        assert!("foo".parse::<Solver>().is_err());
        let cfg = ExperimentConfig { objective: Objective::SQubo, backend: BackendKind::Cim, ..Default::default() };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn config_from_toml() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("exp.toml");
        std::fs::write(
            &path,
            "instance = \"bos.json\"\nI = 6\niterations = 500\nruns = 3\nseed = 11\n[schedule]\nt_min = 0.01\n[cim]\ncell_sigma = 0.0\n",
        )
        .unwrap();
        let cfg = ExperimentConfig::load(&path).unwrap();
        assert_eq!(cfg.instance, dir.path().join("bos.json"));
        assert_eq!((cfg.intervals, cfg.iterations, cfg.runs, cfg.seed), (6, 500, 3, 11));
        assert_eq!(cfg.schedule.t_min, 0.01);
        assert_eq!(cfg.crossbar().intervals, 6);
        std::fs::write(&path, "iters = 5\n").unwrap();
        assert!(ExperimentConfig::load(&path).is_err());
    }

    #[test]
    fn bench_reports_are_consistent() {
        let g = BimatrixGame::battle_of_the_sexes();
        let cfg = ExperimentConfig { iterations: 2000, runs: 12, seed: 3, threads: 1, ..Default::default() };
        let solvers = ["max-qubo/exact".parse().unwrap(), "s-qubo".parse().unwrap()];
        let rep = bench(&g, &cfg, &solvers).unwrap();
        assert_eq!(rep.solvers.len(), 2);
        assert_eq!(rep.truth.as_ref().unwrap().len(), 3);
        let csv = success_csv(std::slice::from_ref(&rep));
        assert_eq!(csv.lines().count(), 3);
        let dist = distribution_csv(&rep);
        let total: u64 = dist.lines().skip(1).map(|l| l.split(',').nth(6).unwrap().parse::<u64>().unwrap()).sum();
        assert_eq!(total, rep.solvers.iter().map(|s| s.stats.successes).sum::<u64>());
        for line in dist.lines().skip(1).filter(|l| l.starts_with("s-qubo")) {
            assert!(line.contains(",Pure,"));
        }
        let back: BenchReport = serde_json::from_str(&serde_json::to_string(&rep).unwrap()).unwrap();
        assert_eq!(back, rep);
        let solo = solve(&g, &cfg).unwrap();
        assert_eq!(solo.run_seed, rep.solvers[0].stats.outcomes[0].seed);
        assert_eq!(solo.succeeded, rep.solvers[0].stats.outcomes[0].succeeded);
    }

    #[test]
    fn enumeration_lines() {
        let set = enumerate_all(&BimatrixGame::battle_of_the_sexes()).unwrap();
        let text = enumeration_text(&set);
        assert_eq!(text.lines().count(), 3);
        assert!(text.contains("Mixed\tp=(2/3, 1/3)\tq=(1/3, 2/3)"));
        let flat = BimatrixGame::new("c", vec![vec![1; 2]; 2], vec![vec![1; 2]; 2]).unwrap();
        assert!(enumeration_text(&enumerate_all(&flat).unwrap()).contains("degenerate: true"));
    }
}
