use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use nash_anneal::annealer::Decay;
use nash_anneal::bench::{
    bench, coverage_csv, distribution_csv, enumeration_text, load_game, solve, success_csv, sweep, sweep_csv,
    BackendKind, ExperimentConfig, Objective, Solver,
};
use nash_anneal::lattice::MoveKind;
use nash_anneal::oracle::enumerate_all;
use nash_anneal::Error;

#[derive(Parser)]
#[command(name = "nash-anneal", version, about = "Nash equilibria of bimatrix games by simulated annealing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// One seeded annealing run.
    Solve {
        #[command(flatten)]
        exp: ExperimentArgs,
        /// Write the result JSON here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print the result JSON instead of the text summary.
        #[arg(long)]
        json: bool,
    },
    /// Many runs per solver, scored against exact enumeration.
    Bench {
        #[command(flatten)]
        exp: ExperimentArgs,
        /// Comma-separated `objective/backend` list; defaults to the configured solver.
        #[arg(long, value_delimiter = ',')]
        solvers: Vec<Solver>,
        /// Directory for results.json and the CSV reports.
        #[arg(long, default_value = "bench_out")]
        out: PathBuf,
    },
    /// Print every equilibrium found by support enumeration.
    Enumerate {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Bench over a grid of lattice resolutions and iteration budgets.
    Sweep {
        #[command(flatten)]
        exp: ExperimentArgs,
        #[arg(long, value_delimiter = ',')]
        solvers: Vec<Solver>,
        #[arg(long = "I-list", value_delimiter = ',', required = true)]
        intervals_list: Vec<u32>,
        #[arg(long = "iters-list", value_delimiter = ',', required = true)]
        iters_list: Vec<u64>,
        #[arg(long, default_value = "sweep_out")]
        out: PathBuf,
    },
}

/// Flags layered over an optional config file. The seed is resolved as
/// flag, then `NASH_ANNEAL_SEED`, then file, then 0.
#[derive(Args)]
struct ExperimentArgs {
    /// TOML (or .json) experiment file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    instance: Option<PathBuf>,
    #[arg(long)]
    objective: Option<Objective>,
    #[arg(long)]
    backend: Option<BackendKind>,
    /// Lattice resolution: probabilities are multiples of 1/I.
    #[arg(long = "I")]
    intervals: Option<u32>,
    #[arg(long)]
    iters: Option<u64>,
    #[arg(long)]
    runs: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (0 = all cores); results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    t_max: Option<f64>,
    #[arg(long)]
    t_min: Option<f64>,
    #[arg(long, value_parser = parse_decay)]
    decay: Option<Decay>,
    /// Perturb both players per proposal instead of one.
    #[arg(long)]
    both_players: bool,
    #[arg(long)]
    cell_sigma: Option<f64>,
    #[arg(long)]
    wta_offset: Option<f64>,
    #[arg(long)]
    cells_per_element: Option<u32>,
    #[arg(long)]
    adc_levels: Option<u32>,
    #[arg(long)]
    read_noise_sigma: Option<f64>,
    #[arg(long)]
    cim_seed: Option<u64>,
    #[arg(long)]
    t_read_ns: Option<f64>,
    #[arg(long)]
    t_logic_ns: Option<f64>,
}

fn parse_decay(s: &str) -> Result<Decay, String> {
    match s {
        "geometric" => Ok(Decay::Geometric),
        "linear" => Ok(Decay::Linear),
        _ => Err(format!("unknown decay {s:?} (expected geometric or linear)")),
    }
}

impl ExperimentArgs {
    fn resolve(&self) -> Result<ExperimentConfig, Error> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        cfg.apply_seed_env()?;
        macro_rules! set {
            ($($src:ident => $($dst:ident).+),* $(,)?) => {
                $(if let Some(v) = self.$src.clone() { cfg.$($dst).+ = v; })*
            };
        }
        set!(
            instance => instance,
            objective => objective,
            backend => backend,
            intervals => intervals,
            iters => iterations,
            runs => runs,
            seed => seed,
            threads => threads,
            t_min => schedule.t_min,
            decay => schedule.decay,
            cell_sigma => cim.cell_sigma,
            wta_offset => cim.wta_offset,
            cells_per_element => cim.cells_per_element,
            adc_levels => cim.adc_levels,
            read_noise_sigma => cim.read_noise_sigma,
            cim_seed => cim.seed,
            t_read_ns => cim.t_read_ns,
            t_logic_ns => cim.t_logic_ns,
        );
        if self.t_max.is_some() {
            cfg.schedule.t_max = self.t_max;
        }
        if self.both_players {
            cfg.moves = MoveKind::BothPlayers;
        }
        if cfg.instance.as_os_str().is_empty() {
            return Err(Error::Input("no instance given (use --instance or a config file)".into()));
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

enum Failure {
    Input(String),
    Internal(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Backend(_) | Error::Overflow(_) => Failure::Internal(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    std::fs::write(path, contents).map_err(|e| Failure::Internal(format!("cannot write {}: {e}", path.display())))
}

fn to_json<T: serde::Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report serializes");
    s.push('\n');
    s
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Solve { exp, out, json } => {
            let cfg = exp.resolve()?;
            let (game, _) = load_game(&cfg.instance)?;
            let report = solve(&game, &cfg)?;
            let text = to_json(&report);
            if let Some(path) = out {
                write_file(&path, &text)?;
            }
            if json {
                print!("{text}");
            } else {
                println!("instance: {} ({})", report.instance, report.solver);
                match &report.best {
                    Some(b) => {
                        println!("best p counts: {:?}  q counts: {:?}  (I = {})", b.p_counts, b.q_counts, report.intervals);
                        println!("best p: {:?}  q: {:?}", b.p_decimal, b.q_decimal);
                        println!("kind: {}", b.kind);
                    }
                    None => println!("best state does not decode to a strategy profile"),
                }
                println!("best_f: {}", report.best_f.as_deref().unwrap_or("n/a"));
                println!("nash equilibrium: {}", if report.succeeded { "yes" } else { "no" });
                println!("modeled time: {:e} s", report.modeled_time_s);
            }
        }
        Command::Bench { exp, solvers, out } => {
            let cfg = exp.resolve()?;
            let solvers = if solvers.is_empty() { vec![cfg.solver()] } else { solvers };
            let (game, _) = load_game(&cfg.instance)?;
            let report = bench(&game, &cfg, &solvers)?;
            std::fs::create_dir_all(&out)
                .map_err(|e| Failure::Internal(format!("cannot create {}: {e}", out.display())))?;
            let table = success_csv(std::slice::from_ref(&report));
            write_file(&out.join("results.json"), &to_json(&report))?;
            write_file(&out.join("success.csv"), &table)?;
            write_file(&out.join("distribution.csv"), &distribution_csv(&report))?;
            write_file(&out.join("coverage.csv"), &coverage_csv(&report))?;
            print!("{table}");
        }
        Command::Enumerate { instance, json } => {
            let (game, _) = load_game(&instance)?;
            let set = enumerate_all(&game)?;
            if json {
                print!("{}", to_json(&set));
            } else {
                print!("{}", enumeration_text(&set));
            }
        }
        Command::Sweep { exp, solvers, intervals_list, iters_list, out } => {
            let cfg = exp.resolve()?;
            let solvers = if solvers.is_empty() { vec![cfg.solver()] } else { solvers };
            let (game, _) = load_game(&cfg.instance)?;
            let points = sweep(&game, &cfg, &solvers, &intervals_list, &iters_list)?;
            std::fs::create_dir_all(&out)
                .map_err(|e| Failure::Internal(format!("cannot create {}: {e}", out.display())))?;
            let table = sweep_csv(&points);
            write_file(&out.join("sweep.csv"), &table)?;
            write_file(&out.join("sweep.json"), &to_json(&points))?;
            print!("{table}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(1)
        }
    }
}
