//! Command-line front end.
//!
//! Exit codes: 0 success, 1 verification failure, 2 input error,
//! 3 solver or Worse-search incompleteness.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use satpath::dynamics::{batch_experiment, run_dynamics, BatchConfig, ExplorerPolicy, DEFAULT_DYNAMICS_EPS};
use satpath::game::DEFAULT_SAT_EPS;
use satpath::io::{self, OutputFormat, Trace};
use satpath::nash::max_gap;
use satpath::sampling::{random_profile, rng_from_seed};
use satpath::satisficing::StepKind;
use satpath::{construct_path, find_nash, verify_path, Error, Game, SolverConfig, StrategyProfile, WorseSearchConfig};

#[derive(Parser)]
#[command(name = "satpath", version, about = "Satisficing paths to Nash equilibrium")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Explorer {
    Dirichlet,
    Pure,
    Mixture,
}

#[derive(clap::Args)]
struct Output {
    /// Output format.
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Output file; `-` or omitted writes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(clap::Args)]
struct Start {
    /// Initial profile as a JSON array of probability arrays. When omitted a
    /// profile is drawn from --seed (each player pure or interior with
    /// probability 1/2).
    #[arg(long)]
    init: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random game with payoffs uniform on [-1, 1].
    Gen {
        #[arg(long)]
        players: usize,
        /// Comma-separated action counts, one per player.
        #[arg(long, value_delimiter = ',')]
        actions: Vec<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        name: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Find a Nash equilibrium by support enumeration.
    Solve {
        #[arg(long)]
        game: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        eps: f64,
        #[command(flatten)]
        output: Output,
    },
    /// Construct a satisficing path to equilibrium.
    Path {
        #[arg(long)]
        game: PathBuf,
        #[command(flatten)]
        start: Start,
        #[arg(long, default_value_t = DEFAULT_SAT_EPS)]
        eps: f64,
        /// Worse-search candidate budget per step.
        #[arg(long, default_value_t = 5_000)]
        budget: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Verify a trace written by `path` or `simulate`.
    Verify {
        #[arg(long)]
        game: PathBuf,
        /// Trace file (JSON or CSV).
        #[arg(long)]
        trace: PathBuf,
        /// Satisfaction tolerance; defaults to the trace's own, or 1e-9 for
        /// CSV paths and 1e-6 for CSV trajectories.
        #[arg(long)]
        eps: Option<f64>,
        /// Check only the pairwise satisfaction constraint.
        #[arg(long)]
        constraint_only: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate win-stay/lose-shift dynamics.
    Simulate {
        #[arg(long)]
        game: PathBuf,
        #[command(flatten)]
        start: Start,
        #[arg(long, default_value_t = DEFAULT_DYNAMICS_EPS)]
        eps: f64,
        #[arg(long, default_value_t = 1_000)]
        max_steps: usize,
        #[arg(long, value_enum, default_value = "dirichlet")]
        explorer: Explorer,
        #[arg(long, default_value_t = 0.5)]
        mixture_weight: f64,
        #[command(flatten)]
        output: Output,
    },
    /// Hitting statistics of the dynamics over many seeded trials.
    Batch {
        /// One or more game files.
        #[arg(long, required = true, num_args = 1..)]
        game: Vec<PathBuf>,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = DEFAULT_DYNAMICS_EPS)]
        eps: f64,
        #[arg(long, default_value_t = 1_000)]
        max_steps: usize,
        #[arg(long, value_enum, default_value = "dirichlet")]
        explorer: Explorer,
        #[arg(long, default_value_t = 0.5)]
        mixture_weight: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: Output,
    },
}

enum Failure {
    Verification(String),
    Error(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Error(e)
    }
}

fn explorer(kind: Explorer, weight: f64) -> ExplorerPolicy {
    match kind {
        Explorer::Dirichlet => ExplorerPolicy::DirichletUniform,
        Explorer::Pure => ExplorerPolicy::PureUniform,
        Explorer::Mixture => ExplorerPolicy::MixtureWithCurrent { mixture_weight: weight },
    }
}

fn write_bytes(out: Option<&Path>, bytes: &[u8]) -> Result<(), Error> {
    match out {
        Some(p) if p != Path::new("-") => std::fs::write(p, bytes).map_err(|e| Error::Io {
            path: p.to_path_buf(),
            source: e,
        }),
        _ => std::io::stdout().lock().write_all(bytes).map_err(|e| Error::Io {
            path: "<stdout>".into(),
            source: e,
        }),
    }
}

fn json_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    let mut v = serde_json::to_vec_pretty(value).expect("serializable");
    v.push(b'\n');
    v
}

fn initial_profile(game: &Game, start: &Start) -> Result<StrategyProfile, Error> {
    match &start.init {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Error::Io {
                path: p.clone(),
                source: e,
            })?;
            io::parse_profile(game, &text)
        }
        None => Ok(random_profile(game, 0.5, &mut rng_from_seed(start.seed))),
    }
}

fn emit(trace: Trace<'_>, output: &Output) -> Result<(), Error> {
    let dest = output.out.clone().unwrap_or_else(|| PathBuf::from("-"));
    io::emit_path(trace, output.format.into(), &dest)
}

#[derive(Serialize)]
struct SolveOutput<'a> {
    profile: &'a StrategyProfile,
    max_gap: f64,
}

#[derive(Serialize)]
struct VerifyOutput {
    passed: bool,
    epsilon: f64,
    length: usize,
    terminal_gap: f64,
    violation: Option<satpath::satisficing::Violation>,
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Gen {
            players,
            actions,
            seed,
            name,
            out,
        } => {
            let game = io::generate_random_game(players, &actions, seed)?;
            write_bytes(out.as_deref(), io::game_to_json(&game, name.as_deref()).as_bytes())?;
        }
        Command::Solve { game, eps, output } => {
            let game = io::load_game(&game)?;
            let config = SolverConfig {
                tolerance: eps,
                ..Default::default()
            };
            let profile = find_nash(&game, &config)?;
            let gap = max_gap(&game, &profile)?;
            let bytes = match output.format {
                Format::Json => json_bytes(&SolveOutput {
                    profile: &profile,
                    max_gap: gap,
                }),
                Format::Csv => {
                    let mut s = String::from("player,action,probability\n");
                    for (i, st) in profile.iter().enumerate() {
                        for (a, p) in st.probs().iter().enumerate() {
                            s.push_str(&format!("{i},{a},{p:.16e}\n"));
                        }
                    }
                    s.into_bytes()
                }
            };
            write_bytes(output.out.as_deref(), &bytes)?;
        }
        Command::Path {
            game,
            start,
            eps,
            budget,
            output,
        } => {
            let game = io::load_game(&game)?;
            let x1 = initial_profile(&game, &start)?;
            let worse = WorseSearchConfig {
                budget,
                rng_seed: start.seed,
                ..Default::default()
            };
            let path = construct_path(&game, &x1, eps, &worse, &SolverConfig::default())?;
            emit(Trace::Path(&path), &output)?;
        }
        Command::Verify {
            game,
            trace,
            eps,
            constraint_only,
            out,
        } => {
            let game = io::load_game(&game)?;
            let parsed = io::load_trace(&trace)?;
            let trajectory = parsed.is_trajectory();
            let epsilon = eps.or(parsed.epsilon).unwrap_or(if trajectory {
                DEFAULT_DYNAMICS_EPS
            } else {
                DEFAULT_SAT_EPS
            });
            let strict = !constraint_only && !trajectory;
            let v = verify_path(&game, &parsed.profiles, epsilon, strict, strict)?;
            write_bytes(
                out.as_deref(),
                &json_bytes(&VerifyOutput {
                    passed: v.passed,
                    epsilon,
                    length: v.length,
                    terminal_gap: v.terminal_gap,
                    violation: v.violation.clone(),
                }),
            )?;
            if !v.passed {
                return Err(Failure::Verification(format!("{:?}", v.violation)));
            }
            if parsed.step_kinds.first() != Some(&StepKind::Initial) {
                return Err(Failure::Verification("trace does not start with an initial step".into()));
            }
        }
        Command::Simulate {
            game,
            start,
            eps,
            max_steps,
            explorer: kind,
            mixture_weight,
            output,
        } => {
            let game = io::load_game(&game)?;
            let x1 = initial_profile(&game, &start)?;
            let traj = run_dynamics(&game, &x1, eps, max_steps, explorer(kind, mixture_weight), start.seed)?;
            emit(Trace::Trajectory(&traj), &output)?;
        }
        Command::Batch {
            game,
            trials,
            eps,
            max_steps,
            explorer: kind,
            mixture_weight,
            seed,
            output,
        } => {
            let games = game
                .iter()
                .map(|p| io::load_game(p))
                .collect::<Result<Vec<_>, _>>()?;
            let config = BatchConfig {
                trials_per_game: trials,
                epsilon: eps,
                explorer: explorer(kind, mixture_weight),
                max_steps,
                master_seed: seed,
                ..Default::default()
            };
            let summary = batch_experiment(&games, &config)?;
            let bytes = match output.format {
                Format::Json => json_bytes(&summary),
                Format::Csv => {
                    let opt = |v: Option<f64>| v.map(|x| format!("{x:.16e}")).unwrap_or_default();
                    let mut s = String::from("game,trials,hits,hit_frequency,mean_hitting_time,median_hitting_time\n");
                    for r in &summary {
                        s.push_str(&format!(
                            "{},{},{},{:.16e},{},{}\n",
                            r.game,
                            r.trials,
                            r.hits,
                            r.hit_frequency,
                            opt(r.mean_hitting_time),
                            opt(r.median_hitting_time)
                        ));
                    }
                    s.into_bytes()
                }
            };
            write_bytes(output.out.as_deref(), &bytes)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Error(e)) => {
            eprintln!("error: {e}");
            match e {
                Error::SolverIncomplete { .. } | Error::WorseSearchIncomplete { .. } => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}
