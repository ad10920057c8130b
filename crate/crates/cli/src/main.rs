use std::fs;
use std::io::{self, BufRead, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use mastermind_core::optimizer::{
    self, parse_checkpoint, progress_line, resume_with, write_checkpoint, GaConfig, GaMode,
    Genome, PROGRESS_HEADER,
};
use mastermind_core::weights::check_mode;
use mastermind_core::{
    build_tree, bundled_weights, emit_weights, evaluate_all, named_policy, parse_weights,
    serialize_tree, Error, Feedback, FeedbackTable, GameParams, Policy, WeightFile,
};
use mastermind_service::session::{Session, Status};
use mastermind_service::ServiceConfig;

/// Environment variable holding the worker thread count; 1 runs everything sequentially.
const THREADS_ENV: &str = "MASTERMIND_THREADS";

const P: GameParams = GameParams::STANDARD;

#[derive(Parser, Debug)]
#[command(name = "mastermind", version, about = "Weighted-entropy Mastermind solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Play every secret and report the turn statistics
    Evaluate {
        #[command(flatten)]
        policy: PolicyArgs,
        #[arg(long, default_value_t = 10)]
        max_turns: u32,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the complete strategy tree
    Tree {
        #[command(flatten)]
        policy: PolicyArgs,
        /// Depth bound; deeper branches are an error
        #[arg(long, default_value_t = 10)]
        max_turns: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Search for weights with the genetic algorithm
    Optimize(OptimizeArgs),
    /// Suggest guesses for a game played elsewhere
    Assist {
        #[command(flatten)]
        policy: PolicyArgs,
    },
    /// Start the HTTP assistant
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: SocketAddr,
        /// Directory with the built UI
        #[arg(long)]
        static_dir: Option<PathBuf>,
    },
}

#[derive(clap::Args, Debug)]
struct PolicyArgs {
    /// shannon, knuth, most-parts, a bundled weight name, fixed:<file|name>,
    /// staged:<file|name>, or fixed/staged together with --weights
    #[arg(long, default_value = "staged-paper")]
    policy: String,
    /// Weight file or bundled name for a bare fixed/staged policy
    #[arg(long)]
    weights: Option<String>,
    /// Always open with 1123
    #[arg(long)]
    force_opening: bool,
}

#[derive(clap::Args, Debug)]
struct OptimizeArgs {
    #[arg(long, value_enum, default_value_t = Mode::Staged)]
    mode: Mode,
    #[arg(long)]
    force_opening: bool,
    #[arg(long, default_value_t = 500)]
    generations: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10)]
    max_turns: u32,
    #[arg(long, default_value_t = 64)]
    population: usize,
    #[arg(long, default_value_t = 10)]
    elite: usize,
    #[arg(long, default_value_t = 3)]
    tournament: usize,
    #[arg(long, default_value_t = 0.5)]
    crossover_rate: f64,
    #[arg(long, default_value_t = 0.05)]
    mutation_rate: f64,
    #[arg(long, default_value_t = 0.1)]
    mutation_step: f64,
    #[arg(long, default_value_t = 250)]
    stagnation: u32,
    #[arg(long, default_value_t = optimizer::DEFAULT_UNSOLVED_PENALTY)]
    penalty: u32,
    /// Weight file or bundled name placed in the first population
    #[arg(long)]
    weights: Option<String>,
    /// Continue from a checkpoint file
    #[arg(long)]
    resume: Option<PathBuf>,
    /// Checkpoint file, rewritten as the run proceeds
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    checkpoint_every: u32,
    /// Progress CSV; standard output when absent
    #[arg(long)]
    log: Option<PathBuf>,
    /// Where to write the best weights found
    #[arg(long)]
    best: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Text,
    Csv,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Mode {
    Fixed,
    Staged,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Invariant(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvariantViolation(_) => Failure::Invariant(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type CliResult<T = ()> = Result<T, Failure>;

fn load_weights(source: &str) -> CliResult<WeightFile> {
    let path = Path::new(source);
    if path.is_file() {
        let text = fs::read_to_string(path)?;
        parse_weights(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
    } else {
        Ok(bundled_weights(source)?)
    }
}

fn resolve_policy(args: &PolicyArgs) -> CliResult<Policy> {
    let spec = args.policy.as_str();
    let policy = match (spec.split_once(':'), &args.weights) {
        (Some((mode @ ("fixed" | "staged"), source)), None) => {
            let wf = load_weights(source)?;
            check_mode(&wf, Some(mode))?;
            wf.to_policy()
        }
        (None, Some(source)) if spec == "fixed" || spec == "staged" => {
            let wf = load_weights(source)?;
            check_mode(&wf, Some(spec))?;
            wf.to_policy()
        }
        (_, Some(_)) => {
            return Err(Failure::Usage(format!(
                "--weights only applies to a bare fixed or staged policy, not `{spec}`"
            )))
        }
        (None, None) if spec == "fixed" || spec == "staged" => {
            return Err(Failure::Usage(format!("policy `{spec}` needs --weights")))
        }
        _ => named_policy(spec)?,
    };
    Ok(if args.force_opening {
        policy.with_forced_opening(P.parse_code("1123")?)
    } else {
        policy
    })
}

fn write_output(out: Option<&Path>, text: &str) -> CliResult {
    match out {
        Some(path) => fs::write(path, text)?,
        None => io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn evaluate(policy: &PolicyArgs, max_turns: u32, format: Format, out: Option<&Path>) -> CliResult {
    let policy = resolve_policy(policy)?;
    let stats = evaluate_all(FeedbackTable::standard(), &policy, max_turns)?;
    let text = match format {
        Format::Text => stats.to_text(),
        Format::Csv => stats.to_csv(),
    };
    write_output(out, &text)
}

fn tree(policy: &PolicyArgs, max_turns: u32, out: Option<&Path>) -> CliResult {
    let policy = resolve_policy(policy)?;
    let tree = build_tree(FeedbackTable::standard(), &policy, max_turns)?;
    write_output(out, &serialize_tree(&tree, &P))
}

fn optimize(args: &OptimizeArgs) -> CliResult {
    let mut config = GaConfig {
        population_size: args.population,
        elite_count: args.elite,
        tournament_size: args.tournament,
        crossover_rate: args.crossover_rate,
        mutation_rate: args.mutation_rate,
        mutation_step: args.mutation_step,
        stagnation_limit: args.stagnation,
        max_generations: args.generations,
        seed: args.seed,
        mode: match args.mode {
            Mode::Fixed => GaMode::Fixed,
            Mode::Staged => GaMode::Staged,
        },
        force_opening: args.force_opening,
        max_turns: args.max_turns,
        unsolved_penalty: args.penalty,
    };
    config.validate()?;

    let (start, population) = match &args.resume {
        Some(path) => {
            if args.weights.is_some() {
                return Err(Failure::Usage("--weights cannot be combined with --resume".into()));
            }
            let cp = parse_checkpoint(&fs::read_to_string(path)?)
                .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
            config.seed = cp.seed;
            (cp.generation, cp.population)
        }
        None => {
            let anchors = match &args.weights {
                Some(source) => vec![Genome::from_weights(&load_weights(source)?, &config)?],
                None => Vec::new(),
            };
            (0, optimizer::seed_population(&config, &anchors)?)
        }
    };

    let mut log: Box<dyn Write> = match &args.log {
        Some(path) => Box::new(io::BufWriter::new(fs::File::create(path)?)),
        None => Box::new(io::stdout().lock()),
    };
    writeln!(log, "{PROGRESS_HEADER}")?;
    let last = start.saturating_add(config.max_generations);
    let mut io_failure = None;
    let result = resume_with(&config, start, population, |record, ranked| {
        let mut step = || -> io::Result<()> {
            writeln!(log, "{}", progress_line(record))?;
            let due = record.generation % args.checkpoint_every.max(1) == 0
                || record.generation == last;
            if let (Some(path), true) = (&args.out, due) {
                fs::write(path, write_checkpoint(ranked, config.seed))?;
            }
            Ok(())
        };
        step().map_err(|e| {
            io_failure = Some(e);
            Error::InvalidConfig("output failed".into())
        })
    });
    if let Some(e) = io_failure {
        return Err(e.into());
    }
    let run = result?;
    log.flush()?;
    if let Some(path) = &args.best {
        fs::write(path, emit_weights(&run.best.to_weights(&config)?))?;
    }
    eprintln!(
        "best total {} (average {:.4}, max {})",
        run.best_fitness.total_guesses, run.best_fitness.average, run.best_fitness.maximum
    );
    Ok(())
}

fn parse_answer(line: &str) -> Option<Feedback> {
    let parts: Vec<&str> = line.split_whitespace().collect();
    match parts[..] {
        [b, c] => P.feedback(b.parse().ok()?, c.parse().ok()?).ok(),
        [one] => Feedback::parse(one, &P).ok(),
        _ => None,
    }
}

fn assist(policy: &PolicyArgs) -> CliResult {
    let mut session = Session::new(String::new(), policy.policy.clone(), resolve_policy(policy)?)?;
    let stdin = io::stdin();
    let mut input = stdin.lock();
    let mut out = io::stdout().lock();
    writeln!(out, "answer each guess with bulls and cows (e.g. `1 2` or `1B2C`), `undo`, or `quit`")?;
    loop {
        match session.status() {
            Status::Active => {}
            Status::Solved => {
                writeln!(out, "{}", session.message().unwrap_or_default())?;
                return Ok(());
            }
            Status::Contradicted => {
                writeln!(out, "{}", session.message().unwrap_or_default())?;
            }
        }
        if let Some(g) = session.suggestion() {
            writeln!(
                out,
                "turn {}: guess {} ({} codes left)",
                session.turn(),
                P.format_code(g),
                session.remaining().len()
            )?;
        }
        write!(out, "> ")?;
        out.flush()?;
        let mut line = String::new();
        if input.read_line(&mut line)? == 0 {
            writeln!(out)?;
            return Ok(());
        }
        let line = line.trim();
        match line {
            "" => continue,
            "quit" | "q" => return Ok(()),
            "undo" | "u" => {
                if !session.undo()? {
                    writeln!(out, "nothing to undo")?;
                }
            }
            _ if session.status() != Status::Active => {
                writeln!(out, "undo the last answer or quit")?;
            }
            _ => match parse_answer(line) {
                Some(fb) => session.submit(None, fb)?,
                None => writeln!(out, "not a possible answer: `{line}`")?,
            },
        }
    }
}

fn serve(addr: SocketAddr, static_dir: Option<PathBuf>) -> CliResult {
    let runtime = tokio::runtime::Runtime::new()?;
    eprintln!("listening on http://{addr}");
    let config = ServiceConfig {
        static_dir,
        ..ServiceConfig::default()
    };
    runtime.block_on(mastermind_service::serve(addr, config))?;
    Ok(())
}

fn configure_threads() -> CliResult {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = value
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Usage(format!("{THREADS_ENV} must be a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Failure::Usage(e.to_string()))
}

fn run(cli: Cli) -> CliResult {
    configure_threads()?;
    match cli.command {
        Command::Evaluate {
            policy,
            max_turns,
            format,
            out,
        } => evaluate(&policy, max_turns, format, out.as_deref()),
        Command::Tree {
            policy,
            max_turns,
            out,
        } => tree(&policy, max_turns, out.as_deref()),
        Command::Optimize(args) => optimize(&args),
        Command::Assist { policy } => assist(&policy),
        Command::Serve { addr, static_dir } => serve(addr, static_dir),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Invariant(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
