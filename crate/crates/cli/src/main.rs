//! `stcheck`: subtyping, equality, LTS and product-graph export, subterm
//! listings and benchmarks over session types read from files.
//!
//! Exit codes: 0 for a positive verdict or success, 1 for a negative
//! verdict, 2 for any input or I/O error.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};
use stcheck_core::bench::{self, BenchConfig};
use stcheck_core::{
    build_lts, export_product_dot, parse, sub_bottom_up, sub_top_down, subtype, Algorithm, Limits,
    SessionType, SubtypeReport,
};

const TIMEOUT_ENV: &str = "STCHECK_TIMEOUT_MS";

#[derive(Parser)]
#[command(name = "stcheck", version, about = "Decide subtyping between binary session types")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exit 0 if LEFT is a subtype of RIGHT, 1 if not.
    Check {
        left: PathBuf,
        right: PathBuf,
        #[arg(long, value_enum, default_value_t = Algo::Product)]
        algo: Algo,
        /// Print counters as key=value lines on standard error.
        #[arg(long)]
        stats: bool,
    },
    /// Exit 0 if each type is a subtype of the other, 1 if not.
    Equal {
        left: PathBuf,
        right: PathBuf,
        #[arg(long, value_enum, default_value_t = Algo::Product)]
        algo: Algo,
        #[arg(long)]
        stats: bool,
    },
    /// Print the type LTS reachable from FILE as DOT.
    Lts {
        file: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Print the product graph of (LEFT, RIGHT) as DOT, whatever the verdict.
    Graph {
        left: PathBuf,
        right: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// List the subterms of FILE, one per line.
    Subterms {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Flavor::Td)]
        flavor: Flavor,
    },
    /// Run the benchmark families and emit CSV.
    ///
    /// The per-run timeout defaults to 10 s and can be overridden in
    /// milliseconds through STCHECK_TIMEOUT_MS.
    Bench {
        /// Family to run; repeat for several.
        #[arg(long, value_enum, default_values_t = [Family::Exp, Family::Random])]
        family: Vec<Family>,
        #[arg(long, default_value_t = 1)]
        kmin: usize,
        #[arg(long, default_value_t = bench::DEFAULT_KMAX_INDUCTIVE)]
        kmax: usize,
        /// Algorithm to run; repeat for several. Defaults to all four.
        #[arg(long, value_enum)]
        algo: Vec<Algo>,
        /// Write CSV here instead of standard output.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Run one series at a time, for cleaner timings.
        #[arg(long)]
        sequential: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Algo {
    Inductive,
    Memoized,
    Product,
    Allpairs,
}

impl From<Algo> for Algorithm {
    fn from(a: Algo) -> Self {
        match a {
            Algo::Inductive => Algorithm::Inductive,
            Algo::Memoized => Algorithm::Memoized,
            Algo::Product => Algorithm::Product,
            Algo::Allpairs => Algorithm::AllPairs,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Flavor {
    /// Top-down: closed under children and one-step unfolding.
    Td,
    /// Bottom-up: structural, with rec bodies instantiated.
    Bu,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Family {
    Exp,
    Random,
}

impl Family {
    fn name(self) -> &'static str {
        match self {
            Family::Exp => "exp",
            Family::Random => "random",
        }
    }
}

/// Everything that ends in exit code 2.
struct InputError(String);

impl<E: std::fmt::Display> From<E> for InputError {
    fn from(e: E) -> Self {
        InputError(e.to_string())
    }
}

enum Outcome {
    Holds,
    Fails,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(Outcome::Holds) => ExitCode::SUCCESS,
        Ok(Outcome::Fails) => ExitCode::from(1),
        Err(InputError(msg)) => {
            eprintln!("stcheck: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<Outcome, InputError> {
    match command {
        Command::Check { left, right, algo, stats } => {
            let (t, u) = (load(&left)?, load(&right)?);
            let report = decide(&t, &u, algo.into(), stats)?;
            println!("{}", report.verdict);
            Ok(verdict(report.verdict))
        }
        Command::Equal { left, right, algo, stats } => {
            let (t, u) = (load(&left)?, load(&right)?);
            let forward = decide(&t, &u, algo.into(), stats)?.verdict;
            let equal = forward && decide(&u, &t, algo.into(), stats)?.verdict;
            println!("{equal}");
            Ok(verdict(equal))
        }
        Command::Lts { file, out } => {
            let lts = build_lts(&load(&file)?)?;
            emit(out.as_deref(), &lts.to_dot())?;
            Ok(Outcome::Holds)
        }
        Command::Graph { left, right, out } => {
            let dot = export_product_dot(&load(&left)?, &load(&right)?)?;
            emit(out.as_deref(), &dot)?;
            Ok(Outcome::Holds)
        }
        Command::Subterms { file, flavor } => {
            let t = load(&file)?;
            let set = match flavor {
                Flavor::Td => sub_top_down(&t),
                Flavor::Bu => sub_bottom_up(&t),
            };
            let mut listing = String::new();
            for s in set.rendered() {
                listing.push_str(s);
                listing.push('\n');
            }
            emit(None, &listing)?;
            Ok(Outcome::Holds)
        }
        Command::Bench { family, kmin, kmax, algo, csv, sequential } => {
            let families: Vec<&str> = family.iter().map(|f| f.name()).collect();
            let algorithms: Vec<Algorithm> = if algo.is_empty() {
                Algorithm::ALL.to_vec()
            } else {
                algo.into_iter().map(Algorithm::from).collect()
            };
            let config = BenchConfig { timeout: bench_timeout()?, parallel: !sequential };
            let records = bench::run_bench(&families, kmin..=kmax, &algorithms, &config)?;
            match &csv {
                Some(path) => {
                    let file = fs::File::create(path).map_err(|e| format!("{}: {e}", path.display()))?;
                    bench::write_csv(&records, io::BufWriter::new(file))?;
                }
                None => bench::write_csv(&records, io::stdout().lock())?,
            }
            let timed_out = records.iter().filter(|r| r.timed_out).count();
            if timed_out > 0 {
                eprintln!("stcheck: {timed_out} of {} runs timed out", records.len());
            }
            let clashes = bench::disagreements(&records);
            for (family, k) in &clashes {
                eprintln!("stcheck: algorithms disagree on {family} k={k}");
            }
            Ok(if clashes.is_empty() { Outcome::Holds } else { Outcome::Fails })
        }
    }
}

fn verdict(holds: bool) -> Outcome {
    if holds {
        Outcome::Holds
    } else {
        Outcome::Fails
    }
}

fn load(path: &Path) -> Result<SessionType, InputError> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse(&text).map_err(|e| InputError(format!("{}:{e}", path.display())))
}

fn decide(
    t: &SessionType,
    u: &SessionType,
    algo: Algorithm,
    stats: bool,
) -> Result<SubtypeReport, InputError> {
    let report = subtype(t, u, algo, &Limits::none())?;
    if stats {
        let mut err = io::stderr().lock();
        writeln!(err, "algorithm={}", report.algorithm)?;
        writeln!(err, "verdict={}", report.verdict)?;
        for (key, value) in report.counters.iter() {
            writeln!(err, "{key}={value}")?;
        }
        writeln!(err, "elapsed_ns={}", report.elapsed.as_nanos())?;
    }
    Ok(report)
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), InputError> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| InputError(format!("{}: {e}", path.display()))),
        None => Ok(io::stdout().lock().write_all(text.as_bytes())?),
    }
}

fn bench_timeout() -> Result<Duration, InputError> {
    match std::env::var(TIMEOUT_ENV) {
        Ok(ms) => ms.trim().parse::<u64>().map(Duration::from_millis).map_err(|_| {
            InputError(format!("{TIMEOUT_ENV} must be a whole number of milliseconds, got `{ms}`"))
        }),
        Err(_) => Ok(bench::DEFAULT_TIMEOUT),
    }
}
