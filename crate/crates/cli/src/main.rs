use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use netid::circular::{circular_identifiable, detect_circle, verify_recovery};
use netid::conditions::{remove_dependent_edges, AnalysisOptions, Verdict};
use netid::structure::bipartite_graph;
use netid::{analyze, Error, NetworkModel};

const EXIT_NEGATIVE: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_NUMERIC: u8 = 3;

/// Identifiability analysis for partially excited, partially measured
/// dynamic networks.
#[derive(Parser, Debug)]
#[command(name = "netid", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run every necessary condition and print the report.
    Analyze {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        numeric: Numeric,
        /// Largest subset size searched when eliminating dependencies (>= 2).
        #[arg(long, value_parser = parse_subset)]
        max_subset: Option<usize>,
    },
    /// Exact verdict for a network that is a single directed cycle.
    Circular {
        #[command(flatten)]
        common: Common,
        /// Also instantiate the cycle, recover its modules and report the error.
        #[arg(long)]
        recover: bool,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Export the excited-to-measured bipartite graph in DOT format.
    Bipartite {
        input: PathBuf,
        /// Write to this file instead of standard output.
        #[arg(long)]
        dot: Option<PathBuf>,
        /// Draw edges dropped by the edge-removal procedure as dashed lines.
        #[arg(long)]
        with_removals: bool,
        #[arg(long, value_parser = parse_subset)]
        max_subset: Option<usize>,
    },
}

#[derive(Args, Debug)]
struct Common {
    /// Topology file: {"vertices", "edges", "excited", "measured"}.
    input: PathBuf,
    /// Print JSON instead of text.
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug)]
struct Numeric {
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u32).range(1..))]
    trials: u32,
    #[arg(long, default_value_t = 1e-8, value_parser = parse_tolerance)]
    tol: f64,
}

fn parse_subset(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(k) if k >= 2 => Ok(k),
        Ok(_) => Err("must be at least 2".into()),
        Err(e) => Err(e.to_string()),
    }
}

fn parse_tolerance(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(t) if t > 0.0 && t.is_finite() => Ok(t),
        Ok(_) => Err("must be a positive number".into()),
        Err(e) => Err(e.to_string()),
    }
}

fn load(path: &Path) -> Result<NetworkModel, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    NetworkModel::parse(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn error_code(e: &Error) -> u8 {
    match e {
        Error::IllConditioned { .. }
        | Error::RankMismatch { .. }
        | Error::DegenerateInstance(_) => EXIT_NUMERIC,
        _ => EXIT_USAGE,
    }
}

fn fail(code: u8, message: impl std::fmt::Display) -> ExitCode {
    eprintln!("netid: {message}");
    ExitCode::from(code)
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("serializable")
}

fn cmd_analyze(common: Common, numeric: Numeric, max_subset: Option<usize>) -> ExitCode {
    let model = match load(&common.input) {
        Ok(m) => m,
        Err(e) => return fail(EXIT_USAGE, e),
    };
    let opts = AnalysisOptions {
        seed: numeric.seed,
        trials: numeric.trials as usize,
        tolerance: numeric.tol,
        max_subset,
        ..Default::default()
    };
    let report = match analyze(&model, &opts) {
        Ok(r) => r,
        Err(e) => return fail(error_code(&e), e),
    };
    if common.json {
        println!("{}", report.to_json());
    } else {
        println!("{report}");
    }
    match report.verdict {
        Verdict::NoNecessaryConditionViolated => ExitCode::SUCCESS,
        Verdict::NotIdentifiable => ExitCode::from(EXIT_NEGATIVE),
    }
}

#[derive(serde::Serialize)]
struct CircularOutput {
    verdict: netid::circular::CircularVerdict,
    recovery: Option<netid::circular::RecoveryCheck>,
}

fn cmd_circular(common: Common, recover: bool, seed: u64) -> ExitCode {
    let model = match load(&common.input) {
        Ok(m) => m,
        Err(e) => return fail(EXIT_USAGE, e),
    };
    let ring = match detect_circle(&model) {
        Ok(d) => d,
        Err(e) => return fail(EXIT_USAGE, e),
    };
    let verdict = circular_identifiable(&ring);
    let recovery = if recover && verdict.identifiable {
        match verify_recovery(&ring, seed) {
            Ok(check) => Some(check),
            Err(Error::RecoveryPrecondition) => None,
            Err(e) => return fail(error_code(&e), e),
        }
    } else {
        None
    };
    if recover && recovery.is_none() {
        eprintln!("netid: recovery skipped; it needs two disjoint excited-to-measured paths");
    }
    let identifiable = verdict.identifiable;
    let out = CircularOutput { verdict, recovery };
    if common.json {
        println!("{}", to_json(&out));
    } else {
        println!("{}", netid::conditions::describe_circular(&out.verdict));
        if let Some(check) = &out.recovery {
            println!("seed {}: phi = {:.12}", check.seed, check.recovery.phi);
            for r in &check.recovery.modules {
                println!("  G[{}][{}] = {:.12}", r.to, r.from, r.value);
            }
            println!("max relative error {:.3e}", check.max_relative_error);
        }
    }
    if identifiable {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_NEGATIVE)
    }
}

fn cmd_bipartite(
    input: PathBuf,
    dot: Option<PathBuf>,
    with_removals: bool,
    max_subset: Option<usize>,
) -> ExitCode {
    let model = match load(&input) {
        Ok(m) => m,
        Err(e) => return fail(EXIT_USAGE, e),
    };
    let graph = bipartite_graph(&model);
    let dashed = if with_removals {
        match remove_dependent_edges(&model, &graph, max_subset, Default::default()) {
            Ok(out) => out.log.into_iter().map(|s| s.removed).collect(),
            Err(e) => return fail(error_code(&e), e),
        }
    } else {
        Vec::new()
    };
    let text = graph.to_dot(&dashed);
    match dot {
        Some(path) => {
            if let Err(e) = fs::write(&path, text) {
                return fail(EXIT_USAGE, format!("{}: {e}", path.display()));
            }
        }
        None => print!("{text}"),
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match cli.command {
        Command::Analyze {
            common,
            numeric,
            max_subset,
        } => cmd_analyze(common, numeric, max_subset),
        Command::Circular {
            common,
            recover,
            seed,
        } => cmd_circular(common, recover, seed),
        Command::Bipartite {
            input,
            dot,
            with_removals,
            max_subset,
        } => cmd_bipartite(input, dot, with_removals, max_subset),
    }
}
