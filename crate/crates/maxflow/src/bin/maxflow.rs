//! Command-line front end: solve DIMACS max-flow instances, verify solution
//! files, generate test instances, and benchmark the solvers over a corpus.
//!
//! Exit status: 0 on success, 1 when a solution fails verification, 2 on any
//! input or usage error.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use maxflow::counters::Counters;
use maxflow::dimacs::{
    parse_instance, parse_solution, solution_to_slots, write_instance, write_solution,
};
use maxflow::enhanced::{self, EnhancedOptions, Gamma2Mode};
use maxflow::gen::{layered_instance, random_instance, two_path_instance};
use maxflow::network::{Instance, Network};
use maxflow::oracle::verify_flow;
use maxflow::{generic, lmes};

#[derive(Parser)]
#[command(name = "maxflow", version, about = "Max-flow solvers with exact verification")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve an instance and print the solution to stdout.
    Solve(SolveArgs),
    /// Check a solution file against an instance.
    Verify {
        /// DIMACS instance file.
        input: PathBuf,
        /// Solution file as written by `solve`.
        solution: PathBuf,
    },
    /// Generate an instance file.
    Gen {
        #[command(subcommand)]
        family: GenCmd,
    },
    /// Solve every instance in a directory with each algorithm, write a CSV.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Algo {
    Generic,
    Lmes,
    Enhanced,
}

impl Algo {
    fn name(self) -> &'static str {
        match self {
            Algo::Generic => "generic",
            Algo::Lmes => "lmes",
            Algo::Enhanced => "enhanced",
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Gamma2Arg {
    Scaled,
    Inverse,
}

#[derive(Parser)]
struct SolveArgs {
    /// Algorithm to run.
    #[arg(long, value_enum)]
    algo: Algo,
    /// Scale factor, a power of two. Defaults per algorithm; unused by generic.
    #[arg(long)]
    k: Option<u64>,
    /// Run the full invariant audits while solving (slow).
    #[arg(long)]
    audit: bool,
    /// Write the counter report to this file as well as stderr.
    #[arg(long)]
    counters: Option<PathBuf>,
    /// Enhanced only: never jump scales, divide by k every phase (diagnostic).
    #[arg(long)]
    no_jump: bool,
    /// Enhanced only: how the deficit term of the next scale is formed.
    #[arg(long, value_enum, default_value = "scaled")]
    gamma2: Gamma2Arg,
    /// DIMACS instance file.
    input: PathBuf,
}

#[derive(Subcommand)]
enum GenCmd {
    /// Uniform random digraph, s = first node, t = last.
    Random {
        #[arg(long)]
        nodes: usize,
        #[arg(long)]
        arcs: usize,
        #[arg(long, default_value_t = 1024)]
        max_cap: u128,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output path; stdout when absent.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Two parallel s-t paths, one of capacity k^alpha and one of capacity 1.
    Pathological {
        #[arg(long, default_value_t = 4)]
        k: u64,
        #[arg(long)]
        alpha: u32,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Layers of equal width between the terminals.
    Layered {
        #[arg(long)]
        width: usize,
        #[arg(long)]
        depth: usize,
        #[arg(long, default_value_t = 1024)]
        max_cap: u128,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

#[derive(Parser)]
struct BenchArgs {
    /// Algorithms to run, comma separated.
    #[arg(long, value_enum, value_delimiter = ',', required = true)]
    algos: Vec<Algo>,
    /// Directory of DIMACS instances (.max or .dimacs).
    #[arg(long)]
    corpus: PathBuf,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
}

/// Input and usage problems exit 2; failed verification exits 1.
enum CliError {
    Input(String),
    Verify(String),
}

fn input_err<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Input(e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Verify(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.cmd {
        Cmd::Solve(args) => cmd_solve(args),
        Cmd::Verify { input, solution } => cmd_verify(&input, &solution),
        Cmd::Gen { family } => cmd_gen(family),
        Cmd::Bench(args) => cmd_bench(args),
    }
}

fn load_network(path: &PathBuf) -> Result<Network, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let inst = parse_instance(&text)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    inst.build()
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn check_k(k: u64) -> Result<u64, CliError> {
    if k >= 2 && k.is_power_of_two() {
        Ok(k)
    } else {
        Err(CliError::Input(format!("k must be a power of two >= 2, got {k}")))
    }
}

/// Runs one algorithm and returns (value, slot flows, counters).
fn run_algo(
    net: &Network,
    algo: Algo,
    k: Option<u64>,
    audit: bool,
    no_jump: bool,
    gamma2: Gamma2Mode,
) -> Result<(i128, Vec<i128>, Counters), CliError> {
    match algo {
        Algo::Generic => {
            let sol = generic::solve(net, audit);
            Ok((sol.value, sol.flow, sol.counters))
        }
        Algo::Lmes => {
            let k = check_k(k.unwrap_or_else(|| lmes::default_k(net.max_input_cap)))?;
            let sol = lmes::solve(net, k, audit);
            Ok((sol.value, sol.flow, sol.counters))
        }
        Algo::Enhanced => {
            let k = check_k(
                k.unwrap_or_else(|| enhanced::default_k(net.n, net.input_arc_count())),
            )?;
            let opts = EnhancedOptions {
                audit,
                disable_jump: no_jump,
                gamma2,
            };
            let sol = enhanced::solve(net, k, &opts).map_err(CliError::Input)?;
            Ok((sol.value, sol.flow, sol.counters))
        }
    }
}

fn cmd_solve(args: SolveArgs) -> Result<(), CliError> {
    let net = load_network(&args.input)?;
    let gamma2 = match args.gamma2 {
        Gamma2Arg::Scaled => Gamma2Mode::Scaled,
        Gamma2Arg::Inverse => Gamma2Mode::Inverse,
    };
    let (value, flow, counters) =
        run_algo(&net, args.algo, args.k, args.audit, args.no_jump, gamma2)?;
    verify_flow(&net, &flow).map_err(|r| CliError::Verify(r.to_string()))?;
    print!("{}", write_solution(&net, value, &flow));
    let report = counters.report();
    eprint!("{report}");
    if let Some(path) = args.counters {
        fs::write(&path, report).map_err(input_err)?;
    }
    Ok(())
}

fn cmd_verify(input: &PathBuf, solution: &PathBuf) -> Result<(), CliError> {
    let net = load_network(input)?;
    let text = fs::read_to_string(solution)
        .map_err(|e| CliError::Input(format!("{}: {e}", solution.display())))?;
    let parsed = parse_solution(&text)
        .map_err(|e| CliError::Input(format!("{}: {e}", solution.display())))?;
    let flow = solution_to_slots(&net, &parsed).map_err(CliError::Verify)?;
    let value = verify_flow(&net, &flow).map_err(|r| CliError::Verify(r.to_string()))?;
    if value != parsed.value {
        return Err(CliError::Verify(format!(
            "declared value {} but the flow delivers {value}",
            parsed.value
        )));
    }
    println!("ok {value}");
    Ok(())
}

fn emit(inst: &Instance, out: Option<PathBuf>) -> Result<(), CliError> {
    let text = write_instance(inst);
    match out {
        Some(path) => fs::write(&path, text).map_err(input_err),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_gen(family: GenCmd) -> Result<(), CliError> {
    match family {
        GenCmd::Random { nodes, arcs, max_cap, seed, out } => {
            if nodes < 2 || max_cap < 1 {
                return Err(CliError::Input("need nodes >= 2 and max-cap >= 1".into()));
            }
            if arcs > nodes * (nodes - 1) {
                return Err(CliError::Input(format!(
                    "{arcs} arcs do not fit {nodes} nodes without self-loops"
                )));
            }
            emit(&random_instance(nodes, arcs, max_cap, seed), out)
        }
        GenCmd::Pathological { k, alpha, out } => {
            check_k(k)?;
            if (k as u128).checked_pow(alpha).is_none_or(|u| u > 1 << 100) {
                return Err(CliError::Input(format!("k^alpha = {k}^{alpha} is too large")));
            }
            emit(&two_path_instance(k, alpha), out)
        }
        GenCmd::Layered { width, depth, max_cap, seed, out } => {
            if width < 1 || depth < 1 || max_cap < 1 {
                return Err(CliError::Input(
                    "need width >= 1, depth >= 1, max-cap >= 1".into(),
                ));
            }
            emit(&layered_instance(width, depth, max_cap, seed), out)
        }
    }
}

fn cmd_bench(args: BenchArgs) -> Result<(), CliError> {
    let mut paths: Vec<PathBuf> = fs::read_dir(&args.corpus)
        .map_err(|e| CliError::Input(format!("{}: {e}", args.corpus.display())))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| {
            matches!(
                p.extension().and_then(|x| x.to_str()),
                Some("max") | Some("dimacs")
            )
        })
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(CliError::Input(format!(
            "no .max or .dimacs files in {}",
            args.corpus.display()
        )));
    }
    let mut csv = String::from(
        "instance,algorithm,value,phases,pushes_saturating,pushes_large,\
         pushes_medium,pushes_other,pushes_total,relabels,contractions\n",
    );
    for path in &paths {
        let net = load_network(path)?;
        let name = path
            .file_stem()
            .and_then(|x| x.to_str())
            .unwrap_or("instance");
        for &algo in &args.algos {
            let (value, flow, c) =
                run_algo(&net, algo, None, false, false, Gamma2Mode::Scaled)?;
            verify_flow(&net, &flow).map_err(|r| {
                CliError::Verify(format!("{name}/{}: {r}", algo.name()))
            })?;
            writeln!(
                csv,
                "{name},{},{value},{},{},{},{},{},{},{},{}",
                algo.name(),
                c.phases,
                c.pushes_saturating,
                c.pushes_large,
                c.pushes_medium,
                c.pushes_other,
                c.total_pushes(),
                c.relabels,
                c.contractions
            )
            .unwrap();
        }
    }
    fs::write(&args.out, csv).map_err(input_err)?;
    Ok(())
}
