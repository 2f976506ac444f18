use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use nodalgraph::random::LengthDistribution;
use nodalgraph_cli::{run, Command, ExperimentSpec, GenSettings, StrategyChoice};

#[derive(Parser)]
#[command(name = "nodalgraph", version, about = "Spectra and nodal counts of Schrödinger operators on metric graphs")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Eigenvalues with multiplicities -> spectrum.csv
    Solve(GraphArgs),
    /// Nodal counts per index -> nodal.csv, ratios.svg
    Nodal(GraphArgs),
    /// Accumulation points of nu_n / n -> accumulation.csv
    Accumulate(GraphArgs),
    /// Interlacing, nodal and first-eigenvalue bounds -> verify.csv
    Verify(GraphArgs),
    /// p-Laplacian Dirichlet-Neumann brackets -> brackets.csv
    Plap(GraphArgs),
    /// Seeded random connected graph -> random-<seed>.graph
    Gen(GenArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Default,
    Supportmax,
    Supportmin,
    Table,
}

#[derive(Args)]
struct GraphArgs {
    graph: PathBuf,
    #[arg(long = "N", default_value_t = 100)]
    n: usize,
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    /// Basis table for degenerate eigenspaces; implies `--strategy table`.
    #[arg(long)]
    basis: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "default")]
    strategy: StrategyArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Exit with status 1 when verify.csv has failing rows.
    #[arg(long)]
    strict: bool,
    #[arg(long)]
    scan_step: Option<f64>,
    #[arg(long)]
    rank_tol: Option<f64>,
    #[arg(long)]
    no_plot: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum LengthsArg {
    Uniform,
    Rational,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 5)]
    edges: usize,
    #[arg(long, value_enum, default_value = "uniform")]
    lengths: LengthsArg,
    /// Base length for rational lengths.
    #[arg(long, default_value_t = 1.0)]
    base: f64,
    #[arg(long, default_value_t = 8)]
    max_multiplier: u32,
    /// Fixed multipliers, cycled over the edges (rational mode), e.g. `1,2,4`.
    #[arg(long, value_delimiter = ',')]
    multipliers: Vec<u32>,
    /// Constant potential on every edge.
    #[arg(long, default_value_t = 0.0)]
    q: f64,
    /// Delta strength at every inner vertex.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    delta: f64,
    #[arg(long)]
    dirichlet_leaves: bool,
    /// No loops or parallel edges.
    #[arg(long)]
    simple: bool,
    #[arg(long)]
    vertices: Option<usize>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

fn graph_spec(command: Command, a: GraphArgs) -> (ExperimentSpec, bool) {
    let mut spec = ExperimentSpec::new(command, Some(a.graph), a.out);
    spec.n = a.n;
    spec.p = a.p;
    spec.basis = a.basis;
    spec.strategy = match a.strategy {
        StrategyArg::Default => StrategyChoice::Default,
        StrategyArg::Supportmax => StrategyChoice::SupportMax,
        StrategyArg::Supportmin => StrategyChoice::SupportMin,
        StrategyArg::Table => StrategyChoice::Table,
    };
    spec.seed = a.seed;
    spec.scan_step = a.scan_step;
    spec.rank_tol = a.rank_tol;
    spec.no_plot = a.no_plot;
    (spec, a.strict)
}

fn gen_spec(a: GenArgs) -> ExperimentSpec {
    let mut spec = ExperimentSpec::new(Command::Gen, None, a.out);
    spec.seed = a.seed;
    let lengths = match a.lengths {
        LengthsArg::Uniform => LengthDistribution::Uniform,
        LengthsArg::Rational if !a.multipliers.is_empty() => LengthDistribution::Multipliers {
            base: a.base,
            multipliers: a.multipliers,
        },
        LengthsArg::Rational => LengthDistribution::Rational {
            base: a.base,
            max_multiplier: a.max_multiplier,
        },
    };
    spec.gen = GenSettings {
        edges: a.edges,
        lengths,
        potential: a.q,
        delta: a.delta,
        dirichlet_leaves: a.dirichlet_leaves,
        simple: a.simple,
        vertices: a.vertices,
    };
    spec
}

fn configure_threads() {
    if let Ok(v) = std::env::var("NODALGRAPH_THREADS") {
        match v.parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => eprintln!("warning: ignoring NODALGRAPH_THREADS={v}"),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_threads();
    let (spec, strict) = match cli.command {
        Cmd::Solve(a) => graph_spec(Command::Solve, a),
        Cmd::Nodal(a) => graph_spec(Command::Nodal, a),
        Cmd::Accumulate(a) => graph_spec(Command::Accumulate, a),
        Cmd::Verify(a) => graph_spec(Command::Verify, a),
        Cmd::Plap(a) => graph_spec(Command::Plap, a),
        Cmd::Gen(a) => (gen_spec(a), false),
    };
    match run(&spec) {
        Ok(summary) => {
            for m in &summary.messages {
                println!("{m}");
            }
            for f in &summary.files {
                println!("wrote {}", f.display());
            }
            if strict && summary.failed_checks > 0 {
                eprintln!("{} checks failed", summary.failed_checks);
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
