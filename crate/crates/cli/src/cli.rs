//! Argument parsing and the four subcommands.

use crate::bundle::{run_suite, write_outputs};
use crate::checks::{run_check, Context};
use crate::config::{Check, ExperimentConfig, Generator, GraphSpec, RieszParams, StrategyName};
use crate::error::CliError;
use crate::json::to_canonical;
use clap::{Args, Parser, Subcommand, ValueEnum};
use graphcalc_core::czd::{cz_decompose, CZDecomposition};
use graphcalc_core::graph::{graph_to_json, read_graph};
use graphcalc_core::operators::vertex_function_from_csv;
use graphcalc_core::rng::derive_seed;
use serde_json::json;
use std::path::{Path, PathBuf};

const CHECK_HELP: &str = "\
Runs a suite of checks and writes report.json, report.csv and timings.json.

TARGET is a JSON config file or a comma-separated list of check names. With a list,
--graph is required and every check runs with default parameters.

Check names: D, DELTA_ALPHA, DUE, UE, LUE, TIMEDERIV, P2, PQ, GP, RP, RRP, DUALITY,
GFUNC, CZ, KFUNC, RH, PI, GAFFNEY, COEFF_ESTIM, COEFF_ALPHA, WALLIS, SPECTRUM.

report.csv columns:
  schema  report schema version (graphcalc-report/1)
  check   check name
  series  row series; constants appear as constant/<name>
  x       grid coordinate, %.12e; empty for constants
  y       value, %.12e; empty or null when not finite

Exit codes: 0 success, 2 usage, 3 a check raised, 4 I/O.";

#[derive(Debug, Parser)]
#[command(name = "graphcalc", version, about = "Functional inequalities on finite weighted graphs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Writes a generated graph as JSON.
    Gen(GenArgs),
    #[command(long_about = CHECK_HELP)]
    /// Runs a check suite.
    Check(CheckArgs),
    /// Calderón–Zygmund decomposition of a function read from CSV.
    Czd(CzdArgs),
    /// Riesz or reverse Riesz constant of a graph.
    Riesz(RieszArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[command(subcommand)]
    pub kind: GenKind,
    /// Output file; stdout when absent.
    #[arg(short, long, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum GenKind {
    Grid {
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long)]
        side: usize,
        #[arg(long, default_value_t = 1.0)]
        laziness: f64,
    },
    Dumbbell {
        #[arg(long)]
        side: usize,
    },
    Cycle {
        #[arg(long)]
        n: usize,
        #[arg(long = "self", default_value_t = 1.0)]
        self_weight: f64,
    },
    Tree {
        #[arg(long, default_value_t = 2)]
        branching: usize,
        #[arg(long)]
        depth: usize,
    },
}

impl GenKind {
    fn generator(&self) -> Generator {
        match *self {
            GenKind::Grid { dim, side, laziness } => Generator::Grid { dim, side, laziness },
            GenKind::Dumbbell { side } => Generator::Dumbbell { side },
            GenKind::Cycle { n, self_weight } => Generator::Cycle { n, self_weight },
            GenKind::Tree { branching, depth } => Generator::Tree { branching, depth },
        }
    }
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    /// Config file, or comma-separated check names.
    pub target: String,
    /// Graph file; overrides the config's graph.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    /// Master seed; overrides the config's seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory; overrides the config's output. Without one the bundle goes to stdout.
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CzdArgs {
    #[arg(long)]
    pub graph: PathBuf,
    /// CSV of `index,value` rows.
    #[arg(long)]
    pub function: PathBuf,
    #[arg(long)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    pub q: f64,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum StrategyArg {
    Exact,
    Ascent,
    Sample,
}

#[derive(Debug, Args)]
pub struct RieszArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    #[arg(long, value_enum)]
    pub strategy: Option<StrategyArg>,
    /// Estimate the reverse inequality instead.
    #[arg(long)]
    pub reverse: bool,
    #[arg(long, default_value_t = 20)]
    pub restarts: usize,
    #[arg(long, default_value_t = 300)]
    pub steps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

fn emit(output: Option<&Path>, text: &str) -> Result<(), CliError> {
    match output {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn cmd_gen(args: &GenArgs) -> Result<(), CliError> {
    let g = args.kind.generator().build().map_err(|e| CliError::Usage(e.to_string()))?;
    emit(args.output.as_deref(), &(graph_to_json(&g) + "\n"))
}

/// Builds the effective config: a file, or a list of names with default parameters.
pub fn resolve_config(args: &CheckArgs) -> Result<(ExperimentConfig, PathBuf), CliError> {
    let path = Path::new(&args.target);
    let (mut cfg, base) = if path.is_file() {
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        (ExperimentConfig::read(path)?, base)
    } else {
        let graph = args.graph.clone().ok_or_else(|| {
            CliError::Usage(format!("`{}` is not a file; --graph is required with check names", args.target))
        })?;
        let suite = args.target.split(',').map(Check::default_for).collect::<Result<Vec<_>, _>>()?;
        let cfg = ExperimentConfig {
            graph: GraphSpec::File { file: graph },
            suite,
            seed: 0,
            output: None,
            tolerances: Default::default(),
        };
        (cfg, PathBuf::new())
    };
    if let Some(g) = &args.graph {
        cfg.graph = GraphSpec::File { file: g.clone() };
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(o) = &args.out {
        cfg.output = Some(o.clone());
    }
    Ok((cfg, base))
}

/// Runs the suite and writes outputs. Returns the number of checks that raised.
pub fn cmd_check(args: &CheckArgs) -> Result<usize, CliError> {
    let (cfg, base) = resolve_config(args)?;
    let graph = cfg.graph.load(&base)?;
    let (bundle, timings) = run_suite(&cfg, &graph)?;
    match &cfg.output {
        Some(dir) => {
            let dir = if dir.is_absolute() || args.out.is_some() { dir.clone() } else { base.join(dir) };
            write_outputs(&dir, &bundle, &timings)?;
        }
        None => print!("{}", bundle.to_json()),
    }
    Ok(bundle.failed())
}

/// Plain JSON view of a decomposition.
pub fn decomposition_json(dec: &CZDecomposition) -> serde_json::Value {
    let omega: Vec<usize> = dec.omega.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i).collect();
    let bad: Vec<_> = dec
        .bad
        .iter()
        .map(
            |b| json!({"ball": b.ball, "mean": b.mean, "members": dec.cover.balls[b.ball].members, "values": b.values}),
        )
        .collect();
    let groups: serde_json::Map<String, serde_json::Value> =
        dec.groups.iter().map(|(j, v)| (j.to_string(), json!(v))).collect();
    json!({
        "alpha": dec.alpha,
        "q": dec.q,
        "omega": omega,
        "trivial": omega.is_empty(),
        "cover": dec.cover,
        "good": dec.good,
        "bad": bad,
        "groups": groups,
    })
}

pub fn cmd_czd(args: &CzdArgs) -> Result<(), CliError> {
    let g = read_graph(&args.graph).map_err(CliError::from_core_io)?;
    let text = std::fs::read_to_string(&args.function)
        .map_err(|e| CliError::Io(format!("{}: {e}", args.function.display())))?;
    let f = vertex_function_from_csv(&g, &text).map_err(CliError::from_core_io)?;
    let dec = cz_decompose(&g, &f, args.alpha, args.q).map_err(|e| CliError::Check(e.to_string()))?;
    emit(args.output.as_deref(), &to_canonical(&decomposition_json(&dec)))
}

pub fn cmd_riesz(args: &RieszArgs) -> Result<(), CliError> {
    let g = read_graph(&args.graph).map_err(CliError::from_core_io)?;
    let strategy = args.strategy.map(|s| match s {
        StrategyArg::Exact => StrategyName::Exact,
        StrategyArg::Ascent => StrategyName::Ascent,
        StrategyArg::Sample => StrategyName::Sample,
    });
    let params = RieszParams { p: args.p, strategy, restarts: args.restarts, steps: args.steps };
    let check = if args.reverse { Check::Rrp(params) } else { Check::Rp(params) };
    let cfg = ExperimentConfig {
        graph: GraphSpec::File { file: args.graph.clone() },
        suite: vec![check.clone()],
        seed: args.seed,
        output: None,
        tolerances: Default::default(),
    };
    let ctx = Context::new(&g);
    let report = run_check(&ctx, &cfg, &check, derive_seed(args.seed, check.name())).map_err(|e| match e {
        graphcalc_core::Error::StrategyUnsupported(m) => CliError::Usage(m),
        other => CliError::Check(other.to_string()),
    })?;
    emit(None, &to_canonical(&serde_json::to_value(&report).expect("report serializes")))
}

/// Dispatches parsed arguments and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let result = match &cli.command {
        Command::Gen(a) => cmd_gen(a).map(|_| 0),
        Command::Check(a) => cmd_check(a).map(|failed| if failed > 0 { 3 } else { 0 }),
        Command::Czd(a) => cmd_czd(a).map(|_| 0),
        Command::Riesz(a) => cmd_riesz(a).map(|_| 0),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("graphcalc: {e}");
            e.exit_code()
        }
    }
}
