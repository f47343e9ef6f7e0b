//! Command-line front end: `solve` runs a pipeline on an instance file,
//! `gen` writes instance files for the built-in families, `bench` runs
//! seeded batches with optional oracle comparison.
//!
//! Exit codes: 0 success, 2 parse/usage error, 3 infeasible configuration,
//! 4 internal assertion failure.

use clap::{Args, Parser, Subcommand};
use num_traits::Zero;
use serde_json::{json, Value};
use std::path::PathBuf;
use std::time::Instant;

use sum_radii::instance::{instance_digest, parse_instance, write_instance, MetricInstance, Pair};
use sum_radii::oracle::{
    brute_force_opt, diameter_cost, random_instance, tight_instance, BenchReport, BenchRow,
};
use sum_radii::pipeline::{solve, Mode, SolveConfig, SolveReport};
use sum_radii::rat::{format_rat, Rat};
use sum_radii::rounding::OutlierAssembly;
use sum_radii::{Error, Result};

#[derive(Parser)]
#[command(name = "sum-radii", version, about = "Minimum sum of radii clustering solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve an instance file and emit a solution report.
    Solve(SolveArgs),
    /// Generate an instance file for a built-in family.
    Gen(GenArgs),
    /// Run a batch of instances and emit a benchmark report.
    Bench(BenchArgs),
}

#[derive(Args)]
struct SolveArgs {
    /// Instance file (JSON document).
    instance: PathBuf,
    /// Solver mode: plain, outliers, glb or glb-outliers.
    #[arg(long, default_value = "plain")]
    mode: String,
    /// Guess depth g (number of assumed largest-radius optimal pairs).
    #[arg(long, default_value_t = 0)]
    guess: usize,
    /// Override the instance's cluster budget k.
    #[arg(long)]
    k: Option<usize>,
    /// Override the instance's outlier budget m.
    #[arg(long)]
    m: Option<usize>,
    /// Also run the exhaustive oracle and report cost ratio.
    #[arg(long)]
    oracle: bool,
    /// Include per-component diagnostics in the report.
    #[arg(long)]
    trace: bool,
    /// Output path (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Suppress timing fields so identical invocations are byte-identical.
    #[arg(long)]
    no_timestamp: bool,
}

#[derive(Args)]
struct GenArgs {
    /// Instance family: tight or random.
    family: String,
    /// Copies parameter of the tight family / clusters of the random family.
    #[arg(long, default_value_t = 1)]
    k: usize,
    /// Size parameter h of the tight family (h ≥ 3).
    #[arg(long)]
    h: Option<usize>,
    /// Point count of the random family.
    #[arg(long)]
    n: Option<usize>,
    /// Dimension of the random family.
    #[arg(long, default_value_t = 2)]
    dim: usize,
    /// Outlier budget stored in the instance.
    #[arg(long, default_value_t = 0)]
    m: usize,
    /// Seed of the random family.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output path (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Instance suite: random or tight.
    #[arg(long, default_value = "random")]
    suite: String,
    /// Point count per random instance.
    #[arg(long, default_value_t = 8)]
    n: usize,
    /// Dimension of random instances.
    #[arg(long, default_value_t = 2)]
    dim: usize,
    /// Cluster budget k.
    #[arg(long, default_value_t = 2)]
    k: usize,
    /// Outlier budget m.
    #[arg(long, default_value_t = 0)]
    m: usize,
    /// Solver mode (inferred from m when absent).
    #[arg(long)]
    mode: Option<String>,
    /// Guess depth g.
    #[arg(long, default_value_t = 0)]
    guess: usize,
    /// Number of instances in the batch.
    #[arg(long, default_value_t = 1)]
    count: usize,
    /// Base seed; instance i uses seed + i.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Run the exhaustive oracle per instance.
    #[arg(long)]
    oracle: bool,
    /// Report output path (the table always goes to stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Suppress timing fields so identical invocations are byte-identical.
    #[arg(long)]
    no_timestamp: bool,
}

fn main() {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Solve(args) => run_solve(&args),
        Command::Gen(args) => run_gen(&args),
        Command::Bench(args) => run_bench(&args),
    };
    if let Err(err) = outcome {
        eprintln!("{err}");
        let code = match err {
            Error::Parse(_) | Error::Usage(_) => 2,
            Error::Infeasible(_) => 3,
            Error::Internal { .. } => 4,
        };
        std::process::exit(code);
    }
}

fn write_output(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Error::Usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn pair_json(pair: &Pair) -> Value {
    json!({ "center": pair.center, "radius": format_rat(&pair.radius) })
}

fn assembly_name(case: OutlierAssembly) -> String {
    match case {
        OutlierAssembly::FullPrefix => "full-prefix".into(),
        OutlierAssembly::ShortPrefix => "short-prefix".into(),
        OutlierAssembly::Scanned(h) => format!("scanned-{h}"),
        OutlierAssembly::Extended => "extended".into(),
    }
}

fn report_json(
    instance: &MetricInstance,
    report: &SolveReport,
    oracle: Option<&Rat>,
    trace: bool,
    timestamp: Option<u64>,
) -> Result<Value> {
    let balls: Vec<Value> = report
        .solution
        .balls
        .iter()
        .map(|b| {
            let mut ball = json!({
                "center": b.pair.center,
                "radius": format_rat(&b.pair.radius),
                "assigned": b.assigned.iter().collect::<Vec<_>>(),
            });
            if let Some(w) = &b.witness {
                ball["witness"] = pair_json(w);
            }
            ball
        })
        .collect();
    let mut doc = json!({
        "mode": report.mode.to_string(),
        "instance_digest": instance_digest(instance),
        "cost": format_rat(&report.solution.cost),
        "balls": balls,
        "outliers": report.solution.outliers.iter().collect::<Vec<_>>(),
        "guessed": report.guessed.iter().map(pair_json).collect::<Vec<_>>(),
        "guessed_cost": format_rat(&report.guessed_cost),
        "residual_cost": format_rat(&report.residual_cost),
        "diameter_cost": format_rat(&diameter_cost(instance, &report.solution)?),
        "structured_checks": report.structured_checks,
        "oracle_shortcut": report.oracle_shortcut,
    });
    if let Some(dual) = &report.dual_objective {
        doc["dual_objective"] = json!(format_rat(dual));
    }
    if let Some(special) = &report.special_radius {
        doc["special_radius"] = json!(format_rat(special));
    }
    if let Some(mu) = &report.mu {
        doc["mu"] = json!(format_rat(mu));
    }
    if let Some(case) = report.assembly {
        doc["assembly"] = json!(assembly_name(case));
    }
    if let Some(opt) = oracle {
        doc["oracle_cost"] = json!(format_rat(opt));
        if !opt.is_zero() {
            doc["ratio"] = json!(format_rat(&(&report.solution.cost / opt)));
        }
    }
    if trace {
        doc["diagnostics"] = json!(report
            .diagnostics
            .iter()
            .map(|d| json!({
                "cover_radius": format_rat(&d.cover_radius),
                "disjoint_sum": format_rat(&d.disjoint_sum),
                "disjoint_exact": d.disjoint_exact,
                "graph_radius": format_rat(&d.graph_rad),
            }))
            .collect::<Vec<_>>());
    }
    if let Some(ts) = timestamp {
        doc["timestamp"] = json!(ts);
    }
    Ok(doc)
}

fn unix_now() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

fn run_solve(args: &SolveArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.instance)
        .map_err(|e| Error::Usage(format!("cannot read {}: {e}", args.instance.display())))?;
    let mut instance = parse_instance(&text)?;
    if let Some(k) = args.k {
        if k == 0 {
            return Err(Error::Usage("budget k must be positive".into()));
        }
        instance.k = k;
    }
    if let Some(m) = args.m {
        instance.m = m;
    }
    let mode: Mode = args.mode.parse()?;
    let config = SolveConfig {
        guess_depth: args.guess,
        collect_diagnostics: args.trace,
        ..SolveConfig::new(mode)
    };
    let report = solve(&instance, &config)?;
    let oracle = if args.oracle {
        brute_force_opt(&instance, None)?.map(|opt| opt.cost)
    } else {
        None
    };
    let timestamp = if args.no_timestamp { None } else { Some(unix_now()) };
    let doc = report_json(&instance, &report, oracle.as_ref(), args.trace, timestamp)?;
    write_output(&args.out, &serde_json::to_string_pretty(&doc).expect("valid JSON"))
}

fn run_gen(args: &GenArgs) -> Result<()> {
    let instance = match args.family.as_str() {
        "tight" => {
            let h = args
                .h
                .ok_or_else(|| Error::Usage("tight family requires --h".into()))?;
            tight_instance(h, args.k)?
        }
        "random" => {
            let n = args
                .n
                .ok_or_else(|| Error::Usage("random family requires --n".into()))?;
            random_instance(n, args.dim, args.k, args.m, None, args.seed)?
        }
        other => {
            return Err(Error::Usage(format!(
                "unknown family {other:?} (expected tight or random)"
            )))
        }
    };
    write_output(&args.out, &write_instance(&instance))
}

fn run_bench(args: &BenchArgs) -> Result<()> {
    let mode: Mode = match &args.mode {
        Some(name) => name.parse()?,
        None => {
            if args.m > 0 {
                Mode::Outliers
            } else {
                Mode::Plain
            }
        }
    };
    let config = SolveConfig {
        guess_depth: args.guess,
        collect_diagnostics: false,
        ..SolveConfig::new(mode)
    };
    let mut rows = Vec::with_capacity(args.count);
    for index in 0..args.count {
        let instance = match args.suite.as_str() {
            "random" => random_instance(
                args.n,
                args.dim,
                args.k,
                args.m,
                None,
                args.seed + index as u64,
            )?,
            "tight" => tight_instance(3 + index, args.k)?,
            other => {
                return Err(Error::Usage(format!(
                    "unknown suite {other:?} (expected random or tight)"
                )))
            }
        };
        let started = Instant::now();
        let report = solve(&instance, &config)?;
        let wall_ms = if args.no_timestamp { 0 } else { started.elapsed().as_millis() };
        let oracle_cost = if args.oracle {
            brute_force_opt(&instance, None)?.map(|opt| opt.cost)
        } else {
            None
        };
        let ratio = match &oracle_cost {
            Some(opt) if !opt.is_zero() => Some(format_rat(&(&report.solution.cost / opt))),
            Some(_) if report.solution.cost.is_zero() => Some("1/1".into()),
            _ => None,
        };
        rows.push(BenchRow {
            digest: instance_digest(&instance),
            mode: mode.to_string(),
            solver_cost: format_rat(&report.solution.cost),
            oracle_cost: oracle_cost.as_ref().map(format_rat),
            dual_objective: report.dual_objective.as_ref().map(format_rat),
            ratio,
            wall_ms,
        });
    }
    let report = BenchReport::finalize(rows);
    print!("{}", report.table());
    if args.out.is_some() {
        let text = serde_json::to_string_pretty(&report).expect("valid JSON");
        write_output(&args.out, &text)?;
    }
    Ok(())
}
