//! Command-line front end: generate instances, solve them by any method,
//! export the reformulations, and run benchmark sweeps.
//!
//! Exit codes: 0 success, 2 usage error, 3 I/O error, 4 solved-but-not-proven,
//! 1 anything else.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand, ValueEnum};

use cfld::bench::{self, Method, SweepConfig};
use cfld::extsolver::AdapterConfig;
use cfld::instancegen::{self, GenConfig};
use cfld::model::{DerivedCoefficients, Instance, Solution};
use cfld::{bnb, formulations, oa, oracle, ExecMode};

/// Environment variable holding a default external-solver adapter path.
const ADAPTER_ENV: &str = "CFLD_ADAPTER";

const EXIT_IO: u8 = 3;
const EXIT_NOT_PROVEN: u8 = 4;

#[derive(Parser)]
#[command(
    name = "cfld",
    about = "Exact optimization toolkit for competitive facility location with discrete attractiveness",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random instance and write the canonical JSON file.
    Generate(GenerateArgs),
    /// Exhaustively find the optimum of a small instance.
    Oracle(OracleArgs),
    /// Solve an instance to certified optimality.
    Solve(SolveArgs),
    /// Export a reformulation as MPS, CBF or JSON.
    Export(ExportArgs),
    /// Run a benchmark sweep and write one CSV row per (instance, method).
    Bench(BenchArgs),
    /// Derive plot-ready (K, f) series from benchmark CSV output.
    Plotdata(PlotdataArgs),
}

#[derive(clap::Args)]
struct GenerateArgs {
    #[arg(long)]
    zones: usize,
    /// Defaults to the zone count.
    #[arg(long)]
    candidates: Option<usize>,
    #[arg(long)]
    competitors: usize,
    #[arg(long, default_value_t = 0.0)]
    fixed_cost: f64,
    #[arg(long)]
    seed: u64,
    /// Attractiveness menu, ascending.
    #[arg(long, value_delimiter = ',', default_values_t = [100.0, 300.0, 500.0, 700.0, 900.0])]
    levels: Vec<f64>,
    /// Level cost is multiplier × level value.
    #[arg(long, default_value_t = 2.0)]
    level_cost_multiplier: f64,
    #[arg(long, default_value_t = 100.0)]
    square_side: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(clap::Args)]
struct OracleArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value_t = cfld::oracle::DEFAULT_ENUMERATION_CAP)]
    cap: u128,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SolveMethod {
    Bnb,
    Oa,
    Oracle,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MasterKind {
    Exhaustive,
    Bnb,
    External,
}

#[derive(clap::Args)]
struct SolveArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = SolveMethod::Bnb)]
    method: SolveMethod,
    /// Master solver for the outer-approximation method.
    #[arg(long, value_enum, default_value_t = MasterKind::Bnb)]
    master: MasterKind,
    /// Relative optimality tolerance.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, default_value_t = 1_000_000)]
    node_cap: usize,
    #[arg(long, default_value_t = 100)]
    max_iterations: usize,
    /// External solver command template with {input}/{output}/{timelimit}.
    #[arg(long)]
    solver_cmd: Option<String>,
    /// External solver adapter config (JSON); defaults to $CFLD_ADAPTER.
    #[arg(long)]
    adapter: Option<PathBuf>,
    #[arg(long, default_value_t = 600.0)]
    time_limit: f64,
    /// Use the worker pool (single-worker runs are byte-deterministic).
    #[arg(long)]
    parallel: bool,
    /// Also write a JSON report here.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormKind {
    Milp,
    OaMaster,
    Micqp,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatKind {
    Mps,
    Cbf,
    Json,
}

#[derive(clap::Args)]
struct ExportArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, value_enum)]
    form: FormKind,
    #[arg(long, value_enum)]
    fmt: FormatKind,
    /// Replace rotated-cone rows by their second-order-cone form.
    #[arg(long)]
    soc: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(clap::Args)]
struct BenchArgs {
    /// Sweep config JSON mirroring these flags; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    zones: Option<usize>,
    #[arg(long)]
    candidates: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    fixed_costs: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    competitors: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    /// bnb, oa-exhaustive, oa-bnb, oa-external, external-milp, external-micqp, oracle.
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<String>>,
    #[arg(long, value_delimiter = ',')]
    levels: Option<Vec<f64>>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    node_cap: Option<usize>,
    #[arg(long)]
    adapter: Option<PathBuf>,
    #[arg(long)]
    time_limit: Option<f64>,
    /// Run grid cells on the worker pool.
    #[arg(long)]
    parallel: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(clap::Args)]
struct PlotdataArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out_profit: PathBuf,
    #[arg(long)]
    out_open: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.chain().any(|c| c.downcast_ref::<std::io::Error>().is_some())
                || matches!(
                    e.downcast_ref::<cfld::CfldError>(),
                    Some(cfld::CfldError::Io(_)) | Some(cfld::CfldError::Parse { .. })
                )
            {
                ExitCode::from(EXIT_IO)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}

fn run(command: Command) -> anyhow::Result<ExitCode> {
    match command {
        Command::Generate(args) => generate(args),
        Command::Oracle(args) => run_oracle(args),
        Command::Solve(args) => solve(args),
        Command::Export(args) => export(args),
        Command::Bench(args) => run_bench(args),
        Command::Plotdata(args) => plotdata(args),
    }
}

fn load_instance(path: &Path) -> anyhow::Result<(Instance, DerivedCoefficients)> {
    let instance = instancegen::load(path)
        .with_context(|| format!("reading instance {}", path.display()))?;
    let coeffs = DerivedCoefficients::from_instance(&instance);
    Ok((instance, coeffs))
}

fn generate(args: GenerateArgs) -> anyhow::Result<ExitCode> {
    let config = GenConfig {
        n_zones: args.zones,
        n_candidates: args.candidates.unwrap_or(args.zones),
        n_competitors: args.competitors,
        fixed_cost: args.fixed_cost,
        seed: args.seed,
        square_side: args.square_side,
        level_values: args.levels,
        level_cost_multiplier: args.level_cost_multiplier,
    };
    let instance = instancegen::generate(&config)?;
    instancegen::save(&instance, &args.out)
        .with_context(|| format!("writing {}", args.out.display()))?;
    println!(
        "wrote {} ({} zones, {} candidates, {} competitors, {} levels, seed {})",
        args.out.display(),
        instance.num_zones(),
        instance.num_candidates(),
        instance.num_competitors(),
        instance.num_levels(),
        args.seed
    );
    Ok(ExitCode::SUCCESS)
}

fn describe_open(instance: &Instance, solution: &Solution) -> String {
    let open: Vec<String> = solution
        .choices()
        .iter()
        .enumerate()
        .filter_map(|(j, choice)| {
            choice.map(|r| {
                format!(
                    "{}@Q={}",
                    instance.candidates()[j].id,
                    instance.levels().value(r)
                )
            })
        })
        .collect();
    if open.is_empty() {
        "(none)".to_string()
    } else {
        open.join(", ")
    }
}

fn run_oracle(args: OracleArgs) -> anyhow::Result<ExitCode> {
    let (instance, coeffs) = load_instance(&args.input)?;
    let report = oracle::enumerate_optimal(&instance, &coeffs, args.cap)?;
    println!(
        "optimal profit: {} ({} thousand)",
        report.best_profit,
        bench::sig6(report.best_profit / 1000.0)
    );
    println!("open facilities: {}", describe_open(&instance, &report.best));
    println!("configurations evaluated: {}", report.count_evaluated);
    Ok(ExitCode::SUCCESS)
}

fn adapter_from(args_adapter: &Option<PathBuf>, solver_cmd: &Option<String>) -> anyhow::Result<Option<AdapterConfig>> {
    if let Some(cmd) = solver_cmd {
        let parts: Vec<String> = cmd.split_whitespace().map(str::to_string).collect();
        if parts.is_empty() {
            return Err(anyhow!("--solver-cmd is empty"));
        }
        return Ok(Some(AdapterConfig {
            command: parts,
            solution_format: "name-value".into(),
            env_passthrough: vec![],
        }));
    }
    let path = args_adapter
        .clone()
        .or_else(|| std::env::var(ADAPTER_ENV).ok().map(PathBuf::from));
    match path {
        Some(p) => Ok(Some(
            AdapterConfig::load(&p).with_context(|| format!("loading adapter {}", p.display()))?,
        )),
        None => Ok(None),
    }
}

fn solve(args: SolveArgs) -> anyhow::Result<ExitCode> {
    let (instance, coeffs) = load_instance(&args.input)?;
    let started = std::time::Instant::now();

    struct Outcome {
        method: String,
        profit: f64,
        solution: Solution,
        gap: Option<f64>,
        proven: bool,
        nodes: Option<usize>,
        iterations: Option<usize>,
    }

    let outcome = match args.method {
        SolveMethod::Oracle => {
            let report = oracle::enumerate_optimal(&instance, &coeffs, oracle::DEFAULT_ENUMERATION_CAP)?;
            Outcome {
                method: "oracle".into(),
                profit: report.best_profit,
                solution: report.best,
                gap: Some(0.0),
                proven: true,
                nodes: None,
                iterations: None,
            }
        }
        SolveMethod::Bnb => {
            let report = bnb::solve_with(
                &instance,
                &coeffs,
                &bnb::BnbOptions {
                    rel_tol: args.tol,
                    node_cap: args.node_cap,
                    mode: if args.parallel {
                        ExecMode::Parallel
                    } else {
                        ExecMode::Sequential
                    },
                },
            )?;
            Outcome {
                method: "bnb".into(),
                profit: report.best_profit,
                solution: report.best_solution,
                gap: Some(report.proven_gap),
                proven: report.proven,
                nodes: Some(report.nodes_explored),
                iterations: None,
            }
        }
        SolveMethod::Oa => {
            let mut master: Box<dyn oa::MasterOracle> = match args.master {
                MasterKind::Exhaustive => Box::new(oa::ExhaustiveMaster::default()),
                MasterKind::Bnb => Box::new(oa::BnbMaster::default()),
                MasterKind::External => {
                    let adapter = adapter_from(&args.adapter, &args.solver_cmd)?
                        .ok_or_else(|| anyhow!("--master external needs --solver-cmd, --adapter or ${ADAPTER_ENV}"))?;
                    Box::new(oa::ExternalMaster {
                        adapter,
                        time_limit_secs: args.time_limit,
                    })
                }
            };
            let report = oa::run(
                &instance,
                &coeffs,
                master.as_mut(),
                &oa::default_init(&instance),
                &oa::OaCaps {
                    max_iterations: args.max_iterations,
                },
            )?;
            Outcome {
                method: format!("oa ({} master)", master.describe()),
                profit: report.profit,
                solution: report.solution,
                gap: None,
                proven: report.proven,
                nodes: None,
                iterations: Some(report.iterations),
            }
        }
    };

    let elapsed = started.elapsed().as_secs_f64();
    println!("method: {}", outcome.method);
    println!(
        "profit: {} ({} thousand)",
        outcome.profit,
        bench::sig6(outcome.profit / 1000.0)
    );
    println!("open facilities: {}", describe_open(&instance, &outcome.solution));
    if let Some(gap) = outcome.gap {
        println!("proven gap: {gap:.3e}");
    }
    if let Some(nodes) = outcome.nodes {
        println!("nodes: {nodes}");
    }
    if let Some(iterations) = outcome.iterations {
        println!("iterations: {iterations}");
    }
    println!("proven: {}", outcome.proven);
    println!("time: {elapsed:.1}s");

    if let Some(report_path) = &args.report {
        let open: Vec<serde_json::Value> = outcome
            .solution
            .choices()
            .iter()
            .enumerate()
            .filter_map(|(j, choice)| {
                choice.map(|r| {
                    serde_json::json!({
                        "candidate": instance.candidates()[j].id,
                        "level": r + 1,
                        "attractiveness": instance.levels().value(r),
                    })
                })
            })
            .collect();
        let report = serde_json::json!({
            "method": outcome.method,
            "profit": outcome.profit,
            "profit_thousands": outcome.profit / 1000.0,
            "open": open,
            "gap": outcome.gap,
            "proven": outcome.proven,
            "nodes": outcome.nodes,
            "iterations": outcome.iterations,
            "wall_time_secs": elapsed,
        });
        std::fs::write(report_path, serde_json::to_string_pretty(&report)?)
            .with_context(|| format!("writing {}", report_path.display()))?;
    }

    if outcome.proven {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("warning: result not proven optimal within the requested limits");
        Ok(ExitCode::from(EXIT_NOT_PROVEN))
    }
}

fn export(args: ExportArgs) -> anyhow::Result<ExitCode> {
    let (instance, coeffs) = load_instance(&args.input)?;
    let mut model = match args.form {
        FormKind::Milp => formulations::build_milp(&instance, &coeffs),
        FormKind::Micqp => formulations::build_micqp(&instance, &coeffs),
        FormKind::OaMaster => {
            // The standard two initial cut points of the OA loop.
            let mut pool = oa::CutPool::new();
            pool.add(oa::default_init(&instance), &coeffs);
            pool.add(Solution::closed(instance.num_candidates()), &coeffs);
            formulations::build_oa_master(&instance, &coeffs, &pool)
        }
    };
    if args.soc {
        model = formulations::soc_convert(&model);
    }
    let text = match args.fmt {
        FormatKind::Mps => formulations::export::to_mps(&model)?,
        FormatKind::Cbf => formulations::export::to_cbf(&model)?,
        FormatKind::Json => formulations::export::to_json(&model),
    };
    std::fs::write(&args.out, text).with_context(|| format!("writing {}", args.out.display()))?;
    println!(
        "wrote {} ({} variables, {} linear rows, {} cone rows)",
        args.out.display(),
        model.num_variables(),
        model.num_linear_rows(),
        model.num_cone_rows()
    );
    Ok(ExitCode::SUCCESS)
}

fn run_bench(args: BenchArgs) -> anyhow::Result<ExitCode> {
    let mut config = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            SweepConfig::from_json(&text)?
        }
        None => SweepConfig {
            zones: 0,
            candidates: None,
            fixed_costs: vec![],
            competitors: vec![],
            seeds: vec![],
            methods: vec![],
            level_values: vec![100.0, 300.0, 500.0, 700.0, 900.0],
            level_cost_multiplier: 2.0,
            rel_tol: 1e-6,
            node_cap: 1_000_000,
            oracle_cap: oracle::DEFAULT_ENUMERATION_CAP,
            oa_max_iterations: 100,
            time_limit_secs: 600.0,
            adapter: None,
        },
    };
    if let Some(zones) = args.zones {
        config.zones = zones;
    }
    if args.candidates.is_some() {
        config.candidates = args.candidates;
    }
    if let Some(v) = args.fixed_costs {
        config.fixed_costs = v;
    }
    if let Some(v) = args.competitors {
        config.competitors = v;
    }
    if let Some(v) = args.seeds {
        config.seeds = v;
    }
    if let Some(v) = args.levels {
        config.level_values = v;
    }
    if let Some(v) = args.tol {
        config.rel_tol = v;
    }
    if let Some(v) = args.node_cap {
        config.node_cap = v;
    }
    if let Some(v) = args.time_limit {
        config.time_limit_secs = v;
    }
    if let Some(methods) = args.methods {
        config.methods = methods
            .iter()
            .map(|m| Method::parse(m).ok_or_else(|| anyhow!("unknown method {m:?}")))
            .collect::<anyhow::Result<_>>()?;
    }
    if let Some(adapter) = adapter_from(&args.adapter, &None)? {
        config.adapter = Some(adapter);
    }
    if config.zones == 0 || config.methods.is_empty() {
        return Err(anyhow!(
            "bench needs at least --zones and --methods (or a --config file providing them)"
        ));
    }
    if config.fixed_costs.is_empty() {
        config.fixed_costs = vec![0.0];
    }
    if config.competitors.is_empty() {
        config.competitors = vec![5];
    }
    if config.seeds.is_empty() {
        config.seeds = vec![1];
    }

    let mode = if args.parallel {
        ExecMode::Parallel
    } else {
        ExecMode::Sequential
    };
    let records = bench::run_sweep(&config, mode);
    let csv = bench::render_csv(&records);
    std::fs::write(&args.out, &csv).with_context(|| format!("writing {}", args.out.display()))?;
    let failures = records.iter().filter(|r| r.status.starts_with("error")).count();
    println!(
        "wrote {} ({} rows, {} failures)",
        args.out.display(),
        records.len(),
        failures
    );
    Ok(ExitCode::SUCCESS)
}

fn plotdata(args: PlotdataArgs) -> anyhow::Result<ExitCode> {
    let text = std::fs::read_to_string(&args.input)
        .with_context(|| format!("reading {}", args.input.display()))?;
    let records = bench::parse_csv(&text)?;
    let sizes: std::collections::BTreeSet<usize> = records.iter().map(|r| r.zones).collect();
    if sizes.len() > 1 {
        return Err(anyhow!(
            "plotdata expects bench results at a single instance size, found {sizes:?}"
        ));
    }
    let (profit_csv, open_csv) = bench::plot_series(&records);
    std::fs::write(&args.out_profit, &profit_csv)
        .with_context(|| format!("writing {}", args.out_profit.display()))?;
    std::fs::write(&args.out_open, &open_csv)
        .with_context(|| format!("writing {}", args.out_open.display()))?;
    print!("{}", bench::trend_report(&records));
    println!(
        "wrote {} and {}",
        args.out_profit.display(),
        args.out_open.display()
    );
    Ok(ExitCode::SUCCESS)
}
