mod output;
mod sweep;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use ssdsim_core::workload::parse_trace_file;
use ssdsim_core::{simulate, Config, IoKind, MetricsReport, PolicyKind, SimError};

/// Output directory used when neither `--out` nor this variable is set.
const DEFAULT_OUT: &str = "ssdsim-out";
const OUT_ENV: &str = "SSDSIM_OUT_DIR";

#[derive(Parser)]
#[command(name = "ssdsim", version, about = "Many-chip SSD simulator with device-level I/O scheduling")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation and write its report.
    Run(RunArgs),
    /// Run the cross product of chip counts, transfer sizes and policies.
    Sweep(SweepArgs),
    /// Parse a block trace and print what it contains.
    ValidateTrace(TraceArgs),
    /// Print the effective configuration after overrides.
    PrintConfig(ConfigArgs),
}

#[derive(Args)]
struct ConfigArgs {
    /// TOML run configuration; defaults apply to anything it leaves out.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Override one field, e.g. `--set timing.read_cell_time=25`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Shorthand for `--set policy.name=<POLICY>`.
    #[arg(long)]
    policy: Option<PolicyKind>,
}

impl ConfigArgs {
    fn load(&self) -> Result<Config, Failure> {
        let mut overrides = self.overrides.clone();
        if let Some(p) = self.policy {
            overrides.push(format!("policy.name=\"{p}\""));
        }
        Config::load_with_overrides(self.config.as_deref(), &overrides).map_err(Failure::sim)
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Report of an earlier run on the same workload, usually VAS.
    #[arg(long)]
    baseline: Option<PathBuf>,
    /// Output directory [env: SSDSIM_OUT_DIR; default: ssdsim-out].
    #[arg(long)]
    out: Option<PathBuf>,
    /// File stem for the report files; defaults to the policy name.
    #[arg(long)]
    name: Option<String>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Total chip counts, e.g. `64,256,1024`.
    #[arg(long, value_delimiter = ',')]
    chips: Vec<u32>,
    /// Fixed transfer sizes, e.g. `4K,64K,4M`.
    #[arg(long, value_delimiter = ',', value_parser = sweep::parse_size)]
    sizes: Vec<u64>,
    /// Policies to compare; VAS cells become the baseline of their row.
    #[arg(long, value_delimiter = ',')]
    policies: Vec<PolicyKind>,
    /// Root of the per-cell workload seeds; defaults to `workload.seed`.
    #[arg(long)]
    root_seed: Option<u64>,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Output directory [env: SSDSIM_OUT_DIR; default: ssdsim-out].
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TraceArgs {
    path: PathBuf,
    /// Malformed lines tolerated before the trace is rejected.
    #[arg(long, default_value_t = 0)]
    error_budget: usize,
}

/// A failed command and the exit status it maps to.
#[derive(Debug)]
struct Failure {
    code: u8,
    err: anyhow::Error,
}

impl Failure {
    const INPUT: u8 = 1;
    const RUNTIME: u8 = 2;

    fn input(err: impl Into<anyhow::Error>) -> Self {
        Failure { code: Self::INPUT, err: err.into() }
    }

    fn runtime(err: impl Into<anyhow::Error>) -> Self {
        Failure { code: Self::RUNTIME, err: err.into() }
    }

    fn sim(e: SimError) -> Self {
        if e.is_input_error() {
            Self::input(e)
        } else {
            Self::runtime(e)
        }
    }
}

fn out_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from)).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

fn read_baseline(path: &Path) -> Result<MetricsReport, Failure> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading baseline {}", path.display()))
        .map_err(Failure::input)?;
    serde_json::from_str(&text)
        .with_context(|| format!("parsing baseline {}", path.display()))
        .map_err(Failure::input)
}

fn summary(r: &MetricsReport) -> String {
    let mut line = format!(
        "{}: bandwidth {:.2} MB/s, mean latency {:.2} us, utilization {:.4}",
        r.policy, r.bandwidth_mb_s, r.latency_mean_us, r.chip_utilization_mean
    );
    if let Some(x) = r.txn_reduction_vs_baseline {
        line.push_str(&format!(", txn reduction {x:.4}"));
    }
    line
}

fn run(args: RunArgs) -> Result<(), Failure> {
    let cfg = args.config.load()?;
    let baseline = args.baseline.as_deref().map(read_baseline).transpose()?;
    let report = simulate(&cfg, baseline.as_ref()).map_err(Failure::sim)?;
    let dir = out_dir(args.out);
    let stem = args.name.unwrap_or_else(|| cfg.policy.name.to_string());
    output::write_report(&dir, &stem, &report).map_err(Failure::runtime)?;
    println!("{}", summary(&report));
    Ok(())
}

fn run_sweep(args: SweepArgs) -> Result<(), Failure> {
    let cfg = args.config.load()?;
    let plan = sweep::Plan {
        root_seed: args.root_seed.unwrap_or(cfg.workload.seed),
        chips: args.chips,
        sizes: args.sizes,
        policies: if args.policies.is_empty() { vec![cfg.policy.name] } else { args.policies },
        base: cfg,
    };
    let cells = plan.cells();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(args.jobs).build().map_err(Failure::runtime)?;
    let results = pool.install(|| sweep::execute(&cells));
    let dir = out_dir(args.out);
    output::write_sweep(&dir, &cells, &results).map_err(Failure::runtime)?;
    let failed = results.iter().filter(|r| r.is_err()).count();
    println!("sweep: {} cells, {} failed, results in {}", cells.len(), failed, dir.display());
    if failed > 0 {
        return Err(Failure::runtime(anyhow::anyhow!("{failed} sweep cells failed; see sweep.csv")));
    }
    Ok(())
}

fn validate_trace(args: TraceArgs) -> Result<(), Failure> {
    let p = parse_trace_file(&args.path, args.error_budget).map_err(Failure::sim)?;
    let reads = p.records.iter().filter(|r| r.kind == IoKind::Read).count();
    let bytes: u64 = p.records.iter().map(|r| r.length).sum();
    let span = p.records.last().map_or(0.0, |r| r.timestamp);
    println!(
        "{}: {} records ({} reads, {} writes), {} bytes over {:.1} us; {} malformed lines skipped, {} out of order",
        args.path.display(),
        p.records.len(),
        reads,
        p.records.len() - reads,
        bytes,
        span,
        p.malformed,
        p.reordered
    );
    Ok(())
}

fn print_config(args: ConfigArgs) -> Result<(), Failure> {
    print!("{}", args.load()?.to_toml());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { Failure::INPUT } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Run(a) => run(a),
        Command::Sweep(a) => run_sweep(a),
        Command::ValidateTrace(a) => validate_trace(a),
        Command::PrintConfig(a) => print_config(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("ssdsim: {:#}", f.err);
            ExitCode::from(f.code)
        }
    }
}
