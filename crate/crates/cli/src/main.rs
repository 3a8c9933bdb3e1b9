//! `keyshare`: analyze degraded-source games, compute allocations, simulate
//! the key-generation protocol and run the invariant suites.

mod commands;
mod error;
mod manifest;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "keyshare", version, about = "Coalitional secret-key generation toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Value table, convexity verdicts and core bounds of a source.
    Analyze(AnalyzeArgs),
    /// Shapley value and/or nucleolus, with core membership.
    Allocate(AllocateArgs),
    /// Run the reconciliation and hashing protocol.
    Simulate(SimulateArgs),
    /// Rate-versus-N data as CSV.
    Sweep(SweepArgs),
    /// Run an invariant suite; failures print a witness.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Shapley,
    Nucleolus,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Game,
    Allocation,
    Polar,
    Secrecy,
    All,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Seed in hex, with or without `0x`.
    #[arg(long, value_parser = parse_hex, default_value = "0xC0A117")]
    pub seed: u64,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write a run manifest (inputs, overrides, seed, outputs) here.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub spec: PathBuf,
    /// Also write the bare game file `{l, v}` for `allocate --game`.
    #[arg(long)]
    pub export_game: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("input").required(true).args(["spec", "game"])))]
pub struct AllocateArgs {
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(long)]
    pub game: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = MethodArg::Both)]
    pub method: MethodArg,
    /// Include the nucleolus stage trace.
    #[arg(long)]
    pub trace: bool,
    /// `csv` emits core vertices and the allocations for plotting.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub spec: PathBuf,
    /// Allocation file from `allocate`; rates of the key-generating agents.
    #[arg(long)]
    pub allocation: Option<PathBuf>,
    /// Target when no allocation file is given.
    #[arg(long, value_enum, default_value_t = MethodArg::Shapley)]
    pub method: MethodArg,
    #[arg(long = "N", default_value_t = 1024)]
    pub n: usize,
    #[arg(long = "B", default_value_t = 4)]
    pub b: usize,
    #[arg(long, default_value_t = 0.05)]
    pub eps: f64,
    #[arg(long, default_value_t = 100)]
    pub runs: usize,
    /// Key-generating agents, comma separated; all agents by default.
    #[arg(long, value_delimiter = ',')]
    pub coalition: Option<Vec<usize>>,
    #[arg(long, default_value_t = keyshare::protocol::CALIBRATION_RUNS)]
    pub calibration_runs: usize,
    /// Dump the public transcript of run 0 in the binary frame format.
    #[arg(long)]
    pub transcript: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub spec: PathBuf,
    /// Block lengths to sweep, comma separated powers of two.
    #[arg(long = "N", value_delimiter = ',', default_value = "64,128,256,512,1024")]
    pub n: Vec<usize>,
    #[arg(long = "B", default_value_t = 4)]
    pub b: usize,
    #[arg(long, default_value_t = 0.05)]
    pub eps: f64,
    #[arg(long, default_value_t = 20)]
    pub runs: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(value_enum)]
    pub suite: Suite,
    /// Source to check; the three-agent worked example by default.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

fn parse_hex(s: &str) -> Result<u64, String> {
    let digits = s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")).unwrap_or(s);
    u64::from_str_radix(digits, 16).map_err(|e| format!("`{s}` is not a hex seed: {e}"))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Analyze(a) => commands::analyze(&a),
        Command::Allocate(a) => commands::allocate(&a),
        Command::Simulate(a) => commands::simulate(&a),
        Command::Sweep(a) => commands::sweep(&a),
        Command::Verify(a) => verify::run(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
