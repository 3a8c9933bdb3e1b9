use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::json;

use keyshare::game::{clearance_level_games, core_bounds, core_vertices, value_function};
use keyshare::polar::ProfileCache;
use keyshare::protocol::{aggregate, execute, induced_game, prepare, ProtocolConfig};
use keyshare::{
    build_degraded_source, nucleolus, shapley_closed_form, shapley_permutation, AllocationReport, Coalition,
    DegradedSourceSpec, Game, Method, Rates, Source,
};

use crate::error::{CliError, Result};
use crate::manifest::RunManifest;
use crate::{AllocateArgs, AnalyzeArgs, Common, Format, MethodArg, SimulateArgs, SweepArgs};

/// Tolerance of the convexity and core-membership verdicts.
pub const VERDICT_TOL: f64 = 1e-10;

pub fn load_spec(path: &Path) -> Result<DegradedSourceSpec> {
    DegradedSourceSpec::load(path).map_err(|source| CliError::Input { path: path.into(), source })
}

fn load_game(path: &Path) -> Result<Game> {
    Game::load(path).map_err(|source| CliError::Input { path: path.into(), source })
}

fn load_allocation(path: &Path) -> Result<AllocationReport> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input { path: path.into(), source: e.into() })?;
    AllocationReport::from_json_str(&text).map_err(|source| CliError::Input { path: path.into(), source })
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|source| CliError::Output { path: path.into(), source })
}

/// Writes `text` to `--out` or stdout, then the manifest if one was asked for.
pub fn emit(common: &Common, text: &str, mut manifest: RunManifest) -> Result<()> {
    match &common.out {
        Some(path) => {
            write_file(path, text.as_bytes())?;
            manifest.outputs.insert(0, path.clone());
        }
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|source| CliError::Output { path: PathBuf::from("<stdout>"), source })?;
        }
    }
    match &common.manifest {
        Some(path) => manifest.write(path),
        None => Ok(()),
    }
}

fn to_json(v: &impl Serialize) -> String {
    serde_json::to_string_pretty(v).expect("output serializes") + "\n"
}

fn pair_witness(w: Option<(Coalition, Coalition)>) -> serde_json::Value {
    match w {
        None => json!({ "holds": true, "witness": null }),
        Some((s, t)) => json!({ "holds": false, "witness": [s.to_string(), t.to_string()] }),
    }
}

fn value_rows(game: &Game) -> Vec<serde_json::Value> {
    Coalition::all(game.num_agents())
        .filter(|s| !s.is_empty())
        .map(|s| json!({ "coalition": s.to_string(), "v": game.value(s) }))
        .collect()
}

pub fn analyze(args: &AnalyzeArgs) -> Result<()> {
    let spec = load_spec(&args.spec)?;
    let src: Source = build_degraded_source(&spec)?;
    let game = value_function(&src)?;
    let l = game.num_agents();
    let bounds = Coalition::all(l)
        .filter(|s| !s.is_empty())
        .map(|s| {
            let b = core_bounds(&src, s)?;
            Ok(json!({ "coalition": s.to_string(), "lower": b.lower, "upper": b.upper }))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut report = json!({
        "spec": spec,
        "game": { "L": l, "v": game.values() },
        "values": value_rows(&game),
        "superadditive": pair_witness(game.superadditivity_violation(VERDICT_TOL)?),
        "supermodular": pair_witness(game.supermodularity_violation(VERDICT_TOL)?),
        "core_bounds": bounds,
    });
    if let Some(levels) = &spec.levels {
        let games = clearance_level_games(&src, levels)?;
        report["levels"] = levels
            .iter()
            .zip(&games)
            .map(|(agents, g)| json!({ "agents": agents, "values": value_rows(g) }))
            .collect();
    }
    let mut manifest = RunManifest::new("analyze", args.common.seed);
    manifest.spec = Some(args.spec.clone());
    if let Some(path) = &args.export_game {
        write_file(path, (game.to_json() + "\n").as_bytes())?;
        manifest.outputs.push(path.clone());
    }
    emit(&args.common, &to_json(&report), manifest)
}

#[derive(Debug, Serialize)]
struct AllocationEntry {
    #[serde(flatten)]
    report: AllocationReport,
    in_core: bool,
    /// A coalition whose core inequality fails, if any.
    core_violation: Option<String>,
}

fn entry(game: &Game, report: AllocationReport) -> Result<AllocationEntry> {
    let a = Rates::new(report.rates.clone())?;
    let violation = game.core_violation(&a, VERDICT_TOL)?;
    Ok(AllocationEntry { report, in_core: violation.is_none(), core_violation: violation.map(|s| s.to_string()) })
}

pub fn allocate(args: &AllocateArgs) -> Result<()> {
    let mut manifest = RunManifest::new("allocate", args.common.seed);
    manifest.set("method", format!("{:?}", args.method).to_lowercase());
    let (game, src) = match (&args.spec, &args.game) {
        (Some(path), _) => {
            manifest.spec = Some(path.clone());
            let src: Source = build_degraded_source(&load_spec(path)?)?;
            (value_function(&src)?, Some(src))
        }
        (None, Some(path)) => {
            manifest.game = Some(path.clone());
            (load_game(path)?, None)
        }
        (None, None) => return Err(CliError::usage("spec", "either --spec or --game is required")),
    };
    let mut entries = Vec::new();
    let mut routes_gap = None;
    if matches!(args.method, MethodArg::Shapley | MethodArg::Both) {
        let sh = shapley_permutation(&game);
        if let Some(src) = &src {
            routes_gap = Some(sh.max_abs_diff(&shapley_closed_form(src)?));
        }
        entries.push(entry(&game, AllocationReport::new(Method::Shapley, &sh.rates, None))?);
    }
    if matches!(args.method, MethodArg::Nucleolus | MethodArg::Both) {
        let (nu, trace) = nucleolus(&game)?;
        let trace = args.trace.then_some(&trace);
        entries.push(entry(&game, AllocationReport::new(Method::Nucleolus, &nu.rates, trace))?);
    }
    let text = match args.format {
        Format::Json => to_json(&json!({
            "game": { "L": game.num_agents(), "v": game.values() },
            "allocations": entries,
            "shapley_routes_gap": routes_gap,
        })),
        Format::Csv => polytope_csv(&game, &entries)?,
    };
    manifest.set("format", format!("{:?}", args.format).to_lowercase());
    emit(&args.common, &text, manifest)
}

/// Core vertices followed by the computed allocations, one point per row.
fn polytope_csv(game: &Game, entries: &[AllocationEntry]) -> Result<String> {
    let l = game.num_agents();
    let mut out = String::from("kind");
    for i in 1..=l {
        write!(out, ",r{i}").unwrap();
    }
    out.push('\n');
    let mut row = |kind: &str, rates: &[f64]| {
        out.push_str(kind);
        for r in rates {
            write!(out, ",{r}").unwrap();
        }
        out.push('\n');
    };
    for v in core_vertices(game, VERDICT_TOL)? {
        row("core_vertex", &v.rates);
    }
    for e in entries {
        let kind = match e.report.method {
            Method::Shapley => "shapley",
            Method::Nucleolus => "nucleolus",
        };
        row(kind, &e.report.rates);
    }
    Ok(out)
}

fn protocol_config(
    spec: DegradedSourceSpec,
    n: usize,
    b: usize,
    eps: f64,
    runs: usize,
    seed: u64,
) -> ProtocolConfig {
    let mut cfg = ProtocolConfig::new(spec, n, b);
    cfg.eps = eps;
    cfg.runs = runs;
    cfg.seed = seed;
    cfg
}

pub fn simulate(args: &SimulateArgs) -> Result<()> {
    let spec = load_spec(&args.spec)?;
    let mut manifest = RunManifest::new("simulate", args.common.seed);
    manifest.spec = Some(args.spec.clone());
    manifest.set("N", args.n);
    manifest.set("B", args.b);
    manifest.set("eps", args.eps);
    manifest.set("runs", args.runs);
    let mut cfg = protocol_config(spec, args.n, args.b, args.eps, args.runs, args.common.seed);
    cfg.calibration_runs = args.calibration_runs;
    cfg.coalition = args.coalition.clone();
    if let Some(c) = &args.coalition {
        manifest.set("coalition", c);
    }
    cfg.target = match (&args.allocation, args.method) {
        (Some(path), _) => {
            manifest.allocation = Some(path.clone());
            Some(load_allocation(path)?.rates)
        }
        (None, MethodArg::Shapley) => None,
        (None, MethodArg::Nucleolus) => {
            cfg.validate()?;
            manifest.set("method", "nucleolus");
            let src: Source = build_degraded_source(&cfg.source)?;
            let s = match &cfg.coalition {
                Some(c) => Coalition::from_agents(c.iter().copied()),
                None => Coalition::grand(cfg.source.num_agents()),
            };
            Some(nucleolus(&induced_game(&src, s)?)?.0.rates)
        }
        (None, MethodArg::Both) => {
            return Err(CliError::usage("method", "simulate takes a single target, `shapley` or `nucleolus`"))
        }
    };
    let start = Instant::now();
    let setup = prepare(&cfg, &ProfileCache::from_env())?;
    let runs = execute(&setup)?;
    let report = aggregate(&setup, &runs, start.elapsed().as_secs_f64());
    if let Some(path) = &args.transcript {
        write_file(path, &runs[0].transcript.to_frames())?;
        manifest.outputs.push(path.clone());
    }
    emit(&args.common, &to_json(&report), manifest)
}

pub fn sweep(args: &SweepArgs) -> Result<()> {
    let spec = load_spec(&args.spec)?;
    let mut manifest = RunManifest::new("sweep", args.common.seed);
    manifest.spec = Some(args.spec.clone());
    manifest.set("N", &args.n);
    manifest.set("B", args.b);
    manifest.set("eps", args.eps);
    manifest.set("runs", args.runs);
    let cache = ProfileCache::from_env();
    let mut out = String::from("N,agent,target_rate,achieved_rate,agreement_failure_rate,sum_rate\n");
    for &n in &args.n {
        let cfg = protocol_config(spec.clone(), n, args.b, args.eps, args.runs, args.common.seed);
        let rep = keyshare::protocol::run_protocol_with(&cfg, &cache)?;
        for a in &rep.agents {
            writeln!(
                out,
                "{n},{},{},{},{},{}",
                a.agent, a.target_rate, a.achieved_rate, rep.agreement_failure_rate, rep.sum_rate
            )
            .unwrap();
        }
    }
    emit(&args.common, &out, manifest)
}
