mod config;
mod step;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use koopman_equiv::compare::{classify, ComparisonSettings};
use koopman_equiv::corpus::{make_algorithm, AlgorithmId, IterativeMap};
use koopman_equiv::experiments::{run_preset, run_sweep_preset, PresetName, PresetOptions};
use koopman_equiv::io::{comparison_to_json, ingest_external_trajectory, read_spectrum, write_spectrum};
use koopman_equiv::oracles::{Oracle, OracleKind};
use koopman_equiv::par::Execution;
use koopman_equiv::spectral::{
    decompose_trajectory, principal_eigenvalues, CenteringPolicy, DecompositionSettings, Dictionary, Method,
    PrincipalSettings, RankPolicy,
};
use koopman_equiv::trajectory::{iterate, RunConfig};
use koopman_equiv::Error;

use config::{default_outdir, pick, FileConfig};

#[derive(Parser, Debug)]
#[command(name = "koopeq", version, about = "Compare iterative algorithms through their Koopman spectra")]
struct Cli {
    /// JSON file with default values for any flag
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Iterate a map (or load a trajectory) and write its spectrum
    Run(Box<RunArgs>),
    /// Compare two spectrum files; exit status 0, 10 or 20 by verdict
    Compare(CompareArgs),
    /// Distance field of algorithm 1 against algorithm 2 over initial states
    Sweep(SweepArgs),
    /// Regenerate a figure preset (fig1..fig5) or all of them
    Reproduce(ReproduceArgs),
}

#[derive(Args, Debug)]
struct RunArgs {
    /// Corpus algorithm number, 1 to 7
    #[arg(long)]
    algo: Option<u8>,
    /// quad, negcos, l2 or logdet
    #[arg(long)]
    oracle: Option<String>,
    /// Second proximal oracle for algorithms 6 and 7
    #[arg(long)]
    oracle_g: Option<String>,
    /// Proximal step size
    #[arg(long)]
    gamma: Option<f64>,
    /// Initial state, comma-separated
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    x0: Option<Vec<f64>>,
    /// CSV trajectory (header k,x0,x1,...) instead of a corpus algorithm
    #[arg(long)]
    traj: Option<PathBuf>,
    /// Shell command acting as the map: one state per line in, next state out
    #[arg(long)]
    step_cmd: Option<String>,
    #[command(flatten)]
    run: RunFlags,
    #[command(flatten)]
    decomposition: DecompositionFlags,
    /// Spectrum output file
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    outdir: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct RunFlags {
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    overflow_cap: Option<f64>,
}

#[derive(Args, Debug)]
struct DecompositionFlags {
    /// dmd or edmd
    #[arg(long)]
    method: Option<String>,
    /// identity, monomials:<degree> or custom:<f>,<g>,...
    #[arg(long)]
    dict: Option<String>,
    /// Keep exactly this many singular directions
    #[arg(long, conflicts_with = "tau")]
    rank: Option<usize>,
    /// Relative singular-value cutoff
    #[arg(long)]
    tau: Option<f64>,
    /// auto, none or fixed-point
    #[arg(long)]
    centering: Option<String>,
}

#[derive(Args, Debug)]
struct CompareArgs {
    a: PathBuf,
    b: PathBuf,
    #[arg(long)]
    eps_conj: Option<f64>,
    #[arg(long)]
    eps_semi: Option<f64>,
    /// Keep eigenvalues at 1 in the principal sets
    #[arg(long)]
    keep_unit: bool,
    /// Comparison output file
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    outdir: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// quad or negcos
    #[arg(long)]
    oracle: Option<String>,
    /// Grid points per axis
    #[arg(long)]
    resolution: Option<usize>,
    #[arg(long)]
    outdir: Option<PathBuf>,
    /// Evaluate cells on one thread
    #[arg(long)]
    sequential: bool,
}

#[derive(Args, Debug)]
struct ReproduceArgs {
    /// fig1, fig2, fig3, fig4, fig5 or all
    figure: String,
    /// Grid points per axis for fig2
    #[arg(long)]
    resolution: Option<usize>,
    /// Restrict gradient presets to one oracle
    #[arg(long)]
    oracle: Option<String>,
    #[arg(long)]
    outdir: Option<PathBuf>,
    #[arg(long)]
    sequential: bool,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Lib(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Lib(Error::Io(e))
    }
}

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Lib(e) => e.kind(),
        }
    }

    fn exit_code(&self) -> i32 {
        match self.kind() {
            "usage" | "config" | "invalid-input" | "unsupported-pair" => 102,
            "parse" | "json" => 103,
            "io" => 104,
            "step" => 106,
            _ => 105,
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Usage(m) => m.clone(),
            CliError::Lib(e) => e.to_string(),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Lib(Error::Config(msg.into()))
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ").replace('"', "'")
}

fn parse_oracle(name: &str) -> CliResult<OracleKind> {
    Ok(name.parse::<OracleKind>()?)
}

fn run_config(flags: &RunFlags, file: &FileConfig) -> CliResult<RunConfig> {
    let d = RunConfig::default();
    let cfg = RunConfig {
        max_iters: pick(flags.max_iters, file.max_iters).unwrap_or(d.max_iters),
        eps: pick(flags.eps, file.eps).unwrap_or(d.eps),
        overflow_cap: pick(flags.overflow_cap, file.overflow_cap).unwrap_or(d.overflow_cap),
    };
    cfg.validate()?;
    Ok(cfg)
}

fn decomposition(flags: &DecompositionFlags, file: &FileConfig, algo: Option<AlgorithmId>) -> CliResult<DecompositionSettings> {
    let dict = pick(flags.dict.clone(), file.dict.clone())
        .map(|d| d.parse::<Dictionary>())
        .transpose()?;
    let method = match pick(flags.method.clone(), file.method.clone()) {
        Some(m) => m.parse::<Method>()?,
        None if dict.as_ref().is_some_and(|d| *d != Dictionary::Identity) => Method::Edmd,
        None if algo == Some(AlgorithmId::Algo5) => Method::Edmd,
        None => Method::Dmd,
    };
    let mut settings = match method {
        Method::Dmd => {
            if dict.as_ref().is_some_and(|d| *d != Dictionary::Identity) {
                return Err(config_err("dmd uses the identity dictionary; pass --method edmd"));
            }
            DecompositionSettings::dmd()
        }
        Method::Edmd => DecompositionSettings::edmd(dict.unwrap_or(Dictionary::Monomials { max_degree: 5 })),
    };
    settings.rank = match (pick(flags.rank, file.rank), pick(flags.tau, file.tau)) {
        (Some(r), None) => RankPolicy::Fixed(r),
        (None, Some(t)) => RankPolicy::Relative(t),
        (None, None) => RankPolicy::default(),
        (Some(_), Some(_)) => return Err(config_err("give either rank or tau, not both")),
    };
    if let Some(c) = pick(flags.centering.clone(), file.centering.clone()) {
        settings.centering = match c.as_str() {
            "auto" => CenteringPolicy::Auto,
            "none" => CenteringPolicy::None,
            "fixed-point" => CenteringPolicy::FixedPoint,
            other => return Err(config_err(format!("unknown centering `{other}`"))),
        };
    }
    Ok(settings)
}

fn triangular_side(m: usize) -> Option<usize> {
    (1..=m).find(|n| n * (n + 1) / 2 == m)
}

fn prox_oracle(kind: OracleKind, gamma: f64, m: usize) -> CliResult<Oracle> {
    match kind {
        OracleKind::ProxL2 => Ok(Oracle::prox_l2(gamma, m)?),
        OracleKind::ProxNegLogDet => {
            let n = triangular_side(m)
                .ok_or_else(|| config_err(format!("logdet blocks need triangular length n(n+1)/2, got {m}")))?;
            Ok(Oracle::prox_neglogdet(gamma, n)?)
        }
        k => Err(config_err(format!("{} is not a proximal oracle", k.name()))),
    }
}

fn corpus_map(args: &RunArgs, file: &FileConfig, n: u8, x0: &[f64]) -> CliResult<IterativeMap> {
    let id = AlgorithmId::from_number(n)?;
    let gamma = pick(args.gamma, file.gamma).unwrap_or(1.0);
    let f_name = pick(args.oracle.clone(), file.oracle.clone());
    let g_name = pick(args.oracle_g.clone(), file.oracle_g.clone());
    if matches!(id, AlgorithmId::Algo6 | AlgorithmId::Algo7) {
        let blocks = if id == AlgorithmId::Algo6 { 3 } else { 2 };
        if !x0.len().is_multiple_of(blocks) || x0.is_empty() {
            return Err(config_err(format!("{id} needs x0 of length {blocks}m, got {}", x0.len())));
        }
        let m = x0.len() / blocks;
        let f = prox_oracle(parse_oracle(f_name.as_deref().unwrap_or("l2"))?, gamma, m)?;
        let g = prox_oracle(parse_oracle(g_name.as_deref().unwrap_or("l2"))?, gamma, m)?;
        return Ok(make_algorithm(id, f, Some(g))?);
    }
    if g_name.is_some() {
        return Err(config_err(format!("{id} takes a single oracle")));
    }
    let kind = parse_oracle(f_name.as_deref().unwrap_or("quad"))?;
    Ok(make_algorithm(id, Oracle::new(kind, gamma, 1)?, None)?)
}

fn format_complex(re: f64, im: f64) -> String {
    let sign = if im < 0.0 { '-' } else { '+' };
    format!("{re:.12} {sign} {:.12}i  |lambda| = {:.12}", im.abs(), re.hypot(im))
}

fn cmd_run(args: RunArgs, file: &FileConfig) -> CliResult<i32> {
    let cfg = run_config(&args.run, file)?;
    let algo_n = pick(args.algo, file.algo);
    let traj_path = pick(args.traj.clone(), file.traj.clone());
    let step_cmd = pick(args.step_cmd.clone(), file.step_cmd.clone());
    let sources = [algo_n.is_some(), traj_path.is_some(), step_cmd.is_some()];
    if sources.iter().filter(|s| **s).count() != 1 {
        return Err(config_err("give exactly one of --algo, --traj or --step-cmd"));
    }
    let x0 = pick(args.x0.clone(), file.x0.clone());
    let (traj, name, algo) = if let Some(path) = traj_path {
        let t = ingest_external_trajectory(&path, cfg.eps)?;
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("traj").to_string();
        (t, stem, None)
    } else {
        let x0 = x0.ok_or_else(|| config_err("--x0 is required"))?;
        let (map, name, algo) = match (algo_n, step_cmd) {
            (Some(n), _) => {
                let map = corpus_map(&args, file, n, &x0)?;
                (map, format!("algo{n}"), Some(AlgorithmId::from_number(n)?))
            }
            (None, Some(cmd)) => (step::external_map(&cmd, x0.len())?, "external".to_string(), None),
            (None, None) => unreachable!("checked above"),
        };
        (iterate(&map, &x0, &cfg)?, name, algo)
    };
    let settings = decomposition(&args.decomposition, file, algo)?;
    let spec = decompose_trajectory(&traj, &settings)?;
    let out = match pick(args.out.clone(), file.out.clone()) {
        Some(p) => p,
        None => pick(args.outdir.clone(), file.outdir.clone())
            .unwrap_or_else(default_outdir)
            .join(format!("{name}_spectrum.json")),
    };
    ensure_parent(&out)?;
    write_spectrum(&out, &spec)?;
    let principal = principal_eigenvalues(&spec, PrincipalSettings::for_spectrum(&spec));
    println!(
        "{} {} rank {}: {} eigenvalues, {} principal, reconstruction error {:.3e} ({:?} after {} states)",
        name,
        spec.method,
        spec.rank,
        spec.triplets.len(),
        principal.len(),
        spec.reconstruction_error,
        traj.status,
        traj.len()
    );
    for z in &principal {
        println!("  {}", format_complex(z.re, z.im));
    }
    println!("spectrum written to {}", out.display());
    Ok(0)
}

fn ensure_parent(path: &Path) -> CliResult<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    Ok(())
}

fn cmd_compare(args: CompareArgs, file: &FileConfig) -> CliResult<i32> {
    let a = read_spectrum(&args.a)?;
    let b = read_spectrum(&args.b)?;
    let mut settings = ComparisonSettings::for_pair(&a, &b);
    if let Some(e) = pick(args.eps_conj, file.eps_conj) {
        settings.eps_conj = e;
    }
    if let Some(e) = pick(args.eps_semi, file.eps_semi) {
        settings.eps_semi = e;
    }
    if args.keep_unit || file.keep_unit == Some(true) {
        settings.ignore_unit_constant = false;
    }
    if !(settings.eps_conj >= 0.0 && settings.eps_semi >= 0.0) {
        return Err(config_err("tolerances must be nonnegative"));
    }
    let cmp = classify(&a, &b, settings);
    let out = match pick(args.out.clone(), file.out.clone()) {
        Some(p) => p,
        None => pick(args.outdir.clone(), file.outdir.clone())
            .unwrap_or_else(default_outdir)
            .join("comparison.json"),
    };
    ensure_parent(&out)?;
    fs::write(&out, comparison_to_json(&cmp)?)?;
    let w = cmp.wasserstein.map_or("n/a".to_string(), |w| format!("{w:.3e}"));
    println!(
        "verdict {:?}: wasserstein {w}, principal sizes {} and {}",
        cmp.verdict,
        cmp.principal_a.len(),
        cmp.principal_b.len()
    );
    for d in &cmp.diagnostics {
        println!("  note: {d}");
    }
    println!("comparison written to {}", out.display());
    Ok(cmp.verdict.exit_code())
}

fn execution(sequential: bool, file: &FileConfig) -> Execution {
    if sequential || file.sequential == Some(true) {
        Execution::Sequential
    } else {
        Execution::default()
    }
}

fn cmd_sweep(args: SweepArgs, file: &FileConfig) -> CliResult<i32> {
    let oracle = parse_oracle(pick(args.oracle.clone(), file.oracle.clone()).as_deref().unwrap_or("quad"))?;
    let resolution = pick(args.resolution, file.resolution).unwrap_or(41);
    let outdir = pick(args.outdir.clone(), file.outdir.clone()).unwrap_or_else(default_outdir);
    let rep = run_sweep_preset(resolution, oracle, &outdir, execution(args.sequential, file))?;
    let s = &rep.stats;
    println!(
        "{} sweep {resolution}x{resolution}: min {:.3e}, median {:.3e}, max {:.3e}, max/min {:.3e}, {} cells above 10x median, {} failed",
        oracle.name(),
        s.min,
        s.median,
        s.max,
        s.max_over_min,
        s.above_10x_median,
        s.failed
    );
    println!("outputs written to {}", outdir.display());
    Ok(0)
}

fn cmd_reproduce(args: ReproduceArgs, file: &FileConfig) -> CliResult<i32> {
    let presets: Vec<PresetName> = if args.figure == "all" {
        PresetName::ALL.to_vec()
    } else {
        vec![args.figure.parse()?]
    };
    let opts = PresetOptions {
        resolution: pick(args.resolution, file.resolution).unwrap_or(41),
        oracle: pick(args.oracle.clone(), file.oracle.clone())
            .map(|o| parse_oracle(&o))
            .transpose()?,
        execution: execution(args.sequential, file),
    };
    if opts.resolution < 2 {
        return Err(config_err(format!("resolution must be at least 2, got {}", opts.resolution)));
    }
    let outdir = pick(args.outdir.clone(), file.outdir.clone()).unwrap_or_else(default_outdir);
    for p in presets {
        let report = run_preset(p, &outdir, &opts)?;
        for o in &report.manifest.outcomes {
            match (o.verdict, o.expected) {
                (Some(v), Some(e)) => println!("{p} {}: {v:?} (expected {e:?})", o.variant),
                _ => println!("{p} {}: {}", o.variant, o.summary),
            }
        }
        println!("{p} manifest: {}", report.manifest_path.display());
    }
    Ok(0)
}

fn dispatch(cli: Cli) -> CliResult<i32> {
    let file = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let name = match &cli.command {
        Command::Run(_) => "run",
        Command::Compare(_) => "compare",
        Command::Sweep(_) => "sweep",
        Command::Reproduce(_) => "reproduce",
    };
    file.check_command(name)?;
    match cli.command {
        Command::Run(a) => cmd_run(*a, &file),
        Command::Compare(a) => cmd_compare(a, &file),
        Command::Sweep(a) => cmd_sweep(a, &file),
        Command::Reproduce(a) => cmd_reproduce(a, &file),
    }
}

fn run(args: Vec<OsString>) -> CliResult<i32> {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return Ok(0);
        }
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("").trim_start_matches("error: ");
            return Err(CliError::Usage(first.to_string()));
        }
    };
    dispatch(cli)
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let code = match run(std::env::args_os().collect()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error kind={} message=\"{}\"", e.kind(), one_line(&e.message()));
            e.exit_code()
        }
    };
    std::process::exit(code);
}
