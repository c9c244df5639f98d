//! Command-line front end: `tra decide` for one pair, `tra bench` for sweeps
//! and real-pair benchmarks.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::bench::{
    load_pairs, read_columns, record_kv, run_benchmark, summarize_groups, summary_csv, BenchInput,
    RECORD_HEADER, SUMMARY_HEADER,
};
use crate::config::{run_method, RunConfig};
use crate::error::{Error, Result};
use crate::sample::PairSample;
use crate::scoring::Method;
use crate::synth::{sweep_grid, ScenarioKind, N_GRID};

#[derive(Debug, Parser)]
#[command(
    name = "tra",
    version,
    about = "Bivariate causal direction from residual-cloud geometry"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide the direction of a single pair.
    Decide(DecideArgs),
    /// Run methods over synthetic scenarios or a directory of pairs.
    Bench(BenchArgs),
}

/// Options shared by both subcommands. Unset flags fall back to `--config`,
/// then to built-in defaults.
#[derive(Debug, Args, Default)]
pub struct CommonArgs {
    /// Flat key=value config file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub kappa: Option<f64>,
    #[arg(long)]
    pub cbeta: Option<f64>,
    #[arg(long)]
    pub folds: Option<usize>,
    /// Bootstrap replicates for TRA-C.
    #[arg(long)]
    pub boot: Option<usize>,
    /// Level for both the stability threshold and TRA-C.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Stability subsample count.
    #[arg(long = "stability-R")]
    pub stability_r: Option<usize>,
    /// Stability subsample fraction.
    #[arg(long)]
    pub frac: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub max_samples: Option<usize>,
    /// Worker thread cap.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Report wall-clock times (makes outputs run-dependent).
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Args)]
pub struct DecideArgs {
    /// tra, tras or trac.
    #[arg(long)]
    pub method: Option<String>,
    /// Whitespace- or comma-separated numeric columns.
    #[arg(long)]
    pub input: PathBuf,
    /// 1-based column holding X.
    #[arg(long, default_value_t = 1)]
    pub x: usize,
    /// 1-based column holding Y.
    #[arg(long, default_value_t = 2)]
    pub y: usize,
    /// Also write the report to this file.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Comma-separated methods.
    #[arg(long, value_delimiter = ',')]
    pub method: Vec<String>,
    /// Synthetic scenario kind.
    #[arg(long, conflicts_with = "pairs")]
    pub kind: Option<String>,
    /// Comma-separated sample sizes.
    #[arg(long, value_delimiter = ',')]
    pub n: Vec<usize>,
    /// Comma-separated stress parameter values.
    #[arg(long, value_delimiter = ',')]
    pub param: Vec<f64>,
    #[arg(long, default_value_t = 1)]
    pub reps: usize,
    /// Use the default n grid and stress grid for unset axes.
    #[arg(long)]
    pub sweep: bool,
    /// Directory of pair files.
    #[arg(long, requires = "meta")]
    pub pairs: Option<PathBuf>,
    /// Pair metadata file.
    #[arg(long, requires = "pairs")]
    pub meta: Option<PathBuf>,
    /// Output directory for records and summary.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub common: CommonArgs,
}

fn resolve(common: &CommonArgs, method: Option<&str>) -> Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(p) => RunConfig::from_file(p)?,
        None => RunConfig::default(),
    };
    if let Some(m) = method {
        cfg.method = m.parse()?;
    }
    if let Some(v) = common.kappa {
        cfg.pipeline.window.kappa = v;
    }
    if let Some(v) = common.cbeta {
        cfg.pipeline.window.c_beta = v;
    }
    if let Some(v) = common.folds {
        cfg.pipeline.folds = v;
    }
    if let Some(v) = common.boot {
        cfg.trac.b = v;
    }
    if let Some(v) = common.alpha {
        cfg.threshold.alpha = v;
        cfg.trac.alpha = v;
    }
    if let Some(v) = common.stability_r {
        cfg.threshold.r = v;
    }
    if let Some(v) = common.frac {
        cfg.threshold.fraction = v;
    }
    if let Some(v) = common.seed {
        cfg.seed = v;
    }
    if let Some(v) = common.max_samples {
        cfg.max_samples = v;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |v| v.to_string())
}

fn cmd_decide(args: &DecideArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let cfg = resolve(&args.common, args.method.as_deref())?;
    if args.x == 0 || args.y == 0 || args.x == args.y {
        return Err(Error::InvalidConfig(
            "--x and --y must be distinct 1-based columns".into(),
        ));
    }
    let (x, y) = read_columns(&args.input, args.x, args.y)?;
    if x.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "{} usable rows in {}",
            x.len(),
            args.input.display()
        )));
    }
    let mut sample = PairSample::with_source(x, y, args.input.display().to_string())?;
    if sample.len() > cfg.max_samples {
        let mut rng = crate::rng::rng_from_seed(cfg.seed);
        let keep = crate::rng::subsample_indices(&mut rng, sample.len(), cfg.max_samples);
        sample = sample.select(&keep);
    }
    let start = Instant::now();
    let outcome = run_method(&sample, cfg.method, &cfg)?;
    let seconds = start.elapsed().as_secs_f64();
    let mut report = format!("# config: {}\n", cfg.echo());
    let d = &outcome.decision;
    let lines = [
        ("method", cfg.method.to_string()),
        ("verdict", d.verdict.to_string()),
        ("score", d.score.to_string()),
        ("tau", fmt_opt(outcome.tau)),
        ("p_value", fmt_opt(outcome.p_value)),
        ("rho_hat", fmt_opt(outcome.rho_hat)),
        ("tp_forward", outcome.score.tp_forward.to_string()),
        ("tp_reverse", outcome.score.tp_reverse.to_string()),
        ("n", sample.len().to_string()),
        ("checksum", sample.checksum()),
    ];
    for (k, v) in lines {
        report.push_str(&format!("{k}={v}\n"));
    }
    if args.common.timing {
        report.push_str(&format!("seconds={seconds}\n"));
    } else {
        let _ = writeln!(err, "elapsed {seconds:.3}s");
    }
    out.write_all(report.as_bytes())
        .map_err(|e| Error::io("<stdout>", e))?;
    if let Some(p) = &args.out {
        write_file(p, &report)?;
    }
    Ok(())
}

fn bench_inputs(args: &BenchArgs, cfg: &RunConfig) -> Result<Vec<BenchInput>> {
    match (&args.kind, &args.pairs, &args.meta) {
        (Some(kind), None, _) => {
            let kind: ScenarioKind = kind.parse()?;
            let ns = match (args.n.is_empty(), args.sweep) {
                (false, _) => args.n.clone(),
                (true, true) => N_GRID.to_vec(),
                (true, false) => vec![250],
            };
            let params = match (args.param.is_empty(), args.sweep) {
                (false, _) => args.param.clone(),
                (true, true) => kind.default_grid(),
                (true, false) => vec![kind.default_params()[kind.stress_param()]],
            };
            Ok(sweep_grid(kind, &ns, &params, args.reps, cfg.seed)?
                .into_iter()
                .map(BenchInput::Scenario)
                .collect())
        }
        (None, Some(dir), Some(meta)) => Ok(load_pairs(dir, meta, cfg.max_samples, cfg.seed)?
            .into_iter()
            .map(BenchInput::Pair)
            .collect()),
        _ => Err(Error::InvalidConfig(
            "bench needs either --kind or both --pairs and --meta".into(),
        )),
    }
}

fn cmd_bench(args: &BenchArgs, out: &mut dyn Write) -> Result<()> {
    let cfg = resolve(&args.common, None)?;
    let methods: Vec<Method> = if args.method.is_empty() {
        vec![cfg.method]
    } else {
        args.method
            .iter()
            .map(|m| m.parse())
            .collect::<Result<_>>()?
    };
    let inputs = bench_inputs(args, &cfg)?;
    let timing = args.common.timing;
    let echo = format!(
        "# config: {} methods={}\n",
        cfg.echo(),
        methods
            .iter()
            .map(|m| m.name())
            .collect::<Vec<_>>()
            .join(",")
    );
    let mut csv = Vec::new();
    writeln!(csv, "{}", echo.trim_end()).unwrap();
    writeln!(csv, "{RECORD_HEADER}").unwrap();
    let records = run_benchmark(&inputs, &methods, &cfg, &mut csv, timing)?;

    let mut summary = echo.clone();
    summary.push_str(SUMMARY_HEADER);
    summary.push('\n');
    for ((m, g), s) in summarize_groups(&records) {
        summary.push_str(&summary_csv(m, &g, &s));
        summary.push('\n');
    }
    if let Some(dir) = &args.out {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        write_file(&dir.join("records.csv"), std::str::from_utf8(&csv).unwrap())?;
        let mut kv = echo.clone();
        for r in &records {
            kv.push_str(&record_kv(r, timing));
            kv.push('\n');
        }
        write_file(&dir.join("records.txt"), &kv)?;
        write_file(&dir.join("summary.csv"), &summary)?;
    }
    out.write_all(summary.as_bytes())
        .map_err(|e| Error::io("<stdout>", e))?;
    Ok(())
}

/// Run the CLI with explicit arguments and streams; returns the exit code.
/// 0 for any verdict (including abstain), 2 for usage, input or config errors.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            if code == 0 {
                let _ = out.write_all(text.as_bytes());
            } else {
                let _ = err.write_all(text.as_bytes());
            }
            return code;
        }
    };
    let threads = match &cli.command {
        Command::Decide(a) => a.common.threads,
        Command::Bench(a) => a.common.threads,
    };
    let (mut out_buf, mut err_buf) = (Vec::new(), Vec::new());
    let mut exec = || match &cli.command {
        Command::Decide(a) => cmd_decide(a, &mut out_buf, &mut err_buf),
        Command::Bench(a) => cmd_bench(a, &mut out_buf),
    };
    let outcome = match threads {
        Some(0) => Err(Error::InvalidConfig("--threads must be >= 1".into())),
        Some(t) => match rayon::ThreadPoolBuilder::new().num_threads(t).build() {
            Ok(pool) => pool.install(exec),
            Err(e) => Err(Error::InvalidConfig(format!("thread pool: {e}"))),
        },
        None => exec(),
    };
    let _ = out.write_all(&out_buf);
    let _ = err.write_all(&err_buf);
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            2
        }
    }
}
