//! The `torus-lab` command line: config-driven runs that write CSV tables,
//! an optional SVG, and a manifest into an output directory.
//!
//! Exit codes: 0 success, 1 check failure, 2 config error, 3 capacity or
//! precision refusal.

mod report;
mod verify;

pub use report::{check_manifest, error_plot_svg, sha256_hex, RunManifest, Table, MANIFEST_FILE};
pub use verify::{random_matrix, random_vector, verify_lemmas, CheckRow, FAMILIES};

use clap::{Args, Parser, Subcommand};
use num_bigint::BigInt;
use rayon::prelude::*;
use std::ffi::OsString;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use crate::config::{RunConfig, VerifyConfig};
use crate::error::LabError;
use crate::measures::{decay_fit, derive_seed, max_local, sample_rng, DecayOutcome};
use crate::orbit::psi_cumulative;
use crate::stats::{
    counting_experiment, del_series_term, dichotomy_experiment, pair_correlation, weyl_sum, with_threads,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_REFUSAL: i32 = 3;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Refusal(String),
    Check(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Check(_) => EXIT_CHECK,
            CliError::Config(_) | CliError::Io(_) => EXIT_CONFIG,
            CliError::Refusal(_) => EXIT_REFUSAL,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Refusal(m) => write!(f, "refused: {m}"),
            CliError::Check(m) => write!(f, "check failed: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<LabError> for CliError {
    fn from(e: LabError) -> Self {
        match e {
            LabError::Capacity { .. } | LabError::Precision { .. } => CliError::Refusal(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "torus-lab",
    version,
    about = "Shrinking-target experiments for integer matrix orbits on the torus"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run the exact and numerical check suite.
    VerifyLemmas(RunArgs),
    /// Counting experiment: samples.csv, fit.csv, variance.csv.
    Count(RunArgs),
    /// Weyl averages along sampled orbits.
    Weyl(RunArgs),
    /// Fourier decay fits of the configured measure.
    Decay(RunArgs),
    /// Convergent/divergent regime classification.
    Dichotomy(RunArgs),
    /// Joint hit frequencies for index pairs.
    Pairs(RunArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::VerifyLemmas(_) => "verify-lemmas",
            Command::Count(_) => "count",
            Command::Weyl(_) => "weyl",
            Command::Decay(_) => "decay",
            Command::Dichotomy(_) => "dichotomy",
            Command::Pairs(_) => "pairs",
        }
    }

    fn args(&self) -> &RunArgs {
        match self {
            Command::VerifyLemmas(a)
            | Command::Count(a)
            | Command::Weyl(a)
            | Command::Decay(a)
            | Command::Dichotomy(a)
            | Command::Pairs(a) => a,
        }
    }

    fn outputs(&self, plot: bool) -> Vec<&'static str> {
        match self {
            Command::VerifyLemmas(_) => vec!["verify.csv"],
            Command::Count(_) if plot => vec!["samples.csv", "fit.csv", "variance.csv", "plot.svg"],
            Command::Count(_) => vec!["samples.csv", "fit.csv", "variance.csv"],
            Command::Weyl(_) => vec!["weyl.csv", "del.csv"],
            Command::Decay(_) => vec!["decay.csv", "decay_values.csv"],
            Command::Dichotomy(_) => vec!["dichotomy.csv", "summary.csv"],
            Command::Pairs(_) => vec!["pairs.csv", "pairs_summary.csv"],
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct RunArgs {
    /// JSON config file (optional for verify-lemmas).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long)]
    pub out: PathBuf,
    /// Also write an SVG plot (count).
    #[arg(long)]
    pub plot: bool,
    /// Master seed; overrides the config's seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads.
    #[arg(long, env = "TORUS_LAB_THREADS")]
    pub threads: Option<usize>,
    /// Verify an existing output directory against the config instead of running.
    #[arg(long)]
    pub check: bool,
}

/// Parse arguments, run, and return the process exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("torus-lab {}: {e}", cli.command.name());
            e.exit_code()
        }
    }
}

pub fn run(cmd: &Command) -> Result<(), CliError> {
    let args = cmd.args();
    let bytes = match &args.config {
        Some(p) => fs::read(p).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?,
        None if matches!(cmd, Command::VerifyLemmas(_)) => Vec::new(),
        None => return Err(CliError::Config("--config is required".into())),
    };
    if args.check {
        let m = check_manifest(&args.out, cmd.name(), &bytes)?;
        println!(
            "{}: manifest consistent (digest {})",
            args.out.display(),
            m.config_sha256
        );
        return Ok(());
    }
    let text = std::str::from_utf8(&bytes).map_err(|e| CliError::Config(format!("config is not UTF-8: {e}")))?;
    let rc = if bytes.is_empty() {
        None
    } else {
        Some(RunConfig::from_json(text)?)
    };
    let seed = match args.seed {
        Some(s) => s,
        None => rc.as_ref().map(|c| c.seed()).transpose()?.flatten().unwrap_or(0),
    };
    let ctx = Context {
        out: &args.out,
        config_path: args.config.as_deref(),
        bytes: &bytes,
        seed,
        threads: args.threads,
        plot: args.plot,
        outputs: cmd.outputs(args.plot),
        command: cmd.name(),
    };
    let need = || rc.as_ref().ok_or_else(|| CliError::Config("empty config".into()));
    match cmd {
        Command::VerifyLemmas(_) => cmd_verify(&ctx, rc.as_ref().and_then(|c| c.verify.clone()).unwrap_or_default()),
        Command::Count(_) => cmd_count(&ctx, need()?),
        Command::Weyl(_) => cmd_weyl(&ctx, need()?),
        Command::Decay(_) => cmd_decay(&ctx, need()?),
        Command::Dichotomy(_) => cmd_dichotomy(&ctx, need()?),
        Command::Pairs(_) => cmd_pairs(&ctx, need()?),
    }
}

struct Context<'a> {
    out: &'a Path,
    config_path: Option<&'a Path>,
    bytes: &'a [u8],
    seed: u64,
    threads: Option<usize>,
    plot: bool,
    outputs: Vec<&'static str>,
    command: &'static str,
}

impl Context<'_> {
    /// Create the output directory and write the manifest.
    fn begin(&self) -> Result<(), CliError> {
        fs::create_dir_all(self.out).map_err(|e| CliError::Io(format!("{}: {e}", self.out.display())))?;
        RunManifest::new(self.command, self.config_path, self.bytes, self.seed, &self.outputs).write(self.out)
    }

    fn table(&self, name: &str, header: &[&str]) -> Table {
        Table::new(self.out, name, header)
    }
}

fn f(v: f64) -> String {
    v.to_string()
}

fn cmd_verify(ctx: &Context, cfg: VerifyConfig) -> Result<(), CliError> {
    if !(cfg.tolerance >= 0.0) {
        return Err(CliError::Config("verify.tolerance must be nonnegative".into()));
    }
    ctx.begin()?;
    let rows = verify_lemmas(&cfg, ctx.seed)?;
    let mut t = ctx.table(
        "verify.csv",
        &["family", "trial", "instance", "value", "tolerance", "passed"],
    );
    for r in &rows {
        t.row([
            r.family.to_string(),
            r.trial.to_string(),
            r.instance.clone(),
            f(r.value),
            f(r.tolerance),
            r.passed.to_string(),
        ]);
    }
    t.finish()?;
    for fam in FAMILIES {
        let (n, ok) = rows
            .iter()
            .filter(|r| r.family == fam)
            .fold((0, 0), |(n, ok), r| (n + 1, ok + r.passed as usize));
        println!("{fam}: {ok}/{n} passed");
    }
    let failed: Vec<&CheckRow> = rows.iter().filter(|r| !r.passed).collect();
    for r in &failed {
        eprintln!(
            "FAIL {} trial {}: {} (value {}, tolerance {})",
            r.family, r.trial, r.instance, r.value, r.tolerance
        );
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Check(format!(
            "{} of {} checks failed",
            failed.len(),
            rows.len()
        )))
    }
}

fn cmd_count(ctx: &Context, rc: &RunConfig) -> Result<(), CliError> {
    let cfg = rc.experiment(Some(ctx.seed), ctx.threads)?;
    ctx.begin()?;
    let rep = counting_experiment(&cfg)?;
    let mut t = ctx.table(
        "samples.csv",
        &["sample_id", "seed", "N", "R", "Psi", "err", "normalized_err"],
    );
    for r in &rep.records {
        t.row([
            r.sample_id.to_string(),
            r.seed.to_string(),
            r.n.to_string(),
            r.r.to_string(),
            f(r.psi),
            f(r.err),
            f(r.normalized_err),
        ]);
    }
    t.finish()?;
    let mut t = ctx.table("fit.csv", &["slope", "intercept", "r_squared", "n_points"]);
    t.row([
        f(rep.fit.slope),
        f(rep.fit.intercept),
        f(rep.fit.r_squared),
        rep.fit.n_points.to_string(),
    ]);
    t.finish()?;
    let mut t = ctx.table("variance.csv", &["N", "Psi", "mean_sq_err", "phi_sum", "ratio"]);
    for v in &rep.variance {
        t.row([v.n.to_string(), f(v.psi), f(v.mean_sq_err), f(v.phi_sum), f(v.ratio())]);
    }
    t.finish()?;
    if ctx.plot {
        let svg = error_plot_svg(&rep.checkpoint_psi, &rep.checkpoint_errors, cfg.exponent());
        report::write_file(&ctx.out.join("plot.svg"), svg.as_bytes())?;
    }
    println!(
        "gap K >= {:.6}; slope {:.4} (reference {:.4}) over {} checkpoints",
        rep.gap,
        rep.fit.slope,
        cfg.exponent(),
        rep.fit.n_points
    );
    Ok(())
}

fn precision_bits(rc: &RunConfig, n: usize) -> Result<u64, CliError> {
    let required = 2 * n as u64 + 64;
    let have = rc.precision_bits.unwrap_or(required);
    if have < required && !rc.allow_low_precision {
        return Err(LabError::Precision { have, required }.into());
    }
    Ok(have)
}

fn fmt_k(k: &[BigInt]) -> String {
    let parts: Vec<String> = k.iter().map(|v| v.to_string()).collect();
    format!("({})", parts.join(","))
}

fn cmd_weyl(ctx: &Context, rc: &RunConfig) -> Result<(), CliError> {
    let m = rc.measure()?;
    let seq = rc.sequence()?;
    if m.dim() != seq.dim() {
        return Err(LabError::DimensionMismatch {
            expected: seq.dim(),
            got: m.dim(),
        }
        .into());
    }
    let ks = rc.weyl_frequencies(seq.dim())?;
    let n = rc.steps()?;
    let samples = rc.samples()?;
    let bits = precision_bits(rc, n)?;
    seq.validate_prefix(n)?;
    let del = rc.weyl.as_ref().is_some_and(|w| w.del);
    ctx.begin()?;
    let rows = with_threads(ctx.threads, || {
        (0..samples as u64)
            .into_par_iter()
            .map(|id| {
                let x = m.sample(&mut sample_rng(ctx.seed, id), bits);
                ks.iter()
                    .map(|k| weyl_sum(&x, &seq, k, n).map(|s| (id, k, s)))
                    .collect::<crate::Result<Vec<_>>>()
            })
            .collect::<crate::Result<Vec<_>>>()
    })??;
    let mut t = ctx.table("weyl.csv", &["sample_id", "seed", "k", "N", "re", "im", "abs"]);
    for (id, k, s) in rows.into_iter().flatten() {
        t.row([
            id.to_string(),
            derive_seed(ctx.seed, id).to_string(),
            fmt_k(k),
            n.to_string(),
            f(s.re),
            f(s.im),
            f(s.norm()),
        ]);
    }
    t.finish()?;
    let mut t = ctx.table("del.csv", &["k", "N", "value"]);
    if del {
        for k in &ks {
            let v = with_threads(ctx.threads, || del_series_term(&m, &seq, k, n))??;
            t.row([fmt_k(k), n.to_string(), f(v)]);
        }
    }
    t.finish()
}

fn cmd_decay(ctx: &Context, rc: &RunConfig) -> Result<(), CliError> {
    let m = rc.measure()?;
    let dc = rc
        .decay
        .as_ref()
        .ok_or_else(|| CliError::Config("invalid argument `decay`: missing required section".into()))?;
    let models = rc.decay_models()?;
    let grid = dc.grid.values()?;
    let fits = models
        .iter()
        .map(|&model| decay_fit(&m, &grid, model, dc.window).map(|o| (model, o)))
        .collect::<crate::Result<Vec<_>>>()?;
    ctx.begin()?;
    let mut t = ctx.table(
        "decay.csv",
        &[
            "measure",
            "model",
            "slope",
            "intercept",
            "r_squared",
            "n_points",
            "status",
        ],
    );
    for (model, o) in fits {
        match o {
            DecayOutcome::Fit(fit) => t.row([
                m.name().to_string(),
                model.name().to_string(),
                f(fit.slope),
                f(fit.intercept),
                f(fit.r_squared),
                fit.n_points.to_string(),
                "fit".to_string(),
            ]),
            DecayOutcome::Degenerate { max_value } => t.row([
                m.name().to_string(),
                model.name().to_string(),
                String::new(),
                String::new(),
                String::new(),
                "0".to_string(),
                format!("degenerate (max {max_value})"),
            ]),
        }
    }
    t.finish()?;
    let mut t = ctx.table("decay_values.csv", &["t", "abs_transform"]);
    for &x in &grid {
        t.row([f(x), f(max_local(&m, x, dc.window))]);
    }
    t.finish()
}

fn cmd_dichotomy(ctx: &Context, rc: &RunConfig) -> Result<(), CliError> {
    let cfg = rc.experiment(Some(ctx.seed), ctx.threads)?;
    let regime = rc.regime()?;
    let n0 = rc.dichotomy.as_ref().and_then(|d| d.n0);
    ctx.begin()?;
    let s = dichotomy_experiment(&cfg, regime, n0)?;
    let mut t = ctx.table("dichotomy.csv", &["sample_id", "seed", "R", "last_hit"]);
    for r in &s.rows {
        t.row([
            r.sample_id.to_string(),
            r.seed.to_string(),
            r.r.to_string(),
            r.last_hit.map(|v| v.to_string()).unwrap_or_default(),
        ]);
    }
    t.finish()?;
    let mut t = ctx.table(
        "summary.csv",
        &[
            "regime",
            "N",
            "Psi",
            "max_R",
            "median_ratio",
            "hit_fraction",
            "n0",
            "settled_fraction",
            "verdict",
        ],
    );
    t.row([
        regime.name().to_string(),
        cfg.steps.to_string(),
        f(s.psi),
        s.max_r.to_string(),
        f(s.median_ratio),
        f(s.hit_fraction),
        s.n0.to_string(),
        f(s.settled_fraction),
        s.verdict.clone(),
    ]);
    t.finish()?;
    println!("{}", s.verdict);
    Ok(())
}

fn cmd_pairs(ctx: &Context, rc: &RunConfig) -> Result<(), CliError> {
    let m = rc.measure()?;
    let seq = rc.sequence()?;
    let target = rc.target()?;
    let pairs = rc.pair_list()?;
    let samples = rc.samples()?;
    ctx.begin()?;
    let rows = with_threads(ctx.threads, || {
        pair_correlation(&m, &seq, &target, &pairs, samples, ctx.seed)
    })??;
    let mut t = ctx.table("pairs.csv", &["m", "n", "estimate", "radius", "psi_product", "ratio"]);
    for r in &rows {
        t.row([
            r.m.to_string(),
            r.n.to_string(),
            f(r.estimate),
            f(r.radius),
            f(r.psi_product),
            f(r.ratio),
        ]);
    }
    t.finish()?;
    let top = pairs.iter().map(|&(a, b)| a.max(b)).max().unwrap_or(1);
    let total: f64 = rows.iter().map(|r| r.estimate).sum();
    let half = 0.5 * psi_cumulative(&target, top).total().powi(2);
    let mut t = ctx.table(
        "pairs_summary.csv",
        &["pairs", "sum_estimate", "half_psi_squared", "ratio"],
    );
    t.row([rows.len().to_string(), f(total), f(half), f(total / half)]);
    t.finish()
}
