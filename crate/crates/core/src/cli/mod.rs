//! Command-line harness: configuration, dispatch and CSV output.
//!
//! Every parameter can come from a config file (`--config`, see
//! [`config`]) or from a flag of the same name; flags win. The output
//! directory is `--out`, else `$QNLS_OUT`, else the `out` key, else `out`.

pub mod commands;
pub mod config;
pub mod output;

use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use config::ConfigFile;
use output::{columns_help, Manifest, WrittenFile};

#[derive(Debug, Clone, Parser)]
#[command(name = "qnls", version, about = "Coupled quadratic Schrodinger laboratory")]
pub struct Cli {
    /// Config file of `key = value` lines with `[section]` headers.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides $QNLS_OUT and the `out` key).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for the parallel stages; results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Evolve random data and record mass and energy along the run.
    #[command(after_help = columns_help("simulate.csv", commands::SIMULATE_COLUMNS))]
    Simulate(EvolveArgs),
    /// Conservation drifts plus a self-convergence study of the splitting.
    #[command(after_help = format!(
        "{}\n{}",
        columns_help("conserve.csv", commands::CONSERVE_COLUMNS),
        columns_help("conserve_order.csv", commands::ORDER_COLUMNS)
    ))]
    Conserve(EvolveArgs),
    /// Modified-mass differences and one-window increments against the cutoff N.
    #[command(after_help = format!(
        "{}\n{}",
        columns_help("imethod_sweep.csv", commands::SWEEP_COLUMNS),
        columns_help("imethod_fit.csv", commands::FIT_COLUMNS)
    ))]
    ImethodSweep(SweepArgs),
    /// Scaling of the bilinear ratio on a counterexample family.
    #[command(after_help = format!(
        "{}\n{}",
        columns_help("certify.csv", commands::CERTIFY_COLUMNS),
        columns_help("endpoint.csv (alpha-small-endpoint only)", commands::ENDPOINT_COLUMNS)
    ))]
    Certify(CertifyArgs),
    /// Closed forms of the resonance functions on random tuples.
    #[command(after_help = columns_help("resonance.csv", commands::RESONANCE_COLUMNS))]
    ResonanceCheck(ResonanceArgs),
    /// Smallest admissible cutoff and the iteration parameters.
    #[command(after_help = columns_help("plan.csv", commands::PLAN_COLUMNS))]
    Plan(PlanArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Simulate(_) => "simulate",
            Command::Conserve(_) => "conserve",
            Command::ImethodSweep(_) => "imethod-sweep",
            Command::Certify(_) => "certify",
            Command::ResonanceCheck(_) => "resonance-check",
            Command::Plan(_) => "plan",
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct EvolveArgs {
    /// Grid points [256].
    #[arg(long)]
    pub n: Option<String>,
    /// Period, multiples of pi allowed [32pi].
    #[arg(long = "L")]
    pub length: Option<String>,
    /// Dispersion ratio in (0, 1) [0.25].
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<String>,
    /// Time step [1e-3].
    #[arg(long, allow_hyphen_values = true)]
    pub dt: Option<String>,
    /// Final time [1].
    #[arg(long = "T")]
    pub final_time: Option<String>,
    /// Record every `stride` steps [10].
    #[arg(long)]
    pub stride: Option<String>,
    /// L2 norm of each initial component [0.1].
    #[arg(long)]
    pub amplitude: Option<String>,
    /// Largest excited mode index [n/8].
    #[arg(long)]
    pub band: Option<String>,
    /// PRNG seed (xoshiro256**) [0].
    #[arg(long)]
    pub seed: Option<String>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SweepArgs {
    /// Grid points [1024].
    #[arg(long)]
    pub n: Option<String>,
    /// Period [2pi].
    #[arg(long = "L")]
    pub length: Option<String>,
    /// Dispersion ratio in (0, 1/2) [0.25].
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<String>,
    /// Smoothing order of the cutoff multiplier [0.5].
    #[arg(long, allow_hyphen_values = true)]
    pub rho: Option<String>,
    /// Comma-separated cutoffs [8,16,32,64].
    #[arg(long = "N")]
    pub cutoffs: Option<String>,
    /// Time step; keep dt times the largest resolved frequency squared below 1 [1e-5].
    #[arg(long, allow_hyphen_values = true)]
    pub dt: Option<String>,
    /// Window length [0.1].
    #[arg(long)]
    pub delta: Option<String>,
    /// `gaussian` or `power-law` [power-law].
    #[arg(long)]
    pub data: Option<String>,
    /// Power-law decay exponent of the spectrum [1].
    #[arg(long)]
    pub decay: Option<String>,
    /// H^s index used to normalise the data [0].
    #[arg(long, allow_hyphen_values = true)]
    pub s: Option<String>,
    /// H^s norm of each component [1].
    #[arg(long)]
    pub amplitude: Option<String>,
    /// Largest excited mode index [n/4].
    #[arg(long)]
    pub band: Option<String>,
    /// Drop the quadratic coupling [false].
    #[arg(long)]
    pub linear: Option<String>,
    /// PRNG seed [0].
    #[arg(long)]
    pub seed: Option<String>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct CertifyArgs {
    /// alpha-half, alpha-mid, alpha-small or alpha-small-endpoint [alpha-half].
    #[arg(long)]
    pub regime: Option<String>,
    /// Dispersion ratio (ignored for alpha-half) [0.625 mid, 0.25 small].
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<String>,
    /// Frequency width exponent of the alpha-half family [0].
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<String>,
    /// Output window constant of the alpha-small family [4].
    #[arg(long = "C")]
    pub c: Option<String>,
    /// Level of the endpoint family [1].
    #[arg(long)]
    pub m: Option<String>,
    /// Sobolev index [-0.25].
    #[arg(long, allow_hyphen_values = true)]
    pub s: Option<String>,
    /// Modulation index [0.5].
    #[arg(long, allow_hyphen_values = true)]
    pub b: Option<String>,
    /// Comma-separated dyadic N [64,128,256,512,1024].
    #[arg(long = "N")]
    pub ns: Option<String>,
    /// Gauss panels per interval [16].
    #[arg(long)]
    pub panels: Option<String>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ResonanceArgs {
    /// Comma-separated dispersion ratios [0.25,0.5,0.625].
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<String>,
    /// Random tuples per check [10000].
    #[arg(long)]
    pub samples: Option<String>,
    /// PRNG seed [0].
    #[arg(long)]
    pub seed: Option<String>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct PlanArgs {
    /// small-alpha or mid-alpha [small-alpha].
    #[arg(long)]
    pub regime: Option<String>,
    /// Smoothing order [0.5 small, 0.2 mid].
    #[arg(long, allow_hyphen_values = true)]
    pub rho: Option<String>,
    /// Target time [10].
    #[arg(long = "T0")]
    pub t0: Option<String>,
    /// Window exponent mu = N^theta, mid-alpha only [0.1].
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<String>,
    /// Loss in the exponent of lambda [0.01].
    #[arg(long, allow_hyphen_values = true)]
    pub eps: Option<String>,
    /// Loss in the decay exponent [0.01].
    #[arg(long)]
    pub eps_prime: Option<String>,
    /// Loss in the growth exponent [0.01].
    #[arg(long)]
    pub eps_second: Option<String>,
    /// Factor behind "much less than" [100].
    #[arg(long)]
    pub margin: Option<String>,
    /// Window length, small-alpha only [1].
    #[arg(long)]
    pub delta: Option<String>,
    /// Constant of the per-window increment [1].
    #[arg(long = "C")]
    pub c: Option<String>,
    /// Total increment budget [0.1].
    #[arg(long)]
    pub eps0: Option<String>,
}

/// Resolves parameters from flag, config file and default, in that order,
/// and echoes what was used.
pub struct Resolver<'a> {
    section: &'static str,
    file: Option<&'a ConfigFile>,
    echo: Vec<(String, String)>,
}

impl<'a> Resolver<'a> {
    pub fn new(section: &'static str, file: Option<&'a ConfigFile>) -> Self {
        Self {
            section,
            file,
            echo: Vec::new(),
        }
    }

    pub fn value<T>(
        &mut self,
        key: &str,
        flag: &Option<String>,
        default: &str,
        parse: impl Fn(&str) -> std::result::Result<T, String>,
    ) -> Result<T> {
        let (raw, v) = if let Some(f) = flag {
            let v = parse(f).map_err(|message| Error::Config {
                location: format!("--{key}"),
                message,
            })?;
            (f.clone(), v)
        } else if let Some(v) = self.file.map(|c| c.get_with(self.section, key, &parse)).transpose()?.flatten() {
            (self.file.and_then(|c| c.raw(self.section, key)).unwrap_or_default().to_string(), v)
        } else {
            let v = parse(default).map_err(|message| Error::Config {
                location: format!("default of `{key}`"),
                message,
            })?;
            (default.to_string(), v)
        };
        self.echo.push((key.to_string(), raw));
        Ok(v)
    }

    pub fn echo(self) -> Vec<(String, String)> {
        self.echo
    }
}

pub fn parse_from_str<T: std::str::FromStr>(s: &str) -> std::result::Result<T, String>
where
    T::Err: std::fmt::Display,
{
    s.trim().parse::<T>().map_err(|e| format!("cannot parse `{s}`: {e}"))
}

/// What one invocation produced.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub manifest: Manifest,
    pub manifest_path: PathBuf,
    /// Human-readable report for stdout.
    pub report: String,
}

impl RunOutcome {
    pub fn files(&self) -> &[WrittenFile] {
        &self.manifest.files
    }
}

pub fn output_dir(cli: &Cli, file: Option<&ConfigFile>) -> PathBuf {
    if let Some(p) = &cli.out {
        return p.clone();
    }
    if let Some(p) = std::env::var_os(output::OUT_ENV).filter(|p| !p.is_empty()) {
        return PathBuf::from(p);
    }
    if let Some(p) = file.and_then(|c| c.raw("", "out")) {
        return PathBuf::from(p);
    }
    PathBuf::from("out")
}

pub fn run(cli: &Cli) -> Result<RunOutcome> {
    match cli.threads {
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t.max(1))
                .build()
                .map_err(|e| Error::Parameter(format!("cannot build a pool of {t} threads: {e}")))?;
            pool.install(|| run_inner(cli))
        }
        None => run_inner(cli),
    }
}

fn run_inner(cli: &Cli) -> Result<RunOutcome> {
    let start = Instant::now();
    let file = cli.config.as_deref().map(ConfigFile::load).transpose()?;
    let dir = output_dir(cli, file.as_ref());
    let section = cli.command.name();
    let mut r = Resolver::new(section, file.as_ref());
    let (files, summary, report) = match &cli.command {
        Command::Simulate(a) => commands::simulate(a, &mut r, &dir)?,
        Command::Conserve(a) => commands::conserve(a, &mut r, &dir)?,
        Command::ImethodSweep(a) => commands::imethod_sweep(a, &mut r, &dir)?,
        Command::Certify(a) => commands::certify(a, &mut r, &dir)?,
        Command::ResonanceCheck(a) => commands::resonance_check(a, &mut r, &dir)?,
        Command::Plan(a) => commands::plan(a, &mut r, &dir)?,
    };
    let config = r.echo();
    if let Some(c) = &file {
        let known: Vec<&str> = config.iter().map(|(k, _)| k.as_str()).chain(["out"]).collect();
        let unknown = c.unknown_keys(section, &known);
        if !unknown.is_empty() {
            return Err(Error::Config {
                location: cli.config.as_ref().map(|p| p.display().to_string()).unwrap_or_default(),
                message: format!("unknown keys for `{section}`: {}", unknown.join(", ")),
            });
        }
    }
    let manifest = Manifest {
        command: section.to_string(),
        config,
        files,
        summary,
        wall_seconds: start.elapsed().as_secs_f64(),
    };
    let manifest_path = manifest.write(&dir)?;
    Ok(RunOutcome {
        manifest,
        manifest_path,
        report,
    })
}
