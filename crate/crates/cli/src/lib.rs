//! Command-line front end: `fit`, `compare`, `simulate` and `diagnose`.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Deserialize;

use hiermc::diagnostics::{check_convergence, convergence_from_traces, ConvergenceReport};
use hiermc::io::{load_csv, samples_to_csv, write_csv, SamplesTable};
use hiermc::mcmc::{run_multi, SamplerConfig};
use hiermc::model::{Dataset, EffectKind, EffectPrior, Family, ModelSpec};
use hiermc::selection::{compare, quantile_pairs, residual_normal_correlation, FitReport};
use hiermc::simulate::{simulate_energy, simulate_loglog, SimEnergyConfig, SimLogLogConfig};
use hiermc::stats::RngStream;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_SAMPLER: i32 = 3;
pub const EXIT_NOT_CONVERGED: i32 = 4;

/// Stream id reserved for posterior-predictive replicates; chains use 0..n_chains.
pub const RESIDUAL_STREAM: u64 = 1 << 32;

pub const SEED_ENV: &str = "HIERMC_SEED";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Sampler(String),
    #[error("convergence check failed for: {0}")]
    NotConverged(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Data(_) => EXIT_DATA,
            CliError::Sampler(_) => EXIT_SAMPLER,
            CliError::NotConverged(_) => EXIT_NOT_CONVERGED,
        }
    }
}

fn data_err(e: impl std::fmt::Display) -> CliError {
    CliError::Data(e.to_string())
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), CliError> {
    fs::write(path, contents)
        .map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))
}

#[derive(Debug, Parser)]
#[command(
    name = "hiermc",
    version,
    about = "Hierarchical Bayesian regression of reported intake on measured expenditure"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit one model and write samples.csv, report.json, residuals.csv, convergence.txt
    Fit(FitArgs),
    /// Render the comparison table from fit directories, or fit every model cell first
    Compare(CompareArgs),
    /// Write a synthetic dataset
    #[command(subcommand)]
    Simulate(SimulateCommand),
    /// Recompute convergence and residual diagnostics for a fit directory
    Diagnose(DiagnoseArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Normal,
    Lognormal,
    Gamma,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Normal => Family::Normal,
            FamilyArg::Lognormal => Family::LogNormal,
            FamilyArg::Gamma => Family::Gamma,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EffectArg {
    None,
    Additive,
    /// measurement error for normal/gamma, multiplicative for lognormal
    Model3,
    Measerr,
    Multiplicative,
}

impl EffectArg {
    fn resolve(self, family: Family) -> EffectKind {
        match self {
            EffectArg::None => EffectKind::None,
            EffectArg::Additive => EffectKind::Additive,
            EffectArg::Model3 => EffectKind::model_three(family),
            EffectArg::Measerr => EffectKind::MeasErr,
            EffectArg::Multiplicative => EffectKind::Multiplicative,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PriorArg {
    Gelman,
    GammaOd,
    UniformShape,
}

impl From<PriorArg> for EffectPrior {
    fn from(p: PriorArg) -> Self {
        match p {
            PriorArg::Gelman => EffectPrior::GelmanUniform,
            PriorArg::GammaOd => EffectPrior::GammaOverdispersed,
            PriorArg::UniformShape => EffectPrior::UniformShape,
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct SamplerArgs {
    #[arg(long)]
    pub iters: Option<usize>,
    #[arg(long)]
    pub burnin: Option<usize>,
    #[arg(long)]
    pub thin: Option<usize>,
    #[arg(long)]
    pub chains: Option<usize>,
    /// Falls back to the config file, then $HIERMC_SEED, then 0
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub init_jitter: Option<f64>,
    /// R-hat threshold for the convergence check (default 1.1)
    #[arg(long)]
    pub rhat_threshold: Option<f64>,
    /// TOML file with any of: iterations, burn_in, thin, chains, seed, init_jitter, rhat_threshold
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    iterations: Option<usize>,
    burn_in: Option<usize>,
    thin: Option<usize>,
    chains: Option<usize>,
    seed: Option<u64>,
    init_jitter: Option<f64>,
    rhat_threshold: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Effective {
    pub sampler: SamplerConfig,
    pub rhat_threshold: f64,
}

impl SamplerArgs {
    /// Flags, then config file, then `$HIERMC_SEED` (seed only), then defaults.
    pub fn resolve(&self) -> Result<Effective, CliError> {
        let file = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| {
                    CliError::Usage(format!("cannot read config {}: {e}", path.display()))
                })?;
                toml::from_str::<FileConfig>(&text)
                    .map_err(|e| CliError::Usage(format!("bad config {}: {e}", path.display())))?
            }
            None => FileConfig::default(),
        };
        let env_seed = match std::env::var(SEED_ENV) {
            Ok(s) => Some(s.trim().parse::<u64>().map_err(|_| {
                CliError::Usage(format!("{SEED_ENV}='{s}' is not an unsigned integer"))
            })?),
            Err(_) => None,
        };
        let d = SamplerConfig::default();
        let sampler = SamplerConfig {
            iterations: self.iters.or(file.iterations).unwrap_or(d.iterations),
            burn_in: self.burnin.or(file.burn_in).unwrap_or(d.burn_in),
            thin: self.thin.or(file.thin).unwrap_or(d.thin),
            n_chains: self.chains.or(file.chains).unwrap_or(d.n_chains),
            seed: self.seed.or(file.seed).or(env_seed).unwrap_or(d.seed),
            init_jitter: self
                .init_jitter
                .or(file.init_jitter)
                .unwrap_or(d.init_jitter),
        };
        sampler
            .validate()
            .map_err(|e| CliError::Usage(e.to_string()))?;
        let rhat_threshold = self.rhat_threshold.or(file.rhat_threshold).unwrap_or(1.1);
        if rhat_threshold.is_nan() || rhat_threshold <= 1.0 {
            return Err(CliError::Usage(format!(
                "rhat threshold {rhat_threshold} must exceed 1"
            )));
        }
        Ok(Effective {
            sampler,
            rhat_threshold,
        })
    }
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_enum)]
    pub family: FamilyArg,
    #[arg(long, value_enum)]
    pub effect: EffectArg,
    #[arg(long, value_enum)]
    pub effect_prior: Option<PriorArg>,
    #[arg(long)]
    pub no_interaction: bool,
    #[command(flatten)]
    pub sampler: SamplerArgs,
    /// Also write every subject effect to samples.csv
    #[arg(long)]
    pub dump_effects: bool,
    /// Exit with status 4 when any monitored R-hat reaches the threshold
    #[arg(long)]
    pub require_converged: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Fit directories containing report.json
    pub dirs: Vec<PathBuf>,
    /// Fit all nine model cells on this dataset (writes one directory per cell under --out)
    #[arg(long, requires = "out", conflicts_with = "dirs")]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also fit the prior-sensitivity variants
    #[arg(long, requires = "data")]
    pub variants: bool,
    #[arg(long, requires = "data")]
    pub dump_effects: bool,
    #[command(flatten)]
    pub sampler: SamplerArgs,
    /// Write the table as CSV as well
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum SimulateCommand {
    /// Power-law data `y = beta0 x^beta1 exp(e)`; y is written as ffq, x as dlw
    Loglog(LogLogArgs),
    /// Cohort data drawn from one model of the lattice
    Energy(EnergyArgs),
}

#[derive(Debug, Args)]
pub struct LogLogArgs {
    #[arg(long, default_value_t = 500)]
    pub n: usize,
    #[arg(long, default_value_t = 1.0)]
    pub beta0: f64,
    #[arg(long, default_value_t = 1.2)]
    pub beta1: f64,
    #[arg(long, default_value_t = 0.3)]
    pub sigma_e: f64,
    #[arg(long, default_value_t = 1.0)]
    pub x_lo: f64,
    #[arg(long, default_value_t = 10.0)]
    pub x_hi: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EnergyArgs {
    #[arg(long, default_value_t = 81)]
    pub n: usize,
    #[arg(long, value_enum, default_value = "normal")]
    pub family: FamilyArg,
    #[arg(long, value_enum, default_value = "none")]
    pub effect: EffectArg,
    /// Comma-separated beta0..beta4
    #[arg(long, value_delimiter = ',', num_args = 5, default_values_t = [500.0, 0.5, 10.0, 650.0, 0.0])]
    pub beta: Vec<f64>,
    /// SD of additive/measurement-error effects, or the multiplicative shape
    #[arg(long, default_value_t = 0.0)]
    pub effect_scale: f64,
    /// Outcome SD (normal), log-scale SD (lognormal) or coefficient of variation (gamma)
    #[arg(long, default_value_t = 200.0)]
    pub noise: f64,
    #[arg(long, default_value_t = 2400.0)]
    pub dlw_mean: f64,
    #[arg(long, default_value_t = 350.0)]
    pub dlw_sd: f64,
    #[arg(long, default_value_t = 0.0)]
    pub socdes_mean: f64,
    #[arg(long, default_value_t = 1.0)]
    pub socdes_sd: f64,
    #[arg(long, default_value_t = 0.5)]
    pub edu_prob: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Where to write the generating parameters as JSON
    #[arg(long)]
    pub truth: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct DiagnoseArgs {
    pub dir: PathBuf,
    #[arg(long, default_value_t = 1.1)]
    pub rhat_threshold: f64,
    #[arg(long)]
    pub require_converged: bool,
}

/// Result of a single model fit, as written to disk.
pub struct FitOutcome {
    pub report: FitReport,
    pub converged: bool,
}

fn convergence_text(conv: Option<&ConvergenceReport>, n_chains: usize) -> String {
    match conv {
        Some(c) => c.to_text(),
        None => format!("R-hat unavailable: {n_chains} chain(s); at least 2 are needed\n"),
    }
}

fn residuals_csv(residuals: &[Option<f64>]) -> String {
    let defined: Vec<f64> = residuals.iter().flatten().copied().collect();
    let mut s = String::from("quantile,residual\n");
    for (q, r) in quantile_pairs(&defined) {
        s.push_str(&format!("{q},{r}\n"));
    }
    s
}

/// Runs one fit and writes its four artifacts into `out`.
pub fn fit_to_dir(
    spec: &ModelSpec,
    data: &Dataset,
    eff: &Effective,
    dump_effects: bool,
    out: &Path,
) -> Result<FitOutcome, CliError> {
    let cfg = eff.sampler;
    let multi = run_multi(spec, data, &cfg);
    if !multi.faults.is_empty() {
        let msg: Vec<String> = multi.faults.iter().map(|f| f.to_string()).collect();
        return Err(CliError::Sampler(format!(
            "{}: {}",
            spec.label(),
            msg.join("; ")
        )));
    }
    let conv = if multi.chains.len() >= 2 {
        Some(
            check_convergence(&multi.chains, eff.rhat_threshold)
                .map_err(|e| CliError::Sampler(e.to_string()))?,
        )
    } else {
        None
    };
    let mut rng = RngStream::new(cfg.seed, RESIDUAL_STREAM);
    let report = FitReport::build(spec, data, &multi.chains, cfg, conv.clone(), &mut rng)
        .map_err(|e| CliError::Sampler(e.to_string()))?;

    fs::create_dir_all(out)
        .map_err(|e| CliError::Data(format!("cannot create {}: {e}", out.display())))?;
    write_file(
        &out.join("samples.csv"),
        samples_to_csv(&multi.chains, dump_effects),
    )?;
    let json = serde_json::to_string_pretty(&report).map_err(data_err)?;
    write_file(&out.join("report.json"), json)?;
    write_file(&out.join("residuals.csv"), residuals_csv(&report.residuals))?;
    write_file(
        &out.join("convergence.txt"),
        convergence_text(conv.as_ref(), cfg.n_chains),
    )?;
    let converged = conv.as_ref().is_some_and(|c| c.passed);
    Ok(FitOutcome { report, converged })
}

fn cmd_fit(args: &FitArgs) -> Result<(), CliError> {
    let family: Family = args.family.into();
    let mut spec = ModelSpec::new(family, args.effect.resolve(family))
        .map_err(|e| CliError::Usage(e.to_string()))?
        .with_interaction(!args.no_interaction);
    if let Some(p) = args.effect_prior {
        spec = spec
            .with_effect_prior(p.into())
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    let eff = args.sampler.resolve()?;
    let data = load_csv(&args.data).map_err(data_err)?;
    let outcome = fit_to_dir(&spec, &data, &eff, args.dump_effects, &args.out)?;
    let r = &outcome.report;
    println!(
        "{}: n_draws={} dbar={:.3} pD={} dic={} mspe={:.3} significant=[{}]",
        spec.label(),
        r.n_draws,
        r.dbar,
        r.p_d.map_or("NA".into(), |v| format!("{v:.3}")),
        r.dic.map_or("NA".into(), |v| format!("{v:.3}")),
        r.mspe,
        r.significant_coefficients().join(" ")
    );
    if r.negative_pd {
        eprintln!("warning: pD is negative; the DIC of this fit cannot be fully relied on");
    }
    if args.require_converged && !outcome.converged {
        let failing = r.convergence.as_ref().map_or_else(
            || "fewer than 2 chains".to_string(),
            |c| c.failing().join(", "),
        );
        return Err(CliError::NotConverged(failing));
    }
    Ok(())
}

fn load_report(dir: &Path) -> Result<FitReport, CliError> {
    let path = dir.join("report.json");
    let text = fs::read_to_string(&path)
        .map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn cmd_compare(args: &CompareArgs) -> Result<(), CliError> {
    let reports: Vec<FitReport> = if let Some(data_path) = &args.data {
        let root = args.out.as_ref().expect("clap enforces --out with --data");
        let eff = args.sampler.resolve()?;
        let data = load_csv(data_path).map_err(data_err)?;
        let mut specs = ModelSpec::lattice();
        if args.variants {
            specs.extend(ModelSpec::prior_sensitivity_variants());
        }
        let results: Vec<Result<FitOutcome, CliError>> = specs
            .par_iter()
            .map(|spec| {
                fit_to_dir(
                    spec,
                    &data,
                    &eff,
                    args.dump_effects,
                    &root.join(spec.label()),
                )
            })
            .collect();
        results
            .into_iter()
            .map(|r| r.map(|o| o.report))
            .collect::<Result<_, _>>()?
    } else {
        if args.dirs.is_empty() {
            return Err(CliError::Usage(
                "compare needs fit directories or --data/--out".into(),
            ));
        }
        args.dirs
            .iter()
            .map(|d| load_report(d))
            .collect::<Result<_, _>>()?
    };
    let table = compare(&reports);
    let text = table.to_text();
    print!("{text}");
    if let (Some(root), Some(_)) = (&args.out, &args.data) {
        write_file(&root.join("comparison.txt"), &text)?;
        write_file(&root.join("comparison.csv"), table.to_csv())?;
    }
    if let Some(csv) = &args.csv {
        write_file(csv, table.to_csv())?;
    }
    Ok(())
}

fn cmd_simulate(cmd: &SimulateCommand) -> Result<(), CliError> {
    match cmd {
        SimulateCommand::Loglog(a) => {
            let cfg = SimLogLogConfig {
                n: a.n,
                beta0: a.beta0,
                beta1: a.beta1,
                sigma_e: a.sigma_e,
                x_range: (a.x_lo, a.x_hi),
                seed: a.seed,
            };
            let d = simulate_loglog(&cfg).map_err(|e| CliError::Usage(e.to_string()))?;
            let ds = d.to_dataset().map_err(data_err)?;
            write_csv(&ds, &a.out)
                .map_err(|e| CliError::Data(format!("cannot write {}: {e}", a.out.display())))
        }
        SimulateCommand::Energy(a) => {
            let family: Family = a.family.into();
            let cfg = SimEnergyConfig {
                n: a.n,
                beta: [a.beta[0], a.beta[1], a.beta[2], a.beta[3], a.beta[4]],
                family,
                effect: a.effect.resolve(family),
                effect_scale: a.effect_scale,
                noise: a.noise,
                dlw_mean: a.dlw_mean,
                dlw_sd: a.dlw_sd,
                socdes_mean: a.socdes_mean,
                socdes_sd: a.socdes_sd,
                edu_prob: a.edu_prob,
                seed: a.seed,
            };
            let sim = simulate_energy(&cfg).map_err(|e| CliError::Usage(e.to_string()))?;
            write_csv(&sim.data, &a.out)
                .map_err(|e| CliError::Data(format!("cannot write {}: {e}", a.out.display())))?;
            if let Some(path) = &a.truth {
                let json = serde_json::to_string_pretty(&sim.truth).map_err(data_err)?;
                write_file(path, json)?;
            }
            Ok(())
        }
    }
}

const MONITORED_PREFIXES: [&str; 6] = ["beta", "var_beta", "var_y", "var_eps", "r_y", "deviance"];

fn cmd_diagnose(args: &DiagnoseArgs) -> Result<(), CliError> {
    let table = SamplesTable::load(args.dir.join("samples.csv")).map_err(data_err)?;
    let names: Vec<&String> = table
        .columns
        .iter()
        .filter(|c| MONITORED_PREFIXES.iter().any(|p| c.starts_with(p)))
        .collect();
    let mut per_chain = Vec::new();
    for &chain in table.chains.keys() {
        let traces: Vec<(String, Vec<f64>)> = names
            .iter()
            .filter_map(|n| table.trace(chain, n).map(|t| (n.to_string(), t)))
            .collect();
        per_chain.push(traces);
    }
    let conv = if per_chain.len() >= 2 {
        Some(convergence_from_traces(&per_chain, args.rhat_threshold).map_err(data_err)?)
    } else {
        None
    };
    print!("{}", convergence_text(conv.as_ref(), per_chain.len()));

    let report = load_report(&args.dir)?;
    let defined: Vec<f64> = report.residuals.iter().flatten().copied().collect();
    let undefined = report.residuals.len() - defined.len();
    match residual_normal_correlation(&defined) {
        Ok(r) => println!(
            "residual-normal correlation: {r:.4} ({} residuals)",
            defined.len()
        ),
        Err(e) => println!("residual-normal correlation: unavailable ({e})"),
    }
    if undefined > 0 {
        println!("{undefined} residual(s) undefined (zero predictive spread)");
    }
    if args.require_converged && !conv.as_ref().is_some_and(|c| c.passed) {
        let failing = conv.as_ref().map_or_else(
            || "fewer than 2 chains".to_string(),
            |c| c.failing().join(", "),
        );
        return Err(CliError::NotConverged(failing));
    }
    Ok(())
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Fit(a) => cmd_fit(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Simulate(c) => cmd_simulate(c),
        Command::Diagnose(a) => cmd_diagnose(a),
    }
}

/// Parses `argv` (including the program name), runs the command and returns
/// the process exit code.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
