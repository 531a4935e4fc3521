use std::f64::consts::SQRT_2;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use pig_core::chain::run_chains;
use pig_core::dirichlet::{log_posterior_homogeneous, posterior_predictive, quadrature_posterior};
use pig_core::gamma_shape::{shape_hyper, shape_posterior_quadrature};
use pig_core::pig::{
    log_pig_laplace_closed, log_pig_laplace_product, pig_laplace_closed, pig_sample,
};
use pig_core::quadrature::auto_grid;
use pig_core::rng::{gig_mean, gig_sample, truncated_normal_sample};
use pig_core::{
    AlphaPrior, Augmentation, ChainConfig, ChainMeta, DRule, DirichletGibbs, GammaShapePrior,
    GigParams, PigParams, PigSamplerConfig, PosteriorSamples, RngState, ShapeAugmentation,
    ShapeGibbs, SummaryReport,
};

use crate::config::Settings;
use crate::error::{CliError, CliResult};
use crate::io::{
    ensure_dir, fmt_real, parse_counts_csv, parse_reals_csv, read_samples_csv, write_long_csv,
    write_plot_csv, write_samples_csv, write_summary_json,
};

const DEFAULT_OUT: &str = "pig-out";
const DEFAULT_SEED: u64 = 1;
/// Grid nodes for the posterior oracles written next to fits.
const ORACLE_POINTS: usize = 4000;

#[derive(Debug, Parser)]
#[command(
    name = "pig",
    version,
    about = "Polya-inverse Gamma samplers and Gibbs fits"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the samplers against their transforms and closed-form moments.
    Validate(ValidateArgs),
    /// Draw from P-IG(d, c).
    PigSample(PigSampleArgs),
    /// Fit Dirichlet concentrations to a counts table.
    FitDirichlet(FitDirichletArgs),
    /// Fit the shape of a gamma likelihood with known rate.
    FitGammaShape(FitGammaShapeArgs),
    /// Posterior-predictive simplex draws from saved concentration samples.
    Predict(PredictArgs),
}

#[derive(Debug, Args, Clone, Default)]
pub struct CommonArgs {
    #[arg(long)]
    pub seed: Option<u64>,
    /// Series terms drawn exactly per P-IG variate.
    #[arg(long)]
    pub trunc: Option<usize>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Flat key=value file; flags take precedence over it.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args, Clone, Default)]
pub struct ChainArgs {
    #[arg(long)]
    pub iters: Option<usize>,
    #[arg(long)]
    pub burnin: Option<usize>,
    #[arg(long)]
    pub thin: Option<usize>,
    /// Independent chains run on derived streams and concatenated.
    #[arg(long)]
    pub chains: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Monte Carlo draws per check.
    #[arg(long)]
    pub draws: Option<usize>,
}

#[derive(Debug, Args)]
pub struct PigSampleArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Tilt c.
    #[arg(long, allow_negative_numbers = true)]
    pub tilt: Option<f64>,
    /// Use d_k = a + k - 1 instead of d_k = k.
    #[arg(long)]
    pub shift: Option<f64>,
    #[arg(long)]
    pub draws: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DirichletScheme {
    PriorNormalizer,
    PosteriorNormalizer,
}

impl From<DirichletScheme> for Augmentation {
    fn from(s: DirichletScheme) -> Self {
        match s {
            DirichletScheme::PriorNormalizer => Augmentation::PriorNormalizer,
            DirichletScheme::PosteriorNormalizer => Augmentation::PosteriorNormalizer,
        }
    }
}

impl std::str::FromStr for DirichletScheme {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        <Self as ValueEnum>::from_str(s, true)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ShapeScheme {
    Unshifted,
    Shifted,
}

impl From<ShapeScheme> for ShapeAugmentation {
    fn from(s: ShapeScheme) -> Self {
        match s {
            ShapeScheme::Unshifted => ShapeAugmentation::Unshifted,
            ShapeScheme::Shifted => ShapeAugmentation::Shifted,
        }
    }
}

impl std::str::FromStr for ShapeScheme {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        <Self as ValueEnum>::from_str(s, true)
    }
}

#[derive(Debug, Args)]
pub struct FitDirichletArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub chain: ChainArgs,
    /// Counts CSV with a header row.
    #[arg(long)]
    pub counts: Option<PathBuf>,
    /// Leading label columns in the counts CSV.
    #[arg(long)]
    pub id_cols: Option<usize>,
    /// Prior scale τ of every concentration.
    #[arg(long, conflicts_with = "mean_alpha")]
    pub tau: Option<f64>,
    /// Prior mean of every concentration; sets τ = mean·√(π/2).
    #[arg(long)]
    pub mean_alpha: Option<f64>,
    /// One concentration shared by all categories.
    #[arg(long)]
    pub homogeneous: bool,
    #[arg(long, value_enum)]
    pub augmentation: Option<DirichletScheme>,
}

#[derive(Debug, Args)]
pub struct FitGammaShapeArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub chain: ChainArgs,
    /// One positive observation per line, optional header.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Known rate β of the gamma likelihood.
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub prior_a: Option<f64>,
    #[arg(long)]
    pub prior_b: Option<u32>,
    #[arg(long, allow_negative_numbers = true)]
    pub prior_c: Option<f64>,
    #[arg(long, value_enum)]
    pub augmentation: Option<ShapeScheme>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Samples CSV written by fit-dirichlet.
    #[arg(long)]
    pub samples: Option<PathBuf>,
    /// Simplex draws per retained sample.
    #[arg(long)]
    pub draws: Option<usize>,
    /// Number of categories; required when the samples hold a shared concentration.
    #[arg(long)]
    pub categories: Option<usize>,
}

pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Validate(a) => cmd_validate(&a),
        Command::PigSample(a) => cmd_pig_sample(&a),
        Command::FitDirichlet(a) => cmd_fit_dirichlet(&a),
        Command::FitGammaShape(a) => cmd_fit_gamma_shape(&a),
        Command::Predict(a) => cmd_predict(&a),
    }
}

fn pig_config(
    settings: &Settings,
    common: &CommonArgs,
    default: PigSamplerConfig,
) -> CliResult<PigSamplerConfig> {
    let trunc = settings.resolve("trunc", common.trunc, default.trunc_terms)?;
    Ok(PigSamplerConfig::new(
        trunc,
        default.tail_horizon.max(trunc),
    )?)
}

/// Resolved but not created; callers create it once the settings are known good.
fn out_dir(settings: &Settings, common: &CommonArgs) -> CliResult<PathBuf> {
    settings.resolve("out", common.out.clone(), PathBuf::from(DEFAULT_OUT))
}

fn chain_config(
    settings: &Settings,
    common: &CommonArgs,
    chain: &ChainArgs,
    homogeneous: bool,
) -> CliResult<(ChainConfig, usize)> {
    let defaults = ChainConfig::default();
    let config = ChainConfig {
        iterations: settings.resolve("iters", chain.iters, defaults.iterations)?,
        burn_in: settings.resolve("burnin", chain.burnin, defaults.burn_in)?,
        thin: settings.resolve("thin", chain.thin, defaults.thin)?,
        seed: settings.resolve("seed", common.seed, DEFAULT_SEED)?,
        pig_config: pig_config(settings, common, PigSamplerConfig::GIBBS)?,
        homogeneous,
    };
    config.validate()?;
    let chains = settings.resolve("chains", chain.chains, 1)?;
    if chains == 0 {
        return Err(CliError::Usage("chains must be at least 1".into()));
    }
    Ok((config, chains))
}

fn required<T>(value: Option<T>, flag: &str) -> CliResult<T> {
    value.ok_or_else(|| CliError::Usage(format!("--{flag} is required (flag or config key)")))
}

/// Result of one validation check.
#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub statistic: f64,
    pub truth: f64,
    pub tolerance: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        (self.statistic - self.truth).abs() <= self.tolerance
    }
}

fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (v / n).sqrt())
}

/// Allowance for truncation bias in the transform checks.
pub const TRUNCATION_ALLOWANCE: f64 = 1e-3;
pub const TRANSFORM_TILTS: [f64; 4] = [0.0, 1.0, SQRT_2, 3.0];
pub const TRANSFORM_POINTS: [f64; 3] = [0.5, 1.0, 2.0];

/// Monte Carlo `E[e^{-t² w}]` for `w ~ P-IG(d_k = k, c)` against the closed form.
pub fn transform_checks(
    tilt: f64,
    ts: &[f64],
    draws: usize,
    pig: &PigSamplerConfig,
    rng: &mut RngState,
) -> Vec<Check> {
    let params = PigParams::integer(tilt).expect("finite tilt");
    let w: Vec<f64> = (0..draws).map(|_| pig_sample(&params, pig, rng)).collect();
    ts.iter()
        .map(|&t| {
            let vals: Vec<f64> = w.iter().map(|x| (-t * t * x).exp()).collect();
            let (m, se) = mean_and_se(&vals);
            Check {
                name: format!("P-IG transform c={tilt:.4} t={t}"),
                statistic: m,
                truth: pig_laplace_closed(&params, t).expect("integer rule"),
                tolerance: 3.0 * se + TRUNCATION_ALLOWANCE,
            }
        })
        .collect()
}

/// The full validation suite.
pub fn validation_suite(draws: usize, seed: u64, trunc: usize) -> CliResult<Vec<Check>> {
    if draws < 100 {
        return Err(CliError::Usage("validate needs at least 100 draws".into()));
    }
    let pig = PigSamplerConfig::with_trunc(trunc)?;
    let root = RngState::new(seed);
    let mut checks = Vec::new();
    for (i, &c) in TRANSFORM_TILTS.iter().enumerate() {
        checks.extend(transform_checks(
            c,
            &TRANSFORM_POINTS,
            draws,
            &pig,
            &mut root.child(i as u64),
        ));
    }
    for &c in &TRANSFORM_TILTS {
        let params = PigParams::integer(c).expect("finite tilt");
        for &t in &TRANSFORM_POINTS {
            checks.push(Check {
                name: format!("log product(1e6) vs closed c={c:.4} t={t}"),
                statistic: log_pig_laplace_product(&params, t, 1_000_000),
                truth: log_pig_laplace_closed(&params, t).expect("integer rule"),
                tolerance: 1e-4,
            });
        }
    }
    for (i, (order, chi, tilt)) in [(-1.5, 1.0, 1.0), (-0.5, 2.0, 1.0), (-1.5, 1.0, 2.0)]
        .into_iter()
        .enumerate()
    {
        let law = GigParams::new(order, chi, tilt)?;
        let mut rng = root.child(100 + i as u64);
        let xs: Vec<f64> = (0..draws).map(|_| gig_sample(&law, &mut rng)).collect();
        let (m, se) = mean_and_se(&xs);
        checks.push(Check {
            name: format!("GIG({order}, {chi}, {tilt}) mean"),
            statistic: m,
            truth: gig_mean(&law),
            tolerance: 4.0 * se,
        });
    }
    {
        // heavy tail: median of 100 block means, within 10%
        let law = GigParams::new(-1.5, 1.0, 0.0)?;
        let mut rng = root.child(200);
        let block = draws / 100;
        let mut means: Vec<f64> = (0..100)
            .map(|_| (0..block).map(|_| gig_sample(&law, &mut rng)).sum::<f64>() / block as f64)
            .collect();
        means.sort_by(f64::total_cmp);
        checks.push(Check {
            name: "GIG(-1.5, 1, 0) median of means".into(),
            statistic: 0.5 * (means[49] + means[50]),
            truth: 1.0,
            tolerance: 0.1,
        });
    }
    {
        let mut rng = root.child(300);
        let xs: Vec<f64> = (0..draws)
            .map(|_| truncated_normal_sample(0.0, 1.0, 0.0, &mut rng))
            .collect::<pig_core::Result<_>>()?;
        let (m, se) = mean_and_se(&xs);
        checks.push(Check {
            name: "TN(0, 1, >0) mean".into(),
            statistic: m,
            truth: (2.0 / std::f64::consts::PI).sqrt(),
            tolerance: 4.0 * se,
        });
    }
    Ok(checks)
}

fn cmd_validate(args: &ValidateArgs) -> CliResult<()> {
    let settings = Settings::load(args.common.config.as_deref())?;
    let draws = settings.resolve("draws", args.draws, 100_000)?;
    let seed = settings.resolve("seed", args.common.seed, DEFAULT_SEED)?;
    let trunc = settings.resolve(
        "trunc",
        args.common.trunc,
        PigSamplerConfig::VALIDATION.trunc_terms,
    )?;
    let out = settings.resolve_opt("out", args.common.out.clone())?;
    settings.finish()?;
    let checks = validation_suite(draws, seed, trunc)?;
    let mut report = String::from("check,statistic,truth,tolerance,result\n");
    println!(
        "{:<44} {:>16} {:>16} {:>12}  result",
        "check", "statistic", "truth", "tolerance"
    );
    for c in &checks {
        let verdict = if c.passed() { "PASS" } else { "FAIL" };
        println!(
            "{:<44} {:>16.10} {:>16.10} {:>12.3e}  {verdict}",
            c.name, c.statistic, c.truth, c.tolerance
        );
        report += &format!(
            "{},{},{},{},{verdict}\n",
            c.name,
            fmt_real(c.statistic),
            fmt_real(c.truth),
            fmt_real(c.tolerance)
        );
    }
    if let Some(dir) = out {
        ensure_dir(&dir)?;
        let path = dir.join("validate.csv");
        std::fs::write(&path, report).map_err(|e| CliError::io(&path, e))?;
    }
    let failed = checks.iter().filter(|c| !c.passed()).count();
    if failed > 0 {
        return Err(CliError::ValidationFailed(failed));
    }
    Ok(())
}

fn cmd_pig_sample(args: &PigSampleArgs) -> CliResult<()> {
    let settings = Settings::load(args.common.config.as_deref())?;
    let tilt = settings.resolve("tilt", args.tilt, 0.0)?;
    let shift = settings.resolve_opt("shift", args.shift)?;
    let draws = settings.resolve("draws", args.draws, 1000)?;
    let seed = settings.resolve("seed", args.common.seed, DEFAULT_SEED)?;
    let pig = pig_config(&settings, &args.common, PigSamplerConfig::VALIDATION)?;
    let dir = out_dir(&settings, &args.common)?;
    settings.finish()?;
    ensure_dir(&dir)?;
    let rule = shift.map_or(DRule::Integer, DRule::Shifted);
    let params = PigParams::new(rule, tilt)?;
    let mut rng = RngState::new(seed);
    let config = ChainConfig {
        iterations: draws.max(1),
        burn_in: 0,
        thin: 1,
        seed,
        pig_config: pig,
        homogeneous: false,
    };
    let mut samples = PosteriorSamples::new(
        vec!["w".into()],
        ChainMeta::new("pig-sample", "none", &config),
    );
    for i in 1..=draws {
        samples.push(i, vec![pig_sample(&params, &pig, &mut rng)]);
    }
    write_samples_csv(&dir.join("pig_samples.csv"), &samples)?;
    let report = SummaryReport::from_samples(&samples)?;
    write_summary_json(
        &dir.join("summary.json"),
        &report,
        json!({ "tilt": tilt, "shift": shift, "rule": if shift.is_some() { "shifted" } else { "integer" } }),
    )?;
    Ok(())
}

fn cmd_fit_dirichlet(args: &FitDirichletArgs) -> CliResult<()> {
    let settings = Settings::load(args.common.config.as_deref())?;
    let counts_path: PathBuf = required(
        settings.resolve_opt("counts", args.counts.clone())?,
        "counts",
    )?;
    let id_cols = settings.resolve("id_cols", args.id_cols, 1)?;
    let homogeneous = settings.resolve_switch("homogeneous", args.homogeneous)?;
    let scheme = settings.resolve(
        "augmentation",
        args.augmentation,
        DirichletScheme::PriorNormalizer,
    )?;
    // flags for the prior scale outrank both config keys
    let (tau_flag, mean_flag) = (args.tau, args.mean_alpha);
    let tau_file: Option<f64> = settings.file_value("tau")?;
    let mean_file: Option<f64> = settings.file_value("mean_alpha")?;
    let (tau, mean_alpha) = if tau_flag.is_some() || mean_flag.is_some() {
        (tau_flag, mean_flag)
    } else if tau_file.is_some() && mean_file.is_some() {
        return Err(CliError::Usage(
            "config sets both tau and mean_alpha".into(),
        ));
    } else {
        (tau_file, mean_file)
    };
    let (config, chains) = chain_config(&settings, &args.common, &args.chain, homogeneous)?;
    let dir = out_dir(&settings, &args.common)?;
    settings.finish()?;
    ensure_dir(&dir)?;

    let counts = parse_counts_csv(&counts_path, id_cols)?;
    let k = counts.n_categories();
    let prior = match (tau, mean_alpha) {
        (Some(t), _) => AlphaPrior::shared(t)?,
        (None, Some(m)) => AlphaPrior::from_mean(m)?,
        (None, None) => AlphaPrior::default_for(k)?,
    };
    let augmentation = Augmentation::from(scheme);
    let gibbs = DirichletGibbs::new(
        &counts,
        &prior,
        augmentation,
        homogeneous,
        config.pig_config,
    )?;
    let samples = run_chains(config.seed, chains, |rng| gibbs.run(&config, rng))?;

    write_samples_csv(&dir.join("samples.csv"), &samples)?;
    write_plot_csv(&dir.join("plot.csv"), &samples)?;
    let report = SummaryReport::from_samples(&samples)?;
    let mut extra = json!({
        "command": "fit-dirichlet",
        "counts": counts_path.display().to_string(),
        "units": counts.n_units(),
        "categories": counts.category_labels(),
        "tau": prior.tau(0),
        "prior_mean": prior.prior_mean(0),
    });
    if homogeneous {
        let grid = auto_grid(
            |a| log_posterior_homogeneous(&counts, &prior, a),
            ORACLE_POINTS,
        )?;
        let q = quadrature_posterior(&counts, &prior, &grid)?;
        extra["oracle"] =
            json!({ "mean": q.mean(), "sd": q.sd(), "ks": q.ks_statistic(&samples.column(0)) });
    }
    write_summary_json(&dir.join("summary.json"), &report, extra)?;
    Ok(())
}

fn cmd_fit_gamma_shape(args: &FitGammaShapeArgs) -> CliResult<()> {
    let settings = Settings::load(args.common.config.as_deref())?;
    let data_path: PathBuf = required(settings.resolve_opt("data", args.data.clone())?, "data")?;
    let beta = required(settings.resolve_opt("beta", args.beta)?, "beta")?;
    let a = settings.resolve("prior_a", args.prior_a, 1.0)?;
    let b = settings.resolve("prior_b", args.prior_b, 1)?;
    let c = settings.resolve("prior_c", args.prior_c, 0.0)?;
    let scheme = settings.resolve("augmentation", args.augmentation, ShapeScheme::Unshifted)?;
    let (config, chains) = chain_config(&settings, &args.common, &args.chain, false)?;
    let dir = out_dir(&settings, &args.common)?;
    settings.finish()?;
    ensure_dir(&dir)?;

    let y = parse_reals_csv(&data_path)?;
    let prior = GammaShapePrior::new(a, b, c, beta)?;
    let hyper = shape_hyper(&y, &prior)?;
    let y_mean = y.iter().sum::<f64>() / y.len() as f64;
    let gibbs = ShapeGibbs::new(hyper, ShapeAugmentation::from(scheme), config.pig_config)?;
    let samples = run_chains(config.seed, chains, |rng| {
        gibbs.run(y_mean, beta, &config, rng)
    })?;

    write_samples_csv(&dir.join("samples.csv"), &samples)?;
    write_plot_csv(&dir.join("plot.csv"), &samples)?;
    let grid = auto_grid(|x| hyper.log_posterior(x), ORACLE_POINTS)?;
    let q = shape_posterior_quadrature(&y, &prior, &grid)?;
    let density_path = dir.join("oracle_density.csv");
    let labels: Vec<String> = q.grid.iter().map(|&x| fmt_real(x)).collect();
    write_long_csv(
        &density_path,
        "alpha",
        labels
            .iter()
            .map(String::as_str)
            .zip(q.density.iter().copied()),
    )?;
    let report = SummaryReport::from_samples(&samples)?;
    let extra = json!({
        "command": "fit-gamma-shape",
        "data": data_path.display().to_string(),
        "n": y.len(),
        "prior": { "a": a, "b": b, "c": c, "beta": beta },
        "hyper": hyper,
        "oracle": { "mean": q.mean(), "sd": q.sd(), "ks": q.ks_statistic(&samples.column(0)) },
    });
    write_summary_json(&dir.join("summary.json"), &report, extra)?;
    Ok(())
}

fn cmd_predict(args: &PredictArgs) -> CliResult<()> {
    let settings = Settings::load(args.common.config.as_deref())?;
    let samples_path: PathBuf = required(
        settings.resolve_opt("samples", args.samples.clone())?,
        "samples",
    )?;
    let draws = settings.resolve("draws", args.draws, 10)?;
    let categories = settings.resolve_opt("categories", args.categories)?;
    let seed = settings.resolve("seed", args.common.seed, DEFAULT_SEED)?;
    let dir = out_dir(&settings, &args.common)?;
    settings.finish()?;
    ensure_dir(&dir)?;
    if draws == 0 {
        return Err(CliError::Usage("draws must be at least 1".into()));
    }
    let samples = load_samples(&samples_path)?;
    let k = match (categories, samples.n_params()) {
        (Some(k), _) => k,
        (None, 1) => {
            return Err(CliError::Usage(
                "the samples hold one shared concentration; pass --categories".into(),
            ))
        }
        (None, p) => p,
    };
    let mut rng = RngState::new(seed);
    let simplex = posterior_predictive(&samples, k, draws, &mut rng)?;
    let labels: Vec<String> = (1..=k).map(|j| j.to_string()).collect();
    let rows = simplex
        .iter()
        .flat_map(|p| labels.iter().map(String::as_str).zip(p.iter().copied()));
    write_long_csv(&dir.join("predictive.csv"), "category", rows)
}

fn load_samples(path: &Path) -> CliResult<PosteriorSamples> {
    let (names, iters, rows) = read_samples_csv(path)?;
    let config = ChainConfig::default();
    let mut samples = PosteriorSamples::new(names, ChainMeta::new("loaded", "none", &config));
    for (iter, row) in iters.into_iter().zip(rows) {
        samples.push(iter, row);
    }
    Ok(samples)
}
