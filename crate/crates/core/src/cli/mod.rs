//! Command-line runner: `generate`, `validate`, `compare` and `cluster`.
//!
//! Exit codes: 0 success, 1 configuration or parse error, 2 admissibility
//! failure (including an invalid matrix passed to `validate`), 3 I/O error.
//! All randomness comes from one seed, so re-running a command with the same
//! config and seed rewrites byte-identical files.

pub mod config;
pub mod io;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::baseline::{comparison_arms, comparison_template, differences, summarize_differences};
use crate::clustereval::{htc_scenario, iris_scenario, run_scenario, IrisData, Partition, ScenarioResult};
use crate::error::Error;
use crate::noise::Recipe;
use crate::spectra::{eigenvalues, validate_correlation, SymmetricMatrix, DEFAULT_TOLERANCE};
use config::{LoadError, NoiseConfig, OutputKind, ScenarioConfig};

#[derive(Debug, Parser)]
#[command(name = "corrsim", version, about = "Noisy correlation matrices with condition-number guarantees")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write replicate matrices and a manifest.
    Generate(RunArgs),
    /// Check a matrix CSV and print its validity report as JSON.
    Validate {
        /// Full N x N matrix, comma-separated, no header.
        matrix: PathBuf,
    },
    /// Compare noise-recipe arms with Gaussian sample-correlation arms.
    Compare(RunArgs),
    /// Run a clustering scenario.
    Cluster(RunArgs),
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides the config replicate count.
    #[arg(long)]
    pub replicates: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitKind {
    Config,
    Admissibility,
    Io,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub kind: ExitKind,
    pub message: String,
}

impl CliError {
    fn config(message: impl Into<String>) -> Self {
        Self {
            kind: ExitKind::Config,
            message: message.into(),
        }
    }

    fn io(path: &Path, e: std::io::Error) -> Self {
        Self {
            kind: ExitKind::Io,
            message: format!("{}: {e}", path.display()),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind {
            ExitKind::Config => 1,
            ExitKind::Admissibility => 2,
            ExitKind::Io => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let kind = match e {
            Error::Admissibility { .. } | Error::InfeasibleBudget { .. } => ExitKind::Admissibility,
            _ => ExitKind::Config,
        };
        Self {
            kind,
            message: e.to_string(),
        }
    }
}

pub fn run(cli: &Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    match &cli.command {
        Command::Generate(args) => cmd_generate(args, stdout),
        Command::Validate { matrix } => cmd_validate(matrix, stdout),
        Command::Compare(args) => cmd_compare(args, stdout),
        Command::Cluster(args) => cmd_cluster(args, stdout),
    }
}

struct Resolved {
    config: ScenarioConfig,
    seed: u64,
    replicates: u64,
}

fn resolve(args: &RunArgs) -> Result<Resolved, CliError> {
    let config = config::load(&args.config).map_err(|e| match e {
        LoadError::Io(m) => CliError {
            kind: ExitKind::Io,
            message: m,
        },
        LoadError::Config(m) => CliError::config(m),
    })?;
    let replicates = args.replicates.unwrap_or(config.replicates);
    if replicates == 0 {
        return Err(CliError::config("replicates must be at least 1"));
    }
    Ok(Resolved {
        seed: args.seed.unwrap_or(config.seed),
        replicates,
        config,
    })
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("artifacts serialize");
    text.push('\n');
    write_file(path, &text)
}

fn prepare_out(out: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(out).map_err(|e| CliError::io(out, e))
}

/// Noise level from the config, from the budget, or checked against both.
fn resolve_epsilon(
    recipe: &Recipe,
    noise: &NoiseConfig,
    budget: Option<config::BudgetConfig>,
) -> Result<f64, CliError> {
    let from_budget = match budget {
        Some(b) => Some((b.kappa_max, recipe.epsilon_for_budget(b.budget()?)?)),
        None => None,
    };
    match (noise.epsilon, from_budget) {
        (Some(eps), None) => Ok(eps),
        (None, Some((_, eps))) => Ok(eps),
        (Some(eps), Some((kappa_max, limit))) => {
            recipe.check(eps)?;
            if recipe.kappa_bound(eps) > kappa_max {
                return Err(Error::Admissibility {
                    constraint: format!("kappa bound <= kappa_max = {kappa_max}"),
                    epsilon: eps,
                    limit,
                }
                .into());
            }
            Ok(eps)
        }
        (None, None) => Err(CliError::config("noise.epsilon or budget.kappa_max is required")),
    }
}

#[derive(Serialize)]
struct ReplicateRecord {
    replicate: u64,
    matrix: Option<String>,
    lambda_1: f64,
    lambda_n: f64,
    kappa: f64,
    max_deviation: f64,
    positive_definite: bool,
}

fn cmd_generate(args: &RunArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let Resolved {
        config,
        seed,
        replicates,
    } = resolve(args)?;
    let template = config
        .template
        .as_ref()
        .ok_or_else(|| CliError::config("generate needs a template"))?
        .build()
        .map_err(CliError::config)?;
    let noise = config.noise.ok_or_else(|| CliError::config("generate needs a noise section"))?;
    let recipe = Recipe::for_template(&template)?;
    let epsilon = resolve_epsilon(&recipe, &noise, config.budget)?;
    recipe.check(epsilon)?;
    let spec = noise.spec(epsilon, seed)?;
    let sigma = recipe.template();

    let draws = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let s = recipe.draw(&spec.for_replicate(r))?;
            let report = validate_correlation(&s, DEFAULT_TOLERANCE);
            let deviation = s.max_abs_diff(sigma)?;
            Ok((s, report, deviation))
        })
        .collect::<crate::Result<Vec<_>>>()?;

    prepare_out(&args.out)?;
    let wants = |k: OutputKind| config.outputs.contains(&k);
    let mut records = Vec::with_capacity(draws.len());
    for (r, (s, report, deviation)) in draws.iter().enumerate() {
        let tag = format!("{r:04}");
        let mut matrix = None;
        if wants(OutputKind::Matrix) {
            let name = format!("matrix_{tag}.csv");
            write_file(&args.out.join(&name), &io::matrix_csv(s))?;
            matrix = Some(name);
        }
        if wants(OutputKind::Validity) {
            write_json(&args.out.join(format!("validity_{tag}.json")), report)?;
        }
        if wants(OutputKind::DiffHistogram) {
            let h = config.histogram;
            let summary = summarize_differences(&differences(s, sigma)?, h.bins, h.range)?;
            write_file(&args.out.join(format!("histogram_{tag}.csv")), &io::histogram_csv(&summary.histogram))?;
        }
        if wants(OutputKind::Spectra) {
            let spectrum = eigenvalues(s, DEFAULT_TOLERANCE)?;
            write_file(&args.out.join(format!("spectrum_{tag}.csv")), &io::spectrum_csv(&spectrum.values))?;
        }
        records.push(ReplicateRecord {
            replicate: r as u64,
            matrix,
            lambda_1: report.max_eigenvalue,
            lambda_n: report.min_eigenvalue,
            kappa: report.condition_number,
            max_deviation: *deviation,
            positive_definite: report.is_positive_definite(),
        });
    }
    let manifest = json!({
        "command": "generate",
        "seed": seed,
        "replicates": replicates,
        "n": template.n(),
        "route": recipe.route(),
        "epsilon": epsilon,
        "noise": spec,
        "bounds": recipe.bounds(),
        "kappa_bound": recipe.kappa_bound(epsilon),
        "config": config,
        "results": records,
    });
    write_json(&args.out.join("manifest.json"), &manifest)?;
    let all_pd = records.iter().all(|r| r.positive_definite);
    writeln!(
        stdout,
        "generated {replicates} matrices (N = {}, epsilon = {epsilon}, all positive definite: {all_pd})",
        template.n()
    )
    .map_err(|e| CliError::io(Path::new("<stdout>"), e))?;
    Ok(())
}

fn cmd_validate(path: &Path, stdout: &mut dyn Write) -> Result<(), CliError> {
    let rows = io::read_matrix_rows(path).map_err(|e| match e {
        io::ParseError::Io(m) => CliError {
            kind: ExitKind::Io,
            message: m,
        },
        io::ParseError::Format(m) => CliError::config(format!("{}: {m}", path.display())),
    })?;
    let m = SymmetricMatrix::try_from_rows(&rows, 1e-12).map_err(|e| match e {
        Error::NonFinite => CliError::config(format!("{}: non-finite entry", path.display())),
        other => CliError {
            kind: ExitKind::Admissibility,
            message: format!("{}: {other}", path.display()),
        },
    })?;
    let report = validate_correlation(&m, DEFAULT_TOLERANCE);
    let text = serde_json::to_string_pretty(&report).expect("report serializes");
    writeln!(stdout, "{text}").map_err(|e| CliError::io(Path::new("<stdout>"), e))?;
    if report.is_valid() {
        Ok(())
    } else {
        Err(CliError {
            kind: ExitKind::Admissibility,
            message: format!("{} is not a valid correlation matrix", path.display()),
        })
    }
}

fn cmd_compare(args: &RunArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let Resolved {
        config,
        seed,
        replicates,
    } = resolve(args)?;
    let template = match &config.template {
        Some(t) => t.build().map_err(CliError::config)?,
        None => comparison_template(),
    };
    let arms = config.arms.clone().unwrap_or_else(comparison_arms);
    if arms.is_empty() {
        return Err(CliError::config("compare needs at least one arm"));
    }
    let sigma = crate::templates::build_template(&template)?;
    let jobs: Vec<(usize, u64)> = (0..arms.len())
        .flat_map(|a| (0..replicates).map(move |r| (a, r)))
        .collect();
    let diffs = jobs
        .par_iter()
        .map(|&(a, r)| {
            let s = arms[a].draw(&template, a as u64, seed, r)?;
            differences(&s, &sigma)
        })
        .collect::<crate::Result<Vec<_>>>()?;

    prepare_out(&args.out)?;
    let mut summary = String::from("arm,sd,max_abs\n");
    let mut arm_records = Vec::new();
    for (a, arm) in arms.iter().enumerate() {
        let pooled: Vec<f64> = diffs[a * replicates as usize..(a + 1) * replicates as usize].concat();
        let s = summarize_differences(&pooled, config.histogram.bins, config.histogram.range)?;
        let file = format!("histogram_{}.csv", arm.label());
        write_file(&args.out.join(&file), &io::histogram_csv(&s.histogram))?;
        summary.push_str(&format!("{},{},{}\n", arm.label(), s.sd, s.max_abs));
        arm_records.push(json!({
            "arm": arm,
            "histogram": file,
            "mean": s.mean,
            "sd": s.sd,
            "max_abs": s.max_abs,
            "n_differences": s.n_offdiag,
        }));
    }
    write_file(&args.out.join("summary.csv"), &summary)?;
    write_json(
        &args.out.join("manifest.json"),
        &json!({
            "command": "compare",
            "seed": seed,
            "replicates": replicates,
            "n": template.n(),
            "config": config,
            "arms": arm_records,
        }),
    )?;
    write!(stdout, "{summary}").map_err(|e| CliError::io(Path::new("<stdout>"), e))?;
    Ok(())
}

fn cmd_cluster(args: &RunArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let Resolved {
        config,
        seed,
        replicates,
    } = resolve(args)?;
    let cluster = config
        .cluster
        .clone()
        .ok_or_else(|| CliError::config("cluster needs a cluster section"))?;
    let k_max = cluster.k_max;
    let result: ScenarioResult = match cluster.scenario.as_str() {
        "iris" => {
            let spec = match config.noise {
                Some(n) => {
                    let eps = n.epsilon.ok_or_else(|| CliError::config("iris noise needs epsilon"))?;
                    Some(n.spec(eps, seed)?)
                }
                None => None,
            };
            iris_scenario(&IrisData::bundled(), spec.as_ref(), replicates, k_max)?
        }
        "custom" => {
            let template = config
                .template
                .as_ref()
                .ok_or_else(|| CliError::config("custom scenario needs a template"))?
                .build()
                .map_err(CliError::config)?;
            let noise = config.noise.ok_or_else(|| CliError::config("custom scenario needs noise"))?;
            let recipe = Recipe::for_template(&template)?;
            let epsilon = resolve_epsilon(&recipe, &noise, config.budget)?;
            let spec = noise.spec(epsilon, seed)?;
            let truth = Partition::new(template.labels())?;
            run_scenario("custom", &template, &spec, &truth, replicates, k_max)?
        }
        name => {
            let mut preset = htc_scenario(name, seed)?;
            if let Some(n) = config.noise {
                let eps = n.epsilon.unwrap_or(preset.noise.epsilon);
                preset.noise = n.spec(eps, seed)?;
            }
            preset.run(replicates, k_max)?
        }
    };

    prepare_out(&args.out)?;
    write_file(&args.out.join("replicates.csv"), &io::replicates_csv(&result.replicates))?;
    let summary = io::cluster_summary_csv(std::slice::from_ref(&result));
    write_file(&args.out.join("summary.csv"), &summary)?;
    write_json(
        &args.out.join("result.json"),
        &json!({
            "command": "cluster",
            "seed": seed,
            "k_max": k_max,
            "config": config,
            "result": result,
        }),
    )?;
    write!(stdout, "{summary}").map_err(|e| CliError::io(Path::new("<stdout>"), e))?;
    Ok(())
}
