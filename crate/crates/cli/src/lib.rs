//! The `bridging` command-line tool.
//!
//! Exit codes: 0 on success, 1 on a usage error, 2 on a data or contract
//! error. Every command refuses to replace an existing output unless
//! `--force` is given.

pub mod config;
pub mod report;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use bridging_core::experiment::{gradcheck_instance, gradient_check, run_attack};
use bridging_core::io::{
    convert_public_data, read_params, read_scores, read_truth, read_votes, write_params, write_scores, write_truth,
    write_votes, ConvertMode, LabeledParams,
};
use bridging_core::scoring::classify_all;
use bridging_core::sim::first_note_of;
use bridging_core::{fit, generate, score_notes, Archetype, AttackConfig, RegConfig, Thresholds};
use clap::{Parser, Subcommand};
use thiserror::Error;

use config::{ConfigError, ExperimentConfig};

/// Finite-difference step used by `gradcheck`.
pub const GRADCHECK_STEP: f64 = 1e-5;
/// `gradcheck` succeeds when the worst relative error is below this.
pub const GRADCHECK_LIMIT: f64 = 1e-6;

#[derive(Debug, Parser)]
#[command(name = "bridging", version, about = "Bridging-based note ranking experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit the model to a vote file.
    Train {
        #[arg(long)]
        votes: PathBuf,
        /// Output directory for params.tsv, report.tsv and config.echo.
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        force: bool,
    },
    /// Rank and classify notes with fitted parameters.
    Score {
        #[arg(long)]
        params: PathBuf,
        #[arg(long)]
        votes: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        threshold: Option<f64>,
        #[arg(long)]
        min_votes: Option<usize>,
        /// Keep polarized low-intercept notes undecided instead of rejecting them.
        #[arg(long)]
        factor_penalty: bool,
        #[arg(long)]
        force: bool,
    },
    /// Generate a polarized population's votes and planted labels.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        force: bool,
    },
    /// Simulate, inject sybil votes, refit and compare the target note.
    Attack {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        force: bool,
    },
    /// Compare analytic and finite-difference gradients on a random instance.
    Gradcheck {
        #[arg(long)]
        seed: u64,
    },
    /// Convert a public helpfulness ratings export to a vote file.
    Convert {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "drop")]
        mode: ConvertMode,
        #[arg(long)]
        force: bool,
    },
    /// Summarize scores against planted labels.
    Report {
        #[arg(long)]
        scores: PathBuf,
        #[arg(long)]
        truth: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        force: bool,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] bridging_core::Error),
    #[error("{}: {source}", path.display())]
    Config { path: PathBuf, source: ConfigError },
    #[error("{} already exists; pass --force to overwrite", .0.display())]
    Exists(PathBuf),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Check(String),
}

/// Runs one command with the process's standard streams.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(args, &mut std::io::stdout(), &mut std::io::stderr())
}

/// Runs one command, writing results to `out` and diagnostics to `err`.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                return 1;
            }
            let _ = write!(out, "{}", e.render());
            return 0;
        }
    };
    match execute(cli.command, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            2
        }
    }
}

fn execute(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Train {
            votes,
            out: dir,
            config,
            seed,
            force,
        } => {
            let mut cfg = match config {
                Some(path) => load_config(&path)?,
                None => ExperimentConfig::default(),
            };
            let seed = seed.or(cfg.seed).unwrap_or(0);
            cfg.seed = Some(seed);
            cfg.train.seed = seed;
            cfg.train.validate()?;
            let files = prepare_dir(&dir, &["params.tsv", "report.tsv", "config.echo"], force)?;

            let data = read_votes(&votes)?;
            let (params, train_report) = fit(&data, &cfg.train)?;
            write_params(&LabeledParams::from_dataset(&data, params)?, &files[0])?;
            write_text(&files[1], &report::training_report(&data, &train_report, seed))?;
            write_text(&files[2], &cfg.echo())?;
            if !train_report.converged {
                let _ = writeln!(
                    err,
                    "warning: stopped after {} epochs without meeting the tolerance",
                    train_report.epochs_run
                );
            }
        }
        Command::Score {
            params,
            votes,
            out: path,
            threshold,
            min_votes,
            factor_penalty,
            force,
        } => {
            let mut th = Thresholds::default();
            if let Some(t) = threshold {
                if !t.is_finite() {
                    return Err(CliError::Check(format!("threshold must be finite, got {t}")));
                }
                th.display_threshold = t;
            }
            if let Some(m) = min_votes {
                th.min_votes = m;
            }
            th.factor_penalty = factor_penalty;
            refuse_overwrite(&path, force)?;

            let data = read_votes(&votes)?;
            let params = read_params(&params)?.align_to(&data)?;
            let scores = score_notes(&params, &data)?;
            write_scores(&scores, &classify_all(&scores, &th), &path)?;
        }
        Command::Simulate {
            config,
            out: dir,
            seed,
            force,
        } => {
            let mut cfg = load_config(&config)?;
            cfg.seed = Some(seed);
            cfg.sim.seed = seed;
            cfg.sim.validate()?;
            let files = prepare_dir(&dir, &["votes.tsv", "truth.tsv", "config.echo"], force)?;

            let (data, truth) = generate(&cfg.sim)?;
            write_votes(&data, &files[0])?;
            write_truth(&truth, &files[1])?;
            write_text(&files[2], &cfg.echo())?;
        }
        Command::Attack {
            config,
            out: dir,
            seed,
            force,
        } => {
            let mut cfg = load_config(&config)?;
            cfg.seed = Some(seed);
            cfg.sim.seed = seed;
            cfg.train.seed = seed;
            cfg.sim.validate()?;
            cfg.train.validate()?;
            let target = match &cfg.attack.target {
                Some(t) => t.clone(),
                None => {
                    let (_, truth) = generate(&cfg.sim)?;
                    first_note_of(&truth, Archetype::PartisanB)
                        .ok_or_else(|| CliError::Check("no PARTISAN_B note to attack".into()))?
                        .to_owned()
                }
            };
            let atk = AttackConfig {
                target_note: target,
                injected_raters: cfg.attack.raters,
                injected_rating: cfg.attack.rating,
                rater_group_alignment: cfg.attack.alignment,
                camouflage_votes_per_sybil: cfg.attack.camouflage,
                approval: cfg.sim.approval,
            };
            atk.validate()?;
            let files = prepare_dir(
                &dir,
                &[
                    "votes.tsv",
                    "truth.tsv",
                    "params.tsv",
                    "scores.tsv",
                    "report.tsv",
                    "config.echo",
                ],
                force,
            )?;

            let run = run_attack(&cfg.sim, &cfg.train, &atk, seed)?;
            write_votes(&run.attacked, &files[0])?;
            write_truth(&run.clean.truth, &files[1])?;
            write_params(
                &LabeledParams::from_dataset(&run.attacked, run.params.clone())?,
                &files[2],
            )?;
            write_scores(&run.scores, &classify_all(&run.scores, &cfg.thresholds), &files[3])?;
            write_text(
                &files[4],
                &report::attack_report(&run.outcome, &run.attacked, &run.report, seed),
            )?;
            write_text(&files[5], &cfg.echo())?;
        }
        Command::Gradcheck { seed } => {
            let (data, params) = gradcheck_instance(seed)?;
            let check = gradient_check(&params, &data, &RegConfig::default(), GRADCHECK_STEP)?;
            let _ = writeln!(out, "users\t{}", data.num_users());
            let _ = writeln!(out, "notes\t{}", data.num_notes());
            let _ = writeln!(out, "votes\t{}", data.num_votes());
            let _ = writeln!(out, "max_relative_error\t{:e}", check.max_relative_error);
            let passed = check.max_relative_error < GRADCHECK_LIMIT;
            if !passed {
                return Err(CliError::Check(format!(
                    "max relative gradient error {:e} is not below {GRADCHECK_LIMIT:e}",
                    check.max_relative_error
                )));
            }
        }
        Command::Convert {
            input,
            out: path,
            mode,
            force,
        } => {
            refuse_overwrite(&path, force)?;
            let stats = convert_public_data(&input, &path, mode)?;
            if stats.dropped_somewhat > 0 {
                let _ = writeln!(
                    err,
                    "warning: dropped {} SOMEWHAT_HELPFUL ratings",
                    stats.dropped_somewhat
                );
            }
            if stats.dropped_unknown > 0 {
                let _ = writeln!(
                    err,
                    "warning: dropped {} ratings with an empty or unknown helpfulness level",
                    stats.dropped_unknown
                );
            }
            let _ = writeln!(err, "kept {} ratings", stats.kept);
        }
        Command::Report {
            scores,
            truth,
            out: path,
            force,
        } => {
            refuse_overwrite(&path, force)?;
            let rows = read_scores(&scores)?;
            let truth = read_truth(&truth)?;
            write_text(&path, &report::recovery_report(&rows, &truth)?)?;
        }
    }
    Ok(())
}

fn load_config(path: &Path) -> Result<ExperimentConfig, CliError> {
    let bytes = std::fs::read(path).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })?;
    let text = String::from_utf8(bytes).map_err(|e| CliError::Check(format!("{}: {e}", path.display())))?;
    ExperimentConfig::parse(&text).map_err(|source| CliError::Config {
        path: path.to_owned(),
        source,
    })
}

fn refuse_overwrite(path: &Path, force: bool) -> Result<(), CliError> {
    if !force && path.exists() {
        return Err(CliError::Exists(path.to_owned()));
    }
    Ok(())
}

/// Creates `dir` and returns the output paths, checking none would be
/// overwritten before anything is written.
fn prepare_dir(dir: &Path, names: &[&str], force: bool) -> Result<Vec<PathBuf>, CliError> {
    let files: Vec<PathBuf> = names.iter().map(|n| dir.join(n)).collect();
    for f in &files {
        refuse_overwrite(f, force)?;
    }
    std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.to_owned(),
        source,
    })?;
    Ok(files)
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}
