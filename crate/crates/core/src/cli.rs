//! The `vecshap` command line.
//!
//! Exit codes: 0 on success, 1 when a numerical check fails, 2 on usage,
//! input or format errors.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::axioms::{self, Axiom, CampaignConfig, Tolerances};
use crate::error::{Error, Result};
use crate::game::Attribution;
use crate::gaussian::{gaussian_game, output_deviation, shap_linear_correlated};
use crate::io::{self, PredictorFile};
use crate::predictor::{explain, ExpectationMode};
use crate::shapley::{shapley_subset, Engine};
use crate::similarity::{cosine_similarity, importance_from_attributions, spearman_correlation};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Absolute efficiency tolerance for `shapley` output, scaled by `max(1, ‖v‖)`.
pub const SHAPLEY_SUM_TOLERANCE: f64 = 1e-10;
/// Absolute efficiency tolerance for `explain`/`explain-gaussian` output,
/// scaled by `max(1, ‖f(x) − baseline‖)`.
pub const EXPLAIN_SUM_TOLERANCE: f64 = 1e-9;
/// Largest accepted analytic-vs-exact discrepancy for `explain-gaussian --path both`.
pub const GAUSSIAN_PATH_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Parser)]
#[command(name = "vecshap", version, about = "Exact vector-valued Shapley attributions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum EngineArg {
    Subset,
    Permutation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PathArg {
    Analytic,
    Exact,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Metric {
    Cosine,
    Spearman,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Shapley attribution of a game given as JSON.
    Shapley {
        #[arg(long)]
        game: PathBuf,
        #[arg(long, value_enum, default_value = "subset")]
        engine: EngineArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Seeded axiom campaign over random games.
    Verify {
        #[arg(long = "n")]
        n: usize,
        #[arg(long = "m")]
        m: usize,
        #[arg(long)]
        trials: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 1e-10)]
        tol_eff: f64,
        #[arg(long, default_value_t = 1e-12)]
        tol_leak: f64,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Closed-form and exact SHAP for a linear model under Gaussian inputs.
    ExplainGaussian {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_enum, default_value = "both")]
        path: PathArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Interventional SHAP for a linear or polynomial model over background data.
    Explain {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        background: PathBuf,
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cosine and Spearman similarity between importance vectors of two
    /// attribution sets.
    Compare {
        #[arg(long, num_args = 1.., required = true)]
        a: Vec<PathBuf>,
        #[arg(long, num_args = 1.., required = true)]
        b: Vec<PathBuf>,
        #[arg(long)]
        output_index: usize,
        #[arg(long, value_enum, value_delimiter = ',', default_value = "cosine,spearman")]
        metrics: Vec<Metric>,
    },
}

/// Parses `argv` (including the program name) and runs the command.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

/// [`run`] with explicit output streams.
pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if e.use_stderr() { write!(err, "{}", e.render()) } else { write!(out, "{}", e.render()) };
            return code;
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_USAGE
        }
    }
}

fn emit(out: &mut dyn Write, path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

/// Human-readable lines go to stdout only when stdout is not carrying the CSV.
fn note(out: &mut dyn Write, err: &mut dyn Write, csv_to_file: bool, line: &str) -> Result<()> {
    if csv_to_file {
        writeln!(out, "{line}")?;
    } else {
        writeln!(err, "{line}")?;
    }
    Ok(())
}

fn efficiency_residual(a: &Attribution, target: &[f64]) -> f64 {
    a.total().iter().zip(target).fold(0.0, |acc, (t, g)| acc.max((t - g).abs()))
}

fn scale(target: &[f64]) -> f64 {
    target.iter().fold(1.0f64, |acc, x| acc.max(x.abs()))
}

fn dispatch(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Shapley { game, engine, out: dest } => {
            let v = io::read_game(&game)?;
            let engine = match engine {
                EngineArg::Subset => Engine::Subset,
                EngineArg::Permutation => Engine::Permutation,
            };
            let a = engine.run(&v)?;
            let residual = efficiency_residual(&a, v.grand());
            emit(out, dest.as_deref(), &io::attribution_csv_string(&a, None, &[], residual))?;
            Ok(if residual <= SHAPLEY_SUM_TOLERANCE * scale(v.grand()) { EXIT_OK } else { EXIT_CHECK_FAILED })
        }
        Command::Verify { n, m, trials, seed, tol_eff, tol_leak, report } => {
            let config =
                CampaignConfig { n, m, trials, seed, tolerances: Tolerances { attribution: tol_eff, leakage: tol_leak } };
            let reports = axioms::run_axiom_campaign(&config)?;
            if let Some(path) = &report {
                let mut buf = Vec::new();
                io::write_report_jsonl(&mut buf, &reports)?;
                fs::write(path, buf)?;
            }
            let summary = axioms::summarize(&reports);
            writeln!(
                out,
                "trials {} records {} failures {}",
                summary.trials, summary.records, summary.failures
            )?;
            for axiom in Axiom::ALL {
                let worst = reports
                    .iter()
                    .filter_map(|r| r.record(axiom))
                    .fold(0.0f64, |acc, r| acc.max(r.residual));
                writeln!(out, "{axiom:<11} max_residual {worst:e} tolerance {:e}", config.tolerances.for_axiom(axiom))?;
            }
            Ok(if summary.failures == 0 { EXIT_OK } else { EXIT_CHECK_FAILED })
        }
        Command::ExplainGaussian { model, instance, path, out: dest } => {
            let model = io::read_model(&model)?;
            let (p, g) = (model.predictor()?, model.gaussian()?);
            let x = io::read_instance(&instance)?;
            let target = output_deviation(&p, &g, &x)?;
            let analytic = matches!(path, PathArg::Analytic | PathArg::Both)
                .then(|| shap_linear_correlated(&p, &g, &x))
                .transpose()?;
            let exact = matches!(path, PathArg::Exact | PathArg::Both)
                .then(|| gaussian_game(&p, &g, &x).map(|v| shapley_subset(&v)))
                .transpose()?;
            let (a, label) = match (&analytic, &exact) {
                (Some(a), _) => (a, "analytic"),
                (None, Some(e)) => (e, "exact"),
                (None, None) => unreachable!("path selects at least one route"),
            };
            let residual = efficiency_residual(a, &target);
            let comments = [("expectation_mode", ExpectationMode::Conditional.to_string()), ("path", label.to_string())];
            emit(out, dest.as_deref(), &io::attribution_csv_string(a, None, &comments, residual))?;
            let mut ok = residual <= EXPLAIN_SUM_TOLERANCE * scale(&target);
            if let (Some(a), Some(e)) = (&analytic, &exact) {
                let gap = a.max_abs_diff(e)?;
                note(out, err, dest.is_some(), &format!("max_abs_discrepancy {gap:e}"))?;
                ok &= gap <= GAUSSIAN_PATH_TOLERANCE * scale(&target);
            }
            Ok(if ok { EXIT_OK } else { EXIT_CHECK_FAILED })
        }
        Command::Explain { model, background, instance, out: dest } => {
            let predictor = PredictorFile::read(&model)?;
            let bg = io::read_background(&background)?;
            let x = io::read_instance(&instance)?;
            let e = explain(predictor.as_predictor(), &bg, &x)?;
            let residual = e.efficiency_residual();
            let comments = [("expectation_mode", e.mode.to_string())];
            let csv = io::attribution_csv_string(&e.attribution, Some(bg.columns()), &comments, residual);
            emit(out, dest.as_deref(), &csv)?;
            let deviation: Vec<f64> = e.prediction.iter().zip(&e.baseline).map(|(p, b)| p - b).collect();
            Ok(if residual <= EXPLAIN_SUM_TOLERANCE * scale(&deviation) { EXIT_OK } else { EXIT_CHECK_FAILED })
        }
        Command::Compare { a, b, output_index, metrics } => {
            let load = |paths: &[PathBuf]| -> Result<Vec<Attribution>> {
                paths.iter().map(|p| io::read_attribution_csv(p).map(|(a, _)| a)).collect()
            };
            let ia = importance_from_attributions(&load(&a)?, output_index)?;
            let ib = importance_from_attributions(&load(&b)?, output_index)?;
            if ia.len() != ib.len() {
                return Err(Error::ShapeMismatch(format!("{} features vs {}", ia.len(), ib.len())));
            }
            for metric in metrics {
                let (name, value) = match metric {
                    Metric::Cosine => ("cosine", cosine_similarity(ia.as_slice(), ib.as_slice())?),
                    Metric::Spearman => ("spearman", spearman_correlation(ia.as_slice(), ib.as_slice())?),
                };
                writeln!(out, "{name} {value:.6}")?;
            }
            Ok(EXIT_OK)
        }
    }
}
