//! Command-line interface of the `schoolmatch` binary.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use schoolmatch::{complete_preferences, optimal_q_bounded, StrategyKind, DEFAULT_SEARCH_BOUND};
use serde::Serialize;

use crate::config::{
    parse_strategy, Algorithm, ExperimentConfig, OutputFormat, PostOptimizer, ScenarioSource,
};
use crate::error::{HarnessError, Result};
use crate::instance::{format_instance, parse_instance, parse_partial};
use crate::output::{emit_matrix, emit_sensitivity, emit_strategy};
use crate::runner::{run_matrix_with, sensitivity_study_with, strategy_study_with, Summary};

#[derive(Debug, Parser)]
#[command(
    name = "schoolmatch",
    version,
    about = "School choice mechanism experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one algorithm over a Monte Carlo ensemble.
    Run(RunArgs),
    /// Run each dataset twice with independent lotteries and compare.
    Sensitivity(RunArgs),
    /// Compare strategic pupils against an all-honest reference.
    Strategy(RunArgs),
    /// Exact minimum average rank of a small instance.
    Oracle {
        #[arg(long)]
        instance: PathBuf,
        /// Maximum number of assignments to enumerate.
        #[arg(long, default_value_t = DEFAULT_SEARCH_BOUND)]
        bound: u128,
        #[arg(long, default_value = "csv")]
        format: OutputFormat,
    },
    /// Complete partial preference lists, least popular schools last.
    Complete {
        #[arg(long)]
        input: PathBuf,
        /// Defaults to standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Builtin scenario A-D or a TOML scenario file.
    #[arg(long, default_value = "B")]
    pub scenario: ScenarioSource,
    /// boston-stb, boston-mtb, da-stb, da-mtb or zeeburg.
    #[arg(long, default_value = "zeeburg")]
    pub algorithm: Algorithm,
    /// none, pe or pem.
    #[arg(long, default_value = "none")]
    pub post: PostOptimizer,
    /// none, cautious or gambling.
    #[arg(long, value_parser = parse_strategy)]
    pub strategy: Option<StrategyKind>,
    /// Share of pupils following the strategy.
    #[arg(long, default_value_t = 0.5)]
    pub fraction: f64,
    /// 1000 by default, 100 for the strategy study.
    #[arg(long)]
    pub experiments: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Keep the best of this many lotteries per experiment.
    #[arg(long, default_value_t = 1)]
    pub best_of: usize,
    #[arg(long, default_value = "csv")]
    pub format: OutputFormat,
    /// Records file; the summary goes next to it.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl RunArgs {
    fn config(
        &self,
        default_experiments: usize,
        default_strategy: StrategyKind,
    ) -> ExperimentConfig {
        let strategy = self.strategy.unwrap_or(default_strategy);
        ExperimentConfig {
            scenario: self.scenario.clone(),
            algorithm: self.algorithm,
            post: self.post,
            strategy,
            fraction: if strategy == StrategyKind::Honest {
                0.0
            } else {
                self.fraction
            },
            experiments: self.experiments.unwrap_or(default_experiments),
            base_seed: self.seed,
            best_of: self.best_of,
        }
    }
}

fn print_summary(out: &mut impl Write, label: &str, s: &Summary) -> std::io::Result<()> {
    writeln!(
        out,
        "{label}: Q = {:.4} +- {:.4} over {} experiments",
        s.all.mean_q, s.all.std_q, s.experiments
    )?;
    for (name, g) in [("strategists", &s.strategists), ("honest", &s.honest)] {
        if let Some(g) = g {
            writeln!(out, "  {name}: Q = {:.4} +- {:.4}", g.mean_q, g.std_q)?;
        }
    }
    if let Some(t) = s.mean_tiebreaks {
        writeln!(out, "  mean lottery decisions: {t:.2}")?;
    }
    if let Some(w) = s.mean_swaps {
        writeln!(out, "  mean swaps: {w:.2}")?;
    }
    Ok(())
}

fn report_written(out: &mut impl Write, paths: &[PathBuf]) -> std::io::Result<()> {
    for p in paths {
        writeln!(out, "wrote {}", p.display())?;
    }
    Ok(())
}

#[derive(Serialize)]
struct OracleReport {
    pupils: usize,
    total_rank: usize,
    average_rank: f64,
    assignment: Vec<usize>,
}

fn stdout_err(e: std::io::Error) -> HarnessError {
    HarnessError::io("<stdout>", e)
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))
}

pub fn execute(cli: Cli, out: &mut impl Write) -> Result<()> {
    match cli.command {
        Command::Run(args) => {
            let config = args.config(1000, StrategyKind::Honest);
            config.validate()?;
            let def = config.scenario.load()?;
            let result = run_matrix_with(&config, &def)?;
            let label = format!("{} {}", config.algorithm, config.post.name());
            print_summary(out, &label, &result.summary).map_err(stdout_err)?;
            if let Some(path) = &args.out {
                let written = emit_matrix(&result, def.problem.num_schools(), args.format, path)?;
                report_written(out, &written).map_err(stdout_err)?;
            }
        }
        Command::Sensitivity(args) => {
            let config = args.config(1000, StrategyKind::Honest);
            config.validate()?;
            let def = config.scenario.load()?;
            let result = sensitivity_study_with(&config, &def)?;
            let s = &result.summary;
            writeln!(
                out,
                "{} {}: differences = {:.2} +- {:.2}, dQ = {:.5} +- {:.5}",
                config.algorithm,
                config.post.name(),
                s.mean_differences,
                s.std_differences,
                s.mean_delta_q,
                s.std_delta_q
            )
            .map_err(stdout_err)?;
            if let Some(path) = &args.out {
                let written = emit_sensitivity(&result, args.format, path)?;
                report_written(out, &written).map_err(stdout_err)?;
            }
        }
        Command::Strategy(args) => {
            let config = args.config(100, StrategyKind::Cautious);
            config.validate()?;
            let def = config.scenario.load()?;
            let result = strategy_study_with(&config, &def)?;
            print_summary(out, "with strategists", &result.strategic.summary)
                .map_err(stdout_err)?;
            print_summary(out, "all honest", &result.reference.summary).map_err(stdout_err)?;
            if let Some(path) = &args.out {
                let written = emit_strategy(&result, def.problem.num_schools(), args.format, path)?;
                report_written(out, &written).map_err(stdout_err)?;
            }
        }
        Command::Oracle {
            instance,
            bound,
            format,
        } => {
            let inst = parse_instance(&read(&instance)?, &instance)?;
            let opt = optimal_q_bounded(&inst.problem, &inst.prefs, bound)?;
            let report = OracleReport {
                pupils: inst.problem.num_pupils(),
                total_rank: opt.total_rank,
                average_rank: opt.average_rank,
                assignment: opt.solution.to_one_based(),
            };
            match format {
                OutputFormat::Json => {
                    serde_json::to_writer_pretty(&mut *out, &report)
                        .map_err(|e| stdout_err(e.into()))?;
                    writeln!(out).map_err(stdout_err)?;
                }
                OutputFormat::Csv => {
                    let a: Vec<String> = report.assignment.iter().map(|s| s.to_string()).collect();
                    writeln!(
                        out,
                        "minimum total rank {} over {} pupils (Q = {})\nassignment {}",
                        report.total_rank,
                        report.pupils,
                        report.average_rank,
                        a.join(" ")
                    )
                    .map_err(stdout_err)?;
                }
            }
        }
        Command::Complete { input, out: target } => {
            let partial = parse_partial(&read(&input)?, &input)?;
            let prefs = complete_preferences(&partial.lists, &partial.problem)?;
            let text = format_instance(&partial.problem, &prefs);
            match target {
                Some(path) => std::fs::write(&path, text).map_err(|e| HarnessError::io(path, e))?,
                None => out.write_all(text.as_bytes()).map_err(stdout_err)?,
            }
        }
    }
    Ok(())
}

/// Parses `args` and runs the command, returning the process exit code:
/// 0 on success, 1 for invalid arguments or input, 2 for I/O failures.
pub fn main_with<I, T>(args: I, out: &mut impl Write, err: &mut impl Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = if code == 0 {
                write!(out, "{}", e.render())
            } else {
                write!(err, "{}", e.render())
            };
            return code;
        }
    };
    match execute(cli, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
