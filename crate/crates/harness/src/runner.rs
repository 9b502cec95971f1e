//! Monte Carlo runs: per-experiment pipelines, the sensitivity study and the
//! strategy study, with their summaries.
//!
//! Experiments run in parallel but each draws only from its own seeded
//! streams, and results are collected in experiment order.

use rayon::prelude::*;
use serde::Serialize;

use schoolmatch::{
    count_differences, evaluate, generate_dataset, pairwise_exchange, true_rank_report,
    PreferenceSet, RankReport, Solution, StrategyMix,
};

use crate::config::{ExperimentConfig, ScenarioDef};
use crate::error::{HarnessError, Result};
use crate::seeds::{derive_seed, stream, StreamRole};

/// Rank statistics of a group of pupils in one experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupRecord {
    pub pupils: usize,
    pub q: f64,
    pub histogram: Vec<usize>,
    pub cumulative: Vec<f64>,
}

impl From<&RankReport> for GroupRecord {
    fn from(r: &RankReport) -> Self {
        Self {
            pupils: r.num_pupils(),
            q: r.average_rank,
            histogram: r.histogram.clone(),
            cumulative: r.cumulative.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentRecord {
    pub experiment: usize,
    /// Seed of the dataset stream.
    pub seed: u64,
    /// Average true rank over all pupils.
    pub q: f64,
    pub histogram: Vec<usize>,
    pub cumulative: Vec<f64>,
    /// Forced lottery decisions (Zeeburg only).
    pub tiebreaks: Option<usize>,
    /// Swaps made by the exchange pass.
    pub swaps: Option<usize>,
    pub strategists: Option<GroupRecord>,
    pub honest: Option<GroupRecord>,
}

/// Mean and standard deviation across experiments of one group's Q and
/// cumulative curve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupSummary {
    /// Experiments in which the group was non-empty.
    pub experiments: usize,
    pub mean_q: f64,
    pub std_q: f64,
    pub mean_cumulative: Vec<f64>,
    pub std_cumulative: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub experiments: usize,
    pub all: GroupSummary,
    pub strategists: Option<GroupSummary>,
    pub honest: Option<GroupSummary>,
    pub mean_tiebreaks: Option<f64>,
    pub mean_swaps: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatrixOutput {
    pub records: Vec<ExperimentRecord>,
    pub summary: Summary,
}

/// Sample mean and standard deviation (n - 1 denominator; 0 for one value).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

fn summarize_group<'a>(groups: impl Iterator<Item = (f64, &'a [f64])>, m: usize) -> GroupSummary {
    let (qs, curves): (Vec<f64>, Vec<&[f64]>) = groups.unzip();
    let (mean_q, std_q) = mean_std(&qs);
    let (mean_cumulative, std_cumulative) = (0..m)
        .map(|k| mean_std(&curves.iter().map(|c| c[k]).collect::<Vec<_>>()))
        .unzip();
    GroupSummary {
        experiments: qs.len(),
        mean_q,
        std_q,
        mean_cumulative,
        std_cumulative,
    }
}

fn mean_of(values: impl Iterator<Item = Option<usize>>) -> Option<f64> {
    let v: Option<Vec<f64>> = values.map(|x| x.map(|x| x as f64)).collect();
    v.filter(|v| !v.is_empty()).map(|v| mean_std(&v).0)
}

pub fn summarize(records: &[ExperimentRecord], num_schools: usize) -> Summary {
    let all = summarize_group(
        records.iter().map(|r| (r.q, r.cumulative.as_slice())),
        num_schools,
    );
    let group = |pick: fn(&ExperimentRecord) -> Option<&GroupRecord>| {
        if records.iter().all(|r| pick(r).is_none()) {
            return None;
        }
        Some(summarize_group(
            records
                .iter()
                .filter_map(pick)
                .filter(|g| g.pupils > 0)
                .map(|g| (g.q, g.cumulative.as_slice())),
            num_schools,
        ))
    };
    Summary {
        experiments: records.len(),
        all,
        strategists: group(|r| r.strategists.as_ref()),
        honest: group(|r| r.honest.as_ref()),
        mean_tiebreaks: mean_of(records.iter().map(|r| r.tiebreaks)),
        mean_swaps: mean_of(records.iter().map(|r| r.swaps)),
    }
}

/// One experiment's dataset: true preferences, what pupils report, and who
/// strategises.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub seed: u64,
    pub true_prefs: PreferenceSet,
    pub reported: PreferenceSet,
    pub mask: Vec<bool>,
}

pub fn build_dataset(
    config: &ExperimentConfig,
    def: &ScenarioDef,
    experiment: usize,
) -> Result<Dataset> {
    let e = experiment as u64;
    let seed = derive_seed(config.base_seed, e, StreamRole::Dataset);
    let true_prefs = generate_dataset(
        &def.scenario,
        &def.problem,
        &mut stream(config.base_seed, e, StreamRole::Dataset),
    )?;
    let n = def.problem.num_pupils();
    let (reported, mask) = if config.strategies_active() {
        let mix = StrategyMix::new(
            config.strategy,
            config.fraction,
            def.scenario.average_popularity(),
        )?;
        let mask = mix.draw_mask(
            n,
            &mut stream(config.base_seed, e, StreamRole::StrategistMask),
        );
        (mix.apply(&true_prefs, &mask)?, mask)
    } else {
        (true_prefs.clone(), vec![false; n])
    };
    Ok(Dataset {
        seed,
        true_prefs,
        reported,
        mask,
    })
}

#[derive(Debug, Clone)]
pub struct PipelineRun {
    pub solution: Solution,
    pub tiebreaks: Option<usize>,
    pub swaps: Option<usize>,
}

/// Mechanism plus optional exchange pass on the reported preferences, using
/// the lottery stream `role`.
fn run_once(
    config: &ExperimentConfig,
    def: &ScenarioDef,
    prefs: &PreferenceSet,
    experiment: usize,
    role: StreamRole,
) -> Result<PipelineRun> {
    let mut rng = stream(config.base_seed, experiment as u64, role);
    let (solution, tiebreaks) = config.algorithm.run(&def.problem, prefs, &mut rng)?;
    let run = match config.post.variant() {
        None => PipelineRun {
            solution,
            tiebreaks,
            swaps: None,
        },
        Some(variant) => {
            let out = pairwise_exchange(&def.problem, prefs, &solution, variant)?;
            PipelineRun {
                solution: out.solution,
                tiebreaks,
                swaps: Some(out.swaps),
            }
        }
    };
    run.solution.check_feasible(&def.problem)?;
    Ok(run)
}

/// Runs the configured pipeline `best_of` times with independent lotteries
/// and keeps the run with the smallest reported average rank (earliest on
/// ties). `role` selects the first lottery stream.
pub fn run_pipeline(
    config: &ExperimentConfig,
    def: &ScenarioDef,
    prefs: &PreferenceSet,
    experiment: usize,
    role: StreamRole,
) -> Result<PipelineRun> {
    let mut best: Option<(usize, PipelineRun)> = None;
    for replica in 0..config.best_of {
        let stream_role = if replica == 0 {
            role
        } else {
            StreamRole::Replica(replica as u32)
        };
        let run = run_once(config, def, prefs, experiment, stream_role)?;
        let total = evaluate(&def.problem, prefs, &run.solution)?.total_rank;
        if best.as_ref().is_none_or(|(t, _)| total < *t) {
            best = Some((total, run));
        }
    }
    Ok(best.expect("best_of >= 1").1)
}

fn record(
    config: &ExperimentConfig,
    def: &ScenarioDef,
    experiment: usize,
    data: &Dataset,
    run: &PipelineRun,
) -> Result<ExperimentRecord> {
    let report = evaluate(&def.problem, &data.true_prefs, &run.solution)?;
    let (strategists, honest) = if config.strategies_active() {
        let (s, h) = true_rank_report(&data.true_prefs, &run.solution, &data.mask)?;
        (Some(GroupRecord::from(&s)), Some(GroupRecord::from(&h)))
    } else {
        (None, None)
    };
    Ok(ExperimentRecord {
        experiment,
        seed: data.seed,
        q: report.average_rank,
        histogram: report.histogram,
        cumulative: report.cumulative,
        tiebreaks: run.tiebreaks,
        swaps: run.swaps,
        strategists,
        honest,
    })
}

pub fn run_experiment(
    config: &ExperimentConfig,
    def: &ScenarioDef,
    experiment: usize,
) -> Result<ExperimentRecord> {
    let data = build_dataset(config, def, experiment)?;
    let run = run_pipeline(
        config,
        def,
        &data.reported,
        experiment,
        StreamRole::TieBreaker,
    )?;
    record(config, def, experiment, &data, &run)
}

fn par_experiments<T: Send>(
    experiments: usize,
    f: impl Fn(usize) -> Result<T> + Sync + Send,
) -> Result<Vec<T>> {
    (0..experiments).into_par_iter().map(f).collect()
}

/// Runs every experiment of the configuration.
pub fn run_matrix(config: &ExperimentConfig) -> Result<MatrixOutput> {
    config.validate()?;
    let def = config.scenario.load()?;
    run_matrix_with(config, &def)
}

pub fn run_matrix_with(config: &ExperimentConfig, def: &ScenarioDef) -> Result<MatrixOutput> {
    config.validate()?;
    let records = par_experiments(config.experiments, |e| run_experiment(config, def, e))?;
    let summary = summarize(&records, def.problem.num_schools());
    Ok(MatrixOutput { records, summary })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SensitivityRecord {
    pub experiment: usize,
    pub seed: u64,
    pub q_first: f64,
    pub q_second: f64,
    /// Second minus first.
    pub delta_q: f64,
    pub differences: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SensitivitySummary {
    pub experiments: usize,
    pub mean_differences: f64,
    pub std_differences: f64,
    pub mean_delta_q: f64,
    pub std_delta_q: f64,
    pub mean_abs_delta_q: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SensitivityOutput {
    pub records: Vec<SensitivityRecord>,
    pub summary: SensitivitySummary,
}

/// Runs the pipeline twice per dataset with independent lotteries and
/// compares the two solutions.
pub fn sensitivity_study(config: &ExperimentConfig) -> Result<SensitivityOutput> {
    config.validate()?;
    let def = config.scenario.load()?;
    sensitivity_study_with(config, &def)
}

pub fn sensitivity_study_with(
    config: &ExperimentConfig,
    def: &ScenarioDef,
) -> Result<SensitivityOutput> {
    config.validate()?;
    let records = par_experiments(config.experiments, |e| {
        let data = build_dataset(config, def, e)?;
        let first = run_pipeline(config, def, &data.reported, e, StreamRole::TieBreaker)?;
        let second = run_pipeline(config, def, &data.reported, e, StreamRole::SecondTieBreaker)?;
        let q_first = evaluate(&def.problem, &data.true_prefs, &first.solution)?.average_rank;
        let q_second = evaluate(&def.problem, &data.true_prefs, &second.solution)?.average_rank;
        Ok(SensitivityRecord {
            experiment: e,
            seed: data.seed,
            q_first,
            q_second,
            delta_q: q_second - q_first,
            differences: count_differences(&first.solution, &second.solution)?,
        })
    })?;
    let diffs: Vec<f64> = records.iter().map(|r| r.differences as f64).collect();
    let deltas: Vec<f64> = records.iter().map(|r| r.delta_q).collect();
    let abs: Vec<f64> = deltas.iter().map(|d| d.abs()).collect();
    let (mean_differences, std_differences) = mean_std(&diffs);
    let (mean_delta_q, std_delta_q) = mean_std(&deltas);
    let summary = SensitivitySummary {
        experiments: records.len(),
        mean_differences,
        std_differences,
        mean_delta_q,
        std_delta_q,
        mean_abs_delta_q: mean_std(&abs).0,
    };
    Ok(SensitivityOutput { records, summary })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrategyOutput {
    /// Runs with the strategists' reported preferences.
    pub strategic: MatrixOutput,
    /// Same datasets and lotteries with everyone honest; groups are split by
    /// the same strategist mask.
    pub reference: MatrixOutput,
}

/// Compares a run with strategic pupils against the all-honest run on the
/// same datasets. Ranks are always measured on the true preferences.
pub fn strategy_study(config: &ExperimentConfig) -> Result<StrategyOutput> {
    config.validate()?;
    let def = config.scenario.load()?;
    strategy_study_with(config, &def)
}

pub fn strategy_study_with(config: &ExperimentConfig, def: &ScenarioDef) -> Result<StrategyOutput> {
    config.validate()?;
    if !config.strategies_active() {
        return Err(HarnessError::Config(
            "the strategy study needs a strategy other than none".into(),
        ));
    }
    let pairs = par_experiments(config.experiments, |e| {
        let data = build_dataset(config, def, e)?;
        let strategic = run_pipeline(config, def, &data.reported, e, StreamRole::TieBreaker)?;
        let honest = run_pipeline(config, def, &data.true_prefs, e, StreamRole::TieBreaker)?;
        Ok((
            record(config, def, e, &data, &strategic)?,
            record(config, def, e, &data, &honest)?,
        ))
    })?;
    let (strategic, reference): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
    let m = def.problem.num_schools();
    Ok(StrategyOutput {
        strategic: MatrixOutput {
            summary: summarize(&strategic, m),
            records: strategic,
        },
        reference: MatrixOutput {
            summary: summarize(&reference, m),
            records: reference,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_std_basics() {
        assert_eq!(mean_std(&[2.0]), (2.0, 0.0));
        let (m, s) = mean_std(&[1.0, 2.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((s - 1.0).abs() < 1e-15);
        assert!(mean_std(&[]).0.is_nan());
    }
}
