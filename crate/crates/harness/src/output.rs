//! Writing run results to disk.
//!
//! A records file holds one row (CSV) or array element (JSON) per
//! experiment. The summary goes to a sibling file named
//! `<stem>.summary.<ext>`. Numbers use Rust's shortest round-trip `Display`
//! form; absent values are empty CSV fields or JSON `null`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::OutputFormat;
use crate::error::{HarnessError, Result};
use crate::runner::{
    ExperimentRecord, GroupRecord, GroupSummary, MatrixOutput, SensitivityOutput,
    SensitivityRecord, SensitivitySummary, StrategyOutput, Summary,
};

/// `<stem>.<tag>.<ext>` next to `path`.
pub fn sibling_path(path: &Path, tag: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}.{tag}.{}", ext.to_string_lossy()),
        None => format!("{stem}.{tag}"),
    };
    path.with_file_name(name)
}

pub fn summary_path(path: &Path) -> PathBuf {
    sibling_path(path, "summary")
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

pub fn record_header(num_schools: usize) -> Vec<String> {
    let mut h: Vec<String> = [
        "experiment",
        "seed",
        "q",
        "tiebreaks",
        "swaps",
        "pupils_strategists",
        "q_strategists",
        "pupils_honest",
        "q_honest",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    h.extend((1..=num_schools).map(|k| format!("h{k}")));
    h.extend((1..=num_schools).map(|k| format!("c{k}")));
    h
}

fn record_row(r: &ExperimentRecord) -> Vec<String> {
    let group = |g: &Option<GroupRecord>| {
        [
            opt(g.as_ref().map(|g| g.pupils)),
            opt(g.as_ref().filter(|g| g.pupils > 0).map(|g| g.q)),
        ]
    };
    let mut row = vec![
        r.experiment.to_string(),
        r.seed.to_string(),
        r.q.to_string(),
        opt(r.tiebreaks),
        opt(r.swaps),
    ];
    row.extend(group(&r.strategists));
    row.extend(group(&r.honest));
    row.extend(r.histogram.iter().map(|v| v.to_string()));
    row.extend(r.cumulative.iter().map(|v| v.to_string()));
    row
}

pub fn write_records_csv<W: Write>(
    out: W,
    records: &[ExperimentRecord],
    num_schools: usize,
) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(record_header(num_schools))?;
    for r in records {
        w.write_record(record_row(r))?;
    }
    w.flush()?;
    Ok(())
}

pub const SENSITIVITY_HEADER: [&str; 6] = [
    "experiment",
    "seed",
    "q_first",
    "q_second",
    "delta_q",
    "differences",
];

pub fn write_sensitivity_csv<W: Write>(out: W, records: &[SensitivityRecord]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SENSITIVITY_HEADER)?;
    for r in records {
        w.write_record([
            r.experiment.to_string(),
            r.seed.to_string(),
            r.q_first.to_string(),
            r.q_second.to_string(),
            r.delta_q.to_string(),
            r.differences.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn group_metrics(prefix: &str, g: &GroupSummary, rows: &mut Vec<(String, String)>) {
    if !prefix.is_empty() {
        rows.push((format!("{prefix}experiments"), g.experiments.to_string()));
    }
    rows.push((format!("{prefix}mean_q"), g.mean_q.to_string()));
    rows.push((format!("{prefix}std_q"), g.std_q.to_string()));
    for (k, v) in g.mean_cumulative.iter().enumerate() {
        rows.push((format!("{prefix}mean_c{}", k + 1), v.to_string()));
    }
    for (k, v) in g.std_cumulative.iter().enumerate() {
        rows.push((format!("{prefix}std_c{}", k + 1), v.to_string()));
    }
}

/// Summary flattened to `(metric, value)` pairs.
pub fn summary_metrics(s: &Summary) -> Vec<(String, String)> {
    let mut rows = vec![("experiments".to_string(), s.experiments.to_string())];
    group_metrics("", &s.all, &mut rows);
    if let Some(g) = &s.strategists {
        group_metrics("strategists_", g, &mut rows);
    }
    if let Some(g) = &s.honest {
        group_metrics("honest_", g, &mut rows);
    }
    rows.push(("mean_tiebreaks".into(), opt(s.mean_tiebreaks)));
    rows.push(("mean_swaps".into(), opt(s.mean_swaps)));
    rows
}

pub fn sensitivity_metrics(s: &SensitivitySummary) -> Vec<(String, String)> {
    vec![
        ("experiments".into(), s.experiments.to_string()),
        ("mean_differences".into(), s.mean_differences.to_string()),
        ("std_differences".into(), s.std_differences.to_string()),
        ("mean_delta_q".into(), s.mean_delta_q.to_string()),
        ("std_delta_q".into(), s.std_delta_q.to_string()),
        ("mean_abs_delta_q".into(), s.mean_abs_delta_q.to_string()),
    ]
}

pub fn write_metrics_csv<W: Write>(out: W, metrics: &[(String, String)]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["metric", "value"])?;
    for (k, v) in metrics {
        w.write_record([k, v])?;
    }
    w.flush()?;
    Ok(())
}

fn write_file(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
    let file = File::create(path).map_err(|e| HarnessError::io(path, e))?;
    let mut w = BufWriter::new(file);
    f(&mut w)?;
    w.flush().map_err(|e| HarnessError::io(path, e))
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> HarnessError + '_ {
    move |e| match e.into_kind() {
        csv::ErrorKind::Io(io) => HarnessError::io(path, io),
        other => HarnessError::Parse {
            path: path.to_path_buf(),
            message: format!("{other:?}"),
        },
    }
}

fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    write_file(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value).map_err(|e| HarnessError::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        w.write_all(b"\n").map_err(|e| HarnessError::io(path, e))
    })
}

/// Writes records to `path` and the summary to its sibling summary file.
/// Returns the paths written.
pub fn emit_matrix(
    output: &MatrixOutput,
    num_schools: usize,
    format: OutputFormat,
    path: &Path,
) -> Result<Vec<PathBuf>> {
    let spath = summary_path(path);
    match format {
        OutputFormat::Csv => {
            write_file(path, |w| {
                write_records_csv(w, &output.records, num_schools).map_err(csv_err(path))
            })?;
            write_file(&spath, |w| {
                write_metrics_csv(w, &summary_metrics(&output.summary)).map_err(csv_err(&spath))
            })?;
        }
        OutputFormat::Json => {
            write_json(path, &output.records)?;
            write_json(&spath, &output.summary)?;
        }
    }
    Ok(vec![path.to_path_buf(), spath])
}

pub fn emit_sensitivity(
    output: &SensitivityOutput,
    format: OutputFormat,
    path: &Path,
) -> Result<Vec<PathBuf>> {
    let spath = summary_path(path);
    match format {
        OutputFormat::Csv => {
            write_file(path, |w| {
                write_sensitivity_csv(w, &output.records).map_err(csv_err(path))
            })?;
            write_file(&spath, |w| {
                write_metrics_csv(w, &sensitivity_metrics(&output.summary)).map_err(csv_err(&spath))
            })?;
        }
        OutputFormat::Json => {
            write_json(path, &output.records)?;
            write_json(&spath, &output.summary)?;
        }
    }
    Ok(vec![path.to_path_buf(), spath])
}

/// Strategic run at `path`, the all-honest reference at
/// `<stem>.reference.<ext>`, each with its own summary file.
pub fn emit_strategy(
    output: &StrategyOutput,
    num_schools: usize,
    format: OutputFormat,
    path: &Path,
) -> Result<Vec<PathBuf>> {
    let mut written = emit_matrix(&output.strategic, num_schools, format, path)?;
    let reference = sibling_path(path, "reference");
    written.extend(emit_matrix(
        &output.reference,
        num_schools,
        format,
        &reference,
    )?);
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(e: usize) -> ExperimentRecord {
        ExperimentRecord {
            experiment: e,
            seed: 42,
            q: 1.5,
            histogram: vec![2, 2, 0],
            cumulative: vec![0.5, 1.0, 1.0],
            tiebreaks: Some(3),
            swaps: None,
            strategists: Some(GroupRecord {
                pupils: 0,
                q: f64::NAN,
                histogram: vec![0; 3],
                cumulative: vec![0.0; 3],
            }),
            honest: None,
        }
    }

    #[test]
    fn header_only_without_records() {
        let mut buf = Vec::new();
        write_records_csv(&mut buf, &[], 2).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "experiment,seed,q,tiebreaks,swaps,pupils_strategists,q_strategists,\
             pupils_honest,q_honest,h1,h2,c1,c2\n"
        );
    }

    #[test]
    fn row_layout() {
        let mut buf = Vec::new();
        write_records_csv(&mut buf, &[record(0), record(1)], 3).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[1], "0,42,1.5,3,,0,,,,2,2,0,0.5,1,1");
        assert_eq!(lines[0].split(',').count(), lines[1].split(',').count());
    }

    #[test]
    fn sibling_names() {
        assert_eq!(
            summary_path(Path::new("out/run.csv")),
            PathBuf::from("out/run.summary.csv")
        );
        assert_eq!(
            sibling_path(Path::new("run"), "reference"),
            PathBuf::from("run.reference")
        );
    }

    #[test]
    fn missing_directory_is_an_io_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("no/such/dir/out.csv");
        let output = MatrixOutput {
            summary: crate::runner::summarize(&[], 3),
            records: vec![],
        };
        let err = emit_matrix(&output, 3, OutputFormat::Csv, &path).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("out.csv"));
    }
}
