//! Plain-text instance files.
//!
//! ```text
//! # four pupils, four schools of one place each
//! schools 4
//! capacities 1 1 1 1
//! 1 3 2 4
//! 2 1 3 4
//! 3 4 1 2
//! 2 3 1 4
//! ```
//!
//! Every line after the header is one pupil's ranking with 1-based school
//! ids, most preferred first. Lists given to `complete` may be partial; a
//! lone `-` is an empty list. `#` starts a comment.

use std::path::Path;

use schoolmatch::{Preference, PreferenceSet, Problem, SchoolId};

use crate::error::{HarnessError, Result};

/// Parsed instance whose rankings may be incomplete.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialInstance {
    pub problem: Problem,
    /// 0-based school ids.
    pub lists: Vec<Vec<SchoolId>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub problem: Problem,
    pub prefs: PreferenceSet,
}

fn parse_err(path: &Path, line: usize, message: impl std::fmt::Display) -> HarnessError {
    HarnessError::Parse {
        path: path.to_path_buf(),
        message: format!("line {line}: {message}"),
    }
}

fn numbers(path: &Path, line: usize, fields: &[&str]) -> Result<Vec<usize>> {
    fields
        .iter()
        .map(|f| {
            f.parse::<usize>()
                .map_err(|_| parse_err(path, line, format!("expected a number, found {f:?}")))
        })
        .collect()
}

pub fn parse_partial(text: &str, path: &Path) -> Result<PartialInstance> {
    let mut schools: Option<usize> = None;
    let mut capacities: Option<Vec<usize>> = None;
    let mut lists = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let fields: Vec<&str> = content.split_whitespace().collect();
        match fields[0] {
            "schools" => {
                if schools.is_some() || !lists.is_empty() {
                    return Err(parse_err(path, line, "unexpected schools line"));
                }
                let v = numbers(path, line, &fields[1..])?;
                if v.len() != 1 {
                    return Err(parse_err(path, line, "schools takes one number"));
                }
                schools = Some(v[0]);
            }
            "capacities" => {
                let m =
                    schools.ok_or_else(|| parse_err(path, line, "capacities before schools"))?;
                if capacities.is_some() {
                    return Err(parse_err(path, line, "duplicate capacities line"));
                }
                let v = numbers(path, line, &fields[1..])?;
                if v.len() != m {
                    return Err(parse_err(
                        path,
                        line,
                        format!("{} capacities for {m} schools", v.len()),
                    ));
                }
                capacities = Some(v);
            }
            "-" if fields.len() == 1 => {
                if capacities.is_none() {
                    return Err(parse_err(path, line, "ranking before header"));
                }
                lists.push(Vec::new());
            }
            _ => {
                let m = match (schools, &capacities) {
                    (Some(m), Some(_)) => m,
                    _ => return Err(parse_err(path, line, "ranking before header")),
                };
                let ids = numbers(path, line, &fields)?;
                let mut list = Vec::with_capacity(ids.len());
                for id in ids {
                    if id == 0 || id > m {
                        return Err(parse_err(path, line, format!("no school {id}")));
                    }
                    list.push(id - 1);
                }
                lists.push(list);
            }
        }
    }
    let capacities = capacities.ok_or_else(|| HarnessError::Parse {
        path: path.to_path_buf(),
        message: "missing schools/capacities header".into(),
    })?;
    let problem = Problem::new(capacities, lists.len())?;
    Ok(PartialInstance { problem, lists })
}

/// Parses an instance in which every pupil ranks every school.
pub fn parse_instance(text: &str, path: &Path) -> Result<Instance> {
    let partial = parse_partial(text, path)?;
    let prefs = PreferenceSet::new(
        partial.problem.num_schools(),
        partial
            .lists
            .into_iter()
            .map(Preference::new)
            .collect::<schoolmatch::Result<_>>()?,
    )?;
    prefs.check_against(&partial.problem)?;
    Ok(Instance {
        problem: partial.problem,
        prefs,
    })
}

pub fn format_instance(problem: &Problem, prefs: &PreferenceSet) -> String {
    let caps: Vec<String> = problem.capacities().iter().map(|c| c.to_string()).collect();
    let mut out = format!(
        "schools {}\ncapacities {}\n",
        problem.num_schools(),
        caps.join(" ")
    );
    for p in prefs.iter() {
        let ids: Vec<String> = p.ranking().iter().map(|s| (s + 1).to_string()).collect();
        out.push_str(&ids.join(" "));
        out.push('\n');
    }
    out
}
