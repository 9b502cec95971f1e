//! Boston (immediate acceptance) and pupil-proposing deferred acceptance.
//!
//! Both run in batch rounds: every pupil that is free at the start of a round
//! applies simultaneously, so the result does not depend on the order in
//! which pupils are visited.

use crate::error::{infeasible, Result};
use crate::model::{Preference, PreferenceSet, Problem, PupilId, Solution, TieBreaker};

pub(crate) fn check_instance(
    problem: &Problem,
    prefs: &PreferenceSet,
    tb: &TieBreaker,
) -> Result<()> {
    if problem.num_pupils() > problem.total_places() {
        return Err(infeasible("more pupils than places"));
    }
    prefs.check_against(problem)?;
    tb.check_against(problem)
}

/// Boston mechanism. In round `k` every unplaced pupil applies to their
/// `k`-th choice and schools with free places admit applicants in lottery
/// order. Admissions are final.
pub fn boston(problem: &Problem, prefs: &PreferenceSet, tb: &TieBreaker) -> Result<Solution> {
    check_instance(problem, prefs, tb)?;
    let n = problem.num_pupils();
    let m = problem.num_schools();
    let mut vacant = problem.capacities().to_vec();
    let mut assignment: Vec<Option<usize>> = vec![None; n];
    let mut applicants: Vec<Vec<PupilId>> = vec![Vec::new(); m];

    for round in 0..m {
        for (pupil, pref) in prefs.iter().enumerate() {
            if assignment[pupil].is_none() {
                applicants[pref.ranking()[round]].push(pupil);
            }
        }
        for (school, queue) in applicants.iter_mut().enumerate() {
            queue.sort_unstable_by_key(|&p| tb.priority(school, p));
            for &pupil in queue.iter().take(vacant[school]) {
                assignment[pupil] = Some(school);
            }
            vacant[school] -= queue.len().min(vacant[school]);
            queue.clear();
        }
    }
    collect(assignment)
}

/// Pupil-proposing deferred acceptance. Schools hold the best proposers by
/// lottery priority and reject the rest until no rejections remain.
pub fn deferred_acceptance(
    problem: &Problem,
    prefs: &PreferenceSet,
    tb: &TieBreaker,
) -> Result<Solution> {
    check_instance(problem, prefs, tb)?;
    let n = problem.num_pupils();
    let m = problem.num_schools();
    let mut next_choice = vec![0usize; n];
    let mut held: Vec<Vec<PupilId>> = vec![Vec::new(); m];
    let mut free: Vec<PupilId> = (0..n).collect();
    let mut touched = vec![false; m];

    while !free.is_empty() {
        for &pupil in &free {
            let pref: &Preference = prefs.get(pupil);
            let choice = next_choice[pupil];
            if choice >= m {
                return Err(infeasible(format!(
                    "pupil {} rejected by every school",
                    pupil + 1
                )));
            }
            let school = pref.ranking()[choice];
            next_choice[pupil] += 1;
            held[school].push(pupil);
            touched[school] = true;
        }
        free.clear();
        for school in 0..m {
            if !std::mem::take(&mut touched[school]) {
                continue;
            }
            let cap = problem.capacity(school);
            let holding = &mut held[school];
            if holding.len() > cap {
                holding.sort_unstable_by_key(|&p| tb.priority(school, p));
                free.extend(holding.drain(cap..));
            }
        }
    }

    let mut assignment = vec![None; n];
    for (school, pupils) in held.iter().enumerate() {
        for &p in pupils {
            assignment[p] = Some(school);
        }
    }
    collect(assignment)
}

fn collect(assignment: Vec<Option<usize>>) -> Result<Solution> {
    assignment
        .into_iter()
        .enumerate()
        .map(|(i, a)| a.ok_or_else(|| infeasible(format!("pupil {} was not placed", i + 1))))
        .collect::<Result<Vec<_>>>()
        .map(Solution::new)
}
