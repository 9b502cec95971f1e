//! Brute-force references for small instances: the exact minimum average
//! rank by exhaustive search, and a scan for mutually improving swaps.

use crate::error::{Error, Result};
use crate::model::{PreferenceSet, Problem, PupilId, SchoolId, Solution};

/// Default cap on the number of feasible assignments `optimal_q` will search.
pub const DEFAULT_SEARCH_BOUND: u128 = 10_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct Optimum {
    pub total_rank: usize,
    pub average_rank: f64,
    /// Lexicographically smallest assignment attaining the minimum.
    pub solution: Solution,
}

/// Number of feasible assignments of the problem's labelled pupils to schools,
/// saturating at `u128::MAX`.
pub fn count_assignments(problem: &Problem) -> u128 {
    let n = problem.num_pupils();
    let mut binom = vec![vec![0u128; n + 1]; n + 1];
    for a in 0..=n {
        binom[a][0] = 1;
        for b in 1..=a {
            binom[a][b] = binom[a - 1][b - 1].saturating_add(binom[a - 1][b]);
        }
    }
    // ways[k]: ways to place k pupils in the schools processed so far
    let mut ways = vec![0u128; n + 1];
    ways[0] = 1;
    for &cap in problem.capacities() {
        let mut next = vec![0u128; n + 1];
        for (placed, &w) in ways.iter().enumerate() {
            if w == 0 {
                continue;
            }
            for k in 0..=cap.min(n - placed) {
                let add = w.saturating_mul(binom[placed + k][k]);
                next[placed + k] = next[placed + k].saturating_add(add);
            }
        }
        ways = next;
    }
    ways[n]
}

/// Exact minimum of the average rank with the default search bound.
pub fn optimal_q(problem: &Problem, prefs: &PreferenceSet) -> Result<Optimum> {
    optimal_q_bounded(problem, prefs, DEFAULT_SEARCH_BOUND)
}

/// Exact minimum of the average rank by depth-first enumeration of all
/// feasible assignments, refusing instances with more than `bound` of them.
pub fn optimal_q_bounded(problem: &Problem, prefs: &PreferenceSet, bound: u128) -> Result<Optimum> {
    prefs.check_against(problem)?;
    let size = count_assignments(problem);
    if size > bound {
        return Err(Error::SearchTooLarge { size, bound });
    }
    let n = problem.num_pupils();
    let mut search = Search {
        prefs,
        vacant: problem.capacities().to_vec(),
        current: vec![0; n],
        best_total: usize::MAX,
        best: Vec::new(),
    };
    search.descend(0, 0);
    let total_rank = search.best_total;
    Ok(Optimum {
        total_rank,
        average_rank: if n == 0 {
            f64::NAN
        } else {
            total_rank as f64 / n as f64
        },
        solution: Solution::new(search.best),
    })
}

struct Search<'a> {
    prefs: &'a PreferenceSet,
    vacant: Vec<usize>,
    current: Vec<SchoolId>,
    best_total: usize,
    best: Vec<SchoolId>,
}

impl Search<'_> {
    // Lower bound on the summed rank of pupils `from..`: each gets its best
    // school that still has a place.
    fn remaining_bound(&self, from: PupilId) -> usize {
        (from..self.current.len())
            .map(|i| {
                self.prefs
                    .get(i)
                    .ranking()
                    .iter()
                    .position(|&s| self.vacant[s] > 0)
                    .map_or(usize::MAX, |p| p + 1)
            })
            .fold(0, usize::saturating_add)
    }

    fn descend(&mut self, pupil: PupilId, partial: usize) {
        if pupil == self.current.len() {
            if partial < self.best_total {
                self.best_total = partial;
                self.best = self.current.clone();
            }
            return;
        }
        if partial.saturating_add(self.remaining_bound(pupil)) >= self.best_total {
            return;
        }
        for school in 0..self.vacant.len() {
            if self.vacant[school] == 0 {
                continue;
            }
            self.vacant[school] -= 1;
            self.current[pupil] = school;
            let r = self.prefs.rank(pupil, school);
            self.descend(pupil + 1, partial + r);
            self.vacant[school] += 1;
        }
    }
}

/// All pupil pairs `(i, j)`, `i < j`, who would both strictly improve by
/// exchanging schools. Empty iff the solution is pairwise Pareto efficient.
pub fn scan_pareto(
    problem: &Problem,
    prefs: &PreferenceSet,
    sol: &Solution,
) -> Result<Vec<(PupilId, PupilId)>> {
    prefs.check_against(problem)?;
    sol.check_feasible(problem)?;
    let n = sol.len();
    let mut pairs = Vec::new();
    for i in 0..n {
        let si = sol.school_of(i);
        for j in i + 1..n {
            let sj = sol.school_of(j);
            if prefs.rank(i, sj) < prefs.rank(i, si) && prefs.rank(j, si) < prefs.rank(j, sj) {
                pairs.push((i, j));
            }
        }
    }
    Ok(pairs)
}
