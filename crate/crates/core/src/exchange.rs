//! Pairwise-exchange improvement of a feasible solution.
//!
//! Pupils are visited once, in decreasing order of their rank in the
//! starting solution. Each visited pupil is offered a swap of schools with
//! every other pupil in id order; a swap is made if it lowers the pair's
//! summed rank, or keeps the sum and improves the tracked extremum (the
//! smaller rank for [`Variant::MinRank`], the larger for
//! [`Variant::MaxRank`]). After a swap the scan over partners restarts.
//!
//! A partner that already had its turn is scanned once more after the
//! current pupil finishes, so the result admits no further improving swap.

use std::collections::VecDeque;

use crate::error::Result;
use crate::model::{PreferenceSet, Problem, PupilId, Solution};

/// Rule for swaps that leave the summed rank unchanged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    /// PE: accept when the smaller of the two ranks decreases.
    MinRank,
    /// PEM: accept when the larger of the two ranks decreases.
    MaxRank,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExchangeOutcome {
    pub solution: Solution,
    pub swaps: usize,
}

/// Whether swapping the schools of two pupils holding ranks `(a, b)` that
/// would become `(a2, b2)` is an improvement under `variant`.
#[inline]
pub fn improves(variant: Variant, (a, b): (usize, usize), (a2, b2): (usize, usize)) -> bool {
    let before = a + b;
    let after = a2 + b2;
    if after != before {
        return after < before;
    }
    match variant {
        Variant::MinRank => a2.min(b2) < a.min(b),
        Variant::MaxRank => a2.max(b2) < a.max(b),
    }
}

// Flat pupil x school table of 1-based ranks.
struct RankTable {
    m: usize,
    ranks: Vec<u16>,
}

impl RankTable {
    fn new(prefs: &PreferenceSet) -> Self {
        let m = prefs.num_schools();
        let mut ranks = Vec::with_capacity(prefs.len() * m);
        for p in prefs.iter() {
            ranks.extend((0..m).map(|s| p.rank(s) as u16));
        }
        Self { m, ranks }
    }

    #[inline]
    fn rank(&self, pupil: PupilId, school: usize) -> usize {
        usize::from(self.ranks[pupil * self.m + school])
    }

    #[inline]
    fn swap_improves(
        &self,
        variant: Variant,
        assignment: &[usize],
        i: PupilId,
        j: PupilId,
    ) -> bool {
        let (si, sj) = (assignment[i], assignment[j]);
        si != sj
            && improves(
                variant,
                (self.rank(i, si), self.rank(j, sj)),
                (self.rank(i, sj), self.rank(j, si)),
            )
    }
}

/// One pass of pairwise exchanges starting from `start`.
pub fn pairwise_exchange(
    problem: &Problem,
    prefs: &PreferenceSet,
    start: &Solution,
    variant: Variant,
) -> Result<ExchangeOutcome> {
    prefs.check_against(problem)?;
    start.check_feasible(problem)?;
    let table = RankTable::new(prefs);
    let n = start.len();
    let mut assignment = start.assignment().to_vec();

    let mut order: Vec<PupilId> = (0..n).collect();
    // stable: equal ranks keep ascending pupil id
    order.sort_by_key(|&i| std::cmp::Reverse(table.rank(i, assignment[i])));

    let mut visited = vec![false; n];
    let mut queued = vec![false; n];
    let mut revisit = VecDeque::new();
    let mut swaps = 0;
    let mut scan = |i: PupilId,
                    assignment: &mut Vec<usize>,
                    visited: &[bool],
                    queued: &mut [bool],
                    revisit: &mut VecDeque<PupilId>| {
        let mut j = 0;
        while j < n {
            if j != i && table.swap_improves(variant, assignment, i, j) {
                assignment.swap(i, j);
                swaps += 1;
                if visited[j] && !queued[j] {
                    queued[j] = true;
                    revisit.push_back(j);
                }
                j = 0;
            } else {
                j += 1;
            }
        }
    };
    for &i in &order {
        visited[i] = true;
        scan(i, &mut assignment, &visited, &mut queued, &mut revisit);
        while let Some(k) = revisit.pop_front() {
            queued[k] = false;
            scan(k, &mut assignment, &visited, &mut queued, &mut revisit);
        }
    }
    Ok(ExchangeOutcome {
        solution: Solution::new(assignment),
        swaps,
    })
}

/// True when no pair of pupils admits an improving swap, i.e. a further
/// exchange pass would change nothing.
pub fn is_converged(
    problem: &Problem,
    prefs: &PreferenceSet,
    sol: &Solution,
    variant: Variant,
) -> Result<bool> {
    prefs.check_against(problem)?;
    sol.check_feasible(problem)?;
    let table = RankTable::new(prefs);
    let a = sol.assignment();
    let n = a.len();
    Ok(!(0..n).any(|i| (i + 1..n).any(|j| table.swap_improves(variant, a, i, j))))
}
