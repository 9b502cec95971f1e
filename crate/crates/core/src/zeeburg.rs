//! The Zeeburg queue-promotion mechanism.
//!
//! Every school keeps a queue of unplaced pupils who rank it at or above the
//! queue's current rank. A queue that fits entirely in the school's vacant
//! places is admitted without consulting the lottery; if places remain the
//! queue rank increases and pupils ranking the school at the new rank line up
//! too. Only when no queue fits is the lottery used, filling the school whose
//! queue has the smallest rank (then the smallest overflow) from the front.
//!
//! Residual ties are broken by the lowest school id. A pupil sits in every
//! queue whose rank reaches that pupil's rank for the school.

use crate::error::{infeasible, invalid, Result};
use crate::mechanisms::check_instance;
use crate::model::{PreferenceSet, Problem, PupilId, SchoolId, Solution, TieBreakMode, TieBreaker};

#[derive(Debug, Clone)]
struct SchoolQueue {
    vacant: usize,
    rank: usize,
    // Sorted by lottery priority. Placed pupils are dropped lazily.
    members: Vec<PupilId>,
    live: usize,
}

/// Mutable state of one Zeeburg run.
#[derive(Debug, Clone)]
pub struct ZeeburgState<'a> {
    prefs: &'a PreferenceSet,
    tb: &'a TieBreaker,
    schools: Vec<SchoolQueue>,
    placement: Vec<Option<SchoolId>>,
    unplaced: usize,
    // by_rank[school][rank - 1]: pupils ranking `school` at `rank`, in lottery order
    by_rank: Vec<Vec<Vec<PupilId>>>,
    tiebreak_decisions: usize,
}

/// Result of a Zeeburg run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZeeburgOutcome {
    pub solution: Solution,
    /// Number of times the lottery had to force a decision on a queue.
    pub tiebreak_decisions: usize,
}

impl<'a> ZeeburgState<'a> {
    /// Initial state: all pupils queue at their favourite school, rank one.
    pub fn new(problem: &Problem, prefs: &'a PreferenceSet, tb: &'a TieBreaker) -> Result<Self> {
        check_instance(problem, prefs, tb)?;
        if tb.mode() != TieBreakMode::Single {
            return Err(invalid("the Zeeburg mechanism needs a single tie-breaker"));
        }
        let m = problem.num_schools();
        let n = problem.num_pupils();
        let mut by_rank = vec![vec![Vec::new(); m]; m];
        for &pupil in tb.order(0) {
            for (pos, &school) in prefs.get(pupil).ranking().iter().enumerate() {
                by_rank[school][pos].push(pupil);
            }
        }
        let schools = (0..m)
            .map(|j| SchoolQueue {
                vacant: problem.capacity(j),
                rank: 1,
                live: by_rank[j][0].len(),
                members: by_rank[j][0].clone(),
            })
            .collect();
        Ok(Self {
            prefs,
            tb,
            schools,
            placement: vec![None; n],
            unplaced: n,
            by_rank,
            tiebreak_decisions: 0,
        })
    }

    pub fn is_done(&self) -> bool {
        self.unplaced == 0
    }

    pub fn vacant(&self, school: SchoolId) -> usize {
        self.schools[school].vacant
    }

    pub fn queue_rank(&self, school: SchoolId) -> usize {
        self.schools[school].rank
    }

    /// Unplaced pupils queued at `school`, in lottery order.
    pub fn queue(&self, school: SchoolId) -> Vec<PupilId> {
        self.schools[school]
            .members
            .iter()
            .copied()
            .filter(|&p| self.placement[p].is_none())
            .collect()
    }

    pub fn placement(&self, pupil: PupilId) -> Option<SchoolId> {
        self.placement[pupil]
    }

    pub fn tiebreak_decisions(&self) -> usize {
        self.tiebreak_decisions
    }

    fn num_schools(&self) -> usize {
        self.schools.len()
    }

    // A school with places left whose queue fits entirely. Empty queues at
    // the last rank are dormant.
    fn admissible(&self, school: SchoolId) -> bool {
        let q = &self.schools[school];
        q.vacant > 0 && q.live <= q.vacant && (q.live > 0 || q.rank < self.num_schools())
    }

    /// Admits one whole queue without using the lottery. Returns false when
    /// no queue fits.
    pub fn admit_whole_queue(&mut self) -> bool {
        let chosen = (0..self.num_schools())
            .filter(|&j| self.admissible(j))
            .min_by_key(|&j| {
                let q = &self.schools[j];
                (q.rank, q.vacant - q.live, j)
            });
        let Some(school) = chosen else {
            return false;
        };
        let members = std::mem::take(&mut self.schools[school].members);
        for &pupil in &members {
            if self.placement[pupil].is_none() {
                self.place(pupil, school);
            }
        }
        let m = self.num_schools();
        let q = &mut self.schools[school];
        q.live = 0;
        if q.vacant > 0 && q.rank < m {
            q.rank += 1;
            self.promote(school);
        }
        true
    }

    /// Lines up the unplaced pupils ranking `school` at its new queue rank.
    /// The queue was emptied by a full admission just before.
    fn promote(&mut self, school: SchoolId) {
        let rank = self.schools[school].rank;
        let joining: Vec<PupilId> = self.by_rank[school][rank - 1]
            .iter()
            .copied()
            .filter(|&p| self.placement[p].is_none())
            .collect();
        let q = &mut self.schools[school];
        q.live = joining.len();
        q.members = joining;
    }

    /// Uses the lottery on the non-full school whose queue has the smallest
    /// rank, then the smallest overflow, admitting from the front until the
    /// school is full. Returns false if no queue is waiting.
    pub fn force_decision(&mut self) -> bool {
        let chosen = (0..self.num_schools())
            .filter(|&j| self.schools[j].vacant > 0 && self.schools[j].live > 0)
            .min_by_key(|&j| {
                let q = &self.schools[j];
                (q.rank, q.live.saturating_sub(q.vacant), j)
            });
        let Some(school) = chosen else {
            return false;
        };
        self.tiebreak_decisions += 1;
        let members = std::mem::take(&mut self.schools[school].members);
        let mut rest = Vec::new();
        for pupil in members {
            if self.placement[pupil].is_some() {
                continue;
            }
            if self.schools[school].vacant > 0 {
                self.place(pupil, school);
            } else {
                rest.push(pupil);
            }
        }
        let q = &mut self.schools[school];
        q.live = rest.len();
        q.members = rest;
        true
    }

    fn place(&mut self, pupil: PupilId, school: SchoolId) {
        debug_assert!(self.placement[pupil].is_none());
        self.placement[pupil] = Some(school);
        self.unplaced -= 1;
        self.schools[school].vacant -= 1;
        let pref = self.prefs.get(pupil);
        for (j, q) in self.schools.iter_mut().enumerate() {
            if pref.rank(j) <= q.rank {
                q.live -= 1;
            }
        }
    }

    /// Checks the queue bookkeeping; used by tests.
    pub fn check_invariants(&self, problem: &Problem) -> std::result::Result<(), String> {
        for (j, q) in self.schools.iter().enumerate() {
            if q.vacant > problem.capacity(j) {
                return Err(format!("school {j} has more vacancies than places"));
            }
            if q.rank == 0 || q.rank > self.num_schools() {
                return Err(format!("school {j} queue rank {} out of range", q.rank));
            }
            let live = self.queue(j);
            if live.len() != q.live {
                return Err(format!(
                    "school {j} counts {} queued pupils, holds {}",
                    q.live,
                    live.len()
                ));
            }
            if let Some(&p) = live.iter().find(|&&p| self.prefs.rank(p, j) > q.rank) {
                return Err(format!("pupil {p} queued at school {j} beyond its rank"));
            }
            if live
                .windows(2)
                .any(|w| self.tb.priority(j, w[0]) > self.tb.priority(j, w[1]))
            {
                return Err(format!("school {j} queue is not in lottery order"));
            }
        }
        Ok(())
    }

    pub fn into_solution(self) -> Result<Solution> {
        self.placement
            .iter()
            .enumerate()
            .map(|(i, s)| s.ok_or_else(|| infeasible(format!("pupil {} was not placed", i + 1))))
            .collect::<Result<Vec<_>>>()
            .map(Solution::new)
    }
}

/// Runs the Zeeburg mechanism with a single tie-breaker.
pub fn zeeburg(
    problem: &Problem,
    prefs: &PreferenceSet,
    tb: &TieBreaker,
) -> Result<ZeeburgOutcome> {
    let mut state = ZeeburgState::new(problem, prefs, tb)?;
    while !state.is_done() {
        while state.admit_whole_queue() {}
        if state.is_done() {
            break;
        }
        if !state.force_decision() {
            return Err(infeasible("pupils left without any open queue"));
        }
    }
    let tiebreak_decisions = state.tiebreak_decisions();
    Ok(ZeeburgOutcome {
        solution: state.into_solution()?,
        tiebreak_decisions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::evaluate;

    fn four_pupils() -> (Problem, PreferenceSet) {
        let problem = Problem::uniform(4, 1, 4).unwrap();
        let prefs = PreferenceSet::from_one_based(
            4,
            &[
                vec![1, 3, 2, 4],
                vec![2, 1, 3, 4],
                vec![3, 4, 1, 2],
                vec![2, 3, 1, 4],
            ],
        )
        .unwrap();
        (problem, prefs)
    }

    #[test]
    fn four_pupils_instance() {
        // s1 and s3 admit pupils 1 and 3; s4 promotes to rank 4 and queues
        // pupils 2 and 4; nothing fits, so the lottery gives s2 to pupil 2 and
        // pupil 4 then fits at s4.
        let (problem, prefs) = four_pupils();
        let tb = TieBreaker::single(vec![0, 1, 2, 3]).unwrap();
        let out = zeeburg(&problem, &prefs, &tb).unwrap();
        assert_eq!(out.solution.to_one_based(), vec![1, 2, 3, 4]);
        assert_eq!(out.tiebreak_decisions, 1);
        assert_eq!(
            evaluate(&problem, &prefs, &out.solution)
                .unwrap()
                .average_rank,
            7.0 / 4.0
        );
    }

    #[test]
    fn lottery_order_decides_the_contested_school() {
        let (problem, prefs) = four_pupils();
        let tb = TieBreaker::single(vec![3, 0, 1, 2]).unwrap();
        let out = zeeburg(&problem, &prefs, &tb).unwrap();
        assert_eq!(out.solution.to_one_based(), vec![1, 4, 3, 2]);
    }

    #[test]
    fn no_contention_never_uses_lottery() {
        let problem = Problem::uniform(3, 2, 4).unwrap();
        let prefs = PreferenceSet::from_one_based(
            3,
            &[vec![1, 2, 3], vec![2, 1, 3], vec![3, 1, 2], vec![1, 3, 2]],
        )
        .unwrap();
        let tb = TieBreaker::single(vec![1, 3, 0, 2]).unwrap();
        let out = zeeburg(&problem, &prefs, &tb).unwrap();
        assert_eq!(out.solution.to_one_based(), vec![1, 2, 3, 1]);
        assert_eq!(out.tiebreak_decisions, 0);
    }

    #[test]
    fn pupils_jump_to_guaranteed_second_choice() {
        // Three pupils want school 1 (one place); school 2 has room for one
        // pupil ranking it second, so pupil 3 (who ranks 2 second) is admitted
        // there before the lottery decides school 1.
        let problem = Problem::new(vec![1, 1, 1], 3).unwrap();
        let prefs =
            PreferenceSet::from_one_based(3, &[vec![1, 3, 2], vec![1, 3, 2], vec![1, 2, 3]])
                .unwrap();
        let tb = TieBreaker::single(vec![2, 0, 1]).unwrap();
        let out = zeeburg(&problem, &prefs, &tb).unwrap();
        assert_eq!(out.solution.to_one_based(), vec![1, 3, 2]);
        assert_eq!(out.tiebreak_decisions, 1);
    }

    #[test]
    fn rejects_multiple_tiebreaker() {
        let (problem, prefs) = four_pupils();
        let mtb = TieBreaker::multiple(vec![vec![0, 1, 2, 3]; 4]).unwrap();
        assert!(matches!(
            zeeburg(&problem, &prefs, &mtb),
            Err(crate::Error::InvalidInput(_))
        ));
    }

    #[test]
    fn invariants_hold_while_running() {
        let (problem, prefs) = four_pupils();
        let tb = TieBreaker::single(vec![2, 3, 1, 0]).unwrap();
        let mut state = ZeeburgState::new(&problem, &prefs, &tb).unwrap();
        state.check_invariants(&problem).unwrap();
        let mut ranks = [1; 4];
        while !state.is_done() {
            if !state.admit_whole_queue() {
                assert!(state.force_decision());
            }
            state.check_invariants(&problem).unwrap();
            for (j, r) in ranks.iter_mut().enumerate() {
                assert!(state.queue_rank(j) >= *r);
                *r = state.queue_rank(j);
                for p in state.queue(j) {
                    assert!(state.placement(p).is_none());
                }
            }
        }
    }
}
