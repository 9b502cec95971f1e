//! Instance model shared by every mechanism: the problem, pupil preferences,
//! lottery tie-breakers, solutions and the average-rank welfare report.
//!
//! Pupils and schools are 0-based everywhere in the library. Ranks are
//! 1-based: a pupil's favourite school has rank 1.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{infeasible, invalid, Result};

pub type SchoolId = usize;
pub type PupilId = usize;

/// Schools with their capacities and the number of pupils to place.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Problem {
    capacities: Vec<usize>,
    num_pupils: usize,
}

impl Problem {
    pub fn new(capacities: Vec<usize>, num_pupils: usize) -> Result<Self> {
        if capacities.is_empty() {
            return Err(invalid("a problem needs at least one school"));
        }
        let places: usize = capacities.iter().sum();
        if num_pupils > places {
            return Err(infeasible(format!(
                "{num_pupils} pupils but only {places} places"
            )));
        }
        Ok(Self {
            capacities,
            num_pupils,
        })
    }

    /// `num_schools` schools with identical capacity.
    pub fn uniform(num_schools: usize, capacity: usize, num_pupils: usize) -> Result<Self> {
        Self::new(vec![capacity; num_schools], num_pupils)
    }

    pub fn num_schools(&self) -> usize {
        self.capacities.len()
    }

    pub fn num_pupils(&self) -> usize {
        self.num_pupils
    }

    pub fn capacities(&self) -> &[usize] {
        &self.capacities
    }

    pub fn capacity(&self, school: SchoolId) -> usize {
        self.capacities[school]
    }

    pub fn total_places(&self) -> usize {
        self.capacities.iter().sum()
    }
}

/// One pupil's strict ranking of all schools, most preferred first.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Preference {
    ranking: Vec<SchoolId>,
    // positions[school] = 0-based position of `school` in `ranking`
    positions: Vec<u32>,
}

impl Preference {
    /// Builds a preference from 0-based school ids. The ranking must be a
    /// permutation of `0..ranking.len()`.
    pub fn new(ranking: Vec<SchoolId>) -> Result<Self> {
        let m = ranking.len();
        if m == 0 {
            return Err(invalid("empty preference"));
        }
        let mut positions = vec![u32::MAX; m];
        for (pos, &school) in ranking.iter().enumerate() {
            if school >= m {
                return Err(invalid(format!(
                    "school {} out of range 1..={m}",
                    school + 1
                )));
            }
            if positions[school] != u32::MAX {
                return Err(invalid(format!("school {} listed twice", school + 1)));
            }
            positions[school] = pos as u32;
        }
        Ok(Self { ranking, positions })
    }

    /// Builds a preference from 1-based school labels, as written in files.
    pub fn from_one_based(labels: &[usize]) -> Result<Self> {
        let ranking = labels
            .iter()
            .map(|&l| {
                l.checked_sub(1)
                    .ok_or_else(|| invalid("school labels start at 1"))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(ranking)
    }

    pub fn ranking(&self) -> &[SchoolId] {
        &self.ranking
    }

    pub fn num_schools(&self) -> usize {
        self.ranking.len()
    }

    pub fn first(&self) -> SchoolId {
        self.ranking[0]
    }

    /// School at 1-based `rank`.
    pub fn school_at(&self, rank: usize) -> SchoolId {
        self.ranking[rank - 1]
    }

    /// 1-based rank of `school`. Panics if the school is out of range; use
    /// [`rank_of`] for a checked lookup.
    #[inline]
    pub fn rank(&self, school: SchoolId) -> usize {
        self.positions[school] as usize + 1
    }
}

/// 1-based position of `school` in `pref`.
pub fn rank_of(pref: &Preference, school: SchoolId) -> Result<usize> {
    if school >= pref.num_schools() {
        return Err(invalid(format!(
            "school {} out of range 1..={}",
            school + 1,
            pref.num_schools()
        )));
    }
    Ok(pref.rank(school))
}

/// The preferences of all pupils, indexed by pupil id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreferenceSet {
    num_schools: usize,
    prefs: Vec<Preference>,
}

impl PreferenceSet {
    pub fn new(num_schools: usize, prefs: Vec<Preference>) -> Result<Self> {
        if let Some((i, p)) = prefs
            .iter()
            .enumerate()
            .find(|(_, p)| p.num_schools() != num_schools)
        {
            return Err(invalid(format!(
                "pupil {} ranks {} schools, expected {num_schools}",
                i + 1,
                p.num_schools()
            )));
        }
        Ok(Self { num_schools, prefs })
    }

    /// Parses 1-based rankings, one per pupil.
    pub fn from_one_based(num_schools: usize, rankings: &[Vec<usize>]) -> Result<Self> {
        let prefs = rankings
            .iter()
            .map(|r| Preference::from_one_based(r))
            .collect::<Result<Vec<_>>>()?;
        Self::new(num_schools, prefs)
    }

    pub fn check_against(&self, problem: &Problem) -> Result<()> {
        if self.num_schools != problem.num_schools() {
            return Err(invalid(format!(
                "preferences rank {} schools, problem has {}",
                self.num_schools,
                problem.num_schools()
            )));
        }
        if self.prefs.len() != problem.num_pupils() {
            return Err(invalid(format!(
                "{} preferences for {} pupils",
                self.prefs.len(),
                problem.num_pupils()
            )));
        }
        Ok(())
    }

    pub fn num_schools(&self) -> usize {
        self.num_schools
    }

    pub fn len(&self) -> usize {
        self.prefs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prefs.is_empty()
    }

    pub fn get(&self, pupil: PupilId) -> &Preference {
        &self.prefs[pupil]
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Preference> {
        self.prefs.iter()
    }

    pub fn as_slice(&self) -> &[Preference] {
        &self.prefs
    }

    /// 1-based rank pupil `pupil` gives to `school`.
    #[inline]
    pub fn rank(&self, pupil: PupilId, school: SchoolId) -> usize {
        self.prefs[pupil].rank(school)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TieBreakMode {
    /// One lottery shared by all schools (STB).
    Single,
    /// An independent lottery per school (MTB).
    Multiple,
}

/// Lottery priorities standing in for school preferences. Each order lists
/// pupils from highest to lowest priority.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TieBreaker {
    mode: TieBreakMode,
    orders: Vec<Vec<PupilId>>,
    // priorities[k][pupil] = position of pupil in orders[k]
    priorities: Vec<Vec<u32>>,
}

impl TieBreaker {
    pub fn single(order: Vec<PupilId>) -> Result<Self> {
        Self::build(TieBreakMode::Single, vec![order])
    }

    pub fn multiple(orders: Vec<Vec<PupilId>>) -> Result<Self> {
        if orders.is_empty() {
            return Err(invalid("multiple tie-breaker needs one order per school"));
        }
        Self::build(TieBreakMode::Multiple, orders)
    }

    fn build(mode: TieBreakMode, orders: Vec<Vec<PupilId>>) -> Result<Self> {
        let n = orders[0].len();
        let mut priorities = Vec::with_capacity(orders.len());
        for order in &orders {
            if order.len() != n {
                return Err(invalid("tie-breaker orders differ in length"));
            }
            let mut prio = vec![u32::MAX; n];
            for (pos, &pupil) in order.iter().enumerate() {
                if pupil >= n || prio[pupil] != u32::MAX {
                    return Err(invalid(format!(
                        "tie-breaker order is not a permutation of {n} pupils"
                    )));
                }
                prio[pupil] = pos as u32;
            }
            priorities.push(prio);
        }
        Ok(Self {
            mode,
            orders,
            priorities,
        })
    }

    pub fn mode(&self) -> TieBreakMode {
        self.mode
    }

    pub fn num_pupils(&self) -> usize {
        self.orders[0].len()
    }

    #[inline]
    fn slot(&self, school: SchoolId) -> usize {
        match self.mode {
            TieBreakMode::Single => 0,
            TieBreakMode::Multiple => school,
        }
    }

    /// Pupils in priority order at `school`.
    pub fn order(&self, school: SchoolId) -> &[PupilId] {
        &self.orders[self.slot(school)]
    }

    /// Lottery position of `pupil` at `school`; lower wins.
    #[inline]
    pub fn priority(&self, school: SchoolId, pupil: PupilId) -> u32 {
        self.priorities[self.slot(school)][pupil]
    }

    pub(crate) fn check_against(&self, problem: &Problem) -> Result<()> {
        if self.num_pupils() != problem.num_pupils() {
            return Err(invalid(format!(
                "tie-breaker ranks {} pupils, problem has {}",
                self.num_pupils(),
                problem.num_pupils()
            )));
        }
        if self.mode == TieBreakMode::Multiple && self.orders.len() != problem.num_schools() {
            return Err(invalid(format!(
                "multiple tie-breaker has {} orders for {} schools",
                self.orders.len(),
                problem.num_schools()
            )));
        }
        Ok(())
    }
}

/// Draws a uniformly random lottery: one permutation for STB, one per school
/// for MTB.
pub fn make_tiebreaker<R: Rng + ?Sized>(
    mode: TieBreakMode,
    problem: &Problem,
    rng: &mut R,
) -> TieBreaker {
    let n = problem.num_pupils();
    let mut draw = || {
        let mut order: Vec<PupilId> = (0..n).collect();
        order.shuffle(rng);
        order
    };
    let result = match mode {
        TieBreakMode::Single => TieBreaker::single(draw()),
        TieBreakMode::Multiple => {
            TieBreaker::multiple((0..problem.num_schools()).map(|_| draw()).collect())
        }
    };
    result.expect("shuffled identity is a permutation")
}

/// Assignment of every pupil to one school.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Solution {
    assignment: Vec<SchoolId>,
}

impl Solution {
    pub fn new(assignment: Vec<SchoolId>) -> Self {
        Self { assignment }
    }

    pub fn from_one_based(labels: &[usize]) -> Result<Self> {
        labels
            .iter()
            .map(|&l| {
                l.checked_sub(1)
                    .ok_or_else(|| invalid("school labels start at 1"))
            })
            .collect::<Result<Vec<_>>>()
            .map(Self::new)
    }

    pub fn assignment(&self) -> &[SchoolId] {
        &self.assignment
    }

    pub fn to_one_based(&self) -> Vec<usize> {
        self.assignment.iter().map(|s| s + 1).collect()
    }

    #[inline]
    pub fn school_of(&self, pupil: PupilId) -> SchoolId {
        self.assignment[pupil]
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    /// Exchanges the schools of two pupils.
    pub fn swap(&mut self, a: PupilId, b: PupilId) {
        self.assignment.swap(a, b);
    }

    pub fn occupancy(&self, num_schools: usize) -> Vec<usize> {
        let mut occ = vec![0; num_schools];
        for &s in &self.assignment {
            if s < num_schools {
                occ[s] += 1;
            }
        }
        occ
    }

    /// Checks that every pupil holds a valid school and no school is over
    /// capacity.
    pub fn check_feasible(&self, problem: &Problem) -> Result<()> {
        if self.assignment.len() != problem.num_pupils() {
            return Err(infeasible(format!(
                "solution places {} pupils, problem has {}",
                self.assignment.len(),
                problem.num_pupils()
            )));
        }
        let m = problem.num_schools();
        if let Some((i, &s)) = self.assignment.iter().enumerate().find(|(_, &s)| s >= m) {
            return Err(infeasible(format!(
                "pupil {} assigned to unknown school {}",
                i + 1,
                s + 1
            )));
        }
        for (j, (&occ, &cap)) in self
            .occupancy(m)
            .iter()
            .zip(problem.capacities())
            .enumerate()
        {
            if occ > cap {
                return Err(infeasible(format!(
                    "school {} holds {occ} pupils but has {cap} places",
                    j + 1
                )));
            }
        }
        Ok(())
    }
}

/// Per-pupil ranks of a solution with the average rank Q and the rank
/// distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct RankReport {
    pub ranks: Vec<usize>,
    pub total_rank: usize,
    /// Q, the average rank. NaN for an empty group of pupils.
    pub average_rank: f64,
    /// `histogram[k]` counts pupils with rank `k + 1`.
    pub histogram: Vec<usize>,
    /// `cumulative[k]` is the fraction of pupils with rank at most `k + 1`.
    pub cumulative: Vec<f64>,
}

impl RankReport {
    /// Builds the report from 1-based ranks over `num_schools` schools.
    pub fn from_ranks(ranks: Vec<usize>, num_schools: usize) -> Self {
        let n = ranks.len();
        let mut histogram = vec![0usize; num_schools];
        for &r in &ranks {
            histogram[r - 1] += 1;
        }
        let total_rank: usize = ranks.iter().sum();
        let mut running = 0;
        let cumulative = histogram
            .iter()
            .map(|&h| {
                running += h;
                if n == 0 {
                    0.0
                } else {
                    running as f64 / n as f64
                }
            })
            .collect();
        let average_rank = if n == 0 {
            f64::NAN
        } else {
            total_rank as f64 / n as f64
        };
        Self {
            ranks,
            total_rank,
            average_rank,
            histogram,
            cumulative,
        }
    }

    pub fn num_pupils(&self) -> usize {
        self.ranks.len()
    }

    /// Number of pupils placed at their first choice.
    pub fn rank_one_count(&self) -> usize {
        self.histogram.first().copied().unwrap_or(0)
    }
}

/// Ranks every pupil's assigned school and summarises the result.
pub fn evaluate(problem: &Problem, prefs: &PreferenceSet, sol: &Solution) -> Result<RankReport> {
    prefs.check_against(problem)?;
    sol.check_feasible(problem)?;
    let ranks = (0..sol.len())
        .map(|i| prefs.rank(i, sol.school_of(i)))
        .collect();
    Ok(RankReport::from_ranks(ranks, problem.num_schools()))
}

/// Number of pupils whose school differs between two solutions.
pub fn count_differences(a: &Solution, b: &Solution) -> Result<usize> {
    if a.len() != b.len() {
        return Err(invalid(format!(
            "solutions differ in length: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    Ok(a.assignment
        .iter()
        .zip(&b.assignment)
        .filter(|(x, y)| x != y)
        .count())
}
