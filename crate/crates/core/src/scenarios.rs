//! Random preference generation from school popularity weights, strategic
//! misreports and completion of partial preference lists.

use rand::Rng;

use crate::error::{invalid, Result};
use crate::model::RankReport;
use crate::model::{Preference, PreferenceSet, Problem, SchoolId, Solution};

/// A group of pupils sharing one popularity profile.
#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    pub fraction: f64,
    pub weights: Vec<f64>,
}

/// Popularity profile(s) from which preference datasets are drawn.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    populations: Vec<Population>,
}

impl Scenario {
    pub fn new(populations: Vec<Population>) -> Result<Self> {
        let Some(first) = populations.first() else {
            return Err(invalid("a scenario needs at least one population"));
        };
        let m = first.weights.len();
        if m == 0 {
            return Err(invalid("popularity weights are empty"));
        }
        for (k, pop) in populations.iter().enumerate() {
            if pop.weights.len() != m {
                return Err(invalid(format!(
                    "population {} has {} weights, expected {m}",
                    k + 1,
                    pop.weights.len()
                )));
            }
            if let Some(w) = pop.weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
                return Err(invalid(format!(
                    "population {} has non-positive weight {w}",
                    k + 1
                )));
            }
            if !(pop.fraction.is_finite() && (0.0..=1.0).contains(&pop.fraction)) {
                return Err(invalid(format!(
                    "population {} fraction {} outside [0, 1]",
                    k + 1,
                    pop.fraction
                )));
            }
        }
        let total: f64 = populations.iter().map(|p| p.fraction).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(invalid(format!("population fractions sum to {total}")));
        }
        Ok(Self { populations })
    }

    /// Single population with the given weights.
    pub fn single(weights: Vec<f64>) -> Result<Self> {
        Self::new(vec![Population {
            fraction: 1.0,
            weights,
        }])
    }

    pub fn populations(&self) -> &[Population] {
        &self.populations
    }

    pub fn num_schools(&self) -> usize {
        self.populations[0].weights.len()
    }

    /// Fraction-weighted mean of the normalised weights. For a single
    /// population this is proportional to its weights.
    pub fn average_popularity(&self) -> Vec<f64> {
        let mut avg = vec![0.0; self.num_schools()];
        for pop in &self.populations {
            let total: f64 = pop.weights.iter().sum();
            for (a, w) in avg.iter_mut().zip(&pop.weights) {
                *a += pop.fraction * w / total;
            }
        }
        avg
    }

    /// Deterministic number of pupils per population for `n` pupils, by
    /// largest remainder.
    pub fn population_sizes(&self, n: usize) -> Vec<usize> {
        let exact: Vec<f64> = self
            .populations
            .iter()
            .map(|p| p.fraction * n as f64)
            .collect();
        let mut sizes: Vec<usize> = exact.iter().map(|x| x.floor() as usize).collect();
        let mut left = n - sizes.iter().sum::<usize>().min(n);
        let mut by_remainder: Vec<usize> = (0..sizes.len()).collect();
        by_remainder.sort_by(|&a, &b| {
            let ra = exact[a] - exact[a].floor();
            let rb = exact[b] - exact[b].floor();
            rb.total_cmp(&ra).then(a.cmp(&b))
        });
        for k in by_remainder.into_iter().cycle() {
            if left == 0 {
                break;
            }
            sizes[k] += 1;
            left -= 1;
        }
        sizes
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BuiltinScenario {
    A,
    B,
    C,
    D,
}

impl std::str::FromStr for BuiltinScenario {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A" | "a" => Ok(Self::A),
            "B" | "b" => Ok(Self::B),
            "C" | "c" => Ok(Self::C),
            "D" | "d" => Ok(Self::D),
            other => Err(invalid(format!("unknown scenario {other:?}"))),
        }
    }
}

/// The four reference popularity scenarios over ten schools.
pub fn builtin_scenario(name: BuiltinScenario) -> Scenario {
    let single = |w: [f64; 10]| Scenario::single(w.to_vec());
    match name {
        BuiltinScenario::A => single([1.0; 10]),
        BuiltinScenario::B => single([10.0, 9.0, 8.0, 7.0, 6.0, 5.0, 4.0, 3.0, 2.0, 1.0]),
        BuiltinScenario::C => single([50.0, 50.0, 10.0, 10.0, 10.0, 10.0, 10.0, 10.0, 1.0, 1.0]),
        BuiltinScenario::D => Scenario::new(vec![
            Population {
                fraction: 0.6,
                weights: vec![20.0, 20.0, 20.0, 20.0, 20.0, 1.0, 1.0, 1.0, 1.0, 1.0],
            },
            Population {
                fraction: 0.4,
                weights: vec![1.0, 1.0, 1.0, 1.0, 1.0, 20.0, 20.0, 20.0, 20.0, 20.0],
            },
        ]),
    }
    .expect("builtin scenarios are valid")
}

/// Ten schools of 100 places and 1000 pupils, shared by the builtin scenarios.
pub fn builtin_problem() -> Problem {
    Problem::uniform(10, 100, 1000).expect("builtin problem is feasible")
}

/// Draws one ranking by sequential sampling without replacement: each next
/// school is chosen with probability proportional to its weight among the
/// schools not yet ranked.
pub fn sample_ranking<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> Preference {
    let mut remaining: Vec<SchoolId> = (0..weights.len()).collect();
    let mut ranking = Vec::with_capacity(weights.len());
    while !remaining.is_empty() {
        let total: f64 = remaining.iter().map(|&s| weights[s]).sum();
        let u: f64 = rng.gen::<f64>() * total;
        let mut acc = 0.0;
        let mut pick = remaining.len() - 1;
        for (k, &s) in remaining.iter().enumerate() {
            acc += weights[s];
            if u < acc {
                pick = k;
                break;
            }
        }
        ranking.push(remaining.remove(pick));
    }
    Preference::new(ranking).expect("sampled ranking is a permutation")
}

/// Generates one dataset. Population `k` occupies a contiguous block of
/// pupil ids, in population order.
pub fn generate_dataset<R: Rng + ?Sized>(
    scenario: &Scenario,
    problem: &Problem,
    rng: &mut R,
) -> Result<PreferenceSet> {
    if scenario.num_schools() != problem.num_schools() {
        return Err(invalid(format!(
            "scenario has {} schools, problem has {}",
            scenario.num_schools(),
            problem.num_schools()
        )));
    }
    let sizes = scenario.population_sizes(problem.num_pupils());
    let mut prefs = Vec::with_capacity(problem.num_pupils());
    for (pop, &size) in scenario.populations().iter().zip(&sizes) {
        for _ in 0..size {
            prefs.push(sample_ranking(&pop.weights, rng));
        }
    }
    PreferenceSet::new(problem.num_schools(), prefs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StrategyKind {
    Honest,
    /// Re-order the true top three, least popular school first.
    Cautious,
    /// Keep the true first choice and rank the rest from least to most
    /// popular.
    Gambling,
}

// Least popular first. Stable, so equally popular schools keep their true
// relative order.
fn sort_by_popularity(schools: &mut [SchoolId], popularity: &[f64]) {
    schools.sort_by(|&a, &b| popularity[a].total_cmp(&popularity[b]));
}

pub fn apply_cautious(true_pref: &Preference, popularity: &[f64]) -> Preference {
    let mut ranking = true_pref.ranking().to_vec();
    let top = ranking.len().min(3);
    sort_by_popularity(&mut ranking[..top], popularity);
    Preference::new(ranking).expect("reordering keeps a permutation")
}

pub fn apply_gambling(true_pref: &Preference, popularity: &[f64]) -> Preference {
    let mut ranking = true_pref.ranking().to_vec();
    sort_by_popularity(&mut ranking[1..], popularity);
    Preference::new(ranking).expect("reordering keeps a permutation")
}

impl StrategyKind {
    pub fn apply(self, true_pref: &Preference, popularity: &[f64]) -> Preference {
        match self {
            StrategyKind::Honest => true_pref.clone(),
            StrategyKind::Cautious => apply_cautious(true_pref, popularity),
            StrategyKind::Gambling => apply_gambling(true_pref, popularity),
        }
    }
}

/// A fraction of pupils reporting according to one strategy, using a shared
/// view of school popularity.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategyMix {
    pub kind: StrategyKind,
    pub fraction: f64,
    pub popularity: Vec<f64>,
}

impl StrategyMix {
    pub fn new(kind: StrategyKind, fraction: f64, popularity: Vec<f64>) -> Result<Self> {
        if !(0.0..=1.0).contains(&fraction) {
            return Err(invalid(format!(
                "strategist fraction {fraction} outside [0, 1]"
            )));
        }
        Ok(Self {
            kind,
            fraction,
            popularity,
        })
    }

    /// Marks each pupil as a strategist independently with probability
    /// `fraction`.
    pub fn draw_mask<R: Rng + ?Sized>(&self, num_pupils: usize, rng: &mut R) -> Vec<bool> {
        (0..num_pupils)
            .map(|_| rng.gen::<f64>() < self.fraction)
            .collect()
    }

    /// The reported preferences: strategists misreport, the rest are honest.
    pub fn apply(&self, true_prefs: &PreferenceSet, mask: &[bool]) -> Result<PreferenceSet> {
        if self.popularity.len() != true_prefs.num_schools() {
            return Err(invalid("popularity length does not match the schools"));
        }
        if mask.len() != true_prefs.len() {
            return Err(invalid("strategist mask length does not match the pupils"));
        }
        let reported = true_prefs
            .iter()
            .zip(mask)
            .map(|(p, &strategic)| {
                if strategic {
                    self.kind.apply(p, &self.popularity)
                } else {
                    p.clone()
                }
            })
            .collect();
        PreferenceSet::new(true_prefs.num_schools(), reported)
    }
}

/// Rank reports against the true preferences, split into strategists
/// (`mask[i] == true`) and honest pupils.
pub fn true_rank_report(
    true_prefs: &PreferenceSet,
    sol: &Solution,
    strategist_mask: &[bool],
) -> Result<(RankReport, RankReport)> {
    let n = true_prefs.len();
    if sol.len() != n || strategist_mask.len() != n {
        return Err(invalid("solution, mask and preferences differ in length"));
    }
    let m = true_prefs.num_schools();
    if sol.assignment().iter().any(|&s| s >= m) {
        return Err(invalid("solution names an unknown school"));
    }
    let mut strategists = Vec::new();
    let mut honest = Vec::new();
    for (i, &strategic) in strategist_mask.iter().enumerate() {
        let r = true_prefs.rank(i, sol.school_of(i));
        if strategic {
            strategists.push(r);
        } else {
            honest.push(r);
        }
    }
    Ok((
        RankReport::from_ranks(strategists, m),
        RankReport::from_ranks(honest, m),
    ))
}

/// Completes partial lists: schools are ordered by how often they are listed
/// first, and each pupil's missing schools are appended from least to most
/// popular. Equal popularity falls back to ascending school id.
pub fn complete_preferences(partial: &[Vec<SchoolId>], problem: &Problem) -> Result<PreferenceSet> {
    let m = problem.num_schools();
    if partial.len() != problem.num_pupils() {
        return Err(invalid(format!(
            "{} lists for {} pupils",
            partial.len(),
            problem.num_pupils()
        )));
    }
    let mut first_counts = vec![0usize; m];
    for (i, list) in partial.iter().enumerate() {
        let mut seen = vec![false; m];
        for &s in list {
            if s >= m {
                return Err(invalid(format!(
                    "pupil {} lists unknown school {}",
                    i + 1,
                    s + 1
                )));
            }
            if std::mem::replace(&mut seen[s], true) {
                return Err(invalid(format!(
                    "pupil {} lists school {} twice",
                    i + 1,
                    s + 1
                )));
            }
        }
        if let Some(&s) = list.first() {
            first_counts[s] += 1;
        }
    }
    let mut least_popular_first: Vec<SchoolId> = (0..m).collect();
    least_popular_first.sort_by_key(|&s| (first_counts[s], s));

    let prefs = partial
        .iter()
        .map(|list| {
            let mut ranking = list.clone();
            ranking.extend(least_popular_first.iter().filter(|s| !list.contains(s)));
            Preference::new(ranking)
        })
        .collect::<Result<Vec<_>>>()?;
    PreferenceSet::new(m, prefs)
}
