//! Experiment configuration and the scenario definition file.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::Rng;
use serde::Deserialize;

use schoolmatch::{
    boston, builtin_problem, builtin_scenario, deferred_acceptance, make_tiebreaker, zeeburg,
    BuiltinScenario, PreferenceSet, Problem, Scenario, Solution, StrategyKind, TieBreakMode,
    Variant,
};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    BostonStb,
    BostonMtb,
    DaStb,
    DaMtb,
    Zeeburg,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::BostonStb,
        Algorithm::BostonMtb,
        Algorithm::DaStb,
        Algorithm::DaMtb,
        Algorithm::Zeeburg,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::BostonStb => "boston-stb",
            Algorithm::BostonMtb => "boston-mtb",
            Algorithm::DaStb => "da-stb",
            Algorithm::DaMtb => "da-mtb",
            Algorithm::Zeeburg => "zeeburg",
        }
    }

    fn tiebreak_mode(self) -> TieBreakMode {
        match self {
            Algorithm::BostonMtb | Algorithm::DaMtb => TieBreakMode::Multiple,
            _ => TieBreakMode::Single,
        }
    }

    /// Draws a lottery from `rng` and runs the mechanism. The second value is
    /// the number of forced lottery decisions (Zeeburg only).
    pub fn run<R: Rng + ?Sized>(
        self,
        problem: &Problem,
        prefs: &PreferenceSet,
        rng: &mut R,
    ) -> schoolmatch::Result<(Solution, Option<usize>)> {
        let tb = make_tiebreaker(self.tiebreak_mode(), problem, rng);
        match self {
            Algorithm::BostonStb | Algorithm::BostonMtb => {
                boston(problem, prefs, &tb).map(|s| (s, None))
            }
            Algorithm::DaStb | Algorithm::DaMtb => {
                deferred_acceptance(problem, prefs, &tb).map(|s| (s, None))
            }
            Algorithm::Zeeburg => {
                zeeburg(problem, prefs, &tb).map(|o| (o.solution, Some(o.tiebreak_decisions)))
            }
        }
    }
}

impl FromStr for Algorithm {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| HarnessError::Config(format!("unknown algorithm {s:?}")))
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum PostOptimizer {
    #[default]
    None,
    Pe,
    Pem,
}

impl PostOptimizer {
    pub fn variant(self) -> Option<Variant> {
        match self {
            PostOptimizer::None => None,
            PostOptimizer::Pe => Some(Variant::MinRank),
            PostOptimizer::Pem => Some(Variant::MaxRank),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PostOptimizer::None => "none",
            PostOptimizer::Pe => "pe",
            PostOptimizer::Pem => "pem",
        }
    }
}

impl FromStr for PostOptimizer {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Self::None),
            "pe" => Ok(Self::Pe),
            "pem" => Ok(Self::Pem),
            other => Err(HarnessError::Config(format!(
                "unknown post-optimizer {other:?}"
            ))),
        }
    }
}

pub fn parse_strategy(s: &str) -> Result<StrategyKind> {
    match s {
        "none" | "honest" => Ok(StrategyKind::Honest),
        "cautious" => Ok(StrategyKind::Cautious),
        "gambling" => Ok(StrategyKind::Gambling),
        other => Err(HarnessError::Config(format!("unknown strategy {other:?}"))),
    }
}

pub fn strategy_name(kind: StrategyKind) -> &'static str {
    match kind {
        StrategyKind::Honest => "none",
        StrategyKind::Cautious => "cautious",
        StrategyKind::Gambling => "gambling",
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScenarioSource {
    Builtin(BuiltinScenario),
    File(PathBuf),
}

impl FromStr for ScenarioSource {
    type Err = HarnessError;

    /// `A`..`D` name a builtin scenario; anything else is a file path.
    fn from_str(s: &str) -> Result<Self> {
        match s.parse::<BuiltinScenario>() {
            Ok(b) => Ok(Self::Builtin(b)),
            Err(_) => Ok(Self::File(PathBuf::from(s))),
        }
    }
}

/// A scenario together with the problem it is generated for.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioDef {
    pub scenario: Scenario,
    pub problem: Problem,
}

impl ScenarioSource {
    pub fn load(&self) -> Result<ScenarioDef> {
        match self {
            ScenarioSource::Builtin(b) => Ok(ScenarioDef {
                scenario: builtin_scenario(*b),
                problem: builtin_problem(),
            }),
            ScenarioSource::File(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
                parse_scenario_file(&text, path)
            }
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    pupils: usize,
    capacities: Vec<usize>,
    populations: Vec<PopulationFile>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PopulationFile {
    #[serde(default = "one")]
    fraction: f64,
    weights: Vec<f64>,
}

fn one() -> f64 {
    1.0
}

/// Parses a TOML scenario definition:
///
/// ```toml
/// pupils = 1000
/// capacities = [100, 100, 100]
///
/// [[populations]]
/// fraction = 0.6
/// weights = [20, 1, 1]
///
/// [[populations]]
/// fraction = 0.4
/// weights = [1, 20, 20]
/// ```
pub fn parse_scenario_file(text: &str, path: &Path) -> Result<ScenarioDef> {
    let file: ScenarioFile = toml::from_str(text).map_err(|e| HarnessError::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let scenario = Scenario::new(
        file.populations
            .into_iter()
            .map(|p| schoolmatch::Population {
                fraction: p.fraction,
                weights: p.weights,
            })
            .collect(),
    )?;
    let problem = Problem::new(file.capacities, file.pupils)?;
    if scenario.num_schools() != problem.num_schools() {
        return Err(HarnessError::Config(format!(
            "{}: {} weights per population but {} capacities",
            path.display(),
            scenario.num_schools(),
            problem.num_schools()
        )));
    }
    Ok(ScenarioDef { scenario, problem })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

impl FromStr for OutputFormat {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(HarnessError::Config(format!("unknown format {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub scenario: ScenarioSource,
    pub algorithm: Algorithm,
    pub post: PostOptimizer,
    pub strategy: StrategyKind,
    pub fraction: f64,
    pub experiments: usize,
    pub base_seed: u64,
    pub best_of: usize,
}

impl ExperimentConfig {
    pub fn new(scenario: BuiltinScenario, algorithm: Algorithm) -> Self {
        Self {
            scenario: ScenarioSource::Builtin(scenario),
            algorithm,
            post: PostOptimizer::None,
            strategy: StrategyKind::Honest,
            fraction: 0.0,
            experiments: 1000,
            base_seed: 1,
            best_of: 1,
        }
    }

    pub fn with_post(mut self, post: PostOptimizer) -> Self {
        self.post = post;
        self
    }

    pub fn with_strategy(mut self, strategy: StrategyKind, fraction: f64) -> Self {
        self.strategy = strategy;
        self.fraction = fraction;
        self
    }

    pub fn with_experiments(mut self, experiments: usize) -> Self {
        self.experiments = experiments;
        self
    }

    pub fn with_seed(mut self, base_seed: u64) -> Self {
        self.base_seed = base_seed;
        self
    }

    pub fn with_best_of(mut self, best_of: usize) -> Self {
        self.best_of = best_of;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.experiments == 0 {
            return Err(HarnessError::Config(
                "experiments must be at least 1".into(),
            ));
        }
        if self.best_of == 0 {
            return Err(HarnessError::Config("best-of must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.fraction) {
            return Err(HarnessError::Config(format!(
                "strategist fraction {} outside [0, 1]",
                self.fraction
            )));
        }
        Ok(())
    }

    pub fn strategies_active(&self) -> bool {
        self.strategy != StrategyKind::Honest
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for a in Algorithm::ALL {
            assert_eq!(a.name().parse::<Algorithm>().unwrap(), a);
        }
        assert!("da".parse::<Algorithm>().is_err());
        assert_eq!("pem".parse::<PostOptimizer>().unwrap(), PostOptimizer::Pem);
        assert_eq!(parse_strategy("gambling").unwrap(), StrategyKind::Gambling);
        assert!(parse_strategy("greedy").is_err());
    }

    #[test]
    fn scenario_source() {
        assert_eq!(
            "C".parse::<ScenarioSource>().unwrap(),
            ScenarioSource::Builtin(BuiltinScenario::C)
        );
        assert_eq!(
            "x.toml".parse::<ScenarioSource>().unwrap(),
            ScenarioSource::File("x.toml".into())
        );
    }

    #[test]
    fn scenario_file() {
        let text = r#"
pupils = 10
capacities = [5, 5, 5]

[[populations]]
fraction = 0.6
weights = [20, 1, 1]

[[populations]]
fraction = 0.4
weights = [1, 20, 20]
"#;
        let def = parse_scenario_file(text, Path::new("s.toml")).unwrap();
        assert_eq!(def.problem.num_pupils(), 10);
        assert_eq!(def.scenario.populations().len(), 2);
        assert_eq!(def.scenario.population_sizes(10), vec![6, 4]);

        let short = "pupils = 10\ncapacities = [5, 5]\n[[populations]]\nweights = [1, 1, 1]\n";
        assert!(matches!(
            parse_scenario_file(short, Path::new("s.toml")),
            Err(HarnessError::Config(_))
        ));
        let crowded = "pupils = 11\ncapacities = [5, 5]\n[[populations]]\nweights = [1, 1]\n";
        assert!(parse_scenario_file(crowded, Path::new("s.toml")).is_err());
        assert!(matches!(
            parse_scenario_file("pupils = ", Path::new("s.toml")),
            Err(HarnessError::Parse { .. })
        ));
    }

    #[test]
    fn validation() {
        let ok = ExperimentConfig::new(BuiltinScenario::A, Algorithm::DaStb);
        ok.validate().unwrap();
        assert!(ok.clone().with_experiments(0).validate().is_err());
        assert!(ok.clone().with_best_of(0).validate().is_err());
        assert!(ok
            .with_strategy(StrategyKind::Cautious, 1.5)
            .validate()
            .is_err());
    }
}
