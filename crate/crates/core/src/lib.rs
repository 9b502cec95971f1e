//! Mechanisms for the school admission problem with indifference: pupils
//! rank schools, schools have capacities but no preferences, and lotteries
//! break ties.
//!
//! - [`model`]: problems, preferences, tie-breakers, solutions and the
//!   average-rank report.
//! - [`mechanisms`]: Boston and deferred acceptance.
//! - [`zeeburg`]: queue promotion with minimal lottery use.
//! - [`exchange`]: pairwise-exchange improvement.
//! - [`scenarios`]: random datasets, strategic misreports, list completion.
//! - [`oracle`]: exhaustive references for small instances.

pub mod error;
pub mod exchange;
pub mod mechanisms;
pub mod model;
pub mod oracle;
pub mod scenarios;
pub mod zeeburg;

pub use error::{Error, Result};
pub use exchange::{is_converged, pairwise_exchange, ExchangeOutcome, Variant};
pub use mechanisms::{boston, deferred_acceptance};
pub use model::{
    count_differences, evaluate, make_tiebreaker, rank_of, Preference, PreferenceSet, Problem,
    PupilId, RankReport, SchoolId, Solution, TieBreakMode, TieBreaker,
};
pub use oracle::{
    count_assignments, optimal_q, optimal_q_bounded, scan_pareto, Optimum, DEFAULT_SEARCH_BOUND,
};
pub use scenarios::{
    apply_cautious, apply_gambling, builtin_problem, builtin_scenario, complete_preferences,
    generate_dataset, true_rank_report, BuiltinScenario, Population, Scenario, StrategyKind,
    StrategyMix,
};
pub use zeeburg::{zeeburg, ZeeburgOutcome, ZeeburgState};
