//! Stacking-sequence optimization by genetic algorithm.
//!
//! Fitness is the weighted mean absolute difference between required and
//! achieved tip pitch change over the off-design points of a schedule. Each
//! candidate costs one factorization and one unit-pressure solve; the achieved
//! pitch change at each point is the resulting twist slope times `delta P`.
//! Because that response is linear, [`oracle_optimum`] gives the best value any
//! layup can reach, which bounds every run from below.

mod domain;
mod engine;
mod oracle;
mod study;

pub use domain::AngleDomain;
pub use engine::{
    run_ga, Chromosome, Evaluation, GaConfig, GenerationStats, LayupProblem, OptimizationResult, Penalty,
};
pub use oracle::{objective_for_slope, oracle_optimum, oracle_within, weighted_median, OracleSolution};
pub use study::{max_strain_penalty, thickness_csv, thickness_study, StrainLimits, ThicknessResult, ThicknessRow};
