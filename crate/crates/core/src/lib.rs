//! Budget-constrained reinforcement of ranked scores.
//!
//! A principal owns some entries in a ranking and may raise their scores
//! at a cost of one budget unit per score unit. Utility is the average
//! signed comparison of the principal's entries against every other
//! entry, ties counted as wins. The solvers here find the plan that
//! maximizes utility for a given total budget.

pub mod audit;
pub mod basic;
pub mod error;
pub mod io;
pub mod iterative;
pub mod model;
pub mod oracle;
pub mod unimodal;

pub use basic::{
    basic_solve, budget_curve, candidate_targets, trace, AlphaSolution, BudgetPoint,
    CandidateTargets, CollinearKind, CollinearScore, Gradient, TraceRule,
};
pub use error::{Error, Result};
pub use iterative::{
    bounded_knapsack, iterative_solve, promotion_step_size, ItemType, KnapsackInstance, Promotion,
    ReinforcementPlan, SolverKind,
};
pub use model::{
    chord_gradient, expectation, utility, BudgetSpec, ComplementModel, EmpiricalCdf,
    PiecewiseLinearCdf, ReinforcedSet, Segment, SupportedSet,
};
pub use oracle::{oracle_solve, sign_sum_utility, OracleResult};
pub use unimodal::{
    solve_chord_tangency, solve_decreasing, solve_unimodal, tangency_threshold, UnimodalProfile,
};
