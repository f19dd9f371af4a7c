//! Mixed-integer solving, built from first principles.
//!
//! Three layers, each checking the one below:
//!
//! * a bounded-variable primal simplex for the LP relaxations
//!   ([`solve_lp`]),
//! * best-first branch and bound over it ([`solve_milp`]),
//! * an exhaustive trajectory enumerator with a dynamic programming
//!   cross-check ([`oracle_solve`]), for validating the other two on
//!   small instances.

mod branch;
mod oracle;
mod simplex;
mod trajectories;

pub use branch::{solve_milp, BranchRule, MilpSolution, SolverConfig, SolverError};
pub use oracle::{oracle_solve, OracleConfig, OracleError};
pub use simplex::{
    solve_lp, solve_lp_with_bounds, LpSolution, LpStatus, SimplexError, SimplexOptions,
};
pub use trajectories::{
    enumerate_trajectories, EnumerationError, EnumerationLimits, StepLocation, Trajectory,
};
