//! Operation scheduling and lifetime economics for a truck-mounted battery
//! that can relocate between two electricity market nodes.
//!
//! The crate is organised bottom-up:
//!
//! * [`core`] holds the physical and economic parameter types plus the
//!   arithmetic helpers shared by everything else.
//! * [`milp`] builds the one-day scheduling problem as a mixed-integer
//!   linear program, extracts schedules from solution vectors and can
//!   re-check any schedule against the constraint set from scratch.
//! * [`solver`] is a self-contained exact solver: a bounded-variable
//!   revised simplex for the LP relaxations, branch and bound on the
//!   location binaries, and an independent brute-force oracle used to
//!   cross-check optimality in the test suites.
//! * [`simulate`] chains daily solves into multi-day and whole-life runs
//!   with throughput budget accounting and discounted revenue summaries.
//! * [`analytics`] answers the price-side questions: hourly nodal price
//!   differences, threshold exceedance counts and their correlation.
//! * [`io`] parses the external CSV/JSON formats and writes the report
//!   files; [`cli`] wires those into the `gridhop` binary.

pub mod analytics;
pub mod cli;
pub mod core;
pub mod io;
pub mod milp;
pub mod simulate;
pub mod solver;
