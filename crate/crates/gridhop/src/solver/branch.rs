//! Exact branch and bound over the LP relaxation.
//!
//! Best-first on the LP bound with deterministic tie-breaks, branching
//! only on ranked integral columns (presence and travel for day
//! instances). Once those come out integral, the node is "polished":
//! the ranked columns are fixed to their rounded values, the implied
//! transit indicators are filled in canonically, and one more LP pins
//! down the continuous part. That keeps every reported solution exactly
//! feasible instead of merely within rounding noise.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use thiserror::Error;

use crate::milp::{complete_transit_indicators, MilpInstance};
use crate::solver::simplex::{solve_lp_with_bounds, LpStatus, SimplexError, SimplexOptions};

/// Branching rule identifier. There is exactly one today; the enum
/// keeps configs explicit about what they asked for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BranchRule {
    /// Branch on the ranked column farthest from an integer, lower
    /// ranks first on ties, then lower column index.
    #[default]
    MostFractional,
}

#[derive(Debug, Clone, Copy)]
pub struct SolverConfig {
    /// A value this close to an integer counts as integral.
    pub integrality_tol: f64,
    /// Row residual tolerance, passed through to the simplex.
    pub feasibility_tol: f64,
    /// Abort after exploring this many nodes.
    pub node_limit: usize,
    /// Stop proving once the bound is within this of the incumbent.
    /// Zero keeps the search exact.
    pub absolute_gap: f64,
    pub branch_rule: BranchRule,
    pub simplex: SimplexOptions,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            integrality_tol: 1e-6,
            feasibility_tol: 1e-7,
            node_limit: 200_000,
            absolute_gap: 0.0,
            branch_rule: BranchRule::MostFractional,
            simplex: SimplexOptions::default(),
        }
    }
}

impl SolverConfig {
    fn simplex_options(&self) -> SimplexOptions {
        SimplexOptions {
            feasibility_tol: self.feasibility_tol,
            ..self.simplex
        }
    }
}

/// An exact MILP optimum.
#[derive(Debug, Clone)]
pub struct MilpSolution {
    pub values: Vec<f64>,
    pub objective: f64,
    pub nodes_explored: usize,
    /// Remaining bound gap; zero when the search ran to completion.
    pub gap: f64,
}

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("no integer-feasible solution exists")]
    Infeasible,
    #[error("relaxation is unbounded above")]
    Unbounded,
    #[error("node limit {limit} reached with bound {bound} and incumbent {incumbent}")]
    NodeLimit {
        limit: usize,
        bound: f64,
        incumbent: f64,
        best: Option<Box<MilpSolution>>,
    },
    #[error(transparent)]
    Simplex(#[from] SimplexError),
    #[error("could not complete implied binaries: {0}")]
    Completion(String),
}

struct OpenNode {
    bound: f64,
    depth: usize,
    seq: u64,
    changes: Vec<(usize, f64, f64)>,
}

impl PartialEq for OpenNode {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for OpenNode {}
impl PartialOrd for OpenNode {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for OpenNode {
    fn cmp(&self, other: &Self) -> Ordering {
        // Max-heap: highest bound first, then deepest, then newest.
        self.bound
            .total_cmp(&other.bound)
            .then(self.depth.cmp(&other.depth))
            .then(self.seq.cmp(&other.seq))
    }
}

/// Solve a MILP exactly. Integral columns with a branch rank are
/// branched on; rank-less integral columns must be implied by them and
/// are filled in via the day completion (or must come out integral on
/// their own for generic instances).
pub fn solve_milp(
    instance: &MilpInstance,
    config: &SolverConfig,
) -> Result<MilpSolution, SolverError> {
    let sx = config.simplex_options();
    let branchable: Vec<usize> = instance
        .columns
        .iter()
        .enumerate()
        .filter(|(_, c)| c.integral && c.branch_rank.is_some())
        .map(|(j, _)| j)
        .collect();
    let implied: Vec<usize> = instance
        .columns
        .iter()
        .enumerate()
        .filter(|(_, c)| c.integral && c.branch_rank.is_none())
        .map(|(j, _)| j)
        .collect();

    let prune_tol = config.absolute_gap.max(1e-9);
    let mut heap = BinaryHeap::new();
    heap.push(OpenNode {
        bound: f64::INFINITY,
        depth: 0,
        seq: 0,
        changes: Vec::new(),
    });
    let mut seq = 0u64;
    let mut nodes = 0usize;
    let mut incumbent: Option<MilpSolution> = None;
    let mut root_unbounded = false;

    while let Some(node) = heap.pop() {
        let inc_obj = incumbent.as_ref().map(|s| s.objective);
        if let Some(inc) = inc_obj {
            if node.bound <= inc + prune_tol {
                continue;
            }
        }
        if nodes >= config.node_limit {
            let bound = node.bound;
            return Err(SolverError::NodeLimit {
                limit: config.node_limit,
                bound,
                incumbent: inc_obj.unwrap_or(f64::NEG_INFINITY),
                best: incumbent.map(|mut s| {
                    s.nodes_explored = nodes;
                    s.gap = bound - s.objective;
                    Box::new(s)
                }),
            });
        }
        nodes += 1;

        let sol = solve_lp_with_bounds(instance, &node.changes, &sx)?;
        match sol.status {
            LpStatus::Infeasible => continue,
            LpStatus::Unbounded => {
                if node.depth == 0 {
                    root_unbounded = true;
                    break;
                }
                // A bounded root cannot spawn unbounded children; treat
                // as numerical trouble.
                return Err(SolverError::Simplex(SimplexError::Singular(
                    "child relaxation reported unbounded".to_owned(),
                )));
            }
            LpStatus::Optimal => {}
        }
        let bound = sol.objective;
        if let Some(inc) = inc_obj {
            if bound <= inc + prune_tol {
                continue;
            }
        }

        // Find the ranked column farthest from integrality.
        let mut pick: Option<(usize, f64, u8)> = None; // (col, distance, rank)
        for &j in &branchable {
            let v = sol.values[j];
            let dist = (v - v.round()).abs();
            if dist > config.integrality_tol {
                let rank = instance.columns[j].branch_rank.unwrap_or(u8::MAX);
                let better = match pick {
                    None => true,
                    Some((pj, pdist, prank)) => {
                        dist > pdist + 1e-12
                            || ((dist - pdist).abs() <= 1e-12
                                && (rank < prank || (rank == prank && j < pj)))
                    }
                };
                if better {
                    pick = Some((j, dist, rank));
                }
            }
        }

        match pick {
            Some((j, _, _)) => {
                let v = sol.values[j];
                let (eff_lo, eff_up) = node
                    .changes
                    .iter()
                    .rev()
                    .find(|&&(c, _, _)| c == j)
                    .map(|&(_, a, b)| (a, b))
                    .unwrap_or((instance.columns[j].lower, instance.columns[j].upper));
                for (a, b) in [(eff_lo, v.floor()), (v.ceil(), eff_up)] {
                    if a <= b {
                        let mut changes = node.changes.clone();
                        changes.retain(|&(c, _, _)| c != j);
                        changes.push((j, a, b));
                        seq += 1;
                        heap.push(OpenNode {
                            bound,
                            depth: node.depth + 1,
                            seq,
                            changes,
                        });
                    }
                }
            }
            None => {
                // Ranked part is integral: polish into an exactly
                // feasible candidate.
                let candidate = polish(instance, &branchable, &implied, &sol.values, &sx)?;
                let better = match &incumbent {
                    None => true,
                    Some(inc) => candidate.0 > inc.objective,
                };
                if better {
                    incumbent = Some(MilpSolution {
                        values: candidate.1,
                        objective: candidate.0,
                        nodes_explored: 0,
                        gap: 0.0,
                    });
                }
            }
        }
    }

    if root_unbounded {
        return Err(SolverError::Unbounded);
    }
    match incumbent {
        Some(mut s) => {
            s.nodes_explored = nodes;
            s.gap = 0.0;
            Ok(s)
        }
        None => Err(SolverError::Infeasible),
    }
}

/// Fix the ranked binaries at their rounded values, derive the implied
/// ones, and re-solve the continuous part. Returns (objective, values).
fn polish(
    instance: &MilpInstance,
    branchable: &[usize],
    implied: &[usize],
    relaxed: &[f64],
    sx: &SimplexOptions,
) -> Result<(f64, Vec<f64>), SolverError> {
    let mut fixes: Vec<(usize, f64, f64)> = branchable
        .iter()
        .map(|&j| {
            let v = relaxed[j].round();
            (j, v, v)
        })
        .collect();

    if let Some(meta) = &instance.day {
        // Write the rounded ranked values into a scratch vector, let
        // the completion fill the implied indicators, then fix those
        // too.
        let mut scratch = relaxed.to_vec();
        for &(j, v, _) in &fixes {
            scratch[j] = v;
        }
        complete_transit_indicators(meta, &mut scratch)
            .map_err(|e| SolverError::Completion(e.to_string()))?;
        for &j in implied {
            fixes.push((j, scratch[j], scratch[j]));
        }
    }

    let polished = solve_lp_with_bounds(instance, &fixes, sx)?;
    match polished.status {
        LpStatus::Optimal => {
            let mut values = polished.values;
            // Snap the fixed entries to their exact integers.
            for &(j, v, _) in &fixes {
                values[j] = v;
            }
            if instance.day.is_none() {
                for &j in implied {
                    let v = values[j];
                    if (v - v.round()).abs() > 1e-6 {
                        return Err(SolverError::Completion(format!(
                            "column {} stayed fractional at {v}",
                            instance.columns[j].name
                        )));
                    }
                    values[j] = v.round();
                }
            }
            Ok((instance.objective_value(&values), values))
        }
        LpStatus::Infeasible => {
            // Rounding killed feasibility; fall back to the relaxed
            // point, which is integral within tolerance.
            Ok((instance.objective_value(relaxed), relaxed.to_vec()))
        }
        LpStatus::Unbounded => Err(SolverError::Simplex(SimplexError::Singular(
            "polish relaxation reported unbounded".to_owned(),
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::{Column, MilpInstance, RelOp};

    #[test]
    fn knapsack_finds_integer_optimum() {
        // max 8a + 11b + 6c + 4d st 5a + 7b + 4c + 3d <= 14, binary.
        let mut inst = MilpInstance::new("knap");
        let w = [5.0, 7.0, 4.0, 3.0];
        let p = [8.0, 11.0, 6.0, 4.0];
        let cols: Vec<usize> = (0..4)
            .map(|k| inst.add_column(Column::binary(format!("x{k}"), 0), p[k]))
            .collect();
        inst.add_row(
            "cap",
            cols.iter().map(|&c| (c, w[c])).collect(),
            RelOp::Le,
            14.0,
        );
        let sol = solve_milp(&inst, &SolverConfig::default()).unwrap();
        // Best is b + c + d = 21 at weight 14.
        assert!((sol.objective - 21.0).abs() < 1e-9);
        assert_eq!(sol.values[cols[0]], 0.0);
        assert_eq!(sol.values[cols[1]], 1.0);
        assert_eq!(sol.values[cols[2]], 1.0);
        assert_eq!(sol.values[cols[3]], 1.0);
        assert_eq!(sol.gap, 0.0);
    }

    #[test]
    fn general_integers_branch_on_floor_and_ceil() {
        // max 3x + 2y st 2x + y <= 7, x + 3y <= 9, x,y integer >= 0.
        let mut inst = MilpInstance::new("gi");
        let x = inst.add_column(
            Column {
                name: "x".into(),
                lower: 0.0,
                upper: 10.0,
                integral: true,
                branch_rank: Some(0),
            },
            3.0,
        );
        let y = inst.add_column(
            Column {
                name: "y".into(),
                lower: 0.0,
                upper: 10.0,
                integral: true,
                branch_rank: Some(0),
            },
            2.0,
        );
        inst.add_row("a", vec![(x, 2.0), (y, 1.0)], RelOp::Le, 7.0);
        inst.add_row("b", vec![(x, 1.0), (y, 3.0)], RelOp::Le, 9.0);
        let sol = solve_milp(&inst, &SolverConfig::default()).unwrap();
        // x = 3, y = 1 gives 11; x = 2, y = 2 gives 10.
        assert!((sol.objective - 11.0).abs() < 1e-9);
        assert_eq!(sol.values[x], 3.0);
        assert_eq!(sol.values[y], 1.0);
    }

    #[test]
    fn infeasible_integer_program() {
        let mut inst = MilpInstance::new("noint");
        let x = inst.add_column(Column::binary("x", 0), 1.0);
        let y = inst.add_column(Column::binary("y", 0), 1.0);
        // x + y = 1 and x + y = 2 cannot both hold.
        inst.add_row("one", vec![(x, 1.0), (y, 1.0)], RelOp::Eq, 1.0);
        inst.add_row("two", vec![(x, 1.0), (y, 1.0)], RelOp::Eq, 2.0);
        assert!(matches!(
            solve_milp(&inst, &SolverConfig::default()),
            Err(SolverError::Infeasible)
        ));
    }

    #[test]
    fn fractional_lp_optimum_forces_branching() {
        // LP relaxation peaks at x = 0.5; the MILP must settle on an
        // endpoint.
        let mut inst = MilpInstance::new("frac");
        let x = inst.add_column(Column::binary("x", 0), 1.0);
        let y = inst.add_column(Column::continuous("y", 0.0, 10.0), 2.0);
        inst.add_row("cap", vec![(x, 4.0), (y, 2.0)], RelOp::Le, 6.0);
        inst.add_row("tie", vec![(x, -4.0), (y, 2.0)], RelOp::Le, 2.0);
        let sol = solve_milp(&inst, &SolverConfig::default()).unwrap();
        // x = 1: y <= 1 and y <= 3 -> obj 3. x = 0: y <= 1 -> obj 2.
        assert!((sol.objective - 3.0).abs() < 1e-9);
        assert_eq!(sol.values[x], 1.0);
    }

    #[test]
    fn node_limit_reports_progress() {
        // A small but branchy equal-weights problem.
        let mut inst = MilpInstance::new("limit");
        let n = 12;
        let cols: Vec<usize> = (0..n)
            .map(|k| inst.add_column(Column::binary(format!("x{k}"), 0), 1.0 + 0.01 * k as f64))
            .collect();
        inst.add_row(
            "half",
            cols.iter().map(|&c| (c, 1.0)).collect(),
            RelOp::Le,
            5.5,
        );
        let config = SolverConfig {
            node_limit: 2,
            ..SolverConfig::default()
        };
        match solve_milp(&inst, &config) {
            Err(SolverError::NodeLimit { limit, .. }) => assert_eq!(limit, 2),
            other => panic!("expected node limit, got {other:?}"),
        }
    }

    #[test]
    fn already_integral_relaxation_skips_branching() {
        let mut inst = MilpInstance::new("easy");
        let x = inst.add_column(Column::binary("x", 0), 5.0);
        inst.add_row("r", vec![(x, 1.0)], RelOp::Le, 3.0);
        let sol = solve_milp(&inst, &SolverConfig::default()).unwrap();
        assert_eq!(sol.values[x], 1.0);
        assert!((sol.objective - 5.0).abs() < 1e-9);
        assert_eq!(sol.nodes_explored, 1);
    }
}
