//! Day-by-day operation: solve, account, carry the state forward.
//!
//! One day at a time the runner builds the scheduling problem, solves
//! it, re-checks the schedule against the rules independently, books
//! the money and the wear, and rolls the battery's energy and location
//! into the next day's starting state. Longer wrappers keep going until
//! the wear budget runs out and discount the yearly take into a net
//! present value.

use serde::Serialize;
use thiserror::Error;

use crate::core::{BoundaryState, Location, NodeSide, PriceSeries, SystemSpec};
use crate::milp::{
    build_day_instance, check_feasibility, extract_schedule, BuildError, ConstraintViolation,
    DispatchSchedule, ExtractError, FormulationOptions, ScheduleEconomics,
};
use crate::solver::{solve_milp, MilpSolution, SolverConfig, SolverError};

/// Whether the unit may relocate or is pinned to one node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatingMode {
    /// Full model: the unit moves whenever it pays.
    Portable,
    /// Travel and the far node are fixed out of the model. The day must
    /// start at the pinned node.
    Stationary(NodeSide),
}

#[derive(Debug, Error)]
pub enum SimulateError {
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Extract(#[from] ExtractError),
    #[error("solved schedule failed the independent rule check: {}", summarize(.0))]
    ScheduleRejected(Vec<ConstraintViolation>),
    #[error("stationary operation at node {0} requires starting the day there")]
    StationaryBoundary(NodeSide),
    #[error("multi-day accounting needs 24-hour horizons")]
    HorizonNotDaily,
    #[error("no day price series supplied")]
    NoDays,
    #[error("schedule ends nowhere; cannot carry the location forward")]
    NoFinalLocation,
    #[error("budget not exhausted after {0} days; check the wear parameters")]
    LifetimeTooLong(usize),
}

fn summarize(violations: &[ConstraintViolation]) -> String {
    let mut parts: Vec<String> = violations.iter().take(3).map(|v| v.to_string()).collect();
    if violations.len() > 3 {
        parts.push(format!("and {} more", violations.len() - 3));
    }
    parts.join("; ")
}

/// One solved day.
#[derive(Debug, Clone)]
pub struct DayOutcome {
    pub schedule: DispatchSchedule,
    pub solution: MilpSolution,
    /// Starting state for the next day.
    pub boundary_end: BoundaryState,
}

/// Solve a single day and carry the boundary forward.
pub fn run_day(
    spec: &SystemSpec,
    prices: &PriceSeries,
    boundary: &BoundaryState,
    options: &FormulationOptions,
    mode: OperatingMode,
    solver: &SolverConfig,
) -> Result<DayOutcome, SimulateError> {
    if let OperatingMode::Stationary(node) = mode {
        if boundary.initial_location != Location::at(node) {
            return Err(SimulateError::StationaryBoundary(node));
        }
    }

    let mut day = build_day_instance(spec, prices, boundary, options)?;

    if let OperatingMode::Stationary(node) = mode {
        let layout = day.layout();
        for h in 0..layout.steps {
            for side in NodeSide::BOTH {
                let fix = if side == node { 1.0 } else { 0.0 };
                pin(&mut day.milp, layout.col_at_node(side, h), fix);
                pin(&mut day.milp, layout.col_arriving(side, h), 0.0);
                pin(&mut day.milp, layout.col_departing(side, h), 0.0);
                pin(&mut day.milp, layout.col_travel_start(side, h), 0.0);
            }
            pin(&mut day.milp, layout.col_traveling(h), 0.0);
        }
    }

    let solution = solve_milp(&day.milp, solver)?;
    let schedule = extract_schedule(&day, &solution.values)?;
    let violations = check_feasibility(&schedule, spec, boundary, options, solver.feasibility_tol);
    if !violations.is_empty() {
        return Err(SimulateError::ScheduleRejected(violations));
    }
    let boundary_end = advance_boundary(spec, boundary, &schedule)?;
    Ok(DayOutcome {
        schedule,
        solution,
        boundary_end,
    })
}

fn pin(milp: &mut crate::milp::MilpInstance, col: usize, value: f64) {
    milp.columns[col].lower = value;
    milp.columns[col].upper = value;
}

/// Starting state for the day after a schedule.
///
/// The new travel history is the old one extended by the day's travel
/// indicators, trimmed to the journey-duration window. A journey still
/// open at the day's end leaves the unit in transit; its destination is
/// recorded as the node across from the last one visited, or carried
/// over unchanged when the journey began before the day did.
pub fn advance_boundary(
    spec: &SystemSpec,
    boundary: &BoundaryState,
    schedule: &DispatchSchedule,
) -> Result<BoundaryState, SimulateError> {
    let t = spec.transport.travel_steps;
    let steps = schedule.steps;

    let mut seq = boundary.travel_history.clone();
    seq.extend_from_slice(&schedule.traveling);
    let travel_history = seq[seq.len() - t..].to_vec();

    let initial_energy_mwh = schedule
        .energy_mwh
        .last()
        .copied()
        .unwrap_or(boundary.initial_energy_mwh);

    let run = seq.iter().rev().take_while(|&&g| g).count();
    let initial_location = if run == 0 {
        let node = schedule
            .node_at(steps - 1)
            .ok_or(SimulateError::NoFinalLocation)?;
        Location::at(node)
    } else {
        let destination = if run < steps {
            let last_node = schedule
                .node_at(steps - run - 1)
                .ok_or(SimulateError::NoFinalLocation)?;
            last_node.other()
        } else {
            match boundary.initial_location {
                Location::InTransit { destination, .. } => destination,
                Location::AtNodeA => NodeSide::B,
                Location::AtNodeB => NodeSide::A,
            }
        };
        Location::InTransit {
            remaining_steps: t.saturating_sub(run),
            destination,
        }
    };

    Ok(BoundaryState {
        initial_energy_mwh,
        initial_location,
        travel_history,
    })
}

/// One day's line in the running account.
#[derive(Debug, Clone, Serialize)]
pub struct DayRecord {
    pub day_index: usize,
    /// Solver objective, calendar wear included.
    pub objective_usd: f64,
    pub economics: ScheduleEconomics,
    /// Hours spent on the road this day.
    pub travel_hours: f64,
    pub end_energy_mwh: f64,
    pub end_location: Location,
}

/// Running account over consecutive days.
///
/// Totals are derived from the day lines, always in day order, so a
/// reader can reproduce them exactly: cycled energy is a plain running
/// sum, the calendar draw is the day count times the daily rate.
#[derive(Debug, Clone, Serialize)]
pub struct SimulationLedger {
    pub calendar_per_day_mwh: f64,
    pub days: Vec<DayRecord>,
}

impl SimulationLedger {
    pub fn new(calendar_per_day_mwh: f64) -> Self {
        SimulationLedger {
            calendar_per_day_mwh,
            days: Vec::new(),
        }
    }

    pub fn total_cycling_mwh(&self) -> f64 {
        self.days
            .iter()
            .fold(0.0, |acc, d| acc + d.economics.cycling_throughput_mwh)
    }

    pub fn total_calendar_mwh(&self) -> f64 {
        self.days.len() as f64 * self.calendar_per_day_mwh
    }

    /// Wear budget consumed so far: cycled plus calendar throughput.
    pub fn budget_used_mwh(&self) -> f64 {
        self.total_cycling_mwh() + self.total_calendar_mwh()
    }

    pub fn total_net_value_usd(&self) -> f64 {
        self.days
            .iter()
            .fold(0.0, |acc, d| acc + d.economics.net_value_usd)
    }

    /// Cash actually earned: sales minus purchases minus travel. Wear
    /// is a planning charge, not an outflow.
    pub fn total_cash_usd(&self) -> f64 {
        self.days.iter().fold(0.0, |acc, d| {
            acc + d.economics.revenue_usd - d.economics.transport_cost_usd
        })
    }
}

/// A finished multi-day run.
#[derive(Debug, Clone)]
pub struct SimulationRun {
    pub ledger: SimulationLedger,
    pub final_boundary: BoundaryState,
}

/// Solve a fixed list of days in sequence.
pub fn run_horizon(
    spec: &SystemSpec,
    day_prices: &[PriceSeries],
    boundary: &BoundaryState,
    options: &FormulationOptions,
    mode: OperatingMode,
    solver: &SolverConfig,
) -> Result<SimulationRun, SimulateError> {
    if !spec.horizon.is_calendar_day() {
        return Err(SimulateError::HorizonNotDaily);
    }
    if day_prices.is_empty() {
        return Err(SimulateError::NoDays);
    }
    let mut ledger = SimulationLedger::new(spec.degradation.calendar_throughput_mwh_per_day);
    let mut state = boundary.clone();
    for (i, prices) in day_prices.iter().enumerate() {
        let mut day_spec = spec.clone();
        day_spec.horizon.day_index = i as i64;
        let outcome = run_day(&day_spec, prices, &state, options, mode, solver)?;
        ledger.days.push(DayRecord {
            day_index: i,
            objective_usd: outcome.solution.objective,
            economics: outcome.schedule.economics,
            travel_hours: outcome.schedule.travel_hours(),
            end_energy_mwh: outcome.boundary_end.initial_energy_mwh,
            end_location: outcome.boundary_end.initial_location,
        });
        state = outcome.boundary_end;
    }
    Ok(SimulationRun {
        ledger,
        final_boundary: state,
    })
}

/// Hard ceiling on simulated days (two hundred years); hitting it means
/// the wear parameters cannot exhaust the budget.
pub const MAX_LIFETIME_DAYS: usize = 73_050;

/// Outcome of running the unit until its wear budget is spent.
#[derive(Debug, Clone)]
pub struct LifetimeResult {
    pub ledger: SimulationLedger,
    pub days_survived: usize,
    /// Cash profit per 365-day operating year, last year partial.
    pub yearly_cash_usd: Vec<f64>,
    /// Yearly cash discounted back to the first day.
    pub npv_usd: f64,
}

/// Repeat the day pattern until the wear budget is exhausted.
///
/// The budget is checked before each day: a day starts only while spent
/// throughput is still below the budget, and the day that crosses the
/// line still runs to completion.
pub fn run_lifetime(
    spec: &SystemSpec,
    day_pattern: &[PriceSeries],
    boundary: &BoundaryState,
    options: &FormulationOptions,
    mode: OperatingMode,
    solver: &SolverConfig,
) -> Result<LifetimeResult, SimulateError> {
    if !spec.horizon.is_calendar_day() {
        return Err(SimulateError::HorizonNotDaily);
    }
    if day_pattern.is_empty() {
        return Err(SimulateError::NoDays);
    }
    let budget = spec.degradation.lifetime_throughput_budget_mwh;
    let mut ledger = SimulationLedger::new(spec.degradation.calendar_throughput_mwh_per_day);
    let mut state = boundary.clone();
    let mut day = 0usize;
    while ledger.budget_used_mwh() < budget {
        if day >= MAX_LIFETIME_DAYS {
            return Err(SimulateError::LifetimeTooLong(MAX_LIFETIME_DAYS));
        }
        let prices = &day_pattern[day % day_pattern.len()];
        let mut day_spec = spec.clone();
        day_spec.horizon.day_index = day as i64;
        let outcome = run_day(&day_spec, prices, &state, options, mode, solver)?;
        ledger.days.push(DayRecord {
            day_index: day,
            objective_usd: outcome.solution.objective,
            economics: outcome.schedule.economics,
            travel_hours: outcome.schedule.travel_hours(),
            end_energy_mwh: outcome.boundary_end.initial_energy_mwh,
            end_location: outcome.boundary_end.initial_location,
        });
        state = outcome.boundary_end;
        day += 1;
    }

    let mut yearly_cash_usd = Vec::new();
    for (i, d) in ledger.days.iter().enumerate() {
        let year = i / 365;
        if year >= yearly_cash_usd.len() {
            yearly_cash_usd.push(0.0);
        }
        yearly_cash_usd[year] += d.economics.revenue_usd - d.economics.transport_cost_usd;
    }
    let npv_usd = lifetime_npv(&yearly_cash_usd, spec.degradation.annual_discount_rate);

    Ok(LifetimeResult {
        days_survived: day,
        yearly_cash_usd,
        npv_usd,
        ledger,
    })
}

/// Discount a yearly cash series to the present; the first year is
/// taken at face value.
pub fn lifetime_npv(yearly_cash_usd: &[f64], annual_discount_rate: f64) -> f64 {
    let mut npv = 0.0;
    let mut factor = 1.0;
    for &cash in yearly_cash_usd {
        npv += cash / factor;
        factor *= 1.0 + annual_discount_rate;
    }
    npv
}

/// One candidate's score in a marginal-cost sweep.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CandidateOutcome {
    pub marginal_cost_usd_per_mwh: f64,
    pub npv_usd: f64,
    pub days_survived: usize,
}

/// Result of sweeping the wear price.
#[derive(Debug, Clone, Serialize)]
pub struct CalibrationOutcome {
    pub best: CandidateOutcome,
    pub candidates: Vec<CandidateOutcome>,
}

/// Pick the wear price that maximizes lifetime value.
///
/// The marginal wear cost is a control knob, not a cash flow: a higher
/// value trades daily profit for a longer life. Each candidate is
/// scored by the net present value of its lifetime cash. Candidates are
/// tried in the order given; ties keep the earlier one, so pass an
/// ascending grid to prefer the least restrictive price.
pub fn calibrate_marginal_cost(
    spec: &SystemSpec,
    day_pattern: &[PriceSeries],
    boundary: &BoundaryState,
    options: &FormulationOptions,
    mode: OperatingMode,
    candidates: &[f64],
    solver: &SolverConfig,
) -> Result<CalibrationOutcome, SimulateError> {
    if candidates.is_empty() {
        return Err(SimulateError::NoDays);
    }
    let mut scored = Vec::with_capacity(candidates.len());
    let mut best: Option<CandidateOutcome> = None;
    for &cd in candidates {
        let mut candidate_spec = spec.clone();
        candidate_spec.degradation.marginal_cost_usd_per_mwh = cd;
        let life = run_lifetime(
            &candidate_spec,
            day_pattern,
            boundary,
            options,
            mode,
            solver,
        )?;
        let outcome = CandidateOutcome {
            marginal_cost_usd_per_mwh: cd,
            npv_usd: life.npv_usd,
            days_survived: life.days_survived,
        };
        scored.push(outcome);
        let better = match best {
            Some(b) => outcome.npv_usd > b.npv_usd,
            None => true,
        };
        if better {
            best = Some(outcome);
        }
    }
    Ok(CalibrationOutcome {
        best: best.expect("at least one candidate"),
        candidates: scored,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::PerNode;

    fn two_step_spec() -> SystemSpec {
        let mut spec = SystemSpec::default();
        spec.horizon.steps_per_day = 2;
        spec.horizon.step_hours = 12.0;
        spec.storage.efficiency = 1.0;
        spec.storage.energy_capacity_mwh = 5.0;
        spec
    }

    fn stationary_day(spec: &SystemSpec) -> PriceSeries {
        let steps = spec.horizon.steps_per_day;
        assert_eq!(steps, 2);
        PriceSeries::new(vec![0.0, 100.0], vec![0.0, 100.0]).unwrap()
    }

    #[test]
    fn stationary_day_cycles_fully() {
        let spec = two_step_spec();
        let prices = stationary_day(&spec);
        let boundary = BoundaryState::at_node(NodeSide::A, 0.0, spec.transport.travel_steps);
        let outcome = run_day(
            &spec,
            &prices,
            &boundary,
            &FormulationOptions::default(),
            OperatingMode::Stationary(NodeSide::A),
            &SolverConfig::default(),
        )
        .unwrap();
        // Charge 5 MWh at zero, sell it at 100, wear 25 per MWh cycled.
        let econ = &outcome.schedule.economics;
        assert!((econ.revenue_usd - 500.0).abs() < 1e-6);
        assert!((econ.cycling_throughput_mwh - 10.0).abs() < 1e-6);
        assert_eq!(econ.transport_cost_usd, 0.0);
        assert_eq!(outcome.boundary_end.initial_location, Location::AtNodeA);
        assert!(outcome.boundary_end.initial_energy_mwh.abs() < 1e-9);
    }

    #[test]
    fn stationary_requires_matching_start() {
        let spec = two_step_spec();
        let prices = stationary_day(&spec);
        let boundary = BoundaryState::at_node(NodeSide::B, 0.0, spec.transport.travel_steps);
        assert!(matches!(
            run_day(
                &spec,
                &prices,
                &boundary,
                &FormulationOptions::default(),
                OperatingMode::Stationary(NodeSide::A),
                &SolverConfig::default(),
            ),
            Err(SimulateError::StationaryBoundary(NodeSide::A))
        ));
    }

    #[test]
    fn advance_boundary_tracks_open_journeys() {
        let mut spec = SystemSpec::default();
        spec.transport.travel_steps = 2;
        let boundary = BoundaryState::at_node(NodeSide::A, 1.0, 2);
        let schedule = DispatchSchedule {
            steps: 3,
            step_hours: 8.0,
            discharge_mw: PerNode::new(vec![0.0; 3], vec![0.0; 3]),
            charge_mw: PerNode::new(vec![0.0; 3], vec![0.0; 3]),
            energy_mwh: vec![1.0, 1.0, 1.0],
            at_node: PerNode::new(vec![true, true, false], vec![false; 3]),
            traveling: vec![false, false, true],
            arriving: PerNode::new(vec![false; 3], vec![false; 3]),
            departing: PerNode::new(vec![false, false, true], vec![false; 3]),
            travel_start: PerNode::new(vec![false, false, true], vec![false; 3]),
            economics: ScheduleEconomics::default(),
        };
        let next = advance_boundary(&spec, &boundary, &schedule).unwrap();
        assert_eq!(
            next.initial_location,
            Location::InTransit {
                remaining_steps: 1,
                destination: NodeSide::B,
            }
        );
        assert_eq!(next.travel_history, vec![false, true]);
        assert_eq!(next.initial_energy_mwh, 1.0);
    }

    #[test]
    fn advance_boundary_full_day_travel_keeps_destination() {
        let mut spec = SystemSpec::default();
        spec.transport.travel_steps = 4;
        let boundary = BoundaryState {
            initial_energy_mwh: 2.0,
            initial_location: Location::InTransit {
                remaining_steps: 3,
                destination: NodeSide::B,
            },
            travel_history: vec![false, false, false, true],
        };
        let schedule = DispatchSchedule {
            steps: 2,
            step_hours: 12.0,
            discharge_mw: PerNode::new(vec![0.0; 2], vec![0.0; 2]),
            charge_mw: PerNode::new(vec![0.0; 2], vec![0.0; 2]),
            energy_mwh: vec![2.0, 2.0],
            at_node: PerNode::new(vec![false; 2], vec![false; 2]),
            traveling: vec![true, true],
            arriving: PerNode::new(vec![false; 2], vec![false; 2]),
            departing: PerNode::new(vec![false; 2], vec![false; 2]),
            travel_start: PerNode::new(vec![false; 2], vec![false; 2]),
            economics: ScheduleEconomics::default(),
        };
        let next = advance_boundary(&spec, &boundary, &schedule).unwrap();
        assert_eq!(
            next.initial_location,
            Location::InTransit {
                remaining_steps: 1,
                destination: NodeSide::B,
            }
        );
        assert_eq!(next.travel_history, vec![false, true, true, true]);
    }

    #[test]
    fn lifetime_runs_until_budget_crossed() {
        let mut spec = two_step_spec();
        spec.degradation.calendar_throughput_mwh_per_day = 1.478;
        spec.degradation.lifetime_throughput_budget_mwh = 16_200.0;
        let prices = stationary_day(&spec);
        let boundary = BoundaryState::at_node(NodeSide::A, 0.0, spec.transport.travel_steps);
        let life = run_lifetime(
            &spec,
            std::slice::from_ref(&prices),
            &boundary,
            &FormulationOptions::default(),
            OperatingMode::Stationary(NodeSide::A),
            &SolverConfig::default(),
        )
        .unwrap();
        // Each day burns 10 MWh cycled plus 1.478 calendar: the budget
        // covers 1411 whole days and a 1412th starts just under it.
        assert_eq!(life.days_survived, 1412);
        assert!(life.ledger.budget_used_mwh() >= 16_200.0);
        assert_eq!(life.yearly_cash_usd.len(), 1412usize.div_ceil(365));
        assert!(life.npv_usd > 0.0);
    }

    #[test]
    fn npv_discounts_later_years() {
        let npv = lifetime_npv(&[100.0, 100.0], 0.07);
        assert_eq!(npv, 193.45794392523362);
        assert_eq!(lifetime_npv(&[], 0.07), 0.0);
    }

    #[test]
    fn ledger_totals_match_day_lines() {
        let spec = two_step_spec();
        let prices = stationary_day(&spec);
        let boundary = BoundaryState::at_node(NodeSide::A, 0.0, spec.transport.travel_steps);
        let run = run_horizon(
            &spec,
            &vec![prices; 3],
            &boundary,
            &FormulationOptions::default(),
            OperatingMode::Stationary(NodeSide::A),
            &SolverConfig::default(),
        )
        .unwrap();
        let ledger = &run.ledger;
        assert_eq!(ledger.days.len(), 3);
        let cycling: f64 = ledger
            .days
            .iter()
            .fold(0.0, |a, d| a + d.economics.cycling_throughput_mwh);
        assert_eq!(ledger.total_cycling_mwh(), cycling);
        assert_eq!(
            ledger.total_calendar_mwh(),
            3.0 * spec.degradation.calendar_throughput_mwh_per_day
        );
    }

    #[test]
    fn horizon_must_cover_a_day() {
        let mut spec = two_step_spec();
        spec.horizon.step_hours = 6.0;
        let prices = PriceSeries::flat(10.0, 2);
        let boundary = BoundaryState::at_node(NodeSide::A, 0.0, spec.transport.travel_steps);
        assert!(matches!(
            run_horizon(
                &spec,
                std::slice::from_ref(&prices),
                &boundary,
                &FormulationOptions::default(),
                OperatingMode::Portable,
                &SolverConfig::default(),
            ),
            Err(SimulateError::HorizonNotDaily)
        ));
    }
}
