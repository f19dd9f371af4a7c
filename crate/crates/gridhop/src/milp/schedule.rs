//! From solution vectors to schedules and back to constraint checks.
//!
//! `extract_schedule` turns a solved day instance into typed per-step
//! data with the money worked out. `check_feasibility` re-derives every
//! constraint from the parameters, without looking at the MILP rows, so
//! it can double-check both the builder and the solver.

use thiserror::Error;

use crate::core::{BoundaryState, NodeSide, PerNode, SystemSpec};
use crate::milp::build::{DayInstance, FormulationOptions, PresenceLink};
use crate::milp::instance::DayMeta;

/// Accept a binary as integral when it is this close to 0 or 1.
pub const INTEGRALITY_TOL: f64 = 1e-6;

/// Money and throughput totals of one day, derived from the schedule
/// and the prices it was built against.
#[derive(Debug, Clone, Copy, PartialEq, Default, serde::Serialize)]
pub struct ScheduleEconomics {
    /// Energy sales minus purchases across both nodes.
    pub revenue_usd: f64,
    pub transport_cost_usd: f64,
    /// Wear charge on cycled energy plus the fixed daily draw.
    pub degradation_cost_usd: f64,
    pub net_value_usd: f64,
    /// MWh of charge plus discharge throughput.
    pub cycling_throughput_mwh: f64,
    /// Fixed wear draw booked for this horizon.
    pub calendar_throughput_mwh: f64,
}

/// A fully expanded day plan.
#[derive(Debug, Clone, PartialEq)]
pub struct DispatchSchedule {
    pub steps: usize,
    pub step_hours: f64,
    pub discharge_mw: PerNode<Vec<f64>>,
    pub charge_mw: PerNode<Vec<f64>>,
    /// Stored energy at the end of each step.
    pub energy_mwh: Vec<f64>,
    pub at_node: PerNode<Vec<bool>>,
    pub traveling: Vec<bool>,
    pub arriving: PerNode<Vec<bool>>,
    pub departing: PerNode<Vec<bool>>,
    pub travel_start: PerNode<Vec<bool>>,
    pub economics: ScheduleEconomics,
}

impl DispatchSchedule {
    /// Recompute cycled energy from the power columns.
    pub fn cycling_throughput_mwh(&self) -> f64 {
        let mut total = 0.0;
        for h in 0..self.steps {
            for side in NodeSide::BOTH {
                total += (self.discharge_mw[side][h] + self.charge_mw[side][h]) * self.step_hours;
            }
        }
        total
    }

    pub fn travel_step_count(&self) -> usize {
        self.traveling.iter().filter(|&&g| g).count()
    }

    pub fn travel_hours(&self) -> f64 {
        self.travel_step_count() as f64 * self.step_hours
    }

    /// Number of journeys that begin within the day.
    pub fn departure_count(&self) -> usize {
        (0..self.steps)
            .filter(|&h| NodeSide::BOTH.iter().any(|&n| self.travel_start[n][h]))
            .count()
    }

    /// Node occupied at a step, if any.
    pub fn node_at(&self, step: usize) -> Option<NodeSide> {
        NodeSide::BOTH.into_iter().find(|&n| self.at_node[n][step])
    }
}

#[derive(Debug, Error)]
pub enum ExtractError {
    #[error("solution has {got} values, layout needs {expected}")]
    WrongLength { expected: usize, got: usize },
    #[error("column {name} = {value} is not integral within {tol}")]
    FractionalBinary { name: String, value: f64, tol: f64 },
    #[error("transit indicators cannot be completed at step {step}: {detail}")]
    InconsistentTransit { step: usize, detail: String },
    #[error("instance carries no day layout")]
    NotADayInstance,
}

/// Implied transit indicators derived from presence and travel.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitIndicators {
    pub arriving: PerNode<Vec<bool>>,
    pub departing: PerNode<Vec<bool>>,
    pub travel_start: PerNode<Vec<bool>>,
}

/// Derive arrivals, departures and travel starts from integral presence
/// and travel sequences.
///
/// The transition rows leave one degree of freedom: which node a
/// departing journey is booked against. The canonical choice is the
/// node just vacated; for journeys already underway at the boundary the
/// caller supplies `origin_hint`.
pub fn transit_indicators(
    initial_at_node: Option<NodeSide>,
    initial_traveling: bool,
    origin_hint: Option<NodeSide>,
    at_node: &PerNode<Vec<bool>>,
    traveling: &[bool],
) -> Result<TransitIndicators, ExtractError> {
    let steps = traveling.len();
    let mut out = TransitIndicators {
        arriving: PerNode::new(vec![false; steps], vec![false; steps]),
        departing: PerNode::new(vec![false; steps], vec![false; steps]),
        travel_start: PerNode::new(vec![false; steps], vec![false; steps]),
    };

    let mut prev_at = PerNode::new(
        initial_at_node == Some(NodeSide::A),
        initial_at_node == Some(NodeSide::B),
    );
    let mut prev_travel = initial_traveling;
    let mut last_present = initial_at_node.or(origin_hint);

    for h in 0..steps {
        let mut arrivals = 0i32;
        let mut departed: Option<NodeSide> = None;
        for side in NodeSide::BOTH {
            let now = at_node[side][h];
            let before = prev_at[side];
            if now && !before {
                out.arriving[side][h] = true;
                arrivals += 1;
            }
            if before && !now {
                out.departing[side][h] = true;
                departed = Some(side);
            }
        }

        // The travel-start count balances arrivals against the change
        // in the travel indicator.
        let d_gamma = i32::from(prev_travel) - i32::from(traveling[h]);
        let starts = arrivals - d_gamma;
        match starts {
            0 => {}
            1 => {
                let origin =
                    departed
                        .or(last_present)
                        .ok_or_else(|| ExtractError::InconsistentTransit {
                            step: h + 1,
                            detail: "journey starts with no known origin".to_owned(),
                        })?;
                out.travel_start[origin][h] = true;
            }
            other => {
                return Err(ExtractError::InconsistentTransit {
                    step: h + 1,
                    detail: format!("travel-start balance came out as {other}"),
                });
            }
        }

        for side in NodeSide::BOTH {
            prev_at[side] = at_node[side][h];
            if at_node[side][h] {
                last_present = Some(side);
            }
        }
        prev_travel = traveling[h];
    }

    Ok(out)
}

/// Same derivation, but reading from and writing into a raw solution
/// vector laid out per `meta.layout`. Presence and travel entries must
/// already be integral; the implied indicator entries are overwritten.
pub fn complete_transit_indicators(meta: &DayMeta, x: &mut [f64]) -> Result<(), ExtractError> {
    let l = meta.layout;
    if x.len() != l.n_cols() {
        return Err(ExtractError::WrongLength {
            expected: l.n_cols(),
            got: x.len(),
        });
    }
    let steps = l.steps;
    let mut at_node = PerNode::new(vec![false; steps], vec![false; steps]);
    let mut traveling = vec![false; steps];
    for h in 0..steps {
        for side in NodeSide::BOTH {
            at_node[side][h] = x[l.col_at_node(side, h)] > 0.5;
        }
        traveling[h] = x[l.col_traveling(h)] > 0.5;
    }
    let ind = transit_indicators(
        meta.initial_at_node,
        meta.initial_traveling,
        meta.origin_hint,
        &at_node,
        &traveling,
    )?;
    for h in 0..steps {
        for side in NodeSide::BOTH {
            x[l.col_arriving(side, h)] = f64::from(u8::from(ind.arriving[side][h]));
            x[l.col_departing(side, h)] = f64::from(u8::from(ind.departing[side][h]));
            x[l.col_travel_start(side, h)] = f64::from(u8::from(ind.travel_start[side][h]));
        }
    }
    Ok(())
}

fn to_bool(name: &str, value: f64) -> Result<bool, ExtractError> {
    let rounded = value.round();
    if (value - rounded).abs() > INTEGRALITY_TOL || !(rounded == 0.0 || rounded == 1.0) {
        return Err(ExtractError::FractionalBinary {
            name: name.to_owned(),
            value,
            tol: INTEGRALITY_TOL,
        });
    }
    Ok(rounded == 1.0)
}

/// Expand a solution vector of a built day instance into a typed
/// schedule, recomputing the economics from the context prices.
pub fn extract_schedule(day: &DayInstance, x: &[f64]) -> Result<DispatchSchedule, ExtractError> {
    let meta = day.milp.day.as_ref().ok_or(ExtractError::NotADayInstance)?;
    let l = meta.layout;
    if x.len() != l.n_cols() {
        return Err(ExtractError::WrongLength {
            expected: l.n_cols(),
            got: x.len(),
        });
    }
    let steps = l.steps;
    let spec = &day.context.spec;
    let dt = spec.horizon.step_hours;

    let mut schedule = DispatchSchedule {
        steps,
        step_hours: dt,
        discharge_mw: PerNode::new(vec![0.0; steps], vec![0.0; steps]),
        charge_mw: PerNode::new(vec![0.0; steps], vec![0.0; steps]),
        energy_mwh: vec![0.0; steps],
        at_node: PerNode::new(vec![false; steps], vec![false; steps]),
        traveling: vec![false; steps],
        arriving: PerNode::new(vec![false; steps], vec![false; steps]),
        departing: PerNode::new(vec![false; steps], vec![false; steps]),
        travel_start: PerNode::new(vec![false; steps], vec![false; steps]),
        economics: ScheduleEconomics::default(),
    };

    for h in 0..steps {
        for side in NodeSide::BOTH {
            schedule.discharge_mw[side][h] = x[l.col_discharge(side, h)];
            schedule.charge_mw[side][h] = x[l.col_charge(side, h)];
            schedule.at_node[side][h] = to_bool(
                &l.col_name(l.col_at_node(side, h)),
                x[l.col_at_node(side, h)],
            )?;
            schedule.arriving[side][h] = to_bool(
                &l.col_name(l.col_arriving(side, h)),
                x[l.col_arriving(side, h)],
            )?;
            schedule.departing[side][h] = to_bool(
                &l.col_name(l.col_departing(side, h)),
                x[l.col_departing(side, h)],
            )?;
            schedule.travel_start[side][h] = to_bool(
                &l.col_name(l.col_travel_start(side, h)),
                x[l.col_travel_start(side, h)],
            )?;
        }
        schedule.energy_mwh[h] = x[l.col_energy(h)];
        schedule.traveling[h] = to_bool(&l.col_name(l.col_traveling(h)), x[l.col_traveling(h)])?;
    }

    schedule.economics = price_schedule(&schedule, day);
    Ok(schedule)
}

/// Work out the money for a schedule against a day's prices and specs.
pub fn price_schedule(schedule: &DispatchSchedule, day: &DayInstance) -> ScheduleEconomics {
    let spec = &day.context.spec;
    let prices = &day.context.prices;
    let dt = spec.horizon.step_hours;
    let cd = spec.degradation.marginal_cost_usd_per_mwh;
    let q_cal = spec.degradation.calendar_throughput_for(&spec.horizon);

    let mut revenue = 0.0;
    for h in 0..schedule.steps {
        for side in NodeSide::BOTH {
            revenue += prices.at(side, h)
                * (schedule.discharge_mw[side][h] - schedule.charge_mw[side][h])
                * dt;
        }
    }
    let transport = spec.transport.travel_cost_per_step_usd * schedule.travel_step_count() as f64;
    let cycling = schedule.cycling_throughput_mwh();
    let degradation = cd * (cycling + q_cal);
    ScheduleEconomics {
        revenue_usd: revenue,
        transport_cost_usd: transport,
        degradation_cost_usd: degradation,
        net_value_usd: revenue - transport - degradation,
        cycling_throughput_mwh: cycling,
        calendar_throughput_mwh: q_cal,
    }
}

/// Which rule a schedule broke.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintKind {
    /// Stored energy must follow the charge/discharge balance.
    EnergyBalance,
    /// Stored energy must stay within [0, capacity].
    EnergyCapacity,
    /// Power must stay within [0, rating].
    PowerBounds,
    /// Power may flow only at the occupied node.
    LocationCoupling,
    /// The unit holds exactly one (or at most one) state per step.
    Presence,
    /// Arrival/departure indicators must track presence changes.
    Transition,
    /// At most one arrival or departure per step.
    MoveExclusivity,
    /// Travel starts and arrivals must balance the travel indicator.
    TravelLink,
    /// An arrival excludes a simultaneous travel start.
    ArrivalExclusivity,
    /// Journeys must keep traveling for the full travel duration.
    MinTravelDuration,
    /// The schedule's shape does not match the parameters.
    Structure,
}

impl std::fmt::Display for ConstraintKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ConstraintKind::EnergyBalance => "stored-energy balance",
            ConstraintKind::EnergyCapacity => "stored-energy capacity",
            ConstraintKind::PowerBounds => "power rating",
            ConstraintKind::LocationCoupling => "dispatch only at the occupied node",
            ConstraintKind::Presence => "single presence state",
            ConstraintKind::Transition => "presence transition tracking",
            ConstraintKind::MoveExclusivity => "one move per step",
            ConstraintKind::TravelLink => "travel indicator linkage",
            ConstraintKind::ArrivalExclusivity => "arrival excludes travel start",
            ConstraintKind::MinTravelDuration => "minimum travel duration",
            ConstraintKind::Structure => "schedule shape",
        };
        f.write_str(s)
    }
}

/// One broken rule, with the step (1-based, 0 for horizon-level), the
/// node involved if any, and how far off the schedule is.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintViolation {
    pub kind: ConstraintKind,
    pub step: usize,
    pub node: Option<NodeSide>,
    pub amount: f64,
}

impl std::fmt::Display for ConstraintViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.kind)?;
        if self.step > 0 {
            write!(f, " at step {}", self.step)?;
        }
        if let Some(n) = self.node {
            write!(f, " (node {n})")?;
        }
        write!(f, ", off by {:.3e}", self.amount)
    }
}

/// Re-check a schedule against every operating rule from scratch.
///
/// This never consults the MILP rows; it recomputes each condition from
/// the parameters so builder and solver bugs cannot hide each other.
/// Returns all violations beyond `tol`.
pub fn check_feasibility(
    schedule: &DispatchSchedule,
    spec: &SystemSpec,
    boundary: &BoundaryState,
    options: &FormulationOptions,
    tol: f64,
) -> Vec<ConstraintViolation> {
    let mut out = Vec::new();
    let steps = schedule.steps;
    let t_travel = spec.transport.travel_steps;

    let shape_ok = schedule.energy_mwh.len() == steps
        && schedule.traveling.len() == steps
        && NodeSide::BOTH.iter().all(|&n| {
            schedule.discharge_mw[n].len() == steps
                && schedule.charge_mw[n].len() == steps
                && schedule.at_node[n].len() == steps
                && schedule.arriving[n].len() == steps
                && schedule.departing[n].len() == steps
                && schedule.travel_start[n].len() == steps
        });
    if !shape_ok || boundary.travel_history.len() != t_travel {
        out.push(ConstraintViolation {
            kind: ConstraintKind::Structure,
            step: 0,
            node: None,
            amount: 0.0,
        });
        return out;
    }
    if (schedule.step_hours - spec.horizon.step_hours).abs() > 1e-12
        || steps != spec.horizon.steps_per_day
    {
        out.push(ConstraintViolation {
            kind: ConstraintKind::Structure,
            step: 0,
            node: None,
            amount: (schedule.step_hours - spec.horizon.step_hours).abs(),
        });
        return out;
    }

    let dt = spec.horizon.step_hours;
    let eta = spec.storage.efficiency;
    let keep = 1.0 - spec.storage.self_discharge_per_step;
    let p_max = spec.storage.power_capacity_mw;
    let e_max = spec.storage.energy_capacity_mwh;

    let b = |v: bool| -> f64 {
        if v {
            1.0
        } else {
            0.0
        }
    };
    // Travel indicator for any step index, reaching into the boundary
    // history for non-positive ones.
    let gamma = |h: i64| -> f64 {
        if h >= 1 {
            b(schedule.traveling[(h - 1) as usize])
        } else {
            let back = (-h) as usize;
            let hist = &boundary.travel_history;
            if back < hist.len() {
                b(hist[hist.len() - 1 - back])
            } else {
                0.0
            }
        }
    };
    let omega = |side: NodeSide, h: i64| -> f64 {
        if h >= 1 {
            b(schedule.at_node[side][(h - 1) as usize])
        } else if h == 0 {
            b(boundary.initial_location.node() == Some(side))
        } else {
            0.0
        }
    };

    for h in 0..steps {
        let s = h + 1;
        let si = s as i64;

        let prev_e = if h == 0 {
            boundary.initial_energy_mwh
        } else {
            schedule.energy_mwh[h - 1]
        };
        let mut flow = 0.0;
        for side in NodeSide::BOTH {
            flow +=
                eta * schedule.charge_mw[side][h] * dt - schedule.discharge_mw[side][h] * dt / eta;
        }
        let residual = schedule.energy_mwh[h] - (keep * prev_e + flow);
        if residual.abs() > tol {
            out.push(ConstraintViolation {
                kind: ConstraintKind::EnergyBalance,
                step: s,
                node: None,
                amount: residual.abs(),
            });
        }

        let e = schedule.energy_mwh[h];
        let e_excess = (-e).max(e - e_max);
        if e_excess > tol {
            out.push(ConstraintViolation {
                kind: ConstraintKind::EnergyCapacity,
                step: s,
                node: None,
                amount: e_excess,
            });
        }

        for side in NodeSide::BOTH {
            for p in [schedule.discharge_mw[side][h], schedule.charge_mw[side][h]] {
                let p_excess = (-p).max(p - p_max);
                if p_excess > tol {
                    out.push(ConstraintViolation {
                        kind: ConstraintKind::PowerBounds,
                        step: s,
                        node: Some(side),
                        amount: p_excess,
                    });
                }
            }
            let cap = p_max * omega(side, si);
            let coupled =
                (schedule.discharge_mw[side][h] - cap).max(schedule.charge_mw[side][h] - cap);
            if coupled > tol {
                out.push(ConstraintViolation {
                    kind: ConstraintKind::LocationCoupling,
                    step: s,
                    node: Some(side),
                    amount: coupled,
                });
            }
        }

        let presence_sum = omega(NodeSide::A, si) + omega(NodeSide::B, si) + gamma(si);
        let presence_off = match options.presence_link {
            PresenceLink::SumToOne => (presence_sum - 1.0).abs(),
            PresenceLink::AtMostOne => (presence_sum - 1.0).max(0.0),
        };
        if presence_off > tol {
            out.push(ConstraintViolation {
                kind: ConstraintKind::Presence,
                step: s,
                node: None,
                amount: presence_off,
            });
        }

        let mut moves = 0.0;
        for side in NodeSide::BOTH {
            let delta = omega(side, si) - omega(side, si - 1);
            let tracked = b(schedule.arriving[side][h]) - b(schedule.departing[side][h]);
            if (tracked - delta).abs() > tol {
                out.push(ConstraintViolation {
                    kind: ConstraintKind::Transition,
                    step: s,
                    node: Some(side),
                    amount: (tracked - delta).abs(),
                });
            }
            moves += b(schedule.arriving[side][h]) + b(schedule.departing[side][h]);
        }
        if moves - 1.0 > tol {
            out.push(ConstraintViolation {
                kind: ConstraintKind::MoveExclusivity,
                step: s,
                node: None,
                amount: moves - 1.0,
            });
        }

        let mut arrivals = 0.0;
        let mut starts = 0.0;
        for side in NodeSide::BOTH {
            arrivals += b(schedule.arriving[side][h]);
            starts += b(schedule.travel_start[side][h]);
        }
        let link = (arrivals - starts) - (gamma(si - 1) - gamma(si));
        if link.abs() > tol {
            out.push(ConstraintViolation {
                kind: ConstraintKind::TravelLink,
                step: s,
                node: None,
                amount: link.abs(),
            });
        }
        if arrivals + starts - 1.0 > tol {
            out.push(ConstraintViolation {
                kind: ConstraintKind::ArrivalExclusivity,
                step: s,
                node: None,
                amount: arrivals + starts - 1.0,
            });
        }

        let short = gamma(si - 1) - gamma(si - t_travel as i64) - gamma(si);
        if short > tol {
            out.push(ConstraintViolation {
                kind: ConstraintKind::MinTravelDuration,
                step: s,
                node: None,
                amount: short,
            });
        }
    }

    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::{HorizonConfig, PriceSeries, SystemSpec};
    use crate::milp::build::{build_day_instance, FormulationOptions};

    fn spec_with(steps: usize, step_hours: f64) -> SystemSpec {
        SystemSpec {
            horizon: HorizonConfig {
                step_hours,
                steps_per_day: steps,
                day_index: 0,
            },
            ..SystemSpec::default()
        }
    }

    fn parked_day(
        spec: &SystemSpec,
        prices: PriceSeries,
        side: NodeSide,
        energy: f64,
    ) -> (DayInstance, Vec<f64>) {
        let boundary = BoundaryState::at_node(side, energy, spec.transport.travel_steps);
        let day =
            build_day_instance(spec, &prices, &boundary, &FormulationOptions::default()).unwrap();
        let l = day.layout();
        let mut x = vec![0.0; day.milp.n_cols()];
        for h in 0..spec.horizon.steps_per_day {
            x[l.col_at_node(side, h)] = 1.0;
            x[l.col_energy(h)] = energy;
        }
        (day, x)
    }

    #[test]
    fn idle_day_books_only_fixed_wear() {
        // Four 6-hour steps, parked, full battery held: the only money
        // is the wear draw 25 * 1.5 = 37.5.
        let spec = spec_with(4, 6.0);
        let (day, x) = parked_day(&spec, PriceSeries::flat(40.0, 4), NodeSide::A, 2.7);
        let schedule = extract_schedule(&day, &x).unwrap();
        assert_eq!(schedule.economics.revenue_usd, 0.0);
        assert_eq!(schedule.economics.transport_cost_usd, 0.0);
        assert_eq!(schedule.economics.degradation_cost_usd, 37.5);
        assert_eq!(schedule.economics.net_value_usd, -37.5);
        let v = check_feasibility(
            &schedule,
            &spec,
            &day.context.boundary,
            &day.context.options,
            1e-9,
        );
        assert!(v.is_empty(), "unexpected violations: {v:?}");
    }

    #[test]
    fn wear_cost_scales_with_throughput() {
        // 10 MWh cycled on top of the 1.5 MWh daily draw at 25 USD/MWh
        // costs 287.5. Three 8-hour steps keep every number exact.
        let mut spec = spec_with(3, 8.0);
        spec.storage.power_capacity_mw = 5.0;
        spec.storage.energy_capacity_mwh = 10.0;
        spec.storage.efficiency = 1.0;
        let prices = PriceSeries::flat(0.0, 3);
        let boundary = BoundaryState::at_node(NodeSide::A, 0.0, 1);
        let day =
            build_day_instance(&spec, &prices, &boundary, &FormulationOptions::default()).unwrap();
        let l = day.layout();
        let mut x = vec![0.0; day.milp.n_cols()];
        for h in 0..3 {
            x[l.col_at_node(NodeSide::A, h)] = 1.0;
        }
        x[l.col_charge(NodeSide::A, 0)] = 0.625;
        x[l.col_energy(0)] = 5.0;
        x[l.col_discharge(NodeSide::A, 1)] = 0.625;
        let schedule = extract_schedule(&day, &x).unwrap();
        assert_eq!(schedule.economics.cycling_throughput_mwh, 10.0);
        assert_eq!(schedule.economics.calendar_throughput_mwh, 1.5);
        assert_eq!(schedule.economics.degradation_cost_usd, 287.5);
        let v = check_feasibility(
            &schedule,
            &spec,
            &boundary,
            &FormulationOptions::default(),
            1e-9,
        );
        assert!(v.is_empty(), "unexpected violations: {v:?}");
    }

    #[test]
    fn double_presence_is_flagged() {
        let spec = spec_with(2, 0.25);
        let (day, x) = parked_day(&spec, PriceSeries::flat(0.0, 2), NodeSide::A, 0.0);
        let mut schedule = extract_schedule(&day, &x).unwrap();
        schedule.at_node[NodeSide::B][1] = true;
        let v = check_feasibility(
            &schedule,
            &spec,
            &day.context.boundary,
            &day.context.options,
            1e-7,
        );
        assert!(v
            .iter()
            .any(|c| c.kind == ConstraintKind::Presence && c.step == 2));
        // The presence change also breaks transition tracking.
        assert!(v.iter().any(|c| c.kind == ConstraintKind::Transition));
    }

    #[test]
    fn dispatch_away_from_unit_is_flagged() {
        let spec = spec_with(2, 0.25);
        let (day, x) = parked_day(&spec, PriceSeries::flat(0.0, 2), NodeSide::A, 0.0);
        let mut schedule = extract_schedule(&day, &x).unwrap();
        schedule.charge_mw[NodeSide::B][0] = 2.7;
        let v = check_feasibility(
            &schedule,
            &spec,
            &day.context.boundary,
            &day.context.options,
            1e-7,
        );
        assert!(v.iter().any(|c| c.kind == ConstraintKind::LocationCoupling
            && c.step == 1
            && c.node == Some(NodeSide::B)));
        // Moving energy in also breaks the balance.
        assert!(v.iter().any(|c| c.kind == ConstraintKind::EnergyBalance));
    }

    #[test]
    fn short_journey_is_flagged() {
        let mut spec = spec_with(4, 0.25);
        spec.transport.travel_steps = 2;
        let prices = PriceSeries::flat(0.0, 4);
        let boundary = BoundaryState::at_node(NodeSide::A, 0.0, 2);
        let day =
            build_day_instance(&spec, &prices, &boundary, &FormulationOptions::default()).unwrap();
        let l = day.layout();
        let mut x = vec![0.0; day.milp.n_cols()];
        // Depart at step 2, arrive already at step 3: one step short.
        x[l.col_at_node(NodeSide::A, 0)] = 1.0;
        x[l.col_traveling(1)] = 1.0;
        x[l.col_at_node(NodeSide::B, 2)] = 1.0;
        x[l.col_at_node(NodeSide::B, 3)] = 1.0;
        x[l.col_departing(NodeSide::A, 1)] = 1.0;
        x[l.col_travel_start(NodeSide::A, 1)] = 1.0;
        x[l.col_arriving(NodeSide::B, 2)] = 1.0;
        let schedule = extract_schedule(&day, &x).unwrap();
        let v = check_feasibility(
            &schedule,
            &spec,
            &boundary,
            &FormulationOptions::default(),
            1e-7,
        );
        assert!(v
            .iter()
            .any(|c| c.kind == ConstraintKind::MinTravelDuration && c.step == 3));
    }

    #[test]
    fn fractional_binary_rejected() {
        let spec = spec_with(1, 0.25);
        let (day, mut x) = parked_day(&spec, PriceSeries::flat(0.0, 1), NodeSide::A, 0.0);
        let l = day.layout();
        x[l.col_at_node(NodeSide::A, 0)] = 0.4;
        assert!(matches!(
            extract_schedule(&day, &x),
            Err(ExtractError::FractionalBinary { .. })
        ));
    }

    #[test]
    fn indicators_reconstructed_for_a_round_trip() {
        // A: stay, depart, travel, arrive B, stay.
        let at_node = PerNode::new(
            vec![true, false, false, false, false],
            vec![false, false, false, true, true],
        );
        let traveling = vec![false, true, true, false, false];
        let ind = transit_indicators(Some(NodeSide::A), false, None, &at_node, &traveling).unwrap();
        assert!(ind.departing[NodeSide::A][1]);
        assert!(ind.travel_start[NodeSide::A][1]);
        assert!(ind.arriving[NodeSide::B][3]);
        assert!(!ind.travel_start[NodeSide::B].iter().any(|&v| v));
        let total: usize = NodeSide::BOTH
            .iter()
            .map(|&n| {
                ind.arriving[n].iter().filter(|&&v| v).count()
                    + ind.departing[n].iter().filter(|&&v| v).count()
                    + ind.travel_start[n].iter().filter(|&&v| v).count()
            })
            .sum();
        assert_eq!(total, 3);
    }

    #[test]
    fn indicators_for_boundary_arrival() {
        // Already on the road toward B; arrives at step 1.
        let at_node = PerNode::new(vec![false, false], vec![true, true]);
        let traveling = vec![false, false];
        let ind = transit_indicators(None, true, Some(NodeSide::A), &at_node, &traveling).unwrap();
        assert!(ind.arriving[NodeSide::B][0]);
        assert!(!ind.travel_start[NodeSide::A][0]);
    }
}
