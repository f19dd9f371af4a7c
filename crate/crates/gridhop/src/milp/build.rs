//! Assembles the one-day scheduling problem.
//!
//! Decision variables per step: charge/discharge power at each node,
//! stored energy, and nine 0/1 indicators for where the unit is and how
//! it moves. The objective is energy sales minus purchases, minus travel
//! cost, minus wear cost on cycled energy plus the fixed daily wear
//! draw.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::core::{self, BoundaryState, NodeSide, PriceSeries, SystemSpec, ValidationReport};
use crate::milp::instance::{Column, DayMeta, MilpInstance, RelOp, VarLayout};

/// How presence and travel indicators are tied together each step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PresenceLink {
    /// The unit is always somewhere: at node A, at node B, or on the
    /// road. This is the default and what the rest of the crate assumes.
    #[default]
    SumToOne,
    /// Looser reading: the indicators may all be zero, leaving the unit
    /// "nowhere" (idle, earning and spending nothing). Kept as a switch
    /// for studying how much the tighter link matters.
    AtMostOne,
}

/// Formulation switches away from the canonical build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormulationOptions {
    #[serde(default)]
    pub presence_link: PresenceLink,
}

/// Everything that went into a built instance, kept alongside it so
/// schedules can be priced and re-checked without re-supplying inputs.
#[derive(Debug, Clone)]
pub struct DayContext {
    pub spec: SystemSpec,
    pub prices: PriceSeries,
    pub boundary: BoundaryState,
    pub options: FormulationOptions,
}

/// A built day problem: the MILP plus its context.
#[derive(Debug, Clone)]
pub struct DayInstance {
    pub milp: MilpInstance,
    pub context: DayContext,
}

impl DayInstance {
    pub fn layout(&self) -> VarLayout {
        VarLayout::new(self.context.spec.horizon.steps_per_day)
    }
}

#[derive(Debug, Error)]
pub enum BuildError {
    #[error("inputs failed validation: {0}")]
    Invalid(ValidationReport),
    #[error("price series covers {got} steps, horizon needs {expected}")]
    PriceLength { expected: usize, got: usize },
}

/// Travel indicator of a pre-horizon step. `back` is how many steps
/// before step 0 (0 = the step immediately preceding the horizon).
fn history_gamma(boundary: &BoundaryState, back: usize) -> f64 {
    let hist = &boundary.travel_history;
    if back < hist.len() && hist[hist.len() - 1 - back] {
        1.0
    } else {
        0.0
    }
}

/// Build the day MILP from validated inputs.
pub fn build_day_instance(
    spec: &SystemSpec,
    prices: &PriceSeries,
    boundary: &BoundaryState,
    options: &FormulationOptions,
) -> Result<DayInstance, BuildError> {
    let mut report = core::validate(spec);
    report.merge(core::validate_boundary(boundary, spec));
    if !report.is_empty() {
        return Err(BuildError::Invalid(report));
    }
    let steps = spec.horizon.steps_per_day;
    if prices.len() != steps {
        return Err(BuildError::PriceLength {
            expected: steps,
            got: prices.len(),
        });
    }

    let layout = VarLayout::new(steps);
    let dt = spec.horizon.step_hours;
    let eta = spec.storage.efficiency;
    let keep = 1.0 - spec.storage.self_discharge_per_step;
    let p_max = spec.storage.power_capacity_mw;
    let e_max = spec.storage.energy_capacity_mwh;
    let cd = spec.degradation.marginal_cost_usd_per_mwh;
    let travel_cost = spec.transport.travel_cost_per_step_usd;
    let t_travel = spec.transport.travel_steps;
    let q_cal = spec.degradation.calendar_throughput_for(&spec.horizon);

    let mut milp = MilpInstance::new(format!("day_{}", spec.horizon.day_index));
    milp.objective_constant = -cd * q_cal;

    // Columns, continuous block first. Power bounds stay [0, p_max];
    // the coupling rows tie them to presence.
    for h in 0..steps {
        for side in NodeSide::BOTH {
            let c = layout.col_discharge(side, h);
            debug_assert_eq!(c, milp.n_cols());
            milp.add_column(
                Column::continuous(layout.col_name(c), 0.0, p_max),
                (prices.at(side, h) - cd) * dt,
            );
        }
        for side in NodeSide::BOTH {
            let c = layout.col_charge(side, h);
            debug_assert_eq!(c, milp.n_cols());
            milp.add_column(
                Column::continuous(layout.col_name(c), 0.0, p_max),
                (-prices.at(side, h) - cd) * dt,
            );
        }
        let c = layout.col_energy(h);
        debug_assert_eq!(c, milp.n_cols());
        milp.add_column(Column::continuous(layout.col_name(c), 0.0, e_max), 0.0);
    }
    // Binary block: presence and travel are the branching variables,
    // the transition indicators are implied by them.
    for h in 0..steps {
        for side in NodeSide::BOTH {
            let c = layout.col_at_node(side, h);
            debug_assert_eq!(c, milp.n_cols());
            milp.add_column(Column::binary(layout.col_name(c), 0), 0.0);
        }
        let c = layout.col_traveling(h);
        debug_assert_eq!(c, milp.n_cols());
        milp.add_column(Column::binary(layout.col_name(c), 1), -travel_cost);
        for side in NodeSide::BOTH {
            let c = layout.col_arriving(side, h);
            debug_assert_eq!(c, milp.n_cols());
            milp.add_column(Column::implied_binary(layout.col_name(c)), 0.0);
        }
        for side in NodeSide::BOTH {
            let c = layout.col_departing(side, h);
            debug_assert_eq!(c, milp.n_cols());
            milp.add_column(Column::implied_binary(layout.col_name(c)), 0.0);
        }
        for side in NodeSide::BOTH {
            let c = layout.col_travel_start(side, h);
            debug_assert_eq!(c, milp.n_cols());
            milp.add_column(Column::implied_binary(layout.col_name(c)), 0.0);
        }
    }

    let omega0 = |side: NodeSide| -> f64 {
        if boundary.initial_location.node() == Some(side) {
            1.0
        } else {
            0.0
        }
    };
    let gamma0 = if boundary.traveled_last_step() {
        1.0
    } else {
        0.0
    };

    for h in 0..steps {
        let s = h + 1;

        // Stored energy follows last step's energy less self-discharge,
        // plus charged energy net of losses, minus discharged energy
        // grossed up for losses.
        let mut terms = vec![(layout.col_energy(h), 1.0)];
        for side in NodeSide::BOTH {
            terms.push((layout.col_discharge(side, h), dt / eta));
            terms.push((layout.col_charge(side, h), -eta * dt));
        }
        let rhs = if h == 0 {
            keep * boundary.initial_energy_mwh
        } else {
            terms.push((layout.col_energy(h - 1), -keep));
            0.0
        };
        milp.add_row(format!("EB_{s:03}"), terms, RelOp::Eq, rhs);

        // Power only flows at the occupied node.
        for side in NodeSide::BOTH {
            milp.add_row(
                format!("CD_{}_{:03}", side.label(), s),
                vec![
                    (layout.col_discharge(side, h), 1.0),
                    (layout.col_at_node(side, h), -p_max),
                ],
                RelOp::Le,
                0.0,
            );
            milp.add_row(
                format!("CC_{}_{:03}", side.label(), s),
                vec![
                    (layout.col_charge(side, h), 1.0),
                    (layout.col_at_node(side, h), -p_max),
                ],
                RelOp::Le,
                0.0,
            );
        }

        // The unit occupies exactly one state per step (or at most one
        // under the loose link).
        let presence_rel = match options.presence_link {
            PresenceLink::SumToOne => RelOp::Eq,
            PresenceLink::AtMostOne => RelOp::Le,
        };
        milp.add_row(
            format!("PR_{s:03}"),
            vec![
                (layout.col_at_node(NodeSide::A, h), 1.0),
                (layout.col_at_node(NodeSide::B, h), 1.0),
                (layout.col_traveling(h), 1.0),
            ],
            presence_rel,
            1.0,
        );

        // Arrivals and departures track presence changes.
        for side in NodeSide::BOTH {
            let mut terms = vec![
                (layout.col_arriving(side, h), 1.0),
                (layout.col_departing(side, h), -1.0),
                (layout.col_at_node(side, h), -1.0),
            ];
            let rhs = if h == 0 {
                -omega0(side)
            } else {
                terms.push((layout.col_at_node(side, h - 1), 1.0));
                0.0
            };
            milp.add_row(
                format!("TR_{}_{:03}", side.label(), s),
                terms,
                RelOp::Eq,
                rhs,
            );
        }

        // At most one arrival or departure per step.
        milp.add_row(
            format!("MV_{s:03}"),
            vec![
                (layout.col_arriving(NodeSide::A, h), 1.0),
                (layout.col_arriving(NodeSide::B, h), 1.0),
                (layout.col_departing(NodeSide::A, h), 1.0),
                (layout.col_departing(NodeSide::B, h), 1.0),
            ],
            RelOp::Le,
            1.0,
        );

        // Travel begins and ends only through the matching indicators.
        let mut terms = vec![
            (layout.col_arriving(NodeSide::A, h), 1.0),
            (layout.col_arriving(NodeSide::B, h), 1.0),
            (layout.col_travel_start(NodeSide::A, h), -1.0),
            (layout.col_travel_start(NodeSide::B, h), -1.0),
            (layout.col_traveling(h), 1.0),
        ];
        let rhs = if h == 0 {
            gamma0
        } else {
            terms.push((layout.col_traveling(h - 1), -1.0));
            0.0
        };
        milp.add_row(format!("TL_{s:03}"), terms, RelOp::Eq, rhs);

        // An arrival excludes a simultaneous travel start.
        milp.add_row(
            format!("AE_{s:03}"),
            vec![
                (layout.col_arriving(NodeSide::A, h), 1.0),
                (layout.col_arriving(NodeSide::B, h), 1.0),
                (layout.col_travel_start(NodeSide::A, h), 1.0),
                (layout.col_travel_start(NodeSide::B, h), 1.0),
            ],
            RelOp::Le,
            1.0,
        );

        // A journey keeps the travel indicator up for at least
        // `travel_steps` consecutive steps.
        let mut terms = vec![(layout.col_traveling(h), 1.0)];
        let mut rhs = 0.0;
        if h >= 1 {
            terms.push((layout.col_traveling(h - 1), -1.0));
        } else {
            rhs += gamma0;
        }
        if h >= t_travel {
            terms.push((layout.col_traveling(h - t_travel), 1.0));
        } else {
            rhs -= history_gamma(boundary, t_travel - 1 - h);
        }
        milp.add_row(format!("MT_{s:03}"), terms, RelOp::Ge, rhs);
    }

    milp.day = Some(DayMeta {
        layout,
        initial_at_node: boundary.initial_location.node(),
        initial_traveling: boundary.traveled_last_step(),
        origin_hint: match boundary.initial_location {
            core::Location::InTransit { destination, .. } => Some(destination.other()),
            _ => None,
        },
    });

    debug_assert!(milp.check_shape().is_ok());

    Ok(DayInstance {
        milp,
        context: DayContext {
            spec: spec.clone(),
            prices: prices.clone(),
            boundary: boundary.clone(),
            options: *options,
        },
    })
}
