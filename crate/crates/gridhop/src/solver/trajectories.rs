//! Exhaustive enumeration of where the unit can be at every step.
//!
//! A trajectory fixes the location sequence; everything continuous is
//! then a small LP. The enumeration walks an automaton whose state is
//! the current presence plus a sliding window of recent travel
//! indicators, which reproduces the minimum-travel-duration rule
//! exactly, boundary journeys included: arrival is possible only when
//! the window shows travel `travel_steps` steps back.

use std::collections::VecDeque;

use thiserror::Error;

use crate::core::{BoundaryState, Location, NodeSide, TransportSpec};

/// Location during one step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepLocation {
    AtNode(NodeSide),
    Traveling,
}

impl StepLocation {
    pub fn node(self) -> Option<NodeSide> {
        match self {
            StepLocation::AtNode(n) => Some(n),
            StepLocation::Traveling => None,
        }
    }
}

pub type Trajectory = Vec<StepLocation>;

#[derive(Debug, Clone, Copy)]
pub struct EnumerationLimits {
    /// Refuse to produce more trajectories than this.
    pub max_trajectories: usize,
}

impl Default for EnumerationLimits {
    fn default() -> Self {
        EnumerationLimits {
            max_trajectories: 1 << 20,
        }
    }
}

#[derive(Debug, Error)]
pub enum EnumerationError {
    #[error("boundary state unusable for enumeration: {0}")]
    BadBoundary(String),
    #[error("more than {cap} trajectories; raise the cap or shrink the horizon")]
    TooMany { cap: usize },
}

/// All feasible location sequences over `steps` steps.
///
/// Depth-first, deterministic order: at a node, staying precedes
/// departing; on the road, arriving at A precedes arriving at B
/// precedes continuing. A horizon of zero steps yields one empty
/// trajectory.
pub fn enumerate_trajectories(
    steps: usize,
    transport: &TransportSpec,
    boundary: &BoundaryState,
    limits: &EnumerationLimits,
) -> Result<Vec<Trajectory>, EnumerationError> {
    let t = transport.travel_steps;
    if t == 0 {
        return Err(EnumerationError::BadBoundary(
            "travel_steps must be at least 1".to_owned(),
        ));
    }
    if boundary.travel_history.len() != t {
        return Err(EnumerationError::BadBoundary(format!(
            "travel history covers {} steps, travel takes {}",
            boundary.travel_history.len(),
            t
        )));
    }
    let presence = match boundary.initial_location {
        Location::AtNodeA => Some(NodeSide::A),
        Location::AtNodeB => Some(NodeSide::B),
        Location::InTransit { .. } => None,
    };
    if presence.is_some() && boundary.traveled_last_step() {
        return Err(EnumerationError::BadBoundary(
            "at a node but the history claims travel".to_owned(),
        ));
    }
    if presence.is_none() && !boundary.traveled_last_step() {
        return Err(EnumerationError::BadBoundary(
            "in transit but the history shows no travel".to_owned(),
        ));
    }

    let mut window: VecDeque<bool> = boundary.travel_history.iter().copied().collect();
    let mut out = Vec::new();
    let mut path = Vec::with_capacity(steps);
    walk(
        steps,
        presence,
        &mut window,
        &mut path,
        &mut out,
        limits.max_trajectories,
    )?;
    Ok(out)
}

fn walk(
    remaining: usize,
    presence: Option<NodeSide>,
    window: &mut VecDeque<bool>,
    path: &mut Vec<StepLocation>,
    out: &mut Vec<Trajectory>,
    cap: usize,
) -> Result<(), EnumerationError> {
    if remaining == 0 {
        if out.len() >= cap {
            return Err(EnumerationError::TooMany { cap });
        }
        out.push(path.clone());
        return Ok(());
    }

    let take = |loc: StepLocation,
                window: &mut VecDeque<bool>,
                path: &mut Vec<StepLocation>,
                out: &mut Vec<Trajectory>|
     -> Result<(), EnumerationError> {
        let gamma = matches!(loc, StepLocation::Traveling);
        let popped = window.pop_front().expect("window keeps its length");
        window.push_back(gamma);
        path.push(loc);
        let next_presence = loc.node();
        let r = walk(remaining - 1, next_presence, window, path, out, cap);
        path.pop();
        window.pop_back();
        window.push_front(popped);
        r
    };

    match presence {
        Some(side) => {
            take(StepLocation::AtNode(side), window, path, out)?;
            take(StepLocation::Traveling, window, path, out)?;
        }
        None => {
            // Arrival needs the journey to have started at least
            // travel_steps ago: the window's oldest entry is the travel
            // indicator exactly that far back.
            let can_arrive = *window.front().expect("window is never empty");
            if can_arrive {
                take(StepLocation::AtNode(NodeSide::A), window, path, out)?;
                take(StepLocation::AtNode(NodeSide::B), window, path, out)?;
            }
            take(StepLocation::Traveling, window, path, out)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn transport(t: usize) -> TransportSpec {
        TransportSpec {
            travel_steps: t,
            ..TransportSpec::default()
        }
    }

    #[test]
    fn zero_steps_single_empty_trajectory() {
        let b = BoundaryState::at_node(NodeSide::A, 0.0, 1);
        let trajs =
            enumerate_trajectories(0, &transport(1), &b, &EnumerationLimits::default()).unwrap();
        assert_eq!(trajs, vec![Vec::new()]);
    }

    #[test]
    fn one_step_one_travel_step() {
        let b = BoundaryState::at_node(NodeSide::A, 0.0, 1);
        let trajs =
            enumerate_trajectories(1, &transport(1), &b, &EnumerationLimits::default()).unwrap();
        // Stay, or depart.
        assert_eq!(
            trajs,
            vec![
                vec![StepLocation::AtNode(NodeSide::A)],
                vec![StepLocation::Traveling],
            ]
        );
    }

    #[test]
    fn two_steps_two_travel_steps() {
        let b = BoundaryState::at_node(NodeSide::A, 0.0, 2);
        let trajs =
            enumerate_trajectories(2, &transport(2), &b, &EnumerationLimits::default()).unwrap();
        // Stay-stay, stay-depart, depart-continue. A departure in step
        // 1 cannot arrive in step 2 with a two-step journey.
        assert_eq!(
            trajs,
            vec![
                vec![
                    StepLocation::AtNode(NodeSide::A),
                    StepLocation::AtNode(NodeSide::A)
                ],
                vec![StepLocation::AtNode(NodeSide::A), StepLocation::Traveling],
                vec![StepLocation::Traveling, StepLocation::Traveling],
            ]
        );
    }

    #[test]
    fn arrival_opens_after_full_journey() {
        let b = BoundaryState::at_node(NodeSide::A, 0.0, 1);
        let trajs =
            enumerate_trajectories(2, &transport(1), &b, &EnumerationLimits::default()).unwrap();
        // After one travel step the unit may arrive at either node or
        // keep going; staying put branches independently.
        assert_eq!(trajs.len(), 2 + 3);
        assert!(trajs.contains(&vec![
            StepLocation::Traveling,
            StepLocation::AtNode(NodeSide::B)
        ]));
        // Turning around back to A is allowed too.
        assert!(trajs.contains(&vec![
            StepLocation::Traveling,
            StepLocation::AtNode(NodeSide::A)
        ]));
    }

    #[test]
    fn boundary_journey_must_finish_first() {
        let b = BoundaryState {
            initial_energy_mwh: 0.0,
            initial_location: Location::InTransit {
                remaining_steps: 1,
                destination: NodeSide::B,
            },
            travel_history: vec![false, true],
        };
        let trajs =
            enumerate_trajectories(2, &transport(2), &b, &EnumerationLimits::default()).unwrap();
        // Step 1 is forced travel; step 2 may arrive (A or B) or not.
        assert_eq!(
            trajs,
            vec![
                vec![StepLocation::Traveling, StepLocation::AtNode(NodeSide::A)],
                vec![StepLocation::Traveling, StepLocation::AtNode(NodeSide::B)],
                vec![StepLocation::Traveling, StepLocation::Traveling],
            ]
        );
    }

    #[test]
    fn cap_is_enforced() {
        let b = BoundaryState::at_node(NodeSide::A, 0.0, 1);
        let limits = EnumerationLimits {
            max_trajectories: 4,
        };
        assert!(matches!(
            enumerate_trajectories(6, &transport(1), &b, &limits),
            Err(EnumerationError::TooMany { cap: 4 })
        ));
    }

    #[test]
    fn counts_grow_with_horizon() {
        let b = BoundaryState::at_node(NodeSide::A, 0.0, 1);
        let mut last = 0;
        for steps in 1..=6 {
            let n = enumerate_trajectories(steps, &transport(1), &b, &EnumerationLimits::default())
                .unwrap()
                .len();
            assert!(n > last);
            last = n;
        }
    }
}
