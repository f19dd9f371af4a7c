//! Shared randomized instance suite for the integration tests.
//!
//! Instances are generated from fixed seeds and solved once; the
//! results are cached behind a `LazyLock` so every criterion reads the
//! same solutions instead of re-solving.

use std::sync::LazyLock;
use std::time::Instant;

use gridhop::core::{
    BoundaryState, DegradationParams, HorizonConfig, Location, NodeSide, PriceSeries, StorageSpec,
    SystemSpec, TransportSpec,
};
use gridhop::milp::{build_day_instance, DayInstance, FormulationOptions};
use gridhop::solver::{
    oracle_solve, solve_lp, solve_milp, LpSolution, MilpSolution, OracleConfig, SolverConfig,
};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const SUITE_SIZE: usize = 120;
const SEED_BASE: u64 = 0x5EED_2024;

pub struct SolvedInstance {
    pub seed: u64,
    pub day: DayInstance,
    pub milp: MilpSolution,
    pub relaxation: LpSolution,
    pub oracle: MilpSolution,
}

pub struct Suite {
    pub instances: Vec<SolvedInstance>,
    /// Wall time spent generating and solving everything, seconds.
    pub build_seconds: f64,
}

pub static SUITE: LazyLock<Suite> = LazyLock::new(|| {
    let started = Instant::now();
    let instances = (0..SUITE_SIZE as u64)
        .map(|i| solve_one(SEED_BASE + i))
        .collect();
    Suite {
        instances,
        build_seconds: started.elapsed().as_secs_f64(),
    }
});

fn solve_one(seed: u64) -> SolvedInstance {
    let day = random_day(seed);
    let milp = solve_milp(&day.milp, &SolverConfig::default())
        .unwrap_or_else(|e| panic!("instance {seed} did not solve: {e}"));
    let relaxation =
        solve_lp(&day.milp).unwrap_or_else(|e| panic!("instance {seed} relaxation failed: {e}"));
    let oracle = oracle_solve(&day, &OracleConfig::default())
        .unwrap_or_else(|e| panic!("instance {seed} oracle failed: {e}"));
    SolvedInstance {
        seed,
        day,
        milp,
        relaxation,
        oracle,
    }
}

/// A small random day: up to 8 steps, one or two travel steps, prices
/// uniform on [-20, 120] USD/MWh, and a random but valid start state.
pub fn random_day(seed: u64) -> DayInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let steps = rng.gen_range(2..=8);
    let travel_steps = rng.gen_range(1..=2usize);
    let step_hours = [0.25, 0.5, 1.0][rng.gen_range(0..3)];

    let spec = SystemSpec {
        horizon: HorizonConfig {
            step_hours,
            steps_per_day: steps,
            day_index: 0,
        },
        storage: StorageSpec {
            power_capacity_mw: 0.5 + rng.gen::<f64>() * 4.5,
            energy_capacity_mwh: 0.5 + rng.gen::<f64>() * 7.5,
            efficiency: 0.85 + rng.gen::<f64>() * 0.15,
            self_discharge_per_step: if rng.gen_bool(0.3) {
                rng.gen::<f64>() * 0.05
            } else {
                0.0
            },
        },
        transport: TransportSpec {
            node_a_id: "NODE_A".to_owned(),
            node_b_id: "NODE_B".to_owned(),
            travel_steps,
            travel_cost_per_step_usd: rng.gen::<f64>() * 10.0,
        },
        degradation: DegradationParams {
            marginal_cost_usd_per_mwh: rng.gen::<f64>() * 30.0,
            calendar_throughput_mwh_per_day: rng.gen::<f64>() * 3.0,
            lifetime_throughput_budget_mwh: 16_200.0,
            annual_discount_rate: 0.07,
        },
    };

    let price = |rng: &mut ChaCha8Rng| -20.0 + rng.gen::<f64>() * 140.0;
    let node_a: Vec<f64> = (0..steps).map(|_| price(&mut rng)).collect();
    let node_b: Vec<f64> = (0..steps).map(|_| price(&mut rng)).collect();
    let prices = PriceSeries::new(node_a, node_b).expect("equal lengths");

    let energy = rng.gen::<f64>() * spec.storage.energy_capacity_mwh;
    let side = if rng.gen_bool(0.5) {
        NodeSide::A
    } else {
        NodeSide::B
    };
    let boundary = match rng.gen_range(0..4) {
        // Parked with a quiet recent past.
        0 | 1 => BoundaryState::at_node(side, energy, travel_steps),
        // Parked, with the tail of an earlier journey still in view.
        2 if travel_steps == 2 => BoundaryState {
            initial_energy_mwh: energy,
            initial_location: Location::at(side),
            travel_history: vec![true, false],
        },
        // Mid-journey at the day break.
        3 if travel_steps == 2 => BoundaryState {
            initial_energy_mwh: energy,
            initial_location: Location::InTransit {
                remaining_steps: 1,
                destination: side,
            },
            travel_history: vec![false, true],
        },
        _ => BoundaryState::at_node(side, energy, travel_steps),
    };

    let options = FormulationOptions::default();
    build_day_instance(&spec, &prices, &boundary, &options)
        .unwrap_or_else(|e| panic!("instance {seed} did not build: {e}"))
}
