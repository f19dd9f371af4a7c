//! Typed JSON report documents.
//!
//! Reports are plain serde structs with a `schema_version` field so
//! downstream readers can detect shape changes. Serialization order is
//! struct order and nothing here depends on wall-clock time, so the
//! same inputs always produce byte-identical documents.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::analytics::{Histogram, MonthlyExceedance};
use crate::core::{Location, NodeSide};
use crate::milp::ScheduleEconomics;
use crate::simulate::{CandidateOutcome, DayRecord, SimulationLedger};

pub const SCHEMA_VERSION: u32 = 1;

/// Output of the price-analysis command.
#[derive(Debug, Clone, Serialize)]
pub struct AnalyzeReport {
    pub schema_version: u32,
    pub node_a_id: String,
    pub node_b_id: String,
    pub hours_compared: usize,
    pub dropped_hours: usize,
    pub mean_diff_usd_per_mwh: f64,
    pub mean_abs_diff_usd_per_mwh: f64,
    pub max_abs_diff_usd_per_mwh: f64,
    pub histogram: Histogram,
    pub exceedance_threshold_usd_per_mwh: f64,
    pub monthly_exceedance: Vec<MonthlyExceedance>,
    /// Second node pair, when one was given for comparison.
    pub second_pair: Option<[String; 2]>,
    /// Correlation of the monthly exceedance counts of the two pairs.
    pub exceedance_correlation: Option<f64>,
}

/// Output of the single-day optimization command.
#[derive(Debug, Clone, Serialize)]
pub struct OptimizeDayReport {
    pub schema_version: u32,
    pub day_start_utc: String,
    pub objective_usd: f64,
    pub economics: ScheduleEconomics,
    /// Departures from either node.
    pub trips: usize,
    pub travel_hours: f64,
    /// Energy on board when leaving the cheaper node, summed over trips.
    pub energy_moved_mwh: f64,
    pub nodes_explored: usize,
    pub bound_gap_usd: f64,
    pub end_energy_mwh: f64,
    pub end_location: Location,
}

/// Aggregated money and wear for a run of days.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RunTotals {
    pub revenue_usd: f64,
    pub transport_cost_usd: f64,
    pub degradation_cost_usd: f64,
    pub net_value_usd: f64,
    /// Revenue less transport: what actually hits the bank.
    pub cash_usd: f64,
    pub cycling_throughput_mwh: f64,
    pub calendar_throughput_mwh: f64,
    pub budget_used_mwh: f64,
}

impl RunTotals {
    pub fn from_ledger(ledger: &SimulationLedger) -> Self {
        RunTotals {
            revenue_usd: ledger
                .days
                .iter()
                .fold(0.0, |a, d| a + d.economics.revenue_usd),
            transport_cost_usd: ledger
                .days
                .iter()
                .fold(0.0, |a, d| a + d.economics.transport_cost_usd),
            degradation_cost_usd: ledger
                .days
                .iter()
                .fold(0.0, |a, d| a + d.economics.degradation_cost_usd),
            net_value_usd: ledger.total_net_value_usd(),
            cash_usd: ledger.total_cash_usd(),
            cycling_throughput_mwh: ledger.total_cycling_mwh(),
            calendar_throughput_mwh: ledger.total_calendar_mwh(),
            budget_used_mwh: ledger.budget_used_mwh(),
        }
    }
}

/// Output of the multi-day simulation command.
#[derive(Debug, Clone, Serialize)]
pub struct SimulateReport {
    pub schema_version: u32,
    pub mode: String,
    pub days: usize,
    pub totals: RunTotals,
    pub budget_remaining_mwh: f64,
    pub final_energy_mwh: f64,
    pub final_location: Location,
    pub daily: Vec<DayRecord>,
}

/// One arm of the portable-versus-stationary comparison, run over the
/// unit's whole life.
#[derive(Debug, Clone, Serialize)]
pub struct ArmOutcome {
    /// Wear price this arm was scheduled with.
    pub marginal_cost_usd_per_mwh: f64,
    pub days_survived: usize,
    /// Cash profit in the first 365 days.
    pub first_year_cash_usd: f64,
    pub lifetime_npv_usd: f64,
    pub lifetime: RunTotals,
}

/// Output of the portable-versus-stationary comparison.
#[derive(Debug, Clone, Serialize)]
pub struct CompareReport {
    pub schema_version: u32,
    /// Days in the repeating price pattern both arms were fed.
    pub pattern_days: usize,
    pub stationary_node: NodeSide,
    pub portable: ArmOutcome,
    pub stationary: ArmOutcome,
    pub first_year_uplift_usd: f64,
    /// Portable lifetime cash minus stationary lifetime cash.
    pub lifetime_uplift_usd: f64,
    pub truck_cost_usd: f64,
    /// Whether the lifetime uplift covers the truck.
    pub trucking_justified: bool,
    pub verdict: String,
}

/// Output of a run-to-end-of-life simulation.
#[derive(Debug, Clone, Serialize)]
pub struct LifetimeReport {
    pub schema_version: u32,
    pub mode: String,
    /// Days in the repeating price pattern.
    pub pattern_days: usize,
    pub days_survived: usize,
    pub totals: RunTotals,
    /// Cash profit per 365-day year, last entry partial.
    pub yearly_cash_usd: Vec<f64>,
    pub npv_usd: f64,
}

/// Output of the wear-price sweep.
#[derive(Debug, Clone, Serialize)]
pub struct CalibrateReport {
    pub schema_version: u32,
    pub mode: String,
    pub candidates: Vec<CandidateOutcome>,
    pub best_marginal_cost_usd_per_mwh: f64,
    pub best_npv_usd: f64,
    pub days_survived_at_best: usize,
}

/// Pretty JSON with a trailing newline.
pub fn to_json_string<T: Serialize>(report: &T) -> String {
    let mut out = serde_json::to_string_pretty(report).expect("reports always serialize");
    out.push('\n');
    out
}

pub fn write_json<T: Serialize>(path: &Path, report: &T) -> std::io::Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    out.write_all(to_json_string(report).as_bytes())?;
    out.flush()
}
