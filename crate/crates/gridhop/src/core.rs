//! Parameter types, boundary state and the small arithmetic helpers the
//! rest of the crate builds on.
//!
//! Conventions used throughout: power in MW, energy in MWh, money in USD,
//! prices in USD/MWh, time in hours. A day is split into `steps_per_day`
//! equal steps of `step_hours` each; step indices are 0-based in code and
//! 1-based in file output.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// One of the two market nodes the unit can sit at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeSide {
    A,
    B,
}

impl NodeSide {
    pub const BOTH: [NodeSide; 2] = [NodeSide::A, NodeSide::B];

    pub fn other(self) -> NodeSide {
        match self {
            NodeSide::A => NodeSide::B,
            NodeSide::B => NodeSide::A,
        }
    }

    /// 0 for A, 1 for B. Used for array indexing and column layout.
    pub fn index(self) -> usize {
        match self {
            NodeSide::A => 0,
            NodeSide::B => 1,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            NodeSide::A => "A",
            NodeSide::B => "B",
        }
    }
}

impl std::fmt::Display for NodeSide {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// A pair of values, one per node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct PerNode<T> {
    pub a: T,
    pub b: T,
}

impl<T> PerNode<T> {
    pub fn new(a: T, b: T) -> Self {
        PerNode { a, b }
    }

    pub fn get(&self, side: NodeSide) -> &T {
        match side {
            NodeSide::A => &self.a,
            NodeSide::B => &self.b,
        }
    }

    pub fn get_mut(&mut self, side: NodeSide) -> &mut T {
        match side {
            NodeSide::A => &mut self.a,
            NodeSide::B => &mut self.b,
        }
    }
}

impl<T> std::ops::Index<NodeSide> for PerNode<T> {
    type Output = T;
    fn index(&self, side: NodeSide) -> &T {
        self.get(side)
    }
}

impl<T> std::ops::IndexMut<NodeSide> for PerNode<T> {
    fn index_mut(&mut self, side: NodeSide) -> &mut T {
        self.get_mut(side)
    }
}

/// Time discretisation of one scheduling horizon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HorizonConfig {
    /// Length of one step in hours.
    pub step_hours: f64,
    /// Number of steps in the horizon.
    pub steps_per_day: usize,
    /// Which day of a longer run this horizon belongs to. Only used for
    /// labelling output rows.
    #[serde(default)]
    pub day_index: i64,
}

impl Default for HorizonConfig {
    /// 96 quarter-hour steps, one calendar day.
    fn default() -> Self {
        HorizonConfig {
            step_hours: 0.25,
            steps_per_day: 96,
            day_index: 0,
        }
    }
}

impl HorizonConfig {
    pub fn total_hours(&self) -> f64 {
        self.step_hours * self.steps_per_day as f64
    }

    /// True when the horizon covers exactly 24 hours.
    pub fn is_calendar_day(&self) -> bool {
        (self.total_hours() - 24.0).abs() <= 1e-9
    }
}

/// Battery ratings. Power limits apply symmetrically to charge and
/// discharge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StorageSpec {
    pub power_capacity_mw: f64,
    pub energy_capacity_mwh: f64,
    /// One-way conversion efficiency, applied once on charge and once on
    /// discharge.
    pub efficiency: f64,
    /// Fraction of stored energy lost per step while holding.
    pub self_discharge_per_step: f64,
}

impl Default for StorageSpec {
    fn default() -> Self {
        StorageSpec {
            power_capacity_mw: 2.7,
            energy_capacity_mwh: 2.7,
            efficiency: 0.95,
            self_discharge_per_step: 0.0,
        }
    }
}

/// The two endpoints and the cost/duration of moving between them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransportSpec {
    pub node_a_id: String,
    pub node_b_id: String,
    /// Travel duration in whole steps, at least 1.
    pub travel_steps: usize,
    /// Cost charged for every step spent travelling.
    pub travel_cost_per_step_usd: f64,
}

impl Default for TransportSpec {
    fn default() -> Self {
        TransportSpec {
            node_a_id: "NCMETER_1_N001".to_owned(),
            node_b_id: "SNTAMRA_1_N005".to_owned(),
            travel_steps: 1,
            travel_cost_per_step_usd: 4.0,
        }
    }
}

impl TransportSpec {
    pub fn node_id(&self, side: NodeSide) -> &str {
        match side {
            NodeSide::A => &self.node_a_id,
            NodeSide::B => &self.node_b_id,
        }
    }
}

/// Battery wear accounting: a marginal cost per MWh cycled plus a fixed
/// calendar component charged per day against a finite lifetime budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DegradationParams {
    /// USD charged per MWh of charge or discharge throughput.
    pub marginal_cost_usd_per_mwh: f64,
    /// MWh of budget consumed per calendar day regardless of dispatch.
    pub calendar_throughput_mwh_per_day: f64,
    /// Total throughput the unit can absorb before end of life.
    pub lifetime_throughput_budget_mwh: f64,
    /// Discount rate for multi-year revenue aggregation.
    pub annual_discount_rate: f64,
}

impl Default for DegradationParams {
    fn default() -> Self {
        DegradationParams {
            marginal_cost_usd_per_mwh: 25.0,
            calendar_throughput_mwh_per_day: 1.5,
            lifetime_throughput_budget_mwh: 16_200.0,
            annual_discount_rate: 0.07,
        }
    }
}

impl DegradationParams {
    /// Calendar budget consumption for one horizon, scaled by its share
    /// of a day.
    pub fn calendar_throughput_for(&self, horizon: &HorizonConfig) -> f64 {
        self.calendar_throughput_mwh_per_day * horizon.total_hours() / 24.0
    }
}

/// Everything that stays fixed across the days of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct SystemSpec {
    pub horizon: HorizonConfig,
    pub storage: StorageSpec,
    pub transport: TransportSpec,
    pub degradation: DegradationParams,
}

/// Per-step prices at both nodes for one horizon. Lengths always match.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceSeries {
    node_a: Vec<f64>,
    node_b: Vec<f64>,
}

impl PriceSeries {
    /// Negative prices are fine; NaN or infinite ones are not.
    pub fn new(node_a: Vec<f64>, node_b: Vec<f64>) -> Result<Self, CoreError> {
        if node_a.len() != node_b.len() {
            return Err(CoreError::PriceLengthMismatch {
                node_a: node_a.len(),
                node_b: node_b.len(),
            });
        }
        for (side, series) in [(NodeSide::A, &node_a), (NodeSide::B, &node_b)] {
            if let Some(step) = series.iter().position(|p| !p.is_finite()) {
                return Err(CoreError::NonFinitePrice { side, step });
            }
        }
        Ok(PriceSeries { node_a, node_b })
    }

    pub fn flat(price: f64, steps: usize) -> Self {
        PriceSeries {
            node_a: vec![price; steps],
            node_b: vec![price; steps],
        }
    }

    pub fn len(&self) -> usize {
        self.node_a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.node_a.is_empty()
    }

    pub fn at(&self, side: NodeSide, step: usize) -> f64 {
        match side {
            NodeSide::A => self.node_a[step],
            NodeSide::B => self.node_b[step],
        }
    }

    pub fn node(&self, side: NodeSide) -> &[f64] {
        match side {
            NodeSide::A => &self.node_a,
            NodeSide::B => &self.node_b,
        }
    }

    /// Largest absolute price over both nodes, 0 for an empty series.
    pub fn max_abs(&self) -> f64 {
        self.node_a
            .iter()
            .chain(&self.node_b)
            .fold(0.0f64, |m, p| m.max(p.abs()))
    }

    pub fn scale(&self, factor: f64) -> Self {
        PriceSeries {
            node_a: self.node_a.iter().map(|p| p * factor).collect(),
            node_b: self.node_b.iter().map(|p| p * factor).collect(),
        }
    }
}

/// Where the unit is at the start of a horizon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Location {
    AtNodeA,
    AtNodeB,
    /// Mid-journey. `remaining_steps` is how many more steps of travel
    /// are still owed before arrival becomes possible; 0 means the next
    /// step may arrive.
    InTransit {
        remaining_steps: usize,
        destination: NodeSide,
    },
}

impl Location {
    pub fn at(side: NodeSide) -> Location {
        match side {
            NodeSide::A => Location::AtNodeA,
            NodeSide::B => Location::AtNodeB,
        }
    }

    /// The node occupied just before step 1, if any.
    pub fn node(&self) -> Option<NodeSide> {
        match self {
            Location::AtNodeA => Some(NodeSide::A),
            Location::AtNodeB => Some(NodeSide::B),
            Location::InTransit { .. } => None,
        }
    }

    pub fn is_traveling(&self) -> bool {
        matches!(self, Location::InTransit { .. })
    }
}

/// State handed from one horizon to the next.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryState {
    pub initial_energy_mwh: f64,
    pub initial_location: Location,
    /// Travel indicator for the `travel_steps` steps preceding the
    /// horizon, oldest first. The last entry is the step immediately
    /// before step 1.
    pub travel_history: Vec<bool>,
}

impl BoundaryState {
    /// Resting at a node with no recent travel.
    pub fn at_node(side: NodeSide, energy_mwh: f64, travel_steps: usize) -> Self {
        BoundaryState {
            initial_energy_mwh: energy_mwh,
            initial_location: Location::at(side),
            travel_history: vec![false; travel_steps],
        }
    }

    /// Travel indicator for the step just before the horizon starts.
    pub fn traveled_last_step(&self) -> bool {
        self.travel_history.last().copied().unwrap_or(false)
    }
}

/// A single failed validation check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub field: String,
    pub message: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

/// Outcome of a validation pass. Empty means acceptable.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn push(&mut self, field: &str, message: impl Into<String>) {
        self.violations.push(Violation {
            field: field.to_owned(),
            message: message.into(),
        });
    }

    pub fn merge(&mut self, other: ValidationReport) {
        self.violations.extend(other.violations);
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.violations.is_empty() {
            return f.write_str("ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("price series lengths differ: node A has {node_a} steps, node B has {node_b}")]
    PriceLengthMismatch { node_a: usize, node_b: usize },
    #[error("non-finite price at node {side} step {step}")]
    NonFinitePrice { side: NodeSide, step: usize },
    #[error("end-of-life capacity fraction must lie strictly between 0 and 1, got {0}")]
    DegenerateEndOfLife(f64),
}

fn finite_positive(report: &mut ValidationReport, field: &str, value: f64) {
    if !value.is_finite() || value <= 0.0 {
        report.push(field, format!("must be finite and positive, got {value}"));
    }
}

fn finite_nonnegative(report: &mut ValidationReport, field: &str, value: f64) {
    if !value.is_finite() || value < 0.0 {
        report.push(field, format!("must be finite and >= 0, got {value}"));
    }
}

/// Check a parameter set for internal consistency. Returns an empty
/// report when everything is usable.
pub fn validate(spec: &SystemSpec) -> ValidationReport {
    let mut report = ValidationReport::default();

    finite_positive(&mut report, "horizon.step_hours", spec.horizon.step_hours);
    if spec.horizon.steps_per_day == 0 {
        report.push("horizon.steps_per_day", "must be at least 1");
    }

    finite_positive(
        &mut report,
        "storage.power_capacity_mw",
        spec.storage.power_capacity_mw,
    );
    finite_positive(
        &mut report,
        "storage.energy_capacity_mwh",
        spec.storage.energy_capacity_mwh,
    );
    if !(spec.storage.efficiency > 0.0 && spec.storage.efficiency <= 1.0) {
        report.push(
            "storage.efficiency",
            format!("must lie in (0, 1], got {}", spec.storage.efficiency),
        );
    }
    if !(spec.storage.self_discharge_per_step >= 0.0 && spec.storage.self_discharge_per_step < 1.0)
    {
        report.push(
            "storage.self_discharge_per_step",
            format!(
                "must lie in [0, 1), got {}",
                spec.storage.self_discharge_per_step
            ),
        );
    }

    if spec.transport.travel_steps == 0 {
        report.push("transport.travel_steps", "must be at least 1");
    }
    finite_nonnegative(
        &mut report,
        "transport.travel_cost_per_step_usd",
        spec.transport.travel_cost_per_step_usd,
    );
    if spec.transport.node_a_id == spec.transport.node_b_id {
        report.push("transport.node_b_id", "both nodes carry the same id");
    }

    finite_nonnegative(
        &mut report,
        "degradation.marginal_cost_usd_per_mwh",
        spec.degradation.marginal_cost_usd_per_mwh,
    );
    finite_nonnegative(
        &mut report,
        "degradation.calendar_throughput_mwh_per_day",
        spec.degradation.calendar_throughput_mwh_per_day,
    );
    finite_positive(
        &mut report,
        "degradation.lifetime_throughput_budget_mwh",
        spec.degradation.lifetime_throughput_budget_mwh,
    );
    if !spec.degradation.annual_discount_rate.is_finite()
        || spec.degradation.annual_discount_rate <= -1.0
    {
        report.push(
            "degradation.annual_discount_rate",
            format!(
                "must be finite and > -1, got {}",
                spec.degradation.annual_discount_rate
            ),
        );
    }

    report
}

/// Check a boundary state against the spec it will be used with.
pub fn validate_boundary(boundary: &BoundaryState, spec: &SystemSpec) -> ValidationReport {
    let mut report = ValidationReport::default();
    let t = spec.transport.travel_steps;

    if !boundary.initial_energy_mwh.is_finite()
        || boundary.initial_energy_mwh < 0.0
        || boundary.initial_energy_mwh > spec.storage.energy_capacity_mwh
    {
        report.push(
            "boundary.initial_energy_mwh",
            format!(
                "must lie in [0, {}], got {}",
                spec.storage.energy_capacity_mwh, boundary.initial_energy_mwh
            ),
        );
    }

    if boundary.travel_history.len() != t {
        report.push(
            "boundary.travel_history",
            format!(
                "must cover exactly travel_steps = {t} steps, got {}",
                boundary.travel_history.len()
            ),
        );
        return report;
    }

    match boundary.initial_location {
        Location::AtNodeA | Location::AtNodeB => {
            if boundary.traveled_last_step() {
                report.push(
                    "boundary.travel_history",
                    "last entry claims travel, but the location is a node",
                );
            }
        }
        Location::InTransit {
            remaining_steps,
            destination: _,
        } => {
            if remaining_steps >= t {
                report.push(
                    "boundary.initial_location",
                    format!("remaining_steps {remaining_steps} must be below travel_steps {t}"),
                );
                return report;
            }
            // The journey so far occupies the most recent
            // `t - remaining_steps` history entries; the step right
            // before it must be a non-travel step or the journey would
            // have started earlier. Entries before that may hold the
            // tail of a previous journey and are left alone.
            for (i, &moved) in boundary.travel_history.iter().enumerate() {
                if i >= remaining_steps && !moved {
                    report.push(
                        "boundary.travel_history",
                        format!("entry {i} must record travel for an in-transit start"),
                    );
                } else if i + 1 == remaining_steps && moved {
                    report.push(
                        "boundary.travel_history",
                        format!("entry {i} would extend the journey past remaining_steps"),
                    );
                }
            }
        }
    }

    report
}

/// Lifetime cycled-energy budget from a cycle-life rating: each full
/// cycle moves the usable capacity through the cells twice.
pub fn throughput_budget(cycle_life_cycles: f64, energy_capacity_mwh: f64) -> f64 {
    cycle_life_cycles * energy_capacity_mwh * 2.0
}

/// Convert an annual idle capacity fade into an equivalent daily
/// throughput draw on the lifetime budget.
///
/// Losing `capacity_loss_per_year` of capacity per year against an
/// end-of-life threshold of `eol_capacity_fraction` consumes the same
/// share of life as that fraction of the throughput budget; dividing by
/// the mean year length spreads it per day.
pub fn calendar_equivalent_throughput(
    capacity_loss_per_year: f64,
    eol_capacity_fraction: f64,
    budget_mwh: f64,
) -> Result<f64, CoreError> {
    if !(eol_capacity_fraction > 0.0 && eol_capacity_fraction < 1.0) {
        return Err(CoreError::DegenerateEndOfLife(eol_capacity_fraction));
    }
    let life_share_per_year = capacity_loss_per_year / (1.0 - eol_capacity_fraction);
    Ok(life_share_per_year * budget_mwh / 365.25)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_reference_unit() {
        let spec = SystemSpec::default();
        assert_eq!(spec.storage.power_capacity_mw, 2.7);
        assert_eq!(spec.storage.energy_capacity_mwh, 2.7);
        assert_eq!(spec.storage.efficiency, 0.95);
        assert_eq!(spec.storage.self_discharge_per_step, 0.0);
        assert_eq!(spec.transport.travel_steps, 1);
        assert_eq!(spec.transport.travel_cost_per_step_usd, 4.0);
        assert_eq!(spec.degradation.marginal_cost_usd_per_mwh, 25.0);
        assert_eq!(spec.degradation.calendar_throughput_mwh_per_day, 1.5);
        assert_eq!(spec.degradation.lifetime_throughput_budget_mwh, 16_200.0);
        assert_eq!(spec.horizon.steps_per_day, 96);
        assert_eq!(spec.horizon.step_hours, 0.25);
        assert!(spec.horizon.is_calendar_day());
        assert!(validate(&spec).is_empty());
    }

    #[test]
    fn validate_flags_bad_fields() {
        let mut spec = SystemSpec::default();
        spec.storage.efficiency = 1.2;
        spec.transport.travel_steps = 0;
        spec.horizon.step_hours = -0.25;
        let report = validate(&spec);
        let fields: Vec<&str> = report.violations.iter().map(|v| v.field.as_str()).collect();
        assert!(fields.contains(&"storage.efficiency"));
        assert!(fields.contains(&"transport.travel_steps"));
        assert!(fields.contains(&"horizon.step_hours"));
    }

    #[test]
    fn boundary_at_node_requires_idle_last_step() {
        let spec = SystemSpec::default();
        let mut boundary = BoundaryState::at_node(NodeSide::A, 1.0, 1);
        assert!(validate_boundary(&boundary, &spec).is_empty());
        boundary.travel_history = vec![true];
        assert!(!validate_boundary(&boundary, &spec).is_empty());
    }

    #[test]
    fn boundary_in_transit_history_shape() {
        let mut spec = SystemSpec::default();
        spec.transport.travel_steps = 3;
        let boundary = BoundaryState {
            initial_energy_mwh: 0.5,
            initial_location: Location::InTransit {
                remaining_steps: 1,
                destination: NodeSide::B,
            },
            travel_history: vec![false, true, true],
        };
        assert!(validate_boundary(&boundary, &spec).is_empty());

        let wrong_tail = BoundaryState {
            travel_history: vec![true, true, false],
            ..boundary.clone()
        };
        assert!(!validate_boundary(&wrong_tail, &spec).is_empty());

        let too_long = BoundaryState {
            initial_location: Location::InTransit {
                remaining_steps: 3,
                destination: NodeSide::B,
            },
            ..boundary.clone()
        };
        assert!(!validate_boundary(&too_long, &spec).is_empty());

        // A previous journey's tail may still sit in the window.
        let back_to_back = BoundaryState {
            initial_location: Location::InTransit {
                remaining_steps: 2,
                destination: NodeSide::B,
            },
            travel_history: vec![true, false, true],
            ..boundary
        };
        assert!(validate_boundary(&back_to_back, &spec).is_empty());
    }

    #[test]
    fn boundary_energy_outside_capacity_rejected() {
        let spec = SystemSpec::default();
        let boundary = BoundaryState::at_node(NodeSide::B, 3.0, 1);
        let report = validate_boundary(&boundary, &spec);
        assert_eq!(report.violations.len(), 1);
        assert_eq!(report.violations[0].field, "boundary.initial_energy_mwh");
    }

    #[test]
    fn budget_from_cycle_life() {
        let budget = throughput_budget(3000.0, 2.7);
        assert!((budget - 16_200.0).abs() <= 1e-9);
        assert_eq!(throughput_budget(0.0, 2.7), 0.0);
    }

    #[test]
    fn calendar_draw_examples() {
        let daily = calendar_equivalent_throughput(0.01, 0.70, 16_200.0).unwrap();
        assert!((daily - 540.0 / 365.25).abs() < 1e-12);
        assert!(daily > 1.4 && daily < 1.6);

        let heavy = calendar_equivalent_throughput(0.30, 0.70, 16_200.0).unwrap();
        assert!((heavy - 44.35318275154004).abs() < 1e-9);

        assert!(calendar_equivalent_throughput(0.01, 1.0, 16_200.0).is_err());
        assert!(calendar_equivalent_throughput(0.01, 0.0, 16_200.0).is_err());
    }

    #[test]
    fn price_series_rejects_bad_input() {
        assert!(PriceSeries::new(vec![1.0], vec![1.0, 2.0]).is_err());
        assert!(PriceSeries::new(vec![f64::NAN], vec![1.0]).is_err());
        let ok = PriceSeries::new(vec![-10.0, 50.0], vec![0.0, 1.0]).unwrap();
        assert_eq!(ok.len(), 2);
        assert_eq!(ok.at(NodeSide::A, 0), -10.0);
        assert_eq!(ok.max_abs(), 50.0);
    }

    #[test]
    fn horizon_calendar_check() {
        let h = HorizonConfig {
            step_hours: 6.0,
            steps_per_day: 4,
            day_index: 0,
        };
        assert!(h.is_calendar_day());
        let h2 = HorizonConfig {
            steps_per_day: 3,
            ..h
        };
        assert!(!h2.is_calendar_day());
    }
}
