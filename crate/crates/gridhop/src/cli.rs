//! Command-line interface.
//!
//! Five commands: `analyze` a price file, `optimize-day` one schedule,
//! `simulate` a run of days, `compare` portable against pinned
//! operation, and `calibrate` the wear price. Reports go to stdout as
//! JSON unless `--out` names a file.
//!
//! Exit codes: 0 on success, 2 for unusable input, 3 when solving or
//! simulating fails, 4 when an output cannot be written.

use std::path::{Path, PathBuf};

use chrono::{DateTime, Duration, NaiveDate, Utc};
use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::analytics::{
    hourly_diff, monthly_exceedance, price_diff_histogram, series_correlation, Histogram, MonthKey,
    MonthlyExceedance, PriceRecord,
};
use crate::core::{self, BoundaryState, Location, NodeSide, PriceSeries, SystemSpec};
use crate::io::config::{load_run_config, RunConfig};
use crate::io::lmp::{day_price_series, read_lmp_csv};
use crate::io::reports::{
    to_json_string, AnalyzeReport, ArmOutcome, CalibrateReport, CompareReport, LifetimeReport,
    OptimizeDayReport, RunTotals, SimulateReport, SCHEMA_VERSION,
};
use crate::io::schedule_csv::write_schedule_csv;
use crate::milp::{build_day_instance, check_feasibility, extract_schedule, write_mps};
use crate::simulate::{
    advance_boundary, calibrate_marginal_cost, run_horizon, run_lifetime, CandidateOutcome,
    DayRecord, LifetimeResult, OperatingMode, SimulateError,
};
use crate::solver::solve_milp;

#[derive(Debug, Parser)]
#[command(
    name = "gridhop",
    version,
    about = "Schedule and evaluate a truck-mounted battery arbitraging two grid nodes"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Summarize the hourly price spread between the two nodes.
    Analyze(AnalyzeArgs),
    /// Solve a single day's schedule.
    OptimizeDay(OptimizeDayArgs),
    /// Run consecutive days, carrying state and wear forward.
    Simulate(SimulateArgs),
    /// Portable versus pinned operation over the same days.
    Compare(CompareArgs),
    /// Sweep the wear price for the best lifetime value.
    Calibrate(CalibrateArgs),
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Price CSV with a timestamp,node_id,lmp_usd_per_mwh header.
    #[arg(long)]
    pub prices: PathBuf,
    /// Config JSON; built-in defaults apply when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Exceedance threshold on the absolute hourly spread, USD/MWh.
    #[arg(long, default_value_t = 50.0)]
    pub threshold: f64,
    /// Histogram bin edges, comma separated and strictly increasing.
    #[arg(long, default_value = "-100,-50,-25,-10,0,10,25,50,100")]
    pub edges: String,
    /// Second node pair as `ID1,ID2`; adds the correlation between the
    /// two pairs' monthly exceedance counts to the report.
    #[arg(long)]
    pub pair2: Option<String>,
    /// Write the histogram as plot-ready CSV.
    #[arg(long)]
    pub histogram_out: Option<PathBuf>,
    /// Write the monthly exceedance table as CSV.
    #[arg(long)]
    pub exceedance_out: Option<PathBuf>,
    /// Report file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OptimizeDayArgs {
    #[arg(long)]
    pub prices: PathBuf,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// UTC day to schedule, YYYY-MM-DD.
    #[arg(long)]
    pub date: NaiveDate,
    /// Starting-state JSON; defaults to empty and parked at node A.
    #[arg(long)]
    pub boundary: Option<PathBuf>,
    /// Write the solved schedule as CSV.
    #[arg(long)]
    pub schedule_out: Option<PathBuf>,
    /// Export the day's model in MPS format before solving.
    #[arg(long)]
    pub mps_out: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Portable,
    StationaryA,
    StationaryB,
}

impl ModeArg {
    fn to_mode(self) -> OperatingMode {
        match self {
            ModeArg::Portable => OperatingMode::Portable,
            ModeArg::StationaryA => OperatingMode::Stationary(NodeSide::A),
            ModeArg::StationaryB => OperatingMode::Stationary(NodeSide::B),
        }
    }

    fn label(self) -> &'static str {
        match self {
            ModeArg::Portable => "portable",
            ModeArg::StationaryA => "stationary_a",
            ModeArg::StationaryB => "stationary_b",
        }
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub prices: PathBuf,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// First UTC day, YYYY-MM-DD.
    #[arg(long)]
    pub start: NaiveDate,
    /// Number of consecutive days to run.
    #[arg(long)]
    pub days: usize,
    #[arg(long, value_enum, default_value_t = ModeArg::Portable)]
    pub mode: ModeArg,
    #[arg(long)]
    pub boundary: Option<PathBuf>,
    /// Write the per-day account as CSV.
    #[arg(long)]
    pub ledger_out: Option<PathBuf>,
    /// Write per-day travel hours as CSV.
    #[arg(long)]
    pub travel_out: Option<PathBuf>,
    /// Also repeat the days as a pattern until the wear budget runs
    /// out, and write that lifetime report here.
    #[arg(long)]
    pub lifetime_out: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub prices: PathBuf,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub start: NaiveDate,
    #[arg(long)]
    pub days: usize,
    /// Starting-state JSON; must sit at a node, which becomes the
    /// pinned node for the stationary arm.
    #[arg(long)]
    pub boundary: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    #[arg(long)]
    pub prices: PathBuf,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// First UTC day of the repeating pattern, YYYY-MM-DD.
    #[arg(long)]
    pub start: NaiveDate,
    /// Days in the repeating pattern.
    #[arg(long)]
    pub days: usize,
    /// Wear prices to try, comma separated; pass them ascending so
    /// ties keep the least restrictive price.
    #[arg(long, default_value = "5,10,15,20,25,30")]
    pub candidates: String,
    #[arg(long, value_enum, default_value_t = ModeArg::Portable)]
    pub mode: ModeArg,
    #[arg(long)]
    pub boundary: Option<PathBuf>,
    /// Write the swept value curve as CSV.
    #[arg(long)]
    pub curve_out: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Failure classes, one per exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Solve(String),
    #[error("{0}")]
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Solve(_) => 3,
            CliError::Output(_) => 4,
        }
    }
}

pub fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Analyze(args) => cmd_analyze(&args),
        Command::OptimizeDay(args) => cmd_optimize_day(&args),
        Command::Simulate(args) => cmd_simulate(&args),
        Command::Compare(args) => cmd_compare(&args),
        Command::Calibrate(args) => cmd_calibrate(&args),
    }
}

fn input_err(context: &str, detail: impl std::fmt::Display) -> CliError {
    CliError::Input(format!("{context}: {detail}"))
}

fn load_config(path: Option<&Path>) -> Result<RunConfig, CliError> {
    match path {
        Some(p) => load_run_config(p).map_err(|e| input_err(&p.display().to_string(), e)),
        None => Ok(RunConfig::default()),
    }
}

fn load_prices(path: &Path) -> Result<Vec<PriceRecord>, CliError> {
    read_lmp_csv(path).map_err(|e| input_err(&path.display().to_string(), e))
}

fn load_boundary(path: Option<&Path>, spec: &SystemSpec) -> Result<BoundaryState, CliError> {
    let boundary = match path {
        Some(p) => {
            let text =
                std::fs::read_to_string(p).map_err(|e| input_err(&p.display().to_string(), e))?;
            serde_json::from_str(&text).map_err(|e| input_err(&p.display().to_string(), e))?
        }
        None => BoundaryState::at_node(NodeSide::A, 0.0, spec.transport.travel_steps),
    };
    let report = core::validate_boundary(&boundary, spec);
    if !report.is_empty() {
        return Err(input_err("starting state rejected", report));
    }
    Ok(boundary)
}

fn day_start_utc(date: NaiveDate) -> DateTime<Utc> {
    date.and_hms_opt(0, 0, 0)
        .expect("midnight exists")
        .and_utc()
}

fn parse_number_list(text: &str, what: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| CliError::Input(format!("{what}: cannot parse `{s}` as a number")))
        })
        .collect()
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => write_text_file(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn write_text_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Output(format!("{}: {e}", path.display())))
}

fn sim_err(e: SimulateError) -> CliError {
    match e {
        SimulateError::Build(b) => input_err("inputs rejected", b),
        other => CliError::Solve(other.to_string()),
    }
}

fn location_label(loc: Location) -> &'static str {
    match loc {
        Location::AtNodeA => "A",
        Location::AtNodeB => "B",
        Location::InTransit { .. } => "transit",
    }
}

fn ledger_csv(days: &[DayRecord]) -> String {
    let mut out = String::from(
        "day_index,revenue_usd,transport_cost_usd,degradation_cost_usd,net_value_usd,\
         cycling_throughput_mwh,calendar_throughput_mwh,travel_hours,end_energy_mwh,end_location\n",
    );
    for d in days {
        let e = &d.economics;
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            d.day_index,
            e.revenue_usd,
            e.transport_cost_usd,
            e.degradation_cost_usd,
            e.net_value_usd,
            e.cycling_throughput_mwh,
            e.calendar_throughput_mwh,
            d.travel_hours,
            d.end_energy_mwh,
            location_label(d.end_location),
        ));
    }
    out
}

fn travel_csv(days: &[DayRecord]) -> String {
    let mut out = String::from("day_index,travel_hours\n");
    for d in days {
        out.push_str(&format!("{},{}\n", d.day_index, d.travel_hours));
    }
    out
}

fn histogram_csv(h: &Histogram) -> String {
    let mut out = String::from("bin_low_usd_per_mwh,bin_high_usd_per_mwh,count\n");
    out.push_str(&format!("-inf,{},{}\n", h.edges[0], h.underflow));
    for (i, count) in h.counts.iter().enumerate() {
        out.push_str(&format!("{},{},{}\n", h.edges[i], h.edges[i + 1], count));
    }
    out.push_str(&format!(
        "{},inf,{}\n",
        h.edges[h.edges.len() - 1],
        h.overflow
    ));
    out
}

fn exceedance_csv(rows: &[MonthlyExceedance]) -> String {
    let mut out = String::from("year,month,hours_observed,hours_exceeding,fraction,low_coverage\n");
    for m in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            m.month.year,
            m.month.month,
            m.hours_observed,
            m.hours_exceeding,
            m.fraction,
            m.low_coverage,
        ));
    }
    out
}

fn npv_curve_csv(candidates: &[CandidateOutcome]) -> String {
    let mut out = String::from("marginal_cost_usd_per_mwh,npv_usd,days_survived\n");
    for c in candidates {
        out.push_str(&format!(
            "{},{},{}\n",
            c.marginal_cost_usd_per_mwh, c.npv_usd, c.days_survived
        ));
    }
    out
}

/// Slice the price records into one series per requested day.
fn slice_days(
    records: &[PriceRecord],
    config: &RunConfig,
    start: NaiveDate,
    days: usize,
) -> Result<Vec<PriceSeries>, CliError> {
    if days == 0 {
        return Err(CliError::Input("--days must be at least 1".to_owned()));
    }
    let spec = &config.system;
    let mut out = Vec::with_capacity(days);
    for d in 0..days {
        let day_start = day_start_utc(start) + Duration::days(d as i64);
        let series = day_price_series(
            records,
            &spec.transport.node_a_id,
            &spec.transport.node_b_id,
            day_start,
            &spec.horizon,
        )
        .map_err(|e| input_err("price data", e))?;
        out.push(series);
    }
    Ok(out)
}

fn stationary_spec(config: &RunConfig) -> SystemSpec {
    let mut spec = config.system.clone();
    spec.degradation.marginal_cost_usd_per_mwh = config.stationary_marginal_cost_usd_per_mwh;
    spec
}

pub fn cmd_analyze(args: &AnalyzeArgs) -> Result<(), CliError> {
    let config = load_config(args.config.as_deref())?;
    let records = load_prices(&args.prices)?;
    let node_a = &config.system.transport.node_a_id;
    let node_b = &config.system.transport.node_b_id;

    let series = hourly_diff(&records, node_a, node_b).map_err(|e| input_err("price data", e))?;
    if series.points.is_empty() {
        return Err(CliError::Input(
            "the two nodes share no observed hours".to_owned(),
        ));
    }

    let diffs: Vec<f64> = series.points.iter().map(|p| p.diff_usd_per_mwh).collect();
    let n = diffs.len() as f64;
    let mean = diffs.iter().sum::<f64>() / n;
    let mean_abs = diffs.iter().map(|d| d.abs()).sum::<f64>() / n;
    let max_abs = diffs.iter().fold(0.0f64, |m, d| m.max(d.abs()));

    let edges = parse_number_list(&args.edges, "--edges")?;
    let histogram = price_diff_histogram(&diffs, &edges).map_err(|e| input_err("--edges", e))?;
    let monthly = monthly_exceedance(&series.points, args.threshold);

    let mut second_pair = None;
    let mut exceedance_correlation = None;
    if let Some(pair2) = args.pair2.as_deref() {
        let ids: Vec<&str> = pair2.split(',').map(str::trim).collect();
        let [c, d] = ids.as_slice() else {
            return Err(CliError::Input(
                "--pair2 must name exactly two nodes as `ID1,ID2`".to_owned(),
            ));
        };
        let series2 = hourly_diff(&records, c, d).map_err(|e| input_err("second pair", e))?;
        if series2.points.is_empty() {
            return Err(CliError::Input(
                "the second pair shares no observed hours".to_owned(),
            ));
        }
        let monthly2 = monthly_exceedance(&series2.points, args.threshold);
        let counts = |rows: &[MonthlyExceedance]| -> Vec<(MonthKey, f64)> {
            rows.iter()
                .map(|m| (m.month, m.hours_exceeding as f64))
                .collect()
        };
        let r = series_correlation(&counts(&monthly), &counts(&monthly2))
            .map_err(|e| input_err("exceedance correlation", e))?;
        second_pair = Some([(*c).to_owned(), (*d).to_owned()]);
        exceedance_correlation = Some(r);
    }

    if let Some(path) = args.histogram_out.as_deref() {
        write_text_file(path, &histogram_csv(&histogram))?;
    }
    if let Some(path) = args.exceedance_out.as_deref() {
        write_text_file(path, &exceedance_csv(&monthly))?;
    }

    let report = AnalyzeReport {
        schema_version: SCHEMA_VERSION,
        node_a_id: node_a.clone(),
        node_b_id: node_b.clone(),
        hours_compared: series.points.len(),
        dropped_hours: series.dropped_hours,
        mean_diff_usd_per_mwh: mean,
        mean_abs_diff_usd_per_mwh: mean_abs,
        max_abs_diff_usd_per_mwh: max_abs,
        histogram,
        exceedance_threshold_usd_per_mwh: args.threshold,
        monthly_exceedance: monthly,
        second_pair,
        exceedance_correlation,
    };
    emit(args.out.as_deref(), &to_json_string(&report))
}

pub fn cmd_optimize_day(args: &OptimizeDayArgs) -> Result<(), CliError> {
    let config = load_config(args.config.as_deref())?;
    let records = load_prices(&args.prices)?;
    let spec = &config.system;
    let boundary = load_boundary(args.boundary.as_deref(), spec)?;
    let day_start = day_start_utc(args.date);

    let prices = day_price_series(
        &records,
        &spec.transport.node_a_id,
        &spec.transport.node_b_id,
        day_start,
        &spec.horizon,
    )
    .map_err(|e| input_err("price data", e))?;

    let day = build_day_instance(spec, &prices, &boundary, &config.formulation)
        .map_err(|e| input_err("inputs rejected", e))?;

    if let Some(mps_path) = args.mps_out.as_deref() {
        let file = std::fs::File::create(mps_path)
            .map_err(|e| CliError::Output(format!("{}: {e}", mps_path.display())))?;
        let mut out = std::io::BufWriter::new(file);
        write_mps(&day.milp, &mut out)
            .map_err(|e| CliError::Output(format!("{}: {e}", mps_path.display())))?;
    }

    let solver = config.solver.to_solver_config();
    let solution = solve_milp(&day.milp, &solver).map_err(|e| CliError::Solve(e.to_string()))?;
    let schedule =
        extract_schedule(&day, &solution.values).map_err(|e| CliError::Solve(e.to_string()))?;
    let violations = check_feasibility(
        &schedule,
        spec,
        &boundary,
        &config.formulation,
        solver.feasibility_tol,
    );
    if !violations.is_empty() {
        return Err(CliError::Solve(format!(
            "schedule failed {} rule checks; first: {}",
            violations.len(),
            violations[0]
        )));
    }
    let end =
        advance_boundary(spec, &boundary, &schedule).map_err(|e| CliError::Solve(e.to_string()))?;

    if let Some(schedule_path) = args.schedule_out.as_deref() {
        let file = std::fs::File::create(schedule_path)
            .map_err(|e| CliError::Output(format!("{}: {e}", schedule_path.display())))?;
        write_schedule_csv(std::io::BufWriter::new(file), &schedule)
            .map_err(|e| CliError::Output(format!("{}: {e}", schedule_path.display())))?;
    }

    let steps = schedule.steps;
    let day_mean = |side: NodeSide| -> f64 {
        (0..steps).map(|h| prices.at(side, h)).sum::<f64>() / steps as f64
    };
    let cheap = if day_mean(NodeSide::A) <= day_mean(NodeSide::B) {
        NodeSide::A
    } else {
        NodeSide::B
    };
    let energy_moved_mwh: f64 = (0..steps)
        .filter(|&h| schedule.departing[cheap][h])
        .map(|h| schedule.energy_mwh[h])
        .sum();

    let report = OptimizeDayReport {
        schema_version: SCHEMA_VERSION,
        day_start_utc: day_start.format("%Y-%m-%dT%H:%M:%SZ").to_string(),
        objective_usd: solution.objective,
        economics: schedule.economics,
        trips: schedule.departure_count(),
        travel_hours: schedule.travel_hours(),
        energy_moved_mwh,
        nodes_explored: solution.nodes_explored,
        bound_gap_usd: solution.gap,
        end_energy_mwh: end.initial_energy_mwh,
        end_location: end.initial_location,
    };
    emit(args.out.as_deref(), &to_json_string(&report))
}

fn run_days(
    spec: &SystemSpec,
    config: &RunConfig,
    day_prices: &[PriceSeries],
    boundary: &BoundaryState,
    mode: OperatingMode,
) -> Result<crate::simulate::SimulationRun, CliError> {
    run_horizon(
        spec,
        day_prices,
        boundary,
        &config.formulation,
        mode,
        &config.solver.to_solver_config(),
    )
    .map_err(sim_err)
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<(), CliError> {
    let config = load_config(args.config.as_deref())?;
    let records = load_prices(&args.prices)?;
    let spec = match args.mode {
        ModeArg::Portable => config.system.clone(),
        _ => stationary_spec(&config),
    };
    let boundary = load_boundary(args.boundary.as_deref(), &spec)?;
    if let OperatingMode::Stationary(node) = args.mode.to_mode() {
        if boundary.initial_location != Location::at(node) {
            return Err(CliError::Input(format!(
                "stationary mode at node {node} needs a starting state at that node"
            )));
        }
    }
    let day_prices = slice_days(&records, &config, args.start, args.days)?;

    let run = run_days(&spec, &config, &day_prices, &boundary, args.mode.to_mode())?;
    let totals = RunTotals::from_ledger(&run.ledger);
    let report = SimulateReport {
        schema_version: SCHEMA_VERSION,
        mode: args.mode.label().to_owned(),
        days: run.ledger.days.len(),
        totals,
        budget_remaining_mwh: spec.degradation.lifetime_throughput_budget_mwh
            - totals.budget_used_mwh,
        final_energy_mwh: run.final_boundary.initial_energy_mwh,
        final_location: run.final_boundary.initial_location,
        daily: run.ledger.days,
    };

    if let Some(path) = args.ledger_out.as_deref() {
        write_text_file(path, &ledger_csv(&report.daily))?;
    }
    if let Some(path) = args.travel_out.as_deref() {
        write_text_file(path, &travel_csv(&report.daily))?;
    }
    if let Some(path) = args.lifetime_out.as_deref() {
        let life = run_lifetime(
            &spec,
            &day_prices,
            &boundary,
            &config.formulation,
            args.mode.to_mode(),
            &config.solver.to_solver_config(),
        )
        .map_err(sim_err)?;
        let life_report = LifetimeReport {
            schema_version: SCHEMA_VERSION,
            mode: args.mode.label().to_owned(),
            pattern_days: day_prices.len(),
            days_survived: life.days_survived,
            totals: RunTotals::from_ledger(&life.ledger),
            yearly_cash_usd: life.yearly_cash_usd,
            npv_usd: life.npv_usd,
        };
        write_text_file(path, &to_json_string(&life_report))?;
    }

    emit(args.out.as_deref(), &to_json_string(&report))
}

pub fn cmd_compare(args: &CompareArgs) -> Result<(), CliError> {
    let config = load_config(args.config.as_deref())?;
    let records = load_prices(&args.prices)?;
    let boundary = load_boundary(args.boundary.as_deref(), &config.system)?;
    let node = match boundary.initial_location {
        Location::AtNodeA => NodeSide::A,
        Location::AtNodeB => NodeSide::B,
        Location::InTransit { .. } => {
            return Err(CliError::Input(
                "comparison needs a starting state parked at a node".to_owned(),
            ))
        }
    };
    let day_prices = slice_days(&records, &config, args.start, args.days)?;
    let solver = config.solver.to_solver_config();

    let arm = |spec: &SystemSpec, life: &LifetimeResult| ArmOutcome {
        marginal_cost_usd_per_mwh: spec.degradation.marginal_cost_usd_per_mwh,
        days_survived: life.days_survived,
        first_year_cash_usd: life.yearly_cash_usd.first().copied().unwrap_or(0.0),
        lifetime_npv_usd: life.npv_usd,
        lifetime: RunTotals::from_ledger(&life.ledger),
    };

    let portable_life = run_lifetime(
        &config.system,
        &day_prices,
        &boundary,
        &config.formulation,
        OperatingMode::Portable,
        &solver,
    )
    .map_err(sim_err)?;
    let pinned_spec = stationary_spec(&config);
    let stationary_life = run_lifetime(
        &pinned_spec,
        &day_prices,
        &boundary,
        &config.formulation,
        OperatingMode::Stationary(node),
        &solver,
    )
    .map_err(sim_err)?;

    let portable = arm(&config.system, &portable_life);
    let stationary = arm(&pinned_spec, &stationary_life);
    let lifetime_uplift_usd = portable.lifetime.cash_usd - stationary.lifetime.cash_usd;
    let trucking_justified = lifetime_uplift_usd > config.truck_cost_usd;
    let report = CompareReport {
        schema_version: SCHEMA_VERSION,
        pattern_days: args.days,
        stationary_node: node,
        first_year_uplift_usd: portable.first_year_cash_usd - stationary.first_year_cash_usd,
        lifetime_uplift_usd,
        truck_cost_usd: config.truck_cost_usd,
        trucking_justified,
        verdict: if trucking_justified {
            "trucking justified".to_owned()
        } else {
            "trucking not justified".to_owned()
        },
        portable,
        stationary,
    };
    emit(args.out.as_deref(), &to_json_string(&report))
}

pub fn cmd_calibrate(args: &CalibrateArgs) -> Result<(), CliError> {
    let config = load_config(args.config.as_deref())?;
    let records = load_prices(&args.prices)?;
    let spec = match args.mode {
        ModeArg::Portable => config.system.clone(),
        _ => stationary_spec(&config),
    };
    let boundary = load_boundary(args.boundary.as_deref(), &spec)?;
    if let OperatingMode::Stationary(node) = args.mode.to_mode() {
        if boundary.initial_location != Location::at(node) {
            return Err(CliError::Input(format!(
                "stationary mode at node {node} needs a starting state at that node"
            )));
        }
    }
    let candidates = parse_number_list(&args.candidates, "--candidates")?;
    if candidates.is_empty() {
        return Err(CliError::Input("--candidates is empty".to_owned()));
    }
    let day_prices = slice_days(&records, &config, args.start, args.days)?;

    let outcome = calibrate_marginal_cost(
        &spec,
        &day_prices,
        &boundary,
        &config.formulation,
        args.mode.to_mode(),
        &candidates,
        &config.solver.to_solver_config(),
    )
    .map_err(sim_err)?;

    if let Some(path) = args.curve_out.as_deref() {
        write_text_file(path, &npv_curve_csv(&outcome.candidates))?;
    }

    let report = CalibrateReport {
        schema_version: SCHEMA_VERSION,
        mode: args.mode.label().to_owned(),
        best_marginal_cost_usd_per_mwh: outcome.best.marginal_cost_usd_per_mwh,
        best_npv_usd: outcome.best.npv_usd,
        days_survived_at_best: outcome.best.days_survived,
        candidates: outcome.candidates,
    };
    emit(args.out.as_deref(), &to_json_string(&report))
}
