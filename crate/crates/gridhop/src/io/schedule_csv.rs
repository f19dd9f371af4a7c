//! Day schedules as CSV, one row per step.
//!
//! Fifteen columns: the step number, four power levels, stored energy,
//! and the nine location/transition indicators written as `0`/`1`.
//! Parsing is strict; a file that round-trips is exactly the schedule
//! that produced it.

use std::io::{Read, Write};

use thiserror::Error;

use crate::core::{NodeSide, PerNode};
use crate::milp::{DispatchSchedule, ScheduleEconomics};

pub const SCHEDULE_CSV_HEADER: &str = "step,discharge_a_mw,discharge_b_mw,charge_a_mw,\
charge_b_mw,energy_mwh,at_node_a,at_node_b,traveling,arriving_a,arriving_b,departing_a,\
departing_b,travel_start_a,travel_start_b";

#[derive(Debug, Error)]
pub enum ScheduleCsvError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("header must be `{SCHEDULE_CSV_HEADER}`, got `{0}`")]
    Header(String),
    #[error("line {line}: step column says {got}, expected {expected}")]
    StepOutOfOrder {
        line: u64,
        expected: usize,
        got: String,
    },
    #[error("line {line}: cannot parse `{value}` in column {column}")]
    BadNumber {
        line: u64,
        column: &'static str,
        value: String,
    },
    #[error("line {line}: indicator column {column} must be 0 or 1, got `{value}`")]
    BadIndicator {
        line: u64,
        column: &'static str,
        value: String,
    },
    #[error("schedule has no steps")]
    Empty,
}

const FLOAT_COLUMNS: [&str; 5] = [
    "discharge_a_mw",
    "discharge_b_mw",
    "charge_a_mw",
    "charge_b_mw",
    "energy_mwh",
];
const FLAG_COLUMNS: [&str; 9] = [
    "at_node_a",
    "at_node_b",
    "traveling",
    "arriving_a",
    "arriving_b",
    "departing_a",
    "departing_b",
    "travel_start_a",
    "travel_start_b",
];

pub fn write_schedule_csv(
    out: impl Write,
    schedule: &DispatchSchedule,
) -> Result<(), ScheduleCsvError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SCHEDULE_CSV_HEADER.split(','))?;
    for h in 0..schedule.steps {
        let flag = |b: bool| if b { "1" } else { "0" }.to_owned();
        let record = [
            (h + 1).to_string(),
            format!("{}", schedule.discharge_mw[NodeSide::A][h]),
            format!("{}", schedule.discharge_mw[NodeSide::B][h]),
            format!("{}", schedule.charge_mw[NodeSide::A][h]),
            format!("{}", schedule.charge_mw[NodeSide::B][h]),
            format!("{}", schedule.energy_mwh[h]),
            flag(schedule.at_node[NodeSide::A][h]),
            flag(schedule.at_node[NodeSide::B][h]),
            flag(schedule.traveling[h]),
            flag(schedule.arriving[NodeSide::A][h]),
            flag(schedule.arriving[NodeSide::B][h]),
            flag(schedule.departing[NodeSide::A][h]),
            flag(schedule.departing[NodeSide::B][h]),
            flag(schedule.travel_start[NodeSide::A][h]),
            flag(schedule.travel_start[NodeSide::B][h]),
        ];
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

/// Parse a schedule CSV back into a full schedule.
///
/// The step length is not stored in the file, so the caller supplies
/// it; economics come back zeroed for the caller to re-price.
pub fn parse_schedule_csv(
    input: impl Read,
    step_hours: f64,
) -> Result<DispatchSchedule, ScheduleCsvError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(input);

    let headers = reader.headers()?.clone();
    let expected: Vec<&str> = SCHEDULE_CSV_HEADER.split(',').collect();
    if headers.iter().collect::<Vec<_>>() != expected {
        return Err(ScheduleCsvError::Header(
            headers.iter().collect::<Vec<_>>().join(","),
        ));
    }

    let mut floats: [Vec<f64>; 5] = Default::default();
    let mut flags: [Vec<bool>; 9] = Default::default();
    let mut steps = 0usize;
    for row in reader.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());

        let step_field = row.get(0).unwrap_or("");
        if step_field.parse::<usize>() != Ok(steps + 1) {
            return Err(ScheduleCsvError::StepOutOfOrder {
                line,
                expected: steps + 1,
                got: step_field.to_owned(),
            });
        }
        for (slot, column) in FLOAT_COLUMNS.iter().enumerate() {
            let value = row.get(1 + slot).unwrap_or("");
            let parsed: f64 = value
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| ScheduleCsvError::BadNumber {
                    line,
                    column,
                    value: value.to_owned(),
                })?;
            floats[slot].push(parsed);
        }
        for (slot, column) in FLAG_COLUMNS.iter().enumerate() {
            let value = row.get(6 + slot).unwrap_or("");
            let parsed = match value {
                "0" => false,
                "1" => true,
                other => {
                    return Err(ScheduleCsvError::BadIndicator {
                        line,
                        column,
                        value: other.to_owned(),
                    })
                }
            };
            flags[slot].push(parsed);
        }
        steps += 1;
    }
    if steps == 0 {
        return Err(ScheduleCsvError::Empty);
    }

    let [dis_a, dis_b, cha_a, cha_b, energy] = floats;
    let [at_a, at_b, traveling, arr_a, arr_b, dep_a, dep_b, ts_a, ts_b] = flags;
    Ok(DispatchSchedule {
        steps,
        step_hours,
        discharge_mw: PerNode::new(dis_a, dis_b),
        charge_mw: PerNode::new(cha_a, cha_b),
        energy_mwh: energy,
        at_node: PerNode::new(at_a, at_b),
        traveling,
        arriving: PerNode::new(arr_a, arr_b),
        departing: PerNode::new(dep_a, dep_b),
        travel_start: PerNode::new(ts_a, ts_b),
        economics: ScheduleEconomics::default(),
    })
}
