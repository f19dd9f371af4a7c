//! The one-day scheduling problem as a mixed-integer linear program:
//! representation, builder, schedule extraction, feasibility re-checks
//! and an MPS exporter.

mod build;
mod instance;
mod mps;
mod schedule;

pub use build::{
    build_day_instance, BuildError, DayContext, DayInstance, FormulationOptions, PresenceLink,
};
pub use instance::{
    Column, DayMeta, MilpInstance, RelOp, Row, VarKind, VarLayout, BINARY_PER_STEP,
    CONTINUOUS_PER_STEP,
};
pub use mps::write_mps;
pub use schedule::{
    check_feasibility, complete_transit_indicators, extract_schedule, price_schedule,
    transit_indicators, ConstraintKind, ConstraintViolation, DispatchSchedule, ExtractError,
    ScheduleEconomics, TransitIndicators, INTEGRALITY_TOL,
};
