//! Nodal price CSV: parsing and slicing into day series.
//!
//! The expected shape is the common export format for locational
//! marginal prices: a `timestamp,node_id,lmp_usd_per_mwh` header and
//! one observation per row. Timestamps may carry an offset (RFC 3339)
//! or be naive, in which case they are taken as UTC.

use std::collections::HashMap;
use std::fs::File;
use std::io::Read;
use std::path::Path;

use chrono::{DateTime, NaiveDateTime, Utc};
use thiserror::Error;

use crate::analytics::PriceRecord;
use crate::core::{HorizonConfig, PriceSeries};

pub const LMP_CSV_HEADER: &str = "timestamp,node_id,lmp_usd_per_mwh";

#[derive(Debug, Error)]
pub enum LmpCsvError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("header must be `{LMP_CSV_HEADER}`, got `{0}`")]
    Header(String),
    #[error("line {line}: cannot parse timestamp `{value}`")]
    BadTimestamp { line: u64, value: String },
    #[error("line {line}: cannot parse price `{value}`")]
    BadPrice { line: u64, value: String },
    #[error("line {line}: empty node id")]
    EmptyNode { line: u64 },
    #[error("duplicate observation for node {node} at {timestamp}")]
    Duplicate {
        node: String,
        timestamp: DateTime<Utc>,
    },
    #[error("step of {0} hours is not a whole number of seconds")]
    FractionalSecondStep(f64),
    #[error("no price for node {node} at {timestamp}")]
    MissingStep {
        node: String,
        timestamp: DateTime<Utc>,
    },
    #[error("price series is empty")]
    Empty,
}

/// Accepts RFC 3339 or a naive `YYYY-MM-DDTHH:MM:SS` (also with a
/// space); naive times are read as UTC.
pub fn parse_timestamp(value: &str) -> Option<DateTime<Utc>> {
    if let Ok(ts) = DateTime::parse_from_rfc3339(value) {
        return Some(ts.with_timezone(&Utc));
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S"] {
        if let Ok(naive) = NaiveDateTime::parse_from_str(value, fmt) {
            return Some(naive.and_utc());
        }
    }
    None
}

/// Parse a price CSV, sort by time then node, and reject duplicate
/// (node, timestamp) observations.
pub fn parse_lmp_csv(input: impl Read) -> Result<Vec<PriceRecord>, LmpCsvError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(input);

    let headers = reader.headers()?.clone();
    let expected: Vec<&str> = LMP_CSV_HEADER.split(',').collect();
    if headers.iter().collect::<Vec<_>>() != expected {
        return Err(LmpCsvError::Header(
            headers.iter().collect::<Vec<_>>().join(","),
        ));
    }

    let mut records = Vec::new();
    for row in reader.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        let ts_field = row.get(0).unwrap_or("");
        let node_field = row.get(1).unwrap_or("");
        let price_field = row.get(2).unwrap_or("");

        let timestamp = parse_timestamp(ts_field).ok_or_else(|| LmpCsvError::BadTimestamp {
            line,
            value: ts_field.to_owned(),
        })?;
        if node_field.is_empty() {
            return Err(LmpCsvError::EmptyNode { line });
        }
        let price: f64 = price_field
            .parse()
            .ok()
            .filter(|p: &f64| p.is_finite())
            .ok_or_else(|| LmpCsvError::BadPrice {
                line,
                value: price_field.to_owned(),
            })?;

        records.push(PriceRecord {
            timestamp,
            node_id: node_field.to_owned(),
            lmp_usd_per_mwh: price,
        });
    }

    records.sort_by(|a, b| {
        a.timestamp
            .cmp(&b.timestamp)
            .then_with(|| a.node_id.cmp(&b.node_id))
    });
    for pair in records.windows(2) {
        if pair[0].timestamp == pair[1].timestamp && pair[0].node_id == pair[1].node_id {
            return Err(LmpCsvError::Duplicate {
                node: pair[1].node_id.clone(),
                timestamp: pair[1].timestamp,
            });
        }
    }
    Ok(records)
}

pub fn read_lmp_csv(path: &Path) -> Result<Vec<PriceRecord>, LmpCsvError> {
    parse_lmp_csv(File::open(path)?)
}

/// The step length in whole seconds, or an error if it is fractional.
pub fn step_seconds(horizon: &HorizonConfig) -> Result<i64, LmpCsvError> {
    let exact = horizon.step_hours * 3600.0;
    let rounded = exact.round();
    if (exact - rounded).abs() > 1e-6 || rounded <= 0.0 {
        return Err(LmpCsvError::FractionalSecondStep(horizon.step_hours));
    }
    Ok(rounded as i64)
}

/// Cut one horizon's price series for two nodes out of a record set.
///
/// Every step must have an observation at exactly `day_start + h * step`
/// for both nodes; anything missing is an error rather than a gap fill.
pub fn day_price_series(
    records: &[PriceRecord],
    node_a_id: &str,
    node_b_id: &str,
    day_start: DateTime<Utc>,
    horizon: &HorizonConfig,
) -> Result<PriceSeries, LmpCsvError> {
    let step = step_seconds(horizon)?;
    let mut by_key: HashMap<(&str, i64), f64> = HashMap::new();
    for r in records {
        if r.node_id != node_a_id && r.node_id != node_b_id {
            continue;
        }
        if by_key
            .insert(
                (r.node_id.as_str(), r.timestamp.timestamp()),
                r.lmp_usd_per_mwh,
            )
            .is_some()
        {
            return Err(LmpCsvError::Duplicate {
                node: r.node_id.clone(),
                timestamp: r.timestamp,
            });
        }
    }

    let mut series = (Vec::new(), Vec::new());
    for h in 0..horizon.steps_per_day {
        let ts = day_start.timestamp() + h as i64 * step;
        for (node, out) in [(node_a_id, &mut series.0), (node_b_id, &mut series.1)] {
            match by_key.get(&(node, ts)) {
                Some(&price) => out.push(price),
                None => {
                    return Err(LmpCsvError::MissingStep {
                        node: node.to_owned(),
                        timestamp: DateTime::from_timestamp(ts, 0).expect("in range"),
                    })
                }
            }
        }
    }
    PriceSeries::new(series.0, series.1).map_err(|_| LmpCsvError::Empty)
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;

    const SAMPLE: &str = "\
timestamp,node_id,lmp_usd_per_mwh
2025-07-01T00:00:00,N1,10.5
2025-07-01T00:00:00,N2,-3.25
2025-07-01T06:00:00,N1,42
2025-07-01T06:00:00,N2,40
";

    #[test]
    fn parses_and_sorts() {
        let shuffled = "\
timestamp,node_id,lmp_usd_per_mwh
2025-07-01T06:00:00,N2,40
2025-07-01T00:00:00,N1,10.5
2025-07-01T06:00:00,N1,42
2025-07-01T00:00:00,N2,-3.25
";
        let records = parse_lmp_csv(shuffled.as_bytes()).unwrap();
        assert_eq!(records.len(), 4);
        assert_eq!(records[0].node_id, "N1");
        assert_eq!(records[0].lmp_usd_per_mwh, 10.5);
        assert_eq!(records[3].node_id, "N2");
        assert_eq!(records[3].lmp_usd_per_mwh, 40.0);
    }

    #[test]
    fn accepts_offset_and_space_timestamps() {
        let csv = "\
timestamp,node_id,lmp_usd_per_mwh
2025-07-01T00:00:00-07:00,N1,1
2025-07-01 08:00:00,N2,2
";
        let records = parse_lmp_csv(csv.as_bytes()).unwrap();
        // Both rows name 07:00/08:00 UTC; the offset row converts.
        assert_eq!(
            records[0].timestamp,
            Utc.with_ymd_and_hms(2025, 7, 1, 7, 0, 0).unwrap()
        );
        assert_eq!(
            records[1].timestamp,
            Utc.with_ymd_and_hms(2025, 7, 1, 8, 0, 0).unwrap()
        );
    }

    #[test]
    fn rejects_wrong_header() {
        let csv = "time,node,price\n2025-07-01T00:00:00,N1,1\n";
        assert!(matches!(
            parse_lmp_csv(csv.as_bytes()),
            Err(LmpCsvError::Header(_))
        ));
    }

    #[test]
    fn rejects_duplicates_and_garbage() {
        let dup = "\
timestamp,node_id,lmp_usd_per_mwh
2025-07-01T00:00:00,N1,1
2025-07-01T00:00:00,N1,2
";
        assert!(matches!(
            parse_lmp_csv(dup.as_bytes()),
            Err(LmpCsvError::Duplicate { .. })
        ));

        let bad_ts = "timestamp,node_id,lmp_usd_per_mwh\nyesterday,N1,1\n";
        assert!(matches!(
            parse_lmp_csv(bad_ts.as_bytes()),
            Err(LmpCsvError::BadTimestamp { line: 2, .. })
        ));

        let bad_price = "timestamp,node_id,lmp_usd_per_mwh\n2025-07-01T00:00:00,N1,NaN\n";
        assert!(matches!(
            parse_lmp_csv(bad_price.as_bytes()),
            Err(LmpCsvError::BadPrice { .. })
        ));
    }

    #[test]
    fn slices_a_day() {
        let records = parse_lmp_csv(SAMPLE.as_bytes()).unwrap();
        let horizon = HorizonConfig {
            step_hours: 6.0,
            steps_per_day: 2,
            day_index: 0,
        };
        let start = Utc.with_ymd_and_hms(2025, 7, 1, 0, 0, 0).unwrap();
        let series = day_price_series(&records, "N1", "N2", start, &horizon).unwrap();
        assert_eq!(series.node(crate::core::NodeSide::A), &[10.5, 42.0]);
        assert_eq!(series.node(crate::core::NodeSide::B), &[-3.25, 40.0]);

        let missing = day_price_series(&records, "N1", "N9", start, &horizon);
        assert!(matches!(missing, Err(LmpCsvError::MissingStep { .. })));
    }
}
