//! Nodal price statistics: where and how often the spread shows up.
//!
//! Everything works on hourly averages in UTC. Records from the two
//! nodes are bucketed by hour, hours covered by only one node are
//! dropped (and counted), and the signed difference feeds histogram,
//! monthly exceedance and correlation summaries.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use chrono::{DateTime, Datelike, NaiveDate, TimeZone, Utc};
use serde::Serialize;
use thiserror::Error;

/// One price observation for one node.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PriceRecord {
    pub timestamp: DateTime<Utc>,
    pub node_id: String,
    pub lmp_usd_per_mwh: f64,
}

#[derive(Debug, Error, PartialEq)]
pub enum AnalyticsError {
    #[error("no records for node {0}")]
    NoData(String),
    #[error("a histogram needs at least two bin edges")]
    EdgesTooFew,
    #[error("bin edges must increase strictly (edge {0} does not)")]
    EdgesNotIncreasing(usize),
    #[error("value {0} is not finite")]
    NonFiniteValue(usize),
    #[error("the two series cover different months")]
    MonthKeysDiffer,
    #[error("correlation needs at least two months, got {0}")]
    TooFewMonths(usize),
    #[error("correlation undefined for a constant series")]
    ZeroVariance,
}

/// Hourly price difference between the two nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HourlyDiffPoint {
    pub hour_start: DateTime<Utc>,
    /// Mean price at the first node over the hour.
    pub price_a_usd_per_mwh: f64,
    /// Mean price at the second node over the hour.
    pub price_b_usd_per_mwh: f64,
    /// Signed difference, first minus second.
    pub diff_usd_per_mwh: f64,
}

/// Hour-by-hour spread between two nodes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HourlyDiffSeries {
    pub node_a_id: String,
    pub node_b_id: String,
    pub points: Vec<HourlyDiffPoint>,
    /// Hours covered by one node but not the other.
    pub dropped_hours: usize,
}

fn hour_key(ts: DateTime<Utc>) -> i64 {
    ts.timestamp().div_euclid(3600)
}

fn hour_start(key: i64) -> DateTime<Utc> {
    Utc.timestamp_opt(key * 3600, 0)
        .single()
        .expect("hour key in range")
}

fn hourly_means(records: &[PriceRecord], node_id: &str) -> BTreeMap<i64, (f64, u32)> {
    let mut buckets: BTreeMap<i64, (f64, u32)> = BTreeMap::new();
    for r in records.iter().filter(|r| r.node_id == node_id) {
        let entry = buckets.entry(hour_key(r.timestamp)).or_insert((0.0, 0));
        entry.0 += r.lmp_usd_per_mwh;
        entry.1 += 1;
    }
    buckets
}

/// Hourly signed price difference (`node_a` minus `node_b`).
///
/// Sub-hourly records are averaged within the hour. Hours observed at
/// only one of the nodes are left out and reported in `dropped_hours`.
pub fn hourly_diff(
    records: &[PriceRecord],
    node_a_id: &str,
    node_b_id: &str,
) -> Result<HourlyDiffSeries, AnalyticsError> {
    let a = hourly_means(records, node_a_id);
    if a.is_empty() {
        return Err(AnalyticsError::NoData(node_a_id.to_owned()));
    }
    let b = hourly_means(records, node_b_id);
    if b.is_empty() {
        return Err(AnalyticsError::NoData(node_b_id.to_owned()));
    }

    let mut points = Vec::new();
    let mut dropped = 0usize;
    for (&key, &(sum_a, n_a)) in &a {
        match b.get(&key) {
            Some(&(sum_b, n_b)) => {
                let price_a = sum_a / n_a as f64;
                let price_b = sum_b / n_b as f64;
                points.push(HourlyDiffPoint {
                    hour_start: hour_start(key),
                    price_a_usd_per_mwh: price_a,
                    price_b_usd_per_mwh: price_b,
                    diff_usd_per_mwh: price_a - price_b,
                });
            }
            None => dropped += 1,
        }
    }
    dropped += b.keys().filter(|k| !a.contains_key(k)).count();

    Ok(HourlyDiffSeries {
        node_a_id: node_a_id.to_owned(),
        node_b_id: node_b_id.to_owned(),
        points,
        dropped_hours: dropped,
    })
}

/// Counts per half-open bin `[edge[i], edge[i+1])`, with everything
/// below the first edge and at or above the last kept separately so no
/// value is lost.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub underflow: u64,
    pub overflow: u64,
}

impl Histogram {
    pub fn total(&self) -> u64 {
        self.underflow + self.overflow + self.counts.iter().sum::<u64>()
    }
}

/// Bin a set of price differences.
pub fn price_diff_histogram(values: &[f64], edges: &[f64]) -> Result<Histogram, AnalyticsError> {
    if edges.len() < 2 {
        return Err(AnalyticsError::EdgesTooFew);
    }
    for i in 1..edges.len() {
        // partial_cmp so a NaN edge is rejected, not waved through.
        if edges[i].partial_cmp(&edges[i - 1]) != Some(Ordering::Greater) {
            return Err(AnalyticsError::EdgesNotIncreasing(i));
        }
    }
    let mut counts = vec![0u64; edges.len() - 1];
    let mut underflow = 0u64;
    let mut overflow = 0u64;
    for (i, &v) in values.iter().enumerate() {
        if !v.is_finite() {
            return Err(AnalyticsError::NonFiniteValue(i));
        }
        if v < edges[0] {
            underflow += 1;
        } else if v >= edges[edges.len() - 1] {
            overflow += 1;
        } else {
            // partition_point gives the first edge above v; the bin is
            // the one that starts at the edge before it.
            let bin = edges.partition_point(|&e| e <= v) - 1;
            counts[bin] += 1;
        }
    }
    Ok(Histogram {
        edges: edges.to_vec(),
        counts,
        underflow,
        overflow,
    })
}

/// Calendar month in UTC.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct MonthKey {
    pub year: i32,
    pub month: u32,
}

impl MonthKey {
    pub fn of(ts: DateTime<Utc>) -> Self {
        MonthKey {
            year: ts.year(),
            month: ts.month(),
        }
    }

    fn hours(&self) -> u32 {
        let start = NaiveDate::from_ymd_opt(self.year, self.month, 1).expect("valid month start");
        let next = if self.month == 12 {
            NaiveDate::from_ymd_opt(self.year + 1, 1, 1)
        } else {
            NaiveDate::from_ymd_opt(self.year, self.month + 1, 1)
        }
        .expect("valid next month");
        (next - start).num_days() as u32 * 24
    }
}

impl std::fmt::Display for MonthKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

/// How often a month's hourly spread cleared a threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonthlyExceedance {
    pub month: MonthKey,
    pub hours_observed: u32,
    /// Hours with |difference| strictly above the threshold.
    pub hours_exceeding: u32,
    pub fraction: f64,
    /// Set when under 90% of the month's hours have data.
    pub low_coverage: bool,
}

/// Per-month count of hours whose absolute spread exceeds `threshold`.
pub fn monthly_exceedance(points: &[HourlyDiffPoint], threshold: f64) -> Vec<MonthlyExceedance> {
    let mut months: BTreeMap<MonthKey, (u32, u32)> = BTreeMap::new();
    for p in points {
        let entry = months.entry(MonthKey::of(p.hour_start)).or_insert((0, 0));
        entry.0 += 1;
        if p.diff_usd_per_mwh.abs() > threshold {
            entry.1 += 1;
        }
    }
    months
        .into_iter()
        .map(|(month, (observed, exceeding))| MonthlyExceedance {
            month,
            hours_observed: observed,
            hours_exceeding: exceeding,
            fraction: exceeding as f64 / observed as f64,
            low_coverage: (observed as f64) < 0.9 * month.hours() as f64,
        })
        .collect()
}

/// Pearson correlation between two monthly series.
///
/// The series must cover exactly the same months in the same order.
pub fn series_correlation(
    a: &[(MonthKey, f64)],
    b: &[(MonthKey, f64)],
) -> Result<f64, AnalyticsError> {
    if a.len() != b.len() || a.iter().zip(b).any(|(x, y)| x.0 != y.0) {
        return Err(AnalyticsError::MonthKeysDiffer);
    }
    if a.len() < 2 {
        return Err(AnalyticsError::TooFewMonths(a.len()));
    }
    let n = a.len() as f64;
    let mean_a: f64 = a.iter().map(|p| p.1).sum::<f64>() / n;
    let mean_b: f64 = b.iter().map(|p| p.1).sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var_a = 0.0;
    let mut var_b = 0.0;
    for (x, y) in a.iter().zip(b) {
        let dx = x.1 - mean_a;
        let dy = y.1 - mean_b;
        cov += dx * dy;
        var_a += dx * dx;
        var_b += dy * dy;
    }
    if var_a == 0.0 || var_b == 0.0 {
        return Err(AnalyticsError::ZeroVariance);
    }
    // Rounding can push the ratio a few ulps past 1; the true value
    // never leaves [-1, 1].
    Ok((cov / (var_a * var_b).sqrt()).clamp(-1.0, 1.0))
}
