//! Summary statistics behind the exploratory charts: per-threat totals,
//! impact histogram, sector shares, box-plot quartiles and the Pearson
//! correlation matrix.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::ThreatTable;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EdaError {
    #[error("table has no records")]
    EmptyTable,
    #[error("bin count must be at least 1, got {0}")]
    BadBinCount(usize),
    #[error("at least 2 rows are required, got {0}")]
    TooFewRows(usize),
}

pub type Result<T> = std::result::Result<T, EdaError>;

pub const DEFAULT_BINS: usize = 10;
pub const IMPACT_RANGE: (f64, f64) = (0.0, 100.0);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub group_key: String,
    pub attempt_total: u64,
    pub attempt_mean: f64,
    pub impact_mean: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramSpec {
    pub bin_edges: Vec<f64>,
    pub counts: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectorShare {
    pub sector: String,
    pub proportion: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxStats {
    pub group_key: String,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub iqr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    pub variable_names: Vec<String>,
    pub cells: Vec<Vec<f64>>,
    /// `true` for variables with zero variance; their off-diagonal cells hold 0.
    pub zero_variance: Vec<bool>,
}

impl CorrelationMatrix {
    pub fn get(&self, a: &str, b: &str) -> Option<f64> {
        let i = self.variable_names.iter().position(|n| n == a)?;
        let j = self.variable_names.iter().position(|n| n == b)?;
        Some(self.cells[i][j])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdaReport {
    pub group_summaries: Vec<GroupSummary>,
    pub histogram: HistogramSpec,
    pub sector_shares: Vec<SectorShare>,
    pub box_stats: Vec<BoxStats>,
    pub correlation: CorrelationMatrix,
}

/// Groups records by threat type, keys sorted ascending. Each group keeps
/// its members in table order.
fn group_by_threat(table: &ThreatTable) -> Vec<(&str, Vec<usize>)> {
    let mut groups: Vec<(&str, Vec<usize>)> = Vec::new();
    for (i, r) in table.records.iter().enumerate() {
        match groups.iter_mut().find(|(k, _)| *k == r.threat_type) {
            Some((_, members)) => members.push(i),
            None => groups.push((r.threat_type.as_str(), vec![i])),
        }
    }
    groups.sort_by(|a, b| a.0.cmp(b.0));
    groups
}

pub fn summarize_by_threat(table: &ThreatTable) -> Result<Vec<GroupSummary>> {
    if table.is_empty() {
        return Err(EdaError::EmptyTable);
    }
    Ok(group_by_threat(table)
        .into_iter()
        .map(|(key, members)| {
            let count = members.len();
            let attempt_total: u64 = members
                .iter()
                .map(|&i| table.records[i].num_attempts)
                .sum();
            let impact_total: f64 = members
                .iter()
                .map(|&i| table.records[i].impact_level as f64)
                .sum();
            GroupSummary {
                group_key: key.to_string(),
                attempt_total,
                attempt_mean: attempt_total as f64 / count as f64,
                impact_mean: impact_total / count as f64,
                count,
            }
        })
        .collect())
}

/// Equal-width histogram over `[lo, hi]`. Interior edges belong to the bin on
/// their right and `hi` lands in the last bin; values outside the range are
/// not counted.
pub fn histogram(values: &[f64], lo: f64, hi: f64, bins: usize) -> Result<HistogramSpec> {
    if bins == 0 {
        return Err(EdaError::BadBinCount(bins));
    }
    let span = hi - lo;
    let bin_edges: Vec<f64> = (0..=bins)
        .map(|i| lo + span * i as f64 / bins as f64)
        .collect();
    let mut counts = vec![0usize; bins];
    for &v in values {
        if !(v >= lo && v <= hi) {
            continue;
        }
        let mut idx = (((v - lo) * bins as f64 / span).floor() as usize).min(bins - 1);
        // reconcile with the stored edges
        while idx + 1 < bins && v >= bin_edges[idx + 1] {
            idx += 1;
        }
        while idx > 0 && v < bin_edges[idx] {
            idx -= 1;
        }
        counts[idx] += 1;
    }
    Ok(HistogramSpec { bin_edges, counts })
}

pub fn impact_histogram(table: &ThreatTable, bins: usize) -> Result<HistogramSpec> {
    let values: Vec<f64> = table
        .records
        .iter()
        .map(|r| r.impact_level as f64)
        .collect();
    histogram(&values, IMPACT_RANGE.0, IMPACT_RANGE.1, bins)
}

/// Share of records per sector, largest first; ties sorted by name.
pub fn sector_shares(table: &ThreatTable) -> Result<Vec<SectorShare>> {
    if table.is_empty() {
        return Err(EdaError::EmptyTable);
    }
    let mut counts: Vec<(&str, usize)> = Vec::new();
    for r in &table.records {
        match counts.iter_mut().find(|(k, _)| *k == r.targeted_sector) {
            Some((_, c)) => *c += 1,
            None => counts.push((r.targeted_sector.as_str(), 1)),
        }
    }
    counts.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    let n = table.len() as f64;
    Ok(counts
        .into_iter()
        .map(|(sector, c)| SectorShare {
            sector: sector.to_string(),
            proportion: c as f64 / n,
        })
        .collect())
}

/// Quantile of ascending-sorted data by linear interpolation at rank `q·(n−1)`.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty data");
    let rank = q * (sorted.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    let frac = rank - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

pub fn box_stats(group_key: &str, values: &[f64]) -> BoxStats {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let q1 = quantile_sorted(&sorted, 0.25);
    let q3 = quantile_sorted(&sorted, 0.75);
    BoxStats {
        group_key: group_key.to_string(),
        min: sorted[0],
        q1,
        median: quantile_sorted(&sorted, 0.5),
        q3,
        max: sorted[sorted.len() - 1],
        iqr: q3 - q1,
    }
}

pub fn box_stats_by_threat(table: &ThreatTable) -> Result<Vec<BoxStats>> {
    if table.is_empty() {
        return Err(EdaError::EmptyTable);
    }
    Ok(group_by_threat(table)
        .into_iter()
        .map(|(key, members)| {
            let values: Vec<f64> = members
                .iter()
                .map(|&i| table.records[i].num_attempts as f64)
                .collect();
            box_stats(key, &values)
        })
        .collect())
}

/// Pearson coefficient, or `None` when either input has zero variance.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&a, &b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

fn has_variance(v: &[f64]) -> bool {
    v.iter().any(|&x| x != v[0])
}

pub fn correlation(table: &ThreatTable) -> Result<CorrelationMatrix> {
    if table.len() < 2 {
        return Err(EdaError::TooFewRows(table.len()));
    }
    let columns: [Vec<f64>; 3] = [
        table.records.iter().map(|r| r.num_attempts as f64).collect(),
        table.records.iter().map(|r| r.impact_level as f64).collect(),
        table.records.iter().map(|r| r.target as f64).collect(),
    ];
    let zero_variance: Vec<bool> = columns.iter().map(|c| !has_variance(c)).collect();
    let k = columns.len();
    let mut cells = vec![vec![0.0; k]; k];
    for i in 0..k {
        cells[i][i] = 1.0;
        for j in (i + 1)..k {
            let r = if zero_variance[i] || zero_variance[j] {
                0.0
            } else {
                pearson(&columns[i], &columns[j]).unwrap_or(0.0)
            };
            cells[i][j] = r;
            cells[j][i] = r;
        }
    }
    Ok(CorrelationMatrix {
        variable_names: ["num_attempts", "impact_level", "target"]
            .map(String::from)
            .to_vec(),
        cells,
        zero_variance,
    })
}

pub fn report(table: &ThreatTable, bins: usize) -> Result<EdaReport> {
    Ok(EdaReport {
        group_summaries: summarize_by_threat(table)?,
        histogram: impact_histogram(table, bins)?,
        sector_shares: sector_shares(table)?,
        box_stats: box_stats_by_threat(table)?,
        correlation: correlation(table)?,
    })
}
