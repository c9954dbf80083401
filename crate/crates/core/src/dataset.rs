//! Tabular threat records: CSV ingestion, null auditing, one-hot encoding and
//! seeded train/test splitting.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DatasetError {
    #[error("input contains no data rows")]
    EmptyInput,
    #[error("header is missing required column {0:?}")]
    MissingColumn(String),
    #[error("malformed row {row}: {reason}")]
    MalformedRow { row: usize, reason: String },
    #[error("table has no records")]
    EmptyTable,
    #[error("split ratio {0} must lie strictly between 0 and 1")]
    BadRatio(f64),
    #[error("at least 2 rows are required, got {0}")]
    TooFewRows(usize),
    #[error("csv error: {0}")]
    Csv(String),
}

impl From<csv::Error> for DatasetError {
    fn from(e: csv::Error) -> Self {
        DatasetError::Csv(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, DatasetError>;

/// The five columns of a threat table, in canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Field {
    ThreatType,
    TargetedSector,
    NumAttempts,
    ImpactLevel,
    Target,
}

impl Field {
    pub const ALL: [Field; 5] = [
        Field::ThreatType,
        Field::TargetedSector,
        Field::NumAttempts,
        Field::ImpactLevel,
        Field::Target,
    ];

    /// Column title as it appears in the CSV header.
    pub fn header(self) -> &'static str {
        match self {
            Field::ThreatType => "Type of Threat",
            Field::TargetedSector => "Targeted Sector",
            Field::NumAttempts => "Number of Attempts",
            Field::ImpactLevel => "Impact Level",
            Field::Target => "Target",
        }
    }

    /// Snake-case identifier used in JSON output and feature names.
    pub fn key(self) -> &'static str {
        match self {
            Field::ThreatType => "threat_type",
            Field::TargetedSector => "targeted_sector",
            Field::NumAttempts => "num_attempts",
            Field::ImpactLevel => "impact_level",
            Field::Target => "target",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThreatRecord {
    pub threat_type: String,
    pub targeted_sector: String,
    pub num_attempts: u64,
    pub impact_level: u8,
    pub target: u8,
}

impl ThreatRecord {
    pub fn new(
        threat_type: impl Into<String>,
        targeted_sector: impl Into<String>,
        num_attempts: u64,
        impact_level: u8,
        target: u8,
    ) -> Self {
        ThreatRecord {
            threat_type: threat_type.into(),
            targeted_sector: targeted_sector.into(),
            num_attempts,
            impact_level,
            target,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThreatTable {
    pub records: Vec<ThreatRecord>,
    pub source_name: String,
}

impl ThreatTable {
    pub fn new(source_name: impl Into<String>, records: Vec<ThreatRecord>) -> Self {
        ThreatTable {
            records,
            source_name: source_name.into(),
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// A header-resolved table of untyped cells, one `[String; 5]` per data row
/// in [`Field::ALL`] order. Used for null auditing before typed parsing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawTable {
    pub rows: Vec<[String; 5]>,
    pub source_name: String,
}

/// Per-column count of missing cells.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NullReport {
    pub threat_type: usize,
    pub targeted_sector: usize,
    pub num_attempts: usize,
    pub impact_level: usize,
    pub target: usize,
}

impl NullReport {
    pub fn get(&self, field: Field) -> usize {
        match field {
            Field::ThreatType => self.threat_type,
            Field::TargetedSector => self.targeted_sector,
            Field::NumAttempts => self.num_attempts,
            Field::ImpactLevel => self.impact_level,
            Field::Target => self.target,
        }
    }

    fn bump(&mut self, field: Field) {
        match field {
            Field::ThreatType => self.threat_type += 1,
            Field::TargetedSector => self.targeted_sector += 1,
            Field::NumAttempts => self.num_attempts += 1,
            Field::ImpactLevel => self.impact_level += 1,
            Field::Target => self.target += 1,
        }
    }

    pub fn total(&self) -> usize {
        Field::ALL.iter().map(|&f| self.get(f)).sum()
    }

    pub fn is_clean(&self) -> bool {
        self.total() == 0
    }
}

/// Empty, whitespace-only, `NA` and `null` (any case) count as missing.
pub fn is_null_cell(cell: &str) -> bool {
    let t = cell.trim();
    t.is_empty() || t.eq_ignore_ascii_case("na") || t.eq_ignore_ascii_case("null")
}

/// Reads the CSV into untyped cells, resolving the five required columns by
/// case-insensitive header match. Extra columns are ignored.
pub fn parse_raw_csv(text: &str, source_name: &str) -> Result<RawTable> {
    if text.trim().is_empty() {
        return Err(DatasetError::EmptyInput);
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(text.as_bytes());

    let headers = reader.headers()?.clone();
    let mut positions = [0usize; 5];
    for (slot, field) in positions.iter_mut().zip(Field::ALL) {
        *slot = headers
            .iter()
            .position(|h| h.trim().eq_ignore_ascii_case(field.header()))
            .ok_or_else(|| DatasetError::MissingColumn(field.header().to_string()))?;
    }

    let width = headers.len();
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let row = i + 1;
        if record.len() == 1 && record.get(0).is_some_and(|c| c.trim().is_empty()) {
            // blank line
            continue;
        }
        if record.len() != width {
            return Err(DatasetError::MalformedRow {
                row,
                reason: format!("expected {width} fields, found {}", record.len()),
            });
        }
        let cells = positions.map(|p| record.get(p).unwrap_or_default().to_string());
        rows.push(cells);
    }
    if rows.is_empty() {
        return Err(DatasetError::EmptyInput);
    }
    Ok(RawTable {
        rows,
        source_name: source_name.to_string(),
    })
}

/// Counts missing cells per column.
pub fn validate_no_nulls(raw: &RawTable) -> NullReport {
    let mut report = NullReport::default();
    for row in &raw.rows {
        for (cell, field) in row.iter().zip(Field::ALL) {
            if is_null_cell(cell) {
                report.bump(field);
            }
        }
    }
    report
}

impl RawTable {
    pub fn null_report(&self) -> NullReport {
        validate_no_nulls(self)
    }

    /// Converts cells to typed records. Missing or out-of-range values are
    /// rejected as malformed rows; nothing is imputed.
    pub fn into_typed(self) -> Result<ThreatTable> {
        let mut records = Vec::with_capacity(self.rows.len());
        for (i, cells) in self.rows.iter().enumerate() {
            records.push(typed_record(i + 1, cells)?);
        }
        Ok(ThreatTable {
            records,
            source_name: self.source_name,
        })
    }
}

fn typed_record(row: usize, cells: &[String; 5]) -> Result<ThreatRecord> {
    let bad = |reason: String| DatasetError::MalformedRow { row, reason };
    for (cell, field) in cells.iter().zip(Field::ALL) {
        if is_null_cell(cell) {
            return Err(bad(format!("missing value in column {:?}", field.header())));
        }
    }
    let int = |field: Field, cell: &str| -> Result<i64> {
        cell.trim()
            .parse::<i64>()
            .map_err(|_| bad(format!("{:?} is not an integer: {cell:?}", field.header())))
    };

    let attempts = int(Field::NumAttempts, &cells[2])?;
    if attempts < 0 {
        return Err(bad(format!("negative attempt count {attempts}")));
    }
    let impact = int(Field::ImpactLevel, &cells[3])?;
    if !(0..=100).contains(&impact) {
        return Err(bad(format!("impact level {impact} outside [0, 100]")));
    }
    let target = int(Field::Target, &cells[4])?;
    if target != 0 && target != 1 {
        return Err(bad(format!("target {target} is not 0 or 1")));
    }
    Ok(ThreatRecord {
        threat_type: cells[0].trim().to_string(),
        targeted_sector: cells[1].trim().to_string(),
        num_attempts: attempts as u64,
        impact_level: impact as u8,
        target: target as u8,
    })
}

pub fn parse_threat_csv(text: &str, source_name: &str) -> Result<ThreatTable> {
    parse_raw_csv(text, source_name)?.into_typed()
}

/// Writes the table back out with the canonical header.
pub fn write_threat_csv(table: &ThreatTable) -> Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(Field::ALL.map(Field::header))?;
    for r in &table.records {
        writer.write_record([
            r.threat_type.clone(),
            r.targeted_sector.clone(),
            r.num_attempts.to_string(),
            r.impact_level.to_string(),
            r.target.to_string(),
        ])?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| DatasetError::Csv(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv writer emits utf-8"))
}

/// One-hot vocabulary for a categorical column, in first-appearance order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryEncoder {
    pub field: String,
    pub levels: Vec<String>,
}

impl CategoryEncoder {
    fn fit<'a>(field: Field, values: impl Iterator<Item = &'a str>) -> Self {
        let mut levels: Vec<String> = Vec::new();
        for v in values {
            if !levels.iter().any(|l| l == v) {
                levels.push(v.to_string());
            }
        }
        CategoryEncoder {
            field: field.key().to_string(),
            levels,
        }
    }

    pub fn index_of(&self, value: &str) -> Option<usize> {
        self.levels.iter().position(|l| l == value)
    }
}

/// Affine map `(x - offset) / divisor` applied to one numeric column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnScaling {
    pub column: String,
    pub offset: f64,
    pub divisor: f64,
}

impl ColumnScaling {
    fn identity(field: Field) -> Self {
        ColumnScaling {
            column: field.key().to_string(),
            offset: 0.0,
            divisor: 1.0,
        }
    }

    fn min_max(field: Field, values: impl Iterator<Item = f64>) -> Self {
        let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        });
        let span = hi - lo;
        ColumnScaling {
            column: field.key().to_string(),
            offset: lo,
            divisor: if span > 0.0 { span } else { 1.0 },
        }
    }

    pub fn apply(&self, x: f64) -> f64 {
        (x - self.offset) / self.divisor
    }
}

/// Everything needed to turn a [`ThreatRecord`] into a feature row.
///
/// Layout: threat-type indicators, sector indicators, then `num_attempts`
/// and `impact_level`. Categories unseen at fit time encode as an all-zero
/// indicator block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSchema {
    pub column_names: Vec<String>,
    pub encoders: Vec<CategoryEncoder>,
    pub scaling: Vec<ColumnScaling>,
}

impl FeatureSchema {
    pub fn fit(table: &ThreatTable, scale_numeric: bool) -> Result<Self> {
        if table.is_empty() {
            return Err(DatasetError::EmptyTable);
        }
        let recs = &table.records;
        let threat = CategoryEncoder::fit(
            Field::ThreatType,
            recs.iter().map(|r| r.threat_type.as_str()),
        );
        let sector = CategoryEncoder::fit(
            Field::TargetedSector,
            recs.iter().map(|r| r.targeted_sector.as_str()),
        );
        let scaling = if scale_numeric {
            vec![
                ColumnScaling::min_max(
                    Field::NumAttempts,
                    recs.iter().map(|r| r.num_attempts as f64),
                ),
                ColumnScaling::min_max(
                    Field::ImpactLevel,
                    recs.iter().map(|r| r.impact_level as f64),
                ),
            ]
        } else {
            vec![
                ColumnScaling::identity(Field::NumAttempts),
                ColumnScaling::identity(Field::ImpactLevel),
            ]
        };

        let mut column_names = Vec::new();
        for enc in [&threat, &sector] {
            for level in &enc.levels {
                column_names.push(format!("{}={}", enc.field, level));
            }
        }
        column_names.push(Field::NumAttempts.key().to_string());
        column_names.push(Field::ImpactLevel.key().to_string());

        Ok(FeatureSchema {
            column_names,
            encoders: vec![threat, sector],
            scaling,
        })
    }

    pub fn width(&self) -> usize {
        self.column_names.len()
    }

    pub fn transform_record(&self, record: &ThreatRecord) -> Vec<f64> {
        let mut row = Vec::with_capacity(self.width());
        for (enc, value) in self
            .encoders
            .iter()
            .zip([&record.threat_type, &record.targeted_sector])
        {
            let hit = enc.index_of(value);
            row.extend((0..enc.levels.len()).map(|i| if Some(i) == hit { 1.0 } else { 0.0 }));
        }
        row.push(self.scaling[0].apply(record.num_attempts as f64));
        row.push(self.scaling[1].apply(record.impact_level as f64));
        row
    }

    pub fn transform(&self, table: &ThreatTable) -> Vec<Vec<f64>> {
        table
            .records
            .iter()
            .map(|r| self.transform_record(r))
            .collect()
    }

    /// Recovers the category strings from a row's indicator blocks.
    pub fn decode_categories(&self, row: &[f64]) -> Vec<Option<String>> {
        let mut start = 0;
        self.encoders
            .iter()
            .map(|enc| {
                let block = &row[start..start + enc.levels.len()];
                start += enc.levels.len();
                block
                    .iter()
                    .position(|&v| v == 1.0)
                    .map(|i| enc.levels[i].clone())
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodedDataset {
    #[serde(flatten)]
    pub schema: FeatureSchema,
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<u8>,
}

impl EncodedDataset {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn width(&self) -> usize {
        self.schema.width()
    }

    /// Rows selected by `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> EncodedDataset {
        EncodedDataset {
            schema: self.schema.clone(),
            features: indices.iter().map(|&i| self.features[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("encoded dataset serializes")
    }
}

pub fn encode(table: &ThreatTable, scale_numeric: bool) -> Result<EncodedDataset> {
    let schema = FeatureSchema::fit(table, scale_numeric)?;
    let features = schema.transform(table);
    let labels = table.records.iter().map(|r| r.target).collect();
    Ok(EncodedDataset {
        schema,
        features,
        labels,
    })
}

pub const DEFAULT_SPLIT_RATIO: f64 = 0.8;

#[derive(Debug, Clone, PartialEq)]
pub struct SplitPair {
    pub train: EncodedDataset,
    pub test: EncodedDataset,
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
    pub seed: u64,
    pub ratio: f64,
}

/// Number of training rows for `n` rows at `ratio`: `⌈ratio·n⌉`, kept within
/// `[1, n-1]` so neither side is empty. The small slack absorbs products like
/// `0.8 * 4980` landing a hair above an integer.
pub fn train_size(n: usize, ratio: f64) -> usize {
    let raw = (ratio * n as f64 - 1e-9).ceil().max(0.0) as usize;
    raw.clamp(1, n - 1)
}

/// Seeded permutation of `0..n` cut into (train, test) index lists.
pub fn split_indices(n: usize, ratio: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(DatasetError::BadRatio(ratio));
    }
    if n < 2 {
        return Err(DatasetError::TooFewRows(n));
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let test = order.split_off(train_size(n, ratio));
    Ok((order, test))
}

pub fn split(data: &EncodedDataset, ratio: f64, seed: u64) -> Result<SplitPair> {
    let (train_indices, test_indices) = split_indices(data.len(), ratio, seed)?;
    Ok(SplitPair {
        train: data.subset(&train_indices),
        test: data.subset(&test_indices),
        train_indices,
        test_indices,
        seed,
        ratio,
    })
}
