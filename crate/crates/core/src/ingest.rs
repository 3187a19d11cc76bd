//! Response files: parsing, row-level validation and synthetic generation.
//!
//! Likert files carry a `respondent_id,q<id>...` header in instrument order;
//! importance files carry `respondent_id,tangibles,reliability,responsiveness,assurance,empathy`
//! and every row must allocate exactly 100 points in multiples of five.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instrument::{Dimension, SurveyInstrument};

/// Column order of importance-allocation files.
pub const IMPORTANCE_COLUMNS: [Dimension; 5] = [
    Dimension::Tangibles,
    Dimension::Reliability,
    Dimension::Responsiveness,
    Dimension::Assurance,
    Dimension::Empathy,
];

/// Points each importance row must allocate.
pub const IMPORTANCE_TOTAL: i64 = 100;

/// Allocation granularity for importance rows.
pub const IMPORTANCE_STEP: i64 = 5;

/// Slack allowed when checking that `n * mean` is a whole number.
pub const INTEGRALITY_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("malformed CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("header mismatch: expected `{expected}`, found `{found}`")]
    HeaderMismatch { expected: String, found: String },
    #[error("file is empty")]
    Empty,
    #[error("no rows accepted ({} rejected)", .0.rejected_rows)]
    NoAcceptedRows(ValidationReport),
    #[error("row rejected under fail policy: {0}")]
    Rejected(RowError),
    #[error("item {item}: infeasible target mean {mean}: {reason}")]
    InfeasibleTarget { item: u32, mean: f64, reason: String },
    #[error("expected {expected} target means, got {found}")]
    TargetCount { expected: usize, found: usize },
    #[error("synthetic generation needs at least one respondent")]
    NoRespondents,
    #[error("synthetic generation supports Likert kinds only, not {0}")]
    UnsupportedKind(ResponseKind),
    #[error("item means file: {0}")]
    MeansFile(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResponseKind {
    Expectation,
    Perception,
    Importance,
}

impl ResponseKind {
    pub fn is_likert(self) -> bool {
        !matches!(self, ResponseKind::Importance)
    }
}

impl fmt::Display for ResponseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ResponseKind::Expectation => "expectation",
            ResponseKind::Perception => "perception",
            ResponseKind::Importance => "importance",
        })
    }
}

impl FromStr for ResponseKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "expectation" => Ok(ResponseKind::Expectation),
            "perception" => Ok(ResponseKind::Perception),
            "importance" => Ok(ResponseKind::Importance),
            other => Err(format!("unknown response kind `{other}`")),
        }
    }
}

/// What to do with a row that has a missing or invalid cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MissingPolicy {
    /// Listwise deletion: reject the row, keep going.
    #[default]
    DropRow,
    /// Abort on the first bad row.
    Fail,
}

impl FromStr for MissingPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "drop_row" | "drop-row" => Ok(MissingPolicy::DropRow),
            "fail" => Ok(MissingPolicy::Fail),
            other => Err(format!("unknown missing policy `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowErrorCode {
    WrongFieldCount,
    MissingValue,
    NotInteger,
    OutOfRange,
    SumNot100,
    NegativeAllocation,
    NotMultipleOfFive,
}

impl RowErrorCode {
    pub fn as_str(self) -> &'static str {
        match self {
            RowErrorCode::WrongFieldCount => "wrong_field_count",
            RowErrorCode::MissingValue => "missing_value",
            RowErrorCode::NotInteger => "not_integer",
            RowErrorCode::OutOfRange => "out_of_range",
            RowErrorCode::SumNot100 => "sum_not_100",
            RowErrorCode::NegativeAllocation => "negative_allocation",
            RowErrorCode::NotMultipleOfFive => "not_multiple_of_five",
        }
    }
}

/// One rejected cell or row. `row` is the 1-based data row (header excluded).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowError {
    pub row: usize,
    pub column: Option<String>,
    pub code: RowErrorCode,
    pub message: String,
}

impl fmt::Display for RowError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.column {
            Some(col) => write!(f, "row {} column {}: [{}] {}", self.row, col, self.code.as_str(), self.message),
            None => write!(f, "row {}: [{}] {}", self.row, self.code.as_str(), self.message),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub row_errors: Vec<RowError>,
    pub accepted_rows: usize,
    pub rejected_rows: usize,
}

impl ValidationReport {
    pub fn raw_rows(&self) -> usize {
        self.accepted_rows + self.rejected_rows
    }

    pub fn is_clean(&self) -> bool {
        self.rejected_rows == 0
    }
}

/// Why an importance row is invalid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImportanceViolation {
    WrongLength(usize),
    SumNot100 { sum: i64 },
    Negative { column: usize, value: i64 },
    NotMultipleOfFive { column: usize, value: i64 },
}

impl ImportanceViolation {
    pub fn code(self) -> RowErrorCode {
        match self {
            ImportanceViolation::WrongLength(_) => RowErrorCode::WrongFieldCount,
            ImportanceViolation::SumNot100 { .. } => RowErrorCode::SumNot100,
            ImportanceViolation::Negative { .. } => RowErrorCode::NegativeAllocation,
            ImportanceViolation::NotMultipleOfFive { .. } => RowErrorCode::NotMultipleOfFive,
        }
    }
}

impl fmt::Display for ImportanceViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            ImportanceViolation::WrongLength(n) => write!(f, "expected 5 allocations, found {n}"),
            ImportanceViolation::SumNot100 { sum } => write!(f, "allocations sum to {sum}, not 100"),
            ImportanceViolation::Negative { value, .. } => write!(f, "negative allocation {value}"),
            ImportanceViolation::NotMultipleOfFive { value, .. } => {
                write!(f, "allocation {value} is not a multiple of five")
            }
        }
    }
}

/// Checks one importance allocation. The sum rule is checked before the
/// per-cell rules, so a row failing both reports the sum.
pub fn validate_importance_row(row: &[i64]) -> Result<(), ImportanceViolation> {
    if row.len() != IMPORTANCE_COLUMNS.len() {
        return Err(ImportanceViolation::WrongLength(row.len()));
    }
    let sum: i64 = row.iter().sum();
    if sum != IMPORTANCE_TOTAL {
        return Err(ImportanceViolation::SumNot100 { sum });
    }
    for (column, &value) in row.iter().enumerate() {
        if value < 0 {
            return Err(ImportanceViolation::Negative { column, value });
        }
        if value % IMPORTANCE_STEP != 0 {
            return Err(ImportanceViolation::NotMultipleOfFive { column, value });
        }
    }
    Ok(())
}

/// A validated N x k matrix of integer answers of one kind.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResponseSet {
    kind: ResponseKind,
    instrument_id: String,
    columns: Vec<String>,
    respondent_ids: Vec<String>,
    values: Vec<i64>,
}

impl ResponseSet {
    pub fn kind(&self) -> ResponseKind {
        self.kind
    }

    pub fn instrument_id(&self) -> &str {
        &self.instrument_id
    }

    /// Column ids, excluding `respondent_id`.
    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn respondent_ids(&self) -> &[String] {
        &self.respondent_ids
    }

    /// Item ids for Likert sets, parsed from the `q<id>` column names.
    pub fn item_ids(&self) -> Vec<u32> {
        if !self.kind.is_likert() {
            return Vec::new();
        }
        self.columns
            .iter()
            .filter_map(|c| c.strip_prefix('q').and_then(|id| id.parse().ok()))
            .collect()
    }

    pub fn respondents(&self) -> usize {
        self.respondent_ids.len()
    }

    pub fn width(&self) -> usize {
        self.columns.len()
    }

    pub fn row(&self, r: usize) -> &[i64] {
        let k = self.width();
        &self.values[r * k..(r + 1) * k]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[i64]> {
        self.values.chunks(self.width())
    }

    pub fn column(&self, c: usize) -> impl Iterator<Item = i64> + '_ {
        self.rows().map(move |r| r[c])
    }

    /// Exact integer column total.
    pub fn column_sum(&self, c: usize) -> i64 {
        self.column(c).sum()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("respondent_id");
        for c in &self.columns {
            out.push(',');
            out.push_str(c);
        }
        out.push('\n');
        for (id, row) in self.respondent_ids.iter().zip(self.rows()) {
            out.push_str(id);
            for v in row {
                out.push(',');
                out.push_str(&v.to_string());
            }
            out.push('\n');
        }
        out
    }
}

/// Expected column ids (excluding `respondent_id`) for a kind.
pub fn expected_columns(instrument: &SurveyInstrument, kind: ResponseKind) -> Vec<String> {
    if kind.is_likert() {
        instrument.items().iter().map(|i| format!("q{}", i.id)).collect()
    } else {
        IMPORTANCE_COLUMNS.iter().map(|d| d.token().to_string()).collect()
    }
}

fn header_line(columns: &[String]) -> String {
    std::iter::once("respondent_id".to_string())
        .chain(columns.iter().cloned())
        .collect::<Vec<_>>()
        .join(",")
}

/// Parses a response file against `instrument`.
///
/// Rejected rows are listed in the [`ValidationReport`]; under
/// [`MissingPolicy::Fail`] the first rejection aborts instead.
pub fn parse_response_file(
    bytes: &[u8],
    instrument: &SurveyInstrument,
    kind: ResponseKind,
    policy: MissingPolicy,
) -> Result<(ResponseSet, ValidationReport), IngestError> {
    let bytes = bytes.strip_prefix(b"\xEF\xBB\xBF").unwrap_or(bytes);
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(bytes);
    let mut records = reader.records();

    let columns = expected_columns(instrument, kind);
    let header = records.next().ok_or(IngestError::Empty)??;
    let found: Vec<&str> = header.iter().collect();
    let expected_header = header_line(&columns);
    if found.join(",") != expected_header {
        return Err(IngestError::HeaderMismatch {
            expected: expected_header,
            found: found.join(","),
        });
    }

    let scale = instrument.scale();
    let k = columns.len();
    let mut report = ValidationReport::default();
    let mut respondent_ids = Vec::new();
    let mut values = Vec::new();

    for (idx, record) in records.enumerate() {
        let row = idx + 1;
        let record = record?;
        let mut errors = Vec::new();
        let mut parsed = Vec::with_capacity(k);

        if record.len() != k + 1 {
            errors.push(RowError {
                row,
                column: None,
                code: RowErrorCode::WrongFieldCount,
                message: format!("expected {} fields, found {}", k + 1, record.len()),
            });
        } else {
            for (col, cell) in columns.iter().zip(record.iter().skip(1)) {
                let cell_error = |code, message| RowError {
                    row,
                    column: Some(col.clone()),
                    code,
                    message,
                };
                if cell.is_empty() {
                    errors.push(cell_error(RowErrorCode::MissingValue, "empty cell".into()));
                    continue;
                }
                let Ok(v) = cell.parse::<i64>() else {
                    errors.push(cell_error(
                        RowErrorCode::NotInteger,
                        format!("`{cell}` is not a plain integer"),
                    ));
                    continue;
                };
                if kind.is_likert() && !scale.contains(v) {
                    errors.push(cell_error(
                        RowErrorCode::OutOfRange,
                        format!("{v} outside scale {}..={}", scale.min, scale.max),
                    ));
                    continue;
                }
                parsed.push(v);
            }
            if errors.is_empty() && !kind.is_likert() {
                if let Err(violation) = validate_importance_row(&parsed) {
                    let column = match violation {
                        ImportanceViolation::Negative { column, .. }
                        | ImportanceViolation::NotMultipleOfFive { column, .. } => {
                            Some(columns[column].clone())
                        }
                        _ => None,
                    };
                    errors.push(RowError {
                        row,
                        column,
                        code: violation.code(),
                        message: violation.to_string(),
                    });
                }
            }
        }

        if errors.is_empty() {
            report.accepted_rows += 1;
            respondent_ids.push(record.get(0).unwrap_or_default().to_string());
            values.extend(parsed);
        } else {
            if policy == MissingPolicy::Fail {
                return Err(IngestError::Rejected(errors.swap_remove(0)));
            }
            report.rejected_rows += 1;
            report.row_errors.extend(errors);
        }
    }

    if report.accepted_rows == 0 {
        return Err(IngestError::NoAcceptedRows(report));
    }

    let set = ResponseSet {
        kind,
        instrument_id: instrument.identity(),
        columns,
        respondent_ids,
        values,
    };
    Ok((set, report))
}

/// Builds a Likert response set whose column means equal `targets` exactly.
///
/// Each column starts at `floor(mean)` and the remaining units are handed out
/// one at a time to seeded-random cells still below the scale maximum.
pub fn generate_synthetic(
    instrument: &SurveyInstrument,
    kind: ResponseKind,
    targets: &[f64],
    n: usize,
    seed: u64,
) -> Result<ResponseSet, IngestError> {
    if !kind.is_likert() {
        return Err(IngestError::UnsupportedKind(kind));
    }
    if targets.len() != instrument.len() {
        return Err(IngestError::TargetCount {
            expected: instrument.len(),
            found: targets.len(),
        });
    }
    if n == 0 {
        return Err(IngestError::NoRespondents);
    }
    let scale = instrument.scale();
    let n_i = n as i64;
    let mut sums = Vec::with_capacity(targets.len());
    for (item, &mean) in instrument.items().iter().zip(targets) {
        let infeasible = |reason: String| IngestError::InfeasibleTarget {
            item: item.id,
            mean,
            reason,
        };
        if !mean.is_finite() {
            return Err(infeasible("not finite".into()));
        }
        let exact = mean * n as f64;
        let sum = exact.round();
        if (exact - sum).abs() > INTEGRALITY_TOLERANCE {
            return Err(infeasible(format!("{n} x mean = {exact} is not an integer")));
        }
        let sum = sum as i64;
        if sum < n_i * scale.min || sum > n_i * scale.max {
            return Err(infeasible(format!(
                "column sum {sum} outside [{}, {}]",
                n_i * scale.min,
                n_i * scale.max
            )));
        }
        sums.push(sum);
    }

    let k = targets.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = vec![0i64; n * k];
    for (c, &sum) in sums.iter().enumerate() {
        let base = sum.div_euclid(n_i);
        let mut residual = sum - base * n_i;
        let mut column = vec![base; n];
        let mut open: Vec<usize> = (0..n).filter(|&r| column[r] < scale.max).collect();
        while residual > 0 {
            let pick = rng.random_range(0..open.len());
            let r = open[pick];
            column[r] += 1;
            if column[r] == scale.max {
                open.swap_remove(pick);
            }
            residual -= 1;
        }
        for (r, v) in column.into_iter().enumerate() {
            values[r * k + c] = v;
        }
    }

    Ok(ResponseSet {
        kind,
        instrument_id: instrument.identity(),
        columns: expected_columns(instrument, kind),
        respondent_ids: (1..=n).map(|i| format!("r{i:03}")).collect(),
        values,
    })
}

/// Reads an `item_id,mean` table (extra columns ignored) into instrument
/// order. Every instrument item must appear exactly once.
pub fn parse_item_means(bytes: &[u8], instrument: &SurveyInstrument) -> Result<Vec<f64>, IngestError> {
    let bad = |m: String| IngestError::MeansFile(m);
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(bytes);
    let headers = reader.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| bad(format!("missing `{name}` column")))
    };
    let (id_col, mean_col) = (col("item_id")?, col("mean")?);
    let mut means: Vec<Option<f64>> = vec![None; instrument.len()];
    for (idx, record) in reader.records().enumerate() {
        let record = record?;
        let row = idx + 1;
        let field = |c: usize| record.get(c).unwrap_or_default();
        let id: u32 = field(id_col)
            .parse()
            .map_err(|_| bad(format!("row {row}: bad item_id `{}`", field(id_col))))?;
        let mean: f64 = field(mean_col)
            .parse()
            .ok()
            .filter(|m: &f64| m.is_finite())
            .ok_or_else(|| bad(format!("row {row}: bad mean `{}`", field(mean_col))))?;
        let pos = instrument
            .items()
            .iter()
            .position(|i| i.id == id)
            .ok_or_else(|| bad(format!("row {row}: item {id} is not in the instrument")))?;
        if means[pos].replace(mean).is_some() {
            return Err(bad(format!("row {row}: item {id} listed twice")));
        }
    }
    means
        .iter()
        .zip(instrument.items())
        .map(|(m, item)| m.ok_or_else(|| bad(format!("no mean for item {}", item.id))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instrument::{build_instrument, master_catalog, select_items};

    fn three_items() -> SurveyInstrument {
        build_instrument(
            r#"{"items":[
                {"id":1,"prompt":"a","dimension":"reliability","kano":"must_be"},
                {"id":2,"prompt":"b","dimension":"empathy","kano":"performance"},
                {"id":3,"prompt":"c","dimension":"tangibles","kano":"delighter"}]}"#,
        )
        .unwrap()
    }

    const IMPORTANCE_HEADER: &str = "respondent_id,tangibles,reliability,responsiveness,assurance,empathy\n";

    #[test]
    fn importance_row_rules() {
        assert_eq!(validate_importance_row(&[20, 20, 20, 20, 20]), Ok(()));
        assert_eq!(validate_importance_row(&[40, 30, 10, 10, 10]), Ok(()));
        assert_eq!(
            validate_importance_row(&[33, 33, 34, 0, 0]),
            Err(ImportanceViolation::NotMultipleOfFive { column: 0, value: 33 })
        );
        assert_eq!(
            validate_importance_row(&[40, 30, 20, 5, 4]),
            Err(ImportanceViolation::SumNot100 { sum: 99 })
        );
        assert_eq!(
            validate_importance_row(&[-5, 105, 0, 0, 0]),
            Err(ImportanceViolation::Negative { column: 0, value: -5 })
        );
        assert_eq!(validate_importance_row(&[100]), Err(ImportanceViolation::WrongLength(1)));
    }

    #[test]
    fn out_of_range_row_is_dropped() {
        let inst = three_items();
        let csv = "respondent_id,q1,q2,q3\na,1,2,3\nb,6,2,3\nc,5,5,5\n";
        let (rs, report) =
            parse_response_file(csv.as_bytes(), &inst, ResponseKind::Expectation, MissingPolicy::DropRow).unwrap();
        assert_eq!(rs.respondents(), 2);
        assert_eq!(report.accepted_rows, 2);
        assert_eq!(report.rejected_rows, 1);
        assert_eq!(report.raw_rows(), 3);
        let err = &report.row_errors[0];
        assert_eq!((err.row, err.column.as_deref(), err.code), (2, Some("q1"), RowErrorCode::OutOfRange));
    }

    #[test]
    fn fail_policy_aborts_on_first_bad_row() {
        let inst = three_items();
        let csv = "respondent_id,q1,q2,q3\na,1,,3\n";
        let err = parse_response_file(csv.as_bytes(), &inst, ResponseKind::Perception, MissingPolicy::Fail).unwrap_err();
        match err {
            IngestError::Rejected(e) => assert_eq!(e.code, RowErrorCode::MissingValue),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn decimals_missing_cells_and_short_rows() {
        let inst = three_items();
        let csv = "respondent_id,q1,q2,q3\r\na,4.0,2,3\r\nb,1,2\r\nc,,2,3\r\nd,2,2,2\r\n";
        let (rs, report) =
            parse_response_file(csv.as_bytes(), &inst, ResponseKind::Expectation, MissingPolicy::DropRow).unwrap();
        assert_eq!(rs.respondents(), 1);
        let codes: Vec<_> = report.row_errors.iter().map(|e| e.code).collect();
        assert_eq!(
            codes,
            vec![RowErrorCode::NotInteger, RowErrorCode::WrongFieldCount, RowErrorCode::MissingValue]
        );
    }

    #[test]
    fn header_mismatch_and_zero_rows() {
        let inst = three_items();
        let bad_header = "respondent_id,q1,q3,q2\na,1,1,1\n";
        assert!(matches!(
            parse_response_file(bad_header.as_bytes(), &inst, ResponseKind::Expectation, MissingPolicy::DropRow),
            Err(IngestError::HeaderMismatch { .. })
        ));
        let all_bad = "respondent_id,q1,q2,q3\na,9,9,9\n";
        assert!(matches!(
            parse_response_file(all_bad.as_bytes(), &inst, ResponseKind::Expectation, MissingPolicy::DropRow),
            Err(IngestError::NoAcceptedRows(r)) if r.rejected_rows == 1
        ));
        assert!(matches!(
            parse_response_file(b"", &inst, ResponseKind::Expectation, MissingPolicy::DropRow),
            Err(IngestError::Empty)
        ));
    }

    #[test]
    fn importance_file_rejects_bad_allocations() {
        let inst = three_items();
        let csv = format!("{IMPORTANCE_HEADER}a,5,40,30,20,5\nb,4,40,30,20,5\nc,10,40,30,20,5\n");
        let (rs, report) =
            parse_response_file(csv.as_bytes(), &inst, ResponseKind::Importance, MissingPolicy::DropRow).unwrap();
        assert_eq!(rs.respondents(), 1);
        assert_eq!(report.rejected_rows, 2);
        assert_eq!(report.row_errors[0].code, RowErrorCode::SumNot100);
        assert_eq!(report.row_errors[1].code, RowErrorCode::SumNot100);

        let csv = format!("{IMPORTANCE_HEADER}a,3,42,30,20,5\n");
        let err = parse_response_file(csv.as_bytes(), &inst, ResponseKind::Importance, MissingPolicy::DropRow)
            .unwrap_err();
        let IngestError::NoAcceptedRows(report) = err else { panic!() };
        assert_eq!(report.row_errors[0].code, RowErrorCode::NotMultipleOfFive);
        assert_eq!(report.row_errors[0].column.as_deref(), Some("tangibles"));
    }

    #[test]
    fn eighty_one_complete_rows() {
        let catalog = master_catalog();
        let keys: Vec<&str> = catalog.iter().take(17).map(|i| i.source_key.as_deref().unwrap()).collect();
        let inst = select_items(&catalog, &keys).unwrap();
        let mut csv = format!("respondent_id,{}\n", (1..=17).map(|i| format!("q{i}")).collect::<Vec<_>>().join(","));
        for r in 0..81 {
            let row: Vec<String> = (0..17).map(|c| ((r + c) % 5 + 1).to_string()).collect();
            csv.push_str(&format!("r{r},{}\n", row.join(",")));
        }
        let (rs, report) =
            parse_response_file(csv.as_bytes(), &inst, ResponseKind::Expectation, MissingPolicy::DropRow).unwrap();
        assert_eq!(rs.respondents(), 81);
        assert!(report.row_errors.is_empty());
    }

    #[test]
    fn synthetic_exact_means() {
        let inst = three_items();
        let rs = generate_synthetic(&inst, ResponseKind::Expectation, &[4.395061728, 5.0, 1.0], 81, 7).unwrap();
        assert_eq!(rs.respondents(), 81);
        assert_eq!(rs.column_sum(0), 356);
        assert_eq!(rs.column_sum(0) as f64 / 81.0, 356.0 / 81.0);
        assert!(rs.column(1).all(|v| v == 5));
        assert!(rs.column(2).all(|v| v == 1));
        assert!(rs.rows().flatten().all(|&v| (1..=5).contains(&v)));

        let again = generate_synthetic(&inst, ResponseKind::Expectation, &[4.395061728, 5.0, 1.0], 81, 7).unwrap();
        assert_eq!(rs, again);
    }

    #[test]
    fn synthetic_ten_fives() {
        let inst = build_instrument(r#"{"items":[{"id":1,"prompt":"a","dimension":"reliability","kano":"must_be"}]}"#)
            .unwrap();
        let rs = generate_synthetic(&inst, ResponseKind::Perception, &[5.0], 10, 0).unwrap();
        assert_eq!(rs.column(0).collect::<Vec<_>>(), vec![5; 10]);
    }

    #[test]
    fn synthetic_infeasible_targets() {
        let inst = three_items();
        let err = generate_synthetic(&inst, ResponseKind::Expectation, &[4.5, 3.0, 3.0], 81, 0).unwrap_err();
        assert!(matches!(err, IngestError::InfeasibleTarget { item: 1, .. }));
        let err = generate_synthetic(&inst, ResponseKind::Expectation, &[3.0, 6.0, 3.0], 10, 0).unwrap_err();
        assert!(matches!(err, IngestError::InfeasibleTarget { item: 2, .. }));
        assert!(matches!(
            generate_synthetic(&inst, ResponseKind::Importance, &[3.0; 3], 10, 0),
            Err(IngestError::UnsupportedKind(_))
        ));
        assert!(matches!(
            generate_synthetic(&inst, ResponseKind::Expectation, &[3.0; 2], 10, 0),
            Err(IngestError::TargetCount { .. })
        ));
    }

    #[test]
    fn csv_round_trip() {
        let inst = three_items();
        let rs = generate_synthetic(&inst, ResponseKind::Perception, &[2.5, 3.0, 4.25], 4, 3).unwrap();
        let text = rs.to_csv();
        let (back, report) =
            parse_response_file(text.as_bytes(), &inst, ResponseKind::Perception, MissingPolicy::Fail).unwrap();
        assert!(report.is_clean());
        assert_eq!(back, rs);
        assert_eq!(back.to_csv(), text);
    }

    #[test]
    fn item_means_table() {
        let inst = build_instrument(
            r#"{"items":[{"id":1,"prompt":"a","dimension":"reliability","kano":"must_be"},
            {"id":2,"prompt":"b","dimension":"empathy","kano":"must_be"}]}"#,
        )
        .unwrap();
        let means = parse_item_means(b"item_id,mean,note\n2,3.5,x\n1,4.25,y\n", &inst).unwrap();
        assert_eq!(means, vec![4.25, 3.5]);
        assert!(parse_item_means(b"item_id,mean\n1,4\n", &inst).is_err());
        assert!(parse_item_means(b"item_id,mean\n1,4\n1,4\n2,3\n", &inst).is_err());
        assert!(parse_item_means(b"item_id,mean\n1,4\n2,3\n3,3\n", &inst).is_err());
        assert!(parse_item_means(b"id,mean\n1,4\n", &inst).is_err());
        assert!(parse_item_means(b"item_id,mean\n1,four\n2,3\n", &inst).is_err());
    }
}
