//! House of quality: customer requirements weighted onto technical
//! requirements through a 0/1/3/9 relationship matrix, plus a correlation
//! roof among the technical requirements.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum QfdError {
    #[error("invalid house-of-quality document: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("relationship matrix has {found} rows, expected {expected} (one per customer requirement)")]
    RowCount { expected: usize, found: usize },
    #[error("relationship row {row} has {found} cells, expected {expected} (one per technical requirement)")]
    ColumnCount { row: usize, expected: usize, found: usize },
    #[error("relationship cell ({row}, {col}) has illegal strength {value}; allowed: 0, 1, 3, 9")]
    IllegalStrength { row: usize, col: usize, value: i64 },
    #[error("duplicate {kind} id `{id}`")]
    DuplicateId { kind: &'static str, id: String },
    #[error("customer requirement `{id}` has invalid importance {value}")]
    InvalidImportance { id: String, value: f64 },
    #[error("roof entry ({i}, {j}) is out of range for {n} technical requirements")]
    RoofOutOfRange { i: usize, j: usize, n: usize },
    #[error("roof entry ({i}, {j}) repeats an earlier pair")]
    RoofDuplicate { i: usize, j: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomerRequirement {
    pub id: String,
    pub name: String,
    pub importance: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TechRequirement {
    pub id: String,
    pub name: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "i64")]
pub enum RelationshipStrength {
    None,
    Weak,
    Medium,
    Strong,
}

impl RelationshipStrength {
    pub fn value(self) -> u8 {
        match self {
            RelationshipStrength::None => 0,
            RelationshipStrength::Weak => 1,
            RelationshipStrength::Medium => 3,
            RelationshipStrength::Strong => 9,
        }
    }
}

impl From<RelationshipStrength> for u8 {
    fn from(s: RelationshipStrength) -> u8 {
        s.value()
    }
}

impl TryFrom<i64> for RelationshipStrength {
    type Error = i64;

    fn try_from(v: i64) -> Result<Self, i64> {
        match v {
            0 => Ok(RelationshipStrength::None),
            1 => Ok(RelationshipStrength::Weak),
            3 => Ok(RelationshipStrength::Medium),
            9 => Ok(RelationshipStrength::Strong),
            other => Err(other),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RoofCorrelation {
    Positive,
    None,
    Negative,
}

/// One roof cell; `i < j`, 1-based technical requirement positions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoofEntry {
    pub i: usize,
    pub j: usize,
    pub sign: RoofCorrelation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TechnicalImportance {
    pub tech_id: String,
    pub name: String,
    pub absolute: f64,
    pub relative_pct: f64,
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HouseOfQuality {
    pub name: Option<String>,
    pub customer_reqs: Vec<CustomerRequirement>,
    pub tech_reqs: Vec<TechRequirement>,
    pub relationships: Vec<Vec<RelationshipStrength>>,
    pub roof: Vec<RoofEntry>,
    /// Competitor panels, echoed verbatim.
    pub benchmarks: Option<serde_json::Value>,
    /// Critical-to-quality tree, echoed verbatim.
    pub ctq_tree: Option<serde_json::Value>,
    pub technical_importance: Vec<TechnicalImportance>,
    /// Every absolute weight is zero; relative weights are all reported as 0.
    pub degenerate: bool,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawHoq {
    #[serde(default)]
    name: Option<String>,
    customer_reqs: Vec<CustomerRequirement>,
    tech_reqs: Vec<TechRequirement>,
    relationships: Vec<Vec<i64>>,
    #[serde(default)]
    roof: Vec<RoofEntry>,
    #[serde(default)]
    benchmarks: Option<serde_json::Value>,
    #[serde(default)]
    ctq_tree: Option<serde_json::Value>,
}

fn check_unique<'a>(kind: &'static str, ids: impl Iterator<Item = &'a str>) -> Result<(), QfdError> {
    let mut seen = HashSet::new();
    for id in ids {
        if !seen.insert(id) {
            return Err(QfdError::DuplicateId { kind, id: id.to_string() });
        }
    }
    Ok(())
}

/// Parses, validates and evaluates a house-of-quality definition.
pub fn build_hoq(json: &str) -> Result<HouseOfQuality, QfdError> {
    let raw: RawHoq = serde_json::from_str(json)?;
    check_unique("customer requirement", raw.customer_reqs.iter().map(|c| c.id.as_str()))?;
    check_unique("technical requirement", raw.tech_reqs.iter().map(|t| t.id.as_str()))?;
    for c in &raw.customer_reqs {
        if !c.importance.is_finite() || c.importance < 0.0 {
            return Err(QfdError::InvalidImportance { id: c.id.clone(), value: c.importance });
        }
    }
    let (m, t) = (raw.customer_reqs.len(), raw.tech_reqs.len());
    if raw.relationships.len() != m {
        return Err(QfdError::RowCount { expected: m, found: raw.relationships.len() });
    }
    let mut relationships = Vec::with_capacity(m);
    for (r, row) in raw.relationships.iter().enumerate() {
        if row.len() != t {
            return Err(QfdError::ColumnCount { row: r + 1, expected: t, found: row.len() });
        }
        let parsed = row
            .iter()
            .enumerate()
            .map(|(c, &v)| {
                RelationshipStrength::try_from(v)
                    .map_err(|value| QfdError::IllegalStrength { row: r + 1, col: c + 1, value })
            })
            .collect::<Result<Vec<_>, _>>()?;
        relationships.push(parsed);
    }
    let mut roof = Vec::with_capacity(raw.roof.len());
    let mut pairs = HashSet::new();
    for e in raw.roof {
        let (i, j) = (e.i.min(e.j), e.i.max(e.j));
        if i == 0 || i == j || j > t {
            return Err(QfdError::RoofOutOfRange { i: e.i, j: e.j, n: t });
        }
        if !pairs.insert((i, j)) {
            return Err(QfdError::RoofDuplicate { i, j });
        }
        roof.push(RoofEntry { i, j, sign: e.sign });
    }
    roof.sort_by_key(|e| (e.i, e.j));

    let mut hoq = HouseOfQuality {
        name: raw.name,
        customer_reqs: raw.customer_reqs,
        tech_reqs: raw.tech_reqs,
        relationships,
        roof,
        benchmarks: raw.benchmarks,
        ctq_tree: raw.ctq_tree,
        technical_importance: Vec::new(),
        degenerate: false,
    };
    hoq.technical_importance = technical_importance(&hoq);
    hoq.degenerate = hoq.technical_importance.iter().all(|w| w.absolute == 0.0);
    Ok(hoq)
}

/// `absolute_j = Σ_i importance_i * strength_ij`; ranks by absolute weight,
/// ties to the lower technical index.
pub fn technical_importance(hoq: &HouseOfQuality) -> Vec<TechnicalImportance> {
    let absolutes: Vec<f64> = (0..hoq.tech_reqs.len())
        .map(|j| {
            hoq.customer_reqs
                .iter()
                .zip(&hoq.relationships)
                .map(|(c, row)| c.importance * f64::from(row[j].value()))
                .sum()
        })
        .collect();
    let total: f64 = absolutes.iter().sum();
    let mut order: Vec<usize> = (0..absolutes.len()).collect();
    order.sort_by(|&a, &b| absolutes[b].total_cmp(&absolutes[a]).then(a.cmp(&b)));
    let mut ranks = vec![0; absolutes.len()];
    for (pos, &j) in order.iter().enumerate() {
        ranks[j] = pos + 1;
    }
    hoq.tech_reqs
        .iter()
        .enumerate()
        .map(|(j, tr)| TechnicalImportance {
            tech_id: tr.id.clone(),
            name: tr.name.clone(),
            absolute: absolutes[j],
            relative_pct: if total > 0.0 { absolutes[j] / total * 100.0 } else { 0.0 },
            rank: ranks[j],
        })
        .collect()
}

/// Negatively correlated technical pairs, `(i, j)` 1-based with `i < j`.
pub fn roof_conflicts(hoq: &HouseOfQuality) -> Vec<(usize, usize)> {
    hoq.roof
        .iter()
        .filter(|e| e.sign == RoofCorrelation::Negative)
        .map(|e| (e.i, e.j))
        .collect()
}
