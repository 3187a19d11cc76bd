//! Pareto ranking of dissatisfaction and the fishbone cause taxonomy.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instrument::SurveyInstrument;
use crate::servqual::{ImportanceWeights, ItemGap, ServqualError};

pub const DEFAULT_PARETO_THRESHOLD: f64 = 80.0;

/// Branch, cause, sub-cause.
pub const MAX_FISHBONE_DEPTH: usize = 3;

#[derive(Debug, Error)]
pub enum RootCauseError {
    #[error("pareto threshold must lie in (0, 100], got {0}")]
    Threshold(f64),
    #[error(transparent)]
    Gap(#[from] ServqualError),
    #[error("invalid fishbone document: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("fishbone effect must not be empty")]
    EmptyEffect,
    #[error("duplicate fishbone branch `{0}`")]
    DuplicateBranch(String),
    #[error("fishbone branch `{branch}` nests deeper than {MAX_FISHBONE_DEPTH} levels")]
    TooDeep { branch: String },
    #[error("fishbone branch `{branch}` references unknown item {item_id}")]
    UnknownItem { branch: String, item_id: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContributionWeighting {
    /// `|gap| * I_d`.
    #[default]
    Importance,
    /// `|gap|`.
    Unweighted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Contribution {
    pub item_id: u32,
    pub label: String,
    pub magnitude: f64,
}

/// One contribution per negative gap, in input order.
pub fn dissatisfaction_contributions(
    gaps: &[ItemGap],
    weights: &ImportanceWeights,
    instrument: &SurveyInstrument,
    weighting: ContributionWeighting,
) -> Result<Vec<Contribution>, RootCauseError> {
    let mut out = Vec::new();
    for g in gaps {
        let item = instrument
            .item(g.item_id)
            .ok_or(ServqualError::UnknownItem(g.item_id))?;
        if g.gap >= 0.0 {
            continue;
        }
        let magnitude = match weighting {
            ContributionWeighting::Importance => -g.gap * weights.get(item.dimension),
            ContributionWeighting::Unweighted => -g.gap,
        };
        out.push(Contribution {
            item_id: g.item_id,
            label: item.prompt.clone(),
            magnitude,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoRow {
    pub rank: usize,
    pub item_id: u32,
    pub label: String,
    pub magnitude: f64,
    pub cumulative: f64,
    pub cumulative_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoTable {
    pub threshold_pct: f64,
    pub rows: Vec<ParetoRow>,
    /// 1-based rank of the first row reaching the threshold; `None` when empty.
    pub vital_few_cutoff: Option<usize>,
    pub total: f64,
    /// No dissatisfaction to rank.
    pub empty: bool,
}

impl ParetoTable {
    pub fn vital_few(&self) -> &[ParetoRow] {
        &self.rows[..self.vital_few_cutoff.unwrap_or(0)]
    }
}

/// Sorts contributions descending (ties to the lower item id) and accumulates.
pub fn pareto(contribs: &[Contribution], threshold_pct: f64) -> Result<ParetoTable, RootCauseError> {
    if !(threshold_pct > 0.0 && threshold_pct <= 100.0) {
        return Err(RootCauseError::Threshold(threshold_pct));
    }
    let mut sorted = contribs.to_vec();
    sorted.sort_by(|a, b| b.magnitude.total_cmp(&a.magnitude).then(a.item_id.cmp(&b.item_id)));

    let mut running = Vec::with_capacity(sorted.len());
    let mut acc = 0.0;
    for c in &sorted {
        acc += c.magnitude;
        running.push(acc);
    }
    let total = acc;
    let rows: Vec<ParetoRow> = sorted
        .into_iter()
        .zip(running)
        .enumerate()
        .map(|(i, (c, cumulative))| ParetoRow {
            rank: i + 1,
            item_id: c.item_id,
            label: c.label,
            magnitude: c.magnitude,
            cumulative,
            // An all-zero table is fully "explained" from the first row.
            cumulative_pct: if total > 0.0 { cumulative / total * 100.0 } else { 100.0 },
        })
        .collect();
    let vital_few_cutoff = rows
        .iter()
        .position(|r| r.cumulative_pct >= threshold_pct)
        .map(|i| i + 1);
    Ok(ParetoTable {
        threshold_pct,
        empty: rows.is_empty(),
        rows,
        vital_few_cutoff,
        total,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cause {
    pub name: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub causes: Vec<Cause>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Branch {
    pub name: String,
    #[serde(default)]
    pub causes: Vec<Cause>,
    /// Optional link from the branch to questionnaire items.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub items: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FishboneTree {
    pub effect: String,
    pub branches: Vec<Branch>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawCause {
    Leaf(String),
    Node {
        name: String,
        #[serde(default)]
        causes: Vec<RawCause>,
    },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBranch {
    name: String,
    #[serde(default)]
    causes: Vec<RawCause>,
    #[serde(default)]
    items: Vec<u32>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFishbone {
    effect: String,
    #[serde(default)]
    branches: Vec<RawBranch>,
}

fn convert(raw: RawCause, depth: usize, branch: &str) -> Result<Cause, RootCauseError> {
    if depth > MAX_FISHBONE_DEPTH {
        return Err(RootCauseError::TooDeep { branch: branch.to_string() });
    }
    Ok(match raw {
        RawCause::Leaf(name) => Cause { name, causes: Vec::new() },
        RawCause::Node { name, causes } => Cause {
            name,
            causes: causes
                .into_iter()
                .map(|c| convert(c, depth + 1, branch))
                .collect::<Result<_, _>>()?,
        },
    })
}

/// Causes may be plain strings or `{"name", "causes"}` objects.
pub fn build_fishbone(json: &str) -> Result<FishboneTree, RootCauseError> {
    let raw: RawFishbone = serde_json::from_str(json)?;
    if raw.effect.trim().is_empty() {
        return Err(RootCauseError::EmptyEffect);
    }
    let mut seen = HashSet::new();
    let mut branches = Vec::with_capacity(raw.branches.len());
    for b in raw.branches {
        if !seen.insert(b.name.trim().to_lowercase()) {
            return Err(RootCauseError::DuplicateBranch(b.name));
        }
        let causes = b
            .causes
            .into_iter()
            .map(|c| convert(c, 2, &b.name))
            .collect::<Result<_, _>>()?;
        branches.push(Branch { name: b.name, causes, items: b.items });
    }
    Ok(FishboneTree { effect: raw.effect, branches })
}

impl FishboneTree {
    /// Checks every branch item link against `instrument`.
    pub fn check_items(&self, instrument: &SurveyInstrument) -> Result<(), RootCauseError> {
        for b in &self.branches {
            if let Some(&item_id) = b.items.iter().find(|&&id| instrument.item(id).is_none()) {
                return Err(RootCauseError::UnknownItem { branch: b.name.clone(), item_id });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchMagnitude {
    pub branch: String,
    pub item_ids: Vec<u32>,
    pub magnitude: f64,
}

/// Summed contribution per branch, for branches that carry item links.
pub fn branch_magnitudes(tree: &FishboneTree, contribs: &[Contribution]) -> Vec<BranchMagnitude> {
    tree.branches
        .iter()
        .filter(|b| !b.items.is_empty())
        .map(|b| BranchMagnitude {
            branch: b.name.clone(),
            item_ids: b.items.clone(),
            magnitude: contribs
                .iter()
                .filter(|c| b.items.contains(&c.item_id))
                .map(|c| c.magnitude)
                .sum(),
        })
        .collect()
}
