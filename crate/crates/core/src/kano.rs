//! Category-aware improvement priorities.
//!
//! Only dissatisfaction is ranked: an item with a negative gap contributes
//! `|gap| * I_d`, scaled by its category multiplier.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instrument::{Item, KanoCategory, SurveyInstrument};
use crate::servqual::{ImportanceWeights, ItemGap, ServqualError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KanoError {
    #[error("invalid multiplier spec `{0}`: expected category=value")]
    Syntax(String),
    #[error("unknown Kano category `{0}`")]
    UnknownCategory(String),
    #[error("multiplier for {category} must be finite and non-negative, got {value}")]
    InvalidMultiplier { category: KanoCategory, value: f64 },
    #[error(transparent)]
    Gap(#[from] ServqualError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KanoMultipliers {
    pub must_be: f64,
    pub performance: f64,
    pub delighter: f64,
    pub indifferent: f64,
}

impl Default for KanoMultipliers {
    fn default() -> Self {
        KanoMultipliers {
            must_be: 2.0,
            performance: 1.0,
            delighter: 0.0,
            indifferent: 0.0,
        }
    }
}

impl KanoMultipliers {
    pub fn get(&self, category: KanoCategory) -> f64 {
        match category {
            KanoCategory::MustBe => self.must_be,
            KanoCategory::Performance => self.performance,
            KanoCategory::Delighter => self.delighter,
            KanoCategory::Indifferent => self.indifferent,
        }
    }

    pub fn set(&mut self, category: KanoCategory, value: f64) -> Result<(), KanoError> {
        if !value.is_finite() || value < 0.0 {
            return Err(KanoError::InvalidMultiplier { category, value });
        }
        *match category {
            KanoCategory::MustBe => &mut self.must_be,
            KanoCategory::Performance => &mut self.performance,
            KanoCategory::Delighter => &mut self.delighter,
            KanoCategory::Indifferent => &mut self.indifferent,
        } = value;
        Ok(())
    }

    pub fn scaled(&self, c: f64) -> Self {
        KanoMultipliers {
            must_be: self.must_be * c,
            performance: self.performance * c,
            delighter: self.delighter * c,
            indifferent: self.indifferent * c,
        }
    }
}

impl fmt::Display for KanoMultipliers {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = KanoCategory::ALL
            .iter()
            .map(|c| format!("{}={}", c.token(), self.get(*c)))
            .collect();
        f.write_str(&parts.join(","))
    }
}

/// Parses `must_be=2,performance=1,...`; unlisted categories keep their default.
impl FromStr for KanoMultipliers {
    type Err = KanoError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut out = KanoMultipliers::default();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| KanoError::Syntax(part.to_string()))?;
            let category: KanoCategory = key
                .trim()
                .parse()
                .map_err(|_| KanoError::UnknownCategory(key.trim().to_string()))?;
            let value: f64 = value
                .trim()
                .parse()
                .map_err(|_| KanoError::Syntax(part.to_string()))?;
            out.set(category, value)?;
        }
        Ok(out)
    }
}

/// The static category the item carries.
pub fn classify(item: &Item) -> KanoCategory {
    item.kano
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KanoPriority {
    pub item_id: u32,
    pub category: KanoCategory,
    pub raw_contribution: f64,
    pub multiplier: f64,
    pub priority_score: f64,
    pub rank: usize,
}

/// Ranks items by `raw * multiplier`, descending; ties go to the lower item id.
pub fn prioritize(
    gaps: &[ItemGap],
    weights: &ImportanceWeights,
    instrument: &SurveyInstrument,
    multipliers: &KanoMultipliers,
) -> Result<Vec<KanoPriority>, KanoError> {
    let mut out = Vec::with_capacity(gaps.len());
    for g in gaps {
        let item = instrument
            .item(g.item_id)
            .ok_or(ServqualError::UnknownItem(g.item_id))?;
        let category = classify(item);
        let multiplier = multipliers.get(category);
        let raw_contribution = if g.gap < 0.0 {
            -g.gap * weights.get(item.dimension)
        } else {
            0.0
        };
        out.push(KanoPriority {
            item_id: g.item_id,
            category,
            raw_contribution,
            multiplier,
            priority_score: raw_contribution * multiplier,
            rank: 0,
        });
    }
    out.sort_by(|a, b| {
        b.priority_score
            .total_cmp(&a.priority_score)
            .then(a.item_id.cmp(&b.item_id))
    });
    for (i, p) in out.iter_mut().enumerate() {
        p.rank = i + 1;
    }
    Ok(out)
}
