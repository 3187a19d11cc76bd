//! Perception-minus-expectation gap analysis.
//!
//! Item gaps are taken on mean-level aggregates. A dimension's unweighted
//! score is the mean of its item gaps; its weighted score multiplies that by
//! the dimension's mean importance allocation (points out of 100).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{ResponseSet, IMPORTANCE_COLUMNS, IMPORTANCE_TOTAL};
use crate::instrument::{Dimension, SurveyInstrument};
use crate::psychometrics::{ItemDescriptives, ReliabilityReport};

/// Default allowed drift of the summed importance means away from 100.
pub const DEFAULT_WEIGHT_TOLERANCE: f64 = 0.25;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ServqualError {
    #[error("expectation and perception items differ at position {position}: {expectation:?} vs {perception:?}")]
    ItemMismatch {
        position: usize,
        expectation: Option<u32>,
        perception: Option<u32>,
    },
    #[error("item {0} is not part of the instrument")]
    UnknownItem(u32),
    #[error("dimension {0} has no items")]
    EmptyDimension(Dimension),
    #[error("expected five dimension scores, got {0}")]
    DimensionCount(usize),
    #[error("importance weights need an importance response set")]
    NotImportance,
    #[error("importance weight for {dimension} must be finite and non-negative, got {value}")]
    InvalidWeight { dimension: Dimension, value: f64 },
    #[error("cannot normalize weights that sum to zero")]
    ZeroWeights,
    #[error("invalid weights document: {0}")]
    WeightsFile(String),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct WeightsDoc {
    reliability: f64,
    responsiveness: f64,
    assurance: f64,
    empathy: f64,
    tangibles: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemGap {
    pub item_id: u32,
    pub expectation_mean: f64,
    pub perception_mean: f64,
    pub gap: f64,
}

/// Pairs expectation and perception means item by item: `gap = P - E`.
pub fn item_gaps(
    expect: &[ItemDescriptives],
    perceive: &[ItemDescriptives],
) -> Result<Vec<ItemGap>, ServqualError> {
    let len = expect.len().max(perceive.len());
    (0..len)
        .map(|i| match (expect.get(i), perceive.get(i)) {
            (Some(e), Some(p)) if e.item_id == p.item_id => Ok(ItemGap {
                item_id: e.item_id,
                expectation_mean: e.mean,
                perception_mean: p.mean,
                gap: p.mean - e.mean,
            }),
            (e, p) => Err(ServqualError::ItemMismatch {
                position: i + 1,
                expectation: e.map(|d| d.item_id),
                perception: p.map(|d| d.item_id),
            }),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionWeight {
    pub dimension: Dimension,
    pub mean_points: f64,
}

/// Mean importance allocation per dimension, in [`Dimension::ALL`] order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceWeights {
    pub weights: Vec<DimensionWeight>,
    /// `None` when the weights were supplied directly rather than averaged
    /// from an allocation file.
    pub n_respondents: Option<usize>,
    pub sum_of_means: f64,
    pub normalized: bool,
}

impl ImportanceWeights {
    /// Weights given as `[reliability, responsiveness, assurance, empathy, tangibles]`.
    pub fn from_means(means: [f64; 5]) -> Result<Self, ServqualError> {
        for (dimension, &value) in Dimension::ALL.iter().zip(&means) {
            if !value.is_finite() || value < 0.0 {
                return Err(ServqualError::InvalidWeight {
                    dimension: *dimension,
                    value,
                });
            }
        }
        Ok(Self::build(means, None))
    }

    /// Reads `{"reliability": .., "responsiveness": .., "assurance": .., "empathy": .., "tangibles": ..}`.
    pub fn from_json(json: &str) -> Result<Self, ServqualError> {
        let d: WeightsDoc = serde_json::from_str(json).map_err(|e| ServqualError::WeightsFile(e.to_string()))?;
        Self::from_means([d.reliability, d.responsiveness, d.assurance, d.empathy, d.tangibles])
    }

    fn build(means: [f64; 5], n_respondents: Option<usize>) -> Self {
        ImportanceWeights {
            weights: Dimension::ALL
                .iter()
                .zip(means)
                .map(|(&dimension, mean_points)| DimensionWeight { dimension, mean_points })
                .collect(),
            n_respondents,
            sum_of_means: means.iter().sum(),
            normalized: false,
        }
    }

    pub fn get(&self, dim: Dimension) -> f64 {
        self.weights[dim.index()].mean_points
    }

    pub fn means(&self) -> [f64; 5] {
        let mut out = [0.0; 5];
        for w in &self.weights {
            out[w.dimension.index()] = w.mean_points;
        }
        out
    }

    /// Rescales so the means sum to exactly 100 points.
    pub fn normalized(&self) -> Result<Self, ServqualError> {
        if self.sum_of_means == 0.0 {
            return Err(ServqualError::ZeroWeights);
        }
        let factor = IMPORTANCE_TOTAL as f64 / self.sum_of_means;
        let mut out = Self::build(self.means().map(|m| m * factor), self.n_respondents);
        out.normalized = true;
        Ok(out)
    }

    /// Distance of the summed means from 100.
    pub fn drift(&self) -> f64 {
        (self.sum_of_means - IMPORTANCE_TOTAL as f64).abs()
    }

    pub fn within_tolerance(&self, tolerance: f64) -> bool {
        self.drift() <= tolerance
    }
}

/// Column means of an importance allocation set.
pub fn importance_weights(importance: &ResponseSet) -> Result<ImportanceWeights, ServqualError> {
    if importance.kind().is_likert() {
        return Err(ServqualError::NotImportance);
    }
    let n = importance.respondents();
    let mut means = [0.0; 5];
    for (c, dim) in IMPORTANCE_COLUMNS.iter().enumerate() {
        means[dim.index()] = importance.column_sum(c) as f64 / n as f64;
    }
    Ok(ImportanceWeights::build(means, Some(n)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionScore {
    pub dimension: Dimension,
    pub unweighted: f64,
    pub importance: f64,
    pub weighted: f64,
    pub item_ids: Vec<u32>,
}

pub fn dimension_scores(
    gaps: &[ItemGap],
    weights: &ImportanceWeights,
    instrument: &SurveyInstrument,
) -> Result<Vec<DimensionScore>, ServqualError> {
    let mut members: [Vec<&ItemGap>; 5] = Default::default();
    for g in gaps {
        let item = instrument.item(g.item_id).ok_or(ServqualError::UnknownItem(g.item_id))?;
        members[item.dimension.index()].push(g);
    }
    Dimension::ALL
        .iter()
        .map(|&dimension| {
            let group = &members[dimension.index()];
            if group.is_empty() {
                return Err(ServqualError::EmptyDimension(dimension));
            }
            let unweighted = group.iter().map(|g| g.gap).sum::<f64>() / group.len() as f64;
            let importance = weights.get(dimension);
            Ok(DimensionScore {
                dimension,
                unweighted,
                importance,
                weighted: unweighted * importance,
                item_ids: group.iter().map(|g| g.item_id).collect(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OverallScores {
    /// Σ W_d; the headline score.
    pub weighted_sum: f64,
    /// Σ W_d / 100.
    pub weighted_mean: f64,
    /// Σ Y_d / 5.
    pub unweighted_mean: f64,
}

pub fn overall_scores(dims: &[DimensionScore]) -> Result<OverallScores, ServqualError> {
    if dims.len() != Dimension::ALL.len() {
        return Err(ServqualError::DimensionCount(dims.len()));
    }
    let weighted_sum: f64 = dims.iter().map(|d| d.weighted).sum();
    let unweighted_sum: f64 = dims.iter().map(|d| d.unweighted).sum();
    Ok(OverallScores {
        weighted_sum,
        weighted_mean: weighted_sum / IMPORTANCE_TOTAL as f64,
        unweighted_mean: unweighted_sum / dims.len() as f64,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Satisfaction {
    Satisfied,
    Neutral,
    Dissatisfied,
}

pub fn classify_satisfaction(gap: f64) -> Satisfaction {
    if gap > 0.0 {
        Satisfaction::Satisfied
    } else if gap < 0.0 {
        Satisfaction::Dissatisfied
    } else {
        Satisfaction::Neutral
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityContext {
    pub expectation: Option<ReliabilityReport>,
    pub perception: Option<ReliabilityReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub item_gaps: Vec<ItemGap>,
    pub dimension_scores: Vec<DimensionScore>,
    pub importance: ImportanceWeights,
    pub overall_weighted_sum: f64,
    pub overall_weighted_mean: f64,
    pub unweighted_mean_of_dimensions: f64,
    pub reliability_context: Option<ReliabilityContext>,
}

impl GapReport {
    pub fn overall(&self) -> OverallScores {
        OverallScores {
            weighted_sum: self.overall_weighted_sum,
            weighted_mean: self.overall_weighted_mean,
            unweighted_mean: self.unweighted_mean_of_dimensions,
        }
    }

    pub fn gap(&self, item_id: u32) -> Option<&ItemGap> {
        self.item_gaps.iter().find(|g| g.item_id == item_id)
    }

    pub fn dimension(&self, dim: Dimension) -> &DimensionScore {
        &self.dimension_scores[dim.index()]
    }
}

/// Runs the full gap computation from paired descriptives and weights.
pub fn analyze(
    instrument: &SurveyInstrument,
    expect: &[ItemDescriptives],
    perceive: &[ItemDescriptives],
    weights: &ImportanceWeights,
) -> Result<GapReport, ServqualError> {
    let item_gaps = item_gaps(expect, perceive)?;
    let dimension_scores = dimension_scores(&item_gaps, weights, instrument)?;
    let overall = overall_scores(&dimension_scores)?;
    Ok(GapReport {
        item_gaps,
        dimension_scores,
        importance: weights.clone(),
        overall_weighted_sum: overall.weighted_sum,
        overall_weighted_mean: overall.weighted_mean,
        unweighted_mean_of_dimensions: overall.unweighted_mean,
        reliability_context: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{parse_response_file, MissingPolicy, ResponseKind};
    use crate::instrument::build_instrument;

    fn desc(item_id: u32, mean: f64) -> ItemDescriptives {
        ItemDescriptives { item_id, mean, variance: 0.0, n: 81 }
    }

    fn five_item_instrument() -> SurveyInstrument {
        build_instrument(
            r#"{"items":[
            {"id":1,"prompt":"a","dimension":"reliability","kano":"must_be"},
            {"id":2,"prompt":"b","dimension":"responsiveness","kano":"performance"},
            {"id":3,"prompt":"c","dimension":"assurance","kano":"performance"},
            {"id":4,"prompt":"d","dimension":"empathy","kano":"delighter"},
            {"id":5,"prompt":"e","dimension":"tangibles","kano":"delighter"}]}"#,
        )
        .unwrap()
    }

    #[test]
    fn gap_is_perception_minus_expectation() {
        let gaps = item_gaps(&[desc(1, 4.395061728)], &[desc(1, 4.444444444)]).unwrap();
        assert!((gaps[0].gap - 0.049382716).abs() < 1e-15);
        let gaps = item_gaps(&[desc(12, 3.481481481)], &[desc(12, 2.962962963)]).unwrap();
        assert!((gaps[0].gap + 0.518518518).abs() < 1e-15);
        let same = item_gaps(&[desc(1, 3.0), desc(2, 4.0)], &[desc(1, 3.0), desc(2, 4.0)]).unwrap();
        assert!(same.iter().all(|g| g.gap == 0.0));
    }

    #[test]
    fn mismatched_items_are_rejected() {
        let err = item_gaps(&[desc(1, 3.0), desc(2, 3.0)], &[desc(1, 3.0), desc(3, 3.0)]).unwrap_err();
        assert_eq!(
            err,
            ServqualError::ItemMismatch { position: 2, expectation: Some(2), perception: Some(3) }
        );
        assert!(item_gaps(&[desc(1, 3.0)], &[]).is_err());
    }

    #[test]
    fn single_uniform_importance_row() {
        let inst = five_item_instrument();
        let csv = "respondent_id,tangibles,reliability,responsiveness,assurance,empathy\nx,20,20,20,20,20\n";
        let (rs, _) = parse_response_file(csv.as_bytes(), &inst, ResponseKind::Importance, MissingPolicy::Fail).unwrap();
        let w = importance_weights(&rs).unwrap();
        assert!(w.means().iter().all(|&m| m == 20.0));
        assert_eq!(w.n_respondents, Some(1));
        assert_eq!(w.sum_of_means, 100.0);
    }

    #[test]
    fn importance_columns_map_to_dimensions() {
        let inst = five_item_instrument();
        let csv = "respondent_id,tangibles,reliability,responsiveness,assurance,empathy\nx,5,40,30,15,10\ny,15,40,20,15,10\n";
        let (rs, _) = parse_response_file(csv.as_bytes(), &inst, ResponseKind::Importance, MissingPolicy::Fail).unwrap();
        let w = importance_weights(&rs).unwrap();
        assert_eq!(w.get(Dimension::Tangibles), 10.0);
        assert_eq!(w.get(Dimension::Reliability), 40.0);
        assert_eq!(w.get(Dimension::Responsiveness), 25.0);
    }

    #[test]
    fn weights_validation_and_normalization() {
        assert!(ImportanceWeights::from_means([1.0, -1.0, 0.0, 0.0, 0.0]).is_err());
        assert!(ImportanceWeights::from_means([f64::NAN, 1.0, 0.0, 0.0, 0.0]).is_err());
        let w = ImportanceWeights::from_means([40.0, 30.0, 20.0, 10.0, 5.0]).unwrap();
        assert_eq!(w.sum_of_means, 105.0);
        assert!(!w.within_tolerance(DEFAULT_WEIGHT_TOLERANCE));
        let n = w.normalized().unwrap();
        assert!((n.sum_of_means - 100.0).abs() < 1e-12);
        assert!(n.normalized);
        assert!(ImportanceWeights::from_means([0.0; 5]).unwrap().normalized().is_err());
    }

    #[test]
    fn zero_importance_dimension() {
        let inst = five_item_instrument();
        let e: Vec<_> = (1..=5).map(|i| desc(i, 4.0)).collect();
        let p: Vec<_> = (1..=5).map(|i| desc(i, 3.5)).collect();
        let w = ImportanceWeights::from_means([0.0, 25.0, 25.0, 25.0, 25.0]).unwrap();
        let report = analyze(&inst, &e, &p, &w).unwrap();
        let rel = report.dimension(Dimension::Reliability);
        assert_eq!(rel.unweighted, -0.5);
        assert_eq!(rel.weighted, 0.0);
    }

    #[test]
    fn all_zero_gaps_give_zero_scores() {
        let inst = five_item_instrument();
        let e: Vec<_> = (1..=5).map(|i| desc(i, 3.0)).collect();
        let w = ImportanceWeights::from_means([20.0; 5]).unwrap();
        let r = analyze(&inst, &e, &e, &w).unwrap();
        assert_eq!(
            r.overall(),
            OverallScores { weighted_sum: 0.0, weighted_mean: 0.0, unweighted_mean: 0.0 }
        );
    }

    #[test]
    fn missing_dimension_and_count_errors() {
        let inst = build_instrument(r#"{"items":[{"id":1,"prompt":"a","dimension":"reliability","kano":"must_be"}]}"#).unwrap();
        let w = ImportanceWeights::from_means([20.0; 5]).unwrap();
        let err = analyze(&inst, &[desc(1, 3.0)], &[desc(1, 3.0)], &w).unwrap_err();
        assert_eq!(err, ServqualError::EmptyDimension(Dimension::Responsiveness));
        assert_eq!(overall_scores(&[]), Err(ServqualError::DimensionCount(0)));
        let err = dimension_scores(
            &[ItemGap { item_id: 9, expectation_mean: 1.0, perception_mean: 1.0, gap: 0.0 }],
            &w,
            &inst,
        )
        .unwrap_err();
        assert_eq!(err, ServqualError::UnknownItem(9));
    }

    #[test]
    fn classification_by_sign() {
        assert_eq!(classify_satisfaction(0.049382716), Satisfaction::Satisfied);
        assert_eq!(classify_satisfaction(-1.111111111), Satisfaction::Dissatisfied);
        assert_eq!(classify_satisfaction(0.0), Satisfaction::Neutral);
    }

    #[test]
    fn weights_document() {
        let w = ImportanceWeights::from_json(
            r#"{"tangibles":5,"reliability":40,"responsiveness":25,"assurance":20,"empathy":10}"#,
        )
        .unwrap();
        assert_eq!(w.means(), [40.0, 25.0, 20.0, 10.0, 5.0]);
        assert_eq!(w.n_respondents, None);
        assert!(ImportanceWeights::from_json(r#"{"reliability":40}"#).is_err());
        let extra = r#"{"tangibles":5,"reliability":40,"responsiveness":25,"assurance":20,"empathy":10,"cost":1}"#;
        assert!(ImportanceWeights::from_json(extra).is_err());
    }
}
