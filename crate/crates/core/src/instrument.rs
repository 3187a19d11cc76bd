//! Survey schema: service-quality dimensions, items, Likert scale and Kano
//! categories, plus the built-in master catalog of candidate items.
//!
//! Item order inside a [`SurveyInstrument`] is the canonical order for every
//! downstream computation and for serialization.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

/// Errors raised while building or selecting an instrument.
#[derive(Debug, Error)]
pub enum InstrumentError {
    #[error("instrument definition is not valid JSON: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("instrument has no items")]
    EmptyItems,
    #[error("item at position {position}: duplicate id {id}")]
    DuplicateId { position: usize, id: u32 },
    #[error("item at position {position}: id must be a positive integer")]
    ZeroId { position: usize },
    #[error("item at position {position}: unknown dimension `{token}`")]
    UnknownDimension { position: usize, token: String },
    #[error("item at position {position}: unknown Kano category `{token}`")]
    UnknownKano { position: usize, token: String },
    #[error("invalid scale: min {min} must be below max {max}")]
    InvalidScale { min: i64, max: i64 },
    #[error("unknown catalog key `{0}`")]
    UnknownKey(String),
    #[error("dimension {0} has no items")]
    MissingDimension(Dimension),
}

/// The five service-quality dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dimension {
    Reliability,
    #[serde(alias = "response")]
    Responsiveness,
    Assurance,
    Empathy,
    Tangibles,
}

impl Dimension {
    /// Fixed reporting order.
    pub const ALL: [Dimension; 5] = [
        Dimension::Reliability,
        Dimension::Responsiveness,
        Dimension::Assurance,
        Dimension::Empathy,
        Dimension::Tangibles,
    ];

    pub fn token(self) -> &'static str {
        match self {
            Dimension::Reliability => "reliability",
            Dimension::Responsiveness => "responsiveness",
            Dimension::Assurance => "assurance",
            Dimension::Empathy => "empathy",
            Dimension::Tangibles => "tangibles",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            Dimension::Reliability => "Reliability",
            Dimension::Responsiveness => "Responsiveness",
            Dimension::Assurance => "Assurance",
            Dimension::Empathy => "Empathy",
            Dimension::Tangibles => "Tangibles",
        }
    }

    /// Position in [`Dimension::ALL`].
    pub fn index(self) -> usize {
        match self {
            Dimension::Reliability => 0,
            Dimension::Responsiveness => 1,
            Dimension::Assurance => 2,
            Dimension::Empathy => 3,
            Dimension::Tangibles => 4,
        }
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for Dimension {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "reliability" => Ok(Dimension::Reliability),
            "responsiveness" | "response" => Ok(Dimension::Responsiveness),
            "assurance" => Ok(Dimension::Assurance),
            "empathy" => Ok(Dimension::Empathy),
            "tangibles" => Ok(Dimension::Tangibles),
            other => Err(other.to_string()),
        }
    }
}

/// Kano requirement category.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KanoCategory {
    MustBe,
    Performance,
    Delighter,
    Indifferent,
}

impl KanoCategory {
    pub const ALL: [KanoCategory; 4] = [
        KanoCategory::MustBe,
        KanoCategory::Performance,
        KanoCategory::Delighter,
        KanoCategory::Indifferent,
    ];

    pub fn token(self) -> &'static str {
        match self {
            KanoCategory::MustBe => "must_be",
            KanoCategory::Performance => "performance",
            KanoCategory::Delighter => "delighter",
            KanoCategory::Indifferent => "indifferent",
        }
    }
}

impl fmt::Display for KanoCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for KanoCategory {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace(['-', ' '], "_").as_str() {
            "must_be" | "mustbe" => Ok(KanoCategory::MustBe),
            "performance" | "one_dimensional" => Ok(KanoCategory::Performance),
            "delighter" | "attractive" | "exciting" => Ok(KanoCategory::Delighter),
            "indifferent" => Ok(KanoCategory::Indifferent),
            _ => Err(s.to_string()),
        }
    }
}

fn default_anchor_low() -> String {
    "extremely disagree".to_string()
}

fn default_anchor_high() -> String {
    "extremely agree".to_string()
}

/// Closed integer rating scale.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LikertScale {
    pub min: i64,
    pub max: i64,
    #[serde(default = "default_anchor_low")]
    pub anchor_low: String,
    #[serde(default = "default_anchor_high")]
    pub anchor_high: String,
}

impl Default for LikertScale {
    fn default() -> Self {
        LikertScale {
            min: 1,
            max: 5,
            anchor_low: default_anchor_low(),
            anchor_high: default_anchor_high(),
        }
    }
}

impl LikertScale {
    pub fn new(min: i64, max: i64) -> Result<Self, InstrumentError> {
        let scale = LikertScale {
            min,
            max,
            ..LikertScale::default()
        };
        scale.validate()?;
        Ok(scale)
    }

    fn validate(&self) -> Result<(), InstrumentError> {
        if self.min >= self.max {
            return Err(InstrumentError::InvalidScale {
                min: self.min,
                max: self.max,
            });
        }
        Ok(())
    }

    pub fn contains(&self, value: i64) -> bool {
        (self.min..=self.max).contains(&value)
    }

    /// Largest possible absolute difference between two ratings.
    pub fn span(&self) -> i64 {
        self.max - self.min
    }
}

/// One survey question.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Item {
    pub id: u32,
    pub prompt: String,
    pub dimension: Dimension,
    pub kano: KanoCategory,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_key: Option<String>,
}

/// A validated, immutable survey definition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SurveyInstrument {
    #[serde(skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    scale: LikertScale,
    items: Vec<Item>,
}

// Dimension and Kano are kept as strings here so that bad tokens can be
// reported together with the item position.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInstrument {
    #[serde(default)]
    name: Option<String>,
    #[serde(default)]
    scale: Option<LikertScale>,
    items: Vec<RawItem>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawItem {
    id: u32,
    prompt: String,
    dimension: String,
    kano: String,
    #[serde(default)]
    source_key: Option<String>,
}

impl SurveyInstrument {
    /// Validates items and scale. Positions in errors are 1-based.
    pub fn new(
        name: Option<String>,
        scale: LikertScale,
        items: Vec<Item>,
    ) -> Result<Self, InstrumentError> {
        scale.validate()?;
        if items.is_empty() {
            return Err(InstrumentError::EmptyItems);
        }
        let mut seen = std::collections::BTreeSet::new();
        for (pos, item) in items.iter().enumerate() {
            if item.id == 0 {
                return Err(InstrumentError::ZeroId { position: pos + 1 });
            }
            if !seen.insert(item.id) {
                return Err(InstrumentError::DuplicateId {
                    position: pos + 1,
                    id: item.id,
                });
            }
        }
        Ok(SurveyInstrument { name, scale, items })
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn scale(&self) -> &LikertScale {
        &self.scale
    }

    pub fn items(&self) -> &[Item] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn dimension_order(&self) -> [Dimension; 5] {
        Dimension::ALL
    }

    pub fn item(&self, id: u32) -> Option<&Item> {
        self.items.iter().find(|i| i.id == id)
    }

    pub fn item_ids(&self) -> Vec<u32> {
        self.items.iter().map(|i| i.id).collect()
    }

    /// Items belonging to `dim`, in instrument order.
    pub fn items_in(&self, dim: Dimension) -> impl Iterator<Item = &Item> {
        self.items.iter().filter(move |i| i.dimension == dim)
    }

    pub fn dimension_counts(&self) -> [usize; 5] {
        let mut counts = [0; 5];
        for item in &self.items {
            counts[item.dimension.index()] += 1;
        }
        counts
    }

    /// Gap analysis needs every dimension populated.
    pub fn require_all_dimensions(&self) -> Result<(), InstrumentError> {
        let counts = self.dimension_counts();
        for dim in Dimension::ALL {
            if counts[dim.index()] == 0 {
                return Err(InstrumentError::MissingDimension(dim));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instrument serializes")
    }

    /// Short content digest used to tie response sets and reports to the
    /// instrument they were computed against.
    pub fn identity(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("instrument serializes");
        let digest = Sha256::digest(&canonical);
        format!("sha256:{}", hex::encode(&digest[..8]))
    }
}

/// Parses and validates an instrument definition document.
pub fn build_instrument(json: &str) -> Result<SurveyInstrument, InstrumentError> {
    let raw: RawInstrument = serde_json::from_str(json)?;
    let mut items = Vec::with_capacity(raw.items.len());
    for (pos, it) in raw.items.into_iter().enumerate() {
        let dimension = it
            .dimension
            .parse::<Dimension>()
            .map_err(|token| InstrumentError::UnknownDimension {
                position: pos + 1,
                token,
            })?;
        let kano = it
            .kano
            .parse::<KanoCategory>()
            .map_err(|token| InstrumentError::UnknownKano {
                position: pos + 1,
                token,
            })?;
        items.push(Item {
            id: it.id,
            prompt: it.prompt,
            dimension,
            kano,
            source_key: it.source_key,
        });
    }
    SurveyInstrument::new(raw.name, raw.scale.unwrap_or_default(), items)
}

const CATALOG: [(&str, &str, Dimension, KanoCategory); 28] = {
    use Dimension::*;
    use KanoCategory::*;
    [
        ("employees-appearances", "Employees appearances", Tangibles, Delighter),
        ("visual-aspect-of-equipment", "Visual aspect of equipment", Tangibles, Delighter),
        ("difficulty-to-fill-out-the-repair-order", "Difficulty to fill out the repair order", Tangibles, MustBe),
        ("timely-manner-to-fill-order", "Timely manner to fill order", Tangibles, MustBe),
        ("cleanliness-level-of-waiting-area", "Cleanliness level of waiting area", Tangibles, MustBe),
        ("entertainment-in-waiting-area", "Entertainment in waiting area", Tangibles, Delighter),
        ("comfortable-waiting-area", "Comfortable waiting area", Tangibles, Performance),
        ("error-free-service", "Error free service", Reliability, MustBe),
        ("delivering-service-right-at-the-first-time", "Delivering the service right at the first time", Reliability, MustBe),
        ("accuracy-level-of-diagnosing-and-repair", "Accuracy level of diagnosing and repair", Reliability, Performance),
        ("accuracy-level-of-delivering-the-service", "Accuracy level of delivering the service", Reliability, MustBe),
        ("level-of-customer-privacy", "The level of customer privacy", Reliability, MustBe),
        ("sincere-interest-in-solving-the-problem", "Sincere interest in solving the problem", Reliability, MustBe),
        ("speed-level-of-response", "Speed level of response", Responsiveness, Performance),
        ("accuracy-level-of-response", "Accuracy level of response", Responsiveness, MustBe),
        ("employees-availability-to-assist-the-customer", "Employees availability to assist the customer", Responsiveness, MustBe),
        ("employees-attitude-toward-the-customers", "Employees attitude toward the customers", Responsiveness, Performance),
        ("employees-courtesy", "Employees courtesy", Assurance, Performance),
        ("trusty-employees", "Trusty employees", Assurance, MustBe),
        ("knowledgeable-employees", "Knowledgeable employees", Assurance, Performance),
        ("competent-employees", "Competent employees", Assurance, Performance),
        ("customer-information-is-secure", "Customer information is secure", Assurance, MustBe),
        ("payment-information-is-secure", "Payment information is secure", Assurance, MustBe),
        ("convenient-operating-hours", "Convenient operating hours", Empathy, Performance),
        ("convenient-service-location", "Convenient service location", Empathy, MustBe),
        ("personal-attention", "Personal attention", Empathy, Delighter),
        ("language-used-in-communication", "The difficulty of the language used in communication", Empathy, MustBe),
        ("understanding-customer-needs", "Understanding customer needs", Empathy, Performance),
    ]
};

/// The 28 candidate items for computer-service surveys, ids 1..=28.
pub fn master_catalog() -> Vec<Item> {
    CATALOG
        .iter()
        .enumerate()
        .map(|(i, &(key, prompt, dimension, kano))| Item {
            id: i as u32 + 1,
            prompt: prompt.to_string(),
            dimension,
            kano,
            source_key: Some(key.to_string()),
        })
        .collect()
}

/// Builds an instrument from catalog keys; items are renumbered `1..=k` in
/// selection order.
pub fn select_items(catalog: &[Item], keys: &[&str]) -> Result<SurveyInstrument, InstrumentError> {
    let mut items = Vec::with_capacity(keys.len());
    for (i, key) in keys.iter().enumerate() {
        let found = catalog
            .iter()
            .find(|it| it.source_key.as_deref() == Some(*key))
            .ok_or_else(|| InstrumentError::UnknownKey(key.to_string()))?;
        items.push(Item {
            id: i as u32 + 1,
            ..found.clone()
        });
    }
    SurveyInstrument::new(None, LikertScale::default(), items)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn catalog_item<'a>(catalog: &'a [Item], prompt: &str) -> &'a Item {
        catalog
            .iter()
            .find(|i| i.prompt.eq_ignore_ascii_case(prompt))
            .unwrap_or_else(|| panic!("no catalog item `{prompt}`"))
    }

    #[test]
    fn catalog_has_28_items_with_stable_keys() {
        let catalog = master_catalog();
        assert_eq!(catalog.len(), 28);
        let ids: Vec<u32> = catalog.iter().map(|i| i.id).collect();
        assert_eq!(ids, (1..=28).collect::<Vec<_>>());
        let mut keys: Vec<_> = catalog.iter().map(|i| i.source_key.clone().unwrap()).collect();
        keys.sort();
        keys.dedup();
        assert_eq!(keys.len(), 28);
    }

    #[test]
    fn catalog_dimension_counts() {
        let inst = SurveyInstrument::new(None, LikertScale::default(), master_catalog()).unwrap();
        let counts = inst.dimension_counts();
        assert_eq!(counts[Dimension::Tangibles.index()], 7);
        assert_eq!(counts[Dimension::Reliability.index()], 6);
        assert_eq!(counts[Dimension::Responsiveness.index()], 4);
        assert_eq!(counts[Dimension::Assurance.index()], 6);
        assert_eq!(counts[Dimension::Empathy.index()], 5);
    }

    #[test]
    fn catalog_kano_categories() {
        let catalog = master_catalog();
        let e = catalog_item(&catalog, "Error free service");
        assert_eq!((e.dimension, e.kano), (Dimension::Reliability, KanoCategory::MustBe));
        let s = catalog_item(&catalog, "Speed level of response");
        assert_eq!((s.dimension, s.kano), (Dimension::Responsiveness, KanoCategory::Performance));
        assert_eq!(catalog_item(&catalog, "Employees appearances").kano, KanoCategory::Delighter);
        assert_eq!(catalog_item(&catalog, "Employees courtesy").kano, KanoCategory::Performance);
        assert_eq!(catalog_item(&catalog, "Entertainment in waiting area").kano, KanoCategory::Delighter);
    }

    #[test]
    fn response_is_an_alias_for_responsiveness() {
        assert_eq!("response".parse::<Dimension>().unwrap(), Dimension::Responsiveness);
        let json = r#"{"items":[{"id":1,"prompt":"p","dimension":"response","kano":"must_be"}]}"#;
        let inst = build_instrument(json).unwrap();
        assert_eq!(inst.items()[0].dimension, Dimension::Responsiveness);
    }

    #[test]
    fn single_item_instrument_is_valid_but_incomplete() {
        let json = r#"{"scale":{"min":1,"max":5},"items":[{"id":1,"prompt":"p","dimension":"reliability","kano":"must_be"}]}"#;
        let inst = build_instrument(json).unwrap();
        assert_eq!(inst.len(), 1);
        assert!(matches!(
            inst.require_all_dimensions(),
            Err(InstrumentError::MissingDimension(Dimension::Responsiveness))
        ));
    }

    #[test]
    fn duplicate_id_is_reported_with_position() {
        let json = r#"{"items":[
            {"id":3,"prompt":"a","dimension":"reliability","kano":"must_be"},
            {"id":3,"prompt":"b","dimension":"empathy","kano":"delighter"}]}"#;
        match build_instrument(json) {
            Err(InstrumentError::DuplicateId { position, id }) => assert_eq!((position, id), (2, 3)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bad_tokens_and_shapes_are_rejected() {
        let bad_dim = r#"{"items":[{"id":1,"prompt":"a","dimension":"speed","kano":"must_be"}]}"#;
        assert!(matches!(
            build_instrument(bad_dim),
            Err(InstrumentError::UnknownDimension { position: 1, .. })
        ));
        let bad_kano = r#"{"items":[{"id":1,"prompt":"a","dimension":"empathy","kano":"wow"}]}"#;
        assert!(matches!(
            build_instrument(bad_kano),
            Err(InstrumentError::UnknownKano { position: 1, .. })
        ));
        assert!(matches!(build_instrument(r#"{"items":[]}"#), Err(InstrumentError::EmptyItems)));
        let unknown_field = r#"{"items":[],"colour":"red"}"#;
        assert!(matches!(build_instrument(unknown_field), Err(InstrumentError::Parse(_))));
        let bad_scale = r#"{"scale":{"min":5,"max":1},"items":[{"id":1,"prompt":"a","dimension":"empathy","kano":"performance"}]}"#;
        assert!(matches!(build_instrument(bad_scale), Err(InstrumentError::InvalidScale { .. })));
    }

    #[test]
    fn select_all_keys_keeps_catalog_order() {
        let catalog = master_catalog();
        let keys: Vec<&str> = catalog.iter().map(|i| i.source_key.as_deref().unwrap()).collect();
        let inst = select_items(&catalog, &keys).unwrap();
        assert_eq!(inst.len(), 28);
        for (a, b) in inst.items().iter().zip(&catalog) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn select_unknown_key_fails() {
        let err = select_items(&master_catalog(), &["error-free-service", "free-coffee"]).unwrap_err();
        assert!(matches!(err, InstrumentError::UnknownKey(k) if k == "free-coffee"));
    }

    #[test]
    fn json_round_trip_and_identity() {
        let catalog = master_catalog();
        let inst = select_items(&catalog, &["personal-attention", "error-free-service"]).unwrap();
        assert_eq!(inst.items()[0].id, 1);
        assert_eq!(inst.items()[0].source_key.as_deref(), Some("personal-attention"));
        let back = build_instrument(&inst.to_json()).unwrap();
        assert_eq!(back, inst);
        assert_eq!(back.identity(), inst.identity());
        assert!(inst.identity().starts_with("sha256:"));
    }
}
