//! The bundled computer-service case study: a 17-item instrument, item-level
//! expectation and perception means (81 respondents each), dimension weights
//! averaged over 82 importance allocations, a house-of-quality definition and
//! a fishbone taxonomy.
//!
//! Means are stored at full precision (`sum / 81`); the `printed_mean` column
//! keeps the nine-decimal values they round to.

use crate::ingest::parse_item_means;
use crate::instrument::{build_instrument, SurveyInstrument};
use crate::psychometrics::ItemDescriptives;
use crate::qfd::{build_hoq, HouseOfQuality};
use crate::rootcause::{build_fishbone, FishboneTree};
use crate::servqual::ImportanceWeights;

pub const INSTRUMENT_JSON: &str = include_str!("../data/xyz/instrument.json");
pub const EXPECTATION_MEANS_CSV: &str = include_str!("../data/xyz/expectation_means.csv");
pub const PERCEPTION_MEANS_CSV: &str = include_str!("../data/xyz/perception_means.csv");
pub const WEIGHTS_JSON: &str = include_str!("../data/xyz/weights.json");
pub const HOQ_JSON: &str = include_str!("../data/xyz/hoq.json");
pub const FISHBONE_JSON: &str = include_str!("../data/xyz/fishbone.json");

pub const N_EXPECTATION: usize = 81;
pub const N_PERCEPTION: usize = 81;
pub const N_IMPORTANCE: usize = 82;

pub fn instrument() -> SurveyInstrument {
    build_instrument(INSTRUMENT_JSON).expect("bundled instrument is valid")
}

pub fn expectation_means() -> Vec<f64> {
    parse_item_means(EXPECTATION_MEANS_CSV.as_bytes(), &instrument()).expect("bundled means are valid")
}

pub fn perception_means() -> Vec<f64> {
    parse_item_means(PERCEPTION_MEANS_CSV.as_bytes(), &instrument()).expect("bundled means are valid")
}

/// Means-only descriptives; the variance is not part of the fixture and is 0.
pub fn descriptives(means: &[f64], n: usize) -> Vec<ItemDescriptives> {
    instrument()
        .items()
        .iter()
        .zip(means)
        .map(|(item, &mean)| ItemDescriptives { item_id: item.id, mean, variance: 0.0, n })
        .collect()
}

pub fn weights() -> ImportanceWeights {
    let mut w = ImportanceWeights::from_json(WEIGHTS_JSON).expect("bundled weights are valid");
    w.n_respondents = Some(N_IMPORTANCE);
    w
}

pub fn hoq() -> HouseOfQuality {
    build_hoq(HOQ_JSON).expect("bundled house of quality is valid")
}

pub fn fishbone() -> FishboneTree {
    build_fishbone(FISHBONE_JSON).expect("bundled fishbone is valid")
}
