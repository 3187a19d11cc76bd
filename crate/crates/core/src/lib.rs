//! Service-quality survey analytics: instrument definitions, response
//! ingestion, reliability statistics, perception/expectation gap scoring,
//! Kano priorities, house-of-quality weights, Pareto root-cause tables and
//! report rendering.

pub mod casestudy;
pub mod ingest;
pub mod instrument;
pub mod kano;
pub mod psychometrics;
pub mod qfd;
pub mod report;
pub mod rootcause;
pub mod servqual;

pub use ingest::{
    generate_synthetic, parse_response_file, IngestError, MissingPolicy, ResponseKind, ResponseSet, RowError,
    RowErrorCode, ValidationReport,
};
pub use instrument::{
    build_instrument, master_catalog, select_items, Dimension, InstrumentError, Item, KanoCategory, LikertScale,
    SurveyInstrument,
};
pub use kano::{prioritize, KanoMultipliers, KanoPriority};
pub use psychometrics::{
    cronbach_alpha, item_descriptives, omitted_item_stats, reliability_report, Estimate, ItemDescriptives,
    ReliabilityReport, ScoreMatrix, VarianceMode,
};
pub use qfd::{build_hoq, roof_conflicts, technical_importance, HouseOfQuality};
pub use report::{assemble, emit, AnalysisReport, Format, ReportParts};
pub use rootcause::{build_fishbone, dissatisfaction_contributions, pareto, ContributionWeighting, FishboneTree, ParetoTable};
pub use servqual::{analyze, importance_weights, GapReport, ImportanceWeights, ItemGap};
