//! Report assembly and serialization to JSON, CSV tables, Markdown and SVG
//! bar charts.
//!
//! Every emitter is a pure function of the report: CSV, Markdown and chart
//! payloads never contain a timestamp, and the JSON carries one only when the
//! caller put it in the metadata.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::ValidationReport;
use crate::instrument::{Dimension, Item, SurveyInstrument};
use crate::kano::KanoPriority;
use crate::psychometrics::{Estimate, ItemDescriptives, ReliabilityReport};
use crate::qfd::{roof_conflicts, HouseOfQuality};
use crate::rootcause::{BranchMagnitude, FishboneTree, ParetoTable};
use crate::servqual::{classify_satisfaction, GapReport, Satisfaction, DEFAULT_WEIGHT_TOLERANCE};

pub const TOOL_NAME: &str = "satmetric";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("a report needs a gap analysis")]
    MissingGapReport,
    #[error("unknown output format `{0}`; expected json, csv, markdown or svg-charts")]
    UnknownFormat(String),
    #[error("invalid report document: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
    #[error("writing {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WarningCode {
    ReliabilityGateFailed,
    WeightSumDrift,
    WeightsNormalized,
    RowsRejected,
    QfdDegenerate,
    NoDissatisfaction,
}

impl WarningCode {
    pub fn as_str(self) -> &'static str {
        match self {
            WarningCode::ReliabilityGateFailed => "reliability_gate_failed",
            WarningCode::WeightSumDrift => "weight_sum_drift",
            WarningCode::WeightsNormalized => "weights_normalized",
            WarningCode::RowsRejected => "rows_rejected",
            WarningCode::QfdDegenerate => "qfd_degenerate",
            WarningCode::NoDissatisfaction => "no_dissatisfaction",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Warning {
    pub code: WarningCode,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub tool: String,
    pub tool_version: String,
    pub instrument_id: String,
    pub instrument_name: Option<String>,
    pub n_expectation: Option<usize>,
    pub n_perception: Option<usize>,
    pub n_importance: Option<usize>,
    /// Seconds since the Unix epoch; absent when suppressed.
    pub generated_at: Option<u64>,
    pub config: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurveyPair<T> {
    pub expectation: Option<T>,
    pub perception: Option<T>,
}

impl<T> Default for SurveyPair<T> {
    fn default() -> Self {
        SurveyPair { expectation: None, perception: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationSummary {
    pub survey: String,
    pub accepted_rows: usize,
    pub rejected_rows: usize,
    pub row_errors: Vec<crate::ingest::RowError>,
}

/// Section order is fixed by field order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub metadata: Metadata,
    pub items: Vec<Item>,
    pub validation: Vec<ValidationSummary>,
    pub descriptives: SurveyPair<Vec<ItemDescriptives>>,
    pub reliability: SurveyPair<ReliabilityReport>,
    pub gap_report: GapReport,
    pub kano_priorities: Vec<KanoPriority>,
    pub pareto: Option<ParetoTable>,
    pub hoq: Option<HouseOfQuality>,
    pub fishbone: Option<FishboneTree>,
    pub branch_magnitudes: Vec<BranchMagnitude>,
    pub warnings: Vec<Warning>,
}

/// Inputs to [`assemble`]; everything but the gap report is optional.
#[derive(Debug, Clone, Default)]
pub struct ReportParts {
    pub instrument: Option<SurveyInstrument>,
    pub validation: Vec<(String, ValidationReport)>,
    pub descriptives: SurveyPair<Vec<ItemDescriptives>>,
    pub reliability: SurveyPair<ReliabilityReport>,
    pub gap_report: Option<GapReport>,
    pub kano_priorities: Vec<KanoPriority>,
    pub pareto: Option<ParetoTable>,
    pub hoq: Option<HouseOfQuality>,
    pub fishbone: Option<FishboneTree>,
    pub branch_magnitudes: Vec<BranchMagnitude>,
    pub weight_tolerance: Option<f64>,
    pub generated_at: Option<u64>,
    pub config: BTreeMap<String, String>,
}

pub fn assemble(parts: ReportParts) -> Result<AnalysisReport, ReportError> {
    let gap_report = parts.gap_report.ok_or(ReportError::MissingGapReport)?;
    let mut warnings = Vec::new();

    for (survey, rel) in [
        ("expectation", &parts.reliability.expectation),
        ("perception", &parts.reliability.perception),
    ] {
        if let Some(r) = rel.as_ref().filter(|r| !r.passes_gate) {
            warnings.push(Warning {
                code: WarningCode::ReliabilityGateFailed,
                message: format!(
                    "{survey} survey alpha {} does not exceed the threshold {}",
                    r.alpha, r.threshold
                ),
            });
        }
    }
    for (survey, v) in &parts.validation {
        if v.rejected_rows > 0 {
            warnings.push(Warning {
                code: WarningCode::RowsRejected,
                message: format!("{survey}: {} of {} rows rejected", v.rejected_rows, v.raw_rows()),
            });
        }
    }
    let weights = &gap_report.importance;
    if weights.normalized {
        warnings.push(Warning {
            code: WarningCode::WeightsNormalized,
            message: "importance weights were rescaled to sum to 100".to_string(),
        });
    } else {
        let tolerance = parts.weight_tolerance.unwrap_or(DEFAULT_WEIGHT_TOLERANCE);
        if weights.drift() > 0.0 {
            let within = weights.within_tolerance(tolerance);
            warnings.push(Warning {
                code: WarningCode::WeightSumDrift,
                message: format!(
                    "importance means sum to {} ({} tolerance {})",
                    weights.sum_of_means,
                    if within { "within" } else { "outside" },
                    tolerance
                ),
            });
        }
    }
    if parts.hoq.as_ref().is_some_and(|h| h.degenerate) {
        warnings.push(Warning {
            code: WarningCode::QfdDegenerate,
            message: "every relationship strength is zero".to_string(),
        });
    }
    if parts.pareto.as_ref().is_some_and(|p| p.empty) {
        warnings.push(Warning {
            code: WarningCode::NoDissatisfaction,
            message: "no item has a negative gap".to_string(),
        });
    }

    let (instrument_id, instrument_name, items) = match &parts.instrument {
        Some(inst) => (inst.identity(), inst.name().map(str::to_string), inst.items().to_vec()),
        None => (String::new(), None, Vec::new()),
    };
    let n_of = |d: &Option<Vec<ItemDescriptives>>| d.as_ref().and_then(|v| v.first()).map(|d| d.n);
    Ok(AnalysisReport {
        metadata: Metadata {
            tool: TOOL_NAME.to_string(),
            tool_version: TOOL_VERSION.to_string(),
            instrument_id,
            instrument_name,
            n_expectation: n_of(&parts.descriptives.expectation),
            n_perception: n_of(&parts.descriptives.perception),
            n_importance: weights.n_respondents,
            generated_at: parts.generated_at,
            config: parts.config,
        },
        items,
        validation: parts
            .validation
            .into_iter()
            .map(|(survey, v)| ValidationSummary {
                survey,
                accepted_rows: v.accepted_rows,
                rejected_rows: v.rejected_rows,
                row_errors: v.row_errors,
            })
            .collect(),
        descriptives: parts.descriptives,
        reliability: parts.reliability,
        gap_report,
        kano_priorities: parts.kano_priorities,
        pareto: parts.pareto,
        hoq: parts.hoq,
        fishbone: parts.fishbone,
        branch_magnitudes: parts.branch_magnitudes,
        warnings,
    })
}

impl AnalysisReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(json: &str) -> Result<Self, ReportError> {
        Ok(serde_json::from_str(json)?)
    }

    pub fn has_warning(&self, code: WarningCode) -> bool {
        self.warnings.iter().any(|w| w.code == code)
    }

    fn item(&self, id: u32) -> Option<&Item> {
        self.items.iter().find(|i| i.id == id)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Format {
    Json,
    Csv,
    Markdown,
    SvgCharts,
}

impl Format {
    pub const ALL: [Format; 4] = [Format::Json, Format::Csv, Format::Markdown, Format::SvgCharts];
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Json => "json",
            Format::Csv => "csv",
            Format::Markdown => "markdown",
            Format::SvgCharts => "svg-charts",
        })
    }
}

impl FromStr for Format {
    type Err = ReportError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "markdown" | "md" => Ok(Format::Markdown),
            "svg-charts" | "svg" => Ok(Format::SvgCharts),
            other => Err(ReportError::UnknownFormat(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputFile {
    pub path: String,
    pub contents: Vec<u8>,
}

/// Renders one format. Paths are `<stem>.report.json`, `<stem>.tables/*.csv`,
/// `<stem>.report.md` and `<stem>.charts/*.svg`.
pub fn emit(report: &AnalysisReport, format: Format, stem: &str) -> Result<Vec<OutputFile>, ReportError> {
    let file = |suffix: String, contents: String| OutputFile {
        path: format!("{stem}{suffix}"),
        contents: contents.into_bytes(),
    };
    Ok(match format {
        Format::Json => vec![file(".report.json".into(), report.to_json())],
        Format::Markdown => vec![file(".report.md".into(), markdown(report))],
        Format::Csv => csv_tables(report)?
            .into_iter()
            .map(|(name, body)| file(format!(".tables/{name}.csv"), body))
            .collect(),
        Format::SvgCharts => charts(report)
            .into_iter()
            .map(|(name, body)| file(format!(".charts/{name}.svg"), body))
            .collect(),
    })
}

/// Writes files, creating parent directories.
pub fn write_files(files: &[OutputFile]) -> Result<(), ReportError> {
    for f in files {
        let path = Path::new(&f.path);
        let io = |source| ReportError::Io { path: f.path.clone(), source };
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent).map_err(io)?;
        }
        std::fs::write(path, &f.contents).map_err(io)?;
    }
    Ok(())
}

fn num(v: f64) -> String {
    format!("{v}")
}

fn estimate(e: Estimate) -> String {
    match e {
        Estimate::Value(v) => num(v),
        Estimate::Undefined { undefined } => format!(
            "undefined:{}",
            serde_json::to_value(undefined).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default()
        ),
    }
}

fn satisfaction_token(s: Satisfaction) -> &'static str {
    match s {
        Satisfaction::Satisfied => "satisfied",
        Satisfaction::Neutral => "neutral",
        Satisfaction::Dissatisfied => "dissatisfied",
    }
}

fn table(header: &[&str], rows: Vec<Vec<String>>) -> Result<String, ReportError> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    let bytes = w.into_inner().map_err(|e| ReportError::Io {
        path: "<csv buffer>".to_string(),
        source: e.into_error(),
    })?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn csv_tables(r: &AnalysisReport) -> Result<Vec<(&'static str, String)>, ReportError> {
    let mut out = Vec::new();

    let mut rows = Vec::new();
    for (survey, d) in [("expectation", &r.descriptives.expectation), ("perception", &r.descriptives.perception)] {
        for x in d.iter().flatten() {
            rows.push(vec![survey.into(), x.item_id.to_string(), num(x.mean), num(x.variance), x.n.to_string()]);
        }
    }
    out.push(("descriptives", table(&["survey", "item_id", "mean", "variance", "n"], rows)?));

    let mut rows = Vec::new();
    for (survey, rel) in [("expectation", &r.reliability.expectation), ("perception", &r.reliability.perception)] {
        if let Some(rel) = rel {
            for o in &rel.omitted {
                rows.push(vec![
                    survey.into(),
                    num(rel.alpha),
                    rel.passes_gate.to_string(),
                    o.item_id.to_string(),
                    num(o.adj_total_mean),
                    num(o.adj_total_stdev),
                    estimate(o.item_adj_total_corr),
                    estimate(o.squared_multiple_corr),
                    estimate(o.alpha_if_deleted),
                ]);
            }
        }
    }
    out.push((
        "reliability",
        table(
            &[
                "survey",
                "scale_alpha",
                "passes_gate",
                "item_id",
                "adj_total_mean",
                "adj_total_stdev",
                "item_adj_total_corr",
                "squared_multiple_corr",
                "alpha_if_deleted",
            ],
            rows,
        )?,
    ));

    let g = &r.gap_report;
    let rows = g
        .item_gaps
        .iter()
        .map(|x| {
            let dim = r.item(x.item_id).map(|i| i.dimension.token()).unwrap_or("");
            vec![
                x.item_id.to_string(),
                dim.to_string(),
                num(x.expectation_mean),
                num(x.perception_mean),
                num(x.gap),
                satisfaction_token(classify_satisfaction(x.gap)).to_string(),
            ]
        })
        .collect();
    out.push((
        "gaps",
        table(&["item_id", "dimension", "expectation_mean", "perception_mean", "gap", "satisfaction"], rows)?,
    ));

    let rows = g
        .dimension_scores
        .iter()
        .map(|d| {
            let ids: Vec<String> = d.item_ids.iter().map(u32::to_string).collect();
            vec![d.dimension.token().to_string(), num(d.unweighted), num(d.importance), num(d.weighted), ids.join(" ")]
        })
        .collect();
    out.push(("dimensions", table(&["dimension", "unweighted", "importance", "weighted", "item_ids"], rows)?));

    let rows = vec![
        vec!["weighted_sum".to_string(), num(g.overall_weighted_sum)],
        vec!["weighted_mean".to_string(), num(g.overall_weighted_mean)],
        vec!["unweighted_mean".to_string(), num(g.unweighted_mean_of_dimensions)],
        vec!["importance_sum_of_means".to_string(), num(g.importance.sum_of_means)],
    ];
    out.push(("overall", table(&["metric", "value"], rows)?));

    let rows = r
        .kano_priorities
        .iter()
        .map(|k| {
            vec![
                k.rank.to_string(),
                k.item_id.to_string(),
                k.category.token().to_string(),
                num(k.raw_contribution),
                num(k.multiplier),
                num(k.priority_score),
            ]
        })
        .collect();
    out.push((
        "kano",
        table(&["rank", "item_id", "category", "raw_contribution", "multiplier", "priority_score"], rows)?,
    ));

    let rows = r
        .pareto
        .iter()
        .flat_map(|p| &p.rows)
        .map(|p| {
            vec![
                p.rank.to_string(),
                p.item_id.to_string(),
                p.label.clone(),
                num(p.magnitude),
                num(p.cumulative),
                num(p.cumulative_pct),
            ]
        })
        .collect();
    out.push(("pareto", table(&["rank", "item", "label", "magnitude", "cumulative", "cumulative_pct"], rows)?));

    out.push(("hoq", hoq_table(r.hoq.as_ref())?));

    if let Some(h) = &r.hoq {
        let mut header = vec!["customer_req", "importance"];
        header.extend(h.tech_reqs.iter().map(|t| t.id.as_str()));
        let rows = h
            .customer_reqs
            .iter()
            .zip(&h.relationships)
            .map(|(c, row)| {
                let mut cells = vec![c.id.clone(), num(c.importance)];
                cells.extend(row.iter().map(|s| s.value().to_string()));
                cells
            })
            .collect();
        out.push(("hoq_matrix", table(&header, rows)?));
    }
    Ok(out)
}

fn hoq_table(hoq: Option<&HouseOfQuality>) -> Result<String, ReportError> {
    let rows = hoq
        .iter()
        .flat_map(|h| &h.technical_importance)
        .map(|t| vec![t.tech_id.clone(), t.name.clone(), num(t.absolute), num(t.relative_pct), t.rank.to_string()])
        .collect();
    table(&["tech_id", "name", "absolute", "relative_pct", "rank"], rows)
}

/// `tech_id,name,absolute,relative_pct,rank`, in technical requirement order.
pub fn technical_importance_csv(hoq: &HouseOfQuality) -> Result<String, ReportError> {
    hoq_table(Some(hoq))
}

fn f9(v: f64) -> String {
    format!("{v:.9}")
}

fn md_escape(s: &str) -> String {
    s.replace('|', "\\|")
}

fn markdown(r: &AnalysisReport) -> String {
    let mut s = String::new();
    let g = &r.gap_report;
    let _ = writeln!(s, "# Service quality report");
    let _ = writeln!(s);
    if let Some(name) = &r.metadata.instrument_name {
        let _ = writeln!(s, "- Instrument: {name}");
    }
    let _ = writeln!(s, "- Instrument id: `{}`", r.metadata.instrument_id);
    for (label, n) in [
        ("Expectation respondents", r.metadata.n_expectation),
        ("Perception respondents", r.metadata.n_perception),
        ("Importance respondents", r.metadata.n_importance),
    ] {
        if let Some(n) = n {
            let _ = writeln!(s, "- {label}: {n}");
        }
    }
    let _ = writeln!(s);

    if !r.warnings.is_empty() {
        let _ = writeln!(s, "## Warnings\n");
        for w in &r.warnings {
            let _ = writeln!(s, "- `{}`: {}", w.code.as_str(), w.message);
        }
        let _ = writeln!(s);
    }

    let _ = writeln!(s, "## Overall\n");
    let _ = writeln!(s, "| Measure | Value |\n|---|---|");
    let _ = writeln!(s, "| Weighted score (sum of W_d) | {} |", f9(g.overall_weighted_sum));
    let _ = writeln!(s, "| Weighted mean (sum of W_d / 100) | {} |", f9(g.overall_weighted_mean));
    let _ = writeln!(s, "| Unweighted mean of Y_d | {} |", f9(g.unweighted_mean_of_dimensions));
    let _ = writeln!(s, "| Sum of importance means | {} |", f9(g.importance.sum_of_means));
    let _ = writeln!(s);

    for d in &g.dimension_scores {
        let _ = writeln!(s, "## Dimension: {}\n", d.dimension.display_name());
        let _ = writeln!(s, "| Item | Question | Expectation | Perception | Gap |\n|---|---|---|---|---|");
        for id in &d.item_ids {
            let Some(x) = g.gap(*id) else { continue };
            let prompt = r.item(*id).map(|i| md_escape(&i.prompt)).unwrap_or_default();
            let _ = writeln!(
                s,
                "| {id} | {prompt} | {} | {} | {} |",
                f9(x.expectation_mean),
                f9(x.perception_mean),
                f9(x.gap)
            );
        }
        let _ = writeln!(s, "| | Average score (Y_d) | | | {} |", f9(d.unweighted));
        let _ = writeln!(s, "| | Average importance score (I_d) | | | {} |", f9(d.importance));
        let _ = writeln!(s, "| | Weighted score (W_d) | | | {} |", f9(d.weighted));
        let _ = writeln!(s);
    }

    let rel: Vec<_> = [("Expectation", &r.reliability.expectation), ("Perception", &r.reliability.perception)]
        .into_iter()
        .filter_map(|(l, x)| x.as_ref().map(|x| (l, x)))
        .collect();
    if !rel.is_empty() {
        let _ = writeln!(s, "## Internal consistency\n");
        let _ = writeln!(s, "| Survey | Alpha | Items | Respondents | Threshold | Gate |\n|---|---|---|---|---|---|");
        for (label, x) in &rel {
            let _ = writeln!(
                s,
                "| {label} | {} | {} | {} | {} | {} |",
                f9(x.alpha),
                x.n_items,
                x.n_respondents,
                x.threshold,
                if x.passes_gate { "pass" } else { "fail" }
            );
        }
        let _ = writeln!(s);
    }

    if !r.kano_priorities.is_empty() {
        let _ = writeln!(s, "## Improvement priorities\n");
        let _ = writeln!(s, "| Rank | Item | Category | Raw | Multiplier | Score |\n|---|---|---|---|---|---|");
        for k in &r.kano_priorities {
            let _ = writeln!(
                s,
                "| {} | {} | {} | {} | {} | {} |",
                k.rank,
                k.item_id,
                k.category.token(),
                f9(k.raw_contribution),
                k.multiplier,
                f9(k.priority_score)
            );
        }
        let _ = writeln!(s);
    }

    if let Some(p) = &r.pareto {
        let _ = writeln!(s, "## Pareto of dissatisfaction\n");
        if p.empty {
            let _ = writeln!(s, "No item has a negative gap.\n");
        } else {
            let _ = writeln!(s, "| Rank | Item | Label | Magnitude | Cumulative % |\n|---|---|---|---|---|");
            for row in &p.rows {
                let _ = writeln!(
                    s,
                    "| {} | {} | {} | {} | {:.2} |",
                    row.rank,
                    row.item_id,
                    md_escape(&row.label),
                    f9(row.magnitude),
                    row.cumulative_pct
                );
            }
            if let Some(c) = p.vital_few_cutoff {
                let _ = writeln!(s, "\nVital few at {}%: ranks 1 to {c}.", p.threshold_pct);
            }
            let _ = writeln!(s);
        }
    }

    if let Some(h) = &r.hoq {
        let _ = writeln!(s, "## Technical importance\n");
        let _ = writeln!(s, "| Rank | Technical requirement | Absolute | Relative % |\n|---|---|---|---|");
        let mut ranked: Vec<_> = h.technical_importance.iter().collect();
        ranked.sort_by_key(|t| t.rank);
        for t in ranked {
            let _ = writeln!(s, "| {} | {} | {} | {:.2} |", t.rank, md_escape(&t.name), num(t.absolute), t.relative_pct);
        }
        let conflicts = roof_conflicts(h);
        if !conflicts.is_empty() {
            let _ = writeln!(s, "\nTrade-offs (negative roof correlation):\n");
            for (i, j) in conflicts {
                let _ = writeln!(s, "- {} / {}", h.tech_reqs[i - 1].name, h.tech_reqs[j - 1].name);
            }
        }
        let _ = writeln!(s);
    }

    if let Some(f) = &r.fishbone {
        let _ = writeln!(s, "## Cause and effect: {}\n", f.effect);
        for b in &f.branches {
            let _ = writeln!(s, "- {}", b.name);
            for c in &b.causes {
                let _ = writeln!(s, "  - {}", c.name);
                for sub in &c.causes {
                    let _ = writeln!(s, "    - {}", sub.name);
                }
            }
        }
        if !r.branch_magnitudes.is_empty() {
            let _ = writeln!(s, "\n| Branch | Items | Summed magnitude |\n|---|---|---|");
            for m in &r.branch_magnitudes {
                let ids: Vec<String> = m.item_ids.iter().map(u32::to_string).collect();
                let _ = writeln!(s, "| {} | {} | {} |", md_escape(&m.branch), ids.join(", "), f9(m.magnitude));
            }
        }
        let _ = writeln!(s);
    }
    s
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

const CHART_W: f64 = 640.0;
const CHART_H: f64 = 360.0;
const MARGIN: f64 = 48.0;

/// Vertical bars around a zero baseline; returns the SVG body and the scale.
fn bar_chart(title: &str, bars: &[(String, f64)], overlay: Option<&[f64]>) -> String {
    let hi = bars.iter().map(|b| b.1).fold(0.0_f64, f64::max);
    let lo = bars.iter().map(|b| b.1).fold(0.0_f64, f64::min);
    let span = if hi - lo > 0.0 { hi - lo } else { 1.0 };
    let plot_h = CHART_H - 2.0 * MARGIN;
    let plot_w = CHART_W - 2.0 * MARGIN;
    let y = |v: f64| MARGIN + (hi - v) / span * plot_h;
    let slot = plot_w / bars.len().max(1) as f64;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{CHART_W}" height="{CHART_H}" viewBox="0 0 {CHART_W} {CHART_H}">"#
    );
    let _ = writeln!(s, r#"<title>{}</title>"#, xml_escape(title));
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
        CHART_W / 2.0,
        xml_escape(title)
    );
    let _ = writeln!(
        s,
        r#"<line x1="{MARGIN}" y1="{0:.2}" x2="{1:.2}" y2="{0:.2}" stroke="black"/>"#,
        y(0.0),
        CHART_W - MARGIN
    );
    let _ = writeln!(
        s,
        r#"<line x1="{MARGIN}" y1="{MARGIN}" x2="{MARGIN}" y2="{:.2}" stroke="black"/>"#,
        CHART_H - MARGIN
    );
    for (i, (label, v)) in bars.iter().enumerate() {
        let x = MARGIN + i as f64 * slot + slot * 0.15;
        let (top, bottom) = (y(v.max(0.0)), y(v.min(0.0)));
        let _ = writeln!(
            s,
            r#"<rect x="{x:.2}" y="{top:.2}" width="{:.2}" height="{:.2}" fill="{}" data-label="{}" data-value="{}"/>"#,
            slot * 0.7,
            bottom - top,
            if *v < 0.0 { "#c0504d" } else { "#4f81bd" },
            xml_escape(label),
            num(*v)
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="10">{}</text>"#,
            x + slot * 0.35,
            CHART_H - MARGIN + 14.0,
            xml_escape(label)
        );
    }
    if let Some(cum) = overlay {
        // Cumulative percentage on its own 0..100 axis.
        let py = |p: f64| MARGIN + (100.0 - p) / 100.0 * plot_h;
        let points: Vec<String> = cum
            .iter()
            .enumerate()
            .map(|(i, p)| format!("{:.2},{:.2}", MARGIN + (i as f64 + 0.5) * slot, py(*p)))
            .collect();
        let _ = writeln!(s, r##"<polyline points="{}" fill="none" stroke="#333333"/>"##, points.join(" "));
        for (i, p) in cum.iter().enumerate() {
            let _ = writeln!(
                s,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3" data-cumulative-pct="{}"/>"#,
                MARGIN + (i as f64 + 0.5) * slot,
                py(*p),
                num(*p)
            );
        }
    }
    s.push_str("</svg>\n");
    s
}

fn charts(r: &AnalysisReport) -> Vec<(&'static str, String)> {
    let g = &r.gap_report;
    let mut out = Vec::new();
    let weights: Vec<(String, f64)> = Dimension::ALL
        .iter()
        .map(|d| (d.display_name().to_string(), g.importance.get(*d)))
        .collect();
    out.push(("dimension_weights", bar_chart("Dimension weight (I_d)", &weights, None)));
    let weighted: Vec<(String, f64)> = g
        .dimension_scores
        .iter()
        .map(|d| (d.dimension.display_name().to_string(), d.weighted))
        .collect();
    out.push(("weighted_scores", bar_chart("Weighted dimension score (W_d)", &weighted, None)));
    let gaps: Vec<(String, f64)> = g.item_gaps.iter().map(|x| (format!("Q{}", x.item_id), x.gap)).collect();
    out.push(("item_gaps", bar_chart("Item gap (P - E)", &gaps, None)));
    for (name, title, d) in [
        ("expectation_means", "Expectation means", &r.descriptives.expectation),
        ("perception_means", "Perception means", &r.descriptives.perception),
    ] {
        if let Some(d) = d {
            let bars: Vec<(String, f64)> = d.iter().map(|x| (format!("Q{}", x.item_id), x.mean)).collect();
            out.push((name, bar_chart(title, &bars, None)));
        }
    }
    if let Some(p) = r.pareto.as_ref().filter(|p| !p.empty) {
        let bars: Vec<(String, f64)> = p.rows.iter().map(|x| (format!("Q{}", x.item_id), x.magnitude)).collect();
        let cum: Vec<f64> = p.rows.iter().map(|x| x.cumulative_pct).collect();
        out.push(("pareto", bar_chart("Dissatisfaction Pareto", &bars, Some(&cum))));
    }
    if let Some(h) = &r.hoq {
        let bars: Vec<(String, f64)> = h.technical_importance.iter().map(|t| (t.tech_id.clone(), t.absolute)).collect();
        out.push(("technical_importance", bar_chart("Technical importance", &bars, None)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instrument::build_instrument;
    use crate::psychometrics::OmittedItemStats;
    use crate::servqual::{analyze, ImportanceWeights};

    fn parts() -> ReportParts {
        let inst = build_instrument(
            r#"{"name":"demo","items":[
            {"id":1,"prompt":"a","dimension":"reliability","kano":"must_be"},
            {"id":2,"prompt":"b | c","dimension":"responsiveness","kano":"performance"},
            {"id":3,"prompt":"c","dimension":"assurance","kano":"performance"},
            {"id":4,"prompt":"d","dimension":"empathy","kano":"delighter"},
            {"id":5,"prompt":"e & f","dimension":"tangibles","kano":"delighter"}]}"#,
        )
        .unwrap();
        let d = |means: [f64; 5]| -> Vec<ItemDescriptives> {
            means
                .iter()
                .enumerate()
                .map(|(i, &mean)| ItemDescriptives { item_id: i as u32 + 1, mean, variance: 0.5, n: 10 })
                .collect()
        };
        let e = d([4.0, 4.0, 3.0, 3.5, 2.0]);
        let p = d([4.5, 3.0, 2.5, 3.5, 2.5]);
        let w = ImportanceWeights::from_means([39.69512195, 22.19512195, 16.82926829, 12.56097561, 8.780487805])
            .unwrap();
        let gap_report = analyze(&inst, &e, &p, &w).unwrap();
        ReportParts {
            instrument: Some(inst),
            descriptives: SurveyPair { expectation: Some(e), perception: Some(p) },
            gap_report: Some(gap_report),
            ..Default::default()
        }
    }

    fn reliability(alpha: f64) -> ReliabilityReport {
        ReliabilityReport {
            alpha,
            n_items: 2,
            n_respondents: 10,
            omitted: vec![OmittedItemStats {
                item_id: 1,
                adj_total_mean: 3.0,
                adj_total_stdev: 1.0,
                item_adj_total_corr: Estimate::Value(0.5),
                squared_multiple_corr: Estimate::Undefined { undefined: crate::psychometrics::UndefinedReason::ZeroVariance },
                alpha_if_deleted: Estimate::Value(0.4),
            }],
            passes_gate: alpha > 0.6,
            threshold: 0.6,
        }
    }

    #[test]
    fn gap_report_is_mandatory() {
        assert!(matches!(assemble(ReportParts::default()), Err(ReportError::MissingGapReport)));
    }

    #[test]
    fn optional_sections_are_null() {
        let mut p = parts();
        p.instrument = None;
        p.descriptives = SurveyPair::default();
        let r = assemble(p).unwrap();
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert!(v["hoq"].is_null());
        assert!(v["pareto"].is_null());
        assert!(v["fishbone"].is_null());
        assert!(v["reliability"]["expectation"].is_null());
    }

    #[test]
    fn gate_failure_warns() {
        let mut p = parts();
        p.reliability.expectation = Some(reliability(0.55));
        p.reliability.perception = Some(reliability(0.8));
        let r = assemble(p).unwrap();
        let gate: Vec<_> = r.warnings.iter().filter(|w| w.code == WarningCode::ReliabilityGateFailed).collect();
        assert_eq!(gate.len(), 1);
        assert!(gate[0].message.starts_with("expectation"));
    }

    #[test]
    fn weight_drift_warns() {
        let r = assemble(parts()).unwrap();
        assert!(r.has_warning(WarningCode::WeightSumDrift));
        let mut p = parts();
        let exact = ImportanceWeights::from_means([20.0; 5]).unwrap();
        p.gap_report.as_mut().unwrap().importance = exact;
        assert!(!assemble(p).unwrap().has_warning(WarningCode::WeightSumDrift));
    }

    #[test]
    fn json_round_trip() {
        let mut p = parts();
        p.reliability.expectation = Some(reliability(0.7));
        p.generated_at = Some(1_700_000_000);
        p.config.insert("seed".into(), "0".into());
        let r = assemble(p).unwrap();
        let json = r.to_json();
        let back = AnalysisReport::from_json(&json).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.to_json(), json);
    }

    #[test]
    fn csv_manifest() {
        let r = assemble(parts()).unwrap();
        let files = emit(&r, Format::Csv, "out/x").unwrap();
        let names: Vec<&str> = files.iter().map(|f| f.path.as_str()).collect();
        for t in ["descriptives", "reliability", "gaps", "pareto", "hoq"] {
            assert!(names.contains(&format!("out/x.tables/{t}.csv").as_str()), "{t} missing from {names:?}");
        }
        let gaps = String::from_utf8(files.iter().find(|f| f.path.ends_with("gaps.csv")).unwrap().contents.clone()).unwrap();
        assert_eq!(gaps.lines().next().unwrap(), "item_id,dimension,expectation_mean,perception_mean,gap,satisfaction");
        assert_eq!(gaps.lines().nth(1).unwrap(), "1,reliability,4,4.5,0.5,satisfied");
    }

    #[test]
    fn weight_chart_bars() {
        let r = assemble(parts()).unwrap();
        let files = emit(&r, Format::SvgCharts, "x").unwrap();
        let svg = String::from_utf8(files.iter().find(|f| f.path == "x.charts/dimension_weights.svg").unwrap().contents.clone()).unwrap();
        assert!(svg.contains(r#"data-label="Reliability" data-value="39.69512195""#));
        assert_eq!(svg.matches("<rect").count(), 5);
    }

    #[test]
    fn markdown_layout_and_determinism() {
        let r = assemble(parts()).unwrap();
        let a = emit(&r, Format::Markdown, "x").unwrap();
        let b = emit(&r, Format::Markdown, "x").unwrap();
        assert_eq!(a, b);
        let md = String::from_utf8(a[0].contents.clone()).unwrap();
        assert!(md.contains("| Item | Question | Expectation | Perception | Gap |"));
        assert!(md.contains("b \\| c"));
        assert!(md.contains("| | Weighted score (W_d) | | | 19.847560975 |"));
    }

    #[test]
    fn format_tokens() {
        for f in Format::ALL {
            assert_eq!(f.to_string().parse::<Format>().unwrap(), f);
        }
        assert!(matches!("pdf".parse::<Format>(), Err(ReportError::UnknownFormat(_))));
    }
}
