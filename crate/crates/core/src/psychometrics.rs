//! Item descriptives and internal-consistency reliability.
//!
//! Alpha and the omitted-item statistics use sample (n - 1) variances.
//! Sums run respondent-major then item-major so results are reproducible
//! bit for bit.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::ResponseSet;

/// Reliability gate used when none is configured.
pub const DEFAULT_ALPHA_THRESHOLD: f64 = 0.6;

/// Pivot magnitude, relative to the largest diagonal entry, below which the
/// regression system is treated as singular.
const SINGULAR_PIVOT: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PsychometricsError {
    #[error("need at least {needed} items, have {found}")]
    TooFewItems { needed: usize, found: usize },
    #[error("need at least 2 respondents, have {0}")]
    TooFewRespondents(usize),
    #[error("total score has zero variance; alpha is undefined")]
    ZeroTotalVariance,
    #[error("rows have unequal lengths")]
    Ragged,
    #[error("descriptives need a Likert response set")]
    NotLikert,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarianceMode {
    /// Divide by N.
    #[default]
    Population,
    /// Divide by N - 1.
    Sample,
}

impl std::str::FromStr for VarianceMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "population" => Ok(VarianceMode::Population),
            "sample" => Ok(VarianceMode::Sample),
            other => Err(format!("unknown variance mode `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UndefinedReason {
    ZeroVariance,
    SingularSystem,
}

/// A statistic that may be undefined for degenerate data.
///
/// Serializes as a bare number, or as `{"undefined": "<reason>"}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Estimate {
    Value(f64),
    Undefined { undefined: UndefinedReason },
}

impl Estimate {
    pub fn undefined(reason: UndefinedReason) -> Self {
        Estimate::Undefined { undefined: reason }
    }

    pub fn value(self) -> Option<f64> {
        match self {
            Estimate::Value(v) => Some(v),
            Estimate::Undefined { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemDescriptives {
    pub item_id: u32,
    pub mean: f64,
    pub variance: f64,
    pub n: usize,
}

/// Row-major real matrix of respondents x items.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMatrix {
    n: usize,
    k: usize,
    data: Vec<f64>,
}

impl ScoreMatrix {
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self, PsychometricsError> {
        let k = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * k);
        for r in rows {
            let r = r.as_ref();
            if r.len() != k {
                return Err(PsychometricsError::Ragged);
            }
            data.extend_from_slice(r);
        }
        Ok(ScoreMatrix { n: rows.len(), k, data })
    }

    pub fn from_response_set(rs: &ResponseSet) -> Self {
        ScoreMatrix {
            n: rs.respondents(),
            k: rs.width(),
            data: rs.rows().flatten().map(|&v| v as f64).collect(),
        }
    }

    pub fn respondents(&self) -> usize {
        self.n
    }

    pub fn items(&self) -> usize {
        self.k
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.k + c]
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        (0..self.n).map(|r| self.get(r, c)).collect()
    }

    pub fn without_column(&self, c: usize) -> ScoreMatrix {
        let data = (0..self.n)
            .flat_map(|r| (0..self.k).filter(move |&j| j != c).map(move |j| (r, j)))
            .map(|(r, j)| self.get(r, j))
            .collect();
        ScoreMatrix {
            n: self.n,
            k: self.k - 1,
            data,
        }
    }

    /// Per-respondent sums over all items.
    pub fn totals(&self) -> Vec<f64> {
        self.data.chunks(self.k.max(1)).map(|r| r.iter().sum()).collect()
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn sample_variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}

fn sample_covariance(xs: &[f64], ys: &[f64]) -> f64 {
    let (mx, my) = (mean(xs), mean(ys));
    xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / (xs.len() - 1) as f64
}

/// Mean and variance of every item, in response-set column order.
///
/// Uses exact integer sums so the only rounding is the final division.
pub fn item_descriptives(
    rs: &ResponseSet,
    mode: VarianceMode,
) -> Result<Vec<ItemDescriptives>, PsychometricsError> {
    if !rs.kind().is_likert() {
        return Err(PsychometricsError::NotLikert);
    }
    let n = rs.respondents();
    if mode == VarianceMode::Sample && n < 2 {
        return Err(PsychometricsError::TooFewRespondents(n));
    }
    let ids = rs.item_ids();
    Ok(ids
        .into_iter()
        .enumerate()
        .map(|(c, item_id)| {
            let (sum, sum_sq) = rs.column(c).fold((0i128, 0i128), |(s, q), v| {
                let v = v as i128;
                (s + v, q + v * v)
            });
            let n_i = n as i128;
            // n * Σx² − (Σx)² is exactly n² · population variance.
            let scatter = n_i * sum_sq - sum * sum;
            let denom = match mode {
                VarianceMode::Population => n_i * n_i,
                VarianceMode::Sample => n_i * (n_i - 1),
            };
            ItemDescriptives {
                item_id,
                mean: sum as f64 / n as f64,
                variance: scatter as f64 / denom as f64,
                n,
            }
        })
        .collect())
}

/// Cronbach's alpha: `k/(k-1) * (1 - Σ var(item) / var(total))`.
pub fn cronbach_alpha(m: &ScoreMatrix) -> Result<f64, PsychometricsError> {
    if m.k < 2 {
        return Err(PsychometricsError::TooFewItems { needed: 2, found: m.k });
    }
    if m.n < 2 {
        return Err(PsychometricsError::TooFewRespondents(m.n));
    }
    let item_var: f64 = (0..m.k).map(|c| sample_variance(&m.column(c))).sum();
    let total_var = sample_variance(&m.totals());
    if total_var == 0.0 {
        return Err(PsychometricsError::ZeroTotalVariance);
    }
    let k = m.k as f64;
    Ok(k / (k - 1.0) * (1.0 - item_var / total_var))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OmittedItemStats {
    pub item_id: u32,
    pub adj_total_mean: f64,
    pub adj_total_stdev: f64,
    pub item_adj_total_corr: Estimate,
    pub squared_multiple_corr: Estimate,
    pub alpha_if_deleted: Estimate,
}

fn pearson(xs: &[f64], ys: &[f64]) -> Estimate {
    let vx = sample_variance(xs);
    let vy = sample_variance(ys);
    if vx == 0.0 || vy == 0.0 {
        return Estimate::undefined(UndefinedReason::ZeroVariance);
    }
    let r = sample_covariance(xs, ys) / (vx.sqrt() * vy.sqrt());
    Estimate::Value(r.clamp(-1.0, 1.0))
}

/// Solves `a x = b` in place by Gaussian elimination with partial pivoting.
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let p = b.len();
    let scale = (0..p).map(|i| a[i][i].abs()).fold(0.0, f64::max);
    if scale == 0.0 {
        return None;
    }
    for col in 0..p {
        let pivot = (col..p).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() <= SINGULAR_PIVOT * scale {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..p {
            let f = a[row][col] / a[col][col];
            if f != 0.0 {
                let (upper, lower) = a.split_at_mut(row);
                for (dst, src) in lower[0][col..].iter_mut().zip(&upper[col][col..]) {
                    *dst -= f * src;
                }
                b[row] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; p];
    for i in (0..p).rev() {
        let tail: f64 = (i + 1..p).map(|j| a[i][j] * x[j]).sum();
        x[i] = (b[i] - tail) / a[i][i];
    }
    Some(x)
}

/// R² of the least-squares regression (with intercept) of column `target`
/// on all other columns.
fn squared_multiple_corr(m: &ScoreMatrix, target: usize) -> Estimate {
    let y = m.column(target);
    let var_y = sample_variance(&y);
    if var_y == 0.0 {
        return Estimate::undefined(UndefinedReason::ZeroVariance);
    }
    let preds: Vec<Vec<f64>> = (0..m.k).filter(|&c| c != target).map(|c| m.column(c)).collect();
    let cov: Vec<Vec<f64>> = preds
        .iter()
        .map(|a| preds.iter().map(|b| sample_covariance(a, b)).collect())
        .collect();
    let rhs: Vec<f64> = preds.iter().map(|a| sample_covariance(a, &y)).collect();
    match solve(cov, rhs.clone()) {
        Some(beta) => {
            let explained: f64 = beta.iter().zip(&rhs).map(|(b, c)| b * c).sum();
            Estimate::Value((explained / var_y).clamp(0.0, 1.0))
        }
        None => Estimate::undefined(UndefinedReason::SingularSystem),
    }
}

/// Per-item diagnostics with that item removed from the scale.
///
/// `item_ids` labels the columns; pass `None` to number them `1..=k`.
pub fn omitted_item_stats(
    m: &ScoreMatrix,
    item_ids: Option<&[u32]>,
) -> Result<Vec<OmittedItemStats>, PsychometricsError> {
    if m.k < 3 {
        return Err(PsychometricsError::TooFewItems { needed: 3, found: m.k });
    }
    if m.n < 2 {
        return Err(PsychometricsError::TooFewRespondents(m.n));
    }
    let totals = m.totals();
    Ok((0..m.k)
        .map(|i| {
            let item = m.column(i);
            let adjusted: Vec<f64> = totals.iter().zip(&item).map(|(t, x)| t - x).collect();
            let alpha_if_deleted = match cronbach_alpha(&m.without_column(i)) {
                Ok(a) => Estimate::Value(a),
                Err(_) => Estimate::undefined(UndefinedReason::ZeroVariance),
            };
            OmittedItemStats {
                item_id: item_ids.map_or(i as u32 + 1, |ids| ids[i]),
                adj_total_mean: mean(&adjusted),
                adj_total_stdev: sample_variance(&adjusted).sqrt(),
                item_adj_total_corr: pearson(&item, &adjusted),
                squared_multiple_corr: squared_multiple_corr(m, i),
                alpha_if_deleted,
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateOutcome {
    Pass,
    Fail,
}

/// Strict: alpha must exceed the threshold.
pub fn reliability_gate(alpha: f64, threshold: f64) -> GateOutcome {
    if alpha > threshold {
        GateOutcome::Pass
    } else {
        GateOutcome::Fail
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityReport {
    pub alpha: f64,
    pub n_items: usize,
    pub n_respondents: usize,
    pub omitted: Vec<OmittedItemStats>,
    pub passes_gate: bool,
    pub threshold: f64,
}

pub fn reliability_report(
    m: &ScoreMatrix,
    item_ids: Option<&[u32]>,
    threshold: f64,
) -> Result<ReliabilityReport, PsychometricsError> {
    let alpha = cronbach_alpha(m)?;
    let omitted = omitted_item_stats(m, item_ids)?;
    Ok(ReliabilityReport {
        alpha,
        n_items: m.k,
        n_respondents: m.n,
        omitted,
        passes_gate: reliability_gate(alpha, threshold) == GateOutcome::Pass,
        threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{generate_synthetic, ResponseKind};
    use crate::instrument::build_instrument;

    const SMALL: [[f64; 3]; 4] = [[1., 2., 3.], [2., 4., 5.], [3., 3., 4.], [4., 5., 5.]];

    // Exact-fraction oracle: item variances 5/3, 5/3, 11/12; total variance 131/12.
    const SMALL_ALPHA: f64 = 120.0 / 131.0;
    const SMALL_ALPHA_WITHOUT_THIRD: f64 = 8.0 / 9.0;

    #[test]
    fn alpha_small_matrix() {
        let m = ScoreMatrix::from_rows(&SMALL).unwrap();
        assert!((cronbach_alpha(&m).unwrap() - SMALL_ALPHA).abs() < 1e-12);
        let dropped = m.without_column(2);
        assert!((cronbach_alpha(&dropped).unwrap() - SMALL_ALPHA_WITHOUT_THIRD).abs() < 1e-12);
    }

    #[test]
    fn alpha_identical_columns_is_one() {
        let m = ScoreMatrix::from_rows(&[[1., 1.], [3., 3.], [2., 2.], [5., 5.]]).unwrap();
        assert_eq!(cronbach_alpha(&m).unwrap(), 1.0);
    }

    #[test]
    fn alpha_errors() {
        let one_item = ScoreMatrix::from_rows(&[[1.], [2.]]).unwrap();
        assert!(matches!(cronbach_alpha(&one_item), Err(PsychometricsError::TooFewItems { .. })));
        let constant = ScoreMatrix::from_rows(&[[3., 3.], [3., 3.], [3., 3.]]).unwrap();
        assert_eq!(cronbach_alpha(&constant), Err(PsychometricsError::ZeroTotalVariance));
        let one_row = ScoreMatrix::from_rows(&[[3., 3.]]).unwrap();
        assert_eq!(cronbach_alpha(&one_row), Err(PsychometricsError::TooFewRespondents(1)));
        assert_eq!(
            ScoreMatrix::from_rows(&[vec![1.0, 2.0], vec![1.0]]),
            Err(PsychometricsError::Ragged)
        );
    }

    #[test]
    fn omitted_stats_small_matrix() {
        let m = ScoreMatrix::from_rows(&SMALL).unwrap();
        let stats = omitted_item_stats(&m, Some(&[10, 11, 12])).unwrap();
        assert_eq!(stats.len(), 3);
        assert_eq!(stats[2].item_id, 12);
        let a = stats[2].alpha_if_deleted.value().unwrap();
        assert!((a - SMALL_ALPHA_WITHOUT_THIRD).abs() < 1e-12);
        // adjusted totals without item 3 are 3, 6, 6, 9
        assert!((stats[2].adj_total_mean - 6.0).abs() < 1e-12);
        assert!((stats[2].adj_total_stdev - 6.0f64.sqrt()).abs() < 1e-12);
        for s in &stats {
            let r = s.item_adj_total_corr.value().unwrap();
            assert!((-1.0..=1.0).contains(&r));
            let smc = s.squared_multiple_corr.value().unwrap();
            assert!((0.0..=1.0).contains(&smc));
        }
    }

    #[test]
    fn smc_matches_two_predictor_closed_form() {
        // With two predictors, R² = (r1² + r2² - 2 r1 r2 r12) / (1 - r12²).
        let rows = [[1., 2., 4.], [2., 1., 3.], [3., 5., 4.], [4., 3., 5.], [5., 4., 2.], [2., 2., 2.]];
        let m = ScoreMatrix::from_rows(&rows).unwrap();
        let corr = |a: usize, b: usize| pearson(&m.column(a), &m.column(b)).value().unwrap();
        let (r1, r2, r12) = (corr(0, 1), corr(0, 2), corr(1, 2));
        let expected = (r1 * r1 + r2 * r2 - 2.0 * r1 * r2 * r12) / (1.0 - r12 * r12);
        let got = squared_multiple_corr(&m, 0).value().unwrap();
        assert!((got - expected).abs() < 1e-12, "{got} vs {expected}");
    }

    #[test]
    fn constant_column_gives_markers_not_nan() {
        let m = ScoreMatrix::from_rows(&[[1., 2., 3.], [2., 3., 3.], [3., 5., 3.], [5., 4., 3.]]).unwrap();
        let stats = omitted_item_stats(&m, None).unwrap();
        assert_eq!(stats[2].item_adj_total_corr, Estimate::undefined(UndefinedReason::ZeroVariance));
        assert_eq!(stats[2].squared_multiple_corr, Estimate::undefined(UndefinedReason::ZeroVariance));
        // the constant column makes the others' regression singular
        assert_eq!(stats[0].squared_multiple_corr, Estimate::undefined(UndefinedReason::SingularSystem));
        let json = serde_json::to_string(&stats[2].item_adj_total_corr).unwrap();
        assert_eq!(json, r#"{"undefined":"zero_variance"}"#);
        assert!(matches!(omitted_item_stats(&m.without_column(0), None), Err(PsychometricsError::TooFewItems { .. })));
    }

    #[test]
    fn gate_is_strict() {
        assert_eq!(reliability_gate(0.7242, DEFAULT_ALPHA_THRESHOLD), GateOutcome::Pass);
        assert_eq!(reliability_gate(0.6, DEFAULT_ALPHA_THRESHOLD), GateOutcome::Fail);
        assert_eq!(reliability_gate(0.59, DEFAULT_ALPHA_THRESHOLD), GateOutcome::Fail);
    }

    #[test]
    fn descriptives_population_and_sample() {
        let inst = build_instrument(
            r#"{"items":[{"id":4,"prompt":"a","dimension":"reliability","kano":"must_be"},
                         {"id":9,"prompt":"b","dimension":"empathy","kano":"must_be"}]}"#,
        )
        .unwrap();
        let rs = generate_synthetic(&inst, ResponseKind::Expectation, &[3.0, 4.395061728], 81, 1).unwrap();
        let pop = item_descriptives(&rs, VarianceMode::Population).unwrap();
        assert_eq!(pop[0].item_id, 4);
        assert_eq!((pop[0].mean, pop[0].variance), (3.0, 0.0));
        assert_eq!(pop[1].mean, 356.0 / 81.0);
        let sample = item_descriptives(&rs, VarianceMode::Sample).unwrap();
        assert_eq!(sample[0].variance, 0.0);
        assert!((sample[1].variance - pop[1].variance * 81.0 / 80.0).abs() < 1e-15);
    }

    #[test]
    fn report_carries_gate() {
        let m = ScoreMatrix::from_rows(&SMALL).unwrap();
        let rep = reliability_report(&m, None, 0.95).unwrap();
        assert!(!rep.passes_gate);
        assert_eq!((rep.n_items, rep.n_respondents), (3, 4));
        let rep = reliability_report(&m, None, DEFAULT_ALPHA_THRESHOLD).unwrap();
        assert!(rep.passes_gate);
    }
}
