//! Least squares with classical inference, plus panel-aware residual diagnostics.

mod qr;
pub mod student_t;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use qr::PivotedQr;

pub use qr::PIVOT_TOLERANCE;
pub use student_t::{t_critical, t_critical_alpha, two_sided_p, SignificanceLevel};

/// Region and year attached to a design row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowKey {
    pub region: String,
    pub year: i32,
}

/// Labeled regressor columns with per-row panel coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    labels: Vec<String>,
    columns: Vec<Vec<f64>>,
    keys: Vec<RowKey>,
}

impl DesignMatrix {
    pub fn new(keys: Vec<RowKey>) -> Self {
        DesignMatrix { labels: Vec::new(), columns: Vec::new(), keys }
    }

    /// Appends a column; its length must match the number of rows.
    pub fn push_column(&mut self, label: impl Into<String>, values: Vec<f64>) -> Result<()> {
        let label = label.into();
        if values.len() != self.keys.len() {
            return Err(Error::InvalidDesign(format!(
                "column {label} has {} values for {} rows",
                values.len(),
                self.keys.len()
            )));
        }
        if self.labels.contains(&label) {
            return Err(Error::InvalidDesign(format!("duplicate column label {label}")));
        }
        self.labels.push(label);
        self.columns.push(values);
        Ok(())
    }

    pub fn with_column(mut self, label: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        self.push_column(label, values)?;
        Ok(self)
    }

    pub fn rows(&self) -> usize {
        self.keys.len()
    }

    pub fn cols(&self) -> usize {
        self.columns.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.columns[j]
    }

    pub fn keys(&self) -> &[RowKey] {
        &self.keys
    }
}

/// Which estimator produced a fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Pooled,
    Lsdv,
    Gls,
}

impl Method {
    /// Row label used in report tables.
    pub fn table_label(self) -> &'static str {
        match self {
            Method::Pooled => "Pooling",
            Method::Lsdv => "LSDV",
            Method::Gls => "GLS",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "pooled" | "pooling" | "ols" => Ok(Method::Pooled),
            "lsdv" | "fe" | "fixed" => Ok(Method::Lsdv),
            "gls" | "re" | "random" => Ok(Method::Gls),
            other => Err(format!("unknown method {other}")),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Pooled => "pooled",
            Method::Lsdv => "lsdv",
            Method::Gls => "gls",
        })
    }
}

/// Variance components behind a random-effects fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceComponents {
    /// Idiosyncratic variance.
    pub sigma2_e: f64,
    /// Region-effect variance, truncated at zero.
    pub sigma2_u: f64,
    /// Quasi-demeaning weight per region (sample order); `None` for regions without rows.
    pub theta: Vec<Option<f64>>,
    /// The raw region-variance estimate was negative and has been set to zero.
    pub truncated: bool,
    /// How `sigma2_u` was estimated.
    pub estimator: VarianceEstimator,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarianceEstimator {
    /// Between regression on region means.
    SwamyArora,
    /// Region means of within-fit residuals; used when the between
    /// regression has no residual degrees of freedom.
    Amemiya,
    /// Weights supplied by the caller.
    Fixed,
}

/// Coefficients, inference quantities and diagnostics of one regression.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub method: Method,
    pub labels: Vec<String>,
    pub coefficients: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub t_stats: Vec<f64>,
    /// Row-aligned with the design.
    pub residuals: Vec<f64>,
    pub keys: Vec<RowKey>,
    pub sse: f64,
    pub tss_centered: f64,
    /// `1 - SSE / TSS_centered`; `None` when the response has no variation.
    pub r_squared: Option<f64>,
    pub df_residual: usize,
    /// Panel-aware Durbin-Watson; `None` when undefined.
    pub dw: Option<f64>,
    pub variance_components: Option<VarianceComponents>,
    pub warnings: Vec<String>,
}

/// One coefficient with its inference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
    pub t: f64,
}

impl FitResult {
    pub fn n_obs(&self) -> usize {
        self.residuals.len()
    }

    pub fn estimate(&self, label: &str) -> Option<Estimate> {
        let j = self.labels.iter().position(|l| l == label)?;
        Some(Estimate { value: self.coefficients[j], std_error: self.std_errors[j], t: self.t_stats[j] })
    }

    pub fn estimates(&self) -> BTreeMap<&str, Estimate> {
        self.labels
            .iter()
            .enumerate()
            .map(|(j, l)| {
                (
                    l.as_str(),
                    Estimate { value: self.coefficients[j], std_error: self.std_errors[j], t: self.t_stats[j] },
                )
            })
            .collect()
    }
}

/// Ordinary least squares of `y` on the columns of `x`.
///
/// Solved through a column-pivoted Householder QR of the column-equilibrated
/// design. Standard errors are the classical `s^2 (X'X)^-1` ones with
/// `s^2 = SSE / (n - k)`.
pub fn least_squares(x: &DesignMatrix, y: &[f64]) -> Result<FitResult> {
    let (n, k) = (x.rows(), x.cols());
    if y.len() != n {
        return Err(Error::InvalidDesign(format!("response has {} values for {n} rows", y.len())));
    }
    if k == 0 {
        return Err(Error::InvalidDesign("design has no columns".into()));
    }
    if n <= k {
        return Err(Error::TooFewObservations { n, k });
    }
    if y.iter().any(|v| !v.is_finite()) || x.columns.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::InvalidDesign("non-finite value in data".into()));
    }
    let qr = PivotedQr::factor(&x.columns)
        .map_err(|d| Error::RankDeficient { column: x.labels[d.0].clone() })?;
    let coefficients = qr.solve(y);

    let mut residuals = y.to_vec();
    for (col, b) in x.columns.iter().zip(&coefficients) {
        for (r, v) in residuals.iter_mut().zip(col) {
            *r -= b * v;
        }
    }
    let sse: f64 = residuals.iter().map(|e| e * e).sum();
    let mean = y.iter().sum::<f64>() / n as f64;
    let tss_centered: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    let df_residual = n - k;
    let s2 = sse / df_residual as f64;
    let std_errors: Vec<f64> = qr.inverse_gram_diagonal().iter().map(|d| (s2 * d).sqrt()).collect();
    let t_stats = coefficients.iter().zip(&std_errors).map(|(b, se)| b / se).collect();
    let r_squared = if tss_centered > 0.0 { Some(1.0 - sse / tss_centered) } else { None };
    let dw = durbin_watson(&residuals, x.keys());

    Ok(FitResult {
        method: Method::Pooled,
        labels: x.labels.clone(),
        coefficients,
        std_errors,
        t_stats,
        residuals,
        keys: x.keys.clone(),
        sse,
        tss_centered,
        r_squared,
        df_residual,
        dw,
        variance_components: None,
        warnings: Vec::new(),
    })
}

/// Durbin-Watson statistic with differences taken only between consecutive
/// years of the same region.
///
/// Rows may come in any order; they are grouped by `keys[i].region` and sorted
/// by year. Returns `None` if every residual is zero or no region has two rows.
pub fn durbin_watson(residuals: &[f64], keys: &[RowKey]) -> Option<f64> {
    assert_eq!(residuals.len(), keys.len(), "one key per residual");
    let mut groups: BTreeMap<&str, Vec<(i32, f64)>> = BTreeMap::new();
    for (e, key) in residuals.iter().zip(keys) {
        groups.entry(key.region.as_str()).or_default().push((key.year, *e));
    }
    let mut numerator = 0.0;
    let mut any_pair = false;
    for series in groups.values_mut() {
        series.sort_by_key(|&(year, _)| year);
        for w in series.windows(2) {
            numerator += (w[1].1 - w[0].1).powi(2);
            any_pair = true;
        }
    }
    let denominator: f64 = residuals.iter().map(|e| e * e).sum();
    if !any_pair || denominator == 0.0 {
        return None;
    }
    // (a - b)^2 <= 2(a^2 + b^2) bounds the ratio by 4; clamp rounding noise
    Some((numerator / denominator).clamp(0.0, 4.0))
}
