//! Pooled OLS, fixed effects (LSDV) and random effects (feasible GLS) fits of
//! the growth regression.
//!
//! Coefficient labels follow the report tables: `Const.` for the common
//! intercept, `D1..DR` for region dummies (numbered by the region's position
//! in the panel, so a region without rows leaves a gap), `Coef.1` for the
//! convergence coefficient on `ln P[i,t-1]` and `Coef.2..` for structural
//! regressors in the order they were requested.
//!
//! The lagged dependent level makes LSDV subject to Nickell bias for short
//! panels: its slope is pushed towards faster convergence. It is not
//! corrected here.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::panel::GrowthSample;
use crate::regression::{
    least_squares, DesignMatrix, FitResult, Method, RowKey, VarianceComponents, VarianceEstimator,
};

pub const CONSTANT_LABEL: &str = "Const.";
pub const CONVERGENCE_LABEL: &str = "Coef.1";

/// Label of the `j`-th slope (0 is the convergence coefficient).
pub fn slope_label(j: usize) -> String {
    format!("Coef.{}", j + 1)
}

/// Label of the dummy for the region at `region_index` in the panel.
pub fn dummy_label(region_index: usize) -> String {
    format!("D{}", region_index + 1)
}

/// Absolute (no structural variables) or conditional growth regression.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub method: Method,
    pub structural: Vec<String>,
}

impl ModelSpec {
    pub fn absolute(method: Method) -> Self {
        ModelSpec { method, structural: Vec::new() }
    }

    pub fn conditional(method: Method, structural: impl IntoIterator<Item = impl Into<String>>) -> Self {
        ModelSpec { method, structural: structural.into_iter().map(Into::into).collect() }
    }

    pub fn with_method(&self, method: Method) -> Self {
        ModelSpec { method, structural: self.structural.clone() }
    }

    /// Number of slope coefficients, convergence included.
    pub fn slopes(&self) -> usize {
        1 + self.structural.len()
    }

    fn check(&self, sample: &GrowthSample) -> Result<()> {
        for (i, name) in self.structural.iter().enumerate() {
            if self.structural[..i].contains(name) {
                return Err(Error::InvalidDesign(format!("structural variable {name} listed twice")));
            }
        }
        if sample.structural_names != self.structural {
            return Err(Error::InvalidDesign(format!(
                "sample carries structural variables {:?} but the model asks for {:?}",
                sample.structural_names, self.structural
            )));
        }
        Ok(())
    }
}

/// Dispatches on `spec.method`.
pub fn fit(sample: &GrowthSample, spec: &ModelSpec) -> Result<FitResult> {
    match spec.method {
        Method::Pooled => fit_pooled(sample, spec),
        Method::Lsdv => fit_lsdv(sample, spec),
        Method::Gls => fit_gls_random_effects(sample, spec),
    }
}

fn keys(sample: &GrowthSample) -> Vec<RowKey> {
    sample.rows.iter().map(|r| RowKey { region: r.region.clone(), year: r.year }).collect()
}

fn response(sample: &GrowthSample) -> Vec<f64> {
    sample.rows.iter().map(|r| r.growth).collect()
}

/// Slope columns in label order: lagged log level, then structural variables.
fn slope_columns(sample: &GrowthSample, spec: &ModelSpec) -> Vec<Vec<f64>> {
    let mut cols = vec![sample.rows.iter().map(|r| r.lagged_log).collect::<Vec<_>>()];
    for j in 0..spec.structural.len() {
        cols.push(sample.rows.iter().map(|r| r.structural[j]).collect());
    }
    cols
}

/// Single-intercept least squares on the stacked rows.
pub fn fit_pooled(sample: &GrowthSample, spec: &ModelSpec) -> Result<FitResult> {
    spec.check(sample)?;
    let mut x = DesignMatrix::new(keys(sample));
    x.push_column(CONSTANT_LABEL, vec![1.0; sample.row_count()])?;
    for (j, col) in slope_columns(sample, spec).into_iter().enumerate() {
        x.push_column(slope_label(j), col)?;
    }
    let mut fit = least_squares(&x, &response(sample))?;
    fit.method = Method::Pooled;
    Ok(fit)
}

/// Fixed effects through one dummy per region and no common intercept.
pub fn fit_lsdv(sample: &GrowthSample, spec: &ModelSpec) -> Result<FitResult> {
    spec.check(sample)?;
    let mut x = DesignMatrix::new(keys(sample));
    let mut warnings = Vec::new();
    for (r, &count) in sample.rows_per_region().iter().enumerate() {
        if count == 0 {
            continue;
        }
        if count == 1 {
            warnings.push(format!(
                "region {} has a single transition; its dummy absorbs that row",
                sample.regions[r]
            ));
        }
        let col = sample.rows.iter().map(|row| if row.region_index == r { 1.0 } else { 0.0 }).collect();
        x.push_column(dummy_label(r), col)?;
    }
    for (j, col) in slope_columns(sample, spec).into_iter().enumerate() {
        x.push_column(slope_label(j), col)?;
    }
    let mut fit = least_squares(&x, &response(sample))?;
    fit.method = Method::Lsdv;
    fit.warnings = warnings;
    Ok(fit)
}

/// Knobs for [`fit_gls_with`].
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct GlsOptions {
    /// Use this quasi-demeaning weight for every region instead of the
    /// estimated ones. A weight of exactly 1 removes the intercept, which is
    /// then dropped from the design.
    pub theta: Option<f64>,
}

/// Random-effects feasible GLS with Swamy-Arora variance components.
pub fn fit_gls_random_effects(sample: &GrowthSample, spec: &ModelSpec) -> Result<FitResult> {
    fit_gls_with(sample, spec, GlsOptions::default())
}

struct RegionMeans {
    rows: Vec<usize>,
    growth: Vec<f64>,
    /// `[slope][region]`
    slopes: Vec<Vec<f64>>,
}

fn region_means(sample: &GrowthSample, slopes: &[Vec<f64>]) -> RegionMeans {
    let nreg = sample.regions.len();
    let mut rows = vec![0usize; nreg];
    let mut growth = vec![0.0; nreg];
    let mut means = vec![vec![0.0; nreg]; slopes.len()];
    for (i, row) in sample.rows.iter().enumerate() {
        let r = row.region_index;
        rows[r] += 1;
        growth[r] += row.growth;
        for (m, col) in means.iter_mut().zip(slopes) {
            m[r] += col[i];
        }
    }
    for r in 0..nreg {
        if rows[r] > 0 {
            let t = rows[r] as f64;
            growth[r] /= t;
            for m in means.iter_mut() {
                m[r] /= t;
            }
        }
    }
    RegionMeans { rows, growth, slopes: means }
}

/// Estimates `(sigma2_u, estimator)` given `sigma2_e` and the within fit.
fn region_variance(
    sample: &GrowthSample,
    slopes: &[Vec<f64>],
    means: &RegionMeans,
    within: &FitResult,
    sigma2_e: f64,
    warnings: &mut Vec<String>,
) -> Result<(f64, VarianceEstimator)> {
    let present: Vec<usize> = (0..sample.regions.len()).filter(|&r| means.rows[r] > 0).collect();
    let n_regions = present.len();
    let k_between = 1 + slopes.len();

    if n_regions > k_between {
        let keys = present
            .iter()
            .map(|&r| RowKey { region: sample.regions[r].clone(), year: 0 })
            .collect();
        let mut x = DesignMatrix::new(keys);
        x.push_column(CONSTANT_LABEL, vec![1.0; n_regions])?;
        for (j, m) in means.slopes.iter().enumerate() {
            x.push_column(slope_label(j), present.iter().map(|&r| m[r]).collect())?;
        }
        let y: Vec<f64> = present.iter().map(|&r| means.growth[r]).collect();
        match least_squares(&x, &y) {
            Ok(between) => {
                let mean_inv_t =
                    present.iter().map(|&r| 1.0 / means.rows[r] as f64).sum::<f64>() / n_regions as f64;
                let sigma2_between = between.sse / between.df_residual as f64;
                return Ok((sigma2_between - sigma2_e * mean_inv_t, VarianceEstimator::SwamyArora));
            }
            Err(Error::RankDeficient { column }) => warnings.push(format!(
                "between regression is rank-deficient ({column}); region variance from within residuals"
            )),
            Err(e) => return Err(e),
        }
    } else {
        warnings.push(format!(
            "between regression infeasible ({n_regions} regions for {k_between} parameters); \
             region variance from within residuals"
        ));
    }

    // Amemiya: region means of residuals built from the within slopes
    let n = sample.row_count() as f64;
    let beta: Vec<f64> = (0..slopes.len())
        .map(|j| within.estimate(&slope_label(j)).map(|e| e.value).unwrap_or(0.0))
        .collect();
    let resid: Vec<f64> = sample
        .rows
        .iter()
        .enumerate()
        .map(|(i, row)| row.growth - slopes.iter().zip(&beta).map(|(c, b)| b * c[i]).sum::<f64>())
        .collect();
    let grand = resid.iter().sum::<f64>() / n;
    let mut region_sum = vec![0.0; sample.regions.len()];
    for (row, e) in sample.rows.iter().zip(&resid) {
        region_sum[row.region_index] += e - grand;
    }
    let q: f64 = present.iter().map(|&r| region_sum[r].powi(2) / means.rows[r] as f64).sum();
    let sum_t2: f64 = present.iter().map(|&r| (means.rows[r] as f64).powi(2)).sum();
    let denom = n - sum_t2 / n;
    if denom <= 0.0 {
        return Err(Error::DegenerateVariance("fewer than two regions with rows".into()));
    }
    Ok(((q - (n_regions as f64 - 1.0) * sigma2_e) / denom, VarianceEstimator::Amemiya))
}

/// Random-effects GLS by quasi-demeaning.
///
/// 1. `sigma2_e` from the LSDV residuals with `n - R - slopes` degrees of freedom.
/// 2. `sigma2_u` from the between regression on region means, less
///    `sigma2_e` times the average of `1/T_i`, truncated at zero.
/// 3. Each row becomes `value - theta_i * region_mean` with
///    `theta_i = 1 - sqrt(sigma2_e / (T_i sigma2_u + sigma2_e))`; the intercept
///    column becomes `1 - theta_i`.
/// 4. Least squares on the transformed rows; R², DW and residuals refer to
///    the transformed regression.
pub fn fit_gls_with(sample: &GrowthSample, spec: &ModelSpec, options: GlsOptions) -> Result<FitResult> {
    spec.check(sample)?;
    let slopes = slope_columns(sample, spec);
    let means = region_means(sample, &slopes);
    let n_regions = means.rows.iter().filter(|&&t| t > 0).count();
    if n_regions < 2 {
        return Err(Error::DegenerateVariance("random effects need at least 2 regions".into()));
    }

    let within = fit_lsdv(sample, spec)?;
    let mut warnings = within.warnings.clone();
    let sigma2_e = within.sse / within.df_residual as f64;
    if sigma2_e.is_nan() || sigma2_e <= 0.0 {
        return Err(Error::DegenerateVariance(format!("idiosyncratic variance {sigma2_e} is not positive")));
    }
    let (raw_sigma2_u, estimator) =
        region_variance(sample, &slopes, &means, &within, sigma2_e, &mut warnings)?;
    let truncated = raw_sigma2_u < 0.0;
    let sigma2_u = raw_sigma2_u.max(0.0);
    if truncated {
        warnings.push("negative region variance truncated to zero; GLS equals pooled OLS".into());
    }

    let theta: Vec<Option<f64>> = means
        .rows
        .iter()
        .map(|&t| {
            (t > 0).then(|| match options.theta {
                Some(forced) => forced,
                None => 1.0 - (sigma2_e / (t as f64 * sigma2_u + sigma2_e)).sqrt(),
            })
        })
        .collect();
    let weight = |i: usize| theta[sample.rows[i].region_index].unwrap_or(0.0);
    let n = sample.row_count();

    let mut x = DesignMatrix::new(keys(sample));
    let intercept: Vec<f64> = (0..n).map(|i| 1.0 - weight(i)).collect();
    if intercept.iter().any(|&v| v != 0.0) {
        x.push_column(CONSTANT_LABEL, intercept)?;
    } else {
        warnings.push("full demeaning removes the intercept".into());
    }
    for (j, col) in slopes.iter().enumerate() {
        let m = &means.slopes[j];
        let transformed =
            (0..n).map(|i| col[i] - weight(i) * m[sample.rows[i].region_index]).collect();
        x.push_column(slope_label(j), transformed)?;
    }
    let y: Vec<f64> = sample
        .rows
        .iter()
        .enumerate()
        .map(|(i, row)| row.growth - weight(i) * means.growth[row.region_index])
        .collect();

    let mut fit = least_squares(&x, &y)?;
    fit.method = Method::Gls;
    fit.warnings = warnings;
    fit.variance_components = Some(VarianceComponents {
        sigma2_e,
        sigma2_u,
        theta,
        truncated,
        estimator: if options.theta.is_some() { VarianceEstimator::Fixed } else { estimator },
    });
    Ok(fit)
}
