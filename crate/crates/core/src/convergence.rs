//! Reading a growth regression as a convergence result.
//!
//! The coefficient `b` on the lagged log level maps to an annual rate of
//! convergence `ln(1 + b)` and, for `-1 < b < 0`, a half-life of
//! `ln 2 / -ln(1 + b)` years. Significance stars are recomputed from the
//! t-statistic and exact Student-t critical values.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{fit, ModelSpec, CONVERGENCE_LABEL};
use crate::panel::{build_growth_sample, PanelDataset};
use crate::regression::{t_critical, FitResult, SignificanceLevel};

/// Annual rate of convergence `ln(1 + b)`; `None` when `b <= -1`.
pub fn annual_rate(b: f64) -> Option<f64> {
    (b > -1.0).then(|| b.ln_1p())
}

/// Years to close half of the gap to steady state; defined for `-1 < b < 0`.
pub fn half_life(b: f64) -> Option<f64> {
    (b > -1.0 && b < 0.0).then(|| std::f64::consts::LN_2 / -b.ln_1p())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Significance {
    None,
    Sig10,
    Sig5,
}

impl Significance {
    /// `*` at 5%, `**` at 10%.
    pub fn stars(self) -> &'static str {
        match self {
            Significance::Sig5 => "*",
            Significance::Sig10 => "**",
            Significance::None => "",
        }
    }

    pub fn from_stars(stars: &str) -> Option<Self> {
        match stars {
            "*" => Some(Significance::Sig5),
            "**" => Some(Significance::Sig10),
            "" => Some(Significance::None),
            _ => None,
        }
    }

    pub fn at_least_10(self) -> bool {
        self >= Significance::Sig10
    }
}

/// Two-sided significance of a t-statistic with `df` degrees of freedom.
pub fn classify(t: f64, df: usize) -> Result<Significance> {
    let c5 = t_critical(df, SignificanceLevel::FivePercent)?;
    let c10 = t_critical(df, SignificanceLevel::TenPercent)?;
    let a = t.abs();
    Ok(if a >= c5 {
        Significance::Sig5
    } else if a >= c10 {
        Significance::Sig10
    } else {
        Significance::None
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Converging,
    Diverging,
    Inconclusive,
}

pub fn verdict(b: f64, significance: Significance) -> Verdict {
    match (significance.at_least_10(), b) {
        (true, b) if b < 0.0 => Verdict::Converging,
        (true, b) if b > 0.0 => Verdict::Diverging,
        _ => Verdict::Inconclusive,
    }
}

/// Employment counts (persons) behind a location quotient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocationQuotientInputs {
    pub regional_sector: f64,
    pub national_sector: f64,
    pub regional_total: f64,
    pub national_total: f64,
}

/// `(regional sector / national sector) / (regional total / national total)`.
pub fn location_quotient(inp: &LocationQuotientInputs) -> Result<f64> {
    let all = [inp.regional_sector, inp.national_sector, inp.regional_total, inp.national_total];
    if all.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::InvalidEmployment(format!("counts must be positive: {all:?}")));
    }
    if inp.regional_sector > inp.national_sector || inp.regional_total > inp.national_total {
        return Err(Error::InvalidEmployment("regional employment exceeds national".into()));
    }
    Ok((inp.regional_sector / inp.national_sector) / (inp.regional_total / inp.national_total))
}

/// A fit together with everything the report tables need.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub sector: String,
    pub spec: ModelSpec,
    /// All panel regions in dummy order.
    pub regions: Vec<String>,
    pub fit: FitResult,
    /// Convergence coefficient.
    pub b: f64,
    pub tc: Option<f64>,
    pub half_life: Option<f64>,
    /// Aligned with `fit.labels`.
    pub significance: Vec<Significance>,
    pub verdict: Verdict,
    pub cell_count: usize,
    pub dropped_transitions: usize,
}

impl ConvergenceReport {
    pub fn from_fit(
        sector: String,
        spec: ModelSpec,
        regions: Vec<String>,
        fit: FitResult,
        cell_count: usize,
        dropped_transitions: usize,
    ) -> Result<Self> {
        let b = fit
            .estimate(CONVERGENCE_LABEL)
            .ok_or_else(|| Error::InvalidDesign("fit has no convergence coefficient".into()))?
            .value;
        let significance =
            fit.t_stats.iter().map(|&t| classify(t, fit.df_residual)).collect::<Result<Vec<_>>>()?;
        let j = fit.labels.iter().position(|l| l == CONVERGENCE_LABEL).unwrap_or(0);
        Ok(ConvergenceReport {
            sector,
            spec,
            regions,
            b,
            tc: annual_rate(b),
            half_life: half_life(b),
            verdict: verdict(b, significance[j]),
            significance,
            fit,
            cell_count,
            dropped_transitions,
        })
    }

    pub fn significance_of(&self, label: &str) -> Option<Significance> {
        let j = self.fit.labels.iter().position(|l| l == label)?;
        Some(self.significance[j])
    }
}

/// Growth sample, fit and convergence summary in one call.
pub fn run_convergence(panel: &PanelDataset, spec: &ModelSpec) -> Result<ConvergenceReport> {
    let sample = build_growth_sample(panel, &spec.structural)?;
    let fitted = fit(&sample, spec)?;
    ConvergenceReport::from_fit(
        panel.sector().to_string(),
        spec.clone(),
        sample.regions.clone(),
        fitted,
        sample.cell_count,
        sample.dropped_transitions,
    )
}
