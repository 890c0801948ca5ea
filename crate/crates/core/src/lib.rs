//! Beta and sigma convergence for regional panel data.
//!
//! The crate estimates the growth regression
//!
//! ```text
//! ln P[i,t] - ln P[i,t-1] = c + b ln P[i,t-1] + v[i,t]
//! ```
//!
//! for output per worker `P` of region `i` in year `t` with three estimators
//! (pooled OLS, LSDV fixed effects, random-effects GLS), optionally
//! conditioned on structural regressors, and turns `b` into an annual
//! convergence rate `ln(1 + b)`.
//!
//! ```
//! use panelconv::{run_convergence, Method, ModelSpec, PanelDataset};
//!
//! // two regions closing a gap
//! let panel = PanelDataset::builder("industry", ["North", "South"], 2000..=2005)
//!     .fill(|region, year| {
//!         let t = (year - 2000) as f64;
//!         let gap = if region == "North" { 0.4 } else { -0.4 };
//!         Some((4.0 + gap * 0.6f64.powf(t) + 0.01 * (t * 1.7).sin()).exp())
//!     })
//!     .build()?;
//! let report = run_convergence(&panel, &ModelSpec::absolute(Method::Pooled))?;
//! assert!(report.b < 0.0);
//! assert_eq!(report.fit.df_residual, 8);
//! # Ok::<(), panelconv::Error>(())
//! ```
//!
//! The `book/` directory next to the workspace walks through each piece; its
//! code listings are compiled and run as doctests of this crate.

pub mod convergence;
mod error;
pub mod estimators;
pub mod io;
pub mod montecarlo;
pub mod panel;
pub mod regression;

pub use convergence::{
    annual_rate, classify, half_life, location_quotient, run_convergence, ConvergenceReport,
    LocationQuotientInputs, Significance, Verdict,
};
pub use error::{Error, ErrorKind, Result};
pub use estimators::{fit_gls_random_effects, fit_gls_with, fit_lsdv, fit_pooled, GlsOptions, ModelSpec};
pub use io::{read_panel, render_report, Format};
pub use montecarlo::{recovery_experiment, simulate_panel, RecoveryStats, SimulationConfig};
pub use panel::{build_growth_sample, sigma_dispersion, GrowthSample, PanelDataset, SigmaSeries};
pub use regression::{durbin_watson, least_squares, t_critical, DesignMatrix, FitResult, Method};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/growth-sample.md")]
    mod growth_sample {}
    #[doc = include_str!("../../../book/src/least-squares.md")]
    mod least_squares {}
    #[doc = include_str!("../../../book/src/estimators.md")]
    mod estimators {}
    #[doc = include_str!("../../../book/src/convergence-rates.md")]
    mod convergence_rates {}
    #[doc = include_str!("../../../book/src/sigma.md")]
    mod sigma {}
    #[doc = include_str!("../../../book/src/location-quotients.md")]
    mod location_quotients {}
    #[doc = include_str!("../../../book/src/reports.md")]
    mod reports {}
    #[doc = include_str!("../../../book/src/monte-carlo.md")]
    mod monte_carlo {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
