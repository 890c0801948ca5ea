//! Synthetic panels from the growth equation and estimator recovery experiments.
//!
//! Log productivity follows
//!
//! ```text
//! ln P[i,t] = c + c_i + (1 + b) ln P[i,t-1] + v[i,t],   v ~ N(0, sigma_v^2)
//! ```
//!
//! Randomness comes from ChaCha8 seeded with `seed` through
//! `SeedableRng::seed_from_u64`; replication `r` of an experiment reads
//! stream `r` of that generator (`set_stream`), so every replication is
//! reproducible on its own and results do not depend on thread scheduling.
//! Within a stream, draws are taken in this order: region effects (when
//! random), initial levels, then disturbances period by period with regions
//! in order inside each period. Normal variates come from `rand_distr::StandardNormal`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{fit, ModelSpec, CONVERGENCE_LABEL};
use crate::panel::{build_growth_sample, PanelDataset};
use crate::regression::{t_critical, Method, SignificanceLevel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionEffects {
    /// One effect per region.
    Fixed(Vec<f64>),
    /// Effects drawn from `N(0, variance)`.
    Random { variance: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub seed: u64,
    pub regions: usize,
    pub periods: usize,
    pub start_year: i32,
    /// True convergence coefficient, in `(-1, 0]`.
    pub b_true: f64,
    /// Common intercept `c`.
    pub intercept: f64,
    pub effects: RegionEffects,
    pub sigma_v: f64,
    /// Mean of `ln P` in the first period, before region shifts.
    pub initial_log_mean: f64,
    /// Standard deviation of the first-period `ln P` around its region's start.
    pub initial_dispersion: f64,
}

impl SimulationConfig {
    /// Equal region effects, `sigma_v = 0.05`, first-period dispersion 0.3 around
    /// `ln 10000`, and `c = -b ln 10000` so that level is the common steady state.
    pub fn new(seed: u64, regions: usize, periods: usize, b_true: f64) -> Self {
        let initial_log_mean = 10_000f64.ln();
        SimulationConfig {
            seed,
            regions,
            periods,
            start_year: 1986,
            b_true,
            intercept: -b_true * initial_log_mean,
            effects: RegionEffects::Fixed(vec![0.0; regions]),
            sigma_v: 0.05,
            initial_log_mean,
            initial_dispersion: 0.3,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::InvalidConfig(m.into()));
        if self.regions < 2 {
            return fail("need at least 2 regions");
        }
        if self.periods < 3 {
            return fail("need at least 3 periods");
        }
        if !(self.b_true > -1.0 && self.b_true <= 0.0) {
            return fail("b_true must lie in (-1, 0]");
        }
        if !(self.sigma_v > 0.0 && self.sigma_v.is_finite()) {
            return fail("sigma_v must be positive");
        }
        if self.initial_dispersion.is_nan() || self.initial_dispersion < 0.0 {
            return fail("initial dispersion must be non-negative");
        }
        match &self.effects {
            RegionEffects::Fixed(e) if e.len() != self.regions => fail("one region effect per region"),
            RegionEffects::Random { variance } if variance.is_nan() || *variance < 0.0 => fail("effect variance must be >= 0"),
            _ => Ok(()),
        }
    }
}

/// Simulates one panel from stream 0 of the configured seed.
pub fn simulate_panel(config: &SimulationConfig) -> Result<PanelDataset> {
    config.validate()?;
    simulate_stream(config, 0)
}

fn simulate_stream(config: &SimulationConfig, stream: u64) -> Result<PanelDataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(stream);
    let mut normal = || -> f64 { StandardNormal.sample(&mut rng) };

    let effects: Vec<f64> = match &config.effects {
        RegionEffects::Fixed(e) => e.clone(),
        RegionEffects::Random { variance } => (0..config.regions).map(|_| variance.sqrt() * normal()).collect(),
    };
    let b = config.b_true;
    let mut logs: Vec<f64> = effects
        .iter()
        .map(|ci| {
            // start near the region's own steady state when one exists
            let shift = if b < 0.0 { ci / -b } else { 0.0 };
            config.initial_log_mean + shift + config.initial_dispersion * normal()
        })
        .collect();

    let names: Vec<String> = (1..=config.regions).map(|i| format!("R{i}")).collect();
    let years: Vec<i32> = (0..config.periods as i32).map(|t| config.start_year + t).collect();
    let mut grid = vec![vec![0.0; config.periods]; config.regions];
    for (i, l) in logs.iter().enumerate() {
        grid[i][0] = *l;
    }
    for t in 1..config.periods {
        for ((log, row), effect) in logs.iter_mut().zip(grid.iter_mut()).zip(&effects) {
            *log = config.intercept + effect + (1.0 + b) * *log + config.sigma_v * normal();
            row[t] = *log;
        }
    }
    let mut builder = PanelDataset::builder("simulated", names.clone(), years.clone());
    for (i, name) in names.iter().enumerate() {
        for (t, &year) in years.iter().enumerate() {
            builder = builder.value(name, year, grid[i][t].exp())?;
        }
    }
    builder.build()
}

/// Recovery of the convergence coefficient by one method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodRecovery {
    pub method: Method,
    pub mean_estimate: f64,
    pub mean_bias: f64,
    /// Across replications, divisor `n - 1` (zero for one replication).
    pub std_dev: f64,
    /// Share of nominal 95% intervals containing the true coefficient.
    pub coverage: f64,
    pub replications: usize,
}

impl MethodRecovery {
    /// Monte Carlo standard error of `mean_estimate`.
    pub fn mc_std_error(&self) -> f64 {
        self.std_dev / (self.replications as f64).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryStats {
    pub config: SimulationConfig,
    pub replications: usize,
    pub methods: Vec<MethodRecovery>,
}

impl RecoveryStats {
    pub fn method(&self, method: Method) -> Option<&MethodRecovery> {
        self.methods.iter().find(|m| m.method == method)
    }
}

/// Convergence estimate and its 95% interval hit for one replication.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReplicationEstimate {
    pub b: f64,
    pub covered: bool,
}

/// Per-replication estimates, `[replication][method]`, in replication order.
pub fn replicate(
    config: &SimulationConfig,
    replications: usize,
    methods: &[Method],
) -> Result<Vec<Vec<ReplicationEstimate>>> {
    config.validate()?;
    if replications == 0 {
        return Err(Error::InvalidConfig("need at least one replication".into()));
    }
    let results: Vec<Result<Vec<ReplicationEstimate>>> = (0..replications)
        .into_par_iter()
        .map(|rep| {
            let wrap = |e: Error| Error::Replication { replication: rep, source: Box::new(e) };
            let panel = simulate_stream(config, rep as u64).map_err(wrap)?;
            let sample = build_growth_sample::<&str>(&panel, &[]).map_err(wrap)?;
            methods
                .iter()
                .map(|&m| {
                    let f = fit(&sample, &ModelSpec::absolute(m)).map_err(wrap)?;
                    let est = f.estimate(CONVERGENCE_LABEL).expect("convergence coefficient present");
                    let crit = t_critical(f.df_residual, SignificanceLevel::FivePercent).map_err(wrap)?;
                    Ok(ReplicationEstimate {
                        b: est.value,
                        covered: (est.value - config.b_true).abs() <= crit * est.std_error,
                    })
                })
                .collect()
        })
        .collect();
    results.into_iter().collect()
}

/// Bias, spread and interval coverage of each method over `replications` panels.
pub fn recovery_experiment(
    config: &SimulationConfig,
    replications: usize,
    methods: &[Method],
) -> Result<RecoveryStats> {
    let draws = replicate(config, replications, methods)?;
    let n = replications as f64;
    let methods = methods
        .iter()
        .enumerate()
        .map(|(m, &method)| {
            let bs: Vec<f64> = draws.iter().map(|d| d[m].b).collect();
            let mean = bs.iter().sum::<f64>() / n;
            let std_dev = if replications > 1 {
                (bs.iter().map(|b| (b - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
            } else {
                0.0
            };
            let covered = draws.iter().filter(|d| d[m].covered).count();
            MethodRecovery {
                method,
                mean_estimate: mean,
                mean_bias: mean - config.b_true,
                std_dev,
                coverage: covered as f64 / n,
                replications,
            }
        })
        .collect();
    Ok(RecoveryStats { config: config.clone(), replications, methods })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_noise_no_convergence_keeps_levels() {
        let mut cfg = SimulationConfig::new(7, 4, 6, 0.0);
        cfg.sigma_v = 1e-300;
        cfg.intercept = 0.0;
        let panel = simulate_panel(&cfg).unwrap();
        for r in panel.regions() {
            let first = panel.value(r, 1986).unwrap();
            for &y in panel.periods() {
                assert_eq!(panel.value(r, y).unwrap(), first);
            }
        }
    }

    #[test]
    fn gap_halves_when_b_is_minus_half() {
        let mut cfg = SimulationConfig::new(11, 3, 6, -0.5);
        cfg.sigma_v = 1e-300;
        let ss = cfg.initial_log_mean;
        let panel = simulate_panel(&cfg).unwrap();
        for r in panel.regions() {
            let years = panel.periods();
            for w in years.windows(2) {
                let g0 = panel.value(r, w[0]).unwrap().ln() - ss;
                let g1 = panel.value(r, w[1]).unwrap().ln() - ss;
                assert!((g1 - 0.5 * g0).abs() < 1e-12, "{g0} -> {g1}");
            }
        }
    }

    #[test]
    fn same_seed_same_panel() {
        let cfg = SimulationConfig::new(42, 5, 9, -0.3);
        assert_eq!(simulate_panel(&cfg).unwrap(), simulate_panel(&cfg).unwrap());
        let other = SimulationConfig { seed: 43, ..cfg.clone() };
        assert_ne!(simulate_panel(&cfg).unwrap(), simulate_panel(&other).unwrap());
    }

    #[test]
    fn single_replication_is_its_own_summary() {
        let cfg = SimulationConfig::new(3, 5, 9, -0.3);
        let stats = recovery_experiment(&cfg, 1, &[Method::Pooled, Method::Lsdv]).unwrap();
        let draws = replicate(&cfg, 1, &[Method::Pooled, Method::Lsdv]).unwrap();
        for (m, rec) in stats.methods.iter().enumerate() {
            assert_eq!(rec.mean_estimate, draws[0][m].b);
            assert_eq!(rec.std_dev, 0.0);
            assert_eq!(rec.coverage, if draws[0][m].covered { 1.0 } else { 0.0 });
        }
        // replication 0 is the panel simulate_panel returns
        let panel = simulate_panel(&cfg).unwrap();
        let sample = build_growth_sample::<&str>(&panel, &[]).unwrap();
        let f = fit(&sample, &ModelSpec::absolute(Method::Pooled)).unwrap();
        assert_eq!(f.estimate(CONVERGENCE_LABEL).unwrap().value, draws[0][0].b);
    }

    #[test]
    fn rejects_bad_configs() {
        let ok = SimulationConfig::new(1, 5, 9, -0.3);
        assert!(SimulationConfig { regions: 1, ..ok.clone() }.validate().is_err());
        assert!(SimulationConfig { periods: 2, ..ok.clone() }.validate().is_err());
        assert!(SimulationConfig { sigma_v: 0.0, ..ok.clone() }.validate().is_err());
        assert!(SimulationConfig { b_true: 0.1, ..ok.clone() }.validate().is_err());
        assert!(SimulationConfig { effects: RegionEffects::Fixed(vec![0.0]), ..ok.clone() }.validate().is_err());
        assert!(recovery_experiment(&ok, 0, &[Method::Pooled]).is_err());
    }
}
