//! Regional panels and the regression samples derived from them.
//!
//! A [`PanelDataset`] holds output per worker `P[i,t]` for one sector, indexed
//! by region and year, plus optional structural variables on the same grid.
//! [`build_growth_sample`] turns it into the stacked rows of the growth
//! regression
//!
//! ```text
//! ln P[i,t] - ln P[i,t-1] = c + b ln P[i,t-1] + v[i,t]
//! ```
//!
//! and [`sigma_dispersion`] computes the cross-sectional spread of `ln P`
//! year by year.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Gross fixed capital over output.
pub const CAPITAL_OUTPUT_RATIO: &str = "capital_output_ratio";
/// Flow of goods over output.
pub const GOODS_FLOW_OUTPUT_RATIO: &str = "goods_flow_output_ratio";
/// Sector location quotient.
pub const LOCATION_QUOTIENT: &str = "location_quotient";

/// Values on a region × period grid, `None` where a cell is absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    periods: usize,
    cells: Vec<Option<f64>>,
}

impl Grid {
    pub fn new(regions: usize, periods: usize) -> Self {
        Grid { periods, cells: vec![None; regions * periods] }
    }

    pub fn get(&self, region: usize, period: usize) -> Option<f64> {
        self.cells[region * self.periods + period]
    }

    pub fn set(&mut self, region: usize, period: usize, value: Option<f64>) {
        self.cells[region * self.periods + period] = value;
    }

    pub fn count(&self) -> usize {
        self.cells.iter().filter(|c| c.is_some()).count()
    }
}

/// Output per worker for one sector across regions and years.
///
/// Unbalanced panels are allowed: any (region, year) cell may be missing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PanelDataset {
    sector: String,
    regions: Vec<String>,
    periods: Vec<i32>,
    values: Grid,
    structural: BTreeMap<String, Grid>,
    employment: Option<Grid>,
}

impl PanelDataset {
    /// Starts an empty panel over the given regions and years.
    pub fn builder(
        sector: impl Into<String>,
        regions: impl IntoIterator<Item = impl Into<String>>,
        periods: impl IntoIterator<Item = i32>,
    ) -> PanelBuilder {
        let regions: Vec<String> = regions.into_iter().map(Into::into).collect();
        let periods: Vec<i32> = periods.into_iter().collect();
        let values = Grid::new(regions.len(), periods.len());
        PanelBuilder {
            panel: PanelDataset {
                sector: sector.into(),
                regions,
                periods,
                values,
                structural: BTreeMap::new(),
                employment: None,
            },
        }
    }

    pub fn sector(&self) -> &str {
        &self.sector
    }

    pub fn regions(&self) -> &[String] {
        &self.regions
    }

    pub fn periods(&self) -> &[i32] {
        &self.periods
    }

    pub fn region_index(&self, region: &str) -> Option<usize> {
        self.regions.iter().position(|r| r == region)
    }

    pub fn period_index(&self, year: i32) -> Option<usize> {
        self.periods.binary_search(&year).ok()
    }

    /// Output per worker, if the cell is present.
    pub fn value(&self, region: &str, year: i32) -> Option<f64> {
        let (r, p) = (self.region_index(region)?, self.period_index(year)?);
        self.values.get(r, p)
    }

    pub fn values(&self) -> &Grid {
        &self.values
    }

    pub fn structural(&self, name: &str) -> Option<&Grid> {
        self.structural.get(name)
    }

    pub fn structural_names(&self) -> impl Iterator<Item = &str> {
        self.structural.keys().map(String::as_str)
    }

    pub fn employment(&self) -> Option<&Grid> {
        self.employment.as_ref()
    }

    /// Number of stored productivity cells.
    pub fn cell_count(&self) -> usize {
        self.values.count()
    }

    /// Returns a copy carrying an extra (or replaced) structural variable.
    pub fn with_structural(mut self, name: impl Into<String>, grid: Grid) -> Result<Self> {
        if grid.cells.len() != self.values.cells.len() {
            return Err(Error::InvalidPanel("structural grid has the wrong shape".into()));
        }
        self.structural.insert(name.into(), grid);
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        if self.regions.len() < 2 {
            return Err(Error::InvalidPanel("at least 2 regions are required".into()));
        }
        if self.periods.len() < 2 {
            return Err(Error::InvalidPanel("at least 2 periods are required".into()));
        }
        if self.periods.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidPanel("periods must be strictly increasing".into()));
        }
        let mut seen = std::collections::BTreeSet::new();
        if let Some(dup) = self.regions.iter().find(|r| !seen.insert(r.as_str())) {
            return Err(Error::InvalidPanel(format!("duplicate region {dup}")));
        }
        for (r, region) in self.regions.iter().enumerate() {
            for (p, &year) in self.periods.iter().enumerate() {
                if let Some(v) = self.values.get(r, p) {
                    if v <= 0.0 || !v.is_finite() {
                        return Err(Error::NonPositive { region: region.clone(), year, value: v });
                    }
                }
            }
        }
        Ok(())
    }
}

/// Incrementally fills a [`PanelDataset`]; validation happens in [`build`](Self::build).
#[derive(Debug, Clone)]
pub struct PanelBuilder {
    panel: PanelDataset,
}

impl PanelBuilder {
    fn locate(&self, region: &str, year: i32) -> Result<(usize, usize)> {
        let r = self
            .panel
            .region_index(region)
            .ok_or_else(|| Error::InvalidPanel(format!("unknown region {region}")))?;
        let p = self
            .panel
            .periods
            .iter()
            .position(|&y| y == year)
            .ok_or_else(|| Error::InvalidPanel(format!("unknown year {year}")))?;
        Ok((r, p))
    }

    pub fn value(mut self, region: &str, year: i32, output_per_worker: f64) -> Result<Self> {
        let (r, p) = self.locate(region, year)?;
        self.panel.values.set(r, p, Some(output_per_worker));
        Ok(self)
    }

    pub fn structural(mut self, name: &str, region: &str, year: i32, value: f64) -> Result<Self> {
        let (r, p) = self.locate(region, year)?;
        let (nr, np) = (self.panel.regions.len(), self.panel.periods.len());
        self.panel
            .structural
            .entry(name.to_string())
            .or_insert_with(|| Grid::new(nr, np))
            .set(r, p, Some(value));
        Ok(self)
    }

    pub fn employment(mut self, region: &str, year: i32, persons: f64) -> Result<Self> {
        let (r, p) = self.locate(region, year)?;
        let (nr, np) = (self.panel.regions.len(), self.panel.periods.len());
        self.panel
            .employment
            .get_or_insert_with(|| Grid::new(nr, np))
            .set(r, p, Some(persons));
        Ok(self)
    }

    /// Fills every cell from a closure; `None` leaves the cell absent.
    pub fn fill(mut self, mut f: impl FnMut(&str, i32) -> Option<f64>) -> Self {
        for r in 0..self.panel.regions.len() {
            for p in 0..self.panel.periods.len() {
                let v = f(&self.panel.regions[r], self.panel.periods[p]);
                self.panel.values.set(r, p, v);
            }
        }
        self
    }

    pub fn build(self) -> Result<PanelDataset> {
        self.panel.validate()?;
        Ok(self.panel)
    }
}

/// One region-transition of the growth regression.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthRow {
    pub region: String,
    /// Index of `region` in [`GrowthSample::regions`].
    pub region_index: usize,
    /// Year `t` of the transition `t-1 -> t`.
    pub year: i32,
    /// `ln P[i,t] - ln P[i,t-1]`.
    pub growth: f64,
    /// `ln P[i,t-1]`.
    pub lagged_log: f64,
    /// Structural regressors dated `t-1`, in [`GrowthSample::structural_names`] order.
    pub structural: Vec<f64>,
}

/// Stacked regression rows, grouped by region and ordered by year.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthSample {
    pub sector: String,
    /// Every region of the source panel, including ones that contribute no rows.
    pub regions: Vec<String>,
    pub structural_names: Vec<String>,
    pub rows: Vec<GrowthRow>,
    /// Productivity cells present in the source panel.
    pub cell_count: usize,
    /// Consecutive-year transitions skipped because an endpoint was missing.
    pub dropped_transitions: usize,
}

impl GrowthSample {
    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    /// Number of regions that contribute at least one row.
    pub fn region_count(&self) -> usize {
        self.rows_per_region().iter().filter(|&&n| n > 0).count()
    }

    /// Row counts indexed like [`regions`](Self::regions).
    pub fn rows_per_region(&self) -> Vec<usize> {
        let mut counts = vec![0; self.regions.len()];
        for row in &self.rows {
            counts[row.region_index] += 1;
        }
        counts
    }
}

/// Builds the growth-regression rows from a panel.
///
/// A row is produced for region `i` and year `t` whenever both `P[i,t-1]` and
/// `P[i,t]` are present and `t-1` is itself a panel year. Structural
/// regressors are read at `t-1`.
pub fn build_growth_sample<S: AsRef<str>>(
    panel: &PanelDataset,
    structural_names: &[S],
) -> Result<GrowthSample> {
    let names: Vec<String> = structural_names.iter().map(|s| s.as_ref().to_string()).collect();
    let mut grids = Vec::with_capacity(names.len());
    for (i, name) in names.iter().enumerate() {
        if names[..i].contains(name) {
            return Err(Error::InvalidPanel(format!("structural variable {name} requested twice")));
        }
        grids.push(panel.structural(name));
    }

    let mut rows = Vec::new();
    let mut dropped = 0;
    for (r, region) in panel.regions.iter().enumerate() {
        for p in 1..panel.periods.len() {
            let year = panel.periods[p];
            if panel.periods[p - 1] != year - 1 {
                continue;
            }
            let (Some(prev), Some(cur)) = (panel.values.get(r, p - 1), panel.values.get(r, p)) else {
                dropped += 1;
                continue;
            };
            for (v, y) in [(prev, year - 1), (cur, year)] {
                if v.is_nan() || v <= 0.0 {
                    return Err(Error::NonPositive { region: region.clone(), year: y, value: v });
                }
            }
            let mut structural = Vec::with_capacity(names.len());
            for (name, grid) in names.iter().zip(&grids) {
                let value = grid.and_then(|g| g.get(r, p - 1)).ok_or_else(|| {
                    Error::MissingStructural { name: name.clone(), region: region.clone(), year: year - 1 }
                })?;
                structural.push(value);
            }
            let lagged_log = prev.ln();
            rows.push(GrowthRow {
                region: region.clone(),
                region_index: r,
                year,
                growth: cur.ln() - lagged_log,
                lagged_log,
                structural,
            });
        }
    }
    if rows.is_empty() {
        return Err(Error::NoTransitions);
    }
    Ok(GrowthSample {
        sector: panel.sector.clone(),
        regions: panel.regions.clone(),
        structural_names: names,
        rows,
        cell_count: panel.cell_count(),
        dropped_transitions: dropped,
    })
}

/// Cross-sectional dispersion of `ln P` in one year.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SigmaPoint {
    pub year: i32,
    /// Sample standard deviation (divisor `n - 1`).
    pub std_dev: f64,
    pub regions: usize,
}

/// Dispersion series; years with fewer than two regions are omitted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SigmaSeries {
    pub sector: String,
    pub points: Vec<SigmaPoint>,
}

impl SigmaSeries {
    pub fn get(&self, year: i32) -> Option<&SigmaPoint> {
        self.points.iter().find(|p| p.year == year)
    }
}

pub fn sigma_dispersion(panel: &PanelDataset) -> Result<SigmaSeries> {
    let mut points = Vec::new();
    for (p, &year) in panel.periods.iter().enumerate() {
        let logs: Vec<f64> =
            (0..panel.regions.len()).filter_map(|r| panel.values.get(r, p)).map(f64::ln).collect();
        if logs.len() < 2 {
            continue;
        }
        let n = logs.len() as f64;
        let mean = logs.iter().sum::<f64>() / n;
        let ss: f64 = logs.iter().map(|v| (v - mean).powi(2)).sum();
        points.push(SigmaPoint { year, std_dev: (ss / (n - 1.0)).sqrt(), regions: logs.len() });
    }
    if points.is_empty() {
        return Err(Error::InvalidPanel("no year has at least 2 regions".into()));
    }
    Ok(SigmaSeries { sector: panel.sector.clone(), points })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn balanced(regions: usize, years: std::ops::RangeInclusive<i32>) -> PanelDataset {
        let names: Vec<String> = (1..=regions).map(|i| format!("R{i}")).collect();
        PanelDataset::builder("agriculture", names, years)
            .fill(|r, y| Some(100.0 + r.len() as f64 * (y - 1980) as f64 + r.as_bytes()[1] as f64))
            .build()
            .unwrap()
    }

    #[test]
    fn balanced_five_by_nine_gives_forty_rows() {
        let panel = balanced(5, 1986..=1994);
        assert_eq!(panel.cell_count(), 45);
        let sample = build_growth_sample::<&str>(&panel, &[]).unwrap();
        assert_eq!(sample.row_count(), 40);
        assert_eq!(sample.region_count(), 5);
        assert_eq!(sample.dropped_transitions, 0);
        // grouped by region, years ascending within region
        for w in sample.rows.windows(2) {
            assert!(w[0].region_index < w[1].region_index || w[0].year < w[1].year);
        }
    }

    #[test]
    fn constant_productivity_has_zero_growth() {
        let panel = PanelDataset::builder("s", ["A", "B", "C"], 2000..=2004)
            .fill(|_, _| Some(100.0))
            .build()
            .unwrap();
        let sample = build_growth_sample::<&str>(&panel, &[]).unwrap();
        for row in &sample.rows {
            assert_eq!(row.growth, 0.0);
            assert_eq!(row.lagged_log, 100f64.ln());
        }
    }

    #[test]
    fn single_transition_values() {
        let panel = PanelDataset::builder("s", ["A", "B"], [2000, 2001])
            .value("A", 2000, 100.0)
            .unwrap()
            .value("A", 2001, 110.0)
            .unwrap()
            .value("B", 2000, 50.0)
            .unwrap()
            .build()
            .unwrap();
        let sample = build_growth_sample::<&str>(&panel, &[]).unwrap();
        assert_eq!(sample.row_count(), 1);
        assert_eq!(sample.dropped_transitions, 1);
        let row = &sample.rows[0];
        assert!((row.growth - 0.095310).abs() < 1e-6);
        assert_eq!(row.lagged_log, 100f64.ln());
        assert_eq!(sample.region_count(), 1);
    }

    #[test]
    fn non_consecutive_years_do_not_form_transitions() {
        let panel = PanelDataset::builder("s", ["A", "B"], [1990, 1992])
            .fill(|_, _| Some(10.0))
            .build()
            .unwrap();
        assert!(matches!(build_growth_sample::<&str>(&panel, &[]), Err(Error::NoTransitions)));
    }

    #[test]
    fn rejects_invalid_panels() {
        let one_region = PanelDataset::builder("s", ["A"], [1, 2]).fill(|_, _| Some(1.0)).build();
        assert!(matches!(one_region, Err(Error::InvalidPanel(_))));
        let one_period = PanelDataset::builder("s", ["A", "B"], [1]).fill(|_, _| Some(1.0)).build();
        assert!(matches!(one_period, Err(Error::InvalidPanel(_))));
        let unordered = PanelDataset::builder("s", ["A", "B"], [2, 1]).fill(|_, _| Some(1.0)).build();
        assert!(matches!(unordered, Err(Error::InvalidPanel(_))));
        let zero = PanelDataset::builder("s", ["A", "B"], [1, 2]).fill(|_, _| Some(0.0)).build();
        assert!(matches!(zero, Err(Error::NonPositive { .. })));
    }

    #[test]
    fn structural_regressors_are_dated_at_start_of_transition() {
        let panel = PanelDataset::builder("s", ["A", "B"], [2000, 2001, 2002])
            .fill(|_, _| Some(5.0))
            .structural(CAPITAL_OUTPUT_RATIO, "A", 2000, 1.0)
            .unwrap()
            .structural(CAPITAL_OUTPUT_RATIO, "A", 2001, 2.0)
            .unwrap()
            .structural(CAPITAL_OUTPUT_RATIO, "B", 2000, 3.0)
            .unwrap()
            .structural(CAPITAL_OUTPUT_RATIO, "B", 2001, 4.0)
            .unwrap()
            .build()
            .unwrap();
        let sample = build_growth_sample(&panel, &[CAPITAL_OUTPUT_RATIO]).unwrap();
        let got: Vec<(i32, f64)> = sample.rows.iter().map(|r| (r.year, r.structural[0])).collect();
        assert_eq!(got, vec![(2001, 1.0), (2002, 2.0), (2001, 3.0), (2002, 4.0)]);

        let missing = build_growth_sample(&panel, &[GOODS_FLOW_OUTPUT_RATIO]);
        assert!(matches!(missing, Err(Error::MissingStructural { .. })));
    }

    #[test]
    fn sigma_examples() {
        let e = std::f64::consts::E;
        let panel = PanelDataset::builder("s", ["A", "B", "C"], [2000, 2001, 2002])
            .value("A", 2000, 7.0)
            .unwrap()
            .value("B", 2000, 7.0)
            .unwrap()
            .value("C", 2000, 7.0)
            .unwrap()
            .value("A", 2001, e)
            .unwrap()
            .value("B", 2001, e.powi(3))
            .unwrap()
            .value("A", 2002, 1.0)
            .unwrap()
            .build()
            .unwrap();
        let sigma = sigma_dispersion(&panel).unwrap();
        assert_eq!(sigma.get(2000).unwrap().std_dev, 0.0);
        assert!((sigma.get(2001).unwrap().std_dev - 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(sigma.get(2001).unwrap().regions, 2);
        assert!(sigma.get(2002).is_none());
    }

    #[test]
    fn sigma_requires_two_regions_somewhere() {
        let panel = PanelDataset::builder("s", ["A", "B"], [1, 2])
            .value("A", 1, 1.0)
            .unwrap()
            .value("B", 2, 1.0)
            .unwrap()
            .build()
            .unwrap();
        assert!(sigma_dispersion(&panel).is_err());
    }
}
