//! Long-format panel CSV.
//!
//! ```text
//! region,year,sector,output_per_worker[,capital_output_ratio][,goods_flow_output_ratio][,employment]
//! ```
//!
//! One row per (region, year, sector). Any further numeric column is kept as
//! an extra structural variable under its header name. Rows whose region is
//! `NATIONAL` carry national employment and are not part of any panel; a
//! sector named `total` carries all-sector employment.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};
use std::path::Path;

use crate::convergence::{location_quotient, LocationQuotientInputs};
use crate::error::{Error, Result};
use crate::panel::{Grid, PanelDataset, CAPITAL_OUTPUT_RATIO, GOODS_FLOW_OUTPUT_RATIO, LOCATION_QUOTIENT};

pub const NATIONAL_REGION: &str = "NATIONAL";
pub const TOTAL_SECTOR: &str = "total";

const REGION: &str = "region";
const YEAR: &str = "year";
const SECTOR: &str = "sector";
const OUTPUT: &str = "output_per_worker";
const EMPLOYMENT: &str = "employment";

#[derive(Debug, Clone, PartialEq)]
pub struct PanelRecord {
    pub line: u64,
    pub region: String,
    pub year: i32,
    pub sector: String,
    pub output_per_worker: Option<f64>,
    pub employment: Option<f64>,
    /// Structural variables by column name, including the two standard ratios.
    pub structural: BTreeMap<String, f64>,
}

impl PanelRecord {
    pub fn is_national(&self) -> bool {
        self.region == NATIONAL_REGION
    }

    pub fn is_total(&self) -> bool {
        self.sector.eq_ignore_ascii_case(TOTAL_SECTOR)
    }
}

/// Every record of a panel file, all sectors.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelFile {
    pub records: Vec<PanelRecord>,
    /// Structural column names in header order.
    pub structural_columns: Vec<String>,
}

fn parse_number(field: &str, column: &str, line: u64) -> Result<Option<f64>> {
    let field = field.trim();
    if field.is_empty() {
        return Ok(None);
    }
    let v: f64 = field.parse().map_err(|_| Error::Malformed {
        line,
        message: format!("{column}: cannot parse {field:?} as a number"),
    })?;
    if !v.is_finite() {
        return Err(Error::Malformed { line, message: format!("{column}: value is not finite") });
    }
    Ok(Some(v))
}

impl PanelFile {
    pub fn read_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|source| Error::Io { path: path.into(), source })?;
        Self::read(file)
    }

    pub fn read(input: impl Read) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(input);
        let headers = reader
            .headers()
            .map_err(|e| Error::Malformed { line: 1, message: e.to_string() })?
            .clone();
        let col = |name: &str| headers.iter().position(|h| h == name);
        let required = |name: &str| {
            col(name).ok_or_else(|| Error::Malformed { line: 1, message: format!("missing column {name}") })
        };
        let (region_col, year_col, sector_col, output_col) =
            (required(REGION)?, required(YEAR)?, required(SECTOR)?, required(OUTPUT)?);
        let employment_col = col(EMPLOYMENT);
        let mut structural_columns = Vec::new();
        for (i, h) in headers.iter().enumerate() {
            if h.is_empty() {
                return Err(Error::Malformed { line: 1, message: format!("column {} has no name", i + 1) });
            }
            if headers.iter().take(i).any(|prev| prev == h) {
                return Err(Error::Malformed { line: 1, message: format!("duplicate column {h}") });
            }
            if ![REGION, YEAR, SECTOR, OUTPUT, EMPLOYMENT].contains(&h) {
                structural_columns.push((i, h.to_string()));
            }
        }

        let mut records = Vec::new();
        let mut seen = BTreeSet::new();
        for row in reader.records() {
            let row = row.map_err(|e| Error::Malformed {
                line: e.position().map(|p| p.line()).unwrap_or(0),
                message: e.to_string(),
            })?;
            let line = row.position().map(|p| p.line()).unwrap_or(0);
            let field = |i: usize| row.get(i).unwrap_or("");
            let region = field(region_col).to_string();
            let sector = field(sector_col).to_string();
            if region.is_empty() || sector.is_empty() {
                return Err(Error::Malformed { line, message: "region and sector must not be empty".into() });
            }
            let year: i32 = field(year_col).parse().map_err(|_| Error::Malformed {
                line,
                message: format!("year: cannot parse {:?} as an integer", field(year_col)),
            })?;
            if !seen.insert((region.clone(), year, sector.clone())) {
                return Err(Error::DuplicateKey { line, region, year, sector });
            }
            let output_per_worker = parse_number(field(output_col), OUTPUT, line)?;
            match output_per_worker {
                Some(v) if v <= 0.0 => {
                    return Err(Error::Malformed {
                        line,
                        message: format!("{OUTPUT} must be positive, got {v}"),
                    })
                }
                None if region != NATIONAL_REGION => {
                    return Err(Error::Malformed { line, message: format!("{OUTPUT} is missing") })
                }
                _ => {}
            }
            let employment = match employment_col {
                Some(i) => parse_number(field(i), EMPLOYMENT, line)?,
                None => None,
            };
            if let Some(e) = employment {
                if e <= 0.0 {
                    return Err(Error::Malformed { line, message: format!("{EMPLOYMENT} must be positive") });
                }
            }
            let mut structural = BTreeMap::new();
            for (i, name) in &structural_columns {
                if let Some(v) = parse_number(field(*i), name, line)? {
                    structural.insert(name.clone(), v);
                }
            }
            records.push(PanelRecord {
                line,
                region,
                year,
                sector,
                output_per_worker,
                employment,
                structural,
            });
        }
        Ok(PanelFile {
            records,
            structural_columns: structural_columns.into_iter().map(|(_, n)| n).collect(),
        })
    }

    /// Regions in order of first appearance, national rows excluded.
    pub fn regions(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for r in self.records.iter().filter(|r| !r.is_national()) {
            if !out.contains(&r.region) {
                out.push(r.region.clone());
            }
        }
        out
    }

    pub fn sectors(&self) -> BTreeSet<&str> {
        self.records.iter().map(|r| r.sector.as_str()).collect()
    }

    /// Panel of one sector restricted to `[from, to]` (either bound optional).
    ///
    /// All regions of the file are kept, so a region without data in this
    /// sector still owns its dummy position.
    pub fn select(&self, sector: &str, from: Option<i32>, to: Option<i32>) -> Result<PanelDataset> {
        let in_window = |y: i32| from.is_none_or(|f| y >= f) && to.is_none_or(|t| y <= t);
        let chosen: Vec<&PanelRecord> = self
            .records
            .iter()
            .filter(|r| !r.is_national() && r.sector == sector && in_window(r.year))
            .collect();
        if chosen.is_empty() {
            return Err(Error::EmptySelection);
        }
        let years: BTreeSet<i32> = chosen.iter().map(|r| r.year).collect();
        let regions = self.regions();
        let mut builder = PanelDataset::builder(sector, regions, years);
        for r in &chosen {
            let v = r.output_per_worker.expect("checked while reading");
            builder = builder.value(&r.region, r.year, v)?;
            if let Some(e) = r.employment {
                builder = builder.employment(&r.region, r.year, e)?;
            }
            for (name, &v) in &r.structural {
                builder = builder.structural(name, &r.region, r.year, v)?;
            }
        }
        builder.build().map_err(|e| match e {
            Error::InvalidPanel(msg) => Error::InvalidPanel(format!("sector {sector}: {msg}")),
            other => other,
        })
    }
}

/// Reads one sector of a panel file, optionally restricted to a year window.
pub fn read_panel(path: impl AsRef<Path>, sector: &str, from: Option<i32>, to: Option<i32>) -> Result<PanelDataset> {
    PanelFile::read_path(path)?.select(sector, from, to)
}

/// Writes a panel in the long format accepted by [`PanelFile::read`].
///
/// Values are written in shortest round-trip form, so reading the output back
/// reproduces every cell exactly.
pub fn write_panel(panel: &PanelDataset, out: impl Write) -> Result<()> {
    let mut names: Vec<&str> = Vec::new();
    for standard in [CAPITAL_OUTPUT_RATIO, GOODS_FLOW_OUTPUT_RATIO] {
        if panel.structural(standard).is_some() {
            names.push(standard);
        }
    }
    for name in panel.structural_names() {
        if !names.contains(&name) {
            names.push(name);
        }
    }
    let mut writer = csv::Writer::from_writer(out);
    let mut header = vec![REGION, YEAR, SECTOR, OUTPUT];
    header.extend(&names);
    if panel.employment().is_some() {
        header.push(EMPLOYMENT);
    }
    let csv_err = |e: csv::Error| Error::Report(e.to_string());
    writer.write_record(&header).map_err(csv_err)?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for (r, region) in panel.regions().iter().enumerate() {
        for (p, year) in panel.periods().iter().enumerate() {
            let Some(value) = panel.values().get(r, p) else { continue };
            let mut rec = vec![region.clone(), year.to_string(), panel.sector().to_string(), value.to_string()];
            for name in &names {
                rec.push(opt(panel.structural(name).and_then(|g| g.get(r, p))));
            }
            if let Some(emp) = panel.employment() {
                rec.push(opt(emp.get(r, p)));
            }
            writer.write_record(&rec).map_err(csv_err)?;
        }
    }
    writer.flush().map_err(|e| Error::Report(e.to_string()))?;
    Ok(())
}

/// Employment denominators for location quotients.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EmploymentTotals {
    /// (sector, year) -> persons employed nationally in the sector.
    pub national_sector: BTreeMap<(String, i32), f64>,
    /// (region, year) -> persons employed in the region, all sectors.
    pub regional_total: BTreeMap<(String, i32), f64>,
    /// year -> persons employed nationally, all sectors.
    pub national_total: BTreeMap<i32, f64>,
}

impl EmploymentTotals {
    /// Builds totals from a file.
    ///
    /// Explicit `NATIONAL` rows win over sums of regions, and explicit `total`
    /// sector rows win over sums of sectors.
    pub fn from_file(file: &PanelFile) -> Self {
        let mut totals = EmploymentTotals::default();
        let mut summed_sector: BTreeMap<(String, i32), f64> = BTreeMap::new();
        let mut summed_region: BTreeMap<(String, i32), f64> = BTreeMap::new();
        let mut explicit_region: BTreeMap<(String, i32), f64> = BTreeMap::new();
        for r in &file.records {
            let Some(e) = r.employment else { continue };
            match (r.is_national(), r.is_total()) {
                (true, true) => {
                    totals.national_total.insert(r.year, e);
                }
                (true, false) => {
                    totals.national_sector.insert((r.sector.clone(), r.year), e);
                }
                (false, true) => {
                    explicit_region.insert((r.region.clone(), r.year), e);
                }
                (false, false) => {
                    *summed_sector.entry((r.sector.clone(), r.year)).or_default() += e;
                    *summed_region.entry((r.region.clone(), r.year)).or_default() += e;
                }
            }
        }
        for (key, e) in summed_sector {
            totals.national_sector.entry(key).or_insert(e);
        }
        for (key, e) in summed_region {
            totals.regional_total.entry(key).or_insert(e);
        }
        totals.regional_total.extend(explicit_region);
        let mut summed_national: BTreeMap<i32, f64> = BTreeMap::new();
        for ((_, year), e) in &totals.regional_total {
            *summed_national.entry(*year).or_default() += e;
        }
        for (year, e) in summed_national {
            totals.national_total.entry(year).or_insert(e);
        }
        totals
    }
}

/// Adds a `location_quotient` structural variable to every cell that has
/// output per worker, using the panel's own sector employment.
pub fn derive_location_quotients(panel: PanelDataset, totals: &EmploymentTotals) -> Result<PanelDataset> {
    let sector = panel.sector().to_string();
    let mut grid = Grid::new(panel.regions().len(), panel.periods().len());
    for (r, region) in panel.regions().iter().enumerate() {
        for (p, &year) in panel.periods().iter().enumerate() {
            if panel.values().get(r, p).is_none() {
                continue;
            }
            let missing = || Error::MissingEmployment { region: region.clone(), sector: sector.clone(), year };
            let regional_sector = panel.employment().and_then(|g| g.get(r, p)).ok_or_else(missing)?;
            let national_sector = *totals.national_sector.get(&(sector.clone(), year)).ok_or_else(|| {
                Error::MissingEmployment { region: NATIONAL_REGION.into(), sector: sector.clone(), year }
            })?;
            let regional_total = *totals.regional_total.get(&(region.clone(), year)).ok_or_else(|| {
                Error::MissingEmployment { region: region.clone(), sector: TOTAL_SECTOR.into(), year }
            })?;
            let national_total = *totals.national_total.get(&year).ok_or_else(|| Error::MissingEmployment {
                region: NATIONAL_REGION.into(),
                sector: TOTAL_SECTOR.into(),
                year,
            })?;
            let lq = location_quotient(&LocationQuotientInputs {
                regional_sector,
                national_sector,
                regional_total,
                national_total,
            })?;
            grid.set(r, p, Some(lq));
        }
    }
    panel.with_structural(LOCATION_QUOTIENT, grid)
}
