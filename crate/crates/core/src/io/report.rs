//! Result tables in the layout of the usual convergence tables:
//!
//! ```text
//! Method | Const. | D1 .. DR | Coef.1 .. Coef.m | T.C. | DW | R² | G.L.
//! ```
//!
//! Estimates print to three decimals (half away from zero) with the
//! t-statistic in parentheses and `*` / `**` for 5% / 10% significance.
//! JSON keeps full precision and can be rendered again as md or tsv.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::convergence::ConvergenceReport;
use crate::error::{Error, Result};
use crate::estimators::{dummy_label, slope_label, CONSTANT_LABEL};
use crate::montecarlo::RecoveryStats;
use crate::panel::SigmaSeries;
use crate::regression::Method;

/// Placeholder for a region dummy that does not exist in a sub-panel.
pub const MISSING_DUMMY: &str = "---";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Md,
    Tsv,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "md" | "markdown" => Ok(Format::Md),
            "tsv" => Ok(Format::Tsv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format {other} (expected md, tsv or json)")),
        }
    }
}

/// Rounds half away from zero to three decimals, never printing `-0.000`.
pub fn fmt3(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let r = (x * 1000.0).round() / 1000.0;
    if r == 0.0 {
        "0.000".into()
    } else {
        format!("{r:.3}")
    }
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableSpec {
    pub sector: String,
    pub response: String,
    /// Structural regressors, `Coef.2` onwards.
    pub structural: Vec<String>,
    /// Panel regions; `D{i}` belongs to `regions[i-1]`.
    pub regions: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub value: f64,
    pub t: Option<f64>,
    pub stars: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub method: Method,
    pub estimates: BTreeMap<String, Cell>,
    pub tc: Option<f64>,
    pub dw: Option<f64>,
    pub r2: Option<f64>,
    pub df: usize,
}

/// One sector's results across estimation methods.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportTable {
    pub spec: TableSpec,
    pub rows: Vec<TableRow>,
}

impl ReportTable {
    /// Rows come out as Pooling, LSDV, GLS regardless of input order.
    pub fn from_reports(reports: &[ConvergenceReport]) -> Result<Self> {
        let first = reports.first().ok_or_else(|| Error::Report("no results to report".into()))?;
        for r in &reports[1..] {
            if r.spec.structural != first.spec.structural || r.sector != first.sector || r.regions != first.regions {
                return Err(Error::Report("mixed specifications in one table".into()));
            }
        }
        let mut sorted: Vec<&ConvergenceReport> = reports.iter().collect();
        sorted.sort_by_key(|r| r.fit.method);
        let rows = sorted
            .into_iter()
            .map(|r| TableRow {
                method: r.fit.method,
                estimates: r
                    .fit
                    .labels
                    .iter()
                    .enumerate()
                    .map(|(j, label)| {
                        let cell = Cell {
                            value: r.fit.coefficients[j],
                            t: finite(r.fit.t_stats[j]),
                            stars: r.significance[j].stars().to_string(),
                        };
                        (label.clone(), cell)
                    })
                    .collect(),
                tc: r.tc,
                dw: r.fit.dw,
                r2: r.fit.r_squared,
                df: r.fit.df_residual,
            })
            .collect();
        Ok(ReportTable {
            spec: TableSpec {
                sector: first.sector.clone(),
                response: "dlnP".into(),
                structural: first.spec.structural.clone(),
                regions: first.regions.clone(),
            },
            rows,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Report(e.to_string()))
    }

    fn columns(&self) -> Vec<String> {
        let mut cols = vec!["Method".to_string()];
        if self.rows.iter().any(|r| r.estimates.contains_key(CONSTANT_LABEL)) {
            cols.push(CONSTANT_LABEL.into());
        }
        if self.rows.iter().any(|r| r.method == Method::Lsdv) {
            cols.extend((0..self.spec.regions.len()).map(dummy_label));
        }
        cols.extend((0..=self.spec.structural.len()).map(slope_label));
        cols.extend(["T.C.", "DW", "R²", "G.L."].map(String::from));
        cols
    }

    fn cells(&self, row: &TableRow, columns: &[String]) -> Vec<String> {
        let opt = |v: Option<f64>| v.map(fmt3).unwrap_or_default();
        columns
            .iter()
            .map(|c| match c.as_str() {
                "Method" => row.method.table_label().to_string(),
                "T.C." => opt(row.tc),
                "DW" => opt(row.dw),
                "R²" => opt(row.r2),
                "G.L." => row.df.to_string(),
                label => match row.estimates.get(label) {
                    Some(cell) => format!(
                        "{}{} ({})",
                        fmt3(cell.value),
                        cell.stars,
                        cell.t.map(fmt3).unwrap_or_else(|| "-".into())
                    ),
                    None if row.method == Method::Lsdv && label.starts_with('D') => MISSING_DUMMY.into(),
                    None => String::new(),
                },
            })
            .collect()
    }

    fn legend(&self) -> String {
        let mut parts = vec!["Coef.1: convergence (ln P lagged)".to_string()];
        for (j, name) in self.spec.structural.iter().enumerate() {
            parts.push(format!("{}: {name}", slope_label(j + 1)));
        }
        parts.push("T.C.: annual rate of convergence ln(1+Coef.1)".into());
        parts.push("* significant at 5%, ** at 10%".into());
        parts.join("; ")
    }

    pub fn render(&self, format: Format) -> Result<String> {
        let columns = self.columns();
        let mut out = String::new();
        match format {
            Format::Json => {
                out = serde_json::to_string_pretty(self).map_err(|e| Error::Report(e.to_string()))?;
                out.push('\n');
            }
            Format::Tsv => {
                out.push_str(&columns.join("\t"));
                out.push('\n');
                for row in &self.rows {
                    out.push_str(&self.cells(row, &columns).join("\t"));
                    out.push('\n');
                }
            }
            Format::Md => {
                let _ = writeln!(out, "### {}", self.spec.sector);
                out.push('\n');
                let _ = writeln!(out, "| {} |", columns.join(" | "));
                let _ = writeln!(out, "|{}", columns.iter().map(|_| "---|").collect::<String>());
                for row in &self.rows {
                    let _ = writeln!(out, "| {} |", self.cells(row, &columns).join(" | "));
                }
                out.push('\n');
                let _ = writeln!(out, "{}", self.legend());
                for (i, region) in self.spec.regions.iter().enumerate() {
                    if self.rows.iter().any(|r| r.method == Method::Lsdv) {
                        let _ = writeln!(out, "{}: {region}", dummy_label(i));
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Convenience wrapper around [`ReportTable::from_reports`] and [`ReportTable::render`].
pub fn render_report(reports: &[ConvergenceReport], format: Format) -> Result<String> {
    ReportTable::from_reports(reports)?.render(format)
}

fn json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Report(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn simple_table(format: Format, header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    match format {
        Format::Md => {
            let _ = writeln!(out, "| {} |", header.join(" | "));
            let _ = writeln!(out, "|{}", header.iter().map(|_| "---|").collect::<String>());
            for r in rows {
                let _ = writeln!(out, "| {} |", r.join(" | "));
            }
        }
        _ => {
            let _ = writeln!(out, "{}", header.join("\t"));
            for r in rows {
                let _ = writeln!(out, "{}", r.join("\t"));
            }
        }
    }
    out
}

/// Per-year dispersion table.
pub fn render_sigma(series: &SigmaSeries, format: Format) -> Result<String> {
    if format == Format::Json {
        return json(series);
    }
    let rows: Vec<Vec<String>> = series
        .points
        .iter()
        .map(|p| vec![p.year.to_string(), fmt3(p.std_dev), p.regions.to_string()])
        .collect();
    Ok(simple_table(format, &["Year", "sigma(ln P)", "Regions"], &rows))
}

/// A location quotient for one region and year.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LqEntry {
    pub region: String,
    pub year: i32,
    pub location_quotient: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LqTable {
    pub sector: String,
    pub entries: Vec<LqEntry>,
}

pub fn render_lq(table: &LqTable, format: Format) -> Result<String> {
    if format == Format::Json {
        return json(table);
    }
    let rows: Vec<Vec<String>> = table
        .entries
        .iter()
        .map(|e| vec![e.region.clone(), e.year.to_string(), fmt3(e.location_quotient)])
        .collect();
    Ok(simple_table(format, &["Region", "Year", "LQ"], &rows))
}

pub fn render_recovery(stats: &RecoveryStats, format: Format) -> Result<String> {
    if format == Format::Json {
        return json(stats);
    }
    let rows: Vec<Vec<String>> = stats
        .methods
        .iter()
        .map(|m| {
            vec![
                m.method.table_label().to_string(),
                fmt3(m.mean_estimate),
                fmt3(m.mean_bias),
                fmt3(m.std_dev),
                fmt3(m.coverage),
                m.replications.to_string(),
            ]
        })
        .collect();
    Ok(simple_table(format, &["Method", "Mean b", "Bias", "SD", "Coverage95", "Reps"], &rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_is_half_away_from_zero() {
        assert_eq!(fmt3(-0.0625), "-0.063");
        assert_eq!(fmt3(0.0625), "0.063");
        assert_eq!(fmt3(2.5), "2.500");
        assert_eq!(fmt3(-0.0001), "0.000");
        assert_eq!(fmt3(38.0), "38.000");
    }

    fn table() -> ReportTable {
        let cell = |value: f64, t: f64, stars: &str| Cell { value, t: Some(t), stars: stars.into() };
        let pooled = TableRow {
            method: Method::Pooled,
            estimates: [("Const.".to_string(), cell(0.558, 1.2, "")), ("Coef.1".into(), cell(-0.063, -1.163, ""))]
                .into_iter()
                .collect(),
            tc: Some(-0.065),
            dw: Some(1.851),
            r2: Some(0.034),
            df: 38,
        };
        let lsdv = TableRow {
            method: Method::Lsdv,
            estimates: [
                ("D1".to_string(), cell(2.171, 1.769, "**")),
                ("D2".into(), cell(2.143, 1.753, "**")),
                ("Coef.1".into(), cell(-0.239, -1.869, "**")),
            ]
            .into_iter()
            .collect(),
            tc: Some(-0.273),
            dw: Some(1.759),
            r2: Some(0.198),
            df: 27,
        };
        ReportTable {
            spec: TableSpec {
                sector: "metals".into(),
                response: "dlnP".into(),
                structural: vec![],
                regions: vec!["A".into(), "B".into(), "C".into()],
            },
            rows: vec![pooled, lsdv],
        }
    }

    #[test]
    fn markdown_layout() {
        let md = table().render(Format::Md).unwrap();
        assert!(md.contains("| Method | Const. | D1 | D2 | D3 | Coef.1 | T.C. | DW | R² | G.L. |"));
        assert!(md.contains("| Pooling | 0.558 (1.200) |  |  |  | -0.063 (-1.163) | -0.065 | 1.851 | 0.034 | 38 |"));
        assert!(md.contains("| LSDV |  | 2.171** (1.769) | 2.143** (1.753) | --- | -0.239** (-1.869) |"));
    }

    #[test]
    fn json_round_trip_renders_identically() {
        let t = table();
        let text = t.render(Format::Json).unwrap();
        let back = ReportTable::from_json(&text).unwrap();
        assert_eq!(back, t);
        assert_eq!(back.render(Format::Md).unwrap(), t.render(Format::Md).unwrap());
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["rows"][0]["method"], "pooled");
        assert_eq!(v["rows"][0]["estimates"]["Coef.1"]["t"], -1.163);
        assert_eq!(v["rows"][1]["df"], 27);
    }

    #[test]
    fn tsv_has_one_line_per_row() {
        let tsv = table().render(Format::Tsv).unwrap();
        assert_eq!(tsv.lines().count(), 3);
        assert!(tsv.starts_with("Method\tConst.\tD1"));
    }
}
