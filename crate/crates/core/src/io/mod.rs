//! Panel CSV files and report tables.

pub mod panel_csv;
pub mod report;

pub use panel_csv::{
    derive_location_quotients, read_panel, write_panel, EmploymentTotals, PanelFile, PanelRecord,
    NATIONAL_REGION, TOTAL_SECTOR,
};
pub use report::{render_report, Format, ReportTable};
