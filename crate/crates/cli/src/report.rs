//! CSV and summary output. Values are written with 17 significant decimal
//! digits so every f64 round-trips exactly; rows are emitted in a fixed
//! order, making reruns byte-identical.

use anyhow::{bail, Context, Result};
use std::io::Write;
use std::path::Path;

/// A finished experiment: a table, its assertion results, and an optional
/// plot.
pub struct ExperimentOutcome {
    pub name: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
    pub assertions: Vec<Assertion>,
    pub plot: Option<PlotSpec>,
    pub notes: Vec<String>,
}

pub struct Assertion {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Assertion {
    pub fn check(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

/// Data for one SVG line plot: x values and named y series.
pub struct PlotSpec {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub x: Vec<f64>,
    pub series: Vec<(String, Vec<f64>)>,
}

/// Format with 17 significant digits; round-trips any finite f64.
pub fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

impl ExperimentOutcome {
    /// Validate, write `<name>.csv` (and `<name>.svg` when requested), and
    /// print the summary. Returns whether all assertions passed.
    pub fn emit(&self, out_dir: &Path, plot: bool) -> Result<bool> {
        for (i, row) in self.rows.iter().enumerate() {
            if row.len() != self.header.len() {
                bail!("row {i} has {} values, header has {}", row.len(), self.header.len());
            }
            if let Some(bad) = row.iter().find(|v| !v.is_finite()) {
                bail!("row {i} contains a non-finite value {bad}");
            }
        }
        std::fs::create_dir_all(out_dir)
            .with_context(|| format!("creating output directory {}", out_dir.display()))?;

        let csv_path = out_dir.join(format!("{}.csv", self.name));
        let mut csv = String::new();
        csv.push_str(&self.header.join(","));
        csv.push('\n');
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(|&v| format_value(v)).collect();
            csv.push_str(&line.join(","));
            csv.push('\n');
        }
        std::fs::write(&csv_path, csv)
            .with_context(|| format!("writing {}", csv_path.display()))?;

        if plot {
            if let Some(spec) = &self.plot {
                let svg_path = out_dir.join(format!("{}.svg", self.name));
                std::fs::write(&svg_path, crate::svg::render(spec))
                    .with_context(|| format!("writing {}", svg_path.display()))?;
            }
        }

        let mut stdout = std::io::stdout().lock();
        writeln!(stdout, "experiment: {}", self.name)?;
        writeln!(stdout, "rows written: {} -> {}", self.rows.len(), csv_path.display())?;
        for note in &self.notes {
            writeln!(stdout, "note: {note}")?;
        }
        let mut all_passed = true;
        for assertion in &self.assertions {
            let status = if assertion.passed { "pass" } else { "FAIL" };
            all_passed &= assertion.passed;
            if assertion.detail.is_empty() {
                writeln!(stdout, "assert [{status}] {}", assertion.name)?;
            } else {
                writeln!(stdout, "assert [{status}] {}: {}", assertion.name, assertion.detail)?;
            }
        }
        writeln!(
            stdout,
            "summary: {}/{} assertions passed",
            self.assertions.iter().filter(|a| a.passed).count(),
            self.assertions.len()
        )?;
        Ok(all_passed)
    }
}
