use std::fmt::Write as _;
use std::path::Path;
use std::time::Duration;

use super::config::ExperimentKind;
use super::CliError;

/// One table cell. Floats are written with 17 significant digits.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    Empty,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Float(x) => format!("{x:.16e}"),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::Int(i as i64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Table { header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.header.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<&Cell>> {
        let i = self.header.iter().position(|h| *h == name)?;
        Some(self.rows.iter().map(|r| &r[i]).collect())
    }
}

/// Outcome of one asserted check.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Least-squares slope of `log e` against `log a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderFit {
    pub order: f64,
    /// Root-mean-square residual of the fit in log space.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub kind: ExperimentKind,
    pub config: Vec<(String, String)>,
    pub seed: u64,
    pub checks: Vec<CheckOutcome>,
    pub table: Table,
    pub fit: Option<OrderFit>,
    pub notes: Vec<String>,
    pub timings: Vec<(String, Duration)>,
}

impl RunReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failing(&self) -> impl Iterator<Item = &CheckOutcome> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&CheckOutcome> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Human-readable report: config echo, checks, fit, notes, timings and
    /// the table.
    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "pdmlab {} report", self.kind);
        let _ = writeln!(s, "\n[config]");
        for (k, v) in &self.config {
            let _ = writeln!(s, "  {k} = {v}");
        }
        let _ = writeln!(s, "  seed = {}", self.seed);
        if !self.checks.is_empty() {
            let _ = writeln!(s, "\n[checks]");
            for c in &self.checks {
                let _ = writeln!(s, "  {} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
        }
        if let Some(f) = self.fit {
            let _ = writeln!(s, "\n[fit]\n  order = {:.6}\n  residual = {:.3e}", f.order, f.residual);
        }
        if !self.notes.is_empty() {
            let _ = writeln!(s, "\n[notes]");
            for n in &self.notes {
                let _ = writeln!(s, "  {n}");
            }
        }
        let _ = writeln!(s, "\n[timings]");
        for (k, d) in &self.timings {
            let _ = writeln!(s, "  {k}: {:.3} s", d.as_secs_f64());
        }
        let _ = writeln!(s, "\n[table]\n  {}", self.table.header.join(","));
        for r in &self.table.rows {
            let cells: Vec<String> = r.iter().map(Cell::render).collect();
            let _ = writeln!(s, "  {}", cells.join(","));
        }
        let _ = writeln!(s, "\nresult: {}", if self.passed() { "PASS" } else { "FAIL" });
        s
    }
}

/// Writes the report table as CSV.
pub fn emit_csv(report: &RunReport, path: &Path) -> Result<(), CliError> {
    let io = |e: csv::Error| CliError::Io(format!("{}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    w.write_record(&report.table.header).map_err(io)?;
    for r in &report.table.rows {
        w.write_record(r.iter().map(Cell::render)).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}
