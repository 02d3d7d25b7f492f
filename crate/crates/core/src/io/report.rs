use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::attractor::{ConvergenceTable, PerturbedReport, SemicontinuityTable};
use crate::dynamics::Trajectory;
use crate::error::IoError;
use crate::estimates::EstimateReport;

/// Column-labelled numeric table written as CSV.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| num(*v)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

impl From<&SemicontinuityTable> for Table {
    fn from(t: &SemicontinuityTable) -> Self {
        let mut out = Table::new(&["eps", "dist"]);
        for r in &t.rows {
            out.push(vec![r.eps, r.dist]);
        }
        out
    }
}

impl From<&ConvergenceTable> for Table {
    fn from(t: &ConvergenceTable) -> Self {
        let mut out = Table::new(&["eps", "error"]);
        for r in &t.rows {
            out.push(vec![r.eps, r.error]);
        }
        out
    }
}

impl From<&PerturbedReport> for Table {
    fn from(t: &PerturbedReport) -> Self {
        let mut out = Table::new(&[
            "eps",
            "delta",
            "forcing_gap",
            "dist_unperturbed",
            "dist_baseline",
        ]);
        for r in &t.rows {
            out.push(vec![
                r.eps,
                r.delta,
                r.forcing_gap,
                r.dist_unperturbed,
                r.dist_baseline,
            ]);
        }
        out
    }
}

/// Shortest round-tripping decimal form.
fn num(v: f64) -> String {
    format!("{v:e}")
}

/// Structured text ledger: one `[entry]` block per entry, then `[scalars]`.
pub fn report_text(report: &EstimateReport) -> String {
    let mut out = String::from("# hvns estimate report\n");
    for e in &report.entries {
        let _ = write!(
            out,
            "\n[entry]\nname = {}\ntag = {}\nlhs = {}\nrhs = {}\nmargin = {}\ntolerance = {}\npass = {}\n",
            e.name,
            e.tag,
            num(e.lhs),
            num(e.rhs),
            num(e.margin),
            num(e.tolerance),
            e.pass
        );
    }
    if !report.scalars.is_empty() {
        out.push_str("\n[scalars]\n");
        for (k, v) in &report.scalars {
            let _ = writeln!(out, "{k} = {}", num(*v));
        }
    }
    out
}

pub fn report_csv(report: &EstimateReport) -> String {
    let mut out = String::from("name,tag,lhs,rhs,margin,tolerance,pass\n");
    for e in &report.entries {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            e.name,
            e.tag,
            num(e.lhs),
            num(e.rhs),
            num(e.margin),
            num(e.tolerance),
            e.pass
        );
    }
    out
}

/// Writes `path` as structured text and a CSV twin next to it.
pub fn write_report(report: &EstimateReport, path: impl AsRef<Path>) -> Result<(), IoError> {
    let path = path.as_ref();
    fs::write(path, report_text(report))?;
    fs::write(path.with_extension("csv"), report_csv(report))?;
    Ok(())
}

pub fn write_table(table: &Table, path: impl AsRef<Path>) -> Result<(), IoError> {
    fs::write(path, table.to_csv())?;
    Ok(())
}

/// Dense scalar series of a trajectory.
pub fn norm_table(traj: &Trajectory) -> Table {
    let mut t = Table::new(&[
        "t",
        "energy",
        "enstrophy",
        "hyper",
        "hyper_grad",
        "work",
        "dual_dt",
    ]);
    let s = &traj.series;
    for (i, &time) in traj.times.iter().enumerate() {
        t.push(vec![
            time,
            s.energy[i],
            s.enstrophy[i],
            s.hyper[i],
            s.hyper_grad[i],
            s.work[i],
            s.dual_dt[i],
        ]);
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attractor::SemicontinuityRow;
    use crate::estimates::EstimateEntry;

    fn report() -> EstimateReport {
        let mut r = EstimateReport::default();
        r.entries.push(EstimateEntry::new("decay_envelope", "decay", 1.0, 2.0, 1e-8));
        r.entries.push(EstimateEntry::new("asymptotic_radius", "decay", 3.0, 2.0, 0.0));
        r.scalars.insert("rho0".into(), 0.5);
        r
    }

    #[test]
    fn empty_report_is_header_only() {
        let r = EstimateReport::default();
        assert_eq!(report_text(&r), "# hvns estimate report\n");
        assert_eq!(report_csv(&r), "name,tag,lhs,rhs,margin,tolerance,pass\n");
        assert_eq!(Table::new(&["eps", "dist"]).to_csv(), "eps,dist\n");
    }

    #[test]
    fn records_and_determinism() {
        let r = report();
        let text = report_text(&r);
        assert!(text.contains("name = asymptotic_radius\n"));
        assert!(text.contains("margin = -1e0\ntolerance = 0e0\npass = false"));
        assert!(text.contains("[scalars]\nrho0 = 5e-1\n"));
        let dir = tempfile::tempdir().unwrap();
        let (a, b) = (dir.path().join("a.txt"), dir.path().join("b.txt"));
        write_report(&r, &a).unwrap();
        write_report(&r, &b).unwrap();
        assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
        assert_eq!(
            fs::read(a.with_extension("csv")).unwrap(),
            fs::read(b.with_extension("csv")).unwrap()
        );
    }

    #[test]
    fn semicontinuity_table_has_two_columns() {
        let t = SemicontinuityTable {
            rows: vec![
                SemicontinuityRow {
                    eps: 0.1,
                    dist: 0.25,
                    inclusion_violations: 0,
                },
                SemicontinuityRow {
                    eps: 0.05,
                    dist: 0.125,
                    inclusion_violations: 0,
                },
            ],
            monotone: true,
            slope: Some(1.0),
        };
        assert_eq!(Table::from(&t).to_csv(), "eps,dist\n1e-1,2.5e-1\n5e-2,1.25e-1\n");
    }
}
