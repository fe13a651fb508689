//! CSV layout shared by `compute`, `verify` and `sweep`.

use std::io::Write;

use gaussdist_core::bounds::BoundReport;

/// Fixed leading columns, then the per-command extras.
pub const COLUMNS: [&str; 20] = [
    "case_id",
    "modes",
    "a",
    "b",
    "mean_dist",
    "cov_dist_1",
    "cov_dist_2",
    "overlap",
    "lower",
    "basic_upper",
    "intermediate",
    "e1",
    "e2",
    "e3",
    "lami_t2",
    "lami_l4",
    "oracle_distance",
    "winner",
    "oracle_overlap",
    "violations",
];

#[derive(Debug, Clone)]
pub struct Row {
    pub case_id: String,
    pub report: BoundReport,
    pub oracle_distance: Option<f64>,
    pub oracle_overlap: Option<f64>,
    pub violations: Vec<String>,
}

impl Row {
    pub fn new(case_id: impl Into<String>, report: BoundReport) -> Self {
        Self { case_id: case_id.into(), report, oracle_distance: None, oracle_overlap: None, violations: Vec::new() }
    }

    pub fn fields(&self) -> Vec<String> {
        let r = &self.report;
        let num = |x: f64| format!("{x}");
        let opt = |x: Option<f64>| x.map(num).unwrap_or_default();
        vec![
            self.case_id.clone(),
            r.modes.to_string(),
            num(r.a),
            num(r.b),
            num(r.mean_dist),
            num(r.cov_dist_1),
            num(r.cov_dist_2),
            num(r.overlap.value),
            num(r.lower),
            num(r.basic_upper),
            num(r.intermediate),
            opt(r.e1),
            opt(r.e2),
            num(r.e3),
            num(r.lami_t2),
            opt(r.lami_l4),
            opt(self.oracle_distance),
            r.winner.clone(),
            opt(self.oracle_overlap),
            self.violations.join(";"),
        ]
    }
}

pub fn write_csv<W: Write>(out: W, rows: &[Row]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COLUMNS)?;
    for row in rows {
        w.write_record(row.fields())?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use gaussdist_core::bounds::{report, OverlapConvention};
    use gaussdist_core::symplectic::GaussianState;

    use super::*;

    #[test]
    fn blank_cells_for_missing_values() {
        let r = report(&GaussianState::vacuum(1).unwrap(), &GaussianState::thermal(1, 1.0).unwrap(), OverlapConvention::Quarter)
            .unwrap();
        let fields = Row::new("x", r).fields();
        assert_eq!(fields.len(), COLUMNS.len());
        assert_eq!(fields[11], "");
        assert_eq!(fields[12], "4");
        assert_eq!(fields[16], "");
    }

    #[test]
    fn header_then_rows() {
        let r = report(&GaussianState::vacuum(1).unwrap(), &GaussianState::vacuum(1).unwrap(), OverlapConvention::Quarter)
            .unwrap();
        let mut buf = Vec::new();
        write_csv(&mut buf, &[Row::new("a", r.clone()), Row::new("b", r)]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text.starts_with("case_id,modes,a,b,"));
    }
}
