//! Study rows, CSV output and gnuplot scripts.

use std::fmt::Write as _;
use std::io::Write;

use crate::harness::cases::TestCase;
use crate::harness::study::StudyKind;
use crate::poly_basis::BasisKind;
use crate::{Error, Result};

pub const COLUMNS: [&str; 12] =
    ["case", "family", "n", "p", "basis", "gs", "h", "ndof", "err_h1_broken", "err_l2", "cond", "residual"];
pub const SLOPE_COLUMNS: [&str; 2] = ["slope_h1", "slope_l2"];

#[derive(Debug, Clone, PartialEq)]
pub struct StudyRow {
    pub case: TestCase,
    pub family: String,
    pub n: usize,
    pub p: usize,
    pub basis: BasisKind,
    pub gs: bool,
    pub h: f64,
    /// Size of the solved system (free dofs).
    pub ndof: usize,
    pub err_h1_broken: f64,
    pub err_l2: f64,
    pub cond: Option<f64>,
    pub residual: f64,
    pub slope_h1: Option<f64>,
    pub slope_l2: Option<f64>,
    /// Patch-case errors on the same configuration.
    pub floor_h1: Option<f64>,
    pub floor_l2: Option<f64>,
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

impl StudyRow {
    fn record(&self, slopes: bool) -> Vec<String> {
        let mut r = vec![
            self.case.to_string(),
            self.family.clone(),
            self.n.to_string(),
            self.p.to_string(),
            self.basis.to_string(),
            u8::from(self.gs).to_string(),
            format!("{:e}", self.h),
            self.ndof.to_string(),
            format!("{:e}", self.err_h1_broken),
            format!("{:e}", self.err_l2),
            opt(self.cond),
            format!("{:e}", self.residual),
        ];
        if slopes {
            r.push(opt(self.slope_h1));
            r.push(opt(self.slope_l2));
        }
        r
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct StudyReport {
    /// `None` for a single solve.
    pub kind: Option<StudyKind>,
    pub rows: Vec<StudyRow>,
}

impl StudyReport {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let slopes = self.kind.is_some();
        let mut w = csv::Writer::from_writer(out);
        let csv_err = |e: csv::Error| Error::InvalidArgument(format!("csv output: {e}"));
        let mut header: Vec<&str> = COLUMNS.to_vec();
        if slopes {
            header.extend(SLOPE_COLUMNS);
        }
        w.write_record(&header).map_err(csv_err)?;
        for row in &self.rows {
            w.write_record(row.record(slopes)).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is utf-8")
    }

    /// Gnuplot script with inline data: errors against `h` (h-study) or `p`,
    /// condition numbers on a second plot when present.
    pub fn gnuplot(&self) -> String {
        let against_h = self.kind == Some(StudyKind::H);
        let mut series: Vec<(String, Vec<&StudyRow>)> = Vec::new();
        for row in &self.rows {
            let label = if against_h {
                format!("{} p={} {}{}", row.family, row.p, row.basis, if row.gs { " gs" } else { "" })
            } else {
                format!("{} n={} {}{}", row.family, row.n, row.basis, if row.gs { " gs" } else { "" })
            };
            match series.iter_mut().find(|(l, _)| *l == label) {
                Some((_, rows)) => rows.push(row),
                None => series.push((label, vec![row])),
            }
        }
        let mut s = String::new();
        for (i, (_, rows)) in series.iter().enumerate() {
            writeln!(s, "$d{i} << EOD").unwrap();
            for r in rows {
                let x = if against_h { r.h } else { r.p as f64 };
                writeln!(s, "{x:e} {:e} {:e} {}", r.err_h1_broken, r.err_l2, r.cond.map_or("NaN".to_string(), |c| format!("{c:e}"))).unwrap();
            }
            writeln!(s, "EOD").unwrap();
        }
        let has_cond = self.rows.iter().any(|r| r.cond.is_some());
        writeln!(s, "set logscale y\nset format y '%.0e'\nset key outside").unwrap();
        if against_h {
            writeln!(s, "set logscale x\nset xlabel 'h'").unwrap();
        } else {
            writeln!(s, "set xlabel 'p'").unwrap();
        }
        if has_cond {
            writeln!(s, "set multiplot layout 1,2").unwrap();
        }
        let plots: Vec<String> = series
            .iter()
            .enumerate()
            .flat_map(|(i, (l, _))| {
                [
                    format!("$d{i} using 1:2 with linespoints title '{l} H1'"),
                    format!("$d{i} using 1:3 with linespoints title '{l} L2'"),
                ]
            })
            .collect();
        writeln!(s, "set ylabel 'error'\nplot {}", plots.join(", \\\n     ")).unwrap();
        if has_cond {
            let plots: Vec<String> = series
                .iter()
                .enumerate()
                .map(|(i, (l, _))| format!("$d{i} using 1:4 with linespoints title '{l}'"))
                .collect();
            writeln!(s, "set ylabel 'cond'\nplot {}", plots.join(", \\\n     ")).unwrap();
            writeln!(s, "unset multiplot").unwrap();
        }
        s
    }
}
