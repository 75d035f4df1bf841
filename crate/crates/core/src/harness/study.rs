//! Convergence and conditioning studies.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::assembly::{assemble, condition_number, solve, AssemblyOptions, GlobalSystem, Solution, CONDITION_CAP};
use crate::harness::cases::TestCase;
use crate::harness::family::FamilySpec;
use crate::harness::norms::{error_norms, ErrorNorms};
use crate::harness::report::{StudyReport, StudyRow};
use crate::mesh::PolygonMesh;
use crate::poly_basis::BasisKind;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StudyKind {
    H,
    P,
    Basis,
    Gs,
}

impl fmt::Display for StudyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StudyKind::H => "h",
            StudyKind::P => "p",
            StudyKind::Basis => "basis",
            StudyKind::Gs => "gs",
        })
    }
}

impl FromStr for StudyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "h" => Ok(StudyKind::H),
            "p" => Ok(StudyKind::P),
            "basis" => Ok(StudyKind::Basis),
            "gs" => Ok(StudyKind::Gs),
            _ => Err(Error::InvalidArgument(format!("unknown study kind `{s}` (expected h, p, basis or gs)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    pub p: usize,
    pub basis: BasisKind,
    pub gram_schmidt: bool,
    /// Compute the condition number when the system has at most
    /// [`CONDITION_CAP`] free dofs.
    pub condition: bool,
}

#[derive(Debug, Clone)]
pub struct CaseSolution {
    pub system: GlobalSystem,
    pub solution: Solution,
    pub errors: ErrorNorms,
}

pub fn solve_case(case: TestCase, mesh: &PolygonMesh, opts: RunOptions) -> Result<CaseSolution> {
    let aopts = AssemblyOptions { p: opts.p, basis: opts.basis, gram_schmidt: opts.gram_schmidt };
    let system = assemble(mesh, aopts, &|x| case.f(x), &|x| case.dirichlet(x))?;
    let solution = solve(&system)?;
    let errors = error_norms(&system.locals, &solution.cell_dofs, &|x| case.u(x), &|x| case.grad(x))?;
    Ok(CaseSolution { system, solution, errors })
}

/// Solve one configuration and summarize it as a report row.
pub fn run_case(case: TestCase, mesh: &PolygonMesh, family: &str, n: usize, opts: RunOptions) -> Result<StudyRow> {
    let run = solve_case(case, mesh, opts)?;
    let cond = if opts.condition && run.system.n_free() <= CONDITION_CAP {
        Some(condition_number(&run.system)?)
    } else {
        None
    };
    Ok(StudyRow {
        case,
        family: family.to_string(),
        n,
        p: opts.p,
        basis: opts.basis,
        gs: opts.gram_schmidt,
        h: mesh.mesh_size(),
        ndof: run.system.n_free(),
        err_h1_broken: run.errors.h1_broken,
        err_l2: run.errors.l2,
        cond,
        residual: run.solution.residual,
        slope_h1: None,
        slope_l2: None,
        floor_h1: None,
        floor_l2: None,
    })
}

/// Rows within this factor of the patch-case floor are excluded from fits.
pub const FLOOR_FACTOR: f64 = 100.0;

/// Least-squares slope of `y` against `x`; `None` with fewer than three
/// points.
pub fn fit_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 3 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

fn usable(err: f64, floor: Option<f64>) -> bool {
    err > 0.0 && floor.is_none_or(|f| err >= FLOOR_FACTOR * f)
}

/// `log(values)` strictly decreasing with strictly growing decrements.
pub fn concave_decreasing(values: &[f64]) -> bool {
    let logs: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let dec: Vec<f64> = logs.windows(2).map(|w| w[0] - w[1]).collect();
    dec.iter().all(|&d| d > 0.0) && dec.windows(2).all(|w| w[1] > w[0])
}

#[derive(Debug, Clone)]
pub struct StudyConfig {
    pub kind: StudyKind,
    pub case: TestCase,
    pub families: Vec<FamilySpec>,
    pub n_list: Vec<usize>,
    pub p_list: Vec<usize>,
    pub bases: Vec<BasisKind>,
    pub gram_schmidt: bool,
}

#[derive(Debug, Clone, Copy)]
struct Job {
    mesh: usize,
    n: usize,
    opts: RunOptions,
    group: usize,
}

/// Run a study. Rows are computed in parallel and returned in a fixed order:
/// family, then n, then p, then basis.
pub fn run_study(cfg: &StudyConfig) -> Result<StudyReport> {
    if cfg.families.is_empty() || cfg.n_list.is_empty() || cfg.p_list.is_empty() || cfg.bases.is_empty() {
        return Err(Error::InvalidArgument("study needs at least one family, n, p and basis".into()));
    }
    let condition = matches!(cfg.kind, StudyKind::Basis | StudyKind::Gs);
    let gs_flags: Vec<bool> = match cfg.kind {
        StudyKind::Gs => vec![false, true],
        _ => vec![cfg.gram_schmidt],
    };

    let mut specs = Vec::new();
    let mut jobs = Vec::new();
    let mut groups = 0;
    for fam in &cfg.families {
        // slope groups: across n for the h-study, across p for the p-study
        let mut group_ids = HashMap::new();
        for &n in &cfg.n_list {
            let spec = FamilySpec { n, ..*fam };
            specs.push(spec);
            let mesh = specs.len() - 1;
            for &p in &cfg.p_list {
                for &basis in &cfg.bases {
                    for &gs in &gs_flags {
                        let key = match cfg.kind {
                            StudyKind::H => Some((0, p, basis, gs)),
                            StudyKind::P => Some((n, 0, basis, gs)),
                            _ => None,
                        };
                        let group = key.map_or(usize::MAX, |k| {
                            *group_ids.entry(k).or_insert_with(|| {
                                groups += 1;
                                groups - 1
                            })
                        });
                        let opts = RunOptions { p, basis, gram_schmidt: gs, condition };
                        jobs.push(Job { mesh, n, opts, group });
                    }
                }
            }
        }
    }

    let meshes: Vec<PolygonMesh> = specs.par_iter().map(|s| s.build()).collect::<Result<_>>()?;
    let with_floor = matches!(cfg.kind, StudyKind::H | StudyKind::P);
    let mut rows: Vec<StudyRow> = jobs
        .par_iter()
        .map(|job| {
            let spec = &specs[job.mesh];
            let mesh = &meshes[job.mesh];
            let mut row = run_case(cfg.case, mesh, spec.family.name(), job.n, job.opts)?;
            if with_floor && job.opts.p >= 2 {
                let floor = if cfg.case == TestCase::Patch {
                    ErrorNorms { h1_broken: row.err_h1_broken, l2: row.err_l2 }
                } else {
                    solve_case(TestCase::Patch, mesh, job.opts)?.errors
                };
                row.floor_h1 = Some(floor.h1_broken);
                row.floor_l2 = Some(floor.l2);
            }
            Ok(row)
        })
        .collect::<Result<_>>()?;

    if with_floor {
        for g in 0..groups {
            let idx: Vec<usize> = (0..jobs.len()).filter(|&i| jobs[i].group == g).collect();
            let x = |i: usize| match cfg.kind {
                StudyKind::H => rows[i].h.ln(),
                _ if cfg.case == TestCase::SinSin => rows[i].p as f64,
                _ => (rows[i].p as f64).ln(),
            };
            let fit = |err: &dyn Fn(&StudyRow) -> (f64, Option<f64>)| {
                let pts: Vec<(f64, f64)> = idx
                    .iter()
                    .filter(|&&i| {
                        let (e, f) = err(&rows[i]);
                        usable(e, f)
                    })
                    .map(|&i| (x(i), err(&rows[i]).0.ln()))
                    .collect();
                fit_slope(&pts)
            };
            let s1 = fit(&|r| (r.err_h1_broken, r.floor_h1));
            let s2 = fit(&|r| (r.err_l2, r.floor_l2));
            for &i in &idx {
                rows[i].slope_h1 = s1;
                rows[i].slope_l2 = s2;
            }
        }
    }
    Ok(StudyReport { kind: Some(cfg.kind), rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_a_line() {
        let pts: Vec<_> = (1..5).map(|i| (i as f64, 3.0 * i as f64 - 1.0)).collect();
        assert!((fit_slope(&pts).unwrap() - 3.0).abs() < 1e-14);
        assert_eq!(fit_slope(&pts[..2]), None);
    }

    #[test]
    fn concavity() {
        assert!(concave_decreasing(&[1.0, 0.5, 0.1, 0.001]));
        assert!(!concave_decreasing(&[1.0, 0.1, 0.01, 0.001]));
        assert!(!concave_decreasing(&[1.0, 0.1, 0.2]));
    }

    #[test]
    fn floor_filter() {
        assert!(usable(1e-3, None));
        assert!(!usable(1e-11, Some(1e-12)));
        assert!(!usable(0.0, None));
    }
}
