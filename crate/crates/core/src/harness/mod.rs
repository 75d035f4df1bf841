//! Test problems, error norms, convergence studies and report output.

pub mod cases;
pub mod family;
pub mod norms;
pub mod report;
pub mod study;

pub use cases::{Regularity, TestCase};
pub use family::{parse_list, parse_usize_list, FamilySpec, MeshFamily};
pub use norms::{error_norms, ErrorNorms};
pub use report::{StudyReport, StudyRow};
pub use study::{run_case, solve_case, run_study, RunOptions, StudyConfig, StudyKind};
