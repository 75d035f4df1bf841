use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use polyvem::harness::{
    parse_list, parse_usize_list, run_case, run_study, FamilySpec, MeshFamily, RunOptions, StudyConfig, StudyKind,
    StudyReport, TestCase,
};
use polyvem::mesh::{load_mesh, save_mesh};
use polyvem::{BasisKind, PolygonMesh};

#[derive(Parser)]
#[command(name = "polyvem", version, about = "hp virtual elements for the Poisson problem on polygonal meshes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a mesh of the unit square and write it to a file.
    Mesh {
        #[arg(long)]
        family: MeshFamily,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = polyvem::harness::family::DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = polyvem::harness::family::DEFAULT_LLOYD)]
        lloyd: usize,
        #[arg(short)]
        o: PathBuf,
    },
    /// Solve one test problem and write a one-row CSV report.
    Solve {
        /// Mesh file, or a family spec such as `hex:8` or `voronoi:6:seed=2`.
        #[arg(long)]
        mesh: String,
        #[arg(long)]
        p: usize,
        #[arg(long, default_value = "q2")]
        basis: BasisKind,
        #[arg(long)]
        gram_schmidt: bool,
        #[arg(long)]
        case: TestCase,
        #[arg(short)]
        o: PathBuf,
    },
    /// Run a convergence or conditioning study.
    Study {
        #[arg(long)]
        kind: StudyKind,
        #[arg(long)]
        case: TestCase,
        /// Comma list of families, each optionally with `:seed=..:lloyd=..`.
        #[arg(long)]
        family: String,
        /// Comma list of degrees; `a..b` is an inclusive range.
        #[arg(long)]
        p: String,
        /// Comma list of mesh sizes; `a..b` is an inclusive range.
        #[arg(long)]
        n: String,
        /// Defaults to all three bases for `--kind basis`, q2 otherwise.
        #[arg(long)]
        basis: Option<String>,
        #[arg(long)]
        gram_schmidt: bool,
        #[arg(short)]
        o: PathBuf,
        #[arg(long)]
        gnuplot: Option<PathBuf>,
    },
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match Cli::parse().command {
        Command::Mesh { family, n, seed, lloyd, o } => {
            let mesh = FamilySpec { family, n, seed, lloyd }.build()?;
            save_mesh(&mesh, &o).with_context(|| format!("writing {}", o.display()))?;
            eprintln!("{} cells, {} vertices -> {}", mesh.n_cells(), mesh.n_vertices(), o.display());
        }
        Command::Solve { mesh, p, basis, gram_schmidt, case, o } => {
            let (label, n, mesh) = resolve_mesh(&mesh)?;
            let opts = RunOptions { p, basis, gram_schmidt, condition: true };
            let row = run_case(case, &mesh, &label, n, opts)?;
            eprintln!(
                "ndof {} err_h1_broken {:e} err_l2 {:e} residual {:e}",
                row.ndof, row.err_h1_broken, row.err_l2, row.residual
            );
            write_report(&StudyReport { kind: None, rows: vec![row] }, &o)?;
        }
        Command::Study { kind, case, family, p, n, basis, gram_schmidt, o, gnuplot } => {
            let families = family
                .split(',')
                .map(|s| FamilySpec::parse_template(s.trim()))
                .collect::<polyvem::Result<Vec<_>>>()?;
            let bases = match basis {
                Some(list) => parse_list(&list)?,
                None if kind == StudyKind::Basis => BasisKind::ALL.to_vec(),
                None => vec![BasisKind::L2Scaled],
            };
            let cfg = StudyConfig {
                kind,
                case,
                families,
                n_list: parse_usize_list(&n)?,
                p_list: parse_usize_list(&p)?,
                bases,
                gram_schmidt,
            };
            let report = run_study(&cfg)?;
            write_report(&report, &o)?;
            if let Some(gp) = gnuplot {
                std::fs::write(&gp, report.gnuplot()).with_context(|| format!("writing {}", gp.display()))?;
            }
            eprintln!("{} rows -> {}", report.rows.len(), o.display());
        }
    }
    Ok(())
}

/// A mesh argument is a file if one exists at that path, otherwise a family
/// spec.
fn resolve_mesh(arg: &str) -> Result<(String, usize, PolygonMesh)> {
    if Path::new(arg).is_file() {
        let mesh = load_mesh(arg).with_context(|| format!("reading {arg}"))?;
        return Ok(("file".into(), mesh.n_cells(), mesh));
    }
    match arg.parse::<FamilySpec>() {
        Ok(spec) => Ok((spec.family.to_string(), spec.n, spec.build()?)),
        Err(e) => bail!("`{arg}` is neither a mesh file nor a family spec ({e})"),
    }
}

fn write_report(report: &StudyReport, path: &Path) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    report.write_csv(BufWriter::new(file))?;
    Ok(())
}
