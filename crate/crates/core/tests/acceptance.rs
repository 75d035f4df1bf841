//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use polyvem::assembly::{assemble, condition_number, solve, AssemblyOptions};
use polyvem::gram_schmidt::{transform_stiffness, virtual_gram_schmidt};
use polyvem::harness::study::{concave_decreasing, fit_slope, run_study, StudyConfig};
use polyvem::harness::{solve_case, FamilySpec, MeshFamily, RunOptions, StudyKind, StudyRow, TestCase};
use polyvem::poly_basis::multi_indices;
use polyvem::quadrature::{moment_oracle, polygon_rule};
use polyvem::vem_local::LocalOperators;
use polyvem::{BasisKind, PolygonMesh, Result};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

struct Outcome {
    pass: bool,
    detail: String,
}

type Criterion = fn() -> Result<Outcome>;

fn desk(family: MeshFamily) -> FamilySpec {
    let n = match family {
        MeshFamily::Triangle => 4,
        MeshFamily::Voronoi => 5,
        _ => 4,
    };
    FamilySpec::new(family, n)
}

fn cells64(family: MeshFamily) -> FamilySpec {
    FamilySpec::new(family, family.n_for_64_cells())
}

fn meshes(spec: fn(MeshFamily) -> FamilySpec) -> Result<Vec<(MeshFamily, PolygonMesh)>> {
    MeshFamily::ALL.iter().map(|&f| Ok((f, spec(f).build()?))).collect()
}

fn opts(p: usize, basis: BasisKind, gram_schmidt: bool) -> RunOptions {
    RunOptions { p, basis, gram_schmidt, condition: false }
}

fn patch_test() -> Result<Outcome> {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for (_, mesh) in meshes(desk)? {
        for p in 2..=8 {
            let run = solve_case(TestCase::Patch, &mesh, opts(p, BasisKind::L2Scaled, false))?;
            worst = worst.max(run.errors.h1_broken);
        }
    }
    let t = start.elapsed();
    Ok(Outcome {
        pass: worst <= 1e-9 && t < Duration::from_secs(30),
        detail: format!("max err_h1_broken {worst:.2e} (<= 1e-9), {:.1}s (< 30s)", t.as_secs_f64()),
    })
}

fn h_convergence() -> Result<Outcome> {
    let start = Instant::now();
    let cfg = StudyConfig {
        kind: StudyKind::H,
        case: TestCase::SinSin,
        families: vec![FamilySpec::new(MeshFamily::Hex, 0), FamilySpec::new(MeshFamily::Voronoi, 0)],
        n_list: vec![4, 8, 16, 32],
        p_list: vec![3, 5],
        bases: vec![BasisKind::L2Scaled],
        gram_schmidt: false,
    };
    let report = run_study(&cfg)?;
    let mut pass = true;
    let mut parts = Vec::new();
    for r in report.rows.iter().filter(|r| r.n == 32) {
        let p = r.p as f64;
        let ok = r.slope_h1.is_some_and(|s| (s - p).abs() <= 0.3) && r.slope_l2.is_some_and(|s| (s - p - 1.0).abs() <= 0.35);
        pass &= ok;
        parts.push(format!("{} p={}: H1 {} L2 {}", r.family, r.p, fmt_opt(r.slope_h1), fmt_opt(r.slope_l2)));
    }
    let t = start.elapsed();
    pass &= t < Duration::from_secs(300);
    Ok(Outcome { pass, detail: format!("{}; {:.1}s", parts.join(", "), t.as_secs_f64()) })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or("n/a".into(), |s| format!("{s:.2}"))
}

fn pre_floor(rows: &[&StudyRow]) -> Vec<f64> {
    rows.iter()
        .take_while(|r| r.floor_h1.is_none_or(|f| r.err_h1_broken >= 100.0 * f))
        .map(|r| r.err_h1_broken)
        .collect()
}

fn p_convergence() -> Result<Outcome> {
    let start = Instant::now();
    let mut pass = true;
    let mut parts = Vec::new();
    for family in MeshFamily::ALL {
        let cfg = StudyConfig {
            kind: StudyKind::P,
            case: TestCase::SinSin,
            families: vec![cells64(family)],
            n_list: vec![family.n_for_64_cells()],
            p_list: (1..=10).collect(),
            bases: vec![BasisKind::L2Scaled],
            gram_schmidt: false,
        };
        let report = run_study(&cfg)?;
        let rows: Vec<&StudyRow> = report.rows.iter().collect();
        let errs = pre_floor(&rows);
        let last = rows.last().unwrap().err_h1_broken;
        let ok = errs.len() >= 6 && concave_decreasing(&errs) && last <= 1e-6;
        pass &= ok;
        let seq: Vec<String> = rows.iter().map(|r| format!("{:.1e}", r.err_h1_broken)).collect();
        parts.push(format!("{family}: [{}] pre-floor {} p10 {last:.1e}", seq.join(" "), errs.len()));
    }
    let t = start.elapsed();
    pass &= t < Duration::from_secs(180);
    Ok(Outcome { pass, detail: format!("{}; {:.1}s", parts.join("; "), t.as_secs_f64()) })
}

fn corner_singularity() -> Result<Outcome> {
    let start = Instant::now();
    let mut pass = true;
    let mut parts = Vec::new();
    for (family, mesh) in meshes(cells64)? {
        let mut pts = Vec::new();
        for p in 3..=10 {
            let run = solve_case(TestCase::Corner25, &mesh, opts(p, BasisKind::L2Scaled, false))?;
            pts.push(((p as f64).ln(), run.errors.h1_broken.ln()));
        }
        let slope = fit_slope(&pts);
        pass &= slope.is_some_and(|s| (s + 5.0).abs() <= 0.75);
        parts.push(format!("{family} {}", fmt_opt(slope)));
    }
    let t = start.elapsed();
    pass &= t < Duration::from_secs(180);
    Ok(Outcome { pass, detail: format!("H1 slope vs log p: {}; {:.1}s", parts.join(", "), t.as_secs_f64()) })
}

fn random_poly(rng: &mut ChaCha8Rng, p: usize) -> impl Fn(&polyvem::Point) -> f64 {
    let terms: Vec<([usize; 2], f64)> = multi_indices(p).into_iter().map(|a| (a, rng.random_range(-1.0..1.0))).collect();
    move |x: &polyvem::Point| {
        let (s, t) = (2.0 * x.x - 1.0, 2.0 * x.y - 1.0);
        terms.iter().map(|(a, c)| c * s.powi(a[0] as i32) * t.powi(a[1] as i32)).sum()
    }
}

fn projector_suite() -> Result<Outcome> {
    let mut violations = 0;
    let mut by_basis = [0usize; 3];
    let mut by_family = Vec::new();
    let mut first_p = [None; 3];
    let mut worst: f64 = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for (family, mesh) in meshes(desk)? {
        let mut fam = 0;
        for p in 1..=6 {
            for (b, basis) in BasisKind::ALL.into_iter().enumerate() {
                let locals: Vec<LocalOperators> =
                    (0..mesh.n_cells()).map(|c| LocalOperators::new(&mesh.cell_polygon(c), p, basis)).collect::<Result<_>>()?;
                let v: usize = locals.iter().map(|l| l.consistency_check().violations.len()).sum();
                if v > 0 && first_p[b].is_none_or(|q| p < q) {
                    first_p[b] = Some(p);
                }
                by_basis[b] += v;
                fam += v;
                for k in 0..200 {
                    let ops = &locals[k % locals.len()];
                    let q = random_poly(&mut rng, p);
                    let coeffs = ops.project(&ops.interpolate(&q)?);
                    let scale = ops.rule.points.iter().map(|x| q(x).abs()).fold(1e-300, f64::max);
                    for x in &ops.rule.points {
                        worst = worst.max((ops.basis.combine(coeffs.as_slice(), x) - q(x)).abs() / scale);
                    }
                }
            }
        }
        violations += fam;
        by_family.push(format!("{family} {fam}"));
    }
    let show = |p: Option<usize>| p.map_or("none".to_string(), |p| p.to_string());
    Ok(Outcome {
        pass: violations == 0 && worst <= 1e-9,
        detail: format!(
            "{violations} consistency violations (q1 {}, q2 {}, q3 {}; {}; lowest p q1 {} q2 {} q3 {}), max relative reproduction error {worst:.2e} (<= 1e-9)",
            by_basis[0],
            by_basis[1],
            by_basis[2],
            by_family.join(", "),
            show(first_p[0]),
            show(first_p[1]),
            show(first_p[2]),
        ),
    })
}

fn quadrature_oracle() -> Result<Outcome> {
    let degree = 2 * 8 + 4;
    let mut worst: f64 = 0.0;
    for (_, mesh) in meshes(desk)? {
        for c in 0..mesh.n_cells() {
            let poly = mesh.cell_polygon(c);
            let rule = polygon_rule(&poly, degree)?;
            for [a, b] in multi_indices(degree) {
                let exact = moment_oracle(&poly, a, b);
                let q = rule.integrate(|x| x.x.powi(a as i32) * x.y.powi(b as i32));
                worst = worst.max((q - exact).abs() / exact.abs().max(1e-300));
            }
        }
    }
    Ok(Outcome { pass: worst <= 1e-11, detail: format!("max relative error {worst:.2e} (<= 1e-11)") })
}

fn cond_of(mesh: &PolygonMesh, p: usize, basis: BasisKind, gs: bool) -> Result<f64> {
    let o = AssemblyOptions { p, basis, gram_schmidt: gs };
    condition_number(&assemble(mesh, o, &|_| 0.0, &|_| 0.0)?)
}

/// The basis and Gram-Schmidt comparisons reuse the p-study meshes.
fn cond_meshes() -> Result<Vec<(MeshFamily, PolygonMesh)>> {
    meshes(cells64)
}

/// Condition numbers for every (family, p, basis, gs) combination, in
/// parallel.
fn cond_table(configs: &[(BasisKind, bool)]) -> Result<Vec<(MeshFamily, usize, Vec<f64>)>> {
    let ms = cond_meshes()?;
    let jobs: Vec<(usize, usize)> = (0..ms.len()).flat_map(|m| (5..=8).map(move |p| (m, p))).collect();
    jobs.par_iter()
        .map(|&(m, p)| {
            let c = configs.iter().map(|&(b, gs)| cond_of(&ms[m].1, p, b, gs)).collect::<Result<_>>()?;
            Ok((ms[m].0, p, c))
        })
        .collect()
}

fn gram_schmidt_suite() -> Result<Outcome> {
    let mut dev: f64 = 0.0;
    for (_, mesh) in meshes(desk)? {
        for p in 2..=6 {
            for c in 0..mesh.n_cells() {
                let ops = LocalOperators::new(&mesh.cell_polygon(c), p, BasisKind::L2Scaled)?;
                let (nb, ni) = (ops.layout.boundary_count(), ops.layout.internal_count());
                let t = virtual_gram_schmidt(&ops.a_hat, nb, ni)?;
                let a = transform_stiffness(&ops.a_hat, &t);
                let block = a.view((nb, nb), (ni, ni)) - DMatrix::<f64>::identity(ni, ni);
                dev = dev.max(block.abs().max());
            }
        }
    }
    let mesh = desk(MeshFamily::Square).build()?;
    let mut bdiff: f64 = 0.0;
    for p in 1..=5 {
        let mut sols: Vec<DVector<f64>> = Vec::new();
        for gs in [false, true] {
            let o = AssemblyOptions { p, basis: BasisKind::L2Scaled, gram_schmidt: gs };
            let s = assemble(&mesh, o, &|x| TestCase::SinSin.f(x), &|_| 0.0)?;
            let u = solve(&s)?;
            let nb = s.dof_map.n_global - mesh.n_cells() * p * (p - 1) / 2;
            sols.push(DVector::from_iterator(nb, u.global[..nb].iter().copied()));
        }
        bdiff = bdiff.max((&sols[0] - &sols[1]).abs().max());
    }
    let mut cond_ok = true;
    let mut parts = Vec::new();
    for (family, p, c) in cond_table(&[(BasisKind::L2Scaled, false), (BasisKind::L2Scaled, true)])? {
        cond_ok &= c[1] < c[0];
        parts.push(format!("{family} p{p} q2 {:.1e} gs {:.1e}", c[0], c[1]));
    }
    Ok(Outcome {
        pass: dev <= 1e-7 && bdiff <= 1e-8 && cond_ok,
        detail: format!(
            "max |A_II - I| {dev:.2e} (<= 1e-7), boundary dof diff {bdiff:.2e} (<= 1e-8), cond(gs) < cond(q2) at p>=5: {cond_ok} ({})",
            parts.join(", ")
        ),
    })
}

/// First p at which a basis's error exceeds ten times the best basis error.
fn degradation_onset(errs: &[[f64; 3]], b: usize, p0: usize) -> usize {
    errs.iter()
        .position(|e| e[b] > 10.0 * e.iter().copied().fold(f64::INFINITY, f64::min))
        .map_or(usize::MAX, |i| i + p0)
}

fn basis_orderings() -> Result<Outcome> {
    let mut q2_le_q1 = true;
    let mut q3_square = true;
    let mut parts = Vec::new();
    let configs: Vec<(BasisKind, bool)> = BasisKind::ALL.iter().map(|&b| (b, false)).collect();
    for (family, p, c) in cond_table(&configs)? {
        q2_le_q1 &= c[1] <= c[0];
        if family == MeshFamily::Square {
            q3_square &= c[2] <= c[0] && c[2] <= c[1];
        }
        parts.push(format!("{family} p{p} q1 {:.1e} q2 {:.1e} q3 {:.1e}", c[0], c[1], c[2]));
    }
    let mesh = cells64(MeshFamily::Triangle).build()?;
    let p0 = 1;
    let mut errs = Vec::new();
    for p in p0..=10 {
        let mut e = [0.0; 3];
        for (i, &b) in BasisKind::ALL.iter().enumerate() {
            e[i] = solve_case(TestCase::SinSin, &mesh, opts(p, b, false))?.errors.h1_broken;
        }
        errs.push(e);
    }
    let onset: Vec<usize> = (0..3).map(|b| degradation_onset(&errs, b, p0)).collect();
    let q3_first = onset[2] < onset[0].min(onset[1]);
    let show = |o: usize| if o == usize::MAX { "none".to_string() } else { o.to_string() };
    Ok(Outcome {
        pass: q2_le_q1 && q3_square && q3_first,
        detail: format!(
            "cond(q2) <= cond(q1): {q2_le_q1}; cond(q3) minimal on square: {q3_square}; tri degradation onset q1 {} q2 {} q3 {} ({})",
            show(onset[0]),
            show(onset[1]),
            show(onset[2]),
            parts.join(", ")
        ),
    })
}

fn main() {
    let criteria: [(&str, Criterion); 8] = [
        ("1 patch test", patch_test),
        ("2 h-convergence", h_convergence),
        ("3 exponential p-convergence", p_convergence),
        ("4 corner singularity rate", corner_singularity),
        ("5 projector consistency", projector_suite),
        ("6 quadrature oracle", quadrature_oracle),
        ("7 gram-schmidt algebra", gram_schmidt_suite),
        ("8 basis conditioning orderings", basis_orderings),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, run) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let outcome = run().unwrap_or_else(|e| Outcome { pass: false, detail: format!("error: {e}") });
        println!("{} criterion {name}: {}", if outcome.pass { "PASS" } else { "FAIL" }, outcome.detail);
        failed += usize::from(!outcome.pass);
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
