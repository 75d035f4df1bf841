use nalgebra::{DMatrix, DVector, Point2};
use polyvem::harness::{run_study, solve_case, FamilySpec, MeshFamily, RunOptions, StudyConfig, StudyKind, TestCase};
use polyvem::{BasisKind, Point};

fn opts(p: usize, basis: BasisKind, gram_schmidt: bool) -> RunOptions {
    RunOptions { p, basis, gram_schmidt, condition: false }
}

fn mesh(spec: &str) -> polyvem::PolygonMesh {
    spec.parse::<FamilySpec>().unwrap().build().unwrap()
}

/// Seven-point degree-5 rule on a triangle in barycentric coordinates.
fn radon7() -> Vec<([f64; 3], f64)> {
    let r = 15f64.sqrt();
    let (a1, b1, w1) = ((9.0 - 2.0 * r) / 21.0, (6.0 + r) / 21.0, (155.0 + r) / 1200.0);
    let (a2, b2, w2) = ((9.0 + 2.0 * r) / 21.0, (6.0 - r) / 21.0, (155.0 - r) / 1200.0);
    let mut pts = vec![([1.0 / 3.0; 3], 9.0 / 40.0)];
    for (a, b, w) in [(a1, b1, w1), (a2, b2, w2)] {
        pts.extend([([a, b, b], w), ([b, a, b], w), ([b, b, a], w)]);
    }
    pts
}

/// Quadratic Lagrange FEM on the `n × n` square grid split along the
/// main diagonals; returns the H¹ seminorm error.
fn p2_fem_h1_error(n: usize, case: TestCase) -> f64 {
    let m = 2 * n + 1;
    let node = |i: usize, j: usize| j * m + i;
    let pos = |k: usize| Point2::new((k % m) as f64 / (2 * n) as f64, (k / m) as f64 / (2 * n) as f64);
    let mut tris = Vec::new();
    for j in 0..n {
        for i in 0..n {
            let (x, y) = (2 * i, 2 * j);
            // vertices then midpoints of edges (1,2), (2,0), (0,1)
            tris.push([node(x, y), node(x + 2, y), node(x + 2, y + 2), node(x + 2, y + 1), node(x + 1, y + 1), node(x + 1, y)]);
            tris.push([node(x, y), node(x + 2, y + 2), node(x, y + 2), node(x + 1, y + 2), node(x, y + 1), node(x + 1, y + 1)]);
        }
    }
    let shape = |l: [f64; 3]| -> ([f64; 6], [[f64; 3]; 6]) {
        let v = [
            l[0] * (2.0 * l[0] - 1.0),
            l[1] * (2.0 * l[1] - 1.0),
            l[2] * (2.0 * l[2] - 1.0),
            4.0 * l[1] * l[2],
            4.0 * l[2] * l[0],
            4.0 * l[0] * l[1],
        ];
        // derivatives with respect to the barycentric coordinates
        let d = [
            [4.0 * l[0] - 1.0, 0.0, 0.0],
            [0.0, 4.0 * l[1] - 1.0, 0.0],
            [0.0, 0.0, 4.0 * l[2] - 1.0],
            [0.0, 4.0 * l[2], 4.0 * l[1]],
            [4.0 * l[2], 0.0, 4.0 * l[0]],
            [4.0 * l[1], 4.0 * l[0], 0.0],
        ];
        (v, d)
    };
    let geometry = |t: &[usize; 6]| {
        let (p0, p1, p2) = (pos(t[0]), pos(t[1]), pos(t[2]));
        let area2 = (p1.x - p0.x) * (p2.y - p0.y) - (p2.x - p0.x) * (p1.y - p0.y);
        // gradients of the barycentric coordinates
        let g = [
            [(p1.y - p2.y) / area2, (p2.x - p1.x) / area2],
            [(p2.y - p0.y) / area2, (p0.x - p2.x) / area2],
            [(p0.y - p1.y) / area2, (p1.x - p0.x) / area2],
        ];
        (p0, p1, p2, 0.5 * area2, g)
    };
    let grad_of = |d: &[f64; 3], g: &[[f64; 2]; 3]| [d[0] * g[0][0] + d[1] * g[1][0] + d[2] * g[2][0], d[0] * g[0][1] + d[1] * g[1][1] + d[2] * g[2][1]];

    let nn = m * m;
    let mut a = DMatrix::zeros(nn, nn);
    let mut b = DVector::zeros(nn);
    for t in &tris {
        let (p0, p1, p2, area, g) = geometry(t);
        for (l, w) in radon7() {
            let x = Point2::new(l[0] * p0.x + l[1] * p1.x + l[2] * p2.x, l[0] * p0.y + l[1] * p1.y + l[2] * p2.y);
            let (v, d) = shape(l);
            let grads: Vec<[f64; 2]> = d.iter().map(|d| grad_of(d, &g)).collect();
            for r in 0..6 {
                b[t[r]] += w * area * case.f(&x) * v[r];
                for c in 0..6 {
                    a[(t[r], t[c])] += w * area * (grads[r][0] * grads[c][0] + grads[r][1] * grads[c][1]);
                }
            }
        }
    }
    for k in 0..nn {
        let (i, j) = (k % m, k / m);
        if i == 0 || j == 0 || i == m - 1 || j == m - 1 {
            a.row_mut(k).fill(0.0);
            a.column_mut(k).fill(0.0);
            a[(k, k)] = 1.0;
            b[k] = 0.0;
        }
    }
    let u = a.lu().solve(&b).unwrap();

    let mut err = 0.0;
    for t in &tris {
        let (p0, p1, p2, area, g) = geometry(t);
        for (l, w) in radon7() {
            let x = Point2::new(l[0] * p0.x + l[1] * p1.x + l[2] * p2.x, l[0] * p0.y + l[1] * p1.y + l[2] * p2.y);
            let (_, d) = shape(l);
            let mut gh = [0.0; 2];
            for r in 0..6 {
                let gr = grad_of(&d[r], &g);
                gh[0] += u[t[r]] * gr[0];
                gh[1] += u[t[r]] * gr[1];
            }
            let ge = case.grad(&x);
            err += w * area * ((ge[0] - gh[0]).powi(2) + (ge[1] - gh[1]).powi(2));
        }
    }
    err.sqrt()
}

#[test]
fn quadratic_vem_error_comparable_to_quadratic_fem() {
    let fem = p2_fem_h1_error(8, TestCase::SinSin);
    let vem = solve_case(TestCase::SinSin, &mesh("square:8"), opts(2, BasisKind::L2Scaled, false)).unwrap().errors.h1_broken;
    assert!(vem <= 3.0 * fem && fem <= 3.0 * vem, "vem {vem:e} fem {fem:e}");
}

#[test]
fn fem_oracle_converges_at_second_order() {
    let (e4, e8) = (p2_fem_h1_error(4, TestCase::SinSin), p2_fem_h1_error(8, TestCase::SinSin));
    assert!(((e4 / e8).log2() - 2.0).abs() < 0.2, "{}", (e4 / e8).log2());
}

#[test]
fn patch_test_is_exact_with_tiny_residual() {
    for spec in ["square:3", "hex:3", "voronoi:3"] {
        let mesh = mesh(spec);
        for p in 2..=5 {
            for gs in [false, true] {
                let run = solve_case(TestCase::Patch, &mesh, opts(p, BasisKind::L2Scaled, gs)).unwrap();
                assert!(run.solution.residual <= 1e-12, "{spec} p{p} gs {gs}: residual {:e}", run.solution.residual);
                assert!(run.errors.h1_broken <= 1e-10, "{spec} p{p} gs {gs}: err {:e}", run.errors.h1_broken);
            }
        }
    }
}

#[test]
fn gram_schmidt_leaves_error_unchanged() {
    let mesh = mesh("square:4");
    for p in 1..=5 {
        let plain = solve_case(TestCase::SinSin, &mesh, opts(p, BasisKind::L2Scaled, false)).unwrap().errors.h1_broken;
        let gs = solve_case(TestCase::SinSin, &mesh, opts(p, BasisKind::L2Scaled, true)).unwrap().errors.h1_broken;
        assert!((plain - gs).abs() <= 1e-6 * plain, "p{p}: {plain:e} vs {gs:e}");
    }
}

#[test]
fn bases_agree_up_to_stabilization() {
    // same virtual space, but the dof-based stabilization sees the internal
    // dofs in different scalings
    let mesh = mesh("hex:3");
    for p in 2..=4 {
        let errs: Vec<f64> = BasisKind::ALL
            .iter()
            .map(|&b| solve_case(TestCase::SinSin, &mesh, opts(p, b, false)).unwrap().errors.h1_broken)
            .collect();
        for e in &errs {
            assert!((e - errs[1]).abs() <= 1e-3 * errs[1], "p{p}: {errs:?}");
        }
    }
}

#[test]
fn lowest_order_converges_linearly_on_squares() {
    let cfg = StudyConfig {
        kind: StudyKind::H,
        case: TestCase::SinSin,
        families: vec![FamilySpec::new(MeshFamily::Square, 0)],
        n_list: vec![4, 8, 16, 32],
        p_list: vec![1],
        bases: vec![BasisKind::L2Scaled],
        gram_schmidt: false,
    };
    let report = run_study(&cfg).unwrap();
    let (h1, l2) = (report.rows[0].slope_h1.unwrap(), report.rows[0].slope_l2.unwrap());
    assert!((h1 - 1.0).abs() < 0.15, "{h1}");
    assert!((l2 - 2.0).abs() < 0.2, "{l2}");
}

#[test]
fn studies_are_reproducible() {
    let cfg = StudyConfig {
        kind: StudyKind::P,
        case: TestCase::Corner25,
        families: vec!["voronoi:0:seed=5:lloyd=20".parse().unwrap()],
        n_list: vec![3],
        p_list: (1..=4).collect(),
        bases: vec![BasisKind::L2Scaled, BasisKind::Legendre],
        gram_schmidt: false,
    };
    let (a, b) = (run_study(&cfg).unwrap(), run_study(&cfg).unwrap());
    assert_eq!(a.to_csv(), b.to_csv());
    assert_eq!(a.rows.len(), 8);
}

#[test]
fn single_square_cell_reproduces_bilinear_data() {
    // on one cell with p = 1 every dof is a boundary vertex value
    let m = polyvem::mesh::generate_square_mesh(1).unwrap();
    let run = solve_case(TestCase::Patch, &m, opts(1, BasisKind::L2Scaled, false)).unwrap();
    assert_eq!(run.system.n_free(), 0);
    let u = |x: &Point| TestCase::Patch.u(x);
    for (k, v) in m.vertices().iter().enumerate() {
        assert!((run.solution.global[k] - u(v)).abs() < 1e-14);
    }
}
