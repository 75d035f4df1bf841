//! Global numbering, assembly, Dirichlet elimination and the direct solve.
//!
//! Global dofs are numbered vertices first, then the `p - 1` interior nodes of
//! every edge (ordered from its lower to its higher vertex index), then the
//! internal moments cell by cell.

use faer::linalg::cholesky::llt::factor::LltError as NumericLltError;
use faer::sparse::linalg::LltError;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, Side};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::gram_schmidt::{transform_load, transform_stiffness, untransform_solution, virtual_gram_schmidt, GsTransform};
use crate::mesh::{Point, PolygonMesh};
use crate::poly_basis::BasisKind;
use crate::quadrature::gauss_lobatto;
use crate::vem_local::LocalOperators;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct DofMap {
    pub p: usize,
    pub n_global: usize,
    /// Local-to-global map of every cell, in local dof order.
    pub cell_dofs: Vec<Vec<usize>>,
    /// True for dofs located on `∂Ω`.
    pub on_boundary: Vec<bool>,
    /// Physical location of point-value dofs; `None` for moments.
    pub locations: Vec<Option<Point>>,
}

impl DofMap {
    pub fn n_constrained(&self) -> usize {
        self.on_boundary.iter().filter(|&&b| b).count()
    }

    pub fn n_free(&self) -> usize {
        self.n_global - self.n_constrained()
    }
}

const CONFORMITY_TOL: f64 = 1e-12;

pub fn number_dofs(mesh: &PolygonMesh, p: usize) -> Result<DofMap> {
    if p == 0 {
        return Err(Error::InvalidArgument("polynomial degree must be at least 1".into()));
    }
    let nv = mesh.n_vertices();
    let ne = mesh.n_edges();
    let per_edge = p - 1;
    let per_cell = p * (p - 1) / 2;
    let n_global = nv + ne * per_edge + mesh.n_cells() * per_cell;
    let gl = gauss_lobatto(p + 1)?;

    let mut on_boundary = vec![false; n_global];
    let mut locations: Vec<Option<Point>> = vec![None; n_global];
    for (v, x) in mesh.vertices().iter().enumerate() {
        locations[v] = Some(*x);
        on_boundary[v] = mesh.boundary_vertex_flags()[v];
    }
    for (e, edge) in mesh.edges().iter().enumerate() {
        let (a, b) = (mesh.vertices()[edge.vertices[0]], mesh.vertices()[edge.vertices[1]]);
        for k in 1..p {
            let g = nv + e * per_edge + (k - 1);
            locations[g] = Some(a + (b - a) * (0.5 * (gl.nodes[k] + 1.0)));
            on_boundary[g] = edge.is_boundary();
        }
    }

    let internal_start = nv + ne * per_edge;
    let mut cell_dofs = Vec::with_capacity(mesh.n_cells());
    for (c, cell) in mesh.cells().iter().enumerate() {
        let k = cell.len();
        let mut dofs = Vec::with_capacity(p * k + per_cell);
        dofs.extend_from_slice(cell);
        let poly = mesh.cell_polygon(c);
        for (le, &e) in mesh.cell_edges(c).iter().enumerate() {
            let forward = cell[le] == mesh.edges()[e].vertices[0];
            let (a, b) = (poly[le], poly[(le + 1) % k]);
            for node in 1..p {
                let gnode = if forward { node } else { p - node };
                let g = nv + e * per_edge + (gnode - 1);
                let local = a + (b - a) * (0.5 * (gl.nodes[node] + 1.0));
                let distance = (local - locations[g].expect("edge dofs have locations")).norm();
                if distance > CONFORMITY_TOL {
                    return Err(Error::OrientationMismatch { edge: e, distance });
                }
                dofs.push(g);
            }
        }
        dofs.extend((0..per_cell).map(|i| internal_start + c * per_cell + i));
        cell_dofs.push(dofs);
    }
    Ok(DofMap { p, n_global, cell_dofs, on_boundary, locations })
}

/// The eliminated global system `A u_free = b` and the data needed to map
/// its solution back to cells.
#[derive(Debug, Clone)]
pub struct GlobalSystem {
    pub matrix: SparseColMat<usize, f64>,
    pub rhs: Vec<f64>,
    pub dof_map: DofMap,
    /// Global dof to free-dof index.
    pub free_index: Vec<Option<usize>>,
    /// Dirichlet values on constrained dofs, zero elsewhere.
    pub lifting: Vec<f64>,
    pub locals: Vec<LocalOperators>,
    /// Per-cell Gram-Schmidt transforms when the orthonormalized internal
    /// basis is in use.
    pub transforms: Option<Vec<GsTransform>>,
}

impl GlobalSystem {
    pub fn n_free(&self) -> usize {
        self.rhs.len()
    }

    pub fn dense_matrix(&self) -> DMatrix<f64> {
        let n = self.n_free();
        let mut d = DMatrix::zeros(n, n);
        for_each_entry(&self.matrix, |i, j, v| d[(i, j)] += v);
        d
    }
}

fn for_each_entry(m: &SparseColMat<usize, f64>, mut f: impl FnMut(usize, usize, f64)) {
    let sym = m.symbolic();
    let col_ptr = sym.col_ptr();
    let row_idx = sym.row_idx();
    let val = m.val();
    for j in 0..m.ncols() {
        for k in col_ptr[j]..col_ptr[j + 1] {
            f(row_idx[k], j, val[k]);
        }
    }
}

pub fn sparse_matvec(m: &SparseColMat<usize, f64>, x: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; m.nrows()];
    for_each_entry(m, |i, j, v| y[i] += v * x[j]);
    y
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssemblyOptions {
    pub p: usize,
    pub basis: BasisKind,
    pub gram_schmidt: bool,
}

/// Build local operators for every cell, in parallel.
pub fn local_operators(mesh: &PolygonMesh, p: usize, basis: BasisKind) -> Result<Vec<LocalOperators>> {
    (0..mesh.n_cells())
        .into_par_iter()
        .map(|c| LocalOperators::new(&mesh.cell_polygon(c), p, basis))
        .collect()
}

/// Assemble the Dirichlet-eliminated system for `-Δu = f`, `u = g` on `∂Ω`.
pub fn assemble(
    mesh: &PolygonMesh,
    opts: AssemblyOptions,
    f: &(dyn Fn(&Point) -> f64 + Sync),
    dirichlet: &(dyn Fn(&Point) -> f64 + Sync),
) -> Result<GlobalSystem> {
    let order: Vec<usize> = (0..mesh.n_cells()).collect();
    assemble_in_order(mesh, opts, f, dirichlet, &order)
}

pub(crate) fn assemble_in_order(
    mesh: &PolygonMesh,
    opts: AssemblyOptions,
    f: &(dyn Fn(&Point) -> f64 + Sync),
    dirichlet: &(dyn Fn(&Point) -> f64 + Sync),
    order: &[usize],
) -> Result<GlobalSystem> {
    let dof_map = number_dofs(mesh, opts.p)?;
    let locals = local_operators(mesh, opts.p, opts.basis)?;

    let per_cell: Vec<(DMatrix<f64>, DVector<f64>, Option<GsTransform>)> = locals
        .par_iter()
        .map(|ops| {
            let load = ops.load(f)?;
            if opts.gram_schmidt {
                let t = virtual_gram_schmidt(&ops.a_hat, ops.layout.boundary_count(), ops.layout.internal_count())?;
                Ok((transform_stiffness(&ops.a_hat, &t), transform_load(&load, &t), Some(t)))
            } else {
                Ok((ops.a_hat.clone(), load, None))
            }
        })
        .collect::<Result<_>>()?;

    let mut free_index = vec![None; dof_map.n_global];
    let mut lifting = vec![0.0; dof_map.n_global];
    let mut n_free = 0;
    for g in 0..dof_map.n_global {
        if dof_map.on_boundary[g] {
            let x = dof_map.locations[g].expect("boundary dofs are point values");
            lifting[g] = dirichlet(&x);
        } else {
            free_index[g] = Some(n_free);
            n_free += 1;
        }
    }

    let mut triplets = Vec::new();
    let mut rhs = vec![0.0; n_free];
    for &c in order {
        let (a, load, _) = &per_cell[c];
        let dofs = &dof_map.cell_dofs[c];
        for (i, &gi) in dofs.iter().enumerate() {
            let Some(fi) = free_index[gi] else { continue };
            rhs[fi] += load[i];
            for (j, &gj) in dofs.iter().enumerate() {
                match free_index[gj] {
                    Some(fj) => triplets.push(Triplet::new(fi, fj, a[(i, j)])),
                    None => rhs[fi] -= a[(i, j)] * lifting[gj],
                }
            }
        }
    }
    let matrix = SparseColMat::try_new_from_triplets(n_free, n_free, &triplets)
        .map_err(|e| Error::Factorization(format!("sparse matrix construction failed: {e:?}")))?;
    let transforms = opts.gram_schmidt.then(|| per_cell.into_iter().map(|(_, _, t)| t.expect("gs transform")).collect());
    Ok(GlobalSystem { matrix, rhs, dof_map, free_index, lifting, locals, transforms })
}

/// Which factorization produced a solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Factorization {
    Cholesky,
    /// Sparse LU, used when Cholesky meets a non-positive pivot because
    /// roundoff has made the assembled matrix numerically indefinite.
    Lu,
}

fn column(rhs: &[f64]) -> Mat<f64> {
    Mat::<f64>::from_fn(rhs.len(), 1, |i, _| rhs[i])
}

fn finite(x: Mat<f64>) -> Result<Vec<f64>> {
    let out: Vec<f64> = (0..x.nrows()).map(|i| x[(i, 0)]).collect();
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::Factorization("non-finite solution".into()));
    }
    Ok(out)
}

/// Sparse Cholesky solve of an SPD system.
pub fn cholesky_solve(matrix: &SparseColMat<usize, f64>, rhs: &[f64]) -> Result<Vec<f64>> {
    if rhs.is_empty() {
        return Ok(Vec::new());
    }
    let llt = matrix.sp_cholesky(Side::Lower).map_err(|e| match e {
        LltError::Numeric(NumericLltError::NonPositivePivot { index }) => {
            Error::Factorization(format!("cholesky: non-positive pivot at index {index}"))
        }
        other => Error::Factorization(format!("cholesky: {other:?}")),
    })?;
    finite(faer::linalg::solvers::Solve::solve(&llt, &column(rhs)))
}

/// Cholesky, falling back to sparse LU on a non-positive pivot.
pub fn direct_solve(matrix: &SparseColMat<usize, f64>, rhs: &[f64]) -> Result<(Vec<f64>, Factorization)> {
    match cholesky_solve(matrix, rhs) {
        Ok(x) => Ok((x, Factorization::Cholesky)),
        Err(chol) => {
            log::warn!("{chol}; retrying with sparse LU");
            let lu = matrix.sp_lu().map_err(|e| Error::Factorization(format!("{chol}; lu: {e:?}")))?;
            Ok((finite(faer::linalg::solvers::Solve::solve(&lu, &column(rhs)))?, Factorization::Lu))
        }
    }
}

#[derive(Debug, Clone)]
pub struct Solution {
    /// Coefficient of every global basis function (new basis for internal
    /// dofs when Gram-Schmidt is on).
    pub global: Vec<f64>,
    /// Local dof values in the original basis, per cell.
    pub cell_dofs: Vec<DVector<f64>>,
    /// `‖A x − b‖₂ / ‖b‖₂` on the free system (absolute when `b = 0`).
    pub residual: f64,
    pub factorization: Factorization,
}

pub fn solve(system: &GlobalSystem) -> Result<Solution> {
    let (x, factorization) = direct_solve(&system.matrix, &system.rhs)?;
    let ax = sparse_matvec(&system.matrix, &x);
    let rnorm = ax.iter().zip(&system.rhs).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    let bnorm = system.rhs.iter().map(|b| b * b).sum::<f64>().sqrt();
    let residual = if bnorm > 0.0 { rnorm / bnorm } else { rnorm };

    let mut global = system.lifting.clone();
    for (g, fi) in system.free_index.iter().enumerate() {
        if let Some(i) = fi {
            global[g] = x[*i];
        }
    }
    let cell_dofs = system
        .dof_map
        .cell_dofs
        .iter()
        .enumerate()
        .map(|(c, dofs)| {
            let local = DVector::from_iterator(dofs.len(), dofs.iter().map(|&g| global[g]));
            match &system.transforms {
                Some(ts) => untransform_solution(&local, &ts[c]),
                None => local,
            }
        })
        .collect();
    Ok(Solution { global, cell_dofs, residual, factorization })
}

pub const CONDITION_CAP: usize = 5000;

/// 2-norm condition number of the eliminated stiffness matrix from its
/// eigenvalues.
pub fn condition_number(system: &GlobalSystem) -> Result<f64> {
    let n = system.n_free();
    if n > CONDITION_CAP {
        return Err(Error::TooLarge { size: n, cap: CONDITION_CAP });
    }
    if n == 0 {
        return Ok(1.0);
    }
    let mut dense = Mat::<f64>::zeros(n, n);
    for_each_entry(&system.matrix, |i, j, v| dense[(i, j)] += v);
    dense_condition_number(&dense)
}

pub(crate) fn dense_condition_number(m: &Mat<f64>) -> Result<f64> {
    let ev = m
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Factorization(format!("eigenvalue solver failed: {e:?}")))?;
    let (lo, hi) = ev.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), e| (lo.min(e.abs()), hi.max(e.abs())));
    Ok(if lo > 0.0 { hi / lo } else { f64::INFINITY })
}
