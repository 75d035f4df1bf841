//! Element-level virtual element operators.
//!
//! Local degrees of freedom of `V_p(K)` are ordered as
//!
//! 1. values at the `N_V` vertices, in loop order;
//! 2. values at the `p - 1` interior Gauss-Lobatto nodes of each edge, edges in
//!    loop order and nodes by increasing parameter along the loop;
//! 3. scaled moments `(1/|K|) ∫_K m_γ v` against the first `dim P_{p-2}`
//!    members of the cell's polynomial basis.
//!
//! The energy projector is assembled through integration by parts,
//! `a^K(q, φ) = -∫_K Δq φ + ∫_{∂K} ∂_n q φ`. The volume term only needs the
//! moments of `φ` because `Δq ∈ P_{p-2}`; the boundary term is integrated by
//! the `(p + 1)`-node Gauss-Lobatto rule of each edge, which is exact for the
//! degree `2p - 1` integrand and whose nodes are exactly the edge dofs.

use nalgebra::{DMatrix, DVector};

use crate::mesh::{CellGeometry, Point};
use crate::poly_basis::{dim_poly, laplacian_expansion, BasisKind, PolyBasis};
use crate::quadrature::{gauss_lobatto, polygon_rule, EdgeRule, PolygonRule};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DofKind {
    Vertex { vertex: usize },
    /// Interior Gauss-Lobatto node `node` (1..p) of local edge `edge`.
    Edge { edge: usize, node: usize },
    Moment { member: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DofDescriptor {
    pub kind: DofKind,
    /// Physical location of point-value dofs.
    pub location: Option<Point>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DofLayout {
    pub p: usize,
    pub n_vertices: usize,
    pub descriptors: Vec<DofDescriptor>,
    /// The `(p + 1)`-node Gauss-Lobatto rule shared by all edges.
    pub edge_rule: EdgeRule,
}

impl DofLayout {
    pub fn boundary_count(&self) -> usize {
        self.p * self.n_vertices
    }

    pub fn internal_count(&self) -> usize {
        self.p * (self.p - 1) / 2
    }

    pub fn total(&self) -> usize {
        self.boundary_count() + self.internal_count()
    }

    pub fn moment_dof(&self, member: usize) -> usize {
        self.boundary_count() + member
    }

    /// Local dof sitting at Gauss-Lobatto node `k` (`0..=p`) of local edge `e`.
    pub fn edge_node_dof(&self, e: usize, k: usize) -> usize {
        let nv = self.n_vertices;
        if k == 0 {
            e
        } else if k == self.p {
            (e + 1) % nv
        } else {
            nv + e * (self.p - 1) + (k - 1)
        }
    }
}

pub fn build_dof_layout(polygon: &[Point], p: usize) -> Result<DofLayout> {
    if p == 0 {
        return Err(Error::InvalidArgument("polynomial degree must be at least 1".into()));
    }
    let nv = polygon.len();
    let edge_rule = gauss_lobatto(p + 1)?;
    let mut descriptors = Vec::with_capacity(p * nv + p * (p - 1) / 2);
    for (v, x) in polygon.iter().enumerate() {
        descriptors.push(DofDescriptor { kind: DofKind::Vertex { vertex: v }, location: Some(*x) });
    }
    for e in 0..nv {
        let (a, b) = (polygon[e], polygon[(e + 1) % nv]);
        for k in 1..p {
            let s = 0.5 * (edge_rule.nodes[k] + 1.0);
            descriptors.push(DofDescriptor { kind: DofKind::Edge { edge: e, node: k }, location: Some(a + (b - a) * s) });
        }
    }
    for g in 0..p * (p - 1) / 2 {
        descriptors.push(DofDescriptor { kind: DofKind::Moment { member: g }, location: None });
    }
    Ok(DofLayout { p, n_vertices: nv, descriptors, edge_rule })
}

/// Quadrature data of one edge: physical nodes, weights scaled by the edge
/// half-length and the unit outward normal.
struct EdgeQuad {
    nodes: Vec<Point>,
    weights: Vec<f64>,
    normal: [f64; 2],
    length: f64,
}

fn edge_quads(polygon: &[Point], rule: &EdgeRule) -> Vec<EdgeQuad> {
    let n = polygon.len();
    (0..n)
        .map(|e| {
            let (a, b) = (polygon[e], polygon[(e + 1) % n]);
            let t = b - a;
            let length = t.norm();
            EdgeQuad {
                nodes: rule.nodes.iter().map(|s| a + t * (0.5 * (s + 1.0))).collect(),
                weights: rule.weights.iter().map(|w| 0.5 * w * length).collect(),
                normal: [t.y / length, -t.x / length],
                length,
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AveragingMode {
    /// `(1/|∂K|) ∫_{∂K} v`, used for `p = 1`.
    BoundaryMean,
    /// `(1/|K|) ∫_K v`, used for `p > 1`.
    CellMean,
}

/// The averaging functional fixing the constant part of the projector,
/// represented by its weights on the local dofs.
#[derive(Debug, Clone, PartialEq)]
pub struct AveragingOperator {
    pub mode: AveragingMode,
    pub weights: DVector<f64>,
}

impl AveragingOperator {
    pub fn new(polygon: &[Point], layout: &DofLayout, moments: &PolyBasis) -> Self {
        let mut weights = DVector::zeros(layout.total());
        if layout.p == 1 {
            // trapezoid on each edge is exact for the linear trace
            let n = polygon.len();
            let perimeter: f64 = (0..n).map(|e| (polygon[(e + 1) % n] - polygon[e]).norm()).sum();
            for e in 0..n {
                let half = 0.5 * (polygon[(e + 1) % n] - polygon[e]).norm() / perimeter;
                weights[e] += half;
                weights[(e + 1) % n] += half;
            }
            AveragingOperator { mode: AveragingMode::BoundaryMean, weights }
        } else {
            // m_0 is a nonzero constant c0, so (1/|K|)∫v = moment_0(v) / c0
            let c0 = moments.values(&polygon[0])[0];
            weights[layout.moment_dof(0)] = 1.0 / c0;
            AveragingOperator { mode: AveragingMode::CellMean, weights }
        }
    }

    pub fn apply(&self, dofs: &DVector<f64>) -> f64 {
        self.weights.dot(dofs)
    }
}

/// Matrices of the energy projector on one cell.
#[derive(Debug, Clone)]
pub struct EnergyProjection {
    /// `Π∇` coefficients in the polynomial basis, `dim P_p × G_d`.
    pub pi_star: DMatrix<f64>,
    /// Gradient Gram matrix with its first row replaced by the averaging
    /// constraint.
    pub g_mat: DMatrix<f64>,
    /// Unconstrained gradient Gram matrix `∫ ∇q_α · ∇q_β`.
    pub g0: DMatrix<f64>,
    /// Right-hand side of the projector system; row 0 is the averaging row.
    pub b_mat: DMatrix<f64>,
}

/// Dof values of every polynomial basis member, `G_d × dim P_p`.
pub fn dof_matrix(polygon: &[Point], layout: &DofLayout, basis: &PolyBasis, rule: &PolygonRule) -> DMatrix<f64> {
    let np = basis.len();
    let mut d = DMatrix::zeros(layout.total(), np);
    for (i, desc) in layout.descriptors.iter().enumerate() {
        if let Some(x) = desc.location {
            for (a, v) in basis.values(&x).into_iter().enumerate() {
                d[(i, a)] = v;
            }
        }
    }
    let ni = layout.internal_count();
    if ni > 0 {
        let area = CellGeometry::of(polygon).area;
        let b0 = layout.boundary_count();
        for (x, &w) in rule.points.iter().zip(&rule.weights) {
            let v = basis.values(x);
            for g in 0..ni {
                let wm = w * v[g] / area;
                for a in 0..np {
                    d[(b0 + g, a)] += wm * v[a];
                }
            }
        }
    }
    d
}

/// Energy projector `Π∇` of every canonical basis function of the cell.
///
/// `rule` must integrate degree `2p - 2`; the moment basis is the
/// `P_{p-2}` prefix of `basis`.
pub fn project_energy(polygon: &[Point], layout: &DofLayout, basis: &PolyBasis, rule: &PolygonRule) -> Result<EnergyProjection> {
    let p = layout.p;
    let np = basis.len();
    let nd = layout.total();
    if basis.degree() != p || np != dim_poly(p) {
        return Err(Error::InvalidArgument(format!("projector needs a basis of P_{p}, got degree {}", basis.degree())));
    }
    let geom = CellGeometry::of(polygon);
    let moments = basis.truncated(p.saturating_sub(2));
    let ni = layout.internal_count();

    let mut g0 = DMatrix::zeros(np, np);
    for (x, &w) in rule.points.iter().zip(&rule.weights) {
        let g = basis.gradients(x);
        for a in 1..np {
            for b in a..np {
                g0[(a, b)] += w * (g[a][0] * g[b][0] + g[a][1] * g[b][1]);
            }
        }
    }
    g0.fill_lower_triangle_with_upper_triangle();

    let averaging = AveragingOperator::new(polygon, layout, &moments);
    let quads = edge_quads(polygon, &layout.edge_rule);

    let mut g_mat = g0.clone();
    match averaging.mode {
        AveragingMode::BoundaryMean => {
            let perimeter: f64 = quads.iter().map(|q| q.length).sum();
            for b in 0..np {
                let mut s = 0.0;
                for q in &quads {
                    for (x, w) in q.nodes.iter().zip(&q.weights) {
                        s += w * basis.values(x)[b];
                    }
                }
                g_mat[(0, b)] = s / perimeter;
            }
        }
        AveragingMode::CellMean => {
            let mut row = vec![0.0; np];
            for (x, &w) in rule.points.iter().zip(&rule.weights) {
                for (r, v) in row.iter_mut().zip(basis.values(x)) {
                    *r += w * v;
                }
            }
            for (b, r) in row.into_iter().enumerate() {
                g_mat[(0, b)] = r / geom.area;
            }
        }
    }

    let mut b_mat = DMatrix::zeros(np, nd);
    if ni > 0 {
        let lap = laplacian_expansion(basis, &moments)?;
        for a in 1..np {
            for g in 0..ni {
                b_mat[(a, layout.moment_dof(g))] -= geom.area * lap[(a, g)];
            }
        }
    }
    for (e, q) in quads.iter().enumerate() {
        for (k, (x, w)) in q.nodes.iter().zip(&q.weights).enumerate() {
            let dof = layout.edge_node_dof(e, k);
            let grads = basis.gradients(x);
            for a in 1..np {
                b_mat[(a, dof)] += w * (grads[a][0] * q.normal[0] + grads[a][1] * q.normal[1]);
            }
        }
    }
    b_mat.row_mut(0).copy_from(&averaging.weights.transpose());

    let pi_star = g_mat.clone().lu().solve(&b_mat).ok_or(Error::Singular("constrained gradient gram matrix"))?;
    Ok(EnergyProjection { pi_star, g_mat, g0, b_mat })
}

/// Consistency plus dof-based stabilization,
/// `Π*ᵀ G0 Π* + (I - Π_dof)ᵀ (I - Π_dof)` with `Π_dof = D Π*`.
pub fn stabilized_stiffness(pi_star: &DMatrix<f64>, g0: &DMatrix<f64>, d_mat: &DMatrix<f64>) -> DMatrix<f64> {
    let nd = pi_star.ncols();
    let consistency = pi_star.transpose() * g0 * pi_star;
    let residual = DMatrix::identity(nd, nd) - d_mat * pi_star;
    let stab = residual.transpose() * &residual;
    let a = consistency + stab;
    (&a + a.transpose()) * 0.5
}

/// Everything the global solver and the error estimators need from one cell.
#[derive(Debug, Clone)]
pub struct LocalOperators {
    pub polygon: Vec<Point>,
    pub geometry: CellGeometry,
    pub layout: DofLayout,
    pub basis: PolyBasis,
    pub projection: EnergyProjection,
    /// Dof values of the basis polynomials, `G_d × dim P_p`.
    pub d_mat: DMatrix<f64>,
    pub a_hat: DMatrix<f64>,
    pub averaging: AveragingOperator,
    /// Polygon rule of degree `2p + 2`.
    pub rule: PolygonRule,
}

/// Offending pair found by [`LocalOperators::consistency_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConsistencyViolation {
    pub member: usize,
    pub dof: usize,
    pub difference: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyReport {
    pub max_relative: f64,
    pub violations: Vec<ConsistencyViolation>,
}

impl LocalOperators {
    pub fn new(polygon: &[Point], p: usize, kind: BasisKind) -> Result<Self> {
        let geometry = CellGeometry::of(polygon);
        let layout = build_dof_layout(polygon, p)?;
        let rule = polygon_rule(polygon, 2 * p + 2)?;
        let basis = PolyBasis::new(kind, p, &geometry, Some(&rule))?;
        let projection = project_energy(polygon, &layout, &basis, &rule)?;
        let d_mat = dof_matrix(polygon, &layout, &basis, &rule);
        let a_hat = stabilized_stiffness(&projection.pi_star, &projection.g0, &d_mat);
        let averaging = AveragingOperator::new(polygon, &layout, &basis.truncated(p.saturating_sub(2)));
        Ok(LocalOperators {
            polygon: polygon.to_vec(),
            geometry,
            layout,
            basis,
            projection,
            d_mat,
            a_hat,
            averaging,
            rule,
        })
    }

    pub fn p(&self) -> usize {
        self.layout.p
    }

    pub fn pi_star(&self) -> &DMatrix<f64> {
        &self.projection.pi_star
    }

    /// Matrix of `Π∇` acting on dof vectors, `D Π*`.
    pub fn pi_dof(&self) -> DMatrix<f64> {
        &self.d_mat * &self.projection.pi_star
    }

    /// Polynomial coefficients of `Π∇ v` for the dof vector `dofs`.
    pub fn project(&self, dofs: &DVector<f64>) -> DVector<f64> {
        &self.projection.pi_star * dofs
    }

    /// Dof vector of a function given pointwise; moments use a rule of
    /// degree `2p + 4`.
    pub fn interpolate(&self, f: impl Fn(&Point) -> f64) -> Result<DVector<f64>> {
        let mut dofs = DVector::zeros(self.layout.total());
        for (i, d) in self.layout.descriptors.iter().enumerate() {
            if let Some(x) = d.location {
                dofs[i] = f(&x);
            }
        }
        let ni = self.layout.internal_count();
        if ni > 0 {
            let rule = polygon_rule(&self.polygon, 2 * self.p() + 4)?;
            let b0 = self.layout.boundary_count();
            for (x, &w) in rule.points.iter().zip(&rule.weights) {
                let fx = f(x) * w / self.geometry.area;
                let v = self.basis.values(x);
                for g in 0..ni {
                    dofs[b0 + g] += fx * v[g];
                }
            }
        }
        Ok(dofs)
    }

    /// Projected load vector `∫_K [P_{p-2} f] φ_i` (`p >= 2`) or
    /// `∫_K [P_0 f] mean(φ_i)` (`p = 1`).
    pub fn load(&self, f: impl Fn(&Point) -> f64) -> Result<DVector<f64>> {
        let p = self.p();
        let mut out = DVector::zeros(self.layout.total());
        let rule = polygon_rule(&self.polygon, 2 * p + 4)?;
        let area = self.geometry.area;
        if p == 1 {
            let mean = rule.integrate(&f) / area;
            for (o, w) in out.iter_mut().zip(self.averaging.weights.iter()) {
                *o = mean * area * w;
            }
            return Ok(out);
        }
        let moments = self.basis.truncated(p - 2);
        let ni = moments.len();
        let mut rhs = DVector::zeros(ni);
        for (x, &w) in rule.points.iter().zip(&rule.weights) {
            let fx = w * f(x);
            if fx == 0.0 {
                continue;
            }
            for (r, v) in rhs.iter_mut().zip(moments.values(x)) {
                *r += fx * v;
            }
        }
        let mass = moments.mass_matrix(&self.rule);
        let coeffs = mass.cholesky().ok_or(Error::Singular("moment mass matrix"))?.solve(&rhs);
        for g in 0..ni {
            out[self.layout.moment_dof(g)] = area * coeffs[g];
        }
        Ok(out)
    }

    /// Executable p-consistency: `â(q_α, φ_i)` from the assembled stiffness
    /// against `a(q_α, φ_i)` from the integration-by-parts matrix, for every
    /// basis member and canonical basis function. Pairs whose difference
    /// exceeds `1e-10 · max(1, |q_α|_1)` are reported.
    pub fn consistency_check(&self) -> ConsistencyReport {
        let lhs = self.d_mat.transpose() * &self.a_hat;
        let g0 = &self.projection.g0;
        let mut report = ConsistencyReport { max_relative: 0.0, violations: Vec::new() };
        for a in 0..self.basis.len() {
            let scale = g0[(a, a)].sqrt().max(1.0);
            let tolerance = 1e-10 * scale;
            for i in 0..self.layout.total() {
                // row 0 of B holds the averaging constraint; a(1, φ) = 0
                let exact = if a == 0 { 0.0 } else { self.projection.b_mat[(a, i)] };
                let difference = (lhs[(a, i)] - exact).abs();
                report.max_relative = report.max_relative.max(difference / scale);
                if difference > tolerance {
                    report.violations.push(ConsistencyViolation { member: a, dof: i, difference, tolerance });
                }
            }
        }
        report
    }
}
