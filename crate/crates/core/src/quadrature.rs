//! Quadrature on edges and polygons.
//!
//! Edge rules live on `[-1, 1]`. Polygon rules fan-triangulate the cell from
//! an interior point of its kernel and map a collapsed Gauss product rule onto
//! each triangle. [`moment_oracle`] integrates monomials exactly through
//! Green's theorem and serves as the independent reference for the rules.

use crate::mesh::geometry::{centroid, diameter, min_edge_line_distance};
use crate::mesh::regularity::star_center;
use crate::mesh::Point;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeRuleKind {
    Gauss,
    GaussLobatto,
}

/// A 1D rule on `[-1, 1]` with increasing nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub kind: EdgeRuleKind,
}

impl EdgeRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Highest polynomial degree integrated exactly.
    pub fn exact_degree(&self) -> usize {
        match self.kind {
            EdgeRuleKind::Gauss => 2 * self.len() - 1,
            EdgeRuleKind::GaussLobatto => 2 * self.len() - 3,
        }
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    let (mut d0, mut d1) = (0.0, 1.0);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 1..n {
        let k = k as f64;
        let p2 = ((2.0 * k + 1.0) * x * p1 - k * p0) / (k + 1.0);
        let d2 = d0 + (2.0 * k + 1.0) * p1;
        (p0, p1, d0, d1) = (p1, p2, d1, d2);
    }
    (p1, d1)
}

const NEWTON_TOL: f64 = 1e-15;
const NEWTON_MAX: usize = 100;

fn symmetrize(nodes: &mut [f64], weights: &mut [f64]) {
    let n = nodes.len();
    for i in 0..n / 2 {
        let j = n - 1 - i;
        let x = 0.5 * (nodes[j] - nodes[i]);
        let w = 0.5 * (weights[i] + weights[j]);
        (nodes[i], nodes[j]) = (-x, x);
        (weights[i], weights[j]) = (w, w);
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
}

/// `n`-point Gauss-Legendre rule, exact for degree `2n - 1`.
pub fn gauss_legendre(n: usize) -> Result<EdgeRule> {
    if n == 0 || n > 128 {
        return Err(Error::InvalidArgument(format!("gauss rule needs 1 <= n <= 128, got {n}")));
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = -(std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut converged = false;
        for _ in 0..NEWTON_MAX {
            let (p, dp) = legendre_with_derivative(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() <= NEWTON_TOL {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::NoConvergence("gauss-legendre nodes"));
        }
        let (_, dp) = legendre_with_derivative(n, x);
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    symmetrize(&mut nodes, &mut weights);
    Ok(EdgeRule { nodes, weights, kind: EdgeRuleKind::Gauss })
}

/// `n`-point Gauss-Lobatto rule: `±1` plus the roots of `P'_{n-1}`, exact for
/// degree `2n - 3`.
pub fn gauss_lobatto(n: usize) -> Result<EdgeRule> {
    if !(2..=32).contains(&n) {
        return Err(Error::InvalidArgument(format!("gauss-lobatto rule needs 2 <= n <= 32, got {n}")));
    }
    let m = n - 1;
    let mf = m as f64;
    let mut nodes = vec![0.0; n];
    nodes[0] = -1.0;
    nodes[m] = 1.0;
    for (i, node) in nodes.iter_mut().enumerate().take(m).skip(1) {
        let mut x = -(std::f64::consts::PI * i as f64 / mf).cos();
        let mut converged = false;
        for _ in 0..NEWTON_MAX {
            // Newton on P'_m using (1 - x²) P''_m = 2x P'_m - m(m+1) P_m
            let (p, dp) = legendre_with_derivative(m, x);
            let d2p = (2.0 * x * dp - mf * (mf + 1.0) * p) / (1.0 - x * x);
            let dx = dp / d2p;
            x -= dx;
            if dx.abs() <= NEWTON_TOL {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::NoConvergence("gauss-lobatto nodes"));
        }
        *node = x;
    }
    let mut weights: Vec<f64> = nodes
        .iter()
        .map(|&x| {
            let (p, _) = legendre_with_derivative(m, x);
            2.0 / (mf * (mf + 1.0) * p * p)
        })
        .collect();
    symmetrize(&mut nodes, &mut weights);
    Ok(EdgeRule { nodes, weights, kind: EdgeRuleKind::GaussLobatto })
}

/// Points and positive weights integrating polynomials up to `target_degree`
/// over one polygon.
#[derive(Debug, Clone, PartialEq)]
pub struct PolygonRule {
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
    pub target_degree: usize,
}

impl PolygonRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(&Point) -> f64) -> f64 {
        self.points.iter().zip(&self.weights).map(|(p, &w)| w * f(p)).sum()
    }
}

/// Collapsed Gauss rule on the reference triangle `{ξ, η >= 0, ξ + η <= 1}`,
/// returned as `(ξ, η, w)` with weights summing to 1/2.
fn reference_triangle_rule(degree: usize) -> Result<Vec<(f64, f64, f64)>> {
    let nu = (degree + 2).div_ceil(2);
    let nv = (degree + 1).div_ceil(2).max(1);
    let gu = gauss_legendre(nu)?;
    let gv = gauss_legendre(nv)?;
    let mut out = Vec::with_capacity(nu * nv);
    for (&su, &wu) in gu.nodes.iter().zip(&gu.weights) {
        let u = 0.5 * (su + 1.0);
        for (&sv, &wv) in gv.nodes.iter().zip(&gv.weights) {
            let v = 0.5 * (sv + 1.0);
            out.push((u, v * (1.0 - u), 0.25 * wu * wv * (1.0 - u)));
        }
    }
    Ok(out)
}

/// Fan center for `polygon`: the centroid when it lies strictly inside the
/// kernel, otherwise the best star-ball center.
pub fn fan_center(polygon: &[Point]) -> Result<Point> {
    let h = diameter(polygon);
    let c = centroid(polygon);
    if min_edge_line_distance(polygon, &c) > 1e-10 * h {
        return Ok(c);
    }
    let (k, r) = star_center(polygon);
    if r > 1e-10 * h {
        Ok(k)
    } else {
        Err(Error::NotStarShaped)
    }
}

/// Polygon rule exact for total degree `target_degree`, by fan
/// sub-triangulation from [`fan_center`].
pub fn polygon_rule(polygon: &[Point], target_degree: usize) -> Result<PolygonRule> {
    if target_degree > 60 {
        return Err(Error::InvalidArgument(format!("polygon rule degree {target_degree} too large")));
    }
    let center = fan_center(polygon)?;
    let reference = reference_triangle_rule(target_degree)?;
    let n = polygon.len();
    let mut points = Vec::with_capacity(n * reference.len());
    let mut weights = Vec::with_capacity(n * reference.len());
    for i in 0..n {
        let a = polygon[i];
        let b = polygon[(i + 1) % n];
        let (e1, e2) = (a - center, b - center);
        let jac = e1.x * e2.y - e1.y * e2.x;
        for &(xi, eta, w) in &reference {
            points.push(center + e1 * xi + e2 * eta);
            weights.push(w * jac);
        }
    }
    Ok(PolygonRule { points, weights, target_degree })
}

fn binomial_row(n: usize) -> Vec<f64> {
    let mut row = vec![1.0; n + 1];
    for k in 1..n {
        row[k] = row[k - 1] * (n - k + 1) as f64 / k as f64;
    }
    row
}

/// `∫_0^1 x(t)^m y(t)^n dt` along the segment `p0 -> p1`, written in the
/// Bernstein basis of degree `m + n` whose members all integrate to
/// `1 / (m + n + 1)`.
fn segment_monomial_integral(p0: &Point, p1: &Point, m: usize, n: usize) -> f64 {
    let cm = binomial_row(m);
    let cn = binomial_row(n);
    let cmn = binomial_row(m + n);
    let xp0: Vec<f64> = (0..=m).map(|k| p0.x.powi(k as i32)).collect();
    let xp1: Vec<f64> = (0..=m).map(|k| p1.x.powi(k as i32)).collect();
    let yp0: Vec<f64> = (0..=n).map(|k| p0.y.powi(k as i32)).collect();
    let yp1: Vec<f64> = (0..=n).map(|k| p1.y.powi(k as i32)).collect();
    let mut sum = 0.0;
    for i in 0..=m {
        let xi = cm[i] * xp0[m - i] * xp1[i];
        for j in 0..=n {
            sum += xi * cn[j] * yp0[n - j] * yp1[j] / cmn[i + j];
        }
    }
    sum / (m + n + 1) as f64
}

/// Exact `∫_K x^a y^b` by Green's theorem, `∮ x^{a+1} y^b / (a+1) dy`.
pub fn moment_oracle(polygon: &[Point], a: usize, b: usize) -> f64 {
    let n = polygon.len();
    let mut total = 0.0;
    for i in 0..n {
        let p0 = polygon[i];
        let p1 = polygon[(i + 1) % n];
        let dy = p1.y - p0.y;
        if dy != 0.0 {
            total += dy * segment_monomial_integral(&p0, &p1, a + 1, b);
        }
    }
    total / (a + 1) as f64
}
