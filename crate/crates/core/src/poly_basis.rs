//! Polynomial bases of `P_p(K)` on a polygonal cell.
//!
//! Three kinds are available:
//!
//! - `q1`: scaled monomials `((x - x_K) / h_K)^α` around the barycenter;
//! - `q2`: the same monomials divided by their `L²(K)` norm;
//! - `q3`: tensor Legendre products `L_{α1}(2 (x - x̃) / h^x) L_{α2}(2 (y - ỹ) / h^y)`
//!   on the cell's bounding box (center `x̃`, widths `h^x`, `h^y`).
//!
//! Members are ordered by total degree, then by decreasing `α1`, so the
//! basis of `P_{p-2}` is a prefix of the basis of `P_p`.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

use crate::mesh::{CellGeometry, Point};
use crate::quadrature::PolygonRule;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BasisKind {
    /// Scaled monomials.
    Monomial,
    /// L²-normalized scaled monomials.
    L2Scaled,
    /// Legendre products on the bounding box.
    Legendre,
}

impl BasisKind {
    pub const ALL: [BasisKind; 3] = [BasisKind::Monomial, BasisKind::L2Scaled, BasisKind::Legendre];
}

impl fmt::Display for BasisKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BasisKind::Monomial => "q1",
            BasisKind::L2Scaled => "q2",
            BasisKind::Legendre => "q3",
        })
    }
}

impl FromStr for BasisKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "q1" => Ok(BasisKind::Monomial),
            "q2" => Ok(BasisKind::L2Scaled),
            "q3" => Ok(BasisKind::Legendre),
            _ => Err(Error::InvalidArgument(format!("unknown basis `{s}` (expected q1, q2 or q3)"))),
        }
    }
}

/// `dim P_p = (p + 1)(p + 2) / 2`.
pub fn dim_poly(degree: usize) -> usize {
    (degree + 1) * (degree + 2) / 2
}

pub fn multi_indices(degree: usize) -> Vec<[usize; 2]> {
    let mut out = Vec::with_capacity(dim_poly(degree));
    for k in 0..=degree {
        for a2 in 0..=k {
            out.push([k - a2, a2]);
        }
    }
    out
}

/// A basis of `P_degree` attached to one cell.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyBasis {
    kind: BasisKind,
    degree: usize,
    indices: Vec<[usize; 2]>,
    center: Point,
    /// Per-axis length scale; the reference coordinate is `(x - center) / scale`.
    scale: [f64; 2],
    /// Per-member multiplicative factor (the inverse L² norms for `q2`).
    factor: Vec<f64>,
}

/// 1D values, first and second derivatives of the univariate factors.
struct Table {
    v: Vec<f64>,
    d1: Vec<f64>,
    d2: Vec<f64>,
}

fn monomial_table(n: usize, t: f64) -> Table {
    let mut v = vec![1.0; n + 1];
    for k in 1..=n {
        v[k] = v[k - 1] * t;
    }
    let d1 = (0..=n).map(|k| if k == 0 { 0.0 } else { k as f64 * v[k - 1] }).collect();
    let d2 = (0..=n).map(|k| if k < 2 { 0.0 } else { (k * (k - 1)) as f64 * v[k - 2] }).collect();
    Table { v, d1, d2 }
}

/// Legendre values with derivatives from `L'_{k+1} = L'_{k-1} + (2k+1) L_k`.
pub fn legendre_table(n: usize, t: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let mut v = vec![0.0; n + 1];
    let mut d1 = vec![0.0; n + 1];
    let mut d2 = vec![0.0; n + 1];
    v[0] = 1.0;
    if n >= 1 {
        v[1] = t;
        d1[1] = 1.0;
    }
    for k in 1..n {
        let kf = k as f64;
        v[k + 1] = ((2.0 * kf + 1.0) * t * v[k] - kf * v[k - 1]) / (kf + 1.0);
        d1[k + 1] = d1[k - 1] + (2.0 * kf + 1.0) * v[k];
        d2[k + 1] = d2[k - 1] + (2.0 * kf + 1.0) * d1[k];
    }
    (v, d1, d2)
}

impl PolyBasis {
    /// Scaled monomials `((x - x_K) / h_K)^α`.
    pub fn monomial(degree: usize, geom: &CellGeometry) -> Self {
        PolyBasis {
            kind: BasisKind::Monomial,
            degree,
            indices: multi_indices(degree),
            center: geom.barycenter,
            scale: [geom.diameter, geom.diameter],
            factor: vec![1.0; dim_poly(degree)],
        }
    }

    /// Legendre products on the bounding box of the cell.
    pub fn legendre(degree: usize, geom: &CellGeometry) -> Self {
        let bb = geom.bbox;
        PolyBasis {
            kind: BasisKind::Legendre,
            degree,
            indices: multi_indices(degree),
            center: bb.center(),
            scale: [0.5 * bb.width(), 0.5 * bb.height()],
            factor: vec![1.0; dim_poly(degree)],
        }
    }

    /// Divide every member by its L² norm computed with `rule`, turning a
    /// `q1` basis into `q2`. The rule must integrate degree `2 * degree`.
    pub fn l2_normalize(&self, rule: &PolygonRule) -> Result<Self> {
        if rule.target_degree < 2 * self.degree {
            return Err(Error::InvalidArgument(format!(
                "L² normalization of degree {} needs a rule of degree {}, got {}",
                self.degree,
                2 * self.degree,
                rule.target_degree
            )));
        }
        let mut sq = vec![0.0; self.len()];
        for (x, &w) in rule.points.iter().zip(&rule.weights) {
            for (s, v) in sq.iter_mut().zip(self.values(x)) {
                *s += w * v * v;
            }
        }
        let mut out = self.clone();
        for (f, s) in out.factor.iter_mut().zip(sq) {
            if s <= 0.0 || !s.is_finite() {
                return Err(Error::Singular("L² normalization (zero-norm member)"));
            }
            *f /= s.sqrt();
        }
        out.kind = BasisKind::L2Scaled;
        Ok(out)
    }

    /// Basis of kind `kind`; `q2` requires `rule`.
    pub fn new(kind: BasisKind, degree: usize, geom: &CellGeometry, rule: Option<&PolygonRule>) -> Result<Self> {
        match kind {
            BasisKind::Monomial => Ok(Self::monomial(degree, geom)),
            BasisKind::Legendre => Ok(Self::legendre(degree, geom)),
            BasisKind::L2Scaled => {
                let rule = rule.ok_or_else(|| Error::InvalidArgument("q2 basis needs a polygon rule".into()))?;
                Self::monomial(degree, geom).l2_normalize(rule)
            }
        }
    }

    /// The first `dim P_degree` members, spanning `P_degree`.
    pub fn truncated(&self, degree: usize) -> Self {
        let degree = degree.min(self.degree);
        let n = dim_poly(degree);
        PolyBasis {
            kind: self.kind,
            degree,
            indices: self.indices[..n].to_vec(),
            center: self.center,
            scale: self.scale,
            factor: self.factor[..n].to_vec(),
        }
    }

    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[[usize; 2]] {
        &self.indices
    }

    pub fn index_of(&self, alpha: [usize; 2]) -> Option<usize> {
        self.indices.iter().position(|&a| a == alpha)
    }

    fn tables(&self, x: &Point) -> (Table, Table) {
        let t = [(x.x - self.center.x) / self.scale[0], (x.y - self.center.y) / self.scale[1]];
        match self.kind {
            BasisKind::Monomial | BasisKind::L2Scaled => (monomial_table(self.degree, t[0]), monomial_table(self.degree, t[1])),
            BasisKind::Legendre => {
                let (v, d1, d2) = legendre_table(self.degree, t[0]);
                let tx = Table { v, d1, d2 };
                let (v, d1, d2) = legendre_table(self.degree, t[1]);
                (tx, Table { v, d1, d2 })
            }
        }
    }

    pub fn values(&self, x: &Point) -> Vec<f64> {
        let (tx, ty) = self.tables(x);
        self.indices.iter().zip(&self.factor).map(|(a, f)| f * tx.v[a[0]] * ty.v[a[1]]).collect()
    }

    pub fn gradients(&self, x: &Point) -> Vec<[f64; 2]> {
        let (tx, ty) = self.tables(x);
        let [sx, sy] = self.scale;
        self.indices
            .iter()
            .zip(&self.factor)
            .map(|(a, f)| [f * tx.d1[a[0]] * ty.v[a[1]] / sx, f * tx.v[a[0]] * ty.d1[a[1]] / sy])
            .collect()
    }

    pub fn laplacians(&self, x: &Point) -> Vec<f64> {
        let (tx, ty) = self.tables(x);
        let [sx, sy] = self.scale;
        self.indices
            .iter()
            .zip(&self.factor)
            .map(|(a, f)| f * (tx.d2[a[0]] * ty.v[a[1]] / (sx * sx) + tx.v[a[0]] * ty.d2[a[1]] / (sy * sy)))
            .collect()
    }

    pub fn evaluate(&self, member: usize, x: &Point) -> f64 {
        self.values(x)[member]
    }

    pub fn gradient(&self, member: usize, x: &Point) -> [f64; 2] {
        self.gradients(x)[member]
    }

    pub fn laplacian(&self, member: usize, x: &Point) -> f64 {
        self.laplacians(x)[member]
    }

    /// Value of `Σ c_i q_i` at `x`.
    pub fn combine(&self, coeffs: &[f64], x: &Point) -> f64 {
        self.values(x).iter().zip(coeffs).map(|(v, c)| v * c).sum()
    }

    pub fn combine_gradient(&self, coeffs: &[f64], x: &Point) -> [f64; 2] {
        self.gradients(x)
            .iter()
            .zip(coeffs)
            .fold([0.0, 0.0], |acc, (g, c)| [acc[0] + c * g[0], acc[1] + c * g[1]])
    }

    /// `∫_K q_i q_j` under `rule`.
    pub fn mass_matrix(&self, rule: &PolygonRule) -> DMatrix<f64> {
        let n = self.len();
        let mut m = DMatrix::zeros(n, n);
        for (x, &w) in rule.points.iter().zip(&rule.weights) {
            let v = DVector::from_vec(self.values(x));
            m.syger(w, &v, &v, 1.0);
        }
        m.fill_upper_triangle_with_lower_triangle();
        m
    }
}

/// Coefficients of `T_n''` in `{T_k}` for the univariate family of `kind`.
fn second_derivative_coeffs(kind: BasisKind, n: usize) -> Vec<(usize, f64)> {
    if n < 2 {
        return Vec::new();
    }
    match kind {
        BasisKind::Monomial | BasisKind::L2Scaled => vec![(n - 2, (n * (n - 1)) as f64)],
        // L_n'' = Σ_{k = n-2, n-4, ...} (k + 1/2) (n(n+1) - k(k+1)) L_k
        BasisKind::Legendre => (0..=n - 2)
            .rev()
            .step_by(2)
            .map(|k| (k, (k as f64 + 0.5) * ((n * (n + 1) - k * (k + 1)) as f64)))
            .collect(),
    }
}

/// Coefficients of `Δq_α` in the moment basis, one row per member of `basis`.
///
/// Every basis kind is a scaled tensor product `f_α T_i(s) T_j(t)`, so the
/// expansion is exact algebra on the univariate second derivatives; no
/// quadrature or mass-matrix solve is involved. `moments` must be a
/// truncation of `basis` of degree at least `degree - 2`.
pub fn laplacian_expansion(basis: &PolyBasis, moments: &PolyBasis) -> Result<DMatrix<f64>> {
    let (np, nm) = (basis.len(), moments.len());
    let compatible = moments.kind == basis.kind
        && moments.center == basis.center
        && moments.scale == basis.scale
        && moments.indices[..] == basis.indices[..nm]
        && moments.factor[..] == basis.factor[..nm];
    if !compatible {
        return Err(Error::InvalidArgument("moment basis must be a truncation of the polynomial basis".into()));
    }
    if basis.degree >= 2 && moments.degree + 2 < basis.degree {
        return Err(Error::InvalidArgument(format!(
            "moment basis of degree {} cannot hold laplacians of degree {}",
            moments.degree,
            basis.degree - 2
        )));
    }
    let [sx, sy] = basis.scale;
    let mut out = DMatrix::zeros(np, nm);
    for (a, &[i, j]) in basis.indices.iter().enumerate() {
        let f = basis.factor[a];
        let terms = second_derivative_coeffs(basis.kind, i)
            .into_iter()
            .map(|(k, c)| ([k, j], c / (sx * sx)))
            .chain(second_derivative_coeffs(basis.kind, j).into_iter().map(|(k, c)| ([i, k], c / (sy * sy))));
        for (target, c) in terms {
            let g = moments.index_of(target).expect("laplacian lies in the moment space");
            out[(a, g)] += f * c / moments.factor[g];
        }
    }
    Ok(out)
}

/// Coefficients of `Δq` for the single member `member`.
pub fn laplacian_coefficients(basis: &PolyBasis, member: usize, moments: &PolyBasis) -> Result<Vec<f64>> {
    let all = laplacian_expansion(basis, moments)?;
    Ok(all.row(member).iter().copied().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::polygon_rule;

    fn unit_square() -> Vec<Point> {
        vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(1.0, 1.0), Point::new(0.0, 1.0)]
    }

    #[test]
    fn counts_and_ordering() {
        for p in 0..8 {
            assert_eq!(multi_indices(p).len(), dim_poly(p));
        }
        assert_eq!(multi_indices(2), vec![[0, 0], [1, 0], [0, 1], [2, 0], [1, 1], [0, 2]]);
    }

    #[test]
    fn constant_member() {
        let g = CellGeometry::of(&unit_square());
        let b = PolyBasis::monomial(3, &g);
        let x = Point::new(0.3, -2.0);
        assert_eq!(b.evaluate(0, &x), 1.0);
        assert_eq!(b.gradient(0, &x), [0.0, 0.0]);
        // vanishes at the barycenter for α != 0
        let at_center = b.values(&g.barycenter);
        assert!(at_center[1..].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn scaled_monomial_laplacian() {
        let g = CellGeometry::of(&unit_square());
        let b = PolyBasis::monomial(2, &g);
        let i = b.index_of([2, 0]).unwrap();
        assert!((b.laplacian(i, &Point::new(0.1, 0.7)) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn legendre_at_box_center() {
        let poly = vec![Point::new(0.2, 0.1), Point::new(0.9, 0.3), Point::new(0.4, 0.8)];
        let g = CellGeometry::of(&poly);
        let b = PolyBasis::legendre(3, &g);
        let i = b.index_of([2, 0]).unwrap();
        assert!((b.evaluate(i, &g.bbox.center()) + 0.5).abs() < 1e-15);
    }

    #[test]
    fn l2_normalization() {
        let sq = unit_square();
        let g = CellGeometry::of(&sq);
        let rule = polygon_rule(&sq, 6).unwrap();
        let q1 = PolyBasis::monomial(3, &g);
        let q2 = q1.l2_normalize(&rule).unwrap();
        let i = q1.index_of([1, 0]).unwrap();
        // ∫ ((x - 1/2)/√2)² = 1/24
        assert!((q2.factor[i] - 24f64.sqrt()).abs() < 1e-12);
        assert!((q2.factor[0] - 1.0).abs() < 1e-14);
        let m = q2.mass_matrix(&rule);
        for k in 0..q2.len() {
            assert!((m[(k, k)] - 1.0).abs() < 1e-12);
        }
        let small = polygon_rule(&sq, 4).unwrap();
        assert!(q1.l2_normalize(&small).is_err());
    }

    #[test]
    fn constant_normalized_by_sqrt_area() {
        let tri = vec![Point::new(0.0, 0.0), Point::new(0.5, 0.0), Point::new(0.0, 0.5)];
        let g = CellGeometry::of(&tri);
        let rule = polygon_rule(&tri, 4).unwrap();
        let q2 = PolyBasis::new(BasisKind::L2Scaled, 2, &g, Some(&rule)).unwrap();
        assert!((q2.evaluate(0, &Point::new(0.1, 0.1)) - 1.0 / g.area.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn laplacian_expansion_of_low_members() {
        let sq = unit_square();
        let g = CellGeometry::of(&sq);
        let b = PolyBasis::monomial(3, &g);
        let m = b.truncated(1);
        let c = laplacian_expansion(&b, &m).unwrap();
        for a in 0..3 {
            assert!(c.row(a).iter().all(|v| *v == 0.0));
        }
        let i = b.index_of([2, 0]).unwrap();
        let row = laplacian_coefficients(&b, i, &m).unwrap();
        assert!((row[0] - 2.0 / g.diameter.powi(2)).abs() < 1e-14);
        assert!(row[1] == 0.0 && row[2] == 0.0);
        assert!(laplacian_expansion(&b, &b.truncated(0)).is_err());
        assert!(laplacian_expansion(&b, &PolyBasis::legendre(1, &g)).is_err());
    }

    #[test]
    fn laplacian_expansion_reproduces_pointwise() {
        let hex: Vec<Point> = (0..6)
            .map(|k| {
                let t = std::f64::consts::PI * k as f64 / 3.0 + 0.1;
                Point::new(0.3 + 0.2 * t.cos(), 0.6 + 0.15 * t.sin())
            })
            .collect();
        let g = CellGeometry::of(&hex);
        let rule = polygon_rule(&hex, 16).unwrap();
        let pts: Vec<Point> = (0..20).map(|k| Point::new(0.15 + 0.015 * k as f64, 0.5 + 0.01 * k as f64)).collect();
        for kind in BasisKind::ALL {
            let b = PolyBasis::new(kind, 8, &g, Some(&rule)).unwrap();
            let m = b.truncated(6);
            let c = laplacian_expansion(&b, &m).unwrap();
            for x in &pts {
                let lap = b.laplacians(x);
                let mv = m.values(x);
                for a in 0..b.len() {
                    let rec: f64 = (0..m.len()).map(|k| c[(a, k)] * mv[k]).sum();
                    assert!((rec - lap[a]).abs() <= 1e-10 * lap[a].abs().max(1.0), "{kind} member {a}");
                }
            }
        }
    }

    #[test]
    fn legendre_second_derivatives() {
        for n in 0..9 {
            let coeffs = second_derivative_coeffs(BasisKind::Legendre, n);
            for t in [-0.9, -0.3, 0.2, 0.7] {
                let (v, _, d2) = legendre_table(n, t);
                let rec: f64 = coeffs.iter().map(|&(k, c)| c * v[k]).sum();
                assert!((rec - d2[n]).abs() < 1e-11 * d2[n].abs().max(1.0));
            }
        }
    }

    #[test]
    fn legendre_square_mass_is_diagonal() {
        let sq = vec![Point::new(0.25, 0.25), Point::new(0.5, 0.25), Point::new(0.5, 0.5), Point::new(0.25, 0.5)];
        let g = CellGeometry::of(&sq);
        let rule = polygon_rule(&sq, 12).unwrap();
        let m = PolyBasis::legendre(6, &g).mass_matrix(&rule);
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                if i != j {
                    assert!(m[(i, j)].abs() <= 1e-10 * m[(i, i)].max(m[(j, j)]));
                }
            }
        }
    }
}
