//! Shape-regularity indicators for polygonal cells.
//!
//! `gamma` is the radius of the largest ball, centered at a point of the
//! polygon's kernel, such that the cell is star-shaped with respect to the
//! whole ball, divided by the cell diameter. A ball is admissible exactly when
//! it lies on the inner side of every edge's supporting line, so the radius at a
//! center `x` is `min_e dist(x, line_e)`. That function is concave, which
//! lets a shrinking grid search converge to its maximum.

use super::geometry::{diameter, min_edge_line_distance, min_vertex_distance, BoundingBox};
use super::{Point, PolygonMesh};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularityReport {
    pub gamma: f64,
    pub gamma_tilde: f64,
    /// Best ball center found by the search.
    pub star_center: Point,
    pub pass: bool,
}

const GRID: usize = 21;

/// Grid search for the point maximizing the inscribed star-ball radius.
/// Stops once the grid spacing drops below `diameter / 1000`.
pub(crate) fn star_center(polygon: &[Point]) -> (Point, f64) {
    let h = diameter(polygon);
    let bb = BoundingBox::of(polygon);
    let mut center = bb.center();
    let mut half = [0.5 * bb.width(), 0.5 * bb.height()];
    let mut best = (center, min_edge_line_distance(polygon, &center));
    loop {
        let step = [2.0 * half[0] / (GRID - 1) as f64, 2.0 * half[1] / (GRID - 1) as f64];
        for i in 0..GRID {
            for j in 0..GRID {
                let x = Point::new(center.x - half[0] + i as f64 * step[0], center.y - half[1] + j as f64 * step[1]);
                let r = min_edge_line_distance(polygon, &x);
                if r > best.1 {
                    best = (x, r);
                }
            }
        }
        if step[0].max(step[1]) <= h / 1000.0 {
            break;
        }
        center = best.0;
        half = [half[0] / 4.0, half[1] / 4.0];
    }
    best
}

pub fn cell_regularity(polygon: &[Point], gamma_min: f64, gamma_tilde_min: f64) -> RegularityReport {
    let h = diameter(polygon);
    let (center, radius) = star_center(polygon);
    let gamma = if h > 0.0 { (radius / h).max(0.0) } else { 0.0 };
    let gamma_tilde = if h > 0.0 { min_vertex_distance(polygon) / h } else { 0.0 };
    let star_shaped = radius > 0.0;
    RegularityReport {
        gamma,
        gamma_tilde,
        star_center: center,
        pass: star_shaped && gamma >= gamma_min && gamma_tilde >= gamma_tilde_min,
    }
}

/// Regularity report for every cell of `mesh`.
pub fn check_regularity(mesh: &PolygonMesh, gamma_min: f64, gamma_tilde_min: f64) -> Vec<RegularityReport> {
    (0..mesh.n_cells())
        .map(|c| cell_regularity(&mesh.cell_polygon(c), gamma_min, gamma_tilde_min))
        .collect()
}
