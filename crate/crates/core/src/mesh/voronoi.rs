//! Voronoi diagrams of the unit square relaxed by Lloyd's iteration.
//!
//! Each cell is the unit square cut by the bisector half-planes of the other
//! generators, nearest first. Clipping stops once the next generator is
//! farther than twice the current cell's circumradius around its own
//! generator, since no later bisector can reach the cell.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::geometry::{centroid, clip_half_plane, dedup_loop};
use super::{Point, PolygonMesh};
use crate::{Error, Result};

/// Outcome of a Lloyd run: the final mesh, its generators, and the largest
/// generator-to-centroid distance measured before each iteration and after
/// the last one (`iterations + 1` entries).
#[derive(Debug, Clone)]
pub struct LloydRun {
    pub mesh: PolygonMesh,
    pub seeds: Vec<Point>,
    pub max_displacement: Vec<f64>,
}

fn unit_square() -> Vec<Point> {
    vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(1.0, 1.0), Point::new(0.0, 1.0)]
}

/// Clipped Voronoi cells of `seeds` in `[0,1]²`, one CCW loop per seed.
pub fn voronoi_cells(seeds: &[Point]) -> Vec<Vec<Point>> {
    let mut order: Vec<usize> = Vec::with_capacity(seeds.len());
    seeds
        .iter()
        .enumerate()
        .map(|(i, s)| {
            order.clear();
            order.extend((0..seeds.len()).filter(|&j| j != i));
            order.sort_by(|&a, &b| (seeds[a] - s).norm_squared().total_cmp(&(seeds[b] - s).norm_squared()));
            let mut cell = unit_square();
            for &j in &order {
                let d = (seeds[j] - s).norm();
                let radius = cell.iter().map(|v| (v - s).norm()).fold(0.0, f64::max);
                if d > 2.0 * radius {
                    break;
                }
                // keep points closer to s than to seeds[j]
                let normal = seeds[j] - s;
                let mid = nalgebra::center(s, &seeds[j]);
                let offset = normal.x * mid.x + normal.y * mid.y;
                cell = clip_half_plane(&cell, [normal.x, normal.y], offset);
                if cell.is_empty() {
                    break;
                }
            }
            dedup_loop(cell, 1e-13)
        })
        .collect()
}

fn has_duplicates(seeds: &[Point]) -> bool {
    let mut sorted: Vec<&Point> = seeds.iter().collect();
    sorted.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    sorted.windows(2).any(|w| w[0] == w[1])
}

/// Run `iterations` Lloyd steps from `n_seeds` uniform random generators.
pub fn lloyd_relax(n_seeds: usize, iterations: usize, seed: u64) -> Result<LloydRun> {
    if n_seeds == 0 {
        return Err(Error::InvalidArgument("voronoi mesh needs at least one seed".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seeds: Vec<Point> = (0..n_seeds)
        .map(|_| Point::new(rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)))
        .collect();
    if has_duplicates(&seeds) {
        for p in seeds.iter_mut() {
            p.x += rng.random_range(-1e-9..1e-9);
            p.y += rng.random_range(-1e-9..1e-9);
        }
        if has_duplicates(&seeds) {
            return Err(Error::Generation("duplicate voronoi generators".into()));
        }
    }

    let mut max_displacement = Vec::with_capacity(iterations + 1);
    let mut cells = voronoi_cells(&seeds);
    for it in 0..=iterations {
        let centroids: Vec<Point> = cells.iter().map(|c| centroid(c)).collect();
        let disp = seeds.iter().zip(&centroids).map(|(s, c)| (s - c).norm()).fold(0.0, f64::max);
        max_displacement.push(disp);
        if it == iterations {
            break;
        }
        seeds = centroids;
        cells = voronoi_cells(&seeds);
    }

    let tol = 1e-10 / (n_seeds as f64).sqrt();
    let mesh = PolygonMesh::from_polygons(&cells, tol)?;
    Ok(LloydRun { mesh, seeds, max_displacement })
}

/// Voronoi-Lloyd mesh with `n_seeds` generators after `iterations` steps.
pub fn generate_voronoi_lloyd(n_seeds: usize, iterations: usize, seed: u64) -> Result<PolygonMesh> {
    Ok(lloyd_relax(n_seeds, iterations, seed)?.mesh)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::geometry::signed_area;

    #[test]
    fn single_seed_is_the_square() {
        let m = generate_voronoi_lloyd(1, 3, 9).unwrap();
        assert_eq!(m.n_cells(), 1);
        assert_eq!(m.n_vertices(), 4);
        assert!((m.total_area() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn lloyd_step_reduces_displacement() {
        let run = lloyd_relax(16, 1, 3).unwrap();
        assert!(run.max_displacement[1] < run.max_displacement[0]);
    }

    #[test]
    fn lloyd_equalizes_areas() {
        let var = |m: &PolygonMesh| {
            let a: Vec<f64> = (0..m.n_cells()).map(|c| signed_area(&m.cell_polygon(c))).collect();
            let mean = a.iter().sum::<f64>() / a.len() as f64;
            a.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / a.len() as f64
        };
        let m0 = generate_voronoi_lloyd(16, 0, 11).unwrap();
        let m100 = generate_voronoi_lloyd(16, 100, 11).unwrap();
        assert!(var(&m100) < var(&m0));
    }

    #[test]
    fn deterministic() {
        let a = generate_voronoi_lloyd(25, 10, 5).unwrap();
        let b = generate_voronoi_lloyd(25, 10, 5).unwrap();
        assert_eq!(a, b);
    }
}
