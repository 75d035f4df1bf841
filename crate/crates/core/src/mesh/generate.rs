use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::geometry::{clip_half_plane, dedup_loop, min_vertex_distance, diameter, signed_area};
use super::regularity::cell_regularity;
use super::{Point, PolygonMesh};
use crate::{Error, Result};

/// `n × n` axis-aligned squares tiling `[0,1]²`.
pub fn generate_square_mesh(n: usize) -> Result<PolygonMesh> {
    if n < 1 {
        return Err(Error::InvalidArgument("square mesh needs n >= 1".into()));
    }
    let h = 1.0 / n as f64;
    let vertices = grid_vertices(n, |i, j| Point::new(i as f64 * h, j as f64 * h));
    let idx = |i: usize, j: usize| j * (n + 1) + i;
    let mut cells = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            cells.push(vec![idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1)]);
        }
    }
    PolygonMesh::new(vertices, cells)
}

fn grid_vertices(n: usize, f: impl Fn(usize, usize) -> Point) -> Vec<Point> {
    let mut v = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            v.push(f(i, j));
        }
    }
    v
}

const TRIANGLE_JITTER: f64 = 0.25;
const TRIANGLE_GAMMA_MIN: f64 = 0.05;

/// Unstructured-looking triangle mesh: a jittered `n × n` grid whose quads are
/// split along a pseudo-randomly chosen diagonal.
pub fn generate_triangle_mesh(n: usize, seed: u64) -> Result<PolygonMesh> {
    generate_triangle_mesh_with_jitter(n, seed, TRIANGLE_JITTER)
}

/// As [`generate_triangle_mesh`] with interior vertices displaced by up to
/// `jitter / n` in each coordinate. The jitter is halved and the mesh redrawn
/// when a triangle degenerates or falls below the shape-regularity floor.
pub fn generate_triangle_mesh_with_jitter(n: usize, seed: u64, jitter: f64) -> Result<PolygonMesh> {
    if n < 2 {
        return Err(Error::InvalidArgument("triangle mesh needs n >= 2".into()));
    }
    let h = 1.0 / n as f64;
    let mut scale = jitter;
    for _attempt in 0..10 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let vertices = grid_vertices(n, |i, j| Point::new(i as f64 * h, j as f64 * h))
            .into_iter()
            .enumerate()
            .map(|(k, p)| {
                let (i, j) = (k % (n + 1), k / (n + 1));
                let dx = rng.random_range(-1.0..=1.0) * scale * h;
                let dy = rng.random_range(-1.0..=1.0) * scale * h;
                if i == 0 || j == 0 || i == n || j == n {
                    p
                } else {
                    Point::new(p.x + dx, p.y + dy)
                }
            })
            .collect::<Vec<_>>();
        let idx = |i: usize, j: usize| j * (n + 1) + i;
        let mut cells = Vec::with_capacity(2 * n * n);
        for j in 0..n {
            for i in 0..n {
                let (a, b, c, d) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
                if rng.random_bool(0.5) {
                    cells.push(vec![a, b, c]);
                    cells.push(vec![a, c, d]);
                } else {
                    cells.push(vec![a, b, d]);
                    cells.push(vec![b, c, d]);
                }
            }
        }
        let ok = cells.iter().all(|cell| {
            let poly: Vec<Point> = cell.iter().map(|&v| vertices[v]).collect();
            signed_area(&poly) > 1e-10 && cell_regularity(&poly, TRIANGLE_GAMMA_MIN, 0.0).pass
        });
        if ok {
            return PolygonMesh::new(vertices, cells);
        }
        log::debug!("triangle mesh n={n} seed={seed}: degenerate cell at jitter {scale}, retrying");
        scale *= 0.5;
    }
    Err(Error::Generation(format!("triangle mesh n={n} seed={seed} still degenerate after 10 attempts")))
}

/// Regular (pointy-top) hexagons clipped to `[0,1]²`.
///
/// `n` is the number of hexagon rows between `y = 0` and `y = 1`; row centers
/// sit at `y = 1.5 s j` with side `s = 2 / (3 n)`, so the bottom and top rows
/// are cut through their centers. The horizontal offset of the tiling is picked
/// among eight candidates to maximize the smallest vertex-distance ratio of
/// the clipped border cells.
pub fn generate_hex_mesh(n: usize) -> Result<PolygonMesh> {
    if n < 2 {
        return Err(Error::InvalidArgument("hexagonal mesh needs n >= 2".into()));
    }
    let (s, x0) = hex_layout(n);
    PolygonMesh::from_polygons(&clipped_hexagons(n, s, x0), 1e-10 * s)
}

/// Side length and horizontal anchor of the hexagon tiling with `n` rows.
pub(crate) fn hex_layout(n: usize) -> (f64, f64) {
    let s = 2.0 / (3.0 * n as f64);
    let width = 3f64.sqrt() * s;
    let mut best = (f64::NEG_INFINITY, 0.5);
    for m in 0..8 {
        let x0 = 0.5 - m as f64 * width / 16.0;
        let quality = clipped_hexagons(n, s, x0)
            .iter()
            .map(|p| min_vertex_distance(p) / diameter(p))
            .fold(f64::INFINITY, f64::min);
        if quality > best.0 {
            best = (quality, x0);
        }
    }
    (s, best.1)
}

/// Centers of the full hexagon tiling used by [`generate_hex_mesh`] with
/// horizontal anchor `x0`; exposed for brute-force counting in tests.
pub(crate) fn hex_centers(n: usize, s: f64, x0: f64) -> Vec<Point> {
    let width = 3f64.sqrt() * s;
    let kmax = (1.0 / width).ceil() as i64 + 2;
    let mut centers = Vec::new();
    for j in 0..=n {
        let y = 1.5 * s * j as f64;
        let shift = if j % 2 == 0 { 0.0 } else { 0.5 * width };
        for k in -kmax..=kmax {
            centers.push(Point::new(x0 + shift + k as f64 * width, y));
        }
    }
    centers
}

pub(crate) fn hexagon(center: Point, s: f64) -> Vec<Point> {
    (0..6)
        .map(|k| {
            let a = std::f64::consts::PI / 6.0 + std::f64::consts::PI / 3.0 * k as f64;
            Point::new(center.x + s * a.cos(), center.y + s * a.sin())
        })
        .collect()
}

fn clipped_hexagons(n: usize, s: f64, x0: f64) -> Vec<Vec<Point>> {
    let full_area = 1.5 * 3f64.sqrt() * s * s;
    hex_centers(n, s, x0)
        .into_iter()
        .filter_map(|c| {
            let mut poly = hexagon(c, s);
            poly = clip_half_plane(&poly, [-1.0, 0.0], 0.0);
            poly = clip_half_plane(&poly, [1.0, 0.0], 1.0);
            poly = clip_half_plane(&poly, [0.0, -1.0], 0.0);
            poly = clip_half_plane(&poly, [0.0, 1.0], 1.0);
            let poly = dedup_loop(poly, 1e-12 * s);
            (poly.len() >= 3 && signed_area(&poly) > 1e-9 * full_area).then_some(poly)
        })
        .collect()
}
