//! Polygonal meshes of the unit square.

mod generate;
pub mod geometry;
pub mod io;
pub mod regularity;
pub mod voronoi;

use std::collections::HashMap;

pub use generate::{generate_hex_mesh, generate_square_mesh, generate_triangle_mesh, generate_triangle_mesh_with_jitter};
pub use geometry::{BoundingBox, CellGeometry};
pub use io::{load_mesh, parse_mesh, save_mesh, write_mesh};
pub use regularity::{cell_regularity, check_regularity, RegularityReport};
pub use voronoi::{generate_voronoi_lloyd, lloyd_relax, LloydRun};

use crate::{Error, Result};

pub type Point = nalgebra::Point2<f64>;

/// An undirected mesh edge. `vertices` is stored low index first, which is
/// also the global orientation used to place edge degrees of freedom.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub vertices: [usize; 2],
    pub cells: (usize, Option<usize>),
}

impl Edge {
    pub fn is_boundary(&self) -> bool {
        self.cells.1.is_none()
    }
}

/// A conforming polygonal mesh. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct PolygonMesh {
    vertices: Vec<Point>,
    cells: Vec<Vec<usize>>,
    edges: Vec<Edge>,
    cell_edges: Vec<Vec<usize>>,
    boundary_vertex: Vec<bool>,
}

impl PolygonMesh {
    /// Build and validate a mesh from vertices and CCW cell loops.
    pub fn new(vertices: Vec<Point>, cells: Vec<Vec<usize>>) -> Result<Self> {
        let nv = vertices.len();
        let mut used = vec![false; nv];
        for (c, cell) in cells.iter().enumerate() {
            if cell.len() < 3 {
                return Err(Error::InvalidMesh(format!("cell {c} has {} vertices", cell.len())));
            }
            for &v in cell {
                if v >= nv {
                    return Err(Error::InvalidMesh(format!("cell {c} references vertex {v} but only {nv} exist")));
                }
                used[v] = true;
            }
            let poly: Vec<Point> = cell.iter().map(|&v| vertices[v]).collect();
            for i in 0..poly.len() {
                for j in i + 1..poly.len() {
                    if poly[i] == poly[j] {
                        return Err(Error::InvalidMesh(format!("cell {c} has coincident vertices {} and {}", cell[i], cell[j])));
                    }
                }
            }
            let area = geometry::signed_area(&poly);
            if area <= 0.0 {
                return Err(Error::InvalidMesh(format!("cell {c} is not counter-clockwise (signed area {area:e})")));
            }
            if !geometry::is_simple(&poly) {
                return Err(Error::InvalidMesh(format!("cell {c} is self-intersecting")));
            }
        }
        if let Some(v) = used.iter().position(|u| !u) {
            return Err(Error::InvalidMesh(format!("vertex {v} is not used by any cell")));
        }

        let mut edge_index: HashMap<[usize; 2], usize> = HashMap::new();
        let mut edges: Vec<Edge> = Vec::new();
        let mut cell_edges = Vec::with_capacity(cells.len());
        // directed usage: true when the cell traverses low -> high
        let mut forward_used: Vec<[bool; 2]> = Vec::new();
        for (c, cell) in cells.iter().enumerate() {
            let k = cell.len();
            let mut ce = Vec::with_capacity(k);
            for i in 0..k {
                let (a, b) = (cell[i], cell[(i + 1) % k]);
                let key = [a.min(b), a.max(b)];
                let dir = usize::from(a > b);
                let e = match edge_index.get(&key) {
                    Some(&e) => {
                        let edge = &mut edges[e];
                        if edge.cells.1.is_some() {
                            return Err(Error::InvalidMesh(format!("edge {key:?} shared by more than two cells")));
                        }
                        if forward_used[e][dir] {
                            return Err(Error::InvalidMesh(format!("edge {key:?} traversed twice in the same direction")));
                        }
                        edge.cells.1 = Some(c);
                        forward_used[e][dir] = true;
                        e
                    }
                    None => {
                        let e = edges.len();
                        edges.push(Edge { vertices: key, cells: (c, None) });
                        let mut f = [false; 2];
                        f[dir] = true;
                        forward_used.push(f);
                        edge_index.insert(key, e);
                        e
                    }
                };
                ce.push(e);
            }
            cell_edges.push(ce);
        }

        let mut boundary_vertex = vec![false; nv];
        for e in edges.iter().filter(|e| e.is_boundary()) {
            boundary_vertex[e.vertices[0]] = true;
            boundary_vertex[e.vertices[1]] = true;
        }

        Ok(PolygonMesh { vertices, cells, edges, cell_edges, boundary_vertex })
    }

    /// Build a mesh from independent polygons, merging vertices closer than
    /// `tol`. Consecutive duplicates inside a loop are collapsed.
    pub fn from_polygons(polygons: &[Vec<Point>], tol: f64) -> Result<Self> {
        let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
        let mut vertices: Vec<Point> = Vec::new();
        let key = |p: &Point| ((p.x / tol).floor() as i64, (p.y / tol).floor() as i64);
        let mut cells = Vec::with_capacity(polygons.len());
        for poly in polygons {
            let mut cell: Vec<usize> = Vec::with_capacity(poly.len());
            for p in poly {
                let (kx, ky) = key(p);
                let mut found = None;
                'search: for dx in -1..=1 {
                    for dy in -1..=1 {
                        if let Some(list) = grid.get(&(kx + dx, ky + dy)) {
                            for &v in list {
                                if (vertices[v] - p).norm() <= tol {
                                    found = Some(v);
                                    break 'search;
                                }
                            }
                        }
                    }
                }
                let v = found.unwrap_or_else(|| {
                    vertices.push(*p);
                    grid.entry((kx, ky)).or_default().push(vertices.len() - 1);
                    vertices.len() - 1
                });
                if cell.last() != Some(&v) {
                    cell.push(v);
                }
            }
            while cell.len() > 1 && cell.first() == cell.last() {
                cell.pop();
            }
            if cell.len() >= 3 {
                cells.push(cell);
            }
        }
        PolygonMesh::new(vertices, cells)
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn cells(&self) -> &[Vec<usize>] {
        &self.cells
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    /// Global edge index of each local edge `i -> i+1` of `cell`.
    pub fn cell_edges(&self, cell: usize) -> &[usize] {
        &self.cell_edges[cell]
    }

    pub fn boundary_vertex_flags(&self) -> &[bool] {
        &self.boundary_vertex
    }

    pub fn cell_polygon(&self, cell: usize) -> Vec<Point> {
        self.cells[cell].iter().map(|&v| self.vertices[v]).collect()
    }

    pub fn cell_geometry(&self, cell: usize) -> CellGeometry {
        CellGeometry::of(&self.cell_polygon(cell))
    }

    pub fn total_area(&self) -> f64 {
        (0..self.n_cells()).map(|c| geometry::signed_area(&self.cell_polygon(c))).sum()
    }

    /// `V - E + F` for the planar subdivision; 1 for a simply connected domain.
    pub fn euler_characteristic(&self) -> i64 {
        self.n_vertices() as i64 - self.n_edges() as i64 + self.n_cells() as i64
    }

    /// Largest cell diameter.
    pub fn mesh_size(&self) -> f64 {
        (0..self.n_cells()).map(|c| geometry::diameter(&self.cell_polygon(c))).fold(0.0, f64::max)
    }

    /// Check that the mesh tiles `[0,1]²`: vertices in the square, boundary
    /// edges on its sides and total area 1.
    pub fn check_unit_square(&self) -> Result<()> {
        const TOL: f64 = 1e-12;
        for (i, v) in self.vertices.iter().enumerate() {
            if v.x < -TOL || v.x > 1.0 + TOL || v.y < -TOL || v.y > 1.0 + TOL {
                return Err(Error::InvalidMesh(format!("vertex {i} lies outside the unit square")));
            }
        }
        let on_side = |a: &Point, b: &Point| {
            [(a.x, b.x), (a.y, b.y)]
                .iter()
                .any(|&(s, t)| ((s.abs() < TOL) && (t.abs() < TOL)) || ((s - 1.0).abs() < TOL && (t - 1.0).abs() < TOL))
        };
        for e in self.edges.iter().filter(|e| e.is_boundary()) {
            let (a, b) = (&self.vertices[e.vertices[0]], &self.vertices[e.vertices[1]]);
            if !on_side(a, b) {
                return Err(Error::InvalidMesh(format!(
                    "boundary edge {:?} is not on the unit square boundary (hole or hanging node)",
                    e.vertices
                )));
            }
        }
        let area = self.total_area();
        if (area - 1.0).abs() > TOL {
            return Err(Error::InvalidMesh(format!("cell areas sum to {area}, expected 1")));
        }
        Ok(())
    }
}
