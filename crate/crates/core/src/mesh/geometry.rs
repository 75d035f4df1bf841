use super::Point;

/// Geometric data of a single polygonal cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellGeometry {
    pub diameter: f64,
    pub barycenter: Point,
    pub area: f64,
    pub perimeter: f64,
    pub vertex_count: usize,
    pub bbox: BoundingBox,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl BoundingBox {
    pub fn of(points: &[Point]) -> Self {
        let mut bb = BoundingBox {
            x_min: f64::INFINITY,
            x_max: f64::NEG_INFINITY,
            y_min: f64::INFINITY,
            y_max: f64::NEG_INFINITY,
        };
        for p in points {
            bb.x_min = bb.x_min.min(p.x);
            bb.x_max = bb.x_max.max(p.x);
            bb.y_min = bb.y_min.min(p.y);
            bb.y_max = bb.y_max.max(p.y);
        }
        bb
    }

    pub fn center(&self) -> Point {
        Point::new(0.5 * (self.x_min + self.x_max), 0.5 * (self.y_min + self.y_max))
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }
}

impl CellGeometry {
    pub fn of(polygon: &[Point]) -> Self {
        CellGeometry {
            diameter: diameter(polygon),
            barycenter: centroid(polygon),
            area: signed_area(polygon),
            perimeter: perimeter(polygon),
            vertex_count: polygon.len(),
            bbox: BoundingBox::of(polygon),
        }
    }
}

/// Shoelace area, positive for counter-clockwise loops.
pub fn signed_area(polygon: &[Point]) -> f64 {
    let n = polygon.len();
    let mut twice = 0.0;
    for i in 0..n {
        let a = polygon[i];
        let b = polygon[(i + 1) % n];
        twice += a.x * b.y - b.x * a.y;
    }
    0.5 * twice
}

/// Area centroid. Coordinates are taken relative to the first vertex to limit
/// cancellation on small cells far from the origin.
pub fn centroid(polygon: &[Point]) -> Point {
    let n = polygon.len();
    let o = polygon[0];
    let (mut cx, mut cy, mut twice) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let a = polygon[i] - o;
        let b = polygon[(i + 1) % n] - o;
        let cross = a.x * b.y - b.x * a.y;
        twice += cross;
        cx += (a.x + b.x) * cross;
        cy += (a.y + b.y) * cross;
    }
    Point::new(o.x + cx / (3.0 * twice), o.y + cy / (3.0 * twice))
}

pub fn perimeter(polygon: &[Point]) -> f64 {
    let n = polygon.len();
    (0..n).map(|i| (polygon[(i + 1) % n] - polygon[i]).norm()).sum()
}

/// Largest pairwise vertex distance.
pub fn diameter(polygon: &[Point]) -> f64 {
    let mut d: f64 = 0.0;
    for (i, a) in polygon.iter().enumerate() {
        for b in &polygon[i + 1..] {
            d = d.max((b - a).norm());
        }
    }
    d
}

pub fn min_vertex_distance(polygon: &[Point]) -> f64 {
    let mut d = f64::INFINITY;
    for (i, a) in polygon.iter().enumerate() {
        for b in &polygon[i + 1..] {
            d = d.min((b - a).norm());
        }
    }
    d
}

/// Signed distance of `x` to the supporting line of each edge; positive on the
/// interior side of a CCW loop. Returns the minimum over all edges.
pub fn min_edge_line_distance(polygon: &[Point], x: &Point) -> f64 {
    let n = polygon.len();
    let mut d = f64::INFINITY;
    for i in 0..n {
        let a = polygon[i];
        let b = polygon[(i + 1) % n];
        let t = b - a;
        let len = t.norm();
        if len == 0.0 {
            continue;
        }
        let rel = x - a;
        d = d.min((t.x * rel.y - t.y * rel.x) / len);
    }
    d
}

fn orient(a: &Point, b: &Point, c: &Point) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

fn segments_intersect(p1: &Point, p2: &Point, q1: &Point, q2: &Point) -> bool {
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    let on = |a: &Point, b: &Point, c: &Point, d: f64| {
        d == 0.0 && c.x >= a.x.min(b.x) && c.x <= a.x.max(b.x) && c.y >= a.y.min(b.y) && c.y <= a.y.max(b.y)
    };
    on(q1, q2, p1, d1) || on(q1, q2, p2, d2) || on(p1, p2, q1, d3) || on(p1, p2, q2, d4)
}

/// True when no two non-adjacent edges of the loop touch.
pub fn is_simple(polygon: &[Point]) -> bool {
    let n = polygon.len();
    if n < 3 {
        return false;
    }
    for i in 0..n {
        for j in i + 1..n {
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            if segments_intersect(&polygon[i], &polygon[(i + 1) % n], &polygon[j], &polygon[(j + 1) % n]) {
                return false;
            }
        }
    }
    true
}

/// Clip a convex or non-convex polygon against the half-plane
/// `normal · x <= offset` (Sutherland-Hodgman step).
pub fn clip_half_plane(polygon: &[Point], normal: [f64; 2], offset: f64) -> Vec<Point> {
    let n = polygon.len();
    let mut out = Vec::with_capacity(n + 2);
    let side = |p: &Point| normal[0] * p.x + normal[1] * p.y - offset;
    for i in 0..n {
        let a = polygon[i];
        let b = polygon[(i + 1) % n];
        let (sa, sb) = (side(&a), side(&b));
        if sa <= 0.0 {
            out.push(a);
        }
        if (sa < 0.0 && sb > 0.0) || (sa > 0.0 && sb < 0.0) {
            let t = sa / (sa - sb);
            out.push(a + (b - a) * t);
        }
    }
    out
}

/// Drop consecutive vertices closer than `tol`.
pub fn dedup_loop(polygon: Vec<Point>, tol: f64) -> Vec<Point> {
    let mut out: Vec<Point> = Vec::with_capacity(polygon.len());
    for p in polygon {
        if out.last().is_none_or(|q| (p - q).norm() > tol) {
            out.push(p);
        }
    }
    while out.len() > 1 && (out[0] - out[out.len() - 1]).norm() <= tol {
        out.pop();
    }
    out
}
