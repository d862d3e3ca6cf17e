use std::collections::HashMap;

use nalgebra::{Vector2, Vector3};
use spade::{DelaunayTriangulation, Point2, Triangulation};

use crate::confmap::DomainKind;
use crate::error::{Error, Result};
use crate::mesh::TriMesh;

/// Arc pieces of clipped disk cells subtend at most this angle. The chord
/// error in total area is then below 2π·θ²/12 ≈ 5e-7.
pub const ARC_STEP: f64 = 1e-3;

#[derive(Clone, Debug)]
pub struct VoronoiDiagram {
    pub kind: DomainKind,
    pub sites: Vec<Vector3<f64>>,
    /// Cell corners in counter-clockwise order (seen from outside the sphere,
    /// or from +z for the disk). Disk cells are clipped to the unit disk with
    /// boundary arcs broken into short chords.
    pub cells: Vec<Vec<Vector3<f64>>>,
    /// Dual triangles over the sites, oriented like the cells.
    pub triangles: Vec<[usize; 3]>,
    /// Sites whose cells share an edge.
    pub adjacency: Vec<(usize, usize)>,
}

impl VoronoiDiagram {
    pub fn n_sites(&self) -> usize {
        self.sites.len()
    }

    /// Spherical area of sphere cells, planar area of disk cells.
    pub fn cell_area(&self, i: usize) -> f64 {
        let (s, c) = (&self.sites[i], &self.cells[i]);
        let n = c.len();
        match self.kind {
            DomainKind::Sphere => (0..n).map(|k| spherical_triangle_area(s, &c[k], &c[(k + 1) % n])).sum(),
            DomainKind::Disk => 0.5 * (0..n).map(|k| c[k].x * c[(k + 1) % n].y - c[(k + 1) % n].x * c[k].y).sum::<f64>(),
        }
    }

    pub fn cell_areas(&self) -> Vec<f64> {
        (0..self.n_sites()).map(|i| self.cell_area(i)).collect()
    }

    /// Triangle mesh over the sites. Sphere diagrams give a closed surface;
    /// disk diagrams the triangles among the original sites.
    pub fn delaunay_dual(&self) -> Result<TriMesh> {
        TriMesh::new(self.sites.clone(), self.triangles.clone())
    }
}

/// Signed area of the spherical triangle `abc` on the unit sphere.
pub fn spherical_triangle_area(a: &Vector3<f64>, b: &Vector3<f64>, c: &Vector3<f64>) -> f64 {
    2.0 * a.dot(&b.cross(c)).atan2(1.0 + a.dot(b) + b.dot(c) + c.dot(a))
}

fn triangulate(points: &[Point2<f64>]) -> Result<DelaunayTriangulation<Point2<f64>>> {
    let dt = DelaunayTriangulation::<Point2<f64>>::bulk_load_stable(points.to_vec())
        .map_err(|e| Error::InvalidArgument(format!("Delaunay triangulation failed: {e:?}")))?;
    if dt.num_vertices() < points.len() {
        return Err(Error::InvalidArgument("duplicate sites".into()));
    }
    if dt.all_vertices_on_line() {
        return Err(Error::Topology("sites are collinear".into()));
    }
    Ok(dt)
}

/// For each vertex below `n`, its incident triangles in rotational order.
/// Triangles must be consistently oriented and the fans closed.
fn fans(n: usize, triangles: &[[usize; 3]]) -> Result<Vec<Vec<usize>>> {
    let mut by_edge: HashMap<(usize, usize), usize> = HashMap::with_capacity(3 * triangles.len());
    let mut start = vec![usize::MAX; n];
    for (t, tri) in triangles.iter().enumerate() {
        for k in 0..3 {
            by_edge.insert((tri[k], tri[(k + 1) % 3]), t);
            if tri[k] < n {
                start[tri[k]] = t;
            }
        }
    }
    (0..n)
        .map(|v| {
            if start[v] == usize::MAX {
                return Err(Error::Topology(format!("site {v} is not in the triangulation")));
            }
            let mut fan = vec![start[v]];
            loop {
                let tri = triangles[*fan.last().expect("non-empty")];
                let k = tri.iter().position(|&x| x == v).expect("vertex in its triangle");
                // (v, a, b) → next triangle holds the directed edge (v, b)
                let b = tri[(k + 2) % 3];
                let next = *by_edge.get(&(v, b)).ok_or_else(|| Error::Topology(format!("open fan at site {v}")))?;
                if next == fan[0] {
                    break;
                }
                if fan.len() > triangles.len() {
                    return Err(Error::Topology(format!("fan at site {v} does not close")));
                }
                fan.push(next);
            }
            Ok(fan)
        })
        .collect()
}

fn adjacency(triangles: &[[usize; 3]], n: usize) -> Vec<(usize, usize)> {
    let mut e: Vec<(usize, usize)> = triangles
        .iter()
        .flat_map(|t| (0..3).map(move |k| (t[k].min(t[(k + 1) % 3]), t[k].max(t[(k + 1) % 3]))))
        .filter(|&(a, b)| a < n && b < n)
        .collect();
    e.sort_unstable();
    e.dedup();
    e
}

/// Spherical Delaunay triangulation and Voronoi diagram. The sites are
/// stereographically projected from site 0, which preserves empty circles;
/// the planar triangulation is closed by joining site 0 to the hull.
pub fn voronoi_sphere(points: &[Vector3<f64>]) -> Result<VoronoiDiagram> {
    if points.len() < 4 {
        return Err(Error::InvalidArgument("a spherical diagram needs at least 4 sites".into()));
    }
    if points.iter().any(|p| !p.iter().all(|x| x.is_finite()) || (p.norm() - 1.0).abs() > 1e-9) {
        return Err(Error::InvalidArgument("sphere sites must be unit vectors".into()));
    }
    let pole = points[0];
    let e1 = pole.cross(&if pole.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() }).normalize();
    let e2 = pole.cross(&e1);
    let mut planar = Vec::with_capacity(points.len() - 1);
    for (i, p) in points.iter().enumerate().skip(1) {
        let d = 1.0 - p.dot(&pole);
        if d < 1e-24 {
            return Err(Error::InvalidArgument(format!("site {i} duplicates site 0")));
        }
        planar.push(Point2::new(p.dot(&e1) / d, p.dot(&e2) / d));
    }
    let dt = triangulate(&planar)?;
    let mut triangles: Vec<[usize; 3]> =
        dt.inner_faces().map(|f| f.vertices().map(|v| v.fix().index() + 1)).collect();
    for e in dt.convex_hull() {
        triangles.push([0, e.from().fix().index() + 1, e.to().fix().index() + 1]);
    }
    // outward orientation
    for t in &mut triangles {
        let [a, b, c] = t.map(|i| points[i]);
        if (b - a).cross(&(c - a)).dot(&(a + b + c)) < 0.0 {
            t.swap(1, 2);
        }
    }
    let centers: Vec<Vector3<f64>> = triangles
        .iter()
        .map(|t| {
            let [a, b, c] = t.map(|i| points[i]);
            let n = (b - a).cross(&(c - a));
            if n.norm() == 0.0 {
                Err(Error::Topology("degenerate hull".into()))
            } else {
                Ok(n.normalize())
            }
        })
        .collect::<Result<_>>()?;
    let cells = fans(points.len(), &triangles)?.into_iter().map(|f| f.iter().map(|&t| centers[t]).collect()).collect();
    Ok(VoronoiDiagram {
        kind: DomainKind::Sphere,
        sites: points.to_vec(),
        cells,
        adjacency: adjacency(&triangles, points.len()),
        triangles,
    })
}

/// Reflection width `2√(π/n)`: twice the mean spacing of `n` sites.
pub fn default_epsilon(n: usize) -> f64 {
    2.0 * (std::f64::consts::PI / n.max(1) as f64).sqrt()
}

/// Voronoi diagram of points in the open unit disk. Sites within `epsilon`
/// of the circle are mirrored by inversion so that the cells near the
/// boundary are bounded, four far-away guards bound the rest, and each
/// original cell is clipped to the disk. Because every disk point is nearer
/// to a site than to its mirror, the clipped cells tile the disk exactly.
pub fn voronoi_disk_constrained(points: &[Vector3<f64>], epsilon: f64) -> Result<VoronoiDiagram> {
    let n = points.len();
    if n == 0 {
        return Err(Error::EmptyPointSet);
    }
    if points.iter().any(|p| !(p.xy().norm() < 1.0) || p.z != 0.0) {
        return Err(Error::InvalidArgument("disk sites must lie in the open unit disk".into()));
    }
    let mut planar: Vec<Point2<f64>> = points.iter().map(|p| Point2::new(p.x, p.y)).collect();
    let mut far: f64 = 2.0;
    for p in points {
        let r2 = p.xy().norm_squared();
        if r2.sqrt() > 1.0 - epsilon && r2 > 1e-12 {
            planar.push(Point2::new(p.x / r2, p.y / r2));
            far = far.max(1.0 / r2.sqrt());
        }
    }
    let g = 8.0 * far;
    planar.extend([Point2::new(-g, -g), Point2::new(g, -g), Point2::new(g, g), Point2::new(-g, g)]);
    let dt = triangulate(&planar)?;
    let all: Vec<[usize; 3]> = dt.inner_faces().map(|f| f.vertices().map(|v| v.fix().index())).collect();
    let centers: Vec<Vector2<f64>> = dt
        .inner_faces()
        .map(|f| {
            let c = f.circumcenter();
            Vector2::new(c.x, c.y)
        })
        .collect();
    let cells = fans(n, &all)?
        .into_iter()
        .zip(points)
        .map(|(fan, p)| {
            let poly: Vec<Vector2<f64>> = fan.iter().map(|&t| centers[t]).collect();
            let clipped = clip_to_disk(&poly, &p.xy());
            clipped.into_iter().map(|q| Vector3::new(q.x, q.y, 0.0)).collect()
        })
        .collect();
    let triangles: Vec<[usize; 3]> = all.into_iter().filter(|t| t.iter().all(|&i| i < n)).collect();
    Ok(VoronoiDiagram {
        kind: DomainKind::Disk,
        sites: points.to_vec(),
        cells,
        adjacency: adjacency(&triangles, n),
        triangles,
    })
}

fn arc(from: f64, to: f64, out: &mut Vec<Vector2<f64>>) {
    let mut sweep = (to - from).rem_euclid(std::f64::consts::TAU);
    if sweep == 0.0 {
        sweep = std::f64::consts::TAU;
    }
    let pieces = (sweep / ARC_STEP).ceil() as usize;
    for k in 1..pieces {
        let a = from + sweep * k as f64 / pieces as f64;
        out.push(Vector2::new(a.cos(), a.sin()));
    }
}

/// Intersection of a convex counter-clockwise polygon with the unit disk;
/// `inside` is any point of the polygon within the disk.
pub fn clip_to_disk(poly: &[Vector2<f64>], inside: &Vector2<f64>) -> Vec<Vector2<f64>> {
    let n = poly.len();
    // (point, leaves the disk here)
    let mut walk: Vec<(Vector2<f64>, bool)> = Vec::new();
    for k in 0..n {
        let (p, q) = (poly[k], poly[(k + 1) % n]);
        if p.norm_squared() <= 1.0 {
            walk.push((p, false));
        }
        let d = q - p;
        let (a, b, c) = (d.norm_squared(), 2.0 * p.dot(&d), p.norm_squared() - 1.0);
        let disc = b * b - 4.0 * a * c;
        if a == 0.0 || disc <= 0.0 {
            continue;
        }
        let s = disc.sqrt();
        for t in [(-b - s) / (2.0 * a), (-b + s) / (2.0 * a)] {
            if t > 0.0 && t < 1.0 {
                let x = p + d * t;
                // leaving when the distance to the centre grows through 1
                walk.push((x / x.norm(), (p + d * (t + 1e-9)).norm_squared() > (p + d * (t - 1e-9)).norm_squared()));
            }
        }
    }
    if walk.is_empty() {
        let contains = (0..n).all(|k| {
            let (p, q) = (poly[k], poly[(k + 1) % n]);
            (q - p).perp(&(inside - p)) >= 0.0
        });
        let mut out = Vec::new();
        if contains {
            out.push(Vector2::new(1.0, 0.0));
            arc(0.0, 0.0, &mut out);
        }
        return out;
    }
    let m = walk.len();
    let mut out = Vec::with_capacity(m);
    for k in 0..m {
        let (p, leaves) = walk[k];
        out.push(p);
        if leaves {
            let next = walk[(k + 1) % m].0;
            arc(p.y.atan2(p.x), next.y.atan2(next.x), &mut out);
        }
    }
    out
}

pub fn voronoi(kind: DomainKind, points: &[Vector3<f64>]) -> Result<VoronoiDiagram> {
    match kind {
        DomainKind::Sphere => voronoi_sphere(points),
        DomainKind::Disk => voronoi_disk_constrained(points, default_epsilon(points.len())),
    }
}
