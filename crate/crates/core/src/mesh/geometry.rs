use std::num::NonZero;

use kiddo::{ImmutableKdTree, SquaredEuclidean};
use nalgebra::Vector3;

use super::TriMesh;
use crate::error::{Error, Result};
use crate::sparse::SparseRealMatrix;

/// Relative threshold below which a face counts as degenerate.
const DEGENERATE_REL: f64 = 1e-14;

fn raw_area_normal(t: &[Vector3<f64>; 3]) -> Vector3<f64> {
    (t[1] - t[0]).cross(&(t[2] - t[0]))
}

fn check_face(t: &[Vector3<f64>; 3], f: usize) -> Result<Vector3<f64>> {
    let n = raw_area_normal(t);
    let scale = (t[1] - t[0]).norm_squared().max((t[2] - t[0]).norm_squared()).max((t[2] - t[1]).norm_squared());
    if !(n.norm() > DEGENERATE_REL * scale) {
        return Err(Error::DegenerateFace(f));
    }
    Ok(n)
}

pub fn face_area(mesh: &TriMesh, f: usize) -> Result<f64> {
    Ok(0.5 * check_face(&mesh.triangle(f), f)?.norm())
}

pub fn face_normal(mesh: &TriMesh, f: usize) -> Result<Vector3<f64>> {
    Ok(check_face(&mesh.triangle(f), f)?.normalize())
}

pub fn face_areas(mesh: &TriMesh) -> Result<Vec<f64>> {
    (0..mesh.n_faces()).map(|f| face_area(mesh, f)).collect()
}

pub fn face_normals(mesh: &TriMesh) -> Result<Vec<Vector3<f64>>> {
    (0..mesh.n_faces()).map(|f| face_normal(mesh, f)).collect()
}

pub fn total_area(mesh: &TriMesh) -> f64 {
    (0..mesh.n_faces()).map(|f| 0.5 * raw_area_normal(&mesh.triangle(f)).norm()).sum()
}

/// One third of the incident face areas.
pub fn vertex_areas(mesh: &TriMesh) -> Result<Vec<f64>> {
    let fa = face_areas(mesh)?;
    let mut va = vec![0.0; mesh.n_vertices()];
    for (t, a) in mesh.faces().iter().zip(&fa) {
        for &v in t {
            va[v] += a / 3.0;
        }
    }
    Ok(va)
}

pub fn vertex_area(mesh: &TriMesh, v: usize) -> Result<f64> {
    let mut a = 0.0;
    for (f, t) in mesh.faces().iter().enumerate() {
        if t.contains(&v) {
            a += face_area(mesh, f)? / 3.0;
        }
    }
    Ok(a)
}

pub fn barycenter(mesh: &TriMesh, f: usize) -> Vector3<f64> {
    let t = mesh.triangle(f);
    (t[0] + t[1] + t[2]) / 3.0
}

pub fn barycenters(mesh: &TriMesh) -> Vec<Vector3<f64>> {
    (0..mesh.n_faces()).map(|f| barycenter(mesh, f)).collect()
}

pub fn max_edge_length(mesh: &TriMesh) -> f64 {
    (0..mesh.n_edges()).map(|e| mesh.edge_vector(e).norm()).fold(0.0, f64::max)
}

pub fn mean_edge_length(mesh: &TriMesh) -> f64 {
    let n = mesh.n_edges().max(1);
    (0..mesh.n_edges()).map(|e| mesh.edge_vector(e).norm()).sum::<f64>() / n as f64
}

/// Diagonal of the axis-aligned bounding box.
pub fn diameter(mesh: &TriMesh) -> f64 {
    diameter_of(mesh.positions())
}

pub fn diameter_of(points: &[Vector3<f64>]) -> f64 {
    let mut lo = Vector3::repeat(f64::INFINITY);
    let mut hi = Vector3::repeat(f64::NEG_INFINITY);
    for p in points {
        lo = lo.inf(p);
        hi = hi.sup(p);
    }
    if points.is_empty() {
        0.0
    } else {
        (hi - lo).norm()
    }
}

/// Area-weighted centroid of the surface.
pub fn area_centroid(mesh: &TriMesh) -> Vector3<f64> {
    let mut c = Vector3::zeros();
    let mut w = 0.0;
    for f in 0..mesh.n_faces() {
        let a = 0.5 * raw_area_normal(&mesh.triangle(f)).norm();
        c += barycenter(mesh, f) * a;
        w += a;
    }
    if w > 0.0 {
        c / w
    } else {
        Vector3::zeros()
    }
}

/// Rescales to unit total area and moves the area centroid to the origin.
pub fn normalize_unit_area(mesh: &TriMesh) -> TriMesh {
    let c = area_centroid(mesh);
    let s = 1.0 / total_area(mesh).sqrt();
    mesh.with_positions(mesh.positions().iter().map(|p| (p - c) * s).collect())
}

/// Signed bending angle across an interior edge; positive where convex for
/// outward normals.
pub fn dihedral_angle(mesh: &TriMesh, e: usize) -> Result<f64> {
    let (s, c) = dihedral_sin_cos(mesh, e)?;
    Ok(s.atan2(c))
}

fn dihedral_sin_cos(mesh: &TriMesh, e: usize) -> Result<(f64, f64)> {
    let edge = mesh.edges()[e];
    let j = edge.twin.ok_or(Error::BoundaryEdge(e))?;
    let ni = face_normal(mesh, edge.face)?;
    let nj = face_normal(mesh, j)?;
    let dir = mesh.edge_vector(e).normalize();
    Ok((ni.cross(&nj).dot(&dir), ni.dot(&nj)))
}

/// `½ |e| tan(θ/2)`.
pub fn integrated_mean_curvature(mesh: &TriMesh, e: usize) -> Result<f64> {
    let (s, c) = dihedral_sin_cos(mesh, e)?;
    if 1.0 + c <= 1e-12 {
        return Err(Error::FoldedEdge(e));
    }
    Ok(0.5 * mesh.edge_vector(e).norm() * s / (1.0 + c))
}

/// Per-edge `H_e`, zero on boundary edges.
pub fn edge_mean_curvatures(mesh: &TriMesh) -> Result<Vec<f64>> {
    (0..mesh.n_edges())
        .map(|e| if mesh.edges()[e].is_boundary() { Ok(0.0) } else { integrated_mean_curvature(mesh, e) })
        .collect()
}

/// `h_i = Σ_j H_ij / √A_i` over the interior edges of each face.
pub fn mean_curvature_half_density(mesh: &TriMesh) -> Result<Vec<f64>> {
    let he = edge_mean_curvatures(mesh)?;
    let areas = face_areas(mesh)?;
    Ok(mesh
        .topology()
        .face_edges
        .iter()
        .zip(&areas)
        .map(|(fe, a)| fe.iter().map(|&e| he[e]).sum::<f64>() / a.sqrt())
        .collect())
}

pub fn willmore(mesh: &TriMesh) -> Result<f64> {
    Ok(mean_curvature_half_density(mesh)?.iter().map(|h| h * h).sum())
}

pub fn relative_willmore(a: &TriMesh, b: &TriMesh) -> Result<f64> {
    if a.faces() != b.faces() {
        return Err(Error::ConnectivityMismatch);
    }
    let ha = mean_curvature_half_density(a)?;
    let hb = mean_curvature_half_density(b)?;
    Ok(relative_willmore_fields(&ha, &hb))
}

pub fn relative_willmore_fields(ha: &[f64], hb: &[f64]) -> f64 {
    ha.iter().zip(hb).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Diagonal `4|F| × 4|F|` matrix with each face area repeated four times.
pub fn mass_matrix(mesh: &TriMesh) -> Result<SparseRealMatrix> {
    let areas = face_areas(mesh)?;
    let d: Vec<f64> = areas.iter().flat_map(|&a| [a; 4]).collect();
    Ok(SparseRealMatrix::diagonal(&d))
}

/// Positive semidefinite `|V| × |V|` cotangent Laplacian (P1 stiffness).
pub fn cotan_laplacian(mesh: &TriMesh) -> Result<SparseRealMatrix> {
    let mut t = Vec::with_capacity(12 * mesh.n_faces());
    for (f, tri) in mesh.faces().iter().enumerate() {
        let p = mesh.triangle(f);
        let twice_area = check_face(&p, f)?.norm();
        for k in 0..3 {
            let (i, j) = (tri[(k + 1) % 3], tri[(k + 2) % 3]);
            let w = 0.5 * (p[(k + 1) % 3] - p[k]).dot(&(p[(k + 2) % 3] - p[k])) / twice_area;
            t.extend([(i, i, w), (j, j, w), (i, j, -w), (j, i, -w)]);
        }
    }
    Ok(SparseRealMatrix::from_triplets(mesh.n_vertices(), mesh.n_vertices(), &t))
}

/// Distance between the barycenters of the two faces on `e`.
pub fn dual_edge_length(mesh: &TriMesh, e: usize) -> Result<f64> {
    let edge = mesh.edges()[e];
    let j = edge.twin.ok_or(Error::BoundaryEdge(e))?;
    Ok((barycenter(mesh, edge.face) - barycenter(mesh, j)).norm())
}

/// Best rigid motion (rotation and translation, no scaling) taking `b` onto
/// `a` in the least-squares sense; returns the RMS point distance after it.
pub fn procrustes_rms(a: &[Vector3<f64>], b: &[Vector3<f64>]) -> f64 {
    assert_eq!(a.len(), b.len());
    let n = a.len().max(1) as f64;
    let ca = a.iter().sum::<Vector3<f64>>() / n;
    let cb = b.iter().sum::<Vector3<f64>>() / n;
    let mut h = nalgebra::Matrix3::<f64>::zeros();
    for (p, q) in a.iter().zip(b) {
        h += (q - cb) * (p - ca).transpose();
    }
    let svd = h.svd(true, true);
    let (u, vt) = (svd.u.unwrap(), svd.v_t.unwrap());
    let mut d = nalgebra::Matrix3::<f64>::identity();
    if (vt.transpose() * u.transpose()).determinant() < 0.0 {
        d[(2, 2)] = -1.0;
    }
    let r = vt.transpose() * d * u.transpose();
    let ss: f64 = a.iter().zip(b).map(|(p, q)| ((p - ca) - r * (q - cb)).norm_squared()).sum();
    (ss / n).sqrt()
}

/// Nearest-neighbour index over 3D points.
#[derive(Clone)]
pub struct PointIndex {
    tree: Option<std::sync::Arc<ImmutableKdTree<f64, 3>>>,
    len: usize,
}

impl PointIndex {
    pub fn new(points: &[Vector3<f64>]) -> Self {
        let pts: Vec<[f64; 3]> = points.iter().map(|p| [p.x, p.y, p.z]).collect();
        let tree = if pts.is_empty() {
            None
        } else {
            Some(std::sync::Arc::new(ImmutableKdTree::new_from_slice(&pts).expect("kd-tree construction")))
        };
        PointIndex { tree, len: points.len() }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// `(squared distance, index)` of the `k` nearest points, closest first;
    /// ties broken by index.
    pub fn nearest(&self, p: &Vector3<f64>, k: usize) -> Vec<(f64, usize)> {
        let k = k.min(self.len);
        let Some(tree) = self.tree.as_ref().filter(|_| k > 0) else {
            return Vec::new();
        };
        let mut out: Vec<(f64, usize)> = tree
            .query(&[p.x, p.y, p.z])
            .nearest_n::<SquaredEuclidean<f64>>(NonZero::new(k).unwrap())
            .execute()
            .into_iter()
            .map(|r| (r.distance, r.item as usize))
            .collect();
        out.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        out
    }

    pub fn nearest_one(&self, p: &Vector3<f64>) -> (f64, usize) {
        self.nearest(p, 1)[0]
    }
}

/// Mean nearest distance A→B plus mean nearest distance B→A.
pub fn chamfer(a: &[Vector3<f64>], b: &[Vector3<f64>]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyPointSet);
    }
    let one_way = |from: &[Vector3<f64>], to: &[Vector3<f64>]| {
        let idx = PointIndex::new(to);
        from.iter().map(|p| idx.nearest_one(p).0.sqrt()).sum::<f64>() / from.len() as f64
    };
    Ok(one_way(a, b) + one_way(b, a))
}
