//! Density-driven isotropic remeshing of the parameter domain: random
//! sampling, Lloyd relaxation towards a centroidal Voronoi tessellation, and
//! the dual Delaunay mesh.

mod voronoi;

use nalgebra::Vector3;
use rand::Rng;

use crate::codec::Domain;
use crate::confmap::DomainKind;
use crate::error::{Error, Result};
use crate::mesh::{self, TriMesh};

pub use voronoi::*;

/// Draws `⌊n_i⌋` points, plus one more with probability `frac(n_i)`, uniformly
/// in every triangle, with `n_i = density(barycenter) · area_i`.
pub fn sample_in_triangles<R: Rng>(
    triangles: &[[Vector3<f64>; 3]],
    areas: &[f64],
    density: impl Fn(&Vector3<f64>) -> f64,
    rng: &mut R,
) -> Result<Vec<Vector3<f64>>> {
    let mut out = Vec::new();
    for (t, &area) in triangles.iter().zip(areas) {
        let b = (t[0] + t[1] + t[2]) / 3.0;
        let d = density(&b);
        if !(d > 0.0 && d.is_finite()) {
            return Err(Error::InvalidArgument(format!("density must be positive, got {d}")));
        }
        let n = d * area;
        let mut count = n.floor() as usize;
        if rng.random::<f64>() < n.fract() {
            count += 1;
        }
        for _ in 0..count {
            let (r1, r2): (f64, f64) = (rng.random(), rng.random());
            let s = r1.sqrt();
            out.push(t[0] * (1.0 - s) + t[1] * (s * (1.0 - r2)) + t[2] * (s * r2));
        }
    }
    Ok(out)
}

/// Density-proportional random sites on a domain, drawn per face of its
/// sampling mesh (spherical face areas on the sphere).
pub fn sample_points<R: Rng>(domain: &Domain, density: impl Fn(&Vector3<f64>) -> f64, rng: &mut R) -> Result<Vec<Vector3<f64>>> {
    let sm = domain.sampling_mesh();
    let tris: Vec<[Vector3<f64>; 3]> = (0..sm.n_faces()).map(|f| sm.triangle(f)).collect();
    let pts = match domain.kind() {
        DomainKind::Sphere => {
            let areas: Vec<f64> = tris.iter().map(|t| spherical_triangle_area(&t[0], &t[1], &t[2])).collect();
            let on_sphere = |p: &Vector3<f64>| density(&p.normalize());
            sample_in_triangles(&tris, &areas, on_sphere, rng)?.into_iter().map(|p| p.normalize()).collect()
        }
        DomainKind::Disk => sample_in_triangles(&tris, &mesh::face_areas(&sm)?, density, rng)?,
    };
    if pts.is_empty() {
        return Err(Error::EmptyPointSet);
    }
    Ok(pts)
}

/// Centroid of a triangle under the linear density with corner values `d`,
/// and its mass.
pub fn triangle_centroid(v: &[Vector3<f64>; 3], d: [f64; 3]) -> (Vector3<f64>, f64) {
    let s = d[0] + d[1] + d[2];
    let c = (v[0] * (s + d[0]) + v[1] * (s + d[1]) + v[2] * (s + d[2])) / (4.0 * s);
    let area = 0.5 * (v[1] - v[0]).cross(&(v[2] - v[0])).norm();
    (c, s / 3.0 * area)
}

fn fan_centroid(tris: impl Iterator<Item = ([Vector3<f64>; 3], [f64; 3])>) -> Result<Vector3<f64>> {
    let (mut sum, mut mass) = (Vector3::zeros(), 0.0);
    for (v, d) in tris {
        let (c, m) = triangle_centroid(&v, d);
        sum += c * m;
        mass += m;
    }
    if !(mass > 0.0) {
        return Err(Error::InvalidArgument("zero weighted area".into()));
    }
    Ok(sum / mass)
}

/// Weighted centroid of a polygon with density given at its corners, by
/// fan triangulation from the first corner.
pub fn weighted_centroid(polygon: &[Vector3<f64>], density: &[f64]) -> Result<Vector3<f64>> {
    if polygon.len() < 3 || polygon.len() != density.len() {
        return Err(Error::InvalidArgument("polygon needs at least 3 corners with a density each".into()));
    }
    fan_centroid(
        (1..polygon.len() - 1)
            .map(|k| ([polygon[0], polygon[k], polygon[k + 1]], [density[0], density[k], density[k + 1]])),
    )
}

// Degree-5 seven-point rule on the triangle, barycentric coordinates.
fn radon7() -> [([f64; 3], f64); 7] {
    let r = 15f64.sqrt();
    let (a1, b1, w1) = ((6.0 - r) / 21.0, (9.0 + 2.0 * r) / 21.0, (155.0 - r) / 1200.0);
    let (a2, b2, w2) = ((6.0 + r) / 21.0, (9.0 - 2.0 * r) / 21.0, (155.0 + r) / 1200.0);
    [
        ([1.0 / 3.0; 3], 9.0 / 40.0),
        ([b1, a1, a1], w1),
        ([a1, b1, a1], w1),
        ([a1, a1, b1], w1),
        ([b2, a2, a2], w2),
        ([a2, b2, a2], w2),
        ([a2, a2, b2], w2),
    ]
}

/// `∫_T ρ |y − p|²` for linear `ρ`; exact (the integrand is cubic).
fn triangle_energy(v: &[Vector3<f64>; 3], d: [f64; 3], p: &Vector3<f64>) -> f64 {
    let area = 0.5 * (v[1] - v[0]).cross(&(v[2] - v[0])).norm();
    area * radon7()
        .iter()
        .map(|(l, w)| {
            let y = v[0] * l[0] + v[1] * l[1] + v[2] * l[2];
            let rho = d[0] * l[0] + d[1] * l[1] + d[2] * l[2];
            w * rho * (y - p).norm_squared()
        })
        .sum::<f64>()
}

// Each cell as a fan of triangles around its site, with density at the corners.
fn cell_fans<'a>(
    vd: &'a VoronoiDiagram,
    density: &'a dyn Fn(&Vector3<f64>) -> f64,
) -> impl Iterator<Item = Vec<([Vector3<f64>; 3], [f64; 3])>> + 'a {
    (0..vd.n_sites()).map(move |i| {
        let (s, c) = (vd.sites[i], &vd.cells[i]);
        let ds = density(&s);
        let dc: Vec<f64> = c.iter().map(density).collect();
        let n = c.len();
        (0..n).map(|k| ([s, c[k], c[(k + 1) % n]], [ds, dc[k], dc[(k + 1) % n]])).collect()
    })
}

/// `Σ_i ∫_{V_i} ρ |y − v_i|²`, with cells fanned from their sites and the
/// density interpolated linearly over each fan triangle.
pub fn cvt_energy(vd: &VoronoiDiagram, density: &dyn Fn(&Vector3<f64>) -> f64) -> f64 {
    cell_fans(vd, density)
        .zip(&vd.sites)
        .map(|(fan, s)| fan.iter().map(|(v, d)| triangle_energy(v, *d, s)).sum::<f64>())
        .sum()
}

/// Density-weighted centroid of every cell; sphere centroids are projected
/// back to the sphere.
pub fn centroids(vd: &VoronoiDiagram, density: &dyn Fn(&Vector3<f64>) -> f64) -> Result<Vec<Vector3<f64>>> {
    cell_fans(vd, density)
        .map(|fan| {
            let c = fan_centroid(fan.into_iter())?;
            Ok(match vd.kind {
                DomainKind::Sphere => c.normalize(),
                DomainKind::Disk => c,
            })
        })
        .collect()
}

/// Coefficient of variation of the cell areas.
pub fn area_variation(vd: &VoronoiDiagram) -> f64 {
    let a = vd.cell_areas();
    let n = a.len() as f64;
    let mean = a.iter().sum::<f64>() / n;
    (a.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt() / mean
}

#[derive(Clone, Copy, Debug)]
pub struct LloydOptions {
    pub max_iterations: usize,
    /// Stop once no site moves further than this.
    pub tolerance: f64,
}

impl Default for LloydOptions {
    fn default() -> Self {
        LloydOptions { max_iterations: 100, tolerance: 1e-5 }
    }
}

/// Per-iteration record; `energy` and `area_cv` have one more entry than
/// `displacement` (the final diagram).
#[derive(Clone, Debug, Default)]
pub struct LloydReport {
    pub iterations: usize,
    pub converged: bool,
    pub displacement: Vec<f64>,
    pub energy: Vec<f64>,
    pub area_cv: Vec<f64>,
    pub removed: usize,
}

/// Lloyd relaxation: repeatedly move every site to the weighted centroid of
/// its cell. Disk centroids outside the disk are dropped.
pub fn lloyd_relax(
    points: Vec<Vector3<f64>>,
    kind: DomainKind,
    density: &dyn Fn(&Vector3<f64>) -> f64,
    opts: LloydOptions,
) -> Result<(Vec<Vector3<f64>>, VoronoiDiagram, LloydReport)> {
    let mut report = LloydReport::default();
    let mut pts = points;
    let mut vd = voronoi(kind, &pts)?;
    loop {
        report.energy.push(cvt_energy(&vd, density));
        report.area_cv.push(area_variation(&vd));
        if report.converged || report.iterations == opts.max_iterations {
            break;
        }
        let mut next = centroids(&vd, density)?;
        let before = next.len();
        let moved = next.iter().zip(&pts).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        if kind == DomainKind::Disk {
            next.retain(|p| p.xy().norm() < 1.0);
        }
        report.removed += before - next.len();
        if next.is_empty() {
            return Err(Error::EmptyPointSet);
        }
        report.iterations += 1;
        report.displacement.push(moved);
        report.converged = moved < opts.tolerance;
        pts = next;
        vd = voronoi(kind, &pts)?;
    }
    Ok((pts, vd, report))
}

/// Sample, relax and triangulate: an isotropic parameter-domain mesh whose
/// vertex density follows `density`.
pub fn remesh_domain<R: Rng>(
    domain: &Domain,
    density: &dyn Fn(&Vector3<f64>) -> f64,
    opts: LloydOptions,
    rng: &mut R,
) -> Result<(TriMesh, LloydReport)> {
    let pts = sample_points(domain, density, rng)?;
    let (_, vd, report) = lloyd_relax(pts, domain.kind(), density, opts)?;
    let mesh = vd.delaunay_dual()?;
    let want = match domain.kind() {
        DomainKind::Sphere => mesh::MeshKind::Sphere,
        DomainKind::Disk => mesh::MeshKind::Disk,
    };
    mesh.require_kind(want)?;
    Ok((mesh, report))
}
