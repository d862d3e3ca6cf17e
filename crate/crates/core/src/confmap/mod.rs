//! Conformal maps of disk-like and genus-0 meshes onto the unit disk and the
//! unit sphere, Möbius alignment, and the disk-to-square map.
//!
//! Disk meshes get a cotangent-harmonic map with the boundary loop spread
//! over the unit circle by arc length. Spheres are found by conformalized
//! mean curvature flow: the cotangent Laplacian of the input is kept fixed
//! while the mass matrix follows the flow.

mod mobius;
mod square;

use nalgebra::{Matrix2, Vector2, Vector3};

use crate::error::{Error, Result};
use crate::mesh::{self, MeshKind, TriMesh};
use crate::sparse::{Cholesky, SparseRealMatrix};

pub use mobius::*;
pub use square::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DomainKind {
    Disk,
    Sphere,
}

/// A mesh together with one parameter-domain point per vertex. Disk points
/// are stored with `z = 0`.
#[derive(Clone, Debug)]
pub struct Parameterization {
    pub kind: DomainKind,
    pub points: Vec<Vector3<f64>>,
    pub source: TriMesh,
}

impl Parameterization {
    /// The source connectivity laid out on the domain.
    pub fn param_mesh(&self) -> TriMesh {
        self.source.with_positions(self.points.clone())
    }

    pub fn with_points(&self, points: Vec<Vector3<f64>>) -> Self {
        Parameterization { kind: self.kind, points, source: self.source.clone() }
    }

    /// Per-face ratio of the larger to the smaller singular value of the
    /// linear map from source triangle to parameter triangle (1 = conformal).
    pub fn face_distortion(&self) -> Result<Vec<f64>> {
        let pm = self.param_mesh();
        (0..self.source.n_faces())
            .map(|f| {
                let s = local_frame(&self.source.triangle(f)).ok_or(Error::DegenerateFace(f))?;
                let t = local_frame(&pm.triangle(f)).ok_or(Error::DegenerateFace(f))?;
                let j = t * s.try_inverse().ok_or(Error::DegenerateFace(f))?;
                let sv = j.singular_values();
                let (hi, lo) = (sv[0].max(sv[1]), sv[0].min(sv[1]));
                if !(lo > 0.0) {
                    return Err(Error::DegenerateFace(f));
                }
                Ok(hi / lo)
            })
            .collect()
    }

    pub fn mean_distortion(&self) -> Result<f64> {
        let d = self.face_distortion()?;
        Ok(d.iter().sum::<f64>() / d.len().max(1) as f64)
    }

    /// Faces whose orientation in the domain disagrees with the majority
    /// (disk) or with the outward normal (sphere).
    pub fn flipped_faces(&self) -> usize {
        let pm = self.param_mesh();
        let signs: Vec<f64> = (0..pm.n_faces())
            .map(|f| {
                let [a, b, c] = pm.triangle(f);
                match self.kind {
                    DomainKind::Disk => (b - a).cross(&(c - a)).z,
                    DomainKind::Sphere => a.dot(&b.cross(&c)),
                }
            })
            .collect();
        let expected = match self.kind {
            DomainKind::Disk => signs.iter().sum::<f64>().signum(),
            DomainKind::Sphere => 1.0,
        };
        signs.iter().filter(|&&s| !(s * expected > 0.0)).count()
    }

    pub fn check_flips(&self) -> Result<()> {
        match self.flipped_faces() {
            0 => Ok(()),
            n => Err(Error::Flip(n)),
        }
    }
}

// Edge vectors p1 − p0, p2 − p0 in an orthonormal frame of the triangle.
fn local_frame(p: &[Vector3<f64>; 3]) -> Option<Matrix2<f64>> {
    let e1 = p[1] - p[0];
    let e2 = p[2] - p[0];
    let n = e1.cross(&e2);
    if !(n.norm() > 1e-300) || !(e1.norm() > 0.0) {
        return None;
    }
    let x = e1.normalize();
    let y = n.normalize().cross(&x);
    Some(Matrix2::from_columns(&[Vector2::new(e1.dot(&x), 0.0), Vector2::new(e2.dot(&x), e2.dot(&y))]))
}

/// Harmonic map onto the unit disk with an arc-length boundary.
pub fn disk_parameterize(mesh: &TriMesh) -> Result<Parameterization> {
    mesh.require_kind(MeshKind::Disk)?;
    let boundary = &mesh.topology().boundary_loops[0];
    let nv = mesh.n_vertices();
    let mut lengths = Vec::with_capacity(boundary.len());
    for k in 0..boundary.len() {
        let (a, b) = (boundary[k], boundary[(k + 1) % boundary.len()]);
        lengths.push((mesh.positions()[b] - mesh.positions()[a]).norm());
    }
    let perimeter: f64 = lengths.iter().sum();
    if !(perimeter > 0.0) {
        return Err(Error::Topology("boundary has zero length".into()));
    }

    let mut pts = vec![Vector3::zeros(); nv];
    let mut on_boundary = vec![false; nv];
    let mut s = 0.0;
    for (k, &v) in boundary.iter().enumerate() {
        let th = std::f64::consts::TAU * s / perimeter;
        pts[v] = Vector3::new(th.cos(), th.sin(), 0.0);
        on_boundary[v] = true;
        s += lengths[k];
    }

    let interior: Vec<usize> = (0..nv).filter(|&v| !on_boundary[v]).collect();
    if !interior.is_empty() {
        let l = mesh::cotan_laplacian(mesh)?;
        let keep: Vec<bool> = on_boundary.iter().map(|b| !b).collect();
        let chol = Cholesky::factor(&l.submatrix(&keep))?;
        let mut slot = vec![usize::MAX; nv];
        for (k, &v) in interior.iter().enumerate() {
            slot[v] = k;
        }
        let mut rhs = [vec![0.0; interior.len()], vec![0.0; interior.len()]];
        for (r, c, w) in l.triplets() {
            if !on_boundary[r] && on_boundary[c] {
                rhs[0][slot[r]] -= w * pts[c].x;
                rhs[1][slot[r]] -= w * pts[c].y;
            }
        }
        let sol = chol.solve_many(&[&rhs[0], &rhs[1]]);
        for (k, &v) in interior.iter().enumerate() {
            pts[v] = Vector3::new(sol[0][k], sol[1][k], 0.0);
        }
    }

    let param = Parameterization { kind: DomainKind::Disk, points: pts, source: mesh.clone() };
    param.check_flips()?;
    Ok(param)
}

#[derive(Clone, Copy, Debug)]
pub struct FlowOptions {
    /// Implicit step, relative to a unit-area surface.
    pub step: f64,
    /// Stop once every vertex is within this of the mean radius (relative).
    pub tolerance: f64,
    /// The discrete flow has a fixed point that is round only up to
    /// discretization error, and drifts away from it if run on. Stop after
    /// this many steps without a new roundest iterate, and accept that
    /// iterate if its deviation is below `accept`.
    pub patience: usize,
    pub accept: f64,
    pub max_iterations: usize,
}

impl Default for FlowOptions {
    fn default() -> Self {
        FlowOptions { step: 1e-2, tolerance: 1e-3, patience: 50, accept: 5e-2, max_iterations: 1000 }
    }
}

pub fn sphere_parameterize(mesh: &TriMesh) -> Result<Parameterization> {
    sphere_parameterize_with(mesh, FlowOptions::default())
}

pub fn sphere_parameterize_with(mesh: &TriMesh, opts: FlowOptions) -> Result<Parameterization> {
    mesh.require_kind(MeshKind::Sphere)?;
    let mut cur = mesh::normalize_unit_area(mesh);
    let l0 = mesh::cotan_laplacian(&cur)?;
    let nv = mesh.n_vertices();
    let mut best = (radial_deviation(cur.positions()), cur.clone());
    let mut since_best = 0;
    let mut it = 0;
    while best.0 >= opts.tolerance && since_best < opts.patience && it < opts.max_iterations {
        it += 1;
        let va = mesh::vertex_areas(&cur)?;
        let m = SparseRealMatrix::diagonal(&va);
        let chol = Cholesky::factor(&m.add_scaled(&l0, opts.step))?;
        let rhs: Vec<Vec<f64>> = (0..3).map(|k| cur.positions().iter().zip(&va).map(|(p, a)| p[k] * a).collect()).collect();
        let sol = chol.solve_many(&[&rhs[0], &rhs[1], &rhs[2]]);
        let next: Vec<Vector3<f64>> = (0..nv).map(|v| Vector3::new(sol[0][v], sol[1][v], sol[2][v])).collect();
        cur = mesh::normalize_unit_area(&cur.with_positions(next));
        let deviation = radial_deviation(cur.positions());
        if deviation < best.0 {
            best = (deviation, cur.clone());
            since_best = 0;
        } else {
            since_best += 1;
        }
    }
    if best.0 >= opts.tolerance.max(opts.accept) {
        return Err(Error::Convergence { iterations: it, residual: best.0 });
    }
    let cur = best.1;
    let points = cur.positions().iter().map(|p| p.normalize()).collect();
    let param = Parameterization { kind: DomainKind::Sphere, points, source: mesh.clone() };
    param.check_flips()?;
    Ok(param)
}

// max | |p| / r̄ − 1 | about the origin.
fn radial_deviation(p: &[Vector3<f64>]) -> f64 {
    let r: Vec<f64> = p.iter().map(|x| x.norm()).collect();
    let mean = r.iter().sum::<f64>() / r.len().max(1) as f64;
    r.iter().map(|x| (x / mean - 1.0).abs()).fold(0.0, f64::max)
}
