use nalgebra::Vector3;
use num_complex::Complex64;

use crate::confmap::{disk_to_square, square_to_disk, DomainKind};
use crate::error::{Error, Result};
use crate::mesh::{shapes, PointIndex, TriMesh};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TangentFrame {
    pub center: Vector3<f64>,
    pub e1: Vector3<f64>,
    pub e2: Vector3<f64>,
}

/// Subdivided icosahedron with a square `g × g` sample lattice on the
/// tangent plane at every face barycenter, carried to the sphere by central
/// projection.
#[derive(Clone)]
pub struct SphericalDomain {
    pub subdivisions: usize,
    pub grid: usize,
    pub base: TriMesh,
    pub frames: Vec<TangentFrame>,
    /// Patches are `[−l, l]²`, large enough to hold every projected face.
    pub half_width: f64,
    centers: PointIndex,
}

impl SphericalDomain {
    pub fn new(subdivisions: usize, grid: usize) -> Result<Self> {
        if grid < 2 {
            return Err(Error::InvalidArgument("grid must be at least 2".into()));
        }
        if subdivisions > 8 {
            return Err(Error::InvalidArgument("at most 8 subdivisions".into()));
        }
        let base = shapes::icosphere(subdivisions);
        let mut frames = Vec::with_capacity(base.n_faces());
        let mut half_width: f64 = 0.0;
        for f in 0..base.n_faces() {
            let t = base.triangle(f);
            let center = ((t[0] + t[1] + t[2]) / 3.0).normalize();
            let e1 = (t[0] / t[0].dot(&center) - center).normalize();
            let e2 = center.cross(&e1);
            let fr = TangentFrame { center, e1, e2 };
            for v in &t {
                let (x, y) = gnomonic(&fr, v).expect("face vertex in front of its tangent plane");
                half_width = half_width.max(x.abs()).max(y.abs());
            }
            frames.push(fr);
        }
        let centers = PointIndex::new(&frames.iter().map(|f| f.center).collect::<Vec<_>>());
        Ok(SphericalDomain { subdivisions, grid, base, frames, half_width, centers })
    }

    pub fn n_faces(&self) -> usize {
        self.frames.len()
    }

    /// Patch coordinate of lattice index `i` (cell centred).
    pub fn lattice(&self, i: usize) -> f64 {
        let l = self.half_width;
        -l + (i as f64 + 0.5) * 2.0 * l / self.grid as f64
    }

    /// Sample in column `i` (along `e1`) and row `j` (along `e2`) of face `f`.
    pub fn sample(&self, f: usize, i: usize, j: usize) -> Vector3<f64> {
        let fr = &self.frames[f];
        (fr.center + fr.e1 * self.lattice(i) + fr.e2 * self.lattice(j)).normalize()
    }

    /// All samples, ordered face, row, column.
    pub fn samples(&self) -> Vec<Vector3<f64>> {
        let g = self.grid;
        let mut out = Vec::with_capacity(self.n_faces() * g * g);
        for f in 0..self.n_faces() {
            for j in 0..g {
                for i in 0..g {
                    out.push(self.sample(f, i, j));
                }
            }
        }
        out
    }

    /// Domain face whose spherical triangle contains `p`.
    pub fn containing_face(&self, p: &Vector3<f64>) -> usize {
        let near = self.centers.nearest(p, 6.min(self.n_faces()));
        for &(_, f) in &near {
            let t = self.base.triangle(f);
            let inside = (0..3).all(|k| t[k].cross(&t[(k + 1) % 3]).dot(p) >= -1e-15);
            if inside {
                return f;
            }
        }
        near[0].1
    }

    pub fn gnomonic(&self, f: usize, p: &Vector3<f64>) -> Option<(f64, f64)> {
        gnomonic(&self.frames[f], p)
    }

    /// Continuous lattice index of patch coordinate `x`.
    pub fn lattice_index(&self, x: f64) -> f64 {
        (x + self.half_width) / (2.0 * self.half_width) * self.grid as f64 - 0.5
    }
}

fn gnomonic(fr: &TangentFrame, p: &Vector3<f64>) -> Option<(f64, f64)> {
    let d = p.dot(&fr.center);
    if !(d > 1e-12) {
        return None;
    }
    let q = p / d - fr.center;
    Some((q.dot(&fr.e1), q.dot(&fr.e2)))
}

/// `n × n` cell-centred lattice on `[−1, 1]²`, pulled back to the unit disk
/// through the disk-to-square map.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DiskDomain {
    pub resolution: usize,
}

impl DiskDomain {
    pub fn new(resolution: usize) -> Result<Self> {
        if resolution < 2 {
            return Err(Error::InvalidArgument("disk grid must be at least 2".into()));
        }
        Ok(DiskDomain { resolution })
    }

    pub fn lattice(&self, i: usize) -> f64 {
        -1.0 + (i as f64 + 0.5) * 2.0 / self.resolution as f64
    }

    pub fn lattice_index(&self, x: f64) -> f64 {
        (x + 1.0) / 2.0 * self.resolution as f64 - 0.5
    }

    /// Disk preimages of all lattice points, row-major, and a mask of the
    /// points where the inverse map failed (their position is the nearest
    /// successful one).
    pub fn samples(&self) -> (Vec<Vector3<f64>>, Vec<bool>) {
        let n = self.resolution;
        let mut pts = vec![None; n * n];
        for j in 0..n {
            for i in 0..n {
                let w = Complex64::new(self.lattice(i), self.lattice(j));
                pts[j * n + i] = square_to_disk(w).ok().map(|z| Vector3::new(z.re, z.im, 0.0));
            }
        }
        let masked: Vec<bool> = pts.iter().map(|p| p.is_none()).collect();
        let good: Vec<Vector3<f64>> = pts.iter().flatten().copied().collect();
        let index = PointIndex::new(&good);
        let filled = (0..n * n)
            .map(|s| {
                pts[s].unwrap_or_else(|| {
                    let w = Vector3::new(self.lattice(s % n), self.lattice(s / n), 0.0);
                    let near = index.nearest_one(&w);
                    good[near.1]
                })
            })
            .collect();
        (filled, masked)
    }

    /// Position of a disk point on the lattice plane.
    pub fn to_square(&self, p: &Vector3<f64>) -> Vector3<f64> {
        let w = disk_to_square(Complex64::new(p.x, p.y));
        Vector3::new(w.re, w.im, 0.0)
    }
}

#[derive(Clone)]
pub enum Domain {
    Sphere(SphericalDomain),
    Disk(DiskDomain),
}

impl Domain {
    pub fn kind(&self) -> DomainKind {
        match self {
            Domain::Sphere(_) => DomainKind::Sphere,
            Domain::Disk(_) => DomainKind::Disk,
        }
    }

    /// Tensor dimensions, channels last.
    pub fn dims(&self) -> Vec<usize> {
        match self {
            Domain::Sphere(s) => vec![s.n_faces(), s.grid, s.grid, 2],
            Domain::Disk(d) => vec![d.resolution, d.resolution, 2],
        }
    }

    pub fn n_samples(&self) -> usize {
        self.dims()[..self.dims().len() - 1].iter().product()
    }

    /// Recovers the domain from tensor dimensions.
    pub fn from_dims(kind: DomainKind, dims: &[usize]) -> Result<Self> {
        match (kind, dims) {
            (DomainKind::Sphere, &[f, g, g2, 2]) if g == g2 => {
                let mut k = 0;
                while 20 * 4usize.pow(k as u32) < f && k < 8 {
                    k += 1;
                }
                if 20 * 4usize.pow(k as u32) != f {
                    return Err(Error::DimMismatch(format!("{f} is not a subdivided icosahedron face count")));
                }
                Ok(Domain::Sphere(SphericalDomain::new(k, g)?))
            }
            (DomainKind::Disk, &[n, n2, 2]) if n == n2 => Ok(Domain::Disk(DiskDomain::new(n)?)),
            _ => Err(Error::DimMismatch(format!("dimensions {dims:?} do not describe a {kind:?} domain"))),
        }
    }

    /// Reasonably fine triangulation of the domain used to draw samples.
    pub fn sampling_mesh(&self) -> TriMesh {
        match self {
            Domain::Sphere(s) => shapes::icosphere(s.subdivisions.max(4)),
            Domain::Disk(_) => shapes::flat_disk(24),
        }
    }

    pub fn area(&self) -> f64 {
        match self {
            Domain::Sphere(_) => 4.0 * std::f64::consts::PI,
            Domain::Disk(_) => std::f64::consts::PI,
        }
    }

    pub fn contains(&self, p: &Vector3<f64>) -> bool {
        match self {
            Domain::Sphere(_) => (p.norm() - 1.0).abs() < 1e-9,
            Domain::Disk(_) => p.z == 0.0 && p.norm() <= 1.0 + 1e-9,
        }
    }
}

/// Closest domain point (projection onto the sphere or into the disk).
pub fn project_to_domain(kind: DomainKind, p: &Vector3<f64>) -> Vector3<f64> {
    match kind {
        DomainKind::Sphere => p.normalize(),
        DomainKind::Disk => {
            let q = Vector3::new(p.x, p.y, 0.0);
            if q.norm() > 1.0 {
                q / q.norm()
            } else {
                q
            }
        }
    }
}
