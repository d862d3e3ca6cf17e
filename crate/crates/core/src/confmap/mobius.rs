use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;

use super::{DomainKind, Parameterization};
use crate::error::{Error, Result};
use crate::mesh;

/// A point of the extended complex plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Extended {
    Finite(Complex64),
    Infinity,
}

impl Extended {
    pub fn real(x: f64) -> Self {
        Extended::Finite(Complex64::new(x, 0.0))
    }

    fn hom(self) -> [Complex64; 2] {
        match self {
            Extended::Finite(z) => [z, Complex64::new(1.0, 0.0)],
            Extended::Infinity => [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
        }
    }

    fn from_hom(h: [Complex64; 2]) -> Self {
        if h[1].norm() == 0.0 {
            Extended::Infinity
        } else {
            Extended::Finite(h[0] / h[1])
        }
    }
}

/// `z ↦ (az + b)/(cz + d)`, stored with `ad − bc = 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MobiusTransform {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl MobiusTransform {
    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Result<Self> {
        let det = a * d - b * c;
        let scale = a.norm().max(b.norm()).max(c.norm()).max(d.norm());
        if !(det.norm() > 1e-14 * scale * scale) {
            return Err(Error::InvalidArgument("singular Möbius transformation".into()));
        }
        let mut s = det.sqrt().inv();
        // fix the sign ambiguity of the square root
        if ((a + d) * s).re < 0.0 {
            s = -s;
        }
        Ok(MobiusTransform { a: a * s, b: b * s, c: c * s, d: d * s })
    }

    pub fn identity() -> Self {
        let (one, zero) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
        MobiusTransform { a: one, b: zero, c: zero, d: one }
    }

    /// `e^{iθ} (z − p)/(1 − p̄ z)` for `|p| < 1`.
    pub fn disk_automorphism(theta: f64, p: Complex64) -> Result<Self> {
        if !(p.norm() < 1.0) {
            return Err(Error::InvalidArgument("disk automorphism centre must lie inside the disk".into()));
        }
        let r = Complex64::from_polar(1.0, theta);
        Self::new(r, -r * p, -p.conj(), Complex64::new(1.0, 0.0))
    }

    fn apply_hom(&self, h: [Complex64; 2]) -> [Complex64; 2] {
        [self.a * h[0] + self.b * h[1], self.c * h[0] + self.d * h[1]]
    }

    pub fn apply(&self, z: Extended) -> Extended {
        Extended::from_hom(self.apply_hom(z.hom()))
    }

    pub fn apply_finite(&self, z: Complex64) -> Complex64 {
        (self.a * z + self.b) / (self.c * z + self.d)
    }

    /// The induced conformal map of the unit sphere, through stereographic
    /// projection from the north pole.
    pub fn apply_sphere(&self, p: &Vector3<f64>) -> Vector3<f64> {
        hom_to_sphere(self.apply_hom(sphere_to_hom(p)))
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Self {
        MobiusTransform {
            a: self.a * other.a + self.b * other.c,
            b: self.a * other.b + self.b * other.d,
            c: self.c * other.a + self.d * other.c,
            d: self.c * other.b + self.d * other.d,
        }
    }

    pub fn inverse(&self) -> Self {
        MobiusTransform { a: self.d, b: -self.b, c: -self.c, d: self.a }
    }

    /// Largest coefficient difference to the identity, up to the sign of
    /// the normalized matrix.
    pub fn distance_to_identity(&self) -> f64 {
        let one = Complex64::new(1.0, 0.0);
        let err = |s: f64| {
            (self.a - one * s).norm().max((self.d - one * s).norm()).max(self.b.norm()).max(self.c.norm())
        };
        err(1.0).min(err(-1.0))
    }

    /// Whether sampled points of the unit circle stay on it.
    pub fn preserves_unit_circle(&self) -> bool {
        (0..64).all(|k| {
            let z = Complex64::from_polar(1.0, std::f64::consts::TAU * k as f64 / 64.0);
            (self.apply_finite(z).norm() - 1.0).abs() < 1e-10
        })
    }
}

fn det(u: [Complex64; 2], v: [Complex64; 2]) -> Complex64 {
    u[0] * v[1] - u[1] * v[0]
}

// Homogeneous stereographic coordinate, picking the well-conditioned form.
fn sphere_to_hom(p: &Vector3<f64>) -> [Complex64; 2] {
    if p.z < 0.0 {
        [Complex64::new(p.x, p.y), Complex64::new(1.0 - p.z, 0.0)]
    } else {
        [Complex64::new(1.0 + p.z, 0.0), Complex64::new(p.x, -p.y)]
    }
}

fn hom_to_sphere(h: [Complex64; 2]) -> Vector3<f64> {
    let pq = h[0] * h[1].conj();
    let (np, nq) = (h[0].norm_sqr(), h[1].norm_sqr());
    Vector3::new(2.0 * pq.re, 2.0 * pq.im, np - nq) / (np + nq)
}

/// Projection from the north pole onto the plane `z = 0`; the north pole
/// itself goes to infinity.
pub fn stereographic(p: &Vector3<f64>) -> Extended {
    Extended::from_hom(sphere_to_hom(p))
}

pub fn inverse_stereographic(z: Extended) -> Vector3<f64> {
    hom_to_sphere(z.hom())
}

/// The transformation taking `z[k]` to `w[k]`, built from the cross ratios
/// that send each triple to `(0, 1, ∞)`.
pub fn mobius_from_3_points(z: [Extended; 3], w: [Extended; 3]) -> Result<MobiusTransform> {
    from_hom_triples(z.map(Extended::hom), w.map(Extended::hom))
}

fn to_standard(h: [[Complex64; 2]; 3]) -> Result<MobiusTransform> {
    for (i, j) in [(0, 1), (1, 2), (0, 2)] {
        let scale = (h[i][0].norm() + h[i][1].norm()) * (h[j][0].norm() + h[j][1].norm());
        if !(det(h[i], h[j]).norm() > 1e-12 * scale) {
            return Err(Error::InvalidArgument("Möbius points must be pairwise distinct".into()));
        }
    }
    let d23 = det(h[1], h[2]);
    let d21 = det(h[1], h[0]);
    MobiusTransform::new(h[0][1] * d23, -h[0][0] * d23, h[2][1] * d21, -h[2][0] * d21)
}

fn from_hom_triples(z: [[Complex64; 2]; 3], w: [[Complex64; 2]; 3]) -> Result<MobiusTransform> {
    Ok(to_standard(w)?.inverse().compose(&to_standard(z)?))
}

fn complex_of(p: &Vector3<f64>) -> Complex64 {
    Complex64::new(p.x, p.y)
}

// Centre `a` and rotation `e^{iθ}` of the aligning automorphism.
fn disk_alignment_parts(param: &Parameterization, u: usize, v: usize) -> Result<(Complex64, Complex64)> {
    if param.kind != DomainKind::Disk {
        return Err(Error::InvalidArgument("disk alignment needs a disk parameterization".into()));
    }
    let n = param.points.len();
    if u >= n || v >= n {
        return Err(Error::InvalidArgument("landmark out of range".into()));
    }
    let a = complex_of(&param.points[u]);
    if !(a.norm() < 1.0 - 1e-12) {
        return Err(Error::InvalidArgument(format!("landmark {u} is not interior to the disk")));
    }
    let b = complex_of(&param.points[v]);
    let w = (b - a) / (Complex64::new(1.0, 0.0) - a.conj() * b);
    if u == v || !(w.norm() > 1e-12) {
        return Err(Error::InvalidArgument("disk landmarks coincide".into()));
    }
    Ok((a, w.conj() / w.norm()))
}

/// The disk automorphism sending landmark `u` to 0 and `v` onto the
/// positive real axis.
pub fn disk_alignment(param: &Parameterization, u: usize, v: usize) -> Result<MobiusTransform> {
    let (a, rot) = disk_alignment_parts(param, u, v)?;
    MobiusTransform::disk_automorphism(rot.arg(), a)
}

pub fn disk_align(param: &Parameterization, u: usize, v: usize) -> Result<Parameterization> {
    // closed form rather than the normalized matrix, so that u lands on 0 exactly
    let (a, rot) = disk_alignment_parts(param, u, v)?;
    let one = Complex64::new(1.0, 0.0);
    let pts = param
        .points
        .iter()
        .map(|p| {
            let z = complex_of(p);
            let z = rot * (z - a) / (one - a.conj() * z);
            Vector3::new(z.re, z.im, 0.0)
        })
        .collect();
    Ok(param.with_points(pts))
}

/// Canonical images of the three sphere landmarks: south pole, `(1, 0, 0)`,
/// north pole (stereographic `0, 1, ∞`).
pub const SPHERE_TARGETS: [[f64; 3]; 3] = [[0.0, 0.0, -1.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]];

pub fn sphere_alignment(param: &Parameterization, landmarks: [usize; 3]) -> Result<MobiusTransform> {
    if param.kind != DomainKind::Sphere {
        return Err(Error::InvalidArgument("landmark alignment needs a sphere parameterization".into()));
    }
    if landmarks.iter().any(|&l| l >= param.points.len()) {
        return Err(Error::InvalidArgument("landmark out of range".into()));
    }
    let z = landmarks.map(|l| sphere_to_hom(&param.points[l]));
    let w = SPHERE_TARGETS.map(|t| sphere_to_hom(&Vector3::from(t)));
    from_hom_triples(z, w)
}

pub fn sphere_align_landmarks(param: &Parameterization, landmarks: [usize; 3]) -> Result<Parameterization> {
    let m = sphere_alignment(param, landmarks)?;
    Ok(param.with_points(param.points.iter().map(|p| m.apply_sphere(p)).collect()))
}

/// Conformal automorphism of the ball sending `c` to the origin, restricted
/// to the unit sphere.
pub fn ball_inversion(c: &Vector3<f64>, x: &Vector3<f64>) -> Vector3<f64> {
    let d = x - c;
    let num = d * (1.0 - c.norm_squared()) - c * d.norm_squared();
    let den = 1.0 - 2.0 * c.dot(x) + c.norm_squared() * x.norm_squared();
    num / den
}

pub const CENTER_TOLERANCE: f64 = 1e-8;
pub const CENTER_MAX_ITERATIONS: usize = 200;

/// Möbius-normalizes a sphere parameterization so that the centroid of the
/// points, weighted by the source vertex areas, sits at the origin.
///
/// Each iteration takes the Newton step `c = (2I − 2C)⁻¹ μ` of the centroid
/// `μ` (with `C` the weighted second moment), halving it until the centroid
/// shrinks, and composes [`ball_inversion`] by `c`.
pub fn mobius_center(param: &Parameterization) -> Result<Parameterization> {
    if param.kind != DomainKind::Sphere {
        return Err(Error::InvalidArgument("Möbius centring needs a sphere parameterization".into()));
    }
    let w = mesh::vertex_areas(&param.source)?;
    let total: f64 = w.iter().sum();
    let centroid = |x: &[Vector3<f64>]| x.iter().zip(&w).map(|(p, a)| p * *a).sum::<Vector3<f64>>() / total;

    let mut x = param.points.clone();
    let mut mu = centroid(&x);
    let mut it = 0;
    while mu.norm() >= CENTER_TOLERANCE {
        if it == CENTER_MAX_ITERATIONS {
            return Err(Error::Convergence { iterations: it, residual: mu.norm() });
        }
        it += 1;
        let second: Matrix3<f64> = x.iter().zip(&w).map(|(p, a)| p * p.transpose() * *a).sum::<Matrix3<f64>>() / total;
        let jac = (Matrix3::identity() - second) * 2.0;
        let mut c = jac.try_inverse().map(|j| j * mu).unwrap_or(mu * 0.5);
        if c.norm() > 0.5 {
            c *= 0.5 / c.norm();
        }
        let mut accepted = false;
        for _ in 0..40 {
            let y: Vec<Vector3<f64>> = x.iter().map(|p| ball_inversion(&c, p).normalize()).collect();
            let m = centroid(&y);
            if m.norm() < mu.norm() {
                x = y;
                mu = m;
                accepted = true;
                break;
            }
            c *= 0.5;
        }
        if !accepted {
            return Err(Error::Convergence { iterations: it, residual: mu.norm() });
        }
    }
    Ok(param.with_points(x))
}
