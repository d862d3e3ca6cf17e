//! Quaternions over f64.
//!
//! Vectors of R^3 are identified with imaginary quaternions (w = 0). The
//! rotation action is `R_q(v) = Im(conj(q) v q)`, so `R_{pq} = R_q ∘ R_p`.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use nalgebra::{Matrix4, Vector3};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Quaternion {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Quaternion {
    pub const ONE: Quaternion = Quaternion::new(1.0, 0.0, 0.0, 0.0);
    pub const ZERO: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 0.0);
    pub const I: Quaternion = Quaternion::new(0.0, 1.0, 0.0, 0.0);
    pub const J: Quaternion = Quaternion::new(0.0, 0.0, 1.0, 0.0);
    pub const K: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 1.0);

    pub const fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Quaternion { w, x, y, z }
    }

    pub const fn real(w: f64) -> Self {
        Quaternion::new(w, 0.0, 0.0, 0.0)
    }

    pub fn imag(v: &Vector3<f64>) -> Self {
        Quaternion::new(0.0, v.x, v.y, v.z)
    }

    pub fn from_parts(w: f64, v: &Vector3<f64>) -> Self {
        Quaternion::new(w, v.x, v.y, v.z)
    }

    pub fn vector(&self) -> Vector3<f64> {
        Vector3::new(self.x, self.y, self.z)
    }

    pub fn conj(&self) -> Self {
        Quaternion::new(self.w, -self.x, -self.y, -self.z)
    }

    pub fn norm_sq(&self) -> f64 {
        self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn scale(&self, s: f64) -> Self {
        Quaternion::new(self.w * s, self.x * s, self.y * s, self.z * s)
    }

    /// `None` for the zero quaternion.
    pub fn inverse(&self) -> Option<Self> {
        let n = self.norm_sq();
        (n > 0.0).then(|| self.conj().scale(1.0 / n))
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.w, self.x, self.y, self.z]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Quaternion::new(a[0], a[1], a[2], a[3])
    }
}

/// Hamilton product.
pub fn qmul(a: Quaternion, b: Quaternion) -> Quaternion {
    Quaternion::new(
        a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
        a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
        a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
        a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w,
    )
}

/// `Im(conj(q) v q)`; for non-unit q the result is scaled by |q|².
pub fn rotate_vector(q: Quaternion, v: &Vector3<f64>) -> Vector3<f64> {
    qmul(qmul(q.conj(), Quaternion::imag(v)), q).vector()
}

/// Left-multiplication matrix: `block_embed(q) * [p.w, p.x, p.y, p.z]ᵀ` is `q*p`.
pub fn block_embed(q: Quaternion) -> Matrix4<f64> {
    let (a, b, c, d) = (q.w, q.x, q.y, q.z);
    Matrix4::new(
        a, -b, -c, -d, //
        b, a, -d, c, //
        c, d, a, -b, //
        d, -c, b, a,
    )
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AxisAngle {
    pub scale: f64,
    pub angle: f64,
    pub axis: Vector3<f64>,
}

/// Writes `q = sqrt(scale) (cos(angle/2) + sin(angle/2) axis)`. The angle lies
/// in `[0, 2π)` except for negative reals, which need exactly `2π`. Real
/// quaternions get axis `(0, 0, 1)`.
pub fn axis_angle_decompose(q: Quaternion) -> Result<AxisAngle> {
    let scale = q.norm_sq();
    if scale == 0.0 {
        return Err(Error::ZeroQuaternion);
    }
    let v = q.vector();
    let vn = v.norm();
    let angle = 2.0 * vn.atan2(q.w);
    let axis = if vn == 0.0 { Vector3::z() } else { v / vn };
    Ok(AxisAngle { scale, angle, axis })
}

impl Add for Quaternion {
    type Output = Quaternion;
    fn add(self, o: Quaternion) -> Quaternion {
        Quaternion::new(self.w + o.w, self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Quaternion {
    fn add_assign(&mut self, o: Quaternion) {
        *self = *self + o;
    }
}

impl Sub for Quaternion {
    type Output = Quaternion;
    fn sub(self, o: Quaternion) -> Quaternion {
        Quaternion::new(self.w - o.w, self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for Quaternion {
    type Output = Quaternion;
    fn neg(self) -> Quaternion {
        self.scale(-1.0)
    }
}

impl Mul for Quaternion {
    type Output = Quaternion;
    fn mul(self, o: Quaternion) -> Quaternion {
        qmul(self, o)
    }
}

impl Mul<f64> for Quaternion {
    type Output = Quaternion;
    fn mul(self, s: f64) -> Quaternion {
        self.scale(s)
    }
}
