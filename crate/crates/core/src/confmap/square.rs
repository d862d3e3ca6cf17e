//! Conformal map of the unit disk onto the square `[−1, 1]²`.
//!
//! `w(z) = (1 + i) F(z) / κ` with `F(z) = ∫₀^z dt / √(1 − t⁴)`, so that the
//! prevertices `1, i, −1, −i` go to the corners `(1, 1), (−1, 1), (−1, −1),
//! (1, −1)`. `F` is evaluated as `z R_F(1 − z², 1 + z², 1)`.

use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Carlson's symmetric elliptic integral of the first kind, by duplication.
pub fn carlson_rf(x: Complex64, y: Complex64, z: Complex64) -> Complex64 {
    let (mut x, mut y, mut z) = (x, y, z);
    for _ in 0..200 {
        let mu = (x + y + z) / 3.0;
        let dx = 1.0 - x / mu;
        let dy = 1.0 - y / mu;
        let dz = 1.0 - z / mu;
        if dx.norm().max(dy.norm()).max(dz.norm()) < 1e-3 {
            let e2 = dx * dy - dz * dz;
            let e3 = dx * dy * dz;
            return (1.0 - e2 / 10.0 + e3 / 14.0 + e2 * e2 / 24.0 - 3.0 * e2 * e3 / 44.0) / mu.sqrt();
        }
        let (sx, sy, sz) = (x.sqrt(), y.sqrt(), z.sqrt());
        let lam = sx * sy + sy * sz + sz * sx;
        x = (x + lam) / 4.0;
        y = (y + lam) / 4.0;
        z = (z + lam) / 4.0;
    }
    Complex64::new(f64::NAN, f64::NAN)
}

/// `∫₀^z dt / √(1 − t⁴)` along the straight segment.
pub fn lemniscate_integral(z: Complex64) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    let z2 = z * z;
    z * carlson_rf(one - z2, one + z2, one)
}

fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn step<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(f, a, b, fa, fm, fb, whole, tol, 50)
}

/// `κ = ∫₀¹ dt / √(1 − t⁴)`, computed by adaptive Simpson quadrature after
/// the substitution `t = sin θ`, which removes the endpoint singularity.
pub fn kappa() -> f64 {
    static K: OnceLock<f64> = OnceLock::new();
    *K.get_or_init(|| {
        adaptive_simpson(&|th: f64| 1.0 / (1.0 + th.sin().powi(2)).sqrt(), 0.0, std::f64::consts::FRAC_PI_2, 1e-15)
    })
}

pub fn disk_to_square(z: Complex64) -> Complex64 {
    Complex64::new(1.0, 1.0) * lemniscate_integral(z) / kappa()
}

const NEWTON_MAX: usize = 100;

/// Inverse of [`disk_to_square`] by damped Newton iteration.
pub fn square_to_disk(w: Complex64) -> Result<Complex64> {
    if !(w.re.abs() <= 1.0 + 1e-12 && w.im.abs() <= 1.0 + 1e-12) {
        return Err(Error::InvalidArgument("point outside the square".into()));
    }
    let target = w * kappa() / Complex64::new(1.0, 1.0);
    let one = Complex64::new(1.0, 0.0);
    let mut z = if target.norm() > 0.95 { target * (0.95 / target.norm()) } else { target };
    let mut r = lemniscate_integral(z) - target;
    for _ in 0..NEWTON_MAX {
        if r.norm() < 1e-14 {
            return Ok(z);
        }
        let step = r * (one - z * z * z * z).sqrt();
        let mut s = 1.0;
        let mut improved = false;
        for _ in 0..60 {
            let cand = z - step * s;
            if cand.norm() <= 1.0 {
                let rc = lemniscate_integral(cand) - target;
                if rc.norm() < r.norm() {
                    z = cand;
                    r = rc;
                    improved = true;
                    break;
                }
            }
            s *= 0.5;
        }
        if !improved {
            break;
        }
    }
    if r.norm() < 1e-12 {
        Ok(z)
    } else {
        Err(Error::Convergence { iterations: NEWTON_MAX, residual: r.norm() })
    }
}
