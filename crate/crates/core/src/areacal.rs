//! Area calibration by the quaternion 1-form energy `|dφ + ½ G df φ|²`.
//!
//! On each triangle `(p1, p2, p3)` the edges are `c = p2 − p1`,
//! `b = p1 − p3`, `a = p3 − p2`, so `f_x = c` and `f_y = −b` in the reference
//! coordinates of `Φ = (1−x−y) φ1 + x φ2 + y φ3`. `G` is the quaternion
//! gradient of the log scale factor `u`. Where `dφ φ⁻¹ = −½ G df` holds the
//! spin transformation scales lengths by `|φ|² = e^u`.
//!
//! φ and `u` live on the vertices of the mesh being calibrated; the
//! resulting field is averaged to faces before transforming edges.

use nalgebra::{Matrix4, SMatrix, Vector3};

use crate::error::{Error, Result};
use crate::mesh::{self, TriMesh};
use crate::quat::{block_embed, Quaternion};
use crate::sparse::{SparseRealMatrix, TripletBuilder};
use crate::spin::{integrate_positions, solve_spin, transform_edges, EigenSolution, SpinField};

type Mat4x12 = SMatrix<f64, 4, 12>;
pub type Mat12 = SMatrix<f64, 12, 12>;

/// `n / (2A) (a h1 + b h2 + c h3)` for a triangle given by its edge loop.
pub fn quat_gradient(a: Quaternion, b: Quaternion, c: Quaternion, h: [f64; 3]) -> Result<Quaternion> {
    let nn = a.vector().cross(&b.vector());
    let twice_area = nn.norm();
    let scale = a.norm_sq().max(b.norm_sq()).max(c.norm_sq());
    if !(twice_area > 1e-14 * scale) {
        return Err(Error::DegenerateFace(usize::MAX));
    }
    let n = Quaternion::imag(&(nn / twice_area));
    let s = a * h[0] + b * h[1] + c * h[2];
    Ok((n * s).scale(1.0 / twice_area))
}

fn edge_loop(p: &[Vector3<f64>; 3]) -> (Vector3<f64>, Vector3<f64>, Vector3<f64>) {
    (p[2] - p[1], p[0] - p[2], p[1] - p[0])
}

/// Local 12×12 block of `|ω|²` over one triangle, corner-major with the
/// usual `(w, x, y, z)` layout per corner.
pub fn triangle_area_energy(p: &[Vector3<f64>; 3], u: [f64; 3]) -> Result<Mat12> {
    let (a, b, c) = edge_loop(p);
    let g = quat_gradient(Quaternion::imag(&a), Quaternion::imag(&b), Quaternion::imag(&c), u)?;
    let twice_area = a.cross(&b).norm();
    let lc = block_embed(g * Quaternion::imag(&c)) * 0.5;
    let lb = block_embed(g * Quaternion::imag(&b)) * 0.5;
    let id = Matrix4::<f64>::identity();
    let (bb, cb, cc) = (b.norm_squared(), c.dot(&b), c.norm_squared());

    // The integrand is quadratic in (x, y): the edge-midpoint rule is exact.
    let mut k = Mat12::zeros();
    for lam in [[0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5]] {
        let mut bx = Mat4x12::zeros();
        let mut by = Mat4x12::zeros();
        bx.fixed_view_mut::<4, 4>(0, 0).copy_from(&(lc * lam[0] - id));
        bx.fixed_view_mut::<4, 4>(0, 4).copy_from(&(lc * lam[1] + id));
        bx.fixed_view_mut::<4, 4>(0, 8).copy_from(&(lc * lam[2]));
        by.fixed_view_mut::<4, 4>(0, 0).copy_from(&(-lb * lam[0] - id));
        by.fixed_view_mut::<4, 4>(0, 4).copy_from(&(-lb * lam[1]));
        by.fixed_view_mut::<4, 4>(0, 8).copy_from(&(-lb * lam[2] + id));
        let bxt = bx.transpose();
        let byt = by.transpose();
        k += (bxt * bx * bb + (bxt * by + byt * bx) * cb + byt * by * cc) * (1.0 / 6.0 / twice_area);
    }
    Ok(k)
}

/// `4|V| × 4|V|` matrix of `|ω|²` with `u` given per vertex.
pub fn assemble_area_energy(mesh: &TriMesh, u: &[f64]) -> Result<SparseRealMatrix> {
    if u.len() != mesh.n_vertices() {
        return Err(Error::DimMismatch(format!("{} scale factors for {} vertices", u.len(), mesh.n_vertices())));
    }
    let nv = mesh.n_vertices();
    let mut tb = TripletBuilder::new(4 * nv, 4 * nv);
    for (f, t) in mesh.faces().iter().enumerate() {
        let k = triangle_area_energy(&mesh.triangle(f), [u[t[0]], u[t[1]], u[t[2]]]).map_err(|e| match e {
            Error::DegenerateFace(_) => Error::DegenerateFace(f),
            e => e,
        })?;
        for r in 0..3 {
            for s in 0..3 {
                let blk: Matrix4<f64> = k.fixed_view::<4, 4>(4 * r, 4 * s).into_owned();
                tb.push_block(t[r], t[s], &blk);
            }
        }
    }
    Ok(tb.build())
}

/// Lumped vertex areas, each repeated four times.
pub fn vertex_mass(mesh: &TriMesh) -> Result<SparseRealMatrix> {
    let va = mesh::vertex_areas(mesh)?;
    Ok(SparseRealMatrix::diagonal(&va.iter().flat_map(|&a| [a; 4]).collect::<Vec<_>>()))
}

/// `u_i = log(1/√A_i)`: the factors that equalize all face areas.
pub fn equal_area_factors(mesh: &TriMesh) -> Result<Vec<f64>> {
    Ok(mesh::face_areas(mesh)?.iter().map(|a| -0.5 * a.ln()).collect())
}

/// Population variance of `log A_i`, i.e. of the log ratio to a common
/// target area.
pub fn log_area_variance(mesh: &TriMesh) -> Result<f64> {
    let la: Vec<f64> = mesh::face_areas(mesh)?.iter().map(|a| a.ln()).collect();
    let mean = la.iter().sum::<f64>() / la.len() as f64;
    Ok(la.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / la.len() as f64)
}

/// Mean of the incident face values at each vertex.
pub fn face_to_vertex(mesh: &TriMesh, face_values: &[f64]) -> Vec<f64> {
    let mut sum = vec![0.0; mesh.n_vertices()];
    let mut cnt = vec![0usize; mesh.n_vertices()];
    for (t, &v) in mesh.faces().iter().zip(face_values) {
        for &i in t {
            sum[i] += v;
            cnt[i] += 1;
        }
    }
    sum.iter().zip(&cnt).map(|(s, &c)| if c > 0 { s / c as f64 } else { 0.0 }).collect()
}

fn vertex_to_face(mesh: &TriMesh, phi: &SpinField) -> SpinField {
    SpinField {
        phi: mesh
            .faces()
            .iter()
            .map(|t| (phi.phi[t[0]] + phi.phi[t[1]] + phi.phi[t[2]]).scale(1.0 / 3.0))
            .collect(),
    }
}

/// One calibration solve for per-face log factors `u` (shifted to zero
/// mean). Returns the unit-area, centred result and the eigen solution.
pub fn calibrate(mesh: &TriMesh, u_face: &[f64]) -> Result<(TriMesh, EigenSolution)> {
    if u_face.len() != mesh.n_faces() {
        return Err(Error::DimMismatch(format!("{} scale factors for {} faces", u_face.len(), mesh.n_faces())));
    }
    if u_face.iter().any(|u| !u.is_finite()) {
        return Err(Error::InvalidArgument("non-finite log area factor".into()));
    }
    let mean = u_face.iter().sum::<f64>() / u_face.len() as f64;
    let centred: Vec<f64> = u_face.iter().map(|u| u - mean).collect();
    let uv = face_to_vertex(mesh, &centred);
    let e = assemble_area_energy(mesh, &uv)?;
    let sol = solve_spin(&e, &vertex_mass(mesh)?)?;
    let face_phi = vertex_to_face(mesh, &sol.field);
    let edges = transform_edges(mesh, &face_phi)?;
    let (out, _) = integrate_positions(mesh, &edges)?;
    Ok((mesh::normalize_unit_area(&out), sol))
}

/// `‖dφ φ⁻¹ + ½ G df‖` in the L² norm of quaternion 1-forms, with φ and `u`
/// per vertex and `φ⁻¹` taken at each triangle's barycenter.
pub fn closing_residual(mesh: &TriMesh, phi: &SpinField, u: &[f64]) -> Result<f64> {
    if phi.len() != mesh.n_vertices() || u.len() != mesh.n_vertices() {
        return Err(Error::DimMismatch("closing residual needs per-vertex φ and u".into()));
    }
    let mut total = 0.0;
    for (f, t) in mesh.faces().iter().enumerate() {
        let p = mesh.triangle(f);
        let (a, b, c) = edge_loop(&p);
        let g = quat_gradient(Quaternion::imag(&a), Quaternion::imag(&b), Quaternion::imag(&c), [u[t[0]], u[t[1]], u[t[2]]])
            .map_err(|_| Error::DegenerateFace(f))?;
        let [p1, p2, p3] = [phi.phi[t[0]], phi.phi[t[1]], phi.phi[t[2]]];
        let inv = ((p1 + p2 + p3).scale(1.0 / 3.0)).inverse().ok_or(Error::ZeroQuaternion)?;
        let ex = (p2 - p1) * inv + (g * Quaternion::imag(&c)).scale(0.5);
        let ey = (p3 - p1) * inv - (g * Quaternion::imag(&b)).scale(0.5);
        let dot = |x: Quaternion, y: Quaternion| x.w * y.w + x.x * y.x + x.y * y.y + x.z * y.z;
        let twice_area = a.cross(&b).norm();
        let integrand = b.norm_squared() * ex.norm_sq() + 2.0 * c.dot(&b) * dot(ex, ey) + c.norm_squared() * ey.norm_sq();
        total += 0.5 * integrand / twice_area;
    }
    Ok(total.sqrt())
}
