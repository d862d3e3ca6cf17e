//! Face-based quaternionic Dirac operator and spin transformations.
//!
//! Face fields are stored as `4|F|` real vectors, face `i` occupying
//! entries `4i..4i+4` in `(w, x, y, z)` order; every 4×4 block acts by left
//! quaternion multiplication (see [`crate::quat::block_embed`]).
//!
//! Writing `E_ij = 2H_ij + e_ij` for the edge shared by faces `i` and `j`
//! (edge oriented as traversed by face `i`), the operator is
//! `(D φ)_i = ½ Σ_j E_ij φ_j − H_i φ_i`. A solution of `(D − P) φ = 0` with
//! `P = diag(ρ_i)` closes the transformed edges `Im(φ̄_i E_ij φ_j)` around
//! every face, and the new faces have `h̃_i = h_i + ρ_i / √A_i`; hence
//! [`assemble_rho`] prescribes `ρ_i = (h_target − h)_i √A_i`.

mod reconstruct;

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::mesh::{self, TriMesh};
use crate::quat::{block_embed, Quaternion};
use crate::sparse::{Cholesky, SparseRealMatrix, TripletBuilder};

pub use reconstruct::*;

/// One quaternion per face (or per vertex for the calibration solve).
#[derive(Clone, Debug, PartialEq)]
pub struct SpinField {
    pub phi: Vec<Quaternion>,
}

impl SpinField {
    pub fn constant(n: usize, q: Quaternion) -> Self {
        SpinField { phi: vec![q; n] }
    }

    pub fn from_flat(x: &[f64]) -> Self {
        SpinField { phi: x.chunks_exact(4).map(|c| Quaternion::new(c[0], c[1], c[2], c[3])).collect() }
    }

    pub fn to_flat(&self) -> Vec<f64> {
        self.phi.iter().flat_map(|q| q.to_array()).collect()
    }

    pub fn len(&self) -> usize {
        self.phi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phi.is_empty()
    }
}

/// `4|F| × 4|F|` Dirac matrix. Boundary edges of disk meshes contribute
/// `½ e` to the diagonal block of their face, which keeps constants in the
/// kernel and matches the boundary rule of [`transform_edges`].
pub fn assemble_dirac(mesh: &TriMesh) -> Result<SparseRealMatrix> {
    let he = mesh::edge_mean_curvatures(mesh)?;
    let nf = mesh.n_faces();
    let mut b = TripletBuilder::new(4 * nf, 4 * nf);
    for (e, edge) in mesh.edges().iter().enumerate() {
        let i = edge.face;
        let ev = mesh.edge_vector(e);
        match edge.twin {
            Some(j) => {
                let h = he[e];
                b.push_block(i, j, &(block_embed(Quaternion::from_parts(2.0 * h, &ev)) * 0.5));
                b.push_block(j, i, &(block_embed(Quaternion::from_parts(2.0 * h, &-ev)) * 0.5));
                b.push_scalar_block(i, i, -h);
                b.push_scalar_block(j, j, -h);
            }
            None => b.push_block(i, i, &(block_embed(Quaternion::imag(&ev)) * 0.5)),
        }
    }
    Ok(b.build())
}

/// Diagonal `P` with `ρ_i = (target_h_i − h_i) √A_i` repeated on each block.
pub fn assemble_rho(mesh: &TriMesh, target_h: &[f64]) -> Result<SparseRealMatrix> {
    if target_h.len() != mesh.n_faces() {
        return Err(Error::DimMismatch(format!("{} targets for {} faces", target_h.len(), mesh.n_faces())));
    }
    if target_h.iter().any(|h| !h.is_finite()) {
        return Err(Error::InvalidArgument("non-finite target curvature".into()));
    }
    let h = mesh::mean_curvature_half_density(mesh)?;
    let areas = mesh::face_areas(mesh)?;
    let d: Vec<f64> = (0..mesh.n_faces())
        .flat_map(|i| [(target_h[i] - h[i]) * areas[i].sqrt(); 4])
        .collect();
    Ok(SparseRealMatrix::diagonal(&d))
}

/// Face-graph Laplacian weighted by dual edge length, and its coefficient
/// `c = 0.001 · max edge length`.
pub fn assemble_regularizer(mesh: &TriMesh) -> Result<(SparseRealMatrix, f64)> {
    let nf = mesh.n_faces();
    let mut b = TripletBuilder::new(4 * nf, 4 * nf);
    for (e, edge) in mesh.edges().iter().enumerate() {
        if let Some(j) = edge.twin {
            let w = mesh::dual_edge_length(mesh, e)?;
            let i = edge.face;
            b.push_scalar_block(i, i, w);
            b.push_scalar_block(j, j, w);
            b.push_scalar_block(i, j, -w);
            b.push_scalar_block(j, i, -w);
        }
    }
    Ok((b.build(), 1e-3 * mesh::max_edge_length(mesh)))
}

/// `D̂ᵀD̂ + cR` with `D̂ = D − tP`.
pub fn dirac_energy(mesh: &TriMesh, target_h: &[f64], t: f64) -> Result<SparseRealMatrix> {
    let d = assemble_dirac(mesh)?;
    let p = assemble_rho(mesh, target_h)?;
    let (r, c) = assemble_regularizer(mesh)?;
    Ok(d.add_scaled(&p, -t).gram().add_scaled(&r, c))
}

#[derive(Clone, Debug, PartialEq)]
pub struct EigenSolution {
    pub field: SpinField,
    pub lambda: f64,
    pub iterations: usize,
    /// `‖Eφ − λMφ‖ / (‖E‖_F ‖φ‖)`.
    pub residual: f64,
}

pub const MAX_INVERSE_ITERATIONS: usize = 500;

/// Smallest eigenpair of `E φ = λ M φ` by shifted inverse iteration from
/// `φ ≡ 1`, with `M` diagonal positive. The result is M-normalized.
pub fn solve_spin(e: &SparseRealMatrix, m: &SparseRealMatrix) -> Result<EigenSolution> {
    let n = e.nrows();
    if n == 0 || n % 4 != 0 || m.nrows() != n || e.ncols() != n {
        return Err(Error::DimMismatch(format!("eigenproblem of size {n} with mass {}", m.nrows())));
    }
    let md = m.diag();
    if md.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::InvalidArgument("mass matrix must be positive diagonal".into()));
    }
    let trace = e.trace();
    let scale = if trace > 0.0 { trace / n as f64 } else { md.iter().sum::<f64>() / n as f64 };
    let sigma = 1e-9 * scale;
    let chol = Cholesky::factor(&e.add_scaled(m, sigma))?;

    let m_norm = |x: &[f64]| x.iter().zip(&md).map(|(a, w)| a * a * w).sum::<f64>().sqrt();
    let mut x = vec![1.0; n];
    let s = m_norm(&x);
    x.iter_mut().for_each(|v| *v /= s);
    let mut lambda = e.quad_form(&x);
    let lambda_floor = 1e-14 * scale / (md.iter().sum::<f64>() / n as f64);

    let mut converged = false;
    let mut iterations = 0;
    while iterations < MAX_INVERSE_ITERATIONS {
        iterations += 1;
        let mx: Vec<f64> = x.iter().zip(&md).map(|(a, w)| a * w).collect();
        let mut y = chol.solve(&mx);
        let s = m_norm(&y);
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::Solver("inverse iteration produced a degenerate vector".into()));
        }
        y.iter_mut().for_each(|v| *v /= s);
        let next = e.quad_form(&y);
        x = y;
        let delta = (next - lambda).abs();
        lambda = next;
        if delta <= 1e-10 * lambda.abs() || delta <= lambda_floor {
            converged = true;
            break;
        }
    }
    let residual = eigen_residual(e, &md, &x, lambda);
    if !converged {
        return Err(Error::Convergence { iterations, residual });
    }
    Ok(EigenSolution { field: SpinField::from_flat(&x), lambda, iterations, residual })
}

fn eigen_residual(e: &SparseRealMatrix, md: &[f64], x: &[f64], lambda: f64) -> f64 {
    let ex = e.matvec(x);
    let r: f64 = ex.iter().zip(x).zip(md).map(|((a, b), w)| (a - lambda * w * b).powi(2)).sum::<f64>().sqrt();
    let xn = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let denom = e.frobenius_norm() * xn;
    if denom > 0.0 {
        r / denom
    } else {
        r
    }
}

/// `Im(φ̄_i E_ij φ_j)` per edge in the edge's stored direction; boundary edges
/// use their single face twice with `E = e`.
pub fn transform_edges(mesh: &TriMesh, phi: &SpinField) -> Result<Vec<Vector3<f64>>> {
    if phi.len() != mesh.n_faces() {
        return Err(Error::DimMismatch(format!("{} spin values for {} faces", phi.len(), mesh.n_faces())));
    }
    let he = mesh::edge_mean_curvatures(mesh)?;
    Ok(mesh
        .edges()
        .iter()
        .enumerate()
        .map(|(e, edge)| {
            let i = edge.face;
            let (j, h) = match edge.twin {
                Some(j) => (j, he[e]),
                None => (i, 0.0),
            };
            let big_e = Quaternion::from_parts(2.0 * h, &mesh.edge_vector(e));
            (phi.phi[i].conj() * big_e * phi.phi[j]).vector()
        })
        .collect())
}

/// Least-squares vertex positions for prescribed edge vectors, with vertex 0
/// pinned at the origin. Returns the mesh and the RMS edge misfit.
pub fn integrate_positions(mesh: &TriMesh, new_edges: &[Vector3<f64>]) -> Result<(TriMesh, f64)> {
    if new_edges.len() != mesh.n_edges() {
        return Err(Error::DimMismatch(format!("{} edge vectors for {} edges", new_edges.len(), mesh.n_edges())));
    }
    if mesh.topology().components != 1 {
        return Err(Error::Topology("edge graph is disconnected".into()));
    }
    let nv = mesh.n_vertices();
    let mut t = Vec::with_capacity(4 * mesh.n_edges());
    let mut rhs = vec![[0.0f64; 3]; nv];
    for (edge, ev) in mesh.edges().iter().zip(new_edges) {
        let [a, b] = edge.v;
        t.extend([(a, a, 1.0), (b, b, 1.0), (a, b, -1.0), (b, a, -1.0)]);
        for k in 0..3 {
            rhs[b][k] += ev[k];
            rhs[a][k] -= ev[k];
        }
    }
    let mut keep = vec![true; nv];
    keep[0] = false;
    let l = SparseRealMatrix::from_triplets(nv, nv, &t).submatrix(&keep);
    let chol = Cholesky::factor(&l)?;
    let cols: Vec<Vec<f64>> = (0..3).map(|k| rhs[1..].iter().map(|r| r[k]).collect()).collect();
    let sol = chol.solve_many(&[&cols[0], &cols[1], &cols[2]]);
    let mut pos = vec![Vector3::zeros(); nv];
    for v in 1..nv {
        pos[v] = Vector3::new(sol[0][v - 1], sol[1][v - 1], sol[2][v - 1]);
    }
    let misfit: f64 = mesh
        .edges()
        .iter()
        .zip(new_edges)
        .map(|(edge, ev)| (pos[edge.v[1]] - pos[edge.v[0]] - ev).norm_squared())
        .sum();
    let rms = (misfit / mesh.n_edges().max(1) as f64).sqrt();
    Ok((mesh.with_positions(pos), rms))
}
