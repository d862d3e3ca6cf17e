//! The two-channel shape representation: mean curvature half-density and
//! log vertex density, tabulated on a fixed grid over the canonical domain.

mod cbr;
mod domain;

use nalgebra::Vector3;

use crate::confmap::{DomainKind, Parameterization};
use crate::error::{Error, Result};
use crate::mesh::{self, PointIndex, TriMesh};

pub use cbr::*;
pub use domain::*;

/// Channel order in every tensor.
pub const CHANNEL_H: usize = 0;
pub const CHANNEL_LOG_DENSITY: usize = 1;

/// Stored values are `raw · scale + offset`, per channel. Only applied when
/// writing files; tensors in memory always hold raw values.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChannelAffine {
    pub scale: [f64; 2],
    pub offset: [f64; 2],
}

impl ChannelAffine {
    pub fn identity() -> Self {
        ChannelAffine { scale: [1.0; 2], offset: [0.0; 2] }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CurvatureTensor {
    pub kind: DomainKind,
    /// Sphere: faces × rows × columns × 2; disk: rows × columns × 2.
    pub dims: Vec<usize>,
    pub data: Vec<f64>,
    /// Per-sample flag for disk samples whose value was filled in from a
    /// neighbour.
    pub mask: Option<Vec<bool>>,
    pub affine: Option<ChannelAffine>,
}

impl CurvatureTensor {
    pub fn new(kind: DomainKind, dims: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        let n: usize = dims.iter().product();
        if dims.last() != Some(&2) || n != data.len() {
            return Err(Error::DimMismatch(format!("{} values for dimensions {dims:?}", data.len())));
        }
        Ok(CurvatureTensor { kind, dims, data, mask: None, affine: None })
    }

    /// Tensor with both channels constant.
    pub fn constant(domain: &Domain, h: f64, log_density: f64) -> Self {
        let n = domain.n_samples();
        let data = (0..n).flat_map(|_| [h, log_density]).collect();
        CurvatureTensor { kind: domain.kind(), dims: domain.dims(), data, mask: None, affine: None }
    }

    pub fn n_samples(&self) -> usize {
        self.data.len() / 2
    }

    pub fn channel(&self, c: usize) -> impl Iterator<Item = f64> + '_ {
        self.data.iter().skip(c).step_by(2).copied()
    }

    pub fn value(&self, sample: usize, c: usize) -> f64 {
        self.data[2 * sample + c]
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if self.kind != other.kind || self.dims != other.dims {
            return Err(Error::DimMismatch(format!(
                "{:?} {:?} vs {:?} {:?}",
                self.kind, self.dims, other.kind, other.dims
            )));
        }
        Ok(())
    }
}

/// `(1 − t) a + t b`, elementwise. The mask and affine record of `a` are kept.
pub fn lerp(a: &CurvatureTensor, b: &CurvatureTensor, t: f64) -> Result<CurvatureTensor> {
    a.same_shape(b)?;
    if !t.is_finite() {
        return Err(Error::InvalidArgument("interpolation parameter must be finite".into()));
    }
    let data = a.data.iter().zip(&b.data).map(|(x, y)| (1.0 - t) * x + t * y).collect();
    Ok(CurvatureTensor { data, ..a.clone() })
}

/// Multiplies the vertex density by `m`; `h` scales by `1/√m` to keep the
/// curvature itself unchanged.
pub fn scale_density(t: &CurvatureTensor, m: f64) -> Result<CurvatureTensor> {
    if !(m > 0.0 && m.is_finite()) {
        return Err(Error::InvalidArgument(format!("density factor must be positive, got {m}")));
    }
    let (lm, s) = (m.ln(), 1.0 / m.sqrt());
    let data = t
        .data
        .chunks_exact(2)
        .flat_map(|c| [c[CHANNEL_H] * s, c[CHANNEL_LOG_DENSITY] + lm])
        .collect();
    Ok(CurvatureTensor { data, ..t.clone() })
}

/// `log(1/Ã_i)` with `Ã_i` the vertex area of the parameter-domain mesh.
pub fn extract_density(param: &Parameterization) -> Result<Vec<f64>> {
    let va = mesh::vertex_areas(&param.param_mesh())?;
    va.iter()
        .enumerate()
        .map(|(v, &a)| if a > 0.0 { Ok(-a.ln()) } else { Err(Error::DegenerateVertex(v)) })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IdwOptions {
    pub neighbours: usize,
    pub power: f64,
}

impl Default for IdwOptions {
    fn default() -> Self {
        IdwOptions { neighbours: 8, power: 2.0 }
    }
}

/// Distances below this count as an exact hit.
pub const IDW_EXACT: f64 = 1e-12;

/// Normalized weights from `(distance, id)` pairs sorted by distance.
pub fn idw_weights(near: &[(f64, usize)], power: f64) -> Vec<(usize, f64)> {
    if let Some(&(d, id)) = near.first() {
        if d < IDW_EXACT {
            return vec![(id, 1.0)];
        }
    }
    let raw: Vec<f64> = near.iter().map(|(d, _)| d.powf(-power)).collect();
    let total: f64 = raw.iter().sum();
    near.iter().zip(raw).map(|(&(_, id), w)| (id, w / total)).collect()
}

/// Inverse-distance interpolation of scattered values.
pub struct Idw {
    index: PointIndex,
    opts: IdwOptions,
}

impl Idw {
    pub fn new(points: &[Vector3<f64>], opts: IdwOptions) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyPointSet);
        }
        if opts.neighbours == 0 || !(opts.power > 0.0) {
            return Err(Error::InvalidArgument("IDW needs at least one neighbour and a positive power".into()));
        }
        Ok(Idw { index: PointIndex::new(points), opts })
    }

    pub fn weights(&self, p: &Vector3<f64>) -> Vec<(usize, f64)> {
        let near: Vec<(f64, usize)> =
            self.index.nearest(p, self.opts.neighbours).into_iter().map(|(d2, i)| (d2.sqrt(), i)).collect();
        idw_weights(&near, self.opts.power)
    }

    pub fn eval(&self, p: &Vector3<f64>, values: &[f64]) -> f64 {
        self.weights(p).iter().map(|&(i, w)| w * values[i]).sum()
    }
}

fn check_finite(v: &[f64], what: &str) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("non-finite {what}")))
    }
}

/// Sample positions and mask for a domain.
fn domain_samples(domain: &Domain) -> (Vec<Vector3<f64>>, Option<Vec<bool>>) {
    match domain {
        Domain::Sphere(s) => (s.samples(), None),
        Domain::Disk(d) => {
            let (p, m) = d.samples();
            let any = m.iter().any(|&x| x);
            (p, any.then_some(m))
        }
    }
}

/// Tabulates a function of the domain point on the grid.
pub fn tabulate(domain: &Domain, f: impl Fn(&Vector3<f64>) -> (f64, f64)) -> CurvatureTensor {
    let (pts, mask) = domain_samples(domain);
    let data = pts.iter().flat_map(|p| {
        let (a, b) = f(p);
        [a, b]
    });
    CurvatureTensor { kind: domain.kind(), dims: domain.dims(), data: data.collect(), mask, affine: None }
}

/// Interpolates `h` (from parameter-domain face barycenters) and the log
/// density (from parameter-domain vertices) onto the domain grid.
pub fn encode(mesh: &TriMesh, param: &Parameterization, domain: &Domain, opts: IdwOptions) -> Result<CurvatureTensor> {
    if param.kind != domain.kind() {
        return Err(Error::InvalidArgument("parameterization and domain kinds differ".into()));
    }
    if mesh.n_faces() == 0 || mesh.faces() != param.source.faces() {
        return Err(Error::DimMismatch("parameterization does not belong to this mesh".into()));
    }
    let h = mesh::mean_curvature_half_density(mesh)?;
    let density = extract_density(param)?;
    encode_fields(param, &h, &density, domain, opts)
}

/// Like [`encode`] with given per-face `h` and per-vertex log density.
pub fn encode_fields(
    param: &Parameterization,
    h: &[f64],
    log_density: &[f64],
    domain: &Domain,
    opts: IdwOptions,
) -> Result<CurvatureTensor> {
    check_finite(h, "mean curvature half-density")?;
    check_finite(log_density, "log density")?;
    check_finite(&param.points.iter().flat_map(|p| p.iter().copied()).collect::<Vec<_>>(), "parameter positions")?;
    let pm = param.param_mesh();
    let bary: Vec<Vector3<f64>> =
        mesh::barycenters(&pm).iter().map(|b| project_to_domain(param.kind, b)).collect();
    let face_idw = Idw::new(&bary, opts)?;
    let vert_idw = Idw::new(&param.points, opts)?;
    let (pts, mask) = domain_samples(domain);
    let data = pts.iter().flat_map(|p| [face_idw.eval(p, h), vert_idw.eval(p, log_density)]).collect();
    Ok(CurvatureTensor { kind: domain.kind(), dims: domain.dims(), data, mask, affine: None })
}

/// Evaluates a tensor anywhere on its domain by IDW over nearby grid samples.
pub struct Decoder<'a> {
    tensor: &'a CurvatureTensor,
    domain: Domain,
    opts: IdwOptions,
}

impl<'a> Decoder<'a> {
    pub fn new(tensor: &'a CurvatureTensor, opts: IdwOptions) -> Result<Self> {
        let domain = Domain::from_dims(tensor.kind, &tensor.dims)?;
        Ok(Decoder { tensor, domain, opts })
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    /// `(h, log density)` at a domain point. Candidates are the 4 × 4 block
    /// of lattice points around `p` in its face patch (sphere) or in the
    /// square image (disk); distances are chordal or measured in the square.
    pub fn sample(&self, p: &Vector3<f64>) -> (f64, f64) {
        let mut cand: Vec<(f64, usize)> = Vec::with_capacity(16);
        let window = |x: f64, n: usize| {
            let base = x.floor() as i64;
            (base - 1..=base + 2).filter(move |&i| i >= 0 && i < n as i64).map(|i| i as usize)
        };
        match &self.domain {
            Domain::Sphere(s) => {
                let p = p.normalize();
                let f = s.containing_face(&p);
                let (x, y) = s.gnomonic(f, &p).unwrap_or((0.0, 0.0));
                let g = s.grid;
                for j in window(s.lattice_index(y), g) {
                    for i in window(s.lattice_index(x), g) {
                        cand.push(((s.sample(f, i, j) - p).norm(), (f * g + j) * g + i));
                    }
                }
            }
            Domain::Disk(d) => {
                let w = d.to_square(p);
                let n = d.resolution;
                for j in window(d.lattice_index(w.y), n) {
                    for i in window(d.lattice_index(w.x), n) {
                        let q = Vector3::new(d.lattice(i), d.lattice(j), 0.0);
                        cand.push(((q - w).norm(), j * n + i));
                    }
                }
            }
        }
        cand.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        cand.truncate(self.opts.neighbours);
        let mut out = (0.0, 0.0);
        for (s, w) in idw_weights(&cand, self.opts.power) {
            out.0 += w * self.tensor.value(s, CHANNEL_H);
            out.1 += w * self.tensor.value(s, CHANNEL_LOG_DENSITY);
        }
        out
    }
}

#[cfg(test)]
mod tests;
