//! End-to-end operations behind the command-line tool.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::Vector3;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::codec::{self, ChannelAffine, CurvatureTensor, Decoder, DiskDomain, Domain, IdwOptions, SphericalDomain};
use crate::confmap::{self, DomainKind, Parameterization};
use crate::cvt::{self, LloydOptions, LloydReport};
use crate::error::{Error, Result};
use crate::mesh::{self, TriMesh};
use crate::spin::{self, ReconstructionReport};

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineConfig {
    pub domain: DomainKind,
    /// Icosahedron subdivisions of the sphere domain, 0..=6.
    pub subdivisions: usize,
    /// Per-face lattice size on the sphere, 2..=256.
    pub grid: usize,
    /// Disk lattice size, 2..=2048.
    pub disk_grid: usize,
    pub idw_neighbours: usize,
    pub idw_power: f64,
    pub lloyd_tolerance: f64,
    pub lloyd_max_iterations: usize,
    pub steps: usize,
    pub seed: u64,
    pub area_calibration: bool,
    /// Written into tensor files when set.
    pub affine: Option<ChannelAffine>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            domain: DomainKind::Sphere,
            subdivisions: 2,
            grid: 32,
            disk_grid: 256,
            idw_neighbours: 8,
            idw_power: 2.0,
            lloyd_tolerance: 1e-4,
            lloyd_max_iterations: 100,
            steps: 10,
            seed: 0,
            area_calibration: true,
            affine: None,
        }
    }
}

const KEYS: &[&str] = &[
    "domain",
    "subdivisions",
    "grid",
    "disk_grid",
    "idw_neighbours",
    "idw_power",
    "lloyd_tolerance",
    "lloyd_max_iterations",
    "steps",
    "seed",
    "area_calibration",
    "affine_scale_h",
    "affine_scale_d",
    "affine_offset_h",
    "affine_offset_d",
];

impl PipelineConfig {
    pub fn keys() -> &'static [&'static str] {
        KEYS
    }

    /// Sets one field from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = || Error::InvalidArgument(format!("bad value '{value}' for {key}"));
        let int = || value.parse::<usize>().map_err(|_| bad());
        let real = || value.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(bad);
        match key {
            "domain" => self.domain = parse_domain(value)?,
            "subdivisions" => self.subdivisions = int()?,
            "grid" => self.grid = int()?,
            "disk_grid" => self.disk_grid = int()?,
            "idw_neighbours" => self.idw_neighbours = int()?,
            "idw_power" => self.idw_power = real()?,
            "lloyd_tolerance" => self.lloyd_tolerance = real()?,
            "lloyd_max_iterations" => self.lloyd_max_iterations = int()?,
            "steps" => self.steps = int()?,
            "seed" => self.seed = value.parse().map_err(|_| bad())?,
            "area_calibration" => self.area_calibration = value.parse().map_err(|_| bad())?,
            "affine_scale_h" | "affine_scale_d" | "affine_offset_h" | "affine_offset_d" => {
                let v = real()?;
                let a = self.affine.get_or_insert_with(ChannelAffine::identity);
                let c = if key.ends_with('h') { 0 } else { 1 };
                if key.contains("scale") {
                    a.scale[c] = v
                } else {
                    a.offset[c] = v
                }
            }
            _ => return Err(Error::InvalidArgument(format!("unknown configuration key '{key}'"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let check = |ok: bool, what: &str| if ok { Ok(()) } else { Err(Error::InvalidArgument(what.into())) };
        check(self.subdivisions <= 6, "subdivisions must be at most 6")?;
        check((2..=256).contains(&self.grid), "grid must be in 2..=256")?;
        check((2..=2048).contains(&self.disk_grid), "disk_grid must be in 2..=2048")?;
        check((1..=64).contains(&self.idw_neighbours), "idw_neighbours must be in 1..=64")?;
        check(self.idw_power > 0.0 && self.idw_power <= 16.0, "idw_power must be in (0, 16]")?;
        check(self.lloyd_tolerance >= 0.0, "lloyd_tolerance must be non-negative")?;
        check(self.lloyd_max_iterations <= 100_000, "lloyd_max_iterations must be at most 100000")?;
        check((1..=1000).contains(&self.steps), "steps must be in 1..=1000")?;
        if let Some(a) = self.affine {
            check(a.scale.iter().all(|&s| s != 0.0), "affine scales must be non-zero")?;
        }
        Ok(())
    }

    /// Flat `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = PipelineConfig::default();
        for (ln, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse { line: ln + 1, msg: "expected key = value".into() })?;
            cfg.set(k.trim(), v.trim()).map_err(|e| Error::Parse { line: ln + 1, msg: e.to_string() })?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "domain = {}", domain_name(self.domain));
        let _ = writeln!(s, "subdivisions = {}", self.subdivisions);
        let _ = writeln!(s, "grid = {}", self.grid);
        let _ = writeln!(s, "disk_grid = {}", self.disk_grid);
        let _ = writeln!(s, "idw_neighbours = {}", self.idw_neighbours);
        let _ = writeln!(s, "idw_power = {}", self.idw_power);
        let _ = writeln!(s, "lloyd_tolerance = {}", self.lloyd_tolerance);
        let _ = writeln!(s, "lloyd_max_iterations = {}", self.lloyd_max_iterations);
        let _ = writeln!(s, "steps = {}", self.steps);
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "area_calibration = {}", self.area_calibration);
        if let Some(a) = self.affine {
            let _ = writeln!(s, "affine_scale_h = {}", a.scale[0]);
            let _ = writeln!(s, "affine_scale_d = {}", a.scale[1]);
            let _ = writeln!(s, "affine_offset_h = {}", a.offset[0]);
            let _ = writeln!(s, "affine_offset_d = {}", a.offset[1]);
        }
        s
    }

    pub fn idw(&self) -> IdwOptions {
        IdwOptions { neighbours: self.idw_neighbours, power: self.idw_power }
    }

    pub fn lloyd(&self) -> LloydOptions {
        LloydOptions { max_iterations: self.lloyd_max_iterations, tolerance: self.lloyd_tolerance }
    }

    pub fn build_domain(&self) -> Result<Domain> {
        Ok(match self.domain {
            DomainKind::Sphere => Domain::Sphere(SphericalDomain::new(self.subdivisions, self.grid)?),
            DomainKind::Disk => Domain::Disk(DiskDomain::new(self.disk_grid)?),
        })
    }
}

pub fn parse_domain(s: &str) -> Result<DomainKind> {
    match s {
        "sphere" => Ok(DomainKind::Sphere),
        "disk" => Ok(DomainKind::Disk),
        _ => Err(Error::InvalidArgument(format!("unknown domain '{s}' (sphere or disk)"))),
    }
}

pub fn domain_name(k: DomainKind) -> &'static str {
    match k {
        DomainKind::Sphere => "sphere",
        DomainKind::Disk => "disk",
    }
}

/// Process exit status for an error: 2 for topology and dimension problems
/// (and bad arguments), 3 for numerical failures, 4 for I/O and file format.
pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Topology(_)
        | Error::NonManifold(..)
        | Error::BoundaryEdge(_)
        | Error::ConnectivityMismatch
        | Error::DimMismatch(_)
        | Error::Flip(_)
        | Error::InvalidArgument(_)
        | Error::EmptyPointSet => 2,
        Error::Convergence { .. }
        | Error::Solver(_)
        | Error::DegenerateFace(_)
        | Error::DegenerateVertex(_)
        | Error::FoldedEdge(_)
        | Error::ZeroQuaternion => 3,
        Error::Io(_)
        | Error::Parse { .. }
        | Error::BadMagic
        | Error::UnsupportedVersion(_)
        | Error::Truncated { .. }
        | Error::DimOverflow => 4,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParamDiagnostics {
    pub mean_distortion: f64,
    pub max_distortion: f64,
    pub flipped: usize,
}

impl ParamDiagnostics {
    pub fn of(p: &Parameterization) -> Result<Self> {
        let d = p.face_distortion()?;
        Ok(ParamDiagnostics {
            mean_distortion: d.iter().sum::<f64>() / d.len() as f64,
            max_distortion: d.iter().cloned().fold(0.0, f64::max),
            flipped: p.flipped_faces(),
        })
    }
}

/// Conformal map to the domain, then landmark alignment when landmarks are
/// given (two on the disk, three on the sphere), or Möbius centring on the
/// sphere otherwise.
pub fn parameterize(mesh: &TriMesh, kind: DomainKind, landmarks: Option<&[usize]>) -> Result<Parameterization> {
    match kind {
        DomainKind::Sphere => {
            let p = confmap::sphere_parameterize(mesh)?;
            match landmarks {
                Some(&[a, b, c]) => confmap::sphere_align_landmarks(&p, [a, b, c]),
                Some(l) => Err(Error::InvalidArgument(format!("sphere alignment needs 3 landmarks, got {}", l.len()))),
                None => confmap::mobius_center(&p),
            }
        }
        DomainKind::Disk => {
            let p = confmap::disk_parameterize(mesh)?;
            match landmarks {
                Some(&[u, v]) => confmap::disk_align(&p, u, v),
                Some(l) => Err(Error::InvalidArgument(format!("disk alignment needs 2 landmarks, got {}", l.len()))),
                None => Ok(p),
            }
        }
    }
}

pub fn encode_mesh(
    mesh: &TriMesh,
    cfg: &PipelineConfig,
    landmarks: Option<&[usize]>,
) -> Result<(CurvatureTensor, ParamDiagnostics)> {
    cfg.validate()?;
    let param = parameterize(mesh, cfg.domain, landmarks)?;
    let diag = ParamDiagnostics::of(&param)?;
    let mut t = codec::encode(mesh, &param, &cfg.build_domain()?, cfg.idw())?;
    t.affine = cfg.affine;
    Ok((t, diag))
}

#[derive(Clone, Debug)]
pub struct Reconstruction {
    pub mesh: TriMesh,
    pub param_mesh: TriMesh,
    pub report: ReconstructionReport,
    pub lloyd: LloydReport,
}

/// Remeshes the domain after the density channel, decodes `h` at the face
/// barycenters and runs the spin reconstruction.
pub fn reconstruct_tensor(t: &CurvatureTensor, cfg: &PipelineConfig) -> Result<Reconstruction> {
    cfg.validate()?;
    let dec = Decoder::new(t, cfg.idw())?;
    let density = |p: &Vector3<f64>| dec.sample(p).1.exp();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (param_mesh, lloyd) = cvt::remesh_domain(dec.domain(), &density, cfg.lloyd(), &mut rng)?;
    let h: Vec<f64> = mesh::barycenters(&param_mesh)
        .iter()
        .map(|b| dec.sample(&codec::project_to_domain(t.kind, b)).0)
        .collect();
    let (mesh, report) = spin::reconstruct(&param_mesh, &h, cfg.steps, cfg.area_calibration)?;
    Ok(Reconstruction { mesh, param_mesh, report, lloyd })
}

/// Encode, multiply the density by `factor`, reconstruct.
pub fn remesh(mesh: &TriMesh, factor: f64, cfg: &PipelineConfig) -> Result<Reconstruction> {
    let kind = match mesh.kind() {
        mesh::MeshKind::Sphere => DomainKind::Sphere,
        mesh::MeshKind::Disk => DomainKind::Disk,
        mesh::MeshKind::Other => return Err(Error::Topology("remeshing needs a sphere or disk mesh".into())),
    };
    let cfg = PipelineConfig { domain: kind, ..cfg.clone() };
    let (t, _) = encode_mesh(mesh, &cfg, None)?;
    reconstruct_tensor(&codec::scale_density(&t, factor)?, &cfg)
}

/// `n` points on the surface, faces chosen by area.
pub fn sample_surface<R: Rng>(m: &TriMesh, n: usize, rng: &mut R) -> Result<Vec<Vector3<f64>>> {
    let areas = mesh::face_areas(m)?;
    let pick = WeightedIndex::new(&areas).map_err(|e| Error::InvalidArgument(format!("face areas: {e}")))?;
    Ok((0..n)
        .map(|_| {
            let t = m.triangle(pick.sample(rng));
            let (r1, r2): (f64, f64) = (rng.random(), rng.random());
            let s = r1.sqrt();
            t[0] * (1.0 - s) + t[1] * (s * (1.0 - r2)) + t[2] * (s * r2)
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct Metrics {
    pub willmore_a: f64,
    pub willmore_b: f64,
    /// Only when the meshes share connectivity.
    pub relative_willmore: Option<f64>,
    pub chamfer: f64,
}

impl Metrics {
    pub fn to_table(&self) -> String {
        let mut s = format!("W(a) {:e}\nW(b) {:e}\n", self.willmore_a, self.willmore_b);
        match self.relative_willmore {
            Some(r) => s += &format!("r.W {r:e}\n"),
            None => s += "# r.W omitted: connectivity differs\n",
        }
        s += &format!("chamfer {:e}\n", self.chamfer);
        s
    }
}

/// Willmore energies, relative Willmore energy and the Chamfer distance
/// between `points`-sample clouds (same seed on both meshes).
pub fn metrics(a: &TriMesh, b: &TriMesh, points: usize, seed: u64) -> Result<Metrics> {
    let relative_willmore = if a.faces() == b.faces() { Some(mesh::relative_willmore(a, b)?) } else { None };
    let pa = sample_surface(a, points, &mut ChaCha8Rng::seed_from_u64(seed))?;
    let pb = sample_surface(b, points, &mut ChaCha8Rng::seed_from_u64(seed))?;
    Ok(Metrics {
        willmore_a: mesh::willmore(a)?,
        willmore_b: mesh::willmore(b)?,
        relative_willmore,
        chamfer: mesh::chamfer(&pa, &pb)?,
    })
}

fn bump(u: &Vector3<f64>, a: f64, w: f64) -> Vector3<f64> {
    let u = u.normalize();
    u * (1.0 + a * (w * u.x).sin() * (w * u.y).sin() * (w * u.z).sin())
}

// Area stretch of the bump map at a unit vector, by central differences.
fn bump_jacobian(u: &Vector3<f64>, a: f64, w: f64) -> f64 {
    let t1 = u.cross(&if u.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() }).normalize();
    let t2 = u.cross(&t1);
    let e = 1e-6;
    let d1 = (bump(&(u + t1 * e), a, w) - bump(&(u - t1 * e), a, w)) / (2.0 * e);
    let d2 = (bump(&(u + t2 * e), a, w) - bump(&(u - t2 * e), a, w)) / (2.0 * e);
    d1.cross(&d2).norm()
}

/// A bumpy sphere (`r = 1 + a sin(ωx) sin(ωy) sin(ωz)`) of roughly
/// `n_vertices` vertices whose faces have nearly equal area: a CVT of the
/// pulled-back area density, followed by gradient descent on the variance of
/// log face area with the vertices kept on the sphere.
pub fn balanced_bumpy_sphere(n_vertices: usize, amplitude: f64, freq: f64, seed: u64) -> Result<TriMesh> {
    let (a, w) = (amplitude, freq);
    let fine = mesh::shapes::icosphere(5);
    let total: f64 = mesh::barycenters(&fine)
        .iter()
        .zip(mesh::face_areas(&fine)?)
        .map(|(b, x)| bump_jacobian(b, a, w) * x)
        .sum();
    let density = |p: &Vector3<f64>| n_vertices as f64 * bump_jacobian(p, a, w) / total;
    let domain = Domain::Sphere(SphericalDomain::new(2, 4)?);
    let opts = LloydOptions { max_iterations: 200, tolerance: 1e-6 };
    let (pm, _) = cvt::remesh_domain(&domain, &density, opts, &mut ChaCha8Rng::seed_from_u64(seed))?;

    let embed = |s: &[Vector3<f64>]| pm.with_positions(s.iter().map(|p| bump(p, a, w)).collect());
    let energy = |s: &[Vector3<f64>]| crate::areacal::log_area_variance(&embed(s));
    let mut sp = pm.positions().to_vec();
    let mut e0 = energy(&sp)?;
    let mut eta = 1e-5;
    for _ in 0..400 {
        let x = embed(&sp);
        let areas = mesh::face_areas(&x)?;
        let la: Vec<f64> = areas.iter().map(|v| v.ln()).collect();
        let mean = la.iter().sum::<f64>() / la.len() as f64;
        let mut g = vec![Vector3::zeros(); sp.len()];
        for (f, t) in x.faces().iter().enumerate() {
            let p = x.positions();
            let n = (p[t[1]] - p[t[0]]).cross(&(p[t[2]] - p[t[0]])).normalize();
            let c = (la[f] - mean) / areas[f];
            for k in 0..3 {
                g[t[k]] += n.cross(&(p[t[(k + 2) % 3]] - p[t[(k + 1) % 3]])) * c;
            }
        }
        // Backtracking on the ambient gradient projected to the tangent plane.
        while eta > 1e-14 {
            let trial: Vec<Vector3<f64>> = sp
                .iter()
                .zip(&g)
                .map(|(p, gv)| (p - (gv - p * p.dot(gv)) * eta).normalize())
                .collect();
            let e1 = energy(&trial)?;
            if e1 < e0 {
                (sp, e0) = (trial, e1);
                eta *= 1.2;
                break;
            }
            eta *= 0.5;
        }
    }
    Ok(embed(&sp))
}
