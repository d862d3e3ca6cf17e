//! `spinshape` command-line tool.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use spinshape::codec::{self, CurvatureTensor};
use spinshape::confmap::DomainKind;
use spinshape::mesh::{self, TriMesh};
use spinshape::pipeline::{self, PipelineConfig};
use spinshape::{Error, Result};

const AFTER_HELP: &str = "\
Files:
  meshes       OBJ or OFF in (chosen by extension), OBJ out
  tensors      .cbr binary curvature/density tensors
  landmarks    one vertex index per line, '#' comments
  config       flat 'key = value' lines, '#' comments; command-line flags win
  reports      plain-text tables, '#'-prefixed header lines

Config keys:
  domain subdivisions grid disk_grid idw_neighbours idw_power lloyd_tolerance
  lloyd_max_iterations steps seed area_calibration
  affine_scale_h affine_scale_d affine_offset_h affine_offset_d

Exit status:
  0 success, 2 topology/dimension/argument error, 3 numerical failure,
  4 I/O or file-format error";

#[derive(Parser)]
#[command(name = "spinshape", version, about = "Encode surfaces as curvature and density tensors, and rebuild them", after_help = AFTER_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArg {
    /// key = value configuration file; explicit flags override it
    #[arg(long)]
    config: Option<PathBuf>,
}

impl ConfigArg {
    fn load(&self) -> Result<PipelineConfig> {
        match &self.config {
            Some(p) => PipelineConfig::load(p),
            None => Ok(PipelineConfig::default()),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Conformally map a mesh to the sphere or disk and write its tensor
    Encode {
        #[arg(long = "in")]
        input: PathBuf,
        /// sphere or disk
        #[arg(long)]
        domain: Option<String>,
        /// landmark vertices: 3 on the sphere, 2 on the disk
        #[arg(long)]
        landmarks: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        config: ConfigArg,
    },
    /// Remesh the domain from a tensor and rebuild the surface
    Reconstruct {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// skip the final area calibration
        #[arg(long)]
        no_area_cal: bool,
        #[arg(long)]
        out: PathBuf,
        /// step report table
        #[arg(long)]
        report: Option<PathBuf>,
        #[command(flatten)]
        config: ConfigArg,
    },
    /// Rebuild a mesh with its vertex density multiplied by a factor
    Remesh {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        factor: f64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        config: ConfigArg,
    },
    /// Linear interpolation (1 − t)·a + t·b of two tensors
    Interp {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long)]
        t: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Parameterize and align a mesh; writes the mesh laid out on the domain
    Align {
        #[arg(long = "in")]
        input: PathBuf,
        /// sphere or disk
        #[arg(long)]
        domain: String,
        #[arg(long)]
        landmarks: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Willmore energies, relative Willmore energy and Chamfer distance
    Metrics {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        /// surface samples per mesh
        #[arg(long, default_value_t = 10_000)]
        points: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn load_landmarks(p: &Option<PathBuf>) -> Result<Option<Vec<usize>>> {
    p.as_ref().map(mesh::load_landmarks).transpose()
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    Ok(std::fs::write(path, text)?)
}

fn print_reconstruction(r: &pipeline::Reconstruction) {
    let rep = &r.report;
    println!("vertices {} faces {}", r.mesh.n_vertices(), r.mesh.n_faces());
    println!("lloyd iterations {} converged {}", r.lloyd.iterations, r.lloyd.converged);
    println!("target W {:.6} final W {:.6}", rep.target_willmore, rep.final_willmore);
    println!("final r.W {:.6e}", rep.final_relative_willmore);
    println!("log-area variance {:.6e}", rep.final_log_area_variance);
    let bad = rep.increasing_steps();
    if bad > 0 {
        println!("warning: r.W increased in {bad} step(s)");
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Encode { input, domain, landmarks, out, config } => {
            let mut cfg = config.load()?;
            if let Some(d) = domain {
                cfg.domain = pipeline::parse_domain(&d)?;
            }
            let m = mesh::load_mesh(&input)?;
            let lm = load_landmarks(&landmarks)?;
            let (t, diag) = pipeline::encode_mesh(&m, &cfg, lm.as_deref())?;
            codec::write_cbr(&t, &out)?;
            println!("domain {} dims {:?}", pipeline::domain_name(cfg.domain), t.dims);
            println!(
                "distortion mean {:.6} max {:.6} flipped {}",
                diag.mean_distortion, diag.max_distortion, diag.flipped
            );
        }
        Command::Reconstruct { input, steps, seed, no_area_cal, out, report, config } => {
            let mut cfg = config.load()?;
            if let Some(s) = steps {
                cfg.steps = s;
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if no_area_cal {
                cfg.area_calibration = false;
            }
            let t = codec::read_cbr(&input)?;
            cfg.domain = t.kind;
            let r = pipeline::reconstruct_tensor(&t, &cfg)?;
            mesh::save_obj(&r.mesh, &out)?;
            if let Some(p) = report {
                write_text(&p, &r.report.to_table())?;
            }
            print_reconstruction(&r);
        }
        Command::Remesh { input, factor, out, seed, config } => {
            if !(factor > 0.0 && factor.is_finite()) {
                return Err(Error::InvalidArgument(format!("factor must be positive, got {factor}")));
            }
            let mut cfg = config.load()?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let m = mesh::load_mesh(&input)?;
            let r = pipeline::remesh(&m, factor, &cfg)?;
            mesh::save_obj(&r.mesh, &out)?;
            println!("input vertices {} target {:.0}", m.n_vertices(), factor * m.n_vertices() as f64);
            print_reconstruction(&r);
        }
        Command::Interp { a, b, t, out } => {
            let (ta, tb): (CurvatureTensor, CurvatureTensor) = (codec::read_cbr(&a)?, codec::read_cbr(&b)?);
            codec::write_cbr(&codec::lerp(&ta, &tb, t)?, &out)?;
        }
        Command::Align { input, domain, landmarks, out } => {
            let kind: DomainKind = pipeline::parse_domain(&domain)?;
            let m = mesh::load_mesh(&input)?;
            let lm = load_landmarks(&landmarks)?;
            let p = pipeline::parameterize(&m, kind, lm.as_deref())?;
            let diag = pipeline::ParamDiagnostics::of(&p)?;
            mesh::save_obj(&p.param_mesh(), &out)?;
            println!(
                "distortion mean {:.6} max {:.6} flipped {}",
                diag.mean_distortion, diag.max_distortion, diag.flipped
            );
        }
        Command::Metrics { a, b, points, seed } => {
            let (ma, mb): (TriMesh, TriMesh) = (mesh::load_mesh(&a)?, mesh::load_mesh(&b)?);
            print!("{}", pipeline::metrics(&ma, &mb, points, seed)?.to_table());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(pipeline::exit_code(&e))
        }
    }
}
