use std::fmt::Write as _;

use super::{dirac_energy, integrate_positions, solve_spin, transform_edges};
use crate::areacal;
use crate::error::{Error, Result};
use crate::mesh::{self, MeshKind, TriMesh};

#[derive(Clone, Debug, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    pub t: f64,
    pub lambda: f64,
    /// Relative Willmore energy to the target after this step.
    pub relative_willmore: f64,
    pub residual: f64,
    pub iterations: usize,
    pub poisson_residual: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CalibrationRecord {
    pub lambda: f64,
    pub iterations: usize,
    pub residual: f64,
    pub relative_willmore_before: f64,
    pub relative_willmore_after: f64,
    pub log_area_variance_before: f64,
    pub log_area_variance_after: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReconstructionReport {
    pub target_willmore: f64,
    pub steps: Vec<StepRecord>,
    pub final_willmore: f64,
    pub final_relative_willmore: f64,
    /// Variance of the log face areas of the result.
    pub final_log_area_variance: f64,
    pub calibration: Option<CalibrationRecord>,
    pub warnings: Vec<String>,
}

impl ReconstructionReport {
    /// Steps whose relative Willmore energy went up.
    pub fn increasing_steps(&self) -> usize {
        self.steps.windows(2).filter(|w| w[1].relative_willmore > w[0].relative_willmore).count()
    }

    /// Whitespace-separated table, one row per step, preceded by `#` summary
    /// lines. Floats use shortest round-trip formatting so [`Self::parse`]
    /// recovers the report exactly.
    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# target_willmore {:e}", self.target_willmore);
        let _ = writeln!(s, "# final_willmore {:e}", self.final_willmore);
        let _ = writeln!(s, "# final_relative_willmore {:e}", self.final_relative_willmore);
        let _ = writeln!(s, "# final_log_area_variance {:e}", self.final_log_area_variance);
        if let Some(c) = &self.calibration {
            let _ = writeln!(
                s,
                "# calibration {:e} {} {:e} {:e} {:e} {:e} {:e}",
                c.lambda,
                c.iterations,
                c.residual,
                c.relative_willmore_before,
                c.relative_willmore_after,
                c.log_area_variance_before,
                c.log_area_variance_after
            );
        }
        for w in &self.warnings {
            let _ = writeln!(s, "# warning {w}");
        }
        let _ = writeln!(s, "step t lambda r.W residual iterations poisson");
        for r in &self.steps {
            let _ = writeln!(
                s,
                "{} {:e} {:e} {:e} {:e} {} {:e}",
                r.step, r.t, r.lambda, r.relative_willmore, r.residual, r.iterations, r.poisson_residual
            );
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let bad = |line: usize, msg: &str| Error::Parse { line, msg: msg.to_string() };
        let mut rep = ReconstructionReport {
            target_willmore: f64::NAN,
            steps: Vec::new(),
            final_willmore: f64::NAN,
            final_relative_willmore: f64::NAN,
            final_log_area_variance: f64::NAN,
            calibration: None,
            warnings: Vec::new(),
        };
        for (ln, line) in text.lines().enumerate() {
            let ln = ln + 1;
            let num = |t: Option<&str>| -> Result<f64> {
                t.and_then(|t| t.parse().ok()).ok_or_else(|| bad(ln, "bad number"))
            };
            let int = |t: Option<&str>| -> Result<usize> {
                t.and_then(|t| t.parse().ok()).ok_or_else(|| bad(ln, "bad integer"))
            };
            if let Some(rest) = line.strip_prefix("# ") {
                let (key, val) = rest.split_once(' ').unwrap_or((rest, ""));
                let mut it = val.split_whitespace();
                match key {
                    "target_willmore" => rep.target_willmore = num(it.next())?,
                    "final_willmore" => rep.final_willmore = num(it.next())?,
                    "final_relative_willmore" => rep.final_relative_willmore = num(it.next())?,
                    "final_log_area_variance" => rep.final_log_area_variance = num(it.next())?,
                    "calibration" => {
                        rep.calibration = Some(CalibrationRecord {
                            lambda: num(it.next())?,
                            iterations: int(it.next())?,
                            residual: num(it.next())?,
                            relative_willmore_before: num(it.next())?,
                            relative_willmore_after: num(it.next())?,
                            log_area_variance_before: num(it.next())?,
                            log_area_variance_after: num(it.next())?,
                        })
                    }
                    "warning" => rep.warnings.push(val.to_string()),
                    _ => return Err(bad(ln, "unknown summary key")),
                }
            } else if line.starts_with("step") || line.trim().is_empty() {
                continue;
            } else {
                let mut it = line.split_whitespace();
                rep.steps.push(StepRecord {
                    step: int(it.next())?,
                    t: num(it.next())?,
                    lambda: num(it.next())?,
                    relative_willmore: num(it.next())?,
                    residual: num(it.next())?,
                    iterations: int(it.next())?,
                    poisson_residual: num(it.next())?,
                });
            }
        }
        Ok(rep)
    }
}

/// Flows `param_mesh` towards the prescribed mean curvature half-density.
///
/// Step `k` of `steps` targets `h + (target − h) / (steps − k + 1)`, an equal
/// share of the deficit still remaining, so the last step aims at the target
/// itself. Each step solves the regularized Dirac eigenproblem on the current
/// mesh, transforms the edges and integrates positions. Optionally one area
/// calibration follows. The result has unit area and its area centroid at the
/// origin.
pub fn reconstruct(
    param_mesh: &TriMesh,
    target_h: &[f64],
    steps: usize,
    with_area_cal: bool,
) -> Result<(TriMesh, ReconstructionReport)> {
    if steps == 0 {
        return Err(Error::InvalidArgument("steps must be at least 1".into()));
    }
    if param_mesh.kind() == MeshKind::Other {
        return Err(Error::Topology("reconstruction needs a sphere or disk mesh".into()));
    }
    if target_h.len() != param_mesh.n_faces() {
        return Err(Error::DimMismatch(format!("{} targets for {} faces", target_h.len(), param_mesh.n_faces())));
    }
    let target_willmore: f64 = target_h.iter().map(|h| h * h).sum();
    let rel = |m: &TriMesh| -> Result<f64> {
        Ok(mesh::relative_willmore_fields(&mesh::mean_curvature_half_density(m)?, target_h))
    };

    let mut current = mesh::normalize_unit_area(param_mesh);
    let mut records = Vec::with_capacity(steps);
    let mut warnings = Vec::new();
    let mut rising = 0;
    let mut prev_rw = rel(&current)?;
    for k in 1..=steps {
        let t = 1.0 / (steps - k + 1) as f64;
        let energy = dirac_energy(&current, target_h, t)?;
        let sol = solve_spin(&energy, &mesh::mass_matrix(&current)?)?;
        let edges = transform_edges(&current, &sol.field)?;
        let (next, poisson) = integrate_positions(&current, &edges)?;
        current = mesh::normalize_unit_area(&next);
        let rw = rel(&current)?;
        rising = if rw >= prev_rw { rising + 1 } else { 0 };
        if rising == 3 {
            warnings.push(format!("relative Willmore did not decrease for 3 steps ending at step {k}"));
        }
        prev_rw = rw;
        records.push(StepRecord {
            step: k,
            t,
            lambda: sol.lambda,
            relative_willmore: rw,
            residual: sol.residual,
            iterations: sol.iterations,
            poisson_residual: poisson,
        });
    }

    let mut calibration = None;
    if with_area_cal {
        let before_rw = prev_rw;
        let before_var = areacal::log_area_variance(&current)?;
        let u = areacal::equal_area_factors(&current)?;
        let (cal, sol) = areacal::calibrate(&current, &u)?;
        current = cal;
        let after_rw = rel(&current)?;
        calibration = Some(CalibrationRecord {
            lambda: sol.lambda,
            iterations: sol.iterations,
            residual: sol.residual,
            relative_willmore_before: before_rw,
            relative_willmore_after: after_rw,
            log_area_variance_before: before_var,
            log_area_variance_after: areacal::log_area_variance(&current)?,
        });
    }

    let report = ReconstructionReport {
        target_willmore,
        final_willmore: mesh::willmore(&current)?,
        final_relative_willmore: rel(&current)?,
        final_log_area_variance: areacal::log_area_variance(&current)?,
        steps: records,
        calibration,
        warnings,
    };
    Ok((current, report))
}
