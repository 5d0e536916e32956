//! Command-line front end.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};

use crate::analysis::{analyze_with, HistogramSpec};
use crate::embed::Parameterization;
use crate::export::{emit_checkerboard_svg, RunManifest};
use crate::flow::{run_flow, Acceleration, Backtracking, BoundaryMode, FlowConfig, FlowKind, FlowStatus};
use crate::geometry::{corner_angles, dual_laplacian};
use crate::mesh::Mesh;
use crate::metric::initial_inversive_metric;
use crate::obj::{load_mesh, read_obj, write_obj};
use crate::pipeline::lay_out;
use crate::shapes;

#[derive(Debug, Parser)]
#[command(name = "calabi", version, about = "Conformal mesh parameterization with discrete Calabi flow")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
#[allow(clippy::large_enum_variant)]
pub enum Command {
    /// Flatten a mesh and write UVs, traces and reports.
    Param(ParamArgs),
    /// Measure angle distortion of an OBJ that already has texture coordinates.
    Analyze(AnalyzeArgs),
    /// Write one of the built-in test meshes as OBJ.
    Generate(GenerateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BoundaryArg {
    /// Pin boundary conformal factors, flatten the interior.
    Free,
    /// Map the boundary to a circle.
    Circle,
    /// Polygon with the corner angles given by --corners.
    Rect,
    /// Closed genus-one surface, flattened everywhere and cut to a disk.
    Torus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FlowArg {
    Calabi,
    Ricci,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AccelArg {
    None,
    Cg,
}

#[derive(Debug, Args)]
pub struct ParamArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "free")]
    pub boundary: BoundaryArg,
    #[arg(long, value_enum, default_value = "calabi")]
    pub flow: FlowArg,
    /// Convergence threshold on max |K - K_target| in radians.
    #[arg(long, default_value_t = 1e-8)]
    pub eps: f64,
    #[arg(long = "max-iters", default_value_t = 100_000)]
    pub max_iters: usize,
    /// Initial step size.
    #[arg(long, default_value_t = 0.05)]
    pub step: f64,
    /// Update scheme: plain descent or nonlinear conjugate gradient.
    #[arg(long, value_enum, default_value = "cg")]
    pub accel: AccelArg,
    /// Reject steps that fail to lower the energy (triangle inequality
    /// violations are always rejected).
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    pub backtracking: bool,
    #[arg(long, default_value_t = 0.5)]
    pub shrink: f64,
    #[arg(long = "max-halvings", default_value_t = 40)]
    pub max_halvings: u32,
    /// Corner vertices for `rect`, as `v[:K],...` with 0-based vertex ids
    /// and target curvatures K (default pi/2; `pi/3`, `2pi/3` style allowed).
    #[arg(long)]
    pub corners: Option<String>,
    /// OBJ with normalized UVs.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Flow trace CSV.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Conformality report CSV.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Checkerboard preview SVG.
    #[arg(long)]
    pub svg: Option<PathBuf>,
    #[arg(long, default_value_t = 8)]
    pub cells: usize,
    /// Raw planar coordinates as `vertex,u,v` CSV.
    #[arg(long = "uv-csv")]
    pub uv_csv: Option<PathBuf>,
    /// Final conformal factors and radii as CSV.
    #[arg(long)]
    pub factors: Option<PathBuf>,
    /// Dual Laplacian of the final metric in coordinate format.
    #[arg(long)]
    pub laplacian: Option<PathBuf>,
    /// JSON run manifest, written even when the run fails.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// OBJ with one `vt` per vertex.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub report: PathBuf,
    #[arg(long, default_value_t = 100)]
    pub bins: usize,
    #[arg(long = "hist-lo", default_value_t = 0.5)]
    pub hist_lo: f64,
    #[arg(long = "hist-hi", default_value_t = 1.5)]
    pub hist_hi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ShapeArg {
    Grid,
    Disk,
    Hemisphere,
    Torus,
    SphereMinusFace,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, value_enum)]
    pub shape: ShapeArg,
    /// Resolution: grid side, disk or hemisphere rings, torus segments,
    /// sphere subdivision level.
    #[arg(long, default_value_t = 8)]
    pub size: usize,
    /// Random vertex displacement.
    #[arg(long, default_value_t = 0.0)]
    pub jitter: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

/// Parses a curvature like `1.5708`, `pi`, `pi/2` or `2pi/3`.
pub fn parse_angle(s: &str) -> Result<f64, String> {
    let s = s.trim();
    if let Ok(x) = s.parse::<f64>() {
        return Ok(x);
    }
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim().parse::<f64>().map_err(|_| format!("bad angle {s:?}"))?),
        None => (s, 1.0),
    };
    let factor = match num.strip_suffix("pi").map(|f| f.trim_end_matches('*')) {
        Some("") => 1.0,
        Some(f) => f.parse::<f64>().map_err(|_| format!("bad angle {s:?}"))?,
        None => return Err(format!("bad angle {s:?}")),
    };
    Ok(factor * PI / den)
}

/// Parses `v[:K],...`; a missing `K` means `pi/2`.
pub fn parse_corners(s: &str) -> Result<Vec<(usize, f64)>, String> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| {
            let (v, k) = match t.split_once(':') {
                Some((v, k)) => (v, parse_angle(k)?),
                None => (t, FRAC_PI_2),
            };
            let v = v.trim().parse::<usize>().map_err(|_| format!("bad corner vertex {v:?}"))?;
            Ok((v, k))
        })
        .collect()
}

fn flow_config(args: &ParamArgs, mesh: &Mesh) -> Result<FlowConfig, String> {
    let boundary = match args.boundary {
        BoundaryArg::Free => BoundaryMode::Free,
        BoundaryArg::Circle => BoundaryMode::Circular,
        BoundaryArg::Rect => {
            let spec = args.corners.as_deref().ok_or("--boundary rect requires --corners")?;
            BoundaryMode::FixedCorners(parse_corners(spec)?)
        }
        BoundaryArg::Torus => {
            let topo = mesh.topology();
            if !topo.is_closed() || topo.genus != 1 {
                return Err(format!(
                    "--boundary torus needs a closed genus-one mesh, got genus {} with {} boundary loops",
                    topo.genus, topo.boundary_loops
                ));
            }
            BoundaryMode::ClosedGenusOne
        }
    };
    if args.corners.is_some() && args.boundary != BoundaryArg::Rect {
        warn!("--corners is ignored unless --boundary rect");
    }
    Ok(FlowConfig {
        kind: match args.flow {
            FlowArg::Calabi => FlowKind::Calabi,
            FlowArg::Ricci => FlowKind::Ricci,
        },
        boundary,
        epsilon: args.eps,
        max_iterations: args.max_iters,
        step: args.step,
        backtracking: Backtracking { enabled: args.backtracking, shrink: args.shrink, max_halvings: args.max_halvings },
        acceleration: match args.accel {
            AccelArg::None => Acceleration::None,
            AccelArg::Cg => Acceleration::ConjugateGradient,
        },
    })
}

fn write_file(path: &Path, contents: &[u8], manifest: &mut RunManifest) -> Result<(), String> {
    fs::write(path, contents).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    manifest.outputs.push(path.display().to_string());
    Ok(())
}

fn write_with<F>(path: &Path, manifest: &mut RunManifest, f: F) -> Result<(), String>
where
    F: FnOnce(&mut Vec<u8>) -> std::io::Result<()>,
{
    let mut buf = Vec::new();
    f(&mut buf).map_err(|e| format!("cannot format {}: {e}", path.display()))?;
    write_file(path, &buf, manifest)
}

fn param_inner(args: &ParamArgs, manifest: &mut RunManifest) -> Result<(), String> {
    let mesh = load_mesh(&args.input).map_err(|e| format!("{}: {e}", args.input.display()))?;
    let topo = mesh.topology();
    manifest.topology = Some(topo);
    info!(
        "loaded {}: {} vertices, {} faces, chi = {}, genus {}, {} boundary loops",
        args.input.display(),
        topo.vertices,
        topo.faces,
        topo.euler_characteristic,
        topo.genus,
        topo.boundary_loops
    );
    let config = flow_config(args, &mesh)?;
    manifest.config = Some(config.clone());

    let metric = initial_inversive_metric(&mesh).map_err(|e| format!("initial metric: {e}"))?;
    let outcome = run_flow(&mesh, &metric, &config).map_err(|e| format!("flow: {e}"))?;
    manifest.iterations = outcome.iterations;
    manifest.final_max_residual = Some(outcome.state.max_residual());
    manifest.status = match outcome.status {
        FlowStatus::Converged => "converged",
        FlowStatus::MaxIterations => "max_iterations",
    }
    .into();
    if let Some(path) = &args.trace {
        write_with(path, manifest, |b| outcome.trace.write_csv(b))?;
    }
    if let Some(path) = &args.factors {
        write_with(path, manifest, |b| {
            writeln!(b, "vertex,u,radius")?;
            for (v, &u) in outcome.metric.factors().iter().enumerate() {
                writeln!(b, "{v},{u:.17e},{:.17e}", u.exp())?;
            }
            Ok(())
        })?;
    }
    if let Some(path) = &args.laplacian {
        let angles = corner_angles(&mesh, &outcome.lengths).map_err(|e| e.to_string())?;
        let lap = dual_laplacian(&mesh, &outcome.metric, &outcome.lengths, &angles).map_err(|e| e.to_string())?;
        write_with(path, manifest, |b| lap.write_coordinate(&mesh, b))?;
    }
    if !outcome.converged() {
        return Err(format!(
            "flow did not converge in {} iterations (max residual {:e} >= {:e})",
            outcome.iterations,
            outcome.state.max_residual(),
            config.epsilon
        ));
    }

    let layout = lay_out(&mesh, &outcome).map_err(|e| e.to_string())?;
    let flat_mesh = layout.mesh(&mesh);
    let (uv, scale) = layout.param.normalized();
    manifest.uv_scale = Some(scale);
    manifest.embedding_inconsistency = Some(layout.param.max_inconsistency);
    if let Some(path) = &args.out {
        write_file(path, write_obj(flat_mesh, Some(&uv)).as_bytes(), manifest)?;
    }
    if let Some(path) = &args.uv_csv {
        write_with(path, manifest, |b| layout.param.write_csv(b))?;
    }
    if let Some(path) = &args.report {
        write_with(path, manifest, |b| layout.report.write_csv(b))?;
    }
    if let Some(path) = &args.svg {
        let svg = emit_checkerboard_svg(&layout.param, flat_mesh.faces(), args.cells).map_err(|e| e.to_string())?;
        write_file(path, svg.as_bytes(), manifest)?;
    }
    println!(
        "converged after {} iterations, max residual {:e}, mean relative angle error {:.6e}, flipped faces {}",
        outcome.iterations,
        outcome.state.max_residual(),
        layout.report.mean_relative_error,
        layout.report.flipped_faces
    );
    Ok(())
}

/// Runs `param`; returns the process exit code.
pub fn cmd_param(args: &ParamArgs) -> i32 {
    let start = Instant::now();
    let mut manifest = RunManifest::new(args.input.display().to_string());
    let result = param_inner(args, &mut manifest);
    if let Err(e) = &result {
        eprintln!("error: {e}");
        manifest.error = Some(e.clone());
    }
    manifest.wall_time_seconds = start.elapsed().as_secs_f64();
    if let Some(path) = &args.manifest {
        manifest.outputs.push(path.display().to_string());
        if let Err(e) = fs::write(path, manifest.to_json()) {
            eprintln!("error: cannot write {}: {e}", path.display());
            return 1;
        }
    }
    if result.is_ok() {
        0
    } else {
        1
    }
}

fn analyze_inner(args: &AnalyzeArgs) -> Result<(), String> {
    let data = read_obj(&args.input).map_err(|e| format!("{}: {e}", args.input.display()))?;
    let uv = data.vertex_tex_coords().map_err(|e| format!("{}: {e}", args.input.display()))?;
    let mesh = data.into_mesh().map_err(|e| format!("{}: {e}", args.input.display()))?;
    let param = Parameterization { embedded: vec![true; uv.len()], coords: uv, seam: None, max_inconsistency: 0.0 };
    let spec = HistogramSpec { lo: args.hist_lo, hi: args.hist_hi, bins: args.bins };
    let report = analyze_with(&mesh, &param, spec).map_err(|e| e.to_string())?;
    let mut buf = Vec::new();
    report.write_csv(&mut buf).map_err(|e| e.to_string())?;
    fs::write(&args.report, buf).map_err(|e| format!("cannot write {}: {e}", args.report.display()))?;
    println!(
        "mean relative angle error {:.6e}, max {:.6e}, flipped faces {}",
        report.mean_relative_error, report.max_relative_error, report.flipped_faces
    );
    Ok(())
}

pub fn cmd_analyze(args: &AnalyzeArgs) -> i32 {
    match analyze_inner(args) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

pub fn cmd_generate(args: &GenerateArgs) -> i32 {
    let n = args.size.max(1);
    let mesh = match args.shape {
        ShapeArg::Grid => shapes::grid(n.max(2), n.max(2), 1.0 / (n.max(2) - 1) as f64),
        ShapeArg::Disk => shapes::disk(n, 1.0),
        ShapeArg::Hemisphere => shapes::hemisphere(n),
        ShapeArg::Torus => shapes::torus(n.max(3), (n / 2).max(3), 2.0, 1.0),
        ShapeArg::SphereMinusFace => shapes::sphere_minus_face(n),
    };
    let mesh = if args.jitter > 0.0 { shapes::jitter(&mesh, args.jitter, args.seed) } else { mesh };
    match fs::write(&args.out, write_obj(&mesh, None)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: cannot write {}: {e}", args.out.display());
            1
        }
    }
}

pub fn run(cli: &Cli) -> i32 {
    match &cli.command {
        Command::Param(a) => cmd_param(a),
        Command::Analyze(a) => cmd_analyze(a),
        Command::Generate(a) => cmd_generate(a),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn angles() {
        assert_eq!(parse_angle("0.5").unwrap(), 0.5);
        assert_eq!(parse_angle("pi").unwrap(), PI);
        assert_eq!(parse_angle("pi/2").unwrap(), FRAC_PI_2);
        assert!((parse_angle("2pi/3").unwrap() - 2.0 * PI / 3.0).abs() < 1e-15);
        assert!((parse_angle("2*pi/3").unwrap() - 2.0 * PI / 3.0).abs() < 1e-15);
        assert!(parse_angle("tau").is_err());
        assert!(parse_angle("pi/x").is_err());
    }

    #[test]
    fn corners() {
        let c = parse_corners("0,4:pi/2, 24:1.5,20").unwrap();
        assert_eq!(c, vec![(0, FRAC_PI_2), (4, FRAC_PI_2), (24, 1.5), (20, FRAC_PI_2)]);
        assert!(parse_corners("a:1").is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
