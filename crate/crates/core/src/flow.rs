//! Curvature flows on circle packing metrics.
//!
//! Both flows move the conformal factors `u` towards a prescribed curvature
//! vector `K_target`. The Calabi flow descends the energy
//! `C(u) = sum_i (K_target_i - K_i)^2` along `du = L (K_target - K)`, where
//! `L = dK/du` is the dual Laplacian; the Ricci flow uses
//! `du = K_target - K` directly. Steps are explicit Euler steps
//! `u <- u + step * du` guarded by backtracking.

use std::f64::consts::PI;
use std::io::{self, Write};

use log::{debug, info};
use serde::Serialize;
use thiserror::Error;

use crate::geometry::{
    corner_angles, dual_laplacian, vertex_curvatures, CornerAngles, CurvatureState, DualLaplacian, GeometryError,
};
use crate::mesh::Mesh;
use crate::metric::{edge_lengths, PackingMetric};

#[derive(Debug, Error)]
pub enum FlowError {
    #[error("invalid flow configuration: {0}")]
    InvalidConfig(String),
    #[error("corner vertex {vertex} is not on the boundary")]
    CornerNotOnBoundary { vertex: usize },
    #[error("corner vertex {vertex} is out of range")]
    CornerOutOfRange { vertex: usize },
    #[error("corner targets sum to {sum}, expected 2*pi")]
    CornerSum { sum: f64 },
    #[error("circular boundary needs exactly one boundary loop, found {count}")]
    BoundaryLoops { count: usize },
    #[error("inadmissible targets: {0}")]
    Inadmissible(String),
    #[error("initial metric is invalid: {0}")]
    InvalidStart(GeometryError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("iteration {iteration}: step could not be repaired (last step {step:e}, {reason})")]
    Unrepairable { iteration: usize, step: f64, reason: String },
    #[error("flow did not converge in {iterations} iterations (max residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("expected {expected} values, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FlowKind {
    Calabi,
    Ricci,
}

/// How boundary curvature targets are prescribed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum BoundaryMode {
    /// Zero everywhere except the listed `(vertex, target)` corners, which
    /// must lie on the boundary and sum to `2 pi`.
    FixedCorners(Vec<(usize, f64)>),
    /// Boundary targets proportional to the adjacent boundary lengths,
    /// recomputed after every step.
    Circular,
    /// Boundary factors are frozen; only interior curvature is driven to 0.
    Free,
    /// Closed genus-one surface flattened everywhere.
    ClosedGenusOne,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Backtracking {
    /// Also reject steps that do not decrease the energy. Steps that break a
    /// triangle inequality are always rejected.
    pub enabled: bool,
    pub shrink: f64,
    pub max_halvings: u32,
}

impl Default for Backtracking {
    fn default() -> Self {
        Self { enabled: true, shrink: 0.5, max_halvings: 40 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Acceleration {
    None,
    /// Nonlinear conjugate gradient with a line search on the energy.
    ConjugateGradient,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowConfig {
    pub kind: FlowKind,
    pub boundary: BoundaryMode,
    /// Convergence threshold on `max |K - K_target|`, in radians.
    pub epsilon: f64,
    pub max_iterations: usize,
    pub step: f64,
    pub backtracking: Backtracking,
    pub acceleration: Acceleration,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self {
            kind: FlowKind::Calabi,
            boundary: BoundaryMode::Free,
            epsilon: 1e-6,
            max_iterations: 100_000,
            step: 0.05,
            backtracking: Backtracking::default(),
            acceleration: Acceleration::None,
        }
    }
}

impl FlowConfig {
    pub fn validate(&self) -> Result<(), FlowError> {
        if !(self.epsilon > 0.0) {
            return Err(FlowError::InvalidConfig(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if !(self.step > 0.0) {
            return Err(FlowError::InvalidConfig(format!("step must be positive, got {}", self.step)));
        }
        let shrink = self.backtracking.shrink;
        if !(shrink > 0.0 && shrink < 1.0) {
            return Err(FlowError::InvalidConfig(format!("shrink factor must lie in (0, 1), got {shrink}")));
        }
        if let BoundaryMode::FixedCorners(corners) = &self.boundary {
            check_corner_sum(corners)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceRecord {
    pub iteration: usize,
    pub energy: f64,
    pub max_residual: f64,
    pub step: f64,
}

/// One record per accepted step.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct FlowTrace {
    pub records: Vec<TraceRecord>,
}

impl FlowTrace {
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "iter,energy,max_residual,step")?;
        for r in &self.records {
            writeln!(out, "{},{:.16e},{:.16e},{:.16e}", r.iteration, r.energy, r.max_residual, r.step)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FlowStatus {
    Converged,
    MaxIterations,
}

#[derive(Debug, Clone)]
pub struct FlowOutcome {
    pub metric: PackingMetric,
    pub trace: FlowTrace,
    pub status: FlowStatus,
    pub iterations: usize,
    /// Curvature state of the returned metric.
    pub state: CurvatureState,
    /// Edge lengths of the returned metric.
    pub lengths: Vec<f64>,
}

impl FlowOutcome {
    pub fn converged(&self) -> bool {
        self.status == FlowStatus::Converged
    }

    /// Turns a non-converged outcome into [`FlowError::NotConverged`].
    pub fn into_converged(self) -> Result<Self, FlowError> {
        match self.status {
            FlowStatus::Converged => Ok(self),
            FlowStatus::MaxIterations => {
                Err(FlowError::NotConverged { iterations: self.iterations, residual: self.state.max_residual() })
            }
        }
    }
}

pub fn calabi_energy(state: &CurvatureState) -> f64 {
    state.target.iter().zip(&state.current).map(|(t, k)| (t - k) * (t - k)).sum()
}

/// `du = L^T (K_target - K)`; `L` is symmetric so this is `L (K_target - K)`.
pub fn calabi_direction(mesh: &Mesh, laplacian: &DualLaplacian, state: &CurvatureState) -> Result<Vec<f64>, FlowError> {
    let n = mesh.vertex_count();
    for len in [laplacian.diagonal.len(), state.current.len(), state.target.len()] {
        if len != n {
            return Err(FlowError::DimensionMismatch { expected: n, got: len });
        }
    }
    Ok(laplacian.apply(mesh, &state.residual()))
}

/// `du = K_target - K`.
pub fn ricci_direction(state: &CurvatureState) -> Vec<f64> {
    state.residual()
}

fn check_corner_sum(corners: &[(usize, f64)]) -> Result<(), FlowError> {
    let sum: f64 = corners.iter().map(|c| c.1).sum();
    if (sum - 2.0 * PI).abs() > 1e-12 {
        return Err(FlowError::CornerSum { sum });
    }
    Ok(())
}

/// Zero targets except at the listed boundary corners.
pub fn targets_fixed(mesh: &Mesh, corners: &[(usize, f64)]) -> Result<Vec<f64>, FlowError> {
    let mut target = vec![0.0; mesh.vertex_count()];
    for &(v, k) in corners {
        if v >= mesh.vertex_count() {
            return Err(FlowError::CornerOutOfRange { vertex: v });
        }
        if !mesh.is_boundary_vertex(v) {
            return Err(FlowError::CornerNotOnBoundary { vertex: v });
        }
        target[v] = k;
    }
    check_corner_sum(corners)?;
    Ok(target)
}

fn single_loop(mesh: &Mesh) -> Result<Vec<usize>, FlowError> {
    let mut loops = mesh.boundary_loops();
    if loops.len() != 1 {
        return Err(FlowError::BoundaryLoops { count: loops.len() });
    }
    Ok(loops.pop().unwrap_or_default())
}

fn circular_targets_on_loop(mesh: &Mesh, boundary: &[usize], lengths: &[f64]) -> Vec<f64> {
    let m = boundary.len();
    let side: Vec<f64> = (0..m)
        .map(|k| {
            let e = mesh
                .edge_between(boundary[k], boundary[(k + 1) % m])
                .expect("consecutive boundary vertices share an edge");
            lengths[e]
        })
        .collect();
    let total: f64 = side.iter().sum();
    let c = PI / total;
    let mut target = vec![0.0; mesh.vertex_count()];
    for k in 0..m {
        target[boundary[k]] = c * (side[(k + m - 1) % m] + side[k]);
    }
    target
}

/// Boundary targets `K_i = c (l_prev + l_next)` with `c = pi / (boundary
/// length)`, so they sum to `2 pi`; zero in the interior.
pub fn targets_circular(mesh: &Mesh, lengths: &[f64]) -> Result<Vec<f64>, FlowError> {
    let boundary = single_loop(mesh)?;
    Ok(circular_targets_on_loop(mesh, &boundary, lengths))
}

/// Zeroes the update on boundary vertices.
pub fn apply_free_boundary(du: &mut [f64], mesh: &Mesh) {
    for (v, d) in du.iter_mut().enumerate() {
        if mesh.is_boundary_vertex(v) {
            *d = 0.0;
        }
    }
}

/// Lengths, angles and curvature of one metric.
struct Evaluation {
    lengths: Vec<f64>,
    angles: CornerAngles,
    state: CurvatureState,
    energy: f64,
}

enum Targets {
    Constant(Vec<f64>),
    Circular(Vec<usize>),
    Free,
}

impl Targets {
    /// Energy of a trial point as judged by the step that produced it.
    /// Circular targets move with the metric, so the trial is measured
    /// against the targets in force when the step was taken.
    fn trial_energy(&self, current: &CurvatureState, trial: &Evaluation) -> f64 {
        match self {
            Targets::Circular(_) => {
                current.target.iter().zip(&trial.state.current).map(|(t, k)| (t - k) * (t - k)).sum()
            }
            _ => trial.energy,
        }
    }

    fn for_curvature(&self, mesh: &Mesh, lengths: &[f64], curvature: &[f64]) -> Vec<f64> {
        match self {
            Targets::Constant(t) => t.clone(),
            Targets::Circular(boundary) => circular_targets_on_loop(mesh, boundary, lengths),
            Targets::Free => {
                curvature.iter().enumerate().map(|(v, &k)| if mesh.is_boundary_vertex(v) { k } else { 0.0 }).collect()
            }
        }
    }
}

fn evaluate(mesh: &Mesh, metric: &PackingMetric, targets: &Targets) -> Result<Evaluation, GeometryError> {
    let lengths = edge_lengths(mesh, metric)?;
    let angles = corner_angles(mesh, &lengths)?;
    let current = vertex_curvatures(mesh, &angles);
    let target = targets.for_curvature(mesh, &lengths, &current);
    let state = CurvatureState::new(current, target);
    let energy = calabi_energy(&state);
    Ok(Evaluation { lengths, angles, state, energy })
}

fn admissible_targets(mesh: &Mesh, mode: &BoundaryMode) -> Result<Targets, FlowError> {
    let topo = mesh.topology();
    let two_pi_chi = 2.0 * PI * topo.euler_characteristic as f64;
    match mode {
        BoundaryMode::FixedCorners(corners) => {
            let t = targets_fixed(mesh, corners)?;
            if (2.0 * PI - two_pi_chi).abs() > 1e-12 {
                return Err(FlowError::Inadmissible(format!(
                    "corner targets sum to 2*pi but the mesh has Euler characteristic {}",
                    topo.euler_characteristic
                )));
            }
            Ok(Targets::Constant(t))
        }
        BoundaryMode::Circular => {
            let boundary = single_loop(mesh)?;
            if topo.euler_characteristic != 1 {
                return Err(FlowError::Inadmissible("circular boundary requires a disk".into()));
            }
            Ok(Targets::Circular(boundary))
        }
        BoundaryMode::Free => Ok(Targets::Free),
        BoundaryMode::ClosedGenusOne => {
            if !topo.is_closed() || topo.genus != 1 {
                return Err(FlowError::Inadmissible(format!(
                    "flat targets need a closed genus-one mesh (genus {}, {} boundary loops)",
                    topo.genus, topo.boundary_loops
                )));
            }
            Ok(Targets::Constant(vec![0.0; mesh.vertex_count()]))
        }
    }
}

/// Subtracts the mean factor over interior vertices from every factor.
fn mean_center(mesh: &Mesh, u: &mut [f64]) {
    let (sum, count) = u
        .iter()
        .enumerate()
        .filter(|&(v, _)| !mesh.is_boundary_vertex(v))
        .fold((0.0, 0usize), |(s, c), (_, x)| (s + x, c + 1));
    if count == 0 {
        return;
    }
    let mean = sum / count as f64;
    for x in u {
        *x -= mean;
    }
}

fn direction(
    mesh: &Mesh,
    config: &FlowConfig,
    metric: &PackingMetric,
    eval: &Evaluation,
) -> Result<Vec<f64>, FlowError> {
    let mut du = match config.kind {
        FlowKind::Calabi => {
            let lap = dual_laplacian(mesh, metric, &eval.lengths, &eval.angles)?;
            calabi_direction(mesh, &lap, &eval.state)?
        }
        FlowKind::Ricci => ricci_direction(&eval.state),
    };
    if config.boundary == BoundaryMode::Free {
        apply_free_boundary(&mut du, mesh);
    }
    Ok(du)
}

/// `u + t * dir`, mean-centered unless the boundary is free, and evaluated.
/// Returns the trial and its energy as judged by the current step, or the
/// reason it is invalid.
fn try_step(
    mesh: &Mesh,
    targets: &Targets,
    center: bool,
    metric: &PackingMetric,
    eval: &Evaluation,
    dir: &[f64],
    t: f64,
) -> Result<(PackingMetric, Evaluation, f64), String> {
    let mut trial = metric.clone();
    for (u, d) in trial.factors_mut().iter_mut().zip(dir) {
        *u += t * d;
    }
    if center {
        mean_center(mesh, trial.factors_mut());
    }
    let te = evaluate(mesh, &trial, targets).map_err(|e| e.to_string())?;
    let energy = targets.trial_energy(&eval.state, &te);
    Ok((trial, te, energy))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Search direction and step memory of the conjugate gradient variant.
struct Conjugate {
    direction: Vec<f64>,
    gradient: Vec<f64>,
}

/// Runs the flow from `metric` until `max |K - K_target| < epsilon` or the
/// iteration budget is spent.
///
/// Each candidate step is mean-centered (except with a free boundary, whose
/// factors are pinned) and evaluated; it is shrunk while it breaks a
/// triangle inequality or, with backtracking enabled, fails to lower the
/// energy. A step that cannot be repaired within the configured number of
/// shrinks aborts the flow. After an accepted step the next one starts from
/// twice the accepted size, capped at the configured step.
///
/// With [`Acceleration::ConjugateGradient`] the update direction is combined
/// with the previous search direction (Polak-Ribiere, restarted whenever it
/// stops being a descent direction) and the step comes from a parabolic line
/// search on the energy; steps still must lower the energy.
pub fn run_flow(mesh: &Mesh, metric: &PackingMetric, config: &FlowConfig) -> Result<FlowOutcome, FlowError> {
    config.validate()?;
    let targets = admissible_targets(mesh, &config.boundary)?;
    let center = config.boundary != BoundaryMode::Free;
    let conjugate = config.acceleration == Acceleration::ConjugateGradient;
    let mut metric = metric.clone();
    if center {
        mean_center(mesh, metric.factors_mut());
    }
    let mut eval = evaluate(mesh, &metric, &targets).map_err(FlowError::InvalidStart)?;
    let mut trace = FlowTrace::default();
    let mut step = config.step;
    let mut memory: Option<Conjugate> = None;
    let mut iterations = 0;
    let mut status = FlowStatus::MaxIterations;

    loop {
        if eval.state.max_residual() < config.epsilon {
            status = FlowStatus::Converged;
            break;
        }
        if iterations >= config.max_iterations {
            break;
        }
        let du = direction(mesh, config, &metric, &eval)?;

        let accepted = if conjugate {
            // Energy gradient is -2 L (K_target - K), masked like the update.
            let gradient = match config.kind {
                FlowKind::Calabi => du.clone(),
                FlowKind::Ricci => {
                    let lap = dual_laplacian(mesh, &metric, &eval.lengths, &eval.angles)?;
                    let mut g = calabi_direction(mesh, &lap, &eval.state)?;
                    if config.boundary == BoundaryMode::Free {
                        apply_free_boundary(&mut g, mesh);
                    }
                    g
                }
            };
            let mut dir = du.clone();
            if let Some(prev) = &memory {
                let denom = dot(&prev.gradient, &prev.gradient);
                let beta = if denom > 0.0 {
                    (dot(&gradient, &gradient) - dot(&gradient, &prev.gradient)).max(0.0) / denom
                } else {
                    0.0
                };
                for (d, p) in dir.iter_mut().zip(&prev.direction) {
                    *d += beta * p;
                }
                if dot(&dir, &gradient) <= 0.0 {
                    dir.clone_from(&du);
                }
            }
            let slope = -2.0 * dot(&dir, &gradient);
            let result =
                line_search(mesh, &targets, center, config, &metric, &eval, &dir, slope, &mut step, iterations)?;
            memory = Some(Conjugate { direction: dir, gradient });
            result
        } else {
            let mut halvings = 0;
            loop {
                let reason = match try_step(mesh, &targets, center, &metric, &eval, &du, step) {
                    Ok((trial, te, energy)) if !config.backtracking.enabled || energy < eval.energy => {
                        break (trial, te);
                    }
                    Ok((_, _, energy)) => format!("energy {energy:e} did not decrease from {:e}", eval.energy),
                    Err(reason) => reason,
                };
                halvings += 1;
                if halvings > config.backtracking.max_halvings {
                    return Err(FlowError::Unrepairable { iteration: iterations, step, reason });
                }
                step *= config.backtracking.shrink;
            }
        };

        let (trial, te) = accepted;
        metric = trial;
        eval = te;
        iterations += 1;
        trace.records.push(TraceRecord {
            iteration: iterations,
            energy: eval.energy,
            max_residual: eval.state.max_residual(),
            step,
        });
        if iterations % 1000 == 0 {
            debug!(
                "iteration {iterations}: energy {:e}, max residual {:e}, step {step:e}",
                eval.energy,
                eval.state.max_residual()
            );
        }
        if !conjugate {
            step = (step / config.backtracking.shrink).min(config.step);
        }
    }

    info!(
        "{:?} flow finished after {iterations} iterations: {:?}, max residual {:e}",
        config.kind,
        status,
        eval.state.max_residual()
    );
    Ok(FlowOutcome { metric, trace, status, iterations, state: eval.state, lengths: eval.lengths })
}

/// Step along `dir` chosen from a parabola through the energy at 0 (value
/// and `slope`) and at the trial step. `step` holds the initial trial and
/// receives the accepted step.
#[allow(clippy::too_many_arguments)]
fn line_search(
    mesh: &Mesh,
    targets: &Targets,
    center: bool,
    config: &FlowConfig,
    metric: &PackingMetric,
    eval: &Evaluation,
    dir: &[f64],
    slope: f64,
    step: &mut f64,
    iteration: usize,
) -> Result<(PackingMetric, Evaluation), FlowError> {
    let e0 = eval.energy;
    let mut t = *step;
    let mut halvings = 0;
    loop {
        let reason = match try_step(mesh, targets, center, metric, eval, dir, t) {
            Ok((trial, te, e1)) => {
                let curvature = (e1 - e0 - slope * t) / (t * t);
                let mut best = (e1 < e0).then_some((trial, te, e1, t));
                if curvature > 0.0 {
                    let t_min = (-slope / (2.0 * curvature)).clamp(0.1 * t, 10.0 * t);
                    if let Ok((trial, te, e2)) = try_step(mesh, targets, center, metric, eval, dir, t_min) {
                        if e2 < e0 && best.as_ref().is_none_or(|b| e2 < b.2) {
                            best = Some((trial, te, e2, t_min));
                        }
                    }
                }
                match best {
                    Some((trial, te, _, t)) => {
                        *step = t;
                        return Ok((trial, te));
                    }
                    None => format!("energy {e1:e} did not decrease from {e0:e}"),
                }
            }
            Err(reason) => reason,
        };
        halvings += 1;
        if halvings > config.backtracking.max_halvings {
            return Err(FlowError::Unrepairable { iteration, step: t, reason });
        }
        t *= config.backtracking.shrink;
    }
}
