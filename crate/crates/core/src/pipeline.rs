//! End-to-end parameterization: initial metric, flow, cut, layout, analysis.

use thiserror::Error;

use crate::analysis::{analyze, AnalysisError, ConformalityReport};
use crate::cut::{cut_to_disk, CutError, CutMesh};
use crate::embed::{embed, EmbedError, Parameterization};
use crate::flow::{run_flow, FlowConfig, FlowError, FlowOutcome};
use crate::mesh::Mesh;
use crate::metric::{initial_inversive_metric, MetricError};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("initial metric: {0}")]
    Metric(#[from] MetricError),
    #[error("flow: {0}")]
    Flow(#[from] FlowError),
    #[error("cut: {0}")]
    Cut(#[from] CutError),
    #[error("embedding: {0}")]
    Embed(#[from] EmbedError),
    #[error("analysis: {0}")]
    Analysis(#[from] AnalysisError),
}

/// A flat metric laid out in the plane.
#[derive(Debug, Clone)]
pub struct Layout {
    /// Present when the input was closed and had to be cut open.
    pub cut: Option<CutMesh>,
    /// Flat edge lengths of the embedded mesh.
    pub lengths: Vec<f64>,
    pub param: Parameterization,
    pub report: ConformalityReport,
}

impl Layout {
    /// The mesh the coordinates belong to: the cut copy for closed inputs,
    /// the input itself otherwise.
    pub fn mesh<'a>(&'a self, input: &'a Mesh) -> &'a Mesh {
        self.cut.as_ref().map_or(input, |c| &c.mesh)
    }
}

/// Embeds the flat metric of a finished flow, cutting closed meshes to a
/// disk first, and measures the resulting angle distortion.
pub fn lay_out(mesh: &Mesh, outcome: &FlowOutcome) -> Result<Layout, PipelineError> {
    let (cut, lengths) = if mesh.has_boundary() {
        (None, outcome.lengths.clone())
    } else {
        let cut = cut_to_disk(mesh)?;
        let lengths = cut.lift_edge_data(&outcome.lengths);
        (Some(cut), lengths)
    };
    let target = cut.as_ref().map_or(mesh, |c| &c.mesh);
    let mut param = embed(target, &lengths)?;
    param.seam = cut.as_ref().map(|c| c.vertex_origin.clone());
    let report = analyze(target, &param)?;
    Ok(Layout { cut, lengths, param, report })
}

/// Runs the whole pipeline and requires the flow to converge.
pub fn parameterize(mesh: &Mesh, config: &FlowConfig) -> Result<(FlowOutcome, Layout), PipelineError> {
    let metric = initial_inversive_metric(mesh)?;
    let outcome = run_flow(mesh, &metric, config)?.into_converged()?;
    let layout = lay_out(mesh, &outcome)?;
    Ok((outcome, layout))
}
