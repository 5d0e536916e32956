//! Conformal parameterization of triangle meshes with discrete Calabi flow.
//!
//! The pipeline: build an inversive distance circle packing metric from the
//! input lengths ([`metric::initial_inversive_metric`]), evolve its conformal
//! factors until the angle-deficit curvature meets a prescribed target
//! ([`flow::run_flow`]), lay the resulting flat metric out in the plane
//! ([`embed::embed`]) and measure how well angles survived
//! ([`analysis::analyze`]).

// `!(a < b)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cli;
pub mod cut;
pub mod embed;
pub mod export;
pub mod flow;
pub mod geometry;
pub mod mesh;
pub mod metric;
pub mod obj;
pub mod pipeline;
pub mod shapes;

pub use analysis::{analyze, ConformalityReport};
pub use cut::{cut_to_disk, CutMesh};
pub use embed::{embed, Parameterization};
pub use flow::{run_flow, BoundaryMode, FlowConfig, FlowKind};
pub use mesh::{Mesh, TopologyReport};
pub use metric::{PackingMetric, Scheme};
