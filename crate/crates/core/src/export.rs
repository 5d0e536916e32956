//! Checkerboard SVG preview and the run manifest written by the CLI.

use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::embed::Parameterization;
use crate::flow::FlowConfig;
use crate::mesh::TopologyReport;

#[derive(Debug, Error)]
pub enum ExportError {
    #[error("vertex {vertex} has no planar position")]
    Unembedded { vertex: usize },
    #[error("checkerboard needs at least one cell")]
    NoCells,
}

const SVG_SIZE: f64 = 1024.0;
const LIGHT: &str = "#f2f2f2";
const DARK: &str = "#303030";

/// Checkerboard parity of a point in normalized UV space.
pub fn checker_parity(uv: [f64; 2], cells: usize) -> usize {
    let n = cells as f64;
    let s = (uv[0] * n).floor() as i64 + (uv[1] * n).floor() as i64;
    s.rem_euclid(2) as usize
}

/// Draws every face as a polygon in normalized UV space, filled light or dark
/// by the checkerboard parity of its centroid. V points up.
pub fn emit_checkerboard_svg(
    param: &Parameterization,
    faces: &[[usize; 3]],
    cells: usize,
) -> Result<String, ExportError> {
    if cells == 0 {
        return Err(ExportError::NoCells);
    }
    if let Some(vertex) = param.embedded.iter().position(|&e| !e) {
        return Err(ExportError::Unembedded { vertex });
    }
    let (uv, _) = param.normalized();
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{s}" height="{s}" viewBox="0 0 {s} {s}">"#,
        s = SVG_SIZE
    );
    let _ = writeln!(out, r#"<g stroke="none">"#);
    for face in faces {
        let p = face.map(|v| uv[v]);
        let centroid = [(p[0][0] + p[1][0] + p[2][0]) / 3.0, (p[0][1] + p[1][1] + p[2][1]) / 3.0];
        let fill = if checker_parity(centroid, cells) == 0 { LIGHT } else { DARK };
        let pts: Vec<String> =
            p.iter().map(|q| format!("{:.4},{:.4}", q[0] * SVG_SIZE, (1.0 - q[1]) * SVG_SIZE)).collect();
        let _ = writeln!(out, r#"<polygon points="{}" fill="{fill}"/>"#, pts.join(" "));
    }
    out.push_str("</g>\n</svg>\n");
    Ok(out)
}

/// Record of one CLI run, written even when the run fails.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub input: String,
    pub config: Option<FlowConfig>,
    pub topology: Option<TopologyReport>,
    /// `converged`, `max_iterations` or `failed`.
    pub status: String,
    pub iterations: usize,
    pub final_max_residual: Option<f64>,
    pub uv_scale: Option<f64>,
    pub embedding_inconsistency: Option<f64>,
    pub outputs: Vec<String>,
    pub error: Option<String>,
    pub wall_time_seconds: f64,
}

impl RunManifest {
    pub fn new(input: impl Into<String>) -> Self {
        Self {
            input: input.into(),
            config: None,
            topology: None,
            status: "failed".into(),
            iterations: 0,
            final_max_residual: None,
            uv_scale: None,
            embedding_inconsistency: None,
            outputs: Vec::new(),
            error: None,
            wall_time_seconds: 0.0,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn param(coords: Vec<[f64; 2]>) -> Parameterization {
        let n = coords.len();
        Parameterization { coords, embedded: vec![true; n], seam: None, max_inconsistency: 0.0 }
    }

    fn fills(svg: &str) -> Vec<&str> {
        svg.lines().filter_map(|l| l.split("fill=\"").nth(1)).map(|s| &s[..7]).collect()
    }

    #[test]
    fn single_face_one_cell() {
        let p = param(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]);
        let svg = emit_checkerboard_svg(&p, &[[0, 1, 2]], 1).unwrap();
        assert_eq!(svg.matches("<polygon").count(), 1);
        assert_eq!(fills(&svg), vec![LIGHT]);
    }

    #[test]
    fn unit_grid_alternates() {
        let n = 8;
        let mut coords = Vec::new();
        for j in 0..=n {
            for i in 0..=n {
                coords.push([i as f64 / n as f64, j as f64 / n as f64]);
            }
        }
        let mut faces = Vec::new();
        let mut expected = Vec::new();
        for j in 0..n {
            for i in 0..n {
                let v = j * (n + 1) + i;
                faces.push([v, v + 1, v + n + 2]);
                faces.push([v, v + n + 2, v + n + 1]);
                let fill = if (i + j) % 2 == 0 { LIGHT } else { DARK };
                expected.extend([fill, fill]);
            }
        }
        let svg = emit_checkerboard_svg(&param(coords), &faces, n).unwrap();
        assert_eq!(fills(&svg), expected);
    }

    #[test]
    fn output_is_deterministic() {
        let p = param(vec![[0.1, 0.2], [3.0, 0.5], [1.0, 2.0]]);
        let a = emit_checkerboard_svg(&p, &[[0, 1, 2]], 4).unwrap();
        let b = emit_checkerboard_svg(&p, &[[0, 1, 2]], 4).unwrap();
        assert_eq!(a.as_bytes(), b.as_bytes());
    }

    #[test]
    fn errors() {
        let mut p = param(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]);
        assert!(matches!(emit_checkerboard_svg(&p, &[[0, 1, 2]], 0), Err(ExportError::NoCells)));
        p.embedded[2] = false;
        assert!(matches!(emit_checkerboard_svg(&p, &[[0, 1, 2]], 2), Err(ExportError::Unembedded { vertex: 2 })));
    }

    #[test]
    fn manifest_is_valid_json_on_failure() {
        let mut m = RunManifest::new("missing.obj");
        m.error = Some("cannot read".into());
        let v: serde_json::Value = serde_json::from_str(&m.to_json()).unwrap();
        assert_eq!(v["status"], "failed");
        assert_eq!(v["error"], "cannot read");
    }
}
