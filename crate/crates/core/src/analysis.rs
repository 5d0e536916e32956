//! Angle and area distortion of a parameterization.
//!
//! The angle ratio of a corner is its planar angle divided by its angle on the
//! original surface, so values above 1 mean the corner opened up.

use std::io::{self, Write};

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::embed::{doubled_signed_area, Parameterization};
use crate::geometry::angle_from_lengths;
use crate::mesh::{heron_area, Mesh};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("vertex {vertex} has no planar position")]
    Unembedded { vertex: usize },
    #[error("expected {expected} planar positions, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("corner {corner} of face {face} has zero angle on the original surface")]
    ZeroAngle { face: usize, corner: usize },
    #[error("histogram needs at least one bin and lo < hi")]
    BadHistogram,
    #[error("cannot sample {requested} of {available} corners")]
    SampleTooLarge { requested: usize, available: usize },
}

/// Uniform bins over `[lo, hi)` plus one underflow and one overflow count.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<usize>,
    pub underflow: usize,
    pub overflow: usize,
}

impl Histogram {
    pub fn new(lo: f64, hi: f64, bins: usize) -> Result<Self, AnalysisError> {
        if bins == 0 || !(lo < hi) {
            return Err(AnalysisError::BadHistogram);
        }
        Ok(Self { lo, hi, counts: vec![0; bins], underflow: 0, overflow: 0 })
    }

    pub fn add(&mut self, x: f64) {
        if x < self.lo {
            self.underflow += 1;
        } else if x >= self.hi {
            self.overflow += 1;
        } else {
            let bins = self.counts.len();
            let k = ((x - self.lo) / (self.hi - self.lo) * bins as f64) as usize;
            self.counts[k.min(bins - 1)] += 1;
        }
    }

    /// Lower edge of bin `k`; `edge(bins)` is `hi`.
    pub fn edge(&self, k: usize) -> f64 {
        self.lo + (self.hi - self.lo) * k as f64 / self.counts.len() as f64
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum::<usize>() + self.underflow + self.overflow
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistogramSpec {
    pub lo: f64,
    pub hi: f64,
    pub bins: usize,
}

impl Default for HistogramSpec {
    fn default() -> Self {
        Self { lo: 0.5, hi: 1.5, bins: 100 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConformalityReport {
    /// Per corner, indexed `3 * face + corner`.
    pub angle_ratios: Vec<f64>,
    pub relative_errors: Vec<f64>,
    pub mean_relative_error: f64,
    pub max_relative_error: f64,
    pub histogram: Histogram,
    /// Planar area over original area, per face.
    pub area_ratios: Vec<f64>,
    pub flipped_faces: usize,
}

impl ConformalityReport {
    pub fn mean_area_ratio(&self) -> f64 {
        self.area_ratios.iter().sum::<f64>() / self.area_ratios.len() as f64
    }

    /// Population standard deviation of the area ratios.
    pub fn area_ratio_stddev(&self) -> f64 {
        let mean = self.mean_area_ratio();
        let var = self.area_ratios.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / self.area_ratios.len() as f64;
        var.sqrt()
    }

    /// Histogram rows `bin_lo,bin_hi,count` (underflow and overflow as
    /// open-ended bins) followed by `metric,value` summary rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        let h = &self.histogram;
        writeln!(out, "# angle ratio = planar angle / original angle")?;
        writeln!(out, "bin_lo,bin_hi,count")?;
        for (k, c) in h.counts.iter().enumerate() {
            writeln!(out, "{},{},{c}", h.edge(k), h.edge(k + 1))?;
        }
        writeln!(out, "-inf,{},{}", h.lo, h.underflow)?;
        writeln!(out, "{},inf,{}", h.hi, h.overflow)?;
        writeln!(out, "metric,value")?;
        writeln!(out, "mean_rel_angle_error,{:.17e}", self.mean_relative_error)?;
        writeln!(out, "max_rel_angle_error,{:.17e}", self.max_relative_error)?;
        writeln!(out, "flipped_faces,{}", self.flipped_faces)?;
        writeln!(out, "mean_area_ratio,{:.17e}", self.mean_area_ratio())?;
        writeln!(out, "area_ratio_stddev,{:.17e}", self.area_ratio_stddev())?;
        Ok(())
    }
}

// Same operation order as the mesh's 3D lengths, so a flat mesh measured
// against its own coordinates gives bit-identical angles.
fn planar_distance(a: [f64; 2], b: [f64; 2]) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    (dx * dx + dy * dy + 0.0).sqrt()
}

/// Compares the corner angles of `param` with those of the mesh's original
/// edge lengths, using the default histogram.
pub fn analyze(mesh: &Mesh, param: &Parameterization) -> Result<ConformalityReport, AnalysisError> {
    analyze_with(mesh, param, HistogramSpec::default())
}

pub fn analyze_with(
    mesh: &Mesh,
    param: &Parameterization,
    spec: HistogramSpec,
) -> Result<ConformalityReport, AnalysisError> {
    if param.coords.len() != mesh.vertex_count() {
        return Err(AnalysisError::DimensionMismatch { expected: mesh.vertex_count(), got: param.coords.len() });
    }
    if let Some(vertex) = param.embedded.iter().position(|&e| !e) {
        return Err(AnalysisError::Unembedded { vertex });
    }
    let mut histogram = Histogram::new(spec.lo, spec.hi, spec.bins)?;
    let original = mesh.original_lengths();
    let mut angle_ratios = Vec::with_capacity(3 * mesh.face_count());
    let mut relative_errors = Vec::with_capacity(3 * mesh.face_count());
    let mut area_ratios = Vec::with_capacity(mesh.face_count());
    let mut flipped_faces = 0;
    for (f, face) in mesh.faces().iter().enumerate() {
        let l3 = mesh.face_edges(f).map(|e| original[e]);
        let p = face.map(|v| param.coords[v]);
        // Side c joins corners c+1 and c+2, as for the mesh's own lengths.
        let l2 = [0, 1, 2].map(|c| planar_distance(p[(c + 1) % 3], p[(c + 2) % 3]));
        for c in 0..3 {
            let (a, b) = ((c + 1) % 3, (c + 2) % 3);
            let t3 = angle_from_lengths(l3[c], l3[a], l3[b]);
            if !(t3 > 0.0) {
                return Err(AnalysisError::ZeroAngle { face: f, corner: c });
            }
            let t2 = angle_from_lengths(l2[c], l2[a], l2[b]);
            let ratio = t2 / t3;
            angle_ratios.push(ratio);
            relative_errors.push((t2 - t3).abs() / t3);
            histogram.add(ratio);
        }
        let signed = 0.5 * doubled_signed_area(p[0], p[1], p[2]);
        if signed <= 0.0 {
            flipped_faces += 1;
        }
        area_ratios.push(signed / heron_area(l3[0], l3[1], l3[2]));
    }
    let mean_relative_error = relative_errors.iter().sum::<f64>() / relative_errors.len() as f64;
    let max_relative_error = relative_errors.iter().copied().fold(0.0, f64::max);
    Ok(ConformalityReport {
        angle_ratios,
        relative_errors,
        mean_relative_error,
        max_relative_error,
        histogram,
        area_ratios,
        flipped_faces,
    })
}

/// `n` distinct corners drawn without replacement, as `(corner, relative
/// error)` pairs in draw order. The same seed gives the same sample.
pub fn sample_corners(report: &ConformalityReport, n: usize, seed: u64) -> Result<Vec<(usize, f64)>, AnalysisError> {
    let available = report.relative_errors.len();
    if n > available {
        return Err(AnalysisError::SampleTooLarge { requested: n, available });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(index::sample(&mut rng, available, n).into_iter().map(|c| (c, report.relative_errors[c])).collect())
}
