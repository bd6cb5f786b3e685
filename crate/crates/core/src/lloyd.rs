//! Lloyd–Max design and gain sweeps of arbitrary quantizers.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::par::{map_indexed, Execution};
use crate::quantizer::{centroid_levels, QuantizerSpec, ScaleMode};
use crate::rate::{gmi, mse_cells, Channel};
use crate::specfun::gaussian_centroid;
use crate::uniform_opt::optimal_spec;

pub const DEFAULT_TOLERANCE: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LloydResult {
    pub spec: QuantizerSpec,
    pub iterations: usize,
    pub converged: bool,
    /// Largest absolute change of any threshold or level in the last iteration.
    pub final_change: f64,
    /// Normalized MSE after each iteration, starting with the initial design.
    pub mse_history: Vec<f64>,
}

/// One Lloyd iteration: levels to the centroids of the current cells, then
/// thresholds to the midpoints of the new levels. Returns the new spec and the
/// largest parameter change.
pub fn lloyd_step(spec: &QuantizerSpec) -> Result<(QuantizerSpec, f64)> {
    let levels: Vec<f64> = spec.edges().map(|(lo, hi)| gaussian_centroid(lo, hi)).collect();
    let thresholds: Vec<f64> = levels.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    let change = spec
        .levels()
        .iter()
        .zip(&levels)
        .chain(spec.thresholds().iter().zip(&thresholds))
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let next = QuantizerSpec::new(spec.half_levels(), thresholds, levels)?;
    Ok((next, change))
}

/// Runs Lloyd's algorithm for `K` half-levels from the optimal uniform design.
pub fn lloyd_optimize(k: usize, tolerance: f64, max_iter: usize) -> Result<LloydResult> {
    if k == 0 {
        return Err(Error::invalid("K", "must be at least 1"));
    }
    if tolerance.is_nan() || tolerance <= 0.0 {
        return Err(Error::invalid("tolerance", "must be positive"));
    }
    let mut spec = optimal_spec(k)?;
    let mut mse_history = vec![mse_cells(&spec)];
    let mut change = f64::INFINITY;
    for it in 1..=max_iter {
        let (next, c) = lloyd_step(&spec)?;
        spec = next;
        change = c;
        mse_history.push(mse_cells(&spec));
        if change <= tolerance {
            return Ok(LloydResult { spec, iterations: it, converged: true, final_change: change, mse_history });
        }
    }
    Ok(LloydResult { spec, iterations: max_iter, converged: false, final_change: change, mse_history })
}

/// Uniform thresholds with MMSE (centroid) levels.
pub fn equispaced_optimal(step: f64, k: usize) -> Result<QuantizerSpec> {
    centroid_levels(step, k)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbePoint {
    pub scale: f64,
    pub gamma: f64,
    pub mse: f64,
    pub gmi_bits: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsistencyReport {
    pub mode: ScaleMode,
    pub points: Vec<ProbePoint>,
    pub argmax_gmi_scale: f64,
    pub argmin_mse_scale: f64,
}

impl ConsistencyReport {
    /// Whether the GMI-optimal and MSE-optimal gains are the same grid point.
    pub fn coincide(&self) -> bool {
        self.argmax_gmi_scale == self.argmin_mse_scale
    }
}

/// Sweeps an input gain `s` over `scales` and locates the GMI-maximizing and
/// MSE-minimizing gains.
pub fn consistency_probe(
    spec: &QuantizerSpec,
    scales: &[f64],
    ch: Channel,
    mode: ScaleMode,
) -> Result<ConsistencyReport> {
    if scales.is_empty() {
        return Err(Error::invalid("scales", "must not be empty"));
    }
    let points: Vec<ProbePoint> = map_indexed(scales.len(), Execution::Parallel, |i| {
        let s = scales[i];
        let q = spec.scaled(s, mode)?;
        let r = gmi(&q, ch)?;
        Ok(ProbePoint { scale: s, gamma: r.gamma, mse: mse_cells(&q), gmi_bits: r.gmi.bits() })
    })
    .into_iter()
    .collect::<Result<_>>()?;
    let best_gmi = points.iter().max_by(|a, b| a.gmi_bits.total_cmp(&b.gmi_bits)).map(|p| p.scale);
    let best_mse = points.iter().min_by(|a, b| a.mse.total_cmp(&b.mse)).map(|p| p.scale);
    Ok(ConsistencyReport {
        mode,
        argmax_gmi_scale: best_gmi.unwrap_or(f64::NAN),
        argmin_mse_scale: best_mse.unwrap_or(f64::NAN),
        points,
    })
}
