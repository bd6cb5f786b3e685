//! Symmetric scalar quantizers acting on a unit-variance input.
//!
//! A quantizer with `2K` output points `±y_1, …, ±y_K` is described by its `K − 1`
//! positive thresholds `ℓ_1 < … < ℓ_{K−1}` (with implicit `ℓ_0 = 0`,
//! `ℓ_K = ∞`) and its `K` nonnegative levels. The cell `[ℓ_{k−1}, ℓ_k)` of `|v|`
//! maps to `y_k·sgn(v)`, with `sgn(0) = +1`.
//!
//! Gain control is not part of the spec: thresholds are already expressed in
//! units of the input standard deviation. Gain sweeps go through
//! [`QuantizerSpec::scaled`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, SpecError};
use crate::specfun::gaussian_centroid;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec", into = "RawSpec")]
pub struct QuantizerSpec {
    thresholds: Vec<f64>,
    levels: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawSpec {
    #[serde(rename = "K")]
    k: usize,
    thresholds: Vec<f64>,
    levels: Vec<f64>,
}

impl TryFrom<RawSpec> for QuantizerSpec {
    type Error = SpecError;
    fn try_from(raw: RawSpec) -> std::result::Result<Self, SpecError> {
        QuantizerSpec::new(raw.k, raw.thresholds, raw.levels)
    }
}

impl From<QuantizerSpec> for RawSpec {
    fn from(spec: QuantizerSpec) -> Self {
        RawSpec {
            k: spec.half_levels(),
            thresholds: spec.thresholds,
            levels: spec.levels,
        }
    }
}

/// How a gain change is applied to a quantizer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScaleMode {
    /// Thresholds move, output points stay fixed.
    ThresholdsOnly,
    /// Thresholds and levels move together; this is the quantizer composed with
    /// a gain and its inverse, and leaves `γ` depending on the thresholds alone.
    #[default]
    ThresholdsAndLevels,
}

impl QuantizerSpec {
    /// Builds and validates a spec with `k` half-levels.
    pub fn new(k: usize, thresholds: Vec<f64>, levels: Vec<f64>) -> std::result::Result<Self, SpecError> {
        let spec = Self { thresholds, levels };
        spec.validate_with(k)?;
        Ok(spec)
    }

    fn validate_with(&self, k: usize) -> std::result::Result<(), SpecError> {
        if k == 0 {
            return Err(SpecError::ZeroHalfLevels);
        }
        if self.levels.len() != k {
            return Err(SpecError::LevelCountMismatch {
                expected: k,
                found: self.levels.len(),
            });
        }
        if self.thresholds.len() != k - 1 {
            return Err(SpecError::ThresholdCountMismatch {
                k,
                expected: k - 1,
                found: self.thresholds.len(),
            });
        }
        for (i, &t) in self.thresholds.iter().enumerate() {
            if !(t > 0.0 && t.is_finite()) {
                return Err(SpecError::NonPositiveThreshold { index: i });
            }
            if i > 0 && t <= self.thresholds[i - 1] {
                return Err(SpecError::NonIncreasingThresholds { index: i });
            }
        }
        for (i, &y) in self.levels.iter().enumerate() {
            if !(y >= 0.0 && y.is_finite()) {
                return Err(SpecError::InvalidLevel { index: i });
            }
        }
        Ok(())
    }

    /// Re-checks the invariants, returning the first violation.
    pub fn validate(&self) -> std::result::Result<(), SpecError> {
        self.validate_with(self.levels.len())
    }

    /// `K`, half the number of output points.
    pub fn half_levels(&self) -> usize {
        self.levels.len()
    }

    /// Resolution `b = log2(2K)`.
    pub fn resolution_bits(&self) -> f64 {
        (2.0 * self.half_levels() as f64).log2()
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    /// Cell edges `ℓ_0 = 0, ℓ_1, …, ℓ_{K−1}, ℓ_K = ∞`.
    pub fn edges(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        (0..self.half_levels()).map(move |k| self.cell(k))
    }

    /// Edges of cell `k` (zero-based).
    pub fn cell(&self, k: usize) -> (f64, f64) {
        let lo = if k == 0 { 0.0 } else { self.thresholds[k - 1] };
        let hi = self.thresholds.get(k).copied().unwrap_or(f64::INFINITY);
        (lo, hi)
    }

    /// Applies the quantizer to a normalized input.
    pub fn quantize(&self, v: f64) -> f64 {
        let a = v.abs();
        let k = self.thresholds.partition_point(|&t| t <= a);
        let y = self.levels[k];
        if v < 0.0 {
            -y
        } else {
            y
        }
    }

    /// The same quantizer seen through an input gain `s`: thresholds scale by `s`,
    /// and levels too under [`ScaleMode::ThresholdsAndLevels`].
    pub fn scaled(&self, s: f64, mode: ScaleMode) -> Result<Self> {
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::invalid("scale", format!("must be positive and finite, got {s}")));
        }
        let thresholds = self.thresholds.iter().map(|t| t * s).collect();
        let levels = match mode {
            ScaleMode::ThresholdsOnly => self.levels.clone(),
            ScaleMode::ThresholdsAndLevels => self.levels.iter().map(|y| y * s).collect(),
        };
        Ok(Self::new(self.half_levels(), thresholds, levels)?)
    }

    /// Same thresholds, new levels.
    pub fn with_levels(&self, levels: Vec<f64>) -> std::result::Result<Self, SpecError> {
        Self::new(self.half_levels(), self.thresholds.clone(), levels)
    }
}

fn check_design(k: usize, step: f64) -> Result<()> {
    if k == 0 {
        return Err(SpecError::ZeroHalfLevels.into());
    }
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::invalid("step", format!("must be positive and finite, got {step}")));
    }
    Ok(())
}

/// Uniform quantizer with thresholds `kℓ` and mid-rise levels `(k − ½)ℓ`.
pub fn make_uniform(k: usize, step: f64) -> Result<QuantizerSpec> {
    check_design(k, step)?;
    let thresholds = (1..k).map(|i| i as f64 * step).collect();
    let levels = (0..k).map(|i| (i as f64 + 0.5) * step).collect();
    Ok(QuantizerSpec::new(k, thresholds, levels)?)
}

/// Uniform thresholds `kℓ` with each level at the Gaussian centroid of its cell.
pub fn centroid_levels(step: f64, k: usize) -> Result<QuantizerSpec> {
    check_design(k, step)?;
    let thresholds: Vec<f64> = (1..k).map(|i| i as f64 * step).collect();
    let levels = (0..k)
        .map(|i| {
            let hi = if i + 1 < k { (i + 1) as f64 * step } else { f64::INFINITY };
            gaussian_centroid(i as f64 * step, hi)
        })
        .collect();
    Ok(QuantizerSpec::new(k, thresholds, levels)?)
}

/// A uniform design `(K, ℓ)` with loading factor `L = Kℓ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformDesign {
    pub half_levels: usize,
    pub step: f64,
}

impl UniformDesign {
    pub fn new(half_levels: usize, step: f64) -> Result<Self> {
        check_design(half_levels, step)?;
        Ok(Self { half_levels, step })
    }

    pub fn from_loading_factor(half_levels: usize, loading_factor: f64) -> Result<Self> {
        Self::new(half_levels, loading_factor / half_levels.max(1) as f64)
    }

    pub fn loading_factor(&self) -> f64 {
        self.half_levels as f64 * self.step
    }

    pub fn to_spec(&self) -> Result<QuantizerSpec> {
        make_uniform(self.half_levels, self.step)
    }
}
