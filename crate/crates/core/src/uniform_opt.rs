//! Optimal uniform quantization.
//!
//! For `K ≥ 2` the MSE-optimal step `ℓ*` is the unique root of
//! `h(ℓ) = A(ℓ) − √(2/π)B(ℓ)`, and at that step `γ = mse`, so the same design
//! also maximizes the GMI at every SNR. One-bit quantizers have
//! `γ ≡ 1 − 2/π` for every step; the MSE-optimal one is `4/√(2π)`.

use serde::Serialize;

use crate::asymptotics::{lhat0, sat_hat};
use crate::error::{Error, Result};
use crate::optim::brent_root;
use crate::par::{map_indexed, Execution};
use crate::quantizer::{make_uniform, UniformDesign};
use crate::rate::{consistency_residual_uniform, gamma_compensated, gmi_from_gamma, Channel, Rate};
use crate::specfun::SQRT_2PI;

/// Largest resolution handled by the design table.
pub const MAX_TABLE_BITS: u32 = 16;

const STEP_TOL: f64 = 1e-12;

/// One row of the optimal uniform design table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UniformDesignRow {
    pub bits: u32,
    pub half_levels: usize,
    pub l_star: f64,
    pub step_star: f64,
    pub mmse: f64,
    /// `ln(2K)/(3K²)`.
    pub mmse_approx: f64,
    pub snr_q_db: f64,
    pub saturation_bits: f64,
    pub saturation_approx_bits: f64,
}

/// MSE-minimizing step of the one-bit quantizer (the half-normal mean, doubled).
pub fn one_bit_mmse_step() -> f64 {
    4.0 / SQRT_2PI
}

/// `ℓ*` for `K ≥ 2` half-levels.
pub fn optimal_step(k: usize) -> Result<f64> {
    if k < 2 {
        return Err(Error::invalid("K", format!("optimal_step needs K >= 2, got {k}")));
    }
    let h = |step: f64| consistency_residual_uniform(k, step);
    let guess = lhat0(k)? / k as f64;
    let (mut lo, mut hi) = (0.5 * guess, 2.0 * guess);
    // h > 0 below the optimum and < 0 above it.
    for _ in 0..60 {
        if h(lo) > 0.0 {
            break;
        }
        lo *= 0.5;
    }
    for _ in 0..60 {
        if h(hi) < 0.0 {
            break;
        }
        hi *= 2.0;
    }
    brent_root(h, lo, hi, STEP_TOL, 200)
}

/// Optimal uniform design for `K ≥ 1`.
pub fn optimal_design(k: usize) -> Result<UniformDesign> {
    let step = if k == 1 { one_bit_mmse_step() } else { optimal_step(k)? };
    UniformDesign::new(k, step)
}

/// Normalized MMSE of uniform quantization, `γ(ℓ*)`.
pub fn mmse_uniform(k: usize) -> Result<f64> {
    let d = optimal_design(k)?;
    gamma_compensated(&d.to_spec()?)
}

pub fn half_levels_for_bits(bits: u32) -> Result<usize> {
    if !(1..=MAX_TABLE_BITS).contains(&bits) {
        return Err(Error::invalid("bits", format!("must be in 1..={MAX_TABLE_BITS}, got {bits}")));
    }
    Ok(1usize << (bits - 1))
}

pub fn table_row(bits: u32) -> Result<UniformDesignRow> {
    let k = half_levels_for_bits(bits)?;
    let design = optimal_design(k)?;
    let mmse = gamma_compensated(&design.to_spec()?)?;
    let kf = k as f64;
    Ok(UniformDesignRow {
        bits,
        half_levels: k,
        l_star: design.loading_factor(),
        step_star: design.step,
        mmse,
        mmse_approx: (2.0 * kf).ln() / (3.0 * kf * kf),
        snr_q_db: -10.0 * mmse.log10(),
        saturation_bits: -mmse.log2(),
        saturation_approx_bits: sat_hat(bits)?,
    })
}

/// Rows for `b = 1..=max_bits`, computed concurrently, in order.
pub fn table(max_bits: u32, exec: Execution) -> Result<Vec<UniformDesignRow>> {
    if !(1..=MAX_TABLE_BITS).contains(&max_bits) {
        return Err(Error::invalid("max_bits", format!("must be in 1..={MAX_TABLE_BITS}, got {max_bits}")));
    }
    map_indexed(max_bits as usize, exec, |i| table_row(i as u32 + 1))
        .into_iter()
        .collect()
}

/// GMI at the optimal loading factor, `ln(1 + snr) − ln(1 + mmse·snr)`.
pub fn max_gmi(bits: u32, ch: Channel) -> Result<Rate> {
    let k = half_levels_for_bits(bits)?;
    Ok(gmi_from_gamma(mmse_uniform(k)?, ch))
}

/// Uniform spec at the optimal step.
pub fn optimal_spec(k: usize) -> Result<crate::QuantizerSpec> {
    let d = optimal_design(k)?;
    make_uniform(k, d.step)
}
