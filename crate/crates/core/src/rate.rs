//! Exact rate quantities for a quantizer on the Gaussian channel.
//!
//! For a symmetric quantizer `q` the GMI of nearest-neighbour decoding with a
//! Gaussian codebook depends on `q` only through
//!
//! ```text
//! A = √(2π) Σ y_k (φ(ℓ_{k−1}) − φ(ℓ_k)),    B = π Σ y_k² (Q(ℓ_{k−1}) − Q(ℓ_k)),
//! ```
//!
//! via `γ = 1 − A²/B`: `I = ln(1 + snr) − ln(1 + γ·snr)`. The normalized MSE
//! is `1 − (2/π)(√(2π)A − B)`, and `mse − γ = (A − √(2/π)B)²/B`.

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::numeric::DoubleDouble as Dd;
use crate::quantizer::{QuantizerSpec, UniformDesign};
use crate::specfun::{centered_second_moment, gaussian_mass, phi, phi_diff, q_func, SQRT_2PI, SQRT_2_OVER_PI};

const LN_2: f64 = std::f64::consts::LN_2;
const DD_PI: Dd = Dd { hi: std::f64::consts::PI, lo: 1.224_646_799_147_353_2e-16 };
const DD_SQRT_2PI: Dd = Dd { hi: SQRT_2PI, lo: -1.832_857_998_045_916_7e-16 };

/// An information rate, stored in nats per complex channel use.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct Rate(f64);

impl Rate {
    pub const ZERO: Rate = Rate(0.0);

    pub fn from_nats(nats: f64) -> Self {
        Rate(nats)
    }

    pub fn from_bits(bits: f64) -> Self {
        Rate(bits * LN_2)
    }

    pub fn nats(self) -> f64 {
        self.0
    }

    pub fn bits(self) -> f64 {
        self.0 / LN_2
    }
}

impl Serialize for Rate {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Rate", 2)?;
        st.serialize_field("bits", &self.bits())?;
        st.serialize_field("nats", &self.nats())?;
        st.end()
    }
}

/// Receiver front-end SNR `|h|²σ_x²/σ²` on a linear scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Channel {
    snr: f64,
}

impl Channel {
    pub fn new(snr: f64) -> Result<Self> {
        if !(snr > 0.0 && snr.is_finite()) {
            return Err(Error::invalid("snr", format!("must be positive and finite, got {snr}")));
        }
        Ok(Self { snr })
    }

    pub fn from_db(snr_db: f64) -> Result<Self> {
        Self::new(crate::db_to_linear(snr_db))
    }

    pub fn snr(&self) -> f64 {
        self.snr
    }

    pub fn snr_db(&self) -> f64 {
        crate::linear_to_db(self.snr)
    }

    /// Unquantized capacity `ln(1 + snr)`.
    pub fn capacity(&self) -> Rate {
        Rate(self.snr.ln_1p())
    }
}

/// Everything rate-related about one (quantizer, channel) pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateReport {
    pub snr: f64,
    pub coeff_a: f64,
    pub coeff_b: f64,
    pub gamma: f64,
    pub effective_snr: f64,
    pub capacity: Rate,
    pub gmi: Rate,
    pub rate_loss: Rate,
    /// High-SNR limit `ln(1/γ)`.
    pub saturation: Rate,
}

/// Normalized MSE split at the loading factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MseBreakdown {
    pub total: f64,
    pub overload: f64,
    pub granular: f64,
}

/// `A` and `B` accumulated in double-double.
fn coefficients_dd(spec: &QuantizerSpec) -> (Dd, Dd) {
    let mut a = Dd::ZERO;
    let mut b = Dd::ZERO;
    for ((lo, hi), &y) in spec.edges().zip(spec.levels()) {
        if y == 0.0 {
            continue;
        }
        a += Dd::from_f64(y).mul_f64(phi_diff(lo, hi));
        b += Dd::from_f64(y).sqr().mul_f64(gaussian_mass(lo, hi));
    }
    (a * DD_SQRT_2PI, b * DD_PI)
}

pub fn coeff_a(spec: &QuantizerSpec) -> f64 {
    coefficients_dd(spec).0.to_f64()
}

pub fn coeff_b(spec: &QuantizerSpec) -> Result<f64> {
    let b = coefficients_dd(spec).1.to_f64();
    if b > 0.0 {
        Ok(b)
    } else {
        Err(Error::DegenerateQuantizer)
    }
}

/// `γ = 1 − A²/B` evaluated directly in `f64`.
///
/// Always in `(0, 1)` by Cauchy–Schwarz. The sharper `γ ≤ 1 − 2/π` holds for
/// uniform quantizers and for centroid levels, not for arbitrary levels: levels
/// `{1, 100}` at threshold 3 give `γ ≈ 0.90`.
pub fn gamma(spec: &QuantizerSpec) -> Result<f64> {
    let a = coeff_a(spec);
    let b = coeff_b(spec)?;
    Ok(1.0 - a * a / b)
}

/// `γ = (B − A²)/B` with the difference formed in double-double, so that it keeps
/// full relative accuracy at high resolution where `γ ≪ 1`.
pub fn gamma_compensated(spec: &QuantizerSpec) -> Result<f64> {
    let (a, b) = coefficients_dd(spec);
    if b.hi.is_nan() || b.hi <= 0.0 {
        return Err(Error::DegenerateQuantizer);
    }
    Ok(((b - a.sqr()) / b).to_f64())
}

/// `ln(1 + snr) − ln(1 + γ·snr)`.
pub fn gmi_from_gamma(gamma: f64, ch: Channel) -> Rate {
    Rate(ch.snr.ln_1p() - (gamma * ch.snr).ln_1p())
}

pub fn gmi(spec: &QuantizerSpec, ch: Channel) -> Result<RateReport> {
    let (a, b) = coefficients_dd(spec);
    if b.hi.is_nan() || b.hi <= 0.0 {
        return Err(Error::DegenerateQuantizer);
    }
    let g = ((b - a.sqr()) / b).to_f64();
    Ok(report_from_parts(a.to_f64(), b.to_f64(), g, ch))
}

pub(crate) fn report_from_parts(coeff_a: f64, coeff_b: f64, gamma: f64, ch: Channel) -> RateReport {
    let snr = ch.snr;
    RateReport {
        snr,
        coeff_a,
        coeff_b,
        gamma,
        effective_snr: (1.0 - gamma) * snr / (gamma * snr + 1.0),
        capacity: ch.capacity(),
        gmi: gmi_from_gamma(gamma, ch),
        rate_loss: Rate((gamma * snr).ln_1p()),
        saturation: Rate(-gamma.ln()),
    }
}

/// `C − I = ln(1 + γ·snr)`.
pub fn rate_loss(spec: &QuantizerSpec, ch: Channel) -> Result<Rate> {
    Ok(Rate((gamma_compensated(spec)? * ch.snr).ln_1p()))
}

/// Normalized MSE `1 − (2/π)(√(2π)A − B)`.
pub fn mse(spec: &QuantizerSpec) -> f64 {
    let (a, b) = coefficients_dd(spec);
    let inner = a * DD_SQRT_2PI - b;
    (Dd::ONE - inner * 2.0 / DD_PI).to_f64()
}

/// Normalized MSE as the sum of per-cell second moments `2Σ ∫ (t − y_k)² φ`.
/// Every term is positive, so this keeps relative accuracy when the MSE is tiny.
pub fn mse_cells(spec: &QuantizerSpec) -> f64 {
    let total: Dd = spec
        .edges()
        .zip(spec.levels())
        .map(|((lo, hi), &y)| centered_second_moment(lo, hi, y))
        .sum();
    2.0 * total.to_f64()
}

/// Overload (beyond `±L`) and granular parts of a uniform quantizer's MSE.
pub fn mse_breakdown(design: UniformDesign) -> MseBreakdown {
    let k = design.half_levels;
    let step = design.step;
    let l = design.loading_factor();
    let overload = 2.0 * centered_second_moment(l, f64::INFINITY, l - 0.5 * step);
    let granular: Dd = (0..k)
        .map(|i| {
            let lo = i as f64 * step;
            centered_second_moment(lo, lo + step, lo + 0.5 * step)
        })
        .sum();
    let granular = 2.0 * granular.to_f64();
    MseBreakdown { total: overload + granular, overload, granular }
}

/// The additive-quantization-noise-model estimate
/// `ln(1 + snr) − ln(1 + (mse/(1 + mse))·snr)`.
pub fn aqnm_rate_estimate(spec: &QuantizerSpec, ch: Channel) -> Rate {
    let m = mse_cells(spec);
    Rate(ch.snr.ln_1p() - (m / (1.0 + m) * ch.snr).ln_1p())
}

/// `A` of a uniform quantizer: `√(2π)·ℓ Σ_{k<K} φ(kℓ) − ℓ/2`.
pub fn coeff_a_uniform(k: usize, step: f64) -> f64 {
    let s: Dd = (0..k).map(|i| phi(i as f64 * step)).sum();
    (s.mul_f64(step) * DD_SQRT_2PI - 0.5 * step).to_f64()
}

/// `B` of a uniform quantizer: `2πℓ² Σ_{0<k<K} kQ(kℓ) + πℓ²/8`.
pub fn coeff_b_uniform(k: usize, step: f64) -> f64 {
    let s: Dd = (1..k).map(|i| i as f64 * q_func(i as f64 * step)).sum();
    ((s * 2.0 + 0.125) * DD_PI).mul_f64(step * step).to_f64()
}

/// Consistency residual `A − √(2/π)B` of a uniform quantizer; it vanishes at the
/// MSE-optimal step, is positive below it and negative above.
pub fn consistency_residual_uniform(k: usize, step: f64) -> f64 {
    coeff_a_uniform(k, step) - SQRT_2_OVER_PI * coeff_b_uniform(k, step)
}
