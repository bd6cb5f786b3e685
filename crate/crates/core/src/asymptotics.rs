//! High-resolution approximations.
//!
//! Two regimes govern the rate loss of uniform quantization with `K → ∞`:
//! with `L` fixed the granular error vanishes and `γ → γ̄(L) ≈ 4φ(L)/L³`
//! (overload-limited); with `L` growing fast enough the overload error is
//! negligible and `γ ≈ ℓ²/12 = L²/(12K²)` (granular-limited). The optimal
//! loading factor balances the two, giving `24K²φ(L) ≈ L³` and the
//! `mmse ≈ 4b·ln2/(3·4^b)` law.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::rate::{Channel, Rate};
use crate::specfun::{overload_infimum, phi, q_func, tail_tq, SQRT_2PI};

fn check_positive(name: &'static str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must be positive and finite, got {x}")))
    }
}

fn check_bits(bits: u32) -> Result<()> {
    if bits == 0 {
        Err(Error::invalid("bits", "must be at least 1"))
    } else {
        Ok(())
    }
}

/// `γ̄(L) = lim_{K→∞} γ` at fixed loading factor: the SNR degradation of an
/// infinitely fine quantizer that only clips at `±L`.
///
/// As `L → 0` the expression is `0/0` with limit `1 − 2/π` (a pure clipper);
/// `L = 0` itself is rejected.
pub fn gamma_bar(l: f64) -> Result<f64> {
    check_positive("L", l)?;
    let q = q_func(l);
    let num = overload_infimum(l)? - 4.0 * q * q;
    let den = 1.0 - 4.0 * tail_tq(l)?;
    Ok(num / den)
}

/// Overload-regime loss `4φ(L)L⁻³·snr`.
pub fn overload_loss_approx(l: f64, ch: Channel) -> Result<Rate> {
    check_positive("L", l)?;
    Ok(Rate::from_nats(4.0 * phi(l) / l.powi(3) * ch.snr()))
}

/// Granular-regime loss `ℓ²·snr/12`.
pub fn granular_loss_approx(step: f64, ch: Channel) -> Result<Rate> {
    check_positive("step", step)?;
    Ok(Rate::from_nats(step * step * ch.snr() / 12.0))
}

/// Combined MSE approximation `4φ(L)/L³ + 4φ²(L)/L² + L²/(12K²)`.
pub fn mse_hat(l: f64, k: usize) -> Result<f64> {
    check_positive("L", l)?;
    if k == 0 {
        return Err(Error::invalid("K", "must be at least 1"));
    }
    let p = phi(l);
    let kf = k as f64;
    Ok(4.0 * p / l.powi(3) + 4.0 * p * p / (l * l) + l * l / (12.0 * kf * kf))
}

/// High-SNR rate in the overload regime, `L²/2 + 3 ln L + ln(√(2π)/4)`.
pub fn waterfall_approx(l: f64) -> Result<Rate> {
    check_positive("L", l)?;
    Ok(Rate::from_nats(0.5 * l * l + 3.0 * l.ln() + (SQRT_2PI / 4.0).ln()))
}

/// Underload-regime GMI `ln(1 + snr) − ln(1 + L²·snr/(12K²))`. Meaningful for
/// `L` at or above the optimal loading factor; not enforced.
pub fn underload_gmi_approx(l: f64, k: usize, ch: Channel) -> Result<Rate> {
    check_positive("L", l)?;
    if k == 0 {
        return Err(Error::invalid("K", "must be at least 1"));
    }
    let g = l * l / (12.0 * (k * k) as f64);
    Ok(Rate::from_nats(ch.snr().ln_1p() - (g * ch.snr()).ln_1p()))
}

/// High-SNR limit of [`underload_gmi_approx`], `ln(12K²/L²)`.
pub fn underload_saturation_approx(l: f64, k: usize) -> Result<Rate> {
    check_positive("L", l)?;
    if k == 0 {
        return Err(Error::invalid("K", "must be at least 1"));
    }
    Ok(Rate::from_nats((12.0 * (k * k) as f64 / (l * l)).ln()))
}

fn check_k(k: usize) -> Result<f64> {
    if k < 2 {
        Err(Error::invalid("K", format!("needs K >= 2, got {k}")))
    } else {
        Ok((2.0 * k as f64).ln())
    }
}

/// Root of `L² + 6 ln L − ln(18/π) = 4 ln(2K)`, i.e. of `24K²φ(L) = L³`.
pub fn lhat0(k: usize) -> Result<f64> {
    let ln2k = check_k(k)?;
    let rhs = 4.0 * ln2k + (18.0 / std::f64::consts::PI).ln();
    let f = |l: f64| l * l + 6.0 * l.ln() - rhs;
    // f is increasing on (0, ∞); Newton from 2√(ln 2K), halving instead of
    // stepping past zero.
    let mut l = 2.0 * ln2k.sqrt();
    for _ in 0..100 {
        let step = f(l) / (2.0 * l + 6.0 / l);
        let next = if l - step > 0.0 { l - step } else { 0.5 * l };
        if (next - l).abs() <= 1e-12 * next.max(1.0) {
            return Ok(next);
        }
        l = next;
    }
    Err(Error::NoConvergence(100))
}

/// `2√(ln 2K)`.
pub fn lhat1(k: usize) -> Result<f64> {
    Ok(2.0 * check_k(k)?.sqrt())
}

/// `√(4 ln 2K − 3 ln ln 2K − ln(32π/9))`, `None` where the radicand is negative.
pub fn lhat2(k: usize) -> Result<Option<f64>> {
    let ln2k = check_k(k)?;
    let r = 4.0 * ln2k - 3.0 * ln2k.ln() - (32.0 * std::f64::consts::PI / 9.0).ln();
    Ok((r >= 0.0).then(|| r.sqrt()))
}

/// `√(L̂₂² + ε)` with the published correction term `ε`.
pub fn lhat3(k: usize) -> Result<Option<f64>> {
    let ln2k = check_k(k)?;
    let Some(l2) = lhat2(k)? else { return Ok(None) };
    let kf = k as f64;
    let f1 = 1.0 + 4.0 * ln2k / (2.0 * kf);
    let f2 = 1.0 - 3.0 / (4.0 * ln2k);
    let f3 = 1.0 + (1.5 * ln2k.ln() + (4.0 * SQRT_2PI / 3.0).ln()) / (2.0 * ln2k);
    let arg = f1 * f2 * f3.powf(1.5);
    if arg.is_nan() || arg <= 0.0 {
        return Ok(None);
    }
    let r = l2 * l2 + 2.0 * arg.ln();
    Ok((r >= 0.0).then(|| r.sqrt()))
}

/// `(b + 4)/3`.
pub fn lhat_lin(bits: u32) -> f64 {
    (bits as f64 + 4.0) / 3.0
}

/// One approximation compared with the exact value it targets.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApproxReport {
    pub name: &'static str,
    pub value: Option<f64>,
    pub reference_exact: f64,
    pub abs_error: Option<f64>,
}

impl ApproxReport {
    fn new(name: &'static str, value: Option<f64>, reference_exact: f64) -> Self {
        Self {
            name,
            value,
            reference_exact,
            abs_error: value.map(|v| (v - reference_exact).abs()),
        }
    }
}

/// All loading-factor approximations for `K = 2^(b−1) ≥ 2`, each against `L*`.
pub fn lhat_family(k: usize) -> Result<Vec<ApproxReport>> {
    check_k(k)?;
    if !k.is_power_of_two() {
        return Err(Error::invalid("K", format!("must be a power of two, got {k}")));
    }
    let bits = k.trailing_zeros() + 1;
    let l_star = crate::uniform_opt::optimal_step(k)? * k as f64;
    Ok(vec![
        ApproxReport::new("lhat0", Some(lhat0(k)?), l_star),
        ApproxReport::new("lhat1", Some(lhat1(k)?), l_star),
        ApproxReport::new("lhat2", lhat2(k)?, l_star),
        ApproxReport::new("lhat3", lhat3(k)?, l_star),
        ApproxReport::new("lhat_lin", Some(lhat_lin(bits)), l_star),
    ])
}

/// `4b·ln2/(3·4^b)`.
pub fn mmse_hat(bits: u32) -> Result<f64> {
    check_bits(bits)?;
    let b = bits as f64;
    Ok(4.0 * b * std::f64::consts::LN_2 / (3.0 * 4f64.powi(bits as i32)))
}

/// Maximum-GMI approximation `ln(1 + snr) − ln(1 + mmse_hat(b)·snr)`.
pub fn gmi_hat(bits: u32, ch: Channel) -> Result<Rate> {
    let m = mmse_hat(bits)?;
    Ok(Rate::from_nats(ch.snr().ln_1p() - (m * ch.snr()).ln_1p()))
}

/// Saturation-rate rule `2b − log2 b + 0.11` bits.
pub fn sat_hat(bits: u32) -> Result<f64> {
    check_bits(bits)?;
    let b = bits as f64;
    Ok(2.0 * b - b.log2() + 0.11)
}

/// Rules of thumb relating resolution to quality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PerBitRules {
    /// `6.02b − 10 log10 b + 0.34` dB.
    pub snr_q_6db_rule: f64,
    /// `5b` dB.
    pub snr_q_5db_rule: f64,
    /// `2·snr_db/10 + b₀` bits, the resolution suggested for a loss near
    /// `10^(−b₀)` bits. Only `b₀ = 0` is close: each decade of loss costs
    /// about two bits, not one.
    pub required_bits: f64,
}

pub fn per_bit_rules(bits: u32, snr_db: f64, b0: f64) -> Result<PerBitRules> {
    check_bits(bits)?;
    let b = bits as f64;
    Ok(PerBitRules {
        snr_q_6db_rule: 6.02 * b - 10.0 * b.log10() + 0.34,
        snr_q_5db_rule: 5.0 * b,
        required_bits: 2.0 * snr_db / 10.0 + b0,
    })
}
