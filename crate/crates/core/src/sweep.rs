//! One-dimensional parameter sweeps producing rectangular tables.
//!
//! | variable         | needs                         | quantizer                         |
//! |------------------|-------------------------------|-----------------------------------|
//! | `loading_factor` | `bits`, `snr_db`              | uniform, `ℓ = L/K`                |
//! | `snr_db`         | `spec` or `bits`              | given spec, else optimal uniform  |
//! | `bits`           | `snr_db`                      | optimal uniform per row           |
//! | `gain_scale`     | `spec` or `bits`, `snr_db`    | spec scaled by `s`                |
//!
//! Rates are in bits per complex channel use.

use std::str::FromStr;

use serde::Serialize;

use crate::asymptotics::{
    gamma_bar, gmi_hat, granular_loss_approx, lhat0, lhat_lin, mse_hat, overload_loss_approx, sat_hat,
    underload_gmi_approx,
};
use crate::error::{Error, Result};
use crate::par::{map_indexed, Execution};
use crate::quantizer::{make_uniform, QuantizerSpec, ScaleMode};
use crate::rate::{aqnm_rate_estimate, gmi, mse_cells, Channel};
use crate::uniform_opt::{half_levels_for_bits, optimal_spec, table_row};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    LoadingFactor,
    SnrDb,
    Bits,
    GainScale,
}

impl SweepVariable {
    pub const NAMES: [&'static str; 4] = ["loading_factor", "snr_db", "bits", "gain_scale"];

    pub fn name(self) -> &'static str {
        match self {
            SweepVariable::LoadingFactor => "loading_factor",
            SweepVariable::SnrDb => "snr_db",
            SweepVariable::Bits => "bits",
            SweepVariable::GainScale => "gain_scale",
        }
    }
}

impl FromStr for SweepVariable {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "loading_factor" => Ok(SweepVariable::LoadingFactor),
            "snr_db" => Ok(SweepVariable::SnrDb),
            "bits" => Ok(SweepVariable::Bits),
            "gain_scale" => Ok(SweepVariable::GainScale),
            other => Err(Error::invalid(
                "variable",
                format!("unknown sweep variable `{other}`, expected one of {}", Self::NAMES.join(", ")),
            )),
        }
    }
}

/// Parameters held constant along a sweep.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepFixed {
    pub bits: Option<u32>,
    pub snr_db: Option<f64>,
    pub spec: Option<QuantizerSpec>,
    pub scale_mode: ScaleMode,
    /// Add the closed-form approximation columns.
    pub approximations: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRequest {
    pub variable: SweepVariable,
    pub grid: Vec<f64>,
    pub fixed: SweepFixed,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTable {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
}

pub fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::invalid("grid", "must not be empty"));
    }
    if let Some(i) = grid.iter().position(|x| !x.is_finite()) {
        return Err(Error::invalid("grid", format!("value {i} is not finite")));
    }
    if let Some(i) = grid.windows(2).position(|w| w[1] <= w[0]) {
        return Err(Error::invalid("grid", format!("not strictly increasing at index {}", i + 1)));
    }
    Ok(())
}

fn need<T: Copy>(v: Option<T>, name: &'static str, variable: SweepVariable) -> Result<T> {
    v.ok_or_else(|| Error::invalid(name, format!("required when sweeping {}", variable.name())))
}

fn log2_1p(x: f64) -> f64 {
    x.ln_1p() / std::f64::consts::LN_2
}

pub fn columns(variable: SweepVariable, approximations: bool) -> Vec<&'static str> {
    let (base, approx): (&[&str], &[&str]) = match variable {
        SweepVariable::LoadingFactor => (
            &["loading_factor", "step", "gamma", "mse", "gmi_bits", "capacity_bits", "rate_loss_bits", "aqnm_bits"],
            &[
                "mse_hat",
                "mse_hat_loss_bits",
                "overload_loss_approx_bits",
                "granular_loss_approx_bits",
                "underload_gmi_approx_bits",
                "gamma_bar",
            ],
        ),
        SweepVariable::SnrDb => (
            &["snr_db", "gamma", "gmi_bits", "capacity_bits", "saturation_bits", "aqnm_bits"],
            &["gmi_hat_bits"],
        ),
        SweepVariable::Bits => (
            &["bits", "l_star", "step_star", "mmse", "max_gmi_bits", "capacity_bits", "saturation_bits"],
            &["gmi_hat_bits", "sat_hat_bits", "lhat0", "lhat_lin"],
        ),
        SweepVariable::GainScale => (&["gain_scale", "gamma", "mse", "gmi_bits", "aqnm_bits"], &[]),
    };
    let mut cols = base.to_vec();
    if approximations {
        cols.extend_from_slice(approx);
    }
    cols
}

fn row(req: &SweepRequest, x: f64) -> Result<Vec<f64>> {
    let f = &req.fixed;
    let var = req.variable;
    let mut r = Vec::new();
    match var {
        SweepVariable::LoadingFactor => {
            let bits = need(f.bits, "bits", var)?;
            let ch = Channel::from_db(need(f.snr_db, "snr_db", var)?)?;
            let k = half_levels_for_bits(bits)?;
            let step = x / k as f64;
            let q = make_uniform(k, step)?;
            let rep = gmi(&q, ch)?;
            r.extend([x, step, rep.gamma, mse_cells(&q), rep.gmi.bits(), rep.capacity.bits()]);
            r.extend([rep.rate_loss.bits(), aqnm_rate_estimate(&q, ch).bits()]);
            if f.approximations {
                let m = mse_hat(x, k)?;
                r.extend([m, log2_1p(m * ch.snr())]);
                r.extend([overload_loss_approx(x, ch)?.bits(), granular_loss_approx(step, ch)?.bits()]);
                r.extend([underload_gmi_approx(x, k, ch)?.bits(), gamma_bar(x)?]);
            }
        }
        SweepVariable::SnrDb => {
            let ch = Channel::from_db(x)?;
            let q = match (&f.spec, f.bits) {
                (Some(q), _) => q.clone(),
                (None, Some(b)) => optimal_spec(half_levels_for_bits(b)?)?,
                (None, None) => return Err(Error::invalid("spec", "a spec or bits is required when sweeping snr_db")),
            };
            let rep = gmi(&q, ch)?;
            r.extend([x, rep.gamma, rep.gmi.bits(), rep.capacity.bits(), rep.saturation.bits()]);
            r.push(aqnm_rate_estimate(&q, ch).bits());
            if f.approximations {
                r.push(match f.bits {
                    Some(b) if f.spec.is_none() => gmi_hat(b, ch)?.bits(),
                    _ => f64::NAN,
                });
            }
        }
        SweepVariable::Bits => {
            if x.fract() != 0.0 || x < 1.0 {
                return Err(Error::invalid("grid", format!("bits must be positive integers, got {x}")));
            }
            let bits = x as u32;
            let ch = Channel::from_db(need(f.snr_db, "snr_db", var)?)?;
            let t = table_row(bits)?;
            let g = crate::rate::gmi_from_gamma(t.mmse, ch);
            r.extend([x, t.l_star, t.step_star, t.mmse, g.bits(), ch.capacity().bits(), t.saturation_bits]);
            if f.approximations {
                let l0 = if t.half_levels >= 2 { lhat0(t.half_levels)? } else { f64::NAN };
                r.extend([gmi_hat(bits, ch)?.bits(), sat_hat(bits)?, l0, lhat_lin(bits)]);
            }
        }
        SweepVariable::GainScale => {
            let ch = Channel::from_db(need(f.snr_db, "snr_db", var)?)?;
            let base = match (&f.spec, f.bits) {
                (Some(q), _) => q.clone(),
                (None, Some(b)) => optimal_spec(half_levels_for_bits(b)?)?,
                (None, None) => {
                    return Err(Error::invalid("spec", "a spec or bits is required when sweeping gain_scale"))
                }
            };
            let q = base.scaled(x, f.scale_mode)?;
            let rep = gmi(&q, ch)?;
            r.extend([x, rep.gamma, mse_cells(&q), rep.gmi.bits(), aqnm_rate_estimate(&q, ch).bits()]);
        }
    }
    Ok(r)
}

pub fn run(req: &SweepRequest, exec: Execution) -> Result<SweepTable> {
    validate_grid(&req.grid)?;
    let rows = map_indexed(req.grid.len(), exec, |i| row(req, req.grid[i]))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepTable { columns: columns(req.variable, req.fixed.approximations), rows })
}
