//! Achievable rates of Gaussian-codebook, nearest-neighbour-decoded channels whose
//! receiver applies a symmetric scalar quantizer to each of the in-phase and
//! quadrature components.
//!
//! The crate is organised bottom-up:
//!
//! - [`specfun`]: the standard normal density, the Q-function and the Gaussian
//!   tail integrals everything else is built on.
//! - [`quantizer`]: symmetric quantizer specifications (uniform, centroid-level,
//!   arbitrary) and the quantization rule itself.
//! - [`rate`]: the exact coefficients `A`, `B`, the SNR-degradation parameter
//!   `γ = 1 − A²/B`, the GMI, the normalized MSE and its overload/granular split.
//! - [`uniform_opt`]: optimal loading factors for uniform quantization and the
//!   optimal-design table.
//! - [`asymptotics`]: high-resolution loss laws and closed-form approximations.
//! - [`lloyd`]: Lloyd–Max design and gain-control sweeps of arbitrary quantizers.
//! - [`mcsim`]: an independent Monte Carlo simulation of the quantized channel.
//! - [`sweep`] and [`verify`]: the batch computations behind the command-line tool.
//!
//! Rates are carried internally in nats ([`Rate`]) and converted to bits only when
//! presented.

pub mod asymptotics;
mod error;
pub mod lloyd;
pub mod mcsim;
pub mod numeric;
pub mod optim;
pub mod par;
pub mod quadrature;
pub mod quantizer;
pub mod rate;
pub mod specfun;
pub mod sweep;
pub mod uniform_opt;
pub mod verify;

pub use error::{Error, Result, SpecError};
pub use quantizer::{QuantizerSpec, ScaleMode, UniformDesign};
pub use rate::{Channel, MseBreakdown, Rate, RateReport};

/// Converts a power ratio in decibels to linear scale.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Converts a linear power ratio to decibels.
pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}
