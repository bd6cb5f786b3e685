//! Cross-validation of the analytic rate formulas against simulation.

use serde::Serialize;

use crate::error::Result;
use crate::lloyd::{lloyd_optimize, DEFAULT_MAX_ITER, DEFAULT_TOLERANCE};
use crate::mcsim::{simulate_model, McConfig, SimModel};
use crate::par::Execution;
use crate::quantizer::{make_uniform, QuantizerSpec};
use crate::rate::{gamma_compensated, gmi_from_gamma, mse_cells, Channel};
use crate::uniform_opt::{one_bit_mmse_step, optimal_design};

/// Allowed distance between analytic and simulated values, in standard errors.
pub const Z_TOLERANCE: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    /// 10⁶ samples per case.
    Quick,
    /// 10⁸ samples per case.
    Full,
}

impl Suite {
    pub fn samples(self) -> u64 {
        match self {
            Suite::Quick => 1_000_000,
            Suite::Full => 100_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    pub samples: u64,
    pub batches: u32,
    pub seed: u64,
    pub snr_db: [f64; 2],
    /// Added to every analytic `γ` before comparison. Nonzero values exist to
    /// check that the battery can fail.
    pub corrupt_gamma: f64,
    pub execution: Execution,
}

impl VerifyOptions {
    pub fn new(suite: Suite, seed: u64) -> Self {
        Self {
            samples: suite.samples(),
            batches: McConfig::DEFAULT_BATCHES,
            seed,
            snr_db: [0.0, 10.0],
            corrupt_gamma: 0.0,
            execution: Execution::Parallel,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub case: String,
    pub quantity: &'static str,
    pub analytic: f64,
    pub simulated: f64,
    pub std_error: f64,
    pub z: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub samples: u64,
    pub seed: u64,
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// The quantizers exercised by the battery.
pub fn battery() -> Result<Vec<(String, QuantizerSpec)>> {
    let mut out = vec![("one_bit".to_string(), make_uniform(1, one_bit_mmse_step())?)];
    for bits in 2..=4u32 {
        let d = optimal_design(1 << (bits - 1))?;
        out.push((format!("uniform_b{bits}_lstar"), d.to_spec()?));
    }
    let d4 = optimal_design(8)?;
    out.push(("uniform_b4_2lstar".into(), make_uniform(8, 2.0 * d4.step)?));
    out.push(("lloyd_k4".into(), lloyd_optimize(4, DEFAULT_TOLERANCE, DEFAULT_MAX_ITER)?.spec));
    out.push((
        "nonuniform_monotone".into(),
        QuantizerSpec::new(4, vec![0.2, 0.6, 0.7], vec![0.1, 0.5, 0.7, 0.9])?,
    ));
    out.push((
        "nonuniform_nonmonotone".into(),
        QuantizerSpec::new(4, vec![0.2, 0.6, 0.7], vec![0.1, 0.9, 0.8, 0.2])?,
    ));
    Ok(out)
}

fn check(case: &str, quantity: &'static str, analytic: f64, simulated: f64, std_error: f64) -> Check {
    let d = (analytic - simulated).abs();
    let z = if d == 0.0 { 0.0 } else { d / std_error };
    Check {
        case: case.to_string(),
        quantity,
        analytic,
        simulated,
        std_error,
        z,
        passed: z <= Z_TOLERANCE,
    }
}

pub fn run(opts: &VerifyOptions) -> Result<VerifyReport> {
    let cfg = McConfig { samples: opts.samples, seed: opts.seed, batches: opts.batches };
    cfg.validate()?;
    let mut checks = Vec::new();
    for (name, spec) in battery()? {
        for &snr_db in &opts.snr_db {
            let ch = Channel::from_db(snr_db)?;
            let case = format!("{name}@{snr_db}dB");
            let g = gamma_compensated(&spec)? + opts.corrupt_gamma;
            let m = mse_cells(&spec);
            let est = simulate_model(&spec, &SimModel::from_channel(ch), cfg, opts.execution)?;
            let se = est.std_errors;
            checks.push(check(&case, "gmi_nats", gmi_from_gamma(g, ch).nats(), est.gmi.nats(), se.gmi_nats));
            checks.push(check(&case, "gamma", g, est.gamma, se.gamma));
            checks.push(check(&case, "mse", m, est.mse, se.mse));
        }
    }
    Ok(VerifyReport { samples: opts.samples, seed: opts.seed, checks })
}
