//! Monte Carlo simulation of the quantized channel
//! `Y = q(V^R/σ_v) + j·q(V^I/σ_v)`, `V = hX + Z`, with circularly symmetric
//! Gaussian `X ~ CN(0, σ_x²)` and `Z ~ CN(0, σ²)`.
//!
//! Samples are split into equal batches. Batch `i` draws from its own ChaCha8
//! stream `(seed, i)`, so the estimate depends only on `(seed, samples,
//! batches)` and not on how batches are scheduled. Batch moments are merged in
//! index order. Standard errors are delete-one-batch jackknife estimates, which
//! for plain means coincide with the classical batch-means standard error.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::par::{map_indexed, Execution};
use crate::quantizer::QuantizerSpec;
use crate::rate::{coeff_b, Channel, Rate};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct McConfig {
    pub samples: u64,
    pub seed: u64,
    pub batches: u32,
}

impl McConfig {
    pub const DEFAULT_BATCHES: u32 = 100;

    pub fn new(samples: u64, seed: u64) -> Self {
        Self { samples, seed, batches: Self::DEFAULT_BATCHES }
    }

    pub fn validate(&self) -> Result<()> {
        if self.batches < 2 {
            return Err(Error::invalid("batches", "need at least 2 batches for standard errors"));
        }
        if !self.samples.is_multiple_of(self.batches as u64) {
            return Err(Error::invalid(
                "samples",
                format!("{} is not divisible by {} batches", self.samples, self.batches),
            ));
        }
        if self.samples < 10 * self.batches as u64 {
            return Err(Error::invalid("samples", "need at least 10 samples per batch"));
        }
        Ok(())
    }

    fn batch_len(&self) -> u64 {
        self.samples / self.batches as u64
    }
}

/// Physical channel parameters. Only `|h|²σ_x²/σ²` affects the rates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimModel {
    pub h: Complex64,
    pub sigma_x2: f64,
    pub sigma2: f64,
}

impl SimModel {
    /// `h = 1`, `σ_x² = 2`, `σ² = 2/snr`.
    pub fn from_channel(ch: Channel) -> Self {
        Self { h: Complex64::new(1.0, 0.0), sigma_x2: 2.0, sigma2: 2.0 / ch.snr() }
    }

    pub fn snr(&self) -> f64 {
        self.h.norm_sqr() * self.sigma_x2 / self.sigma2
    }

    /// Per-component standard deviation of `V`.
    pub fn sigma_v(&self) -> f64 {
        ((self.h.norm_sqr() * self.sigma_x2 + self.sigma2) / 2.0).sqrt()
    }

    fn validate(&self) -> Result<()> {
        let ok = self.h.norm_sqr() > 0.0 && self.sigma_x2 > 0.0 && self.sigma2 > 0.0;
        if ok && self.snr().is_finite() {
            Ok(())
        } else {
            Err(Error::invalid("model", "need nonzero h and positive, finite variances"))
        }
    }
}

/// Raw sums over one batch. `x`, `v`, `y` below are the equivalent-model
/// signals `hX`, `V` and `σ_v·Y`; `w = y − v`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Moments {
    n: f64,
    /// `Σ X·conj(Y)` with the unscaled input and quantizer output.
    x_conj_out: Complex64,
    out_power: f64,
    /// `Σ (q(u) − u)²` over both real components.
    sq_err: f64,
    xx: f64,
    vv: f64,
    yy: f64,
    ww: f64,
    x_conj_v: Complex64,
    v_conj_y: Complex64,
    x_conj_y: Complex64,
    y_conj_w: Complex64,
}

impl std::ops::Add for Moments {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self {
            n: self.n + o.n,
            x_conj_out: self.x_conj_out + o.x_conj_out,
            out_power: self.out_power + o.out_power,
            sq_err: self.sq_err + o.sq_err,
            xx: self.xx + o.xx,
            vv: self.vv + o.vv,
            yy: self.yy + o.yy,
            ww: self.ww + o.ww,
            x_conj_v: self.x_conj_v + o.x_conj_v,
            v_conj_y: self.v_conj_y + o.v_conj_y,
            x_conj_y: self.x_conj_y + o.x_conj_y,
            y_conj_w: self.y_conj_w + o.y_conj_w,
        }
    }
}

impl std::ops::Sub for Moments {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self {
            n: self.n - o.n,
            x_conj_out: self.x_conj_out - o.x_conj_out,
            out_power: self.out_power - o.out_power,
            sq_err: self.sq_err - o.sq_err,
            xx: self.xx - o.xx,
            vv: self.vv - o.vv,
            yy: self.yy - o.yy,
            ww: self.ww - o.ww,
            x_conj_v: self.x_conj_v - o.x_conj_v,
            v_conj_y: self.v_conj_y - o.v_conj_y,
            x_conj_y: self.x_conj_y - o.x_conj_y,
            y_conj_w: self.y_conj_w - o.y_conj_w,
        }
    }
}

fn batch_rng(seed: u64, batch: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(batch as u64);
    rng
}

fn run_batch(spec: Option<&QuantizerSpec>, model: &SimModel, len: u64, rng: &mut ChaCha8Rng) -> Moments {
    let sx = (model.sigma_x2 / 2.0).sqrt();
    let sz = (model.sigma2 / 2.0).sqrt();
    let sv = model.sigma_v();
    let inv_sv = 1.0 / sv;
    let mut m = Moments { n: len as f64, ..Default::default() };
    for _ in 0..len {
        let xr: f64 = rng.sample(StandardNormal);
        let xi: f64 = rng.sample(StandardNormal);
        let zr: f64 = rng.sample(StandardNormal);
        let zi: f64 = rng.sample(StandardNormal);
        let x = Complex64::new(sx * xr, sx * xi);
        let v = model.h * x + Complex64::new(sz * zr, sz * zi);
        let (ur, ui) = (v.re * inv_sv, v.im * inv_sv);
        let out = match spec {
            Some(q) => Complex64::new(q.quantize(ur), q.quantize(ui)),
            None => Complex64::new(ur, ui),
        };
        let er = out.re - ur;
        let ei = out.im - ui;
        m.x_conj_out += x * out.conj();
        m.out_power += out.norm_sqr();
        m.sq_err += er * er + ei * ei;

        let xe = model.h * x;
        let y = out * sv;
        let w = y - v;
        m.xx += xe.norm_sqr();
        m.vv += v.norm_sqr();
        m.yy += y.norm_sqr();
        m.ww += w.norm_sqr();
        m.x_conj_v += xe * v.conj();
        m.v_conj_y += v * y.conj();
        m.x_conj_y += xe * y.conj();
        m.y_conj_w += y * w.conj();
    }
    m
}

fn run(spec: Option<&QuantizerSpec>, model: &SimModel, cfg: &McConfig, exec: Execution) -> Result<Vec<Moments>> {
    cfg.validate()?;
    model.validate()?;
    if let Some(q) = spec {
        coeff_b(q)?;
    }
    let len = cfg.batch_len();
    Ok(map_indexed(cfg.batches as usize, exec, |i| {
        let mut rng = batch_rng(cfg.seed, i as u32);
        run_batch(spec, model, len, &mut rng)
    }))
}

fn pooled(batches: &[Moments]) -> Moments {
    batches.iter().fold(Moments::default(), |acc, m| acc + *m)
}

/// Point estimate from the pooled moments and its delete-one-batch jackknife
/// standard error.
fn jackknife(batches: &[Moments], total: &Moments, stat: impl Fn(&Moments) -> f64) -> (f64, f64) {
    let est = stat(total);
    let n = batches.len() as f64;
    let loo: Vec<f64> = batches.iter().map(|m| stat(&(*total - *m))).collect();
    let mean = loo.iter().sum::<f64>() / n;
    let var = loo.iter().map(|t| (t - mean) * (t - mean)).sum::<f64>() * (n - 1.0) / n;
    (est, var.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McStdErrors {
    pub cross_moment_re: f64,
    pub cross_moment_im: f64,
    pub out_power: f64,
    pub delta: f64,
    pub gmi_nats: f64,
    pub gamma: f64,
    pub mse: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    /// `E[X·conj(Y)]`.
    pub cross_moment: Complex64,
    /// `E|Y|²`.
    pub out_power: f64,
    /// `|E[X·conj(Y)]|²/(σ_x²·E|Y|²)`.
    pub delta: f64,
    /// `ln(1/(1 − Δ))`.
    pub gmi: Rate,
    /// `γ` recovered from `Δ = snr/(1 + snr)·(1 − γ)`.
    pub gamma: f64,
    /// Normalized quantizer MSE per real dimension.
    pub mse: f64,
    pub std_errors: McStdErrors,
    pub seed: u64,
    pub samples: u64,
    pub batches: u32,
}

/// Simulates `spec` on the channel with `h = 1`, `σ_x² = 2`, `σ² = 2/snr`.
pub fn simulate(spec: &QuantizerSpec, ch: Channel, cfg: McConfig) -> Result<McEstimate> {
    simulate_model(spec, &SimModel::from_channel(ch), cfg, Execution::Parallel)
}

pub fn simulate_model(spec: &QuantizerSpec, model: &SimModel, cfg: McConfig, exec: Execution) -> Result<McEstimate> {
    let batches = run(Some(spec), model, &cfg, exec)?;
    let t = pooled(&batches);
    let snr = model.snr();
    let sx2 = model.sigma_x2;
    let delta_of = move |m: &Moments| (m.x_conj_out / m.n).norm_sqr() / (sx2 * m.out_power / m.n);
    let jk = |f: &dyn Fn(&Moments) -> f64| jackknife(&batches, &t, f);

    let (cre, se_cre) = jk(&|m| m.x_conj_out.re / m.n);
    let (cim, se_cim) = jk(&|m| m.x_conj_out.im / m.n);
    let (pow, se_pow) = jk(&|m| m.out_power / m.n);
    let (delta, se_delta) = jk(&|m| delta_of(m));
    let (gmi, se_gmi) = jk(&|m| -(-delta_of(m)).ln_1p());
    let (gamma, se_gamma) = jk(&|m| 1.0 - delta_of(m) * (1.0 + snr) / snr);
    let (mse, se_mse) = jk(&|m| m.sq_err / (2.0 * m.n));

    Ok(McEstimate {
        cross_moment: Complex64::new(cre, cim),
        out_power: pow,
        delta,
        gmi: Rate::from_nats(gmi),
        gamma,
        mse,
        std_errors: McStdErrors {
            cross_moment_re: se_cre,
            cross_moment_im: se_cim,
            out_power: se_pow,
            delta: se_delta,
            gmi_nats: se_gmi,
            gamma: se_gamma,
            mse: se_mse,
        },
        seed: cfg.seed,
        samples: cfg.samples,
        batches: cfg.batches,
    })
}

/// An estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

impl Estimate {
    /// `|value − reference|` in units of the standard error.
    pub fn z_score(&self, reference: f64) -> f64 {
        let d = (self.value - reference).abs();
        if d == 0.0 {
            0.0
        } else {
            d / self.std_error
        }
    }
}

/// Second-order geometry of the equivalent model `y = v + w`, `v = x + z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorrelationReport {
    pub rho_xv: Estimate,
    pub rho_vy: Estimate,
    pub rho_xy: Estimate,
    /// `ρ_XY − ρ_XV·ρ_VY`.
    pub product_gap: Estimate,
    /// `E[x·conj(v)]/E|v|²`.
    pub wiener_xv: Estimate,
    /// `E[v·conj(y)]/E|v|²`.
    pub wiener_vy: Estimate,
    /// `Re E[y·conj(w)]/E|v|²`; zero when the quantizer is MSE-optimal.
    pub orthogonality: Estimate,
}

/// Correlation structure of the quantized channel; `spec = None` simulates
/// the unquantized path `y = v`.
pub fn correlation_probe(spec: Option<&QuantizerSpec>, ch: Channel, cfg: McConfig) -> Result<CorrelationReport> {
    correlation_probe_model(spec, &SimModel::from_channel(ch), cfg, Execution::Parallel)
}

pub fn correlation_probe_model(
    spec: Option<&QuantizerSpec>,
    model: &SimModel,
    cfg: McConfig,
    exec: Execution,
) -> Result<CorrelationReport> {
    let batches = run(spec, model, &cfg, exec)?;
    let t = pooled(&batches);
    let est = |f: &dyn Fn(&Moments) -> f64| {
        let (value, std_error) = jackknife(&batches, &t, f);
        Estimate { value, std_error }
    };
    let rho_xv = |m: &Moments| m.x_conj_v.norm() / (m.xx * m.vv).sqrt();
    let rho_vy = |m: &Moments| m.v_conj_y.norm() / (m.vv * m.yy).sqrt();
    let rho_xy = |m: &Moments| m.x_conj_y.norm() / (m.xx * m.yy).sqrt();
    Ok(CorrelationReport {
        rho_xv: est(&rho_xv),
        rho_vy: est(&rho_vy),
        rho_xy: est(&rho_xy),
        product_gap: est(&|m| rho_xy(m) - rho_xv(m) * rho_vy(m)),
        wiener_xv: est(&|m| m.x_conj_v.re / m.vv),
        wiener_vy: est(&|m| m.v_conj_y.re / m.vv),
        orthogonality: est(&|m| m.y_conj_w.re / m.vv),
    })
}
