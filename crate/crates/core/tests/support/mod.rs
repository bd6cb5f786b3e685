//! Double-double reference evaluations of the uniform-quantizer objectives.
//!
//! Independent of the library's special functions: `exp` is a Taylor series
//! after range reduction, `Q` a positive power series below 6 and a continued
//! fraction above. Only the double-double arithmetic type is shared.

#![allow(dead_code, clippy::approx_constant)]

use qrate_core::numeric::{two_prod, DoubleDouble as Dd};

pub const PI: Dd = Dd { hi: 3.141_592_653_589_793, lo: 1.224_646_799_147_353_2e-16 };
pub const SQRT_2PI: Dd = Dd { hi: 2.506_628_274_631_000_7, lo: -1.832_857_998_045_916_7e-16 };
pub const FRAC_1_SQRT_2PI: Dd = Dd { hi: 0.398_942_280_401_432_7, lo: -2.492_327_202_277_73e-17 };
pub const SQRT_2_OVER_PI: Dd = Dd { hi: 0.797_884_560_802_865_4, lo: -4.984_654_404_555_46e-17 };
pub const LN_2: Dd = Dd { hi: 0.693_147_180_559_945_3, lo: 2.319_046_813_846_299_6e-17 };

pub fn exp(x: Dd) -> Dd {
    if x.hi < -740.0 {
        return Dd::ZERO;
    }
    let k = (x.hi / LN_2.hi).round();
    let r = (x - LN_2 * k).mul_f64(1.0 / 1024.0);
    // s = e^r - 1 by Taylor, then (1 + s)^2 - 1 = s(2 + s) ten times.
    let mut term = r;
    let mut s = r;
    for n in 2..=14 {
        term = term * r / n as f64;
        s += term;
    }
    for _ in 0..10 {
        s = s * (s + 2.0);
    }
    (s + 1.0).mul_f64(2f64.powi(k as i32))
}

pub fn ln(x: Dd) -> Dd {
    let y = Dd::from_f64(x.hi.ln());
    y + (x * exp(-y) - 1.0)
}

pub fn phi(t: Dd) -> Dd {
    FRAC_1_SQRT_2PI * exp(-(t.sqr().mul_f64(0.5)))
}

/// `Q(t)` for `t ≥ 0`.
pub fn q(t: Dd) -> Dd {
    assert!(t.hi >= 0.0);
    // Above 6 the series loses too much to the cancellation against 1/2.
    if t.hi < 6.0 {
        // ∫_0^t φ = φ(t) Σ t^(2n+1)/(2n+1)!!
        let t2 = t.sqr();
        let mut term = t;
        let mut sum = t;
        let mut n = 0u32;
        loop {
            term = term * t2 / (2 * n + 3) as f64;
            sum += term;
            n += 1;
            if term.hi <= 1e-34 * sum.hi {
                break;
            }
        }
        Dd::from_f64(0.5) - phi(t) * sum
    } else {
        // Mills ratio 1/(t + 1/(t + 2/(t + ...))) evaluated bottom-up.
        let u = t.hi;
        let mut d = u;
        for n in (1..=120).rev() {
            d = u + n as f64 / d;
        }
        phi(t).mul_f64(1.0 / d)
    }
}

fn exact_product(k: f64, step: f64) -> Dd {
    let (p, e) = two_prod(k, step);
    Dd::new(p, e)
}

/// `A` and `B` of the uniform quantizer `(K, ℓ)` from the generic cell sums.
pub fn coefficients(k: usize, step: f64) -> (Dd, Dd) {
    let mut a = Dd::ZERO;
    let mut b = Dd::ZERO;
    let mut phi_lo = FRAC_1_SQRT_2PI;
    let mut q_lo = Dd::from_f64(0.5);
    for i in 1..=k {
        let y = exact_product((2 * i - 1) as f64, step).mul_f64(0.5);
        let (phi_hi, q_hi) = if i == k {
            (Dd::ZERO, Dd::ZERO)
        } else {
            let t = exact_product(i as f64, step);
            (phi(t), q(t))
        };
        a += y * (phi_lo - phi_hi);
        b += y.sqr() * (q_lo - q_hi);
        phi_lo = phi_hi;
        q_lo = q_hi;
    }
    (a * SQRT_2PI, b * PI)
}

pub fn mse(k: usize, step: f64) -> Dd {
    let (a, b) = coefficients(k, step);
    Dd::ONE - (a * SQRT_2PI - b) * 2.0 / PI
}

pub fn gamma(k: usize, step: f64) -> Dd {
    let (a, b) = coefficients(k, step);
    (b - a.sqr()) / b
}

/// GMI in nats, `ln(1 + snr) − ln(1 + γ·snr)`.
pub fn gmi(k: usize, step: f64, snr: f64) -> Dd {
    let g = gamma(k, step);
    ln(Dd::from_f64(snr) + 1.0) - ln(g * snr + 1.0)
}
