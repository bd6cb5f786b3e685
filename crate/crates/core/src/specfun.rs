//! Standard normal density, Q-function and Gaussian tail integrals.
//!
//! Conventions: `φ(±∞) = 0`, `Q(+∞) = 0`, `Q(−∞) = 1`. NaN inputs propagate to
//! NaN outputs for the density and the Q-function; the tail integrals reject them.
//!
//! The Q-function is relative-accurate to a few ulps wherever the result is a
//! normal `f64` (`u ≲ 37.5`). Below `u = 5` it is `erfc(u/√2)/2`; above, the
//! rounding of `u/√2` and of `u²` would cost up to `u²·2⁻⁵³` relative accuracy, so
//! it is evaluated as `φ(u)·R(u)` with a split-exponent density and the Laplace
//! continued fraction for the Mills ratio `R`.

use crate::error::{Error, Result};

pub const SQRT_2PI: f64 = 2.506_628_274_631_000_7;
pub const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
pub const SQRT_2_OVER_PI: f64 = 0.797_884_560_802_865_4;

/// Above this argument the Q-function switches from `erfc` to the Mills ratio.
const ERFC_CUTOVER: f64 = 5.0;

/// Cells narrower than this are integrated by Gauss–Legendre instead of closed
/// forms that cancel catastrophically.
const NARROW_CELL: f64 = 0.5;

/// Standard normal density `φ(t) = exp(−t²/2)/√(2π)`, with `φ(±∞) = 0`.
pub fn phi(t: f64) -> f64 {
    let a = t.abs();
    if a > 40.0 {
        // exp(-800) underflows; also keeps the f32 split below in range.
        return if a.is_nan() { f64::NAN } else { 0.0 };
    }
    // a = hi + lo with hi carrying 24 significant bits, so hi² is exact in f64
    // and the large part of the exponent is not rounded.
    let hi = (a as f32) as f64;
    let lo = a - hi;
    FRAC_1_SQRT_2PI * (-0.5 * hi * hi).exp() * (-0.5 * lo * (2.0 * hi + lo)).exp()
}

/// Gaussian tail probability `Q(u) = ∫_u^∞ φ(t) dt`.
pub fn q_func(u: f64) -> f64 {
    if u.is_nan() {
        return f64::NAN;
    }
    if u < 0.0 {
        return 1.0 - q_func(-u);
    }
    if u <= ERFC_CUTOVER {
        0.5 * libm::erfc(u * std::f64::consts::FRAC_1_SQRT_2)
    } else if u.is_infinite() {
        0.0
    } else {
        phi(u) * mills_ratio_cf(u)
    }
}

/// Mills ratio `R(u) = Q(u)/φ(u)` for `u ≥ 0`; `R(+∞) = 0`.
pub fn mills_ratio(u: f64) -> f64 {
    debug_assert!(u >= 0.0 || u.is_nan());
    if u.is_infinite() {
        0.0
    } else if u <= ERFC_CUTOVER {
        q_func(u) / phi(u)
    } else {
        mills_ratio_cf(u)
    }
}

/// Laplace's continued fraction `R(u) = 1/(u + 1/(u + 2/(u + 3/(u + …))))`,
/// evaluated with the modified Lentz method. Converges fast for `u ≥ 5`.
fn mills_ratio_cf(u: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut f = u;
    let mut c = f;
    let mut d = 0.0;
    for n in 1..2000 {
        let a = n as f64;
        d = u + a * d;
        if d.abs() < TINY {
            d = TINY;
        }
        d = 1.0 / d;
        c = u + a / c;
        if c.abs() < TINY {
            c = TINY;
        }
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    1.0 / f
}

fn check_nonnegative(name: &'static str, x: f64) -> Result<()> {
    if x.is_nan() || x < 0.0 {
        Err(Error::invalid(name, format!("must be a nonnegative number, got {x}")))
    } else {
        Ok(())
    }
}

/// `∫_L^∞ t·Q(t) dt = ((1 − L²)Q(L) + Lφ(L))/2`, obtained by parts.
pub fn tail_tq(l: f64) -> Result<f64> {
    check_nonnegative("L", l)?;
    if l.is_infinite() {
        return Ok(0.0);
    }
    let p = phi(l);
    Ok(0.5 * p * ((1.0 - l * l) * mills_ratio(l) + l))
}

/// Infimum of the normalized overload distortion of a quantizer with loading
/// factor `L`: `2∫_L^∞ (t − L)² φ(t) dt = 2((1 + L²)Q(L) − Lφ(L))`.
pub fn overload_infimum(l: f64) -> Result<f64> {
    check_nonnegative("L", l)?;
    if l.is_infinite() {
        return Ok(0.0);
    }
    let p = phi(l);
    Ok(2.0 * p * ((1.0 + l * l) * mills_ratio(l) - l))
}

// 10-point Gauss–Legendre rule on [-1, 1] (nodes symmetric, positive half).
const GL_NODES: [f64; 5] = [
    0.148_874_338_981_631_2,
    0.433_395_394_129_247_2,
    0.679_409_568_299_024_4,
    0.865_063_366_688_984_5,
    0.973_906_528_517_171_7,
];
#[allow(clippy::excessive_precision)]
const GL_WEIGHTS: [f64; 5] = [
    0.295_524_224_714_752_9,
    0.269_266_719_309_996_3,
    0.219_086_362_515_982_0,
    0.149_451_349_150_580_6,
    0.066_671_344_308_688_1,
];

fn gauss_legendre(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for (x, w) in GL_NODES.iter().zip(GL_WEIGHTS.iter()) {
        acc += w * (f(mid - half * x) + f(mid + half * x));
    }
    acc * half
}

/// `φ(a) − φ(b)` for `a ≤ b ≤ ∞`, without cancellation when the two are close.
pub fn phi_diff(a: f64, b: f64) -> f64 {
    if b.is_infinite() {
        return phi(a);
    }
    -phi(a) * (-0.5 * (b - a) * (b + a)).exp_m1()
}

/// Probability mass `Q(a) − Q(b)` of the cell `[a, b)`, `b` possibly `+∞`.
pub fn gaussian_mass(a: f64, b: f64) -> f64 {
    if b.is_infinite() {
        q_func(a)
    } else if b - a <= NARROW_CELL {
        gauss_legendre(phi, a, b)
    } else if a >= 0.0 {
        q_func(a) - q_func(b)
    } else {
        // Q(a) - Q(b) = Φ(b) - Φ(a); evaluate on the side with the smaller tail.
        q_func(-b) - q_func(-a)
    }
}

/// `(Q(a) − Q(b))/φ(a)` for `0 ≤ a < b ≤ ∞`; finite even where both tails
/// underflow.
fn scaled_mass(a: f64, b: f64) -> f64 {
    if b.is_infinite() {
        mills_ratio(a)
    } else if b - a <= NARROW_CELL {
        gauss_legendre(|t| (-0.5 * (t - a) * (t + a)).exp(), a, b)
    } else {
        mills_ratio(a) - (-0.5 * (b - a) * (b + a)).exp() * mills_ratio(b)
    }
}

/// Conditional mean `E[T | a ≤ T < b]` of a standard normal `T`.
pub fn gaussian_centroid(a: f64, b: f64) -> f64 {
    if a >= 0.0 {
        // Both numerator and denominator scaled by φ(a).
        let num = if b.is_infinite() { 1.0 } else { -(-0.5 * (b - a) * (b + a)).exp_m1() };
        return num / scaled_mass(a, b);
    }
    phi_diff(a, b) / gaussian_mass(a, b)
}

/// `∫_a^b (t − c)² φ(t) dt` for `0 ≤ a < b ≤ ∞`.
///
/// Narrow cells use Gauss–Legendre (the integrand is analytic and positive); wide
/// cells and the overload tail use closed forms in `φ`, `Q` and the Mills ratio.
pub fn centered_second_moment(a: f64, b: f64, c: f64) -> f64 {
    debug_assert!(a >= 0.0 && b > a);
    if b.is_infinite() {
        // With d = a - c: ∫ ((t-a) + d)² φ over [a, ∞).
        let d = a - c;
        let p = phi(a);
        let r = mills_ratio(a);
        let j1 = p * (1.0 - a * r);
        let j2 = p * ((1.0 + a * a) * r - a);
        return j2 + 2.0 * d * j1 + d * d * p * r;
    }
    if b - a <= NARROW_CELL {
        return gauss_legendre(|t| (t - c) * (t - c) * phi(t), a, b);
    }
    (a - 2.0 * c) * phi(a) - (b - 2.0 * c) * phi(b) + (1.0 + c * c) * gaussian_mass(a, b)
}
