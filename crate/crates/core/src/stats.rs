//! Log-densities, the standard normal quantile, and seedable variate generation.
//!
//! Normal distributions are parameterized by `(mean, variance)` and Gamma
//! distributions by `(shape, rate)` everywhere in this crate.

use libm::erfc;
use libm::lgamma as ln_gamma;
use rand::distr::Open01;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use std::f64::consts::{PI, SQRT_2};

/// `0.5 * ln(2π)`
pub const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StatsError {
    #[error("{what}: {value} is outside the allowed domain")]
    Domain { what: &'static str, value: f64 },
}

fn require(cond: bool, what: &'static str, value: f64) -> Result<(), StatsError> {
    if cond {
        Ok(())
    } else {
        Err(StatsError::Domain { what, value })
    }
}

/// A reproducible random stream.
///
/// Each `(seed, stream_id)` pair addresses an independent ChaCha20 keystream,
/// so every chain can own a distinct stream derived from one user seed.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    inner: ChaCha20Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut inner = ChaCha20Rng::seed_from_u64(seed);
        inner.set_stream(stream_id);
        Self {
            seed,
            stream_id,
            inner,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Uniform draw on the open interval (0, 1).
    pub fn open01(&mut self) -> f64 {
        self.inner.sample(Open01)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    pub(crate) fn std_normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.inner)
    }

    /// Gamma draw without argument checks; callers guarantee positivity.
    pub(crate) fn gamma_unchecked(&mut self, shape: f64, rate: f64) -> f64 {
        Gamma::new(shape, 1.0 / rate)
            .expect("positive gamma parameters")
            .sample(&mut self.inner)
    }
}

/// Unchecked `ln N(x | mean, variance)` for hot loops.
#[inline]
pub(crate) fn ln_normal(x: f64, mean: f64, variance: f64) -> f64 {
    let d = x - mean;
    -LN_SQRT_2PI - 0.5 * variance.ln() - 0.5 * d * d / variance
}

/// Unchecked `ln Gamma(x | shape, rate)` for hot loops.
#[inline]
pub(crate) fn ln_gamma_density(x: f64, shape: f64, rate: f64) -> f64 {
    shape * rate.ln() + (shape - 1.0) * x.ln() - rate * x - ln_gamma(shape)
}

pub fn normal_logpdf(x: f64, mean: f64, variance: f64) -> Result<f64, StatsError> {
    require(
        variance > 0.0 && variance.is_finite(),
        "normal variance",
        variance,
    )?;
    Ok(ln_normal(x, mean, variance))
}

pub fn gamma_logpdf(x: f64, shape: f64, rate: f64) -> Result<f64, StatsError> {
    require(x > 0.0, "gamma argument", x)?;
    require(shape > 0.0, "gamma shape", shape)?;
    require(rate > 0.0, "gamma rate", rate)?;
    Ok(ln_gamma_density(x, shape, rate))
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

/// Inverse of the standard normal CDF.
///
/// Acklam's rational approximation (relative error ~1e-9) followed by one
/// Halley step against the erfc-based CDF. The upper tail is evaluated
/// through `1 - p` so both tails keep full precision.
pub fn normal_quantile(p: f64) -> Result<f64, StatsError> {
    require(p > 0.0 && p < 1.0, "probability", p)?;
    if p > 0.5 {
        return Ok(-lower_quantile(1.0 - p));
    }
    Ok(lower_quantile(p))
}

fn lower_quantile(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const P_LOW: f64 = 0.02425;

    let x = if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    };

    // Halley refinement; x <= 0 here so the CDF is computed without cancellation.
    let e = normal_cdf(x) - p;
    let u = e * (2.0 * PI).sqrt() * (0.5 * x * x).exp();
    x - u / (1.0 + 0.5 * x * u)
}

pub fn sample_normal(rng: &mut RngStream, mean: f64, variance: f64) -> Result<f64, StatsError> {
    require(mean.is_finite(), "normal mean", mean)?;
    require(
        variance > 0.0 && variance.is_finite(),
        "normal variance",
        variance,
    )?;
    Ok(mean + variance.sqrt() * rng.std_normal())
}

pub fn sample_gamma(rng: &mut RngStream, shape: f64, rate: f64) -> Result<f64, StatsError> {
    require(shape > 0.0 && shape.is_finite(), "gamma shape", shape)?;
    require(rate > 0.0 && rate.is_finite(), "gamma rate", rate)?;
    Ok(rng.gamma_unchecked(shape, rate))
}

pub fn sample_uniform(rng: &mut RngStream, lo: f64, hi: f64) -> Result<f64, StatsError> {
    require(lo.is_finite(), "uniform lower bound", lo)?;
    require(hi > lo && hi.is_finite(), "uniform upper bound", hi)?;
    Ok(lo + (hi - lo) * rng.open01())
}
