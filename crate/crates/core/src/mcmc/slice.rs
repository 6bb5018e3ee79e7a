//! Univariate slice sampling with stepping out and shrinkage (Neal 2003).

use crate::stats::RngStream;

/// Maximum number of stepping-out steps, split randomly between the two ends.
pub const MAX_STEPS: u32 = 256;
/// Shrinkage contractions allowed before giving up.
pub const MAX_CONTRACTIONS: u32 = 1000;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SliceError {
    #[error("log-density at the current point {current} is {value}")]
    NonFiniteStart { current: f64, value: f64 },
    #[error("slice width {0} must be positive and finite")]
    BadWidth(f64),
    #[error("no point on the slice after {MAX_CONTRACTIONS} contractions around {current}")]
    ShrinkageExhausted { current: f64 },
}

/// Support interval of a scalar coordinate. The density is zero outside.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Support {
    pub lo: f64,
    pub hi: f64,
}

impl Support {
    pub const REAL: Support = Support {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
    };

    pub fn positive() -> Self {
        Support {
            lo: 0.0,
            hi: f64::INFINITY,
        }
    }

    pub fn bounded(lo: f64, hi: f64) -> Self {
        Support { lo, hi }
    }

    pub fn contains(&self, x: f64) -> bool {
        x > self.lo && x < self.hi
    }
}

/// Draws one value from the density proportional to `exp(logdensity)`,
/// leaving it invariant.
///
/// The stepped-out interval is truncated to `support`, which is valid because
/// the density vanishes outside it. Returned points always have a finite
/// log-density.
pub fn slice_sample_scalar<F: FnMut(f64) -> f64>(
    mut logdensity: F,
    current: f64,
    width: f64,
    rng: &mut RngStream,
    support: Support,
) -> Result<f64, SliceError> {
    if !(width > 0.0 && width.is_finite()) {
        return Err(SliceError::BadWidth(width));
    }
    let f0 = logdensity(current);
    if !f0.is_finite() {
        return Err(SliceError::NonFiniteStart { current, value: f0 });
    }
    let level = f0 + rng.open01().ln();

    let mut left = current - width * rng.open01();
    let mut right = left + width;
    let mut j = (MAX_STEPS as f64 * rng.open01()).floor() as u32;
    let mut k = MAX_STEPS - 1 - j.min(MAX_STEPS - 1);
    while j > 0 && left > support.lo && logdensity(left) > level {
        left -= width;
        j -= 1;
    }
    while k > 0 && right < support.hi && logdensity(right) > level {
        right += width;
        k -= 1;
    }
    left = left.max(support.lo);
    right = right.min(support.hi);

    for _ in 0..MAX_CONTRACTIONS {
        let proposal = left + (right - left) * rng.open01();
        if support.contains(proposal) {
            let fp = logdensity(proposal);
            if fp > level && fp.is_finite() {
                return Ok(proposal);
            }
        }
        if proposal < current {
            left = proposal;
        } else {
            right = proposal;
        }
    }
    Err(SliceError::ShrinkageExhausted { current })
}
