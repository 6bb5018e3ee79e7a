//! Coordinate-wise slice-within-Gibbs updates.
//!
//! Each coordinate's full conditional is evaluated from only the factors of
//! the joint density that involve it. Parameters with a uniform-on-SD prior
//! are sampled as standard deviations, everything else on its own scale.

use std::fmt;

use crate::mcmc::slice::{slice_sample_scalar, SliceError, Support};
use crate::model::{
    ln_effect_hyperprior, ln_effect_prior, ln_gamma_or_neg_inf, ln_uniform_sd, predictor_parts,
    Dataset, EffectKind, EffectPrior, Family, ModelSpec, ParameterState,
};
use crate::stats::{ln_normal, RngStream, LN_SQRT_2PI};
use libm::lgamma as ln_gamma;

/// One scalar coordinate of the sampler.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Coord {
    Beta(usize),
    /// `sqrt(var_beta[k])`
    SdBeta(usize),
    Eps(usize),
    /// `sqrt(var_y)`
    SdY,
    /// `sqrt(var_eps)` under the uniform-SD prior, `var_eps` otherwise.
    EffectScale,
    Alpha1,
    Alpha2,
    /// Gamma-family shape `r_y`.
    ShapeY,
}

impl fmt::Display for Coord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coord::Beta(k) => write!(f, "beta{k}"),
            Coord::SdBeta(k) => write!(f, "sd_beta{k}"),
            Coord::Eps(i) => write!(f, "eps{}", i + 1),
            Coord::SdY => f.write_str("sd_y"),
            Coord::EffectScale => f.write_str("eps_scale"),
            Coord::Alpha1 => f.write_str("alpha1"),
            Coord::Alpha2 => f.write_str("alpha2"),
            Coord::ShapeY => f.write_str("r_y"),
        }
    }
}

/// All coordinates a sweep updates, in update order.
pub fn sweep_coordinates(spec: &ModelSpec, n: usize) -> Vec<Coord> {
    let k = spec.n_coefficients();
    let mut coords: Vec<Coord> = (0..k).map(Coord::Beta).collect();
    coords.extend((0..k).map(Coord::SdBeta));
    if spec.has_effects() {
        coords.extend((0..n).map(Coord::Eps));
    }
    if spec.family.has_outcome_variance() {
        coords.push(Coord::SdY);
    } else {
        coords.push(Coord::ShapeY);
    }
    if spec.has_effects() {
        coords.push(Coord::EffectScale);
    }
    if spec.has_alphas() {
        coords.push(Coord::Alpha1);
        coords.push(Coord::Alpha2);
    }
    coords
}

fn effect_scale_on_sd(spec: &ModelSpec) -> bool {
    spec.effect_prior == Some(EffectPrior::GelmanUniform)
}

pub fn coord_value(spec: &ModelSpec, state: &ParameterState, coord: Coord) -> f64 {
    let get = |v: Option<f64>| v.expect("coordinate present in state");
    match coord {
        Coord::Beta(k) => state.beta[k],
        Coord::SdBeta(k) => state.var_beta[k].sqrt(),
        Coord::Eps(i) => state.eps[i],
        Coord::SdY => get(state.var_y).sqrt(),
        Coord::EffectScale => {
            let v = get(state.var_eps);
            if effect_scale_on_sd(spec) {
                v.sqrt()
            } else {
                v
            }
        }
        Coord::Alpha1 => get(state.alpha1),
        Coord::Alpha2 => get(state.alpha2),
        Coord::ShapeY => get(state.r_y),
    }
}

pub fn set_coord(spec: &ModelSpec, state: &mut ParameterState, coord: Coord, value: f64) {
    match coord {
        Coord::Beta(k) => state.beta[k] = value,
        Coord::SdBeta(k) => state.var_beta[k] = value * value,
        Coord::Eps(i) => state.eps[i] = value,
        Coord::SdY => state.var_y = Some(value * value),
        Coord::EffectScale => {
            state.var_eps = Some(if effect_scale_on_sd(spec) {
                value * value
            } else {
                value
            })
        }
        Coord::Alpha1 => state.alpha1 = Some(value),
        Coord::Alpha2 => state.alpha2 = Some(value),
        Coord::ShapeY => state.r_y = Some(value),
    }
}

pub fn coord_support(spec: &ModelSpec, coord: Coord) -> Support {
    let p = &spec.priors;
    match coord {
        Coord::Beta(_) => Support::REAL,
        Coord::Eps(_) if spec.effect == EffectKind::Multiplicative => Support::positive(),
        Coord::Eps(_) => Support::REAL,
        Coord::SdBeta(_) => Support::bounded(0.0, p.b_beta),
        Coord::SdY => Support::bounded(0.0, p.b_y),
        Coord::EffectScale => match spec.effect_prior {
            Some(EffectPrior::GelmanUniform) => Support::bounded(0.0, p.b_eps),
            Some(EffectPrior::UniformShape) => Support::bounded(0.0, p.mult_tau_bound),
            _ => Support::positive(),
        },
        Coord::Alpha1 | Coord::Alpha2 | Coord::ShapeY => Support::positive(),
    }
}

/// Data transformed once for repeated conditional evaluations.
#[derive(Debug, Clone)]
pub(crate) struct Prepared<'a> {
    pub spec: &'a ModelSpec,
    pub data: &'a Dataset,
    /// expenditure term: `dlw` or `ln(dlw)`
    pub t: Vec<f64>,
    /// outcome on the scale the likelihood scores: `ln(ffq)` for log-normal
    pub target: Vec<f64>,
    pub ln_y: Vec<f64>,
    pub coords: Vec<Coord>,
}

impl<'a> Prepared<'a> {
    pub fn new(spec: &'a ModelSpec, data: &'a Dataset) -> Self {
        let t = data
            .dlw()
            .iter()
            .map(|&x| spec.expenditure_term(x))
            .collect();
        let ln_y: Vec<f64> = data.ffq().iter().map(|y| y.ln()).collect();
        let target = match spec.family {
            Family::LogNormal => ln_y.clone(),
            _ => data.ffq().to_vec(),
        };
        Self {
            spec,
            data,
            t,
            target,
            ln_y,
            coords: sweep_coordinates(spec, data.len()),
        }
    }

    #[inline]
    fn mu(&self, state: &ParameterState, i: usize) -> f64 {
        let eps = self.spec.has_effects().then(|| state.eps[i]);
        predictor_parts(
            self.spec,
            &state.beta,
            eps,
            self.t[i],
            self.data.socdes()[i],
            self.data.edu()[i],
        )
    }

    /// Likelihood contribution of one observation.
    #[inline]
    fn obs_ll(&self, state: &ParameterState, i: usize) -> f64 {
        let mu = self.mu(state, i);
        match self.spec.family {
            Family::Normal | Family::LogNormal => {
                let v = state.var_y.unwrap_or(f64::NAN);
                if v > 0.0 {
                    ln_normal(self.target[i], mu, v)
                } else {
                    f64::NEG_INFINITY
                }
            }
            Family::Gamma => {
                let r = state.r_y.unwrap_or(f64::NAN);
                if r > 0.0 && mu > 0.0 {
                    let rate = r / mu;
                    r * rate.ln() + (r - 1.0) * self.ln_y[i] - rate * self.target[i] - ln_gamma(r)
                } else {
                    f64::NEG_INFINITY
                }
            }
        }
    }

    /// Full likelihood, hoisting constant terms out of the loop.
    fn total_ll(&self, state: &ParameterState) -> f64 {
        let n = self.data.len();
        match self.spec.family {
            Family::Normal | Family::LogNormal => {
                let v = state.var_y.unwrap_or(f64::NAN);
                if !(v > 0.0) {
                    return f64::NEG_INFINITY;
                }
                let ss: f64 = (0..n)
                    .map(|i| {
                        let d = self.target[i] - self.mu(state, i);
                        d * d
                    })
                    .sum();
                -(n as f64) * (LN_SQRT_2PI + 0.5 * v.ln()) - 0.5 * ss / v
            }
            Family::Gamma => {
                let r = state.r_y.unwrap_or(f64::NAN);
                if !(r > 0.0) {
                    return f64::NEG_INFINITY;
                }
                let mut acc = 0.0;
                for i in 0..n {
                    let mu = self.mu(state, i);
                    if !(mu > 0.0) {
                        return f64::NEG_INFINITY;
                    }
                    let rate = r / mu;
                    acc += r * rate.ln() + (r - 1.0) * self.ln_y[i] - rate * self.target[i];
                }
                acc - n as f64 * ln_gamma(r)
            }
        }
    }

    /// Log full conditional of `coord` at the value currently stored in `state`,
    /// up to an additive constant that does not depend on that coordinate.
    pub fn log_conditional(&self, state: &ParameterState, coord: Coord) -> f64 {
        let spec = self.spec;
        let p = &spec.priors;
        let scale = || state.var_eps.unwrap_or(f64::NAN);
        match coord {
            Coord::Beta(k) => {
                let v = state.var_beta[k];
                ln_normal(state.beta[k], 0.0, v) + self.total_ll(state)
            }
            Coord::SdBeta(k) => {
                let v = state.var_beta[k];
                let prior = ln_uniform_sd(v.sqrt(), p.b_beta);
                if prior == f64::NEG_INFINITY {
                    return prior;
                }
                prior + ln_normal(state.beta[k], 0.0, v)
            }
            Coord::Eps(i) => {
                let s = scale();
                let e = state.eps[i];
                let prior = match spec.effect {
                    EffectKind::Multiplicative => ln_gamma_or_neg_inf(e, s, s),
                    _ => ln_normal(e, 0.0, s),
                };
                if prior == f64::NEG_INFINITY {
                    return prior;
                }
                prior + self.obs_ll(state, i)
            }
            Coord::SdY => {
                let v = state.var_y.unwrap_or(f64::NAN);
                let prior = ln_uniform_sd(v.sqrt(), p.b_y);
                if prior == f64::NEG_INFINITY {
                    return prior;
                }
                prior + self.total_ll(state)
            }
            Coord::ShapeY => {
                let r = state.r_y.unwrap_or(f64::NAN);
                let prior = ln_gamma_or_neg_inf(r, p.r_y.shape, p.r_y.rate);
                if prior == f64::NEG_INFINITY {
                    return prior;
                }
                prior + self.total_ll(state)
            }
            Coord::EffectScale => {
                let s = scale();
                let hyper = ln_effect_hyperprior(spec, s, state.alpha1, state.alpha2);
                if hyper == f64::NEG_INFINITY {
                    return hyper;
                }
                hyper + ln_effect_prior(spec, &state.eps, s)
            }
            Coord::Alpha1 | Coord::Alpha2 => {
                ln_effect_hyperprior(spec, scale(), state.alpha1, state.alpha2)
            }
        }
    }
}

/// Per-coordinate slice widths, adapted during burn-in.
#[derive(Debug, Clone)]
pub struct SliceWidths {
    widths: Vec<f64>,
    weighted_jumps: Vec<f64>,
    updates: Vec<u64>,
    adapting: bool,
}

/// Updates before a coordinate's width starts following its jump sizes.
const ADAPT_WARMUP: u64 = 50;

impl SliceWidths {
    pub fn new(n_coords: usize) -> Self {
        Self {
            widths: vec![1.0; n_coords],
            weighted_jumps: vec![0.0; n_coords],
            updates: vec![0; n_coords],
            adapting: true,
        }
    }

    pub fn freeze(&mut self) {
        self.adapting = false;
    }

    pub fn is_adapting(&self) -> bool {
        self.adapting
    }

    pub fn widths(&self) -> &[f64] {
        &self.widths
    }

    /// Width becomes twice the iteration-weighted mean absolute jump, so
    /// later (closer to stationary) jumps count more.
    fn record(&mut self, idx: usize, jump: f64) {
        if !self.adapting {
            return;
        }
        self.updates[idx] += 1;
        let m = self.updates[idx] as f64;
        self.weighted_jumps[idx] += m * jump.abs();
        if self.updates[idx] > ADAPT_WARMUP {
            let w = 2.0 * self.weighted_jumps[idx] / (m * (m + 1.0) / 2.0);
            if w > 0.0 && w.is_finite() {
                self.widths[idx] = w;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("slice sampler fault at {coordinate}: {source}")]
pub struct SweepFault {
    pub coordinate: String,
    #[source]
    pub source: SliceError,
}

pub(crate) fn sweep_in_place(
    prep: &Prepared<'_>,
    state: &mut ParameterState,
    rng: &mut RngStream,
    widths: &mut SliceWidths,
) -> Result<(), SweepFault> {
    let spec = prep.spec;
    for (idx, &coord) in prep.coords.iter().enumerate() {
        let current = coord_value(spec, state, coord);
        let support = coord_support(spec, coord);
        let width = widths.widths[idx];
        let drawn = {
            let target = |x: f64| {
                if !support.contains(x) {
                    return f64::NEG_INFINITY;
                }
                set_coord(spec, state, coord, x);
                prep.log_conditional(state, coord)
            };
            slice_sample_scalar(target, current, width, rng, support)
        };
        match drawn {
            Ok(x) => {
                set_coord(spec, state, coord, x);
                widths.record(idx, x - current);
            }
            Err(source) => {
                set_coord(spec, state, coord, current);
                return Err(SweepFault {
                    coordinate: coord.to_string(),
                    source,
                });
            }
        }
    }
    Ok(())
}

/// Updates every active coordinate once against its full conditional.
pub fn gibbs_sweep(
    spec: &ModelSpec,
    state: &ParameterState,
    data: &Dataset,
    rng: &mut RngStream,
    widths: &mut SliceWidths,
) -> Result<ParameterState, SweepFault> {
    let prep = Prepared::new(spec, data);
    assert_eq!(
        widths.widths.len(),
        prep.coords.len(),
        "widths sized for a different model"
    );
    let mut next = state.clone();
    sweep_in_place(&prep, &mut next, rng, widths)?;
    Ok(next)
}
