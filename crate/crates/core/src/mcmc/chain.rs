use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::mcmc::sweep::{
    coord_support, coord_value, set_coord, sweep_in_place, Coord, Prepared, SliceWidths,
};
use crate::model::{
    log_joint, log_likelihood, Dataset, EffectKind, EffectPrior, Family, ModelSpec, ParameterState,
};
use crate::stats::RngStream;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub n_chains: usize,
    pub seed: u64,
    /// Spread of the per-chain starting points, in units of the OLS standard
    /// errors for coefficients and of log-scale for positive parameters.
    pub init_jitter: f64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            iterations: 200_000,
            burn_in: 100_000,
            thin: 50,
            n_chains: 3,
            seed: 0,
            init_jitter: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("burn-in {burn_in} must be smaller than iterations {iterations}")]
    BurnInTooLong { burn_in: usize, iterations: usize },
    #[error("thin must be at least 1")]
    ZeroThin,
    #[error("only {0} draws per chain would be retained; need at least 2")]
    TooFewRetained(usize),
    #[error("need at least one chain")]
    NoChains,
    #[error("init_jitter {0} must be finite and non-negative")]
    BadJitter(f64),
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.burn_in >= self.iterations {
            return Err(ConfigError::BurnInTooLong {
                burn_in: self.burn_in,
                iterations: self.iterations,
            });
        }
        if self.thin == 0 {
            return Err(ConfigError::ZeroThin);
        }
        if self.retained_per_chain() < 2 {
            return Err(ConfigError::TooFewRetained(self.retained_per_chain()));
        }
        if self.n_chains == 0 {
            return Err(ConfigError::NoChains);
        }
        if !(self.init_jitter >= 0.0 && self.init_jitter.is_finite()) {
            return Err(ConfigError::BadJitter(self.init_jitter));
        }
        Ok(())
    }

    pub fn retained_per_chain(&self) -> usize {
        self.iterations.saturating_sub(self.burn_in) / self.thin.max(1)
    }
}

/// Retained draws of one chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorSamples {
    pub chain_id: usize,
    pub spec: ModelSpec,
    pub draws: Vec<ParameterState>,
    /// `-2 log L` at each retained draw.
    pub deviance_trace: Vec<f64>,
    /// 1-based sweep number of each retained draw.
    pub iterations: Vec<usize>,
}

impl PosteriorSamples {
    pub fn len(&self) -> usize {
        self.draws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }

    /// Concatenates chains in order.
    pub fn pool(chains: &[PosteriorSamples]) -> Option<PosteriorSamples> {
        let first = chains.first()?;
        let mut pooled = PosteriorSamples {
            chain_id: first.chain_id,
            spec: first.spec.clone(),
            draws: Vec::new(),
            deviance_trace: Vec::new(),
            iterations: Vec::new(),
        };
        for c in chains {
            pooled.draws.extend(c.draws.iter().cloned());
            pooled.deviance_trace.extend(&c.deviance_trace);
            pooled.iterations.extend(&c.iterations);
        }
        Some(pooled)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SamplerFault {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("model: {0}")]
    Model(String),
    #[error("chain {chain_id}: could not find an in-support starting state")]
    Initialization { chain_id: usize },
    #[error("chain {chain_id}, iteration {iteration}: {coordinate}: {reason}")]
    Slice {
        chain_id: usize,
        iteration: usize,
        coordinate: String,
        reason: String,
    },
}

/// Ordinary least squares of the (possibly log-scale) outcome on the design.
struct OlsStart {
    beta: Vec<f64>,
    se: Vec<f64>,
    resid_var: f64,
    fitted_mean: f64,
}

fn ols_start(spec: &ModelSpec, data: &Dataset) -> OlsStart {
    let n = data.len();
    let k = spec.n_coefficients();
    let x = DMatrix::from_fn(n, k, |i, j| {
        let (s, e) = (data.socdes()[i], data.edu()[i]);
        match j {
            0 => 1.0,
            1 => spec.expenditure_term(data.dlw()[i]),
            2 => s,
            3 => e,
            _ => s * e,
        }
    });
    let y = DVector::from_iterator(
        n,
        data.ffq().iter().map(|&v| match spec.family {
            Family::LogNormal => v.ln(),
            _ => v,
        }),
    );
    let xtx = x.transpose() * &x;
    let pinv = xtx
        .clone()
        .pseudo_inverse(1e-10)
        .unwrap_or_else(|_| DMatrix::identity(k, k));
    let beta = &pinv * x.transpose() * &y;
    let resid = &y - &x * &beta;
    let dof = n.saturating_sub(k).max(1) as f64;
    let mut resid_var = resid.norm_squared() / dof;
    if !(resid_var > 0.0) {
        resid_var = y.variance().max(1e-8);
    }
    let se = (0..k)
        .map(|j| {
            let s = (resid_var * pinv[(j, j)]).sqrt();
            if s.is_finite() && s > 0.0 {
                s
            } else {
                0.1 * beta[j].abs() + 1.0
            }
        })
        .collect();
    OlsStart {
        beta: beta.iter().copied().collect(),
        se,
        resid_var,
        fitted_mean: (&x * &beta).mean(),
    }
}

fn base_state(spec: &ModelSpec, data: &Dataset, ols: &OlsStart) -> ParameterState {
    let p = &spec.priors;
    let k = spec.n_coefficients();
    let n = data.len();
    let sd = |bound: f64| (0.1 * bound).powi(2);
    let eps0 = if spec.effect == EffectKind::Multiplicative {
        1.0
    } else {
        0.0
    };
    let (var_eps, alpha1, alpha2) = match spec.effect_prior {
        None => (None, None, None),
        Some(EffectPrior::GelmanUniform) => (Some(sd(p.b_eps)), None, None),
        Some(EffectPrior::UniformShape) => (Some(0.1 * p.mult_tau_bound), None, None),
        Some(EffectPrior::GammaOverdispersed) => {
            let a1 = p.alpha1.shape / p.alpha1.rate;
            let a2 = p.alpha2.shape / p.alpha2.rate;
            (Some(a1 / a2), Some(a1), Some(a2))
        }
    };
    let r_y = (spec.family == Family::Gamma).then(|| {
        let r = ols.fitted_mean.powi(2) / ols.resid_var;
        if r.is_finite() && r > 0.0 {
            r
        } else {
            1.0
        }
    });
    ParameterState {
        beta: ols.beta.clone(),
        eps: if spec.has_effects() {
            vec![eps0; n]
        } else {
            Vec::new()
        },
        var_y: spec.family.has_outcome_variance().then(|| sd(p.b_y)),
        var_beta: vec![sd(p.b_beta); k],
        var_eps,
        alpha1,
        alpha2,
        r_y,
    }
}

fn jittered(
    spec: &ModelSpec,
    base: &ParameterState,
    ols: &OlsStart,
    jitter: f64,
    rng: &mut RngStream,
) -> ParameterState {
    let mut st = base.clone();
    if jitter == 0.0 {
        return st;
    }
    for (b, se) in st.beta.iter_mut().zip(&ols.se) {
        *b += jitter * se * rng.std_normal();
    }
    let positive = [
        Coord::SdY,
        Coord::EffectScale,
        Coord::Alpha1,
        Coord::Alpha2,
        Coord::ShapeY,
    ];
    let mut scalars: Vec<Coord> = (0..st.var_beta.len()).map(Coord::SdBeta).collect();
    scalars.extend(positive.into_iter().filter(|c| match c {
        Coord::SdY => st.var_y.is_some(),
        Coord::EffectScale => st.var_eps.is_some(),
        Coord::Alpha1 => st.alpha1.is_some(),
        Coord::Alpha2 => st.alpha2.is_some(),
        Coord::ShapeY => st.r_y.is_some(),
        _ => false,
    }));
    for c in scalars {
        let support = coord_support(spec, c);
        let v = coord_value(spec, &st, c) * (0.5 * jitter * rng.std_normal()).exp();
        let v = v.min(0.999 * support.hi).max(1e-12);
        set_coord(spec, &mut st, c, v);
    }
    st
}

/// Deterministic start for `chain_id`: OLS coefficients, effects at their
/// prior mean, SDs at a tenth of their uniform bound, then jittered.
pub fn initial_state(
    spec: &ModelSpec,
    data: &Dataset,
    config: &SamplerConfig,
    rng: &mut RngStream,
) -> Option<ParameterState> {
    let ols = ols_start(spec, data);
    let base = base_state(spec, data, &ols);
    for _ in 0..100 {
        let st = jittered(spec, &base, &ols, config.init_jitter, rng);
        if log_joint(spec, &st, data).is_finite() {
            return Some(st);
        }
    }
    log_joint(spec, &base, data).is_finite().then_some(base)
}

/// Runs one chain: `iterations` sweeps, the first `burn_in` discarded, every
/// `thin`-th sweep after that retained.
pub fn run_chain(
    spec: &ModelSpec,
    data: &Dataset,
    config: &SamplerConfig,
    chain_id: usize,
) -> Result<PosteriorSamples, SamplerFault> {
    config.validate()?;
    spec.validate()
        .map_err(|e| SamplerFault::Model(e.to_string()))?;
    let mut rng = RngStream::new(config.seed, chain_id as u64);
    let mut state = initial_state(spec, data, config, &mut rng)
        .ok_or(SamplerFault::Initialization { chain_id })?;

    let prep = Prepared::new(spec, data);
    let mut widths = SliceWidths::new(prep.coords.len());
    let keep = config.retained_per_chain();
    let mut out = PosteriorSamples {
        chain_id,
        spec: spec.clone(),
        draws: Vec::with_capacity(keep),
        deviance_trace: Vec::with_capacity(keep),
        iterations: Vec::with_capacity(keep),
    };

    for iter in 1..=config.iterations {
        if iter == config.burn_in + 1 {
            widths.freeze();
        }
        sweep_in_place(&prep, &mut state, &mut rng, &mut widths).map_err(|f| {
            SamplerFault::Slice {
                chain_id,
                iteration: iter,
                coordinate: f.coordinate,
                reason: f.source.to_string(),
            }
        })?;
        if iter > config.burn_in
            && (iter - config.burn_in).is_multiple_of(config.thin)
            && out.len() < keep
        {
            out.deviance_trace
                .push(-2.0 * log_likelihood(spec, &state, data));
            out.draws.push(state.clone());
            out.iterations.push(iter);
        }
    }
    Ok(out)
}

/// Results of all chains of one fit, ordered by chain id.
#[derive(Debug, Clone)]
pub struct MultiChain {
    pub chains: Vec<PosteriorSamples>,
    pub faults: Vec<SamplerFault>,
}

impl MultiChain {
    pub fn is_complete(&self) -> bool {
        self.faults.is_empty()
    }
}

/// Runs `config.n_chains` independent chains in parallel, one random stream each.
pub fn run_multi(spec: &ModelSpec, data: &Dataset, config: &SamplerConfig) -> MultiChain {
    if let Err(e) = config.validate() {
        return MultiChain {
            chains: Vec::new(),
            faults: vec![e.into()],
        };
    }
    let results: Vec<_> = (0..config.n_chains)
        .into_par_iter()
        .map(|c| run_chain(spec, data, config, c))
        .collect();
    let mut out = MultiChain {
        chains: Vec::new(),
        faults: Vec::new(),
    };
    for r in results {
        match r {
            Ok(s) => out.chains.push(s),
            Err(f) => out.faults.push(f),
        }
    }
    out
}
