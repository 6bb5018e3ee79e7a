//! Synthetic data: a power-law (log-log linear) generator and a cohort
//! generator that draws data from any model in the lattice.

use serde::{Deserialize, Serialize};

use crate::model::{predictor_parts, Dataset, EffectKind, Family, ModelError, ModelSpec};
use crate::stats::RngStream;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    Invalid(String),
    #[error(transparent)]
    Data(#[from] ModelError),
}

/// `y_i = beta0 · x_i^beta1 · exp(e_i)`, `e_i ~ N(0, sigma_e²)`, `x_i ~ U(x_range)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimLogLogConfig {
    pub n: usize,
    pub beta0: f64,
    pub beta1: f64,
    pub sigma_e: f64,
    pub x_range: (f64, f64),
    pub seed: u64,
}

impl Default for SimLogLogConfig {
    fn default() -> Self {
        Self {
            n: 500,
            beta0: 1.0,
            beta1: 1.2,
            sigma_e: 0.3,
            x_range: (1.0, 10.0),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogLogData {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl LogLogData {
    /// As a dataset with `x` as the expenditure covariate and the other
    /// covariates fixed at zero.
    pub fn to_dataset(&self) -> Result<Dataset, ModelError> {
        let n = self.x.len();
        Dataset::new(self.y.clone(), self.x.clone(), vec![0.0; n], vec![0.0; n])
    }
}

pub fn simulate_loglog(cfg: &SimLogLogConfig) -> Result<LogLogData, SimError> {
    let (lo, hi) = cfg.x_range;
    if cfg.n < 2 {
        return Err(SimError::Invalid("n must be at least 2".into()));
    }
    if !(lo > 0.0 && lo < hi && hi.is_finite()) {
        return Err(SimError::Invalid(format!(
            "x_range ({lo}, {hi}) must satisfy 0 < lo < hi"
        )));
    }
    if !(cfg.beta0 > 0.0) || !cfg.beta1.is_finite() || !(cfg.sigma_e >= 0.0) {
        return Err(SimError::Invalid(
            "need beta0 > 0, finite beta1 and sigma_e >= 0".into(),
        ));
    }
    let mut rng = RngStream::new(cfg.seed, 0);
    let mut x = Vec::with_capacity(cfg.n);
    let mut y = Vec::with_capacity(cfg.n);
    for _ in 0..cfg.n {
        let xi = lo + (hi - lo) * rng.open01();
        let e = cfg.sigma_e * rng.std_normal();
        x.push(xi);
        y.push(cfg.beta0 * xi.powf(cfg.beta1) * e.exp());
    }
    Ok(LogLogData { x, y })
}

/// Cohort generator.
///
/// `noise` is the outcome SD for Normal, the log-scale SD for LogNormal and
/// the coefficient of variation for Gamma outcomes; zero gives noiseless
/// outcomes equal to the mean. `effect_scale` is the SD of additive and
/// covariate-error effects, or the shape/rate `τ` of multiplicative effects.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimEnergyConfig {
    pub n: usize,
    pub beta: [f64; 5],
    pub family: Family,
    pub effect: EffectKind,
    pub effect_scale: f64,
    pub noise: f64,
    pub dlw_mean: f64,
    pub dlw_sd: f64,
    pub socdes_mean: f64,
    pub socdes_sd: f64,
    pub edu_prob: f64,
    pub seed: u64,
}

impl Default for SimEnergyConfig {
    fn default() -> Self {
        Self {
            n: 81,
            beta: [500.0, 0.5, 10.0, 650.0, 0.0],
            family: Family::Normal,
            effect: EffectKind::None,
            effect_scale: 0.0,
            noise: 200.0,
            dlw_mean: 2400.0,
            dlw_sd: 350.0,
            socdes_mean: 0.0,
            socdes_sd: 1.0,
            edu_prob: 0.5,
            seed: 0,
        }
    }
}

/// Parameters the data were generated from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimTruth {
    pub beta: [f64; 5],
    pub eps: Vec<f64>,
    pub mu: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergySim {
    pub data: Dataset,
    pub truth: SimTruth,
}

pub fn simulate_energy(cfg: &SimEnergyConfig) -> Result<EnergySim, SimError> {
    let bad = |m: &str| Err(SimError::Invalid(m.to_string()));
    if cfg.n < 2 {
        return bad("n must be at least 2");
    }
    if cfg.effect == EffectKind::Multiplicative && cfg.family != Family::LogNormal {
        return bad("multiplicative effects require the lognormal family");
    }
    if !(cfg.noise >= 0.0 && cfg.noise.is_finite()) {
        return bad("noise must be finite and non-negative");
    }
    if cfg.effect != EffectKind::None && !(cfg.effect_scale >= 0.0 && cfg.effect_scale.is_finite())
    {
        return bad("effect_scale must be finite and non-negative");
    }
    if cfg.effect == EffectKind::Multiplicative && !(cfg.effect_scale > 0.0) {
        return bad("multiplicative effects need a positive shape");
    }
    if !(cfg.dlw_mean > 0.0 && cfg.dlw_sd >= 0.0 && cfg.socdes_sd >= 0.0) {
        return bad("covariate generator settings out of range");
    }
    if !(0.0..=1.0).contains(&cfg.edu_prob) {
        return bad("edu_prob must lie in [0, 1]");
    }

    let spec = ModelSpec {
        family: cfg.family,
        effect: cfg.effect,
        include_interaction: true,
        effect_prior: None,
        priors: Default::default(),
    };
    let mut rng = RngStream::new(cfg.seed, 0);
    let n = cfg.n;
    let (mut dlw, mut socdes, mut edu) = (Vec::new(), Vec::new(), Vec::new());
    for _ in 0..n {
        let mut x = cfg.dlw_mean + cfg.dlw_sd * rng.std_normal();
        let mut tries = 0;
        while x <= 0.05 * cfg.dlw_mean {
            x = cfg.dlw_mean + cfg.dlw_sd * rng.std_normal();
            tries += 1;
            if tries > 1000 {
                return bad("cannot draw positive expenditure values");
            }
        }
        dlw.push(x);
        socdes.push(cfg.socdes_mean + cfg.socdes_sd * rng.std_normal());
        edu.push(if rng.open01() < cfg.edu_prob {
            1.0
        } else {
            0.0
        });
    }

    let eps: Vec<f64> = match cfg.effect {
        EffectKind::None => Vec::new(),
        EffectKind::Multiplicative => (0..n)
            .map(|_| rng.gamma_unchecked(cfg.effect_scale, cfg.effect_scale))
            .collect(),
        _ => (0..n)
            .map(|_| cfg.effect_scale * rng.std_normal())
            .collect(),
    };

    let mut mu = Vec::with_capacity(n);
    let mut ffq = Vec::with_capacity(n);
    for i in 0..n {
        let m = predictor_parts(
            &spec,
            &cfg.beta,
            eps.get(i).copied(),
            spec.expenditure_term(dlw[i]),
            socdes[i],
            edu[i],
        );
        let y = match cfg.family {
            Family::Normal => m + cfg.noise * rng.std_normal(),
            Family::LogNormal => (m + cfg.noise * rng.std_normal()).exp(),
            Family::Gamma => {
                if !(m > 0.0) {
                    return Err(SimError::Invalid(format!(
                        "gamma outcome needs a positive mean, observation {i} has {m}"
                    )));
                }
                if cfg.noise == 0.0 {
                    m
                } else {
                    let shape = 1.0 / (cfg.noise * cfg.noise);
                    rng.gamma_unchecked(shape, shape / m)
                }
            }
        };
        if !(y > 0.0 && y.is_finite()) {
            return Err(SimError::Invalid(format!(
                "observation {i} drew outcome {y}; choose coefficients or noise that keep outcomes positive"
            )));
        }
        mu.push(m);
        ffq.push(y);
    }
    Ok(EnergySim {
        data: Dataset::new(ffq, dlw, socdes, edu)?,
        truth: SimTruth {
            beta: cfg.beta,
            eps,
            mu,
        },
    })
}
