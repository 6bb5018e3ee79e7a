//! Datasets, the family × effect model lattice, priors, and the log-densities
//! that define each model's posterior.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::stats::{ln_gamma_density, ln_normal};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("dataset needs at least 2 observations, got {0}")]
    TooFewObservations(usize),
    #[error("column {column} has {got} entries, expected {expected}")]
    LengthMismatch {
        column: &'static str,
        got: usize,
        expected: usize,
    },
    #[error("{column}[{index}] = {value} must be strictly positive")]
    NonPositive {
        column: &'static str,
        index: usize,
        value: f64,
    },
    #[error("{column}[{index}] = {value} is not finite")]
    NonFinite {
        column: &'static str,
        index: usize,
        value: f64,
    },
    #[error("edu[{index}] = {value} must be 0 or 1")]
    BadIndicator { index: usize, value: f64 },
    #[error("invalid model: {0}")]
    InvalidSpec(String),
    #[error("observation index {index} out of range for n = {n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("parameter state does not match the model: {0}")]
    StateMismatch(String),
}

/// Outcome (FFQ intake) with the three covariates.
///
/// `dlw` is the measured energy expenditure, `socdes` the social desirability
/// score and `edu` the college-degree indicator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    ffq: Vec<f64>,
    dlw: Vec<f64>,
    socdes: Vec<f64>,
    edu: Vec<f64>,
}

impl Dataset {
    pub fn new(
        ffq: Vec<f64>,
        dlw: Vec<f64>,
        socdes: Vec<f64>,
        edu: Vec<f64>,
    ) -> Result<Self, ModelError> {
        let n = ffq.len();
        if n < 2 {
            return Err(ModelError::TooFewObservations(n));
        }
        for (column, len) in [
            ("dlw", dlw.len()),
            ("socdes", socdes.len()),
            ("edu", edu.len()),
        ] {
            if len != n {
                return Err(ModelError::LengthMismatch {
                    column,
                    got: len,
                    expected: n,
                });
            }
        }
        for (column, values) in [("ffq", &ffq), ("dlw", &dlw), ("socdes", &socdes)] {
            if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
                return Err(ModelError::NonFinite {
                    column,
                    index,
                    value,
                });
            }
        }
        for (column, values) in [("ffq", &ffq), ("dlw", &dlw)] {
            if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| **v <= 0.0) {
                return Err(ModelError::NonPositive {
                    column,
                    index,
                    value,
                });
            }
        }
        if let Some((index, &value)) = edu
            .iter()
            .enumerate()
            .find(|(_, v)| **v != 0.0 && **v != 1.0)
        {
            return Err(ModelError::BadIndicator { index, value });
        }
        Ok(Self {
            ffq,
            dlw,
            socdes,
            edu,
        })
    }

    pub fn len(&self) -> usize {
        self.ffq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ffq.is_empty()
    }

    pub fn ffq(&self) -> &[f64] {
        &self.ffq
    }

    pub fn dlw(&self) -> &[f64] {
        &self.dlw
    }

    pub fn socdes(&self) -> &[f64] {
        &self.socdes
    }

    pub fn edu(&self) -> &[f64] {
        &self.edu
    }

    /// Copy of the data with rows reordered by `order`.
    pub fn permuted(&self, order: &[usize]) -> Result<Self, ModelError> {
        let pick = |v: &[f64]| order.iter().map(|&i| v[i]).collect::<Vec<_>>();
        Dataset::new(
            pick(&self.ffq),
            pick(&self.dlw),
            pick(&self.socdes),
            pick(&self.edu),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Normal,
    LogNormal,
    Gamma,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::Normal, Family::LogNormal, Family::Gamma];

    pub fn name(self) -> &'static str {
        match self {
            Family::Normal => "normal",
            Family::LogNormal => "lognormal",
            Family::Gamma => "gamma",
        }
    }

    pub fn has_outcome_variance(self) -> bool {
        !matches!(self, Family::Gamma)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Subject-level random effect structure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EffectKind {
    /// No subject effects.
    None,
    /// `ε_i` added to the linear predictor.
    Additive,
    /// `ε_i` added to the expenditure covariate: `β1 (t_i + ε_i)`.
    MeasErr,
    /// Positive `ε_i` scaling the log expenditure: `β1 (log(dlw_i) · ε_i)`.
    /// Log-normal family only.
    Multiplicative,
}

impl EffectKind {
    pub fn name(self) -> &'static str {
        match self {
            EffectKind::None => "none",
            EffectKind::Additive => "additive",
            EffectKind::MeasErr => "measerr",
            EffectKind::Multiplicative => "multiplicative",
        }
    }

    /// Column of the I / II / III comparison table.
    pub fn column(self) -> usize {
        match self {
            EffectKind::None => 0,
            EffectKind::Additive => 1,
            EffectKind::MeasErr | EffectKind::Multiplicative => 2,
        }
    }

    /// The third-column effect for a family: the covariate measurement-error
    /// form for Normal and Gamma outcomes, the multiplicative form for
    /// log-normal outcomes.
    pub fn model_three(family: Family) -> Self {
        match family {
            Family::LogNormal => EffectKind::Multiplicative,
            _ => EffectKind::MeasErr,
        }
    }
}

impl fmt::Display for EffectKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Hyperprior on the subject-effect scale parameter `var_eps`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EffectPrior {
    /// `sqrt(var_eps) ~ U(0, B_eps)`.
    GelmanUniform,
    /// `var_eps ~ Gamma(α1, α2)`, with gamma hyperpriors on `α1`, `α2`.
    GammaOverdispersed,
    /// Multiplicative effects `ε_i ~ Gamma(τ, τ)` with `τ ~ U(0, mult_tau_bound)`.
    UniformShape,
}

impl EffectPrior {
    pub fn name(self) -> &'static str {
        match self {
            EffectPrior::GelmanUniform => "gelman",
            EffectPrior::GammaOverdispersed => "gamma-od",
            EffectPrior::UniformShape => "uniform-shape",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaParams {
    pub shape: f64,
    pub rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriorConfig {
    /// Upper bound of the uniform prior on each coefficient SD.
    pub b_beta: f64,
    /// Upper bound of the uniform prior on the effect SD.
    pub b_eps: f64,
    /// Upper bound of the uniform prior on the outcome SD.
    pub b_y: f64,
    pub alpha1: GammaParams,
    pub alpha2: GammaParams,
    pub mult_tau_bound: f64,
    /// Prior on the Gamma-family shape.
    pub r_y: GammaParams,
}

impl Default for PriorConfig {
    fn default() -> Self {
        Self {
            b_beta: 1000.0,
            b_eps: 1000.0,
            b_y: 250.0,
            alpha1: GammaParams {
                shape: 10.0,
                rate: 0.1,
            },
            alpha2: GammaParams {
                shape: 1.0,
                rate: 0.01,
            },
            mult_tau_bound: 500.0,
            r_y: GammaParams {
                shape: 0.1,
                rate: 0.001,
            },
        }
    }
}

impl PriorConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        let positive = [
            ("b_beta", self.b_beta),
            ("b_eps", self.b_eps),
            ("b_y", self.b_y),
            ("alpha1 shape", self.alpha1.shape),
            ("alpha1 rate", self.alpha1.rate),
            ("alpha2 shape", self.alpha2.shape),
            ("alpha2 rate", self.alpha2.rate),
            ("mult_tau_bound", self.mult_tau_bound),
            ("r_y shape", self.r_y.shape),
            ("r_y rate", self.r_y.rate),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(ModelError::InvalidSpec(format!(
                    "prior setting {name} = {v} must be positive and finite"
                )));
            }
        }
        Ok(())
    }
}

/// One cell of the model lattice plus its priors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub family: Family,
    pub effect: EffectKind,
    pub include_interaction: bool,
    pub effect_prior: Option<EffectPrior>,
    pub priors: PriorConfig,
}

impl ModelSpec {
    /// The cell with its default effect prior and the interaction term.
    pub fn new(family: Family, effect: EffectKind) -> Result<Self, ModelError> {
        let spec = Self {
            family,
            effect,
            include_interaction: true,
            effect_prior: Self::default_effect_prior(family, effect),
            priors: PriorConfig::default(),
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Log-normal outcomes with an additive effect default to the
    /// overdispersed gamma hyperprior; other additive and covariate-error
    /// effects use the uniform-SD prior.
    pub fn default_effect_prior(family: Family, effect: EffectKind) -> Option<EffectPrior> {
        match (family, effect) {
            (_, EffectKind::None) => None,
            (_, EffectKind::Multiplicative) => Some(EffectPrior::UniformShape),
            (Family::LogNormal, EffectKind::Additive) => Some(EffectPrior::GammaOverdispersed),
            _ => Some(EffectPrior::GelmanUniform),
        }
    }

    pub fn with_interaction(mut self, include: bool) -> Self {
        self.include_interaction = include;
        self
    }

    pub fn with_effect_prior(mut self, prior: EffectPrior) -> Result<Self, ModelError> {
        self.effect_prior = Some(prior);
        self.validate()?;
        Ok(self)
    }

    pub fn with_priors(mut self, priors: PriorConfig) -> Result<Self, ModelError> {
        self.priors = priors;
        self.validate()?;
        Ok(self)
    }

    /// The nine default cells, row-major by family then I / II / III.
    pub fn lattice() -> Vec<ModelSpec> {
        Family::ALL
            .iter()
            .flat_map(|&family| {
                [
                    EffectKind::None,
                    EffectKind::Additive,
                    EffectKind::model_three(family),
                ]
                .into_iter()
                .map(move |effect| ModelSpec::new(family, effect).expect("lattice cell is valid"))
            })
            .collect()
    }

    /// Additive-effect cells with the alternative effect prior, for prior
    /// sensitivity comparisons against the lattice defaults.
    pub fn prior_sensitivity_variants() -> Vec<ModelSpec> {
        vec![
            ModelSpec::new(Family::LogNormal, EffectKind::Additive)
                .and_then(|s| s.with_effect_prior(EffectPrior::GelmanUniform))
                .expect("valid"),
            ModelSpec::new(Family::Gamma, EffectKind::Additive)
                .and_then(|s| s.with_effect_prior(EffectPrior::GammaOverdispersed))
                .expect("valid"),
        ]
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        self.priors.validate()?;
        if self.effect == EffectKind::Multiplicative && self.family != Family::LogNormal {
            return Err(ModelError::InvalidSpec(
                "multiplicative effects require the lognormal family".into(),
            ));
        }
        match (self.effect, self.effect_prior) {
            (EffectKind::None, Some(_)) => Err(ModelError::InvalidSpec(
                "a model without subject effects takes no effect prior".into(),
            )),
            (EffectKind::None, None) => Ok(()),
            (_, None) => Err(ModelError::InvalidSpec(format!(
                "{} effects need an effect prior",
                self.effect
            ))),
            (EffectKind::Multiplicative, Some(EffectPrior::GelmanUniform)) => {
                Err(ModelError::InvalidSpec(
                    "multiplicative effects take a uniform-shape or gamma-od prior".into(),
                ))
            }
            (EffectKind::Additive | EffectKind::MeasErr, Some(EffectPrior::UniformShape)) => {
                Err(ModelError::InvalidSpec(
                    "the uniform-shape prior applies to multiplicative effects only".into(),
                ))
            }
            _ => Ok(()),
        }
    }

    /// 5 with the socdes × edu interaction, 4 without.
    pub fn n_coefficients(&self) -> usize {
        if self.include_interaction {
            5
        } else {
            4
        }
    }

    pub fn has_effects(&self) -> bool {
        self.effect != EffectKind::None
    }

    pub fn has_alphas(&self) -> bool {
        self.effect_prior == Some(EffectPrior::GammaOverdispersed)
    }

    /// Short identifier such as `lognormal-additive`.
    pub fn label(&self) -> String {
        let mut s = format!("{}-{}", self.family, self.effect);
        if let Some(p) = self.effect_prior {
            if Some(p) != Self::default_effect_prior(self.family, self.effect) {
                s.push('-');
                s.push_str(p.name());
            }
        }
        if !self.include_interaction {
            s.push_str("-noint");
        }
        s
    }

    /// The expenditure covariate as it enters the predictor: raw for
    /// Normal/Gamma outcomes, logged for log-normal outcomes.
    pub fn expenditure_term(&self, dlw: f64) -> f64 {
        match self.family {
            Family::LogNormal => dlw.ln(),
            _ => dlw,
        }
    }
}

/// A single point in parameter space.
///
/// Variance-role fields hold variances. Under multiplicative effects
/// `var_eps` holds the common shape/rate `τ` of `ε_i ~ Gamma(τ, τ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterState {
    pub beta: Vec<f64>,
    pub eps: Vec<f64>,
    pub var_y: Option<f64>,
    pub var_beta: Vec<f64>,
    pub var_eps: Option<f64>,
    pub alpha1: Option<f64>,
    pub alpha2: Option<f64>,
    pub r_y: Option<f64>,
}

impl ParameterState {
    /// Checks that the set of present fields matches the model.
    pub fn check_shape(&self, spec: &ModelSpec, n: usize) -> Result<(), ModelError> {
        let k = spec.n_coefficients();
        let fail = |msg: String| Err(ModelError::StateMismatch(msg));
        if self.beta.len() != k || self.var_beta.len() != k {
            return fail(format!(
                "expected {k} coefficients, got beta {} / var_beta {}",
                self.beta.len(),
                self.var_beta.len()
            ));
        }
        let n_eps = if spec.has_effects() { n } else { 0 };
        if self.eps.len() != n_eps {
            return fail(format!("expected {n_eps} effects, got {}", self.eps.len()));
        }
        if self.var_y.is_some() != spec.family.has_outcome_variance() {
            return fail("var_y presence does not match family".into());
        }
        if self.r_y.is_some() != (spec.family == Family::Gamma) {
            return fail("r_y presence does not match family".into());
        }
        if self.var_eps.is_some() != spec.has_effects() {
            return fail("var_eps presence does not match effect".into());
        }
        if self.alpha1.is_some() != spec.has_alphas() || self.alpha2.is_some() != spec.has_alphas()
        {
            return fail("alpha presence does not match effect prior".into());
        }
        Ok(())
    }
}

#[inline]
pub(crate) fn predictor_parts(
    spec: &ModelSpec,
    beta: &[f64],
    eps: Option<f64>,
    t: f64,
    socdes: f64,
    edu: f64,
) -> f64 {
    let mut fixed = beta[0] + beta[2] * socdes + beta[3] * edu;
    if spec.include_interaction {
        fixed += beta[4] * socdes * edu;
    }
    match (spec.effect, eps) {
        (EffectKind::None, _) | (_, None) => fixed + beta[1] * t,
        (EffectKind::Additive, Some(e)) => fixed + beta[1] * t + e,
        (EffectKind::MeasErr, Some(e)) => fixed + beta[1] * (t + e),
        (EffectKind::Multiplicative, Some(e)) => fixed + beta[1] * (t * e),
    }
}

/// Linear predictor `μ_i` for observation `i`.
pub fn linear_predictor(
    spec: &ModelSpec,
    state: &ParameterState,
    data: &Dataset,
    i: usize,
) -> Result<f64, ModelError> {
    let n = data.len();
    if i >= n {
        return Err(ModelError::IndexOutOfRange { index: i, n });
    }
    state.check_shape(spec, n)?;
    let eps = spec.has_effects().then(|| state.eps[i]);
    Ok(predictor_parts(
        spec,
        &state.beta,
        eps,
        spec.expenditure_term(data.dlw[i]),
        data.socdes[i],
        data.edu[i],
    ))
}

/// Log-density of one observation given its linear predictor.
///
/// Log-normal outcomes are scored as the normal density of `ln(y)`, with no
/// Jacobian term.
#[inline]
pub(crate) fn obs_log_density(
    family: Family,
    y: f64,
    mu: f64,
    var_y: Option<f64>,
    r_y: Option<f64>,
) -> f64 {
    match family {
        Family::Normal => match var_y {
            Some(v) if v > 0.0 => ln_normal(y, mu, v),
            _ => f64::NEG_INFINITY,
        },
        Family::LogNormal => match var_y {
            Some(v) if v > 0.0 => ln_normal(y.ln(), mu, v),
            _ => f64::NEG_INFINITY,
        },
        Family::Gamma => match r_y {
            Some(r) if r > 0.0 && mu > 0.0 => ln_gamma_density(y, r, r / mu),
            _ => f64::NEG_INFINITY,
        },
    }
}

/// Sum of per-observation log-densities.
///
/// # Panics
/// If `state` does not have the shape `spec` requires.
pub fn log_likelihood(spec: &ModelSpec, state: &ParameterState, data: &Dataset) -> f64 {
    if let Err(e) = state.check_shape(spec, data.len()) {
        panic!("log_likelihood: {e}");
    }
    let mut total = 0.0;
    for i in 0..data.len() {
        let eps = spec.has_effects().then(|| state.eps[i]);
        let mu = predictor_parts(
            spec,
            &state.beta,
            eps,
            spec.expenditure_term(data.dlw[i]),
            data.socdes[i],
            data.edu[i],
        );
        total += obs_log_density(spec.family, data.ffq[i], mu, state.var_y, state.r_y);
        if total == f64::NEG_INFINITY {
            break;
        }
    }
    total
}

/// `ln` of a uniform density on `(0, bound]`, evaluated for a standard deviation.
#[inline]
pub(crate) fn ln_uniform_sd(sd: f64, bound: f64) -> f64 {
    if sd > 0.0 && sd <= bound {
        -bound.ln()
    } else {
        f64::NEG_INFINITY
    }
}

#[inline]
pub(crate) fn ln_gamma_or_neg_inf(x: f64, shape: f64, rate: f64) -> f64 {
    if x > 0.0 && x.is_finite() && shape > 0.0 && rate > 0.0 {
        ln_gamma_density(x, shape, rate)
    } else {
        f64::NEG_INFINITY
    }
}

/// Log prior density of the subject effects given their scale parameter.
pub(crate) fn ln_effect_prior(spec: &ModelSpec, eps: &[f64], scale: f64) -> f64 {
    if !(scale > 0.0) {
        return f64::NEG_INFINITY;
    }
    match spec.effect {
        EffectKind::None => 0.0,
        EffectKind::Additive | EffectKind::MeasErr => {
            eps.iter().map(|&e| ln_normal(e, 0.0, scale)).sum()
        }
        EffectKind::Multiplicative => eps
            .iter()
            .map(|&e| ln_gamma_or_neg_inf(e, scale, scale))
            .sum(),
    }
}

/// Log hyperprior of the effect scale parameter (and `α1`, `α2` when present).
pub(crate) fn ln_effect_hyperprior(
    spec: &ModelSpec,
    scale: f64,
    alpha1: Option<f64>,
    alpha2: Option<f64>,
) -> f64 {
    let p = &spec.priors;
    match spec.effect_prior {
        None => 0.0,
        Some(EffectPrior::GelmanUniform) => ln_uniform_sd(scale.max(0.0).sqrt(), p.b_eps),
        Some(EffectPrior::UniformShape) => {
            if scale > 0.0 && scale <= p.mult_tau_bound {
                -p.mult_tau_bound.ln()
            } else {
                f64::NEG_INFINITY
            }
        }
        Some(EffectPrior::GammaOverdispersed) => {
            let (Some(a1), Some(a2)) = (alpha1, alpha2) else {
                return f64::NEG_INFINITY;
            };
            ln_gamma_or_neg_inf(scale, a1, a2)
                + ln_gamma_or_neg_inf(a1, p.alpha1.shape, p.alpha1.rate)
                + ln_gamma_or_neg_inf(a2, p.alpha2.shape, p.alpha2.rate)
        }
    }
}

/// Full log posterior density up to the marginal likelihood.
///
/// The density is taken with respect to the parameterization the sampler
/// uses: standard deviations for every parameter with a uniform-on-SD prior,
/// the parameter itself otherwise. Returns `-∞` outside the prior support.
///
/// # Panics
/// If `state` does not have the shape `spec` requires.
pub fn log_joint(spec: &ModelSpec, state: &ParameterState, data: &Dataset) -> f64 {
    let p = &spec.priors;
    let mut total = 0.0;

    for (&b, &v) in state.beta.iter().zip(&state.var_beta) {
        if !(v > 0.0) {
            return f64::NEG_INFINITY;
        }
        total += ln_normal(b, 0.0, v) + ln_uniform_sd(v.sqrt(), p.b_beta);
    }

    match spec.family {
        Family::Normal | Family::LogNormal => {
            let v = state.var_y.unwrap_or(f64::NAN);
            total += ln_uniform_sd(if v > 0.0 { v.sqrt() } else { -1.0 }, p.b_y);
        }
        Family::Gamma => {
            total += ln_gamma_or_neg_inf(state.r_y.unwrap_or(f64::NAN), p.r_y.shape, p.r_y.rate);
        }
    }

    if spec.has_effects() {
        let scale = state.var_eps.unwrap_or(f64::NAN);
        total += ln_effect_prior(spec, &state.eps, scale);
        total += ln_effect_hyperprior(spec, scale, state.alpha1, state.alpha2);
    }

    if total == f64::NEG_INFINITY || total.is_nan() {
        return f64::NEG_INFINITY;
    }
    total + log_likelihood(spec, state, data)
}
