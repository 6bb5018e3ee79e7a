//! Model comparison: DIC, posterior predictive loss (MSPE), standardized
//! predictive residuals and their agreement with normal quantiles.

use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

use crate::diagnostics::{summarize, ConvergenceReport, ParamSummary};
use crate::mcmc::{
    coord_support, coord_value, set_coord, sweep_coordinates, PosteriorSamples, SamplerConfig,
};
use crate::model::{
    linear_predictor, log_likelihood, Dataset, EffectPrior, Family, ModelSpec, ParameterState,
};
use crate::stats::{normal_quantile, RngStream};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SelectionError {
    #[error("need at least {need} posterior draws, got {got}")]
    TooFewDraws { need: usize, got: usize },
    #[error("need at least 3 defined residuals, got {0}")]
    TooFewResiduals(usize),
    #[error("residuals have zero variance; correlation undefined")]
    ZeroVariance,
    #[error("{0}")]
    Summary(#[from] crate::diagnostics::DiagnosticsError),
}

/// `-2 log L`; `+∞` outside the likelihood's support.
pub fn deviance(spec: &ModelSpec, state: &ParameterState, data: &Dataset) -> f64 {
    -2.0 * log_likelihood(spec, state, data)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dic {
    pub dbar: f64,
    /// Deviance at the posterior-mean state; `None` when infinite.
    pub d_at_mean: Option<f64>,
    pub p_d: Option<f64>,
    pub dic: Option<f64>,
    pub negative_pd: bool,
    /// The posterior-mean state had to be pulled back into the prior support.
    pub mean_state_clamped: bool,
}

/// Mean accumulated as offsets from the first value, so that a constant
/// sequence averages to exactly that constant.
pub fn shifted_mean(xs: &[f64]) -> f64 {
    let x0 = xs[0];
    x0 + xs.iter().map(|x| x - x0).sum::<f64>() / xs.len() as f64
}

/// DIC from mean deviance and the deviance at the posterior mean.
pub fn dic_from_parts(deviances: &[f64], d_at_mean: f64) -> Dic {
    let dbar = shifted_mean(deviances);
    if !d_at_mean.is_finite() {
        return Dic {
            dbar,
            d_at_mean: None,
            p_d: None,
            dic: None,
            negative_pd: false,
            mean_state_clamped: false,
        };
    }
    let p_d = dbar - d_at_mean;
    Dic {
        dbar,
        d_at_mean: Some(d_at_mean),
        p_d: Some(p_d),
        dic: Some(dbar + p_d),
        negative_pd: p_d < 0.0,
        mean_state_clamped: false,
    }
}

/// Coordinate-wise posterior mean. Standard deviations (and the variance
/// `var_eps` under a gamma hyperprior) are averaged on the SD scale and
/// squared back. Returns whether any coordinate had to be clamped.
pub fn posterior_mean_state(spec: &ModelSpec, draws: &[ParameterState]) -> (ParameterState, bool) {
    let avg = |f: &dyn Fn(&ParameterState) -> f64| {
        shifted_mean(&draws.iter().map(f).collect::<Vec<f64>>())
    };
    let avg_sd = |f: &dyn Fn(&ParameterState) -> f64| {
        let s = shifted_mean(&draws.iter().map(|d| f(d).sqrt()).collect::<Vec<f64>>());
        if s == f(&draws[0]).sqrt() {
            f(&draws[0])
        } else {
            s * s
        }
    };
    let first = &draws[0];
    let k = first.beta.len();
    let n_eps = first.eps.len();
    let mut st = ParameterState {
        beta: (0..k).map(|j| avg(&|d| d.beta[j])).collect(),
        eps: (0..n_eps).map(|i| avg(&|d| d.eps[i])).collect(),
        var_y: first
            .var_y
            .map(|_| avg_sd(&|d| d.var_y.unwrap_or(f64::NAN))),
        var_beta: (0..k).map(|j| avg_sd(&|d| d.var_beta[j])).collect(),
        var_eps: first.var_eps.map(|_| {
            let get = |d: &ParameterState| d.var_eps.unwrap_or(f64::NAN);
            match spec.effect_prior {
                Some(EffectPrior::UniformShape) => avg(&get),
                _ => avg_sd(&get),
            }
        }),
        alpha1: first.alpha1.map(|_| avg(&|d| d.alpha1.unwrap_or(f64::NAN))),
        alpha2: first.alpha2.map(|_| avg(&|d| d.alpha2.unwrap_or(f64::NAN))),
        r_y: first.r_y.map(|_| avg(&|d| d.r_y.unwrap_or(f64::NAN))),
    };

    let mut clamped = false;
    for coord in sweep_coordinates(spec, n_eps) {
        let support = coord_support(spec, coord);
        let v = coord_value(spec, &st, coord);
        if !support.contains(v) {
            let fixed = if v <= support.lo {
                if support.lo == 0.0 {
                    f64::MIN_POSITIVE.sqrt()
                } else {
                    support.lo.next_up()
                }
            } else {
                support.hi.next_down()
            };
            set_coord(spec, &mut st, coord, fixed);
            clamped = true;
        }
    }
    (st, clamped)
}

/// DIC over pooled draws, using each draw's recorded deviance.
pub fn dic(
    samples: &PosteriorSamples,
    spec: &ModelSpec,
    data: &Dataset,
) -> Result<Dic, SelectionError> {
    if samples.len() < 2 {
        return Err(SelectionError::TooFewDraws {
            need: 2,
            got: samples.len(),
        });
    }
    let (mean_state, clamped) = posterior_mean_state(spec, &samples.draws);
    let mut out = dic_from_parts(&samples.deviance_trace, deviance(spec, &mean_state, data));
    out.mean_state_clamped = clamped;
    Ok(out)
}

/// Posterior-predictive expectation of observation `i` on the kcal/day scale.
pub fn predictive_mean(spec: &ModelSpec, state: &ParameterState, data: &Dataset, i: usize) -> f64 {
    let mu = linear_predictor(spec, state, data, i).expect("index and state checked by caller");
    match spec.family {
        Family::LogNormal => (mu + 0.5 * state.var_y.unwrap_or(f64::NAN)).exp(),
        _ => mu,
    }
}

pub fn mspe_from_predictions(observed: &[f64], predicted: &[f64]) -> f64 {
    observed
        .iter()
        .zip(predicted)
        .map(|(y, p)| (y - p).powi(2))
        .sum::<f64>()
        / observed.len() as f64
}

/// Mean squared difference between each observation and its posterior
/// predictive mean, always on the original outcome scale.
pub fn mspe(
    samples: &PosteriorSamples,
    spec: &ModelSpec,
    data: &Dataset,
) -> Result<f64, SelectionError> {
    if samples.is_empty() {
        return Err(SelectionError::TooFewDraws { need: 1, got: 0 });
    }
    let m = samples.len() as f64;
    let predicted: Vec<f64> = (0..data.len())
        .map(|i| {
            samples
                .draws
                .iter()
                .map(|d| predictive_mean(spec, d, data, i))
                .sum::<f64>()
                / m
        })
        .collect();
    Ok(mspe_from_predictions(data.ffq(), &predicted))
}

fn draw_replicate(spec: &ModelSpec, state: &ParameterState, mu: f64, rng: &mut RngStream) -> f64 {
    match spec.family {
        Family::Normal => mu + state.var_y.unwrap_or(f64::NAN).sqrt() * rng.std_normal(),
        Family::LogNormal => (mu + state.var_y.unwrap_or(f64::NAN).sqrt() * rng.std_normal()).exp(),
        Family::Gamma => {
            let r = state.r_y.unwrap_or(f64::NAN);
            rng.gamma_unchecked(r, r / mu)
        }
    }
}

/// `(y_i - mean(y_rep_i)) / sd(y_rep_i)` with one replicate per draw.
/// `None` where the replicates have zero spread.
pub fn predictive_residuals(
    samples: &PosteriorSamples,
    spec: &ModelSpec,
    data: &Dataset,
    rng: &mut RngStream,
) -> Result<Vec<Option<f64>>, SelectionError> {
    let m = samples.len();
    if m < 2 {
        return Err(SelectionError::TooFewDraws { need: 2, got: m });
    }
    let n = data.len();
    let mut reps = vec![Vec::with_capacity(m); n];
    for d in &samples.draws {
        for (i, r) in reps.iter_mut().enumerate() {
            let mu = linear_predictor(spec, d, data, i).expect("state matches spec");
            r.push(draw_replicate(spec, d, mu, rng));
        }
    }
    Ok(reps
        .iter()
        .zip(data.ffq())
        .map(|(r, &y)| {
            let mean = r.iter().sum::<f64>() / m as f64;
            let var = r.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m as f64 - 1.0);
            (var > 0.0 && var.is_finite()).then(|| (y - mean) / var.sqrt())
        })
        .collect())
}

/// Sorted residuals paired with normal plotting quantiles `Φ⁻¹((i - 0.5)/n)`.
pub fn quantile_pairs(residuals: &[f64]) -> Vec<(f64, f64)> {
    let mut sorted = residuals.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .into_iter()
        .enumerate()
        .map(|(i, r)| {
            let q = normal_quantile((i as f64 + 0.5) / n).expect("plotting position in (0,1)");
            (q, r)
        })
        .collect()
}

/// Pearson correlation between sorted residuals and normal plotting quantiles.
pub fn residual_normal_correlation(residuals: &[f64]) -> Result<f64, SelectionError> {
    if residuals.len() < 3 {
        return Err(SelectionError::TooFewResiduals(residuals.len()));
    }
    let pairs = quantile_pairs(residuals);
    let n = pairs.len() as f64;
    let (mq, mr) = pairs
        .iter()
        .fold((0.0, 0.0), |(a, b), (q, r)| (a + q / n, b + r / n));
    let (mut sqq, mut srr, mut sqr) = (0.0, 0.0, 0.0);
    for (q, r) in &pairs {
        sqq += (q - mq).powi(2);
        srr += (r - mr).powi(2);
        sqr += (q - mq) * (r - mr);
    }
    if !(srr > 0.0) {
        return Err(SelectionError::ZeroVariance);
    }
    Ok((sqr / (sqq * srr).sqrt()).clamp(-1.0, 1.0))
}

/// Sample skewness `m3 / m2^{3/2}`.
pub fn skewness(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let m2 = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n;
    let m3 = xs.iter().map(|x| (x - m).powi(3)).sum::<f64>() / n;
    m3 / m2.powf(1.5)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub spec: ModelSpec,
    pub sampler: SamplerConfig,
    pub n_draws: usize,
    pub dbar: f64,
    pub d_at_mean: Option<f64>,
    #[serde(rename = "pD")]
    pub p_d: Option<f64>,
    pub dic: Option<f64>,
    pub negative_pd: bool,
    pub mean_state_clamped: bool,
    pub mspe: f64,
    pub summaries: Vec<ParamSummary>,
    pub residuals: Vec<Option<f64>>,
    pub resid_normal_corr: Option<f64>,
    pub convergence: Option<ConvergenceReport>,
}

impl FitReport {
    /// Builds the report from all chains of one fit.
    pub fn build(
        spec: &ModelSpec,
        data: &Dataset,
        chains: &[PosteriorSamples],
        sampler: SamplerConfig,
        convergence: Option<ConvergenceReport>,
        rng: &mut RngStream,
    ) -> Result<FitReport, SelectionError> {
        let pooled = PosteriorSamples::pool(chains)
            .ok_or(SelectionError::TooFewDraws { need: 2, got: 0 })?;
        let dic = dic(&pooled, spec, data)?;
        let mspe = mspe(&pooled, spec, data)?;
        let residuals = predictive_residuals(&pooled, spec, data, rng)?;
        let defined: Vec<f64> = residuals.iter().flatten().copied().collect();
        let resid_normal_corr = residual_normal_correlation(&defined).ok();
        let summaries = posterior_summaries(&pooled)?;
        Ok(FitReport {
            spec: spec.clone(),
            sampler,
            n_draws: pooled.len(),
            dbar: dic.dbar,
            d_at_mean: dic.d_at_mean,
            p_d: dic.p_d,
            dic: dic.dic,
            negative_pd: dic.negative_pd,
            mean_state_clamped: dic.mean_state_clamped,
            mspe,
            summaries,
            residuals,
            resid_normal_corr,
            convergence,
        })
    }

    /// Names of coefficients whose 95% interval excludes zero.
    pub fn significant_coefficients(&self) -> Vec<String> {
        self.summaries
            .iter()
            .filter(|s| s.name.starts_with("beta") && s.significant)
            .map(|s| s.name.clone())
            .collect()
    }

    pub fn summary(&self, name: &str) -> Option<&ParamSummary> {
        self.summaries.iter().find(|s| s.name == name)
    }
}

/// Summaries of coefficients and scale parameters.
pub fn posterior_summaries(pooled: &PosteriorSamples) -> Result<Vec<ParamSummary>, SelectionError> {
    let draws = &pooled.draws;
    let first = draws
        .first()
        .ok_or(SelectionError::TooFewDraws { need: 2, got: 0 })?;
    let col = |f: &dyn Fn(&ParameterState) -> f64| draws.iter().map(f).collect::<Vec<_>>();
    let mut out = Vec::new();
    for k in 0..first.beta.len() {
        out.push(summarize(&col(&|d| d.beta[k]), &format!("beta{k}"))?);
    }
    for k in 0..first.var_beta.len() {
        out.push(summarize(
            &col(&|d| d.var_beta[k]),
            &format!("var_beta{k}"),
        )?);
    }
    let optional: [(&str, fn(&ParameterState) -> Option<f64>); 5] = [
        ("var_y", |d| d.var_y),
        ("var_eps", |d| d.var_eps),
        ("alpha1", |d| d.alpha1),
        ("alpha2", |d| d.alpha2),
        ("r_y", |d| d.r_y),
    ];
    for (name, get) in optional {
        if get(first).is_some() {
            out.push(summarize(&col(&|d| get(d).unwrap_or(f64::NAN)), name)?);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonCell {
    pub label: String,
    pub mspe: f64,
    pub dic: Option<f64>,
    pub p_d: Option<f64>,
    pub negative_pd: bool,
    pub significant: Vec<String>,
    pub best_dic: bool,
    pub best_mspe: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub label: String,
    pub cells: [Option<ComparisonCell>; 3],
}

/// Family × effect-structure (I / II / III) table of fits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub rows: Vec<ComparisonRow>,
}

const COLUMN_NAMES: [&str; 3] = ["I", "II", "III"];

/// Arranges reports into the comparison table and marks the lowest DIC and
/// the lowest MSPE.
pub fn compare(reports: &[FitReport]) -> ComparisonTable {
    let mut rows: Vec<ComparisonRow> = Vec::new();
    for r in reports {
        let col = r.spec.effect.column();
        let mut label = r.spec.family.name().to_string();
        if let Some(p) = r.spec.effect_prior {
            if Some(p) != ModelSpec::default_effect_prior(r.spec.family, r.spec.effect) {
                label = format!("{label} [{}]", p.name());
            }
        }
        if !r.spec.include_interaction {
            label.push_str(" [no interaction]");
        }
        let cell = ComparisonCell {
            label: r.spec.label(),
            mspe: r.mspe,
            dic: r.dic,
            p_d: r.p_d,
            negative_pd: r.negative_pd,
            significant: r.significant_coefficients(),
            best_dic: false,
            best_mspe: false,
        };
        let slot = rows
            .iter_mut()
            .find(|row| row.label == label && row.cells[col].is_none());
        match slot {
            Some(row) => row.cells[col] = Some(cell),
            None => {
                let mut cells: [Option<ComparisonCell>; 3] = [None, None, None];
                cells[col] = Some(cell);
                rows.push(ComparisonRow { label, cells });
            }
        }
    }

    let mut best_dic: Option<(usize, usize, f64)> = None;
    let mut best_mspe: Option<(usize, usize, f64)> = None;
    for (ri, row) in rows.iter().enumerate() {
        for (ci, cell) in row.cells.iter().enumerate() {
            let Some(c) = cell else { continue };
            if let Some(d) = c.dic {
                if best_dic.is_none_or(|(_, _, b)| d < b) {
                    best_dic = Some((ri, ci, d));
                }
            }
            if best_mspe.is_none_or(|(_, _, b)| c.mspe < b) {
                best_mspe = Some((ri, ci, c.mspe));
            }
        }
    }
    if let Some((r, c, _)) = best_dic {
        rows[r].cells[c].as_mut().expect("cell").best_dic = true;
    }
    if let Some((r, c, _)) = best_mspe {
        rows[r].cells[c].as_mut().expect("cell").best_mspe = true;
    }
    ComparisonTable { rows }
}

impl ComparisonTable {
    pub fn cells(&self) -> impl Iterator<Item = &ComparisonCell> {
        self.rows.iter().flat_map(|r| r.cells.iter().flatten())
    }

    pub fn to_text(&self) -> String {
        let label_w = self
            .rows
            .iter()
            .map(|r| r.label.len())
            .max()
            .unwrap_or(6)
            .max(6);
        let mut s = String::new();
        let _ = write!(s, "{:<label_w$}", "");
        for name in COLUMN_NAMES {
            let _ = write!(s, " | {name:^27}");
        }
        s.push('\n');
        let _ = write!(s, "{:<label_w$}", "family");
        for _ in COLUMN_NAMES {
            let _ = write!(s, " | {:>13} {:>13}", "MSPE", "DIC");
        }
        s.push('\n');
        let _ = writeln!(s, "{}", "-".repeat(label_w + 3 * 30));
        let mut footnote = false;
        for row in &self.rows {
            let _ = write!(s, "{:<label_w$}", row.label);
            for cell in &row.cells {
                match cell {
                    Some(c) => {
                        let m = format!("{:.1}{}", c.mspe, if c.best_mspe { "*" } else { "" });
                        let d = match c.dic {
                            Some(d) => format!(
                                "{d:.2}{}{}",
                                if c.negative_pd { "†" } else { "" },
                                if c.best_dic { "*" } else { "" }
                            ),
                            None => "undefined".to_string(),
                        };
                        footnote |= c.negative_pd;
                        let _ = write!(s, " | {m:>13} {d:>13}");
                    }
                    None => {
                        let _ = write!(s, " | {:>13} {:>13}", "-", "-");
                    }
                }
            }
            s.push('\n');
            let _ = write!(s, "{:<label_w$}", "");
            for cell in &row.cells {
                let sig = match cell {
                    Some(c) if c.significant.is_empty() => "(none significant)".to_string(),
                    Some(c) => c.significant.join(", "),
                    None => String::new(),
                };
                let _ = write!(s, " | {sig:<27}");
            }
            s.push('\n');
        }
        s.push_str("* lowest value in its criterion\n");
        if footnote {
            s.push_str("† negative pD: the DIC cannot be fully relied on for this fit\n");
        }
        s
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from(
            "family,column,model,mspe,dic,pD,negative_pd,best_dic,best_mspe,significant\n",
        );
        let opt = |v: Option<f64>| v.map_or_else(String::new, |x| x.to_string());
        for row in &self.rows {
            for (ci, cell) in row.cells.iter().enumerate() {
                let Some(c) = cell else { continue };
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{},{},{},{},{}",
                    row.label,
                    COLUMN_NAMES[ci],
                    c.label,
                    c.mspe,
                    opt(c.dic),
                    opt(c.p_d),
                    c.negative_pd,
                    c.best_dic,
                    c.best_mspe,
                    c.significant.join(" ")
                );
            }
        }
        s
    }
}
