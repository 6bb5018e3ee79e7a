//! Brooks-Gelman-Rubin convergence checks and posterior summaries.

use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

use crate::mcmc::PosteriorSamples;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DiagnosticsError {
    #[error("need at least 2 chains, got {0}")]
    TooFewChains(usize),
    #[error("chains must all have the same length of at least 2")]
    RaggedChains,
    #[error("within-chain variance is zero (constant traces)")]
    DegenerateTrace,
    #[error("need at least 2 samples, got {0}")]
    TooFewSamples(usize),
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn sample_variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

/// Potential scale reduction `sqrt(V / W)`, where `W` is the mean
/// within-chain variance, `B/n` the variance of the chain means and
/// `V = (n-1)/n W + B/n`.
pub fn bgr_statistic<T: AsRef<[f64]>>(chains: &[T]) -> Result<f64, DiagnosticsError> {
    let m = chains.len();
    if m < 2 {
        return Err(DiagnosticsError::TooFewChains(m));
    }
    let n = chains[0].as_ref().len();
    if n < 2 || chains.iter().any(|c| c.as_ref().len() != n) {
        return Err(DiagnosticsError::RaggedChains);
    }
    let within = chains
        .iter()
        .map(|c| sample_variance(c.as_ref()))
        .sum::<f64>()
        / m as f64;
    if !(within > 0.0) {
        return Err(DiagnosticsError::DegenerateTrace);
    }
    let means: Vec<f64> = chains.iter().map(|c| mean(c.as_ref())).collect();
    let between_over_n = sample_variance(&means);
    let nf = n as f64;
    let v_hat = (nf - 1.0) / nf * within + between_over_n;
    Ok((v_hat / within).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSummary {
    pub name: String,
    pub mean: f64,
    pub sd: f64,
    pub q025: f64,
    pub q50: f64,
    pub q975: f64,
    /// The 95% equal-tailed interval excludes zero.
    pub significant: bool,
}

/// Empirical quantile with linear interpolation between order statistics.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn summarize(trace: &[f64], name: &str) -> Result<ParamSummary, DiagnosticsError> {
    if trace.len() < 2 {
        return Err(DiagnosticsError::TooFewSamples(trace.len()));
    }
    let mut sorted = trace.to_vec();
    sorted.sort_by(f64::total_cmp);
    let q025 = quantile_sorted(&sorted, 0.025);
    let q975 = quantile_sorted(&sorted, 0.975);
    Ok(ParamSummary {
        name: name.to_string(),
        mean: mean(trace),
        sd: sample_variance(trace).max(0.0).sqrt(),
        q025,
        q50: quantile_sorted(&sorted, 0.5),
        q975,
        significant: q025 > 0.0 || q975 < 0.0,
    })
}

/// Named scalar traces extracted from one chain, in a fixed order.
pub fn monitored_traces(samples: &PosteriorSamples) -> Vec<(String, Vec<f64>)> {
    let mut out = Vec::new();
    let Some(first) = samples.draws.first() else {
        return out;
    };
    let col = |f: &dyn Fn(&crate::model::ParameterState) -> f64| {
        samples.draws.iter().map(f).collect::<Vec<f64>>()
    };
    for k in 0..first.beta.len() {
        out.push((format!("beta{k}"), col(&|s| s.beta[k])));
    }
    for k in 0..first.var_beta.len() {
        out.push((format!("var_beta{k}"), col(&|s| s.var_beta[k])));
    }
    if first.var_y.is_some() {
        out.push(("var_y".into(), col(&|s| s.var_y.unwrap_or(f64::NAN))));
    }
    if first.var_eps.is_some() {
        out.push(("var_eps".into(), col(&|s| s.var_eps.unwrap_or(f64::NAN))));
    }
    if first.r_y.is_some() {
        out.push(("r_y".into(), col(&|s| s.r_y.unwrap_or(f64::NAN))));
    }
    out.push(("deviance".into(), samples.deviance_trace.clone()));
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RhatEntry {
    pub name: String,
    /// `None` for a degenerate (constant) trace.
    pub rhat: Option<f64>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub threshold: f64,
    pub entries: Vec<RhatEntry>,
    pub degenerate: Vec<String>,
    pub passed: bool,
}

impl ConvergenceReport {
    pub fn failing(&self) -> Vec<&str> {
        self.entries
            .iter()
            .filter(|e| !e.pass)
            .map(|e| e.name.as_str())
            .collect()
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{:<12} {:>10}  status", "name", "R-hat");
        for e in &self.entries {
            let r = e
                .rhat
                .map_or_else(|| "degenerate".to_string(), |r| format!("{r:.4}"));
            let _ = writeln!(
                s,
                "{:<12} {:>10}  {}",
                e.name,
                r,
                if e.pass { "pass" } else { "FAIL" }
            );
        }
        let _ = writeln!(
            s,
            "overall: {} (threshold {})",
            if self.passed {
                "converged"
            } else {
                "NOT converged"
            },
            self.threshold
        );
        s
    }
}

/// Computes R-hat for every monitored scalar across chains. Constant traces
/// are listed as degenerate and count as failures.
pub fn check_convergence(
    chains: &[PosteriorSamples],
    threshold: f64,
) -> Result<ConvergenceReport, DiagnosticsError> {
    if chains.len() < 2 {
        return Err(DiagnosticsError::TooFewChains(chains.len()));
    }
    let per_chain: Vec<Vec<(String, Vec<f64>)>> = chains.iter().map(monitored_traces).collect();
    convergence_from_traces(&per_chain, threshold)
}

/// As [`check_convergence`], from named traces per chain (all chains must
/// carry the same names in the same order).
pub fn convergence_from_traces(
    per_chain: &[Vec<(String, Vec<f64>)>],
    threshold: f64,
) -> Result<ConvergenceReport, DiagnosticsError> {
    if per_chain.len() < 2 {
        return Err(DiagnosticsError::TooFewChains(per_chain.len()));
    }
    let mut entries = Vec::new();
    let mut degenerate = Vec::new();
    for (j, (name, _)) in per_chain[0].iter().enumerate() {
        let traces: Vec<&[f64]> = per_chain.iter().map(|c| c[j].1.as_slice()).collect();
        match bgr_statistic(&traces) {
            Ok(r) => entries.push(RhatEntry {
                name: name.clone(),
                rhat: Some(r),
                pass: r < threshold,
            }),
            Err(DiagnosticsError::DegenerateTrace) => {
                degenerate.push(name.clone());
                entries.push(RhatEntry {
                    name: name.clone(),
                    rhat: None,
                    pass: false,
                });
            }
            Err(e) => return Err(e),
        }
    }
    let passed = entries.iter().all(|e| e.pass);
    Ok(ConvergenceReport {
        threshold,
        entries,
        degenerate,
        passed,
    })
}
