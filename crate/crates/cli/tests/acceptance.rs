//! End-to-end acceptance checks. Runs as a plain binary and prints one
//! PASS/FAIL line per criterion; exits non-zero if any criterion fails.

use std::collections::BTreeMap;
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use hiermc::diagnostics::{bgr_statistic, check_convergence};
use hiermc::io::load_csv;
use hiermc::mcmc::{run_multi, slice_sample_scalar, PosteriorSamples, SamplerConfig, Support};
use hiermc::model::{Dataset, EffectKind, Family, ModelSpec};
use hiermc::selection::{dic, mspe, skewness, FitReport};
use hiermc::simulate::{simulate_energy, simulate_loglog, SimEnergyConfig, SimLogLogConfig};
use hiermc::stats::{gamma_logpdf, normal_logpdf, normal_quantile, RngStream};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(elapsed: Duration, limit_s: u64) -> Result<(), String> {
    ensure(
        elapsed <= Duration::from_secs(limit_s),
        format!("took {:.1}s, limit {limit_s}s", elapsed.as_secs_f64()),
    )
}

fn hiermc(args: &[&str]) -> Result<String, String> {
    let o = Command::new(env!("CARGO_BIN_EXE_hiermc"))
        .args(args)
        .env_remove("HIERMC_SEED")
        .output()
        .map_err(|e| e.to_string())?;
    if !o.status.success() {
        return Err(format!(
            "hiermc {} failed: {}",
            args.join(" "),
            String::from_utf8_lossy(&o.stderr)
        ));
    }
    Ok(String::from_utf8_lossy(&o.stdout).into_owned())
}

fn p(path: &Path) -> &str {
    path.to_str().expect("utf-8 temp path")
}

// 1

const ORACLE: &str = include_str!("../../core/tests/data/density_oracle.csv");

fn density_oracles() -> Outcome {
    let t = Instant::now();
    let mut counts = BTreeMap::new();
    let mut worst = 0.0f64;
    for line in ORACLE.lines().skip(1) {
        let mut it = line.split(',');
        let kind = it.next().unwrap();
        let f: Vec<f64> = it.map(|v| v.parse().unwrap()).collect();
        let got = match kind {
            "normal" => normal_logpdf(f[0], f[1], f[2]),
            "gamma" => gamma_logpdf(f[0], f[1], f[2]),
            "quantile" => normal_quantile(f[0]),
            other => return Err(format!("unknown oracle kind {other}")),
        }
        .map_err(|e| e.to_string())?;
        let err = (got - f[3]).abs() / f[3].abs().max(1.0);
        worst = worst.max(err);
        ensure(
            err <= 1e-9,
            format!("{kind}({:?}) = {got}, oracle {}", &f[..3], f[3]),
        )?;
        *counts.entry(kind).or_insert(0) += 1;
    }
    ensure(
        counts.values().all(|&c| c == 100) && counts.len() == 3,
        format!("point counts {counts:?}"),
    )?;
    within(t.elapsed(), 1)?;
    Ok(format!("300 points, worst scaled error {worst:.1e}"))
}

// 2

fn batch_se(xs: &[f64], batches: usize) -> f64 {
    let b = xs.len() / batches;
    let means: Vec<f64> = xs
        .chunks_exact(b)
        .map(|c| c.iter().sum::<f64>() / b as f64)
        .collect();
    let m = means.iter().sum::<f64>() / means.len() as f64;
    let var = means.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (means.len() as f64 - 1.0);
    (var / means.len() as f64).sqrt()
}

fn conjugate_recovery() -> Outcome {
    let t = Instant::now();
    let y = [2.3, 0.7, 3.1, 1.9, 2.8, -0.4, 1.5, 2.2];
    let (s2, m0, v0) = (4.0, 1.0, 9.0);
    let n = y.len() as f64;
    let v_post = 1.0 / (1.0 / v0 + n / s2);
    let m_post = v_post * (m0 / v0 + y.iter().sum::<f64>() / s2);
    let logpost = |th: f64| {
        -(th - m0).powi(2) / (2.0 * v0)
            - y.iter().map(|v| (v - th).powi(2)).sum::<f64>() / (2.0 * s2)
    };
    let mut passes = 0;
    for seed in 0..20 {
        let mut rng = RngStream::new(seed, 0);
        let mut th = 0.0;
        let mut draws = Vec::with_capacity(20_000);
        for _ in 0..20_000 {
            th = slice_sample_scalar(logpost, th, 1.0, &mut rng, Support::REAL)
                .map_err(|e| e.to_string())?;
            draws.push(th);
        }
        let mean = draws.iter().sum::<f64>() / draws.len() as f64;
        let sq: Vec<f64> = draws.iter().map(|d| (d - m_post).powi(2)).collect();
        let var = sq.iter().sum::<f64>() / sq.len() as f64;
        if (mean - m_post).abs() < 3.0 * batch_se(&draws, 40)
            && (var - v_post).abs() < 3.0 * batch_se(&sq, 40)
        {
            passes += 1;
        }
    }
    ensure(
        passes >= 19,
        format!("{passes}/20 seeds within 3 MC standard errors"),
    )?;
    within(t.elapsed(), 30)?;
    Ok(format!("{passes}/20 seeds within 3 MC standard errors"))
}

// 3 and 6

const TRUE_BETA: [f64; 5] = [500.0, 0.5, 10.0, 650.0, 0.0];

fn recovery_fit() -> Result<(ModelSpec, Vec<PosteriorSamples>, FitReport), String> {
    let sim = simulate_energy(&SimEnergyConfig {
        seed: 11,
        beta: TRUE_BETA,
        ..Default::default()
    })
    .map_err(|e| e.to_string())?;
    let spec = ModelSpec::new(Family::Normal, EffectKind::None).map_err(|e| e.to_string())?;
    let cfg = SamplerConfig {
        iterations: 20_000,
        burn_in: 10_000,
        thin: 10,
        n_chains: 3,
        seed: 11,
        init_jitter: 1.0,
    };
    let fit = run_multi(&spec, &sim.data, &cfg);
    ensure(
        fit.is_complete(),
        format!("sampler faults {:?}", fit.faults),
    )?;
    let report = FitReport::build(
        &spec,
        &sim.data,
        &fit.chains,
        cfg,
        None,
        &mut RngStream::new(11, 1 << 32),
    )
    .map_err(|e| e.to_string())?;
    Ok((spec, fit.chains, report))
}

fn parameter_recovery() -> Outcome {
    let t = Instant::now();
    let (_, _, report) = recovery_fit()?;
    let mut detail = Vec::new();
    for (j, truth) in TRUE_BETA.iter().enumerate() {
        let name = format!("beta{j}");
        let s = report
            .summary(&name)
            .ok_or(format!("no summary for {name}"))?;
        let z = (s.mean - truth) / s.sd;
        ensure(
            z.abs() <= 3.0,
            format!("{name}: mean {} sd {} truth {truth}", s.mean, s.sd),
        )?;
        detail.push(format!("{name} z={z:+.2}"));
    }
    let sig = report.significant_coefficients();
    ensure(
        sig.iter().any(|s| s == "beta1")
            && sig.iter().any(|s| s == "beta3")
            && !sig.iter().any(|s| s == "beta2"),
        format!("significant: {sig:?}"),
    )?;
    within(t.elapsed(), 120)?;
    Ok(format!("{}; significant {sig:?}", detail.join(" ")))
}

fn bgr_pinned() -> Outcome {
    let a = bgr_statistic(&[[1.0, 2.0, 3.0], [1.0, 2.0, 3.0]]).map_err(|e| e.to_string())?;
    ensure(
        (a - 0.816497).abs() <= 1e-6,
        format!("identical chains gave {a}"),
    )?;
    let b = bgr_statistic(&[[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]]).map_err(|e| e.to_string())?;
    ensure(
        (b - 2.273030).abs() <= 1e-5,
        format!("shifted chains gave {b}"),
    )?;
    let (_, chains, _) = recovery_fit()?;
    let conv = check_convergence(&chains, 1.1).map_err(|e| e.to_string())?;
    let worst = conv
        .entries
        .iter()
        .filter_map(|e| e.rhat)
        .fold(0.0, f64::max);
    ensure(
        conv.passed && conv.degenerate.is_empty(),
        format!("failing: {:?}", conv.failing()),
    )?;
    Ok(format!(
        "{a:.6}, {b:.6}; max R-hat {worst:.4} over {} parameters",
        conv.entries.len()
    ))
}

// 4 and 10

const SWEEP: [&str; 7] = [
    "--iters", "5000", "--burnin", "2500", "--thin", "5", "--seed",
];

struct Samples {
    columns: Vec<String>,
    rows: Vec<Vec<Option<f64>>>,
}

impl Samples {
    fn read(path: &Path) -> Result<Self, String> {
        let text = fs::read_to_string(path).map_err(|e| e.to_string())?;
        let mut lines = text.lines();
        let columns = lines
            .next()
            .ok_or("empty samples.csv")?
            .split(',')
            .map(str::to_string)
            .collect();
        let rows = lines
            .map(|l| {
                l.split(',')
                    .map(|c| if c.is_empty() { None } else { c.parse().ok() })
                    .collect()
            })
            .collect();
        Ok(Samples { columns, rows })
    }

    fn col(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| c == name)?;
        self.rows.iter().map(|r| r[j]).collect()
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn sd_scale_mean(xs: &[f64]) -> f64 {
    mean(&xs.iter().map(|v| v.sqrt()).collect::<Vec<_>>()).powi(2)
}

/// Independent recomputation of (dbar, pD, dic, mspe) from a samples dump.
fn oracle_criteria(spec: &ModelSpec, s: &Samples, data: &Dataset) -> Result<[f64; 4], String> {
    let n = data.len();
    let dev = s.col("deviance").ok_or("no deviance column")?;
    let dbar = mean(&dev);
    let beta: Vec<Vec<f64>> = (0..5).filter_map(|j| s.col(&format!("beta{j}"))).collect();
    let eps: Vec<Vec<f64>> = if spec.effect == EffectKind::None {
        Vec::new()
    } else {
        (1..=n)
            .map(|i| s.col(&format!("eps{i}")).ok_or("effects were not dumped"))
            .collect::<Result<_, _>>()?
    };
    let var_y = s.col("var_y");
    let r_y = s.col("r_y");

    let bbar: Vec<f64> = beta.iter().map(|b| mean(b)).collect();
    let ebar: Vec<f64> = eps.iter().map(|e| mean(e)).collect();
    let vybar = var_y.as_deref().map(sd_scale_mean);
    let rbar = r_y.as_deref().map(mean);

    let t = |i: usize| match spec.family {
        Family::LogNormal => data.dlw()[i].ln(),
        _ => data.dlw()[i],
    };
    let mu = |b: &[f64], e: Option<f64>, i: usize| {
        let (x2, x3) = (data.socdes()[i], data.edu()[i]);
        let x1 = match (spec.effect, e) {
            (EffectKind::MeasErr, Some(e)) => t(i) + e,
            (EffectKind::Multiplicative, Some(e)) => t(i) * e,
            _ => t(i),
        };
        let mut m = b[0] + b[1] * x1 + b[2] * x2 + b[3] * x3;
        if let (EffectKind::Additive, Some(e)) = (spec.effect, e) {
            m += e;
        }
        if b.len() == 5 {
            m += b[4] * x2 * x3;
        }
        m
    };
    let loglik = |b: &[f64],
                  e: &dyn Fn(usize) -> Option<f64>,
                  vy: Option<f64>,
                  r: Option<f64>|
     -> Result<f64, String> {
        let mut ll = 0.0;
        for i in 0..n {
            let m = mu(b, e(i), i);
            let y = data.ffq()[i];
            ll += match spec.family {
                Family::Normal => normal_logpdf(y, m, vy.unwrap()),
                Family::LogNormal => normal_logpdf(y.ln(), m, vy.unwrap()),
                Family::Gamma => gamma_logpdf(y, r.unwrap(), r.unwrap() / m),
            }
            .map_err(|e| e.to_string())?;
        }
        Ok(ll)
    };
    let d_hat = -2.0 * loglik(&bbar, &|i| ebar.get(i).copied(), vybar, rbar)?;
    let p_d = dbar - d_hat;

    let m = dev.len();
    let mut pred = vec![0.0; n];
    for k in 0..m {
        let b: Vec<f64> = beta.iter().map(|c| c[k]).collect();
        for (i, pi) in pred.iter_mut().enumerate() {
            let mk = mu(&b, eps.get(i).map(|e| e[k]), i);
            *pi += match spec.family {
                Family::LogNormal => (mk + 0.5 * var_y.as_ref().unwrap()[k]).exp(),
                _ => mk,
            } / m as f64;
        }
    }
    let mspe = data
        .ffq()
        .iter()
        .zip(&pred)
        .map(|(y, p)| (y - p).powi(2))
        .sum::<f64>()
        / n as f64;
    Ok([dbar, p_d, dbar + p_d, mspe])
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn sweep_dir() -> Result<(tempfile::TempDir, String, Duration), String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let data = dir.path().join("energy.csv");
    hiermc(&[
        "simulate",
        "energy",
        "--effect",
        "additive",
        "--effect-scale",
        "150",
        "--seed",
        "21",
        "--out",
        p(&data),
    ])?;
    let root = dir.path().join("sweep");
    let mut args = vec![
        "compare",
        "--data",
        p(&data),
        "--out",
        p(&root),
        "--dump-effects",
    ];
    args.extend(SWEEP);
    args.push("21");
    let t = Instant::now();
    let table = hiermc(&args)?;
    Ok((dir, table, t.elapsed()))
}

fn dic_identity_and_oracle(root: &Path, data_path: &Path) -> Outcome {
    let t = Instant::now();
    let data = load_csv(data_path).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    let mut fits = 0;
    for spec in ModelSpec::lattice() {
        let dir = root.join(spec.label());
        let report: FitReport = serde_json::from_str(
            &fs::read_to_string(dir.join("report.json")).map_err(|e| e.to_string())?,
        )
        .map_err(|e| e.to_string())?;
        let (p_d, d) = (
            report.p_d.ok_or("pD undefined")?,
            report.dic.ok_or("dic undefined")?,
        );
        ensure(
            d == report.dbar + p_d,
            format!("{}: dic != dbar + pD", spec.label()),
        )?;
        ensure(
            !report.mean_state_clamped,
            format!("{}: posterior mean clamped", spec.label()),
        )?;
        let samples = Samples::read(&dir.join("samples.csv"))?;
        let want = oracle_criteria(&spec, &samples, &data)?;
        let got = [report.dbar, p_d, d, report.mspe];
        for (name, (g, w)) in ["dbar", "pD", "dic", "mspe"]
            .iter()
            .zip(got.iter().zip(&want))
        {
            let e = rel(*g, *w);
            worst = worst.max(e);
            ensure(
                e <= 1e-9,
                format!("{}: {name} {g} vs oracle {w}", spec.label()),
            )?;
        }
        fits += 1;
    }
    within(t.elapsed(), 10)?;
    Ok(format!(
        "{fits} fits, worst relative discrepancy {worst:.1e}"
    ))
}

fn full_sweep(table: &str, root: &Path, elapsed: Duration) -> Outcome {
    within(elapsed, 600)?;
    let csv = fs::read_to_string(root.join("comparison.csv")).map_err(|e| e.to_string())?;
    let cells = csv.lines().skip(1).count();
    ensure(cells == 9, format!("{cells} populated cells"))?;
    ensure(!table.contains(" - "), "table has empty cells")?;
    let body: Vec<&str> = table.lines().skip(3).collect();
    for fam in ["normal", "lognormal", "gamma"] {
        let i = body
            .iter()
            .position(|l| l.starts_with(fam))
            .ok_or(format!("no {fam} row"))?;
        let sig_line = body.get(i + 1).ok_or("missing significance line")?;
        let lists: Vec<&str> = sig_line.split('|').skip(1).map(str::trim).collect();
        ensure(
            lists.len() == 3 && lists.iter().all(|l| !l.is_empty()),
            format!("{fam}: significance lists {lists:?}"),
        )?;
    }
    Ok(format!("9 cells in {:.1}s", elapsed.as_secs_f64()))
}

// 5

fn degenerate_dic() -> Outcome {
    let sim = simulate_energy(&SimEnergyConfig::default()).map_err(|e| e.to_string())?;
    let spec = ModelSpec::new(Family::Normal, EffectKind::Additive).map_err(|e| e.to_string())?;
    let cfg = SamplerConfig {
        iterations: 400,
        burn_in: 200,
        thin: 5,
        n_chains: 1,
        seed: 0,
        init_jitter: 1.0,
    };
    let fit = run_multi(&spec, &sim.data, &cfg);
    let mut one = fit.chains[0].clone();
    one.draws = vec![one.draws[0].clone(); 10];
    one.deviance_trace = vec![one.deviance_trace[0]; 10];
    one.iterations = (1..=10).collect();
    let flat = dic(&one, &spec, &sim.data).map_err(|e| e.to_string())?;
    ensure(
        flat.p_d == Some(0.0) && !flat.negative_pd,
        format!("repeated draw gave pD {:?}", flat.p_d),
    )?;

    let sim = simulate_energy(&SimEnergyConfig {
        seed: 304,
        family: Family::LogNormal,
        effect: EffectKind::Additive,
        effect_scale: 0.4,
        noise: 0.01,
        beta: [0.5, 0.9, 0.02, 0.1, 0.0],
        ..Default::default()
    })
    .map_err(|e| e.to_string())?;
    let spec =
        ModelSpec::new(Family::LogNormal, EffectKind::Additive).map_err(|e| e.to_string())?;
    let cfg = SamplerConfig {
        iterations: 20_000,
        burn_in: 10_000,
        thin: 5,
        n_chains: 3,
        seed: 4,
        init_jitter: 1.0,
    };
    let fit = run_multi(&spec, &sim.data, &cfg);
    ensure(
        fit.is_complete(),
        format!("sampler faults {:?}", fit.faults),
    )?;
    let report = FitReport::build(
        &spec,
        &sim.data,
        &fit.chains,
        cfg,
        None,
        &mut RngStream::new(4, 1 << 32),
    )
    .map_err(|e| e.to_string())?;
    let p_d = report.p_d.ok_or("pD undefined")?;
    ensure(
        p_d < 0.0 && report.negative_pd && report.dic.is_some(),
        format!("pD {p_d}, flag {}", report.negative_pd),
    )?;
    Ok(format!(
        "repeated draw pD = 0; overdispersed lognormal fit pD = {p_d:.2} (flagged)"
    ))
}

// 7

fn loglog_residual_contrast() -> Outcome {
    let t = Instant::now();
    let mut ok = 0;
    for seed in 0..20u64 {
        let d = simulate_loglog(&SimLogLogConfig {
            n: 500,
            beta0: 1.0,
            beta1: 1.2,
            sigma_e: 0.3,
            x_range: (1.0, 10.0),
            seed: 700 + seed,
        })
        .map_err(|e| e.to_string())?
        .to_dataset()
        .map_err(|e| e.to_string())?;
        let cfg = SamplerConfig {
            iterations: 4000,
            burn_in: 2000,
            thin: 5,
            n_chains: 3,
            seed,
            init_jitter: 1.0,
        };
        let mut res = Vec::new();
        for fam in [Family::Normal, Family::LogNormal] {
            let spec = ModelSpec::new(fam, EffectKind::None)
                .map_err(|e| e.to_string())?
                .with_interaction(false);
            let fit = run_multi(&spec, &d, &cfg);
            ensure(
                fit.is_complete(),
                format!("sampler faults {:?}", fit.faults),
            )?;
            let r = FitReport::build(
                &spec,
                &d,
                &fit.chains,
                cfg,
                None,
                &mut RngStream::new(seed, 1000),
            )
            .map_err(|e| e.to_string())?;
            let rs: Vec<f64> = r.residuals.iter().flatten().copied().collect();
            res.push((
                skewness(&rs),
                r.resid_normal_corr.ok_or("correlation undefined")?,
            ));
        }
        if res[0].0 > 0.0 && res[0].1 < res[1].1 {
            ok += 1;
        }
    }
    ensure(ok >= 18, format!("{ok}/20 seeds show the contrast"))?;
    within(t.elapsed(), 180)?;
    Ok(format!(
        "{ok}/20 seeds show the contrast in {:.1}s",
        t.elapsed().as_secs_f64()
    ))
}

// 8

fn additive_model_preferred() -> Outcome {
    let t = Instant::now();
    let mut wins = 0;
    for seed in 0..20u64 {
        let sim = simulate_energy(&SimEnergyConfig {
            seed: 100 + seed,
            beta: [1500.0, 0.5, 10.0, 650.0, 0.0],
            dlw_mean: 3500.0,
            dlw_sd: 1000.0,
            effect: EffectKind::Additive,
            effect_scale: 700.0,
            noise: 150.0,
            ..Default::default()
        })
        .map_err(|e| e.to_string())?;
        let cfg = SamplerConfig {
            iterations: 20_000,
            burn_in: 10_000,
            thin: 5,
            n_chains: 3,
            seed,
            init_jitter: 1.0,
        };
        let mut scores = Vec::new();
        for eff in [EffectKind::None, EffectKind::Additive, EffectKind::MeasErr] {
            let spec = ModelSpec::new(Family::Normal, eff).map_err(|e| e.to_string())?;
            let fit = run_multi(&spec, &sim.data, &cfg);
            ensure(
                fit.is_complete(),
                format!("sampler faults {:?}", fit.faults),
            )?;
            let pooled = PosteriorSamples::pool(&fit.chains).ok_or("no chains")?;
            let d = dic(&pooled, &spec, &sim.data).map_err(|e| e.to_string())?;
            let m = mspe(&pooled, &spec, &sim.data).map_err(|e| e.to_string())?;
            scores.push((d.dic.unwrap_or(f64::INFINITY), m));
        }
        let (i, ii, iii) = (scores[0], scores[1], scores[2]);
        if ii.0 < i.0 && ii.0 < iii.0 && ii.1 < i.1 && ii.1 < iii.1 {
            wins += 1;
        }
    }
    ensure(
        wins >= 16,
        format!("model II best on both criteria in {wins}/20 seeds"),
    )?;
    within(t.elapsed(), 300)?;
    Ok(format!(
        "model II best on both criteria in {wins}/20 seeds, {:.1}s",
        t.elapsed().as_secs_f64()
    ))
}

// 9

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let data = dir.path().join("d.csv");
    hiermc(&[
        "simulate",
        "energy",
        "--family",
        "gamma",
        "--noise",
        "0.1",
        "--seed",
        "9",
        "--out",
        p(&data),
    ])?;
    let mut out = Vec::new();
    for name in ["a", "b"] {
        let o = dir.path().join(name);
        hiermc(&[
            "fit",
            "--data",
            p(&data),
            "--family",
            "gamma",
            "--effect",
            "model3",
            "--iters",
            "3000",
            "--burnin",
            "1000",
            "--thin",
            "5",
            "--seed",
            "17",
            "--dump-effects",
            "--out",
            p(&o),
        ])?;
        out.push(fs::read(o.join("samples.csv")).map_err(|e| e.to_string())?);
    }
    ensure(
        out[0] == out[1],
        "samples.csv differs between identical runs",
    )?;
    Ok(format!("{} identical bytes", out[0].len()))
}

fn run(n: usize, f: impl FnOnce() -> Outcome) -> bool {
    let t = Instant::now();
    let res = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
        Err(e
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panicked".into()))
    });
    let secs = t.elapsed().as_secs_f64();
    match &res {
        Ok(msg) => println!("criterion {n}: PASS ({msg}) [{secs:.1}s]"),
        Err(msg) => println!("criterion {n}: FAIL ({msg}) [{secs:.1}s]"),
    }
    res.is_ok()
}

fn main() {
    let mut ok = true;
    ok &= run(1, density_oracles);
    ok &= run(2, conjugate_recovery);
    ok &= run(3, parameter_recovery);

    let sweep = sweep_dir();
    ok &= run(4, || {
        let (dir, _, _) = sweep.as_ref().map_err(Clone::clone)?;
        dic_identity_and_oracle(&dir.path().join("sweep"), &dir.path().join("energy.csv"))
    });
    ok &= run(5, degenerate_dic);
    ok &= run(6, bgr_pinned);
    ok &= run(7, loglog_residual_contrast);
    ok &= run(8, additive_model_preferred);
    ok &= run(9, determinism);
    ok &= run(10, || {
        let (dir, table, elapsed) = sweep.as_ref().map_err(Clone::clone)?;
        full_sweep(table, &dir.path().join("sweep"), *elapsed)
    });
    if !ok {
        std::process::exit(1);
    }
}
