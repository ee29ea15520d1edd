//! Monte Carlo experiments comparing sampled trace statistics with theory.

use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::config::{ExperimentConfig, ExperimentKind, TestFunctionConfig, SCHEMA_VERSION};
use super::report::{ExperimentReport, ReportHeader, ReportRow};
use super::smooth::{SmoothTestFunction, DEFAULT_QMC_NODES};
use crate::engine::Engine;
use crate::error::{Error, Result};
use crate::rng::derive_seed;
use crate::spaces::SpaceKind;
use crate::stats::{complex_covariance, covariance, linear_fit, ComplexEstimate, ComplexMoments, Estimate, Moments};
use crate::stein::{empirical_limits, DEFAULT_EPS_SCHEDULE};
use crate::theory::{covariance_model, predicted_means, CovarianceModel, MeanPrediction};
use crate::trace_stats::{center_z, trace_powers, TraceVector};

/// Default model-error constant `C` in the `C/n` band.
pub const DEFAULT_SLACK: f64 = 10.0;

fn slack(cfg: &ExperimentConfig) -> f64 {
    cfg.slack.unwrap_or(DEFAULT_SLACK)
}

/// Kinds whose means grow like `n C_{p/2}`; their rows are reported per `n`.
fn catalan_scaled(kind: SpaceKind) -> bool {
    !matches!(kind, SpaceKind::GeneralComplex | SpaceKind::GeneralReal)
}

/// `W_p(H) = (−i)^p W_p(X)` for `H = −iX`, mapping an antihermitian
/// sample to a Hermitian one.
pub fn transport_to_hermitian(w: &TraceVector) -> TraceVector {
    let minus_i = Complex64::new(0.0, -1.0);
    TraceVector::new(
        w.n(),
        w.values().iter().enumerate().map(|(k, v)| v * minus_i.powu(k as u32 + 1)).collect(),
    )
}

fn header(cfg: &ExperimentConfig, engine: &Engine, start: Instant, notes: Vec<String>) -> ReportHeader {
    ReportHeader {
        schema_version: SCHEMA_VERSION,
        config: cfg.clone(),
        seed: cfg.seed,
        workers: engine.workers(),
        wall_clock_secs: start.elapsed().as_secs_f64(),
        notes,
    }
}

/// Trace vectors of `trials` samples at size `n`, in trial order.
pub fn collect_traces(cfg: &ExperimentConfig, n: usize, seed: u64, engine: &Engine) -> Result<Vec<TraceVector>> {
    let spec = cfg.ensemble(n, seed)?;
    engine.map_trials(cfg.trials, |t| {
        let x = spec.sample(t)?;
        trace_powers(&x, cfg.m).map_err(|e| match e {
            Error::NumericOverflow(what) => Error::NumericOverflow(format!("{what} at trial {t}, n = {n}")),
            other => other,
        })
    })
}

pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    match cfg.experiment {
        ExperimentKind::Means => run_means(cfg),
        ExperimentKind::Covariance => run_covariance(cfg),
        ExperimentKind::Stein => run_stein(cfg),
        ExperimentKind::Sweep => run_sweep(cfg).map(|(r, _)| r),
        ExperimentKind::Distance => run_distance(cfg),
        ExperimentKind::Tails => run_tails(cfg),
    }
}

/// `Ê W_p` against the leading-order means. Band: `C/n + 3·SE` in the
/// row's units, with no model slack for complex Ginibre (exact zero mean).
pub fn run_means(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let start = Instant::now();
    let engine = Engine::new(cfg.workers)?;
    let spec = cfg.ensemble(cfg.n, cfg.seed)?;
    let m = cfg.m;
    let acc = engine.fold(
        cfg.trials,
        || vec![ComplexMoments::default(); m],
        |acc, t| {
            let w = trace_powers(&spec.sample(t)?, m)?;
            for (a, v) in acc.iter_mut().zip(w.values()) {
                a.push(*v);
            }
            Ok(())
        },
        |a, b| a.iter().zip(b).map(|(x, y)| x.merge(y)).collect(),
    )?;
    let means = predicted_means(cfg.space, cfg.n, m)?;
    let n = cfg.n as f64;
    let scaled = catalan_scaled(cfg.space);
    let unit = if scaled { n } else { 1.0 };
    let model_slack = if cfg.space == SpaceKind::GeneralComplex { 0.0 } else { slack(cfg) / n };
    let complex = matches!(cfg.space, SpaceKind::GeneralComplex | SpaceKind::AntihermitianComplex);
    let suffix = if scaled { "/n" } else { "" };
    let mut rows = Vec::new();
    for (p, a) in (1..=m).zip(&acc) {
        let re = a.re.estimate();
        let se = re.se / unit;
        rows.push(ReportRow::new(
            format!("mean W_{p}{suffix}"),
            re.mean / unit,
            se,
            means.mean(p) / unit,
            model_slack + 3.0 * se,
        ));
        if complex {
            let im = a.im.estimate();
            let se = im.se / unit;
            rows.push(ReportRow::new(format!("mean Im W_{p}{suffix}"), im.mean / unit, se, 0.0, model_slack + 3.0 * se));
        }
    }
    let notes = vec![format!(
        "band = {:.3}/n + 3 SE with C = {}; rows{}",
        if cfg.space == SpaceKind::GeneralComplex { 0.0 } else { slack(cfg) },
        slack(cfg),
        if scaled { " divided by n" } else { " in W units" }
    )];
    Ok(ExperimentReport {
        header: header(cfg, &engine, start, notes),
        rows,
    })
}

/// The centered statistic vector fed to covariance and distance experiments,
/// with the matching limiting covariance.
#[derive(Debug, Clone)]
pub struct StatisticLayout {
    pub labels: Vec<String>,
    pub sigma: DMatrix<f64>,
    pub model: Option<CovarianceModel>,
}

fn model_for(kind: SpaceKind, m: usize, beta: Option<BigRational>) -> Result<CovarianceModel> {
    let kind = if kind == SpaceKind::AntihermitianComplex {
        SpaceKind::HermitianComplex
    } else {
        kind
    };
    covariance_model(kind, m, beta)
}

pub fn statistic_layout(kind: SpaceKind, m: usize, beta: Option<BigRational>) -> Result<StatisticLayout> {
    Ok(match kind {
        SpaceKind::GeneralComplex => StatisticLayout {
            labels: (1..=m).flat_map(|p| [format!("Re W_{p}"), format!("Im W_{p}")]).collect(),
            sigma: DMatrix::from_fn(2 * m, 2 * m, |i, j| if i == j { (i / 2 + 1) as f64 / 2.0 } else { 0.0 }),
            model: None,
        },
        SpaceKind::GeneralReal => StatisticLayout {
            labels: (1..=m).map(|p| format!("W_{p}")).collect(),
            sigma: DMatrix::from_fn(m, m, |i, j| if i == j { (i + 1) as f64 } else { 0.0 }),
            model: None,
        },
        _ => {
            let model = model_for(kind, m, beta)?;
            StatisticLayout {
                labels: model.indices.iter().map(|p| format!("Z_{p}")).collect(),
                sigma: model.sigma_f64(),
                model: Some(model),
            }
        }
    })
}

/// Per-trial statistic vectors. Centering uses the sample means: the
/// leading-order means are off by O(1), the same order as the fluctuations.
pub fn statistic_vectors(kind: SpaceKind, n: usize, traces: &[TraceVector]) -> Result<Vec<Vec<f64>>> {
    let (kind, traces): (SpaceKind, Vec<TraceVector>) = if kind == SpaceKind::AntihermitianComplex {
        (SpaceKind::HermitianComplex, traces.iter().map(transport_to_hermitian).collect())
    } else {
        (kind, traces.to_vec())
    };
    let m = traces.first().map_or(0, TraceVector::m);
    let count = traces.len() as f64;
    let mean: Vec<Complex64> = (1..=m)
        .map(|p| crate::stats::pairwise_sum_complex(&traces.iter().map(|w| w.w(p)).collect::<Vec<_>>()) / count)
        .collect();
    match kind {
        SpaceKind::GeneralComplex => Ok(traces
            .iter()
            .map(|w| {
                (1..=m)
                    .flat_map(|p| {
                        let d = w.w(p) - mean[p - 1];
                        [d.re, d.im]
                    })
                    .collect()
            })
            .collect()),
        SpaceKind::GeneralReal => Ok(traces
            .iter()
            .map(|w| (1..=m).map(|p| w.w(p).re - mean[p - 1].re).collect())
            .collect()),
        _ => {
            let means = MeanPrediction {
                kind,
                n,
                entries: mean.iter().map(|z| z.re).collect(),
            };
            traces.iter().map(|w| Ok(center_z(w, &means, kind)?.values)).collect()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaVerdict {
    pub beta_factor: String,
    pub within_bands: bool,
    /// Some entry differs by more than 5 SE.
    pub inconsistent: bool,
    pub max_abs_z: f64,
}

/// Covariance of the statistic vector against `Σ`.
pub fn run_covariance(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let start = Instant::now();
    let engine = Engine::new(cfg.workers)?;
    let traces = collect_traces(cfg, cfg.n, cfg.seed, &engine)?;
    let n = cfg.n as f64;
    let c_over_n = slack(cfg) / n;
    let mut rows = Vec::new();
    let mut notes = vec![format!("band = C/n + 3 SE with C = {} unless noted", slack(cfg))];
    match cfg.space {
        SpaceKind::GeneralComplex => {
            let m = cfg.m;
            let col = |p: usize| traces.iter().map(|w| w.w(p)).collect::<Vec<_>>();
            let cols: Vec<Vec<Complex64>> = (1..=m).map(col).collect();
            for p in 1..=m {
                for q in p..=m {
                    for conj in [true, false] {
                        let prods: Vec<Complex64> = cols[p - 1]
                            .iter()
                            .zip(&cols[q - 1])
                            .map(|(a, b)| a * if conj { b.conj() } else { *b })
                            .collect();
                        let e = ComplexEstimate::of(&prods);
                        let (theory, slack_here) = if conj && p == q { (p as f64, c_over_n) } else { (0.0, 0.0) };
                        let band = slack_here + 3.0 * e.se;
                        let pass = e.within(Complex64::new(theory, 0.0), 3.0, slack_here);
                        let name = if conj { format!("E[W_{p} conj W_{q}]") } else { format!("E[W_{p} W_{q}]") };
                        rows.push(ReportRow::new(format!("{name} re"), e.mean.re, e.se, theory, band).with_pass(pass));
                        rows.push(ReportRow::new(format!("{name} im"), e.mean.im, e.se, 0.0, band).with_pass(pass));
                    }
                }
            }
            notes.push("off-diagonal and unconjugated rows use 3 SE only; complex rows share one joint test".into());
        }
        kind => {
            let layout = statistic_layout(kind, cfg.m, cfg.beta()?)?;
            let vecs = statistic_vectors(kind, cfg.n, &traces)?;
            let k = layout.labels.len();
            let cols: Vec<Vec<f64>> = (0..k).map(|i| vecs.iter().map(|v| v[i]).collect()).collect();
            let mut ests = vec![vec![Estimate { mean: 0.0, se: 0.0 }; k]; k];
            for i in 0..k {
                for j in i..k {
                    let e = covariance(&cols[i], &cols[j]);
                    ests[i][j] = e;
                    ests[j][i] = e;
                    rows.push(ReportRow::new(
                        format!("cov({},{})", layout.labels[i], layout.labels[j]),
                        e.mean,
                        e.se,
                        layout.sigma[(i, j)],
                        c_over_n + 3.0 * e.se,
                    ));
                }
            }
            if kind == SpaceKind::AntihermitianComplex {
                notes.push("antihermitian sample transported to H = −iX; Σ is the Hermitian one".into());
            }
            if matches!(kind, SpaceKind::HermitianComplex | SpaceKind::SymmetricReal) {
                for v in adjudicate_beta(kind, cfg.m, &ests, c_over_n)? {
                    notes.push(format!(
                        "beta_factor {}: {} (max |z| = {:.2}{})",
                        v.beta_factor,
                        if v.within_bands { "consistent" } else { "not within bands" },
                        v.max_abs_z,
                        if v.inconsistent { ", inconsistent beyond 5 SE" } else { "" }
                    ));
                }
            }
        }
    }
    Ok(ExperimentReport {
        header: header(cfg, &engine, start, notes),
        rows,
    })
}

/// Compares an estimated covariance with both candidate scalings of B.
pub fn adjudicate_beta(kind: SpaceKind, m: usize, ests: &[Vec<Estimate>], c_over_n: f64) -> Result<Vec<BetaVerdict>> {
    ["1/2", "1"]
        .iter()
        .map(|b| {
            let model = covariance_model(kind, m, Some(crate::theory::parse_rational(b)?))?;
            let sigma = model.sigma_f64();
            let (mut within, mut inconsistent, mut max_z) = (true, false, 0.0f64);
            for (i, row) in ests.iter().enumerate() {
                for (j, e) in row.iter().enumerate() {
                    let target = sigma[(i, j)];
                    within &= e.within(target, 3.0, c_over_n);
                    inconsistent |= (e.mean - target).abs() > 5.0 * e.se;
                    max_z = max_z.max(e.zscore(target).abs());
                }
            }
            Ok(BetaVerdict {
                beta_factor: (*b).to_string(),
                within_bands: within,
                inconsistent,
                max_abs_z: max_z,
            })
        })
        .collect()
}

/// Conditional Stein limits for one sampled X.
pub fn run_stein(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let start = Instant::now();
    let engine = Engine::new(cfg.workers)?;
    let spec = cfg.ensemble(cfg.n, cfg.seed)?;
    let x = spec.sample(0)?;
    let eps = cfg.eps.clone().unwrap_or_else(|| DEFAULT_EPS_SCHEDULE.to_vec());
    let rep = empirical_limits(spec.space(), &x, cfg.m, &eps, cfg.trials, derive_seed(cfg.seed, 0x57e1), &engine)?;
    let mut rows = Vec::new();
    for r in rep.rows() {
        let target = r.closed_form.value();
        let e = r.extrapolated;
        let pass = r.within(3.0);
        rows.push(ReportRow::new(format!("{} re", r.name), e.mean.re, e.se, target.re, 3.0 * e.se).with_pass(pass));
        if !spec.space().kind().is_real() {
            rows.push(ReportRow::new(format!("{} im", r.name), e.mean.im, e.se, target.im, 3.0 * e.se).with_pass(pass));
        }
    }
    rows.push(ReportRow::new("third_moment_slope", rep.third_moment_slope, 0.0, 1.0, 0.1));
    let max_residual = rep.rows().map(|r| r.residual).fold(0.0, f64::max);
    let notes = vec![
        format!("eps schedule {:?}; antithetic frame pairs; extrapolation in eps^2", eps),
        format!("max extrapolation residual {max_residual:e}"),
    ];
    Ok(ExperimentReport {
        header: header(cfg, &engine, start, notes),
        rows,
    })
}

fn test_function(cfg: &ExperimentConfig, dim: usize) -> Result<SmoothTestFunction> {
    let tf = cfg
        .test_function
        .clone()
        .unwrap_or(TestFunctionConfig::CosLinear { theta: None });
    SmoothTestFunction::from_config(&tf, dim)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub n: usize,
    pub estimate: Estimate,
    pub reference: f64,
    pub delta: f64,
    /// `δ > 2·SE`.
    pub resolved: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SweepVerdict {
    Slope { slope: f64, se: f64, ci_low: f64, ci_high: f64, resolved: usize },
    NoiseDominated { noise_floor: f64, resolved: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub function: SmoothTestFunction,
    pub points: Vec<SweepPoint>,
    pub verdict: SweepVerdict,
}

fn distance_point(cfg: &ExperimentConfig, n: usize, seed: u64, engine: &Engine, f: Option<&SmoothTestFunction>) -> Result<(SweepPoint, SmoothTestFunction)> {
    let traces = collect_traces(cfg, n, seed, engine)?;
    let layout = statistic_layout(cfg.space, cfg.m, cfg.beta()?)?;
    let f = match f {
        Some(f) => f.clone(),
        None => test_function(cfg, layout.labels.len())?,
    };
    let reference = f.gaussian_reference(&layout.sigma, DEFAULT_QMC_NODES)?;
    let vecs = statistic_vectors(cfg.space, n, &traces)?;
    let vals: Vec<f64> = vecs.iter().map(|v| f.eval(v)).collect();
    let estimate = Estimate::of(&vals);
    let delta = (estimate.mean - reference).abs();
    Ok((
        SweepPoint {
            n,
            estimate,
            reference,
            delta,
            resolved: delta > 2.0 * estimate.se,
        },
        f,
    ))
}

/// `δ(n) = |Ê f(Z) − E f(Σ^{1/2}G)|` over the sweep sizes and the fitted
/// log-log slope, or a noise-dominated verdict when fewer than three sizes
/// resolve δ above `2·SE`.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<(ExperimentReport, SweepSummary)> {
    cfg.validate()?;
    let start = Instant::now();
    let engine = Engine::new(cfg.workers)?;
    let mut points = Vec::new();
    let mut func: Option<SmoothTestFunction> = None;
    for &n in &cfg.sweep_sizes {
        let (pt, f) = distance_point(cfg, n, derive_seed(cfg.seed, n as u64), &engine, func.as_ref())?;
        func = Some(f);
        points.push(pt);
    }
    let function = func.ok_or_else(|| Error::Config("empty sweep".into()))?;
    let resolved: Vec<&SweepPoint> = points.iter().filter(|p| p.resolved).collect();
    let verdict = if resolved.len() >= 3 {
        let xs: Vec<f64> = resolved.iter().map(|p| (p.n as f64).ln()).collect();
        let ys: Vec<f64> = resolved.iter().map(|p| p.delta.ln()).collect();
        let (slope, se, _) = linear_fit(&xs, &ys);
        SweepVerdict::Slope {
            slope,
            se,
            ci_low: slope - 2.0 * se,
            ci_high: slope + 2.0 * se,
            resolved: resolved.len(),
        }
    } else {
        SweepVerdict::NoiseDominated {
            noise_floor: points.iter().map(|p| 2.0 * p.estimate.se).fold(0.0, f64::max),
            resolved: resolved.len(),
        }
    };
    let mut rows: Vec<ReportRow> = points
        .iter()
        .map(|p| ReportRow::new(format!("E f(Z) n={}", p.n), p.estimate.mean, p.estimate.se, p.reference, f64::INFINITY))
        .collect();
    let note = match &verdict {
        SweepVerdict::Slope { slope, se, ci_low, ci_high, resolved } => {
            rows.push(ReportRow::new("loglog_slope", *slope, *se, -1.0, 0.5));
            format!("verdict: slope {slope:.3} (95% CI [{ci_low:.3}, {ci_high:.3}]) from {resolved} resolved sizes")
        }
        SweepVerdict::NoiseDominated { noise_floor, resolved } => format!(
            "verdict: noise-dominated ({resolved} of {} sizes resolve δ > 2 SE); noise floor 2 SE ≤ {noise_floor:.3e}",
            points.len()
        ),
    };
    let notes = vec![
        format!("test function {} with M1 = {:.4}, M2 = {:.4}", function.name(), function.m1(), function.m2()),
        "E f rows are informational (band = inf)".into(),
        note,
    ];
    let report = ExperimentReport {
        header: header(cfg, &engine, start, notes),
        rows,
    };
    Ok((report, SweepSummary { function, points, verdict }))
}

/// Single-size distance with band `C·(M₁+M₂)/n + 3·SE`, `C` from the config
/// (default 1 here since the constant is not known).
pub fn run_distance(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let start = Instant::now();
    let engine = Engine::new(cfg.workers)?;
    let (pt, f) = distance_point(cfg, cfg.n, cfg.seed, &engine, None)?;
    let c = cfg.slack.unwrap_or(1.0);
    let band = c * (f.m1() + f.m2()) / cfg.n as f64 + 3.0 * pt.estimate.se;
    let rows = vec![ReportRow::new(format!("E f(Z) n={}", cfg.n), pt.estimate.mean, pt.estimate.se, pt.reference, band)];
    let notes = vec![format!(
        "test function {} with M1 = {:.4}, M2 = {:.4}; delta = {:.3e}; C = {c}",
        f.name(),
        f.m1(),
        f.m2(),
        pt.delta
    )];
    Ok(ExperimentReport {
        header: header(cfg, &engine, start, notes),
        rows,
    })
}

const TAIL_BATCHES: usize = 20;

/// Empirical tails of centered traces on the sphere: survival of `|W_1 − Ê W_1|`
/// at multiples of its SD, and `‖W_p − E‖₄/‖W_p − E‖₂` for each size.
pub fn run_tails(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let start = Instant::now();
    let engine = Engine::new(cfg.workers)?;
    let sizes: Vec<usize> = if cfg.sweep_sizes.is_empty() { vec![cfg.n] } else { cfg.sweep_sizes.clone() };
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    let mut rows = Vec::new();
    let mut notes = Vec::new();
    let mut ratios: Vec<Vec<Option<f64>>> = Vec::new();
    for &n in &sizes {
        let seed = if sizes.len() == 1 { cfg.seed } else { derive_seed(cfg.seed, n as u64) };
        let traces = collect_traces(cfg, n, seed, &engine)?;
        let count = traces.len();
        let centered = |p: usize| -> Vec<f64> {
            let xs: Vec<f64> = traces.iter().map(|w| w.w(p).re).collect();
            let mean = crate::stats::pairwise_sum(&xs) / count as f64;
            xs.into_iter().map(|x| x - mean).collect()
        };
        let w1 = centered(1);
        let mut mom = Moments::default();
        w1.iter().for_each(|&x| mom.push(x));
        let sd = mom.variance().sqrt();
        let mut log_surv = Vec::new();
        for k in 0..=5 {
            let t = k as f64 * sd;
            let frac = w1.iter().filter(|x| x.abs() >= t).count() as f64 / count as f64;
            let se = (frac * (1.0 - frac) / count as f64).sqrt();
            let gauss = 2.0 * (1.0 - normal.cdf(k as f64));
            let band = match k {
                0 => 0.0,
                5 => 1e-2,
                _ => f64::INFINITY,
            };
            rows.push(ReportRow::new(format!("survival W_1 t={k}sd n={n}"), frac, se, gauss, band));
            log_surv.push(frac.ln());
        }
        notes.push(format!("n={n}: log survival at t = 0..5 sd: {log_surv:.3?}"));
        let mut per_p = Vec::new();
        for p in 1..=cfg.m {
            let xs = centered(p);
            let ratio = |s: &[f64]| {
                let m2 = s.iter().map(|x| x * x).sum::<f64>() / s.len() as f64;
                let m4 = s.iter().map(|x| x.powi(4)).sum::<f64>() / s.len() as f64;
                m4.powf(0.25) / m2.sqrt()
            };
            let r = ratio(&xs);
            if !r.is_finite() {
                per_p.push(None);
                continue;
            }
            let batch = count / TAIL_BATCHES;
            let batch_vals: Vec<f64> = (0..TAIL_BATCHES).map(|b| ratio(&xs[b * batch..(b + 1) * batch])).collect();
            let se = Estimate::of(&batch_vals).se;
            rows.push(ReportRow::new(format!("L4/L2 W_{p} n={n}"), r, se, 3f64.powf(0.25), f64::INFINITY));
            per_p.push(Some(r));
        }
        ratios.push(per_p);
    }
    if sizes.len() >= 2 {
        for p in 1..=cfg.m {
            if let (Some(a), Some(b)) = (ratios[0][p - 1], ratios[sizes.len() - 1][p - 1]) {
                rows.push(ReportRow::new(format!("L4/L2 W_{p} change"), (b - a).abs(), 0.0, 0.0, 0.5));
            }
        }
    }
    notes.push("survival and L4/L2 rows are descriptive (band = inf) except t = 0 and t = 5 sd".into());
    Ok(ExperimentReport {
        header: header(cfg, &engine, start, notes),
        rows,
    })
}

/// Exact Σ entry as `f64`, for callers that only hold a model.
pub fn sigma_entry(model: &CovarianceModel, p: usize, q: usize) -> Option<f64> {
    model.sigma_entry(p, q).and_then(|v| v.to_f64())
}

/// Hermitian covariance `E[(x − x̄) conj(y − ȳ)]` of two trace columns.
pub fn trace_covariance(traces: &[TraceVector], p: usize, q: usize, conjugate: bool) -> ComplexEstimate {
    let xs: Vec<Complex64> = traces.iter().map(|w| w.w(p)).collect();
    let ys: Vec<Complex64> = traces.iter().map(|w| w.w(q)).collect();
    complex_covariance(&xs, &ys, conjugate)
}
