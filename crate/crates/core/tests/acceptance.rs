//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Reference values are computed here from independent oracles (Weingarten
//! moments, Chebyshev fluctuation variances, double-factorial sphere moments,
//! polar quadrature) rather than taken from the library under test. Set
//! `ACCEPTANCE_ONLY=3,7` to run a subset.

use std::process::ExitCode;
use std::time::Instant;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use statrs::distribution::{Binomial, ContinuousCDF, DiscreteCDF, Normal};

use rmtlab::engine::Engine;
use rmtlab::ensembles::{haar_two_frame, EnsembleSpec, RadialLaw};
use rmtlab::harness::{
    run_covariance, run_means, run_sweep, ExperimentConfig, ExperimentKind, ExperimentReport, RadialConfig, SweepVerdict,
};
use rmtlab::matrix::inner_product;
use rmtlab::oracle::{exact_trace_moment, mean_recursion_check, sphere_monomial_moment, Letter, MonomialExponents, TraceWord};
use rmtlab::stats::ComplexMoments;
use rmtlab::stein::{empirical_limits, DEFAULT_EPS_SCHEDULE};
use rmtlab::theory::{check_sigma, corollary_covariance, corollary_covariance_exact, covariance_model};
use rmtlab::trace_stats::{centered_indices, powers, PolynomialTestFunction};
use rmtlab::{CMatrix, MatrixSpace, SpaceKind};

/// Model-error constant of the `C/n` bands.
const SLACK: f64 = 10.0;
/// Family-wise error rate for criteria that compare many entries at 3 SE.
const FAMILY_ALPHA: f64 = 0.01;

struct Outcome {
    pass: bool,
    summary: String,
}

fn outcome(pass: bool, summary: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        summary: summary.into(),
    }
}

fn int(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

fn frac(a: i64, b: i64) -> BigRational {
    BigRational::new(BigInt::from(a), BigInt::from(b))
}

/// Multiple-comparison rule for a family of |z| values tested at 3 SE: the
/// number beyond 3 must not exceed the 99th percentile of its null binomial
/// count, and none may exceed the Bonferroni quantile.
struct Family {
    count: usize,
    beyond3: usize,
    allowed: usize,
    bonferroni: f64,
    max_z: f64,
}

impl Family {
    fn new(zs: &[f64]) -> Self {
        let count = zs.len();
        let normal = Normal::new(0.0, 1.0).unwrap();
        let p3 = 2.0 * (1.0 - normal.cdf(3.0));
        let binom = Binomial::new(p3, count as u64).unwrap();
        let allowed = (0..=count).find(|&k| 1.0 - binom.cdf(k as u64) < FAMILY_ALPHA).unwrap_or(count);
        let bonferroni = normal.inverse_cdf(1.0 - FAMILY_ALPHA / (2.0 * count.max(1) as f64));
        Self {
            count,
            beyond3: zs.iter().filter(|z| **z > 3.0).count(),
            allowed,
            bonferroni,
            max_z: zs.iter().copied().fold(0.0, f64::max),
        }
    }

    fn pass(&self) -> bool {
        self.beyond3 <= self.allowed && self.max_z <= self.bonferroni
    }

    fn describe(&self) -> String {
        format!(
            "{} entries, {} beyond 3 SE (allowed {}), max |z| {:.2} (Bonferroni {:.2})",
            self.count, self.beyond3, self.allowed, self.max_z, self.bonferroni
        )
    }
}

fn z_real(est: f64, se: f64, target: f64, slack: f64) -> f64 {
    ((est - target).abs() - slack).max(0.0) / se.max(1e-300)
}

fn z_complex(est: Complex64, se: f64, target: Complex64, slack: f64) -> f64 {
    ((est - target).norm() - slack).max(0.0) / se.max(1e-300)
}

fn config(kind: ExperimentKind, space: SpaceKind, n: usize, m: usize, trials: u64, seed: u64) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(kind, space, n, m, trials);
    c.seed = seed;
    c
}

fn row(report: &ExperimentReport, name: &str) -> (f64, f64) {
    let r = report.row(name).unwrap_or_else(|| panic!("report has no row {name:?}"));
    (r.estimate, r.se)
}

fn catalan(r: usize) -> u64 {
    let mut c = vec![1u64];
    for k in 1..=r {
        c.push((0..k).map(|i| c[i] * c[k - 1 - i]).sum());
    }
    c[r]
}

fn c1_algebraic_identities() -> Outcome {
    let mut worst_gram = 0.0f64;
    let mut worst_channel = 0.0f64;
    for kind in SpaceKind::ALL {
        for n in 2..=16 {
            let space = MatrixSpace::new(kind, n).unwrap();
            let mats: Vec<CMatrix> = space.basis().iter().map(|b| b.to_matrix(n)).collect();
            if mats.len() != kind.dimension(n) {
                return outcome(false, format!("{kind} n={n}: basis has {} elements", mats.len()));
            }
            for (i, a) in mats.iter().enumerate() {
                for (j, b) in mats.iter().enumerate().skip(i) {
                    let g = inner_product(a, b).unwrap();
                    worst_gram = worst_gram.max((g - if i == j { 1.0 } else { 0.0 }).abs());
                }
            }
            if matches!(kind, SpaceKind::AntisymmetricReal | SpaceKind::AntihermitianComplex) {
                continue;
            }
            let spec = EnsembleSpec::new(space.clone(), RadialLaw::GaussianCoords, 101).unwrap();
            for t in 0..100 {
                let a = spec.sample(t).unwrap();
                let tr_i = CMatrix::identity(n).scale(a.trace());
                let want = match kind {
                    SpaceKind::GeneralComplex => CMatrix::zeros(n),
                    SpaceKind::GeneralReal => a.transpose(),
                    SpaceKind::HermitianComplex => tr_i,
                    _ => a.add(&tr_i).scale(Complex64::new(0.5, 0.0)),
                };
                let err = space.channel_sum(&a).sub(&want).hs_norm() / (1.0 + want.hs_norm());
                worst_channel = worst_channel.max(err);
            }
        }
    }
    outcome(
        worst_gram <= 1e-12 && worst_channel <= 1e-10,
        format!("max Gram error {worst_gram:.2e}, max relative channel error {worst_channel:.2e}"),
    )
}

/// `E[u_i u_j v_k v_l]` for the first two columns of a Haar orthogonal matrix.
fn weingarten(d: usize, i: usize, j: usize, k: usize, l: usize) -> f64 {
    let df = d as f64;
    let den = df * (df - 1.0) * (df + 2.0);
    let dl = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
    dl(i, j) * dl(k, l) * (df + 1.0) / den - (dl(i, k) * dl(j, l) + dl(i, l) * dl(j, k)) / den
}

fn c2_q_moments() -> Outcome {
    let d = 16;
    let trials = 1_000_000u64;
    let spread = [0usize, 5, 11];
    let mut quads: Vec<[usize; 4]> = Vec::new();
    for a in spread {
        for b in spread {
            for c in spread {
                for e in spread {
                    quads.push([a, b, c, e]);
                }
            }
        }
    }
    quads.extend([[0, 5, 11, 15], [15, 11, 5, 0], [3, 7, 2, 9], [3, 7, 7, 3]]);
    let kkt: Vec<(usize, usize)> = (0..d).map(|a| (a, a)).chain((1..d).map(|b| (0, b))).collect();
    let nq = quads.len();
    let engine = Engine::new(0).unwrap();
    let acc = engine
        .fold(
            trials,
            || vec![rmtlab::stats::Moments::default(); nq + kkt.len()],
            |acc, t| {
                let f = haar_two_frame(d, 2002, t)?;
                let (u, v) = f.columns();
                let q = |a: usize, b: usize| u[a] * v[b] - v[a] * u[b];
                for (s, [a, b, c, e]) in acc.iter_mut().zip(&quads) {
                    s.push(q(*a, *b) * q(*c, *e));
                }
                for (s, (a, b)) in acc[nq..].iter_mut().zip(&kkt) {
                    s.push(u[*a] * u[*b] + v[*a] * v[*b]);
                }
                Ok(())
            },
            |a, b| a.iter().zip(b).map(|(x, y)| x.merge(y)).collect(),
        )
        .unwrap();
    let mut zq = Vec::new();
    for (s, &[a, b, c, e]) in acc.iter().zip(&quads) {
        let w = |i, j, k, l| weingarten(d, i, j, k, l);
        let target = w(a, c, b, e) - w(a, e, b, c) - w(b, c, a, e) + w(b, e, a, c);
        let est = s.estimate();
        zq.push(z_real(est.mean, est.se, target, 0.0));
    }
    let mut zk = Vec::new();
    for (s, &(a, b)) in acc[nq..].iter().zip(&kkt) {
        let target = if a == b { 2.0 / d as f64 } else { 0.0 };
        let est = s.estimate();
        zk.push(z_real(est.mean, est.se, target, 0.0));
    }
    let fq = Family::new(&zq);
    let fk = Family::new(&zk);
    outcome(
        fq.pass() && fk.pass(),
        format!("q moments: {}; KKᵀ: {}", fq.describe(), fk.describe()),
    )
}

/// Drift and quadratic limits written out from the basis, independent of the
/// library's channel and specialised forms.
struct SteinOracle {
    n: f64,
    d: f64,
    norm_sq: f64,
    pows: Vec<CMatrix>,
    basis: Vec<CMatrix>,
}

impl SteinOracle {
    fn new(space: &MatrixSpace, x: &CMatrix, m: usize) -> Self {
        let n = space.n();
        let mut pows = vec![CMatrix::identity(n)];
        pows.extend(powers(x, m));
        Self {
            n: n as f64,
            d: space.dim() as f64,
            norm_sq: x.hs_norm_sq(),
            pows,
            basis: space.basis().iter().map(|b| b.to_matrix(n)).collect(),
        }
    }

    /// Limits that vanish identically are estimated at rounding error scaled by
    /// `ε⁻²`; allow `1e-9·(1 + n‖X‖^deg)` for them.
    fn floor(&self, deg: usize) -> f64 {
        1e-9 * (1.0 + self.n * self.norm_sq.sqrt().powi(deg as i32))
    }

    fn channel(&self, a: &CMatrix) -> CMatrix {
        self.basis
            .iter()
            .fold(CMatrix::zeros(a.dim()), |acc, b| acc.add(&b.matmul(a).matmul(b)))
    }

    fn drift(&self, p: usize) -> Complex64 {
        let dd = self.d * (self.d - 1.0);
        let mut s = Complex64::new(0.0, 0.0);
        for l in 0..p.saturating_sub(1) {
            let ch = self.channel(&self.pows[p - 2 - l]);
            s += self.pows[l].matmul(&ch).trace() * (2.0 * (l + 1) as f64 * self.norm_sq / dd);
        }
        let pf = p as f64;
        s - self.pows[p].trace() * (pf * (pf + self.d - 2.0) / dd)
    }

    fn quadratic(&self, p: usize, q: usize, conj: bool) -> Complex64 {
        let cj = |z: Complex64| if conj { z.conj() } else { z };
        let vp: Vec<Complex64> = self.basis.iter().map(|b| self.pows[p - 1].matmul(b).trace()).collect();
        let vq: Vec<Complex64> = self.basis.iter().map(|b| self.pows[q - 1].matmul(b).trace()).collect();
        let gram: Complex64 = vp.iter().zip(&vq).map(|(a, b)| a * cj(*b)).sum();
        let (wp, wq) = (self.pows[p].trace(), self.pows[q].trace());
        (gram * self.norm_sq - wp * cj(wq)) * (2.0 * (p * q) as f64 / (self.d * (self.d - 1.0)))
    }
}

fn c3_stein_limits() -> Outcome {
    let (n, m, trials) = (4, 6, 400_000u64);
    let engine = Engine::new(0).unwrap();
    let mut zs = Vec::new();
    let mut slopes = Vec::new();
    for (i, kind) in SpaceKind::ALL.into_iter().enumerate() {
        let space = MatrixSpace::new(kind, n).unwrap();
        let x = EnsembleSpec::new(space.clone(), RadialLaw::GaussianCoords, 3003 + i as u64)
            .unwrap()
            .sample(0)
            .unwrap();
        let rep = empirical_limits(&space, &x, m, &DEFAULT_EPS_SCHEDULE, trials, 3103 + i as u64, &engine).unwrap();
        let oracle = SteinOracle::new(&space, &x, m);
        let mut local = Vec::new();
        for (p, r) in (1..=m).zip(&rep.drift) {
            local.push(z_complex(r.extrapolated.mean, r.extrapolated.se, oracle.drift(p), oracle.floor(p)));
        }

        let pairs: Vec<(usize, usize)> = (1..=m).flat_map(|p| (p..=m).map(move |q| (p, q))).collect();
        for (&(p, q), r) in pairs.iter().zip(&rep.conjugated) {
            local.push(z_complex(r.extrapolated.mean, r.extrapolated.se, oracle.quadratic(p, q, true), oracle.floor(p + q)));
        }
        for (&(p, q), r) in pairs.iter().zip(&rep.unconjugated) {
            local.push(z_complex(r.extrapolated.mean, r.extrapolated.se, oracle.quadratic(p, q, false), oracle.floor(p + q)));
        }
        let third: Vec<String> = rep.third_moment.iter().map(|t| format!("{:.3e}", t.mean)).collect();
        println!(
            "    {kind}: max |z| {:.2} over {} limits; E|ΔW|³/ε² = [{}], log-log slope {:.3}",
            local.iter().copied().fold(0.0, f64::max),
            local.len(),
            third.join(", "),
            rep.third_moment_slope
        );
        slopes.push(rep.third_moment_slope);
        zs.extend(local);
    }
    let fam = Family::new(&zs);
    let linear = slopes.iter().all(|s| (s - 1.0).abs() <= 0.1);
    outcome(
        fam.pass() && linear,
        format!("{}; third-moment slopes within 1 ± 0.1: {linear}", fam.describe()),
    )
}

/// `E ∏ u_i^{a_i}` on the unit sphere of `R^d`: `∏(a_i − 1)!! / (d(d+2)⋯(d+Σa−2))`
/// for even exponents, zero otherwise.
fn sphere_moment_double_factorial(d: usize, exps: &[u32]) -> BigRational {
    if exps.iter().any(|a| a % 2 == 1) {
        return BigRational::zero();
    }
    let mut num = BigRational::one();
    for &a in exps {
        let mut k = a as i64 - 1;
        while k > 1 {
            num *= int(k);
            k -= 2;
        }
    }
    let total: u32 = exps.iter().sum();
    let mut den = BigRational::one();
    for j in 0..total / 2 {
        den *= int(d as i64 + 2 * j as i64);
    }
    num / den
}

fn eval_word(x: &CMatrix, xs: &CMatrix, word: &TraceWord) -> Complex64 {
    let letters = word.letters();
    let pick = |l: &Letter| if *l == Letter::X { x } else { xs };
    let (last, head) = letters.split_last().expect("nonempty word");
    if head.is_empty() {
        return pick(last).trace();
    }
    let mut acc = pick(&head[0]).clone();
    for l in &head[1..] {
        acc = acc.matmul(pick(l));
    }
    acc.trace_of_product(pick(last))
}

fn c4_oracle_cross_check() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    for (d, exps) in [(4, vec![4, 0, 0, 0]), (4, vec![2, 2, 0, 0]), (7, vec![2, 4, 2, 0, 0, 0, 0]), (5, vec![3, 1, 0, 0, 0])] {
        let lib = sphere_monomial_moment(d, &MonomialExponents(exps.clone())).unwrap();
        let own = sphere_moment_double_factorial(d, &exps);
        ok &= lib == own;
        notes.push(format!("d={d} {exps:?}: {lib}"));
    }
    ok &= sphere_monomial_moment(4, &MonomialExponents(vec![4, 0, 0, 0])).unwrap() == frac(1, 8);
    println!("    sphere monomials: {}", notes.join("; "));

    let words: Vec<TraceWord> = ["XX*", "X^2", "X^2X*", "X^2X*^2", "XX*XX*", "XX*^2X", "X^4"]
        .iter()
        .map(|w| w.parse().unwrap())
        .collect();
    let engine = Engine::new(0).unwrap();
    let mut zs = Vec::new();
    for n in [2usize, 3] {
        let spec = EnsembleSpec::new(MatrixSpace::new(SpaceKind::GeneralComplex, n).unwrap(), RadialLaw::FixedNorm, 4004 + n as u64)
            .unwrap();
        let acc = engine
            .fold(
                10_000_000,
                || vec![ComplexMoments::default(); words.len()],
                |acc, t| {
                    let x = spec.sample(t)?;
                    let xs = x.adjoint();
                    for (a, w) in acc.iter_mut().zip(&words) {
                        a.push(eval_word(&x, &xs, w));
                    }
                    Ok(())
                },
                |a, b| a.iter().zip(b).map(|(x, y)| x.merge(y)).collect(),
            )
            .unwrap();
        for (a, w) in acc.iter().zip(&words) {
            let exact = exact_trace_moment(SpaceKind::GeneralComplex, n, w, false).unwrap();
            let (re, im) = exact.to_f64_pair();
            let e = a.estimate();
            let z = z_complex(e.mean, e.se, Complex64::new(re, im), 0.0);
            println!("    n={n} E tr {w} = {exact}: Monte Carlo {:.5}{:+.5}i (z {z:.2})", e.mean.re, e.mean.im);
            zs.push(z);
        }
    }
    let fam = Family::new(&zs);
    let rec = mean_recursion_check(SpaceKind::HermitianComplex, 3, 4).unwrap();
    println!("    mean recursion herm n=3 p=4: {} vs {}", rec.mean, rec.recursion);
    outcome(
        ok && fam.pass() && rec.holds(),
        format!("monomial formula agrees: {ok}; words: {}; recursion exact: {}", fam.describe(), rec.holds()),
    )
}

fn c5_means() -> Outcome {
    let (n, trials) = (64usize, 100_000u64);
    let nf = n as f64;
    let mut pass = true;
    let mut lines = Vec::new();

    let mut cfg = config(ExperimentKind::Means, SpaceKind::HermitianComplex, n, 6, trials, 5005);
    let gue = run_means(&cfg).unwrap();
    let mut ok = true;
    for r in 1..=3 {
        let (est, se) = row(&gue, &format!("mean W_{}/n", 2 * r));
        ok &= (est - catalan(r) as f64).abs() <= SLACK / nf + 3.0 * se;
        lines.push(format!("GUE W_{}/n = {est:.4} ± {se:.4} vs {}", 2 * r, catalan(r)));
    }
    pass &= ok;

    cfg = config(ExperimentKind::Means, SpaceKind::GeneralComplex, n, 6, trials, 5006);
    let gin = run_means(&cfg).unwrap();
    let zs: Vec<f64> = (1..=6)
        .map(|p| {
            let (re, se) = row(&gin, &format!("mean W_{p}"));
            let (im, _) = row(&gin, &format!("mean Im W_{p}"));
            z_complex(Complex64::new(re, im), se, Complex64::new(0.0, 0.0), 0.0)
        })
        .collect();
    let fam = Family::new(&zs);
    pass &= fam.pass();
    lines.push(format!("complex Ginibre means vs 0: {}", fam.describe()));

    cfg = config(ExperimentKind::Means, SpaceKind::GeneralReal, n, 6, trials, 5007);
    let real = run_means(&cfg).unwrap();
    for p in [2, 4, 6] {
        let (est, se) = row(&real, &format!("mean W_{p}"));
        pass &= (est - 1.0).abs() <= SLACK / nf + 3.0 * se;
        lines.push(format!("real Ginibre W_{p} = {est:.4} ± {se:.4} vs 1"));
    }

    cfg = config(ExperimentKind::Means, SpaceKind::AntisymmetricReal, n, 6, trials, 5008);
    cfg.radial = RadialConfig::Sphere;
    let asym = run_means(&cfg).unwrap();
    for r in 1..=3 {
        let (est, se) = row(&asym, &format!("mean W_{}/n", 2 * r));
        let target = if r % 2 == 0 { 1.0 } else { -1.0 } * catalan(r) as f64;
        pass &= (est - target).abs() <= SLACK / nf + 3.0 * se;
        lines.push(format!("antisymmetric sphere W_{}/n = {est:.4} ± {se:.4} vs {target}", 2 * r));
    }
    for l in &lines {
        println!("    {l}");
    }
    outcome(pass, format!("n = {n}, {trials} trials per ensemble, band {SLACK}/n + 3 SE"))
}

fn c6_ginibre_covariance() -> Outcome {
    let (n, m) = (64usize, 5usize);
    let rep = run_covariance(&config(ExperimentKind::Covariance, SpaceKind::GeneralComplex, n, m, 100_000, 6006)).unwrap();
    let get = |name: &str| {
        let (re, se) = row(&rep, &format!("{name} re"));
        let (im, _) = row(&rep, &format!("{name} im"));
        (Complex64::new(re, im), se)
    };
    let mut diag = Vec::new();
    let mut off = Vec::new();
    let mut plain = Vec::new();
    for p in 1..=m {
        for q in p..=m {
            let (c, se) = get(&format!("E[W_{p} conj W_{q}]"));
            if p == q {
                let z = z_complex(c, se, Complex64::new(p as f64, 0.0), SLACK / n as f64);
                println!("    E|W_{p}|² = {:.4} ± {se:.4} vs {p}", c.re);
                diag.push(z);
            } else {
                off.push(z_complex(c, se, Complex64::new(0.0, 0.0), 0.0));
            }
            let (u, se) = get(&format!("E[W_{p} W_{q}]"));
            plain.push(z_complex(u, se, Complex64::new(0.0, 0.0), 0.0));
        }
    }
    let diag_ok = diag.iter().all(|z| *z <= 3.0);
    let fo = Family::new(&off);
    let fp = Family::new(&plain);
    outcome(
        diag_ok && fo.pass() && fp.pass(),
        format!(
            "diagonal within {SLACK}/n + 3 SE: {diag_ok}; off-diagonal: {}; unconjugated: {}",
            fo.describe(),
            fp.describe()
        ),
    )
}

/// `(2y)^p = Σ_k c_k T_k(y)` in the Chebyshev basis.
fn chebyshev_coeffs(p: usize) -> Vec<BigRational> {
    let mut c = vec![BigRational::one()];
    for _ in 0..p {
        let mut next = vec![BigRational::zero(); c.len() + 1];
        for (k, v) in c.iter().enumerate() {
            // 2y T_0 = 2 T_1, 2y T_k = T_{k+1} + T_{k−1}.
            if k == 0 {
                next[1] += v * int(2);
            } else {
                next[k + 1] += v;
                next[k - 1] += v;
            }
        }
        c = next;
    }
    c
}

/// Limiting covariance of `Z` for Gaussian Hermitian (`β = 2`) or symmetric
/// (`β = 1`) matrices with semicircle support `[−2, 2]`: the statistics
/// `Σ_i T_k(λ_i/2)` are asymptotically independent with variance `k/(2β)`.
fn chebyshev_sigma(beta: i64, m: usize, indices: &[usize]) -> Vec<Vec<BigRational>> {
    let coeffs: Vec<Vec<BigRational>> = (0..=m).map(chebyshev_coeffs).collect();
    let cov_w = |p: usize, q: usize| -> BigRational {
        (1..=p.min(q))
            .map(|k| &coeffs[p][k] * &coeffs[q][k] * frac(k as i64, 2 * beta))
            .sum()
    };
    // Z_p = W_p − (p C_{p/2} / 2) W_2 + const for even p.
    let shift = |p: usize| -> BigRational {
        if p % 2 == 0 {
            frac((p as u64 * catalan(p / 2)) as i64, 2)
        } else {
            BigRational::zero()
        }
    };
    indices
        .iter()
        .map(|&p| {
            indices
                .iter()
                .map(|&q| {
                    let (a, b) = (shift(p), shift(q));
                    cov_w(p, q) - &a * cov_w(2, q) - &b * cov_w(p, 2) + &a * &b * cov_w(2, 2)
                })
                .collect()
        })
        .collect()
}

fn to_f64(m: &[Vec<BigRational>]) -> Vec<Vec<f64>> {
    m.iter().map(|r| r.iter().map(|v| v.to_f64().unwrap()).collect()).collect()
}

fn c7_factor_two() -> Outcome {
    let n = 128usize;
    let nf = n as f64;
    let indices = [1usize, 3];
    let sigma_half = to_f64(&chebyshev_sigma(2, 3, &indices));
    let sigma_one = to_f64(&chebyshev_sigma(1, 3, &indices));
    println!("    oracle Σ (β = 2): {sigma_half:?}; (β = 1): {sigma_one:?}");
    let mut pass = true;
    let mut verdicts = Vec::new();
    for (kind, seed, supported, other, label) in [
        (SpaceKind::HermitianComplex, 7007u64, &sigma_half, &sigma_one, "GUE"),
        (SpaceKind::SymmetricReal, 7008, &sigma_one, &sigma_half, "GOE"),
    ] {
        let rep = run_covariance(&config(ExperimentKind::Covariance, kind, n, 3, 100_000, seed)).unwrap();
        let mut within = true;
        let mut inconsistent = false;
        let mut cells = Vec::new();
        for (i, p) in indices.iter().enumerate() {
            for (j, q) in indices.iter().enumerate().skip(i) {
                let (est, se) = row(&rep, &format!("cov(Z_{p},Z_{q})"));
                within &= (est - supported[i][j]).abs() <= SLACK / nf + 3.0 * se;
                inconsistent |= (est - other[i][j]).abs() > 5.0 * se + SLACK / nf;
                cells.push(format!("({p},{q}) {est:.3} ± {se:.3}"));
            }
        }
        let stated = rep
            .header
            .notes
            .iter()
            .filter(|s| s.starts_with("beta_factor"))
            .cloned()
            .collect::<Vec<_>>()
            .join("; ");
        println!("    {label}: {}; report says: {stated}", cells.join(", "));
        let expect = if kind == SpaceKind::HermitianComplex {
            "beta_factor 1/2: consistent"
        } else {
            "beta_factor 1: consistent"
        };
        let states = stated.contains(expect);
        pass &= within && inconsistent && states;
        verdicts.push(format!(
            "{label} supports {} (within bands: {within}, other > 5 SE: {inconsistent}, report states it: {states})",
            if kind == SpaceKind::HermitianComplex { "beta_factor 1/2" } else { "beta_factor 1" }
        ));
    }
    outcome(pass, verdicts.join("; "))
}

fn c8_sigma_structure() -> Outcome {
    let mut pass = true;
    let mut lines = Vec::new();
    for (kind, beta) in [(SpaceKind::HermitianComplex, 2), (SpaceKind::SymmetricReal, 1)] {
        for m in 3..=8 {
            let model = covariance_model(kind, m, None).unwrap();
            let check = check_sigma(&model);
            let oracle = chebyshev_sigma(beta, m, &centered_indices(kind, m).unwrap());
            let matches = model.sigma == oracle;
            pass &= check.symmetric && check.min_eigenvalue >= -1e-10 && matches;
            lines.push(format!(
                "{kind} m={m}: symmetric {}, min eigenvalue {:.3e}, equals Chebyshev oracle {matches}",
                check.symmetric, check.min_eigenvalue
            ));
        }
    }
    for m in [4, 6, 8] {
        let model = covariance_model(SpaceKind::AntisymmetricReal, m, None).unwrap();
        let check = check_sigma(&model);
        lines.push(format!(
            "asym_r m={m} (informative): symmetric {}, min eigenvalue {:.3e}",
            check.symmetric, check.min_eigenvalue
        ));
    }
    for l in &lines {
        println!("    {l}");
    }
    outcome(pass, "Hermitian and symmetric Σ exact-symmetric, PSD, and equal to the Chebyshev oracle for m ≤ 8")
}

/// Gauss–Legendre nodes and weights on `[0, 1]`.
fn gauss_legendre(k: usize) -> Vec<(f64, f64)> {
    (1..=k)
        .map(|i| {
            let mut x = (std::f64::consts::PI * (i as f64 - 0.25) / (k as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for j in 2..=k {
                    let jf = j as f64;
                    let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
                    p0 = p1;
                    p1 = p2;
                }
                dp = k as f64 * (x * p1 - p0) / (x * x - 1.0);
                let step = p1 / dp;
                x -= step;
                if step.abs() < 1e-16 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            ((x + 1.0) / 2.0, w / 2.0)
        })
        .collect()
}

/// `(1/π)∫_D g′(z) conj(h′(z)) dA` by polar quadrature.
fn disk_quadrature(g: &PolynomialTestFunction, h: &PolynomialTestFunction) -> Complex64 {
    let deriv = |f: &PolynomialTestFunction, z: Complex64| -> Complex64 {
        (1..f.coeffs().len()).map(|j| f.coeff(j) * j as f64 * z.powu(j as u32 - 1)).sum()
    };
    let radial = gauss_legendre(24);
    let angles = 64;
    let mut s = Complex64::new(0.0, 0.0);
    for (r, w) in &radial {
        for a in 0..angles {
            let th = 2.0 * std::f64::consts::PI * a as f64 / angles as f64;
            let z = Complex64::from_polar(*r, th);
            s += deriv(g, z) * deriv(h, z).conj() * (w * r);
        }
    }
    s * (2.0 / angles as f64)
}

fn c9_corollary() -> Outcome {
    let mut exact_ok = true;
    let mut worst = 0.0f64;
    for p in 1..=6usize {
        for q in 1..=6usize {
            let mut g = vec![0i64; p + 1];
            g[p] = 1;
            let mut h = vec![0i64; q + 1];
            h[q] = 1;
            let want = if p == q { int(p as i64) } else { BigRational::zero() };
            exact_ok &= corollary_covariance_exact(&g, &h) == want;
            let (gm, hm) = (PolynomialTestFunction::monomial(p), PolynomialTestFunction::monomial(q));
            let lib = corollary_covariance(&gm, &hm);
            let quad = disk_quadrature(&gm, &hm);
            worst = worst.max((lib - quad).norm()).max((quad - want.to_f64().unwrap()).norm());
        }
    }
    let g = PolynomialTestFunction::new(vec![
        Complex64::new(0.3, 0.0),
        Complex64::new(1.0, -0.5),
        Complex64::new(0.0, 2.0),
        Complex64::new(-1.5, 0.25),
    ]);
    let h = PolynomialTestFunction::real(&[0.0, 2.0, -1.0, 0.5, 0.75]);
    let mixed = (corollary_covariance(&g, &h) - disk_quadrature(&g, &h)).norm();
    worst = worst.max(mixed);
    outcome(
        exact_ok && worst <= 1e-6,
        format!("exact p·δ_pq: {exact_ok}; max quadrature discrepancy {worst:.2e}"),
    )
}

fn c10_rate_sweep() -> Outcome {
    let mut pass = true;
    let mut lines = Vec::new();
    for (space, radial, seed, label) in [
        (SpaceKind::GeneralComplex, RadialConfig::Gauss, 1010u64, "complex Ginibre"),
        (SpaceKind::HermitianComplex, RadialConfig::Sphere, 1011, "Hermitian sphere"),
    ] {
        let mut cfg = config(ExperimentKind::Sweep, space, 16, 3, 40_000, seed);
        cfg.radial = radial;
        cfg.sweep_sizes = vec![16, 32, 64, 128];
        let (_, summary) = run_sweep(&cfg).unwrap();
        // Gaussian reference exp(−θᵀΣθ/2) with θ = 0.5 per coordinate.
        let quad_form = match space {
            SpaceKind::GeneralComplex => 0.25 * (1..=3).map(|p| 2.0 * p as f64 / 2.0).sum::<f64>(),
            _ => 0.25 * to_f64(&chebyshev_sigma(2, 3, &[1, 3])).iter().flatten().sum::<f64>(),
        };
        let reference = (-quad_form / 2.0).exp();
        let ref_ok = summary.points.iter().all(|p| (p.reference - reference).abs() < 1e-12);
        let pts: Vec<String> = summary
            .points
            .iter()
            .map(|p| format!("n={} δ={:.2e} (SE {:.1e})", p.n, p.delta, p.estimate.se))
            .collect();
        let (ok, verdict) = match summary.verdict {
            SweepVerdict::Slope { slope, ci_low, ci_high, resolved, .. } => (
                (-1.5..=-0.5).contains(&slope),
                format!("slope {slope:.3} [{ci_low:.3}, {ci_high:.3}] from {resolved} resolved sizes"),
            ),
            SweepVerdict::NoiseDominated { noise_floor, resolved } => (
                true,
                format!("noise-dominated ({resolved} sizes resolved), noise floor {noise_floor:.2e}"),
            ),
        };
        pass &= ok && ref_ok;
        println!("    {label}: {}", pts.join(", "));
        lines.push(format!("{label}: {verdict}; reference matches oracle: {ref_ok}"));
    }
    outcome(pass, lines.join("; "))
}

fn c11_reproducibility() -> Outcome {
    let mut pass = true;
    let mut checked = Vec::new();
    let cases = [
        config(ExperimentKind::Means, SpaceKind::GeneralReal, 12, 5, 3_000, 1111),
        config(ExperimentKind::Covariance, SpaceKind::HermitianComplex, 10, 4, 3_000, 1112),
        config(ExperimentKind::Stein, SpaceKind::SymmetricReal, 4, 4, 2_000, 1113),
    ];
    for base in cases {
        let mut bodies = Vec::new();
        for workers in [1, 2, 5] {
            let mut c = base.clone();
            c.workers = workers;
            bodies.push(rmtlab::harness::run(&c).unwrap().csv_body().unwrap());
        }
        let same = bodies.windows(2).all(|w| w[0] == w[1]);
        pass &= same;
        checked.push(format!("{:?}/{}: {same}", base.experiment, base.space));
    }
    let mut sweep = config(ExperimentKind::Sweep, SpaceKind::GeneralComplex, 8, 3, 1_000, 1114);
    sweep.sweep_sizes = vec![4, 6, 8];
    let a = run_sweep(&sweep).unwrap().0.csv_body().unwrap();
    sweep.workers = 4;
    let b = run_sweep(&sweep).unwrap().0.csv_body().unwrap();
    pass &= a == b;
    checked.push(format!("Sweep/gl_c: {}", a == b));
    outcome(pass, format!("bit-identical across workers 1, 2, 5: {}", checked.join(", ")))
}

fn main() -> ExitCode {
    let only: Option<Vec<usize>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|t| t.trim().parse().ok()).collect());
    let criteria: [(usize, &str, fn() -> Outcome); 11] = [
        (1, "algebraic identities", c1_algebraic_identities),
        (2, "Q-moments", c2_q_moments),
        (3, "Stein limits", c3_stein_limits),
        (4, "oracle cross-check", c4_oracle_cross_check),
        (5, "means", c5_means),
        (6, "Ginibre covariances", c6_ginibre_covariance),
        (7, "factor-2 adjudication", c7_factor_two),
        (8, "Σ structure", c8_sigma_structure),
        (9, "corollary covariance", c9_corollary),
        (10, "rate sweep", c10_rate_sweep),
        (11, "reproducibility", c11_reproducibility),
    ];
    let mut failed = 0;
    for (id, name, f) in criteria {
        if only.as_ref().is_some_and(|o| !o.contains(&id)) {
            continue;
        }
        let start = Instant::now();
        let o = f();
        let secs = start.elapsed().as_secs_f64();
        println!(
            "criterion {id:>2} {:<24} {} ({secs:.1} s): {}",
            name,
            if o.pass { "PASS" } else { "FAIL" },
            o.summary
        );
        failed += usize::from(!o.pass);
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
