//! The exchangeable pair `X_ε = (U R_ε Uᵀ)(X)` and its conditional limits.
//!
//! Only the two-frame `K` of `U` matters: in coordinates
//! `x_ε = x + ε Q x + (√(1−ε²) − 1) KKᵀ x` with `Q = KCKᵀ`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::engine::Engine;
use crate::ensembles::{haar_two_frame, TwoFrame};
use crate::error::{Error, Result};
use crate::matrix::CMatrix;
use crate::spaces::{MatrixSpace, SpaceKind};
use crate::stats::{ComplexEstimate, ComplexMoments, Estimate, Moments};
use crate::trace_stats::{powers, trace_powers, TraceVector};

pub const DEFAULT_EPS_SCHEDULE: [f64; 3] = [1e-2, 5e-3, 2.5e-3];

/// Relative roundoff allowance for extrapolated limits; see [`LimitRow::floor`].
pub const ROUNDOFF_FLOOR: f64 = 1e-9;

/// `√(1−ε²) − 1` without cancellation.
fn radial_shrink(eps: f64) -> f64 {
    -eps * eps / (1.0 + (1.0 - eps * eps).sqrt())
}

/// Exact rotation of a coordinate vector by angle `arcsin ε` in the plane of `K`.
pub fn rotate_coords(coords: &[f64], frame: &TwoFrame, eps: f64) -> Result<Vec<f64>> {
    if frame.dim() != coords.len() {
        return Err(Error::ShapeMismatch {
            expected: coords.len(),
            actual: frame.dim(),
        });
    }
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::Config(format!("ε must lie in [0, 1), got {eps}")));
    }
    let (a, b) = frame.project(coords);
    let c = radial_shrink(eps);
    let (s1, s2) = (eps * b + c * a, -eps * a + c * b);
    let (u1, u2) = frame.columns();
    Ok(coords
        .iter()
        .zip(u1.iter().zip(u2))
        .map(|(x, (p, q))| x + s1 * p + s2 * q)
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairSample {
    pub x: CMatrix,
    pub frame: TwoFrame,
    pub eps: f64,
    pub x_eps: CMatrix,
}

pub fn rotate_pair(space: &MatrixSpace, x: &CMatrix, frame: &TwoFrame, eps: f64) -> Result<PairSample> {
    if frame.dim() != space.dim() {
        return Err(Error::ShapeMismatch {
            expected: space.dim(),
            actual: frame.dim(),
        });
    }
    let coords = space.extract(x)?;
    let x_eps = space.embed(&rotate_coords(&coords, frame, eps)?)?;
    Ok(PairSample {
        x: x.clone(),
        frame: frame.clone(),
        eps,
        x_eps,
    })
}

/// A closed form evaluated by the generic basis/channel sum and, where one
/// exists, by the space-specific identity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosedForm {
    pub generic: Complex64,
    pub specialized: Option<Complex64>,
}

impl ClosedForm {
    pub fn value(&self) -> Complex64 {
        self.generic
    }

    /// Relative disagreement between the two evaluations (0 when only one exists).
    pub fn discrepancy(&self) -> f64 {
        self.specialized
            .map_or(0.0, |s| (s - self.generic).norm() / (1.0 + self.generic.norm().max(s.norm())))
    }
}

/// Precomputed data about a fixed X shared by all closed forms.
#[derive(Debug, Clone)]
pub struct PairContext<'a> {
    space: &'a MatrixSpace,
    coords: Vec<f64>,
    /// `X⁰ … X^max`.
    pows: Vec<CMatrix>,
    w: TraceVector,
    norm_sq: f64,
}

impl<'a> PairContext<'a> {
    pub fn new(space: &'a MatrixSpace, x: &CMatrix, max_power: usize) -> Result<Self> {
        let coords = space.extract(x)?;
        let max_power = max_power.max(2);
        let mut pows = vec![CMatrix::identity(space.n())];
        pows.extend(powers(x, max_power));
        let w = trace_powers(x, max_power)?;
        Ok(Self {
            space,
            coords,
            pows,
            w,
            norm_sq: x.hs_norm_sq(),
        })
    }

    fn ensure(&self, p: usize) -> Result<()> {
        if p == 0 || p >= self.pows.len() {
            return Err(Error::InvalidDimension(format!(
                "power {p} outside 1..={} for this context",
                self.pows.len() - 1
            )));
        }
        Ok(())
    }

    fn dd(&self) -> f64 {
        let d = self.space.dim() as f64;
        d * (d - 1.0)
    }

    /// `lim ε⁻² E[W_{ε,p} − W_p | X]`.
    pub fn drift(&self, p: usize) -> Result<ClosedForm> {
        self.ensure(p)?;
        let d = self.space.dim() as f64;
        let dd = self.dd();
        let w = |k: usize| self.w.w(k);
        let tail = w(p) * (p as f64 * (p as f64 + d - 2.0) / dd);
        let generic = (0..p.saturating_sub(1))
            .map(|l| {
                let ch = self.space.channel_sum(&self.pows[p - 2 - l]);
                self.pows[l].trace_of_product(&ch) * (2.0 * (l + 1) as f64 * self.norm_sq / dd)
            })
            .sum::<Complex64>()
            - tail;
        let conv = || (0..p.saturating_sub(1)).map(|l| w(l) * w(p - 2 - l)).sum::<Complex64>();
        let pf = p as f64;
        let specialized = match self.space.kind() {
            SpaceKind::GeneralComplex => Some(-tail),
            SpaceKind::GeneralReal => {
                let xt = self.pows[1].transpose();
                let xt_pows: Vec<CMatrix> = std::iter::once(CMatrix::identity(self.space.n()))
                    .chain(powers(&xt, p.saturating_sub(2)))
                    .collect();
                let s: Complex64 = (0..p.saturating_sub(1))
                    .map(|l| self.pows[l].trace_of_product(&xt_pows[p - 2 - l]))
                    .sum();
                Some(s * (self.norm_sq * pf / dd) - tail)
            }
            SpaceKind::HermitianComplex => Some(w(2) * conv() * (pf / dd) - tail),
            SpaceKind::SymmetricReal => {
                let first = if p >= 2 { w(2) * w(p - 2) * (pf - 1.0) } else { Complex64::new(0.0, 0.0) };
                Some((first + w(2) * conv() - w(p) * (2.0 * (pf + d - 2.0))) * (pf / (2.0 * dd)))
            }
            SpaceKind::AntisymmetricReal | SpaceKind::AntihermitianComplex => None,
        };
        Ok(ClosedForm { generic, specialized })
    }

    /// `lim ε⁻² E[(W_ε − W)_p (W_ε − W)_q^{(*)} | X]`, conjugating the second
    /// factor when `conjugated`.
    pub fn quadratic(&self, p: usize, q: usize, conjugated: bool) -> Result<ClosedForm> {
        self.ensure(p)?;
        self.ensure(q)?;
        let cj = |z: Complex64| if conjugated { z.conj() } else { z };
        let scale = 2.0 * (p * q) as f64 / self.dd();
        let vp = self.space.basis_traces(&self.pows[p - 1]);
        let vq = self.space.basis_traces(&self.pows[q - 1]);
        let gram: Complex64 = vp.iter().zip(&vq).map(|(a, b)| a * cj(*b)).sum();
        let xp: Complex64 = self.coords.iter().zip(&vp).map(|(x, a)| a * *x).sum();
        let xq: Complex64 = self.coords.iter().zip(&vq).map(|(x, b)| b * *x).sum();
        let generic = (gram * self.norm_sq - xp * cj(xq)) * scale;
        let w = |k: usize| self.w.w(k);
        let specialized = match self.space.kind() {
            SpaceKind::GeneralComplex => {
                if conjugated {
                    let t = self.pows[p - 1].trace_of_product(&self.pows[q - 1].adjoint());
                    Some((t * (2.0 * self.norm_sq) - w(p) * w(q).conj()) * scale)
                } else {
                    Some(-w(p) * w(q) * scale)
                }
            }
            SpaceKind::GeneralReal => {
                let t = self.pows[p - 1].transpose().trace_of_product(&self.pows[q - 1]);
                Some((t * self.norm_sq - w(p) * w(q)) * scale)
            }
            SpaceKind::HermitianComplex | SpaceKind::SymmetricReal => {
                Some((w(2) * w(p + q - 2) - w(p) * cj(w(q))) * scale)
            }
            SpaceKind::AntisymmetricReal | SpaceKind::AntihermitianComplex => None,
        };
        Ok(ClosedForm { generic, specialized })
    }
}

pub fn drift_closed_form(space: &MatrixSpace, x: &CMatrix, p: usize) -> Result<ClosedForm> {
    PairContext::new(space, x, p)?.drift(p)
}

pub fn quadratic_closed_form(space: &MatrixSpace, x: &CMatrix, p: usize, q: usize, conjugated: bool) -> Result<ClosedForm> {
    PairContext::new(space, x, p + q)?.quadratic(p, q, conjugated)
}

/// Lagrange weights that evaluate the interpolant through `(h_i, y_i)` at 0.
pub fn extrapolation_weights(h: &[f64]) -> Vec<f64> {
    (0..h.len())
        .map(|i| {
            (0..h.len())
                .filter(|&j| j != i)
                .map(|j| h[j] / (h[j] - h[i]))
                .product()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitRow {
    pub name: String,
    pub per_eps: Vec<ComplexEstimate>,
    pub extrapolated: ComplexEstimate,
    /// `|extrapolated − smallest-ε estimate|`.
    pub residual: f64,
    pub closed_form: ClosedForm,
    /// Roundoff allowance `1e-9·(1 + n‖X‖^k)` for a statistic of total degree k.
    /// Limits that vanish identically (e.g. the drift of `W_2`) are otherwise
    /// measured at pure rounding error amplified by `ε⁻²`.
    pub floor: f64,
}

impl LimitRow {
    pub fn zscore(&self) -> f64 {
        crate::stats::zscore(
            ((self.extrapolated.mean - self.closed_form.value()).norm() - self.floor).max(0.0),
            0.0,
            self.extrapolated.se,
        )
    }

    pub fn within(&self, k: f64) -> bool {
        self.extrapolated.within(self.closed_form.value(), k, self.floor)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitReport {
    pub kind: SpaceKind,
    pub n: usize,
    pub m: usize,
    pub eps: Vec<f64>,
    pub trials: u64,
    pub drift: Vec<LimitRow>,
    pub conjugated: Vec<LimitRow>,
    pub unconjugated: Vec<LimitRow>,
    /// `E|W_ε − W|³ / ε²` per ε, with `|·|` the Euclidean norm over `p ≤ m`.
    pub third_moment: Vec<Estimate>,
    /// Slope of `log(E|W_ε − W|³/ε²)` against `log ε`; 1 means linear decay.
    pub third_moment_slope: f64,
}

impl LimitReport {
    pub fn rows(&self) -> impl Iterator<Item = &LimitRow> {
        self.drift.iter().chain(&self.conjugated).chain(&self.unconjugated)
    }
}

#[derive(Clone)]
struct LimitAcc {
    /// `[eps][stat]`, plus one extra slot per stat for the extrapolated value.
    stats: Vec<Vec<ComplexMoments>>,
    third: Vec<Moments>,
}

impl LimitAcc {
    fn merge(&self, other: &Self) -> Self {
        Self {
            stats: self
                .stats
                .iter()
                .zip(&other.stats)
                .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x.merge(y)).collect())
                .collect(),
            third: self.third.iter().zip(&other.third).map(|(a, b)| a.merge(b)).collect(),
        }
    }
}

/// Monte Carlo estimate of the conditional limits for a fixed `X`.
///
/// Each trial draws one frame and uses it together with its column swap
/// (which maps `Q ↦ −Q`), so terms odd in ε cancel exactly and the
/// per-ε bias is `O(ε²)`. The same frames serve every ε, and the
/// extrapolation to ε → 0 is polynomial in ε².
pub fn empirical_limits(
    space: &MatrixSpace,
    x: &CMatrix,
    m: usize,
    eps: &[f64],
    trials: u64,
    seed: u64,
    engine: &Engine,
) -> Result<LimitReport> {
    if trials < 2 {
        return Err(Error::InsufficientTrials(format!("{trials} trials give no standard error")));
    }
    if eps.is_empty() || eps.iter().any(|e| !(*e > 0.0 && *e < 1.0)) {
        return Err(Error::Config("ε schedule must be nonempty with entries in (0, 1)".into()));
    }
    let ctx = PairContext::new(space, x, 2 * m)?;
    let coords = ctx.coords.clone();
    let w0 = trace_powers(x, m)?;
    let pairs: Vec<(usize, usize)> = (1..=m).flat_map(|p| (p..=m).map(move |q| (p, q))).collect();
    let n_stats = m + 2 * pairs.len();
    let h: Vec<f64> = eps.iter().map(|e| e * e).collect();
    let weights = extrapolation_weights(&h);
    let d = space.dim();

    let acc = engine.fold(
        trials,
        || LimitAcc {
            stats: vec![vec![ComplexMoments::default(); n_stats]; eps.len() + 1],
            third: vec![Moments::default(); eps.len()],
        },
        |acc, t| {
            let frame = haar_two_frame(d, seed, t)?;
            let swapped = frame.swapped();
            let mut extrap = vec![Complex64::new(0.0, 0.0); n_stats];
            for (i, &e) in eps.iter().enumerate() {
                let mut diffs = Vec::with_capacity(2);
                for f in [&frame, &swapped] {
                    let xe = space.embed(&rotate_coords(&coords, f, e)?)?;
                    let we = trace_powers(&xe, m)?;
                    diffs.push((1..=m).map(|p| we.w(p) - w0.w(p)).collect::<Vec<_>>());
                }
                let e2 = e * e;
                let mut vals = Vec::with_capacity(n_stats);
                for p in 0..m {
                    vals.push((diffs[0][p] + diffs[1][p]) / (2.0 * e2));
                }
                for conj in [true, false] {
                    for &(p, q) in &pairs {
                        let v: Complex64 = diffs
                            .iter()
                            .map(|dv| dv[p - 1] * if conj { dv[q - 1].conj() } else { dv[q - 1] })
                            .sum();
                        vals.push(v / (2.0 * e2));
                    }
                }
                for (k, v) in vals.iter().enumerate() {
                    acc.stats[i][k].push(*v);
                    extrap[k] += *v * weights[i];
                }
                let third = diffs
                    .iter()
                    .map(|dv| dv.iter().map(|z| z.norm_sqr()).sum::<f64>().powf(1.5))
                    .sum::<f64>()
                    / (2.0 * e2);
                acc.third[i].push(third);
            }
            for (k, v) in extrap.into_iter().enumerate() {
                acc.stats[eps.len()][k].push(v);
            }
            Ok(())
        },
        |a, b| a.merge(b),
    )?;

    let finest = (0..eps.len()).min_by(|&a, &b| eps[a].total_cmp(&eps[b])).expect("nonempty schedule");
    let norm = x.hs_norm();
    let floor = |deg: usize| ROUNDOFF_FLOOR * (1.0 + space.n() as f64 * norm.powi(deg as i32));
    let row = |k: usize, name: String, closed_form: ClosedForm, deg: usize| {
        let per_eps: Vec<ComplexEstimate> = (0..eps.len()).map(|i| acc.stats[i][k].estimate()).collect();
        let extrapolated = acc.stats[eps.len()][k].estimate();
        LimitRow {
            residual: (extrapolated.mean - per_eps[finest].mean).norm(),
            name,
            per_eps,
            extrapolated,
            closed_form,
            floor: floor(deg),
        }
    };
    let drift = (1..=m)
        .map(|p| Ok(row(p - 1, format!("drift_{p}"), ctx.drift(p)?, p)))
        .collect::<Result<Vec<_>>>()?;
    let mut conjugated = Vec::with_capacity(pairs.len());
    let mut unconjugated = Vec::with_capacity(pairs.len());
    for (j, &(p, q)) in pairs.iter().enumerate() {
        conjugated.push(row(m + j, format!("quad_conj_{p}_{q}"), ctx.quadratic(p, q, true)?, p + q));
        unconjugated.push(row(m + pairs.len() + j, format!("quad_plain_{p}_{q}"), ctx.quadratic(p, q, false)?, p + q));
    }
    let third_moment: Vec<Estimate> = acc.third.iter().map(Moments::estimate).collect();
    let logs_e: Vec<f64> = eps.iter().map(|e| e.ln()).collect();
    let logs_g: Vec<f64> = third_moment.iter().map(|t| t.mean.ln()).collect();
    let third_moment_slope = if eps.len() >= 2 {
        crate::stats::linear_fit(&logs_e, &logs_g).0
    } else {
        f64::NAN
    };
    Ok(LimitReport {
        kind: space.kind(),
        n: space.n(),
        m,
        eps: eps.to_vec(),
        trials,
        drift,
        conjugated,
        unconjugated,
        third_moment,
        third_moment_slope,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QMomentRow {
    pub indices: [usize; 4],
    pub estimate: Estimate,
    pub theory: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QCovarianceReport {
    pub d: usize,
    pub trials: u64,
    pub q_rows: Vec<QMomentRow>,
    /// `E[KKᵀ]` entries `(α, β)` with their estimate.
    pub kkt_rows: Vec<(usize, usize, Estimate, f64)>,
    pub max_deviation: f64,
    pub max_abs_z: f64,
}

/// One representative quadruple per equality pattern of `(α, β, γ, δ)`,
/// i.e. per set partition of the four positions.
pub fn q_index_patterns(d: usize) -> Vec<[usize; 4]> {
    let mut out = Vec::new();
    let mut labels = [0usize; 4];
    fn rec(pos: usize, next: usize, labels: &mut [usize; 4], d: usize, out: &mut Vec<[usize; 4]>) {
        if pos == 4 {
            // Spread blocks across the index range so patterns do not all sit at 0..3.
            out.push(labels.map(|l| (l * (d / 4).max(1) + l) % d));
            return;
        }
        for l in 0..=next.min(d - 1) {
            labels[pos] = l;
            rec(pos + 1, next.max(l + 1), labels, d, out);
        }
    }
    rec(0, 0, &mut labels, d, &mut out);
    out
}

/// `E[q_{αβ} q_{γδ}] = (2/(d(d−1)))(δ_{αγ}δ_{βδ} − δ_{αδ}δ_{βγ})` and
/// `E[KKᵀ] = (2/d) I`, checked on pattern representatives and on the
/// first row of `KKᵀ`.
pub fn q_covariance_check(d: usize, trials: u64, seed: u64, engine: &Engine) -> Result<QCovarianceReport> {
    if d < 3 {
        return Err(Error::InvalidDimension(format!("Q-moment check needs d ≥ 3, got {d}")));
    }
    if trials < 2 {
        return Err(Error::InsufficientTrials(format!("{trials}")));
    }
    let quads = q_index_patterns(d);
    let kkt_idx: Vec<(usize, usize)> = (0..d).map(|b| (0, b)).chain([(d - 1, d - 1)]).collect();
    let nq = quads.len();
    let acc = engine.fold(
        trials,
        || vec![Moments::default(); nq + kkt_idx.len()],
        |acc, t| {
            let k = haar_two_frame(d, seed, t)?;
            for (i, [a, b, c, e]) in quads.iter().enumerate() {
                acc[i].push(k.q_entry(*a, *b) * k.q_entry(*c, *e));
            }
            for (i, (a, b)) in kkt_idx.iter().enumerate() {
                acc[nq + i].push(k.kkt_entry(*a, *b));
            }
            Ok(())
        },
        |a, b| a.iter().zip(b).map(|(x, y)| x.merge(y)).collect(),
    )?;
    let df = d as f64;
    let delta = |i: usize, j: usize| if i == j { 1.0 } else { 0.0 };
    let q_rows: Vec<QMomentRow> = quads
        .iter()
        .enumerate()
        .map(|(i, &[a, b, c, e])| QMomentRow {
            indices: [a, b, c, e],
            estimate: acc[i].estimate(),
            theory: 2.0 / (df * (df - 1.0)) * (delta(a, c) * delta(b, e) - delta(a, e) * delta(b, c)),
        })
        .collect();
    let kkt_rows: Vec<(usize, usize, Estimate, f64)> = kkt_idx
        .iter()
        .enumerate()
        .map(|(i, &(a, b))| (a, b, acc[nq + i].estimate(), 2.0 / df * delta(a, b)))
        .collect();
    let devs = q_rows
        .iter()
        .map(|r| (r.estimate, r.theory))
        .chain(kkt_rows.iter().map(|r| (r.2, r.3)));
    let (mut max_deviation, mut max_abs_z) = (0.0f64, 0.0f64);
    for (e, th) in devs {
        max_deviation = max_deviation.max((e.mean - th).abs());
        max_abs_z = max_abs_z.max(e.zscore(th).abs());
    }
    Ok(QCovarianceReport {
        d,
        trials,
        q_rows,
        kkt_rows,
        max_deviation,
        max_abs_z,
    })
}
