//! Traces of powers `W_p = tr(X^p)`, the recentered vector `Z`, and
//! polynomial linear eigenvalue statistics.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::CMatrix;
use crate::spaces::SpaceKind;
use crate::theory::MeanPrediction;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceVector {
    n: usize,
    values: Vec<Complex64>,
}

impl TraceVector {
    pub fn new(n: usize, values: Vec<Complex64>) -> Self {
        Self { n, values }
    }

    pub fn m(&self) -> usize {
        self.values.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `W_p` for `0 ≤ p ≤ m`, with `W_0 = tr I = n`.
    pub fn w(&self, p: usize) -> Complex64 {
        if p == 0 {
            Complex64::new(self.n as f64, 0.0)
        } else {
            self.values[p - 1]
        }
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }
}

/// `[X, X², …, X^k]`.
pub fn powers(x: &CMatrix, k: usize) -> Vec<CMatrix> {
    let mut out: Vec<CMatrix> = Vec::with_capacity(k);
    if k == 0 {
        return out;
    }
    out.push(x.clone());
    for _ in 1..k {
        let next = out.last().expect("nonempty").matmul(x);
        out.push(next);
    }
    out
}

/// `W_1..W_m` by repeated multiplication. Powers up to `⌈m/2⌉` are formed
/// explicitly; higher traces use `tr(X^a X^b)` with `a + b = p`, which needs
/// only O(n²) per trace.
pub fn trace_powers(x: &CMatrix, m: usize) -> Result<TraceVector> {
    if m == 0 {
        return Err(Error::InvalidDimension("trace vector length m must be ≥ 1".into()));
    }
    let half = m.div_ceil(2);
    let pw = powers(x, half);
    let mut values = Vec::with_capacity(m);
    for p in 1..=m {
        let w = if p <= half {
            pw[p - 1].trace()
        } else {
            pw[half - 1].trace_of_product(&pw[p - half - 1])
        };
        if !(w.re.is_finite() && w.im.is_finite()) {
            return Err(Error::NumericOverflow(format!("tr(X^{p})")));
        }
        values.push(w);
    }
    Ok(TraceVector::new(x.dim(), values))
}

/// The index set of the recentered vector: `{1..m} \ {2}`, or even
/// `p ∈ {4..m}` for real antisymmetric matrices.
pub fn centered_indices(kind: SpaceKind, m: usize) -> Result<Vec<usize>> {
    match kind {
        SpaceKind::HermitianComplex | SpaceKind::SymmetricReal => Ok((1..=m).filter(|&p| p != 2).collect()),
        SpaceKind::AntisymmetricReal => Ok((4..=m).step_by(2).collect()),
        other => Err(Error::Unsupported {
            kind: other,
            what: "recentering (use W − E W directly)".into(),
        }),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CenteredVector {
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
    pub y2: f64,
}

impl CenteredVector {
    pub fn get(&self, p: usize) -> Option<f64> {
        self.indices.iter().position(|&q| q == p).map(|i| self.values[i])
    }
}

/// `Y_2 = ‖X‖² − n` and `Z_p = W_p − μ_p − (p μ_p / 2n) Y_2`.
///
/// For real antisymmetric X, `‖X‖² = −W_2`. The correction uses the signed
/// mean `μ_p = (−1)^{p/2} n C_{p/2}`, which is what removes the radial
/// fluctuation `W_p ≈ μ_p R^p` for every even p.
pub fn center_z(w: &TraceVector, means: &MeanPrediction, kind: SpaceKind) -> Result<CenteredVector> {
    let indices = centered_indices(kind, w.m())?;
    if means.kind != kind || means.n != w.n() || means.entries.len() < w.m() {
        return Err(Error::Config(format!(
            "mean prediction ({}, n={}, m={}) does not match trace vector ({kind}, n={}, m={})",
            means.kind,
            means.n,
            means.entries.len(),
            w.n(),
            w.m()
        )));
    }
    let n = w.n() as f64;
    let norm_sq = match kind {
        SpaceKind::AntisymmetricReal => -w.w(2).re,
        _ => w.w(2).re,
    };
    let y2 = norm_sq - n;
    let values = indices
        .iter()
        .map(|&p| {
            let mu = means.mean(p);
            w.w(p).re - mu - p as f64 * mu / (2.0 * n) * y2
        })
        .collect();
    Ok(CenteredVector { indices, values, y2 })
}

/// `g(z) = Σ_j a_j z^j` with complex coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolynomialTestFunction {
    coeffs: Vec<Complex64>,
}

impl PolynomialTestFunction {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        Self { coeffs }
    }

    pub fn monomial(p: usize) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); p + 1];
        coeffs[p] = Complex64::new(1.0, 0.0);
        Self { coeffs }
    }

    pub fn real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&a| Complex64::new(a, 0.0)).collect())
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeff(&self, j: usize) -> Complex64 {
        self.coeffs.get(j).copied().unwrap_or_default()
    }

    pub fn degree(&self) -> usize {
        self.coeffs.iter().rposition(|a| *a != Complex64::new(0.0, 0.0)).unwrap_or(0)
    }
}

/// `tr g(X) − n g(0) = Σ_{j≥1} a_j W_j`.
pub fn linear_statistic(w: &TraceVector, g: &PolynomialTestFunction) -> Result<Complex64> {
    let degree = g.degree();
    if degree > w.m() {
        return Err(Error::DegreeOverflow { degree, m: w.m() });
    }
    Ok((1..=degree).map(|j| g.coeff(j) * w.w(j)).sum())
}
