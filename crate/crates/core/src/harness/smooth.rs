//! C² test functions with closed-form `M₁` (Lipschitz constant) and `M₂`
//! (sup of the Hessian operator norm), and their Gaussian expectations.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::config::TestFunctionConfig;
use crate::error::{Error, Result};

pub const DEFAULT_QMC_NODES: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SmoothTestFunction {
    /// `cos(θ·z)`.
    CosLinear { theta: Vec<f64> },
    /// `r² h(|z|²/r²)` with `h(s) = s − s² + s³/3` on `[0, 1]` and `1/3`
    /// beyond; `h′ = (1−s)²` and `h″ = −2(1−s)` both vanish at `s = 1`.
    QuadraticClipped { radius: f64 },
}

impl SmoothTestFunction {
    pub fn from_config(cfg: &TestFunctionConfig, dim: usize) -> Result<Self> {
        Ok(match cfg {
            TestFunctionConfig::CosLinear { theta: None } => Self::CosLinear { theta: vec![0.5; dim] },
            TestFunctionConfig::CosLinear { theta: Some(t) } => {
                if t.len() != dim {
                    return Err(Error::ShapeMismatch {
                        expected: dim,
                        actual: t.len(),
                    });
                }
                Self::CosLinear { theta: t.clone() }
            }
            TestFunctionConfig::QuadraticClipped { radius } => Self::QuadraticClipped { radius: *radius },
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::CosLinear { .. } => "cos_linear",
            Self::QuadraticClipped { .. } => "quadratic_clipped",
        }
    }

    pub fn eval(&self, z: &[f64]) -> f64 {
        match self {
            Self::CosLinear { theta } => theta.iter().zip(z).map(|(a, b)| a * b).sum::<f64>().cos(),
            Self::QuadraticClipped { radius } => {
                let r2 = radius * radius;
                let s = (z.iter().map(|x| x * x).sum::<f64>() / r2).min(1.0);
                r2 * (s - s * s + s * s * s / 3.0)
            }
        }
    }

    pub fn m1(&self) -> f64 {
        match self {
            Self::CosLinear { theta } => norm(theta),
            // sup 2r√s(1−s)², attained at s = 1/5.
            Self::QuadraticClipped { radius } => 32.0 * radius / (25.0 * 5f64.sqrt()),
        }
    }

    pub fn m2(&self) -> f64 {
        match self {
            Self::CosLinear { theta } => norm(theta).powi(2),
            // Hessian eigenvalues 2(1−s)² and 2(1−s)(1−5s); the largest modulus is 2 at s = 0.
            Self::QuadraticClipped { .. } => 2.0,
        }
    }

    /// `E f(Σ^{1/2} G)`: closed form `exp(−θᵀΣθ/2)` for `cos_linear`,
    /// quasi-Monte Carlo otherwise.
    pub fn gaussian_reference(&self, sigma: &DMatrix<f64>, nodes: usize) -> Result<f64> {
        match self {
            Self::CosLinear { theta } => {
                if theta.len() != sigma.nrows() {
                    return Err(Error::ShapeMismatch {
                        expected: sigma.nrows(),
                        actual: theta.len(),
                    });
                }
                let t = nalgebra::DVector::from_column_slice(theta);
                Ok((-0.5 * (t.transpose() * sigma * &t)[(0, 0)]).exp())
            }
            Self::QuadraticClipped { .. } => gaussian_expectation_qmc(sigma, nodes, |z| self.eval(z)),
        }
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Symmetric square root via the eigendecomposition, clipping tiny negative
/// eigenvalues from round-off.
pub fn sqrt_psd(sigma: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let eig = SymmetricEigen::new((sigma + sigma.transpose()) * 0.5);
    if let Some(&bad) = eig.eigenvalues.iter().find(|&&l| l < -1e-9 * (1.0 + sigma.norm())) {
        return Err(Error::Config(format!("covariance has negative eigenvalue {bad}")));
    }
    let root = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    Ok(&eig.eigenvectors * DMatrix::from_diagonal(&root) * eig.eigenvectors.transpose())
}

const PRIMES: [u64; 24] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89];

/// Radical inverse of `i` in base `b`.
fn radical_inverse(mut i: u64, b: u64) -> f64 {
    let inv = 1.0 / b as f64;
    let (mut f, mut out) = (inv, 0.0);
    while i > 0 {
        out += (i % b) as f64 * f;
        i /= b;
        f *= inv;
    }
    out
}

/// Halton points mapped through the normal quantile and `Σ^{1/2}`.
pub fn gaussian_expectation_qmc(sigma: &DMatrix<f64>, nodes: usize, f: impl Fn(&[f64]) -> f64) -> Result<f64> {
    let dim = sigma.nrows();
    if dim > PRIMES.len() {
        return Err(Error::SizeLimit(format!("quasi-Monte Carlo supports dimension ≤ {}", PRIMES.len())));
    }
    if nodes == 0 {
        return Err(Error::Config("need at least one quadrature node".into()));
    }
    let root = sqrt_psd(sigma)?;
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    let mut g = vec![0.0; dim];
    let mut z = vec![0.0; dim];
    let vals: Vec<f64> = (1..=nodes as u64)
        .map(|i| {
            for (k, gk) in g.iter_mut().enumerate() {
                *gk = normal.inverse_cdf(radical_inverse(i, PRIMES[k]));
            }
            for (r, zr) in z.iter_mut().enumerate() {
                *zr = (0..dim).map(|c| root[(r, c)] * g[c]).sum();
            }
            f(&z)
        })
        .collect();
    Ok(crate::stats::pairwise_sum(&vals) / nodes as f64)
}
