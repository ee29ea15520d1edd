//! Rotationally invariant distributions on a matrix space, normalized so that
//! `E‖X‖² = n`, and Haar-distributed orthonormal 2-frames in `R^d`.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::matrix::CMatrix;
use crate::rng::{self, Domain};
use crate::spaces::MatrixSpace;
use crate::stats::{Estimate, Moments};

type RadiusFn = dyn Fn(&mut ChaCha8Rng) -> f64 + Send + Sync;

/// Sampler for `R = ‖X‖/√n` with `E R² = 1`.
#[derive(Clone)]
pub struct CustomRadial {
    name: String,
    sampler: Arc<RadiusFn>,
}

impl CustomRadial {
    pub fn new(name: impl Into<String>, sampler: impl Fn(&mut ChaCha8Rng) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            name: name.into(),
            sampler: Arc::new(sampler),
        }
    }

    /// `R² = χ²_k / k`; interpolates between Gaussian-like tails (small k) and
    /// the sphere (k → ∞).
    pub fn chi(dof: f64) -> Result<Self> {
        let chi = ChiSquared::new(dof).map_err(|e| Error::Config(format!("chi radial law: {e}")))?;
        Ok(Self::new(format!("chi({dof})"), move |rng| (chi.sample(rng) / dof).sqrt()))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn draw(&self, rng: &mut ChaCha8Rng) -> Result<f64> {
        let r = (self.sampler)(rng);
        if r.is_finite() && r > 0.0 {
            Ok(r)
        } else {
            Err(Error::Sampler(r))
        }
    }
}

impl fmt::Debug for CustomRadial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomRadial").field("name", &self.name).finish()
    }
}

#[derive(Debug, Clone)]
pub enum RadialLaw {
    /// Uniform on the sphere `‖X‖² = n`.
    FixedNorm,
    /// iid centered normal coordinates with variance `n/d`.
    GaussianCoords,
    Custom(CustomRadial),
}

impl RadialLaw {
    pub fn tag(&self) -> &'static str {
        match self {
            RadialLaw::FixedNorm => "sphere",
            RadialLaw::GaussianCoords => "gauss",
            RadialLaw::Custom(_) => "custom",
        }
    }
}

#[derive(Debug, Clone)]
pub struct EnsembleSpec {
    space: Arc<MatrixSpace>,
    radial: RadialLaw,
    master_seed: u64,
}

pub const CUSTOM_VALIDATION_DRAWS: u64 = 10_000;
pub const CUSTOM_VALIDATION_TOL: f64 = 0.01;

impl EnsembleSpec {
    pub fn new(space: impl Into<Arc<MatrixSpace>>, radial: RadialLaw, master_seed: u64) -> Result<Self> {
        if let RadialLaw::Custom(law) = &radial {
            let mut rng = rng::stream(master_seed, Domain::Validation, 0);
            let mut acc = Moments::default();
            for _ in 0..CUSTOM_VALIDATION_DRAWS {
                let r = law.draw(&mut rng)?;
                acc.push(r * r);
            }
            if (acc.mean - 1.0).abs() > CUSTOM_VALIDATION_TOL {
                return Err(Error::Config(format!(
                    "custom radial law {} has E R² ≈ {:.4}, must be 1 within {CUSTOM_VALIDATION_TOL}",
                    law.name(),
                    acc.mean
                )));
            }
        }
        Ok(Self {
            space: space.into(),
            radial,
            master_seed,
        })
    }

    pub fn space(&self) -> &MatrixSpace {
        &self.space
    }

    pub fn shared_space(&self) -> Arc<MatrixSpace> {
        Arc::clone(&self.space)
    }

    pub fn radial(&self) -> &RadialLaw {
        &self.radial
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    /// Rotationally invariant coordinate vector for trial `trial_index`.
    pub fn sample_coords(&self, trial_index: u64) -> Result<Vec<f64>> {
        let mut rng = rng::stream(self.master_seed, Domain::Sample, trial_index);
        let d = self.space.dim();
        let n = self.space.n() as f64;
        let mut coords: Vec<f64> = (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let scale = match &self.radial {
            RadialLaw::GaussianCoords => (n / d as f64).sqrt(),
            RadialLaw::FixedNorm => n.sqrt() / norm(&coords),
            RadialLaw::Custom(law) => law.draw(&mut rng)? * n.sqrt() / norm(&coords),
        };
        coords.iter_mut().for_each(|c| *c *= scale);
        Ok(coords)
    }

    pub fn sample(&self, trial_index: u64) -> Result<CMatrix> {
        self.space.embed(&self.sample_coords(trial_index)?)
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Estimate of `t_k = |n^{−k/2} E‖X‖^k − 1|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialDeficit {
    pub value: f64,
    pub se: f64,
    pub exact: bool,
}

pub fn radial_deficit_t(spec: &EnsembleSpec, k: u32, trials: u64) -> Result<RadialDeficit> {
    if k == 0 {
        return Err(Error::Config("radial deficit needs k ≥ 1".into()));
    }
    match spec.radial() {
        RadialLaw::FixedNorm => Ok(RadialDeficit {
            value: 0.0,
            se: 0.0,
            exact: true,
        }),
        RadialLaw::GaussianCoords => {
            // ‖X‖² = (n/d)·χ²_d, so n^{−k/2}E‖X‖^k = (2/d)^{k/2} Γ((d+k)/2)/Γ(d/2).
            let d = spec.space().dim() as f64;
            let kf = k as f64;
            let ratio = if k % 2 == 0 {
                (0..k / 2).map(|i| (d + 2.0 * i as f64) / d).product::<f64>()
            } else {
                ((kf / 2.0) * (2.0 / d).ln() + ln_gamma((d + kf) / 2.0) - ln_gamma(d / 2.0)).exp()
            };
            Ok(RadialDeficit {
                value: (ratio - 1.0).abs(),
                se: 0.0,
                exact: true,
            })
        }
        RadialLaw::Custom(law) => {
            if trials == 0 {
                return Err(Error::InsufficientTrials("radial deficit needs trials ≥ 1".into()));
            }
            let mut rng = rng::stream(spec.master_seed(), Domain::Auxiliary, u64::from(k));
            let mut acc = Moments::default();
            for _ in 0..trials {
                acc.push(law.draw(&mut rng)?.powi(k as i32));
            }
            let e: Estimate = acc.estimate();
            Ok(RadialDeficit {
                value: (e.mean - 1.0).abs(),
                se: e.se,
                exact: false,
            })
        }
    }
}

/// The first two columns of a Haar orthogonal d×d matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoFrame {
    first: Vec<f64>,
    second: Vec<f64>,
}

impl TwoFrame {
    pub fn from_columns(first: Vec<f64>, second: Vec<f64>) -> Result<Self> {
        if first.len() != second.len() || first.len() < 2 {
            return Err(Error::InvalidDimension("two-frame columns must share a length ≥ 2".into()));
        }
        Ok(Self { first, second })
    }

    pub fn dim(&self) -> usize {
        self.first.len()
    }

    pub fn columns(&self) -> (&[f64], &[f64]) {
        (&self.first, &self.second)
    }

    /// Swapping the columns maps `Q = KCKᵀ` to `−Q` and keeps `KKᵀ`.
    pub fn swapped(&self) -> Self {
        Self {
            first: self.second.clone(),
            second: self.first.clone(),
        }
    }

    /// `KᵀK` as `[[a, b], [b, c]]`.
    pub fn gram(&self) -> [[f64; 2]; 2] {
        let a = dot(&self.first, &self.first);
        let b = dot(&self.first, &self.second);
        let c = dot(&self.second, &self.second);
        [[a, b], [b, c]]
    }

    /// Projections `(u₁·x, u₂·x)`.
    pub fn project(&self, x: &[f64]) -> (f64, f64) {
        (dot(&self.first, x), dot(&self.second, x))
    }

    /// `Q x` with `Q = KCKᵀ`, `C = [[0, 1], [−1, 0]]`.
    pub fn apply_q(&self, x: &[f64]) -> Vec<f64> {
        let (a, b) = self.project(x);
        self.first.iter().zip(&self.second).map(|(u, v)| b * u - a * v).collect()
    }

    pub fn apply_kkt(&self, x: &[f64]) -> Vec<f64> {
        let (a, b) = self.project(x);
        self.first.iter().zip(&self.second).map(|(u, v)| a * u + b * v).collect()
    }

    /// Entry `q_{αβ} = u_{α1}u_{β2} − u_{α2}u_{β1}`.
    pub fn q_entry(&self, alpha: usize, beta: usize) -> f64 {
        self.first[alpha] * self.second[beta] - self.second[alpha] * self.first[beta]
    }

    pub fn kkt_entry(&self, alpha: usize, beta: usize) -> f64 {
        self.first[alpha] * self.first[beta] + self.second[alpha] * self.second[beta]
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Gram–Schmidt on two iid standard Gaussian vectors; numerically dependent
/// draws are rejected and redrawn from the same stream.
pub fn haar_two_frame(d: usize, master_seed: u64, trial_index: u64) -> Result<TwoFrame> {
    if d < 2 {
        return Err(Error::InvalidDimension(format!("two-frame needs d ≥ 2, got {d}")));
    }
    let mut rng = rng::stream(master_seed, Domain::Frame, trial_index);
    Ok(draw_two_frame(d, &mut rng))
}

pub(crate) fn draw_two_frame(d: usize, rng: &mut ChaCha8Rng) -> TwoFrame {
    loop {
        let mut u: Vec<f64> = (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let mut v: Vec<f64> = (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let nu = norm(&u);
        if nu < 1e-8 {
            continue;
        }
        u.iter_mut().for_each(|x| *x /= nu);
        let proj = dot(&u, &v);
        v.iter_mut().zip(&u).for_each(|(x, y)| *x -= proj * y);
        let nv = norm(&v);
        if nv < 1e-8 * (1.0 + proj.abs()) {
            continue;
        }
        v.iter_mut().for_each(|x| *x /= nv);
        return TwoFrame { first: u, second: v };
    }
}
