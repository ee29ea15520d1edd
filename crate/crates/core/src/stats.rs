//! Fixed-order reductions and small estimators used by every experiment.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

const PAIRWISE_LEAF: usize = 32;

/// Pairwise (tree) summation with a fixed split rule.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= PAIRWISE_LEAF {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

pub fn pairwise_sum_complex(xs: &[Complex64]) -> Complex64 {
    if xs.len() <= PAIRWISE_LEAF {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum_complex(&xs[..mid]) + pairwise_sum_complex(&xs[mid..])
}

/// Sample mean with standard error `sqrt(s²/N)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub se: f64,
}

impl Estimate {
    pub fn of(xs: &[f64]) -> Self {
        let n = xs.len() as f64;
        let mean = pairwise_sum(xs) / n;
        let dev: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
        let var = if xs.len() > 1 { pairwise_sum(&dev) / (n - 1.0) } else { f64::NAN };
        Self {
            mean,
            se: (var / n).sqrt(),
        }
    }

    /// `|mean − target| ≤ k·se + slack`, with a round-off floor for exact cases.
    pub fn within(&self, target: f64, k: f64, slack: f64) -> bool {
        let floor = 1e-9 * (1.0 + target.abs());
        (self.mean - target).abs() <= k * self.se + slack + floor
    }

    pub fn zscore(&self, target: f64) -> f64 {
        zscore(self.mean, target, self.se)
    }
}

pub fn zscore(estimate: f64, theory: f64, se: f64) -> f64 {
    let d = estimate - theory;
    if se > 0.0 {
        d / se
    } else if d.abs() <= 1e-12 * (1.0 + theory.abs()) {
        0.0
    } else {
        f64::INFINITY.copysign(d)
    }
}

/// Complex sample mean; `se = sqrt(E|x − x̄|² / N)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexEstimate {
    pub mean: Complex64,
    pub se: f64,
}

impl ComplexEstimate {
    pub fn of(xs: &[Complex64]) -> Self {
        let n = xs.len() as f64;
        let mean = pairwise_sum_complex(xs) / n;
        let dev: Vec<f64> = xs.iter().map(|x| (x - mean).norm_sqr()).collect();
        let var = if xs.len() > 1 { pairwise_sum(&dev) / (n - 1.0) } else { f64::NAN };
        Self {
            mean,
            se: (var / n).sqrt(),
        }
    }

    pub fn within(&self, target: Complex64, k: f64, slack: f64) -> bool {
        let floor = 1e-9 * (1.0 + target.norm());
        (self.mean - target).norm() <= k * self.se + slack + floor
    }
}

/// Mergeable running moments (Chan et al. update) for streaming reductions.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    pub count: u64,
    pub mean: f64,
    pub m2: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&self, other: &Self) -> Self {
        if self.count == 0 {
            return *other;
        }
        if other.count == 0 {
            return *self;
        }
        let count = self.count + other.count;
        let delta = other.mean - self.mean;
        let (na, nb, n) = (self.count as f64, other.count as f64, count as f64);
        Self {
            count,
            mean: self.mean + delta * nb / n,
            m2: self.m2 + other.m2 + delta * delta * na * nb / n,
        }
    }

    pub fn estimate(&self) -> Estimate {
        let n = self.count as f64;
        let var = if self.count > 1 { self.m2 / (n - 1.0) } else { f64::NAN };
        Estimate {
            mean: self.mean,
            se: (var / n).sqrt(),
        }
    }

    pub fn variance(&self) -> f64 {
        self.m2 / (self.count as f64 - 1.0)
    }
}

/// Running moments of a complex quantity, real and imaginary parts kept apart.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ComplexMoments {
    pub re: Moments,
    pub im: Moments,
}

impl ComplexMoments {
    pub fn push(&mut self, z: Complex64) {
        self.re.push(z.re);
        self.im.push(z.im);
    }

    pub fn merge(&self, other: &Self) -> Self {
        Self {
            re: self.re.merge(&other.re),
            im: self.im.merge(&other.im),
        }
    }

    pub fn estimate(&self) -> ComplexEstimate {
        let n = self.re.count as f64;
        let var = if self.re.count > 1 { (self.re.m2 + self.im.m2) / (n - 1.0) } else { f64::NAN };
        ComplexEstimate {
            mean: Complex64::new(self.re.mean, self.im.mean),
            se: (var / n).sqrt(),
        }
    }
}

/// Merges a list of partial results pairwise in index order.
pub fn tree_merge<T: Clone>(items: &[T], merge: &impl Fn(&T, &T) -> T) -> Option<T> {
    match items.len() {
        0 => None,
        1 => Some(items[0].clone()),
        len => {
            let mid = len / 2;
            let a = tree_merge(&items[..mid], merge)?;
            let b = tree_merge(&items[mid..], merge)?;
            Some(merge(&a, &b))
        }
    }
}

/// Sample covariance `E[(x − x̄)(y − ȳ)]` with a delta-method standard error.
pub fn covariance(xs: &[f64], ys: &[f64]) -> Estimate {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let mx = pairwise_sum(xs) / n;
    let my = pairwise_sum(ys) / n;
    let prods: Vec<f64> = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).collect();
    let est = Estimate::of(&prods);
    Estimate {
        mean: est.mean * n / (n - 1.0),
        se: est.se,
    }
}

/// `E[(x − x̄) conj(y − ȳ)]` for complex samples.
pub fn complex_covariance(xs: &[Complex64], ys: &[Complex64], conjugate: bool) -> ComplexEstimate {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let mx = pairwise_sum_complex(xs) / n;
    let my = pairwise_sum_complex(ys) / n;
    let prods: Vec<Complex64> = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let dy = y - my;
            (x - mx) * if conjugate { dy.conj() } else { dy }
        })
        .collect();
    let est = ComplexEstimate::of(&prods);
    ComplexEstimate {
        mean: est.mean * (n / (n - 1.0)),
        se: est.se,
    }
}

/// Ordinary least squares `y = a + b x`; returns `(b, se_b, a)`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let b = sxy / sxx;
    let a = my - b * mx;
    let rss: f64 = xs.iter().zip(ys).map(|(x, y)| (y - a - b * x).powi(2)).sum();
    let se = if xs.len() > 2 { (rss / (n - 2.0) / sxx).sqrt() } else { f64::NAN };
    (b, se, a)
}
