//! Dense square complex matrices stored as split real/imaginary planes.
//!
//! The imaginary plane is optional: matrices produced inside the real
//! subspaces carry `im = None`, and products of two such matrices stay real
//! and cost a single real GEMM instead of four.

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    n: usize,
    re: Vec<f64>,
    im: Option<Vec<f64>>,
}

impl CMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            re: vec![0.0; n * n],
            im: None,
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.re[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut re = vec![0.0; n * n];
        let mut im = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let z = f(i, j);
                re[i * n + j] = z.re;
                im[i * n + j] = z.im;
            }
        }
        Self { n, re, im: Some(im) }.compact()
    }

    pub fn from_real_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut re = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                re[i * n + j] = f(i, j);
            }
        }
        Self { n, re, im: None }
    }

    /// Row-major planes; `im` may be omitted for a real matrix.
    pub fn from_parts(n: usize, re: Vec<f64>, im: Option<Vec<f64>>) -> Result<Self> {
        if re.len() != n * n {
            return Err(Error::ShapeMismatch {
                expected: n * n,
                actual: re.len(),
            });
        }
        if let Some(im) = &im {
            if im.len() != n * n {
                return Err(Error::ShapeMismatch {
                    expected: n * n,
                    actual: im.len(),
                });
            }
        }
        Ok(Self { n, re, im })
    }

    /// Drops an imaginary plane that is identically zero.
    fn compact(mut self) -> Self {
        if let Some(im) = &self.im {
            if im.iter().all(|&v| v == 0.0) {
                self.im = None;
            }
        }
        self
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    /// True when the imaginary plane is absent (structurally real).
    #[inline]
    pub fn is_structurally_real(&self) -> bool {
        self.im.is_none()
    }

    pub fn max_abs_imag(&self) -> f64 {
        self.im
            .as_ref()
            .map_or(0.0, |im| im.iter().fold(0.0f64, |m, v| m.max(v.abs())))
    }

    pub fn re_plane(&self) -> &[f64] {
        &self.re
    }

    pub fn im_plane(&self) -> Option<&[f64]> {
        self.im.as_deref()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        let k = i * self.n + j;
        Complex64::new(self.re[k], self.im.as_ref().map_or(0.0, |im| im[k]))
    }

    fn im_mut(&mut self) -> &mut Vec<f64> {
        let len = self.n * self.n;
        self.im.get_or_insert_with(|| vec![0.0; len])
    }

    #[inline]
    pub fn add_at(&mut self, i: usize, j: usize, z: Complex64) {
        let k = i * self.n + j;
        self.re[k] += z.re;
        if z.im != 0.0 {
            self.im_mut()[k] += z.im;
        }
    }

    pub fn set(&mut self, i: usize, j: usize, z: Complex64) {
        let k = i * self.n + j;
        self.re[k] = z.re;
        if z.im != 0.0 || self.im.is_some() {
            self.im_mut()[k] = z.im;
        }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        if c.im == 0.0 {
            return Self {
                n: self.n,
                re: self.re.iter().map(|v| v * c.re).collect(),
                im: self.im.as_ref().map(|im| im.iter().map(|v| v * c.re).collect()),
            };
        }
        let n2 = self.n * self.n;
        let mut re = vec![0.0; n2];
        let mut im = vec![0.0; n2];
        for k in 0..n2 {
            let z = Complex64::new(self.re[k], self.im.as_ref().map_or(0.0, |p| p[k])) * c;
            re[k] = z.re;
            im[k] = z.im;
        }
        Self { n: self.n, re, im: Some(im) }.compact()
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a - b)
    }

    fn zip(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(self.n, other.n, "matrix sizes differ");
        let re = self.re.iter().zip(&other.re).map(|(a, b)| f(*a, *b)).collect();
        let im = match (&self.im, &other.im) {
            (None, None) => None,
            (a, b) => {
                let n2 = self.n * self.n;
                Some(
                    (0..n2)
                        .map(|k| f(a.as_ref().map_or(0.0, |p| p[k]), b.as_ref().map_or(0.0, |p| p[k])))
                        .collect(),
                )
            }
        };
        Self { n: self.n, re, im }
    }

    pub fn transpose(&self) -> Self {
        let n = self.n;
        let t = |p: &[f64]| {
            let mut out = vec![0.0; n * n];
            for i in 0..n {
                for j in 0..n {
                    out[j * n + i] = p[i * n + j];
                }
            }
            out
        };
        Self {
            n,
            re: t(&self.re),
            im: self.im.as_deref().map(t),
        }
    }

    pub fn adjoint(&self) -> Self {
        let mut t = self.transpose();
        if let Some(im) = &mut t.im {
            im.iter_mut().for_each(|v| *v = -*v);
        }
        t
    }

    pub fn trace(&self) -> Complex64 {
        let n = self.n;
        let re = (0..n).map(|i| self.re[i * n + i]).sum();
        let im = self.im.as_ref().map_or(0.0, |p| (0..n).map(|i| p[i * n + i]).sum());
        Complex64::new(re, im)
    }

    /// `Σ_{jk} |m_jk|²`.
    pub fn hs_norm_sq(&self) -> f64 {
        let r: f64 = self.re.iter().map(|v| v * v).sum();
        r + self.im.as_ref().map_or(0.0, |p| p.iter().map(|v| v * v).sum())
    }

    pub fn hs_norm(&self) -> f64 {
        self.hs_norm_sq().sqrt()
    }

    /// `tr(self · other)` in O(n²) without forming the product.
    pub fn trace_of_product(&self, other: &Self) -> Complex64 {
        let n = self.n;
        assert_eq!(n, other.n, "matrix sizes differ");
        let (mut re, mut im) = (0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                let a = i * n + j;
                let b = j * n + i;
                let (ar, ai) = (self.re[a], self.im.as_ref().map_or(0.0, |p| p[a]));
                let (br, bi) = (other.re[b], other.im.as_ref().map_or(0.0, |p| p[b]));
                re += ar * br - ai * bi;
                im += ar * bi + ai * br;
            }
        }
        Complex64::new(re, im)
    }

    pub fn matmul(&self, other: &Self) -> Self {
        let n = self.n;
        assert_eq!(n, other.n, "matrix sizes differ");
        let mut re = vec![0.0; n * n];
        gemm(n, 1.0, &self.re, &other.re, 0.0, &mut re);
        let im = match (&self.im, &other.im) {
            (None, None) => None,
            (Some(ai), None) => {
                let mut im = vec![0.0; n * n];
                gemm(n, 1.0, ai, &other.re, 0.0, &mut im);
                Some(im)
            }
            (None, Some(bi)) => {
                let mut im = vec![0.0; n * n];
                gemm(n, 1.0, &self.re, bi, 0.0, &mut im);
                Some(im)
            }
            (Some(ai), Some(bi)) => {
                gemm(n, -1.0, ai, bi, 1.0, &mut re);
                let mut im = vec![0.0; n * n];
                gemm(n, 1.0, &self.re, bi, 0.0, &mut im);
                gemm(n, 1.0, ai, &other.re, 1.0, &mut im);
                Some(im)
            }
        };
        Self { n, re, im }
    }

    pub fn is_finite(&self) -> bool {
        self.re.iter().all(|v| v.is_finite())
            && self.im.as_ref().map_or(true, |p| p.iter().all(|v| v.is_finite()))
    }
}

/// `c ← alpha·a·b + beta·c` for row-major n×n planes.
fn gemm(n: usize, alpha: f64, a: &[f64], b: &[f64], beta: f64, c: &mut [f64]) {
    // Below this size the packing overhead of the blocked kernel dominates.
    if n <= 8 {
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0.0;
                for k in 0..n {
                    acc += a[i * n + k] * b[k * n + j];
                }
                let prev = if beta == 0.0 { 0.0 } else { beta * c[i * n + j] };
                c[i * n + j] = prev + alpha * acc;
            }
        }
        return;
    }
    let s = n as isize;
    // SAFETY: all three slices hold exactly n*n elements laid out row-major
    // with row stride n and column stride 1, and `c` does not alias `a`/`b`.
    unsafe {
        matrixmultiply::dgemm(
            n,
            n,
            n,
            alpha,
            a.as_ptr(),
            s,
            1,
            b.as_ptr(),
            s,
            1,
            beta,
            c.as_mut_ptr(),
            s,
            1,
        );
    }
}

/// Real part of `tr(A B*)`, the real Hilbert–Schmidt inner product.
pub fn inner_product(a: &CMatrix, b: &CMatrix) -> Result<f64> {
    if a.n != b.n {
        return Err(Error::ShapeMismatch {
            expected: a.n,
            actual: b.n,
        });
    }
    let mut s: f64 = a.re.iter().zip(&b.re).map(|(x, y)| x * y).sum();
    if let (Some(ai), Some(bi)) = (&a.im, &b.im) {
        s += ai.iter().zip(bi).map(|(x, y)| x * y).sum::<f64>();
    }
    Ok(s)
}

pub fn hs_norm(a: &CMatrix) -> f64 {
    a.hs_norm()
}
