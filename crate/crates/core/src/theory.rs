//! Leading-order predictions: Catalan numbers, means of `W_p`, and the
//! limiting covariance `Σ = A⁻¹(βB)` solved exactly over the rationals.

use std::fmt::Write as _;

use nalgebra::{DMatrix, SymmetricEigen};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spaces::SpaceKind;
use crate::trace_stats::{centered_indices, PolynomialTestFunction};

pub const MAX_CATALAN_INDEX: u32 = 30;

/// `C_r = binom(2r, r)/(r + 1)`, exact for `r ≤ 30`.
pub fn catalan(r: u32) -> Result<u64> {
    if r > MAX_CATALAN_INDEX {
        return Err(Error::SizeLimit(format!("catalan index {r} > {MAX_CATALAN_INDEX}")));
    }
    // C_{k+1} = C_k · 2(2k+1)/(k+2); the division is exact.
    let mut c: u128 = 1;
    for k in 0..r as u128 {
        c = c * 2 * (2 * k + 1) / (k + 2);
    }
    Ok(c as u64)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CatalanTable {
    values: Vec<u64>,
}

impl CatalanTable {
    pub fn new(max_index: u32) -> Result<Self> {
        Ok(Self {
            values: (0..=max_index).map(catalan).collect::<Result<_>>()?,
        })
    }

    pub fn get(&self, r: usize) -> u64 {
        self.values[r]
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    /// `C_r = Σ_{k<r} C_k C_{r−1−k}` for every stored `r ≥ 1`.
    pub fn satisfies_recurrence(&self) -> bool {
        (1..self.values.len()).all(|r| {
            let conv: u128 = (0..r).map(|k| self.values[k] as u128 * self.values[r - 1 - k] as u128).sum();
            conv == self.values[r] as u128
        })
    }
}

fn cat(r: usize) -> BigRational {
    BigRational::from_integer(BigInt::from(catalan(r as u32).expect("index within table range")))
}

fn int(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

/// Leading-order `E W_p`, `p = 1..m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanPrediction {
    pub kind: SpaceKind,
    pub n: usize,
    pub entries: Vec<f64>,
}

impl MeanPrediction {
    /// `μ_p`, with `μ_0 = n`.
    pub fn mean(&self, p: usize) -> f64 {
        if p == 0 {
            self.n as f64
        } else {
            self.entries[p - 1]
        }
    }
}

pub fn predicted_means(kind: SpaceKind, n: usize, m: usize) -> Result<MeanPrediction> {
    if n < 2 {
        return Err(Error::InvalidDimension(format!("n = {n}, need n ≥ 2")));
    }
    let entries = (1..=m)
        .map(|p| {
            if p % 2 == 1 {
                return Ok(0.0);
            }
            let r = (p / 2) as u32;
            let c = catalan(r)? as f64;
            let sign = if r % 2 == 0 { 1.0 } else { -1.0 };
            Ok(match kind {
                SpaceKind::GeneralComplex => 0.0,
                SpaceKind::GeneralReal => 1.0,
                SpaceKind::HermitianComplex | SpaceKind::SymmetricReal => n as f64 * c,
                SpaceKind::AntisymmetricReal | SpaceKind::AntihermitianComplex => sign * n as f64 * c,
            })
        })
        .collect::<Result<_>>()?;
    Ok(MeanPrediction { kind, n, entries })
}

pub type RationalMatrix = Vec<Vec<BigRational>>;

#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceModel {
    pub kind: SpaceKind,
    pub m: usize,
    pub indices: Vec<usize>,
    pub a: RationalMatrix,
    pub b: RationalMatrix,
    pub beta_factor: BigRational,
    pub sigma: RationalMatrix,
}

/// Default scale applied to the printed B: ½ for complex Hermitian, 1 otherwise.
pub fn default_beta_factor(kind: SpaceKind) -> BigRational {
    match kind {
        SpaceKind::HermitianComplex => BigRational::new(BigInt::from(1), BigInt::from(2)),
        _ => BigRational::one(),
    }
}

pub fn covariance_model(kind: SpaceKind, m: usize, beta_override: Option<BigRational>) -> Result<CovarianceModel> {
    if m < 3 {
        return Err(Error::InvalidDimension(format!("covariance model needs m ≥ 3, got {m}")));
    }
    if kind == SpaceKind::AntisymmetricReal && (m < 4 || m % 2 == 1) {
        return Err(Error::InvalidDimension(format!(
            "real antisymmetric model needs even m ≥ 4, got {m}"
        )));
    }
    let beta_factor = beta_override.unwrap_or_else(|| default_beta_factor(kind));
    let (indices, a, b): (Vec<usize>, RationalMatrix, RationalMatrix) = match kind {
        SpaceKind::GeneralComplex | SpaceKind::GeneralReal => {
            let idx: Vec<usize> = (1..=m).collect();
            let a = idx.iter().map(|&p| idx.iter().map(|&q| if p == q { int(1) } else { int(0) }).collect()).collect();
            let b = idx
                .iter()
                .map(|&p| idx.iter().map(|&q| if p == q { int(p as i64) } else { int(0) }).collect())
                .collect();
            (idx, a, b)
        }
        SpaceKind::HermitianComplex | SpaceKind::SymmetricReal => {
            let idx = centered_indices(kind, m)?;
            let a = idx
                .iter()
                .map(|&p| {
                    idx.iter()
                        .map(|&q| {
                            if q == p {
                                int(p as i64)
                            } else if q + 2 <= p && (p - q) % 2 == 0 {
                                int(-2 * p as i64) * cat((p - 2 - q) / 2)
                            } else {
                                int(0)
                            }
                        })
                        .collect()
                })
                .collect();
            let b = idx
                .iter()
                .map(|&p| {
                    idx.iter()
                        .map(|&q| {
                            let pq = int(2 * (p * q) as i64);
                            match (p % 2, q % 2) {
                                (0, 0) => pq * (cat((p + q - 2) / 2) - cat(p / 2) * cat(q / 2)),
                                (1, 1) => pq * cat((p + q - 2) / 2),
                                _ => int(0),
                            }
                        })
                        .collect()
                })
                .collect();
            (idx, a, b)
        }
        SpaceKind::AntisymmetricReal => {
            let idx = centered_indices(kind, m)?;
            let sign = |e: usize| if e % 2 == 0 { int(1) } else { int(-1) };
            let a = idx
                .iter()
                .map(|&p| {
                    idx.iter()
                        .map(|&q| {
                            if q == p {
                                int(1)
                            } else if q + 2 <= p {
                                sign((p - q) / 2) * int(2) * cat((p - 2 - q) / 2)
                            } else {
                                int(0)
                            }
                        })
                        .collect()
                })
                .collect();
            let b = idx
                .iter()
                .map(|&p| {
                    idx.iter()
                        .map(|&q| sign((p + q) / 2) * int(q as i64) * (cat((p + q - 2) / 2) - cat(p / 2) * cat(q / 2)))
                        .collect()
                })
                .collect();
            (idx, a, b)
        }
        SpaceKind::AntihermitianComplex => {
            return Err(Error::Unsupported {
                kind,
                what: "covariance model (transport from the Hermitian case via X = iH)".into(),
            })
        }
    };
    let scaled: RationalMatrix = b
        .iter()
        .map(|row| row.iter().map(|v| v * &beta_factor).collect())
        .collect();
    let sigma = solve_lower_triangular(&a, &scaled)?;
    Ok(CovarianceModel {
        kind,
        m,
        indices,
        a,
        b,
        beta_factor,
        sigma,
    })
}

/// Solves `A X = R` for lower-triangular `A` by forward substitution.
pub fn solve_lower_triangular(a: &RationalMatrix, rhs: &RationalMatrix) -> Result<RationalMatrix> {
    let k = a.len();
    let cols = rhs.first().map_or(0, Vec::len);
    let mut x: RationalMatrix = Vec::with_capacity(k);
    for i in 0..k {
        if a[i][i].is_zero() {
            return Err(Error::InvalidDimension(format!("singular triangular system at row {i}")));
        }
        if a[i].iter().skip(i + 1).any(|v| !v.is_zero()) {
            return Err(Error::InvalidDimension(format!("matrix is not lower triangular at row {i}")));
        }
        let row: Vec<BigRational> = (0..cols)
            .map(|c| {
                let mut acc = rhs[i][c].clone();
                for (j, xj) in x.iter().enumerate() {
                    acc -= &a[i][j] * &xj[c];
                }
                acc / &a[i][i]
            })
            .collect();
        x.push(row);
    }
    Ok(x)
}

impl CovarianceModel {
    pub fn sigma_f64(&self) -> DMatrix<f64> {
        let k = self.indices.len();
        DMatrix::from_fn(k, k, |i, j| self.sigma[i][j].to_f64().unwrap_or(f64::NAN))
    }

    pub fn sigma_entry(&self, p: usize, q: usize) -> Option<&BigRational> {
        let i = self.indices.iter().position(|&v| v == p)?;
        let j = self.indices.iter().position(|&v| v == q)?;
        Some(&self.sigma[i][j])
    }

    /// Checks `A Σ = βB` exactly.
    pub fn residual_is_zero(&self) -> bool {
        let k = self.indices.len();
        (0..k).all(|i| {
            (0..k).all(|j| {
                let lhs: BigRational = (0..k).map(|l| &self.a[i][l] * &self.sigma[l][j]).sum();
                lhs == &self.b[i][j] * &self.beta_factor
            })
        })
    }

    /// Exact rational text tables for A, B, β and Σ.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# kind {} m {} beta_factor {}", self.kind, self.m, self.beta_factor);
        let header: Vec<String> = self.indices.iter().map(|p| p.to_string()).collect();
        for (name, mat) in [("A", &self.a), ("B", &self.b), ("Sigma", &self.sigma)] {
            let _ = writeln!(out, "[{name}]");
            let _ = writeln!(out, "index\t{}", header.join("\t"));
            for (p, row) in self.indices.iter().zip(mat) {
                let cells: Vec<String> = row.iter().map(rational_text).collect();
                let _ = writeln!(out, "{p}\t{}", cells.join("\t"));
            }
        }
        out
    }
}

/// `"num/den"`, or `"num"` for integers.
pub fn rational_text(v: &BigRational) -> String {
    if v.is_integer() {
        v.numer().to_string()
    } else {
        format!("{}/{}", v.numer(), v.denom())
    }
}

pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let parse = |t: &str| {
        t.trim()
            .parse::<BigInt>()
            .map_err(|e| Error::Config(format!("bad rational {s:?}: {e}")))
    };
    let v = match s.split_once('/') {
        Some((num, den)) => {
            let den = parse(den)?;
            if den.is_zero() {
                return Err(Error::Config(format!("zero denominator in {s:?}")));
            }
            BigRational::new(parse(num)?, den)
        }
        None => BigRational::from_integer(parse(s)?),
    };
    Ok(v)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmaCheck {
    pub symmetric: bool,
    pub min_eigenvalue: f64,
}

/// Exact symmetry test plus the smallest eigenvalue of the symmetric part.
pub fn check_sigma(model: &CovarianceModel) -> SigmaCheck {
    let k = model.indices.len();
    let symmetric = (0..k).all(|i| (0..i).all(|j| model.sigma[i][j] == model.sigma[j][i]));
    let s = model.sigma_f64();
    let sym = (&s + s.transpose()) * 0.5;
    let min_eigenvalue = SymmetricEigen::new(sym).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    SigmaCheck {
        symmetric,
        min_eigenvalue,
    }
}

/// `(1/π)∫_D g′ conj(h′) d²z = Σ_p p a_p conj(b_p)`.
pub fn corollary_covariance(g: &PolynomialTestFunction, h: &PolynomialTestFunction) -> Complex64 {
    let top = g.coeffs().len().max(h.coeffs().len());
    (1..top).map(|p| p as f64 * g.coeff(p) * h.coeff(p).conj()).sum()
}

/// Exact version of [`corollary_covariance`] for integer coefficients.
pub fn corollary_covariance_exact(g: &[i64], h: &[i64]) -> BigRational {
    let top = g.len().max(h.len());
    (1..top)
        .map(|p| int(p as i64) * int(*g.get(p).unwrap_or(&0)) * int(*h.get(p).unwrap_or(&0)))
        .sum()
}

/// Largest absolute entry, for diagnostics.
pub fn max_abs(m: &RationalMatrix) -> BigRational {
    m.iter().flatten().map(|v| v.abs()).max().unwrap_or_else(BigRational::zero)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(num: i64, den: i64) -> BigRational {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn mat(rows: &[&[i64]]) -> RationalMatrix {
        rows.iter().map(|row| row.iter().map(|&v| int(v)).collect()).collect()
    }

    #[test]
    fn catalan_values() {
        assert_eq!(catalan(0).unwrap(), 1);
        assert_eq!(catalan(3).unwrap(), 5);
        assert_eq!(catalan(5).unwrap(), 42);
        let conv: u64 = (0..5).map(|k| catalan(k).unwrap() * catalan(4 - k).unwrap()).sum();
        assert_eq!(conv, 42);
        assert_eq!(catalan(30).unwrap(), 3_814_986_502_092_304);
        assert!(catalan(31).is_err());
        assert!(CatalanTable::new(30).unwrap().satisfies_recurrence());
    }

    #[test]
    fn means() {
        assert_eq!(predicted_means(SpaceKind::HermitianComplex, 10, 4).unwrap().mean(4), 20.0);
        assert_eq!(predicted_means(SpaceKind::GeneralReal, 10, 6).unwrap().mean(6), 1.0);
        assert_eq!(predicted_means(SpaceKind::AntisymmetricReal, 10, 3).unwrap().mean(2), -10.0);
        let g = predicted_means(SpaceKind::GeneralComplex, 10, 6).unwrap();
        assert!(g.entries.iter().all(|&v| v == 0.0));
        for kind in SpaceKind::ALL {
            let mp = predicted_means(kind, 7, 9).unwrap();
            assert!((1..=9).step_by(2).all(|p| mp.mean(p) == 0.0));
        }
    }

    #[test]
    fn hermitian_means_follow_catalan_convolution() {
        let n = 12;
        let mp = predicted_means(SpaceKind::HermitianComplex, n, 16).unwrap();
        for r in 1..=8 {
            let lhs = mp.mean(2 * r) / n as f64;
            let rhs: f64 = (0..r).map(|k| mp.mean(2 * k) / n as f64 * mp.mean(2 * (r - 1 - k)) / n as f64).sum();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn ginibre_sigma_is_diagonal() {
        let m = covariance_model(SpaceKind::GeneralComplex, 5, None).unwrap();
        assert_eq!(m.sigma, mat(&[&[1, 0, 0, 0, 0], &[0, 2, 0, 0, 0], &[0, 0, 3, 0, 0], &[0, 0, 0, 4, 0], &[0, 0, 0, 0, 5]]));
        let c = check_sigma(&covariance_model(SpaceKind::GeneralReal, 6, None).unwrap());
        assert!(c.symmetric);
        assert!((c.min_eigenvalue - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hermitian_m3() {
        let m = covariance_model(SpaceKind::HermitianComplex, 3, None).unwrap();
        assert_eq!(m.indices, vec![1, 3]);
        assert_eq!(m.a, mat(&[&[1, 0], &[-6, 3]]));
        assert_eq!(m.b, mat(&[&[2, 6], &[6, 36]]));
        assert_eq!(m.beta_factor, r(1, 2));
        assert_eq!(m.sigma, mat(&[&[1, 3], &[3, 12]]));
        assert!(m.residual_is_zero());
        let printed = covariance_model(SpaceKind::HermitianComplex, 3, Some(int(1))).unwrap();
        assert_eq!(printed.sigma, mat(&[&[2, 6], &[6, 24]]));
    }

    #[test]
    fn symmetric_m3() {
        let m = covariance_model(SpaceKind::SymmetricReal, 3, None).unwrap();
        assert_eq!(m.sigma, mat(&[&[2, 6], &[6, 24]]));
    }

    #[test]
    fn hermitian_sigma_symmetric_up_to_m8() {
        for m in 3..=8 {
            let model = covariance_model(SpaceKind::HermitianComplex, m, None).unwrap();
            let c = check_sigma(&model);
            assert!(c.symmetric, "m={m}");
            assert!(c.min_eigenvalue >= -1e-10, "m={m}: {}", c.min_eigenvalue);
            assert!(model.residual_is_zero());
            assert_eq!(model.sigma_entry(1, 1), Some(&int(1)));
        }
    }

    #[test]
    fn antisymmetric_and_antihermitian() {
        assert!(covariance_model(SpaceKind::AntisymmetricReal, 5, None).is_err());
        let model = covariance_model(SpaceKind::AntisymmetricReal, 8, None).unwrap();
        assert_eq!(model.indices, vec![4, 6, 8]);
        assert!(model.residual_is_zero());
        assert!(matches!(
            covariance_model(SpaceKind::AntihermitianComplex, 4, None),
            Err(Error::Unsupported { .. })
        ));
    }

    #[test]
    fn corollary_closed_form() {
        for p in 1..=6 {
            for q in 1..=6 {
                let v = corollary_covariance(&PolynomialTestFunction::monomial(p), &PolynomialTestFunction::monomial(q));
                assert_eq!(v, Complex64::new(if p == q { p as f64 } else { 0.0 }, 0.0));
            }
        }
        let c = PolynomialTestFunction::real(&[3.0]);
        assert_eq!(corollary_covariance(&c, &c), Complex64::new(0.0, 0.0));
        let g = PolynomialTestFunction::new(vec![Complex64::new(0.0, 0.0), Complex64::new(0.0, 2.0)]);
        let h = PolynomialTestFunction::new(vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]);
        assert_eq!(corollary_covariance(&g, &h), corollary_covariance(&h, &g).conj());
    }

    #[test]
    fn rational_text_round_trip() {
        for v in [r(3, 4), int(-7), r(-1, 3)] {
            assert_eq!(parse_rational(&rational_text(&v)).unwrap(), v);
        }
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }
}
