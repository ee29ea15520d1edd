//! The six real-linear matrix subspaces, their canonical orthonormal bases,
//! coordinate maps and the basis-conjugation channel `A ↦ Σ_α B_α A B_α`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::CMatrix;

const INV_SQRT2: f64 = std::f64::consts::FRAC_1_SQRT_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SpaceKind {
    #[serde(rename = "gl_c")]
    GeneralComplex,
    #[serde(rename = "gl_r")]
    GeneralReal,
    #[serde(rename = "sym_r")]
    SymmetricReal,
    #[serde(rename = "herm_c")]
    HermitianComplex,
    #[serde(rename = "asym_r")]
    AntisymmetricReal,
    #[serde(rename = "antiherm_c")]
    AntihermitianComplex,
}

impl SpaceKind {
    pub const ALL: [SpaceKind; 6] = [
        SpaceKind::GeneralComplex,
        SpaceKind::GeneralReal,
        SpaceKind::SymmetricReal,
        SpaceKind::HermitianComplex,
        SpaceKind::AntisymmetricReal,
        SpaceKind::AntihermitianComplex,
    ];

    /// Real dimension of the subspace of n×n matrices.
    pub fn dimension(self, n: usize) -> usize {
        match self {
            SpaceKind::GeneralComplex => 2 * n * n,
            SpaceKind::GeneralReal => n * n,
            SpaceKind::SymmetricReal => n * (n + 1) / 2,
            SpaceKind::HermitianComplex => n * n,
            SpaceKind::AntisymmetricReal => n * (n - 1) / 2,
            SpaceKind::AntihermitianComplex => n * n,
        }
    }

    /// Whether every element of the space has real entries.
    pub fn is_real(self) -> bool {
        matches!(
            self,
            SpaceKind::GeneralReal | SpaceKind::SymmetricReal | SpaceKind::AntisymmetricReal
        )
    }

    pub fn tag(self) -> &'static str {
        match self {
            SpaceKind::GeneralComplex => "gl_c",
            SpaceKind::GeneralReal => "gl_r",
            SpaceKind::SymmetricReal => "sym_r",
            SpaceKind::HermitianComplex => "herm_c",
            SpaceKind::AntisymmetricReal => "asym_r",
            SpaceKind::AntihermitianComplex => "antiherm_c",
        }
    }
}

impl fmt::Display for SpaceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for SpaceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SpaceKind::ALL
            .into_iter()
            .find(|k| k.tag() == s)
            .ok_or_else(|| Error::Schema(format!("unknown space tag {s:?}")))
    }
}

/// Shape of a basis element. `F_jk = (E_jk + E_kj)/√2`, `G_jk = (E_jk − E_kj)/√2`,
/// and the `I*` variants are multiplied by the imaginary unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BasisForm {
    E,
    IE,
    F,
    G,
    IF,
    IG,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BasisElement {
    pub form: BasisForm,
    pub j: usize,
    pub k: usize,
}

/// Up to two nonzero entries `(row, col, value)`.
#[derive(Debug, Clone, Copy)]
pub struct Entries {
    items: [(usize, usize, Complex64); 2],
    len: usize,
}

impl Entries {
    fn one(j: usize, k: usize, v: Complex64) -> Self {
        Self {
            items: [(j, k, v), (0, 0, Complex64::new(0.0, 0.0))],
            len: 1,
        }
    }

    fn two(a: (usize, usize, Complex64), b: (usize, usize, Complex64)) -> Self {
        Self { items: [a, b], len: 2 }
    }

    pub fn as_slice(&self) -> &[(usize, usize, Complex64)] {
        &self.items[..self.len]
    }
}

/// An entry written as `(re_sign + i·im_sign) · scale`, with both signs in
/// {−1, 0, 1}; used by the exact-rational moment oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExactEntry {
    pub row: usize,
    pub col: usize,
    pub re_sign: i8,
    pub im_sign: i8,
}

impl BasisElement {
    pub fn entries(&self) -> Entries {
        let (j, k) = (self.j, self.k);
        let s = INV_SQRT2;
        match self.form {
            BasisForm::E => Entries::one(j, k, Complex64::new(1.0, 0.0)),
            BasisForm::IE => Entries::one(j, k, Complex64::new(0.0, 1.0)),
            BasisForm::F => Entries::two((j, k, Complex64::new(s, 0.0)), (k, j, Complex64::new(s, 0.0))),
            BasisForm::G => Entries::two((j, k, Complex64::new(s, 0.0)), (k, j, Complex64::new(-s, 0.0))),
            BasisForm::IF => Entries::two((j, k, Complex64::new(0.0, s)), (k, j, Complex64::new(0.0, s))),
            BasisForm::IG => Entries::two((j, k, Complex64::new(0.0, s)), (k, j, Complex64::new(0.0, -s))),
        }
    }

    /// True for the two-entry forms, whose entries have modulus 1/√2.
    pub fn is_split(&self) -> bool {
        !matches!(self.form, BasisForm::E | BasisForm::IE)
    }

    pub fn exact_entries(&self) -> Vec<ExactEntry> {
        let (j, k) = (self.j, self.k);
        let e = |row, col, re_sign, im_sign| ExactEntry {
            row,
            col,
            re_sign,
            im_sign,
        };
        match self.form {
            BasisForm::E => vec![e(j, k, 1, 0)],
            BasisForm::IE => vec![e(j, k, 0, 1)],
            BasisForm::F => vec![e(j, k, 1, 0), e(k, j, 1, 0)],
            BasisForm::G => vec![e(j, k, 1, 0), e(k, j, -1, 0)],
            BasisForm::IF => vec![e(j, k, 0, 1), e(k, j, 0, 1)],
            BasisForm::IG => vec![e(j, k, 0, 1), e(k, j, 0, -1)],
        }
    }

    pub fn to_matrix(&self, n: usize) -> CMatrix {
        let mut m = CMatrix::zeros(n);
        for &(r, c, v) in self.entries().as_slice() {
            m.add_at(r, c, v);
        }
        m
    }

    pub fn label(&self) -> String {
        let name = match self.form {
            BasisForm::E => "E",
            BasisForm::IE => "iE",
            BasisForm::F => "F",
            BasisForm::G => "G",
            BasisForm::IF => "iF",
            BasisForm::IG => "iG",
        };
        format!("{name}{}{}", self.j + 1, self.k + 1)
    }
}

#[derive(Debug, Clone)]
pub struct MatrixSpace {
    kind: SpaceKind,
    n: usize,
    basis: Vec<BasisElement>,
    membership_tol: f64,
}

fn diagonal(form: BasisForm, n: usize) -> impl Iterator<Item = BasisElement> {
    (0..n).map(move |j| BasisElement { form, j, k: j })
}

fn off_diagonal(form: BasisForm, n: usize) -> impl Iterator<Item = BasisElement> {
    (0..n).flat_map(move |j| (0..n).filter(move |&k| k != j).map(move |k| BasisElement { form, j, k }))
}

fn upper(form: BasisForm, n: usize) -> impl Iterator<Item = BasisElement> {
    (0..n).flat_map(move |j| (j + 1..n).map(move |k| BasisElement { form, j, k }))
}

impl MatrixSpace {
    pub const DEFAULT_MEMBERSHIP_TOL: f64 = 1e-9;

    pub fn new(kind: SpaceKind, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidDimension(format!("matrix side n = {n}, need n ≥ 2")));
        }
        use BasisForm::*;
        let basis: Vec<BasisElement> = match kind {
            SpaceKind::GeneralComplex => diagonal(E, n)
                .chain(off_diagonal(E, n))
                .chain(diagonal(IE, n))
                .chain(off_diagonal(IE, n))
                .collect(),
            SpaceKind::GeneralReal => diagonal(E, n).chain(off_diagonal(E, n)).collect(),
            SpaceKind::SymmetricReal => diagonal(E, n).chain(upper(F, n)).collect(),
            SpaceKind::HermitianComplex => diagonal(E, n).chain(upper(F, n)).chain(upper(IG, n)).collect(),
            SpaceKind::AntisymmetricReal => upper(G, n).collect(),
            SpaceKind::AntihermitianComplex => diagonal(IE, n).chain(upper(G, n)).chain(upper(IF, n)).collect(),
        };
        debug_assert_eq!(basis.len(), kind.dimension(n));
        Ok(Self {
            kind,
            n,
            basis,
            membership_tol: Self::DEFAULT_MEMBERSHIP_TOL,
        })
    }

    pub fn with_membership_tol(mut self, tol: f64) -> Self {
        self.membership_tol = tol;
        self
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[BasisElement] {
        &self.basis
    }

    pub fn embed(&self, coords: &[f64]) -> Result<CMatrix> {
        if coords.len() != self.dim() {
            return Err(Error::ShapeMismatch {
                expected: self.dim(),
                actual: coords.len(),
            });
        }
        let n = self.n;
        let mut re = vec![0.0; n * n];
        let mut im = (!self.kind.is_real()).then(|| vec![0.0; n * n]);
        for (b, &c) in self.basis.iter().zip(coords) {
            for &(r, col, v) in b.entries().as_slice() {
                let idx = r * n + col;
                re[idx] += c * v.re;
                if let Some(im) = im.as_mut() {
                    im[idx] += c * v.im;
                }
            }
        }
        CMatrix::from_parts(n, re, im)
    }

    /// Coordinates `Re tr(M B_α*)`; fails when `M` has a component orthogonal to the space.
    pub fn extract(&self, m: &CMatrix) -> Result<Vec<f64>> {
        if m.dim() != self.n {
            return Err(Error::ShapeMismatch {
                expected: self.n,
                actual: m.dim(),
            });
        }
        let coords: Vec<f64> = self
            .basis
            .iter()
            .map(|b| b.entries().as_slice().iter().map(|&(r, c, v)| (m.get(r, c) * v.conj()).re).sum())
            .collect();
        // Residual measured directly as ‖M − P M‖; the Pythagorean difference
        // of squared norms loses half the digits.
        let residual = m.sub(&self.embed(&coords)?).hs_norm();
        let tolerance = self.membership_tol * m.hs_norm();
        if residual > tolerance {
            return Err(Error::NotInSubspace {
                kind: self.kind,
                residual,
                tolerance,
            });
        }
        Ok(coords)
    }

    /// `Σ_α B_α A B_α`, always by direct summation over the basis.
    pub fn channel_sum(&self, a: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.n);
        for b in &self.basis {
            let e = b.entries();
            for &(i, k, b1) in e.as_slice() {
                for &(l, j, b2) in e.as_slice() {
                    let v = b1 * a.get(k, l) * b2;
                    if v.re != 0.0 || v.im != 0.0 {
                        out.add_at(i, j, v);
                    }
                }
            }
        }
        out
    }

    /// `tr(M B_α)` for every basis element, in basis order.
    pub fn basis_traces(&self, m: &CMatrix) -> Vec<Complex64> {
        self.basis
            .iter()
            .map(|b| b.entries().as_slice().iter().map(|&(r, c, v)| m.get(c, r) * v).sum())
            .collect()
    }
}
