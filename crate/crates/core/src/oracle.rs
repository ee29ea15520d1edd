//! Exact sphere moments and brute-force expectations of trace words.
//!
//! Everything here is big-integer rational arithmetic. A matrix entry is a
//! linear form in the sphere coordinates whose coefficients are
//! `i^k · s_α` with `s_α ∈ {1, 1/√2}`; in a monomial with only even
//! exponents the `s_α` combine into powers of ½, so no irrational number is
//! ever formed.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spaces::{MatrixSpace, SpaceKind};

pub const DEFAULT_DEGREE_LIMIT: u32 = 12;
pub const MAX_ORACLE_N: usize = 4;
pub const MAX_ORACLE_LETTERS: usize = 6;
pub const MAX_WORD_LEN: usize = 8;

fn int(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

fn double_factorial_odd(k: u32) -> BigInt {
    // (2k − 1)!!
    (1..=k).fold(BigInt::one(), |acc, j| acc * BigInt::from(2 * j - 1))
}

/// Exponents `e_1..e_d` of the raw coordinates `u_i` (not of `u_i²`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MonomialExponents(pub Vec<u32>);

impl MonomialExponents {
    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }
}

/// `E ∏ u_i^{e_i}` for `u` uniform on the unit sphere of `R^d`:
/// `∏(2k_i − 1)!! / ∏_{j<K}(d + 2j)` with `e_i = 2k_i`, `K = Σ k_i`, and 0
/// if any exponent is odd.
pub fn sphere_monomial_moment(d: usize, exps: &MonomialExponents) -> Result<BigRational> {
    sphere_monomial_moment_with_limit(d, exps, DEFAULT_DEGREE_LIMIT)
}

pub fn sphere_monomial_moment_with_limit(d: usize, exps: &MonomialExponents, limit: u32) -> Result<BigRational> {
    if d < 2 {
        return Err(Error::InvalidDimension(format!("sphere dimension {d} < 2")));
    }
    if exps.0.len() > d {
        return Err(Error::ShapeMismatch {
            expected: d,
            actual: exps.0.len(),
        });
    }
    let big_k: u32 = exps.0.iter().map(|e| e / 2).sum();
    if big_k > limit {
        return Err(Error::SizeLimit(format!("monomial degree 2·{big_k} exceeds limit 2·{limit}")));
    }
    if exps.0.iter().any(|e| e % 2 == 1) {
        return Ok(BigRational::zero());
    }
    Ok(moment_from_halves(d, exps.0.iter().map(|e| e / 2)))
}

fn moment_from_halves(d: usize, halves: impl Iterator<Item = u32>) -> BigRational {
    let mut num = BigInt::one();
    let mut big_k = 0;
    for k in halves {
        num *= double_factorial_odd(k);
        big_k += k;
    }
    let den = (0..big_k).fold(BigInt::one(), |acc, j| acc * BigInt::from(d as u64 + 2 * j as u64));
    BigRational::new(num, den)
}

/// A Gaussian rational `re + i·im`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ExactComplex {
    pub re: BigRational,
    pub im: BigRational,
}

impl ExactComplex {
    pub fn real(re: BigRational) -> Self {
        Self {
            re,
            im: BigRational::zero(),
        }
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    /// The real part, failing if the imaginary part is nonzero.
    pub fn as_real(&self) -> Result<BigRational> {
        if self.is_real() {
            Ok(self.re.clone())
        } else {
            Err(Error::Unsupported {
                kind: SpaceKind::GeneralComplex,
                what: format!("complex oracle value {self} read as real"),
            })
        }
    }

    pub fn to_f64_pair(&self) -> (f64, f64) {
        use num_traits::ToPrimitive;
        (self.re.to_f64().unwrap_or(f64::NAN), self.im.to_f64().unwrap_or(f64::NAN))
    }
}

impl fmt::Display for ExactComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let t = crate::theory::rational_text;
        if self.is_real() {
            write!(f, "{}", t(&self.re))
        } else {
            write!(f, "{} + i*{}", t(&self.re), t(&self.im))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Letter {
    X,
    XStar,
}

/// A word over `{X, X*}`, e.g. `X^2 X*^2`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TraceWord(Vec<Letter>);

impl TraceWord {
    pub fn new(letters: Vec<Letter>) -> Result<Self> {
        if letters.is_empty() || letters.len() > MAX_WORD_LEN {
            return Err(Error::SizeLimit(format!(
                "trace word length {} outside 1..={MAX_WORD_LEN}",
                letters.len()
            )));
        }
        Ok(Self(letters))
    }

    /// `X^p (X*)^q`.
    pub fn power_pair(p: usize, q: usize) -> Result<Self> {
        Self::new(std::iter::repeat_n(Letter::X, p).chain(std::iter::repeat_n(Letter::XStar, q)).collect())
    }

    pub fn power(p: usize) -> Result<Self> {
        Self::power_pair(p, 0)
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for TraceWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut i = 0;
        while i < self.0.len() {
            let l = self.0[i];
            let run = self.0[i..].iter().take_while(|&&x| x == l).count();
            let sym = if l == Letter::X { "X" } else { "X*" };
            if run == 1 {
                write!(f, "{sym}")?;
            } else {
                write!(f, "{sym}^{run}")?;
            }
            i += run;
        }
        Ok(())
    }
}

impl FromStr for TraceWord {
    type Err = Error;

    /// Accepts tokens `X`, `X*`, each optionally followed by `^k`.
    fn from_str(s: &str) -> Result<Self> {
        let chars: Vec<char> = s.chars().filter(|c| !c.is_whitespace()).collect();
        let mut letters = Vec::new();
        let mut i = 0;
        let bad = || Error::Config(format!("cannot parse trace word {s:?}"));
        while i < chars.len() {
            if chars[i] != 'X' {
                return Err(bad());
            }
            i += 1;
            let letter = if chars.get(i) == Some(&'*') {
                i += 1;
                Letter::XStar
            } else {
                Letter::X
            };
            let mut reps = 1;
            if chars.get(i) == Some(&'^') {
                i += 1;
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                reps = chars[start..i].iter().collect::<String>().parse::<usize>().map_err(|_| bad())?;
            }
            letters.extend(std::iter::repeat_n(letter, reps));
        }
        Self::new(letters)
    }
}

/// Entry `(i, j)` of X as a list of `(coordinate, i^k)` terms; the scale
/// `s_α` is implied by the coordinate.
struct EntryForms {
    n: usize,
    terms: Vec<Vec<(usize, u8)>>,
    split: Vec<bool>,
    d: usize,
}

impl EntryForms {
    fn new(space: &MatrixSpace) -> Self {
        let n = space.n();
        let mut terms = vec![Vec::new(); n * n];
        let mut split = Vec::with_capacity(space.dim());
        for (alpha, b) in space.basis().iter().enumerate() {
            split.push(b.is_split());
            for e in b.exact_entries() {
                let k = match (e.re_sign, e.im_sign) {
                    (1, 0) => 0,
                    (0, 1) => 1,
                    (-1, 0) => 2,
                    (0, -1) => 3,
                    _ => unreachable!("basis entries are units times a scale"),
                };
                terms[e.row * n + e.col].push((alpha, k));
            }
        }
        Self {
            n,
            terms,
            split,
            d: space.dim(),
        }
    }
}

/// Exact `E ∏_w tr(w(X))` for X uniform on the radius-√n sphere of V.
pub fn exact_product_moment(kind: SpaceKind, n: usize, words: &[TraceWord]) -> Result<ExactComplex> {
    if n > MAX_ORACLE_N {
        return Err(Error::SizeLimit(format!("oracle needs n ≤ {MAX_ORACLE_N}, got {n}")));
    }
    let total: usize = words.iter().map(TraceWord::len).sum();
    if total > MAX_ORACLE_LETTERS {
        return Err(Error::SizeLimit(format!(
            "oracle handles at most {MAX_ORACLE_LETTERS} letters in total, got {total}"
        )));
    }
    let space = MatrixSpace::new(kind, n)?;
    let forms = EntryForms::new(&space);
    if total % 2 == 1 {
        return Ok(ExactComplex::default());
    }

    // Positions of all letters, each with its word-local successor.
    let mut letters = Vec::with_capacity(total);
    let mut next = Vec::with_capacity(total);
    for w in words {
        let base = letters.len();
        for (t, &l) in w.letters().iter().enumerate() {
            letters.push(l);
            next.push(base + (t + 1) % w.len());
        }
    }

    // (sorted halves, number of ½ factors, unit power) → multiplicity.
    let mut buckets: HashMap<(Vec<u32>, u32, u8), i64> = HashMap::new();
    let mut idx = vec![0usize; total];
    let mut counts = vec![0u32; forms.d];
    loop {
        let factors: Vec<&[(usize, u8)]> = (0..total)
            .map(|t| {
                let (i, j) = (idx[t], idx[next[t]]);
                match letters[t] {
                    Letter::X => forms.terms[i * forms.n + j].as_slice(),
                    Letter::XStar => forms.terms[j * forms.n + i].as_slice(),
                }
            })
            .collect();
        if factors.iter().all(|f| !f.is_empty()) {
            expand(&factors, &letters, 0, 0, &mut counts, &forms, &mut buckets);
        }
        // Odometer over index tuples.
        let mut pos = 0;
        loop {
            if pos == total {
                return Ok(finish(buckets, forms.d, n, total));
            }
            idx[pos] += 1;
            if idx[pos] < n {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

fn expand(
    factors: &[&[(usize, u8)]],
    letters: &[Letter],
    t: usize,
    unit: u8,
    counts: &mut [u32],
    forms: &EntryForms,
    buckets: &mut HashMap<(Vec<u32>, u32, u8), i64>,
) {
    if t == factors.len() {
        if counts.iter().any(|c| c % 2 == 1) {
            return;
        }
        let mut halves: Vec<u32> = counts.iter().filter(|&&c| c > 0).map(|c| c / 2).collect();
        halves.sort_unstable();
        let half_powers: u32 = counts
            .iter()
            .zip(&forms.split)
            .filter(|(_, &s)| s)
            .map(|(c, _)| c / 2)
            .sum();
        *buckets.entry((halves, half_powers, unit)).or_insert(0) += 1;
        return;
    }
    for &(alpha, k) in factors[t] {
        let k = if letters[t] == Letter::XStar { (4 - k) % 4 } else { k };
        counts[alpha] += 1;
        expand(factors, letters, t + 1, (unit + k) % 4, counts, forms, buckets);
        counts[alpha] -= 1;
    }
}

fn finish(buckets: HashMap<(Vec<u32>, u32, u8), i64>, d: usize, n: usize, total: usize) -> ExactComplex {
    // Coordinates live on the radius-√n sphere: c = √n·u.
    let radius = BigRational::from_integer(BigInt::from(n).pow(total as u32 / 2));
    let mut keys: Vec<_> = buckets.into_iter().collect();
    keys.sort();
    let mut out = ExactComplex::default();
    for ((halves, half_powers, unit), mult) in keys {
        let v = moment_from_halves(d, halves.into_iter())
            * BigRational::new(BigInt::from(mult), BigInt::from(2).pow(half_powers));
        match unit {
            0 => out.re += v,
            1 => out.im += v,
            2 => out.re -= v,
            _ => out.im -= v,
        }
    }
    out.re *= &radius;
    out.im *= &radius;
    out
}

/// Exact `E tr(word(X))`, multiplied by `‖X‖² = n` when `weight_norm_sq`.
pub fn exact_trace_moment(kind: SpaceKind, n: usize, word: &TraceWord, weight_norm_sq: bool) -> Result<ExactComplex> {
    let mut v = exact_product_moment(kind, n, std::slice::from_ref(word))?;
    if weight_norm_sq {
        v.re *= int(n as i64);
        v.im *= int(n as i64);
    }
    Ok(v)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeanRecursion {
    pub n: usize,
    pub p: usize,
    pub mean: BigRational,
    pub recursion: BigRational,
}

impl MeanRecursion {
    pub fn holds(&self) -> bool {
        self.mean == self.recursion
    }
}

/// Checks `E W_p = (n/(p+d−2)) Σ_{ℓ=0}^{p−2} E[W_ℓ W_{p−2−ℓ}]` exactly on the
/// Hermitian sphere, with `W_0 = n`.
pub fn mean_recursion_check(kind: SpaceKind, n: usize, p: usize) -> Result<MeanRecursion> {
    if kind != SpaceKind::HermitianComplex {
        return Err(Error::Unsupported {
            kind,
            what: "mean recursion check (Hermitian only)".into(),
        });
    }
    if p == 0 || p > MAX_ORACLE_LETTERS {
        return Err(Error::SizeLimit(format!("mean recursion needs 1 ≤ p ≤ {MAX_ORACLE_LETTERS}")));
    }
    let d = kind.dimension(n);
    let mean = exact_trace_moment(kind, n, &TraceWord::power(p)?, false)?.as_real()?;
    let mut sum = BigRational::zero();
    for l in 0..p.saturating_sub(1) {
        let r = p - 2 - l;
        let term = match (l, r) {
            (0, 0) => int((n * n) as i64),
            (0, k) | (k, 0) => int(n as i64) * exact_trace_moment(kind, n, &TraceWord::power(k)?, false)?.as_real()?,
            (a, b) => exact_product_moment(kind, n, &[TraceWord::power(a)?, TraceWord::power(b)?])?.as_real()?,
        };
        sum += term;
    }
    let recursion = sum * BigRational::new(BigInt::from(n), BigInt::from(p + d - 2));
    Ok(MeanRecursion { n, p, mean, recursion })
}
