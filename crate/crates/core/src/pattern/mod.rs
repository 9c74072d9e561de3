//! Pattern matrices A = [φ(x|_V ⊕ w)] and their closed-form spectra.
//!
//! Rows are x ∈ {0,1}^n in ascending order. Columns are pairs (V, w): V picks
//! one variable from each of the t contiguous blocks of size n/t, encoded by
//! base-(n/t) digits with digit 1 most significant, and w ∈ {0,1}^t is the
//! low part of the column ordinal.

mod spectrum;

pub use spectrum::{
    compare_with_svd, group_values, spectral_norm, spectrum_formula, SingularSpectrum, SpectrumCheck, SpectrumEntry,
};

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::boolfn::{character, BooleanFunction};
use crate::error::{malformed, Error, Result};
use crate::num::{DenseMatrix, Rational};

/// Largest buildable matrix, in entries.
pub const MAX_ENTRIES: u128 = 1 << 20;

#[derive(Clone, Debug, PartialEq)]
pub struct PatternMatrixSpec {
    n: usize,
    t: usize,
    phi: Vec<Rational>,
}

impl PatternMatrixSpec {
    pub fn new(n: usize, t: usize, phi: Vec<Rational>) -> Result<Self> {
        if t == 0 || n <= t || n % t != 0 {
            return malformed(format!("need t | n and 0 < t < n, got n = {n}, t = {t}"));
        }
        if n > 60 {
            return Err(Error::Size(format!("n = {n} is beyond any indexable size")));
        }
        if phi.len() != 1 << t {
            return malformed(format!("φ has {} entries, expected 2^{t}", phi.len()));
        }
        Ok(PatternMatrixSpec { n, t, phi })
    }

    pub fn from_function(n: usize, t: usize, f: &BooleanFunction) -> Result<Self> {
        if f.arity() != t {
            return malformed(format!("function arity {} differs from t = {t}", f.arity()));
        }
        PatternMatrixSpec::new(n, t, f.rational_table())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn phi(&self) -> &[Rational] {
        &self.phi
    }

    /// n/t, the block size.
    pub fn block(&self) -> usize {
        self.n / self.t
    }

    pub fn rows(&self) -> u128 {
        1u128 << self.n
    }

    /// (n/t)^t · 2^t.
    pub fn cols(&self) -> u128 {
        (self.block() as u128).pow(self.t as u32) << self.t
    }

    pub fn entries(&self) -> u128 {
        self.rows().saturating_mul(self.cols())
    }

    pub fn is_buildable(&self) -> bool {
        self.entries() <= MAX_ENTRIES
    }

    /// Hex sha256 over the φ table written as "num/den" lines.
    pub fn phi_hash(&self) -> String {
        let mut h = Sha256::new();
        for v in &self.phi {
            h.update(v.to_fraction_string().as_bytes());
            h.update(b"\n");
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn column(&self, ordinal: usize) -> ColumnIndex {
        ColumnIndex::from_ordinal(self.n, self.t, ordinal)
    }

    pub fn entry(&self, x: usize, col: &ColumnIndex) -> &Rational {
        &self.phi[project(x, col, self.n, self.t) ^ col.w]
    }
}

/// A column (V, w) of a pattern matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColumnIndex {
    /// v_digits[j] ∈ [0, n/t) picks element j of V from block j.
    pub v_digits: Vec<usize>,
    pub w: usize,
}

impl ColumnIndex {
    pub fn from_ordinal(n: usize, t: usize, ordinal: usize) -> Self {
        let block = n / t;
        let w = ordinal & ((1 << t) - 1);
        let mut v = ordinal >> t;
        let mut v_digits = vec![0; t];
        for j in (0..t).rev() {
            v_digits[j] = v % block;
            v /= block;
        }
        ColumnIndex { v_digits, w }
    }

    pub fn ordinal(&self, n: usize, t: usize) -> usize {
        let block = n / t;
        let v = self.v_digits.iter().fold(0, |acc, &d| acc * block + d);
        (v << t) | self.w
    }

    /// The 1-based elements of V: (j−1)(n/t) + v_digits[j] + 1.
    pub fn v_elements(&self, n: usize, t: usize) -> Vec<usize> {
        let block = n / t;
        self.v_digits.iter().enumerate().map(|(j, &d)| j * block + d + 1).collect()
    }
}

/// x|_V: bit j of the result is bit V_j − 1 of x.
pub fn project(x: usize, col: &ColumnIndex, n: usize, t: usize) -> usize {
    let block = n / t;
    col.v_digits.iter().enumerate().fold(0, |acc, (j, &d)| acc | ((x >> (j * block + d)) & 1) << j)
}

fn check_size(spec: &PatternMatrixSpec) -> Result<()> {
    if !spec.is_buildable() {
        return Err(Error::Size(format!(
            "pattern matrix {}x{} exceeds {MAX_ENTRIES} entries",
            spec.rows(),
            spec.cols()
        )));
    }
    Ok(())
}

/// Exact entries; rows built in parallel.
pub fn build(spec: &PatternMatrixSpec) -> Result<DenseMatrix<Rational>> {
    check_size(spec)?;
    let (rows, cols) = (spec.rows() as usize, spec.cols() as usize);
    let columns: Vec<ColumnIndex> = (0..cols).map(|c| spec.column(c)).collect();
    let data: Vec<Rational> = (0..rows)
        .into_par_iter()
        .flat_map_iter(|x| columns.iter().map(move |c| spec.entry(x, c).clone()).collect::<Vec<_>>())
        .collect();
    DenseMatrix::new(rows, cols, data)
}

pub fn build_f64(spec: &PatternMatrixSpec) -> Result<DenseMatrix<f64>> {
    check_size(spec)?;
    let (rows, cols) = (spec.rows() as usize, spec.cols() as usize);
    let phi: Vec<f64> = spec.phi.iter().map(|v| v.to_f64()).collect();
    let columns: Vec<ColumnIndex> = (0..cols).map(|c| spec.column(c)).collect();
    let data: Vec<f64> = (0..rows)
        .into_par_iter()
        .flat_map_iter(|x| {
            let phi = &phi;
            columns.iter().map(move |c| phi[project(x, c, spec.n, spec.t) ^ c.w]).collect::<Vec<_>>()
        })
        .collect();
    DenseMatrix::new(rows, cols, data)
}

/// rank A = Σ_{φ̂(S) ≠ 0} (n/t)^{|S|}.
pub fn rank_exact(spec: &PatternMatrixSpec) -> u128 {
    spectrum_formula(spec).rank()
}

/// Ψ, the (n, t, 2^{−n}(n/t)^{−t} ψ)-pattern matrix, for a ψ with Σ|ψ| = 1.
pub fn witness_spec(n: usize, t: usize, psi: &[Rational]) -> Result<PatternMatrixSpec> {
    let mass: Rational = psi.iter().map(|v| v.abs()).sum();
    if mass != Rational::one() {
        return malformed(format!("witness is not normalised: Σ|ψ| = {mass}"));
    }
    if t == 0 || n <= t || n % t != 0 {
        return malformed(format!("need t | n and 0 < t < n, got n = {n}, t = {t}"));
    }
    let scale =
        (Rational::from_integer(2).pow(n as i32) * Rational::from_integer((n / t) as i64).pow(t as i32)).recip();
    PatternMatrixSpec::new(n, t, psi.iter().map(|v| v * &scale).collect())
}

pub fn witness_matrix(n: usize, t: usize, psi: &[Rational]) -> Result<DenseMatrix<Rational>> {
    build(&witness_spec(n, t, psi)?)
}

/// Explicit check that A_S A_Tᵀ = 0 and A_Sᵀ A_T = 0 for the
/// (n, t, χ_S)- and (n, t, χ_T)-pattern matrices.
pub fn verify_sum_lemma(s: usize, t_mask: usize, n: usize, t: usize) -> Result<bool> {
    if s == t_mask {
        return malformed("the lemma concerns distinct sets S ≠ T");
    }
    if s >> t != 0 || t_mask >> t != 0 {
        return malformed(format!("subset masks must lie below 2^{t}"));
    }
    let chi = |mask: usize| (0..1usize << t).map(|x| Rational::from_integer(character(mask, x) as i64)).collect();
    let a = build(&PatternMatrixSpec::new(n, t, chi(s))?)?;
    let b = build(&PatternMatrixSpec::new(n, t, chi(t_mask))?)?;
    Ok(a.matmul(&b.transpose())?.is_zero() && a.transpose().matmul(&b)?.is_zero())
}

/// CSV export: a `#` header with n, t and the φ hash, then one line per row
/// of exact entries.
pub fn to_csv(spec: &PatternMatrixSpec, m: &DenseMatrix<Rational>) -> String {
    let mut out = format!("# n={},t={},phi_sha256={}\n", spec.n, spec.t, spec.phi_hash());
    for i in 0..m.rows() {
        let line: Vec<String> = m.row(i).iter().map(|v| v.to_string()).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}
