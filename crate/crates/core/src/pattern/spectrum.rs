use std::collections::BTreeMap;

use serde::Serialize;

use super::{build_f64, PatternMatrixSpec};
use crate::boolfn::fourier_of_table;
use crate::error::Result;
use crate::num::{numerical_rank, singular_values, Rational, RANK_THRESHOLD};

/// One distinct singular value, kept exactly as σ².
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SpectrumEntry {
    pub sigma_sq: Rational,
    pub multiplicity: u128,
}

impl SpectrumEntry {
    pub fn value(&self) -> f64 {
        self.sigma_sq.to_f64().sqrt()
    }
}

/// Nonzero singular values with multiplicities, distinct and descending.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SingularSpectrum {
    pub entries: Vec<SpectrumEntry>,
}

impl SingularSpectrum {
    pub fn rank(&self) -> u128 {
        self.entries.iter().map(|e| e.multiplicity).sum()
    }

    /// ‖A‖² (zero for the zero matrix).
    pub fn top_sq(&self) -> Rational {
        self.entries.first().map(|e| e.sigma_sq.clone()).unwrap_or_else(Rational::zero)
    }

    /// Σ mult · σ², which must equal ‖A‖_F².
    pub fn frobenius_sq(&self) -> Rational {
        self.entries.iter().map(|e| &e.sigma_sq * Rational::from_bigint(e.multiplicity.into())).sum()
    }

    pub fn trace_norm(&self) -> f64 {
        self.entries.iter().map(|e| e.value() * e.multiplicity as f64).sum()
    }
}

/// σ_S = √(2^{n+t}(n/t)^t) · |φ̂(S)| · (t/n)^{|S|/2}, repeated (n/t)^{|S|}
/// times, over the S with φ̂(S) ≠ 0. Equal values from different S are
/// merged exactly.
pub fn spectrum_formula(spec: &PatternMatrixSpec) -> SingularSpectrum {
    let (n, t) = (spec.n(), spec.t());
    let block = spec.block() as i64;
    let coeffs = fourier_of_table(t, spec.phi()).expect("spec validated φ length");
    let size = Rational::from_integer(2).pow((n + t) as i32) * Rational::from_integer(block).pow(t as i32);
    let shrink = Rational::new(1, block);
    let mut grouped: BTreeMap<Rational, u128> = BTreeMap::new();
    for (s, c) in coeffs.nonzero() {
        let k = s.count_ones() as i32;
        let sigma_sq = &size * c * c * shrink.pow(k);
        *grouped.entry(sigma_sq).or_insert(0) += (block as u128).pow(k as u32);
    }
    SingularSpectrum {
        entries: grouped
            .into_iter()
            .rev()
            .map(|(sigma_sq, multiplicity)| SpectrumEntry { sigma_sq, multiplicity })
            .collect(),
    }
}

pub fn spectral_norm(spec: &PatternMatrixSpec) -> f64 {
    spectrum_formula(spec).top_sq().to_f64().sqrt()
}

/// Groups descending values whose consecutive relative gap is at most `gap`;
/// returns (mean, count) per group.
pub fn group_values(values: &[f64], gap: f64) -> Vec<(f64, usize)> {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut groups: Vec<(f64, usize, f64)> = Vec::new();
    for v in sorted {
        match groups.last_mut() {
            Some((sum, count, last)) if (*last - v) <= gap * last.abs() => {
                *sum += v;
                *count += 1;
                *last = v;
            }
            _ => groups.push((v, 1, v)),
        }
    }
    groups.into_iter().map(|(sum, count, _)| (sum / count as f64, count)).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectrumCheck {
    pub formula: Vec<(f64, u128)>,
    pub numeric: Vec<(f64, usize)>,
    pub numeric_rank: usize,
    pub max_rel_err: f64,
    pub matches: bool,
}

/// Formula spectrum against the one-sided Jacobi SVD of the built matrix:
/// nonzero values grouped at 1e-7 relative gaps must agree in number,
/// multiplicity and value (1e-9 relative).
pub fn compare_with_svd(spec: &PatternMatrixSpec) -> Result<SpectrumCheck> {
    let m = build_f64(spec)?;
    let sv = singular_values(&m)?;
    let rank = numerical_rank(&sv);
    let top = sv.first().copied().unwrap_or(0.0);
    let nonzero: Vec<f64> = sv.into_iter().filter(|&s| s > RANK_THRESHOLD * top).collect();
    let numeric = group_values(&nonzero, 1e-7);
    let formula = spectrum_formula(spec);
    let formula: Vec<(f64, u128)> = formula.entries.iter().map(|e| (e.value(), e.multiplicity)).collect();
    let mut max_rel_err = 0.0f64;
    let mut matches = numeric.len() == formula.len();
    for ((a, ca), (b, cb)) in numeric.iter().zip(&formula) {
        let err = (a - b).abs() / b.abs().max(f64::MIN_POSITIVE);
        max_rel_err = max_rel_err.max(err);
        matches &= *ca as u128 == *cb && err <= 1e-9;
    }
    Ok(SpectrumCheck { formula, numeric, numeric_rank: rank, max_rel_err, matches })
}
