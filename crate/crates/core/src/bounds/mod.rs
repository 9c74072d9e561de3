//! Lower and upper bounds for pattern matrices, each returned as a report
//! that re-checks the inequalities behind it on the constructed witnesses.

mod comm;
mod disc;
mod rank;
mod symmetric;

pub use comm::{gdm_bound, gdm_value, q_lower_adeg, q_lower_weight};
pub use disc::{
    disc_bruteforce, disc_lower_weight, disc_spectral, disc_upper_adeg, disc_upper_weight, weight_witness, DiscUpper,
    WeightWitness,
};
pub use rank::{
    logrank_check, rank_bounded_error, rank_bounds, rank_small_bias, rank_upper_construction, trace_norm_lower,
    RankUpper,
};
pub use symmetric::{paturi_report, razborov_bound, razborov_shift, PaturiRow, ShiftArithmetic, PATURI_BAND};

use std::collections::BTreeMap;

use serde::Serialize;

use crate::approx::{
    weight_bruteforce, weight_int_upper, weight_real, BruteWeight, BRUTE_MAX_CAP, BRUTE_MAX_MONOMIALS,
};
use crate::boolfn::{low_degree_masks, BooleanFunction};
use crate::error::{Error, Result};
use crate::num::{DenseMatrix, Mode, Rational};
use crate::pattern::PatternMatrixSpec;

/// Largest pattern matrix (in entries) that is built and decomposed
/// numerically during verification; larger instances use the exact
/// spectrum formula only.
pub const VERIFY_MAX_ENTRIES: u128 = 1 << 16;

/// Absolute slack for floating-point comparisons in verification.
pub const TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Lower,
    Upper,
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub invariant: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundReport {
    pub name: String,
    pub side: Side,
    pub inputs: BTreeMap<String, String>,
    pub value: f64,
    /// The value as an exact rational when the formula is rational.
    pub exact: Option<Rational>,
    pub vacuous: bool,
    pub formula_only: bool,
    pub verification: Vec<Check>,
    pub provenance: Vec<String>,
}

impl BoundReport {
    pub fn new(name: &str, side: Side) -> Self {
        BoundReport {
            name: name.into(),
            side,
            inputs: BTreeMap::new(),
            value: 0.0,
            exact: None,
            vacuous: false,
            formula_only: false,
            verification: Vec::new(),
            provenance: Vec::new(),
        }
    }

    pub fn input(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.inputs.insert(key.into(), value.to_string());
        self
    }

    pub fn check(&mut self, invariant: &str, passed: bool, detail: impl Into<String>) -> bool {
        self.verification.push(Check { invariant: invariant.into(), passed, detail: detail.into() });
        passed
    }

    pub fn note(&mut self, line: impl Into<String>) {
        self.provenance.push(line.into());
    }

    pub fn set_exact(&mut self, v: Rational) {
        self.value = v.to_f64();
        self.exact = Some(v);
    }

    /// True when at least one check ran and none failed.
    pub fn verified(&self) -> bool {
        !self.verification.is_empty() && self.verification.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.verification.iter().filter(|c| !c.passed).collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report serialises")
    }

    fn function(&mut self, f: &BooleanFunction) -> &mut Self {
        self.input("f", f.to_hex()).input("t", f.arity())
    }

    /// Copies another report's checks under a prefix.
    fn absorb(&mut self, prefix: &str, other: &BoundReport) {
        for c in &other.verification {
            self.verification.push(Check {
                invariant: format!("{prefix}: {}", c.invariant),
                passed: c.passed,
                detail: c.detail.clone(),
            });
        }
    }
}

/// Fixed CSV column order for sweep output.
pub const CSV_HEADER: &str = "name,f,n,t,eps,delta,gamma,d,value,vacuous,verified";

pub fn csv_row(r: &BoundReport) -> String {
    let get = |k: &str| r.inputs.get(k).cloned().unwrap_or_default();
    let value = if r.value.is_finite() { format!("{:.12}", r.value) } else { String::new() };
    format!(
        "{},{},{},{},{},{},{},{},{},{},{}",
        r.name,
        get("f"),
        get("n"),
        get("t"),
        get("eps"),
        get("delta"),
        get("gamma"),
        get("d"),
        value,
        r.vacuous,
        r.verified()
    )
}

/// Rows and columns as bit masks over the matrix indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Rectangle {
    pub rows: u64,
    pub cols: u64,
}

impl Rectangle {
    /// Σ_{x∈S, y∈T} λ(x, y)·F(x, y).
    pub fn mass(&self, lambda: &DenseMatrix<Rational>, f: &DenseMatrix<Rational>) -> Rational {
        let mut s = Rational::zero();
        for i in (0..lambda.rows()).filter(|&i| self.rows >> i & 1 == 1) {
            for j in (0..lambda.cols()).filter(|&j| self.cols >> j & 1 == 1) {
                s += lambda.get(i, j) * f.get(i, j);
            }
        }
        s
    }
}

/// A W(f, d) estimate with the direction it may be used in. `None` is +∞.
#[derive(Clone, Debug, Serialize)]
pub struct WeightEstimate {
    pub value: Option<Rational>,
    pub source: String,
}

impl WeightEstimate {
    fn display(&self) -> String {
        match &self.value {
            Some(v) => format!("{v} ({})", self.source),
            None => format!("inf ({})", self.source),
        }
    }
}

fn brute_applicable(f: &BooleanFunction, d: usize) -> bool {
    low_degree_masks(f.arity(), d).len() <= BRUTE_MAX_MONOMIALS
}

/// A value ≤ W(f, d): brute force when it finishes, else the larger of
/// W_R(f, d) and cap + 1.
pub fn weight_lower(f: &BooleanFunction, d: usize, mode: Mode) -> Result<WeightEstimate> {
    let real = weight_real(f, d, mode)?;
    let Some(wr) = real.value else {
        return Ok(WeightEstimate { value: None, source: "no degree-d sign representation".into() });
    };
    if brute_applicable(f, d) {
        match weight_bruteforce(f, d, BRUTE_MAX_CAP)? {
            BruteWeight::Exact(c) => {
                return Ok(WeightEstimate {
                    value: Some(Rational::from_integer(c.weight() as i64)),
                    source: "brute force".into(),
                })
            }
            BruteWeight::ExceedsCap(cap) => {
                let floor = Rational::from_integer(cap as i64 + 1);
                return Ok(WeightEstimate {
                    value: Some(wr.max(floor)),
                    source: format!("exceeds brute-force cap {cap}"),
                });
            }
        }
    }
    Ok(WeightEstimate { value: Some(wr), source: "real relaxation W_R".into() })
}

/// A value ≥ W(f, d): brute force when it finishes, else the rounding
/// certificate's weight.
pub fn weight_upper(f: &BooleanFunction, d: usize, mode: Mode) -> Result<WeightEstimate> {
    if brute_applicable(f, d) {
        if let BruteWeight::Exact(c) = weight_bruteforce(f, d, BRUTE_MAX_CAP)? {
            return Ok(WeightEstimate {
                value: Some(Rational::from_integer(c.weight() as i64)),
                source: "brute force".into(),
            });
        }
    }
    match weight_int_upper(f, d, mode) {
        Ok((cert, _)) => Ok(WeightEstimate {
            value: Some(Rational::from_integer(cert.weight() as i64)),
            source: "rounding certificate".into(),
        }),
        Err(Error::Degenerate(_)) => Ok(WeightEstimate { value: None, source: "E(f, d) = 1".into() }),
        Err(e) => Err(e),
    }
}

/// s = 2^{n+t}(n/t)^t, the number of entries of an (n, t) pattern matrix.
fn size_rational(n: usize, t: usize) -> Rational {
    Rational::from_integer(2).pow((n + t) as i32) * Rational::from_integer((n / t) as i64).pow(t as i32)
}

fn ratio(t: usize, n: usize) -> Rational {
    Rational::new(t as i64, n as i64)
}

fn pattern_for(f: &BooleanFunction, n: usize) -> Result<PatternMatrixSpec> {
    PatternMatrixSpec::from_function(n, f.arity(), f)
}

fn numeric_ok(spec: &PatternMatrixSpec) -> bool {
    spec.entries() <= VERIFY_MAX_ENTRIES
}

fn check_unit_interval_open(name: &str, v: &Rational) -> Result<()> {
    if !v.is_positive() || *v >= Rational::one() {
        return Err(Error::Malformed(format!("{name} = {v} outside (0, 1)")));
    }
    Ok(())
}
