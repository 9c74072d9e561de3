//! Numeric engine: exact rationals, dense matrices, simplex LP and the
//! symmetric eigensolver behind every spectral check.

mod eigen;
mod lp;
mod matrix;
mod rational;

pub use eigen::{numerical_rank, singular_values, spectral_norm, sym_eigenvalues, trace_norm, RANK_THRESHOLD};
pub use lp::{lp_solve, Constraint, LpProblem, LpSolution, LpStatus, Mode, Relation, Sense, VarBound};
pub use matrix::DenseMatrix;
pub use rational::Rational;

use std::fmt::Debug;

/// Arithmetic shared by the exact and floating-point code paths.
pub trait Scalar: Clone + PartialOrd + Debug + Send + Sync + 'static {
    /// True for exact arithmetic; selects Bland's rule in the simplex.
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(v: i64) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn abs(&self) -> Self;
    fn to_f64(&self) -> f64;
    /// Pivot / feasibility tolerance: zero for exact types.
    fn tolerance() -> Self;

    fn is_zero(&self) -> bool;

    fn gt_tol(&self) -> bool {
        *self > Self::tolerance()
    }

    fn lt_neg_tol(&self) -> bool {
        *self < Self::tolerance().neg()
    }

    fn near_zero(&self) -> bool {
        !self.gt_tol() && !self.lt_neg_tol()
    }

    /// Flushes round-off noise to zero; identity for exact types.
    fn snap(self) -> Self {
        self
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn zero() -> Self {
        Rational::zero()
    }
    fn one() -> Self {
        Rational::one()
    }
    fn from_i64(v: i64) -> Self {
        Rational::from_integer(v)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn abs(&self) -> Self {
        Rational::abs(self)
    }
    fn to_f64(&self) -> f64 {
        Rational::to_f64(self)
    }
    fn tolerance() -> Self {
        Rational::zero()
    }
    fn is_zero(&self) -> bool {
        Rational::is_zero(self)
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn tolerance() -> Self {
        1e-10
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn snap(self) -> Self {
        if self.abs() < 1e-13 {
            0.0
        } else {
            self
        }
    }
}
