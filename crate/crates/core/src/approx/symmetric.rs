//! E(f, d) for symmetric f by symmetrisation: an optimal approximant may be
//! taken symmetric, hence a univariate polynomial of degree ≤ d in |x|. The
//! LP then has t + 1 points instead of 2^t.

use num_integer::binomial;

use crate::boolfn::Predicate;
use crate::error::{malformed, Error, Result};
use crate::num::{lp_solve, LpProblem, LpStatus, Mode, Rational, Relation, Sense, VarBound};

/// Minimises max_{k ≤ t} |D(k) − Σ_j c_j C(k, j)| over c_0..c_d. Returns the
/// error and the coefficients in the binomial basis.
pub fn symmetric_best_approx(pred: &Predicate, t: usize, d: usize, mode: Mode) -> Result<(Rational, Vec<Rational>)> {
    if t > pred.n() || t == 0 {
        return malformed(format!("arity {t} outside 1..={}", pred.n()));
    }
    if d > t {
        return malformed(format!("degree {d} exceeds arity {t}"));
    }
    let mut obj = vec![Rational::zero(); d + 2];
    obj[d + 1] = Rational::one();
    let mut lp = LpProblem::new(Sense::Minimize, obj);
    for j in 0..=d {
        lp.set_bound(j, VarBound::Free);
    }
    for k in 0..=t {
        let basis: Vec<Rational> = (0..=d).map(|j| Rational::from_integer(binomial(k as i64, j as i64))).collect();
        let dk = Rational::from_integer(pred.eval(k) as i64);
        let mut up = basis.clone();
        up.push(Rational::one());
        lp.add_constraint(up, Relation::Ge, dk.clone());
        let mut down: Vec<Rational> = basis.iter().map(|b| -b).collect();
        down.push(Rational::one());
        lp.add_constraint(down, Relation::Ge, -dk);
    }
    let sol = lp_solve(&lp, mode)?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::Numerical(format!("symmetric LP ended {:?}", sol.status)));
    }
    Ok((sol.primal[d + 1].clone(), sol.primal[..=d].to_vec()))
}

pub fn symmetric_approx_error(pred: &Predicate, t: usize, d: usize, mode: Mode) -> Result<Rational> {
    Ok(symmetric_best_approx(pred, t, d, mode)?.0)
}

/// deg_ε of x ↦ D(|x|) on t variables.
pub fn symmetric_approx_degree(pred: &Predicate, t: usize, eps: &Rational, mode: Mode) -> Result<usize> {
    if eps.is_negative() || *eps >= Rational::one() {
        return malformed(format!("ε = {eps} outside [0, 1)"));
    }
    // Float results are compared with a small slack so that exact ties at ε
    // are not lost to round-off.
    let slack = if mode == Mode::Float { Rational::new(1, 1_000_000_000) } else { Rational::zero() };
    for d in 0..=t {
        if symmetric_approx_error(pred, t, d, mode)? <= eps + &slack {
            return Ok(d);
        }
    }
    Ok(t)
}
