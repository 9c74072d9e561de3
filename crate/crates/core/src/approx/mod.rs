//! Uniform approximation by low-degree polynomials, threshold degree and
//! threshold weight, each with its LP dual certificate.

mod symmetric;
mod weight;

pub use symmetric::{symmetric_approx_degree, symmetric_approx_error, symmetric_best_approx};
pub use weight::{
    weight_bruteforce, weight_dual_distribution, weight_int_upper, weight_real, BruteWeight, DualDistribution,
    RealWeight, WeightCertificate, BRUTE_MAX_CAP, BRUTE_MAX_MONOMIALS,
};

use std::collections::BTreeMap;

use serde::Serialize;

use crate::boolfn::{character, fourier_of_table, low_degree_masks, BooleanFunction};
use crate::error::{malformed, Error, Result};
use crate::num::{lp_solve, LpProblem, LpStatus, Mode, Rational, Relation, Sense, VarBound};

/// Largest arity solved in exact arithmetic; above it the LPs run in float.
pub const EXACT_MAX_ARITY: usize = 8;

pub(crate) fn effective_mode(t: usize, mode: Mode) -> Mode {
    if t > EXACT_MAX_ARITY {
        Mode::Float
    } else {
        mode
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ApproxResult {
    pub d: usize,
    /// E(f, d).
    pub value: Rational,
    /// Optimal p = Σ_S coeffs[S] χ_S over |S| ≤ d.
    pub coeffs: BTreeMap<usize, Rational>,
    /// Dual optimum ψ = y⁺ − y⁻ of the same LP; Σ|ψ| = 1 whenever value > 0.
    pub psi: Vec<Rational>,
    pub mode: Mode,
}

impl ApproxResult {
    pub fn eval(&self, x: usize) -> Rational {
        self.coeffs.iter().map(|(&s, c)| if character(s, x) == 1 { c.clone() } else { -c }).sum()
    }

    /// max_x |f(x) − p(x)|, recomputed from the coefficients.
    pub fn achieved_error(&self, f: &BooleanFunction) -> Rational {
        (0..f.table().len())
            .map(|x| (Rational::from_integer(f.eval(x) as i64) - self.eval(x)).abs())
            .max()
            .unwrap_or_else(Rational::zero)
    }
}

/// The LP: minimise ε subject to |f(x) − Σ_{|S|≤d} α_S χ_S(x)| ≤ ε, written
/// as two `≥` rows per x. Variables are the free α_S followed by ε ≥ 0.
fn approximation_lp(f: &BooleanFunction, masks: &[usize]) -> LpProblem<Rational> {
    let k = masks.len();
    let mut objective = vec![Rational::zero(); k + 1];
    objective[k] = Rational::one();
    let mut lp = LpProblem::new(Sense::Minimize, objective);
    for j in 0..k {
        lp.set_bound(j, VarBound::Free);
    }
    for x in 0..f.table().len() {
        let chi: Vec<Rational> = masks.iter().map(|&s| Rational::from_integer(character(s, x) as i64)).collect();
        let fx = Rational::from_integer(f.eval(x) as i64);
        let mut up = chi.clone();
        up.push(Rational::one());
        lp.add_constraint(up, Relation::Ge, fx.clone());
        let mut down: Vec<Rational> = chi.iter().map(|c| -c).collect();
        down.push(Rational::one());
        lp.add_constraint(down, Relation::Ge, -fx);
    }
    lp
}

/// E(f, d) with the optimal polynomial and the dual ψ.
pub fn best_approx(f: &BooleanFunction, d: usize, mode: Mode) -> Result<ApproxResult> {
    let t = f.arity();
    if d > t {
        return malformed(format!("degree {d} exceeds arity {t}"));
    }
    let mode = effective_mode(t, mode);
    let masks = low_degree_masks(t, d);
    let lp = approximation_lp(f, &masks);
    let sol = lp_solve(&lp, mode)?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::Numerical(format!("approximation LP ended {:?}", sol.status)));
    }
    let value = sol.primal[masks.len()].clone();
    let coeffs = masks.iter().zip(&sol.primal).map(|(&s, c)| (s, c.clone())).collect();
    let psi = (0..f.table().len()).map(|x| &sol.dual[2 * x] - &sol.dual[2 * x + 1]).collect();
    Ok(ApproxResult { d, value, coeffs, psi, mode })
}

/// E(f, 0), E(f, 1), … up to the first degree with zero error.
pub fn e_profile(f: &BooleanFunction, mode: Mode) -> Result<Vec<ApproxResult>> {
    let mut out = Vec::new();
    for d in 0..=f.arity() {
        let r = best_approx(f, d, mode)?;
        let done = r.value.is_zero();
        out.push(r);
        if done {
            break;
        }
    }
    Ok(out)
}

fn check_eps(eps: &Rational) -> Result<()> {
    if eps.is_negative() || *eps >= Rational::one() {
        return malformed(format!("ε = {eps} outside [0, 1)"));
    }
    Ok(())
}

/// deg_ε(f): least d with E(f, d) ≤ ε, found by a linear scan.
pub fn approx_degree(f: &BooleanFunction, eps: &Rational, mode: Mode) -> Result<usize> {
    check_eps(eps)?;
    for d in 0..=f.arity() {
        if best_approx(f, d, mode)?.value <= *eps {
            return Ok(d);
        }
    }
    Ok(f.arity())
}

#[derive(Clone, Debug, Serialize)]
pub struct DualWitness {
    /// ψ̂(S) = 0 for every |S| < d.
    pub d: usize,
    pub eps: Rational,
    pub values: Vec<Rational>,
    /// Σ ψ(x) f(x).
    pub correlation: Rational,
    pub mode: Mode,
}

impl DualWitness {
    pub fn arity(&self) -> usize {
        self.values.len().trailing_zeros() as usize
    }

    /// Names of violated invariants, recomputed from the values alone.
    pub fn check(&self, f: &BooleanFunction) -> Vec<String> {
        let mut bad = Vec::new();
        if self.values.len() != f.table().len() {
            return vec!["witness length differs from the truth table".into()];
        }
        let mass: Rational = self.values.iter().map(|v| v.abs()).sum();
        if mass != Rational::one() {
            bad.push(format!("l1-mass: Σ|ψ| = {mass}, not 1"));
        }
        let spec = fourier_of_table(f.arity(), &self.values).expect("length checked");
        if let Some((s, _)) = spec.nonzero().find(|(s, _)| (s.count_ones() as usize) < self.d) {
            bad.push(format!("orthogonality: ψ̂({s}) ≠ 0 with |S| < {}", self.d));
        }
        let corr: Rational = self.values.iter().zip(f.table()).map(|(p, &v)| if v == 1 { p.clone() } else { -p }).sum();
        if corr != self.correlation {
            bad.push(format!("correlation: recomputed {corr}, recorded {}", self.correlation));
        }
        if corr <= self.eps {
            bad.push(format!("correlation: Σψf = {corr} does not exceed ε = {}", self.eps));
        }
        bad
    }
}

/// ψ certifying deg_ε(f) ≥ d for d = deg_ε(f): the dual optimum of the
/// degree-(d−1) LP, so ψ is orthogonal to every χ_S with |S| < d and
/// Σψf = E(f, d−1) > ε.
pub fn dual_witness(f: &BooleanFunction, eps: &Rational, mode: Mode) -> Result<DualWitness> {
    let d = approx_degree(f, eps, mode)?;
    if d == 0 {
        return Err(Error::Degenerate(format!("deg_ε(f) = 0 at ε = {eps}; no dual witness exists")));
    }
    witness_at(f, d, eps, mode)
}

/// Dual solution of the degree-(d−1) LP, normalised, as a witness that
/// E(f, d−1) > ε.
pub fn witness_at(f: &BooleanFunction, d: usize, eps: &Rational, mode: Mode) -> Result<DualWitness> {
    if d == 0 {
        return Err(Error::Degenerate("a witness needs d ≥ 1".into()));
    }
    let r = best_approx(f, d - 1, mode)?;
    normalised_witness(f, d, eps.clone(), &r)
}

fn normalised_witness(f: &BooleanFunction, d: usize, eps: Rational, r: &ApproxResult) -> Result<DualWitness> {
    let mass: Rational = r.psi.iter().map(|v| v.abs()).sum();
    if mass.is_zero() {
        return Err(Error::Degenerate(format!("E(f, {}) = 0; the dual optimum is zero", r.d)));
    }
    let values: Vec<Rational> = r.psi.iter().map(|v| v / &mass).collect();
    let correlation = values.iter().zip(f.table()).map(|(p, &v)| if v == 1 { p.clone() } else { -p }).sum();
    Ok(DualWitness { d, eps, values, correlation, mode: r.mode })
}

/// The dual of the degree-d LP itself: ψ with ψ̂(S) = 0 for |S| ≤ d and
/// Σψf = E(f, d). When E(f, d) = 0 and d < t, χ_[t]/2^t is returned, which
/// is orthogonal to all lower characters and to f; for d = t no nonzero ψ
/// exists and the result is `None`.
pub fn exact_dual(f: &BooleanFunction, d: usize, mode: Mode) -> Result<(ApproxResult, Option<DualWitness>)> {
    let r = best_approx(f, d, mode)?;
    let t = f.arity();
    let zero = Rational::zero();
    let w = if !r.value.is_zero() {
        Some(normalised_witness(f, d + 1, zero, &r)?)
    } else if d < t {
        let top = (1usize << t) - 1;
        let scale = Rational::new(1, 1 << t);
        let values: Vec<Rational> =
            (0..1usize << t).map(|x| Rational::from_integer(character(top, x) as i64) * &scale).collect();
        let correlation = values.iter().zip(f.table()).map(|(p, &v)| if v == 1 { p.clone() } else { -p }).sum();
        Some(DualWitness { d: d + 1, eps: zero, values, correlation, mode: r.mode })
    } else {
        None
    };
    Ok((r, w))
}

/// Feasibility of f(x)·p(x) ≥ 1 for all x with deg p ≤ d.
fn sign_representable(f: &BooleanFunction, d: usize, mode: Mode) -> Result<bool> {
    let masks = low_degree_masks(f.arity(), d);
    let mut lp = LpProblem::new(Sense::Minimize, vec![Rational::zero(); masks.len()]);
    for j in 0..masks.len() {
        lp.set_bound(j, VarBound::Free);
    }
    for x in 0..f.table().len() {
        let row = masks.iter().map(|&s| Rational::from_integer((f.eval(x) * character(s, x)) as i64)).collect();
        lp.add_constraint(row, Relation::Ge, Rational::one());
    }
    let sol = lp_solve(&lp, effective_mode(f.arity(), mode))?;
    Ok(sol.status == LpStatus::Optimal)
}

/// degthr(f): least d for which some degree-d polynomial sign-represents f.
pub fn threshold_degree(f: &BooleanFunction, mode: Mode) -> Result<usize> {
    for d in 0..f.arity() {
        if sign_representable(f, d, mode)? {
            return Ok(d);
        }
    }
    Ok(f.arity())
}

#[derive(Clone, Debug, Serialize)]
pub struct OrthoDistribution {
    pub d: usize,
    pub weights: Vec<Rational>,
}

impl OrthoDistribution {
    pub fn check(&self, f: &BooleanFunction) -> Vec<String> {
        let mut bad = Vec::new();
        if self.weights.len() != f.table().len() {
            return vec!["distribution length differs from the truth table".into()];
        }
        if self.weights.iter().any(|w| w.is_negative()) {
            bad.push("nonnegativity: μ has a negative weight".into());
        }
        let total: Rational = self.weights.iter().sum();
        if total != Rational::one() {
            bad.push(format!("normalisation: Σμ = {total}"));
        }
        let fmu: Vec<Rational> =
            self.weights.iter().zip(f.table()).map(|(w, &v)| if v == 1 { w.clone() } else { -w }).collect();
        let spec = fourier_of_table(f.arity(), &fmu).expect("length checked");
        if let Some((s, _)) = spec.nonzero().find(|(s, _)| (s.count_ones() as usize) < self.d) {
            bad.push(format!("orthogonality: E_μ[f χ_{s}] ≠ 0"));
        }
        bad
    }
}

/// μ with E_μ[f χ_S] = 0 for all |S| < d, or `None` when none exists
/// (exactly when d > degthr(f)).
pub fn ortho_distribution(f: &BooleanFunction, d: usize, mode: Mode) -> Result<Option<OrthoDistribution>> {
    let n = f.table().len();
    let mut lp = LpProblem::new(Sense::Minimize, vec![Rational::zero(); n]);
    lp.add_constraint(vec![Rational::one(); n], Relation::Eq, Rational::one());
    if d > 0 {
        for s in low_degree_masks(f.arity(), d - 1) {
            let row = (0..n).map(|x| Rational::from_integer((f.eval(x) * character(s, x)) as i64)).collect();
            lp.add_constraint(row, Relation::Eq, Rational::zero());
        }
    }
    let sol = lp_solve(&lp, effective_mode(f.arity(), mode))?;
    Ok(match sol.status {
        LpStatus::Optimal => Some(OrthoDistribution { d, weights: sol.primal }),
        _ => None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boolfn::{catalog, CatalogParams};

    fn named(name: &str, t: usize) -> BooleanFunction {
        catalog(name, &CatalogParams { t: Some(t), ..Default::default() }).unwrap()
    }

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    /// Oracle: the dual program solved directly, maximise Σψf over Σ|ψ| ≤ 1
    /// with ψ orthogonal to all χ_S, |S| ≤ d.
    fn dual_program_value(f: &BooleanFunction, d: usize) -> Rational {
        let n = f.table().len();
        let obj =
            (0..2 * n).map(|j| Rational::from_integer(if j < n { f.eval(j) } else { -f.eval(j - n) } as i64)).collect();
        let mut lp = LpProblem::new(Sense::Maximize, obj);
        for s in low_degree_masks(f.arity(), d) {
            let row = (0..2 * n)
                .map(|j| {
                    let c = character(s, j % n) as i64;
                    Rational::from_integer(if j < n { c } else { -c })
                })
                .collect();
            lp.add_constraint(row, Relation::Eq, Rational::zero());
        }
        lp.add_constraint(vec![Rational::one(); 2 * n], Relation::Le, Rational::one());
        lp.solve().unwrap().objective.unwrap()
    }

    #[test]
    fn or2_degree_one() {
        let or2 = named("or", 2);
        let r = best_approx(&or2, 1, Mode::Exact).unwrap();
        assert_eq!(r.value, q(1, 2));
        assert_eq!(r.achieved_error(&or2), q(1, 2));
        assert_eq!(dual_program_value(&or2, 1), q(1, 2));
        assert_eq!(approx_degree(&or2, &q(1, 3), Mode::Exact).unwrap(), 2);
        let w = dual_witness(&or2, &q(1, 3), Mode::Exact).unwrap();
        assert!(w.check(&or2).is_empty(), "{:?}", w.check(&or2));
        assert_eq!(w.correlation, q(1, 2));
        // The OR₂ witness is forced: ψ = χ_{1,2}/4.
        assert_eq!(w.values, vec![q(1, 4), q(-1, 4), q(-1, 4), q(1, 4)]);
    }

    #[test]
    fn parity_and_constants() {
        for t in 1..=5 {
            let par = named("parity", t);
            assert_eq!(best_approx(&par, t - 1, Mode::Exact).unwrap().value, Rational::one());
            assert_eq!(best_approx(&par, t, Mode::Exact).unwrap().value, Rational::zero());
            assert_eq!(approx_degree(&par, &q(9, 10), Mode::Exact).unwrap(), t);
            let w = dual_witness(&par, &q(1, 2), Mode::Exact).unwrap();
            let expect: Vec<Rational> = par.table().iter().map(|&v| q(v as i64, 1 << t)).collect();
            assert_eq!(w.values, expect);
            assert_eq!(threshold_degree(&par, Mode::Exact).unwrap(), t);
        }
        let c = named("const", 3);
        assert_eq!(approx_degree(&c, &q(1, 3), Mode::Exact).unwrap(), 0);
        assert!(matches!(dual_witness(&c, &q(1, 3), Mode::Exact), Err(Error::Degenerate(_))));
        assert!(approx_degree(&c, &q(1, 1), Mode::Exact).is_err());
    }

    #[test]
    fn all_t3_functions_duality_and_monotonicity() {
        for code in 0u32..256 {
            let f = BooleanFunction::new(3, (0..8).map(|x| if code >> x & 1 == 1 { -1 } else { 1 }).collect()).unwrap();
            let mut prev = Rational::from_integer(2);
            for d in 0..=3 {
                let (r, w) = exact_dual(&f, d, Mode::Exact).unwrap();
                assert!(r.value <= prev);
                prev = r.value.clone();
                assert_eq!(r.achieved_error(&f), r.value);
                assert_eq!(dual_program_value(&f, d), r.value);
                if let Some(w) = w {
                    assert_eq!(w.correlation, r.value);
                    let bad: Vec<_> = w.check(&f).into_iter().filter(|m| !m.contains("exceed")).collect();
                    assert!(bad.is_empty(), "{bad:?}");
                } else {
                    assert_eq!(d, 3);
                }
            }
            assert!(prev.is_zero());
            let degthr = threshold_degree(&f, Mode::Exact).unwrap();
            let by_e = (0..=3).find(|&d| best_approx(&f, d, Mode::Exact).unwrap().value < Rational::one()).unwrap();
            assert_eq!(degthr, by_e);
        }
    }

    #[test]
    fn threshold_degrees() {
        for t in 1..=6 {
            assert_eq!(threshold_degree(&named("or", t), Mode::Exact).unwrap(), 1);
        }
        let mp22 = catalog("mp", &CatalogParams { m: Some(2), k: Some(2), ..Default::default() }).unwrap();
        let d = threshold_degree(&mp22, Mode::Exact).unwrap();
        assert_eq!(d, 2);
        let mu = ortho_distribution(&mp22, d, Mode::Exact).unwrap().unwrap();
        assert!(mu.check(&mp22).is_empty());
        assert!(ortho_distribution(&mp22, d + 1, Mode::Exact).unwrap().is_none());
    }

    #[test]
    fn ortho_distribution_parity2() {
        let par = named("parity", 2);
        let mu = ortho_distribution(&par, 2, Mode::Exact).unwrap().unwrap();
        assert!(mu.check(&par).is_empty());
        let uniform = OrthoDistribution { d: 2, weights: vec![q(1, 4); 4] };
        assert!(uniform.check(&par).is_empty());
        assert!(ortho_distribution(&par, 3, Mode::Exact).unwrap().is_none());
    }

    #[test]
    fn float_mode_tracks_exact() {
        let f = named("maj", 5);
        for d in 0..=5 {
            let e = best_approx(&f, d, Mode::Exact).unwrap().value.to_f64();
            let fl = best_approx(&f, d, Mode::Float).unwrap().value.to_f64();
            assert!((e - fl).abs() < 1e-9, "d={d}: {e} vs {fl}");
        }
    }
}
