use std::collections::BTreeMap;

use num_traits::ToPrimitive;
use serde::Serialize;

use super::{best_approx, effective_mode};
use crate::boolfn::{character, low_degree_masks, BooleanFunction};
use crate::error::{malformed, Error, Result};
use crate::num::{lp_solve, LpProblem, LpStatus, Mode, Rational, Relation, Sense};

/// Integer polynomial Σ λ_S χ_S that sign-represents a function.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WeightCertificate {
    pub arity: usize,
    pub d: usize,
    pub lambda: BTreeMap<usize, i64>,
}

impl WeightCertificate {
    pub fn new(arity: usize, d: usize, lambda: BTreeMap<usize, i64>) -> Result<Self> {
        if let Some(&s) = lambda.keys().find(|&&s| s >> arity != 0 || s.count_ones() as usize > d) {
            return malformed(format!("monomial {s} outside degree {d} on {arity} variables"));
        }
        let lambda = lambda.into_iter().filter(|(_, v)| *v != 0).collect();
        Ok(WeightCertificate { arity, d, lambda })
    }

    /// W = Σ|λ_S|.
    pub fn weight(&self) -> u64 {
        self.lambda.values().map(|v| v.unsigned_abs()).sum()
    }

    pub fn eval(&self, x: usize) -> i64 {
        self.lambda.iter().map(|(&s, &l)| l * character(s, x) as i64).sum()
    }

    /// sign(Σ λ_S χ_S(x)) = f(x) everywhere, never zero.
    pub fn sign_represents(&self, f: &BooleanFunction) -> bool {
        f.arity() == self.arity && (0..f.table().len()).all(|x| self.eval(x) * f.eval(x) as i64 > 0)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RealWeight {
    /// W_R(f, d); `None` is +∞ (no degree-d sign representation).
    pub value: Option<Rational>,
    pub lambda: BTreeMap<usize, Rational>,
}

/// min Σ|λ_S| over real λ with f(x)·Σ λ_S χ_S(x) ≥ 1, via λ = λ⁺ − λ⁻.
pub fn weight_real(f: &BooleanFunction, d: usize, mode: Mode) -> Result<RealWeight> {
    let masks = low_degree_masks(f.arity(), d);
    let k = masks.len();
    let mut lp = LpProblem::new(Sense::Minimize, vec![Rational::one(); 2 * k]);
    for x in 0..f.table().len() {
        let mut row = Vec::with_capacity(2 * k);
        for &s in &masks {
            row.push(Rational::from_integer((f.eval(x) * character(s, x)) as i64));
        }
        for j in 0..k {
            row.push(-&row[j]);
        }
        lp.add_constraint(row, Relation::Ge, Rational::one());
    }
    let sol = lp_solve(&lp, effective_mode(f.arity(), mode))?;
    Ok(match sol.status {
        LpStatus::Optimal => RealWeight {
            value: sol.objective,
            lambda: masks
                .iter()
                .enumerate()
                .map(|(j, &s)| (s, &sol.primal[j] - &sol.primal[k + j]))
                .filter(|(_, v)| !v.is_zero())
                .collect(),
        },
        _ => RealWeight { value: None, lambda: BTreeMap::new() },
    })
}

/// Rounding construction: with p the optimal degree-d approximant,
/// δ = 1 − E(f, d), N = Σ_{i≤d} C(t, i) and M = 3N/(4δ), take
/// λ_S = round(M·p̂(S)).
pub fn weight_int_upper(f: &BooleanFunction, d: usize, mode: Mode) -> Result<(WeightCertificate, Rational)> {
    let r = best_approx(f, d, mode)?;
    let delta = Rational::one() - &r.value;
    if !delta.is_positive() {
        return Err(Error::Degenerate(format!("E(f, {d}) = 1: no degree-{d} sign representation")));
    }
    let n = low_degree_masks(f.arity(), d).len() as i64;
    let m = Rational::new(3 * n, 4) / &delta;
    let mut lambda = BTreeMap::new();
    for (&s, c) in &r.coeffs {
        let v = (c * &m).round().to_i64().ok_or_else(|| Error::Size("rounded coefficient overflows i64".into()))?;
        lambda.insert(s, v);
    }
    let cert = WeightCertificate::new(f.arity(), d, lambda)?;
    if !cert.sign_represents(f) {
        return Err(Error::Numerical(
            "rounded polynomial fails to sign-represent f (float approximant too coarse)".into(),
        ));
    }
    Ok((cert, r.value))
}

pub const BRUTE_MAX_MONOMIALS: usize = 10;
pub const BRUTE_MAX_CAP: u64 = 12;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BruteWeight {
    Exact(WeightCertificate),
    ExceedsCap(u64),
}

impl BruteWeight {
    pub fn weight(&self) -> Option<u64> {
        match self {
            BruteWeight::Exact(c) => Some(c.weight()),
            BruteWeight::ExceedsCap(_) => None,
        }
    }
}

struct Search<'a> {
    f: &'a BooleanFunction,
    chi: Vec<Vec<i64>>,
    partial: Vec<i64>,
    lambda: Vec<i64>,
}

impl Search<'_> {
    /// Assign λ to monomials i.. with total |λ| ≤ budget.
    fn dfs(&mut self, i: usize, budget: i64) -> bool {
        // Each remaining unit of budget moves p(x) by at most one.
        for x in 0..self.partial.len() {
            if self.f.eval(x) as i64 * self.partial[x] + budget < 1 {
                return false;
            }
        }
        if i == self.chi.len() {
            return (0..self.partial.len()).all(|x| self.f.eval(x) as i64 * self.partial[x] >= 1);
        }
        for mag in 0..=budget {
            for sign in [1i64, -1] {
                if mag == 0 && sign == -1 {
                    continue;
                }
                let v = sign * mag;
                for x in 0..self.partial.len() {
                    self.partial[x] += v * self.chi[i][x];
                }
                self.lambda[i] = v;
                if self.dfs(i + 1, budget - mag) {
                    return true;
                }
                for x in 0..self.partial.len() {
                    self.partial[x] -= v * self.chi[i][x];
                }
            }
        }
        self.lambda[i] = 0;
        false
    }
}

/// Exact W(f, d) by iterative deepening over the L1 budget, or
/// `ExceedsCap` when no integer representation of weight ≤ cap exists.
pub fn weight_bruteforce(f: &BooleanFunction, d: usize, cap: u64) -> Result<BruteWeight> {
    let masks = low_degree_masks(f.arity(), d);
    if masks.len() > BRUTE_MAX_MONOMIALS || cap > BRUTE_MAX_CAP {
        return Err(Error::Size(format!(
            "brute-force weight search over {} monomials with cap {cap} exceeds {BRUTE_MAX_MONOMIALS} / {BRUTE_MAX_CAP}",
            masks.len()
        )));
    }
    let chi: Vec<Vec<i64>> =
        masks.iter().map(|&s| (0..f.table().len()).map(|x| character(s, x) as i64).collect()).collect();
    for budget in 1..=cap {
        let mut search =
            Search { f, chi: chi.clone(), partial: vec![0; f.table().len()], lambda: vec![0; masks.len()] };
        if search.dfs(0, budget as i64) {
            let lambda = masks.iter().copied().zip(search.lambda).collect();
            return Ok(BruteWeight::Exact(WeightCertificate::new(f.arity(), d, lambda)?));
        }
    }
    Ok(BruteWeight::ExceedsCap(cap))
}

#[derive(Clone, Debug, Serialize)]
pub struct DualDistribution {
    pub d: usize,
    pub mu: Vec<Rational>,
    /// max_{|S|≤d} |E_μ[f χ_S]|.
    pub value: Rational,
}

impl DualDistribution {
    /// Recomputes max_{|S|≤d} |E_μ[f χ_S]| from μ.
    pub fn correlation(f: &BooleanFunction, mu: &[Rational], d: usize) -> Rational {
        low_degree_masks(f.arity(), d)
            .into_iter()
            .map(|s| {
                mu.iter()
                    .enumerate()
                    .map(|(x, m)| if f.eval(x) * character(s, x) == 1 { m.clone() } else { -m })
                    .sum::<Rational>()
                    .abs()
            })
            .max()
            .unwrap_or_else(Rational::zero)
    }
}

/// min_μ max_{|S|≤d} |E_μ[f χ_S]| as an LP in (μ, v).
pub fn weight_dual_distribution(f: &BooleanFunction, d: usize, mode: Mode) -> Result<DualDistribution> {
    let n = f.table().len();
    let mut obj = vec![Rational::zero(); n + 1];
    obj[n] = Rational::one();
    let mut lp = LpProblem::new(Sense::Minimize, obj);
    let mut simplex = vec![Rational::one(); n + 1];
    simplex[n] = Rational::zero();
    lp.add_constraint(simplex, Relation::Eq, Rational::one());
    for s in low_degree_masks(f.arity(), d) {
        let corr: Vec<Rational> =
            (0..n).map(|x| Rational::from_integer((f.eval(x) * character(s, x)) as i64)).collect();
        for sign in [1i64, -1] {
            let mut row: Vec<Rational> = corr.iter().map(|c| c * Rational::from_integer(-sign)).collect();
            row.push(Rational::one());
            lp.add_constraint(row, Relation::Ge, Rational::zero());
        }
    }
    let sol = lp_solve(&lp, effective_mode(f.arity(), mode))?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::Numerical(format!("minimax LP ended {:?}", sol.status)));
    }
    let mu = sol.primal[..n].to_vec();
    Ok(DualDistribution { d, value: sol.primal[n].clone(), mu })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boolfn::{catalog, CatalogParams};
    use rand::{Rng, SeedableRng};

    fn named(name: &str, t: usize) -> BooleanFunction {
        catalog(name, &CatalogParams { t: Some(t), ..Default::default() }).unwrap()
    }

    #[test]
    fn or2_weights() {
        let or2 = named("or", 2);
        let bw = weight_bruteforce(&or2, 1, 12).unwrap();
        assert_eq!(bw.weight(), Some(3));
        if let BruteWeight::Exact(c) = &bw {
            assert!(c.sign_represents(&or2));
        }
        let wr = weight_real(&or2, 1, Mode::Exact).unwrap().value.unwrap();
        assert!(wr >= Rational::from_integer(2) && wr <= Rational::from_integer(3));
        let (cert, e) = weight_int_upper(&or2, 1, Mode::Exact).unwrap();
        assert_eq!(e, Rational::new(1, 2));
        assert!(cert.sign_represents(&or2));
        assert!(cert.weight() <= 20);
        let dd = weight_dual_distribution(&or2, 1, Mode::Exact).unwrap();
        assert!(dd.value >= Rational::new(1, 3));
        assert!(dd.value.to_f64() <= (4.0f64 / 3.0).sqrt());
        assert_eq!(DualDistribution::correlation(&or2, &dd.mu, 1), dd.value);
    }

    #[test]
    fn parity_and_constant_weights() {
        let par = named("parity", 2);
        assert_eq!(weight_bruteforce(&par, 1, 12).unwrap(), BruteWeight::ExceedsCap(12));
        assert_eq!(weight_bruteforce(&par, 2, 12).unwrap().weight(), Some(1));
        assert!(weight_real(&par, 1, Mode::Exact).unwrap().value.is_none());
        assert!(matches!(weight_int_upper(&par, 1, Mode::Exact), Err(Error::Degenerate(_))));
        let (cert, _) = weight_int_upper(&named("parity", 3), 3, Mode::Exact).unwrap();
        assert!(cert.sign_represents(&named("parity", 3)));
        assert_eq!(weight_dual_distribution(&par, 1, Mode::Exact).unwrap().value, Rational::zero());
        let c = named("const", 2);
        assert_eq!(weight_dual_distribution(&c, 0, Mode::Exact).unwrap().value, Rational::one());
        assert!(weight_bruteforce(&named("or", 4), 2, 12).is_err());
    }

    #[test]
    fn omb2_certificate_from_definition() {
        // 1 − 2x₁ + 4x₂ with x_i = (1 − χ_i)/2 is 2 + χ₁ − 2χ₂.
        let omb = named("omb", 2);
        let lambda = BTreeMap::from([(0, 2), (1, 1), (2, -2)]);
        let cert = WeightCertificate::new(2, 1, lambda).unwrap();
        // sign(1 + Σ(−2)^i x_i) is −1 where the value is negative, i.e. the
        // polynomial must agree with f in sign.
        assert!(cert.sign_represents(&omb));
        assert_eq!(cert.weight(), 5);
        let (rounded, _) = weight_int_upper(&omb, 2, Mode::Exact).unwrap();
        assert!(rounded.sign_represents(&omb));
    }

    /// Every μ correlates with f at some |S| ≤ d by at least 1/W(f, d).
    #[test]
    fn random_distributions_meet_the_weight_floor() {
        let mut rng = rand_xoshiro::SplitMix64::seed_from_u64(11);
        for code in 0u32..256 {
            let f = BooleanFunction::new(3, (0..8).map(|x| if code >> x & 1 == 1 { -1 } else { 1 }).collect()).unwrap();
            for d in 0..=3 {
                let Some(w) = weight_bruteforce(&f, d, 12).ok().and_then(|b| b.weight()) else { continue };
                let floor = Rational::new(1, w as i64);
                for _ in 0..100 {
                    let raw: Vec<i64> = (0..8).map(|_| rng.gen_range(0..50)).collect();
                    let total: i64 = raw.iter().sum::<i64>().max(1);
                    let mu: Vec<Rational> = raw.iter().map(|&r| Rational::new(r, total)).collect();
                    if mu.iter().all(|m| m.is_zero()) {
                        continue;
                    }
                    assert!(DualDistribution::correlation(&f, &mu, d) >= floor);
                }
            }
        }
    }
}
