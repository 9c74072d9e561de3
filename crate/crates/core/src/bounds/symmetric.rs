use serde::Serialize;

use super::{BoundReport, Side};
use crate::approx::symmetric_approx_degree;
use crate::boolfn::{from_predicate, l0_l1, Predicate};
use crate::bounds::comm::q_lower_adeg;
use crate::error::{Error, Result};
use crate::num::{Mode, Rational};
use crate::pattern::PatternMatrixSpec;

/// α in the shifting argument.
fn alpha() -> Rational {
    Rational::new(1, 8)
}

/// Largest reduced arity for which the main-cc proof chain is rerun on the
/// (2m, m, f) pattern matrix.
const CHAIN_MAX_ARITY: usize = 3;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ShiftArithmetic {
    pub n: usize,
    pub l: usize,
    pub k: usize,
    pub n_minus_k: usize,
    pub l_minus_k: usize,
    /// n − k = ⌊(n − ℓ)/(1 − α)⌋ and ℓ − k = ⌊α(n − ℓ)/(1 − α)⌋.
    pub identities_hold: bool,
    /// ℓ − k ≤ α(n − k), so the shifted predicate falls in the small case.
    pub reduces_to_small: bool,
}

/// k = ℓ − ⌊α(n − ℓ)/(1 − α)⌋ for αn < ℓ ≤ n.
pub fn razborov_shift(n: usize, l: usize) -> Result<ShiftArithmetic> {
    let a = alpha();
    let one = Rational::one();
    let nl = Rational::from_integer((n - l.min(n)) as i64);
    if n < 8 || l > n || Rational::from_integer(l as i64) <= &a * Rational::from_integer(n as i64) {
        return Err(Error::Malformed(format!("need n ≥ 8 and n/8 < ℓ ≤ n, got n = {n}, ℓ = {l}")));
    }
    let to_usize = |v: Rational| v.floor().try_into().expect("nonnegative and small");
    let drop: usize = to_usize(&a / (&one - &a) * &nl);
    let k = l - drop;
    let lhs_n: usize = to_usize(&nl / (&one - &a));
    let lhs_l: usize = to_usize(&a / (&one - &a) * &nl);
    let identities_hold = n - k == lhs_n && l - k == lhs_l;
    let reduces_to_small = Rational::from_integer((l - k) as i64) <= &a * Rational::from_integer((n - k) as i64);
    Ok(ShiftArithmetic { n, l, k, n_minus_k: n - k, l_minus_k: l - k, identities_hold, reduces_to_small })
}

/// The small-case value for a predicate D on {0..n} changing at ℓ ≤ n/8:
/// f(z) = D(|z|) on m = ⌊n/4⌋ variables, (1/4)·deg_{1/3}(f)·log 2 − 3.
fn small_case(r: &mut BoundReport, label: &str, d: &Predicate, n: usize, l: usize, mode: Mode) -> Result<f64> {
    let m = n / 4;
    r.check(
        &format!("{label}: D(ℓ) ≠ D(ℓ − 1) with ℓ ≤ n/8"),
        l >= 1 && 8 * l <= n && d.eval(l) != d.eval(l - 1),
        format!("ℓ = {l}, n = {n}"),
    );
    let third = Rational::new(1, 3);
    let deg = symmetric_approx_degree(d, m, &third, mode)?;
    let value = deg as f64 / 4.0 - 3.0;
    r.note(format!(
        "{label}: f(z) = D(|z|) on m = {m} variables, deg_1/3(f) = {deg}, ({}, {m}, f) pattern matrix, value {value:.6}",
        2 * m
    ));
    r.input(&format!("{label}_m"), m).input(&format!("{label}_deg"), deg);
    if m <= CHAIN_MAX_ARITY {
        let f = from_predicate(d, m)?;
        let sub = q_lower_adeg(&f, 2 * m, m, &third, &Rational::new(1, 7), mode)?;
        r.check(
            &format!("{label}: deg_1/3 from the symmetric LP equals the full LP"),
            sub.inputs.get("d").map(String::as_str) == Some(deg.to_string().as_str()),
            format!("full LP d = {:?}", sub.inputs.get("d")),
        );
        r.check(
            &format!("{label}: main-cc value at δ = 1/7 ≥ the −3 form"),
            sub.value >= value,
            format!("{:.9} vs {value:.9}", sub.value),
        );
        r.absorb(label, &sub);
        r.input(&format!("{label}_f"), f.to_hex());
        r.input(&format!("{label}_main_cc"), format!("{:.12}", sub.value));
    } else {
        let spec_ok = PatternMatrixSpec::new(2 * m, m, vec![Rational::one(); 1 << m]).is_ok();
        r.check(&format!("{label}: (2m, m) pattern shape is valid"), spec_ok, "");
    }
    Ok(value)
}

/// The concrete lower bound for F(x, y) = D(|x ∧ y|) on n bits from the
/// shift-and-restrict pipeline, maximised over the ℓ₀ and ℓ₁ branches.
pub fn razborov_bound(d: &Predicate, n: usize, mode: Mode) -> Result<BoundReport> {
    if n < 8 {
        return Err(Error::Malformed(format!("need n ≥ 8, got {n}")));
    }
    if d.n() != n {
        return Err(Error::Malformed(format!("predicate is on 0..={}, not 0..={n}", d.n())));
    }
    let ll = l0_l1(d);
    let mut r = BoundReport::new("razborov", Side::Lower);
    r.input("n", n).input("predicate", d.to_list()).input("l0", ll.l0).input("l1", ll.l1);
    let symbolic = ((n * ll.l0) as f64).sqrt() + ll.l1 as f64;
    r.input("sqrt(n*l0)+l1", format!("{symbolic:.6}"));
    if d.is_constant() {
        r.value = 0.0;
        r.vacuous = true;
        r.formula_only = true;
        r.note("constant predicate: ℓ₀ = ℓ₁ = 0");
        return Ok(r);
    }
    let mut branches: Vec<(&str, usize)> = Vec::new();
    if ll.l0 != 0 {
        branches.push(("l0", ll.l0));
    }
    if ll.l1 != 0 {
        branches.push(("l1", n - ll.l1 + 1));
    }
    let mut best = f64::NEG_INFINITY;
    for (label, l) in branches {
        r.input(&format!("{label}_ell"), l);
        let v = if 8 * l <= n {
            small_case(&mut r, label, d, n, l, mode)?
        } else {
            let sh = razborov_shift(n, l)?;
            r.check(&format!("{label}: shift identities"), sh.identities_hold, format!("{sh:?}"));
            r.input(&format!("{label}_k"), sh.k);
            if sh.k == l {
                r.note(format!("{label}: ⌊(n − ℓ)/7⌋ = 0, the bound holds trivially for this branch"));
                continue;
            }
            r.check(&format!("{label}: shifted predicate is in the small case"), sh.reduces_to_small, "");
            let shifted = d.shift(sh.k)?;
            r.note(format!("{label}: D_k(i) = D(k + i) with k = {} on {} values", sh.k, sh.n_minus_k));
            small_case(&mut r, label, &shifted, sh.n_minus_k, sh.l_minus_k, mode)?
        };
        best = best.max(v);
    }
    if best.is_finite() {
        r.value = best;
        r.vacuous = best <= 0.0;
    } else {
        r.value = 0.0;
        r.vacuous = true;
    }
    Ok(r)
}

/// Sanity band for adeg / (√(tℓ₀) + √(tℓ₁)).
pub const PATURI_BAND: (f64, f64) = (0.3, 3.0);

#[derive(Clone, Debug, Serialize)]
pub struct PaturiRow {
    pub t: usize,
    pub adeg: usize,
    pub l0: usize,
    pub l1: usize,
    pub reference: f64,
    pub ratio: Option<f64>,
    pub in_band: bool,
}

/// deg_{1/3} of the named symmetric family on t variables for each t,
/// against √(tℓ₀) + √(tℓ₁).
pub fn paturi_report(family: &str, ts: impl IntoIterator<Item = usize>, mode: Mode) -> Result<Vec<PaturiRow>> {
    let third = Rational::new(1, 3);
    ts.into_iter()
        .map(|t| {
            let d = Predicate::named(family, t)?;
            let adeg = symmetric_approx_degree(&d, t, &third, mode)?;
            let ll = l0_l1(&d);
            let reference = ((t * ll.l0) as f64).sqrt() + ((t * ll.l1) as f64).sqrt();
            let ratio = (reference > 0.0).then(|| adeg as f64 / reference);
            let in_band = ratio.is_some_and(|q| (PATURI_BAND.0..=PATURI_BAND.1).contains(&q));
            Ok(PaturiRow { t, adeg, l0: ll.l0, l1: ll.l1, reference, ratio, in_band })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disjointness_at_eight() {
        let d = Predicate::named("disj", 8).unwrap();
        let r = razborov_bound(&d, 8, Mode::Exact).unwrap();
        assert_eq!(r.inputs["l0"], "1");
        assert_eq!(r.inputs["l0_f"], "e");
        assert_eq!(r.inputs["l0_deg"], "2");
        assert!((r.value - (0.5 - 3.0)).abs() < 1e-12);
        assert!(r.vacuous);
        assert!(r.verified(), "{:?}", r.failures());
    }

    #[test]
    fn constant_and_shifted() {
        let c = Predicate::named("const", 9).unwrap();
        assert!(razborov_bound(&c, 9, Mode::Exact).unwrap().vacuous);
        // Flips only at ℓ = n.
        let d = Predicate::named("and", 16).unwrap();
        let r = razborov_bound(&d, 16, Mode::Exact).unwrap();
        assert_eq!(r.inputs["l1_ell"], "16");
        assert_eq!(r.inputs["l1_k"], "16");
        let d = Predicate::from_fn(24, |i| if i >= 14 { -1 } else { 1 }).unwrap();
        let r = razborov_bound(&d, 24, Mode::Exact).unwrap();
        assert_eq!(r.inputs["l1_k"], "13");
        assert_eq!(r.inputs["l1_f"], "e");
        assert!(r.verified(), "{:?}", r.failures());
        assert!(razborov_bound(&c, 7, Mode::Exact).is_err());
    }

    #[test]
    fn shift_identities_everywhere() {
        for n in 8..=64 {
            for l in (n / 8 + 1)..=n {
                let s = razborov_shift(n, l).unwrap();
                assert!(s.identities_hold && s.reduces_to_small, "{s:?}");
                assert!(s.k >= 1 && s.k <= l);
            }
        }
        assert!(razborov_shift(16, 2).is_err());
    }

    #[test]
    fn paturi_or_grows() {
        let rows = paturi_report("or", 1..=8, Mode::Exact).unwrap();
        assert!(rows.windows(2).all(|w| w[0].adeg <= w[1].adeg));
        assert!(rows.iter().all(|r| r.in_band), "{rows:?}");
    }
}
