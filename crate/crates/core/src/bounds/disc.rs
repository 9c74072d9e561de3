use serde::Serialize;

use super::{
    check_unit_interval_open, numeric_ok, pattern_for, ratio, weight_lower, weight_upper, BoundReport, Rectangle, Side,
    WeightEstimate, TOL,
};
use crate::approx::{approx_degree, dual_witness, ortho_distribution, weight_dual_distribution, DualDistribution};
use crate::boolfn::BooleanFunction;
use crate::error::{Error, Result};
use crate::num::{spectral_norm as numeric_norm, DenseMatrix, Mode, Rational};
use crate::pattern::{build, spectrum_formula, witness_spec, PatternMatrixSpec};

/// Largest dimension enumerated by `disc_bruteforce`, and the largest other
/// dimension it accepts.
pub const BRUTE_ENUM_MAX: usize = 16;
pub const BRUTE_OTHER_MAX: usize = 64;

fn check_measure(p: &DenseMatrix<Rational>) -> Result<()> {
    if p.entries().iter().any(|v| v.is_negative()) {
        return Err(Error::Malformed("measure has a negative entry".into()));
    }
    let total = p.entry_l1();
    if total != Rational::one() {
        return Err(Error::Malformed(format!("measure sums to {total}, not 1")));
    }
    Ok(())
}

/// max over rectangles S×T of |Σ λ(x,y) F(x,y)|. Enumerates the subsets of
/// the smaller dimension in Gray-code order; for each, the best rows are
/// those whose partial sums share a sign.
pub fn disc_bruteforce(lambda: &DenseMatrix<Rational>, f: &DenseMatrix<Rational>) -> Result<(Rational, Rectangle)> {
    if lambda.rows() != f.rows() || lambda.cols() != f.cols() {
        return Err(Error::Malformed("λ and F differ in shape".into()));
    }
    check_measure(lambda)?;
    let (r, c) = (lambda.rows(), lambda.cols());
    if r.min(c) > BRUTE_ENUM_MAX || r.max(c) > BRUTE_OTHER_MAX {
        return Err(Error::Size(format!(
            "{r}x{c} exceeds the rectangle search limits {BRUTE_ENUM_MAX}/{BRUTE_OTHER_MAX}"
        )));
    }
    let transpose = c > r;
    let m = lambda.hadamard(f)?;
    let m = if transpose { m.transpose() } else { m };
    let (rows, k) = (m.rows(), m.cols());
    let mut sums = vec![Rational::zero(); rows];
    let mut best = Rational::zero();
    let mut rect = Rectangle { rows: 0, cols: 0 };
    let mut cols_mask = 0u64;
    for g in 1u64..1 << k {
        let bit = g.trailing_zeros() as usize;
        cols_mask ^= 1 << bit;
        let adding = cols_mask >> bit & 1 == 1;
        for (i, s) in sums.iter_mut().enumerate() {
            if adding {
                *s += m.get(i, bit);
            } else {
                *s -= m.get(i, bit);
            }
        }
        let (mut pos, mut neg) = (Rational::zero(), Rational::zero());
        let (mut pos_rows, mut neg_rows) = (0u64, 0u64);
        for (i, s) in sums.iter().enumerate() {
            if s.is_positive() {
                pos += s;
                pos_rows |= 1 << i;
            } else if s.is_negative() {
                neg -= s;
                neg_rows |= 1 << i;
            }
        }
        for (v, rmask) in [(pos, pos_rows), (neg, neg_rows)] {
            if v > best {
                best = v;
                rect = Rectangle { rows: rmask, cols: cols_mask };
            }
        }
    }
    if transpose {
        rect = Rectangle { rows: rect.cols, cols: rect.rows };
    }
    Ok((best, rect))
}

/// √(|X||Y|)·‖P∘F‖, an upper bound on disc_P(F).
pub fn disc_spectral(p: &DenseMatrix<Rational>, f: &DenseMatrix<Rational>) -> Result<f64> {
    check_measure(p)?;
    let pf = p.hadamard(f)?;
    Ok(((p.rows() * p.cols()) as f64).sqrt() * numeric_norm(&pf.to_f64())?)
}

/// The distribution μ behind the weight-based bounds at degree d, with
/// ψ = f·μ and the pattern matrices Ψ and P = |Ψ|.
#[derive(Clone, Debug, Serialize)]
pub struct WeightWitness {
    pub d: usize,
    pub mu: Vec<Rational>,
    /// max_{|S|<d} |E_μ[f χ_S]|, recomputed from μ.
    pub max_corr: Rational,
    pub mu_ok: bool,
    #[serde(skip)]
    pub psi: PatternMatrixSpec,
    #[serde(skip)]
    pub p: PatternMatrixSpec,
    pub source: String,
}

/// μ orthogonal to f·χ_S for |S| < d when d ≤ degthr(f), else the minimax
/// distribution for degree d − 1.
pub fn weight_witness(f: &BooleanFunction, n: usize, d: usize, mode: Mode) -> Result<WeightWitness> {
    if d == 0 {
        return Err(Error::Malformed("weight witnesses need d ≥ 1".into()));
    }
    let t = f.arity();
    let (raw, source) = match ortho_distribution(f, d, mode)? {
        Some(o) => (o.weights, format!("μ orthogonal to f·χ_S for |S| < {d}")),
        None => {
            let dd = weight_dual_distribution(f, d - 1, mode)?;
            (dd.mu, format!("μ from the minimax LP at degree {}", d - 1))
        }
    };
    // Float solutions can carry round-off; clamp and renormalise so the
    // witness is a distribution in exact arithmetic.
    let clamped: Vec<Rational> =
        raw.iter().map(|v| if v.is_negative() { Rational::zero() } else { v.clone() }).collect();
    let total: Rational = clamped.iter().sum();
    if !total.is_positive() {
        return Err(Error::Numerical("distribution LP returned zero mass".into()));
    }
    let mu: Vec<Rational> = clamped.iter().map(|v| v / &total).collect();
    let mu_ok = mu.iter().all(|v| !v.is_negative()) && mu.iter().sum::<Rational>() == Rational::one();
    let max_corr = DualDistribution::correlation(f, &mu, d - 1);
    let psi: Vec<Rational> = mu.iter().zip(f.table()).map(|(m, &s)| if s == 1 { m.clone() } else { -m }).collect();
    Ok(WeightWitness { d, max_corr, mu_ok, psi: witness_spec(n, t, &psi)?, p: witness_spec(n, t, &mu)?, mu, source })
}

#[derive(Clone, Debug)]
pub struct DiscUpper {
    pub report: BoundReport,
    pub d: usize,
    pub witness: WeightWitness,
}

/// min over d of max{2t/W(f, d−1), (t/n)^d}, the bound on disc(F)².
fn best_upper_degree(f: &BooleanFunction, n: usize, mode: Mode) -> Result<(usize, Rational, Vec<WeightEstimate>)> {
    let t = f.arity();
    let mut best: Option<(usize, Rational)> = None;
    let mut ests = Vec::new();
    for d in 1..=t {
        let w = weight_lower(f, d - 1, mode)?;
        let low = ratio(t, n).pow(d as i32);
        let term = match &w.value {
            Some(v) => low.max(Rational::from_integer(2 * t as i64) / v),
            None => low,
        };
        ests.push(w);
        if best.as_ref().is_none_or(|(_, b)| term < *b) {
            best = Some((d, term));
        }
    }
    let (d, sq) = best.expect("t ≥ 1");
    Ok((d, sq, ests))
}

fn brute_ok(spec: &PatternMatrixSpec) -> bool {
    let (r, c) = (spec.rows() as usize, spec.cols() as usize);
    r.min(c) <= BRUTE_ENUM_MAX && r.max(c) <= BRUTE_OTHER_MAX
}

/// disc(F)² ≤ min_d max{2t/W(f, d−1), (t/n)^d}, using lower estimates of W.
pub fn disc_upper_weight(f: &BooleanFunction, n: usize, mode: Mode) -> Result<DiscUpper> {
    let t = f.arity();
    let fspec = pattern_for(f, n)?;
    let (d, sq, ests) = best_upper_degree(f, n, mode)?;
    let value = sq.to_f64().sqrt();
    let mut r = BoundReport::new("disc-upper", Side::Upper);
    r.function(f).input("n", n).input("d", d).input("value_sq", &sq);
    for (i, w) in ests.iter().enumerate() {
        r.note(format!("W(f, {i}) lower estimate: {}", w.display()));
    }
    r.value = value;
    r.vacuous = value >= 1.0;

    let ww = weight_witness(f, n, d, mode)?;
    r.note(ww.source.clone());
    r.check("μ is a probability distribution", ww.mu_ok, "");
    if let Some(v) = &ests[d - 1].value {
        r.check(
            "max_{|S|<d} |E_μ[f χ_S]|² ≤ 2t/W(f, d−1)",
            &ww.max_corr * &ww.max_corr * v <= Rational::from_integer(2 * t as i64),
            format!("max corr = {}", ww.max_corr),
        );
    } else {
        r.check("E_μ[f χ_S] = 0 for |S| < d", ww.max_corr.is_zero(), format!("{}", ww.max_corr));
    }
    // P∘F = Ψ, so disc_spectral(P, F) = √s·‖Ψ‖ with s = |X||Y|.
    let s = Rational::from_bigint(fspec.entries().into());
    let spectral_sq = &s * spectrum_formula(&ww.psi).top_sq();
    r.check("disc_spectral(P, F)² ≤ value² (exact, formula norm)", spectral_sq <= sq, format!("{spectral_sq} vs {sq}"));
    if numeric_ok(&fspec) {
        let fm = build(&fspec)?;
        let pm = build(&ww.p)?;
        let ds = disc_spectral(&pm, &fm)?;
        r.check("disc_spectral(P, F) ≤ value (SVD)", ds <= value + TOL, format!("{ds:.12} vs {value:.12}"));
        if brute_ok(&fspec) {
            let (db, _) = disc_bruteforce(&pm, &fm)?;
            r.check(
                "disc_P(F) ≤ disc_spectral(P, F)",
                db.to_f64() <= ds + TOL,
                format!("brute {db}, spectral {ds:.12}"),
            );
        }
    }
    Ok(DiscUpper { report: r, d, witness: ww })
}

/// disc(F) ≥ (t/n)^d / (8·W(f, d)), with W from an upper estimate only.
pub fn disc_lower_weight(f: &BooleanFunction, n: usize, d: usize, mode: Mode) -> Result<BoundReport> {
    let t = f.arity();
    if d > t {
        return Err(Error::Malformed(format!("d = {d} exceeds t = {t}")));
    }
    let fspec = pattern_for(f, n)?;
    let w = weight_upper(f, d, mode)?;
    let mut r = BoundReport::new("disc-lower", Side::Lower);
    r.function(f).input("n", n).input("d", d).input("W(f,d)", w.display());
    r.note(format!("W(f, d) upper estimate: {}", w.display()));
    let Some(wv) = w.value.clone() else {
        r.set_exact(Rational::zero());
        r.vacuous = true;
        r.formula_only = true;
        r.note("W(f, d) = ∞: no degree-d sign representation");
        return Ok(r);
    };
    let value = ratio(t, n).pow(d as i32) / (wv * Rational::from_integer(8));
    r.set_exact(value.clone());
    if numeric_ok(&fspec) && brute_ok(&fspec) {
        let (du, _, _) = best_upper_degree(f, n, mode)?;
        let ww = weight_witness(f, n, du, mode)?;
        let fm = build(&fspec)?;
        let pm = build(&ww.p)?;
        let (db, rect) = disc_bruteforce(&pm, &fm)?;
        r.check(
            "disc_P(F) ≥ value for the constructed P",
            db >= value,
            format!("disc_P(F) = {db} on rows {:#x}, cols {:#x}", rect.rows, rect.cols),
        );
        r.check("argmax rectangle attains disc_P(F)", rect.mass(&pm, &fm).abs() == db, "");
    } else {
        r.formula_only = true;
    }
    Ok(r)
}

/// disc(F) ≤ γ + (t/n)^{deg_{1−γ}(f)/2}.
pub fn disc_upper_adeg(f: &BooleanFunction, n: usize, gamma: &Rational, mode: Mode) -> Result<BoundReport> {
    check_unit_interval_open("γ", gamma)?;
    let t = f.arity();
    let fspec = pattern_for(f, n)?;
    let eps = Rational::one() - gamma;
    let d = approx_degree(f, &eps, mode)?;
    let tail = ratio(t, n).to_f64().powf(d as f64 / 2.0);
    let value = gamma.to_f64() + tail;
    let mut r = BoundReport::new("disc-upper-adeg", Side::Upper);
    r.function(f).input("n", n).input("gamma", gamma).input("d", d);
    r.value = value;
    if d % 2 == 0 {
        r.exact = Some(gamma + ratio(t, n).pow(d as i32 / 2));
    }
    r.vacuous = value >= 1.0;
    if d == 0 {
        r.formula_only = true;
        r.note("deg_{1−γ}(f) = 0: the value is at least 1");
        return Ok(r);
    }
    let w = dual_witness(f, &eps, mode)?;
    let psi = witness_spec(n, t, &w.values)?;
    r.note(format!("ψ from the degree-{} dual at ε = 1 − γ; H = sign Ψ, P = |Ψ|", d - 1));
    r.check("⟨F, H∘P⟩ > 1 − γ", w.correlation > eps, format!("{}", w.correlation));
    let s = Rational::from_bigint(fspec.entries().into());
    let ph_sq = &s * spectrum_formula(&psi).top_sq();
    r.check(
        "disc_spectral(P, H) ≤ (t/n)^{d/2}",
        ph_sq <= ratio(t, n).pow(d as i32),
        format!("disc_spectral² = {ph_sq}"),
    );
    if numeric_ok(&fspec) && brute_ok(&fspec) {
        let signs: Vec<Rational> =
            w.values.iter().map(|v| Rational::from_integer(if v.is_negative() { -1 } else { 1 })).collect();
        let hm = build(&PatternMatrixSpec::new(n, t, signs)?)?;
        let mass: Vec<Rational> = w.values.iter().map(|v| v.abs()).collect();
        let pm = build(&witness_spec(n, t, &mass)?)?;
        let fm = build(&fspec)?;
        let (dh, _) = disc_bruteforce(&pm, &hm)?;
        let (df, _) = disc_bruteforce(&pm, &fm)?;
        let ds = disc_spectral(&pm, &hm)?;
        r.check("disc_P(H) ≤ disc_spectral(P, H)", dh.to_f64() <= ds + TOL, format!("{dh} vs {ds:.12}"));
        let chain = &dh + Rational::one() - fm.inner(&hm.hadamard(&pm)?)?;
        r.check("disc_P(F) ≤ disc_P(H) + 1 − ⟨F, H∘P⟩", df <= chain, format!("{df} vs {chain}"));
        r.check("disc_P(F) ≤ value", df.to_f64() <= value + TOL, format!("{df} vs {value:.12}"));
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boolfn::{catalog, CatalogParams};

    fn named(name: &str, t: usize) -> BooleanFunction {
        catalog(name, &CatalogParams { t: Some(t), ..Default::default() }).unwrap()
    }

    fn ints(r: usize, c: usize, v: &[i64]) -> DenseMatrix<Rational> {
        DenseMatrix::from_integers(r, c, v).unwrap()
    }

    /// Independent oracle: every (row subset, column subset) pair.
    fn all_rectangles(l: &DenseMatrix<Rational>, f: &DenseMatrix<Rational>) -> Rational {
        let mut best = Rational::zero();
        for rows in 0u64..1 << l.rows() {
            for cols in 0u64..1 << l.cols() {
                best = best.max(Rectangle { rows, cols }.mass(l, f).abs());
            }
        }
        best
    }

    #[test]
    fn rectangle_search() {
        let j = ints(2, 2, &[1, 1, 1, 1]);
        let u = j.map(|v| v / &Rational::from_integer(4));
        let (v, rect) = disc_bruteforce(&u, &j).unwrap();
        assert_eq!(v, Rational::one());
        assert_eq!(rect, Rectangle { rows: 3, cols: 3 });
        let checker = ints(2, 2, &[1, -1, -1, 1]);
        assert_eq!(disc_bruteforce(&u, &checker).unwrap().0, Rational::new(1, 4));
        let hadamard = ints(2, 2, &[1, 1, 1, -1]);
        assert_eq!(disc_bruteforce(&u, &hadamard).unwrap().0, Rational::new(1, 2));

        let f = named("chi", 1);
        let fm = build(&pattern_for(&f, 2).unwrap()).unwrap();
        let u = fm.map(|_| Rational::new(1, 16));
        let (v, _) = disc_bruteforce(&u, &fm).unwrap();
        assert!(v.to_f64() <= disc_spectral(&u, &fm).unwrap() + TOL);
        assert!(v.to_f64() <= 0.5f64.sqrt() + TOL);
        assert_eq!(v, all_rectangles(&u, &fm));
    }

    #[test]
    fn rectangle_search_matches_enumeration() {
        let mut state = 0x9e37u64;
        for _ in 0..20 {
            let (r, c) = (3 + (state % 3) as usize, 2 + (state % 4) as usize);
            let mut next = || {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                state >> 33
            };
            let mut w: Vec<i64> = (0..r * c).map(|_| (next() % 5) as i64).collect();
            if w.iter().all(|&v| v == 0) {
                w[0] = 1;
            }
            let total: i64 = w.iter().sum();
            let l = ints(r, c, &w).map(|v| v / &Rational::from_integer(total));
            let s: Vec<i64> = (0..r * c).map(|_| if next() % 2 == 0 { 1 } else { -1 }).collect();
            let f = ints(r, c, &s);
            let (v, rect) = disc_bruteforce(&l, &f).unwrap();
            assert_eq!(v, all_rectangles(&l, &f));
            assert_eq!(rect.mass(&l, &f).abs(), v);
        }
    }

    #[test]
    fn measure_validation() {
        let f = ints(2, 2, &[1, 1, 1, 1]);
        assert!(disc_bruteforce(&f, &f).is_err());
        let one = ints(2, 2, &[1, 0, 0, 0]);
        assert!((disc_spectral(&one, &f).unwrap() - 2.0).abs() < 1e-12);
        let j4 = ints(4, 4, &[1; 16]);
        let u = j4.map(|v| v / &Rational::from_integer(16));
        assert!((disc_spectral(&u, &j4).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn upper_examples() {
        let chi = named("chi", 1);
        let r = disc_upper_weight(&chi, 2, Mode::Exact).unwrap();
        assert!((r.report.value - 0.5f64.sqrt()).abs() < 1e-12);
        assert!(r.report.verified(), "{:?}", r.report.failures());

        let or2 = named("or", 2);
        let r = disc_upper_weight(&or2, 4, Mode::Exact).unwrap();
        assert_eq!(r.d, 1);
        assert!((r.report.value - 0.5f64.sqrt()).abs() < 1e-12);
        assert!(r.report.verified(), "{:?}", r.report.failures());

        let c = named("const", 2);
        let r = disc_upper_weight(&c, 4, Mode::Exact).unwrap();
        assert!(r.report.vacuous);
        assert!(r.report.verified(), "{:?}", r.report.failures());
    }

    #[test]
    fn lower_examples() {
        let or2 = named("or", 2);
        let r = disc_lower_weight(&or2, 4, 1, Mode::Exact).unwrap();
        assert_eq!(r.exact, Some(Rational::new(1, 48)));
        assert!(r.verified(), "{:?}", r.failures());
        let r = disc_lower_weight(&named("parity", 2), 4, 1, Mode::Exact).unwrap();
        assert!(r.vacuous);
        assert_eq!(r.exact, Some(Rational::zero()));
        let r = disc_lower_weight(&named("chi", 1), 2, 1, Mode::Exact).unwrap();
        assert_eq!(r.exact, Some(Rational::new(1, 16)));
        assert!(r.verified());
    }

    #[test]
    fn adeg_examples() {
        let or2 = named("or", 2);
        let r = disc_upper_adeg(&or2, 4, &Rational::new(2, 3), Mode::Exact).unwrap();
        assert_eq!(r.exact, Some(Rational::new(7, 6)));
        assert!(r.vacuous);
        assert!(r.verified(), "{:?}", r.failures());
        let p = named("parity", 2);
        let r = disc_upper_adeg(&p, 4, &Rational::new(1, 10), Mode::Exact).unwrap();
        assert_eq!(r.exact, Some(Rational::new(1, 10) + Rational::new(1, 2)));
        assert!(!r.vacuous);
        assert!(r.verified(), "{:?}", r.failures());
    }
}
