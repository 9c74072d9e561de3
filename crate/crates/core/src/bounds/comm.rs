use super::{
    check_unit_interval_open, numeric_ok, pattern_for, ratio, size_rational, weight_lower, BoundReport, Side, TOL,
};
use crate::approx::{approx_degree, dual_witness};
use crate::boolfn::BooleanFunction;
use crate::bounds::disc::weight_witness;
use crate::error::{Error, Result};
use crate::num::{spectral_norm as numeric_norm, DenseMatrix, Mode, Rational};
use crate::pattern::{build, spectral_norm, spectrum_formula, witness_spec, PatternMatrixSpec};

/// log₄((⟨Ψ,F⟩ − 2ε) / (3‖Ψ‖√(|X||Y|))), or `None` when the ratio is not
/// positive.
pub fn gdm_value(correlation: f64, eps: f64, norm: f64, rows: f64, cols: f64) -> Option<f64> {
    let num = correlation - 2.0 * eps;
    if num <= 0.0 || norm <= 0.0 {
        return None;
    }
    Some((num / (3.0 * norm * (rows * cols).sqrt())).log2() / 2.0)
}

/// The bound for an explicit sign matrix F and witness Ψ with ‖Ψ‖₁ = 1.
/// `Ok(None)` reports a vacuous bound.
pub fn gdm_bound(f: &DenseMatrix<Rational>, psi: &DenseMatrix<Rational>, eps: &Rational) -> Result<Option<f64>> {
    if f.rows() != psi.rows() || f.cols() != psi.cols() {
        return Err(Error::Malformed("F and Ψ differ in shape".into()));
    }
    if f.entries().iter().any(|v| v.abs() != Rational::one()) {
        return Err(Error::Malformed("F is not a sign matrix".into()));
    }
    let l1 = psi.entry_l1();
    if l1 != Rational::one() {
        return Err(Error::Malformed(format!("Ψ is not normalised: ‖Ψ‖₁ = {l1}")));
    }
    let corr = f.inner(psi)?;
    let num = &corr - eps * Rational::from_integer(2);
    if !num.is_positive() {
        return Ok(None);
    }
    let norm = numeric_norm(&psi.to_f64())?;
    Ok(gdm_value(corr.to_f64(), eps.to_f64(), norm, f.rows() as f64, f.cols() as f64))
}

/// ‖Ψ‖₁ and ⟨F, Ψ⟩ for pattern matrices: each z ∈ {0,1}^t occurs equally
/// often as x|_V ⊕ w, so both reduce to sums over the cube.
fn pattern_l1_and_corr(f: &BooleanFunction, psi: &PatternMatrixSpec) -> (Rational, Rational) {
    let reps = Rational::from_bigint((psi.entries() >> psi.t()).into());
    let l1: Rational = psi.phi().iter().map(|v| v.abs()).sum();
    let corr: Rational = psi.phi().iter().zip(f.table()).map(|(v, &s)| if s == 1 { v.clone() } else { -v }).sum();
    (&l1 * &reps, &corr * &reps)
}

/// Numerical cross-check on a built Ψ: entrywise l1 and correlation from
/// the matrix, SVD norm against the formula, and the explicit gdm value.
fn numeric_chain(
    r: &mut BoundReport,
    f: &BooleanFunction,
    n: usize,
    psi: &PatternMatrixSpec,
    protocol_eps: &Rational,
    value: f64,
) -> Result<()> {
    let fm = build(&pattern_for(f, n)?)?;
    let pm = build(psi)?;
    let (_, corr) = pattern_l1_and_corr(f, psi);
    r.check("built ‖Ψ‖₁ = 1", pm.entry_l1() == Rational::one(), format!("{}", pm.entry_l1()));
    r.check("built ⟨F,Ψ⟩ equals the cube sum", fm.inner(&pm)? == corr, format!("{corr}"));
    let svd = numeric_norm(&pm.to_f64())?;
    let formula = spectral_norm(psi);
    r.check(
        "SVD ‖Ψ‖ matches the spectrum formula",
        (svd - formula).abs() <= TOL * formula.max(1e-300),
        format!("svd {svd:.6e}, formula {formula:.6e}"),
    );
    match gdm_bound(&fm, &pm, protocol_eps)? {
        Some(g) => {
            r.check("gdm on built matrices ≥ value", g >= value - TOL, format!("gdm {g:.9}, value {value:.9}"));
        }
        None => {
            r.check("gdm on built matrices ≥ value", value <= 0.0, "gdm vacuous");
        }
    }
    Ok(())
}

/// Q*_δ(F) ≥ (1/4)·deg_ε(f)·log(n/t) − (1/2)·log(3/(ε − 2δ)) for the
/// (n, t, f)-pattern matrix F.
pub fn q_lower_adeg(
    f: &BooleanFunction,
    n: usize,
    t: usize,
    eps: &Rational,
    delta: &Rational,
    mode: Mode,
) -> Result<BoundReport> {
    if t != f.arity() {
        return Err(Error::Malformed(format!("t = {t} but f has arity {}", f.arity())));
    }
    if eps.is_negative() || *eps >= Rational::one() {
        return Err(Error::Malformed(format!("ε = {eps} outside [0, 1)")));
    }
    if delta.is_negative() || delta * Rational::from_integer(2) >= *eps {
        return Err(Error::Malformed(format!("need 0 ≤ δ < ε/2, got δ = {delta}, ε = {eps}")));
    }
    let fspec = pattern_for(f, n)?;
    let d = approx_degree(f, eps, mode)?;
    let gap = eps - delta * Rational::from_integer(2);
    let value = d as f64 / 4.0 * ((n / t) as f64).log2() - 0.5 * (3.0 / gap.to_f64()).log2();

    let mut r = BoundReport::new("main-cc", Side::Lower);
    r.function(f).input("n", n).input("eps", eps).input("delta", delta).input("d", d);
    r.input("mode", format!("{mode:?}").to_lowercase());
    r.value = value;
    r.vacuous = value <= 0.0;
    r.note(format!("deg_ε(f) = {d} from the approximation LP"));
    if d == 0 {
        r.formula_only = true;
        r.note("deg_ε(f) = 0: no dual witness exists");
        return Ok(r);
    }

    let w = dual_witness(f, eps, mode)?;
    let bad = w.check(f);
    r.check("ψ is a dual witness for deg_ε(f) ≥ d", bad.is_empty(), bad.join("; "));
    let psi = witness_spec(n, t, &w.values)?;
    r.note(format!("ψ from the degree-{} dual, Ψ the (n, t, 2^-n (n/t)^-t ψ) pattern matrix", d - 1));
    let (l1, corr) = pattern_l1_and_corr(f, &psi);
    r.check("‖Ψ‖₁ = 1", l1 == Rational::one(), format!("{l1}"));
    r.check("⟨F,Ψ⟩ > ε", corr > *eps, format!("⟨F,Ψ⟩ = {corr}"));

    // ‖Ψ‖² ≤ (t/n)^d / s, compared exactly on squares.
    let s = size_rational(n, t);
    let top_sq = spectrum_formula(&psi).top_sq();
    let bound_sq = ratio(t, n).pow(d as i32) / &s;
    r.check("‖Ψ‖ ≤ (t/n)^{d/2}·s^{-1/2}", top_sq <= bound_sq, format!("‖Ψ‖² = {top_sq}, bound² = {bound_sq}"));

    let rows = fspec.rows() as f64;
    let cols = fspec.cols() as f64;
    let bound_norm = bound_sq.to_f64().sqrt();
    match gdm_value(eps.to_f64(), delta.to_f64(), bound_norm, rows, cols) {
        Some(g) => r.check(
            "gdm with ⟨F,Ψ⟩ = ε and the norm bound reproduces the value",
            (g - value).abs() <= TOL,
            format!("{g:.12} vs {value:.12}"),
        ),
        None => r.check("gdm with the norm bound reproduces the value", false, "ratio not positive"),
    };
    let g = gdm_value(corr.to_f64(), delta.to_f64(), spectral_norm(&psi), rows, cols);
    r.check("gdm(F, Ψ, δ) ≥ value", g.is_some_and(|g| g >= value - TOL), format!("gdm {g:?}, value {value:.9}"));
    if numeric_ok(&psi) {
        numeric_chain(&mut r, f, n, &psi, delta, value)?;
    }
    Ok(r)
}

/// Q*_{1/2 − γ/2}(F) ≥ (1/4)·min{d·log(n/t), log(W(f, d−1)/2t)} − (1/2)·log(3/γ),
/// with a lower estimate of W(f, d−1).
pub fn q_lower_weight(
    f: &BooleanFunction,
    n: usize,
    t: usize,
    d: usize,
    gamma: &Rational,
    mode: Mode,
) -> Result<BoundReport> {
    if t != f.arity() {
        return Err(Error::Malformed(format!("t = {t} but f has arity {}", f.arity())));
    }
    if d == 0 || d > t {
        return Err(Error::Malformed(format!("d = {d} outside 1..={t}")));
    }
    check_unit_interval_open("γ", gamma)?;
    let fspec = pattern_for(f, n)?;
    let w = weight_lower(f, d - 1, mode)?;
    let first = d as f64 * ((n / t) as f64).log2();
    let second = match &w.value {
        Some(v) => (v.to_f64() / (2 * t) as f64).log2(),
        None => f64::INFINITY,
    };
    let value = 0.25 * first.min(second) - 0.5 * (3.0 / gamma.to_f64()).log2();

    let mut r = BoundReport::new("small-bias", Side::Lower);
    r.function(f).input("n", n).input("d", d).input("gamma", gamma);
    r.input("W(f,d-1)", w.display());
    r.value = value;
    r.vacuous = value <= 0.0;
    r.note(format!("W(f, d−1) lower estimate: {}", w.display()));

    let ww = weight_witness(f, n, d, mode)?;
    r.note(ww.source.clone());
    r.check("μ is a probability distribution", ww.mu_ok, "");
    if let Some(v) = &w.value {
        r.check(
            "max_{|S|<d} |E_μ[f χ_S]|² ≤ 2t/W(f, d−1)",
            &ww.max_corr * &ww.max_corr * v <= Rational::from_integer(2 * t as i64),
            format!("max corr = {}", ww.max_corr),
        );
    } else {
        r.check("E_μ[f χ_S] = 0 for |S| < d", ww.max_corr.is_zero(), format!("{}", ww.max_corr));
    }
    let (l1, corr) = pattern_l1_and_corr(f, &ww.psi);
    r.check("‖Ψ‖₁ = 1", l1 == Rational::one(), format!("{l1}"));
    r.check("⟨F,Ψ⟩ = 1", corr == Rational::one(), format!("{corr}"));
    let s = size_rational(n, t);
    let top_sq = spectrum_formula(&ww.psi).top_sq();
    let low = ratio(t, n).pow(d as i32);
    let bound_sq = match &w.value {
        Some(v) => low.max(Rational::from_integer(2 * t as i64) / v),
        None => low,
    } / &s;
    r.check(
        "‖Ψ‖ ≤ max{(t/n)^{d/2}, (2t/W)^{1/2}}·s^{-1/2}",
        top_sq <= bound_sq,
        format!("‖Ψ‖² = {top_sq}, bound² = {bound_sq}"),
    );
    let protocol_eps = (Rational::one() - gamma) / Rational::from_integer(2);
    let g = gdm_value(1.0, protocol_eps.to_f64(), spectral_norm(&ww.psi), fspec.rows() as f64, fspec.cols() as f64);
    r.check(
        "gdm(F, Ψ, 1/2 − γ/2) ≥ value",
        g.is_some_and(|g| g >= value - TOL),
        format!("gdm {g:?}, value {value:.9}"),
    );
    if numeric_ok(&ww.psi) {
        numeric_chain(&mut r, f, n, &ww.psi, &protocol_eps, value)?;
    }
    Ok(r)
}
