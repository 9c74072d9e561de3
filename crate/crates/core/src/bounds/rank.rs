use serde::Serialize;

use super::{check_unit_interval_open, numeric_ok, pattern_for, size_rational, weight_lower, BoundReport, Side, TOL};
use crate::approx::{approx_degree, best_approx, dual_witness};
use crate::boolfn::{degree, min_depth_tree, BooleanFunction};
use crate::bounds::disc::weight_witness;
use crate::error::{Error, Result};
use crate::num::{numerical_rank, singular_values, spectral_norm as numeric_norm, DenseMatrix, Mode, Rational};
use crate::pattern::{build, build_f64, rank_exact, spectral_norm, spectrum_formula, witness_spec, PatternMatrixSpec};
use crate::protocols::{ceil_log2, det_cost_bound, det_exhaustive, MAX_EXHAUSTIVE_PAIRS};

/// (⟨F,Ψ⟩ − ε‖Ψ‖₁)/‖Ψ‖ ≤ ‖F‖_{Σ,ε}. Nonpositive values are vacuous.
pub fn trace_norm_lower(f: &DenseMatrix<Rational>, psi: &DenseMatrix<Rational>, eps: &Rational) -> Result<f64> {
    if psi.is_zero() {
        return Err(Error::Malformed("Ψ = 0".into()));
    }
    let num = f.inner(psi)? - eps * psi.entry_l1();
    Ok(num.to_f64() / numeric_norm(&psi.to_f64())?)
}

/// The pattern matrix of an optimal degree-d approximant, d = deg_ε(f).
#[derive(Clone, Debug, Serialize)]
pub struct RankUpper {
    pub d: usize,
    /// ‖F − A‖_∞ = max_x |f(x) − φ(x)|, exact.
    pub error: Rational,
    pub rank: u128,
    pub trace_norm: f64,
    pub numeric_rank: Option<usize>,
    pub numeric_trace_norm: Option<f64>,
    #[serde(skip)]
    pub spec: PatternMatrixSpec,
}

pub fn rank_upper_construction(f: &BooleanFunction, n: usize, eps: &Rational, mode: Mode) -> Result<RankUpper> {
    let t = f.arity();
    let d = approx_degree(f, eps, mode)?;
    let r = best_approx(f, d, mode)?;
    let phi: Vec<Rational> = (0..1usize << t).map(|x| r.eval(x)).collect();
    let spec = PatternMatrixSpec::new(n, t, phi)?;
    let sp = spectrum_formula(&spec);
    let (numeric_rank, numeric_trace_norm) = if numeric_ok(&spec) {
        let sv = singular_values(&build_f64(&spec)?)?;
        (Some(numerical_rank(&sv)), Some(sv.iter().sum()))
    } else {
        (None, None)
    };
    Ok(RankUpper {
        d,
        error: r.achieved_error(f),
        rank: sp.rank(),
        trace_norm: sp.trace_norm(),
        numeric_rank,
        numeric_trace_norm,
        spec,
    })
}

fn attach_upper(
    r: &mut BoundReport,
    f: &BooleanFunction,
    n: usize,
    eps: &Rational,
    value: &Rational,
    trace_lower: Option<f64>,
    mode: Mode,
) -> Result<RankUpper> {
    let up = rank_upper_construction(f, n, eps, mode)?;
    r.input("rank_A", up.rank);
    r.note(format!("A: pattern matrix of the optimal degree-{} approximant, error {}", up.d, up.error));
    r.check("‖F − A‖_∞ ≤ ε", up.error <= *eps, format!("{} vs {eps}", up.error));
    r.check("value ≤ rank A", *value <= Rational::from_bigint(up.rank.into()), format!("rank A = {}", up.rank));
    if let Some(tl) = trace_lower {
        r.check(
            "trace-norm bound ≤ ‖A‖_Σ",
            tl <= up.trace_norm * (1.0 + TOL) + TOL,
            format!("{tl:.9} vs {:.9}", up.trace_norm),
        );
    }
    if let Some(nr) = up.numeric_rank {
        r.check("numerical rank A = formula rank", nr as u128 == up.rank, format!("{nr}"));
    }
    Ok(up)
}

fn attach_rank_f(r: &mut BoundReport, fspec: &PatternMatrixSpec, value: &Rational) -> Result<()> {
    let rk = rank_exact(fspec);
    r.input("rank_F", rk);
    r.check("value ≤ rank F", *value <= Rational::from_bigint(rk.into()), format!("rank F = {rk}"));
    if numeric_ok(fspec) {
        let nr = numerical_rank(&singular_values(&build_f64(fspec)?)?);
        r.check("numerical rank F = formula rank", nr as u128 == rk, format!("{nr}"));
    }
    Ok(())
}

/// rk_δ F ≥ ((ε − δ)/(1 + δ))²·(n/t)^{deg_ε(f)} for 0 ≤ δ ≤ ε < 1.
pub fn rank_bounded_error(
    f: &BooleanFunction,
    n: usize,
    eps: &Rational,
    delta: &Rational,
    mode: Mode,
) -> Result<BoundReport> {
    let t = f.arity();
    if delta.is_negative() || delta > eps || *eps >= Rational::one() {
        return Err(Error::Malformed(format!("need 0 ≤ δ ≤ ε < 1, got ε = {eps}, δ = {delta}")));
    }
    let fspec = pattern_for(f, n)?;
    let d = approx_degree(f, eps, mode)?;
    let one = Rational::one();
    let block = Rational::from_integer((n / t) as i64);
    let value = ((eps - delta) / (&one + delta)).pow(2) * block.pow(d as i32);
    let mut r = BoundReport::new("rank-bounded-error", Side::Lower);
    r.function(f).input("n", n).input("eps", eps).input("delta", delta).input("d", d);
    r.set_exact(value.clone());
    // Every nonzero matrix has rank ≥ 1.
    r.vacuous = value <= one;

    let mut trace_lower = None;
    if d >= 1 {
        let w = dual_witness(f, eps, mode)?;
        let psi = witness_spec(n, t, &w.values)?;
        r.note(format!("ψ from the degree-{} dual at ε", d - 1));
        let s = size_rational(n, t);
        let norm = spectral_norm(&psi);
        let tl = (&w.correlation - delta).to_f64() / norm;
        let claimed = (eps - delta).to_f64() * block.to_f64().powf(d as f64 / 2.0) * s.to_f64().sqrt();
        r.check(
            "‖F‖_{Σ,δ} ≥ (ε − δ)(n/t)^{d/2}√s via the witness",
            tl >= claimed * (1.0 - TOL),
            format!("{tl:.9} vs {claimed:.9}"),
        );
        let chain = tl * tl / (s.to_f64() * (&one + delta).to_f64().powi(2));
        r.check(
            "rk_δ ≥ ‖F‖²_{Σ,δ} / Σ(|F_ij| + δ)² ≥ value",
            chain >= value.to_f64() * (1.0 - TOL),
            format!("{chain:.9} vs {:.9}", value.to_f64()),
        );
        if numeric_ok(&fspec) {
            let num = trace_norm_lower(&build(&fspec)?, &build(&psi)?, delta)?;
            r.check(
                "trace_norm_lower on built matrices",
                (num - tl).abs() <= TOL * tl.abs().max(1.0),
                format!("{num:.9}"),
            );
        }
        trace_lower = Some(tl);
    } else {
        r.note("deg_ε(f) = 0: no witness; value checked against ranks only");
    }
    attach_rank_f(&mut r, &fspec, &value)?;
    attach_upper(&mut r, f, n, delta, &value, trace_lower, mode)?;
    Ok(r)
}

/// rk_{1−γ} F ≥ (γ/(2−γ))²·min{(n/t)^d, W(f, d−1)/2t} with a lower estimate
/// of W.
pub fn rank_small_bias(f: &BooleanFunction, n: usize, d: usize, gamma: &Rational, mode: Mode) -> Result<BoundReport> {
    let t = f.arity();
    if d == 0 || d > t {
        return Err(Error::Malformed(format!("d = {d} outside 1..={t}")));
    }
    check_unit_interval_open("γ", gamma)?;
    let fspec = pattern_for(f, n)?;
    let w = weight_lower(f, d - 1, mode)?;
    let two = Rational::from_integer(2);
    let block = Rational::from_integer((n / t) as i64);
    let mut m = block.pow(d as i32);
    if let Some(v) = &w.value {
        m = m.min(v / Rational::from_integer(2 * t as i64));
    }
    let value = (gamma / (&two - gamma)).pow(2) * m;
    let mut r = BoundReport::new("rank-small-bias", Side::Lower);
    r.function(f).input("n", n).input("d", d).input("gamma", gamma).input("W(f,d-1)", w.display());
    r.set_exact(value.clone());
    r.vacuous = value <= Rational::one();

    let ww = weight_witness(f, n, d, mode)?;
    r.note(ww.source.clone());
    let s = size_rational(n, t);
    let norm = spectral_norm(&ww.psi);
    let tl = gamma.to_f64() / norm;
    let chain = tl * tl / (s.to_f64() * (&two - gamma).to_f64().powi(2));
    r.check(
        "rk_{1−γ} ≥ (γ/‖Ψ‖)² / Σ(|F_ij| + 1 − γ)² ≥ value",
        chain >= value.to_f64() * (1.0 - TOL),
        format!("{chain:.9} vs {:.9}", value.to_f64()),
    );
    if numeric_ok(&fspec) {
        let eps = Rational::one() - gamma;
        let num = trace_norm_lower(&build(&fspec)?, &build(&ww.psi)?, &eps)?;
        r.check("trace_norm_lower on built matrices", (num - tl).abs() <= TOL * tl.abs().max(1.0), format!("{num:.9}"));
    }
    attach_rank_f(&mut r, &fspec, &value)?;
    attach_upper(&mut r, f, n, &(Rational::one() - gamma), &value, Some(tl), mode)?;
    Ok(r)
}

/// Both rank bounds for one instance.
#[allow(clippy::too_many_arguments)]
pub fn rank_bounds(
    f: &BooleanFunction,
    n: usize,
    eps: &Rational,
    delta: &Rational,
    d: usize,
    gamma: &Rational,
    mode: Mode,
) -> Result<(BoundReport, BoundReport)> {
    Ok((rank_bounded_error(f, n, eps, delta, mode)?, rank_small_bias(f, n, d, gamma, mode)?))
}

/// rk F ≥ (n/t)^{deg f}, with the decision-tree protocol's cost attached as
/// the deterministic upper bound.
pub fn logrank_check(f: &BooleanFunction, n: usize) -> Result<BoundReport> {
    let t = f.arity();
    let fspec = pattern_for(f, n)?;
    let deg = degree(f);
    let lower = ((n / t) as u128).pow(deg as u32);
    let rk = rank_exact(&fspec);
    let mut r = BoundReport::new("log-rank", Side::Lower);
    r.function(f).input("n", n).input("d", deg).input("rank_F", rk);
    r.set_exact(Rational::from_bigint(lower.into()));
    r.check("rank F ≥ (n/t)^{deg f}", rk >= lower, format!("{rk} ≥ {lower}"));
    if numeric_ok(&fspec) {
        let nr = numerical_rank(&singular_values(&build_f64(&fspec)?)?);
        r.check("numerical rank F = formula rank", nr as u128 == rk, format!("{nr}"));
    }
    let tree = min_depth_tree(f);
    let bound = det_cost_bound(tree.depth(), n, t);
    r.input("dt", tree.depth()).input("D_upper", bound);
    r.note(format!(
        "decision tree of depth {} ({}); D(F) ≤ {bound}",
        tree.depth(),
        if tree.optimal { "optimal" } else { "greedy" }
    ));
    // D(F) ≥ log₂ rank F, so the protocol's cost must reach ⌈log₂ rank F⌉.
    let log_rank = ceil_log2(rk as usize);
    r.check("⌈log₂ rank F⌉ ≤ protocol cost bound", log_rank <= bound, format!("{log_rank} ≤ {bound}"));
    if fspec.entries() <= MAX_EXHAUSTIVE_PAIRS {
        let s = det_exhaustive(&tree.tree, f, n)?;
        r.check("decision-tree protocol correct on all inputs", s.all_correct, format!("{} pairs", s.pairs));
        r.check("protocol cost ≤ dt·(⌈log(n/t)⌉ + 2)", s.max_cost <= bound, format!("{} ≤ {bound}", s.max_cost));
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

    fn q(a: i64, b: i64) -> Rational {
        Rational::new(a, b)
    }

    #[test]
    fn bounded_error_examples() {
        let f = named("or", 2);
        let r = rank_bounded_error(&f, 4, &q(1, 3), &q(1, 3), Mode::Exact).unwrap();
        assert_eq!(r.exact, Some(Rational::zero()));
        assert!(r.vacuous);
        let r = rank_bounded_error(&f, 4, &q(1, 3), &q(0, 1), Mode::Exact).unwrap();
        assert_eq!(r.exact, Some(q(4, 9)));
        assert_eq!(r.inputs["rank_F"], "9");
        assert!(r.verified(), "{:?}", r.failures());
        let r = rank_bounded_error(&f, 4, &q(1, 3), &q(1, 6), Mode::Exact).unwrap();
        assert!(r.verified(), "{:?}", r.failures());
        assert!(rank_bounded_error(&f, 4, &q(1, 3), &q(1, 2), Mode::Exact).is_err());
    }

    #[test]
    fn small_bias_examples() {
        let p = named("parity", 2);
        let r = rank_small_bias(&p, 4, 2, &q(1, 2), Mode::Exact).unwrap();
        assert_eq!(r.exact, Some(q(4, 9)));
        assert!(r.verified(), "{:?}", r.failures());
        let f = named("or", 2);
        let r = rank_small_bias(&f, 4, 1, &q(2, 3), Mode::Exact).unwrap();
        assert!(r.verified(), "{:?}", r.failures());
    }

    #[test]
    fn upper_construction() {
        let f = named("or", 2);
        let a = rank_upper_construction(&f, 4, &q(1, 2), Mode::Exact).unwrap();
        assert_eq!(a.d, 1);
        assert_eq!(a.error, q(1, 2));
        assert!(a.rank <= 5);
        assert_eq!(a.numeric_rank.map(|r| r as u128), Some(a.rank));
        let exact = rank_upper_construction(&f, 4, &q(0, 1), Mode::Exact).unwrap();
        assert_eq!(exact.rank, 9);
        assert!(exact.error.is_zero());
        let p = rank_upper_construction(&named("parity", 3), 6, &q(9, 10), Mode::Exact).unwrap();
        assert_eq!(p.d, 3);
    }

    #[test]
    fn trace_norm_lower_examples() {
        let f = named("or", 2);
        let fm = build(&pattern_for(&f, 4).unwrap()).unwrap();
        let total = fm.frobenius_sq();
        let psi = fm.map(|v| v / &total);
        let v = trace_norm_lower(&fm, &psi, &q(0, 1)).unwrap();
        let sv: f64 = singular_values(&fm.to_f64()).unwrap().iter().sum();
        assert!(v <= sv + TOL);
        assert!(trace_norm_lower(&fm, &fm.map(|_| Rational::zero()), &q(0, 1)).is_err());
        assert!(trace_norm_lower(&fm, &psi, &q(1, 1)).unwrap() <= 0.0);
    }

    #[test]
    fn logrank_examples() {
        let r = logrank_check(&named("or", 2), 4).unwrap();
        assert_eq!(r.inputs["rank_F"], "9");
        assert_eq!(r.exact, Some(Rational::from_integer(4)));
        assert!(r.verified(), "{:?}", r.failures());
        let r = logrank_check(&named("const", 2), 4).unwrap();
        assert_eq!(r.inputs["rank_F"], "1");
        assert!(r.verified());
        let r = logrank_check(&named("parity", 2), 4).unwrap();
        assert!(r.verified());
    }
}
