//! Frozen values. The spectra and small E values are also derived by hand in
//! the comments; the rest were produced once by the LP and pinned.

use patmat::approx::{approx_degree, e_profile, threshold_degree, weight_bruteforce, weight_real, BRUTE_MAX_CAP};
use patmat::boolfn::{catalog, BooleanFunction, CatalogParams};
use patmat::num::{Mode, Rational};
use patmat::pattern::{spectrum_formula, PatternMatrixSpec};

fn f(name: &str, t: Option<usize>, k: Option<usize>, m: Option<usize>) -> BooleanFunction {
    catalog(name, &CatalogParams { t, k, m, seed: 0 }).unwrap()
}

fn profile(g: &BooleanFunction) -> Vec<String> {
    e_profile(g, Mode::Exact).unwrap().iter().map(|r| r.value.to_string()).collect()
}

#[test]
fn e_profiles() {
    // MAJ₃: (χ₁ + χ₂ + χ₃)/2 takes values ±1/2, ±3/2, so E(1) ≤ 1/2.
    assert_eq!(profile(&f("maj", Some(3), None, None)), ["1", "1/2", "1/2", "0"]);
    assert_eq!(profile(&f("and", Some(3), None, None)), ["1", "2/3", "1/4", "0"]);
    assert_eq!(profile(&f("omb", Some(3), None, None)), ["1", "2/3", "1/4", "0"]);
    assert_eq!(profile(&f("omb", Some(4), None, None)), ["1", "4/5", "1/3", "1/8", "0"]);
    assert_eq!(profile(&f("thr", Some(4), Some(2), None)), ["1", "2/3", "5/9", "3/8", "0"]);
    assert_eq!(profile(&f("mp", None, Some(2), Some(2))), ["1", "1", "1/3", "1/8", "0"]);
}

#[test]
fn degrees() {
    let third = Rational::new(1, 3);
    let mp = f("mp", None, Some(2), Some(2));
    // E(MP, 2) = 1/3 exactly, so the tie resolves to degree 2.
    assert_eq!(approx_degree(&mp, &third, Mode::Exact).unwrap(), 2);
    assert_eq!(threshold_degree(&mp, Mode::Exact).unwrap(), 2);
    assert_eq!(approx_degree(&f("maj", Some(3), None, None), &third, Mode::Exact).unwrap(), 3);
    assert_eq!(threshold_degree(&f("omb", Some(4), None, None), Mode::Exact).unwrap(), 1);
}

#[test]
fn weights() {
    let omb = f("omb", Some(3), None, None);
    assert_eq!(weight_bruteforce(&omb, 1, BRUTE_MAX_CAP).unwrap().weight(), Some(5));
    assert_eq!(weight_real(&omb, 1, Mode::Exact).unwrap().value, Some(Rational::from_integer(5)));
    // Raising the degree lowers the real relaxation but not the integer optimum.
    assert_eq!(weight_real(&omb, 2, Mode::Exact).unwrap().value, Some(Rational::from_integer(3)));
    assert_eq!(weight_bruteforce(&omb, 2, BRUTE_MAX_CAP).unwrap().weight(), Some(5));
    let parity = f("parity", Some(3), None, None);
    assert_eq!(weight_real(&parity, 2, Mode::Exact).unwrap().value, None);
    assert_eq!(weight_bruteforce(&parity, 3, BRUTE_MAX_CAP).unwrap().weight(), Some(1));
}

fn lines(g: &BooleanFunction, n: usize) -> Vec<(String, u128)> {
    let spec = PatternMatrixSpec::from_function(n, g.arity(), g).unwrap();
    spectrum_formula(&spec).entries.iter().map(|e| (e.sigma_sq.to_string(), e.multiplicity)).collect()
}

#[test]
fn spectra() {
    // MAJ₃ has φ̂ = 1/2 on singletons and −1/2 on [3]; s = 2⁹·8 = 4096, so
    // σ² = 4096·(1/4)·(1/2) = 512 six times and 4096·(1/4)·(1/8) = 128 eight times.
    assert_eq!(lines(&f("maj", Some(3), None, None), 6), [("512".into(), 6), ("128".into(), 8)]);
    let mp = f("mp", None, Some(2), Some(2));
    let expect: Vec<(String, u128)> = [("4608", 8), ("2304", 8), ("1024", 1), ("256", 16), ("128", 32), ("64", 16)]
        .iter()
        .map(|(s, m)| (s.to_string(), *m))
        .collect();
    assert_eq!(lines(&mp, 8), expect);
    // A constant φ has only the empty set: one value, σ² = s = 2⁶·4.
    assert_eq!(lines(&f("const", Some(2), None, None), 4), [("256".into(), 1)]);
}
