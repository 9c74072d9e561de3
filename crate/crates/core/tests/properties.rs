use patmat::approx::{best_approx, exact_dual, weight_int_upper, weight_real};
use patmat::boolfn::{degree, min_depth_tree, BooleanFunction};
use patmat::bounds::{disc_bruteforce, disc_spectral};
use patmat::num::{numerical_rank, singular_values, DenseMatrix, Mode, Rational};
use patmat::pattern::{build, build_f64, project, spectrum_formula, ColumnIndex, PatternMatrixSpec};
use patmat::protocols::{det_cost_bound, det_protocol, ProtocolInput};
use proptest::prelude::*;

fn function(t: usize, bits: u64) -> BooleanFunction {
    BooleanFunction::from_truth(t, |x| bits >> x & 1 == 1).unwrap()
}

fn small_phi() -> impl Strategy<Value = (usize, usize, Vec<Rational>)> {
    (1usize..=2, 2usize..=3).prop_flat_map(|(t, b)| {
        proptest::collection::vec((-6i64..=6, 1i64..=5), 1 << t)
            .prop_map(move |v| (t * b, t, v.into_iter().map(|(p, q)| Rational::new(p, q)).collect()))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn spectrum_accounts_for_frobenius_and_rank((n, t, phi) in small_phi()) {
        let spec = PatternMatrixSpec::new(n, t, phi).unwrap();
        let s = spectrum_formula(&spec);
        let m = build(&spec).unwrap();
        prop_assert_eq!(s.frobenius_sq(), m.frobenius_sq());
        let nr = numerical_rank(&singular_values(&build_f64(&spec).unwrap()).unwrap());
        prop_assert_eq!(nr as u128, s.rank());
    }

    #[test]
    fn error_profile_is_monotone_and_dual_tight(t in 1usize..=4, bits in any::<u64>()) {
        let f = function(t, bits & ((1u64 << (1 << t)) - 1));
        let mut prev = Rational::from_integer(2);
        for d in 0..=t {
            let (r, w) = exact_dual(&f, d, Mode::Exact).unwrap();
            prop_assert!(r.value <= prev);
            prop_assert_eq!(r.achieved_error(&f), r.value.clone());
            if let Some(w) = w {
                prop_assert_eq!(w.correlation.clone(), r.value.clone());
                prop_assert!(w.check(&f).iter().all(|m| m.starts_with("correlation")));
            }
            prev = r.value;
        }
        prop_assert!(best_approx(&f, degree(&f), Mode::Exact).unwrap().value.is_zero());
    }

    #[test]
    fn rounding_certificate_sign_represents(t in 1usize..=3, bits in any::<u64>()) {
        let f = function(t, bits & ((1u64 << (1 << t)) - 1));
        for d in 0..=t {
            let Some(wr) = weight_real(&f, d, Mode::Exact).unwrap().value else { continue };
            let (c, _) = weight_int_upper(&f, d, Mode::Exact).unwrap();
            prop_assert!(c.sign_represents(&f));
            prop_assert!(wr <= Rational::from_integer(c.weight() as i64));
        }
    }

    #[test]
    fn decision_tree_protocol_is_correct(
        t in 1usize..=3,
        bits in any::<u64>(),
        x in any::<u64>(),
        digits in proptest::collection::vec(0usize..2, 3),
        w in 0usize..8,
    ) {
        let f = function(t, bits & ((1u64 << (1 << t)) - 1));
        let n = 2 * t;
        let column = ColumnIndex { v_digits: digits[..t].to_vec(), w: w % (1 << t) };
        let x = (x as usize) & ((1 << n) - 1);
        let z = project(x, &column, n, t) ^ column.w;
        let tree = min_depth_tree(&f);
        let tr = det_protocol(&tree.tree, &ProtocolInput { x, column }, n, t).unwrap();
        prop_assert_eq!(tr.output, f.eval(z));
        prop_assert!(tr.cost <= det_cost_bound(tree.depth(), n, t));
    }

    #[test]
    fn rectangle_search_is_below_spectral_bound(
        weights in proptest::collection::vec(1i64..=9, 16),
        signs in proptest::collection::vec(any::<bool>(), 16),
    ) {
        let total: i64 = weights.iter().sum();
        let lambda = DenseMatrix::new(4, 4, weights.iter().map(|&v| Rational::new(v, total)).collect()).unwrap();
        let f = DenseMatrix::new(4, 4, signs.iter().map(|&s| Rational::from_integer(if s { -1 } else { 1 })).collect()).unwrap();
        let (brute, rect) = disc_bruteforce(&lambda, &f).unwrap();
        prop_assert_eq!(rect.mass(&lambda, &f).abs(), brute.clone());
        prop_assert!(brute.to_f64() <= disc_spectral(&lambda, &f).unwrap() + 1e-9);
    }
}
