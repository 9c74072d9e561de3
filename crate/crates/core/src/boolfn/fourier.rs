//! Fourier transform over Z₂ᵗ with exact coefficients.

use super::BooleanFunction;
use crate::error::{malformed, Result};
use crate::num::Rational;

/// Coefficients f̂(S) = 2^{−t} Σ_x f(x) χ_S(x), stored densely by mask S.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierSpectrum {
    arity: usize,
    coeffs: Vec<Rational>,
}

impl FourierSpectrum {
    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn coeff(&self, s: usize) -> &Rational {
        &self.coeffs[s]
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn nonzero(&self) -> impl Iterator<Item = (usize, &Rational)> {
        self.coeffs.iter().enumerate().filter(|(_, c)| !c.is_zero())
    }

    /// max{|S| : f̂(S) ≠ 0}, or 0 for the zero function.
    pub fn degree(&self) -> usize {
        self.nonzero().map(|(s, _)| s.count_ones() as usize).max().unwrap_or(0)
    }

    /// Σ_S f̂(S)².
    pub fn parseval_sum(&self) -> Rational {
        self.coeffs.iter().map(|c| c * c).sum()
    }

    pub fn max_abs(&self) -> Rational {
        self.coeffs.iter().map(|c| c.abs()).max().unwrap_or_else(Rational::zero)
    }
}

/// In-place unnormalised Walsh–Hadamard butterfly.
fn wht<T: Clone>(v: &mut [T], add: impl Fn(&T, &T) -> T, sub: impl Fn(&T, &T) -> T) {
    let mut h = 1;
    while h < v.len() {
        for block in (0..v.len()).step_by(2 * h) {
            for i in block..block + h {
                let (a, b) = (v[i].clone(), v[i + h].clone());
                v[i] = add(&a, &b);
                v[i + h] = sub(&a, &b);
            }
        }
        h *= 2;
    }
}

pub fn fourier(f: &BooleanFunction) -> FourierSpectrum {
    let mut v: Vec<i64> = f.table().iter().map(|&x| x as i64).collect();
    wht(&mut v, |a, b| a + b, |a, b| a - b);
    let scale = 1i64 << f.arity();
    FourierSpectrum { arity: f.arity(), coeffs: v.into_iter().map(|s| Rational::new(s, scale)).collect() }
}

/// Fourier transform of an arbitrary rational table on {0,1}^t.
pub fn fourier_of_table(arity: usize, table: &[Rational]) -> Result<FourierSpectrum> {
    if table.len() != 1 << arity {
        return malformed(format!("table of length {} for arity {arity}", table.len()));
    }
    let mut v = table.to_vec();
    wht(&mut v, |a, b| a + b, |a, b| a - b);
    let scale = Rational::new(1, 1i64 << arity);
    Ok(FourierSpectrum { arity, coeffs: v.into_iter().map(|c| c * &scale).collect() })
}

/// Σ_S f̂(S) χ_S(x) for every x.
pub fn inverse_fourier(spec: &FourierSpectrum) -> Vec<Rational> {
    let mut v = spec.coeffs.clone();
    wht(&mut v, |a, b| a + b, |a, b| a - b);
    v
}

pub fn degree(f: &BooleanFunction) -> usize {
    fourier(f).degree()
}

/// Subset masks of size at most `d`, ordered by size then by mask value.
pub fn low_degree_masks(t: usize, d: usize) -> Vec<usize> {
    let mut masks: Vec<usize> = (0..1usize << t).filter(|s| s.count_ones() as usize <= d).collect();
    masks.sort_by_key(|&s| (s.count_ones(), s));
    masks
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boolfn::{catalog, character, CatalogParams};
    use proptest::prelude::*;

    fn direct(f: &BooleanFunction, s: usize) -> Rational {
        let sum: i64 = (0..f.table().len()).map(|x| (f.eval(x) * character(s, x)) as i64).sum();
        Rational::new(sum, 1 << f.arity())
    }

    #[test]
    fn parity_constant_and_or2() {
        let par = BooleanFunction::from_truth(4, |x| x.count_ones() % 2 == 1).unwrap();
        let spec = fourier(&par);
        assert_eq!(spec.nonzero().map(|(s, c)| (s, c.clone())).collect::<Vec<_>>(), vec![(15, Rational::one())]);
        assert_eq!(degree(&par), 4);

        let one = BooleanFunction::constant(3, 1).unwrap();
        assert_eq!(fourier(&one).nonzero().count(), 1);
        assert_eq!(*fourier(&one).coeff(0), Rational::one());
        assert_eq!(degree(&one), 0);

        let or2 = BooleanFunction::from_truth(2, |x| x != 0).unwrap();
        let h = Rational::new(1, 2);
        assert_eq!(fourier(&or2).coeffs(), &[-h.clone(), h.clone(), h.clone(), h]);
        assert_eq!(degree(&or2), 2);
    }

    #[test]
    fn masks_by_degree() {
        assert_eq!(low_degree_masks(3, 1), vec![0, 1, 2, 4]);
        assert_eq!(low_degree_masks(2, 2), vec![0, 1, 2, 3]);
    }

    proptest! {
        #[test]
        fn transform_matches_direct_sum_and_inverts(t in 1usize..=6, seed in any::<u64>()) {
            let f = catalog("random", &CatalogParams { t: Some(t), seed, ..Default::default() }).unwrap();
            let spec = fourier(&f);
            for s in 0..1usize << t {
                prop_assert_eq!(spec.coeff(s), &direct(&f, s));
            }
            prop_assert_eq!(inverse_fourier(&spec), f.rational_table());
            prop_assert_eq!(spec.parseval_sum(), Rational::one());
            // max |f̂(S)| ≤ 2^{-t} Σ|f(x)| = 1, with equality only for ±χ_S.
            let max = spec.max_abs();
            prop_assert!(max <= Rational::one());
            if max == Rational::one() {
                prop_assert_eq!(spec.nonzero().count(), 1);
            }
        }

        #[test]
        fn rational_tables_obey_parseval(t in 1usize..=5, vals in proptest::collection::vec(-8i64..8, 32)) {
            let table: Vec<Rational> = vals[..1 << t].iter().map(|&v| Rational::new(v, 3)).collect();
            let spec = fourier_of_table(t, &table).unwrap();
            let energy: Rational = table.iter().map(|v| v * v).sum::<Rational>() * Rational::new(1, 1 << t);
            prop_assert_eq!(spec.parseval_sum(), energy);
            let mass: Rational = table.iter().map(|v| v.abs()).sum::<Rational>() * Rational::new(1, 1 << t);
            prop_assert!(spec.max_abs() <= mass);
            prop_assert_eq!(inverse_fourier(&spec), table);
        }
    }
}
