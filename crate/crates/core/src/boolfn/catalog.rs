use rand::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;

use super::{BooleanFunction, MAX_ARITY};
use crate::error::{Error, Result};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CatalogParams {
    pub t: Option<usize>,
    pub k: Option<usize>,
    pub m: Option<usize>,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CatalogSpec {
    Or(usize),
    And(usize),
    Parity(usize),
    /// −1 iff more than half the inputs are 1.
    Maj(usize),
    /// −1 iff at least k inputs are 1.
    Thr {
        t: usize,
        k: usize,
    },
    /// OR of m disjoint ANDs of fan-in k; block i holds variables ik+1..ik+k.
    Mp {
        m: usize,
        k: usize,
    },
    /// sign(1 + Σ_i (−2)^i x_i).
    Omb(usize),
    Const(usize),
    /// χ_{{i}} on t variables, 1-based i.
    Dictator {
        t: usize,
        i: usize,
    },
    Random {
        t: usize,
        seed: u64,
    },
}

pub const CATALOG_NAMES: &[&str] = &["or", "and", "parity", "maj", "thr", "mp", "omb", "const", "chi", "random"];

impl CatalogSpec {
    pub fn parse(name: &str, p: &CatalogParams) -> Result<Self> {
        let need = |v: Option<usize>, what: &str| {
            v.ok_or_else(|| Error::Malformed(format!("catalog function '{name}' needs {what}")))
        };
        Ok(match name {
            "or" => CatalogSpec::Or(need(p.t, "t")?),
            "and" => CatalogSpec::And(need(p.t, "t")?),
            "parity" | "xor" => CatalogSpec::Parity(need(p.t, "t")?),
            "maj" => CatalogSpec::Maj(need(p.t, "t")?),
            "thr" => CatalogSpec::Thr { t: need(p.t, "t")?, k: need(p.k, "k")? },
            "mp" => CatalogSpec::Mp { m: need(p.m, "m")?, k: need(p.k, "k")? },
            "omb" => CatalogSpec::Omb(need(p.t, "t")?),
            "const" => CatalogSpec::Const(need(p.t, "t")?),
            "chi" | "dictator" => CatalogSpec::Dictator { t: need(p.t, "t")?, i: p.k.unwrap_or(1) },
            "random" => CatalogSpec::Random { t: need(p.t, "t")?, seed: p.seed },
            _ => return Err(Error::Parse(format!("unknown catalog function '{name}'"))),
        })
    }

    pub fn arity(&self) -> usize {
        match *self {
            CatalogSpec::Or(t)
            | CatalogSpec::And(t)
            | CatalogSpec::Parity(t)
            | CatalogSpec::Maj(t)
            | CatalogSpec::Omb(t)
            | CatalogSpec::Const(t) => t,
            CatalogSpec::Thr { t, .. } | CatalogSpec::Dictator { t, .. } | CatalogSpec::Random { t, .. } => t,
            CatalogSpec::Mp { m, k } => m.saturating_mul(k),
        }
    }

    pub fn label(&self) -> String {
        match *self {
            CatalogSpec::Or(t) => format!("OR_{t}"),
            CatalogSpec::And(t) => format!("AND_{t}"),
            CatalogSpec::Parity(t) => format!("PARITY_{t}"),
            CatalogSpec::Maj(t) => format!("MAJ_{t}"),
            CatalogSpec::Thr { t, k } => format!("THR_{t},{k}"),
            CatalogSpec::Mp { m, k } => format!("MP({m},{k})"),
            CatalogSpec::Omb(t) => format!("OMB_{t}"),
            CatalogSpec::Const(t) => format!("CONST_{t}"),
            CatalogSpec::Dictator { t, i } => format!("CHI_{i}of{t}"),
            CatalogSpec::Random { t, seed } => format!("RANDOM_{t}#{seed}"),
        }
    }

    pub fn build(&self) -> Result<BooleanFunction> {
        let t = self.arity();
        if t == 0 || t > MAX_ARITY {
            return Err(Error::Size(format!("{} has arity {t}, outside 1..={MAX_ARITY}", self.label())));
        }
        let w = |x: usize| x.count_ones() as usize;
        match *self {
            CatalogSpec::Or(_) => BooleanFunction::from_truth(t, |x| x != 0),
            CatalogSpec::And(_) => BooleanFunction::from_truth(t, |x| x == (1 << t) - 1),
            CatalogSpec::Parity(_) => BooleanFunction::from_truth(t, |x| w(x) % 2 == 1),
            CatalogSpec::Maj(_) => BooleanFunction::from_truth(t, |x| 2 * w(x) > t),
            CatalogSpec::Thr { k, .. } => BooleanFunction::from_truth(t, |x| w(x) >= k),
            CatalogSpec::Mp { m, k } => {
                let block = (1usize << k) - 1;
                BooleanFunction::from_truth(t, |x| (0..m).any(|i| (x >> (i * k)) & block == block))
            }
            CatalogSpec::Omb(_) => BooleanFunction::from_truth(t, |x| {
                let s: i64 = 1 + (1..=t).filter(|i| x >> (i - 1) & 1 == 1).map(|i| (-2i64).pow(i as u32)).sum::<i64>();
                s < 0
            }),
            CatalogSpec::Const(_) => BooleanFunction::constant(t, 1),
            CatalogSpec::Dictator { i, .. } => {
                if i == 0 || i > t {
                    return Err(Error::Malformed(format!("dictator index {i} outside 1..={t}")));
                }
                BooleanFunction::from_truth(t, |x| x >> (i - 1) & 1 == 1)
            }
            CatalogSpec::Random { seed, .. } => {
                let mut rng = SplitMix64::seed_from_u64(seed);
                BooleanFunction::from_truth(t, |_| rng.gen::<bool>())
            }
        }
    }
}

pub fn catalog(name: &str, params: &CatalogParams) -> Result<BooleanFunction> {
    CatalogSpec::parse(name, params)?.build()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(t: usize) -> CatalogParams {
        CatalogParams { t: Some(t), ..Default::default() }
    }

    #[test]
    fn omb2_pointwise() {
        let f = catalog("omb", &t(2)).unwrap();
        // Masks: x₁ is bit 0, so the string "10" is mask 1.
        assert_eq!(f.table(), &[1, -1, 1, 1]);
    }

    #[test]
    fn minsky_papert_small_cases() {
        let mp12 = catalog("mp", &CatalogParams { m: Some(1), k: Some(2), ..Default::default() }).unwrap();
        assert_eq!(mp12, catalog("and", &t(2)).unwrap());
        let mp22 = catalog("mp", &CatalogParams { m: Some(2), k: Some(2), ..Default::default() }).unwrap();
        for x in 0..16usize {
            let truth = (x & 3 == 3) || (x >> 2 & 3 == 3);
            assert_eq!(mp22.eval(x) == -1, truth, "x = {x:04b}");
        }
    }

    #[test]
    fn families_and_errors() {
        assert_eq!(catalog("or", &t(2)).unwrap().to_hex(), "e");
        assert_eq!(catalog("maj", &t(3)).unwrap().to_hex(), "e8");
        assert_eq!(
            catalog("thr", &CatalogParams { t: Some(3), k: Some(1), ..Default::default() }).unwrap(),
            catalog("or", &t(3)).unwrap()
        );
        assert_eq!(catalog("chi", &t(1)).unwrap().table(), &[1, -1]);
        assert!(matches!(catalog("or", &t(25)), Err(Error::Size(_))));
        assert!(matches!(
            catalog("mp", &CatalogParams { m: Some(5), k: Some(5), ..Default::default() }),
            Err(Error::Size(_))
        ));
        assert!(matches!(catalog("nope", &t(2)), Err(Error::Parse(_))));
        assert!(catalog("thr", &t(2)).is_err());
        let a = catalog("random", &CatalogParams { t: Some(5), seed: 3, ..Default::default() }).unwrap();
        let b = catalog("random", &CatalogParams { t: Some(5), seed: 3, ..Default::default() }).unwrap();
        assert_eq!(a, b);
    }
}
