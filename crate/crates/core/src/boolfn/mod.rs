//! Boolean functions on {0,1}^t with values in {−1,+1} (−1 is "true").
//!
//! Inputs are masks: variable i is bit (i−1), least-significant first. The
//! same convention runs through every module, so matrices and certificates
//! are bit-reproducible.

mod catalog;
mod fourier;
mod tree;

pub use catalog::{catalog, CatalogParams, CatalogSpec, CATALOG_NAMES};
pub use fourier::{degree, fourier, fourier_of_table, inverse_fourier, low_degree_masks, FourierSpectrum};
pub use tree::{min_depth_tree, DecisionTree, TreeResult, EXACT_TREE_MAX_ARITY};

use crate::error::{malformed, Error, Result};
use crate::num::Rational;

pub const MAX_ARITY: usize = 24;

/// χ_S(x) = (−1)^{|S ∧ x|}.
pub fn character(s: usize, x: usize) -> i8 {
    if (s & x).count_ones() % 2 == 0 {
        1
    } else {
        -1
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BooleanFunction {
    arity: usize,
    table: Vec<i8>,
}

impl BooleanFunction {
    pub fn new(arity: usize, table: Vec<i8>) -> Result<Self> {
        check_arity(arity)?;
        if table.len() != 1 << arity {
            return malformed(format!(
                "truth table of length {} for arity {arity} (expected {})",
                table.len(),
                1usize << arity
            ));
        }
        if let Some(x) = table.iter().position(|&v| v != 1 && v != -1) {
            return malformed(format!("table entry {x} is {}, not ±1", table[x]));
        }
        Ok(BooleanFunction { arity, table })
    }

    /// `f(x) = -1` exactly where `truth(x)` holds.
    pub fn from_truth(arity: usize, mut truth: impl FnMut(usize) -> bool) -> Result<Self> {
        check_arity(arity)?;
        let table = (0..1usize << arity).map(|x| if truth(x) { -1 } else { 1 }).collect();
        Ok(BooleanFunction { arity, table })
    }

    pub fn constant(arity: usize, value: i8) -> Result<Self> {
        check_arity(arity)?;
        BooleanFunction::new(arity, vec![value; 1 << arity])
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn eval(&self, x: usize) -> i8 {
        self.table[x]
    }

    pub fn table(&self) -> &[i8] {
        &self.table
    }

    pub fn rational_table(&self) -> Vec<Rational> {
        self.table.iter().map(|&v| Rational::from_integer(v as i64)).collect()
    }

    pub fn is_constant(&self) -> bool {
        self.table.iter().all(|&v| v == self.table[0])
    }

    /// True when f(x) depends only on the Hamming weight of x.
    pub fn is_symmetric(&self) -> bool {
        let mut by_weight = vec![0i8; self.arity + 1];
        for (x, &v) in self.table.iter().enumerate() {
            let w = x.count_ones() as usize;
            if by_weight[w] == 0 {
                by_weight[w] = v;
            } else if by_weight[w] != v {
                return false;
            }
        }
        true
    }

    /// The predicate D with f(x) = D(|x|), if f is symmetric.
    pub fn to_predicate(&self) -> Option<Predicate> {
        if !self.is_symmetric() {
            return None;
        }
        let values = (0..=self.arity).map(|w| self.table[(1usize << w) - 1]).collect();
        Some(Predicate { values })
    }

    /// Hex encoding: bit x of the integer is 1 iff f(x) = −1, printed most
    /// significant nibble first and zero-padded to ⌈2^t/4⌉ digits.
    pub fn to_hex(&self) -> String {
        let digits = self.table.len().div_ceil(4);
        let mut out = String::with_capacity(digits);
        for d in (0..digits).rev() {
            let mut nibble = 0u32;
            for b in 0..4 {
                let x = 4 * d + b;
                if x < self.table.len() && self.table[x] == -1 {
                    nibble |= 1 << b;
                }
            }
            out.push(char::from_digit(nibble, 16).expect("nibble < 16"));
        }
        out
    }

    pub fn from_hex(arity: usize, hex: &str) -> Result<Self> {
        check_arity(arity)?;
        let s = hex.trim();
        let s = s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")).unwrap_or(s);
        if s.is_empty() {
            return Err(Error::Parse("empty hex truth table".into()));
        }
        let len = 1usize << arity;
        let mut table = vec![1i8; len];
        for (pos, ch) in s.chars().rev().enumerate() {
            let nibble = ch.to_digit(16).ok_or_else(|| Error::Parse(format!("'{ch}' is not a hex digit")))?;
            for b in 0..4 {
                if nibble >> b & 1 == 1 {
                    let x = 4 * pos + b;
                    if x >= len {
                        return Err(Error::Parse(format!("hex table sets bit {x}, beyond the 2^{arity} inputs")));
                    }
                    table[x] = -1;
                }
            }
        }
        Ok(BooleanFunction { arity, table })
    }

    pub fn negate(&self) -> Self {
        BooleanFunction { arity: self.arity, table: self.table.iter().map(|v| -v).collect() }
    }

    /// Number of inputs where f = −1.
    pub fn weight(&self) -> usize {
        self.table.iter().filter(|&&v| v == -1).count()
    }
}

impl std::fmt::Debug for BooleanFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "BooleanFunction(t={}, 0x{})", self.arity, self.to_hex())
    }
}

fn check_arity(arity: usize) -> Result<()> {
    if arity == 0 || arity > MAX_ARITY {
        return Err(Error::Size(format!("arity {arity} outside 1..={MAX_ARITY}")));
    }
    Ok(())
}

/// D : {0,…,n} → {−1,+1}.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Predicate {
    values: Vec<i8>,
}

impl Predicate {
    pub fn new(values: Vec<i8>) -> Result<Self> {
        if values.len() < 2 {
            return malformed("a predicate needs n ≥ 1 (at least two values)");
        }
        if values.iter().any(|&v| v != 1 && v != -1) {
            return malformed("predicate values must be ±1");
        }
        Ok(Predicate { values })
    }

    pub fn from_fn(n: usize, f: impl Fn(usize) -> i8) -> Result<Self> {
        Predicate::new((0..=n).map(f).collect())
    }

    /// Named families: `disj`/`or` (+1 only at 0), `and` (−1 only at n),
    /// `parity`, `maj` (−1 above n/2), `thrK` (−1 from K on), `const`.
    pub fn named(name: &str, n: usize) -> Result<Self> {
        let sign = |b: bool| if b { -1 } else { 1 };
        match name {
            "disj" | "or" => Predicate::from_fn(n, |i| sign(i > 0)),
            "and" => Predicate::from_fn(n, |i| sign(i == n)),
            "parity" => Predicate::from_fn(n, |i| sign(i % 2 == 1)),
            "maj" => Predicate::from_fn(n, |i| sign(2 * i > n)),
            "const" => Predicate::from_fn(n, |_| 1),
            _ => {
                if let Some(k) = name.strip_prefix("thr") {
                    let k: usize = k.parse().map_err(|_| Error::Parse(format!("bad threshold in '{name}'")))?;
                    return Predicate::from_fn(n, |i| sign(i >= k));
                }
                Err(Error::Parse(format!("unknown predicate '{name}'")))
            }
        }
    }

    /// A string of `+`/`-` (or `1`/`0` where 1 means −1), entry i = D(i).
    pub fn parse_list(s: &str) -> Result<Self> {
        let values = s
            .chars()
            .filter(|c| !c.is_whitespace() && *c != ',')
            .map(|c| match c {
                '+' | '0' => Ok(1),
                '-' | '1' => Ok(-1),
                _ => Err(Error::Parse(format!("bad predicate symbol '{c}'"))),
            })
            .collect::<Result<Vec<i8>>>()?;
        Predicate::new(values)
    }

    pub fn n(&self) -> usize {
        self.values.len() - 1
    }

    pub fn eval(&self, i: usize) -> i8 {
        self.values[i]
    }

    pub fn values(&self) -> &[i8] {
        &self.values
    }

    pub fn is_constant(&self) -> bool {
        self.values.iter().all(|&v| v == self.values[0])
    }

    pub fn to_list(&self) -> String {
        self.values.iter().map(|&v| if v == 1 { '+' } else { '-' }).collect()
    }

    /// D_k(i) = D(k + i) on {0, …, n − k}.
    pub fn shift(&self, k: usize) -> Result<Self> {
        if k >= self.n() {
            return malformed(format!("shift {k} leaves fewer than two values"));
        }
        Predicate::new(self.values[k..].to_vec())
    }
}

/// f(x) = D(|x|) on t ≤ n variables.
pub fn from_predicate(d: &Predicate, t: usize) -> Result<BooleanFunction> {
    if t > d.n() {
        return malformed(format!("arity {t} exceeds predicate range n = {}", d.n()));
    }
    check_arity(t)?;
    let table = (0..1usize << t).map(|x| d.eval(x.count_ones() as usize)).collect();
    Ok(BooleanFunction { arity: t, table })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct L0L1 {
    pub l0: usize,
    pub l1: usize,
}

/// Smallest ℓ₀ ≤ ⌊n/2⌋ and ℓ₁ ≤ ⌈n/2⌉ with D constant on [ℓ₀, n − ℓ₁].
///
/// Such a pair always exists: ℓ₀ is the last sign change at or below ⌊n/2⌋
/// and ℓ₁ is measured from the first change at or above it, so both halves
/// meet at ⌊n/2⌋.
pub fn l0_l1(d: &Predicate) -> L0L1 {
    let n = d.n();
    let half = n / 2;
    let l0 = (1..=half).rev().find(|&l| d.eval(l) != d.eval(l - 1)).unwrap_or(0);
    let l1 = (half..n).find(|&l| d.eval(l) != d.eval(l + 1)).map(|l| n - l).unwrap_or(0);
    L0L1 { l0, l1 }
}
