//! Classical two-party protocols for pattern matrices: the decision-tree
//! protocol and the randomized threshold-weight protocol.
//!
//! Alice holds x ∈ {0,1}^n, Bob holds the column (V, w). Shared randomness is
//! a common seed for `SplitMix64`.

use rand::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;
use rayon::prelude::*;
use serde::Serialize;

use crate::approx::WeightCertificate;
use crate::boolfn::{character, BooleanFunction, DecisionTree};
use crate::error::{malformed, Error, Result};
use crate::num::Rational;
use crate::pattern::{project, ColumnIndex, PatternMatrixSpec};

/// Largest number of (x, column) pairs simulated exhaustively.
pub const MAX_EXHAUSTIVE_PAIRS: u128 = 1 << 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Speaker {
    A,
    B,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Message {
    pub speaker: Speaker,
    /// Bits as a '0'/'1' string, most significant first.
    pub bits: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Transcript {
    pub x: usize,
    pub column: usize,
    pub messages: Vec<Message>,
    pub cost: usize,
    pub output: i8,
}

impl Transcript {
    fn new(x: usize, column: usize) -> Self {
        Transcript { x, column, messages: Vec::new(), cost: 0, output: 1 }
    }

    fn send(&mut self, speaker: Speaker, value: u64, width: usize) {
        let bits: String = (0..width).rev().map(|i| if value >> i & 1 == 1 { '1' } else { '0' }).collect();
        self.cost += width;
        self.messages.push(Message { speaker, bits });
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(&serde_json::to_value(self).expect("transcript serialises")).expect("value serialises")
    }
}

#[derive(Clone, Debug)]
pub struct ProtocolInput {
    pub x: usize,
    pub column: ColumnIndex,
}

/// ⌈log₂ k⌉ for k ≥ 1.
pub fn ceil_log2(k: usize) -> usize {
    (usize::BITS - (k.max(1) - 1).leading_zeros()) as usize
}

/// Ceiling on the decision-tree protocol's cost: depth · (⌈log(n/t)⌉ + 2).
pub fn det_cost_bound(depth: usize, n: usize, t: usize) -> usize {
    depth * (ceil_log2(n / t) + 2)
}

fn check_input(input: &ProtocolInput, n: usize, t: usize) -> Result<()> {
    if t == 0 || n <= t || n % t != 0 {
        return malformed(format!("need t | n and 0 < t < n, got n = {n}, t = {t}"));
    }
    if input.x >> n != 0 || input.column.w >> t != 0 || input.column.v_digits.len() != t {
        return malformed("protocol input outside the index ranges");
    }
    if input.column.v_digits.iter().any(|&d| d >= n / t) {
        return malformed("block digit out of range");
    }
    Ok(())
}

/// Walks the tree on z = x|_V ⊕ w. At a node querying z_j, Bob sends the
/// index v_j (⌈log(n/t)⌉ bits), Alice replies with x at that position, and
/// Bob announces z_j = x_{V_j} ⊕ w_j, which selects the branch for both.
pub fn det_protocol(tree: &DecisionTree, input: &ProtocolInput, n: usize, t: usize) -> Result<Transcript> {
    check_input(input, n, t)?;
    let block = n / t;
    let width = ceil_log2(block);
    let mut tr = Transcript::new(input.x, input.column.ordinal(n, t));
    let mut node = tree;
    loop {
        match node {
            DecisionTree::Leaf(v) => {
                tr.output = *v;
                return Ok(tr);
            }
            DecisionTree::Node { var, zero, one } => {
                let j = *var;
                if j >= t {
                    return malformed(format!("tree queries variable {j} on {t} inputs"));
                }
                let vj = input.column.v_digits[j];
                tr.send(Speaker::B, vj as u64, width);
                let xbit = (input.x >> (j * block + vj)) & 1;
                tr.send(Speaker::A, xbit as u64, 1);
                let zj = xbit ^ (input.column.w >> j & 1);
                tr.send(Speaker::B, zj as u64, 1);
                node = if zj == 1 { one } else { zero };
            }
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DetSummary {
    pub pairs: u128,
    pub all_correct: bool,
    pub max_cost: usize,
    pub cost_bound: usize,
}

/// Runs the decision-tree protocol on every (x, (V, w)).
pub fn det_exhaustive(tree: &DecisionTree, f: &BooleanFunction, n: usize) -> Result<DetSummary> {
    let t = f.arity();
    let spec = PatternMatrixSpec::from_function(n, t, f)?;
    let pairs = spec.entries();
    if pairs > MAX_EXHAUSTIVE_PAIRS {
        return Err(Error::Size(format!("{pairs} input pairs exceed {MAX_EXHAUSTIVE_PAIRS}")));
    }
    let cols = spec.cols() as usize;
    let results: Vec<(bool, usize)> = (0..spec.rows() as usize)
        .into_par_iter()
        .map(|x| {
            let mut ok = true;
            let mut worst = 0;
            for c in 0..cols {
                let column = spec.column(c);
                let z = project(x, &column, n, t) ^ column.w;
                let tr = det_protocol(tree, &ProtocolInput { x, column }, n, t).expect("validated input");
                ok &= tr.output == f.eval(z);
                worst = worst.max(tr.cost);
            }
            (ok, worst)
        })
        .collect();
    Ok(DetSummary {
        pairs,
        all_correct: results.iter().all(|r| r.0),
        max_cost: results.iter().map(|r| r.1).max().unwrap_or(0),
        cost_bound: det_cost_bound(tree.depth(), n, t),
    })
}

/// Draws S with probability |λ_S|/W from integer cumulative weights.
fn sample_set(cert: &WeightCertificate, rng: &mut SplitMix64) -> (usize, i64) {
    let w = cert.weight();
    let mut r = rng.gen_range(0..w);
    for (&s, &l) in &cert.lambda {
        let a = l.unsigned_abs();
        if r < a {
            return (s, l);
        }
        r -= a;
    }
    unreachable!("cumulative weights cover [0, W)")
}

/// One round with a fixed set S: Bob sends (v_j)_{j∈S} as one base-(n/t)
/// number in ⌈|S|·log(n/t)⌉ bits plus the bit χ_S(w); Alice announces
/// sign(λ_S)·χ_S(x|_V)·χ_S(w).
fn run_with_set(s: usize, lambda: i64, input: &ProtocolInput, n: usize, t: usize) -> Transcript {
    let block = n / t;
    let mut tr = Transcript::new(input.x, input.column.ordinal(n, t));
    let members: Vec<usize> = (0..t).filter(|j| s >> j & 1 == 1).collect();
    let index = members.iter().fold(0u64, |acc, &j| acc * block as u64 + input.column.v_digits[j] as u64);
    let width = ((members.len() as f64) * (block as f64).log2()).ceil() as usize;
    // (n/t)^{|S|} − 1 must fit; guards float rounding of the width.
    let width = width.max(ceil_log2((block as u64).pow(members.len() as u32) as usize));
    tr.send(Speaker::B, index, width);
    let chi_w = character(s, input.column.w);
    tr.send(Speaker::B, (chi_w == -1) as u64, 1);
    let xv = project(input.x, &input.column, n, t);
    let out = lambda.signum() as i8 * character(s, xv) * chi_w;
    tr.send(Speaker::A, (out == -1) as u64, 1);
    tr.output = out;
    tr
}

/// Cost ceiling d·log(n/t) + 3.
pub fn rand_cost_bound(d: usize, n: usize, t: usize) -> f64 {
    d as f64 * ((n / t) as f64).log2() + 3.0
}

#[derive(Clone, Debug, Serialize)]
pub struct RandRun {
    pub set: usize,
    pub transcript: Transcript,
}

pub fn rand_weight_protocol(
    cert: &WeightCertificate,
    input: &ProtocolInput,
    n: usize,
    t: usize,
    rng: &mut SplitMix64,
) -> Result<RandRun> {
    check_input(input, n, t)?;
    if cert.arity != t || cert.weight() == 0 {
        return malformed("certificate does not match the pattern arity or is empty");
    }
    let (s, l) = sample_set(cert, rng);
    Ok(RandRun { set: s, transcript: run_with_set(s, l, input, n, t) })
}

/// E[P(x, (V, w))] exactly, by running the protocol once per set S and
/// weighting by |λ_S|/W.
pub fn exact_expectation(cert: &WeightCertificate, input: &ProtocolInput, n: usize, t: usize) -> Rational {
    let w = cert.weight() as i64;
    cert.lambda
        .iter()
        .map(|(&s, &l)| {
            let out = run_with_set(s, l, input, n, t).output as i64;
            Rational::new(out * l.abs(), w)
        })
        .sum()
}

#[derive(Clone, Debug, Serialize)]
pub struct AdvantageReport {
    /// min over inputs of f·E[P].
    pub min_advantage: Rational,
    /// 1/W.
    pub floor: Rational,
    /// E[P] agreed with p(z)/W on every input.
    pub matches_formula: bool,
    pub max_cost: usize,
    pub cost_bound: f64,
    pub pairs: u128,
}

/// Exhaustive over all (x, (V, w)): f·E[P] against 1/W and against the
/// closed form |Σ λ_S χ_S(z)|/W.
pub fn exact_advantage(cert: &WeightCertificate, f: &BooleanFunction, n: usize) -> Result<AdvantageReport> {
    let t = f.arity();
    if !cert.sign_represents(f) {
        return malformed("certificate does not sign-represent f");
    }
    let spec = PatternMatrixSpec::from_function(n, t, f)?;
    let pairs = spec.entries();
    if pairs > MAX_EXHAUSTIVE_PAIRS {
        return Err(Error::Size(format!("{pairs} input pairs exceed {MAX_EXHAUSTIVE_PAIRS}")));
    }
    let w = cert.weight() as i64;
    let cols = spec.cols() as usize;
    let per_row: Vec<(Rational, bool)> = (0..spec.rows() as usize)
        .into_par_iter()
        .map(|x| {
            let mut min: Option<Rational> = None;
            let mut ok = true;
            for c in 0..cols {
                let column = spec.column(c);
                let z = project(x, &column, n, t) ^ column.w;
                let e = exact_expectation(cert, &ProtocolInput { x, column }, n, t);
                let adv = &e * Rational::from_integer(f.eval(z) as i64);
                ok &= adv == Rational::new(cert.eval(z).abs(), w);
                min = Some(match min {
                    Some(m) if m <= adv => m,
                    _ => adv,
                });
            }
            (min.expect("at least one column"), ok)
        })
        .collect();
    let max_cost = cert
        .lambda
        .keys()
        .map(|&s| {
            let input = ProtocolInput { x: 0, column: spec.column(0) };
            run_with_set(s, 1, &input, n, t).cost
        })
        .max()
        .unwrap_or(0);
    Ok(AdvantageReport {
        min_advantage: per_row.iter().map(|r| r.0.clone()).min().expect("rows exist"),
        floor: Rational::new(1, w),
        matches_formula: per_row.iter().all(|r| r.1),
        max_cost,
        cost_bound: rand_cost_bound(cert.d, n, t),
        pairs,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct MonteCarlo {
    pub trials: u64,
    pub successes: u64,
    pub empirical: f64,
    /// Exact success probability for a uniformly random input.
    pub exact: Rational,
    pub sigma: f64,
    pub z_score: f64,
    pub within_4_sigma: bool,
}

/// Samples a uniformly random (x, (V, w)) and a set S per trial from one
/// seeded stream.
pub fn monte_carlo(
    cert: &WeightCertificate,
    f: &BooleanFunction,
    n: usize,
    trials: u64,
    seed: u64,
) -> Result<MonteCarlo> {
    let t = f.arity();
    // Validates n and t.
    PatternMatrixSpec::from_function(n, t, f)?;
    if trials == 0 {
        return malformed("Monte Carlo needs at least one trial");
    }
    let mut rng = SplitMix64::seed_from_u64(seed);
    let block = n / t;
    let mut successes = 0u64;
    for _ in 0..trials {
        let x = if n >= 64 { rng.gen::<u64>() as usize } else { rng.gen_range(0..1u64 << n) as usize };
        let column = ColumnIndex {
            v_digits: (0..t).map(|_| rng.gen_range(0..block)).collect(),
            w: rng.gen_range(0..1usize << t),
        };
        let z = project(x, &column, n, t) ^ column.w;
        let run = rand_weight_protocol(cert, &ProtocolInput { x, column }, n, t, &mut rng)?;
        if run.transcript.output == f.eval(z) {
            successes += 1;
        }
    }
    // z is uniform on {0,1}^t, and Pr[correct | z] = (1 + f(z)p(z)/W)/2.
    let w = cert.weight() as i64;
    let exact: Rational =
        (0..1usize << t).map(|z| Rational::new(w + f.eval(z) as i64 * cert.eval(z), 2 * w)).sum::<Rational>()
            * Rational::new(1, 1 << t);
    let p = exact.to_f64();
    let sigma = (p * (1.0 - p) / trials as f64).sqrt();
    let empirical = successes as f64 / trials as f64;
    let z_score = if sigma > 0.0 {
        (empirical - p) / sigma
    } else if empirical == p {
        0.0
    } else {
        f64::INFINITY
    };
    Ok(MonteCarlo { trials, successes, empirical, exact, sigma, z_score, within_4_sigma: z_score.abs() <= 4.0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boolfn::{catalog, min_depth_tree, CatalogParams};
    use std::collections::BTreeMap;

    fn named(name: &str, t: usize) -> BooleanFunction {
        catalog(name, &CatalogParams { t: Some(t), ..Default::default() }).unwrap()
    }

    #[test]
    fn log_widths() {
        assert_eq!([1, 2, 3, 4, 5, 8, 9].map(ceil_log2), [0, 1, 2, 2, 3, 3, 4]);
        assert_eq!(det_cost_bound(2, 4, 2), 6);
    }

    #[test]
    fn deterministic_protocol_exhaustive() {
        for name in ["or", "parity", "const", "and"] {
            let f = named(name, 2);
            let tree = min_depth_tree(&f).tree;
            let s = det_exhaustive(&tree, &f, 4).unwrap();
            assert!(s.all_correct, "{name}");
            assert!(s.max_cost <= s.cost_bound);
            assert_eq!(s.pairs, 256);
        }
        let c = named("const", 2);
        assert_eq!(det_exhaustive(&min_depth_tree(&c).tree, &c, 4).unwrap().max_cost, 0);
        let f = named("maj", 3);
        let s = det_exhaustive(&min_depth_tree(&f).tree, &f, 6).unwrap();
        assert!(s.all_correct && s.max_cost <= s.cost_bound);
    }

    #[test]
    fn transcript_schedule() {
        let f = named("or", 2);
        let tree = min_depth_tree(&f).tree;
        let input = ProtocolInput { x: 0b0110, column: ColumnIndex { v_digits: vec![1, 0], w: 0b01 } };
        let tr = det_protocol(&tree, &input, 4, 2).unwrap();
        assert_eq!(tr.messages[0].speaker, Speaker::B);
        assert_eq!(tr.messages[1].speaker, Speaker::A);
        assert_eq!(tr.cost, tr.messages.iter().map(|m| m.bits.len()).sum::<usize>());
        // x|_V = (x₂, x₃) = (1, 1), z = 11 ⊕ 01 = 10.
        assert_eq!(tr.output, f.eval(0b10));
        assert!(tr.to_json_line().starts_with('{'));
    }

    #[test]
    fn weight_three_or2_advantage() {
        let f = named("or", 2);
        let cert = WeightCertificate::new(2, 1, BTreeMap::from([(0, -1), (1, 1), (2, 1)])).unwrap();
        let adv = exact_advantage(&cert, &f, 4).unwrap();
        assert_eq!(adv.min_advantage, Rational::new(1, 3));
        assert!(adv.matches_formula);
        assert!(adv.min_advantage >= adv.floor);
        assert!(adv.max_cost as f64 <= adv.cost_bound);

        let par = named("parity", 2);
        let one = WeightCertificate::new(2, 2, BTreeMap::from([(3, 1)])).unwrap();
        assert_eq!(exact_advantage(&one, &par, 4).unwrap().min_advantage, Rational::one());
    }

    #[test]
    fn monte_carlo_tracks_exact() {
        let f = named("or", 2);
        let cert = WeightCertificate::new(2, 1, BTreeMap::from([(0, -1), (1, 1), (2, 1)])).unwrap();
        let mc = monte_carlo(&cert, &f, 4, 100_000, 7).unwrap();
        assert!(mc.within_4_sigma, "{mc:?}");
        assert!(mc.exact >= Rational::new(2, 3));
        let again = monte_carlo(&cert, &f, 4, 100_000, 7).unwrap();
        assert_eq!(mc.successes, again.successes);
    }
}
