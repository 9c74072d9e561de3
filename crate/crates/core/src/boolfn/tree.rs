use std::collections::HashMap;

use super::BooleanFunction;

/// Largest arity for which [`min_depth_tree`] searches exhaustively.
pub const EXACT_TREE_MAX_ARITY: usize = 5;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DecisionTree {
    Leaf(i8),
    /// Query variable `var` (0-based bit index); follow `zero` or `one`.
    Node {
        var: usize,
        zero: Box<DecisionTree>,
        one: Box<DecisionTree>,
    },
}

impl DecisionTree {
    pub fn eval(&self, x: usize) -> i8 {
        let mut node = self;
        loop {
            match node {
                DecisionTree::Leaf(v) => return *v,
                DecisionTree::Node { var, zero, one } => {
                    node = if x >> var & 1 == 1 { one } else { zero };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            DecisionTree::Leaf(_) => 0,
            DecisionTree::Node { zero, one, .. } => 1 + zero.depth().max(one.depth()),
        }
    }

    pub fn computes(&self, f: &BooleanFunction) -> bool {
        (0..f.table().len()).all(|x| self.eval(x) == f.eval(x))
    }

    /// No variable is queried twice on any root-to-leaf path.
    pub fn is_read_once_per_path(&self) -> bool {
        fn walk(t: &DecisionTree, seen: usize) -> bool {
            match t {
                DecisionTree::Leaf(_) => true,
                DecisionTree::Node { var, zero, one } => {
                    seen >> var & 1 == 0 && walk(zero, seen | 1 << var) && walk(one, seen | 1 << var)
                }
            }
        }
        walk(self, 0)
    }
}

#[derive(Clone, Debug)]
pub struct TreeResult {
    pub tree: DecisionTree,
    /// False when the greedy fallback was used, so the depth is only an
    /// upper bound on dt(f).
    pub optimal: bool,
}

impl TreeResult {
    pub fn depth(&self) -> usize {
        self.tree.depth()
    }
}

/// Constant value of f on the subcube {x : x ∧ fixed = values}, if any.
fn subcube_constant(f: &BooleanFunction, fixed: usize, values: usize) -> Option<i8> {
    let free = ((1usize << f.arity()) - 1) & !fixed;
    let first = f.eval(values);
    let mut sub = free;
    loop {
        if f.eval(values | sub) != first {
            return None;
        }
        if sub == 0 {
            return Some(first);
        }
        sub = (sub - 1) & free;
    }
}

struct Exact<'a> {
    f: &'a BooleanFunction,
    memo: HashMap<(usize, usize), usize>,
}

impl Exact<'_> {
    fn depth(&mut self, fixed: usize, values: usize) -> usize {
        if let Some(&d) = self.memo.get(&(fixed, values)) {
            return d;
        }
        let d = if subcube_constant(self.f, fixed, values).is_some() {
            0
        } else {
            (0..self.f.arity())
                .filter(|i| fixed >> i & 1 == 0)
                .map(|i| 1 + self.depth(fixed | 1 << i, values).max(self.depth(fixed | 1 << i, values | 1 << i)))
                .min()
                .expect("a non-constant subcube has a free variable")
        };
        self.memo.insert((fixed, values), d);
        d
    }

    fn build(&mut self, fixed: usize, values: usize) -> DecisionTree {
        if let Some(v) = subcube_constant(self.f, fixed, values) {
            return DecisionTree::Leaf(v);
        }
        let target = self.depth(fixed, values);
        let var = (0..self.f.arity())
            .filter(|i| fixed >> i & 1 == 0)
            .find(|&i| {
                1 + self.depth(fixed | 1 << i, values).max(self.depth(fixed | 1 << i, values | 1 << i)) == target
            })
            .expect("memoised optimum is attained by some variable");
        DecisionTree::Node {
            var,
            zero: Box::new(self.build(fixed | 1 << var, values)),
            one: Box::new(self.build(fixed | 1 << var, values | 1 << var)),
        }
    }
}

fn greedy(f: &BooleanFunction, fixed: usize, values: usize) -> DecisionTree {
    if let Some(v) = subcube_constant(f, fixed, values) {
        return DecisionTree::Leaf(v);
    }
    let free = ((1usize << f.arity()) - 1) & !fixed;
    // Minority count of a subcube: how far it is from constant.
    let minority = |fx: usize, vx: usize| {
        let free = ((1usize << f.arity()) - 1) & !fx;
        let (mut neg, mut total) = (0usize, 0usize);
        let mut sub = free;
        loop {
            total += 1;
            if f.eval(vx | sub) == -1 {
                neg += 1;
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & free;
        }
        neg.min(total - neg)
    };
    let var = (0..f.arity())
        .filter(|i| free >> i & 1 == 1)
        .min_by_key(|&i| minority(fixed | 1 << i, values) + minority(fixed | 1 << i, values | 1 << i))
        .expect("non-constant subcube has a free variable");
    DecisionTree::Node {
        var,
        zero: Box::new(greedy(f, fixed | 1 << var, values)),
        one: Box::new(greedy(f, fixed | 1 << var, values | 1 << var)),
    }
}

/// Minimum-depth decision tree by memoised search over the 3^t
/// restrictions; greedy (flagged non-optimal) above
/// [`EXACT_TREE_MAX_ARITY`].
pub fn min_depth_tree(f: &BooleanFunction) -> TreeResult {
    if f.arity() <= EXACT_TREE_MAX_ARITY {
        let mut search = Exact { f, memo: HashMap::new() };
        TreeResult { tree: search.build(0, 0), optimal: true }
    } else {
        TreeResult { tree: greedy(f, 0, 0), optimal: false }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boolfn::{catalog, degree, CatalogParams};

    fn named(name: &str, t: usize) -> BooleanFunction {
        catalog(name, &CatalogParams { t: Some(t), ..Default::default() }).unwrap()
    }

    /// Independent oracle: does a tree of depth ≤ budget exist? Plain
    /// recursion, no memo, no reconstruction.
    fn exists(f: &BooleanFunction, fixed: usize, values: usize, budget: usize) -> bool {
        if subcube_constant(f, fixed, values).is_some() {
            return true;
        }
        budget > 0
            && (0..f.arity()).filter(|i| fixed >> i & 1 == 0).any(|i| {
                exists(f, fixed | 1 << i, values, budget - 1) && exists(f, fixed | 1 << i, values | 1 << i, budget - 1)
            })
    }

    #[test]
    fn small_examples() {
        assert_eq!(min_depth_tree(&named("const", 3)).depth(), 0);
        assert_eq!(min_depth_tree(&named("parity", 2)).depth(), 2);
        let or2 = min_depth_tree(&named("or", 2));
        assert_eq!(or2.depth(), 2);
        assert!(or2.optimal && or2.tree.computes(&named("or", 2)));
    }

    #[test]
    fn exhaustive_t3_optimal_and_logrank_relation() {
        for code in 0u32..256 {
            let f = BooleanFunction::new(3, (0..8).map(|x| if code >> x & 1 == 1 { -1 } else { 1 }).collect()).unwrap();
            let r = min_depth_tree(&f);
            let d = r.depth();
            assert!(r.tree.computes(&f) && r.tree.is_read_once_per_path());
            assert!(exists(&f, 0, 0, d));
            assert!(d == 0 || !exists(&f, 0, 0, d - 1));
            let deg = degree(&f);
            assert!(d <= 2 * deg.pow(4));
        }
    }

    #[test]
    fn exhaustive_t4_degree_bound() {
        // dt(f) ≤ 2·deg(f)⁴ over all 65536 functions on four variables.
        for code in 0u32..1 << 16 {
            let f =
                BooleanFunction::new(4, (0..16).map(|x| if code >> x & 1 == 1 { -1 } else { 1 }).collect()).unwrap();
            let r = min_depth_tree(&f);
            assert!(r.tree.computes(&f));
            assert!(r.depth() <= 2 * degree(&f).pow(4));
        }
    }

    #[test]
    fn greedy_fallback_is_flagged_and_correct() {
        let f = named("maj", 7);
        let r = min_depth_tree(&f);
        assert!(!r.optimal);
        assert!(r.tree.computes(&f) && r.tree.is_read_once_per_path());
    }
}
