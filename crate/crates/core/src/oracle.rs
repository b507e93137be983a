//! Brute-force ground truth.
//!
//! Everything here enumerates: all `n!` arrangements of a tree, or all
//! `n^(n-2)` labeled trees on `n` vertices. Crossings are recounted from
//! scratch for every arrangement with a predicate local to this module, so the
//! oracle shares no counting code with [`crate::arrangement`] or
//! [`crate::theory`]. Sums are accumulated as integers and divided by `n!`
//! once at the end.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::theory;
use crate::tree::{all_trees, tree_count, Shape, Tree};
use crate::Rational;

/// Largest `n` for which all `n!` arrangements are enumerated.
pub const MAX_PERMUTATION_N: usize = 9;
/// Largest `n` for tree-by-arrangement double enumeration.
pub const MAX_TREE_N: usize = 7;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("TooLarge: n = {n} exceeds the enumeration cap {cap}")]
    TooLarge { n: usize, cap: usize },
}

/// Feasibility caps for the enumerations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Caps {
    pub permutation_n: usize,
    pub tree_n: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            permutation_n: MAX_PERMUTATION_N,
            tree_n: MAX_TREE_N,
        }
    }
}

impl Caps {
    fn check_permutations(&self, n: usize) -> Result<(), OracleError> {
        if n > self.permutation_n {
            return Err(OracleError::TooLarge {
                n,
                cap: self.permutation_n,
            });
        }
        Ok(())
    }

    fn check_trees(&self, n: usize) -> Result<(), OracleError> {
        if n > self.tree_n {
            return Err(OracleError::TooLarge {
                n,
                cap: self.tree_n,
            });
        }
        Ok(())
    }
}

/// Exact statistics over every arrangement of one tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactStats {
    pub expected_c: Rational,
    pub max_c: u64,
    pub expected_d: Rational,
    pub permutations: u64,
    /// Largest `C(u,v)` seen for each edge, in the tree's edge order.
    pub max_c_edge: Vec<u64>,
}

pub fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

/// Rearranges `p` into its lexicographic successor; `false` after the last.
fn next_permutation(p: &mut [usize]) -> bool {
    let Some(i) = p.windows(2).rposition(|w| w[0] < w[1]) else {
        return false;
    };
    let j = p.iter().rposition(|&x| x > p[i]).expect("successor exists");
    p.swap(i, j);
    p[i + 1..].reverse();
    true
}

fn cross(a: usize, b: usize, c: usize, d: usize) -> bool {
    let (a, b) = if a < b { (a, b) } else { (b, a) };
    let (c, d) = if c < d { (c, d) } else { (d, c) };
    (a < c && c < b && b < d) || (c < a && a < d && d < b)
}

/// Visits every arrangement in lexicographic order of the position vector,
/// passing `(C, total distance, per-edge crossings)`.
fn for_each_arrangement(tree: &Tree, mut visit: impl FnMut(u64, u64, &[u64])) {
    let edges = tree.edges();
    let mut pos: Vec<usize> = (1..=tree.n()).collect();
    let mut per_edge = vec![0u64; edges.len()];
    loop {
        per_edge.iter_mut().for_each(|c| *c = 0);
        let mut c = 0;
        let mut d = 0;
        for (i, &(u, v)) in edges.iter().enumerate() {
            d += pos[u - 1].abs_diff(pos[v - 1]) as u64;
            for (j, &(s, t)) in edges.iter().enumerate().skip(i + 1) {
                let disjoint = u != s && u != t && v != s && v != t;
                if disjoint && cross(pos[u - 1], pos[v - 1], pos[s - 1], pos[t - 1]) {
                    c += 1;
                    per_edge[i] += 1;
                    per_edge[j] += 1;
                }
            }
        }
        visit(c, d, &per_edge);
        if !next_permutation(&mut pos) {
            break;
        }
    }
}

fn exact_stats_unchecked(tree: &Tree) -> ExactStats {
    let mut sum_c = 0u64;
    let mut sum_d = 0u64;
    let mut max_c = 0u64;
    let mut count = 0u64;
    let mut max_c_edge = vec![0u64; tree.edges().len()];
    for_each_arrangement(tree, |c, d, per_edge| {
        sum_c += c;
        sum_d += d;
        max_c = max_c.max(c);
        count += 1;
        for (m, &x) in max_c_edge.iter_mut().zip(per_edge) {
            *m = (*m).max(x);
        }
    });
    debug_assert_eq!(count, factorial(tree.n()));
    let m = tree.edges().len() as i64;
    let expected_d = if m == 0 {
        Rational::from_integer(0)
    } else {
        Rational::new(sum_d as i64, count as i64 * m)
    };
    ExactStats {
        expected_c: Rational::new(sum_c as i64, count as i64),
        max_c,
        expected_d,
        permutations: count,
        max_c_edge,
    }
}

/// Mean and maximum of `C`, and mean of `<d>`, over all `n!` arrangements.
pub fn exact_expected_crossings(tree: &Tree, caps: Caps) -> Result<ExactStats, OracleError> {
    caps.check_permutations(tree.n())?;
    Ok(exact_stats_unchecked(tree))
}

/// Mean of `<d>` over all `n!` arrangements.
pub fn exact_expected_distance(tree: &Tree, caps: Caps) -> Result<Rational, OracleError> {
    Ok(exact_expected_crossings(tree, caps)?.expected_d)
}

/// A failed check, identified by the tree's Prüfer-order edge list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub edges: Vec<(usize, usize)>,
    pub detail: String,
}

impl Violation {
    fn new(tree: &Tree, detail: String) -> Self {
        Violation {
            edges: tree.edges().to_vec(),
            detail,
        }
    }
}

/// Which trees attain the extremes of `K_2`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct K2ExtremesReport {
    pub check: &'static str,
    pub n: usize,
    pub trees_checked: u64,
    pub star_attainers: u64,
    pub linear_attainers: u64,
    pub violations: Vec<Violation>,
}

/// Scans all labeled trees on `n` vertices; trees with `K_2 = n(n-1)` must be
/// stars and trees with `K_2 = 4n - 6` must be paths (and vice versa). Also
/// flags any tree outside `[4n - 6, n(n - 1)]`.
pub fn verify_k2_extremes(n: usize, caps: Caps) -> Result<K2ExtremesReport, OracleError> {
    caps.check_trees(n)?;
    let star_k2 = (n * n.saturating_sub(1)) as u64;
    let linear_k2 = (4 * n).saturating_sub(6) as u64;
    let mut report = K2ExtremesReport {
        check: "k2_extremes",
        n,
        trees_checked: 0,
        star_attainers: 0,
        linear_attainers: 0,
        violations: Vec::new(),
    };
    for tree in all_trees(n) {
        report.trees_checked += 1;
        let k2 = tree.k2_sum();
        let shape = tree.classify();
        let is_star = matches!(shape, Shape::Star | Shape::Both);
        let is_linear = matches!(shape, Shape::Linear | Shape::Both);
        if k2 == star_k2 {
            report.star_attainers += 1;
        }
        if k2 == linear_k2 {
            report.linear_attainers += 1;
        }
        if (k2 == star_k2) != is_star {
            report.violations.push(Violation::new(
                &tree,
                format!("K2 = {k2}, shape {shape:?}, star K2 = {star_k2}"),
            ));
        }
        if (k2 == linear_k2) != is_linear {
            report.violations.push(Violation::new(
                &tree,
                format!("K2 = {k2}, shape {shape:?}, linear K2 = {linear_k2}"),
            ));
        }
        if n >= 2 && (k2 < linear_k2 || k2 > star_k2) {
            report.violations.push(Violation::new(
                &tree,
                format!("K2 = {k2} outside [{linear_k2}, {star_k2}]"),
            ));
        }
    }
    if report.trees_checked != tree_count(n) {
        report.violations.push(Violation {
            edges: Vec::new(),
            detail: format!(
                "enumerated {} trees, expected {}",
                report.trees_checked,
                tree_count(n)
            ),
        });
    }
    Ok(report)
}

/// Outcome of a tree-by-arrangement double enumeration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EnumerationReport {
    pub check: &'static str,
    pub n: usize,
    pub trees_checked: u64,
    pub permutations_each: u64,
    pub violations: Vec<Violation>,
}

fn enumerate_checks(
    check: &'static str,
    n: usize,
    caps: Caps,
    test: impl Fn(&Tree, &ExactStats) -> Vec<String> + Sync,
) -> Result<EnumerationReport, OracleError> {
    caps.check_trees(n)?;
    caps.check_permutations(n)?;
    let trees: Vec<Tree> = all_trees(n).collect();
    let violations: Vec<Violation> = trees
        .par_iter()
        .flat_map_iter(|tree| {
            let stats = exact_stats_unchecked(tree);
            let mut problems = test(tree, &stats);
            if stats.permutations != factorial(n) {
                problems.push(format!("visited {} arrangements", stats.permutations));
            }
            problems.into_iter().map(move |d| Violation::new(tree, d))
        })
        .collect();
    Ok(EnumerationReport {
        check,
        n,
        trees_checked: trees.len() as u64,
        permutations_each: factorial(n),
        violations,
    })
}

/// For every tree on `n` vertices: `max C <= C_pairs` and, per edge,
/// `max C(u,v) <= n - k_u - k_v`.
pub fn verify_cpairs_bound(n: usize, caps: Caps) -> Result<EnumerationReport, OracleError> {
    enumerate_checks("cpairs_bound", n, caps, |tree, stats| {
        let mut problems = Vec::new();
        let bound = theory::c_pairs(tree);
        if Rational::from_integer(stats.max_c as i64) > bound {
            problems.push(format!("max C = {} > C_pairs = {bound}", stats.max_c));
        }
        for (&(u, v), &max_edge) in tree.edges().iter().zip(&stats.max_c_edge) {
            let edge_bound = tree.n() as i64 - tree.degree(u) as i64 - tree.degree(v) as i64;
            if max_edge as i64 > edge_bound {
                problems.push(format!(
                    "edge ({u},{v}): max C(u,v) = {max_edge} > {edge_bound}"
                ));
            }
        }
        problems
    })
}

/// For every tree on `n` vertices, the all-arrangement mean of `C` equals both
/// `C_pairs / 3` and `(n/6)(n - 1 - <k^2>)`, exactly.
pub fn verify_expectation_identity(n: usize, caps: Caps) -> Result<EnumerationReport, OracleError> {
    enumerate_checks("expectation_identity", n, caps, |tree, stats| {
        let mut problems = Vec::new();
        let by_pairs = theory::expected_crossings(tree);
        let nn = Rational::from_integer(tree.n() as i64);
        let by_moment = nn / 6 * (nn - 1 - tree.degree_second_moment());
        if stats.expected_c != by_pairs {
            problems.push(format!(
                "mean C = {} but C_pairs/3 = {by_pairs}",
                stats.expected_c
            ));
        }
        if stats.expected_c != by_moment {
            problems.push(format!(
                "mean C = {} but (n/6)(n-1-<k2>) = {by_moment}",
                stats.expected_c
            ));
        }
        problems
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sentence_tree() -> Tree {
        Tree::new(
            9,
            &[
                (1, 2),
                (2, 3),
                (2, 4),
                (4, 6),
                (5, 6),
                (6, 8),
                (7, 8),
                (8, 9),
            ],
        )
        .unwrap()
    }

    #[test]
    fn permutations_are_lexicographic_and_complete() {
        let mut p = vec![1, 2, 3, 4];
        let mut seen = vec![p.clone()];
        while next_permutation(&mut p) {
            assert!(seen.last().unwrap() < &p);
            seen.push(p.clone());
        }
        assert_eq!(seen.len(), 24);
        assert_eq!(factorial(9), 362_880);
    }

    #[test]
    fn linear_four() {
        let s = exact_expected_crossings(&Tree::linear(4).unwrap(), Caps::default()).unwrap();
        assert_eq!(s.expected_c, Rational::new(1, 3));
        assert_eq!(s.max_c, 1);
        assert_eq!(s.permutations, 24);
        assert_eq!(s.expected_d, Rational::new(5, 3));
    }

    #[test]
    fn stars_never_cross() {
        let s = exact_expected_crossings(&Tree::star(5).unwrap(), Caps::default()).unwrap();
        assert_eq!((s.expected_c, s.max_c), (Rational::from_integer(0), 0));
    }

    #[test]
    fn expected_distance_is_shape_free() {
        for tree in all_trees(4) {
            assert_eq!(
                exact_expected_distance(&tree, Caps::default()).unwrap(),
                Rational::new(5, 3)
            );
        }
        let two = Tree::linear(2).unwrap();
        assert_eq!(
            exact_expected_distance(&two, Caps::default()).unwrap(),
            Rational::from_integer(1)
        );
        // one fixed edge, all 5! arrangements
        let star5 = Tree::star(5).unwrap();
        assert_eq!(
            exact_expected_distance(&star5, Caps::default()).unwrap(),
            Rational::from_integer(2)
        );
    }

    #[test]
    fn caps_are_enforced() {
        let t = Tree::linear(10).unwrap();
        assert_eq!(
            exact_expected_crossings(&t, Caps::default()),
            Err(OracleError::TooLarge { n: 10, cap: 9 })
        );
        assert_eq!(
            verify_k2_extremes(8, Caps::default()).unwrap_err(),
            OracleError::TooLarge { n: 8, cap: 7 }
        );
        let tight = Caps {
            permutation_n: 3,
            tree_n: 7,
        };
        assert!(verify_expectation_identity(4, tight).is_err());
        assert!(sentence_tree().n() <= Caps::default().permutation_n);
    }

    #[test]
    fn k2_extremes() {
        let r = verify_k2_extremes(5, Caps::default()).unwrap();
        assert_eq!(
            (r.trees_checked, r.star_attainers, r.linear_attainers),
            (125, 5, 60)
        );
        assert!(r.violations.is_empty());
        let r = verify_k2_extremes(4, Caps::default()).unwrap();
        assert_eq!((r.star_attainers, r.linear_attainers), (4, 12));
        let r = verify_k2_extremes(2, Caps::default()).unwrap();
        assert_eq!(
            (r.trees_checked, r.star_attainers, r.linear_attainers),
            (1, 1, 1)
        );
        assert!(r.violations.is_empty());
    }

    #[test]
    fn cpairs_bound_and_identity_small() {
        for n in 2..=6 {
            let b = verify_cpairs_bound(n, Caps::default()).unwrap();
            assert!(b.violations.is_empty(), "{:?}", b.violations);
            assert_eq!(b.trees_checked, tree_count(n));
            let e = verify_expectation_identity(n, Caps::default()).unwrap();
            assert!(e.violations.is_empty(), "{:?}", e.violations);
            assert_eq!(e.permutations_each, factorial(n));
        }
        let s = exact_expected_crossings(&Tree::linear(4).unwrap(), Caps::default()).unwrap();
        assert_eq!(
            Rational::from_integer(s.max_c as i64),
            theory::c_pairs(&Tree::linear(4).unwrap())
        );
    }

    #[test]
    fn report_json_shape() {
        let r = verify_expectation_identity(4, Caps::default()).unwrap();
        let json = serde_json::to_value(&r).unwrap();
        assert_eq!(json["n"], 4);
        assert_eq!(json["trees_checked"], 16);
        assert_eq!(json["permutations_each"], 24);
        assert_eq!(json["violations"], serde_json::json!([]));
    }
}
