//! Closed-form crossing theory.
//!
//! Under a uniformly random arrangement, two vertex-disjoint edges cross with
//! probability 1/3: of the three ways to split four distinct positions into
//! two pairs, exactly one interleaves. Edges sharing a vertex never cross.
//! Linearity of expectation then gives `E[C] = C_pairs / 3`, where `C_pairs`
//! counts the vertex-disjoint edge pairs, and `C_pairs` depends only on `n`
//! and the degree second moment.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::serde_pq;
use crate::tree::{Tree, Vertex};
use crate::{format_pq, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TheoryError {
    #[error("NotAnEdge: ({0}, {1}) is not an edge of the tree")]
    NotAnEdge(Vertex, Vertex),
}

/// Number of edge pairs that can cross, `(n/2)(n - 1 - <k^2>)`.
pub fn c_pairs(tree: &Tree) -> Rational {
    let n = Rational::from_integer(tree.n() as i64);
    n / 2 * (n - 1 - tree.degree_second_moment())
}

/// Edges vertex-disjoint from `u~v`: `n - k_u - k_v`.
pub fn c_pairs_edge(tree: &Tree, u: Vertex, v: Vertex) -> Result<i64, TheoryError> {
    if !tree.has_edge(u, v) {
        return Err(TheoryError::NotAnEdge(u, v));
    }
    Ok(tree.n() as i64 - tree.degree(u) as i64 - tree.degree(v) as i64)
}

/// Probability that two distinct edges cross in a random arrangement.
///
/// Independent of `n`: only the relative order of the (at most four)
/// endpoint positions matters.
pub fn crossing_probability(shares_vertex: bool) -> Rational {
    if shares_vertex {
        Rational::from_integer(0)
    } else {
        Rational::new(1, 3)
    }
}

/// `E[C] = C_pairs / 3`.
pub fn expected_crossings(tree: &Tree) -> Rational {
    c_pairs(tree) * crossing_probability(false)
}

/// `E[C(u,v)] = C_pairs(u,v) / 3`.
pub fn expected_crossings_edge(tree: &Tree, u: Vertex, v: Vertex) -> Result<Rational, TheoryError> {
    Ok(Rational::from_integer(c_pairs_edge(tree, u, v)?) * crossing_probability(false))
}

/// `E[C]` of a path on `n` vertices, `n(n-5)/6 + 1`.
pub fn expected_crossings_linear(n: usize) -> Rational {
    let n = n as i64;
    Rational::new(n * (n - 5), 6) + 1
}

/// Range of `<k^2>` over trees on `n >= 2` vertices: `[4 - 6/n, n - 1]`.
pub fn k2_bounds(n: usize) -> (Rational, Rational) {
    let n = n as i64;
    (
        Rational::from_integer(4) - Rational::new(6, n),
        Rational::from_integer(n - 1),
    )
}

/// Range of `E[C]` over trees on `n` vertices; the upper end is the path's
/// value, clamped to zero below four vertices.
pub fn ec_bounds(n: usize) -> (Rational, Rational) {
    let zero = Rational::from_integer(0);
    let upper = if n < 4 {
        zero
    } else {
        expected_crossings_linear(n)
    };
    (zero, upper)
}

/// Expected mean dependency distance, `(n + 1)/3`.
///
/// Every edge has the same expected length, so this holds for any tree. A
/// single vertex has no edges and gets `0`.
pub fn expected_mean_distance(n: usize) -> Rational {
    if n < 2 {
        return Rational::from_integer(0);
    }
    Rational::new(n as i64 + 1, 3)
}

/// All closed-form quantities for one tree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TheoryReport {
    pub n: usize,
    #[serde(with = "serde_pq")]
    pub k2_moment: Rational,
    #[serde(with = "serde_pq")]
    pub c_pairs: Rational,
    #[serde(with = "serde_pq")]
    pub expected_c: Rational,
    #[serde(with = "serde_pq")]
    pub expected_d: Rational,
    #[serde(with = "serde_pq")]
    pub k2_lower: Rational,
    #[serde(with = "serde_pq")]
    pub k2_upper: Rational,
    #[serde(with = "serde_pq")]
    pub ec_upper: Rational,
}

impl TheoryReport {
    pub fn new(tree: &Tree) -> Self {
        let n = tree.n();
        let (k2_lower, k2_upper) = k2_bounds(n);
        TheoryReport {
            n,
            k2_moment: tree.degree_second_moment(),
            c_pairs: c_pairs(tree),
            expected_c: expected_crossings(tree),
            expected_d: expected_mean_distance(n),
            k2_lower,
            k2_upper,
            ec_upper: ec_bounds(n).1,
        }
    }

    /// Two columns, `quantity<TAB>p/q`, no header.
    pub fn to_tsv(&self) -> String {
        let rows = [
            ("n", Rational::from_integer(self.n as i64)),
            ("k2_moment", self.k2_moment),
            ("C_pairs", self.c_pairs),
            ("E[C]", self.expected_c),
            ("E[d]", self.expected_d),
            ("k2_lower", self.k2_lower),
            ("k2_upper", self.k2_upper),
            ("EC_upper", self.ec_upper),
        ];
        rows.iter()
            .map(|(name, value)| format!("{name}\t{}\n", format_pq(*value)))
            .collect()
    }
}

/// Shorthand for [`TheoryReport::new`].
pub fn theory_report(tree: &Tree) -> TheoryReport {
    TheoryReport::new(tree)
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

    fn int(x: i64) -> Rational {
        Rational::from_integer(x)
    }

    #[test]
    fn c_pairs_cases() {
        assert_eq!(c_pairs(&sentence_tree()), int(18));
        assert_eq!(c_pairs(&Tree::linear(4).unwrap()), int(1));
        for n in 2..20 {
            assert_eq!(c_pairs(&Tree::star(n).unwrap()), int(0));
        }
    }

    #[test]
    fn per_edge_pairs() {
        let t = sentence_tree();
        assert_eq!(c_pairs_edge(&t, 6, 8), Ok(3));
        assert_eq!(c_pairs_edge(&t, 8, 6), Ok(3));
        let total: i64 = t
            .edges()
            .iter()
            .map(|&(u, v)| c_pairs_edge(&t, u, v).unwrap())
            .sum();
        assert_eq!(total, 36);
        assert_eq!(c_pairs_edge(&Tree::linear(4).unwrap(), 1, 2), Ok(1));
        assert_eq!(c_pairs_edge(&Tree::star(7).unwrap(), 1, 5), Ok(0));
        assert_eq!(c_pairs_edge(&t, 1, 3), Err(TheoryError::NotAnEdge(1, 3)));

        assert_eq!(expected_crossings_edge(&t, 6, 8), Ok(int(1)));
        assert_eq!(
            expected_crossings_edge(&Tree::star(5).unwrap(), 1, 2),
            Ok(int(0))
        );
        let sum: Rational = t
            .edges()
            .iter()
            .map(|&(u, v)| expected_crossings_edge(&t, u, v).unwrap())
            .sum();
        assert_eq!(sum, int(12));
        assert_eq!(sum, expected_crossings(&t) * 2);
        assert!(expected_crossings_edge(&t, 1, 9).is_err());
    }

    #[test]
    fn probability() {
        assert_eq!(crossing_probability(false), Rational::new(1, 3));
        assert_eq!(crossing_probability(true), int(0));
    }

    #[test]
    fn expectations() {
        assert_eq!(expected_crossings(&sentence_tree()), int(6));
        assert_eq!(
            expected_crossings(&Tree::linear(4).unwrap()),
            Rational::new(1, 3)
        );
        assert_eq!(expected_crossings(&Tree::star(9).unwrap()), int(0));

        assert_eq!(expected_crossings_linear(4), Rational::new(1, 3));
        assert_eq!(expected_crossings_linear(5), int(1));
        // disjoint edge pairs of a 100-path: C(99, 2) - 98 adjacent pairs = 4753
        assert_eq!(expected_crossings_linear(100), Rational::new(4753, 3));
        for n in [5, 100] {
            assert_eq!(
                expected_crossings_linear(n),
                expected_crossings(&Tree::linear(n).unwrap())
            );
        }
    }

    #[test]
    fn bounds() {
        assert_eq!(k2_bounds(9), (Rational::new(10, 3), int(8)));
        assert_eq!(ec_bounds(4), (int(0), Rational::new(1, 3)));
        assert_eq!(ec_bounds(3).1, int(0));
        assert_eq!(ec_bounds(1).1, int(0));
        for n in 2..=50 {
            let (lo, hi) = k2_bounds(n);
            assert_eq!(Tree::linear(n).unwrap().degree_second_moment(), lo);
            assert_eq!(Tree::star(n).unwrap().degree_second_moment(), hi);
        }
    }

    #[test]
    fn upper_bound_grows_like_n_squared_over_six() {
        for (n, tol) in [(1_000usize, 0.01), (1_000_000, 0.00001)] {
            let upper = ec_bounds(n).1;
            let ratio = *upper.numer() as f64 / *upper.denom() as f64 / (n as f64).powi(2);
            assert!(
                (ratio - 1.0 / 6.0).abs() / (1.0 / 6.0) < tol,
                "n={n}: {ratio}"
            );
        }
    }

    #[test]
    fn mean_distance() {
        assert_eq!(expected_mean_distance(9), Rational::new(10, 3));
        assert_eq!(expected_mean_distance(2), int(1));
        assert_eq!(expected_mean_distance(5), int(2));
    }

    #[test]
    fn reports() {
        let r = theory_report(&sentence_tree());
        assert_eq!(
            (r.n, r.k2_moment, r.c_pairs, r.expected_c, r.expected_d),
            (9, int(4), int(18), int(6), Rational::new(10, 3))
        );
        let s = theory_report(&Tree::star(9).unwrap());
        assert_eq!(
            (s.k2_moment, s.c_pairs, s.expected_c),
            (int(8), int(0), int(0))
        );
        let l = theory_report(&Tree::linear(9).unwrap());
        assert_eq!((l.k2_moment, l.expected_c), (Rational::new(10, 3), int(7)));

        let tsv = r.to_tsv();
        assert!(tsv.contains("C_pairs\t18/1\n"));
        assert!(tsv.contains("E[C]\t6/1\n"));
        assert!(tsv.contains("E[d]\t10/3\n"));
        let json = serde_json::to_value(&r).unwrap();
        assert_eq!(json["expected_d"], "10/3");
        let back: TheoryReport = serde_json::from_value(json).unwrap();
        assert_eq!(back, r);
    }
}
