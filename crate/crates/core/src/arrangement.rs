//! Linear arrangements and the quantities observed on them.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::tree::{Tree, Vertex};
use crate::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArrangementError {
    #[error("NotAPermutation: positions {0:?} are not a permutation of 1..=n")]
    NotAPermutation(Vec<usize>),
    #[error("VertexNotInArrangement: vertex {vertex} not in 1..={n}")]
    VertexNotInArrangement { vertex: Vertex, n: usize },
    #[error("SameVertex: cannot swap vertex {0} with itself")]
    SameVertex(Vertex),
    #[error("SizeMismatch: tree has {tree} vertices, arrangement has {arrangement}")]
    SizeMismatch { tree: usize, arrangement: usize },
    #[error("Parse: {0}")]
    Parse(String),
}

/// Bijection from vertices `1..=n` to positions `1..=n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LinearArrangement {
    // positions[v - 1] = position of vertex v.
    positions: Vec<usize>,
}

impl LinearArrangement {
    /// Vertex `v` at position `v`.
    pub fn identity(n: usize) -> Self {
        LinearArrangement {
            positions: (1..=n).collect(),
        }
    }

    /// Positions of vertices `1..=n`, in label order.
    pub fn from_positions(positions: Vec<usize>) -> Result<Self, ArrangementError> {
        let n = positions.len();
        let mut used = vec![false; n];
        for &p in &positions {
            if p == 0 || p > n || used[p - 1] {
                return Err(ArrangementError::NotAPermutation(positions));
            }
            used[p - 1] = true;
        }
        Ok(LinearArrangement { positions })
    }

    /// Builds an arrangement from the vertex found at each position.
    pub fn from_order(order: &[Vertex]) -> Result<Self, ArrangementError> {
        let n = order.len();
        let mut positions = vec![0; n];
        for (i, &v) in order.iter().enumerate() {
            if v == 0 || v > n || positions[v - 1] != 0 {
                return Err(ArrangementError::NotAPermutation(order.to_vec()));
            }
            positions[v - 1] = i + 1;
        }
        Ok(LinearArrangement { positions })
    }

    pub(crate) fn from_positions_unchecked(positions: Vec<usize>) -> Self {
        debug_assert!(Self::from_positions(positions.clone()).is_ok());
        LinearArrangement { positions }
    }

    pub fn n(&self) -> usize {
        self.positions.len()
    }

    pub fn positions(&self) -> &[usize] {
        &self.positions
    }

    /// Vertex order: the vertex at each position `1..=n`.
    pub fn order(&self) -> Vec<Vertex> {
        let mut order = vec![0; self.n()];
        for (i, &p) in self.positions.iter().enumerate() {
            order[p - 1] = i + 1;
        }
        order
    }

    pub fn position(&self, v: Vertex) -> Result<usize, ArrangementError> {
        if v == 0 || v > self.n() {
            return Err(ArrangementError::VertexNotInArrangement {
                vertex: v,
                n: self.n(),
            });
        }
        Ok(self.positions[v - 1])
    }

    /// Exchanges the positions of `a` and `b`.
    pub fn swap_positions(&self, a: Vertex, b: Vertex) -> Result<Self, ArrangementError> {
        self.position(a)?;
        self.position(b)?;
        if a == b {
            return Err(ArrangementError::SameVertex(a));
        }
        let mut next = self.clone();
        next.positions.swap(a - 1, b - 1);
        Ok(next)
    }

    pub(crate) fn swap_in_place(&mut self, a: Vertex, b: Vertex) {
        self.positions.swap(a - 1, b - 1);
    }

    /// Whether edge `u~v` crosses edge `s~t`.
    ///
    /// Edges sharing a vertex never cross.
    pub fn edges_cross(
        &self,
        u: Vertex,
        v: Vertex,
        s: Vertex,
        t: Vertex,
    ) -> Result<bool, ArrangementError> {
        let (pu, pv, ps, pt) = (
            self.position(u)?,
            self.position(v)?,
            self.position(s)?,
            self.position(t)?,
        );
        if u == s || u == t || v == s || v == t {
            return Ok(false);
        }
        Ok(spans_interleave(pu, pv, ps, pt))
    }

    fn check_size(&self, tree: &Tree) -> Result<(), ArrangementError> {
        if tree.n() != self.n() {
            return Err(ArrangementError::SizeMismatch {
                tree: tree.n(),
                arrangement: self.n(),
            });
        }
        Ok(())
    }
}

/// Whether arcs over position pairs `{a, b}` and `{c, d}` interleave.
///
/// The four positions must be distinct.
pub(crate) fn spans_interleave(a: usize, b: usize, c: usize, d: usize) -> bool {
    let (a, b) = (a.min(b), a.max(b));
    let (c, d) = (c.min(d), c.max(d));
    (a < c && c < b && b < d) || (c < a && a < d && d < b)
}

impl fmt::Display for LinearArrangement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for p in &self.positions {
            if !first {
                f.write_str(" ")?;
            }
            write!(f, "{p}")?;
            first = false;
        }
        Ok(())
    }
}

impl FromStr for LinearArrangement {
    type Err = ArrangementError;

    /// Whitespace-separated positions of vertices `1..=n`; `#` lines are
    /// ignored.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let positions = s
            .lines()
            .filter(|l| !l.trim_start().starts_with('#'))
            .flat_map(str::split_whitespace)
            .map(|tok| {
                tok.parse::<usize>()
                    .map_err(|e| ArrangementError::Parse(format!("bad position {tok:?}: {e}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        LinearArrangement::from_positions(positions)
    }
}

/// Observed crossing statistics of one `(tree, arrangement)` pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrossingReport {
    pub n: usize,
    pub crossings: u64,
    pub mean_distance: Rational,
    pub planar: bool,
    /// `C(u,v)` for each edge, in the tree's edge order.
    pub per_edge: Vec<((Vertex, Vertex), u64)>,
}

#[derive(Serialize)]
struct CrossingReportJson {
    n: usize,
    #[serde(rename = "C")]
    c: u64,
    mean_d_num: i64,
    mean_d_den: i64,
    planar: bool,
}

impl CrossingReport {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(CrossingReportJson {
            n: self.n,
            c: self.crossings,
            mean_d_num: *self.mean_distance.numer(),
            mean_d_den: *self.mean_distance.denom(),
            planar: self.planar,
        })
        .expect("plain struct serializes")
    }

    /// Flat `key=value` block, one key per line.
    pub fn to_key_value(&self) -> String {
        format!(
            "n={}\nC={}\nmean_d_num={}\nmean_d_den={}\nplanar={}\n",
            self.n,
            self.crossings,
            self.mean_distance.numer(),
            self.mean_distance.denom(),
            self.planar
        )
    }
}

/// Counts crossings over unordered edge pairs and fills the per-edge table.
pub fn count_crossings(
    tree: &Tree,
    pi: &LinearArrangement,
) -> Result<CrossingReport, ArrangementError> {
    pi.check_size(tree)?;
    let edges = tree.edges();
    let pos = pi.positions();
    let mut per_edge = vec![0u64; edges.len()];
    let mut crossings = 0;
    for (i, &(u, v)) in edges.iter().enumerate() {
        for (j, &(s, t)) in edges.iter().enumerate().skip(i + 1) {
            if u == s || u == t || v == s || v == t {
                continue;
            }
            if spans_interleave(pos[u - 1], pos[v - 1], pos[s - 1], pos[t - 1]) {
                crossings += 1;
                per_edge[i] += 1;
                per_edge[j] += 1;
            }
        }
    }
    Ok(CrossingReport {
        n: tree.n(),
        crossings,
        mean_distance: mean_distance_unchecked(tree, pi),
        planar: crossings == 0,
        per_edge: edges.iter().copied().zip(per_edge).collect(),
    })
}

/// Number of crossings only, without the per-edge table.
pub fn crossings(tree: &Tree, pi: &LinearArrangement) -> Result<u64, ArrangementError> {
    pi.check_size(tree)?;
    Ok(crossings_unchecked(tree, pi))
}

pub(crate) fn crossings_unchecked(tree: &Tree, pi: &LinearArrangement) -> u64 {
    let edges = tree.edges();
    let pos = pi.positions();
    let mut c = 0;
    for (i, &(u, v)) in edges.iter().enumerate() {
        for &(s, t) in &edges[i + 1..] {
            if u != s
                && u != t
                && v != s
                && v != t
                && spans_interleave(pos[u - 1], pos[v - 1], pos[s - 1], pos[t - 1])
            {
                c += 1;
            }
        }
    }
    c
}

/// Sum of `|pi(u) - pi(v)|` over all edges.
pub fn total_distance(tree: &Tree, pi: &LinearArrangement) -> Result<u64, ArrangementError> {
    pi.check_size(tree)?;
    Ok(total_distance_unchecked(tree, pi))
}

pub(crate) fn total_distance_unchecked(tree: &Tree, pi: &LinearArrangement) -> u64 {
    let pos = pi.positions();
    tree.edges()
        .iter()
        .map(|&(u, v)| pos[u - 1].abs_diff(pos[v - 1]) as u64)
        .sum()
}

/// Mean dependency distance over the `n - 1` edges.
///
/// A single-vertex tree has no edges and gets `0`.
pub fn mean_dependency_distance(
    tree: &Tree,
    pi: &LinearArrangement,
) -> Result<Rational, ArrangementError> {
    pi.check_size(tree)?;
    Ok(mean_distance_unchecked(tree, pi))
}

fn mean_distance_unchecked(tree: &Tree, pi: &LinearArrangement) -> Rational {
    let m = tree.edges().len() as i64;
    if m == 0 {
        return Rational::from_integer(0);
    }
    Rational::new(total_distance_unchecked(tree, pi) as i64, m)
}
