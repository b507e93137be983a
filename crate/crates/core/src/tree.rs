//! Undirected labeled trees.
//!
//! Vertices are labeled `1..=n`. A [`Tree`] is validated once at construction
//! and never mutated afterwards; operations that change the shape (such as
//! [`Tree::reduce_by_leaf`]) return a new value.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap};
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use thiserror::Error;

use crate::Rational;

/// Vertex label, `1..=n`.
pub type Vertex = usize;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("LoopEdge: edge ({0}, {0}) joins a vertex to itself")]
    LoopEdge(Vertex),
    #[error("DuplicateEdge: edge ({0}, {1}) appears more than once")]
    DuplicateEdge(Vertex, Vertex),
    #[error("WrongEdgeCount: a tree on {n} vertices needs {} edges, got {got}", .n - 1)]
    WrongEdgeCount { n: usize, got: usize },
    #[error("Disconnected: vertex {0} is not reachable from vertex 1")]
    Disconnected(Vertex),
    #[error("VertexOutOfRange: label {label} not in 1..={n}")]
    VertexOutOfRange { label: Vertex, n: usize },
    #[error("TooSmall: need at least {min} vertices, got {n}")]
    TooSmall { n: usize, min: usize },
    #[error("NotALeaf: vertex {vertex} has degree {degree}")]
    NotALeaf { vertex: Vertex, degree: usize },
    #[error("Parse: line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Shape classes with a closed-form degree second moment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Shape {
    /// One vertex adjacent to all others.
    Star,
    /// A path: every degree is at most two.
    Linear,
    /// Star and path at once (only possible for `n <= 3`).
    Both,
    Other,
}

/// An undirected tree on vertices `1..=n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Tree {
    n: usize,
    // Normalized `(min, max)` pairs sorted lexicographically.
    edges: Vec<(Vertex, Vertex)>,
    degrees: Vec<usize>,
}

impl Tree {
    /// Validates an edge list and builds the tree.
    pub fn new(n: usize, edges: &[(Vertex, Vertex)]) -> Result<Self, TreeError> {
        if n == 0 {
            return Err(TreeError::TooSmall { n, min: 1 });
        }
        let mut seen = BTreeSet::new();
        for &(u, v) in edges {
            for label in [u, v] {
                if label == 0 || label > n {
                    return Err(TreeError::VertexOutOfRange { label, n });
                }
            }
            if u == v {
                return Err(TreeError::LoopEdge(u));
            }
            let e = (u.min(v), u.max(v));
            if !seen.insert(e) {
                return Err(TreeError::DuplicateEdge(e.0, e.1));
            }
        }
        if edges.len() != n - 1 {
            return Err(TreeError::WrongEdgeCount {
                n,
                got: edges.len(),
            });
        }

        let edges: Vec<_> = seen.into_iter().collect();
        let mut degrees = vec![0; n];
        let mut adjacency = vec![Vec::new(); n];
        for &(u, v) in &edges {
            degrees[u - 1] += 1;
            degrees[v - 1] += 1;
            adjacency[u - 1].push(v - 1);
            adjacency[v - 1].push(u - 1);
        }

        let mut reached = vec![false; n];
        let mut stack = vec![0];
        reached[0] = true;
        while let Some(x) = stack.pop() {
            for &y in &adjacency[x] {
                if !reached[y] {
                    reached[y] = true;
                    stack.push(y);
                }
            }
        }
        if let Some(i) = reached.iter().position(|r| !r) {
            return Err(TreeError::Disconnected(i + 1));
        }

        Ok(Tree { n, edges, degrees })
    }

    /// Star on `n` vertices centered at vertex 1.
    pub fn star(n: usize) -> Result<Self, TreeError> {
        if n < 2 {
            return Err(TreeError::TooSmall { n, min: 2 });
        }
        let edges: Vec<_> = (2..=n).map(|v| (1, v)).collect();
        Tree::new(n, &edges)
    }

    /// Path `1 - 2 - ... - n`.
    pub fn linear(n: usize) -> Result<Self, TreeError> {
        if n < 2 {
            return Err(TreeError::TooSmall { n, min: 2 });
        }
        let edges: Vec<_> = (1..n).map(|v| (v, v + 1)).collect();
        Tree::new(n, &edges)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Edges as `(min, max)` pairs in lexicographic order.
    pub fn edges(&self) -> &[(Vertex, Vertex)] {
        &self.edges
    }

    /// Degrees `k_1..k_n`, indexed by `label - 1`.
    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    pub fn degree(&self, v: Vertex) -> usize {
        self.degrees[v - 1]
    }

    pub fn has_edge(&self, u: Vertex, v: Vertex) -> bool {
        self.edges.binary_search(&(u.min(v), u.max(v))).is_ok()
    }

    pub fn max_degree(&self) -> usize {
        self.degrees.iter().copied().max().unwrap_or(0)
    }

    /// Sum of squared degrees, `K_2`.
    pub fn k2_sum(&self) -> u64 {
        self.degrees.iter().map(|&k| (k * k) as u64).sum()
    }

    /// Degree second moment `<k^2> = K_2 / n`.
    pub fn degree_second_moment(&self) -> Rational {
        Rational::new(self.k2_sum() as i64, self.n as i64)
    }

    /// Mean degree `2 - 2/n`, which every tree has.
    pub fn mean_degree(&self) -> Rational {
        Rational::from_integer(2) - Rational::new(2, self.n as i64)
    }

    pub fn leaf_count(&self) -> usize {
        self.degrees.iter().filter(|&&k| k == 1).count()
    }

    pub fn classify(&self) -> Shape {
        let max = self.max_degree();
        let star = max + 1 == self.n;
        let linear = max <= 2;
        match (star, linear) {
            (true, true) => Shape::Both,
            (true, false) => Shape::Star,
            (false, true) => Shape::Linear,
            (false, false) => Shape::Other,
        }
    }

    /// Removes `leaf` and relabels the remaining vertices `1..=n-1` in their
    /// original relative order.
    ///
    /// Also returns the degree, in `self`, of the vertex the leaf hung from.
    /// Since only that vertex loses a unit of degree,
    /// `K_2(self) = K_2(reduced) + 2k`.
    pub fn reduce_by_leaf(&self, leaf: Vertex) -> Result<(Tree, usize), TreeError> {
        if self.n < 2 {
            return Err(TreeError::TooSmall { n: self.n, min: 2 });
        }
        if leaf == 0 || leaf > self.n {
            return Err(TreeError::VertexOutOfRange {
                label: leaf,
                n: self.n,
            });
        }
        let degree = self.degree(leaf);
        if degree != 1 {
            return Err(TreeError::NotALeaf {
                vertex: leaf,
                degree,
            });
        }
        let relabel = |v: Vertex| if v > leaf { v - 1 } else { v };
        let mut attachment = 0;
        let mut edges = Vec::with_capacity(self.n - 2);
        for &(u, v) in &self.edges {
            if u == leaf {
                attachment = v;
            } else if v == leaf {
                attachment = u;
            } else {
                edges.push((relabel(u), relabel(v)));
            }
        }
        let reduced = Tree::new(self.n - 1, &edges)?;
        Ok((reduced, self.degree(attachment)))
    }

    /// Decodes a Prüfer sequence into the tree on `seq.len() + 2` vertices.
    pub fn from_pruefer(seq: &PrueferSequence) -> Tree {
        let n = seq.n();
        let mut remaining = vec![1usize; n + 1];
        for &x in seq.labels() {
            remaining[x] += 1;
        }
        let mut leaves: BinaryHeap<Reverse<Vertex>> = (1..=n)
            .filter(|&v| remaining[v] == 1)
            .map(Reverse)
            .collect();
        let mut edges = Vec::with_capacity(n - 1);
        for &x in seq.labels() {
            let Reverse(leaf) = leaves.pop().expect("a tree always has a leaf");
            edges.push((leaf, x));
            remaining[leaf] -= 1;
            remaining[x] -= 1;
            if remaining[x] == 1 {
                leaves.push(Reverse(x));
            }
        }
        let Reverse(a) = leaves.pop().expect("two vertices remain");
        let Reverse(b) = leaves.pop().expect("two vertices remain");
        edges.push((a, b));
        Tree::new(n, &edges).expect("Prüfer decoding yields a tree")
    }

    /// Prüfer code of this tree (`n >= 2`).
    pub fn to_pruefer(&self) -> Result<PrueferSequence, TreeError> {
        if self.n < 2 {
            return Err(TreeError::TooSmall { n: self.n, min: 2 });
        }
        let mut adjacency = vec![BTreeSet::new(); self.n + 1];
        for &(u, v) in &self.edges {
            adjacency[u].insert(v);
            adjacency[v].insert(u);
        }
        let mut leaves: BinaryHeap<Reverse<Vertex>> = (1..=self.n)
            .filter(|&v| adjacency[v].len() == 1)
            .map(Reverse)
            .collect();
        let mut labels = Vec::with_capacity(self.n - 2);
        while labels.len() + 2 < self.n {
            let Reverse(leaf) = leaves.pop().expect("a tree always has a leaf");
            let parent = *adjacency[leaf].iter().next().expect("leaf has a neighbor");
            adjacency[parent].remove(&leaf);
            labels.push(parent);
            if adjacency[parent].len() == 1 {
                leaves.push(Reverse(parent));
            }
        }
        PrueferSequence::new(self.n, labels)
    }

    /// Uniformly random labeled tree on `n` vertices.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Tree, TreeError> {
        match n {
            0 => Err(TreeError::TooSmall { n, min: 1 }),
            1 => Tree::new(1, &[]),
            _ => {
                let labels = (0..n - 2).map(|_| rng.random_range(1..=n)).collect();
                Ok(Tree::from_pruefer(&PrueferSequence::new(n, labels)?))
            }
        }
    }

    /// Canonical text form: `n <count>` then one `u v` line per edge.
    pub fn to_text(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "n {}", self.n)?;
        for (u, v) in &self.edges {
            writeln!(f, "{u} {v}")?;
        }
        Ok(())
    }
}

impl FromStr for Tree {
    type Err = TreeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parse_err = |line: usize, msg: String| TreeError::Parse { line, msg };
        let mut n = None;
        let mut edges = Vec::new();
        for (i, raw) in s.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            match n {
                None => match fields.as_slice() {
                    ["n", count] => {
                        let count = count
                            .parse::<usize>()
                            .map_err(|e| parse_err(i + 1, format!("bad vertex count: {e}")))?;
                        n = Some(count);
                    }
                    _ => return Err(parse_err(i + 1, "expected `n <count>`".into())),
                },
                Some(_) => match fields.as_slice() {
                    [u, v] => {
                        let u = u
                            .parse::<usize>()
                            .map_err(|e| parse_err(i + 1, format!("bad label: {e}")))?;
                        let v = v
                            .parse::<usize>()
                            .map_err(|e| parse_err(i + 1, format!("bad label: {e}")))?;
                        edges.push((u, v));
                    }
                    _ => return Err(parse_err(i + 1, "expected `<u> <v>`".into())),
                },
            }
        }
        let n = n.ok_or_else(|| parse_err(0, "missing `n <count>` header".into()))?;
        Tree::new(n, &edges)
    }
}

/// A Prüfer code: `n - 2` labels in `1..=n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PrueferSequence {
    n: usize,
    labels: Vec<Vertex>,
}

impl PrueferSequence {
    pub fn new(n: usize, labels: Vec<Vertex>) -> Result<Self, TreeError> {
        if n < 2 {
            return Err(TreeError::TooSmall { n, min: 2 });
        }
        if labels.len() != n - 2 {
            return Err(TreeError::WrongEdgeCount {
                n,
                got: labels.len() + 1,
            });
        }
        if let Some(&label) = labels.iter().find(|&&x| x == 0 || x > n) {
            return Err(TreeError::VertexOutOfRange { label, n });
        }
        Ok(PrueferSequence { n, labels })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn labels(&self) -> &[Vertex] {
        &self.labels
    }
}

/// Every labeled tree on `n` vertices, in lexicographic Prüfer order.
///
/// Yields `n^(n-2)` trees for `n >= 2` and the single one-vertex tree for
/// `n = 1`.
pub fn all_trees(n: usize) -> AllTrees {
    AllTrees {
        n,
        next: match n {
            0 => None,
            1 => Some(Vec::new()),
            _ => Some(vec![1; n - 2]),
        },
    }
}

/// Number of labeled trees on `n` vertices (Cayley).
pub fn tree_count(n: usize) -> u64 {
    match n {
        0 => 0,
        1 => 1,
        _ => (n as u64).pow(n as u32 - 2),
    }
}

/// Iterator returned by [`all_trees`].
#[derive(Debug, Clone)]
pub struct AllTrees {
    n: usize,
    next: Option<Vec<Vertex>>,
}

impl Iterator for AllTrees {
    type Item = Tree;

    fn next(&mut self) -> Option<Tree> {
        let labels = self.next.take()?;
        let tree = if self.n == 1 {
            Tree::new(1, &[]).expect("single vertex")
        } else {
            let mut succ = labels.clone();
            // Odometer increment; the last position varies fastest.
            let mut i = succ.len();
            let mut carried = true;
            while carried && i > 0 {
                i -= 1;
                if succ[i] < self.n {
                    succ[i] += 1;
                    carried = false;
                } else {
                    succ[i] = 1;
                }
            }
            if !carried {
                self.next = Some(succ);
            }
            Tree::from_pruefer(&PrueferSequence { n: self.n, labels })
        };
        Some(tree)
    }
}
