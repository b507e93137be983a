//! Monte Carlo experiments over random arrangements.
//!
//! Randomness comes from ChaCha8 streams. Work is split into fixed units
//! (sample chunks, replicas), and unit `i` draws from stream `i` of the
//! generator seeded with the caller's seed, so results depend only on
//! `(seed, parameters)` and never on thread count or scheduling. All
//! reductions sum integers.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::arrangement::{
    crossings_unchecked, spans_interleave, total_distance_unchecked, LinearArrangement,
};
use crate::tree::{Tree, Vertex};

const CHUNK: u64 = 4096;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LabError {
    #[error("NotAnEdge: ({0}, {1}) is not an edge of the tree")]
    NotAnEdge(Vertex, Vertex),
    #[error("SameEdge: both edges are ({0}, {1})")]
    SameEdge(Vertex, Vertex),
    #[error("TooFewSamples: need at least 2 samples, got {0}")]
    TooFewSamples(u64),
    #[error("TooFewReplicas: need at least 1 replica")]
    TooFewReplicas,
    #[error("SizeMismatch: tree has {tree} vertices, arrangement has {arrangement}")]
    SizeMismatch { tree: usize, arrangement: usize },
}

/// Whether to fan work out over the rayon pool. Both modes give
/// bit-identical results.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    #[default]
    Parallel,
    Sequential,
}

/// Generator for work unit `unit` under `seed`.
pub fn unit_rng(seed: u64, unit: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(unit);
    rng
}

/// Uniformly random arrangement of `n` vertices (Fisher-Yates).
pub fn random_arrangement<R: Rng + ?Sized>(n: usize, rng: &mut R) -> LinearArrangement {
    let mut positions: Vec<usize> = (1..=n).collect();
    positions.shuffle(rng);
    LinearArrangement::from_positions_unchecked(positions)
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: u64,
    pub seed: u64,
}

impl McEstimate {
    fn from_sums(sum: u128, sum_sq: u128, samples: u64, seed: u64) -> Self {
        let n = samples as u128;
        // n^2 * variance * (n-1)/n, kept in integers so a constant sample gives exactly 0.
        let spread = n * sum_sq - sum * sum;
        let variance = spread as f64 / (n * (n - 1)) as f64;
        McEstimate {
            mean: sum as f64 / n as f64,
            std_error: (variance / n as f64).sqrt(),
            samples,
            seed,
        }
    }

    pub fn to_key_value(&self) -> String {
        format!(
            "mean={}\nstd_error={}\nsamples={}\nseed={}\n",
            self.mean, self.std_error, self.samples, self.seed
        )
    }

    /// Whether `target` lies within `k` standard errors of the mean.
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.mean - target).abs() <= k * self.std_error
    }
}

/// Runs `samples` draws of `draw` in fixed chunks and sums `(x, x^2)`.
fn sample_sums(
    samples: u64,
    seed: u64,
    execution: Execution,
    draw: impl Fn(&mut ChaCha8Rng) -> u64 + Sync,
) -> (u128, u128) {
    let chunks = samples.div_ceil(CHUNK);
    let chunk = |i: u64| {
        let mut rng = unit_rng(seed, i);
        let len = CHUNK.min(samples - i * CHUNK);
        let mut sum = 0u128;
        let mut sum_sq = 0u128;
        for _ in 0..len {
            let x = draw(&mut rng) as u128;
            sum += x;
            sum_sq += x * x;
        }
        (sum, sum_sq)
    };
    let add = |a: (u128, u128), b: (u128, u128)| (a.0 + b.0, a.1 + b.1);
    match execution {
        Execution::Parallel => (0..chunks)
            .into_par_iter()
            .map(chunk)
            .reduce(|| (0, 0), add),
        Execution::Sequential => (0..chunks).map(chunk).fold((0, 0), add),
    }
}

/// Estimates `E[C]` from `samples` uniformly random arrangements.
pub fn estimate_expected_crossings(
    tree: &Tree,
    samples: u64,
    seed: u64,
) -> Result<McEstimate, LabError> {
    estimate_expected_crossings_with(tree, samples, seed, Execution::Parallel)
}

pub fn estimate_expected_crossings_with(
    tree: &Tree,
    samples: u64,
    seed: u64,
    execution: Execution,
) -> Result<McEstimate, LabError> {
    if samples < 2 {
        return Err(LabError::TooFewSamples(samples));
    }
    let n = tree.n();
    let (sum, sum_sq) = sample_sums(samples, seed, execution, |rng| {
        crossings_unchecked(tree, &random_arrangement(n, rng))
    });
    Ok(McEstimate::from_sums(sum, sum_sq, samples, seed))
}

/// Estimates the probability that edges `e1` and `e2` cross.
pub fn estimate_crossing_probability(
    tree: &Tree,
    e1: (Vertex, Vertex),
    e2: (Vertex, Vertex),
    samples: u64,
    seed: u64,
) -> Result<McEstimate, LabError> {
    for (u, v) in [e1, e2] {
        if !tree.has_edge(u, v) {
            return Err(LabError::NotAnEdge(u, v));
        }
    }
    let norm = |(u, v): (Vertex, Vertex)| (u.min(v), u.max(v));
    if norm(e1) == norm(e2) {
        return Err(LabError::SameEdge(e1.0, e1.1));
    }
    if samples < 2 {
        return Err(LabError::TooFewSamples(samples));
    }
    let ((u, v), (s, t)) = (e1, e2);
    let shares = u == s || u == t || v == s || v == t;
    let n = tree.n();
    let (sum, sum_sq) = sample_sums(samples, seed, Execution::Parallel, |rng| {
        let pi = random_arrangement(n, rng);
        let p = pi.positions();
        u64::from(!shares && spans_interleave(p[u - 1], p[v - 1], p[s - 1], p[t - 1]))
    });
    Ok(McEstimate::from_sums(sum, sum_sq, samples, seed))
}

/// Parameters of a random-swap walk.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SwapWalk {
    pub swaps: usize,
    pub replicas: u64,
    pub seed: u64,
    /// Length of the closing window summarized in [`SwapTrajectory::tail`].
    pub tail: usize,
}

impl SwapWalk {
    pub fn new(swaps: usize, replicas: u64, seed: u64) -> Self {
        SwapWalk {
            swaps,
            replicas,
            seed,
            tail: 20.min(swaps),
        }
    }
}

/// Replica means after each swap.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SwapStep {
    pub swap: usize,
    pub mean_c: f64,
    pub mean_d: f64,
    pub se_c: f64,
    pub se_d: f64,
}

/// Mean over the closing window, with standard errors taken from the spread
/// of per-replica window averages.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailSummary {
    pub first_swap: usize,
    pub last_swap: usize,
    pub mean_c: f64,
    pub se_c: f64,
    pub mean_d: f64,
    pub se_d: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SwapTrajectory {
    pub steps: Vec<SwapStep>,
    pub replicas: u64,
    pub seed: u64,
    pub tail: Option<TailSummary>,
}

#[derive(Clone)]
struct WalkSums {
    c: Vec<u128>,
    c_sq: Vec<u128>,
    d: Vec<u128>,
    d_sq: Vec<u128>,
    tail_c: u128,
    tail_c_sq: u128,
    tail_d: u128,
    tail_d_sq: u128,
}

impl WalkSums {
    fn new(steps: usize) -> Self {
        WalkSums {
            c: vec![0; steps],
            c_sq: vec![0; steps],
            d: vec![0; steps],
            d_sq: vec![0; steps],
            tail_c: 0,
            tail_c_sq: 0,
            tail_d: 0,
            tail_d_sq: 0,
        }
    }

    fn merge(mut self, other: WalkSums) -> WalkSums {
        for (a, b) in [
            (&mut self.c, &other.c),
            (&mut self.c_sq, &other.c_sq),
            (&mut self.d, &other.d),
            (&mut self.d_sq, &other.d_sq),
        ] {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        }
        self.tail_c += other.tail_c;
        self.tail_c_sq += other.tail_c_sq;
        self.tail_d += other.tail_d;
        self.tail_d_sq += other.tail_d_sq;
        self
    }
}

fn mean_and_se(sum: u128, sum_sq: u128, count: u128, scale: f64) -> (f64, f64) {
    let mean = sum as f64 / count as f64 / scale;
    if count < 2 {
        return (mean, 0.0);
    }
    let spread = count * sum_sq - sum * sum;
    let variance = spread as f64 / (count * (count - 1)) as f64 / (scale * scale);
    (mean, (variance / count as f64).sqrt())
}

/// Starts every replica at `initial` and applies `walk.swaps` swaps, each of
/// a uniformly random pair of distinct vertices, recording `C` and `<d>`
/// after every swap. Step 0 is the initial arrangement.
pub fn swap_walk(
    tree: &Tree,
    initial: &LinearArrangement,
    walk: SwapWalk,
) -> Result<SwapTrajectory, LabError> {
    swap_walk_with(tree, initial, walk, Execution::Parallel)
}

pub fn swap_walk_with(
    tree: &Tree,
    initial: &LinearArrangement,
    walk: SwapWalk,
    execution: Execution,
) -> Result<SwapTrajectory, LabError> {
    if tree.n() != initial.n() {
        return Err(LabError::SizeMismatch {
            tree: tree.n(),
            arrangement: initial.n(),
        });
    }
    if walk.replicas == 0 {
        return Err(LabError::TooFewReplicas);
    }
    let n = tree.n();
    let steps = walk.swaps + 1;
    let tail = walk.tail.min(walk.swaps);
    let tail_start = steps - tail;

    let replica = |i: u64| {
        let mut sums = WalkSums::new(steps);
        let mut rng = unit_rng(walk.seed, i);
        let mut pi = initial.clone();
        let (mut tail_c, mut tail_d) = (0u128, 0u128);
        for step in 0..steps {
            if step > 0 && n >= 2 {
                let a = rng.random_range(1..=n);
                let mut b = rng.random_range(1..n);
                if b >= a {
                    b += 1;
                }
                pi.swap_in_place(a, b);
            }
            let c = crossings_unchecked(tree, &pi) as u128;
            let d = total_distance_unchecked(tree, &pi) as u128;
            sums.c[step] = c;
            sums.c_sq[step] = c * c;
            sums.d[step] = d;
            sums.d_sq[step] = d * d;
            if step >= tail_start {
                tail_c += c;
                tail_d += d;
            }
        }
        sums.tail_c = tail_c;
        sums.tail_c_sq = tail_c * tail_c;
        sums.tail_d = tail_d;
        sums.tail_d_sq = tail_d * tail_d;
        sums
    };

    let total = match execution {
        Execution::Parallel => (0..walk.replicas)
            .into_par_iter()
            .map(replica)
            .reduce(|| WalkSums::new(steps), WalkSums::merge),
        Execution::Sequential => (0..walk.replicas)
            .map(replica)
            .fold(WalkSums::new(steps), WalkSums::merge),
    };

    let r = walk.replicas as u128;
    let edges = (n.max(2) - 1) as f64;
    let steps = (0..steps)
        .map(|s| {
            let (mean_c, se_c) = mean_and_se(total.c[s], total.c_sq[s], r, 1.0);
            let (mean_d, se_d) = mean_and_se(total.d[s], total.d_sq[s], r, edges);
            SwapStep {
                swap: s,
                mean_c,
                mean_d,
                se_c,
                se_d,
            }
        })
        .collect();
    let tail = (tail > 0).then(|| {
        let w = tail as f64;
        let (mean_c, se_c) = mean_and_se(total.tail_c, total.tail_c_sq, r, w);
        let (mean_d, se_d) = mean_and_se(total.tail_d, total.tail_d_sq, r, w * edges);
        TailSummary {
            first_swap: tail_start,
            last_swap: walk.swaps,
            mean_c,
            se_c,
            mean_d,
            se_d,
        }
    });
    Ok(SwapTrajectory {
        steps,
        replicas: walk.replicas,
        seed: walk.seed,
        tail,
    })
}

impl SwapTrajectory {
    /// `swap<TAB>mean_C<TAB>mean_d` with six significant digits.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("swap\tmean_C\tmean_d\n");
        for s in &self.steps {
            out.push_str(&format!(
                "{}\t{}\t{}\n",
                s.swap,
                format_sig(s.mean_c, 6),
                format_sig(s.mean_d, 6)
            ));
        }
        out
    }

    pub fn mean_c(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.mean_c).collect()
    }

    pub fn mean_d(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.mean_d).collect()
    }
}

/// Trailing moving averages: element `i` is the mean of `values[i..i + window]`.
pub fn moving_average(values: &[f64], window: usize) -> Vec<f64> {
    if window == 0 {
        return Vec::new();
    }
    values
        .windows(window)
        .map(|w| w.iter().sum::<f64>() / window as f64)
        .collect()
}

/// Formats like C's `%.{digits}g`.
pub fn format_sig(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { "0".into() } else { x.to_string() };
    }
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific notation");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= digits as i32 {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{mantissa}e{sign}{:02}", exp.abs());
    }
    let decimals = (digits as i32 - 1 - exp).max(0) as usize;
    trim_zeros(&format!("{:.*}", decimals, x)).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use std::collections::HashMap;

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
    fn arrangement_basics() {
        let mut rng = unit_rng(1, 0);
        assert_eq!(
            random_arrangement(1, &mut rng),
            LinearArrangement::identity(1)
        );
        let a = random_arrangement(20, &mut unit_rng(9, 3));
        let b = random_arrangement(20, &mut unit_rng(9, 3));
        assert_eq!(a, b);
        assert_ne!(a, random_arrangement(20, &mut unit_rng(9, 4)));
    }

    #[test]
    fn shuffle_is_uniform_on_four() {
        // 240,000 draws over 24 permutations: 10,000 expected each.
        let draws = 240_000;
        let mut rng = unit_rng(2024, 0);
        let mut counts: HashMap<Vec<usize>, u64> = HashMap::new();
        for _ in 0..draws {
            *counts
                .entry(random_arrangement(4, &mut rng).positions().to_vec())
                .or_default() += 1;
        }
        assert_eq!(counts.len(), 24);
        let p = 1.0 / 24.0;
        let sigma = (draws as f64 * p * (1.0 - p)).sqrt();
        let mut chi2 = 0.0;
        for &c in counts.values() {
            assert!((c as f64 - 10_000.0).abs() <= 5.0 * sigma, "count {c}");
            chi2 += (c as f64 - 10_000.0).powi(2) / 10_000.0;
        }
        // chi-square, 23 degrees of freedom, alpha = 0.001
        assert!(chi2 < 49.728, "chi2 = {chi2}");
    }

    #[test]
    fn stars_estimate_exactly_zero() {
        let e = estimate_expected_crossings(&Tree::star(10).unwrap(), 5000, 3).unwrap();
        assert_eq!((e.mean, e.std_error, e.samples), (0.0, 0.0, 5000));
    }

    #[test]
    fn estimates_are_reproducible_across_execution_modes() {
        let t = sentence_tree();
        let a = estimate_expected_crossings_with(&t, 10_000, 11, Execution::Parallel).unwrap();
        let b = estimate_expected_crossings_with(&t, 10_000, 11, Execution::Sequential).unwrap();
        assert_eq!(a, b);
        assert!(a.within(6.0, 4.0));
        assert_eq!(
            estimate_expected_crossings(&t, 1, 0),
            Err(LabError::TooFewSamples(1))
        );
    }

    #[test]
    fn probability_errors() {
        let t = sentence_tree();
        assert_eq!(
            estimate_crossing_probability(&t, (1, 2), (1, 3), 100, 0),
            Err(LabError::NotAnEdge(1, 3))
        );
        assert_eq!(
            estimate_crossing_probability(&t, (1, 2), (2, 1), 100, 0),
            Err(LabError::SameEdge(1, 2))
        );
        let adj = estimate_crossing_probability(&t, (1, 2), (2, 3), 1000, 0).unwrap();
        assert_eq!((adj.mean, adj.std_error), (0.0, 0.0));
    }

    #[test]
    fn walk_shape_and_determinism() {
        let t = sentence_tree();
        let id = LinearArrangement::identity(9);
        let walk = SwapWalk::new(30, 200, 5);
        let a = swap_walk_with(&t, &id, walk, Execution::Parallel).unwrap();
        let b = swap_walk_with(&t, &id, walk, Execution::Sequential).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.steps.len(), 31);
        assert_eq!((a.steps[0].mean_c, a.steps[0].mean_d), (0.0, 1.375));
        assert_eq!(a.steps[0].se_c, 0.0);
        for s in &a.steps {
            assert!((0.0..=18.0).contains(&s.mean_c));
            assert!((1.0..=8.0).contains(&s.mean_d));
        }
        let tail = a.tail.unwrap();
        assert_eq!((tail.first_swap, tail.last_swap), (11, 30));

        let zero = swap_walk(&t, &id, SwapWalk::new(0, 3, 1)).unwrap();
        assert_eq!(zero.steps.len(), 1);
        assert_eq!(zero.tail, None);
        assert_eq!(
            swap_walk(&t, &LinearArrangement::identity(4), walk),
            Err(LabError::SizeMismatch {
                tree: 9,
                arrangement: 4
            })
        );
        assert_eq!(
            swap_walk(&t, &id, SwapWalk::new(3, 0, 1)),
            Err(LabError::TooFewReplicas)
        );
    }

    #[test]
    fn walk_keeps_valid_permutations() {
        let t = Tree::linear(6).unwrap();
        let mut rng = unit_rng(77, 0);
        let mut pi = LinearArrangement::identity(6);
        for _ in 0..1000 {
            let a = rng.random_range(1..=6);
            let mut b = rng.random_range(1..6);
            if b >= a {
                b += 1;
            }
            pi = pi.swap_positions(a, b).unwrap();
            assert!(LinearArrangement::from_positions(pi.positions().to_vec()).is_ok());
            assert!(crossings_unchecked(&t, &pi) <= 6);
        }
    }

    #[test]
    fn one_swap_preserves_uniformity() {
        // Linear n=4 crosses exactly when 1~2 and 3~4 interleave, probability 1/3.
        let t = Tree::linear(4).unwrap();
        let samples = 100_000u64;
        let mut rng = unit_rng(31, 0);
        let (mut before, mut after) = (0u64, 0u64);
        for _ in 0..samples {
            let mut pi = random_arrangement(4, &mut rng);
            before += crossings_unchecked(&t, &pi);
            let a = rng.random_range(1..=4);
            let mut b = rng.random_range(1..4);
            if b >= a {
                b += 1;
            }
            pi.swap_in_place(a, b);
            after += crossings_unchecked(&t, &pi);
        }
        let sigma = (samples as f64 * (1.0 / 3.0) * (2.0 / 3.0)).sqrt();
        for hits in [before, after] {
            assert!(
                (hits as f64 - samples as f64 / 3.0).abs() <= 3.0 * sigma,
                "{hits}"
            );
        }
    }

    #[test]
    fn smoothing_and_formatting() {
        assert_eq!(
            moving_average(&[1.0, 2.0, 3.0, 4.0], 2),
            vec![1.5, 2.5, 3.5]
        );
        assert_eq!(format_sig(1.375, 6), "1.375");
        assert_eq!(format_sig(10.0 / 3.0, 6), "3.33333");
        assert_eq!(format_sig(6.0, 6), "6");
        assert_eq!(format_sig(0.0, 6), "0");
        assert_eq!(format_sig(123456.7, 6), "123457");
        assert_eq!(format_sig(1234567.0, 6), "1.23457e+06");
        assert_eq!(format_sig(0.00012345678, 6), "0.000123457");
        assert_eq!(format_sig(9.9999996, 6), "10");
    }

    #[test]
    fn trajectory_tsv() {
        let t = sentence_tree();
        let tr = swap_walk(&t, &LinearArrangement::identity(9), SwapWalk::new(2, 10, 4)).unwrap();
        let tsv = tr.to_tsv();
        let mut lines = tsv.lines();
        assert_eq!(lines.next(), Some("swap\tmean_C\tmean_d"));
        assert_eq!(lines.next(), Some("0\t0\t1.375"));
        assert_eq!(tsv.lines().count(), 4);
    }
}
