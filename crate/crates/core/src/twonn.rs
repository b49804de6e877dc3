//! The twoNN intrinsic dimension estimator.
//!
//! For every node the ratio `mu = r2 / r1` of its second to first
//! nearest-neighbour distance is recorded. Under locally uniform sampling from
//! a `d`-dimensional space the ratios follow `F(mu) = 1 - mu^(-d)`. Sorting the
//! ratios and matching the empirical CDF `i / n` against `F` gives one estimate
//!
//! ```text
//! d_i = -ln(1 - i/n) / ln(mu_(i))        i = 1 .. n-1
//! ```
//!
//! per rank, and the reported dimension is the mean of `d_i` over the middle
//! half of the ranks.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{DissimilarityMatrix, PointCloud};
use crate::neighbors::KdTree;

/// Fewest nodes twoNN accepts: two neighbours per node plus room to rank.
pub const MIN_NODES: usize = 4;

/// Neighbour distances closer than this, relative to `r2`, count as a tie
/// and give `mu = 1`. Symmetric configurations otherwise produce ratios a
/// few ulps above one and absurdly large `d_i`.
pub const TIE_RTOL: f64 = 1e-12;

/// First and second nearest-neighbour distances of every node and the
/// permutation that sorts their ratios.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighbourRatios {
    pub r1: Vec<f64>,
    pub r2: Vec<f64>,
    /// Index of the nearest and second-nearest neighbour. `usize::MAX` when
    /// the ratios were supplied directly.
    pub nn1: Vec<usize>,
    pub nn2: Vec<usize>,
    pub mu: Vec<f64>,
    /// Nodes ordered by ascending `mu`, ties by node index.
    pub order: Vec<usize>,
}

impl NeighbourRatios {
    fn from_parts(r1: Vec<f64>, r2: Vec<f64>, nn1: Vec<usize>, nn2: Vec<usize>) -> Self {
        let mu: Vec<f64> = r1
            .iter()
            .zip(&r2)
            .map(|(a, b)| if b - a <= TIE_RTOL * b { 1.0 } else { b / a })
            .collect();
        let mut order: Vec<usize> = (0..mu.len()).collect();
        order.sort_by(|&a, &b| mu[a].total_cmp(&mu[b]).then(a.cmp(&b)));
        Self { r1, r2, nn1, nn2, mu, order }
    }

    /// Ratios supplied directly, e.g. samples drawn from `F(mu)`. Distances are
    /// set to `r1 = 1`, `r2 = mu`.
    pub fn from_mu(mu: Vec<f64>) -> Result<Self> {
        if mu.len() < MIN_NODES {
            return Err(Error::TooSmall { needed: MIN_NODES, got: mu.len() });
        }
        if let Some(i) = mu.iter().position(|m| !(m.is_finite() && *m >= 1.0)) {
            return Err(Error::InvalidParameter(format!("mu[{i}] = {} is not a ratio >= 1", mu[i])));
        }
        let n = mu.len();
        Ok(Self::from_parts(vec![1.0; n], mu, vec![usize::MAX; n], vec![usize::MAX; n]))
    }

    pub fn n(&self) -> usize {
        self.mu.len()
    }

    /// `mu` in ascending order.
    pub fn sorted_mu(&self) -> Vec<f64> {
        self.order.iter().map(|&i| self.mu[i]).collect()
    }
}

/// Reads the two smallest finite off-diagonal entries of each row.
pub fn neighbour_ratios_from_dissimilarity(m: &DissimilarityMatrix) -> Result<NeighbourRatios> {
    let n = m.n();
    if n < MIN_NODES {
        return Err(Error::TooSmall { needed: MIN_NODES, got: n });
    }
    let per_node: Vec<Result<(f64, f64, usize, usize)>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let row = m.row(i);
            let mut best = [(f64::INFINITY, usize::MAX); 2];
            for (j, &v) in row.iter().enumerate() {
                if j == i || v.is_infinite() {
                    continue;
                }
                if v == 0.0 {
                    return Err(Error::Degenerate { node: i, other: j });
                }
                // Strict comparisons keep the lowest index on ties.
                if v < best[0].0 {
                    best[1] = best[0];
                    best[0] = (v, j);
                } else if v < best[1].0 {
                    best[1] = (v, j);
                }
            }
            if best[1].1 == usize::MAX {
                return Err(Error::TooFewNeighbours { node: i });
            }
            Ok((best[0].0, best[1].0, best[0].1, best[1].1))
        })
        .collect();
    collect_parts(per_node)
}

/// Same result as running [`neighbour_ratios_from_dissimilarity`] on the
/// Euclidean distance matrix, using a kd-tree instead of an `n x n` matrix.
pub fn neighbour_ratios_from_points(p: &PointCloud) -> Result<NeighbourRatios> {
    let n = p.n();
    if n < MIN_NODES {
        return Err(Error::TooSmall { needed: MIN_NODES, got: n });
    }
    let tree = KdTree::build(p);
    let per_node: Vec<Result<(f64, f64, usize, usize)>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let nn = tree.nearest(i, 2);
            if nn[0].distance == 0.0 {
                return Err(Error::Degenerate { node: i, other: nn[0].index });
            }
            Ok((nn[0].distance, nn[1].distance, nn[0].index, nn[1].index))
        })
        .collect();
    collect_parts(per_node)
}

fn collect_parts(per_node: Vec<Result<(f64, f64, usize, usize)>>) -> Result<NeighbourRatios> {
    let n = per_node.len();
    let (mut r1, mut r2, mut nn1, mut nn2) =
        (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    for item in per_node {
        let (a, b, i, j) = item?;
        r1.push(a);
        r2.push(b);
        nn1.push(i);
        nn2.push(j);
    }
    Ok(NeighbourRatios::from_parts(r1, r2, nn1, nn2))
}

/// Rank range averaged into `d_star`, as fractions of `n`. The range is
/// `[ceil(lower * n), floor(upper * n)]`, clipped to `1 ..= n - 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub lower: f64,
    pub upper: f64,
}

impl Default for Window {
    fn default() -> Self {
        Self { lower: 0.25, upper: 0.75 }
    }
}

impl Window {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&lower) || !(0.0..=1.0).contains(&upper) || lower > upper {
            return Err(Error::InvalidParameter(format!(
                "window [{lower}, {upper}] must satisfy 0 <= lower <= upper <= 1"
            )));
        }
        Ok(Self { lower, upper })
    }

    /// Inclusive 1-based rank bounds for `n` nodes.
    pub fn bounds(&self, n: usize) -> (usize, usize) {
        let lo = ((self.lower * n as f64).ceil() as usize).max(1);
        let hi = ((self.upper * n as f64).floor() as usize).min(n.saturating_sub(1));
        (lo, hi)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DimensionEstimate {
    pub n: usize,
    /// Sorted ratios, `mu_sorted[i - 1]` belongs to rank `i`.
    pub mu_sorted: Vec<f64>,
    /// `d_curve[i - 1]` is `d_i` for ranks `1 ..= n - 1`; `None` where the
    /// ratio is exactly one.
    pub d_curve: Vec<Option<f64>>,
    /// Inclusive rank window.
    pub window: (usize, usize),
    pub d_star: f64,
    pub d_min: f64,
    pub d_max: f64,
}

pub fn estimate_dimension(r: &NeighbourRatios) -> Result<DimensionEstimate> {
    estimate_dimension_with_window(r, Window::default())
}

pub fn estimate_dimension_with_window(r: &NeighbourRatios, window: Window) -> Result<DimensionEstimate> {
    let n = r.n();
    if n < MIN_NODES {
        return Err(Error::TooSmall { needed: MIN_NODES, got: n });
    }
    let mu_sorted = r.sorted_mu();
    let nf = n as f64;
    let d_curve: Vec<Option<f64>> = (1..n)
        .map(|i| {
            let mu = mu_sorted[i - 1];
            (mu > 1.0).then(|| -(1.0 - i as f64 / nf).ln() / mu.ln())
        })
        .collect();

    let (lo, hi) = window.bounds(n);
    let mut sum = 0.0;
    let mut count = 0usize;
    let mut d_min = f64::INFINITY;
    let mut d_max = f64::NEG_INFINITY;
    for d in (lo..=hi).filter_map(|i| d_curve[i - 1]) {
        sum += d;
        count += 1;
        d_min = d_min.min(d);
        d_max = d_max.max(d);
    }
    if count == 0 {
        return Err(Error::NoRatioSpread);
    }
    // Clamp guards the mean against rounding outside its own extremes.
    let d_star = (sum / count as f64).clamp(d_min, d_max);
    Ok(DimensionEstimate { n, mu_sorted, d_curve, window: (lo, hi), d_star, d_min, d_max })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistogramBin {
    pub left: f64,
    pub right: f64,
    pub count: usize,
}

/// Equal-width histogram of first-neighbour distances over
/// `[min r1, max r1]`. Bin `b` covers `[left_b, left_{b+1})`; the last bin is
/// closed on the right.
pub fn nn_distance_histogram(r: &NeighbourRatios, bins: usize) -> Result<Vec<HistogramBin>> {
    if bins < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 bins, got {bins}")));
    }
    let lo = r.r1.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = r.r1.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = (hi - lo) / bins as f64;
    let mut edges: Vec<f64> = (0..bins).map(|b| lo + b as f64 * width).collect();
    edges.push(hi);
    let mut counts = vec![0usize; bins];
    for &x in &r.r1 {
        // Largest b with edges[b] <= x; ties at a zero width all land in bin 0.
        let b = edges[..bins].partition_point(|&e| e <= x).saturating_sub(1);
        let b = if width > 0.0 { b } else { 0 };
        counts[b] += 1;
    }
    Ok((0..bins)
        .map(|b| HistogramBin { left: edges[b], right: edges[b + 1], count: counts[b] })
        .collect())
}
