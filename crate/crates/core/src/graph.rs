//! Shared data model: dissimilarity matrices, weighted and unweighted graphs
//! and point clouds, plus the conversions between them.
//!
//! Node indices are 0-based everywhere in the library. A missing connection in
//! a dissimilarity matrix is stored as [`INFINITE`], which nearest-neighbour
//! searches never select.

use ndarray::{Array2, ArrayView1};
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Dissimilarity between nodes that have no connection at all.
pub const INFINITE: f64 = f64::INFINITY;

/// Euclidean distance, accumulated component by component in index order.
///
/// Every distance in the crate goes through this function so that the matrix
/// path and the point path of twoNN see bit-identical values.
#[inline]
pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    squared_euclidean(a, b).sqrt()
}

#[inline]
pub fn squared_euclidean(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        acc += d * d;
    }
    acc
}

fn check_square(m: &Array2<f64>) -> Result<usize> {
    let (r, c) = m.dim();
    if r != c {
        return Err(Error::Validation(format!("matrix is {r} x {c}, expected square")));
    }
    if r == 0 {
        return Err(Error::Validation("matrix has no rows".into()));
    }
    Ok(r)
}

/// Checks symmetry, zero diagonal and non-negativity. `allow_infinite`
/// admits the [`INFINITE`] sentinel off the diagonal.
fn validate_symmetric(m: &Array2<f64>, allow_infinite: bool) -> Result<usize> {
    let n = check_square(m)?;
    for i in 0..n {
        let d = m[(i, i)];
        if d != 0.0 {
            return Err(Error::Validation(format!("diagonal entry ({i}, {i}) = {d} is not zero")));
        }
        for j in (i + 1)..n {
            let a = m[(i, j)];
            let b = m[(j, i)];
            if a.is_nan() || b.is_nan() {
                return Err(Error::Validation(format!("entry ({i}, {j}) is NaN")));
            }
            if a != b {
                return Err(Error::Asymmetric { i, j, a, b });
            }
            if a < 0.0 {
                return Err(Error::Validation(format!("entry ({i}, {j}) = {a} is negative")));
            }
            if a.is_infinite() && !allow_infinite {
                return Err(Error::Validation(format!("entry ({i}, {j}) is infinite")));
            }
        }
    }
    Ok(n)
}

/// Symmetric, non-negative matrix of pairwise dissimilarities with a zero
/// diagonal. Larger values mean less similar nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct DissimilarityMatrix {
    entries: Array2<f64>,
    zero_off_diagonal: bool,
}

impl DissimilarityMatrix {
    pub fn new(entries: Array2<f64>) -> Result<Self> {
        let n = validate_symmetric(&entries, true)?;
        let zero_off_diagonal =
            (0..n).any(|i| ((i + 1)..n).any(|j| entries[(i, j)] == 0.0));
        Ok(Self { entries, zero_off_diagonal })
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.entries.row(i)
    }

    pub fn entries(&self) -> &Array2<f64> {
        &self.entries
    }

    /// True when two distinct nodes are at dissimilarity zero (for example
    /// duplicated points). twoNN refuses such inputs.
    pub fn has_duplicates(&self) -> bool {
        self.zero_off_diagonal
    }

    /// Every entry multiplied by `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidParameter(format!("scale factor must be positive, got {c}")));
        }
        Self::new(self.entries.mapv(|v| v * c))
    }

    /// Applies `f` to every off-diagonal entry. `f` must map non-negative
    /// values to non-negative values.
    pub fn map_off_diagonal(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        let mut out = self.entries.clone();
        let n = self.n();
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    out[(i, j)] = f(self.entries[(i, j)]);
                }
            }
        }
        Self::new(out)
    }

    /// Relabels nodes: node `i` of the result is node `perm[i]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let n = self.n();
        check_permutation(perm, n)?;
        let out = Array2::from_shape_fn((n, n), |(i, j)| self.entries[(perm[i], perm[j])]);
        Self::new(out)
    }
}

fn check_permutation(perm: &[usize], n: usize) -> Result<()> {
    if perm.len() != n {
        return Err(Error::InvalidParameter(format!(
            "permutation has length {}, expected {n}",
            perm.len()
        )));
    }
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n || seen[p] {
            return Err(Error::InvalidParameter("not a permutation".into()));
        }
        seen[p] = true;
    }
    Ok(())
}

/// Symmetric non-negative similarity (connection strength) matrix with a zero
/// diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    weights: Array2<f64>,
}

impl WeightedGraph {
    pub fn new(weights: Array2<f64>) -> Result<Self> {
        validate_symmetric(&weights, false)?;
        Ok(Self { weights })
    }

    pub fn n(&self) -> usize {
        self.weights.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.weights[(i, j)]
    }

    pub fn weights(&self) -> &Array2<f64> {
        &self.weights
    }

    pub fn degree(&self, i: usize) -> f64 {
        self.weights.row(i).sum()
    }

    /// Connected-component label of every node; two nodes share a component
    /// when a chain of positive weights joins them.
    pub fn component_labels(&self) -> (usize, Vec<usize>) {
        let n = self.n();
        label_components(n, |i, out| {
            out.extend((0..n).filter(|&j| j != i && self.weights[(i, j)] > 0.0));
        })
    }
}

/// Simple undirected graph without weights. Adjacency lists are sorted and
/// free of duplicates and self-loops.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnweightedGraph {
    adjacency: Vec<Vec<usize>>,
}

impl UnweightedGraph {
    /// Graph on `n` nodes with no edges.
    pub fn empty(n: usize) -> Self {
        Self { adjacency: vec![Vec::new(); n] }
    }

    /// Builds a graph from unordered pairs. `{i, j}` and `{j, i}` denote the
    /// same edge; repeated pairs collapse.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut adjacency = vec![Vec::new(); n];
        for (i, j) in edges {
            if i >= n || j >= n {
                return Err(Error::InvalidParameter(format!(
                    "edge ({i}, {j}) out of range for {n} nodes"
                )));
            }
            if i == j {
                return Err(Error::InvalidParameter(format!("self-loop at node {i}")));
            }
            adjacency[i].push(j);
            adjacency[j].push(i);
        }
        Ok(Self::from_adjacency_unchecked(adjacency))
    }

    /// Sorts and deduplicates lists that are already known to be symmetric
    /// and loop-free.
    pub(crate) fn from_adjacency_unchecked(mut adjacency: Vec<Vec<usize>>) -> Self {
        for list in &mut adjacency {
            list.sort_unstable();
            list.dedup();
        }
        Self { adjacency }
    }

    pub fn n(&self) -> usize {
        self.adjacency.len()
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    pub fn num_edges(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adjacency[i].binary_search(&j).is_ok()
    }

    /// Edges as `(i, j)` with `i < j`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(i, list)| list.iter().filter(move |&&j| j > i).map(move |&j| (i, j)))
    }

    pub fn component_labels(&self) -> (usize, Vec<usize>) {
        label_components(self.n(), |i, out| out.extend_from_slice(&self.adjacency[i]))
    }

    pub fn component_count(&self) -> usize {
        self.component_labels().0
    }

    /// The largest connected component (lowest label on ties) together with
    /// the original index of every retained node.
    pub fn giant_component(&self) -> (UnweightedGraph, Vec<usize>) {
        let (count, labels) = self.component_labels();
        let mut sizes = vec![0usize; count];
        for &l in &labels {
            sizes[l] += 1;
        }
        let best = (0..count).max_by_key(|&c| (sizes[c], std::cmp::Reverse(c))).unwrap_or(0);
        let kept: Vec<usize> = (0..self.n()).filter(|&i| labels[i] == best).collect();
        let mut new_index = vec![usize::MAX; self.n()];
        for (k, &i) in kept.iter().enumerate() {
            new_index[i] = k;
        }
        let adjacency = kept
            .iter()
            .map(|&i| self.adjacency[i].iter().map(|&j| new_index[j]).collect())
            .collect();
        (Self { adjacency }, kept)
    }

    /// Unit-weight dense similarity matrix.
    pub fn to_weighted(&self) -> WeightedGraph {
        let n = self.n();
        let mut w = Array2::zeros((n, n));
        for (i, j) in self.edges() {
            w[(i, j)] = 1.0;
            w[(j, i)] = 1.0;
        }
        WeightedGraph { weights: w }
    }
}

fn label_components(n: usize, mut neighbours: impl FnMut(usize, &mut Vec<usize>)) -> (usize, Vec<usize>) {
    let mut labels = vec![usize::MAX; n];
    let mut count = 0;
    let mut stack = Vec::new();
    let mut buf = Vec::new();
    for start in 0..n {
        if labels[start] != usize::MAX {
            continue;
        }
        labels[start] = count;
        stack.push(start);
        while let Some(v) = stack.pop() {
            buf.clear();
            neighbours(v, &mut buf);
            for &u in &buf {
                if labels[u] == usize::MAX {
                    labels[u] = count;
                    stack.push(u);
                }
            }
        }
        count += 1;
    }
    (count, labels)
}

/// `n` points in `R^dim`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    points: Array2<f64>,
}

impl PointCloud {
    pub fn new(points: Array2<f64>) -> Result<Self> {
        let (n, dim) = points.dim();
        if n == 0 || dim == 0 {
            return Err(Error::Validation(format!("point cloud shape {n} x {dim} is empty")));
        }
        if let Some(((i, j), _)) = points.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::Validation(format!("coordinate {j} of point {i} is not finite")));
        }
        Ok(Self { points: points.as_standard_layout().into_owned() })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        let dim = rows.first().map_or(0, Vec::len);
        if let Some(i) = rows.iter().position(|r| r.len() != dim) {
            return Err(Error::Validation(format!(
                "point {i} has {} coordinates, expected {dim}",
                rows[i].len()
            )));
        }
        let flat: Vec<f64> = rows.into_iter().flatten().collect();
        let points = Array2::from_shape_vec((n, dim), flat)
            .map_err(|e| Error::Validation(e.to_string()))?;
        Self::new(points)
    }

    pub fn n(&self) -> usize {
        self.points.nrows()
    }

    pub fn dim(&self) -> usize {
        self.points.ncols()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        let dim = self.dim();
        &self.as_flat()[i * dim..(i + 1) * dim]
    }

    pub fn points(&self) -> &Array2<f64> {
        &self.points
    }

    pub(crate) fn as_flat(&self) -> &[f64] {
        self.points.as_slice().expect("point cloud is stored in standard layout")
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.as_flat().chunks_exact(self.dim())
    }

    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        check_permutation(perm, self.n())?;
        let out = Array2::from_shape_fn((self.n(), self.dim()), |(i, c)| self.points[(perm[i], c)]);
        Self::new(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimilarityToDissimilarity {
    /// `M = 1 / W`; a zero weight becomes [`INFINITE`].
    Reciprocal,
    /// `M = 1 - W`; weights must not exceed one.
    OneMinus,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DissimilarityToSimilarity {
    /// `W = 1 / M`; an [`INFINITE`] dissimilarity becomes weight zero.
    Reciprocal,
    /// `W = exp(-M * sigma^2)`.
    GaussianKernel { sigma: f64 },
}

pub fn similarity_to_dissimilarity(
    w: &WeightedGraph,
    rule: SimilarityToDissimilarity,
) -> Result<DissimilarityMatrix> {
    let n = w.n();
    let mut m = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let v = w.weights[(i, j)];
            m[(i, j)] = match rule {
                SimilarityToDissimilarity::Reciprocal => {
                    if v > 0.0 {
                        1.0 / v
                    } else {
                        INFINITE
                    }
                }
                SimilarityToDissimilarity::OneMinus => {
                    if v > 1.0 {
                        return Err(Error::Domain {
                            row: i,
                            col: j,
                            value: v,
                            reason: "one-minus conversion needs weights <= 1",
                        });
                    }
                    1.0 - v
                }
            };
        }
    }
    DissimilarityMatrix::new(m)
}

pub fn dissimilarity_to_similarity(
    m: &DissimilarityMatrix,
    rule: DissimilarityToSimilarity,
) -> Result<WeightedGraph> {
    if let DissimilarityToSimilarity::GaussianKernel { sigma } = rule {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!("sigma must be positive, got {sigma}")));
        }
    }
    let n = m.n();
    let mut w = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let v = m.entries[(i, j)];
            w[(i, j)] = match rule {
                DissimilarityToSimilarity::Reciprocal => {
                    if v == 0.0 {
                        return Err(Error::Domain {
                            row: i,
                            col: j,
                            value: v,
                            reason: "reciprocal conversion needs positive dissimilarities",
                        });
                    }
                    1.0 / v
                }
                DissimilarityToSimilarity::GaussianKernel { sigma } => (-v * sigma * sigma).exp(),
            };
        }
    }
    WeightedGraph::new(w)
}

/// Euclidean distance matrix of a point cloud. Duplicated points give zero
/// off-diagonal entries, reported by [`DissimilarityMatrix::has_duplicates`].
pub fn pairwise_distances(p: &PointCloud) -> DissimilarityMatrix {
    let n = p.n();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let xi = p.point(i);
            (0..n)
                .map(|j| if i == j { 0.0 } else { euclidean(xi, p.point(j)) })
                .collect()
        })
        .collect();
    let entries = Array2::from_shape_vec((n, n), rows.into_iter().flatten().collect())
        .expect("n x n distances");
    let zero_off_diagonal = (0..n).any(|i| ((i + 1)..n).any(|j| entries[(i, j)] == 0.0));
    DissimilarityMatrix { entries, zero_off_diagonal }
}

/// Dense similarity matrix `W_ij = 1 / ||x_i - x_j||`. Duplicated points are
/// rejected since their weight would be infinite.
pub fn inverse_distance_graph(p: &PointCloud) -> Result<WeightedGraph> {
    let m = pairwise_distances(p);
    dissimilarity_to_similarity(&m, DissimilarityToSimilarity::Reciprocal)
}
