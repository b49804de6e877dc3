use ndarray::Array2;
use rayon::prelude::*;

use crate::graph::{UnweightedGraph, WeightedGraph};

/// Symmetric operator `x -> A x` on `R^n`.
pub trait SymmetricOperator: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

#[derive(Debug, Clone, PartialEq)]
enum Storage {
    Dense(Array2<f64>),
    /// Unit-weight adjacency in CSR form.
    Unit { offsets: Vec<usize>, targets: Vec<usize> },
}

/// Combinatorial graph Laplacian `L = D - W`, with `D` the diagonal of row
/// sums of `W`.
#[derive(Debug, Clone, PartialEq)]
pub struct Laplacian {
    storage: Storage,
    degrees: Vec<f64>,
}

impl Laplacian {
    pub fn from_weighted(w: &WeightedGraph) -> Self {
        let n = w.n();
        let degrees: Vec<f64> = (0..n).map(|i| w.degree(i)).collect();
        let mut l = w.weights().mapv(|v| -v);
        for i in 0..n {
            l[(i, i)] = degrees[i];
        }
        Self { storage: Storage::Dense(l), degrees }
    }

    pub fn from_unweighted(a: &UnweightedGraph) -> Self {
        let n = a.n();
        let mut offsets = Vec::with_capacity(n + 1);
        let mut targets = Vec::with_capacity(2 * a.num_edges());
        offsets.push(0);
        for i in 0..n {
            targets.extend_from_slice(a.neighbors(i));
            offsets.push(targets.len());
        }
        let degrees = (0..n).map(|i| a.degree(i) as f64).collect();
        Self { storage: Storage::Unit { offsets, targets }, degrees }
    }

    pub fn n(&self) -> usize {
        self.degrees.len()
    }

    pub fn degrees(&self) -> &[f64] {
        &self.degrees
    }

    pub fn max_degree(&self) -> f64 {
        self.degrees.iter().copied().fold(0.0, f64::max)
    }

    /// Cheap upper bound on the largest eigenvalue (Gershgorin): twice the
    /// largest degree.
    pub fn lambda_max_estimate(&self) -> f64 {
        2.0 * self.max_degree()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match &self.storage {
            Storage::Dense(l) => l[(i, j)],
            Storage::Unit { offsets, targets } => {
                if i == j {
                    self.degrees[i]
                } else if targets[offsets[i]..offsets[i + 1]].binary_search(&j).is_ok() {
                    -1.0
                } else {
                    0.0
                }
            }
        }
    }

    pub fn to_dense(&self) -> Array2<f64> {
        match &self.storage {
            Storage::Dense(l) => l.clone(),
            Storage::Unit { offsets, targets } => {
                let n = self.n();
                let mut l = Array2::zeros((n, n));
                for i in 0..n {
                    l[(i, i)] = self.degrees[i];
                    for &j in &targets[offsets[i]..offsets[i + 1]] {
                        l[(i, j)] = -1.0;
                    }
                }
                l
            }
        }
    }
}

const PAR_MIN_ROWS: usize = 512;

impl SymmetricOperator for Laplacian {
    fn dim(&self) -> usize {
        self.n()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let row = |i: usize| -> f64 {
            match &self.storage {
                Storage::Dense(l) => {
                    let r = l.row(i);
                    let mut acc = 0.0;
                    for (a, b) in r.iter().zip(x) {
                        acc += a * b;
                    }
                    acc
                }
                Storage::Unit { offsets, targets } => {
                    let mut acc = 0.0;
                    for &j in &targets[offsets[i]..offsets[i + 1]] {
                        acc += x[j];
                    }
                    self.degrees[i] * x[i] - acc
                }
            }
        };
        if y.len() >= PAR_MIN_ROWS {
            y.par_iter_mut().enumerate().for_each(|(i, out)| *out = row(i));
        } else {
            for (i, out) in y.iter_mut().enumerate() {
                *out = row(i);
            }
        }
    }
}

/// Graph types that have a Laplacian.
pub trait LaplacianSource {
    fn laplacian(&self) -> Laplacian;
    fn component_count(&self) -> usize;
}

impl LaplacianSource for WeightedGraph {
    fn laplacian(&self) -> Laplacian {
        Laplacian::from_weighted(self)
    }

    fn component_count(&self) -> usize {
        self.component_labels().0
    }
}

impl LaplacianSource for UnweightedGraph {
    fn laplacian(&self) -> Laplacian {
        Laplacian::from_unweighted(self)
    }

    fn component_count(&self) -> usize {
        UnweightedGraph::component_count(self)
    }
}

pub fn build_laplacian<G: LaplacianSource + ?Sized>(g: &G) -> Laplacian {
    g.laplacian()
}
