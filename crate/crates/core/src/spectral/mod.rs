//! Laplacian spectra and spectral embedding.
//!
//! Node `i` of a connected graph is placed at row `i` of the `n x k` matrix
//! whose columns are unit eigenvectors of `L = D - W` for the `k` smallest
//! nonzero eigenvalues.
//!
//! Small problems (`n <= dense_limit`) use a dense symmetric
//! eigendecomposition; larger ones use thick-restart Lanczos with a seeded
//! start vector. An eigenvalue counts as zero when it is at most
//! `1e-8 * 2 * max_degree`.

mod lanczos;
mod laplacian;

use faer::{Mat, Side};
use ndarray::{s, Array2};

pub use lanczos::{lanczos_smallest, LanczosConfig, LanczosResult};
pub use laplacian::{build_laplacian, Laplacian, LaplacianSource, SymmetricOperator};

use crate::error::{Error, Result};
use crate::graph::PointCloud;

/// Relative size below which an eigenvalue is treated as zero.
pub const ZERO_EIGENVALUE_RTOL: f64 = 1e-8;

/// Largest `n` handled by the dense eigensolver under [`Solver::Auto`].
pub const DENSE_LIMIT: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Solver {
    Auto,
    Dense,
    Lanczos,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenOptions {
    pub solver: Solver,
    /// Seed of the Lanczos start vector.
    pub seed: u64,
    pub dense_limit: usize,
    /// Relative residual tolerance for Lanczos.
    pub tolerance: f64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self { solver: Solver::Auto, seed: 0, dense_limit: DENSE_LIMIT, tolerance: 1e-11 }
    }
}

impl EigenOptions {
    fn use_dense(&self, n: usize) -> bool {
        match self.solver {
            Solver::Dense => true,
            Solver::Lanczos => false,
            Solver::Auto => n <= self.dense_limit,
        }
    }
}

/// The `m` smallest eigenvalues (ascending) and unit eigenvectors as the
/// columns of an `n x m` matrix.
#[derive(Debug, Clone)]
pub struct EigenPairs {
    pub values: Vec<f64>,
    pub vectors: Array2<f64>,
}

pub fn smallest_eigenpairs(l: &Laplacian, m: usize, opts: &EigenOptions) -> Result<EigenPairs> {
    let n = l.n();
    if m == 0 || m > n {
        return Err(Error::InvalidParameter(format!("requested {m} eigenpairs of a {n}-node Laplacian")));
    }
    if opts.use_dense(n) {
        let dense = l.to_dense();
        let a = Mat::<f64>::from_fn(n, n, |i, j| dense[(i, j)]);
        let evd = a
            .self_adjoint_eigen(Side::Lower)
            .map_err(|_| Error::NoConvergence { iterations: 0, residual: f64::NAN })?;
        let values = (0..m).map(|i| evd.S().column_vector()[i]).collect();
        let u = evd.U();
        let vectors = Array2::from_shape_fn((n, m), |(i, j)| u[(i, j)]);
        Ok(EigenPairs { values, vectors })
    } else {
        let mut cfg = LanczosConfig::new(m, l.lambda_max_estimate(), opts.seed);
        cfg.tolerance = opts.tolerance;
        let res = lanczos_smallest(l, &cfg)?;
        let mut vectors = Array2::zeros((n, m));
        for (j, v) in res.vectors.iter().enumerate() {
            vectors.column_mut(j).assign(&ndarray::ArrayView1::from(v.as_slice()));
        }
        Ok(EigenPairs { values: res.values, vectors })
    }
}

/// Flips each column so that its largest-magnitude entry (lowest index on
/// ties) is positive.
fn normalize_signs(vectors: &mut Array2<f64>) {
    for mut col in vectors.columns_mut() {
        let mut best = 0;
        for (i, v) in col.iter().enumerate() {
            if v.abs() > col[best].abs() {
                best = i;
            }
        }
        if col[best] < 0.0 {
            col.mapv_inplace(|v| -v);
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumReport {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    pub zero_multiplicity: usize,
    pub zero_threshold: f64,
}

pub fn zero_threshold(l: &Laplacian) -> f64 {
    ZERO_EIGENVALUE_RTOL * l.lambda_max_estimate()
}

/// The `m` smallest eigenvalues of `l`.
pub fn spectrum(l: &Laplacian, m: usize, opts: &EigenOptions) -> Result<SpectrumReport> {
    let pairs = smallest_eigenpairs(l, m, opts)?;
    let zero_threshold = zero_threshold(l);
    let zero_multiplicity = pairs.values.iter().filter(|&&v| v <= zero_threshold).count();
    Ok(SpectrumReport { eigenvalues: pairs.values, zero_multiplicity, zero_threshold })
}

/// Node coordinates from Laplacian eigenvectors; row `i` is node `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    pub coordinates: Array2<f64>,
    /// Eigenvalue of each column.
    pub eigenvalues: Vec<f64>,
}

impl Embedding {
    pub fn n(&self) -> usize {
        self.coordinates.nrows()
    }

    pub fn k(&self) -> usize {
        self.coordinates.ncols()
    }

    /// The first `k` columns.
    pub fn truncated(&self, k: usize) -> Result<Embedding> {
        if k == 0 || k > self.k() {
            return Err(Error::InvalidParameter(format!("cannot truncate a {}-column embedding to {k}", self.k())));
        }
        Ok(Embedding {
            coordinates: self.coordinates.slice(s![.., ..k]).to_owned(),
            eigenvalues: self.eigenvalues[..k].to_vec(),
        })
    }

    pub fn to_point_cloud(&self) -> Result<PointCloud> {
        PointCloud::new(self.coordinates.clone())
    }
}

/// Embeds a connected graph with the eigenvectors of its `k` smallest nonzero
/// Laplacian eigenvalues.
pub fn spectral_embed<G: LaplacianSource + ?Sized>(g: &G, k: usize, opts: &EigenOptions) -> Result<Embedding> {
    let l = g.laplacian();
    let n = l.n();
    if k == 0 || k + 1 > n {
        return Err(Error::InvalidParameter(format!("embedding dimension {k} must satisfy 1 <= k <= n - 1 = {}", n.saturating_sub(1))));
    }
    let components = g.component_count();
    if components > 1 {
        return Err(Error::Disconnected { components });
    }
    let pairs = smallest_eigenpairs(&l, k + 1, opts)?;
    let threshold = zero_threshold(&l);
    let zeros = pairs.values.iter().filter(|&&v| v <= threshold).count();
    if zeros != 1 {
        return Err(Error::Disconnected { components: zeros.max(1) });
    }
    let mut coordinates = pairs.vectors.slice(s![.., 1..]).to_owned();
    normalize_signs(&mut coordinates);
    Ok(Embedding { coordinates, eigenvalues: pairs.values[1..].to_vec() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{UnweightedGraph, WeightedGraph};
    use ndarray::array;

    fn path3() -> UnweightedGraph {
        UnweightedGraph::from_edges(3, [(0, 1), (1, 2)]).unwrap()
    }

    fn cycle(n: usize) -> UnweightedGraph {
        UnweightedGraph::from_edges(n, (0..n).map(|i| (i, (i + 1) % n))).unwrap()
    }

    #[test]
    fn path_laplacian_entries() {
        let l = build_laplacian(&path3());
        assert_eq!(l.to_dense(), array![[1.0, -1.0, 0.0], [-1.0, 2.0, -1.0], [0.0, -1.0, 1.0]]);
        let single = build_laplacian(&UnweightedGraph::empty(1));
        assert_eq!(single.to_dense(), array![[0.0]]);
        let r = spectrum(&single, 1, &EigenOptions::default()).unwrap();
        assert_eq!(r.eigenvalues, vec![0.0]);
        assert_eq!(r.zero_multiplicity, 1);
    }

    #[test]
    fn weighted_laplacian_is_d_minus_w() {
        let w = WeightedGraph::new(array![
            [0.0, 0.5, 2.0, 0.0, 1.0],
            [0.5, 0.0, 0.3, 0.0, 0.0],
            [2.0, 0.3, 0.0, 4.0, 0.1],
            [0.0, 0.0, 4.0, 0.0, 0.7],
            [1.0, 0.0, 0.1, 0.7, 0.0]
        ])
        .unwrap();
        let l = build_laplacian(&w).to_dense();
        for i in 0..5 {
            let deg: f64 = (0..5).map(|j| w.get(i, j)).sum();
            assert!(l.row(i).sum().abs() <= 1e-12);
            for j in 0..5 {
                let expect = if i == j { deg } else { -w.get(i, j) };
                assert_eq!(l[(i, j)], expect);
            }
        }
    }

    #[test]
    fn matvec_matches_dense() {
        let g = UnweightedGraph::from_edges(6, [(0, 1), (0, 2), (2, 3), (3, 4), (1, 5), (4, 5)]).unwrap();
        let l = build_laplacian(&g);
        let dense = l.to_dense();
        let x = [0.3, -1.0, 2.0, 0.5, 0.0, 1.5];
        let mut y = [0.0; 6];
        l.apply(&x, &mut y);
        for i in 0..6 {
            let expect: f64 = (0..6).map(|j| dense[(i, j)] * x[j]).sum();
            assert!((y[i] - expect).abs() < 1e-14);
            assert_eq!(l.get(i, i), g.degree(i) as f64);
        }
    }

    #[test]
    fn analytic_spectra() {
        let opts = EigenOptions::default();
        let r = spectrum(&build_laplacian(&path3()), 3, &opts).unwrap();
        for (got, want) in r.eigenvalues.iter().zip([0.0, 1.0, 3.0]) {
            assert!((got - want).abs() < 1e-8);
        }
        assert_eq!(r.zero_multiplicity, 1);

        let k4 = UnweightedGraph::from_edges(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap();
        let r = spectrum(&build_laplacian(&k4), 4, &opts).unwrap();
        for (got, want) in r.eigenvalues.iter().zip([0.0, 4.0, 4.0, 4.0]) {
            assert!((got - want).abs() < 1e-8);
        }

        let triangles = UnweightedGraph::from_edges(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]).unwrap();
        let r = spectrum(&build_laplacian(&triangles), 6, &opts).unwrap();
        assert_eq!(r.zero_multiplicity, 2);
    }

    #[test]
    fn cycle_embeds_on_a_circle() {
        let emb = spectral_embed(&cycle(4), 2, &EigenOptions::default()).unwrap();
        let y = &emb.coordinates;
        let dist = |a: usize, b: usize| ((y[(a, 0)] - y[(b, 0)]).powi(2) + (y[(a, 1)] - y[(b, 1)]).powi(2)).sqrt();
        let d: Vec<f64> = (0..4).map(|i| dist(i, (i + 1) % 4)).collect();
        for v in &d {
            assert!((v - d[0]).abs() < 1e-8, "{d:?}");
        }
    }

    #[test]
    fn embedding_is_orthogonal_to_constants() {
        let g = UnweightedGraph::from_edges(7, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (0, 3), (2, 6)]).unwrap();
        let emb = spectral_embed(&g, 1, &EigenOptions::default()).unwrap();
        assert!(emb.coordinates.column(0).sum().abs() < 1e-8);
        assert!((emb.coordinates.column(0).dot(&emb.coordinates.column(0)) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn embed_errors() {
        let triangles = UnweightedGraph::from_edges(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]).unwrap();
        assert!(matches!(
            spectral_embed(&triangles, 2, &EigenOptions::default()),
            Err(Error::Disconnected { components: 2 })
        ));
        assert!(matches!(spectral_embed(&path3(), 3, &EigenOptions::default()), Err(Error::InvalidParameter(_))));
        assert!(matches!(spectral_embed(&path3(), 0, &EigenOptions::default()), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn lanczos_agrees_with_dense_on_cycle() {
        // C_n has eigenvalues 2 - 2 cos(2 pi j / n), each nonzero one double.
        let g = cycle(40);
        let l = build_laplacian(&g);
        let expect = |j: usize| 2.0 - 2.0 * (2.0 * std::f64::consts::PI * j as f64 / 40.0).cos();
        for solver in [Solver::Dense, Solver::Lanczos] {
            let got = spectrum(&l, 5, &EigenOptions { solver, ..Default::default() }).unwrap();
            for (got, want) in got.eigenvalues.iter().zip([0.0, expect(1), expect(1), expect(2), expect(2)]) {
                assert!((got - want).abs() < 1e-10, "{solver:?}: {got} vs {want}");
            }
        }
    }
}
