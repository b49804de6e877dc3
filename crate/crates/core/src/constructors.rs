//! Synthetic ground truth: point samplers, KNN and radius graphs, edge-flip
//! noise and the cube-gap volume.
//!
//! Randomness comes from ChaCha20 (`rand_chacha`), a counter-based generator.
//! Point `i` (or adjacency row `i`) draws from stream `i` of the seeded
//! generator, so parallel and sequential generation agree bit for bit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use ndarray::Array2;

use crate::error::{Error, Result};
use crate::graph::{euclidean, PointCloud, UnweightedGraph};
use crate::neighbors::all_knn;

/// Independent generator for one stream of a seeded family.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Distribution {
    /// Components i.i.d. uniform on `[0, 1)`.
    UniformCube,
    /// Components i.i.d. standard normal.
    StandardGaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SamplerSpec {
    pub distribution: Distribution,
    pub dim: usize,
    pub n: usize,
    pub seed: u64,
}

pub fn sample(spec: &SamplerSpec) -> Result<PointCloud> {
    if spec.dim == 0 || spec.n == 0 {
        return Err(Error::InvalidParameter(format!(
            "sampler needs n >= 1 and dim >= 1, got n = {}, dim = {}",
            spec.n, spec.dim
        )));
    }
    let rows: Vec<Vec<f64>> = (0..spec.n)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(spec.seed, i as u64);
            (0..spec.dim)
                .map(|_| match spec.distribution {
                    Distribution::UniformCube => rng.random::<f64>(),
                    Distribution::StandardGaussian => rng.sample(StandardNormal),
                })
                .collect()
        })
        .collect();
    let flat = rows.into_iter().flatten().collect();
    PointCloud::new(Array2::from_shape_vec((spec.n, spec.dim), flat).expect("n x dim samples"))
}

/// `floor(30 ln n)`, the neighbour count that grows fast enough with `n` for
/// the KNN Laplacian to stay connected and spectrally consistent.
pub fn default_k(n: usize) -> usize {
    (30.0 * (n as f64).ln()).floor() as usize
}

/// Union-rule KNN graph: `{i, j}` is an edge when either endpoint is among the
/// `k` nearest neighbours of the other.
pub fn knn_graph(p: &PointCloud, k: usize) -> Result<UnweightedGraph> {
    let n = p.n();
    if k == 0 || k >= n {
        return Err(Error::InvalidParameter(format!("k = {k} must satisfy 1 <= k <= n - 1 = {}", n - 1)));
    }
    let neighbours = all_knn(p, k);
    let mut adjacency = vec![Vec::with_capacity(2 * k); n];
    for (i, list) in neighbours.iter().enumerate() {
        if let Some(first) = list.first() {
            if first.distance == 0.0 {
                return Err(Error::Degenerate { node: i, other: first.index });
            }
        }
        for nb in list {
            adjacency[i].push(nb.index);
            adjacency[nb.index].push(i);
        }
    }
    Ok(UnweightedGraph::from_adjacency_unchecked(adjacency))
}

/// Radius graph: `{i, j}` is an edge when `||x_i - x_j|| < r`.
pub fn geometric_graph(p: &PointCloud, r: f64) -> Result<UnweightedGraph> {
    if !(r > 0.0) {
        return Err(Error::InvalidParameter(format!("radius must be positive, got {r}")));
    }
    let n = p.n();
    let adjacency: Vec<Vec<usize>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let xi = p.point(i);
            (0..n).filter(|&j| j != i && euclidean(xi, p.point(j)) < r).collect()
        })
        .collect();
    Ok(UnweightedGraph::from_adjacency_unchecked(adjacency))
}

/// Volume of the slab `[0,1] x [r, 1-r]^(d-1)` together with the `2(d-1)`
/// bridging boxes that join adjacent corners of the unit cube:
/// `2 (d-1) (1/3)^(d-2) r + (1 - 2r)^(d-1)`.
pub fn cube_gap_volume(d: usize, r: f64) -> Result<f64> {
    if d < 2 {
        return Err(Error::InvalidParameter(format!("dimension must be at least 2, got {d}")));
    }
    if !(r > 0.0 && r < 0.5) {
        return Err(Error::InvalidParameter(format!("radius must lie in (0, 1/2), got {r}")));
    }
    let d = d as i32;
    Ok(2.0 * (d - 1) as f64 * (1.0f64 / 3.0).powi(d - 2) * r + (1.0 - 2.0 * r).powi(d - 1))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub p: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(p: f64, seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!("flip probability must lie in [0, 1], got {p}")));
        }
        Ok(Self { p, seed })
    }
}

/// Flips every unordered pair `{i, j}` (edge to non-edge and back)
/// independently with probability `p`. Row `i` of the upper triangle uses
/// stream `i`.
pub fn flip_noise(a: &UnweightedGraph, spec: &NoiseSpec) -> Result<UnweightedGraph> {
    let spec = NoiseSpec::new(spec.p, spec.seed)?;
    let n = a.n();
    let upper: Vec<Vec<usize>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(spec.seed, i as u64);
            let current = a.neighbors(i);
            let mut out = Vec::new();
            for j in (i + 1)..n {
                let flip = rng.random::<f64>() < spec.p;
                let present = current.binary_search(&j).is_ok();
                if present != flip {
                    out.push(j);
                }
            }
            out
        })
        .collect();
    let mut adjacency = vec![Vec::new(); n];
    for (i, list) in upper.into_iter().enumerate() {
        for j in list {
            adjacency[i].push(j);
            adjacency[j].push(i);
        }
    }
    Ok(UnweightedGraph::from_adjacency_unchecked(adjacency))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(xs: &[f64]) -> PointCloud {
        PointCloud::from_rows(xs.iter().map(|&x| vec![x]).collect()).unwrap()
    }

    #[test]
    fn uniform_support_and_determinism() {
        let spec = SamplerSpec { distribution: Distribution::UniformCube, dim: 7, n: 500, seed: 3 };
        let a = sample(&spec).unwrap();
        assert!(a.points().iter().all(|&v| (0.0..=1.0).contains(&v)));
        assert_eq!(a, sample(&spec).unwrap());
        let b = sample(&SamplerSpec { seed: 4, ..spec }).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn gaussian_moments() {
        let n = 10_000;
        let spec = SamplerSpec { distribution: Distribution::StandardGaussian, dim: 1, n, seed: 11 };
        let c = sample(&spec).unwrap();
        let xs: Vec<f64> = c.points().iter().copied().collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!(mean.abs() < 4.0 / (n as f64).sqrt(), "mean {mean}");
        assert!((var - 1.0).abs() < 0.1, "var {var}");
    }

    #[test]
    fn default_k_values() {
        assert_eq!(default_k(3000), 240);
        assert_eq!(default_k(3), 32);
        assert_eq!(default_k(17_000), 292);
        assert_eq!(default_k(1500), 219);
        assert_eq!(default_k(4000), 248);
    }

    #[test]
    fn knn_small_line() {
        let g = knn_graph(&line(&[0.0, 1.0, 3.0]), 1).unwrap();
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1), (1, 2)]);
        let g = knn_graph(&line(&[0.0, 1.0, 3.0, 4.5]), 3).unwrap();
        assert_eq!(g.num_edges(), 6);
        assert!(knn_graph(&line(&[0.0, 1.0]), 2).is_err());
        assert!(matches!(knn_graph(&line(&[0.0, 1.0, 1.0]), 1), Err(Error::Degenerate { .. })));
    }

    #[test]
    fn geometric_small_line() {
        let p = line(&[0.0, 1.0, 3.0]);
        let g = geometric_graph(&p, 1.5).unwrap();
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1)]);
        // Strict inequality: distance exactly 1 is not below 1.
        assert_eq!(geometric_graph(&p, 1.0).unwrap().num_edges(), 0);
        assert_eq!(geometric_graph(&p, 10.0).unwrap().num_edges(), 3);
        assert!(geometric_graph(&p, 0.0).is_err());
    }

    #[test]
    fn volume_table() {
        let direct = 2.0 * 9.0 * 0.1 / 3f64.powi(8) + 0.8f64.powi(9);
        assert!((cube_gap_volume(10, 0.1).unwrap() - direct).abs() < 1e-15);
        assert!((cube_gap_volume(15, 0.1).unwrap() - 0.0440).abs() <= 5e-4);
        assert!((cube_gap_volume(25, 0.1).unwrap() - 0.0047).abs() <= 2e-4);
        // d = 2: 2 * 1 * 1 * r + (1 - 2r).
        assert!((cube_gap_volume(2, 0.25).unwrap() - 1.0).abs() < 1e-15);
        assert!(cube_gap_volume(1, 0.1).is_err());
        assert!(cube_gap_volume(5, 0.5).is_err());
    }

    #[test]
    fn volume_decreasing_from_ten() {
        let v: Vec<f64> = (10..=30).map(|d| cube_gap_volume(d, 0.1).unwrap()).collect();
        assert!(v.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn flip_extremes() {
        let g = UnweightedGraph::from_edges(6, [(0, 1), (1, 2), (2, 3), (4, 5)]).unwrap();
        assert_eq!(flip_noise(&g, &NoiseSpec::new(0.0, 1).unwrap()).unwrap(), g);
        let c = flip_noise(&g, &NoiseSpec::new(1.0, 1).unwrap()).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                if i != j {
                    assert_eq!(c.has_edge(i, j), !g.has_edge(i, j));
                }
            }
        }
        assert_eq!(flip_noise(&c, &NoiseSpec::new(1.0, 9).unwrap()).unwrap(), g);
        assert!(NoiseSpec::new(1.5, 0).is_err());
    }
}
