use std::collections::BTreeSet;

use netdim_core::constructors::{
    cube_gap_volume, flip_noise, geometric_graph, knn_graph, sample, Distribution, NoiseSpec, SamplerSpec,
};
use netdim_core::{PointCloud, UnweightedGraph};
use proptest::prelude::*;

fn cloud(dist: Distribution, n: usize, d: usize, seed: u64) -> PointCloud {
    sample(&SamplerSpec { distribution: dist, dim: d, n, seed }).unwrap()
}

fn dist(p: &PointCloud, i: usize, j: usize) -> f64 {
    p.point(i).iter().zip(p.point(j)).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

/// Union of the directed k-nearest relations, each row sorted in full.
fn knn_oracle(p: &PointCloud, k: usize) -> BTreeSet<(usize, usize)> {
    let mut edges = BTreeSet::new();
    for i in 0..p.n() {
        let mut row: Vec<(f64, usize)> = (0..p.n()).filter(|&j| j != i).map(|j| (dist(p, i, j), j)).collect();
        row.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for &(_, j) in &row[..k] {
            edges.insert((i.min(j), i.max(j)));
        }
    }
    edges
}

fn edge_set(g: &UnweightedGraph) -> BTreeSet<(usize, usize)> {
    g.edges().collect()
}

#[test]
fn knn_matches_sort_per_row_oracle() {
    let p = cloud(Distribution::UniformCube, 300, 5, 12);
    let g = knn_graph(&p, 20).unwrap();
    assert_eq!(edge_set(&g), knn_oracle(&p, 20));
    assert!((0..g.n()).all(|i| g.degree(i) >= 20));
}

#[test]
fn geometric_graph_matches_threshold_oracle() {
    let p = cloud(Distribution::UniformCube, 200, 10, 4);
    for r in [0.1, 0.8, 1.2] {
        let g = geometric_graph(&p, r).unwrap();
        let mut oracle = BTreeSet::new();
        for i in 0..200 {
            for j in i + 1..200 {
                if dist(&p, i, j) < r {
                    oracle.insert((i, j));
                }
            }
        }
        assert_eq!(edge_set(&g), oracle, "r = {r}");
    }
}

#[test]
fn flip_count_is_binomial() {
    let n = 200;
    let pairs = (n * (n - 1) / 2) as f64;
    let p = 0.01;
    let g = UnweightedGraph::empty(n);
    let mut total = 0.0;
    for seed in 0..20 {
        let noisy = flip_noise(&g, &NoiseSpec::new(p, seed).unwrap()).unwrap();
        total += noisy.num_edges() as f64;
    }
    let mean = pairs * p;
    let sd = (pairs * p * (1.0 - p) / 20.0).sqrt();
    assert!((total / 20.0 - mean).abs() <= 4.0 * sd, "mean flips {} vs {mean}", total / 20.0);
}

#[test]
fn flip_noise_touches_only_sampled_pairs() {
    let p = cloud(Distribution::UniformCube, 150, 3, 1);
    let g = knn_graph(&p, 6).unwrap();
    let noisy = flip_noise(&g, &NoiseSpec::new(0.02, 5).unwrap()).unwrap();
    let again = flip_noise(&g, &NoiseSpec::new(0.02, 5).unwrap()).unwrap();
    assert_eq!(noisy, again);
    let twice = flip_noise(&noisy, &NoiseSpec::new(0.02, 5).unwrap()).unwrap();
    // Same seed flips the same pairs, undoing the first pass.
    assert_eq!(twice, g);
}

#[test]
fn volume_decreases_in_dimension() {
    let v: Vec<f64> = (10..=30).map(|d| cube_gap_volume(d, 0.1).unwrap()).collect();
    assert!(v.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn gaussian_moments() {
    let p = cloud(Distribution::StandardGaussian, 10_000, 1, 99);
    let xs: Vec<f64> = p.iter().map(|x| x[0]).collect();
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    assert!(mean.abs() < 4.0 / n.sqrt());
    assert!((var - 1.0).abs() < 0.1);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn knn_union_rule_and_degree_bound(n in 5usize..80, d in 1usize..5, seed in any::<u64>(), kf in 0.0f64..1.0) {
        let p = cloud(Distribution::StandardGaussian, n, d, seed);
        let k = 1 + ((n - 2) as f64 * kf) as usize;
        let g = knn_graph(&p, k).unwrap();
        prop_assert_eq!(edge_set(&g), knn_oracle(&p, k));
        prop_assert!((0..n).all(|i| g.degree(i) >= k));
        for (i, j) in g.edges() {
            prop_assert!(g.has_edge(j, i));
        }
    }

    #[test]
    fn geometric_graph_is_monotone(seed in any::<u64>(), r1 in 0.01f64..1.0, extra in 0.0f64..1.0) {
        let p = cloud(Distribution::UniformCube, 60, 3, seed);
        let small = edge_set(&geometric_graph(&p, r1).unwrap());
        let large = edge_set(&geometric_graph(&p, r1 + extra).unwrap());
        prop_assert!(small.is_subset(&large));
    }

    #[test]
    fn full_flip_twice_is_identity(n in 2usize..40, m in 0usize..50, seed in any::<u64>()) {
        let edges: Vec<(usize, usize)> = (0..m).map(|t| ((t * 7 + seed as usize % 13) % n, (t * 3 + 1) % n)).filter(|(a, b)| a != b).collect();
        let g = UnweightedGraph::from_edges(n, edges).unwrap();
        let spec = NoiseSpec::new(1.0, seed).unwrap();
        let complement = flip_noise(&g, &spec).unwrap();
        prop_assert_eq!(complement.num_edges(), n * (n - 1) / 2 - g.num_edges());
        prop_assert_eq!(flip_noise(&complement, &NoiseSpec::new(1.0, seed ^ 1).unwrap()).unwrap(), g);
    }

    #[test]
    fn sampling_is_reproducible(n in 1usize..50, d in 1usize..6, seed in any::<u64>()) {
        for dist in [Distribution::UniformCube, Distribution::StandardGaussian] {
            let a = cloud(dist, n, d, seed);
            prop_assert_eq!(&a, &cloud(dist, n, d, seed));
            if dist == Distribution::UniformCube {
                prop_assert!(a.points().iter().all(|v| (0.0..=1.0).contains(v)));
            }
        }
    }
}
