//! Exact k-nearest-neighbour search over point clouds.
//!
//! Neighbours are ordered by `(distance, index)`, so ties between equidistant
//! points always resolve to the lowest node index. The kd-tree and the brute
//! force scan produce identical lists.

use rayon::prelude::*;

use crate::graph::{euclidean, PointCloud};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbour {
    pub index: usize,
    pub distance: f64,
}

#[inline]
fn precedes(a: (f64, usize), b: (f64, usize)) -> bool {
    a.0 < b.0 || (a.0 == b.0 && a.1 < b.1)
}

/// The `k` best candidates seen so far, ascending.
struct BestK {
    k: usize,
    items: Vec<Neighbour>,
}

impl BestK {
    fn new(k: usize) -> Self {
        Self { k, items: Vec::with_capacity(k + 1) }
    }

    fn worst(&self) -> f64 {
        if self.items.len() < self.k {
            f64::INFINITY
        } else {
            self.items[self.k - 1].distance
        }
    }

    fn offer(&mut self, index: usize, distance: f64) {
        if self.items.len() == self.k {
            let last = self.items[self.k - 1];
            if !precedes((distance, index), (last.distance, last.index)) {
                return;
            }
            self.items.pop();
        }
        let pos = self
            .items
            .partition_point(|n| precedes((n.distance, n.index), (distance, index)));
        self.items.insert(pos, Neighbour { index, distance });
    }
}

/// O(n) scan for the `k` nearest neighbours of point `i`, excluding `i`.
pub fn brute_force_knn(cloud: &PointCloud, i: usize, k: usize) -> Vec<Neighbour> {
    let q = cloud.point(i);
    let mut best = BestK::new(k);
    for (j, x) in cloud.iter().enumerate() {
        if j != i {
            best.offer(j, euclidean(q, x));
        }
    }
    best.items
}

const LEAF_SIZE: usize = 16;

enum Node {
    Leaf { start: usize, end: usize },
    Split { dim: usize, value: f64, left: usize, right: usize },
}

/// Static kd-tree built with median splits along the widest coordinate.
pub struct KdTree<'a> {
    cloud: &'a PointCloud,
    order: Vec<usize>,
    nodes: Vec<Node>,
}

impl<'a> KdTree<'a> {
    pub fn build(cloud: &'a PointCloud) -> Self {
        let mut tree = Self { cloud, order: (0..cloud.n()).collect(), nodes: Vec::new() };
        tree.build_node(0, cloud.n());
        tree
    }

    fn build_node(&mut self, start: usize, end: usize) -> usize {
        let id = self.nodes.len();
        if end - start <= LEAF_SIZE {
            self.nodes.push(Node::Leaf { start, end });
            return id;
        }
        let dim = self.widest_dimension(start, end);
        let cloud = self.cloud;
        let slice = &mut self.order[start..end];
        let mid = slice.len() / 2;
        slice.select_nth_unstable_by(mid, |&a, &b| {
            cloud.point(a)[dim].total_cmp(&cloud.point(b)[dim])
        });
        let value = cloud.point(slice[mid])[dim];
        let spread_zero = {
            let lo = slice.iter().map(|&i| cloud.point(i)[dim]).fold(f64::INFINITY, f64::min);
            lo == value && slice.iter().all(|&i| cloud.point(i)[dim] == value)
        };
        if spread_zero {
            self.nodes.push(Node::Leaf { start, end });
            return id;
        }
        self.nodes.push(Node::Leaf { start, end });
        let left = self.build_node(start, start + mid);
        let right = self.build_node(start + mid, end);
        self.nodes[id] = Node::Split { dim, value, left, right };
        id
    }

    fn widest_dimension(&self, start: usize, end: usize) -> usize {
        let dim = self.cloud.dim();
        let mut lo = vec![f64::INFINITY; dim];
        let mut hi = vec![f64::NEG_INFINITY; dim];
        for &i in &self.order[start..end] {
            for (c, &v) in self.cloud.point(i).iter().enumerate() {
                lo[c] = lo[c].min(v);
                hi[c] = hi[c].max(v);
            }
        }
        (0..dim)
            .max_by(|&a, &b| (hi[a] - lo[a]).total_cmp(&(hi[b] - lo[b])).then(b.cmp(&a)))
            .unwrap_or(0)
    }

    /// The `k` nearest neighbours of an arbitrary query point, optionally
    /// skipping one node (the query itself).
    pub fn query(&self, q: &[f64], k: usize, exclude: Option<usize>) -> Vec<Neighbour> {
        let mut best = BestK::new(k);
        if k > 0 {
            self.search(0, q, exclude, &mut best);
        }
        best.items
    }

    /// The `k` nearest neighbours of node `i`, excluding `i` itself.
    pub fn nearest(&self, i: usize, k: usize) -> Vec<Neighbour> {
        self.query(self.cloud.point(i), k, Some(i))
    }

    fn search(&self, node: usize, q: &[f64], exclude: Option<usize>, best: &mut BestK) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for &j in &self.order[start..end] {
                    if Some(j) != exclude {
                        best.offer(j, euclidean(q, self.cloud.point(j)));
                    }
                }
            }
            Node::Split { dim, value, left, right } => {
                let delta = q[dim] - value;
                let (near, far) = if delta < 0.0 { (left, right) } else { (right, left) };
                self.search(near, q, exclude, best);
                // Slack keeps the pruning conservative under rounding; ties
                // must still be visited for index tie-breaking.
                if delta.abs() <= best.worst() * (1.0 + 1e-12) {
                    self.search(far, q, exclude, best);
                }
            }
        }
    }
}

/// `k` nearest neighbours of every point (self excluded), computed in
/// parallel. Results do not depend on scheduling.
pub fn all_knn(cloud: &PointCloud, k: usize) -> Vec<Vec<Neighbour>> {
    let k = k.min(cloud.n().saturating_sub(1));
    let tree = KdTree::build(cloud);
    (0..cloud.n()).into_par_iter().map(|i| tree.nearest(i, k)).collect()
}
