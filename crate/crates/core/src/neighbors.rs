//! Exact K-nearest-neighbor search over fixed-length windows.
//!
//! A kd-tree with bucketed leaves. Results are identical to an exhaustive
//! scan: distances are accumulated in the same order as
//! [`linear_scan`] and ties are broken by ascending point index.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{param, FwfError, Result};
use crate::linalg::{sq_dist, Matrix};

const LEAF_SIZE: usize = 12;

/// A neighbor: training index and Euclidean distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub index: usize,
    pub distance: f64,
}

#[derive(Debug, Clone)]
enum Node {
    Leaf {
        start: usize,
        end: usize,
    },
    Split {
        dim: usize,
        value: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone)]
pub struct NeighborIndex {
    points: Matrix,
    /// permutation of point indices; leaves own contiguous ranges
    order: Vec<usize>,
    nodes: Vec<Node>,
}

// max-heap entry ordered by (squared distance, index)
#[derive(Debug, Clone, Copy, PartialEq)]
struct Candidate {
    d2: f64,
    index: usize,
}

impl Eq for Candidate {}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.d2
            .total_cmp(&other.d2)
            .then(self.index.cmp(&other.index))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl NeighborIndex {
    pub fn build(points: Matrix) -> Result<Self> {
        if points.rows() == 0 {
            return Err(param("points", "cannot index an empty set"));
        }
        if points.cols() == 0 {
            return Err(param("points", "points must have at least one coordinate"));
        }
        let mut order: Vec<usize> = (0..points.rows()).collect();
        let mut nodes = Vec::new();
        build_node(&points, &mut order, 0, points.rows(), &mut nodes);
        Ok(NeighborIndex {
            points,
            order,
            nodes,
        })
    }

    pub fn len(&self) -> usize {
        self.points.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.points.rows() == 0
    }

    pub fn dim(&self) -> usize {
        self.points.cols()
    }

    pub fn points(&self) -> &Matrix {
        &self.points
    }

    /// Exact `k` nearest neighbors sorted by (distance, index).
    pub fn query(&self, q: &[f64], k: usize) -> Result<Vec<Neighbor>> {
        if q.len() != self.dim() {
            return Err(FwfError::Dimension(format!(
                "query has length {}, index points have length {}",
                q.len(),
                self.dim()
            )));
        }
        if k == 0 || k > self.len() {
            return Err(param(
                "k",
                format!("must be in 1..={}, got {k}", self.len()),
            ));
        }
        let mut heap = BinaryHeap::with_capacity(k + 1);
        self.search(0, q, k, &mut heap);
        let mut found = heap.into_sorted_vec();
        found.truncate(k);
        Ok(found
            .into_iter()
            .map(|c| Neighbor {
                index: c.index,
                distance: c.d2.sqrt(),
            })
            .collect())
    }

    fn search(&self, node: usize, q: &[f64], k: usize, heap: &mut BinaryHeap<Candidate>) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for &i in &self.order[start..end] {
                    let c = Candidate {
                        d2: sq_dist(q, self.points.row(i)),
                        index: i,
                    };
                    if heap.len() < k {
                        heap.push(c);
                    } else if c < *heap.peek().expect("heap is full") {
                        heap.pop();
                        heap.push(c);
                    }
                }
            }
            Node::Split {
                dim,
                value,
                left,
                right,
            } => {
                let diff = q[dim] - value;
                let (near, far) = if diff <= 0.0 {
                    (left, right)
                } else {
                    (right, left)
                };
                self.search(near, q, k, heap);
                // a point on the far side is at least |diff| away; keep
                // equal-distance candidates since they may win on index
                if heap.len() < k || diff * diff <= heap.peek().expect("non-empty").d2 {
                    self.search(far, q, k, heap);
                }
            }
        }
    }
}

fn build_node(
    points: &Matrix,
    order: &mut [usize],
    start: usize,
    end: usize,
    nodes: &mut Vec<Node>,
) -> usize {
    let id = nodes.len();
    if end - start <= LEAF_SIZE {
        nodes.push(Node::Leaf { start, end });
        return id;
    }
    // split on the dimension of widest spread
    let slice = &mut order[start..end];
    let mut best = (0, f64::NEG_INFINITY);
    for dim in 0..points.cols() {
        let (lo, hi) = slice
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &i| {
                let v = points[(i, dim)];
                (lo.min(v), hi.max(v))
            });
        if hi - lo > best.1 {
            best = (dim, hi - lo);
        }
    }
    let dim = best.0;
    if best.1 <= 0.0 {
        // all points identical
        nodes.push(Node::Leaf { start, end });
        return id;
    }
    let mid = slice.len() / 2;
    slice.select_nth_unstable_by(mid, |&a, &b| points[(a, dim)].total_cmp(&points[(b, dim)]));
    let value = points[(slice[mid], dim)];
    // left holds coordinates <= value, right >= value
    nodes.push(Node::Leaf { start, end });
    let left = build_node(points, order, start, start + mid, nodes);
    let right = build_node(points, order, start + mid, end, nodes);
    nodes[id] = Node::Split {
        dim,
        value,
        left,
        right,
    };
    id
}

/// Exhaustive reference search with the same ordering contract as
/// [`NeighborIndex::query`].
pub fn linear_scan(points: &Matrix, q: &[f64], k: usize) -> Vec<Neighbor> {
    let mut all: Vec<Candidate> = points
        .iter_rows()
        .enumerate()
        .map(|(index, p)| Candidate {
            d2: sq_dist(q, p),
            index,
        })
        .collect();
    all.sort();
    all.truncate(k);
    all.into_iter()
        .map(|c| Neighbor {
            index: c.index,
            distance: c.d2.sqrt(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_points(n: usize, dim: usize, seed: u64) -> Matrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = (0..n * dim).map(|_| rng.random::<f64>()).collect();
        Matrix::from_vec(n, dim, data).unwrap()
    }

    #[test]
    fn single_point() {
        let idx = NeighborIndex::build(Matrix::from_rows(&[vec![1.0, 2.0]]).unwrap()).unwrap();
        assert_eq!(idx.len(), 1);
        let r = idx.query(&[0.0, 0.0], 1).unwrap();
        assert_eq!(r[0].index, 0);
        assert!(idx.query(&[0.0, 0.0], 2).is_err());
        assert!(idx.query(&[0.0], 1).is_err());
    }

    #[test]
    fn empty_rejected() {
        assert!(NeighborIndex::build(Matrix::zeros(0, 3)).is_err());
    }

    #[test]
    fn duplicates_kept_and_ordered_by_index() {
        let rows = vec![vec![0.5, 0.5]; 40];
        let idx = NeighborIndex::build(Matrix::from_rows(&rows).unwrap()).unwrap();
        let r = idx.query(&[0.5, 0.5], 40).unwrap();
        let got: Vec<usize> = r.iter().map(|n| n.index).collect();
        assert_eq!(got, (0..40).collect::<Vec<_>>());
        assert!(r.iter().all(|n| n.distance == 0.0));
    }

    #[test]
    fn every_point_is_its_own_nearest() {
        let pts = random_points(1000, 4, 11);
        let idx = NeighborIndex::build(pts.clone()).unwrap();
        for i in 0..pts.rows() {
            let r = idx.query(pts.row(i), 1).unwrap();
            assert_eq!(r[0].index, i);
            assert_eq!(r[0].distance, 0.0);
        }
    }

    #[test]
    fn matches_linear_scan() {
        let pts = random_points(2000, 6, 5);
        let idx = NeighborIndex::build(pts.clone()).unwrap();
        let queries = random_points(500, 6, 6);
        for q in queries.iter_rows() {
            assert_eq!(idx.query(q, 7).unwrap(), linear_scan(&pts, q, 7));
        }
        let q = queries.row(0);
        let all = idx.query(q, pts.rows()).unwrap();
        assert_eq!(all.len(), pts.rows());
        assert!(all.windows(2).all(|w| w[0].distance <= w[1].distance));
    }

    #[test]
    fn grid_ties_match_linear_scan() {
        // integer lattice produces many equal distances
        let mut rows = Vec::new();
        for a in 0..8 {
            for b in 0..8 {
                rows.push(vec![a as f64, b as f64]);
            }
        }
        let pts = Matrix::from_rows(&rows).unwrap();
        let idx = NeighborIndex::build(pts.clone()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let q = [
                rng.random_range(0..8) as f64 + 0.5,
                rng.random_range(0..8) as f64,
            ];
            assert_eq!(idx.query(&q, 5).unwrap(), linear_scan(&pts, &q, 5));
        }
    }
}
