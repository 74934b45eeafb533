//! Exact nearest-neighbor search over a static point set.
//!
//! Median-split kd-tree on the widest axis of each subset. Candidates are
//! ordered by (squared distance, original index) so results are fully
//! deterministic and identical to a linear scan even under distance ties.

use super::MetricsError;
use crate::types::Point3;

struct Node {
    point: u32,
    axis: u8,
    left: i32,
    right: i32,
}

pub struct SpatialIndex {
    pts: Vec<Point3>,
    nodes: Vec<Node>,
    root: i32,
}

impl SpatialIndex {
    pub fn build(points: &[Point3]) -> Result<SpatialIndex, MetricsError> {
        if points.is_empty() {
            return Err(MetricsError::EmptyCloud);
        }
        let mut idx: Vec<u32> = (0..points.len() as u32).collect();
        let mut tree = SpatialIndex {
            pts: points.to_vec(),
            nodes: Vec::with_capacity(points.len()),
            root: -1,
        };
        tree.root = tree.build_rec(&mut idx);
        Ok(tree)
    }

    pub fn len(&self) -> usize {
        self.pts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pts.is_empty()
    }

    fn build_rec(&mut self, idx: &mut [u32]) -> i32 {
        if idx.is_empty() {
            return -1;
        }
        // split on the widest axis of this subset
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for &i in idx.iter() {
            let p = self.pts[i as usize];
            for a in 0..3 {
                lo[a] = lo[a].min(p.coord(a));
                hi[a] = hi[a].max(p.coord(a));
            }
        }
        let mut axis = 0usize;
        for a in 1..3 {
            if hi[a] - lo[a] > hi[axis] - lo[axis] {
                axis = a;
            }
        }
        let mid = idx.len() / 2;
        let pts = &self.pts;
        idx.select_nth_unstable_by(mid, |&a, &b| {
            let ka = (pts[a as usize].coord(axis), a);
            let kb = (pts[b as usize].coord(axis), b);
            ka.partial_cmp(&kb).unwrap()
        });
        let point = idx[mid];
        let node_slot = self.nodes.len();
        self.nodes.push(Node {
            point,
            axis: axis as u8,
            left: -1,
            right: -1,
        });
        let (lo_half, rest) = idx.split_at_mut(mid);
        let left = self.build_rec(lo_half);
        let right = self.build_rec(&mut rest[1..]);
        self.nodes[node_slot].left = left;
        self.nodes[node_slot].right = right;
        node_slot as i32
    }

    /// Index and Euclidean distance of the nearest point to `q`.
    pub fn nearest(&self, q: &Point3) -> (usize, f64) {
        let mut best = (f64::INFINITY, u32::MAX);
        self.nearest_rec(self.root, q, &mut best);
        (best.1 as usize, best.0.sqrt())
    }

    fn nearest_rec(&self, node: i32, q: &Point3, best: &mut (f64, u32)) {
        if node < 0 {
            return;
        }
        let n = &self.nodes[node as usize];
        let p = self.pts[n.point as usize];
        let d2 = p.distance_sq(q);
        if (d2, n.point) < *best {
            *best = (d2, n.point);
        }
        let diff = q.coord(n.axis as usize) - p.coord(n.axis as usize);
        let (near, far) = if diff < 0.0 {
            (n.left, n.right)
        } else {
            (n.right, n.left)
        };
        self.nearest_rec(near, q, best);
        // visit the far side on ties too, so index tie-breaks stay exact
        if diff * diff <= best.0 {
            self.nearest_rec(far, q, best);
        }
    }

    /// The k nearest points to `q`, ascending by (distance, index).
    pub fn k_nearest(&self, q: &Point3, k: usize) -> Vec<(usize, f64)> {
        let k = k.min(self.pts.len());
        let mut heap: Vec<(f64, u32)> = Vec::with_capacity(k + 1);
        self.knn_rec(self.root, q, k, &mut heap);
        heap.sort_by(|a, b| a.partial_cmp(b).unwrap());
        heap.into_iter()
            .map(|(d2, i)| (i as usize, d2.sqrt()))
            .collect()
    }

    fn knn_rec(&self, node: i32, q: &Point3, k: usize, heap: &mut Vec<(f64, u32)>) {
        if node < 0 {
            return;
        }
        let n = &self.nodes[node as usize];
        let p = self.pts[n.point as usize];
        let cand = (p.distance_sq(q), n.point);
        if heap.len() < k {
            heap.push(cand);
            if heap.len() == k {
                heap.sort_by(|a, b| a.partial_cmp(b).unwrap());
            }
        } else if cand < heap[k - 1] {
            let pos = heap.partition_point(|e| *e < cand);
            heap.insert(pos, cand);
            heap.pop();
        }
        let diff = q.coord(n.axis as usize) - p.coord(n.axis as usize);
        let (near, far) = if diff < 0.0 {
            (n.left, n.right)
        } else {
            (n.right, n.left)
        };
        self.knn_rec(near, q, k, heap);
        if heap.len() < k || diff * diff <= heap[k - 1].0 {
            self.knn_rec(far, q, k, heap);
        }
    }
}
