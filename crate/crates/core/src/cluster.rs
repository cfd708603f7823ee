//! Connectivity structure of the Boolean model: union-find over balls linked
//! by strict overlap, with a radius-split spatial hash to avoid all-pairs
//! scans under heavy-tailed radii.

use std::collections::HashMap;

use crate::geom::Point;

/// Union-find with path halving and union by rank.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    pub fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    pub fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
    }

    pub fn same(&mut self, a: usize, b: usize) -> bool {
        self.find(a) == self.find(b)
    }
}

/// Partition of the balls into maximal overlap-connected components.
#[derive(Debug, Clone)]
pub struct ClusterLabels {
    /// Compacted cluster index per point, in `0..cluster_count()`.
    pub labels: Vec<usize>,
    /// Member point indices per cluster.
    pub clusters: Vec<Vec<usize>>,
}

impl ClusterLabels {
    pub fn cluster_count(&self) -> usize {
        self.clusters.len()
    }
}

/// Exact overlap partition of the balls `B_{radii[i]}(points[i])`.
///
/// Balls are processed in increasing radius order and registered in a grid of
/// cell size twice the median radius, each ball occupying every cell its
/// bounding box meets. Two strictly overlapping balls always share a grid
/// cell, so gathering occupants of the incoming ball's cells finds every
/// overlap; balls far above the median touch many cells but are rare.
pub fn build_clusters(points: &[Point], radii: &[f64]) -> ClusterLabels {
    assert_eq!(points.len(), radii.len());
    let n = points.len();
    let mut uf = UnionFind::new(n);
    if n > 0 {
        let dim = points[0].dim();
        let mut sorted_r = radii.to_vec();
        sorted_r.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = sorted_r[n / 2];
        let cell = (2.0 * median).max(1e-12);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| radii[a].partial_cmp(&radii[b]).unwrap());
        let mut grid: HashMap<(i64, i64, i64), Vec<usize>> = HashMap::new();
        let mut stamp = vec![usize::MAX; n];
        for &i in &order {
            let (c, r) = (&points[i], radii[i]);
            let mut lo = [0i64; 3];
            let mut hi = [0i64; 3];
            for a in 0..dim {
                lo[a] = ((c.coord(a) - r) / cell).floor() as i64;
                hi[a] = ((c.coord(a) + r) / cell).floor() as i64;
            }
            for kz in lo[2]..=hi[2] {
                for ky in lo[1]..=hi[1] {
                    for kx in lo[0]..=hi[0] {
                        let slot = grid.entry((kx, ky, kz)).or_default();
                        for &j in slot.iter() {
                            if stamp[j] == i {
                                continue;
                            }
                            stamp[j] = i;
                            if c.dist(&points[j]) < r + radii[j] {
                                uf.union(i, j);
                            }
                        }
                        slot.push(i);
                    }
                }
            }
        }
    }
    labels_from(&mut uf, n)
}

fn labels_from(uf: &mut UnionFind, n: usize) -> ClusterLabels {
    let mut root_to_idx: HashMap<usize, usize> = HashMap::new();
    let mut labels = vec![0usize; n];
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for i in 0..n {
        let root = uf.find(i);
        let next = clusters.len();
        let idx = *root_to_idx.entry(root).or_insert(next);
        if idx == clusters.len() {
            clusters.push(Vec::new());
        }
        labels[i] = idx;
        clusters[idx].push(i);
    }
    ClusterLabels { labels, clusters }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radius::RadiusLaw;
    use crate::seed::Seed;
    use rand::Rng;

    fn brute_force(points: &[Point], radii: &[f64]) -> ClusterLabels {
        let n = points.len();
        let mut uf = UnionFind::new(n);
        for i in 0..n {
            for j in 0..i {
                if points[i].dist(&points[j]) < radii[i] + radii[j] {
                    uf.union(i, j);
                }
            }
        }
        labels_from(&mut uf, n)
    }

    fn same_partition(a: &ClusterLabels, b: &ClusterLabels) -> bool {
        let n = a.labels.len();
        n == b.labels.len()
            && a.cluster_count() == b.cluster_count()
            && (0..n).all(|i| {
                (0..n).all(|j| (a.labels[i] == a.labels[j]) == (b.labels[i] == b.labels[j]))
            })
    }

    #[test]
    fn three_ball_example() {
        let pts = [
            Point::new(&[0.0, 0.0]),
            Point::new(&[3.0, 0.0]),
            Point::new(&[10.0, 0.0]),
        ];
        let labels = build_clusters(&pts, &[2.0, 2.0, 2.0]);
        assert_eq!(labels.cluster_count(), 2);
        assert_eq!(labels.labels[0], labels.labels[1]);
        assert_ne!(labels.labels[0], labels.labels[2]);
    }

    #[test]
    fn empty_set() {
        let labels = build_clusters(&[], &[]);
        assert_eq!(labels.cluster_count(), 0);
        assert!(labels.labels.is_empty());
    }

    #[test]
    fn matches_brute_force_on_random_configurations() {
        for seed in 0..100u64 {
            let mut rng = Seed(seed).rng();
            let dim = 1 + (seed % 3) as usize;
            let n = rng.gen_range(0..=200);
            let law = RadiusLaw::Pareto {
                scale: 0.3,
                tail: 1.5,
            };
            let mut pts = Vec::with_capacity(n);
            let mut radii = Vec::with_capacity(n);
            for _ in 0..n {
                let mut c = [0.0; 3];
                for a in c.iter_mut().take(dim) {
                    *a = rng.gen_range(-10.0..10.0);
                }
                pts.push(Point::new(&c[..dim]));
                radii.push(law.sample(&mut rng));
            }
            let fast = build_clusters(&pts, &radii);
            let slow = brute_force(&pts, &radii);
            assert!(
                same_partition(&fast, &slow),
                "partition mismatch at seed {seed}"
            );
        }
    }
}
