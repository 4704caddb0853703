use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::math::Vec3;

pub const MAX_LLOYD_ITERATIONS: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct Clustering {
    /// One center per requested cluster; an empty cluster keeps its last center.
    pub centers: Vec<Vec3>,
    /// Cluster index for every input point.
    pub assignments: Vec<usize>,
    /// `true` for clusters that own no point.
    pub empty: Vec<bool>,
}

impl Clustering {
    pub fn members(&self, cluster: usize) -> impl Iterator<Item = usize> + '_ {
        self.assignments.iter().enumerate().filter(move |(_, &a)| a == cluster).map(|(i, _)| i)
    }
}

fn nearest(p: &Vec3, centers: &[Vec3]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, c) in centers.iter().enumerate() {
        let d = (p - c).norm_squared();
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    best
}

/// Lloyd iterations from a k-means++ start. Stops when assignments settle or
/// after [`MAX_LLOYD_ITERATIONS`]. With `k` above the point count every point
/// gets its own cluster and the rest are flagged empty.
///
/// Panics if `k == 0` or `points` is empty.
pub fn kmeans_cluster(points: &[Vec3], k: usize, seed: u64) -> Clustering {
    assert!(k >= 1 && !points.is_empty(), "k-means needs k >= 1 and at least one point");
    let n = points.len();
    if k >= n {
        let mut centers = points.to_vec();
        centers.resize(k, points[0]);
        let mut empty = vec![false; n];
        empty.resize(k, true);
        return Clustering {
            centers,
            assignments: (0..n).collect(),
            empty,
        };
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centers = vec![points[rng.random_range(0..n)]];
    let mut d2: Vec<f64> = points.iter().map(|p| (p - centers[0]).norm_squared()).collect();
    while centers.len() < k {
        let next = match WeightedIndex::new(&d2) {
            Ok(w) => points[w.sample(&mut rng)],
            // Every point already coincides with a center.
            Err(_) => centers[0],
        };
        for (d, p) in d2.iter_mut().zip(points) {
            *d = d.min((p - next).norm_squared());
        }
        centers.push(next);
    }

    let mut assignments: Vec<usize> = points.iter().map(|p| nearest(p, &centers)).collect();
    for _ in 0..MAX_LLOYD_ITERATIONS {
        let mut sums = vec![Vec3::zeros(); k];
        let mut counts = vec![0usize; k];
        for (p, &a) in points.iter().zip(&assignments) {
            sums[a] += p;
            counts[a] += 1;
        }
        for c in 0..k {
            if counts[c] > 0 {
                centers[c] = sums[c] / counts[c] as f64;
            }
        }
        let next: Vec<usize> = points.iter().map(|p| nearest(p, &centers)).collect();
        if next == assignments {
            break;
        }
        assignments = next;
    }
    let mut empty = vec![true; k];
    for &a in &assignments {
        empty[a] = false;
    }
    Clustering { centers, assignments, empty }
}
